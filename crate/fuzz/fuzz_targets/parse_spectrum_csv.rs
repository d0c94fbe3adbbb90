#![no_main]

use libfuzzer_sys::fuzz_target;
use model_space::io::parse_spectrum_csv;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(rows) = parse_spectrum_csv(text) {
        assert!(rows.iter().all(|r| r.k < r.size && r.sigma >= 0.0));
    }
});
