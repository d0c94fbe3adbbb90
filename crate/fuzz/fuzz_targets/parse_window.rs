#![no_main]

use libfuzzer_sys::fuzz_target;
use model_space::io::{format_window, parse_window};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok((a, b)) = parse_window(text) {
        assert!(a <= b);
        assert_eq!(parse_window(&format_window(a, b)).unwrap(), (a, b));
    }
});
