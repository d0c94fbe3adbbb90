#![no_main]

use libfuzzer_sys::fuzz_target;
use model_space::io::{parse_trace_csv, trace_from_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let _ = parse_trace_csv(text);
    let _ = trace_from_csv(text);
});
