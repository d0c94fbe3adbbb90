#![no_main]

use libfuzzer_sys::fuzz_target;
use model_space::io::{gram_from_text, parse_gram_csv, parse_gram_meta};

// The input is a Gram CSV and its sidecar, separated by a line of `%%`.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let (csv, meta) = text.split_once("\n%%\n").unwrap_or((text, ""));
    let _ = parse_gram_csv(csv);
    let _ = parse_gram_meta(meta);
    let _ = gram_from_text(csv, meta);
});
