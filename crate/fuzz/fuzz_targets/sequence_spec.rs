#![no_main]

use libfuzzer_sys::fuzz_target;
use model_space::scenario::{generate, SequenceSpec};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = text.parse::<SequenceSpec>() {
        if !matches!(spec, SequenceSpec::File { .. }) {
            let _ = generate(&spec, -8, 8, 1);
        }
    }
});
