#![no_main]

use libfuzzer_sys::fuzz_target;
use model_space::io::{parse_inner_spec, resolve_inner_spec, IoError};

const NODES: &str = "index,value\n-3,-3\n-2,-2\n-1,-1\n0,0\n1,1\n2,2\n3,3\n";

// Any node file the document names resolves to a small lattice.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(doc) = parse_inner_spec(text) {
        let _ = resolve_inner_spec(&doc, |_| Ok::<_, IoError>(NODES.to_string()));
    }
});
