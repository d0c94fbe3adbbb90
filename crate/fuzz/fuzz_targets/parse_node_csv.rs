#![no_main]

use libfuzzer_sys::fuzz_target;
use model_space::io::{parse_node_csv, write_node_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(nodes) = parse_node_csv(text) {
        let again = parse_node_csv(&write_node_csv(&nodes)).unwrap();
        assert_eq!(again.first_index, nodes.first_index);
        assert_eq!(again.values.len(), nodes.values.len());
    }
});
