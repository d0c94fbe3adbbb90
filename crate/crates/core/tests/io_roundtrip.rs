use model_space::hardy::CircleTrace;
use model_space::io::{
    format_window, gram_from_text, parse_gram_csv, parse_gram_meta, parse_inner_spec,
    parse_node_csv, parse_spectrum_csv, parse_trace_csv, parse_window, trace_from_csv,
    write_gram_csv, write_gram_meta, write_inner_spec, write_node_csv, write_trace_csv,
    InnerSpecDoc, NodeList,
};
use model_space::kernels::GramMatrix;
use model_space::linalg::CMatrix;
use model_space::scenario::ScenarioConfig;
use model_space::C64;
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::ZERO | prop::num::f64::SUBNORMAL
}

proptest! {
    #[test]
    fn window_roundtrip(a in -1_000_000i64..1_000_000, len in 0i64..1000) {
        let b = a + len;
        prop_assert_eq!(parse_window(&format_window(a, b)).unwrap(), (a, b));
    }

    #[test]
    fn node_csv_roundtrip(first in -10_000i64..10_000, values in prop::collection::vec(finite(), 1..40)) {
        let nodes = NodeList { first_index: first, values };
        prop_assert_eq!(parse_node_csv(&write_node_csv(&nodes)).unwrap(), nodes);
    }

    #[test]
    fn trace_csv_roundtrip(log in 3u32..8, seed in prop::collection::vec((finite(), finite()), 128)) {
        let n = 1usize << log;
        let samples: Vec<C64> = seed[..n].iter().map(|&(a, b)| C64::new(a, b)).collect();
        let trace = CircleTrace::from_samples(samples.clone()).unwrap();
        let text = write_trace_csv(&trace);
        prop_assert_eq!(parse_trace_csv(&text).unwrap(), samples.clone());
        let loaded = trace_from_csv(&text).unwrap();
        prop_assert_eq!(loaded.samples(), &samples[..]);
    }

    #[test]
    fn gram_csv_roundtrip(first in -500i64..500, n in 1usize..8, raw in prop::collection::vec((finite(), finite()), 64)) {
        let entries = CMatrix::from_fn(n, n, |r, c| {
            let (a, b) = raw[r * 8 + c];
            C64::new(a, b)
        });
        let gram = GramMatrix::new(entries.clone(), first);
        prop_assert_eq!(parse_gram_csv(&write_gram_csv(&gram)).unwrap(), entries.clone());
        let meta = write_gram_meta(&gram.meta());
        prop_assert_eq!(parse_gram_meta(&meta).unwrap(), gram.meta());
        let back = gram_from_text(&write_gram_csv(&gram), &meta).unwrap();
        prop_assert_eq!(back.first_index(), first);
        prop_assert_eq!(back.entries(), &entries);
    }

    #[test]
    fn parsers_never_panic(text in "\\PC{0,200}") {
        let _ = parse_window(&text);
        let _ = parse_node_csv(&text);
        let _ = parse_trace_csv(&text);
        let _ = trace_from_csv(&text);
        let _ = parse_gram_csv(&text);
        let _ = parse_gram_meta(&text);
        let _ = gram_from_text(&text, &text);
        let _ = parse_spectrum_csv(&text);
        let _ = parse_inner_spec(&text);
        let _ = ScenarioConfig::from_toml(&text);
    }

    #[test]
    fn csv_shaped_noise_never_panics(rows in prop::collection::vec(
        (any::<i64>(), any::<i64>(), "[-+0-9.eE]{0,8}", "[-+0-9.eEnaif]{0,8}"), 0..12)) {
        let text: String = rows
            .iter()
            .map(|(a, b, c, d)| format!("{a},{b},{c},{d}\n"))
            .collect();
        let _ = parse_gram_csv(&text);
        let _ = parse_spectrum_csv(&text);
        let three: String = rows.iter().map(|(a, _, c, d)| format!("{a},{c},{d}\n")).collect();
        let _ = parse_trace_csv(&three);
        let two: String = rows.iter().map(|(a, _, c, _)| format!("{a},{c}\n")).collect();
        let _ = parse_node_csv(&two);
    }
}

#[test]
fn inner_spec_roundtrip() {
    let text = "exp_type = 1.25\nzeros = [[0.5, 1.0], [-2.0, 0.25]]\n";
    let doc: InnerSpecDoc = parse_inner_spec(text).unwrap();
    assert_eq!(parse_inner_spec(&write_inner_spec(&doc)).unwrap(), doc);
}

#[test]
fn extreme_gram_sidecar_is_an_error() {
    let csv = "row,col,re,im\n0,0,1,0\n";
    let meta = format!(
        "first_index = {}\nlast_index = {}\nsize = 1\n",
        i64::MIN,
        i64::MAX
    );
    assert!(gram_from_text(csv, &meta).is_err());
}

#[test]
fn scenario_configs_roundtrip() {
    for name in model_space::scenario::ScenarioName::ALL {
        let config = ScenarioConfig::defaults(name);
        assert_eq!(
            ScenarioConfig::from_toml(&config.to_toml()).unwrap(),
            config
        );
    }
}
