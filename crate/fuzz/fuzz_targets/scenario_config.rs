#![no_main]

use libfuzzer_sys::fuzz_target;
use model_space::scenario::ScenarioConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(config) = ScenarioConfig::from_toml(text) {
        assert_eq!(
            ScenarioConfig::from_toml(&config.to_toml()).unwrap(),
            config
        );
    }
});
