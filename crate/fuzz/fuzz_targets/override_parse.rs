#![no_main]

use infocost::config::{parse_override, ScenarioConfig};
use infocost::scenarios::ScenarioId;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(spec) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok((path, _)) = parse_override(spec) {
        assert!(!path.is_empty());
    }
    let mut config = ScenarioConfig::new(ScenarioId::Erasure);
    let before = config.clone();
    if config.apply_override(spec).is_err() {
        assert_eq!(config, before);
    }
});
