#![no_main]

use infocost::config::ScenarioConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(config) = ScenarioConfig::parse(text) else {
        return;
    };
    // A parsed config survives a serialize/parse round trip unchanged.
    let again = serde_json::to_string(&config).expect("config serializes");
    assert_eq!(ScenarioConfig::parse(&again).expect("round trip parses"), config);
});
