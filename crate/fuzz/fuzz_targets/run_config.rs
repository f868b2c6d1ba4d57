#![no_main]

use cornershuffle_cli::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(config) = RunConfig::from_json(text) {
        let again =
            RunConfig::from_json(&config.to_json()).expect("serialized config re-validates");
        assert_eq!(again.to_json(), config.to_json());
    }
});
