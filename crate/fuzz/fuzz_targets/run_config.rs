#![no_main]

use dglm_ppm::config::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = RunConfig::from_toml_str(text) {
        // a valid config survives a round trip
        let again = RunConfig::from_toml_str(&cfg.to_toml()).expect("re-parse");
        assert_eq!(cfg, again);
    }
});
