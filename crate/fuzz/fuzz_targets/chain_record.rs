#![no_main]

use dglm_ppm::gibbs::ChainSample;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(line) = std::str::from_utf8(data) else { return };
    if let Ok(s) = ChainSample::from_json_line(line) {
        assert!(s.delta > 0.0 && s.delta < 1.0);
        let again = ChainSample::from_json_line(&s.to_json_line()).expect("re-parse");
        assert_eq!(s.u, again.u);
    }
});
