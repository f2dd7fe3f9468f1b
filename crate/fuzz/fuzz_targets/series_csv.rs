#![no_main]

use dglm_ppm::io::parse_series_csv;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(s) = parse_series_csv(text) {
        assert_eq!(s.t.len(), s.y.len());
        assert!(s.y.iter().all(|v| v.is_finite()));
        assert!(s.x.is_empty() || s.x.len() == s.y.len());
    }
});
