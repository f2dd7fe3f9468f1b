#![no_main]

use dglm_ppm::partition::IndicatorVector;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(u) = text.parse::<IndicatorVector>() {
        assert_eq!(u.to_string().parse::<IndicatorVector>().expect("re-parse"), u);
        assert_eq!(u.num_blocks(), u.n() - u.ones());
    }
});
