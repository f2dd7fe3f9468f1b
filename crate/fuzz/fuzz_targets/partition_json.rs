#![no_main]

use dglm_ppm::partition::{to_indicator, to_partition, Partition};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = Partition::from_json(text) {
        assert_eq!(to_partition(&to_indicator(&p)), p);
        assert_eq!(Partition::from_json(&p.to_json()).expect("re-parse"), p);
    }
});
