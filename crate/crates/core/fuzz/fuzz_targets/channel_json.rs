#![no_main]

use authcap::info::Channel;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(c) = serde_json::from_slice::<Channel>(data) {
        for x in 0..c.inputs() {
            let s: f64 = c.row(x).iter().sum();
            assert!((s - 1.0).abs() <= 1e-6, "accepted row {x} sums to {s}");
        }
        let back = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<Channel>(&back).unwrap(), c);
    }
});
