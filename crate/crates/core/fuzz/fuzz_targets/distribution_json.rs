#![no_main]

use authcap::info::DiscreteDistribution;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(d) = serde_json::from_slice::<DiscreteDistribution>(data) {
        assert!(d.probs().iter().all(|p| p.is_finite() && *p >= 0.0));
        let s: f64 = d.probs().iter().sum();
        assert!((s - 1.0).abs() <= 1e-6, "accepted mass {s}");
    }
});
