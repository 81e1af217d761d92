#![no_main]

//! Feeds arbitrary observations and helper indices to the decoder of a
//! fixed small codebook.

use std::sync::OnceLock;

use authcap::binary::BinaryModelParams;
use authcap::classify::ClassifierSettings;
use authcap::info::Channel;
use authcap::sim::{authenticate, generate_codebook, Codebook, SimConfig};
use libfuzzer_sys::fuzz_target;

fn book() -> &'static Codebook {
    static BOOK: OnceLock<Codebook> = OnceLock::new();
    BOOK.get_or_init(|| {
        let model = BinaryModelParams::new(0.1, 0.5, 0.2)
            .unwrap()
            .to_model(&ClassifierSettings::default())
            .unwrap();
        let cfg = SimConfig::new(6, Channel::bsc(0.05).unwrap(), 0.1);
        generate_codebook(&model, &cfg).unwrap()
    })
}

fuzz_target!(|data: &[u8]| {
    let Some((&bin, y)) = data.split_first() else { return };
    let b = book();
    if let Ok(a) = authenticate(b, y, bin as usize) {
        assert!((1..=b.keys()).contains(&a.key));
    }
});
