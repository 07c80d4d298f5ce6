//! Preset-level checks that need the real parameter sets.

use evfc_core::packing::{pack, CleartextVector};
use evfc_core::rng::{seeded, Stream};
use evfc_core::scheme::{encrypt, keygen, noise_budget, Preset, SchemeParams};

#[test]
fn desk_fresh_noise_budget_in_expected_band() {
    // Fresh budget ≈ log2(q/t) − fresh-noise bits: 240 − 48 ≈ 192 minus
    // roughly 11 bits of fresh noise. Measured 180.0; pin a band wide
    // enough for sampler variance across seeds.
    let params = SchemeParams::preset(Preset::Desk).unwrap();
    let keys = keygen(&params, [], &mut seeded(7, Stream::KeyGen));
    let mut rng = seeded(8, Stream::Camera);
    let x = CleartextVector::from_prefix(params.ring(), &[1, 2, 3]).unwrap();
    let m = pack(params.ring(), &x).unwrap();
    for _ in 0..5 {
        let ct = encrypt(&params, &keys.public, &m, &mut rng).unwrap();
        let budget = noise_budget(&keys.secret, &ct).budget_bits;
        assert!((170.0..190.0).contains(&budget), "fresh budget {budget}");
    }
}

#[test]
fn desk_keygen_nine_galois_keys_for_width_500() {
    // ⌈log2 500⌉ = 9 power-of-two steps: 1, 2, 4, ..., 256.
    let params = SchemeParams::preset(Preset::Desk).unwrap();
    let steps = evfc_core::pipeline::rotation_steps(500);
    assert_eq!(steps.len(), 9);
    let keys = keygen(
        &params,
        steps.iter().copied(),
        &mut seeded(9, Stream::KeyGen),
    );
    assert_eq!(keys.galois.len(), 9);
    assert_eq!(
        keys.galois.keys().copied().collect::<Vec<_>>(),
        vec![1, 2, 4, 8, 16, 32, 64, 128, 256]
    );
}

#[test]
fn shared_types_are_send_and_sync() {
    // Parameters and key material are immutable after creation and are
    // shared across role threads.
    fn assert_send_sync<T: Send + Sync>() {}
    assert_send_sync::<evfc_core::RingParams>();
    assert_send_sync::<evfc_core::SchemeParams>();
    assert_send_sync::<evfc_core::KeySet>();
    assert_send_sync::<evfc_core::Ciphertext>();
    assert_send_sync::<evfc_core::PlaintextPoly>();
}
