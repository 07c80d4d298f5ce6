//! The encrypted visual feedback evaluation.
//!
//! Offline, the designer packs the pixel-index weight vector
//! w = [-n/2, ..., n/2-1, 0, ...] as a plaintext and encrypts the scaled
//! gain vector [⌊Δ·K⌉, 0, ...]. Online, the camera packs and encrypts each
//! frame into a single ciphertext; the server evaluates the
//! brightness-weighted sum and the total brightness with ⌈log2 n⌉
//! rotate-and-add rounds per chain; the actuator decrypts both results,
//! reads slot 0 of each, and forms u = Δ⁻¹·num/den in the clear.
//!
//! Slots n..M-1 are zeroed at encryption time, which is what makes the
//! rotation wrap-around contribute nothing to slot 0. Slots other than 0
//! hold unspecified values after evaluation. The image width n is treated
//! as public (the weight plaintext reveals it to the server).
//!
//! A per-pixel baseline without packing (one degree-zero ciphertext per
//! pixel) is provided for the performance comparison; both paths share
//! the same ring parameters and the same homomorphic primitives.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::error::{Error, Result};
use crate::packing::{pack, unpack, CleartextVector};
use crate::scheme::noise::budget_from_norm;
use crate::scheme::{
    add, cipher, cmult, encrypt, pmult, rotate, Ciphertext, KeySwitchKey, PlaintextPoly,
    SchemeParams, SecretKey,
};
use crate::vision::{quantize_gain, ControllerConfig, Image};

/// Homomorphic operation counters, filled by instrumented call sites.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub encryptions: u64,
    pub additions: u64,
    pub plain_mults: u64,
    pub cipher_mults: u64,
    pub rotations: u64,
}

/// ⌈log2 n⌉ for n ≥ 1.
pub fn rounds_for_width(n: usize) -> usize {
    assert!(n >= 1);
    (usize::BITS - (n - 1).leading_zeros()) as usize
}

/// The power-of-two rotation steps the server needs for width-n images:
/// 2^0 .. 2^(⌈log2 n⌉ - 1).
pub fn rotation_steps(n: usize) -> BTreeSet<usize> {
    (0..rounds_for_width(n)).map(|k| 1usize << k).collect()
}

/// Designer-side precomputed data.
#[derive(Debug, Clone)]
pub struct OfflineBundle {
    /// Pack([-n/2 ... n/2-1  0 ... 0]).
    pub weight_plain: PlaintextPoly,
    /// Enc(Pack([⌊Δ·K⌉ 0 ... 0])).
    pub gain_ct: Ciphertext,
    pub n: usize,
    pub delta: f64,
    pub gain_quantized: i64,
}

/// Validates the configuration and builds the offline bundle.
pub fn offline_setup(
    params: &SchemeParams,
    pk: &crate::scheme::PublicKey,
    gain: f64,
    delta: f64,
    n: usize,
    rng: &mut (impl Rng + ?Sized),
) -> Result<OfflineBundle> {
    assert!(n >= 2 && n % 2 == 0, "n must be even");
    let m_slots = params.slot_count();
    if n > m_slots {
        return Err(Error::ImageTooWide { n, m: m_slots });
    }
    let t = params.plain_modulus();
    ControllerConfig::new(gain, delta, t).validate(n)?;
    let gain_quantized = quantize_gain(gain, delta, t)?;

    let weights: Vec<i64> = (0..n).map(|j| j as i64 - n as i64 / 2).collect();
    let weight_plain = pack(
        params.ring(),
        &CleartextVector::from_prefix(params.ring(), &weights)?,
    )?;

    let gain_vec = CleartextVector::from_prefix(params.ring(), &[gain_quantized])?;
    let gain_ct = encrypt(params, pk, &pack(params.ring(), &gain_vec)?, rng)?;

    Ok(OfflineBundle {
        weight_plain,
        gain_ct,
        n,
        delta,
        gain_quantized,
    })
}

/// Packs a frame into slots 0..n-1 (slot j holds pixel i = j - n/2),
/// zero-fills the rest, and encrypts: exactly one encryption per frame.
pub fn camera_encrypt(
    params: &SchemeParams,
    pk: &crate::scheme::PublicKey,
    img: &Image,
    rng: &mut (impl Rng + ?Sized),
) -> Result<Ciphertext> {
    let values: Vec<i64> = img.pixels().iter().map(|&v| v as i64).collect();
    let x = CleartextVector::from_prefix(params.ring(), &values)?;
    encrypt(params, pk, &pack(params.ring(), &x)?, rng)
}

/// The two server outputs: numerator (gain ⊗ weighted sum) and
/// denominator (total brightness), plus the operation counts.
#[derive(Debug, Clone)]
pub struct ServerResult {
    pub num: Ciphertext,
    pub den: Ciphertext,
    pub ops: OpCounts,
}

/// Runs the packed evaluation: one plaintext multiply, ⌈log2 n⌉
/// rotate-and-add rounds on each of the two chains, one ciphertext
/// multiply by the encrypted gain.
pub fn server_evaluate(
    bundle: &OfflineBundle,
    image_ct: &Ciphertext,
    galois: &BTreeMap<usize, KeySwitchKey>,
    rlk: &KeySwitchKey,
) -> Result<ServerResult> {
    let (result, _) = evaluate_chains(bundle, image_ct, galois, rlk, false)?;
    Ok(result)
}

/// As [`server_evaluate`], but also returns the partial (den, num) chains
/// after every round, index 0 being the initial state. Diagnostic.
pub fn server_evaluate_traced(
    bundle: &OfflineBundle,
    image_ct: &Ciphertext,
    galois: &BTreeMap<usize, KeySwitchKey>,
    rlk: &KeySwitchKey,
) -> Result<(ServerResult, Vec<(Ciphertext, Ciphertext)>)> {
    let (result, trace) = evaluate_chains(bundle, image_ct, galois, rlk, true)?;
    Ok((result, trace))
}

fn evaluate_chains(
    bundle: &OfflineBundle,
    image_ct: &Ciphertext,
    galois: &BTreeMap<usize, KeySwitchKey>,
    rlk: &KeySwitchKey,
    traced: bool,
) -> Result<(ServerResult, Vec<(Ciphertext, Ciphertext)>)> {
    let mut ops = OpCounts::default();
    let rounds = rounds_for_width(bundle.n);

    let mut num_chain = pmult(&bundle.weight_plain, image_ct)?;
    ops.plain_mults += 1;
    let mut den_chain = image_ct.clone();

    let mut trace = Vec::new();
    if traced {
        trace.push((den_chain.clone(), num_chain.clone()));
    }
    for level in 1..=rounds {
        let step = 1usize << (level - 1);
        let den_rot = rotate(&den_chain, step, galois)?;
        ops.rotations += 1;
        den_chain = add(&den_chain, &den_rot)?;
        ops.additions += 1;
        let num_rot = rotate(&num_chain, step, galois)?;
        ops.rotations += 1;
        num_chain = add(&num_chain, &num_rot)?;
        ops.additions += 1;
        if traced {
            trace.push((den_chain.clone(), num_chain.clone()));
        }
    }

    let num = cmult(&bundle.gain_ct, &num_chain, rlk)?;
    ops.cipher_mults += 1;

    Ok((
        ServerResult {
            num,
            den: den_chain,
            ops,
        },
        trace,
    ))
}

/// What the actuator recovers from one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActuatorOutput {
    /// The control input u = Δ⁻¹·num/den.
    pub u: f64,
    /// Slot 0 of the decrypted numerator: ⌊Δ·K⌉·I_w mod t.
    pub num: i64,
    /// Slot 0 of the decrypted denominator: total brightness.
    pub den: i64,
    /// Minimum noise budget of the two result ciphertexts, in bits.
    pub budget_bits: f64,
}

/// Decrypts both results, checks the noise budget, extracts slot 0 of
/// each, and performs the division in the clear.
pub fn actuator_decode(
    sk: &SecretKey,
    result: &ServerResult,
    delta: f64,
) -> Result<ActuatorOutput> {
    let (num, num_budget) = decrypt_slot0(sk, &result.num);
    let (den, den_budget) = decrypt_slot0(sk, &result.den);
    let budget_bits = num_budget.min(den_budget);
    if budget_bits <= 0.0 {
        return Err(Error::NoiseOverflow { budget_bits });
    }
    if den == 0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(ActuatorOutput {
        u: num as f64 / (delta * den as f64),
        num,
        den,
        budget_bits,
    })
}

/// Slot 0 of a decrypted ciphertext plus its measured noise budget.
fn decrypt_slot0(sk: &SecretKey, ct: &Ciphertext) -> (i64, f64) {
    let x = cipher::phase(sk, ct);
    let ring = x.params().clone();
    let (plain, norm) = cipher::decode_phase(&x, true);
    let budget = budget_from_norm(&ring, &norm.expect("noise requested"));
    (unpack(&plain).slots()[0], budget)
}

/// Naive offline data: the gain as a degree-zero ciphertext and one
/// degree-zero weight plaintext per pixel.
#[derive(Debug, Clone)]
pub struct NaiveOffline {
    pub gain_ct: Ciphertext,
    pub weights: Vec<PlaintextPoly>,
    pub n: usize,
    pub delta: f64,
    pub gain_quantized: i64,
}

pub fn naive_offline_setup(
    params: &SchemeParams,
    pk: &crate::scheme::PublicKey,
    gain: f64,
    delta: f64,
    n: usize,
    rng: &mut (impl Rng + ?Sized),
) -> Result<NaiveOffline> {
    assert!(n >= 2 && n % 2 == 0, "n must be even");
    let t = params.plain_modulus();
    ControllerConfig::new(gain, delta, t).validate(n)?;
    let gain_quantized = quantize_gain(gain, delta, t)?;
    let gain_ct = encrypt(
        params,
        pk,
        &PlaintextPoly::constant(params.ring(), gain_quantized)?,
        rng,
    )?;
    let weights = (0..n)
        .map(|j| PlaintextPoly::constant(params.ring(), j as i64 - n as i64 / 2))
        .collect::<Result<Vec<_>>>()?;
    Ok(NaiveOffline {
        gain_ct,
        weights,
        n,
        delta,
        gain_quantized,
    })
}

/// Encrypts every pixel individually as a degree-zero polynomial:
/// n encryptions per frame.
pub fn naive_camera_encrypt(
    params: &SchemeParams,
    pk: &crate::scheme::PublicKey,
    img: &Image,
    rng: &mut (impl Rng + ?Sized),
) -> Result<Vec<Ciphertext>> {
    img.pixels()
        .iter()
        .map(|&v| {
            let m = PlaintextPoly::constant(params.ring(), v as i64)?;
            encrypt(params, pk, &m, rng)
        })
        .collect()
}

/// The baseline evaluation: n plaintext multiplies and n-1 additions for
/// the weighted sum, n-1 additions for the total, one ciphertext multiply
/// by the gain. Results carry the same slot-0 integers as the packed path.
pub fn naive_server_evaluate(
    offline: &NaiveOffline,
    pixel_cts: &[Ciphertext],
    rlk: &KeySwitchKey,
) -> Result<ServerResult> {
    if pixel_cts.len() != offline.n {
        return Err(Error::ParameterMismatch(format!(
            "expected {} pixel ciphertexts, got {}",
            offline.n,
            pixel_cts.len()
        )));
    }
    let mut ops = OpCounts::default();

    let mut den = pixel_cts[0].clone();
    for ct in &pixel_cts[1..] {
        den = add(&den, ct)?;
        ops.additions += 1;
    }

    let mut weighted = pmult(&offline.weights[0], &pixel_cts[0])?;
    ops.plain_mults += 1;
    for (w, ct) in offline.weights[1..].iter().zip(&pixel_cts[1..]) {
        let term = pmult(w, ct)?;
        ops.plain_mults += 1;
        weighted = add(&weighted, &term)?;
        ops.additions += 1;
    }

    let num = cmult(&offline.gain_ct, &weighted, rlk)?;
    ops.cipher_mults += 1;

    Ok(ServerResult { num, den, ops })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{seeded, Stream};
    use crate::scheme::{decrypt, keygen, KeySet};
    use crate::vision::synthesize_image;
    use rand::Rng;

    fn setup(n: usize) -> (SchemeParams, KeySet) {
        let params = SchemeParams::custom(1 << 10, &[27, 27, 27, 27, 27], 20, 0).unwrap();
        let keys = keygen(&params, rotation_steps(n), &mut seeded(400, Stream::KeyGen));
        (params, keys)
    }

    fn random_image(n: usize, rng: &mut impl Rng) -> Image {
        Image::new((0..n).map(|_| rng.random()).collect())
    }

    /// Brute-force slot-0 oracle straight from the feature definitions.
    fn oracle(img: &Image, gain_q: i64, t: u64) -> (i64, i64) {
        let n = img.len() as i64;
        let mut weighted = 0i128;
        let mut total = 0i128;
        for (j, &v) in img.pixels().iter().enumerate() {
            weighted += (j as i128 - n as i128 / 2) * v as i128;
            total += v as i128;
        }
        (
            crate::ring::center_mod(gain_q as i128 * weighted, t),
            crate::ring::center_mod(total, t),
        )
    }

    #[test]
    fn rounds_and_steps() {
        assert_eq!(rounds_for_width(1), 0);
        assert_eq!(rounds_for_width(2), 1);
        assert_eq!(rounds_for_width(4), 2);
        assert_eq!(rounds_for_width(500), 9);
        assert_eq!(rounds_for_width(512), 9);
        let steps = rotation_steps(500);
        assert_eq!(steps.len(), 9);
        assert!(steps.contains(&256) && steps.contains(&1));
    }

    #[test]
    fn offline_weight_slots() {
        let (params, keys) = setup(8);
        let bundle = offline_setup(
            &params,
            &keys.public,
            1.0,
            1.0,
            6,
            &mut seeded(401, Stream::Offline),
        )
        .unwrap();
        let x = unpack(&bundle.weight_plain);
        assert_eq!(&x.slots()[..8], &[-3, -2, -1, 0, 1, 2, 0, 0]);
        assert!(x.slots()[6..].iter().all(|&v| v == 0));
    }

    #[test]
    fn offline_gain_zero_encrypts_zero() {
        let (params, keys) = setup(8);
        let bundle = offline_setup(
            &params,
            &keys.public,
            0.0,
            1024.0,
            8,
            &mut seeded(402, Stream::Offline),
        )
        .unwrap();
        let slots = unpack(&decrypt(&keys.secret, &bundle.gain_ct).unwrap());
        assert!(slots.slots().iter().all(|&v| v == 0));
    }

    #[test]
    fn image_too_wide() {
        let (params, keys) = setup(8);
        let m = params.slot_count();
        let err = offline_setup(
            &params,
            &keys.public,
            1.0,
            1.0,
            m + 2,
            &mut seeded(403, Stream::Offline),
        )
        .unwrap_err();
        assert!(matches!(err, Error::ImageTooWide { .. }));
    }

    #[test]
    fn camera_roundtrip_and_zero_padding() {
        let (params, keys) = setup(16);
        let mut rng = seeded(404, Stream::Camera);
        let img = random_image(16, &mut rng);
        let ct = camera_encrypt(&params, &keys.public, &img, &mut rng).unwrap();
        let slots = unpack(&decrypt(&keys.secret, &ct).unwrap());
        for j in 0..16 {
            assert_eq!(slots.slots()[j], img.pixels()[j] as i64);
        }
        assert!(slots.slots()[16..].iter().all(|&v| v == 0));
    }

    #[test]
    fn tiny_case_from_first_principles() {
        // n = 4, image [1,2,3,4], Δ = 1, K = 1:
        // num slot 0 before the gain multiply: (-2)(1)+(-1)(2)+(0)(3)+(1)(4) = 0
        // den slot 0: 10.
        let (params, keys) = setup(4);
        let bundle = offline_setup(
            &params,
            &keys.public,
            1.0,
            1.0,
            4,
            &mut seeded(405, Stream::Offline),
        )
        .unwrap();
        let mut rng = seeded(406, Stream::Camera);
        let img = Image::new(vec![1, 2, 3, 4]);
        let ct = camera_encrypt(&params, &keys.public, &img, &mut rng).unwrap();
        let result = server_evaluate(&bundle, &ct, &keys.galois, &keys.relin).unwrap();
        let out = actuator_decode(&keys.secret, &result, 1.0).unwrap();
        assert_eq!(out.num, 0);
        assert_eq!(out.den, 10);
        assert_eq!(out.u, 0.0);
    }

    #[test]
    fn server_matches_bruteforce_oracle() {
        for n in [4usize, 8, 16] {
            let (params, keys) = setup(n);
            let mut rng = seeded(407 + n as u64, Stream::Camera);
            let bundle = offline_setup(
                &params,
                &keys.public,
                0.8,
                8.0,
                n,
                &mut seeded(408, Stream::Offline),
            )
            .unwrap();
            for _ in 0..10 {
                let img = random_image(n, &mut rng);
                let ct = camera_encrypt(&params, &keys.public, &img, &mut rng).unwrap();
                let result = server_evaluate(&bundle, &ct, &keys.galois, &keys.relin).unwrap();
                let out = actuator_decode(&keys.secret, &result, 8.0);
                let (expect_num, expect_den) =
                    oracle(&img, bundle.gain_quantized, params.plain_modulus());
                match out {
                    Ok(out) => {
                        assert_eq!(out.num, expect_num, "n={n}");
                        assert_eq!(out.den, expect_den, "n={n}");
                    }
                    Err(Error::ZeroDenominator) => assert_eq!(expect_den, 0),
                    Err(e) => panic!("unexpected error {e:?}"),
                }
            }
        }
    }

    #[test]
    fn log_tree_partials_are_prefix_sums() {
        let n = 16;
        let (params, keys) = setup(n);
        let mut rng = seeded(409, Stream::Camera);
        let bundle = offline_setup(
            &params,
            &keys.public,
            1.0,
            1.0,
            n,
            &mut seeded(410, Stream::Offline),
        )
        .unwrap();
        let img = random_image(n, &mut rng);
        let ct = camera_encrypt(&params, &keys.public, &img, &mut rng).unwrap();
        let (_, trace) = server_evaluate_traced(&bundle, &ct, &keys.galois, &keys.relin).unwrap();
        let t = params.plain_modulus();
        for (level, (den_partial, num_partial)) in trace.iter().enumerate() {
            let width = 1usize << level;
            let mut den_expect = 0i128;
            let mut num_expect = 0i128;
            for j in 0..width.min(n) {
                let pixel = img.pixels()[j] as i128;
                den_expect += pixel;
                num_expect += (j as i128 - n as i128 / 2) * pixel;
            }
            let den_slots = unpack(&decrypt(&keys.secret, den_partial).unwrap());
            let num_slots = unpack(&decrypt(&keys.secret, num_partial).unwrap());
            assert_eq!(
                den_slots.slots()[0] as i128,
                crate::ring::center_mod(den_expect, t) as i128,
                "level {level}"
            );
            assert_eq!(
                num_slots.slots()[0] as i128,
                crate::ring::center_mod(num_expect, t) as i128,
                "level {level}"
            );
        }
    }

    #[test]
    fn operation_counts_match_formulas() {
        let n = 16;
        let (params, keys) = setup(n);
        let mut rng = seeded(411, Stream::Camera);
        let bundle = offline_setup(
            &params,
            &keys.public,
            0.5,
            8.0,
            n,
            &mut seeded(412, Stream::Offline),
        )
        .unwrap();
        let img = random_image(n, &mut rng);
        let ct = camera_encrypt(&params, &keys.public, &img, &mut rng).unwrap();
        let result = server_evaluate(&bundle, &ct, &keys.galois, &keys.relin).unwrap();
        let rounds = rounds_for_width(n) as u64;
        assert_eq!(result.ops.rotations, 2 * rounds);
        assert_eq!(result.ops.additions, 2 * rounds);
        assert_eq!(result.ops.plain_mults, 1);
        assert_eq!(result.ops.cipher_mults, 1);

        let naive = naive_offline_setup(
            &params,
            &keys.public,
            0.5,
            8.0,
            n,
            &mut seeded(413, Stream::Offline),
        )
        .unwrap();
        let pixel_cts = naive_camera_encrypt(&params, &keys.public, &img, &mut rng).unwrap();
        assert_eq!(pixel_cts.len(), n);
        let nresult = naive_server_evaluate(&naive, &pixel_cts, &keys.relin).unwrap();
        assert_eq!(nresult.ops.plain_mults, n as u64);
        assert_eq!(nresult.ops.additions, 2 * (n as u64 - 1));
        assert_eq!(nresult.ops.cipher_mults, 1);
    }

    #[test]
    fn naive_decrypts_pixelwise_and_agrees_with_packed() {
        for n in [4usize, 8, 16] {
            let (params, keys) = setup(n);
            let mut rng = seeded(420 + n as u64, Stream::Camera);
            let img = random_image(n, &mut rng);
            let pixel_cts = naive_camera_encrypt(&params, &keys.public, &img, &mut rng).unwrap();
            for (ct, &pixel) in pixel_cts.iter().zip(img.pixels()) {
                let m = decrypt(&keys.secret, ct).unwrap();
                assert_eq!(m.centered_coeffs()[0], pixel as i64);
            }

            let mut off_rng = seeded(421, Stream::Offline);
            let bundle = offline_setup(&params, &keys.public, 0.8, 8.0, n, &mut off_rng).unwrap();
            let naive =
                naive_offline_setup(&params, &keys.public, 0.8, 8.0, n, &mut off_rng).unwrap();
            let ct = camera_encrypt(&params, &keys.public, &img, &mut rng).unwrap();
            let packed = server_evaluate(&bundle, &ct, &keys.galois, &keys.relin).unwrap();
            let base = naive_server_evaluate(&naive, &pixel_cts, &keys.relin).unwrap();
            let packed_out = actuator_decode(&keys.secret, &packed, 8.0).unwrap();
            let naive_out = actuator_decode(&keys.secret, &base, 8.0).unwrap();
            assert_eq!(packed_out.num, naive_out.num, "n={n}");
            assert_eq!(packed_out.den, naive_out.den, "n={n}");
        }
    }

    #[test]
    fn naive_single_pixel_needs_zero_additions() {
        // Degenerate count check: with one ciphertext the fold performs
        // no additions at all (2(n-1) = 0).
        let (params, keys) = setup(4);
        let mut rng = seeded(427, Stream::Camera);
        let gain_ct = crate::scheme::encrypt(
            &params,
            &keys.public,
            &PlaintextPoly::constant(params.ring(), 3).unwrap(),
            &mut rng,
        )
        .unwrap();
        let offline = NaiveOffline {
            gain_ct,
            weights: vec![PlaintextPoly::constant(params.ring(), 0).unwrap()],
            n: 1,
            delta: 1.0,
            gain_quantized: 3,
        };
        let ct = crate::scheme::encrypt(
            &params,
            &keys.public,
            &PlaintextPoly::constant(params.ring(), 7).unwrap(),
            &mut rng,
        )
        .unwrap();
        let result = naive_server_evaluate(&offline, &[ct], &keys.relin).unwrap();
        assert_eq!(result.ops.additions, 0);
        assert_eq!(result.ops.plain_mults, 1);
        assert_eq!(result.ops.cipher_mults, 1);
    }

    #[test]
    fn all_dark_frame_is_zero_denominator() {
        let n = 8;
        let (params, keys) = setup(n);
        let mut rng = seeded(430, Stream::Camera);
        let bundle = offline_setup(
            &params,
            &keys.public,
            0.8,
            16.0,
            n,
            &mut seeded(431, Stream::Offline),
        )
        .unwrap();
        let img = Image::new(vec![0; n]);
        let ct = camera_encrypt(&params, &keys.public, &img, &mut rng).unwrap();
        let result = server_evaluate(&bundle, &ct, &keys.galois, &keys.relin).unwrap();
        assert!(matches!(
            actuator_decode(&keys.secret, &result, 16.0),
            Err(Error::ZeroDenominator)
        ));
    }

    #[test]
    fn decode_matches_plain_controller() {
        // Stage at 30 with K = 0.8, Δ = 2^20: u within |g|/(2Δ) of 24.
        let n = 500;
        let params = SchemeParams::preset(crate::scheme::Preset::Desk).unwrap();
        let keys = keygen(&params, rotation_steps(n), &mut seeded(440, Stream::KeyGen));
        let delta = (1u64 << 20) as f64;
        let bundle = offline_setup(
            &params,
            &keys.public,
            0.8,
            delta,
            n,
            &mut seeded(441, Stream::Offline),
        )
        .unwrap();
        let mut rng = seeded(442, Stream::Camera);
        let img = synthesize_image(30.0, n, 3, 10, 0).unwrap();
        let ct = camera_encrypt(&params, &keys.public, &img, &mut rng).unwrap();
        let result = server_evaluate(&bundle, &ct, &keys.galois, &keys.relin).unwrap();
        let out = actuator_decode(&keys.secret, &result, delta).unwrap();
        assert!((out.u - 24.0).abs() <= 30.0 / (2.0 * delta));
        assert!(out.budget_bits > 20.0, "budget {}", out.budget_bits);

        // Symmetric stage: exact zero.
        let img0 = synthesize_image(0.0, n, 3, 10, 0).unwrap();
        let ct0 = camera_encrypt(&params, &keys.public, &img0, &mut rng).unwrap();
        let r0 = server_evaluate(&bundle, &ct0, &keys.galois, &keys.relin).unwrap();
        let out0 = actuator_decode(&keys.secret, &r0, delta).unwrap();
        assert_eq!(out0.num, 0);
        assert_eq!(out0.u, 0.0);
    }
}
