//! Plaintext reference implementations: the synthetic 1-D camera, centroid
//! feature extraction, the proportional controller, the stage dynamics,
//! and gain quantization. The encrypted pipeline is tested against this
//! module.
//!
//! Pixel indices are camera coordinates i ∈ {-n/2, ..., n/2 - 1}; array
//! position j holds pixel i = j - n/2.

use crate::error::{Error, Result};

/// A 1-D grayscale frame of `n` (even) 8-bit pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pixels: Vec<u8>,
}

impl Image {
    pub fn new(pixels: Vec<u8>) -> Image {
        assert!(pixels.len() % 2 == 0, "pixel count must be even");
        Image { pixels }
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// Brightness at camera coordinate i.
    pub fn at(&self, i: i64) -> u8 {
        let n = self.pixels.len() as i64;
        self.pixels[(i + n / 2) as usize]
    }
}

/// Renders a stage of `stage_len` consecutive `fg`-bright pixels centered
/// at the nearest pixel to `position`, over a `bg` background.
///
/// Sub-pixel positions are rounded to the nearest index (the camera's
/// quantization); even stage lengths are floor-centered.
pub fn synthesize_image(
    position: f64,
    n: usize,
    stage_len: usize,
    fg: u8,
    bg: u8,
) -> Result<Image> {
    assert!(n >= 2 && n % 2 == 0, "n must be even");
    assert!(stage_len >= 1);
    let half = n as i64 / 2;
    let center = round_half_up(position);
    let lo = center - (stage_len as i64 - 1) / 2;
    let hi = lo + stage_len as i64 - 1;
    if lo < -half || hi > half - 1 {
        let index = if lo < -half { lo } else { hi };
        return Err(Error::StageOutOfFrame {
            index,
            min: -half,
            max: half - 1,
        });
    }
    let mut pixels = vec![bg; n];
    for i in lo..=hi {
        pixels[(i + half) as usize] = fg;
    }
    Ok(Image { pixels })
}

/// Brightness-weighted sums and the geometric centroid:
/// I_w = Σ i·I_i, I_total = Σ I_i, g = I_w / I_total.
pub fn centroid(img: &Image) -> Result<(i64, i64, f64)> {
    let n = img.len() as i64;
    let mut weighted = 0i64;
    let mut total = 0i64;
    for (j, &v) in img.pixels().iter().enumerate() {
        let i = j as i64 - n / 2;
        weighted += i * v as i64;
        total += v as i64;
    }
    if total == 0 {
        return Err(Error::AllDarkImage);
    }
    Ok((weighted, total, weighted as f64 / total as f64))
}

/// Proportional control: u = K·g.
pub fn control_law(g: f64, gain: f64) -> f64 {
    gain * g
}

/// First-order stage dynamics y⁺ = a·y + b·u_applied with the fixed
/// coefficients a = 0.9804, b = 0.0196.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantState {
    pub y: f64,
}

impl PlantState {
    pub const A: f64 = 0.9804;
    pub const B: f64 = 0.0196;

    pub fn new(y0: f64) -> PlantState {
        PlantState { y: y0 }
    }
}

/// Advances the stage one step. The control input drives the stage
/// against the measured offset (u_applied = -u), so positive feedback
/// gain regulates the position toward zero with closed-loop pole
/// a - b·K.
pub fn plant_step(state: PlantState, u: f64) -> PlantState {
    PlantState {
        y: PlantState::A * state.y - PlantState::B * u,
    }
}

/// ⌊x⌉ = ⌊x + 1/2⌋ (round half toward +∞, also for negatives).
pub fn round_half_up(x: f64) -> i64 {
    (x + 0.5).floor() as i64
}

/// Integer encoding of the feedback gain: ⌊Δ·K⌉ centered mod t.
pub fn quantize_gain(gain: f64, delta: f64, t: u64) -> Result<i64> {
    let scaled = delta * gain;
    if 2.0 * scaled.abs() >= t as f64 {
        return Err(Error::GainOverflow {
            value: scaled.abs(),
            half_t: t as f64 / 2.0,
        });
    }
    Ok(crate::ring::center_mod(round_half_up(scaled) as i128, t))
}

/// Controller configuration with the overflow guard: the worst-case
/// scaled numerator Δ·|K|·(n/2)·255·n must stay below t/2 so no slot
/// value ever wraps mod t during the encrypted evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerConfig {
    pub gain: f64,
    pub delta: f64,
    pub plain_modulus: u64,
}

impl ControllerConfig {
    pub fn new(gain: f64, delta: f64, plain_modulus: u64) -> ControllerConfig {
        ControllerConfig {
            gain,
            delta,
            plain_modulus,
        }
    }

    /// Validates the configuration for images of `n` pixels.
    pub fn validate(&self, n: usize) -> Result<()> {
        assert!(
            self.delta > 0.0 && self.delta.log2().fract() == 0.0,
            "Δ must be a positive power of two"
        );
        let worst = self.delta * self.gain.abs() * (n as f64 / 2.0) * 255.0 * n as f64;
        let half_t = self.plain_modulus as f64 / 2.0;
        if worst >= half_t {
            return Err(Error::OverflowConfig {
                value: worst,
                half_t,
            });
        }
        // ⌊Δ·K⌉ itself must also fit.
        quantize_gain(self.gain, self.delta, self.plain_modulus)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_stage_at_30() {
        let img = synthesize_image(30.0, 500, 3, 10, 0).unwrap();
        for i in -250i64..250 {
            let expect = if (29..=31).contains(&i) { 10 } else { 0 };
            assert_eq!(img.at(i), expect, "pixel {i}");
        }
    }

    #[test]
    fn single_pixel_stage() {
        let img = synthesize_image(0.0, 8, 1, 255, 0).unwrap();
        assert_eq!(img.pixels(), &[0, 0, 0, 0, 255, 0, 0, 0]);
    }

    #[test]
    fn stage_out_of_frame() {
        // Center 251 puts pixel 252 past the frame bound 249.
        let err = synthesize_image(251.0, 500, 3, 10, 0).unwrap_err();
        match err {
            Error::StageOutOfFrame { index, max, .. } => {
                assert_eq!(index, 252);
                assert_eq!(max, 249);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(synthesize_image(249.0, 500, 1, 10, 0).is_ok());
        assert!(synthesize_image(250.0, 500, 1, 10, 0).is_err());
    }

    #[test]
    fn centroid_symmetric_stage() {
        let img = synthesize_image(0.0, 500, 3, 10, 0).unwrap();
        let (w, total, g) = centroid(&img).unwrap();
        assert_eq!((w, total), (0, 30));
        assert_eq!(g, 0.0);
    }

    #[test]
    fn centroid_stage_at_30() {
        let img = synthesize_image(30.0, 500, 3, 10, 0).unwrap();
        let (w, total, g) = centroid(&img).unwrap();
        assert_eq!((w, total), (900, 30));
        assert_eq!(g, 30.0);
    }

    #[test]
    fn centroid_all_dark() {
        let img = Image::new(vec![0; 16]);
        assert!(matches!(centroid(&img), Err(Error::AllDarkImage)));
    }

    #[test]
    fn centroid_matches_bruteforce_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(40);
        for _ in 0..100 {
            let n = 2 * rng.random_range(2..64usize);
            let pixels: Vec<u8> = (0..n).map(|_| rng.random()).collect();
            let img = Image::new(pixels.clone());
            let mut w = 0i64;
            let mut tot = 0i64;
            for (j, &v) in pixels.iter().enumerate() {
                w += (j as i64 - n as i64 / 2) * v as i64;
                tot += v as i64;
            }
            if tot == 0 {
                assert!(centroid(&img).is_err());
            } else {
                let (gw, gt, g) = centroid(&img).unwrap();
                assert_eq!((gw, gt), (w, tot));
                assert_eq!(g, w as f64 / tot as f64);
                assert!(g >= -(n as f64) / 2.0 && g <= n as f64 / 2.0 - 1.0);
            }
        }
    }

    #[test]
    fn centroid_of_symmetric_image_is_exact() {
        for c in [-100i64, -3, 0, 7, 200] {
            let img = synthesize_image(c as f64, 500, 5, 17, 0).unwrap();
            let (_, _, g) = centroid(&img).unwrap();
            assert_eq!(g, c as f64);
        }
    }

    #[test]
    fn control_law_examples() {
        assert_eq!(control_law(30.0, 0.8), 24.0);
        assert_eq!(control_law(123.0, 0.0), 0.0);
        assert_eq!(control_law(0.0, 0.8), 0.0);
    }

    #[test]
    fn plant_step_examples() {
        let s = plant_step(PlantState::new(30.0), 24.0);
        assert!((s.y - 28.9416).abs() < 1e-12);
        let open = plant_step(PlantState::new(10.0), 0.0);
        assert!((open.y - 9.804).abs() < 1e-12);
        let eq = plant_step(PlantState::new(0.0), 0.0);
        assert_eq!(eq.y, 0.0);
    }

    #[test]
    fn quantize_gain_examples() {
        // ⌊0.8·2^20 + 0.5⌋ = ⌊838861.3⌋
        let t = (1u64 << 48) + 1; // range only; primality irrelevant here
        assert_eq!(quantize_gain(0.8, (1 << 20) as f64, t).unwrap(), 838861);
        assert_eq!(quantize_gain(0.0, 1024.0, t).unwrap(), 0);
        // ⌊-0.5⌋ = -1 under the half-up convention.
        assert_eq!(quantize_gain(-0.5, 2.0, t).unwrap(), -1);
        assert!(quantize_gain(1e18, (1 << 20) as f64, t).is_err());
    }

    #[test]
    fn quantization_error_bound() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(41);
        let delta = (1u64 << 20) as f64;
        let t = 1u64 << 50;
        for _ in 0..10_000 {
            let k: f64 = rng.random_range(-10.0..10.0);
            let q = quantize_gain(k, delta, t).unwrap();
            assert!((k - q as f64 / delta).abs() <= 1.0 / (2.0 * delta) + 1e-12);
        }
    }

    #[test]
    fn overflow_config_check() {
        // Paper-sim numbers: Δ·0.8·250·255·500 ≈ 2.67e13 needs t/2 above it.
        let ok = ControllerConfig::new(0.8, (1u64 << 20) as f64, 1 << 48);
        assert!(ok.validate(500).is_ok());
        let bad = ControllerConfig::new(0.8, (1u64 << 20) as f64, 1 << 44);
        assert!(matches!(
            bad.validate(500),
            Err(Error::OverflowConfig { .. })
        ));
    }

    #[test]
    fn plain_closed_loop_converges() {
        // Pole a - b·K = 0.96472: |y| is non-increasing and below one
        // pixel by step 100 from y0 = 30.
        let mut state = PlantState::new(30.0);
        let mut prev = state.y.abs();
        let mut y100 = f64::NAN;
        for k in 0..300 {
            let img = synthesize_image(state.y, 500, 3, 10, 0).unwrap();
            let (_, _, g) = centroid(&img).unwrap();
            let u = control_law(g, 0.8);
            state = plant_step(state, u);
            assert!(state.y.abs() <= prev + 1e-9, "step {k}");
            prev = state.y.abs();
            if k == 99 {
                y100 = state.y.abs();
            }
        }
        assert!(y100 < 1.0, "|y(100)| = {y100}");
    }
}
