//! Per-role wall-clock benchmark of the packed pipeline against the
//! per-pixel baseline, measured on identical frames.

use std::time::Instant;

use anyhow::Result;
use evfc_core::pipeline::{
    actuator_decode, camera_encrypt, naive_camera_encrypt, naive_offline_setup,
    naive_server_evaluate, offline_setup, rotation_steps, server_evaluate,
};
use evfc_core::rng::{seeded, Stream};
use evfc_core::scheme::{keygen, Preset, SchemeParams};
use evfc_core::vision::synthesize_image;
use rand::Rng;

#[derive(Debug, Clone, Copy, Default)]
pub struct Stat {
    pub mean: f64,
    pub stddev: f64,
    pub median: f64,
}

fn stat(samples: &[f64]) -> Stat {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Stat {
        mean,
        stddev: var.sqrt(),
        median: sorted[sorted.len() / 2],
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RoleStats {
    pub camera: Stat,
    pub server: Stat,
    pub actuator: Stat,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub preset: &'static str,
    pub n: usize,
    pub trials: usize,
    pub packed: RoleStats,
    pub naive: RoleStats,
}

impl BenchReport {
    pub fn camera_speedup(&self) -> f64 {
        self.naive.camera.mean / self.packed.camera.mean
    }

    pub fn server_speedup(&self) -> f64 {
        self.naive.server.mean / self.packed.server.mean
    }

    /// Relative gap between the two actuator timings (same decrypt work).
    /// Uses medians: the per-frame decode is tens of milliseconds, where
    /// a single scheduling hiccup swings a small-sample mean.
    pub fn actuator_gap(&self) -> f64 {
        let (a, b) = (self.packed.actuator.median, self.naive.actuator.median);
        (a - b).abs() / a.max(b)
    }
}

/// Runs `trials` frames through both pipelines. Key generation and the
/// offline encodings happen once, outside the timed sections; each trial
/// times camera, server, and actuator work separately per mode.
pub fn run_bench(
    preset: Preset,
    n: usize,
    gain: f64,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<BenchReport> {
    assert!(trials >= 1);
    let params = SchemeParams::preset(preset)?;
    let keys = keygen(
        &params,
        rotation_steps(n),
        &mut seeded(seed, Stream::KeyGen),
    );
    let mut offline_rng = seeded(seed, Stream::Offline);
    let packed = offline_setup(&params, &keys.public, gain, delta, n, &mut offline_rng)?;
    let naive = naive_offline_setup(&params, &keys.public, gain, delta, n, &mut offline_rng)?;

    let mut camera_rng = seeded(seed, Stream::Camera);
    let mut frame_rng = seeded(seed, Stream::Harness);

    let mut t = [const { Vec::new() }; 6]; // packed c/s/a, naive c/s/a
    for trial in 0..trials + 1 {
        let warmup = trial == 0; // one untimed frame stabilizes caches
        let position = frame_rng.random_range(-0.4..0.4) * n as f64;
        let img = synthesize_image(position, n, 3, 10, 0)?;

        let mut samples = [0.0f64; 6];
        let t0 = Instant::now();
        let image_ct = camera_encrypt(&params, &keys.public, &img, &mut camera_rng)?;
        samples[0] = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let result = server_evaluate(&packed, &image_ct, &keys.galois, &keys.relin)?;
        samples[1] = t1.elapsed().as_secs_f64();
        let t2 = Instant::now();
        let packed_out = actuator_decode(&keys.secret, &result, delta)?;
        samples[2] = t2.elapsed().as_secs_f64();

        let t3 = Instant::now();
        let pixel_cts = naive_camera_encrypt(&params, &keys.public, &img, &mut camera_rng)?;
        samples[3] = t3.elapsed().as_secs_f64();
        let t4 = Instant::now();
        let nresult = naive_server_evaluate(&naive, &pixel_cts, &keys.relin)?;
        samples[4] = t4.elapsed().as_secs_f64();
        let t5 = Instant::now();
        let naive_out = actuator_decode(&keys.secret, &nresult, delta)?;
        samples[5] = t5.elapsed().as_secs_f64();

        // Identical frames must agree exactly.
        anyhow::ensure!(
            packed_out.num == naive_out.num && packed_out.den == naive_out.den,
            "packed and naive disagree: {packed_out:?} vs {naive_out:?}"
        );
        if !warmup {
            for (bucket, sample) in t.iter_mut().zip(samples) {
                bucket.push(sample);
            }
        }
    }

    Ok(BenchReport {
        preset: preset.name(),
        n,
        trials,
        packed: RoleStats {
            camera: stat(&t[0]),
            server: stat(&t[1]),
            actuator: stat(&t[2]),
        },
        naive: RoleStats {
            camera: stat(&t[3]),
            server: stat(&t[4]),
            actuator: stat(&t[5]),
        },
    })
}

pub fn print_report(r: &BenchReport) {
    println!(
        "preset {}  n = {}  trials = {}  (mean ± stddev seconds)",
        r.preset, r.n, r.trials
    );
    println!(
        "           {:>22} {:>22} {:>22}",
        "camera", "server", "actuator"
    );
    for (label, s) in [("packed", &r.packed), ("naive", &r.naive)] {
        println!(
            "{label:<10} {:>12.4} ±{:>7.4} {:>12.4} ±{:>7.4} {:>12.4} ±{:>7.4}",
            s.camera.mean,
            s.camera.stddev,
            s.server.mean,
            s.server.stddev,
            s.actuator.mean,
            s.actuator.stddev
        );
    }
    println!(
        "speedups   camera {:.1}x  server {:.2}x  actuator gap {:.1}%",
        r.camera_speedup(),
        r.server_speedup(),
        100.0 * r.actuator_gap()
    );
}

pub fn write_report_csv(path: &std::path::Path, r: &BenchReport) -> Result<()> {
    use std::io::Write;
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "mode,role,mean_s,stddev_s")?;
    for (mode, s) in [("packed", &r.packed), ("naive", &r.naive)] {
        writeln!(f, "{mode},camera,{},{}", s.camera.mean, s.camera.stddev)?;
        writeln!(f, "{mode},server,{},{}", s.server.mean, s.server.stddev)?;
        writeln!(
            f,
            "{mode},actuator,{},{}",
            s.actuator.mean, s.actuator.stddev
        )?;
    }
    Ok(())
}
