//! The in-process closed-loop runner: camera → (encrypt) → server →
//! actuator → plant, with the plaintext oracle evaluated in lockstep on
//! the identical frame in encrypted and naive modes.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use evfc_core::pipeline::{
    actuator_decode, camera_encrypt, naive_camera_encrypt, naive_offline_setup,
    naive_server_evaluate, offline_setup, rotation_steps, server_evaluate, OpCounts,
};
use evfc_core::rng::{seeded, Stream};
use evfc_core::scheme::{keygen, KeySet};
use evfc_core::vision::{centroid, control_law, plant_step, synthesize_image, PlantState};
use evfc_core::Error;

use crate::config::{Mode, RunConfig};

/// One telemetry row per control step. The CSV schema is the fixed
/// 10-column set; `num`/`den` ride along in memory for the transport
/// equivalence checks but are not CSV columns.
#[derive(Debug, Clone, Copy)]
pub struct LoopRecord {
    pub k: usize,
    pub y_true: f64,
    pub g_plain: f64,
    pub g_enc: f64,
    pub u_plain: f64,
    pub u_enc: f64,
    pub noise_budget_bits: f64,
    pub t_camera_s: f64,
    pub t_server_s: f64,
    pub t_actuator_s: f64,
    pub num: Option<i64>,
    pub den: Option<i64>,
}

#[derive(Debug, Clone)]
pub struct SimSummary {
    pub preset: &'static str,
    pub mode: &'static str,
    pub steps: usize,
    pub final_y: f64,
    pub max_u_deviation: f64,
    pub min_noise_budget_bits: f64,
    pub mean_t_camera_s: f64,
    pub mean_t_server_s: f64,
    pub mean_t_actuator_s: f64,
    pub server_ops_per_frame: OpCounts,
}

pub struct SimOutcome {
    pub records: Vec<LoopRecord>,
    pub summary: SimSummary,
}

/// Runs the configured loop. The plant is driven by the encrypted control
/// input in encrypted/naive modes and by the plain one in plain mode; the
/// plain oracle always runs on the same frames for comparison.
pub fn run_simulation(cfg: &RunConfig) -> Result<SimOutcome> {
    let params = cfg.validate()?;
    let mut state = PlantState::new(cfg.y0);
    let mut records = Vec::with_capacity(cfg.steps);

    let keys: Option<KeySet> = match cfg.mode {
        Mode::Plain => None,
        _ => Some(keygen(
            &params,
            rotation_steps(cfg.n),
            &mut seeded(cfg.seed, Stream::KeyGen),
        )),
    };
    let packed_offline = match cfg.mode {
        Mode::Encrypted => Some(offline_setup(
            &params,
            &keys.as_ref().unwrap().public,
            cfg.gain,
            cfg.delta,
            cfg.n,
            &mut seeded(cfg.seed, Stream::Offline),
        )?),
        _ => None,
    };
    let naive_offline = match cfg.mode {
        Mode::Naive => Some(naive_offline_setup(
            &params,
            &keys.as_ref().unwrap().public,
            cfg.gain,
            cfg.delta,
            cfg.n,
            &mut seeded(cfg.seed, Stream::Offline),
        )?),
        _ => None,
    };
    let mut camera_rng = seeded(cfg.seed, Stream::Camera);

    // Zero-order hold values for frames where the feature is undefined.
    let mut held_u_plain = 0.0f64;
    let mut held_u_enc = 0.0f64;
    let mut ops_per_frame = OpCounts::default();

    for k in 0..cfg.steps {
        let frame_err = |e: Error| anyhow::anyhow!(e).context(format!("at step {k}"));
        let img =
            synthesize_image(state.y, cfg.n, cfg.stage_len, cfg.fg, cfg.bg).map_err(frame_err)?;

        // Plain oracle on the identical frame.
        let (g_plain, u_plain) = match centroid(&img) {
            Ok((_, _, g)) => (g, control_law(g, cfg.gain)),
            Err(Error::AllDarkImage) => (f64::NAN, held_u_plain),
            Err(e) => return Err(frame_err(e)),
        };
        held_u_plain = u_plain;

        let record = match cfg.mode {
            Mode::Plain => LoopRecord {
                k,
                y_true: state.y,
                g_plain,
                g_enc: f64::NAN,
                u_plain,
                u_enc: f64::NAN,
                noise_budget_bits: f64::NAN,
                t_camera_s: f64::NAN,
                t_server_s: f64::NAN,
                t_actuator_s: f64::NAN,
                num: None,
                den: None,
            },
            Mode::Encrypted => {
                let keys = keys.as_ref().unwrap();
                let bundle = packed_offline.as_ref().unwrap();

                let t0 = Instant::now();
                let image_ct = camera_encrypt(&params, &keys.public, &img, &mut camera_rng)
                    .map_err(frame_err)?;
                let t_camera_s = t0.elapsed().as_secs_f64();

                let t1 = Instant::now();
                let result = server_evaluate(bundle, &image_ct, &keys.galois, &keys.relin)
                    .map_err(frame_err)?;
                let t_server_s = t1.elapsed().as_secs_f64();
                ops_per_frame = result.ops;

                let t2 = Instant::now();
                let decoded = actuator_decode(&keys.secret, &result, cfg.delta);
                let t_actuator_s = t2.elapsed().as_secs_f64();
                finish_record(
                    k,
                    state.y,
                    g_plain,
                    u_plain,
                    decoded,
                    bundle.gain_quantized,
                    &mut held_u_enc,
                    t_camera_s,
                    t_server_s,
                    t_actuator_s,
                )
                .map_err(frame_err)?
            }
            Mode::Naive => {
                let keys = keys.as_ref().unwrap();
                let offline = naive_offline.as_ref().unwrap();

                let t0 = Instant::now();
                let pixel_cts = naive_camera_encrypt(&params, &keys.public, &img, &mut camera_rng)
                    .map_err(frame_err)?;
                let t_camera_s = t0.elapsed().as_secs_f64();

                let t1 = Instant::now();
                let result =
                    naive_server_evaluate(offline, &pixel_cts, &keys.relin).map_err(frame_err)?;
                let t_server_s = t1.elapsed().as_secs_f64();
                ops_per_frame = result.ops;

                let t2 = Instant::now();
                let decoded = actuator_decode(&keys.secret, &result, cfg.delta);
                let t_actuator_s = t2.elapsed().as_secs_f64();
                finish_record(
                    k,
                    state.y,
                    g_plain,
                    u_plain,
                    decoded,
                    offline.gain_quantized,
                    &mut held_u_enc,
                    t_camera_s,
                    t_server_s,
                    t_actuator_s,
                )
                .map_err(frame_err)?
            }
        };

        let drive = match cfg.mode {
            Mode::Plain => record.u_plain,
            _ => record.u_enc,
        };
        state = plant_step(state, drive);
        records.push(record);
    }

    let summary = summarize(cfg, &records, state.y, ops_per_frame);
    Ok(SimOutcome { records, summary })
}

/// Builds the run summary from per-step records (NaN-aware means).
pub fn summarize(
    cfg: &RunConfig,
    records: &[LoopRecord],
    final_y: f64,
    ops_per_frame: OpCounts,
) -> SimSummary {
    let mean = |f: fn(&LoopRecord) -> f64| -> f64 {
        let vals: Vec<f64> = records.iter().map(f).filter(|v| v.is_finite()).collect();
        if vals.is_empty() {
            f64::NAN
        } else {
            vals.iter().sum::<f64>() / vals.len() as f64
        }
    };
    let max_u_deviation = records
        .iter()
        .map(|r| (r.u_enc - r.u_plain).abs())
        .filter(|v| v.is_finite())
        .fold(f64::NAN, f64::max);
    let min_noise_budget_bits = records
        .iter()
        .map(|r| r.noise_budget_bits)
        .filter(|v| v.is_finite())
        .fold(f64::NAN, f64::min);
    SimSummary {
        preset: cfg.preset.name(),
        mode: cfg.mode.name(),
        steps: records.len(),
        final_y,
        max_u_deviation,
        min_noise_budget_bits,
        mean_t_camera_s: mean(|r| r.t_camera_s),
        mean_t_server_s: mean(|r| r.t_server_s),
        mean_t_actuator_s: mean(|r| r.t_actuator_s),
        server_ops_per_frame: ops_per_frame,
    }
}

#[allow(clippy::too_many_arguments)]
fn finish_record(
    k: usize,
    y: f64,
    g_plain: f64,
    u_plain: f64,
    decoded: evfc_core::Result<evfc_core::pipeline::ActuatorOutput>,
    gain_quantized: i64,
    held_u_enc: &mut f64,
    t_camera_s: f64,
    t_server_s: f64,
    t_actuator_s: f64,
) -> evfc_core::Result<LoopRecord> {
    let (u_enc, g_enc, budget, num, den) = match decoded {
        Ok(out) => {
            let g_enc = if gain_quantized != 0 {
                out.num as f64 / (gain_quantized as f64 * out.den as f64)
            } else {
                f64::NAN
            };
            *held_u_enc = out.u;
            (out.u, g_enc, out.budget_bits, Some(out.num), Some(out.den))
        }
        // All-dark frame: hold the previous input.
        Err(Error::ZeroDenominator) => (*held_u_enc, f64::NAN, f64::NAN, None, None),
        Err(e) => return Err(e),
    };
    Ok(LoopRecord {
        k,
        y_true: y,
        g_plain,
        g_enc,
        u_plain,
        u_enc,
        noise_budget_bits: budget,
        t_camera_s,
        t_server_s,
        t_actuator_s,
        num,
        den,
    })
}

pub const CSV_HEADER: &str =
    "k,y_true,g_plain,g_enc,u_plain,u_enc,noise_budget_bits,t_camera_s,t_server_s,t_actuator_s";

pub fn write_csv(path: &Path, records: &[LoopRecord]) -> Result<()> {
    let mut f =
        std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    writeln!(f, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            f,
            "{},{},{},{},{},{},{},{},{},{}",
            r.k,
            r.y_true,
            r.g_plain,
            r.g_enc,
            r.u_plain,
            r.u_enc,
            r.noise_budget_bits,
            r.t_camera_s,
            r.t_server_s,
            r.t_actuator_s
        )?;
    }
    Ok(())
}

/// Gnuplot-friendly trajectory file: `k y u_plain u_enc`, one row per step.
pub fn write_plot(path: &Path, records: &[LoopRecord]) -> Result<()> {
    let mut f =
        std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    writeln!(f, "# k y_true u_plain u_enc")?;
    for r in records {
        writeln!(f, "{} {} {} {}", r.k, r.y_true, r.u_plain, r.u_enc)?;
    }
    Ok(())
}

pub fn print_summary(s: &SimSummary) {
    println!("preset {}  mode {}  steps {}", s.preset, s.mode, s.steps);
    println!("final position      {:>12.6} px", s.final_y);
    if s.max_u_deviation.is_finite() {
        println!("max |u_enc-u_plain| {:>12.3e}", s.max_u_deviation);
        println!("min noise budget    {:>12.1} bits", s.min_noise_budget_bits);
        println!(
            "mean times          camera {:.4} s  server {:.4} s  actuator {:.4} s",
            s.mean_t_camera_s, s.mean_t_server_s, s.mean_t_actuator_s
        );
        let o = s.server_ops_per_frame;
        println!(
            "server ops/frame    {} rot  {} add  {} pmult  {} cmult",
            o.rotations, o.additions, o.plain_mults, o.cipher_mults
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Transport;

    fn tiny_cfg(mode: Mode) -> RunConfig {
        RunConfig {
            preset: evfc_core::scheme::Preset::Desk,
            mode,
            steps: 3,
            n: 16,
            stage_len: 3,
            fg: 10,
            bg: 0,
            gain: 0.8,
            delta: (1u64 << 20) as f64,
            y0: 4.0,
            seed: 11,
            transport: Transport::Inproc,
            out: None,
            plot: None,
        }
    }

    #[test]
    fn zero_steps_gives_empty_records_and_valid_summary() {
        let cfg = RunConfig {
            steps: 0,
            mode: Mode::Plain,
            ..RunConfig::default()
        };
        let out = run_simulation(&cfg).unwrap();
        assert!(out.records.is_empty());
        assert_eq!(out.summary.steps, 0);
        assert_eq!(out.summary.final_y, 30.0);
    }

    #[test]
    fn plain_loop_regulates() {
        let cfg = RunConfig {
            steps: 120,
            mode: Mode::Plain,
            ..RunConfig::default()
        };
        let out = run_simulation(&cfg).unwrap();
        assert!(out.summary.final_y.abs() < 1.0);
        // Plain mode leaves encrypted fields NaN.
        assert!(out.records[0].u_enc.is_nan());
        assert!(out.records[0].u_plain.is_finite());
    }

    #[test]
    fn encrypted_tiny_loop_tracks_plain() {
        let out = run_simulation(&tiny_cfg(Mode::Encrypted)).unwrap();
        assert_eq!(out.records.len(), 3);
        for r in &out.records {
            assert!((r.u_enc - r.u_plain).abs() <= 1e-3, "step {}", r.k);
            assert!(r.noise_budget_bits > 0.0);
        }
        assert_eq!(out.summary.server_ops_per_frame.rotations, 8);
    }

    #[test]
    fn csv_schema_is_stable() {
        let out = run_simulation(&tiny_cfg(Mode::Encrypted)).unwrap();
        let dir = std::env::temp_dir().join(format!("evfc-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.csv");
        write_csv(&path, &out.records).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        assert_eq!(lines.count(), 3);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
