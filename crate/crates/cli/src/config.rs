//! Run configuration: built-in presets, optional TOML config file, CLI
//! flag overrides (flags beat file values, file values beat defaults).

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use evfc_core::scheme::Preset;
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    /// Plaintext control loop only.
    Plain,
    /// Packed encrypted pipeline, plain oracle running in lockstep.
    Encrypted,
    /// Per-pixel encrypted baseline, plain oracle running in lockstep.
    Naive,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Plain => "plain",
            Mode::Encrypted => "encrypted",
            Mode::Naive => "naive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Transport {
    /// All three roles in one process.
    Inproc,
    /// Three role threads talking over loopback TCP.
    Tcp,
}

/// Everything one closed-loop run needs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub preset: Preset,
    pub mode: Mode,
    pub steps: usize,
    pub n: usize,
    pub stage_len: usize,
    pub fg: u8,
    pub bg: u8,
    pub gain: f64,
    pub delta: f64,
    pub y0: f64,
    pub seed: u64,
    pub transport: Transport,
    pub out: Option<PathBuf>,
    pub plot: Option<PathBuf>,
}

impl Default for RunConfig {
    /// The reference experiment: 500 pixels, stage of 3 bright pixels
    /// (10 over 0), gain 0.8, Δ = 2^20, initial position 30.
    fn default() -> Self {
        RunConfig {
            preset: Preset::Desk,
            mode: Mode::Encrypted,
            steps: 300,
            n: 500,
            stage_len: 3,
            fg: 10,
            bg: 0,
            gain: 0.8,
            delta: (1u64 << 20) as f64,
            y0: 30.0,
            seed: 0,
            transport: Transport::Inproc,
            out: None,
            plot: None,
        }
    }
}

/// Optional TOML file: every key optional, same names as the CLI flags.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub preset: Option<String>,
    pub mode: Option<String>,
    pub steps: Option<usize>,
    pub n: Option<usize>,
    pub stage_len: Option<usize>,
    pub fg: Option<u8>,
    pub bg: Option<u8>,
    pub gain: Option<f64>,
    pub delta: Option<f64>,
    pub y0: Option<f64>,
    pub seed: Option<u64>,
    pub transport: Option<String>,
    pub out: Option<PathBuf>,
    pub plot: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig> {
        let raw = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&raw).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Applies the file values over `base`.
    pub fn apply(&self, base: &mut RunConfig) -> Result<()> {
        if let Some(p) = &self.preset {
            base.preset = Preset::from_name(p)
                .with_context(|| format!("unknown preset {p:?} (expected paper or desk)"))?;
        }
        if let Some(m) = &self.mode {
            base.mode = match m.as_str() {
                "plain" => Mode::Plain,
                "encrypted" => Mode::Encrypted,
                "naive" => Mode::Naive,
                other => bail!("unknown mode {other:?}"),
            };
        }
        if let Some(t) = &self.transport {
            base.transport = match t.as_str() {
                "inproc" => Transport::Inproc,
                "tcp" => Transport::Tcp,
                other => bail!("unknown transport {other:?}"),
            };
        }
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field.clone() { base.$field = v; })*
            };
        }
        take!(steps, n, stage_len, fg, bg, gain, delta, y0, seed);
        if self.out.is_some() {
            base.out = self.out.clone();
        }
        if self.plot.is_some() {
            base.plot = self.plot.clone();
        }
        Ok(())
    }
}

impl RunConfig {
    /// Front-loads every check the loop relies on: scheme-level security
    /// validation is implied by the preset; here the image geometry and
    /// the mod-t overflow guard are checked before any frame runs.
    pub fn validate(&self) -> Result<evfc_core::scheme::SchemeParams> {
        if self.n < 2 || self.n % 2 != 0 {
            bail!("n must be even and at least 2, got {}", self.n);
        }
        if self.stage_len < 1 || self.stage_len > self.n {
            bail!("stage length {} out of range", self.stage_len);
        }
        let params = evfc_core::scheme::SchemeParams::preset(self.preset)?;
        if self.n > params.slot_count() {
            bail!(
                "n = {} exceeds the {} slots of preset {}",
                self.n,
                params.slot_count(),
                self.preset.name()
            );
        }
        evfc_core::vision::ControllerConfig::new(self.gain, self.delta, params.plain_modulus())
            .validate(self.n)?;
        Ok(params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_overrides_defaults() {
        let file: FileConfig = toml::from_str(
            r#"
            preset = "paper"
            mode = "naive"
            steps = 42
            gain = 0.5
            "#,
        )
        .unwrap();
        let mut cfg = RunConfig::default();
        file.apply(&mut cfg).unwrap();
        assert_eq!(cfg.preset, Preset::Paper);
        assert_eq!(cfg.mode, Mode::Naive);
        assert_eq!(cfg.steps, 42);
        assert_eq!(cfg.gain, 0.5);
        assert_eq!(cfg.n, 500); // untouched default
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<FileConfig>("bogus = 1").is_err());
        let file: FileConfig = toml::from_str("preset = \"nope\"").unwrap();
        let mut cfg = RunConfig::default();
        assert!(file.apply(&mut cfg).is_err());
    }

    #[test]
    fn validate_rejects_overflow() {
        let cfg = RunConfig {
            delta: (1u64 << 40) as f64,
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
        assert!(RunConfig::default().validate().is_ok());
    }
}
