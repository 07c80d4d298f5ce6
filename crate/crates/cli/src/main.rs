use std::net::{SocketAddr, TcpListener};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use evfc_cli::config::{FileConfig, Mode, RunConfig, Transport};
use evfc_cli::{bench, keys_io, net, sim};
use evfc_core::pipeline::rotation_steps;
use evfc_core::rng::{seeded, Stream};
use evfc_core::scheme::{keygen, Preset, SchemeParams};

/// Encrypted visual feedback control testbed.
///
/// Log verbosity comes from the RUST_LOG environment variable.
#[derive(Parser)]
#[command(name = "evfc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the closed-loop simulation.
    Run(RunArgs),
    /// Benchmark packed vs naive per-role computation times.
    Bench(BenchArgs),
    /// Generate a key set and write it to a directory.
    Keygen(KeygenArgs),
    /// Run a single role of the networked deployment.
    Role(RoleArgs),
}

#[derive(Args, Clone)]
struct CommonCfg {
    /// Scheme preset.
    #[arg(long, value_parser = parse_preset)]
    preset: Option<Preset>,
    /// Config file (TOML); CLI flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Image width in pixels (even).
    #[arg(long)]
    n: Option<usize>,
    /// Bright-stage length in pixels.
    #[arg(long)]
    stage_len: Option<usize>,
    /// Stage brightness.
    #[arg(long)]
    fg: Option<u8>,
    /// Background brightness.
    #[arg(long)]
    bg: Option<u8>,
    /// Feedback gain K.
    #[arg(long)]
    gain: Option<f64>,
    /// Gain scaling factor Δ (power of two).
    #[arg(long)]
    delta: Option<f64>,
    /// Initial stage position in pixels.
    #[arg(long)]
    y0: Option<f64>,
    /// Master seed for all deterministic randomness.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of control steps.
    #[arg(long)]
    steps: Option<usize>,
}

impl CommonCfg {
    fn build(&self, mode: Option<Mode>, transport: Option<Transport>) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            FileConfig::load(path)?.apply(&mut cfg)?;
        }
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field.clone() { cfg.$field = v; })*
            };
        }
        take!(preset, n, stage_len, fg, bg, gain, delta, y0, seed, steps);
        if let Some(m) = mode {
            cfg.mode = m;
        }
        if let Some(t) = transport {
            cfg.transport = t;
        }
        Ok(cfg)
    }
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    Preset::from_name(s).ok_or_else(|| format!("unknown preset {s:?} (expected paper or desk)"))
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonCfg,
    /// Loop mode.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Transport between the three roles.
    #[arg(long, value_enum)]
    transport: Option<Transport>,
    /// Telemetry CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Gnuplot-compatible trajectory data output path.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: CommonCfg,
    /// Number of timed frames per pipeline.
    #[arg(long, default_value_t = 3)]
    trials: usize,
    /// Timing table CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct KeygenArgs {
    #[command(flatten)]
    common: CommonCfg,
    /// Directory for pk.evfc, sk.evfc, rlk.evfc, galois.evfc.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RoleArgs {
    /// Which role this process plays.
    #[arg(value_parser = ["camera", "server", "actuator"])]
    role: String,
    #[command(flatten)]
    common: CommonCfg,
    /// Key directory (from `evfc keygen`).
    #[arg(long)]
    keys: PathBuf,
    /// Address to listen on (server: control port; actuator: world port).
    #[arg(long)]
    listen: Option<SocketAddr>,
    /// Server address to connect to (camera, actuator).
    #[arg(long)]
    connect: Option<SocketAddr>,
    /// Actuator world address the camera reads positions from.
    #[arg(long)]
    world: Option<SocketAddr>,
    /// Actuator trace CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::Bench(args) => run_bench(args),
        Command::Keygen(args) => run_keygen(args),
        Command::Role(args) => run_role(args),
    }
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg = args.common.build(args.mode, args.transport)?;
    if args.out.is_some() {
        cfg.out = args.out;
    }
    if args.plot.is_some() {
        cfg.plot = args.plot;
    }
    let outcome = match cfg.transport {
        Transport::Inproc => sim::run_simulation(&cfg)?,
        Transport::Tcp => {
            anyhow::ensure!(
                cfg.mode == Mode::Encrypted,
                "tcp transport runs the encrypted pipeline"
            );
            net::run_tcp_threads(&cfg)?
        }
    };
    if let Some(path) = &cfg.out {
        sim::write_csv(path, &outcome.records)?;
        println!("telemetry written to {}", path.display());
    }
    if let Some(path) = &cfg.plot {
        sim::write_plot(path, &outcome.records)?;
        println!("trajectory written to {}", path.display());
    }
    sim::print_summary(&outcome.summary);
    Ok(())
}

fn run_bench(args: BenchArgs) -> Result<()> {
    let cfg = args.common.build(None, None)?;
    cfg.validate()?;
    let report = bench::run_bench(
        cfg.preset,
        cfg.n,
        cfg.gain,
        cfg.delta,
        args.trials,
        cfg.seed,
    )?;
    bench::print_report(&report);
    if let Some(path) = &args.out {
        bench::write_report_csv(path, &report)?;
        println!("timing table written to {}", path.display());
    }
    Ok(())
}

fn run_keygen(args: KeygenArgs) -> Result<()> {
    let cfg = args.common.build(None, None)?;
    let params = SchemeParams::preset(cfg.preset)?;
    let keys = keygen(
        &params,
        rotation_steps(cfg.n),
        &mut seeded(cfg.seed, Stream::KeyGen),
    );
    keys_io::write_keys_dir(&args.out, &params, &keys)?;
    println!(
        "keys for preset {} (rotation steps for n = {}) written to {}",
        cfg.preset.name(),
        cfg.n,
        args.out.display()
    );
    Ok(())
}

fn run_role(args: RoleArgs) -> Result<()> {
    let cfg = args.common.build(None, None)?;
    match args.role.as_str() {
        "camera" => {
            let server = args.connect.context("camera needs --connect SERVER_ADDR")?;
            let world = args.world.context("camera needs --world ACTUATOR_ADDR")?;
            let trace = net::run_camera(&cfg, &args.keys, server, world)?;
            println!("camera: {} frames sent", trace.len());
        }
        "server" => {
            let addr = args.listen.context("server needs --listen ADDR")?;
            let listener = TcpListener::bind(addr)?;
            println!("server: listening on {}", listener.local_addr()?);
            let trace = net::run_server(&cfg, &args.keys, listener)?;
            println!("server: {} frames evaluated", trace.len());
        }
        "actuator" => {
            let server = args
                .connect
                .context("actuator needs --connect SERVER_ADDR")?;
            let world = args.listen.context("actuator needs --listen WORLD_ADDR")?;
            let listener = TcpListener::bind(world)?;
            println!("actuator: world port on {}", listener.local_addr()?);
            let trace = net::run_actuator(&cfg, &args.keys, server, listener)?;
            if let Some(path) = &args.out {
                net::write_actuator_trace(path, &trace)?;
                println!("actuator trace written to {}", path.display());
            }
            let final_y = trace.last().map(|t| t.y_next).unwrap_or(f64::NAN);
            println!(
                "actuator: {} frames, final position {final_y:.6}",
                trace.len()
            );
        }
        other => anyhow::bail!("unknown role {other}"),
    }
    Ok(())
}
