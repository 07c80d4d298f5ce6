//! Three-process deployment: camera, server, actuator.
//!
//! Connection graph: the server listens and accepts exactly two peers
//! (camera and actuator, identified by hello messages). The actuator
//! additionally listens on a "world" port to which the camera connects:
//! after applying each control input the actuator reports the new stage
//! position there. That channel models the physical plant-to-camera
//! coupling, so the encrypted network path never carries positions and
//! the server never sees one.
//!
//! Per frame k: camera encrypts frame k and sends it to the server; the
//! server evaluates and forwards (num, den) to the actuator; the actuator
//! decodes u(k), steps its plant, and reports y(k+1) to the camera.
//!
//! All payloads ride the standard wire frames; control messages are a
//! 13-byte body (msg u8 | frame u32 | value f64) under the Control kind.

use std::io::{BufReader, BufWriter, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::path::Path;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use evfc_core::pipeline::{
    actuator_decode, camera_encrypt, offline_setup, server_evaluate, OpCounts, ServerResult,
};
use evfc_core::rng::{seeded, Stream};
use evfc_core::scheme::SchemeParams;
use evfc_core::vision::{centroid, control_law, plant_step, synthesize_image, PlantState};
use evfc_core::wire::{self, PayloadKind};
use evfc_core::Error as CoreError;

use crate::config::RunConfig;
use crate::keys_io::{ActuatorKeys, CameraKeys, ServerKeys};

/// Errors specific to the networked deployment.
#[derive(Debug, thiserror::Error)]
pub enum NetError {
    #[error("peer unavailable: {0}")]
    PeerUnavailable(String),
    #[error("protocol desync: expected frame {expected}, got {got}")]
    ProtocolDesync { expected: u32, got: u32 },
}

const MSG_HELLO_CAMERA: u8 = 1;
const MSG_HELLO_ACTUATOR: u8 = 2;
const MSG_FRAME: u8 = 3;
const MSG_RESULT: u8 = 4;
const MSG_POSITION: u8 = 5;
const MSG_BYE: u8 = 6;

const IO_TIMEOUT: Duration = Duration::from_secs(30);
const CONNECT_RETRY: Duration = Duration::from_secs(5);

fn send_control(w: &mut impl Write, digest: u64, msg: u8, k: u32, value: f64) -> Result<()> {
    let mut body = Vec::with_capacity(13);
    body.push(msg);
    body.extend_from_slice(&k.to_le_bytes());
    body.extend_from_slice(&value.to_le_bytes());
    wire::write_frame(w, PayloadKind::Control, digest, &body).map_err(map_peer_err)?;
    w.flush()
        .map_err(|e| NetError::PeerUnavailable(e.to_string()))?;
    Ok(())
}

fn recv_control(r: &mut impl Read) -> Result<(u8, u32, f64)> {
    let (kind, _digest, body) = wire::read_frame(r).map_err(map_peer_err)?;
    if kind != PayloadKind::Control {
        bail!("expected control message, got {kind:?}");
    }
    if body.len() != 13 {
        bail!("malformed control body");
    }
    let msg = body[0];
    let k = u32::from_le_bytes(body[1..5].try_into().unwrap());
    let value = f64::from_le_bytes(body[5..13].try_into().unwrap());
    Ok((msg, k, value))
}

fn map_peer_err(e: CoreError) -> anyhow::Error {
    match e {
        CoreError::TruncatedStream(what) => {
            NetError::PeerUnavailable(format!("connection closed while reading {what}")).into()
        }
        CoreError::Io(io) => NetError::PeerUnavailable(io.to_string()).into(),
        other => other.into(),
    }
}

fn expect_frame_index(expected: u32, got: u32) -> Result<()> {
    if expected != got {
        return Err(NetError::ProtocolDesync { expected, got }.into());
    }
    Ok(())
}

/// Connects with retries so roles can start in any order.
pub fn connect_retry(addr: SocketAddr) -> Result<TcpStream> {
    let deadline = Instant::now() + CONNECT_RETRY;
    loop {
        match TcpStream::connect_timeout(&addr, Duration::from_millis(500)) {
            Ok(s) => {
                s.set_read_timeout(Some(IO_TIMEOUT))?;
                s.set_nodelay(true)?;
                return Ok(s);
            }
            Err(e) => {
                if Instant::now() >= deadline {
                    return Err(NetError::PeerUnavailable(format!("{addr}: {e}")).into());
                }
                std::thread::sleep(Duration::from_millis(50));
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CameraTrace {
    pub k: u32,
    pub y: f64,
    pub g_plain: f64,
    pub u_plain: f64,
    pub t_camera_s: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ServerTrace {
    pub k: u32,
    pub t_server_s: f64,
    pub ops: OpCounts,
}

#[derive(Debug, Clone, Copy)]
pub struct ActuatorTrace {
    pub k: u32,
    pub num: i64,
    pub den: i64,
    pub u: f64,
    pub y_next: f64,
    pub budget_bits: f64,
    pub t_actuator_s: f64,
}

/// Camera role: synthesizes and encrypts `steps` frames, driven by the
/// positions the actuator reports back over the world channel.
pub fn run_camera(
    cfg: &RunConfig,
    keys_dir: &Path,
    server_addr: SocketAddr,
    world_addr: SocketAddr,
) -> Result<Vec<CameraTrace>> {
    let params = cfg.validate()?;
    let keys = CameraKeys::load(keys_dir, &params)?;
    let digest = params.ring().digest();

    let server = connect_retry(server_addr)?;
    let mut server_r = BufReader::new(server.try_clone()?);
    let mut server_w = BufWriter::new(server);
    let _ = &mut server_r; // camera never reads from the server
    send_control(&mut server_w, digest, MSG_HELLO_CAMERA, 0, 0.0)?;

    let world = connect_retry(world_addr)?;
    let mut world_r = BufReader::new(world);

    let mut rng = seeded(cfg.seed, Stream::Camera);
    let mut y = cfg.y0;
    let mut held_u_plain = 0.0;
    let mut trace = Vec::with_capacity(cfg.steps);

    for k in 0..cfg.steps as u32 {
        let img = synthesize_image(y, cfg.n, cfg.stage_len, cfg.fg, cfg.bg)
            .with_context(|| format!("at frame {k}"))?;
        let (g_plain, u_plain) = match centroid(&img) {
            Ok((_, _, g)) => (g, control_law(g, cfg.gain)),
            Err(CoreError::AllDarkImage) => (f64::NAN, held_u_plain),
            Err(e) => return Err(e.into()),
        };
        held_u_plain = u_plain;

        let t0 = Instant::now();
        let ct = camera_encrypt(&params, &keys.public, &img, &mut rng)?;
        let t_camera_s = t0.elapsed().as_secs_f64();

        send_control(&mut server_w, digest, MSG_FRAME, k, 0.0)?;
        wire::write_ciphertext(&mut server_w, &ct)?;
        server_w.flush()?;
        log::debug!("camera: sent frame {k}");

        let (msg, got_k, value) = recv_control(&mut world_r)?;
        if msg != MSG_POSITION {
            bail!("unexpected world message {msg}");
        }
        expect_frame_index(k, got_k)?;
        trace.push(CameraTrace {
            k,
            y,
            g_plain,
            u_plain,
            t_camera_s,
        });
        y = value;
    }
    send_control(&mut server_w, digest, MSG_BYE, cfg.steps as u32, 0.0)?;
    Ok(trace)
}

/// Server role: holds evaluation keys only, never a secret key. Accepts
/// the camera and the actuator, then evaluates frames until the camera
/// says goodbye.
pub fn run_server(
    cfg: &RunConfig,
    keys_dir: &Path,
    listener: TcpListener,
) -> Result<Vec<ServerTrace>> {
    let params = cfg.validate()?;
    let keys = ServerKeys::load(keys_dir, &params)?;
    let digest = params.ring().digest();
    // The offline bundle is deterministic in (seed, config), so the
    // designer's transmission is reproduced locally.
    let bundle = offline_setup(
        &params,
        &keys.public,
        cfg.gain,
        cfg.delta,
        cfg.n,
        &mut seeded(cfg.seed, Stream::Offline),
    )?;

    let mut camera: Option<BufReader<TcpStream>> = None;
    let mut actuator: Option<BufWriter<TcpStream>> = None;
    while camera.is_none() || actuator.is_none() {
        let (stream, peer) = listener.accept().context("accepting peer")?;
        stream.set_read_timeout(Some(IO_TIMEOUT))?;
        stream.set_nodelay(true)?;
        let mut r = BufReader::new(stream.try_clone()?);
        let (msg, _, _) = recv_control(&mut r)?;
        match msg {
            MSG_HELLO_CAMERA if camera.is_none() => {
                log::info!("server: camera connected from {peer}");
                camera = Some(r);
            }
            MSG_HELLO_ACTUATOR if actuator.is_none() => {
                log::info!("server: actuator connected from {peer}");
                actuator = Some(BufWriter::new(stream));
            }
            other => bail!("unexpected hello {other}"),
        }
    }
    let mut camera = camera.unwrap();
    let mut actuator = actuator.unwrap();

    let mut trace = Vec::new();
    let mut expected = 0u32;
    loop {
        let (msg, k, _) = recv_control(&mut camera)?;
        match msg {
            MSG_FRAME => {
                expect_frame_index(expected, k)?;
                let ct = wire::read_ciphertext(&mut camera, params.ring()).map_err(map_peer_err)?;
                let t0 = Instant::now();
                let ServerResult { num, den, ops } =
                    server_evaluate(&bundle, &ct, &keys.galois, &keys.relin)?;
                let t_server_s = t0.elapsed().as_secs_f64();
                send_control(&mut actuator, digest, MSG_RESULT, k, 0.0)?;
                wire::write_ciphertext(&mut actuator, &num)?;
                wire::write_ciphertext(&mut actuator, &den)?;
                actuator.flush()?;
                trace.push(ServerTrace { k, t_server_s, ops });
                log::debug!("server: frame {k} evaluated in {t_server_s:.3}s");
                expected += 1;
            }
            MSG_BYE => {
                send_control(&mut actuator, digest, MSG_BYE, k, 0.0)?;
                actuator.flush()?;
                return Ok(trace);
            }
            other => bail!("unexpected message {other} from camera"),
        }
    }
}

/// Actuator role: decrypts results, applies the control input to its
/// plant, and reports positions back to the camera over the world
/// listener it owns.
pub fn run_actuator(
    cfg: &RunConfig,
    keys_dir: &Path,
    server_addr: SocketAddr,
    world_listener: TcpListener,
) -> Result<Vec<ActuatorTrace>> {
    let params = cfg.validate()?;
    let keys = ActuatorKeys::load(keys_dir, &params)?;
    let digest = params.ring().digest();

    let server = connect_retry(server_addr)?;
    let mut server_r = BufReader::new(server.try_clone()?);
    let mut server_w = BufWriter::new(server);
    send_control(&mut server_w, digest, MSG_HELLO_ACTUATOR, 0, 0.0)?;

    let (world, peer) = world_listener.accept().context("accepting camera")?;
    world.set_nodelay(true)?;
    log::info!("actuator: camera world link from {peer}");
    let mut world_w = BufWriter::new(world);

    let mut state = PlantState::new(cfg.y0);
    let mut held_u = 0.0f64;
    let mut trace = Vec::with_capacity(cfg.steps);
    let mut expected = 0u32;
    loop {
        let (msg, k, _) = recv_control(&mut server_r)?;
        match msg {
            MSG_RESULT => {
                expect_frame_index(expected, k)?;
                let num =
                    wire::read_ciphertext(&mut server_r, params.ring()).map_err(map_peer_err)?;
                let den =
                    wire::read_ciphertext(&mut server_r, params.ring()).map_err(map_peer_err)?;
                let t0 = Instant::now();
                let result = ServerResult {
                    num,
                    den,
                    ops: OpCounts::default(),
                };
                let decoded = actuator_decode(&keys.secret, &result, cfg.delta);
                let t_actuator_s = t0.elapsed().as_secs_f64();
                let (u, num_v, den_v, budget) = match decoded {
                    Ok(out) => (out.u, out.num, out.den, out.budget_bits),
                    Err(CoreError::ZeroDenominator) => (held_u, 0, 0, f64::NAN),
                    Err(e) => return Err(e.into()),
                };
                held_u = u;
                state = plant_step(state, u);
                send_control(&mut world_w, digest, MSG_POSITION, k, state.y)?;
                trace.push(ActuatorTrace {
                    k,
                    num: num_v,
                    den: den_v,
                    u,
                    y_next: state.y,
                    budget_bits: budget,
                    t_actuator_s,
                });
                expected += 1;
            }
            MSG_BYE => return Ok(trace),
            other => bail!("unexpected message {other} from server"),
        }
    }
}

/// Writes the actuator-side trace (the role-mode telemetry artifact).
pub fn write_actuator_trace(path: &Path, trace: &[ActuatorTrace]) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "k,num,den,u,y_next,noise_budget_bits,t_actuator_s")?;
    for r in trace {
        writeln!(
            f,
            "{},{},{},{},{},{},{}",
            r.k, r.num, r.den, r.u, r.y_next, r.budget_bits, r.t_actuator_s
        )?;
    }
    Ok(())
}

/// Runs the three roles as threads over real loopback TCP sockets and
/// merges their traces into the in-process record format.
pub fn run_tcp_threads(cfg: &RunConfig) -> Result<crate::sim::SimOutcome> {
    use evfc_core::pipeline::rotation_steps;
    use evfc_core::scheme::keygen;

    let params = cfg.validate()?;
    let keys = keygen(
        &params,
        rotation_steps(cfg.n),
        &mut seeded(cfg.seed, Stream::KeyGen),
    );
    let dir = std::env::temp_dir().join(format!("evfc-tcp-{}-{}", std::process::id(), cfg.seed));
    crate::keys_io::write_keys_dir(&dir, &params, &keys)?;

    let server_listener = TcpListener::bind("127.0.0.1:0")?;
    let server_addr = server_listener.local_addr()?;
    let world_listener = TcpListener::bind("127.0.0.1:0")?;
    let world_addr = world_listener.local_addr()?;

    let outcome = std::thread::scope(|scope| -> Result<crate::sim::SimOutcome> {
        let server = scope.spawn(|| run_server(cfg, &dir, server_listener));
        let actuator = scope.spawn(|| run_actuator(cfg, &dir, server_addr, world_listener));
        let camera = scope.spawn(|| run_camera(cfg, &dir, server_addr, world_addr));

        let cam_trace = camera.join().expect("camera thread")?;
        let srv_trace = server.join().expect("server thread")?;
        let act_trace = actuator.join().expect("actuator thread")?;
        Ok(merge_traces(cfg, &cam_trace, &srv_trace, &act_trace))
    });
    let _ = std::fs::remove_dir_all(&dir);
    outcome
}

/// Assembles per-role traces into the unified record stream.
pub fn merge_traces(
    cfg: &RunConfig,
    cam: &[CameraTrace],
    srv: &[ServerTrace],
    act: &[ActuatorTrace],
) -> crate::sim::SimOutcome {
    assert_eq!(cam.len(), act.len());
    assert_eq!(cam.len(), srv.len());
    let gain_quantized = evfc_core::vision::quantize_gain(
        cfg.gain,
        cfg.delta,
        SchemeParams::preset(cfg.preset)
            .expect("validated earlier")
            .plain_modulus(),
    )
    .expect("validated earlier");
    let records: Vec<crate::sim::LoopRecord> = cam
        .iter()
        .zip(srv)
        .zip(act)
        .map(|((c, s), a)| crate::sim::LoopRecord {
            k: c.k as usize,
            y_true: c.y,
            g_plain: c.g_plain,
            g_enc: if gain_quantized != 0 && a.den != 0 {
                a.num as f64 / (gain_quantized as f64 * a.den as f64)
            } else {
                f64::NAN
            },
            u_plain: c.u_plain,
            u_enc: a.u,
            noise_budget_bits: a.budget_bits,
            t_camera_s: c.t_camera_s,
            t_server_s: s.t_server_s,
            t_actuator_s: a.t_actuator_s,
            num: Some(a.num),
            den: Some(a.den),
        })
        .collect();
    let final_y = act.last().map(|a| a.y_next).unwrap_or(cfg.y0);
    let ops = srv.last().map(|s| s.ops).unwrap_or_default();
    let summary = crate::sim::summarize(cfg, &records, final_y, ops);
    crate::sim::SimOutcome { records, summary }
}
