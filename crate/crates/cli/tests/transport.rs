//! Transport equivalence: the TCP role threads must produce bit-identical
//! results to the in-process loop under the same seed.

use evfc_cli::config::{Mode, RunConfig, Transport};
use evfc_cli::{net, sim};
use evfc_core::scheme::Preset;

#[test]
fn tcp_threads_match_inproc_bit_exactly() {
    let cfg = RunConfig {
        preset: Preset::Desk,
        mode: Mode::Encrypted,
        steps: 4,
        n: 64,
        y0: 8.0,
        seed: 99,
        ..RunConfig::default()
    };
    let inproc = sim::run_simulation(&cfg).unwrap();
    let tcp = net::run_tcp_threads(&RunConfig {
        transport: Transport::Tcp,
        ..cfg.clone()
    })
    .unwrap();

    assert_eq!(inproc.records.len(), tcp.records.len());
    for (a, b) in inproc.records.iter().zip(&tcp.records) {
        assert_eq!(a.num, b.num, "frame {}", a.k);
        assert_eq!(a.den, b.den, "frame {}", a.k);
        assert_eq!(a.u_enc.to_bits(), b.u_enc.to_bits(), "frame {}", a.k);
        assert_eq!(a.y_true.to_bits(), b.y_true.to_bits(), "frame {}", a.k);
    }
    assert_eq!(
        inproc.summary.final_y.to_bits(),
        tcp.summary.final_y.to_bits()
    );
}
