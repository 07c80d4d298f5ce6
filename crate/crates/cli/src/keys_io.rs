//! Key files on disk and the per-role capability split.
//!
//! `keygen` writes four files (pk.evfc, sk.evfc, rlk.evfc, galois.evfc).
//! Each role loads only what its job needs; the server loader never
//! opens sk.evfc and its key type has no decryption capability at all.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use anyhow::{Context, Result};
use evfc_core::scheme::{KeySet, KeySwitchKey, PublicKey, SchemeParams, SecretKey};
use evfc_core::wire;

pub const PK_FILE: &str = "pk.evfc";
pub const SK_FILE: &str = "sk.evfc";
pub const RLK_FILE: &str = "rlk.evfc";
pub const GALOIS_FILE: &str = "galois.evfc";

pub fn write_keys_dir(dir: &Path, params: &SchemeParams, keys: &KeySet) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let ring = params.ring();
    let open = |name: &str| -> Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(dir.join(name))?))
    };
    wire::write_public_key(&mut open(PK_FILE)?, ring, &keys.public)?;
    wire::write_secret_key(&mut open(SK_FILE)?, ring, &keys.secret)?;
    wire::write_relin_key(&mut open(RLK_FILE)?, ring, &keys.relin)?;
    wire::write_galois_keys(&mut open(GALOIS_FILE)?, ring, &keys.galois)?;
    Ok(())
}

fn reader(dir: &Path, name: &str) -> Result<BufReader<File>> {
    let path = dir.join(name);
    Ok(BufReader::new(File::open(&path).with_context(|| {
        format!("opening key file {}", path.display())
    })?))
}

/// The camera encrypts; it holds only the public key.
pub struct CameraKeys {
    pub public: PublicKey,
}

impl CameraKeys {
    pub fn load(dir: &Path, params: &SchemeParams) -> Result<CameraKeys> {
        Ok(CameraKeys {
            public: wire::read_public_key(&mut reader(dir, PK_FILE)?, params.ring())?,
        })
    }
}

/// The server evaluates homomorphically: rotation and relinearization
/// keys plus the public key (for the offline gain encryption). There is
/// no secret-key field, so this role cannot decrypt by construction.
pub struct ServerKeys {
    pub public: PublicKey,
    pub relin: KeySwitchKey,
    pub galois: BTreeMap<usize, KeySwitchKey>,
}

impl ServerKeys {
    pub fn load(dir: &Path, params: &SchemeParams) -> Result<ServerKeys> {
        Ok(ServerKeys {
            public: wire::read_public_key(&mut reader(dir, PK_FILE)?, params.ring())?,
            relin: wire::read_relin_key(&mut reader(dir, RLK_FILE)?, params.ring())?,
            galois: wire::read_galois_keys(&mut reader(dir, GALOIS_FILE)?, params.ring())?,
        })
    }
}

/// Only the actuator decrypts.
pub struct ActuatorKeys {
    pub secret: SecretKey,
}

impl ActuatorKeys {
    pub fn load(dir: &Path, params: &SchemeParams) -> Result<ActuatorKeys> {
        Ok(ActuatorKeys {
            secret: wire::read_secret_key(&mut reader(dir, SK_FILE)?, params.ring())?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use evfc_core::pipeline::rotation_steps;
    use evfc_core::rng::{seeded, Stream};
    use evfc_core::scheme::{keygen, Preset};

    #[test]
    fn roles_load_their_slices_and_server_needs_no_sk() {
        let params = SchemeParams::preset(Preset::Desk).unwrap();
        let keys = keygen(&params, rotation_steps(8), &mut seeded(9, Stream::KeyGen));
        let dir = std::env::temp_dir().join(format!("evfc-keys-{}", std::process::id()));
        write_keys_dir(&dir, &params, &keys).unwrap();

        // A directory with the secret key file removed still serves the
        // camera and the server; only the actuator fails.
        std::fs::remove_file(dir.join(SK_FILE)).unwrap();
        let cam = CameraKeys::load(&dir, &params).unwrap();
        assert_eq!(cam.public, keys.public);
        let srv = ServerKeys::load(&dir, &params).unwrap();
        assert_eq!(srv.relin, keys.relin);
        assert_eq!(srv.galois, keys.galois);
        assert!(ActuatorKeys::load(&dir, &params).is_err());

        std::fs::remove_dir_all(&dir).unwrap();
    }
}
