//! Versioned binary serialization for keys, plaintexts, and ciphertexts.
//!
//! Frame layout (all little-endian):
//!
//! ```text
//! "EVFC" | version u16 | kind u8 | ring digest u64 | body len u32 | body | crc32 u32
//! ```
//!
//! The CRC covers everything before it. Polynomial bodies are written as
//! per-residue u64 coefficient arrays in NTT form (plaintexts are
//! transformed on the way out and back on the way in), so cross-process
//! data is bit-exact as long as the ring digest matches.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ring::{ChainKind, PolyForm, RingParams, RingPoly};
use crate::scheme::{Ciphertext, KeySet, KeySwitchKey, PlaintextPoly, PublicKey, SecretKey};

pub const MAGIC: [u8; 4] = *b"EVFC";
pub const WIRE_VERSION: u16 = 1;

/// Frame payload kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum PayloadKind {
    PublicKey = 1,
    SecretKey = 2,
    RelinKey = 3,
    GaloisKeys = 4,
    Ciphertext = 5,
    Plaintext = 6,
    /// Harness control messages (network protocol payloads).
    Control = 32,
}

impl PayloadKind {
    pub fn from_u8(v: u8) -> Option<PayloadKind> {
        match v {
            1 => Some(PayloadKind::PublicKey),
            2 => Some(PayloadKind::SecretKey),
            3 => Some(PayloadKind::RelinKey),
            4 => Some(PayloadKind::GaloisKeys),
            5 => Some(PayloadKind::Ciphertext),
            6 => Some(PayloadKind::Plaintext),
            32 => Some(PayloadKind::Control),
            _ => None,
        }
    }
}

const MAX_BODY: u32 = 1 << 30;

pub fn write_frame(w: &mut impl Write, kind: PayloadKind, digest: u64, body: &[u8]) -> Result<()> {
    assert!(body.len() as u64 <= MAX_BODY as u64, "body too large");
    let mut head = Vec::with_capacity(19 + body.len());
    head.extend_from_slice(&MAGIC);
    head.extend_from_slice(&WIRE_VERSION.to_le_bytes());
    head.push(kind as u8);
    head.extend_from_slice(&digest.to_le_bytes());
    head.extend_from_slice(&(body.len() as u32).to_le_bytes());
    head.extend_from_slice(body);
    let crc = crc32fast::hash(&head);
    w.write_all(&head)?;
    w.write_all(&crc.to_le_bytes())?;
    Ok(())
}

fn read_exact(r: &mut impl Read, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::TruncatedStream(what.to_string())
        } else {
            Error::Io(e)
        }
    })
}

/// Reads one frame, verifying magic, version, and checksum.
pub fn read_frame(r: &mut impl Read) -> Result<(PayloadKind, u64, Vec<u8>)> {
    let mut head = [0u8; 19];
    read_exact(r, &mut head, "frame header")?;
    if head[0..4] != MAGIC {
        return Err(Error::MalformedPayload("bad magic".into()));
    }
    let version = u16::from_le_bytes(head[4..6].try_into().unwrap());
    if version != WIRE_VERSION {
        return Err(Error::VersionMismatch {
            got: version,
            expected: WIRE_VERSION,
        });
    }
    let kind = PayloadKind::from_u8(head[6])
        .ok_or_else(|| Error::MalformedPayload(format!("unknown payload kind {}", head[6])))?;
    let digest = u64::from_le_bytes(head[7..15].try_into().unwrap());
    let len = u32::from_le_bytes(head[15..19].try_into().unwrap());
    if len > MAX_BODY {
        return Err(Error::MalformedPayload(format!(
            "body length {len} too large"
        )));
    }
    let mut body = vec![0u8; len as usize];
    read_exact(r, &mut body, "frame body")?;
    let mut crc_bytes = [0u8; 4];
    read_exact(r, &mut crc_bytes, "frame checksum")?;
    let got = u32::from_le_bytes(crc_bytes);
    let mut hasher = crc32fast::Hasher::new();
    hasher.update(&head);
    hasher.update(&body);
    let expected = hasher.finalize();
    if got != expected {
        return Err(Error::ChecksumFail { got, expected });
    }
    Ok((kind, digest, body))
}

// ---- polynomial bodies ----------------------------------------------------

fn push_poly(body: &mut Vec<u8>, poly: &RingPoly) {
    // Always serialized in NTT form.
    let ntt;
    let poly = if poly.form() == PolyForm::Ntt {
        poly
    } else {
        let mut p = poly.clone();
        p.to_ntt();
        ntt = p;
        &ntt
    };
    let chain = match poly.chain() {
        ChainKind::Cipher => 0u8,
        ChainKind::Plain => 2u8,
        ChainKind::Extended => panic!("extended-chain polys are never serialized"),
    };
    body.push(chain);
    body.extend_from_slice(&(poly.residue_count() as u16).to_le_bytes());
    body.extend_from_slice(&(poly.params().degree() as u32).to_le_bytes());
    for i in 0..poly.residue_count() {
        for &v in poly.residue(i) {
            body.extend_from_slice(&v.to_le_bytes());
        }
    }
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(buf: &'a [u8]) -> Cursor<'a> {
        Cursor { buf, pos: 0 }
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::TruncatedStream(what.to_string()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn done(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::MalformedPayload("trailing bytes".into()));
        }
        Ok(())
    }
}

fn parse_poly(c: &mut Cursor, params: &Arc<RingParams>, want_plain: bool) -> Result<RingPoly> {
    let chain = match c.u8("poly chain")? {
        0 => ChainKind::Cipher,
        2 => ChainKind::Plain,
        other => {
            return Err(Error::MalformedPayload(format!("bad chain tag {other}")));
        }
    };
    if want_plain != (chain == ChainKind::Plain) {
        return Err(Error::MalformedPayload("unexpected poly chain".into()));
    }
    let residues = c.u16("poly residue count")? as usize;
    let degree = c.u32("poly degree")? as usize;
    if degree != params.degree() {
        return Err(Error::MalformedPayload(format!(
            "degree {degree} does not match parameters"
        )));
    }
    let expected_residues = match chain {
        ChainKind::Cipher => params.q_tables().len(),
        ChainKind::Plain => 1,
        ChainKind::Extended => unreachable!(),
    };
    if residues != expected_residues {
        return Err(Error::MalformedPayload(format!(
            "residue count {residues} does not match parameters"
        )));
    }
    let mut data = Vec::with_capacity(residues * degree);
    for _ in 0..residues * degree {
        data.push(c.u64("poly coefficients")?);
    }
    let mut poly = RingPoly::from_raw(params, chain, PolyForm::Ntt, data)?;
    if chain == ChainKind::Plain {
        poly.to_coeff();
    }
    Ok(poly)
}

// ---- typed writers/readers -------------------------------------------------

fn check_digest(params: &RingParams, got: u64) -> Result<()> {
    if got != params.digest() {
        return Err(Error::ParamsDigestMismatch {
            got,
            expected: params.digest(),
        });
    }
    Ok(())
}

pub fn write_ciphertext(w: &mut impl Write, ct: &Ciphertext) -> Result<()> {
    let mut body = Vec::new();
    for part in ct.parts() {
        push_poly(&mut body, part);
    }
    write_frame(
        w,
        PayloadKind::Ciphertext,
        ct.parts()[0].params().digest(),
        &body,
    )
}

pub fn read_ciphertext(r: &mut impl Read, params: &Arc<RingParams>) -> Result<Ciphertext> {
    let (kind, digest, body) = read_frame(r)?;
    if kind != PayloadKind::Ciphertext {
        return Err(Error::MalformedPayload(format!(
            "expected ciphertext, got {kind:?}"
        )));
    }
    check_digest(params, digest)?;
    let mut c = Cursor::new(&body);
    let c0 = parse_poly(&mut c, params, false)?;
    let c1 = parse_poly(&mut c, params, false)?;
    c.done()?;
    Ok(Ciphertext::from_parts(c0, c1))
}

pub fn write_plaintext(w: &mut impl Write, pt: &PlaintextPoly) -> Result<()> {
    let mut body = Vec::new();
    push_poly(&mut body, pt.poly());
    write_frame(
        w,
        PayloadKind::Plaintext,
        pt.poly().params().digest(),
        &body,
    )
}

pub fn read_plaintext(r: &mut impl Read, params: &Arc<RingParams>) -> Result<PlaintextPoly> {
    let (kind, digest, body) = read_frame(r)?;
    if kind != PayloadKind::Plaintext {
        return Err(Error::MalformedPayload(format!(
            "expected plaintext, got {kind:?}"
        )));
    }
    check_digest(params, digest)?;
    let mut c = Cursor::new(&body);
    let poly = parse_poly(&mut c, params, true)?;
    c.done()?;
    Ok(PlaintextPoly::from_poly(poly))
}

pub fn write_public_key(w: &mut impl Write, params: &RingParams, pk: &PublicKey) -> Result<()> {
    let mut body = Vec::new();
    push_poly(&mut body, &pk.b);
    push_poly(&mut body, &pk.a);
    write_frame(w, PayloadKind::PublicKey, params.digest(), &body)
}

pub fn read_public_key(r: &mut impl Read, params: &Arc<RingParams>) -> Result<PublicKey> {
    let (kind, digest, body) = read_frame(r)?;
    if kind != PayloadKind::PublicKey {
        return Err(Error::MalformedPayload(format!(
            "expected public key, got {kind:?}"
        )));
    }
    check_digest(params, digest)?;
    let mut c = Cursor::new(&body);
    let b = parse_poly(&mut c, params, false)?;
    let a = parse_poly(&mut c, params, false)?;
    c.done()?;
    Ok(PublicKey { b, a })
}

pub fn write_secret_key(w: &mut impl Write, params: &RingParams, sk: &SecretKey) -> Result<()> {
    // Ternary coefficients, one signed byte each.
    let mut body = Vec::with_capacity(4 + params.degree());
    body.extend_from_slice(&(params.degree() as u32).to_le_bytes());
    body.extend(sk.coeffs.iter().map(|&c| c as i8 as u8));
    write_frame(w, PayloadKind::SecretKey, params.digest(), &body)
}

pub fn read_secret_key(r: &mut impl Read, params: &Arc<RingParams>) -> Result<SecretKey> {
    let (kind, digest, body) = read_frame(r)?;
    if kind != PayloadKind::SecretKey {
        return Err(Error::MalformedPayload(format!(
            "expected secret key, got {kind:?}"
        )));
    }
    check_digest(params, digest)?;
    let mut c = Cursor::new(&body);
    let degree = c.u32("secret key degree")? as usize;
    if degree != params.degree() {
        return Err(Error::MalformedPayload("secret key degree mismatch".into()));
    }
    let raw = c.take(degree, "secret key coefficients")?;
    c.done()?;
    let coeffs: Vec<i64> = raw.iter().map(|&b| b as i8 as i64).collect();
    if coeffs.iter().any(|&v| !(-1..=1).contains(&v)) {
        return Err(Error::MalformedPayload("secret key is not ternary".into()));
    }
    Ok(SecretKey::from_coeffs(params, coeffs))
}

fn push_key_switch_key(body: &mut Vec<u8>, ksk: &KeySwitchKey) {
    body.extend_from_slice(&(ksk.digits.len() as u16).to_le_bytes());
    for (b, a) in &ksk.digits {
        push_poly(body, b);
        push_poly(body, a);
    }
}

fn parse_key_switch_key(c: &mut Cursor, params: &Arc<RingParams>) -> Result<KeySwitchKey> {
    let count = c.u16("digit count")? as usize;
    if count != params.digit_groups.len() {
        return Err(Error::MalformedPayload("digit count mismatch".into()));
    }
    let mut digits = Vec::with_capacity(count);
    for _ in 0..count {
        let b = parse_poly(c, params, false)?;
        let a = parse_poly(c, params, false)?;
        digits.push((b, a));
    }
    Ok(KeySwitchKey { digits })
}

pub fn write_relin_key(w: &mut impl Write, params: &RingParams, rlk: &KeySwitchKey) -> Result<()> {
    let mut body = Vec::new();
    push_key_switch_key(&mut body, rlk);
    write_frame(w, PayloadKind::RelinKey, params.digest(), &body)
}

pub fn read_relin_key(r: &mut impl Read, params: &Arc<RingParams>) -> Result<KeySwitchKey> {
    let (kind, digest, body) = read_frame(r)?;
    if kind != PayloadKind::RelinKey {
        return Err(Error::MalformedPayload(format!(
            "expected relin key, got {kind:?}"
        )));
    }
    check_digest(params, digest)?;
    let mut c = Cursor::new(&body);
    let ksk = parse_key_switch_key(&mut c, params)?;
    c.done()?;
    Ok(ksk)
}

pub fn write_galois_keys(
    w: &mut impl Write,
    params: &RingParams,
    keys: &BTreeMap<usize, KeySwitchKey>,
) -> Result<()> {
    let mut body = Vec::new();
    body.extend_from_slice(&(keys.len() as u16).to_le_bytes());
    for (&step, ksk) in keys {
        body.extend_from_slice(&(step as u32).to_le_bytes());
        push_key_switch_key(&mut body, ksk);
    }
    write_frame(w, PayloadKind::GaloisKeys, params.digest(), &body)
}

pub fn read_galois_keys(
    r: &mut impl Read,
    params: &Arc<RingParams>,
) -> Result<BTreeMap<usize, KeySwitchKey>> {
    let (kind, digest, body) = read_frame(r)?;
    if kind != PayloadKind::GaloisKeys {
        return Err(Error::MalformedPayload(format!(
            "expected Galois keys, got {kind:?}"
        )));
    }
    check_digest(params, digest)?;
    let mut c = Cursor::new(&body);
    let count = c.u16("key count")? as usize;
    let mut keys = BTreeMap::new();
    for _ in 0..count {
        let step = c.u32("rotation step")? as usize;
        keys.insert(step, parse_key_switch_key(&mut c, params)?);
    }
    c.done()?;
    Ok(keys)
}

/// Serializes a full key set into one buffer (pk, sk, rlk, galois frames).
pub fn write_key_set(w: &mut impl Write, params: &RingParams, keys: &KeySet) -> Result<()> {
    write_public_key(w, params, &keys.public)?;
    write_secret_key(w, params, &keys.secret)?;
    write_relin_key(w, params, &keys.relin)?;
    write_galois_keys(w, params, &keys.galois)
}

pub fn read_key_set(r: &mut impl Read, params: &Arc<RingParams>) -> Result<KeySet> {
    Ok(KeySet {
        public: read_public_key(r, params)?,
        secret: read_secret_key(r, params)?,
        relin: read_relin_key(r, params)?,
        galois: read_galois_keys(r, params)?,
    })
}

/// One-shot helpers.
pub fn ciphertext_to_bytes(ct: &Ciphertext) -> Vec<u8> {
    let mut out = Vec::new();
    write_ciphertext(&mut out, ct).expect("vec write");
    out
}

pub fn ciphertext_from_bytes(bytes: &[u8], params: &Arc<RingParams>) -> Result<Ciphertext> {
    read_ciphertext(&mut &bytes[..], params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packing::{pack, CleartextVector};
    use crate::rng::{seeded, Stream};
    use crate::scheme::{decrypt, encrypt, keygen, SchemeParams};

    fn setup() -> (SchemeParams, KeySet) {
        let params = SchemeParams::custom(1 << 10, &[27, 27], 14, 0).unwrap();
        let keys = keygen(&params, [1, 2], &mut seeded(500, Stream::KeyGen));
        (params, keys)
    }

    #[test]
    fn ciphertext_roundtrip_decrypts_identically() {
        let (params, keys) = setup();
        let mut rng = seeded(501, Stream::Camera);
        let x = CleartextVector::from_prefix(params.ring(), &[1, -2, 3]).unwrap();
        let ct = encrypt(
            &params,
            &keys.public,
            &pack(params.ring(), &x).unwrap(),
            &mut rng,
        )
        .unwrap();
        let bytes = ciphertext_to_bytes(&ct);
        let back = ciphertext_from_bytes(&bytes, params.ring()).unwrap();
        assert_eq!(back, ct);
        assert_eq!(
            decrypt(&keys.secret, &back).unwrap(),
            decrypt(&keys.secret, &ct).unwrap()
        );
    }

    #[test]
    fn key_set_roundtrip() {
        let (params, keys) = setup();
        let mut buf = Vec::new();
        write_key_set(&mut buf, params.ring(), &keys).unwrap();
        let back = read_key_set(&mut &buf[..], params.ring()).unwrap();
        assert_eq!(back, keys);
    }

    #[test]
    fn plaintext_roundtrip() {
        let (params, _) = setup();
        let x = CleartextVector::from_prefix(params.ring(), &[-5, 0, 7, 2]).unwrap();
        let pt = pack(params.ring(), &x).unwrap();
        let mut buf = Vec::new();
        write_plaintext(&mut buf, &pt).unwrap();
        let back = read_plaintext(&mut &buf[..], params.ring()).unwrap();
        assert_eq!(back, pt);
    }

    #[test]
    fn truncated_stream_detected() {
        let (params, keys) = setup();
        let mut rng = seeded(502, Stream::Camera);
        let x = CleartextVector::from_prefix(params.ring(), &[9]).unwrap();
        let ct = encrypt(
            &params,
            &keys.public,
            &pack(params.ring(), &x).unwrap(),
            &mut rng,
        )
        .unwrap();
        let bytes = ciphertext_to_bytes(&ct);
        for cut in [3usize, 18, bytes.len() / 2, bytes.len() - 1] {
            let err = ciphertext_from_bytes(&bytes[..cut], params.ring()).unwrap_err();
            assert!(
                matches!(err, Error::TruncatedStream(_)),
                "cut at {cut}: {err:?}"
            );
        }
    }

    #[test]
    fn corruption_fails_checksum() {
        let (params, keys) = setup();
        let mut rng = seeded(503, Stream::Camera);
        let x = CleartextVector::from_prefix(params.ring(), &[4]).unwrap();
        let ct = encrypt(
            &params,
            &keys.public,
            &pack(params.ring(), &x).unwrap(),
            &mut rng,
        )
        .unwrap();
        let mut bytes = ciphertext_to_bytes(&ct);
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0xAA;
        let err = ciphertext_from_bytes(&bytes, params.ring()).unwrap_err();
        assert!(
            matches!(err, Error::ChecksumFail { .. } | Error::MalformedPayload(_)),
            "{err:?}"
        );
    }

    #[test]
    fn version_mismatch_detected() {
        let (params, keys) = setup();
        let mut rng = seeded(504, Stream::Camera);
        let x = CleartextVector::from_prefix(params.ring(), &[4]).unwrap();
        let ct = encrypt(
            &params,
            &keys.public,
            &pack(params.ring(), &x).unwrap(),
            &mut rng,
        )
        .unwrap();
        let mut bytes = ciphertext_to_bytes(&ct);
        bytes[4] = 0xFF; // version low byte
                         // Fix the CRC so only the version differs.
        let body_end = bytes.len() - 4;
        let crc = crc32fast::hash(&bytes[..body_end]);
        let crc_pos = bytes.len() - 4;
        bytes[crc_pos..].copy_from_slice(&crc.to_le_bytes());
        let err = ciphertext_from_bytes(&bytes, params.ring()).unwrap_err();
        assert!(matches!(err, Error::VersionMismatch { .. }), "{err:?}");
    }

    #[test]
    fn wrong_params_digest_rejected() {
        let (params, keys) = setup();
        let mut rng = seeded(505, Stream::Camera);
        let x = CleartextVector::from_prefix(params.ring(), &[4]).unwrap();
        let ct = encrypt(
            &params,
            &keys.public,
            &pack(params.ring(), &x).unwrap(),
            &mut rng,
        )
        .unwrap();
        let bytes = ciphertext_to_bytes(&ct);
        let other = SchemeParams::custom(1 << 10, &[27, 27], 16, 0).unwrap();
        let err = ciphertext_from_bytes(&bytes, other.ring()).unwrap_err();
        assert!(matches!(err, Error::ParamsDigestMismatch { .. }), "{err:?}");
    }
}
