use thiserror::Error;

/// Errors surfaced by the encryption scheme, the control pipeline, and the
/// wire format.
#[derive(Debug, Error)]
pub enum Error {
    /// The requested (N, log2 q) pair is below the requested security level.
    #[error("security level too low: N = {n}, total q bits = {q_bits}, maximum for {lambda}-bit security is {max_bits}")]
    SecurityLevelTooLow {
        n: usize,
        q_bits: u32,
        max_bits: u32,
        lambda: u32,
    },

    /// A modulus violates the ring constraints (not prime, wrong residue
    /// class mod 2N, duplicate, or no prime of the requested size exists).
    #[error("invalid modulus: {0}")]
    InvalidModulus(String),

    /// Two operands live under different parameters, moduli, or forms.
    #[error("parameter mismatch: {0}")]
    ParameterMismatch(String),

    /// No Galois key for the requested rotation step (and the step cannot
    /// be decomposed into available steps).
    #[error("missing Galois key for rotation step {0}")]
    MissingGaloisKey(usize),

    /// The noise budget is exhausted; decrypted data is unreliable.
    #[error("noise budget exhausted (budget {budget_bits:.1} bits)")]
    NoiseOverflow { budget_bits: f64 },

    /// The synthesized stage would clip the camera frame.
    #[error("stage out of frame: pixel index {index} outside [{min}, {max}]")]
    StageOutOfFrame { index: i64, min: i64, max: i64 },

    /// Every pixel is zero; the centroid is undefined.
    #[error("all-dark image: centroid undefined")]
    AllDarkImage,

    /// |Δ·K| does not fit the plaintext modulus.
    #[error("gain overflow: |Δ·K| = {value:.3e} exceeds t/2 = {half_t:.3e}")]
    GainOverflow { value: f64, half_t: f64 },

    /// The worst-case pipeline value would wrap mod t.
    #[error("overflow config: worst-case |Δ·K·I_w| = {value:.3e} exceeds t/2 = {half_t:.3e}")]
    OverflowConfig { value: f64, half_t: f64 },

    /// More pixels than usable slots.
    #[error("image too wide: n = {n} pixels, only {m} slots")]
    ImageTooWide { n: usize, m: usize },

    /// The denominator slot decrypted to zero (all-dark frame).
    #[error("zero denominator: total brightness is zero")]
    ZeroDenominator,

    /// A slot value is outside the centered range for t.
    #[error("slot value {0} outside centered range for t")]
    SlotOutOfRange(i64),

    /// Serialized data was produced by an incompatible format version.
    #[error("wire format version mismatch: got {got}, expected {expected}")]
    VersionMismatch { got: u16, expected: u16 },

    /// The byte stream ended before the declared payload length.
    #[error("truncated stream: {0}")]
    TruncatedStream(String),

    /// CRC32 verification failed.
    #[error("checksum failure: got {got:#010x}, expected {expected:#010x}")]
    ChecksumFail { got: u32, expected: u32 },

    /// Unknown payload kind or malformed payload body.
    #[error("malformed payload: {0}")]
    MalformedPayload(String),

    /// Payload was produced under different ring parameters.
    #[error("ring parameter digest mismatch: got {got:#018x}, expected {expected:#018x}")]
    ParamsDigestMismatch { got: u64, expected: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
