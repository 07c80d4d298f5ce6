//! Exact arithmetic in Z_p and the negacyclic polynomial rings
//! Z_p[X]/(X^N + 1), with RNS modulus chains and the NTT.

mod modulus;
mod ntt;
mod params;
mod poly;

pub use modulus::{find_ntt_prime, is_prime_u64, Modulus};
pub use ntt::NttTable;
pub use params::RingParams;
pub use poly::{ChainKind, PolyForm, RingPoly};

use crate::error::{Error, Result};

/// Centered reduction: the representative of `x` mod `p` in [-p/2, p/2),
/// computed as x - ⌊(x + p/2)/p⌋·p.
pub fn center_mod(x: i128, p: u64) -> i64 {
    debug_assert!(p >= 2);
    let p = p as i128;
    let q = (2 * x + p).div_euclid(2 * p);
    (x - q * p) as i64
}

/// Transform direction for [`ntt_transform`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NttDirection {
    Forward,
    Inverse,
}

/// Validated whole-poly transform between coefficient and evaluation form.
/// The in-place methods on [`RingPoly`] are what hot paths use; this is
/// the checked public entry point.
pub fn ntt_transform(a: &RingPoly, direction: NttDirection) -> Result<RingPoly> {
    let expected = match direction {
        NttDirection::Forward => PolyForm::Coefficient,
        NttDirection::Inverse => PolyForm::Ntt,
    };
    if a.form() != expected {
        return Err(Error::ParameterMismatch(format!(
            "ntt_transform {direction:?} expects {expected:?} input, got {:?}",
            a.form()
        )));
    }
    let mut out = a.clone();
    match direction {
        NttDirection::Forward => out.to_ntt(),
        NttDirection::Inverse => out.to_coeff(),
    }
    Ok(out)
}

/// Product in R_p (negacyclic: X^N ≡ -1). Accepts either form and returns
/// the result in the form of `a`.
pub fn poly_mul_mod(a: &RingPoly, b: &RingPoly) -> Result<RingPoly> {
    a.check_compatible_chain(b)?;
    let mut lhs = a.clone();
    let mut rhs = b.clone();
    lhs.to_ntt();
    rhs.to_ntt();
    lhs.mul_assign(&rhs)?;
    if a.form() == PolyForm::Coefficient {
        lhs.to_coeff();
    }
    Ok(lhs)
}
