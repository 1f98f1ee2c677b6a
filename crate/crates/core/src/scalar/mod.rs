//! Coefficient fields.
//!
//! Three backends implement [`Scalar`]: exact rationals, the quadratic
//! extension ℚ(√d) and arbitrary-precision complex floats.  Everything above
//! this module is written once against the trait.

pub(crate) mod numeric;
mod quadratic;
mod rational;

pub use numeric::{BigComplex, Cf};
pub use quadratic::Quadratic;

use std::cmp::Ordering;
use std::fmt::{self, Debug};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::poly::Poly;
use crate::roots::RootSet;

/// Commutative ring with an embedding of the integers.
///
/// Implemented by every [`Scalar`] and by [`Poly`], so that substitutions can
/// be run with a formal parameter in place of a number.
pub trait Ring:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
{
    fn from_i64(v: i64) -> Self;
    fn from_bigint(v: &BigInt) -> Self;

    fn pow_u(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * &base;
            }
        }
        acc
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScalarError {
    /// The value exists in ℂ but not in this backend.
    NotRepresentable(String),
    /// Operands live in different quadratic extensions.
    MixedExtension(i64, i64),
}

impl fmt::Display for ScalarError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarError::NotRepresentable(what) => {
                write!(f, "{what} is not representable in this backend")
            }
            ScalarError::MixedExtension(a, b) => {
                write!(f, "cannot mix sqrt({a}) and sqrt({b})")
            }
        }
    }
}

impl std::error::Error for ScalarError {}

/// A coefficient field.
///
/// Exact backends decide zero exactly.  The numeric backend treats values of
/// modulus below its `epsilon()` as zero; both thresholds are explicit.
pub trait Scalar:
    Ring + Div<Output = Self> + for<'a> Div<&'a Self, Output = Self> + 'static
{
    const EXACT: bool;
    const NAME: &'static str;

    fn from_rational(r: &BigRational) -> Self;

    /// √d for an integer d, principal branch.
    fn sqrt_int(d: &BigInt) -> Result<Self, ScalarError>;

    fn imaginary_unit() -> Result<Self, ScalarError>;

    /// Principal b-th root, exp(Log(self)/b).
    fn principal_root(&self, b: u32) -> Result<Self, ScalarError>;

    fn to_complex64(&self) -> Complex64;

    /// Total order used to sort roots deterministically.
    fn canonical_cmp(&self, other: &Self) -> Ordering;

    fn as_rational(&self) -> Option<BigRational>;

    /// Text that the expression parser reads back to the same value.
    fn literal(&self) -> String;

    /// Tag of the quadratic extension the value needs (0 when rational).
    fn extension(&self) -> i64 {
        0
    }

    /// Galois conjugate a − b√d in ℚ(√d); identity for other backends.
    fn galois_conjugate(&self) -> Self {
        self.clone()
    }

    /// Zero threshold of the backend; 0 for exact backends.
    fn epsilon() -> f64 {
        0.0
    }

    /// Roots with multiplicities.  `context` lists values the roots must be
    /// arithmetically compatible with (relevant for ℚ(√d)).
    fn roots_in_context(p: &Poly<Self>, context: &[Self]) -> Result<RootSet<Self>, RootError>;

    fn find_roots(p: &Poly<Self>) -> Result<RootSet<Self>, RootError> {
        Self::roots_in_context(p, &[])
    }

    fn magnitude(&self) -> f64 {
        self.to_complex64().norm()
    }

    /// Zero test relative to a scale, used where cancellation is expected.
    fn is_negligible(&self, scale: f64) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.magnitude() <= Self::epsilon() * scale.max(1.0)
        }
    }

    fn is_real_positive(&self) -> bool {
        match self.as_rational() {
            Some(r) => r > BigRational::zero(),
            None => {
                let z = self.to_complex64();
                z.im.abs() <= Self::epsilon().max(1e-300) * z.norm().max(1.0) && z.re > 0.0
            }
        }
    }

    fn inv(&self) -> Self {
        Self::one() / self
    }

    /// Integer power, negative exponents allowed for nonzero values.
    fn powi(&self, e: i64) -> Self {
        if e >= 0 {
            self.pow_u(e as u32)
        } else {
            self.inv().pow_u((-e) as u32)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RootError {
    ZeroPolynomial,
    Scalar(ScalarError),
}

impl fmt::Display for RootError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RootError::ZeroPolynomial => write!(f, "the zero polynomial has no root set"),
            RootError::Scalar(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for RootError {}

impl From<ScalarError> for RootError {
    fn from(e: ScalarError) -> Self {
        RootError::Scalar(e)
    }
}

pub(crate) fn rational_literal(r: &BigRational) -> String {
    use num_traits::Signed;
    if r.is_integer() {
        r.numer().to_string()
    } else if r.is_negative() {
        format!("-({}/{})", -r.numer(), r.denom())
    } else {
        format!("({}/{})", r.numer(), r.denom())
    }
}

/// Splits an integer into s²·d with d squarefree (trial division; the
/// integers met here are small).
pub(crate) fn squarefree_split(n: &BigInt) -> (BigInt, BigInt) {
    use num_integer::Integer;
    use num_traits::Signed;
    if n.is_zero() {
        return (BigInt::zero(), BigInt::zero());
    }
    let sign = if n.is_negative() { -BigInt::one() } else { BigInt::one() };
    let mut m = n.abs();
    let mut square = BigInt::one();
    let mut free = BigInt::one();
    let mut p = BigInt::from(2);
    while &p * &p <= m {
        let mut count = 0u32;
        while m.is_multiple_of(&p) {
            m /= &p;
            count += 1;
        }
        for _ in 0..count / 2 {
            square *= &p;
        }
        if count % 2 == 1 {
            free *= &p;
        }
        p += 1;
        if p > BigInt::from(1_000_000) {
            break;
        }
    }
    free *= m;
    (square, sign * free)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squarefree_parts() {
        let (s, d) = squarefree_split(&BigInt::from(-44));
        assert_eq!(s, BigInt::from(2));
        assert_eq!(d, BigInt::from(-11));
        let (s, d) = squarefree_split(&BigInt::from(36));
        assert_eq!(s, BigInt::from(6));
        assert_eq!(d, BigInt::from(1));
    }
}
