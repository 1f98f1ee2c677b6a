use std::cmp::Ordering;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{rational_literal, squarefree_split, RootError, Ring, Scalar, ScalarError};
use crate::poly::Poly;
use crate::roots::{exact_roots, RootSet};

impl Ring for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_bigint(v: &BigInt) -> Self {
        BigRational::from_integer(v.clone())
    }
}

/// Exact integer b-th root of a nonnegative integer, if it exists.
pub(crate) fn exact_int_root(n: &BigInt, b: u32) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.nth_root(b);
    if num_traits::pow(r.clone(), b as usize) == *n {
        Some(r)
    } else {
        None
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;
    const NAME: &'static str = "rational";

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn sqrt_int(d: &BigInt) -> Result<Self, ScalarError> {
        let (s, free) = squarefree_split(d);
        if free.is_one() || free.is_zero() {
            Ok(BigRational::from_integer(s))
        } else {
            Err(ScalarError::NotRepresentable(format!("sqrt({d})")))
        }
    }

    fn imaginary_unit() -> Result<Self, ScalarError> {
        Err(ScalarError::NotRepresentable("i".into()))
    }

    fn principal_root(&self, b: u32) -> Result<Self, ScalarError> {
        if b == 1 || self.is_zero() {
            return Ok(self.clone());
        }
        let fail = || ScalarError::NotRepresentable(format!("({})^(1/{b})", self.literal()));
        if self.is_negative() {
            return Err(fail());
        }
        let num = exact_int_root(self.numer(), b).ok_or_else(fail)?;
        let den = exact_int_root(self.denom(), b).ok_or_else(fail)?;
        Ok(BigRational::new(num, den))
    }

    fn to_complex64(&self) -> Complex64 {
        Complex64::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }

    fn as_rational(&self) -> Option<BigRational> {
        Some(self.clone())
    }

    fn literal(&self) -> String {
        rational_literal(self)
    }

    fn roots_in_context(p: &Poly<Self>, _context: &[Self]) -> Result<RootSet<Self>, RootError> {
        exact_roots(p, 0)
    }
}
