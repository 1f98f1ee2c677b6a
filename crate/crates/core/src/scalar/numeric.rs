use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::{IBig, Sign};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{RootError, Ring, Scalar, ScalarError};
use crate::poly::Poly;
use crate::roots::{numeric_roots, RootSet};

pub(crate) type F = FBig<HalfEven>;

pub(crate) fn f_int(v: &BigInt, p: usize) -> F {
    let i = IBig::from_le_bytes(&v.to_signed_bytes_le());
    F::from(i).with_precision(p).value()
}

pub(crate) fn f_zero(p: usize) -> F {
    F::ZERO.with_precision(p).value()
}

pub(crate) fn f_f64(v: f64, p: usize) -> F {
    F::try_from(v).unwrap_or(F::ZERO).with_precision(p).value()
}

pub(crate) fn f_abs(x: &F) -> F {
    if x.sign() == Sign::Negative {
        -x.clone()
    } else {
        x.clone()
    }
}

pub(crate) fn f_round(x: &F) -> BigInt {
    let i: IBig = x.round().to_int().value();
    BigInt::from_signed_bytes_le(&i.to_le_bytes())
}

/// Decimal text of x with `digits` digits after the point.
fn f_decimal(x: &F, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), digits);
    let p = x.precision().max(64) + 4 * digits;
    let scaled = x.clone().with_precision(p).value() * f_int(&scale, p);
    let n = f_round(&scaled);
    let neg = n < BigInt::zero();
    let s = if neg { (-n).to_string() } else { n.to_string() };
    let s = format!("{s:0>width$}", width = digits + 1);
    let (int, frac) = s.split_at(s.len() - digits);
    let frac = frac.trim_end_matches('0');
    let body = if frac.is_empty() { int.to_string() } else { format!("{int}.{frac}") };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

/// Complex number with an explicit working precision in bits.
///
/// All operands of one computation must share the precision; results are
/// rounded half-to-even.
#[derive(Clone, Debug)]
pub struct Cf {
    pub re: F,
    pub im: F,
}

impl Cf {
    pub fn zero(p: usize) -> Self {
        Cf { re: f_zero(p), im: f_zero(p) }
    }

    pub fn one(p: usize) -> Self {
        Self::from_i64(1, p)
    }

    pub fn from_i64(v: i64, p: usize) -> Self {
        Cf { re: f_int(&BigInt::from(v), p), im: f_zero(p) }
    }

    pub fn from_bigint(v: &BigInt, p: usize) -> Self {
        Cf { re: f_int(v, p), im: f_zero(p) }
    }

    pub fn from_rational(r: &BigRational, p: usize) -> Self {
        Cf { re: f_int(r.numer(), p) / f_int(r.denom(), p), im: f_zero(p) }
    }

    pub fn from_c64(z: Complex64, p: usize) -> Self {
        Cf { re: f_f64(z.re, p), im: f_f64(z.im, p) }
    }

    pub fn precision(&self) -> usize {
        self.re.precision().max(self.im.precision())
    }

    pub fn with_precision(&self, p: usize) -> Self {
        Cf {
            re: self.re.clone().with_precision(p).value(),
            im: self.im.clone().with_precision(p).value(),
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().value(), self.im.to_f64().value())
    }

    pub fn add(&self, o: &Cf) -> Cf {
        Cf { re: &self.re + &o.re, im: &self.im + &o.im }
    }

    pub fn sub(&self, o: &Cf) -> Cf {
        Cf { re: &self.re - &o.re, im: &self.im - &o.im }
    }

    pub fn mul(&self, o: &Cf) -> Cf {
        Cf {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    pub fn scale(&self, f: &F) -> Cf {
        Cf { re: &self.re * f, im: &self.im * f }
    }

    pub fn div(&self, o: &Cf) -> Cf {
        let n = o.norm_sqr();
        let re = &self.re * &o.re + &self.im * &o.im;
        let im = &self.im * &o.re - &self.re * &o.im;
        Cf { re: re / &n, im: im / &n }
    }

    pub fn neg(&self) -> Cf {
        Cf { re: -self.re.clone(), im: -self.im.clone() }
    }

    pub fn norm_sqr(&self) -> F {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn abs(&self) -> F {
        self.norm_sqr().sqrt()
    }

    /// max(|re|, |im|), cheap magnitude used for zero tests.
    pub fn max_abs(&self) -> F {
        let a = f_abs(&self.re);
        let b = f_abs(&self.im);
        if a >= b {
            a
        } else {
            b
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        self.re == F::ZERO && self.im == F::ZERO
    }

    pub fn powu(&self, mut e: u32) -> Cf {
        let mut base = self.clone();
        let mut acc = Cf::one(self.precision());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Principal b-th root: Newton from the double-precision principal value.
    pub fn principal_root(&self, b: u32) -> Cf {
        let p = self.precision();
        if b == 1 || self.is_exact_zero() {
            return self.clone();
        }
        let z0 = self.to_c64();
        let mut w = Cf::from_c64(z0.powf(1.0 / b as f64), p);
        let bb = Cf::from_i64(b as i64, p);
        let tol = f_f64(2f64.powi(-(p as i32) + 4), p);
        for _ in 0..200 {
            let wb1 = w.powu(b - 1);
            let f = wb1.mul(&w).sub(self);
            let step = f.div(&bb.mul(&wb1));
            w = w.sub(&step);
            if step.max_abs() <= &tol * &w.max_abs() {
                break;
            }
        }
        w
    }

    pub fn cmp_lex(&self, o: &Cf, tol: &F) -> Ordering {
        let dr = &self.re - &o.re;
        if f_abs(&dr) > *tol {
            return if dr.sign() == Sign::Negative { Ordering::Less } else { Ordering::Greater };
        }
        let di = &self.im - &o.im;
        if f_abs(&di) > *tol {
            return if di.sign() == Sign::Negative { Ordering::Less } else { Ordering::Greater };
        }
        Ordering::Equal
    }

    pub fn decimal_literal(&self, digits: usize) -> String {
        let re = f_decimal(&self.re, digits);
        let im = f_decimal(&self.im, digits);
        if im == "0" {
            return re;
        }
        if re == "0" {
            return format!("{im}*i");
        }
        if let Some(stripped) = im.strip_prefix('-') {
            format!("({re} - {stripped}*i)")
        } else {
            format!("({re} + {im}*i)")
        }
    }
}

/// Complex scalar at a fixed working precision of `BITS` bits.
///
/// Zero threshold ε = 2^(−BITS/2): a value whose real and imaginary parts are
/// both below ε is zero.  Equality is relative: |a − b| ≤ ε·max(1, |a|, |b|).
#[derive(Clone, Debug)]
pub struct BigComplex<const BITS: usize>(pub Cf);

impl<const BITS: usize> BigComplex<BITS> {
    pub fn new(re: f64, im: f64) -> Self {
        BigComplex(Cf::from_c64(Complex64::new(re, im), BITS))
    }

    pub fn from_cf(c: Cf) -> Self {
        BigComplex(c.with_precision(BITS))
    }

    pub fn cf(&self) -> &Cf {
        &self.0
    }

    pub fn re(&self) -> f64 {
        self.0.re.to_f64().value()
    }

    pub fn im(&self) -> f64 {
        self.0.im.to_f64().value()
    }

    fn eps_f() -> F {
        f_f64(Self::epsilon(), BITS)
    }
}

macro_rules! forward_cx {
    ($tr:ident, $m:ident) => {
        impl<const BITS: usize> $tr for BigComplex<BITS> {
            type Output = BigComplex<BITS>;
            fn $m(self, o: BigComplex<BITS>) -> BigComplex<BITS> {
                BigComplex(self.0.$m(&o.0))
            }
        }
        impl<'a, const BITS: usize> $tr<&'a BigComplex<BITS>> for BigComplex<BITS> {
            type Output = BigComplex<BITS>;
            fn $m(self, o: &'a BigComplex<BITS>) -> BigComplex<BITS> {
                BigComplex(self.0.$m(&o.0))
            }
        }
        impl<'a, 'b, const BITS: usize> $tr<&'b BigComplex<BITS>> for &'a BigComplex<BITS> {
            type Output = BigComplex<BITS>;
            fn $m(self, o: &'b BigComplex<BITS>) -> BigComplex<BITS> {
                BigComplex(self.0.$m(&o.0))
            }
        }
    };
}

forward_cx!(Add, add);
forward_cx!(Sub, sub);
forward_cx!(Mul, mul);
forward_cx!(Div, div);

impl<const BITS: usize> Neg for BigComplex<BITS> {
    type Output = BigComplex<BITS>;
    fn neg(self) -> Self {
        BigComplex(self.0.neg())
    }
}

impl<const BITS: usize> Zero for BigComplex<BITS> {
    fn zero() -> Self {
        BigComplex(Cf::zero(BITS))
    }
    fn is_zero(&self) -> bool {
        self.0.max_abs() < Self::eps_f()
    }
}

impl<const BITS: usize> One for BigComplex<BITS> {
    fn one() -> Self {
        BigComplex(Cf::one(BITS))
    }
}

impl<const BITS: usize> PartialEq for BigComplex<BITS> {
    fn eq(&self, o: &Self) -> bool {
        let diff = self.0.sub(&o.0).max_abs();
        let one = f_int(&BigInt::one(), BITS);
        let mut scale = self.0.max_abs();
        let other = o.0.max_abs();
        if other > scale {
            scale = other;
        }
        if one > scale {
            scale = one;
        }
        diff <= Self::eps_f() * scale
    }
}

impl<const BITS: usize> fmt::Display for BigComplex<BITS> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.literal())
    }
}

impl<const BITS: usize> Ring for BigComplex<BITS> {
    fn from_i64(v: i64) -> Self {
        BigComplex(Cf::from_i64(v, BITS))
    }

    fn from_bigint(v: &BigInt) -> Self {
        BigComplex(Cf::from_bigint(v, BITS))
    }
}

impl<const BITS: usize> Scalar for BigComplex<BITS> {
    const EXACT: bool = false;
    const NAME: &'static str = "numeric";

    fn from_rational(r: &BigRational) -> Self {
        BigComplex(Cf::from_rational(r, BITS))
    }

    fn sqrt_int(d: &BigInt) -> Result<Self, ScalarError> {
        Ok(BigComplex(Cf::from_bigint(d, BITS).principal_root(2)))
    }

    fn imaginary_unit() -> Result<Self, ScalarError> {
        Ok(BigComplex(Cf { re: f_zero(BITS), im: f_int(&BigInt::one(), BITS) }))
    }

    fn principal_root(&self, b: u32) -> Result<Self, ScalarError> {
        Ok(BigComplex(self.0.principal_root(b)))
    }

    fn to_complex64(&self) -> Complex64 {
        self.0.to_c64()
    }

    fn canonical_cmp(&self, other: &Self) -> Ordering {
        let mut scale = self.0.max_abs();
        let o = other.0.max_abs();
        if o > scale {
            scale = o;
        }
        let one = f_int(&BigInt::one(), BITS);
        if one > scale {
            scale = one;
        }
        self.0.cmp_lex(&other.0, &(Self::eps_f() * scale))
    }

    fn as_rational(&self) -> Option<BigRational> {
        None
    }

    fn literal(&self) -> String {
        // Enough decimal digits to reproduce the value to the working precision.
        let digits = (BITS as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2;
        self.0.decimal_literal(digits)
    }

    fn epsilon() -> f64 {
        2f64.powi(-((BITS / 2) as i32))
    }

    fn magnitude(&self) -> f64 {
        self.0.to_c64().norm()
    }

    fn roots_in_context(p: &Poly<Self>, _context: &[Self]) -> Result<RootSet<Self>, RootError> {
        numeric_roots(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    type C = BigComplex<256>;

    #[test]
    fn field_identities() {
        let a = C::new(3.0, 0.25);
        let b = C::new(-1.5, 2.0);
        let q = &a / &b;
        assert_eq!(&q * &b, a);
        assert!((&a - &a).is_zero());
        assert!(!C::from_i64(1).is_zero());
    }

    #[test]
    fn principal_roots() {
        let m8 = C::from_i64(-8);
        let r = m8.principal_root(3).unwrap();
        assert!((r.re() - 1.0).abs() < 1e-15 && (r.im() - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(r.pow_u(3), m8);
        let two = C::from_i64(2).principal_root(2).unwrap();
        assert_eq!(&two * &two, C::from_i64(2));
    }

    #[test]
    fn literal_round_trip_precision() {
        let third = C::from_i64(1) / C::from_i64(3);
        let lit = third.literal();
        assert!(lit.starts_with("0.3333333333"));
        assert!(lit.len() > 70);
    }

    #[test]
    fn rounding_to_integer() {
        let x = f_f64(-2.4, 128);
        assert_eq!(f_round(&x), BigInt::from(-2));
        let y = f_f64(7.49, 128);
        assert_eq!(f_round(&y), BigInt::from(7));
    }
}
