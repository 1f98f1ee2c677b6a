use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::rational::exact_int_root;
use super::{rational_literal, squarefree_split, RootError, Ring, Scalar, ScalarError};
use crate::poly::Poly;
use crate::roots::{exact_roots, RootSet};

/// a + b·√d with a, b rational and d a squarefree integer (d ≠ 0, 1).
///
/// When b = 0 the value is rational and d is stored as 0, so a value carries
/// an extension only if it needs one.  For d < 0, √d means i·√|d|.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Quadratic {
    a: BigRational,
    b: BigRational,
    d: i64,
}

fn join(d1: i64, d2: i64) -> i64 {
    if d1 == 0 || d1 == d2 {
        d2
    } else if d2 == 0 {
        d1
    } else {
        panic!("{}", ScalarError::MixedExtension(d1, d2))
    }
}

impl Quadratic {
    pub fn new(a: BigRational, b: BigRational, d: i64) -> Result<Self, ScalarError> {
        if b.is_zero() {
            return Ok(Self::rational(a));
        }
        let (s, free) = squarefree_split(&BigInt::from(d));
        let free = free.to_i64().ok_or(ScalarError::NotRepresentable(format!("sqrt({d})")))?;
        if free == 1 {
            return Ok(Self::rational(a + b * BigRational::from_integer(s)));
        }
        if free == 0 {
            return Ok(Self::rational(a));
        }
        Ok(Quadratic { a, b: b * BigRational::from_integer(s), d: free })
    }

    pub fn rational(a: BigRational) -> Self {
        Quadratic { a, b: BigRational::zero(), d: 0 }
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn irrational_part(&self) -> &BigRational {
        &self.b
    }

    pub fn radicand(&self) -> i64 {
        self.d
    }

    /// The Galois conjugate a − b√d.
    pub fn conjugate(&self) -> Self {
        Quadratic { a: self.a.clone(), b: -self.b.clone(), d: self.d }
    }

    /// Field norm a² − d·b².
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - BigRational::from_integer(BigInt::from(self.d)) * &self.b * &self.b
    }

    fn normalized(a: BigRational, b: BigRational, d: i64) -> Self {
        if b.is_zero() {
            Quadratic { a, b, d: 0 }
        } else {
            Quadratic { a, b, d }
        }
    }

    fn dq(&self, d: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(d))
    }

    fn add_ref(&self, o: &Self) -> Self {
        let d = join(self.d, o.d);
        Self::normalized(&self.a + &o.a, &self.b + &o.b, d)
    }

    fn sub_ref(&self, o: &Self) -> Self {
        let d = join(self.d, o.d);
        Self::normalized(&self.a - &o.a, &self.b - &o.b, d)
    }

    fn mul_ref(&self, o: &Self) -> Self {
        let d = join(self.d, o.d);
        let a = &self.a * &o.a + &self.b * &o.b * self.dq(d);
        let b = &self.a * &o.b + &self.b * &o.a;
        Self::normalized(a, b, d)
    }

    fn div_ref(&self, o: &Self) -> Self {
        let n = o.norm();
        assert!(!n.is_zero(), "division by zero in Quadratic");
        let num = self.mul_ref(&o.conjugate());
        Self::normalized(num.a / &n, num.b / &n, num.d)
    }

    /// Sign of a real element (d ≥ 0).
    fn real_sign(&self) -> Ordering {
        let sa = self.a.cmp(&BigRational::zero());
        let sb = self.b.cmp(&BigRational::zero());
        if sb == Ordering::Equal {
            return sa;
        }
        if sa == Ordering::Equal || sa == sb {
            return sb;
        }
        // a and b√d have opposite signs: compare a² with d·b².
        let lhs = &self.a * &self.a;
        let rhs = self.dq(self.d) * &self.b * &self.b;
        match lhs.cmp(&rhs) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => Ordering::Equal,
        }
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl $tr for Quadratic {
            type Output = Quadratic;
            fn $m(self, o: Quadratic) -> Quadratic {
                self.$f(&o)
            }
        }
        impl<'a> $tr<&'a Quadratic> for Quadratic {
            type Output = Quadratic;
            fn $m(self, o: &'a Quadratic) -> Quadratic {
                self.$f(o)
            }
        }
        impl<'a, 'b> $tr<&'b Quadratic> for &'a Quadratic {
            type Output = Quadratic;
            fn $m(self, o: &'b Quadratic) -> Quadratic {
                self.$f(o)
            }
        }
    };
}

forward_binop!(Add, add, add_ref);
forward_binop!(Sub, sub, sub_ref);
forward_binop!(Mul, mul, mul_ref);
forward_binop!(Div, div, div_ref);

impl Neg for Quadratic {
    type Output = Quadratic;
    fn neg(self) -> Quadratic {
        Quadratic { a: -self.a, b: -self.b, d: self.d }
    }
}

impl Zero for Quadratic {
    fn zero() -> Self {
        Self::rational(BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}

impl One for Quadratic {
    fn one() -> Self {
        Self::rational(BigRational::one())
    }
}

impl From<BigRational> for Quadratic {
    fn from(r: BigRational) -> Self {
        Self::rational(r)
    }
}

impl fmt::Display for Quadratic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.literal())
    }
}

impl Ring for Quadratic {
    fn from_i64(v: i64) -> Self {
        Self::rational(BigRational::from_integer(BigInt::from(v)))
    }

    fn from_bigint(v: &BigInt) -> Self {
        Self::rational(BigRational::from_integer(v.clone()))
    }
}

impl Scalar for Quadratic {
    const EXACT: bool = true;
    const NAME: &'static str = "quadratic";

    fn from_rational(r: &BigRational) -> Self {
        Self::rational(r.clone())
    }

    fn sqrt_int(d: &BigInt) -> Result<Self, ScalarError> {
        let (s, free) = squarefree_split(d);
        let free = free
            .to_i64()
            .ok_or_else(|| ScalarError::NotRepresentable(format!("sqrt({d})")))?;
        if free == 0 {
            return Ok(Self::zero());
        }
        Quadratic::new(BigRational::zero(), BigRational::from_integer(s), free)
    }

    fn imaginary_unit() -> Result<Self, ScalarError> {
        Quadratic::new(BigRational::zero(), BigRational::one(), -1)
    }

    fn principal_root(&self, b: u32) -> Result<Self, ScalarError> {
        if b == 1 || self.is_zero() {
            return Ok(self.clone());
        }
        let fail = || ScalarError::NotRepresentable(format!("({})^(1/{b})", self.literal()));
        if self.d == 0 {
            let r = &self.a;
            if b == 2 {
                // √(p/q) = √(p·q)/q, principal for negative p as well.
                let num = r.numer() * r.denom();
                let root = Self::sqrt_int(&num)?;
                return Ok(root / Self::from_bigint(r.denom()));
            }
            if r.is_positive() {
                if let (Some(p), Some(q)) = (exact_int_root(r.numer(), b), exact_int_root(r.denom(), b)) {
                    return Ok(Self::rational(BigRational::new(p, q)));
                }
            }
            return Err(fail());
        }
        if b != 2 {
            return Err(fail());
        }
        // (x + y√d)² = a + b√d  ⇒  x² = (a ± √N)/2 with N the norm.
        let n = self.norm();
        if n.is_negative() {
            return Err(fail());
        }
        let rt = |r: &BigRational| -> Option<BigRational> {
            if r.is_negative() {
                return None;
            }
            Some(BigRational::new(exact_int_root(r.numer(), 2)?, exact_int_root(r.denom(), 2)?))
        };
        let sn = rt(&n).ok_or_else(fail)?;
        let two = BigRational::from_integer(BigInt::from(2));
        for cand in [(&self.a + &sn) / &two, (&self.a - &sn) / &two] {
            if let Some(x) = rt(&cand) {
                if x.is_zero() {
                    continue;
                }
                let y = &self.b / (&two * &x);
                let w = Quadratic::normalized(x, y, self.d);
                if &(&w * &w) != self {
                    continue;
                }
                let z = w.to_complex64();
                let principal = z.re > 0.0 || (z.re == 0.0 && z.im > 0.0);
                return Ok(if principal { w } else { -w });
            }
        }
        Err(fail())
    }

    fn to_complex64(&self) -> Complex64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        if self.d >= 0 {
            Complex64::new(a + b * (self.d as f64).sqrt(), 0.0)
        } else {
            Complex64::new(a, b * ((-self.d) as f64).sqrt())
        }
    }

    fn canonical_cmp(&self, other: &Self) -> Ordering {
        if self.d != 0 && other.d != 0 && self.d != other.d {
            let (x, y) = (self.to_complex64(), other.to_complex64());
            return x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        }
        let d = join(self.d, other.d);
        if d >= 0 {
            self.sub_ref(other).real_sign()
        } else {
            self.a.cmp(&other.a).then(self.b.cmp(&other.b))
        }
    }

    fn as_rational(&self) -> Option<BigRational> {
        if self.b.is_zero() {
            Some(self.a.clone())
        } else {
            None
        }
    }

    fn literal(&self) -> String {
        if self.b.is_zero() {
            return rational_literal(&self.a);
        }
        let radical = format!("sqrt({})", self.d);
        let irr = if self.b.is_one() {
            radical
        } else if (-self.b.clone()).is_one() {
            format!("-{radical}")
        } else {
            format!("{}*{radical}", rational_literal(&self.b))
        };
        if self.a.is_zero() {
            irr
        } else if irr.starts_with('-') {
            format!("({} {})", rational_literal(&self.a), irr.replacen('-', "- ", 1))
        } else {
            format!("({} + {})", rational_literal(&self.a), irr)
        }
    }

    fn extension(&self) -> i64 {
        self.d
    }

    fn galois_conjugate(&self) -> Self {
        self.conjugate()
    }

    fn roots_in_context(p: &Poly<Self>, context: &[Self]) -> Result<RootSet<Self>, RootError> {
        let mut d = 0i64;
        for c in p.coeffs().iter().chain(context.iter()) {
            if c.d != 0 {
                if d != 0 && d != c.d {
                    return Err(RootError::Scalar(ScalarError::MixedExtension(d, c.d)));
                }
                d = c.d;
            }
        }
        exact_roots(p, d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn sqrt11_arithmetic() {
        let s = Quadratic::sqrt_int(&BigInt::from(11)).unwrap();
        assert_eq!(&s * &s, Quadratic::from_i64(11));
        let x = Quadratic::from_i64(3) + s.clone();
        let y = Quadratic::one() / &x;
        assert_eq!(&x * &y, Quadratic::one());
        assert_eq!(y, Quadratic::new(q(-3, 2), q(1, 2), 11).unwrap());
    }

    #[test]
    fn sqrt_extracts_squares() {
        let s = Quadratic::sqrt_int(&BigInt::from(44)).unwrap();
        assert_eq!(s, Quadratic::new(BigRational::zero(), q(2, 1), 11).unwrap());
        assert_eq!(Quadratic::sqrt_int(&BigInt::from(49)).unwrap(), Quadratic::from_i64(7));
    }

    #[test]
    fn real_ordering() {
        let s = Quadratic::sqrt_int(&BigInt::from(11)).unwrap();
        let a = Quadratic::from_i64(3);
        let b = Quadratic::from_i64(4);
        assert_eq!(a.canonical_cmp(&s), Ordering::Less);
        assert_eq!(b.canonical_cmp(&s), Ordering::Greater);
        assert_eq!((-s.clone()).canonical_cmp(&Quadratic::zero()), Ordering::Less);
    }

    #[test]
    fn principal_square_roots() {
        let four = Quadratic::from_i64(4);
        assert_eq!(four.principal_root(2).unwrap(), Quadratic::from_i64(2));
        let m3 = Quadratic::from_i64(-3);
        let r = m3.principal_root(2).unwrap();
        assert_eq!(&r * &r, m3);
        assert!(r.to_complex64().im > 0.0);
        // (1 + √2)² = 3 + 2√2
        let s2 = Quadratic::sqrt_int(&BigInt::from(2)).unwrap();
        let v = Quadratic::from_i64(3) + Quadratic::from_i64(2) * &s2;
        assert_eq!(v.principal_root(2).unwrap(), Quadratic::one() + s2);
    }

    #[test]
    fn literal_forms() {
        let s = Quadratic::sqrt_int(&BigInt::from(11)).unwrap();
        assert_eq!(s.literal(), "sqrt(11)");
        assert_eq!((-s.clone()).literal(), "-sqrt(11)");
        let v = Quadratic::new(q(1, 2), q(-3, 2), 11).unwrap();
        assert_eq!(v.literal(), "((1/2) - (3/2)*sqrt(11))");
    }
}
