//! Dense univariate polynomials in the parameter C.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::scalar::{Ring, Scalar};

/// Coefficients from degree 0 upward; trailing zeros are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<R> {
    coeffs: Vec<R>,
}

impl<R: Ring> Poly<R> {
    pub fn new(mut coeffs: Vec<R>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn constant(c: R) -> Self {
        Self::new(vec![c])
    }

    /// c·C^k
    pub fn monomial(c: R, k: usize) -> Self {
        let mut v = vec![R::zero(); k];
        v.push(c);
        Self::new(v)
    }

    /// The indeterminate C.
    pub fn var() -> Self {
        Self::monomial(R::one(), 1)
    }

    pub fn coeffs(&self) -> &[R] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> R {
        self.coeffs.get(i).cloned().unwrap_or_else(R::zero)
    }

    /// None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&R> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &R) -> R {
        let mut acc = R::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn scale(&self, s: &R) -> Self {
        Self::new(self.coeffs.iter().map(|c| c.clone() * s).collect())
    }

    pub fn derivative(&self) -> Self {
        self.hasse(1)
    }

    /// p^(j)/j!, the j-th Hasse derivative.
    pub fn hasse(&self, j: usize) -> Self {
        if j == 0 {
            return self.clone();
        }
        let v = self
            .coeffs
            .iter()
            .enumerate()
            .skip(j)
            .map(|(i, c)| c.clone() * R::from_bigint(&binomial(i as u64, j as u64)))
            .collect();
        Self::new(v)
    }

    /// Lowest index with a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// Multiplicity of x as a root, via repeated Hasse derivatives.
    pub fn root_multiplicity(&self, x: &R) -> usize {
        if self.is_zero() {
            return usize::MAX;
        }
        let mut m = 0;
        while self.hasse(m).eval(x).is_zero() {
            m += 1;
        }
        m
    }

    /// Renders with the variable name given, e.g. `-1/2*C^3 + 11/2*C`.
    pub fn render(&self, var: &str, lit: impl Fn(&R) -> String) -> String {
        if self.coeffs.is_empty() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            let l = lit(c);
            let term = if mono.is_empty() {
                l
            } else if l == "1" {
                mono
            } else if l == "-1" {
                format!("-{mono}")
            } else {
                format!("{l}*{mono}")
            };
            parts.push(term);
        }
        let mut out = String::new();
        for (k, t) in parts.iter().enumerate() {
            if k == 0 {
                out.push_str(t);
            } else if let Some(rest) = t.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(t);
            }
        }
        out
    }
}

pub(crate) fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

impl<S: Scalar> Poly<S> {
    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(l) => {
                let inv = S::one() / l;
                self.scale(&inv)
            }
            None => self.clone(),
        }
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("division by the zero polynomial");
        let lead_inv = S::one() / d.leading().unwrap();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![S::zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = rem[i + dd].clone() * &lead_inv;
            if !c.is_zero() {
                for (k, dc) in d.coeffs.iter().enumerate() {
                    rem[i + k] = rem[i + k].clone() - c.clone() * dc;
                }
            }
            rem[i + dd] = S::zero();
            quot[i] = c;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    /// Monic gcd.  Only meaningful for exact backends.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Square-free factorisation (Yun): pairs (factor, multiplicity) with
    /// monic, pairwise coprime, square-free factors.
    pub fn squarefree(&self) -> Vec<(Self, u32)> {
        let f = self.monic();
        if f.degree().unwrap_or(0) == 0 {
            return Vec::new();
        }
        let mut out = Vec::new();
        let fp = f.derivative();
        let a0 = f.gcd(&fp);
        let mut b = f.div_rem(&a0).0;
        let mut c = fp.div_rem(&a0).0;
        let mut d = c - b.derivative();
        let mut i = 1;
        loop {
            let a = b.gcd(&d);
            if a.degree().unwrap_or(0) > 0 {
                out.push((a.clone(), i));
            }
            b = b.div_rem(&a).0;
            if b.degree().unwrap_or(0) == 0 {
                break;
            }
            c = d.div_rem(&a).0;
            d = c - b.derivative();
            i += 1;
        }
        out
    }

    /// Exact (C − r)^m for S exact; product over a multiset of roots.
    pub fn from_roots(roots: &[(S, u32)]) -> Self {
        let mut p = Self::one();
        for (r, m) in roots {
            let lin = Self::new(vec![-r.clone(), S::one()]);
            for _ in 0..*m {
                p = p * &lin;
            }
        }
        p
    }
}

impl<R: Ring> fmt::Display for Poly<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coeffs)
    }
}

impl<R: Ring> Zero for Poly<R> {
    fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl<R: Ring> One for Poly<R> {
    fn one() -> Self {
        Poly { coeffs: vec![R::one()] }
    }
}

fn add_vecs<R: Ring>(a: &[R], b: &[R], sub: bool) -> Vec<R> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_else(R::zero);
            match b.get(i) {
                Some(y) if sub => x - y,
                Some(y) => x + y,
                None => x,
            }
        })
        .collect()
}

fn mul_vecs<R: Ring>(a: &[R], b: &[R]) -> Vec<R> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![R::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].clone() + x.clone() * y;
        }
    }
    out
}

macro_rules! poly_binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl<R: Ring> $tr for Poly<R> {
            type Output = Poly<R>;
            fn $m(self, o: Poly<R>) -> Poly<R> {
                Poly::new($body(&self.coeffs, &o.coeffs))
            }
        }
        impl<'a, R: Ring> $tr<&'a Poly<R>> for Poly<R> {
            type Output = Poly<R>;
            fn $m(self, o: &'a Poly<R>) -> Poly<R> {
                Poly::new($body(&self.coeffs, &o.coeffs))
            }
        }
        impl<'a, 'b, R: Ring> $tr<&'b Poly<R>> for &'a Poly<R> {
            type Output = Poly<R>;
            fn $m(self, o: &'b Poly<R>) -> Poly<R> {
                Poly::new($body(&self.coeffs, &o.coeffs))
            }
        }
    };
}

poly_binop!(Add, add, |a, b| add_vecs(a, b, false));
poly_binop!(Sub, sub, |a, b| add_vecs(a, b, true));
poly_binop!(Mul, mul, mul_vecs);

impl<R: Ring> Neg for Poly<R> {
    type Output = Poly<R>;
    fn neg(self) -> Poly<R> {
        Poly::new(self.coeffs.into_iter().map(|c| -c).collect())
    }
}

impl<R: Ring + 'static> Ring for Poly<R> {
    fn from_i64(v: i64) -> Self {
        Poly::constant(R::from_i64(v))
    }

    fn from_bigint(v: &BigInt) -> Self {
        Poly::constant(R::from_bigint(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn p(v: &[i64]) -> Poly<Rational> {
        Poly::new(v.iter().map(|&x| Rational::from_i64(x)).collect())
    }

    #[test]
    fn arithmetic_and_division() {
        let a = p(&[-1, 0, 1]);
        let b = p(&[1, 1]);
        let (q, r) = a.div_rem(&b);
        assert_eq!(q, p(&[-1, 1]));
        assert!(r.is_zero());
        assert_eq!(a.gcd(&p(&[-1, 1])), p(&[-1, 1]));
    }

    #[test]
    fn hasse_derivatives() {
        let a = p(&[1, 2, 3, 4]);
        assert_eq!(a.hasse(2), p(&[3, 12]));
        assert_eq!(a.hasse(1), p(&[2, 6, 12]));
        assert_eq!(a.hasse(4), Poly::zero());
    }

    #[test]
    fn squarefree_decomposition() {
        // (C-1)^2 (C+2)^3 C
        let f = Poly::from_roots(&[
            (Rational::from_i64(1), 2),
            (Rational::from_i64(-2), 3),
            (Rational::from_i64(0), 1),
        ]);
        let sf = f.squarefree();
        assert_eq!(sf.len(), 3);
        assert_eq!(sf[0], (p(&[0, 1]), 1));
        assert_eq!(sf[1], (p(&[-1, 1]), 2));
        assert_eq!(sf[2], (p(&[2, 1]), 3));
        assert_eq!(f.root_multiplicity(&Rational::from_i64(-2)), 3);
    }

    #[test]
    fn render_text() {
        let a = Poly::new(vec![
            Rational::from_i64(0),
            Rational::new(11.into(), 2.into()),
            Rational::from_i64(0),
            Rational::new((-1).into(), 2.into()),
        ]);
        assert_eq!(a.render("C", |c| crate::Scalar::literal(c)), "-(1/2)*C^3 + (11/2)*C");
    }
}
