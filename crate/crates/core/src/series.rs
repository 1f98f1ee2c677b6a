//! Finite Puiseux series Σ aᵢ x^(i/n) and their characteristic data.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::equation::{EquationError, OperatorSpec};
use crate::scalar::Scalar;
use crate::Exponent;

/// Σ aᵢ x^(i/n) with finitely many nonzero aᵢ.
///
/// Indices may be negative (the derivative of x^(1/2) is a valid value of
/// this type); solutions handled by the solver have positive order.
#[derive(Clone, Debug)]
pub struct PuiseuxPoly<S> {
    ram: u32,
    coeffs: BTreeMap<i64, S>,
}

/// Characteristic exponents e₁ < … < e_g (as indices over n) and the pairs
/// (pᵢ, rᵢ) with r₁⋯r_{i−1}·eᵢ/n = pᵢ/rᵢ in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CharacteristicData {
    pub n: u32,
    pub genus: usize,
    pub exponents: Vec<i64>,
    pub pairs: Vec<(i64, u32)>,
}

impl CharacteristicData {
    pub fn factors(&self) -> Vec<u32> {
        self.pairs.iter().map(|&(_, r)| r).collect()
    }

    /// ρ_k: the factor rℓ if k = eℓ, otherwise 1.
    pub fn rho(&self, k: i64) -> u32 {
        self.exponents
            .iter()
            .position(|&e| e == k)
            .map(|i| self.pairs[i].1)
            .unwrap_or(1)
    }

    /// 1-based index ℓ with eℓ = k.
    pub fn index_of(&self, k: i64) -> Option<usize> {
        self.exponents.iter().position(|&e| e == k).map(|i| i + 1)
    }

    /// r₁⋯r_j (empty product 1).
    pub fn prefix_product(&self, j: usize) -> u64 {
        self.pairs.iter().take(j).map(|&(_, r)| r as u64).product()
    }
}

impl<S: Scalar> PuiseuxPoly<S> {
    pub fn new(ram: u32, coeffs: BTreeMap<i64, S>) -> Self {
        assert!(ram >= 1, "ramification must be positive");
        let coeffs = coeffs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        PuiseuxPoly { ram, coeffs }
    }

    pub fn zero() -> Self {
        PuiseuxPoly { ram: 1, coeffs: BTreeMap::new() }
    }

    pub fn constant(c: S) -> Self {
        Self::monomial(c, Exponent::zero())
    }

    /// c·x^e
    pub fn monomial(c: S, e: Exponent) -> Self {
        let n = *e.denom() as u32;
        let mut m = BTreeMap::new();
        m.insert(*e.numer(), c);
        Self::new(n, m)
    }

    /// Sum of the given terms; repeated exponents add up.
    pub fn from_terms<I: IntoIterator<Item = (Exponent, S)>>(terms: I) -> Self {
        let terms: Vec<(Exponent, S)> = terms.into_iter().collect();
        let n = terms.iter().fold(1i64, |acc, (e, _)| acc.lcm(e.denom())) as u32;
        let mut m: BTreeMap<i64, S> = BTreeMap::new();
        for (e, c) in terms {
            let idx = *e.numer() * (n as i64 / e.denom());
            let slot = m.entry(idx).or_insert_with(S::zero);
            *slot = slot.clone() + c;
        }
        Self::new(n, m)
    }

    pub fn ram(&self) -> u32 {
        self.ram
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Index map i ↦ aᵢ over the current ramification.
    pub fn indexed(&self) -> &BTreeMap<i64, S> {
        &self.coeffs
    }

    pub fn terms(&self) -> impl Iterator<Item = (Exponent, &S)> + '_ {
        let n = self.ram as i64;
        self.coeffs.iter().map(move |(&i, c)| (Exponent::new(i, n), c))
    }

    pub fn coeff(&self, e: Exponent) -> S {
        let scaled = e * Exponent::from_integer(self.ram as i64);
        if !scaled.is_integer() {
            return S::zero();
        }
        self.coeffs.get(&scaled.to_integer()).cloned().unwrap_or_else(S::zero)
    }

    /// Smallest exponent with a nonzero coefficient; None stands for +∞.
    pub fn order(&self) -> Option<Exponent> {
        self.coeffs.keys().next().map(|&i| Exponent::new(i, self.ram as i64))
    }

    pub fn max_exponent(&self) -> Option<Exponent> {
        self.coeffs.keys().next_back().map(|&i| Exponent::new(i, self.ram as i64))
    }

    /// Σ_{0<i≤k} aᵢ x^(i/n); truncate(0) = 0.
    pub fn truncate(&self, k: i64) -> Self {
        if k < 1 {
            return Self::new(self.ram, BTreeMap::new());
        }
        let m = self.coeffs.range(1..=k).map(|(&i, c)| (i, c.clone())).collect();
        Self::new(self.ram, m)
    }

    /// Terms with exponent ≤ e.
    pub fn truncate_exponent(&self, e: Exponent) -> Self {
        let m = self
            .coeffs
            .iter()
            .filter(|(&i, _)| Exponent::new(i, self.ram as i64) <= e)
            .map(|(&i, c)| (i, c.clone()))
            .collect();
        Self::new(self.ram, m)
    }

    /// Same series over the minimal ramification.
    pub fn reduce(&self) -> Self {
        let mut g = self.ram as i64;
        for &i in self.coeffs.keys() {
            g = g.gcd(&i);
        }
        if self.coeffs.is_empty() {
            g = self.ram as i64;
        }
        let m = self.coeffs.iter().map(|(&i, c)| (i / g, c.clone())).collect();
        PuiseuxPoly { ram: (self.ram as i64 / g) as u32, coeffs: m }
    }

    /// Same series presented over ramification m·n.
    pub fn reramify(&self, m: u32) -> Self {
        let c = self.coeffs.iter().map(|(&i, c)| (i * m as i64, c.clone())).collect();
        PuiseuxPoly { ram: self.ram * m, coeffs: c }
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> PuiseuxPoly<T> {
        PuiseuxPoly::new(self.ram, self.coeffs.iter().map(|(&i, c)| (i, f(c))).collect())
    }

    pub fn scale(&self, s: &S) -> Self {
        self.map(|c| c.clone() * s)
    }

    /// Multiplies by x^e.
    pub fn shift(&self, e: Exponent) -> Self {
        Self::from_terms(self.terms().map(|(x, c)| (x + e, c.clone())))
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::from_terms(self.terms().chain(o.terms()).map(|(e, c)| (e, c.clone())))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-S::one()))
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = (self.ram as i64).lcm(&(o.ram as i64));
        let (fa, fb) = (n / self.ram as i64, n / o.ram as i64);
        let mut m: BTreeMap<i64, S> = BTreeMap::new();
        for (&i, a) in &self.coeffs {
            for (&j, b) in &o.coeffs {
                let slot = m.entry(i * fa + j * fb).or_insert_with(S::zero);
                *slot = slot.clone() + a.clone() * b;
            }
        }
        Self::new(n as u32, m).reduce()
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(S::one());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Term-wise image under σ: x^e ↦ e·x^(e−1) (differential) or
    /// q^e·x^e (q-difference, through the fixed root of q).
    pub fn sigma_apply(&self, op: &OperatorSpec<S>) -> Result<Self, EquationError> {
        let o = Exponent::from_integer(op.order() as i64);
        let mut terms = Vec::with_capacity(self.coeffs.len());
        for (e, c) in self.terms() {
            let d = op.delta(e)?;
            terms.push((e - o, c.clone() * d));
        }
        Ok(Self::from_terms(terms))
    }

    /// Characteristic data of the reduced series.
    pub fn characteristic_data(&self) -> CharacteristicData {
        self.characteristic_data_over(1)
    }

    /// Characteristic data relative to the grid (1/m)ℤ: the recurrence
    /// starts from the lattice of an m-covered equation instead of ℤ.
    /// With m = 1 this is the usual construction.
    pub fn characteristic_data_over(&self, m: u32) -> CharacteristicData {
        let s = self.reduce();
        let n = s.ram as i64;
        let mut d = m as i64;
        let mut exponents = Vec::new();
        let mut pairs = Vec::new();
        for &i in s.coeffs.keys() {
            // D·i/n in lowest terms.
            let v = Exponent::new(d * i, n);
            if !v.is_integer() {
                exponents.push(i);
                pairs.push((*v.numer(), *v.denom() as u32));
                d *= v.denom();
            }
        }
        CharacteristicData { n: s.ram, genus: exponents.len(), exponents, pairs }
    }

    /// Text in the series grammar, e.g. `-x - sqrt(11)*x^(3/2)`.
    pub fn render(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        for (e, c) in self.terms() {
            let mono = if e.is_zero() {
                String::new()
            } else {
                format!("x{}", exponent_suffix(e))
            };
            parts.push(join_term(&c.literal(), &mono));
        }
        join_signed(&parts)
    }
}

impl<S: Scalar> PartialEq for PuiseuxPoly<S> {
    fn eq(&self, o: &Self) -> bool {
        let a: Vec<_> = self.terms().collect();
        let b: Vec<_> = o.terms().collect();
        a.len() == b.len() && a.iter().zip(b.iter()).all(|(x, y)| x.0 == y.0 && x.1 == y.1)
    }
}

impl<S: Scalar> fmt::Display for PuiseuxPoly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

pub(crate) fn exponent_suffix(e: Exponent) -> String {
    if e.is_one() {
        String::new()
    } else if e.is_integer() {
        format!("^{}", e.numer())
    } else {
        format!("^({}/{})", e.numer(), e.denom())
    }
}

/// coefficient literal times monomial text.
pub(crate) fn join_term(lit: &str, mono: &str) -> String {
    if mono.is_empty() {
        lit.to_string()
    } else if lit == "1" {
        mono.to_string()
    } else if lit == "-1" {
        format!("-{mono}")
    } else {
        format!("{lit}*{mono}")
    }
}

pub(crate) fn join_signed(parts: &[String]) -> String {
    if parts.is_empty() {
        return "0".into();
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Ring;
    use crate::{ex, Quadratic, Rational};

    fn r(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn s23() -> PuiseuxPoly<Quadratic> {
        let s11 = Quadratic::sqrt_int(&11.into()).unwrap();
        PuiseuxPoly::from_terms(vec![
            (ex(1, 1), -Quadratic::one()),
            (ex(3, 2), -s11),
            (ex(2, 1), Quadratic::from(Rational::new((-121).into(), 30.into()))),
        ])
    }

    #[test]
    fn order_and_truncation() {
        let s = s23();
        assert_eq!(s.order(), Some(ex(1, 1)));
        assert_eq!(PuiseuxPoly::<Rational>::zero().order(), None);
        assert_eq!(s.truncate(2), PuiseuxPoly::monomial(-Quadratic::one(), ex(1, 1)));
        assert!(s.truncate(0).is_zero());
        assert_eq!(s.truncate(3).len(), 2);
        let t = PuiseuxPoly::from_terms(vec![(ex(4, 6), r(1)), (ex(5, 6), r(1))]);
        assert_eq!(t.order(), Some(ex(2, 3)));
    }

    #[test]
    fn characteristic_data_examples() {
        let c = s23().characteristic_data();
        assert_eq!((c.genus, c.exponents.clone(), c.factors()), (1, vec![3], vec![2]));
        let t = PuiseuxPoly::from_terms(vec![(ex(4, 6), r(1)), (ex(5, 6), r(1))]);
        let c = t.characteristic_data();
        assert_eq!(c.genus, 2);
        assert_eq!(c.exponents, vec![4, 5]);
        assert_eq!(c.pairs, vec![(2, 3), (5, 2)]);
        let x = PuiseuxPoly::monomial(r(1), ex(1, 1));
        assert_eq!(x.characteristic_data().genus, 0);
    }

    #[test]
    fn relative_characteristic_data() {
        // Over the grid (1/2)ℤ the exponent 1/2 is not characteristic.
        let t = PuiseuxPoly::from_terms(vec![(ex(1, 2), r(1)), (ex(3, 4), r(1))]);
        let c = t.characteristic_data_over(2);
        assert_eq!(c.exponents, vec![3]);
        assert_eq!(c.factors(), vec![2]);
    }

    #[test]
    fn reduce_and_reramify() {
        let t = PuiseuxPoly::from_terms(vec![(ex(1, 2), r(3)), (ex(2, 1), r(1))]);
        let u = t.reramify(3);
        assert_eq!(u.ram(), 6);
        assert_eq!(u, t);
        assert_eq!(u.reduce().ram(), 2);
        assert_eq!(u.characteristic_data(), t.characteristic_data());
    }

    #[test]
    fn render_series() {
        assert_eq!(s23().render(), "-x - sqrt(11)*x^(3/2) - (121/30)*x^2");
    }
}
