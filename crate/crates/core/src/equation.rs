//! Covered equations P = A(x,y) + B(x,y)·y₁ with y₁ = σ(y).
//!
//! B is stored in shifted coordinates: the raw monomial b·x^ι'·y^j'·y₁ sits at
//! (ι' − o_σ, j' + 1), where o_σ is 1 for the derivative and 0 for the
//! q-dilation.  In these coordinates the cloud, the polygon and the initial
//! polynomial read the same way for both operators.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::poly::{binomial, Poly};
use crate::scalar::{RootError, Ring, Scalar, ScalarError};
use crate::series::{exponent_suffix, join_signed, join_term, PuiseuxPoly};
use crate::Exponent;

/// Sparse map (ι, j) ↦ coefficient.
pub type Terms<R> = BTreeMap<(Exponent, u32), R>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    #[serde(rename = "diff")]
    Differential,
    #[serde(rename = "q")]
    QDifference,
}

/// σ together with the data it needs: q and, optionally, a fixed root
/// r = q^(1/N).  Without a fixed root, q^μ is the principal power.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSpec<S> {
    kind: OperatorKind,
    q: Option<S>,
    root: Option<(u32, S)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum EquationError {
    ZeroEquation,
    NegativeExponent(String),
    QOnUnitCircle,
    BadRoot(String),
    Scalar(ScalarError),
    Root(RootError),
}

impl fmt::Display for EquationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquationError::ZeroEquation => write!(f, "the equation is identically zero"),
            EquationError::NegativeExponent(t) => write!(f, "negative x-exponent in {t}"),
            EquationError::QOnUnitCircle => write!(f, "q must satisfy |q| != 1"),
            EquationError::BadRoot(t) => write!(f, "{t}"),
            EquationError::Scalar(e) => write!(f, "{e}"),
            EquationError::Root(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for EquationError {}

impl From<ScalarError> for EquationError {
    fn from(e: ScalarError) -> Self {
        EquationError::Scalar(e)
    }
}

impl From<RootError> for EquationError {
    fn from(e: RootError) -> Self {
        EquationError::Root(e)
    }
}

impl<S: Scalar> OperatorSpec<S> {
    pub fn differential() -> Self {
        OperatorSpec { kind: OperatorKind::Differential, q: None, root: None }
    }

    pub fn q_difference(q: S) -> Result<Self, EquationError> {
        let on_circle = match q.as_rational() {
            Some(r) => r.abs().is_one(),
            None => (q.magnitude() - 1.0).abs() <= S::epsilon().max(1e-12),
        };
        if on_circle || q.is_zero() {
            return Err(EquationError::QOnUnitCircle);
        }
        Ok(OperatorSpec { kind: OperatorKind::QDifference, q: Some(q), root: None })
    }

    /// Fixes r as the N-th root of q used for every q^(k/N).
    pub fn with_root(mut self, n: u32, r: S) -> Result<Self, EquationError> {
        let q = self.q.clone().ok_or_else(|| EquationError::BadRoot("a root of q needs a q-difference operator".into()))?;
        if r.pow_u(n) != q {
            return Err(EquationError::BadRoot(format!("({})^{n} != q", r.literal())));
        }
        self.root = Some((n, r));
        Ok(self)
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn q(&self) -> Option<&S> {
        self.q.as_ref()
    }

    pub fn fixed_root(&self) -> Option<&(u32, S)> {
        self.root.as_ref()
    }

    pub fn is_differential(&self) -> bool {
        self.kind == OperatorKind::Differential
    }

    /// o_σ: 1 for the derivative, 0 for the q-dilation.
    pub fn order(&self) -> u32 {
        match self.kind {
            OperatorKind::Differential => 1,
            OperatorKind::QDifference => 0,
        }
    }

    /// δ_μ: μ for the derivative, q^μ for the q-dilation.
    pub fn delta(&self, mu: Exponent) -> Result<S, EquationError> {
        match self.kind {
            OperatorKind::Differential => Ok(exponent_scalar(mu)),
            OperatorKind::QDifference => {
                let q = self.q.as_ref().unwrap();
                if mu.is_integer() {
                    return Ok(q.powi(mu.to_integer()));
                }
                if let Some((n, r)) = &self.root {
                    let k = mu * Exponent::from_integer(*n as i64);
                    if k.is_integer() {
                        return Ok(r.powi(k.to_integer()));
                    }
                }
                let b = *mu.denom() as u32;
                let base = q.principal_root(b)?;
                Ok(base.powi(*mu.numer()))
            }
        }
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> OperatorSpec<T> {
        OperatorSpec {
            kind: self.kind,
            q: self.q.as_ref().map(&f),
            root: self.root.as_ref().map(|(n, r)| (*n, f(r))),
        }
    }
}

pub(crate) fn exponent_scalar<S: Scalar>(e: Exponent) -> S {
    S::from_rational(&num_rational::BigRational::new((*e.numer()).into(), (*e.denom()).into()))
}

/// A(x,y) + B(x,y)·y₁ with finite support in x^(1/m), y.
#[derive(Clone, Debug)]
pub struct CoveredEquation<S> {
    op: OperatorSpec<S>,
    ram: u32,
    a: Terms<S>,
    b: Terms<S>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct CloudPoint {
    pub iota: (i64, i64),
    pub j: u32,
    pub in_a: bool,
    pub in_b: bool,
}

impl CloudPoint {
    pub fn abscissa(&self) -> Exponent {
        Exponent::new(self.iota.0, self.iota.1)
    }
}

/// Outcome of the A(0,0) = B(0,0) = 0 check.  A violation is only a warning.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoveredReport {
    pub a00_vanishes: bool,
    pub b00_vanishes: bool,
    pub warnings: Vec<String>,
}

impl CoveredReport {
    pub fn is_valid(&self) -> bool {
        self.a00_vanishes && self.b00_vanishes
    }
}

fn clean<R: Ring>(t: Terms<R>) -> Terms<R> {
    t.into_iter().filter(|(_, c)| !c.is_zero()).collect()
}

fn add_into<R: Ring>(t: &mut Terms<R>, key: (Exponent, u32), v: R) {
    if v.is_zero() {
        return;
    }
    match t.get_mut(&key) {
        Some(slot) => *slot = slot.clone() + v,
        None => {
            t.insert(key, v);
        }
    }
}

fn lcm_denoms<'a, I: Iterator<Item = &'a Exponent>>(it: I) -> u32 {
    it.fold(1i64, |acc, e| acc.lcm(e.denom())) as u32
}

/// y ↦ y + c·x^μ, y₁ ↦ y₁ + c·δ·x^(μ−o) on shifted supports, for any ring
/// of coefficients (numbers, or polynomials in a parameter C).
pub(crate) fn substitute_terms<R: Ring + 'static>(
    a: &Terms<R>,
    b: &Terms<R>,
    c: &R,
    delta: &R,
    mu: Exponent,
) -> (Terms<R>, Terms<R>) {
    let maxj = a.keys().chain(b.keys()).map(|k| k.1).max().unwrap_or(0) as usize;
    let mut cpow = vec![R::one()];
    for i in 1..=maxj {
        let next = cpow[i - 1].clone() * c;
        cpow.push(next);
    }
    let binom: Vec<Vec<R>> = (0..=maxj)
        .map(|j| (0..=j).map(|l| R::from_bigint(&binomial(j as u64, l as u64))).collect())
        .collect();
    let mut na: Terms<R> = BTreeMap::new();
    let mut nb: Terms<R> = BTreeMap::new();
    let c_zero = c.is_zero();
    for (&(iota, j), v) in a {
        let j = j as usize;
        for l in 0..=j {
            if c_zero && l != j {
                continue;
            }
            let e = iota + mu * Exponent::from_integer((j - l) as i64);
            add_into(&mut na, (e, l as u32), v.clone() * &binom[j][l] * &cpow[j - l]);
        }
    }
    for (&(iota, j), v) in b {
        let j = j as usize;
        let vd = v.clone() * delta;
        for l in 0..=j {
            if c_zero && l != j {
                continue;
            }
            let e = iota + mu * Exponent::from_integer((j - l) as i64);
            if l < j {
                add_into(&mut na, (e, l as u32), vd.clone() * &binom[j - 1][l] * &cpow[j - l]);
            }
            if l >= 1 {
                add_into(&mut nb, (e, l as u32), v.clone() * &binom[j - 1][l - 1] * &cpow[j - l]);
            }
        }
    }
    (clean(na), clean(nb))
}

impl<S: Scalar> CoveredEquation<S> {
    /// Builds from raw supports: `a_raw` holds A, `b_raw` holds B with its
    /// own exponents (the y₁ factor not counted).
    pub fn from_raw(op: OperatorSpec<S>, a_raw: Terms<S>, b_raw: Terms<S>) -> Result<Self, EquationError> {
        for (&(e, j), _) in a_raw.iter().chain(b_raw.iter()) {
            if e.is_negative() {
                return Err(EquationError::NegativeExponent(format!("x^({e})*y^{j}")));
            }
        }
        let o = Exponent::from_integer(op.order() as i64);
        let b = b_raw.into_iter().map(|((e, j), c)| ((e - o, j + 1), c)).collect();
        Ok(Self::from_shifted(op, clean(a_raw), clean(b)))
    }

    /// Builds from supports already in shifted coordinates.
    pub fn from_shifted(op: OperatorSpec<S>, a: Terms<S>, b: Terms<S>) -> Self {
        let a = clean(a);
        let b = clean(b);
        let ram = lcm_denoms(a.keys().chain(b.keys()).map(|k| &k.0));
        CoveredEquation { op, ram, a, b }
    }

    pub fn op(&self) -> &OperatorSpec<S> {
        &self.op
    }

    pub fn with_op(&self, op: OperatorSpec<S>) -> Self {
        assert_eq!(op.order(), self.op.order(), "operator order must not change");
        CoveredEquation { op, ..self.clone() }
    }

    /// m: all abscissas live in (1/m)ℤ.
    pub fn ram(&self) -> u32 {
        self.ram
    }

    pub fn a(&self) -> &Terms<S> {
        &self.a
    }

    /// B in shifted coordinates.
    pub fn b(&self) -> &Terms<S> {
        &self.b
    }

    /// B with its own exponents.
    pub fn raw_b(&self) -> Terms<S> {
        let o = Exponent::from_integer(self.op.order() as i64);
        self.b.iter().map(|(&(e, j), c)| ((e + o, j - 1), c.clone())).collect()
    }

    pub fn coeff_a(&self, iota: Exponent, j: u32) -> S {
        self.a.get(&(iota, j)).cloned().unwrap_or_else(S::zero)
    }

    pub fn coeff_b(&self, iota: Exponent, j: u32) -> S {
        self.b.get(&(iota, j)).cloned().unwrap_or_else(S::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_empty() && self.b.is_empty()
    }

    /// supp(A) ∪ supp(B) in shifted coordinates, sorted by (ι, j).
    pub fn cloud(&self) -> Vec<CloudPoint> {
        let keys: BTreeSet<(Exponent, u32)> = self.a.keys().chain(self.b.keys()).cloned().collect();
        keys.into_iter()
            .map(|(e, j)| CloudPoint {
                iota: (*e.numer(), *e.denom()),
                j,
                in_a: self.a.contains_key(&(e, j)),
                in_b: self.b.contains_key(&(e, j)),
            })
            .collect()
    }

    pub fn cloud_points(&self) -> Vec<(Exponent, u32)> {
        let keys: BTreeSet<(Exponent, u32)> = self.a.keys().chain(self.b.keys()).cloned().collect();
        keys.into_iter().collect()
    }

    /// ν₀: least total degree over the raw supports of A and B.
    pub fn nu0(&self) -> Result<Exponent, EquationError> {
        let o = Exponent::from_integer(self.op.order() as i64);
        let fa = self.a.keys().map(|&(e, j)| e + Exponent::from_integer(j as i64));
        let fb = self.b.keys().map(|&(e, j)| e + o + Exponent::from_integer(j as i64 - 1));
        fa.chain(fb).min().ok_or(EquationError::ZeroEquation)
    }

    pub fn validate(&self) -> CoveredReport {
        let o = Exponent::from_integer(self.op.order() as i64);
        let a00 = self.coeff_a(Exponent::zero(), 0);
        let b00 = self.coeff_b(-o, 1);
        let mut warnings = Vec::new();
        if !a00.is_zero() {
            warnings.push(format!("A(0,0) = {} != 0", a00.literal()));
        }
        if !b00.is_zero() {
            warnings.push(format!("B(0,0) = {} != 0", b00.literal()));
        }
        CoveredReport { a00_vanishes: a00.is_zero(), b00_vanishes: b00.is_zero(), warnings }
    }

    /// P(x, y + c·x^μ, y₁ + σ(c·x^μ)).
    pub fn substitute(&self, c: &S, mu: Exponent) -> Result<Self, EquationError> {
        if c.is_zero() {
            return Ok(self.clone());
        }
        let delta = self.op.delta(mu)?;
        let (a, b) = substitute_terms(&self.a, &self.b, c, &delta, mu);
        let mut out = Self::from_shifted(self.op.clone(), a, b);
        out.ram = (self.ram as i64).lcm(mu.denom()) as u32;
        Ok(out)
    }

    /// The k-th substitution with ramification n: μ = k/n.
    pub fn substitute_kn(&self, c: &S, k: i64, n: u32) -> Result<Self, EquationError> {
        self.substitute(c, Exponent::new(k, n as i64))
    }

    /// Same substitution with a formal parameter C in place of c.
    pub fn substitute_parametric(&self, mu: Exponent) -> Result<ParametricEquation<S>, EquationError> {
        let delta = Poly::constant(self.op.delta(mu)?);
        let lift = |t: &Terms<S>| -> Terms<Poly<S>> {
            t.iter().map(|(k, v)| (*k, Poly::constant(v.clone()))).collect()
        };
        let (a, b) = substitute_terms(&lift(&self.a), &lift(&self.b), &Poly::var(), &delta, mu);
        Ok(ParametricEquation { a, b, ram: (self.ram as i64).lcm(mu.denom()) as u32 })
    }

    /// A(x, s) + B(x, s)·σ(s).
    pub fn residual(&self, s: &PuiseuxPoly<S>) -> Result<PuiseuxPoly<S>, EquationError> {
        let sig = s.sigma_apply(&self.op)?;
        let maxj = self.a.keys().chain(self.b.keys()).map(|k| k.1).max().unwrap_or(0);
        let mut pows = vec![PuiseuxPoly::constant(S::one())];
        for i in 1..=maxj as usize {
            let next = pows[i - 1].mul(s);
            pows.push(next);
        }
        let mut terms: Vec<(Exponent, S)> = Vec::new();
        for (&(e, j), c) in &self.a {
            for (x, v) in pows[j as usize].terms() {
                terms.push((x + e, v.clone() * c));
            }
        }
        let mut bsum: Vec<(Exponent, S)> = Vec::new();
        for (&(e, j), c) in &self.raw_b() {
            for (x, v) in pows[j as usize].terms() {
                bsum.push((x + e, v.clone() * c));
            }
        }
        let bpart = PuiseuxPoly::from_terms(bsum).mul(&sig);
        Ok(PuiseuxPoly::from_terms(terms).add(&bpart).reduce())
    }

    pub fn map<T: Scalar>(&self, op: OperatorSpec<T>, f: impl Fn(&S) -> T) -> CoveredEquation<T> {
        assert_eq!(op.order(), self.op.order());
        let a = self.a.iter().map(|(k, v)| (*k, f(v))).collect();
        let b = self.b.iter().map(|(k, v)| (*k, f(v))).collect();
        let mut out = CoveredEquation::from_shifted(op, a, b);
        out.ram = self.ram;
        out
    }

    /// Text in the equation grammar; parses back to the same equation.
    pub fn render(&self) -> String {
        let mono = |e: Exponent, j: u32| -> String {
            let mut parts = Vec::new();
            if !e.is_zero() {
                parts.push(format!("x{}", exponent_suffix(e)));
            }
            if j == 1 {
                parts.push("y".to_string());
            } else if j > 1 {
                parts.push(format!("y^{j}"));
            }
            parts.join("*")
        };
        let mut parts: Vec<String> = self
            .a
            .iter()
            .rev()
            .map(|(&(e, j), c)| join_term(&c.literal(), &mono(e, j)))
            .collect();
        let braw = self.raw_b();
        if !braw.is_empty() {
            let inner: Vec<String> =
                braw.iter().rev().map(|(&(e, j), c)| join_term(&c.literal(), &mono(e, j))).collect();
            if braw.len() == 1 {
                let (&(e, j), c) = braw.iter().next().unwrap();
                let m = mono(e, j);
                let m = if m.is_empty() { "y1".to_string() } else { format!("{m}*y1") };
                parts.push(join_term(&c.literal(), &m));
            } else {
                parts.push(format!("({})*y1", join_signed(&inner)));
            }
        }
        join_signed(&parts)
    }
}

impl<S: Scalar> PartialEq for CoveredEquation<S> {
    fn eq(&self, o: &Self) -> bool {
        self.op.kind == o.op.kind && self.a == o.a && self.b == o.b
    }
}

/// An equation whose coefficients are polynomials in a parameter C.
#[derive(Clone, Debug, PartialEq)]
pub struct ParametricEquation<S> {
    pub a: Terms<Poly<S>>,
    pub b: Terms<Poly<S>>,
    pub ram: u32,
}

impl<S: Scalar> ParametricEquation<S> {
    pub fn coeff_a(&self, iota: Exponent, j: u32) -> Poly<S> {
        self.a.get(&(iota, j)).cloned().unwrap_or_else(Poly::zero)
    }

    pub fn coeff_b(&self, iota: Exponent, j: u32) -> Poly<S> {
        self.b.get(&(iota, j)).cloned().unwrap_or_else(Poly::zero)
    }

    /// Specialises C to a value.
    pub fn evaluate(&self, op: OperatorSpec<S>, c: &S) -> CoveredEquation<S> {
        let a = self.a.iter().map(|(k, p)| (*k, p.eval(c))).collect();
        let b = self.b.iter().map(|(k, p)| (*k, p.eval(c))).collect();
        let mut out = CoveredEquation::from_shifted(op, a, b);
        out.ram = self.ram;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{ex, Rational};

    fn r(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn terms(v: &[(i64, i64, u32, i64)]) -> Terms<Rational> {
        v.iter().map(|&(a, b, j, c)| ((ex(a, b), j), r(c))).collect()
    }

    #[test]
    fn shift_and_cloud() {
        // −3x² + 2y·y₁
        let p = CoveredEquation::from_raw(
            OperatorSpec::differential(),
            terms(&[(2, 1, 0, -3)]),
            terms(&[(0, 1, 1, 2)]),
        )
        .unwrap();
        assert_eq!(p.cloud_points(), vec![(ex(-1, 1), 2), (ex(2, 1), 0)]);
        assert_eq!(p.nu0().unwrap(), ex(1, 1));
        assert_eq!(p.raw_b(), terms(&[(0, 1, 1, 2)]));
    }

    #[test]
    fn substitution_group_action() {
        let p = CoveredEquation::from_raw(
            OperatorSpec::differential(),
            terms(&[(2, 1, 0, -3), (1, 1, 2, 5)]),
            terms(&[(0, 1, 1, 2), (1, 1, 0, 1)]),
        )
        .unwrap();
        let mu = ex(3, 2);
        let a = p.substitute(&r(2), mu).unwrap().substitute(&r(-5), mu).unwrap();
        let b = p.substitute(&r(-3), mu).unwrap();
        assert_eq!(a, b);
        assert_eq!(p.substitute(&r(0), mu).unwrap(), p);
    }

    #[test]
    fn parametric_matches_numeric() {
        let p = CoveredEquation::from_raw(
            OperatorSpec::differential(),
            terms(&[(2, 1, 0, -3), (1, 1, 2, 5)]),
            terms(&[(0, 1, 1, 2), (1, 1, 0, 1)]),
        )
        .unwrap();
        let mu = ex(1, 2);
        let par = p.substitute_parametric(mu).unwrap();
        for c in [-2, 0, 3] {
            assert_eq!(par.evaluate(p.op().clone(), &r(c)), p.substitute(&r(c), mu).unwrap());
        }
    }

    #[test]
    fn delta_values() {
        let d: OperatorSpec<Rational> = OperatorSpec::differential();
        assert_eq!(d.delta(ex(3, 2)).unwrap(), Rational::new(3.into(), 2.into()));
        let q = OperatorSpec::q_difference(r(4)).unwrap();
        assert_eq!(q.delta(ex(1, 1)).unwrap(), r(4));
        assert_eq!(q.delta(ex(1, 2)).unwrap(), r(2));
        assert!(OperatorSpec::q_difference(r(-1)).is_err());
    }

    #[test]
    fn residual_of_exact_solution() {
        // −3x² + 2y·y₁ with y = x^(3/2)
        let p = CoveredEquation::from_raw(
            OperatorSpec::differential(),
            terms(&[(2, 1, 0, -3)]),
            terms(&[(0, 1, 1, 2)]),
        )
        .unwrap();
        let s = PuiseuxPoly::monomial(r(1), ex(3, 2));
        assert!(p.residual(&s).unwrap().is_zero());
    }
}
