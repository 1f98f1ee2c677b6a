//! One Newton–Puiseux step: initial polynomial, dicriticalness, the α/β
//! split, the parametric initial form and the top/bottom residues.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde::Serialize;
use serde_json::{json, Value};

use crate::equation::{substitute_terms, CoveredEquation, EquationError, OperatorSpec, Terms};
use crate::polygon::{element, exponent_text, grid_denominator, PolygonError, SupportElement};
use crate::poly::Poly;
use crate::scalar::Scalar;
use crate::series::PuiseuxPoly;
use crate::Exponent;

#[derive(Clone, Debug, PartialEq)]
pub enum AnalysisError {
    Equation(EquationError),
    Polygon(PolygonError),
    /// Φ_{k−1,k/n}(a_k) ≠ 0 for a declared solution coefficient.
    NotASolution { k: i64, value: String },
    BadSeries(String),
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalysisError::Equation(e) => write!(f, "{e}"),
            AnalysisError::Polygon(e) => write!(f, "{e}"),
            AnalysisError::NotASolution { k, value } => {
                write!(f, "not a solution: the initial polynomial at k = {k} does not vanish at {value}")
            }
            AnalysisError::BadSeries(t) => write!(f, "{t}"),
        }
    }
}

impl std::error::Error for AnalysisError {}

impl From<EquationError> for AnalysisError {
    fn from(e: EquationError) -> Self {
        AnalysisError::Equation(e)
    }
}

impl From<PolygonError> for AnalysisError {
    fn from(e: PolygonError) -> Self {
        AnalysisError::Polygon(e)
    }
}

/// A ratio A/B that may be ∗/0 = ∞.
#[derive(Clone, Debug, PartialEq)]
pub enum Residue<S> {
    Finite(S),
    Infinite,
}

impl<S: Scalar> Residue<S> {
    pub fn ratio(a: &S, b: &S) -> Self {
        if b.is_zero() {
            Residue::Infinite
        } else {
            Residue::Finite(a.clone() / b)
        }
    }

    pub fn literal(&self) -> String {
        match self {
            Residue::Finite(v) => v.literal(),
            Residue::Infinite => "inf".into(),
        }
    }

    pub fn finite(&self) -> Option<&S> {
        match self {
            Residue::Finite(v) => Some(v),
            Residue::Infinite => None,
        }
    }
}

pub fn delta<S: Scalar>(op: &OperatorSpec<S>, mu: Exponent) -> Result<S, EquationError> {
    op.delta(mu)
}

/// Largest coefficient modulus of P on the element; the numeric zero scale.
fn element_scale<S: Scalar>(p: &CoveredEquation<S>, e: &SupportElement) -> f64 {
    e.points
        .iter()
        .map(|&(i, j)| p.coeff_a(i, j).magnitude().max(p.coeff_b(i, j).magnitude()))
        .fold(0.0, f64::max)
}

/// Φ_{P,μ}(C) = Σ_E (A_{ιj} + δ_μ B_{ιj}) C^j.
pub fn initial_polynomial<S: Scalar>(p: &CoveredEquation<S>, mu: Exponent) -> Result<Poly<S>, AnalysisError> {
    let e = p.element(mu)?;
    let d = p.op().delta(mu)?;
    let mut coeffs = vec![S::zero(); e.top as usize + 1];
    for &(i, j) in &e.points {
        coeffs[j as usize] = p.coeff_a(i, j) + p.coeff_b(i, j) * &d;
    }
    Ok(Poly::new(coeffs))
}

/// Dicriticalness with its audit margin max|Φᵢ| / max|coefficients on E|.
/// Exact backends decide Φ ≡ 0 exactly and report margin 0 or 1.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DicriticalTest {
    pub dicritical: bool,
    pub margin: f64,
}

pub fn dicritical_test<S: Scalar>(p: &CoveredEquation<S>, mu: Exponent) -> Result<DicriticalTest, AnalysisError> {
    let phi = initial_polynomial(p, mu)?;
    if S::EXACT {
        let z = phi.is_zero();
        return Ok(DicriticalTest { dicritical: z, margin: if z { 0.0 } else { 1.0 } });
    }
    let e = p.element(mu)?;
    let scale = element_scale(p, &e).max(f64::MIN_POSITIVE);
    let big = phi.coeffs().iter().map(|c| c.magnitude()).fold(0.0, f64::max);
    let margin = big / scale;
    Ok(DicriticalTest { dicritical: margin <= S::epsilon() * 64.0, margin })
}

pub fn is_dicritical<S: Scalar>(p: &CoveredEquation<S>, mu: Exponent) -> Result<bool, AnalysisError> {
    Ok(dicritical_test(p, mu)?.dicritical)
}

/// α(C) = Σ_E A_{ιj} C^j and β(C) = Σ_E B_{ιj} C^{j−1}.
pub fn alpha_beta<S: Scalar>(p_prev: &CoveredEquation<S>, mu: Exponent) -> Result<(Poly<S>, Poly<S>), AnalysisError> {
    let e = p_prev.element(mu)?;
    let mut a = vec![S::zero(); e.top as usize + 1];
    let mut b = vec![S::zero(); e.top as usize];
    for &(i, j) in &e.points {
        a[j as usize] = p_prev.coeff_a(i, j);
        if j >= 1 {
            b[j as usize - 1] = p_prev.coeff_b(i, j);
        }
    }
    Ok((Poly::new(a), Poly::new(b)))
}

/// One height of the k-th initial form: the coefficients A^k, B^k at the
/// point (ι_j, j) of L_μ, as polynomials in the substituted coefficient C.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialRow<S> {
    pub j: u32,
    pub iota: Exponent,
    pub a: Poly<S>,
    pub b: Poly<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitialForm<S> {
    pub mu: Exponent,
    pub alpha: Exponent,
    /// Rows for j = 0..=Top(E), in increasing j.
    pub rows: Vec<InitialRow<S>>,
}

/// The k-th initial form of P_{k−1} at co-slope μ = k/n.
///
/// Only points of L_μ feed points of L_μ under y ↦ y + C·x^μ, so the
/// substitution is run on the element alone.
pub fn initial_form<S: Scalar>(p_prev: &CoveredEquation<S>, mu: Exponent) -> Result<InitialForm<S>, AnalysisError> {
    let e = p_prev.element(mu)?;
    let lift = |t: &Terms<S>| -> Terms<Poly<S>> {
        e.points
            .iter()
            .filter_map(|k| t.get(k).map(|v| (*k, Poly::constant(v.clone()))))
            .collect()
    };
    let d = Poly::constant(p_prev.op().delta(mu)?);
    let (a, b) = substitute_terms(&lift(p_prev.a()), &lift(p_prev.b()), &Poly::var(), &d, mu);
    let rows = (0..=e.top)
        .map(|j| {
            let iota = e.abscissa_at(j);
            InitialRow {
                j,
                iota,
                a: a.get(&(iota, j)).cloned().unwrap_or_else(Poly::zero),
                b: b.get(&(iota, j)).cloned().unwrap_or_else(Poly::zero),
            }
        })
        .collect();
    Ok(InitialForm { mu, alpha: e.alpha, rows })
}

/// tres: A/B at the top point of an element; bres: A/B at its bottom point.
pub fn top_residue<S: Scalar>(p: &CoveredEquation<S>, e: &SupportElement) -> Residue<S> {
    let (i, j) = e.top_point();
    Residue::ratio(&p.coeff_a(i, j), &p.coeff_b(i, j))
}

pub fn bottom_residue<S: Scalar>(p: &CoveredEquation<S>, e: &SupportElement) -> Residue<S> {
    let (i, j) = e.bottom_point();
    Residue::ratio(&p.coeff_a(i, j), &p.coeff_b(i, j))
}

/// (tres_k, bres_k) with the top read from P_{k−1} and the bottom from P_k.
pub fn residues<S: Scalar>(
    p_prev: &CoveredEquation<S>,
    p_k: &CoveredEquation<S>,
    mu: Exponent,
) -> Result<(Residue<S>, Residue<S>), AnalysisError> {
    let before = p_prev.element(mu)?;
    let after = p_k.element(mu)?;
    Ok((top_residue(p_prev, &before), bottom_residue(p_k, &after)))
}

/// Minimal r with the cloud of P in (1/r)ℤ × ℤ.
pub fn equation_grid<S: Scalar>(p: &CoveredEquation<S>) -> u32 {
    grid_denominator(&p.cloud_points())
}

/// |v| is zero relative to `scale` in the backend's tolerance.
pub(crate) fn vanishes<S: Scalar>(v: &S, scale: f64) -> bool {
    if S::EXACT {
        v.is_zero()
    } else {
        v.magnitude() <= S::epsilon().sqrt() * scale.max(1.0)
    }
}

/// |Σ cᵢ·aⁱ| bound used as the zero scale for Φ(a).
pub(crate) fn eval_scale<S: Scalar>(p: &Poly<S>, a: &S) -> f64 {
    let r = a.magnitude().max(1.0);
    p.coeffs().iter().enumerate().map(|(i, c)| c.magnitude() * r.powi(i as i32)).sum()
}

/// Multiplicity of a as a root of p, with the numeric zero test.
pub(crate) fn multiplicity<S: Scalar>(p: &Poly<S>, a: &S) -> u32 {
    if p.is_zero() {
        return u32::MAX;
    }
    let mut m = 0;
    loop {
        let h = p.hasse(m as usize);
        if h.is_zero() || !vanishes(&h.eval(a), eval_scale(&h, a)) {
            return m;
        }
        m += 1;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord<S> {
    pub k: i64,
    pub n: u32,
    pub mu: Exponent,
    pub element_before: SupportElement,
    pub phi: Poly<S>,
    pub dicritical: bool,
    pub margin: f64,
    pub root: S,
    /// Multiplicity of a_k in Φ; None when Φ ≡ 0.
    pub multiplicity: Option<u32>,
    pub alpha: Poly<S>,
    pub beta: Poly<S>,
    pub element_after: SupportElement,
    pub rho: u32,
    pub tres: Residue<S>,
    pub bres: Residue<S>,
    pub is_characteristic: bool,
    pub grid_before: u32,
    pub grid_after: u32,
}

fn poly_json<S: Scalar>(p: &Poly<S>) -> Value {
    json!({
        "text": p.render("C", |c| c.literal()),
        "coeffs": p.coeffs().iter().map(|c| c.literal()).collect::<Vec<_>>(),
    })
}

impl<S: Scalar> StepRecord<S> {
    pub fn to_json(&self) -> Value {
        json!({
            "k": self.k,
            "n": self.n,
            "co_slope": exponent_text(self.mu),
            "element_before": self.element_before,
            "phi": poly_json(&self.phi),
            "dicritical": self.dicritical,
            "dicritical_margin": self.margin,
            "root": self.root.literal(),
            "multiplicity": self.multiplicity,
            "alpha": poly_json(&self.alpha),
            "beta": poly_json(&self.beta),
            "element_after": self.element_after,
            "rho": self.rho,
            "tres": self.tres.literal(),
            "bres": self.bres.literal(),
            "is_characteristic": self.is_characteristic,
            "grid_before": self.grid_before,
            "grid_after": self.grid_after,
        })
    }
}

/// Step k with ramification n: substitutes a_k·x^(k/n) into P_{k−1}.
///
/// With `declared`, a_k is a coefficient of a claimed solution and must be a
/// root of Φ unless the element is dicritical.
pub fn step<S: Scalar>(
    p_prev: &CoveredEquation<S>,
    k: i64,
    n: u32,
    a_k: &S,
    rho: u32,
    is_characteristic: bool,
    declared: bool,
) -> Result<(StepRecord<S>, CoveredEquation<S>), AnalysisError> {
    let mu = Exponent::new(k, n as i64);
    let element_before = p_prev.element(mu)?;
    let phi = initial_polynomial(p_prev, mu)?;
    let dt = dicritical_test(p_prev, mu)?;
    let multiplicity = if dt.dicritical { None } else { Some(multiplicity(&phi, a_k)) };
    if declared && multiplicity == Some(0) {
        return Err(AnalysisError::NotASolution { k, value: a_k.literal() });
    }
    let (alpha, beta) = alpha_beta(p_prev, mu)?;
    let p_k = p_prev.substitute(a_k, mu)?;
    let element_after = p_k.element(mu)?;
    let tres = top_residue(p_prev, &element_before);
    let bres = bottom_residue(&p_k, &element_after);
    let rec = StepRecord {
        k,
        n,
        mu,
        grid_before: equation_grid(p_prev),
        grid_after: equation_grid(&p_k),
        element_before,
        phi,
        dicritical: dt.dicritical,
        margin: dt.margin,
        root: a_k.clone(),
        multiplicity,
        alpha,
        beta,
        element_after,
        rho,
        tres,
        bres,
        is_characteristic,
    };
    Ok((rec, p_k))
}

/// The steps of s along P: k = 1..=K with K the last index of s over its
/// ramification n, or `k_max` if larger.
pub struct Trace<S> {
    pub n: u32,
    pub steps: Vec<StepRecord<S>>,
    /// P_0, P_1, …, P_K.
    pub equations: Vec<CoveredEquation<S>>,
}

/// ρ_k is read from the characteristic data of s relative to the grid of P.
pub fn trace_solution<S: Scalar>(
    p: &CoveredEquation<S>,
    s: &PuiseuxPoly<S>,
    k_max: Option<i64>,
) -> Result<Trace<S>, AnalysisError> {
    let s = s.reduce();
    let n = s.ram().max(1);
    match s.order() {
        Some(o) if o > Exponent::zero() => {}
        None => {}
        Some(_) => return Err(AnalysisError::BadSeries("the series must have positive order".into())),
    }
    let cd = s.characteristic_data_over(p.ram());
    let last = s.indexed().keys().next_back().copied().unwrap_or(0);
    let kk = k_max.map_or(last, |m| m.max(0));
    let mut steps = Vec::new();
    let mut equations = vec![p.clone()];
    for k in 1..=kk {
        let a = s.indexed().get(&k).cloned().unwrap_or_else(S::zero);
        let cur = equations.last().unwrap();
        let (rec, next) = step(cur, k, n, &a, cd.rho(k), cd.index_of(k).is_some(), true)?;
        steps.push(rec);
        equations.push(next);
    }
    Ok(Trace { n, steps, equations })
}

/// Points of the cloud on or above height h, with their coefficients:
/// the part of 𝒩(P) that later substitutions leave unchanged.
pub fn coefficients_above<S: Scalar>(p: &CoveredEquation<S>, mu: Exponent, h: u32) -> BTreeMap<(Exponent, u32), (S, S)> {
    let e = element(&p.cloud_points(), mu);
    p.cloud_points()
        .into_iter()
        .filter(|&(i, j)| j >= h && Exponent::from_integer(j as i64) + i / mu == e.alpha)
        .map(|(i, j)| ((i, j), (p.coeff_a(i, j), p.coeff_b(i, j))))
        .collect()
}
