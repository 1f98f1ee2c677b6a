//! Newton–Puiseux expansion of the solutions of P = 0.

use std::fmt;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::analysis::{
    dicritical_test, initial_form, initial_polynomial, step, trace_solution, vanishes, AnalysisError, StepRecord,
};
use crate::equation::{CoveredEquation, EquationError};
use crate::polygon::exponent_text;
use crate::scalar::Scalar;
use crate::series::PuiseuxPoly;
use crate::Exponent;

#[derive(Clone, Debug, PartialEq)]
pub enum SolverError {
    RamificationExceeded { needed: u32, limit: u32 },
    /// An initial polynomial has roots the backend cannot express.
    UnsolvedFactor { mu: Exponent, factor: String },
    Analysis(AnalysisError),
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverError::RamificationExceeded { needed, limit } => {
                write!(f, "ramification {needed} exceeds the limit {limit}")
            }
            SolverError::UnsolvedFactor { mu, factor } => {
                write!(f, "cannot solve {factor} at co-slope {} in this backend", exponent_text(*mu))
            }
            SolverError::Analysis(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for SolverError {}

impl From<AnalysisError> for SolverError {
    fn from(e: AnalysisError) -> Self {
        SolverError::Analysis(e)
    }
}

impl From<EquationError> for SolverError {
    fn from(e: EquationError) -> Self {
        SolverError::Analysis(AnalysisError::Equation(e))
    }
}

/// What to do at a dicritical element.
#[derive(Clone, Debug, PartialEq)]
pub enum DicriticalPolicy<S> {
    /// Record a free parameter; continue only along the special values
    /// (roots of B^k at height 1), where the element shortens.
    Param,
    /// Record the parameter and also continue with C = 1, 2, …, N
    /// (excluded values skipped).
    Sample(u32),
    /// Record the parameter and continue with the given values.
    Values(Vec<S>),
}

#[derive(Clone, Debug)]
pub struct ExpandOptions<S> {
    /// Largest exponent kept in a jet.
    pub max_order: Exponent,
    pub max_ramification: u32,
    pub dicritical: DicriticalPolicy<S>,
    /// Stop after this many jets.
    pub max_jets: usize,
}

impl<S> ExpandOptions<S> {
    pub fn new(max_order: Exponent) -> Self {
        ExpandOptions { max_order, max_ramification: 24, dicritical: DicriticalPolicy::Param, max_jets: 1024 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum JetStatus<S> {
    /// A solution with this prefix exists and continues uniquely.
    CertifiedExtends,
    /// P(x, s) = 0 exactly.
    ExactSolution,
    /// Nothing certified beyond the computed terms.
    JetOnly,
    /// s + C·x^position is a solution jet for every C outside `excluded`.
    DicriticalFreeParameter { position: Exponent, excluded: Vec<S> },
}

#[derive(Clone, Debug)]
pub struct BranchJet<S> {
    pub series: PuiseuxPoly<S>,
    pub certified_order: Exponent,
    pub status: JetStatus<S>,
    pub trace: Vec<StepRecord<S>>,
}

impl<S: Scalar> BranchJet<S> {
    pub fn to_json(&self) -> Value {
        let status = match &self.status {
            JetStatus::CertifiedExtends => json!({"kind": "certified-extends"}),
            JetStatus::ExactSolution => json!({"kind": "exact-solution"}),
            JetStatus::JetOnly => json!({"kind": "jet-only"}),
            JetStatus::DicriticalFreeParameter { position, excluded } => json!({
                "kind": "dicritical-free-parameter",
                "position": exponent_text(*position),
                "excluded": excluded.iter().map(|c| c.literal()).collect::<Vec<_>>(),
            }),
        };
        json!({
            "series": self.series.render(),
            "ramification": self.series.ram(),
            "certified_order": exponent_text(self.certified_order),
            "status": status,
            "trace": self.trace.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
        })
    }
}

/// μ with A_{ιj} + δ_μ·B_{ιj} = 0 at the point, if it is a positive rational
/// (denominator at most `max_den` unless found exactly).
fn resonance<S: Scalar>(p: &CoveredEquation<S>, a: &S, b: &S, max_den: u32) -> Option<Exponent> {
    if b.is_zero() {
        return None;
    }
    let target = -(a.clone() / b);
    let op = p.op();
    if op.is_differential() {
        if let Some(r) = target.as_rational() {
            let num: i64 = r.numer().try_into().ok()?;
            let den: i64 = r.denom().try_into().ok()?;
            return (num > 0).then(|| Exponent::new(num, den));
        }
        let z = target.to_complex64();
        if z.re <= 0.0 || z.im.abs() > 1e-9 * z.re.max(1.0) {
            return None;
        }
        return search_grid(p, &target, z.re, max_den);
    }
    let q = op.q()?.magnitude();
    let t = target.magnitude();
    if t == 0.0 {
        return None;
    }
    let est = t.ln() / q.ln();
    if est <= 0.0 {
        return None;
    }
    search_grid(p, &target, est, max_den)
}

fn search_grid<S: Scalar>(p: &CoveredEquation<S>, target: &S, est: f64, max_den: u32) -> Option<Exponent> {
    for d in 1..=max_den as i64 {
        let k = (est * d as f64).round() as i64;
        if k <= 0 {
            continue;
        }
        let mu = Exponent::new(k, d);
        if *mu.denom() != d {
            continue;
        }
        if let Ok(v) = p.op().delta(mu) {
            if vanishes(&(v - target), target.magnitude()) {
                return Some(mu);
            }
        }
    }
    None
}

/// Co-slopes of sides, and vertex resonances, strictly above `after`.
pub fn candidate_exponents_after<S: Scalar>(
    p: &CoveredEquation<S>,
    after: Exponent,
    max_den: u32,
) -> Vec<Exponent> {
    let poly = match p.newton_polygon() {
        Ok(poly) => poly,
        Err(_) => return Vec::new(),
    };
    let mut out: Vec<Exponent> = poly.sides().iter().map(|s| s.mu).filter(|m| *m > after).collect();
    for &(i, j) in poly.vertices() {
        if j >= 1 {
            if let Some(mu) = resonance(p, &p.coeff_a(i, j), &p.coeff_b(i, j), max_den) {
                if mu > after {
                    out.push(mu);
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

pub fn candidate_exponents<S: Scalar>(p: &CoveredEquation<S>) -> Vec<Exponent> {
    candidate_exponents_after(p, Exponent::zero(), 24)
}

/// Could P_cur have a solution of order > K?  True when y = 0 solves it or
/// some side or resonance lies beyond K.
fn has_tail<S: Scalar>(p: &CoveredEquation<S>, k: Exponent, max_den: u32) -> bool {
    if !p.a().keys().any(|key| key.1 == 0) {
        return true;
    }
    !candidate_exponents_after(p, k, max_den).is_empty()
}

/// Quasi-linear regime after the term at μ_last: E_{P,μ_last} has its bottom
/// at height 1, and the linear coefficient A_p + δ_μ·B_p of the pivot never
/// vanishes for later exponents of the grid.
pub fn quasi_linear<S: Scalar>(p: &CoveredEquation<S>, mu_last: Exponent, grid: u32) -> bool {
    if mu_last.is_zero() {
        return false;
    }
    let e = match p.element(mu_last) {
        Ok(e) => e,
        Err(_) => return false,
    };
    if e.bot != 1 {
        return false;
    }
    let (i, _) = e.bottom_point();
    let a = p.coeff_a(i, 1);
    let b = p.coeff_b(i, 1);
    if b.is_zero() {
        return !a.is_zero();
    }
    let target = -(a.clone() / &b);
    let op = p.op();
    let grid = grid as i64;
    if op.is_differential() {
        return match target.as_rational() {
            Some(r) => {
                let mu_r = BigRational::new((*mu_last.numer()).into(), (*mu_last.denom()).into());
                let on_grid = (&r * BigRational::from_integer(grid.into())).is_integer();
                !(on_grid && r > mu_r)
            }
            None => {
                let z = target.to_complex64();
                let k = (z.re * grid as f64).round() as i64;
                let mu = Exponent::new(k.max(1), grid);
                z.im.abs() > 1e-9 || mu <= mu_last || !vanishes(&(op.delta(mu).unwrap() - &target), target.magnitude())
            }
        };
    }
    // q-dilation: |q^(k/N)| = |target| fixes k; then test that grid point exactly.
    let q = op.q().unwrap().magnitude();
    let t = target.magnitude();
    if t == 0.0 {
        return true;
    }
    let k = (t.ln() / q.ln() * grid as f64).round() as i64;
    let mu = Exponent::new(k, grid);
    if mu <= mu_last {
        return true;
    }
    match op.delta(mu) {
        Ok(v) => !vanishes(&(v - &target), t),
        Err(_) => false,
    }
}

struct State<S> {
    p: CoveredEquation<S>,
    s: PuiseuxPoly<S>,
    mu_last: Exponent,
    trace: Vec<StepRecord<S>>,
}

/// Depth-first enumeration of solution jets up to `opts.max_order`.
pub fn expand<S: Scalar>(p: &CoveredEquation<S>, opts: &ExpandOptions<S>) -> Result<Vec<BranchJet<S>>, SolverError> {
    let mut out = Vec::new();
    let root = State { p: p.clone(), s: PuiseuxPoly::zero(), mu_last: Exponent::zero(), trace: Vec::new() };
    explore(root, opts, &mut out)?;
    Ok(out)
}

fn emit<S: Scalar>(st: &State<S>, opts: &ExpandOptions<S>, out: &mut Vec<BranchJet<S>>) {
    if st.s.is_zero() || out.len() >= opts.max_jets {
        return;
    }
    let exact = !st.p.a().keys().any(|key| key.1 == 0);
    let grid = (st.s.ram() as i64).lcm(&(st.p.ram() as i64)) as u32;
    let (status, certified_order) = if exact {
        (JetStatus::ExactSolution, opts.max_order)
    } else if quasi_linear(&st.p, st.mu_last, grid) {
        (JetStatus::CertifiedExtends, opts.max_order)
    } else {
        (JetStatus::JetOnly, st.mu_last)
    };
    out.push(BranchJet { series: st.s.clone(), certified_order, status, trace: st.trace.clone() });
}

fn explore<S: Scalar>(st: State<S>, opts: &ExpandOptions<S>, out: &mut Vec<BranchJet<S>>) -> Result<(), SolverError> {
    if out.len() >= opts.max_jets {
        return Ok(());
    }
    let max_den = opts.max_ramification;
    let cands: Vec<Exponent> = candidate_exponents_after(&st.p, st.mu_last, max_den)
        .into_iter()
        .filter(|m| *m <= opts.max_order)
        .collect();
    if has_tail(&st.p, opts.max_order, max_den) {
        emit(&st, opts, out);
    }
    for mu in cands {
        let need = (st.s.ram().max(1) as i64).lcm(mu.denom()) as u32;
        if need > opts.max_ramification {
            return Err(SolverError::RamificationExceeded { needed: need, limit: opts.max_ramification });
        }
        let mut values: Vec<S> = Vec::new();
        if dicritical_test(&st.p, mu)?.dicritical {
            let form = initial_form(&st.p, mu)?;
            let b1 = form.rows.get(1).map(|r| r.b.clone()).unwrap_or_else(crate::Poly::zero);
            let mut excluded = vec![S::zero()];
            if !b1.is_zero() {
                if let Ok(rs) = S::roots_in_context(&b1, b1.coeffs()) {
                    excluded.extend(rs.roots.into_iter().map(|(r, _)| r).filter(|r| !r.is_zero()));
                }
            }
            if out.len() < opts.max_jets {
                out.push(BranchJet {
                    series: st.s.clone(),
                    certified_order: st.mu_last,
                    status: JetStatus::DicriticalFreeParameter { position: mu, excluded: excluded.clone() },
                    trace: st.trace.clone(),
                });
            }
            // The special values, where the element shortens, are always followed.
            values.extend(excluded.iter().filter(|c| !c.is_zero()).cloned());
            match &opts.dicritical {
                DicriticalPolicy::Param => {}
                DicriticalPolicy::Sample(n) => {
                    for v in 1..=*n as i64 {
                        let c = S::from_i64(v);
                        if !excluded.contains(&c) {
                            values.push(c);
                        }
                    }
                }
                DicriticalPolicy::Values(vs) => values.extend(vs.iter().filter(|c| !excluded.contains(c)).cloned()),
            }
        } else {
            let phi = initial_polynomial(&st.p, mu)?;
            let rs = S::roots_in_context(&phi, phi.coeffs()).map_err(EquationError::from)?;
            if let Some(f) = &rs.unsolved {
                return Err(SolverError::UnsolvedFactor { mu, factor: f.render("C", |c| c.literal()) });
            }
            values.extend(rs.roots.into_iter().map(|(r, _)| r).filter(|r| !r.is_zero()));
        }
        for c in values {
            let n = need;
            let k = (mu * Exponent::from_integer(n as i64)).to_integer();
            let (rec, next) = step(&st.p, k, n, &c, 1, false, false)?;
            let mut trace = st.trace.clone();
            trace.push(rec);
            let s = st.s.add(&PuiseuxPoly::monomial(c, mu));
            explore(State { p: next, s, mu_last: mu, trace }, opts, out)?;
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub pass: bool,
    /// First k whose coefficient is not a root of Φ.
    pub failing_k: Option<i64>,
    pub steps: usize,
    /// Bot(E_{P_K, K/n}).
    pub final_bottom: Option<u32>,
    /// ord_x P(x, s_K); None when the residual is zero.
    pub residual_order: Option<Exponent>,
    /// Abscissa where L_{K/n} through E_K meets j = 0.
    pub threshold: Option<Exponent>,
}

/// Replays s through K steps and checks that the residual P(x, s_K) lies
/// strictly beyond the line of E_K.
pub fn verify_solution<S: Scalar>(p: &CoveredEquation<S>, s: &PuiseuxPoly<S>, k: i64) -> Result<VerifyReport, SolverError> {
    let s = s.reduce();
    if s.order().is_some_and(|o| !o.is_positive()) {
        return Err(SolverError::Analysis(AnalysisError::BadSeries("the series must have positive order".into())));
    }
    let sk = s.truncate(k);
    let tr = match trace_solution(p, &sk, Some(k)) {
        Ok(t) => t,
        Err(AnalysisError::NotASolution { k, .. }) => {
            return Ok(VerifyReport {
                pass: false,
                failing_k: Some(k),
                steps: (k - 1).max(0) as usize,
                final_bottom: None,
                residual_order: None,
                threshold: None,
            })
        }
        Err(e) => return Err(e.into()),
    };
    let residual = p.residual(&sk)?;
    let residual_order = residual.order();
    let (final_bottom, threshold) = match tr.steps.last() {
        Some(last) => (Some(last.element_after.bot), Some(last.element_after.abscissa_at(0))),
        None => (None, None),
    };
    let pass = match (residual_order, threshold, final_bottom) {
        (None, _, _) => true,
        (Some(o), Some(t), Some(b)) => b >= 1 && o > t,
        _ => false,
    };
    Ok(VerifyReport { pass, failing_k: None, steps: tr.steps.len(), final_bottom, residual_order, threshold })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equation::OperatorSpec;
    use crate::parser::{parse_equation, parse_series};
    use crate::{ex, Quadratic, Rational, Ring};

    const P0: &str = "y^4 + 4*y^3*x + 5*y^2*x^2 + 2*y*x^3 + y*x^4 + 4*x^5 + x^7 \
                      + (-y^3*x - 4*y^2*x^2 - 5*y*x^3 - 2*x^4 + 3*x^5)*y1";

    #[test]
    fn candidates() {
        let p: CoveredEquation<Rational> = parse_equation(
            "y^4 + x^3*y^3 + x*y^2 - x^3*y + x^5 + (x*y^3 - x^2*y)*y1",
            OperatorSpec::differential(),
        )
        .unwrap();
        assert_eq!(candidate_exponents(&p), vec![ex(1, 2), ex(1, 1), ex(2, 1)]);
        let p: CoveredEquation<Rational> = parse_equation("3*y - 2*x*y1", OperatorSpec::differential()).unwrap();
        assert_eq!(candidate_exponents(&p), vec![ex(3, 2)]);
        let p: CoveredEquation<Rational> = parse_equation("y - x", OperatorSpec::differential()).unwrap();
        assert_eq!(candidate_exponents(&p), vec![ex(1, 1)]);
    }

    #[test]
    fn square_root_branches() {
        let p: CoveredEquation<Quadratic> = parse_equation("-3*x^2 + 2*y*y1", OperatorSpec::differential()).unwrap();
        let jets = expand(&p, &ExpandOptions::new(ex(3, 2))).unwrap();
        let series: Vec<String> = jets.iter().map(|j| j.series.render()).collect();
        assert_eq!(series, vec!["-x^(3/2)", "x^(3/2)"]);
        assert!(jets.iter().all(|j| j.status == JetStatus::ExactSolution));
    }

    #[test]
    fn worked_example_jets() {
        let p: CoveredEquation<Quadratic> = parse_equation(P0, OperatorSpec::differential()).unwrap();
        let jets = expand(&p, &ExpandOptions::new(ex(2, 1))).unwrap();
        let target: PuiseuxPoly<Quadratic> = parse_series("-x - sqrt(11)*x^(3/2) - (121/30)*x^2").unwrap();
        let conj: PuiseuxPoly<Quadratic> = parse_series("-x + sqrt(11)*x^(3/2) - (121/30)*x^2").unwrap();
        assert!(jets.iter().any(|j| j.series == target));
        assert!(jets.iter().any(|j| j.series == conj));
        assert!(jets.iter().any(|j| matches!(j.status, JetStatus::DicriticalFreeParameter { .. })));
        for j in &jets {
            for r in &j.trace {
                if !r.dicritical {
                    assert!(r.phi.eval(&r.root).is_zero());
                }
            }
        }
    }

    #[test]
    fn radial_family_is_parametric() {
        let p: CoveredEquation<Rational> = parse_equation("3*y - 2*x*y1", OperatorSpec::differential()).unwrap();
        let jets = expand(&p, &ExpandOptions::new(ex(3, 1))).unwrap();
        assert_eq!(jets.len(), 1);
        assert_eq!(jets[0].status, JetStatus::DicriticalFreeParameter { position: ex(3, 2), excluded: vec![Rational::from_i64(0)] });
        let mut o = ExpandOptions::new(ex(3, 1));
        o.dicritical = DicriticalPolicy::Sample(2);
        let jets = expand(&p, &o).unwrap();
        assert_eq!(jets.len(), 3);
        assert_eq!(jets[1].series.render(), "x^(3/2)");
        assert_eq!(jets[1].status, JetStatus::ExactSolution);
    }

    #[test]
    fn verify_examples() {
        let p: CoveredEquation<Quadratic> = parse_equation(P0, OperatorSpec::differential()).unwrap();
        let s: PuiseuxPoly<Quadratic> = parse_series("-x - sqrt(11)*x^(3/2) - (121/30)*x^2").unwrap();
        let r = verify_solution(&p, &s, 4).unwrap();
        assert!(r.pass, "{r:?}");
        let bad: PuiseuxPoly<Quadratic> = parse_series("-x + 7*x^(3/2) - (121/30)*x^2").unwrap();
        let r = verify_solution(&p, &bad, 4).unwrap();
        assert_eq!((r.pass, r.failing_k), (false, Some(3)));
        let p: CoveredEquation<Rational> = parse_equation("y - x", OperatorSpec::differential()).unwrap();
        let r = verify_solution(&p, &parse_series("x").unwrap(), 1).unwrap();
        assert!(r.pass && r.residual_order.is_none());
    }

    #[test]
    fn certified_quasi_linear() {
        // y' = 1 + y, y(0) = 0: y = x + x²/2 + …
        let p: CoveredEquation<Rational> = parse_equation("-1 - y + y1", OperatorSpec::differential()).unwrap();
        let jets = expand(&p, &ExpandOptions::new(ex(3, 1))).unwrap();
        assert_eq!(jets.len(), 1);
        assert_eq!(jets[0].series.render(), "x + (1/2)*x^2 + (1/6)*x^3");
        assert_eq!(jets[0].status, JetStatus::CertifiedExtends);
    }
}
