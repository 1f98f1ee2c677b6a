//! Lower bounds for H(P), H(P,s) and ν₀ in terms of the characteristic
//! factors of a solution, as executable checks.

use std::collections::BTreeSet;
use std::fmt;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde_json::{json, Value};

use crate::analysis::{initial_polynomial, vanishes, AnalysisError, Trace};
use crate::corpus::{rng_for, Bivariate};
use crate::equation::{CoveredEquation, EquationError, OperatorSpec};
use crate::polygon::{exponent_text, PolygonError};
use crate::poly::Poly;
use crate::roots::aberth;
use crate::scalar::{Cf, Scalar};
use crate::series::{CharacteristicData, PuiseuxPoly};
use crate::Exponent;

/// Default length bound for the search of unreasonable chains.
pub const DEFAULT_SEARCH_LENGTH: usize = 16;

/// Random linear changes tried before giving up on genericity.
pub const GENERICITY_RETRIES: usize = 32;

#[derive(Clone, Debug, PartialEq)]
pub enum BoundsError {
    TraceTooShort { needed: i64, have: usize },
    TraceMismatch(String),
    Polygon(PolygonError),
    Equation(EquationError),
    Analysis(AnalysisError),
    NotPolynomial,
    NotSingular,
    NotInvariant,
    NotCoprime,
    Uncertified(String),
    GenericityNotReached { tries: usize },
}

impl fmt::Display for BoundsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundsError::TraceTooShort { needed, have } => {
                write!(f, "trace has {have} steps but the characteristic data needs {needed}")
            }
            BoundsError::TraceMismatch(m) => write!(f, "trace does not match the series: {m}"),
            BoundsError::Polygon(e) => write!(f, "{e}"),
            BoundsError::Equation(e) => write!(f, "{e}"),
            BoundsError::Analysis(e) => write!(f, "{e}"),
            BoundsError::NotPolynomial => write!(f, "the 1-form needs nonnegative integer exponents"),
            BoundsError::NotSingular => write!(f, "the foliation is not singular at the origin"),
            BoundsError::NotInvariant => write!(f, "the branch is not an integral curve of the 1-form"),
            BoundsError::NotCoprime => write!(f, "could not certify gcd(A, B) = 1"),
            BoundsError::Uncertified(m) => write!(f, "{m}"),
            BoundsError::GenericityNotReached { tries } => {
                write!(f, "no generic linear change found after {tries} tries")
            }
        }
    }
}

impl std::error::Error for BoundsError {}

impl From<PolygonError> for BoundsError {
    fn from(e: PolygonError) -> Self {
        BoundsError::Polygon(e)
    }
}

impl From<EquationError> for BoundsError {
    fn from(e: EquationError) -> Self {
        BoundsError::Equation(e)
    }
}

impl From<AnalysisError> for BoundsError {
    fn from(e: AnalysisError) -> Self {
        BoundsError::Analysis(e)
    }
}

// ============================================================================
// Right hand sides
// ============================================================================

fn prefix(factors: &[u32], j: usize) -> i64 {
    factors.iter().take(j).map(|&r| r as i64).product()
}

/// ∏ r_j − Σ_k (∏_{j≤i_k} r_j − ∏_{j<i_k} r_j), indices 1-based.
pub fn theorem_main_rhs(factors: &[u32], dicritical: &[usize]) -> i64 {
    let g = factors.len();
    let mut v = prefix(factors, g);
    for &i in dicritical {
        assert!(i >= 1 && i <= g, "dicritical index {i} out of range 1..={g}");
        v -= prefix(factors, i) - prefix(factors, i - 1);
    }
    v
}

/// ∏_{j≤g−1} r_j − ∏_{j≤g−2} r_j; the bound is strict.
pub fn corollary_a_rhs(factors: &[u32]) -> i64 {
    let g = factors.len();
    prefix(factors, g.saturating_sub(1)) - if g >= 2 { prefix(factors, g - 2) } else { 1 }
}

/// ∏_{j≤g−1} r_j.
pub fn theorem_reasonable_rhs(factors: &[u32]) -> i64 {
    prefix(factors, factors.len().saturating_sub(1))
}

/// 2^{g−1} ≤ h, i.e. g ≤ 1 + log₂ h, in exact arithmetic.
pub fn genus_bound_holds(genus: usize, h: Exponent) -> bool {
    if genus == 0 {
        return true;
    }
    if genus > 62 {
        return false;
    }
    Exponent::from_integer(1i64 << (genus - 1)) <= h
}

// ============================================================================
// Improper polynomials
// ============================================================================

#[derive(Clone, Debug)]
pub struct ImproperReport {
    pub is_improper: bool,
    pub lower: f64,
    /// max(u₀/u₁, …, u_{m−2}/u_{m−1}, u_{m−1}).
    pub upper: f64,
    pub roots: Vec<Complex64>,
    /// Every root modulus lies in [lower, upper] up to relative 10⁻¹⁰.
    pub within: bool,
}

/// Tests zᵐ + u_{m−1}z^{m−1} + … + u₀ (u given lowest degree first) for
/// impropriety and locates its roots.
pub fn improper_check(u: &[f64]) -> ImproperReport {
    let m = u.len();
    let mut is_improper = u.iter().all(|&c| c > 0.0 && c.is_finite());
    if m > 0 {
        is_improper &= u[m - 1] >= 1.0;
        is_improper &= u.windows(2).all(|w| w[1] <= w[0]);
    }
    let mut upper: f64 = if m > 0 { u[m - 1] } else { 1.0 };
    for w in u.windows(2) {
        upper = upper.max(w[0] / w[1]);
    }
    let prec = 160;
    let mut coeffs: Vec<Cf> = u.iter().map(|&c| Cf::from_c64(Complex64::new(c, 0.0), prec)).collect();
    coeffs.push(Cf::one(prec));
    let roots: Vec<Complex64> = aberth(&coeffs, prec, 400).iter().map(|z| z.to_c64()).collect();
    let tol = 1e-10;
    let within = roots.iter().all(|z| {
        let r = z.norm();
        r >= 1.0 - tol && r <= upper * (1.0 + tol)
    });
    ImproperReport { is_improper, lower: 1.0, upper, roots, within }
}

// ============================================================================
// Reasonableness
// ============================================================================

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Basis {
    Differential,
    PositiveRealRoot,
    Contracting,
    LargeModulus,
    Transcendental,
    Witness,
    SearchExhausted { length: usize },
    RootUnavailable,
}

impl Basis {
    pub fn name(&self) -> String {
        match self {
            Basis::Differential => "differential".into(),
            Basis::PositiveRealRoot => "q and its chosen root are real positive".into(),
            Basis::Contracting => "|q| < 1".into(),
            Basis::LargeModulus => "|q|^(1/n) > max r".into(),
            Basis::Transcendental => "q declared transcendental".into(),
            Basis::Witness => "root of an unreasonable chain polynomial".into(),
            Basis::SearchExhausted { length } => format!("no chain polynomial of length <= {length} vanishes"),
            Basis::RootUnavailable => "q^(1/n) not available in this backend".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Reasonable,
    /// s^m + u_{m−1}s^{m−1} + … + u₀ built from the chain ρ_{k+1}, …, ρ_l̄.
    Unreasonable { rho: Vec<u32>, witness: Vec<u64> },
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReasonablenessVerdict {
    pub verdict: Verdict,
    pub basis: Basis,
}

impl ReasonablenessVerdict {
    pub fn is_reasonable(&self) -> bool {
        self.verdict == Verdict::Reasonable
    }

    pub fn witness_text(&self) -> Option<String> {
        match &self.verdict {
            Verdict::Unreasonable { witness, .. } => {
                let mut c: Vec<BigRational> = witness.iter().map(|&u| BigRational::from_integer(u.into())).collect();
                c.push(BigRational::one());
                Some(Poly::new(c).render("s", crate::scalar::rational_literal))
            }
            _ => None,
        }
    }

    pub fn to_json(&self) -> Value {
        let verdict = match &self.verdict {
            Verdict::Reasonable => "reasonable",
            Verdict::Unreasonable { .. } => "unreasonable",
            Verdict::Unknown => "unknown",
        };
        json!({
            "verdict": verdict,
            "basis": self.basis.name(),
            "witness": self.witness_text(),
        })
    }
}

/// Coefficients u₀..u_{m−1} of the chain polynomial for ρ = (ρ_{k+1}, …, ρ_l̄):
/// u_{m−i} = ρ_{l̄−i+1}⋯ρ_l̄.
pub fn chain_polynomial(rho: &[u32]) -> Vec<u64> {
    let m = rho.len();
    let mut u = vec![0u64; m];
    let mut acc = 1u64;
    for i in 1..=m {
        acc *= rho[m - i] as u64;
        u[m - i] = acc;
    }
    u
}

/// ρ-sequences of length m: an ordered subsequence of the factors placed
/// among 1's.
fn chains(factors: &[u32], m: usize) -> Vec<Vec<u32>> {
    let mut out = BTreeSet::new();
    let mut cur = Vec::with_capacity(m);
    fn go(factors: &[u32], m: usize, cur: &mut Vec<u32>, out: &mut BTreeSet<Vec<u32>>) {
        if cur.len() == m {
            out.insert(cur.clone());
            return;
        }
        cur.push(1);
        go(factors, m, cur, out);
        cur.pop();
        for (i, &r) in factors.iter().enumerate() {
            cur.push(r);
            go(&factors[i + 1..], m, cur, out);
            cur.pop();
        }
    }
    go(factors, m, &mut cur, &mut out);
    out.into_iter().collect()
}

/// Reasonableness of P for solutions with ramification n and the given
/// characteristic factors.  The chain search stops at `length`; "unknown"
/// means no criterion fired and no witness was found.
pub fn reasonableness<S: Scalar>(
    op: &OperatorSpec<S>,
    n: u32,
    factors: &[u32],
    length: usize,
    transcendental: bool,
) -> ReasonablenessVerdict {
    let ok = |basis| ReasonablenessVerdict { verdict: Verdict::Reasonable, basis };
    if op.is_differential() {
        return ok(Basis::Differential);
    }
    if transcendental {
        return ok(Basis::Transcendental);
    }
    let q = op.q().unwrap();
    let s = match op.delta(Exponent::new(1, n.max(1) as i64)) {
        Ok(s) => s,
        Err(_) => return ReasonablenessVerdict { verdict: Verdict::Unknown, basis: Basis::RootUnavailable },
    };
    if q.is_real_positive() && s.is_real_positive() {
        return ok(Basis::PositiveRealRoot);
    }
    let contracting = match q.as_rational() {
        Some(r) => r.abs() < BigRational::one(),
        None => q.magnitude() < 1.0 - 1e-12,
    };
    if contracting {
        return ok(Basis::Contracting);
    }
    let rmax = factors.iter().copied().max().unwrap_or(1) as f64;
    if s.magnitude() > rmax * (1.0 + 1e-12) {
        return ok(Basis::LargeModulus);
    }
    for m in 1..=length {
        for rho in chains(factors, m) {
            let u = chain_polynomial(&rho);
            let mut v = s.pow_u(m as u32);
            let mut scale = s.magnitude().powi(m as i32);
            for (i, &c) in u.iter().enumerate() {
                v = v + s.pow_u(i as u32) * S::from_i64(c as i64);
                scale += c as f64 * s.magnitude().powi(i as i32);
            }
            if vanishes(&v, scale) {
                return ReasonablenessVerdict {
                    verdict: Verdict::Unreasonable { rho, witness: u },
                    basis: Basis::Witness,
                };
            }
        }
    }
    ReasonablenessVerdict { verdict: Verdict::Unknown, basis: Basis::SearchExhausted { length } }
}

// ============================================================================
// Bound report
// ============================================================================

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Ge,
    Gt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inequality {
    pub name: String,
    pub lhs: Exponent,
    pub relation: Relation,
    pub rhs: Exponent,
    pub pass: bool,
}

impl Inequality {
    fn new(name: &str, lhs: Exponent, relation: Relation, rhs: Exponent) -> Self {
        let pass = match relation {
            Relation::Ge => lhs >= rhs,
            Relation::Gt => lhs > rhs,
        };
        Inequality { name: name.into(), lhs, relation, rhs, pass }
    }

    fn ints(name: &str, lhs: i64, relation: Relation, rhs: i64) -> Self {
        Self::new(name, Exponent::from_integer(lhs), relation, Exponent::from_integer(rhs))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "lhs": exponent_text(self.lhs),
            "relation": match self.relation { Relation::Ge => ">=", Relation::Gt => ">" },
            "rhs": exponent_text(self.rhs),
            "pass": self.pass,
        })
    }
}

/// Equality case of Top(E_{P,m/n}) ≥ r₁⋯r_{g−1}, m = n·ord(s).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strictness {
    pub equality: bool,
    pub unique_dicritical: bool,
    pub last_is_simple: bool,
    pub rigid_chain: bool,
}

impl Strictness {
    pub fn pass(&self) -> bool {
        !self.equality || (self.unique_dicritical && self.last_is_simple && self.rigid_chain)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "equality": self.equality,
            "unique_dicritical": self.unique_dicritical,
            "last_top_bot_one": self.last_is_simple,
            "rigid_chain": self.rigid_chain,
            "pass": self.pass(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct BoundReport {
    pub height: u32,
    pub relative_height: u32,
    pub nu0: Exponent,
    pub order: Exponent,
    pub n: u32,
    pub characteristic: CharacteristicData,
    /// 1-based ℓ with E_{e_ℓ−1, e_ℓ/n} dicritical.
    pub dicritical_characteristic: Vec<usize>,
    pub terminally_dicritical: Vec<usize>,
    /// Every k with E_{k−1,k/n} dicritical, characteristic or not.
    pub dicritical_steps: Vec<i64>,
    pub theorem_a_rhs: i64,
    /// The same bound summed over terminally dicritical indices only.
    pub theorem_a_terminal_rhs: i64,
    pub corollary_a_rhs: i64,
    pub theorem_b_rhs: i64,
    pub reasonableness: ReasonablenessVerdict,
    pub checks: Vec<Inequality>,
    pub genus_bound: bool,
    pub strictness: Option<Strictness>,
}

impl BoundReport {
    /// All inequalities, plus the sharp-equality conditions when `strict`.
    pub fn pass(&self, strict: bool) -> bool {
        self.checks.iter().all(|c| c.pass)
            && self.genus_bound
            && (!strict || self.strictness.as_ref().map_or(true, |s| s.pass()))
    }

    pub fn failures(&self) -> Vec<&Inequality> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "H": self.height,
            "H_s": self.relative_height,
            "nu0": exponent_text(self.nu0),
            "order": exponent_text(self.order),
            "n": self.n,
            "characteristic": self.characteristic,
            "dicritical_characteristic": self.dicritical_characteristic,
            "terminally_dicritical": self.terminally_dicritical,
            "dicritical_steps": self.dicritical_steps,
            "rhs": {
                "theorem_a": self.theorem_a_rhs,
                "theorem_a_terminal": self.theorem_a_terminal_rhs,
                "corollary_a": self.corollary_a_rhs,
                "theorem_b": self.theorem_b_rhs,
            },
            "reasonableness": self.reasonableness.to_json(),
            "checks": self.checks.iter().map(Inequality::to_json).collect::<Vec<_>>(),
            "genus_bound": self.genus_bound,
            "strictness": self.strictness.as_ref().map(Strictness::to_json),
        })
    }
}

#[derive(Clone, Debug)]
pub struct BoundOptions {
    pub search_length: usize,
    pub transcendental: bool,
}

impl Default for BoundOptions {
    fn default() -> Self {
        BoundOptions { search_length: DEFAULT_SEARCH_LENGTH, transcendental: false }
    }
}

pub fn bound_report<S: Scalar>(
    p: &CoveredEquation<S>,
    s: &PuiseuxPoly<S>,
    trace: &Trace<S>,
) -> Result<BoundReport, BoundsError> {
    bound_report_with(p, s, trace, &BoundOptions::default())
}

pub fn bound_report_with<S: Scalar>(
    p: &CoveredEquation<S>,
    s: &PuiseuxPoly<S>,
    trace: &Trace<S>,
    opts: &BoundOptions,
) -> Result<BoundReport, BoundsError> {
    let s = s.reduce();
    let order = s.order().ok_or(PolygonError::ZeroSeries)?;
    let n = s.ram().max(1);
    if trace.n != n {
        return Err(BoundsError::TraceMismatch(format!("ramification {} vs {}", trace.n, n)));
    }
    let cd = s.characteristic_data_over(p.ram());
    let k0 = (order * Exponent::from_integer(n as i64)).to_integer();
    let needed = cd.exponents.last().copied().unwrap_or(0).max(k0);
    if (trace.steps.len() as i64) < needed {
        return Err(BoundsError::TraceTooShort { needed, have: trace.steps.len() });
    }
    let at = |k: i64| &trace.steps[(k - 1) as usize];

    let height = p.height()?;
    let relative_height = p.relative_height(&s)?;
    let nu0 = p.nu0()?;
    let factors = cd.factors();
    let g = factors.len();

    let dicritical_characteristic: Vec<usize> =
        (1..=g).filter(|&l| at(cd.exponents[l - 1]).dicritical).collect();
    let terminally_dicritical: Vec<usize> = dicritical_characteristic
        .iter()
        .copied()
        .filter(|&l| l == g || !dicritical_characteristic.contains(&(l + 1)))
        .collect();
    let dicritical_steps: Vec<i64> = trace.steps.iter().filter(|r| r.dicritical).map(|r| r.k).collect();

    let theorem_a_rhs = theorem_main_rhs(&factors, &dicritical_characteristic);
    let theorem_a_terminal_rhs = theorem_main_rhs(&factors, &terminally_dicritical);
    let cor_a = corollary_a_rhs(&factors);
    let thm_b = theorem_reasonable_rhs(&factors);
    let reasonableness = reasonableness(p.op(), n, &factors, opts.search_length, opts.transcendental);

    let h = relative_height as i64;
    let mut checks = vec![
        Inequality::ints("H(P) >= H(P,s)", height as i64, Relation::Ge, h),
        Inequality::ints("H(P,s) >= theorem A", h, Relation::Ge, theorem_a_rhs),
        Inequality::ints("H(P,s) >= theorem A (terminal)", h, Relation::Ge, theorem_a_terminal_rhs),
        Inequality::ints("H(P,s) > corollary A", h, Relation::Gt, cor_a),
    ];
    if reasonableness.is_reasonable() {
        checks.push(Inequality::ints("H(P,s) >= theorem B", h, Relation::Ge, thm_b));
    }
    if order >= Exponent::one() {
        let nu1 = nu0 + Exponent::one();
        let ex = Exponent::from_integer;
        checks.push(Inequality::new("nu0+1 >= H(P,s)", nu1, Relation::Ge, ex(h)));
        checks.push(Inequality::new("nu0+1 >= theorem A", nu1, Relation::Ge, ex(theorem_a_rhs)));
        checks.push(Inequality::new("nu0 >= corollary A", nu0, Relation::Ge, ex(cor_a)));
        if reasonableness.is_reasonable() {
            checks.push(Inequality::new("nu0+1 >= theorem B", nu1, Relation::Ge, ex(thm_b)));
        }
    }
    // Consecutive dicritical characteristic exponents.
    for w in dicritical_characteristic.windows(2) {
        if w[1] == w[0] + 1 {
            let l = w[0];
            let top_l = at(cd.exponents[l - 1]).element_after.top as i64;
            let top_next = at(cd.exponents[l]).element_after.top as i64;
            checks.push(Inequality::ints(
                &format!("Top(E_e{l}) > r{l}*Top(E_e{})", l + 1),
                top_l,
                Relation::Gt,
                factors[l - 1] as i64 * top_next,
            ));
        }
    }

    let mut genus_bound = genus_bound_holds(g, Exponent::from_integer(h));
    if order >= Exponent::one() {
        genus_bound &= genus_bound_holds(g, nu0 + Exponent::one());
    }

    let strictness = if reasonableness.is_reasonable() && g >= 1 {
        let eg = *cd.exponents.last().unwrap();
        let k0 = k0.max(1);
        let after: Vec<i64> = dicritical_steps.iter().copied().filter(|&k| k >= k0).collect();
        let last = &at(eg).element_after;
        let rigid_chain = (k0..eg).all(|j| {
            let e = &at(j).element_after;
            let next = &at(j + 1).element_after;
            e.bot * at(j).rho == e.top && e.bot == next.top
        });
        Some(Strictness {
            equality: h == thm_b,
            unique_dicritical: after == vec![eg],
            last_is_simple: last.top == 1 && last.bot == 1,
            rigid_chain,
        })
    } else {
        None
    };

    Ok(BoundReport {
        height,
        relative_height,
        nu0,
        order,
        n,
        characteristic: cd,
        dicritical_characteristic,
        terminally_dicritical,
        dicritical_steps,
        theorem_a_rhs,
        theorem_a_terminal_rhs,
        corollary_a_rhs: cor_a,
        theorem_b_rhs: thm_b,
        reasonableness,
        checks,
        genus_bound,
        strictness,
    })
}

// ============================================================================
// Foliations
// ============================================================================

#[derive(Clone, Debug)]
pub struct FoliationReport {
    /// x = m₀₀u + m₀₁v, y = m₁₀u + m₁₁v.
    pub matrix: [[i64; 2]; 2],
    pub attempts: usize,
    pub nu0: u32,
    pub nu0_original: u32,
    /// Condition (1) (Φ_{P,1} ≡ 0) rather than (2) (deg Φ_{P,1} = ν + 1).
    pub dicritical_case: bool,
    pub factors: Vec<u32>,
    pub top_at_one: u32,
    pub bound: i64,
    pub pass: bool,
}

impl FoliationReport {
    pub fn to_json(&self) -> Value {
        json!({
            "matrix": self.matrix,
            "attempts": self.attempts,
            "nu0": self.nu0,
            "nu0_original": self.nu0_original,
            "dicritical_case": self.dicritical_case,
            "factors": self.factors,
            "top_at_one": self.top_at_one,
            "bound": self.bound,
            "pass": self.pass,
        })
    }
}

fn int_exponents<S: Scalar>(f: &Bivariate<S>) -> bool {
    f.terms().keys().all(|(e, _)| e.is_integer() && !e.is_negative())
}

fn order_of<S: Scalar>(f: &Bivariate<S>) -> u32 {
    f.order().map_or(u32::MAX, |o| o.to_integer() as u32)
}

/// f(x₀, y) as a polynomial in y, or f(x, y₀) in x when `in_x`.
fn specialize<S: Scalar>(f: &Bivariate<S>, v: i64, in_x: bool) -> Poly<S> {
    let mut c: Vec<S> = Vec::new();
    let v = S::from_i64(v);
    for (&(e, j), a) in f.terms() {
        let e = e.to_integer() as usize;
        let (deg, other) = if in_x { (e, j as i64) } else { (j as usize, e as i64) };
        if c.len() <= deg {
            c.resize(deg + 1, S::zero());
        }
        c[deg] = c[deg].clone() + a.clone() * v.powi(other);
    }
    Poly::new(c)
}

fn leading_coefficient_vanishes<S: Scalar>(f: &Bivariate<S>, v: i64, in_x: bool) -> bool {
    let full = if in_x {
        f.terms().keys().map(|k| k.0.to_integer() as usize).max()
    } else {
        f.terms().keys().map(|k| k.1 as usize).max()
    };
    specialize(f, v, in_x).degree() != full
}

/// gcd(A, B) = 1 certified by specializations: a common factor of positive
/// y-degree survives at any x₀ where the leading y-coefficient of A does not
/// vanish, and likewise with the roles of x and y swapped.
fn certify_coprime<S: Scalar, R: Rng>(a: &Bivariate<S>, b: &Bivariate<S>, rng: &mut R) -> bool {
    let mut ok = [false, false];
    for (slot, in_x) in [(0usize, false), (1, true)] {
        for _ in 0..16 {
            let v: i64 = rng.gen_range(-50..=50);
            if leading_coefficient_vanishes(a, v, in_x) {
                continue;
            }
            let g = specialize(a, v, in_x).gcd(&specialize(b, v, in_x));
            if g.degree() == Some(0) {
                ok[slot] = true;
                break;
            }
        }
    }
    ok[0] && ok[1]
}

/// Characteristic factors of the branch in coordinates where it is not
/// tangent to x = 0.  A branch with ord < 1 is inverted: its first pair
/// (p₁, r₁) becomes (r₁, p₁), and drops out when p₁ = 1.
pub fn generic_factors<S: Scalar>(s: &PuiseuxPoly<S>) -> Vec<u32> {
    let s = s.reduce();
    let cd = s.characteristic_data();
    match s.order() {
        Some(o) if o < Exponent::one() => {
            let p1 = cd.pairs[0].0 as u32;
            let mut out = Vec::new();
            if p1 > 1 {
                out.push(p1);
            }
            out.extend(cd.factors().into_iter().skip(1));
            out
        }
        _ => cd.factors(),
    }
}

/// Checks ν₀(𝓕) ≥ r₁⋯r_{g−1} for ω = A dx + B dy with invariant branch
/// y = s(x), after a random linear change into generic position.
pub fn foliation_bound_check<S: Scalar>(
    a: &Bivariate<S>,
    b: &Bivariate<S>,
    s: &PuiseuxPoly<S>,
    seed: u64,
) -> Result<FoliationReport, BoundsError> {
    if !int_exponents(a) || !int_exponents(b) {
        return Err(BoundsError::NotPolynomial);
    }
    let zero = Exponent::zero();
    if !a.coeff(zero, 0).is_zero() || !b.coeff(zero, 0).is_zero() || a.is_zero() || b.is_zero() {
        return Err(BoundsError::NotSingular);
    }
    let s = s.reduce();
    match s.order() {
        Some(o) if o.is_positive() => {}
        _ => return Err(BoundsError::NotInvariant),
    }
    let p = CoveredEquation::from_raw(OperatorSpec::differential(), a.terms().clone(), b.terms().clone())?;
    let scale: f64 = a.terms().values().chain(b.terms().values()).map(|c| c.magnitude()).sum();
    if p.residual(&s)?.terms().any(|(_, c)| !vanishes(c, scale)) {
        return Err(BoundsError::NotInvariant);
    }
    let mut rng = rng_for(seed, 0);
    if !S::EXACT {
        return Err(BoundsError::Uncertified("gcd(A, B) needs an exact backend".into()));
    }
    if !certify_coprime(a, b, &mut rng) {
        return Err(BoundsError::NotCoprime);
    }

    let factors = generic_factors(&s);
    let bound = theorem_reasonable_rhs(&factors);
    let nu0_original = order_of(a).min(order_of(b));
    let c1 = s.coeff(Exponent::one());
    let tangent_to_y_axis = s.order().unwrap() < Exponent::one();

    for attempt in 1..=GENERICITY_RETRIES {
        let m = loop {
            let m: [[i64; 2]; 2] = [
                [rng.gen_range(-9..=9), rng.gen_range(-9..=9)],
                [rng.gen_range(-9..=9), rng.gen_range(-9..=9)],
            ];
            if m[0][0] * m[1][1] - m[0][1] * m[1][0] != 0 {
                break m;
            }
        };
        // Tangent direction d in the new coordinates: first entry of M⁻¹d.
        let transversal = if tangent_to_y_axis {
            m[0][1] != 0
        } else {
            let v = S::from_i64(m[1][1]) - S::from_i64(m[0][1]) * c1.clone();
            !vanishes(&v, (m[1][1].abs() as f64) + (m[0][1].abs() as f64) * c1.magnitude())
        };
        if !transversal {
            continue;
        }
        let am = a.compose_linear(m);
        let bm = b.compose_linear(m);
        let a2 = am.scale(&S::from_i64(m[0][0])).add(&bm.scale(&S::from_i64(m[1][0])));
        let b2 = am.scale(&S::from_i64(m[0][1])).add(&bm.scale(&S::from_i64(m[1][1])));
        let nu = order_of(&a2).min(order_of(&b2));
        let p2 = CoveredEquation::from_raw(OperatorSpec::differential(), a2.terms().clone(), b2.terms().clone())?;
        let phi = initial_polynomial(&p2, Exponent::one())?;
        let dicritical = phi.is_zero();
        if !dicritical && phi.degree() != Some(nu as usize + 1) {
            continue;
        }
        let top_at_one = p2.element(Exponent::one())?.top;
        return Ok(FoliationReport {
            matrix: m,
            attempts: attempt,
            nu0: nu,
            nu0_original,
            dicritical_case: dicritical,
            factors,
            top_at_one,
            bound,
            pass: nu as i64 >= bound && nu == nu0_original,
        });
    }
    Err(BoundsError::GenericityNotReached { tries: GENERICITY_RETRIES })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::trace_solution;
    use crate::corpus::branch_minimal_polynomial;
    use crate::parser::{parse_equation, parse_series};
    use crate::{ex, Quadratic, Rational};

    fn r(a: i64) -> Rational {
        Rational::from_integer(a.into())
    }

    #[test]
    fn right_hand_sides() {
        assert_eq!(theorem_main_rhs(&[], &[]), 1);
        assert_eq!(theorem_main_rhs(&[3, 2], &[]), 6);
        assert_eq!(theorem_main_rhs(&[3, 2], &[1]), 4);
        assert_eq!(corollary_a_rhs(&[3, 2]), 2);
        assert_eq!(theorem_reasonable_rhs(&[3, 2]), 3);
        assert_eq!(corollary_a_rhs(&[]), 0);
        assert_eq!(theorem_reasonable_rhs(&[]), 1);
        assert_eq!(corollary_a_rhs(&[2, 2, 2]), 2);
        assert_eq!(theorem_reasonable_rhs(&[2, 2, 2]), 4);
    }

    #[test]
    fn genus_log() {
        assert!(genus_bound_holds(1, ex(4, 1)));
        assert!(genus_bound_holds(0, ex(1, 1)));
        assert!(!genus_bound_holds(3, ex(3, 1)));
        assert!(genus_bound_holds(3, ex(4, 1)));
    }

    #[test]
    fn improper_examples() {
        let rep = improper_check(&[1.0, 1.0]);
        assert!(rep.is_improper && rep.within);
        assert_eq!(rep.upper, 1.0);
        for z in &rep.roots {
            assert!((z.norm() - 1.0).abs() < 1e-12);
        }
        let rep = improper_check(&[2.0]);
        assert!(rep.is_improper && rep.within);
        assert!((rep.roots[0] - Complex64::new(-2.0, 0.0)).norm() < 1e-12);
        assert!(!improper_check(&[2.0, 3.0]).is_improper);
    }

    #[test]
    fn chain_polynomials() {
        assert_eq!(chain_polynomial(&[2]), vec![2]);
        assert_eq!(chain_polynomial(&[3, 1, 2]), vec![6, 2, 2]);
        let c = chains(&[2, 3], 2);
        assert!(c.contains(&vec![2, 3]) && c.contains(&vec![1, 3]) && !c.contains(&vec![3, 2]));
    }

    #[test]
    fn reasonableness_examples() {
        let v = reasonableness(&OperatorSpec::q_difference(Rational::new(1.into(), 2.into())).unwrap(), 1, &[2], 16, false);
        assert!(v.is_reasonable());
        let v = reasonableness(&OperatorSpec::q_difference(r(9)).unwrap(), 1, &[2], 16, false);
        assert!(v.is_reasonable());
        let op = OperatorSpec::q_difference(r(4)).unwrap().with_root(2, r(-2)).unwrap();
        let v = reasonableness(&op, 2, &[2], 16, false);
        assert_eq!(v.verdict, Verdict::Unreasonable { rho: vec![2], witness: vec![2] });
        assert_eq!(v.witness_text().unwrap(), "s + 2");
        let v = reasonableness(&OperatorSpec::<Rational>::differential(), 3, &[3], 16, false);
        assert_eq!(v.basis, Basis::Differential);
    }

    #[test]
    fn report_on_worked_example() {
        let op = OperatorSpec::differential();
        let p: CoveredEquation<Quadratic> = parse_equation(
            "y^4 + 4*y^3*x + 5*y^2*x^2 + 2*y*x^3 + y*x^4 + 4*x^5 + x^7 \
             + (-y^3*x - 4*y^2*x^2 - 5*y*x^3 - 2*x^4 + 3*x^5)*y1",
            op,
        )
        .unwrap();
        let s: PuiseuxPoly<Quadratic> = parse_series("-x - sqrt(11)*x^(3/2) - 121/30*x^2").unwrap();
        let t = trace_solution(&p, &s, None).unwrap();
        let rep = bound_report(&p, &s, &t).unwrap();
        assert_eq!((rep.height, rep.relative_height), (4, 4));
        assert_eq!(rep.characteristic.factors(), vec![2]);
        assert!(rep.dicritical_characteristic.is_empty());
        assert_eq!(rep.dicritical_steps, vec![2]);
        assert_eq!((rep.theorem_a_rhs, rep.theorem_b_rhs), (2, 1));
        assert!(rep.pass(true));
    }

    #[test]
    fn sharp_cases() {
        for n in [2i64, 3, 5] {
            let p: CoveredEquation<Rational> =
                parse_equation(&format!("y^{n} - x"), OperatorSpec::differential()).unwrap();
            let s: PuiseuxPoly<Rational> = parse_series(&format!("x^(1/{n})")).unwrap();
            let t = trace_solution(&p, &s, None).unwrap();
            let rep = bound_report(&p, &s, &t).unwrap();
            assert_eq!(rep.relative_height as i64, n);
            assert_eq!(rep.theorem_a_rhs, n);
        }
        let p: CoveredEquation<Rational> = parse_equation("2*y - 3*x*y1", OperatorSpec::differential()).unwrap();
        let s: PuiseuxPoly<Rational> = parse_series("5*x^(2/3)").unwrap();
        let t = trace_solution(&p, &s, None).unwrap();
        let rep = bound_report(&p, &s, &t).unwrap();
        assert_eq!(rep.dicritical_characteristic, vec![1]);
        assert_eq!((rep.relative_height, rep.theorem_a_rhs), (1, 1));
        assert!(rep.pass(false));
    }

    #[test]
    fn foliation_examples() {
        let f: Bivariate<Rational> = Bivariate::y().pow(2).sub(&Bivariate::x().pow(3));
        let s: PuiseuxPoly<Rational> = parse_series("x^(3/2)").unwrap();
        let rep = foliation_bound_check(&f.dx(), &f.dy(), &s, 1).unwrap();
        assert_eq!((rep.nu0, rep.bound), (1, 1));
        assert!(rep.pass);

        let s: PuiseuxPoly<Rational> = parse_series("x^(3/2) + x^(7/4)").unwrap();
        let f = branch_minimal_polynomial(&s);
        let rep = foliation_bound_check(&f.dx(), &f.dy(), &s, 2).unwrap();
        assert_eq!((rep.nu0, rep.bound), (3, 2));
        assert!(rep.pass);

        // n·x dy − m·y dx with branch c·x^(m/n).
        let (m, n) = (2i64, 3i64);
        let a = Bivariate::y().scale(&r(-m));
        let b = Bivariate::x().scale(&r(n));
        let s: PuiseuxPoly<Rational> = parse_series("7*x^(2/3)").unwrap();
        let rep = foliation_bound_check(&a, &b, &s, 3).unwrap();
        assert_eq!((rep.nu0, rep.bound), (1, 1));
        assert_eq!(generic_factors(&s), vec![2]);
        assert!(rep.pass);
    }

    #[test]
    fn foliation_rejects_bad_input() {
        let a: Bivariate<Rational> = Bivariate::constant(r(1));
        let b = Bivariate::x();
        let s: PuiseuxPoly<Rational> = parse_series("x").unwrap();
        assert_eq!(foliation_bound_check(&a, &b, &s, 0).unwrap_err(), BoundsError::NotSingular);
        let f: Bivariate<Rational> = Bivariate::y().pow(2).sub(&Bivariate::x().pow(3));
        let s: PuiseuxPoly<Rational> = parse_series("x^(3/2) + x^2").unwrap();
        assert_eq!(foliation_bound_check(&f.dx(), &f.dy(), &s, 0).unwrap_err(), BoundsError::NotInvariant);
        // Common factor x + y.
        let l = Bivariate::x().add(&Bivariate::y());
        let s: PuiseuxPoly<Rational> = parse_series("x^(3/2)").unwrap();
        assert_eq!(
            foliation_bound_check(&l.mul(&f.dx()), &l.mul(&f.dy()), &s, 0).unwrap_err(),
            BoundsError::NotCoprime
        );
    }
}
