//! Equations with planted Puiseux solutions, for tests and acceptance runs.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::equation::{CoveredEquation, EquationError, OperatorSpec, Terms};
use crate::scalar::Scalar;
use crate::series::{exponent_suffix, join_signed, join_term, CharacteristicData, PuiseuxPoly};
use crate::Exponent;

#[derive(Clone, Debug, PartialEq)]
pub enum CorpusError {
    Unsatisfiable(String),
    Equation(EquationError),
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusError::Unsatisfiable(t) => write!(f, "unsatisfiable specification: {t}"),
            CorpusError::Equation(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CorpusError {}

impl From<EquationError> for CorpusError {
    fn from(e: EquationError) -> Self {
        CorpusError::Equation(e)
    }
}

/// Polynomial in x (rational exponents) and y.
#[derive(Clone, Debug, PartialEq)]
pub struct Bivariate<S> {
    terms: Terms<S>,
}

impl<S: Scalar> Bivariate<S> {
    pub fn new(terms: Terms<S>) -> Self {
        Bivariate { terms: terms.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn zero() -> Self {
        Bivariate { terms: BTreeMap::new() }
    }

    pub fn monomial(c: S, e: Exponent, j: u32) -> Self {
        let mut t = BTreeMap::new();
        t.insert((e, j), c);
        Self::new(t)
    }

    pub fn y() -> Self {
        Self::monomial(S::one(), Exponent::zero(), 1)
    }

    pub fn x() -> Self {
        Self::monomial(S::one(), Exponent::one(), 0)
    }

    pub fn constant(c: S) -> Self {
        Self::monomial(c, Exponent::zero(), 0)
    }

    /// s(x) as a polynomial of y-degree 0.
    pub fn from_series(s: &PuiseuxPoly<S>) -> Self {
        Self::new(s.terms().map(|(e, c)| ((e, 0), c.clone())).collect())
    }

    pub fn terms(&self) -> &Terms<S> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: Exponent, j: u32) -> S {
        self.terms.get(&(e, j)).cloned().unwrap_or_else(S::zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut t = self.terms.clone();
        for (k, v) in &o.terms {
            let slot = t.entry(*k).or_insert_with(S::zero);
            *slot = slot.clone() + v;
        }
        Self::new(t)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-S::one()))
    }

    pub fn scale(&self, c: &S) -> Self {
        Self::new(self.terms.iter().map(|(k, v)| (*k, v.clone() * c)).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut t: Terms<S> = BTreeMap::new();
        for (&(e1, j1), a) in &self.terms {
            for (&(e2, j2), b) in &o.terms {
                let slot = t.entry((e1 + e2, j1 + j2)).or_insert_with(S::zero);
                *slot = slot.clone() + a.clone() * b;
            }
        }
        Self::new(t)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(S::one());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn dx(&self) -> Self {
        Self::new(
            self.terms
                .iter()
                .filter(|((e, _), _)| !e.is_zero())
                .map(|(&(e, j), c)| ((e - Exponent::one(), j), c.clone() * crate::equation::exponent_scalar::<S>(e)))
                .collect(),
        )
    }

    pub fn dy(&self) -> Self {
        Self::new(
            self.terms
                .iter()
                .filter(|((_, j), _)| *j > 0)
                .map(|(&(e, j), c)| ((e, j - 1), c.clone() * S::from_i64(j as i64)))
                .collect(),
        )
    }

    pub fn degree_y(&self) -> u32 {
        self.terms.keys().map(|k| k.1).max().unwrap_or(0)
    }

    /// ν: least total degree ι + j; None for zero.
    pub fn order(&self) -> Option<Exponent> {
        self.terms.keys().map(|&(e, j)| e + Exponent::from_integer(j as i64)).min()
    }

    /// f(x, s(x)).
    pub fn eval_series(&self, s: &PuiseuxPoly<S>) -> PuiseuxPoly<S> {
        let d = self.degree_y();
        let mut pows = vec![PuiseuxPoly::constant(S::one())];
        for i in 1..=d as usize {
            let next = pows[i - 1].mul(s);
            pows.push(next);
        }
        let mut terms = Vec::new();
        for (&(e, j), c) in &self.terms {
            for (x, v) in pows[j as usize].terms() {
                terms.push((x + e, v.clone() * c));
            }
        }
        PuiseuxPoly::from_terms(terms)
    }

    /// Coefficient of y^j as a series in x.
    pub fn y_coefficient(&self, j: u32) -> PuiseuxPoly<S> {
        PuiseuxPoly::from_terms(self.terms.iter().filter(|(k, _)| k.1 == j).map(|(k, c)| (k.0, c.clone())))
    }

    /// f(m11·u + m12·v, m21·u + m22·v) for integer exponents.
    pub fn compose_linear(&self, m: [[i64; 2]; 2]) -> Self {
        let lx = Self::new(
            [((Exponent::one(), 0), S::from_i64(m[0][0])), ((Exponent::zero(), 1), S::from_i64(m[0][1]))].into(),
        );
        let ly = Self::new(
            [((Exponent::one(), 0), S::from_i64(m[1][0])), ((Exponent::zero(), 1), S::from_i64(m[1][1]))].into(),
        );
        let mut out = Self::zero();
        for (&(e, j), c) in &self.terms {
            assert!(e.is_integer() && !e.is_negative(), "linear change needs integer exponents");
            let t = lx.pow(e.to_integer() as u32).mul(&ly.pow(j)).scale(c);
            out = out.add(&t);
        }
        out
    }

    /// Text in the expression grammar (variables x, y).
    pub fn render(&self) -> String {
        let mut keys: Vec<(&(Exponent, u32), &S)> = self.terms.iter().collect();
        keys.sort_by(|a, b| b.0 .1.cmp(&a.0 .1).then(a.0 .0.cmp(&b.0 .0)));
        let parts: Vec<String> = keys
            .into_iter()
            .map(|(&(e, j), c)| {
                let mut m = Vec::new();
                if !e.is_zero() {
                    m.push(format!("x{}", exponent_suffix(e)));
                }
                match j {
                    0 => {}
                    1 => m.push("y".into()),
                    _ => m.push(format!("y^{j}")),
                }
                join_term(&c.literal(), &m.join("*"))
            })
            .collect();
        join_signed(&parts)
    }
}

/// f = ∏_{ζⁿ=1} (y − s(ζ·x^(1/n))), through power sums of the conjugates and
/// Newton's identities.  Exponents of f are integers.
pub fn branch_minimal_polynomial<S: Scalar>(s: &PuiseuxPoly<S>) -> Bivariate<S> {
    let s = s.reduce();
    let n = s.ram() as usize;
    // p_k = Σ_ζ s_ζ^k = n·(integer-exponent part of s^k).
    let nn = S::from_i64(n as i64);
    let mut power = PuiseuxPoly::constant(S::one());
    let mut p = vec![PuiseuxPoly::zero()];
    for _ in 1..=n {
        power = power.mul(&s);
        let int_part =
            PuiseuxPoly::from_terms(power.terms().filter(|(e, _)| e.is_integer()).map(|(e, c)| (e, c.clone() * &nn)));
        p.push(int_part);
    }
    // k·e_k = Σ_{i=1}^{k} (−1)^{i−1} e_{k−i} p_i
    let mut e = vec![PuiseuxPoly::constant(S::one())];
    for k in 1..=n {
        let mut acc = PuiseuxPoly::zero();
        for i in 1..=k {
            let t = e[k - i].mul(&p[i]);
            acc = if i % 2 == 1 { acc.add(&t) } else { acc.sub(&t) };
        }
        e.push(acc.scale(&S::from_i64(k as i64).inv()));
    }
    let mut f = Bivariate::zero();
    for (k, ek) in e.iter().enumerate() {
        let sign = if k % 2 == 0 { S::one() } else { -S::one() };
        let yk = Bivariate::monomial(sign, Exponent::zero(), (n - k) as u32);
        f = f.add(&Bivariate::from_series(ek).mul(&yk));
    }
    f
}

/// P = f_x + f_y·y₁ for the minimal polynomial f of s.
pub fn gen_differential_from_branch<S: Scalar>(s: &PuiseuxPoly<S>) -> CoveredEquation<S> {
    let f = branch_minimal_polynomial(s);
    hamiltonian_equation(&f)
}

/// The equation of the foliation df = 0.
pub fn hamiltonian_equation<S: Scalar>(f: &Bivariate<S>) -> CoveredEquation<S> {
    CoveredEquation::from_raw(OperatorSpec::differential(), f.dx().terms, f.dy().terms)
        .expect("derivatives of a polynomial have nonnegative exponents")
}

/// A := −B·(σ(s) + e·(y − s)) + D·(y − s), so that A(x,s) + B(x,s)·σ(s) = 0.
pub fn gen_covered_with_solution<S: Scalar>(
    op: OperatorSpec<S>,
    s: &PuiseuxPoly<S>,
    b: &Bivariate<S>,
    d: &Bivariate<S>,
    e: &Bivariate<S>,
) -> Result<CoveredEquation<S>, CorpusError> {
    if b.is_zero() {
        return Err(CorpusError::Unsatisfiable("B must be nonzero".into()));
    }
    let sig = Bivariate::from_series(&s.sigma_apply(&op)?);
    let ys = Bivariate::y().sub(&Bivariate::from_series(s));
    let a = b.mul(&sig.add(&e.mul(&ys))).scale(&-S::one()).add(&d.mul(&ys));
    Ok(CoveredEquation::from_raw(op, a.terms, b.terms.clone())?)
}

fn nonzero_coeff<S: Scalar, R: Rng>(rng: &mut R, bound: i64) -> S {
    let mut v = 0;
    while v == 0 {
        v = rng.gen_range(-bound..=bound);
    }
    S::from_i64(v)
}

/// A branch with the given characteristic factors, order ≥ 1, small
/// exponents and integer coefficients in [−3, 3].
pub fn gen_random_branch<S: Scalar, R: Rng>(factors: &[u32], rng: &mut R) -> Result<PuiseuxPoly<S>, CorpusError> {
    if factors.iter().any(|&r| r < 2) {
        return Err(CorpusError::Unsatisfiable("characteristic factors must be at least 2".into()));
    }
    let n: i64 = factors.iter().map(|&r| r as i64).product();
    let mut coeffs: BTreeMap<i64, S> = BTreeMap::new();
    let mut cur = n - 1;
    if factors.is_empty() || rng.gen_bool(0.5) {
        coeffs.insert(n, nonzero_coeff(rng, 3));
        cur = n;
    }
    let mut d: i64 = 1;
    for &r in factors {
        let r = r as i64;
        d *= r;
        let step = n / d;
        // Smallest admissible index beyond cur, possibly skipping one.
        let mut t = cur / step + 1;
        let mut skip = rng.gen_range(0..2);
        loop {
            if t % r != 0 {
                if skip == 0 {
                    break;
                }
                skip -= 1;
            }
            t += 1;
        }
        let idx = t * step;
        coeffs.insert(idx, nonzero_coeff(rng, 3));
        cur = idx;
        if rng.gen_bool(0.3) {
            cur += step;
            coeffs.insert(cur, nonzero_coeff(rng, 3));
        }
    }
    if factors.is_empty() && rng.gen_bool(0.5) {
        coeffs.insert(2 * n, nonzero_coeff(rng, 3));
    }
    let s = PuiseuxPoly::new(n as u32, coeffs);
    let cd = s.characteristic_data();
    if cd.factors() != factors {
        return Err(CorpusError::Unsatisfiable(format!("generated factors {:?}", cd.factors())));
    }
    Ok(s)
}

/// All factor sequences with the given genus and product at most `ram_max`.
pub fn factor_sequences(genus: usize, ram_max: u32) -> Vec<Vec<u32>> {
    fn go(g: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if g == 0 {
            out.push(cur.clone());
            return;
        }
        for r in 2..=left {
            if left / r >= 2u32.pow(g as u32 - 1) {
                cur.push(r);
                go(g - 1, left / r, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(genus, ram_max, &mut Vec::new(), &mut out);
    out
}

#[derive(Clone, Debug)]
pub struct CorpusEntry<S> {
    pub seed: u64,
    pub equation: CoveredEquation<S>,
    pub solution: PuiseuxPoly<S>,
    pub data: CharacteristicData,
}

impl<S: Scalar> CorpusEntry<S> {
    pub fn to_json(&self) -> Value {
        let op = self.equation.op();
        json!({
            "seed": self.seed,
            "op": if op.is_differential() { "diff" } else { "q" },
            "q": op.q().map(|q| q.literal()),
            "equation": self.equation.render(),
            "solution": self.solution.render(),
            "characteristic": self.data,
        })
    }
}

pub fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index))
}

/// `count` differential equations f_x + f_y·y₁ from random branches of genus
/// ≤ `genus_max` and ramification ≤ `ram_max`, cycling through genera.
pub fn differential_corpus<S: Scalar>(seed: u64, count: usize, genus_max: usize, ram_max: u32) -> Vec<CorpusEntry<S>> {
    let pools: Vec<Vec<Vec<u32>>> =
        (0..=genus_max).map(|g| factor_sequences(g, ram_max)).filter(|p| !p.is_empty()).collect();
    let mut out = Vec::with_capacity(count);
    let mut i = 0u64;
    while out.len() < count {
        let mut rng = rng_for(seed, i);
        let pool = &pools[(i as usize) % pools.len()];
        let factors = pool.choose(&mut rng).unwrap().clone();
        i += 1;
        let Ok(s) = gen_random_branch::<S, _>(&factors, &mut rng) else { continue };
        let equation = gen_differential_from_branch(&s);
        let data = s.characteristic_data();
        out.push(CorpusEntry { seed: i - 1, equation, solution: s, data });
    }
    out
}

/// Random bivariate with `terms` monomials x^(a/m)·y^j, a/m + j ≥ 1.
pub fn random_bivariate<S: Scalar, R: Rng>(rng: &mut R, m: u32, terms: usize, max_j: u32) -> Bivariate<S> {
    let mut out = Bivariate::zero();
    for _ in 0..terms {
        let j = rng.gen_range(0..=max_j);
        let lo = if j == 0 { m as i64 } else { 0 };
        let a = rng.gen_range(lo..=lo + 2 * m as i64);
        out = out.add(&Bivariate::monomial(nonzero_coeff(rng, 3), Exponent::new(a, m as i64), j));
    }
    out
}

/// `count` planted equations A + B·σ(y) with σ given by `op`, from random
/// branches of genus ≤ `genus_max` (ramification ≤ `ram_max`).  B and D
/// live on the grid of s.
pub fn covered_corpus<S: Scalar>(
    op: &OperatorSpec<S>,
    seed: u64,
    count: usize,
    genus_max: usize,
    ram_max: u32,
) -> Vec<CorpusEntry<S>> {
    let pools: Vec<Vec<Vec<u32>>> =
        (0..=genus_max).map(|g| factor_sequences(g, ram_max)).filter(|p| !p.is_empty()).collect();
    let mut out = Vec::with_capacity(count);
    let mut i = 0u64;
    while out.len() < count {
        let mut rng = rng_for(seed, i);
        let pool = &pools[(i as usize) % pools.len()];
        let factors = pool.choose(&mut rng).unwrap().clone();
        i += 1;
        let Ok(s) = gen_random_branch::<S, _>(&factors, &mut rng) else { continue };
        let m = s.ram();
        let nb = rng.gen_range(1..=3);
        let b = random_bivariate(&mut rng, m, nb, 2);
        let nd = rng.gen_range(0..=2);
        let d = random_bivariate(&mut rng, m, nd, 1);
        let e = if rng.gen_bool(0.5) { Bivariate::zero() } else { Bivariate::constant(nonzero_coeff(&mut rng, 2)) };
        let Ok(equation) = gen_covered_with_solution(op.clone(), &s, &b, &d, &e) else { continue };
        if equation.is_zero() {
            continue;
        }
        let data = s.characteristic_data_over(equation.ram());
        out.push(CorpusEntry { seed: i - 1, equation, solution: s, data });
    }
    out
}
