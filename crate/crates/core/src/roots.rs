//! Root finding for polynomials over each backend.
//!
//! Exact backends: square-free decomposition, then candidate roots are read
//! off a high-precision numerical approximation of the rational norm
//! polynomial (rational roots and rational quadratic factors) and every
//! candidate is confirmed by exact evaluation.  The numerics only propose;
//! nothing is accepted without an exact check.
//!
//! Numeric backend: Aberth iteration at the working precision, clustering of
//! nearby approximations into multiple roots, backward-error certification.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::poly::Poly;
use crate::scalar::numeric::{f_f64, f_round};
use crate::scalar::{squarefree_split, BigComplex, Cf, RootError, Scalar};

/// Roots with multiplicities, sorted canonically.  `unsolved` holds the
/// factor whose roots could not be expressed (exact irreducible factors of
/// degree ≥ 3, or roots outside the available extension).
#[derive(Clone, Debug, PartialEq)]
pub struct RootSet<S> {
    pub roots: Vec<(S, u32)>,
    pub unsolved: Option<Poly<S>>,
}

impl<S: Scalar> RootSet<S> {
    pub fn count(&self) -> u32 {
        self.roots.iter().map(|(_, m)| *m).sum()
    }

    pub fn is_complete(&self) -> bool {
        self.unsolved.is_none()
    }

    pub fn multiplicity_of(&self, x: &S) -> u32 {
        self.roots.iter().find(|(r, _)| r == x).map(|(_, m)| *m).unwrap_or(0)
    }

    fn sort(&mut self) {
        self.roots.sort_by(|a, b| a.0.canonical_cmp(&b.0));
    }
}

// ============================================================================
// Aberth iteration on Cf
// ============================================================================

fn horner_with_derivative(coeffs: &[Cf], z: &Cf) -> (Cf, Cf) {
    let p = z.precision();
    let mut v = Cf::zero(p);
    let mut d = Cf::zero(p);
    for c in coeffs.iter().rev() {
        d = d.mul(z).add(&v);
        v = v.mul(z).add(c);
    }
    (v, d)
}

fn aberth_f64(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let mut radius: f64 = 0.0;
    for k in 1..=n {
        let r = (coeffs[n - k] / lead).norm().powf(1.0 / k as f64);
        radius = radius.max(r);
    }
    let radius = (2.0 * radius).max(1e-3);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, std::f64::consts::TAU * k as f64 / n as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let mut v = Complex64::new(0.0, 0.0);
            let mut d = Complex64::new(0.0, 0.0);
            for c in coeffs.iter().rev() {
                d = d * z[i] + v;
                v = v * z[i] + c;
            }
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / d;
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff.norm() > 0.0 {
                        s += 1.0 / diff;
                    }
                }
            }
            let w = ratio / (1.0 - ratio * s);
            if w.is_finite() {
                z[i] -= w;
                moved = moved.max(w.norm() / z[i].norm().max(1.0));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

/// Approximations of all roots of the polynomial with the given coefficients
/// (lowest degree first, leading coefficient nonzero) at precision p.
pub fn aberth(coeffs: &[Cf], p: usize, max_iter: usize) -> Vec<Cf> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let coeffs: Vec<Cf> = coeffs.iter().map(|c| c.with_precision(p)).collect();
    let seeds = aberth_f64(&coeffs.iter().map(|c| c.to_c64()).collect::<Vec<_>>());
    let mut z: Vec<Cf> = seeds
        .iter()
        .enumerate()
        .map(|(k, s)| {
            // Tiny deterministic perturbation keeps seeds distinct.
            let bump = Complex64::new(1e-14 * (k as f64 + 1.0), 1e-14 * (k as f64 + 0.5));
            let s = if s.is_finite() { *s + bump } else { Complex64::new(1.0, k as f64) };
            Cf::from_c64(s, p)
        })
        .collect();
    let tol = f_f64(2f64.powi(-(p as i32) + 12), p);
    let one = Cf::one(p);
    for _ in 0..max_iter {
        let mut converged = true;
        for i in 0..n {
            let (v, d) = horner_with_derivative(&coeffs, &z[i]);
            if v.is_exact_zero() {
                continue;
            }
            let ratio = v.div(&d);
            let mut s = Cf::zero(p);
            for j in 0..n {
                if j != i {
                    let diff = z[i].sub(&z[j]);
                    if !diff.is_exact_zero() {
                        s = s.add(&one.div(&diff));
                    }
                }
            }
            let w = ratio.div(&one.sub(&ratio.mul(&s)));
            z[i] = z[i].sub(&w);
            let scale = z[i].max_abs();
            let scale = if scale > f_f64(1.0, p) { scale } else { f_f64(1.0, p) };
            if w.max_abs() > &tol * &scale {
                converged = false;
            }
        }
        if converged {
            break;
        }
    }
    z
}

// ============================================================================
// Numeric backend
// ============================================================================

pub(crate) fn numeric_roots<const BITS: usize>(
    p: &Poly<BigComplex<BITS>>,
) -> Result<RootSet<BigComplex<BITS>>, RootError> {
    type C<const B: usize> = BigComplex<B>;
    let deg = p.degree().ok_or(RootError::ZeroPolynomial)?;
    let mut out = RootSet { roots: Vec::new(), unsolved: None };
    if deg == 0 {
        return Ok(out);
    }
    // Exact zero roots first: they are common (C divides Φ) and cheap.
    let val = p.valuation().unwrap();
    if val > 0 {
        out.roots.push((C::<BITS>::zero(), val as u32));
    }
    let q = Poly::new(p.coeffs()[val..].to_vec());
    let qdeg = q.degree().unwrap();
    if qdeg > 0 {
        let cfs: Vec<Cf> = q.coeffs().iter().map(|c| c.cf().clone()).collect();
        let approx = aberth(&cfs, BITS, 400);
        // Cluster approximations closer than 2^(−BITS/8)·max(1,|z|).
        let radius = 2f64.powi(-((BITS / 8) as i32));
        let zs: Vec<Complex64> = approx.iter().map(|z| z.to_c64()).collect();
        let mut label: Vec<usize> = (0..qdeg).collect();
        for i in 0..qdeg {
            for j in (i + 1)..qdeg {
                if (zs[i] - zs[j]).norm() <= radius * zs[i].norm().max(1.0) {
                    let (a, b) = (label[i], label[j]);
                    for l in label.iter_mut() {
                        if *l == b {
                            *l = a;
                        }
                    }
                }
            }
        }
        let mut seen = Vec::new();
        let mut failed: Vec<(C<BITS>, u32)> = Vec::new();
        for i in 0..qdeg {
            if seen.contains(&label[i]) {
                continue;
            }
            seen.push(label[i]);
            let members: Vec<usize> = (0..qdeg).filter(|&k| label[k] == label[i]).collect();
            let m = members.len();
            let mut center = Cf::zero(BITS);
            for &k in &members {
                center = center.add(&approx[k]);
            }
            center = center.div(&Cf::from_i64(m as i64, BITS));
            // Newton on the (m−1)-th derivative, where the root is simple.
            let h = q.hasse(m - 1);
            let hc: Vec<Cf> = h.coeffs().iter().map(|c| c.cf().clone()).collect();
            for _ in 0..50 {
                let (v, d) = horner_with_derivative(&hc, &center);
                if v.is_exact_zero() || d.is_exact_zero() {
                    break;
                }
                let step = v.div(&d);
                center = center.sub(&step);
                if step.to_c64().norm() <= 2f64.powi(-(BITS as i32) + 8) * center.to_c64().norm().max(1.0) {
                    break;
                }
            }
            let root = C::<BITS>::from_cf(center);
            // Backward error: |h(z)| against Σ|h_i||z|^i.
            let zabs = root.magnitude();
            let scale: f64 = h
                .coeffs()
                .iter()
                .enumerate()
                .map(|(k, c)| c.magnitude() * zabs.powi(k as i32))
                .sum();
            let resid = h.eval(&root).magnitude();
            if resid <= C::<BITS>::epsilon() * scale.max(f64::MIN_POSITIVE) {
                out.roots.push((root, m as u32));
            } else {
                failed.push((root, m as u32));
            }
        }
        if !failed.is_empty() {
            out.unsolved = Some(Poly::from_roots(&failed).scale(q.leading().unwrap()));
        }
    }
    out.sort();
    Ok(out)
}

// ============================================================================
// Exact backends
// ============================================================================

fn to_rational_poly<S: Scalar>(p: &Poly<S>) -> Option<Poly<BigRational>> {
    let v: Option<Vec<BigRational>> = p.coeffs().iter().map(|c| c.as_rational()).collect();
    v.map(Poly::new)
}

/// Integer primitive multiple of a rational polynomial.
fn primitive_integer(p: &Poly<BigRational>) -> Vec<BigInt> {
    let mut l = BigInt::one();
    for c in p.coeffs() {
        l = l.lcm(c.denom());
    }
    let ints: Vec<BigInt> = p.coeffs().iter().map(|c| (c * BigRational::from_integer(l.clone())).to_integer()).collect();
    let mut g = BigInt::zero();
    for c in &ints {
        g = g.gcd(c);
    }
    let sign = if ints.last().is_some_and(|c| c.is_negative()) { -BigInt::one() } else { BigInt::one() };
    ints.into_iter().map(|c| c / &g * &sign).collect()
}

fn eval_int_poly(g: &[BigInt], x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in g.iter().rev() {
        acc = acc * x + BigRational::from_integer(c.clone());
    }
    acc
}

fn divides_exactly(g: &Poly<BigRational>, d: &Poly<BigRational>) -> bool {
    g.div_rem(d).1.is_zero()
}

enum Candidate {
    Rational(BigRational),
    /// (σ, D): roots (σ ± √D)/2
    Quadratic(BigRational, BigRational),
}

/// Rational roots and rational quadratic factors of a square-free rational
/// polynomial, proposed numerically and confirmed exactly.
fn rational_candidates(g: &Poly<BigRational>) -> Vec<Candidate> {
    let deg = g.degree().unwrap_or(0);
    let mut out = Vec::new();
    if deg == 0 {
        return out;
    }
    let ints = primitive_integer(g);
    let lc = ints.last().unwrap().clone();
    let maxbits = ints.iter().map(|c| c.bits()).max().unwrap_or(1) as usize;
    let prec = (128 + 2 * deg * (maxbits + 8)).clamp(128, 16384).div_ceil(64) * 64;
    let cfs: Vec<Cf> = ints.iter().map(|c| Cf::from_bigint(c, prec)).collect();
    let zs = aberth(&cfs, prec, 300);
    let lc_cf = Cf::from_bigint(&lc, prec);
    // A real rational candidate has z·lc close to an integer.
    let imag_ok = |z: &Cf| -> bool { z.mul(&lc_cf).im.to_f64().value().abs() < 0.25 };
    let mut used = vec![false; zs.len()];
    for (i, z) in zs.iter().enumerate() {
        if !imag_ok(z) {
            continue;
        }
        let n = f_round(&z.mul(&lc_cf).re);
        let r = BigRational::new(n, lc.clone());
        if eval_int_poly(&ints, &r).is_zero() {
            used[i] = true;
            if !out.iter().any(|c| matches!(c, Candidate::Rational(x) if *x == r)) {
                out.push(Candidate::Rational(r));
            }
        }
    }
    for i in 0..zs.len() {
        if used[i] {
            continue;
        }
        for j in (i + 1)..zs.len() {
            if used[j] || used[i] {
                continue;
            }
            let s = zs[i].add(&zs[j]);
            let pr = zs[i].mul(&zs[j]);
            if !imag_ok(&s) || !imag_ok(&pr) {
                continue;
            }
            let sigma = BigRational::new(f_round(&s.mul(&lc_cf).re), lc.clone());
            let pi = BigRational::new(f_round(&pr.mul(&lc_cf).re), lc.clone());
            let quad = Poly::new(vec![pi.clone(), -sigma.clone(), BigRational::one()]);
            if divides_exactly(g, &quad) {
                used[i] = true;
                used[j] = true;
                let disc = &sigma * &sigma - BigRational::from_integer(BigInt::from(4)) * &pi;
                out.push(Candidate::Quadratic(sigma, disc));
            }
        }
    }
    out
}

fn candidate_values<S: Scalar>(c: &Candidate, d: i64) -> Vec<S> {
    match c {
        Candidate::Rational(r) => vec![S::from_rational(r)],
        Candidate::Quadratic(sigma, disc) => {
            // √(u/v) = √(u·v)/v
            let uv = disc.numer() * disc.denom();
            let (_, free) = squarefree_split(&uv);
            if d != 0 && free != BigInt::from(d) && free != BigInt::one() {
                return Vec::new();
            }
            let root = match S::sqrt_int(&uv) {
                Ok(r) => r / S::from_bigint(disc.denom()),
                Err(_) => return Vec::new(),
            };
            let half = S::from_rational(&BigRational::new(BigInt::one(), BigInt::from(2)));
            let s = S::from_rational(sigma);
            vec![(s.clone() + &root) * &half, (s - root) * &half]
        }
    }
}

/// Roots of p whose coefficients lie in ℚ or ℚ(√d).
pub(crate) fn exact_roots<S: Scalar>(p: &Poly<S>, d: i64) -> Result<RootSet<S>, RootError> {
    let deg = p.degree().ok_or(RootError::ZeroPolynomial)?;
    let mut out = RootSet { roots: Vec::new(), unsolved: None };
    if deg == 0 {
        return Ok(out);
    }
    let mut unsolved = Poly::<S>::one();
    for (f, m) in p.squarefree() {
        let mut rest = f.clone();
        let mut found: Vec<S> = Vec::new();
        if f.degree() == Some(1) {
            found.push(-f.coeff(0) / f.coeff(1));
        } else {
            let norm = if d != 0 {
                f.clone() * Poly::new(f.coeffs().iter().map(|c| c.galois_conjugate()).collect())
            } else {
                f.clone()
            };
            if let Some(g) = to_rational_poly(&norm) {
                let g = g.div_rem(&g.gcd(&g.derivative())).0;
                for cand in rational_candidates(&g) {
                    for v in candidate_values::<S>(&cand, d) {
                        if v.extension() != 0 && d != 0 && v.extension() != d {
                            continue;
                        }
                        if f.eval(&v).is_zero() && !found.contains(&v) {
                            found.push(v);
                        }
                    }
                }
            }
        }
        for r in &found {
            rest = rest.div_rem(&Poly::new(vec![-r.clone(), S::one()])).0;
            out.roots.push((r.clone(), m));
        }
        if rest.degree().unwrap_or(0) > 0 {
            for _ in 0..m {
                unsolved = unsolved * &rest;
            }
        }
    }
    if unsolved.degree().unwrap_or(0) > 0 {
        out.unsolved = Some(unsolved.scale(p.leading().unwrap()));
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Complex256, Quadratic, Rational, Ring};

    fn rp(v: &[(i64, i64)]) -> Poly<Rational> {
        Poly::new(v.iter().map(|&(n, d)| Rational::new(n.into(), d.into())).collect())
    }

    #[test]
    fn rational_roots_with_multiplicity() {
        let p = Poly::from_roots(&[
            (Rational::new(3.into(), 7.into()), 2),
            (Rational::from_i64(-5), 1),
            (Rational::from_i64(0), 3),
        ]);
        let rs = Rational::find_roots(&p).unwrap();
        assert!(rs.is_complete());
        assert_eq!(rs.count(), 6);
        assert_eq!(rs.roots[0], (Rational::from_i64(-5), 1));
        assert_eq!(rs.roots[1], (Rational::from_i64(0), 3));
        assert_eq!(rs.roots[2], (Rational::new(3.into(), 7.into()), 2));
    }

    #[test]
    fn irrational_roots_unsolved_over_q() {
        let p = rp(&[(0, 1), (11, 2), (0, 1), (-1, 2)]);
        let rs = Rational::find_roots(&p).unwrap();
        assert_eq!(rs.roots, vec![(Rational::from_i64(0), 1)]);
        assert_eq!(rs.unsolved.unwrap().degree(), Some(2));
    }

    #[test]
    fn sqrt11_roots_over_quadratic() {
        let p: Poly<Quadratic> = Poly::new(
            [(0, 1), (11, 2), (0, 1), (-1, 2)]
                .iter()
                .map(|&(n, d)| Quadratic::from(Rational::new(n.into(), d.into())))
                .collect(),
        );
        let rs = Quadratic::find_roots(&p).unwrap();
        assert!(rs.is_complete());
        let s = Quadratic::sqrt_int(&11.into()).unwrap();
        assert_eq!(rs.roots, vec![(-s.clone(), 1), (Quadratic::zero(), 1), (s, 1)]);
    }

    #[test]
    fn roots_over_extension_coefficients() {
        // (C − 1 − √11)(C + 2√11)
        let s = Quadratic::sqrt_int(&11.into()).unwrap();
        let r1 = Quadratic::one() + &s;
        let r2 = -(Quadratic::from_i64(2) * &s);
        let p = Poly::from_roots(&[(r1.clone(), 1), (r2.clone(), 2)]);
        let rs = Quadratic::find_roots(&p).unwrap();
        assert!(rs.is_complete());
        assert_eq!(rs.multiplicity_of(&r1), 1);
        assert_eq!(rs.multiplicity_of(&r2), 2);
    }

    #[test]
    fn irreducible_cubic_is_flagged() {
        let p = rp(&[(-2, 1), (0, 1), (0, 1), (1, 1)]);
        let rs = Rational::find_roots(&p).unwrap();
        assert!(rs.roots.is_empty());
        assert_eq!(rs.unsolved.unwrap().degree(), Some(3));
    }

    #[test]
    fn numeric_roots_multiple() {
        let one = Complex256::one();
        let i = Complex256::imaginary_unit().unwrap();
        let p = Poly::from_roots(&[(one.clone() + &i, 2), (Complex256::from_i64(-3), 1), (Complex256::zero(), 1)]);
        let rs = Complex256::find_roots(&p).unwrap();
        assert!(rs.is_complete());
        assert_eq!(rs.count(), 4);
        assert_eq!(rs.multiplicity_of(&(one + i)), 2);
    }

    #[test]
    fn zero_polynomial_is_an_error() {
        assert_eq!(Rational::find_roots(&Poly::zero()), Err(RootError::ZeroPolynomial));
    }
}
