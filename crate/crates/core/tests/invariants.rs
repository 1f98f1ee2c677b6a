use std::collections::BTreeSet;

use num_traits::{One, Zero};
use proptest::prelude::*;

use puiseux::analysis::trace_solution;
use puiseux::bounds::{improper_check, reasonableness, DEFAULT_SEARCH_LENGTH};
use puiseux::corpus::{differential_corpus, random_bivariate, rng_for};
use puiseux::parser::{parse_equation, parse_series};
use puiseux::solver::{expand, ExpandOptions};
use puiseux::polygon::{build_polygon, element, Point};
use puiseux::{ex, CoveredEquation, Exponent, OperatorSpec, Poly, PuiseuxPoly, Rational, Ring};

fn cloud_strategy() -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec((0i64..12, 1i64..4, 0u32..7), 1..12)
        .prop_map(|v| v.into_iter().map(|(a, d, j)| (ex(a, d), j)).collect())
}

fn brute_alpha(cloud: &[Point], mu: Exponent) -> Exponent {
    cloud.iter().map(|p| Exponent::from_integer(p.1 as i64) + p.0 / mu).min().unwrap()
}

/// Vertices as the extreme points of elements at every critical co-slope,
/// plus the two limits μ → 0 and μ → ∞.
fn brute_vertices(cloud: &[Point]) -> BTreeSet<Point> {
    let mut out = BTreeSet::new();
    let left = cloud.iter().min_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1))).unwrap();
    let low = cloud.iter().min_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0))).unwrap();
    out.insert(*left);
    out.insert(*low);
    for p in cloud {
        for q in cloud {
            if p.1 > q.1 && q.0 > p.0 {
                let mu = (q.0 - p.0) / Exponent::from_integer((p.1 - q.1) as i64);
                let alpha = brute_alpha(cloud, mu);
                let on: Vec<&Point> =
                    cloud.iter().filter(|c| Exponent::from_integer(c.1 as i64) + c.0 / mu == alpha).collect();
                out.insert(**on.iter().max_by_key(|c| c.1).unwrap());
                out.insert(**on.iter().min_by_key(|c| c.1).unwrap());
            }
        }
    }
    out
}

fn mu_strategy() -> impl Strategy<Value = Exponent> {
    (1i64..30, 1i64..10).prop_map(|(a, b)| ex(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn hull_matches_brute_force(cloud in cloud_strategy()) {
        let poly = build_polygon(&cloud).unwrap();
        let got: BTreeSet<Point> = poly.vertices().iter().copied().collect();
        prop_assert_eq!(got, brute_vertices(&cloud));
        // Vertices descend strictly in j and ascend strictly in ι.
        for w in poly.vertices().windows(2) {
            prop_assert!(w[0].0 < w[1].0 && w[0].1 > w[1].1);
        }
    }

    #[test]
    fn element_is_the_set_of_minimizers(cloud in cloud_strategy(), mu in mu_strategy()) {
        let e = element(&cloud, mu);
        let alpha = brute_alpha(&cloud, mu);
        prop_assert_eq!(e.alpha, alpha);
        for p in &cloud {
            let on = Exponent::from_integer(p.1 as i64) + p.0 / mu == alpha;
            prop_assert_eq!(on, e.points.contains(p));
        }
        // The hull sees the same supporting line.
        let poly = build_polygon(&cloud).unwrap();
        prop_assert_eq!(element(poly.vertices(), mu).alpha, alpha);
        prop_assert_eq!(poly.top_at(mu), e.top);
    }

    #[test]
    fn top_is_non_increasing_and_bounded_by_height(cloud in cloud_strategy(), a in mu_strategy(), b in mu_strategy()) {
        let poly = build_polygon(&cloud).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(poly.top_at(lo) >= poly.top_at(hi));
        prop_assert!(poly.height() >= poly.top_at(lo));
        let left = cloud.iter().map(|p| p.0).min().unwrap();
        let h = cloud.iter().filter(|p| p.0 == left).map(|p| p.1).min().unwrap();
        prop_assert_eq!(poly.height(), h);
    }

    #[test]
    fn improper_roots_lie_in_the_annulus(
        top in 1.0f64..5.0,
        ratios in prop::collection::vec(1.0f64..3.0, 0..8),
    ) {
        let mut u = vec![top];
        for r in &ratios {
            let next = u.last().unwrap() * r;
            u.push(next);
        }
        u.reverse();
        let rep = improper_check(&u);
        prop_assert!(rep.is_improper);
        prop_assert_eq!(rep.roots.len(), u.len());
        prop_assert!(rep.within, "roots {:?} outside [1, {}]", rep.roots, rep.upper);
    }

    #[test]
    fn hasse_derivatives_give_taylor_shifts(c in prop::collection::vec(-9i64..10, 1..7), x in -5i64..6, h in -5i64..6) {
        let r = Rational::from_i64;
        let p = Poly::new(c.iter().map(|&v| r(v)).collect());
        let shifted = p.eval(&(r(x) + r(h)));
        let mut taylor = r(0);
        let mut hp = r(1);
        for j in 0..c.len() {
            taylor = taylor + p.hasse(j).eval(&r(x)) * &hp;
            hp = hp * r(h);
        }
        prop_assert_eq!(shifted, taylor);
    }

    #[test]
    fn equations_round_trip_through_text(seed in 0u64..10_000, m in 1u32..4) {
        let mut rng = rng_for(seed, 0);
        let a = random_bivariate::<Rational, _>(&mut rng, m, 5, 4);
        let b = random_bivariate::<Rational, _>(&mut rng, m, 4, 3);
        prop_assume!(!a.is_zero() || !b.is_zero());
        let op = OperatorSpec::differential();
        let p = CoveredEquation::from_raw(op.clone(), a.terms().clone(), b.terms().clone()).unwrap();
        let text = p.render();
        let back: CoveredEquation<Rational> = parse_equation(&text, op).unwrap();
        prop_assert_eq!(&back, &p, "{}", text);
        prop_assert_eq!(back.render(), text);
    }

    #[test]
    fn series_round_trip_through_text(terms in prop::collection::vec((1i64..20, 1i64..6, -9i64..10), 0..6)) {
        let s: PuiseuxPoly<Rational> = PuiseuxPoly::from_terms(
            terms.into_iter().filter(|t| t.2 != 0).map(|(a, d, c)| (ex(a, d), Rational::from_i64(c))),
        );
        let back: PuiseuxPoly<Rational> = parse_series(&s.render()).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn height_is_top_for_small_co_slopes(cloud in cloud_strategy()) {
        let poly = build_polygon(&cloud).unwrap();
        // Below every positive co-slope between two cloud points.
        let mut gap = Exponent::one();
        for p in &cloud {
            for q in &cloud {
                if q.0 > p.0 {
                    gap = gap.min(q.0 - p.0);
                }
            }
        }
        let jmax = cloud.iter().map(|p| p.1).max().unwrap() as i64;
        let mu = gap / (jmax + 1);
        prop_assert_eq!(poly.top_at(mu), poly.height());
    }

    #[test]
    fn substitution_is_additive(seed in 0u64..10_000, c1 in -4i64..5, c2 in -4i64..5, k in 1i64..4, n in 1u32..3) {
        let mut rng = rng_for(seed, 1);
        let a = random_bivariate::<Rational, _>(&mut rng, n, 4, 3);
        let b = random_bivariate::<Rational, _>(&mut rng, n, 3, 2);
        prop_assume!(!a.is_zero() || !b.is_zero());
        let p = CoveredEquation::from_raw(OperatorSpec::differential(), a.terms().clone(), b.terms().clone()).unwrap();
        let mu = ex(k, n as i64);
        let r = Rational::from_i64;
        let twice = p.substitute(&r(c1), mu).unwrap().substitute(&r(c2), mu).unwrap();
        prop_assert_eq!(twice, p.substitute(&(r(c1) + r(c2)), mu).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn step_multiplicities_and_characteristic_sides(seed in 0u64..100_000) {
        let e = differential_corpus::<Rational>(seed, 1, 3, 8).pop().unwrap();
        let t = trace_solution(&e.equation, &e.solution, None).unwrap();
        let g = e.data.genus;
        for rec in &t.steps {
            let bot = rec.element_after.bot as usize;
            if let Some(m) = rec.multiplicity {
                prop_assert!(m as usize >= bot, "k={}: multiplicity {} < Bot {}", rec.k, m, bot);
            }
            prop_assert!(rec.beta.is_zero() || rec.beta.root_multiplicity(&rec.root) + 1 >= bot);
            if let Some(l) = e.data.index_of(rec.k) {
                if l < g {
                    prop_assert!(rec.element_after.top > rec.element_after.bot, "k={} opens no side", rec.k);
                }
            }
        }
    }

    #[test]
    fn expand_recovers_planted_branches(seed in 0u64..100_000) {
        let e = differential_corpus::<Rational>(seed, 1, 2, 6).pop().unwrap();
        let s = &e.solution;
        let top = s.max_exponent().unwrap();
        let jets = expand(&e.equation, &ExpandOptions::new(top)).unwrap();
        let found = jets.iter().any(|j| j.series.truncate_exponent(top) == *s);
        prop_assert!(found, "{} not among {} jets", s, jets.len());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn heights_on_random_branches(seed in 0u64..100_000) {
        let e = differential_corpus::<Rational>(seed, 1, 3, 8).pop().unwrap();
        let p = &e.equation;
        let s = &e.solution;
        let h = p.height().unwrap();
        let hs = p.relative_height(s).unwrap();
        prop_assert!(h >= hs);
        let ord = s.order().unwrap();
        if ord >= Exponent::one() {
            prop_assert!(p.nu0().unwrap() + Exponent::one() >= Exponent::from_integer(hs as i64));
        }
        let g = e.data.genus;
        if g >= 1 {
            prop_assert!(1u64 << (g - 1) <= hs as u64);
        }
        // The residual of a corpus solution vanishes.
        prop_assert!(p.residual(s).unwrap().is_zero());
    }

    #[test]
    fn differential_equations_are_reasonable(n in 1u32..13, factors in prop::collection::vec(2u32..5, 0..4)) {
        let v = reasonableness(&OperatorSpec::<Rational>::differential(), n, &factors, DEFAULT_SEARCH_LENGTH, false);
        prop_assert!(v.is_reasonable());
    }
}

#[test]
fn zero_cloud_point_is_its_own_polygon() {
    let poly = build_polygon(&[(Exponent::zero(), 0)]).unwrap();
    assert_eq!(poly.vertices(), &[(Exponent::zero(), 0)]);
    assert_eq!(poly.height(), 0);
}
