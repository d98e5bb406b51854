use num_bigint::BigInt;
use proptest::prelude::*;

use padic_fg::counterexample::{binomial_path, cex_build, cex_verify};
use padic_fg::formal_group::{gm_mult_point, law_invariants, torsion_points, torsion_valuation, FormalGroupKind, FormalGroupLaw, GroupPoint, Multiplier, ProductGroup};
use padic_fg::orbit::{backward_point, division_valuations, forward_hits};
use padic_fg::padic::{q, qi, ExtElem, ExtensionRing, PadicScalar, Val};
use padic_fg::series::{expm1_point, log1p_point, ps_log_exp, LogExp, MonomialTable, Series};
use padic_fg::subscheme::{hensel_parametrize, lift_series, stabilizer_torsion, subtorus_test, Subscheme};
use padic_fg::weightspace::{pk_pushforward_point, pk_pushforward_weight, same_point, weight_in_standard_gamma, weight_point};

const P: u64 = 3;
const N: i64 = 30;

fn scalar(x: i64, v: u32) -> PadicScalar {
    PadicScalar::from_bigint(P, &(BigInt::from(x) * BigInt::from(P).pow(v)), N)
}

fn nonzero() -> impl Strategy<Value = (i64, u32)> {
    (prop_oneof![-10_000i64..-1, 1i64..10_000], 0u32..5)
}

fn ext(cs: &[i64], level: u32) -> ExtElem {
    let ring = ExtensionRing::cyclotomic(P, level, N).unwrap();
    let coeffs = (0..ring.degree()).map(|i| PadicScalar::from_i64(P, cs[i % cs.len()], N)).collect();
    ExtElem::from_coeffs(&ring, coeffs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn scalar_ring_axioms(a in nonzero(), b in nonzero(), c in nonzero()) {
        let (x, y, z) = (scalar(a.0, a.1), scalar(b.0, b.1), scalar(c.0, c.1));
        prop_assert!((&(&x * &y) * &z).eq_to_precision(&(&x * &(&y * &z))));
        prop_assert!((&x * &(&y + &z)).eq_to_precision(&(&(&x * &y) + &(&x * &z))));
        prop_assert!((&(&x + &y) + &z).eq_to_precision(&(&x + &(&y + &z))));
    }

    #[test]
    fn valuation_laws(a in nonzero(), b in nonzero()) {
        let (x, y) = (scalar(a.0, a.1), scalar(b.0, b.1));
        let (vx, vy) = (x.valuation().unwrap(), y.valuation().unwrap());
        prop_assert_eq!((&x * &y).valuation(), Some(vx + vy));
        let s = &x + &y;
        if vx != vy {
            prop_assert_eq!(s.valuation(), Some(vx.min(vy)));
        } else if let Some(vs) = s.valuation() {
            prop_assert!(vs >= vx);
        }
    }

    #[test]
    fn ext_ring_axioms(a in prop::collection::vec(-50i64..50, 1..6), b in prop::collection::vec(-50i64..50, 1..6), c in prop::collection::vec(-50i64..50, 1..6), level in 1u32..3) {
        let (x, y, z) = (ext(&a, level), ext(&b, level), ext(&c, level));
        prop_assert!(x.mul(&y).mul(&z).sub(&x.mul(&y.mul(&z))).is_zero());
        prop_assert!(x.mul(&y.add(&z)).sub(&x.mul(&y).add(&x.mul(&z))).is_zero());
    }

    #[test]
    fn conjugation_composes(a in 1u64..27, b in 1u64..27, cs in prop::collection::vec(-20i64..20, 1..6)) {
        prop_assume!(a % P != 0 && b % P != 0);
        let x = ext(&cs, 2);
        let lhs = x.conjugate(&BigInt::from(b)).unwrap().conjugate(&BigInt::from(a)).unwrap();
        let rhs = x.conjugate(&BigInt::from((a * b) % 9)).unwrap();
        prop_assert!(lhs.sub(&rhs).is_zero());
    }

    #[test]
    fn compose_is_associative(f in prop::collection::vec(-5i64..5, 3), g in prop::collection::vec(-5i64..5, 3), h in prop::collection::vec(-5i64..5, 3)) {
        let t = MonomialTable::new(1, 6);
        let mk = |cs: &[i64]| {
            let terms: Vec<(Vec<u32>, i64)> = cs.iter().enumerate().map(|(i, &c)| (vec![i as u32 + 1], c)).collect();
            Series::from_integer_terms(&t, P, N, &terms).unwrap()
        };
        let (f, g, h) = (mk(&f), mk(&g), mk(&h));
        let left = f.compose(&[g.clone()]).unwrap().compose(&[h.clone()]).unwrap();
        let right = f.compose(&[g.compose(&[h]).unwrap()]).unwrap();
        prop_assert!(left.eq_to_precision(&right).unwrap());
    }

    #[test]
    fn evaluation_is_multiplicative(f in prop::collection::vec(-9i64..9, 4), g in prop::collection::vec(-9i64..9, 4), x in 1i64..500) {
        let t = MonomialTable::new(1, 4);
        let mk = |cs: &[i64]| {
            let terms: Vec<(Vec<u32>, i64)> = cs.iter().enumerate().map(|(i, &c)| (vec![i as u32], c)).collect();
            Series::from_integer_terms(&t, P, N, &terms).unwrap()
        };
        let (f, g) = (mk(&f), mk(&g));
        let pt = [scalar(x, 1)];
        let fg = f.mul(&g).unwrap().evaluate(&pt).unwrap();
        let a = f.evaluate(&pt).unwrap();
        let b = g.evaluate(&pt).unwrap();
        let c = padic_fg::padic::valuation::q_floor(&fg.certified.min(a.certified).min(b.certified)).min(N);
        prop_assert!(fg.value.with_precision(c).eq_to_precision(&(&a.value * &b.value).with_precision(c)));
    }

    #[test]
    fn log_exp_roundtrip_and_homomorphism(a in 1i64..2000, b in 1i64..2000) {
        let (x, y) = (scalar(a, 1), scalar(b, 2));
        let l = log1p_point(&x).unwrap();
        let back = expm1_point(&l.value).unwrap();
        let c = padic_fg::padic::valuation::q_floor(&back.certified).min(N - 2);
        prop_assert!(back.value.with_precision(c).eq_to_precision(&x.with_precision(c)));
        let sum = &(&x + &y) + &(&x * &y);
        let lhs = log1p_point(&sum).unwrap().value;
        let rhs = &l.value + &log1p_point(&y).unwrap().value;
        let c = lhs.precision().min(rhs.precision());
        prop_assert!(lhs.with_precision(c).eq_to_precision(&rhs.with_precision(c)));
    }

    #[test]
    fn gm_fast_path_matches_series(a in -729i64..=729, u in 1i64..1000, v in 1u32..3) {
        let x = scalar(u, v);
        let fast = gm_mult_point(&Multiplier::from(a), &x).unwrap().value;
        let slow = binomial_path(&BigInt::from(a), &x, N).unwrap();
        let c = slow.precision().min(fast.precision());
        prop_assert!(fast.with_precision(c).eq_to_precision(&slow.with_precision(c)));
    }

    #[test]
    fn distance_translate_identity(c in 1i64..9, a in 1i64..200, b in 1i64..200, qa in 1i64..50, qb in 1i64..50) {
        let x = Subscheme::shifted_diagonal(P, 6, N, 3 * c).unwrap();
        let pt = GroupPoint::new(vec![scalar(a, 1), scalar(b, 1)]).unwrap();
        let qp = GroupPoint::new(vec![scalar(qa, 1), scalar(qb, 2)]).unwrap();
        let sum = x.group().add(&pt, &qp).unwrap().0;
        let lhs = x.distance(&sum).unwrap();
        let rhs = x.translate(&qp).unwrap().distance(&pt).unwrap();
        prop_assert!(lhs.value.same_verdict(&rhs.value));
    }

    #[test]
    fn weights_commute_with_pushforward(k1 in -20i64..20, k2 in -20i64..20, l1 in 0u32..=3, l2 in 0u32..=3, s1 in 1u64..27, s2 in 1u64..27, e in 1u32..=3) {
        prop_assume!(s1 % P != 0 && s2 % P != 0);
        let w = weight_point(P, &[BigInt::from(k1), BigInt::from(k2)], &[l1, l2], &[s1, s2], 20).unwrap();
        let (pushed, expected) = pk_pushforward_weight(&w, e).unwrap();
        prop_assert!(same_point(&pushed, &expected.point).unwrap());
        prop_assert_eq!(expected.levels, vec![l1.saturating_sub(e), l2.saturating_sub(e)]);
    }

    #[test]
    fn algebraic_weights_lie_in_gamma(k1 in -40i64..40, k2 in -40i64..40) {
        let w = weight_point(P, &[BigInt::from(k1), BigInt::from(k2)], &[0, 0], &[0, 0], 30).unwrap();
        prop_assert_eq!(weight_in_standard_gamma(&w, 20).unwrap(), Some(true));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn counterexample_runs_stay_integral(u in 1i64..200, stages in 3u32..=5) {
        prop_assume!(u % 3 != 0);
        let g = FormalGroupLaw::multiplicative(P, 4, 40);
        let a = PadicScalar::from_i64(P, 3 * u, 300);
        let s = cex_build(&g, &a, &a, 30, stages).unwrap();
        prop_assert!(s.ledger().iter().all(|l| l.holds()));
        prop_assert!(s.corrections().iter().all(|c| c.valuation().is_none_or(|v| v >= 0)));
        prop_assert!(s.check_invariants().is_ok());
        let report = cex_verify(&s, 30).unwrap();
        prop_assert!(report.all_paths_agree && report.corrections_integral && report.line_cover.holds);
    }

    #[test]
    fn backward_points_remultiply(g1 in 1i64..100, g2 in 1i64..100, t1 in 0u64..9, t2 in 0u64..9, depth in 1u32..=2) {
        let gamma = GroupPoint::new(vec![scalar(g1, 1), scalar(g2, 1)]).unwrap();
        let m = P.pow(depth);
        let b = backward_point(&gamma, depth, &[t1 % m, t2 % m]).unwrap();
        let pushed = pk_pushforward_point(&b.point, depth);
        for (x, g) in pushed.coords.iter().zip(&gamma.coords) {
            let c = x.precision().min(g.precision()) - 2;
            prop_assert!(x.sub(&ExtElem::from_scalar(x.ring(), g)).with_precision(c).is_zero());
        }
    }
}

#[test]
fn law_invariants_at_all_degrees() {
    for d in [8u32, 16, 32] {
        let laws = vec![
            FormalGroupLaw::multiplicative(3, d, 40),
            FormalGroupLaw::new(FormalGroupKind::lubin_tate_standard(3), 3, d, 40).unwrap(),
            FormalGroupLaw::new(FormalGroupKind::Elliptic { a: BigInt::from(1), b: BigInt::from(1) }, 5, d, 40).unwrap(),
        ];
        for g in &laws {
            for (name, holds) in law_invariants(g).unwrap() {
                assert!(holds, "{} D={d}: {name}", g.kind().name());
            }
        }
    }
}

#[test]
fn torsion_valuations_follow_cyclotomic_formula() {
    for p in [3u64, 5] {
        for k in 1..=4u32 {
            let expect = q(1, (p.pow(k - 1) * (p - 1)) as i64);
            assert_eq!(torsion_valuation(p, k), Val::Finite(expect));
            if p.pow(k) <= 81 {
                let ts = torsion_points(p, k, 12).unwrap();
                let primitive = ts.iter().find(|t| t.level == k).unwrap();
                assert_eq!(primitive.point.valuation_val(), Val::Finite(expect));
            }
        }
    }
}

/// Newton-polygon oracle: for `[p](X) - alpha` in `G_m` the root valuations are
/// `v / p` when `v <= p / (p - 1)`, otherwise one root of valuation `v - 1`
/// and `p - 1` roots of valuation `1 / (p - 1)`.
#[test]
fn division_matches_polygon_oracle() {
    for p in [3u64, 5, 7] {
        let g = FormalGroupLaw::multiplicative(p, 8, 20);
        for num in 1..=24i64 {
            let v = q(num, 4);
            let r = division_valuations(&g, v, 1).unwrap();
            let roots = &r.steps[0].root_valuations;
            let pp = p as i64;
            let expect: Vec<_> = if v <= q(pp, pp - 1) {
                vec![v / qi(pp); p as usize]
            } else {
                let mut e = vec![v - qi(1)];
                e.extend(std::iter::repeat_n(q(1, pp - 1), p as usize - 1));
                e
            };
            assert_eq!(roots, &expect, "p={p} v={v}");
            assert_eq!(r.steps[0].holds, v <= qi(2), "p={p} v={v}");
        }
    }
}

#[test]
fn stabilizer_is_a_subgroup() {
    let t = MonomialTable::new(2, 8);
    for a in [1i64, 2, 4] {
        let x = Subscheme::graph_of_mult(P, 8, N, a).unwrap();
        let chart = hensel_parametrize(&x.generators()[0], 1).unwrap();
        let r = stabilizer_torsion(&x, &chart, 2, None).unwrap();
        let order = 9u64;
        let set: std::collections::BTreeSet<_> = r.points.iter().copied().collect();
        for &(u, v) in &r.points {
            assert!(set.contains(&((order - u) % order, (order - v) % order)));
            for &(s, w) in &r.points {
                assert!(set.contains(&((u + s) % order, (v + w) % order)));
            }
        }
        // the graph of [a] is stabilized by (zeta^j, zeta^(a j))
        assert_eq!(r.points.len(), 9);
        // translating by its own stabilizer points keeps it special
        for &(u, v) in &r.points {
            let tors = torsion_points(P, 2, N).unwrap();
            let like = tors[0].point.clone();
            let zeta_pt = |e: u64| tors.iter().find(|tp| tp.exponent == e).unwrap().point.clone();
            let base = GroupPoint { coords: vec![zeta_pt(u), zeta_pt(v)] };
            let h = lift_series(&chart.h, &like).unwrap();
            assert!(subtorus_test(&h, Some(&base)).unwrap().is_special());
        }
        let _ = &t;
    }
}

#[test]
fn forward_hits_follow_the_character() {
    let x = Subscheme::graph_of_mult(P, 8, 40, 2).unwrap();
    let g = [PadicScalar::from_i64(P, 3, 40), PadicScalar::from_i64(P, 3, 40)];
    let r = forward_hits(&x, &g, 60).unwrap();
    let expect: Vec<(u64, u64)> = (0..=30).map(|k| (k, 2 * k)).collect();
    assert_eq!(r.hits, expect);
}

#[test]
fn log_exp_series_roundtrip() {
    let t = MonomialTable::new(1, 10);
    let x = Series::var(&t, 0, P, 60);
    let back = ps_log_exp(&ps_log_exp(&x, LogExp::Log1p).unwrap(), LogExp::Exp).unwrap();
    for k in 1..=10 {
        let c = back.coeff_uni(k);
        let want = if k == 1 { 1 } else { 0 };
        assert!(c.eq_to_precision(&PadicScalar::from_i64(P, want, c.precision())), "degree {k}");
    }
    let _ = ProductGroup::multiplicative(P, 2, 4, 10);
}
