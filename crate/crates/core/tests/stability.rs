use num_bigint::BigInt;

use padic_fg::counterexample::cex_build;
use padic_fg::formal_group::{FormalGroupKind, FormalGroupLaw, Multiplier};
use padic_fg::orbit::{dichotomy_scan, GammaModule, ScanOptions, ScanReport, SigmaSpec};
use padic_fg::padic::{PadicScalar, Val};
use padic_fg::series::{MonomialTable, Series};
use padic_fg::subscheme::{CurveChart, Subscheme};
use padic_fg::weightspace::{classify_weight_closure, ClassifyOptions, WeightVerdict};

const P: u64 = 3;

fn laws(d: u32) -> Vec<FormalGroupLaw> {
    vec![
        FormalGroupLaw::multiplicative(P, d, 30),
        FormalGroupLaw::new(FormalGroupKind::lubin_tate_standard(P), P, d, 30).unwrap(),
        FormalGroupLaw::new(FormalGroupKind::Elliptic { a: BigInt::from(1), b: BigInt::from(1) }, 5, d, 30).unwrap(),
    ]
}

#[test]
fn endomorphisms_compose_and_add() {
    for g in laws(12) {
        for (a, b) in [(2i64, 3i64), (-1, 4), (5, -2), (7, 7)] {
            let ma = g.mult_by_series(&Multiplier::from(a)).unwrap();
            let mb = g.mult_by_series(&Multiplier::from(b)).unwrap();
            let mab = g.mult_by_series(&Multiplier::from(a * b)).unwrap();
            let sum = g.mult_by_series(&Multiplier::from(a + b)).unwrap();
            let name = g.kind().name();
            assert!(ma.compose(&[mb.clone()]).unwrap().eq_to_precision(&mab).unwrap(), "{name}: [{a}][{b}]");
            assert!(g.law().compose(&[ma, mb]).unwrap().eq_to_precision(&sum).unwrap(), "{name}: [{a}]+[{b}]");
        }
    }
}

fn scan(x: &Subscheme) -> ScanReport {
    let gamma = GammaModule::standard(P, 2, 20);
    dichotomy_scan(x, &SigmaSpec::Torsion { levels: 2 }, &gamma, &ScanOptions { cap: 10_000, threshold: 10 }).unwrap()
}

#[test]
fn scan_verdicts_survive_more_precision() {
    for c in [3i64, 6, 9] {
        let lo = scan(&Subscheme::shifted_diagonal(P, 8, 20, c).unwrap());
        let hi = scan(&Subscheme::shifted_diagonal(P, 8, 30, c).unwrap());
        assert_eq!(lo.rows.len(), hi.rows.len());
        for (a, b) in lo.rows.iter().zip(&hi.rows) {
            assert_eq!(a.id, b.id);
            if let Val::Finite(v) = a.distance {
                assert_eq!(b.distance, Val::Finite(v), "c={c} point {}", a.id);
            }
        }
        let floors: Vec<_> = hi.levels.iter().filter(|s| s.level.is_some_and(|l| l >= 1)).filter_map(|s| s.closest).collect();
        let last = floors.last().copied().unwrap();
        assert!(floors.windows(2).all(|w| w[0] >= w[1]), "c={c}: {floors:?}");
        assert!(floors.iter().all(|f| *f >= last));
    }
}

#[test]
fn classify_is_stable_in_k_and_levels() {
    let t = MonomialTable::new(1, 4);
    let diag = CurveChart::graph(Series::var(&t, 0, P, 30)).unwrap();
    let double = CurveChart::graph(Series::from_integer_terms(&t, P, 30, &[(vec![1], 2), (vec![2], 1)]).unwrap()).unwrap();
    let g = FormalGroupLaw::multiplicative(P, 4, 40);
    let a = PadicScalar::from_i64(P, 3, 300);
    let cex = cex_build(&g, &a, &a, 30, 3).unwrap();
    let cex_chart = CurveChart::graph(cex.translated_chart(4).unwrap()).unwrap();
    for chart in [&diag, &double, &cex_chart] {
        let small = classify_weight_closure(chart, &ClassifyOptions { k_max: 10, levels: 1, ..Default::default() }).unwrap();
        let large = classify_weight_closure(chart, &ClassifyOptions { k_max: 20, levels: 2, ..Default::default() }).unwrap();
        assert_eq!(small.verdict, large.verdict);
        assert!(!matches!(large.verdict, WeightVerdict::Inconclusive));
    }
}

#[test]
fn exported_curve_is_not_a_subgroup_translate() {
    for p in [3u64, 5] {
        let g = FormalGroupLaw::multiplicative(p, 4, 60);
        let a = PadicScalar::from_i64(p, p as i64, 400);
        let s = cex_build(&g, &a, &a, 60, 6).unwrap();
        let cert = s.subtorus(8).unwrap();
        assert!(!cert.is_special(), "p={p}");
    }
}
