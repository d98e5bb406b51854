use std::time::Instant;

use padic_fg::counterexample::cex_build;
use padic_fg::formal_group::{FormalGroupLaw, GroupPoint};
use padic_fg::padic::PadicScalar;
use padic_fg::series::{MonomialTable, Series};
use padic_fg::subscheme::{chart_at_base, CurveChart};
use padic_fg::weightspace::{classify_weight_closure, special_lambda, ClassifyOptions, WeightVerdict};

const P: u64 = 3;
const N: i64 = 40;

#[test]
fn diagonal_and_double() {
    let t = MonomialTable::new(1, 4);
    let opts = ClassifyOptions { k_max: 20, levels: 2, ..Default::default() };
    let now = Instant::now();
    let c = CurveChart::graph(Series::var(&t, 0, P, N)).unwrap();
    let r = classify_weight_closure(&c, &opts).unwrap();
    println!("{:?} {:?} {:?}", r.hits_by_level, r.verdict, now.elapsed());
    assert_eq!(special_lambda(&r), Some(1));
    let h = Series::from_integer_terms(&t, P, N, &[(vec![1], 2), (vec![2], 1)]).unwrap();
    let r = classify_weight_closure(&CurveChart::graph(h).unwrap(), &opts).unwrap();
    println!("{:?} {:?} {:?}", r.hits_by_level, r.verdict, now.elapsed());
    assert_eq!(special_lambda(&r), Some(2));
}

#[test]
fn counterexample_chart_bounded() {
    let g = FormalGroupLaw::multiplicative(P, 4, 20);
    let a = PadicScalar::from_i64(P, 3, 200);
    let s = cex_build(&g, &a, &a, 20, 3).unwrap();
    let phi = s.phi_series(8);
    let base = GroupPoint::new(vec![PadicScalar::zero(P, phi.ambient_precision()), s.phi()[0].clone()]).unwrap();
    let h = chart_at_base(&phi, &base).unwrap();
    let now = Instant::now();
    let r = classify_weight_closure(&CurveChart::graph(h).unwrap(), &ClassifyOptions { k_max: 20, levels: 2, ..Default::default() }).unwrap();
    println!("{:?} {:?} {:?}", r.hits_by_level, r.verdict, now.elapsed());
    assert_eq!(r.verdict, WeightVerdict::BoundedOrder { m: 0 });
}
