use std::time::Instant;

use padic_fg::counterexample::{cex_build, cex_verify, line_cover_check};
use padic_fg::formal_group::FormalGroupLaw;
use padic_fg::padic::valuation::qi;
use padic_fg::padic::PadicScalar;

fn headline(p: u64) {
    let t = Instant::now();
    let g = FormalGroupLaw::multiplicative(p, 4, 60);
    let a = PadicScalar::from_i64(p, p as i64, 400);
    let s = cex_build(&g, &a, &a, 60, 6).unwrap();
    let r = cex_verify(&s, 60).unwrap();
    assert_eq!(r.residuals.len(), 6);
    assert!(r.residuals.iter().all(|x| x.residual.lower_bound() >= qi(60)));
    assert!(r.corrections_integral);
    assert!(r.all_paths_agree);
    assert!(line_cover_check(s.pairs()).unwrap().holds);
    assert!(s.ledger().iter().all(|l| l.holds()));
    assert!(t.elapsed().as_secs() <= 30, "{:?}", t.elapsed());
}

#[test]
fn six_stages_p3() {
    headline(3);
}

#[test]
fn six_stages_p5() {
    headline(5);
}
