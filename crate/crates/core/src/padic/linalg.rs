//! Dense linear algebra over `Q_p` with valuation-minimizing pivots.

use super::scalar::PadicScalar;
use crate::error::{Error, Result};

type Matrix = Vec<Vec<PadicScalar>>;

/// Position of the entry of least valuation in the trailing block, if any
/// entry is nonzero to precision.
fn best_pivot(m: &Matrix, from: usize, cols: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, i64)> = None;
    for (i, row) in m.iter().enumerate().skip(from) {
        for (j, x) in row.iter().enumerate().take(cols).skip(from) {
            if let Some(v) = x.valuation() {
                if best.is_none_or(|(_, _, bv)| v < bv) {
                    best = Some((i, j, v));
                }
            }
        }
    }
    best.map(|(i, j, _)| (i, j))
}

/// Determinant by Gaussian elimination with full pivoting on valuation.
///
/// When the trailing block vanishes to precision, the result is a zero whose
/// precision bounds the true determinant from below.
pub fn determinant(mut m: Matrix, p: u64) -> PadicScalar {
    let n = m.len();
    if n == 0 {
        return PadicScalar::exact_one(p);
    }
    let mut det = PadicScalar::exact_one(p);
    let mut negate = false;
    for k in 0..n {
        let (pi, pj) = match best_pivot(&m, k, n) {
            Some(x) => x,
            None => {
                // every remaining entry is zero to its precision
                let floor: i64 = (k..n)
                    .map(|i| (k..n).map(|j| m[i][j].precision()).min().unwrap())
                    .sum();
                return &det * &PadicScalar::zero(p, floor);
            }
        };
        if pi != k {
            m.swap(pi, k);
            negate = !negate;
        }
        if pj != k {
            for row in m.iter_mut() {
                row.swap(pj, k);
            }
            negate = !negate;
        }
        let pivot = m[k][k].clone();
        for i in k + 1..n {
            let factor = m[i][k].checked_div(&pivot).expect("pivot is nonzero");
            for j in k + 1..n {
                let t = &factor * &m[k][j];
                m[i][j] = &m[i][j] - &t;
            }
        }
        det = &det * &pivot;
    }
    if negate {
        -det
    } else {
        det
    }
}

/// Solves `m * x = rhs` for square `m`.
pub fn solve(mut m: Matrix, mut rhs: Vec<PadicScalar>) -> Result<Vec<PadicScalar>> {
    let n = m.len();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (pi, pj) = best_pivot(&m, k, n).ok_or_else(|| {
            Error::DivisionByZeroToPrecision(m[k][k].precision())
        })?;
        m.swap(pi, k);
        rhs.swap(pi, k);
        if pj != k {
            for row in m.iter_mut() {
                row.swap(pj, k);
            }
            perm.swap(pj, k);
        }
        let pivot = m[k][k].clone();
        for i in k + 1..n {
            let factor = m[i][k].checked_div(&pivot)?;
            for j in k + 1..n {
                let t = &factor * &m[k][j];
                m[i][j] = &m[i][j] - &t;
            }
            let t = &factor * &rhs[k];
            rhs[i] = &rhs[i] - &t;
        }
    }
    let mut y = vec![PadicScalar::zero(m[0][0].prime(), 0); n];
    for k in (0..n).rev() {
        let mut acc = rhs[k].clone();
        for j in k + 1..n {
            acc = &acc - &(&m[k][j] * &y[j]);
        }
        y[k] = acc.checked_div(&m[k][k])?;
    }
    let mut x = y.clone();
    for (k, &orig) in perm.iter().enumerate() {
        x[orig] = y[k].clone();
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: i64) -> PadicScalar {
        PadicScalar::from_i64(3, x, 30)
    }

    #[test]
    fn small_determinants() {
        let m = vec![vec![s(2), s(1)], vec![s(1), s(5)]];
        assert!(determinant(m, 3).eq_to_precision(&s(9)));
        let m = vec![vec![s(0), s(1), s(0)], vec![s(1), s(0), s(0)], vec![s(0), s(0), s(7)]];
        assert!(determinant(m, 3).eq_to_precision(&s(-7)));
    }

    #[test]
    fn singular_matrix_gives_zero_with_bound() {
        let m = vec![vec![s(3), s(6)], vec![s(1), s(2)]];
        let d = determinant(m, 3);
        assert!(d.is_zero());
        assert!(d.precision() >= 25);
    }

    #[test]
    fn solve_roundtrip() {
        let m = vec![vec![s(3), s(1)], vec![s(1), s(1)]];
        let x = solve(m.clone(), vec![s(5), s(3)]).unwrap();
        assert!(x[0].eq_to_precision(&s(1)));
        assert!(x[1].eq_to_precision(&s(2)));
    }
}
