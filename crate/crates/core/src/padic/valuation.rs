use std::cmp::Ordering;
use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

/// Exact rational used for valuations, slopes and precision bounds.
pub type Q = Ratio<i64>;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(n)
}

/// Renders a rational as `n` or `n/d`.
pub fn q_to_string(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn q_from_str(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let d: i64 = d.trim().parse().ok()?;
            if d == 0 {
                return None;
            }
            Some(Q::new(n.trim().parse().ok()?, d))
        }
        None => Some(qi(s.parse().ok()?)),
    }
}

/// Smallest integer `>= x`.
pub fn q_ceil(x: &Q) -> i64 {
    x.numer().div_ceil(x.denom())
}

/// Largest integer `<= x`.
pub fn q_floor(x: &Q) -> i64 {
    x.numer().div_floor(x.denom())
}

/// A valuation known either exactly or only as a lower bound.
///
/// `AtLeast(c)` is how "zero to certified precision" surfaces: the quantity
/// could not be distinguished from zero, and all we know is `v >= c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Val {
    Finite(Q),
    AtLeast(Q),
}

impl Val {
    pub fn is_finite(&self) -> bool {
        matches!(self, Val::Finite(_))
    }

    pub fn finite(&self) -> Option<Q> {
        match self {
            Val::Finite(v) => Some(*v),
            Val::AtLeast(_) => None,
        }
    }

    /// The number this valuation is known to be at least.
    pub fn lower_bound(&self) -> Q {
        match self {
            Val::Finite(v) | Val::AtLeast(v) => *v,
        }
    }

    /// Minimum in the ultrametric sense, staying honest about bounds.
    pub fn min(self, other: Val) -> Val {
        match (self, other) {
            (Val::Finite(a), Val::Finite(b)) => Val::Finite(a.min(b)),
            (Val::Finite(a), Val::AtLeast(b)) | (Val::AtLeast(b), Val::Finite(a)) => {
                if a < b {
                    Val::Finite(a)
                } else {
                    Val::AtLeast(b)
                }
            }
            (Val::AtLeast(a), Val::AtLeast(b)) => Val::AtLeast(a.min(b)),
        }
    }

    /// Caps a computed valuation by a certified precision bound.
    pub fn certify(self, certified: Q) -> Val {
        match self {
            Val::Finite(v) if v < certified => Val::Finite(v),
            Val::Finite(_) => Val::AtLeast(certified),
            Val::AtLeast(v) => Val::AtLeast(v.min(certified)),
        }
    }

    /// Equality of verdicts: both finite and equal, or both unresolved.
    pub fn same_verdict(&self, other: &Val) -> bool {
        match (self, other) {
            (Val::Finite(a), Val::Finite(b)) => a == b,
            (Val::AtLeast(_), Val::AtLeast(_)) => true,
            _ => false,
        }
    }
}

impl PartialOrd for Val {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Val::Finite(a), Val::Finite(b)) => Some(a.cmp(b)),
            _ => None,
        }
    }
}

impl fmt::Display for Val {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Val::Finite(v) => write!(f, "{}", q_to_string(v)),
            Val::AtLeast(v) => write!(f, "inf>={}", q_to_string(v)),
        }
    }
}

impl Serialize for Val {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Val {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let bad = || serde::de::Error::custom(format!("bad valuation string {s:?}"));
        match s.strip_prefix("inf>=") {
            Some(rest) => q_from_str(rest).map(Val::AtLeast).ok_or_else(bad),
            None => q_from_str(&s).map(Val::Finite).ok_or_else(bad),
        }
    }
}

/// Serde adapter writing a [`Q`] as its exact string form.
pub mod q_serde {
    use super::*;

    pub fn serialize<S: serde::Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&q_to_string(x))
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        q_from_str(&s).ok_or_else(|| serde::de::Error::custom(format!("bad rational {s:?}")))
    }
}

/// Serde adapter for `Vec<Q>`.
pub mod q_vec_serde {
    use super::*;

    pub fn serialize<S: serde::Serializer>(xs: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<String> = xs.iter().map(q_to_string).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<Q>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| q_from_str(s).ok_or_else(|| serde::de::Error::custom(format!("bad rational {s:?}"))))
            .collect()
    }
}

/// `floor(log_p(k))` for `k >= 1`; bounds `v_p(k)` from above.
pub fn log_p_floor(p: u64, k: u64) -> i64 {
    let mut e = 0;
    let mut m = k;
    while m >= p {
        m /= p;
        e += 1;
    }
    e
}

/// Valuation of a machine integer; `None` for zero.
pub fn vp_u64(p: u64, mut k: u64) -> Option<i64> {
    if k == 0 {
        return None;
    }
    let mut v = 0;
    while k % p == 0 {
        k /= p;
        v += 1;
    }
    Some(v)
}

pub fn vp_i64(p: u64, k: i64) -> Option<i64> {
    vp_u64(p, k.unsigned_abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn val_min_keeps_bounds_honest() {
        let a = Val::Finite(q(1, 2));
        let b = Val::AtLeast(qi(3));
        assert_eq!(a.min(b), Val::Finite(q(1, 2)));
        assert_eq!(Val::Finite(qi(4)).min(b), Val::AtLeast(qi(3)));
        assert_eq!(b.min(Val::AtLeast(qi(2))), Val::AtLeast(qi(2)));
    }

    #[test]
    fn rational_strings_roundtrip() {
        for s in ["1/6", "-3/2", "7", "0"] {
            assert_eq!(q_to_string(&q_from_str(s).unwrap()), s);
        }
        let v: Val = serde_json::from_str("\"inf>=17/6\"").unwrap();
        assert_eq!(v, Val::AtLeast(q(17, 6)));
    }

    #[test]
    fn floors_and_ceils() {
        assert_eq!(q_ceil(&q(-1, 2)), 0);
        assert_eq!(q_floor(&q(-1, 2)), -1);
        assert_eq!(q_ceil(&q(7, 3)), 3);
        assert_eq!(log_p_floor(3, 27), 3);
        assert_eq!(log_p_floor(3, 26), 2);
    }
}
