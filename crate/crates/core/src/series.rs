//! Truncated multivariate power series over p-adic coefficients.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::ring::Ring;
use crate::padic::valuation::{log_p_floor, q_ceil, q_serde, qi, vp_u64, Val, Q};
use crate::padic::{ExtElem, PadicScalar};

/// Coefficient rings a series can live over.
pub trait Coeff: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    fn prime(&self) -> u64;
    /// Zero in the same ring, known to precision `prec`.
    fn zero_like(&self, prec: i64) -> Self;
    fn from_scalar_like(&self, s: &PadicScalar) -> Self;
    fn is_zero(&self) -> bool;
    fn precision(&self) -> i64;
    /// Cheap lower bound on the valuation; `None` when zero to precision.
    fn val_floor(&self) -> Option<i64>;
    /// Exact valuation, or the certified bound when zero.
    fn val(&self) -> Val;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale(&self, s: &PadicScalar) -> Self;
    fn div_scalar(&self, s: &PadicScalar) -> Result<Self>;
    fn inverse(&self) -> Result<Self>;
    fn with_precision(&self, prec: i64) -> Self;
    /// Coefficient precision implied by an element valuation bound `c`.
    fn coeff_floor(&self, c: Q) -> i64;
    /// Wire form: one record for a scalar, one per basis coefficient otherwise.
    fn records(&self) -> Vec<crate::padic::ScalarRecord>;
    /// The element as a `Q_p` scalar when it lies in the base field to precision.
    fn to_scalar(&self) -> Option<PadicScalar>;
    fn one_like(&self) -> Self {
        self.from_scalar_like(&PadicScalar::exact_one(self.prime()))
    }
    fn pow_big(&self, e: &num_bigint::BigUint) -> Self {
        let mut acc = self.one_like();
        for i in (0..e.bits()).rev() {
            acc = acc.mul(&acc);
            if e.bit(i) {
                acc = acc.mul(self);
            }
        }
        acc
    }
}

impl Coeff for PadicScalar {
    fn prime(&self) -> u64 {
        PadicScalar::prime(self)
    }
    fn zero_like(&self, prec: i64) -> Self {
        PadicScalar::zero(PadicScalar::prime(self), prec)
    }
    fn from_scalar_like(&self, s: &PadicScalar) -> Self {
        s.clone()
    }
    fn is_zero(&self) -> bool {
        PadicScalar::is_zero(self)
    }
    fn precision(&self) -> i64 {
        PadicScalar::precision(self)
    }
    fn val_floor(&self) -> Option<i64> {
        self.valuation()
    }
    fn val(&self) -> Val {
        match self.valuation() {
            Some(v) => Val::Finite(qi(v)),
            None => Val::AtLeast(qi(PadicScalar::precision(self))),
        }
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, s: &PadicScalar) -> Self {
        self * s
    }
    fn div_scalar(&self, s: &PadicScalar) -> Result<Self> {
        self.checked_div(s)
    }
    fn inverse(&self) -> Result<Self> {
        PadicScalar::inverse(self)
    }
    fn with_precision(&self, prec: i64) -> Self {
        PadicScalar::with_precision(self, prec)
    }
    fn coeff_floor(&self, c: Q) -> i64 {
        q_ceil(&c)
    }
    fn pow_big(&self, e: &num_bigint::BigUint) -> Self {
        PadicScalar::pow_big(self, e)
    }
    fn records(&self) -> Vec<crate::padic::ScalarRecord> {
        vec![self.to_record()]
    }
    fn to_scalar(&self) -> Option<PadicScalar> {
        Some(self.clone())
    }
}

impl Coeff for ExtElem {
    fn records(&self) -> Vec<crate::padic::ScalarRecord> {
        self.to_records()
    }
    fn to_scalar(&self) -> Option<PadicScalar> {
        self.as_scalar()
    }
    fn prime(&self) -> u64 {
        ExtElem::prime(self)
    }
    fn zero_like(&self, prec: i64) -> Self {
        ExtElem::zero_at(self.ring(), prec)
    }
    fn from_scalar_like(&self, s: &PadicScalar) -> Self {
        ExtElem::from_scalar(self.ring(), s)
    }
    fn is_zero(&self) -> bool {
        ExtElem::is_zero(self)
    }
    fn precision(&self) -> i64 {
        ExtElem::precision(self)
    }
    fn val_floor(&self) -> Option<i64> {
        self.min_coeff_valuation()
    }
    fn val(&self) -> Val {
        self.valuation_val()
    }
    fn add(&self, o: &Self) -> Self {
        ExtElem::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        ExtElem::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        ExtElem::mul(self, o)
    }
    fn neg(&self) -> Self {
        ExtElem::neg(self)
    }
    fn scale(&self, s: &PadicScalar) -> Self {
        ExtElem::scale(self, s)
    }
    fn div_scalar(&self, s: &PadicScalar) -> Result<Self> {
        let vs = match s.valuation() {
            Some(v) => v,
            None => return Err(Error::DivisionByZeroToPrecision(s.precision())),
        };
        let inv = PadicScalar::one(s.prime(), ExtElem::precision(self) + vs.abs() + 1).checked_div(s)?;
        Ok(ExtElem::scale(self, &inv))
    }
    fn inverse(&self) -> Result<Self> {
        ExtElem::inverse(self)
    }
    fn with_precision(&self, prec: i64) -> Self {
        ExtElem::with_precision(self, prec)
    }
    fn coeff_floor(&self, c: Q) -> i64 {
        self.ring().coefficient_floor(c)
    }
}

/// The integer `k` carried with enough precision not to limit operands of
/// precision `prec`.
pub fn int_like(p: u64, k: i64, prec: i64) -> PadicScalar {
    PadicScalar::from_i64(p, k, prec.max(1) + 2 + log_p_floor(p, k.unsigned_abs().max(1)))
}

/// Exponent vectors of total degree at most `D`, in graded order.
#[derive(Debug)]
pub struct MonomialTable {
    n: usize,
    d: u32,
    exps: Vec<Vec<u32>>,
    degs: Vec<u32>,
    keys: Vec<usize>,
    dense: Option<Vec<u32>>,
    sparse: HashMap<usize, u32>,
    deg_start: Vec<usize>,
}

const DENSE_LIMIT: usize = 1 << 22;

fn push_degree(n: usize, t: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if prefix.len() + 1 == n {
        let used: u32 = prefix.iter().sum();
        prefix.push(t - used);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    let used: u32 = prefix.iter().sum();
    for e in (0..=t - used).rev() {
        prefix.push(e);
        push_degree(n, t, prefix, out);
        prefix.pop();
    }
}

impl MonomialTable {
    pub fn new(n: usize, d: u32) -> Arc<MonomialTable> {
        assert!(n >= 1, "series need at least one variable");
        let mut exps = Vec::new();
        let mut deg_start = Vec::with_capacity(d as usize + 2);
        for t in 0..=d {
            deg_start.push(exps.len());
            push_degree(n, t, &mut Vec::new(), &mut exps);
        }
        deg_start.push(exps.len());
        let base = d as usize + 1;
        let keys: Vec<usize> = exps
            .iter()
            .map(|e| e.iter().rev().fold(0usize, |acc, &x| acc * base + x as usize))
            .collect();
        let degs = exps.iter().map(|e| e.iter().sum()).collect();
        let span = base.checked_pow(n as u32).unwrap_or(usize::MAX);
        let (dense, sparse) = if span <= DENSE_LIMIT {
            let mut v = vec![u32::MAX; span];
            for (i, &k) in keys.iter().enumerate() {
                v[k] = i as u32;
            }
            (Some(v), HashMap::new())
        } else {
            (None, keys.iter().enumerate().map(|(i, &k)| (k, i as u32)).collect())
        };
        Arc::new(MonomialTable { n, d, exps, degs, keys, dense, sparse, deg_start })
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exps(&self, i: usize) -> &[u32] {
        &self.exps[i]
    }

    pub fn deg(&self, i: usize) -> u32 {
        self.degs[i]
    }

    fn by_key(&self, key: usize) -> usize {
        match &self.dense {
            Some(v) => v[key] as usize,
            None => self.sparse[&key] as usize,
        }
    }

    pub fn index(&self, exps: &[u32]) -> Option<usize> {
        if exps.len() != self.n || exps.iter().sum::<u32>() > self.d {
            return None;
        }
        let base = self.d as usize + 1;
        let key = exps.iter().rev().fold(0usize, |acc, &x| acc * base + x as usize);
        Some(self.by_key(key))
    }

    fn same_shape(&self, other: &MonomialTable) -> bool {
        self.n == other.n && self.d == other.d
    }
}

/// Bound on the coefficients beyond the truncation degree: the coefficient
/// of a degree-`k` monomial has valuation at least
/// `floor - slope * k - (log ? floor(log_p k) : 0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailBound {
    #[serde(with = "q_serde")]
    pub floor: Q,
    #[serde(with = "q_serde")]
    pub slope: Q,
    pub log: bool,
}

impl TailBound {
    pub const INTEGRAL: TailBound = TailBound { floor: Q::new_raw(0, 1), slope: Q::new_raw(0, 1), log: false };

    pub fn constant(floor: Q) -> Self {
        TailBound { floor, slope: qi(0), log: false }
    }

    fn is_flat(&self) -> bool {
        self.slope == qi(0) && !self.log
    }

    fn join(a: Option<TailBound>, b: Option<TailBound>) -> Option<TailBound> {
        let (a, b) = (a?, b?);
        Some(TailBound { floor: a.floor.min(b.floor), slope: a.slope.max(b.slope), log: a.log || b.log })
    }

    /// Least valuation of `coeff_k * x^k` over `k > d` when `v(x) >= v`,
    /// or `None` when the terms do not tend to zero.
    pub fn evaluation_bound(&self, p: u64, d: u32, v: Q) -> Option<Q> {
        let rate = v - self.slope;
        if rate <= qi(0) {
            return None;
        }
        let k0 = d as i64 + 1;
        if !self.log {
            return Some(rate * qi(k0) + self.floor);
        }
        // min over k > d of k * rate - floor(log_p k), attained at powers of p
        let mut e = log_p_floor(p, k0 as u64);
        let mut best = rate * qi(k0) - qi(e);
        let mut k: i64 = (p as i64).pow(e as u32 + 1);
        e += 1;
        loop {
            let val = rate * qi(k) - qi(e);
            if val < best {
                best = val;
            } else if rate * qi(k) * qi(p as i64 - 1) > qi(1) {
                break;
            }
            k = match k.checked_mul(p as i64) {
                Some(x) => x,
                None => break,
            };
            e += 1;
        }
        Some(best + self.floor)
    }
}

/// A power series in `n` variables known modulo total degree `D + 1`.
#[derive(Clone)]
pub struct TruncatedSeries<C: Coeff> {
    table: Arc<MonomialTable>,
    coeffs: Vec<C>,
    zero: C,
    exact: bool,
    tail: Option<TailBound>,
}

/// Value of a series at a point with its certified precision (a valuation bound).
#[derive(Clone, Debug)]
pub struct Evaluation<C> {
    pub value: C,
    pub certified: Q,
}

impl<C: Coeff> Evaluation<C> {
    /// Valuation of the value, capped by the certified bound.
    pub fn val(&self) -> Val {
        self.value.val().certify(self.certified)
    }
}

impl<C: Coeff> TruncatedSeries<C> {
    pub fn zero(table: &Arc<MonomialTable>, zero: &C) -> Self {
        TruncatedSeries {
            table: table.clone(),
            coeffs: vec![zero.clone(); table.len()],
            zero: zero.clone(),
            exact: true,
            tail: Some(TailBound::INTEGRAL),
        }
    }

    pub fn constant(table: &Arc<MonomialTable>, c: &C) -> Self {
        let mut s = Self::zero(table, &c.zero_like(c.precision()));
        s.coeffs[0] = c.clone();
        s
    }

    /// The coordinate variable `X_{i+1}`, with unit coefficient `one`.
    pub fn variable(table: &Arc<MonomialTable>, i: usize, one: &C) -> Self {
        let mut s = Self::zero(table, &one.zero_like(one.precision()));
        if table.d >= 1 {
            let mut e = vec![0; table.n];
            e[i] = 1;
            let idx = table.index(&e).unwrap();
            s.coeffs[idx] = one.clone();
        } else {
            s.exact = false;
        }
        s
    }

    /// Series from explicit terms; terms above degree `D` are dropped and
    /// make the result inexact.
    pub fn from_terms(table: &Arc<MonomialTable>, zero: &C, terms: &[(Vec<u32>, C)]) -> Result<Self> {
        let mut s = Self::zero(table, zero);
        for (e, c) in terms {
            if e.len() != table.n {
                return Err(Error::VariableMismatch(e.len(), table.n));
            }
            match table.index(e) {
                Some(i) => s.coeffs[i] = s.coeffs[i].add(c),
                None => {
                    if !c.is_zero() {
                        s.exact = false;
                    }
                }
            }
        }
        Ok(s)
    }

    /// Univariate series from coefficients `c_0, c_1, ...`.
    pub fn from_univariate(table: &Arc<MonomialTable>, zero: &C, cs: &[C]) -> Result<Self> {
        if table.n != 1 {
            return Err(Error::VariableMismatch(1, table.n));
        }
        let terms: Vec<(Vec<u32>, C)> = cs.iter().enumerate().map(|(k, c)| (vec![k as u32], c.clone())).collect();
        Self::from_terms(table, zero, &terms)
    }

    pub fn table(&self) -> &Arc<MonomialTable> {
        &self.table
    }

    pub fn nvars(&self) -> usize {
        self.table.n
    }

    pub fn degree(&self) -> u32 {
        self.table.d
    }

    pub fn prime(&self) -> u64 {
        self.zero.prime()
    }

    pub fn zero_template(&self) -> &C {
        &self.zero
    }

    /// Ambient precision: absent terms are zero to this precision.
    pub fn ambient_precision(&self) -> i64 {
        self.zero.precision()
    }

    /// True when the series has no terms beyond degree `D`.
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn tail(&self) -> Option<TailBound> {
        if self.exact {
            None
        } else {
            self.tail
        }
    }

    pub fn set_inexact(&mut self, tail: Option<TailBound>) {
        self.exact = false;
        self.tail = tail;
    }

    pub fn coeff_at(&self, i: usize) -> &C {
        &self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeff(&self, exps: &[u32]) -> Option<&C> {
        self.table.index(exps).map(|i| &self.coeffs[i])
    }

    /// Coefficient of `X^k` in a univariate series.
    pub fn coeff_uni(&self, k: u32) -> &C {
        assert_eq!(self.table.n, 1);
        &self.coeffs[k as usize]
    }

    pub fn constant_term(&self) -> &C {
        &self.coeffs[0]
    }

    pub fn set_coeff(&mut self, exps: &[u32], c: C) {
        let i = self.table.index(exps).expect("exponent within truncation");
        self.coeffs[i] = c;
    }

    /// Nonzero terms in graded order.
    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &C)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (self.table.exps(i), c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Coeff::is_zero)
    }

    /// Least coefficient precision, including the ambient one.
    pub fn min_precision(&self) -> i64 {
        self.coeffs.iter().map(Coeff::precision).min().unwrap().min(self.zero.precision())
    }

    /// Largest degree carrying a nonzero coefficient.
    pub fn max_degree(&self) -> Option<u32> {
        self.coeffs.iter().enumerate().rev().find(|(_, c)| !c.is_zero()).map(|(i, _)| self.table.deg(i))
    }

    /// Lower bound on the valuation of every stored coefficient.
    pub fn stored_floor(&self) -> Q {
        self.coeffs
            .iter()
            .map(|c| c.val_floor().map(qi).unwrap_or_else(|| qi(c.precision())))
            .min()
            .unwrap()
    }

    /// Lower bound on every coefficient, including those beyond `D`.
    pub fn global_floor(&self) -> Option<Q> {
        let s = self.stored_floor();
        if self.exact {
            return Some(s);
        }
        match self.tail {
            Some(t) if t.is_flat() => Some(s.min(t.floor)),
            _ => None,
        }
    }

    /// True when every stored coefficient has valuation at least 0.
    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.val_floor().is_none_or(|v| v >= 0))
    }

    pub fn with_precision(&self, prec: i64) -> Self {
        let mut s = self.clone();
        s.coeffs = s.coeffs.iter().map(|c| c.with_precision(prec)).collect();
        s.zero = s.zero.with_precision(prec);
        s
    }

    pub fn map_coeffs<D: Coeff>(&self, zero: &D, f: impl FnMut(&C) -> D) -> TruncatedSeries<D> {
        TruncatedSeries {
            table: self.table.clone(),
            coeffs: self.coeffs.iter().map(f).collect(),
            zero: zero.clone(),
            exact: self.exact,
            tail: self.tail,
        }
    }

    /// Drops every term above degree `d`.
    pub fn truncate(&self, d: u32) -> Self {
        if d >= self.table.d {
            return self.clone();
        }
        let table = MonomialTable::new(self.table.n, d);
        let coeffs: Vec<C> = self.coeffs[..table.len()].to_vec();
        let dropped = self.coeffs[table.len()..].iter().any(|c| !c.is_zero());
        let tail = if dropped || !self.exact { self.global_floor().map(TailBound::constant) } else { self.tail };
        TruncatedSeries { table, coeffs, zero: self.zero.clone(), exact: self.exact && !dropped, tail }
    }

    /// Re-embeds an exact series at a larger truncation degree.
    pub fn extend(&self, d: u32) -> Self {
        if d <= self.table.d {
            return self.truncate(d);
        }
        let table = MonomialTable::new(self.table.n, d);
        let mut coeffs = vec![self.zero.clone(); table.len()];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[table.index(self.table.exps(i)).unwrap()] = c.clone();
        }
        TruncatedSeries { table, coeffs, zero: self.zero.clone(), exact: self.exact, tail: self.tail }
    }

    fn aligned(&self, other: &Self) -> Result<(Self, Self)> {
        if self.table.n != other.table.n {
            return Err(Error::VariableMismatch(self.table.n, other.table.n));
        }
        if self.table.d == other.table.d {
            return Ok((self.clone(), other.clone()));
        }
        let d = self.table.d.min(other.table.d);
        Ok((self.truncate(d), other.truncate(d)))
    }

    fn zip(&self, other: &Self, f: impl Fn(&C, &C) -> C) -> Result<Self> {
        let (a, b) = if Arc::ptr_eq(&self.table, &other.table) || self.table.same_shape(&other.table) {
            (self.clone(), other.clone())
        } else {
            self.aligned(other)?
        };
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| f(x, y)).collect();
        let zp = a.zero.precision().min(b.zero.precision());
        let tail = match (a.exact, b.exact) {
            (true, true) => Some(TailBound::INTEGRAL),
            (true, false) => b.tail,
            (false, true) => a.tail,
            (false, false) => TailBound::join(a.tail, b.tail),
        };
        Ok(TruncatedSeries { table: a.table.clone(), coeffs, zero: a.zero.zero_like(zp), exact: a.exact && b.exact, tail })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |x, y| x.add(y))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |x, y| x.sub(y))
    }

    pub fn neg(&self) -> Self {
        let mut s = self.clone();
        s.coeffs = s.coeffs.iter().map(Coeff::neg).collect();
        s
    }

    pub fn scale(&self, k: &PadicScalar) -> Self {
        let mut s = self.clone();
        s.coeffs = s.coeffs.iter().map(|c| c.scale(k)).collect();
        let v = k.valuation().unwrap_or(k.precision());
        s.zero = s.zero.zero_like(s.zero.precision() + v.min(0));
        if let Some(t) = s.tail.as_mut() {
            t.floor += qi(v);
        }
        s
    }

    pub fn mul_coeff(&self, k: &C) -> Self {
        let mut s = self.clone();
        s.coeffs = s.coeffs.iter().map(|c| c.mul(k)).collect();
        let v = k.val_floor().unwrap_or(k.precision());
        s.zero = s.zero.zero_like(s.zero.precision() + v.min(0));
        if let Some(t) = s.tail.as_mut() {
            t.floor += qi(v);
        }
        s
    }

    pub fn add_constant(&self, c: &C) -> Self {
        let mut s = self.clone();
        s.coeffs[0] = s.coeffs[0].add(c);
        s
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let (a, b) = if self.table.same_shape(&other.table) {
            (self.clone(), other.clone())
        } else {
            self.aligned(other)?
        };
        let table = a.table.clone();
        let d = table.d;
        // zeros are skipped below; their error enters through a per-degree bound
        let amb_deg = zero_error_by_degree(&a, &b);
        let amb = amb_deg.iter().copied().min().unwrap();
        let zero = a.zero.zero_like(amb);
        let mut out: Vec<Option<C>> = vec![None; table.len()];
        let live_a: Vec<usize> = (0..table.len()).filter(|&i| !a.coeffs[i].is_zero()).collect();
        let live_b: Vec<usize> = (0..table.len()).filter(|&j| !b.coeffs[j].is_zero()).collect();
        let mut truncated = false;
        for &i in &live_a {
            let di = table.degs[i];
            let ca = &a.coeffs[i];
            for &j in &live_b {
                let dj = table.degs[j];
                if di + dj > d {
                    if !ca.is_zero() && !b.coeffs[j].is_zero() {
                        truncated = true;
                    }
                    continue;
                }
                let k = table.by_key(table.keys[i] + table.keys[j]);
                let t = ca.mul(&b.coeffs[j]);
                out[k] = Some(match out[k].take() {
                    None => t,
                    Some(acc) => acc.add(&t),
                });
            }
        }
        let coeffs: Vec<C> = out
            .into_iter()
            .enumerate()
            .map(|(i, c)| {
                let cap = amb_deg[table.degs[i] as usize];
                match c {
                    Some(c) => c.with_precision(cap),
                    None => zero.zero_like(cap),
                }
            })
            .collect();
        let exact = a.exact && b.exact && !truncated;
        let tail = if exact {
            Some(TailBound::INTEGRAL)
        } else {
            match (a.global_floor(), b.global_floor()) {
                (Some(x), Some(y)) => Some(TailBound::constant(x + y)),
                _ => None,
            }
        };
        Ok(TruncatedSeries { table, coeffs, zero, exact, tail })
    }

    pub fn pow(&self, e: u32) -> Result<Self> {
        let one = self.zero.from_scalar_like(&PadicScalar::exact_one(self.prime())).with_precision(self.min_precision().max(1));
        let mut acc = Self::constant(&self.table, &one);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// `f(g_1, ..., g_n)`; every `g_i` must have zero constant term.
    pub fn compose(&self, args: &[Self]) -> Result<Self> {
        for g in args {
            if !g.constant_term().is_zero() {
                return Err(Error::NonzeroConstantTerm);
            }
        }
        self.compose_inner(args)
    }

    /// `f(g_1, ..., g_n)` where constant terms of positive valuation are
    /// allowed; coefficients of an inexact `f` lose the precision that its
    /// dropped terms could contribute at low degree.
    pub fn compose_shifted(&self, args: &[Self]) -> Result<Self> {
        let mut vc: Option<Q> = None;
        for g in args {
            let c = g.constant_term();
            if c.is_zero() {
                continue;
            }
            match c.val() {
                Val::Finite(v) if v > qi(0) => vc = Some(vc.map_or(v, |w: Q| w.min(v))),
                Val::Finite(_) => return Err(Error::NonzeroConstantTerm),
                Val::AtLeast(_) => {}
            }
        }
        let mut out = self.compose_inner(args)?;
        if let (Some(vc), false) = (vc, self.exact) {
            let tf = match self.tail {
                Some(t) if t.is_flat() => t.floor,
                _ => return Err(Error::TailTooShort { got: "unbounded tail".into(), wanted: "flat tail bound".into() }),
            };
            let d = out.table.d as i64;
            for i in 0..out.coeffs.len() {
                let k = out.table.degs[i] as i64;
                let cap = out.coeffs[i].coeff_floor(vc * qi(d + 1 - k) + tf);
                out.coeffs[i] = out.coeffs[i].with_precision(cap);
            }
            let cap0 = out.zero.coeff_floor(vc + tf);
            out.zero = out.zero.zero_like(out.zero.precision().min(cap0));
        }
        Ok(out)
    }

    fn compose_inner(&self, args: &[Self]) -> Result<Self> {
        if args.len() != self.table.n {
            return Err(Error::VariableMismatch(args.len(), self.table.n));
        }
        let target = args[0].table.clone();
        for g in args {
            if !g.table.same_shape(&target) {
                return Err(Error::VariableMismatch(g.table.n, target.n));
            }
        }
        let zero = args[0].zero.zero_like(args.iter().map(|g| g.zero.precision()).min().unwrap().min(self.zero.precision()));
        let n = self.table.n;
        let maxdeg = self.table.d.min(target.d.max(self.max_degree().unwrap_or(0)));
        // powers of the last argument, reused by every inner sum
        let last = &args[n - 1];
        let one = zero.from_scalar_like(&PadicScalar::exact_one(self.prime()));
        let mut pows: Vec<TruncatedSeries<C>> = vec![TruncatedSeries::constant(&target, &one)];
        for k in 1..=maxdeg {
            let next = pows[k as usize - 1].mul(last)?;
            pows.push(next);
        }
        let terms: Vec<(Vec<u32>, C)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !(c.is_zero() && c.precision() >= self.zero.precision()))
            .map(|(i, c)| (self.table.exps(i).to_vec(), c.clone()))
            .collect();
        let mut out = compose_rec(&terms, 0, args, &pows, &target, &zero)?;
        out.exact = out.exact && self.exact;
        if !out.exact {
            let arg_ok = args.iter().all(|g| g.global_floor().is_some_and(|f| f >= qi(0)));
            out.tail = match (self.global_floor(), arg_ok) {
                (Some(f), true) => {
                    let computed = out.tail.filter(|t| t.is_flat()).map(|t| t.floor);
                    Some(TailBound::constant(computed.map_or(f, |c| c.min(f))))
                }
                _ => None,
            };
        }
        Ok(out)
    }

    /// Value at a point of the open unit polydisk with certified precision
    /// `min(propagated precision, tail bound)`.
    pub fn evaluate(&self, point: &[C]) -> Result<Evaluation<C>> {
        if point.len() != self.table.n {
            return Err(Error::VariableMismatch(point.len(), self.table.n));
        }
        let mut vmin: Option<Q> = None;
        for x in point {
            let v = match x.val() {
                Val::Finite(v) => {
                    if v <= qi(0) {
                        return Err(Error::NotInOpenDisk(crate::padic::valuation::q_to_string(&v)));
                    }
                    v
                }
                Val::AtLeast(v) => v.max(qi(1)),
            };
            vmin = Some(vmin.map_or(v, |w: Q| w.min(v)));
        }
        let vmin = vmin.unwrap();
        let d = self.table.d;
        let value = if self.table.n == 1 {
            let x = &point[0];
            let mut acc = self.coeffs[d as usize].clone();
            for k in (0..d as usize).rev() {
                acc = acc.mul(x).add(&self.coeffs[k]);
            }
            acc
        } else {
            let pows: Vec<Vec<C>> = point
                .iter()
                .map(|x| {
                    let mut v = vec![x.from_scalar_like(&PadicScalar::exact_one(x.prime()))];
                    for k in 1..=d as usize {
                        let nx = v[k - 1].mul(x);
                        v.push(nx);
                    }
                    v
                })
                .collect();
            let mut acc = point[0].zero_like(self.zero.precision());
            for (i, c) in self.coeffs.iter().enumerate() {
                if c.is_zero() && c.precision() >= self.zero.precision() {
                    continue;
                }
                let e = self.table.exps(i);
                let mut m: Option<C> = None;
                for (j, &ej) in e.iter().enumerate() {
                    if ej > 0 {
                        m = Some(match m {
                            None => pows[j][ej as usize].clone(),
                            Some(t) => t.mul(&pows[j][ej as usize]),
                        });
                    }
                }
                let term = match m {
                    None => c.clone(),
                    Some(t) => t.mul(c),
                };
                acc = acc.add(&term);
            }
            acc
        };
        let mut certified = qi(value.precision()).min(qi(self.zero.precision()));
        if !self.exact {
            match self.tail.and_then(|t| t.evaluation_bound(self.prime(), d, vmin)) {
                Some(b) => certified = certified.min(b),
                None => {
                    return Err(Error::TailTooShort { got: "unbounded".into(), wanted: "convergent tail".into() });
                }
            }
        }
        Ok(Evaluation { value, certified })
    }

    /// `d/dX_i`, returned at truncation degree `D - 1`.
    pub fn derivative(&self, i: usize) -> Self {
        let d = self.table.d.saturating_sub(1);
        let table = MonomialTable::new(self.table.n, d);
        let mut coeffs = vec![self.zero.clone(); table.len()];
        for (j, c) in self.coeffs.iter().enumerate() {
            let e = self.table.exps(j);
            if e[i] == 0 || self.table.degs[j] == 0 {
                continue;
            }
            let mut f = e.to_vec();
            f[i] -= 1;
            if let Some(idx) = table.index(&f) {
                coeffs[idx] = c.scale(&int_like(self.prime(), e[i] as i64, c.precision()));
            }
        }
        let tail = match self.tail {
            Some(t) if !self.exact => Some(TailBound { floor: t.floor - t.slope, slope: t.slope, log: t.log }),
            _ => Some(TailBound::INTEGRAL),
        };
        TruncatedSeries { table, coeffs, zero: self.zero.clone(), exact: self.exact, tail }
    }

    /// `integral dX_i` with zero constant of integration, at degree `D + 1`.
    pub fn integrate(&self, i: usize) -> Result<Self> {
        let table = MonomialTable::new(self.table.n, self.table.d + 1);
        let zp = self.zero.precision() - log_p_floor(self.prime(), self.table.d as u64 + 1);
        let mut coeffs = vec![self.zero.zero_like(zp); table.len()];
        for (j, c) in self.coeffs.iter().enumerate() {
            let mut e = self.table.exps(j).to_vec();
            e[i] += 1;
            let k = int_like(self.prime(), e[i] as i64, c.precision());
            coeffs[table.index(&e).unwrap()] = c.div_scalar(&k)?;
        }
        let tail = if self.exact {
            Some(TailBound::INTEGRAL)
        } else {
            self.tail.map(|t| TailBound { floor: t.floor, slope: t.slope, log: true })
        };
        Ok(TruncatedSeries { table, coeffs, zero: self.zero.zero_like(zp), exact: self.exact, tail })
    }

    /// Multiplicative inverse of a series with invertible constant term.
    pub fn inverse(&self) -> Result<Self> {
        let c0 = self.constant_term().inverse()?;
        let mut u = Self::constant(&self.table, &c0);
        u.exact = false;
        u.tail = self.global_floor().map(|_| TailBound::INTEGRAL);
        let two = self.zero.from_scalar_like(&int_like(self.prime(), 2, self.min_precision()));
        let steps = 64 - (self.table.d as u64 + 1).leading_zeros() + 1;
        for _ in 0..steps {
            let fu = self.mul(&u)?;
            let corr = fu.neg().add_constant(&two);
            u = u.mul(&corr)?;
        }
        let lo = c0.val_floor().map(qi).unwrap_or(qi(0));
        u.exact = false;
        u.tail = match self.global_floor() {
            Some(f) if f >= qi(0) && lo >= qi(0) => Some(TailBound::INTEGRAL),
            _ => None,
        };
        Ok(u)
    }

    pub fn eq_to_precision(&self, other: &Self) -> Result<bool> {
        Ok(self.sub(other)?.is_zero())
    }

    /// Least valuation among nonzero coefficients of exact total degree `k`.
    pub fn degree_part_floor(&self, k: u32) -> Option<i64> {
        let a = self.table.deg_start[k as usize];
        let b = self.table.deg_start[k as usize + 1];
        self.coeffs[a..b].iter().filter_map(Coeff::val_floor).min()
    }
}

/// Per total degree `k`, the precision lost to zero coefficients of either
/// factor: `min` over `i + j = k` of `prec(zero_a at i) + floor(b at j)` and
/// symmetrically, with floors capped at 0.
fn zero_error_by_degree<C: Coeff>(a: &TruncatedSeries<C>, b: &TruncatedSeries<C>) -> Vec<i64> {
    let d = a.table.d as usize;
    let hi = a.zero.precision().max(b.zero.precision());
    let profile = |s: &TruncatedSeries<C>| {
        let mut z = vec![i64::MAX; d + 1];
        let mut f = vec![0i64; d + 1];
        for (i, c) in s.coeffs.iter().enumerate() {
            let k = s.table.degs[i] as usize;
            let floor = if c.is_zero() {
                z[k] = z[k].min(c.precision());
                c.precision()
            } else {
                c.val_floor().unwrap_or(c.precision())
            };
            f[k] = f[k].min(floor);
        }
        (z, f)
    };
    let (za, fa) = profile(a);
    let (zb, fb) = profile(b);
    let mut out = vec![hi; d + 1];
    for i in 0..=d {
        for j in 0..=d - i {
            if za[i] != i64::MAX {
                out[i + j] = out[i + j].min(za[i].saturating_add(fb[j]));
            }
            if zb[j] != i64::MAX {
                out[i + j] = out[i + j].min(zb[j].saturating_add(fa[i]));
            }
        }
    }
    out
}

fn compose_rec<C: Coeff>(
    terms: &[(Vec<u32>, C)],
    var: usize,
    args: &[TruncatedSeries<C>],
    last_pows: &[TruncatedSeries<C>],
    target: &Arc<MonomialTable>,
    zero: &C,
) -> Result<TruncatedSeries<C>> {
    let n = args.len();
    if var == n - 1 {
        let mut acc = TruncatedSeries::zero(target, zero);
        let mut acc_exact = true;
        for (e, c) in terms {
            let k = e[var] as usize;
            if k >= last_pows.len() {
                if !c.is_zero() {
                    acc_exact = false;
                }
                continue;
            }
            let pw = &last_pows[k];
            let lifted = c.clone();
            let mut term = pw.clone();
            term.coeffs = term.coeffs.iter().map(|x| x.mul(&lifted)).collect();
            acc = acc.add(&term)?;
        }
        if !acc_exact {
            acc.exact = false;
            acc.tail = None;
        }
        return Ok(acc);
    }
    let mut groups: std::collections::BTreeMap<u32, Vec<(Vec<u32>, C)>> = std::collections::BTreeMap::new();
    for t in terms {
        groups.entry(t.0[var]).or_default().push(t.clone());
    }
    let top = match groups.keys().next_back() {
        Some(&k) => k,
        None => return Ok(TruncatedSeries::zero(target, zero)),
    };
    let mut acc = TruncatedSeries::zero(target, zero);
    for e in (0..=top).rev() {
        if e != top {
            acc = acc.mul(&args[var])?;
        }
        if let Some(g) = groups.get(&e) {
            let inner = compose_rec(g, var + 1, args, last_pows, target, zero)?;
            acc = acc.add(&inner)?;
        }
    }
    Ok(acc)
}

impl<C: Coeff> fmt::Debug for TruncatedSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Series(n={}, D={}, exact={}) [", self.table.n, self.table.d, self.exact)?;
        for (e, c) in self.terms() {
            write!(f, " {:?}:{:?}", e, c)?;
        }
        write!(f, " ]")
    }
}

pub type Series = TruncatedSeries<PadicScalar>;
pub type ExtSeries = TruncatedSeries<ExtElem>;

impl Series {
    pub fn zero_scalar(table: &Arc<MonomialTable>, p: u64, prec: i64) -> Self {
        Self::zero(table, &PadicScalar::zero(p, prec))
    }

    pub fn var(table: &Arc<MonomialTable>, i: usize, p: u64, prec: i64) -> Self {
        Self::variable(table, i, &PadicScalar::one(p, prec))
    }

    /// Integer-coefficient polynomial; `terms` pairs exponents with integers.
    pub fn from_integer_terms(table: &Arc<MonomialTable>, p: u64, prec: i64, terms: &[(Vec<u32>, i64)]) -> Result<Self> {
        let t: Vec<(Vec<u32>, PadicScalar)> =
            terms.iter().map(|(e, c)| (e.clone(), PadicScalar::from_i64(p, *c, prec))).collect();
        Self::from_terms(table, &PadicScalar::zero(p, prec), &t)
    }

    /// Coefficientwise image in an extension ring.
    pub fn lift(&self, ring: &Ring) -> ExtSeries {
        let zero = ExtElem::zero_at(ring, self.zero.precision());
        self.map_coeffs(&zero, |c| ExtElem::from_scalar(ring, c))
    }

    pub fn to_json(&self) -> SeriesJson {
        let amb = self.zero.precision();
        let terms = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero() || c.precision() < amb)
            .map(|(i, c)| TermJson {
                exps: self.table.exps(i).to_vec(),
                val: c.valuation(),
                unit: c.unit().to_string(),
                prec: c.precision(),
            })
            .collect();
        SeriesJson {
            p: self.prime(),
            n: self.table.n,
            d: self.table.d,
            prec: amb,
            exact: self.exact,
            tail: if self.exact { None } else { self.tail },
            terms,
        }
    }

    pub fn from_json(j: &SeriesJson) -> Result<Self> {
        crate::padic::scalar::check_prime(j.p)?;
        if j.n == 0 {
            return Err(Error::InvalidInput("series needs at least one variable".into()));
        }
        let table = MonomialTable::new(j.n, j.d);
        let mut s = Self::zero_scalar(&table, j.p, j.prec);
        for t in &j.terms {
            if t.exps.len() != j.n {
                return Err(Error::VariableMismatch(t.exps.len(), j.n));
            }
            let unit: BigInt = t.unit.parse().map_err(|_| Error::InvalidInput(format!("bad unit {:?}", t.unit)))?;
            let c = match t.val {
                None => PadicScalar::zero(j.p, t.prec),
                Some(v) => PadicScalar::from_parts(j.p, v, &unit, t.prec),
            };
            match table.index(&t.exps) {
                Some(i) => s.coeffs[i] = c,
                None => return Err(Error::InvalidInput(format!("term {:?} exceeds degree {}", t.exps, j.d))),
            }
        }
        s.exact = j.exact;
        s.tail = if j.exact { Some(TailBound::INTEGRAL) } else { j.tail.or(Some(TailBound::INTEGRAL)) };
        Ok(s)
    }
}

/// Interchange form of a scalar series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub p: u64,
    pub n: usize,
    #[serde(rename = "D")]
    pub d: u32,
    pub prec: i64,
    #[serde(default)]
    pub exact: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailBound>,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub exps: Vec<u32>,
    pub val: Option<i64>,
    pub unit: String,
    pub prec: i64,
}

/// `log(1 + X)` truncated at degree `D`; the `X^k` coefficient loses `v_p(k)` digits.
pub fn log1p_series(p: u64, d: u32, prec: i64) -> Series {
    let table = MonomialTable::new(1, d);
    let mut s = Series::zero_scalar(&table, p, prec);
    for k in 1..=d {
        let num = PadicScalar::from_i64(p, if k % 2 == 1 { 1 } else { -1 }, prec);
        let den = int_like(p, k as i64, prec);
        s.coeffs[k as usize] = num.checked_div(&den).expect("k is nonzero");
    }
    s.exact = false;
    s.tail = Some(TailBound { floor: qi(0), slope: qi(0), log: true });
    s
}

/// `exp(X) - 1` truncated at degree `D`.
pub fn expm1_series(p: u64, d: u32, prec: i64) -> Series {
    let table = MonomialTable::new(1, d);
    let mut s = Series::zero_scalar(&table, p, prec);
    let mut fact = PadicScalar::exact_one(p);
    for k in 1..=d {
        fact = &fact * &int_like(p, k as i64, prec + d as i64);
        s.coeffs[k as usize] = PadicScalar::one(p, prec).checked_div(&fact).expect("factorial is nonzero");
    }
    let s1 = Q::new(1, p as i64 - 1);
    s.exact = false;
    s.tail = Some(TailBound { floor: s1, slope: s1, log: false });
    s
}

/// Direction for [`ps_log_exp`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogExp {
    Log1p,
    Exp,
}

/// `log(1 + f)` or `exp(f) - 1` for a series `f` without constant term.
pub fn ps_log_exp<C: Coeff>(f: &TruncatedSeries<C>, dir: LogExp) -> Result<TruncatedSeries<C>> {
    let p = f.prime();
    let d = f.degree();
    let base = match dir {
        LogExp::Log1p => log1p_series(p, d, f.ambient_precision()),
        LogExp::Exp => expm1_series(p, d, f.ambient_precision()),
    };
    let lifted = base.map_coeffs(f.zero_template(), |c| f.zero_template().from_scalar_like(c));
    lifted.compose(std::slice::from_ref(f))
}

/// Terms needed so that `k * rate + offset - log_p(k) >= target` for all
/// later `k`.
fn terms_needed(p: u64, rate: Q, target: i64, log: bool) -> u64 {
    let mut k: u64 = 1;
    loop {
        let lg = if log { log_p_floor(p, k) } else { 0 };
        let v = rate * qi(k as i64) - qi(lg);
        if v >= qi(target) + qi(1) && rate * qi(k as i64) * qi(p as i64 - 1) > qi(1) {
            return k;
        }
        k += 1;
        if k > 1 << 22 {
            return k;
        }
    }
}

/// `log(1 + x)` at a point of positive valuation, with certified precision.
pub fn log1p_point<C: Coeff>(x: &C) -> Result<Evaluation<C>> {
    let p = x.prime();
    let n = x.precision();
    let v = match x.val() {
        Val::Finite(v) => v,
        Val::AtLeast(_) => return Ok(Evaluation { value: x.zero_like(n), certified: qi(n) }),
    };
    if v <= qi(0) {
        return Err(Error::NotInOpenDisk(crate::padic::valuation::q_to_string(&v)));
    }
    let kmax = terms_needed(p, v, n, true);
    let mut acc = x.zero_like(n);
    let mut pw = x.clone();
    for k in 1..=kmax {
        let den = int_like(p, if k % 2 == 1 { k as i64 } else { -(k as i64) }, n);
        acc = acc.add(&pw.div_scalar(&den)?);
        if k < kmax {
            pw = pw.mul(x);
        }
    }
    let tail = TailBound { floor: qi(0), slope: qi(0), log: true }.evaluation_bound(p, kmax as u32, v).unwrap();
    let certified = qi(acc.precision()).min(tail);
    Ok(Evaluation { value: acc, certified })
}

/// `exp(x) - 1`, requiring `v(x) > 1/(p - 1)`.
pub fn expm1_point<C: Coeff>(x: &C) -> Result<Evaluation<C>> {
    let p = x.prime();
    let n = x.precision();
    let bound = Q::new(1, p as i64 - 1);
    let v = match x.val() {
        Val::Finite(v) => v,
        Val::AtLeast(_) => return Ok(Evaluation { value: x.zero_like(n), certified: qi(n) }),
    };
    if v <= bound {
        return Err(Error::ConvergenceViolation(crate::padic::valuation::q_to_string(&v)));
    }
    let rate = v - bound;
    let kmax = terms_needed(p, rate, n, false);
    let mut acc = x.zero_like(n);
    let mut term = x.clone();
    for k in 1..=kmax {
        acc = acc.add(&term);
        let den = int_like(p, k as i64 + 1, n + kmax as i64);
        term = term.mul(x).div_scalar(&den)?;
    }
    let tail = TailBound { floor: bound, slope: bound, log: false }.evaluation_bound(p, kmax as u32, v).unwrap();
    let certified = qi(acc.precision()).min(tail);
    Ok(Evaluation { value: acc, certified })
}

/// Compositional inverse of a univariate series with `g(0) = 0` and unit `g'(0)`.
pub fn reversion<C: Coeff>(g: &TruncatedSeries<C>) -> Result<TruncatedSeries<C>> {
    if g.nvars() != 1 {
        return Err(Error::VariableMismatch(g.nvars(), 1));
    }
    if !g.constant_term().is_zero() {
        return Err(Error::NonzeroConstantTerm);
    }
    let table = g.table().clone();
    let d = table.degree();
    let g1 = g.coeff_uni(1);
    if g1.val_floor() != Some(0) || g1.val() != Val::Finite(qi(0)) {
        return Err(Error::SingularAtOrigin);
    }
    let inv1 = g1.inverse()?;
    let one = g.zero_template().from_scalar_like(&PadicScalar::one(g.prime(), g.ambient_precision()));
    let x = TruncatedSeries::variable(&table, 0, &one);
    // coefficient-by-coefficient: [X^k] g(h) = 0 for k >= 2
    let mut h = x.mul_coeff(&inv1);
    for k in 2..=d {
        let gh = g.compose(std::slice::from_ref(&h))?;
        let r = gh.coeff_uni(k).clone();
        if r.is_zero() {
            continue;
        }
        let mut hk = h.coeffs[k as usize].clone();
        hk = hk.sub(&r.mul(&inv1));
        h.coeffs[k as usize] = hk;
    }
    h.exact = false;
    h.tail = match g.global_floor() {
        Some(f) if f >= qi(0) => Some(TailBound::INTEGRAL),
        _ => None,
    };
    Ok(h)
}

/// Valuation of an integer `k` as a scalar helper.
pub fn vp_of(p: u64, k: u64) -> i64 {
    vp_u64(p, k).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::valuation::q;
    use crate::padic::ExtensionRing;

    const P: u64 = 3;
    const N: i64 = 20;

    fn s(x: i64) -> PadicScalar {
        PadicScalar::from_i64(P, x, N)
    }

    fn uni(d: u32, cs: &[i64]) -> Series {
        let t = MonomialTable::new(1, d);
        let v: Vec<PadicScalar> = cs.iter().map(|&c| s(c)).collect();
        Series::from_univariate(&t, &PadicScalar::zero(P, N), &v).unwrap()
    }

    #[test]
    fn table_order_and_lookup() {
        let t = MonomialTable::new(2, 2);
        assert_eq!(t.len(), 6);
        assert_eq!(t.exps(1), &[1, 0]);
        assert_eq!(t.exps(2), &[0, 1]);
        assert_eq!(t.index(&[1, 1]), Some(4));
        assert_eq!(t.index(&[2, 1]), None);
    }

    #[test]
    fn product_of_variables() {
        let t = MonomialTable::new(2, 4);
        let x1 = Series::var(&t, 0, P, N);
        let x2 = Series::var(&t, 1, P, N);
        let m = x1.mul(&x2).unwrap();
        assert_eq!(m.terms().count(), 1);
        assert!(m.coeff(&[1, 1]).unwrap().eq_to_precision(&s(1)));
        assert!(m.is_exact());
        let z = x1.mul(&Series::zero_scalar(&t, P, N)).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn truncation_notice() {
        let x = uni(1, &[0, 1]);
        let sq = x.mul(&x).unwrap();
        assert!(sq.is_zero());
        assert!(!sq.is_exact());
    }

    #[test]
    fn composition_examples() {
        let f = uni(3, &[0, 0, 1]);
        let g = uni(3, &[0, 1, 1]);
        let c = f.compose(std::slice::from_ref(&g)).unwrap();
        assert!(c.eq_to_precision(&uni(3, &[0, 0, 1, 2])).unwrap());
        let id = uni(3, &[0, 1]);
        assert!(id.compose(std::slice::from_ref(&g)).unwrap().eq_to_precision(&g).unwrap());
        let f = uni(3, &[7, 1, 5]);
        let z = Series::zero_scalar(f.table(), P, N);
        assert!(f.compose(&[z]).unwrap().eq_to_precision(&uni(3, &[7])).unwrap());
        let bad = uni(3, &[1, 1]);
        assert_eq!(f.compose(&[bad]).unwrap_err(), Error::NonzeroConstantTerm);
    }

    #[test]
    fn shifted_composition_caps_precision() {
        // inexact geometric series evaluated around 3
        let mut f = uni(6, &[0, 1, 1, 1, 1, 1, 1]);
        f.set_inexact(Some(TailBound::INTEGRAL));
        let g = uni(6, &[3, 1]);
        let c = f.compose_shifted(&[g]).unwrap();
        // degree-k coefficient is capped at 7 - k
        assert!(c.coeff_uni(0).precision() <= 7);
        assert!(c.coeff_uni(5).precision() <= 2);
    }

    #[test]
    fn log_series_coefficients() {
        let l = log1p_series(P, 3, N);
        assert!(l.coeff_uni(1).eq_to_precision(&s(1)));
        let half = PadicScalar::from_i64(P, -1, N).checked_div(&s(2)).unwrap();
        assert!(l.coeff_uni(2).eq_to_precision(&half));
        let third = s(1).checked_div(&s(3)).unwrap();
        assert!(l.coeff_uni(3).eq_to_precision(&third));
        assert_eq!(l.coeff_uni(3).valuation(), Some(-1));
    }

    #[test]
    fn log_exp_point_roundtrip() {
        let x = s(3);
        let l = log1p_point(&x).unwrap();
        assert_eq!(l.val(), Val::Finite(qi(1)));
        let back = expm1_point(&l.value).unwrap();
        assert!((&back.value - &x).with_precision(q_ceil(&back.certified)).is_zero());
        assert!(back.certified >= qi(15));
    }

    #[test]
    fn exp_convergence_violation() {
        let r = ExtensionRing::cyclotomic(P, 1, N).unwrap();
        let t = ExtElem::generator(&r, 0);
        assert!(matches!(expm1_point(&t), Err(Error::ConvergenceViolation(_))));
    }

    #[test]
    fn series_log_exp_roundtrip() {
        let t = MonomialTable::new(1, 8);
        let x = Series::var(&t, 0, P, 40);
        let l = ps_log_exp(&x, LogExp::Log1p).unwrap();
        let e = ps_log_exp(&l, LogExp::Exp).unwrap();
        assert!(e.eq_to_precision(&x).unwrap());
    }

    #[test]
    fn geometric_sum_at_p() {
        let d = 10;
        let f = uni(d, &vec![1; d as usize + 1]);
        let f = f.sub(&uni(d, &[1])).unwrap();
        let ev = f.evaluate(&[s(3)]).unwrap();
        // closed form 1/(1-3) - 1 = 3/(1-3)
        let closed = s(3).checked_div(&s(-2)).unwrap();
        let residual = &ev.value - &closed;
        assert!(residual.valuation().is_none_or(|v| v >= d as i64 + 1));
        assert_eq!(residual.valuation(), Some(d as i64 + 1));
    }

    #[test]
    fn evaluation_at_torsion() {
        let r = ExtensionRing::cyclotomic(P, 1, N).unwrap();
        let t = MonomialTable::new(1, 4);
        let x = Series::var(&t, 0, P, N).lift(&r);
        let z = ExtElem::generator(&r, 0);
        let ev = x.evaluate(&[z]).unwrap();
        assert_eq!(ev.val(), Val::Finite(q(1, 2)));
        let outside = ExtElem::from_i64(&r, 1);
        assert!(matches!(x.evaluate(&[outside]), Err(Error::NotInOpenDisk(_))));
    }

    #[test]
    fn difference_vanishes_on_diagonal() {
        let t = MonomialTable::new(2, 3);
        let f = Series::var(&t, 0, P, N).sub(&Series::var(&t, 1, P, N)).unwrap();
        let ev = f.evaluate(&[s(3), s(3)]).unwrap();
        assert!(ev.value.is_zero());
        assert!(ev.certified >= qi(2));
        assert!(!ev.val().is_finite());
    }

    #[test]
    fn inverse_and_reversion() {
        let f = uni(8, &[1, 1]);
        let inv = f.inverse().unwrap();
        assert!(inv.eq_to_precision(&uni(8, &[1, -1, 1, -1, 1, -1, 1, -1, 1])).unwrap());
        let g = uni(8, &[0, 1, 1]);
        let h = reversion(&g).unwrap();
        let back = g.compose(std::slice::from_ref(&h)).unwrap();
        assert!(back.eq_to_precision(&uni(8, &[0, 1])).unwrap());
    }

    #[test]
    fn derivative_and_integral() {
        let f = uni(4, &[5, 1, 3, 0, 9]);
        let df = f.derivative(0);
        assert_eq!(df.degree(), 3);
        assert!(df.eq_to_precision(&uni(3, &[1, 6, 0, 36])).unwrap());
        let back = df.integrate(0).unwrap();
        assert!(back.add(&uni(4, &[5])).unwrap().eq_to_precision(&f).unwrap());
    }

    #[test]
    fn json_roundtrip() {
        let t = MonomialTable::new(2, 3);
        let f = Series::from_integer_terms(&t, P, N, &[(vec![1, 0], 1), (vec![0, 1], -1), (vec![1, 1], 9)]).unwrap();
        let j = serde_json::to_string(&f.to_json()).unwrap();
        assert!(j.contains("\"D\":3"));
        let g = Series::from_json(&serde_json::from_str(&j).unwrap()).unwrap();
        assert!(g.eq_to_precision(&f).unwrap());
        assert!(g.is_exact());
    }
}
