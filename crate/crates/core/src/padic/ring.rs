use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::linalg::{determinant, solve};
use super::scalar::{check_prime, ppow, PadicScalar, ScalarRecord};
use super::valuation::{q, q_ceil, q_floor, qi, Val, Q};
use crate::error::{Error, Result};

const MAX_DEGREE: usize = 1024;

/// How the modulus of an [`ExtensionRing`] is chosen.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModulusSpec {
    /// `Q_p` itself.
    Trivial,
    /// `Phi_{p^level}(1 + T)`, whose roots are `zeta - 1`.
    Cyclotomic { level: u32 },
    /// A monic Eisenstein polynomial, low-order coefficients first (leading 1 implied).
    Eisenstein {
        #[serde(with = "bigint_vec_str")]
        coeffs: Vec<BigInt>,
    },
    /// `T^(p^exponent) - beta` with `beta` a unit.
    Kummer {
        #[serde(with = "bigint_str")]
        beta: BigInt,
        exponent: u32,
    },
    /// Tensor product of simple moduli, one variable per factor.
    Tower { factors: Vec<ModulusSpec> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Factor {
    /// `g_0 .. g_{d-1}` of the monic modulus.
    low: Vec<PadicScalar>,
    cyclotomic_level: Option<u32>,
    eisenstein: bool,
}

impl Factor {
    fn degree(&self) -> usize {
        self.low.len()
    }
}

/// `Q_p[T_1, ..., T_r] / (g_1(T_1), ..., g_r(T_r))` at coefficient precision `N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionRing {
    p: u64,
    prec: i64,
    spec: ModulusSpec,
    factors: Vec<Factor>,
    degree: usize,
    best_effort: bool,
}

pub type Ring = Arc<ExtensionRing>;

/// Integer coefficients of `Phi_{p^k}(1 + T)`, low degree first, monic.
pub fn cyclotomic_shifted(p: u64, k: u32) -> Vec<BigInt> {
    let step = p.pow(k - 1) as usize;
    let deg = step * (p as usize - 1);
    let mut out = vec![BigInt::zero(); deg + 1];
    for j in 0..p as usize {
        // (1 + T)^(j * step)
        let e = j * step;
        let mut c = BigInt::one();
        for i in 0..=e {
            out[i] += &c;
            c = c * BigInt::from(e - i) / BigInt::from(i + 1);
        }
    }
    out
}

fn factor_from_spec(p: u64, spec: &ModulusSpec, prec: i64) -> Result<(Factor, bool)> {
    let s = |x: &BigInt| PadicScalar::from_bigint(p, x, prec);
    match spec {
        ModulusSpec::Trivial => Ok((
            Factor { low: vec![PadicScalar::zero(p, prec)], cyclotomic_level: Some(0), eisenstein: false },
            false,
        )),
        ModulusSpec::Cyclotomic { level } => {
            if *level == 0 {
                return factor_from_spec(p, &ModulusSpec::Trivial, prec);
            }
            if *level > 6 {
                return Err(Error::LevelTooDeep(*level));
            }
            let c = cyclotomic_shifted(p, *level);
            if c.last() != Some(&BigInt::one()) {
                return Err(Error::BadModulus("cyclotomic modulus not monic".into()));
            }
            let low: Vec<PadicScalar> = c[..c.len() - 1].iter().map(s).collect();
            if low[0].valuation() != Some(1) || low.iter().any(|x| x.valuation().is_some_and(|v| v < 1)) {
                return Err(Error::NotEisenstein);
            }
            Ok((Factor { low, cyclotomic_level: Some(*level), eisenstein: true }, false))
        }
        ModulusSpec::Eisenstein { coeffs } => {
            if coeffs.is_empty() {
                return Err(Error::BadModulus("empty Eisenstein polynomial".into()));
            }
            let low: Vec<PadicScalar> = coeffs.iter().map(s).collect();
            if low[0].valuation() != Some(1) || low.iter().any(|x| x.valuation().is_some_and(|v| v < 1)) {
                return Err(Error::BadModulus("polynomial is not Eisenstein".into()));
            }
            Ok((Factor { low, cyclotomic_level: None, eisenstein: true }, false))
        }
        ModulusSpec::Kummer { beta, exponent } => {
            let b = s(beta);
            if b.valuation() != Some(0) {
                return Err(Error::BadModulus("Kummer constant must be a p-adic unit".into()));
            }
            let d = p.checked_pow(*exponent).ok_or(Error::TowerTooDeep(*exponent))? as usize;
            if d > MAX_DEGREE {
                return Err(Error::TowerTooDeep(*exponent));
            }
            let mut low = vec![PadicScalar::zero(p, prec); d];
            low[0] = -b;
            Ok((Factor { low, cyclotomic_level: None, eisenstein: false }, true))
        }
        ModulusSpec::Tower { .. } => Err(Error::BadModulus("nested towers are not supported".into())),
    }
}

impl ExtensionRing {
    /// Builds the ring and runs the modulus self-checks.
    pub fn new(p: u64, spec: ModulusSpec, prec: i64) -> Result<Ring> {
        check_prime(p)?;
        if prec <= 0 {
            return Err(Error::PrecisionExhausted(prec));
        }
        let (factors, best_effort) = match &spec {
            ModulusSpec::Tower { factors } => {
                if factors.is_empty() {
                    return Err(Error::BadModulus("empty tower".into()));
                }
                let mut out = Vec::new();
                let mut be = factors.len() > 1;
                for f in factors {
                    if matches!(f, ModulusSpec::Trivial | ModulusSpec::Tower { .. }) {
                        return Err(Error::BadModulus("tower factors must be simple moduli".into()));
                    }
                    let (fac, b) = factor_from_spec(p, f, prec)?;
                    be |= b;
                    out.push(fac);
                }
                (out, be)
            }
            other => {
                let (f, b) = factor_from_spec(p, other, prec)?;
                (vec![f], b)
            }
        };
        let degree = factors.iter().map(Factor::degree).product();
        if degree > MAX_DEGREE {
            return Err(Error::TowerTooDeep(degree as u32));
        }
        Ok(Arc::new(ExtensionRing { p, prec, spec, factors, degree, best_effort }))
    }

    pub fn trivial(p: u64, prec: i64) -> Result<Ring> {
        Self::new(p, ModulusSpec::Trivial, prec)
    }

    pub fn cyclotomic(p: u64, level: u32, prec: i64) -> Result<Ring> {
        Self::new(p, ModulusSpec::Cyclotomic { level }, prec)
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> i64 {
        self.prec
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn spec(&self) -> &ModulusSpec {
        &self.spec
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self.spec, ModulusSpec::Trivial) || matches!(self.spec, ModulusSpec::Cyclotomic { level: 0 })
    }

    /// True when irreducibility of the modulus is not established, so that
    /// norm-based valuations are only best effort.
    pub fn best_effort(&self) -> bool {
        self.best_effort
    }

    /// Level `k` when the ring is the single cyclotomic ring of level `k`.
    pub fn cyclotomic_level(&self) -> Option<u32> {
        if self.factors.len() == 1 {
            self.factors[0].cyclotomic_level
        } else {
            None
        }
    }

    /// Index of the cyclotomic factor and its level, if one exists.
    fn cyclotomic_factor(&self) -> Option<(usize, u32)> {
        self.factors
            .iter()
            .enumerate()
            .find_map(|(i, f)| f.cyclotomic_level.filter(|&l| l > 0).map(|l| (i, l)))
    }

    fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(Factor::degree).collect()
    }

    fn stride(&self, axis: usize) -> usize {
        self.factors[..axis].iter().map(Factor::degree).product()
    }

    /// `v_p` of the discriminant of the coefficient order.
    fn discriminant_valuation(&self) -> i64 {
        let d = self.degree as i64;
        self.factors
            .iter()
            .map(|f| {
                let df = f.degree() as i64;
                let v = match (f.cyclotomic_level, &self.spec) {
                    (Some(0), _) => 0,
                    (Some(k), _) => {
                        let (p, k) = (self.p as i64, k as i64);
                        p.pow(k as u32 - 1) * (p * k - k - 1)
                    }
                    (None, _) => factor_discriminant_valuation(f, self.p, self.prec),
                };
                v * (d / df)
            })
            .sum()
    }

    /// Largest `n` such that an element of valuation `>= c` has all basis
    /// coefficients of valuation `>= n`.
    pub fn coefficient_floor(&self, c: Q) -> i64 {
        if self.is_trivial() {
            return q_ceil(&c);
        }
        if self.factors.len() == 1 && self.factors[0].eisenstein {
            let d = self.degree as i64;
            return q_ceil(&(c - q(d - 1, d)));
        }
        q_floor(&c) - (self.discriminant_valuation() + 1) / 2
    }

    fn reduce_axis(&self, data: Vec<PadicScalar>, dims: &mut [usize], axis: usize) -> Vec<PadicScalar> {
        let g = &self.factors[axis].low;
        let d = g.len();
        let len = dims[axis];
        if len <= d {
            return data;
        }
        let stride: usize = dims[..axis].iter().product();
        let outer: usize = dims[axis + 1..].iter().product();
        let mut data = data;
        for o in 0..outer {
            for s in 0..stride {
                let base = o * stride * len + s;
                for e in (d..len).rev() {
                    let c = data[base + e * stride].clone();
                    for (t, gt) in g.iter().enumerate() {
                        let idx = base + (e - d + t) * stride;
                        let prod = &c * gt;
                        data[idx] = &data[idx] - &prod;
                    }
                }
            }
        }
        let mut new_dims = dims.to_vec();
        new_dims[axis] = d;
        let new_stride: usize = new_dims[..axis].iter().product();
        let new_len: usize = new_dims.iter().product();
        let mut out = Vec::with_capacity(new_len);
        for idx in 0..new_len {
            let s = idx % new_stride;
            let e = (idx / new_stride) % d;
            let o = idx / (new_stride * d);
            out.push(data[o * stride * len + e * stride + s].clone());
        }
        dims[axis] = d;
        out
    }

    fn mul_coeffs(&self, a: &[PadicScalar], b: &[PadicScalar]) -> Vec<PadicScalar> {
        let dims = self.dims();
        if dims.len() == 1 {
            let d = dims[0];
            if d == 1 {
                return vec![&a[0] * &b[0]];
            }
            let mut full: Vec<Option<PadicScalar>> = vec![None; 2 * d - 1];
            for (i, x) in a.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    let t = x * y;
                    full[i + j] = Some(match full[i + j].take() {
                        None => t,
                        Some(acc) => &acc + &t,
                    });
                }
            }
            let full: Vec<PadicScalar> = full.into_iter().map(|x| x.unwrap()).collect();
            let mut fd = vec![2 * d - 1];
            return self.reduce_axis(full, &mut fd, 0);
        }
        let full_dims: Vec<usize> = dims.iter().map(|d| 2 * d - 1).collect();
        let total: usize = full_dims.iter().product();
        let mut full: Vec<Option<PadicScalar>> = vec![None; total];
        let unflatten = |mut idx: usize, ds: &[usize]| -> Vec<usize> {
            ds.iter()
                .map(|&d| {
                    let e = idx % d;
                    idx /= d;
                    e
                })
                .collect()
        };
        let a_idx: Vec<Vec<usize>> = (0..a.len()).map(|i| unflatten(i, &dims)).collect();
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                let mut flat = 0;
                let mut mul = 1;
                for (ax, fd) in full_dims.iter().enumerate() {
                    flat += (a_idx[i][ax] + a_idx[j][ax]) * mul;
                    mul *= fd;
                }
                let t = x * y;
                full[flat] = Some(match full[flat].take() {
                    None => t,
                    Some(acc) => &acc + &t,
                });
            }
        }
        let zero = PadicScalar::zero(self.p, self.prec);
        let mut data: Vec<PadicScalar> = full.into_iter().map(|x| x.unwrap_or_else(|| zero.clone())).collect();
        let mut cur = full_dims;
        for axis in 0..dims.len() {
            data = self.reduce_axis(data, &mut cur, axis);
        }
        data
    }
}

fn factor_discriminant_valuation(f: &Factor, p: u64, prec: i64) -> i64 {
    let d = f.degree();
    let mut g: Vec<PadicScalar> = f.low.clone();
    g.push(PadicScalar::one(p, prec));
    let dg: Vec<PadicScalar> = (1..=d).map(|i| g[i].mul_i64(i as i64)).collect();
    let r = sylvester_resultant(&g, &dg, p);
    r.valuation().unwrap_or(r.precision())
}

/// Resultant `Res(f, g)` from the Sylvester matrix, formal degrees taken
/// from the slice lengths (coefficients low degree first).
pub fn sylvester_resultant(f: &[PadicScalar], g: &[PadicScalar], p: u64) -> PadicScalar {
    let n = f.len() - 1;
    let m = g.len() - 1;
    let size = n + m;
    if size == 0 {
        return PadicScalar::exact_one(p);
    }
    let prec = f.iter().chain(g.iter()).map(PadicScalar::precision).min().unwrap();
    let zero = PadicScalar::zero(p, prec.max(1) * 4);
    let mut mat = vec![vec![zero.clone(); size]; size];
    for i in 0..m {
        for (k, c) in f.iter().rev().enumerate() {
            mat[i][i + k] = c.clone();
        }
    }
    for i in 0..n {
        for (k, c) in g.iter().rev().enumerate() {
            mat[m + i][i + k] = c.clone();
        }
    }
    determinant(mat, p)
}

/// Element of an [`ExtensionRing`], stored as basis coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct ExtElem {
    ring: Ring,
    coeffs: Vec<PadicScalar>,
}

pub fn same_ring(a: &Ring, b: &Ring) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl ExtElem {
    pub fn zero(ring: &Ring) -> Self {
        Self::zero_at(ring, ring.prec)
    }

    /// Zero known to coefficient precision `prec`.
    pub fn zero_at(ring: &Ring, prec: i64) -> Self {
        ExtElem { ring: ring.clone(), coeffs: vec![PadicScalar::zero(ring.p, prec); ring.degree] }
    }

    pub fn one(ring: &Ring) -> Self {
        Self::from_scalar(ring, &PadicScalar::one(ring.p, ring.prec))
    }

    pub fn from_scalar(ring: &Ring, s: &PadicScalar) -> Self {
        let mut e = Self::zero(ring);
        e.coeffs[0] = s.with_precision(ring.prec);
        e
    }

    pub fn from_i64(ring: &Ring, x: i64) -> Self {
        Self::from_scalar(ring, &PadicScalar::from_i64(ring.p, x, ring.prec))
    }

    /// Builds an element from basis coefficients (flattened, first factor fastest).
    pub fn from_coeffs(ring: &Ring, coeffs: Vec<PadicScalar>) -> Result<Self> {
        if coeffs.len() > ring.degree {
            return Err(Error::InvalidInput(format!(
                "{} coefficients for a degree-{} ring",
                coeffs.len(),
                ring.degree
            )));
        }
        let mut e = Self::zero(ring);
        for (i, c) in coeffs.into_iter().enumerate() {
            if c.prime() != ring.p {
                return Err(Error::PrimeMismatch(c.prime(), ring.p));
            }
            e.coeffs[i] = c.with_precision(ring.prec);
        }
        Ok(e)
    }

    /// The polynomial variable of factor `axis` (the generator `T`).
    pub fn generator(ring: &Ring, axis: usize) -> Self {
        let mut e = Self::zero(ring);
        let stride = ring.stride(axis);
        if ring.factors[axis].degree() == 1 {
            // T is zero in Q_p[T]/(T)
            return e;
        }
        e.coeffs[stride] = PadicScalar::one(ring.p, ring.prec);
        e
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn coeffs(&self) -> &[PadicScalar] {
        &self.coeffs
    }

    pub fn prime(&self) -> u64 {
        self.ring.p
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(PadicScalar::is_zero)
    }

    pub fn precision(&self) -> i64 {
        self.coeffs.iter().map(PadicScalar::precision).min().unwrap()
    }

    /// Least coefficient valuation; a lower bound for the element valuation
    /// in integral bases.
    pub fn min_coeff_valuation(&self) -> Option<i64> {
        self.coeffs.iter().filter_map(PadicScalar::valuation).min()
    }

    pub fn with_precision(&self, prec: i64) -> Self {
        ExtElem { ring: self.ring.clone(), coeffs: self.coeffs.iter().map(|c| c.with_precision(prec)).collect() }
    }

    /// The element as a scalar if every non-constant coefficient vanishes.
    pub fn as_scalar(&self) -> Option<PadicScalar> {
        if self.coeffs[1..].iter().all(PadicScalar::is_zero) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    fn check(&self, other: &ExtElem) {
        assert!(same_ring(&self.ring, &other.ring), "ring mismatch");
    }

    pub fn add(&self, other: &ExtElem) -> ExtElem {
        self.check(other);
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        ExtElem { ring: self.ring.clone(), coeffs }
    }

    pub fn sub(&self, other: &ExtElem) -> ExtElem {
        self.check(other);
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        ExtElem { ring: self.ring.clone(), coeffs }
    }

    pub fn neg(&self) -> ExtElem {
        ExtElem { ring: self.ring.clone(), coeffs: self.coeffs.iter().map(|a| -a).collect() }
    }

    pub fn mul(&self, other: &ExtElem) -> ExtElem {
        self.check(other);
        ExtElem { ring: self.ring.clone(), coeffs: self.ring.mul_coeffs(&self.coeffs, &other.coeffs) }
    }

    pub fn scale(&self, s: &PadicScalar) -> ExtElem {
        ExtElem { ring: self.ring.clone(), coeffs: self.coeffs.iter().map(|a| a * s).collect() }
    }

    pub fn add_scalar(&self, s: &PadicScalar) -> ExtElem {
        let mut out = self.clone();
        out.coeffs[0] = &out.coeffs[0] + s;
        out
    }

    pub fn pow(&self, e: &BigUint) -> ExtElem {
        let mut acc = ExtElem::one(&self.ring);
        if e.is_zero() {
            return acc;
        }
        let bits = e.bits();
        for i in (0..bits).rev() {
            acc = acc.mul(&acc);
            if e.bit(i) {
                acc = acc.mul(self);
            }
        }
        acc
    }

    pub fn pow_u64(&self, e: u64) -> ExtElem {
        self.pow(&BigUint::from(e))
    }

    /// Multiplication matrix in the coefficient basis (column `j` is `self * b_j`).
    pub fn multiplication_matrix(&self) -> Vec<Vec<PadicScalar>> {
        let d = self.ring.degree;
        let mut cols = Vec::with_capacity(d);
        for j in 0..d {
            let mut b = vec![PadicScalar::zero(self.ring.p, self.ring.prec); d];
            b[j] = PadicScalar::one(self.ring.p, self.ring.prec);
            cols.push(self.ring.mul_coeffs(&self.coeffs, &b));
        }
        (0..d).map(|i| (0..d).map(|j| cols[j][i].clone()).collect()).collect()
    }

    /// `Norm(x)` down to `Q_p`: a resultant with the modulus for simple rings,
    /// the multiplication-matrix determinant for towers.
    pub fn norm(&self) -> PadicScalar {
        let p = self.ring.p;
        if self.ring.factors.len() == 1 {
            if self.ring.degree == 1 {
                return self.coeffs[0].clone();
            }
            let mut g = self.ring.factors[0].low.clone();
            g.push(PadicScalar::one(p, self.ring.prec));
            sylvester_resultant(&g, &self.coeffs, p)
        } else {
            self.norm_by_matrix()
        }
    }

    pub fn norm_by_matrix(&self) -> PadicScalar {
        determinant(self.multiplication_matrix(), self.ring.p)
    }

    /// Exact valuation `v_p(Norm(x)) / d`.
    pub fn valuation(&self) -> Result<Q> {
        if self.is_zero() {
            return Err(Error::NormPrecisionLoss(self.precision()));
        }
        if self.ring.degree == 1 {
            return Ok(qi(self.coeffs[0].valuation().unwrap()));
        }
        let n = self.norm();
        match n.valuation() {
            Some(v) => Ok(Q::new(v, self.ring.degree as i64)),
            None => Err(Error::NormPrecisionLoss(n.precision())),
        }
    }

    /// Valuation in a totally ramified ring read off the uniformizer
    /// expansion: `min v(c_i) + i/d`, the terms having distinct fractional parts.
    fn eisenstein_valuation(&self) -> Val {
        let d = self.ring.degree as i64;
        let mut best: Option<Q> = None;
        let mut bound: Option<Q> = None;
        for (i, c) in self.coeffs.iter().enumerate() {
            let shift = Q::new(i as i64, d);
            match c.valuation() {
                Some(v) => best = Some(best.map_or(qi(v) + shift, |b| b.min(qi(v) + shift))),
                None => bound = Some(bound.map_or(qi(c.precision()) + shift, |b| b.min(qi(c.precision()) + shift))),
            }
        }
        match (best, bound) {
            (Some(b), Some(z)) if b >= z => Val::AtLeast(z),
            (Some(b), _) => Val::Finite(b),
            (None, z) => Val::AtLeast(z.unwrap()),
        }
    }

    /// Valuation, or the certified lower bound when the element vanishes to precision.
    pub fn valuation_val(&self) -> Val {
        if self.ring.factors.len() == 1 && self.ring.factors[0].eisenstein {
            return self.eisenstein_valuation();
        }
        if self.is_zero() {
            return Val::AtLeast(qi(self.precision()));
        }
        if self.ring.degree == 1 {
            return Val::Finite(qi(self.coeffs[0].valuation().unwrap()));
        }
        let n = self.norm();
        let d = self.ring.degree as i64;
        match n.valuation() {
            Some(v) => Val::Finite(Q::new(v, d)),
            None => Val::AtLeast(Q::new(n.precision(), d).max(qi(self.min_coeff_valuation().unwrap_or(0)))),
        }
    }

    pub fn inverse(&self) -> Result<ExtElem> {
        if self.ring.degree == 1 {
            let inv = self.coeffs[0].inverse()?;
            return Ok(ExtElem { ring: self.ring.clone(), coeffs: vec![inv] });
        }
        let d = self.ring.degree;
        let mut rhs = vec![PadicScalar::zero(self.ring.p, self.ring.prec); d];
        rhs[0] = PadicScalar::one(self.ring.p, self.ring.prec);
        let x = solve(self.multiplication_matrix(), rhs)?;
        Ok(ExtElem { ring: self.ring.clone(), coeffs: x })
    }

    pub fn checked_div(&self, other: &ExtElem) -> Result<ExtElem> {
        Ok(self.mul(&other.inverse()?))
    }

    /// Evaluates the coefficient polynomial of a simple ring at `t`.
    fn eval_at(&self, t: &ExtElem) -> ExtElem {
        let mut acc = ExtElem::zero(t.ring());
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(t).add_scalar(c);
        }
        acc
    }

    /// Galois conjugation `T -> (1 + T)^a - 1` on the cyclotomic ring.
    pub fn conjugate(&self, a: &BigInt) -> Result<ExtElem> {
        let level = match self.ring.cyclotomic_level() {
            Some(l) => l,
            None => return Err(Error::UnsupportedRing("conjugation needs a cyclotomic ring".into())),
        };
        let p = self.ring.p;
        if (a % BigInt::from(p)).is_zero() {
            return Err(Error::InvalidInput("conjugation exponent must be prime to p".into()));
        }
        if level == 0 {
            return Ok(self.clone());
        }
        let order = BigInt::from(p).pow(level);
        let e = a.mod_floor(&order).to_biguint().unwrap();
        let t = ExtElem::generator(&self.ring, 0);
        let sigma_t = t.add_scalar(&PadicScalar::one(p, self.ring.prec)).pow(&e).add_scalar(&PadicScalar::from_i64(p, -1, self.ring.prec));
        Ok(self.eval_at(&sigma_t))
    }

    /// Image under the natural inclusion into `target`: scalars embed
    /// everywhere; cyclotomic level `k` embeds into any ring carrying a
    /// cyclotomic factor of level `L >= k` via `T -> (1 + S)^(p^(L - k)) - 1`.
    pub fn embed(&self, target: &Ring) -> Result<ExtElem> {
        if same_ring(&self.ring, target) {
            return Ok(self.clone());
        }
        if let Some(s) = self.as_scalar() {
            if self.ring.is_trivial() || self.ring.degree == 1 {
                return Ok(ExtElem::from_scalar(target, &s));
            }
        }
        let k = self
            .ring
            .cyclotomic_level()
            .ok_or_else(|| Error::UnsupportedRing("only scalars and cyclotomic elements embed".into()))?;
        if k == 0 {
            return Ok(ExtElem::from_scalar(target, &self.coeffs[0]));
        }
        let (axis, l) = target
            .cyclotomic_factor()
            .ok_or_else(|| Error::UnsupportedRing("target has no cyclotomic factor".into()))?;
        if l < k {
            return Err(Error::UnsupportedRing(format!("cannot embed level {k} into level {l}")));
        }
        let p = self.ring.p;
        let s = ExtElem::generator(target, axis);
        let one = PadicScalar::one(p, target.prec);
        let img = s.add_scalar(&one).pow(&BigUint::from(p).pow(l - k)).add_scalar(&(-&one));
        Ok(self.eval_at(&img))
    }

    pub fn to_records(&self) -> Vec<ScalarRecord> {
        self.coeffs.iter().map(PadicScalar::to_record).collect()
    }
}

impl fmt::Debug for ExtElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExtElem{:?}", self.coeffs)
    }
}

/// Exponent `e` reduced so that `(1 + x)^e` is unchanged modulo `p^prec`
/// when `v(x) >= v`: beyond `p^M` the exponent acts trivially.
pub fn one_unit_exponent_modulus(p: u64, v: Q, prec: i64) -> BigUint {
    // v((1+x)^p - 1) >= min(p v, v + 1) for odd p
    let mut w = v;
    let mut steps: u64 = 0;
    let target = qi(prec);
    while w < target {
        let next = (w * qi(p as i64)).min(w + qi(1));
        w = next;
        steps += 1;
    }
    ppow(p, steps + 1)
}

/// Nonnegative representative of `a` modulo `m`.
pub fn reduce_exponent(a: &BigInt, m: &BigUint) -> BigUint {
    let mm = BigInt::from(m.clone());
    a.mod_floor(&mm).to_biguint().unwrap()
}

/// Serde adapter writing a `BigInt` as a decimal string.
pub mod bigint_str {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(|_| serde::de::Error::custom(format!("bad integer {s:?}")))
    }
}

/// Serde adapter for `Vec<BigInt>` as decimal strings.
pub mod bigint_vec_str {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(xs: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| s.parse().map_err(|_| serde::de::Error::custom(format!("bad integer {s:?}"))))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(ring: &Ring) -> ExtElem {
        ExtElem::generator(ring, 0)
    }

    #[test]
    fn level_three_modulus() {
        let r = ExtensionRing::cyclotomic(3, 1, 20).unwrap();
        assert_eq!(r.degree(), 2);
        let c = cyclotomic_shifted(3, 1);
        assert_eq!(c, vec![BigInt::from(3), BigInt::from(3), BigInt::from(1)]);
        assert_eq!(ExtensionRing::cyclotomic(3, 2, 20).unwrap().degree(), 6);
    }

    #[test]
    fn kummer_modulus() {
        let r = ExtensionRing::new(5, ModulusSpec::Kummer { beta: 6.into(), exponent: 1 }, 20).unwrap();
        assert_eq!(r.degree(), 5);
        assert!(r.best_effort());
        let x = t(&r).pow_u64(5);
        assert!(x.sub(&ExtElem::from_i64(&r, 6)).is_zero());
        assert!(ExtensionRing::new(5, ModulusSpec::Kummer { beta: 5.into(), exponent: 1 }, 20).is_err());
    }

    #[test]
    fn eisenstein_checks() {
        let ok = ModulusSpec::Eisenstein { coeffs: vec![3.into(), 0.into()] };
        assert!(ExtensionRing::new(3, ok, 10).is_ok());
        let bad = ModulusSpec::Eisenstein { coeffs: vec![9.into(), 3.into()] };
        assert!(matches!(ExtensionRing::new(3, bad, 10), Err(Error::BadModulus(_))));
    }

    #[test]
    fn torsion_valuations() {
        let r1 = ExtensionRing::cyclotomic(3, 1, 20).unwrap();
        assert_eq!(t(&r1).norm().to_i64(), Some(3));
        assert_eq!(t(&r1).valuation().unwrap(), q(1, 2));
        let r2 = ExtensionRing::cyclotomic(3, 2, 20).unwrap();
        assert_eq!(t(&r2).norm().to_i64().map(i64::abs), Some(3));
        assert_eq!(t(&r2).valuation().unwrap(), q(1, 6));
        let three = ExtElem::from_i64(&r2, 3);
        assert_eq!(three.valuation().unwrap(), qi(1));
    }

    #[test]
    fn uniformizer_valuation_matches_norm() {
        let r = ExtensionRing::cyclotomic(3, 2, 20).unwrap();
        let x = t(&r);
        let samples = [
            x.clone(),
            x.pow_u64(4).add(&ExtElem::from_i64(&r, 9)),
            x.pow_u64(5).scale(&PadicScalar::from_i64(3, 7, 20)).add(&x.pow_u64(7)),
            ExtElem::from_i64(&r, 27).add(&x.pow_u64(11)),
        ];
        for y in samples {
            assert_eq!(y.valuation_val(), Val::Finite(y.valuation().unwrap()));
        }
    }

    #[test]
    fn resultant_agrees_with_matrix_norm() {
        let r = ExtensionRing::cyclotomic(5, 1, 20).unwrap();
        let x = t(&r).pow_u64(3).add(&ExtElem::from_i64(&r, 7)).add(&t(&r).scale(&PadicScalar::from_i64(5, 2, 20)));
        assert!(x.norm().eq_to_precision(&x.norm_by_matrix()));
    }

    #[test]
    fn conjugation_has_order_two_on_level_one() {
        let r = ExtensionRing::cyclotomic(3, 1, 20).unwrap();
        let x = t(&r);
        let twice = x.conjugate(&2.into()).unwrap().conjugate(&2.into()).unwrap();
        assert!(twice.sub(&x).is_zero());
        assert!(x.conjugate(&1.into()).unwrap().sub(&x).is_zero());
    }

    #[test]
    fn inverse_of_unit() {
        let r = ExtensionRing::cyclotomic(3, 2, 20).unwrap();
        let u = t(&r).add_scalar(&PadicScalar::one(3, 20));
        let w = u.inverse().unwrap();
        assert!(u.mul(&w).sub(&ExtElem::one(&r)).is_zero());
    }

    #[test]
    fn embedding_respects_roots_of_unity() {
        let r1 = ExtensionRing::cyclotomic(3, 1, 20).unwrap();
        let r2 = ExtensionRing::cyclotomic(3, 2, 20).unwrap();
        let z3 = t(&r1).add_scalar(&PadicScalar::one(3, 20));
        let e = z3.embed(&r2).unwrap();
        assert!(e.pow_u64(3).sub(&ExtElem::one(&r2)).is_zero());
        assert!(!e.sub(&ExtElem::one(&r2)).is_zero());
    }

    #[test]
    fn exponent_modulus_bound() {
        // v >= 1 at precision 10: p^(10) suffices
        let m = one_unit_exponent_modulus(3, qi(1), 10);
        assert_eq!(m, ppow(3, 10));
    }
}
