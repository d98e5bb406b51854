//! Locally algebraic weights `((1 + p)^(k_i) zeta_i - 1)_i`, the `[p^k]`
//! pushforward and the special-vs-bounded classification of curve charts.

use num_bigint::{BigInt, BigUint};
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formal_group::{binomial_series, GroupPoint, Multiplier};
use crate::orbit::GammaModule;
use crate::padic::ring::Ring;
use crate::padic::valuation::{q_to_string, Val};
use crate::padic::{ExtElem, ExtensionRing, PadicScalar, ScalarRecord};
use crate::parallel::par_map;
use crate::series::{ps_log_exp, Coeff, LogExp, MonomialTable, Series};
use crate::subscheme::{hensel_parametrize, lift_series, subtorus_test, CurveChart, Subscheme, SubtorusJson};

/// Deepest torsion level supported for weights.
pub const MAX_LEVEL: u32 = 3;
/// Largest exponent box side accepted by the classifier.
pub const MAX_BOX: u64 = 200;
/// Default cap on the number of enumerated weights.
pub const DEFAULT_CAP: usize = 250_000;

/// A weight point together with the data that produced it.
#[derive(Clone, Debug)]
pub struct LocallyAlgebraicWeight {
    pub p: u64,
    pub k: Vec<BigInt>,
    /// Exact order of `zeta_i` is `p^(levels[i])`.
    pub levels: Vec<u32>,
    /// `zeta_i = zeta_(p^L_i)^(s_i)`, `p` not dividing `s_i` when `L_i > 0`.
    pub selectors: Vec<u64>,
    /// `gamma_i`; always `p`.
    pub gamma: u64,
    pub point: GroupPoint<ExtElem>,
}

impl LocallyAlgebraicWeight {
    pub fn is_algebraic(&self) -> bool {
        self.levels.iter().all(|&l| l == 0)
    }

    pub fn max_level(&self) -> u32 {
        self.levels.iter().copied().max().unwrap_or(0)
    }

    /// Coordinates as scalars; `None` above level 0.
    pub fn scalar_point(&self) -> Option<GroupPoint<PadicScalar>> {
        let coords = self.point.coords.iter().map(ExtElem::as_scalar).collect::<Option<Vec<_>>>()?;
        Some(GroupPoint { coords })
    }

    pub fn to_json(&self) -> WeightJson {
        WeightJson {
            p: self.p,
            gamma: self.gamma,
            k: self.k.iter().map(BigInt::to_string).collect(),
            levels: self.levels.clone(),
            selectors: self.selectors.clone(),
            coordinates: self.point.coords.iter().map(ExtElem::to_records).collect(),
            valuations: self.point.coords.iter().map(ExtElem::valuation_val).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightJson {
    pub p: u64,
    pub gamma: u64,
    pub k: Vec<String>,
    pub levels: Vec<u32>,
    pub selectors: Vec<u64>,
    pub coordinates: Vec<Vec<ScalarRecord>>,
    pub valuations: Vec<Val>,
}

fn weight_ring(p: u64, level: u32, prec: i64) -> Result<Ring> {
    if level == 0 {
        ExtensionRing::trivial(p, prec)
    } else {
        ExtensionRing::cyclotomic(p, level, prec)
    }
}

/// `(1 + p)^k` for any integer `k`.
fn one_plus_p_pow(p: u64, k: &BigInt, prec: i64) -> Result<PadicScalar> {
    let base = PadicScalar::from_i64(p, 1 + p as i64, prec);
    let u = base.pow_big(k.magnitude());
    if k.is_negative() {
        u.inverse()
    } else {
        Ok(u)
    }
}

/// `zeta_(p^level)^s` inside `ring`, whose level is at least `level`.
fn zeta_in(ring: &Ring, level: u32, s: u64) -> ExtElem {
    if level == 0 {
        return ExtElem::one(ring);
    }
    let top = ring.cyclotomic_level().unwrap_or(0);
    let p = ring.prime();
    let one = PadicScalar::one(p, ring.precision());
    let zeta = ExtElem::generator(ring, 0).add_scalar(&one);
    zeta.pow(&(BigUint::from(s) * BigUint::from(p).pow(top - level)))
}

/// `((1 + p)^(k_i) zeta_i - 1)_i` over the cyclotomic ring of the largest level.
pub fn weight_point(p: u64, k: &[BigInt], levels: &[u32], selectors: &[u64], prec: i64) -> Result<LocallyAlgebraicWeight> {
    let n = k.len();
    if levels.len() != n || selectors.len() != n {
        return Err(Error::VariableMismatch(levels.len().min(selectors.len()), n));
    }
    if n == 0 {
        return Err(Error::InvalidInput("weight needs at least one coordinate".into()));
    }
    let top = levels.iter().copied().max().unwrap();
    if top > MAX_LEVEL {
        return Err(Error::LevelTooDeep(top));
    }
    let mut sel = Vec::with_capacity(n);
    for (&l, &s) in levels.iter().zip(selectors) {
        if l == 0 {
            sel.push(0);
            continue;
        }
        let s = s % p.pow(l);
        if s % p == 0 {
            return Err(Error::InvalidInput(format!("selector {s} does not give a root of exact order p^{l}")));
        }
        sel.push(s);
    }
    let ring = weight_ring(p, top, prec)?;
    let one = PadicScalar::one(p, prec);
    let mut coords = Vec::with_capacity(n);
    for i in 0..n {
        let u = one_plus_p_pow(p, &k[i], prec)?;
        let z = zeta_in(&ring, levels[i], sel[i]);
        coords.push(z.scale(&u).add_scalar(&(-&one)));
    }
    Ok(LocallyAlgebraicWeight {
        p,
        k: k.to_vec(),
        levels: levels.to_vec(),
        selectors: sel,
        gamma: p,
        point: GroupPoint::new(coords)?,
    })
}

/// Level-0 weights lie in the module generated by `(1 + p)^(e_i) - 1`.
pub fn weight_in_standard_gamma(w: &LocallyAlgebraicWeight, threshold: i64) -> Result<Option<bool>> {
    let Some(pt) = w.scalar_point() else { return Ok(None) };
    let prec = pt.coords.iter().map(PadicScalar::precision).min().unwrap();
    let gamma = GammaModule::standard(w.p, pt.dim(), prec);
    Ok(Some(gamma.membership(&pt, threshold)?.member))
}

/// `(1 + x_i)^(p^k) - 1` coordinatewise.
pub fn pk_pushforward_point<C: Coeff>(pt: &GroupPoint<C>, k: u32) -> GroupPoint<C> {
    let e = BigUint::from(pt.coords[0].prime()).pow(k);
    let coords = pt
        .coords
        .iter()
        .map(|x| {
            let one = x.one_like().with_precision(x.precision());
            x.add(&one).pow_big(&e).add(&one.neg())
        })
        .collect();
    GroupPoint { coords }
}

/// Pushforward of a weight, with the bookkeeping of the new weight:
/// exponents times `p^k`, levels lowered by `k`.
pub fn pk_pushforward_weight(w: &LocallyAlgebraicWeight, k: u32) -> Result<(GroupPoint<ExtElem>, LocallyAlgebraicWeight)> {
    let pushed = pk_pushforward_point(&w.point, k);
    let pk = BigInt::from(w.p).pow(k);
    let ks: Vec<BigInt> = w.k.iter().map(|x| x * &pk).collect();
    let levels: Vec<u32> = w.levels.iter().map(|&l| l.saturating_sub(k)).collect();
    let sel: Vec<u64> = w.selectors.iter().zip(&levels).map(|(&s, &l)| if l == 0 { 0 } else { s % w.p.pow(l) }).collect();
    let prec = w.point.coords[0].precision();
    let expected = weight_point(w.p, &ks, &levels, &sel, prec)?;
    Ok((pushed, expected))
}

/// Whether two points agree exactly after embedding into a common ring.
pub fn same_point(a: &GroupPoint<ExtElem>, b: &GroupPoint<ExtElem>) -> Result<bool> {
    if a.dim() != b.dim() {
        return Ok(false);
    }
    for (x, y) in a.coords.iter().zip(&b.coords) {
        let (x, y) = if x.ring().degree() >= y.ring().degree() { (x.clone(), y.embed(x.ring())?) } else { (x.embed(y.ring())?, y.clone()) };
        if !x.sub(&y).is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Image of a graph chart `x_2 = h(x_1)` under `[p^k]` on both coordinates:
/// `h~ = [p^k] o h o [p^k]^(-1)`, then re-parametrized from `x_2 - h~(x_1)`.
pub fn pk_pushforward_chart(chart: &CurveChart<PadicScalar>, k: u32) -> Result<CurveChart<PadicScalar>> {
    if chart.nvars != 2 || chart.h.nvars() != 1 {
        return Err(Error::ChartInvalid("pushforward needs a curve chart in G_m^2".into()));
    }
    if k > 6 {
        return Err(Error::InvalidInput(format!("series pushforward supports k <= 6, got {k}")));
    }
    let h = &chart.h;
    let p = h.prime();
    let prec = h.ambient_precision();
    let t = h.table().clone();
    let pk = BigInt::from(p).pow(k);
    let pk_scalar = PadicScalar::from_bigint(p, &pk, prec);
    // [p^k]^(-1)(u) = exp(log(1 + u) / p^k) - 1
    let u = Series::var(&t, 0, p, prec);
    let lu = ps_log_exp(&u, LogExp::Log1p)?;
    let w = ps_log_exp(&lu.scale(&pk_scalar.inverse()?), LogExp::Exp)?;
    let mult = binomial_series(&t, p, &Multiplier::Int(pk), prec)?;
    let inner = h.compose(std::slice::from_ref(&w))?;
    let pushed = mult.compose(std::slice::from_ref(&inner))?;
    if !pushed.is_integral() {
        return Err(Error::ChartInvalid(format!("the [p^{k}] image has non-integral coefficients to degree {}", t.degree())));
    }
    let t2 = MonomialTable::new(2, t.degree());
    let x1 = Series::var(&t2, 0, p, pushed.min_precision());
    let x2 = Series::var(&t2, 1, p, pushed.min_precision());
    let f = x2.sub(&pushed.compose(&[x1])?)?;
    hensel_parametrize(&f, 1)
}

/// Graph chart over `G_m^2`, checked.
fn check_chart(chart: &CurveChart<PadicScalar>) -> Result<()> {
    if chart.nvars != 2 || chart.h.nvars() != 1 || chart.pivot != 1 {
        return Err(Error::ChartInvalid("classification needs a graph chart x_2 = h(x_1)".into()));
    }
    if !chart.h.constant_term().is_zero() {
        return Err(Error::ChartInvalid("h(0) must vanish".into()));
    }
    Ok(())
}

/// Classifier options.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassifyOptions {
    /// Exponents range over `[0, k_max]`.
    pub k_max: u64,
    /// Torsion levels `0..=levels`.
    pub levels: u32,
    /// Keep only parallel weights `k_1 = k_2`.
    #[serde(default)]
    pub parallel_only: bool,
    #[serde(default = "default_cap")]
    pub cap: usize,
}

fn default_cap() -> usize {
    DEFAULT_CAP
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { k_max: 20, levels: 2, parallel_only: false, cap: DEFAULT_CAP }
    }
}

/// One enumerated weight and its distance to the curve.
#[derive(Clone, Debug, Serialize)]
pub struct WeightRow {
    pub k1: u64,
    pub k2: u64,
    pub level: u32,
    pub s1: u64,
    pub s2: u64,
    pub distance: Val,
    pub on_curve: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum WeightVerdict {
    /// Hits at every tested level and the chart is a subtorus translate.
    Special { lambda: Vec<ScalarRecord> },
    /// No hits above level `m` on the tested range.
    BoundedOrder { m: u32 },
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeightReport {
    pub p: u64,
    pub gamma: u64,
    pub options: ClassifyOptions,
    pub points: usize,
    pub hits_by_level: Vec<usize>,
    pub hits: Vec<WeightRow>,
    pub subtorus: Option<SubtorusJson>,
    #[serde(flatten)]
    pub verdict: WeightVerdict,
    #[serde(skip)]
    pub rows: Vec<WeightRow>,
}

impl WeightReport {
    pub fn is_special(&self) -> bool {
        matches!(self.verdict, WeightVerdict::Special { .. })
    }

    /// `k1,k2,level,s1,s2,distance,on_curve`, one line per enumerated weight.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k1,k2,level,s1,s2,distance,on_curve\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{},{},{},{}\n", r.k1, r.k2, r.level, r.s1, r.s2, r.distance, r.on_curve));
        }
        out
    }
}

/// Selectors `(s_1, s_2)` at one level: units mod `p^level`, or `(0, 0)` at level 0.
fn selector_pairs(p: u64, level: u32) -> Vec<(u64, u64)> {
    if level == 0 {
        return vec![(0, 0)];
    }
    let units: Vec<u64> = (1..p.pow(level)).filter(|s| s % p != 0).collect();
    units.iter().flat_map(|&a| units.iter().map(move |&b| (a, b))).collect()
}

/// Enumerates the weight box at each level and tests which weights lie on the chart.
pub fn classify_weight_closure(chart: &CurveChart<PadicScalar>, opts: &ClassifyOptions) -> Result<WeightReport> {
    check_chart(chart)?;
    if opts.k_max > MAX_BOX {
        return Err(Error::InvalidInput(format!("exponent box {} exceeds {MAX_BOX}", opts.k_max)));
    }
    if opts.levels > MAX_LEVEL {
        return Err(Error::LevelTooDeep(opts.levels));
    }
    let h = &chart.h;
    let p = h.prime();
    let prec = h.ambient_precision();
    let side = opts.k_max + 1;
    let ks: Vec<(u64, u64)> = if opts.parallel_only {
        (0..side).map(|k| (k, k)).collect()
    } else {
        (0..side).flat_map(|a| (0..side).map(move |b| (a, b))).collect()
    };
    let total: usize = (0..=opts.levels).map(|l| selector_pairs(p, l).len() * ks.len()).sum();
    if total > opts.cap {
        return Err(Error::EnumerationOverflow(total, opts.cap));
    }
    let t2 = MonomialTable::new(2, h.degree());
    let x1 = Series::var(&t2, 0, p, prec);
    let x2 = Series::var(&t2, 1, p, prec);
    let f = x2.sub(&h.compose(&[x1])?)?;
    let x = Subscheme::gm_hypersurface(p, prec, f)?;
    let units: Vec<PadicScalar> = (0..side).map(|k| one_plus_p_pow(p, &BigInt::from(k), prec)).collect::<Result<_>>()?;
    let one = PadicScalar::one(p, prec);
    let mut rows = Vec::with_capacity(total);
    for level in 0..=opts.levels {
        let ring = weight_ring(p, level, prec)?;
        let xl = x.lift(&ExtElem::zero(&ring))?;
        let sels = selector_pairs(p, level);
        let zetas: Vec<ExtElem> = (0..p.pow(level)).map(|s| zeta_in(&ring, level, s)).collect();
        let jobs: Vec<((u64, u64), (u64, u64))> = sels.iter().flat_map(|&s| ks.iter().map(move |&k| (s, k))).collect();
        let out = par_map(&jobs, |&((s1, s2), (k1, k2))| -> Result<WeightRow> {
            let c1 = zetas[s1 as usize].scale(&units[k1 as usize]).add_scalar(&(-&one));
            let c2 = zetas[s2 as usize].scale(&units[k2 as usize]).add_scalar(&(-&one));
            let d = xl.distance(&GroupPoint { coords: vec![c1, c2] })?;
            Ok(WeightRow { k1, k2, level, s1, s2, distance: d.value, on_curve: d.is_infinite() })
        });
        for r in out {
            rows.push(r?);
        }
    }
    let hits: Vec<WeightRow> = rows.iter().filter(|r| r.on_curve).cloned().collect();
    let mut hits_by_level = vec![0usize; opts.levels as usize + 1];
    for r in &hits {
        hits_by_level[r.level as usize] += 1;
    }
    let mut subtorus = None;
    let verdict = if hits.is_empty() {
        WeightVerdict::Inconclusive
    } else if hits_by_level.iter().all(|&c| c > 0) {
        // translate the first level-0 hit to the origin
        let base = hits.iter().find(|r| r.level == 0).map(|r| GroupPoint { coords: vec![units[r.k1 as usize].clone() - one.clone(), units[r.k2 as usize].clone() - one.clone()] });
        let cert = match &base {
            Some(b) => subtorus_test(h, Some(b))?,
            None => subtorus_test(h, None)?,
        };
        let j = cert.to_json();
        let special = cert.is_special();
        subtorus = Some(j);
        if special {
            WeightVerdict::Special { lambda: cert.lambda.records() }
        } else {
            WeightVerdict::Inconclusive
        }
    } else {
        let m = hits_by_level.iter().rposition(|&c| c > 0).unwrap() as u32;
        WeightVerdict::BoundedOrder { m }
    };
    Ok(WeightReport { p, gamma: p, options: opts.clone(), points: rows.len(), hits_by_level, hits, subtorus, verdict, rows })
}

/// `lambda` of a special verdict as an integer, when it is one.
pub fn special_lambda(r: &WeightReport) -> Option<i64> {
    match &r.verdict {
        WeightVerdict::Special { lambda } => lambda.first().and_then(|rec| PadicScalar::from_record(r.p, rec).ok()).and_then(|s| s.to_i64()),
        _ => None,
    }
}

/// Valuation string for reports.
pub fn val_string(v: &Val) -> String {
    match v {
        Val::Finite(q) => q_to_string(q),
        other => other.to_string(),
    }
}

/// Lifts a scalar chart into the ring of `like`.
pub fn lift_chart(chart: &CurveChart<PadicScalar>, like: &ExtElem) -> Result<CurveChart<ExtElem>> {
    Ok(CurveChart { h: lift_series(&chart.h, like)?, pivot: chart.pivot, nvars: chart.nvars, domain: chart.domain.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::valuation::{q, qi};

    const P: u64 = 3;
    const N: i64 = 30;

    fn ks(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn examples() {
        let w = weight_point(P, &ks(&[0, 0]), &[0, 0], &[0, 0], N).unwrap();
        assert!(w.point.coords.iter().all(ExtElem::is_zero));
        let w = weight_point(P, &ks(&[2]), &[0], &[0], N).unwrap();
        assert_eq!(w.point.coords[0].as_scalar().unwrap().to_i64(), Some(15));
        assert_eq!(weight_in_standard_gamma(&w, 20).unwrap(), Some(true));
        let w = weight_point(P, &ks(&[0]), &[1], &[1], N).unwrap();
        assert_eq!(w.point.coords[0].valuation_val(), Val::Finite(q(1, 2)));
        let (pushed, _) = pk_pushforward_weight(&w, 1).unwrap();
        assert!(pushed.coords[0].is_zero());
        let w = weight_point(P, &ks(&[2]), &[0], &[0], N).unwrap();
        let (pushed, e) = pk_pushforward_weight(&w, 1).unwrap();
        assert_eq!(pushed.coords[0].as_scalar().unwrap().to_i64(), Some(4095));
        assert!(same_point(&pushed, &e.point).unwrap());
    }

    #[test]
    fn pushforward_lowers_levels() {
        let w = weight_point(P, &ks(&[1, 4]), &[2, 1], &[4, 2], N).unwrap();
        let (pushed, e) = pk_pushforward_weight(&w, 1).unwrap();
        assert_eq!(e.levels, vec![1, 0]);
        assert!(same_point(&pushed, &e.point).unwrap());
        assert_eq!(pushed.coords[1].valuation_val(), Val::Finite(qi(2)));
    }

    #[test]
    fn diagonal_chart_pushforward_is_diagonal() {
        let t = MonomialTable::new(1, 8);
        let c = CurveChart::graph(Series::var(&t, 0, P, 60)).unwrap();
        let d = pk_pushforward_chart(&c, 1).unwrap();
        assert_eq!(d.h.coeff_uni(1).to_i64(), Some(1));
        for k in 2..=8 {
            assert!(d.h.coeff_uni(k).is_zero(), "degree {k}");
        }
    }
}
