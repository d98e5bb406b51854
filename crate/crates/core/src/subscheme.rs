//! Closed formal subschemes of product formal groups given by generators.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formal_group::{torsion_points, FormalGroupKind, FormalGroupLaw, GroupPoint, Multiplier, ProductGroup};
use crate::padic::ring::same_ring;
use crate::padic::valuation::{qi, Val, Q};
use crate::padic::{ExtElem, PadicScalar, ScalarRecord};
use crate::parallel::par_map;
use crate::series::{ps_log_exp, Coeff, LogExp, MonomialTable, Series, SeriesJson, TailBound, TruncatedSeries};

/// Coefficients that can be moved into the coefficient ring of a point.
pub trait LiftCoeff<D: Coeff>: Coeff {
    fn lift_to(&self, like: &D) -> Result<D>;
}

impl<D: Coeff> LiftCoeff<D> for PadicScalar {
    fn lift_to(&self, like: &D) -> Result<D> {
        Ok(like.from_scalar_like(self))
    }
}

impl LiftCoeff<ExtElem> for ExtElem {
    fn lift_to(&self, like: &ExtElem) -> Result<ExtElem> {
        if same_ring(self.ring(), like.ring()) {
            Ok(self.clone())
        } else {
            self.embed(like.ring())
        }
    }
}

/// Moves a series into the coefficient ring of `like`.
pub fn lift_series<C: LiftCoeff<D>, D: Coeff>(s: &TruncatedSeries<C>, like: &D) -> Result<TruncatedSeries<D>> {
    let zero = like.zero_like(s.ambient_precision());
    let mut err = None;
    let out = s.map_coeffs(&zero, |c| match c.lift_to(like) {
        Ok(x) => x,
        Err(e) => {
            err.get_or_insert(e);
            zero.clone()
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// `V(f_1, ..., f_k)` inside a product of one-dimensional laws.
#[derive(Clone, Debug)]
pub struct FormalSubscheme<C: Coeff> {
    group: ProductGroup,
    generators: Vec<TruncatedSeries<C>>,
}

pub type Subscheme = FormalSubscheme<PadicScalar>;

/// Distance valuation with the precision it is certified to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Distance {
    /// `Finite(v)` exactly, or `AtLeast(c)` when every generator vanishes to `c`.
    pub value: Val,
    #[serde(with = "crate::padic::valuation::q_serde")]
    pub certified: Q,
}

impl Distance {
    pub fn is_infinite(&self) -> bool {
        !self.value.is_finite()
    }
}

impl<C: Coeff> FormalSubscheme<C> {
    pub fn new(group: ProductGroup, generators: Vec<TruncatedSeries<C>>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidInput("a subscheme needs at least one generator".into()));
        }
        for g in &generators {
            if g.nvars() != group.dim() {
                return Err(Error::VariableMismatch(g.nvars(), group.dim()));
            }
            if g.prime() != group.prime() {
                return Err(Error::PrimeMismatch(g.prime(), group.prime()));
            }
            if !g.is_integral() {
                return Err(Error::InvalidInput("generators must be integral".into()));
            }
        }
        Ok(FormalSubscheme { group, generators })
    }

    pub fn group(&self) -> &ProductGroup {
        &self.group
    }

    pub fn generators(&self) -> &[TruncatedSeries<C>] {
        &self.generators
    }

    pub fn degree(&self) -> u32 {
        self.generators.iter().map(TruncatedSeries::degree).max().unwrap()
    }

    pub fn prime(&self) -> u64 {
        self.group.prime()
    }

    /// Same subscheme with coefficients in the ring of `like`.
    pub fn lift<D: Coeff>(&self, like: &D) -> Result<FormalSubscheme<D>>
    where
        C: LiftCoeff<D>,
    {
        let generators = self.generators.iter().map(|g| lift_series(g, like)).collect::<Result<Vec<_>>>()?;
        Ok(FormalSubscheme { group: self.group.clone(), generators })
    }

    /// `min_i v(f_i(P))`, computed on the generators.
    pub fn distance(&self, pt: &GroupPoint<C>) -> Result<Distance> {
        if pt.dim() != self.group.dim() {
            return Err(Error::VariableMismatch(pt.dim(), self.group.dim()));
        }
        let mut acc: Option<Val> = None;
        let mut certified: Option<Q> = None;
        for g in &self.generators {
            let e = g.evaluate(&pt.coords)?;
            let v = e.val();
            certified = Some(certified.map_or(e.certified, |c: Q| c.min(e.certified)));
            acc = Some(acc.map_or(v, |a| a.min(v)));
        }
        Ok(Distance { value: acc.unwrap(), certified: certified.unwrap() })
    }

    /// `T_Q X`: generators `f_i(x +_F Q)`.
    pub fn translate(&self, q: &GroupPoint<C>) -> Result<Self> {
        let n = self.group.dim();
        if q.dim() != n {
            return Err(Error::VariableMismatch(q.dim(), n));
        }
        let mut out = Vec::with_capacity(self.generators.len());
        for g in &self.generators {
            let args = shifted_coordinates(&self.group, g.table(), g.zero_template(), q, None)?;
            out.push(g.compose_shifted(&args)?);
        }
        Ok(FormalSubscheme { group: self.group.clone(), generators: out })
    }
}

/// `x_j +_F Q_j` as series in the variables of `table`, or in the given
/// coordinate series when `coords` is set.
fn shifted_coordinates<C: Coeff>(
    group: &ProductGroup,
    table: &std::sync::Arc<MonomialTable>,
    zero: &C,
    q: &GroupPoint<C>,
    coords: Option<&[TruncatedSeries<C>]>,
) -> Result<Vec<TruncatedSeries<C>>> {
    let one = zero.one_like().with_precision(zero.precision());
    let mut out = Vec::with_capacity(group.dim());
    for (j, law) in group.factors.iter().enumerate() {
        let x = match coords {
            Some(cs) => cs[j].clone(),
            None => TruncatedSeries::variable(table, j, &one),
        };
        let qj = &q.coords[j];
        if law.is_multiplicative() {
            // Q + (1 + Q) x
            let s = x.mul_coeff(&one.add(qj)).add_constant(qj);
            out.push(s);
        } else {
            let f = lift_series(law.law(), zero)?;
            let cq = TruncatedSeries::constant(x.table(), qj);
            out.push(f.compose_shifted(&[x, cq])?);
        }
    }
    Ok(out)
}

impl Subscheme {
    /// A hypersurface in `G_m^n` given by an exact polynomial.
    pub fn gm_hypersurface(p: u64, prec: i64, f: Series) -> Result<Self> {
        let n = f.nvars();
        let group = ProductGroup::multiplicative(p, n, f.degree(), prec);
        Subscheme::new(group, vec![f])
    }

    /// `V(X_1 - X_2 - c)` in `G_m^2`.
    pub fn shifted_diagonal(p: u64, d: u32, prec: i64, c: i64) -> Result<Self> {
        let t = MonomialTable::new(2, d);
        let f = Series::from_integer_terms(&t, p, prec, &[(vec![1, 0], 1), (vec![0, 1], -1), (vec![0, 0], -c)])?;
        Self::gm_hypersurface(p, prec, f)
    }

    /// `V(X_1 - X_2)` in `G_m^2`.
    pub fn diagonal(p: u64, d: u32, prec: i64) -> Result<Self> {
        Self::shifted_diagonal(p, d, prec, 0)
    }

    /// `V(X_2 - [a](X_1))` in `G_m^2`.
    pub fn graph_of_mult(p: u64, d: u32, prec: i64, a: i64) -> Result<Self> {
        let g = FormalGroupLaw::multiplicative(p, d, prec);
        let ma = g.mult_by_series(&Multiplier::from(a))?;
        let t = MonomialTable::new(2, d);
        let mut f = Series::var(&t, 1, p, prec);
        for k in 1..=d {
            let c = ma.coeff_uni(k);
            if !c.is_zero() {
                f.set_coeff(&[k, 0], -c);
            }
        }
        if !ma.is_exact() {
            f.set_inexact(ma.tail());
        }
        Self::gm_hypersurface(p, prec, f)
    }

    pub fn to_json(&self) -> SubschemeJson {
        SubschemeJson {
            p: self.prime(),
            ambient: self.group.factors.iter().map(|g| g.kind().clone()).collect(),
            generators: self.generators.iter().map(Series::to_json).collect(),
        }
    }

    pub fn from_json(j: &SubschemeJson, prec: i64) -> Result<Self> {
        let generators = j.generators.iter().map(Series::from_json).collect::<Result<Vec<_>>>()?;
        let d = generators.iter().map(Series::degree).max().unwrap_or(1);
        let laws = j
            .ambient
            .iter()
            .map(|k| FormalGroupLaw::new(k.clone(), j.p, d, prec))
            .collect::<Result<Vec<_>>>()?;
        Subscheme::new(ProductGroup::new(laws)?, generators)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubschemeJson {
    pub p: u64,
    pub ambient: Vec<FormalGroupKind>,
    pub generators: Vec<SeriesJson>,
}

/// Outcome of comparing `d(alpha, T_{sigma(alpha) - alpha} X)` with `d(alpha, X)`.
#[derive(Clone, Debug, Serialize)]
pub struct GaloisReport {
    #[serde(with = "crate::padic::ring::bigint_str")]
    pub a: BigInt,
    pub translated: Distance,
    pub original: Distance,
    /// `d(sigma(alpha), X)`, the same quantity reached through the point.
    pub conjugate: Distance,
    pub holds: bool,
}

/// Compares both sides of the Galois translate identity for `X` over `Z_p`.
pub fn galois_distance_check(alpha: &GroupPoint<ExtElem>, a: &BigInt, x: &Subscheme) -> Result<GaloisReport> {
    let ring = alpha.coords[0].ring().clone();
    if ring.cyclotomic_level().is_none() {
        return Err(Error::UnsupportedRing("Galois check needs a cyclotomic point".into()));
    }
    let sigma = GroupPoint::new(alpha.coords.iter().map(|c| c.conjugate(a)).collect::<Result<Vec<_>>>()?)?;
    let (q, _) = x.group().sub(&sigma, alpha)?;
    let xl = x.lift(&alpha.coords[0])?;
    let translated = xl.translate(&q)?.distance(alpha)?;
    let original = xl.distance(alpha)?;
    let conjugate = xl.distance(&sigma)?;
    let holds = translated.value.same_verdict(&original.value);
    Ok(GaloisReport { a: a.clone(), translated, original, conjugate, holds })
}

/// `x_pivot = h(other variables)` on a hypersurface near the origin.
#[derive(Clone, Debug)]
pub struct CurveChart<C: Coeff> {
    pub h: TruncatedSeries<C>,
    pub pivot: usize,
    pub nvars: usize,
    pub domain: String,
}

impl<C: Coeff> CurveChart<C> {
    /// Chart of a curve in two variables directly from `x_2 = h(x_1)`.
    pub fn graph(h: TruncatedSeries<C>) -> Result<Self> {
        if h.nvars() != 1 {
            return Err(Error::ChartInvalid("graph charts are univariate".into()));
        }
        if !h.constant_term().is_zero() {
            return Err(Error::ChartInvalid("h(0) must vanish".into()));
        }
        Ok(CurveChart { h, pivot: 1, nvars: 2, domain: "open unit disk".into() })
    }

    /// The chart's point as coordinate series in the free variables.
    pub fn coordinates(&self) -> Vec<TruncatedSeries<C>> {
        let one = self.h.zero_template().one_like().with_precision(self.h.ambient_precision());
        let mut free = 0;
        (0..self.nvars)
            .map(|i| {
                if i == self.pivot {
                    self.h.clone()
                } else {
                    free += 1;
                    TruncatedSeries::variable(self.h.table(), free - 1, &one)
                }
            })
            .collect()
    }

    /// `h'(0)` for a curve chart.
    pub fn slope(&self) -> C {
        self.h.coeff_uni(1).clone()
    }
}

/// Implicit-function solution of `f(x, h(x)) = 0` through the origin; a curve
/// linear in the pivot with constant leading coefficient may miss the origin.
pub fn hensel_parametrize<C: Coeff>(f: &TruncatedSeries<C>, pivot: usize) -> Result<CurveChart<C>> {
    let n = f.nvars();
    if n < 2 || pivot >= n {
        return Err(Error::ChartInvalid(format!("pivot {pivot} out of range for {n} variables")));
    }
    let mut e = vec![0u32; n];
    e[pivot] = 1;
    let lead = f.coeff(&e).cloned().unwrap_or_else(|| f.zero_template().clone());
    if lead.val_floor() != Some(0) {
        return Err(Error::SingularAtOrigin);
    }
    let d = f.degree();
    let t = MonomialTable::new(n - 1, d);
    let zero = f.zero_template().clone();
    let one = zero.one_like().with_precision(f.ambient_precision());
    let args = |h: &TruncatedSeries<C>| -> Vec<TruncatedSeries<C>> {
        let mut free = 0;
        (0..n)
            .map(|i| {
                if i == pivot {
                    h.clone()
                } else {
                    free += 1;
                    TruncatedSeries::variable(&t, free - 1, &one)
                }
            })
            .collect()
    };
    let linear = f.terms().all(|(ex, c)| c.is_zero() || ex[pivot] == 0 || ex == e.as_slice());
    if linear {
        // f = a x_pivot + b(x) with constant a
        let mut b = f.clone();
        b.set_coeff(&e, zero.zero_like(f.ambient_precision()));
        let mut h = b.compose(&args(&TruncatedSeries::zero(&t, &zero)))?;
        let ainv = lead.inverse()?;
        h = h.mul_coeff(&ainv.neg());
        if let Val::Finite(v) = h.constant_term().val() {
            if v <= qi(0) {
                return Err(Error::ChartInvalid("the curve misses the open disk over the origin".into()));
            }
        }
        return Ok(CurveChart { h, pivot, nvars: n, domain: "open unit polydisk".into() });
    }
    if !f.constant_term().is_zero() {
        return Err(Error::ChartInvalid("f(0) must vanish".into()));
    }
    let df = f.derivative(pivot);
    let mut h = TruncatedSeries::zero(&t, &zero);
    let steps = 64 - (d as u64 + 1).leading_zeros() + 2;
    for _ in 0..steps {
        let a = args(&h);
        let r = f.compose(&a)?;
        let j = df.compose(&a)?;
        h = h.sub(&r.mul(&j.inverse()?)?)?;
    }
    if !f.is_exact() || !h.is_exact() {
        h.set_inexact(Some(TailBound::INTEGRAL));
    }
    Ok(CurveChart { h, pivot, nvars: n, domain: "where the pivot derivative is a unit".into() })
}

/// `h` re-centred at a base point `Q` of the curve: `h~(t) = h(t + Q_1) - Q_2`
/// in `G_m`, so that the translated curve passes through the origin.
pub fn chart_at_base<C: Coeff>(h: &TruncatedSeries<C>, base: &GroupPoint<C>) -> Result<TruncatedSeries<C>> {
    if base.dim() != 2 {
        return Err(Error::VariableMismatch(base.dim(), 2));
    }
    let (q1, q2) = (&base.coords[0], &base.coords[1]);
    let one = h.zero_template().one_like().with_precision(h.ambient_precision());
    let x = TruncatedSeries::variable(h.table(), 0, &one);
    let arg = x.mul_coeff(&one.add(q1)).add_constant(q1);
    let hq = h.compose_shifted(&[arg])?;
    // (1 + h(..)) / (1 + Q_2) - 1
    let inv = one.add(q2).inverse()?;
    let out = hq.add_constant(&one).mul_coeff(&inv).add_constant(&one.neg());
    Ok(out)
}

/// Torsion part of the stabilizer found on the chart.
#[derive(Clone, Debug, Serialize)]
pub struct StabilizerReport {
    pub level: u32,
    pub d_prime: u32,
    pub threshold: i64,
    /// Exponent pairs `(j_1, j_2)`: the point `(zeta^j_1 - 1, zeta^j_2 - 1)`, `zeta` of order `p^level`.
    pub points: Vec<(u64, u64)>,
    /// Number of stabilizer points of order dividing `p^k`, for `k = 0..=level`.
    pub sizes_by_level: Vec<usize>,
    pub closed: bool,
    pub likely_positive_dimensional: bool,
}

/// Whether every coefficient up to `d` vanishes with valuation at least `threshold`.
fn vanishes_to<C: Coeff>(s: &TruncatedSeries<C>, d: u32, threshold: i64) -> bool {
    (0..s.table().len()).all(|i| {
        if s.table().deg(i) > d {
            return true;
        }
        match s.coeff_at(i).val() {
            Val::Finite(v) => v >= qi(threshold),
            Val::AtLeast(b) => b >= qi(threshold),
        }
    })
}

/// Torsion points `Q` of `G_m^2` with `f(chart + Q) = 0` to degree `D' = D / 2`.
pub fn stabilizer_torsion(x: &Subscheme, chart: &CurveChart<PadicScalar>, r: u32, threshold: Option<i64>) -> Result<StabilizerReport> {
    if x.group().dim() != 2 || x.generators().len() != 1 {
        return Err(Error::ChartInvalid("stabilizer search needs a plane curve".into()));
    }
    if !x.group().is_multiplicative() {
        return Err(Error::UnsupportedKind("torsion enumeration outside G_m".into()));
    }
    if r > 3 {
        return Err(Error::LevelTooDeep(r));
    }
    let f = &x.generators()[0];
    let prec = f.ambient_precision().min(chart.h.ambient_precision());
    let threshold = threshold.unwrap_or(prec / 2);
    let d_prime = (chart.h.degree() / 2).max(1);
    let p = x.prime();
    let tors = torsion_points(p, r, prec)?;
    let like = tors[0].point.clone();
    let fl = lift_series(f, &like)?;
    let coords: Vec<TruncatedSeries<ExtElem>> =
        chart.coordinates().iter().map(|c| lift_series(c, &like)).collect::<Result<_>>()?;
    let check = lift_series(&chart.h, &like)?;
    let zero = check.zero_template().clone();
    let table = check.table().clone();
    let pairs: Vec<(usize, usize)> = (0..tors.len()).flat_map(|a| (0..tors.len()).map(move |b| (a, b))).collect();
    let hits = par_map(&pairs, |&(a, b)| -> Result<bool> {
        let q = GroupPoint { coords: vec![tors[a].point.clone(), tors[b].point.clone()] };
        let args = shifted_coordinates(x.group(), &table, &zero, &q, Some(&coords))?;
        let g = fl.compose_shifted(&args)?;
        Ok(vanishes_to(&g, d_prime, threshold))
    });
    let mut points = Vec::new();
    for (&(a, b), hit) in pairs.iter().zip(hits) {
        if hit? {
            points.push((tors[a].exponent, tors[b].exponent));
        }
    }
    let order = p.pow(r);
    let set: std::collections::BTreeSet<(u64, u64)> = points.iter().copied().collect();
    let closed = points.iter().all(|&(a, b)| set.contains(&((order - a) % order, (order - b) % order)))
        && points.iter().all(|&(a, b)| points.iter().all(|&(c, e)| set.contains(&((a + c) % order, (b + e) % order))));
    let sizes_by_level: Vec<usize> = (0..=r)
        .map(|k| {
            let m = p.pow(r - k);
            points.iter().filter(|&&(a, b)| a % m == 0 && b % m == 0).count()
        })
        .collect();
    let likely_positive_dimensional = r >= 1 && (0..=r as usize).all(|k| sizes_by_level[k] >= p.pow(k as u32) as usize);
    Ok(StabilizerReport { level: r, d_prime, threshold, points, sizes_by_level, closed, likely_positive_dimensional })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SubtorusVerdict {
    Special,
    NotSpecial { degree: u32, valuation: Val },
}

/// Character `(1 + X_1)^lambda (1 + X_2)^(-1)` and the verdict for a curve chart.
#[derive(Clone, Debug)]
pub struct SubtorusCertificate<C: Coeff> {
    pub lambda: C,
    pub character: Vec<C>,
    pub base: Option<GroupPoint<C>>,
    pub verdict: SubtorusVerdict,
    pub degree: u32,
    /// Least precision among the compared coefficients.
    pub residual_precision: i64,
}

impl<C: Coeff> SubtorusCertificate<C> {
    pub fn is_special(&self) -> bool {
        self.verdict == SubtorusVerdict::Special
    }

    pub fn to_json(&self) -> SubtorusJson {
        SubtorusJson {
            lambda: self.lambda.records(),
            lambda_valuation: self.lambda.val(),
            character: self.character.iter().map(Coeff::records).collect(),
            base: self.base.as_ref().map(|b| b.coords.iter().map(Coeff::records).collect()),
            verdict: self.verdict.clone(),
            degree: self.degree,
            residual_precision: self.residual_precision,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SubtorusJson {
    pub lambda: Vec<ScalarRecord>,
    pub lambda_valuation: Val,
    pub character: Vec<Vec<ScalarRecord>>,
    pub base: Option<Vec<Vec<ScalarRecord>>>,
    #[serde(flatten)]
    pub verdict: SubtorusVerdict,
    pub degree: u32,
    pub residual_precision: i64,
}

/// Tests `log(1 + h(x)) = lambda log(1 + x)` with `lambda = h'(0)`.
pub fn subtorus_test<C: Coeff>(h: &TruncatedSeries<C>, base: Option<&GroupPoint<C>>) -> Result<SubtorusCertificate<C>> {
    if h.nvars() != 1 {
        return Err(Error::ChartInvalid("subtorus test needs a curve chart".into()));
    }
    let mut ht = match base {
        Some(q) => chart_at_base(h, q)?,
        None => h.clone(),
    };
    let d = ht.degree();
    let lambda = ht.coeff_uni(1).clone();
    let one = lambda.one_like().with_precision(ht.ambient_precision());
    let character = vec![lambda.clone(), one.neg()];
    let c0 = ht.constant_term().clone();
    if !c0.is_zero() {
        return Ok(SubtorusCertificate {
            lambda,
            character,
            base: base.cloned(),
            verdict: SubtorusVerdict::NotSpecial { degree: 0, valuation: c0.val() },
            degree: d,
            residual_precision: c0.precision(),
        });
    }
    ht.set_coeff(&[0], c0.zero_like(c0.precision()));
    let lh = ps_log_exp(&ht, LogExp::Log1p)?;
    let x = TruncatedSeries::variable(ht.table(), 0, &one);
    let lx = ps_log_exp(&x, LogExp::Log1p)?;
    let diff = lh.sub(&lx.mul_coeff(&lambda))?;
    let mut verdict = SubtorusVerdict::Special;
    for k in 1..=diff.degree() {
        let c = diff.coeff_uni(k);
        if !c.is_zero() {
            verdict = SubtorusVerdict::NotSpecial { degree: k, valuation: c.val() };
            break;
        }
    }
    Ok(SubtorusCertificate {
        lambda,
        character,
        base: base.cloned(),
        verdict,
        degree: d,
        residual_precision: diff.min_precision(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::valuation::q;
    use crate::padic::ExtensionRing;

    const P: u64 = 3;
    const N: i64 = 20;

    fn sc(x: i64) -> PadicScalar {
        PadicScalar::from_i64(P, x, N)
    }

    fn zeta_minus_one(level: u32, j: u64) -> ExtElem {
        let ring = ExtensionRing::cyclotomic(P, level, N).unwrap();
        let one = PadicScalar::one(P, N);
        ExtElem::generator(&ring, 0).add_scalar(&one).pow_u64(j).add_scalar(&(-&one))
    }

    #[test]
    fn diagonal_distances() {
        let x = Subscheme::diagonal(P, 4, N).unwrap();
        let z = zeta_minus_one(2, 1);
        let xl = x.lift(&z).unwrap();
        let d = xl.distance(&GroupPoint::new(vec![z.clone(), z.clone()]).unwrap()).unwrap();
        assert!(d.is_infinite());
        let d = x.distance(&GroupPoint::new(vec![sc(3), sc(0)]).unwrap()).unwrap();
        assert_eq!(d.value, Val::Finite(qi(1)));
        let z3 = zeta_minus_one(1, 1).embed(z.ring()).unwrap();
        let d = xl.distance(&GroupPoint::new(vec![z, z3]).unwrap()).unwrap();
        assert_eq!(d.value, Val::Finite(q(1, 6)));
    }

    #[test]
    fn translate_of_diagonal() {
        let x = Subscheme::diagonal(P, 4, N).unwrap();
        let t = x.translate(&GroupPoint::new(vec![sc(6), sc(6)]).unwrap()).unwrap();
        let g = &t.generators()[0];
        assert_eq!(g.coeff(&[1, 0]).unwrap().to_i64(), Some(7));
        assert_eq!(g.coeff(&[0, 1]).unwrap().to_i64(), Some(-7));
        assert!(g.constant_term().is_zero());
        let t0 = x.translate(&GroupPoint::new(vec![sc(0), sc(0)]).unwrap()).unwrap();
        assert!(t0.generators()[0].eq_to_precision(&x.generators()[0]).unwrap());
    }

    #[test]
    fn galois_examples() {
        let x = Subscheme::shifted_diagonal(P, 4, N, 3).unwrap();
        let z = zeta_minus_one(2, 1);
        let alpha = GroupPoint::new(vec![z.clone(), z]).unwrap();
        for a in [1, 2, 4] {
            let r = galois_distance_check(&alpha, &BigInt::from(a), &x).unwrap();
            assert!(r.holds, "a = {a}: {:?}", r);
        }
    }

    #[test]
    fn hensel_examples() {
        let t = MonomialTable::new(2, 8);
        let f = Series::from_integer_terms(&t, P, N, &[(vec![0, 1], 1), (vec![1, 0], -1)]).unwrap();
        let c = hensel_parametrize(&f, 1).unwrap();
        assert_eq!(c.h.coeff_uni(1).to_i64(), Some(1));
        assert!(c.h.is_exact());
        // antidiagonal of the multiplicative law gives [-1]
        let f = Series::from_integer_terms(&t, P, N, &[(vec![0, 1], 1), (vec![1, 0], 1), (vec![1, 1], 1)]).unwrap();
        let c = hensel_parametrize(&f, 1).unwrap();
        for k in 1..=8u32 {
            assert_eq!(c.h.coeff_uni(k).to_i64(), Some(if k % 2 == 1 { -1 } else { 1 }));
        }
        let g = Series::from_integer_terms(&t, P, N, &[(vec![0, 1], 3), (vec![1, 0], 1)]).unwrap();
        assert_eq!(hensel_parametrize(&g, 1).unwrap_err(), Error::SingularAtOrigin);
    }

    #[test]
    fn stabilizer_examples() {
        let x = Subscheme::diagonal(P, 4, N).unwrap();
        let chart = hensel_parametrize(&x.generators()[0], 1).unwrap();
        let r = stabilizer_torsion(&x, &chart, 2, None).unwrap();
        assert_eq!(r.points.len(), 9);
        assert!(r.points.iter().all(|(a, b)| a == b));
        assert!(r.closed && r.likely_positive_dimensional);
        let y = Subscheme::shifted_diagonal(P, 4, N, 3).unwrap();
        let r = stabilizer_torsion(&y, &chart, 1, None);
        assert!(r.is_err() || r.unwrap().points.len() <= 1);
    }

    #[test]
    fn subtorus_examples() {
        let t = MonomialTable::new(1, 8);
        let h = Series::var(&t, 0, 5, N);
        let c = subtorus_test(&h, None).unwrap();
        assert!(c.is_special());
        assert_eq!(c.lambda.to_i64(), Some(1));
        let h2 = Series::from_integer_terms(&t, 5, N, &[(vec![1], 1), (vec![2], 1)]).unwrap();
        let c = subtorus_test(&h2, None).unwrap();
        match c.verdict {
            SubtorusVerdict::NotSpecial { degree, .. } => assert_eq!(degree, 2),
            v => panic!("{v:?}"),
        }
    }
}
