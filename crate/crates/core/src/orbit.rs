//! Finitely generated modules of points, division towers and the dichotomy scan.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formal_group::{gm_mult_point, torsion_valuation, FormalGroupLaw, GroupPoint, Multiplier, ProductGroup};
use crate::padic::ring::{bigint_vec_str, ModulusSpec};
use crate::padic::scalar::ppow;
use crate::padic::valuation::{q_serde, q_to_string, qi, Val, Q};
use crate::padic::{ExtElem, ExtensionRing, PadicScalar};
use crate::parallel::par_map;
use crate::series::{log1p_point, Coeff};
use crate::subscheme::{hensel_parametrize, Distance, Subscheme};

/// Lower convex hull of `(i, v(a_i))` and the root valuations it predicts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NewtonPolygon {
    pub vertices: Vec<(u32, Val)>,
    pub segments: Vec<Segment>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Segment {
    #[serde(with = "q_serde")]
    pub root_valuation: Q,
    pub multiplicity: u32,
}

impl NewtonPolygon {
    /// Root valuations with multiplicity, largest first.
    pub fn root_valuations(&self) -> Vec<Q> {
        let mut out: Vec<Q> =
            self.segments.iter().flat_map(|s| std::iter::repeat_n(s.root_valuation, s.multiplicity as usize)).collect();
        out.sort_by(|a, b| b.cmp(a));
        out
    }
}

/// Newton polygon of `sum a_i X^i` from coefficient valuations (`None` for a
/// zero coefficient), cut at the first unit coefficient.
pub fn newton_polygon(vals: &[Option<Q>]) -> Result<NewtonPolygon> {
    let mut pts: Vec<(u32, Q)> = Vec::new();
    for (i, v) in vals.iter().enumerate() {
        if let Some(v) = v {
            pts.push((i as u32, *v));
            if *v == qi(0) {
                break;
            }
        }
    }
    if pts.is_empty() {
        return Err(Error::PolygonDegenerate);
    }
    let mut hull: Vec<(u32, Q)> = Vec::new();
    for pt in pts {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            // drop the middle point when it lies on or above the chord
            let lhs = (y2 - y1) * qi((pt.0 - x1) as i64);
            let rhs = (pt.1 - y1) * qi((x2 - x1) as i64);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let segments = hull
        .windows(2)
        .map(|w| Segment { root_valuation: (w[0].1 - w[1].1) / qi((w[1].0 - w[0].0) as i64), multiplicity: w[1].0 - w[0].0 })
        .collect();
    Ok(NewtonPolygon { vertices: hull.into_iter().map(|(i, v)| (i, Val::Finite(v))).collect(), segments })
}

/// One step of repeated division by `p`.
#[derive(Clone, Debug, Serialize)]
pub struct DivisionStep {
    #[serde(with = "q_serde")]
    pub alpha_valuation: Q,
    pub polygon: NewtonPolygon,
    #[serde(with = "crate::padic::valuation::q_vec_serde")]
    pub root_valuations: Vec<Q>,
    #[serde(with = "q_serde")]
    pub bound: Q,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DivisionReport {
    pub p: u64,
    pub kind: String,
    pub steps: Vec<DivisionStep>,
    pub all_hold: bool,
}

/// Coefficient valuations of `[p](X)` up to its first unit coefficient.
fn p_series_valuations(g: &FormalGroupLaw) -> Result<Vec<Option<Q>>> {
    let p = g.prime();
    if g.is_multiplicative() {
        let mut c = BigInt::one();
        let mut out = vec![None];
        for k in 1..=p {
            c = c * BigInt::from(p - k + 1) / BigInt::from(k);
            out.push(Some(qi(crate::padic::scalar::vp_bigint(p, &c))));
        }
        return Ok(out);
    }
    let s = g.mult_by_series(&Multiplier::from(p as i64))?;
    let mut out = vec![None];
    for k in 1..=s.degree() {
        let v = s.coeff_uni(k).valuation().map(qi);
        out.push(v);
        if v == Some(qi(0)) {
            return Ok(out);
        }
    }
    Err(Error::TailTooShort { got: format!("degree {}", s.degree()), wanted: "a unit coefficient of [p]".into() })
}

/// Valuations of the roots of `[p](X) = alpha`, iterated `steps` times on
/// the largest root valuation, each checked against `v(alpha) / 2`.
pub fn division_valuations(g: &FormalGroupLaw, v_alpha: Q, steps: u32) -> Result<DivisionReport> {
    if v_alpha <= qi(0) {
        return Err(Error::NotInOpenDisk(q_to_string(&v_alpha)));
    }
    let base = p_series_valuations(g)?;
    let mut v = v_alpha;
    let mut out = Vec::new();
    for _ in 0..steps.max(1) {
        let mut vals = base.clone();
        vals[0] = Some(v);
        let polygon = newton_polygon(&vals)?;
        let roots = polygon.root_valuations();
        let bound = v / qi(2);
        let holds = roots.iter().all(|r| *r <= bound);
        let next = roots[0];
        out.push(DivisionStep { alpha_valuation: v, polygon, root_valuations: roots, bound, holds });
        v = next;
    }
    let all_hold = out.iter().all(|s| s.holds);
    Ok(DivisionReport { p: g.prime(), kind: g.kind().name().into(), steps: out, all_hold })
}

/// `log(1 + x)` as a `Q_p` scalar, raising `1 + x` to `p`-th powers until it
/// lands in the base field.
pub fn gm_log_scalar<C: Coeff>(x: &C) -> Result<(PadicScalar, Q)> {
    let p = x.prime();
    let mut y = x.clone();
    for e in 0..=8i64 {
        if let Some(s) = y.to_scalar() {
            let l = log1p_point(&s)?;
            if e == 0 {
                return Ok((l.value, l.certified));
            }
            let pe = PadicScalar::from_bigint(p, &BigInt::from_biguint(Sign::Plus, ppow(p, e as u64)), l.value.precision() + e + 2);
            let v = l.value.checked_div(&pe)?;
            return Ok((v, l.certified - qi(e)));
        }
        y = gm_mult_point(&Multiplier::from(p as i64), &y)?.value;
    }
    Err(Error::UnsupportedRing("point does not reach the base field under [p^8]".into()))
}

/// `{ sum [a_j] gamma_j : a_j in Z_p }` inside `G_m^n`.
#[derive(Clone, Debug)]
pub struct GammaModule {
    pub group: ProductGroup,
    pub generators: Vec<GroupPoint<PadicScalar>>,
    logs: Vec<Vec<PadicScalar>>,
}

/// Result of a membership test.
#[derive(Clone, Debug, Serialize)]
pub struct Membership {
    pub member: bool,
    pub coefficients: Option<Vec<crate::padic::ScalarRecord>>,
    /// Valuation of `Q - sum [a_j] gamma_j` (bounded when it vanishes).
    pub residual: Val,
}

impl GammaModule {
    pub fn new(group: ProductGroup, generators: Vec<GroupPoint<PadicScalar>>) -> Result<Self> {
        if !group.is_multiplicative() {
            return Err(Error::UnsupportedKind("module membership is implemented for G_m only".into()));
        }
        let mut logs = Vec::new();
        for g in &generators {
            if g.dim() != group.dim() {
                return Err(Error::VariableMismatch(g.dim(), group.dim()));
            }
            logs.push(g.coords.iter().map(|c| log1p_point(c).map(|e| e.value)).collect::<Result<Vec<_>>>()?);
        }
        Ok(GammaModule { group, generators, logs })
    }

    /// Generated by `(1 + p)^(e_j) - 1`, one per coordinate.
    pub fn standard(p: u64, n: usize, prec: i64) -> Self {
        let group = ProductGroup::multiplicative(p, n, 4, prec);
        let gens = (0..n)
            .map(|j| {
                let coords = (0..n).map(|i| PadicScalar::from_i64(p, if i == j { p as i64 } else { 0 }, prec)).collect();
                GroupPoint { coords }
            })
            .collect();
        GammaModule::new(group, gens).expect("standard generators")
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    /// Solves `sum a_j log(gamma_j) = log(Q)` and confirms by recombining.
    pub fn membership<C: Coeff>(&self, q: &GroupPoint<C>, threshold: i64) -> Result<Membership> {
        let n = self.group.dim();
        if q.dim() != n {
            return Err(Error::VariableMismatch(q.dim(), n));
        }
        if q.coords.iter().all(|c| c.is_zero()) {
            let zero = q.coords[0].val();
            return Ok(Membership { member: true, coefficients: Some(vec![]), residual: zero });
        }
        let mut target = Vec::with_capacity(n);
        for c in &q.coords {
            target.push(gm_log_scalar(c)?.0);
        }
        let a = match solve_least_valuation(&self.logs, &target) {
            Some(a) => a,
            None => return Ok(Membership { member: false, coefficients: None, residual: Val::AtLeast(qi(0)) }),
        };
        if a.iter().any(|x| x.valuation().is_some_and(|v| v < 0)) {
            return Ok(Membership { member: false, coefficients: Some(a.iter().map(|x| x.to_record()).collect()), residual: Val::Finite(qi(0)) });
        }
        // recombine and compare inside the ring of Q
        let like = &q.coords[0];
        let mut acc: Vec<C> = vec![like.zero_like(like.precision()); n];
        for (aj, g) in a.iter().zip(&self.generators) {
            for (i, c) in g.coords.iter().enumerate() {
                let t = gm_mult_point(&Multiplier::Zp(aj.clone()), c)?.value;
                let tl = like.from_scalar_like(&t);
                acc[i] = acc[i].add(&tl).add(&acc[i].mul(&tl));
            }
        }
        let diff = self.group.sub(q, &GroupPoint { coords: acc })?.0;
        let residual = diff.coords.iter().map(Coeff::val).reduce(Val::min).unwrap();
        let member = match residual {
            Val::AtLeast(b) => b >= qi(threshold),
            Val::Finite(_) => false,
        };
        Ok(Membership { member, coefficients: Some(a.iter().map(|x| x.to_record()).collect()), residual })
    }
}

/// Least-valuation elimination on the columns `cols` (one per unknown);
/// `None` when the system is inconsistent to precision.
fn solve_least_valuation(cols: &[Vec<PadicScalar>], rhs: &[PadicScalar]) -> Option<Vec<PadicScalar>> {
    let r = cols.len();
    let n = rhs.len();
    let mut m: Vec<Vec<PadicScalar>> = (0..n).map(|i| cols.iter().map(|c| c[i].clone()).chain([rhs[i].clone()]).collect()).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..r {
        let best = (row..n).filter_map(|i| m[i][col].valuation().map(|v| (v, i))).min();
        let Some((_, bi)) = best else { continue };
        m.swap(row, bi);
        for i in 0..n {
            if i != row && !m[i][col].is_zero() {
                let f = m[i][col].checked_div(&m[row][col]).ok()?;
                for j in col..=r {
                    let t = &f * &m[row][j];
                    m[i][j] = &m[i][j] - &t;
                }
            }
        }
        pivots.push((row, col));
        row += 1;
    }
    for row_vals in m.iter().skip(row) {
        if !row_vals[r].is_zero() {
            return None;
        }
    }
    let p = rhs[0].prime();
    let prec = rhs.iter().map(PadicScalar::precision).min().unwrap();
    let mut a = vec![PadicScalar::zero(p, prec); r];
    for (rw, col) in pivots {
        a[col] = m[rw][r].checked_div(&m[rw][col]).ok()?;
    }
    Some(a)
}

/// A point `x` with `[p^i](x) = gamma`.
#[derive(Clone, Debug)]
pub struct BackwardPoint {
    pub point: GroupPoint<ExtElem>,
    pub depth: u32,
    pub twist: Vec<u64>,
    pub verified: bool,
    pub certified: Q,
    pub best_effort: bool,
    /// Coordinate valuations, when the ring is small enough to take norms.
    pub valuations: Option<Vec<Val>>,
}

/// Largest ring degree for which coordinate valuations are computed by norms.
const NORM_DEGREE_CAP: usize = 64;

/// `1 + x_j = zeta_{p^i}^{twist_j} (1 + gamma_j)^{1/p^i}` in
/// `Q_p[S, T_1, ..., T_n] / (Phi_{p^i}(1 + S), T_j^{p^i} - (1 + gamma_j))`.
pub fn backward_point(gamma: &GroupPoint<PadicScalar>, depth: u32, twist: &[u64]) -> Result<BackwardPoint> {
    if depth > 2 {
        return Err(Error::TowerTooDeep(depth));
    }
    let n = gamma.dim();
    let p = gamma.coords[0].prime();
    let prec = gamma.coords.iter().map(PadicScalar::precision).min().unwrap();
    if twist.len() != n {
        return Err(Error::VariableMismatch(twist.len(), n));
    }
    if depth == 0 {
        let ring = ExtensionRing::trivial(p, prec)?;
        let coords: Vec<ExtElem> = gamma.coords.iter().map(|c| ExtElem::from_scalar(&ring, c)).collect();
        let valuations = Some(coords.iter().map(ExtElem::valuation_val).collect());
        return Ok(BackwardPoint {
            point: GroupPoint { coords },
            depth,
            twist: twist.to_vec(),
            verified: true,
            certified: qi(prec),
            best_effort: false,
            valuations,
        });
    }
    let mut factors = vec![ModulusSpec::Cyclotomic { level: depth }];
    for c in &gamma.coords {
        let r = c.residue().ok_or(Error::NotIntegral)?;
        factors.push(ModulusSpec::Kummer { beta: BigInt::from_biguint(Sign::Plus, r) + 1, exponent: depth });
    }
    let ring = ExtensionRing::new(p, ModulusSpec::Tower { factors }, prec)?;
    let one = PadicScalar::one(p, prec);
    let zeta = ExtElem::generator(&ring, 0).add_scalar(&one);
    let mut coords = Vec::with_capacity(n);
    for (j, &t) in twist.iter().enumerate() {
        let root = ExtElem::generator(&ring, j + 1);
        coords.push(zeta.pow_u64(t).mul(&root).add_scalar(&(-&one)));
    }
    let pi = BigInt::from(p).pow(depth);
    let mut verified = true;
    let mut certified = qi(prec);
    for (x, g) in coords.iter().zip(&gamma.coords) {
        let e = gm_mult_point(&Multiplier::Int(pi.clone()), x)?;
        let diff = e.value.sub(&ExtElem::from_scalar(&ring, g));
        certified = certified.min(e.certified);
        if !diff.is_zero() {
            verified = false;
        }
    }
    let valuations =
        if ring.degree() <= NORM_DEGREE_CAP { Some(coords.iter().map(ExtElem::valuation_val).collect()) } else { None };
    Ok(BackwardPoint {
        point: GroupPoint { coords },
        depth,
        twist: twist.to_vec(),
        verified,
        certified,
        best_effort: ring.best_effort(),
        valuations,
    })
}

/// A finite family of test points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SigmaSpec {
    /// `(G_m[p^L])^n`.
    Torsion { levels: u32 },
    /// All `[p^i]`-preimages of `gamma` for `i <= depth`.
    Backward {
        #[serde(with = "bigint_vec_str")]
        gamma: Vec<BigInt>,
        depth: u32,
    },
    /// `([k_1] gamma_1, ..., [k_n] gamma_n)` over the box `[0, k]^n`.
    Forward {
        #[serde(with = "bigint_vec_str")]
        gamma: Vec<BigInt>,
        k: u64,
    },
    /// Explicit integer points.
    Finite { points: Vec<Vec<String>> },
}

impl SigmaSpec {
    /// Whether the family is discrete by construction.
    pub fn discrete_by_construction(&self) -> bool {
        true
    }

    pub fn name(&self) -> &'static str {
        match self {
            SigmaSpec::Torsion { .. } => "torsion",
            SigmaSpec::Backward { .. } => "backward",
            SigmaSpec::Forward { .. } => "forward",
            SigmaSpec::Finite { .. } => "finite",
        }
    }

    /// Largest `m` worth testing for `[p^m](alpha) in Gamma`.
    pub fn level_cap(&self) -> u32 {
        match self {
            SigmaSpec::Torsion { levels } => *levels,
            SigmaSpec::Backward { depth, .. } => *depth,
            _ => 0,
        }
    }
}

/// An enumerated point with its label.
#[derive(Clone, Debug)]
pub struct SigmaPoint {
    pub id: usize,
    pub label: String,
    pub point: GroupPoint<ExtElem>,
}

fn scalar_point(ring: &crate::padic::ring::Ring, xs: &[BigInt], prec: i64) -> GroupPoint<ExtElem> {
    let p = ring.prime();
    GroupPoint { coords: xs.iter().map(|x| ExtElem::from_scalar(ring, &PadicScalar::from_bigint(p, x, prec))).collect() }
}

/// Every point of a family, in a fixed order; fails past `cap` points.
pub fn enumerate_sigma(spec: &SigmaSpec, p: u64, n: usize, prec: i64, cap: usize) -> Result<Vec<SigmaPoint>> {
    let count_box = |side: u64| -> Result<usize> {
        let total = (side as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if total > cap as u128 {
            return Err(Error::EnumerationOverflow(total.min(usize::MAX as u128) as usize, cap));
        }
        Ok(total as usize)
    };
    let tuples = |side: u64, total: usize| -> Vec<Vec<u64>> {
        (0..total)
            .map(|mut idx| {
                let mut t = vec![0u64; n];
                for slot in t.iter_mut() {
                    *slot = (idx as u64) % side;
                    idx /= side as usize;
                }
                t
            })
            .collect()
    };
    let mut out = Vec::new();
    match spec {
        SigmaSpec::Torsion { levels } => {
            if *levels > 4 {
                return Err(Error::LevelTooDeep(*levels));
            }
            let side = p.pow(*levels);
            let total = count_box(side)?;
            let ring = if *levels == 0 { ExtensionRing::trivial(p, prec)? } else { ExtensionRing::cyclotomic(p, *levels, prec)? };
            let one = PadicScalar::one(p, prec);
            let zeta = ExtElem::generator(&ring, 0).add_scalar(&one);
            let mut powers = vec![ExtElem::one(&ring)];
            for j in 1..side {
                let next = powers[j as usize - 1].mul(&zeta);
                powers.push(next);
            }
            for (id, t) in tuples(side, total).into_iter().enumerate() {
                let coords = t.iter().map(|&j| powers[j as usize].add_scalar(&(-&one))).collect();
                let label = format!("zeta{}^{:?}", side, t);
                out.push(SigmaPoint { id, label, point: GroupPoint { coords } });
            }
        }
        SigmaSpec::Backward { gamma, depth } => {
            if gamma.len() != n {
                return Err(Error::VariableMismatch(gamma.len(), n));
            }
            let g = GroupPoint { coords: gamma.iter().map(|x| PadicScalar::from_bigint(p, x, prec)).collect() };
            let mut id = 0;
            for i in 0..=*depth {
                let side = p.pow(i);
                let total = count_box(side)?;
                if out.len() + total > cap {
                    return Err(Error::EnumerationOverflow(out.len() + total, cap));
                }
                for t in tuples(side, total) {
                    let b = backward_point(&g, i, &t)?;
                    out.push(SigmaPoint { id, label: format!("depth{}twist{:?}", i, t), point: b.point });
                    id += 1;
                }
            }
        }
        SigmaSpec::Forward { gamma, k } => {
            if gamma.len() != n {
                return Err(Error::VariableMismatch(gamma.len(), n));
            }
            let side = k + 1;
            let total = count_box(side)?;
            let ring = ExtensionRing::trivial(p, prec)?;
            let g: Vec<PadicScalar> = gamma.iter().map(|x| PadicScalar::from_bigint(p, x, prec)).collect();
            // [k] gamma_j by repeated group addition
            let mut mults: Vec<Vec<PadicScalar>> = Vec::with_capacity(n);
            for gj in &g {
                let mut v = vec![PadicScalar::zero(p, prec)];
                for i in 1..side as usize {
                    let prev = &v[i - 1];
                    v.push(&(prev + gj) + &(prev * gj));
                }
                mults.push(v);
            }
            for (id, t) in tuples(side, total).into_iter().enumerate() {
                let coords = t.iter().enumerate().map(|(j, &kj)| ExtElem::from_scalar(&ring, &mults[j][kj as usize])).collect();
                out.push(SigmaPoint { id, label: format!("k{:?}", t), point: GroupPoint { coords } });
            }
        }
        SigmaSpec::Finite { points } => {
            if points.len() > cap {
                return Err(Error::EnumerationOverflow(points.len(), cap));
            }
            let ring = ExtensionRing::trivial(p, prec)?;
            for (id, pt) in points.iter().enumerate() {
                if pt.len() != n {
                    return Err(Error::VariableMismatch(pt.len(), n));
                }
                let xs = pt
                    .iter()
                    .map(|s| s.parse::<BigInt>().map_err(|e| Error::InvalidInput(format!("point coordinate {s}: {e}"))))
                    .collect::<Result<Vec<_>>>()?;
                out.push(SigmaPoint { id, label: format!("point{id}"), point: scalar_point(&ring, &xs, prec) });
            }
        }
    }
    for s in &out {
        for c in &s.point.coords {
            if let Val::Finite(v) = c.val() {
                if v <= qi(0) {
                    return Err(Error::NotInOpenDisk(q_to_string(&v)));
                }
            }
        }
    }
    Ok(out)
}

/// One scanned point.
#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub id: usize,
    pub label: String,
    /// Least `m <= cap` with `[p^m](alpha)` in the module, if found.
    pub level: Option<u32>,
    pub distance: Val,
    pub on_x: bool,
}

/// Per-level aggregate; `closest` is the largest finite distance valuation,
/// i.e. the nearest approach of an off-X point.
#[derive(Clone, Debug, Serialize)]
pub struct LevelSummary {
    pub level: Option<u32>,
    pub points: usize,
    pub on_x: usize,
    pub closest: Option<Val>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ScanVerdict {
    /// On-X points at every tested positive level, as for a subgroup translate.
    SubgroupTranslate,
    /// On-X points only up to level `m`.
    MembershipBounded { m: u32 },
    /// No on-X points past level `m`; the nearest approach is the same at every positive level.
    ProximityFloor {
        m: Option<u32>,
        #[serde(with = "q_serde")]
        floor: Q,
    },
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    pub p: u64,
    pub sigma: SigmaSpec,
    pub discrete_by_construction: bool,
    pub gamma_rank: usize,
    pub rows: Vec<ScanRow>,
    pub levels: Vec<LevelSummary>,
    pub on_x_levels: Vec<u32>,
    pub verdict: ScanVerdict,
    pub note: String,
}

impl ScanReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("id,label,level,distance,on_x\n");
        for r in &self.rows {
            let level = r.level.map_or("none".to_string(), |l| l.to_string());
            let _ = writeln!(s, "{},\"{}\",{},{},{}", r.id, r.label, level, r.distance, r.on_x);
        }
        s
    }
}

/// Options for [`dichotomy_scan`].
#[derive(Clone, Debug)]
pub struct ScanOptions {
    pub cap: usize,
    /// Minimum certified valuation for "vanishes" and for module membership.
    pub threshold: i64,
}

fn level_of(gamma: &GammaModule, pt: &GroupPoint<ExtElem>, cap: u32, threshold: i64) -> Result<Option<u32>> {
    let p = gamma.group.prime();
    let mut cur = pt.clone();
    for m in 0..=cap {
        if gamma.membership(&cur, threshold)?.member {
            return Ok(Some(m));
        }
        cur = gamma.group.mult(&Multiplier::from(p as i64), &cur)?.0;
    }
    Ok(None)
}

/// Distance and level of every point of `sigma`, with the per-level summary.
pub fn dichotomy_scan(x: &Subscheme, sigma: &SigmaSpec, gamma: &GammaModule, opts: &ScanOptions) -> Result<ScanReport> {
    let p = x.prime();
    let n = x.group().dim();
    let prec = x.generators().iter().map(|g| g.ambient_precision()).min().unwrap();
    let points = enumerate_sigma(sigma, p, n, prec, opts.cap)?;
    let cap = sigma.level_cap();
    let rows = par_map(&points, |sp| -> Result<ScanRow> {
        let xl = x.lift(&sp.point.coords[0])?;
        let d: Distance = xl.distance(&sp.point)?;
        let on_x = match d.value {
            Val::AtLeast(b) => b >= qi(opts.threshold),
            Val::Finite(_) => false,
        };
        let level = level_of(gamma, &sp.point, cap, opts.threshold)?;
        Ok(ScanRow { id: sp.id, label: sp.label.clone(), level, distance: d.value, on_x })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut by_level: std::collections::BTreeMap<Option<u32>, LevelSummary> = std::collections::BTreeMap::new();
    for r in &rows {
        let e = by_level.entry(r.level).or_insert(LevelSummary { level: r.level, points: 0, on_x: 0, closest: None });
        e.points += 1;
        if r.on_x {
            e.on_x += 1;
        } else if let Val::Finite(v) = r.distance {
            e.closest = Some(match e.closest {
                Some(Val::Finite(w)) if w >= v => Val::Finite(w),
                _ => Val::Finite(v),
            });
        }
    }
    let levels: Vec<LevelSummary> = by_level.into_values().collect();
    let on_x_levels: Vec<u32> = levels.iter().filter(|l| l.on_x > 0).filter_map(|l| l.level).collect();
    let positive: Vec<&LevelSummary> = levels.iter().filter(|l| l.level.is_some_and(|m| m >= 1)).collect();
    let verdict = if !positive.is_empty() && positive.iter().all(|l| l.on_x > 0) {
        ScanVerdict::SubgroupTranslate
    } else {
        let m = on_x_levels.iter().copied().max();
        let above: Vec<&&LevelSummary> = positive.iter().filter(|l| m.is_none_or(|m| l.level.unwrap() > m)).collect();
        let closest: Vec<Option<Val>> = above.iter().map(|l| l.closest).collect();
        let stable = above.len() >= 2 && closest.iter().all(|c| c.is_some() && *c == closest[0]);
        if stable && above.iter().all(|l| l.on_x == 0) {
            ScanVerdict::ProximityFloor { m, floor: closest[0].unwrap().lower_bound() }
        } else if let Some(m) = m {
            if positive.iter().any(|l| l.level.unwrap() > m) {
                ScanVerdict::MembershipBounded { m }
            } else {
                ScanVerdict::Inconclusive
            }
        } else {
            ScanVerdict::Inconclusive
        }
    };
    Ok(ScanReport {
        p,
        sigma: sigma.clone(),
        discrete_by_construction: sigma.discrete_by_construction(),
        gamma_rank: gamma.rank(),
        rows,
        levels,
        on_x_levels,
        verdict,
        note: "the proximity floor is an empirical per-level maximum of distance valuations on the tested range, not a proven epsilon".into(),
    })
}

/// Hits of `([k_1] gamma_1, [k_2] gamma_2)` on a plane curve over `[0, K]^2`.
#[derive(Clone, Debug, Serialize)]
pub struct ForwardReport {
    pub k: u64,
    pub hits: Vec<(u64, u64)>,
    pub count: usize,
    /// `K + 1`, the count a line through the origin would give.
    pub reference: u64,
    pub precision: i64,
}

/// Matches `h([k_1] gamma_1)` against `[k_2] gamma_2` by residues mod `p^M`,
/// `h` the chart of `X` solved for the second coordinate.
pub fn forward_hits(x: &Subscheme, gamma: &[PadicScalar; 2], k: u64) -> Result<ForwardReport> {
    if x.group().dim() != 2 || x.generators().len() != 1 || !x.group().is_multiplicative() {
        return Err(Error::ChartInvalid("forward hits need a plane curve in G_m^2".into()));
    }
    if k > 10_000 {
        return Err(Error::EnumerationOverflow(k as usize, 10_000));
    }
    let p = x.prime();
    let chart = hensel_parametrize(&x.generators()[0], 1)?;
    let walk = |g: &PadicScalar| -> Vec<PadicScalar> {
        let mut v = vec![PadicScalar::zero(p, g.precision())];
        for i in 1..=k as usize {
            let prev = &v[i - 1];
            v.push(&(prev + g) + &(prev * g));
        }
        v
    };
    let xs = walk(&gamma[0]);
    let ys = walk(&gamma[1]);
    let images = par_map(&xs, |x1| chart.h.evaluate(std::slice::from_ref(x1)));
    let mut m = gamma[0].precision().min(gamma[1].precision());
    let mut hs = Vec::with_capacity(images.len());
    for e in images {
        let e = e?;
        m = m.min(crate::padic::valuation::q_floor(&e.certified));
        hs.push(e.value);
    }
    for y in &ys {
        m = m.min(y.precision());
    }
    if m <= 0 {
        return Err(Error::PrecisionExhausted(m));
    }
    let modulus = ppow(p, m as u64);
    let key = |s: &PadicScalar| -> BigUint { s.with_precision(m).residue().unwrap_or_default() % &modulus };
    let mut index: HashMap<BigUint, Vec<u64>> = HashMap::new();
    for (k2, y) in ys.iter().enumerate() {
        index.entry(key(y)).or_default().push(k2 as u64);
    }
    let mut hits = Vec::new();
    for (k1, h) in hs.iter().enumerate() {
        if let Some(ks) = index.get(&key(h)) {
            for &k2 in ks {
                hits.push((k1 as u64, k2));
            }
        }
    }
    let count = hits.len();
    Ok(ForwardReport { k, hits, count, reference: k + 1, precision: m })
}

/// Exact valuation of a primitive torsion point of level `k`, for reports.
pub fn torsion_level_valuation(p: u64, k: u32) -> Val {
    torsion_valuation(p, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::valuation::q;

    #[test]
    fn polygon_examples() {
        let g = FormalGroupLaw::multiplicative(3, 8, 20);
        let r = division_valuations(&g, qi(1), 1).unwrap();
        assert_eq!(r.steps[0].root_valuations, vec![q(1, 3); 3]);
        let r = division_valuations(&g, q(1, 2), 1).unwrap();
        assert_eq!(r.steps[0].root_valuations, vec![q(1, 6); 3]);
        let r = division_valuations(&g, qi(6), 1).unwrap();
        assert_eq!(r.steps[0].root_valuations, vec![qi(5), q(1, 2), q(1, 2)]);
        assert!(!r.all_hold);
    }

    #[test]
    fn backward_examples() {
        let g = GroupPoint { coords: vec![PadicScalar::from_i64(3, 3, 20)] };
        let b = backward_point(&g, 1, &[0]).unwrap();
        assert!(b.verified);
        assert_eq!(b.valuations.unwrap()[0], Val::Finite(q(1, 3)));
        let b0 = backward_point(&g, 0, &[0]).unwrap();
        assert_eq!(b0.point.coords[0].as_scalar().unwrap().to_i64(), Some(3));
        for t in 0..3 {
            assert!(backward_point(&g, 1, &[t]).unwrap().verified);
        }
    }

    #[test]
    fn membership_examples() {
        let gm = GammaModule::standard(3, 2, 20);
        let q = GroupPoint { coords: vec![PadicScalar::from_i64(3, 15, 20), PadicScalar::from_i64(3, 0, 20)] };
        assert!(gm.membership(&q, 10).unwrap().member);
        let ring = ExtensionRing::cyclotomic(3, 1, 20).unwrap();
        let z = ExtElem::generator(&ring, 0);
        let t = GroupPoint { coords: vec![z.clone(), ExtElem::zero(&ring)] };
        assert!(!gm.membership(&t, 10).unwrap().member);
        let g = GroupPoint { coords: vec![PadicScalar::from_i64(3, 3, 20), PadicScalar::from_i64(3, 3, 20)] };
        let line = GammaModule::new(ProductGroup::multiplicative(3, 2, 4, 20), vec![g]).unwrap();
        let on = GroupPoint { coords: vec![PadicScalar::from_i64(3, 15, 20), PadicScalar::from_i64(3, 15, 20)] };
        assert!(line.membership(&on, 10).unwrap().member);
        let off = GroupPoint { coords: vec![PadicScalar::from_i64(3, 3, 20), PadicScalar::from_i64(3, 0, 20)] };
        assert!(!line.membership(&off, 10).unwrap().member);
    }

    #[test]
    fn forward_examples() {
        let x = Subscheme::diagonal(3, 4, 20).unwrap();
        let g = [PadicScalar::from_i64(3, 3, 20), PadicScalar::from_i64(3, 3, 20)];
        let r = forward_hits(&x, &g, 30).unwrap();
        assert_eq!(r.count, 31);
        let y = Subscheme::shifted_diagonal(3, 4, 20, 3).unwrap();
        // 4^k1 - 4^k2 = 3 only at (1, 0)
        assert_eq!(forward_hits(&y, &g, 100).unwrap().hits, vec![(1, 0)]);
    }
}
