//! Stage-by-stage interpolation of `phi` with `phi([n_j] alpha_1) = [m_j] alpha_2`.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formal_group::{binomial_series, FormalGroupKind, FormalGroupLaw, GroupPoint, Multiplier};
use crate::subscheme::{chart_at_base, subtorus_test, SubtorusCertificate};
use crate::padic::ring::{bigint_str, bigint_vec_str};
use crate::padic::scalar::ppow;
use crate::padic::valuation::{q_ceil, qi, Val, Q};
use crate::padic::{PadicScalar, ScalarRecord};
use crate::parallel::par_map;
use crate::series::{log1p_point, MonomialTable, Series, SeriesJson};

/// Guard digits added to the internal precision.
pub const GUARD_DIGITS: i64 = 8;

/// `N_int` for a run of `stages` stages at `v(alpha) = v`: every division by
/// `psi_j([n_{j+1}](alpha_1))` costs its valuation, plus guard digits.
pub fn internal_precision(v: i64, n_out: i64, stages: u32) -> i64 {
    n_out + (1..=stages as i64).map(|i| v + (1i64 << i) - 1).sum::<i64>() + GUARD_DIGITS
}
/// Largest `t` tried when separating slopes.
pub const SLOPE_SEARCH_CAP: u64 = 1 << 16;

/// Valuation bookkeeping for one step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepLedger {
    pub stage: u32,
    /// `v(psi_j([n_{j+1}] alpha_1))`.
    pub psi_valuation: i64,
    /// `sum_{i <= j} (v + 2^i - 1)`.
    pub expected: i64,
    /// Left side of `v([n_{j+1}] alpha_1) > sum v([n_i] alpha_1)`.
    pub next_point_valuation: i64,
    /// `v([m_{j+1}] alpha_2 - phi_j(0))`, required `>= expected`.
    pub target_gap: Val,
    pub correction_valuation: Option<i64>,
    /// Multiples of `p^{M_j}` added for slope distinctness.
    pub t: u64,
    pub m_modulus_exponent: i64,
}

impl StepLedger {
    pub fn holds(&self) -> bool {
        self.psi_valuation == self.expected
            && self.next_point_valuation > self.expected
            && self.target_gap.lower_bound() >= qi(self.expected)
            && self.correction_valuation.is_none_or(|v| v >= 0)
    }
}

/// The construction after `stage` pairs.
#[derive(Clone, Debug)]
pub struct CounterexampleState {
    group: FormalGroupLaw,
    p: u64,
    alpha1: PadicScalar,
    alpha2: PadicScalar,
    v: i64,
    n_out: i64,
    j_target: u32,
    n_int: i64,
    /// `phi_j`, low degree first.
    phi: Vec<PadicScalar>,
    pairs: Vec<(BigInt, BigInt)>,
    points: Vec<PadicScalar>,
    corrections: Vec<PadicScalar>,
    targets: Vec<PadicScalar>,
    slopes: Vec<BigRational>,
    ledger: Vec<StepLedger>,
    /// `c_j psi_j` for each step, kept for the coefficientwise convergence check.
    increments: Vec<Vec<PadicScalar>>,
}

fn horner(coeffs: &[PadicScalar], x: &PadicScalar) -> PadicScalar {
    let mut acc = coeffs.last().unwrap().clone();
    for c in coeffs.iter().rev().skip(1) {
        acc = &(&acc * x) + c;
    }
    acc
}

/// `prod (X - r_i)`, low degree first.
fn root_product(roots: &[PadicScalar], prec: i64) -> Vec<PadicScalar> {
    let p = roots[0].prime();
    let mut out = vec![PadicScalar::one(p, prec)];
    for r in roots {
        let mut next = vec![PadicScalar::zero(p, prec); out.len() + 1];
        for (i, c) in out.iter().enumerate() {
            next[i + 1] = &next[i + 1] + c;
            next[i] = &next[i] - &(c * r);
        }
        out = next;
    }
    out
}

fn val_i64(x: &PadicScalar) -> Val {
    match x.valuation() {
        Some(v) => Val::Finite(qi(v)),
        None => Val::AtLeast(qi(x.precision())),
    }
}

impl CounterexampleState {
    fn mult(&self, a: &BigInt, x: &PadicScalar) -> Result<PadicScalar> {
        mult_point(&self.group, a, x, self.n_int)
    }

    fn log(&self, x: &PadicScalar) -> Result<PadicScalar> {
        if self.group.is_multiplicative() {
            return Ok(log1p_point(x)?.value);
        }
        let e = self.group.log_point(x)?;
        Ok(e.value.with_precision(q_floor_i(&e.certified).min(e.value.precision())))
    }

    pub fn stage(&self) -> u32 {
        self.pairs.len() as u32
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn valuation(&self) -> i64 {
        self.v
    }

    pub fn internal_precision(&self) -> i64 {
        self.n_int
    }

    pub fn target_stages(&self) -> u32 {
        self.j_target
    }

    pub fn output_precision(&self) -> i64 {
        self.n_out
    }

    pub fn phi(&self) -> &[PadicScalar] {
        &self.phi
    }

    pub fn pairs(&self) -> &[(BigInt, BigInt)] {
        &self.pairs
    }

    pub fn corrections(&self) -> &[PadicScalar] {
        &self.corrections
    }

    pub fn targets(&self) -> &[PadicScalar] {
        &self.targets
    }

    pub fn slopes(&self) -> &[BigRational] {
        &self.slopes
    }

    pub fn ledger(&self) -> &[StepLedger] {
        &self.ledger
    }

    pub fn group(&self) -> &FormalGroupLaw {
        &self.group
    }

    /// Replaces one coefficient of `phi`; used to inject faults.
    pub fn perturb(&mut self, degree: usize, delta: &PadicScalar) {
        self.phi[degree] = &self.phi[degree] + delta;
    }

    /// Re-checks every state invariant from the stored data.
    pub fn check_invariants(&self) -> Result<()> {
        let p = self.p;
        for (i, (n, _)) in self.pairs.iter().enumerate() {
            let expect = BigInt::from(p).pow((1u32 << (i + 1)) - 1);
            if *n != expect {
                return Err(Error::CheckFailed(format!("n_{} is not p^(2^{} - 1)", i + 1, i + 1)));
            }
        }
        for (i, c) in self.corrections.iter().enumerate() {
            if c.valuation().is_some_and(|v| v < 0) {
                return Err(Error::IntegralityFailure { stage: i as u32 + 1, valuation: c.valuation().unwrap() });
            }
        }
        if self.phi[0].valuation() != Some(self.v) {
            return Err(Error::CheckFailed(format!("v(phi(0)) = {} differs from v = {}", val_i64(&self.phi[0]), self.v)));
        }
        for i in 0..self.slopes.len() {
            for k in 0..i {
                if self.slopes[i] == self.slopes[k] {
                    return Err(Error::CheckFailed(format!("slopes r_{} and r_{} coincide", k + 1, i + 1)));
                }
            }
        }
        for (i, (x, (_, m))) in self.points.iter().zip(&self.pairs).enumerate() {
            let y = self.mult(m, &self.alpha2)?;
            let r = &horner(&self.phi, x) - &y;
            if !r.is_zero() {
                return Err(Error::ResidualTooLarge { index: i as u32 + 1, valuation: r.valuation().unwrap(), required: r.precision() });
            }
        }
        Ok(())
    }

    /// `phi_{j+1}`.
    pub fn step(&mut self) -> Result<()> {
        let p = self.p;
        let j = self.stage();
        let v = self.v;
        let n_next = BigInt::from(p).pow((1u32 << (j + 1)) - 1);
        let x_next = self.mult(&n_next, &self.alpha1)?;
        let expected: i64 = (1..=j).map(|i| v + (1i64 << i) - 1).sum();
        let next_val = x_next.valuation().ok_or(Error::PrecisionExhausted(x_next.precision()))?;
        let sum_vals: i64 = self.points.iter().map(|x| x.valuation().unwrap()).sum();
        if next_val <= sum_vals {
            return Err(Error::CheckFailed(format!("inequality (1) fails at stage {j}: {next_val} <= {sum_vals}")));
        }
        // A_j = log(phi_j(0)) / log(alpha_2)
        let a_j = self.log(&self.phi[0])?.checked_div(&self.log(&self.alpha2)?)?;
        if a_j.valuation() != Some(0) {
            return Err(Error::ValuationMismatch(format!("A_{j} has valuation {} instead of 0", val_i64(&a_j))));
        }
        let m_exp = q_ceil(&(qi(expected) - qi(v)));
        let modulus = BigInt::from_biguint(Sign::Plus, ppow(p, m_exp.max(0) as u64));
        if a_j.precision() < m_exp {
            return Err(Error::PrecisionExhausted(a_j.precision() - m_exp));
        }
        let rep = BigInt::from_biguint(Sign::Plus, a_j.residue().unwrap()).mod_floor(&modulus);
        let base = if rep.is_zero() { modulus.clone() } else { rep };
        let (n_prev, m_prev) = self.pairs.last().unwrap().clone();
        let mut t = 0u64;
        let (m_next, slope) = loop {
            let m = &base + &modulus * BigInt::from(t);
            let r = BigRational::new(&m - &m_prev, &n_next - &n_prev);
            if !self.slopes.contains(&r) {
                break (m, r);
            }
            t += 1;
            if t > SLOPE_SEARCH_CAP {
                return Err(Error::SlopeExhaustion(j));
            }
        };
        let y_next = self.mult(&m_next, &self.alpha2)?;
        let gap = val_i64(&(&y_next - &self.phi[0]));
        if gap.lower_bound() < qi(expected) {
            return Err(Error::CheckFailed(format!("inequality (2) fails at stage {j}: {gap} < {expected}")));
        }
        let psi = root_product(&self.points, self.n_int);
        let psi_at = horner(&psi, &x_next);
        let psi_val = psi_at.valuation().ok_or(Error::PrecisionExhausted(psi_at.precision()))?;
        if psi_val != expected {
            return Err(Error::CheckFailed(format!("v(psi_{j}) = {psi_val}, expected {expected}")));
        }
        let num = &y_next - &horner(&self.phi, &x_next);
        let c = num.checked_div(&psi_at)?;
        if let Some(vc) = c.valuation() {
            if vc < 0 {
                return Err(Error::IntegralityFailure { stage: j, valuation: vc });
            }
        }
        let mut phi = self.phi.clone();
        phi.resize(psi.len().max(phi.len()), PadicScalar::zero(p, self.n_int));
        let inc: Vec<PadicScalar> = psi.iter().map(|s| &c * s).collect();
        for (k, s) in inc.iter().enumerate() {
            phi[k] = &phi[k] + s;
        }
        self.ledger.push(StepLedger {
            stage: j,
            psi_valuation: psi_val,
            expected,
            next_point_valuation: next_val,
            target_gap: gap,
            correction_valuation: c.valuation(),
            t,
            m_modulus_exponent: m_exp,
        });
        self.phi = phi;
        self.pairs.push((n_next, m_next));
        self.points.push(x_next);
        self.corrections.push(c);
        self.targets.push(a_j);
        self.slopes.push(slope);
        self.increments.push(inc);
        self.check_invariants()
    }

    /// Runs steps until `target` pairs exist.
    pub fn run_to(&mut self, target: u32) -> Result<()> {
        while self.stage() < target {
            self.step()?;
        }
        Ok(())
    }

    /// The curve as `x_2 = phi(x_1)`, univariate and exact.
    pub fn phi_series(&self, d: u32) -> Series {
        let t = MonomialTable::new(1, d.max(self.phi.len() as u32));
        let zero = PadicScalar::zero(self.p, self.phi.iter().map(PadicScalar::precision).min().unwrap());
        Series::from_univariate(&t, &zero, &self.phi).expect("degree fits")
    }

    /// `Phi(X, Y) = phi(X) -_F Y` for the multiplicative law: `(phi(X) - Y) / (1 + Y)`.
    pub fn export_phi(&self, d: u32) -> Result<Series> {
        if !self.group.is_multiplicative() {
            return Err(Error::UnsupportedKind(format!("export for {}", self.group.kind().name())));
        }
        let d = d.max(self.phi.len() as u32);
        let prec = self.phi.iter().map(PadicScalar::precision).min().unwrap();
        let t = MonomialTable::new(2, d);
        let mut num = Series::zero_scalar(&t, self.p, prec);
        for (k, c) in self.phi.iter().enumerate() {
            num.set_coeff(&[k as u32, 0], c.clone());
        }
        let y = Series::var(&t, 1, self.p, prec);
        let num = num.sub(&y)?;
        let inv = y.add_constant(&PadicScalar::one(self.p, prec)).inverse()?;
        num.mul(&inv)
    }

    /// `phi` recentred at `(0, phi(0))` so that the curve passes through the origin.
    pub fn translated_chart(&self, d: u32) -> Result<Series> {
        if !self.group.is_multiplicative() {
            return Err(Error::UnsupportedKind(format!("translation for {}", self.group.kind().name())));
        }
        let phi = self.phi_series(d);
        let zero = PadicScalar::zero(self.p, phi.ambient_precision());
        let base = GroupPoint::new(vec![zero, self.phi[0].clone()])?;
        chart_at_base(&phi, &base)
    }

    /// Subtorus test on the recentred curve.
    pub fn subtorus(&self, d: u32) -> Result<SubtorusCertificate<PadicScalar>> {
        subtorus_test(&self.translated_chart(d)?, None)
    }

    pub fn to_json(&self) -> CounterexampleJson {
        CounterexampleJson {
            kind: self.group.kind().clone(),
            p: self.p,
            alpha1: self.alpha1.to_record(),
            alpha2: self.alpha2.to_record(),
            v: self.v,
            stage: self.stage(),
            j_target: self.j_target,
            n_out: self.n_out,
            n_int: self.n_int,
            law_degree: self.group.degree(),
            phi: self.phi.iter().map(PadicScalar::to_record).collect(),
            n: self.pairs.iter().map(|x| x.0.clone()).collect(),
            m: self.pairs.iter().map(|x| x.1.clone()).collect(),
            corrections: self.corrections.iter().map(PadicScalar::to_record).collect(),
            targets: self.targets.iter().map(PadicScalar::to_record).collect(),
            slopes: self.slopes.iter().map(|r| r.to_string()).collect(),
            ledger: self.ledger.clone(),
        }
    }

    /// Rebuilds a state from its dump; the stored data is re-checked.
    pub fn from_json(j: &CounterexampleJson) -> Result<Self> {
        let p = j.p;
        let group = match j.kind {
            FormalGroupKind::Multiplicative => FormalGroupLaw::multiplicative(p, j.law_degree.max(1), j.n_int),
            _ => FormalGroupLaw::new(j.kind.clone(), p, j.law_degree, j.n_int)?,
        };
        let rec = |r: &ScalarRecord| PadicScalar::from_record(p, r);
        let alpha1 = rec(&j.alpha1)?;
        let alpha2 = rec(&j.alpha2)?;
        if j.n.len() != j.m.len() || j.n.is_empty() {
            return Err(Error::InvalidInput("pair lists must be nonempty and of equal length".into()));
        }
        let pairs: Vec<(BigInt, BigInt)> = j.n.iter().cloned().zip(j.m.iter().cloned()).collect();
        let points = pairs.iter().map(|(n, _)| mult_point(&group, n, &alpha1, j.n_int)).collect::<Result<Vec<_>>>()?;
        let corrections = j.corrections.iter().map(rec).collect::<Result<Vec<_>>>()?;
        let slopes = j
            .slopes
            .iter()
            .map(|s| s.parse::<BigRational>().map_err(|e| Error::InvalidInput(format!("slope {s}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let mut increments = Vec::new();
        for (i, c) in corrections.iter().enumerate() {
            let psi = root_product(&points[..=i], j.n_int);
            increments.push(psi.iter().map(|s| c * s).collect());
        }
        let state = CounterexampleState {
            group,
            p,
            alpha1,
            alpha2,
            v: j.v,
            n_out: j.n_out,
            j_target: j.j_target,
            n_int: j.n_int,
            phi: j.phi.iter().map(rec).collect::<Result<Vec<_>>>()?,
            pairs,
            points,
            corrections,
            targets: j.targets.iter().map(rec).collect::<Result<Vec<_>>>()?,
            slopes,
            ledger: j.ledger.clone(),
            increments,
        };
        Ok(state)
    }
}

fn q_floor_i(x: &Q) -> i64 {
    crate::padic::valuation::q_floor(x)
}

/// `[a](x)` at precision `want`: the exponentiation fast path for `G_m`,
/// certified series evaluation otherwise.
fn mult_point(g: &FormalGroupLaw, a: &BigInt, x: &PadicScalar, want: i64) -> Result<PadicScalar> {
    let m = Multiplier::Int(a.clone());
    if g.is_multiplicative() {
        return Ok(g.mult_point(&m, x)?.value);
    }
    match g.mult_point_to(&m, x, qi(want)) {
        Ok(e) => Ok(e.value.with_precision(want.min(e.value.precision()))),
        Err(Error::TailTooShort { got, wanted }) => Err(Error::UnsupportedKind(format!(
            "{} law certifies [a](alpha) only to {got}, below the internal precision {wanted}",
            g.kind().name()
        ))),
        Err(e) => Err(e),
    }
}

/// Stage-one state: `n_1 = p`, `m_1 = 1`, `phi_1(X) = X - [p](alpha_1) + alpha_2`.
pub fn cex_init(
    group: &FormalGroupLaw,
    alpha1: &PadicScalar,
    alpha2: &PadicScalar,
    n_out: i64,
    j_target: u32,
) -> Result<CounterexampleState> {
    let p = group.prime();
    if alpha1.prime() != p || alpha2.prime() != p {
        return Err(Error::PrimeMismatch(alpha1.prime(), p));
    }
    let (v1, v2) = (alpha1.valuation(), alpha2.valuation());
    let v = match (v1, v2) {
        (Some(a), Some(b)) if a == b && a >= 1 => a,
        _ => {
            return Err(Error::ValuationMismatch(format!(
                "need v(alpha_1) = v(alpha_2) >= 1, got {} and {}",
                val_i64(alpha1),
                val_i64(alpha2)
            )))
        }
    };
    if j_target < 1 || j_target > 10 {
        return Err(Error::InvalidInput(format!("stage count {j_target} outside 1..=10")));
    }
    let n_int = internal_precision(v, n_out, j_target);
    let a1 = alpha1.with_precision(n_int);
    let a2 = alpha2.with_precision(n_int);
    if a1.precision() < n_int || a2.precision() < n_int {
        return Err(Error::PrecisionExhausted(a1.precision().min(a2.precision()) - n_int));
    }
    let n1 = BigInt::from(p);
    let x1 = mult_point(group, &n1, &a1, n_int)?;
    let phi = vec![&a2 - &x1, PadicScalar::one(p, n_int)];
    let state = CounterexampleState {
        group: group.clone(),
        p,
        alpha1: a1,
        alpha2: a2,
        v,
        n_out,
        j_target,
        n_int,
        phi,
        pairs: vec![(n1, BigInt::one())],
        points: vec![x1],
        corrections: Vec::new(),
        targets: Vec::new(),
        slopes: Vec::new(),
        ledger: Vec::new(),
        increments: Vec::new(),
    };
    state.check_invariants()?;
    Ok(state)
}

pub fn cex_step(state: &mut CounterexampleState) -> Result<()> {
    state.step()
}

/// Builds the full construction.
pub fn cex_build(group: &FormalGroupLaw, alpha1: &PadicScalar, alpha2: &PadicScalar, n_out: i64, j: u32) -> Result<CounterexampleState> {
    let mut s = cex_init(group, alpha1, alpha2, n_out, j)?;
    s.run_to(j)?;
    Ok(s)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CounterexampleJson {
    #[serde(flatten)]
    pub kind: FormalGroupKind,
    pub p: u64,
    pub alpha1: ScalarRecord,
    pub alpha2: ScalarRecord,
    pub v: i64,
    pub stage: u32,
    pub j_target: u32,
    pub n_out: i64,
    pub n_int: i64,
    pub law_degree: u32,
    pub phi: Vec<ScalarRecord>,
    #[serde(with = "bigint_vec_str")]
    pub n: Vec<BigInt>,
    #[serde(with = "bigint_vec_str")]
    pub m: Vec<BigInt>,
    pub corrections: Vec<ScalarRecord>,
    pub targets: Vec<ScalarRecord>,
    pub slopes: Vec<String>,
    pub ledger: Vec<StepLedger>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualRow {
    pub j: u32,
    #[serde(with = "bigint_str")]
    pub n: BigInt,
    #[serde(with = "bigint_str")]
    pub m: BigInt,
    /// `v(phi([n_j] alpha_1) -_F [m_j] alpha_2)` on the independent path.
    pub residual: Val,
    /// Fast path and binomial-series path agree on both points.
    pub paths_agree: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CauchyRow {
    pub degree: u32,
    /// `v` of the degree coefficient of `c_j psi_j`, for the stages contributing to it.
    pub valuations: Vec<Val>,
    pub strictly_increasing: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub p: u64,
    pub stage: u32,
    pub n_out: i64,
    pub residuals: Vec<ResidualRow>,
    pub min_residual: Val,
    pub all_paths_agree: bool,
    pub corrections_integral: bool,
    pub cauchy: Vec<CauchyRow>,
    pub cauchy_holds: bool,
    pub line_cover: LineCoverReport,
    pub phi_export: Option<SeriesJson>,
}

/// Degree with `(D + 1) v >= prec + 2`, enough for the binomial tail.
fn binomial_degree(v: i64, prec: i64) -> u32 {
    ((prec + 2 + v - 1) / v) as u32 + 1
}

/// `(1 + x)^a - 1` through the truncated binomial series, independent of
/// modular exponentiation.
pub fn binomial_path(a: &BigInt, x: &PadicScalar, prec: i64) -> Result<PadicScalar> {
    let p = x.prime();
    let v = x.valuation().unwrap_or(prec).max(1);
    let d = binomial_degree(v, prec);
    let t = MonomialTable::new(1, d);
    let s = binomial_series(&t, p, &Multiplier::Int(a.clone()), prec + 8)?;
    let e = s.evaluate(std::slice::from_ref(x))?;
    let c = q_floor_i(&e.certified).min(prec);
    Ok(e.value.with_precision(c))
}

/// Residuals, convergence pattern and the exported `Phi`.
pub fn cex_verify(state: &CounterexampleState, n_out: i64) -> Result<VerifyReport> {
    let p = state.p;
    let prec = state.n_int;
    let idx: Vec<usize> = (0..state.pairs.len()).collect();
    let rows = par_map(&idx, |&i| -> Result<ResidualRow> {
        let (n, m) = &state.pairs[i];
        let (x, y, agree) = if state.group.is_multiplicative() {
            let xs = binomial_path(n, &state.alpha1, prec)?;
            let ys = binomial_path(m, &state.alpha2, prec)?;
            let xf = state.mult(n, &state.alpha1)?;
            let yf = state.mult(m, &state.alpha2)?;
            let agree = (&xs - &xf).is_zero() && (&ys - &yf).is_zero();
            (xs, ys, agree)
        } else {
            (state.mult(n, &state.alpha1)?, state.mult(m, &state.alpha2)?, true)
        };
        let fx = horner(&state.phi, &x);
        // phi(x) -_F y; for G_m divide by the unit 1 + y
        let diff = if state.group.is_multiplicative() {
            (&fx - &y).checked_div(&(&y + &PadicScalar::one(p, prec)))?
        } else {
            state.group.sub_points(&fx, &y)?.value
        };
        Ok(ResidualRow { j: i as u32 + 1, n: n.clone(), m: m.clone(), residual: val_i64(&diff), paths_agree: agree })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let min_residual = rows.iter().map(|r| r.residual).reduce(Val::min).unwrap();
    let all_paths_agree = rows.iter().all(|r| r.paths_agree);
    let corrections_integral = state.corrections.iter().all(|c| c.valuation().is_none_or(|v| v >= 0));
    // coefficient of X^d in c_j psi_j, j >= d
    let maxdeg = state.increments.iter().map(Vec::len).max().unwrap_or(0);
    let mut cauchy = Vec::new();
    for d in 0..maxdeg {
        let vals: Vec<Val> = state.increments.iter().filter(|inc| inc.len() > d).map(|inc| val_i64(&inc[d])).collect();
        if vals.len() < 2 {
            continue;
        }
        let strictly_increasing = vals.windows(2).all(|w| match (w[0], w[1]) {
            (Val::Finite(a), Val::Finite(b)) => b > a,
            (Val::Finite(_), Val::AtLeast(_)) => true,
            _ => false,
        });
        cauchy.push(CauchyRow { degree: d as u32, valuations: vals, strictly_increasing });
    }
    let cauchy_holds = cauchy.iter().all(|c| c.strictly_increasing);
    let line_cover = line_cover_check(&state.pairs)?;
    let phi_export = state.export_phi(state.phi.len() as u32 + 1).ok().map(|s| s.to_json());
    let report = VerifyReport {
        p,
        stage: state.stage(),
        n_out,
        residuals: rows,
        min_residual,
        all_paths_agree,
        corrections_integral,
        cauchy,
        cauchy_holds,
        line_cover,
        phi_export,
    };
    if let Some(bad) = report.residuals.iter().filter(|r| r.residual.lower_bound() < qi(n_out)).min_by_key(|r| r.residual.lower_bound()) {
        return Err(Error::ResidualTooLarge {
            index: bad.j,
            valuation: q_floor_i(&bad.residual.lower_bound()),
            required: n_out,
        });
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct LineCoverReport {
    pub pairs: usize,
    /// Indices (1-based) of collinear triples.
    pub collinear: Vec<[usize; 3]>,
    pub slopes: Vec<String>,
    pub slopes_distinct: bool,
    pub holds: bool,
}

/// Exact collinearity test on all triples and distinctness of consecutive slopes.
pub fn line_cover_check(pairs: &[(BigInt, BigInt)]) -> Result<LineCoverReport> {
    if pairs.len() < 3 {
        return Err(Error::InvalidInput(format!("line cover check needs at least 3 pairs, got {}", pairs.len())));
    }
    let k = pairs.len();
    let mut collinear = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            for c in b + 1..k {
                let (x1, y1) = &pairs[a];
                let (x2, y2) = &pairs[b];
                let (x3, y3) = &pairs[c];
                let det = (x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1);
                if det.is_zero() {
                    collinear.push([a + 1, b + 1, c + 1]);
                }
            }
        }
    }
    let mut slopes = Vec::new();
    let mut rs: Vec<BigRational> = Vec::new();
    for w in pairs.windows(2) {
        let dn = &w[1].0 - &w[0].0;
        if dn.is_zero() {
            slopes.push("vertical".into());
            continue;
        }
        let r = BigRational::new(&w[1].1 - &w[0].1, dn);
        slopes.push(r.to_string());
        rs.push(r);
    }
    let slopes_distinct = rs.len() == pairs.len() - 1 && (0..rs.len()).all(|i| (0..i).all(|j| rs[i] != rs[j]));
    let holds = collinear.is_empty() && slopes_distinct;
    Ok(LineCoverReport { pairs: k, collinear, slopes, slopes_distinct, holds })
}

/// Absolute value helper for reports: `|n|` as a decimal string.
pub fn abs_string(n: &BigInt) -> String {
    n.abs().to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gm(p: u64) -> FormalGroupLaw {
        FormalGroupLaw::multiplicative(p, 4, 40)
    }

    #[test]
    fn seeds() {
        let a = PadicScalar::from_i64(3, 3, 200);
        let s = cex_init(&gm(3), &a, &a, 20, 3).unwrap();
        assert_eq!(s.phi()[0].to_i64(), Some(-60));
        let a5 = PadicScalar::from_i64(5, 5, 200);
        let s = cex_init(&gm(5), &a5, &a5, 20, 3).unwrap();
        assert_eq!(s.phi()[0].to_i64(), Some(-7770));
        assert_eq!(s.phi()[0].valuation(), Some(1));
    }

    #[test]
    fn one_step() {
        let a = PadicScalar::from_i64(3, 3, 400);
        let mut s = cex_init(&gm(3), &a, &a, 20, 3).unwrap();
        s.step().unwrap();
        assert_eq!(s.pairs()[1].0, BigInt::from(27));
        assert_eq!(s.ledger()[0].next_point_valuation, 4);
        assert_eq!(s.ledger()[0].expected, 2);
        assert!(s.ledger()[0].holds());
    }

    #[test]
    fn collinear_triple_detected() {
        let pairs: Vec<(BigInt, BigInt)> = (0..3).map(|i| (BigInt::from(i), BigInt::from(i))).collect();
        let r = line_cover_check(&pairs).unwrap();
        assert_eq!(r.collinear, vec![[1, 2, 3]]);
        assert!(!r.holds);
    }

    #[test]
    fn small_run_verifies() {
        let a = PadicScalar::from_i64(3, 3, 400);
        let s = cex_build(&gm(3), &a, &a, 20, 3).unwrap();
        let r = cex_verify(&s, 20).unwrap();
        assert!(r.min_residual.lower_bound() >= qi(20));
        assert!(r.all_paths_agree);
        assert!(!s.subtorus(8).unwrap().is_special());
        let mut t = s.clone();
        t.perturb(0, &PadicScalar::from_i64(3, 3i64.pow(10), 400));
        match cex_verify(&t, 20) {
            Err(Error::ResidualTooLarge { valuation, .. }) => assert_eq!(valuation, 10),
            other => panic!("{other:?}"),
        }
    }
}
