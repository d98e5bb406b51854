//! Command-line runner: every subcommand writes a JSON summary and CSV tables.
//!
//! Exit codes: `0` when every assertion holds, `1` when a mathematical check
//! fails, `2` for input errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_traits::Zero;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::counterexample::{cex_build, cex_verify, CounterexampleJson, CounterexampleState, internal_precision};
use crate::error::{Error, Result};
use crate::formal_group::{FormalGroupKind, FormalGroupLaw};
use crate::orbit::{dichotomy_scan, division_valuations, forward_hits, GammaModule, ScanOptions, SigmaSpec};
use crate::padic::valuation::{q_from_str, q_to_string};
use crate::padic::scalar::{check_prime, vp_bigint};
use crate::padic::PadicScalar;
use crate::subscheme::{hensel_parametrize, subtorus_test, CurveChart, Subscheme, SubschemeJson};
use crate::weightspace::{classify_weight_closure, ClassifyOptions};

#[derive(Parser, Debug)]
#[command(name = "padic-fg", version, about = "Exact p-adic formal group experiments")]
pub struct Cli {
    /// JSON config; flags override its keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for the JSON summary and CSV tables.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Interpolating power series through an orbit pair sequence.
    #[command(subcommand)]
    Cex(CexCommand),
    #[command(subcommand)]
    Scan(ScanCommand),
    #[command(subcommand)]
    Subtorus(SubtorusCommand),
    #[command(subcommand)]
    Newton(NewtonCommand),
    #[command(subcommand)]
    Weights(WeightsCommand),
    #[command(subcommand)]
    Orbit(OrbitCommand),
}

#[derive(Subcommand, Debug)]
pub enum CexCommand {
    Build(CexBuildArgs),
    Verify(CexVerifyArgs),
}

#[derive(Subcommand, Debug)]
pub enum ScanCommand {
    Dichotomy(ScanArgs),
}

#[derive(Subcommand, Debug)]
pub enum SubtorusCommand {
    Check(SubtorusArgs),
}

#[derive(Subcommand, Debug)]
pub enum NewtonCommand {
    Polygon(NewtonArgs),
}

#[derive(Subcommand, Debug)]
pub enum WeightsCommand {
    Classify(WeightsArgs),
}

#[derive(Subcommand, Debug)]
pub enum OrbitCommand {
    Forward(ForwardArgs),
}

#[derive(Args, Debug, Default)]
pub struct CurveArgs {
    /// `diagonal`, `double`, `shifted` or `file`.
    #[arg(long)]
    pub curve: Option<String>,
    /// Subscheme JSON for `--curve file`.
    #[arg(long)]
    pub curve_file: Option<PathBuf>,
    /// Truncation degree.
    #[arg(long)]
    pub degree: Option<u32>,
}

#[derive(Args, Debug)]
pub struct CexBuildArgs {
    #[arg(long)]
    pub p: Option<u64>,
    /// `alpha_1 = alpha_2`, an integer.
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub alpha2: Option<String>,
    #[arg(long)]
    pub stages: Option<u32>,
    /// Output precision `N_out`.
    #[arg(long)]
    pub prec: Option<i64>,
    /// `multiplicative` or `lubin_tate`.
    #[arg(long)]
    pub kind: Option<String>,
}

#[derive(Args, Debug)]
pub struct CexVerifyArgs {
    /// State dump written by `cex build`.
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long)]
    pub prec: Option<i64>,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub prec: Option<i64>,
    #[command(flatten)]
    pub curve: CurveArgs,
    /// Torsion levels for the default torsion family.
    #[arg(long)]
    pub levels: Option<u32>,
    #[arg(long)]
    pub cap: Option<usize>,
    #[arg(long)]
    pub threshold: Option<i64>,
}

#[derive(Args, Debug)]
pub struct SubtorusArgs {
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub prec: Option<i64>,
    #[command(flatten)]
    pub curve: CurveArgs,
    /// `special` or `not_special`; a mismatch exits with 1.
    #[arg(long)]
    pub expect: Option<String>,
}

#[derive(Args, Debug)]
pub struct NewtonArgs {
    #[arg(long)]
    pub p: Option<u64>,
    /// `v(alpha)` as an exact rational.
    #[arg(long)]
    pub alpha_val: Option<String>,
    #[arg(long)]
    pub steps: Option<u32>,
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub degree: Option<u32>,
    #[arg(long)]
    pub prec: Option<i64>,
}

#[derive(Args, Debug)]
pub struct WeightsArgs {
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub prec: Option<i64>,
    #[command(flatten)]
    pub curve: CurveArgs,
    #[arg(long)]
    pub k_max: Option<u64>,
    #[arg(long)]
    pub levels: Option<u32>,
    /// Keep only weights with `k_1 = k_2`.
    #[arg(long)]
    pub parallel_only: bool,
    /// `special`, `bounded_order` or `inconclusive`; a mismatch exits with 1.
    #[arg(long)]
    pub expect: Option<String>,
}

#[derive(Args, Debug)]
pub struct ForwardArgs {
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub prec: Option<i64>,
    #[command(flatten)]
    pub curve: CurveArgs,
    #[arg(long)]
    pub gamma1: Option<String>,
    #[arg(long)]
    pub gamma2: Option<String>,
    #[arg(long)]
    pub k: Option<u64>,
}

/// Flag values layered over config keys and defaults; every resolved value is
/// recorded for the output header.
struct Params {
    config: Map<String, Value>,
    resolved: BTreeMap<String, Value>,
}

impl Params {
    fn new(config: Map<String, Value>) -> Self {
        Params { config, resolved: BTreeMap::new() }
    }

    fn get<T: Serialize + DeserializeOwned>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T> {
        let v = match flag {
            Some(v) => v,
            None => match self.config.get(key) {
                Some(raw) => serde_json::from_value(raw.clone()).map_err(|e| Error::InvalidInput(format!("config key {key}: {e}")))?,
                None => default,
            },
        };
        self.resolved.insert(key.to_string(), serde_json::to_value(&v).map_err(|e| Error::InvalidInput(e.to_string()))?);
        Ok(v)
    }

    fn opt<T: Serialize + DeserializeOwned>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>> {
        let v: Option<T> = match flag {
            Some(v) => Some(v),
            None => match self.config.get(key) {
                Some(raw) => Some(serde_json::from_value(raw.clone()).map_err(|e| Error::InvalidInput(format!("config key {key}: {e}")))?),
                None => None,
            },
        };
        if let Some(x) = &v {
            self.resolved.insert(key.to_string(), serde_json::to_value(x).map_err(|e| Error::InvalidInput(e.to_string()))?);
        }
        Ok(v)
    }

    /// Raw config value, recorded as is.
    fn raw(&mut self, key: &str) -> Option<Value> {
        let v = self.config.get(key).cloned();
        if let Some(x) = &v {
            self.resolved.insert(key.to_string(), x.clone());
        }
        v
    }

    fn header(&self, command: &str) -> Value {
        json!({ "command": command, "version": env!("CARGO_PKG_VERSION"), "config": self.resolved })
    }
}

/// What a subcommand produced.
pub struct Outcome {
    pub name: String,
    pub summary: Value,
    pub tables: Vec<(String, String)>,
    /// Failed assertions with their location.
    pub failures: Vec<String>,
}

fn prime(params: &mut Params, flag: Option<u64>) -> Result<u64> {
    let p: u64 = params.get("p", flag, 3)?;
    check_prime(p)?;
    Ok(p)
}

fn int_arg(s: &str) -> Result<BigInt> {
    s.trim().parse::<BigInt>().map_err(|e| Error::InvalidInput(format!("integer {s}: {e}")))
}

fn to_value<T: Serialize>(x: &T) -> Result<Value> {
    serde_json::to_value(x).map_err(|e| Error::InvalidInput(e.to_string()))
}

fn kind_from(params: &mut Params, flag: Option<String>, p: u64) -> Result<FormalGroupKind> {
    if flag.is_none() {
        if let Some(Value::Object(o)) = params.raw("kind") {
            return serde_json::from_value(Value::Object(o)).map_err(|e| Error::InvalidInput(format!("kind: {e}")));
        }
    }
    let name: String = params.get("kind", flag, "multiplicative".into())?;
    match name.as_str() {
        "multiplicative" => Ok(FormalGroupKind::Multiplicative),
        "lubin_tate" | "lubin-tate" => Ok(FormalGroupKind::lubin_tate_standard(p)),
        other => Err(Error::InvalidInput(format!("unknown kind {other}; pass an object in the config for elliptic laws"))),
    }
}

/// Bundled curves in `G_m^2`.
pub fn bundled_curve(name: &str, p: u64, d: u32, prec: i64) -> Result<Subscheme> {
    match name {
        "diagonal" => Subscheme::diagonal(p, d, prec),
        "double" => Subscheme::graph_of_mult(p, d, prec, 2),
        "shifted" => Subscheme::shifted_diagonal(p, d, prec, p as i64),
        other => Err(Error::InvalidInput(format!("unknown curve {other}"))),
    }
}

fn curve_from(params: &mut Params, c: CurveArgs, p: u64, prec: i64) -> Result<Subscheme> {
    let d: u32 = params.get("degree", c.degree, 16)?;
    let name: String = params.get("curve", c.curve, "diagonal".into())?;
    if name != "file" {
        return bundled_curve(&name, p, d, prec);
    }
    let path: PathBuf = params
        .opt("curve_file", c.curve_file)?
        .ok_or_else(|| Error::InvalidInput("--curve file needs --curve-file".into()))?;
    let text = std::fs::read_to_string(&path)?;
    let j: SubschemeJson = serde_json::from_str(&text)?;
    if j.p != p {
        return Err(Error::PrimeMismatch(j.p, p));
    }
    Subscheme::from_json(&j, prec)
}

fn chart_of(x: &Subscheme) -> Result<CurveChart<PadicScalar>> {
    if x.group().dim() != 2 || x.generators().len() != 1 {
        return Err(Error::ChartInvalid("expected a plane curve with one generator".into()));
    }
    hensel_parametrize(&x.generators()[0], 1)
}

fn cex_outcome(state: &CounterexampleState, n_out: i64, mut summary: Map<String, Value>) -> Result<Outcome> {
    let mut failures = Vec::new();
    let mut tables = Vec::new();
    let dump = state.to_json();
    summary.insert("state".into(), to_value(&dump)?);
    for l in state.ledger() {
        if !l.holds() {
            failures.push(format!("valuation ledger fails at stage {}", l.stage));
        }
    }
    match cex_verify(state, n_out) {
        Ok(r) => {
            let mut csv = String::from("j,n,m,residual,paths_agree\n");
            for row in &r.residuals {
                csv.push_str(&format!("{},{},{},{},{}\n", row.j, row.n, row.m, row.residual, row.paths_agree));
            }
            tables.push(("residuals".to_string(), csv));
            if !r.corrections_integral {
                failures.push("a correction factor is not integral".into());
            }
            if !r.all_paths_agree {
                failures.push("fast and series evaluation paths disagree".into());
            }
            if !r.line_cover.holds {
                failures.push(format!("line cover check: collinear {:?}", r.line_cover.collinear));
            }
            summary.insert("verify".into(), to_value(&r)?);
        }
        Err(e) if e.is_check_failure() => {
            failures.push(e.to_string());
            summary.insert("verify".into(), json!({ "error": e.to_string() }));
        }
        Err(e) => return Err(e),
    }
    if let Ok(cert) = state.subtorus(state.phi().len() as u32 + 1) {
        summary.insert("subtorus".into(), to_value(&cert.to_json())?);
    }
    Ok(Outcome { name: "cex".into(), summary: Value::Object(summary), tables, failures })
}

fn run_cex_build(params: &mut Params, a: CexBuildArgs) -> Result<Outcome> {
    let p = prime(params, a.p)?;
    let alpha: String = params.get("alpha", a.alpha, p.to_string())?;
    let alpha2: String = params.get("alpha2", a.alpha2, alpha.clone())?;
    let stages: u32 = params.get("stages", a.stages, 6)?;
    let n_out: i64 = params.get("prec", a.prec, 60)?;
    let kind = kind_from(params, a.kind, p)?;
    if n_out < 1 {
        return Err(Error::InvalidInput("precision must be positive".into()));
    }
    if stages > 10 {
        return Err(Error::InvalidInput(format!("stage count {stages} outside 1..=10")));
    }
    let (b1, b2) = (int_arg(&alpha)?, int_arg(&alpha2)?);
    if b1.is_zero() {
        return Err(Error::InvalidInput("alpha must be nonzero".into()));
    }
    let v = vp_bigint(p, &b1);
    let work = internal_precision(v, n_out, stages) + 16;
    let a1 = PadicScalar::from_bigint(p, &b1, work);
    let a2 = PadicScalar::from_bigint(p, &b2, work);
    let law_degree: u32 = params.get("degree", None, 16)?;
    let g = match kind {
        FormalGroupKind::Multiplicative => FormalGroupLaw::multiplicative(p, law_degree, work),
        k => FormalGroupLaw::new(k, p, law_degree, work)?,
    };
    let state = match cex_build(&g, &a1, &a2, n_out, stages) {
        Ok(s) => s,
        Err(e) if e.is_check_failure() => {
            return Ok(Outcome {
                name: "cex".into(),
                summary: json!({ "error": e.to_string() }),
                tables: vec![],
                failures: vec![e.to_string()],
            })
        }
        Err(e) => return Err(e),
    };
    cex_outcome(&state, n_out, Map::new())
}

fn run_cex_verify(params: &mut Params, a: CexVerifyArgs) -> Result<Outcome> {
    let path: PathBuf = params.opt("state", a.state)?.ok_or_else(|| Error::InvalidInput("cex verify needs --state".into()))?;
    let text = std::fs::read_to_string(&path)?;
    let doc: Value = serde_json::from_str(&text)?;
    // accept either a bare dump or a `cex build` summary
    let dump = doc.pointer("/result/state").or_else(|| doc.get("state")).cloned().unwrap_or(doc);
    let j: CounterexampleJson = serde_json::from_value(dump)?;
    let n_out: i64 = params.get("prec", a.prec, j.n_out)?;
    let state = CounterexampleState::from_json(&j)?;
    let mut summary = Map::new();
    match state.check_invariants() {
        Ok(()) => {
            summary.insert("invariants".into(), json!("hold"));
        }
        Err(e) if e.is_check_failure() => {
            let mut o = cex_outcome(&state, n_out, summary)?;
            o.failures.insert(0, e.to_string());
            return Ok(o);
        }
        Err(e) => return Err(e),
    }
    cex_outcome(&state, n_out, summary)
}

fn run_scan(params: &mut Params, a: ScanArgs) -> Result<Outcome> {
    let p = prime(params, a.p)?;
    let prec: i64 = params.get("prec", a.prec, 20)?;
    let x = curve_from(params, a.curve, p, prec)?;
    let sigma: SigmaSpec = match params.raw("sigma") {
        Some(v) => serde_json::from_value(v).map_err(|e| Error::InvalidInput(format!("sigma: {e}")))?,
        None => SigmaSpec::Torsion { levels: params.get("levels", a.levels, 3)? },
    };
    let cap: usize = params.get("cap", a.cap, 100_000)?;
    let threshold: i64 = params.get("threshold", a.threshold, prec / 2)?;
    let gamma = GammaModule::standard(p, x.group().dim(), prec);
    let r = dichotomy_scan(&x, &sigma, &gamma, &ScanOptions { cap, threshold })?;
    let mut summary = to_value(&r)?;
    if let Value::Object(o) = &mut summary {
        o.remove("rows");
    }
    Ok(Outcome { name: "scan".into(), summary, tables: vec![("points".into(), r.to_csv())], failures: vec![] })
}

fn check_expect(expect: &Option<String>, got: &str, what: &str) -> Vec<String> {
    match expect {
        Some(e) if e != got => vec![format!("{what}: expected {e}, got {got}")],
        _ => vec![],
    }
}

fn run_subtorus(params: &mut Params, a: SubtorusArgs) -> Result<Outcome> {
    let p = prime(params, a.p)?;
    let prec: i64 = params.get("prec", a.prec, 30)?;
    let x = curve_from(params, a.curve, p, prec)?;
    let expect: Option<String> = params.opt("expect", a.expect)?;
    let chart = chart_of(&x)?;
    let cert = subtorus_test(&chart.h, None)?;
    let got = if cert.is_special() { "special" } else { "not_special" };
    let failures = check_expect(&expect, got, "subtorus verdict");
    let mut csv = String::from("degree,coefficient\n");
    for k in 1..=chart.h.degree() {
        csv.push_str(&format!("{},{}\n", k, chart.h.coeff_uni(k)));
    }
    Ok(Outcome { name: "subtorus".into(), summary: to_value(&cert.to_json())?, tables: vec![("chart".into(), csv)], failures })
}

fn run_newton(params: &mut Params, a: NewtonArgs) -> Result<Outcome> {
    let p = prime(params, a.p)?;
    let v: String = params.get("alpha_val", a.alpha_val, "1".into())?;
    let v = q_from_str(&v).ok_or_else(|| Error::InvalidInput(format!("valuation {v} is not a rational")))?;
    let steps: u32 = params.get("steps", a.steps, 1)?;
    let d: u32 = params.get("degree", a.degree, 16)?;
    let prec: i64 = params.get("prec", a.prec, 30)?;
    let kind = kind_from(params, a.kind, p)?;
    let g = match kind {
        FormalGroupKind::Multiplicative => FormalGroupLaw::multiplicative(p, d, prec),
        k => FormalGroupLaw::new(k, p, d.max(p as u32), prec)?,
    };
    let r = division_valuations(&g, v, steps)?;
    let mut csv = String::from("step,alpha_valuation,root_valuation,multiplicity,bound,holds\n");
    for (i, s) in r.steps.iter().enumerate() {
        for seg in &s.polygon.segments {
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                i,
                q_to_string(&s.alpha_valuation),
                q_to_string(&seg.root_valuation),
                seg.multiplicity,
                q_to_string(&s.bound),
                s.holds
            ));
        }
    }
    let failures = r
        .steps
        .iter()
        .enumerate()
        .filter(|(_, s)| !s.holds)
        .map(|(i, s)| format!("step {i}: a root valuation exceeds v(alpha)/2 = {}", q_to_string(&s.bound)))
        .collect();
    Ok(Outcome { name: "newton".into(), summary: to_value(&r)?, tables: vec![("slopes".into(), csv)], failures })
}

fn run_weights(params: &mut Params, a: WeightsArgs) -> Result<Outcome> {
    let p = prime(params, a.p)?;
    let prec: i64 = params.get("prec", a.prec, 30)?;
    let x = curve_from(params, a.curve, p, prec)?;
    let k_max: u64 = params.get("k_max", a.k_max, 20)?;
    let levels: u32 = params.get("levels", a.levels, 2)?;
    let parallel_only: bool = params.get("parallel_only", a.parallel_only.then_some(true), false)?;
    let expect: Option<String> = params.opt("expect", a.expect)?;
    let chart = chart_of(&x)?;
    let r = classify_weight_closure(&chart, &ClassifyOptions { k_max, levels, parallel_only, ..Default::default() })?;
    let summary = to_value(&r)?;
    let got = summary.get("verdict").and_then(Value::as_str).unwrap_or("inconclusive").to_string();
    let failures = check_expect(&expect, &got, "weight verdict");
    Ok(Outcome { name: "weights".into(), summary, tables: vec![("weights".into(), r.to_csv())], failures })
}

fn run_forward(params: &mut Params, a: ForwardArgs) -> Result<Outcome> {
    let p = prime(params, a.p)?;
    let prec: i64 = params.get("prec", a.prec, 30)?;
    let x = curve_from(params, a.curve, p, prec)?;
    let g1: String = params.get("gamma1", a.gamma1, p.to_string())?;
    let g2: String = params.get("gamma2", a.gamma2, g1.clone())?;
    let k: u64 = params.get("k", a.k, 100)?;
    let gamma = [PadicScalar::from_bigint(p, &int_arg(&g1)?, prec), PadicScalar::from_bigint(p, &int_arg(&g2)?, prec)];
    let r = forward_hits(&x, &gamma, k)?;
    let mut csv = String::from("k1,k2\n");
    for (a, b) in &r.hits {
        csv.push_str(&format!("{a},{b}\n"));
    }
    Ok(Outcome { name: "forward".into(), summary: to_value(&r)?, tables: vec![("hits".into(), csv)], failures: vec![] })
}

fn load_config(path: Option<&Path>) -> Result<Map<String, Value>> {
    let Some(path) = path else { return Ok(Map::new()) };
    let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("config {}: {e}", path.display())))?;
    match serde_json::from_str::<Value>(&text)? {
        Value::Object(o) => Ok(o),
        _ => Err(Error::InvalidInput("config must be a JSON object".into())),
    }
}

/// Parses an argument list whose first element is the program name.
pub fn parse<I, T>(args: I) -> Result<Cli>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    Cli::try_parse_from(args).map_err(|e| Error::InvalidInput(e.to_string()))
}

/// Runs one parsed command and returns the full JSON document and tables.
pub fn execute(cli: Cli) -> Result<(Value, Vec<(String, String)>, Vec<String>, String)> {
    let config = load_config(cli.config.as_deref())?;
    let mut params = Params::new(config);
    let (label, outcome) = match cli.command {
        Command::Cex(CexCommand::Build(a)) => ("cex build", run_cex_build(&mut params, a)?),
        Command::Cex(CexCommand::Verify(a)) => ("cex verify", run_cex_verify(&mut params, a)?),
        Command::Scan(ScanCommand::Dichotomy(a)) => ("scan dichotomy", run_scan(&mut params, a)?),
        Command::Subtorus(SubtorusCommand::Check(a)) => ("subtorus check", run_subtorus(&mut params, a)?),
        Command::Newton(NewtonCommand::Polygon(a)) => ("newton polygon", run_newton(&mut params, a)?),
        Command::Weights(WeightsCommand::Classify(a)) => ("weights classify", run_weights(&mut params, a)?),
        Command::Orbit(OrbitCommand::Forward(a)) => ("orbit forward", run_forward(&mut params, a)?),
    };
    let doc = json!({
        "header": params.header(label),
        "passed": outcome.failures.is_empty(),
        "failures": outcome.failures,
        "result": outcome.summary,
    });
    Ok((doc, outcome.tables, outcome.failures, outcome.name))
}

fn write_artifacts(dir: &Path, name: &str, doc: &Value, tables: &[(String, String)]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let text = serde_json::to_string_pretty(doc).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(dir.join(format!("{name}.json")), text + "\n")?;
    for (t, csv) in tables {
        std::fs::write(dir.join(format!("{name}_{t}.csv")), csv)?;
    }
    Ok(())
}

/// Parses `args`, runs, prints the summary and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let out = cli.out.clone();
    match execute(cli) {
        Ok((doc, tables, failures, name)) => {
            if let Some(dir) = out {
                if let Err(e) = write_artifacts(&dir, &name, &doc, &tables) {
                    eprintln!("error: {e}");
                    return 2;
                }
            }
            println!("{}", serde_json::to_string_pretty(&doc).unwrap_or_default());
            for f in &failures {
                eprintln!("check failed: {f}");
            }
            if failures.is_empty() {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_check_failure() {
                1
            } else {
                2
            }
        }
    }
}
