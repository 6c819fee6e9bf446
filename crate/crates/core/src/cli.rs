//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a computation did not reach its
//! tolerance (the best estimate is still printed), 2 on invalid input.

use std::ffi::OsString;
use std::io::Write;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{Map, Value};

use crate::condexp::{self, Alpha1Variant};
use crate::dist;
use crate::error::{Result, StableError};
use crate::gfun::{self, GFunQuery, GKind};
use crate::moments::{self, MomentKind, MomentQuery};
use crate::oracle::{self, McSettings, Tolerances, VerifyConfig};
use crate::params::{StableParams0, StableParams1};
use crate::quad::QuadConfig;

/// Environment variable overriding the default relative tolerance.
pub const TOL_REL_ENV: &str = "STABLE_MOMENTS_TOL_REL";

#[derive(Debug, Parser)]
#[command(
    name = "stable-moments",
    version,
    about = "Moments, densities and conditional expectations of stable laws"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Truncated, absolute or signed fractional moment.
    Moment(MomentArgs),
    /// The special functions g_d, g̃_d and h.
    Gfun(GfunArgs),
    /// Density and distribution function, or samples.
    Dist(DistArgs),
    /// Conditional expectation E(X2 | X1 = x) for a discrete spectral measure.
    Condexp(CondexpArgs),
    /// Analytic moment against the brute-force oracles.
    Verify(VerifyArgs),
    /// Moment table over a parameter grid (CSV by default).
    Table(TableArgs),
    /// Median timings of the analytic and brute-force paths.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Plain,
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Output format.
    #[arg(long, value_enum)]
    out: Option<OutFormat>,
    /// Absolute quadrature tolerance.
    #[arg(long)]
    tol_abs: Option<f64>,
    /// Relative quadrature tolerance.
    #[arg(long, env = TOL_REL_ENV)]
    tol_rel: Option<f64>,
}

impl CommonArgs {
    fn quad(&self) -> Result<QuadConfig> {
        let mut cfg = QuadConfig::default();
        if let Some(a) = self.tol_abs {
            cfg.abs_tol = a;
        }
        if let Some(r) = self.tol_rel {
            cfg.rel_tol = r;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
struct ParamArgs {
    #[arg(long, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    beta: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    gamma: f64,
    /// Location; read as δ₀ under `--param 0`.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    delta: f64,
    /// Parameterization of the location (0 or 1).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=1))]
    param: u8,
}

impl ParamArgs {
    fn params(&self) -> Result<StableParams1> {
        to_param1(self.alpha, self.beta, self.gamma, self.delta, self.param)
    }
}

fn to_param1(alpha: f64, beta: f64, gamma: f64, delta: f64, param: u8) -> Result<StableParams1> {
    if param == 0 {
        Ok(StableParams0::new(alpha, beta, gamma, delta)?.to_param1())
    } else {
        StableParams1::new(alpha, beta, gamma, delta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Plus,
    Minus,
    Abs,
    Signed,
}

impl From<KindArg> for MomentKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Plus => MomentKind::Plus,
            KindArg::Minus => MomentKind::Minus,
            KindArg::Abs => MomentKind::Abs,
            KindArg::Signed => MomentKind::Signed,
        }
    }
}

fn kind_name(k: MomentKind) -> &'static str {
    match k {
        MomentKind::Plus => "plus",
        MomentKind::Minus => "minus",
        MomentKind::Abs => "abs",
        MomentKind::Signed => "signed",
    }
}

#[derive(Debug, Args)]
struct MomentArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, allow_hyphen_values = true)]
    p: f64,
    #[arg(long, value_enum, default_value_t = KindArg::Plus)]
    kind: KindArg,
    /// Shift: the moment is taken of X - a.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    a: f64,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WhichArg {
    G,
    Gt,
    H,
}

#[derive(Debug, Args)]
struct GfunArgs {
    #[arg(long, value_enum, default_value_t = WhichArg::G)]
    which: WhichArg,
    /// Order d (ignored for h).
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    d: f64,
    #[arg(long, allow_hyphen_values = true)]
    x: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    beta: f64,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct DistArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Point at which to evaluate pdf, cdf and survival function.
    #[arg(long, allow_hyphen_values = true)]
    x: Vec<f64>,
    /// Draw this many samples instead.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// With --n: report the Kolmogorov–Smirnov statistic instead of the draws.
    #[arg(long)]
    ks: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    ShiftConsistent,
    AsPrinted,
}

#[derive(Debug, Args)]
struct CondexpArgs {
    /// File with one atom "s1,s2,weight" per line.
    #[arg(long)]
    atoms: std::path::PathBuf,
    #[arg(long)]
    alpha: f64,
    #[arg(long, allow_hyphen_values = true, required_unless_present = "coeffs")]
    x: Vec<f64>,
    /// Form of the alpha = 1 formula.
    #[arg(long, value_enum, default_value_t = VariantArg::ShiftConsistent)]
    variant: VariantArg,
    /// Print the coefficient set instead.
    #[arg(long)]
    coeffs: bool,
    /// Add a kernel-regression Monte Carlo estimate over this many pairs.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, allow_hyphen_values = true)]
    p: f64,
    #[arg(long, value_enum, default_value_t = KindArg::Plus)]
    kind: KindArg,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    a: f64,
    /// Monte Carlo sample size; 0 skips the Monte Carlo oracle.
    #[arg(long, default_value_t = 1_000_000)]
    n: usize,
    #[arg(long, default_value_t = McSettings::default().seed)]
    seed: u64,
    /// Relative agreement required of the quadrature oracles.
    #[arg(long, default_value_t = Tolerances::default().rel)]
    check_rel: f64,
    /// Agreement required of the Monte Carlo oracle, in standard errors.
    #[arg(long, default_value_t = Tolerances::default().mc_sigmas)]
    mc_sigmas: f64,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct TableArgs {
    /// Grid of alpha values: "a:b:step", "v1,v2,..." or a single value.
    #[arg(long)]
    grid_alpha: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    grid_beta: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    grid_delta: String,
    #[arg(long, default_value = "0.5", allow_hyphen_values = true)]
    grid_p: String,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=1))]
    param: u8,
    #[arg(long, value_enum, default_value_t = KindArg::Plus)]
    kind: KindArg,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    a: f64,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 1.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Location; nonzero keeps the strictly stable shortcut out of the timing.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    delta: f64,
    #[arg(long, default_value_t = 0.7, allow_hyphen_values = true)]
    p: f64,
    #[arg(long, default_value_t = 51)]
    runs: usize,
    #[command(flatten)]
    common: CommonArgs,
}

// ---------------------------------------------------------------------------
// output

#[derive(Debug, Clone)]
enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Num(v) => format_number(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => Value::from(*v),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}
impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
    /// Column printed alone by the plain format when there is one row.
    primary: Option<&'static str>,
}

impl Table {
    fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            primary: None,
        }
    }

    fn primary(mut self, col: &'static str) -> Self {
        self.primary = Some(col);
        self
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn col(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    fn render(&self, fmt: OutFormat) -> String {
        match fmt {
            OutFormat::Plain => self.plain(),
            OutFormat::Json => self
                .rows
                .iter()
                .map(|r| {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .zip(r)
                        .map(|(c, v)| (c.to_string(), v.json()))
                        .collect();
                    Value::Object(obj).to_string() + "\n"
                })
                .collect(),
            OutFormat::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let header: Vec<String> = self
                    .columns
                    .iter()
                    .map(|c| {
                        if *c == "experimental" {
                            "EXPERIMENTAL".to_string()
                        } else {
                            c.to_string()
                        }
                    })
                    .collect();
                w.write_record(&header).expect("in-memory csv");
                for r in &self.rows {
                    w.write_record(r.iter().map(Cell::text))
                        .expect("in-memory csv");
                }
                String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
            }
        }
    }

    fn plain(&self) -> String {
        if let (Some(p), 1) = (self.primary.and_then(|p| self.col(p)), self.rows.len()) {
            let row = &self.rows[0];
            let mut line = row[p].text();
            if let Some(e) = self.col("experimental") {
                if matches!(row[e], Cell::Bool(true)) {
                    line.push_str(" EXPERIMENTAL");
                }
            }
            return line + "\n";
        }
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::text).collect())
            .collect();
        let widths: Vec<usize> = (0..self.columns.len())
            .map(|i| {
                cells
                    .iter()
                    .map(|r| r[i].len())
                    .chain(std::iter::once(self.columns[i].len()))
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |items: Vec<&str>| {
            items
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s:<w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
                + "\n"
        };
        let mut out = line(self.columns.clone());
        for r in &cells {
            out += &line(r.iter().map(String::as_str).collect());
        }
        out
    }
}

/// Fixed notation with 15 decimals for `1e-4 ≤ |v| < 1e6` (and 0),
/// scientific with 15 significant digits otherwise.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = v.abs();
    if a == 0.0 || (1e-4..1e6).contains(&a) {
        format!("{v:.15}")
    } else {
        format!("{v:.14e}")
    }
}

/// Exit status of a command that produced output.
struct Outcome {
    text: String,
    converged: bool,
}

fn numeric_or(r: Result<f64>) -> Result<(f64, bool)> {
    match r {
        Ok(v) => Ok((v, true)),
        Err(StableError::NonConvergence { value, .. }) => Ok((value, false)),
        Err(e) => Err(e),
    }
}

// ---------------------------------------------------------------------------
// commands

fn cmd_moment(a: &MomentArgs) -> Result<Outcome> {
    let params = a.params.params()?;
    let cfg = a.common.quad()?;
    let q = MomentQuery::new(a.p, a.kind.into()).shifted(a.a);
    let (value, experimental, converged) = match moments::moment(&params, &q, &cfg) {
        Ok(v) => (v.value, v.experimental, true),
        Err(StableError::NonConvergence { .. }) => (f64::NAN, a.p < 0.0, false),
        Err(e) => return Err(e),
    };
    let mut t = Table::new(vec![
        "alpha",
        "beta",
        "gamma",
        "delta",
        "p",
        "kind",
        "a",
        "value",
        "experimental",
        "converged",
    ])
    .primary("value");
    t.push(vec![
        params.alpha.into(),
        params.beta.into(),
        params.gamma.into(),
        params.delta.into(),
        a.p.into(),
        kind_name(q.kind).into(),
        a.a.into(),
        value.into(),
        experimental.into(),
        converged.into(),
    ]);
    Ok(Outcome {
        text: t.render(a.common.out.unwrap_or(OutFormat::Plain)),
        converged,
    })
}

fn cmd_gfun(a: &GfunArgs) -> Result<Outcome> {
    let cfg = a.common.quad()?;
    let (name, res) = match a.which {
        WhichArg::G => (
            "g",
            gfun::evaluate(GKind::G, &GFunQuery::new(a.d, a.x, a.alpha, a.beta).with_cfg(cfg))?,
        ),
        WhichArg::Gt => (
            "gt",
            gfun::evaluate(
                GKind::GTilde,
                &GFunQuery::new(a.d, a.x, a.alpha, a.beta).with_cfg(cfg),
            )?,
        ),
        WhichArg::H => ("h", gfun::h_eval(a.x, &cfg)?),
    };
    let mut t = Table::new(vec![
        "which",
        "d",
        "x",
        "alpha",
        "beta",
        "value",
        "error_estimate",
        "converged",
    ])
    .primary("value");
    let (d, alpha, beta) = match a.which {
        WhichArg::H => (Cell::Empty, 1.0, 0.0),
        _ => (Cell::Num(a.d), a.alpha, a.beta),
    };
    t.push(vec![
        name.into(),
        d,
        a.x.into(),
        alpha.into(),
        beta.into(),
        res.value.into(),
        res.error_estimate.into(),
        res.converged.into(),
    ]);
    Ok(Outcome {
        text: t.render(a.common.out.unwrap_or(OutFormat::Plain)),
        converged: res.converged,
    })
}

fn cmd_dist(a: &DistArgs) -> Result<Outcome> {
    let params = a.params.params()?;
    let cfg = a.common.quad()?;
    let fmt = a.common.out.unwrap_or(OutFormat::Plain);
    if let Some(n) = a.n {
        let batch = dist::sample(&params, n, a.seed)?;
        if a.ks {
            let d = dist::ks_statistic(&batch.values, &params, &cfg)?;
            let crit = dist::ks_critical_1pct(n);
            let mut t = Table::new(vec!["n", "seed", "ks", "critical_1pct", "passed"]);
            t.push(vec![
                Cell::Int(n as u64),
                Cell::Int(a.seed),
                d.into(),
                crit.into(),
                (d < crit).into(),
            ]);
            return Ok(Outcome {
                text: t.render(fmt),
                converged: true,
            });
        }
        let mut t = Table::new(vec!["x"]);
        for v in batch.values {
            t.push(vec![v.into()]);
        }
        let text = if fmt == OutFormat::Plain {
            t.rows.iter().map(|r| r[0].text() + "\n").collect()
        } else {
            t.render(fmt)
        };
        return Ok(Outcome {
            text,
            converged: true,
        });
    }
    if a.x.is_empty() {
        return Err(StableError::Input("dist needs --x or --n".into()));
    }
    let mut t = Table::new(vec!["x", "pdf", "cdf", "sf", "converged"]);
    let mut all = true;
    for &x in &a.x {
        let (pdf, c1) = numeric_or(dist::pdf(x, &params, &cfg))?;
        let (cdf, c2) = numeric_or(dist::cdf(x, &params, &cfg))?;
        let (sf, c3) = numeric_or(dist::sf(x, &params, &cfg))?;
        let ok = c1 && c2 && c3;
        all &= ok;
        t.push(vec![x.into(), pdf.into(), cdf.into(), sf.into(), ok.into()]);
    }
    Ok(Outcome {
        text: t.render(fmt),
        converged: all,
    })
}

fn cmd_condexp(a: &CondexpArgs) -> Result<Outcome> {
    let cfg = a.common.quad()?;
    let fmt = a.common.out.unwrap_or(OutFormat::Plain);
    let text = std::fs::read_to_string(&a.atoms)
        .map_err(|e| StableError::Input(format!("{}: {e}", a.atoms.display())))?;
    let atoms = condexp::parse_atoms(&text)?;
    let c = condexp::cond_exp_coeffs(&atoms, a.alpha)?;
    if a.coeffs {
        let mut t = Table::new(vec![
            "alpha", "c0", "c1", "c2", "kappa1", "kappa2", "mu1", "beta1", "gamma1",
        ]);
        t.push(vec![
            c.alpha.into(),
            c.c0.into(),
            c.c1.into(),
            c.c2.into(),
            c.kappa1.into(),
            c.kappa2.into(),
            c.mu1.into(),
            c.beta1.into(),
            c.gamma1.into(),
        ]);
        return Ok(Outcome {
            text: t.render(fmt),
            converged: true,
        });
    }
    let variant = match a.variant {
        VariantArg::ShiftConsistent => Alpha1Variant::ShiftConsistent,
        VariantArg::AsPrinted => Alpha1Variant::AsPrinted,
    };
    let mut cols = vec!["x", "value", "converged"];
    if a.n.is_some() {
        cols.extend(["mc_estimate", "mc_stderr"]);
    }
    let mut t = Table::new(cols).primary("value");
    let mut all = true;
    for &x in &a.x {
        let (v, ok) = numeric_or(condexp::cond_exp_with(&c, x, variant, &cfg))?;
        all &= ok;
        let mut row: Vec<Cell> = vec![x.into(), v.into(), ok.into()];
        if let Some(n) = a.n {
            let mc = condexp::cond_exp_monte_carlo(&atoms, a.alpha, x, n, a.seed, None)?;
            row.extend([mc.estimate.into(), mc.stderr.into()]);
        }
        t.push(row);
    }
    Ok(Outcome {
        text: t.render(fmt),
        converged: all,
    })
}

fn cmd_verify(a: &VerifyArgs) -> Result<Outcome> {
    let params = a.params.params()?;
    let cfg = VerifyConfig {
        tolerances: Tolerances {
            rel: a.check_rel,
            mc_sigmas: a.mc_sigmas,
            ..Tolerances::default()
        },
        quad: a.common.quad()?,
        mc: (a.n > 0).then_some(McSettings {
            n: a.n,
            seed: a.seed,
        }),
        ..VerifyConfig::default()
    };
    let q = MomentQuery::new(a.p, a.kind.into()).shifted(a.a);
    let reports = oracle::verify(&params, &q, &cfg)?;
    let converged = reports.iter().all(|r| r.converged);
    let fmt = a.common.out.unwrap_or(OutFormat::Plain);
    let text = match fmt {
        OutFormat::Json => reports.iter().map(|r| r.to_json_line() + "\n").collect(),
        OutFormat::Csv => {
            let mut t = Table::new(vec![
                "oracle_kind",
                "alpha",
                "beta",
                "gamma",
                "delta",
                "p",
                "kind",
                "a",
                "analytic",
                "oracle",
                "abs_err",
                "rel_err",
                "threshold",
                "mc_stderr",
                "passed",
                "converged",
                "experimental",
                "infinite_variance",
                "printed_formula",
            ]);
            for r in &reports {
                t.push(vec![
                    r.oracle_kind.to_string().as_str().into(),
                    r.alpha.into(),
                    r.beta.into(),
                    r.gamma.into(),
                    r.delta.into(),
                    r.p.into(),
                    kind_name(r.kind).into(),
                    r.a.into(),
                    r.analytic.into(),
                    r.oracle.into(),
                    r.abs_err.into(),
                    r.rel_err.into(),
                    r.threshold.into(),
                    r.mc_stderr.into(),
                    r.passed.into(),
                    r.converged.into(),
                    r.experimental.into(),
                    r.infinite_variance.map_or(Cell::Empty, Cell::Bool),
                    r.printed_formula.into(),
                ]);
            }
            t.render(OutFormat::Csv)
        }
        OutFormat::Plain => {
            let mut t = Table::new(vec![
                "oracle",
                "analytic",
                "oracle_value",
                "rel_err",
                "mc_stderr",
                "status",
            ]);
            for r in &reports {
                let status = match (r.passed, r.experimental) {
                    (true, false) => "PASS",
                    (false, false) => "FAIL",
                    (true, true) => "PASS EXPERIMENTAL",
                    (false, true) => "FAIL EXPERIMENTAL",
                };
                t.push(vec![
                    r.oracle_kind.to_string().as_str().into(),
                    r.analytic.into(),
                    r.oracle.into(),
                    r.rel_err.into(),
                    r.mc_stderr.into(),
                    status.into(),
                ]);
            }
            let mut s = t.render(OutFormat::Plain);
            if let Some(pf) = reports.first().and_then(|r| r.printed_formula) {
                s += &format!("printed single-formula E|X|^p: {}\n", format_number(pf));
            }
            s
        }
    };
    Ok(Outcome { text, converged })
}

/// Parses `a:b:step`, a comma list, or a single value.
fn parse_grid(spec: &str, name: &str) -> Result<Vec<f64>> {
    let bad = || StableError::Input(format!("--grid-{name}: cannot parse \"{spec}\""));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.len() {
        1 => spec.split(',').map(num).collect(),
        3 => {
            let (a, b, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
            if !(step > 0.0) || b < a || !a.is_finite() || !b.is_finite() {
                return Err(bad());
            }
            let n = ((b - a) / step + 1e-9).floor() as usize + 1;
            if n > 1_000_000 {
                return Err(StableError::Input(format!("--grid-{name}: too many points")));
            }
            Ok((0..n)
                .map(|i| ((a + i as f64 * step) * 1e12).round() / 1e12)
                .collect())
        }
        _ => Err(bad()),
    }
}

fn cmd_table(a: &TableArgs) -> Result<Outcome> {
    let cfg = a.common.quad()?;
    let alphas = parse_grid(&a.grid_alpha, "alpha")?;
    let betas = parse_grid(&a.grid_beta, "beta")?;
    let deltas = parse_grid(&a.grid_delta, "delta")?;
    let ps = parse_grid(&a.grid_p, "p")?;
    let kind: MomentKind = a.kind.into();
    let mut cells = Vec::new();
    for &al in &alphas {
        for &be in &betas {
            for &de in &deltas {
                for &p in &ps {
                    cells.push((al, be, de, p));
                }
            }
        }
    }
    let rows: Vec<(Vec<Cell>, bool)> = cells
        .par_iter()
        .map(|&(al, be, de, p)| {
            let q = MomentQuery::new(p, kind).shifted(a.a);
            let res = to_param1(al, be, a.gamma, de, a.param)
                .and_then(|params| moments::moment(&params, &q, &cfg));
            let (value, experimental, error, ok) = match res {
                Ok(v) => (Cell::Num(v.value), v.experimental, Cell::Empty, true),
                Err(e) => {
                    let ok = !e.is_numerical();
                    (Cell::Empty, p < 0.0, Cell::Text(e.to_string()), ok)
                }
            };
            (
                vec![
                    al.into(),
                    be.into(),
                    a.gamma.into(),
                    de.into(),
                    p.into(),
                    kind_name(kind).into(),
                    a.a.into(),
                    value,
                    experimental.into(),
                    error,
                ],
                ok,
            )
        })
        .collect();
    let mut t = Table::new(vec![
        "alpha",
        "beta",
        "gamma",
        "delta",
        "p",
        "kind",
        "a",
        "value",
        "experimental",
        "error",
    ]);
    let mut converged = true;
    for (r, ok) in rows {
        converged &= ok;
        t.push(r);
    }
    Ok(Outcome {
        text: t.render(a.common.out.unwrap_or(OutFormat::Csv)),
        converged,
    })
}

fn median_seconds<F: FnMut()>(runs: usize, mut f: F) -> f64 {
    let mut times: Vec<f64> = (0..runs)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed().as_secs_f64()
        })
        .collect();
    times.sort_by(f64::total_cmp);
    times[times.len() / 2]
}

fn cmd_bench(a: &BenchArgs) -> Result<Outcome> {
    let cfg = a.common.quad()?;
    let params = StableParams1::new(a.alpha, a.beta, a.gamma, a.delta)?;
    if a.runs == 0 {
        return Err(StableError::Input("--runs must be at least 1".into()));
    }
    let q = MomentQuery::new(a.p, MomentKind::Plus);
    // fail fast on invalid input before timing
    let analytic = moments::moment(&params, &q, &cfg)?;
    let gq = GFunQuery::new(-a.p, -params.delta_star(), a.alpha, a.beta).with_cfg(cfg);
    let t_g = median_seconds(a.runs, || {
        std::hint::black_box(gfun::evaluate(GKind::G, std::hint::black_box(&gq)).ok());
    });
    let t_m = median_seconds(a.runs, || {
        std::hint::black_box(moments::moment(&params, std::hint::black_box(&q), &cfg).ok());
    });
    let t_d = median_seconds(a.runs, || {
        std::hint::black_box(
            oracle::moment_by_density_quadrature(&params, std::hint::black_box(&q), &cfg).ok(),
        );
    });
    let mut t = Table::new(vec![
        "alpha",
        "beta",
        "gamma",
        "delta",
        "p",
        "runs",
        "moment",
        "g_eval_median_s",
        "analytic_moment_median_s",
        "density_quad_median_s",
        "speed_ratio",
    ]);
    t.push(vec![
        a.alpha.into(),
        a.beta.into(),
        a.gamma.into(),
        a.delta.into(),
        a.p.into(),
        Cell::Int(a.runs as u64),
        analytic.value.into(),
        t_g.into(),
        t_m.into(),
        t_d.into(),
        (t_d / t_m).into(),
    ]);
    Ok(Outcome {
        text: t.render(a.common.out.unwrap_or(OutFormat::Plain)),
        converged: true,
    })
}

/// Runs the command line `args` (including the program name), writing
/// results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    2
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Moment(a) => cmd_moment(a),
        Command::Gfun(a) => cmd_gfun(a),
        Command::Dist(a) => cmd_dist(a),
        Command::Condexp(a) => cmd_condexp(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Table(a) => cmd_table(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(o) => {
            let _ = out.write_all(o.text.as_bytes());
            if o.converged {
                0
            } else {
                let _ = writeln!(err, "warning: tolerance not reached; best estimates shown");
                1
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_numerical() {
                1
            } else {
                2
            }
        }
    }
}
