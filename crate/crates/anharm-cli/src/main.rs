//! `anharm` — eigenvalue bounds for 1D polynomial potentials.
//!
//! Subcommands: solve | sweep-gauge | error-scan | flow | splitting | check.
//! Results go to stdout as JSON; tables go to CSV files. Exit codes:
//! 0 success, 1 usage error, 2 numerical failure (diagnostic JSON on stdout).

mod config;

use std::fs;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rug::{Float, Rational};

use anharm_core::big::{self, bits_for_digits, parse_real, BigReal};
use anharm_core::diagnostics::{error_scan, flow_data, recommend_xmax};
use anharm_core::gauge::{optimal_linear_gauge, optimal_monomial_gauge, sweep_linear_gauge};
use anharm_core::model::{parse_polynomial, validate_problem, GaugeFunction, Problem};
use anharm_core::quantize::{
    solve_asymmetric, solve_level, solution_at, GaugeSpec, OrderSpec, PrecisionSpec, SolveConfig,
};
use anharm_core::series::Parity;

use config::RunConfig;

const PRECISION_CAP_ENV: &str = "ANHARM_PRECISION_CAP";

#[derive(Parser)]
#[command(name = "anharm", version, about = "Eigenvalue bounds for 1D polynomial potentials")]
struct Cli {
    /// JSON config file; command-line flags override its fields
    #[arg(long, global = true)]
    config: Option<String>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one level: upper/lower bounds from K(x_max)=0 and L(x_max)=0
    Solve(CommonArgs),
    /// Sweep the linear gauge coefficient at fixed order and precision
    SweepGauge(SweepArgs),
    /// Measure the finite-x_max error against a reference and tabulate the
    /// closed-form estimates
    ErrorScan(ScanArgs),
    /// Tabulate x, phi, WKB curves, K, L and the relative wave function
    Flow(FlowArgs),
    /// Lowest even/odd pair and their splitting
    Splitting(CommonArgs),
    /// Run the built-in invariant checks
    Check,
}

#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// Potential, e.g. "x^2 + 0.1*x^4" (decimal or p/q coefficients)
    #[arg(long, allow_hyphen_values = true)]
    potential: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    mass: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    hbar: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    xmax: Option<String>,
    /// Negative left boundary: switches to the two-condition asymmetric solve
    #[arg(long, allow_hyphen_values = true)]
    xmin: Option<String>,
    #[arg(long)]
    level: Option<usize>,
    /// "auto" or a truncation order
    #[arg(long)]
    order: Option<String>,
    /// "auto" or decimal digits
    #[arg(long)]
    precision: Option<String>,
    /// "auto" | "none" | "linear:<a>" | "monomial" | "poly:<text>"
    #[arg(long)]
    gauge: Option<String>,
    #[arg(long)]
    target_digits: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    root_tol: Option<String>,
    #[arg(long)]
    grid_samples: Option<usize>,
    /// Initial energy guess (asymmetric solves)
    #[arg(long, allow_hyphen_values = true)]
    init_energy: Option<String>,
    /// Initial L_0 guess (asymmetric solves)
    #[arg(long, allow_hyphen_values = true)]
    init_l0: Option<String>,
    /// Splitting: digits to quote
    #[arg(long)]
    digits: Option<u32>,
    /// Write the JSON result here as well as stdout
    #[arg(long)]
    out: Option<String>,
    /// Export the series solution at E_mid to this JSON file
    #[arg(long)]
    dump_series: Option<String>,
}

#[derive(Args, Clone, Default)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    a_min: Option<f64>,
    #[arg(long)]
    a_max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// High-accuracy reference energy; computed internally when absent
    #[arg(long, allow_hyphen_values = true)]
    reference_energy: Option<String>,
    #[arg(long)]
    csv: Option<String>,
}

#[derive(Args, Clone, Default)]
struct ScanArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated x_max values, e.g. "2.5,3,4,6"
    #[arg(long)]
    xmax_list: Option<String>,
    #[arg(long)]
    reference_xmax: Option<f64>,
    #[arg(long)]
    csv: Option<String>,
}

#[derive(Args, Clone, Default)]
struct FlowArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Trial energy; when absent the level is solved first and E_mid used
    #[arg(long, allow_hyphen_values = true)]
    energy: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    x_from: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    x_to: Option<String>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    csv: Option<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap prints help/version through the error path with status 0
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Some(usage) = e.downcast_ref::<UsageError>() {
                eprintln!("error: {usage}");
                ExitCode::from(1)
            } else {
                let payload = serde_json::json!({
                    "error": {
                        "kind": "numerical_failure",
                        "message": format!("{e:#}"),
                    }
                });
                println!("{}", serde_json::to_string_pretty(&payload).unwrap());
                ExitCode::from(2)
            }
        }
    }
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(UsageError(msg.into()))
}

fn run(cli: Cli) -> Result<()> {
    let file_cfg: RunConfig = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config {path}: {e}")))?;
            serde_json::from_str(&text)
                .map_err(|e| usage(format!("config {path} is not valid JSON: {e}")))?
        }
        None => RunConfig::default(),
    };
    match cli.cmd {
        Cmd::Solve(args) => cmd_solve(file_cfg.merged_with(&args.to_config())),
        Cmd::Splitting(args) => cmd_splitting(file_cfg.merged_with(&args.to_config())),
        Cmd::SweepGauge(args) => cmd_sweep(file_cfg.merged_with(&args.to_config())),
        Cmd::ErrorScan(args) => cmd_error_scan(file_cfg.merged_with(&args.to_config())),
        Cmd::Flow(args) => cmd_flow(file_cfg.merged_with(&args.to_config())),
        Cmd::Check => cmd_check(),
    }
}

impl CommonArgs {
    fn to_config(&self) -> RunConfig {
        RunConfig {
            potential: self.potential.clone(),
            mass: self.mass.clone(),
            hbar: self.hbar.clone(),
            xmax: self.xmax.clone(),
            xmin: self.xmin.clone(),
            level: self.level,
            order: self.order.clone(),
            precision: self.precision.clone(),
            gauge: self.gauge.clone(),
            target_digits: self.target_digits,
            root_tol: self.root_tol.clone(),
            grid_samples: self.grid_samples,
            init_energy: self.init_energy.clone(),
            init_l0: self.init_l0.clone(),
            digits: self.digits,
            out: self.out.clone(),
            dump_series: self.dump_series.clone(),
            ..RunConfig::default()
        }
    }
}

impl SweepArgs {
    fn to_config(&self) -> RunConfig {
        RunConfig {
            a_min: self.a_min,
            a_max: self.a_max,
            steps: self.steps,
            reference_energy: self.reference_energy.clone(),
            csv: self.csv.clone(),
            ..self.common.to_config()
        }
    }
}

impl ScanArgs {
    fn to_config(&self) -> RunConfig {
        RunConfig {
            xmax_list: self.xmax_list.as_ref().map(|s| {
                s.split(',')
                    .filter_map(|t| t.trim().parse().ok())
                    .collect()
            }),
            reference_xmax: self.reference_xmax,
            csv: self.csv.clone(),
            ..self.common.to_config()
        }
    }
}

impl FlowArgs {
    fn to_config(&self) -> RunConfig {
        RunConfig {
            energy: self.energy.clone(),
            x_from: self.x_from.clone(),
            x_to: self.x_to.clone(),
            points: self.points,
            csv: self.csv.clone(),
            ..self.common.to_config()
        }
    }
}

// ---------------------------------------------------------------------------
// shared construction
// ---------------------------------------------------------------------------

fn parse_rational(text: &str, what: &str) -> Result<Rational> {
    let t = text.trim();
    if let Ok(r) = t.parse::<Rational>() {
        return Ok(r);
    }
    // decimal literal -> exact rational
    let poly = parse_polynomial(t).map_err(|e| usage(format!("bad {what} '{t}': {e}")))?;
    if poly.degree() > 0 {
        return Err(usage(format!("{what} must be a number, got '{t}'")));
    }
    Ok(poly.coeff(0))
}

fn build_problem(cfg: &RunConfig) -> Result<Problem> {
    let text = cfg
        .potential
        .as_deref()
        .ok_or_else(|| usage("--potential is required"))?;
    let poly = parse_polynomial(text).context("parsing potential")?;
    let mass = match &cfg.mass {
        Some(m) => parse_rational(m, "mass")?,
        None => Rational::from(1),
    };
    let hbar = match &cfg.hbar {
        Some(h) => parse_rational(h, "hbar")?,
        None => Rational::from(1),
    };
    Ok(validate_problem(poly, mass, hbar)?)
}

fn parse_gauge(spec: &str, problem: &Problem) -> Result<GaugeSpec> {
    let prec = bits_for_digits(220);
    match spec {
        "auto" => Ok(GaugeSpec::Auto),
        "none" | "zero" => Ok(GaugeSpec::Fixed(GaugeFunction::zero())),
        "monomial" => {
            let (b, deg) = optimal_monomial_gauge(problem, prec);
            Ok(GaugeSpec::Fixed(GaugeFunction::monomial(b, deg)))
        }
        other => {
            if let Some(a) = other.strip_prefix("linear:") {
                let a = parse_real(a, prec).map_err(|e| usage(format!("bad gauge: {e}")))?;
                Ok(GaugeSpec::Fixed(GaugeFunction::linear(a)))
            } else if let Some(text) = other.strip_prefix("poly:") {
                let poly = parse_polynomial(text).context("parsing gauge polynomial")?;
                Ok(GaugeSpec::Fixed(GaugeFunction::from_polynomial(&poly, prec)))
            } else {
                Err(usage(format!(
                    "gauge must be auto | none | linear:<a> | monomial | poly:<text>, got '{other}'"
                )))
            }
        }
    }
}

fn build_solve_config(cfg: &RunConfig, problem: &Problem) -> Result<SolveConfig> {
    let target = cfg.target_digits.unwrap_or(30);
    let work_prec = bits_for_digits(target.max(60) + 20);
    let x_max = match &cfg.xmax {
        Some(x) => parse_real(x, work_prec).map_err(|e| usage(format!("bad xmax: {e}")))?,
        None => {
            // one knob: derive x_max from the target accuracy
            let x = recommend_xmax(problem, target);
            Float::with_val(work_prec, &x)
        }
    };
    let mut sc = SolveConfig::new(x_max);
    sc.target_digits = target;
    if let Some(x) = &cfg.xmin {
        sc.x_min = Some(parse_real(x, work_prec).map_err(|e| usage(format!("bad xmin: {e}")))?);
    }
    if let Some(o) = &cfg.order {
        sc.order = match o.trim() {
            "auto" => OrderSpec::Auto,
            num => OrderSpec::Fixed(
                num.parse()
                    .map_err(|_| usage(format!("bad order '{num}'")))?,
            ),
        };
    }
    if let Some(p) = &cfg.precision {
        sc.precision = match p.trim() {
            "auto" => PrecisionSpec::Auto,
            num => PrecisionSpec::Digits(
                num.parse()
                    .map_err(|_| usage(format!("bad precision '{num}'")))?,
            ),
        };
    }
    if let Some(g) = &cfg.gauge {
        sc.gauge = parse_gauge(g, problem)?;
    }
    if let Some(t) = &cfg.root_tol {
        sc.root_tol =
            Some(parse_real(t, work_prec).map_err(|e| usage(format!("bad root_tol: {e}")))?);
    }
    if let Some(g) = cfg.grid_samples {
        sc.grid_samples = g;
    }
    if let Ok(cap) = std::env::var(PRECISION_CAP_ENV) {
        let cap: u32 = cap
            .parse()
            .map_err(|_| usage(format!("{PRECISION_CAP_ENV} must be an integer")))?;
        sc.max_precision = Some(cap);
        if let PrecisionSpec::Digits(d) = sc.precision {
            if d > cap {
                return Err(usage(format!(
                    "precision {d} exceeds {PRECISION_CAP_ENV}={cap}"
                )));
            }
        }
    }
    Ok(sc)
}

fn problem_json(problem: &Problem) -> serde_json::Value {
    serde_json::json!({
        "potential": problem.potential().render(),
        "mass": problem.mass().to_string(),
        "hbar": problem.hbar().to_string(),
        "l": problem.l(),
    })
}

fn emit(cfg: &RunConfig, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).unwrap();
    println!("{text}");
    if let Some(path) = &cfg.out {
        fs::write(path, text.as_bytes()).with_context(|| format!("writing {path}"))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

fn solve_one(
    cfg: &RunConfig,
    problem: &Problem,
    sc: &SolveConfig,
    level: usize,
) -> Result<(anharm_core::EigenvalueResult, Option<BigReal>)> {
    if sc.x_min.is_some() {
        let prec = bits_for_digits(sc.target_digits.max(60) + 20);
        let e_init = match &cfg.init_energy {
            Some(e) => parse_real(e, prec).map_err(|e| usage(format!("bad init_energy: {e}")))?,
            None => Float::with_val(prec, anharm_core::quantize::estimate_level_energy(problem, level)),
        };
        let l_init = match &cfg.init_l0 {
            Some(l) => parse_real(l, prec).map_err(|e| usage(format!("bad init_l0: {e}")))?,
            None => Float::with_val(prec, 0),
        };
        let (r, l0) = solve_asymmetric(problem, sc, level, (&e_init, &l_init))?;
        Ok((r, Some(l0)))
    } else {
        Ok((solve_level(problem, sc, level)?, None))
    }
}

fn cmd_solve(cfg: RunConfig) -> Result<()> {
    let problem = build_problem(&cfg)?;
    let sc = build_solve_config(&cfg, &problem)?;
    let level = cfg.level.unwrap_or(0);
    let (result, l0) = solve_one(&cfg, &problem, &sc, level)?;
    let mut doc = serde_json::json!({
        "problem": problem_json(&problem),
        "result": result.to_json(),
    });
    if let Some(l0) = l0 {
        doc["result"]["l0"] = serde_json::Value::String(big::dec_string(&l0));
    }
    if let Some(path) = &cfg.dump_series {
        let sol = solution_at(&problem, &sc, level, &result.e_mid)?;
        fs::write(path, serde_json::to_string_pretty(&sol.to_json()).unwrap())
            .with_context(|| format!("writing {path}"))?;
    }
    emit(&cfg, &doc)
}

fn cmd_splitting(cfg: RunConfig) -> Result<()> {
    let problem = build_problem(&cfg)?;
    let sc = build_solve_config(&cfg, &problem)?;
    let r0 = solve_level(&problem, &sc, 0)?;
    let r1 = solve_level(&problem, &sc, 1)?;
    let prec = r0.e_mid.prec().max(r1.e_mid.prec());
    let split = Float::with_val(prec, &r1.e_mid) - &r0.e_mid;
    // digits of the splitting supported by the level accuracy
    let level_digits = r0.claimed_digits.min(r1.claimed_digits) as f64;
    let offset = big::log10_abs(&r0.e_mid) - big::log10_abs(&split);
    let supported = (level_digits - offset.max(0.0)).floor().max(0.0) as usize;
    let quoted = cfg.digits.map(|d| d as usize).unwrap_or(supported).min(supported.max(1));
    let doc = serde_json::json!({
        "problem": problem_json(&problem),
        "e0": r0.to_json(),
        "e1": r1.to_json(),
        "splitting": {
            "value": big::dec_string(&split),
            "value_claimed": big::dec_string_digits(&split, quoted.max(1)),
            "supported_digits": supported,
        },
    });
    emit(&cfg, &doc)
}

fn cmd_sweep(cfg: RunConfig) -> Result<()> {
    let problem = build_problem(&cfg)?;
    let a_min = cfg.a_min.unwrap_or(0.0);
    let a_max = cfg.a_max.unwrap_or(3.0);
    let steps = cfg.steps.unwrap_or(30);
    if steps < 1 || a_max <= a_min {
        return Err(usage("need steps >= 1 and a_max > a_min"));
    }
    let order = match cfg.order.as_deref() {
        Some("auto") | None => 100,
        Some(num) => num
            .parse()
            .map_err(|_| usage(format!("bad order '{num}'")))?,
    };
    let precision: u32 = match cfg.precision.as_deref() {
        Some("auto") | None => 60,
        Some(num) => num
            .parse()
            .map_err(|_| usage(format!("bad precision '{num}'")))?,
    };
    let prec = bits_for_digits(precision);
    let x_max = match &cfg.xmax {
        Some(x) => parse_real(x, prec).map_err(|e| usage(format!("bad xmax: {e}")))?,
        None => return Err(usage("--xmax is required for sweep-gauge")),
    };
    let level = cfg.level.unwrap_or(0);
    let reference = match &cfg.reference_energy {
        Some(e) => Some(parse_real(e, prec).map_err(|e| usage(format!("bad reference: {e}")))?),
        None => None,
    };
    let a_values: Vec<f64> = (0..=steps)
        .map(|i| a_min + (a_max - a_min) * i as f64 / steps as f64)
        .collect();
    let points = sweep_linear_gauge(
        &problem,
        &x_max,
        &a_values,
        order,
        precision,
        level,
        reference.as_ref(),
    )?;
    if let Some(path) = &cfg.csv {
        let mut w = String::from("a,achieved_digits,order,est_lost_digits\n");
        for p in &points {
            w.push_str(&format!(
                "{:.6},{:.3},{},{:.3}\n",
                p.a, p.achieved_digits, p.order, p.est_lost_digits
            ));
        }
        fs::write(path, w).with_context(|| format!("writing {path}"))?;
    }
    let best = points
        .iter()
        .max_by(|p, q| p.achieved_digits.partial_cmp(&q.achieved_digits).unwrap())
        .unwrap();
    let doc = serde_json::json!({
        "problem": problem_json(&problem),
        "order": order,
        "precision": precision,
        "points": points.iter().map(|p| serde_json::json!({
            "a": p.a,
            "achieved_digits": format!("{:.3}", p.achieved_digits),
            "est_lost_digits": format!("{:.3}", p.est_lost_digits),
        })).collect::<Vec<_>>(),
        "best": {
            "a": best.a,
            "achieved_digits": format!("{:.3}", best.achieved_digits),
        },
        "optimal_linear_estimate": format!("{:.4}", optimal_linear_gauge(&problem, &x_max).to_f64()),
    });
    emit(&cfg, &doc)
}

fn cmd_error_scan(cfg: RunConfig) -> Result<()> {
    let problem = build_problem(&cfg)?;
    let xs = cfg
        .xmax_list
        .clone()
        .ok_or_else(|| usage("--xmax-list is required"))?;
    if xs.is_empty() {
        return Err(usage("--xmax-list is empty"));
    }
    let reference = cfg
        .reference_xmax
        .unwrap_or_else(|| xs.iter().cloned().fold(0.0, f64::max) * 1.5);
    let rows = error_scan(&problem, &xs, reference, cfg.grid_samples.unwrap_or(96))?;
    if let Some(path) = &cfg.csv {
        let mut w =
            String::from("x_max,ln_deltaE_measured,ln_deltaE_perturbative,ln_deltaE_asymptotic\n");
        for r in &rows {
            w.push_str(&format!(
                "{:.4},{:.6},{:.6},{:.6}\n",
                r.x_max, r.ln_delta_e_measured, r.ln_delta_e_perturbative, r.ln_delta_e_asymptotic
            ));
        }
        fs::write(path, w).with_context(|| format!("writing {path}"))?;
    }
    let doc = serde_json::json!({
        "problem": problem_json(&problem),
        "reference_xmax": reference,
        "rows": rows.iter().map(|r| serde_json::json!({
            "x_max": r.x_max,
            "ln_deltaE_measured": format!("{:.6}", r.ln_delta_e_measured),
            "ln_deltaE_mid": format!("{:.6}", r.ln_delta_e_mid),
            "ln_deltaE_perturbative": format!("{:.6}", r.ln_delta_e_perturbative),
            "ln_deltaE_asymptotic": format!("{:.6}", r.ln_delta_e_asymptotic),
        })).collect::<Vec<_>>(),
    });
    emit(&cfg, &doc)
}

fn cmd_flow(cfg: RunConfig) -> Result<()> {
    let problem = build_problem(&cfg)?;
    let sc = build_solve_config(&cfg, &problem)?;
    let level = cfg.level.unwrap_or(0);
    let precision = match sc.precision {
        PrecisionSpec::Digits(d) => d,
        PrecisionSpec::Auto => sc.target_digits + 25,
    };
    let prec = bits_for_digits(precision);
    let energy = match &cfg.energy {
        Some(e) => parse_real(e, prec).map_err(|e| usage(format!("bad energy: {e}")))?,
        None => {
            let (r, _) = solve_one(&cfg, &problem, &sc, level)?;
            Float::with_val(prec, &r.e_mid)
        }
    };
    let gauge = match &sc.gauge {
        GaugeSpec::Fixed(g) => g.clone(),
        GaugeSpec::Auto => GaugeFunction::linear(optimal_linear_gauge(
            &problem,
            &Float::with_val(prec, &sc.x_max),
        )),
    };
    let order = match sc.order {
        OrderSpec::Fixed(o) => o,
        OrderSpec::Auto => anharm_core::quantize::auto_order(
            &problem,
            &gauge,
            &energy,
            &sc.x_max,
            precision,
            sc.target_digits,
            sc.max_order,
        )?,
    };
    let x_from = match &cfg.x_from {
        Some(x) => parse_real(x, prec).map_err(|e| usage(format!("bad x_from: {e}")))?,
        None => Float::with_val(prec, 0),
    };
    let x_to = match &cfg.x_to {
        Some(x) => parse_real(x, prec).map_err(|e| usage(format!("bad x_to: {e}")))?,
        None => Float::with_val(prec, &sc.x_max),
    };
    let points = cfg.points.unwrap_or(120).max(2);
    let grid: Vec<BigReal> = (0..points)
        .map(|i| {
            let t = Float::with_val(prec, i as u64) / Float::with_val(prec, (points - 1) as u64);
            Float::with_val(prec, &x_to) * &t + (Float::with_val(prec, 1) - &t) * &x_from
        })
        .collect();
    let parity = if level % 2 == 0 { Parity::Even } else { Parity::Odd };
    let rows = flow_data(&problem, &energy, &gauge, order, precision, &grid, parity)?;
    if let Some(path) = &cfg.csv {
        let mut w = String::from("x,phi,wkb_plus,wkb_minus,k,l,psi_rel\n");
        for r in &rows {
            let num = |v: &Option<BigReal>| -> String {
                v.as_ref().map(|x| format!("{:.12e}", x.to_f64())).unwrap_or_default()
            };
            w.push_str(&format!(
                "{:.8},{},{},{},{:.12e},{:.12e},{:.12e}\n",
                r.x.to_f64(),
                r.phi
                    .as_ref()
                    .map(|p| format!("{:.12e}", p.to_f64()))
                    .unwrap_or_else(|| "pole".to_owned()),
                num(&r.wkb_plus),
                num(&r.wkb_minus),
                r.k.to_f64(),
                r.l.to_f64(),
                r.psi_rel.to_f64(),
            ));
        }
        fs::write(path, w).with_context(|| format!("writing {path}"))?;
    }
    let doc = serde_json::json!({
        "problem": problem_json(&problem),
        "energy": big::dec_string(&energy),
        "order": order,
        "precision": precision,
        "rows": rows.iter().map(|r| serde_json::json!({
            "x": format!("{:.8}", r.x.to_f64()),
            "phi": r.phi.as_ref().map(|p| format!("{:.10e}", p.to_f64())),
            "pole_adjacent": r.pole_adjacent,
            "wkb_plus": r.wkb_plus.as_ref().map(|v| format!("{:.10e}", v.to_f64())),
            "wkb_minus": r.wkb_minus.as_ref().map(|v| format!("{:.10e}", v.to_f64())),
            "k": format!("{:.10e}", r.k.to_f64()),
            "l": format!("{:.10e}", r.l.to_f64()),
            "psi_rel": format!("{:.10e}", r.psi_rel.to_f64()),
        })).collect::<Vec<_>>(),
    });
    emit(&cfg, &doc)
}

fn cmd_check() -> Result<()> {
    use anharm_core::gauge::verify_gauge_invariance;
    use anharm_core::series::{
        coefficient_decay_kappa, compute_series, evaluate_series, InitialData,
    };
    let mut failures = 0usize;
    let mut report = |name: &str, ok: bool, detail: String| {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failures += 1;
        }
    };
    let digits = 40;
    let prec = bits_for_digits(digits);
    let quartic = validate_problem(
        parse_polynomial("x^2 + 0.1*x^4").unwrap(),
        Rational::from((1, 2)),
        Rational::from(1),
    )
    .unwrap();
    let harmonic = validate_problem(
        parse_polynomial("x^2").unwrap(),
        Rational::from((1, 2)),
        Rational::from(1),
    )
    .unwrap();

    // harmonic spectrum
    {
        let mut sc = SolveConfig::new(Float::with_val(prec, 9));
        sc.target_digits = 25;
        let mut worst = 0.0f64;
        let mut ok = true;
        for n in 0..=3usize {
            match solve_level(&harmonic, &sc, n) {
                Ok(r) => {
                    let err = (r.e_mid.clone() - Float::with_val(prec, 2 * n as u32 + 1))
                        .abs()
                        .to_f64();
                    worst = worst.max(err);
                    ok &= err < 1e-24;
                }
                Err(_) => ok = false,
            }
        }
        report(
            "harmonic spectrum E_n = 2n+1",
            ok,
            format!("worst error {worst:.2e}"),
        );
    }
    // gauge invariance of phi
    {
        let e = parse_real("1.3", prec).unwrap();
        let gauges = vec![
            GaugeFunction::zero(),
            GaugeFunction::linear(Float::with_val(prec, 1)),
            GaugeFunction::linear(Float::with_val(prec, 2)),
        ];
        let xs: Vec<BigReal> = [0.5, 1.0, 1.5]
            .iter()
            .map(|x| Float::with_val(prec, *x))
            .collect();
        let dev = verify_gauge_invariance(&quartic, &e, Parity::Even, &gauges, &xs, 240, digits)
            .map(|d| d.to_f64())
            .unwrap_or(f64::INFINITY);
        report(
            "gauge invariance of phi",
            dev < 1e-28,
            format!("max deviation {dev:.2e}"),
        );
    }
    // parity decoupling and evaluation bookkeeping
    {
        let e = parse_real("1.1", prec).unwrap();
        let g = GaugeFunction::linear(Float::with_val(prec, 0.8));
        let sol =
            compute_series(&quartic, &g, InitialData::even(prec), &e, 60, digits).unwrap();
        let parity_ok = (0..=60).all(|n| {
            if n % 2 == 1 {
                sol.kcoeffs[n].is_zero()
            } else {
                n == 0 || sol.lcoeffs[n].is_zero()
            }
        });
        report("parity decoupling of coefficients", parity_ok, String::new());
        let r = evaluate_series(&sol.kcoeffs, &Float::with_val(prec, 2));
        report(
            "evaluation bookkeeping",
            r.est_lost_digits >= 0.0 && r.max_term_log10.is_finite(),
            format!(
                "max_term_log10 {:.2}, est_lost {:.2}",
                r.max_term_log10, r.est_lost_digits
            ),
        );
    }
    // factorial decay
    {
        let e = parse_real("1.0652855095437177", prec).unwrap();
        let sol = compute_series(
            &quartic,
            &GaugeFunction::zero(),
            InitialData::even(prec),
            &e,
            400,
            50,
        )
        .unwrap();
        let kappa = coefficient_decay_kappa(&sol.kcoeffs).unwrap_or(f64::NAN);
        report(
            "coefficient decay (n!)^-1/(l+1)",
            (kappa - 1.0 / 3.0).abs() < 0.07,
            format!("kappa {kappa:.4} vs 1/3"),
        );
    }
    // bound ordering
    {
        let mut sc = SolveConfig::new(Float::with_val(prec, 6));
        sc.target_digits = 20;
        let ok = (0..3usize).all(|n| {
            solve_level(&quartic, &sc, n)
                .map(|r| r.e_lower <= r.e_mid && r.e_mid <= r.e_upper && r.nodes == n / 2)
                .unwrap_or(false)
        });
        report("eigenvalue bound ordering", ok, String::new());
    }
    if failures > 0 {
        bail!("{failures} invariant check(s) failed");
    }
    Ok(())
}
