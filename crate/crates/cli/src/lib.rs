//! Command-line front end: argument definitions and command implementations.
//!
//! Every command returns a list of [`OutputRecord`]s plus an exit status so
//! the binary stays a thin wrapper and the commands can be tested in-process.

// NaN must fail these guards, so `!(x > y)` is deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod verify;

use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use linecross_core::crossprob::{
    alpha_beta_bounds, analytic_crossing, analytic_hitting, evaluation_point, parse_rat, phi, phi_asymptotic,
    phi_p0, phi_series_bias, psi, rat_to_f64, ProbDetail,
};
use linecross_core::exactcomb::{catalan_m, dp_count, first_passage_n};
use linecross_core::walksim::{estimate, rational_grid, sweep_alpha};
use linecross_core::{BiasSpec, CountKind, LineSpec, Rat, RootConfig, SimEstimate, StopRule, TrialKind};
use num_bigint::BigUint;
use serde_json::{json, Value};
use thiserror::Error;

pub use output::{Format, OutputRecord};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] linecross_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

/// Exit codes: 0 success, 1 failed check, 2 usage/domain error, 3
/// statistical comparison failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    CheckFailed,
    StatisticalMismatch,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::CheckFailed => 1,
            Status::StatisticalMismatch => 3,
        }
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub records: Vec<OutputRecord>,
    pub status: Status,
    /// Human-readable notes for stderr.
    pub notes: Vec<String>,
}

impl Outcome {
    fn ok(records: Vec<OutputRecord>) -> Self {
        Self { records, status: Status::Ok, notes: Vec::new() }
    }
}

#[derive(Debug, Parser)]
#[command(name = "linecross", version, about = "Line-crossing probabilities of biased monotone lattice walks")]
pub struct Cli {
    /// Output format: JSON lines or CSV with a header row.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Absolute root tolerance.
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub tol: f64,
    /// Worker threads for simulations (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Master seed for randomized commands: an integer or `auto`.
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// Flat key=value file supplying defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Weakly,
    Strictly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Root,
    Series,
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Identities,
    Convolutions,
    Roots,
    Asymptotics,
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact path counts to (n, pn+d) below the line y = px + d.
    Count {
        #[arg(long = "p")]
        p: u64,
        #[arg(long = "d", default_value_t = 0)]
        d: u64,
        #[arg(long)]
        n_max: usize,
        #[arg(long, value_enum, default_value_t = KindArg::Weakly)]
        kind: KindArg,
        /// Also compare each count with an independent route.
        #[arg(long)]
        check: bool,
    },
    /// Crossing (phi) and hitting (psi) probabilities for y = px + d.
    Prob {
        #[arg(long)]
        beta: String,
        #[arg(long = "p")]
        p: u64,
        #[arg(long = "d", default_value_t = 0)]
        d: u64,
        #[arg(long, value_enum, default_value_t = MethodArg::Root)]
        method: MethodArg,
        #[arg(long)]
        n_terms: Option<usize>,
    },
    /// Monte Carlo estimate of a crossing or hitting probability.
    Simulate {
        #[command(subcommand)]
        kind: SimKind,
    },
    /// Run invariant suites; exit 0 iff every check passes.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
    /// Crossing estimates over an evenly spaced grid of slopes.
    SweepAlpha {
        #[arg(long)]
        beta: String,
        #[arg(long)]
        lo: String,
        #[arg(long)]
        hi: String,
        #[arg(long)]
        steps: usize,
        #[arg(long = "d", default_value = "0")]
        d: String,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[command(flatten)]
        budget: BudgetArgs,
    },
}

#[derive(Debug, Subcommand)]
pub enum SimKind {
    Crossing(SimArgs),
    Hitting(SimArgs),
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[arg(long)]
    pub beta: String,
    /// Slope; rational for crossing, integer for hitting.
    #[arg(long)]
    pub alpha: String,
    #[arg(long = "d", default_value = "0")]
    pub d: String,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[command(flatten)]
    pub budget: BudgetArgs,
    /// Add the analytic value and a z-score (integer slopes only).
    #[arg(long)]
    pub compare_analytic: bool,
    /// Exit with status 3 when the z-score exceeds this.
    #[arg(long, default_value_t = 4.0)]
    pub sigma_threshold: f64,
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    /// Certified-failure threshold on the remaining success probability.
    #[arg(long, default_value_t = 1e-9)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_steps: u64,
    /// Hitting trials: unresolved once this far above the line.
    #[arg(long, default_value_t = 64)]
    pub max_excess: u64,
}

impl BudgetArgs {
    fn stop_rule(&self) -> StopRule {
        StopRule { epsilon: self.epsilon, max_steps: self.max_steps, max_excess: self.max_excess }
    }
}

/// Resolves `--seed`; randomized commands need one. Returns the seed and
/// whether it was chosen automatically.
pub fn resolve_seed(seed: Option<&str>) -> Result<(u64, bool), CliError> {
    match seed {
        None => Err(CliError::Usage("randomized commands need --seed <u64> or --seed auto".into())),
        Some("auto") => {
            let nanos = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_nanos());
            // splitmix64 finalizer over the clock
            let mut z = (nanos as u64) ^ ((nanos >> 64) as u64);
            z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            Ok((z ^ (z >> 31), true))
        }
        Some(s) => s
            .parse()
            .map(|v| (v, false))
            .map_err(|_| CliError::Usage(format!("invalid --seed {s:?}"))),
    }
}

fn parse_rational(name: &str, s: &str) -> Result<Rat, CliError> {
    parse_rat(s).ok_or_else(|| CliError::Usage(format!("--{name} {s:?} is not a decimal or fraction")))
}

fn root_cfg(tol: f64) -> Result<RootConfig<f64>, CliError> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(CliError::Usage(format!("--tol {tol} must lie in (0, 1)")));
    }
    Ok(RootConfig::with_tol(tol))
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = root_cfg(cli.tol)?;
    match &cli.command {
        Command::Count { p, d, n_max, kind, check } => cmd_count(*p, *d, *n_max, *kind, *check),
        Command::Prob { beta, p, d, method, n_terms } => cmd_prob(beta, *p, *d, *method, *n_terms, &cfg),
        Command::Simulate { kind } => cmd_simulate(kind, cli.seed.as_deref(), &cfg),
        Command::Verify { suite } => Ok(verify::cmd_verify(*suite)),
        Command::SweepAlpha { beta, lo, hi, steps, d, trials, budget } => {
            cmd_sweep_alpha(beta, lo, hi, *steps, d, *trials, budget, cli.seed.as_deref(), &cfg)
        }
    }
}

pub fn cmd_count(p: u64, d: u64, n_max: usize, kind: KindArg, check: bool) -> Result<Outcome, CliError> {
    let kind = match kind {
        KindArg::Weakly => CountKind::WeaklyBelow,
        KindArg::Strictly => CountKind::StrictlyBelow,
    };
    let table = dp_count(p, d, n_max, kind)?;
    let reference: Option<(&str, Vec<BigUint>)> = if !check {
        None
    } else {
        Some(match (kind, d) {
            (CountKind::WeaklyBelow, 0) => ("closed_form", (0..=n_max as u64).map(|n| catalan_m(p, n)).collect()),
            (CountKind::StrictlyBelow, 0) => ("first_passage_convolution", first_passage_n(p, n_max)),
            (CountKind::StrictlyBelow, _) => {
                ("weakly_below_d_minus_1", dp_count(p, d - 1, n_max, CountKind::WeaklyBelow)?.entries)
            }
            (CountKind::WeaklyBelow, _) => {
                let prev = dp_count(p, d - 1, n_max, CountKind::WeaklyBelow)?.entries;
                let s0 = dp_count(p, 0, n_max, CountKind::WeaklyBelow)?.entries;
                let conv = (0..=n_max).map(|n| (0..=n).map(|i| &prev[i] * &s0[n - i]).sum()).collect();
                ("convolution_s_d_minus_1_times_s_0", conv)
            }
        })
    };
    let mut all_pass = true;
    let records = table
        .entries
        .iter()
        .enumerate()
        .map(|(n, c)| {
            let mut result = json!({ "count": c.to_string() });
            if let Some((name, refs)) = &reference {
                let pass = refs[n] == *c;
                all_pass &= pass;
                result["check"] = json!({ "against": name, "pass": pass });
            }
            OutputRecord::new("count", json!({ "p": p, "d": d, "kind": kind.as_str(), "n": n }), result)
        })
        .collect();
    let mut out = Outcome::ok(records);
    if !all_pass {
        out.status = Status::CheckFailed;
        out.notes.push("count check failed".into());
    }
    Ok(out)
}

fn root_detail(detail: &ProbDetail<f64>) -> Value {
    match detail {
        ProbDetail::Root(r) => json!({
            "residual": output::num(r.residual),
            "iterations": r.iterations,
            "bracket_lo": output::num(r.bracket_lo),
            "bracket_hi": output::num(r.bracket_hi),
        }),
        ProbDetail::Terms(n) => json!({ "n_terms": n }),
        ProbDetail::Asymptotic { x1 } => json!({ "x1": output::num(*x1) }),
    }
}

pub fn cmd_prob(
    beta: &str,
    p: u64,
    d: u64,
    method: MethodArg,
    n_terms: Option<usize>,
    cfg: &RootConfig<f64>,
) -> Result<Outcome, CliError> {
    let bias = BiasSpec::parse(beta)?;
    let phi_res = match method {
        MethodArg::Root if p == 0 => phi_p0(bias.beta, d)?,
        MethodArg::Root => phi(bias.beta, p, d, cfg)?,
        MethodArg::Series => {
            let n = n_terms.ok_or_else(|| CliError::Usage("--method series requires --n-terms".into()))?;
            if n == 0 {
                return Err(CliError::Usage("--n-terms must be >= 1".into()));
            }
            phi_series_bias(&bias, p, d, n)?
        }
        MethodArg::Asymptotic => {
            if d != 0 {
                return Err(CliError::Usage("--method asymptotic is only defined for --d 0".into()));
            }
            phi_asymptotic(bias.beta, p)?
        }
    };
    let psi_res = psi(bias.beta, p, d, cfg)?;
    let mut params = json!({ "beta": beta, "p": p, "d": d, "method": phi_res.method.as_str() });
    if let Some(n) = n_terms {
        params["n_terms"] = json!(n);
    }
    let mut result = json!({
        "phi": output::num(phi_res.value),
        "phi_detail": root_detail(&phi_res.detail),
        "psi": output::num(psi_res.value),
        "psi_detail": root_detail(&psi_res.detail),
    });
    if p > 0 {
        result["x1"] = output::num(evaluation_point(bias.beta, p));
    }
    Ok(Outcome::ok(vec![OutputRecord::new("prob", params, result)]))
}

fn estimate_json(e: &SimEstimate) -> Value {
    json!({
        "trials": e.trials,
        "successes": e.successes,
        "certified_failures": e.certified_failures,
        "unresolved": e.unresolved,
        "p_hat": output::num(e.p_hat()),
        "p_low": output::num(e.p_low),
        "p_high": output::num(e.p_high),
        "ci_low": output::num(e.ci_low),
        "ci_high": output::num(e.ci_high),
        "sigma": output::num(e.sigma()),
        "max_certified_bound": output::num(e.max_certified_bound),
        "total_steps": e.total_steps,
    })
}

pub fn cmd_simulate(kind: &SimKind, seed: Option<&str>, cfg: &RootConfig<f64>) -> Result<Outcome, CliError> {
    let (args, name) = match kind {
        SimKind::Crossing(a) => (a, "crossing"),
        SimKind::Hitting(a) => (a, "hitting"),
    };
    if !(args.sigma_threshold > 0.0) {
        return Err(CliError::Usage("--sigma-threshold must be positive".into()));
    }
    let (seed, auto) = resolve_seed(seed)?;
    let bias = BiasSpec::parse(&args.beta)?;
    let line = LineSpec::new(parse_rational("alpha", &args.alpha)?, parse_rational("d", &args.d)?)?;
    let stop = args.budget.stop_rule();
    let trial_kind = match kind {
        SimKind::Crossing(_) => TrialKind::Crossing(line.clone()),
        SimKind::Hitting(_) => {
            let p = line
                .integer_slope()
                .ok_or_else(|| CliError::Usage("hitting needs an integer --alpha".into()))?;
            if !line.d.is_integer() {
                return Err(CliError::Usage("hitting needs an integer --d".into()));
            }
            let d = line.floor_intercept().ok_or_else(|| CliError::Usage("--d too large".into()))?;
            TrialKind::Hitting { p, d }
        }
    };
    let est = estimate(&bias, &trial_kind, args.trials, seed, &stop, cfg)?;
    let mut result = estimate_json(&est);
    let mut out = Outcome::ok(Vec::new());
    if auto {
        out.notes.push(format!("using auto seed {seed}"));
    }
    if args.compare_analytic {
        let analytic = match kind {
            SimKind::Crossing(_) => analytic_crossing(&bias, &line, cfg)?,
            SimKind::Hitting(_) => analytic_hitting(&bias, &line, cfg)?,
        };
        match analytic {
            Some(v) => {
                let z = est.z_score(v);
                result["analytic"] = output::num(v);
                result["z_score"] = output::num(z);
                if !(z <= args.sigma_threshold) {
                    out.status = Status::StatisticalMismatch;
                    out.notes.push(format!("z-score {z:.3} exceeds threshold {}", args.sigma_threshold));
                }
            }
            None => {
                result["analytic"] = Value::Null;
                out.notes.push("no analytic value for a fractional slope".into());
            }
        }
    }
    let params = json!({
        "kind": name,
        "beta": args.beta,
        "alpha": line.alpha.to_string(),
        "d": line.d.to_string(),
        "trials": args.trials,
        "epsilon": output::num(stop.epsilon),
        "max_steps": stop.max_steps,
        "max_excess": stop.max_excess,
    });
    out.records.push(OutputRecord::new("simulate", params, result).with_seed(seed));
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_sweep_alpha(
    beta: &str,
    lo: &str,
    hi: &str,
    steps: usize,
    d: &str,
    trials: u64,
    budget: &BudgetArgs,
    seed: Option<&str>,
    cfg: &RootConfig<f64>,
) -> Result<Outcome, CliError> {
    let lo_r = parse_rational("lo", lo)?;
    let hi_r = parse_rational("hi", hi)?;
    let d_r = parse_rational("d", d)?;
    let alphas = rational_grid(&lo_r, &hi_r, steps).map_err(|e| CliError::Usage(e.to_string()))?;
    let (seed, auto) = resolve_seed(seed)?;
    let bias = BiasSpec::parse(beta)?;
    let (br_lo, br_hi) = alpha_beta_bounds(&bias);
    let stop = budget.stop_rule();
    let estimates = sweep_alpha(&bias, &alphas, &d_r, trials, seed, &stop, cfg)?;
    let records = alphas
        .iter()
        .zip(&estimates)
        .map(|(alpha, e)| {
            let mut result = estimate_json(e);
            result["bracket_lo"] = json!(br_lo);
            result["bracket_hi"] = json!(br_hi);
            let params = json!({
                "beta": beta,
                "alpha": alpha.to_string(),
                "alpha_value": output::num(rat_to_f64(alpha)),
                "d": d_r.to_string(),
                "trials": trials,
            });
            OutputRecord::new("sweep-alpha", params, result).with_seed(seed)
        })
        .collect();
    let mut out = Outcome::ok(records);
    if auto {
        out.notes.push(format!("using auto seed {seed}"));
    }
    Ok(out)
}
