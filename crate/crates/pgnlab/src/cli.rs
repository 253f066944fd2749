//! Command-line front end.
//!
//! One concern per subcommand: `trace`, `events`, `exponents`, and the
//! `verify` campaigns (`lemma`, `corollary`, `theorem`, `transference`,
//! `bounds`). Exit codes: 0 success / all checks pass, 1 a check failed,
//! 2 usage or input error. An optional `key = value` config file supplies
//! defaults; command-line flags win. `PGNLAB_OUT_DIR` relocates relative
//! output paths and nothing else.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::events::{front_facet_events, verify_event_relations, RelationMode};
use crate::exponents::{
    beta_alpha_direct, beta_alpha_from_psi, check_bounds, check_main_inequalities,
    check_transference, estimate_exponents, independence_of, trace_for_theta, write_trace_csv,
    DirectGrid, ExponentEstimates, IndependenceStatus, TraceRequest,
};
use crate::lattice::{dual_lattice, primal_lattice, PathSpec, ThetaSpec};
use crate::minima::{MinimaOptions, MinimaStrategy};
use crate::numbers::parse_real_spec;
use crate::rat::{fmt_sig, parse_rational, rat, rational_from_f64, Rational};
use crate::verify::run_lemma_campaign;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "pgnlab",
    about = "Exact successive minima of box flows, front-facet events and Diophantine exponents",
    version
)]
struct Cli {
    /// Config file with `key = value` lines (same keys as the long flags);
    /// explicit flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample the minima trace over a scale range and emit CSV
    Trace(ProblemArgs),
    /// Detect front-facet events over a scale range and emit CSV
    Events(ProblemArgs),
    /// Estimate the flow exponents and the derived Diophantine exponents
    Exponents(ExponentsArgs),
    /// Verification campaigns
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Subcommand, Debug)]
enum VerifyCmd {
    /// Randomized trials of the parallelepiped construction
    Lemma(LemmaArgs),
    /// Exact [1,2] ratio checks at detected events
    Corollary(CorollaryArgs),
    /// The two main inequalities on finite-range estimates
    Theorem(ExponentsArgs),
    /// Primal/dual exponent exchange identity
    Transference(ExponentsArgs),
    /// The trivial bounds chain on the estimates
    Bounds(ExponentsArgs),
}

#[derive(Args, Debug, Clone, Default)]
struct ProblemArgs {
    /// Theta component (repeatable): rat:p/q, cf:[a0;a1,(p1,...)], liouville:b,
    /// or a bare rational/decimal literal
    #[arg(long = "theta")]
    theta: Vec<String>,
    /// Number of components (consistency check against --theta count)
    #[arg(long)]
    n: Option<usize>,
    /// primal | dual
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    u_min: Option<String>,
    #[arg(long)]
    u_max: Option<String>,
    /// Alternative to --u-max: target s = c ln u
    #[arg(long)]
    s_max: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Number of minima per sample (default: the dimension)
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    faithfulness: Option<String>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    tail_fraction: Option<f64>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (default stdout); relative paths land in PGNLAB_OUT_DIR
    #[arg(long)]
    out: Option<PathBuf>,
    /// Add exact rational columns to CSV output
    #[arg(long)]
    exact: bool,
    /// Skip the squared-precision stability re-run
    #[arg(long)]
    skip_stability: bool,
}

#[derive(Args, Debug, Clone, Default)]
struct ExponentsArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Also run the direct estimator of the intermediate exponents
    #[arg(long)]
    direct: bool,
    #[arg(long)]
    direct_p: Option<usize>,
    #[arg(long)]
    direct_scan_max: Option<u64>,
    #[arg(long)]
    direct_depth: Option<usize>,
    /// Write the underlying trace CSV here as well
    #[arg(long)]
    trace_out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
struct LemmaArgs {
    #[arg(long)]
    trials: Option<usize>,
    /// Dimension (repeatable); default 2, 3, 4
    #[arg(long = "dim")]
    dims: Vec<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    entry_bound: Option<i64>,
    #[arg(long)]
    budget: Option<usize>,
    /// Directory for violation replay files
    #[arg(long)]
    replay_dir: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
struct CorollaryArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Verify the first N detected events
    #[arg(long)]
    events: Option<usize>,
}

/// Resolved run configuration shared by the theta-based subcommands.
#[derive(Clone, Debug)]
struct RunConfig {
    theta: ThetaSpec,
    theta_display: Vec<String>,
    mode: RelationMode,
    u_min: Rational,
    u_max: Rational,
    samples: usize,
    p_max: usize,
    faithfulness: Rational,
    tolerance: f64,
    tail_fraction: f64,
    budget: usize,
    out: Option<PathBuf>,
    exact: bool,
    stability: bool,
}

fn load_config(path: Option<&Path>) -> Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    let Some(path) = path else {
        return Ok(map);
    };
    let text = fs::read_to_string(path)?;
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config line without '=': {line:?}")))?;
        map.insert(
            key.trim().replace('-', "_").to_lowercase(),
            value.trim().to_string(),
        );
    }
    Ok(map)
}

fn cfg_get<'a>(cfg: &'a HashMap<String, String>, key: &str) -> Option<&'a str> {
    cfg.get(&key.replace('-', "_")).map(String::as_str)
}

impl ProblemArgs {
    fn resolve(&self, cfg: &HashMap<String, String>) -> Result<RunConfig> {
        let mut theta_strs = self.theta.clone();
        if theta_strs.is_empty() {
            if let Some(v) = cfg_get(cfg, "theta") {
                theta_strs = v.split_whitespace().map(str::to_string).collect();
            }
        }
        if theta_strs.is_empty() {
            return Err(Error::InvalidSpec("at least one --theta is required".into()));
        }
        let mut entries = Vec::new();
        for s in &theta_strs {
            let (spec, was_decimal) = parse_real_spec(s)?;
            if was_decimal {
                eprintln!(
                    "warning: {s:?} is taken as the exact rational of the literal; \
                     exponents of a rational value are degenerate"
                );
            }
            entries.push(spec);
        }
        let theta = ThetaSpec::column(entries)?;
        if let Some(n) = self.n.or_else(|| cfg_get(cfg, "n").and_then(|v| v.parse().ok())) {
            if n != theta.n {
                return Err(Error::InvalidSpec(format!(
                    "--n {n} does not match {} theta components",
                    theta.n
                )));
            }
        }
        let mode = match self
            .mode
            .clone()
            .or_else(|| cfg_get(cfg, "mode").map(str::to_string))
            .unwrap_or_else(|| "primal".into())
            .as_str()
        {
            "primal" => RelationMode::Primal,
            "dual" => RelationMode::Dual,
            other => {
                return Err(Error::InvalidSpec(format!(
                    "mode must be primal or dual, got {other:?}"
                )))
            }
        };
        let u_min = match self
            .u_min
            .as_deref()
            .or_else(|| cfg_get(cfg, "u-min"))
        {
            Some(s) => parse_rational(s)?,
            None => rat(3, 2),
        };
        let scale_c = match mode {
            RelationMode::Primal => theta.n as f64,
            RelationMode::Dual => 1.0,
        };
        let s_max = self
            .s_max
            .or_else(|| cfg_get(cfg, "s-max").and_then(|v| v.parse().ok()));
        let u_max = match self.u_max.as_deref().or_else(|| cfg_get(cfg, "u-max")) {
            Some(s) => parse_rational(s)?,
            None => match s_max {
                Some(s) => rational_from_f64((s / scale_c).exp(), 1_000_000),
                None => rat(1000, 1),
            },
        };
        if u_min <= Rational::from_integer(1.into()) || u_max <= u_min {
            return Err(Error::ScaleDomain);
        }
        let samples = self
            .samples
            .or_else(|| cfg_get(cfg, "samples").and_then(|v| v.parse().ok()))
            .unwrap_or(200);
        let p_max = self
            .p
            .or_else(|| cfg_get(cfg, "p").and_then(|v| v.parse().ok()))
            .unwrap_or(theta.d());
        let faithfulness = match self
            .faithfulness
            .as_deref()
            .or_else(|| cfg_get(cfg, "faithfulness"))
        {
            Some(s) => parse_rational(s)?,
            None => rat(1, 1_000_000_000_000i64),
        };
        let tolerance = self
            .tolerance
            .or_else(|| cfg_get(cfg, "tolerance").and_then(|v| v.parse().ok()))
            .unwrap_or(0.05);
        let tail_fraction = self
            .tail_fraction
            .or_else(|| cfg_get(cfg, "tail-fraction").and_then(|v| v.parse().ok()))
            .unwrap_or(0.8);
        let budget = self
            .budget
            .or_else(|| cfg_get(cfg, "budget").and_then(|v| v.parse().ok()))
            .unwrap_or(crate::enumerate::DEFAULT_BUDGET);
        let out = self
            .out
            .clone()
            .or_else(|| cfg_get(cfg, "out").map(PathBuf::from));
        Ok(RunConfig {
            theta_display: theta_strs,
            theta,
            mode,
            u_min,
            u_max,
            samples,
            p_max,
            faithfulness,
            tolerance,
            tail_fraction,
            budget,
            out: out.map(resolve_out_path),
            exact: self.exact || cfg_get(cfg, "exact").is_some_and(|v| v == "true"),
            stability: !(self.skip_stability
                || cfg_get(cfg, "skip-stability").is_some_and(|v| v == "true")),
        })
    }
}

fn resolve_out_path(p: PathBuf) -> PathBuf {
    if p.is_relative() {
        if let Ok(dir) = std::env::var("PGNLAB_OUT_DIR") {
            return Path::new(&dir).join(p);
        }
    }
    p
}

fn write_output(out: &Option<PathBuf>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, bytes)?;
            Ok(())
        }
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn trace_request(rc: &RunConfig) -> TraceRequest {
    TraceRequest {
        mode: rc.mode,
        u_min: rc.u_min.clone(),
        u_max: rc.u_max.clone(),
        samples: rc.samples,
        p_max: rc.p_max,
        faithfulness: rc.faithfulness.clone(),
        stability_check: rc.stability,
        budget: rc.budget,
    }
}

fn minima_opts(rc: &RunConfig) -> MinimaOptions {
    MinimaOptions {
        strategy: MinimaStrategy::BranchBound,
        budget: rc.budget,
    }
}

fn cmd_trace(rc: &RunConfig) -> Result<i32> {
    let out = trace_for_theta(&rc.theta, &trace_request(rc))?;
    let mut buf = Vec::new();
    write_trace_csv(&out.trace, &mut buf, rc.exact)?;
    write_output(&rc.out, &buf)?;
    Ok(EXIT_OK)
}

fn cmd_events(rc: &RunConfig) -> Result<i32> {
    let (lattice, path) = build_problem(rc)?;
    let events = front_facet_events(
        &lattice,
        &path,
        &rc.u_min,
        &rc.u_max,
        rc.samples,
        &minima_opts(rc),
    )?;
    let mut buf = String::new();
    if rc.exact {
        buf.push_str("u,s,lambda1,psi1,witness,u_q,u_rho\n");
    } else {
        buf.push_str("u,s,lambda1,psi1,witness\n");
    }
    for e in &events {
        let psi1 = e.lambda1.ln_f64() / e.s;
        let witness: Vec<String> = e.witness.coeffs.iter().map(|c| c.to_string()).collect();
        buf.push_str(&format!(
            "{},{},{},{},{}",
            fmt_sig(e.u.to_f64(), 15),
            fmt_sig(e.s, 15),
            fmt_sig(e.lambda1.to_f64(), 15),
            fmt_sig(psi1, 15),
            witness.join(" "),
        ));
        if rc.exact {
            buf.push_str(&format!(",{},{}", e.u.coeff(), e.u.radicand()));
        }
        buf.push('\n');
    }
    write_output(&rc.out, buf.as_bytes())?;
    Ok(EXIT_OK)
}

fn build_problem(rc: &RunConfig) -> Result<(crate::lattice::Lattice, PathSpec)> {
    // the same faithfulness policy the trace driver applies
    let required = crate::exponents::required_faithfulness(&rc.u_max, rc.theta.d());
    let f = if rc.faithfulness > required {
        required
    } else {
        rc.faithfulness.clone()
    };
    Ok(match rc.mode {
        RelationMode::Primal => (
            primal_lattice(&rc.theta, &f),
            PathSpec::primal(rc.theta.m, rc.theta.n),
        ),
        RelationMode::Dual => {
            if rc.theta.m != 1 {
                return Err(Error::InvalidSpec("dual flow needs m = 1".into()));
            }
            (dual_lattice(&rc.theta, &f), PathSpec::dual(rc.theta.n))
        }
    })
}

fn estimates_for(rc: &RunConfig) -> Result<ExponentEstimates> {
    let out = trace_for_theta(&rc.theta, &trace_request(rc))?;
    estimate_exponents(&out.trace, rc.tail_fraction)
}

fn cmd_exponents(args: &ExponentsArgs, cfg: &HashMap<String, String>) -> Result<i32> {
    let rc = args.problem.resolve(cfg)?;
    let traced = trace_for_theta(&rc.theta, &trace_request(&rc))?;
    if let Some(path) = &args.trace_out {
        let mut buf = Vec::new();
        write_trace_csv(&traced.trace, &mut buf, rc.exact)?;
        fs::write(resolve_out_path(path.clone()), buf)?;
    }
    let est = estimate_exponents(&traced.trace, rc.tail_fraction)?;
    let ba = beta_alpha_from_psi(&est, rc.theta.m, rc.theta.n);
    let indep = independence_of(&rc.theta);

    let mut buf = String::new();
    buf.push_str(&format!(
        "theta: {}  mode: {}  d: {}\n",
        rc.theta_display.join(" "),
        mode_name(rc.mode),
        rc.theta.d()
    ));
    buf.push_str(&format!(
        "faithfulness: {}  s_max: {}  tail window: [{}, {}]  tail samples: {}\n",
        fmt_sig(crate::rat::to_f64_approx(&traced.faithfulness), 12),
        fmt_sig(est.s_max, 12),
        fmt_sig(est.window_lo, 12),
        fmt_sig(est.s_max, 12),
        est.tail_samples,
    ));
    buf.push_str(&format!(
        "independence: {} (dim {}{})\n",
        match indep.status {
            IndependenceStatus::Verified => "verified",
            IndependenceStatus::Assumed => "assumed",
            IndependenceStatus::Failed => "failed",
        },
        indep.dim,
        if indep.exact { "" } else { ", presumed" }
    ));
    buf.push_str("p,psi_lower,psi_upper,beta,alpha\n");
    for (i, (beta, alpha)) in ba.iter().enumerate() {
        buf.push_str(&format!(
            "{},{},{},{},{}\n",
            i + 1,
            fmt_sig(est.psi_lower[i], 12),
            fmt_sig(est.psi_upper[i], 12),
            beta,
            alpha,
        ));
    }
    if let Some(ev) = est.event_psi1_lower {
        buf.push_str(&format!(
            "event-restricted psi_1 lower estimate: {}\n",
            fmt_sig(ev, 12)
        ));
    }
    if args.direct {
        let grid = DirectGrid {
            scan_max: args.direct_scan_max.unwrap_or(100_000),
            scan_points: 24,
            structured_depth: args.direct_depth.unwrap_or(40),
        };
        let p = args.direct_p.unwrap_or(1);
        let direct = beta_alpha_direct(&rc.theta, p, &grid, 0.5)?;
        buf.push_str(&format!(
            "direct (p={p}): beta {}  alpha {}\n",
            direct.beta, direct.alpha
        ));
    }
    write_output(&rc.out, buf.as_bytes())?;
    Ok(EXIT_OK)
}

fn mode_name(mode: RelationMode) -> &'static str {
    match mode {
        RelationMode::Primal => "primal",
        RelationMode::Dual => "dual",
    }
}

fn cmd_verify_lemma(args: &LemmaArgs, cfg: &HashMap<String, String>) -> Result<i32> {
    let trials = args
        .trials
        .or_else(|| cfg_get(cfg, "trials").and_then(|v| v.parse().ok()))
        .unwrap_or(1000);
    let dims = if args.dims.is_empty() {
        vec![2, 3, 4]
    } else {
        args.dims.clone()
    };
    let seed = args.seed.unwrap_or(1);
    let entry_bound = args.entry_bound.unwrap_or(5);
    let budget = args.budget.unwrap_or(crate::enumerate::DEFAULT_BUDGET);
    let replay_dir = args.replay_dir.clone().map(resolve_out_path);
    if let Some(dir) = &replay_dir {
        fs::create_dir_all(dir)?;
    }
    let summary = run_lemma_campaign(
        seed,
        &dims,
        trials,
        entry_bound,
        budget,
        replay_dir.as_deref(),
    )?;
    println!(
        "lemma-construction: {}/{} pass (dims {:?}, seed {seed})",
        summary.passes, summary.trials, dims
    );
    if summary.all_pass() {
        Ok(EXIT_OK)
    } else {
        for v in &summary.violations {
            eprintln!("lemma-construction VIOLATION: {v}");
        }
        for p in &summary.replay_paths {
            eprintln!("replay file: {}", p.display());
        }
        Ok(EXIT_CHECK_FAILED)
    }
}

fn cmd_verify_corollary(args: &CorollaryArgs, cfg: &HashMap<String, String>) -> Result<i32> {
    let rc = args.problem.resolve(cfg)?;
    let wanted = args
        .events
        .or_else(|| cfg_get(cfg, "events").and_then(|v| v.parse().ok()))
        .unwrap_or(30);
    let p = rc.p_max.min(rc.theta.d()).max(2);
    let (lattice, path) = build_problem(&rc)?;
    let opts = minima_opts(&rc);
    let events = front_facet_events(&lattice, &path, &rc.u_min, &rc.u_max, rc.samples, &opts)?;
    let mut checked = 0usize;
    let mut failures = 0usize;
    for ev in &events {
        if checked == wanted {
            break;
        }
        let report = match verify_event_relations(&lattice, &path, ev, p, rc.mode, &opts) {
            Ok(r) => r,
            Err(Error::ScaleDomain) => continue, // companion scale below the flow domain
            Err(e) => return Err(e),
        };
        checked += 1;
        let ok = report.pass();
        if !ok {
            failures += 1;
        }
        println!(
            "core-ratio event u={} s={}: ratios {} => {}",
            fmt_sig(report.s0.exp(), 12),
            fmt_sig(report.s0, 12),
            report
                .ratios
                .iter()
                .map(|r| fmt_sig(r.to_f64(), 12))
                .collect::<Vec<_>>()
                .join(" "),
            if ok { "pass" } else { "FAIL" }
        );
    }
    println!(
        "core-ratio: {}/{} events pass (p = {p})",
        checked - failures,
        checked
    );
    if checked < wanted {
        eprintln!(
            "core-ratio: only {checked} of the requested {wanted} events were verifiable in range"
        );
        return Ok(EXIT_CHECK_FAILED);
    }
    Ok(if failures == 0 { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn cmd_verify_theorem(args: &ExponentsArgs, cfg: &HashMap<String, String>) -> Result<i32> {
    let rc = args.problem.resolve(cfg)?;
    if rc.mode != RelationMode::Primal {
        return Err(Error::InvalidSpec("the theorem check runs in primal mode".into()));
    }
    let indep = independence_of(&rc.theta);
    if indep.status == IndependenceStatus::Failed {
        eprintln!(
            "dimension-condition: dim_Q span(1, theta) = {} < {}; the independence \
             hypothesis fails (first failing p = {})",
            indep.dim,
            rc.theta.n + 1,
            indep.dim + 1
        );
        return Ok(EXIT_USAGE);
    }
    let est = estimates_for(&rc)?;
    let report = check_main_inequalities(&est, rc.theta.n, rc.tolerance, indep);
    for row in &report.rows {
        println!(
            "p={}: main-inequality-1 lhs {} rhs {} => {}; main-inequality-2 lhs {} rhs {} => {}",
            row.p,
            fmt_sig(row.lhs1, 12),
            fmt_sig(row.rhs1, 12),
            if row.pass1 { "pass" } else { "FAIL" },
            fmt_sig(row.lhs2, 12),
            fmt_sig(row.rhs2, 12),
            if row.pass2 { "pass" } else { "FAIL" },
        );
    }
    println!(
        "theorem: {} (tolerance {}, independence {})",
        if report.pass() { "pass" } else { "FAIL" },
        fmt_sig(rc.tolerance, 12),
        match report.independence.status {
            IndependenceStatus::Verified => "verified",
            IndependenceStatus::Assumed => "assumed",
            IndependenceStatus::Failed => "failed",
        }
    );
    Ok(if report.pass() { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn cmd_verify_transference(args: &ExponentsArgs, cfg: &HashMap<String, String>) -> Result<i32> {
    let rc = args.problem.resolve(cfg)?;
    let mut primal_rc = rc.clone();
    primal_rc.mode = RelationMode::Primal;
    let mut dual_rc = rc.clone();
    dual_rc.mode = RelationMode::Dual;
    // matched s ranges: u_dual = u_primal^n for the same s
    if rc.theta.n > 1 {
        dual_rc.u_max = crate::rat::pow_i64(&rc.u_max, rc.theta.n as i64);
        dual_rc.u_min = crate::rat::pow_i64(&rc.u_min, rc.theta.n as i64);
    }
    let primal_est = estimates_for(&primal_rc)?;
    let dual_est = estimates_for(&dual_rc)?;
    let report = check_transference(&primal_est, &dual_est, rc.theta.n, rc.tolerance);
    for row in &report.rows {
        println!(
            "p={}: transference-identity defects {} / {} => {}",
            row.p,
            fmt_sig(row.lower_defect, 12),
            fmt_sig(row.upper_defect, 12),
            if row.pass { "pass" } else { "FAIL" }
        );
    }
    println!(
        "transference: {} (tolerance {})",
        if report.pass() { "pass" } else { "FAIL" },
        fmt_sig(rc.tolerance, 12)
    );
    Ok(if report.pass() { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn cmd_verify_bounds(args: &ExponentsArgs, cfg: &HashMap<String, String>) -> Result<i32> {
    let rc = args.problem.resolve(cfg)?;
    let est = estimates_for(&rc)?;
    // the dual flow is the (n, 1) problem: its chain tops out at n/1
    let (m_eff, n_eff) = match rc.mode {
        RelationMode::Primal => (rc.theta.m, rc.theta.n),
        RelationMode::Dual => (rc.theta.n, rc.theta.m),
    };
    let report = check_bounds(&est, m_eff, n_eff, rc.tolerance.min(0.02));
    for row in &report.rows {
        println!(
            "p={}: bounds-chain psi in [{}, {}] within [-1, {}] => {}",
            row.p,
            fmt_sig(row.psi_lower, 12),
            fmt_sig(row.psi_upper, 12),
            fmt_sig(report.hi_bound, 12),
            if row.pass { "pass" } else { "FAIL" }
        );
    }
    println!(
        "bounds: {} (tolerance {})",
        if report.pass() { "pass" } else { "FAIL" },
        fmt_sig(report.tolerance, 12)
    );
    Ok(if report.pass() { EXIT_OK } else { EXIT_CHECK_FAILED })
}

/// Parse argv, run one subcommand, and map outcomes onto exit codes.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            // clap handles --help/--version with success exits
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match load_config(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let outcome = match &cli.command {
        Command::Trace(args) => args.resolve(&cfg).and_then(|rc| cmd_trace(&rc)),
        Command::Events(args) => args.resolve(&cfg).and_then(|rc| cmd_events(&rc)),
        Command::Exponents(args) => cmd_exponents(args, &cfg),
        Command::Verify(VerifyCmd::Lemma(args)) => cmd_verify_lemma(args, &cfg),
        Command::Verify(VerifyCmd::Corollary(args)) => cmd_verify_corollary(args, &cfg),
        Command::Verify(VerifyCmd::Theorem(args)) => cmd_verify_theorem(args, &cfg),
        Command::Verify(VerifyCmd::Transference(args)) => cmd_verify_transference(args, &cfg),
        Command::Verify(VerifyCmd::Bounds(args)) => cmd_verify_bounds(args, &cfg),
    };
    match outcome {
        Ok(code) => code,
        Err(e @ (Error::InvalidSpec(_) | Error::Parse(_) | Error::ScaleDomain)) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CHECK_FAILED
        }
    }
}
