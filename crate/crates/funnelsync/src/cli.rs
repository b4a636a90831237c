//! Command-line driver. Exit codes: 0 success, 2 numerical breach,
//! 3 input or validation error, 64 usage error.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use funnelsync_core::emergent::{epsilon_sweep, simulate_emergent, solve_h, EmergentError, EmergentMode, EmergentSpec};
use funnelsync_core::median::{
    build_median_scenario, median_emergent_fixed_point, median_epsilon_bound, weighted_median_set, MedianError,
    MedianSet,
};
use funnelsync_core::netsim::{integrate, validate_scenario, SampleBox, ScenarioReport};
use funnelsync_core::{CouplingSpec, FunnelSpec, Graph, HProblem, SimError};
use serde::Serialize;

use crate::output::{write_emergent_csv, write_sweep_csv, write_trajectory_csv, RunSummary};
use crate::scenario::ScenarioFile;

pub const EXIT_OK: i32 = 0;
pub const EXIT_BREACH: i32 = 2;
pub const EXIT_INVALID: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "funnelsync", version, about = "Simulate heterogeneous networks under node-wise funnel coupling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Direct,
    #[value(name = "two_dim")]
    TwoDim,
}

impl From<ModeArg> for EmergentMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Direct => EmergentMode::Direct,
            ModeArg::TwoDim => EmergentMode::TwoDim,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphArg {
    Path,
    Ring,
    Complete,
    Star,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CouplingArg {
    Classical,
    Log,
    #[value(name = "locally_linear")]
    LocallyLinear,
    #[value(name = "near_signum")]
    NearSignum,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the closed loop; writes trajectory.csv and summary.json.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Integrate the emergent dynamics from the mean initial state; writes emergent.csv.
    Emergent {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "direct")]
        mode: ModeArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rerun the scenario with funnels scaled by each eps and compare with the
    /// emergent trajectory; writes sweep.csv.
    Compare {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        #[arg(long, value_delimiter = ',', num_args = 1, required = true)]
        eps: Vec<f64>,
        #[arg(long, value_enum, default_value = "direct")]
        mode: ModeArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Distributed median of the given values; writes median.json and trajectory.csv.
    Median {
        #[arg(long, value_delimiter = ',', num_args = 1, required = true, allow_hyphen_values = true)]
        values: Vec<f64>,
        #[arg(long, value_enum, default_value = "path")]
        graph: GraphArg,
        #[arg(long, default_value_t = 0.2)]
        eps: f64,
        #[arg(long, default_value_t = 0.05)]
        eta: f64,
        #[arg(long, default_value_t = 0.5)]
        psi0: f64,
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        #[arg(long, default_value_t = 30.0)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-2)]
        dt: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve sum_i psi_i mu^-1(h - f_i) = 0 once and print h.
    Hsolve {
        #[arg(long, value_delimiter = ',', num_args = 1, required = true, allow_hyphen_values = true)]
        f: Vec<f64>,
        /// Defaults to all ones.
        #[arg(long, value_delimiter = ',', num_args = 1)]
        psi: Vec<f64>,
        #[arg(long, value_enum, default_value = "classical")]
        coupling: CouplingArg,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        #[arg(long, default_value_t = 1.0)]
        mf_bar: f64,
        #[arg(long, default_value_t = 0.2)]
        eps: f64,
        #[arg(long, default_value_t = 0.05)]
        eta: f64,
    },
    /// Check the standing assumptions; prints a JSON report.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 41)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Breach(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Breach(_) => EXIT_BREACH,
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(e.to_string())
}

/// Funnel breaches exit with 2, everything else is an input error.
fn sim_failure(e: SimError) -> CliError {
    match e {
        SimError::FunnelBreach(_) | SimError::FunnelDomainBreach { .. } => CliError::Breach(e.to_string()),
        e => invalid(e),
    }
}

/// Root-finding failures are numerical and exit with 2.
fn emergent_failure(e: EmergentError) -> CliError {
    match e {
        EmergentError::Simulation(e) => sim_failure(e),
        EmergentError::BracketFailure | EmergentError::StaleSolution { .. } | EmergentError::DegenerateDerivative => {
            CliError::Breach(e.to_string())
        }
        e => invalid(e),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
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
                    let _ = write!(stdout, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Simulate { scenario, out } => cmd_simulate(&scenario, &out, stderr),
        Command::Emergent { scenario, mode, out } => cmd_emergent(&scenario, mode.into(), &out),
        Command::Compare { scenario, tau, eps, mode, out } => cmd_compare(&scenario, tau, &eps, mode.into(), &out),
        Command::Median { values, graph, eps, eta, psi0, lambda, t_end, dt, out } => {
            cmd_median(&MedianArgs { values, graph, eps, eta, psi0, lambda, t_end, dt }, &out, stderr)
        }
        Command::Hsolve { f, psi, coupling, kappa, mf_bar, eps, eta } => {
            let c = match coupling {
                CouplingArg::Classical => CouplingSpec::Classical { kappa },
                CouplingArg::Log => CouplingSpec::Log,
                CouplingArg::LocallyLinear => CouplingSpec::LocallyLinear { mf_bar },
                CouplingArg::NearSignum => CouplingSpec::NearSignum { eps, eta },
            };
            let h = cmd_hsolve(&f, &psi, c)?;
            writeln!(stdout, "{h:?}").map_err(invalid)
        }
        Command::Validate { scenario, samples, out } => cmd_validate(&scenario, samples, out.as_deref(), stdout),
    }
}

fn create_out_dir(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::Invalid(format!("cannot create {}: {e}", out.display())))
}

fn create_file(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Invalid(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(invalid)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Invalid(format!("cannot write {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<funnelsync_core::Scenario, CliError> {
    ScenarioFile::load(path).and_then(|f| f.build()).map_err(invalid)
}

pub fn cmd_simulate(scenario: &Path, out: &Path, stderr: &mut dyn Write) -> Result<(), CliError> {
    let s = load(scenario)?;
    let report = validate_scenario(&s, 21, SampleBox::around_initial_states(&s, 10.0));
    for w in &report.warnings {
        let _ = writeln!(stderr, "warning: {w:?}");
    }
    create_out_dir(out)?;
    let (rec, summary, failure) = match integrate(&s) {
        Ok(rec) => {
            let summary = RunSummary::from_record(&rec);
            (rec, summary, None)
        }
        Err(SimError::FunnelBreach(b)) => {
            let summary = RunSummary::from_breach(&b);
            let msg = SimError::FunnelBreach(b.clone()).to_string();
            (b.partial, summary, Some(CliError::Breach(msg)))
        }
        Err(e) => return Err(sim_failure(e)),
    };
    write_trajectory_csv(create_file(&out.join("trajectory.csv"))?, &rec).map_err(invalid)?;
    write_json(&out.join("summary.json"), &summary)?;
    failure.map_or(Ok(()), Err)
}

#[derive(Serialize)]
struct EmergentSummary {
    mode: &'static str,
    xi0: f64,
    max_drift: Option<f64>,
}

pub fn cmd_emergent(scenario: &Path, mode: EmergentMode, out: &Path) -> Result<(), CliError> {
    let s = load(scenario)?;
    let spec = EmergentSpec::from_scenario(&s);
    let x0 = s.initial_states();
    let xi0 = x0.iter().sum::<f64>() / x0.len() as f64;
    let em = simulate_emergent(xi0, s.t0(), s.t_end(), s.dt(), mode, &spec).map_err(emergent_failure)?;
    create_out_dir(out)?;
    write_emergent_csv(create_file(&out.join("emergent.csv"))?, &em).map_err(invalid)?;
    let mode = match mode {
        EmergentMode::Direct => "direct",
        EmergentMode::TwoDim => "two_dim",
    };
    write_json(&out.join("emergent.json"), &EmergentSummary { mode, xi0, max_drift: em.max_drift })
}

pub fn cmd_compare(scenario: &Path, tau: f64, eps: &[f64], mode: EmergentMode, out: &Path) -> Result<(), CliError> {
    if eps.is_empty() {
        return Err(CliError::Usage("--eps needs at least one value".into()));
    }
    if let Some(e) = eps.iter().find(|e| !(**e > 0.0) || !e.is_finite()) {
        return Err(CliError::Usage(format!("eps values must be positive, got {e}")));
    }
    if !(tau >= 0.0) {
        return Err(CliError::Usage(format!("--tau must be nonnegative, got {tau}")));
    }
    let s = load(scenario)?;
    let rows = epsilon_sweep(&s, &s.funnels(), eps, tau, mode).map_err(emergent_failure)?;
    create_out_dir(out)?;
    write_sweep_csv(create_file(&out.join("sweep.csv"))?, &rows).map_err(invalid)
}

pub struct MedianArgs {
    pub values: Vec<f64>,
    pub graph: GraphArg,
    pub eps: f64,
    pub eta: f64,
    pub psi0: f64,
    pub lambda: f64,
    pub t_end: f64,
    pub dt: f64,
}

#[derive(Debug, Serialize)]
pub struct MedianReport {
    /// `[m]` for a point, `[a, b]` for an interval.
    pub median_set: Vec<f64>,
    pub h_star: f64,
    pub final_states: Vec<f64>,
    pub max_input: f64,
    pub bound_eta: f64,
    pub eps: f64,
    pub eps_max: f64,
    pub max_distance: f64,
}

fn median_invalid(e: MedianError) -> CliError {
    invalid(e)
}

pub fn cmd_median(args: &MedianArgs, out: &Path, stderr: &mut dyn Write) -> Result<(), CliError> {
    let values = &args.values;
    let n = values.len();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Invalid("values must be finite".into()));
    }
    let weights = vec![1.0; n];
    let median = weighted_median_set(values, &weights);
    let median_set = match median {
        MedianSet::Point(p) => vec![p],
        MedianSet::Interval(a, b) => vec![a, b],
    };
    let bound = median_epsilon_bound(&weights).map_err(median_invalid)?;
    let coupling = CouplingSpec::NearSignum { eps: args.eps, eta: args.eta };
    coupling.validate().map_err(invalid)?;
    let funnel = FunnelSpec::exp_to_eta(args.psi0, 0.0, args.lambda, 0.0).map_err(invalid)?;
    create_out_dir(out)?;
    let report = if n == 1 {
        // a lone agent runs ẋ = f* − x from x0 = 0
        if !(args.eps < bound.eps_max) {
            return Err(invalid(MedianError::EpsilonTooLarge { eps: args.eps, eps_max: bound.eps_max }));
        }
        let x_t = values[0] * -(-args.t_end).exp_m1();
        MedianReport {
            median_set,
            h_star: values[0],
            final_states: vec![x_t],
            max_input: 0.0,
            bound_eta: args.eta,
            eps: args.eps,
            eps_max: bound.eps_max,
            max_distance: median.distance(x_t),
        }
    } else {
        let graph = match args.graph {
            GraphArg::Path => Graph::path(n, 1.0),
            GraphArg::Ring => Graph::ring(n, 1.0),
            GraphArg::Complete => Graph::complete(n, 1.0),
            GraphArg::Star => Graph::star(n, 1.0),
        }
        .map_err(invalid)?;
        let s = build_median_scenario(values, graph, args.eps, args.eta, funnel, None, args.t_end, args.dt)
            .map_err(median_invalid)?;
        let h_star = median_emergent_fixed_point(values, &vec![coupling; n], &weights).map_err(median_invalid)?;
        let rec = match integrate(&s) {
            Ok(r) => r,
            Err(SimError::FunnelBreach(b)) => {
                write_trajectory_csv(create_file(&out.join("trajectory.csv"))?, &b.partial).map_err(invalid)?;
                return Err(sim_failure(SimError::FunnelBreach(b)));
            }
            Err(e) => return Err(sim_failure(e)),
        };
        write_trajectory_csv(create_file(&out.join("trajectory.csv"))?, &rec).map_err(invalid)?;
        let final_states = rec.final_state().unwrap_or(&[]).to_vec();
        let max_distance = final_states.iter().map(|x| median.distance(*x)).fold(0.0, f64::max);
        MedianReport {
            median_set,
            h_star,
            final_states,
            max_input: rec.summary.max_input,
            bound_eta: args.eta,
            eps: args.eps,
            eps_max: bound.eps_max,
            max_distance,
        }
    };
    let psi_t = args.psi0 * (-args.lambda * args.t_end).exp();
    if report.max_distance > args.eta + 10.0 * psi_t {
        let _ = writeln!(
            stderr,
            "warning: final states are {} from the median set; the horizon may be too short",
            report.max_distance
        );
    }
    write_json(&out.join("median.json"), &report)
}

pub fn cmd_hsolve(f: &[f64], psi: &[f64], coupling: CouplingSpec) -> Result<f64, CliError> {
    coupling.validate().map_err(invalid)?;
    let psi = if psi.is_empty() { vec![1.0; f.len()] } else { psi.to_vec() };
    let p = HProblem::new(f.to_vec(), psi, vec![coupling; f.len()]).map_err(invalid)?;
    solve_h(&p).map_err(emergent_failure)
}

#[derive(Serialize)]
struct AgentJson {
    affine_in_x: bool,
    globally_lipschitz: bool,
    lipschitz_estimate: f64,
    theta_f: f64,
    contraction: Option<f64>,
    complete_solutions: bool,
}

#[derive(Serialize)]
struct FunnelJson {
    psi_bar: f64,
    theta_psi: f64,
    r_psi: f64,
    lambda_psi: f64,
    lambda_psi_bound: f64,
    positive_and_bounded: bool,
    derivative_bounded: bool,
    ratio_bounded: bool,
    log_derivative_bounded: bool,
    violations: Vec<String>,
}

#[derive(Serialize)]
struct CouplingJson {
    gamma0: f64,
    odd: bool,
    strictly_increasing: bool,
    unbounded: bool,
    gamma_nondecreasing: bool,
    gamma_strictly_increasing: bool,
}

#[derive(Serialize)]
struct ValidationJson {
    standing_assumptions_hold: bool,
    gamma_assumption_holds: bool,
    lambda2: f64,
    disagreement_bound: f64,
    agents: Vec<AgentJson>,
    funnels: FunnelJson,
    couplings: Vec<CouplingJson>,
    warnings: Vec<String>,
}

fn validation_json(r: &ScenarioReport, s: &funnelsync_core::Scenario) -> ValidationJson {
    let f = &r.funnels;
    ValidationJson {
        standing_assumptions_hold: r.standing_assumptions_hold(),
        gamma_assumption_holds: r.couplings.gamma_assumption_holds(),
        lambda2: s.spectrum().lambda2(),
        disagreement_bound: 2.0 * s.spectrum().disagreement_bound(f.psi_bar),
        agents: r
            .agents
            .iter()
            .map(|a| AgentJson {
                affine_in_x: a.affine_in_x,
                globally_lipschitz: a.globally_lipschitz,
                lipschitz_estimate: a.lipschitz_estimate,
                theta_f: a.theta_f,
                contraction: a.contraction,
                complete_solutions: a.complete_solutions,
            })
            .collect(),
        funnels: FunnelJson {
            psi_bar: f.psi_bar,
            theta_psi: f.theta_psi,
            r_psi: f.r_psi,
            lambda_psi: f.lambda_psi,
            lambda_psi_bound: f.lambda_psi_bound,
            positive_and_bounded: f.positive_and_bounded,
            derivative_bounded: f.derivative_bounded,
            ratio_bounded: f.ratio_bounded,
            log_derivative_bounded: f.log_derivative_bounded,
            violations: f.violations.iter().map(|v| format!("{v:?}")).collect(),
        },
        couplings: r
            .couplings
            .couplings
            .iter()
            .map(|c| CouplingJson {
                gamma0: c.gamma0,
                odd: c.odd,
                strictly_increasing: c.strictly_increasing,
                unbounded: c.unbounded,
                gamma_nondecreasing: c.gamma_nondecreasing,
                gamma_strictly_increasing: c.gamma_strictly_increasing,
            })
            .collect(),
        warnings: r.warnings.iter().map(|w| format!("{w:?}")).collect(),
    }
}

pub fn cmd_validate(
    scenario: &Path,
    samples: usize,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let s = load(scenario)?;
    let report = validate_scenario(&s, samples, SampleBox::around_initial_states(&s, 10.0));
    let json = validation_json(&report, &s);
    match out {
        Some(path) => write_json(path, &json),
        None => {
            let text = serde_json::to_string_pretty(&json).map_err(invalid)?;
            writeln!(stdout, "{text}").map_err(invalid)
        }
    }
}
