//! Command-line surface: dataset generation, factorization runs,
//! uniqueness reports, factor evaluation and the cone-projection utility.
//!
//! Every command reads one TOML config (section per command), applies
//! command-line overrides, writes its artifacts into the output directory
//! and records a manifest with the resolved config, seed, library version
//! and input digests. Outputs carry no timestamps: a rerun with the same
//! config reproduces every artifact byte for byte.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{ConfigError, RunConfig, SolverSection};
use crate::io::{
    file_digest, read_activation_matrix, read_source_matrix, read_stokes_table,
    write_activation_matrix, write_atomic, write_source_matrix, write_stokes_table, write_trace,
    IoError,
};
use crate::solver::{align_factors, solve_multi, QnmfFactors, SolverError};
use crate::stokes::{in_cone, project_cone, DEFAULT_TOL};
use crate::synth::{random_instance, SynthError};
use crate::uniqueness::{
    admissibility_report, check_necessary, check_separability, check_sufficient, Interval,
    TransformT, UniquenessError,
};

/// Errors surfaced by the command layer.
#[derive(Debug)]
pub enum HarnessError {
    Config(ConfigError),
    Io(IoError),
    Solver(SolverError),
    Uniqueness(UniquenessError),
    Synth(SynthError),
    /// The command's config section is missing.
    MissingSection {
        command: &'static str,
        section: &'static str,
    },
    /// Input data outside the cone without `--project-input`.
    InfeasibleInput { m: usize, n: usize },
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Config(e) => write!(f, "config: {e}"),
            HarnessError::Io(e) => write!(f, "{e}"),
            HarnessError::Solver(e) => write!(f, "solver: {e}"),
            HarnessError::Uniqueness(e) => write!(f, "uniqueness: {e}"),
            HarnessError::Synth(e) => write!(f, "generator: {e}"),
            HarnessError::MissingSection { command, section } => {
                write!(f, "'{command}' requires a [{section}] section in the config")
            }
            HarnessError::InfeasibleInput { m, n } => write!(
                f,
                "input entry (m={m}, n={n}) is not an admissible Stokes vector; \
                 pass --project-input to project it onto the cone"
            ),
        }
    }
}

impl std::error::Error for HarnessError {}

impl From<ConfigError> for HarnessError {
    fn from(e: ConfigError) -> Self {
        HarnessError::Config(e)
    }
}
impl From<IoError> for HarnessError {
    fn from(e: IoError) -> Self {
        HarnessError::Io(e)
    }
}
impl From<SolverError> for HarnessError {
    fn from(e: SolverError) -> Self {
        HarnessError::Solver(e)
    }
}
impl From<UniquenessError> for HarnessError {
    fn from(e: UniquenessError) -> Self {
        HarnessError::Uniqueness(e)
    }
}
impl From<SynthError> for HarnessError {
    fn from(e: SynthError) -> Self {
        HarnessError::Synth(e)
    }
}

// ---------------------------------------------------------------------------
// Argument parsing
// ---------------------------------------------------------------------------

/// Spectro-polarimetric factorization toolkit.
#[derive(Debug, Parser)]
#[command(name = "qnmf", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset plus ground-truth factors.
    Generate(CommonArgs),
    /// Factor a Stokes table with multi-restart alternating least squares.
    Factorize(CommonArgs),
    /// Admissible-transform intervals and uniqueness condition checks.
    Uniqueness(CommonArgs),
    /// Align estimated factors against ground truth and report errors.
    Evaluate(CommonArgs),
    /// Project every entry of a Stokes table onto the admissibility cone.
    Project(CommonArgs),
}

/// Options shared by every subcommand.
#[derive(Debug, Args, Default, Clone)]
pub struct CommonArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Override the seed (generation or solver, per command).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the factorization rank.
    #[arg(long)]
    pub rank: Option<usize>,
    /// Override the number of solver restarts.
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Override the solver iteration cap.
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Override the solver stopping threshold.
    #[arg(long)]
    pub stop_delta: Option<f64>,
    /// Override the ridge added to the normal matrices.
    #[arg(long)]
    pub ridge: Option<f64>,
    /// Project slightly infeasible input data onto the cone.
    #[arg(long)]
    pub project_input: bool,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Generate(_) => "generate",
        Command::Factorize(_) => "factorize",
        Command::Uniqueness(_) => "uniqueness",
        Command::Evaluate(_) => "evaluate",
        Command::Project(_) => "project",
    }
}

fn apply_overrides(config: &mut RunConfig, args: &CommonArgs, command: &'static str) {
    if let Some(seed) = args.seed {
        if command == "generate" {
            if let Some(g) = config.generate.as_mut() {
                g.seed = seed;
            }
        }
    }
    let wants_solver = args.rank.is_some()
        || args.restarts.is_some()
        || args.max_iters.is_some()
        || args.stop_delta.is_some()
        || args.ridge.is_some()
        || (command == "factorize" && args.seed.is_some());
    if wants_solver && config.solver.is_none() {
        if let Some(rank) = args.rank {
            config.solver = Some(SolverSection {
                rank,
                max_iters: 300,
                stop_delta: 1e-5,
                seed: 0,
                restarts: 1,
                gram_ridge: 0.0,
            });
        }
    }
    if let Some(s) = config.solver.as_mut() {
        if let Some(rank) = args.rank {
            s.rank = rank;
        }
        if let Some(restarts) = args.restarts {
            s.restarts = restarts;
        }
        if let Some(max_iters) = args.max_iters {
            s.max_iters = max_iters;
        }
        if let Some(stop_delta) = args.stop_delta {
            s.stop_delta = stop_delta;
        }
        if let Some(ridge) = args.ridge {
            s.gram_ridge = ridge;
        }
        if command == "factorize" {
            if let Some(seed) = args.seed {
                s.seed = seed;
            }
        }
    }
    if args.project_input {
        if let Some(fsec) = config.factorize.as_mut() {
            fsec.project_input = true;
        }
    }
    if let Some(out) = &args.out {
        config.out = Some(out.clone());
    }
}

/// Entry point used by the binary: load config, apply overrides, run.
/// Returns the paths of all written artifacts.
pub fn run(cli: Cli) -> Result<Vec<PathBuf>, HarnessError> {
    let name = command_name(&cli.command);
    let args = match &cli.command {
        Command::Generate(a)
        | Command::Factorize(a)
        | Command::Uniqueness(a)
        | Command::Evaluate(a)
        | Command::Project(a) => a.clone(),
    };
    let mut config = RunConfig::load(&args.config)?;
    apply_overrides(&mut config, &args, name);
    config.validate()?;
    let out_dir = config
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("qnmf-out"));
    match cli.command {
        Command::Generate(_) => cmd_generate(&config, &out_dir),
        Command::Factorize(_) => cmd_factorize(&config, &out_dir),
        Command::Uniqueness(_) => cmd_uniqueness(&config, &out_dir),
        Command::Evaluate(_) => cmd_evaluate(&config, &out_dir),
        Command::Project(_) => cmd_project(&config, &out_dir),
    }
}

/// Parse the given argv (for tests and examples) and run.
pub fn run_from_args<I, S>(argv: I) -> Result<Vec<PathBuf>, HarnessError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::parse_from(argv);
    run(cli)
}

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct Manifest {
    command: String,
    library_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    inputs: BTreeMap<String, String>,
    config: toml::Value,
}

fn write_manifest(
    out_dir: &Path,
    command: &str,
    seed: Option<u64>,
    config: &RunConfig,
    inputs: &[&Path],
) -> Result<PathBuf, HarnessError> {
    let mut digests = BTreeMap::new();
    for path in inputs {
        digests.insert(
            path.display().to_string(),
            format!("sha256:{}", file_digest(path)?),
        );
    }
    let manifest = Manifest {
        command: command.to_string(),
        library_version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        inputs: digests,
        config: toml::Value::try_from(config).expect("config serializes"),
    };
    let path = out_dir.join("manifest.toml");
    write_atomic(
        &path,
        &toml::to_string_pretty(&manifest).expect("manifest serializes"),
    )?;
    Ok(path)
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

/// Generate a dataset from the `[generate]` section: `X.csv` plus the
/// ground-truth `W_truth.csv` / `H_truth.csv` and a manifest.
pub fn cmd_generate(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let section = config
        .generate
        .as_ref()
        .ok_or(HarnessError::MissingSection {
            command: "generate",
            section: "generate",
        })?;
    let instance = random_instance(&section.instance_params(), section.seed)?;

    let x_path = out_dir.join("X.csv");
    let w_path = out_dir.join("W_truth.csv");
    let h_path = out_dir.join("H_truth.csv");
    write_stokes_table(&x_path, &instance.x)?;
    write_source_matrix(&w_path, &instance.w)?;
    write_activation_matrix(&h_path, &instance.h)?;
    let manifest = write_manifest(out_dir, "generate", Some(section.seed), config, &[])?;
    Ok(vec![x_path, w_path, h_path, manifest])
}

// ---------------------------------------------------------------------------
// factorize
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct RestartSummary {
    seed: u64,
    final_eps: f64,
    iterations: usize,
    converged: bool,
}

#[derive(Debug, Serialize)]
struct FailedRestart {
    seed: u64,
    error: String,
}

#[derive(Debug, Serialize)]
struct FactorizeReport {
    selected_seed: u64,
    final_eps: f64,
    iterations: usize,
    converged: bool,
    mean_iterations: f64,
    zero_activation_rows: Vec<usize>,
    restarts: Vec<RestartSummary>,
    failed_restarts: Vec<FailedRestart>,
}

/// Factor the Stokes table named in `[factorize]` using `[solver]`:
/// writes the selected estimate, its residual trace, a per-restart report
/// and a manifest.
pub fn cmd_factorize(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let fsec = config
        .factorize
        .as_ref()
        .ok_or(HarnessError::MissingSection {
            command: "factorize",
            section: "factorize",
        })?;
    let ssec = config.solver.as_ref().ok_or(HarnessError::MissingSection {
        command: "factorize",
        section: "solver",
    })?;

    let mut x = read_stokes_table(&fsec.input)?;
    let infeasible = (0..x.rows())
        .flat_map(|m| (0..x.cols()).map(move |n| (m, n)))
        .find(|&(m, n)| !in_cone(x[(m, n)], DEFAULT_TOL));
    if let Some((m, n)) = infeasible {
        if fsec.project_input {
            x = x.map(project_cone);
        } else {
            return Err(HarnessError::InfeasibleInput { m, n });
        }
    }

    let multi = solve_multi(&x, &ssec.solver_config())?;
    let best = multi.best();

    let w_path = out_dir.join("W_est.csv");
    let h_path = out_dir.join("H_est.csv");
    let trace_path = out_dir.join("trace.csv");
    write_source_matrix(&w_path, &best.factors.w)?;
    write_activation_matrix(&h_path, &best.factors.h)?;
    write_trace(&trace_path, &best.residual_trace)?;

    let mean_iterations = multi
        .reports
        .iter()
        .map(|r| r.iterations as f64)
        .sum::<f64>()
        / multi.reports.len() as f64;
    let report = FactorizeReport {
        selected_seed: best.seed,
        final_eps: best.final_residual(),
        iterations: best.iterations,
        converged: best.converged,
        mean_iterations,
        zero_activation_rows: best.zero_activation_rows.clone(),
        restarts: multi
            .reports
            .iter()
            .map(|r| RestartSummary {
                seed: r.seed,
                final_eps: r.final_residual(),
                iterations: r.iterations,
                converged: r.converged,
            })
            .collect(),
        failed_restarts: multi
            .failures
            .iter()
            .map(|(seed, error)| FailedRestart {
                seed: *seed,
                error: error.clone(),
            })
            .collect(),
    };
    let report_path = out_dir.join("report.toml");
    write_atomic(
        &report_path,
        &toml::to_string_pretty(&report).expect("report serializes"),
    )?;
    let manifest = write_manifest(
        out_dir,
        "factorize",
        Some(ssec.seed),
        config,
        &[&fsec.input],
    )?;
    Ok(vec![w_path, h_path, trace_path, report_path, manifest])
}

// ---------------------------------------------------------------------------
// uniqueness
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct IntervalOut {
    lo: f64,
    hi: f64,
    lo_closed: bool,
    hi_closed: bool,
}

impl From<Interval> for IntervalOut {
    fn from(iv: Interval) -> Self {
        IntervalOut {
            lo: iv.lo,
            hi: iv.hi,
            lo_closed: iv.lo_closed,
            hi_closed: iv.hi_closed,
        }
    }
}

#[derive(Debug, Serialize)]
struct SufficientOut {
    holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    polarization_witness: Option<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    activation_witness: Option<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    collapsed_witness: Option<usize>,
    readings_disagree: bool,
}

#[derive(Debug, Serialize)]
struct NecessaryOut {
    #[serde(skip_serializing_if = "Option::is_none")]
    holds: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    violation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

#[derive(Debug, Serialize)]
struct SeparabilityOut {
    source_side: bool,
    activation_side: bool,
    both: bool,
}

#[derive(Debug, Serialize)]
struct IntervalsOut {
    unique: bool,
    excluded_components: usize,
    pol_alpha_lo: Vec<f64>,
    pol_alpha_hi: Vec<f64>,
    pol_beta_lo: Vec<f64>,
    pol_beta_hi: Vec<f64>,
    nmf_alpha: IntervalOut,
    nmf_beta: IntervalOut,
    qnmf_alpha: IntervalOut,
    qnmf_beta: IntervalOut,
}

#[derive(Debug, Serialize)]
struct UniquenessReportOut {
    rank: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    intervals_note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    intervals: Option<IntervalsOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sufficient: Option<SufficientOut>,
    necessary: NecessaryOut,
    separability: SeparabilityOut,
}

/// Run the uniqueness analysis on a factor pair from disk. Rank 2 gets
/// the full interval analysis (optionally with transformed-source
/// envelope tables at the interval endpoints); other ranks get the
/// condition checks with an explanatory note.
pub fn cmd_uniqueness(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let section = config
        .uniqueness
        .as_ref()
        .ok_or(HarnessError::MissingSection {
            command: "uniqueness",
            section: "uniqueness",
        })?;
    let w = read_source_matrix(&section.w)?;
    let h = read_activation_matrix(&section.h)?;
    if w.cols() != h.rows() {
        return Err(UniquenessError::ShapeMismatch {
            w: w.shape(),
            h: h.shape(),
        }
        .into());
    }
    let rank = w.cols();
    let mut written = Vec::new();

    let necessary = match check_necessary(&w, &h) {
        Ok(v) => NecessaryOut {
            holds: Some(v.holds),
            violation: v.violation.map(|(p, q, c)| format!("({p}, {q}): {c:?}")),
            note: None,
        },
        Err(e) => NecessaryOut {
            holds: None,
            violation: None,
            note: Some(format!("not applicable: {e}")),
        },
    };
    let separability = check_separability(&w, &h);

    let (intervals, intervals_note, sufficient) = if rank == 2 {
        let report = admissibility_report(&w, &h)?;
        let verdict = check_sufficient(&w, &h)?;
        if section.emit_envelopes {
            let endpoints = [
                ("envelope_alpha_min.csv", report.qnmf_alpha.lo, true),
                ("envelope_alpha_max.csv", report.qnmf_alpha.hi, true),
                ("envelope_beta_min.csv", report.qnmf_beta.lo, false),
                ("envelope_beta_max.csv", report.qnmf_beta.hi, false),
            ];
            for (name, value, is_alpha) in endpoints {
                if !value.is_finite() {
                    continue;
                }
                let t = if is_alpha {
                    TransformT::new(value, 0.0)
                } else {
                    TransformT::new(0.0, value)
                };
                let (wt, _ht) = t.apply(&w, &h)?;
                let path = out_dir.join(name);
                write_source_matrix(&path, &wt)?;
                written.push(path);
            }
        }
        let intervals = IntervalsOut {
            unique: report.unique,
            excluded_components: report.excluded_components,
            pol_alpha_lo: report.pol_alpha_rows.iter().map(|iv| iv.lo).collect(),
            pol_alpha_hi: report.pol_alpha_rows.iter().map(|iv| iv.hi).collect(),
            pol_beta_lo: report.pol_beta_rows.iter().map(|iv| iv.lo).collect(),
            pol_beta_hi: report.pol_beta_rows.iter().map(|iv| iv.hi).collect(),
            nmf_alpha: report.nmf_alpha.into(),
            nmf_beta: report.nmf_beta.into(),
            qnmf_alpha: report.qnmf_alpha.into(),
            qnmf_beta: report.qnmf_beta.into(),
        };
        let sufficient = SufficientOut {
            holds: verdict.holds,
            polarization_witness: verdict.polarization_witness,
            activation_witness: verdict.activation_witness,
            collapsed_witness: verdict.collapsed_witness,
            readings_disagree: verdict.readings_disagree,
        };
        (Some(intervals), None, Some(sufficient))
    } else {
        (
            None,
            Some(format!(
                "interval analysis covers exactly 2 sources; this pair has rank {rank}, \
                 so only the condition checks are reported"
            )),
            None,
        )
    };

    let report = UniquenessReportOut {
        rank,
        intervals_note,
        intervals,
        sufficient,
        necessary,
        separability: SeparabilityOut {
            source_side: separability.source_side,
            activation_side: separability.activation_side,
            both: separability.both,
        },
    };
    let report_path = out_dir.join("uniqueness.toml");
    write_atomic(
        &report_path,
        &toml::to_string_pretty(&report).expect("report serializes"),
    )?;
    written.push(report_path);
    let manifest = write_manifest(
        out_dir,
        "uniqueness",
        None,
        config,
        &[&section.w, &section.h],
    )?;
    written.push(manifest);
    Ok(written)
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct MetricsOut {
    eps_w: f64,
    eps_h: f64,
    permutation: Vec<usize>,
    scales: Vec<f64>,
}

/// Align estimated factors against ground truth and write the relative
/// factor errors together with the resolved permutation and scales.
pub fn cmd_evaluate(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let section = config
        .evaluate
        .as_ref()
        .ok_or(HarnessError::MissingSection {
            command: "evaluate",
            section: "evaluate",
        })?;
    let est = QnmfFactors::new(
        read_source_matrix(&section.est_w)?,
        read_activation_matrix(&section.est_h)?,
    )?;
    let truth = QnmfFactors::new(
        read_source_matrix(&section.truth_w)?,
        read_activation_matrix(&section.truth_h)?,
    )?;
    let alignment = align_factors(&est, &truth)?;
    let metrics = MetricsOut {
        eps_w: alignment.eps_w,
        eps_h: alignment.eps_h,
        permutation: alignment.permutation.clone(),
        scales: alignment.scales.clone(),
    };
    let metrics_path = out_dir.join("metrics.toml");
    write_atomic(
        &metrics_path,
        &toml::to_string_pretty(&metrics).expect("metrics serialize"),
    )?;
    let manifest = write_manifest(
        out_dir,
        "evaluate",
        None,
        config,
        &[
            &section.est_w,
            &section.est_h,
            &section.truth_w,
            &section.truth_h,
        ],
    )?;
    Ok(vec![metrics_path, manifest])
}

// ---------------------------------------------------------------------------
// project
// ---------------------------------------------------------------------------

/// Project every entry of a Stokes table onto the admissibility cone and
/// write the result as `projected.csv`.
pub fn cmd_project(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let section = config.project.as_ref().ok_or(HarnessError::MissingSection {
        command: "project",
        section: "project",
    })?;
    let x = read_stokes_table(&section.input)?;
    let projected = x.map(project_cone);
    let out_path = out_dir.join("projected.csv");
    write_stokes_table(&out_path, &projected)?;
    let manifest = write_manifest(out_dir, "project", None, config, &[&section.input])?;
    Ok(vec![out_path, manifest])
}
