//! Structured command reports: a single JSON document in `--json` mode,
//! aligned text otherwise. Exit codes are stable: 0 success, 2
//! parse/dimension error, 3 not target output controllable, 4 existence
//! condition failed, 5 numerical failure.

use serde::Serialize;
use target_control::synthesis::{AlgorithmStop, DesignMode, DesignResult};
use target_control::verify::VerificationReport;
use target_control::{Complex64, Error, RankReport, ToleranceConfig, TocVerdict};

use crate::files::matrix_to_rows;

#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Input(String),
    Core(Error),
}

impl std::error::Error for CliError {}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(msg) => write!(f, "parse error: {msg}"),
            CliError::Input(msg) => write!(f, "input error: {msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Input(_) => 2,
            CliError::Core(e) => match e {
                Error::NonFinite { .. }
                | Error::Dimension(_)
                | Error::InvalidTolerance(_)
                | Error::NotFullRowRank { .. }
                | Error::PoleConjugation(_)
                | Error::PoleCount { .. }
                | Error::MissingOutputMatrix => 2,
                Error::NeedsAugmentation { .. }
                | Error::ExistenceFailed { .. }
                | Error::UncontrollablePair { .. } => 4,
                Error::PlacementFailed(_)
                | Error::NumericalConsistency(_)
                | Error::Divergence { .. }
                | Error::Internal(_) => 5,
            },
        }
    }
}

/// Exit code for a typed algorithm stop.
pub fn stop_exit_code(stop: &AlgorithmStop) -> i32 {
    match stop {
        AlgorithmStop::NotTargetOutputControllable { .. } => 3,
        AlgorithmStop::ReducedPairUncontrollable { .. }
        | AlgorithmStop::AugmentedPairUncontrollable { .. } => 4,
    }
}

#[derive(Debug, Serialize)]
pub struct ChecksSection {
    pub state_controllable: bool,
    pub ctrb_rank: RankReport,
    pub target_output_controllable: TocVerdict,
    pub rank_f: RankReport,
    pub rank_f_ctrb: RankReport,
    pub pencil_condition_holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pencil_failing_shift: Option<Complex64>,
    pub row_space_invariant: bool,
    pub reduced_pair_controllable: bool,
}

#[derive(Debug, Serialize)]
pub struct DesignSection {
    pub mode: DesignMode,
    pub gain: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub augmentation: Option<Vec<Vec<f64>>>,
    pub requested_poles: Vec<Complex64>,
    pub achieved_subsystem_eigs: Vec<Complex64>,
    pub closed_loop_eigs: Vec<Complex64>,
    pub residual_spectrum: Vec<Complex64>,
    pub sylvester_residual: f64,
}

impl DesignSection {
    pub fn from_result(result: &DesignResult) -> Self {
        Self {
            mode: result.mode,
            gain: matrix_to_rows(&result.gain),
            augmentation: result.augmentation.as_ref().map(matrix_to_rows),
            requested_poles: result.requested_poles.poles().to_vec(),
            achieved_subsystem_eigs: result.achieved_subsystem_eigs.clone(),
            closed_loop_eigs: result.closed_loop_eigs.clone(),
            residual_spectrum: result.residual_spectrum.clone(),
            sylvester_residual: result.sylvester_residual,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct VerificationSection {
    pub spectrum_subset_ok: bool,
    pub sylvester_residual: f64,
    pub decay_ok: bool,
    pub final_target_norm: f64,
    pub residual_spectrum: Vec<Complex64>,
    pub all_ok: bool,
}

impl VerificationSection {
    pub fn from_report(report: &VerificationReport, tol: &ToleranceConfig) -> Self {
        let all_ok = report.spectrum_subset_ok
            && report.decay_ok
            && report.sylvester_residual < tol.residual_atol;
        Self {
            spectrum_subset_ok: report.spectrum_subset_ok,
            sylvester_residual: report.sylvester_residual,
            decay_ok: report.decay_ok,
            final_target_norm: report.final_target_norm,
            residual_spectrum: report.residual_spectrum.clone(),
            all_ok,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SimulationSection {
    pub t_final: f64,
    pub dt: f64,
    pub samples: usize,
    pub initial_target_norm: f64,
    pub final_target_norm: f64,
    pub decay_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv_path: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub tolerances: ToleranceConfig,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checks: Option<ChecksSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSection>,
    pub status: String,
    pub exit_code: i32,
}

impl Report {
    pub fn new(command: String, tolerances: ToleranceConfig) -> Self {
        Self {
            command,
            tolerances,
            notes: Vec::new(),
            checks: None,
            design: None,
            verification: None,
            simulation: None,
            status: "ok".into(),
            exit_code: 0,
        }
    }
}

fn yes_no(v: bool) -> &'static str {
    if v {
        "YES"
    } else {
        "NO"
    }
}

fn fmt_complex(z: &Complex64) -> String {
    if z.im.abs() < 1e-12 {
        format!("{:.6}", z.re)
    } else if z.im >= 0.0 {
        format!("{:.6}+{:.6}i", z.re, z.im)
    } else {
        format!("{:.6}-{:.6}i", z.re, -z.im)
    }
}

fn fmt_spectrum(eigs: &[Complex64]) -> String {
    if eigs.is_empty() {
        "(none)".into()
    } else {
        eigs.iter().map(fmt_complex).collect::<Vec<_>>().join(", ")
    }
}

fn fmt_matrix(rows: &[Vec<f64>], indent: &str) -> String {
    rows.iter()
        .map(|row| {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:>12.6}")).collect();
            format!("{indent}{}", cells.join(" "))
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Renders the human-readable view of a report.
pub fn print_human(report: &Report) {
    println!("command: targetctl {}", report.command);
    println!(
        "tolerances: rank_rtol={:e} eig_atol={:e} residual_atol={:e}",
        report.tolerances.rank_rtol, report.tolerances.eig_atol, report.tolerances.residual_atol
    );
    for note in &report.notes {
        println!("note: {note}");
    }
    if let Some(checks) = &report.checks {
        let toc = &checks.target_output_controllable;
        println!(
            "target output controllable: {} (rank F = {}, rank F*ctrb = {})",
            yes_no(toc.is_toc),
            toc.rank_f,
            toc.rank_fc
        );
        println!(
            "state controllable:         {} (ctrb rank {} of {})",
            yes_no(checks.state_controllable),
            checks.ctrb_rank.rank,
            checks.ctrb_rank.singular_values.len().max(checks.ctrb_rank.rank)
        );
        match checks.pencil_failing_shift {
            None => println!(
                "pencil necessary condition: {}",
                yes_no(checks.pencil_condition_holds)
            ),
            Some(s) => println!(
                "pencil necessary condition: {} (fails at s = {})",
                yes_no(checks.pencil_condition_holds),
                fmt_complex(&s)
            ),
        }
        println!(
            "row-space invariance:       {}",
            yes_no(checks.row_space_invariant)
        );
        println!(
            "reduced-pair controllable:  {}",
            yes_no(checks.reduced_pair_controllable)
        );
        println!(
            "singular values of F*ctrb: [{}]",
            checks
                .rank_f_ctrb
                .singular_values
                .iter()
                .map(|v| format!("{v:.3e}"))
                .collect::<Vec<_>>()
                .join(", ")
        );
    }
    if let Some(design) = &report.design {
        let mode = match design.mode {
            DesignMode::RPole => "reduced (one pole per target row)",
            DesignMode::N0Pole => "augmented",
            DesignMode::StaticOutput => "static output feedback",
        };
        println!("design mode: {mode}");
        println!("gain Z:\n{}", fmt_matrix(&design.gain, "    "));
        if let Some(aug) = &design.augmentation {
            println!("augmentation R:\n{}", fmt_matrix(aug, "    "));
        }
        println!("requested poles:        {}", fmt_spectrum(&design.requested_poles));
        println!(
            "subsystem eigenvalues:  {}",
            fmt_spectrum(&design.achieved_subsystem_eigs)
        );
        println!(
            "closed-loop eigenvalues: {}",
            fmt_spectrum(&design.closed_loop_eigs)
        );
        println!(
            "residual spectrum:      {}",
            fmt_spectrum(&design.residual_spectrum)
        );
        println!("coupling residual:      {:.3e}", design.sylvester_residual);
    }
    if let Some(verification) = &report.verification {
        println!(
            "spectrum subset check:  {}",
            yes_no(verification.spectrum_subset_ok)
        );
        println!(
            "coupling residual:      {:.3e}",
            verification.sylvester_residual
        );
        println!(
            "target decay:           {} (|F'x(t_final)| = {:.3e})",
            yes_no(verification.decay_ok),
            verification.final_target_norm
        );
        println!(
            "residual spectrum:      {}",
            fmt_spectrum(&verification.residual_spectrum)
        );
        println!("all checks:             {}", yes_no(verification.all_ok));
    }
    if let Some(sim) = &report.simulation {
        println!(
            "simulated {} samples over {}s (dt = {})",
            sim.samples, sim.t_final, sim.dt
        );
        println!(
            "|F'x(0)| = {:.6e}, |F'x(t_final)| = {:.6e}, decay: {}",
            sim.initial_target_norm,
            sim.final_target_norm,
            yes_no(sim.decay_ok)
        );
        if let Some(path) = &sim.csv_path {
            println!("trajectory written to {path}");
        }
    }
    println!("status: {}", report.status);
}
