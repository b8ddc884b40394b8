//! `targetctl`: check target output controllability, synthesize target
//! output controllers, verify gains and simulate the closed loop.

mod files;
mod report;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use target_control::analysis::{
    is_reduced_pair_controllable, is_row_space_invariant, is_target_output_controllable,
    pencil_necessary_condition, LinearSystem, TargetMap,
};
use target_control::matops::{controllability_matrix, rank};
use target_control::synthesis::{
    default_extra_poles, design_augmented_feedback, design_static_output_feedback,
    run_design_algorithm, AlgorithmOutcome, DesignMode, DesignResult, PoleSet,
};
use target_control::verify::{simulate_closed_loop, verify_design, write_trajectory_csv};
use target_control::{DMatrix, DVector, ToleranceConfig};

use files::{
    matrix_from_rows, matrix_to_rows, parse_pole_list, parse_vector, DesignFile, PoleEntry,
    SystemFile,
};
use report::{
    print_human, stop_exit_code, ChecksSection, CliError, DesignSection, Report,
    SimulationSection, VerificationSection,
};

#[derive(Parser)]
#[command(
    name = "targetctl",
    about = "Target output controllability analysis and controller synthesis",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Emit the report as a single JSON document.
    #[arg(long, global = true)]
    json: bool,
    /// Relative threshold for singular-value rank decisions.
    #[arg(long, global = true, default_value_t = 1e-9)]
    rank_rtol: f64,
    /// Absolute tolerance when matching eigenvalues.
    #[arg(long, global = true, default_value_t = 1e-6)]
    eig_atol: f64,
    /// Absolute tolerance on matrix residuals.
    #[arg(long, global = true, default_value_t = 1e-8)]
    residual_atol: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Run every controllability and existence check on a system file.
    Check {
        /// System description (TOML with keys A, B and optional C, F, R).
        system: PathBuf,
    },
    /// Synthesize a target output controller with the design algorithm.
    Design {
        system: PathBuf,
        /// Requested poles, e.g. "-2,-3" or "-1+2i,-1-2i".
        #[arg(long, allow_hyphen_values = true)]
        poles: String,
        /// Seed for the randomized steps of pole placement.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the resulting design file here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify a design file (possibly hand-entered) against a system.
    Verify {
        system: PathBuf,
        design: PathBuf,
    },
    /// Integrate the closed loop and export the trajectory as CSV.
    Simulate {
        system: PathBuf,
        design: PathBuf,
        /// Initial state, comma-separated; defaults to all ones.
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<String>,
        #[arg(long, default_value_t = 10.0)]
        tfinal: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Trajectory CSV output path.
        #[arg(long)]
        out: PathBuf,
    },
}

struct LoadedSystem {
    sys: LinearSystem,
    f: TargetMap,
    /// Caller-provided augmentation rows from the system file, if any.
    r: Option<DMatrix<f64>>,
    /// True when no F was given and the output matrix stands in for it.
    f_defaulted_to_c: bool,
    notes: Vec<String>,
}

fn load_system(path: &Path, tol: &ToleranceConfig) -> Result<LoadedSystem, CliError> {
    let file = SystemFile::load(path)?;
    let a = matrix_from_rows("A", &file.a)?;
    let b = matrix_from_rows("B", &file.b)?;
    let c = file.c.as_deref().map(|rows| matrix_from_rows("C", rows)).transpose()?;
    let mut notes = Vec::new();
    let mut f_defaulted_to_c = false;
    let f_mat = match (&file.f, &c) {
        (Some(rows), _) => matrix_from_rows("F", rows)?,
        (None, Some(c_mat)) => {
            notes.push("F not given; defaulting to F = C".into());
            f_defaulted_to_c = true;
            c_mat.clone()
        }
        (None, None) => {
            return Err(CliError::Input(
                "the system file defines neither F nor C; nothing to control".into(),
            ))
        }
    };
    let sys = match c {
        Some(c_mat) => LinearSystem::with_output(a, b, c_mat, tol)?,
        None => LinearSystem::new(a, b)?,
    };
    let f = TargetMap::new(f_mat, tol)?;
    let r = file.r.as_deref().map(|rows| matrix_from_rows("R", rows)).transpose()?;
    Ok(LoadedSystem {
        sys,
        f,
        r,
        f_defaulted_to_c,
        notes,
    })
}

fn stacked_target(f: &TargetMap, r: Option<&DMatrix<f64>>) -> DMatrix<f64> {
    match r {
        Some(r_mat) if r_mat.nrows() > 0 => {
            let mut out = DMatrix::zeros(f.target_dim() + r_mat.nrows(), f.matrix().ncols());
            out.view_mut((0, 0), (f.target_dim(), f.matrix().ncols()))
                .copy_from(f.matrix());
            out.view_mut(
                (f.target_dim(), 0),
                (r_mat.nrows(), f.matrix().ncols()),
            )
            .copy_from(r_mat);
            out
        }
        _ => f.matrix().clone(),
    }
}

fn cmd_check(system: &Path, tol: &ToleranceConfig, mut report: Report) -> Result<Report, CliError> {
    let loaded = load_system(system, tol)?;
    report.notes.extend(loaded.notes);
    let sys = &loaded.sys;
    let f = &loaded.f;

    let ctrb = controllability_matrix(sys.a(), sys.b())?;
    let ctrb_rank = rank(&ctrb, tol)?;
    let state_controllable = ctrb_rank.rank == sys.state_dim();
    let verdict = is_target_output_controllable(sys, f, tol)?;
    let rank_f = rank(f.matrix(), tol)?;
    let rank_f_ctrb = rank(&(f.matrix() * &ctrb), tol)?;
    let (pencil_holds, pencil_failing) = pencil_necessary_condition(sys, f, tol)?;
    let row_space_invariant = is_row_space_invariant(sys, f, tol)?;
    let reduced_pair_controllable = is_reduced_pair_controllable(sys, f, tol)?;
    if !row_space_invariant {
        report.notes.push(
            "without row-space invariance the reduced-pair test (Moore-Penrose inverse) \
             is not equivalent to the pencil condition"
                .into(),
        );
    }

    let is_toc = verdict.is_toc;
    report.checks = Some(ChecksSection {
        state_controllable,
        ctrb_rank,
        target_output_controllable: verdict,
        rank_f,
        rank_f_ctrb,
        pencil_condition_holds: pencil_holds,
        pencil_failing_shift: pencil_failing,
        row_space_invariant,
        reduced_pair_controllable,
    });
    if !is_toc {
        report.status = "not target output controllable".into();
        report.exit_code = 3;
    }
    Ok(report)
}

fn cmd_design(
    system: &Path,
    poles: &str,
    seed: u64,
    out: Option<&Path>,
    tol: &ToleranceConfig,
    mut report: Report,
) -> Result<Report, CliError> {
    let loaded = load_system(system, tol)?;
    report.notes.extend(loaded.notes);
    let poles = PoleSet::new(parse_pole_list(poles)?, tol)?;

    let mut static_output_attempted = false;
    let design: DesignResult = match &loaded.r {
        Some(r_mat) => {
            report
                .notes
                .push("using the augmentation R provided in the system file".into());
            design_augmented_feedback(&loaded.sys, &loaded.f, r_mat, &poles, tol, seed)?
        }
        None => {
            // With F = C the static output feedback law u = -Z y applies
            // directly; fall back to the general algorithm when its
            // existence conditions fail.
            let static_design = if loaded.f_defaulted_to_c {
                static_output_attempted = true;
                match design_static_output_feedback(&loaded.sys, &poles, tol, seed) {
                    Ok(design) => Some(design),
                    Err(
                        target_control::Error::ExistenceFailed { .. }
                        | target_control::Error::NeedsAugmentation { .. },
                    ) => {
                        report.notes.push(
                            "static output feedback conditions fail; falling back to the \
                             general design algorithm on F = C"
                                .into(),
                        );
                        None
                    }
                    Err(e) => return Err(e.into()),
                }
            } else {
                None
            };
            match static_design {
                Some(design) => design,
                None => match run_design_algorithm(
                    &loaded.sys,
                    &loaded.f,
                    &poles,
                    default_extra_poles,
                    tol,
                    seed,
                )? {
                    AlgorithmOutcome::Designed(design) => design,
                    AlgorithmOutcome::Stopped(stop) => {
                        report.status = format!(
                            "design stopped at step {} ({}): {stop}",
                            stop.step(),
                            stop.condition()
                        );
                        report.exit_code = stop_exit_code(&stop);
                        return Ok(report);
                    }
                },
            }
        }
    };
    if static_output_attempted && design.mode == DesignMode::N0Pole {
        report.notes.push(
            "the augmented law feeds back [C; R] x, which needs more than the measured \
             outputs"
                .into(),
        );
    }

    if design.requested_poles.len() > poles.len() {
        report.notes.push(format!(
            "pole set extended from {} to {} entries for the augmented design",
            poles.len(),
            design.requested_poles.len()
        ));
    }
    if let Some(path) = out {
        let file = DesignFile {
            z: matrix_to_rows(&design.gain),
            r: design.augmentation.as_ref().map(matrix_to_rows),
            poles: design
                .requested_poles
                .poles()
                .iter()
                .map(|&p| PoleEntry::from(p))
                .collect(),
        };
        std::fs::write(path, file.to_toml_string())
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
        report.notes.push(format!("design written to {}", path.display()));
    }
    report.design = Some(DesignSection::from_result(&design));
    Ok(report)
}

/// Rebuilds a `DesignResult` carrier from a design file; only the gain, the
/// augmentation and the requested poles matter to verification.
fn design_from_file(
    file: &DesignFile,
    tol: &ToleranceConfig,
) -> Result<(DesignResult, Option<DMatrix<f64>>), CliError> {
    let gain = matrix_from_rows("Z", &file.z)?;
    let r = file.r.as_deref().map(|rows| matrix_from_rows("R", rows)).transpose()?;
    let poles: Vec<target_control::Complex64> =
        file.poles.iter().map(|&p| p.into()).collect();
    let requested_poles = PoleSet::new(poles, tol)?;
    let mode = if r.is_some() {
        DesignMode::N0Pole
    } else {
        DesignMode::RPole
    };
    Ok((
        DesignResult {
            gain,
            augmentation: r.clone(),
            requested_poles,
            achieved_subsystem_eigs: Vec::new(),
            closed_loop_eigs: Vec::new(),
            residual_spectrum: Vec::new(),
            sylvester_residual: f64::NAN,
            mode,
        },
        r,
    ))
}

fn cmd_verify(
    system: &Path,
    design_path: &Path,
    tol: &ToleranceConfig,
    mut report: Report,
) -> Result<Report, CliError> {
    let loaded = load_system(system, tol)?;
    report.notes.extend(loaded.notes);
    let design_file = DesignFile::load(design_path)?;
    let (design, r_from_design) = design_from_file(&design_file, tol)?;
    let r = r_from_design.or(loaded.r);
    let f_prime = stacked_target(&loaded.f, r.as_ref());

    let verification = verify_design(&loaded.sys, &f_prime, &design, tol)?;
    let section = VerificationSection::from_report(&verification, tol);
    let all_ok = section.all_ok;
    report.verification = Some(section);
    if !all_ok {
        report.status = "verification checks failed".into();
        report.exit_code = 5;
    }
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    system: &Path,
    design_path: &Path,
    x0: Option<&str>,
    t_final: f64,
    dt: f64,
    out: &Path,
    tol: &ToleranceConfig,
    mut report: Report,
) -> Result<Report, CliError> {
    let loaded = load_system(system, tol)?;
    report.notes.extend(loaded.notes);
    let design_file = DesignFile::load(design_path)?;
    let (design, r_from_design) = design_from_file(&design_file, tol)?;
    let r = r_from_design.or(loaded.r);
    let f_prime = stacked_target(&loaded.f, r.as_ref());

    let n = loaded.sys.state_dim();
    let x0 = match x0 {
        Some(list) => {
            let values = parse_vector(list)?;
            if values.len() != n {
                return Err(CliError::Input(format!(
                    "x0 has {} entries but the state dimension is {n}",
                    values.len()
                )));
            }
            DVector::from_vec(values)
        }
        None => DVector::from_element(n, 1.0),
    };

    let trajectory = simulate_closed_loop(&loaded.sys, &f_prime, &design.gain, &x0, t_final, dt)?;
    let initial = trajectory.initial_target_norm();
    let final_norm = trajectory.final_target_norm();
    let decay_ok = final_norm < (1e-3 * initial).max(1e-9);

    let mut csv = Vec::new();
    write_trajectory_csv(&trajectory, &mut csv)
        .map_err(|e| CliError::Input(format!("csv serialization: {e}")))?;
    std::fs::write(out, csv)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", out.display())))?;

    report.simulation = Some(SimulationSection {
        t_final,
        dt,
        samples: trajectory.len(),
        initial_target_norm: initial,
        final_target_norm: final_norm,
        decay_ok,
        csv_path: Some(out.display().to_string()),
    });
    Ok(report)
}

fn run(cli: &Cli, tol: &ToleranceConfig, echo: String) -> Result<Report, CliError> {
    tol.validate()?;
    let report = Report::new(echo, *tol);
    match &cli.command {
        Command::Check { system } => cmd_check(system, tol, report),
        Command::Design {
            system,
            poles,
            seed,
            out,
        } => cmd_design(system, poles, *seed, out.as_deref(), tol, report),
        Command::Verify { system, design } => cmd_verify(system, design, tol, report),
        Command::Simulate {
            system,
            design,
            x0,
            tfinal,
            dt,
            out,
        } => cmd_simulate(
            system,
            design,
            x0.as_deref(),
            *tfinal,
            *dt,
            out,
            tol,
            report,
        ),
    }
}

fn main() {
    let cli = Cli::parse();
    let tol = ToleranceConfig {
        rank_rtol: cli.rank_rtol,
        eig_atol: cli.eig_atol,
        residual_atol: cli.residual_atol,
    };
    let echo = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    let report = match run(&cli, &tol, echo.clone()) {
        Ok(report) => report,
        Err(err) => {
            let mut report = Report::new(echo, tol);
            report.status = err.to_string();
            report.exit_code = err.exit_code();
            report
        }
    };
    if cli.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("reports serialize")
        );
    } else {
        print_human(&report);
    }
    std::process::exit(report.exit_code);
}
