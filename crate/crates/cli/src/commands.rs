//! Subcommand implementations. Each returns `Ok(())` for exit status 0.

use std::fs;
use std::path::{Path, PathBuf};

use iac_core::diagnostics::{
    calibrate_b0, check_absorbing, check_comparison, yosida_convergence_report, yosida_sweep_configs, CheckReport,
};
use iac_core::grid::{field_from_csv, field_to_csv};
use iac_core::io::{load_trajectory, write_trajectory};
use iac_core::model::dr_value;
use iac_core::obstacle::solve_equilibrium;
use iac_core::presets::raised;
use iac_core::spectral::{laplacian_ground_eigenvalue, min_eig};
use iac_core::steppers::{run, SolverConfig, Trajectory};
use iac_core::{Field, Grid};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::checks::run_checks;
use crate::config::{EquilibriumSection, Job, Potential, SweepSection, WarmStart};
use crate::error::CliError;

pub const DEFAULT_OUT: &str = "iac-out";

/// Options shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Context {
    pub out: Option<PathBuf>,
    pub quiet: bool,
}

impl Context {
    fn out_dir(&self, job: &Job) -> PathBuf {
        self.out
            .clone()
            .or_else(|| job.config.outputs.directory.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }

    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", msg.as_ref());
        }
    }
}

fn output_err(e: impl std::fmt::Display) -> CliError {
    CliError::Output(e.to_string())
}

fn create(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(output_err)?;
    fs::write(path, text + "\n").map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

fn write_field(path: &Path, g: &Grid, u: &Field) -> Result<(), CliError> {
    let text = field_to_csv(g, u).map_err(output_err)?;
    fs::write(path, text).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

/// Manifest for outputs that are not a trajectory.
fn write_job_manifest(dir: &Path, command: &str, job: &Job, wall_time_s: f64) -> Result<(), CliError> {
    write_json(
        &dir.join("manifest.json"),
        &json!({ "command": command, "config": job.echo, "wall_time_s": wall_time_s }),
    )
}

/// Run and write a trajectory; on solver failure the partial run is written and the error returned.
fn run_to_dir(job: &Job, u0: &Field, cfg: &SolverConfig, dir: &Path) -> Result<Trajectory, CliError> {
    create(dir)?;
    match run(&job.grid, u0, &job.params, cfg) {
        Ok(traj) => {
            write_trajectory(dir, &traj, Some(job.echo.clone()), None).map_err(output_err)?;
            Ok(traj)
        }
        Err(e) => {
            write_trajectory(dir, &e.partial, Some(job.echo.clone()), Some(&e.error)).map_err(output_err)?;
            Err(CliError::Solver(e.error.to_string()))
        }
    }
}

pub fn cmd_run(job: &Job, ctx: &Context) -> Result<(), CliError> {
    let cfg = job.config.solver()?;
    let dir = ctx.out_dir(job);
    let traj = run_to_dir(job, &job.u0, &cfg, &dir)?;
    let last = traj.diagnostics.last().expect("trajectory has an initial record");
    ctx.say(format!(
        "run: {} steps to t = {}, E = {:.6e}, outputs in {}",
        traj.steps.len() - 1,
        last.t,
        last.energy,
        dir.display()
    ));
    Ok(())
}

#[derive(Debug, Serialize)]
struct Verification {
    trajectory_dir: String,
    manifest_hash: Option<String>,
    all_pass: bool,
    checks: Vec<CheckReport>,
}

fn sha256_hex(path: &Path) -> Option<String> {
    fs::read(path).ok().map(|bytes| hex::encode(Sha256::digest(bytes)))
}

pub fn cmd_verify(job: &Job, ctx: &Context) -> Result<(), CliError> {
    let checks = &job.config.checks;
    let dir = ctx.out_dir(job);
    let (traj_dir, loaded) = match &checks.trajectory_dir {
        Some(existing) => {
            create(&dir)?;
            let loaded = load_trajectory(existing).map(|(t, _)| t).map_err(|e| e.to_string());
            (existing.clone(), loaded)
        }
        None => {
            let cfg = job.config.solver()?;
            (dir.clone(), Ok(run_to_dir(job, &job.u0, &cfg, &dir)?))
        }
    };
    let reports = match &loaded {
        Ok(traj) => run_checks(traj, checks),
        Err(e) => {
            eprintln!("cannot load trajectory: {e}");
            vec![CheckReport::new("trajectory_load", 0.0, 0.0, None).fail()]
        }
    };
    let failed = reports.iter().filter(|r| !r.pass).count();
    for r in &reports {
        ctx.say(format!(
            "{:<24} {}  worst = {:.3e}  tol = {:.3e}",
            r.name,
            if r.pass { "PASS" } else { "FAIL" },
            r.worst_violation,
            r.tolerance
        ));
    }
    let verification = Verification {
        trajectory_dir: traj_dir.display().to_string(),
        manifest_hash: sha256_hex(&traj_dir.join("manifest.json")),
        all_pass: failed == 0,
        checks: reports,
    };
    write_json(&dir.join("verification.json"), &verification)?;
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::ChecksFailed(failed))
    }
}

fn potential_field(job: &Job, potential: &Potential) -> Result<Field, CliError> {
    let g = &job.grid;
    match potential {
        Potential::Zero {} => Ok(g.zeros()),
        Potential::Constant { value } if value.is_finite() => Ok(Field::constant(g.len(), *value)),
        Potential::Constant { value } => Err(CliError::Config(format!("potential value {value} is not finite"))),
        Potential::ThreeU0Squared {} => Ok(job.u0.map(|x| 3.0 * x * x)),
        Potential::Csv { path } => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            let (fg, v) = field_from_csv(&text).map_err(|e| CliError::Config(e.to_string()))?;
            if fg.dim() != g.dim() || fg.len() != g.len() {
                return Err(CliError::Config(format!("{} does not match the domain grid", path.display())));
            }
            g.validate(&v).map_err(|e| CliError::Config(e.to_string()))?;
            Ok(v)
        }
    }
}

pub fn cmd_eigen(job: &Job, ctx: &Context) -> Result<(), CliError> {
    let section = job
        .config
        .eigen
        .as_ref()
        .ok_or_else(|| CliError::Config("the eigen command needs an `eigen` section".into()))?;
    let v = potential_field(job, &section.potential)?;
    let dir = ctx.out_dir(job);
    let start = std::time::Instant::now();
    let res = min_eig(&job.grid, &v, section.tol, section.max_iter).map_err(|e| CliError::Eigen(e.to_string()))?;
    let wall = start.elapsed().as_secs_f64();
    let mut report = serde_json::to_value(&res).map_err(output_err)?;
    if let Potential::ThreeU0Squared {} = section.potential {
        report["sigma"] = json!(res.lambda_min - job.params.kappa);
    }
    if let Potential::Zero {} = section.potential {
        report["analytic"] = json!(laplacian_ground_eigenvalue(&job.grid));
    }
    create(&dir)?;
    write_json(&dir.join("eigen.json"), &report)?;
    write_field(&dir.join("eigenfield.csv"), &job.grid, &res.eigenfield)?;
    write_job_manifest(&dir, "eigen", job, wall)?;
    ctx.say(format!(
        "eigen: lambda = {:.12e} after {} iterations (residual {:.2e})",
        res.lambda_min, res.iterations, res.residual
    ));
    Ok(())
}

pub fn cmd_equilibrium(job: &Job, ctx: &Context) -> Result<(), CliError> {
    let section = job.config.equilibrium.clone().unwrap_or(EquilibriumSection {
        tol: 1e-8,
        warm_start: WarmStart::FinalState,
    });
    let solver = match section.warm_start {
        WarmStart::FinalState => Some(job.config.solver()?),
        WarmStart::Initial => None,
    };
    let dir = ctx.out_dir(job);
    create(&dir)?;
    let start = std::time::Instant::now();
    let warm = match &solver {
        Some(cfg) => run_to_dir(job, &job.u0, cfg, &dir.join("prerun"))?.final_state().clone(),
        None => job.u0.clone(),
    };
    let (eq, multiplier, rep) = solve_equilibrium(&job.grid, &job.u0, &job.params, &warm, section.tol)
        .map_err(|e| CliError::Equilibrium(e.to_string()))?;
    let wall = start.elapsed().as_secs_f64();
    write_field(&dir.join("equilibrium.csv"), &job.grid, &eq)?;
    write_field(&dir.join("multiplier.csv"), &job.grid, &multiplier)?;
    write_json(
        &dir.join("equilibrium.json"),
        &json!({
            "tol": section.tol,
            "complementarity": rep,
            "max_residual": rep.max_entry(),
            "distance_from_warm_start_linf": eq.sub(&warm).max_abs(),
        }),
    )?;
    write_job_manifest(&dir, "equilibrium", job, wall)?;
    ctx.say(format!("equilibrium: max complementarity residual {:.3e}", rep.max_entry()));
    Ok(())
}

struct Member {
    name: String,
    u0: Field,
    config: SolverConfig,
}

#[derive(Debug, Serialize)]
struct MemberSummary {
    name: String,
    completed: bool,
    error: Option<String>,
    wall_time_s: f64,
}

fn sweep_members(job: &Job, section: &SweepSection) -> Result<Vec<Member>, CliError> {
    let base = job.config.solver()?;
    let bad = |e: iac_core::Error| CliError::Config(e.to_string());
    Ok(match section {
        SweepSection::Yosida { lambdas } => {
            let (reference, runs) = yosida_sweep_configs(&base, lambdas).map_err(bad)?;
            std::iter::once(Member { name: "reference".into(), u0: job.u0.clone(), config: reference })
                .chain(lambdas.iter().zip(runs).map(|(l, config)| Member {
                    name: format!("lambda_{l:e}"),
                    u0: job.u0.clone(),
                    config,
                }))
                .collect()
        }
        SweepSection::Comparison { shift } => {
            if !(*shift >= 0.0 && shift.is_finite()) {
                return Err(CliError::Config(format!("comparison shift must be nonnegative, got {shift}")));
            }
            vec![
                Member { name: "lower".into(), u0: job.u0.clone(), config: base.clone() },
                Member { name: "upper".into(), u0: raised(&job.u0, *shift), config: base },
            ]
        }
        SweepSection::Absorbing { presets } => presets
            .iter()
            .enumerate()
            .map(|(i, p)| {
                Ok(Member {
                    name: format!("{i:02}_{}", p.name()),
                    u0: p.build(&job.grid, &job.params).map_err(bad)?,
                    config: base.clone(),
                })
            })
            .collect::<Result<_, CliError>>()?,
    })
}

pub fn cmd_sweep(job: &Job, ctx: &Context) -> Result<(), CliError> {
    let section = job
        .config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("the sweep command needs a `sweep` section".into()))?;
    let members = sweep_members(job, section)?;
    let dir = ctx.out_dir(job);
    create(&dir)?;
    let results: Vec<Result<Trajectory, CliError>> = std::thread::scope(|s| {
        let handles: Vec<_> = members
            .iter()
            .map(|m| s.spawn(|| run_to_dir(job, &m.u0, &m.config, &dir.join(&m.name))))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap_or_else(|_| Err(CliError::Solver("member panicked".into())))).collect()
    });
    let summaries: Vec<MemberSummary> = members
        .iter()
        .zip(&results)
        .map(|(m, r)| MemberSummary {
            name: m.name.clone(),
            completed: r.is_ok(),
            error: r.as_ref().err().map(|e| e.to_string()),
            wall_time_s: r.as_ref().map_or(0.0, |t| t.wall_time_s),
        })
        .collect();
    let failures: Vec<String> = summaries.iter().filter(|m| !m.completed).map(|m| m.name.clone()).collect();
    if !failures.is_empty() {
        write_json(&dir.join("sweep.json"), &json!({ "members": summaries, "report": Value::Null }))?;
        return Err(CliError::Sweep(failures.join(", ")));
    }
    let trajs: Vec<Trajectory> = results.into_iter().map(|r| r.expect("failures handled above")).collect();
    let refs: Vec<&Trajectory> = trajs.iter().collect();
    let tol = &job.config.checks.tolerances;
    let report = match section {
        SweepSection::Yosida { lambdas } => {
            let pairs: Vec<(f64, &Trajectory)> = lambdas.iter().copied().zip(refs[1..].iter().copied()).collect();
            yosida_convergence_report(refs[0], &pairs)
        }
        SweepSection::Comparison { .. } => check_comparison(refs[0], refs[1], tol.comparison),
        SweepSection::Absorbing { .. } => {
            let r = trajs
                .iter()
                .map(|t| dr_value(&t.grid, &t.u0, &t.params))
                .collect::<Result<Vec<_>, _>>()
                .map_err(output_err)?
                .into_iter()
                .fold(0.0, f64::max);
            calibrate_b0(&refs, &job.params, r).and_then(|b| {
                check_absorbing(&refs, b.c_bound, b.phi_bound).map(|rep| {
                    rep.with("c_hat", b.c_hat).with("r", b.r).with("m0", b.m0)
                })
            })
        }
    }
    .map_err(|e| CliError::Sweep(e.to_string()))?;
    write_json(&dir.join("sweep.json"), &json!({ "members": summaries, "report": report }))?;
    write_job_manifest(&dir, "sweep", job, summaries.iter().map(|m| m.wall_time_s).sum())?;
    ctx.say(format!(
        "sweep {}: {} (worst violation {:.3e})",
        report.name,
        if report.pass { "PASS" } else { "FAIL" },
        report.worst_violation
    ));
    if report.pass {
        Ok(())
    } else {
        Err(CliError::ChecksFailed(1))
    }
}
