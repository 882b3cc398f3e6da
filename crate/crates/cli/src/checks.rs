//! Runs a configured list of checks over one trajectory.

use iac_core::diagnostics::{
    check_decay_rate, check_dissipation, check_ei5, check_ei6, check_energy_decrease, check_equilibrium,
    check_eta_monotone, check_exponential_convergence, check_monotone, check_range, check_smoothing, CheckReport,
};
use iac_core::obstacle::solve_equilibrium;
use iac_core::spectral::sigma_rate;
use iac_core::steppers::Trajectory;
use iac_core::Field;

use crate::config::{CheckName, Checks};

const POLISH_TOL: f64 = 1e-10;
const EIGEN_TOL: f64 = 1e-11;

fn failed(name: &str, why: &str) -> CheckReport {
    eprintln!("{name}: {why}");
    CheckReport::new(name, 0.0, 0.0, None).fail()
}

/// Lazily computed equilibrium shared by the checks that need it.
struct Polish<'a> {
    traj: &'a Trajectory,
    result: Option<Result<(Field, iac_core::obstacle::ComplementarityReport), String>>,
}

impl Polish<'_> {
    fn get(&mut self) -> &Result<(Field, iac_core::obstacle::ComplementarityReport), String> {
        let t = self.traj;
        self.result.get_or_insert_with(|| {
            solve_equilibrium(&t.grid, &t.u0, &t.params, t.final_state(), POLISH_TOL)
                .map(|(eq, _, rep)| (eq, rep))
                .map_err(|e| e.to_string())
        })
    }
}

pub fn run_checks(traj: &Trajectory, checks: &Checks) -> Vec<CheckReport> {
    let tol = &checks.tolerances;
    let p = &traj.params;
    let r = checks.r.unwrap_or(traj.diagnostics[0].res_neg_l2sq);
    let mut polish = Polish { traj, result: None };
    checks
        .selected()
        .into_iter()
        .map(|name| match name {
            CheckName::Monotone => check_monotone(traj, tol.monotone),
            CheckName::EnergyDecrease => check_energy_decrease(traj, tol.energy),
            CheckName::EtaMonotone => check_eta_monotone(traj, tol.eta_rel),
            CheckName::Range => check_range(traj, p, tol.range),
            CheckName::Dissipation => check_dissipation(traj, p, tol.dissipation),
            CheckName::Smoothing => check_smoothing(traj, r, tol.smoothing),
            CheckName::Ei5 => check_ei5(traj, tol.integral),
            CheckName::Ei6 => check_ei6(traj, p, tol.integral),
            CheckName::Equilibrium => match polish.get() {
                Ok((eq, rep)) => check_equilibrium(traj, eq, rep, tol),
                Err(e) => failed("equilibrium", e),
            },
            CheckName::DecayRate => match sigma_rate(&traj.grid, &traj.u0, p, EIGEN_TOL) {
                Ok(sigma) => check_decay_rate(traj, sigma, checks.decay_t_start, checks.decay_min_ratio),
                Err(e) => failed("decay_rate", &e.to_string()),
            },
            CheckName::ExponentialConvergence => {
                let sigma = match sigma_rate(&traj.grid, &traj.u0, p, EIGEN_TOL) {
                    Ok(s) => s,
                    Err(e) => return failed("exponential_convergence", &e.to_string()),
                };
                let times: Vec<f64> = (1..=5).map(f64::from).filter(|&t| t <= traj.t_end() + 1e-12).collect();
                match polish.get() {
                    Ok((eq, _)) => check_exponential_convergence(traj, eq, sigma, &times, checks.exponential_slack)
                        .unwrap_or_else(|e| failed("exponential_convergence", &e.to_string())),
                    Err(e) => failed("exponential_convergence", e),
                }
            }
        })
        .collect()
}
