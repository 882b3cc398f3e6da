//! Pass/fail checks over trajectories.
//!
//! Every check is a pure function of its inputs. Each [`CheckReport`] carries
//! the largest observed violation and the tolerance it was judged against.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{norm_l2, Field, Grid};
use crate::model::{residual, ModelParams};
use crate::obstacle::ComplementarityReport;
use crate::steppers::{run, Scheme, SolverConfig, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub step: usize,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub pass: bool,
    pub worst_violation: f64,
    pub tolerance: f64,
    pub location: Option<Location>,
    pub details: BTreeMap<String, f64>,
}

impl CheckReport {
    pub fn new(name: &str, worst: f64, tol: f64, location: Option<Location>) -> Self {
        let worst = worst.max(0.0);
        Self {
            name: name.to_string(),
            pass: worst <= tol,
            worst_violation: worst,
            tolerance: tol,
            location,
            details: BTreeMap::new(),
        }
    }

    pub fn fail(mut self) -> Self {
        self.pass = false;
        self
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }
}

fn default_monotone() -> f64 {
    1e-12
}
fn default_energy() -> f64 {
    1e-12
}
fn default_eta_rel() -> f64 {
    1e-6
}
fn default_range() -> f64 {
    1e-8
}
fn default_comparison() -> f64 {
    1e-10
}
fn default_slack() -> f64 {
    1e-6
}
fn default_eq_distance() -> f64 {
    1e-5
}
fn default_integral() -> f64 {
    1e-4
}

/// Additive slacks; every field can be overridden from a config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_monotone")]
    pub monotone: f64,
    #[serde(default = "default_energy")]
    pub energy: f64,
    /// Relative slack `tol_η = eta_rel·(1 + ‖η(0)‖₂)`.
    #[serde(default = "default_eta_rel")]
    pub eta_rel: f64,
    #[serde(default = "default_range")]
    pub range: f64,
    #[serde(default = "default_comparison")]
    pub comparison: f64,
    #[serde(default = "default_slack")]
    pub dissipation: f64,
    #[serde(default = "default_slack")]
    pub smoothing: f64,
    #[serde(default = "default_eq_distance")]
    pub equilibrium_distance: f64,
    #[serde(default = "default_slack")]
    pub complementarity: f64,
    /// Relative slack for the two integrated energy inequalities.
    #[serde(default = "default_integral")]
    pub integral: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            monotone: default_monotone(),
            energy: default_energy(),
            eta_rel: default_eta_rel(),
            range: default_range(),
            comparison: default_comparison(),
            dissipation: default_slack(),
            smoothing: default_slack(),
            equilibrium_distance: default_eq_distance(),
            complementarity: default_slack(),
            integral: default_integral(),
        }
    }
}

fn loc(traj: &Trajectory, k: usize) -> Option<Location> {
    Some(Location { step: k, t: traj.diagnostics[k].t })
}

/// Largest `(x_k, k)` over an iterator, first index on ties.
fn argmax(values: impl Iterator<Item = f64>) -> Option<(f64, usize)> {
    values.enumerate().fold(None, |best, (k, v)| match best {
        Some((b, _)) if b >= v => best,
        _ => Some((v, k)),
    })
}

/// `u(t_{k+1}) ≥ u(t_k)` at every step and `u(t) ≥ u₀` throughout.
pub fn check_monotone(traj: &Trajectory, tol: f64) -> CheckReport {
    let mut worst = 0.0;
    let mut at = None;
    let mut note = |v: f64, k: usize| {
        if v > worst {
            worst = v;
            at = loc(traj, k);
        }
    };
    for (k, s) in traj.steps.iter().enumerate().skip(1) {
        note(-s.min_increment, k);
        note(-s.min_above_u0, k);
    }
    for w in traj.snapshots.windows(2) {
        note(w[0].u.sub(&w[1].u).max(), w[1].step);
        note(traj.u0.sub(&w[1].u).max(), w[1].step);
    }
    CheckReport::new("monotone", worst, tol, at)
}

/// `|E_{k+1} − E_k + dt·‖(u_{k+1} − u_k)/dt‖₂²|` for each step.
pub fn ei1_defects(traj: &Trajectory) -> Vec<f64> {
    traj.diagnostics
        .windows(2)
        .zip(traj.steps.iter().skip(1))
        .map(|(w, s)| (w[1].energy - w[0].energy + s.dt * s.velocity_l2 * s.velocity_l2).abs())
        .collect()
}

/// `E(t_{k+1}) ≤ E(t_k) + tol`, with the discrete energy-identity defect reported.
pub fn check_energy_decrease(traj: &Trajectory, tol: f64) -> CheckReport {
    let incr = traj.diagnostics.windows(2).map(|w| w[1].energy - w[0].energy);
    let (worst, k) = argmax(incr).unwrap_or((0.0, 0));
    let defect = ei1_defects(traj).into_iter().fold(0.0, f64::max);
    CheckReport::new("energy_decrease", worst, tol, loc(traj, k + 1).filter(|_| worst > 0.0))
        .with("ei1_defect_max", defect)
        .with("energy_initial", traj.diagnostics[0].energy)
        .with("energy_final", traj.diagnostics.last().map_or(0.0, |d| d.energy))
}

/// `‖η‖₂` nonincreasing within `tol_η`, and `‖η(t)‖₂² ≤ ‖η(0)‖₂² + tol_η`.
pub fn check_eta_monotone(traj: &Trajectory, eta_rel: f64) -> CheckReport {
    let eta0 = traj.diagnostics[0].eta_l2;
    let tol = eta_rel * (1.0 + eta0);
    let r = eta0 * eta0;
    let step_incr = traj.diagnostics.windows(2).map(|w| w[1].eta_l2 - w[0].eta_l2);
    let (inc, ki) = argmax(step_incr).unwrap_or((0.0, 0));
    let over = traj.diagnostics.iter().skip(1).map(|d| d.eta_l2 * d.eta_l2 - r);
    let (ov, ko) = argmax(over).unwrap_or((f64::NEG_INFINITY, 0));
    let (worst, k) = if inc >= ov { (inc, ki + 1) } else { (ov, ko + 1) };
    let eta_max = traj.diagnostics.iter().skip(1).map(|d| d.eta_l2).fold(0.0, f64::max);
    CheckReport::new("eta_monotone", worst, tol, loc(traj, k).filter(|_| worst > 0.0))
        .with("eta0_l2", eta0)
        .with("eta_max_after_start", eta_max)
        .with("largest_step_increase", inc.max(0.0))
}

/// `u₀ ≤ u(t) ≤ max(√κ, ‖u₀‖∞)`.
pub fn check_range(traj: &Trajectory, p: &ModelParams, tol: f64) -> CheckReport {
    let bound = p.kappa.sqrt().max(traj.u0.max_abs());
    let viol = traj.steps.iter().map(|s| (s.max_value - bound).max(-s.min_above_u0));
    let (worst, k) = argmax(viol).unwrap_or((0.0, 0));
    let umax = traj.steps.iter().map(|s| s.max_value).fold(f64::NEG_INFINITY, f64::max);
    CheckReport::new("range", worst, tol, loc(traj, k).filter(|_| worst > 0.0))
        .with("upper_bound", bound)
        .with("max_value", umax)
}

fn same_setup(a: &Trajectory, b: &Trajectory) -> Result<()> {
    if a.grid != b.grid || a.params != b.params {
        return Err(Error::InvalidParameter("trajectories use different grids or parameters".into()));
    }
    Ok(())
}

/// `u_lo(t) ≤ u_hi(t)` at every stored time the two trajectories share.
pub fn check_comparison(lo: &Trajectory, hi: &Trajectory, tol: f64) -> Result<CheckReport> {
    same_setup(lo, hi)?;
    if lo.config.scheme != hi.config.scheme {
        return Err(Error::InvalidParameter("trajectories use different schemes".into()));
    }
    let mut worst = f64::NEG_INFINITY;
    let mut at = None;
    let mut common = 0usize;
    for a in &lo.snapshots {
        if let Some(b) = hi.snapshots.iter().find(|b| (b.t - a.t).abs() <= 1e-12 * (1.0 + a.t)) {
            common += 1;
            let d = a.u.sub(&b.u).max();
            if d > worst {
                worst = d;
                at = Some(Location { step: a.step, t: a.t });
            }
        }
    }
    if common == 0 {
        return Err(Error::InvalidParameter("trajectories share no stored times".into()));
    }
    Ok(CheckReport::new("comparison", worst, tol, at.filter(|_| worst > 0.0)).with("common_times", common as f64))
}

/// Per-step dissipation quantity: `‖δu/dt‖₂² + 2κ(φ_{k+1} − e^{−2κdt}φ_k)/(1 − e^{−2κdt})`.
///
/// The second term tends to `dφ/dt + 2κφ` as `dt → 0` and is chosen so the
/// exponential bound below holds by induction for any `Ĉ` above every term.
pub fn dissipation_series(traj: &Trajectory, p: &ModelParams) -> Vec<f64> {
    let k2 = 2.0 * p.kappa;
    traj.diagnostics
        .windows(2)
        .zip(traj.steps.iter().skip(1))
        .map(|(w, s)| {
            let decay = (-k2 * s.dt).exp();
            s.velocity_l2 * s.velocity_l2 + k2 * (w[1].phi - decay * w[0].phi) / (-(-k2 * s.dt).exp_m1())
        })
        .collect()
}

/// `Ĉ = max(0, max_k C_k)`.
pub fn dissipation_constant(traj: &Trajectory, p: &ModelParams) -> f64 {
    dissipation_series(traj, p).into_iter().fold(0.0, f64::max)
}

/// Largest excess of `φ(t)` over `c/(2κ) + e^{−2κt}(φ(0) − c/(2κ))`, with its step.
pub fn dissipation_bound_violation(traj: &Trajectory, p: &ModelParams, c: f64) -> (f64, usize) {
    let phi0 = traj.diagnostics[0].phi;
    let base = c / (2.0 * p.kappa);
    let viol = traj.diagnostics.iter().map(|d| d.phi - (base + (-2.0 * p.kappa * d.t).exp() * (phi0 - base)));
    argmax(viol).unwrap_or((0.0, 0))
}

/// `φ(t) ≤ Ĉ/(2κ) + e^{−2κt}(φ(0) − Ĉ/(2κ))` with the estimated `Ĉ`.
pub fn check_dissipation(traj: &Trajectory, p: &ModelParams, tol: f64) -> CheckReport {
    let c_hat = dissipation_constant(traj, p);
    let (worst, k) = dissipation_bound_violation(traj, p, c_hat);
    let report = CheckReport::new("dissipation", worst, tol, loc(traj, k).filter(|_| worst > 0.0))
        .with("c_hat", c_hat)
        .with("long_enough", f64::from(u8::from(traj.t_end() >= 1.5 / p.kappa)));
    if c_hat.is_finite() && worst.is_finite() && traj.diagnostics.iter().all(|d| d.phi.is_finite()) {
        report
    } else {
        report.fail()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Fitted decay rate (positive means decay); `None` when too few usable points remain.
    pub rate: Option<f64>,
    pub t_start: f64,
    pub t_stop: f64,
    pub points: usize,
    /// Set when the series hit the rounding floor before the end of the run.
    pub truncated: bool,
}

/// Least-squares slope of `ln‖δu/dt‖₂` against `t` from `t_start` onward.
///
/// The window stops at the first value below the rounding floor
/// `100·ε·(1 + ‖u‖∞)/dt`.
pub fn fit_decay_rate(traj: &Trajectory, t_start: f64) -> DecayFit {
    let mut pts = Vec::new();
    let mut truncated = false;
    for s in traj.steps.iter().skip(1).filter(|s| s.t >= t_start) {
        let floor = 100.0 * f64::EPSILON * (1.0 + s.max_value.abs()) / s.dt;
        if !(s.velocity_l2 > floor) {
            truncated = true;
            break;
        }
        pts.push((s.t, s.velocity_l2.ln()));
    }
    let t_stop = pts.last().map_or(t_start, |p| p.0);
    let rate = if pts.len() >= 3 {
        let n = pts.len() as f64;
        let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
        (sxx > 0.0).then(|| -sxy / sxx)
    } else {
        None
    };
    DecayFit { rate, t_start, t_stop, points: pts.len(), truncated }
}

/// `‖u(t) − φ*‖₂ ≤ (1 + rel)·(C/σ)e^{−σt}` at the snapshots nearest to `times`,
/// with `C = ‖(Δ_h u₀ − u₀³ + κu₀)₊‖₂`.
pub fn check_exponential_convergence(
    traj: &Trajectory,
    eq: &Field,
    sigma: f64,
    times: &[f64],
    rel: f64,
) -> Result<CheckReport> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("decay rate σ = {sigma} is not positive")));
    }
    let g = &traj.grid;
    let c = norm_l2(g, &residual(g, &traj.u0, &traj.params)?.map(|x| x.max(0.0)));
    let mut report = CheckReport::new("exponential_convergence", 0.0, 0.0, None).with("C", c).with("sigma", sigma);
    let mut worst = f64::NEG_INFINITY;
    for &t in times {
        let snap = traj.snapshot_near(t);
        let dist = norm_l2(g, &snap.u.sub(eq));
        let bound = (1.0 + rel) * c / sigma * (-sigma * snap.t).exp();
        report = report.with(&format!("distance_t{}", snap.t), dist).with(&format!("bound_t{}", snap.t), bound);
        if dist - bound > worst {
            worst = dist - bound;
            report.location = Some(Location { step: snap.step, t: snap.t });
        }
    }
    report.worst_violation = worst.max(0.0);
    report.pass = worst <= 0.0;
    if report.pass {
        report.location = None;
    }
    Ok(report)
}

/// `‖u(T) − φ*‖∞` and the complementarity residuals of `φ*`.
pub fn check_equilibrium(traj: &Trajectory, eq: &Field, report: &ComplementarityReport, tol: &Tolerances) -> CheckReport {
    let dist = traj.final_state().sub(eq).max_abs();
    let comp = report.max_entry();
    let worst = (dist - tol.equilibrium_distance).max(comp - tol.complementarity).max(0.0);
    CheckReport::new("equilibrium", worst, 0.0, None)
        .with("distance_linf", dist)
        .with("primal_violation", report.primal_violation)
        .with("dual_violation", report.dual_violation)
        .with("gap", report.gap)
        .with("stationarity_residual", report.stationarity_residual)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorbingBox {
    pub c_bound: f64,
    pub phi_bound: f64,
    pub c_hat: f64,
    pub r: f64,
    pub m0: f64,
}

/// Box `‖r‖₂² ≤ 2κM₀ + r + Ĉ + 1`, `φ ≤ Ĉ/(2κ) + 1` with `Ĉ` the largest
/// dissipation constant over the calibration runs.
pub fn calibrate_b0(trajs: &[&Trajectory], p: &ModelParams, r: f64) -> Result<AbsorbingBox> {
    let first = trajs.first().ok_or_else(|| Error::InvalidParameter("no calibration trajectories".into()))?;
    for t in trajs {
        same_setup(first, t)?;
    }
    let c_hat = trajs.iter().map(|t| dissipation_constant(t, p)).fold(0.0, f64::max);
    let m0 = p.m0(&first.grid);
    Ok(AbsorbingBox {
        c_bound: 2.0 * p.kappa * m0 + r + c_hat + 1.0,
        phi_bound: c_hat / (2.0 * p.kappa) + 1.0,
        c_hat,
        r,
        m0,
    })
}

/// First stored time after which every step satisfies both bounds.
pub fn entry_time(traj: &Trajectory, c_bound: f64, phi_bound: f64) -> Option<Location> {
    let inside = |k: usize| traj.steps[k].res_l2sq <= c_bound && traj.diagnostics[k].phi <= phi_bound;
    let n = traj.steps.len();
    if n == 0 || !inside(n - 1) {
        return None;
    }
    let mut k = n - 1;
    while k > 0 && inside(k - 1) {
        k -= 1;
    }
    loc(traj, k)
}

pub fn check_absorbing(trajs: &[&Trajectory], c_bound: f64, phi_bound: f64) -> Result<CheckReport> {
    if trajs.is_empty() {
        return Err(Error::InvalidParameter("no trajectories".into()));
    }
    for t in trajs {
        same_setup(trajs[0], t)?;
    }
    let mut worst = 0.0f64;
    let mut tau_max: Option<Location> = None;
    let mut report = CheckReport::new("absorbing", 0.0, 0.0, None).with("c_bound", c_bound).with("phi_bound", phi_bound);
    for (i, t) in trajs.iter().enumerate() {
        match entry_time(t, c_bound, phi_bound) {
            Some(l) => {
                report = report.with(&format!("tau_{i}"), l.t);
                if tau_max.map_or(true, |m| l.t > m.t) {
                    tau_max = Some(l);
                }
            }
            None => {
                let last = t.steps.len() - 1;
                let excess = (t.steps[last].res_l2sq - c_bound).max(t.diagnostics[last].phi - phi_bound);
                worst = worst.max(excess).max(f64::MIN_POSITIVE);
                report = report
                    .with(&format!("terminal_res_l2sq_{i}"), t.steps[last].res_l2sq)
                    .with(&format!("terminal_phi_{i}"), t.diagnostics[last].phi);
            }
        }
    }
    report.worst_violation = worst;
    report.pass = worst == 0.0;
    report.location = tau_max;
    if let Some(l) = tau_max {
        report = report.with("tau_max", l.t);
    }
    Ok(report)
}

/// `sup_t min(t,1)·‖Δ_h u(t)‖₂` finite, `‖η(t)‖₂² ≤ r` for `t > 0`, and the
/// energy finite and nonincreasing from the first step on.
pub fn check_smoothing(traj: &Trajectory, r: f64, tol: f64) -> CheckReport {
    let sup = traj.steps.iter().skip(1).map(|s| s.t.min(1.0) * s.lap_l2).fold(0.0, f64::max);
    let eta = traj.diagnostics.iter().skip(1).map(|d| d.eta_l2 * d.eta_l2 - r);
    let (ev, ek) = argmax(eta).unwrap_or((0.0, 0));
    let incr = traj.diagnostics.windows(2).skip(1).map(|w| w[1].energy - w[0].energy);
    let (iv, ik) = argmax(incr).unwrap_or((0.0, 0));
    let (worst, k) = if ev >= iv { (ev, ek + 1) } else { (iv, ik + 2) };
    let finite = sup.is_finite() && traj.diagnostics.iter().all(|d| d.energy.is_finite());
    let report = CheckReport::new("smoothing", worst, tol, loc(traj, k).filter(|_| worst > 0.0))
        .with("sup_weighted_laplacian", sup);
    if finite {
        report
    } else {
        report.fail()
    }
}

/// Reference (implicit) and per-`λ` Yosida configurations derived from `base`.
pub fn yosida_sweep_configs(base: &SolverConfig, lambdas: &[f64]) -> Result<(SolverConfig, Vec<SolverConfig>)> {
    if lambdas.len() < 2 || lambdas.windows(2).any(|w| w[1] >= w[0]) || lambdas.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::InvalidParameter("λ values must be positive and strictly decreasing".into()));
    }
    let mut reference = base.clone();
    reference.scheme = Scheme::ImplicitObstacle;
    let members = lambdas
        .iter()
        .map(|&lam| {
            let mut cfg = base.clone();
            cfg.scheme = Scheme::Yosida;
            cfg.yosida_lambda = lam;
            cfg
        })
        .collect();
    Ok((reference, members))
}

/// `e(λ) = max_t ‖u_λ(t) − u_ref(t)‖₂` over shared stored times, required to
/// decrease strictly along `runs` (ordered by decreasing `λ`).
pub fn yosida_convergence_report(reference: &Trajectory, runs: &[(f64, &Trajectory)]) -> Result<CheckReport> {
    let g = &reference.grid;
    let mut errors = Vec::with_capacity(runs.len());
    for (lam, traj) in runs {
        same_setup(reference, traj)?;
        let mut e = 0.0f64;
        let mut shared = 0;
        for a in &traj.snapshots {
            if let Some(b) = reference.snapshots.iter().find(|b| (b.t - a.t).abs() <= 1e-12 * (1.0 + a.t)) {
                shared += 1;
                e = e.max(norm_l2(g, &a.u.sub(&b.u)));
            }
        }
        if shared == 0 {
            return Err(Error::InvalidParameter(format!("run with λ = {lam} shares no stored times with the reference")));
        }
        errors.push(e);
    }
    let worst = errors.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let mut report = CheckReport::new("yosida_convergence", worst, 0.0, None);
    if errors.windows(2).any(|w| w[1] >= w[0] && w[0] > 0.0) {
        report = report.fail();
    }
    for ((lam, _), e) in runs.iter().zip(&errors) {
        report = report.with(&format!("error_lambda_{lam:e}"), *e);
    }
    if let (Some(first), Some(last)) = (errors.first(), errors.last()) {
        report = report.with("ratio_last_first", if *first > 0.0 { last / first } else { 0.0 });
    }
    Ok(report)
}

/// Runs the implicit reference and one Yosida run per `λ`, then compares.
pub fn check_yosida_convergence(
    g: &Grid,
    u0: &Field,
    p: &ModelParams,
    base: &SolverConfig,
    lambdas: &[f64],
) -> Result<CheckReport> {
    let (ref_cfg, members) = yosida_sweep_configs(base, lambdas)?;
    let reference = run(g, u0, p, &ref_cfg).map_err(|e| e.error)?;
    let runs = members.iter().map(|c| run(g, u0, p, c).map_err(|e| e.error)).collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(f64, &Trajectory)> = lambdas.iter().copied().zip(runs.iter()).collect();
    yosida_convergence_report(&reference, &pairs)
}

/// Fitted decay rate of `‖δu/dt‖₂` on `[t_start, ·)` at least `min_ratio·σ`.
pub fn check_decay_rate(traj: &Trajectory, sigma: f64, t_start: f64, min_ratio: f64) -> CheckReport {
    let fit = fit_decay_rate(traj, t_start);
    let target = min_ratio * sigma;
    let report = match fit.rate {
        Some(rate) => CheckReport::new("decay_rate", target - rate, 0.0, None).with("rate", rate),
        None => CheckReport::new("decay_rate", 0.0, 0.0, None).fail(),
    };
    report
        .with("sigma", sigma)
        .with("target", target)
        .with("fit_t_stop", fit.t_stop)
        .with("fit_points", fit.points as f64)
        .with("truncated", f64::from(u8::from(fit.truncated)))
}

fn right_sum(traj: &Trajectory, f: impl Fn(&crate::steppers::StepStats) -> f64) -> f64 {
    traj.steps.iter().skip(1).map(|s| s.dt * f(s)).sum()
}

/// `E(u(T)) + ∫‖r‖₂² dt ≤ T‖η₀‖₂² + E(u₀)`, integral by the right-endpoint rule.
pub fn check_ei5(traj: &Trajectory, rel: f64) -> CheckReport {
    let d0 = traj.diagnostics[0];
    let last = traj.diagnostics.last().copied().unwrap_or(d0);
    let lhs = last.energy + right_sum(traj, |s| s.res_l2sq);
    let rhs = last.t * d0.eta_l2 * d0.eta_l2 + d0.energy;
    CheckReport::new("ei5", lhs - rhs, rel * (1.0 + d0.energy.abs()), None).with("lhs", lhs).with("rhs", rhs)
}

/// `∫‖∇(δu/dt)‖₂² dt + ½‖r(T)‖₂² + κE(T) ≤ ½‖r(0)‖₂² + κE(u₀)`, right-endpoint rule.
pub fn check_ei6(traj: &Trajectory, p: &ModelParams, rel: f64) -> CheckReport {
    let (d0, s0) = (traj.diagnostics[0], traj.steps[0]);
    let (dl, sl) = (*traj.diagnostics.last().unwrap_or(&d0), *traj.steps.last().unwrap_or(&s0));
    let lhs = right_sum(traj, |s| s.velocity_h1sq) + 0.5 * sl.res_l2sq + p.kappa * dl.energy;
    let rhs = 0.5 * s0.res_l2sq + p.kappa * d0.energy;
    let scale = 1.0 + rhs.abs();
    CheckReport::new("ei6", lhs - rhs, rel * scale, None).with("lhs", lhs).with("rhs", rhs)
}

/// First stored time with `‖r(T)‖₂² ≤ dr_value(u₀) + ε`.
pub fn t_epsilon(traj: &Trajectory, eps: f64) -> Option<Location> {
    let r = traj.diagnostics[0].res_neg_l2sq;
    traj.steps.iter().position(|s| s.res_l2sq <= r + eps).and_then(|k| loc(traj, k))
}
