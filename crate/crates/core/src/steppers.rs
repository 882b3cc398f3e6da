//! Time integration of the irreversible flow by three routes:
//!
//! * `explicit`: forward Euler on `u_t = (Δu − u³ + κu)₊`;
//! * `implicit_obstacle`: one obstacle problem per step with obstacle
//!   `u_prev`, either convex-split (`κu` explicit) or fully implicit;
//! * `yosida`: forward Euler on the Moreau–Yosida regularized flow
//!   `u_t = (κu − ∂ψ_λ(u))₊` with `∂ψ_λ(v) = −Δ(J_λ v) + (J_λ v)³`.


use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, h1_seminorm_sq, laplacian, norm_l2, positive_part, Field, Grid};
use crate::linalg::ShiftedLaplacian;
use crate::model::{residual, EnergySnapshot, ModelParams};
use crate::obstacle::{solve_active_set, solve_pgs, ObstacleProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Explicit,
    ImplicitObstacle,
    Yosida,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Splitting {
    #[default]
    ConvexSplit,
    FullyImplicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerSolver {
    #[default]
    ActiveSet,
    Pgs,
}

fn default_lambda() -> f64 {
    1e-2
}
fn default_newton_tol() -> f64 {
    1e-10
}
fn default_newton_max_iter() -> usize {
    50
}
fn default_pgs_tol() -> f64 {
    1e-11
}
fn default_pgs_max_iter() -> usize {
    100_000
}
fn default_stride() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub splitting: Splitting,
    #[serde(default)]
    pub inner_solver: InnerSolver,
    #[serde(default = "default_lambda")]
    pub yosida_lambda: f64,
    #[serde(default = "default_newton_tol")]
    pub newton_tol: f64,
    #[serde(default = "default_newton_max_iter")]
    pub newton_max_iter: usize,
    #[serde(default = "default_pgs_tol")]
    pub pgs_tol: f64,
    #[serde(default = "default_pgs_max_iter")]
    pub pgs_max_iter: usize,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
}

impl SolverConfig {
    pub fn new(scheme: Scheme, dt: f64, t_end: f64) -> Self {
        Self {
            scheme,
            dt,
            t_end,
            splitting: Splitting::default(),
            inner_solver: InnerSolver::default(),
            yosida_lambda: default_lambda(),
            newton_tol: default_newton_tol(),
            newton_max_iter: default_newton_max_iter(),
            pgs_tol: default_pgs_tol(),
            pgs_max_iter: default_pgs_max_iter(),
            snapshot_stride: default_stride(),
        }
    }

    pub fn with_splitting(mut self, s: Splitting) -> Self {
        self.splitting = s;
        self
    }

    pub fn with_lambda(mut self, lam: f64) -> Self {
        self.yosida_lambda = lam;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.snapshot_stride = stride;
        self
    }

    pub fn validate(&self, g: &Grid, p: &ModelParams) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        positive("dt", self.dt)?;
        positive("t_end", self.t_end)?;
        positive("newton_tol", self.newton_tol)?;
        positive("pgs_tol", self.pgs_tol)?;
        if self.newton_max_iter == 0 || self.pgs_max_iter == 0 || self.snapshot_stride == 0 {
            return Err(Error::InvalidParameter("iteration limits and stride must be ≥ 1".into()));
        }
        match self.scheme {
            Scheme::Explicit => check_cfl(g, self.dt)?,
            Scheme::Yosida => {
                positive("yosida_lambda", self.yosida_lambda)?;
                check_cfl(g, self.dt)?;
            }
            Scheme::ImplicitObstacle => {
                if self.splitting == Splitting::FullyImplicit && self.dt * p.kappa >= 1.0 {
                    return Err(Error::InvalidParameter(format!(
                        "fully implicit steps need dt < 1/κ = {}",
                        1.0 / p.kappa
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(1.0) as usize
    }

    pub fn time_of(&self, k: usize) -> f64 {
        if k >= self.n_steps() {
            self.t_end
        } else {
            k as f64 * self.dt
        }
    }
}

fn check_cfl(g: &Grid, dt: f64) -> Result<()> {
    let bound = g.explicit_dt_bound();
    if dt > bound * (1.0 + 1e-12) {
        return Err(Error::Cfl { dt, bound });
    }
    Ok(())
}

/// Forward Euler step `u + dt·(r)₊`.
pub fn step_explicit(g: &Grid, u: &Field, p: &ModelParams, dt: f64) -> Result<Field> {
    check_cfl(g, dt)?;
    explicit_unchecked(g, u, p, dt)
}

fn explicit_unchecked(g: &Grid, u: &Field, p: &ModelParams, dt: f64) -> Result<Field> {
    let r = residual(g, u, p)?;
    Ok(u.zip_map(&r, |v, ri| v + dt * ri.max(0.0)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImplicitStep {
    pub u: Field,
    pub multiplier: Field,
    pub iterations: usize,
}

/// One step of the time-discrete parabolic obstacle problem
///
/// ```text
/// (u − u_prev)/dt + η̂ − Δ_h u + u³ − κ·u_src = 0,  u ≥ u_prev,  η̂ ≤ 0,  (u − u_prev)·η̂ = 0
/// ```
///
/// with `u_src = u_prev` (convex split) or `u` (fully implicit).
pub fn step_implicit_obstacle(
    g: &Grid,
    u_prev: &Field,
    p: &ModelParams,
    dt: f64,
    splitting: Splitting,
    cfg: &SolverConfig,
) -> Result<ImplicitStep> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let a = 1.0 / dt;
    let (source, kappa_implicit) = match splitting {
        Splitting::ConvexSplit => (u_prev.scale(a + p.kappa), false),
        Splitting::FullyImplicit => {
            if dt * p.kappa >= 1.0 {
                return Err(Error::InvalidParameter("fully implicit steps need dt < 1/κ".into()));
            }
            (u_prev.scale(a), true)
        }
    };
    let prob = ObstacleProblem::new(g.clone(), u_prev.clone(), a, source, kappa_implicit, *p)?;
    let sol = match cfg.inner_solver {
        InnerSolver::ActiveSet => {
            solve_active_set(&prob, u_prev, cfg.newton_tol, cfg.newton_max_iter.max(g.len() + 1))?
        }
        InnerSolver::Pgs => {
            let sol = solve_pgs(&prob, u_prev, cfg.pgs_tol, cfg.pgs_max_iter)?;
            if !sol.converged {
                return Err(Error::NotConverged {
                    solver: "projected Gauss-Seidel",
                    iterations: sol.iterations,
                    residual: prob.report(&sol.u).max_entry(),
                });
            }
            sol
        }
    };
    Ok(ImplicitStep { u: sol.u, multiplier: sol.multiplier, iterations: sol.iterations + sol.newton_iterations })
}

/// Resolvent `w = J_λ v` of `∂ψ = −Δ + (·)³`: solves `w + λ(−Δ_h w + w³) = v`.
pub fn resolvent_jlambda(g: &Grid, v: &Field, lam: f64, tol: f64, max_iter: usize) -> Result<Field> {
    resolvent_from(g, v, v, lam, tol, max_iter).map(|(w, _)| w)
}

fn resolvent_from(g: &Grid, v: &Field, start: &Field, lam: f64, tol: f64, max_iter: usize) -> Result<(Field, usize)> {
    g.validate(v)?;
    if !(lam > 0.0) {
        return Err(Error::InvalidParameter(format!("resolvent parameter must be positive, got {lam}")));
    }
    let eq = |w: &Field| -> Result<Field> {
        let lap = laplacian(g, w)?;
        Ok(Field::from_vec(
            (0..w.len()).map(|i| w[i] + lam * (-lap[i] + w[i].powi(3)) - v[i]).collect(),
        ))
    };
    let l2 = |f: &Field| f.values().iter().map(|x| x * x).sum::<f64>();
    let mut w = start.clone();
    let mut res = eq(&w)?;
    for it in 0..max_iter {
        if res.max_abs() <= tol {
            return Ok((w, it));
        }
        // (I + λ(−Δ + 3w²)) δ = −G, scaled by 1/λ
        let diag: Vec<f64> = w.values().iter().map(|x| 1.0 / lam + 3.0 * x * x).collect();
        let rhs: Vec<f64> = res.values().iter().map(|x| -x / lam).collect();
        let delta = Field::from_vec(ShiftedLaplacian { grid: g, diag: &diag, frozen: None }.solve(&rhs)?);
        let m0 = l2(&res);
        let mut t = 1.0;
        loop {
            let trial = w.axpy(t, &delta);
            let rt = eq(&trial)?;
            if l2(&rt) <= (1.0 - 1e-4 * t) * m0 || delta.max_abs() * t <= 1e-16 * (1.0 + w.max_abs()) {
                w = trial;
                res = rt;
                break;
            }
            t *= 0.5;
            if t < 1e-10 {
                return Err(Error::NotConverged { solver: "resolvent Newton", iterations: it, residual: res.max_abs() });
            }
        }
    }
    if res.max_abs() <= tol {
        Ok((w, max_iter))
    } else {
        Err(Error::NotConverged { solver: "resolvent Newton", iterations: max_iter, residual: res.max_abs() })
    }
}

/// Regularized velocity `(κu − ∂ψ_λ(u))₊`.
pub fn yosida_rhs(g: &Grid, u: &Field, p: &ModelParams, lam: f64, tol: f64, max_iter: usize) -> Result<Field> {
    let w = resolvent_jlambda(g, u, lam, tol, max_iter)?;
    Ok(yosida_rhs_from_resolvent(g, u, &w, p)?)
}

fn yosida_rhs_from_resolvent(g: &Grid, u: &Field, w: &Field, p: &ModelParams) -> Result<Field> {
    let lap = laplacian(g, w)?;
    Ok(Field::from_vec(
        (0..u.len()).map(|i| (p.kappa * u[i] - (-lap[i] + w[i].powi(3))).max(0.0)).collect(),
    ))
}

/// Forward Euler step on the regularized flow.
pub fn step_yosida(g: &Grid, u: &Field, p: &ModelParams, dt: f64, lam: f64) -> Result<Field> {
    check_cfl(g, dt)?;
    let rhs = yosida_rhs(g, u, p, lam, default_newton_tol(), default_newton_max_iter())?;
    Ok(u.axpy(dt, &rhs))
}

/// Per-step quantities beyond [`EnergySnapshot`], used by the diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StepStats {
    pub t: f64,
    /// Length of the step that ended at `t` (0 for the initial record).
    pub dt: f64,
    /// `min_i (u_next − u_prev)_i`.
    pub min_increment: f64,
    /// `min_i (u − u₀)_i`.
    pub min_above_u0: f64,
    pub max_value: f64,
    /// `‖(u_next − u_prev)/dt‖₂`.
    pub velocity_l2: f64,
    /// `‖∇((u_next − u_prev)/dt)‖₂²`.
    pub velocity_h1sq: f64,
    /// `‖Δ_h u − u³ + κu‖₂²`.
    pub res_l2sq: f64,
    pub lap_l2: f64,
    /// `‖η̂‖₂` of the step multiplier (implicit scheme only).
    pub eta_hat_l2: f64,
    pub inner_iterations: usize,
}

impl StepStats {
    pub const CSV_HEADER: &'static str =
        "t,dt,min_increment,min_above_u0,max_value,velocity_l2,velocity_h1sq,res_l2sq,lap_l2,eta_hat_l2,inner_iterations";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.t,
            self.dt,
            self.min_increment,
            self.min_above_u0,
            self.max_value,
            self.velocity_l2,
            self.velocity_h1sq,
            self.res_l2sq,
            self.lap_l2,
            self.eta_hat_l2,
            self.inner_iterations
        )
    }

    pub fn parse_csv_row(line: &str) -> Result<Self> {
        let c: Vec<&str> = line.split(',').map(str::trim).collect();
        if c.len() != 11 {
            return Err(Error::Parse(format!("expected 11 columns, got {}", c.len())));
        }
        let f = |s: &str| s.parse::<f64>().map_err(|_| Error::Parse(format!("bad number {s:?}")));
        Ok(Self {
            t: f(c[0])?,
            dt: f(c[1])?,
            min_increment: f(c[2])?,
            min_above_u0: f(c[3])?,
            max_value: f(c[4])?,
            velocity_l2: f(c[5])?,
            velocity_h1sq: f(c[6])?,
            res_l2sq: f(c[7])?,
            lap_l2: f(c[8])?,
            eta_hat_l2: f(c[9])?,
            inner_iterations: c[10].parse().map_err(|_| Error::Parse(format!("bad count {:?}", c[10])))?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub u: Field,
    pub multiplier: Option<Field>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: Grid,
    pub params: ModelParams,
    pub config: SolverConfig,
    pub u0: Field,
    /// One entry per recorded time, starting with `t = 0`.
    pub diagnostics: Vec<EnergySnapshot>,
    pub steps: Vec<StepStats>,
    /// Fields at every `snapshot_stride`-th step, plus the first and last.
    pub snapshots: Vec<Snapshot>,
    pub wall_time_s: f64,
}

impl Trajectory {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.diagnostics.iter().map(|d| d.t)
    }

    pub fn final_state(&self) -> &Field {
        &self.snapshots.last().expect("trajectory has an initial snapshot").u
    }

    pub fn t_end(&self) -> f64 {
        self.diagnostics.last().map_or(0.0, |d| d.t)
    }

    /// Snapshot whose time is closest to `t`.
    pub fn snapshot_near(&self, t: f64) -> &Snapshot {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .expect("trajectory has an initial snapshot")
    }

    pub fn inner_iterations(&self) -> Vec<usize> {
        self.steps.iter().skip(1).map(|s| s.inner_iterations).collect()
    }
}

/// A run that stopped early; `partial` holds everything up to the failure.
#[derive(Debug)]
pub struct RunError {
    pub error: Error,
    pub partial: Box<Trajectory>,
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "run aborted at t = {}: {}", self.partial.t_end(), self.error)
    }
}

impl std::error::Error for RunError {}

fn record(
    g: &Grid,
    p: &ModelParams,
    u0: &Field,
    prev: &Field,
    u: &Field,
    t: f64,
    dt: f64,
) -> Result<(EnergySnapshot, StepStats)> {
    let snap = EnergySnapshot::of(g, u, p, t)?;
    let r = residual(g, u, p)?;
    let lap = laplacian(g, u)?;
    let inc = u.sub(prev);
    let velocity = if dt > 0.0 { inc.scale(1.0 / dt) } else { g.zeros() };
    let stats = StepStats {
        t,
        dt,
        min_increment: if dt > 0.0 { inc.min() } else { 0.0 },
        min_above_u0: u.sub(u0).min(),
        max_value: u.max(),
        velocity_l2: norm_l2(g, &velocity),
        velocity_h1sq: h1_seminorm_sq(g, &velocity),
        res_l2sq: norm_l2(g, &r).powi(2),
        lap_l2: norm_l2(g, &lap),
        eta_hat_l2: 0.0,
        inner_iterations: 0,
    };
    Ok((snap, stats))
}

/// Wall clock; reads zero on `wasm32`, where `std::time::Instant` is unavailable.
struct Stopwatch(#[cfg(not(target_arch = "wasm32"))] std::time::Instant);

impl Stopwatch {
    fn start() -> Self {
        #[cfg(not(target_arch = "wasm32"))]
        return Stopwatch(std::time::Instant::now());
        #[cfg(target_arch = "wasm32")]
        return Stopwatch();
    }

    fn seconds(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        return self.0.elapsed().as_secs_f64();
        #[cfg(target_arch = "wasm32")]
        return 0.0;
    }
}

/// Integrate from `u0` to `cfg.t_end`.
pub fn run(g: &Grid, u0: &Field, p: &ModelParams, cfg: &SolverConfig) -> std::result::Result<Trajectory, RunError> {
    let started = Stopwatch::start();
    let mut traj = Trajectory {
        grid: g.clone(),
        params: *p,
        config: cfg.clone(),
        u0: u0.clone(),
        diagnostics: Vec::new(),
        steps: Vec::new(),
        snapshots: Vec::new(),
        wall_time_s: 0.0,
    };
    let fail = |mut traj: Trajectory, error: Error| {
        traj.wall_time_s = started.seconds();
        RunError { error, partial: Box::new(traj) }
    };
    if let Err(e) = g.validate(u0).and_then(|_| cfg.validate(g, p)) {
        return Err(fail(traj, e));
    }
    match record(g, p, u0, u0, u0, 0.0, 0.0) {
        Ok((snap, stats)) => {
            traj.diagnostics.push(snap);
            traj.steps.push(stats);
        }
        Err(e) => return Err(fail(traj, e)),
    }
    traj.snapshots.push(Snapshot { step: 0, t: 0.0, u: u0.clone(), multiplier: None });

    let n = cfg.n_steps();
    let mut u = u0.clone();
    let mut yosida_w = u0.clone();
    for k in 1..=n {
        let t_prev = cfg.time_of(k - 1);
        let t = cfg.time_of(k);
        let dt = t - t_prev;
        let mut multiplier = None;
        let mut inner = 0;
        let next = match cfg.scheme {
            Scheme::Explicit => explicit_unchecked(g, &u, p, dt),
            Scheme::ImplicitObstacle => step_implicit_obstacle(g, &u, p, dt, cfg.splitting, cfg).map(|s| {
                multiplier = Some(s.multiplier);
                inner = s.iterations;
                s.u
            }),
            Scheme::Yosida => resolvent_from(g, &u, &yosida_w, cfg.yosida_lambda, cfg.newton_tol, cfg.newton_max_iter)
                .and_then(|(w, its)| {
                    inner = its;
                    let rhs = yosida_rhs_from_resolvent(g, &u, &w, p)?;
                    yosida_w = w;
                    Ok(u.axpy(dt, &rhs))
                }),
        };
        let next = match next.and_then(|v| g.validate(&v).map(|_| v)) {
            Ok(v) => v,
            Err(e) => return Err(fail(traj, e)),
        };
        let (snap, mut stats) = match record(g, p, u0, &u, &next, t, dt) {
            Ok(x) => x,
            Err(e) => return Err(fail(traj, e)),
        };
        stats.inner_iterations = inner;
        if let Some(m) = &multiplier {
            stats.eta_hat_l2 = grid::norm_l2(g, m);
        }
        traj.diagnostics.push(snap);
        traj.steps.push(stats);
        if k % cfg.snapshot_stride == 0 || k == n {
            traj.snapshots.push(Snapshot { step: k, t, u: next.clone(), multiplier });
        }
        u = next;
    }
    traj.wall_time_s = started.seconds();
    Ok(traj)
}

/// Convenience for callers that only need `(r)₊` as the exact velocity field.
pub fn exact_velocity(g: &Grid, u: &Field, p: &ModelParams) -> Result<Field> {
    Ok(positive_part(&residual(g, u, p)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::energy;
    use crate::obstacle::brute_force_obstacle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn one() -> ModelParams {
        ModelParams::new(1.0).unwrap()
    }

    fn sine(g: &Grid, c: f64) -> Field {
        g.sample(|x| c * (PI * x[0]).sin())
    }

    #[test]
    fn explicit_fixed_points_and_hand_value() {
        let g = Grid::interval(0.0, 1.0, 15).unwrap();
        let dt = g.explicit_dt_bound();
        let u = sine(&g, 1.0);
        assert_eq!(step_explicit(&g, &u, &one(), dt).unwrap(), u);
        assert_eq!(step_explicit(&g, &g.zeros(), &one(), dt).unwrap(), g.zeros());

        let g = Grid::interval(0.0, 1.0, 3).unwrap();
        let h2 = 1.0 / 16.0;
        let dt = h2 / 4.0;
        let u = Field::from_vec(vec![0.1, 0.2, 0.1]);
        let next = step_explicit(&g, &u, &one(), dt).unwrap();
        let ext = [0.0, 0.1, 0.2, 0.1, 0.0];
        for i in 0..3 {
            let v: f64 = ext[i + 1];
            let r = (ext[i] - 2.0 * v + ext[i + 2]) / h2 - v.powi(3) + v;
            assert!((next[i] - (v + dt * r.max(0.0))).abs() < 1e-15);
        }
        assert!(matches!(step_explicit(&g, &u, &one(), h2), Err(Error::Cfl { .. })));
    }

    #[test]
    fn implicit_trivial_cases() {
        let g = Grid::interval(0.0, 1.0, 31).unwrap();
        let cfg = SolverConfig::new(Scheme::ImplicitObstacle, 0.01, 1.0);
        let p = one();
        for split in [Splitting::ConvexSplit, Splitting::FullyImplicit] {
            let z = step_implicit_obstacle(&g, &g.zeros(), &p, 0.01, split, &cfg).unwrap();
            assert_eq!(z.u, g.zeros());
            assert_eq!(z.multiplier, g.zeros());
            let u = sine(&g, 0.9);
            let s = step_implicit_obstacle(&g, &u, &p, 0.01, split, &cfg).unwrap();
            assert_eq!(s.u, u);
            let r = residual(&g, &u, &p).unwrap();
            assert!(s.multiplier.sub(&r).max_abs() < 1e-9);
        }
        assert!(step_implicit_obstacle(&g, &g.zeros(), &p, 2.0, Splitting::FullyImplicit, &cfg).is_err());
    }

    #[test]
    fn implicit_matches_enumeration_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = one();
        let cfg = SolverConfig::new(Scheme::ImplicitObstacle, 0.01, 1.0);
        for _ in 0..25 {
            let n = rng.gen_range(1..=12);
            let g = Grid::interval(0.0, 1.0, n).unwrap();
            let prev = Field::from_vec((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
            for split in [Splitting::ConvexSplit, Splitting::FullyImplicit] {
                let step = step_implicit_obstacle(&g, &prev, &p, 0.01, split, &cfg).unwrap();
                let (src, imp) = match split {
                    Splitting::ConvexSplit => (prev.scale(100.0 + 1.0), false),
                    Splitting::FullyImplicit => (prev.scale(100.0), true),
                };
                let prob = ObstacleProblem::new(g.clone(), prev.clone(), 100.0, src, imp, p).unwrap();
                let (oracle, _) = brute_force_obstacle(&prob).unwrap();
                assert!(step.u.sub(&oracle).max_abs() <= 1e-10);
                // complementarity holds exactly by construction of the multiplier
                for i in 0..n {
                    assert!(step.u[i] >= prev[i]);
                    assert!(step.multiplier[i] <= 0.0);
                    assert_eq!((step.u[i] - prev[i]).min(-step.multiplier[i]), 0.0);
                }
            }
        }
    }

    #[test]
    fn resolvent_properties() {
        let g = Grid::interval(0.0, 1.0, 40).unwrap();
        assert_eq!(resolvent_jlambda(&g, &g.zeros(), 0.1, 1e-12, 50).unwrap(), g.zeros());
        let v = g.sample(|x| (x[0] * (1.0 - x[0]) * 4.0).powi(2));
        let mut prev = f64::INFINITY;
        for lam in [1e-1, 1e-2, 1e-3] {
            let w = resolvent_jlambda(&g, &v, lam, 1e-12, 50).unwrap();
            let d = norm_l2(&g, &w.sub(&v));
            assert!(d < prev);
            prev = d;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a = Field::from_vec((0..40).map(|_| rng.gen_range(-2.0..2.0)).collect());
            let b = Field::from_vec((0..40).map(|_| rng.gen_range(-2.0..2.0)).collect());
            let lam = rng.gen_range(1e-3..1.0);
            let ja = resolvent_jlambda(&g, &a, lam, 1e-12, 50).unwrap();
            let jb = resolvent_jlambda(&g, &b, lam, 1e-12, 50).unwrap();
            assert!(norm_l2(&g, &ja.sub(&jb)) <= norm_l2(&g, &a.sub(&b)) + 1e-12);
        }
        assert!(resolvent_jlambda(&g, &v, 0.0, 1e-12, 50).is_err());
    }

    #[test]
    fn yosida_rhs_converges_as_lambda_shrinks() {
        let g = Grid::interval(0.0, 1.0, 63).unwrap();
        let p = one();
        let u = g.sample(|x| 0.5 * (-((x[0] - 0.4) / 0.1).powi(2)).exp());
        let exact = exact_velocity(&g, &u, &p).unwrap();
        let mut prev = f64::INFINITY;
        for lam in [1e-1, 1e-2, 1e-3] {
            let rhs = yosida_rhs(&g, &u, &p, lam, 1e-12, 50).unwrap();
            let d = norm_l2(&g, &rhs.sub(&exact));
            assert!(d < prev, "λ = {lam}: {d} !< {prev}");
            prev = d;
        }
        assert_eq!(step_yosida(&g, &g.zeros(), &p, 1e-5, 0.01).unwrap(), g.zeros());
        let next = step_yosida(&g, &u, &p, g.explicit_dt_bound() / 2.0, 0.01).unwrap();
        assert!(next.sub(&u).min() >= 0.0);
    }

    #[test]
    fn config_validation() {
        let g = Grid::interval(0.0, 1.0, 127).unwrap();
        let p = one();
        assert!(SolverConfig::new(Scheme::Explicit, 1e-3, 1.0).validate(&g, &p).is_err());
        assert!(SolverConfig::new(Scheme::Explicit, g.explicit_dt_bound(), 1.0).validate(&g, &p).is_ok());
        assert!(SolverConfig::new(Scheme::ImplicitObstacle, 0.0, 1.0).validate(&g, &p).is_err());
        let fi = SolverConfig::new(Scheme::ImplicitObstacle, 1.5, 3.0).with_splitting(Splitting::FullyImplicit);
        assert!(fi.validate(&g, &p).is_err());
        assert!(SolverConfig::new(Scheme::ImplicitObstacle, 1.5, 3.0).validate(&g, &p).is_ok());
        let c = SolverConfig::new(Scheme::ImplicitObstacle, 0.3, 1.0);
        assert_eq!(c.n_steps(), 4);
        assert_eq!(c.time_of(4), 1.0);
        let json = r#"{"scheme":"yosida","dt":1e-5,"t_end":1,"bogus":1}"#;
        assert!(serde_json::from_str::<SolverConfig>(json).is_err());
    }

    #[test]
    fn run_zero_and_supersolution() {
        let g = Grid::interval(0.0, 1.0, 31).unwrap();
        let p = one();
        let dt_ex = g.explicit_dt_bound() / 2.0;
        for cfg in [
            SolverConfig::new(Scheme::Explicit, dt_ex, 0.05),
            SolverConfig::new(Scheme::ImplicitObstacle, 0.01, 0.5),
            SolverConfig::new(Scheme::Yosida, dt_ex, 0.05),
        ] {
            let t = run(&g, &g.zeros(), &p, &cfg).unwrap();
            assert!(t.diagnostics.iter().all(|d| d.energy == 0.0));
            assert_eq!(t.final_state(), &g.zeros());
            let u0 = sine(&g, 1.0);
            let t = run(&g, &u0, &p, &cfg.clone().with_stride(5)).unwrap();
            for s in &t.snapshots {
                assert!(s.u.sub(&u0).max_abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn run_records_every_step() {
        let g = Grid::interval(-1.0, 1.0, 63).unwrap();
        let p = one();
        let u0 = g.sample(|x| x[0].abs() - 1.0);
        let cfg = SolverConfig::new(Scheme::ImplicitObstacle, 0.01, 0.5).with_stride(10);
        let t = run(&g, &u0, &p, &cfg).unwrap();
        assert_eq!(t.diagnostics.len(), 51);
        assert_eq!(t.steps.len(), 51);
        assert_eq!(t.snapshots.iter().map(|s| s.step).collect::<Vec<_>>(), vec![0, 10, 20, 30, 40, 50]);
        let times: Vec<f64> = t.times().collect();
        assert!(times.windows(2).all(|w| w[1] > w[0]) && times[0] == 0.0);
        for w in t.diagnostics.windows(2) {
            assert!(w[1].energy <= w[0].energy + 1e-12);
        }
        assert!(t.steps.iter().all(|s| s.min_increment >= -1e-12 && s.min_above_u0 >= -1e-12));
        assert!(t.snapshots[1..].iter().all(|s| s.multiplier.is_some()));
        let e0 = energy(&g, &u0, &p).unwrap();
        assert_eq!(t.diagnostics[0].energy, e0);
    }

    #[test]
    fn run_reports_partial_trajectory() {
        let g = Grid::interval(0.0, 1.0, 15).unwrap();
        let p = one();
        let mut cfg = SolverConfig::new(Scheme::Yosida, g.explicit_dt_bound(), 0.01);
        cfg.newton_max_iter = 1;
        cfg.newton_tol = 1e-300;
        let err = run(&g, &sine(&g, 0.5), &p, &cfg).unwrap_err();
        assert!(matches!(err.error, Error::NotConverged { .. }));
        assert_eq!(err.partial.diagnostics.len(), 1);
        let bad = SolverConfig::new(Scheme::Explicit, 1.0, 1.0);
        assert!(matches!(run(&g, &g.zeros(), &p, &bad).unwrap_err().error, Error::Cfl { .. }));
    }

    #[test]
    fn stats_row_round_trip() {
        let s = StepStats { t: 0.5, dt: 0.01, min_increment: 1e-3, inner_iterations: 4, ..Default::default() };
        assert_eq!(StepStats::parse_csv_row(&s.csv_row()).unwrap(), s);
    }
}
