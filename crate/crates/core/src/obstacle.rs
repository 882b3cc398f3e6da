//! Solvers for the discrete obstacle problem
//!
//! ```text
//! u ≥ ψ,   F(u) ≥ 0,   (u − ψ)·F(u) = 0   (elementwise)
//! F(u) = (a − κ_imp)·u − Δ_h u + u³ − b
//! ```
//!
//! which covers both a time step of the parabolic obstacle problem
//! (`a = 1/dt`, `ψ = u_prev`) and the elliptic equilibrium problem
//! (`a = 0`, `b = 0`, `κ_imp = κ`, `ψ = u₀`). The step multiplier is
//! `η̂ = −F(u)` restricted to the contact set.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{neighbour_sum, Field, Grid};
use crate::linalg::ShiftedLaplacian;
use crate::model::ModelParams;

/// Active-set weighting between multiplier and constraint slack.
const ACTIVE_SET_C: f64 = 1.0;

#[derive(Debug, Clone)]
pub struct ObstacleProblem {
    pub grid: Grid,
    pub obstacle: Field,
    /// Mass coefficient `a ≥ 0` (`1/dt` for a time step, `0` for equilibria).
    pub mass: f64,
    pub source: Field,
    /// Whether `−κu` is part of the operator.
    pub kappa_implicit: bool,
    pub params: ModelParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleSolution {
    pub u: Field,
    /// `η̂ ≤ 0`, supported on the contact set.
    pub multiplier: Field,
    /// Outer iterations (sweeps for PGS, active-set updates for PDAS).
    pub iterations: usize,
    /// Newton iterations summed over all active-set updates (0 for PGS).
    pub newton_iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ComplementarityReport {
    pub primal_violation: f64,
    pub dual_violation: f64,
    pub gap: f64,
    pub stationarity_residual: f64,
}

impl ComplementarityReport {
    pub fn max_entry(&self) -> f64 {
        self.primal_violation
            .max(self.dual_violation)
            .max(self.gap)
            .max(self.stationarity_residual)
    }
}

impl ObstacleProblem {
    pub fn new(
        grid: Grid,
        obstacle: Field,
        mass: f64,
        source: Field,
        kappa_implicit: bool,
        params: ModelParams,
    ) -> Result<Self> {
        grid.validate(&obstacle)?;
        grid.validate(&source)?;
        if !(mass >= 0.0 && mass.is_finite()) {
            return Err(Error::InvalidParameter(format!("mass coefficient {mass} must be ≥ 0")));
        }
        Ok(Self { grid, obstacle, mass, source, kappa_implicit, params })
    }

    /// Elliptic obstacle problem with obstacle `u0`.
    pub fn elliptic(grid: Grid, u0: Field, params: ModelParams) -> Result<Self> {
        let zero = grid.zeros();
        Self::new(grid, u0, 0.0, zero, true, params)
    }

    fn linear_coeff(&self) -> f64 {
        self.mass - if self.kappa_implicit { self.params.kappa } else { 0.0 }
    }

    /// Smallest eigenvalue of the Hessian `(a − κ_imp) − Δ_h + 3u²` over all
    /// `u`, i.e. the strong-convexity modulus of the underlying functional.
    pub fn convexity_modulus(&self) -> f64 {
        let lam: f64 = self
            .grid
            .axes()
            .iter()
            .map(|ax| 2.0 / (ax.h * ax.h) * (1.0 - (std::f64::consts::PI * ax.h / ax.length()).cos()))
            .sum();
        self.linear_coeff() + lam
    }

    pub fn is_convex(&self) -> bool {
        self.convexity_modulus() > 0.0
    }

    /// `F(u)`.
    pub fn operator(&self, u: &Field) -> Field {
        let g = &self.grid;
        let c = self.linear_coeff() + 2.0 * g.inv_h2_sum();
        let v = u.values();
        let b = self.source.values();
        Field::from_vec(
            (0..v.len())
                .map(|i| c * v[i] - neighbour_sum(g, v, i) + v[i] * v[i] * v[i] - b[i])
                .collect(),
        )
    }

    /// `η̂ = min(−F, 0)` on nodes in contact with the obstacle, zero elsewhere.
    pub fn multiplier(&self, u: &Field) -> Field {
        let f = self.operator(u);
        let psi = self.obstacle.values();
        Field::from_vec(
            u.values()
                .iter()
                .zip(psi)
                .zip(f.values())
                .map(|((&ui, &pi), &fi)| if ui <= pi { (-fi).min(0.0) } else { 0.0 })
                .collect(),
        )
    }

    pub fn report(&self, u: &Field) -> ComplementarityReport {
        let f = self.operator(u);
        let mut rep = ComplementarityReport::default();
        for ((&ui, &pi), &fi) in u.values().iter().zip(self.obstacle.values()).zip(f.values()) {
            let eta = -fi;
            rep.primal_violation = rep.primal_violation.max(pi - ui);
            rep.dual_violation = rep.dual_violation.max(eta);
            rep.gap = rep.gap.max(((ui - pi) * eta).abs());
            if ui > pi {
                rep.stationarity_residual = rep.stationarity_residual.max(fi.abs());
            }
        }
        rep
    }

    fn solution(&self, u: Field, iterations: usize, converged: bool) -> ObstacleSolution {
        let multiplier = self.multiplier(&u);
        ObstacleSolution { u, multiplier, iterations, newton_iterations: 0, converged }
    }

    fn check_init(&self, u_init: &Field) -> Result<Field> {
        self.grid.validate(u_init)?;
        Ok(u_init.zip_map(&self.obstacle, f64::max))
    }
}

/// Unique real root of `s³ + c·s = d` for `c > 0`, by Newton from the side on
/// which the cubic is convex (monotone convergence).
fn cubic_root(c: f64, d: f64) -> f64 {
    if d == 0.0 {
        return 0.0;
    }
    let (sign, d) = if d < 0.0 { (-1.0, -d) } else { (1.0, d) };
    let mut s = (d / c).min(d.cbrt());
    for _ in 0..200 {
        let f = s * s * s + c * s - d;
        let next = s - f / (3.0 * s * s + c);
        if !(next < s) {
            break;
        }
        s = next;
    }
    sign * s
}

/// Projected nonlinear Gauss–Seidel. Each node solves its scalar cubic with
/// neighbours frozen, then projects onto `[ψ_i, ∞)`. Stops when a full sweep
/// changes no node by more than `tol`. A non-converged result is returned with
/// `converged = false`.
pub fn solve_pgs(prob: &ObstacleProblem, u_init: &Field, tol: f64, max_iter: usize) -> Result<ObstacleSolution> {
    let mut u = prob.check_init(u_init)?.into_vec();
    let g = &prob.grid;
    let c = prob.linear_coeff() + 2.0 * g.inv_h2_sum();
    if c <= 0.0 {
        return Err(Error::NotPositiveDefinite(format!("nodal coefficient {c} ≤ 0")));
    }
    let psi = prob.obstacle.values();
    let b = prob.source.values();
    for it in 1..=max_iter {
        let mut change: f64 = 0.0;
        for i in 0..u.len() {
            let d = b[i] + neighbour_sum(g, &u, i);
            let s = cubic_root(c, d).max(psi[i]);
            change = change.max((s - u[i]).abs());
            u[i] = s;
        }
        if change <= tol {
            return Ok(prob.solution(Field::from_vec(u), it, true));
        }
    }
    Ok(prob.solution(Field::from_vec(u), max_iter, false))
}

/// Damped Newton on `F_I(u) = 0` over the free nodes with `u` held fixed on
/// frozen ones. Returns the iteration count.
fn newton_reduced(prob: &ObstacleProblem, u: &mut Field, frozen: &[bool], tol: f64, max_iter: usize) -> Result<usize> {
    let g = &prob.grid;
    let lin = prob.linear_coeff();
    let merit = |f: &Field| -> f64 {
        f.values().iter().zip(frozen).filter(|(_, &fr)| !fr).map(|(v, _)| v * v).sum::<f64>()
    };
    let max_free = |f: &Field| -> f64 {
        f.values().iter().zip(frozen).filter(|(_, &fr)| !fr).fold(0.0, |m, (v, _)| m.max(v.abs()))
    };
    let mut f = prob.operator(u);
    for it in 0..max_iter {
        if max_free(&f) <= tol {
            return Ok(it);
        }
        let diag: Vec<f64> = u.values().iter().map(|v| lin + 3.0 * v * v).collect();
        let rhs: Vec<f64> = f.values().iter().map(|v| -v).collect();
        let op = ShiftedLaplacian { grid: g, diag: &diag, frozen: Some(frozen) };
        let delta = Field::from_vec(op.solve(&rhs)?);
        let step_size = delta.max_abs();
        if step_size <= 1e-15 * (1.0 + u.max_abs()) {
            return Ok(it);
        }
        let m0 = merit(&f);
        let mut t = 1.0;
        loop {
            let trial = u.axpy(t, &delta);
            let ft = prob.operator(&trial);
            let m = merit(&ft);
            if m <= (1.0 - 1e-4 * t) * m0 || (t < 1.0 && step_size * t <= 1e-15 * (1.0 + u.max_abs())) {
                *u = trial;
                f = ft;
                break;
            }
            t *= 0.5;
            if t < 1e-12 {
                return Err(Error::NotConverged { solver: "reduced Newton line search", iterations: it, residual: max_free(&f) });
            }
        }
    }
    let res = max_free(&f);
    if res <= tol {
        Ok(max_iter)
    } else {
        Err(Error::NotConverged { solver: "reduced Newton", iterations: max_iter, residual: res })
    }
}

/// Primal–dual active-set (semismooth Newton) iteration. The active set is
/// `{i : λ_i + c(ψ_i − u_i) > 0}` with `λ = F(u)` on the current active set;
/// ties are inactive. On a revisited active set the solve falls back to
/// [`solve_pgs`].
pub fn solve_active_set(prob: &ObstacleProblem, u_init: &Field, tol: f64, max_iter: usize) -> Result<ObstacleSolution> {
    match active_set_core(prob, u_init, tol, max_iter) {
        Err(Error::Cycling(_)) => {
            let sol = solve_pgs(prob, u_init, tol.min(1e-13), 100_000)?;
            if sol.converged {
                Ok(sol)
            } else {
                Err(Error::Cycling(max_iter))
            }
        }
        other => other,
    }
}

pub(crate) fn active_set_core(prob: &ObstacleProblem, u_init: &Field, tol: f64, max_iter: usize) -> Result<ObstacleSolution> {
    let n = prob.grid.len();
    let psi = prob.obstacle.values().to_vec();
    let mut u = prob.check_init(u_init)?;
    let f0 = prob.operator(&u);
    let mut active: Vec<bool> =
        (0..n).map(|i| f0[i] + ACTIVE_SET_C * (psi[i] - u[i]) > 0.0).collect();
    let mut seen: HashSet<Vec<bool>> = HashSet::new();
    let mut newton_total = 0;
    for it in 1..=max_iter {
        seen.insert(active.clone());
        for i in 0..n {
            if active[i] {
                u[i] = psi[i];
            }
        }
        newton_total += newton_reduced(prob, &mut u, &active, tol, 100)?;
        let f = prob.operator(&u);
        let next: Vec<bool> = (0..n)
            .map(|i| {
                let lam = if active[i] { f[i] } else { 0.0 };
                lam + ACTIVE_SET_C * (psi[i] - u[i]) > 0.0
            })
            .collect();
        if next == active {
            let mut sol = prob.solution(u, it, true);
            sol.newton_iterations = newton_total;
            return Ok(sol);
        }
        if seen.contains(&next) {
            return Err(Error::Cycling(it));
        }
        active = next;
    }
    Err(Error::NotConverged { solver: "active set", iterations: max_iter, residual: prob.report(&u).max_entry() })
}

/// Exhaustive search over all `2ⁿ` active sets (`n ≤ 12`). Each candidate is
/// solved by dense Newton with its own assembled Jacobian and kept only if it
/// passes the full KKT check. Only convex instances are accepted.
pub fn brute_force_obstacle(prob: &ObstacleProblem) -> Result<(Field, Field)> {
    let n = prob.grid.len();
    if n > 12 {
        return Err(Error::InvalidParameter(format!("brute force limited to 12 nodes, got {n}")));
    }
    if !prob.is_convex() {
        return Err(Error::InvalidParameter("instance is not convex".into()));
    }
    let psi = prob.obstacle.values();
    let scale = 1.0
        + prob.source.max_abs()
        + (prob.mass + 2.0 * prob.grid.inv_h2_sum()) * prob.obstacle.max_abs()
        + prob.obstacle.max_abs().powi(3);
    let ktol = 1e-12 * scale;
    for mask in 0u32..(1u32 << n) {
        let active: Vec<bool> = (0..n).map(|i| mask & (1 << i) != 0).collect();
        let Some(u) = dense_newton(prob, &active, ktol) else { continue };
        let f = prob.operator(&u);
        let ok = (0..n).all(|i| {
            if active[i] {
                f[i] >= -ktol
            } else {
                u[i] >= psi[i] - 1e-12 * (1.0 + psi[i].abs())
            }
        });
        if ok {
            let u = u.zip_map(&prob.obstacle, f64::max);
            let mult = prob.multiplier(&u);
            return Ok((u, mult));
        }
    }
    Err(Error::NoKktPoint)
}

fn dense_newton(prob: &ObstacleProblem, active: &[bool], tol: f64) -> Option<Field> {
    let g = &prob.grid;
    let n = g.len();
    let free: Vec<usize> = (0..n).filter(|&i| !active[i]).collect();
    let mut u = prob.obstacle.clone();
    if free.is_empty() {
        return Some(u);
    }
    // Dense −Δ_h, assembled from the stencil applied to unit vectors.
    let mut neg_lap = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        for i in 0..n {
            neg_lap[i][j] = 2.0 * g.inv_h2_sum() * e[i] - neighbour_sum(g, &e, i);
        }
    }
    let lin = prob.linear_coeff();
    let norm_free = |f: &Field| free.iter().map(|&i| f[i] * f[i]).sum::<f64>().sqrt();
    let mut f = prob.operator(&u);
    for _ in 0..100 {
        let fmax = free.iter().fold(0.0f64, |m, &i| m.max(f[i].abs()));
        if fmax <= tol {
            return Some(u);
        }
        let m = free.len();
        let mut a = vec![vec![0.0; m + 1]; m];
        for (r, &i) in free.iter().enumerate() {
            for (c, &j) in free.iter().enumerate() {
                a[r][c] = neg_lap[i][j];
            }
            a[r][r] += lin + 3.0 * u[i] * u[i];
            a[r][m] = -f[i];
        }
        let delta = gauss_solve(a)?;
        let f0 = norm_free(&f);
        let mut t = 1.0;
        loop {
            let mut trial = u.clone();
            for (r, &i) in free.iter().enumerate() {
                trial[i] += t * delta[r];
            }
            let ft = prob.operator(&trial);
            if norm_free(&ft) < (1.0 - 1e-4 * t) * f0 {
                u = trial;
                f = ft;
                break;
            }
            t *= 0.5;
            if t < 1e-10 {
                let fmax = free.iter().fold(0.0f64, |m, &i| m.max(f[i].abs()));
                return (fmax <= 100.0 * tol).then_some(u);
            }
        }
    }
    None
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn gauss_solve(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let m = a.len();
    for col in 0..m {
        let piv = (col..m).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        for r in col + 1..m {
            let factor = a[r][col] / a[col][col];
            if factor != 0.0 {
                for c in col..=m {
                    a[r][c] -= factor * a[col][c];
                }
            }
        }
    }
    let mut x = vec![0.0; m];
    for r in (0..m).rev() {
        let s: f64 = (r + 1..m).map(|c| a[r][c] * x[c]).sum();
        x[r] = (a[r][m] - s) / a[r][r];
    }
    Some(x)
}

/// Equilibrium of the elliptic obstacle problem with obstacle `u0`, polished
/// from a warm start (typically the late state of a run). The problem is not
/// convex in general, so a poor warm start can fail.
pub fn solve_equilibrium(
    g: &Grid,
    u0: &Field,
    p: &ModelParams,
    warm_start: &Field,
    tol: f64,
) -> Result<(Field, Field, ComplementarityReport)> {
    let prob = ObstacleProblem::elliptic(g.clone(), u0.clone(), *p)?;
    let sol = active_set_core(&prob, warm_start, tol.min(1e-10), g.len().max(200) + 1).map_err(|e| {
        Error::EquilibriumDivergence(format!("{e}; try a longer pre-run for the warm start"))
    })?;
    let report = prob.report(&sol.u);
    if report.max_entry() > tol {
        return Err(Error::NotConverged {
            solver: "equilibrium polish",
            iterations: sol.iterations,
            residual: report.max_entry(),
        });
    }
    Ok((sol.u, sol.multiplier, report))
}
