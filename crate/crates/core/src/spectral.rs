//! Smallest Dirichlet eigenvalue of the discrete Schrödinger operator `−Δ_h + V`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{dot, laplacian, norm_l2, Field, Grid};
use crate::linalg::ShiftedLaplacian;
use crate::model::ModelParams;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenResult {
    #[serde(rename = "lambda")]
    pub lambda_min: f64,
    /// Ground state with `‖·‖₂ = 1` and nonnegative entries.
    #[serde(skip)]
    pub eigenfield: Field,
    pub iterations: usize,
    /// `‖(−Δ_h + V)φ − λφ‖₂`.
    pub residual: f64,
}

fn apply(g: &Grid, v: &Field, x: &Field) -> Result<Field> {
    let lap = laplacian(g, x)?;
    Ok(Field::from_vec((0..x.len()).map(|i| -lap[i] + v[i] * x[i]).collect()))
}

/// Inverse power iteration on `−Δ_h + V + s` with `s = max(0, −min V) + 1`.
pub fn min_eig(g: &Grid, v: &Field, tol: f64, max_iter: usize) -> Result<EigenResult> {
    g.validate(v)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("eigen tolerance must be positive, got {tol}")));
    }
    let s = (-v.min()).max(0.0) + 1.0;
    let diag: Vec<f64> = v.values().iter().map(|x| x + s).collect();
    let op = ShiftedLaplacian { grid: g, diag: &diag, frozen: None };
    let normalize = |x: Field| {
        let n = norm_l2(g, &x);
        x.scale(1.0 / n)
    };
    let mut x = normalize(g.sample(|_| 1.0));
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        x = normalize(Field::from_vec(op.solve(x.values())?));
        let ax = apply(g, v, &x)?;
        let lambda = dot(x.values(), ax.values()) * g.cell_volume();
        residual = norm_l2(g, &ax.axpy(-lambda, &x));
        if residual <= tol {
            if x.values().iter().sum::<f64>() < 0.0 {
                x = x.scale(-1.0);
            }
            return Ok(EigenResult { lambda_min: lambda, eigenfield: x, iterations: it, residual });
        }
    }
    Err(Error::NotConverged { solver: "inverse power iteration", iterations: max_iter, residual })
}

/// `σ = λ_min(3u₀²) − κ`.
pub fn sigma_rate(g: &Grid, u0: &Field, p: &ModelParams, tol: f64) -> Result<f64> {
    g.validate(u0)?;
    if let Some(i) = u0.values().iter().position(|&x| x < 0.0) {
        return Err(Error::InvalidParameter(format!("decay rate needs u₀ ≥ 0; node {i} is {}", u0[i])));
    }
    let v = u0.map(|x| 3.0 * x * x);
    Ok(min_eig(g, &v, tol, 10_000)?.lambda_min - p.kappa)
}

/// `(2/h²)(1 − cos(πh/L))` summed over axes: smallest eigenvalue of `−Δ_h`.
pub fn laplacian_ground_eigenvalue(g: &Grid) -> f64 {
    g.axes()
        .iter()
        .map(|a| 2.0 / (a.h * a.h) * (1.0 - (std::f64::consts::PI * a.h / a.length()).cos()))
        .sum()
}
