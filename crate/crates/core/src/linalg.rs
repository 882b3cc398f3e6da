//! Solves with the shifted Dirichlet operator `diag(d) − Δ_h`, optionally with
//! a set of frozen nodes whose unknowns are pinned to zero.
//!
//! 1D systems are tridiagonal and go through an `LDLᵀ` elimination whose
//! pivots double as a positive-definiteness certificate. 2D systems use
//! matrix-free conjugate gradients.

use crate::error::{Error, Result};
use crate::grid::{dot, neighbour_sum, Grid};

/// Relative residual target for conjugate gradients.
pub const CG_RTOL: f64 = 1e-12;

pub struct ShiftedLaplacian<'a> {
    pub grid: &'a Grid,
    pub diag: &'a [f64],
    /// `true` marks a node whose unknown is pinned to zero.
    pub frozen: Option<&'a [bool]>,
}

impl<'a> ShiftedLaplacian<'a> {
    fn is_free(&self, i: usize) -> bool {
        self.frozen.map_or(true, |f| !f[i])
    }

    /// `y = (diag − Δ_h) x` on free nodes, `y = 0` on frozen ones. Frozen
    /// entries of `x` are treated as zero.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let lap_diag = 2.0 * self.grid.inv_h2_sum();
        match self.frozen {
            None => {
                for i in 0..x.len() {
                    y[i] = (self.diag[i] + lap_diag) * x[i] - neighbour_sum(self.grid, x, i);
                }
            }
            Some(f) => {
                let masked: Vec<f64> =
                    x.iter().zip(f).map(|(&v, &fr)| if fr { 0.0 } else { v }).collect();
                for i in 0..x.len() {
                    y[i] = if f[i] {
                        0.0
                    } else {
                        (self.diag[i] + lap_diag) * masked[i] - neighbour_sum(self.grid, &masked, i)
                    };
                }
            }
        }
    }

    /// Solve for `x` with `x = 0` on frozen nodes; right-hand side entries on
    /// frozen nodes are ignored.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if self.grid.dim() == 1 {
            self.solve_tridiagonal(rhs)
        } else {
            self.solve_cg(rhs, CG_RTOL, 20 * rhs.len() + 100)
        }
    }

    pub fn solve_tridiagonal(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = rhs.len();
        let h = self.grid.axis(0).h;
        let off = -1.0 / (h * h);
        let lap_diag = 2.0 / (h * h);
        // Frozen rows become identity rows with zero right-hand side; their
        // couplings to free neighbours vanish because the unknown is zero.
        let mut d = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut lo = vec![0.0; n];
        for i in 0..n {
            if self.is_free(i) {
                d[i] = self.diag[i] + lap_diag;
                b[i] = rhs[i];
                if i > 0 && self.is_free(i - 1) {
                    lo[i] = off;
                }
            } else {
                d[i] = 1.0;
            }
        }
        // Symmetric elimination: lo[i] couples i-1 and i.
        for i in 1..n {
            if d[i - 1] <= 0.0 {
                return Err(Error::NotPositiveDefinite(format!("pivot {} at row {}", d[i - 1], i - 1)));
            }
            let m = lo[i] / d[i - 1];
            d[i] -= m * lo[i];
            b[i] -= m * b[i - 1];
        }
        if n > 0 && d[n - 1] <= 0.0 {
            return Err(Error::NotPositiveDefinite(format!("pivot {} at row {}", d[n - 1], n - 1)));
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let upper = if i + 1 < n { lo[i + 1] * x[i + 1] } else { 0.0 };
            x[i] = (b[i] - upper) / d[i];
        }
        for i in 0..n {
            if !self.is_free(i) {
                x[i] = 0.0;
            }
        }
        Ok(x)
    }

    pub fn solve_cg(&self, rhs: &[f64], rtol: f64, max_iter: usize) -> Result<Vec<f64>> {
        let n = rhs.len();
        let mut b = rhs.to_vec();
        if let Some(f) = self.frozen {
            for i in 0..n {
                if f[i] {
                    b[i] = 0.0;
                }
            }
        }
        let bnorm = dot(&b, &b).sqrt();
        let mut x = vec![0.0; n];
        if bnorm == 0.0 {
            return Ok(x);
        }
        let mut r = b;
        let mut p = r.clone();
        let mut ap = vec![0.0; n];
        let mut rr = dot(&r, &r);
        for it in 0..max_iter {
            if rr.sqrt() <= rtol * bnorm {
                return Ok(x);
            }
            self.apply(&p, &mut ap);
            let pap = dot(&p, &ap);
            if pap <= 0.0 {
                return Err(Error::NotPositiveDefinite(format!("CG curvature {pap:e} at iteration {it}")));
            }
            let alpha = rr / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let rr_new = dot(&r, &r);
            let beta = rr_new / rr;
            rr = rr_new;
            for i in 0..n {
                p[i] = r[i] + beta * p[i];
            }
        }
        if rr.sqrt() <= rtol * bnorm {
            Ok(x)
        } else {
            Err(Error::NotConverged { solver: "conjugate gradient", iterations: max_iter, residual: rr.sqrt() / bnorm })
        }
    }
}
