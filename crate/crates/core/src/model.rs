//! The double-well nonlinearity `W'(u) = u³ − κu`, the residual
//! `r = Δu − u³ + κu`, the multiplier `η = −(r)₋`, the energies `E` and `φ`,
//! and membership tests for `D_r` and `B₀`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{self, h1_seminorm_sq, negative_part, norm_lp, Field, Grid, Norm};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub kappa: f64,
}

impl ModelParams {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!("kappa must be positive, got {kappa}")));
        }
        Ok(Self { kappa })
    }

    /// Pointwise lower bound `κ²/4 · |Ω| ≥ −inf E`.
    pub fn m0(&self, g: &Grid) -> f64 {
        self.kappa * self.kappa / 4.0 * g.volume()
    }
}

/// Per-step scalar diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergySnapshot {
    pub t: f64,
    #[serde(rename = "E")]
    pub energy: f64,
    pub phi: f64,
    pub eta_l2: f64,
    pub res_neg_l2sq: f64,
    pub u_l2: f64,
    pub u_l4: f64,
    pub u_linf: f64,
    pub h1: f64,
}

impl EnergySnapshot {
    pub const CSV_HEADER: &'static str = "t,E,phi,eta_l2,res_neg_l2sq,u_l2,u_l4,u_linf,h1";

    pub fn of(g: &Grid, u: &Field, p: &ModelParams, t: f64) -> Result<Self> {
        let r = residual(g, u, p)?;
        let res_neg_l2sq = norm_lp(g, &negative_part(&r), Norm::L2).powi(2);
        let h1sq = h1_seminorm_sq(g, u);
        let l2 = norm_lp(g, u, Norm::L2);
        let l4 = norm_lp(g, u, Norm::L4);
        let phi = 0.5 * h1sq + 0.25 * l4.powi(4);
        Ok(Self {
            t,
            energy: phi - 0.5 * p.kappa * l2 * l2,
            phi,
            eta_l2: res_neg_l2sq.sqrt(),
            res_neg_l2sq,
            u_l2: l2,
            u_l4: l4,
            u_linf: u.max_abs(),
            h1: h1sq.sqrt(),
        })
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.t, self.energy, self.phi, self.eta_l2, self.res_neg_l2sq, self.u_l2, self.u_l4, self.u_linf, self.h1
        )
    }

    pub fn parse_csv_row(line: &str) -> Result<Self> {
        let v = line
            .split(',')
            .map(|c| c.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if v.len() != 9 {
            return Err(Error::Parse(format!("expected 9 columns, got {}", v.len())));
        }
        Ok(Self {
            t: v[0],
            energy: v[1],
            phi: v[2],
            eta_l2: v[3],
            res_neg_l2sq: v[4],
            u_l2: v[5],
            u_l4: v[6],
            u_linf: v[7],
            h1: v[8],
        })
    }
}

pub fn w_prime(u: &Field, p: &ModelParams) -> Field {
    u.map(|v| v * v * v - p.kappa * v)
}

/// `Δ_h u − u³ + κu`
pub fn residual(g: &Grid, u: &Field, p: &ModelParams) -> Result<Field> {
    let lap = grid::laplacian(g, u)?;
    Ok(lap.zip_map(u, |l, v| l - v * v * v + p.kappa * v))
}

/// `η = −(r)₋ = min(r, 0)`.
pub fn eta_of(g: &Grid, u: &Field, p: &ModelParams) -> Result<Field> {
    Ok(residual(g, u, p)?.map(|r| r.min(0.0)))
}

pub fn energy(g: &Grid, u: &Field, p: &ModelParams) -> Result<f64> {
    g.check(u)?;
    Ok(phi_of(g, u)? - 0.5 * p.kappa * norm_lp(g, u, Norm::L2).powi(2))
}

/// `φ(u) = ½‖∇u‖₂² + ¼‖u‖₄⁴`.
pub fn phi_of(g: &Grid, u: &Field) -> Result<f64> {
    g.check(u)?;
    Ok(0.5 * h1_seminorm_sq(g, u) + 0.25 * norm_lp(g, u, Norm::L4).powi(4))
}

/// `‖(Δ_h u − u³ + κu)₋‖₂²`; `u ∈ D_r` iff this is at most `r`.
pub fn dr_value(g: &Grid, u: &Field, p: &ModelParams) -> Result<f64> {
    let r = residual(g, u, p)?;
    Ok(norm_lp(g, &negative_part(&r), Norm::L2).powi(2))
}

/// Membership in the box `‖r‖₂² ≤ c_bound`, `φ(u) ≤ phi_bound` (both closed).
pub fn b0_check(g: &Grid, u: &Field, p: &ModelParams, c_bound: f64, phi_bound: f64) -> Result<bool> {
    if !(c_bound > 0.0 && phi_bound > 0.0) {
        return Err(Error::InvalidParameter("B0 bounds must be positive".into()));
    }
    let r = residual(g, u, p)?;
    let rsq = norm_lp(g, &r, Norm::L2).powi(2);
    Ok(rsq <= c_bound && phi_of(g, u)? <= phi_bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::positive_part;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn one() -> ModelParams {
        ModelParams::new(1.0).unwrap()
    }

    fn first_mode(g: &Grid) -> Field {
        g.sample(|x| (PI * x[0]).sin())
    }

    fn lambda_h(h: f64) -> f64 {
        2.0 / (h * h) * (1.0 - (PI * h).cos())
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(0.0).is_err());
        assert!(ModelParams::new(-1.0).is_err());
        assert!(ModelParams::new(f64::NAN).is_err());
    }

    #[test]
    fn w_prime_values() {
        let p = one();
        assert_eq!(w_prime(&Field::zeros(3), &p), Field::zeros(3));
        assert_eq!(w_prime(&Field::constant(3, 1.0), &p), Field::zeros(3));
        assert_eq!(w_prime(&Field::constant(3, 2.0), &p), Field::constant(3, 6.0));
    }

    #[test]
    fn residual_hand_evaluation() {
        let g = Grid::interval(0.0, 1.0, 3).unwrap();
        let p = ModelParams::new(1.5).unwrap();
        let u = Field::from_vec(vec![0.3, -0.4, 0.9]);
        let r = residual(&g, &u, &p).unwrap();
        let ext = [0.0, 0.3, -0.4, 0.9, 0.0];
        for i in 0..3 {
            let lap = (ext[i] - 2.0 * ext[i + 1] + ext[i + 2]) * 16.0;
            let v = ext[i + 1];
            assert_relative_eq!(r[i], lap - v * v * v + 1.5 * v, max_relative = 1e-14);
        }
    }

    #[test]
    fn eigenmode_residual_is_nonpositive() {
        let g = Grid::interval(0.0, 1.0, 63).unwrap();
        let h = g.axis(0).h;
        let c = 0.8;
        let phi = first_mode(&g);
        let u = phi.scale(c);
        let r = residual(&g, &u, &one()).unwrap();
        for i in 0..u.len() {
            let expected = (1.0 - lambda_h(h)) * c * phi[i] - (c * phi[i]).powi(3);
            assert!((r[i] - expected).abs() < 1e-9);
            assert!(r[i] <= 0.0);
        }
        // every node is in contact, so (r)₋ = −r
        let d = dr_value(&g, &u, &one()).unwrap();
        assert_relative_eq!(d, norm_lp(&g, &r, Norm::L2).powi(2), max_relative = 1e-14);
        assert_eq!(eta_of(&g, &u, &one()).unwrap(), r);
    }

    #[test]
    fn eta_elementwise() {
        let g = Grid::interval(0.0, 1.0, 3).unwrap();
        let u = Field::from_vec(vec![0.5, 0.0, 0.5]);
        let r = residual(&g, &u, &one()).unwrap();
        assert!(r[1] > 0.0 && r[0] < 0.0);
        let eta = eta_of(&g, &u, &one()).unwrap();
        for i in 0..3 {
            assert_eq!(eta[i], r[i].min(0.0));
        }
        assert_eq!(eta_of(&g, &g.zeros(), &one()).unwrap(), g.zeros());
    }

    #[test]
    fn energy_of_ones() {
        let g = Grid::interval(0.0, 1.0, 127).unwrap();
        let h = 1.0 / 128.0;
        let u = Field::constant(127, 1.0);
        // only the two boundary edges carry gradient: h·2·(1/h)² = 2/h
        let direct = 0.5 * (2.0 / h) + 0.25 * 127.0 * h - 0.5 * 127.0 * h;
        assert_relative_eq!(energy(&g, &u, &one()).unwrap(), direct, max_relative = 1e-13);
        assert_eq!(energy(&g, &g.zeros(), &one()).unwrap(), 0.0);
    }

    #[test]
    fn dr_value_of_abs_edge_approaches_quadrature() {
        // ∫_{-1}^{1} (u³ − u)² dx with u = |x| − 1 is 2(1/7 − 2/5 + 1/3) = 16/105
        let r_exact = 16.0 / 105.0;
        let quad = simpson(|x| {
            let u = x.abs() - 1.0;
            (u * u * u - u).powi(2)
        }, -1.0, 1.0, 20_000);
        assert!((quad - r_exact).abs() < 1e-12);
        let p = one();
        let mut prev = f64::INFINITY;
        for n in [63, 127, 255, 511] {
            let g = Grid::interval(-1.0, 1.0, n).unwrap();
            let u = g.sample(|x| x[0].abs() - 1.0);
            let d = dr_value(&g, &u, &p).unwrap();
            let err = (d - r_exact).abs();
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 1e-3);
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn b0_membership() {
        let g = Grid::interval(0.0, 1.0, 15).unwrap();
        let p = one();
        assert!(b0_check(&g, &g.zeros(), &p, 1.0, 1.0).unwrap());
        let big = Field::constant(15, 10.0);
        assert!(!b0_check(&g, &big, &p, 1e12, 1.0).unwrap());
        let u = first_mode(&g).scale(0.3);
        let rsq = norm_lp(&g, &residual(&g, &u, &p).unwrap(), Norm::L2).powi(2);
        assert!(b0_check(&g, &u, &p, rsq, 1e6).unwrap());
        assert!(!b0_check(&g, &u, &p, rsq * (1.0 - 1e-12), 1e6).unwrap());
        assert!(b0_check(&g, &u, &p, 0.0, 1.0).is_err());
    }

    #[test]
    fn snapshot_row_round_trip() {
        let g = Grid::interval(0.0, 1.0, 9).unwrap();
        let u = first_mode(&g).scale(0.4);
        let s = EnergySnapshot::of(&g, &u, &one(), 0.125).unwrap();
        let back = EnergySnapshot::parse_csv_row(&s.csv_row()).unwrap();
        assert_eq!(s, back);
        assert!(EnergySnapshot::parse_csv_row("1,2,3").is_err());
    }

    fn field_strategy(n: usize, lo: f64, hi: f64) -> impl Strategy<Value = Field> {
        prop::collection::vec(lo..hi, n).prop_map(Field::from_vec)
    }

    proptest! {
        #[test]
        fn eta_sign_and_support(u in field_strategy(20, -2.0, 2.0), kappa in 0.1f64..3.0) {
            let g = Grid::interval(0.0, 2.0, 20).unwrap();
            let p = ModelParams::new(kappa).unwrap();
            let r = residual(&g, &u, &p).unwrap();
            let eta = eta_of(&g, &u, &p).unwrap();
            let rp = positive_part(&r);
            for i in 0..20 {
                prop_assert!(eta[i] <= 0.0);
                prop_assert_eq!(eta[i] * rp[i], 0.0);
            }
            let snap = EnergySnapshot::of(&g, &u, &p, 0.0).unwrap();
            let d = dr_value(&g, &u, &p).unwrap();
            prop_assert!((snap.eta_l2.powi(2) - d).abs() <= 1e-10 * d.max(1e-300));
        }

        #[test]
        fn energy_bounds(u in field_strategy(15, -3.0, 3.0), kappa in 0.1f64..4.0) {
            let g = Grid::interval(-1.0, 1.0, 15).unwrap();
            let p = ModelParams::new(kappa).unwrap();
            let e = energy(&g, &u, &p).unwrap();
            // the discrete domain volume seen by the quadrature is n·h ≤ |Ω|
            prop_assert!(e >= -p.m0(&g) - 1e-12);
            let phi = phi_of(&g, &u).unwrap();
            prop_assert!(phi >= 0.0);
            prop_assert!((e - (phi - 0.5 * kappa * norm_lp(&g, &u, Norm::L2).powi(2))).abs() <= 1e-12 * (1.0 + phi));
            prop_assert!(phi_of(&g, &u.scale(2.0)).unwrap() >= 4.0 * phi);
        }

        #[test]
        fn dr_plus_convex(
            a in field_strategy(12, 0.0, 1.5),
            b in field_strategy(12, 0.0, 1.5),
            theta in 0.0f64..1.0,
        ) {
            let g = Grid::interval(0.0, 1.0, 12).unwrap();
            let p = ModelParams::new(1.0).unwrap();
            let r = dr_value(&g, &a, &p).unwrap().max(dr_value(&g, &b, &p).unwrap());
            let mix = a.scale(1.0 - theta).add(&b.scale(theta));
            prop_assert!(dr_value(&g, &mix, &p).unwrap() <= r + 1e-9);
        }
    }
}
