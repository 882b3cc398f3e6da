//! Named initial data.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{field_from_csv, Field, Grid};
use crate::model::{residual, ModelParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum Preset {
    Zero {},
    /// `|x| − a` on `(−a, a)`.
    AbsEdge {},
    /// `−1` at every interior node.
    NegConst {},
    /// `c·φ₁ʰ` with the discrete ground state scaled to unit maximum.
    Eigenfunction { c: f64 },
    /// `height·cos²(π·ρ/(2·width))` for `ρ = |x − center| < width`, zero outside.
    Bump { center: Vec<f64>, width: f64, height: f64 },
    /// Like `Eigenfunction`, but construction fails unless the residual is `≤ 0`.
    Supersolution { c: f64 },
    Custom { path: PathBuf },
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Zero {} => "zero",
            Preset::AbsEdge {} => "abs_edge",
            Preset::NegConst {} => "neg_const",
            Preset::Eigenfunction { .. } => "eigenfunction",
            Preset::Bump { .. } => "bump",
            Preset::Supersolution { .. } => "supersolution",
            Preset::Custom { .. } => "custom",
        }
    }

    pub fn build(&self, g: &Grid, p: &ModelParams) -> Result<Field> {
        match self {
            Preset::Zero {} => Ok(g.zeros()),
            Preset::AbsEdge {} => {
                let ax = g.axis(0);
                if g.dim() != 1 || (ax.start + ax.end).abs() > 1e-12 * ax.length() {
                    return Err(Error::Preset("abs_edge needs a symmetric 1D interval (−a, a)".into()));
                }
                Ok(g.sample(|x| x[0].abs() - ax.end))
            }
            Preset::NegConst {} => Ok(g.sample(|_| -1.0)),
            Preset::Eigenfunction { c } => {
                if !(*c > 0.0) {
                    return Err(Error::Preset(format!("eigenfunction amplitude must be positive, got {c}")));
                }
                Ok(ground_state(g).scale(*c))
            }
            Preset::Bump { center, width, height } => {
                if center.len() != g.dim() {
                    return Err(Error::Preset(format!("bump center has {} coordinates, grid has {}", center.len(), g.dim())));
                }
                if !(*width > 0.0) || !height.is_finite() {
                    return Err(Error::Preset("bump needs width > 0 and a finite height".into()));
                }
                Ok(g.sample(|x| {
                    let rho = x.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                    if rho < *width {
                        height * (FRAC_PI_2 * rho / width).cos().powi(2)
                    } else {
                        0.0
                    }
                }))
            }
            Preset::Supersolution { c } => {
                if !(*c > 0.0) {
                    return Err(Error::Preset(format!("supersolution amplitude must be positive, got {c}")));
                }
                let u = ground_state(g).scale(*c);
                let r = residual(g, &u, p)?;
                if r.max() > 0.0 {
                    return Err(Error::Preset(format!(
                        "c·φ₁ is not a supersolution here (max residual {:e}); need λ_h > κ",
                        r.max()
                    )));
                }
                Ok(u)
            }
            Preset::Custom { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Preset(format!("cannot read {}: {e}", path.display())))?;
                let (file_grid, u) = field_from_csv(&text)?;
                if file_grid.len() != g.len() || file_grid.dim() != g.dim() {
                    return Err(Error::Preset(format!("{} does not match the configured grid", path.display())));
                }
                g.validate(&u)?;
                Ok(u)
            }
        }
    }
}

/// Product of `sin(π(x_k − a_k)/L_k)`: the discrete Dirichlet ground state, unit maximum.
pub fn ground_state(g: &Grid) -> Field {
    let axes = g.axes().to_vec();
    let u = g.sample(|x| {
        x.iter()
            .zip(&axes)
            .map(|(xi, a)| (PI * (xi - a.start) / a.length()).sin())
            .product()
    });
    let m = u.max();
    u.scale(1.0 / m)
}

/// `max(u, min(u + shift, 0))`: raises nonpositive data by `shift` without
/// crossing zero, so the result keeps the boundary behaviour of `u`.
pub fn raised(u: &Field, shift: f64) -> Field {
    u.map(|v| v.max((v + shift).min(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::dr_value;

    fn one() -> ModelParams {
        ModelParams::new(1.0).unwrap()
    }

    #[test]
    fn documented_properties() {
        let g = Grid::interval(-1.0, 1.0, 63).unwrap();
        let p = one();
        let a = Preset::AbsEdge {}.build(&g, &p).unwrap();
        assert!(a.max() <= 0.0 && a.min() >= -1.0);
        assert_eq!(a[31], -1.0);
        assert!((a[0] + g.axis(0).h).abs() < 1e-15);
        assert!(Preset::NegConst {}.build(&g, &p).unwrap().values().iter().all(|&v| v == -1.0));
        assert_eq!(Preset::Zero {}.build(&g, &p).unwrap(), g.zeros());
        let e = Preset::Eigenfunction { c: 2.0 }.build(&g, &p).unwrap();
        assert!(e.min() > 0.0 && (e.max() - 2.0).abs() < 1e-12);
        let b = Preset::Bump { center: vec![0.2], width: 0.3, height: 0.5 }.build(&g, &p).unwrap();
        assert!(b.min() >= 0.0 && b.max() <= 0.5);
        assert!(residual(&g, &Preset::Supersolution { c: 1.0 }.build(&g, &p).unwrap(), &p).unwrap().max() <= 0.0);
    }

    #[test]
    fn invalid_presets() {
        let p = one();
        let g = Grid::interval(0.0, 1.0, 15).unwrap();
        assert!(Preset::AbsEdge {}.build(&g, &p).is_err());
        assert!(Preset::Eigenfunction { c: 0.0 }.build(&g, &p).is_err());
        assert!(Preset::Bump { center: vec![0.5, 0.5], width: 0.1, height: 1.0 }.build(&g, &p).is_err());
        // on a long interval λ_h < κ, so no positive multiple of φ₁ is a supersolution
        let wide = Grid::interval(0.0, 10.0, 63).unwrap();
        assert!(Preset::Supersolution { c: 1.0 }.build(&wide, &p).is_err());
        assert!(Preset::Custom { path: "/nonexistent/u0.csv".into() }.build(&g, &p).is_err());
        let sq = Grid::rectangle((-1.0, 1.0), (-1.0, 1.0), (7, 7)).unwrap();
        assert!(Preset::AbsEdge {}.build(&sq, &p).is_err());
    }

    #[test]
    fn radial_bump_in_2d() {
        let g = Grid::rectangle((0.0, 1.0), (0.0, 1.0), (15, 15)).unwrap();
        let b = Preset::Bump { center: vec![0.5, 0.5], width: 0.25, height: 1.0 }.build(&g, &one()).unwrap();
        assert_eq!(b[7 + 15 * 7], 1.0);
        assert_eq!(b[0], 0.0);
    }

    #[test]
    fn custom_round_trip() {
        let g = Grid::interval(0.0, 1.0, 9).unwrap();
        let u = g.sample(|x| x[0] * (1.0 - x[0]));
        let dir = std::env::temp_dir().join(format!("iac-preset-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("u0.csv");
        std::fs::write(&path, crate::grid::field_to_csv(&g, &u).unwrap()).unwrap();
        let back = Preset::Custom { path: path.clone() }.build(&g, &one()).unwrap();
        assert!(back.sub(&u).max_abs() < 1e-15);
        let coarse = Grid::interval(0.0, 1.0, 5).unwrap();
        assert!(Preset::Custom { path }.build(&coarse, &one()).is_err());
        std::fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn abs_edge_constraint_value() {
        let g = Grid::interval(-1.0, 1.0, 255).unwrap();
        let d = dr_value(&g, &Preset::AbsEdge {}.build(&g, &one()).unwrap(), &one()).unwrap();
        assert!((d - 16.0 / 105.0).abs() < 1e-4);
    }

    #[test]
    fn raised_data_stay_ordered() {
        let u = Field::from_vec(vec![-1.0, -0.05, 0.0, 0.3]);
        assert_eq!(raised(&u, 0.1).values(), &[-0.9, 0.0, 0.0, 0.3]);
    }

    #[test]
    fn json_shape() {
        let p: Preset = serde_json::from_str(r#"{"preset":"bump","center":[0.5],"width":0.2,"height":0.3}"#).unwrap();
        assert_eq!(p.name(), "bump");
        assert!(serde_json::from_str::<Preset>(r#"{"preset":"zero","c":1}"#).is_err());
        assert!(serde_json::from_str::<Preset>(r#"{"preset":"sphere"}"#).is_err());
    }
}
