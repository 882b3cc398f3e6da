//! Browser bindings: integrate a flow, polish an equilibrium, compute a ground state.
//!
//! All fields live on `(−1, 1)` with homogeneous Dirichlet data.

use iac_core::obstacle::solve_equilibrium;
use iac_core::presets::Preset;
use iac_core::spectral::min_eig;
use iac_core::steppers::{run, Scheme, SolverConfig};
use iac_core::{Field, Grid, ModelParams};
use wasm_bindgen::prelude::*;

const MAX_NODES: usize = 1023;
const MAX_STEPS: usize = 2_000_000;

fn setup(preset: &str, n: usize, kappa: f64) -> Result<(Grid, ModelParams, Field), String> {
    if n == 0 || n > MAX_NODES {
        return Err(format!("node count must be in 1..={MAX_NODES}"));
    }
    let g = Grid::interval(-1.0, 1.0, n).map_err(|e| e.to_string())?;
    let p = ModelParams::new(kappa).map_err(|e| e.to_string())?;
    let preset = match preset {
        "zero" => Preset::Zero {},
        "abs_edge" => Preset::AbsEdge {},
        "neg_const" => Preset::NegConst {},
        "bump" => Preset::Bump { center: vec![0.0], width: 0.5, height: 0.8 },
        "eigenfunction" => Preset::Eigenfunction { c: 0.5 },
        other => return Err(format!("unknown preset `{other}`")),
    };
    let u0 = preset.build(&g, &p).map_err(|e| e.to_string())?;
    Ok((g, p, u0))
}

fn coords(g: &Grid) -> Vec<f64> {
    (0..g.len()).map(|i| g.coords(i)[0]).collect()
}

/// Stored frames and scalar series of one run.
#[wasm_bindgen]
pub struct Simulation {
    x: Vec<f64>,
    frame_times: Vec<f64>,
    frames: Vec<Vec<f64>>,
    times: Vec<f64>,
    energy: Vec<f64>,
    eta_l2: Vec<f64>,
}

#[wasm_bindgen]
impl Simulation {
    /// `scheme` is `explicit`, `implicit` or `yosida`; explicit-type schemes
    /// use the largest stable step when `dt` exceeds it.
    #[wasm_bindgen(constructor)]
    pub fn new(preset: &str, n: usize, kappa: f64, scheme: &str, dt: f64, t_end: f64, frames: usize) -> Result<Simulation, String> {
        let (g, p, u0) = setup(preset, n, kappa)?;
        let scheme = match scheme {
            "explicit" => Scheme::Explicit,
            "implicit" => Scheme::ImplicitObstacle,
            "yosida" => Scheme::Yosida,
            other => return Err(format!("unknown scheme `{other}`")),
        };
        let dt = match scheme {
            Scheme::ImplicitObstacle => dt,
            _ => dt.min(g.explicit_dt_bound()),
        };
        if !(dt > 0.0 && t_end > 0.0) {
            return Err("dt and t_end must be positive".into());
        }
        let steps = (t_end / dt).round();
        if steps > MAX_STEPS as f64 {
            return Err(format!("{steps} steps exceed the demo limit of {MAX_STEPS}"));
        }
        let stride = ((steps as usize) / frames.max(1)).max(1);
        let cfg = SolverConfig::new(scheme, dt, t_end).with_stride(stride);
        let traj = run(&g, &u0, &p, &cfg).map_err(|e| e.to_string())?;
        Ok(Simulation {
            x: coords(&g),
            frame_times: traj.snapshots.iter().map(|s| s.t).collect(),
            frames: traj.snapshots.iter().map(|s| s.u.values().to_vec()).collect(),
            times: traj.times().collect(),
            energy: traj.diagnostics.iter().map(|d| d.energy).collect(),
            eta_l2: traj.diagnostics.iter().map(|d| d.eta_l2).collect(),
        })
    }

    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn frame(&self, k: usize) -> Vec<f64> {
        self.frames.get(k).cloned().unwrap_or_default()
    }

    pub fn frame_time(&self, k: usize) -> f64 {
        self.frame_times.get(k).copied().unwrap_or(f64::NAN)
    }

    pub fn times(&self) -> Vec<f64> {
        self.times.clone()
    }

    pub fn energy(&self) -> Vec<f64> {
        self.energy.clone()
    }

    pub fn eta_l2(&self) -> Vec<f64> {
        self.eta_l2.clone()
    }
}

/// Equilibrium above `u₀`, polished from the end of an implicit pre-run.
#[wasm_bindgen]
pub struct Equilibrium {
    x: Vec<f64>,
    obstacle: Vec<f64>,
    state: Vec<f64>,
    multiplier: Vec<f64>,
    residual: f64,
}

#[wasm_bindgen]
impl Equilibrium {
    #[wasm_bindgen(constructor)]
    pub fn new(preset: &str, n: usize, kappa: f64, t_pre: f64) -> Result<Equilibrium, String> {
        let (g, p, u0) = setup(preset, n, kappa)?;
        if !(t_pre > 0.0) || t_pre > 1000.0 {
            return Err("pre-run length must be in (0, 1000]".into());
        }
        let cfg = SolverConfig::new(Scheme::ImplicitObstacle, 0.01, t_pre).with_stride(usize::MAX);
        let traj = run(&g, &u0, &p, &cfg).map_err(|e| e.to_string())?;
        let (eq, eta, rep) = solve_equilibrium(&g, &u0, &p, traj.final_state(), 1e-8).map_err(|e| e.to_string())?;
        Ok(Equilibrium {
            x: coords(&g),
            obstacle: u0.into_vec(),
            state: eq.into_vec(),
            multiplier: eta.into_vec(),
            residual: rep.max_entry(),
        })
    }

    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }

    pub fn obstacle(&self) -> Vec<f64> {
        self.obstacle.clone()
    }

    pub fn state(&self) -> Vec<f64> {
        self.state.clone()
    }

    pub fn multiplier(&self) -> Vec<f64> {
        self.multiplier.clone()
    }

    /// Largest complementarity residual.
    pub fn residual(&self) -> f64 {
        self.residual
    }
}

/// Ground state of `−Δ + 3u₀²`, with `σ = λ − κ`.
#[wasm_bindgen]
pub struct GroundState {
    x: Vec<f64>,
    field: Vec<f64>,
    lambda: f64,
    sigma: f64,
}

#[wasm_bindgen]
impl GroundState {
    #[wasm_bindgen(constructor)]
    pub fn new(preset: &str, n: usize, kappa: f64) -> Result<GroundState, String> {
        let (g, p, u0) = setup(preset, n, kappa)?;
        let v = u0.map(|x| 3.0 * x * x);
        let res = min_eig(&g, &v, 1e-10, 10_000).map_err(|e| e.to_string())?;
        Ok(GroundState {
            x: coords(&g),
            field: res.eigenfield.into_vec(),
            lambda: res.lambda_min,
            sigma: res.lambda_min - p.kappa,
        })
    }

    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }

    pub fn field(&self) -> Vec<f64> {
        self.field.clone()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}
