//! Uniform Dirichlet grids on intervals and rectangles, nodal fields, and the
//! discrete operators and norms built on them.
//!
//! Fields store interior nodes only. The homogeneous Dirichlet condition is
//! realized by ghost zeros wherever a stencil reaches the boundary. In 2D the
//! node `(i, j)` lives at index `i + nx * j`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub end: f64,
    pub n_interior: usize,
    pub h: f64,
}

impl Axis {
    fn new(start: f64, end: f64, n_interior: usize) -> Result<Self> {
        if !(start.is_finite() && end.is_finite()) {
            return Err(Error::InvalidGrid("endpoints must be finite".into()));
        }
        if start >= end {
            return Err(Error::InvalidGrid(format!(
                "endpoints ({start}, {end}) are not increasing"
            )));
        }
        if n_interior == 0 {
            return Err(Error::InvalidGrid("axis needs at least one interior node".into()));
        }
        let h = (end - start) / (n_interior as f64 + 1.0);
        Ok(Self { start, end, n_interior, h })
    }

    /// Coordinate of interior node `i` (0-based).
    pub fn coord(&self, i: usize) -> f64 {
        self.start + (i as f64 + 1.0) * self.h
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }
}

/// Uniform rectangular grid with homogeneous Dirichlet boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    axes: Vec<Axis>,
}

impl Grid {
    pub fn new(dim: usize, endpoints: &[(f64, f64)], n_interior: &[usize]) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dimension {dim} is not 1 or 2")));
        }
        if endpoints.len() != dim || n_interior.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "expected {dim} axes, got {} endpoint pairs and {} counts",
                endpoints.len(),
                n_interior.len()
            )));
        }
        let axes = endpoints
            .iter()
            .zip(n_interior)
            .map(|(&(a, b), &n)| Axis::new(a, b, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { axes })
    }

    pub fn interval(start: f64, end: f64, n_interior: usize) -> Result<Self> {
        Self::new(1, &[(start, end)], &[n_interior])
    }

    pub fn rectangle(x: (f64, f64), y: (f64, f64), n: (usize, usize)) -> Result<Self> {
        Self::new(2, &[x, y], &[n.0, n.1])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, k: usize) -> &Axis {
        &self.axes[k]
    }

    pub fn h(&self) -> Vec<f64> {
        self.axes.iter().map(|a| a.h).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.n_interior).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weight of a node, `h^dim`.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.h).product()
    }

    /// Measure of the domain.
    pub fn volume(&self) -> f64 {
        self.axes.iter().map(|a| a.length()).product()
    }

    /// Sum of `1/h_k^2` over axes; the diagonal of `-Δ_h` is twice this.
    pub fn inv_h2_sum(&self) -> f64 {
        self.axes.iter().map(|a| 1.0 / (a.h * a.h)).sum()
    }

    /// Largest stable step for forward Euler on the heat part, `1 / (2 Σ h_k^-2)`.
    /// On a uniform grid this is `h² / (2·dim)`.
    pub fn explicit_dt_bound(&self) -> f64 {
        0.5 / self.inv_h2_sum()
    }

    /// Coordinates of node `idx`.
    pub fn coords(&self, idx: usize) -> Vec<f64> {
        match self.dim() {
            1 => vec![self.axes[0].coord(idx)],
            _ => {
                let nx = self.axes[0].n_interior;
                vec![self.axes[0].coord(idx % nx), self.axes[1].coord(idx / nx)]
            }
        }
    }

    /// Evaluate `f` at every interior node.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> Field {
        Field::from_vec((0..self.len()).map(|i| f(&self.coords(i))).collect())
    }

    pub fn zeros(&self) -> Field {
        Field::zeros(self.len())
    }

    pub fn check(&self, u: &Field) -> Result<()> {
        if u.len() != self.len() {
            return Err(Error::GridMismatch { expected: self.len(), found: u.len() });
        }
        Ok(())
    }

    /// Like [`Grid::check`] but also rejects NaN and infinities.
    pub fn validate(&self, u: &Field) -> Result<()> {
        self.check(u)?;
        match u.values().iter().position(|v| !v.is_finite()) {
            Some(i) => Err(Error::NonFinite(i)),
            None => Ok(()),
        }
    }

    /// Weighted inner product `h^dim Σ u_i v_i`.
    pub fn inner(&self, u: &Field, v: &Field) -> f64 {
        self.cell_volume() * dot(u.values(), v.values())
    }
}

/// Nodal values at the interior points of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Field(Vec<f64>);

impl Field {
    pub fn from_vec(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self(vec![c; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field(self.0.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        debug_assert_eq!(self.len(), other.len());
        Field(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn scale(&self, c: f64) -> Field {
        self.map(|v| v * c)
    }

    pub fn add(&self, other: &Field) -> Field {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.zip_map(other, |a, b| a - b)
    }

    /// `self + c * other`
    pub fn axpy(&self, c: f64, other: &Field) -> Field {
        self.zip_map(other, |a, b| a + c * b)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

impl std::ops::Index<usize> for Field {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl std::ops::IndexMut<usize> for Field {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Sum of the off-diagonal neighbour contributions `Σ_k (u_{i-e_k} + u_{i+e_k}) / h_k²`
/// at node `idx`, with ghost zeros outside the domain.
pub(crate) fn neighbour_sum(g: &Grid, u: &[f64], idx: usize) -> f64 {
    let ax = g.axis(0);
    let nx = ax.n_interior;
    let i = idx % nx;
    let mut s = 0.0;
    let inv = 1.0 / (ax.h * ax.h);
    if i > 0 {
        s += u[idx - 1] * inv;
    }
    if i + 1 < nx {
        s += u[idx + 1] * inv;
    }
    if g.dim() == 2 {
        let ay = g.axis(1);
        let ny = ay.n_interior;
        let j = idx / nx;
        let inv = 1.0 / (ay.h * ay.h);
        if j > 0 {
            s += u[idx - nx] * inv;
        }
        if j + 1 < ny {
            s += u[idx + nx] * inv;
        }
    }
    s
}

pub(crate) fn laplacian_into(g: &Grid, u: &[f64], out: &mut [f64]) {
    let diag = 2.0 * g.inv_h2_sum();
    for idx in 0..u.len() {
        out[idx] = neighbour_sum(g, u, idx) - diag * u[idx];
    }
}

/// Three-point (1D) or five-point (2D) Dirichlet Laplacian.
pub fn laplacian(g: &Grid, u: &Field) -> Result<Field> {
    g.check(u)?;
    let mut out = vec![0.0; u.len()];
    laplacian_into(g, u.values(), &mut out);
    Ok(Field(out))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Norm {
    L2,
    L4,
    L6,
    Linf,
}

/// Discrete Lebesgue norm with midpoint quadrature.
pub fn norm_lp(g: &Grid, u: &Field, p: Norm) -> f64 {
    let w = g.cell_volume();
    let v = u.values();
    match p {
        Norm::L2 => (w * v.iter().map(|x| x * x).sum::<f64>()).sqrt(),
        Norm::L4 => (w * v.iter().map(|x| (x * x) * (x * x)).sum::<f64>()).powf(0.25),
        Norm::L6 => (w * v.iter().map(|x| (x * x) * (x * x) * (x * x)).sum::<f64>()).powf(1.0 / 6.0),
        Norm::Linf => u.max_abs(),
    }
}

pub fn norm_l2(g: &Grid, u: &Field) -> f64 {
    norm_lp(g, u, Norm::L2)
}

/// Squared discrete `H¹₀` seminorm: forward differences over every edge,
/// including the edges that touch the (zero) boundary.
pub fn h1_seminorm_sq(g: &Grid, u: &Field) -> f64 {
    let v = u.values();
    let w = g.cell_volume();
    let ax = g.axis(0);
    let nx = ax.n_interior;
    let ny = if g.dim() == 2 { g.axis(1).n_interior } else { 1 };
    let at = |i: isize, j: isize| -> f64 {
        if i < 0 || j < 0 || i as usize >= nx || j as usize >= ny {
            0.0
        } else {
            v[i as usize + nx * j as usize]
        }
    };
    let mut sx = 0.0;
    for j in 0..ny as isize {
        for i in -1..nx as isize {
            let d = at(i + 1, j) - at(i, j);
            sx += d * d;
        }
    }
    let mut total = w * sx / (ax.h * ax.h);
    if g.dim() == 2 {
        let hy = g.axis(1).h;
        let mut sy = 0.0;
        for i in 0..nx as isize {
            for j in -1..ny as isize {
                let d = at(i, j + 1) - at(i, j);
                sy += d * d;
            }
        }
        total += w * sy / (hy * hy);
    }
    total
}

pub fn h1_seminorm(g: &Grid, u: &Field) -> Result<f64> {
    g.check(u)?;
    Ok(h1_seminorm_sq(g, u).sqrt())
}

/// `d(u, v) = ‖∇(u − v)‖₂ + ‖u − v‖₄`, the metric of the phase set.
pub fn phase_metric(g: &Grid, u: &Field, v: &Field) -> Result<f64> {
    g.check(u)?;
    g.check(v)?;
    let w = u.sub(v);
    Ok(h1_seminorm_sq(g, &w).sqrt() + norm_lp(g, &w, Norm::L4))
}

pub fn positive_part(u: &Field) -> Field {
    u.map(|v| v.max(0.0))
}

pub fn negative_part(u: &Field) -> Field {
    u.map(|v| (-v).max(0.0))
}

/// Serialize a field as CSV: a `# grid ...` header, then one node per line
/// with its coordinates followed by the value.
pub fn field_to_csv(g: &Grid, u: &Field) -> Result<String> {
    g.check(u)?;
    let join = |it: Vec<String>| it.join(",");
    let mut out = format!(
        "# grid dim={} n={} h={}\n",
        g.dim(),
        join(g.axes().iter().map(|a| a.n_interior.to_string()).collect()),
        join(g.axes().iter().map(|a| a.h.to_string()).collect()),
    );
    for (idx, v) in u.values().iter().enumerate() {
        for c in g.coords(idx) {
            let _ = write!(out, "{c},");
        }
        let _ = writeln!(out, "{v}");
    }
    Ok(out)
}

/// Parse CSV written by [`field_to_csv`]. The grid is reconstructed from the
/// header and the coordinates of the first node along each axis.
pub fn field_from_csv(text: &str) -> Result<(Grid, Field)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty field file".into()))?;
    let rest = header
        .strip_prefix("# grid")
        .ok_or_else(|| Error::Parse(format!("bad header line: {header}")))?;
    let mut dim = None;
    let mut ns = None;
    let mut hs = None;
    for tok in rest.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad header token: {tok}")))?;
        match k {
            "dim" => dim = Some(parse_num::<usize>(v)?),
            "n" => ns = Some(v.split(',').map(parse_num::<usize>).collect::<Result<Vec<_>>>()?),
            "h" => hs = Some(v.split(',').map(parse_num::<f64>).collect::<Result<Vec<_>>>()?),
            _ => return Err(Error::Parse(format!("unknown header key: {k}"))),
        }
    }
    let (dim, ns, hs) = match (dim, ns, hs) {
        (Some(d), Some(n), Some(h)) if n.len() == d && h.len() == d => (d, n, h),
        _ => return Err(Error::Parse("incomplete grid header".into())),
    };
    let total: usize = ns.iter().product();
    let mut values = Vec::with_capacity(total);
    let mut first = Vec::new();
    for line in lines {
        let cols = line.split(',').map(|c| parse_num::<f64>(c.trim())).collect::<Result<Vec<_>>>()?;
        if cols.len() != dim + 1 {
            return Err(Error::Parse(format!("expected {} columns: {line}", dim + 1)));
        }
        if first.is_empty() {
            first = cols[..dim].to_vec();
        }
        values.push(cols[dim]);
    }
    if values.len() != total {
        return Err(Error::Parse(format!("expected {total} nodes, found {}", values.len())));
    }
    let endpoints: Vec<(f64, f64)> = (0..dim)
        .map(|k| {
            let start = first[k] - hs[k];
            (start, start + hs[k] * (ns[k] as f64 + 1.0))
        })
        .collect();
    let g = Grid::new(dim, &endpoints, &ns)?;
    let u = Field::from_vec(values);
    g.validate(&u)?;
    Ok((g, u))
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse::<T>().map_err(|_| Error::Parse(format!("not a number: {s}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn spacing() {
        let g = Grid::interval(0.0, 1.0, 127).unwrap();
        assert_eq!(g.axis(0).h, 1.0 / 128.0);
        let g = Grid::interval(-1.0, 1.0, 255).unwrap();
        assert_eq!(g.axis(0).h, 1.0 / 128.0);
        let g = Grid::rectangle((0.0, 1.0), (0.0, 1.0), (31, 31)).unwrap();
        assert_eq!(g.h(), vec![1.0 / 32.0, 1.0 / 32.0]);
        assert_eq!(g.len(), 31 * 31);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::interval(1.0, 0.0, 3).is_err());
        assert!(Grid::interval(0.0, 1.0, 0).is_err());
        assert!(Grid::new(3, &[(0.0, 1.0); 3], &[2; 3]).is_err());
        assert!(Grid::new(2, &[(0.0, 1.0)], &[2, 2]).is_err());
    }

    #[test]
    fn laplacian_of_zero_and_mismatch() {
        let g = Grid::interval(0.0, 1.0, 5).unwrap();
        assert_eq!(laplacian(&g, &g.zeros()).unwrap(), g.zeros());
        assert!(matches!(
            laplacian(&g, &Field::zeros(4)),
            Err(Error::GridMismatch { expected: 5, found: 4 })
        ));
    }

    #[test]
    fn laplacian_hand_stencil() {
        let g = Grid::interval(0.0, 1.0, 3).unwrap();
        let u = Field::from_vec(vec![1.0, 2.0, 1.0]);
        // 16 * (0 - 2 + 2, 1 - 4 + 1, 2 - 2 + 0)
        assert_eq!(laplacian(&g, &u).unwrap().values(), &[0.0, -32.0, 0.0]);
    }

    #[test]
    fn laplacian_sine_mode() {
        let g = Grid::interval(0.0, 1.0, 127).unwrap();
        let h = g.axis(0).h;
        let u = g.sample(|x| (std::f64::consts::PI * x[0]).sin());
        let lam = 2.0 / (h * h) * (1.0 - (std::f64::consts::PI * h).cos());
        let lu = laplacian(&g, &u).unwrap();
        for i in 0..u.len() {
            assert!((lu[i] + lam * u[i]).abs() <= 1e-9 * lam);
        }
    }

    #[test]
    fn laplacian_2d_separable_mode() {
        let g = Grid::rectangle((0.0, 1.0), (0.0, 2.0), (15, 23)).unwrap();
        let (hx, hy) = (g.axis(0).h, g.axis(1).h);
        let pi = std::f64::consts::PI;
        let u = g.sample(|x| (pi * x[0]).sin() * (pi * x[1] / 2.0).sin());
        let lam = 2.0 / (hx * hx) * (1.0 - (pi * hx).cos())
            + 2.0 / (hy * hy) * (1.0 - (pi * hy / 2.0).cos());
        let lu = laplacian(&g, &u).unwrap();
        for i in 0..u.len() {
            assert!((lu[i] + lam * u[i]).abs() <= 1e-10 * lam);
        }
    }

    #[test]
    fn norms() {
        let g = Grid::interval(0.0, 1.0, 127).unwrap();
        for p in [Norm::L2, Norm::L4, Norm::L6, Norm::Linf] {
            assert_eq!(norm_lp(&g, &g.zeros(), p), 0.0);
        }
        let ones = Field::constant(127, 1.0);
        assert_relative_eq!(norm_l2(&g, &ones), (127.0f64 / 128.0).sqrt(), max_relative = 1e-15);

        let g = Grid::interval(0.0, 1.0, 2).unwrap();
        let u = Field::from_vec(vec![1.0, -2.0]);
        assert_relative_eq!(
            norm_lp(&g, &u, Norm::L4),
            (17.0f64 / 3.0).powf(0.25),
            max_relative = 1e-15
        );
        assert_eq!(norm_lp(&g, &u, Norm::Linf), 2.0);
    }

    #[test]
    fn h1_single_node() {
        let g = Grid::interval(0.0, 1.0, 1).unwrap();
        let a = 0.7;
        let u = Field::from_vec(vec![a]);
        assert_relative_eq!(h1_seminorm_sq(&g, &u), 4.0 * a * a, max_relative = 1e-15);
        assert_eq!(h1_seminorm(&g, &g.zeros()).unwrap(), 0.0);
    }

    #[test]
    fn parts() {
        let u = Field::from_vec(vec![3.0, -2.0, 0.0]);
        assert_eq!(positive_part(&u).values(), &[3.0, 0.0, 0.0]);
        assert_eq!(negative_part(&u).values(), &[0.0, 2.0, 0.0]);
    }

    #[test]
    fn csv_round_trip_2d() {
        let g = Grid::rectangle((-1.0, 1.0), (0.0, 0.5), (3, 2)).unwrap();
        let u = g.sample(|x| x[0] * 10.0 + x[1]);
        let text = field_to_csv(&g, &u).unwrap();
        assert!(text.starts_with("# grid dim=2 n=3,2 h=0.5,0.16666666666666666\n"));
        let (g2, u2) = field_from_csv(&text).unwrap();
        assert_eq!(g2.len(), g.len());
        for (a, b) in g.axes().iter().zip(g2.axes()) {
            assert!((a.start - b.start).abs() < 1e-14 && (a.end - b.end).abs() < 1e-14);
        }
        assert_eq!(u, u2);
    }

    #[test]
    fn csv_rejects_garbage() {
        assert!(field_from_csv("").is_err());
        assert!(field_from_csv("# grid dim=1 n=2 h=0.5\n0.5,1\n").is_err());
        assert!(field_from_csv("x,y\n").is_err());
        assert!(field_from_csv("# grid dim=1 n=1 h=0.5\n0.5,NaN\n").is_err());
    }

    fn grid_and_fields() -> impl Strategy<Value = (Grid, Field, Field)> {
        (1usize..=2, 1usize..12, 1usize..9).prop_flat_map(|(dim, nx, ny)| {
            let g = if dim == 1 {
                Grid::interval(-0.5, 1.5, nx).unwrap()
            } else {
                Grid::rectangle((0.0, 1.0), (0.0, 0.7), (nx, ny)).unwrap()
            };
            let n = g.len();
            (
                Just(g),
                prop::collection::vec(-3.0f64..3.0, n),
                prop::collection::vec(-3.0f64..3.0, n),
            )
                .prop_map(|(g, a, b)| (g, Field::from_vec(a), Field::from_vec(b)))
        })
    }

    proptest! {
        #[test]
        fn summation_by_parts((g, u, _v) in grid_and_fields()) {
            let lu = laplacian(&g, &u).unwrap();
            let lhs = h1_seminorm_sq(&g, &u) + g.inner(&u, &lu);
            let scale = 1.0 + norm_l2(&g, &u).powi(2);
            prop_assert!(lhs.abs() <= 1e-10 * scale);
        }

        #[test]
        fn laplacian_symmetric_nonpositive((g, u, v) in grid_and_fields()) {
            let a = g.inner(&v, &laplacian(&g, &u).unwrap());
            let b = g.inner(&u, &laplacian(&g, &v).unwrap());
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
            prop_assert!(g.inner(&u, &laplacian(&g, &u).unwrap()) <= 0.0);
        }

        #[test]
        fn part_identity(vals in prop::collection::vec(-1e3f64..1e3, 1..40)) {
            let u = Field::from_vec(vals);
            let p = positive_part(&u);
            let m = negative_part(&u);
            prop_assert_eq!(p.sub(&m), u);
            prop_assert!(p.min() >= 0.0 && m.min() >= 0.0);
        }
    }
}
