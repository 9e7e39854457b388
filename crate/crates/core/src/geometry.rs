//! Star-shaped hypersurfaces as radial graphs `X(z) = e^{v(z)} z` over the unit sphere.
//!
//! Two cases are supported, both reduced to a one-dimensional parameter grid:
//!
//! * `n = 1`: closed curves in the plane, parametrized by the polar angle `φ ∈ [0, 2π)`
//!   on a periodic uniform grid.
//! * `n = 2`: axisymmetric surfaces in ℝ³, parametrized by the polar angle `θ ∈ [0, π]`
//!   on a uniform grid that includes both poles. Values beyond the poles are obtained by
//!   even reflection, which encodes `∂_θ v = 0` there.
//!
//! All derivatives are second-order central differences on that grid.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_GRID_NODES: usize = 16;

/// Lower bound for `⟨X/|X|, ν⟩` accepted by [`make_shape`].
pub const MIN_STAR_COSINE: f64 = 0.2;

/// Oversampling factor of the analytic star-shapedness check in [`make_shape`].
const STAR_CHECK_OVERSAMPLING: usize = 8;

/// Slack factor of the discrete pole regularity check `|v₁ − v₀| ≤ C·Δθ²`.
const POLE_REGULARITY_FACTOR: f64 = 4.0;

pub type Point = [f64; 3];

pub(crate) fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn dist_sq(a: &Point, b: &Point) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    dot(&d, &d)
}

/// Dimension of the evolving hypersurface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub enum Dim {
    /// Closed plane curve (`n = 1`).
    Curve,
    /// Axisymmetric closed surface in ℝ³ (`n = 2`).
    Surface,
}

impl Dim {
    pub fn from_n(n: usize) -> Result<Self> {
        match n {
            1 => Ok(Dim::Curve),
            2 => Ok(Dim::Surface),
            other => Err(Error::UnsupportedDimension(other)),
        }
    }

    pub fn n(self) -> usize {
        match self {
            Dim::Curve => 1,
            Dim::Surface => 2,
        }
    }

    /// Area of the unit n-sphere.
    pub fn unit_sphere_area(self) -> f64 {
        match self {
            Dim::Curve => 2.0 * PI,
            Dim::Surface => 4.0 * PI,
        }
    }
}

impl TryFrom<usize> for Dim {
    type Error = Error;

    fn try_from(n: usize) -> Result<Self> {
        Dim::from_n(n)
    }
}

impl From<Dim> for usize {
    fn from(d: Dim) -> usize {
        d.n()
    }
}

/// Uniform one-dimensional parameter grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    dim: Dim,
    nodes: usize,
}

impl Grid {
    pub fn new(dim: Dim, nodes: usize) -> Result<Self> {
        if nodes < MIN_GRID_NODES {
            return Err(Error::GridTooSmall {
                min: MIN_GRID_NODES,
                got: nodes,
            });
        }
        Ok(Grid { dim, nodes })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.nodes
    }

    pub fn is_empty(&self) -> bool {
        self.nodes == 0
    }

    pub fn spacing(&self) -> f64 {
        match self.dim {
            Dim::Curve => 2.0 * PI / self.nodes as f64,
            Dim::Surface => PI / (self.nodes - 1) as f64,
        }
    }

    pub fn angle(&self, i: usize) -> f64 {
        match self.dim {
            Dim::Curve => 2.0 * PI * i as f64 / self.nodes as f64,
            Dim::Surface if i + 1 == self.nodes => PI,
            Dim::Surface => PI * i as f64 / (self.nodes - 1) as f64,
        }
    }

    pub fn angles(&self) -> Vec<f64> {
        (0..self.nodes).map(|i| self.angle(i)).collect()
    }

    /// Left and right stencil neighbours, periodic for curves and reflected at the poles.
    fn neighbors(&self, i: usize) -> (usize, usize) {
        let n = self.nodes;
        match self.dim {
            Dim::Curve => ((i + n - 1) % n, (i + 1) % n),
            Dim::Surface => {
                let left = if i == 0 { 1 } else { i - 1 };
                let right = if i + 1 == n { n - 2 } else { i + 1 };
                (left, right)
            }
        }
    }

    /// First derivative with respect to the grid angle.
    pub fn d1(&self, u: &[f64]) -> Vec<f64> {
        debug_assert_eq!(u.len(), self.nodes);
        let h2 = 2.0 * self.spacing();
        (0..self.nodes)
            .map(|i| {
                let (l, r) = self.neighbors(i);
                (u[r] - u[l]) / h2
            })
            .collect()
    }

    /// Second derivative with respect to the grid angle.
    pub fn d2(&self, u: &[f64]) -> Vec<f64> {
        debug_assert_eq!(u.len(), self.nodes);
        let hh = self.spacing() * self.spacing();
        (0..self.nodes)
            .map(|i| {
                let (l, r) = self.neighbors(i);
                (u[r] - 2.0 * u[i] + u[l]) / hh
            })
            .collect()
    }

    /// Quadrature weights for `dz` on the unit n-sphere (azimuth integrated for n = 2).
    pub fn sphere_weights(&self) -> Vec<f64> {
        let h = self.spacing();
        match self.dim {
            Dim::Curve => vec![h; self.nodes],
            Dim::Surface => (0..self.nodes)
                .map(|i| 2.0 * PI * self.angle(i).sin() * h)
                .collect(),
        }
    }

    /// Unit direction `z` of node `i` (azimuth 0 for surfaces).
    pub fn direction(&self, i: usize) -> Point {
        let a = self.angle(i);
        match self.dim {
            Dim::Curve => [a.cos(), a.sin(), 0.0],
            Dim::Surface => [a.sin(), 0.0, a.cos()],
        }
    }

    /// Unit vector along increasing grid angle at node `i`.
    fn angular_direction(&self, i: usize) -> Point {
        let a = self.angle(i);
        match self.dim {
            Dim::Curve => [-a.sin(), a.cos(), 0.0],
            Dim::Surface => [a.cos(), 0.0, -a.sin()],
        }
    }
}

/// Closed-form initial shapes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Preset {
    Round {
        #[serde(rename = "R0")]
        radius: f64,
    },
    /// `r = 1 + eps·cos(k·angle)`.
    Flower { eps: f64, k: u32 },
    /// Ellipse (n = 1) or spheroid (n = 2) with semi-axis `a` along the reference axis.
    Ellipse { a: f64, b: f64 },
}

impl Preset {
    /// Builds a preset from a name and named numeric parameters.
    pub fn from_name(name: &str, params: &[(&str, f64)]) -> Result<Self> {
        let get = |key: &'static str| -> Result<f64> {
            params
                .iter()
                .find(|(k, _)| *k == key)
                .map(|(_, v)| *v)
                .ok_or(Error::InvalidParameter {
                    key,
                    reason: "missing".into(),
                })
        };
        match name {
            "round" => Ok(Preset::Round { radius: get("R0")? }),
            "flower" => {
                let k = get("k")?;
                if k.fract() != 0.0 || k < 1.0 || k > u32::MAX as f64 {
                    return Err(Error::InvalidParameter {
                        key: "k",
                        reason: format!("must be a positive integer, got {k}"),
                    });
                }
                Ok(Preset::Flower {
                    eps: get("eps")?,
                    k: k as u32,
                })
            }
            "ellipse" => Ok(Preset::Ellipse {
                a: get("a")?,
                b: get("b")?,
            }),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Round { .. } => "round",
            Preset::Flower { .. } => "flower",
            Preset::Ellipse { .. } => "ellipse",
        }
    }

    /// Radius and its angular derivative at `angle`.
    pub fn radius(&self, angle: f64) -> (f64, f64) {
        match *self {
            Preset::Round { radius } => (radius, 0.0),
            Preset::Flower { eps, k } => {
                let k = k as f64;
                (1.0 + eps * (k * angle).cos(), -eps * k * (k * angle).sin())
            }
            Preset::Ellipse { a, b } => {
                let (s, c) = angle.sin_cos();
                let q = b * b * c * c + a * a * s * s;
                let r = a * b / q.sqrt();
                (r, -a * b * (a * a - b * b) * s * c / q.powf(1.5))
            }
        }
    }

    fn validate(&self, dim: Dim) -> Result<()> {
        let positive = |key: &'static str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    key,
                    reason: format!("must be positive and finite, got {x}"),
                })
            }
        };
        match *self {
            Preset::Round { radius } => positive("R0", radius),
            Preset::Ellipse { a, b } => positive("a", a).and(positive("b", b)),
            Preset::Flower { eps, k } => {
                if !eps.is_finite() || eps.abs() >= 1.0 {
                    return Err(Error::InvalidParameter {
                        key: "eps",
                        reason: format!("|eps| must be < 1 so that r > 0, got {eps}"),
                    });
                }
                if dim == Dim::Surface && k % 2 != 0 {
                    return Err(Error::InvalidParameter {
                        key: "k",
                        reason: format!("axisymmetric flower needs even k, got {k}"),
                    });
                }
                Ok(())
            }
        }
    }
}

/// Radial graph `v = log r` sampled on a [`Grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarShape {
    grid: Grid,
    v: Vec<f64>,
}

impl StarShape {
    /// Wraps log-radius samples after checking finiteness and, for surfaces, pole regularity.
    pub fn from_log_radius(dim: Dim, v: Vec<f64>) -> Result<Self> {
        let grid = Grid::new(dim, v.len())?;
        if let Some(i) = v.iter().position(|x| !x.is_finite()) {
            return Err(Error::DegenerateShape(format!("non-finite log-radius at node {i}")));
        }
        let shape = StarShape { grid, v };
        if dim == Dim::Surface {
            shape.check_pole_regularity()?;
        }
        Ok(shape)
    }

    pub(crate) fn from_parts_unchecked(grid: Grid, v: Vec<f64>) -> Self {
        debug_assert_eq!(grid.len(), v.len());
        StarShape { grid, v }
    }

    fn check_pole_regularity(&self) -> Result<()> {
        let v = &self.v;
        let n = v.len();
        let hh = self.grid.spacing().powi(2);
        let curvature = (1..n - 1)
            .map(|i| (v[i + 1] - 2.0 * v[i] + v[i - 1]).abs() / hh)
            .fold(1.0_f64, f64::max);
        let bound = POLE_REGULARITY_FACTOR * curvature * hh;
        for (pole, inner) in [(0, 1), (n - 1, n - 2)] {
            let jump = (v[inner] - v[pole]).abs();
            if jump > bound {
                return Err(Error::DegenerateShape(format!(
                    "pole at node {pole} is not regular: |Δv| = {jump:e} > {bound:e}"
                )));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> Dim {
        self.grid.dim
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn log_radius(&self) -> &[f64] {
        &self.v
    }

    pub fn radius(&self) -> Vec<f64> {
        self.v.iter().map(|v| v.exp()).collect()
    }

    /// Same shape scaled by `lambda` about the origin.
    pub fn scaled(&self, lambda: f64) -> StarShape {
        let shift = lambda.ln();
        StarShape {
            grid: self.grid,
            v: self.v.iter().map(|v| v + shift).collect(),
        }
    }

    /// Node positions in the meridian plane (azimuth 0 for surfaces).
    pub fn positions(&self) -> Vec<Point> {
        self.v
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let z = self.grid.direction(i);
                let r = v.exp();
                [r * z[0], r * z[1], r * z[2]]
            })
            .collect()
    }
}

/// Samples a preset on a grid with `nodes` nodes.
pub fn make_shape(preset: &Preset, dim: Dim, nodes: usize) -> Result<StarShape> {
    preset.validate(dim)?;
    let grid = Grid::new(dim, nodes)?;

    let fine = Grid::new(dim, STAR_CHECK_OVERSAMPLING * nodes)?;
    let mut worst = f64::INFINITY;
    for i in 0..fine.len() {
        let (r, dr) = preset.radius(fine.angle(i));
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidParameter {
                key: "shape",
                reason: format!("radius {r} at angle {}", fine.angle(i)),
            });
        }
        let dv = dr / r;
        worst = worst.min(1.0 / (1.0 + dv * dv).sqrt());
    }
    if worst < MIN_STAR_COSINE {
        return Err(Error::NotStarShaped(format!(
            "min <X/|X|, nu> = {worst:.4} < {MIN_STAR_COSINE}"
        )));
    }

    let v = (0..nodes).map(|i| preset.radius(grid.angle(i)).0.ln()).collect();
    StarShape::from_log_radius(dim, v)
}

/// Pointwise differential-geometric quantities of a [`StarShape`].
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryFields {
    pub r: Vec<f64>,
    /// `∂r` with respect to the grid angle.
    pub dr: Vec<f64>,
    pub ddr: Vec<f64>,
    /// Tangential derivative of `v` on the unit sphere.
    pub dv: Vec<f64>,
    pub grad_norm_sq: Vec<f64>,
    /// Arc-length speed `√(r² + r′²)` of the parametrization.
    pub speed: Vec<f64>,
    /// `⟨X, ν⟩⁻¹`.
    pub f: Vec<f64>,
    pub h: Vec<f64>,
    /// Curve curvature (n = 1) or meridian principal curvature (n = 2).
    pub kappa: Vec<f64>,
    /// Parallel principal curvature, n = 2 only.
    pub kappa_parallel: Option<Vec<f64>>,
    pub a_norm_sq: Vec<f64>,
    /// `|∇A|²`: `κ_s²` for curves, `κ₁,s² + 3κ₂,s²` for surfaces of revolution.
    pub da_norm_sq: Vec<f64>,
    /// Area element per node, integrated over the azimuth for n = 2.
    pub area: Vec<f64>,
}

impl GeometryFields {
    pub fn total_area(&self) -> f64 {
        self.area.iter().sum()
    }
}

fn finite_or_degenerate(name: &str, u: &[f64]) -> Result<()> {
    match u.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::DegenerateShape(format!("non-finite {name} at node {i}"))),
        None => Ok(()),
    }
}

pub fn compute_fields(shape: &StarShape) -> Result<GeometryFields> {
    let grid = shape.grid;
    let r = shape.radius();
    finite_or_degenerate("radius", &r)?;
    let dr = grid.d1(&r);
    let ddr = grid.d2(&r);
    let n = r.len();

    let mut dv = Vec::with_capacity(n);
    let mut grad_norm_sq = Vec::with_capacity(n);
    let mut speed = Vec::with_capacity(n);
    let mut f = Vec::with_capacity(n);
    let mut kappa = Vec::with_capacity(n);
    for i in 0..n {
        let (ri, pi, qi) = (r[i], dr[i], ddr[i]);
        let s2 = ri * ri + pi * pi;
        let s = s2.sqrt();
        dv.push(pi / ri);
        grad_norm_sq.push((pi / ri).powi(2));
        speed.push(s);
        f.push(s / (ri * ri));
        kappa.push((ri * ri + 2.0 * pi * pi - ri * qi) / (s2 * s));
    }

    let h_step = grid.spacing();
    let (h, a_norm_sq, kappa_parallel, area, da_norm_sq);
    match grid.dim {
        Dim::Curve => {
            a_norm_sq = kappa.iter().map(|k| k * k).collect();
            area = speed.iter().map(|s| s * h_step).collect();
            let ks = grid.d1(&kappa);
            da_norm_sq = ks.iter().zip(&speed).map(|(k, s)| (k / s).powi(2)).collect();
            h = kappa.clone();
            kappa_parallel = None;
        }
        Dim::Surface => {
            let par: Vec<f64> = (0..n)
                .map(|i| {
                    let theta = grid.angle(i);
                    let tangential = if i == 0 || i + 1 == n {
                        ddr[i]
                    } else {
                        dr[i] * theta.cos() / theta.sin()
                    };
                    (r[i] - tangential) / (r[i] * speed[i])
                })
                .collect();
            h = kappa.iter().zip(&par).map(|(a, b)| a + b).collect();
            a_norm_sq = kappa.iter().zip(&par).map(|(a, b)| a * a + b * b).collect();
            area = (0..n)
                .map(|i| r[i] * grid.angle(i).sin() * speed[i] * 2.0 * PI * h_step)
                .collect();
            let k1s = grid.d1(&kappa);
            let k2s = grid.d1(&par);
            da_norm_sq = (0..n)
                .map(|i| {
                    let s2 = speed[i] * speed[i];
                    (k1s[i] * k1s[i] + 3.0 * k2s[i] * k2s[i]) / s2
                })
                .collect();
            kappa_parallel = Some(par);
        }
    }

    finite_or_degenerate("mean curvature", &h)?;
    finite_or_degenerate("support reciprocal", &f)?;

    Ok(GeometryFields {
        r,
        dr,
        ddr,
        dv,
        grad_norm_sq,
        speed,
        f,
        h,
        kappa,
        kappa_parallel,
        a_norm_sq,
        da_norm_sq,
        area,
    })
}

/// Outward unit normals at the nodes (meridian plane for surfaces).
pub fn normals(grid: &Grid, fields: &GeometryFields) -> Vec<Point> {
    (0..grid.len())
        .map(|i| {
            let z = grid.direction(i);
            let e = grid.angular_direction(i);
            let (r, p, s) = (fields.r[i], fields.dr[i], fields.speed[i]);
            [
                (r * z[0] - p * e[0]) / s,
                (r * z[1] - p * e[1]) / s,
                (r * z[2] - p * e[2]) / s,
            ]
        })
        .collect()
}

/// Arc-length derivative of a scalar field along the parametrization.
pub fn arc_gradient(grid: &Grid, fields: &GeometryFields, u: &[f64]) -> Vec<f64> {
    grid.d1(u)
        .into_iter()
        .zip(&fields.speed)
        .map(|(du, s)| du / s)
        .collect()
}

/// Divergence-form Laplace–Beltrami operator using precomputed fields.
///
/// Finite-volume form `Δu_i = (F_{i+½} − F_{i−½}) / V_i` with flux coefficient
/// `√det g · g^{θθ}` averaged to half nodes. For surfaces the control volumes use the
/// exact `∫ sin θ dθ` over each cell so the pole cells stay consistent.
pub fn laplace_beltrami_with(grid: &Grid, fields: &GeometryFields, u: &[f64]) -> Result<Vec<f64>> {
    let n = grid.len();
    if u.len() != n {
        return Err(Error::InvalidArgument(format!(
            "field has {} entries, grid has {n}",
            u.len()
        )));
    }
    finite_or_degenerate("input field", u)?;
    if let Some(i) = fields.speed.iter().position(|s| !(*s > 0.0)) {
        return Err(Error::DegenerateShape(format!("det g <= 0 at node {i}")));
    }
    let h = grid.spacing();
    let s = &fields.speed;
    let r = &fields.r;
    let mut out = vec![0.0; n];
    match grid.dim {
        Dim::Curve => {
            for i in 0..n {
                let (l, rr) = grid.neighbors(i);
                let flux_r = (u[rr] - u[i]) / (0.5 * (s[i] + s[rr]));
                let flux_l = (u[i] - u[l]) / (0.5 * (s[i] + s[l]));
                out[i] = (flux_r - flux_l) / (h * h * s[i]);
            }
        }
        Dim::Surface => {
            // flux[j] lives at θ_{j+½}, j = 0..n-2
            let flux: Vec<f64> = (0..n - 1)
                .map(|j| {
                    let theta = (j as f64 + 0.5) * h;
                    let rm = 0.5 * (r[j] + r[j + 1]);
                    let sm = 0.5 * (s[j] + s[j + 1]);
                    rm * theta.sin() / sm * (u[j + 1] - u[j]) / h
                })
                .collect();
            for i in 0..n {
                let lo = if i == 0 { 0.0 } else { (i as f64 - 0.5) * h };
                let hi = if i + 1 == n { PI } else { (i as f64 + 0.5) * h };
                let volume = r[i] * s[i] * (lo.cos() - hi.cos());
                let right = if i + 1 < n { flux[i] } else { 0.0 };
                let left = if i > 0 { flux[i - 1] } else { 0.0 };
                out[i] = (right - left) / volume;
            }
        }
    }
    Ok(out)
}

pub fn laplace_beltrami(shape: &StarShape, u: &[f64]) -> Result<Vec<f64>> {
    let fields = compute_fields(shape)?;
    laplace_beltrami_with(&shape.grid, &fields, u)
}

/// Largest distance between two points of the hypersurface.
///
/// For surfaces the pairwise search runs over node pairs and azimuth offsets; for a fixed
/// pair the distance grows with the azimuthal offset, so the antipodal offset `π` (one of
/// the sampled azimuths) is the only one that needs evaluating.
pub fn diameter(shape: &StarShape) -> f64 {
    let pts = shape.positions();
    let mut best = 0.0_f64;
    match shape.dim() {
        Dim::Curve => {
            for (i, a) in pts.iter().enumerate() {
                for b in &pts[i + 1..] {
                    best = best.max(dist_sq(a, b));
                }
            }
        }
        Dim::Surface => {
            for a in &pts {
                for b in &pts {
                    let flipped = [-b[0], -b[1], b[2]];
                    best = best.max(dist_sq(a, &flipped));
                }
            }
        }
    }
    best.sqrt()
}
