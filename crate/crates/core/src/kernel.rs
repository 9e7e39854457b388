//! Backward heat kernel and Gaussian-weighted surface integrals.
//!
//! The kernel centered at `(Y, s)` is `ρ(X, t) = (4πτ)^{-n/2} exp(−|X−Y|²/4τ)` with
//! `τ = s − t`, where `n` is the dimension of the hypersurface. Integrals over the flow
//! use the trapezoid rule on the parameter grid; for surfaces with an off-axis center
//! the azimuth is sampled explicitly.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{FlowSeries, Termination};
use crate::geometry::{
    arc_gradient, compute_fields, dist_sq, dot, normals, Dim, GeometryFields, Point, StarShape,
};
use crate::verdict::Check;

/// Azimuthal nodes used when the kernel center is off the symmetry axis.
pub const AZIMUTH_NODES: usize = 128;

/// Quadrature flags `τ < UNDER_RESOLVED_FACTOR · (Δx·r_min)²`.
pub const UNDER_RESOLVED_FACTOR: f64 = 10.0;

/// Half-aperture of the spherical cap `S₁` around `z₀`.
pub const CAP_APERTURE: f64 = PI / 3.0;

/// Space-time center of the backward heat kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelPoint {
    pub center: Point,
    pub s: f64,
}

impl KernelPoint {
    pub fn new(center: Point, s: f64) -> Self {
        KernelPoint { center, s }
    }

    pub fn tau(&self, t: f64) -> Result<f64> {
        let tau = self.s - t;
        if tau > 0.0 {
            Ok(tau)
        } else {
            Err(Error::NonPositiveTau { tau })
        }
    }

    fn on_axis(&self) -> bool {
        let scale = self.center.iter().fold(1.0_f64, |m, c| m.max(c.abs()));
        self.center[0].abs() <= 1e-14 * scale && self.center[1].abs() <= 1e-14 * scale
    }
}

fn density(dim: Dim, d2: f64, tau: f64) -> f64 {
    (4.0 * PI * tau).powf(-0.5 * dim.n() as f64) * (-d2 / (4.0 * tau)).exp()
}

pub fn rho(dim: Dim, x: &Point, t: f64, kp: &KernelPoint) -> Result<f64> {
    let tau = kp.tau(t)?;
    Ok(density(dim, dist_sq(x, &kp.center), tau))
}

/// Quadrature nodes over the full hypersurface: node index, position, normal, weight
/// fraction of the node's area element.
fn quadrature_nodes(
    shape: &StarShape,
    nu: &[Point],
    kp: &KernelPoint,
) -> Vec<(usize, Point, Point, f64)> {
    let pts = shape.positions();
    match shape.dim() {
        Dim::Surface if !kp.on_axis() => {
            let mut out = Vec::with_capacity(pts.len() * AZIMUTH_NODES);
            for m in 0..AZIMUTH_NODES {
                let (sn, cs) = (2.0 * PI * m as f64 / AZIMUTH_NODES as f64).sin_cos();
                let rot = |p: &Point| [p[0] * cs, p[0] * sn, p[2]];
                for (i, (x, n)) in pts.iter().zip(nu).enumerate() {
                    out.push((i, rot(x), rot(n), 1.0 / AZIMUTH_NODES as f64));
                }
            }
            out
        }
        _ => pts
            .into_iter()
            .zip(nu.iter().copied())
            .enumerate()
            .map(|(i, (x, n))| (i, x, n, 1.0))
            .collect(),
    }
}

fn under_resolved(shape: &StarShape, fields: &GeometryFields, tau: f64) -> bool {
    let r_min = fields.r.iter().copied().fold(f64::INFINITY, f64::min);
    tau < UNDER_RESOLVED_FACTOR * (shape.grid().spacing() * r_min).powi(2)
}

/// Kernel-weighted integrals of the flow quantities at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedIntegrals {
    /// `∫ρ dμ`
    pub mass: f64,
    /// `∫fρ dμ`
    pub f_mass: f64,
    /// `∫f²Hρ dμ`
    pub drive: f64,
    /// `∫fρ|H⃗ + X^⊥/(2τ)|² dμ`
    pub dissipation: f64,
    /// `∫(2ρ/f)|∇f|² dμ`
    pub gradient_term: f64,
    /// `∫|A|²fρ dμ`
    pub curvature_term: f64,
    pub under_resolved: bool,
}

impl WeightedIntegrals {
    /// Right-hand side of the evolution of `∫fρ dμ`.
    pub fn f_mass_rate(&self) -> f64 {
        -self.dissipation - self.gradient_term + 2.0 * self.drive - self.curvature_term
    }
}

pub fn weighted_integrals(shape: &StarShape, t: f64, kp: &KernelPoint) -> Result<WeightedIntegrals> {
    let tau = kp.tau(t)?;
    let fields = compute_fields(shape)?;
    let nu = normals(shape.grid(), &fields);
    let df = arc_gradient(shape.grid(), &fields, &fields.f);
    let dim = shape.dim();

    let mut w = WeightedIntegrals {
        mass: 0.0,
        f_mass: 0.0,
        drive: 0.0,
        dissipation: 0.0,
        gradient_term: 0.0,
        curvature_term: 0.0,
        under_resolved: under_resolved(shape, &fields, tau),
    };
    for (i, x, n, frac) in quadrature_nodes(shape, &nu, kp) {
        let rel = [x[0] - kp.center[0], x[1] - kp.center[1], x[2] - kp.center[2]];
        let rho = density(dim, dot(&rel, &rel), tau);
        let dmu = fields.area[i] * frac;
        let (f, h) = (fields.f[i], fields.h[i]);
        // H⃗ + X^⊥/(2τ) = (−H + ⟨X−Y, ν⟩/(2τ)) ν
        let normal_part = -h + dot(&rel, &n) / (2.0 * tau);
        w.mass += rho * dmu;
        w.f_mass += f * rho * dmu;
        w.drive += f * f * h * rho * dmu;
        w.dissipation += f * rho * normal_part * normal_part * dmu;
        w.gradient_term += 2.0 * rho / f * df[i] * df[i] * dmu;
        w.curvature_term += fields.a_norm_sq[i] * f * rho * dmu;
    }
    Ok(w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    /// Interior snapshot times where the identity was evaluated.
    pub times: Vec<f64>,
    /// Centered time difference of `∫fρ dμ`.
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// `2∫f²Hρ dμ` at the same times.
    pub twice_drive: Vec<f64>,
    /// `∫ρ dμ` at the same times.
    pub mass: Vec<f64>,
    pub max_residual: f64,
    pub under_resolved: bool,
}

fn snapshot_spacing(series: &FlowSeries, kp: &KernelPoint) -> Result<(usize, f64)> {
    let usable = series.snapshots.iter().take_while(|s| s.t < kp.s).count();
    if usable < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 snapshots before the kernel time, have {usable}"
        )));
    }
    let snaps = &series.snapshots[..usable];
    let dt = snaps[1].t - snaps[0].t;
    if snaps
        .windows(2)
        .any(|w| ((w[1].t - w[0].t) - dt).abs() > 1e-9 * dt.max(1e-300))
    {
        return Err(Error::InvalidArgument("snapshots are not uniformly spaced".into()));
    }
    Ok((usable, dt))
}

/// Compares the time derivative of `∫fρ dμ` with its closed-form evolution.
pub fn check_identity(series: &FlowSeries, kp: &KernelPoint) -> Result<IdentityReport> {
    let (usable, dt) = snapshot_spacing(series, kp)?;
    let ints = series.snapshots[..usable]
        .iter()
        .map(|s| weighted_integrals(&s.shape, s.t, kp))
        .collect::<Result<Vec<_>>>()?;

    let mut report = IdentityReport {
        times: Vec::new(),
        lhs: Vec::new(),
        rhs: Vec::new(),
        twice_drive: Vec::new(),
        mass: Vec::new(),
        max_residual: 0.0,
        under_resolved: ints.iter().any(|w| w.under_resolved),
    };
    for k in 1..usable - 1 {
        let lhs = (ints[k + 1].f_mass - ints[k - 1].f_mass) / (2.0 * dt);
        let rhs = ints[k].f_mass_rate();
        report.times.push(series.snapshots[k].t);
        report.lhs.push(lhs);
        report.rhs.push(rhs);
        report.twice_drive.push(2.0 * ints[k].drive);
        report.mass.push(ints[k].mass);
        report.max_residual = report.max_residual.max((lhs - rhs).abs());
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    #[serde(deserialize_with = "crate::verdict::nan_if_null")]
    pub tolerance: f64,
    /// `d/dt ∫fρ ≤ 2∫f²Hρ`, worst `2·drive + tol − lhs`.
    pub drive_bound: Check,
    /// `d/dt ∫fρ ≤ c₁ f∞² ∫ρ`, worst margin.
    pub mass_bound: Check,
    #[serde(deserialize_with = "crate::verdict::nan_if_null")]
    pub c1: f64,
    #[serde(deserialize_with = "crate::verdict::nan_if_null")]
    pub f_inf: f64,
    #[serde(deserialize_with = "crate::verdict::nan_if_null")]
    pub identity_residual: f64,
}

/// Checks the two upper bounds for the growth of `∫fρ dμ` along the run.
pub fn check_monotonicity(series: &FlowSeries, kp: &KernelPoint) -> Result<MonotonicityReport> {
    if series.termination == Termination::StarShapeLost {
        return Ok(MonotonicityReport {
            tolerance: f64::NAN,
            drive_bound: Check::not_applicable(),
            mass_bound: Check::not_applicable(),
            c1: f64::NAN,
            f_inf: f64::NAN,
            identity_residual: f64::NAN,
        });
    }
    let identity = check_identity(series, kp)?;
    let last = identity.times.last().copied().unwrap_or(0.0);
    let c1 = 2.0 * series.max_until(last, |d| d.h_max);
    let f_inf = series.max_until(last, |d| d.f_max);
    let tol = 10.0 * identity.max_residual;

    let mut drive_margin = f64::INFINITY;
    let mut mass_margin = f64::INFINITY;
    for k in 0..identity.times.len() {
        let lhs = identity.lhs[k];
        drive_margin = drive_margin.min(identity.twice_drive[k] + tol - lhs);
        mass_margin = mass_margin.min(c1 * f_inf * f_inf * identity.mass[k] + tol - lhs);
    }
    Ok(MonotonicityReport {
        tolerance: tol,
        drive_bound: Check::margin(drive_margin),
        mass_bound: Check::margin(mass_margin),
        c1,
        f_inf,
        identity_residual: identity.max_residual,
    })
}

/// `Q = ∫_{Sⁿ} (4πτ)^{-n/2} e^{−|rz−Y|²/4τ} r^{n+1} dz`.
pub fn q_value(shape: &StarShape, t: f64, kp: &KernelPoint) -> Result<f64> {
    let tau = kp.tau(t)?;
    let dim = shape.dim();
    let grid = shape.grid();
    let weights = grid.sphere_weights();
    let r = shape.radius();
    let pts = shape.positions();
    let power = dim.n() as i32 + 1;
    let mut q = 0.0;
    if dim == Dim::Surface && !kp.on_axis() {
        for m in 0..AZIMUTH_NODES {
            let (sn, cs) = (2.0 * PI * m as f64 / AZIMUTH_NODES as f64).sin_cos();
            for i in 0..r.len() {
                let x = [pts[i][0] * cs, pts[i][0] * sn, pts[i][2]];
                q += density(dim, dist_sq(&x, &kp.center), tau) * r[i].powi(power) * weights[i];
            }
        }
        q /= AZIMUTH_NODES as f64;
    } else {
        for i in 0..r.len() {
            q += density(dim, dist_sq(&pts[i], &kp.center), tau) * r[i].powi(power) * weights[i];
        }
    }
    Ok(q)
}

/// Constants of the case analysis bounding `Q` by `c·diam(M₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QBoundConstants {
    pub n: usize,
    /// Chart gradient bound of the cap `S₁` over the tangent plane at `z₀`.
    pub c0: f64,
    /// Center at the origin.
    pub c1: f64,
    /// `r/r₀ ≥ 2`.
    pub c2: f64,
    /// `r/r₀ < 2`, cap part.
    pub c3: f64,
    /// `r/r₀ < 2`, complement of the cap.
    pub c4: f64,
    pub c: f64,
}

/// `max_{φ>0} e^{−aφ} φ^{n/2} = (n/(2a))^{n/2} e^{−n/2}`.
fn gaussian_moment_peak(n: f64, a: f64) -> f64 {
    (n / (2.0 * a)).powf(n / 2.0) * (-n / 2.0).exp()
}

pub fn q_bound_constant(dim: Dim) -> QBoundConstants {
    let n = dim.n() as f64;
    let prefactor = dim.unit_sphere_area() / PI.powf(n / 2.0);
    let c0 = 1.0 / CAP_APERTURE.cos();
    let c1 = prefactor * gaussian_moment_peak(n, 1.0);
    let c2 = prefactor * gaussian_moment_peak(n, 0.25);
    // ∫_{ℝⁿ} e^{−(3/4)|x|²} dx = (4π/3)^{n/2}
    let c3 = c0 * PI.powf(-n / 2.0) * 2f64.powf(n) * (4.0 * PI / 3.0).powf(n / 2.0);
    let c4 = 2f64.powf(n) * prefactor * gaussian_moment_peak(n, 0.5);
    QBoundConstants {
        n: dim.n(),
        c0,
        c1,
        c2,
        c3,
        c4,
        c: c1.max(c2).max(c3).max(c4),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseCounts {
    pub far: usize,
    pub cap: usize,
    pub complement: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseReport {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub counts: CaseCounts,
    /// Violations per case: `r/r₀ ≥ 2`, cap distance bound, cap chart bound, complement.
    pub violations_far: usize,
    pub violations_cap_distance: usize,
    pub violations_cap_chart: usize,
    pub violations_complement: usize,
}

impl CaseReport {
    pub fn total_violations(&self) -> usize {
        self.violations_far
            + self.violations_cap_distance
            + self.violations_cap_chart
            + self.violations_complement
    }
}

fn random_direction(dim: Dim, rng: &mut ChaCha8Rng) -> Point {
    match dim {
        Dim::Curve => {
            let a = rng.gen_range(0.0..2.0 * PI);
            [a.cos(), a.sin(), 0.0]
        }
        Dim::Surface => {
            let z: f64 = rng.gen_range(-1.0..=1.0);
            let psi = rng.gen_range(0.0..2.0 * PI);
            let rho = (1.0 - z * z).max(0.0).sqrt();
            [rho * psi.cos(), rho * psi.sin(), z]
        }
    }
}

/// Pointwise inequalities used by the case analysis, with `r₀ = 1` (they are homogeneous).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseSample {
    pub ratio: f64,
    pub z: Point,
    pub z0: Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseOutcome {
    Far { ok: bool },
    Cap { distance_ok: bool, chart_ok: bool },
    Complement { ok: bool },
}

const CASE_TOL: f64 = 1e-12;

pub fn classify_case(dim: Dim, sample: &CaseSample, c0: f64) -> CaseOutcome {
    let CaseSample { ratio: q, z, z0 } = *sample;
    let qz_minus = [q * z[0] - z0[0], q * z[1] - z0[1], q * z[2] - z0[2]];
    let lhs = dot(&qz_minus, &qz_minus);
    if q >= 2.0 {
        let ok = lhs >= (q - 1.0).powi(2) - CASE_TOL && (q - 1.0).powi(2) >= q * q / 4.0 - CASE_TOL;
        return CaseOutcome::Far { ok };
    }
    let cos_a = dot(&z, &z0).clamp(-1.0, 1.0);
    if cos_a >= CAP_APERTURE.cos() {
        let chord = dist_sq(&z, &z0);
        let distance_ok = lhs >= 0.75 * chord - CASE_TOL;
        // z = (x, u(x)) over the tangent plane at z0: |x| ≤ |z − z0|, dz ≤ c0 dx, (r/r0)^n ≤ 2^n
        let x = [z[0] - cos_a * z0[0], z[1] - cos_a * z0[1], z[2] - cos_a * z0[2]];
        let chart_ok = dot(&x, &x) <= chord + CASE_TOL
            && 1.0 / cos_a <= c0 + CASE_TOL
            && q.powi(dim.n() as i32) <= 2f64.powi(dim.n() as i32);
        CaseOutcome::Cap {
            distance_ok,
            chart_ok,
        }
    } else {
        CaseOutcome::Complement {
            ok: lhs >= 0.5 - CASE_TOL,
        }
    }
}

/// Monte Carlo check of the case inequalities over random `r/r₀ ∈ (0, 10)`, `z`, `z₀`.
pub fn verify_case_inequalities(dim: Dim, samples: usize, seed: u64) -> Result<CaseReport> {
    if samples < 1000 {
        return Err(Error::InvalidArgument(format!(
            "need at least 1000 samples, got {samples}"
        )));
    }
    let c0 = q_bound_constant(dim).c0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CaseReport {
        n: dim.n(),
        samples,
        seed,
        counts: CaseCounts::default(),
        violations_far: 0,
        violations_cap_distance: 0,
        violations_cap_chart: 0,
        violations_complement: 0,
    };
    for _ in 0..samples {
        let ratio = loop {
            let q: f64 = rng.gen_range(0.0..10.0);
            if q > 0.0 {
                break q;
            }
        };
        let sample = CaseSample {
            ratio,
            z: random_direction(dim, &mut rng),
            z0: random_direction(dim, &mut rng),
        };
        match classify_case(dim, &sample, c0) {
            CaseOutcome::Far { ok } => {
                report.counts.far += 1;
                report.violations_far += usize::from(!ok);
            }
            CaseOutcome::Cap {
                distance_ok,
                chart_ok,
            } => {
                report.counts.cap += 1;
                report.violations_cap_distance += usize::from(!distance_ok);
                report.violations_cap_chart += usize::from(!chart_ok);
            }
            CaseOutcome::Complement { ok } => {
                report.counts.complement += 1;
                report.violations_complement += usize::from(!ok);
            }
        }
    }
    Ok(report)
}
