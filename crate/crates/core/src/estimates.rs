//! Gradient-estimate constants, the cubic barrier, blow-up lower bound, the Φ monitor and
//! evolution-equation residuals.
//!
//! Two conventions for `c₂` coexist: `c·c₁·|X₀|` with `c₁ = 2·max H` (used for the gradient
//! bound horizon) and `c_H·c·|X₀|` (used for the blow-up lower bound). Both are carried in
//! [`Constants`] so they are never mixed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{FlowSeries, Termination};
use crate::geometry::{arc_gradient, compute_fields, diameter, laplace_beltrami_with, Dim, GeometryFields};
use crate::kernel::q_bound_constant;
use crate::verdict::{Check, Verdict};

/// Headroom of the default drift rate `B = 1.1·4·f∞·c_H`.
pub const DRIFT_HEADROOM: f64 = 1.1;

/// Discretization allowance for the maximum-principle monitor.
pub const PHI_TOLERANCE: f64 = 1e-2;

/// Tolerance for algebraic identities.
pub const ALGEBRA_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub n: usize,
    /// `max f` on the initial shape.
    pub f0: f64,
    /// Diameter of the initial shape.
    pub x0_diam: f64,
    /// Q-bound constant.
    pub c: f64,
    /// `2·max H` over `[0, T₀]`.
    pub c1: f64,
    /// `c·c₁·|X₀|`.
    pub c2: f64,
    /// `c_H·c·|X₀|`.
    pub c2_blowup: f64,
    /// `max(c·|X₀|, 1/f₀)`.
    pub c3: f64,
    /// `max H` over the whole series.
    pub c_h: f64,
    /// `max f` over the whole series.
    pub f_inf: f64,
    /// Φ drift rate.
    pub b: f64,
    pub t0: f64,
}

pub fn compute_constants(series: &FlowSeries, t0: f64) -> Result<Constants> {
    if !(t0 > 0.0) {
        return Err(Error::InvalidArgument(format!("T0 must be positive, got {t0}")));
    }
    if series.final_t < t0 * (1.0 - 1e-12) {
        return Err(Error::InsufficientData(format!(
            "series ends at t = {} before T0 = {t0}",
            series.final_t
        )));
    }
    if let Some(d) = series.diagnostics.iter().find(|d| !(d.f_min > 0.0)) {
        return Err(Error::DegenerateShape(format!("f <= 0 at t = {}", d.t)));
    }
    let initial = series.initial();
    let f0 = series.diagnostics[0].f_max;
    let x0_diam = diameter(initial);
    let c = q_bound_constant(initial.dim()).c;
    let c1 = 2.0 * series.max_until(t0, |d| d.h_max);
    let c_h = series.max_until(f64::INFINITY, |d| d.h_max);
    let f_inf = series.max_until(f64::INFINITY, |d| d.f_max);
    Ok(Constants {
        n: initial.dim().n(),
        f0,
        x0_diam,
        c,
        c1,
        c2: c * c1 * x0_diam,
        c2_blowup: c_h * c * x0_diam,
        c3: (c * x0_diam).max(1.0 / f0),
        c_h,
        f_inf,
        b: DRIFT_HEADROOM * 4.0 * f_inf * c_h,
        t0,
    })
}

/// `h(r) = s·c₂·r³ − r + c₃·f₀²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierCubic {
    pub s: f64,
    pub c2: f64,
    pub c3: f64,
    pub f0: f64,
}

impl BarrierCubic {
    pub fn eval(&self, r: f64) -> f64 {
        self.s * self.c2 * r * r * r - r + self.c3 * self.f0 * self.f0
    }

    pub fn derivative(&self, r: f64) -> f64 {
        3.0 * self.c2 * self.s * r * r - 1.0
    }

    /// `2c₃f₀²`, the proved bound on `f`.
    pub fn upper(&self) -> f64 {
        2.0 * self.c3 * self.f0 * self.f0
    }
}

pub fn barrier_h(r: f64, cubic: &BarrierCubic) -> f64 {
    cubic.eval(r)
}

fn poly(a: f64, b: f64, c: f64, d: f64, x: f64) -> f64 {
    ((a * x + b) * x + c) * x + d
}

fn newton_polish(a: f64, b: f64, c: f64, d: f64, mut x: f64) -> f64 {
    for _ in 0..3 {
        let fx = poly(a, b, c, d, x);
        let dfx = (3.0 * a * x + 2.0 * b) * x + c;
        if dfx == 0.0 {
            break;
        }
        let next = x - fx / dfx;
        if poly(a, b, c, d, next).abs() < fx.abs() {
            x = next;
        } else {
            break;
        }
    }
    x
}

/// Real roots of `a x³ + b x² + c x + d` (`a ≠ 0`) by Cardano's formulas, ascending.
///
/// Also returns whether the discriminant is close enough to zero that the root count is
/// ambiguous in floating point.
pub fn cardano_roots(a: f64, b: f64, c: f64, d: f64) -> (Vec<f64>, bool) {
    let shift = b / (3.0 * a);
    let p = (3.0 * a * c - b * b) / (3.0 * a * a);
    let q = (2.0 * b * b * b - 9.0 * a * b * c + 27.0 * a * a * d) / (27.0 * a * a * a);
    let half_q = q / 2.0;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;
    let scale = half_q * half_q + third_p.abs().powi(3);
    let near_double = disc.abs() <= 1e-12 * scale;

    let mut roots = if p == 0.0 && q == 0.0 {
        vec![0.0]
    } else if disc > 0.0 {
        let sq = disc.sqrt();
        // pick the larger-magnitude branch to avoid cancellation
        let u = (-half_q - sq.copysign(half_q)).cbrt();
        let v = if u == 0.0 { 0.0 } else { -third_p / u };
        vec![u + v]
    } else if disc == 0.0 {
        let t = (-half_q).cbrt();
        vec![2.0 * t, -t]
    } else {
        let m = 2.0 * (-third_p).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        (0..3)
            .map(|k| m * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
            .collect()
    };
    for x in roots.iter_mut() {
        *x = newton_polish(a, b, c, d, *x - shift);
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup();
    (roots, near_double)
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Real roots of a cubic by bisection on its monotone pieces, ascending.
pub fn bisection_roots(a: f64, b: f64, c: f64, d: f64) -> Vec<f64> {
    let f = |x: f64| poly(a, b, c, d, x);
    let bound = 1.0 + (b / a).abs().max((c / a).abs()).max((d / a).abs());
    let mut breaks = vec![-bound];
    // critical points of 3a x² + 2b x + c
    let (qa, qb, qc) = (3.0 * a, 2.0 * b, c);
    let disc = qb * qb - 4.0 * qa * qc;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        let k = -0.5 * (qb + sq.copysign(qb));
        let mut crit = if k != 0.0 { vec![k / qa, qc / k] } else { vec![0.0] };
        crit.sort_by(f64::total_cmp);
        breaks.extend(crit.into_iter().filter(|x| x.abs() < bound));
    }
    breaks.push(bound);

    let mut roots = Vec::new();
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (flo, fhi) = (f(lo), f(hi));
        if flo == 0.0 {
            roots.push(lo);
        } else if (flo < 0.0) != (fhi < 0.0) && fhi != 0.0 {
            roots.push(bisect(f, lo, hi));
        }
    }
    if f(bound) == 0.0 {
        roots.push(bound);
    }
    // a double root touches zero without a sign change
    for &x in &breaks[1..breaks.len() - 1] {
        let slope_scale = (a * x * x).abs() + (b * x).abs() + c.abs() + d.abs();
        if f(x).abs() <= 1e-14 * slope_scale && !roots.iter().any(|r| (r - x).abs() < 1e-9) {
            roots.push(x);
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup();
    roots
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierReport {
    pub cubic: BarrierCubic,
    pub cardano: Vec<f64>,
    pub bisection: Vec<f64>,
    /// Largest `|cardano − bisection| / max(1, |root|)`; infinite if the counts differ.
    #[serde(deserialize_with = "crate::verdict::nan_if_null")]
    pub disagreement: f64,
    /// Roots reported below come from bisection.
    pub used_fallback: bool,
    pub roots: Vec<f64>,
    /// `2c₃f₀² < 1/√(6c₂s)`.
    pub hypothesis_holds: bool,
    pub h_at_f0: f64,
    /// `sup h′` on `(0, 2c₃f₀²)`.
    pub max_derivative: f64,
    /// Infimum of `h` on `(f₀, 2c₃f₀²)`.
    pub min_h_on_interval: f64,
    /// Smallest root in `(f₀, 2c₃f₀²)`.
    pub alpha: Option<f64>,
}

impl BarrierReport {
    /// The chain of claims about `h` holds (vacuous if the hypothesis fails).
    pub fn claims_hold(&self) -> bool {
        !self.hypothesis_holds
            || (self.max_derivative < -0.5
                && self.h_at_f0 > 0.0
                && self.min_h_on_interval < 0.0
                && self.alpha.is_some())
    }
}

pub fn barrier_analysis(cubic: &BarrierCubic) -> Result<BarrierReport> {
    if !(cubic.s > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "barrier time s must be positive, got {}",
            cubic.s
        )));
    }
    let a = cubic.s * cubic.c2;
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidArgument(format!("degenerate leading coefficient {a}")));
    }
    let d = cubic.c3 * cubic.f0 * cubic.f0;
    let (cardano, near_double) = cardano_roots(a, 0.0, -1.0, d);
    let bisection = bisection_roots(a, 0.0, -1.0, d);
    let disagreement = if cardano.len() == bisection.len() {
        cardano
            .iter()
            .zip(&bisection)
            .map(|(x, y)| (x - y).abs() / x.abs().max(1.0))
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let used_fallback = near_double || !(disagreement <= ALGEBRA_TOLERANCE);
    let roots = if used_fallback { bisection.clone() } else { cardano.clone() };

    let upper = cubic.upper();
    let hypothesis_holds = upper < 1.0 / (6.0 * cubic.c2 * cubic.s).sqrt();
    // h′ is increasing on r > 0 and h is convex there
    let max_derivative = cubic.derivative(upper);
    let critical = 1.0 / (3.0 * a).sqrt();
    let mut min_h = cubic.eval(cubic.f0).min(cubic.eval(upper));
    if critical > cubic.f0 && critical < upper {
        min_h = min_h.min(cubic.eval(critical));
    }
    let alpha = roots.iter().copied().find(|&r| r > cubic.f0 && r < upper);

    Ok(BarrierReport {
        cubic: *cubic,
        cardano,
        bisection,
        disagreement,
        used_fallback,
        roots,
        hypothesis_holds,
        h_at_f0: cubic.eval(cubic.f0),
        max_derivative,
        min_h_on_interval: min_h,
        alpha,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Horizon {
    /// `min(1/(24c₂c₃²f₀⁴), T₀)`.
    pub t: f64,
    /// `G = 24c₂c₃²`.
    pub g: f64,
    /// `min(1/(G f₀⁴), T₀)`, the same horizon written through `G`.
    pub t_from_g: f64,
    pub t0_binds: bool,
}

pub fn theorem1_t(constants: &Constants) -> Horizon {
    let Constants { c2, c3, f0, t0, .. } = *constants;
    let raw = 1.0 / (24.0 * c2 * c3 * c3 * f0.powi(4));
    let g = 24.0 * c2 * c3 * c3;
    Horizon {
        t: raw.min(t0),
        g,
        t_from_g: (1.0 / (g * f0.powi(4))).min(t0),
        t0_binds: t0 <= raw,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientBoundReport {
    pub horizon: f64,
    /// `2c₃f₀²`.
    pub bound_proved: f64,
    /// `2c₃f₀`.
    pub bound_stated: f64,
    #[serde(deserialize_with = "crate::verdict::nan_if_null")]
    pub f_max_on_window: f64,
    pub proved: Check,
    pub stated: Check,
}

/// Checks `max f(t) ≤ 2c₃f₀²` (and reports `2c₃f₀`) for recorded `t ≤ horizon`.
pub fn verify_gradient_bound(
    series: &FlowSeries,
    constants: &Constants,
    horizon: f64,
) -> Result<GradientBoundReport> {
    let bound_proved = 2.0 * constants.c3 * constants.f0 * constants.f0;
    let bound_stated = 2.0 * constants.c3 * constants.f0;
    let lost = series.termination == Termination::StarShapeLost
        || series.diagnostics.iter().any(|d| !(d.f_min > 0.0));
    if lost {
        return Ok(GradientBoundReport {
            horizon,
            bound_proved,
            bound_stated,
            f_max_on_window: f64::NAN,
            proved: Check::not_applicable(),
            stated: Check::not_applicable(),
        });
    }
    if series.final_t < horizon * (1.0 - 1e-12) {
        return Err(Error::InsufficientData(format!(
            "series ends at t = {} before the horizon {horizon}",
            series.final_t
        )));
    }
    let f_max = series.max_until(horizon, |d| d.f_max);
    Ok(GradientBoundReport {
        horizon,
        bound_proved,
        bound_stated,
        f_max_on_window: f_max,
        proved: Check::margin(bound_proved - f_max),
        stated: Check::margin(bound_stated - f_max),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupLowerBound {
    /// `1/(24·c₂·c₃²·f₀⁴)` with `c₂ = c_H·c·|X₀|`.
    pub bound: f64,
    /// `1/(24·c_H·c³·|X₀|³·f₀⁴)`.
    pub expanded: f64,
}

pub fn theorem2_lower_bound(constants: &Constants) -> Result<BlowupLowerBound> {
    let Constants {
        c_h,
        c,
        x0_diam,
        c2_blowup,
        c3,
        f0,
        ..
    } = *constants;
    if !c_h.is_finite() || !(c_h > 0.0) {
        return Err(Error::InvalidArgument(format!("c_H must be finite and positive, got {c_h}")));
    }
    Ok(BlowupLowerBound {
        bound: 1.0 / (24.0 * c2_blowup * c3 * c3 * f0.powi(4)),
        expanded: 1.0 / (24.0 * c_h * c.powi(3) * x0_diam.powi(3) * f0.powi(4)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiReport {
    pub b: f64,
    /// `(t, max Φ)` for every recorded step.
    pub phi_max_series: Vec<(f64, f64)>,
    /// `max Φ(t) ≤ max Φ(0) + tol`.
    pub bounded: Check,
    /// `max Φ(t_{k+1}) ≤ max Φ(t_k) + tol`.
    pub non_increasing: Check,
    /// Largest `|∇g/g + 2∇f/f|` at the spatial argmax over snapshots.
    #[serde(deserialize_with = "crate::verdict::nan_if_null")]
    pub critical_point_residual: f64,
    /// Kato-type inequality `|∇|A|²|²/(2|A|⁴) ≤ 2|∇A|²/|A|²`, worst relative margin.
    pub kato: Check,
    /// n = 1: largest relative deviation from equality in the Kato inequality.
    pub kato_equality_error: Option<f64>,
}

impl PhiReport {
    fn not_applicable(b: f64) -> Self {
        PhiReport {
            b,
            phi_max_series: Vec::new(),
            bounded: Check::not_applicable(),
            non_increasing: Check::not_applicable(),
            critical_point_residual: f64::NAN,
            kato: Check::not_applicable(),
            kato_equality_error: None,
        }
    }

    pub fn verdict(&self) -> Verdict {
        if self.bounded.verdict == Verdict::NotApplicable {
            Verdict::NotApplicable
        } else if self.bounded.verdict.is_pass()
            && self.non_increasing.verdict.is_pass()
            && self.kato.verdict.is_pass()
        {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

fn grad_a_norm_sq(grid: &crate::geometry::Grid, fields: &GeometryFields) -> Vec<f64> {
    // ∇|A|² by the chain rule on the principal curvatures
    let k1 = &fields.kappa;
    let g1 = arc_gradient(grid, fields, k1);
    match &fields.kappa_parallel {
        None => (0..k1.len()).map(|i| 2.0 * k1[i] * g1[i]).collect(),
        Some(k2) => {
            let g2 = arc_gradient(grid, fields, k2);
            (0..k1.len())
                .map(|i| 2.0 * k1[i] * g1[i] + 2.0 * k2[i] * g2[i])
                .collect()
        }
    }
}

/// Monitors `Φ = log|A|² + 2 log f − B t` over the whole series.
pub fn phi_monitor(series: &FlowSeries, constants: &Constants) -> Result<PhiReport> {
    let b = constants.b;
    if !(b > 4.0 * constants.f_inf * constants.c_h) {
        return Ok(PhiReport::not_applicable(b));
    }
    if series.diagnostics.iter().any(|d| !(d.f_min > 0.0)) {
        return Ok(PhiReport::not_applicable(b));
    }

    let phi_max_series: Vec<(f64, f64)> = series
        .diagnostics
        .iter()
        .map(|d| (d.t, d.log_a2f2_max - b * d.t))
        .collect();
    if phi_max_series.iter().any(|(_, p)| !p.is_finite()) {
        return Err(Error::DegenerateShape("|A|² vanishes identically".into()));
    }
    let initial = phi_max_series[0].1;
    let bounded = phi_max_series
        .iter()
        .map(|(_, p)| initial + PHI_TOLERANCE - p)
        .fold(f64::INFINITY, f64::min);
    let non_increasing = phi_max_series
        .windows(2)
        .map(|w| w[0].1 + PHI_TOLERANCE - w[1].1)
        .fold(f64::INFINITY, f64::min);

    let mut critical = 0.0_f64;
    let mut kato_margin = f64::INFINITY;
    let mut kato_equality = 0.0_f64;
    for snap in &series.snapshots {
        let grid = snap.shape.grid();
        let fields = compute_fields(&snap.shape)?;
        let g = &fields.a_norm_sq;
        let grad_g = grad_a_norm_sq(grid, &fields);
        let grad_f = arc_gradient(grid, &fields, &fields.f);

        let argmax = (0..g.len())
            .filter(|&i| g[i] > 0.0)
            .max_by(|&i, &j| {
                let pi = g[i].ln() + 2.0 * fields.f[i].ln();
                let pj = g[j].ln() + 2.0 * fields.f[j].ln();
                pi.total_cmp(&pj)
            });
        if let Some(i) = argmax {
            critical = critical.max((grad_g[i] / g[i] + 2.0 * grad_f[i] / fields.f[i]).abs());
        }

        for i in 0..g.len() {
            if !(g[i] > 0.0) {
                continue;
            }
            let lhs = grad_g[i] * grad_g[i] / (2.0 * g[i] * g[i]);
            let rhs = 2.0 * fields.da_norm_sq[i] / g[i];
            let scale = rhs.abs().max(1.0);
            kato_margin = kato_margin.min((rhs - lhs) / scale + ALGEBRA_TOLERANCE);
            if snap.shape.dim() == Dim::Curve {
                kato_equality = kato_equality.max((rhs - lhs).abs() / scale);
            }
        }
    }

    Ok(PhiReport {
        b,
        phi_max_series,
        bounded: Check::margin(bounded),
        non_increasing: Check::margin(non_increasing),
        critical_point_residual: critical,
        kato: Check::margin(kato_margin),
        kato_equality_error: (series.initial().dim() == Dim::Curve).then_some(kato_equality),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub times: Vec<f64>,
    /// Max-norm over nodes at each interior snapshot.
    pub per_snapshot: Vec<f64>,
    pub max_abs: f64,
}

fn uniform_snapshots(series: &FlowSeries) -> Result<f64> {
    let snaps = &series.snapshots;
    if snaps.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 snapshots, have {}",
            snaps.len()
        )));
    }
    let dt = snaps[1].t - snaps[0].t;
    if snaps
        .windows(2)
        .any(|w| ((w[1].t - w[0].t) - dt).abs() > 1e-9 * dt)
    {
        return Err(Error::InvalidArgument("snapshots are not uniformly spaced".into()));
    }
    Ok(dt)
}

/// Shared driver: `pointwise(fields_k, dq_dt_at_fixed_z, tangential_transport)`.
fn evolution_residual(
    series: &FlowSeries,
    quantity: impl Fn(&GeometryFields) -> Vec<f64>,
    pointwise: impl Fn(&crate::geometry::Grid, &GeometryFields, &[f64], &[f64]) -> Result<Vec<f64>>,
) -> Result<ResidualReport> {
    let dt = uniform_snapshots(series)?;
    let fields = series
        .snapshots
        .iter()
        .map(|s| compute_fields(&s.shape))
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<Vec<f64>> = fields.iter().map(&quantity).collect();

    let mut report = ResidualReport {
        times: Vec::new(),
        per_snapshot: Vec::new(),
        max_abs: 0.0,
    };
    for k in 1..fields.len() - 1 {
        let grid = series.snapshots[k].shape.grid();
        let fk = &fields[k];
        let dq: Vec<f64> = (0..values[k].len())
            .map(|i| (values[k + 1][i] - values[k - 1][i]) / (2.0 * dt))
            .collect();
        // the parametrization moves radially; its tangential part transports q along
        // the unit tangent with speed r·v_t·⟨z, e⟩ = r·v_t·r′/s
        let grad_q = arc_gradient(grid, fk, &values[k]);
        let transport: Vec<f64> = (0..dq.len())
            .map(|i| {
                let v_t = -fk.h[i] * fk.f[i];
                fk.r[i] * v_t * fk.dr[i] / fk.speed[i] * grad_q[i]
            })
            .collect();
        let res = pointwise(grid, fk, &dq, &transport)?;
        let m = res.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        report.times.push(series.snapshots[k].t);
        report.per_snapshot.push(m);
        report.max_abs = report.max_abs.max(m);
    }
    Ok(report)
}

/// Residual of `f_t − Δf = −(2/f)|∇f|² + 2f²H − |A|²f` along the run.
pub fn residual_f_evolution(series: &FlowSeries) -> Result<ResidualReport> {
    evolution_residual(
        series,
        |g| g.f.clone(),
        |grid, g, df_dt, transport| {
            let lap = laplace_beltrami_with(grid, g, &g.f)?;
            let grad = arc_gradient(grid, g, &g.f);
            Ok((0..g.f.len())
                .map(|i| {
                    let f = g.f[i];
                    let normal_rate = df_dt[i] - transport[i];
                    normal_rate - lap[i] + 2.0 * grad[i] * grad[i] / f - 2.0 * f * f * g.h[i]
                        + g.a_norm_sq[i] * f
                })
                .collect())
        },
    )
}

/// Residual of `∂_t|A|² − Δ|A|² = −2|∇A|² + 2|A|⁴`; `None` for surfaces.
pub fn residual_a_evolution(series: &FlowSeries) -> Result<Option<ResidualReport>> {
    if series.initial().dim() != Dim::Curve {
        return Ok(None);
    }
    evolution_residual(
        series,
        |g| g.a_norm_sq.clone(),
        |grid, g, dg_dt, transport| {
            let lap = laplace_beltrami_with(grid, g, &g.a_norm_sq)?;
            Ok((0..g.h.len())
                .map(|i| {
                    let a2 = g.a_norm_sq[i];
                    dg_dt[i] - transport[i] - lap[i] + 2.0 * g.da_norm_sq[i] - 2.0 * a2 * a2
                })
                .collect())
        },
    )
    .map(Some)
}
