//! Mean curvature flow of a radial graph.
//!
//! With normal speed `−H` and `⟨z, ν⟩ = 1/√(1+|∇v|²)` the flow reduces to the scalar
//! equation `∂_t v = −(H/r)·√(1+|∇v|²) = −H·f` at fixed direction `z`. It is advanced
//! with classical RK4 under a parabolic step restriction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{compute_fields, GeometryFields, StarShape};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowConfig {
    pub cfl_factor: f64,
    pub t_end: f64,
    /// Stop once `max |A|²` exceeds this.
    pub blowup_threshold: f64,
    pub snapshot_interval: f64,
    pub max_steps: u64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            cfl_factor: 0.2,
            t_end: 10.0,
            blowup_threshold: 1e6,
            snapshot_interval: 1e-2,
            max_steps: 20_000_000,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidFlowConfig(msg));
        if !(self.cfl_factor > 0.0 && self.cfl_factor <= 0.5) {
            return bad(format!("cfl_factor must lie in (0, 0.5], got {}", self.cfl_factor));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if !(self.blowup_threshold > 0.0) {
            return bad(format!(
                "blowup_threshold must be positive, got {}",
                self.blowup_threshold
            ));
        }
        if !(self.snapshot_interval > 0.0) || !self.snapshot_interval.is_finite() {
            return bad(format!(
                "snapshot_interval must be positive, got {}",
                self.snapshot_interval
            ));
        }
        if self.max_steps == 0 {
            return bad("max_steps must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ReachedTEnd,
    BlowupDetected,
    StarShapeLost,
    StepLimit,
}

/// Scalar diagnostics recorded after every step (and at `t = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    /// Step that produced this state; zero for the initial record.
    pub dt: f64,
    pub f_max: f64,
    pub f_min: f64,
    pub h_max: f64,
    pub a2_max: f64,
    pub area: f64,
    /// `max (log|A|² + 2 log f)` over nodes with `|A|² > 0`.
    pub log_a2f2_max: f64,
}

impl StepRecord {
    pub fn from_fields(t: f64, dt: f64, fields: &GeometryFields) -> Self {
        let max = |u: &[f64]| u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_a2f2_max = fields
            .a_norm_sq
            .iter()
            .zip(&fields.f)
            .filter(|(a, _)| **a > 0.0)
            .map(|(a, f)| a.ln() + 2.0 * f.ln())
            .fold(f64::NEG_INFINITY, f64::max);
        StepRecord {
            t,
            dt,
            f_max: max(&fields.f),
            f_min: fields.f.iter().copied().fold(f64::INFINITY, f64::min),
            h_max: max(&fields.h),
            a2_max: max(&fields.a_norm_sq),
            area: fields.total_area(),
            log_a2f2_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub shape: StarShape,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSeries {
    pub config: FlowConfig,
    /// Snapshots at `t = k·snapshot_interval`, starting with the initial shape.
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: Vec<StepRecord>,
    pub termination: Termination,
    /// Last valid state and its time.
    pub final_shape: StarShape,
    pub final_t: f64,
}

impl FlowSeries {
    pub fn initial(&self) -> &StarShape {
        &self.snapshots[0].shape
    }

    /// Copy restricted to `t ≤ t_max` (snapshots and diagnostics).
    pub fn truncated(&self, t_max: f64) -> FlowSeries {
        let eps = 1e-12 * t_max.abs().max(1.0);
        let snapshots: Vec<Snapshot> = self
            .snapshots
            .iter()
            .filter(|s| s.t <= t_max + eps)
            .cloned()
            .collect();
        let diagnostics: Vec<StepRecord> = self
            .diagnostics
            .iter()
            .filter(|d| d.t <= t_max + eps)
            .copied()
            .collect();
        let last = snapshots.last().expect("initial snapshot always kept");
        let (final_shape, final_t, termination) = if self.final_t <= t_max + eps {
            (self.final_shape.clone(), self.final_t, self.termination)
        } else {
            (last.shape.clone(), last.t, Termination::ReachedTEnd)
        };
        FlowSeries {
            config: FlowConfig {
                t_end: t_max,
                ..self.config
            },
            snapshots,
            diagnostics,
            termination,
            final_shape,
            final_t,
        }
    }

    /// Maximum of a diagnostic over records with `t ≤ t_max`.
    pub fn max_until(&self, t_max: f64, pick: impl Fn(&StepRecord) -> f64) -> f64 {
        self.diagnostics
            .iter()
            .filter(|d| d.t <= t_max * (1.0 + 1e-12))
            .map(pick)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn rhs_from_fields(fields: &GeometryFields) -> Vec<f64> {
    fields.h.iter().zip(&fields.f).map(|(h, f)| -h * f).collect()
}

/// `∂v/∂t` at fixed direction.
pub fn rhs(shape: &StarShape) -> Result<Vec<f64>> {
    Ok(rhs_from_fields(&compute_fields(shape)?))
}

/// Largest admissible step `cfl·(Δx·r_min)² / (1 + max|∇v|²)`.
pub fn stable_dt(shape: &StarShape, fields: &GeometryFields, cfl_factor: f64) -> f64 {
    let r_min = fields.r.iter().copied().fold(f64::INFINITY, f64::min);
    let grad_max = fields.grad_norm_sq.iter().copied().fold(0.0, f64::max);
    let dx = shape.grid().spacing();
    cfl_factor * (dx * r_min).powi(2) / (1.0 + grad_max)
}

fn axpy(v: &[f64], a: f64, k: &[f64]) -> Vec<f64> {
    v.iter().zip(k).map(|(v, k)| v + a * k).collect()
}

fn rk4(shape: &StarShape, dt: f64, k1: Vec<f64>) -> Result<StarShape> {
    let grid = *shape.grid();
    let v = shape.log_radius();
    let stage = |u: Vec<f64>| -> Result<Vec<f64>> {
        rhs(&StarShape::from_parts_unchecked(grid, u))
    };
    let k2 = stage(axpy(v, 0.5 * dt, &k1))?;
    let k3 = stage(axpy(v, 0.5 * dt, &k2))?;
    let k4 = stage(axpy(v, dt, &k3))?;
    let next: Vec<f64> = (0..v.len())
        .map(|i| v[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    if let Some(i) = next.iter().position(|x| !x.is_finite()) {
        return Err(Error::DegenerateShape(format!(
            "non-finite log-radius at node {i} after step dt = {dt:e}"
        )));
    }
    Ok(StarShape::from_parts_unchecked(grid, next))
}

/// One RK4 step of size `dt`. The caller is responsible for the step restriction.
pub fn step(shape: &StarShape, dt: f64) -> Result<StarShape> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {dt}")));
    }
    rk4(shape, dt, rhs(shape)?)
}

/// Integrates until `t_end`, curvature blow-up, loss of a valid graph, or the step limit.
pub fn run(initial: &StarShape, config: &FlowConfig) -> Result<FlowSeries> {
    config.validate()?;
    let mut shape = initial.clone();
    let mut t = 0.0_f64;
    let mut dt_taken = 0.0;
    let mut steps = 0_u64;
    let mut snapshots = vec![Snapshot {
        t: 0.0,
        shape: shape.clone(),
    }];
    let mut next_snapshot = 1_u64;
    let mut diagnostics = Vec::new();

    let termination = loop {
        let fields = match compute_fields(&shape) {
            Ok(f) => f,
            Err(_) => break Termination::StarShapeLost,
        };
        let record = StepRecord::from_fields(t, dt_taken, &fields);
        if !(record.f_min > 0.0) || !record.f_max.is_finite() {
            break Termination::StarShapeLost;
        }
        diagnostics.push(record);
        if record.a2_max > config.blowup_threshold {
            break Termination::BlowupDetected;
        }
        if t >= config.t_end {
            break Termination::ReachedTEnd;
        }
        if steps >= config.max_steps {
            break Termination::StepLimit;
        }

        let snapshot_t = next_snapshot as f64 * config.snapshot_interval;
        let target = config.t_end.min(snapshot_t);
        let mut dt = stable_dt(&shape, &fields, config.cfl_factor);
        let lands = t + dt >= target * (1.0 - 1e-14);
        if lands {
            dt = target - t;
        }
        let k1 = rhs_from_fields(&fields);
        shape = match rk4(&shape, dt, k1) {
            Ok(next) => next,
            Err(_) => break Termination::StarShapeLost,
        };
        t = if lands { target } else { t + dt };
        dt_taken = dt;
        steps += 1;
        if lands && snapshot_t <= target * (1.0 + 1e-14) {
            snapshots.push(Snapshot {
                t,
                shape: shape.clone(),
            });
            next_snapshot += 1;
        }
    };

    // on loss of validity, fall back to the last recorded state
    let (final_shape, final_t) = if termination == Termination::StarShapeLost {
        let last = diagnostics.last().map_or(0.0, |d| d.t);
        let shape = snapshots
            .iter()
            .rev()
            .find(|s| s.t <= last)
            .map_or_else(|| initial.clone(), |s| s.shape.clone());
        snapshots.retain(|s| s.t <= last);
        (shape, last)
    } else {
        (shape, t)
    };

    Ok(FlowSeries {
        config: *config,
        snapshots,
        diagnostics,
        termination,
        final_shape,
        final_t,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupEstimate {
    pub time: f64,
    /// False when the tail of `1/max|A|²` was not monotone and `time` is the last recorded t.
    pub confident: bool,
    pub points: usize,
    /// Slope of the affine fit of `1/max|A|²` against t.
    #[serde(deserialize_with = "crate::verdict::nan_if_null")]
    pub slope: f64,
}

/// Extrapolates the zero crossing of `1/max|A|²`, which is affine in `t` at type-I rate.
pub fn estimate_blowup_time(series: &FlowSeries) -> Result<BlowupEstimate> {
    if series.termination != Termination::BlowupDetected {
        return Err(Error::InsufficientData(format!(
            "run terminated with {:?}, not blow-up",
            series.termination
        )));
    }
    let diag = &series.diagnostics;
    let initial = diag[0].a2_max;
    let grown = diag.iter().filter(|d| d.a2_max > 10.0 * initial).count();
    if grown < 10 {
        return Err(Error::InsufficientData(format!(
            "only {grown} records with max|A|² above ten times its initial value"
        )));
    }
    let last = diag.last().unwrap();
    let start = diag
        .iter()
        .rposition(|d| d.a2_max < last.a2_max / 10.0)
        .map_or(0, |i| i + 1);
    let start = start.min(diag.len() - 10);
    let tail = &diag[start..];

    let monotone = tail.windows(2).all(|w| w[1].a2_max >= w[0].a2_max);
    if !monotone {
        return Ok(BlowupEstimate {
            time: last.t,
            confident: false,
            points: tail.len(),
            slope: f64::NAN,
        });
    }

    let m = tail.len() as f64;
    let t_mean = tail.iter().map(|d| d.t).sum::<f64>() / m;
    let y_mean = tail.iter().map(|d| 1.0 / d.a2_max).sum::<f64>() / m;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for d in tail {
        let dx = d.t - t_mean;
        sxy += dx * (1.0 / d.a2_max - y_mean);
        sxx += dx * dx;
    }
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return Ok(BlowupEstimate {
            time: last.t,
            confident: false,
            points: tail.len(),
            slope,
        });
    }
    Ok(BlowupEstimate {
        time: t_mean - y_mean / slope,
        confident: true,
        points: tail.len(),
        slope,
    })
}
