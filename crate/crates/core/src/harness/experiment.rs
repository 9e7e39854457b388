//! Per-grid pipelines and the assembled [`RunReport`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::estimates::{
    barrier_analysis, compute_constants, phi_monitor, residual_a_evolution,
    residual_f_evolution, theorem1_t, theorem2_lower_bound, verify_gradient_bound,
    BarrierCubic, BarrierReport, BlowupLowerBound, Constants, GradientBoundReport, Horizon,
    PhiReport,
};
use crate::flow::{estimate_blowup_time, run, BlowupEstimate, FlowConfig, FlowSeries, Termination};
use crate::geometry::{compute_fields, diameter, make_shape, Point, StarShape};
use crate::kernel::{
    check_identity, check_monotonicity, q_bound_constant, q_value, verify_case_inequalities,
    CaseReport, KernelPoint, MonotonicityReport,
};
use crate::verdict::{Check, Verdict};

use super::config::ExperimentConfig;

/// Residuals below this are treated as exact and exempt from the order requirement.
pub const RESIDUAL_FLOOR: f64 = 1e-6;
pub const MIN_RESIDUAL_ORDER: f64 = 1.5;

/// Relative slack of the sphere-comparison bracket, for the extrapolated blow-up time.
pub const BRACKET_TOLERANCE: f64 = 1e-2;

/// Fraction of the measured blow-up time used as the default `T₀`.
const T0_FRACTION: f64 = 0.2;
/// Fraction of the measured blow-up time used as the default Φ window.
const PHI_FRACTION: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Flow to blow-up plus every estimate and kernel check.
    Full,
    /// Short finely sampled runs only, for residual orders.
    Convergence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageError {
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowSummary {
    pub termination: Termination,
    pub steps: usize,
    pub final_t: f64,
    pub final_a2_max: f64,
    pub final_f_max: f64,
    /// `(r_min², r_max²)/(2n)` of the initial shape: inscribed and enclosing sphere times.
    pub blowup_bracket: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiSummary {
    pub window: f64,
    pub b: f64,
    pub phi_initial: Option<f64>,
    pub phi_max: Option<f64>,
    pub bounded: Check,
    pub non_increasing: Check,
    #[serde(deserialize_with = "crate::verdict::nan_if_null")]
    pub critical_point_residual: f64,
    pub kato: Check,
    pub kato_equality_error: Option<f64>,
    pub verdict: Verdict,
}

impl PhiSummary {
    fn new(window: f64, report: &PhiReport) -> Self {
        PhiSummary {
            window,
            b: report.b,
            phi_initial: report.phi_max_series.first().map(|p| p.1),
            phi_max: report
                .phi_max_series
                .iter()
                .map(|p| p.1)
                .reduce(f64::max),
            bounded: report.bounded,
            non_increasing: report.non_increasing,
            critical_point_residual: report.critical_point_residual,
            kato: report.kato,
            kato_equality_error: report.kato_equality_error,
            verdict: report.verdict(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelCheck {
    pub label: String,
    pub point: KernelPoint,
    pub identity_residual: f64,
    pub under_resolved: bool,
    pub monotonicity: MonotonicityReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QBoundReport {
    pub samples: usize,
    pub c: f64,
    pub diameter: f64,
    /// `c·diam(M₀)`.
    pub bound: f64,
    pub max_q: f64,
    pub violations: usize,
    pub check: Check,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub nodes: usize,
    pub flow: Option<FlowSummary>,
    pub blowup: Option<BlowupEstimate>,
    /// Constants on the full run; `c2` uses `c₁ = 2 max H` on `[0, T₀]`.
    pub constants: Option<Constants>,
    pub horizon: Option<Horizon>,
    pub barrier: Option<BarrierReport>,
    pub gradient_bound: Option<GradientBoundReport>,
    /// Constants restricted to the Φ window; `c2_blowup` uses `c_H` on that window.
    pub window_constants: Option<Constants>,
    pub blowup_lower_bound: Option<BlowupLowerBound>,
    pub phi: Option<PhiSummary>,
    pub kernel: Vec<KernelCheck>,
    pub q_bound: Option<QBoundReport>,
    pub residual_f: Option<f64>,
    pub residual_a: Option<f64>,
    pub errors: Vec<StageError>,
}

impl GridReport {
    fn new(nodes: usize) -> Self {
        GridReport {
            nodes,
            flow: None,
            blowup: None,
            constants: None,
            horizon: None,
            barrier: None,
            gradient_bound: None,
            window_constants: None,
            blowup_lower_bound: None,
            phi: None,
            kernel: Vec::new(),
            q_bound: None,
            residual_f: None,
            residual_a: None,
            errors: Vec::new(),
        }
    }

    fn record<T>(&mut self, stage: &str, r: Result<T>) -> Option<T> {
        match r {
            Ok(x) => Some(x),
            Err(e) => {
                self.errors.push(StageError {
                    stage: stage.into(),
                    message: e.to_string(),
                });
                None
            }
        }
    }

    /// Measured blow-up time, if the run reached it.
    pub fn blowup_time(&self) -> Option<f64> {
        self.blowup.filter(|b| b.confident).map(|b| b.time)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub nodes: Vec<usize>,
    pub residual_f: Vec<Option<f64>>,
    pub residual_a: Vec<Option<f64>>,
    pub identity: Vec<Option<f64>>,
    pub order_f: Option<f64>,
    pub order_a: Option<f64>,
    pub order_identity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictEntry {
    pub id: String,
    pub description: String,
    pub verdict: Verdict,
    pub margin: Option<f64>,
}

/// Data behind the CSV outputs; not part of `report.json`.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub series: FlowSeries,
    /// Drift rate for the `phi_max` column.
    pub phi_b: Option<f64>,
    /// Kernel point for the `f_mass` and `drive` columns.
    pub kernel_point: KernelPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub experiment_id: String,
    pub mode: Mode,
    pub config: ExperimentConfig,
    pub grids: Vec<GridReport>,
    pub convergence: ConvergenceTable,
    pub case_inequalities: Option<CaseReport>,
    pub verdicts: Vec<VerdictEntry>,
    #[serde(skip)]
    pub artifacts: Option<Artifacts>,
}

impl RunReport {
    /// The finest grid, which decides the verdicts.
    pub fn authoritative(&self) -> &GridReport {
        self.grids.last().expect("at least one grid")
    }

    pub fn verdict(&self, id: &str) -> Option<&VerdictEntry> {
        self.verdicts.iter().find(|v| v.id == id)
    }

    pub fn any_fail(&self) -> bool {
        self.verdicts.iter().any(|v| v.verdict == Verdict::Fail)
    }

    /// 0 when nothing failed, 1 on a failed verdict, 2 on a runtime error in the finest grid.
    pub fn exit_code(&self) -> i32 {
        if self.any_fail() {
            1
        } else if !self.authoritative().errors.is_empty() {
            2
        } else {
            0
        }
    }
}

/// Least-squares order `p` in `residual ≈ C·N^{-p}`.
pub fn fitted_order(nodes: &[usize], residuals: &[Option<f64>]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = nodes
        .iter()
        .zip(residuals)
        .filter_map(|(&n, r)| r.filter(|r| *r > 0.0).map(|r| ((n as f64).ln(), r.ln())))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let xm = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - xm) * (p.1 - ym)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - xm) * (p.0 - xm)).sum();
    Some(-sxy / sxx)
}

fn initial_shape(config: &ExperimentConfig, nodes: usize) -> Result<StarShape> {
    Ok(make_shape(&config.preset, config.dim(), nodes)?.scaled(config.scale))
}

fn check_series(config: &ExperimentConfig, shape: &StarShape, nodes: usize) -> Result<FlowSeries> {
    let flow = FlowConfig {
        t_end: config.check_window,
        snapshot_interval: config.check_interval_for(nodes),
        ..config.flow
    };
    run(shape, &flow)
}

/// Kernel points for the identity and monotonicity checks on a check run.
fn kernel_points(config: &ExperimentConfig, series: &FlowSeries) -> Result<Vec<(String, KernelPoint)>> {
    let end = series.snapshots.last().map_or(0.0, |s| s.t);
    let unit = config.time_unit;
    let last = &series.snapshots.last().expect("initial snapshot").shape;
    let fields = compute_fields(last)?;
    let i = (0..fields.f.len())
        .max_by(|&a, &b| fields.f[a].total_cmp(&fields.f[b]))
        .unwrap_or(0);
    Ok(vec![
        ("origin".into(), KernelPoint::new([0.0; 3], end + 0.25 * unit)),
        ("f_max".into(), KernelPoint::new(last.positions()[i], end + 0.1 * unit)),
    ])
}

fn q_bound_sampling(config: &ExperimentConfig, series: &FlowSeries, nodes: usize) -> Result<QBoundReport> {
    let initial = series.initial();
    let dim = initial.dim();
    let c = q_bound_constant(dim).c;
    let diam = diameter(initial);
    let bound = c * diam;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ (nodes as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let (lo, hi) = (config.kernel.tau_min.ln(), config.kernel.tau_max.ln());
    let mut max_q = 0.0_f64;
    let mut violations = 0;
    for _ in 0..config.kernel.count {
        let snap = &series.snapshots[rng.gen_range(0..series.snapshots.len())];
        let pts = snap.shape.positions();
        let x = pts[rng.gen_range(0..pts.len())];
        let beta: f64 = rng.gen();
        let psi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let center: Point = match dim {
            crate::geometry::Dim::Curve => [beta * x[0], beta * x[1], 0.0],
            crate::geometry::Dim::Surface => {
                [beta * x[0] * psi.cos(), beta * x[0] * psi.sin(), beta * x[2]]
            }
        };
        let tau = if hi > lo { rng.gen_range(lo..=hi).exp() } else { lo.exp() };
        let q = q_value(&snap.shape, snap.t, &KernelPoint::new(center, snap.t + tau))?;
        max_q = max_q.max(q);
        if q > bound {
            violations += 1;
        }
    }
    Ok(QBoundReport {
        samples: config.kernel.count,
        c,
        diameter: diam,
        bound,
        max_q,
        violations,
        check: Check::margin(bound - max_q),
    })
}

fn run_checks(config: &ExperimentConfig, shape: &StarShape, nodes: usize, report: &mut GridReport) -> Option<FlowSeries> {
    let series = report.record("check_run", check_series(config, shape, nodes))?;
    report.residual_f = report
        .record("residual_f", residual_f_evolution(&series))
        .map(|r| r.max_abs);
    report.residual_a = report
        .record("residual_a", residual_a_evolution(&series))
        .flatten()
        .map(|r| r.max_abs);
    if let Some(points) = report.record("kernel_points", kernel_points(config, &series)) {
        for (label, kp) in points {
            let identity = report.record(&format!("identity[{label}]"), check_identity(&series, &kp));
            let mono = report.record(
                &format!("monotonicity[{label}]"),
                check_monotonicity(&series, &kp),
            );
            if let (Some(identity), Some(monotonicity)) = (identity, mono) {
                report.kernel.push(KernelCheck {
                    label,
                    point: kp,
                    identity_residual: identity.max_residual,
                    under_resolved: identity.under_resolved,
                    monotonicity,
                });
            }
        }
    }
    Some(series)
}

fn run_full(config: &ExperimentConfig, shape: &StarShape, nodes: usize, report: &mut GridReport) -> Option<Artifacts> {
    let series = report.record("flow", run(shape, &config.flow))?;
    let n = shape.dim().n() as f64;
    let r = shape.radius();
    let r_min = r.iter().copied().fold(f64::INFINITY, f64::min);
    let r_max = r.iter().copied().fold(0.0, f64::max);
    let last = series.diagnostics.last().expect("initial record");
    report.flow = Some(FlowSummary {
        termination: series.termination,
        steps: series.diagnostics.len() - 1,
        final_t: series.final_t,
        final_a2_max: last.a2_max,
        final_f_max: last.f_max,
        blowup_bracket: (r_min * r_min / (2.0 * n), r_max * r_max / (2.0 * n)),
    });
    report.blowup = report.record("blowup_estimate", estimate_blowup_time(&series));
    let t_c = report.blowup_time().unwrap_or(series.final_t);

    let t0 = config.t0.unwrap_or(T0_FRACTION * t_c);
    report.constants = report.record("constants", compute_constants(&series, t0));
    if let Some(k) = report.constants {
        let horizon = theorem1_t(&k);
        report.horizon = Some(horizon);
        let cubic = BarrierCubic {
            s: horizon.t,
            c2: k.c2,
            c3: k.c3,
            f0: k.f0,
        };
        report.barrier = report.record("barrier", barrier_analysis(&cubic));
        report.gradient_bound = report.record(
            "gradient_bound",
            verify_gradient_bound(&series, &k, horizon.t),
        );
    }

    let window = config.phi_window.unwrap_or(PHI_FRACTION * t_c);
    let windowed = series.truncated(window);
    report.window_constants = report.record(
        "window_constants",
        compute_constants(&windowed, t0.min(windowed.final_t)),
    );
    let mut phi_b = None;
    if let Some(k) = report.window_constants {
        report.blowup_lower_bound = report.record("blowup_lower_bound", theorem2_lower_bound(&k));
        if let Some(phi) = report.record("phi", phi_monitor(&windowed, &k)) {
            phi_b = Some(phi.b);
            report.phi = Some(PhiSummary::new(windowed.final_t, &phi));
        }
    }

    report.q_bound = report.record("q_bound", q_bound_sampling(config, &series, nodes));
    let kernel_point = KernelPoint::new([0.0; 3], t_c + 0.1 * config.time_unit);
    Some(Artifacts {
        series,
        phi_b,
        kernel_point,
    })
}

fn run_grid(config: &ExperimentConfig, nodes: usize, mode: Mode) -> (GridReport, Option<Artifacts>) {
    let mut report = GridReport::new(nodes);
    let Some(shape) = report.record("shape", initial_shape(config, nodes)) else {
        return (report, None);
    };
    let checks = run_checks(config, &shape, nodes, &mut report);
    let artifacts = match mode {
        Mode::Full => run_full(config, &shape, nodes, &mut report),
        Mode::Convergence => checks.map(|series| Artifacts {
            kernel_point: KernelPoint::new([0.0; 3], series.final_t + 0.25 * config.time_unit),
            series,
            phi_b: None,
        }),
    };
    (report, artifacts)
}

fn entry(id: &str, description: &str, check: Check) -> VerdictEntry {
    VerdictEntry {
        id: id.into(),
        description: description.into(),
        verdict: check.verdict,
        margin: check.margin,
    }
}

fn order_check(values: &[Option<f64>], order: Option<f64>) -> Check {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    if present.len() != values.len() || present.is_empty() {
        return Check::not_applicable();
    }
    let worst = present.iter().copied().fold(0.0, f64::max);
    if worst <= RESIDUAL_FLOOR {
        return Check::margin(RESIDUAL_FLOOR - worst);
    }
    match order {
        Some(p) => Check::margin(p - MIN_RESIDUAL_ORDER),
        None => Check::not_applicable(),
    }
}

fn option_check(check: Option<Check>) -> Check {
    check.unwrap_or_else(Check::not_applicable)
}

fn verdicts(report: &RunReport) -> Vec<VerdictEntry> {
    let g = report.authoritative();
    let table = &report.convergence;
    let mut out = Vec::new();

    if report.mode == Mode::Full {
        let star = match g.flow {
            Some(f) if f.termination == Termination::StarShapeLost => Check {
                verdict: Verdict::Fail,
                margin: None,
            },
            Some(_) => Check {
                verdict: Verdict::Pass,
                margin: None,
            },
            None => Check::not_applicable(),
        };
        out.push(entry("star_shape.preserved", "the flow stays a radial graph until blow-up", star));

        let bracket = match (g.flow, g.blowup_time()) {
            (Some(f), Some(t)) => {
                let (lo, hi) = f.blowup_bracket;
                Check::margin((t - lo * (1.0 - BRACKET_TOLERANCE)).min(hi * (1.0 + BRACKET_TOLERANCE) - t))
            }
            _ => Check::not_applicable(),
        };
        out.push(entry(
            "blowup_time.bracket",
            "measured blow-up time lies between the inscribed and enclosing sphere times (1% slack)",
            bracket,
        ));

        out.push(entry(
            "gradient_bound.proved",
            "max f <= 2 c3 f0^2 up to min(1/(24 c2 c3^2 f0^4), T0)",
            option_check(g.gradient_bound.map(|r| r.proved)),
        ));

        let barrier = match &g.barrier {
            Some(b) if b.claims_hold() => Check {
                verdict: Verdict::Pass,
                margin: None,
            },
            Some(_) => Check {
                verdict: Verdict::Fail,
                margin: None,
            },
            None => Check::not_applicable(),
        };
        out.push(entry(
            "barrier.root",
            "the barrier cubic has a root in (f0, 2 c3 f0^2) at the horizon",
            barrier,
        ));

        let lower = match (g.blowup_lower_bound, g.blowup_time()) {
            (Some(b), Some(t)) => Check::margin(t - b.bound.max(b.expanded)),
            _ => Check::not_applicable(),
        };
        out.push(entry(
            "blowup_time.lower_bound",
            "measured blow-up time exceeds 1/(24 c2 c3^2 f0^4) with c2 = cH c diam",
            lower,
        ));

        out.push(entry(
            "phi.bounded",
            "max Phi stays below its initial value (tolerance 1e-2)",
            option_check(g.phi.as_ref().map(|p| p.bounded)),
        ));
        out.push(entry(
            "phi.non_increasing",
            "max Phi is non-increasing between records (tolerance 1e-2)",
            option_check(g.phi.as_ref().map(|p| p.non_increasing)),
        ));
        out.push(entry(
            "phi.kato",
            "|grad |A|^2|^2 / (2|A|^4) <= 2 |grad A|^2 / |A|^2 at every node",
            option_check(g.phi.as_ref().map(|p| p.kato)),
        ));

        for label in ["origin", "f_max"] {
            let k = g.kernel.iter().find(|k| k.label == label);
            out.push(entry(
                &format!("weighted_f.drive_bound[{label}]"),
                "d/dt int f rho <= 2 int f^2 H rho up to ten times the identity residual",
                option_check(k.map(|k| k.monotonicity.drive_bound)),
            ));
            out.push(entry(
                &format!("weighted_f.mass_bound[{label}]"),
                "d/dt int f rho <= c1 f_inf^2 int rho up to ten times the identity residual",
                option_check(k.map(|k| k.monotonicity.mass_bound)),
            ));
        }

        out.push(entry(
            "q_bound",
            "Q <= c diam(M0) at every sampled kernel point",
            option_check(g.q_bound.map(|q| {
                if q.violations == 0 {
                    q.check
                } else {
                    Check {
                        verdict: Verdict::Fail,
                        margin: q.check.margin,
                    }
                }
            })),
        ));
        out.push(entry(
            "case_inequalities",
            "far, cap and complement inequalities hold at every Monte Carlo sample",
            report.case_inequalities.map_or(Check::not_applicable(), |c| {
                let v = c.total_violations();
                Check {
                    verdict: if v == 0 { Verdict::Pass } else { Verdict::Fail },
                    margin: None,
                }
            }),
        ));
    }

    out.push(entry(
        "residual_f.order",
        "evolution residual of f converges at least at order 1.5",
        order_check(&table.residual_f, table.order_f),
    ));
    out.push(entry(
        "residual_a.order",
        "evolution residual of |A|^2 converges at least at order 1.5 (n = 1)",
        order_check(&table.residual_a, table.order_a),
    ));
    out
}

/// Runs every grid (concurrently) and assembles the report.
pub fn run_experiment(config: &ExperimentConfig, mode: Mode) -> RunReport {
    let mut results: Vec<(GridReport, Option<Artifacts>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = config
            .grids
            .iter()
            .map(|&nodes| scope.spawn(move || run_grid(config, nodes, mode)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("grid worker panicked"))
            .collect()
    });
    let artifacts = results.last_mut().and_then(|r| r.1.take());
    let grids: Vec<GridReport> = results.into_iter().map(|r| r.0).collect();

    let nodes: Vec<usize> = grids.iter().map(|g| g.nodes).collect();
    let residual_f: Vec<Option<f64>> = grids.iter().map(|g| g.residual_f).collect();
    let residual_a: Vec<Option<f64>> = grids.iter().map(|g| g.residual_a).collect();
    let identity: Vec<Option<f64>> = grids
        .iter()
        .map(|g| {
            g.kernel
                .iter()
                .find(|k| k.label == "f_max")
                .map(|k| k.identity_residual)
        })
        .collect();
    let convergence = ConvergenceTable {
        order_f: fitted_order(&nodes, &residual_f),
        order_a: fitted_order(&nodes, &residual_a),
        order_identity: fitted_order(&nodes, &identity),
        nodes,
        residual_f,
        residual_a,
        identity,
    };

    let case_inequalities = match mode {
        Mode::Full => verify_case_inequalities(config.dim(), config.case_samples, config.seed).ok(),
        Mode::Convergence => None,
    };

    let mut report = RunReport {
        experiment_id: config.id.clone(),
        mode,
        config: config.clone(),
        grids,
        convergence,
        case_inequalities,
        verdicts: Vec::new(),
        artifacts,
    };
    report.verdicts = verdicts(&report);
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Dim, Preset};
    use approx::assert_relative_eq;

    #[test]
    fn fitted_order_recovers_power_law() {
        let nodes = [64, 128, 256];
        let res: Vec<Option<f64>> = nodes.iter().map(|&n| Some(3.0 * (n as f64).powf(-2.0))).collect();
        assert_relative_eq!(fitted_order(&nodes, &res).unwrap(), 2.0, epsilon = 1e-12);
        assert!(fitted_order(&nodes[..1], &res[..1]).is_none());
        assert!(fitted_order(&nodes, &[None, None, Some(1.0)]).is_none());
    }

    #[test]
    fn order_check_rules() {
        assert_eq!(order_check(&[Some(1e-9), Some(1e-10)], None).verdict, Verdict::Pass);
        assert_eq!(order_check(&[Some(1e-3), Some(1e-4)], Some(3.3)).verdict, Verdict::Pass);
        assert_eq!(order_check(&[Some(1e-3), Some(9e-4)], Some(0.1)).verdict, Verdict::Fail);
        assert_eq!(order_check(&[None, None], None).verdict, Verdict::NotApplicable);
    }

    #[test]
    fn small_circle_experiment() {
        let config = ExperimentConfig::new(Preset::Round { radius: 1.0 }, Dim::Curve)
            .unwrap()
            .with_grids(vec![32, 64])
            .unwrap();
        let config = ExperimentConfig {
            case_samples: 1000,
            ..config
        };
        let report = run_experiment(&config, Mode::Full);
        let g = report.authoritative();
        assert!(g.errors.is_empty(), "{:?}", g.errors);
        assert!((g.blowup_time().unwrap() - 0.5).abs() < 0.02);
        for v in &report.verdicts {
            assert_ne!(v.verdict, Verdict::Fail, "{v:?}");
        }
        assert_eq!(report.exit_code(), 0);
        assert!(report.artifacts.is_some());
    }

    #[test]
    fn errors_are_recorded_per_grid() {
        let config = ExperimentConfig::new(Preset::Round { radius: 1.0 }, Dim::Curve).unwrap();
        let config = ExperimentConfig {
            grids: vec![32],
            flow: FlowConfig {
                max_steps: 5,
                ..config.flow
            },
            case_samples: 1000,
            ..config
        };
        let report = run_experiment(&config, Mode::Full);
        let g = report.authoritative();
        assert!(g.errors.iter().any(|e| e.stage == "blowup_estimate"));
        assert_eq!(report.verdict("blowup_time.bracket").unwrap().verdict, Verdict::NotApplicable);
        assert_ne!(report.exit_code(), 0);
    }
}
