//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Oracles live here and do not call back into the code they check: closed-form circle and
//! sphere solutions, a bisection root finder, a brute-force maximizer for the Q-bound
//! constants, direct evaluation of the case inequalities and a least-squares order fit.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use starflow::estimates::{
    bisection_roots, cardano_roots, compute_constants, theorem2_lower_bound, BarrierCubic,
};
use starflow::flow::{estimate_blowup_time, run};
use starflow::geometry::{make_shape, Dim, Preset};
use starflow::harness::{report_json, run_experiment, ExperimentConfig, Mode, RunReport};
use starflow::kernel::{
    check_identity, classify_case, q_bound_constant, verify_case_inequalities, CaseOutcome,
    CaseSample, KernelPoint,
};
use starflow::{FlowConfig, Verdict};

// Tolerances pinned from the acceptance criteria.
const CIRCLE_TC_REL: f64 = 1e-2;
const CIRCLE_RADIUS_ABS: f64 = 1e-5;
const CIRCLE_RADIUS_T_MAX: f64 = 0.45;
const CIRCLE_RUNTIME_S: f64 = 30.0;
const SPHERE_TC_REL: f64 = 2e-2;
const MIN_ORDER: f64 = 1.5;
const IDENTITY_ABS: f64 = 1e-3;
const MIN_KERNEL_SAMPLES: usize = 100;
const CASE_SAMPLES: usize = 100_000;
const CASE_RUNTIME_S: f64 = 5.0;
const KATO_EQUALITY: f64 = 1e-12;
const ALGEBRA_TOL: f64 = 1e-10;
const CUBIC_SAMPLES: usize = 1000;
const SCALING_REL: f64 = 1e-2;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn preset_config(preset: Preset) -> ExperimentConfig {
    ExperimentConfig::new(preset, Dim::Curve).unwrap()
}

fn round_report() -> &'static RunReport {
    static R: OnceLock<RunReport> = OnceLock::new();
    R.get_or_init(|| run_experiment(&preset_config(Preset::Round { radius: 1.0 }), Mode::Full))
}

fn flower_report() -> &'static RunReport {
    static R: OnceLock<RunReport> = OnceLock::new();
    R.get_or_init(|| {
        run_experiment(&preset_config(Preset::Flower { eps: 0.3, k: 3 }), Mode::Full)
    })
}

fn verdict_of(report: &RunReport, id: &str) -> (Verdict, Option<f64>) {
    let v = report.verdict(id).unwrap_or_else(|| panic!("missing verdict {id}"));
    (v.verdict, v.margin)
}

/// Least-squares slope of `−log(res)` against `log(N)`.
fn order_oracle(nodes: &[usize], res: &[f64]) -> f64 {
    let m = nodes.len() as f64;
    let x: Vec<f64> = nodes.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = res.iter().map(|r| r.ln()).collect();
    let xm = x.iter().sum::<f64>() / m;
    let ym = y.iter().sum::<f64>() / m;
    let num: f64 = x.iter().zip(&y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let den: f64 = x.iter().map(|a| (a - xm) * (a - xm)).sum();
    -num / den
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let shape = make_shape(&Preset::Round { radius: 1.0 }, Dim::Curve, 256).unwrap();
    let series = run(&shape, &FlowConfig::default()).unwrap();
    let tc = estimate_blowup_time(&series).unwrap().time;
    let elapsed = start.elapsed().as_secs_f64();
    let mut worst = 0.0_f64;
    for snap in series.snapshots.iter().filter(|s| s.t <= CIRCLE_RADIUS_T_MAX) {
        let exact = (1.0 - 2.0 * snap.t).sqrt();
        for r in snap.shape.radius() {
            worst = worst.max((r - exact).abs());
        }
    }
    let tc_err = (tc - 0.5).abs() / 0.5;
    outcome(
        tc_err <= CIRCLE_TC_REL && worst <= CIRCLE_RADIUS_ABS && elapsed < CIRCLE_RUNTIME_S,
        format!("T_c = {tc:.6} (rel err {tc_err:.2e}), max |R - sqrt(1-2t)| = {worst:.2e}, {elapsed:.2} s"),
    )
}

fn criterion_2() -> Outcome {
    let shape = make_shape(&Preset::Round { radius: 1.0 }, Dim::Surface, 256).unwrap();
    let series = run(&shape, &FlowConfig::default()).unwrap();
    let tc = estimate_blowup_time(&series).unwrap().time;
    let err = (tc - 0.25).abs() / 0.25;
    SPHERE_SERIES_TC.set(tc).ok();
    // the lower bound needs constants with H bounded: three quarters of the way to blow-up
    let window = series.truncated(0.75 * tc);
    let k = compute_constants(&window, 0.2 * tc).unwrap();
    let lower = theorem2_lower_bound(&k).unwrap();
    SPHERE_LOWER.set(lower.bound.max(lower.expanded)).ok();
    outcome(err <= SPHERE_TC_REL, format!("T_c = {tc:.6} (rel err {err:.2e})"))
}

static SPHERE_SERIES_TC: OnceLock<f64> = OnceLock::new();
static SPHERE_LOWER: OnceLock<f64> = OnceLock::new();

fn criterion_3() -> Outcome {
    let config = preset_config(Preset::Flower { eps: 0.3, k: 3 });
    assert_eq!(config.grids, [64, 128, 256]);
    let report = run_experiment(&config, Mode::Convergence);
    let t = &report.convergence;
    let f: Vec<f64> = t.residual_f.iter().map(|r| r.unwrap()).collect();
    let a: Vec<f64> = t.residual_a.iter().map(|r| r.unwrap()).collect();
    let pf = order_oracle(&t.nodes, &f);
    let pa = order_oracle(&t.nodes, &a);
    let agree = (pf - t.order_f.unwrap()).abs() < 1e-9 && (pa - t.order_a.unwrap()).abs() < 1e-9;
    outcome(
        pf >= MIN_ORDER && pa >= MIN_ORDER && agree,
        format!("orders f = {pf:.3}, |A|^2 = {pa:.3} over N = {:?}", t.nodes),
    )
}

fn criterion_4() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for (name, report) in [("round", round_report()), ("flower", flower_report())] {
        let g = report.authoritative();
        let k = g.constants.unwrap();
        // horizon and bound recomputed from the reported constants
        let horizon = (1.0 / (24.0 * k.c2 * k.c3 * k.c3 * k.f0.powi(4))).min(k.t0);
        let bound = 2.0 * k.c3 * k.f0 * k.f0;
        let series = &report.artifacts.as_ref().unwrap().series;
        let f_max = series
            .diagnostics
            .iter()
            .filter(|d| d.t <= horizon)
            .map(|d| d.f_max)
            .fold(0.0, f64::max);
        let (v, margin) = verdict_of(report, "gradient_bound.proved");
        let ok = v == Verdict::Pass
            && margin.unwrap() > 0.0
            && f_max <= bound
            && (g.horizon.unwrap().t - horizon).abs() <= 1e-15 * horizon;
        if name == "round" {
            // f = 1/sqrt(1 - 2t) on the circle, largest at the last recorded step
            let last = series.diagnostics.iter().filter(|d| d.t <= horizon).last().unwrap();
            let closed = 1.0 / (1.0 - 2.0 * last.t).sqrt();
            pass &= (f_max - closed).abs() < 1e-6;
        }
        pass &= ok;
        lines.push(format!("{name}: max f = {f_max:.4} <= {bound:.3} on [0, {horizon:.3e}]"));
    }
    outcome(pass, lines.join("; "))
}

/// `d/dt ∫ f ρ dμ` on the circle `R = √(1−2t)` with kernel center at the origin.
fn circle_weighted_rate(t: f64, s: f64) -> f64 {
    let tau = s - t;
    let r2 = 1.0 - 2.0 * t;
    let value = 2.0 * PI * (4.0 * PI * tau).powf(-0.5) * (-r2 / (4.0 * tau)).exp();
    let du = (r2 - 2.0 * tau) / (4.0 * tau * tau);
    value * (0.5 / tau - du)
}

fn criterion_5() -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    for (name, report) in [("round", round_report()), ("flower", flower_report())] {
        for label in ["origin", "f_max"] {
            let (v, _) = verdict_of(report, &format!("weighted_f.drive_bound[{label}]"));
            pass &= v == Verdict::Pass;
        }
        let k = &report.authoritative().kernel;
        lines.push(format!(
            "{name}: drive bound holds at {} kernel points",
            k.len()
        ));
        pass &= k.len() == 2;
    }

    let shape = make_shape(&Preset::Round { radius: 1.0 }, Dim::Curve, 256).unwrap();
    let config = FlowConfig {
        t_end: 0.2,
        snapshot_interval: 1e-3,
        ..Default::default()
    };
    let series = run(&shape, &config).unwrap();
    let kp = KernelPoint::new([0.0; 3], 0.6);
    let id = check_identity(&series, &kp).unwrap();
    let closed = id
        .times
        .iter()
        .zip(&id.rhs)
        .map(|(t, r)| (r - circle_weighted_rate(*t, kp.s)).abs())
        .fold(0.0, f64::max);
    pass &= id.max_residual <= IDENTITY_ABS && closed <= IDENTITY_ABS;
    lines.push(format!(
        "circle N=256: identity residual {:.2e}, closed-form deviation {closed:.2e}",
        id.max_residual
    ));
    outcome(pass, lines.join("; "))
}

/// Golden-section maximum of `e^{−aφ} φ^{n/2}` on `(0, 50)`.
fn peak_oracle(n: f64, a: f64) -> f64 {
    let g = |p: f64| (-a * p).exp() * p.powf(n / 2.0);
    let (mut lo, mut hi) = (0.0_f64, 50.0_f64);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let x1 = hi - ratio * (hi - lo);
        let x2 = lo + ratio * (hi - lo);
        if g(x1) < g(x2) {
            lo = x1;
        } else {
            hi = x2;
        }
    }
    g(0.5 * (lo + hi))
}

/// `∫_{ℝⁿ} e^{−(3/4)|x|²} dx` by the trapezoid rule in radius.
fn gaussian_integral_oracle(n: usize) -> f64 {
    let m = 200_000;
    let h = 20.0 / m as f64;
    let shell = |r: f64| match n {
        1 => 2.0,
        _ => 2.0 * PI * r,
    };
    (0..=m)
        .map(|i| {
            let r = i as f64 * h;
            let w = if i == 0 || i == m { 0.5 } else { 1.0 };
            w * shell(r) * (-0.75 * r * r).exp() * h
        })
        .sum()
}

fn q_constant_oracle(n: usize) -> f64 {
    let nf = n as f64;
    let omega = if n == 1 { 2.0 * PI } else { 4.0 * PI };
    let pre = omega / PI.powf(nf / 2.0);
    let c0 = 1.0 / (PI / 3.0).cos();
    let c1 = pre * peak_oracle(nf, 1.0);
    let c2 = pre * peak_oracle(nf, 0.25);
    let c3 = c0 * PI.powf(-nf / 2.0) * gaussian_integral_oracle(n) * 2f64.powi(n as i32);
    let c4 = 2f64.powi(n as i32) * pre * peak_oracle(nf, 0.5);
    if n == 1 {
        assert!((c1 - 1.5203).abs() < 1e-4 && (c2 - 3.0407).abs() < 1e-4);
        assert!((c4 - 4.3002).abs() < 1e-4 && (c3 - 8.0 / 3f64.sqrt()).abs() < 1e-6);
    }
    c1.max(c2).max(c3).max(c4)
}

fn criterion_6() -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    for n in [1, 2] {
        let lib = q_bound_constant(Dim::from_n(n).unwrap()).c;
        let oracle = q_constant_oracle(n);
        pass &= (lib - oracle).abs() <= 1e-6 * oracle;
        lines.push(format!("n={n}: c = {lib:.4} (oracle {oracle:.4})"));
    }
    for (name, report) in [("round", round_report()), ("flower", flower_report())] {
        let q = report.authoritative().q_bound.unwrap();
        let lib_c = q_bound_constant(Dim::Curve).c;
        pass &= q.samples >= MIN_KERNEL_SAMPLES
            && q.violations == 0
            && q.max_q <= lib_c * q.diameter
            && report.config.kernel.count >= MIN_KERNEL_SAMPLES;
        lines.push(format!(
            "{name}: {} samples, max Q = {:.3} <= {:.3}, {} violations",
            q.samples, q.max_q, q.bound, q.violations
        ));
    }
    outcome(pass, lines.join("; "))
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> [f64; 3] {
    if n == 1 {
        let a: f64 = rng.gen_range(0.0..2.0 * PI);
        [a.cos(), a.sin(), 0.0]
    } else {
        loop {
            let v: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let l = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if l > 0.1 && l <= 1.0 {
                return [v[0] / l, v[1] / l, v[2] / l];
            }
        }
    }
}

fn criterion_7() -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    for n in [1usize, 2] {
        let dim = Dim::from_n(n).unwrap();
        let start = Instant::now();
        let report = verify_case_inequalities(dim, CASE_SAMPLES, 42).unwrap();
        let elapsed = start.elapsed().as_secs_f64();

        // direct evaluation of the inequalities on an independent stream
        let mut rng = ChaCha8Rng::seed_from_u64(7 + n as u64);
        let mut direct_violations = 0;
        let mut disagreements = 0;
        for _ in 0..CASE_SAMPLES {
            let q: f64 = rng.gen_range(1e-9..10.0);
            let z = random_unit(n, &mut rng);
            let z0 = random_unit(n, &mut rng);
            let d2 = (0..3).map(|i| (q * z[i] - z0[i]).powi(2)).sum::<f64>();
            let chord = (0..3).map(|i| (z[i] - z0[i]).powi(2)).sum::<f64>();
            let cos_a = (0..3).map(|i| z[i] * z0[i]).sum::<f64>();
            let ok = if q >= 2.0 {
                d2 >= (q - 1.0).powi(2) - 1e-12 && (q - 1.0).powi(2) >= q * q / 4.0
            } else if cos_a >= 0.5 {
                d2 >= 0.75 * chord - 1e-12
            } else {
                d2 >= 0.5 - 1e-12
            };
            direct_violations += usize::from(!ok);
            let lib_ok = match classify_case(dim, &CaseSample { ratio: q, z, z0 }, 2.0) {
                CaseOutcome::Far { ok } => ok,
                CaseOutcome::Cap { distance_ok, chart_ok } => distance_ok && chart_ok,
                CaseOutcome::Complement { ok } => ok,
            };
            disagreements += usize::from(lib_ok != ok);
        }
        pass &= report.total_violations() == 0
            && direct_violations == 0
            && disagreements == 0
            && elapsed < CASE_RUNTIME_S
            && report.counts.far > 0
            && report.counts.cap > 0
            && report.counts.complement > 0;
        lines.push(format!(
            "n={n}: {} samples, {} violations ({} direct), {elapsed:.2} s",
            report.samples,
            report.total_violations(),
            direct_violations
        ));
    }
    outcome(pass, lines.join("; "))
}

fn criterion_8() -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    for (name, report) in [("round", round_report()), ("flower", flower_report())] {
        let g = report.authoritative();
        let phi = g.phi.as_ref().unwrap();
        let w = g.window_constants.unwrap();
        let b_ok = (phi.b - 1.1 * 4.0 * w.f_inf * w.c_h).abs() <= 1e-12 * phi.b;
        let kato = phi.kato_equality_error.unwrap();
        let tc = g.blowup_time().unwrap();
        let lower = g.blowup_lower_bound.unwrap();
        for id in ["phi.bounded", "phi.non_increasing", "phi.kato", "blowup_time.lower_bound"] {
            pass &= verdict_of(report, id).0 == Verdict::Pass;
        }
        pass &= b_ok && kato <= KATO_EQUALITY && lower.bound < tc && lower.expanded < tc;
        lines.push(format!(
            "{name}: B = {:.2}, Kato equality err {kato:.1e}, lower bound {:.2e} < T_c {tc:.4}",
            phi.b, lower.bound
        ));
    }
    match (SPHERE_SERIES_TC.get(), SPHERE_LOWER.get()) {
        (Some(tc), Some(lb)) => {
            pass &= lb < tc;
            lines.push(format!("sphere: lower bound {lb:.2e} < T_c {tc:.4}"));
        }
        _ => pass = false,
    }
    outcome(pass, lines.join("; "))
}

/// Positive roots of `a r³ + c r + d` (`a, d > 0`, `c < 0`) by bisection on each side of
/// the positive critical point.
fn cubic_roots_oracle(a: f64, c: f64, d: f64) -> Vec<f64> {
    let h = |r: f64| (a * r * r + c) * r + d;
    let bisect = |mut lo: f64, mut hi: f64| {
        let rising = h(hi) > h(lo);
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if (h(mid) < 0.0) == rising {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let rc = (-c / (3.0 * a)).sqrt();
    if h(rc) > 0.0 {
        return Vec::new();
    }
    let mut far = 2.0 * rc;
    while h(far) <= 0.0 {
        far *= 2.0;
    }
    vec![bisect(0.0, rc), bisect(rc, far)]
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0_f64;
    let mut bracket_fail = 0;
    let mut bracket_checked = 0;
    for _ in 0..CUBIC_SAMPLES {
        let f0: f64 = rng.gen_range(0.3..3.0);
        let c3 = (1.0 / f0) * rng.gen_range(1.0..6.0);
        let c2: f64 = rng.gen_range(0.1..10.0);
        let upper = 2.0 * c3 * f0 * f0;
        let s_max = 1.0 / (6.0 * c2 * upper * upper);
        let s = s_max * rng.gen_range(0.01..0.999);
        let cubic = BarrierCubic { s, c2, c3, f0 };
        let (a, d) = (s * c2, c3 * f0 * f0);

        let oracle = cubic_roots_oracle(a, -1.0, d);
        let (cardano, _) = cardano_roots(a, 0.0, -1.0, d);
        let bisect = bisection_roots(a, 0.0, -1.0, d);
        let positive = |v: &[f64]| v.iter().copied().filter(|r| *r > 0.0).collect::<Vec<f64>>();
        for found in [positive(&cardano), positive(&bisect)] {
            if found.len() != oracle.len() {
                worst = f64::INFINITY;
                continue;
            }
            for (x, y) in found.iter().zip(&oracle) {
                worst = worst.max((x - y).abs() / y.abs().max(1.0));
            }
        }
        if cubic.eval(f0) > 0.0 {
            bracket_checked += 1;
            let smallest = oracle.first().copied();
            if !matches!(smallest, Some(r) if r > f0 && r < upper) {
                bracket_fail += 1;
            }
        }
    }
    outcome(
        worst <= ALGEBRA_TOL && bracket_fail == 0 && bracket_checked > 0,
        format!(
            "{CUBIC_SAMPLES} cubics: max root disagreement {worst:.1e}, smallest root bracketed in {}/{bracket_checked}",
            bracket_checked - bracket_fail
        ),
    )
}

fn criterion_10() -> Outcome {
    let base = preset_config(Preset::Flower { eps: 0.3, k: 3 });
    let again = run_experiment(&base, Mode::Full);
    let identical = report_json(&again).unwrap() == report_json(flower_report()).unwrap();

    let scaled_config = starflow::harness::parse_config(
        "shape = \"flower\"\neps = 0.3\nk = 3\nscale = 2\n",
    )
    .unwrap();
    let scaled = run_experiment(&scaled_config, Mode::Full);
    let (g1, g2) = (flower_report().authoritative(), scaled.authoritative());
    let t_ratio = g2.horizon.unwrap().t / g1.horizon.unwrap().t;
    let tc_ratio = g2.blowup_time().unwrap() / g1.blowup_time().unwrap();
    let ok = identical
        && (t_ratio / 4.0 - 1.0).abs() <= SCALING_REL
        && (tc_ratio / 4.0 - 1.0).abs() <= SCALING_REL;
    outcome(
        ok,
        format!(
            "byte-identical report: {identical}; lambda=2 ratios: horizon {t_ratio:.5}, T_c {tc_ratio:.5}"
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("shrinking circle", criterion_1),
        ("shrinking sphere", criterion_2),
        ("evolution residual orders", criterion_3),
        ("gradient bound", criterion_4),
        ("weighted monotonicity", criterion_5),
        ("Q bound", criterion_6),
        ("case inequalities", criterion_7),
        ("Phi monitor and blow-up lower bound", criterion_8),
        ("barrier algebra", criterion_9),
        ("determinism and scaling", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        failed += usize::from(!result.pass);
        println!(
            "criterion {:>2} {:<36} {}  ({:.1} s) {}",
            i + 1,
            name,
            if result.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            result.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
