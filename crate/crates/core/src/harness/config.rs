//! TOML experiment configuration.
//!
//! Keys are flat; unknown keys are rejected. Time-like defaults are expressed in units
//! of `T* = diam(M₀)²/(8n)`, which equals the blow-up time of a round sphere.
//!
//! ```toml
//! shape = "flower"      # round | flower | ellipse
//! eps = 0.3
//! k = 3
//! n = 1
//! grids = [64, 128, 256]
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::FlowConfig;
use crate::geometry::{diameter, make_shape, Dim, Preset, MIN_GRID_NODES};

pub const DEFAULT_GRIDS: [usize; 3] = [64, 128, 256];
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_KERNEL_SAMPLES: usize = 128;
pub const DEFAULT_CASE_SAMPLES: usize = 100_000;

/// Default horizons as multiples of `T*`.
const T_END_FACTOR: f64 = 5.0;
const SNAPSHOT_FACTOR: f64 = 1e-2;
const CHECK_WINDOW_FACTOR: f64 = 0.04;
const CHECK_INTERVAL_FACTOR: f64 = 2e-4;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    id: Option<String>,
    shape: String,
    #[serde(rename = "R0")]
    r0: Option<f64>,
    eps: Option<f64>,
    k: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
    n: Option<usize>,
    scale: Option<f64>,
    grids: Option<Vec<usize>>,
    cfl_factor: Option<f64>,
    t_end: Option<f64>,
    blowup_threshold: Option<f64>,
    snapshot_interval: Option<f64>,
    max_steps: Option<u64>,
    kernel_samples: Option<usize>,
    tau_min: Option<f64>,
    tau_max: Option<f64>,
    #[serde(rename = "T0")]
    t0: Option<f64>,
    phi_window: Option<f64>,
    check_window: Option<f64>,
    check_interval: Option<f64>,
    case_samples: Option<usize>,
    output_dir: Option<PathBuf>,
    seed: Option<u64>,
}

/// Random kernel points for the Q-bound check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSampling {
    pub count: usize,
    pub tau_min: f64,
    pub tau_max: f64,
}

/// Validated experiment description with every default resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub id: String,
    pub preset: Preset,
    pub n: Dim,
    /// Uniform scaling of the initial shape about the origin.
    pub scale: f64,
    pub grids: Vec<usize>,
    pub flow: FlowConfig,
    pub kernel: KernelSampling,
    /// `T*`, the time unit of the defaults.
    pub time_unit: f64,
    /// Sub-horizon of the gradient estimate; `None` means a fifth of the measured blow-up time.
    pub t0: Option<f64>,
    /// End of the Φ window; `None` means three quarters of the measured blow-up time.
    pub phi_window: Option<f64>,
    /// Length of the finely sampled run used for residuals and the weighted identity.
    pub check_window: f64,
    /// Snapshot spacing of that run on the coarsest grid, refined as `1/N`.
    pub check_interval: f64,
    pub case_samples: usize,
    pub output_dir: Option<PathBuf>,
    pub seed: u64,
}

impl ExperimentConfig {
    /// Minimal configuration with all defaults.
    pub fn new(preset: Preset, n: Dim) -> Result<Self> {
        let name = preset.name();
        let mut doc = toml::Table::new();
        doc.insert("shape".into(), name.into());
        doc.insert("n".into(), (n.n() as i64).into());
        match preset {
            Preset::Round { radius } => {
                doc.insert("R0".into(), radius.into());
            }
            Preset::Flower { eps, k } => {
                doc.insert("eps".into(), eps.into());
                doc.insert("k".into(), (k as i64).into());
            }
            Preset::Ellipse { a, b } => {
                doc.insert("a".into(), a.into());
                doc.insert("b".into(), b.into());
            }
        }
        parse_config(&doc.to_string())
    }

    pub fn dim(&self) -> Dim {
        self.n
    }

    pub fn finest_grid(&self) -> usize {
        *self.grids.last().expect("grids are non-empty")
    }

    /// Check-run snapshot spacing on a grid with `nodes` nodes.
    pub fn check_interval_for(&self, nodes: usize) -> f64 {
        self.check_interval * self.grids[0] as f64 / nodes as f64
    }

    /// Replaces the grid list, keeping validation.
    pub fn with_grids(mut self, grids: Vec<usize>) -> Result<Self> {
        validate_grids(&grids)?;
        self.grids = grids;
        Ok(self)
    }
}

fn shape_error(e: Error) -> Error {
    match e {
        Error::InvalidParameter { key, reason } => Error::config(key, reason),
        Error::NotStarShaped(reason) => Error::config("shape", format!("not star-shaped: {reason}")),
        Error::UnknownPreset(name) => Error::config("shape", format!("unknown preset `{name}`")),
        Error::UnsupportedDimension(n) => Error::config("n", format!("must be 1 or 2, got {n}")),
        Error::GridTooSmall { min, got } => {
            Error::config("grids", format!("need at least {min} nodes, got {got}"))
        }
        other => Error::config("shape", other.to_string()),
    }
}

fn validate_grids(grids: &[usize]) -> Result<()> {
    if grids.is_empty() {
        return Err(Error::config("grids", "must not be empty"));
    }
    if let Some(&g) = grids.iter().find(|&&g| g < MIN_GRID_NODES) {
        return Err(Error::config(
            "grids",
            format!("need at least {MIN_GRID_NODES} nodes, got {g}"),
        ));
    }
    if grids.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::config("grids", format!("must be strictly ascending, got {grids:?}")));
    }
    Ok(())
}

fn positive(key: &str, x: f64) -> Result<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(Error::config(key, format!("must be positive and finite, got {x}")))
    }
}

/// Parses and validates a TOML experiment document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| Error::config("document", e.message().to_string()))?;

    let dim = Dim::from_n(raw.n.unwrap_or(1)).map_err(shape_error)?;
    let supplied = [
        ("R0", raw.r0),
        ("eps", raw.eps),
        ("k", raw.k),
        ("a", raw.a),
        ("b", raw.b),
    ];
    let allowed: &[&str] = match raw.shape.as_str() {
        "round" => &["R0"],
        "flower" => &["eps", "k"],
        "ellipse" => &["a", "b"],
        other => return Err(Error::config("shape", format!("unknown preset `{other}`"))),
    };
    let mut params = Vec::new();
    for (key, value) in supplied {
        match (value, allowed.contains(&key)) {
            (Some(v), true) => params.push((key, v)),
            (Some(_), false) => {
                return Err(Error::config(
                    key,
                    format!("not a parameter of shape `{}`", raw.shape),
                ))
            }
            (None, _) => {}
        }
    }
    let preset = Preset::from_name(&raw.shape, &params).map_err(shape_error)?;

    let grids = raw.grids.unwrap_or_else(|| DEFAULT_GRIDS.to_vec());
    validate_grids(&grids)?;
    let scale = positive("scale", raw.scale.unwrap_or(1.0))?;

    // shape construction doubles as validation; the fine sample fixes the time unit
    make_shape(&preset, dim, grids[0]).map_err(shape_error)?;
    let fine_nodes = match dim {
        Dim::Curve => 1024,
        Dim::Surface => 257,
    };
    let fine = make_shape(&preset, dim, fine_nodes).map_err(shape_error)?;
    let diam = scale * diameter(&fine);
    let time_unit = diam * diam / (8.0 * dim.n() as f64);

    let defaults = FlowConfig::default();
    let flow = FlowConfig {
        cfl_factor: raw.cfl_factor.unwrap_or(defaults.cfl_factor),
        t_end: raw.t_end.unwrap_or(T_END_FACTOR * time_unit),
        blowup_threshold: raw.blowup_threshold.unwrap_or(defaults.blowup_threshold),
        snapshot_interval: raw.snapshot_interval.unwrap_or(SNAPSHOT_FACTOR * time_unit),
        max_steps: raw.max_steps.unwrap_or(defaults.max_steps),
    };
    flow.validate().map_err(|e| {
        let text = e.to_string();
        let key = [
            "cfl_factor",
            "t_end",
            "blowup_threshold",
            "snapshot_interval",
            "max_steps",
        ]
        .into_iter()
        .find(|k| text.contains(k))
        .unwrap_or("flow");
        Error::config(key, text)
    })?;

    let kernel = KernelSampling {
        count: raw.kernel_samples.unwrap_or(DEFAULT_KERNEL_SAMPLES),
        tau_min: positive("tau_min", raw.tau_min.unwrap_or(1e-4))?,
        tau_max: positive("tau_max", raw.tau_max.unwrap_or(1.0))?,
    };
    if kernel.count == 0 {
        return Err(Error::config("kernel_samples", "must be at least 1"));
    }
    if kernel.tau_min > kernel.tau_max {
        return Err(Error::config(
            "tau_max",
            format!("must not be below tau_min = {}", kernel.tau_min),
        ));
    }

    let t0 = raw.t0.map(|t| positive("T0", t)).transpose()?;
    let phi_window = raw.phi_window.map(|t| positive("phi_window", t)).transpose()?;
    let check_window = positive(
        "check_window",
        raw.check_window.unwrap_or(CHECK_WINDOW_FACTOR * time_unit),
    )?;
    let check_interval = positive(
        "check_interval",
        raw.check_interval.unwrap_or(CHECK_INTERVAL_FACTOR * time_unit),
    )?;
    if check_window < 2.0 * check_interval {
        return Err(Error::config(
            "check_window",
            format!("must cover at least two check intervals ({check_interval})"),
        ));
    }
    let case_samples = raw.case_samples.unwrap_or(DEFAULT_CASE_SAMPLES);
    if case_samples < 1000 {
        return Err(Error::config("case_samples", format!("must be at least 1000, got {case_samples}")));
    }

    let id = raw.id.unwrap_or_else(|| format!("{}-n{}", preset.name(), dim.n()));
    Ok(ExperimentConfig {
        id,
        preset,
        n: dim,
        scale,
        grids,
        flow,
        kernel,
        time_unit,
        t0,
        phi_window,
        check_window,
        check_interval,
        case_samples,
        output_dir: raw.output_dir,
        seed: raw.seed.unwrap_or(DEFAULT_SEED),
    })
}

pub fn load_config(path: &std::path::Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}
