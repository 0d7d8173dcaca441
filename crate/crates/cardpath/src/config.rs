//! Flat `key = value` experiment configuration.
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored.
//! Unknown and repeated keys are errors. Every key has a default except
//! `experiment`; keys that do not apply to the chosen experiment are
//! accepted and ignored.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use cardpath_core::lattice::{LagrangianSpec, Potential, SpaceGrid, TimeGrid};
use cardpath_core::propagator::{Boundary, ConvergenceRecipe, PropagatorConfig};
use serde::Serialize;

use crate::error::{CliError, Context};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    PropagatorConvergence,
    Interference,
    ConcentrationScan,
    MappingDemo,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::PropagatorConvergence => "propagator_convergence",
            Experiment::Interference => "interference",
            Experiment::ConcentrationScan => "concentration_scan",
            Experiment::MappingDemo => "mapping_demo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    Free,
    Harmonic,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Recipe,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    Tapered,
    HardWall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    TransferMatrix,
    Enumeration,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    Uniform,
    Degenerate,
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    /// Output directory; `--out` takes precedence. Not embedded in records.
    #[serde(skip)]
    pub output_path: String,
    pub record_timings: bool,

    pub mass: f64,
    pub potential: PotentialKind,
    pub omega: f64,
    pub slope: f64,
    pub t_a: f64,
    pub t_b: f64,
    pub hbar: f64,

    pub k: usize,
    pub grid: GridKind,
    pub sites: usize,
    pub half_width_factor: f64,
    pub taper_fraction: f64,
    pub alias_margin: f64,
    pub max_sites: usize,
    pub boundary: BoundaryKind,

    pub method: MethodKind,
    pub samples: usize,
    pub endpoints: Vec<(f64, f64)>,

    pub hbar_sweep: Vec<f64>,
    pub tube_radius: f64,

    pub slit_separation: f64,
    pub screen_half_width: Option<f64>,

    pub count: usize,
    pub distribution: DistributionKind,
    pub support_lo: f64,
    pub support_hi: f64,
    pub degenerate_at: f64,
    pub ks_alpha: f64,
}

const KEYS: &[&str] = &[
    "experiment",
    "seed",
    "output_path",
    "record_timings",
    "mass",
    "potential",
    "omega",
    "slope",
    "t_a",
    "t_b",
    "hbar",
    "k",
    "grid",
    "sites",
    "half_width_factor",
    "taper_fraction",
    "alias_margin",
    "max_sites",
    "boundary",
    "method",
    "samples",
    "endpoints",
    "hbar_sweep",
    "tube_radius",
    "slit_separation",
    "screen_half_width",
    "count",
    "distribution",
    "support_lo",
    "support_hi",
    "degenerate_at",
    "ks_alpha",
];

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let r = ConvergenceRecipe::STANDARD;
        Self {
            experiment,
            seed: 0,
            output_path: ".".into(),
            record_timings: false,
            mass: 1.0,
            potential: PotentialKind::Free,
            omega: 1.0,
            slope: 0.0,
            t_a: 0.0,
            t_b: 1.0,
            hbar: 1.0,
            k: r.k,
            grid: GridKind::Recipe,
            sites: 401,
            half_width_factor: r.half_width_factor,
            taper_fraction: r.taper_fraction,
            alias_margin: r.alias_margin,
            max_sites: r.max_sites,
            boundary: BoundaryKind::Tapered,
            method: MethodKind::TransferMatrix,
            samples: 10_000,
            endpoints: vec![(0.0, 0.0)],
            hbar_sweep: vec![1.0, 0.5, 0.25, 0.125, 0.0625],
            tube_radius: 0.2,
            slit_separation: 1.0,
            screen_half_width: None,
            count: 1000,
            distribution: DistributionKind::Uniform,
            support_lo: 0.0,
            support_hi: 1.0,
            degenerate_at: 0.5,
            ks_alpha: 0.01,
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut pairs: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::field(format!("line {}", lineno + 1), "expected 'key = value'"));
            };
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(CliError::field(key, "unknown key"));
            }
            if pairs.insert(key.to_owned(), value.trim().to_owned()).is_some() {
                return Err(CliError::field(key, "given more than once"));
            }
        }
        let experiment = match pairs.remove("experiment").as_deref() {
            None => return Err(CliError::field("experiment", "missing")),
            Some(v) => parse_experiment(v)?,
        };
        let mut cfg = Self::defaults(experiment);
        for (key, value) in &pairs {
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, v: &str) -> Result<(), CliError> {
        match key {
            "seed" => self.seed = scalar(key, v)?,
            "output_path" => self.output_path = v.to_owned(),
            "record_timings" => self.record_timings = scalar(key, v)?,
            "mass" => self.mass = scalar(key, v)?,
            "potential" => {
                self.potential = choice(
                    key,
                    v,
                    &[
                        ("free", PotentialKind::Free),
                        ("harmonic", PotentialKind::Harmonic),
                        ("linear", PotentialKind::Linear),
                    ],
                )?
            }
            "omega" => self.omega = scalar(key, v)?,
            "slope" => self.slope = scalar(key, v)?,
            "t_a" => self.t_a = scalar(key, v)?,
            "t_b" => self.t_b = scalar(key, v)?,
            "hbar" => self.hbar = scalar(key, v)?,
            "k" => self.k = scalar(key, v)?,
            "grid" => self.grid = choice(key, v, &[("recipe", GridKind::Recipe), ("fixed", GridKind::Fixed)])?,
            "sites" => self.sites = scalar(key, v)?,
            "half_width_factor" => self.half_width_factor = scalar(key, v)?,
            "taper_fraction" => self.taper_fraction = scalar(key, v)?,
            "alias_margin" => self.alias_margin = scalar(key, v)?,
            "max_sites" => self.max_sites = scalar(key, v)?,
            "boundary" => {
                self.boundary =
                    choice(key, v, &[("tapered", BoundaryKind::Tapered), ("hard_wall", BoundaryKind::HardWall)])?
            }
            "method" => {
                self.method = choice(
                    key,
                    v,
                    &[
                        ("transfer_matrix", MethodKind::TransferMatrix),
                        ("enumeration", MethodKind::Enumeration),
                        ("monte_carlo", MethodKind::MonteCarlo),
                    ],
                )?
            }
            "samples" => self.samples = scalar(key, v)?,
            "endpoints" => {
                self.endpoints = list(key, v, |item| {
                    let (a, b) = item.split_once(':').ok_or("expected 'a:b'")?;
                    let a = a.trim().parse::<f64>().map_err(|_| "bad number")?;
                    let b = b.trim().parse::<f64>().map_err(|_| "bad number")?;
                    Ok((a, b))
                })?
            }
            "hbar_sweep" => self.hbar_sweep = list(key, v, |item| item.parse::<f64>().map_err(|_| "bad number"))?,
            "tube_radius" => self.tube_radius = scalar(key, v)?,
            "slit_separation" => self.slit_separation = scalar(key, v)?,
            "screen_half_width" => self.screen_half_width = Some(scalar(key, v)?),
            "count" => self.count = scalar(key, v)?,
            "distribution" => {
                self.distribution = choice(
                    key,
                    v,
                    &[("uniform", DistributionKind::Uniform), ("degenerate", DistributionKind::Degenerate)],
                )?
            }
            "support_lo" => self.support_lo = scalar(key, v)?,
            "support_hi" => self.support_hi = scalar(key, v)?,
            "degenerate_at" => self.degenerate_at = scalar(key, v)?,
            "ks_alpha" => self.ks_alpha = scalar(key, v)?,
            _ => unreachable!("key list and setter disagree on {key}"),
        }
        Ok(())
    }

    /// Range checks; the error names the first offending field.
    pub fn validate(&self) -> Result<(), CliError> {
        let positive = |field: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(CliError::field(field, format!("must be a positive finite number, got {x}")))
            }
        };
        let finite = |field: &str, x: f64| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(CliError::field(field, "must be finite"))
            }
        };
        positive("mass", self.mass)?;
        positive("hbar", self.hbar)?;
        finite("t_a", self.t_a)?;
        finite("t_b", self.t_b)?;
        if !(self.t_b > self.t_a) {
            return Err(CliError::field("t_b", "must exceed t_a"));
        }
        match self.potential {
            PotentialKind::Harmonic => positive("omega", self.omega)?,
            PotentialKind::Linear => finite("slope", self.slope)?,
            PotentialKind::Free => {}
        }
        if self.k == 0 {
            return Err(CliError::field("k", "must be at least 1"));
        }
        if self.sites < 2 {
            return Err(CliError::field("sites", "must be at least 2"));
        }
        positive("half_width_factor", self.half_width_factor)?;
        if !(self.taper_fraction >= 0.0 && self.taper_fraction <= 1.0) {
            return Err(CliError::field("taper_fraction", "must lie in [0, 1]"));
        }
        positive("alias_margin", self.alias_margin)?;
        if self.max_sites < 3 {
            return Err(CliError::field("max_sites", "must be at least 3"));
        }
        if self.endpoints.is_empty() {
            return Err(CliError::field("endpoints", "needs at least one pair"));
        }
        for &(a, b) in &self.endpoints {
            finite("endpoints", a)?;
            finite("endpoints", b)?;
        }
        match self.experiment {
            Experiment::PropagatorConvergence if self.method == MethodKind::MonteCarlo => {
                if self.samples < cardpath_core::propagator::MC_MIN_SAMPLES {
                    return Err(CliError::field("samples", "must be at least 100"));
                }
            }
            Experiment::ConcentrationScan => {
                positive("tube_radius", self.tube_radius)?;
                if self.hbar_sweep.is_empty() {
                    return Err(CliError::field("hbar_sweep", "must not be empty"));
                }
                for &h in &self.hbar_sweep {
                    positive("hbar_sweep", h)?;
                }
                if self.hbar_sweep.windows(2).any(|w| w[1] >= w[0]) {
                    return Err(CliError::field("hbar_sweep", "must be strictly decreasing"));
                }
            }
            Experiment::Interference => {
                positive("slit_separation", self.slit_separation)?;
                if let Some(w) = self.screen_half_width {
                    positive("screen_half_width", w)?;
                }
            }
            Experiment::MappingDemo => {
                match self.distribution {
                    DistributionKind::Uniform => {
                        finite("support_lo", self.support_lo)?;
                        finite("support_hi", self.support_hi)?;
                        if !(self.support_hi > self.support_lo) {
                            return Err(CliError::field("support_hi", "must exceed support_lo"));
                        }
                    }
                    DistributionKind::Degenerate => finite("degenerate_at", self.degenerate_at)?,
                }
                if !(self.ks_alpha > 0.0 && self.ks_alpha < 1.0) {
                    return Err(CliError::field("ks_alpha", "must lie in (0, 1)"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn lagrangian(&self) -> Result<LagrangianSpec, CliError> {
        let potential = match self.potential {
            PotentialKind::Free => Potential::Free,
            PotentialKind::Harmonic => Potential::Harmonic { omega: self.omega },
            PotentialKind::Linear => Potential::Linear { slope: self.slope },
        };
        LagrangianSpec::new(self.mass, potential).during("mass")
    }

    pub fn duration(&self) -> f64 {
        self.t_b - self.t_a
    }

    pub fn recipe(&self) -> ConvergenceRecipe {
        ConvergenceRecipe {
            k: self.k,
            half_width_factor: self.half_width_factor,
            taper_fraction: self.taper_fraction,
            alias_margin: self.alias_margin,
            max_sites: self.max_sites,
        }
    }

    /// Propagator configuration for endpoints `a → b` at `hbar`.
    ///
    /// `grid = recipe` builds the aliasing-safe tapered grid; `grid = fixed`
    /// uses `sites` points over `(a+b)/2 ± (|b−a|/2 + half_width_factor·sqrt(ħT/m))`
    /// with the configured boundary.
    pub fn propagator(&self, hbar: f64, a: f64, b: f64) -> Result<PropagatorConfig, CliError> {
        let lag = self.lagrangian()?;
        match self.grid {
            GridKind::Recipe => self.recipe().config(lag, hbar, self.t_a, self.t_b, a, b).during("grid"),
            GridKind::Fixed => {
                let time = TimeGrid::new(self.t_a, self.t_b, self.k).during("k")?;
                let half = 0.5 * (b - a).abs() + self.half_width_factor * (hbar * self.duration() / self.mass).sqrt();
                let space = SpaceGrid::centered(0.5 * (a + b), half, self.sites).during("sites")?;
                let boundary = match self.boundary {
                    BoundaryKind::HardWall => Boundary::HardWall,
                    BoundaryKind::Tapered => Boundary::Tapered { inner_fraction: self.taper_fraction },
                };
                PropagatorConfig::new(time, space, lag, hbar, a, b)
                    .and_then(|c| c.with_boundary(boundary))
                    .during("grid")
            }
        }
    }
}

fn parse_experiment(v: &str) -> Result<Experiment, CliError> {
    choice(
        "experiment",
        v,
        &[
            ("propagator_convergence", Experiment::PropagatorConvergence),
            ("interference", Experiment::Interference),
            ("concentration_scan", Experiment::ConcentrationScan),
            ("mapping_demo", Experiment::MappingDemo),
        ],
    )
}

fn scalar<T: FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| CliError::field(key, format!("cannot parse '{v}'")))
}

fn choice<T: Copy>(key: &str, v: &str, options: &[(&str, T)]) -> Result<T, CliError> {
    options.iter().find(|(name, _)| *name == v).map(|(_, x)| *x).ok_or_else(|| {
        let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
        CliError::field(key, format!("'{v}' is not one of {}", names.join(", ")))
    })
}

fn list<T>(key: &str, v: &str, item: impl Fn(&str) -> Result<T, &'static str>) -> Result<Vec<T>, CliError> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| item(s).map_err(|m| CliError::field(key, format!("{m} in '{s}'"))))
        .collect()
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let value = serde_json::to_value(self).map_err(|_| fmt::Error)?;
        let serde_json::Value::Object(map) = value else { return Err(fmt::Error) };
        for (k, v) in map {
            let text = match v {
                serde_json::Value::String(s) => s,
                serde_json::Value::Array(items) => items
                    .iter()
                    .map(|i| match i {
                        serde_json::Value::Array(pair) => {
                            pair.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(":")
                        }
                        other => other.to_string(),
                    })
                    .collect::<Vec<_>>()
                    .join(", "),
                serde_json::Value::Null => continue,
                other => other.to_string(),
            };
            writeln!(f, "{k} = {text}")?;
        }
        Ok(())
    }
}
