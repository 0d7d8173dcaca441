//! The four experiments the runner knows. Each produces JSON records, a CSV
//! table and a one-line summary; [`write_report`] puts them on disk.

use std::path::{Path, PathBuf};
use std::time::Instant;

use cardpath_core::amplitude::{born_probability, superpose, Amplitude};
use cardpath_core::classical_limit::{
    classical_path, concentration_point, initial_momentum, packet_endpoint_peak, phase_free_fraction, scan_config,
    validate_sweep, ScanGrid,
};
use cardpath_core::intermediate_set::{
    ks_critical_value, ks_statistic, partition_into_unit_sets, realize_population, MappingDistribution,
};
use cardpath_core::oracles::{analytic_propagator, AnalyticKernel};
use cardpath_core::propagator::{EuclideanScheme, PropagatorConfig, TransferEngine};
use cardpath_core::Error as CoreError;
use serde_json::{json, Value};

use crate::config::{DistributionKind, Experiment, ExperimentConfig, MethodKind, PotentialKind};
use crate::error::{CliError, Context};
use crate::output::{self, float, opt_float, Csv};
use crate::parallel::{self, Rayon};

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub experiment: Experiment,
    pub records: Vec<Value>,
    pub csv: Csv,
    /// Additional CSV files as `(file name, table)`.
    pub extra: Vec<(String, Csv)>,
    pub summary: String,
}

/// Runs `cfg` on the current rayon pool.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    cfg.validate()?;
    match cfg.experiment {
        Experiment::PropagatorConvergence => propagator_convergence(cfg),
        Experiment::Interference => interference(cfg),
        Experiment::ConcentrationScan => concentration(cfg),
        Experiment::MappingDemo => mapping_demo(cfg),
    }
}

/// Writes `<experiment>.json`, `<experiment>.csv` and any extra tables into
/// `dir`, creating it if needed.
pub fn write_report(report: &Report, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.display().to_string(), source })?;
    let stem = report.experiment.as_str();
    let mut written = Vec::new();
    let json_path = dir.join(format!("{stem}.json"));
    output::write_file(&json_path, &output::to_json(&report.records))?;
    written.push(json_path);
    let csv_path = dir.join(format!("{stem}.csv"));
    output::write_file(&csv_path, report.csv.as_str())?;
    written.push(csv_path);
    for (name, csv) in &report.extra {
        let p = dir.join(name);
        output::write_file(&p, csv.as_str())?;
        written.push(p);
    }
    Ok(written)
}

fn elapsed_ms(cfg: &ExperimentConfig, start: Instant) -> Option<f64> {
    cfg.record_timings.then(|| start.elapsed().as_secs_f64() * 1e3)
}

fn amp_json(z: Amplitude) -> Value {
    json!({ "re": z.re, "im": z.im })
}

/// Closed-form kernel for the configuration, if one exists.
fn oracle(cfg: &ExperimentConfig, pc: &PropagatorConfig) -> Result<Option<Amplitude>, CliError> {
    let (m, h, t) = (cfg.mass, pc.hbar(), cfg.duration());
    let kernel = match (cfg.method, cfg.potential) {
        (MethodKind::MonteCarlo, PotentialKind::Free) => AnalyticKernel::euclidean_free(m, h, t),
        (MethodKind::MonteCarlo, _) | (_, PotentialKind::Linear) => return Ok(None),
        (_, PotentialKind::Free) => AnalyticKernel::free(m, h, t),
        (_, PotentialKind::Harmonic) => AnalyticKernel::harmonic(m, cfg.omega, h, t),
    };
    match analytic_propagator(&kernel, pc.a(), pc.b()) {
        Ok(k) => Ok(Some(k)),
        Err(CoreError::CausticSingularity) => Ok(None),
        Err(e) => Err(e).during("oracle"),
    }
}

fn propagator_convergence(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let mut csv = Csv::new(&["a", "b", "re", "im", "oracle_re", "oracle_im", "relative_error", "stderr", "runtime_ms"]);
    let mut records = Vec::new();
    let mut worst: Option<f64> = None;
    for &(a, b) in &cfg.endpoints {
        let start = Instant::now();
        let pc = cfg.propagator(cfg.hbar, a, b)?;
        let result = match cfg.method {
            MethodKind::TransferMatrix => parallel::propagate_transfer_matrix(&pc),
            MethodKind::Enumeration => parallel::propagate_enumerate(&pc),
            MethodKind::MonteCarlo => {
                parallel::propagate_monte_carlo(&pc, cfg.samples, cfg.seed, EuclideanScheme::OpenWalk)
            }
        }
        .during("propagate")?;
        let runtime_ms = elapsed_ms(cfg, start);
        let exact = oracle(cfg, &pc)?;
        let rel = exact.map(|o| (result.value - o).modulus() / o.modulus());
        if let Some(r) = rel {
            worst = Some(worst.map_or(r, |w: f64| w.max(r)));
        }
        csv.row(&[
            float(a),
            float(b),
            float(result.value.re),
            float(result.value.im),
            opt_float(exact.map(|o| o.re)),
            opt_float(exact.map(|o| o.im)),
            opt_float(rel),
            opt_float(result.stderr),
            opt_float(runtime_ms),
        ]);
        records.push(json!({
            "experiment": cfg.experiment,
            "method": result.method.as_str(),
            "k": result.k,
            "sites": result.sites,
            "dx": pc.space().dx(),
            "a": a,
            "b": b,
            "snap_distances": [result.snap_distances.0, result.snap_distances.1],
            "re": result.value.re,
            "im": result.value.im,
            "stderr": result.stderr,
            "oracle": exact.map(amp_json),
            "relative_error": rel,
            "runtime_ms": runtime_ms,
            "config": cfg,
        }));
    }
    let summary = match worst {
        Some(w) => format!(
            "propagator_convergence: {} endpoint pair(s), method {}, max relative error {w:.3e}",
            cfg.endpoints.len(),
            method_name(cfg.method)
        ),
        None => format!(
            "propagator_convergence: {} endpoint pair(s), method {}, no closed-form kernel to compare",
            cfg.endpoints.len(),
            method_name(cfg.method)
        ),
    };
    Ok(Report { experiment: cfg.experiment, records, csv, extra: Vec::new(), summary })
}

fn method_name(m: MethodKind) -> &'static str {
    match m {
        MethodKind::TransferMatrix => "transfer_matrix",
        MethodKind::Enumeration => "enumeration",
        MethodKind::MonteCarlo => "monte_carlo",
    }
}

/// Local maxima of `y` over `xs`, refined by a parabola through each peak
/// and its neighbours.
pub fn refined_maxima(xs: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for j in 1..y.len().saturating_sub(1) {
        if y[j] > y[j - 1] && y[j] >= y[j + 1] {
            let curvature = y[j - 1] - 2.0 * y[j] + y[j + 1];
            let dx = xs[j + 1] - xs[j];
            let shift = if curvature < 0.0 { 0.5 * (y[j - 1] - y[j + 1]) / curvature } else { 0.0 };
            out.push(xs[j] + shift * dx);
        }
    }
    out
}

/// Two point slits at `±d/2` feed a screen after `T`; the screen amplitude
/// is the superposition of the two single-slit kernels.
fn interference(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let start = Instant::now();
    let d = cfg.slit_separation;
    let pc = cfg.propagator(cfg.hbar, -0.5 * d, 0.5 * d)?;
    let k = pc.grid().steps();
    let mut engine = TransferEngine::with_executor(&pc, Rayon);
    let from_left = engine.delta(pc.a_site());
    let left = engine.forward(from_left, 1..=k).during("propagate")?;
    let from_right = engine.delta(pc.b_site());
    let right = engine.forward(from_right, 1..=k).during("propagate")?;

    let space = pc.space();
    let center = 0.5 * (space.lo() + space.hi());
    let half = 0.5 * (space.hi() - space.lo());
    let screen = cfg.screen_half_width.unwrap_or(half * cfg.taper_fraction.clamp(0.1, 1.0));
    let mut csv = Csv::new(&["x", "intensity", "re", "im"]);
    let (mut xs, mut intensity) = (Vec::new(), Vec::new());
    for j in 0..space.sites() {
        let x = space.point(j);
        if (x - center).abs() > screen {
            continue;
        }
        let psi = superpose(left[j].into(), right[j].into());
        let p = born_probability(psi);
        csv.row(&[float(x), float(p), float(psi.re), float(psi.im)]);
        xs.push(x);
        intensity.push(p);
    }
    let maxima = refined_maxima(&xs, &intensity);
    if maxima.len() < 2 {
        return Err(CliError::Check {
            operation: "fringe analysis",
            message: format!("{} intensity maximum on the screen; widen screen_half_width or lower hbar", maxima.len()),
        });
    }
    let measured = (maxima[maxima.len() - 1] - maxima[0]) / (maxima.len() - 1) as f64;
    let predicted = 2.0 * std::f64::consts::PI * cfg.hbar * cfg.duration() / (cfg.mass * d);
    let rel = (measured - predicted).abs() / predicted;
    let runtime_ms = elapsed_ms(cfg, start);
    let record = json!({
        "experiment": cfg.experiment,
        "method": "transfer_matrix",
        "k": k,
        "sites": space.sites(),
        "dx": space.dx(),
        "screen_half_width": screen,
        "maxima": maxima,
        "fringe_spacing": measured,
        "predicted_fringe_spacing": predicted,
        "relative_error": rel,
        "runtime_ms": runtime_ms,
        "config": cfg,
    });
    let summary = format!(
        "interference: {} fringes, spacing {measured:.6} vs predicted {predicted:.6} (relative error {rel:.2e})",
        maxima.len()
    );
    Ok(Report { experiment: cfg.experiment, records: vec![record], csv, extra: Vec::new(), summary })
}

fn concentration(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    validate_sweep(&cfg.hbar_sweep, cfg.tube_radius).during("hbar_sweep")?;
    let (a, b) = cfg.endpoints[0];
    let grid = match cfg.grid {
        crate::config::GridKind::Recipe => ScanGrid::Recipe(cfg.recipe()),
        crate::config::GridKind::Fixed => ScanGrid::Fixed,
    };
    let base = cfg.propagator(cfg.hbar_sweep[0], a, b)?;
    let first = scan_config(&base, grid, cfg.hbar_sweep[0]).during("grid")?;
    let classical = classical_path(&first).during("classical_path")?;

    let mut csv = Csv::new(&["hbar", "m_scale", "mass_fraction", "runtime_ms"]);
    let mut points = Vec::new();
    for &h in &cfg.hbar_sweep {
        let start = Instant::now();
        let pc = scan_config(&base, grid, h).during("grid")?;
        let p = concentration_point(&pc, &classical, cfg.tube_radius, &Rayon).during("concentration")?;
        let runtime_ms = elapsed_ms(cfg, start);
        csv.row(&[float(p.hbar), float(p.m_scale), float(p.mass_fraction), opt_float(runtime_ms)]);
        points.push(json!({
            "hbar": p.hbar,
            "m_scale": p.m_scale,
            "mass_fraction": p.mass_fraction,
            "tube": amp_json(p.tube),
            "full": amp_json(p.full),
            "sites": p.sites,
            "dx": p.dx,
            "runtime_ms": runtime_ms,
        }));
    }
    let fractions: Vec<f64> = points.iter().map(|p| p["mass_fraction"].as_f64().unwrap_or(f64::NAN)).collect();
    let monotone = fractions.windows(2).all(|w| w[1] >= w[0] - 1e-3);

    let h_last = cfg.hbar_sweep[cfg.hbar_sweep.len() - 1];
    let last = scan_config(&base, grid, h_last).during("grid")?;
    let phase_free = phase_free_fraction(&last, &classical, cfg.tube_radius, &Rayon).during("concentration")?;
    let p0 = initial_momentum(&classical.path, last.grid(), last.lagrangian()).during("classical_path")?;
    let sigma = (h_last * cfg.duration() / (2.0 * cfg.mass)).sqrt();
    let peak = packet_endpoint_peak(&last, p0, sigma, Rayon).during("wave packet")?;
    let endpoint = classical.path.end();
    let offset = (peak.position - endpoint).abs();
    let within = offset <= 2.0 * last.space().dx();

    let record = json!({
        "experiment": cfg.experiment,
        "method": "transfer_matrix",
        "k": last.grid().steps(),
        "sites": last.space().sites(),
        "tube_radius": cfg.tube_radius,
        "classical_action": classical.action,
        "classical_strict_minimum": classical.strict_minimum,
        "points": points,
        "monotone": monotone,
        "phase_free_fraction": phase_free,
        "packet_peak": peak.position,
        "classical_endpoint": endpoint,
        "peak_offset_in_dx": offset / last.space().dx(),
        "peak_within_2dx": within,
        "config": cfg,
    });
    let summary = format!(
        "concentration_scan: mass fraction {} over {} hbar values ({}), packet peak {:.1} dx from the classical endpoint",
        fractions.iter().map(|f| format!("{f:.3}")).collect::<Vec<_>>().join(" -> "),
        fractions.len(),
        if monotone { "nondecreasing" } else { "not monotone" },
        offset / last.space().dx(),
    );
    let path = ("concentration_scan_path.csv".to_owned(), output::path_csv(&classical.path, last.grid()));
    Ok(Report { experiment: cfg.experiment, records: vec![record], csv, extra: vec![path], summary })
}

fn mapping_demo(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let start = Instant::now();
    let dist = match cfg.distribution {
        DistributionKind::Uniform => {
            MappingDistribution::uniform(cfg.support_lo, cfg.support_hi).during("support_lo")?
        }
        DistributionKind::Degenerate => MappingDistribution::Degenerate { at: cfg.degenerate_at },
    };
    let points = realize_population(cfg.count, &dist, cfg.seed).during("distribution")?;
    let mut csv = Csv::new(&["n", "unit_set", "r"]);
    let mut images = Vec::with_capacity(points.len());
    for p in &points {
        let r = p.image().expect("realized point");
        csv.row(&[format!("{}", p.n()), p.unit_set().to_string(), float(r)]);
        images.push(r);
    }
    let (ks, critical) = if images.is_empty() {
        (None, None)
    } else {
        (Some(ks_statistic(&images, |x| dist.cdf(x))), Some(ks_critical_value(images.len(), cfg.ks_alpha)))
    };
    let mean = (!images.is_empty()).then(|| images.iter().sum::<f64>() / images.len() as f64);
    let unit_sets = partition_into_unit_sets(&points).len();
    let runtime_ms = elapsed_ms(cfg, start);
    let record = json!({
        "experiment": cfg.experiment,
        "count": cfg.count,
        "unit_sets": unit_sets,
        "mean": mean,
        "expected_mean": dist.mean(),
        "ks_statistic": ks,
        "ks_critical_value": critical,
        "ks_pass": ks.zip(critical).map(|(d, c)| d < c),
        "runtime_ms": runtime_ms,
        "config": cfg,
    });
    let summary = match ks.zip(critical) {
        Some((d, c)) => format!("mapping_demo: {} points, KS statistic {d:.4} (critical {c:.4})", cfg.count),
        None => "mapping_demo: 0 points".to_owned(),
    };
    Ok(Report { experiment: cfg.experiment, records: vec![record], csv, extra: Vec::new(), summary })
}
