//! Stationary lattice paths and how the kernel concentrates around them as
//! `ħ` shrinks.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::amplitude::Amplitude;
use crate::error::{Error, Result};
use crate::lattice::{discretized_action, LagrangianSpec, LatticePath, TimeGrid};
use crate::math;
use crate::propagator::{ConvergenceRecipe, PropagatorConfig, RowExecutor, Sequential, SliceMask, TransferEngine};

const MAX_NEWTON: usize = 100;
const GRADIENT_TOLERANCE: f64 = 1e-10;

/// Result of [`classical_path`].
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryPath {
    pub path: LatticePath,
    pub action: f64,
    pub iterations: usize,
    pub max_gradient: f64,
    /// Every pivot of the tridiagonal Hessian was positive.
    pub strict_minimum: bool,
}

fn check_path(path: &LatticePath, grid: &TimeGrid) -> Result<()> {
    if path.len() != grid.steps() + 1 {
        return Err(Error::GridMismatch { expected: grid.steps() + 1, found: path.len() });
    }
    Ok(())
}

/// `∂S/∂r_i` for the interior sites `i = 1..k−1` of `path`.
pub fn action_gradient(path: &LatticePath, grid: &TimeGrid, lag: &LagrangianSpec) -> Result<Vec<f64>> {
    check_path(path, grid)?;
    let eps = grid.epsilon();
    let m = lag.mass();
    let r = path.sites();
    Ok((1..grid.steps())
        .map(|i| {
            let left = lag.potential_gradient(0.5 * (r[i - 1] + r[i]), grid.midpoint_time(i));
            let right = lag.potential_gradient(0.5 * (r[i] + r[i + 1]), grid.midpoint_time(i + 1));
            m * ((r[i] - r[i - 1]) - (r[i + 1] - r[i])) / eps - 0.5 * eps * (left + right)
        })
        .collect())
}

/// Central-difference gradient of the action with step `h`.
///
/// Only the two steps touching `r_i` change when it moves, so only those
/// are re-evaluated; the rest of the sum cancels exactly.
pub fn finite_difference_action_gradient(
    path: &LatticePath,
    grid: &TimeGrid,
    lag: &LagrangianSpec,
    h: f64,
) -> Result<Vec<f64>> {
    check_path(path, grid)?;
    if !(h > 0.0) {
        return Err(Error::InvalidArgument("difference step must be positive"));
    }
    let eps = grid.epsilon();
    let r = path.sites();
    let local = |i: usize, x: f64| {
        lag.step_action(r[i - 1], x, eps, grid.midpoint_time(i))
            + lag.step_action(x, r[i + 1], eps, grid.midpoint_time(i + 1))
    };
    Ok((1..grid.steps()).map(|i| (local(i, r[i] + h) - local(i, r[i] - h)) / (2.0 * h)).collect())
}

fn hessian(path: &LatticePath, grid: &TimeGrid, lag: &LagrangianSpec) -> (Vec<f64>, Vec<f64>) {
    let eps = grid.epsilon();
    let m = lag.mass();
    let r = path.sites();
    let k = grid.steps();
    let curv: Vec<f64> =
        (1..=k).map(|i| lag.potential_curvature(0.5 * (r[i - 1] + r[i]), grid.midpoint_time(i))).collect();
    let diag = (1..k).map(|i| 2.0 * m / eps - 0.25 * eps * (curv[i - 1] + curv[i])).collect();
    let off = (1..k.saturating_sub(1)).map(|i| -m / eps - 0.25 * eps * curv[i]).collect();
    (diag, off)
}

/// Thomas algorithm for a symmetric tridiagonal system. Returns the
/// solution and whether every pivot was positive.
fn solve_tridiagonal(diag: &[f64], off: &[f64], rhs: &[f64]) -> Result<(Vec<f64>, bool)> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut positive = true;
    let mut pivot = diag[0];
    for i in 0..n {
        if i > 0 {
            pivot = diag[i] - off[i - 1] * c[i - 1];
        }
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::CausticSingularity);
        }
        positive &= pivot > 0.0;
        c[i] = if i + 1 < n { off[i] / pivot } else { 0.0 };
        d[i] = (rhs[i] - if i > 0 { off[i - 1] * d[i - 1] } else { 0.0 }) / pivot;
    }
    for i in (0..n.saturating_sub(1)).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok((d, positive))
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn tolerance(path: &LatticePath, grid: &TimeGrid, lag: &LagrangianSpec) -> f64 {
    let reach = path.sites().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    GRADIENT_TOLERANCE * (1.0 + lag.mass() * reach / grid.epsilon())
}

/// Stationary path of the lattice action between fixed endpoints `a` and
/// `b`, found by damped Newton iteration from the straight line.
///
/// Converges when `‖∇S‖∞ ≤ 1e-10·(1 + m·max|r|/ε)`, the rounding floor of
/// the gradient.
pub fn stationary_path(grid: &TimeGrid, lag: &LagrangianSpec, a: f64, b: f64) -> Result<StationaryPath> {
    let k = grid.steps();
    let mut path = LatticePath::straight(a, b, k);
    if k < 2 {
        let action = discretized_action(&path, grid, lag)?;
        return Ok(StationaryPath { path, action, iterations: 0, max_gradient: 0.0, strict_minimum: true });
    }
    let mut grad = action_gradient(&path, grid, lag)?;
    let mut norm = max_abs(&grad);
    for iteration in 0..=MAX_NEWTON {
        let (diag, off) = hessian(&path, grid, lag);
        let (step, strict) = solve_tridiagonal(&diag, &off, &grad)?;
        if norm <= tolerance(&path, grid, lag) {
            let action = discretized_action(&path, grid, lag)?;
            return Ok(StationaryPath {
                path,
                action,
                iterations: iteration,
                max_gradient: norm,
                strict_minimum: strict,
            });
        }
        if iteration == MAX_NEWTON {
            break;
        }
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let mut trial = path.clone();
            for (x, s) in trial.sites_mut()[1..k].iter_mut().zip(&step) {
                *x -= scale * s;
            }
            let g = action_gradient(&trial, grid, lag)?;
            let n = max_abs(&g);
            if n.is_finite() && n < norm {
                path = trial;
                grad = g;
                norm = n;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Err(Error::NoConvergence { iterations: MAX_NEWTON, gradient: norm })
}

/// [`stationary_path`] between the snapped endpoints of `cfg`.
pub fn classical_path(cfg: &PropagatorConfig) -> Result<StationaryPath> {
    stationary_path(cfg.grid(), cfg.lagrangian(), cfg.a(), cfg.b())
}

/// Sites within `delta` of the classical path on every slice.
pub fn tube_mask(cfg: &PropagatorConfig, classical: &LatticePath, delta: f64) -> Result<SliceMask> {
    check_path(classical, cfg.grid())?;
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument("tube radius must be positive"));
    }
    let points = cfg.space().points();
    Ok(SliceMask::new(
        classical.sites().iter().map(|&r| points.iter().map(|&x| (x - r).abs() <= delta).collect()).collect(),
    ))
}

/// Kernel restricted to the tube against the unrestricted kernel at one `ħ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub hbar: f64,
    /// `S_cl/(2πħ)`, the classical action in turns.
    pub m_scale: f64,
    pub tube: Amplitude,
    pub full: Amplitude,
    /// `|K_tube| / (|K_tube| + |K_full − K_tube|)`, in `[0, 1]`.
    pub mass_fraction: f64,
    pub sites: usize,
    pub dx: f64,
}

/// Fraction of the kernel's magnitude carried by paths inside the tube.
///
/// The tube and out-of-tube contributions are complex and can cancel, so
/// `|K_tube|/|K_full|` is not bounded by one; this ratio is.
pub fn mass_fraction(tube: Amplitude, full: Amplitude) -> f64 {
    let inside = tube.modulus();
    let outside = (full - tube).modulus();
    if inside + outside == 0.0 {
        return 0.0;
    }
    inside / (inside + outside)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationScan {
    pub delta: f64,
    pub classical: StationaryPath,
    pub points: Vec<ScanPoint>,
    /// The same ratio with every phase removed.
    pub phase_free_fraction: f64,
}

impl ConcentrationScan {
    pub fn mass_fractions(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mass_fraction).collect()
    }

    /// Whether the mass fraction never decreases along the scan.
    pub fn is_monotone(&self) -> bool {
        self.points.windows(2).all(|w| w[1].mass_fraction >= w[0].mass_fraction)
    }
}

/// Spatial grid used at each `ħ` of a scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScanGrid {
    /// Rebuild the grid from a recipe at every `ħ`.
    Recipe(ConvergenceRecipe),
    /// Keep the grid of the supplied configuration.
    Fixed,
}

/// Configuration used for one `ħ` of a scan. The time grid of `cfg` is kept.
pub fn scan_config(cfg: &PropagatorConfig, grid: ScanGrid, hbar: f64) -> Result<PropagatorConfig> {
    match grid {
        ScanGrid::Fixed => cfg.with_hbar(hbar),
        ScanGrid::Recipe(recipe) => {
            let t = cfg.grid();
            let recipe = ConvergenceRecipe { k: t.steps(), ..recipe };
            recipe.config(cfg.lagrangian().clone(), hbar, t.t_a(), t.t_b(), cfg.a(), cfg.b())
        }
    }
}

fn fraction_at<E: RowExecutor + Clone>(
    cfg: &PropagatorConfig,
    classical: &LatticePath,
    delta: f64,
    phase_free: bool,
    exec: &E,
) -> Result<(Amplitude, Amplitude)> {
    let mask = tube_mask(cfg, classical, delta)?;
    let full = TransferEngine::with_executor(cfg, exec.clone()).phase_free(phase_free).propagate()?.value;
    let tube =
        TransferEngine::with_executor(cfg, exec.clone()).phase_free(phase_free).with_mask(&mask)?.propagate()?.value;
    Ok((tube, full))
}

/// Tube-restricted and full kernels of `cfg` at its own `ħ`.
pub fn concentration_point<E: RowExecutor + Clone>(
    cfg: &PropagatorConfig,
    classical: &StationaryPath,
    delta: f64,
    exec: &E,
) -> Result<ScanPoint> {
    let (tube, full) = fraction_at(cfg, &classical.path, delta, false, exec)?;
    Ok(ScanPoint {
        hbar: cfg.hbar(),
        m_scale: classical.action / (math::TAU * cfg.hbar()),
        tube,
        full,
        mass_fraction: mass_fraction(tube, full),
        sites: cfg.space().sites(),
        dx: cfg.space().dx(),
    })
}

/// [`mass_fraction`] with every phase removed, leaving only the measure.
pub fn phase_free_fraction<E: RowExecutor + Clone>(
    cfg: &PropagatorConfig,
    classical: &StationaryPath,
    delta: f64,
    exec: &E,
) -> Result<f64> {
    let (tube, full) = fraction_at(cfg, &classical.path, delta, true, exec)?;
    Ok(mass_fraction(tube, full))
}

/// Checks a sweep is nonempty, positive and strictly decreasing.
pub fn validate_sweep(hbar_values: &[f64], delta: f64) -> Result<()> {
    if hbar_values.is_empty() {
        return Err(Error::InvalidArgument("hbar sweep is empty"));
    }
    if hbar_values.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
        return Err(Error::InvalidArgument("hbar values must be positive"));
    }
    if hbar_values.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("hbar values must be strictly decreasing"));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument("tube radius must be positive"));
    }
    Ok(())
}

/// Sweeps a strictly decreasing sequence of `ħ` values and records how much
/// of the kernel comes from paths within `delta` of the classical path.
///
/// The time grid of `cfg` is kept; the space grid is rebuilt with the
/// standard recipe at each `ħ`.
pub fn concentration_scan(cfg: &PropagatorConfig, hbar_values: &[f64], delta: f64) -> Result<ConcentrationScan> {
    concentration_scan_with(cfg, hbar_values, delta, ScanGrid::Recipe(ConvergenceRecipe::STANDARD), Sequential)
}

pub fn concentration_scan_with<E: RowExecutor + Clone>(
    cfg: &PropagatorConfig,
    hbar_values: &[f64],
    delta: f64,
    grid: ScanGrid,
    exec: E,
) -> Result<ConcentrationScan> {
    validate_sweep(hbar_values, delta)?;
    let classical = classical_path(&scan_config(cfg, grid, hbar_values[0])?)?;
    let points = hbar_values
        .iter()
        .map(|&h| concentration_point(&scan_config(cfg, grid, h)?, &classical, delta, &exec))
        .collect::<Result<Vec<_>>>()?;
    let last = scan_config(cfg, grid, hbar_values[hbar_values.len() - 1])?;
    let phase_free_fraction = phase_free_fraction(&last, &classical, delta, &exec)?;
    Ok(ConcentrationScan { delta, classical, points, phase_free_fraction })
}

/// Discrete initial momentum of a stationary path,
/// `−∂S_1/∂r_0 = m(r_1 − r_0)/ε + (ε/2)·V'((r_0 + r_1)/2)`.
pub fn initial_momentum(path: &LatticePath, grid: &TimeGrid, lag: &LagrangianSpec) -> Result<f64> {
    check_path(path, grid)?;
    let r = path.sites();
    let eps = grid.epsilon();
    Ok(lag.mass() * (r[1] - r[0]) / eps
        + 0.5 * eps * lag.potential_gradient(0.5 * (r[0] + r[1]), grid.midpoint_time(1)))
}

/// Peak of the evolved density of a Gaussian packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketPeak {
    pub site: usize,
    pub position: f64,
    pub density: f64,
}

/// Launches a Gaussian packet of width `sigma` from `a` with momentum `p0`,
/// evolves it over the configuration's time grid and returns where
/// `|ψ(x, t_b)|²` peaks.
pub fn packet_endpoint_peak<E: RowExecutor>(
    cfg: &PropagatorConfig,
    p0: f64,
    sigma: f64,
    exec: E,
) -> Result<PacketPeak> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument("packet width must be positive"));
    }
    let a = cfg.a();
    let hbar = cfg.hbar();
    let psi0: Vec<Complex64> = cfg
        .space()
        .points()
        .iter()
        .map(|&x| {
            let envelope = math::exp(-(x - a) * (x - a) / (4.0 * sigma * sigma));
            let (s, c) = math::sin_cos(p0 * (x - a) / hbar);
            Complex64::new(envelope * c, envelope * s)
        })
        .collect();
    let k = cfg.grid().steps();
    let psi = TransferEngine::with_executor(cfg, exec).forward(psi0, 1..=k)?;
    let (site, density) = psi.iter().map(|z| z.norm_sqr()).enumerate().fold((0, f64::NEG_INFINITY), |best, (j, d)| {
        if d > best.1 {
            (j, d)
        } else {
            best
        }
    });
    Ok(PacketPeak { site, position: cfg.space().point(site), density })
}

/// Launches the packet along the classical path of `cfg` with width
/// `sqrt(ħT/(2m))`.
pub fn classical_packet_peak<E: RowExecutor>(cfg: &PropagatorConfig, exec: E) -> Result<(StationaryPath, PacketPeak)> {
    let cl = classical_path(cfg)?;
    let p0 = initial_momentum(&cl.path, cfg.grid(), cfg.lagrangian())?;
    let sigma = math::sqrt(cfg.hbar() * cfg.grid().duration() / (2.0 * cfg.lagrangian().mass()));
    let peak = packet_endpoint_peak(cfg, p0, sigma, exec)?;
    Ok((cl, peak))
}
