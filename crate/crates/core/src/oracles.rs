//! Independent ground truth for the propagator and classical-path code.
//!
//! Nothing here reuses the summation or descent machinery it is meant to
//! check: the closed forms are evaluated directly, the shooting solver
//! integrates Newton's equation with RK4, and [`naive_enumeration`] walks
//! the path tree recursively with its own action and accumulator.

use num_complex::Complex64;

use crate::amplitude::Amplitude;
use crate::error::{Error, Result};
use crate::lattice::{LagrangianSpec, LatticePath, TimeGrid};
use crate::math;
use crate::propagator::PropagatorConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelFamily {
    Free,
    Harmonic { omega: f64 },
    EuclideanFree,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticKernel {
    pub family: KernelFamily,
    pub mass: f64,
    pub hbar: f64,
    pub duration: f64,
}

impl AnalyticKernel {
    pub fn free(mass: f64, hbar: f64, duration: f64) -> Self {
        Self { family: KernelFamily::Free, mass, hbar, duration }
    }

    pub fn harmonic(mass: f64, omega: f64, hbar: f64, duration: f64) -> Self {
        Self { family: KernelFamily::Harmonic { omega }, mass, hbar, duration }
    }

    pub fn euclidean_free(mass: f64, hbar: f64, duration: f64) -> Self {
        Self { family: KernelFamily::EuclideanFree, mass, hbar, duration }
    }
}

/// Closed-form kernel `K(b, a)` over the kernel's duration.
///
/// * free: `sqrt(m/(2πiħT))·e^{i·m(b−a)²/(2ħT)}`
/// * harmonic (Mehler): `sqrt(mω/(2πiħ sin ωT))·e^{i·mω((a²+b²)cos ωT − 2ab)/(2ħ sin ωT)}`
/// * Euclidean free: `sqrt(m/(2πħT))·e^{−m(b−a)²/(2ħT)}`
pub fn analytic_propagator(kernel: &AnalyticKernel, a: f64, b: f64) -> Result<Amplitude> {
    let AnalyticKernel { family, mass, hbar, duration: t } = *kernel;
    if !(mass > 0.0 && hbar > 0.0 && t > 0.0) {
        return Err(Error::InvalidArgument("kernel needs positive mass, hbar and duration"));
    }
    let i = Complex64::new(0.0, 1.0);
    let value = match family {
        KernelFamily::Free => {
            let pref = (Complex64::new(mass, 0.0) / (i * (math::TAU * hbar * t))).sqrt();
            pref * (i * (mass * (b - a) * (b - a) / (2.0 * hbar * t))).exp()
        }
        KernelFamily::Harmonic { omega } => {
            if !(omega > 0.0) {
                return Err(Error::InvalidArgument("harmonic kernel needs omega > 0"));
            }
            let s = math::sin(omega * t);
            if s.abs() < 1e-12 {
                return Err(Error::CausticSingularity);
            }
            let c = math::cos(omega * t);
            let pref = (Complex64::new(mass * omega, 0.0) / (i * (math::TAU * hbar * s))).sqrt();
            let phase = mass * omega * ((a * a + b * b) * c - 2.0 * a * b) / (2.0 * hbar * s);
            pref * (i * phase).exp()
        }
        KernelFamily::EuclideanFree => {
            let pref = math::sqrt(mass / (math::TAU * hbar * t));
            Complex64::new(pref * math::exp(-mass * (b - a) * (b - a) / (2.0 * hbar * t)), 0.0)
        }
    };
    Ok(value.into())
}

const SHOOT_SUBSTEPS: usize = 64;
const SHOOT_TOLERANCE: f64 = 1e-9;

/// RK4 integration of `m·r̈ = −∂V/∂r` over `grid`, sampled on its slices.
fn integrate(lag: &LagrangianSpec, grid: &TimeGrid, a: f64, v0: f64) -> alloc::vec::Vec<f64> {
    let accel = |r: f64, t: f64| -lag.potential_gradient(r, t) / lag.mass();
    let h = grid.epsilon() / SHOOT_SUBSTEPS as f64;
    let mut out = alloc::vec::Vec::with_capacity(grid.steps() + 1);
    let (mut r, mut v) = (a, v0);
    out.push(r);
    for i in 0..grid.steps() {
        let t0 = grid.time(i);
        for s in 0..SHOOT_SUBSTEPS {
            let t = t0 + s as f64 * h;
            let (k1r, k1v) = (v, accel(r, t));
            let (k2r, k2v) = (v + 0.5 * h * k1v, accel(r + 0.5 * h * k1r, t + 0.5 * h));
            let (k3r, k3v) = (v + 0.5 * h * k2v, accel(r + 0.5 * h * k2r, t + 0.5 * h));
            let (k4r, k4v) = (v + h * k3v, accel(r + h * k3r, t + h));
            r += h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
            v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        }
        out.push(r);
    }
    out
}

/// Solves the Euler–Lagrange boundary problem `r(t_a) = a`, `r(t_b) = b` by
/// bisection on the initial velocity until `|r(t_b) − b| ≤ 1e-9`.
pub fn shooting_euler_lagrange(lag: &LagrangianSpec, a: f64, b: f64, grid: &TimeGrid) -> Result<LatticePath> {
    let miss = |v0: f64| {
        let r = integrate(lag, grid, a, v0);
        r[r.len() - 1] - b
    };
    let guess = (b - a) / grid.duration();
    let mut width = 1.0 + guess.abs();
    let (mut lo, mut hi) = (guess - width, guess + width);
    let (mut f_lo, mut f_hi) = (miss(lo), miss(hi));
    let mut expansions = 0;
    while f_lo.signum() == f_hi.signum() {
        expansions += 1;
        if expansions > 60 || !(f_lo.is_finite() && f_hi.is_finite()) {
            return Err(Error::ShootingFailure("no bracket for the initial velocity"));
        }
        width *= 2.0;
        lo = guess - width;
        hi = guess + width;
        f_lo = miss(lo);
        f_hi = miss(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = miss(mid);
        if f_mid.abs() <= SHOOT_TOLERANCE {
            let mut sites = integrate(lag, grid, a, mid);
            let last = sites.len() - 1;
            sites[last] = b;
            return LatticePath::new(sites);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::ShootingFailure("bisection did not reach the endpoint tolerance"))
}

/// Largest path count [`naive_enumeration`] accepts.
pub const NAIVE_LIMIT: f64 = 1e5;

struct Walk<'a> {
    cfg: &'a PropagatorConfig,
    norm: Complex64,
    weights: alloc::vec::Vec<f64>,
    total: Complex64,
}

impl Walk<'_> {
    fn step(&self, slice: usize, x0: f64, x1: f64) -> Complex64 {
        let grid = self.cfg.grid();
        let lag = self.cfg.lagrangian();
        let eps = grid.epsilon();
        let t_mid = grid.t_a() + (slice as f64 - 0.5) * eps;
        let v = lag.potential_at(0.5 * (x0 + x1), t_mid);
        if v == f64::INFINITY {
            return Complex64::new(0.0, 0.0);
        }
        let kinetic = 0.5 * lag.mass() * ((x1 - x0) / eps) * ((x1 - x0) / eps);
        let s = (kinetic - v) * eps;
        self.norm * Complex64::new(0.0, s / self.cfg.hbar()).exp()
    }

    fn descend(&mut self, slice: usize, x_prev: f64, acc: Complex64) {
        let k = self.cfg.grid().steps();
        let space = self.cfg.space();
        if slice == k {
            let end = space.point(self.cfg.b_site());
            self.total += acc * self.step(slice, x_prev, end);
            return;
        }
        for j in 0..space.sites() {
            let x = space.point(j);
            let w = acc * self.step(slice, x_prev, x) * (self.weights[j] * space.dx());
            self.descend(slice + 1, x, w);
        }
    }
}

/// `K(b, a)` by recursive descent over every interior assignment.
pub fn naive_enumeration(cfg: &PropagatorConfig) -> Result<Amplitude> {
    let k = cfg.grid().steps();
    let paths = libm::pow(cfg.space().sites() as f64, (k - 1) as f64);
    if paths > NAIVE_LIMIT {
        return Err(Error::TooLarge { paths, limit: NAIVE_LIMIT });
    }
    let lag = cfg.lagrangian();
    let eps = cfg.grid().epsilon();
    let norm = (Complex64::new(lag.mass(), 0.0) / Complex64::new(0.0, math::TAU * cfg.hbar() * eps)).sqrt();
    let mut walk = Walk { cfg, norm, weights: cfg.site_weights(), total: Complex64::new(0.0, 0.0) };
    walk.descend(1, cfg.space().point(cfg.a_site()), Complex64::new(1.0, 0.0));
    Ok(walk.total.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Potential, SpaceGrid};
    use crate::propagator::propagate_enumerate;

    #[test]
    fn free_kernel_at_coincident_points() {
        let k = analytic_propagator(&AnalyticKernel::free(1.0, 1.0, 1.0), 0.3, 0.3).unwrap();
        assert!((k.modulus() - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert!((k.arg() + core::f64::consts::FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn harmonic_reduces_to_free() {
        let omega = 1e-4;
        for (a, b) in [(0.0, 0.0), (0.2, -0.5), (1.0, 0.4)] {
            let h = analytic_propagator(&AnalyticKernel::harmonic(1.0, omega, 1.0, 1.0), a, b).unwrap();
            let f = analytic_propagator(&AnalyticKernel::free(1.0, 1.0, 1.0), a, b).unwrap();
            assert!((h - f).modulus() < 1e-6, "{a},{b}");
        }
    }

    #[test]
    fn harmonic_caustic_is_rejected() {
        let k = AnalyticKernel::harmonic(1.0, 1.0, 1.0, core::f64::consts::PI);
        assert_eq!(analytic_propagator(&k, 0.0, 0.0), Err(Error::CausticSingularity));
    }

    #[test]
    fn euclidean_peak() {
        let k = analytic_propagator(&AnalyticKernel::euclidean_free(2.0, 0.5, 0.3), 0.1, 0.1).unwrap();
        assert_eq!(k.im, 0.0);
        assert!((k.re - libm::sqrt(2.0 / (core::f64::consts::TAU * 0.5 * 0.3))).abs() < 1e-14);
    }

    #[test]
    fn shooting_free_is_straight() {
        let g = TimeGrid::new(0.0, 2.0, 10).unwrap();
        let p = shooting_euler_lagrange(&LagrangianSpec::free(1.0).unwrap(), -1.0, 3.0, &g).unwrap();
        let line = LatticePath::straight(-1.0, 3.0, 10);
        assert!(p.max_deviation(&line).unwrap() < 1e-9);
    }

    #[test]
    fn shooting_harmonic_zero_path() {
        let g = TimeGrid::new(0.0, 2.0, 16).unwrap();
        let p = shooting_euler_lagrange(&LagrangianSpec::harmonic(1.0, 1.0).unwrap(), 0.0, 0.0, &g).unwrap();
        assert!(p.sites().iter().all(|r| r.abs() < 1e-9));
    }

    #[test]
    fn shooting_linear_matches_kinematics() {
        // m·r̈ = −g: r(t) = a + v0·t − ½·g·t²/m, v0 = (b − a)/T + ½·g·T/m
        let (a, b, g, m, t) = (0.5, -0.25, 3.0, 1.0, 1.5);
        let grid = TimeGrid::new(0.0, t, 12).unwrap();
        let p = shooting_euler_lagrange(&LagrangianSpec::linear(m, g).unwrap(), a, b, &grid).unwrap();
        let v0 = (b - a) / t + 0.5 * g * t / m;
        let exact = LatticePath::from_fn(&grid, |s| a + v0 * s - 0.5 * g * s * s / m);
        assert!(p.max_deviation(&exact).unwrap() < 1e-8);
    }

    fn tiny(k: usize, sites: usize, lag: LagrangianSpec) -> PropagatorConfig {
        PropagatorConfig::new(
            TimeGrid::new(0.0, 0.8, k).unwrap(),
            SpaceGrid::new(-1.0, 1.2, sites).unwrap(),
            lag,
            0.9,
            -0.6,
            0.5,
        )
        .unwrap()
    }

    #[test]
    fn naive_matches_enumeration() {
        let lag = LagrangianSpec::new(1.1, Potential::custom(|r, _| libm::cos(3.0 * r))).unwrap();
        for (k, sites) in [(1, 4), (2, 5), (3, 6), (4, 7)] {
            let c = tiny(k, sites, lag.clone());
            let n = naive_enumeration(&c).unwrap();
            let e = propagate_enumerate(&c).unwrap().value;
            assert!((n - e).modulus() <= 1e-12 * e.modulus(), "k={k} sites={sites}");
        }
    }

    #[test]
    fn naive_single_step() {
        let c = tiny(1, 5, LagrangianSpec::free(1.0).unwrap());
        let (a, b) = (c.a(), c.b());
        let eps = 0.8;
        let norm = (Complex64::new(1.0, 0.0) / Complex64::new(0.0, core::f64::consts::TAU * 0.9 * eps)).sqrt();
        let expected = norm * Complex64::new(0.0, 0.5 * (b - a) * (b - a) / eps / 0.9).exp();
        assert!((Complex64::from(naive_enumeration(&c).unwrap()) - expected).norm() < 1e-14);
    }

    #[test]
    fn naive_guard() {
        let c = tiny(7, 10, LagrangianSpec::free(1.0).unwrap());
        assert!(matches!(naive_enumeration(&c), Err(Error::TooLarge { .. })));
    }
}
