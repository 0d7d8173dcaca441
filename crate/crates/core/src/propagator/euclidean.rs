use alloc::vec::Vec;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Method, PropagatorConfig, PropagatorResult};
use crate::amplitude::Amplitude;
use crate::error::{Error, Result};
use crate::math;

/// Samples per random stream. Block `i` always draws from ChaCha stream `i`,
/// so the estimate does not depend on how blocks are distributed.
pub const MC_BLOCK: usize = 1024;
pub const MC_MIN_SAMPLES: usize = 100;

/// How interior imaginary-time paths are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EuclideanScheme {
    /// Brownian motion released from `a`; the final leg into `b` is
    /// integrated exactly with the one-step heat kernel.
    #[default]
    OpenWalk,
    /// Brownian bridge pinned at `a` and `b`; the free kernel factors out
    /// and only `e^{−∫V/ħ}` is averaged.
    Bridge,
}

/// Running mean and squared-deviation sum (Chan/Welford merge).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct McStats {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl McStats {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(self, other: McStats) -> McStats {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let n = self.count + other.count;
        let d = other.mean - self.mean;
        let mean = self.mean + d * other.count as f64 / n as f64;
        let m2 = self.m2 + other.m2 + d * d * (self.count as f64 * other.count as f64) / n as f64;
        McStats { count: n, mean, m2 }
    }

    pub fn stderr(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        math::sqrt(self.m2 / (n - 1.0) / n)
    }
}

fn check_bounded_below(cfg: &PropagatorConfig) -> Result<()> {
    let lag = cfg.lagrangian();
    let grid = cfg.grid();
    for j in 0..cfg.space().sites() {
        let x = cfg.space().point(j);
        for step in 1..=grid.steps() {
            let v = lag.potential_at(x, grid.midpoint_time(step));
            if v.is_nan() || v == f64::NEG_INFINITY {
                return Err(Error::UnboundedPotential);
            }
            if !lag.is_time_dependent() {
                break;
            }
        }
    }
    Ok(())
}

/// Euclidean free kernel `sqrt(m/(2πħτ))·e^{−m·d²/(2ħτ)}`.
fn heat_kernel(mass: f64, hbar: f64, tau: f64, d: f64) -> f64 {
    math::sqrt(mass / (math::TAU * hbar * tau)) * math::exp(-mass * d * d / (2.0 * hbar * tau))
}

/// Statistics of `count` weights from stream `block` of `seed`.
pub fn euclidean_block(
    cfg: &PropagatorConfig,
    scheme: EuclideanScheme,
    seed: u64,
    block: u64,
    count: usize,
) -> Result<McStats> {
    let lag = cfg.lagrangian();
    let grid = cfg.grid();
    let (a, b) = (cfg.a(), cfg.b());
    let (m, hbar, eps, k) = (lag.mass(), cfg.hbar(), grid.epsilon(), grid.steps());
    let total = grid.duration();
    let sigma = math::sqrt(hbar * eps / m);
    let bridge_norm = heat_kernel(m, hbar, total, b - a);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    let mut stats = McStats::default();
    for _ in 0..count {
        let mut r = a;
        let mut potential = 0.0;
        for step in 1..k {
            let z: f64 = StandardNormal.sample(&mut rng);
            let next = match scheme {
                EuclideanScheme::OpenWalk => r + sigma * z,
                EuclideanScheme::Bridge => {
                    let remaining = total - (step - 1) as f64 * eps;
                    let mean = r + (b - r) * eps / remaining;
                    let var = hbar / m * eps * (remaining - eps) / remaining;
                    mean + math::sqrt(var.max(0.0)) * z
                }
            };
            potential += lag.potential_at(0.5 * (r + next), grid.midpoint_time(step));
            r = next;
        }
        potential += lag.potential_at(0.5 * (r + b), grid.midpoint_time(k));
        if potential.is_nan() || potential == f64::NEG_INFINITY {
            return Err(Error::UnboundedPotential);
        }
        let damping = math::exp(-eps * potential / hbar);
        let w = match scheme {
            EuclideanScheme::OpenWalk => heat_kernel(m, hbar, eps, b - r) * damping,
            EuclideanScheme::Bridge => bridge_norm * damping,
        };
        stats.push(w);
    }
    Ok(stats)
}

/// Wraps merged block statistics into a result.
pub fn finish_euclidean(cfg: &PropagatorConfig, stats: McStats) -> PropagatorResult {
    let eps = cfg.grid().epsilon();
    let norm = math::sqrt(cfg.lagrangian().mass() / (math::TAU * cfg.hbar() * eps));
    PropagatorResult {
        value: Amplitude::new(stats.mean, 0.0),
        method: Method::MonteCarlo,
        k: cfg.grid().steps(),
        sites: cfg.space().sites(),
        norm_per_step: Complex64::new(norm, 0.0).into(),
        stderr: Some(stats.stderr()),
        snap_distances: cfg.snap_distances(),
    }
}

/// Splits `samples` into [`MC_BLOCK`]-sized blocks: `(block index, count)`.
pub(crate) fn blocks(samples: usize) -> Vec<(u64, usize)> {
    let mut out = Vec::new();
    let mut left = samples;
    let mut i = 0;
    while left > 0 {
        let c = left.min(MC_BLOCK);
        out.push((i, c));
        left -= c;
        i += 1;
    }
    out
}

/// Rejects sample counts below [`MC_MIN_SAMPLES`] and potentials unbounded
/// below on the grid.
pub fn check_monte_carlo(cfg: &PropagatorConfig, samples: usize) -> Result<()> {
    if samples < MC_MIN_SAMPLES {
        return Err(Error::InvalidArgument("Monte Carlo needs at least 100 samples"));
    }
    check_bounded_below(cfg)
}

/// Imaginary-time kernel `∫ e^{−S_E/ħ} Dr` estimated from `samples` paths.
pub fn propagate_monte_carlo_euclidean(cfg: &PropagatorConfig, samples: usize, seed: u64) -> Result<PropagatorResult> {
    propagate_monte_carlo_euclidean_with(cfg, samples, seed, EuclideanScheme::OpenWalk)
}

pub fn propagate_monte_carlo_euclidean_with(
    cfg: &PropagatorConfig,
    samples: usize,
    seed: u64,
    scheme: EuclideanScheme,
) -> Result<PropagatorResult> {
    check_monte_carlo(cfg, samples)?;
    let mut stats = McStats::default();
    for (block, count) in blocks(samples) {
        stats = stats.merge(euclidean_block(cfg, scheme, seed, block, count)?);
    }
    Ok(finish_euclidean(cfg, stats))
}

/// Block layout for `samples`, exposed for parallel drivers.
pub fn monte_carlo_blocks(samples: usize) -> Vec<(u64, usize)> {
    blocks(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{LagrangianSpec, Potential, SpaceGrid, TimeGrid};

    fn cfg(t: f64, k: usize, lag: LagrangianSpec, a: f64, b: f64) -> PropagatorConfig {
        PropagatorConfig::new(
            TimeGrid::new(0.0, t, k).unwrap(),
            SpaceGrid::new(-4.0, 4.0, 161).unwrap(),
            lag,
            1.0,
            a,
            b,
        )
        .unwrap()
    }

    #[test]
    fn stats_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| libm::sin(i as f64)).collect();
        let mut whole = McStats::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut left = McStats::default();
        let mut right = McStats::default();
        xs[..300].iter().for_each(|&x| left.push(x));
        xs[300..].iter().for_each(|&x| right.push(x));
        let merged = left.merge(right);
        assert_eq!(merged.count, 1000);
        assert!((merged.mean - whole.mean).abs() < 1e-15);
        assert!((merged.m2 - whole.m2).abs() < 1e-10);
    }

    #[test]
    fn free_estimate_is_reproducible() {
        let c = cfg(1.0, 16, LagrangianSpec::free(1.0).unwrap(), 0.0, 0.5);
        let a = propagate_monte_carlo_euclidean(&c, 5000, 99).unwrap();
        let b = propagate_monte_carlo_euclidean(&c, 5000, 99).unwrap();
        assert_eq!(a.value.re.to_bits(), b.value.re.to_bits());
        assert_eq!(a.stderr.unwrap().to_bits(), b.stderr.unwrap().to_bits());
        assert_eq!(a.method, Method::MonteCarlo);
    }

    #[test]
    fn free_bridge_has_no_variance() {
        let c = cfg(1.0, 16, LagrangianSpec::free(1.0).unwrap(), 0.0, 0.5);
        let r = propagate_monte_carlo_euclidean_with(&c, 500, 1, EuclideanScheme::Bridge).unwrap();
        let exact = heat_kernel(1.0, 1.0, 1.0, 0.5);
        assert!((r.value.re - exact).abs() < 1e-14 * exact);
        assert!(r.stderr.unwrap() < 1e-14 * exact);
    }

    #[test]
    fn harmonic_bridge_matches_euclidean_mehler() {
        // sqrt(mω/(2πħ sinh ωT))·exp(−mω((a² + b²)cosh ωT − 2ab)/(2ħ sinh ωT))
        let (a, b, t) = (0.2, -0.4, 1.0);
        let c = cfg(t, 64, LagrangianSpec::harmonic(1.0, 1.0).unwrap(), a, b);
        let (sh, ch) = (libm::sinh(t), libm::cosh(t));
        let exact = libm::sqrt(1.0 / (core::f64::consts::TAU * sh))
            * libm::exp(-((a * a + b * b) * ch - 2.0 * a * b) / (2.0 * sh));
        let r = propagate_monte_carlo_euclidean_with(&c, 20_000, 3, EuclideanScheme::Bridge).unwrap();
        let err = (r.value.re - exact).abs();
        assert!(err <= 4.0 * r.stderr.unwrap() + 2e-3 * exact, "est {} exact {exact}", r.value.re);
    }

    #[test]
    fn unbounded_potential_rejected() {
        let lag =
            LagrangianSpec::new(1.0, Potential::custom(|r, _| if r < -3.0 { f64::NEG_INFINITY } else { 0.0 })).unwrap();
        let c = cfg(1.0, 4, lag, 0.0, 0.0);
        assert_eq!(propagate_monte_carlo_euclidean(&c, 1000, 0), Err(Error::UnboundedPotential));
        let free = cfg(1.0, 4, LagrangianSpec::free(1.0).unwrap(), 0.0, 0.0);
        assert!(propagate_monte_carlo_euclidean(&free, 10, 0).is_err());
    }

    #[test]
    fn blocks_cover_samples() {
        let b = blocks(2500);
        assert_eq!(b, alloc::vec![(0, 1024), (1, 1024), (2, 452)]);
    }
}
