//! Propagator `K(b, a)` as a sum over lattice paths.
//!
//! Every path from `a` to `b` contributes `norm^k · e^{iS/ħ}` with
//! `norm = sqrt(m/(2πiħε))` per step and `dx` per interior slice. The same
//! sum is evaluated three ways: by enumerating every interior assignment,
//! by sweeping a one-step transfer matrix, and (after Wick rotation) by
//! Monte Carlo over Brownian paths.

mod enumerate;
mod euclidean;
mod transfer;

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::amplitude::Amplitude;
use crate::error::{Error, Result};
use crate::lattice::{LagrangianSpec, SpaceGrid, TimeGrid};
use crate::math;

pub use enumerate::{
    assemble_enumeration, enumerate_chunk, enumeration_chunks, enumeration_paths, propagate_enumerate,
    ENUMERATION_CHUNK, ENUMERATION_LIMIT,
};
pub use euclidean::{
    check_monte_carlo, euclidean_block, finish_euclidean, monte_carlo_blocks, propagate_monte_carlo_euclidean,
    propagate_monte_carlo_euclidean_with, EuclideanScheme, McStats, MC_BLOCK, MC_MIN_SAMPLES,
};
pub use transfer::{
    compose, compose_field, kernel_from, kernel_to, propagate_transfer_matrix, KernelField, RowExecutor, Sequential,
    SliceMask, StepKernel, TransferEngine,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Enumeration,
    TransferMatrix,
    MonteCarlo,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Enumeration => "enumeration",
            Method::TransferMatrix => "transfer_matrix",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

/// Measure weight applied to interior time slices.
///
/// `HardWall` keeps every site at weight 1 and nothing outside the grid.
/// `Tapered` rolls the weight smoothly (C∞) from 1 at `inner_fraction` of
/// the half-width down to 0 at the grid edge, which removes the edge
/// contributions a sharp cutoff leaves in an oscillatory sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    HardWall,
    Tapered { inner_fraction: f64 },
}

impl Boundary {
    fn validate(self) -> Result<()> {
        match self {
            Boundary::HardWall => Ok(()),
            Boundary::Tapered { inner_fraction } if (0.0..1.0).contains(&inner_fraction) => Ok(()),
            Boundary::Tapered { .. } => Err(Error::InvalidArgument("taper inner fraction must lie in [0, 1)")),
        }
    }

    pub fn weights(self, space: &SpaceGrid) -> Vec<f64> {
        match self {
            Boundary::HardWall => alloc::vec![1.0; space.sites()],
            Boundary::Tapered { inner_fraction } if inner_fraction >= 1.0 => alloc::vec![1.0; space.sites()],
            Boundary::Tapered { inner_fraction } => {
                let center = 0.5 * (space.lo() + space.hi());
                let half = 0.5 * (space.hi() - space.lo());
                let ramp = half * (1.0 - inner_fraction);
                (0..space.sites()).map(|j| smooth_step((half - (space.point(j) - center).abs()) / ramp)).collect()
            }
        }
    }
}

/// C∞ step from 0 (u ≤ 0) to 1 (u ≥ 1).
fn smooth_step(u: f64) -> f64 {
    fn bump(u: f64) -> f64 {
        if u <= 0.0 {
            0.0
        } else {
            math::exp(-1.0 / u)
        }
    }
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let (p, q) = (bump(u), bump(1.0 - u));
        p / (p + q)
    }
}

/// Everything needed to evaluate `K(b, a)` on a lattice.
///
/// Endpoints are snapped to the nearest site of the space grid.
#[derive(Debug, Clone)]
pub struct PropagatorConfig {
    grid: TimeGrid,
    space: SpaceGrid,
    lag: LagrangianSpec,
    hbar: f64,
    a_site: usize,
    b_site: usize,
    a_snap: f64,
    b_snap: f64,
    boundary: Boundary,
}

impl PropagatorConfig {
    pub fn new(grid: TimeGrid, space: SpaceGrid, lag: LagrangianSpec, hbar: f64, a: f64, b: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::NonpositiveUnit(hbar));
        }
        let (a_site, a_snap) = space.nearest(a)?;
        let (b_site, b_snap) = space.nearest(b)?;
        Ok(Self { grid, space, lag, hbar, a_site, b_site, a_snap, b_snap, boundary: Boundary::HardWall })
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Result<Self> {
        boundary.validate()?;
        self.boundary = boundary;
        Ok(self)
    }

    pub fn with_hbar(&self, hbar: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::NonpositiveUnit(hbar));
        }
        Ok(Self { hbar, ..self.clone() })
    }

    pub fn with_endpoint_sites(&self, a_site: usize, b_site: usize) -> Result<Self> {
        let n = self.space.sites();
        if a_site >= n || b_site >= n {
            return Err(Error::InvalidArgument("endpoint site outside the grid"));
        }
        Ok(Self { a_site, b_site, a_snap: 0.0, b_snap: 0.0, ..self.clone() })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn space(&self) -> &SpaceGrid {
        &self.space
    }

    pub fn lagrangian(&self) -> &LagrangianSpec {
        &self.lag
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn a_site(&self) -> usize {
        self.a_site
    }

    pub fn b_site(&self) -> usize {
        self.b_site
    }

    /// Snapped start position.
    pub fn a(&self) -> f64 {
        self.space.point(self.a_site)
    }

    /// Snapped end position.
    pub fn b(&self) -> f64 {
        self.space.point(self.b_site)
    }

    /// Distances moved by snapping `(a, b)` onto the grid.
    pub fn snap_distances(&self) -> (f64, f64) {
        (self.a_snap, self.b_snap)
    }

    /// `sqrt(m/(2πiħε))`, principal branch.
    pub fn norm_per_step(&self) -> Complex64 {
        let denom = Complex64::new(0.0, math::TAU * self.hbar * self.grid.epsilon());
        (Complex64::new(self.lag.mass(), 0.0) / denom).sqrt()
    }

    pub fn site_weights(&self) -> Vec<f64> {
        self.boundary.weights(&self.space)
    }

    /// Amplitude of step `step` (1-based) from site `from` to site `to`,
    /// without the `dx` measure: `norm · e^{iS_step/ħ}`.
    ///
    /// Positions are taken from site indices so every evaluator sees the
    /// same displacement. An infinite potential gives weight zero.
    pub fn step_weight(&self, step: usize, from: usize, to: usize, phase_free: bool) -> Result<Complex64> {
        let norm = self.norm_per_step();
        let phase = self.step_phase(step, from, to, phase_free)?;
        Ok(norm * phase)
    }

    pub(crate) fn step_phase(&self, step: usize, from: usize, to: usize, phase_free: bool) -> Result<Complex64> {
        let dx = self.space.dx();
        let eps = self.grid.epsilon();
        let disp = (to as f64 - from as f64) * dx;
        let mid = self.space.lo() + 0.5 * (from + to) as f64 * dx;
        let v = self.lag.potential_at(mid, self.grid.midpoint_time(step));
        if v == f64::INFINITY {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if !v.is_finite() {
            return Err(Error::UnboundedPotential);
        }
        if phase_free {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let vel = disp / eps;
        let s = (0.5 * self.lag.mass() * vel * vel - v) * eps;
        let (sn, cs) = math::sin_cos(s / self.hbar);
        Ok(Complex64::new(cs, sn))
    }
}

/// Kernel value plus the metadata needed to reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorResult {
    pub value: Amplitude,
    pub method: Method,
    pub k: usize,
    pub sites: usize,
    pub norm_per_step: Amplitude,
    /// Standard error; only Monte Carlo results carry one.
    pub stderr: Option<f64>,
    pub snap_distances: (f64, f64),
}

impl PropagatorResult {
    /// `P(b, a) = |K(b, a)|²`.
    pub fn probability(&self) -> f64 {
        self.value.born_probability()
    }
}

/// Grid construction rule for converged real-time kernels.
///
/// The grid is centred on `(a + b)/2` with half-width
/// `|b − a|/2 + half_width_factor·sqrt(ħT/m)`. The spacing keeps the largest
/// one-step phase gradient on the grid, `m·(2·half_width)/(ħε)`, below the
/// Nyquist limit `π/dx` (divided by `alias_margin`), and is adjusted so that
/// both endpoints land exactly on sites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRecipe {
    pub k: usize,
    pub half_width_factor: f64,
    pub taper_fraction: f64,
    pub alias_margin: f64,
    pub max_sites: usize,
}

impl ConvergenceRecipe {
    pub const STANDARD: ConvergenceRecipe =
        ConvergenceRecipe { k: 32, half_width_factor: 8.0, taper_fraction: 0.5, alias_margin: 1.0, max_sites: 20_001 };

    pub fn space_grid(&self, mass: f64, hbar: f64, duration: f64, a: f64, b: f64) -> Result<SpaceGrid> {
        if !(mass > 0.0 && hbar > 0.0 && duration > 0.0) {
            return Err(Error::InvalidArgument("recipe needs positive mass, hbar and duration"));
        }
        if !(self.half_width_factor > 0.0 && self.alias_margin > 0.0) || self.k == 0 {
            return Err(Error::InvalidArgument("recipe constants must be positive"));
        }
        let center = 0.5 * (a + b);
        let reach = 0.5 * (b - a).abs();
        let half_width = reach + self.half_width_factor * math::sqrt(hbar * duration / mass);
        let eps = duration / self.k as f64;
        let dx_max = math::PI * hbar * eps / (mass * 2.0 * half_width * self.alias_margin);
        let dx = if reach > 0.0 {
            let n = libm::ceil(reach / dx_max);
            reach / n
        } else {
            dx_max
        };
        let half_sites = libm::ceil(half_width / dx - 1e-9);
        let sites = 2.0 * half_sites + 1.0;
        if sites > self.max_sites as f64 {
            return Err(Error::TooLarge { paths: sites, limit: self.max_sites as f64 });
        }
        SpaceGrid::centered(center, half_sites * dx, sites as usize)
    }

    pub fn config(
        &self,
        lag: LagrangianSpec,
        hbar: f64,
        t_a: f64,
        t_b: f64,
        a: f64,
        b: f64,
    ) -> Result<PropagatorConfig> {
        let grid = TimeGrid::new(t_a, t_b, self.k)?;
        let space = self.space_grid(lag.mass(), hbar, t_b - t_a, a, b)?;
        PropagatorConfig::new(grid, space, lag, hbar, a, b)?
            .with_boundary(Boundary::Tapered { inner_fraction: self.taper_fraction })
    }
}
