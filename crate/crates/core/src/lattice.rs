//! Time lattice, lattice paths and the discretized action.
//!
//! A path `r_0 … r_k` on a uniform time grid carries the midpoint-rule action
//!
//! ```text
//! S = Σ_{i=1..k} [ ½·m·((r_i − r_{i−1})/ε)² − V((r_i + r_{i−1})/2, t_{i−½}) ]·ε
//! ```
//!
//! and the winding `m = S/h`. The transition ratios between consecutive wave
//! samples telescope, so the probability of a whole sequence only depends on
//! its end moduli.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::amplitude::{born_probability, phase_from_count, unit_phase, Amplitude, WaveSample};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_a: f64,
    t_b: f64,
    k: usize,
}

impl TimeGrid {
    pub fn new(t_a: f64, t_b: f64, k: usize) -> Result<Self> {
        if !(t_a.is_finite() && t_b.is_finite()) || t_b <= t_a {
            return Err(Error::InvalidGrid("time grid needs t_a < t_b"));
        }
        if k == 0 {
            return Err(Error::InvalidGrid("time grid needs at least one step"));
        }
        Ok(Self { t_a, t_b, k })
    }

    pub fn t_a(&self) -> f64 {
        self.t_a
    }

    pub fn t_b(&self) -> f64 {
        self.t_b
    }

    pub fn steps(&self) -> usize {
        self.k
    }

    pub fn duration(&self) -> f64 {
        self.t_b - self.t_a
    }

    pub fn epsilon(&self) -> f64 {
        (self.t_b - self.t_a) / self.k as f64
    }

    /// `t_i`; the last slice is exactly `t_b`.
    pub fn time(&self, i: usize) -> f64 {
        if i >= self.k {
            self.t_b
        } else {
            self.t_a + i as f64 * self.epsilon()
        }
    }

    /// `t_{i−½}` for step `i` in `1..=k`.
    pub fn midpoint_time(&self, i: usize) -> f64 {
        self.t_a + (i as f64 - 0.5) * self.epsilon()
    }

    /// Splits at slice `i`, returning the grids for `[t_a, t_i]` and `[t_i, t_b]`.
    pub fn split_at(&self, i: usize) -> Result<(TimeGrid, TimeGrid)> {
        if i == 0 || i >= self.k {
            return Err(Error::InvalidGrid("split slice must be interior"));
        }
        let t = self.time(i);
        Ok((TimeGrid::new(self.t_a, t, i)?, TimeGrid::new(t, self.t_b, self.k - i)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceGrid {
    lo: f64,
    hi: f64,
    sites: usize,
}

impl SpaceGrid {
    pub fn new(lo: f64, hi: f64, sites: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
            return Err(Error::InvalidGrid("space grid needs lo < hi"));
        }
        if sites < 2 {
            return Err(Error::InvalidGrid("space grid needs at least two sites"));
        }
        Ok(Self { lo, hi, sites })
    }

    pub fn centered(center: f64, half_width: f64, sites: usize) -> Result<Self> {
        Self::new(center - half_width, center + half_width, sites)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dx(&self) -> f64 {
        (self.hi - self.lo) / (self.sites - 1) as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        if j + 1 >= self.sites {
            self.hi
        } else {
            self.lo + j as f64 * self.dx()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.sites).map(|j| self.point(j)).collect()
    }

    /// Nearest site to `x` and the snap distance `|x − x_j|`.
    pub fn nearest(&self, x: f64) -> Result<(usize, f64)> {
        let dx = self.dx();
        if !x.is_finite() || x < self.lo - 0.5 * dx || x > self.hi + 0.5 * dx {
            return Err(Error::InvalidArgument("position lies outside the space grid"));
        }
        let j = crate::math::round((x - self.lo) / dx).clamp(0.0, (self.sites - 1) as f64) as usize;
        Ok((j, (x - self.point(j)).abs()))
    }
}

/// Site sequence `r_0 … r_k` aligned with a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct LatticePath {
    sites: Vec<f64>,
}

impl LatticePath {
    pub fn new(sites: Vec<f64>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::EmptyPath);
        }
        Ok(Self { sites })
    }

    /// Straight line from `a` to `b` in `k` steps.
    pub fn straight(a: f64, b: f64, k: usize) -> Self {
        let sites = (0..=k).map(|i| if i == k { b } else { a + (b - a) * i as f64 / k as f64 }).collect();
        Self { sites }
    }

    /// Samples `r(t)` at every slice of `grid`.
    pub fn from_fn(grid: &TimeGrid, r: impl Fn(f64) -> f64) -> Self {
        Self { sites: (0..=grid.steps()).map(|i| r(grid.time(i))).collect() }
    }

    pub fn sites(&self) -> &[f64] {
        &self.sites
    }

    pub fn sites_mut(&mut self) -> &mut [f64] {
        &mut self.sites
    }

    pub fn into_sites(self) -> Vec<f64> {
        self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn steps(&self) -> usize {
        self.sites.len() - 1
    }

    pub fn start(&self) -> f64 {
        self.sites[0]
    }

    pub fn end(&self) -> f64 {
        self.sites[self.sites.len() - 1]
    }

    /// Concatenates two paths sharing an endpoint.
    pub fn join(&self, next: &LatticePath) -> Result<LatticePath> {
        if self.end() != next.start() {
            return Err(Error::InvalidArgument("paths must share the joining endpoint"));
        }
        let mut sites = self.sites.clone();
        sites.extend_from_slice(&next.sites[1..]);
        Ok(LatticePath { sites })
    }

    pub fn max_deviation(&self, other: &LatticePath) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::GridMismatch { expected: self.len(), found: other.len() });
        }
        Ok(self.sites.iter().zip(&other.sites).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }
}

pub type PotentialFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// Potential energy `V(r, t)`.
#[derive(Clone)]
pub enum Potential {
    Free,
    /// `V = g·r`
    Linear {
        slope: f64,
    },
    /// `V = ½·m·ω²·r²`
    Harmonic {
        omega: f64,
    },
    /// Caller-supplied `V(r, t)`; `+∞` marks an impenetrable region.
    Custom {
        f: Arc<PotentialFn>,
        time_dependent: bool,
    },
}

impl Potential {
    pub fn custom(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Potential::Custom { f: Arc::new(f), time_dependent: false }
    }

    pub fn custom_time_dependent(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Potential::Custom { f: Arc::new(f), time_dependent: true }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Potential::Free => "free",
            Potential::Linear { .. } => "linear",
            Potential::Harmonic { .. } => "harmonic",
            Potential::Custom { .. } => "custom",
        }
    }
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Free => write!(f, "Free"),
            Potential::Linear { slope } => write!(f, "Linear {{ slope: {slope} }}"),
            Potential::Harmonic { omega } => write!(f, "Harmonic {{ omega: {omega} }}"),
            Potential::Custom { time_dependent, .. } => {
                write!(f, "Custom {{ time_dependent: {time_dependent} }}")
            }
        }
    }
}

const FD_FIRST: f64 = 1e-5;
const FD_SECOND: f64 = 1e-4;

/// Mass and potential defining `L = ½·m·ṙ² − V(r, t)`.
#[derive(Debug, Clone)]
pub struct LagrangianSpec {
    mass: f64,
    potential: Potential,
    label: String,
}

impl LagrangianSpec {
    pub fn new(mass: f64, potential: Potential) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidLagrangian("mass must be positive"));
        }
        match potential {
            Potential::Linear { slope } if !slope.is_finite() => {
                return Err(Error::InvalidLagrangian("slope must be finite"))
            }
            Potential::Harmonic { omega } if !(omega.is_finite() && omega >= 0.0) => {
                return Err(Error::InvalidLagrangian("omega must be finite and nonnegative"))
            }
            _ => {}
        }
        let label = String::from(potential.name());
        Ok(Self { mass, potential, label })
    }

    pub fn free(mass: f64) -> Result<Self> {
        Self::new(mass, Potential::Free)
    }

    pub fn harmonic(mass: f64, omega: f64) -> Result<Self> {
        Self::new(mass, Potential::Harmonic { omega })
    }

    pub fn linear(mass: f64, slope: f64) -> Result<Self> {
        Self::new(mass, Potential::Linear { slope })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_free(&self) -> bool {
        matches!(self.potential, Potential::Free)
    }

    pub fn is_time_dependent(&self) -> bool {
        matches!(self.potential, Potential::Custom { time_dependent: true, .. })
    }

    /// `V(r, t)`.
    pub fn potential_at(&self, r: f64, t: f64) -> f64 {
        match &self.potential {
            Potential::Free => 0.0,
            Potential::Linear { slope } => slope * r,
            Potential::Harmonic { omega } => 0.5 * self.mass * omega * omega * r * r,
            Potential::Custom { f, .. } => f(r, t),
        }
    }

    /// `∂V/∂r`; central differences for custom potentials.
    pub fn potential_gradient(&self, r: f64, t: f64) -> f64 {
        match &self.potential {
            Potential::Free => 0.0,
            Potential::Linear { slope } => *slope,
            Potential::Harmonic { omega } => self.mass * omega * omega * r,
            Potential::Custom { f, .. } => {
                let h = FD_FIRST * (1.0 + r.abs());
                (f(r + h, t) - f(r - h, t)) / (2.0 * h)
            }
        }
    }

    /// `∂²V/∂r²`.
    pub fn potential_curvature(&self, r: f64, t: f64) -> f64 {
        match &self.potential {
            Potential::Free | Potential::Linear { .. } => 0.0,
            Potential::Harmonic { omega } => self.mass * omega * omega,
            Potential::Custom { f, .. } => {
                let h = FD_SECOND * (1.0 + r.abs());
                (f(r + h, t) - 2.0 * f(r, t) + f(r - h, t)) / (h * h)
            }
        }
    }

    /// Action of a single step `r0 → r1` of duration `eps` with the potential
    /// evaluated at the spatial midpoint and time `t_mid`.
    pub fn step_action(&self, r0: f64, r1: f64, eps: f64, t_mid: f64) -> f64 {
        let v = (r1 - r0) / eps;
        (0.5 * self.mass * v * v - self.potential_at(0.5 * (r0 + r1), t_mid)) * eps
    }
}

fn check_alignment(path: &LatticePath, grid: &TimeGrid) -> Result<()> {
    if path.len() != grid.steps() + 1 {
        return Err(Error::GridMismatch { expected: grid.steps() + 1, found: path.len() });
    }
    Ok(())
}

/// Midpoint-rule action of `path` on `grid`.
pub fn discretized_action(path: &LatticePath, grid: &TimeGrid, lag: &LagrangianSpec) -> Result<f64> {
    check_alignment(path, grid)?;
    let eps = grid.epsilon();
    let r = path.sites();
    Ok((1..=grid.steps()).map(|i| lag.step_action(r[i - 1], r[i], eps, grid.midpoint_time(i))).sum())
}

/// Winding `m = S/h`.
pub fn winding_of(action: f64, h: f64) -> Result<f64> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::NonpositiveUnit(h));
    }
    Ok(action / h)
}

/// `P(next)/P(prev)`; the phases drop out and only `(A_i/A_{i−1})²` remains.
pub fn transition_ratio(prev: WaveSample, next: WaveSample) -> Result<f64> {
    let p_prev = born_probability(phase_from_count(prev)?);
    let p_next = born_probability(phase_from_count(next)?);
    if p_prev == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(p_next / p_prev)
}

/// Product of the transition ratios along a sample sequence.
pub fn path_probability_product(samples: &[WaveSample]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyPath);
    }
    let mut product = 1.0;
    for pair in samples.windows(2) {
        product *= transition_ratio(pair[0], pair[1])?;
    }
    if samples.len() == 1 {
        // a lone sample still has to be a valid conditioning event
        phase_from_count(samples[0])?;
    }
    Ok(product)
}

/// Amplitude of one path: `modulus_ratio · e^{2πi·m}` with `m = S/h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathAmplitude {
    pub winding: f64,
    pub modulus_ratio: f64,
    pub value: Amplitude,
}

impl PathAmplitude {
    pub fn probability(&self) -> f64 {
        born_probability(self.value)
    }
}

pub fn path_amplitude(
    path: &LatticePath,
    grid: &TimeGrid,
    lag: &LagrangianSpec,
    h: f64,
    modulus_ratio: f64,
) -> Result<PathAmplitude> {
    if modulus_ratio < 0.0 || modulus_ratio.is_nan() {
        return Err(Error::NegativeModulus(modulus_ratio));
    }
    let winding = winding_of(discretized_action(path, grid, lag)?, h)?;
    Ok(PathAmplitude { winding, modulus_ratio, value: unit_phase(winding).scale(modulus_ratio) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::vec;

    fn free(m: f64) -> LagrangianSpec {
        LagrangianSpec::free(m).unwrap()
    }

    #[test]
    fn grid_invariants() {
        let g = TimeGrid::new(0.3, 1.7, 7).unwrap();
        assert!((g.epsilon() * 7.0 - 1.4).abs() <= 1e-12 * 1.4);
        assert_eq!(g.time(7), 1.7);
        assert!(TimeGrid::new(1.0, 1.0, 3).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0).is_err());
        let s = SpaceGrid::new(-1.0, 1.0, 5).unwrap();
        assert_eq!(s.dx(), 0.5);
        assert_eq!(s.points(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(s.nearest(0.3).unwrap().0, 3);
        assert!(s.nearest(2.0).is_err());
        assert!(SpaceGrid::new(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn straight_free_path_action() {
        // closed form ½·m·(b − a)²/T = 0.5 for m = 1, T = 1, b − a = 1
        for k in [1, 2, 5, 17, 100] {
            let g = TimeGrid::new(0.0, 1.0, k).unwrap();
            let s = discretized_action(&LatticePath::straight(0.0, 1.0, k), &g, &free(1.0)).unwrap();
            assert!((s - 0.5).abs() < 1e-12, "k={k} S={s}");
        }
    }

    #[test]
    fn constant_path_has_zero_action() {
        let g = TimeGrid::new(0.0, 2.0, 9).unwrap();
        let p = LatticePath::new(vec![0.7; 10]).unwrap();
        assert_eq!(discretized_action(&p, &g, &free(3.0)).unwrap(), 0.0);
    }

    #[test]
    fn single_step_hand_value() {
        // ½·2·(1/0.5)²·0.5 = 2
        let g = TimeGrid::new(0.0, 0.5, 1).unwrap();
        let p = LatticePath::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(discretized_action(&p, &g, &free(2.0)).unwrap(), 2.0);
    }

    #[test]
    fn misaligned_path_is_rejected() {
        let g = TimeGrid::new(0.0, 1.0, 4).unwrap();
        let p = LatticePath::straight(0.0, 1.0, 3);
        assert_eq!(discretized_action(&p, &g, &free(1.0)), Err(Error::GridMismatch { expected: 5, found: 4 }));
    }

    #[test]
    fn winding_examples() {
        assert_eq!(winding_of(0.0, 3.0).unwrap(), 0.0);
        assert_eq!(winding_of(core::f64::consts::TAU, core::f64::consts::TAU).unwrap(), 1.0);
        assert_eq!(winding_of(0.5, 0.25).unwrap(), 2.0);
        assert_eq!(winding_of(1.0, 0.0), Err(Error::NonpositiveUnit(0.0)));
        assert!(winding_of(1.0, -1.0).is_err());
    }

    #[test]
    fn transition_ratio_examples() {
        let r = transition_ratio(WaveSample::new(1.0, 0.0), WaveSample::new(1.0, 0.37)).unwrap();
        assert!((r - 1.0).abs() < 1e-15);
        assert_eq!(transition_ratio(WaveSample::new(2.0, 0.0), WaveSample::new(1.0, 0.0)).unwrap(), 0.25);
        assert_eq!(transition_ratio(WaveSample::new(0.0, 0.3), WaveSample::new(1.0, 0.0)), Err(Error::ZeroDenominator));
    }

    #[test]
    fn product_examples() {
        let s = [WaveSample::new(1.0, 0.1), WaveSample::new(2.0, 5.3), WaveSample::new(4.0, -0.7)];
        assert!((path_probability_product(&s).unwrap() - 16.0).abs() < 1e-12);
        let flat: Vec<WaveSample> = (0..20).map(|i| WaveSample::new(0.3, i as f64 * 0.17)).collect();
        assert!((path_probability_product(&flat).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(path_probability_product(&[]), Err(Error::EmptyPath));
        let with_zero = [WaveSample::new(1.0, 0.0), WaveSample::new(0.0, 0.0), WaveSample::new(1.0, 0.0)];
        assert_eq!(path_probability_product(&with_zero), Err(Error::ZeroDenominator));
    }

    #[test]
    fn path_amplitude_examples() {
        let g = TimeGrid::new(0.0, 1.0, 8).unwrap();
        let straight = LatticePath::straight(0.0, 1.0, 8);
        // S = 0.5, h = 0.5 → m = 1
        let pa = path_amplitude(&straight, &g, &free(1.0), 0.5, 1.0).unwrap();
        assert!((pa.winding - 1.0).abs() < 1e-12);
        assert!((pa.value.re - 1.0).abs() < 1e-10 && pa.value.im.abs() < 1e-10);

        let still = LatticePath::new(vec![0.2; 9]).unwrap();
        let z = path_amplitude(&still, &g, &free(1.0), 0.37, 0.8).unwrap();
        assert_eq!(z.value, Amplitude::new(0.8, 0.0));

        // S = h/2 → half turn
        let half = path_amplitude(&straight, &g, &free(1.0), 1.0, 0.6).unwrap();
        assert_eq!(half.value, Amplitude::new(-0.6, 0.0));
        assert!((half.probability() - 0.36).abs() < 1e-15);
    }

    #[test]
    fn action_converges_at_second_order() {
        // r(t) = sin(2t) on [0, 1] in V = ½r² (m = 1, ω = 1):
        // S = ∫ 2cos²(2t) − ½ sin²(2t) dt = 2·(½ + sin4/8) − ½·(½ − sin4/8)
        let lag = LagrangianSpec::harmonic(1.0, 1.0).unwrap();
        let s4 = libm::sin(4.0);
        let exact = 2.0 * (0.5 + s4 / 8.0) - 0.5 * (0.5 - s4 / 8.0);
        let err = |k: usize| {
            let g = TimeGrid::new(0.0, 1.0, k).unwrap();
            let p = LatticePath::from_fn(&g, |t| libm::sin(2.0 * t));
            (discretized_action(&p, &g, &lag).unwrap() - exact).abs()
        };
        let mut prev = err(8);
        for k in [16, 32, 64, 128] {
            let e = err(k);
            assert!(prev / e >= 3.5, "k={k}: {prev} -> {e}");
            prev = e;
        }
    }

    proptest! {
        #[test]
        fn telescoping(mods in proptest::collection::vec(0.01f64..100.0, 2..60),
                       windings in proptest::collection::vec(-10.0f64..10.0, 60)) {
            let samples: Vec<WaveSample> = mods.iter().zip(&windings).map(|(&a, &n)| WaveSample::new(a, n)).collect();
            let p = path_probability_product(&samples).unwrap();
            let expected = (mods[mods.len() - 1] / mods[0]).powi(2);
            prop_assert!((p - expected).abs() <= 1e-10 * expected);
        }

        #[test]
        fn product_ignores_windings(mods in proptest::collection::vec(0.1f64..10.0, 2..30),
                                    shift in proptest::collection::vec(-5.0f64..5.0, 30)) {
            let a: Vec<WaveSample> = mods.iter().map(|&m| WaveSample::new(m, 0.0)).collect();
            let b: Vec<WaveSample> = mods.iter().zip(&shift).map(|(&m, &s)| WaveSample::new(m, s)).collect();
            let pa = path_probability_product(&a).unwrap();
            let pb = path_probability_product(&b).unwrap();
            prop_assert!((pa - pb).abs() <= 1e-12 * pa);
        }

        #[test]
        fn winding_is_additive(first in proptest::collection::vec(-2.0f64..2.0, 2..10),
                               second in proptest::collection::vec(-2.0f64..2.0, 1..10),
                               h in 0.1f64..3.0, omega in 0.0f64..2.0) {
            let lag = LagrangianSpec::harmonic(1.3, omega).unwrap();
            let eps = 0.1;
            let p1 = LatticePath::new(first.clone()).unwrap();
            let mut tail = vec![p1.end()];
            tail.extend_from_slice(&second);
            let p2 = LatticePath::new(tail).unwrap();
            let k1 = p1.steps();
            let k2 = p2.steps();
            let g1 = TimeGrid::new(0.0, eps * k1 as f64, k1).unwrap();
            let g2 = TimeGrid::new(eps * k1 as f64, eps * (k1 + k2) as f64, k2).unwrap();
            let g = TimeGrid::new(0.0, eps * (k1 + k2) as f64, k1 + k2).unwrap();
            let joined = p1.join(&p2).unwrap();
            let m = winding_of(discretized_action(&joined, &g, &lag).unwrap(), h).unwrap();
            let m1 = winding_of(discretized_action(&p1, &g1, &lag).unwrap(), h).unwrap();
            let m2 = winding_of(discretized_action(&p2, &g2, &lag).unwrap(), h).unwrap();
            prop_assert!((m - (m1 + m2)).abs() <= 1e-12 * (1.0 + m.abs()));
        }
    }
}
