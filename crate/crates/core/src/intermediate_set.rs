//! Points with a countable coordinate and a randomly realized continuous image.
//!
//! A point starts out with only its countable coordinate `n`. Mapping it onto
//! the reals draws an image `r` from a [`MappingDistribution`]; the draw is a
//! pure function of the point, the distribution and the seed. Points sharing
//! `floor(n)` belong to the same [`UnitSet`].

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntermediatePoint {
    n: f64,
    image: Option<f64>,
    realized_at: Option<f64>,
}

impl IntermediatePoint {
    pub fn new(n: f64) -> Result<Self> {
        if !n.is_finite() {
            return Err(Error::InvalidArgument("countable coordinate must be finite"));
        }
        Ok(Self { n, image: None, realized_at: None })
    }

    /// Tags the point with the event-ordering parameter of its next mapping.
    pub fn at_time(mut self, t: f64) -> Result<Self> {
        if self.image.is_some() {
            return Err(Error::AlreadyRealized);
        }
        if !t.is_finite() {
            return Err(Error::InvalidArgument("realization time must be finite"));
        }
        self.realized_at = Some(t);
        Ok(self)
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn image(&self) -> Option<f64> {
        self.image
    }

    pub fn realized_at(&self) -> Option<f64> {
        self.realized_at
    }

    pub fn is_realized(&self) -> bool {
        self.image.is_some()
    }

    pub fn unit_set(&self) -> i64 {
        unit_set_of(self)
    }
}

/// Index of the unit set holding `point`: `floor(n)`, so `-0.5` maps to `-1`.
pub fn unit_set_of(point: &IntermediatePoint) -> i64 {
    math::floor(point.n) as i64
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitSet {
    index: i64,
    members: Vec<IntermediatePoint>,
}

impl UnitSet {
    pub fn new(index: i64) -> Self {
        Self { index, members: Vec::new() }
    }

    pub fn index(&self) -> i64 {
        self.index
    }

    pub fn members(&self) -> &[IntermediatePoint] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn insert(&mut self, point: IntermediatePoint) -> Result<()> {
        if unit_set_of(&point) != self.index {
            return Err(Error::InvalidArgument("point belongs to a different unit set"));
        }
        self.members.push(point);
        Ok(())
    }
}

/// Groups a population into unit sets, ordered by index.
pub fn partition_into_unit_sets(points: &[IntermediatePoint]) -> Vec<UnitSet> {
    let mut sets: BTreeMap<i64, UnitSet> = BTreeMap::new();
    for p in points {
        let idx = unit_set_of(p);
        sets.entry(idx).or_insert_with(|| UnitSet::new(idx)).members.push(*p);
    }
    sets.into_values().collect()
}

const DENSITY_PANELS: usize = 4096;
const DENSITY_TOLERANCE: f64 = 1e-9;

/// Tabulated density on `[lo, hi]` with its cumulative distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityTable {
    lo: f64,
    hi: f64,
    values: Vec<f64>,
    cdf: Vec<f64>,
}

impl DensityTable {
    /// Samples `density` on a uniform grid of 4096 panels and checks that it
    /// is nonnegative and integrates to 1 within 1e-9 (composite Simpson).
    pub fn from_fn(lo: f64, hi: f64, density: impl Fn(f64) -> f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::InvalidDistribution("support must be a finite interval with lo < hi"));
        }
        let h = (hi - lo) / DENSITY_PANELS as f64;
        let nodes = 2 * DENSITY_PANELS + 1;
        let mut values = Vec::with_capacity(nodes);
        for i in 0..nodes {
            let x = lo + 0.5 * h * i as f64;
            let v = density(x);
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidDistribution("density must be finite and nonnegative"));
            }
            values.push(v);
        }
        let mut cdf = Vec::with_capacity(DENSITY_PANELS + 1);
        cdf.push(0.0);
        let mut acc = 0.0;
        for p in 0..DENSITY_PANELS {
            let (f0, fm, f1) = (values[2 * p], values[2 * p + 1], values[2 * p + 2]);
            acc += h * (f0 + 4.0 * fm + f1) / 6.0;
            cdf.push(acc);
        }
        if (acc - 1.0).abs() > DENSITY_TOLERANCE {
            return Err(Error::InvalidDistribution("density does not integrate to 1"));
        }
        Ok(Self { lo, hi, values, cdf })
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn total_mass(&self) -> f64 {
        self.cdf[DENSITY_PANELS]
    }

    pub fn cdf(&self, r: f64) -> f64 {
        if r <= self.lo {
            return 0.0;
        }
        if r >= self.hi {
            return 1.0;
        }
        let h = (self.hi - self.lo) / DENSITY_PANELS as f64;
        let pos = (r - self.lo) / h;
        let p = (pos as usize).min(DENSITY_PANELS - 1);
        let frac = pos - p as f64;
        // linear within a panel
        (self.cdf[p] + frac * (self.cdf[p + 1] - self.cdf[p])) / self.total_mass()
    }

    fn quantile(&self, u: f64) -> f64 {
        let target = u * self.total_mass();
        let p = match self.cdf.binary_search_by(|c| c.total_cmp(&target)) {
            Ok(i) => i.min(DENSITY_PANELS - 1),
            Err(i) => i.saturating_sub(1).min(DENSITY_PANELS - 1),
        };
        let h = (self.hi - self.lo) / DENSITY_PANELS as f64;
        let width = self.cdf[p + 1] - self.cdf[p];
        let frac = if width > 0.0 { ((target - self.cdf[p]) / width).clamp(0.0, 1.0) } else { 0.0 };
        self.lo + h * (p as f64 + frac)
    }

    pub fn density_at_nodes(&self) -> &[f64] {
        &self.values
    }
}

/// Distribution of the continuous image of a point.
#[derive(Debug, Clone, PartialEq)]
pub enum MappingDistribution {
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// All mass at one position.
    Degenerate {
        at: f64,
    },
    Tabulated(DensityTable),
}

impl MappingDistribution {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        let d = MappingDistribution::Uniform { lo, hi };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            MappingDistribution::Uniform { lo, hi } => {
                if lo.is_finite() && hi.is_finite() && hi > lo {
                    Ok(())
                } else {
                    Err(Error::InvalidDistribution("uniform support must satisfy lo < hi"))
                }
            }
            MappingDistribution::Degenerate { at } => {
                if at.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidDistribution("degenerate position must be finite"))
                }
            }
            MappingDistribution::Tabulated(ref t) => {
                if (t.total_mass() - 1.0).abs() <= DENSITY_TOLERANCE {
                    Ok(())
                } else {
                    Err(Error::InvalidDistribution("density does not integrate to 1"))
                }
            }
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match *self {
            MappingDistribution::Uniform { lo, hi } => (lo, hi),
            MappingDistribution::Degenerate { at } => (at, at),
            MappingDistribution::Tabulated(ref t) => t.support(),
        }
    }

    pub fn cdf(&self, r: f64) -> f64 {
        match *self {
            MappingDistribution::Uniform { lo, hi } => ((r - lo) / (hi - lo)).clamp(0.0, 1.0),
            MappingDistribution::Degenerate { at } => {
                if r >= at {
                    1.0
                } else {
                    0.0
                }
            }
            MappingDistribution::Tabulated(ref t) => t.cdf(r),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            MappingDistribution::Uniform { lo, hi } => 0.5 * (lo + hi),
            MappingDistribution::Degenerate { at } => at,
            MappingDistribution::Tabulated(ref t) => {
                let (lo, hi) = t.support();
                let h = (hi - lo) / DENSITY_PANELS as f64;
                let v = &t.values;
                let mut acc = 0.0;
                for p in 0..DENSITY_PANELS {
                    let x0 = lo + h * p as f64;
                    acc += h * (x0 * v[2 * p] + 4.0 * (x0 + 0.5 * h) * v[2 * p + 1] + (x0 + h) * v[2 * p + 2]) / 6.0;
                }
                acc / t.total_mass()
            }
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            MappingDistribution::Uniform { lo, hi } => {
                let u: f64 = rng.random();
                (lo + u * (hi - lo)).min(hi)
            }
            MappingDistribution::Degenerate { at } => at,
            MappingDistribution::Tabulated(ref t) => t.quantile(rng.random()),
        }
    }
}

/// Maps `point` onto the reals with a draw from `dist`.
///
/// The image is determined by `(point, dist, seed)`; the countable coordinate
/// is untouched.
pub fn realize_mapping(point: IntermediatePoint, dist: &MappingDistribution, seed: u64) -> Result<IntermediatePoint> {
    realize_mapping_stream(point, dist, seed, 0)
}

/// As [`realize_mapping`], drawing from ChaCha stream `stream` of `seed`.
pub fn realize_mapping_stream(
    point: IntermediatePoint,
    dist: &MappingDistribution,
    seed: u64,
    stream: u64,
) -> Result<IntermediatePoint> {
    if point.image.is_some() {
        return Err(Error::AlreadyRealized);
    }
    dist.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let r = dist.draw(&mut rng);
    Ok(IntermediatePoint { image: Some(r), ..point })
}

/// Realizes `count` points with countable coordinates `0, 1, …, count-1`;
/// point `i` draws from stream `i`.
pub fn realize_population(count: usize, dist: &MappingDistribution, seed: u64) -> Result<Vec<IntermediatePoint>> {
    dist.validate()?;
    (0..count).map(|i| realize_mapping_stream(IntermediatePoint::new(i as f64)?, dist, seed, i as u64)).collect()
}

/// Kolmogorov–Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs: Vec<f64> = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

/// Asymptotic two-sided KS critical value at significance `alpha`:
/// `sqrt(-ln(alpha/2) / 2) / sqrt(n)`.
pub fn ks_critical_value(n: usize, alpha: f64) -> f64 {
    math::sqrt(-math::ln(alpha / 2.0) / 2.0) / math::sqrt(n as f64)
}
