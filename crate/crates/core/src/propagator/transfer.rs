use alloc::vec;
use alloc::vec::Vec;
use core::ops::RangeInclusive;

use num_complex::Complex64;

use super::{Method, PropagatorConfig, PropagatorResult};
use crate::amplitude::Amplitude;
use crate::error::{Error, Result};
use crate::lattice::SpaceGrid;
use crate::sum::pairwise_sum;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone)]
enum Storage {
    Dense(Vec<Complex64>),
    /// Entry `(row, col)` at `diag[col − row + n − 1]`.
    Toeplitz(Vec<Complex64>),
}

/// One-step matrix `T[j′, j] = norm·dx·e^{iS_step(x_j → x_j′)/ħ}`.
#[derive(Debug, Clone)]
pub struct StepKernel {
    n: usize,
    storage: Storage,
}

impl StepKernel {
    /// Builds the matrix for step `step` (1-based). Translation-invariant
    /// (free) kernels are stored as a single diagonal band.
    pub fn build(cfg: &PropagatorConfig, step: usize, phase_free: bool) -> Result<Self> {
        let n = cfg.space().sites();
        let coeff = cfg.norm_per_step() * cfg.space().dx();
        let storage = if cfg.lagrangian().is_free() {
            let mut diag = Vec::with_capacity(2 * n - 1);
            // offset col − row runs from −(n−1) to n−1; from = col, to = row
            for d in 0..(2 * n - 1) {
                let (from, to) = if d < n - 1 { (0, n - 1 - d) } else { (d - (n - 1), 0) };
                diag.push(coeff * cfg.step_phase(step, from, to, phase_free)?);
            }
            Storage::Toeplitz(diag)
        } else {
            let mut data = Vec::with_capacity(n * n);
            for row in 0..n {
                for col in 0..n {
                    data.push(coeff * cfg.step_phase(step, col, row, phase_free)?);
                }
            }
            Storage::Dense(data)
        };
        Ok(Self { n, storage })
    }

    pub fn sites(&self) -> usize {
        self.n
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        match &self.storage {
            Storage::Dense(d) => d[row * self.n + col],
            Storage::Toeplitz(d) => d[col + self.n - 1 - row],
        }
    }

    /// `Σ_j T[row, j]·v[j]` with pairwise reduction.
    pub fn row_dot(&self, row: usize, v: &[Complex64], scratch: &mut [Complex64]) -> Complex64 {
        let n = self.n;
        let r: &[Complex64] = match &self.storage {
            Storage::Dense(d) => &d[row * n..(row + 1) * n],
            Storage::Toeplitz(d) => &d[n - 1 - row..2 * n - 1 - row],
        };
        for ((s, t), x) in scratch[..n].iter_mut().zip(r).zip(v) {
            *s = t * x;
        }
        pairwise_sum(&scratch[..n])
    }

    /// `Σ_j′ u[j′]·T[j′, col]` with pairwise reduction.
    pub fn col_dot(&self, col: usize, u: &[Complex64], scratch: &mut [Complex64]) -> Complex64 {
        let n = self.n;
        match &self.storage {
            Storage::Dense(d) => {
                for (row, s) in scratch[..n].iter_mut().enumerate() {
                    *s = u[row] * d[row * n + col];
                }
            }
            Storage::Toeplitz(d) => {
                for (row, s) in scratch[..n].iter_mut().enumerate() {
                    *s = u[row] * d[col + n - 1 - row];
                }
            }
        }
        pairwise_sum(&scratch[..n])
    }
}

/// Strategy for evaluating all rows (or columns) of one step.
///
/// Implementations must compute each output entry with
/// [`StepKernel::row_dot`] / [`StepKernel::col_dot`] so results do not
/// depend on how the entries are scheduled.
pub trait RowExecutor {
    fn apply(&self, kernel: &StepKernel, v: &[Complex64], out: &mut [Complex64], transpose: bool);
}

/// Single-threaded executor.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl RowExecutor for Sequential {
    fn apply(&self, kernel: &StepKernel, v: &[Complex64], out: &mut [Complex64], transpose: bool) {
        let mut scratch = vec![ZERO; kernel.sites()];
        for (j, o) in out.iter_mut().enumerate() {
            *o = if transpose { kernel.col_dot(j, v, &mut scratch) } else { kernel.row_dot(j, v, &mut scratch) };
        }
    }
}

/// Per-slice site restriction; `allowed[i][j]` admits site `j` on slice `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceMask {
    allowed: Vec<Vec<bool>>,
}

impl SliceMask {
    pub fn new(allowed: Vec<Vec<bool>>) -> Self {
        Self { allowed }
    }

    pub fn allows(&self, slice: usize, site: usize) -> bool {
        self.allowed.get(slice).and_then(|s| s.get(site)).copied().unwrap_or(false)
    }

    pub fn slices(&self) -> usize {
        self.allowed.len()
    }
}

/// Transfer-matrix sweeps over a [`PropagatorConfig`].
///
/// Vectors passed between sweeps hold bare kernel values on a slice; the
/// interior measure weight (and mask) of a slice is applied right before the
/// step that leaves it.
pub struct TransferEngine<'a, E: RowExecutor = Sequential> {
    cfg: &'a PropagatorConfig,
    exec: E,
    weights: Vec<f64>,
    phase_free: bool,
    mask: Option<&'a SliceMask>,
    cached: Option<StepKernel>,
}

impl<'a> TransferEngine<'a, Sequential> {
    pub fn new(cfg: &'a PropagatorConfig) -> Self {
        Self::with_executor(cfg, Sequential)
    }
}

impl<'a, E: RowExecutor> TransferEngine<'a, E> {
    pub fn with_executor(cfg: &'a PropagatorConfig, exec: E) -> Self {
        Self { cfg, exec, weights: cfg.site_weights(), phase_free: false, mask: None, cached: None }
    }

    /// Drops the phase `e^{iS/ħ}` from every step, keeping `norm·dx`.
    pub fn phase_free(mut self, on: bool) -> Self {
        self.phase_free = on;
        self.cached = None;
        self
    }

    pub fn with_mask(mut self, mask: &'a SliceMask) -> Result<Self> {
        if mask.slices() != self.cfg.grid().steps() + 1 {
            return Err(Error::GridMismatch { expected: self.cfg.grid().steps() + 1, found: mask.slices() });
        }
        self.mask = Some(mask);
        Ok(self)
    }

    pub fn config(&self) -> &PropagatorConfig {
        self.cfg
    }

    /// Interior weight of `site` on `slice`, including the mask.
    pub fn slice_weight(&self, slice: usize, site: usize) -> f64 {
        if slice == 0 || slice >= self.cfg.grid().steps() {
            return 1.0;
        }
        match self.mask {
            Some(m) if !m.allows(slice, site) => 0.0,
            _ => self.weights[site],
        }
    }

    fn with_kernel<T>(&mut self, step: usize, f: impl FnOnce(&E, &StepKernel) -> T) -> Result<T> {
        if self.cfg.lagrangian().is_time_dependent() {
            let k = StepKernel::build(self.cfg, step, self.phase_free)?;
            return Ok(f(&self.exec, &k));
        }
        if self.cached.is_none() {
            self.cached = Some(StepKernel::build(self.cfg, step, self.phase_free)?);
        }
        Ok(f(&self.exec, self.cached.as_ref().expect("cached kernel")))
    }

    fn check_len(&self, v: &[Complex64]) -> Result<()> {
        let n = self.cfg.space().sites();
        if v.len() != n {
            return Err(Error::GridMismatch { expected: n, found: v.len() });
        }
        Ok(())
    }

    fn check_steps(&self, steps: &RangeInclusive<usize>) -> Result<()> {
        if *steps.start() == 0 || *steps.end() > self.cfg.grid().steps() {
            return Err(Error::InvalidArgument("steps must lie in 1..=k"));
        }
        Ok(())
    }

    /// `δ_site/dx`, the starting vector for a kernel sweep from a site.
    pub fn delta(&self, site: usize) -> Vec<Complex64> {
        let mut v = vec![ZERO; self.cfg.space().sites()];
        v[site] = Complex64::new(1.0 / self.cfg.space().dx(), 0.0);
        v
    }

    /// Applies steps `steps` (ascending) to a vector on slice `start − 1`.
    pub fn forward(&mut self, mut v: Vec<Complex64>, steps: RangeInclusive<usize>) -> Result<Vec<Complex64>> {
        self.check_len(&v)?;
        if steps.is_empty() {
            return Ok(v);
        }
        self.check_steps(&steps)?;
        let mut out = vec![ZERO; v.len()];
        for step in steps {
            let slice = step - 1;
            for (j, x) in v.iter_mut().enumerate() {
                *x *= self.slice_weight(slice, j);
            }
            self.with_kernel(step, |exec, k| exec.apply(k, &v, &mut out, false))?;
            core::mem::swap(&mut v, &mut out);
        }
        Ok(v)
    }

    /// Applies steps `steps` in descending order to a row vector on slice
    /// `end`, ending on slice `start − 1`.
    pub fn backward(&mut self, mut u: Vec<Complex64>, steps: RangeInclusive<usize>) -> Result<Vec<Complex64>> {
        self.check_len(&u)?;
        if steps.is_empty() {
            return Ok(u);
        }
        self.check_steps(&steps)?;
        let mut out = vec![ZERO; u.len()];
        for step in steps.rev() {
            for (j, x) in u.iter_mut().enumerate() {
                *x *= self.slice_weight(step, j);
            }
            self.with_kernel(step, |exec, k| exec.apply(k, &u, &mut out, true))?;
            core::mem::swap(&mut u, &mut out);
        }
        Ok(u)
    }

    /// `K(x_j, a)` at `t_b` for every site.
    pub fn kernel_from_a(&mut self) -> Result<Vec<Complex64>> {
        let k = self.cfg.grid().steps();
        let v = self.delta(self.cfg.a_site());
        self.forward(v, 1..=k)
    }

    /// `K(b, x_j)` from `t_a` for every site.
    pub fn kernel_to_b(&mut self) -> Result<Vec<Complex64>> {
        let k = self.cfg.grid().steps();
        let u = self.delta(self.cfg.b_site());
        self.backward(u, 1..=k)
    }

    pub fn propagate(&mut self) -> Result<PropagatorResult> {
        let v = self.kernel_from_a()?;
        Ok(PropagatorResult {
            value: v[self.cfg.b_site()].into(),
            method: Method::TransferMatrix,
            k: self.cfg.grid().steps(),
            sites: self.cfg.space().sites(),
            norm_per_step: self.cfg.norm_per_step().into(),
            stderr: None,
            snap_distances: self.cfg.snap_distances(),
        })
    }
}

/// `K(b, a)` by `k` sweeps of the one-step matrix from `δ_a/dx`;
/// cost `O(k·sites²)`.
pub fn propagate_transfer_matrix(cfg: &PropagatorConfig) -> Result<PropagatorResult> {
    TransferEngine::new(cfg).propagate()
}

pub fn kernel_from(cfg: &PropagatorConfig) -> Result<Vec<Complex64>> {
    TransferEngine::new(cfg).kernel_from_a()
}

pub fn kernel_to(cfg: &PropagatorConfig) -> Result<Vec<Complex64>> {
    TransferEngine::new(cfg).kernel_to_b()
}

/// `Σ_c K(b, c)·w_c·K(c, a)·dx` over a shared intermediate grid.
pub fn compose(first: &[Complex64], second: &[Complex64], space: &SpaceGrid, weights: &[f64]) -> Result<Amplitude> {
    let n = space.sites();
    for len in [first.len(), second.len(), weights.len()] {
        if len != n {
            return Err(Error::GridMismatch { expected: n, found: len });
        }
    }
    let terms: Vec<Complex64> = first.iter().zip(second).zip(weights).map(|((f, s), w)| f * s * *w).collect();
    Ok((pairwise_sum(&terms) * space.dx()).into())
}

/// Dense kernel `K(x_b, x_c)` on a grid, rows indexed by `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelField {
    n: usize,
    data: Vec<Complex64>,
}

impl KernelField {
    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::GridMismatch { expected: n, found: r.len() });
            }
            data.extend(r);
        }
        Ok(Self { n, data })
    }

    /// Zero-duration kernel `δ(x_b − x_c)`, i.e. the identity over `dx`.
    pub fn delta(space: &SpaceGrid) -> Self {
        let n = space.sites();
        let mut data = vec![ZERO; n * n];
        for j in 0..n {
            data[j * n + j] = Complex64::new(1.0 / space.dx(), 0.0);
        }
        Self { n, data }
    }

    pub fn row(&self, b: usize) -> &[Complex64] {
        &self.data[b * self.n..(b + 1) * self.n]
    }

    pub fn sites(&self) -> usize {
        self.n
    }
}

/// Composes a kernel vector `K(c, a)` with a full kernel `K(b, c)`,
/// returning `K(b, a)` for every `b`.
pub fn compose_field(
    first: &[Complex64],
    second: &KernelField,
    space: &SpaceGrid,
    weights: &[f64],
) -> Result<Vec<Complex64>> {
    if second.sites() != space.sites() {
        return Err(Error::GridMismatch { expected: space.sites(), found: second.sites() });
    }
    (0..second.sites()).map(|b| compose(first, second.row(b), space, weights).map(Complex64::from)).collect()
}
