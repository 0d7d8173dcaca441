use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use num_complex::Complex64;

use super::{Method, PropagatorConfig, PropagatorResult};
use crate::error::{Error, Result};
use crate::math;
use crate::sum::pairwise_sum;

/// Largest number of interior assignments `propagate_enumerate` accepts.
pub const ENUMERATION_LIMIT: f64 = 1e7;

/// Paths per reduction chunk. Chunk sums are reduced pairwise, so the
/// result only depends on the path count, not on who computed the chunks.
pub const ENUMERATION_CHUNK: u64 = 4096;

/// `sites^(k−1)` as a float (it may not fit in an integer).
pub fn enumeration_paths(cfg: &PropagatorConfig) -> f64 {
    math::pow_usize(cfg.space().sites() as f64, cfg.grid().steps() - 1)
}

fn check_size(cfg: &PropagatorConfig) -> Result<u64> {
    let paths = enumeration_paths(cfg);
    if paths > ENUMERATION_LIMIT {
        return Err(Error::TooLarge { paths, limit: ENUMERATION_LIMIT });
    }
    Ok(paths as u64)
}

/// Sum of path weights (without the `dx^(k−1)` measure) for path indices in
/// `range`. Index `p` encodes the interior sites in base `sites`, least
/// significant digit first.
pub fn enumerate_chunk(cfg: &PropagatorConfig, range: Range<u64>) -> Result<Complex64> {
    let k = cfg.grid().steps();
    let n = cfg.space().sites() as u64;
    let weights = cfg.site_weights();
    let mut sites = vec![0usize; k + 1];
    sites[0] = cfg.a_site();
    sites[k] = cfg.b_site();
    let mut terms = Vec::with_capacity((range.end - range.start) as usize);
    for p in range {
        let mut rest = p;
        for s in sites.iter_mut().take(k).skip(1) {
            *s = (rest % n) as usize;
            rest /= n;
        }
        let mut w = Complex64::new(1.0, 0.0);
        for i in 1..k {
            w *= weights[sites[i]];
        }
        for step in 1..=k {
            w *= cfg.step_weight(step, sites[step - 1], sites[step], false)?;
        }
        terms.push(w);
    }
    Ok(pairwise_sum(&terms))
}

/// Consecutive path-index ranges of [`ENUMERATION_CHUNK`] paths covering
/// every interior assignment.
pub fn enumeration_chunks(cfg: &PropagatorConfig) -> Result<Vec<Range<u64>>> {
    let total = check_size(cfg)?;
    let mut chunks = Vec::new();
    let mut start = 0;
    while start < total {
        let end = (start + ENUMERATION_CHUNK).min(total);
        chunks.push(start..end);
        start = end;
    }
    Ok(chunks)
}

/// Reduces per-chunk sums (in chunk order) into the kernel value.
pub fn assemble_enumeration(cfg: &PropagatorConfig, chunk_sums: &[Complex64]) -> PropagatorResult {
    let measure = math::pow_usize(cfg.space().dx(), cfg.grid().steps() - 1);
    PropagatorResult {
        value: (pairwise_sum(chunk_sums) * measure).into(),
        method: Method::Enumeration,
        k: cfg.grid().steps(),
        sites: cfg.space().sites(),
        norm_per_step: cfg.norm_per_step().into(),
        stderr: None,
        snap_distances: cfg.snap_distances(),
    }
}

/// `K(b, a)` by summing every assignment of the `k − 1` interior slices.
///
/// Fails with [`Error::TooLarge`] beyond `sites^(k−1) = 10⁷`.
pub fn propagate_enumerate(cfg: &PropagatorConfig) -> Result<PropagatorResult> {
    let sums = enumeration_chunks(cfg)?.into_iter().map(|r| enumerate_chunk(cfg, r)).collect::<Result<Vec<_>>>()?;
    Ok(assemble_enumeration(cfg, &sums))
}
