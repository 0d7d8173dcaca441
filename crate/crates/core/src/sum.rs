use num_complex::Complex64;

const LEAF: usize = 16;

/// Fixed-order pairwise (cascade) summation.
///
/// The reduction tree depends only on the slice length, so any caller that
/// hands over the same terms gets a bit-identical result regardless of how
/// the surrounding work was scheduled.
pub fn pairwise_sum(terms: &[Complex64]) -> Complex64 {
    if terms.len() <= LEAF {
        let mut acc = Complex64::new(0.0, 0.0);
        for t in terms {
            acc += *t;
        }
        acc
    } else {
        let mid = terms.len() / 2;
        pairwise_sum(&terms[..mid]) + pairwise_sum(&terms[mid..])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn pairwise_matches_naive_on_small_integers() {
        let xs: Vec<Complex64> = (0..1000).map(|i| Complex64::new(i as f64, -(i as f64))).collect();
        let s = pairwise_sum(&xs);
        assert_eq!(s, Complex64::new(499500.0, -499500.0));
    }

    #[test]
    fn empty_sum_is_zero() {
        assert_eq!(pairwise_sum(&[]), Complex64::new(0.0, 0.0));
    }
}
