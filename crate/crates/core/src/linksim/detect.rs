//! Linear and maximum-likelihood MIMO detection.

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::metrics::{condition_number_from_singular_values, RANK_TOL};
use crate::scalar::{Complex, Real};

use super::qpsk::Constellation;

/// Largest number of transmit hypotheses the exhaustive detector accepts.
pub const ML_CANDIDATE_BUDGET: usize = 1_000_000;

/// Zero-forcing decoder `W = (H^H H)^{-1} H^H`.
///
/// Computed through the SVD as `V Σ^{-1} U^H`, which is the same matrix for
/// full column rank `H` and avoids squaring the condition number.
pub fn zf_decoder<T: Real>(h: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let (n, m) = h.shape();
    if n < m {
        return Err(Error::InvalidDimension(format!(
            "zero forcing needs N >= M, got {n}x{m}"
        )));
    }
    let s = h.singular_values();
    if s[0] == T::zero() || condition_number_from_singular_values(&s).is_infinite() {
        return Err(Error::SingularChannel("channel is rank deficient".into()));
    }
    Ok(h.pseudo_inverse(T::lit(RANK_TOL)))
}

/// Matched filter `H^H`.
pub fn matched_filter<T: Real>(h: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    h.adjoint()
}

/// Matched filter with each stream divided by its column energy `‖h_k‖²`,
/// so that on an orthogonal channel it coincides with zero forcing.
pub fn normalized_matched_filter<T: Real>(h: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let mut w = h.adjoint();
    for k in 0..w.rows() {
        let energy: T = w.row(k).iter().map(|z| z.norm_sqr()).sum();
        if energy == T::zero() {
            return Err(Error::SingularChannel(format!("stream {k} has no channel energy")));
        }
        for c in 0..w.cols() {
            w[(k, c)] = w[(k, c)] / energy;
        }
    }
    Ok(w)
}

/// Per-stream nearest-point decisions on `W · y`.
pub fn detect_linear<T: Real>(
    w: &ComplexMatrix<T>,
    y: &[Complex<T>],
    constellation: &Constellation<T>,
) -> Result<Vec<usize>> {
    Ok(w.mul_vec(y)?.into_iter().map(|z| constellation.nearest(z)).collect())
}

/// Exhaustive-search detector with every `H · x` precomputed.
///
/// Hypotheses are enumerated in lexicographic order of the index vector
/// (stream 0 most significant) and only a strictly smaller metric replaces
/// the incumbent, so ties resolve to the lowest index vector.
#[derive(Debug, Clone)]
pub struct MlDetector<T> {
    streams: usize,
    order: usize,
    rows: usize,
    images: Vec<Complex<T>>,
}

impl<T: Real> MlDetector<T> {
    pub fn new(h: &ComplexMatrix<T>, constellation: &Constellation<T>) -> Result<Self> {
        let (rows, streams) = h.shape();
        let order = constellation.len();
        let count = (0..streams).try_fold(1usize, |acc, _| {
            acc.checked_mul(order).filter(|&c| c <= ML_CANDIDATE_BUDGET)
        });
        let Some(count) = count else {
            return Err(Error::Capacity(format!(
                "{order}^{streams} hypotheses exceed the budget of {ML_CANDIDATE_BUDGET}"
            )));
        };
        let mut images = Vec::with_capacity(count * rows);
        let mut x = vec![Complex::new(T::zero(), T::zero()); streams];
        for c in 0..count {
            let mut rem = c;
            for s in (0..streams).rev() {
                x[s] = constellation.points()[rem % order];
                rem /= order;
            }
            images.extend(h.mul_vec(&x)?);
        }
        Ok(Self {
            streams,
            order,
            rows,
            images,
        })
    }

    pub fn detect(&self, y: &[Complex<T>]) -> Result<Vec<usize>> {
        if y.len() != self.rows {
            return Err(Error::InvalidDimension(format!(
                "received vector of length {} for {} antennas",
                y.len(),
                self.rows
            )));
        }
        let mut best = 0;
        let mut best_d = T::infinity();
        for (c, img) in self.images.chunks_exact(self.rows).enumerate() {
            let mut d = T::zero();
            for (a, b) in img.iter().zip(y) {
                d = d + (*b - *a).norm_sqr();
                if d >= best_d {
                    break;
                }
            }
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        let mut out = vec![0; self.streams];
        let mut rem = best;
        for s in (0..self.streams).rev() {
            out[s] = rem % self.order;
            rem /= self.order;
        }
        Ok(out)
    }
}

/// Index vector minimizing `‖y − H x‖²` over all transmit hypotheses.
pub fn ml_detect<T: Real>(
    h: &ComplexMatrix<T>,
    y: &[Complex<T>],
    constellation: &Constellation<T>,
) -> Result<Vec<usize>> {
    MlDetector::new(h, constellation)?.detect(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::sample_rayleigh;
    use crate::rng::stream;

    type C = Complex<f64>;

    #[test]
    fn zf_inverts_full_rank_channels() {
        let h: ComplexMatrix<f64> = sample_rayleigh(5, 3, &mut stream(2, &[])).unwrap();
        let w = zf_decoder(&h).unwrap();
        assert_eq!(w.shape(), (3, 5));
        let wh = w.matmul(&h).unwrap();
        assert!(wh.max_abs_diff(&ComplexMatrix::identity(3).unwrap()).unwrap() < 1e-10);
    }

    #[test]
    fn zf_of_unitary_is_adjoint() {
        let g: ComplexMatrix<f64> = sample_rayleigh(4, 4, &mut stream(3, &[])).unwrap();
        let (q, _) = g.qr().unwrap();
        let w = zf_decoder(&q).unwrap();
        assert!(w.max_abs_diff(&q.adjoint()).unwrap() < 1e-12);
        assert!(matched_filter(&q).max_abs_diff(&w).unwrap() < 1e-10);
    }

    #[test]
    fn zf_rejects_singular_and_wide() {
        let a = [C::new(1.0, 0.0), C::new(0.0, 1.0)];
        let r1 = ComplexMatrix::outer(&a, &a).unwrap();
        assert!(matches!(zf_decoder(&r1), Err(Error::SingularChannel(_))));
        let wide: ComplexMatrix<f64> = sample_rayleigh(2, 3, &mut stream(1, &[])).unwrap();
        assert!(matches!(zf_decoder(&wide), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn matched_filter_examples() {
        let d = ComplexMatrix::diag(&[C::new(2.0, 0.0), C::new(-0.5, 0.0)]).unwrap();
        assert_eq!(matched_filter(&d), d);
        let h: ComplexMatrix<f64> = sample_rayleigh(3, 2, &mut stream(4, &[])).unwrap();
        assert_eq!(matched_filter(&matched_filter(&h)), h);
    }

    #[test]
    fn ml_recovers_noiseless_vectors() {
        let c = Constellation::qpsk();
        let h: ComplexMatrix<f64> = sample_rayleigh(3, 3, &mut stream(5, &[])).unwrap();
        let det = MlDetector::new(&h, &c).unwrap();
        for idx in [[0, 1, 2], [3, 3, 0], [2, 0, 1]] {
            let y = h.mul_vec(&c.modulate(&idx).unwrap()).unwrap();
            assert_eq!(det.detect(&y).unwrap(), idx);
        }
    }

    #[test]
    fn ml_ties_resolve_to_lowest_vector() {
        let c = Constellation::qpsk();
        let z = ComplexMatrix::<f64>::zeros(2, 2).unwrap();
        assert_eq!(ml_detect(&z, &[C::new(0.3, 0.1); 2], &c).unwrap(), vec![0, 0]);
    }

    #[test]
    fn ml_budget_is_enforced() {
        let c = Constellation::qpsk();
        // 4^10 = 1_048_576 is just over the budget
        let h = ComplexMatrix::<f64>::zeros(1, 10).unwrap();
        assert!(matches!(MlDetector::new(&h, &c), Err(Error::Capacity(_))));
        let h = ComplexMatrix::<f64>::zeros(1, 9).unwrap();
        assert!(MlDetector::new(&h, &c).is_ok());
    }

    #[test]
    fn linear_detection_examples() {
        let c = Constellation::qpsk();
        let g: ComplexMatrix<f64> = sample_rayleigh(3, 3, &mut stream(8, &[])).unwrap();
        let (q, _) = g.qr().unwrap();
        let idx = [1, 3, 2];
        let y = q.mul_vec(&c.modulate(&idx).unwrap()).unwrap();
        assert_eq!(detect_linear(&matched_filter(&q), &y, &c).unwrap(), idx);
        let zero = ComplexMatrix::zeros(3, 3).unwrap();
        assert_eq!(detect_linear(&zero, &y, &c).unwrap(), vec![0, 0, 0]);
    }
}
