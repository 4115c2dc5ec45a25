//! Channel conditioning metrics.

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::scalar::Real;

/// Relative threshold below which the smallest singular value counts as zero.
pub const RANK_TOL: f64 = 1e-12;

fn nonzero_spectrum<T: Real>(h: &ComplexMatrix<T>) -> Result<Vec<T>> {
    let s = h.singular_values();
    if s[0] == T::zero() {
        return Err(Error::DegenerateInput("all-zero matrix".into()));
    }
    Ok(s)
}

/// `σ_max / σ_min` over singular values sorted in descending order.
/// Returns `+∞` when `σ_min ≤ 1e-12 · σ_max`.
pub fn condition_number_from_singular_values<T: Real>(s: &[T]) -> T {
    let max = s[0];
    let min = s[s.len() - 1];
    if min <= max * T::lit(RANK_TOL) {
        T::infinity()
    } else {
        max / min
    }
}

/// Entropy of the normalized singular values, `0·ln 0 = 0`.
pub fn spectral_entropy_from_singular_values<T: Real>(s: &[T]) -> T {
    let total: T = s.iter().copied().sum();
    let h = s
        .iter()
        .filter(|&&x| x > T::zero())
        .map(|&x| {
            let p = x / total;
            -p * p.ln()
        })
        .sum::<T>();
    h.max(T::zero())
}

/// Condition number of `h`, `+∞` for numerically rank-deficient input.
pub fn condition_number<T: Real>(h: &ComplexMatrix<T>) -> Result<T> {
    Ok(condition_number_from_singular_values(&nonzero_spectrum(h)?))
}

/// Spectral entropy of `h`, in `[0, ln min(rows, cols)]`.
pub fn spectral_entropy<T: Real>(h: &ComplexMatrix<T>) -> Result<T> {
    Ok(spectral_entropy_from_singular_values(&nonzero_spectrum(h)?))
}

/// Upper bound `ln min(rows, cols)` of the spectral entropy.
pub fn max_spectral_entropy<T: Real>(rows: usize, cols: usize) -> T {
    T::count(rows.min(cols)).ln()
}
