//! Scalar abstraction.
//!
//! All numerical code in this crate is generic over [`Real`], which is
//! implemented for `f32` and `f64`. Monte Carlo experiments and the
//! acceptance-level tolerances assume `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

pub use num_complex::Complex;

/// Real floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into `Self`.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Converts a count into `Self`.
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Wraps an angle onto `[-π, π]`.
///
/// Values already inside the interval are returned unchanged, so `π` and `-π`
/// are both fixed points.
pub fn wrap_phase<T: Real>(theta: T) -> T {
    let pi = T::PI();
    if theta >= -pi && theta <= pi {
        return theta;
    }
    let two_pi = pi + pi;
    let mut r = (theta + pi) % two_pi;
    if r < T::zero() {
        r = r + two_pi;
    }
    let out = r - pi;
    // `%` can land exactly on 2π for inputs a hair below a multiple of 2π
    if out > pi {
        out - two_pi
    } else {
        out
    }
}

/// `e^{jθ}`.
pub fn unit_phasor<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn wrap_keeps_interior_values() {
        for &x in &[0.0, 1.0, -3.0, PI, -PI] {
            assert_eq!(wrap_phase(x), x);
        }
    }

    #[test]
    fn wrap_folds_exterior_values() {
        assert!((wrap_phase(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!((wrap_phase(-3.0 * PI / 2.0) - PI / 2.0).abs() < 1e-12);
        assert!((wrap_phase(0.3 + 2.0 * PI) - 0.3).abs() < 1e-12);
        assert!((wrap_phase(0.3 - 20.0 * PI) - 0.3).abs() < 1e-12);
        let w = wrap_phase(1e6_f64);
        assert!((-PI..=PI).contains(&w));
    }

    #[test]
    fn wrap_works_in_single_precision() {
        let w = wrap_phase(7.0_f32);
        assert!((w - (7.0 - 2.0 * std::f32::consts::PI)).abs() < 1e-5);
    }
}
