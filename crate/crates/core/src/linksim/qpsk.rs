//! Constellations and QPSK mapping.

use crate::error::{Error, Result};
use crate::scalar::{Complex, Real};

/// A finite set of complex symbols addressed by index.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation<T> {
    points: Vec<Complex<T>>,
}

impl<T: Real> Constellation<T> {
    pub fn new(points: Vec<Complex<T>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("empty constellation".into()));
        }
        Ok(Self { points })
    }

    /// Unit-energy Gray-mapped QPSK.
    ///
    /// Bit 0 of the index selects the sign of the real part and bit 1 the
    /// sign of the imaginary part, so neighbours differ in one bit:
    ///
    /// | index | point           |
    /// |-------|-----------------|
    /// | 0     | `( 1 + j) / √2` |
    /// | 1     | `(-1 + j) / √2` |
    /// | 2     | `( 1 - j) / √2` |
    /// | 3     | `(-1 - j) / √2` |
    pub fn qpsk() -> Self {
        let a = T::FRAC_1_SQRT_2();
        let points = (0..4)
            .map(|k| {
                let re = if k & 1 == 0 { a } else { -a };
                let im = if k & 2 == 0 { a } else { -a };
                Complex::new(re, im)
            })
            .collect();
        Self { points }
    }

    /// Same constellation with every point multiplied by `s`.
    pub fn scaled(&self, s: T) -> Self {
        Self {
            points: self.points.iter().map(|&p| p * s).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Complex<T>] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Result<Complex<T>> {
        self.points.get(index).copied().ok_or_else(|| {
            Error::InvalidParameter(format!(
                "symbol index {index} outside constellation of size {}",
                self.points.len()
            ))
        })
    }

    /// Index of the closest point; ties go to the lowest index.
    pub fn nearest(&self, z: Complex<T>) -> usize {
        let mut best = 0;
        let mut best_d = (z - self.points[0]).norm_sqr();
        for (i, &p) in self.points.iter().enumerate().skip(1) {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    pub fn modulate(&self, indices: &[usize]) -> Result<Vec<Complex<T>>> {
        indices.iter().map(|&i| self.point(i)).collect()
    }
}

/// Maps QPSK symbol indices `0..4` onto [`Constellation::qpsk`].
pub fn qpsk_modulate<T: Real>(indices: &[usize]) -> Result<Vec<Complex<T>>> {
    Constellation::qpsk().modulate(indices)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_mapping() {
        let s: Vec<Complex<f64>> = qpsk_modulate(&[0, 1, 2, 3]).unwrap();
        let a = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(s[0], Complex::new(a, a));
        assert_eq!(s[1], Complex::new(-a, a));
        assert_eq!(s[2], Complex::new(a, -a));
        assert_eq!(s[3], Complex::new(-a, -a));
        assert!(s.iter().all(|z| (z.norm() - 1.0).abs() < 1e-15));
    }

    #[test]
    fn gray_neighbours_differ_in_one_bit() {
        let c = Constellation::<f64>::qpsk();
        for i in 0..4usize {
            for j in 0..4usize {
                let d = (c.points()[i] - c.points()[j]).norm();
                // nearest neighbours sit at distance √2
                if (d - 2f64.sqrt()).abs() < 1e-12 {
                    assert_eq!((i ^ j).count_ones(), 1);
                }
            }
        }
    }

    #[test]
    fn noiseless_round_trip_and_errors() {
        let c = Constellation::<f64>::qpsk();
        let idx = [3, 1, 0, 2, 2];
        let s = c.modulate(&idx).unwrap();
        let back: Vec<usize> = s.iter().map(|&z| c.nearest(z)).collect();
        assert_eq!(back, idx);
        assert!(matches!(qpsk_modulate::<f64>(&[4]), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn nearest_breaks_ties_low() {
        let c = Constellation::<f64>::qpsk();
        assert_eq!(c.nearest(Complex::new(0.0, 0.0)), 0);
        assert_eq!(c.nearest(Complex::new(-1.0, 0.0)), 1);
    }
}
