//! Large-scale path loss through a RIS element.
//!
//! Both laws are normalized: the proportionality constant (antenna gains,
//! element cross section) is taken as 1, so only ratios between results are
//! physically meaningful.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Propagation mechanism through the element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathLossMode {
    /// Specular/anomalous reflection: loss follows the total distance.
    Reflected,
    /// Diffuse scattering: loss follows the product of the distances.
    Scattered,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossLaw<T> {
    exponent: T,
    mode: PathLossMode,
}

impl<T: Real> PathLossLaw<T> {
    pub fn new(exponent: T, mode: PathLossMode) -> Result<Self> {
        check_exponent(exponent)?;
        Ok(Self { exponent, mode })
    }

    /// Free-space exponent `n = 2`.
    pub fn free_space(mode: PathLossMode) -> Self {
        Self {
            exponent: T::lit(2.0),
            mode,
        }
    }

    pub fn exponent(&self) -> T {
        self.exponent
    }

    pub fn mode(&self) -> PathLossMode {
        self.mode
    }

    pub fn evaluate(&self, d_sr: T, d_rd: T) -> Result<T> {
        match self.mode {
            PathLossMode::Reflected => pathloss_reflected(d_sr, d_rd, self.exponent),
            PathLossMode::Scattered => pathloss_scattered(d_sr, d_rd, self.exponent),
        }
    }
}

/// Propagation regime relative to the near-field boundary of the surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    NearFieldReflected,
    FarFieldScattered,
}

impl Regime {
    pub fn mode(self) -> PathLossMode {
        match self {
            Regime::NearFieldReflected => PathLossMode::Reflected,
            Regime::FarFieldScattered => PathLossMode::Scattered,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Regime::NearFieldReflected => "near-field/reflected",
            Regime::FarFieldScattered => "far-field/scattered",
        }
    }
}

fn check_positive<T: Real>(name: &str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidGeometry(format!("{name} = {v} must be positive")))
    }
}

fn check_exponent<T: Real>(n: T) -> Result<()> {
    if n > T::zero() && n.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("path loss exponent {n} must be positive")))
    }
}

/// `(d_sr + d_rd)^{-n}`.
pub fn pathloss_reflected<T: Real>(d_sr: T, d_rd: T, n: T) -> Result<T> {
    check_positive("d_sr", d_sr)?;
    check_positive("d_rd", d_rd)?;
    check_exponent(n)?;
    Ok((d_sr + d_rd).powf(-n))
}

/// `(d_sr · d_rd)^{-n}`.
pub fn pathloss_scattered<T: Real>(d_sr: T, d_rd: T, n: T) -> Result<T> {
    check_positive("d_sr", d_sr)?;
    check_positive("d_rd", d_rd)?;
    check_exponent(n)?;
    Ok((d_sr * d_rd).powf(-n))
}

/// Near-field extent `2·D²/λ` of a surface whose largest dimension is `D`.
pub fn near_field_boundary<T: Real>(largest_dimension: T, carrier_frequency: T) -> Result<T> {
    check_positive("RIS dimension", largest_dimension)?;
    check_positive("carrier frequency", carrier_frequency)?;
    let wavelength = T::lit(SPEED_OF_LIGHT) / carrier_frequency;
    Ok(T::lit(2.0) * largest_dimension * largest_dimension / wavelength)
}

/// Near-field when both endpoints lie within the boundary (inclusive).
pub fn classify_regime<T: Real>(
    largest_dimension: T,
    carrier_frequency: T,
    d_sr: T,
    d_rd: T,
) -> Result<Regime> {
    check_positive("d_sr", d_sr)?;
    check_positive("d_rd", d_rd)?;
    let boundary = near_field_boundary(largest_dimension, carrier_frequency)?;
    Ok(if d_sr.max(d_rd) <= boundary {
        Regime::NearFieldReflected
    } else {
        Regime::FarFieldScattered
    })
}

/// Power ratio in dB.
pub fn ratio_db<T: Real>(numerator: T, denominator: T) -> T {
    T::lit(10.0) * (numerator / denominator).log10()
}
