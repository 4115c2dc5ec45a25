use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Receiver applied to each received vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Detector {
    /// Zero forcing followed by per-stream slicing.
    Zf,
    /// Gain-normalized matched filter followed by per-stream slicing.
    MatchedFilter,
    /// Exhaustive maximum likelihood.
    Ml,
}

impl Detector {
    pub const ALL: [Detector; 3] = [Detector::Zf, Detector::MatchedFilter, Detector::Ml];

    pub fn label(self) -> &'static str {
        match self {
            Detector::Zf => "zf",
            Detector::MatchedFilter => "mf",
            Detector::Ml => "ml",
        }
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Detector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zf" => Ok(Detector::Zf),
            "mf" | "matched-filter" => Ok(Detector::MatchedFilter),
            "ml" => Ok(Detector::Ml),
            other => Err(Error::InvalidParameter(format!("unknown detector '{other}'"))),
        }
    }
}

/// Whether the surface phases are configured for the link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scenario {
    /// Surface left at its random initial phases.
    Baseline,
    /// Surface phases from the spectral-entropy optimizer.
    Assisted,
}

impl Scenario {
    pub fn label(self) -> &'static str {
        match self {
            Scenario::Baseline => "baseline",
            Scenario::Assisted => "assisted",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Channel family used by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChannelKind {
    /// Normalized Rayleigh scene with a power split `ρ` through the surface.
    #[default]
    Rayleigh,
    /// Fixed `H = I` with no surface contribution, for AWGN reference runs.
    Awgn,
}

impl ChannelKind {
    pub fn label(self) -> &'static str {
        match self {
            ChannelKind::Rayleigh => "rayleigh",
            ChannelKind::Awgn => "awgn",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Transmit antennas (streams).
    pub m: usize,
    /// Receive antennas.
    pub n: usize,
    /// Surface elements.
    pub l: usize,
    /// Fraction of the average received power that goes through the surface.
    pub rho: f64,
    pub snr_db: Vec<f64>,
    /// Symbol vectors sent per realization and SNR point.
    pub trials_per_point: usize,
    pub channel_realizations: usize,
    pub detectors: Vec<Detector>,
    pub scenarios: Vec<Scenario>,
    /// Run the optimizer for the assisted scenario. When false the
    /// "assisted" surface keeps its random phases.
    pub optimize_ris: bool,
    pub quantize_bits: Option<u32>,
    pub channel: ChannelKind,
    pub max_iterations: usize,
    pub se_tolerance: f64,
    pub seed: u64,
    /// Worker threads; 1 runs on the calling thread.
    pub threads: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            m: 4,
            n: 4,
            l: 100,
            rho: 0.5,
            snr_db: (0..=10).map(|k| 2.0 * k as f64).collect(),
            trials_per_point: 1000,
            channel_realizations: 100,
            detectors: vec![Detector::Zf, Detector::Ml],
            scenarios: vec![Scenario::Baseline, Scenario::Assisted],
            optimize_ris: true,
            quantize_bits: None,
            channel: ChannelKind::Rayleigh,
            max_iterations: 1000,
            se_tolerance: 1e-4,
            seed: 0,
            threads: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("M", self.m),
            ("N", self.n),
            ("L", self.l),
            ("trials_per_point", self.trials_per_point),
            ("channel_realizations", self.channel_realizations),
            ("max_iterations", self.max_iterations),
            ("threads", self.threads),
        ] {
            if v == 0 {
                return Err(Error::InvalidParameter(format!("{name} must be at least 1")));
            }
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::InvalidParameter(format!("rho = {} outside [0, 1]", self.rho)));
        }
        if let Some(bad) = self.snr_db.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("SNR {bad} dB is not finite")));
        }
        if !(self.se_tolerance > 0.0) {
            return Err(Error::InvalidParameter("se_tolerance must be positive".into()));
        }
        if self.quantize_bits == Some(0) {
            return Err(Error::InvalidParameter("quantization needs at least 1 bit".into()));
        }
        if self.detectors.contains(&Detector::Zf) && self.n < self.m {
            return Err(Error::InvalidDimension(format!(
                "zero forcing needs N >= M, got N = {} and M = {}",
                self.n, self.m
            )));
        }
        if self.channel == ChannelKind::Awgn && self.n < self.m {
            return Err(Error::InvalidDimension("AWGN reference needs N >= M".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_fields() {
        let base = ExperimentConfig::default();
        let cases = [
            ExperimentConfig { rho: 1.5, ..base.clone() },
            ExperimentConfig { rho: -0.1, ..base.clone() },
            ExperimentConfig { m: 0, ..base.clone() },
            ExperimentConfig { trials_per_point: 0, ..base.clone() },
            ExperimentConfig { snr_db: vec![0.0, f64::NAN], ..base.clone() },
            ExperimentConfig { quantize_bits: Some(0), ..base.clone() },
            ExperimentConfig { n: 2, ..base.clone() },
        ];
        for c in cases {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn detector_names_round_trip() {
        for d in Detector::ALL {
            assert_eq!(d.label().parse::<Detector>().unwrap(), d);
        }
        assert!("mmse".parse::<Detector>().is_err());
    }
}
