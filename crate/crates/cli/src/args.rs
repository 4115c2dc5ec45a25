use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ris_forge::linksim::{ChannelKind, Detector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "ris-forge", version, about = "RIS-assisted MIMO link experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Condition number before and after phase optimization, one row per realization.
    KappaHist {
        #[command(flatten)]
        args: KappaArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Symbol error rate against SNR for each scenario and detector.
    SerCurve {
        #[command(flatten)]
        args: SerArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Normalized path loss through one element and the near-field rule.
    Pathloss(PathlossArgs),
    /// Optimize the phases of a single scene.
    Optimize {
        #[command(flatten)]
        args: OptimizeArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Re-run the experiment recorded in a manifest.
    Replay {
        manifest: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Output directory; falls back to $RIS_FORGE_OUT, then the current directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

impl OutArgs {
    pub fn resolve(&self) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| std::env::var_os("RIS_FORGE_OUT").filter(|v| !v.is_empty()).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."))
    }
}

/// Scene dimensions and the optimizer knobs shared by the experiment commands.
#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct SceneArgs {
    /// Transmit antennas.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    pub m: u64,
    /// Receive antennas.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    /// RIS elements.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub l: u64,
    /// Fraction of the average received power routed through the RIS.
    #[arg(long, default_value_t = 0.5, value_parser = parse_fraction)]
    pub rho: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_iterations: u64,
    /// Convergence tolerance on the spectral entropy.
    #[arg(long, default_value_t = 1e-4, value_parser = parse_positive)]
    pub se_tolerance: f64,
    /// Quantize optimized phases to 2^b levels.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=24))]
    pub quantize_bits: Option<u32>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct KappaArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub scene: SceneArgs,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub realizations: u64,
    /// Worker threads; 1 gives bit-reproducible output.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorArg {
    Zf,
    Mf,
    Ml,
}

impl From<DetectorArg> for Detector {
    fn from(d: DetectorArg) -> Self {
        match d {
            DetectorArg::Zf => Detector::Zf,
            DetectorArg::Mf => Detector::MatchedFilter,
            DetectorArg::Ml => Detector::Ml,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ChannelArg {
    #[default]
    Rayleigh,
    Awgn,
}

impl From<ChannelArg> for ChannelKind {
    fn from(c: ChannelArg) -> Self {
        match c {
            ChannelArg::Rayleigh => ChannelKind::Rayleigh,
            ChannelArg::Awgn => ChannelKind::Awgn,
        }
    }
}

/// Inclusive `start:stop:step` grid in dB; a single number is a one-point grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SnrGrid {
    pub fn points(&self) -> Vec<f64> {
        if self.start == self.stop {
            return vec![self.start];
        }
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|k| {
                let v = self.start + k as f64 * self.step;
                // keep 0.1-style steps printable
                (v * 1e9).round() / 1e9
            })
            .collect()
    }
}

impl FromStr for SnrGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| {
            p.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("'{p}' is not a finite number"))
        };
        let grid = match parts.as_slice() {
            [v] => {
                let v = num(v)?;
                SnrGrid { start: v, stop: v, step: 1.0 }
            }
            [a, b, c] => SnrGrid {
                start: num(a)?,
                stop: num(b)?,
                step: num(c)?,
            },
            _ => return Err("expected start:stop:step".into()),
        };
        if grid.step <= 0.0 {
            return Err("step must be positive".into());
        }
        if grid.stop < grid.start {
            return Err("stop must not be below start".into());
        }
        if (grid.stop - grid.start) / grid.step > 1e6 {
            return Err("grid has too many points".into());
        }
        Ok(grid)
    }
}

impl fmt::Display for SnrGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct SerArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub scene: SceneArgs,
    /// Channel realizations (each held fixed for all trials of a point).
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub realizations: u64,
    /// Symbol vectors per realization and SNR point.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long = "snr-db", default_value = "0:20:2")]
    pub snr_db: SnrGrid,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "zf,ml")]
    pub detectors: Vec<DetectorArg>,
    /// Include the optimized-surface scenario.
    #[arg(long)]
    pub assisted: bool,
    /// Include the random-phase scenario.
    #[arg(long)]
    pub baseline: bool,
    /// Leave the assisted surface at its random phases.
    #[arg(long)]
    pub no_optimize: bool,
    #[arg(long, value_enum, default_value_t = ChannelArg::Rayleigh)]
    pub channel: ChannelArg,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct PathlossArgs {
    /// Transmitter to RIS distance in meters.
    #[arg(long, value_parser = parse_positive)]
    pub d_sr: f64,
    /// RIS to receiver distance in meters.
    #[arg(long, value_parser = parse_positive)]
    pub d_rd: f64,
    /// Path-loss exponent.
    #[arg(long = "n", default_value_t = 2.0, value_parser = parse_positive)]
    pub exponent: f64,
    /// Largest RIS dimension in meters.
    #[arg(long, requires = "freq", value_parser = parse_positive)]
    pub ris_size: Option<f64>,
    /// Carrier frequency in Hz.
    #[arg(long, requires = "ris_size", value_parser = parse_positive)]
    pub freq: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct OptimizeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub scene: SceneArgs,
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} must be positive"))
    }
}
