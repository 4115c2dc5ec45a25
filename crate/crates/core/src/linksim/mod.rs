//! Monte Carlo link-level evaluation.
//!
//! Scenes are normalized so that the average per-entry channel power is 1
//! whatever the split between the direct path and the surface. SNR is
//! defined per receive antenna as total transmit power (1, split equally
//! across the `M` streams) over the noise variance, see [`SNR_DEFINITION`].

mod config;
mod detect;
mod experiment;
mod qpsk;

pub use config::{ChannelKind, Detector, ExperimentConfig, Scenario};
pub use detect::{
    detect_linear, matched_filter, ml_detect, normalized_matched_filter, zf_decoder, MlDetector,
    ML_CANDIDATE_BUDGET,
};
pub use experiment::{
    binomial_halfwidth, normalize_scene, run_kappa_experiment, run_ser_experiment, KappaSample, SerCurve,
    SerPoint, SerReport,
};
pub use qpsk::{qpsk_modulate, Constellation};

/// Human-readable SNR convention used by [`run_ser_experiment`].
pub const SNR_DEFINITION: &str = "per-receive-antenna average SNR: total transmit power 1 split equally \
     over the M streams, unit average channel gain, divided by the complex noise variance";
