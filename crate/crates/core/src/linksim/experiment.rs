//! Condition-number and symbol-error-rate experiments.

use rand::Rng;
use rayon::prelude::*;

use crate::channel::{effective_channel, sample_rayleigh, RisConfig, Scene};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::metrics::{condition_number, spectral_entropy};
use crate::optimizer::{initial_phases, maximize_spectral_entropy_from, quantize_phases, OptOptions};
use crate::rng::{complex_gaussian, derive_seed, stream, tag};
use crate::scalar::{Complex, Real};

use super::config::{ChannelKind, Detector, ExperimentConfig, Scenario};
use super::detect::{detect_linear, normalized_matched_filter, zf_decoder, MlDetector};
use super::qpsk::Constellation;

/// Draws `H_env` (N×M), `F` (N×L) and `G` (L×M), in that order, with unit
/// variance entries and sets `G_d = 1 − ρ`, `G_r = ρ / L`.
///
/// Every entry of `F Q G` is a sum of `L` unit-variance terms when `|q| = 1`,
/// so the expected entry power of the effective channel is
/// `(1 − ρ) + ρ = 1`.
pub fn normalize_scene<T: Real, R: Rng + ?Sized>(
    m: usize,
    n: usize,
    l: usize,
    rho: f64,
    rng: &mut R,
) -> Result<Scene<T>> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::InvalidParameter(format!("rho = {rho} outside [0, 1]")));
    }
    if l == 0 {
        return Err(Error::InvalidDimension("the surface needs at least one element".into()));
    }
    let h_env = sample_rayleigh(n, m, rng)?;
    let f = sample_rayleigh(n, l, rng)?;
    let g = sample_rayleigh(l, m, rng)?;
    Scene::dyadic(h_env, f, g, T::lit(1.0 - rho), T::lit(rho / l as f64))
}

fn awgn_scene<T: Real>(m: usize, n: usize, l: usize) -> Result<Scene<T>> {
    Scene::dyadic(
        ComplexMatrix::eye(n, m)?,
        ComplexMatrix::zeros(n, l)?,
        ComplexMatrix::zeros(l, m)?,
        T::one(),
        T::zero(),
    )
}

fn draw_scene<T: Real>(config: &ExperimentConfig, experiment: u64, r: usize) -> Result<Scene<T>> {
    match config.channel {
        ChannelKind::Rayleigh => {
            let mut rng = stream(config.seed, &[experiment, tag::SCENE, r as u64]);
            normalize_scene(config.m, config.n, config.l, config.rho, &mut rng)
        }
        ChannelKind::Awgn => awgn_scene(config.m, config.n, config.l),
    }
}

fn opt_options<T: Real>(config: &ExperimentConfig) -> OptOptions<T> {
    OptOptions {
        max_iterations: config.max_iterations,
        se_tolerance: T::lit(config.se_tolerance),
        ..OptOptions::default()
    }
}

fn map_realizations<R, F>(threads: usize, count: usize, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(usize) -> Result<R> + Sync + Send,
{
    if threads <= 1 {
        return (0..count).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| (0..count).into_par_iter().map(&f).collect())
}

/// Random-phase and optimized statistics of one realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaSample<T> {
    pub realization: usize,
    pub kappa_before: T,
    pub kappa_after: T,
    pub se_before: T,
    pub se_after: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Condition number and spectral entropy of the effective channel at the
/// optimizer's random starting phases and after optimization.
///
/// Realization `r` draws its scene from `(seed, KAPPA, SCENE, r)` and its
/// starting phases from `(seed, KAPPA, INIT, r)`.
pub fn run_kappa_experiment<T: Real>(config: &ExperimentConfig) -> Result<Vec<KappaSample<T>>> {
    config.validate()?;
    let options = opt_options::<T>(config);
    map_realizations(config.threads, config.channel_realizations, |r| {
        let scene = draw_scene::<T>(config, tag::KAPPA, r)?;
        let start = initial_phases::<T>(config.l, derive_seed(config.seed, &[tag::KAPPA, tag::INIT, r as u64]));
        let h0 = effective_channel(&scene, &RisConfig::with_phases(start.clone())?)?;
        let kappa_before = condition_number(&h0)?;
        let se_before = spectral_entropy(&h0)?;
        if !config.optimize_ris {
            return Ok(KappaSample {
                realization: r,
                kappa_before,
                kappa_after: kappa_before,
                se_before,
                se_after: se_before,
                iterations: 0,
                converged: false,
            });
        }
        let res = maximize_spectral_entropy_from(&scene, &start, &options)?;
        let phases = match config.quantize_bits {
            Some(b) => quantize_phases(&res.phases, b)?,
            None => res.phases.clone(),
        };
        let h1 = effective_channel(&scene, &RisConfig::with_phases(phases)?)?;
        Ok(KappaSample {
            realization: r,
            kappa_before,
            kappa_after: condition_number(&h1)?,
            se_before,
            se_after: spectral_entropy(&h1)?,
            iterations: res.iterations,
            converged: res.converged,
        })
    })
}

/// One SNR point of a symbol-error-rate curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SerPoint {
    pub snr_db: f64,
    /// Symbol errors over all streams divided by `trials · M`.
    pub ser: f64,
    /// Symbol vectors sent.
    pub trials: u64,
    /// 95% normal-approximation half-width over `trials · M` symbols.
    pub ci_halfwidth: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SerCurve {
    pub scenario: Scenario,
    pub detector: Detector,
    pub points: Vec<SerPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SerReport {
    pub curves: Vec<SerCurve>,
    pub realizations: usize,
    /// Assisted realizations whose optimizer reached the entropy bound.
    pub assisted_converged: usize,
}

impl SerReport {
    pub fn curve(&self, scenario: Scenario, detector: Detector) -> Option<&SerCurve> {
        self.curves
            .iter()
            .find(|c| c.scenario == scenario && c.detector == detector)
    }
}

/// `1.96 · √(p (1 − p) / n)`.
pub fn binomial_halfwidth(p: f64, n: u64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    1.96 * (p * (1.0 - p) / n as f64).sqrt()
}

struct Receiver<T> {
    h: ComplexMatrix<T>,
    zf: Option<ComplexMatrix<T>>,
    mf: Option<ComplexMatrix<T>>,
    ml: Option<MlDetector<T>>,
}

impl<T: Real> Receiver<T> {
    fn new(h: ComplexMatrix<T>, detectors: &[Detector], points: &Constellation<T>) -> Result<Self> {
        let zf = detectors.contains(&Detector::Zf).then(|| zf_decoder(&h)).transpose()?;
        let mf = detectors
            .contains(&Detector::MatchedFilter)
            .then(|| normalized_matched_filter(&h))
            .transpose()?;
        let ml = detectors
            .contains(&Detector::Ml)
            .then(|| MlDetector::new(&h, points))
            .transpose()?;
        Ok(Self { h, zf, mf, ml })
    }

    fn detect(&self, d: Detector, y: &[Complex<T>], points: &Constellation<T>) -> Result<Vec<usize>> {
        match d {
            Detector::Zf => detect_linear(self.zf.as_ref().expect("prepared"), y, points),
            Detector::MatchedFilter => detect_linear(self.mf.as_ref().expect("prepared"), y, points),
            Detector::Ml => self.ml.as_ref().expect("prepared").detect(y),
        }
    }
}

/// Symbol error rates of every configured scenario and detector.
///
/// Each realization fixes one scene for all SNR points. The baseline link
/// uses the scene at the random starting phases, the assisted link the
/// optimizer output (quantized when requested). At SNR point `s` the
/// realization sends `trials_per_point` vectors of i.i.d. QPSK symbols
/// scaled by `1/√M` with noise variance `10^{-snr/10}`; symbols and noise
/// come from `(seed, SER, NOISE, r, s)` and are shared by all scenarios and
/// detectors.
pub fn run_ser_experiment<T: Real>(config: &ExperimentConfig) -> Result<SerReport> {
    config.validate()?;
    let options = opt_options::<T>(config);
    let (m, n) = (config.m, config.n);
    let points = Constellation::<T>::qpsk().scaled(T::one() / T::count(m).sqrt());
    let scenarios = &config.scenarios;
    let detectors = &config.detectors;
    let n_snr = config.snr_db.len();
    let cell = |sc: usize, d: usize, s: usize| (sc * detectors.len() + d) * n_snr + s;

    let per_realization = map_realizations(config.threads, config.channel_realizations, |r| {
        let scene = draw_scene::<T>(config, tag::SER, r)?;
        let start = initial_phases::<T>(config.l, derive_seed(config.seed, &[tag::SER, tag::INIT, r as u64]));
        let mut converged = false;
        let mut receivers = Vec::with_capacity(scenarios.len());
        for &sc in scenarios {
            let phases = match sc {
                Scenario::Baseline => start.clone(),
                Scenario::Assisted if config.optimize_ris => {
                    let res = maximize_spectral_entropy_from(&scene, &start, &options)?;
                    converged = res.converged;
                    match config.quantize_bits {
                        Some(b) => quantize_phases(&res.phases, b)?,
                        None => res.phases,
                    }
                }
                Scenario::Assisted => start.clone(),
            };
            let h = effective_channel(&scene, &RisConfig::with_phases(phases)?)?;
            receivers.push(Receiver::new(h, detectors, &points)?);
        }

        let mut errors = vec![0u64; scenarios.len() * detectors.len() * n_snr];
        let mut idx = vec![0usize; m];
        let mut x = vec![Complex::new(T::zero(), T::zero()); m];
        let mut noise = vec![Complex::new(T::zero(), T::zero()); n];
        let mut y = vec![Complex::new(T::zero(), T::zero()); n];
        for (s, &snr_db) in config.snr_db.iter().enumerate() {
            let n0 = 10f64.powf(-snr_db / 10.0);
            let mut rng = stream(config.seed, &[tag::SER, tag::NOISE, r as u64, s as u64]);
            for _ in 0..config.trials_per_point {
                for k in 0..m {
                    idx[k] = rng.random_range(0..points.len());
                    x[k] = points.points()[idx[k]];
                }
                for z in noise.iter_mut() {
                    *z = complex_gaussian(&mut rng, n0);
                }
                for (sc, rx) in receivers.iter().enumerate() {
                    for (i, yi) in y.iter_mut().enumerate() {
                        let row = rx.h.row(i);
                        *yi = row.iter().zip(&x).fold(noise[i], |acc, (&a, &b)| acc + a * b);
                    }
                    for (d, &det) in detectors.iter().enumerate() {
                        let decided = rx.detect(det, &y, &points)?;
                        let wrong = decided.iter().zip(&idx).filter(|(a, b)| a != b).count();
                        errors[cell(sc, d, s)] += wrong as u64;
                    }
                }
            }
        }
        Ok((errors, converged))
    })?;

    let mut totals = vec![0u64; scenarios.len() * detectors.len() * n_snr];
    let mut assisted_converged = 0;
    for (errors, converged) in &per_realization {
        for (t, e) in totals.iter_mut().zip(errors) {
            *t += e;
        }
        assisted_converged += usize::from(*converged);
    }

    let trials = (config.trials_per_point * config.channel_realizations) as u64;
    let symbols = trials * m as u64;
    let mut curves = Vec::new();
    for (sc, &scenario) in scenarios.iter().enumerate() {
        for (d, &detector) in detectors.iter().enumerate() {
            let points = config
                .snr_db
                .iter()
                .enumerate()
                .map(|(s, &snr_db)| {
                    let ser = totals[cell(sc, d, s)] as f64 / symbols as f64;
                    SerPoint {
                        snr_db,
                        ser,
                        trials,
                        ci_halfwidth: binomial_halfwidth(ser, symbols),
                    }
                })
                .collect();
            curves.push(SerCurve {
                scenario,
                detector,
                points,
            });
        }
    }
    Ok(SerReport {
        curves,
        realizations: config.channel_realizations,
        assisted_converged,
    })
}
