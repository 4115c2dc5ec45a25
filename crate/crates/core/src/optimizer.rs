//! RIS phase configuration.
//!
//! The main routine, [`maximize_spectral_entropy`], drives the spectral
//! entropy of the effective channel towards its upper bound
//! `ln min(M, N)`, which is attained exactly when all singular values are
//! equal (the channel is a scaled unitary). Amplitudes stay fixed and only
//! the phases move.
//!
//! # Gradient
//!
//! With `H = √G_d H_env + √G_r F diag(c) G` and `c_ℓ = β_ℓ e^{jθ_ℓ}`,
//!
//! ```text
//! ∂H/∂θ_ℓ   = √G_r · j c_ℓ · f_ℓ g_ℓ          (column ℓ of F times row ℓ of G)
//! ∂σ_i/∂θ_ℓ = Re(u_i^H (∂H/∂θ_ℓ) v_i)         (simple, nonzero σ_i)
//! ∂SE/∂σ_i  = -(ln p_i + SE) / Σ_j σ_j,        p_i = σ_i / Σ_j σ_j
//! ```
//!
//! When two singular values nearly coincide, or the smallest one vanishes,
//! the perturbation identity is not usable and the iterate falls back to
//! central finite differences.
//!
//! # Iteration
//!
//! Gradient ascent on the phases with either a fixed step or an Armijo
//! backtracking line search. Updates are wrapped onto `[-π, π]` by default
//! (the phases are circular); clamping to the box is available as
//! [`PhaseUpdate::Clamped`].

use crate::channel::{cascade, RisChannel, RisConfig, Scene};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::metrics::{max_spectral_entropy, spectral_entropy_from_singular_values};
use crate::rng::{stream, uniform_phase};
use crate::scalar::{unit_phasor, wrap_phase, Complex, Real};

/// Armijo backtracking parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearch<T> {
    pub initial_step: T,
    pub shrink: T,
    pub sufficient_increase: T,
    pub max_backtracks: usize,
    /// Factor applied to the last accepted step to seed the next search
    /// (default 2). `None` restarts every search from `initial_step`, which
    /// needs hundreds of iterations on 4×4 channels with 100 elements.
    pub warm_start: Option<T>,
}

impl<T: Real> Default for LineSearch<T> {
    fn default() -> Self {
        Self {
            initial_step: T::one(),
            shrink: T::lit(0.5),
            sufficient_increase: T::lit(1e-4),
            max_backtracks: 30,
            warm_start: Some(T::lit(2.0)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepControl<T> {
    Fixed(T),
    Backtracking(LineSearch<T>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GradientMode<T> {
    Analytic,
    /// Central differences with step `h`.
    FiniteDifference { step: T },
}

/// How a step that leaves `[-π, π]` is brought back.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseUpdate {
    #[default]
    Wrapped,
    Clamped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptOptions<T> {
    pub max_iterations: usize,
    /// Stop once `SE ≥ ln min(M, N) − se_tolerance`.
    pub se_tolerance: T,
    pub step_control: StepControl<T>,
    pub gradient_mode: GradientMode<T>,
    pub phase_update: PhaseUpdate,
    /// Seed for the uniform initial phases.
    pub seed: u64,
    /// Fixed element amplitudes; `None` means all ones.
    pub amplitudes: Option<Vec<T>>,
}

impl<T: Real> Default for OptOptions<T> {
    fn default() -> Self {
        Self {
            max_iterations: 1000,
            se_tolerance: T::lit(1e-4),
            step_control: StepControl::Backtracking(LineSearch::default()),
            gradient_mode: GradientMode::Analytic,
            phase_update: PhaseUpdate::Wrapped,
            seed: 0,
            amplitudes: None,
        }
    }
}

impl<T: Real> OptOptions<T> {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    fn validate(&self, l: usize) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be at least 1".into()));
        }
        if !(self.se_tolerance > T::zero()) {
            return Err(Error::InvalidParameter("se_tolerance must be positive".into()));
        }
        if let GradientMode::FiniteDifference { step } = self.gradient_mode {
            if !(step > T::zero()) {
                return Err(Error::InvalidParameter("finite-difference step must be positive".into()));
            }
        }
        match self.step_control {
            StepControl::Fixed(t) if !(t > T::zero()) => {
                return Err(Error::InvalidParameter("fixed step must be positive".into()))
            }
            StepControl::Backtracking(ls)
                if !(ls.initial_step > T::zero())
                    || !(ls.shrink > T::zero() && ls.shrink < T::one())
                    || !(ls.sufficient_increase >= T::zero()) =>
            {
                return Err(Error::InvalidParameter("invalid line-search parameters".into()))
            }
            _ => {}
        }
        if let Some(a) = &self.amplitudes {
            if a.len() != l {
                return Err(Error::InvalidDimension(format!(
                    "{} amplitudes for {l} RIS elements",
                    a.len()
                )));
            }
        }
        Ok(())
    }
}

/// Why the iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Spectral entropy reached the bound within tolerance.
    BoundReached,
    /// Gradient norm fell below `1e-8`.
    SmallGradient,
    MaxIterations,
    /// 20 consecutive iterations without improvement.
    Stalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptResult<T> {
    pub phases: Vec<T>,
    /// Spectral entropy at the start and after every iteration.
    pub objective_trace: Vec<T>,
    pub converged: bool,
    pub iterations: usize,
    pub termination: Termination,
}

impl<T: Real> OptResult<T> {
    pub fn final_se(&self) -> T {
        *self.objective_trace.last().expect("trace holds the initial value")
    }
}

const GRADIENT_FLOOR: f64 = 1e-8;
const STALL_LIMIT: usize = 20;
const GAP_TOL: f64 = 1e-10;
const FALLBACK_FD_STEP: f64 = 1e-6;

/// The spectral entropy as a function of the RIS phases.
struct Objective<T> {
    direct: ComplexMatrix<T>,
    f: ComplexMatrix<T>,
    g: ComplexMatrix<T>,
    amplitudes: Vec<T>,
    sqrt_gr: T,
}

impl<T: Real> Objective<T> {
    fn new(scene: &Scene<T>, amplitudes: Option<&[T]>) -> Result<Self> {
        let (f, g) = match scene.ris() {
            RisChannel::Dyadic { f, g } => (f.clone(), g.clone()),
            RisChannel::Spatial { .. } => scene.dyadic_factors()?,
        };
        let amplitudes = match amplitudes {
            Some(a) => {
                if a.iter().any(|b| !(*b >= T::zero() && *b <= T::one())) {
                    return Err(Error::InvalidParameter("amplitudes must lie in [0, 1]".into()));
                }
                a.to_vec()
            }
            None => vec![T::one(); scene.l()],
        };
        Ok(Self {
            direct: scene.h_env().scale(scene.g_d().sqrt()),
            f,
            g,
            amplitudes,
            sqrt_gr: scene.g_r().sqrt(),
        })
    }

    fn coefficients(&self, phases: &[T]) -> Vec<Complex<T>> {
        self.amplitudes
            .iter()
            .zip(phases)
            .map(|(&b, &t)| unit_phasor(t) * (b * self.sqrt_gr))
            .collect()
    }

    fn channel(&self, phases: &[T]) -> ComplexMatrix<T> {
        let ris = cascade(&self.f, &self.coefficients(phases), &self.g);
        self.direct.add(&ris).expect("consistent scene")
    }

    fn value(&self, phases: &[T]) -> Result<T> {
        let s = self.channel(phases).singular_values();
        if s[0] == T::zero() {
            return Err(Error::DegenerateInput("effective channel is zero".into()));
        }
        Ok(spectral_entropy_from_singular_values(&s))
    }

    /// `None` when the spectrum is too degenerate for the perturbation identity.
    fn analytic_gradient(&self, phases: &[T]) -> Result<Option<Vec<T>>> {
        let l = phases.len();
        let h = self.channel(phases);
        let svd = h.svd();
        let s = &svd.singular_values;
        let k = s.len();
        if s[0] == T::zero() {
            return Err(Error::DegenerateInput("effective channel is zero".into()));
        }
        if k == 1 || self.sqrt_gr == T::zero() {
            return Ok(Some(vec![T::zero(); l]));
        }
        let smax = s[0];
        let gap_tol = smax * T::lit(GAP_TOL);
        if s[k - 1] <= gap_tol || s.windows(2).any(|w| w[0] - w[1] < gap_tol) {
            return Ok(None);
        }
        let total: T = s.iter().copied().sum();
        let se = spectral_entropy_from_singular_values(s);
        let weights: Vec<T> = s.iter().map(|&x| -((x / total).ln() + se) / total).collect();

        let (n, m) = h.shape();
        let coeffs = self.coefficients(phases);
        let j = Complex::new(T::zero(), T::one());
        let mut grad = vec![T::zero(); l];
        for (ell, gr) in grad.iter_mut().enumerate() {
            let dc = j * coeffs[ell];
            let mut acc = T::zero();
            for (i, &w) in weights.iter().enumerate() {
                // (U^H F)[i, ell] and (G V)[ell, i]
                let mut uf = Complex::new(T::zero(), T::zero());
                for r in 0..n {
                    uf = uf + svd.u[(r, i)].conj() * self.f[(r, ell)];
                }
                let mut gv = Complex::new(T::zero(), T::zero());
                for c in 0..m {
                    gv = gv + self.g[(ell, c)] * svd.v[(c, i)];
                }
                acc = acc + w * (dc * uf * gv).re;
            }
            *gr = acc;
        }
        Ok(Some(grad))
    }

    fn fd_gradient(&self, phases: &[T], h: T) -> Result<Vec<T>> {
        let mut probe = phases.to_vec();
        let two_h = h + h;
        (0..phases.len())
            .map(|ell| {
                let orig = probe[ell];
                probe[ell] = orig + h;
                let up = self.value(&probe)?;
                probe[ell] = orig - h;
                let down = self.value(&probe)?;
                probe[ell] = orig;
                Ok((up - down) / two_h)
            })
            .collect()
    }

    fn gradient(&self, phases: &[T], mode: GradientMode<T>) -> Result<Vec<T>> {
        if self.sqrt_gr == T::zero() {
            return Ok(vec![T::zero(); phases.len()]);
        }
        match mode {
            GradientMode::Analytic => match self.analytic_gradient(phases)? {
                Some(g) => Ok(g),
                None => self.fd_gradient(phases, T::lit(FALLBACK_FD_STEP)),
            },
            GradientMode::FiniteDifference { step } => self.fd_gradient(phases, step),
        }
    }
}

/// Gradient of the spectral entropy of `effective_channel(scene, config)`
/// with respect to the phases, amplitudes held at `config.amplitudes()`.
pub fn se_gradient<T: Real>(
    scene: &Scene<T>,
    config: &RisConfig<T>,
    mode: GradientMode<T>,
) -> Result<Vec<T>> {
    if config.len() != scene.l() {
        return Err(Error::InvalidDimension(format!(
            "configuration has {} elements, scene has {}",
            config.len(),
            scene.l()
        )));
    }
    let objective = Objective::new(scene, Some(config.amplitudes()))?;
    objective.gradient(config.phases(), mode)
}

/// I.i.d. uniform phases on `[-π, π)` drawn from `seed`.
pub fn initial_phases<T: Real>(l: usize, seed: u64) -> Vec<T> {
    let mut rng = stream(seed, &[]);
    (0..l).map(|_| uniform_phase(&mut rng)).collect()
}

/// Maximizes the spectral entropy starting from phases drawn from
/// `options.seed`.
pub fn maximize_spectral_entropy<T: Real>(scene: &Scene<T>, options: &OptOptions<T>) -> Result<OptResult<T>> {
    let start = initial_phases(scene.l(), options.seed);
    maximize_spectral_entropy_from(scene, &start, options)
}

fn apply_step<T: Real>(update: PhaseUpdate, theta: &[T], dir: &[T], t: T) -> Vec<T> {
    let pi = T::PI();
    theta
        .iter()
        .zip(dir)
        .map(|(&x, &d)| {
            let y = x + t * d;
            match update {
                PhaseUpdate::Wrapped => wrap_phase(y),
                PhaseUpdate::Clamped => y.max(-pi).min(pi),
            }
        })
        .collect()
}

/// Directional increase `<g, Δ>` predicted for a step. For wrapped updates
/// the displacement is `t·g` itself; for clamped updates it is the
/// projected displacement.
fn predicted_increase<T: Real>(update: PhaseUpdate, grad: &[T], from: &[T], to: &[T], t: T) -> T {
    match update {
        PhaseUpdate::Wrapped => t * grad.iter().map(|&g| g * g).sum::<T>(),
        PhaseUpdate::Clamped => grad
            .iter()
            .zip(from.iter().zip(to))
            .map(|(&g, (&a, &b))| g * (b - a))
            .sum(),
    }
}

/// Gradient with components that push against an active bound removed.
fn projected_gradient_norm<T: Real>(update: PhaseUpdate, theta: &[T], grad: &[T]) -> T {
    let pi = T::PI();
    grad.iter()
        .zip(theta)
        .map(|(&g, &x)| match update {
            PhaseUpdate::Clamped if (x >= pi && g > T::zero()) || (x <= -pi && g < T::zero()) => T::zero(),
            _ => g * g,
        })
        .sum::<T>()
        .sqrt()
}

/// Maximizes the spectral entropy from the given initial phases.
pub fn maximize_spectral_entropy_from<T: Real>(
    scene: &Scene<T>,
    initial: &[T],
    options: &OptOptions<T>,
) -> Result<OptResult<T>> {
    let l = scene.l();
    options.validate(l)?;
    if initial.len() != l {
        return Err(Error::InvalidDimension(format!(
            "{} initial phases for {l} RIS elements",
            initial.len()
        )));
    }
    let objective = Objective::new(scene, options.amplitudes.as_deref())?;
    let update = options.phase_update;
    let pi = T::PI();
    let mut theta: Vec<T> = initial
        .iter()
        .map(|&x| match update {
            PhaseUpdate::Wrapped => wrap_phase(x),
            PhaseUpdate::Clamped => x.max(-pi).min(pi),
        })
        .collect();
    let mut se = objective.value(&theta)?;
    let target = max_spectral_entropy::<T>(scene.n(), scene.m()) - options.se_tolerance;
    let mut trace = vec![se];
    let floor = T::lit(GRADIENT_FLOOR);

    if se >= target {
        return Ok(OptResult {
            phases: theta,
            objective_trace: trace,
            converged: true,
            iterations: 0,
            termination: Termination::BoundReached,
        });
    }

    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;
    let mut stalled_for = 0;
    let mut next_step = match options.step_control {
        StepControl::Fixed(t) => t,
        StepControl::Backtracking(ls) => ls.initial_step,
    };

    while iterations < options.max_iterations {
        let grad = objective.gradient(&theta, options.gradient_mode)?;
        if projected_gradient_norm(update, &theta, &grad) < floor {
            termination = Termination::SmallGradient;
            break;
        }
        iterations += 1;

        let previous = se;
        match options.step_control {
            StepControl::Fixed(t) => {
                theta = apply_step(update, &theta, &grad, t);
                se = objective.value(&theta)?;
            }
            StepControl::Backtracking(ls) => {
                let mut t = next_step;
                for _ in 0..=ls.max_backtracks {
                    let cand = apply_step(update, &theta, &grad, t);
                    let value = objective.value(&cand)?;
                    let needed = ls.sufficient_increase * predicted_increase(update, &grad, &theta, &cand, t);
                    if value >= se + needed && value >= se {
                        theta = cand;
                        se = value;
                        break;
                    }
                    t = t * ls.shrink;
                }
                next_step = match ls.warm_start {
                    Some(grow) => (t * grow)
                        .max(ls.initial_step * T::lit(1e-12))
                        .min(ls.initial_step * T::lit(1e12)),
                    None => ls.initial_step,
                };
            }
        }
        trace.push(se);

        if se > previous {
            stalled_for = 0;
        } else {
            stalled_for += 1;
        }
        if se >= target {
            termination = Termination::BoundReached;
            break;
        }
        if stalled_for >= STALL_LIMIT {
            termination = Termination::Stalled;
            break;
        }
    }

    Ok(OptResult {
        phases: theta,
        objective_trace: trace,
        converged: termination == Termination::BoundReached,
        iterations,
        termination,
    })
}

/// Upper bound on `κ` implied by `SE ≥ ln k − ε` for `k` singular values.
///
/// `ln k − SE` is the Kullback-Leibler divergence of the normalized
/// spectrum from uniform, so Pinsker's inequality bounds its L1 distance by
/// `√(2ε)` and every `p_i` lies within `√(2ε)/2` of `1/k`.
pub fn kappa_certificate<T: Real>(k: usize, se_tolerance: T) -> T {
    if k <= 1 {
        return T::one();
    }
    let uniform = T::one() / T::count(k);
    let spread = (T::lit(2.0) * se_tolerance).sqrt() / T::lit(2.0);
    if spread >= uniform {
        T::infinity()
    } else {
        (uniform + spread) / (uniform - spread)
    }
}

/// Nearest level of the `2^bits` uniform grid `{−π + 2πk/2^bits}` under
/// circular distance. Ties go to the numerically lower level.
pub fn quantize_phases<T: Real>(phases: &[T], bits: u32) -> Result<Vec<T>> {
    if bits == 0 {
        return Err(Error::InvalidParameter("quantization needs at least one bit".into()));
    }
    if bits > 24 {
        return Err(Error::InvalidParameter(format!("{bits} bits is beyond phase resolution")));
    }
    let levels = 1usize << bits;
    let pi = T::PI();
    let two_pi = pi + pi;
    let width = two_pi / T::count(levels);
    let level = |k: usize| -pi + two_pi * T::count(k) / T::count(levels);
    let circular = |a: T, b: T| {
        let d = (a - b).abs() % two_pi;
        d.min(two_pi - d)
    };
    Ok(phases
        .iter()
        .map(|&theta| {
            let theta = wrap_phase(theta);
            let pos = ((theta + pi) / width).floor();
            let base = pos.to_usize().unwrap_or(0).min(levels);
            let mut best: Option<(T, T)> = None;
            for k in [base % levels, (base + 1) % levels, (base + levels - 1) % levels] {
                let lv = level(k);
                let d = circular(theta, lv);
                best = match best {
                    Some((bd, bl)) if bd < d || (bd == d && bl <= lv) => Some((bd, bl)),
                    _ => Some((d, lv)),
                };
            }
            best.expect("three candidates").1
        })
        .collect())
}

/// Phases that co-phase every cascaded path `f_ℓ g_ℓ` with the direct path
/// `h_d` at a single-antenna receiver. With `h_d = 0` the reference angle is
/// 0; elements with `f_ℓ g_ℓ = 0` get phase 0.
pub fn cophase_gain_max<T: Real>(direct: Complex<T>, g: &[Complex<T>], f: &[Complex<T>]) -> Result<Vec<T>> {
    if g.len() != f.len() {
        return Err(Error::InvalidDimension(format!(
            "{} transmit-side and {} receive-side gains",
            g.len(),
            f.len()
        )));
    }
    let reference = if direct.norm_sqr() == T::zero() {
        T::zero()
    } else {
        direct.arg()
    };
    Ok(f.iter()
        .zip(g)
        .map(|(&fl, &gl)| {
            let path = fl * gl;
            if path.norm_sqr() == T::zero() {
                T::zero()
            } else {
                wrap_phase(reference - path.arg())
            }
        })
        .collect())
}

/// `|h_d + Σ_ℓ f_ℓ g_ℓ e^{jθ_ℓ}|` for unit amplitudes.
pub fn single_antenna_gain<T: Real>(direct: Complex<T>, g: &[Complex<T>], f: &[Complex<T>], phases: &[T]) -> T {
    f.iter()
        .zip(g)
        .zip(phases)
        .fold(direct, |acc, ((&fl, &gl), &t)| acc + fl * gl * unit_phasor(t))
        .norm()
}
