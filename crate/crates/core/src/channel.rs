//! RIS-augmented MIMO channel construction.
//!
//! The effective channel between an `M`-antenna transmitter and an
//! `N`-antenna receiver is
//!
//! ```text
//! H_eff = √G_d · H_env + √G_r · H_RIS
//! ```
//!
//! where `H_RIS` is either the cascaded (dyadic backscatter) product
//! `F · Q · G` with the diagonal interaction matrix `Q`, or a sum of rank-one
//! steering-vector terms, one per RIS element.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::rng::{complex_gaussian, uniform_phase};
use crate::scalar::{unit_phasor, wrap_phase, Complex, Real};

/// Amplitude and phase state of every RIS element.
#[derive(Debug, Clone, PartialEq)]
pub struct RisConfig<T> {
    amplitudes: Vec<T>,
    phases: Vec<T>,
}

impl<T: Real> RisConfig<T> {
    /// Builds a configuration. Phases are wrapped onto `[-π, π]`.
    pub fn new(amplitudes: Vec<T>, phases: Vec<T>) -> Result<Self> {
        if amplitudes.len() != phases.len() {
            return Err(Error::InvalidDimension(format!(
                "{} amplitudes but {} phases",
                amplitudes.len(),
                phases.len()
            )));
        }
        if amplitudes.is_empty() {
            return Err(Error::InvalidDimension("RIS needs at least one element".into()));
        }
        if let Some(b) = amplitudes
            .iter()
            .find(|b| !b.is_finite() || **b < T::zero() || **b > T::one())
        {
            return Err(Error::InvalidParameter(format!(
                "amplitude {b} outside [0, 1]"
            )));
        }
        if phases.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("RIS phases"));
        }
        Ok(Self {
            amplitudes,
            phases: phases.into_iter().map(wrap_phase).collect(),
        })
    }

    /// Unit-amplitude configuration with the given phases.
    pub fn with_phases(phases: Vec<T>) -> Result<Self> {
        Self::new(vec![T::one(); phases.len()], phases)
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn amplitudes(&self) -> &[T] {
        &self.amplitudes
    }

    pub fn phases(&self) -> &[T] {
        &self.phases
    }

    /// Per-element reflection coefficients `β_i e^{jθ_i}`.
    pub fn coefficients(&self) -> Vec<Complex<T>> {
        self.amplitudes
            .iter()
            .zip(&self.phases)
            .map(|(&b, &t)| unit_phasor(t) * b)
            .collect()
    }
}

/// Array layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrayKind {
    UniformLinear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry<T> {
    kind: ArrayKind,
    num_elements: usize,
    spacing: T,
}

impl<T: Real> ArrayGeometry<T> {
    /// Uniform linear array with element spacing given in wavelengths.
    pub fn uniform_linear(num_elements: usize, spacing: T) -> Result<Self> {
        if num_elements == 0 {
            return Err(Error::InvalidGeometry("array needs at least one element".into()));
        }
        if !(spacing > T::zero()) || !spacing.is_finite() {
            return Err(Error::InvalidGeometry(format!("spacing {spacing} must be positive")));
        }
        Ok(Self {
            kind: ArrayKind::UniformLinear,
            num_elements,
            spacing,
        })
    }

    /// Half-wavelength uniform linear array.
    pub fn half_wavelength(num_elements: usize) -> Result<Self> {
        Self::uniform_linear(num_elements, T::lit(0.5))
    }

    pub fn kind(&self) -> ArrayKind {
        self.kind
    }

    pub fn num_elements(&self) -> usize {
        self.num_elements
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }
}

/// One controllable propagation path through a RIS element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialPath<T> {
    pub alpha: Complex<T>,
    pub q: Complex<T>,
    pub rx_azimuth: T,
    pub rx_elevation: T,
    pub tx_azimuth: T,
    pub tx_elevation: T,
}

impl<T: Real> SpatialPath<T> {
    pub fn new(
        alpha: Complex<T>,
        q: Complex<T>,
        (rx_azimuth, rx_elevation): (T, T),
        (tx_azimuth, tx_elevation): (T, T),
    ) -> Result<Self> {
        let path = Self {
            alpha,
            q,
            rx_azimuth,
            rx_elevation,
            tx_azimuth,
            tx_elevation,
        };
        path.validate()?;
        Ok(path)
    }

    fn validate(&self) -> Result<()> {
        // small slack so that unit-modulus phasors computed in floating point pass
        if !(self.q.norm() <= T::one() + T::epsilon() * T::lit(8.0)) {
            return Err(Error::InvalidParameter(format!(
                "|q| = {} exceeds 1 for a passive element",
                self.q.norm()
            )));
        }
        if !self.alpha.re.is_finite() || !self.alpha.im.is_finite() {
            return Err(Error::NonFinite("path gain"));
        }
        let pi = T::PI();
        let half = T::FRAC_PI_2();
        for az in [self.rx_azimuth, self.tx_azimuth] {
            if !(az >= -pi && az <= pi) {
                return Err(Error::InvalidGeometry(format!("azimuth {az} outside [-π, π]")));
            }
        }
        for el in [self.rx_elevation, self.tx_elevation] {
            if !(el >= -half && el <= half) {
                return Err(Error::InvalidGeometry(format!(
                    "elevation {el} outside [-π/2, π/2]"
                )));
            }
        }
        Ok(())
    }
}

/// Channel through the RIS.
#[derive(Debug, Clone, PartialEq)]
pub enum RisChannel<T> {
    /// `F` (`N × L`, RIS to receiver) and `G` (`L × M`, transmitter to RIS).
    Dyadic {
        f: ComplexMatrix<T>,
        g: ComplexMatrix<T>,
    },
    /// One path per RIS element.
    Spatial {
        paths: Vec<SpatialPath<T>>,
        tx: ArrayGeometry<T>,
        rx: ArrayGeometry<T>,
    },
}

/// All constituents of the effective channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene<T> {
    m: usize,
    n: usize,
    l: usize,
    h_env: ComplexMatrix<T>,
    ris: RisChannel<T>,
    g_d: T,
    g_r: T,
}

impl<T: Real> Scene<T> {
    pub fn dyadic(
        h_env: ComplexMatrix<T>,
        f: ComplexMatrix<T>,
        g: ComplexMatrix<T>,
        g_d: T,
        g_r: T,
    ) -> Result<Self> {
        let (n, m) = h_env.shape();
        let l = f.cols();
        if f.rows() != n || g.rows() != l || g.cols() != m {
            return Err(Error::InvalidDimension(format!(
                "H_env {n}x{m}, F {:?}, G {:?} are inconsistent",
                f.shape(),
                g.shape()
            )));
        }
        Self::finish(m, n, l, h_env, RisChannel::Dyadic { f, g }, g_d, g_r)
    }

    pub fn spatial(
        h_env: ComplexMatrix<T>,
        paths: Vec<SpatialPath<T>>,
        tx: ArrayGeometry<T>,
        rx: ArrayGeometry<T>,
        g_d: T,
        g_r: T,
    ) -> Result<Self> {
        let (n, m) = h_env.shape();
        if tx.num_elements() != m || rx.num_elements() != n {
            return Err(Error::InvalidDimension(format!(
                "H_env is {n}x{m} but arrays have {} rx and {} tx elements",
                rx.num_elements(),
                tx.num_elements()
            )));
        }
        if paths.is_empty() {
            return Err(Error::InvalidDimension("spatial scene needs at least one path".into()));
        }
        for p in &paths {
            p.validate()?;
        }
        let l = paths.len();
        Self::finish(m, n, l, h_env, RisChannel::Spatial { paths, tx, rx }, g_d, g_r)
    }

    fn finish(
        m: usize,
        n: usize,
        l: usize,
        h_env: ComplexMatrix<T>,
        ris: RisChannel<T>,
        g_d: T,
        g_r: T,
    ) -> Result<Self> {
        for (name, v) in [("G_d", g_d), ("G_r", g_r)] {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be nonnegative")));
            }
        }
        Ok(Self {
            m,
            n,
            l,
            h_env,
            ris,
            g_d,
            g_r,
        })
    }

    /// Transmit antennas.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Receive antennas.
    pub fn n(&self) -> usize {
        self.n
    }

    /// RIS elements.
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn h_env(&self) -> &ComplexMatrix<T> {
        &self.h_env
    }

    pub fn ris(&self) -> &RisChannel<T> {
        &self.ris
    }

    pub fn g_d(&self) -> T {
        self.g_d
    }

    pub fn g_r(&self) -> T {
        self.g_r
    }

    /// `(F, G)` such that `H_RIS = F · diag(c) · G` for reflection
    /// coefficients `c`. For the spatial model the columns of `F` are the
    /// receive steering vectors and the rows of `G` are `α_ℓ a_T^H`.
    pub fn dyadic_factors(&self) -> Result<(ComplexMatrix<T>, ComplexMatrix<T>)> {
        match &self.ris {
            RisChannel::Dyadic { f, g } => Ok((f.clone(), g.clone())),
            RisChannel::Spatial { paths, tx, rx } => {
                let a_r: Vec<Vec<Complex<T>>> = paths
                    .iter()
                    .map(|p| steering_vector(rx, p.rx_azimuth, p.rx_elevation))
                    .collect();
                let a_t: Vec<Vec<Complex<T>>> = paths
                    .iter()
                    .map(|p| steering_vector(tx, p.tx_azimuth, p.tx_elevation))
                    .collect();
                let f = ComplexMatrix::from_fn(self.n, self.l, |r, l| a_r[l][r])?;
                let g = ComplexMatrix::from_fn(self.l, self.m, |l, c| paths[l].alpha * a_t[l][c].conj())?;
                Ok((f, g))
            }
        }
    }
}

/// I.i.d. circularly-symmetric complex Gaussian matrix with unit variance.
pub fn sample_rayleigh<T: Real, R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> Result<ComplexMatrix<T>> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidDimension(format!(
            "cannot sample a {rows}x{cols} channel"
        )));
    }
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng, 1.0))
}

/// `L` spatial paths with Gaussian gains of the given variance, uniform
/// azimuths, uniform elevations and `q = 1`.
pub fn sample_spatial_paths<T: Real, R: Rng + ?Sized>(
    l: usize,
    alpha_variance: f64,
    rng: &mut R,
) -> Result<Vec<SpatialPath<T>>> {
    let half = T::lit(0.5);
    (0..l)
        .map(|_| {
            let alpha = complex_gaussian(rng, alpha_variance);
            let rx_az = uniform_phase(rng);
            let rx_el = uniform_phase::<T, _>(rng) * half;
            let tx_az = uniform_phase(rng);
            let tx_el = uniform_phase::<T, _>(rng) * half;
            SpatialPath::new(alpha, Complex::new(T::one(), T::zero()), (rx_az, rx_el), (tx_az, tx_el))
        })
        .collect()
}

/// Diagonal interaction matrix `Q = diag(β_i e^{jθ_i})`.
pub fn interaction_matrix<T: Real>(config: &RisConfig<T>) -> ComplexMatrix<T> {
    ComplexMatrix::diag(&config.coefficients()).expect("config is nonempty")
}

/// Scales column `ℓ` of `F` by `c_ℓ` and multiplies by `G`, i.e. `F·diag(c)·G`
/// without materializing the diagonal.
pub(crate) fn cascade<T: Real>(
    f: &ComplexMatrix<T>,
    coeffs: &[Complex<T>],
    g: &ComplexMatrix<T>,
) -> ComplexMatrix<T> {
    let (n, l) = f.shape();
    let m = g.cols();
    let mut out = vec![Complex::new(T::zero(), T::zero()); n * m];
    for r in 0..n {
        let f_row = f.row(r);
        let o = &mut out[r * m..(r + 1) * m];
        for k in 0..l {
            let a = f_row[k] * coeffs[k];
            for (dst, &b) in o.iter_mut().zip(g.row(k)) {
                *dst = *dst + a * b;
            }
        }
    }
    ComplexMatrix::new(n, m, out).expect("shapes checked by caller")
}

/// Cascaded channel `F · Q · G`.
pub fn assemble_dyadic<T: Real>(
    f: &ComplexMatrix<T>,
    config: &RisConfig<T>,
    g: &ComplexMatrix<T>,
) -> Result<ComplexMatrix<T>> {
    let l = config.len();
    if f.cols() != l || g.rows() != l {
        return Err(Error::InvalidDimension(format!(
            "F {:?} and G {:?} do not match {l} RIS elements",
            f.shape(),
            g.shape()
        )));
    }
    Ok(cascade(f, &config.coefficients(), g))
}

/// Array response; for a uniform linear array entry `k` is
/// `exp(j·2π·d·k·sin(az)·cos(el))`.
pub fn steering_vector<T: Real>(geometry: &ArrayGeometry<T>, azimuth: T, elevation: T) -> Vec<Complex<T>> {
    match geometry.kind {
        ArrayKind::UniformLinear => {
            let step = T::TAU() * geometry.spacing * azimuth.sin() * elevation.cos();
            (0..geometry.num_elements)
                .map(|k| unit_phasor(step * T::count(k)))
                .collect()
        }
    }
}

/// `Σ_ℓ α_ℓ q_ℓ a_R a_T^H` using each path's own `q_ℓ`. An empty path list
/// gives the zero matrix.
pub fn assemble_spatial<T: Real>(
    paths: &[SpatialPath<T>],
    tx: &ArrayGeometry<T>,
    rx: &ArrayGeometry<T>,
) -> Result<ComplexMatrix<T>> {
    let mut h = ComplexMatrix::zeros(rx.num_elements(), tx.num_elements())?;
    for p in paths {
        p.validate()?;
        let a_r = steering_vector(rx, p.rx_azimuth, p.rx_elevation);
        let a_t = steering_vector(tx, p.tx_azimuth, p.tx_elevation);
        let w = p.alpha * p.q;
        for (r, &ar) in a_r.iter().enumerate() {
            for (c, &at) in a_t.iter().enumerate() {
                h[(r, c)] = h[(r, c)] + w * ar * at.conj();
            }
        }
    }
    Ok(h)
}

/// `H_RIS` for the given configuration. For spatial scenes the
/// configuration replaces each path's `q_ℓ`.
pub fn ris_channel<T: Real>(scene: &Scene<T>, config: &RisConfig<T>) -> Result<ComplexMatrix<T>> {
    if config.len() != scene.l {
        return Err(Error::InvalidDimension(format!(
            "configuration has {} elements, scene has {}",
            config.len(),
            scene.l
        )));
    }
    match &scene.ris {
        RisChannel::Dyadic { f, g } => assemble_dyadic(f, config, g),
        RisChannel::Spatial { paths, tx, rx } => {
            let controlled: Vec<SpatialPath<T>> = paths
                .iter()
                .zip(config.coefficients())
                .map(|(p, q)| SpatialPath { q, ..*p })
                .collect();
            assemble_spatial(&controlled, tx, rx)
        }
    }
}

/// `√G_d · H_env + √G_r · H_RIS`.
pub fn effective_channel<T: Real>(scene: &Scene<T>, config: &RisConfig<T>) -> Result<ComplexMatrix<T>> {
    let h_ris = ris_channel(scene, config)?;
    let direct = scene.h_env.scale(scene.g_d.sqrt());
    direct.add(&h_ris.scale(scene.g_r.sqrt()))
}
