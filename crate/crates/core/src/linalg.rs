//! Dense complex matrices.
//!
//! [`ComplexMatrix`] is a small row-major container sized for MIMO channel
//! work (a handful of antennas, up to a few hundred RIS elements). The SVD is
//! a one-sided (Hestenes) Jacobi iteration, which gives singular values to
//! high relative accuracy and is fast at these sizes.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::{Complex, Real};

/// Dense complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

/// Thin singular value decomposition `A = U Σ V^H`.
///
/// With `k = min(rows, cols)`, `u` is `rows × k`, `v` is `cols × k` and
/// `singular_values` holds `k` values in descending order.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    pub u: ComplexMatrix<T>,
    pub singular_values: Vec<T>,
    pub v: ComplexMatrix<T>,
}

fn check_dims(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidDimension(format!(
            "matrix dimensions must be positive, got {rows}x{cols}"
        )));
    }
    Ok(())
}

impl<T: Real> ComplexMatrix<T> {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        check_dims(rows, cols)?;
        if data.len() != rows * cols {
            return Err(Error::InvalidDimension(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidDimension("ragged rows".into()));
        }
        Self::new(r, c, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        check_dims(rows, cols)?;
        Ok(Self {
            rows,
            cols,
            data: vec![Complex::new(T::zero(), T::zero()); rows * cols],
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::eye(n, n)
    }

    /// `rows × cols` matrix with ones on the main diagonal.
    pub fn eye(rows: usize, cols: usize) -> Result<Self> {
        let mut m = Self::zeros(rows, cols)?;
        for i in 0..rows.min(cols) {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        Ok(m)
    }

    pub fn diag(entries: &[Complex<T>]) -> Result<Self> {
        let mut m = Self::zeros(entries.len(), entries.len())?;
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        Ok(m)
    }

    pub fn from_fn<F>(rows: usize, cols: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Complex<T>,
    {
        check_dims(rows, cols)?;
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self::new(rows, cols, data)
    }

    /// Outer product `a b^H`.
    pub fn outer(a: &[Complex<T>], b: &[Complex<T>]) -> Result<Self> {
        Self::from_fn(a.len(), b.len(), |r, c| a[r] * b[c].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex<T>> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[Complex<T>] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self[(r, c)].conj());
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::InvalidDimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols)?;
        for i in 0..self.rows {
            let lhs_row = self.row(i);
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (k, &a) in lhs_row.iter().enumerate() {
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o = *o + a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if x.len() != self.cols {
            return Err(Error::InvalidDimension(format!(
                "vector of length {} for a {}x{} matrix",
                x.len(),
                self.rows,
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (&a, &b)| acc + a * b)
            })
            .collect())
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_complex(&self, s: Complex<T>) -> Self {
        self.map(|z| z * s)
    }

    pub fn map<F: Fn(Complex<T>) -> Complex<T>>(&self, f: F) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    fn zip_with<F>(&self, rhs: &Self, f: F) -> Result<Self>
    where
        F: Fn(Complex<T>, Complex<T>) -> Complex<T>,
    {
        if self.shape() != rhs.shape() {
            return Err(Error::InvalidDimension(format!(
                "shape mismatch {:?} vs {:?}",
                self.shape(),
                rhs.shape()
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .map(|z| z.norm())
            .fold(T::zero(), |a, b| a.max(b))
    }

    pub fn is_zero(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re == T::zero() && z.im == T::zero())
    }

    /// Largest entrywise magnitude of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        Ok(self.sub(other)?.max_abs())
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Vec<T> {
        // only the column norms of the rotated matrix are needed
        if self.rows >= self.cols {
            jacobi_tall(self, false).1
        } else {
            jacobi_tall(&self.adjoint(), false).1
        }
    }

    pub fn svd(&self) -> Svd<T> {
        if self.rows >= self.cols {
            let (u, s, v) = jacobi_tall(self, true);
            Svd {
                u,
                singular_values: s,
                v: v.expect("vectors requested"),
            }
        } else {
            let (u, s, v) = jacobi_tall(&self.adjoint(), true);
            Svd {
                u: v.expect("vectors requested"),
                singular_values: s,
                v: u,
            }
        }
    }

    /// Moore-Penrose pseudo-inverse through the SVD. Singular values below
    /// `rel_tol · σ_max` are treated as zero.
    pub fn pseudo_inverse(&self, rel_tol: T) -> Self {
        let Svd {
            u,
            singular_values,
            v,
        } = self.svd();
        let cutoff = singular_values.first().copied().unwrap_or(T::zero()) * rel_tol;
        let k = singular_values.len();
        let mut out = ComplexMatrix {
            rows: self.cols,
            cols: self.rows,
            data: vec![Complex::new(T::zero(), T::zero()); self.rows * self.cols],
        };
        for (i, &s) in singular_values.iter().enumerate().take(k) {
            if s <= cutoff || s == T::zero() {
                continue;
            }
            let inv = T::one() / s;
            for r in 0..self.cols {
                let vr = v[(r, i)] * inv;
                for c in 0..self.rows {
                    out[(r, c)] = out[(r, c)] + vr * u[(c, i)].conj();
                }
            }
        }
        out
    }

    /// Solves `self · X = rhs` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        let n = self.rows;
        if self.cols != n || rhs.rows != n {
            return Err(Error::InvalidDimension(format!(
                "solve needs a square system, got {}x{} with rhs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut a = self.clone();
        let mut b = rhs.clone();
        let scale = a.max_abs();
        for col in 0..n {
            let (pivot, mag) = (col..n)
                .map(|r| (r, a[(r, col)].norm()))
                .fold((col, T::zero()), |best, cand| if cand.1 > best.1 { cand } else { best });
            if mag <= scale * T::epsilon() * T::count(n) || mag == T::zero() {
                return Err(Error::SingularChannel(format!(
                    "zero pivot in column {col}"
                )));
            }
            if pivot != col {
                a.swap_rows(pivot, col);
                b.swap_rows(pivot, col);
            }
            let inv = Complex::new(T::one(), T::zero()) / a[(col, col)];
            for r in (col + 1)..n {
                let factor = a[(r, col)] * inv;
                if factor.norm_sqr() == T::zero() {
                    continue;
                }
                for c in col..n {
                    let t = a[(col, c)];
                    a[(r, c)] = a[(r, c)] - factor * t;
                }
                for c in 0..b.cols {
                    let t = b[(col, c)];
                    b[(r, c)] = b[(r, c)] - factor * t;
                }
            }
        }
        for col in (0..n).rev() {
            let inv = Complex::new(T::one(), T::zero()) / a[(col, col)];
            for c in 0..b.cols {
                let mut acc = b[(col, c)];
                for k in (col + 1)..n {
                    acc = acc - a[(col, k)] * b[(k, c)];
                }
                b[(col, c)] = acc * inv;
            }
        }
        Ok(b)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Thin QR factorization by modified Gram-Schmidt, for full column rank
    /// input with `rows ≥ cols`. `Q` is `rows × cols` with orthonormal
    /// columns and `R` is upper triangular with a real nonnegative diagonal.
    pub fn qr(&self) -> Result<(Self, Self)> {
        if self.rows < self.cols {
            return Err(Error::InvalidDimension("qr needs rows >= cols".into()));
        }
        let (m, n) = self.shape();
        let mut q = self.clone();
        let mut r = Self::zeros(n, n)?;
        for j in 0..n {
            for i in 0..j {
                let mut dot = Complex::new(T::zero(), T::zero());
                for k in 0..m {
                    dot = dot + q[(k, i)].conj() * q[(k, j)];
                }
                r[(i, j)] = dot;
                for k in 0..m {
                    let t = q[(k, i)];
                    q[(k, j)] = q[(k, j)] - dot * t;
                }
            }
            let norm = (0..m).map(|k| q[(k, j)].norm_sqr()).sum::<T>().sqrt();
            if norm == T::zero() {
                return Err(Error::SingularChannel("rank-deficient input to qr".into()));
            }
            r[(j, j)] = Complex::new(norm, T::zero());
            for k in 0..m {
                q[(k, j)] = q[(k, j)] / norm;
            }
        }
        Ok((q, r))
    }
}

impl<T> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;

    fn index(&self, (r, c): (usize, usize)) -> &Complex<T> {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of bounds");
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex<T> {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of bounds");
        &mut self.data[r * self.cols + c]
    }
}

const MAX_SWEEPS: usize = 60;

/// One-sided Jacobi on a matrix with `rows ≥ cols`.
///
/// Works column-major internally: `work[j]` is column `j` of `A·V`. Returns
/// `(U, σ, V)`; `V` only when `want_vectors`. `U` is always formed because
/// it falls out of the final normalization.
fn jacobi_tall<T: Real>(
    a: &ComplexMatrix<T>,
    want_vectors: bool,
) -> (ComplexMatrix<T>, Vec<T>, Option<ComplexMatrix<T>>) {
    let (m, n) = a.shape();
    debug_assert!(m >= n);
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let mut work: Vec<Vec<Complex<T>>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<Complex<T>>> = if want_vectors {
        (0..n)
            .map(|j| (0..n).map(|i| if i == j { one } else { zero }).collect())
            .collect()
    } else {
        Vec::new()
    };
    let tol = T::epsilon() * T::count(m).sqrt();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (alpha, beta, gamma) = {
                    let (cp, cq) = (&work[p], &work[q]);
                    let mut alpha = T::zero();
                    let mut beta = T::zero();
                    let mut gamma = zero;
                    for (x, y) in cp.iter().zip(cq) {
                        alpha = alpha + x.norm_sqr();
                        beta = beta + y.norm_sqr();
                        gamma = gamma + x.conj() * y;
                    }
                    (alpha, beta, gamma)
                };
                let g = gamma.norm();
                if g == T::zero() || g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // Make the inner product real, then apply a real rotation.
                let phase = gamma / g;
                let zeta = (beta - alpha) / (g + g);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                let rotate = |cols: &mut Vec<Vec<Complex<T>>>| {
                    let (left, right) = cols.split_at_mut(q);
                    let (cp, cq) = (&mut left[p], &mut right[0]);
                    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
                        let yq = *y * phase.conj();
                        let xp = *x;
                        *x = xp * c - yq * s;
                        *y = xp * s + yq * c;
                    }
                };
                rotate(&mut work);
                if want_vectors {
                    rotate(&mut v);
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<T> = work
        .iter()
        .map(|col| col.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(std::cmp::Ordering::Equal));
    let sigma: Vec<T> = order.iter().map(|&i| norms[i]).collect();

    let smax = sigma.first().copied().unwrap_or(T::zero());
    let null_tol = smax * T::epsilon() * T::count(m.max(n));
    let mut u_cols: Vec<Vec<Complex<T>>> = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for (k, &i) in order.iter().enumerate() {
        if sigma[k] > null_tol && sigma[k] > T::zero() {
            let inv = T::one() / sigma[k];
            u_cols.push(work[i].iter().map(|&z| z * inv).collect());
        } else {
            u_cols.push(vec![zero; m]);
            missing.push(k);
        }
    }
    complete_orthonormal(&mut u_cols, &missing, m);

    let u = ComplexMatrix::from_fn(m, n, |r, c| u_cols[c][r]).expect("nonempty");
    let v = want_vectors.then(|| {
        ComplexMatrix::from_fn(n, n, |r, c| v[order[c]][r]).expect("nonempty")
    });
    (u, sigma, v)
}

/// Fills the listed columns with unit vectors orthogonal to all others.
fn complete_orthonormal<T: Real>(cols: &mut [Vec<Complex<T>>], missing: &[usize], m: usize) {
    let zero = Complex::new(T::zero(), T::zero());
    let mut basis = 0;
    for &k in missing {
        while basis < m {
            let mut cand = vec![zero; m];
            cand[basis] = Complex::new(T::one(), T::zero());
            basis += 1;
            for (j, col) in cols.iter().enumerate() {
                if j == k || col.iter().all(|z| z.norm_sqr() == T::zero()) {
                    continue;
                }
                let dot = col
                    .iter()
                    .zip(&cand)
                    .fold(zero, |acc, (&a, &b)| acc + a.conj() * b);
                for (c, &a) in cand.iter_mut().zip(col) {
                    *c = *c - dot * a;
                }
            }
            let norm = cand.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
            if norm > T::lit(0.5) {
                cols[k] = cand.into_iter().map(|z| z / norm).collect();
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{complex_gaussian, stream};

    type C = Complex<f64>;

    fn random(rows: usize, cols: usize, seed: u64) -> ComplexMatrix<f64> {
        let mut rng = stream(seed, &[]);
        ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(&mut rng, 1.0)).unwrap()
    }

    fn reconstruct(s: &Svd<f64>) -> ComplexMatrix<f64> {
        let k = s.singular_values.len();
        let sigma = ComplexMatrix::diag(
            &s.singular_values
                .iter()
                .map(|&x| C::new(x, 0.0))
                .collect::<Vec<_>>(),
        )
        .unwrap();
        assert_eq!(sigma.rows(), k);
        s.u.matmul(&sigma).unwrap().matmul(&s.v.adjoint()).unwrap()
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(
            ComplexMatrix::<f64>::zeros(0, 3),
            Err(Error::InvalidDimension(_))
        ));
        assert!(ComplexMatrix::<f64>::new(2, 2, vec![C::new(0.0, 0.0); 3]).is_err());
        assert!(matches!(
            ComplexMatrix::new(1, 1, vec![C::new(f64::NAN, 0.0)]),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn svd_reconstructs_tall_wide_and_square() {
        for (i, &(r, c)) in [(4, 4), (6, 3), (2, 5), (1, 7), (7, 1), (8, 8)].iter().enumerate() {
            let a = random(r, c, i as u64);
            let s = a.svd();
            let back = reconstruct(&s);
            assert!(a.max_abs_diff(&back).unwrap() < 1e-12, "{r}x{c}");
            for w in s.singular_values.windows(2) {
                assert!(w[0] >= w[1]);
            }
            let utu = s.u.adjoint().matmul(&s.u).unwrap();
            let vtv = s.v.adjoint().matmul(&s.v).unwrap();
            let k = r.min(c);
            assert!(utu.max_abs_diff(&ComplexMatrix::identity(k).unwrap()).unwrap() < 1e-12);
            assert!(vtv.max_abs_diff(&ComplexMatrix::identity(k).unwrap()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn svd_of_diagonal_and_rank_one() {
        let d = ComplexMatrix::diag(&[C::new(1.0, 0.0), C::new(0.0, -3.0), C::new(2.0, 0.0)]).unwrap();
        let s = d.singular_values();
        assert!((s[0] - 3.0).abs() < 1e-15 && (s[1] - 2.0).abs() < 1e-15 && (s[2] - 1.0).abs() < 1e-15);

        let a = [C::new(1.0, 1.0), C::new(0.0, 2.0), C::new(-1.0, 0.5)];
        let r1 = ComplexMatrix::outer(&a, &a[..2]).unwrap();
        let svd = r1.svd();
        assert!(svd.singular_values[1] < 1e-14);
        // thin U still orthonormal when σ vanishes
        let utu = svd.u.adjoint().matmul(&svd.u).unwrap();
        assert!(utu.max_abs_diff(&ComplexMatrix::identity(2).unwrap()).unwrap() < 1e-12);
        assert!(reconstruct(&svd).max_abs_diff(&r1).unwrap() < 1e-12);
    }

    #[test]
    fn svd_in_single_precision() {
        let a = random(4, 4, 9);
        let a32 = ComplexMatrix::new(
            4,
            4,
            a.as_slice().iter().map(|z| Complex::new(z.re as f32, z.im as f32)).collect(),
        )
        .unwrap();
        let s64 = a.singular_values();
        let s32 = a32.singular_values();
        for (x, y) in s64.iter().zip(&s32) {
            assert!((x - *y as f64).abs() < 1e-4 * s64[0]);
        }
    }

    #[test]
    fn solve_and_pseudo_inverse_agree() {
        let a = random(4, 4, 3);
        let b = random(4, 2, 4);
        let x = a.solve(&b).unwrap();
        assert!(a.matmul(&x).unwrap().max_abs_diff(&b).unwrap() < 1e-12);
        let pinv = a.pseudo_inverse(1e-12);
        let x2 = pinv.matmul(&b).unwrap();
        assert!(x.max_abs_diff(&x2).unwrap() < 1e-10);
    }

    #[test]
    fn solve_detects_singular_system() {
        let a = [C::new(1.0, 0.0), C::new(2.0, 0.0)];
        let s = ComplexMatrix::outer(&a, &a).unwrap();
        assert!(matches!(
            s.solve(&ComplexMatrix::identity(2).unwrap()),
            Err(Error::SingularChannel(_))
        ));
    }

    #[test]
    fn qr_gives_unitary_factor() {
        let a = random(5, 5, 21);
        let (q, r) = a.qr().unwrap();
        assert!(q.adjoint().matmul(&q).unwrap().max_abs_diff(&ComplexMatrix::identity(5).unwrap()).unwrap() < 1e-12);
        assert!(q.matmul(&r).unwrap().max_abs_diff(&a).unwrap() < 1e-12);
        for i in 0..5 {
            for j in 0..i {
                assert_eq!(r[(i, j)], C::new(0.0, 0.0));
            }
        }
    }
}
