//! Dense complex matrices and matrix functions.
//!
//! Two routes realize a polynomial transform of a Hermitian matrix: the
//! spectral route `V f(Λ) V†` (the reference) and the matrix Clenshaw
//! recurrence, whose step count equals the polynomial degree and therefore
//! serves as the query count of an ideal QSVT circuit.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::chebyshev::{ChebyshevSeries, Parity};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Tolerance used when checking that a matrix is Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Slack allowed on the spectrum of a matrix fed to [`apply_poly_clenshaw`].
pub const SPECTRUM_SLACK: f64 = 1e-8;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from row-major entries; all entries must be finite.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape("matrix dimensions must be positive".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Format("matrix entries must be finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max entrywise deviation from Hermiticity; infinite for non-square input.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = (other.rows, other.cols);
        Self::from_fn(self.rows * r2, self.cols * c2, |i, j| {
            self[(i / r2, j / c2)] * other[(i % r2, j % c2)]
        })
    }

    /// Top-left `r x c` block.
    pub fn block(&self, row0: usize, col0: usize, r: usize, c: usize) -> Self {
        Self::from_fn(r, c, |i, j| self[(row0 + i, col0 + j)])
    }

    /// Assembles `[[a, b], [c, d]]` from four equally sized square blocks.
    pub fn from_blocks(a: &Self, b: &Self, c: &Self, d: &Self) -> Self {
        let n = a.rows;
        Self::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, true) => a[(i, j)],
            (true, false) => b[(i, j - n)],
            (false, true) => c[(i - n, j)],
            (false, false) => d[(i - n, j - n)],
        })
    }

    pub fn mat_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `self * rhs` written into `out` (no aliasing).
    fn mul_into(&self, rhs: &Self, out: &mut Self) {
        debug_assert_eq!(self.cols, rhs.rows);
        let (n, m, p) = (self.rows, self.cols, rhs.cols);
        out.data.iter_mut().for_each(|z| *z = ZERO);
        for i in 0..n {
            let out_row = &mut out.data[i * p..(i + 1) * p];
            for k in 0..m {
                let a = self.data[i * m + k];
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * p..(k + 1) * p];
                for (o, b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        self.mul_into(rhs, &mut out);
        Ok(out)
    }

    fn assert_same_shape(&self, other: &Self, op: &str) {
        assert!(
            self.rows == other.rows && self.cols == other.cols,
            "{op} of {}x{} and {}x{}",
            self.rows,
            self.cols,
            other.rows,
            other.cols
        );
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_mul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.assert_same_shape(rhs, "sum");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.assert_same_shape(rhs, "difference");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and the
/// unitary whose columns are the matching eigenvectors.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V diag(f(λ)) V†`.
    pub fn map_complex(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let values: Vec<Complex64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        self.with_diagonal(&values)
    }

    /// `V diag(values) V†` for values aligned with the eigenvalue order.
    pub fn with_diagonal(&self, values: &[Complex64]) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let n = self.dim();
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| v[(i, k)] * values[k] * v[(j, k)].conj()).sum()
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_complex(|l| Complex64::new(l, 0.0))
    }
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<SpectralData> {
    if !m.is_square() {
        return Err(Error::Shape(format!("eigendecomposition of a {}x{} matrix", m.rows, m.cols)));
    }
    let deviation = m.hermitian_deviation();
    let scale = m.max_abs().max(1.0);
    if deviation > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian { deviation });
    }
    let n = m.rows;
    // Symmetrize so rounding noise in the input does not bias the rotations.
    let mut a = ComplexMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()));
    let mut v = ComplexMatrix::identity(n);
    let total = a.frobenius_norm();
    let threshold = 1e-15 * total;

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= 1e-3 * threshold {
                    continue;
                }
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // W = diag(1, conj(phase)) * [[c, s], [-s, c]] on the (p, q) plane.
                let wqp = -s * phase.conj();
                let wqq = c * phase.conj();
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp + wqp * akq;
                    a[(k, q)] = s * akp + wqq * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk + wqp.conj() * aqk;
                    a[(q, k)] = s * apk + wqq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp + wqp * vkq;
                    v[(k, q)] = s * vkp + wqq * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(SpectralData { eigenvalues, eigenvectors })
}

/// Singular values in descending order by one-sided (Hestenes) Jacobi.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    // Work on the orientation with at least as many rows as columns.
    let mut a = if m.rows >= m.cols { m.clone() } else { m.adjoint() };
    let (rows, cols) = (a.rows, a.cols);
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = ZERO;
                for k in 0..rows {
                    alpha += a[(k, p)].norm_sqr();
                    beta += a[(k, q)].norm_sqr();
                    gamma += a[(k, p)].conj() * a[(k, q)];
                }
                let g = gamma.norm();
                if g <= 1e-15 * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..rows {
                    let ap = a[(k, p)];
                    let aq = a[(k, q)] * phase.conj();
                    a[(k, p)] = c * ap - s * aq;
                    a[(k, q)] = s * ap + c * aq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..cols)
        .map(|j| (0..rows).map(|k| a[(k, j)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Largest singular value, from the top eigenvalue of `M†M`.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    let gram = &m.adjoint() * m;
    let spectral = eig_hermitian(&gram).expect("Gram matrix is Hermitian");
    spectral.eigenvalues.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// `V f(Λ) V†` for Hermitian `M`; fails if `f` is not finite at an eigenvalue.
pub fn apply_function_spectral(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    let spectral = eig_hermitian(m)?;
    apply_function_to_spectrum(&spectral, f)
}

pub fn apply_function_to_spectrum(
    spectral: &SpectralData,
    f: impl Fn(f64) -> f64,
) -> Result<ComplexMatrix> {
    let mut values = Vec::with_capacity(spectral.dim());
    for &l in &spectral.eigenvalues {
        let y = f(l);
        if !y.is_finite() {
            return Err(Error::Evaluation { eigenvalue: l });
        }
        values.push(Complex64::new(y, 0.0));
    }
    Ok(spectral.with_diagonal(&values))
}

/// `Σ c_n T_n(M)` by the matrix Clenshaw recurrence.
///
/// `M` must be Hermitian with spectrum inside `[-1 - 1e-8, 1 + 1e-8]`.
pub fn apply_poly_clenshaw(m: &ComplexMatrix, series: &ChebyshevSeries) -> Result<ComplexMatrix> {
    let spectral = eig_hermitian(m)?;
    let lo = spectral.eigenvalues.first().copied().unwrap_or(0.0);
    let hi = spectral.eigenvalues.last().copied().unwrap_or(0.0);
    if lo < -1.0 - SPECTRUM_SLACK || hi > 1.0 + SPECTRUM_SLACK {
        return Err(Error::Domain(format!(
            "spectrum [{lo}, {hi}] lies outside [-1, 1]; rescale the block-encoded operator"
        )));
    }
    Ok(clenshaw_matrix(m, series))
}

/// Matrix Clenshaw without the spectrum check. Even series are evaluated as
/// a series in `T_2(M) = 2M² - I`, halving the number of products.
pub(crate) fn clenshaw_matrix(m: &ComplexMatrix, series: &ChebyshevSeries) -> ComplexMatrix {
    let n = m.rows;
    let coeffs = series.coefficients();
    if coeffs.is_empty() {
        return ComplexMatrix::zeros(n, n);
    }
    if series.parity() == Parity::Even && coeffs.len() > 2 {
        let m2 = &(m * m).scale_real(2.0) - &ComplexMatrix::identity(n);
        let folded: Vec<f64> = coeffs.iter().step_by(2).copied().collect();
        return clenshaw_raw(&m2, &folded);
    }
    clenshaw_raw(m, coeffs)
}

fn clenshaw_raw(m: &ComplexMatrix, coeffs: &[f64]) -> ComplexMatrix {
    let n = m.rows;
    if coeffs.len() == 1 {
        return ComplexMatrix::identity(n).scale_real(coeffs[0]);
    }
    let two_m = m.scale_real(2.0);
    let mut b1 = ComplexMatrix::zeros(n, n);
    let mut b2 = ComplexMatrix::zeros(n, n);
    let mut tmp = ComplexMatrix::zeros(n, n);
    for &c in coeffs[1..].iter().rev() {
        // b_k = 2M b_{k+1} - b_{k+2} + c_k I, written over b2.
        two_m.mul_into(&b1, &mut tmp);
        for (t, old) in tmp.data.iter_mut().zip(&b2.data) {
            *t -= old;
        }
        for i in 0..n {
            tmp.data[i * n + i] += c;
        }
        std::mem::swap(&mut b2, &mut b1);
        std::mem::swap(&mut b1, &mut tmp);
    }
    let mut out = ComplexMatrix::zeros(n, n);
    m.mul_into(&b1, &mut out);
    for (o, old) in out.data.iter_mut().zip(&b2.data) {
        *o -= old;
    }
    for i in 0..n {
        out.data[i * n + i] += coeffs[0];
    }
    out
}
