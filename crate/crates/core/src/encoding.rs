//! Density matrices, purification, partial traces and block encodings.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DensityViolation, Error, Result};
use crate::matfun::{eig_hermitian, ComplexMatrix, SpectralData};

pub const DEFAULT_ZERO_TOL: f64 = 1e-12;
pub const DENSITY_HERMITIAN_TOL: f64 = 1e-10;
pub const DENSITY_TRACE_TOL: f64 = 1e-9;
pub const DENSITY_NEGATIVE_TOL: f64 = 1e-10;
pub const PURE_NORM_TOL: f64 = 1e-10;

/// A validated density matrix with cached eigendecomposition.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    spectral: SpectralData,
    zero_tol: f64,
    dims: Vec<usize>,
}

/// Checks the density-matrix invariants and caches the spectrum.
pub fn validate_density(m: &ComplexMatrix, zero_tol: f64) -> Result<DensityMatrix> {
    if !m.is_square() {
        return Err(Error::InvalidDensity(DensityViolation::NotSquare { rows: m.rows(), cols: m.cols() }));
    }
    let deviation = m.hermitian_deviation();
    if deviation > DENSITY_HERMITIAN_TOL {
        return Err(Error::InvalidDensity(DensityViolation::NotHermitian { deviation }));
    }
    let trace = m.trace().re;
    if (trace - 1.0).abs() > DENSITY_TRACE_TOL {
        return Err(Error::InvalidDensity(DensityViolation::Trace { trace }));
    }
    let spectral = eig_hermitian(m)?;
    let lowest = spectral.eigenvalues[0];
    if lowest < -DENSITY_NEGATIVE_TOL {
        return Err(Error::InvalidDensity(DensityViolation::NegativeEigenvalue { eigenvalue: lowest }));
    }
    if !(zero_tol >= 0.0) {
        return Err(Error::Parameter(format!("zero_tol must be nonnegative, got {zero_tol}")));
    }
    Ok(DensityMatrix { dims: vec![m.rows()], matrix: m.clone(), spectral, zero_tol })
}

impl DensityMatrix {
    pub fn new(m: &ComplexMatrix) -> Result<Self> {
        validate_density(m, DEFAULT_ZERO_TOL)
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(&ComplexMatrix::from_real_diagonal(diag))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::new(&ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64)).expect("valid state")
    }

    /// Declares a tensor factorization of the underlying space.
    pub fn with_dims(mut self, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, self.dim())?;
        self.dims = dims;
        Ok(self)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn spectral(&self) -> &SpectralData {
        &self.spectral
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectral.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn zero_tol(&self) -> f64 {
        self.zero_tol
    }

    /// Eigenvalues above `zero_tol` but below `1/kappa`.
    pub fn eigenvalues_below(&self, kappa: f64) -> Vec<f64> {
        self.eigenvalues()
            .iter()
            .copied()
            .filter(|&l| l > self.zero_tol && l < 1.0 / kappa)
            .collect()
    }

    /// `-Σ λ ln λ` over eigenvalues above `zero_tol`.
    pub fn von_neumann_entropy(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .filter(|&&l| l > self.zero_tol)
            .map(|&l| -l * l.ln())
            .sum()
    }
}

/// `κ = 1 / min{λ : λ > zero_tol}`.
pub fn spectral_floor(rho: &DensityMatrix) -> Result<f64> {
    rho.eigenvalues()
        .iter()
        .copied()
        .find(|&l| l > rho.zero_tol)
        .map(|l| 1.0 / l)
        .ok_or_else(|| Error::Degenerate("every eigenvalue is below the zero tolerance".into()))
}

fn check_dims(dims: &[usize], total: usize) -> Result<()> {
    if dims.is_empty() || dims.iter().any(|&d| d == 0) {
        return Err(Error::Shape(format!("subsystem dims {dims:?} must be a nonempty list of positive integers")));
    }
    let product: usize = dims.iter().product();
    if product != total {
        return Err(Error::Shape(format!("subsystem dims {dims:?} multiply to {product}, expected {total}")));
    }
    Ok(())
}

/// A normalized state vector over a declared tensor factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
    dims: Vec<usize>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, amplitudes.len())?;
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Format("amplitudes must be finite".into()));
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > PURE_NORM_TOL {
            return Err(Error::Parameter(format!("state has norm {norm}, expected 1")));
        }
        Ok(Self { amplitudes, dims })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn projector(&self) -> ComplexMatrix {
        let n = self.len();
        ComplexMatrix::from_fn(n, n, |i, j| self.amplitudes[i] * self.amplitudes[j].conj())
    }

    /// Euclidean distance `‖ψ - φ‖₂`.
    pub fn distance(&self, other: &Self) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `⟨ψ|φ⟩`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }
}

/// `Σ_i √λ_i |v_i⟩_A |i⟩_B`, whose reduced state over A is `rho`.
pub fn purify(rho: &DensityMatrix) -> PureState {
    let d = rho.dim();
    let s = rho.spectral();
    let mut amps = vec![Complex64::new(0.0, 0.0); d * d];
    for b in 0..d {
        let w = s.eigenvalues[b].max(0.0).sqrt();
        for a in 0..d {
            amps[a * d + b] = w * s.eigenvectors[(a, b)];
        }
    }
    // Rescale away rounding so the norm invariant holds tightly.
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let amps = amps.into_iter().map(|z| z / norm).collect();
    PureState { amplitudes: amps, dims: vec![d, d] }
}

/// Index tables for a partial trace: `full[k][e]` is the global index of
/// kept multi-index `k` combined with traced multi-index `e`.
fn trace_tables(dims: &[usize], keep: &[usize]) -> Result<(Vec<usize>, Vec<Vec<usize>>)> {
    if keep.is_empty() {
        return Err(Error::Shape("keep must name at least one subsystem".into()));
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.len() != keep.len() {
        return Err(Error::Shape(format!("keep {keep:?} repeats a subsystem")));
    }
    if let Some(&bad) = keep_sorted.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::Shape(format!("subsystem {bad} out of range for dims {dims:?}")));
    }
    let kept_dims: Vec<usize> = keep_sorted.iter().map(|&k| dims[k]).collect();
    let dk: usize = kept_dims.iter().product();
    let total: usize = dims.iter().product();
    let de = total / dk;
    let mut table = vec![vec![0usize; de]; dk];
    let mut digits = vec![0usize; dims.len()];
    for f in 0..total {
        // Row-major digits: subsystem 0 is the most significant.
        let mut rem = f;
        for (i, &d) in dims.iter().enumerate().rev() {
            digits[i] = rem % d;
            rem /= d;
        }
        let (mut k, mut e) = (0usize, 0usize);
        for (i, &d) in dims.iter().enumerate() {
            if keep_sorted.binary_search(&i).is_ok() {
                k = k * d + digits[i];
            } else {
                e = e * d + digits[i];
            }
        }
        table[k][e] = f;
    }
    Ok((kept_dims, table))
}

/// Partial trace of a pure state over the complement of `keep`.
pub fn reduced_density_pure(state: &PureState, keep: &[usize]) -> Result<DensityMatrix> {
    let (kept_dims, table) = trace_tables(&state.dims, keep)?;
    let dk = table.len();
    let psi = &state.amplitudes;
    let m = ComplexMatrix::from_fn(dk, dk, |i, j| {
        table[i].iter().zip(&table[j]).map(|(&a, &b)| psi[a] * psi[b].conj()).sum()
    });
    finish_reduced(m, kept_dims)
}

/// Partial trace of a density matrix (with declared dims) over the complement of `keep`.
pub fn reduced_density(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    partial_trace(rho.matrix(), rho.dims(), keep).and_then(|(m, dims)| finish_reduced(m, dims))
}

/// Partial trace of an arbitrary square matrix over the complement of `keep`.
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<(ComplexMatrix, Vec<usize>)> {
    if !m.is_square() {
        return Err(Error::Shape(format!("partial trace of a {}x{} matrix", m.rows(), m.cols())));
    }
    check_dims(dims, m.rows())?;
    let (kept_dims, table) = trace_tables(dims, keep)?;
    let dk = table.len();
    let out = ComplexMatrix::from_fn(dk, dk, |i, j| {
        table[i].iter().zip(&table[j]).map(|(&a, &b)| m[(a, b)]).sum()
    });
    Ok((out, kept_dims))
}

fn finish_reduced(m: ComplexMatrix, dims: Vec<usize>) -> Result<DensityMatrix> {
    let h = (&m + &m.adjoint()).scale_real(0.5);
    validate_density(&h, DEFAULT_ZERO_TOL)?.with_dims(dims)
}

/// Unitary dilation `[[ρ, √(I-ρ²)], [√(I-ρ²), -ρ]]`.
#[derive(Debug, Clone)]
pub struct BlockEncoding {
    pub unitary: ComplexMatrix,
    pub encoded_dim: usize,
}

impl BlockEncoding {
    pub fn top_left(&self) -> ComplexMatrix {
        self.unitary.block(0, 0, self.encoded_dim, self.encoded_dim)
    }
}

pub fn block_encode(rho: &DensityMatrix) -> BlockEncoding {
    let d = rho.dim();
    let rho_m = rho.matrix().clone();
    let comp = rho.spectral().map_complex(|l| Complex64::new((1.0 - l * l).max(0.0).sqrt(), 0.0));
    let neg = rho_m.scale_real(-1.0);
    BlockEncoding { unitary: ComplexMatrix::from_blocks(&rho_m, &comp, &comp, &neg), encoded_dim: d }
}

/// On-disk form: `{"dims": [...], "entries": [[re, im], ...], "kind": ...}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dims: Vec<usize>,
    pub entries: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
}

/// A parsed input file.
#[derive(Debug, Clone)]
pub enum Loaded {
    Density(DensityMatrix),
    Pure(PureState),
    Operator { matrix: ComplexMatrix, dims: Vec<usize> },
}

pub fn parse_json(text: &str) -> Result<Loaded> {
    let file: MatrixFile =
        serde_json::from_str(text).map_err(|e| Error::Format(format!("invalid matrix JSON: {e}")))?;
    let total: usize = file.dims.iter().product();
    if file.dims.is_empty() || total == 0 {
        return Err(Error::Format("dims must be a nonempty list of positive integers".into()));
    }
    let entries: Vec<Complex64> = file.entries.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
    match file.kind.as_deref() {
        Some("pure") => Ok(Loaded::Pure(PureState::new(entries, file.dims)?)),
        Some("density") => {
            let m = ComplexMatrix::from_row_major(total, total, entries)?;
            Ok(Loaded::Density(validate_density(&m, DEFAULT_ZERO_TOL)?.with_dims(file.dims)?))
        }
        None | Some("operator") => {
            let matrix = ComplexMatrix::from_row_major(total, total, entries)?;
            Ok(Loaded::Operator { matrix, dims: file.dims })
        }
        Some(other) => Err(Error::Format(format!("unknown kind {other:?}"))),
    }
}

fn matrix_file(m: &ComplexMatrix, dims: &[usize], kind: Option<&str>) -> MatrixFile {
    MatrixFile {
        dims: dims.to_vec(),
        entries: m.entries().iter().map(|z| [z.re, z.im]).collect(),
        kind: kind.map(str::to_string),
    }
}

pub fn density_to_json(rho: &DensityMatrix) -> String {
    serde_json::to_string(&matrix_file(rho.matrix(), rho.dims(), Some("density"))).expect("serializable")
}

pub fn operator_to_json(m: &ComplexMatrix, dims: &[usize]) -> String {
    serde_json::to_string(&matrix_file(m, dims, Some("operator"))).expect("serializable")
}

pub fn pure_to_json(psi: &PureState) -> String {
    let file = MatrixFile {
        dims: psi.dims.clone(),
        entries: psi.amplitudes.iter().map(|z| [z.re, z.im]).collect(),
        kind: Some("pure".into()),
    };
    serde_json::to_string(&file).expect("serializable")
}
