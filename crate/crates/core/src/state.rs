//! Validated pure states and density matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::linalg::{self, c, ComplexMatrix, ZERO};
use crate::{Error, Result, STRUCTURAL_TOL};

/// Normalized amplitude vector |φ⟩ = Σ c_i |i⟩ in the reference basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: DVector<Complex64>,
}

impl PureState {
    /// Accepts amplitudes whose squared norm is within `STRUCTURAL_TOL` of 1.
    /// The amplitudes are stored unchanged.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Empty);
        }
        let norm_sqr: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if !((norm_sqr - 1.0).abs() <= STRUCTURAL_TOL) {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self { amplitudes: DVector::from_vec(amplitudes) })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if amplitudes.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm_sqr: norm * norm });
        }
        Ok(Self { amplitudes: DVector::from_vec(amplitudes) / c(norm, 0.0) })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| c(x, 0.0)).collect())
    }

    /// Reference basis state |i⟩.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = DVector::from_element(dim, ZERO);
        v[i] = c(1.0, 0.0);
        Self { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn projector(&self) -> ComplexMatrix {
        linalg::projector(&self.amplitudes)
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_trusted(self.projector())
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates with the default structural tolerance.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        validate_density(&matrix, STRUCTURAL_TOL)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::new(linalg::from_real_rows(rows)?)
    }

    pub fn diagonal(probabilities: &[f64]) -> Result<Self> {
        Self::new(linalg::diag(probabilities))
    }

    /// Wraps a matrix known to be a state up to rounding (a mixture or a
    /// channel output). Only the Hermitian part is kept.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        Self { matrix: linalg::hermitize(&matrix) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[(i, j)]
    }

    /// `w·a + (1 − w)·b`.
    pub fn mix(w: f64, a: &DensityMatrix, b: &DensityMatrix) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
        }
        Ok(Self::from_trusted(&a.matrix * c(w, 0.0) + &b.matrix * c(1.0 - w, 0.0)))
    }

    /// `U ρ U†`; `u` is assumed unitary.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.nrows() });
        }
        Ok(Self::from_trusted(u * &self.matrix * u.adjoint()))
    }
}

/// Negative eigenvalues and trace errors this small are rounding noise;
/// rebuilding the matrix to remove them would add error of the same size.
pub const ROUNDOFF: f64 = 1e-14;

/// Checks Hermiticity, unit trace and positivity, each with slack `tol`.
///
/// Eigenvalues in `[−tol, 0)` are clipped to zero and the trace is
/// renormalized. Deviations below [`ROUNDOFF`] are left alone, so a matrix
/// that satisfies the constraints up to rounding is returned bit-for-bit.
pub fn validate_density(m: &ComplexMatrix, tol: f64) -> Result<DensityMatrix> {
    linalg::ensure_square(m)?;
    if m.nrows() == 0 {
        return Err(Error::Empty);
    }
    let max_asymmetry = linalg::max_asymmetry(m);
    if !(max_asymmetry <= tol) {
        return Err(Error::NotHermitian { max_asymmetry });
    }
    let mut matrix = linalg::hermitize(m);
    let trace = linalg::trace(&matrix).re;
    if !((trace - 1.0).abs() <= tol) {
        return Err(Error::Trace { trace });
    }
    let eig = linalg::hermitian_eig(&matrix)?;
    let min_eigenvalue = eig.min_eigenvalue();
    if min_eigenvalue < -tol {
        return Err(Error::NotPsd { min_eigenvalue });
    }
    if min_eigenvalue < -ROUNDOFF {
        matrix = linalg::hermitize(&eig.reconstruct_with(|x| x.max(0.0)));
    }
    let trace = linalg::trace(&matrix).re;
    if (trace - 1.0).abs() > ROUNDOFF {
        matrix /= c(trace, 0.0);
    }
    Ok(DensityMatrix { matrix })
}

/// True iff every off-diagonal entry has modulus at most `tol`.
pub fn is_incoherent(rho: &DensityMatrix, tol: f64) -> bool {
    max_off_diagonal(rho.matrix()) <= tol
}

pub fn max_off_diagonal(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..m.ncols() {
            if i != j {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    worst
}

/// Completely dephased state: same diagonal, zero coherences.
pub fn dephase(rho: &DensityMatrix) -> DensityMatrix {
    let n = rho.dim();
    DensityMatrix {
        matrix: DMatrix::from_fn(n, n, |i, j| if i == j { rho.get(i, i) } else { ZERO }),
    }
}
