//! Dense complex linear algebra on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::{Error, Result, STRUCTURAL_TOL};

/// Square complex matrix in the reference basis.
pub type ComplexMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Builds a square matrix from rows, rejecting ragged or non-square input.
pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<ComplexMatrix> {
    let n = rows.len();
    for row in rows {
        if row.len() != n {
            return Err(Error::NotSquare { rows: n, cols: row.len() });
        }
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Builds a square matrix from real rows.
pub fn from_real_rows(rows: &[&[f64]]) -> Result<ComplexMatrix> {
    let rows: Vec<Vec<Complex64>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| c(x, 0.0)).collect())
        .collect();
    from_rows(&rows)
}

pub fn diag(values: &[f64]) -> ComplexMatrix {
    let n = values.len();
    DMatrix::from_fn(n, n, |i, j| if i == j { c(values[i], 0.0) } else { ZERO })
}

pub fn ensure_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(m.nrows())
}

/// Largest entry modulus, ‖M‖_max.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// max_ij |M_ij − conj(M_ji)|.
pub fn max_asymmetry(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// |ψ⟩⟨ψ|.
pub fn projector(psi: &DVector<Complex64>) -> ComplexMatrix {
    psi * psi.adjoint()
}

fn is_diagonal(m: &ComplexMatrix) -> bool {
    let n = m.nrows();
    (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] == ZERO))
}

/// Eigendecomposition `M = V diag(λ) V†` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct EigSystem {
    /// Real eigenvalues in ascending order.
    pub eigenvalues: DVector<f64>,
    /// Orthonormal eigenvectors as columns, matching `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

impl EigSystem {
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|x| x)
    }

    /// `V diag(g(λ)) V†`.
    pub fn reconstruct_with(&self, g: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let w = g(lam);
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= w);
        }
        scaled * v.adjoint()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Hermitian eigendecomposition with eigenvalues in ascending order.
///
/// Diagonal input returns the reference basis exactly and 2×2 input uses the
/// closed-form solution; everything else goes through nalgebra's symmetric
/// tridiagonal QR solver.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<EigSystem> {
    let n = ensure_square(m)?;
    let asym = max_asymmetry(m);
    if asym > STRUCTURAL_TOL {
        return Err(Error::NotHermitian { max_asymmetry: asym });
    }
    if n == 0 {
        return Err(Error::Empty);
    }
    if is_diagonal(m) {
        return Ok(diagonal_eig(m));
    }
    if n == 2 {
        return Ok(eig_2x2(m));
    }
    let sym = SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sym.eigenvalues[a].total_cmp(&sym.eigenvalues[b]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&k| sym.eigenvalues[k]));
    let eigenvectors = DMatrix::from_fn(n, n, |i, j| sym.eigenvectors[(i, order[j])]);
    Ok(EigSystem { eigenvalues, eigenvectors })
}

/// (M + M†)/2, with an exactly real diagonal.
pub fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            c(m[(i, i)].re, 0.0)
        } else {
            (m[(i, j)] + m[(j, i)].conj()) * 0.5
        }
    })
}

fn diagonal_eig(m: &ComplexMatrix) -> EigSystem {
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| m[(a, a)].re.total_cmp(&m[(b, b)].re));
    EigSystem {
        eigenvalues: DVector::from_iterator(n, order.iter().map(|&k| m[(k, k)].re)),
        eigenvectors: DMatrix::from_fn(n, n, |i, j| if i == order[j] { ONE } else { ZERO }),
    }
}

fn eig_2x2(m: &ComplexMatrix) -> EigSystem {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = (m[(0, 1)] + m[(1, 0)].conj()) * 0.5;
    let mean = 0.5 * (a + d);
    let half_gap = 0.5 * (a - d);
    let r = half_gap.hypot(b.norm());
    // Eigenvector of the larger eigenvalue, picking whichever row of
    // (M − λ₊) gives the better-conditioned null vector.
    let (x, y) = if half_gap >= 0.0 {
        (c(r + half_gap, 0.0), b.conj())
    } else {
        (b, c(r - half_gap, 0.0))
    };
    let norm = (x.norm_sqr() + y.norm_sqr()).sqrt();
    let (x, y) = (x / norm, y / norm);
    // the smaller-magnitude eigenvalue comes from the determinant, which keeps
    // it accurate for nearly singular (e.g. nearly pure) states
    let det = a * d - b.norm_sqr();
    let (lo, hi) = if mean >= 0.0 {
        let hi = mean + r;
        (if hi != 0.0 { det / hi } else { mean - r }, hi)
    } else {
        let lo = mean - r;
        (lo, det / lo)
    };
    EigSystem {
        eigenvalues: DVector::from_vec(vec![lo, hi]),
        eigenvectors: DMatrix::from_row_slice(2, 2, &[-y.conj(), x, x.conj(), y]),
    }
}

/// Principal square root of a Hermitian PSD matrix.
///
/// Eigenvalues in `[−STRUCTURAL_TOL, 0)` are treated as zero.
pub fn matrix_sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m)?;
    let min = eig.min_eigenvalue();
    if min < -STRUCTURAL_TOL {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    Ok(hermitize(&eig.reconstruct_with(|x| x.max(0.0).sqrt())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::NUMERIC_TOL;
    use proptest::prelude::*;

    fn assert_close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) {
        let err = max_abs(&(a - b));
        assert!(err <= tol, "‖a − b‖_max = {err:e}\n{a}\n{b}");
    }

    fn orthonormality_error(v: &ComplexMatrix) -> f64 {
        let n = v.ncols();
        max_abs(&(v.adjoint() * v - ComplexMatrix::identity(n, n)))
    }

    #[test]
    fn identity_spectrum() {
        let eig = hermitian_eig(&ComplexMatrix::identity(2, 2)).unwrap();
        assert_eq!(eig.eigenvalues.as_slice(), &[1.0, 1.0]);
        assert!(orthonormality_error(&eig.eigenvectors) <= NUMERIC_TOL);
    }

    #[test]
    fn pauli_x_spectrum() {
        let x = from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let eig = hermitian_eig(&x).unwrap();
        assert!((eig.eigenvalues[0] + 1.0).abs() < 1e-15);
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-15);
        assert_close(&eig.reconstruct(), &x, 1e-15);
    }

    #[test]
    fn symmetric_2x2_spectrum() {
        let m = from_real_rows(&[&[0.5, 0.3], &[0.3, 0.5]]).unwrap();
        let eig = hermitian_eig(&m).unwrap();
        assert!((eig.eigenvalues[0] - 0.2).abs() < 1e-15);
        assert!((eig.eigenvalues[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn general_path_sorted_ascending() {
        let m = from_real_rows(&[&[2.0, 1.0, 0.0], &[1.0, 2.0, 1.0], &[0.0, 1.0, 2.0]]).unwrap();
        let eig = hermitian_eig(&m).unwrap();
        let s = 2f64.sqrt();
        for (got, want) in eig.eigenvalues.iter().zip([2.0 - s, 2.0, 2.0 + s]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert_close(&eig.reconstruct(), &m, 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = from_real_rows(&[&[0.5, 0.3], &[0.1, 0.5]]).unwrap();
        match hermitian_eig(&m) {
            Err(Error::NotHermitian { max_asymmetry }) => assert!((max_asymmetry - 0.2).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sqrt_examples() {
        let id = ComplexMatrix::identity(2, 2);
        assert_close(&matrix_sqrt_psd(&id).unwrap(), &id, 1e-15);
        assert_close(&matrix_sqrt_psd(&diag(&[4.0, 9.0])).unwrap(), &diag(&[2.0, 3.0]), 1e-15);
        let m = from_real_rows(&[&[0.5, 0.3], &[0.3, 0.5]]).unwrap();
        let r = matrix_sqrt_psd(&m).unwrap();
        assert_close(&(&r * &r), &m, 1e-12);
    }

    #[test]
    fn sqrt_rejects_indefinite() {
        let m = from_real_rows(&[&[0.5, 0.6], &[0.6, 0.5]]).unwrap();
        assert!(matches!(matrix_sqrt_psd(&m), Err(Error::NotPsd { .. })));
    }

    fn hermitian_strategy() -> impl Strategy<Value = ComplexMatrix> {
        (1usize..6).prop_flat_map(|n| {
            prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |v| {
                let a = DMatrix::from_fn(n, n, |i, j| c(v[i * n + j].0, v[i * n + j].1));
                (&a + a.adjoint()) * c(0.5, 0.0)
            })
        })
    }

    proptest! {
        #[test]
        fn eig_reconstructs(m in hermitian_strategy()) {
            let eig = hermitian_eig(&m).unwrap();
            prop_assert!(max_abs(&(eig.reconstruct() - &m)) <= NUMERIC_TOL);
            prop_assert!(orthonormality_error(&eig.eigenvectors) <= NUMERIC_TOL);
            prop_assert!(eig.eigenvalues.as_slice().windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn sqrt_of_square_is_identity_on_psd(m in hermitian_strategy()) {
            // eigenvalues kept ≥ 0.05: the root of a near-singular square is
            // only accurate to √ε
            let n = m.nrows();
            let psd = &m * &m + ComplexMatrix::identity(n, n) * c(0.05, 0.0);
            let root = matrix_sqrt_psd(&(&psd * &psd)).unwrap();
            prop_assert!(max_abs(&(root - &psd)) <= NUMERIC_TOL);
        }
    }
}
