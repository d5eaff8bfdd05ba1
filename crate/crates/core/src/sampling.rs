//! Seeded random states and isometries.

use nalgebra::DMatrix;
#[cfg(test)]
use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::linalg::{c, ComplexMatrix};
use crate::rng::{rng_from_seed, Seed};
use crate::state::{DensityMatrix, PureState};
use crate::{Error, Result};

/// Standard complex Gaussian (independent N(0,1) real and imaginary parts).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    c(re, im)
}

fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    // filled row by row so the draw order is independent of storage order
    let mut m = DMatrix::from_element(rows, cols, c(0.0, 0.0));
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = complex_gaussian(rng);
        }
    }
    m
}

/// Haar-random pure state.
pub fn sample_pure<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> PureState {
    loop {
        let v: Vec<Complex64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
        if let Ok(s) = PureState::normalized(v) {
            return s;
        }
    }
}

/// Normalized Wishart state `G G† / Tr(G G†)` with `G` a dim×rank Gaussian.
pub fn sample_density<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> Result<DensityMatrix> {
    if rank == 0 || rank > dim {
        return Err(Error::InvalidRank { rank, dim });
    }
    let g = gaussian_matrix(rng, dim, rank);
    let w = &g * g.adjoint();
    let tr: f64 = w.diagonal().iter().map(|z| z.re).sum();
    Ok(DensityMatrix::from_trusted(w / c(tr, 0.0)))
}

/// Diagonal state whose diagonal is uniform on the probability simplex.
pub fn sample_incoherent<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    let weights = sample_simplex(rng, dim);
    DensityMatrix::from_trusted(crate::linalg::diag(&weights))
}

/// Uniform (flat Dirichlet) point on the probability simplex.
pub fn sample_simplex<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|x| x / total).collect()
}

/// Haar-random `rows × cols` isometry (orthonormal columns), `cols ≤ rows`.
pub fn sample_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let g = gaussian_matrix(rng, rows, cols);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    // fix the column phases so the distribution is Haar
    for k in 0..cols {
        let d = r[(k, k)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            q.column_mut(k).iter_mut().for_each(|z| *z *= phase);
        }
    }
    q
}

pub fn random_pure(dim: usize, seed: Seed) -> PureState {
    sample_pure(&mut rng_from_seed(seed), dim)
}

pub fn random_density(dim: usize, rank: usize, seed: Seed) -> Result<DensityMatrix> {
    sample_density(&mut rng_from_seed(seed), dim, rank)
}

pub fn random_incoherent(dim: usize, seed: Seed) -> DensityMatrix {
    sample_incoherent(&mut rng_from_seed(seed), dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eig, max_abs};
    use crate::state::is_incoherent;

    fn amplitudes_norm(v: &DVector<Complex64>) -> f64 {
        v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn pure_is_normalized() {
        for seed in 0..50 {
            let s = random_pure(2, seed);
            assert!((amplitudes_norm(s.amplitudes()) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn density_has_requested_rank() {
        for seed in 0..20 {
            let rho = random_density(3, 2, seed).unwrap();
            let eig = hermitian_eig(rho.matrix()).unwrap();
            assert!(eig.eigenvalues[0].abs() <= 1e-10, "{}", eig.eigenvalues);
            assert!(eig.eigenvalues[1] > 1e-10);
            assert!(crate::state::validate_density(rho.matrix(), 1e-12).is_ok());
        }
    }

    #[test]
    fn invalid_rank_rejected() {
        assert!(matches!(random_density(3, 0, 1), Err(Error::InvalidRank { .. })));
        assert!(matches!(random_density(3, 4, 1), Err(Error::InvalidRank { .. })));
    }

    #[test]
    fn incoherent_is_diagonal() {
        for seed in 0..20 {
            let rho = random_incoherent(2, seed);
            assert!(is_incoherent(&rho, 0.0));
            assert!(rho.get(0, 0).re >= 0.0 && rho.get(1, 1).re >= 0.0);
        }
    }

    #[test]
    fn reproducible_per_seed() {
        assert_eq!(random_pure(5, 9), random_pure(5, 9));
        assert_eq!(random_density(4, 2, 9).unwrap(), random_density(4, 2, 9).unwrap());
        assert_eq!(random_incoherent(4, 9), random_incoherent(4, 9));
        assert_ne!(random_pure(5, 9), random_pure(5, 10));
    }

    #[test]
    fn isometry_columns_orthonormal() {
        let mut rng = rng_from_seed(3);
        let v = sample_isometry(&mut rng, 5, 3);
        assert_eq!(v.shape(), (5, 3));
        assert!(max_abs(&(v.adjoint() * &v - ComplexMatrix::identity(3, 3))) < 1e-12);
    }
}
