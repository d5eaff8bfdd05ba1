//! Numerical convex roof of `C_F` for arbitrary states.
//!
//! Every `m`-member ensemble of ρ = Σ_k λ_k |v_k⟩⟨v_k| (rank r) is
//! `ψ̃_n = Σ_k V_nk √λ_k |v_k⟩` for some `m × r` isometry `V`, with weights
//! `p_n = ‖ψ̃_n‖²`. The search moves over that manifold by complex Givens
//! rotations acting on pairs of members: each rotation keeps `V` an isometry,
//! so every iterate is a feasible ensemble and its cost an upper bound on the
//! roof. Rotation angles are chosen gradient-free (coarse grid, then golden
//! section), since the cost has kinks wherever two amplitudes tie for the
//! maximum.

use nalgebra::DVector;
use num_complex::Complex64;

use super::{c_f_pure, c_f_unnormalized, Ensemble};
use crate::exec::Execution;
use crate::linalg::{self, c, ComplexMatrix};
use crate::rng::{child_seed, rng_from_seed, Seed};
use crate::sampling::sample_isometry;
use crate::state::{DensityMatrix, PureState};
use crate::{Error, Result};

/// Eigenvalues at or below this are treated as zero when computing the rank.
const RANK_TOL: f64 = 1e-12;
/// Members lighter than this are dropped from the reported ensemble.
const WEIGHT_FLOOR: f64 = 1e-15;

const THETA_GRID: usize = 24;
const PHI_GRID: usize = 4;
const GOLDEN_WIDTH: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct RoofConfig {
    /// Number of ensemble members; `None` means rank².
    pub ensemble_size: Option<usize>,
    /// Independent starts; restart 0 is the eigen-ensemble, the rest are
    /// Haar-random isometries.
    pub restarts: usize,
    /// Maximum number of sweeps over all member pairs per restart.
    pub max_iterations: usize,
    /// A restart stops once a sweep lowers the cost by less than this.
    pub convergence_tol: f64,
    pub seed: Seed,
    pub execution: Execution,
}

impl Default for RoofConfig {
    fn default() -> Self {
        Self {
            ensemble_size: None,
            restarts: 32,
            max_iterations: 500,
            convergence_tol: 1e-8,
            seed: 0,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RoofResult {
    /// Average `C_F` of `ensemble`; an upper bound on the convex roof.
    pub value: f64,
    pub ensemble: Ensemble,
    /// Whether the best restart met `convergence_tol` within the sweep budget.
    pub converged: bool,
    /// Sweeps used by the best restart.
    pub iterations_used: usize,
    /// Index of the restart that produced `ensemble`.
    pub best_restart: usize,
}

pub fn c_f_roof_estimate(rho: &DensityMatrix) -> Result<RoofResult> {
    c_f_roof_estimate_with(rho, &RoofConfig::default())
}

pub fn c_f_roof_estimate_with(rho: &DensityMatrix, cfg: &RoofConfig) -> Result<RoofResult> {
    let dim = rho.dim();
    let eig = linalg::hermitian_eig(rho.matrix())?;
    let weighted: Vec<DVector<Complex64>> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, &lam)| lam > RANK_TOL)
        .map(|(k, &lam)| canonical_phase(eig.eigenvectors.column(k).into_owned()) * c(lam.sqrt(), 0.0))
        .collect();
    let rank = weighted.len();
    if rank == 0 {
        return Err(Error::InvalidRank { rank, dim });
    }

    if rank == 1 {
        let state = PureState::normalized(weighted[0].iter().copied().collect())?;
        let value = c_f_pure(&state);
        return Ok(RoofResult {
            value,
            ensemble: Ensemble::new(vec![(1.0, state)])?,
            converged: true,
            iterations_used: 0,
            best_restart: 0,
        });
    }

    let size = cfg.ensemble_size.unwrap_or(rank * rank);
    if size < rank {
        return Err(Error::EnsembleTooSmall { ensemble_size: size, rank });
    }

    let restarts = cfg.restarts.max(1);
    let runs = cfg.execution.map(restarts, |r| {
        let start = if r == 0 {
            ComplexMatrix::identity(size, rank)
        } else {
            let mut rng = rng_from_seed(child_seed(cfg.seed, r as u64));
            sample_isometry(&mut rng, size, rank)
        };
        let mut search = Search::new(&start, &weighted, dim);
        search.run(cfg.max_iterations, cfg.convergence_tol);
        search
    });

    let mut best = 0;
    for (r, run) in runs.iter().enumerate() {
        if run.cost < runs[best].cost {
            best = r;
        }
    }
    let run = &runs[best];
    let members = run
        .members
        .chunks(dim)
        .filter_map(|psi| {
            let w: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
            (w > WEIGHT_FLOOR).then(|| Ok((w, PureState::normalized(psi.to_vec())?)))
        })
        .collect::<Result<Vec<_>>>()?;
    let ensemble = Ensemble::new(members)?;
    Ok(RoofResult {
        value: ensemble.average_c_f(),
        ensemble,
        converged: run.converged,
        iterations_used: run.sweeps,
        best_restart: best,
    })
}

/// Rotates `v` so that its first non-negligible component is real positive.
/// This makes the starting ensembles covariant under diagonal unitaries.
fn canonical_phase(mut v: DVector<Complex64>) -> DVector<Complex64> {
    if let Some(z) = v.iter().find(|z| z.norm() >= 1e-3).copied() {
        let phase = z.conj() / z.norm();
        v.iter_mut().for_each(|x| *x *= phase);
    }
    v
}

/// `p · C_F(ψ/‖ψ‖)` with `p = ‖ψ‖²`.
fn member_cost(psi: &[Complex64]) -> f64 {
    let p: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    p * c_f_unnormalized(psi)
}

struct Search {
    dim: usize,
    /// Unnormalized members, `dim` amplitudes each, concatenated.
    members: Vec<Complex64>,
    cost: f64,
    sweeps: usize,
    converged: bool,
    scratch: Vec<Complex64>,
}

impl Search {
    fn new(isometry: &ComplexMatrix, weighted: &[DVector<Complex64>], dim: usize) -> Self {
        let size = isometry.nrows();
        let mut members = vec![c(0.0, 0.0); size * dim];
        for n in 0..size {
            for (k, w) in weighted.iter().enumerate() {
                let coef = isometry[(n, k)];
                for i in 0..dim {
                    members[n * dim + i] += coef * w[i];
                }
            }
        }
        let cost = members.chunks(dim).map(member_cost).sum();
        Self { dim, members, cost, sweeps: 0, converged: false, scratch: vec![c(0.0, 0.0); 2 * dim] }
    }

    fn size(&self) -> usize {
        self.members.len() / self.dim
    }

    fn run(&mut self, max_sweeps: usize, tol: f64) {
        let size = self.size();
        while self.sweeps < max_sweeps {
            self.sweeps += 1;
            let before = self.cost;
            for j in 0..size {
                for k in (j + 1)..size {
                    self.optimize_pair(j, k);
                }
            }
            self.cost = self.members.chunks(self.dim).map(member_cost).sum();
            if before - self.cost < tol {
                self.converged = true;
                break;
            }
        }
    }

    /// Cost of members `j`, `k` after the rotation
    /// `[[cos θ, e^{iφ} sin θ], [−e^{−iφ} sin θ, cos θ]]`.
    fn pair_cost(&mut self, j: usize, k: usize, theta: f64, phi: f64) -> f64 {
        let d = self.dim;
        let (cs, sn) = (theta.cos(), theta.sin());
        let e = Complex64::from_polar(sn, phi);
        for i in 0..d {
            let a = self.members[j * d + i];
            let b = self.members[k * d + i];
            self.scratch[i] = a * cs + b * e;
            self.scratch[d + i] = b * cs - a * e.conj();
        }
        member_cost(&self.scratch[..d]) + member_cost(&self.scratch[d..])
    }

    fn optimize_pair(&mut self, j: usize, k: usize) {
        let current = self.pair_cost(j, k, 0.0, 0.0);
        let (mut best, mut theta, mut phi) = (current, 0.0, 0.0);
        let theta_step = std::f64::consts::PI / THETA_GRID as f64;
        let phi_step = std::f64::consts::PI / PHI_GRID as f64;
        for a in 0..PHI_GRID {
            let ph = a as f64 * phi_step;
            for t in 0..THETA_GRID {
                let th = -std::f64::consts::FRAC_PI_2 + t as f64 * theta_step;
                let v = self.pair_cost(j, k, th, ph);
                if v < best {
                    (best, theta, phi) = (v, th, ph);
                }
            }
        }
        for _ in 0..2 {
            let (th, v) = self.golden(theta - theta_step, theta + theta_step, |s, x| s.pair_cost(j, k, x, phi));
            if v < best {
                (best, theta) = (v, th);
            }
            let (ph, v) = self.golden(phi - phi_step, phi + phi_step, |s, x| s.pair_cost(j, k, theta, x));
            if v < best {
                (best, phi) = (v, ph);
            }
        }
        if best < current {
            self.pair_cost(j, k, theta, phi);
            let d = self.dim;
            self.members[j * d..(j + 1) * d].copy_from_slice(&self.scratch[..d]);
            self.members[k * d..(k + 1) * d].copy_from_slice(&self.scratch[d..]);
        }
    }

    fn golden(&mut self, mut lo: f64, mut hi: f64, mut f: impl FnMut(&mut Self, f64) -> f64) -> (f64, f64) {
        const INV_PHI: f64 = 0.618_033_988_749_894_8;
        let mut x1 = hi - INV_PHI * (hi - lo);
        let mut x2 = lo + INV_PHI * (hi - lo);
        let mut f1 = f(self, x1);
        let mut f2 = f(self, x2);
        while hi - lo > GOLDEN_WIDTH {
            if f1 <= f2 {
                hi = x2;
                (x2, f2) = (x1, f1);
                x1 = hi - INV_PHI * (hi - lo);
                f1 = f(self, x1);
            } else {
                lo = x1;
                (x1, f1) = (x2, f2);
                x2 = lo + INV_PHI * (hi - lo);
                f2 = f(self, x2);
            }
        }
        if f1 <= f2 { (x1, f1) } else { (x2, f2) }
    }
}
