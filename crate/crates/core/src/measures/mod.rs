//! Coherence measures: Uhlmann fidelity, the l1 norm of coherence and the
//! fidelity-based measure `C_F`.

mod roof;

pub use roof::{c_f_roof_estimate, c_f_roof_estimate_with, RoofConfig, RoofResult};

use num_complex::Complex64;

use crate::linalg::{self, c, ComplexMatrix};
use crate::state::{DensityMatrix, PureState};
use crate::{Error, Result, STRUCTURAL_TOL};

/// Uhlmann fidelity `F(ρ, σ) = (Tr √(√ρ σ √ρ))²`.
///
/// Evaluated as the squared nuclear norm of `√ρ √σ`, which has the same
/// singular values as `√(√ρ σ √ρ)` and needs no nested matrix root.
pub fn uhlmann_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    let a = linalg::matrix_sqrt_psd(rho.matrix())?;
    let b = linalg::matrix_sqrt_psd(sigma.matrix())?;
    let nuclear: f64 = (a * b).singular_values().iter().sum();
    Ok(nuclear * nuclear)
}

/// `C_l1(ρ) = Σ_{i≠j} |ρ_ij|`.
pub fn c_l1(rho: &DensityMatrix) -> f64 {
    let n = rho.dim();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                total += rho.get(i, j).norm();
            }
        }
    }
    total
}

/// Index of the largest-modulus amplitude; ties go to the smallest index.
pub fn dominant_index(phi: &PureState) -> usize {
    let mut best = 0;
    let mut best_sq = f64::NEG_INFINITY;
    for (i, z) in phi.amplitudes().iter().enumerate() {
        if z.norm_sqr() > best_sq {
            best_sq = z.norm_sqr();
            best = i;
        }
    }
    best
}

/// `C_F(φ) = √(1 − max_i |c_i|²)`.
pub fn c_f_pure(phi: &PureState) -> f64 {
    c_f_unnormalized(phi.amplitudes().as_slice())
}

/// `C_F` of `ψ/‖ψ‖` for an unnormalized amplitude vector.
///
/// Computed as `√(Σ_{i≠i*} |c_i|² / Σ_i |c_i|²)`, which avoids cancellation
/// for nearly incoherent states and is exactly zero on basis states.
pub(crate) fn c_f_unnormalized(amps: &[Complex64]) -> f64 {
    let (total, max) = amps
        .iter()
        .map(|z| z.norm_sqr())
        .fold((0.0, 0.0f64), |(t, m), x| (t + x, m.max(x)));
    if total == 0.0 {
        return 0.0;
    }
    let rest: f64 = total - max;
    (rest.max(0.0) / total).sqrt()
}

/// `f(x) = √((1 − √(1 − 4x²)) / 2)` on `[0, 1/2]`.
///
/// Arguments up to `1/2 + STRUCTURAL_TOL` are clamped to `1/2`.
pub fn f_of(x: f64) -> Result<f64> {
    if !(-STRUCTURAL_TOL..=0.5 + STRUCTURAL_TOL).contains(&x) {
        return Err(Error::Domain { value: x, lo: 0.0, hi: 0.5 });
    }
    let x = x.clamp(0.0, 0.5);
    // 1 − √(1 − 4x²) = 4x² / (1 + √(1 − 4x²))
    let s = (1.0 - 4.0 * x * x).max(0.0).sqrt();
    Ok(x * (2.0 / (1.0 + s)).sqrt())
}

fn require_qubit(dim: usize) -> Result<()> {
    if dim != 2 {
        return Err(Error::RequiresDim { required: 2, found: dim });
    }
    Ok(())
}

/// Closed-form `C_F` of a qubit state, `f(|ρ_01|)`.
pub fn c_f_qubit(rho: &DensityMatrix) -> Result<f64> {
    require_qubit(rho.dim())?;
    f_of(rho.get(0, 1).norm())
}

/// Weighted pure states `{p_n, |φ_n⟩}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    members: Vec<(f64, PureState)>,
}

impl Ensemble {
    /// Requires non-negative weights summing to one and a common dimension.
    pub fn new(members: Vec<(f64, PureState)>) -> Result<Self> {
        let dim = members.first().ok_or(Error::Empty)?.1.dim();
        let mut total = 0.0;
        for (w, s) in &members {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: s.dim() });
            }
            if !(*w >= 0.0) {
                return Err(Error::Domain { value: *w, lo: 0.0, hi: 1.0 });
            }
            total += w;
        }
        if !((total - 1.0).abs() <= STRUCTURAL_TOL) {
            return Err(Error::Trace { trace: total });
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[(f64, PureState)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.members[0].1.dim()
    }

    /// `Σ_n p_n |φ_n⟩⟨φ_n|`.
    pub fn mixture(&self) -> ComplexMatrix {
        let n = self.dim();
        self.members
            .iter()
            .fold(ComplexMatrix::zeros(n, n), |acc, (w, s)| acc + s.projector() * c(*w, 0.0))
    }

    /// ‖Σ_n p_n |φ_n⟩⟨φ_n| − ρ‖_max.
    pub fn reconstruction_error(&self, rho: &DensityMatrix) -> f64 {
        if rho.dim() != self.dim() {
            return f64::INFINITY;
        }
        linalg::max_abs(&(self.mixture() - rho.matrix()))
    }

    pub fn realizes(&self, rho: &DensityMatrix, tol: f64) -> bool {
        self.reconstruction_error(rho) <= tol
    }

    /// `Σ_n p_n C_F(φ_n)`.
    pub fn average_c_f(&self) -> f64 {
        self.members.iter().map(|(w, s)| w * c_f_pure(s)).sum()
    }
}

/// Parameters of the two-member optimal qubit ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitEnsembleParams {
    /// `q = (1 + √(1 − 4|ρ_01|²)) / 2 ∈ [1/2, 1]`, so that `√(q(1−q)) = |ρ_01|`.
    pub q: f64,
    /// Weight of `√q|0⟩ + √(1−q)|1⟩`; solves `ρ_00 = p̃₁ q + (1 − p̃₁)(1 − q)`.
    pub p_tilde1: f64,
}

impl QubitEnsembleParams {
    /// True when `q = 1/2` to within 1e-9, where both members coincide.
    pub fn is_degenerate(&self) -> bool {
        (2.0 * self.q - 1.0).abs() < 1e-9
    }

    pub fn p_tilde2(&self) -> f64 {
        1.0 - self.p_tilde1
    }

    /// `√q|0⟩ + √(1−q)|1⟩`.
    pub fn first_member(&self) -> PureState {
        qubit_real_state(self.q)
    }

    /// `√(1−q)|0⟩ + √q|1⟩`.
    pub fn second_member(&self) -> PureState {
        let s = qubit_real_state(self.q);
        let a = s.amplitudes();
        PureState::new(vec![a[1], a[0]]).expect("normalized")
    }
}

fn qubit_real_state(q: f64) -> PureState {
    PureState::new(vec![c(q.sqrt(), 0.0), c((1.0 - q).sqrt(), 0.0)]).expect("normalized")
}

/// `q` and `p̃₁` for a qubit state; only `|ρ_01|` and `ρ_00` are used.
pub fn qubit_ensemble_parameters(rho: &DensityMatrix) -> Result<QubitEnsembleParams> {
    require_qubit(rho.dim())?;
    let x = rho.get(0, 1).norm().min(0.5);
    let q = 0.5 * (1.0 + (1.0 - 4.0 * x * x).max(0.0).sqrt());
    let mut params = QubitEnsembleParams { q, p_tilde1: 1.0 };
    if !params.is_degenerate() {
        let rho00 = rho.get(0, 0).re;
        params.p_tilde1 = ((rho00 - (1.0 - q)) / (2.0 * q - 1.0)).clamp(0.0, 1.0);
    }
    Ok(params)
}

/// Two-member ensemble attaining the convex roof of a phase-canonical qubit
/// state (real, non-negative `ρ_01`). Both members have `C_F = f(|ρ_01|)`.
///
/// Zero-weight members are omitted, and when `q = 1/2` the two members
/// coincide and a single member is returned.
pub fn optimal_qubit_ensemble(rho: &DensityMatrix) -> Result<Ensemble> {
    require_qubit(rho.dim())?;
    let off = rho.get(0, 1);
    if off.im.abs() > STRUCTURAL_TOL || off.re < -STRUCTURAL_TOL {
        return Err(Error::NotCanonical { re: off.re, im: off.im });
    }
    let params = qubit_ensemble_parameters(rho)?;
    if params.is_degenerate() {
        return Ensemble::new(vec![(1.0, params.first_member())]);
    }
    let members = [(params.p_tilde1, params.first_member()), (params.p_tilde2(), params.second_member())]
        .into_iter()
        .filter(|(w, _)| *w > 0.0)
        .collect();
    Ensemble::new(members)
}
