//! Conversion of a pure qubit state into a qubit state by an incoherent
//! operation.
//!
//! `|φ⟩ → ρ` is possible iff `C_F(φ) ≥ C_F(ρ)`. Both states are first brought
//! to a canonical frame by incoherent unitaries: the source to
//! `√p|0⟩ + √(1−p)|1⟩` with `p ≥ 1/2`, the target to the two-member mixture
//! `p̃₁|φ̃₁⟩⟨φ̃₁| + p̃₂|φ̃₂⟩⟨φ̃₂|` with `|φ̃₁⟩ = √q|0⟩ + √(1−q)|1⟩`,
//! `|φ̃₂⟩ = √(1−q)|0⟩ + √q|1⟩` and `q ≥ 1/2`. In that frame the condition reads
//! `p ≤ q` and an explicit four-operator channel does the conversion.

use num_complex::Complex64;

use crate::channels::{self, incoherent_unitary, IncoherentChannel};
use crate::linalg::{c, ComplexMatrix, ZERO};
use crate::measures::{c_f_pure, c_f_qubit, qubit_ensemble_parameters};
use crate::state::{DensityMatrix, PureState};
use crate::{Error, Result};

/// Default slack on the `C_F(φ) ≥ C_F(ρ)` comparison.
pub const TRANSFORM_TOL: f64 = 1e-9;

/// `|2q − 1|` below this is treated as `q = 1/2`.
const DEGENERATE_Q: f64 = 1e-9;
/// `1 − p` below this is treated as `p = 1`.
const DEGENERATE_P: f64 = 1e-14;

/// Canonical parameters of a source/target pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformProblem {
    pub p: f64,
    pub q: f64,
    pub p_tilde1: f64,
    /// `U` with `U|φ⟩ = √p|0⟩ + √(1−p)|1⟩`.
    pub source_canonicalizer: ComplexMatrix,
    /// `V` with `VρV†` in canonical form.
    pub target_canonicalizer: ComplexMatrix,
}

impl TransformProblem {
    pub fn new(source: &PureState, target: &DensityMatrix) -> Result<Self> {
        let (p, u) = canonicalize_qubit_pure(source)?;
        let (q, p_tilde1, v) = canonicalize_qubit_mixed(target)?;
        Ok(Self { p, q, p_tilde1, source_canonicalizer: u, target_canonicalizer: v })
    }

    pub fn p_tilde2(&self) -> f64 {
        1.0 - self.p_tilde1
    }

    /// Kraus operators in the canonical frame, zero operators omitted.
    pub fn canonical_kraus(&self) -> Vec<ComplexMatrix> {
        canonical_kraus(self.p, self.q, self.p_tilde1)
    }
}

fn require_qubit(dim: usize) -> Result<()> {
    if dim != 2 {
        return Err(Error::RequiresDim { required: 2, found: dim });
    }
    Ok(())
}

fn phase_of(z: Complex64) -> f64 {
    if z == ZERO { 0.0 } else { z.arg() }
}

/// Incoherent unitary `U` (phases, then an optional swap) and `p ≥ 1/2` with
/// `U|φ⟩ = √p|0⟩ + √(1−p)|1⟩`.
pub fn canonicalize_qubit_pure(phi: &PureState) -> Result<(f64, ComplexMatrix)> {
    require_qubit(phi.dim())?;
    let a = phi.amplitudes();
    let phases = [-phase_of(a[0]), -phase_of(a[1])];
    let (perm, p) = if a[1].norm() > a[0].norm() {
        ([1, 0], a[1].norm_sqr())
    } else {
        ([0, 1], a[0].norm_sqr())
    };
    let total = a[0].norm_sqr() + a[1].norm_sqr();
    Ok((p / total, incoherent_unitary(&phases, &perm)?))
}

/// Returns `(q, p̃₁, U)` with `U = diag(1, e^{i arg ρ_01})`, so that `UρU†`
/// has the real non-negative off-diagonal `|ρ_01|` and equals
/// `p̃₁|φ̃₁⟩⟨φ̃₁| + (1 − p̃₁)|φ̃₂⟩⟨φ̃₂|`. At `q = 1/2` the members coincide and
/// `p̃₁` is set to 1.
pub fn canonicalize_qubit_mixed(rho: &DensityMatrix) -> Result<(f64, f64, ComplexMatrix)> {
    require_qubit(rho.dim())?;
    let params = qubit_ensemble_parameters(rho)?;
    let u = incoherent_unitary(&[0.0, phase_of(rho.get(0, 1))], &[0, 1])?;
    Ok((params.q, params.p_tilde1, u))
}

/// True iff `C_F(φ) ≥ C_F(ρ) − tol`.
pub fn can_transform(phi: &PureState, rho: &DensityMatrix, tol: f64) -> Result<bool> {
    require_qubit(phi.dim())?;
    require_qubit(rho.dim())?;
    Ok(c_f_pure(phi) >= c_f_qubit(rho)? - tol)
}

fn real2(a: f64, b: f64, c_: f64, d: f64) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c(a, 0.0), c(b, 0.0), c(c_, 0.0), c(d, 0.0)])
}

/// Kraus operators mapping `√p|0⟩ + √(1−p)|1⟩` onto the canonical target with
/// parameters `(q, p̃₁)`, for `1/2 ≤ p ≤ q ≤ 1`.
fn canonical_kraus(p: f64, q: f64, p_tilde1: f64) -> Vec<ComplexMatrix> {
    let p_tilde2 = 1.0 - p_tilde1;
    let identity = real2(1.0, 0.0, 0.0, 1.0);
    let swap = real2(0.0, 1.0, 1.0, 0.0);

    let ops: Vec<(f64, ComplexMatrix)> = if (2.0 * q - 1.0).abs() < DEGENERATE_Q {
        // target is the maximally coherent pure state, hence so is the source
        vec![(1.0, identity)]
    } else if 1.0 - p < DEGENERATE_P {
        // incoherent source, incoherent target diag(p̃₁, p̃₂)
        vec![(p_tilde1, identity), (p_tilde2, swap)]
    } else {
        let denom = 2.0 * q - 1.0;
        let same = ((p + q - 1.0) / denom).max(0.0);
        let cross = ((q - p) / denom).max(0.0);
        let (rq, rq1) = (q.sqrt(), (1.0 - q).sqrt());
        let (rp, rp1) = (p.sqrt(), (1.0 - p).sqrt());
        vec![
            (p_tilde1 * same, real2(rq / rp, 0.0, 0.0, rq1 / rp1)),
            (p_tilde1 * cross, real2(0.0, rq / rp1, rq1 / rp, 0.0)),
            (p_tilde2 * same, real2(0.0, rq1 / rp1, rq / rp, 0.0)),
            (p_tilde2 * cross, real2(rq1 / rp, 0.0, 0.0, rq / rp1)),
        ]
    };
    ops.into_iter()
        .filter(|(w, _)| *w > 0.0)
        .map(|(w, k)| k * c(w.sqrt(), 0.0))
        .collect()
}

/// Builds an incoherent channel `Λ` with `Λ(|φ⟩⟨φ|) = ρ`.
///
/// The canonical-frame operators `K_n` are returned as `V† K_n U`, where `U`
/// canonicalizes the source and `V` the target. Fails with
/// [`Error::NotTransformable`] when `C_F(φ) < C_F(ρ) − TRANSFORM_TOL`.
pub fn build_transform_channel(phi: &PureState, rho: &DensityMatrix) -> Result<IncoherentChannel> {
    if !can_transform(phi, rho, TRANSFORM_TOL)? {
        return Err(Error::NotTransformable { source_cf: c_f_pure(phi), target_cf: c_f_qubit(rho)? });
    }
    let problem = TransformProblem::new(phi, rho)?;
    let u = &problem.source_canonicalizer;
    let v_dag = problem.target_canonicalizer.adjoint();
    let ops = problem.canonical_kraus().into_iter().map(|k| &v_dag * k * u).collect();
    // entries of V†KU are single products of nonzero values, so the column
    // structure survives exactly; the tolerance only matters for completeness
    channels::validate_channel(ops, TRANSFORM_TOL)
}

/// Canonical-frame channel for explicit parameters; used to exercise the
/// construction directly over `(p, q, p̃₁)`.
pub fn canonical_channel(p: f64, q: f64, p_tilde1: f64) -> Result<IncoherentChannel> {
    channels::validate_channel(canonical_kraus(p, q, p_tilde1), TRANSFORM_TOL)
}

/// `√p|0⟩ + √(1−p)|1⟩`.
pub fn canonical_source(p: f64) -> PureState {
    PureState::new(vec![c(p.sqrt(), 0.0), c((1.0 - p).sqrt(), 0.0)]).expect("normalized")
}

/// `p̃₁|φ̃₁⟩⟨φ̃₁| + (1 − p̃₁)|φ̃₂⟩⟨φ̃₂|` written out entrywise.
pub fn canonical_target(q: f64, p_tilde1: f64) -> Result<DensityMatrix> {
    let off = (q * (1.0 - q)).sqrt();
    let d0 = p_tilde1 * q + (1.0 - p_tilde1) * (1.0 - q);
    DensityMatrix::from_real_rows(&[&[d0, off], &[off, 1.0 - d0]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{apply_channel, is_incoherent_kraus};
    use crate::linalg::max_abs;
    use crate::sampling;
    use crate::state::is_incoherent;

    fn rho_03() -> DensityMatrix {
        DensityMatrix::from_real_rows(&[&[0.5, 0.3], &[0.3, 0.5]]).unwrap()
    }

    fn assert_realizes(ch: &IncoherentChannel, phi: &PureState, rho: &DensityMatrix, tol: f64) {
        assert!(ch.completeness_residual() <= tol, "completeness {}", ch.completeness_residual());
        assert!(ch.kraus().iter().all(|k| is_incoherent_kraus(k, 0.0)));
        let out = apply_channel(ch, &phi.to_density()).unwrap();
        let err = max_abs(&(out.matrix() - rho.matrix()));
        assert!(err <= tol, "reconstruction {err:e}");
    }

    #[test]
    fn pure_canonicalization_examples() {
        let (p, u) = canonicalize_qubit_pure(&PureState::from_real(&[0.3f64.sqrt(), 0.7f64.sqrt()]).unwrap()).unwrap();
        assert!((p - 0.7).abs() < 1e-15);
        assert_eq!(u, real2(0.0, 1.0, 1.0, 0.0));

        let phi = PureState::from_real(&[0.7f64.sqrt(), -(0.3f64.sqrt())]).unwrap();
        let (p, u) = canonicalize_qubit_pure(&phi).unwrap();
        assert!((p - 0.7).abs() < 1e-15);
        assert!(max_abs(&(u.clone() - real2(1.0, 0.0, 0.0, -1.0))) < 1e-15);
        let out = &u * phi.amplitudes();
        assert!((out[0].re - 0.7f64.sqrt()).abs() < 1e-15 && (out[1].re - 0.3f64.sqrt()).abs() < 1e-15);

        let (p, u) = canonicalize_qubit_pure(&PureState::basis(2, 0)).unwrap();
        assert_eq!(p, 1.0);
        assert_eq!(u, ComplexMatrix::identity(2, 2));
    }

    #[test]
    fn mixed_canonicalization_examples() {
        let m = crate::linalg::from_rows(&[vec![c(0.5, 0.0), c(0.0, 0.3)], vec![c(0.0, -0.3), c(0.5, 0.0)]]).unwrap();
        let rho = DensityMatrix::new(m).unwrap();
        let (q, pt, u) = canonicalize_qubit_mixed(&rho).unwrap();
        assert!((q - 0.9).abs() < 1e-15);
        assert!((pt - 0.5).abs() < 1e-15);
        assert!(max_abs(&(u.clone() - incoherent_unitary(&[0.0, std::f64::consts::FRAC_PI_2], &[0, 1]).unwrap())) < 1e-15);
        let canon = rho.conjugate(&u).unwrap();
        assert!(max_abs(&(canon.matrix() - canonical_target(q, pt).unwrap().matrix())) < 1e-15);

        let (q, pt, u) = canonicalize_qubit_mixed(&DensityMatrix::diagonal(&[0.3, 0.7]).unwrap()).unwrap();
        assert_eq!((q, u), (1.0, ComplexMatrix::identity(2, 2)));
        assert!((pt - 0.3).abs() < 1e-15);

        let max = DensityMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap();
        let (q, pt, u) = canonicalize_qubit_mixed(&max).unwrap();
        assert_eq!((q, pt), (0.5, 1.0));
        assert_eq!(u, ComplexMatrix::identity(2, 2));
    }

    #[test]
    fn canonicalization_round_trip() {
        for seed in 0..200 {
            let rho = sampling::random_density(2, 2, seed).unwrap();
            let (q, pt, u) = canonicalize_qubit_mixed(&rho).unwrap();
            let canon = rho.conjugate(&u).unwrap();
            assert!(max_abs(&(canon.matrix() - canonical_target(q, pt).unwrap().matrix())) <= 1e-12);
            let back = canon.conjugate(&u.adjoint()).unwrap();
            assert!(max_abs(&(back.matrix() - rho.matrix())) <= 1e-12);

            let phi = sampling::random_pure(2, seed);
            let (p, u) = canonicalize_qubit_pure(&phi).unwrap();
            assert!(p >= 0.5);
            let out = &u * phi.amplitudes();
            let want = canonical_source(p);
            assert!((out - want.amplitudes()).camax() <= 1e-12);
        }
    }

    #[test]
    fn can_transform_examples() {
        let phi = PureState::from_real(&[0.6f64.sqrt(), 0.4f64.sqrt()]).unwrap();
        assert!(can_transform(&phi, &rho_03(), TRANSFORM_TOL).unwrap());
        assert!(!can_transform(&PureState::basis(2, 0), &rho_03(), TRANSFORM_TOL).unwrap());
        let plus = PureState::from_real(&[0.5f64.sqrt(), 0.5f64.sqrt()]).unwrap();
        for seed in 0..100 {
            let rho = sampling::random_density(2, 1 + seed as usize % 2, seed).unwrap();
            assert!(can_transform(&plus, &rho, TRANSFORM_TOL).unwrap());
        }
        let qutrit = PureState::basis(3, 0);
        assert!(matches!(can_transform(&qutrit, &rho_03(), 1e-9), Err(Error::RequiresDim { .. })));
    }

    #[test]
    fn build_example() {
        let phi = PureState::from_real(&[0.6f64.sqrt(), 0.4f64.sqrt()]).unwrap();
        let ch = build_transform_channel(&phi, &rho_03()).unwrap();
        assert_eq!(ch.len(), 4);
        assert_realizes(&ch, &phi, &rho_03(), 1e-10);
    }

    #[test]
    fn equal_coherence_drops_cross_terms() {
        // p = q: K₂ = K₄ = 0, K₁ = √p̃₁·I, K₃ = √p̃₂·X
        let ch = canonical_channel(0.8, 0.8, 0.25).unwrap();
        assert_eq!(ch.len(), 2);
        assert!(max_abs(&(ch.kraus()[0].clone() - real2(0.5, 0.0, 0.0, 0.5))) < 1e-15);
        let s = 0.75f64.sqrt();
        assert!(max_abs(&(ch.kraus()[1].clone() - real2(0.0, s, s, 0.0))) < 1e-15);
        assert_realizes(&ch, &canonical_source(0.8), &canonical_target(0.8, 0.25).unwrap(), 1e-10);
    }

    #[test]
    fn pure_target_uses_two_operators() {
        let (p, q) = (0.6, 0.85);
        let ch = canonical_channel(p, q, 1.0).unwrap();
        assert_eq!(ch.len(), 2);
        let target = canonical_source(q).to_density();
        assert_realizes(&ch, &canonical_source(p), &target, 1e-10);
    }

    #[test]
    fn degenerate_half_q() {
        let plus = PureState::from_real(&[0.5f64.sqrt(), 0.5f64.sqrt()]).unwrap();
        let target = PureState::new(vec![c(0.5f64.sqrt(), 0.0), Complex64::from_polar(0.5f64.sqrt(), 1.1)]).unwrap();
        let ch = build_transform_channel(&plus, &target.to_density()).unwrap();
        assert_eq!(ch.len(), 1);
        assert_realizes(&ch, &plus, &target.to_density(), 1e-12);
    }

    #[test]
    fn degenerate_incoherent_source() {
        let zero = PureState::basis(2, 0);
        let target = DensityMatrix::diagonal(&[0.3, 0.7]).unwrap();
        let ch = build_transform_channel(&zero, &target).unwrap();
        assert_eq!(ch.len(), 2);
        assert_realizes(&ch, &zero, &target, 1e-15);
        // |1⟩ as the source goes through the swap canonicalizer
        let ch = build_transform_channel(&PureState::basis(2, 1), &target).unwrap();
        assert_realizes(&ch, &PureState::basis(2, 1), &target, 1e-15);
    }

    #[test]
    fn degenerate_incoherent_target_from_coherent_source() {
        let phi = PureState::from_real(&[0.6f64.sqrt(), 0.4f64.sqrt()]).unwrap();
        let target = DensityMatrix::diagonal(&[0.2, 0.8]).unwrap();
        let ch = build_transform_channel(&phi, &target).unwrap();
        assert_realizes(&ch, &phi, &target, 1e-12);
        assert!(is_incoherent(&apply_channel(&ch, &phi.to_density()).unwrap(), 1e-12));
    }

    #[test]
    fn refuses_when_coherence_would_increase() {
        match build_transform_channel(&PureState::basis(2, 0), &rho_03()) {
            Err(Error::NotTransformable { source_cf, target_cf }) => {
                assert_eq!(source_cf, 0.0);
                assert!((target_cf - 0.1f64.sqrt()).abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn random_pairs_with_phases() {
        for seed in 0..300 {
            let phi = sampling::random_pure(2, 2 * seed);
            let rho = sampling::random_density(2, 1 + seed as usize % 2, 2 * seed + 1).unwrap();
            if c_f_pure(&phi) >= c_f_qubit(&rho).unwrap() {
                let ch = build_transform_channel(&phi, &rho).unwrap();
                assert_realizes(&ch, &phi, &rho, 1e-10);
            } else if c_f_pure(&phi) < c_f_qubit(&rho).unwrap() - TRANSFORM_TOL {
                assert!(matches!(build_transform_channel(&phi, &rho), Err(Error::NotTransformable { .. })));
            }
        }
    }
}
