//! Kraus-operator channels and the incoherent-operation test.
//!
//! A Kraus operator maps every incoherent state to an incoherent state iff it
//! sends each basis state |i⟩ to a multiple of a single basis state, i.e. iff
//! each of its columns has at most one nonzero entry.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, RngExt};
use serde::Serialize;

use crate::linalg::{self, c, ComplexMatrix, ZERO};
use crate::rng::{rng_from_seed, Seed};
use crate::sampling::complex_gaussian;
use crate::state::DensityMatrix;
use crate::{Error, Result};

/// Default probability below which selective outcomes are dropped.
pub const PROB_FLOOR: f64 = 1e-12;

/// A validated incoherent CPTP map `ρ ↦ Σ_n K_n ρ K_n†`.
#[derive(Debug, Clone, PartialEq)]
pub struct IncoherentChannel {
    dim: usize,
    kraus: Vec<ComplexMatrix>,
}

impl IncoherentChannel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn len(&self) -> usize {
        self.kraus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kraus.is_empty()
    }

    /// ‖Σ_n K_n†K_n − I‖_max.
    pub fn completeness_residual(&self) -> f64 {
        completeness_residual(&self.kraus, self.dim)
    }
}

/// Column of a Kraus operator with more than one nonzero entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncoherenceViolation {
    pub operator: usize,
    pub column: usize,
    pub nonzeros: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionViolation {
    pub operator: usize,
    pub rows: usize,
    pub cols: usize,
}

/// Outcome of checking a Kraus list; lists every failed condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelReport {
    pub dim: usize,
    pub operators: usize,
    pub tolerance: f64,
    pub dimension_violations: Vec<DimensionViolation>,
    /// `None` when dimensions are inconsistent.
    pub completeness_residual: Option<f64>,
    pub incoherence_violations: Vec<IncoherenceViolation>,
}

impl ChannelReport {
    pub fn is_empty_channel(&self) -> bool {
        self.operators == 0
    }

    pub fn dimensions_ok(&self) -> bool {
        !self.is_empty_channel() && self.dimension_violations.is_empty()
    }

    pub fn complete(&self) -> bool {
        matches!(self.completeness_residual, Some(r) if r <= self.tolerance)
    }

    pub fn incoherent(&self) -> bool {
        self.dimensions_ok() && self.incoherence_violations.is_empty()
    }

    pub fn passed(&self) -> bool {
        self.dimensions_ok() && self.complete() && self.incoherent()
    }
}

impl fmt::Display for ChannelReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty_channel() {
            return write!(f, "no Kraus operators");
        }
        let mut parts = Vec::new();
        for v in &self.dimension_violations {
            parts.push(format!(
                "dimension mismatch: operator {} is {}x{}, expected {}x{}",
                v.operator, v.rows, v.cols, self.dim, self.dim
            ));
        }
        if let Some(r) = self.completeness_residual {
            if r > self.tolerance {
                parts.push(format!("completeness violation: residual {r:e} > {:e}", self.tolerance));
            }
        }
        for v in &self.incoherence_violations {
            parts.push(format!(
                "incoherence violation: operator {} has {} nonzeros in column {}",
                v.operator, v.nonzeros, v.column
            ));
        }
        if parts.is_empty() {
            write!(f, "valid")
        } else {
            write!(f, "{}", parts.join("; "))
        }
    }
}

fn completeness_residual(ops: &[ComplexMatrix], dim: usize) -> f64 {
    let sum = ops.iter().fold(ComplexMatrix::zeros(dim, dim), |acc, k| acc + k.adjoint() * k);
    linalg::max_abs(&(sum - ComplexMatrix::identity(dim, dim)))
}

fn column_nonzeros(k: &ComplexMatrix, col: usize, tol: f64) -> usize {
    k.column(col).iter().filter(|z| z.norm() > tol).count()
}

/// True iff every column of `k` has at most one entry of modulus above `tol`.
pub fn is_incoherent_kraus(k: &ComplexMatrix, tol: f64) -> bool {
    (0..k.ncols()).all(|j| column_nonzeros(k, j, tol) <= 1)
}

/// Checks dimensions, completeness and column structure, collecting every
/// violation. The same `tol` bounds the completeness residual and decides
/// which entries count as nonzero.
pub fn check_channel(ops: &[ComplexMatrix], tol: f64) -> ChannelReport {
    let dim = ops.first().map_or(0, |k| k.nrows());
    let mut report = ChannelReport {
        dim,
        operators: ops.len(),
        tolerance: tol,
        dimension_violations: Vec::new(),
        completeness_residual: None,
        incoherence_violations: Vec::new(),
    };
    for (n, k) in ops.iter().enumerate() {
        if k.nrows() != dim || k.ncols() != dim {
            report.dimension_violations.push(DimensionViolation { operator: n, rows: k.nrows(), cols: k.ncols() });
        }
    }
    if !report.dimensions_ok() {
        return report;
    }
    report.completeness_residual = Some(completeness_residual(ops, dim));
    for (n, k) in ops.iter().enumerate() {
        for col in 0..dim {
            let nonzeros = column_nonzeros(k, col, tol);
            if nonzeros > 1 {
                report.incoherence_violations.push(IncoherenceViolation { operator: n, column: col, nonzeros });
            }
        }
    }
    report
}

pub fn validate_channel(ops: Vec<ComplexMatrix>, tol: f64) -> Result<IncoherentChannel> {
    let report = check_channel(&ops, tol);
    if !report.passed() {
        return Err(Error::Channel(report));
    }
    Ok(IncoherentChannel { dim: report.dim, kraus: ops })
}

/// `Λ(ρ) = Σ_n K_n ρ K_n†`.
pub fn apply_channel(channel: &IncoherentChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    check_dims(channel, rho)?;
    let out = channel
        .kraus
        .iter()
        .fold(ComplexMatrix::zeros(channel.dim, channel.dim), |acc, k| acc + k * rho.matrix() * k.adjoint());
    Ok(DensityMatrix::from_trusted(out))
}

fn check_dims(channel: &IncoherentChannel, rho: &DensityMatrix) -> Result<()> {
    if channel.dim != rho.dim() {
        return Err(Error::DimensionMismatch { expected: channel.dim, found: rho.dim() });
    }
    Ok(())
}

/// `p_n = Tr(K_n ρ K_n†)` and `ρ_n = K_n ρ K_n† / p_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectiveOutcome {
    /// Index of the Kraus operator that produced this outcome.
    pub kraus_index: usize,
    pub probability: f64,
    pub post_state: DensityMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectiveMeasurement {
    /// Outcomes with probability above the floor, in Kraus order.
    pub outcomes: Vec<SelectiveOutcome>,
    /// Kraus indices whose probability fell at or below the floor.
    pub dropped: Vec<usize>,
    /// Σ p_n over every operator, kept or dropped.
    pub total_probability: f64,
    /// Σ p_n over the dropped operators.
    pub dropped_probability: f64,
}

pub fn selective_outcomes(
    channel: &IncoherentChannel,
    rho: &DensityMatrix,
    prob_floor: f64,
) -> Result<SelectiveMeasurement> {
    check_dims(channel, rho)?;
    let mut result = SelectiveMeasurement {
        outcomes: Vec::new(),
        dropped: Vec::new(),
        total_probability: 0.0,
        dropped_probability: 0.0,
    };
    for (n, k) in channel.kraus.iter().enumerate() {
        let unnormalized = k * rho.matrix() * k.adjoint();
        let p = linalg::trace(&unnormalized).re;
        result.total_probability += p;
        if p > prob_floor {
            result.outcomes.push(SelectiveOutcome {
                kraus_index: n,
                probability: p,
                post_state: DensityMatrix::from_trusted(unnormalized / c(p, 0.0)),
            });
        } else {
            result.dropped.push(n);
            result.dropped_probability += p;
        }
    }
    Ok(result)
}

/// Unitary `U|j⟩ = e^{i·phases[j]} |permutation[j]⟩`.
pub fn incoherent_unitary(phases: &[f64], permutation: &[usize]) -> Result<ComplexMatrix> {
    let dim = phases.len();
    if permutation.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: permutation.len() });
    }
    let mut seen = vec![false; dim];
    for &p in permutation {
        if p >= dim || seen[p] {
            return Err(Error::NotPermutation { dim });
        }
        seen[p] = true;
    }
    let mut u = DMatrix::from_element(dim, dim, ZERO);
    for j in 0..dim {
        u[(permutation[j], j)] = Complex64::from_polar(1.0, phases[j]);
    }
    Ok(u)
}

/// Random incoherent channel with `n_kraus` operators.
///
/// Each operator is `K_n = Σ_i a_n(i) |f_n(i)⟩⟨i|` with random targets
/// `f_n(i)`. Completeness requires the vectors `u_i = Σ_n a_n(i) e_{n, f_n(i)}`
/// to be orthonormal, so column `i`'s amplitudes are drawn Gaussian and
/// projected orthogonally to the earlier columns that share a target row
/// under some `n`. When that leaves nothing, the targets are redrawn and
/// eventually chosen collision-free, which always succeeds.
pub fn sample_incoherent_channel<R: Rng + ?Sized>(rng: &mut R, dim: usize, n_kraus: usize) -> IncoherentChannel {
    let n_kraus = n_kraus.max(1);
    // targets[i][n], amps[i][n]
    let mut targets: Vec<Vec<usize>> = Vec::with_capacity(dim);
    let mut amps: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    for col in 0..dim {
        let mut accepted = None;
        for attempt in 0..9 {
            let t: Vec<usize> = if attempt < 8 {
                (0..n_kraus).map(|_| rng.random_range(0..dim)).collect()
            } else {
                (0..n_kraus).map(|n| free_row(rng, dim, targets.iter().map(|t| t[n]))).collect()
            };
            let g: Vec<Complex64> = (0..n_kraus).map(|_| complex_gaussian(rng)).collect();
            let g_norm = norm(&g);
            let constraints: Vec<Vec<Complex64>> = (0..col)
                .map(|i| (0..n_kraus).map(|n| if targets[i][n] == t[n] { amps[i][n] } else { ZERO }).collect())
                .collect();
            let a = project_out(g, &constraints);
            let a_norm = norm(&a);
            if a_norm > 1e-3 * g_norm {
                accepted = Some((t, a.into_iter().map(|z| z / a_norm).collect::<Vec<_>>()));
                break;
            }
        }
        let (t, a) = accepted.expect("collision-free targets always admit a column");
        targets.push(t);
        amps.push(a);
    }
    let kraus = (0..n_kraus)
        .map(|n| {
            let mut k = DMatrix::from_element(dim, dim, ZERO);
            for i in 0..dim {
                k[(targets[i][n], i)] = amps[i][n];
            }
            k
        })
        .collect();
    IncoherentChannel { dim, kraus }
}

fn free_row<R: Rng + ?Sized>(rng: &mut R, dim: usize, used: impl Iterator<Item = usize>) -> usize {
    let mut taken = vec![false; dim];
    used.for_each(|r| taken[r] = true);
    let free: Vec<usize> = (0..dim).filter(|&r| !taken[r]).collect();
    free[rng.random_range(0..free.len())]
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Removes from `g` its components along the span of `vs` (two passes of
/// modified Gram–Schmidt).
fn project_out(mut g: Vec<Complex64>, vs: &[Vec<Complex64>]) -> Vec<Complex64> {
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let p = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
            }
        }
        let n = norm(&w);
        if n > 1e-12 {
            basis.push(w.into_iter().map(|z| z / n).collect());
        }
    }
    for _ in 0..2 {
        for b in &basis {
            let p = dot(b, &g);
            g.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
        }
    }
    g
}

pub fn random_incoherent_channel(dim: usize, n_kraus: usize, seed: Seed) -> IncoherentChannel {
    sample_incoherent_channel(&mut rng_from_seed(seed), dim, n_kraus)
}

/// Full dephasing `{|i⟩⟨i|}`.
pub fn dephasing_channel(dim: usize) -> IncoherentChannel {
    let kraus = (0..dim)
        .map(|i| DMatrix::from_fn(dim, dim, |r, s| if r == i && s == i { c(1.0, 0.0) } else { ZERO }))
        .collect();
    IncoherentChannel { dim, kraus }
}

pub fn identity_channel(dim: usize) -> IncoherentChannel {
    IncoherentChannel { dim, kraus: vec![ComplexMatrix::identity(dim, dim)] }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, from_real_rows, max_abs};
    use crate::sampling;
    use crate::state::is_incoherent;

    fn hadamard() -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        from_real_rows(&[&[s, s], &[s, -s]]).unwrap()
    }

    fn pauli_x() -> ComplexMatrix {
        from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    fn rho_03() -> DensityMatrix {
        DensityMatrix::from_real_rows(&[&[0.5, 0.3], &[0.3, 0.5]]).unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(validate_channel(vec![diag(&[1.0, 0.0]), diag(&[0.0, 1.0])], 1e-12).is_ok());
        match validate_channel(vec![hadamard()], 1e-9) {
            Err(Error::Channel(r)) => {
                assert!(r.complete());
                assert_eq!(r.incoherence_violations[0], IncoherenceViolation { operator: 0, column: 0, nonzeros: 2 });
            }
            other => panic!("unexpected {other:?}"),
        }
        match validate_channel(vec![diag(&[1.0, 0.0])], 1e-9) {
            Err(Error::Channel(r)) => {
                assert!(!r.complete());
                assert!(r.incoherent());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn validate_reports_every_violation() {
        let r = check_channel(&[hadamard() * c(0.5, 0.0)], 1e-9);
        assert!(!r.complete());
        assert_eq!(r.incoherence_violations.len(), 2);
        let msg = r.to_string();
        assert!(msg.contains("completeness violation") && msg.contains("column 1"));
    }

    #[test]
    fn validate_dimension_mismatch() {
        let r = check_channel(&[ComplexMatrix::identity(2, 2), ComplexMatrix::identity(3, 3)], 1e-9);
        assert!(!r.dimensions_ok());
        assert_eq!(r.dimension_violations.len(), 1);
        assert!(check_channel(&[], 1e-9).is_empty_channel());
    }

    #[test]
    fn kraus_structure_examples() {
        assert!(is_incoherent_kraus(&pauli_x(), 0.0));
        assert!(is_incoherent_kraus(&diag(&[0.3, -2.0]), 0.0));
        assert!(!is_incoherent_kraus(&hadamard(), 1e-12));
    }

    #[test]
    fn apply_examples() {
        let out = apply_channel(&dephasing_channel(2), &rho_03()).unwrap();
        assert_eq!(out.matrix(), &diag(&[0.5, 0.5]));
        assert_eq!(apply_channel(&identity_channel(2), &rho_03()).unwrap(), rho_03());
        let x = validate_channel(vec![pauli_x()], 1e-12).unwrap();
        let out = apply_channel(&x, &DensityMatrix::diagonal(&[0.3, 0.7]).unwrap()).unwrap();
        assert_eq!(out.matrix(), &diag(&[0.7, 0.3]));
    }

    #[test]
    fn selective_examples() {
        let m = selective_outcomes(&dephasing_channel(2), &rho_03(), PROB_FLOOR).unwrap();
        assert_eq!(m.outcomes.len(), 2);
        assert!((m.outcomes[0].probability - 0.5).abs() < 1e-15);
        assert_eq!(m.outcomes[0].post_state.matrix(), &diag(&[1.0, 0.0]));
        assert_eq!(m.outcomes[1].post_state.matrix(), &diag(&[0.0, 1.0]));

        let m = selective_outcomes(&identity_channel(2), &rho_03(), PROB_FLOOR).unwrap();
        assert_eq!(m.outcomes.len(), 1);
        assert_eq!(m.outcomes[0].post_state, rho_03());

        let zero = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
        let m = selective_outcomes(&dephasing_channel(2), &zero, PROB_FLOOR).unwrap();
        assert_eq!(m.outcomes.len(), 1);
        assert_eq!(m.dropped, vec![1]);
        assert_eq!(m.total_probability, 1.0);
    }

    #[test]
    fn selective_outcomes_average_to_channel_output() {
        for seed in 0..300 {
            let ch = random_incoherent_channel(3, 1 + seed as usize % 4, seed);
            let rho = sampling::random_density(3, 3, seed + 1000).unwrap();
            let m = selective_outcomes(&ch, &rho, 0.0).unwrap();
            let avg = m
                .outcomes
                .iter()
                .fold(ComplexMatrix::zeros(3, 3), |acc, o| acc + o.post_state.matrix() * c(o.probability, 0.0));
            let out = apply_channel(&ch, &rho).unwrap();
            assert!(max_abs(&(avg - out.matrix())) <= 1e-10);
            assert!((m.total_probability - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn unitary_examples() {
        let theta = 0.7;
        let u = incoherent_unitary(&[0.0, theta], &[0, 1]).unwrap();
        assert_eq!(u[(0, 0)], c(1.0, 0.0));
        assert_eq!(u[(1, 1)], Complex64::from_polar(1.0, theta));
        assert_eq!(u[(0, 1)], ZERO);
        assert_eq!(incoherent_unitary(&[0.0, 0.0], &[1, 0]).unwrap(), pauli_x());
        assert_eq!(incoherent_unitary(&[0.0, 0.0], &[0, 1]).unwrap(), ComplexMatrix::identity(2, 2));
        assert!(matches!(incoherent_unitary(&[0.0, 0.0], &[0, 0]), Err(Error::NotPermutation { .. })));
        let u = incoherent_unitary(&[0.1, 0.2, 0.3], &[2, 0, 1]).unwrap();
        assert!(is_incoherent_kraus(&u, 0.0));
        assert!(max_abs(&(u.adjoint() * &u - ComplexMatrix::identity(3, 3))) < 1e-15);
    }

    #[test]
    fn random_channels_are_valid() {
        for seed in 0..500 {
            let dim = 2 + seed as usize % 4;
            let n = 1 + (seed as usize / 4) % 5;
            let ch = random_incoherent_channel(dim, n, seed);
            assert_eq!(ch.len(), n);
            assert!(ch.completeness_residual() <= 1e-12, "seed {seed}: {}", ch.completeness_residual());
            assert!(ch.kraus().iter().all(|k| is_incoherent_kraus(k, 0.0)));
            assert!(validate_channel(ch.kraus().to_vec(), 1e-12).is_ok());
        }
    }

    #[test]
    fn random_channels_include_collisions() {
        // some operator must map two basis states onto the same row
        let collides = (0..200).any(|seed| {
            random_incoherent_channel(3, 3, seed).kraus().iter().any(|k| {
                (0..3).any(|r| (0..3).filter(|&col| k[(r, col)] != ZERO).count() > 1)
            })
        });
        assert!(collides);
    }

    #[test]
    fn single_kraus_channel_is_unitary() {
        for seed in 0..100 {
            let ch = random_incoherent_channel(3, 1, seed);
            let k = &ch.kraus()[0];
            assert!(max_abs(&(k * k.adjoint() - ComplexMatrix::identity(3, 3))) < 1e-12);
        }
    }

    #[test]
    fn channels_preserve_trace_hermiticity_and_incoherence() {
        for seed in 0..1000 {
            let ch = random_incoherent_channel(2, 1 + seed as usize % 4, seed);
            let rho = sampling::random_density(2, 1 + seed as usize % 2, seed + 7).unwrap();
            let out = apply_channel(&ch, &rho).unwrap();
            assert!((linalg::trace(out.matrix()).re - 1.0).abs() <= 1e-10);
            assert_eq!(linalg::max_asymmetry(out.matrix()), 0.0);
            let inc = sampling::random_incoherent(2, seed + 3);
            let out = apply_channel(&ch, &inc).unwrap();
            assert!(is_incoherent(&out, 1e-12));
        }
    }
}
