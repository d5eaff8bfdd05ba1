//! Seeded randomized checks of the coherence-measure conditions for `C_F`.
//!
//! Each suite runs independent trials; trial `t` draws everything from the
//! child seed `child_seed(cfg.seed, t)`, so a report does not depend on how
//! trials were scheduled and any violation can be replayed from its seed
//! alone. A trial yields a signed `magnitude`: how far the checked inequality
//! overshoots its allowed slack. Positive magnitudes are violations.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::channels::{sample_incoherent_channel, selective_outcomes, PROB_FLOOR};
use crate::exec::Execution;
use crate::linalg::ComplexMatrix;
use crate::measures::{c_f_qubit, c_f_roof_estimate_with, c_l1, f_of, RoofConfig};
use crate::rng::{child_seed, rng_from_seed, Seed, StdRng};
use crate::sampling::{sample_density, sample_incoherent};
use crate::state::DensityMatrix;
use crate::{Error, Result};
use rand::RngExt;

/// Slack on the l1 relation, independent of the suite tolerance.
pub const L1_RELATION_TOL: f64 = 1e-12;
/// Allowed gap between the roof estimate and the qubit closed form.
pub const ROOF_ORACLE_GAP: f64 = 1e-4;
/// Allowed undershoot of the roof estimate below the closed form.
pub const ROOF_UNDERSHOOT: f64 = 1e-9;
/// Minimum l1 coherence of the "coherent" states drawn by the C1 suite.
pub const C1_MIN_COHERENCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    /// Zero exactly on incoherent states.
    C1,
    /// Monotone on average under selective incoherent measurements.
    C3,
    /// Convex.
    C4,
    /// Qubit closed form is `f(C_l1 / 2)`.
    L1Relation,
    /// Convex-roof optimizer reproduces the qubit closed form.
    RoofOracle,
    All,
}

impl Suite {
    pub const INDIVIDUAL: [Suite; 5] = [Suite::C1, Suite::C3, Suite::C4, Suite::L1Relation, Suite::RoofOracle];

    pub fn name(self) -> &'static str {
        match self {
            Suite::C1 => "c1",
            Suite::C3 => "c3",
            Suite::C4 => "c4",
            Suite::L1Relation => "l1_relation",
            Suite::RoofOracle => "roof_oracle",
            Suite::All => "all",
        }
    }

    fn label(self) -> &'static str {
        match self {
            Suite::C1 => "C1",
            Suite::C3 => "C3",
            Suite::C4 => "C4",
            Suite::L1Relation => "L1 relation",
            Suite::RoofOracle => "roof oracle",
            Suite::All => "ALL",
        }
    }

    fn qubit_only(self) -> bool {
        !matches!(self, Suite::C1)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub suite: Suite,
    pub trials: usize,
    pub dim: usize,
    pub seed: Seed,
    pub tolerance: f64,
    pub execution: Execution,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            suite: Suite::All,
            trials: 10_000,
            dim: 2,
            seed: 0,
            tolerance: 1e-9,
            execution: Execution::default(),
        }
    }
}

impl SuiteConfig {
    pub fn new(suite: Suite, trials: usize, seed: Seed) -> Self {
        Self { suite, trials, seed, ..Self::default() }
    }

    fn check(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Unsupported("trials must be at least 1".into()));
        }
        if self.dim < 2 {
            return Err(Error::Unsupported("dim must be at least 2".into()));
        }
        let suites: &[Suite] = if self.suite == Suite::All { &Suite::INDIVIDUAL } else { std::slice::from_ref(&self.suite) };
        for s in suites {
            if s.qubit_only() && self.dim != 2 {
                return Err(Error::Unsupported(format!("{} suite requires dim 2", s.label())));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub trial: usize,
    /// Child seed of the trial; replays it via [`replay`].
    pub seed: Seed,
    pub magnitude: f64,
    pub inputs: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: Suite,
    pub trials_run: usize,
    /// Largest trial magnitude; `≤ 0` means every check held with room to spare.
    pub max_violation: f64,
    pub passed: bool,
    pub violations: Vec<Violation>,
    /// Per-suite reports when `suite` is `all`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub suites: Vec<VerificationReport>,
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for sub in &self.suites {
            writeln!(f, "{sub}")?;
        }
        write!(
            f,
            "{:<12} {}  trials={} violations={} max_violation={:.3e}",
            self.suite.name(),
            if self.passed { "PASS" } else { "FAIL" },
            self.trials_run,
            self.violations.len(),
            self.max_violation
        )
    }
}

struct TrialOutcome {
    magnitude: f64,
    inputs: Value,
}

pub fn run_suite(cfg: &SuiteConfig) -> Result<VerificationReport> {
    cfg.check()?;
    if cfg.suite == Suite::All {
        let suites = Suite::INDIVIDUAL
            .iter()
            .map(|&s| run_single(&SuiteConfig { suite: s, ..cfg.clone() }))
            .collect::<Result<Vec<_>>>()?;
        return Ok(VerificationReport {
            suite: Suite::All,
            trials_run: suites.iter().map(|r| r.trials_run).sum(),
            max_violation: suites.iter().map(|r| r.max_violation).fold(f64::NEG_INFINITY, f64::max),
            passed: suites.iter().all(|r| r.passed),
            violations: suites.iter().flat_map(|r| r.violations.iter().cloned()).collect(),
            suites,
        });
    }
    run_single(cfg)
}

pub fn run_c1_suite(cfg: &SuiteConfig) -> Result<VerificationReport> {
    run_suite(&SuiteConfig { suite: Suite::C1, ..cfg.clone() })
}

pub fn run_c3_suite(cfg: &SuiteConfig) -> Result<VerificationReport> {
    run_suite(&SuiteConfig { suite: Suite::C3, ..cfg.clone() })
}

pub fn run_c4_suite(cfg: &SuiteConfig) -> Result<VerificationReport> {
    run_suite(&SuiteConfig { suite: Suite::C4, ..cfg.clone() })
}

pub fn run_l1_relation_suite(cfg: &SuiteConfig) -> Result<VerificationReport> {
    run_suite(&SuiteConfig { suite: Suite::L1Relation, ..cfg.clone() })
}

pub fn run_roof_oracle_suite(cfg: &SuiteConfig) -> Result<VerificationReport> {
    run_suite(&SuiteConfig { suite: Suite::RoofOracle, ..cfg.clone() })
}

fn run_single(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let outcomes = cfg.execution.map(cfg.trials, |t| {
        let seed = child_seed(cfg.seed, t as u64);
        run_trial(cfg.suite, seed, cfg.dim, cfg.tolerance).map(|o| (t, seed, o))
    });
    let mut max_violation = f64::NEG_INFINITY;
    let mut violations = Vec::new();
    for outcome in outcomes {
        let (trial, seed, o) = outcome?;
        max_violation = max_violation.max(o.magnitude);
        if o.magnitude > 0.0 {
            violations.push(Violation { trial, seed, magnitude: o.magnitude, inputs: o.inputs });
        }
    }
    Ok(VerificationReport {
        suite: cfg.suite,
        trials_run: cfg.trials,
        max_violation,
        passed: violations.is_empty(),
        violations,
        suites: Vec::new(),
    })
}

/// Re-runs one trial from its recorded seed and returns its magnitude.
pub fn replay(suite: Suite, seed: Seed, dim: usize, tolerance: f64) -> Result<f64> {
    if suite == Suite::All {
        return Err(Error::Unsupported("replay needs an individual suite".into()));
    }
    Ok(run_trial(suite, seed, dim, tolerance)?.magnitude)
}

fn run_trial(suite: Suite, seed: Seed, dim: usize, tol: f64) -> Result<TrialOutcome> {
    let mut rng = rng_from_seed(seed);
    match suite {
        Suite::C1 => c1_trial(&mut rng, seed, dim, tol),
        Suite::C3 => c3_trial(&mut rng, tol),
        Suite::C4 => c4_trial(&mut rng, tol),
        Suite::L1Relation => l1_trial(&mut rng),
        Suite::RoofOracle => roof_trial(&mut rng, seed),
        Suite::All => unreachable!("expanded by run_suite"),
    }
}

/// Entries as `[re, im]` pairs, row-major.
pub fn matrix_pairs(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

fn random_state(rng: &mut StdRng, dim: usize) -> Result<DensityMatrix> {
    let rank = rng.random_range(1..=dim);
    sample_density(rng, dim, rank)
}

/// `C_F` by the qubit closed form, or the convex-roof estimate for `dim ≥ 3`.
fn score(rho: &DensityMatrix, seed: Seed) -> Result<f64> {
    if rho.dim() == 2 {
        return c_f_qubit(rho);
    }
    let cfg = RoofConfig { seed, execution: Execution::Sequential, ..RoofConfig::default() };
    Ok(c_f_roof_estimate_with(rho, &cfg)?.value)
}

fn c1_trial(rng: &mut StdRng, seed: Seed, dim: usize, tol: f64) -> Result<TrialOutcome> {
    let incoherent = sample_incoherent(rng, dim);
    let coherent = loop {
        let rho = random_state(rng, dim)?;
        if c_l1(&rho) >= C1_MIN_COHERENCE {
            break rho;
        }
    };
    let zero = score(&incoherent, seed)?;
    let positive = score(&coherent, seed)?;
    Ok(TrialOutcome {
        magnitude: (zero - tol).max(tol - positive),
        inputs: json!({
            "incoherent": matrix_pairs(incoherent.matrix()),
            "coherent": matrix_pairs(coherent.matrix()),
            "incoherent_score": zero,
            "coherent_score": positive,
        }),
    })
}

fn c3_trial(rng: &mut StdRng, tol: f64) -> Result<TrialOutcome> {
    let rho = random_state(rng, 2)?;
    let n_kraus = rng.random_range(1..=4);
    let channel = sample_incoherent_channel(rng, 2, n_kraus);
    let measurement = selective_outcomes(&channel, &rho, PROB_FLOOR)?;
    let mut average = 0.0;
    for o in &measurement.outcomes {
        average += o.probability * c_f_qubit(&o.post_state)?;
    }
    let before = c_f_qubit(&rho)?;
    Ok(TrialOutcome {
        magnitude: average - before - tol,
        inputs: json!({
            "rho": matrix_pairs(rho.matrix()),
            "kraus": channel.kraus().iter().map(matrix_pairs).collect::<Vec<_>>(),
            "average_after": average,
            "before": before,
        }),
    })
}

fn c4_trial(rng: &mut StdRng, tol: f64) -> Result<TrialOutcome> {
    let a = random_state(rng, 2)?;
    let b = random_state(rng, 2)?;
    let w: f64 = rng.random();
    let mixed = DensityMatrix::mix(w, &a, &b)?;
    let lhs = c_f_qubit(&mixed)?;
    let rhs = w * c_f_qubit(&a)? + (1.0 - w) * c_f_qubit(&b)?;
    Ok(TrialOutcome {
        magnitude: lhs - rhs - tol,
        inputs: json!({
            "rho1": matrix_pairs(a.matrix()),
            "rho2": matrix_pairs(b.matrix()),
            "lambda": w,
        }),
    })
}

fn l1_trial(rng: &mut StdRng) -> Result<TrialOutcome> {
    let rho = random_state(rng, 2)?;
    let gap = (c_f_qubit(&rho)? - f_of(c_l1(&rho) / 2.0)?).abs();
    Ok(TrialOutcome { magnitude: gap - L1_RELATION_TOL, inputs: json!({ "rho": matrix_pairs(rho.matrix()) }) })
}

fn roof_trial(rng: &mut StdRng, seed: Seed) -> Result<TrialOutcome> {
    let rho = sample_density(rng, 2, 2)?;
    let exact = c_f_qubit(&rho)?;
    let cfg = RoofConfig { seed, execution: Execution::Sequential, ..RoofConfig::default() };
    let estimate = c_f_roof_estimate_with(&rho, &cfg)?.value;
    Ok(TrialOutcome {
        magnitude: ((estimate - exact).abs() - ROOF_ORACLE_GAP).max(exact - estimate - ROOF_UNDERSHOOT),
        inputs: json!({ "rho": matrix_pairs(rho.matrix()), "estimate": estimate, "closed_form": exact }),
    })
}
