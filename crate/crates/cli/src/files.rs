//! JSON state and channel files.
//!
//! Complex numbers are `[re, im]` pairs. Numbers are written in the shortest
//! decimal form that parses back to the same `f64`, so a write/read cycle is
//! bit-exact.
//!
//! ```json
//! {"kind": "pure", "dim": 2, "data": [[0.6, 0.0], [0.0, 0.8]]}
//! {"kind": "density", "dim": 2, "data": [[[0.5, 0.0], [0.3, 0.0]], [[0.3, 0.0], [0.5, 0.0]]]}
//! {"dim": 2, "kraus": [[[[1, 0], [0, 0]], [[0, 0], [0, 0]]], [[[0, 0], [0, 0]], [[0, 0], [1, 0]]]]}
//! ```

use std::fs;
use std::path::Path;

use fidelity_coherence::channels::IncoherentChannel;
use fidelity_coherence::linalg::ComplexMatrix;
use fidelity_coherence::verify::matrix_pairs;
use fidelity_coherence::{DensityMatrix, PureState};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub type Pair = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Pure,
    Density,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateData {
    Vector(Vec<Pair>),
    Matrix(Vec<Vec<Pair>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub kind: StateKind,
    pub dim: usize,
    pub data: StateData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    pub dim: usize,
    pub kraus: Vec<Vec<Vec<Pair>>>,
}

/// A state read from disk.
#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Pure(PureState),
    Density(DensityMatrix),
}

impl State {
    pub fn dim(&self) -> usize {
        match self {
            State::Pure(s) => s.dim(),
            State::Density(m) => m.dim(),
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        match self {
            State::Pure(s) => s.to_density(),
            State::Density(m) => m.clone(),
        }
    }
}

fn complex(p: &Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn pair(z: &Complex64) -> Pair {
    [z.re, z.im]
}

fn matrix_from_pairs(rows: &[Vec<Pair>], dim: usize, what: &str) -> Result<ComplexMatrix, CliError> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(CliError::Parse(format!("{what} must be a {dim}x{dim} array of [re, im] pairs")));
    }
    Ok(ComplexMatrix::from_fn(dim, dim, |i, j| complex(&rows[i][j])))
}

impl StateFile {
    pub fn from_pure(state: &PureState) -> Self {
        Self {
            kind: StateKind::Pure,
            dim: state.dim(),
            data: StateData::Vector(state.amplitudes().iter().map(pair).collect()),
        }
    }

    pub fn from_density(rho: &DensityMatrix) -> Self {
        Self { kind: StateKind::Density, dim: rho.dim(), data: StateData::Matrix(matrix_pairs(rho.matrix())) }
    }

    /// Raw matrix or vector, before any physical validation.
    fn shape_checked(&self) -> Result<(), CliError> {
        if self.dim == 0 {
            return Err(CliError::Parse("dim must be positive".into()));
        }
        match (&self.kind, &self.data) {
            (StateKind::Pure, StateData::Vector(v)) if v.len() == self.dim => Ok(()),
            (StateKind::Pure, _) => Err(CliError::Parse(format!(
                "pure state data must be a list of {} [re, im] pairs",
                self.dim
            ))),
            (StateKind::Density, StateData::Matrix(rows)) => matrix_from_pairs(rows, self.dim, "density data").map(|_| ()),
            (StateKind::Density, _) => Err(CliError::Parse(format!(
                "density data must be a {0}x{0} array of [re, im] pairs",
                self.dim
            ))),
        }
    }

    pub fn to_state(&self) -> Result<State, CliError> {
        self.shape_checked()?;
        match &self.data {
            StateData::Vector(v) => Ok(State::Pure(PureState::new(v.iter().map(complex).collect())?)),
            StateData::Matrix(rows) => {
                let m = matrix_from_pairs(rows, self.dim, "density data")?;
                Ok(State::Density(DensityMatrix::new(m)?))
            }
        }
    }
}

impl ChannelFile {
    pub fn from_channel(channel: &IncoherentChannel) -> Self {
        Self { dim: channel.dim(), kraus: channel.kraus().iter().map(matrix_pairs).collect() }
    }

    /// Kraus matrices, checked only for shape.
    pub fn matrices(&self) -> Result<Vec<ComplexMatrix>, CliError> {
        if self.kraus.is_empty() {
            return Err(CliError::Parse("kraus list is empty".into()));
        }
        self.kraus
            .iter()
            .enumerate()
            .map(|(n, k)| matrix_from_pairs(k, self.dim, &format!("kraus[{n}]")))
            .collect()
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, path: &Path) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

pub fn read_state_file(path: &Path) -> Result<StateFile, CliError> {
    parse(&read(path)?, path)
}

pub fn load_state(path: &Path) -> Result<State, CliError> {
    read_state_file(path)?.to_state()
}

pub fn read_channel_file(path: &Path) -> Result<ChannelFile, CliError> {
    parse(&read(path)?, path)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("serializable");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    fs::write(path, to_json(value)).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
