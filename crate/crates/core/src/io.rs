//! Serde representations of shapes, elements, states, channels and morphisms.
//!
//! Complex numbers are written as `{"re": x, "im": y}` and may be read as a bare number,
//! a pair `[re, im]` or an object with optional `im`. Matrices are lists of rows.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, AlgebraShape};
use crate::channels::{markov_from_stochastic, CpuMap, NcpMorphism};
use crate::error::{Error, Result};
use crate::scalar::C;
use crate::states::NormalState;
use crate::tol;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexRepr {
    Real(f64),
    Pair([f64; 2]),
    Object {
        re: f64,
        #[serde(default)]
        im: f64,
    },
}

impl ComplexRepr {
    pub fn value(self) -> C<f64> {
        match self {
            Self::Real(re) => C::new(re, 0.0),
            Self::Pair([re, im]) | Self::Object { re, im } => C::new(re, im),
        }
    }
}

impl From<C<f64>> for ComplexRepr {
    fn from(z: C<f64>) -> Self {
        Self::Object { re: z.re, im: z.im }
    }
}

pub type MatrixRepr = Vec<Vec<ComplexRepr>>;

pub fn matrix_to_repr(m: &DMatrix<C<f64>>) -> MatrixRepr {
    m.row_iter()
        .map(|r| r.iter().map(|&z| z.into()).collect())
        .collect()
}

pub fn matrix_from_repr(rows: &MatrixRepr) -> Result<DMatrix<C<f64>>> {
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, Vec::len);
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n_cols) {
        return Err(Error::Dimension(format!(
            "row {i} has {} entries, expected {n_cols}",
            r.len()
        )));
    }
    Ok(DMatrix::from_fn(n_rows, n_cols, |i, j| rows[i][j].value()))
}

fn square_blocks(blocks: &[MatrixRepr]) -> Result<(AlgebraShape, Vec<DMatrix<C<f64>>>)> {
    let mats = blocks
        .iter()
        .map(matrix_from_repr)
        .collect::<Result<Vec<_>>>()?;
    if let Some((k, m)) = mats.iter().enumerate().find(|(_, m)| !m.is_square()) {
        return Err(Error::Dimension(format!(
            "block {k} is {}x{}, not square",
            m.nrows(),
            m.ncols()
        )));
    }
    let shape = AlgebraShape::new(mats.iter().map(|m| m.nrows()).collect::<Vec<_>>())?;
    Ok((shape, mats))
}

/// A shape as `{"blocks": [..]}` or a bare list of block sizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ShapeRepr {
    Object(AlgebraShape),
    List(Vec<usize>),
}

impl ShapeRepr {
    pub fn shape(&self) -> Result<AlgebraShape> {
        match self {
            Self::Object(s) => Ok(s.clone()),
            Self::List(b) => AlgebraShape::new(b.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementRepr {
    pub blocks: Vec<MatrixRepr>,
}

impl ElementRepr {
    pub fn from_element(a: &AlgebraElement<f64>) -> Self {
        Self {
            blocks: a.blocks().iter().map(matrix_to_repr).collect(),
        }
    }

    pub fn element(&self) -> Result<AlgebraElement<f64>> {
        let (shape, mats) = square_blocks(&self.blocks)?;
        AlgebraElement::new(shape, mats)
    }
}

/// A state as a probability vector or as block densities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateRepr {
    Probabilities {
        prob: Vec<f64>,
    },
    Densities {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shape: Option<ShapeRepr>,
        densities: Vec<MatrixRepr>,
    },
}

impl StateRepr {
    pub fn from_state(s: &NormalState<f64>) -> Self {
        Self::Densities {
            shape: Some(ShapeRepr::Object(s.shape().clone())),
            densities: s.densities().iter().map(matrix_to_repr).collect(),
        }
    }

    pub fn state(&self) -> Result<NormalState<f64>> {
        match self {
            Self::Probabilities { prob } => NormalState::from_probabilities(prob),
            Self::Densities { shape, densities } => {
                let (inferred, mats) = square_blocks(densities)?;
                if let Some(s) = shape {
                    s.shape()?.ensure_eq(&inferred)?;
                }
                NormalState::new(inferred, mats)
            }
        }
    }
}

/// A linear map `phi: source -> target` in one of several encodings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelRepr {
    Kraus {
        source: ShapeRepr,
        target: ShapeRepr,
        kraus: Vec<MatrixRepr>,
    },
    Linear {
        source: ShapeRepr,
        target: ShapeRepr,
        linear: MatrixRepr,
    },
    /// Column-stochastic matrix acting on probability vectors.
    Stochastic {
        stochastic: Vec<Vec<f64>>,
    },
    Depolarizing {
        depolarizing: DepolarizingRepr,
    },
    Transpose {
        transpose: usize,
    },
    Identity {
        identity: ShapeRepr,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepolarizingRepr {
    pub n: usize,
    pub lambda: f64,
}

impl ChannelRepr {
    pub fn channel(&self) -> Result<CpuMap<f64>> {
        match self {
            Self::Kraus {
                source,
                target,
                kraus,
            } => {
                let ks = kraus
                    .iter()
                    .map(matrix_from_repr)
                    .collect::<Result<Vec<_>>>()?;
                CpuMap::from_kraus(source.shape()?, target.shape()?, ks)
            }
            Self::Linear {
                source,
                target,
                linear,
            } => CpuMap::from_linear(source.shape()?, target.shape()?, matrix_from_repr(linear)?),
            Self::Stochastic { stochastic } => {
                let rows = stochastic.len();
                let cols = stochastic.first().map_or(0, Vec::len);
                if stochastic.iter().any(|r| r.len() != cols) {
                    return Err(Error::Dimension("ragged stochastic matrix".into()));
                }
                markov_from_stochastic(&DMatrix::from_fn(rows, cols, |i, j| stochastic[i][j]))
            }
            Self::Depolarizing { depolarizing } => {
                CpuMap::depolarizing(depolarizing.n, depolarizing.lambda)
            }
            Self::Transpose { transpose } => CpuMap::transpose_map(*transpose),
            Self::Identity { identity } => Ok(CpuMap::identity(&identity.shape()?)),
        }
    }

    pub fn from_channel(phi: &CpuMap<f64>) -> Self {
        let source = ShapeRepr::Object(phi.source().clone());
        let target = ShapeRepr::Object(phi.target().clone());
        match phi.kraus() {
            Some(ks) => Self::Kraus {
                source,
                target,
                kraus: ks.iter().map(matrix_to_repr).collect(),
            },
            None => Self::Linear {
                source,
                target,
                linear: matrix_to_repr(phi.linear()),
            },
        }
    }
}

/// A morphism `(A, rho) -> (B, sigma)`: `source` is `rho`, `channel` is `phi: B -> A`, and a
/// missing `target` is taken to be the predual `rho o phi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismRepr {
    pub source: StateRepr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<StateRepr>,
    pub channel: ChannelRepr,
}

impl MorphismRepr {
    pub fn morphism(&self) -> Result<NcpMorphism<f64>> {
        let rho = self.source.state()?;
        let phi = self.channel.channel()?;
        match &self.target {
            Some(t) => NcpMorphism::new(rho, t.state()?, phi, tol::STATE_PRESERVATION),
            None => NcpMorphism::from_predual(rho, phi),
        }
    }

    pub fn from_morphism(m: &NcpMorphism<f64>) -> Self {
        Self {
            source: StateRepr::from_state(m.source()),
            target: Some(StateRepr::from_state(m.target())),
            channel: ChannelRepr::from_channel(m.cpu()),
        }
    }
}
