//! Numerical toolkit for the category of non-commutative probabilities: finite-dimensional
//! W*-algebras with normal states, state-preserving completely positive unital (CPU) maps,
//! pull back to Fisher-Rao, quantum Fisher (Bures-Helstrom) and Fubini-Study metrics.
//!
//! Every numerical type is generic over a real [`Scalar`] (`f32` or `f64`); the `*F64`
//! aliases below are the ones used by the command-line front end.

#![forbid(unsafe_code)]

pub mod algebra;
pub mod channels;
pub mod covariance;
pub mod error;
pub mod gns;
pub mod io;
mod linalg;
pub mod models;
pub mod scalar;
pub mod states;
pub mod tol;

pub use algebra::{AlgebraElement, AlgebraShape};
pub use channels::{CongruentEmbedding, CpReport, CpuMap, NcpMorphism};
pub use covariance::{
    CovarianceGram, CovarianceKind, MonotonicityReport, OperatorMonotoneFunction,
};
pub use error::{Error, Result};
pub use gns::{FunctorLawReport, GnsContraction, GnsSpace};
pub use models::{DerivativeMode, StatModel};
pub use scalar::Scalar;
pub use states::NormalState;

pub type AlgebraElementF64 = AlgebraElement<f64>;
pub type AlgebraElementF32 = AlgebraElement<f32>;
pub type NormalStateF64 = NormalState<f64>;
pub type NormalStateF32 = NormalState<f32>;
pub type GnsSpaceF64 = GnsSpace<f64>;
pub type GnsSpaceF32 = GnsSpace<f32>;
pub type CovarianceGramF64 = CovarianceGram<f64>;
pub type CpuMapF64 = CpuMap<f64>;
pub type CpuMapF32 = CpuMap<f32>;
pub type NcpMorphismF64 = NcpMorphism<f64>;
pub type NcpMorphismF32 = NcpMorphism<f32>;
