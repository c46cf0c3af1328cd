//! Calculus of rearrangement operators on spectral functions.
//!
//! Spectral functions of `n + 1` arguments are manipulated symbolically as
//! linear combinations of divided-difference brackets ([`expr`]). The face,
//! degeneracy, cyclic and partial-derivative operators act on them ([`ops`]),
//! and every structural identity can be checked three ways: as an exact
//! equality of canonical forms, numerically against concrete base functions
//! ([`numeval`]), and at the operator level on hermitian matrices
//! ([`matrixcalc`]).

pub mod error;
pub mod expr;
pub mod matrixcalc;
pub mod numeval;
pub mod omega;
pub mod ops;
pub mod report;
pub mod sampling;
pub mod simplicial;
pub mod variational;

pub use error::{Error, Result};
pub use expr::{
    BaseFunction, BracketTerm, ComplexRational, Rational, SimplicialShadow, SpectralExpr, Symbol,
    TensorExpr, TensorFactor,
};
pub use matrixcalc::{Matrix, MatrixContext, SpectralData, SpectralFn};
pub use numeval::{Exact, Scalar};
pub use ops::{Generator, GeneratorKind, OperatorWord};
pub use report::{RelationInstance, RelationReport};
pub use simplicial::{CyclicMorphism, NormalForm, SimplicialMap};
