//! Exact tools for regular decompositions of polynomial maps over small
//! prime fields.

pub mod certificate;
pub mod corpus;
pub mod error;
pub mod ffpoly;
pub mod field;
pub mod formula;
pub mod imagery;
pub mod linalg;
pub mod problem;
pub mod rankor;
pub mod rational;
pub mod regularize;
pub mod spaces;
pub mod spectral;

pub use error::{Error, Result};
pub use ffpoly::{FieldSpec, Monomial, Poly};
pub use rational::Rational;
