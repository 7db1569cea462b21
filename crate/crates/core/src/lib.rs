//! Exact jet-level construction of torsion-free affine connections whose
//! curvature at a point is a prescribed algebraic curvature operator.
//!
//! Everything is computed over exact rationals on truncated multivariate
//! polynomials ([`Jet`]). Indices are 0-based in this API and 1-based in
//! serialized documents and user-facing messages.

pub mod algebra;
pub mod document;
pub mod error;
pub mod frame;
pub mod jet;
pub mod rational;
pub mod realizer;
pub mod tensor;
pub mod verifier;

pub use algebra::{
    AlgebraicCurvatureOperator, BilinearForm, ClassConstraint, Classification, CurvatureField, InnerProduct, Signature,
};
pub use error::{Error, Result};
pub use frame::{CoordinateMap, FrameField, MetricField, NormalFormVerdict};
pub use jet::{Jet, JetRecord, Monomial};
pub use rational::Rational;
pub use realizer::{ChristoffelField, Realization, RealizationReport, RealizeOptions, ThetaField};
pub use tensor::{Tensor2, Tensor3, Tensor4};
pub use verifier::{Verdict, VerificationSuite, Witness};
