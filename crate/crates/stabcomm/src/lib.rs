//! Stabilizer states, the commutant of Clifford tensor powers, and the
//! protocols built on it: stabilizer testing, moment and design checks, and
//! de Finetti bounds.
//!
//! Finite-field code is exact. The dense layer ([`dense`], [`phase_space`]) is
//! generic over the real scalar through [`scalar::Real`]; everything above it
//! works in `f64`.

pub mod dense;
pub mod error;
pub mod gf_linalg;
pub mod phase_space;
pub mod scalar;
pub mod stabilizer;
pub mod clifford;
pub mod commutant;
pub mod moments;
pub mod protocols;
pub mod definetti;

pub use error::{Error, Result};

pub type Complex64 = scalar::C<f64>;
pub type Operator = dense::DenseOperator<f64>;
pub type State = dense::PureState<f64>;
pub type Operator32 = dense::DenseOperator<f32>;
pub type State32 = dense::PureState<f32>;
