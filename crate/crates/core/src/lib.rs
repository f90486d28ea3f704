//! Perturbation propagation in one-dimensional cellular automata.
//!
//! The crate simulates radius-`r` rules on finite windows and computes the
//! one-sided propagation depths of perturbations (pointwise, maximal and
//! averaged exponents), blocking-word certificates, a surjectivity decision,
//! and entropy estimates, then combines them into inequality checks.
//!
//! Real-valued quantities are generic over [`Real`]; the aliases at the crate
//! root fix them to `f64`.

pub mod budget;
pub mod ca;
pub mod entropy;
mod error;
pub mod exponents;
pub mod lab;
mod parallel;
pub mod set_dynamics;

pub use budget::{Budgets, RunOptions};
pub use error::{Error, Result};

/// Floating-point scalar used by measures and estimators.
pub trait Real:
    num_traits::Float + num_traits::FromPrimitive + std::fmt::Debug + std::fmt::Display + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: num_traits::Float + num_traits::FromPrimitive + std::fmt::Debug + std::fmt::Display + Send + Sync + 'static
{
}

/// Exact rational used for the maximal exponent sequence.
pub type Rational = num_rational::Ratio<u64>;

pub type Measure = ca::MeasureSpec<f64>;
pub type Estimate = exponents::ExponentEstimate<f64>;
pub type Entropy = entropy::EntropyEstimate<f64>;
