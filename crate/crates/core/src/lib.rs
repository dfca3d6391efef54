//! Metastability of Glauber dynamics for the Ising model on the hypercube `Q_n`.
//!
//! The crate is organised bottom-up:
//!
//! * [`hypercube`]: vertices, configurations, sub-cubes and automorphisms
//! * [`isoperimetry`]: digit sums, the minimizers `Υ_k`, good sets and oracles
//! * [`energy`]: the Hamiltonian with exact integer energy gaps
//! * [`landscape`]: communication heights, `Γ*`, stability levels
//! * [`critical`]: critical configurations and the prefactor `K`
//! * [`dynamics`]: rates, kinetic Monte Carlo and exact hitting-time solvers
//!
//! Everything that only needs ordered field arithmetic is generic over
//! [`scalar::Field`]; the dynamics are generic over [`scalar::Real`]. The
//! aliases below fix the usual choices.

pub mod critical;
pub mod double_double;
pub mod dynamics;
pub mod energy;
pub mod error;
pub mod hypercube;
pub mod isoperimetry;
pub mod landscape;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{DoubleDouble, Field, Rational, Real};

pub type Params = energy::ModelParams<f64>;
pub type ExactParams = energy::ModelParams<Rational>;
pub type Profile = landscape::BarrierProfile<f64>;
pub type ExactProfile = landscape::BarrierProfile<Rational>;
pub type Filtration = landscape::FiltrationIndex<f64>;
pub type ExactFiltration = landscape::FiltrationIndex<Rational>;
pub type Report = critical::CriticalReport<f64>;
pub type ExactReport = critical::CriticalReport<Rational>;
pub type ExtendedHittingSolution = dynamics::HittingSolution<DoubleDouble>;
pub type Rates = dynamics::RateModel<f64>;
