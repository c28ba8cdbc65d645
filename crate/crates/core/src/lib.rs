//! Topological spectrum of classical systems from their Jacobi metric.
//!
//! The pipeline: parse a potential ([`expr`]), build the conformally flat
//! Jacobi metric and its Euler density ([`geometry`]), integrate the density
//! ([`integrate`]), and tie the reduced oscillator integral to the canonical
//! spectrum `E = hbar omega (n + 1/2)` ([`spectrum`]). [`verify`] bundles the
//! oracle checks.

pub mod expr;
pub mod geometry;
pub mod integrate;
pub mod spectrum;
pub mod verify;

pub use expr::{parse, Bindings, Expr};
pub use geometry::{ConformalSurface, DensityConvention, MechanicalSystem};
pub use integrate::{GridSpec, QuadratureResult};
pub use spectrum::{OscillatorParams, SpectrumRecord};
