//! Finite element solvers for the damped-pumped reaction-diffusion equation
//!
//! ```text
//! ∂ₜu − νΔu + α|u|^{p−2}u − Σ_ℓ β_ℓ|u|^{q_ℓ−2}u = f   in Ω = (0,1)^d,   u = 0 on ∂Ω,
//! ```
//!
//! discretized in space by conforming P1, Crouzeix–Raviart or symmetric
//! interior-penalty DG elements and in time by backward Euler with a Newton
//! solve per step. The [`harness`] module drives manufactured-solution and
//! fine-mesh-reference convergence studies.

pub mod analysis;
pub mod assembly;
pub mod error;
pub mod harness;
pub mod mesh;
pub mod nonlinear;
pub mod problem;
pub mod projections;
pub mod quadrature;
pub mod solver;
pub mod spaces;

pub use error::{Error, Result};
pub use mesh::Mesh;
pub use nonlinear::{Pumping, ReactionSpec};
pub use problem::{DtPolicy, ErrorMode, ProblemSpec};
pub use spaces::{DiscreteField, FeSpace, Scheme, SpaceKind};
