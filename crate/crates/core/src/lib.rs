//! Variational exciton and trion binding energies on the surface of a cylinder.
//!
//! The pipeline runs from a nearest-neighbour tight-binding description of
//! graphene ([`tb`]) through effective units ([`units`]) to a Gaussian-basis
//! variational solution of the few-body problem ([`basis`], [`assembly`],
//! [`solver`]), with a Hartree-Fock comparison ([`hf`]), exponent
//! optimisation ([`optimize`]) and sweeps/fits ([`analysis`]).
//!
//! Energies are in effective Rydbergs (Ry*) and lengths in effective Bohr
//! radii (a_B*) unless a name says otherwise.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod assembly;
pub mod basis;
pub mod error;
pub mod exec;
pub mod hf;
pub mod optimize;
pub mod solver;
pub mod numeric;
pub mod tb;
pub mod units;

pub use error::{Error, Result};
pub use exec::Execution;
