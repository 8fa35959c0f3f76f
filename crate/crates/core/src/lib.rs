//! Exhaustive generation of good drawings of complete graphs with a bounded
//! number of crossings.
//!
//! A drawing is stored as the rotation system of its planarization. New
//! vertices are added face by face ([`extension`]), isomorphic outputs are
//! removed with canonical codes ([`canonical`]), and the stage budgets come
//! from the counting identities in [`counting`].

pub mod canonical;
pub mod counting;
pub mod drawing;
pub mod equivalence;
pub mod error;
pub mod extension;
pub mod format;
pub mod k12check;
pub mod pipeline;
pub mod routing;

pub use drawing::{seed_k4, validate, Drawing, Edge};
