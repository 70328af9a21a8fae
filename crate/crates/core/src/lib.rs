//! Shapley-value attributions for the gates of parameterized quantum circuits.
//!
//! The crate treats selected gates of a circuit as players in a cooperative
//! game. A value function scores the subcircuit built from any coalition of
//! players together with the always-present remaining gates, and the
//! estimators in [`shapley`] turn those scores into per-gate attributions.

pub mod circuit;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod models;
pub mod numeric;
pub mod rng;
pub mod shapley;
pub mod simulator;
pub mod transpiler;
pub mod value_functions;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/games.md")]
    mod games {}
    #[doc = include_str!("../../../book/src/estimators.md")]
    mod estimators {}
    #[doc = include_str!("../../../book/src/value-functions.md")]
    mod value_functions {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
