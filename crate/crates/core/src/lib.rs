//! Price-menu vote-buying mechanisms against decoy-ballot elections.
//!
//! An adversary who knows how many real and decoy ballots each district
//! holds offers citizens two application slots and a menu of prices that
//! depend on the slot and on whether the district ends up selected. The
//! crate runs these mechanisms, computes expected payoffs exactly, and
//! enumerates pure Nash equilibria on small instances to check which
//! profiles survive.

pub mod cli;
pub mod equilibrium;
pub mod error;
pub mod mechanism;
pub mod model;
pub mod rational;
pub mod variants;

pub use error::{Error, Result};
pub use rational::Rational;
