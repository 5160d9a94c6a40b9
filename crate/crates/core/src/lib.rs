//! Solver, verifier and simulator for two-player bargaining with costly
//! commitment and a status quo set by precedent.

pub mod benchmark;
pub mod cli;
pub mod error;
pub mod game;
pub mod output;
pub mod simulator;
pub mod solver;
pub mod verifier;

pub use error::{Error, Result};
pub use game::{Action, Params, PowerUtility, Share, StatusQuo};
pub use solver::{build_profile, EquilibriumProfile, MixedAction, SolvedConstants, StateClass};
