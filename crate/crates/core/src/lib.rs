//! Exact oracles and facet catalogues for cones of balanced, totally
//! balanced and exact cooperative games.

pub mod arith;
pub mod balance;
pub mod catalogue;
pub mod cones;
pub mod irreducible;
pub mod model;
pub mod sample;
pub mod verify;

pub use arith::{Rat, RatVector};
pub use balance::{InequalityVector, MinBalancedSystem};
pub use cones::{Certificate, Verdict};
pub use model::{Coalition, Game, Players, SetFunction, SetSystem};
