//! Colourful bin packing games: selfish items of given size and colour
//! choose unit bins; an item touching another item of its own colour pays
//! infinite cost, every other item pays a share of its bin.
//!
//! The crate provides the game model and cost functions ([`model`]),
//! improving-move dynamics and potentials ([`dynamics`]), constructive
//! equilibrium algorithms ([`equilibria`]), exhaustive reference solvers
//! ([`oracle`]) and instance generators ([`instances`]).

pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod instances;
pub mod model;
pub mod oracle;
pub mod packing;
pub mod rational;

pub use error::{Error, Result};
pub use model::{Bin, Color, CostModel, CostValue, GameInstance, Item, ItemId, Parity, Profile, ProfileRepr, UniformMeta};
pub use rational::Rational;
