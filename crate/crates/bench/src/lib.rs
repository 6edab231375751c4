//! Shared fixtures for the solver benchmarks.

use colorbin_core::instances::{random_instance, SizeFamily};
use colorbin_core::{CostModel, GameInstance, Item};

/// Seeded random game on the `1/denom` grid.
pub fn grid_game(n: usize, m: u32, denom: u64, seed: u64) -> GameInstance {
    random_instance(n, m, SizeFamily::Grid { denom }, CostModel::Egalitarian, seed).expect("valid parameters")
}

/// Seeded random game where every item has size `1/kappa`.
pub fn uniform_game(n: usize, m: u32, kappa: u64, seed: u64) -> GameInstance {
    random_instance(n, m, SizeFamily::Uniform { kappa }, CostModel::Egalitarian, seed).expect("valid parameters")
}

/// The items of a grid game, as a single-bin candidate pool.
pub fn pool(n: usize, m: u32, denom: u64, seed: u64) -> Vec<Item> {
    grid_game(n, m, denom, seed).items().to_vec()
}
