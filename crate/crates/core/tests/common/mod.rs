#![allow(dead_code)]

use colorbin_core::{Color, CostModel, GameInstance, Item, ItemId, Profile, Rational};
use rand::seq::SliceRandom;
use rand::Rng;

/// Random profile that respects capacity but may put equal colours side by side.
pub fn random_capacity_profile(game: &GameInstance, rng: &mut impl Rng) -> Profile {
    let mut order: Vec<ItemId> = (1..=game.n()).collect();
    order.shuffle(rng);
    let mut bins: Vec<(Vec<ItemId>, Rational)> = Vec::new();
    for id in order {
        let size = &game.items()[id - 1].size;
        let fits: Vec<usize> = (0..bins.len())
            .filter(|&j| &bins[j].1 + size <= Rational::one())
            .collect();
        match fits.get(rng.gen_range(0..=fits.len())) {
            Some(&j) => {
                bins[j].0.push(id);
                bins[j].1 = &bins[j].1 + size;
            }
            None => bins.push((vec![id], size.clone())),
        }
    }
    Profile::new(game, bins.into_iter().map(|b| b.0).collect()).expect("capacity respected")
}

/// Random pool of up to `max_len` items on the grid `1/denom`, zero sizes allowed.
pub fn random_pool(rng: &mut impl Rng, max_len: usize) -> (Vec<Item>, u64) {
    let len = rng.gen_range(1..=max_len);
    let m = rng.gen_range(2..=4u32);
    let denom = rng.gen_range(2..=12u64);
    let items = (0..len)
        .map(|i| Item {
            id: i + 1,
            size: Rational::new(rng.gen_range(0..=denom) as i64, denom as i64),
            color: Color(rng.gen_range(1..=m)),
        })
        .collect();
    (items, denom)
}

pub fn uniform_game(m: u32, kappa: u64, counts: &[usize]) -> GameInstance {
    let size = Rational::new(1, kappa as i64);
    let items = counts
        .iter()
        .enumerate()
        .flat_map(|(c, &k)| std::iter::repeat_n((size.clone(), c as u32 + 1), k));
    GameInstance::from_sizes(m, CostModel::Egalitarian, items).expect("valid uniform game")
}

/// Every vector of `m` non-negative counts summing to `n`.
pub fn compositions(n: usize, m: usize) -> Vec<Vec<usize>> {
    if m == 1 {
        return vec![vec![n]];
    }
    (0..=n)
        .flat_map(|first| {
            compositions(n - first, m - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}
