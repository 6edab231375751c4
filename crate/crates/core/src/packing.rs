//! Exhaustive enumeration of ordered packings, one per class of profiles
//! that agree up to bin renumbering.
//!
//! Bins are generated in order of their lowest item id: the first bin holds
//! item 1, the next bin holds the smallest item not yet packed, and so on.
//! Each bin's item set is then expanded into every bottom-to-top order
//! (or every feasible one).

use std::ops::ControlFlow;

use rayon::prelude::*;

use crate::model::{Bin, GameInstance, ItemId, Profile};

/// Largest game the mask-based enumeration accepts.
pub const MAX_ITEMS: usize = 16;

struct Orders<'a> {
    game: &'a GameInstance,
    feasible_only: bool,
    memo: Vec<Option<Vec<Vec<ItemId>>>>,
}

impl<'a> Orders<'a> {
    fn new(game: &'a GameInstance, feasible_only: bool) -> Self {
        assert!(game.n() <= MAX_ITEMS, "packing enumeration supports at most {MAX_ITEMS} items");
        Orders {
            game,
            feasible_only,
            memo: vec![None; 1 << game.n()],
        }
    }

    /// All admissible bottom-to-top orders of the items in `mask`.
    fn of(&mut self, mask: u32) -> &[Vec<ItemId>] {
        if self.memo[mask as usize].is_none() {
            let ids: Vec<ItemId> = (0..self.game.n())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| i + 1)
                .collect();
            let mut out = Vec::new();
            let mut used = vec![false; ids.len()];
            let mut cur = Vec::with_capacity(ids.len());
            permute(self.game, self.feasible_only, &ids, &mut used, &mut cur, &mut out);
            self.memo[mask as usize] = Some(out);
        }
        self.memo[mask as usize].as_deref().expect("filled above")
    }
}

fn permute(
    game: &GameInstance,
    feasible_only: bool,
    ids: &[ItemId],
    used: &mut [bool],
    cur: &mut Vec<ItemId>,
    out: &mut Vec<Vec<ItemId>>,
) {
    if cur.len() == ids.len() {
        out.push(cur.clone());
        return;
    }
    for k in 0..ids.len() {
        if used[k] {
            continue;
        }
        if feasible_only {
            if let Some(&last) = cur.last() {
                if game.color(last) == game.color(ids[k]) {
                    continue;
                }
            }
        }
        used[k] = true;
        cur.push(ids[k]);
        permute(game, feasible_only, ids, used, cur, out);
        cur.pop();
        used[k] = false;
    }
}

fn mask_load(game: &GameInstance, mask: u32) -> u64 {
    (0..game.n())
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| game.scaled_size(i + 1))
        .sum()
}

struct Walker<'a, F> {
    orders: Orders<'a>,
    bins: Vec<Vec<ItemId>>,
    visit: F,
}

impl<F: FnMut(&Profile) -> ControlFlow<()>> Walker<'_, F> {
    fn recurse(&mut self, remaining: u32) -> ControlFlow<()> {
        let game = self.orders.game;
        if remaining == 0 {
            let mut bins: Vec<Bin> = self.bins.iter().cloned().map(Bin::new).collect();
            bins.resize(game.n(), Bin::default());
            return (self.visit)(&Profile::from_bins_unchecked(bins));
        }
        let low = remaining & remaining.wrapping_neg();
        let rest = remaining ^ low;
        // every subset of `rest`, joined with the lowest remaining item
        let mut sub = rest;
        loop {
            let block = sub | low;
            if mask_load(game, block) <= game.common_denominator() {
                let count = self.orders.of(block).len();
                for k in 0..count {
                    let order = self.orders.of(block)[k].clone();
                    self.bins.push(order);
                    let flow = self.recurse(remaining ^ block);
                    self.bins.pop();
                    flow?;
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        ControlFlow::Continue(())
    }
}

fn full_mask(game: &GameInstance) -> u32 {
    if game.n() == 0 {
        0
    } else {
        u32::MAX >> (32 - game.n())
    }
}

/// Visits every capacity-respecting packing of the game once per
/// bin-renumbering class; with `feasible_only`, only feasible ones.
pub fn for_each_packing(
    game: &GameInstance,
    feasible_only: bool,
    visit: impl FnMut(&Profile) -> ControlFlow<()>,
) {
    let mut walker = Walker {
        orders: Orders::new(game, feasible_only),
        bins: Vec::new(),
        visit,
    };
    let _ = walker.recurse(full_mask(game));
}

/// Candidate first bins (ordered, containing item 1).
fn first_bins(game: &GameInstance, feasible_only: bool) -> Vec<Vec<ItemId>> {
    let mut orders = Orders::new(game, feasible_only);
    let all = full_mask(game);
    let rest = all & !1;
    let mut out = Vec::new();
    let mut sub = rest;
    loop {
        let block = sub | 1;
        if mask_load(game, block) <= game.common_denominator() {
            out.extend(orders.of(block).iter().cloned());
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & rest;
    }
    out
}

/// Parallel filter over all packings, split by the bin holding item 1.
/// Output order is deterministic.
pub fn collect_packings<P>(game: &GameInstance, feasible_only: bool, keep: P) -> Vec<Profile>
where
    P: Fn(&Profile) -> bool + Sync,
{
    if game.n() == 0 {
        return vec![Profile::from_bins_unchecked(Vec::new())];
    }
    let all = full_mask(game);
    first_bins(game, feasible_only)
        .into_par_iter()
        .map(|first| {
            let first_mask = first.iter().fold(0u32, |m, id| m | 1 << (id - 1));
            let mut found = Vec::new();
            let mut walker = Walker {
                orders: Orders::new(game, feasible_only),
                bins: vec![first],
                visit: |p: &Profile| {
                    if keep(p) {
                        found.push(p.clone());
                    }
                    ControlFlow::Continue(())
                },
            };
            let _ = walker.recurse(all ^ first_mask);
            found
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CostModel;
    use crate::rational::Rational;

    fn game(colors: &[u32], size: Rational) -> GameInstance {
        GameInstance::from_sizes(3, CostModel::Egalitarian, colors.iter().map(|&c| (size.clone(), c))).unwrap()
    }

    fn count(g: &GameInstance, feasible_only: bool) -> usize {
        let mut n = 0;
        for_each_packing(g, feasible_only, |_| {
            n += 1;
            ControlFlow::Continue(())
        });
        n
    }

    #[test]
    fn counts_match_ordered_set_partitions() {
        // number of ways to split n labelled items into unordered nonempty
        // sequences: 1, 3, 13, 73, 501
        let small = Rational::new(1, 10);
        for (n, expected) in [(1, 1), (2, 3), (3, 13), (4, 73), (5, 501)] {
            let colors: Vec<u32> = (0..n).map(|i| (i % 3) as u32 + 1).collect();
            assert_eq!(count(&game(&colors, small.clone()), false), expected);
        }
    }

    #[test]
    fn capacity_and_feasibility_prune() {
        // two b's, size 1/2: {(1),(2)}, {(1,2)}, {(2,1)}; only singletons feasible
        let g = game(&[1, 1], Rational::new(1, 2));
        assert_eq!(count(&g, false), 3);
        assert_eq!(count(&g, true), 1);
        let g = game(&[1, 2], Rational::new(2, 3));
        assert_eq!(count(&g, false), 1);
    }

    #[test]
    fn parallel_collection_agrees_with_sequential_walk() {
        let g = game(&[1, 2, 1, 2, 3], Rational::new(1, 4));
        let mut seq = Vec::new();
        for_each_packing(&g, true, |p| {
            seq.push(p.canonical());
            ControlFlow::Continue(())
        });
        let mut par: Vec<Profile> = collect_packings(&g, true, |_| true).iter().map(|p| p.canonical()).collect();
        let key = |p: &Profile| format!("{p}");
        seq.sort_by_key(key);
        par.sort_by_key(key);
        assert_eq!(seq, par);
        assert!(seq.iter().all(|p| p.is_feasible(&g)));
    }
}
