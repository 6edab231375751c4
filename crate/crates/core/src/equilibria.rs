//! Constructive equilibrium computation.
//!
//! [`best_bin_equilibrium`] repeatedly opens the best single bin that can be
//! packed from the items still unassigned: the largest one by cardinality
//! under egalitarian costs ([`max_cardinality_colorful_packing`]) and the
//! heaviest one under proportional costs ([`colorful_subset_sum`]).
//! [`alternating_fill_equilibrium`] handles uniform sizes by filling bins one
//! at a time, always with the most frequent colour that differs from the
//! item just placed.
//!
//! A multiset of coloured items can be arranged in a bin without two equal
//! colours touching iff its most frequent colour occurs at most
//! `ceil(size / 2)` times; [`order_bin`] produces such an arrangement.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Bin, Color, CostModel, GameInstance, Item, ItemId, Profile};
use crate::rational::Rational;

/// Per-colour multiplicities of a candidate bin.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ColorCounts {
    pub counts: BTreeMap<Color, usize>,
    pub total: usize,
    /// Most frequent colour, lowest index on ties; `None` when empty.
    pub dominant: Option<Color>,
    pub dominant_count: usize,
}

impl ColorCounts {
    pub fn from_colors(colors: impl IntoIterator<Item = Color>) -> Self {
        let mut counts = BTreeMap::new();
        let mut total = 0;
        for c in colors {
            *counts.entry(c).or_insert(0) += 1;
            total += 1;
        }
        let mut dominant = None;
        let mut dominant_count = 0;
        for (&c, &k) in &counts {
            if k > dominant_count {
                dominant = Some(c);
                dominant_count = k;
            }
        }
        ColorCounts {
            counts,
            total,
            dominant,
            dominant_count,
        }
    }

    pub fn of(items: &[Item]) -> Self {
        ColorCounts::from_colors(items.iter().map(|it| it.color))
    }

    /// The items can be stacked with no equal colours adjacent.
    pub fn is_orderable(&self) -> bool {
        self.dominant_count <= self.total.div_ceil(2)
    }
}

fn total_size(items: &[Item]) -> Rational {
    items.iter().map(|it| &it.size).sum()
}

/// Arranges `items` bottom to top so that no two equal colours touch, or
/// returns `None` when the dominant colour is too frequent. Greedy: always
/// place a most frequent remaining colour different from the previous one
/// (lowest colour index on ties, lowest id within a colour).
pub fn order_bin(items: &[Item]) -> Result<Option<Bin>> {
    let load = total_size(items);
    if load > Rational::one() {
        return Err(Error::CapacityExceeded {
            bin: 0,
            load: load.to_string(),
        });
    }
    if !ColorCounts::of(items).is_orderable() {
        return Ok(None);
    }
    let mut queues: BTreeMap<Color, Vec<ItemId>> = BTreeMap::new();
    for it in items {
        queues.entry(it.color).or_default().push(it.id);
    }
    for q in queues.values_mut() {
        // popped from the back, so lowest id comes last
        q.sort_unstable_by(|a, b| b.cmp(a));
    }
    let mut seq = Vec::with_capacity(items.len());
    let mut prev: Option<Color> = None;
    for _ in 0..items.len() {
        let pick = queues
            .iter()
            .filter(|(&c, q)| Some(c) != prev && !q.is_empty())
            .fold(None, |best: Option<(Color, usize)>, (&c, q)| match best {
                Some((_, k)) if k >= q.len() => best,
                _ => Some((c, q.len())),
            });
        let Some((c, _)) = pick else {
            return Ok(None);
        };
        seq.push(queues.get_mut(&c).and_then(|q| q.pop()).expect("non-empty queue"));
        prev = Some(c);
    }
    Ok(Some(Bin::new(seq)))
}

fn sorted_by_size(items: &[Item]) -> Vec<Item> {
    let mut v = items.to_vec();
    v.sort_by(|a, b| a.size.cmp(&b.size).then(a.color.cmp(&b.color)).then(a.id.cmp(&b.id)));
    v
}

fn by_color(pool: &[Item]) -> BTreeMap<Color, Vec<Item>> {
    let mut groups: BTreeMap<Color, Vec<Item>> = BTreeMap::new();
    for it in sorted_by_size(pool) {
        groups.entry(it.color).or_default().push(it);
    }
    groups
}

/// Which subproblem a bin came from, with its parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Choice {
    /// Most frequent colour and its multiplicity that produced the bin.
    MaxCardinality { dominant: Color, dominant_count: usize },
    /// Per-colour multiplicity cap under which the bin was found.
    SubsetSum { color_cap: usize },
    /// Fill order of the uniform-size greedy.
    AlternatingFill,
}

/// A maximum-cardinality subset of `pool` that fits one feasible bin.
///
/// For each guess of the dominant colour `c` and its count `k`: take the `k`
/// smallest items of `c`, cap every other colour at its `k` smallest items,
/// and add those in increasing size order while capacity allows. A guess is
/// kept only if the result is still orderable.
pub fn max_cardinality_colorful_packing(pool: &[Item]) -> Vec<Item> {
    max_cardinality_with_choice(pool).0
}

fn max_cardinality_with_choice(pool: &[Item]) -> (Vec<Item>, Option<Choice>) {
    let groups = by_color(pool);
    let one = Rational::one();
    let mut best: Option<(Vec<Item>, Choice)> = None;
    for (&dominant, own) in &groups {
        let mut base_load = Rational::zero();
        for k in 1..=own.len() {
            base_load = base_load + &own[k - 1].size;
            if base_load > one {
                break;
            }
            let others: Vec<Item> = groups
                .iter()
                .filter(|(&c, _)| c != dominant)
                .flat_map(|(_, g)| g.iter().take(k).cloned())
                .collect();
            let mut load = base_load.clone();
            let mut chosen: Vec<Item> = own[..k].to_vec();
            for it in sorted_by_size(&others) {
                let next = &load + &it.size;
                if next > one {
                    break;
                }
                load = next;
                chosen.push(it);
            }
            if k > chosen.len().div_ceil(2) {
                continue;
            }
            if best.as_ref().is_none_or(|(b, _)| chosen.len() > b.len()) {
                best = Some((
                    chosen,
                    Choice::MaxCardinality {
                        dominant,
                        dominant_count: k,
                    },
                ));
            }
        }
    }
    match best {
        Some((mut items, choice)) => {
            items.sort_by_key(|it| it.id);
            (items, Some(choice))
        }
        None => (Vec::new(), None),
    }
}

/// Fixed-width bitset over scaled sizes `0..=capacity`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct SizeSet {
    words: Vec<u64>,
}

impl SizeSet {
    fn empty(capacity: u64) -> Self {
        SizeSet {
            words: vec![0; (capacity as usize + 1).div_ceil(64)],
        }
    }

    fn with_zero(capacity: u64) -> Self {
        let mut s = SizeSet::empty(capacity);
        s.words[0] = 1;
        s
    }

    fn contains(&self, v: u64) -> bool {
        let v = v as usize;
        self.words.get(v / 64).is_some_and(|w| w >> (v % 64) & 1 == 1)
    }

    fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            (0..64).filter(move |b| w >> b & 1 == 1).map(move |b| (i * 64 + b) as u64)
        })
    }

    fn max(&self) -> Option<u64> {
        self.words
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &w)| w != 0)
            .map(|(i, &w)| (i * 64 + 63 - w.leading_zeros() as usize) as u64)
    }

    /// `self |= other << shift`, bits beyond capacity dropped.
    fn or_shifted(&mut self, other: &SizeSet, shift: u64, capacity: u64) {
        let words = shift as usize / 64;
        let bits = shift as u32 % 64;
        let len = self.words.len();
        for i in (words..len).rev() {
            let src = i - words;
            let mut v = other.words[src] << bits;
            if bits > 0 && src > 0 {
                v |= other.words[src - 1] >> (64 - bits);
            }
            self.words[i] |= v;
        }
        let extra = (len * 64) as u64 - (capacity + 1);
        if extra > 0 {
            let last = len - 1;
            self.words[last] &= u64::MAX >> extra;
        }
    }
}

/// Achievability tables for the subset-sum solver.
///
/// `per_color[c][i][j]` is the set of scaled sizes reachable by choosing
/// exactly `j` of the first `i` items of colour `c` (items by increasing
/// size). `combined` holds, for one multiplicity cap, the sets reachable by
/// the first colours together, indexed by total count.
#[derive(Clone, Debug)]
pub struct CssTable {
    capacity: u64,
    colors: Vec<(Color, Vec<(Item, u64)>)>,
    per_color: Vec<Vec<Vec<SizeSet>>>,
}

impl CssTable {
    fn build(pool: &[Item], unit: u64) -> Result<Self> {
        let mut colors = Vec::new();
        for (c, group) in by_color(pool) {
            let mut scaled = Vec::with_capacity(group.len());
            for it in group {
                let s = it.size.scaled(unit).ok_or_else(|| Error::OffGrid {
                    size: it.size.to_string(),
                    unit,
                })?;
                scaled.push((it, s));
            }
            colors.push((c, scaled));
        }
        let capacity = unit;
        let per_color = colors
            .iter()
            .map(|(_, items)| {
                let mut layers = Vec::with_capacity(items.len() + 1);
                let mut cur: Vec<SizeSet> = vec![SizeSet::with_zero(capacity)];
                layers.push(cur.clone());
                for (i, &(_, w)) in items.iter().enumerate() {
                    cur.push(SizeSet::empty(capacity));
                    for j in (1..=i + 1).rev() {
                        let prev = cur[j - 1].clone();
                        cur[j].or_shifted(&prev, w, capacity);
                    }
                    layers.push(cur.clone());
                }
                layers
            })
            .collect();
        Ok(CssTable {
            capacity,
            colors,
            per_color,
        })
    }

    fn final_layer(&self, c: usize) -> &[SizeSet] {
        self.per_color[c].last().expect("at least the empty layer")
    }

    /// Combined reachability across colours with every colour used at most
    /// `cap` times. Returns the table before each colour and the final one.
    fn combine(&self, cap: usize) -> Vec<Vec<SizeSet>> {
        let total: usize = self.colors.iter().map(|(_, v)| v.len()).sum();
        let mut table = vec![SizeSet::empty(self.capacity); total + 1];
        table[0] = SizeSet::with_zero(self.capacity);
        let mut history = vec![table.clone()];
        for c in 0..self.colors.len() {
            let layer = self.final_layer(c);
            let mut next = vec![SizeSet::empty(self.capacity); total + 1];
            for (t, reach) in table.iter().enumerate() {
                if reach.is_empty() {
                    continue;
                }
                for (j, own) in layer.iter().enumerate().take(cap + 1) {
                    if t + j > total {
                        break;
                    }
                    for s in own.iter() {
                        next[t + j].or_shifted(reach, s, self.capacity);
                    }
                }
            }
            table = next;
            history.push(table.clone());
        }
        history
    }

    /// Items of colour `c` realising exactly `count` items of scaled size `size`.
    fn pick_from_color(&self, c: usize, mut count: usize, mut size: u64) -> Vec<Item> {
        let layers = &self.per_color[c];
        let items = &self.colors[c].1;
        let mut out = Vec::with_capacity(count);
        for i in (1..layers.len()).rev() {
            if count == 0 {
                break;
            }
            let skip = layers[i - 1].get(count).is_some_and(|s| s.contains(size));
            if !skip {
                let (ref it, w) = items[i - 1];
                out.push(it.clone());
                count -= 1;
                size -= w;
            }
        }
        debug_assert_eq!((count, size), (0, 0));
        out
    }

    fn reconstruct(&self, history: &[Vec<SizeSet>], cap: usize, mut count: usize, mut size: u64) -> Vec<Item> {
        let mut out = Vec::new();
        for c in (0..self.colors.len()).rev() {
            let before = &history[c];
            let layer = self.final_layer(c);
            let (j, s) = layer
                .iter()
                .enumerate()
                .take(cap + 1)
                .filter(|(j, _)| *j <= count)
                .find_map(|(j, own)| {
                    own.iter()
                        .take_while(|&s| s <= size)
                        .find(|&s| before[count - j].contains(size - s))
                        .map(|s| (j, s))
                })
                .expect("combined table entry has a predecessor");
            out.extend(self.pick_from_color(c, j, s));
            count -= j;
            size -= s;
        }
        out
    }
}

/// A maximum-total-size subset of `pool` that fits one feasible bin; among
/// those, one with the most items. Every size must be a multiple of `1/unit`.
///
/// For each cap `K` on per-colour multiplicity, per-colour count/size tables
/// are convolved across colours; a total count `t` is admissible for `K`
/// when `K <= ceil(t/2)`.
pub fn colorful_subset_sum(pool: &[Item], unit: u64) -> Result<Vec<Item>> {
    Ok(colorful_subset_sum_with_choice(pool, unit)?.0)
}

fn colorful_subset_sum_with_choice(pool: &[Item], unit: u64) -> Result<(Vec<Item>, Option<Choice>)> {
    if pool.is_empty() {
        return Ok((Vec::new(), None));
    }
    let table = CssTable::build(pool, unit)?;
    let max_count = table.colors.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
    let mut best: Option<(u64, usize, usize)> = None; // (size, count, cap)
    for cap in 1..=max_count {
        let history = table.combine(cap);
        let last = history.last().expect("non-empty history");
        for (t, reach) in last.iter().enumerate() {
            if t == 0 || cap > t.div_ceil(2) {
                continue;
            }
            if let Some(s) = reach.max() {
                let better = match best {
                    None => true,
                    Some((bs, bt, _)) => (s, t) > (bs, bt),
                };
                if better {
                    best = Some((s, t, cap));
                }
            }
        }
    }
    let (size, count, cap) = best.expect("a single item always fits");
    let history = table.combine(cap);
    let mut items = table.reconstruct(&history, cap, count, size);
    items.sort_by_key(|it| it.id);
    Ok((items, Some(Choice::SubsetSum { color_cap: cap })))
}

/// One bin opened by a constructive algorithm.
#[derive(Clone, Debug, Serialize)]
pub struct OpenedBin {
    pub items: Vec<ItemId>,
    pub load: Rational,
    pub choice: Choice,
}

/// Profile plus the record of how each bin was chosen.
#[derive(Clone, Debug, Serialize)]
pub struct Construction {
    pub profile: Profile,
    pub opened: Vec<OpenedBin>,
}

/// Opens bins one at a time, each the best single bin packable from the
/// remaining items, until every item is placed. The result is always a
/// Nash equilibrium.
pub fn best_bin_equilibrium(game: &GameInstance) -> Result<Construction> {
    let mut pool: Vec<Item> = game.items().to_vec();
    let mut bins = Vec::new();
    let mut opened = Vec::new();
    while !pool.is_empty() {
        let (chosen, choice) = match game.cost_model() {
            CostModel::Egalitarian => max_cardinality_with_choice(&pool),
            CostModel::Proportional => colorful_subset_sum_with_choice(&pool, game.common_denominator())?,
        };
        let choice = choice.expect("non-empty pool yields a bin");
        let bin = order_bin(&chosen)?.expect("solvers only return orderable sets");
        opened.push(OpenedBin {
            items: bin.contents().to_vec(),
            load: total_size(&chosen),
            choice,
        });
        bins.push(bin.contents().to_vec());
        pool.retain(|it| !chosen.iter().any(|c| c.id == it.id));
    }
    let profile = Profile::new(game, bins)?;
    Ok(Construction { profile, opened })
}

/// Uniform sizes only. Fills bin after bin: while the current bin has room
/// for another item and some remaining item differs in colour from the one
/// just placed, place an item of the most frequent such colour; otherwise
/// start a new bin.
pub fn alternating_fill_equilibrium(game: &GameInstance) -> Result<Construction> {
    let kappa = game.uniform_meta()?.kappa as usize;
    let mut queues: BTreeMap<Color, Vec<ItemId>> = BTreeMap::new();
    for it in game.items().iter().rev() {
        queues.entry(it.color).or_default().push(it.id);
    }
    let mut left = game.n();
    let mut bins: Vec<Vec<ItemId>> = vec![Vec::new()];
    let mut last: Option<Color> = None;
    while left > 0 {
        let current = bins.last_mut().expect("at least one bin");
        let pick = if current.len() < kappa {
            queues
                .iter()
                .filter(|(&c, q)| Some(c) != last && !q.is_empty())
                .fold(None, |best: Option<(Color, usize)>, (&c, q)| match best {
                    Some((_, k)) if k >= q.len() => best,
                    _ => Some((c, q.len())),
                })
        } else {
            None
        };
        match pick {
            Some((c, _)) => {
                let id = queues.get_mut(&c).and_then(|q| q.pop()).expect("non-empty");
                current.push(id);
                last = Some(c);
                left -= 1;
            }
            None => {
                bins.push(Vec::new());
                last = None;
            }
        }
    }
    let opened = bins
        .iter()
        .filter(|b| !b.is_empty())
        .map(|b| OpenedBin {
            items: b.clone(),
            load: b.iter().map(|&id| game.items()[id - 1].size.clone()).sum(),
            choice: Choice::AlternatingFill,
        })
        .collect();
    let profile = Profile::new(game, bins)?;
    Ok(Construction { profile, opened })
}
