//! Exhaustive reference solvers for small games.
//!
//! Everything here is exponential and guarded by an item-count cap:
//! [`optimal_bins`] (minimum number of feasible bins), [`enumerate_nash`]
//! (every equilibrium up to bin renumbering), [`exact_ratios`], the
//! black-and-white bin classification, and subset brute force used to
//! validate the polynomial solvers in [`crate::equilibria`].

use std::collections::BTreeMap;

use serde::Serialize;

use crate::dynamics::is_nash;
use crate::equilibria::{order_bin, ColorCounts};
use crate::error::{Error, Result};
use crate::model::{Color, GameInstance, Item, ItemId, Profile};
use crate::packing;
use crate::rational::Rational;

pub const OPT_CAP: usize = 20;
pub const NE_CAP: usize = 8;
pub const POOL_CAP: usize = 12;

/// A multiset fits one feasible bin: load at most one and the dominant
/// colour occupies at most every other slot.
pub fn feasible_multiset(counts: &ColorCounts, total_size: &Rational) -> bool {
    *total_size <= Rational::one() && counts.is_orderable()
}

fn check_cap(what: &'static str, n: usize, cap: usize) -> Result<()> {
    if n > cap {
        Err(Error::CapExceeded { what, n, cap })
    } else {
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OptResult {
    pub opt: usize,
    pub witness: Profile,
}

/// Items with equal size and colour are interchangeable for packing
/// purposes, so the optimum is computed over per-class multiplicities.
struct Classes {
    ids: Vec<Vec<ItemId>>,
    color: Vec<Color>,
    scaled: Vec<u64>,
    radix: Vec<usize>,
}

impl Classes {
    fn of(game: &GameInstance) -> Self {
        let mut groups: BTreeMap<(Color, u64), Vec<ItemId>> = BTreeMap::new();
        for it in game.items() {
            groups.entry((it.color, game.scaled_size(it.id))).or_default().push(it.id);
        }
        let mut ids = Vec::new();
        let mut color = Vec::new();
        let mut scaled = Vec::new();
        for ((c, s), v) in groups {
            ids.push(v);
            color.push(c);
            scaled.push(s);
        }
        let mut radix = Vec::with_capacity(ids.len());
        let mut r = 1;
        for v in &ids {
            radix.push(r);
            r *= v.len() + 1;
        }
        Classes {
            ids,
            color,
            scaled,
            radix,
        }
    }

    fn state_count(&self) -> usize {
        self.ids.iter().map(|v| v.len() + 1).product()
    }

    fn digit(&self, state: usize, k: usize) -> usize {
        state / self.radix[k] % (self.ids[k].len() + 1)
    }
}

/// Enumerates bins (as multiplicity vectors) drawn from `state` that hold at
/// least one item of class `first` and no item of a lower class.
struct BinSearch<'a> {
    classes: &'a Classes,
    capacity: u64,
    state: usize,
    take: Vec<usize>,
    colors: BTreeMap<Color, usize>,
}

impl BinSearch<'_> {
    fn run(&mut self, k: usize, first: usize, load: u64, total: usize, visit: &mut impl FnMut(usize, &[usize])) {
        let cls = self.classes;
        if k == cls.ids.len() {
            let dominant = self.colors.values().copied().max().unwrap_or(0);
            if total > 0 && dominant <= total.div_ceil(2) {
                let sub: usize = self.take.iter().zip(&cls.radix).map(|(t, r)| t * r).sum();
                visit(sub, &self.take);
            }
            return;
        }
        let avail = if k < first { 0 } else { cls.digit(self.state, k) };
        let lo = usize::from(k == first);
        for j in lo..=avail {
            let l = load + j as u64 * cls.scaled[k];
            if l > self.capacity {
                break;
            }
            self.take[k] = j;
            *self.colors.entry(cls.color[k]).or_insert(0) += j;
            self.run(k + 1, first, l, total + j, visit);
            *self.colors.get_mut(&cls.color[k]).expect("inserted") -= j;
        }
        self.take[k] = 0;
    }
}

fn for_each_first_bin(classes: &Classes, capacity: u64, state: usize, mut visit: impl FnMut(usize, &[usize])) {
    let Some(first) = (0..classes.ids.len()).find(|&k| classes.digit(state, k) > 0) else {
        return;
    };
    let mut search = BinSearch {
        classes,
        capacity,
        state,
        take: vec![0; classes.ids.len()],
        colors: BTreeMap::new(),
    };
    search.run(0, first, 0, 0, &mut visit);
}

/// Minimum number of feasible bins packing every item, with a witness.
pub fn optimal_bins(game: &GameInstance) -> Result<OptResult> {
    optimal_bins_with_cap(game, OPT_CAP)
}

pub fn optimal_bins_with_cap(game: &GameInstance, cap: usize) -> Result<OptResult> {
    check_cap("optimal_bins", game.n(), cap)?;
    let classes = Classes::of(game);
    let capacity = game.common_denominator();
    let states = classes.state_count();
    let mut best = vec![u8::MAX; states];
    best[0] = 0;
    for state in 1..states {
        let mut b = u8::MAX;
        for_each_first_bin(&classes, capacity, state, |sub, _| {
            b = b.min(best[state - sub].saturating_add(1));
        });
        best[state] = b;
    }
    let full = states - 1;
    let opt = best[full] as usize;

    let mut used = vec![0usize; classes.ids.len()];
    let mut bins = Vec::with_capacity(opt);
    let mut state = full;
    while state != 0 {
        let mut chosen: Option<(usize, Vec<usize>)> = None;
        for_each_first_bin(&classes, capacity, state, |sub, take| {
            if chosen.is_none() && best[state - sub] as usize + 1 == best[state] as usize {
                chosen = Some((sub, take.to_vec()));
            }
        });
        let (sub, take) = chosen.expect("optimal value has a realising bin");
        let mut items: Vec<Item> = Vec::new();
        for (k, &t) in take.iter().enumerate() {
            for &id in &classes.ids[k][used[k]..used[k] + t] {
                items.push(game.item(id)?.clone());
            }
            used[k] += t;
        }
        let bin = order_bin(&items)?.expect("feasible multiset is orderable");
        bins.push(bin.contents().to_vec());
        state -= sub;
    }
    let witness = Profile::new(game, bins)?;
    Ok(OptResult { opt, witness })
}

/// Every Nash equilibrium up to bin renumbering, canonicalised and sorted.
pub fn enumerate_nash(game: &GameInstance, cap: usize) -> Result<Vec<Profile>> {
    check_cap("enumerate_nash", game.n(), cap.min(packing::MAX_ITEMS))?;
    let mut out: Vec<Profile> = packing::collect_packings(game, true, |p| is_nash(game, p))
        .into_iter()
        .map(|p| p.canonical())
        .collect();
    out.sort_by_key(canonical_key);
    out.dedup();
    Ok(out)
}

fn canonical_key(p: &Profile) -> Vec<(usize, Vec<ItemId>)> {
    p.bins().iter().map(|b| (b.len(), b.contents().to_vec())).collect()
}

pub const RATIO_CSV_HEADER: &str = "instance_id,n,m,model,opt,best_ne,worst_ne,pos,poa";

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RatioReport {
    pub n: usize,
    pub m: u32,
    pub model: crate::model::CostModel,
    pub opt: usize,
    pub best_ne: usize,
    pub worst_ne: usize,
    pub pos: Rational,
    pub poa: Rational,
    pub ne_count: usize,
}

impl RatioReport {
    pub fn csv_row(&self, instance_id: &str) -> String {
        format!(
            "{instance_id},{},{},{},{},{},{},{},{}",
            self.n, self.m, self.model, self.opt, self.best_ne, self.worst_ne, self.pos, self.poa
        )
    }
}

/// Exact price of stability and price of anarchy of one game.
pub fn exact_ratios(game: &GameInstance, ne_cap: usize) -> Result<RatioReport> {
    let nash = enumerate_nash(game, ne_cap)?;
    let opt = optimal_bins(game)?.opt;
    let costs = nash.iter().map(Profile::social_cost);
    let best_ne = costs.clone().min().expect("every game has an equilibrium");
    let worst_ne = costs.max().expect("every game has an equilibrium");
    Ok(RatioReport {
        n: game.n(),
        m: game.m(),
        model: game.cost_model(),
        opt,
        best_ne,
        worst_ne,
        pos: Rational::from(best_ne) / Rational::from(opt),
        poa: Rational::from(worst_ne) / Rational::from(opt),
        ne_count: nash.len(),
    })
}

/// Open bins of a black and white profile split by size (singleton or not)
/// and top colour, plus the colour totals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BWDecomposition {
    pub s_b: usize,
    pub s_w: usize,
    pub m_b: usize,
    pub m_w: usize,
    pub blacks: usize,
    pub whites: usize,
}

pub fn bw_decompose(game: &GameInstance, profile: &Profile) -> Result<BWDecomposition> {
    if game.m() != 2 {
        return Err(Error::NotBlackWhite(game.m()));
    }
    let mut d = BWDecomposition {
        s_b: 0,
        s_w: 0,
        m_b: 0,
        m_w: 0,
        blacks: 0,
        whites: 0,
    };
    for bin in profile.open_bins() {
        let black = bin.top_color(game) == Some(Color::BLACK);
        match (bin.len() == 1, black) {
            (true, true) => d.s_b += 1,
            (true, false) => d.s_w += 1,
            (false, true) => d.m_b += 1,
            (false, false) => d.m_w += 1,
        }
    }
    for it in game.items() {
        if it.color == Color::BLACK {
            d.blacks += 1;
        } else {
            d.whites += 1;
        }
    }
    Ok(d)
}

impl BWDecomposition {
    /// Singleton black bins exceed singleton white plus white-topped bins by
    /// at most `opt`.
    pub fn singleton_excess_within(&self, opt: usize) -> bool {
        self.s_b as i64 - self.s_w as i64 - self.m_w as i64 <= opt as i64
    }
}

/// Checks `s_b - s_w - m_w <= OPT` for a feasible black and white profile.
pub fn singleton_excess_check(game: &GameInstance, profile: &Profile) -> Result<bool> {
    singleton_excess_check_with_opt(game, profile, optimal_bins(game)?.opt)
}

/// As [`singleton_excess_check`] with a precomputed optimum.
pub fn singleton_excess_check_with_opt(game: &GameInstance, profile: &Profile, opt: usize) -> Result<bool> {
    if !profile.is_feasible(game) {
        return Err(Error::InfeasibleProfile);
    }
    Ok(bw_decompose(game, profile)?.singleton_excess_within(opt))
}

fn feasible_subsets(pool: &[Item]) -> Result<impl Iterator<Item = Vec<&Item>>> {
    check_cap("brute force pool", pool.len(), POOL_CAP)?;
    Ok((0u32..1 << pool.len()).filter_map(move |mask| {
        let subset: Vec<&Item> = (0..pool.len()).filter(|i| mask >> i & 1 == 1).map(|i| &pool[i]).collect();
        let counts = ColorCounts::from_colors(subset.iter().map(|it| it.color));
        let size: Rational = subset.iter().map(|it| &it.size).sum();
        feasible_multiset(&counts, &size).then_some(subset)
    }))
}

/// Largest number of pool items that fit one feasible bin, by exhaustion.
pub fn brute_force_mccp(pool: &[Item]) -> Result<usize> {
    Ok(feasible_subsets(pool)?.map(|s| s.len()).max().unwrap_or(0))
}

/// Largest total size of pool items that fit one feasible bin, by exhaustion.
pub fn brute_force_css(pool: &[Item]) -> Result<Rational> {
    Ok(feasible_subsets(pool)?
        .map(|s| s.iter().map(|it| &it.size).sum::<Rational>())
        .max()
        .unwrap_or_else(Rational::zero))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CostModel;

    fn uniform(size: Rational, colors: &[u32]) -> GameInstance {
        GameInstance::from_sizes(2, CostModel::Egalitarian, colors.iter().map(|&c| (size.clone(), c))).unwrap()
    }

    fn pool(specs: &[(i64, i64, u32)]) -> Vec<Item> {
        specs
            .iter()
            .enumerate()
            .map(|(i, &(p, q, c))| Item {
                id: i + 1,
                size: Rational::new(p, q),
                color: Color(c),
            })
            .collect()
    }

    #[test]
    fn feasible_multiset_examples() {
        let c = |v: &[u32]| ColorCounts::from_colors(v.iter().map(|&x| Color(x)));
        assert!(feasible_multiset(&c(&[1, 1, 2]), &Rational::new(3, 4)));
        assert!(!feasible_multiset(&c(&[1, 1, 1, 2]), &Rational::new(1, 2)));
        assert!(feasible_multiset(&c(&[1]), &Rational::one()));
        assert!(!feasible_multiset(&c(&[1, 2]), &Rational::new(5, 4)));
    }

    #[test]
    fn optimal_bins_examples() {
        let g = uniform(Rational::new(1, 4), &[1, 1, 1, 2, 2, 2]);
        let r = optimal_bins(&g).unwrap();
        assert_eq!(r.opt, 2);
        assert!(r.witness.is_feasible(&g));
        assert_eq!(r.witness.social_cost(), 2);

        let g = uniform(Rational::new(1, 3), &[2, 2, 2, 2, 2, 1, 1, 1, 1]);
        assert_eq!(optimal_bins(&g).unwrap().opt, 3);

        let g = uniform(Rational::new(1, 2), &[1]);
        assert_eq!(optimal_bins(&g).unwrap().opt, 1);

        let g = uniform(Rational::zero(), &[1, 1, 1]);
        assert_eq!(optimal_bins(&g).unwrap().opt, 3);
    }

    #[test]
    fn optimal_bins_refuses_beyond_cap() {
        let g = uniform(Rational::new(1, 8), &[1, 2, 1]);
        assert!(matches!(optimal_bins_with_cap(&g, 2), Err(Error::CapExceeded { n: 3, cap: 2, .. })));
    }

    #[test]
    fn enumerate_nash_examples() {
        let g = uniform(Rational::new(1, 4), &[1, 2]);
        let ne = enumerate_nash(&g, NE_CAP).unwrap();
        assert_eq!(ne.len(), 2);
        assert!(ne.iter().all(|p| p.social_cost() == 1));

        let g = uniform(Rational::new(1, 4), &[1, 1]);
        let ne = enumerate_nash(&g, NE_CAP).unwrap();
        assert_eq!(ne.len(), 1);
        assert_eq!(ne[0].social_cost(), 2);

        let g = uniform(Rational::new(1, 2), &[2, 2, 1]);
        let ne = enumerate_nash(&g, NE_CAP).unwrap();
        assert!(ne.iter().all(|p| p.social_cost() == 2));
    }

    #[test]
    fn exact_ratio_examples() {
        let g = uniform(Rational::new(1, 4), &[1, 2]);
        let r = exact_ratios(&g, NE_CAP).unwrap();
        assert_eq!((r.opt, r.best_ne, r.worst_ne), (1, 1, 1));
        assert_eq!(r.poa, Rational::one());

        let g = uniform(Rational::new(1, 2), &[1, 1, 2]);
        let r = exact_ratios(&g, NE_CAP).unwrap();
        assert_eq!((r.opt, r.worst_ne), (2, 2));
        assert_eq!(r.csv_row("x"), "x,3,2,egalitarian,2,2,2,1,1");
    }

    #[test]
    fn bw_decompose_examples() {
        let g = uniform(Rational::new(1, 4), &[1, 1, 2, 1]);
        let p = Profile::new(&g, vec![vec![1], vec![2], vec![3, 4]]).unwrap();
        let d = bw_decompose(&g, &p).unwrap();
        assert_eq!((d.s_b, d.s_w, d.m_b, d.m_w), (2, 0, 1, 0));
        assert_eq!((d.blacks, d.whites), (3, 1));

        let g = uniform(Rational::new(1, 4), &[2, 2]);
        let d = bw_decompose(&g, &Profile::singletons(&g)).unwrap();
        assert_eq!(d.s_w, 2);

        let g = GameInstance::from_sizes(3, CostModel::Egalitarian, [(Rational::new(1, 2), 3)]).unwrap();
        assert_eq!(bw_decompose(&g, &Profile::singletons(&g)), Err(Error::NotBlackWhite(3)));
    }

    #[test]
    fn singleton_excess_on_black_singletons() {
        let g = uniform(Rational::new(1, 4), &[1, 1, 1]);
        assert!(singleton_excess_check(&g, &Profile::singletons(&g)).unwrap());
        let p = Profile::new(&g, vec![vec![1, 2], vec![3]]).unwrap();
        assert_eq!(singleton_excess_check(&g, &p), Err(Error::InfeasibleProfile));
    }

    #[test]
    fn brute_force_examples() {
        let p = pool(&[(1, 2, 1), (2, 5, 1), (3, 10, 2)]);
        assert_eq!(brute_force_mccp(&p).unwrap(), 2);
        assert_eq!(brute_force_css(&p).unwrap(), Rational::new(4, 5));

        let p = pool(&[(1, 3, 1)]);
        assert_eq!(brute_force_mccp(&p).unwrap(), 1);
        assert_eq!(brute_force_css(&p).unwrap(), Rational::new(1, 3));

        let p = pool(&[(0, 1, 1), (0, 1, 1), (0, 1, 2)]);
        assert_eq!(brute_force_mccp(&p).unwrap(), 3);
        assert_eq!(brute_force_css(&p).unwrap(), Rational::zero());

        let big = pool(&[(1, 20, 1); 13]);
        assert!(brute_force_mccp(&big).is_err());
    }
}
