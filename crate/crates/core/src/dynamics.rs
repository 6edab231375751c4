//! Improving deviations, best-response style dynamics and the two potential
//! functions that certify termination when only valid deviations are played.
//!
//! A deviation moves one item from its bin to the top of another bin. It is
//! *improving* when the mover's cost strictly drops and *valid* when the
//! destination bin is feasible before the move.

use std::collections::hash_map::Entry;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::ops::ControlFlow;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{misplaced_at, Color, CostKey, CostModel, GameInstance, ItemId, Profile};
use crate::packing;
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Deviation {
    pub item: ItemId,
    pub source: usize,
    pub target: usize,
    /// The target bin was feasible before the move.
    pub valid: bool,
}

impl fmt::Display for Deviation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "item {} : bin {} -> bin {}{}",
            self.item,
            self.source,
            self.target,
            if self.valid { "" } else { " (non-valid)" }
        )
    }
}

/// Which improving deviations a run may play.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeviationScope {
    ValidOnly,
    All,
}

impl DeviationScope {
    fn admits(self, valid: bool) -> bool {
        valid || self == DeviationScope::All
    }
}

/// Value of a potential function; always a non-negative integer.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PotentialValue(pub BigUint);

impl fmt::Display for PotentialValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for PotentialValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(&self.0)
    }
}

#[derive(Clone, Copy, Debug)]
struct BinSummary {
    len: usize,
    load: u64,
    top: Option<Color>,
    feasible: bool,
}

fn summarize(game: &GameInstance, profile: &Profile) -> Vec<BinSummary> {
    profile
        .bins()
        .iter()
        .map(|b| BinSummary {
            len: b.len(),
            load: b.scaled_load(game),
            top: b.top().map(|id| game.color(id)),
            feasible: b.is_feasible(game),
        })
        .collect()
}

#[derive(Clone, Copy, Debug)]
struct Move {
    deviation: Deviation,
    old: CostKey,
    new: CostKey,
}

/// Calls `visit` on every improving move in (item id, target bin) order.
fn for_each_improving_move(
    game: &GameInstance,
    profile: &Profile,
    scope: DeviationScope,
    mut visit: impl FnMut(Move) -> ControlFlow<()>,
) {
    let summary = summarize(game, profile);
    let capacity = game.common_denominator();
    let model = game.cost_model();

    let mut located: Vec<(usize, usize)> = vec![(0, 0); game.n() + 1];
    for (j, bin) in profile.bins().iter().enumerate() {
        for (p, &id) in bin.contents().iter().enumerate() {
            located[id] = (j, p);
        }
    }

    for (id, &(source, pos)) in located.iter().enumerate().skip(1) {
        let color = game.color(id);
        let size = game.scaled_size(id);
        let here = &summary[source];
        let old = if misplaced_at(game, profile.bins()[source].contents(), pos, color) {
            CostKey::Infinite
        } else {
            CostKey::finite(model, size, here.len, here.load)
        };
        for (target, there) in summary.iter().enumerate() {
            if target == source || there.load + size > capacity {
                continue;
            }
            if !scope.admits(there.feasible) {
                continue;
            }
            let new = if there.top == Some(color) {
                CostKey::Infinite
            } else {
                CostKey::finite(model, size, there.len + 1, there.load + size)
            };
            if new < old {
                let mv = Move {
                    deviation: Deviation {
                        item: id,
                        source,
                        target,
                        valid: there.feasible,
                    },
                    old,
                    new,
                };
                if visit(mv).is_break() {
                    return;
                }
            }
        }
    }
}

/// Every strict-improvement move, each flagged valid or non-valid, ordered by
/// item id and then target bin index.
pub fn enumerate_improving_deviations(game: &GameInstance, profile: &Profile) -> Vec<Deviation> {
    let mut out = Vec::new();
    for_each_improving_move(game, profile, DeviationScope::All, |mv| {
        out.push(mv.deviation);
        ControlFlow::Continue(())
    });
    out
}

fn collect_moves(game: &GameInstance, profile: &Profile, scope: DeviationScope) -> Vec<Move> {
    let mut out = Vec::new();
    for_each_improving_move(game, profile, scope, |mv| {
        out.push(mv);
        ControlFlow::Continue(())
    });
    out
}

/// No player has an improving deviation.
pub fn is_nash(game: &GameInstance, profile: &Profile) -> bool {
    let mut found = false;
    for_each_improving_move(game, profile, DeviationScope::All, |_| {
        found = true;
        ControlFlow::Break(())
    });
    !found
}

/// Removes the item from its bin (closing the gap) and puts it on top of the
/// target. The result may be infeasible even when `profile` is not.
pub fn apply_deviation(
    game: &GameInstance,
    profile: &Profile,
    deviation: &Deviation,
) -> Result<Profile> {
    game.item(deviation.item)?;
    let (source, pos) = profile
        .locate(deviation.item)
        .ok_or(Error::MissingItem(deviation.item))?;
    let target_bin = profile.bin(deviation.target)?;
    if deviation.target == source {
        return Err(Error::InvalidDeviation(format!(
            "item {} already sits in bin {source}",
            deviation.item
        )));
    }
    if target_bin.scaled_load(game) + game.scaled_size(deviation.item) > game.common_denominator()
    {
        return Err(Error::CapacityExceeded {
            bin: deviation.target,
            load: (target_bin.load(game)? + &game.item(deviation.item)?.size).to_string(),
        });
    }
    let mut next = profile.clone();
    let bins = next.bins_mut();
    let id = bins[source].remove_at(pos);
    bins[deviation.target].push(id);
    Ok(next)
}

/// Sum over feasible open bins of `|B|^|B|`.
pub fn potential_egalitarian(game: &GameInstance, profile: &Profile) -> PotentialValue {
    let mut total = BigUint::zero();
    for bin in profile.open_bins().filter(|b| b.is_feasible(game)) {
        let k = bin.len() as u32;
        total += BigUint::from(k).pow(k);
    }
    PotentialValue(total)
}

/// Sum over feasible open bins of `3^(load * D)`, `D` the common size
/// denominator. Distinct subset sums differ by at least `1/D`, so the base
/// raised to that gap is `3 > 2`, which is what strict monotonicity needs.
pub fn potential_proportional(game: &GameInstance, profile: &Profile) -> PotentialValue {
    let three = BigUint::from(3u32);
    let mut total = BigUint::zero();
    for bin in profile.open_bins().filter(|b| b.is_feasible(game)) {
        let exp = bin.scaled_load(game);
        total += if exp == 0 {
            BigUint::one()
        } else {
            three.pow(u32::try_from(exp).expect("scaled load fits the exponent range"))
        };
    }
    PotentialValue(total)
}

/// The potential matching the game's cost function.
pub fn potential(game: &GameInstance, profile: &Profile) -> PotentialValue {
    match game.cost_model() {
        CostModel::Egalitarian => potential_egalitarian(game, profile),
        CostModel::Proportional => potential_proportional(game, profile),
    }
}

/// How a run picks among the available improving deviations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Policy {
    /// The first deviation in enumeration order.
    FirstListed,
    /// Uniformly at random, from a seeded ChaCha stream.
    Random { seed: u64 },
    /// Largest cost decrease; leaving an infinite cost beats everything,
    /// ties go to the earliest listed deviation.
    MaxGain,
}

fn gain_better(a: &Move, b: &Move) -> bool {
    match (a.old, b.old) {
        (CostKey::Infinite, CostKey::Infinite) => a.new < b.new,
        (CostKey::Infinite, _) => true,
        (_, CostKey::Infinite) => false,
        _ => {
            let gain = |m: &Move| match (m.old.to_value(), m.new.to_value()) {
                (crate::model::CostValue::Finite(o), crate::model::CostValue::Finite(n)) => o - n,
                _ => unreachable!("finite costs on both sides"),
            };
            gain(a) > gain(b)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceStep {
    pub deviation: Deviation,
    #[serde(rename = "F")]
    pub social_cost: usize,
    pub potential: PotentialValue,
    pub profile: Profile,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Outcome {
    /// No admissible improving deviation is left.
    Converged,
    /// The profile after step `step` repeats (up to bin renumbering) the one
    /// reached after step `first_seen` (0 = initial profile).
    Revisited { first_seen: usize, step: usize },
    /// The step budget ran out.
    StepCap,
}

#[derive(Clone, Debug, Serialize)]
pub struct DynamicsTrace {
    pub initial: Profile,
    pub initial_potential: PotentialValue,
    pub steps: Vec<TraceStep>,
    pub terminal: Profile,
    pub outcome: Outcome,
}

impl DynamicsTrace {
    pub fn terminated(&self) -> bool {
        self.outcome == Outcome::Converged
    }

    /// Potential values along the run, initial profile included.
    pub fn potentials(&self) -> impl Iterator<Item = &PotentialValue> {
        std::iter::once(&self.initial_potential).chain(self.steps.iter().map(|s| &s.potential))
    }
}

/// Plays improving deviations from `initial` until none admissible is left,
/// a profile repeats (only tracked for [`DeviationScope::All`]), or
/// `max_steps` moves were made.
pub fn run_dynamics(
    game: &GameInstance,
    initial: &Profile,
    policy: Policy,
    scope: DeviationScope,
    max_steps: usize,
) -> DynamicsTrace {
    let mut rng = match policy {
        Policy::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let mut seen: HashMap<Profile, usize> = HashMap::new();
    if scope == DeviationScope::All {
        seen.insert(initial.canonical(), 0);
    }
    let mut current = initial.clone();
    let mut steps = Vec::new();
    let outcome = loop {
        let moves = collect_moves(game, &current, scope);
        if moves.is_empty() {
            break Outcome::Converged;
        }
        if steps.len() >= max_steps {
            break Outcome::StepCap;
        }
        let chosen = match policy {
            Policy::FirstListed => moves[0],
            Policy::Random { .. } => {
                let rng = rng.as_mut().expect("seeded for random policy");
                moves[rng.gen_range(0..moves.len())]
            }
            Policy::MaxGain => moves
                .iter()
                .skip(1)
                .fold(moves[0], |best, mv| if gain_better(mv, &best) { *mv } else { best }),
        };
        current = apply_deviation(game, &current, &chosen.deviation)
            .expect("enumerated deviations respect capacity");
        steps.push(TraceStep {
            deviation: chosen.deviation,
            social_cost: current.social_cost(),
            potential: potential(game, &current),
            profile: current.clone(),
        });
        if scope == DeviationScope::All {
            let step = steps.len();
            if let Some(&first_seen) = seen.get(&current.canonical()) {
                break Outcome::Revisited { first_seen, step };
            }
            seen.insert(current.canonical(), step);
        }
    };
    DynamicsTrace {
        initial_potential: potential(game, initial),
        initial: initial.clone(),
        steps,
        terminal: current,
        outcome,
    }
}

/// Valid-only dynamics. Hitting `max_steps` means the potential argument was
/// violated somewhere and is reported as an error.
pub fn run_valid_dynamics(
    game: &GameInstance,
    initial: &Profile,
    policy: Policy,
    max_steps: usize,
) -> Result<DynamicsTrace> {
    let trace = run_dynamics(game, initial, policy, DeviationScope::ValidOnly, max_steps);
    match trace.outcome {
        Outcome::Converged => Ok(trace),
        _ => Err(Error::StepCapExceeded(max_steps)),
    }
}

/// Result of a search for a cycle of improving deviations.
#[derive(Clone, Debug)]
pub enum CycleSearch {
    /// Profiles `c[0] -> c[1] -> ... -> c[k-1] -> c[0]`, each arrow an
    /// admissible improving deviation (profiles canonicalised).
    Found {
        cycle: Vec<Profile>,
        deviations: Vec<Deviation>,
        explored: usize,
    },
    /// Every reachable profile was explored and no cycle exists.
    Acyclic { explored: usize },
    /// The state cap was hit before the search finished.
    Inconclusive { explored: usize },
}

impl CycleSearch {
    pub fn found(&self) -> bool {
        matches!(self, CycleSearch::Found { .. })
    }

    pub fn explored(&self) -> usize {
        match self {
            CycleSearch::Found { explored, .. }
            | CycleSearch::Acyclic { explored }
            | CycleSearch::Inconclusive { explored } => *explored,
        }
    }
}

pub const DEFAULT_STATE_CAP: usize = 1_000_000;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mark {
    OnStack,
    Done,
}

struct Frame {
    node: Profile,
    succ: Vec<(Deviation, Profile)>,
    next: usize,
}

fn successors(game: &GameInstance, node: &Profile, scope: DeviationScope) -> Vec<(Deviation, Profile)> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for mv in collect_moves(game, node, scope) {
        let next = apply_deviation(game, node, &mv.deviation)
            .expect("enumerated deviations respect capacity")
            .canonical();
        if seen.insert(next.clone()) {
            out.push((mv.deviation, next));
        }
    }
    out
}

struct CycleDfs<'a> {
    game: &'a GameInstance,
    scope: DeviationScope,
    cap: usize,
    marks: HashMap<Profile, Mark>,
}

impl CycleDfs<'_> {
    /// Depth-first search from `root`; `Some` when a cycle or the cap is hit.
    fn explore(&mut self, root: Profile) -> Option<CycleSearch> {
        let root = root.canonical();
        if self.marks.contains_key(&root) {
            return None;
        }
        self.marks.insert(root.clone(), Mark::OnStack);
        let mut stack = vec![Frame {
            succ: successors(self.game, &root, self.scope),
            node: root,
            next: 0,
        }];
        while let Some(frame) = stack.last_mut() {
            if frame.next == frame.succ.len() {
                let done = stack.pop().expect("non-empty stack");
                self.marks.insert(done.node, Mark::Done);
                continue;
            }
            let (dev, child) = frame.succ[frame.next].clone();
            frame.next += 1;
            let explored = self.marks.len();
            match self.marks.entry(child.clone()) {
                Entry::Occupied(e) if *e.get() == Mark::Done => {}
                Entry::Occupied(_) => {
                    // back edge: the cycle is the stack suffix starting at `child`
                    let start = stack
                        .iter()
                        .position(|f| f.node == child)
                        .expect("on-stack node is in the stack");
                    let cycle: Vec<Profile> = stack[start..].iter().map(|f| f.node.clone()).collect();
                    let mut deviations: Vec<Deviation> = stack[start..stack.len() - 1]
                        .iter()
                        .map(|f| f.succ[f.next - 1].0)
                        .collect();
                    deviations.push(dev);
                    return Some(CycleSearch::Found {
                        cycle,
                        deviations,
                        explored,
                    });
                }
                Entry::Vacant(e) => {
                    if explored >= self.cap {
                        return Some(CycleSearch::Inconclusive { explored });
                    }
                    e.insert(Mark::OnStack);
                    let succ = successors(self.game, &child, self.scope);
                    stack.push(Frame {
                        node: child,
                        succ,
                        next: 0,
                    });
                }
            }
        }
        None
    }
}

/// Searches the improving-deviation graph reachable from `start` (all
/// improving deviations when `allow_nonvalid`, valid ones otherwise).
/// Profiles are identified up to bin renumbering. Never reports `Acyclic`
/// unless the whole reachable graph was explored within `cap` states.
pub fn find_deviation_cycle(
    game: &GameInstance,
    start: &Profile,
    allow_nonvalid: bool,
    cap: usize,
) -> CycleSearch {
    let mut dfs = CycleDfs {
        game,
        scope: scope_for(allow_nonvalid),
        cap,
        marks: HashMap::new(),
    };
    dfs.explore(start.clone())
        .unwrap_or(CycleSearch::Acyclic {
            explored: dfs.marks.len(),
        })
}

/// Like [`find_deviation_cycle`] but rooted at every capacity-respecting
/// profile of the game, so `Acyclic` certifies the whole graph.
pub fn find_cycle_anywhere(game: &GameInstance, allow_nonvalid: bool, cap: usize) -> CycleSearch {
    let mut dfs = CycleDfs {
        game,
        scope: scope_for(allow_nonvalid),
        cap,
        marks: HashMap::new(),
    };
    let mut result = None;
    packing::for_each_packing(game, false, |profile| {
        match dfs.explore(profile.clone()) {
            Some(r) => {
                result = Some(r);
                ControlFlow::Break(())
            }
            None => ControlFlow::Continue(()),
        }
    });
    result.unwrap_or(CycleSearch::Acyclic {
        explored: dfs.marks.len(),
    })
}

fn scope_for(allow_nonvalid: bool) -> DeviationScope {
    if allow_nonvalid {
        DeviationScope::All
    } else {
        DeviationScope::ValidOnly
    }
}

/// Exact gain of a deviation for its mover (`None` when leaving an infinite cost).
pub fn deviation_gain(
    game: &GameInstance,
    profile: &Profile,
    deviation: &Deviation,
) -> Result<Option<Rational>> {
    let before = profile.player_cost(game, deviation.item)?;
    let after = apply_deviation(game, profile, deviation)?.player_cost(game, deviation.item)?;
    use crate::model::CostValue::*;
    Ok(match (before, after) {
        (Finite(a), Finite(b)) => Some(a - b),
        _ => None,
    })
}
