//! Items, ordered bins, strategy profiles and per-player costs.
//!
//! A game has `n` items and exactly `n` unit-capacity bins. A [`Profile`]
//! stores every bin as an explicit bottom-to-top sequence of item ids; an
//! item is *misplaced* when one of its direct neighbours in that sequence has
//! the same colour, and a misplaced item pays an infinite cost.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// 1-based item (player) identifier.
pub type ItemId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Color(pub u32);

impl Color {
    pub const BLACK: Color = Color(1);
    pub const WHITE: Color = Color(2);
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Item {
    pub id: ItemId,
    pub size: Rational,
    pub color: Color,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostModel {
    /// A bin's unit cost is split equally among its items.
    Egalitarian,
    /// A bin's unit cost is split in proportion to item sizes.
    Proportional,
}

impl fmt::Display for CostModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CostModel::Egalitarian => "egalitarian",
            CostModel::Proportional => "proportional",
        })
    }
}

impl std::str::FromStr for CostModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "egalitarian" => Ok(CostModel::Egalitarian),
            "proportional" => Ok(CostModel::Proportional),
            other => Err(Error::Parse(format!("unknown cost model {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// Capacity data for games where every item has the same size `s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniformMeta {
    /// `floor(1/s)`: how many items fit into one bin.
    pub kappa: u64,
    pub parity: Parity,
}

/// A colorful bin packing game.
///
/// Sizes are exact rationals; on construction the least common multiple `D`
/// of all size denominators is computed and every size is also kept as the
/// integer `s_i * D`, which is what the hot loops compare.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "InstanceRepr", into = "InstanceRepr")]
pub struct GameInstance {
    m: u32,
    cost_model: CostModel,
    items: Vec<Item>,
    unit: u64,
    scaled: Vec<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct InstanceRepr {
    m: u32,
    cost_model: CostModel,
    items: Vec<Item>,
}

impl TryFrom<InstanceRepr> for GameInstance {
    type Error = Error;
    fn try_from(repr: InstanceRepr) -> Result<Self> {
        GameInstance::new(repr.m, repr.cost_model, repr.items)
    }
}

impl From<GameInstance> for InstanceRepr {
    fn from(g: GameInstance) -> Self {
        InstanceRepr {
            m: g.m,
            cost_model: g.cost_model,
            items: g.items,
        }
    }
}

impl GameInstance {
    /// Validates and builds a game. Items may come in any order but their ids
    /// must be exactly `1..=n`.
    pub fn new(m: u32, cost_model: CostModel, mut items: Vec<Item>) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidInstance(format!("need at least 2 colors, got {m}")));
        }
        items.sort_by_key(|it| it.id);
        for (idx, it) in items.iter().enumerate() {
            if it.id != idx + 1 {
                return Err(Error::InvalidInstance(format!(
                    "item ids must be exactly 1..={}, found {}",
                    items.len(),
                    it.id
                )));
            }
            if it.color.0 < 1 || it.color.0 > m {
                return Err(Error::InvalidInstance(format!(
                    "item {} has color {} outside 1..={m}",
                    it.id, it.color
                )));
            }
            if it.size.is_negative() || it.size > Rational::one() {
                return Err(Error::InvalidInstance(format!(
                    "item {} has size {} outside [0, 1]",
                    it.id, it.size
                )));
            }
        }
        let unit = Rational::lcm_of_denominators(items.iter().map(|it| &it.size))
            .to_u64()
            .filter(|d| d.checked_mul(items.len().max(1) as u64).is_some())
            .ok_or_else(|| {
                Error::InvalidInstance("common size denominator does not fit in 64 bits".into())
            })?;
        let scaled = items
            .iter()
            .map(|it| it.size.scaled(unit).expect("lcm divides every denominator"))
            .collect();
        Ok(GameInstance {
            m,
            cost_model,
            items,
            unit,
            scaled,
        })
    }

    /// Builds a game from `(size, color)` pairs, numbering items `1..=n` in order.
    pub fn from_sizes(
        m: u32,
        cost_model: CostModel,
        specs: impl IntoIterator<Item = (Rational, u32)>,
    ) -> Result<Self> {
        let items = specs
            .into_iter()
            .enumerate()
            .map(|(i, (size, color))| Item {
                id: i + 1,
                size,
                color: Color(color),
            })
            .collect();
        GameInstance::new(m, cost_model, items)
    }

    /// Same items and colours under another cost function.
    pub fn with_cost_model(&self, cost_model: CostModel) -> Self {
        GameInstance {
            cost_model,
            ..self.clone()
        }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn cost_model(&self) -> CostModel {
        self.cost_model
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn n(&self) -> usize {
        self.items.len()
    }

    /// Number of bins; always equal to the number of items.
    pub fn bin_count(&self) -> usize {
        self.items.len()
    }

    pub fn item(&self, id: ItemId) -> Result<&Item> {
        id.checked_sub(1)
            .and_then(|i| self.items.get(i))
            .ok_or(Error::UnknownItem(id))
    }

    pub(crate) fn color(&self, id: ItemId) -> Color {
        self.items[id - 1].color
    }

    /// `s_id * D` for a valid id.
    pub(crate) fn scaled_size(&self, id: ItemId) -> u64 {
        self.scaled[id - 1]
    }

    /// The least common multiple `D` of all size denominators: every
    /// `s_i * D` is an integer.
    pub fn common_denominator(&self) -> u64 {
        self.unit
    }

    pub fn total_size(&self) -> Rational {
        self.items.iter().map(|it| &it.size).sum()
    }

    /// Per-colour item counts, indexed by `color - 1`.
    pub fn color_histogram(&self) -> Vec<usize> {
        let mut hist = vec![0; self.m as usize];
        for it in &self.items {
            hist[(it.color.0 - 1) as usize] += 1;
        }
        hist
    }

    pub fn is_uniform(&self) -> bool {
        self.items.windows(2).all(|w| w[0].size == w[1].size)
    }

    pub fn uniform_meta(&self) -> Result<UniformMeta> {
        let first = self.items.first().ok_or(Error::NotUniform)?;
        if !self.is_uniform() {
            return Err(Error::NotUniform);
        }
        if first.size.is_zero() {
            return Err(Error::InvalidInstance("uniform size 0 has no finite kappa".into()));
        }
        let kappa = first
            .size
            .recip()
            .floor()
            .to_u64()
            .expect("1/s with s in (0,1] is a small positive integer");
        if kappa <= 1 {
            return Err(Error::TrivialKappa(kappa));
        }
        let parity = if kappa % 2 == 0 { Parity::Even } else { Parity::Odd };
        Ok(UniformMeta { kappa, parity })
    }
}

/// Cost paid by a player.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "tag", content = "value", rename_all = "lowercase")]
pub enum CostValue {
    Finite(Rational),
    /// Paid exactly by misplaced items.
    Infinite,
}

impl CostValue {
    pub fn is_infinite(&self) -> bool {
        matches!(self, CostValue::Infinite)
    }
}

impl fmt::Display for CostValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostValue::Finite(r) => write!(f, "{r}"),
            CostValue::Infinite => f.write_str("inf"),
        }
    }
}

/// Integer-scaled cost used by the enumeration hot paths. Compares by
/// cross-multiplication, so it orders exactly like the rational cost.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum CostKey {
    Finite { num: u128, den: u128 },
    Infinite,
}

impl Ord for CostKey {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (CostKey::Infinite, CostKey::Infinite) => Ordering::Equal,
            (CostKey::Infinite, _) => Ordering::Greater,
            (_, CostKey::Infinite) => Ordering::Less,
            (CostKey::Finite { num: a, den: b }, CostKey::Finite { num: c, den: d }) => {
                (a * d).cmp(&(c * b))
            }
        }
    }
}

impl PartialOrd for CostKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl CostKey {
    /// Cost of a non-misplaced item of scaled size `size` sitting in a bin
    /// with `len` items and scaled load `load` (both counting the item).
    pub(crate) fn finite(model: CostModel, size: u64, len: usize, load: u64) -> CostKey {
        match model {
            CostModel::Proportional if load > 0 => CostKey::Finite {
                num: size as u128,
                den: load as u128,
            },
            // Egalitarian, and the all-zero-size proportional fallback.
            _ => CostKey::Finite {
                num: 1,
                den: len as u128,
            },
        }
    }

    pub(crate) fn to_value(self) -> CostValue {
        match self {
            CostKey::Infinite => CostValue::Infinite,
            CostKey::Finite { num, den } => CostValue::Finite(
                Rational::from_big(BigInt::from(num), BigInt::from(den))
                    .expect("cost denominators are positive"),
            ),
        }
    }
}

/// One bin: item ids from bottom (index 0) to top.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bin(Vec<ItemId>);

impl Bin {
    pub fn new(contents: Vec<ItemId>) -> Self {
        Bin(contents)
    }

    pub fn contents(&self) -> &[ItemId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn top(&self) -> Option<ItemId> {
        self.0.last().copied()
    }

    pub fn load(&self, game: &GameInstance) -> Result<Rational> {
        self.0
            .iter()
            .map(|&id| game.item(id).map(|it| it.size.clone()))
            .sum()
    }

    pub(crate) fn scaled_load(&self, game: &GameInstance) -> u64 {
        self.0.iter().map(|&id| game.scaled_size(id)).sum()
    }

    pub fn top_color(&self, game: &GameInstance) -> Option<Color> {
        self.top().and_then(|id| game.item(id).ok()).map(|it| it.color)
    }

    /// No two vertically adjacent items share a colour. Empty bins are feasible.
    pub fn is_feasible(&self, game: &GameInstance) -> bool {
        self.0
            .windows(2)
            .all(|w| game.color(w[0]) != game.color(w[1]))
    }

    pub(crate) fn push(&mut self, id: ItemId) {
        self.0.push(id);
    }

    pub(crate) fn remove_at(&mut self, pos: usize) -> ItemId {
        self.0.remove(pos)
    }
}

/// A strategy profile: one ordered bin per player slot.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Profile {
    bins: Vec<Bin>,
}

/// Wire form of a profile, `{"bins": [[id, ...], ...]}` bottom to top.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileRepr {
    pub bins: Vec<Vec<ItemId>>,
}

impl Profile {
    /// Validates the packing against `game`: each id exactly once and every
    /// bin within capacity. Missing trailing bins are added empty, so callers
    /// may list only the open bins.
    pub fn new(game: &GameInstance, bins: Vec<Vec<ItemId>>) -> Result<Self> {
        let n = game.bin_count();
        let nonempty = bins.iter().filter(|b| !b.is_empty()).count();
        if nonempty > n {
            return Err(Error::TooManyBins {
                found: bins.len(),
                expected: n,
            });
        }
        let mut bins: Vec<Bin> = bins.into_iter().map(Bin).collect();
        if bins.len() > n {
            // surplus bins must all be empty; keep open ones in order
            let mut open: Vec<Bin> = bins.drain(..).filter(|b| !b.is_empty()).collect();
            open.resize(n, Bin::default());
            bins = open;
        }
        bins.resize(n, Bin::default());

        let mut seen = HashSet::with_capacity(n);
        for (j, bin) in bins.iter().enumerate() {
            for &id in bin.contents() {
                game.item(id)?;
                if !seen.insert(id) {
                    return Err(Error::DuplicateItem(id));
                }
            }
            if bin.scaled_load(game) > game.common_denominator() {
                return Err(Error::CapacityExceeded {
                    bin: j,
                    load: bin.load(game)?.to_string(),
                });
            }
        }
        if let Some(missing) = (1..=n).find(|id| !seen.contains(id)) {
            return Err(Error::MissingItem(missing));
        }
        Ok(Profile { bins })
    }

    pub fn from_repr(game: &GameInstance, repr: ProfileRepr) -> Result<Self> {
        Profile::new(game, repr.bins)
    }

    pub fn to_repr(&self) -> ProfileRepr {
        ProfileRepr {
            bins: self.bins.iter().map(|b| b.0.clone()).collect(),
        }
    }

    /// Every item alone in its own bin.
    pub fn singletons(game: &GameInstance) -> Self {
        Profile {
            bins: (1..=game.n()).map(|id| Bin(vec![id])).collect(),
        }
    }

    pub(crate) fn from_bins_unchecked(bins: Vec<Bin>) -> Self {
        Profile { bins }
    }

    pub fn bins(&self) -> &[Bin] {
        &self.bins
    }

    pub fn bin(&self, j: usize) -> Result<&Bin> {
        self.bins.get(j).ok_or(Error::UnknownBin(j))
    }

    pub(crate) fn bins_mut(&mut self) -> &mut Vec<Bin> {
        &mut self.bins
    }

    pub fn open_bins(&self) -> impl Iterator<Item = &Bin> {
        self.bins.iter().filter(|b| !b.is_empty())
    }

    /// `(bin index, position from bottom)` of an item.
    pub fn locate(&self, id: ItemId) -> Option<(usize, usize)> {
        self.bins.iter().enumerate().find_map(|(j, b)| {
            b.contents()
                .iter()
                .position(|&x| x == id)
                .map(|p| (j, p))
        })
    }

    pub fn is_misplaced(&self, game: &GameInstance, id: ItemId) -> Result<bool> {
        let color = game.item(id)?.color;
        let (j, p) = self.locate(id).ok_or(Error::MissingItem(id))?;
        Ok(misplaced_at(game, self.bins[j].contents(), p, color))
    }

    pub fn is_feasible(&self, game: &GameInstance) -> bool {
        self.bins.iter().all(|b| b.is_feasible(game))
    }

    pub fn player_cost(&self, game: &GameInstance, id: ItemId) -> Result<CostValue> {
        let item = game.item(id)?;
        let (j, p) = self.locate(id).ok_or(Error::MissingItem(id))?;
        let bin = &self.bins[j];
        if misplaced_at(game, bin.contents(), p, item.color) {
            return Ok(CostValue::Infinite);
        }
        Ok(CostKey::finite(
            game.cost_model(),
            game.scaled_size(id),
            bin.len(),
            bin.scaled_load(game),
        )
        .to_value())
    }

    /// Social cost `F`: the number of open bins.
    pub fn social_cost(&self) -> usize {
        self.open_bins().count()
    }

    /// Representative of the profile's class under bin renumbering: open bins
    /// sorted by (length, contents), empty bins last.
    pub fn canonical(&self) -> Profile {
        let mut open: Vec<Bin> = self.open_bins().cloned().collect();
        open.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.0.cmp(&b.0)));
        let n = self.bins.len();
        open.resize(n, Bin::default());
        Profile { bins: open }
    }
}

pub(crate) fn misplaced_at(game: &GameInstance, seq: &[ItemId], pos: usize, color: Color) -> bool {
    (pos > 0 && game.color(seq[pos - 1]) == color)
        || (pos + 1 < seq.len() && game.color(seq[pos + 1]) == color)
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .open_bins()
            .map(|b| {
                let ids: Vec<String> = b.0.iter().map(|id| id.to_string()).collect();
                format!("({})", ids.join(","))
            })
            .collect();
        f.write_str(&parts.join(" "))
    }
}
