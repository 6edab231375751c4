//! Generators for the lower-bound families and for random games.
//!
//! Each family generator returns a [`GeneratedCase`]: the game, named
//! witness profiles (`sigma` is an equilibrium, `sigma_star` a cheap
//! feasible packing) and named expected values. Every case is run through
//! [`verify_case`] before it is returned; parameters whose witnesses fail
//! are refused.
//!
//! In the two-colour families colour 1 is black and colour 2 is white.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::is_nash;
use crate::equilibria::{best_bin_equilibrium, order_bin};
use crate::error::{Error, Result};
use crate::model::{Bin, Color, CostModel, GameInstance, Item, ItemId, Profile, ProfileRepr};
use crate::rational::Rational;

/// A generated game with its witnesses and the values they should exhibit.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "CaseRepr", into = "CaseRepr")]
pub struct GeneratedCase {
    pub family: String,
    pub params: BTreeMap<String, u64>,
    pub instance: GameInstance,
    pub witnesses: BTreeMap<String, Profile>,
    pub expected: BTreeMap<String, Rational>,
    pub provenance: String,
}

#[derive(Serialize, Deserialize)]
struct CaseRepr {
    family: String,
    params: BTreeMap<String, u64>,
    instance: GameInstance,
    witnesses: BTreeMap<String, ProfileRepr>,
    expected: BTreeMap<String, Rational>,
    provenance: String,
}

impl TryFrom<CaseRepr> for GeneratedCase {
    type Error = Error;

    fn try_from(r: CaseRepr) -> Result<Self> {
        let witnesses = r
            .witnesses
            .into_iter()
            .map(|(k, v)| Ok((k, Profile::from_repr(&r.instance, v)?)))
            .collect::<Result<_>>()?;
        Ok(GeneratedCase {
            family: r.family,
            params: r.params,
            instance: r.instance,
            witnesses,
            expected: r.expected,
            provenance: r.provenance,
        })
    }
}

impl From<GeneratedCase> for CaseRepr {
    fn from(c: GeneratedCase) -> Self {
        CaseRepr {
            family: c.family,
            params: c.params,
            instance: c.instance,
            witnesses: c.witnesses.into_iter().map(|(k, v)| (k, v.to_repr())).collect(),
            expected: c.expected,
            provenance: c.provenance,
        }
    }
}

impl GeneratedCase {
    pub fn witness(&self, name: &str) -> Option<&Profile> {
        self.witnesses.get(name)
    }

    pub fn expect(&self, name: &str) -> Option<&Rational> {
        self.expected.get(name)
    }
}

/// Outcome of one self-check on a generated case.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CaseCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(out: &mut Vec<CaseCheck>, name: &str, passed: bool, detail: String) {
    out.push(CaseCheck {
        name: name.to_string(),
        passed,
        detail,
    });
}

/// Re-derives every claim a case makes about its witnesses.
///
/// `sigma` must be a Nash equilibrium and `sigma_star` feasible; expected
/// keys `F_sigma`, `F_sigma_star`, `ratio`, `ratio_formula`,
/// `ne_lower_bound` and `min_b_singletons` (with `b_size`) are compared
/// against the witnesses when present.
pub fn verify_case(case: &GeneratedCase) -> Vec<CaseCheck> {
    let g = &case.instance;
    let mut out = Vec::new();
    let cost = |name: &str| case.witness(name).map(|p| Rational::from(p.social_cost()));
    if let Some(sigma) = case.witness("sigma") {
        check(&mut out, "sigma is a Nash equilibrium", is_nash(g, sigma), format!("{sigma}"));
    }
    if let Some(star) = case.witness("sigma_star") {
        check(&mut out, "sigma_star is feasible", star.is_feasible(g), format!("{star}"));
    }
    for (key, name) in [("F_sigma", "sigma"), ("F_sigma_star", "sigma_star")] {
        if let Some(want) = case.expect(key) {
            let got = cost(name);
            check(
                &mut out,
                &format!("{key} matches"),
                got.as_ref() == Some(want),
                format!("expected {want}, got {}", got.map_or("no witness".into(), |v| v.to_string())),
            );
        }
    }
    if let (Some(f), Some(f_star)) = (cost("sigma"), cost("sigma_star")) {
        let ratio = f / f_star;
        for key in ["ratio", "ratio_formula"] {
            if let Some(want) = case.expect(key) {
                check(&mut out, &format!("{key} matches"), ratio == *want, format!("expected {want}, got {ratio}"));
            }
        }
    }
    if let (Some(bound), Some(f)) = (case.expect("ne_lower_bound"), cost("sigma")) {
        check(&mut out, "sigma meets the lower bound", f >= *bound, format!("F = {f}, bound {bound}"));
    }
    if let (Some(min), Some(b), Some(sigma)) = (case.expect("min_b_singletons"), case.expect("b_size"), case.witness("sigma")) {
        let count = sigma
            .open_bins()
            .filter(|bin| bin.len() == 1 && g.item(bin.contents()[0]).is_ok_and(|it| it.size == *b))
            .count();
        check(
            &mut out,
            "sigma has enough singleton b-bins",
            Rational::from(count) >= *min,
            format!("{count} singleton bins, at least {min} required"),
        );
    }
    out
}

fn finish(case: GeneratedCase) -> Result<GeneratedCase> {
    match verify_case(&case).into_iter().find(|c| !c.passed) {
        Some(c) => Err(Error::WitnessRejected(format!("{}: {} ({})", case.family, c.name, c.detail))),
        None => Ok(case),
    }
}

/// Collects items in groups and hands back the ids of each group.
struct Builder {
    items: Vec<(Rational, u32)>,
}

impl Builder {
    fn new() -> Self {
        Builder { items: Vec::new() }
    }

    fn add(&mut self, count: u64, size: &Rational, color: u32) -> Vec<ItemId> {
        let start = self.items.len() + 1;
        for _ in 0..count {
            self.items.push((size.clone(), color));
        }
        (start..start + count as usize).collect()
    }

    fn build(self, m: u32, model: CostModel) -> Result<GameInstance> {
        GameInstance::from_sizes(m, model, self.items)
    }
}

/// Orders each id group with [`order_bin`] and assembles a profile.
fn witness(game: &GameInstance, groups: Vec<Vec<ItemId>>) -> Result<Profile> {
    let mut bins = Vec::with_capacity(groups.len());
    for ids in groups {
        let items: Vec<Item> = ids.iter().map(|&id| game.item(id).cloned()).collect::<Result<_>>()?;
        let bin = order_bin(&items)?
            .ok_or_else(|| Error::WitnessRejected(format!("bin {ids:?} cannot be ordered feasibly")))?;
        bins.push(bin.contents().to_vec());
    }
    Profile::new(game, bins)
}

fn take(ids: &mut Vec<ItemId>, count: usize) -> Vec<ItemId> {
    ids.drain(..count).collect()
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameters(msg.to_string()))
    }
}

fn r(p: u64, q: u64) -> Rational {
    Rational::new(p as i64, q as i64)
}

fn params(pairs: &[(&str, u64)]) -> BTreeMap<String, u64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

fn expected(pairs: Vec<(&str, Rational)>) -> BTreeMap<String, Rational> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// Three black and three white items of size 1/4 whose unrestricted
/// improving deviations can cycle.
pub fn cyclic_bw_game() -> Result<GeneratedCase> {
    let size = r(1, 4);
    let mut b = Builder::new();
    let mut black = b.add(3, &size, 1);
    let mut white = b.add(3, &size, 2);
    let game = b.build(2, CostModel::Egalitarian)?;
    let mut first = take(&mut black, 2);
    first.extend(take(&mut white, 2));
    let mut second = black;
    second.extend(white);
    let star = witness(&game, vec![first, second])?;
    finish(GeneratedCase {
        family: "cyclic-bw".into(),
        params: BTreeMap::new(),
        instance: game,
        witnesses: [("sigma_star".to_string(), star)].into(),
        expected: expected(vec![("F_sigma_star", Rational::integer(2))]),
        provenance: "two colours, uniform size 1/4, improving-move cycle without validity".into(),
    })
}

/// Many-colour egalitarian game whose equilibria all need far more bins
/// than the `h`-bin optimum: `hk` items of colour 1 of size `1/k - h*delta`
/// and `h(k-1)/(m-1)` items of size `delta` in each other colour.
pub fn pos_multicolor_egalitarian(m: u32, h: u64, k: u64) -> Result<GeneratedCase> {
    require(m >= 3, "m must be at least 3")?;
    require(h >= 2, "h must be at least 2")?;
    require(k >= 1 && k.is_multiple_of(m as u64), "k must be a positive multiple of m")?;
    let others = m as u64 - 1;
    require((h * (k - 1)).is_multiple_of(others), "h(k-1) must be divisible by m-1")?;
    let per_color = h * (k - 1) / others;
    let delta = r(1, 2 * h * k * (k + 1));
    let big = r(1, k) - Rational::from(h as usize) * &delta;
    let mut b = Builder::new();
    let mut bigs = b.add(h * k, &big, 1);
    let mut smalls = Vec::new();
    for c in 2..=m {
        smalls.extend(b.add(per_color, &delta, c));
    }
    let game = b.build(m, CostModel::Egalitarian)?;
    let groups = (0..h)
        .map(|_| {
            let mut g = take(&mut bigs, k as usize);
            g.extend(take(&mut smalls, (k - 1) as usize));
            g
        })
        .collect();
    let star = witness(&game, groups)?;
    let sigma = best_bin_equilibrium(&game)?.profile;
    let bound = Rational::from(k as usize)
        * (Rational::from(h as usize) - Rational::one() - Rational::from(h as usize) / Rational::from(others as usize));
    finish(GeneratedCase {
        family: "pos-multicolor-egalitarian".into(),
        params: params(&[("m", m as u64), ("h", h), ("k", k)]),
        instance: game,
        witnesses: [("sigma".to_string(), sigma), ("sigma_star".to_string(), star)].into(),
        expected: expected(vec![
            ("F_sigma_star", Rational::from(h as usize)),
            ("ne_lower_bound", bound),
            ("delta", delta),
        ]),
        provenance: "many colours, egalitarian cost, equilibria forced into singleton bins".into(),
    })
}

/// Three-colour proportional game where one large item of colour 1 blocks
/// the small colour-1 items: `n/2` items of colour 1 (one of size `a`, the
/// rest of size `b = 1 - a`) and `n/4` items of size `c` in each of colours
/// 2 and 3, with `eps = 1/n`, `a = 1 - 2/n + eps`, `c = (2/n - eps)/n`.
pub fn pos_multicolor_proportional(n: u64) -> Result<GeneratedCase> {
    require(n >= 4 && n.is_multiple_of(4), "n must be a positive multiple of 4")?;
    let eps = r(1, n);
    let a = Rational::one() - r(2, n) + &eps;
    let b_size = Rational::one() - &a;
    let c = (r(2, n) - &eps) / Rational::from(n as usize);
    let mut b = Builder::new();
    let big = b.add(1, &a, 1);
    let mut rest = b.add(n / 2 - 1, &b_size, 1);
    rest.extend(b.add(n / 4, &c, 2));
    rest.extend(b.add(n / 4, &c, 3));
    let game = b.build(3, CostModel::Proportional)?;
    let star = witness(&game, vec![big, rest])?;
    let sigma = best_bin_equilibrium(&game)?.profile;
    let min_b = Rational::from(n as usize / 2) - Rational::integer(5);
    finish(GeneratedCase {
        family: "pos-multicolor-proportional".into(),
        params: params(&[("n", n)]),
        instance: game,
        witnesses: [("sigma".to_string(), sigma), ("sigma_star".to_string(), star)].into(),
        expected: expected(vec![
            ("F_sigma_star", Rational::integer(2)),
            ("min_b_singletons", min_b),
            ("b_size", b_size),
            ("epsilon", eps),
            ("c", c),
        ]),
        provenance: "three colours, proportional cost, one large item isolates the small ones".into(),
    })
}

/// Shared layout of the two-colour families whose unique equilibrium uses
/// `3k/2 + 1` bins against an optimum of `k/2 + 2`.
fn pos_bw(k: u64, model: CostModel, sizes: [Rational; 4], delta: Rational, family: &str) -> Result<GeneratedCase> {
    require(k >= 2 && k.is_multiple_of(2), "k must be even and at least 2")?;
    let [s1, s2, s3, s4] = sizes;
    let mut b = Builder::new();
    let mut t1 = b.add(2 * k, &s1, 2);
    let mut t2 = b.add(k / 2, &s2, 1);
    let mut t3 = b.add(2 * k, &s3, 1);
    let mut t4 = b.add(k, &s4, 2);
    let game = b.build(2, model)?;
    let ku = k as usize;

    let mut star_groups = Vec::new();
    {
        let (mut t1, mut t3, mut t4) = (t1.clone(), t3.clone(), t4.clone());
        for _ in 0..2 {
            let mut g = take(&mut t1, ku);
            g.extend(take(&mut t3, ku));
            star_groups.push(g);
        }
        for &big in &t2 {
            let mut g = take(&mut t4, 2);
            g.push(big);
            star_groups.push(g);
        }
    }
    let star = witness(&game, star_groups)?;

    let mut first = take(&mut t1, ku);
    first.extend(take(&mut t4, ku));
    first.extend(take(&mut t3, 2 * ku));
    let mut sigma_groups = vec![first];
    sigma_groups.extend(t1.into_iter().map(|id| vec![id]));
    sigma_groups.extend(t2.drain(..).map(|id| vec![id]));
    let sigma = witness(&game, sigma_groups)?;

    let ku = ku as i64;
    finish(GeneratedCase {
        family: family.into(),
        params: params(&[("k", k)]),
        instance: game,
        witnesses: [("sigma".to_string(), sigma), ("sigma_star".to_string(), star)].into(),
        expected: expected(vec![
            ("F_sigma", Rational::integer(3 * ku / 2 + 1)),
            ("F_sigma_star", Rational::integer(ku / 2 + 2)),
            ("ratio_formula", Rational::integer(3) - Rational::new(10, ku + 4)),
            ("delta", delta),
        ]),
        provenance: format!("two colours, {model} cost, equilibrium cost close to three times optimal"),
    })
}

/// Egalitarian variant: `2k` white items of size `1/k - 2 delta`, `k/2`
/// black of size 1, `2k` black of size `delta`, `k` white of size 0, with
/// `delta = 1/(4k(k+1))`.
pub fn pos_bw_egalitarian(k: u64) -> Result<GeneratedCase> {
    require(k >= 2, "k must be even and at least 2")?;
    let delta = r(1, 4 * k * (k + 1));
    let two = Rational::integer(2);
    let sizes = [r(1, k) - two * &delta, Rational::one(), delta.clone(), Rational::zero()];
    pos_bw(k, CostModel::Egalitarian, sizes, delta, "pos-bw-egalitarian")
}

/// Proportional variant: sizes `1/k - 3 delta`, `1 - 5k delta`, `delta`,
/// `delta`, with `delta = 1/(2k(5k+3))`.
pub fn pos_bw_proportional(k: u64) -> Result<GeneratedCase> {
    require(k >= 2, "k must be even and at least 2")?;
    let delta = r(1, 2 * k * (5 * k + 3));
    let sizes = [
        r(1, k) - Rational::integer(3) * &delta,
        Rational::one() - Rational::from(5 * k as usize) * &delta,
        delta.clone(),
        delta.clone(),
    ];
    pos_bw(k, CostModel::Proportional, sizes, delta, "pos-bw-proportional")
}

/// Uniform two-colour game with `k(k+1)/2` items of size `1/k`, of which
/// `k^2/4 + k/2` are white: every equilibrium uses `k` bins while `k/2 + 1`
/// suffice.
pub fn pos_uniform_even(k: u64) -> Result<GeneratedCase> {
    require(k >= 2 && k.is_multiple_of(2), "k must be even and at least 2")?;
    let size = r(1, k);
    let half = (k / 2) as usize;
    let mut b = Builder::new();
    let mut white = b.add(k * k / 4 + k / 2, &size, 2);
    let mut black = b.add(k * k / 4, &size, 1);
    let game = b.build(2, CostModel::Egalitarian)?;

    let mut star_groups = Vec::new();
    {
        let (mut w, mut bl) = (white.clone(), black.clone());
        for i in 0..=half {
            let mut g = take(&mut w, half);
            g.extend(take(&mut bl, if i < half { half - 1 } else { half }));
            star_groups.push(g);
        }
    }
    let star = witness(&game, star_groups)?;

    let mut sigma_groups = Vec::new();
    for _ in 0..half {
        let mut g = take(&mut white, half);
        g.extend(take(&mut black, half));
        sigma_groups.push(g);
    }
    sigma_groups.extend(white.into_iter().map(|id| vec![id]));
    let sigma = witness(&game, sigma_groups)?;

    let ki = k as i64;
    finish(GeneratedCase {
        family: "pos-uniform-even".into(),
        params: params(&[("k", k)]),
        instance: game,
        witnesses: [("sigma".to_string(), sigma), ("sigma_star".to_string(), star)].into(),
        expected: expected(vec![
            ("F_sigma", Rational::integer(ki)),
            ("F_sigma_star", Rational::integer(ki / 2 + 1)),
            ("ratio_formula", Rational::new(ki, ki / 2 + 1)),
        ]),
        provenance: "two colours, uniform size 1/k with k even, equilibria need k bins".into(),
    })
}

/// Three colours, uniform tiny size: `2k` items of colour 1, `k` each of
/// colours 2 and 3. Everything fits one bin, yet an equilibrium opens `2k`.
/// With `odd` an extra colour-1 item makes the per-bin capacity odd.
pub fn poa_uniform_multicolor(k: u64, odd: bool) -> Result<GeneratedCase> {
    require(k >= 1, "k must be at least 1")?;
    let kappa = 4 * k + u64::from(odd);
    let size = r(1, kappa);
    let mut b = Builder::new();
    let extra = if odd { b.add(1, &size, 1) } else { Vec::new() };
    let mut black = b.add(2 * k, &size, 1);
    let white = b.add(k, &size, 2);
    let red = b.add(k, &size, 3);
    let game = b.build(3, CostModel::Egalitarian)?;

    let star = witness(&game, vec![(1..=game.n()).collect()])?;

    let mut first = extra;
    for (w, rd) in white.iter().zip(&red) {
        first.push(*w);
        first.push(*rd);
    }
    first.push(black.remove(0));
    let mut bins = vec![first];
    bins.extend(black.into_iter().map(|id| vec![id]));
    let sigma = Profile::new(&game, bins)?;

    let ki = k as i64;
    finish(GeneratedCase {
        family: "poa-uniform-multicolor".into(),
        params: params(&[("k", k), ("odd", u64::from(odd))]),
        instance: game,
        witnesses: [("sigma".to_string(), sigma), ("sigma_star".to_string(), star)].into(),
        expected: expected(vec![
            ("F_sigma", Rational::integer(2 * ki)),
            ("F_sigma_star", Rational::one()),
            ("ratio", Rational::integer(2 * ki)),
        ]),
        provenance: "three colours, uniform size, equilibrium cost linear in n against one bin".into(),
    })
}

/// Uniform two-colour game with odd capacity `k`: `k(k+3)/2` items of size
/// `1/k`, `(k^2+4k-1)/4` of them white, with an equilibrium using
/// `(3k+1)/2` bins against an optimum of `(k+3)/2`.
pub fn poa_uniform_odd_bw(k: u64) -> Result<GeneratedCase> {
    require(k >= 3 && k % 2 == 1, "k must be odd and at least 3")?;
    let size = r(1, k);
    let up = k.div_ceil(2) as usize;
    let down = ((k - 1) / 2) as usize;
    let mut b = Builder::new();
    let mut white = b.add((k * k + 4 * k - 1) / 4, &size, 2);
    let mut black = b.add((k + 1) * (k + 1) / 4, &size, 1);
    let game = b.build(2, CostModel::Egalitarian)?;

    let mut star_groups = Vec::new();
    {
        let (mut w, mut bl) = (white.clone(), black.clone());
        for _ in 0..up {
            let mut g = take(&mut w, up);
            g.extend(take(&mut bl, down));
            star_groups.push(g);
        }
        let mut g = take(&mut w, down);
        g.extend(take(&mut bl, up));
        star_groups.push(g);
    }
    let star = witness(&game, star_groups)?;

    let mut sigma_groups = Vec::new();
    for _ in 0..up {
        let mut g = take(&mut white, down);
        g.extend(take(&mut black, up));
        sigma_groups.push(g);
    }
    sigma_groups.extend(white.into_iter().map(|id| vec![id]));
    let sigma = witness(&game, sigma_groups)?;

    let ki = k as i64;
    finish(GeneratedCase {
        family: "poa-uniform-odd-bw".into(),
        params: params(&[("k", k)]),
        instance: game,
        witnesses: [("sigma".to_string(), sigma), ("sigma_star".to_string(), star)].into(),
        expected: expected(vec![
            ("F_sigma", Rational::integer((3 * ki + 1) / 2)),
            ("F_sigma_star", Rational::integer((ki + 3) / 2)),
            ("ratio_formula", Rational::integer(3) - Rational::new(8, ki + 3)),
        ]),
        provenance: "two colours, uniform size 1/k with k odd, equilibrium cost close to three times optimal".into(),
    })
}

/// A family together with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    CyclicBw,
    PosMulticolorEgalitarian { m: u32, h: u64, k: u64 },
    PosMulticolorProportional { n: u64 },
    PosBwEgalitarian { k: u64 },
    PosBwProportional { k: u64 },
    PosUniformEven { k: u64 },
    PoaUniformMulticolor { k: u64, odd: bool },
    PoaUniformOddBw { k: u64 },
}

pub const FAMILY_NAMES: [&str; 8] = [
    "cyclic-bw",
    "pos-multicolor-egalitarian",
    "pos-multicolor-proportional",
    "pos-bw-egalitarian",
    "pos-bw-proportional",
    "pos-uniform-even",
    "poa-uniform-multicolor",
    "poa-uniform-odd-bw",
];

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::CyclicBw => FAMILY_NAMES[0],
            Family::PosMulticolorEgalitarian { .. } => FAMILY_NAMES[1],
            Family::PosMulticolorProportional { .. } => FAMILY_NAMES[2],
            Family::PosBwEgalitarian { .. } => FAMILY_NAMES[3],
            Family::PosBwProportional { .. } => FAMILY_NAMES[4],
            Family::PosUniformEven { .. } => FAMILY_NAMES[5],
            Family::PoaUniformMulticolor { .. } => FAMILY_NAMES[6],
            Family::PoaUniformOddBw { .. } => FAMILY_NAMES[7],
        }
    }

    pub fn generate(&self) -> Result<GeneratedCase> {
        match *self {
            Family::CyclicBw => cyclic_bw_game(),
            Family::PosMulticolorEgalitarian { m, h, k } => pos_multicolor_egalitarian(m, h, k),
            Family::PosMulticolorProportional { n } => pos_multicolor_proportional(n),
            Family::PosBwEgalitarian { k } => pos_bw_egalitarian(k),
            Family::PosBwProportional { k } => pos_bw_proportional(k),
            Family::PosUniformEven { k } => pos_uniform_even(k),
            Family::PoaUniformMulticolor { k, odd } => poa_uniform_multicolor(k, odd),
            Family::PoaUniformOddBw { k } => poa_uniform_odd_bw(k),
        }
    }

    /// Smallest parameters accepted by each family.
    pub fn small_examples() -> Vec<Family> {
        vec![
            Family::CyclicBw,
            Family::PosMulticolorEgalitarian { m: 3, h: 2, k: 3 },
            Family::PosMulticolorProportional { n: 8 },
            Family::PosBwEgalitarian { k: 2 },
            Family::PosBwProportional { k: 2 },
            Family::PosUniformEven { k: 2 },
            Family::PoaUniformMulticolor { k: 1, odd: false },
            Family::PoaUniformMulticolor { k: 1, odd: true },
            Family::PoaUniformOddBw { k: 3 },
        ]
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How random item sizes are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SizeFamily {
    /// Every item has size `1/kappa`.
    Uniform { kappa: u64 },
    /// Sizes `j/denom` with `j` uniform in `1..=denom`.
    Grid { denom: u64 },
    /// Half the items (in expectation) have size 0, the rest as in `Grid`.
    ZeroHeavy { denom: u64 },
}

/// Seeded random game: colours uniform in `1..=m`, sizes from `family`.
pub fn random_instance(n: usize, m: u32, family: SizeFamily, model: CostModel, seed: u64) -> Result<GameInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut items = Vec::with_capacity(n);
    for _ in 0..n {
        let color = rng.gen_range(1..=m.max(1));
        let size = match family {
            SizeFamily::Uniform { kappa } => {
                require(kappa >= 1, "kappa must be positive")?;
                r(1, kappa)
            }
            SizeFamily::Grid { denom } => {
                require(denom >= 1, "denominator must be positive")?;
                r(rng.gen_range(1..=denom), denom)
            }
            SizeFamily::ZeroHeavy { denom } => {
                require(denom >= 1, "denominator must be positive")?;
                if rng.gen_bool(0.5) {
                    Rational::zero()
                } else {
                    r(rng.gen_range(1..=denom), denom)
                }
            }
        };
        items.push((size, color));
    }
    GameInstance::from_sizes(m, model, items)
}

/// Seeded random feasible profile: items in random order, each appended to
/// a uniformly chosen bin (an existing one it can legally top, or a new
/// one).
pub fn random_feasible_profile(game: &GameInstance, seed: u64) -> Profile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<ItemId> = (1..=game.n()).collect();
    order.shuffle(&mut rng);
    let capacity = game.common_denominator();
    let mut bins: Vec<(Vec<ItemId>, u64, Color)> = Vec::new();
    for id in order {
        let s = game.scaled_size(id);
        let c = game.color(id);
        let options: Vec<usize> = bins
            .iter()
            .enumerate()
            .filter(|(_, (_, load, top))| *top != c && load + s <= capacity)
            .map(|(j, _)| j)
            .collect();
        let pick = rng.gen_range(0..=options.len());
        match options.get(pick) {
            Some(&j) => {
                let bin = &mut bins[j];
                bin.0.push(id);
                bin.1 += s;
                bin.2 = c;
            }
            None => bins.push((vec![id], s, c)),
        }
    }
    let mut all: Vec<Bin> = bins.into_iter().map(|(ids, _, _)| Bin::new(ids)).collect();
    all.resize(game.n(), Bin::default());
    Profile::from_bins_unchecked(all)
}
