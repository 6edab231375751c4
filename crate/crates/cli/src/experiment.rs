//! Ratio sweeps over files, generated families and random games.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use colorbin_core::instances::{random_instance, Family, GeneratedCase, SizeFamily};
use colorbin_core::oracle::{enumerate_nash, optimal_bins_with_cap};
use colorbin_core::{packing, CostModel, GameInstance, Profile, Rational};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::args::CapArgs;
use crate::io::load_game;

pub const CSV_HEADER: &str = "instance_id,n,m,model,opt,best_ne,worst_ne,pos,poa,pos_decimal,poa_decimal,basis";

/// Where the numbers in a ratio row come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    /// Every equilibrium enumerated, optimum solved exactly.
    Exact,
    /// Too many items to enumerate equilibria; the case's `sigma` witness
    /// stands in for both the best and the worst equilibrium.
    Witness,
    /// Over every cap and no witness to fall back on.
    Skipped,
}

impl Basis {
    fn as_str(self) -> &'static str {
        match self {
            Basis::Exact => "exact",
            Basis::Witness => "witness",
            Basis::Skipped => "skipped",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioRow {
    pub id: String,
    pub n: usize,
    pub m: u32,
    pub model: CostModel,
    pub opt: Option<usize>,
    pub best_ne: Option<usize>,
    pub worst_ne: Option<usize>,
    pub basis: Basis,
}

impl RatioRow {
    pub fn pos(&self) -> Option<Rational> {
        Some(Rational::from(self.best_ne?) / Rational::from(self.opt?))
    }

    pub fn poa(&self) -> Option<Rational> {
        Some(Rational::from(self.worst_ne?) / Rational::from(self.opt?))
    }

    pub fn csv(&self) -> String {
        let show = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        let exact = |v: Option<Rational>| v.map(|x| x.to_string()).unwrap_or_default();
        let decimal = |v: Option<Rational>| v.map(|x| format!("{:.6}", x.to_f64())).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.id,
            self.n,
            self.m,
            self.model,
            show(self.opt),
            show(self.best_ne),
            show(self.worst_ne),
            exact(self.pos()),
            exact(self.poa()),
            decimal(self.pos()),
            decimal(self.poa()),
            self.basis.as_str()
        )
    }
}

/// One game to measure, with an optional equilibrium witness.
#[derive(Clone, Debug)]
pub struct Subject {
    pub id: String,
    pub game: GameInstance,
    pub sigma: Option<Profile>,
}

impl Subject {
    fn from_case(id: String, case: GeneratedCase) -> Self {
        let sigma = case.witness("sigma").cloned();
        Subject {
            id,
            game: case.instance,
            sigma,
        }
    }
}

pub fn ratio_row(subject: &Subject, caps: &CapArgs) -> Result<RatioRow> {
    let g = &subject.game;
    let mut row = RatioRow {
        id: subject.id.clone(),
        n: g.n(),
        m: g.m(),
        model: g.cost_model(),
        opt: None,
        best_ne: None,
        worst_ne: None,
        basis: Basis::Skipped,
    };
    if g.n() > caps.opt_cap {
        return Ok(row);
    }
    if g.n() <= caps.ne_cap.min(packing::MAX_ITEMS) {
        let nash = enumerate_nash(g, caps.ne_cap)?;
        row.best_ne = nash.iter().map(Profile::social_cost).min();
        row.worst_ne = nash.iter().map(Profile::social_cost).max();
        row.basis = Basis::Exact;
    } else if let Some(sigma) = &subject.sigma {
        row.best_ne = Some(sigma.social_cost());
        row.worst_ne = Some(sigma.social_cost());
        row.basis = Basis::Witness;
    } else {
        return Ok(row);
    }
    row.opt = Some(optimal_bins_with_cap(g, caps.opt_cap)?.opt);
    Ok(row)
}

/// Rows in the order of `subjects`, computed in parallel.
pub fn ratio_rows(subjects: &[Subject], caps: &CapArgs) -> Result<Vec<RatioRow>> {
    subjects.par_iter().map(|s| ratio_row(s, caps)).collect()
}

pub fn render_csv(rows: &[RatioRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv());
        out.push('\n');
    }
    out
}

/// Parameters shared by family lookups; unused ones are ignored.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct FamilyKnobs {
    #[serde(default)]
    pub k: Option<u64>,
    #[serde(default)]
    pub h: Option<u64>,
    #[serde(default)]
    pub m: Option<u32>,
    #[serde(default)]
    pub n: Option<u64>,
    #[serde(default)]
    pub odd: bool,
}

pub fn family_from(name: &str, knobs: FamilyKnobs) -> Result<Family> {
    let need = |v: Option<u64>, what: &str| v.with_context(|| format!("family {name} needs --{what}"));
    Ok(match name {
        "cyclic-bw" => Family::CyclicBw,
        "pos-multicolor-egalitarian" => Family::PosMulticolorEgalitarian {
            m: knobs.m.unwrap_or(3),
            h: knobs.h.unwrap_or(2),
            k: need(knobs.k, "k")?,
        },
        "pos-multicolor-proportional" => Family::PosMulticolorProportional {
            n: need(knobs.n.or(knobs.k), "n")?,
        },
        "pos-bw-egalitarian" => Family::PosBwEgalitarian { k: need(knobs.k, "k")? },
        "pos-bw-proportional" => Family::PosBwProportional { k: need(knobs.k, "k")? },
        "pos-uniform-even" => Family::PosUniformEven { k: need(knobs.k, "k")? },
        "poa-uniform-multicolor" => Family::PoaUniformMulticolor {
            k: need(knobs.k, "k")?,
            odd: knobs.odd,
        },
        "poa-uniform-odd-bw" => Family::PoaUniformOddBw { k: need(knobs.k, "k")? },
        other => bail!(colorbin_core::Error::Parse(format!(
            "unknown family {other:?}; expected one of {}",
            colorbin_core::instances::FAMILY_NAMES.join(", ")
        ))),
    })
}

/// `uniform:K`, `grid:D` or `zero-heavy:D`.
pub fn parse_sizes(text: &str) -> Result<SizeFamily> {
    let bad = || colorbin_core::Error::Parse(format!("bad size distribution {text:?}"));
    let (kind, value) = text.split_once(':').ok_or_else(bad)?;
    let value: u64 = value.parse().map_err(|_| bad())?;
    if value == 0 {
        bail!(bad());
    }
    Ok(match kind {
        "uniform" => SizeFamily::Uniform { kappa: value },
        "grid" => SizeFamily::Grid { denom: value },
        "zero-heavy" => SizeFamily::ZeroHeavy { denom: value },
        _ => bail!(bad()),
    })
}

/// Identifier of a generated case: family name plus its parameters.
pub fn case_id(case: &GeneratedCase) -> String {
    let mut id = case.family.clone();
    for (key, value) in &case.params {
        id.push_str(&format!("-{key}{value}"));
    }
    id
}

/// Sources of games for a ratio sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "source")]
pub enum Source {
    Files {
        paths: Vec<PathBuf>,
    },
    Family {
        family: String,
        /// Values of the family's size parameter.
        ks: Vec<u64>,
        #[serde(flatten)]
        knobs: FamilyKnobs,
    },
    Random {
        count: usize,
        items: usize,
        colors: u32,
        sizes: String,
        model: CostModel,
        seed: u64,
    },
}

/// A ratio sweep read from JSON: `{"sources": [...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub sources: Vec<Source>,
}

impl ExperimentPlan {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing plan {}", path.display()))
    }

    pub fn subjects(&self) -> Result<Vec<Subject>> {
        let mut out = Vec::new();
        for source in &self.sources {
            out.extend(source.subjects()?);
        }
        Ok(out)
    }
}

impl Source {
    pub fn subjects(&self) -> Result<Vec<Subject>> {
        match self {
            Source::Files { paths } => paths
                .iter()
                .map(|path| {
                    let (game, case) = load_game(path)?;
                    let id = path
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_else(|| path.display().to_string());
                    Ok(match case {
                        Some(case) => Subject::from_case(id, case),
                        None => Subject { id, game, sigma: None },
                    })
                })
                .collect(),
            Source::Family { family, ks, knobs } => ks
                .iter()
                .map(|&k| {
                    let knobs = FamilyKnobs {
                        k: Some(k),
                        n: Some(k),
                        ..*knobs
                    };
                    let case = family_from(family, knobs)?.generate()?;
                    Ok(Subject::from_case(case_id(&case), case))
                })
                .collect(),
            Source::Random {
                count,
                items,
                colors,
                sizes,
                model,
                seed,
            } => {
                let family = parse_sizes(sizes)?;
                (0..*count)
                    .map(|i| {
                        let game = random_instance(*items, *colors, family, *model, seed.wrapping_add(i as u64))?;
                        Ok(Subject {
                            id: format!("random-s{seed}-{i}"),
                            game,
                            sigma: None,
                        })
                    })
                    .collect()
            }
        }
    }
}
