use std::path::Path;

use anyhow::{Context, Result};
use colorbin_core::instances::GeneratedCase;
use colorbin_core::{GameInstance, Profile, ProfileRepr};
use serde::Serialize;
use serde_json::{json, Value};

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Reads either a bare instance or a generated case (which carries one).
pub fn load_game(path: &Path) -> Result<(GameInstance, Option<GeneratedCase>)> {
    let value = read_json(path)?;
    if value.get("instance").is_some() {
        let case: GeneratedCase =
            serde_json::from_value(value).with_context(|| format!("invalid case in {}", path.display()))?;
        Ok((case.instance.clone(), Some(case)))
    } else {
        let game = serde_json::from_value(value).with_context(|| format!("invalid instance in {}", path.display()))?;
        Ok((game, None))
    }
}

pub fn load_case(path: &Path) -> Result<GeneratedCase> {
    serde_json::from_value(read_json(path)?).with_context(|| format!("invalid case in {}", path.display()))
}

pub fn load_profile(game: &GameInstance, path: &Path) -> Result<Profile> {
    let repr: ProfileRepr =
        serde_json::from_value(read_json(path)?).with_context(|| format!("invalid profile in {}", path.display()))?;
    Ok(Profile::from_repr(game, repr)?)
}

/// Open bins only, bottom to top.
pub fn profile_json(profile: &Profile) -> Value {
    let bins: Vec<&[usize]> = profile.open_bins().map(|b| b.contents()).collect();
    json!({ "bins": bins })
}

/// Per-bin items, colours and load of the open bins.
pub fn bin_details(game: &GameInstance, profile: &Profile) -> Result<Vec<Value>> {
    profile
        .open_bins()
        .map(|bin| {
            let colors: Vec<u32> = bin
                .contents()
                .iter()
                .map(|&id| game.item(id).map(|it| it.color.0))
                .collect::<colorbin_core::Result<_>>()?;
            Ok(json!({
                "items": bin.contents(),
                "colors": colors,
                "load": bin.load(game)?,
            }))
        })
        .collect()
}

pub fn emit_json(value: &impl Serialize, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit_text(&text, out)
}

pub fn emit_text(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
