use anyhow::{bail, Result};
use colorbin_core::dynamics::{
    find_cycle_anywhere, find_deviation_cycle, is_nash, run_dynamics, run_valid_dynamics, CycleSearch,
    DeviationScope, Policy,
};
use colorbin_core::equilibria::{alternating_fill_equilibrium, best_bin_equilibrium};
use colorbin_core::instances::{random_feasible_profile, random_instance, verify_case, CaseCheck};
use colorbin_core::oracle::{enumerate_nash, optimal_bins_with_cap, singleton_excess_check_with_opt};
use colorbin_core::{packing, CostModel, Profile, Rational};
use serde_json::{json, Value};

use crate::args::*;
use crate::exit::{CheckFailed, Inconclusive};
use crate::experiment::{self, ExperimentPlan, FamilyKnobs, Source};
use crate::io::{bin_details, emit_json, emit_text, load_case, load_game, load_profile, profile_json};

pub fn run(cli: Cli) -> Result<()> {
    let caps = cli.caps;
    match cli.command {
        Command::Solve(args) => solve(args),
        Command::Dynamics(args) => dynamics(args, &caps),
        Command::Oracle(args) => oracle(args, &caps),
        Command::Generate(args) => generate(args),
        Command::Ratios(args) => ratios(args, &caps),
        Command::Verify(args) => verify(args, &caps),
    }
}

impl From<ModelArg> for CostModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Egalitarian => CostModel::Egalitarian,
            ModelArg::Proportional => CostModel::Proportional,
        }
    }
}

fn solve(args: SolveArgs) -> Result<()> {
    let (game, _) = load_game(&args.instance)?;
    let (name, built) = match args.alg {
        Algorithm::Alg1 => ("alg1", best_bin_equilibrium(&game)?),
        Algorithm::Alg2 => ("alg2", alternating_fill_equilibrium(&game)?),
    };
    let p = &built.profile;
    let report = json!({
        "algorithm": name,
        "F": p.social_cost(),
        "is_nash": is_nash(&game, p),
        "profile": profile_json(p),
        "bins": bin_details(&game, p)?,
        "certificate": built.opened,
    });
    emit_json(&report, args.out.as_deref())
}

fn cycle_json(search: &CycleSearch) -> Value {
    match search {
        CycleSearch::Found {
            cycle, deviations, ..
        } => json!({
            "profiles": cycle.iter().map(profile_json).collect::<Vec<_>>(),
            "deviations": deviations,
        }),
        _ => Value::Null,
    }
}

fn dynamics(args: DynamicsArgs, caps: &CapArgs) -> Result<()> {
    let (game, _) = load_game(&args.instance)?;
    let start = match (&args.start, args.random_start) {
        (Some(path), _) => load_profile(&game, path)?,
        (None, true) => random_feasible_profile(&game, args.seed),
        (None, false) => Profile::singletons(&game),
    };
    let (policy_name, policy) = match args.policy {
        PolicyArg::First => ("first", Policy::FirstListed),
        PolicyArg::Random => ("random", Policy::Random { seed: args.seed }),
        PolicyArg::MaxGain => ("max-gain", Policy::MaxGain),
    };

    if !args.allow_nonvalid {
        let trace = run_valid_dynamics(&game, &start, policy, caps.max_steps)?;
        let report = json!({
            "mode": "valid",
            "policy": policy_name,
            "seed": args.seed,
            "steps": trace.steps.len(),
            "F": trace.terminal.social_cost(),
            "is_nash": is_nash(&game, &trace.terminal),
            "terminal": profile_json(&trace.terminal),
            "trace": trace,
        });
        return emit_json(&report, args.out.as_deref());
    }

    let trace = run_dynamics(&game, &start, policy, DeviationScope::All, caps.max_steps);
    let mut scope = "reachable";
    let mut search = find_deviation_cycle(&game, &start, true, caps.state_cap);
    if !search.found() && game.n() <= packing::MAX_ITEMS {
        scope = "anywhere";
        search = find_cycle_anywhere(&game, true, caps.state_cap);
    }
    let report = json!({
        "mode": "all",
        "policy": policy_name,
        "seed": args.seed,
        "steps": trace.steps.len(),
        "is_nash": is_nash(&game, &trace.terminal),
        "trace": trace,
        "cycle": search.found(),
        "cycle_scope": if search.found() { Value::from(scope) } else { Value::Null },
        "cycle_witness": cycle_json(&search),
        "explored": search.explored(),
    });
    emit_json(&report, args.out.as_deref())?;
    if let CycleSearch::Inconclusive { explored } = search {
        bail!(Inconclusive(format!("cycle search stopped after {explored} profiles")));
    }
    Ok(())
}

fn oracle(args: OracleArgs, caps: &CapArgs) -> Result<()> {
    let (game, _) = load_game(&args.instance)?;
    let opt = optimal_bins_with_cap(&game, caps.opt_cap)?;
    let mut report = json!({
        "n": game.n(),
        "m": game.m(),
        "model": game.cost_model(),
        "opt": opt.opt,
        "witness": profile_json(&opt.witness),
    });
    if args.nash {
        let nash = enumerate_nash(&game, caps.ne_cap)?;
        let best = nash.iter().map(Profile::social_cost).min().unwrap_or(0);
        let worst = nash.iter().map(Profile::social_cost).max().unwrap_or(0);
        let ratio = |f: usize| Rational::from(f) / Rational::from(opt.opt);
        report["nash"] = nash.iter().map(profile_json).collect();
        report["ne_count"] = nash.len().into();
        report["best_ne"] = best.into();
        report["worst_ne"] = worst.into();
        report["pos"] = serde_json::to_value(ratio(best))?;
        report["poa"] = serde_json::to_value(ratio(worst))?;
    }
    emit_json(&report, args.out.as_deref())
}

fn generate(args: GenerateArgs) -> Result<()> {
    let p = &args.params;
    if args.family == "random" {
        let n = p.n.unwrap_or(6) as usize;
        let m = p.m.unwrap_or(2);
        let sizes = experiment::parse_sizes(&args.sizes)?;
        let game = random_instance(n, m, sizes, args.model.into(), args.seed)?;
        return emit_json(&game, args.out.as_deref());
    }
    let knobs = FamilyKnobs {
        k: p.k,
        h: p.h,
        m: p.m,
        n: p.n,
        odd: p.odd,
    };
    let case = experiment::family_from(&args.family, knobs)?.generate()?;
    emit_json(&case, args.out.as_deref())
}

fn ratios(args: RatiosArgs, caps: &CapArgs) -> Result<()> {
    let plan = match &args.plan {
        Some(path) => ExperimentPlan::load(path)?,
        None => {
            let mut sources = Vec::new();
            if !args.instances.is_empty() {
                sources.push(Source::Files {
                    paths: args.instances.clone(),
                });
            }
            if let Some(family) = &args.family {
                if args.ks.is_empty() && family != "cyclic-bw" {
                    bail!(colorbin_core::Error::Parse("--family needs --ks".into()));
                }
                sources.push(Source::Family {
                    family: family.clone(),
                    ks: if args.ks.is_empty() { vec![0] } else { args.ks.clone() },
                    knobs: FamilyKnobs {
                        h: args.h,
                        m: args.m,
                        odd: args.odd,
                        ..Default::default()
                    },
                });
            }
            if let Some(count) = args.random {
                sources.push(Source::Random {
                    count,
                    items: args.items,
                    colors: args.colors,
                    sizes: args.sizes.clone(),
                    model: args.model.into(),
                    seed: args.seed,
                });
            }
            if sources.is_empty() {
                bail!(colorbin_core::Error::Parse(
                    "nothing to measure: give instance files, --family, --random or --plan".into()
                ));
            }
            ExperimentPlan { sources }
        }
    };
    let rows = experiment::ratio_rows(&plan.subjects()?, caps)?;
    emit_text(&experiment::render_csv(&rows), args.out.as_deref())
}

/// Families whose `sigma_star` is claimed to be optimal, not merely feasible.
const OPTIMAL_STAR_FAMILIES: [&str; 5] = [
    "cyclic-bw",
    "pos-uniform-even",
    "poa-uniform-odd-bw",
    "poa-uniform-multicolor",
    "pos-multicolor-proportional",
];

fn push(checks: &mut Vec<CaseCheck>, name: String, passed: bool, detail: String) {
    checks.push(CaseCheck { name, passed, detail });
}

fn verify(args: VerifyArgs, caps: &CapArgs) -> Result<()> {
    let case = load_case(&args.case)?;
    let g = &case.instance;
    let mut checks = verify_case(&case);
    let opt = (g.n() <= caps.opt_cap)
        .then(|| optimal_bins_with_cap(g, caps.opt_cap))
        .transpose()?
        .map(|r| r.opt);
    let nash = (g.n() <= caps.ne_cap.min(packing::MAX_ITEMS))
        .then(|| enumerate_nash(g, caps.ne_cap))
        .transpose()?;

    if let (Some(opt), Some(star)) = (opt, case.witness("sigma_star")) {
        if OPTIMAL_STAR_FAMILIES.contains(&case.family.as_str()) {
            push(
                &mut checks,
                "sigma_star is optimal".into(),
                star.social_cost() == opt,
                format!("F = {}, OPT = {opt}", star.social_cost()),
            );
        }
    }
    if let (Some(opt), 2) = (opt, g.m()) {
        for (name, w) in &case.witnesses {
            if w.is_feasible(g) {
                push(
                    &mut checks,
                    format!("{name} keeps black singletons within OPT"),
                    singleton_excess_check_with_opt(g, w, opt)?,
                    format!("OPT = {opt}"),
                );
            }
        }
        if let Some(nash) = &nash {
            let worst = nash.iter().map(Profile::social_cost).max().unwrap_or(0);
            push(
                &mut checks,
                "every equilibrium within three times OPT".into(),
                worst <= 3 * opt,
                format!("worst F = {worst}, OPT = {opt}"),
            );
        }
    }
    if case.family == "pos-uniform-even" {
        if let (Some(nash), Some(sigma)) = (&nash, case.witness("sigma")) {
            let f = sigma.social_cost();
            let off: Vec<usize> = nash.iter().map(Profile::social_cost).filter(|&c| c != f).collect();
            push(
                &mut checks,
                "all equilibria use F_sigma bins".into(),
                off.is_empty(),
                format!("{} equilibria, F_sigma = {f}, others {off:?}", nash.len()),
            );
        }
    }

    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    let report = json!({
        "family": case.family,
        "params": case.params,
        "passed": failed.is_empty(),
        "checks": checks,
    });
    emit_json(&report, args.out.as_deref())?;
    if !failed.is_empty() {
        bail!(CheckFailed(failed.join("; ")));
    }
    Ok(())
}
