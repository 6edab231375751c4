//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::time::{Duration, Instant};

use colorbin_core::dynamics::{
    apply_deviation, enumerate_improving_deviations, find_cycle_anywhere, is_nash, run_valid_dynamics, CycleSearch, Policy, DEFAULT_STATE_CAP,
};
use colorbin_core::equilibria::{
    alternating_fill_equilibrium, best_bin_equilibrium, colorful_subset_sum, max_cardinality_colorful_packing,
    order_bin,
};
use colorbin_core::instances::{
    cyclic_bw_game, poa_uniform_multicolor, poa_uniform_odd_bw, pos_bw_egalitarian, pos_bw_proportional,
    pos_uniform_even, random_feasible_profile, random_instance, Family, SizeFamily,
};
use colorbin_core::oracle::{
    brute_force_css, brute_force_mccp, enumerate_nash, singleton_excess_check_with_opt, optimal_bins, NE_CAP,
};
use colorbin_core::{CostModel, GameInstance, Rational};
use common::{compositions, random_capacity_profile, random_pool, uniform_game};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn non_convergence() -> Outcome {
    let start = Instant::now();
    let case = cyclic_bw_game().map_err(err)?;
    let g = &case.instance;
    let any = find_cycle_anywhere(g, true, DEFAULT_STATE_CAP);
    let CycleSearch::Found { cycle, deviations, .. } = any else {
        return Err(format!("no cycle with non-valid moves: {any:?}"));
    };
    for (j, dev) in deviations.iter().enumerate() {
        let from = &cycle[j];
        let to = &cycle[(j + 1) % cycle.len()];
        ensure(enumerate_improving_deviations(g, from).contains(dev), || format!("step {j} is not improving"))?;
        let next = apply_deviation(g, from, dev).map_err(err)?;
        ensure(next.canonical() == to.canonical(), || format!("step {j} does not reach the next profile"))?;
    }
    let valid = find_cycle_anywhere(g, false, DEFAULT_STATE_CAP);
    let CycleSearch::Acyclic { explored } = valid else {
        return Err(format!("valid-only graph not certified acyclic: {valid:?}"));
    };
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "cycle of length {} found; valid-only graph acyclic over {explored} profiles; {elapsed:.2?}",
        cycle.len()
    ))
}

fn potential_monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut steps = 0;
    let runs = 240;
    for i in 0..runs {
        let model = if i % 2 == 0 { CostModel::Egalitarian } else { CostModel::Proportional };
        let n = rng.gen_range(2..=8);
        let m = rng.gen_range(2..=3);
        let family = match (model, i % 3) {
            (CostModel::Egalitarian, 0) => SizeFamily::ZeroHeavy { denom: 6 },
            (_, 1) => SizeFamily::Uniform { kappa: rng.gen_range(2..=5) },
            _ => SizeFamily::Grid { denom: rng.gen_range(2..=8) },
        };
        let g = random_instance(n, m, family, model, rng.gen()).map_err(err)?;
        let start = random_capacity_profile(&g, &mut rng);
        let policy = match i % 3 {
            0 => Policy::FirstListed,
            1 => Policy::Random { seed: rng.gen() },
            _ => Policy::MaxGain,
        };
        let trace = run_valid_dynamics(&g, &start, policy, 100_000).map_err(|e| format!("run {i}: {e}"))?;
        let pots: Vec<_> = trace.potentials().collect();
        ensure(pots.windows(2).all(|w| w[0] < w[1]), || format!("run {i}: potential not increasing"))?;
        let mut prev = &trace.initial;
        for step in &trace.steps {
            ensure(step.deviation.valid, || format!("run {i}: non-valid step taken"))?;
            ensure(!is_nash(&g, prev), || format!("run {i}: moved away from an equilibrium"))?;
            prev = &step.profile;
        }
        ensure(is_nash(&g, &trace.terminal), || format!("run {i}: terminal profile is not NE"))?;
        steps += trace.steps.len();
    }
    Ok(format!("{runs} runs, {steps} valid steps, potential strictly increasing, all terminal profiles NE"))
}

fn subroutine_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pools = 600;
    for i in 0..pools {
        let (pool, denom) = random_pool(&mut rng, 12);
        let mccp = max_cardinality_colorful_packing(&pool);
        let want = brute_force_mccp(&pool).map_err(err)?;
        ensure(mccp.len() == want, || format!("pool {i}: cardinality {} vs {want}", mccp.len()))?;
        ensure(order_bin(&mccp).map_err(err)?.is_some(), || format!("pool {i}: mccp set not orderable"))?;
        let css = colorful_subset_sum(&pool, denom).map_err(err)?;
        let total: Rational = css.iter().map(|it| &it.size).sum();
        let want = brute_force_css(&pool).map_err(err)?;
        ensure(total == want, || format!("pool {i}: size {total} vs {want}"))?;
        ensure(order_bin(&css).map_err(err)?.is_some(), || format!("pool {i}: css set not orderable"))?;
    }
    Ok(format!("{pools} pools: cardinality and total size equal the brute-force maxima"))
}

fn best_bin_is_nash() -> Outcome {
    let mut checked = 0;
    for fam in Family::small_examples() {
        let case = fam.generate().map_err(err)?;
        for model in [CostModel::Egalitarian, CostModel::Proportional] {
            let g = case.instance.with_cost_model(model);
            let p = best_bin_equilibrium(&g).map_err(err)?.profile;
            ensure(is_nash(&g, &p), || format!("{fam} ({model}): output not NE: {p}"))?;
            checked += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..200 {
        let (model, m, family) = if i % 2 == 0 {
            let fam = if i % 4 == 0 {
                SizeFamily::ZeroHeavy { denom: 10 }
            } else {
                SizeFamily::Grid { denom: 10 }
            };
            (CostModel::Egalitarian, rng.gen_range(2..=4), fam)
        } else {
            let fam = if i % 4 == 1 {
                SizeFamily::ZeroHeavy { denom: 8 }
            } else {
                SizeFamily::Grid { denom: 12 }
            };
            (CostModel::Proportional, rng.gen_range(2..=3), fam)
        };
        let g = random_instance(rng.gen_range(1..=14), m, family, model, rng.gen()).map_err(err)?;
        let p = best_bin_equilibrium(&g).map_err(err)?.profile;
        ensure(is_nash(&g, &p), || format!("random {i} ({model}): output not NE"))?;
        checked += 1;
    }
    Ok(format!("{checked} instances (families under both costs + 200 random), every output NE"))
}

fn alternating_fill_guarantees() -> Outcome {
    let mut checked = 0;
    for m in 2..=4usize {
        for n in 1..=16usize {
            for counts in compositions(n, m) {
                for kappa in 2..=(n as u64 + 1).max(2) {
                    let g = uniform_game(m as u32, kappa, &counts);
                    let p = alternating_fill_equilibrium(&g).map_err(err)?.profile;
                    let f = p.social_cost();
                    ensure(is_nash(&g, &p), || format!("{counts:?} kappa {kappa}: not NE"))?;
                    let opt = optimal_bins(&g).map_err(err)?.opt;
                    if kappa % 2 == 1 {
                        ensure(f == opt, || format!("{counts:?} kappa {kappa}: F {f} != OPT {opt}"))?;
                    } else {
                        ensure(f <= 2 * opt, || format!("{counts:?} kappa {kappa}: F {f} > 2 OPT {opt}"))?;
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} uniform instances (n <= 16, m <= 4, every kappa): NE, odd F = OPT, even F <= 2 OPT"))
}

fn bw_poa_and_singleton_excess() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut instances = 0;
    let mut equilibria = 0;
    let mut profiles = 0;
    let mut uniform_even = 0;
    for i in 0..120 {
        let n = rng.gen_range(2..=8);
        let model = if i % 2 == 0 { CostModel::Egalitarian } else { CostModel::Proportional };
        let family = match i % 4 {
            0 | 1 => SizeFamily::Uniform { kappa: rng.gen_range(2..=6) },
            2 => SizeFamily::Grid { denom: rng.gen_range(2..=6) },
            _ => SizeFamily::ZeroHeavy { denom: 4 },
        };
        let g: GameInstance = random_instance(n, 2, family, model, rng.gen()).map_err(err)?;
        let opt = optimal_bins(&g).map_err(err)?.opt;
        let even = g.uniform_meta().is_ok_and(|u| u.kappa % 2 == 0);
        for ne in enumerate_nash(&g, NE_CAP).map_err(err)? {
            let f = ne.social_cost();
            ensure(f <= 3 * opt, || format!("instance {i}: NE with F {f} > 3 OPT {opt}"))?;
            if even {
                ensure(f <= 2 * opt, || format!("instance {i}: even kappa NE with F {f} > 2 OPT {opt}"))?;
            }
            equilibria += 1;
        }
        uniform_even += usize::from(even);
        for s in 0..5 {
            let p = random_feasible_profile(&g, rng.gen::<u64>() ^ s);
            let ok = singleton_excess_check_with_opt(&g, &p, opt).map_err(err)?;
            ensure(ok, || format!("instance {i}: singleton excess above OPT for {p}"))?;
            profiles += 1;
        }
        instances += 1;
    }
    Ok(format!(
        "{instances} instances ({uniform_even} uniform even-kappa), {equilibria} equilibria within bounds, \
         {profiles} feasible profiles satisfy the singleton-excess inequality"
    ))
}

fn pos_three_families() -> Outcome {
    let k = 4;
    for case in [pos_bw_egalitarian(k).map_err(err)?, pos_bw_proportional(k).map_err(err)?] {
        let g = &case.instance;
        let sigma = case.witness("sigma").ok_or("missing sigma")?;
        let star = case.witness("sigma_star").ok_or("missing sigma_star")?;
        ensure(is_nash(g, sigma), || format!("{}: sigma not NE", case.family))?;
        ensure(star.is_feasible(g), || format!("{}: sigma_star infeasible", case.family))?;
        let (f, fs) = (sigma.social_cost(), star.social_cost());
        ensure((f, fs) == (7, 4), || format!("{}: F = {f}, F* = {fs}", case.family))?;
        let ratio = Rational::from(f) / Rational::from(fs);
        let formula = Rational::integer(3) - Rational::new(10, k as i64 + 4);
        ensure(ratio == Rational::new(7, 4) && ratio == formula, || format!("ratio {ratio}"))?;
    }
    Ok("k = 4, both costs: F(sigma) = 7, F(sigma*) = 4, ratio 7/4 = 3 - 10/(k+4)".into())
}

fn odd_kappa_poa() -> Outcome {
    let k = 3;
    let case = poa_uniform_odd_bw(k).map_err(err)?;
    let g = &case.instance;
    let opt = optimal_bins(g).map_err(err)?.opt;
    let sigma = case.witness("sigma").ok_or("missing sigma")?;
    let f = sigma.social_cost();
    ensure(opt == 3, || format!("OPT = {opt}"))?;
    ensure(is_nash(g, sigma), || "sigma not NE".into())?;
    ensure(f == 5, || format!("F = {f}"))?;
    let ratio = Rational::from(f) / Rational::from(opt);
    ensure(ratio == Rational::integer(3) - Rational::new(8, k as i64 + 3), || format!("ratio {ratio}"))?;
    Ok("k = 3: OPT = 3, sigma NE with F = 5, ratio 5/3 = 3 - 8/(k+3)".into())
}

fn uniform_pos_two() -> Outcome {
    let case = pos_uniform_even(2).map_err(err)?;
    let g = &case.instance;
    let nash = enumerate_nash(g, NE_CAP).map_err(err)?;
    let opt = optimal_bins(g).map_err(err)?.opt;
    ensure(!nash.is_empty() && nash.iter().all(|p| p.social_cost() == 2), || "k = 2: an NE without 2 bins".into())?;
    ensure(opt == 2, || format!("k = 2: OPT = {opt}"))?;

    let case = pos_uniform_even(4).map_err(err)?;
    let g = &case.instance;
    let sigma = case.witness("sigma").ok_or("missing sigma")?;
    let opt = optimal_bins(g).map_err(err)?.opt;
    ensure(is_nash(g, sigma), || "k = 4: sigma not NE".into())?;
    ensure(sigma.social_cost() == 4 && opt == 3, || format!("k = 4: F = {}, OPT = {opt}", sigma.social_cost()))?;
    Ok(format!("k = 2: all {} NE use 2 bins, OPT = 2; k = 4: witness F = 4, OPT = 3", nash.len()))
}

fn unbounded_poa() -> Outcome {
    let mut ratios = Vec::new();
    for odd in [false, true] {
        for k in 1..=3u64 {
            let case = poa_uniform_multicolor(k, odd).map_err(err)?;
            let g = &case.instance;
            let opt = optimal_bins(g).map_err(err)?.opt;
            let sigma = case.witness("sigma").ok_or("missing sigma")?;
            let f = sigma.social_cost();
            ensure(opt == 1, || format!("k = {k}, odd = {odd}: OPT = {opt}"))?;
            ensure(f == 2 * k as usize, || format!("k = {k}, odd = {odd}: F = {f}"))?;
            ensure(is_nash(g, sigma), || format!("k = {k}, odd = {odd}: witness not NE"))?;
            ratios.push(f / opt);
        }
    }
    ensure(ratios[1] > 3 && ratios[4] > 3, || "ratio not above 3 at k = 2".into())?;
    Ok(format!("k = 1..3, both parities: OPT = 1, witness NE with F = 2k; ratios {ratios:?}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("non-convergence of unrestricted dynamics", non_convergence),
        ("potential monotonicity of valid dynamics", potential_monotonicity),
        ("subset solvers match brute force", subroutine_correctness),
        ("best-bin construction yields NE", best_bin_is_nash),
        ("alternating fill: NE, OPT for odd kappa, 2 OPT for even", alternating_fill_guarantees),
        ("two-colour PoA at most 3 and singleton-excess bound", bw_poa_and_singleton_excess),
        ("two-colour PoS families at k = 4", pos_three_families),
        ("odd-kappa PoA family at k = 3", odd_kappa_poa),
        ("uniform PoS family at k = 2 and k = 4", uniform_pos_two),
        ("unbounded PoA family at k = 1..3", unbounded_poa),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        match result {
            Ok(detail) => println!("PASS criterion {:>2}: {name}: {detail} [{elapsed:.2?}]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2}: {name}: {detail} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
