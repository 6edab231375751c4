use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn colorbin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_colorbin"));
    for var in ["COLORBIN_OPT_CAP", "COLORBIN_NE_CAP", "COLORBIN_STATE_CAP", "COLORBIN_MAX_STEPS"] {
        cmd.env_remove(var);
    }
    cmd
}

fn run(args: &[&str]) -> Output {
    colorbin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad json ({e}): {}\n{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn write(dir: &TempDir, name: &str, value: &Value) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn instance(sizes: &[&str], colors: &[u32], m: u32) -> Value {
    let items: Vec<Value> = sizes
        .iter()
        .zip(colors)
        .enumerate()
        .map(|(i, (size, color))| json!({ "id": i + 1, "size": size, "color": color }))
        .collect();
    json!({ "m": m, "cost_model": "egalitarian", "items": items })
}

fn generate(dir: &TempDir, family: &str, extra: &[&str]) -> PathBuf {
    let path = dir.path().join(format!("{family}.json"));
    let mut args = vec!["generate", family, "--out", s(&path)];
    args.extend_from_slice(extra);
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn generated_cases_verify() {
    let dir = TempDir::new().unwrap();
    for (family, extra) in [
        ("cyclic-bw", vec![]),
        ("pos-uniform-even", vec!["--k", "4"]),
        ("pos-bw-egalitarian", vec!["--k", "2"]),
        ("pos-bw-proportional", vec!["--k", "2"]),
        ("poa-uniform-odd-bw", vec!["--k", "3"]),
        ("poa-uniform-multicolor", vec!["--k", "2", "--odd"]),
        ("pos-multicolor-egalitarian", vec!["--m", "3", "--h", "2", "--k", "3"]),
        ("pos-multicolor-proportional", vec!["--n", "8"]),
    ] {
        let case = generate(&dir, family, &extra);
        let out = run(&["verify", s(&case)]);
        let report = stdout_json(&out);
        assert_eq!(out.status.code(), Some(0), "{family}: {report:#}");
        assert_eq!(report["passed"], true);
    }
}

#[test]
fn tampered_witness_fails_verification() {
    let dir = TempDir::new().unwrap();
    let path = generate(&dir, "pos-uniform-even", &["--k", "2"]);
    let mut case: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let n = case["instance"]["items"].as_array().unwrap().len();
    let singletons: Vec<Vec<usize>> = (1..=n).map(|i| vec![i]).collect();
    case["witnesses"]["sigma"] = json!({ "bins": singletons });
    let bad = write(&dir, "bad.json", &case);
    let out = run(&["verify", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    let report = stdout_json(&out);
    assert_eq!(report["passed"], false);
    let failed: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"sigma is a Nash equilibrium"), "{failed:?}");
}

#[test]
fn alternating_fill_packs_four_quarter_items_into_one_bin() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "g.json", &instance(&["1/4"; 4], &[1, 1, 2, 3], 3));
    let out = run(&["solve", s(&path), "--alg", "alg2"]);
    assert!(out.status.success());
    let report = stdout_json(&out);
    assert_eq!(report["F"], 1);
    assert_eq!(report["is_nash"], true);
    let colors = report["bins"][0]["colors"].as_array().unwrap();
    assert!(colors.windows(2).all(|w| w[0] != w[1]));

    let out = run(&["solve", s(&path), "--alg", "alg1"]);
    assert_eq!(stdout_json(&out)["F"], 1);
}

#[test]
fn alternating_fill_refuses_mixed_sizes() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "g.json", &instance(&["1/4", "1/3"], &[1, 2], 2));
    let out = run(&["solve", s(&path), "--alg", "alg2"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn malformed_input_is_a_bad_input_exit() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("junk.json");
    std::fs::write(&path, "{not json").unwrap();
    assert_eq!(run(&["solve", s(&path)]).status.code(), Some(4));
    let oversize = write(&dir, "big.json", &instance(&["3/2"], &[1], 1));
    assert_eq!(run(&["oracle", s(&oversize)]).status.code(), Some(4));
    assert_eq!(run(&["solve", "--alg", "alg9", "x"]).status.code(), Some(4));
    assert_eq!(run(&["generate", "no-such-family"]).status.code(), Some(4));
}

#[test]
fn cyclic_game_has_a_nonvalid_cycle_and_valid_runs_converge() {
    let dir = TempDir::new().unwrap();
    let case = generate(&dir, "cyclic-bw", &[]);
    let out = run(&["dynamics", s(&case), "--allow-nonvalid"]);
    assert!(out.status.success());
    let report = stdout_json(&out);
    assert_eq!(report["cycle"], true);
    let deviations = report["cycle_witness"]["deviations"].as_array().unwrap();
    assert!(deviations.len() >= 2);
    assert!(deviations.iter().any(|d| d["valid"] == false));

    for seed in 0..20u64 {
        for policy in ["first", "random", "max-gain"] {
            let seed = seed.to_string();
            let out = run(&["dynamics", s(&case), "--random-start", "--seed", &seed, "--policy", policy]);
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
            assert_eq!(stdout_json(&out)["is_nash"], true);
        }
    }
}

#[test]
fn dynamics_accepts_an_explicit_start() {
    let dir = TempDir::new().unwrap();
    let game = write(&dir, "g.json", &instance(&["1/3"; 3], &[1, 2, 1], 2));
    let start = write(&dir, "p.json", &json!({ "bins": [[1], [2], [3]] }));
    let out = run(&["dynamics", s(&game), "--start", s(&start), "--policy", "max-gain"]);
    let report = stdout_json(&out);
    assert_eq!(report["is_nash"], true);
    // the first-listed tie moves item 1 onto item 2, leaving the two-bin equilibrium (w,b)(b)
    assert_eq!(report["F"], 2);
    assert_eq!(report["terminal"], json!({ "bins": [[2, 1], [3]] }));
}

#[test]
fn ratios_for_the_odd_family() {
    let out = run(&["ratios", "--family", "poa-uniform-odd-bw", "--ks", "3,5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][8], "5/3");
    assert_eq!(rows[1][8], "2");
}

#[test]
fn ratios_of_a_two_item_game() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "pair.json", &instance(&["1/2", "1/2"], &[1, 2], 2));
    let out = run(&["ratios", s(&path)]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("instance_id,n,m,model,opt,best_ne,worst_ne,pos,poa,pos_decimal,poa_decimal,basis")
    );
    assert_eq!(lines.next(), Some("pair,2,2,egalitarian,1,1,1,1,1,1.000000,1.000000,exact"));
}

#[test]
fn ratios_from_a_plan_file() {
    let dir = TempDir::new().unwrap();
    let plan = write(
        &dir,
        "plan.json",
        &json!({ "sources": [
            { "source": "family", "family": "pos-uniform-even", "ks": [2] },
            { "source": "random", "count": 3, "items": 5, "colors": 2, "sizes": "grid:4",
              "model": "proportional", "seed": 11 }
        ]}),
    );
    let out = run(&["ratios", "--plan", s(&plan)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let ids: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ids, ["pos-uniform-even-k2", "random-s11-0", "random-s11-1", "random-s11-2"]);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",exact")));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let case = generate(&dir, "pos-bw-egalitarian", &["--k", "2"]);
    for args in [
        vec!["solve", s(&case)],
        vec!["oracle", s(&case)],
        vec!["verify", s(&case)],
        vec!["dynamics", s(&case), "--policy", "random", "--seed", "7", "--random-start"],
        vec!["ratios", "--random", "6", "--items", "6", "--colors", "3", "--seed", "3"],
        vec!["generate", "random", "--n", "9", "--m", "3", "--sizes", "zero-heavy:5", "--seed", "5"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert!(a.status.success(), "{args:?}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn oracle_reports_equilibria_and_ratios() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "g.json", &instance(&["1/2"; 3], &[1, 2, 1], 2));
    let report = stdout_json(&run(&["oracle", s(&path), "--nash"]));
    assert_eq!(report["opt"], 2);
    assert_eq!(report["pos"], "1");
    assert!(report["ne_count"].as_u64().unwrap() >= 1);
}

#[test]
fn caps_from_the_environment_are_enforced() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "g.json", &instance(&["1/3"; 3], &[1, 2, 1], 2));
    let out = colorbin().args(["oracle", s(&path)]).env("COLORBIN_OPT_CAP", "2").output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = colorbin()
        .args(["oracle", s(&path), "--nash"])
        .env("COLORBIN_NE_CAP", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(run(&["--opt-cap", "2", "oracle", s(&path)]).status.code(), Some(3));
}

#[test]
fn random_generation_round_trips_through_solve() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("r.json");
    let out = run(&[
        "generate", "random", "--n", "10", "--m", "3", "--sizes", "grid:6", "--model", "proportional", "--seed", "42",
        "--out", s(&path),
    ]);
    assert!(out.status.success());
    let report = stdout_json(&run(&["solve", s(&path)]));
    assert_eq!(report["is_nash"], true);
    let placed: usize = report["bins"].as_array().unwrap().iter().map(|b| b["items"].as_array().unwrap().len()).sum();
    assert_eq!(placed, 10);
}
