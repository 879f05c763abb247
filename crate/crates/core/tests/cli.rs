use std::fs;
use std::path::Path;

use devils_menu::cli::{dispatch, EXIT_CLAIM_FAILED, EXIT_OK, EXIT_USAGE};

const THREE: &str = r#"
V = 100
epsilon = 1
delta = "106/3"
q = 1
menu = "weak4"
seed = 11

[[districts]]
real = 2
decoy = 2

[[districts]]
real = 2
decoy = 2

[[districts]]
real = 2
decoy = 2
"#;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("devils-menu").chain(args.iter().copied());
    let code = dispatch(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn without_timing(report: &str) -> String {
    report.lines().filter(|l| !l.starts_with("wall time")).collect::<Vec<_>>().join("\n")
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let (code, _, err) = run(&["bogus"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("Usage"), "{err}");
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, EXIT_OK);
    for sub in ["run", "enumerate", "verify", "sequential", "commitment", "lemons", "sweep"] {
        assert!(out.contains(sub), "{sub} missing from help");
    }
}

#[test]
fn verify_small_family_passes() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("thm1.csv");
    let (code, out, err) = run(&["verify", "--claim", "thm1", "--family", "small", "--out", csv.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("thm1: 50/50 instances pass"), "{out}");
    let table = fs::read_to_string(csv).unwrap();
    assert!(table.starts_with("claim,districts,q,delta,delta_decimal,passed,detail"));
    assert_eq!(table.lines().count(), 51);
    assert!(!table.contains(",false,"));
}

#[test]
fn every_claim_passes_on_small_family() {
    for claim in ["thm2", "prop2", "cor1", "prop1"] {
        let (code, out, err) = run(&["verify", "--claim", claim, "--family", "small"]);
        assert_eq!(code, EXIT_OK, "{claim}: {out}{err}");
    }
}

#[test]
fn failing_claim_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // delta far below the minimal value leaves extra equilibria
    let low = write(dir.path(), "low.toml", &THREE.replace("\"106/3\"", "3"));
    let (code, out, _) = run(&["verify", "--claim", "thm1", "--scenario", &low]);
    assert_eq!(code, EXIT_CLAIM_FAILED, "{out}");
    assert!(out.contains("FAIL"));
}

#[test]
fn verify_rejects_menu_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "s.toml", THREE);
    let (code, _, err) = run(&["verify", "--claim", "thm2", "--scenario", &path]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("strong") || err.contains("weak4"), "{err}");
}

#[test]
fn unknown_key_names_the_key_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "s.toml", &THREE.replace("q = 1", "q = 1\ngamma = 2"));
    let (code, _, err) = run(&["run", "--scenario", &path]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("gamma") && err.contains("line 6"), "{err}");
}

#[test]
fn delta_at_two_epsilon_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = THREE
        .replace("delta = \"106/3\"", "delta = \"2/1\"")
        .replace("epsilon = 1", "epsilon = \"1/1\"");
    let path = write(dir.path(), "s.toml", &text);
    let (code, _, err) = run(&["enumerate", "--scenario", &path]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("2*epsilon < delta"), "{err}");
}

#[test]
fn every_violation_is_listed() {
    let dir = tempfile::tempdir().unwrap();
    let text = THREE
        .replace("q = 1", "q = 5")
        .replace("delta = \"106/3\"", "delta = 1")
        .replace("real = 2\ndecoy = 2\n\n[[districts]]\nreal = 2", "real = 0\ndecoy = 2\n\n[[districts]]\nreal = 2");
    let path = write(dir.path(), "s.toml", &text);
    let (code, _, err) = run(&["run", "--scenario", &path]);
    assert_eq!(code, EXIT_USAGE);
    assert_eq!(err.matches("\n  - ").count(), 3, "{err}");
}

#[test]
fn run_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "s.toml", THREE);
    let a_csv = dir.path().join("a.csv");
    let b_csv = dir.path().join("b.csv");
    let (c1, a, _) = run(&["run", "--scenario", &path, "--mc", "2000", "--out", a_csv.to_str().unwrap()]);
    let (c2, b, _) = run(&["run", "--scenario", &path, "--mc", "2000", "--workers", "3", "--out", b_csv.to_str().unwrap()]);
    assert_eq!((c1, c2), (EXIT_OK, EXIT_OK));
    assert_eq!(without_timing(&a), without_timing(&b));
    assert_eq!(fs::read(a_csv).unwrap(), fs::read(b_csv).unwrap());
    assert!(a.contains("seed: 11"));
}

#[test]
fn seed_flag_overrides_file_seed() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "s.toml", THREE);
    let (_, out, _) = run(&["run", "--scenario", &path, "--seed", "5"]);
    assert!(out.contains("seed: 5") && out.contains("seed = 5"), "{out}");
}

#[test]
fn monte_carlo_csv_has_exact_and_decimal_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "s.toml", THREE);
    let csv = dir.path().join("mc.csv");
    let (code, _, _) = run(&["run", "--scenario", &path, "--profile", "sigma-star", "--mc", "10000", "--out", csv.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let mut rdr = csv::Reader::from_path(csv).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    let total: u64 = rows.iter().map(|r| r[1].parse::<u64>().unwrap()).sum();
    assert_eq!(total, 10_000);
    for r in &rows {
        assert_eq!(&r[5], "1/3");
        assert_eq!(&r[6], "0.333333");
    }
}

#[test]
fn profile_file_is_used_and_checked() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "s.toml", THREE);
    let profile = write(
        dir.path(),
        "p.toml",
        "[[districts]]\nreal_s1 = 2\ndecoy_s1 = 1\ndecoy_s2 = 1\n\n[[districts]]\nreal_s1 = 2\ndecoy_s2 = 2\n\n[[districts]]\nreal_s1 = 2\ndecoy_s2 = 2\n",
    );
    let (code, out, err) = run(&["run", "--scenario", &path, "--profile", &profile]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("O = {0}"), "{out}");
    let bad = write(dir.path(), "bad.toml", "[[districts]]\nreal_s1 = 2\n");
    let (code, _, err) = run(&["run", "--scenario", &path, "--profile", &bad]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("districts"), "{err}");
}

#[test]
fn sweep_delta_shows_uniqueness_above_minimum() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "s.toml", THREE);
    let csv = dir.path().join("sweep.csv");
    let (code, _, err) = run(&[
        "sweep", "--scenario", &path, "--param", "delta", "--from", "3", "--to", "40", "--steps", "20", "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let mut rdr = csv::Reader::from_path(csv).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 20);
    let mut above = 0;
    for r in &rows {
        if &r[10] == "true" {
            above += 1;
            assert_eq!(&r[4], "1", "delta {}", &r[1]);
        }
    }
    assert!(above >= 2);
}

#[test]
fn sweep_q() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "s.toml", &THREE.replace("\"106/3\"", "77"));
    let (code, out, err) = run(&["sweep", "--scenario", &path, "--param", "q", "--from", "1", "--to", "2"]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("q=1: 1 equilibria") && out.contains("q=2: 1 equilibria"), "{out}");
}

#[test]
fn sequential_command() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "s.toml", &THREE.replace("q = 1", "q = 2").replace("\"106/3\"", "52"));
    let (code, out, err) = run(&["sequential", "--scenario", &path]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("total expenditure: 624"), "{out}");
    let low = write(dir.path(), "low.toml", &THREE.replace("q = 1", "q = 2").replace("\"106/3\"", "51"));
    assert_eq!(run(&["sequential", "--scenario", &low]).0, EXIT_USAGE);
}

#[test]
fn commitment_command() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "s.toml", &THREE.replace("menu = \"weak4\"", "menu = { simple-commitment = 2 }"));
    let (code, out, err) = run(&["commitment", "--scenario", &path]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("acquired real ballots: 2"), "{out}");
    assert!(out.contains("target profile: unique equilibrium"), "{out}");
}

#[test]
fn lemons_command() {
    let (code, out, _) = run(&["lemons", "--good", "3", "--bad", "5"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("purchased: good"), "{out}");
    let (code, out, _) = run(&["lemons", "--good", "3", "--bad", "5", "--deviators", "1"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("purchased: none"), "{out}");
    assert_eq!(run(&["lemons", "--good", "3"]).0, EXIT_USAGE);
}

#[test]
fn scan_cap_is_enforced() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "s.toml", THREE);
    let (code, _, err) = run(&["enumerate", "--scenario", &path, "--scan-cap", "10"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("cap"), "{err}");
}

#[test]
fn enumerate_unfiltered_lists_more_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "s.toml", THREE);
    let (_, on, _) = run(&["enumerate", "--scenario", &path]);
    let (_, off, _) = run(&["enumerate", "--scenario", &path, "--filter-dominated", "off"]);
    assert!(on.contains("among 729 profiles"), "{on}");
    assert!(off.contains("among 46656 profiles"), "{off}");
}
