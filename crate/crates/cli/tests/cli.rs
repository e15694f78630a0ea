use std::path::Path;
use std::process::{Command, Output};

use geomorph_core::RunReport;

fn geomorph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geomorph"))
        .args(args)
        .env_remove("GEOMORPH_SEED")
        .output()
        .expect("binary runs")
}

fn json_report(args: &[&str]) -> (RunReport, i32) {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = geomorph(&all);
    let text = String::from_utf8(out.stdout).unwrap();
    (RunReport::from_json(&text).unwrap(), out.status.code().unwrap())
}

fn row(r: &RunReport, label: &str) -> usize {
    r.row_labels.iter().position(|l| l == label).unwrap_or_else(|| panic!("no row {label}"))
}

#[test]
fn select_english_third_singular() {
    let (r, code) = json_report(&["select", "english_weak_verb"]);
    assert_eq!(code, 0);
    assert_eq!(r.schema, 1);
    let i = row(&r, "present-3rd-sg");
    // exact count ratios: ∅ (5,2,2,1,2,3), s (1,1,1), ed (6,2,2,2,3,3)
    let want = [8.0 / 47f64.sqrt(), 3.0 / 3f64.sqrt(), 5.0 / 66f64.sqrt()];
    for (got, want) in r.entries[i].iter().zip(want) {
        assert!((got - want).abs() < 0.005, "{got} vs {want}");
    }
    assert_eq!(r.winners[i].as_deref(), Some("s"));
    assert!(r.mismatches.is_empty());
}

#[test]
fn train_german_full_takes_one_iteration() {
    let (r, code) = json_report(&["train", "german_full", "--eta", "0.1", "--error-driven"]);
    assert_eq!(code, 0);
    assert_eq!(r.summary["converged"], true);
    assert_eq!(r.summary["iterations"], 1);
    assert_eq!(r.summary["initial_mismatches"], 1);
}

#[test]
fn not_converged_exits_two() {
    let out = geomorph(&["train", "latin_adjectives", "--max-iters", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn input_errors_exit_one() {
    assert_eq!(geomorph(&["select", "no_such_fixture_or_file"]).status.code(), Some(1));
    assert_eq!(geomorph(&["select", "nuer_classes"]).status.code(), Some(1));
    assert_eq!(geomorph(&["select", "--bogus-flag", "english"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.para");
    std::fs::write(&bad, "FEATURE n: sg pl\nMORPHEMES: a\nCELL du -> a\n").unwrap();
    let out = geomorph(&["select", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn ties_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tie.para");
    // a and b get identical count vectors, so every cell ties
    std::fs::write(&path, "FEATURE n: sg pl\nFEATURE c: x y\nMORPHEMES: a b\nCELL sg x -> a\nCELL pl y -> a\nCELL sg y -> b\nCELL pl x -> b\n").unwrap();
    assert_eq!(geomorph(&["select", path.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn json_is_byte_identical_across_runs() {
    for args in [
        vec!["rotate", "nuer", "--runs", "5", "--seed", "7", "--format", "json"],
        vec!["compose", "german_plurals", "--seed", "11", "--format", "json"],
        vec!["train", "latin_adjectives", "--format", "json"],
    ] {
        let a = geomorph(&args);
        let b = geomorph(&args);
        assert!(!a.stdout.is_empty());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn seed_falls_back_to_environment() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_geomorph"));
        cmd.args(["compose", "german_plurals", "--format", "json"]).env_remove("GEOMORPH_SEED");
        if let Some(s) = env {
            cmd.env("GEOMORPH_SEED", s);
        }
        if let Some(s) = flag {
            cmd.args(["--seed", s]);
        }
        cmd.output().unwrap().stdout
    };
    assert_eq!(run(Some("5"), None), run(None, Some("5")));
    assert_eq!(run(Some("9"), Some("5")), run(None, Some("5")));
}

#[test]
fn rotate_nuer_batch_rows() {
    let (r, _) = json_report(&["rotate", "nuer", "--runs", "10", "--seed", "7"]);
    assert_eq!(r.row_labels.len(), 16);
    assert_eq!(r.row_labels[0], "I");
    assert_eq!(r.row_labels[15], "XVI");
    assert_eq!(r.summary["base_class"], "III");
    let distance = r.col_labels.iter().position(|c| c == "distance").unwrap();
    assert_eq!(r.entries[row(&r, "III")][distance], 0.0);
}

#[test]
fn rotate_single_class_reports_a_plan() {
    let (r, code) = json_report(&["rotate", "nuer", "--class", "II", "--seed", "1"]);
    assert_eq!(code, 0);
    assert_eq!(r.col_labels, ["i", "j", "theta"]);
    assert!(!r.entries.is_empty());
    assert_eq!(r.summary["converged"], true);
}

#[test]
fn deponent_rotation_selects_passive_forms() {
    let (r, code) = json_report(&["rotate", "latin_deponent", "--deponent", "active", "passive"]);
    assert_eq!(code, 0);
    let want = ["or", "āris", "ātur", "āmur", "āmini", "antur"];
    for (cell, w) in ["sg-1st-active", "sg-2nd-active", "sg-3rd-active", "pl-1st-active", "pl-2nd-active", "pl-3rd-active"]
        .iter()
        .zip(want)
    {
        assert_eq!(r.winners[row(&r, cell)].as_deref(), Some(w));
    }
}

#[test]
fn compose_fixed_spanish() {
    let (r, code) = json_report(&["compose", "spanish_present"]);
    assert_eq!(code, 0);
    assert!(r.mismatches.is_empty());
    assert_eq!(r.winners[row(&r, "cant+2nd")].as_deref(), Some("as"));
    assert_eq!(r.winners[row(&r, "com+2nd")].as_deref(), Some("es"));
}

#[test]
fn report_round_trip_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("select.json");
    let tsv = dir.path().join("select.tsv");
    let direct = dir.path().join("direct.tsv");
    let p = |x: &Path| x.to_str().unwrap().to_string();
    assert!(geomorph(&["select", "german_present", "--format", "json", "--out", &p(&json)]).status.success());
    assert!(geomorph(&["select", "german_present", "--out", &p(&direct)]).status.success());
    assert!(geomorph(&["report", &p(&json), "--out", &p(&tsv)]).status.success());
    let a = std::fs::read_to_string(&tsv).unwrap();
    assert_eq!(a, std::fs::read_to_string(&direct).unwrap());
    assert!(a.starts_with("competition\t"));
}

#[test]
fn trace_file_has_one_line_per_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.jsonl");
    let out = geomorph(&["train", "german_full", "--trace", trace.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(trace).unwrap();
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn fixtures_are_listed() {
    let out = geomorph(&["fixtures"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 10);
    assert!(text.contains("nuer_classes"));
}
