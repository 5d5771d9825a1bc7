use std::process::{Command, Output};

use qsdiff_cli::{CheckStatus, Report};

fn qsdiff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsdiff"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_report(args: &[&str]) -> (i32, Report) {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = qsdiff(&all);
    let report = Report::from_json(&String::from_utf8(out.stdout).unwrap()).expect("valid JSON report");
    (out.status.code().unwrap(), report)
}

const SMALL: [&str; 8] = ["--xdeg", "4", "--horizon", "6", "--wdeg", "3", "--nildeg", "3"];

#[test]
fn bad_configurations_exit_with_2() {
    for args in [
        vec!["--xdeg", "1", "--suite", "lemmas"],
        vec!["--horizon", "3", "--suite", "lemmas"],
        vec!["--nildeg", "1", "--suite", "lemmas"],
        vec!["--qmode", "numeric", "--q-num", "1", "--suite", "lemmas"],
        vec!["--qmode", "numeric", "--q-num", "-1", "--suite", "lemmas"],
    ] {
        let out = qsdiff(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn lemmas_suite_covers_alpha_pascal_range() {
    let mut args = SMALL.to_vec();
    args.extend(["--suite", "lemmas"]);
    let (code, report) = json_report(&args);
    assert_eq!(code, 0);
    assert_eq!(report.summary.failed, 0);
    let alpha: Vec<_> = report
        .checks
        .iter()
        .filter(|c| c.name.starts_with("lemma.alpha_pascal.l="))
        .collect();
    assert_eq!(alpha.len(), 10);
    assert!(alpha.iter().all(|c| c.status == CheckStatus::Pass));
    let crit = report
        .checks
        .iter()
        .filter(|c| c.name.starts_with("lemma.commutator_criterion."))
        .count();
    assert!(crit >= 10);
}

#[test]
fn numeric_qmode_runs_lemmas() {
    let mut args = SMALL.to_vec();
    args.extend(["--qmode", "numeric", "--q-num", "3/2", "--s-num", "2/5", "--lam-num", "-3", "verify", "--suite", "lemmas"]);
    let (code, report) = json_report(&args);
    assert_eq!(code, 0);
    assert!(report.checks.iter().any(|c| c.name == "lemma.q_binom_pascal"));
}

#[test]
fn hopf_morphism_on_rational_functions() {
    let mut args = SMALL.to_vec();
    args.extend(["--example", "c_t", "--suite", "hopf-morphism"]);
    let (code, report) = json_report(&args);
    assert_eq!(code, 0);
    assert!(report
        .checks
        .iter()
        .any(|c| c.name == "hopf_morphism.c_t.iota_t_is_tq_plus_x" && c.status == CheckStatus::Pass));
    assert!(report.checks.iter().all(|c| !c.name.contains("c_t_talpha")));
}

#[test]
fn json_round_trips_and_is_deterministic() {
    let mut args = SMALL.to_vec();
    args.extend(["--seed", "5", "--suite", "hopf-algebra"]);
    let (_, a) = json_report(&args);
    let (_, b) = json_report(&args);
    let strip = |r: &Report| {
        let mut r = r.clone();
        r.checks.iter_mut().for_each(|c| c.elapsed_ms = 0);
        r
    };
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(Report::from_json(&a.to_json()).unwrap(), a);
}

#[test]
fn text_output_has_summary_line() {
    let mut args = SMALL.to_vec();
    args.extend(["--suite", "hopf-algebra"]);
    let out = qsdiff(&args);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("PASS ")));
    assert!(text.lines().last().unwrap().contains("0 failed"));
}

#[test]
fn classify_rational_functions_over_commutative_algebra() {
    let mut args = SMALL.to_vec();
    args.extend(["--example", "c_t", "classify", "--algebra", "comm"]);
    let (code, report) = json_report(&args);
    assert_eq!(code, 0);
    let fam = report
        .checks
        .iter()
        .find(|c| c.name == "classify.c_t.A_comm.family")
        .expect("family record");
    let w = fam.witness.as_deref().unwrap();
    assert!(w.contains("f = 0"), "{w}");
}
