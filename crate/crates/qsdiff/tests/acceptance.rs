//! Acceptance criteria 1–10 at the default truncation (D=8, H=12, N_W=4,
//! nildeg 4, seed 0). Every identity is exact, so the numeric tolerance is 0;
//! the only tolerances are the wall-clock budgets below.
//!
//! Runs without the libtest harness so the per-criterion lines always print:
//! `cargo test -p qsdiff --test acceptance`.

use std::time::{Duration, Instant};

use qsdiff::suites::{tasks, Suite, SuiteConfig, Task};
use qsdiff::{Check, Status};

/// Criterion-specific condition beyond "no check failed"; returns the reason on failure.
type Extra = fn(&[Check]) -> Option<String>;

struct Criterion {
    id: u32,
    title: &'static str,
    budget_s: u64,
    select: fn(&Task) -> bool,
    extra: Option<Extra>,
}

fn named(t: &Task, suite: Suite, prefixes: &[&str]) -> bool {
    t.suite == suite && prefixes.iter().any(|p| t.name.starts_with(p))
}

fn criteria() -> Vec<Criterion> {
    vec![
        Criterion {
            id: 1,
            title: "q-binomial Pascal oracle (m, n ≤ 12) and α-Pascal (l ≤ 10)",
            budget_s: 10,
            select: |t| named(t, Suite::Lemmas, &["q_binom_pascal", "alpha_pascal"]),
            extra: Some(|cs| {
                let n = cs.iter().filter(|c| c.name.starts_with("lemma.alpha_pascal.")).count();
                (n != 10).then(|| format!("{n} α-Pascal instances, expected 10"))
            }),
        },
        Criterion {
            id: 2,
            title: "operator axioms on the fields and on twisted series",
            budget_s: 60,
            select: |t| t.suite == Suite::Axioms,
            extra: None,
        },
        Criterion {
            id: 3,
            title: "universal Hopf morphism: multiplicativity, intertwining, structure",
            budget_s: 120,
            select: |t| named(t, Suite::HopfMorphism, &["iota.", "structure."]),
            extra: None,
        },
        Criterion {
            id: 4,
            title: "quantum plane relation and hull closure identities",
            budget_s: 120,
            select: |t| named(t, Suite::HopfMorphism, &["hull."]),
            extra: Some(|cs| {
                (!cs.iter().any(|c| c.name.ends_with("qx_relation"))).then(|| "no QX = qXQ check".to_string())
            }),
        },
        Criterion {
            id: 5,
            title: "Hopf algebra axioms and antipode anti-morphism",
            budget_s: 30,
            select: |t| t.suite == Suite::HopfAlgebra,
            extra: None,
        },
        Criterion {
            id: 6,
            title: "deformation classification for C(t) over A_comm and A_q, exhaustive search",
            budget_s: 300,
            select: |t| named(t, Suite::Deformations, &["classify.c_t.", "exhaustive.", "examples.c_t"]),
            extra: Some(|cs| {
                let forced = cs
                    .iter()
                    .filter(|c| c.name.starts_with("classify.c_t.") && c.name.ends_with("f_forced_zero"))
                    .count();
                (forced != 2).then(|| format!("{forced} f_forced_zero checks, expected 2"))
            }),
        },
        Criterion {
            id: 7,
            title: "commutator criterion on random instances",
            budget_s: 120,
            select: |t| named(t, Suite::Lemmas, &["commutator_criterion."]),
            extra: Some(|cs| {
                let both_false = cs
                    .iter()
                    .filter(|c| c.witness.as_deref().is_some_and(|w| w.matches("=0: false").count() == 2))
                    .count();
                if cs.len() < 10 {
                    Some(format!("{} instances, expected at least 10", cs.len()))
                } else if both_false == 0 {
                    Some("no violating instance".into())
                } else {
                    None
                }
            }),
        },
        Criterion {
            id: 8,
            title: "group laws, quantum group closure, composition oracle",
            budget_s: 180,
            select: |t| {
                named(t, Suite::QuantumGroups, &["g_iii", "g_ii", "qg_iii", "qg_ii"])
                    || named(t, Suite::Deformations, &["compose."])
            },
            extra: Some(|cs| {
                let n = cs.iter().filter(|c| c.name.contains(".composition_oracle.")).count();
                (n < 5).then(|| format!("{n} composition instances, expected at least 5"))
            }),
        },
        Criterion {
            id: 9,
            title: "action of the Hopf algebra",
            budget_s: 60,
            select: |t| named(t, Suite::QuantumGroups, &["action"]),
            extra: None,
        },
        Criterion {
            id: 10,
            title: "projection and kernel structure of the groups",
            budget_s: 60,
            select: |t| named(t, Suite::QuantumGroups, &["exact"]),
            extra: None,
        },
    ]
}

fn main() {
    let cfg = SuiteConfig::default();
    let all = tasks(Suite::All, &cfg);
    let mut failed = Vec::new();
    for cr in criteria() {
        let start = Instant::now();
        let checks: Vec<Check> = all.iter().filter(|t| (cr.select)(t)).flat_map(|t| t.run()).collect();
        let elapsed = start.elapsed();
        let bad = checks.iter().filter(|c| c.status == Status::Fail).count();
        let evidence = checks.iter().filter(|c| c.status == Status::Evidence).count();
        let mut reason = checks
            .iter()
            .find(|c| c.status == Status::Fail)
            .map(|c| format!("{}: {}", c.name, c.witness.clone().unwrap_or_default()));
        if checks.is_empty() {
            reason = Some("no checks selected".into());
        }
        if reason.is_none() {
            reason = cr.extra.and_then(|f| f(&checks));
        }
        if reason.is_none() && elapsed > Duration::from_secs(cr.budget_s) {
            reason = Some(format!("over budget: {:.1}s > {}s", elapsed.as_secs_f64(), cr.budget_s));
        }
        let verdict = if reason.is_none() { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} {verdict}: {} [{} checks, {bad} failed, {evidence} evidence, {:.1}s / {}s]",
            cr.id,
            cr.title,
            checks.len(),
            elapsed.as_secs_f64(),
            cr.budget_s
        );
        if let Some(r) = reason {
            let short: String = r.chars().take(300).collect();
            println!("    {short}");
            failed.push(cr.id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria passed");
    } else {
        println!("acceptance: criteria failed: {failed:?}");
        std::process::exit(1);
    }
}
