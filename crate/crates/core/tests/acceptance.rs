//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

use normrev::dsl::{
    parse_formula, parse_model, parse_norms, parse_path_file, parse_runlog, parse_scenario, render_formula,
    render_model, render_norms, render_path_file, render_runlog, render_scenario, PathFile,
};
use normrev::norms::{violates_set, Semantics};
use normrev::revision::{
    compare_sanctions, oracle_compare, syntactic_classify, viol_contains, Case, RevisionDirection, SanctionChange,
    SyntacticDirection,
};
use normrev::supervision::{replay_matches, run_episode, supervise, Enforcement};
use normrev::{classify_revision, Formula, NormSet, Path, Relation, RevisionVerdict, TransitionSystem};
use rand::Rng;

const INSTANCES: u64 = 200;
const LASSOS: u64 = 1000;
const ROUND_TRIPS: u64 = 500;

fn replays(model: &TransitionSystem, v: &RevisionVerdict, original: &NormSet, revised: &NormSet) -> bool {
    let sem = Semantics::default();
    let check = |p: &Option<Path>, bad: &NormSet, good: &NormSet| match p {
        None => true,
        Some(p) => violates_set(model, bad, p, sem).unwrap() && !violates_set(model, good, p, sem).unwrap(),
    };
    v.is_consistent()
        && check(&v.witness_in_original_not_revised, original, revised)
        && check(&v.witness_in_revised_not_original, revised, original)
}

/// Sampled lassos violating `revised` but not `original`.
fn counterexamples(model: &TransitionSystem, original: &NormSet, revised: &NormSet, salt: u64) -> usize {
    let sem = Semantics::default();
    (0..LASSOS)
        .filter(|&i| {
            let p = model.sample_lasso((i % 6) as usize, salt.wrapping_mul(7919).wrapping_add(i)).unwrap();
            violates_set(model, revised, &p, sem).unwrap() && !violates_set(model, original, &p, sem).unwrap()
        })
        .count()
}

fn golden_relation(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
    v["result"]["relation"].as_str().unwrap().to_string()
}

fn road_reproduction() {
    let m = common::model("road/model.ts.json");
    let n = common::norms("road/n1.norm");
    for (r, case) in [("r1", Case::CondCase), ("r2", Case::TargetCase), ("r3", Case::DeadlineCase)] {
        let revised = common::norms(&format!("road/{r}.norm"));
        let v = classify_revision(&m, &n, &revised).unwrap();
        assert_eq!(v.relation, Relation::Relaxation, "{r}");
        assert_eq!(golden_relation(&format!("classify_road_{r}.json")), "Relaxation", "{r}");
        let s = syntactic_classify(&n.norms()[0], &revised.norms()[0], Some(&m));
        assert_eq!(s.direction, SyntacticDirection::RelaxationOrEquivalent, "{r}");
        assert_eq!(s.fired_cases, vec![case], "{r}");
    }
    assert_eq!(compare_sanctions(&n, &common::norms("road/s1.norm")), SanctionChange::Decreased);
}

fn noise_reproduction() {
    let m = common::model("noise/model.ts.json");
    let n = common::norms("noise/n2.norm");
    for r in ["r5", "r6"] {
        let v = classify_revision(&m, &n, &common::norms(&format!("noise/{r}.norm"))).unwrap();
        assert_eq!(v.relation, Relation::Strengthening, "{r}");
    }
    assert_eq!(compare_sanctions(&n, &common::norms("noise/s2.norm")), SanctionChange::Increased);
}

fn narrow_reproduction() {
    let m = common::model("narrow/model.ts.json");
    let n = common::norms("narrow/n3.norm");
    for r in ["r8", "r9"] {
        let revised = common::norms(&format!("narrow/{r}.norm"));
        let v = classify_revision(&m, &n, &revised).unwrap();
        assert_eq!(v.relation, Relation::Incomparable, "{r}");
        assert!(v.witness_in_original_not_revised.is_some() && v.witness_in_revised_not_original.is_some(), "{r}");
        assert!(replays(&m, &v, &n, &revised), "{r}");
    }
}

fn oracle_equivalence() {
    let start = Instant::now();
    for seed in 0..INSTANCES {
        let inst = common::instance(seed);
        let exact = classify_revision(&inst.model, &inst.original, &inst.revised).unwrap();
        let brute = oracle_compare(&inst.model, &inst.original, &inst.revised, None).unwrap();
        assert_eq!(exact.relation, brute.relation, "seed {seed}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}");
}

fn syntactic_soundness() {
    let mut pairs = Vec::new();
    for seed in 0..INSTANCES {
        let inst = common::instance(seed);
        for n in inst.original.norms() {
            if let Some(r) = inst.revised.get(&n.id) {
                pairs.push((inst.model.clone(), n.clone(), r.clone()));
            }
        }
        pairs.push(common::edit_pair(10_000 + seed));
    }
    let (mut checked, mut flagged) = (0, 0);
    for (model, n1, n2) in pairs {
        let v = syntactic_classify(&n1, &n2, Some(&model));
        if v.direction != SyntacticDirection::RelaxationOrEquivalent {
            continue;
        }
        if v.deviation {
            flagged += 1;
            continue;
        }
        checked += 1;
        let (ok, _) =
            viol_contains(&model, &NormSet::single("n1", n1.clone()), &NormSet::single("n2", n2.clone())).unwrap();
        assert!(ok, "{n1:?} -> {n2:?}");
    }
    println!("    {checked} relaxation verdicts checked, {flagged} deviation-flagged exempt");
}

fn monitor_consistency() {
    let mut relaxations = Vec::new();
    let m = common::model("road/model.ts.json");
    let n = common::norms("road/n1.norm");
    for r in ["r1", "r2", "r3"] {
        relaxations.push((m.clone(), n.clone(), common::norms(&format!("road/{r}.norm")), 1));
    }
    for seed in 0..INSTANCES {
        let inst = common::instance(seed);
        if classify_revision(&inst.model, &inst.original, &inst.revised).unwrap().relation == Relation::Relaxation {
            relaxations.push((inst.model, inst.original, inst.revised, seed));
        }
    }
    for (model, original, revised, salt) in &relaxations {
        assert_eq!(counterexamples(model, original, revised, *salt), 0, "{} -> {}", original.id, revised.id);
    }
    println!("    {} relaxations, {} lassos each", relaxations.len(), LASSOS);
}

fn determinism_and_replay() {
    for name in ["road", "noise", "narrow"] {
        let s = common::scenario(&format!("{name}/{name}.scenario.json"));
        let a = render_runlog(&supervise(&s).log);
        assert_eq!(a, render_runlog(&supervise(&s).log), "{name}");
        assert!(replay_matches(&parse_runlog(&a).unwrap(), Semantics::default()).unwrap(), "{name}");
    }
    let narrow = common::scenario("narrow/narrow.scenario.json");
    let log = supervise(&narrow).log;
    assert!(log.deadlocks() > 0 || log.violations() == 0);
    for seed in 0..INSTANCES {
        let mut s = common::random_scenario(seed);
        s.enforcement = Enforcement::Regimentation;
        let log = run_episode(&s, &s.norms);
        assert!(replay_matches(&log, Semantics::default()).unwrap(), "seed {seed}");
        assert!(log.deadlocks() > 0 || log.violations() == 0, "seed {seed}");
    }
}

fn supervision_direction() {
    let road = supervise(&common::scenario("road/road.scenario.json"));
    assert!(road.revisions.iter().any(|r| r.direction == RevisionDirection::Relax));
    let w = &road.log.summary.as_ref().unwrap().window_scores;
    assert!(w.last().unwrap().score >= w[0].score);

    let noise = supervise(&common::scenario("noise/noise.scenario.json"));
    assert!(noise.revisions.iter().any(|r| r.direction == RevisionDirection::Strengthen
        || r.verdict.as_ref().map(|v| v.sanction_change) == Some(SanctionChange::Increased)));
    let w = &noise.log.summary.as_ref().unwrap().window_scores;
    assert!(w.last().unwrap().score >= w[0].score);
}

fn round_trips() {
    for seed in 0..ROUND_TRIPS {
        let mut r = common::rng(seed);
        let f = common::formula(&mut r, &["a", "b", "move_{a}", "speed_50"], 4);
        assert_eq!(parse_formula(&render_formula(&f)).unwrap(), f, "formula {seed}");

        let m = common::random_model(&mut r);
        assert_eq!(parse_model(&render_model(&m)).unwrap(), m, "model {seed}");

        let atoms = common::model_atoms(&m);
        let set = common::random_set(&mut r, "S", &atoms);
        assert_eq!(parse_norms(&render_norms(&set)).unwrap(), set, "norms {seed}");

        let p = if r.random_bool(0.5) {
            PathFile::Run(m.sample_lasso(r.random_range(0..4), seed).unwrap())
        } else {
            PathFile::Trace(m.path_labels(&m.sample_path(r.random_range(1..8), seed).unwrap(), 0).unwrap())
        };
        assert_eq!(parse_path_file(&render_path_file(&p)).unwrap(), p, "path {seed}");

        let s = common::random_scenario(seed);
        assert_eq!(parse_scenario(&render_scenario(&s)).unwrap(), s, "scenario {seed}");
        let log = run_episode(&s, &s.norms);
        assert_eq!(parse_runlog(&render_runlog(&log)).unwrap(), log, "runlog {seed}");
    }
    let a = |x: &str| Formula::atom(x);
    for (text, expected) in [
        ("a | b & c", Formula::or(a("a"), Formula::and(a("b"), a("c")))),
        ("a & b | c", Formula::or(Formula::and(a("a"), a("b")), a("c"))),
        ("!a & b", Formula::and(Formula::not(a("a")), a("b"))),
        ("!(a & b)", Formula::not(Formula::and(a("a"), a("b")))),
        ("a & b & c", Formula::and(Formula::and(a("a"), a("b")), a("c"))),
        ("a | b | c", Formula::or(Formula::or(a("a"), a("b")), a("c"))),
    ] {
        assert_eq!(parse_formula(text).unwrap(), expected, "{text}");
    }
}

fn main() {
    let criteria: [(&str, fn()); 9] = [
        ("road revisions reproduce", road_reproduction),
        ("noise revisions reproduce", noise_reproduction),
        ("narrow revisions reproduce", narrow_reproduction),
        ("classifier agrees with oracle", oracle_equivalence),
        ("syntactic rules are sound", syntactic_soundness),
        ("relaxations are monotone on sampled lassos", monitor_consistency),
        ("runs are deterministic and replayable", determinism_and_replay),
        ("supervision moves in the expected direction", supervision_direction),
        ("parsers round-trip", round_trips),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let ok = catch_unwind(AssertUnwindSafe(check)).is_ok();
        failed += usize::from(!ok);
        println!(
            "criterion {}: {} {name} ({:.2}s)",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
