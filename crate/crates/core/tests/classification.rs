mod common;

use std::time::Instant;

use normrev::norms::{violates_set, Semantics};
use normrev::revision::{
    classify_revision, compare_sanctions, oracle_compare, syntactic_classify, viol_contains, Case, Relation,
    RevisionVerdict, SanctionChange, SyntacticDirection,
};
use normrev::{NormSet, Path, TransitionSystem};

const INSTANCES: u64 = 200;
const LASSOS: u64 = 1000;

fn replay_ok(model: &TransitionSystem, v: &RevisionVerdict, original: &NormSet, revised: &NormSet) -> bool {
    let sem = Semantics::default();
    let check = |p: &Option<Path>, bad: &NormSet, good: &NormSet| match p {
        None => true,
        Some(p) => violates_set(model, bad, p, sem).unwrap() && !violates_set(model, good, p, sem).unwrap(),
    };
    v.is_consistent()
        && check(&v.witness_in_original_not_revised, original, revised)
        && check(&v.witness_in_revised_not_original, revised, original)
}

fn monotone_on_samples(model: &TransitionSystem, original: &NormSet, revised: &NormSet, salt: u64) -> usize {
    let sem = Semantics::default();
    (0..LASSOS)
        .filter(|&i| {
            let p = model.sample_lasso((i % 6) as usize, salt.wrapping_mul(7919).wrapping_add(i)).unwrap();
            violates_set(model, revised, &p, sem).unwrap() && !violates_set(model, original, &p, sem).unwrap()
        })
        .count()
}

#[test]
fn classifier_agrees_with_oracle() {
    let start = Instant::now();
    let mut seen = std::collections::BTreeMap::new();
    for seed in 0..INSTANCES {
        let inst = common::instance(seed);
        let exact = classify_revision(&inst.model, &inst.original, &inst.revised).unwrap();
        let brute = oracle_compare(&inst.model, &inst.original, &inst.revised, None).unwrap();
        assert_eq!(exact.relation, brute.relation, "seed {seed}");
        assert!(replay_ok(&inst.model, &brute, &inst.original, &inst.revised), "oracle witness, seed {seed}");
        *seen.entry(format!("{:?}", exact.relation)).or_insert(0) += 1;
    }
    assert!(start.elapsed().as_secs() < 60);
    // the generator must exercise every relation
    assert_eq!(seen.len(), 4, "{seen:?}");
}

#[test]
fn witnesses_replay() {
    for seed in 0..INSTANCES {
        let inst = common::instance(seed);
        let v = classify_revision(&inst.model, &inst.original, &inst.revised).unwrap();
        assert!(replay_ok(&inst.model, &v, &inst.original, &inst.revised), "seed {seed}: {v:?}");
    }
}

#[test]
fn verdicts_are_symmetric() {
    for seed in 0..INSTANCES {
        let inst = common::instance(seed);
        let fwd = classify_revision(&inst.model, &inst.original, &inst.revised).unwrap();
        let back = classify_revision(&inst.model, &inst.revised, &inst.original).unwrap();
        assert_eq!(back.relation, fwd.relation.mirror(), "seed {seed}");
    }
}

#[test]
fn identical_sets_are_equivalent() {
    for seed in 0..50 {
        let inst = common::instance(seed);
        let v = classify_revision(&inst.model, &inst.original, &inst.original).unwrap();
        assert_eq!(v.relation, Relation::Equivalent);
        assert_eq!(v.sanction_change, SanctionChange::Unchanged);
    }
}

#[test]
fn syntactic_rules_are_sound() {
    let mut checked = 0;
    let mut deviations = 0;
    let mut deviations_refuted = 0;
    let mut pairs = Vec::new();
    for seed in 0..INSTANCES {
        let inst = common::instance(seed);
        for n in inst.original.norms() {
            if let Some(r) = inst.revised.get(&n.id) {
                pairs.push((seed, inst.model.clone(), n.clone(), r.clone()));
            }
        }
    }
    for seed in 0..INSTANCES {
        let (m, n, e) = common::edit_pair(10_000 + seed);
        pairs.push((10_000 + seed, m, n, e));
    }
    for (seed, model, n1, n2) in pairs {
        let v = syntactic_classify(&n1, &n2, Some(&model));
        let (small, big) = match v.direction {
            SyntacticDirection::RelaxationOrEquivalent => (&n2, &n1),
            SyntacticDirection::StrengtheningOrEquivalent => (&n1, &n2),
            SyntacticDirection::Unknown => continue,
        };
        let (ok, witness) =
            viol_contains(&model, &NormSet::single("big", big.clone()), &NormSet::single("small", small.clone()))
                .unwrap();
        if v.deviation {
            deviations += 1;
            deviations_refuted += usize::from(!ok);
            continue;
        }
        checked += 1;
        assert!(ok, "seed {seed}: {n1:?} -> {n2:?} judged {v:?}, witness {witness:?}");
    }
    assert!(checked > 50, "only {checked} verdicts checked");
    eprintln!(
        "checked {checked} syntactic verdicts; {deviations} deviation-flagged, {deviations_refuted} of them refuted"
    );
}

#[test]
fn relaxations_are_monotone_on_sampled_lassos() {
    let mut relaxations = 0;
    for seed in 0..INSTANCES {
        let inst = common::instance(seed);
        let v = classify_revision(&inst.model, &inst.original, &inst.revised).unwrap();
        if v.relation != Relation::Relaxation {
            continue;
        }
        relaxations += 1;
        assert_eq!(monotone_on_samples(&inst.model, &inst.original, &inst.revised, seed), 0, "seed {seed}");
    }
    assert!(relaxations > 0);
}

#[test]
fn road_revisions() {
    let m = common::model("road/model.ts.json");
    let n = common::norms("road/n1.norm");
    for (file, case) in
        [("road/r1.norm", Case::CondCase), ("road/r2.norm", Case::TargetCase), ("road/r3.norm", Case::DeadlineCase)]
    {
        let r = common::norms(file);
        let v = classify_revision(&m, &n, &r).unwrap();
        assert_eq!(v.relation, Relation::Relaxation, "{file}");
        assert!(replay_ok(&m, &v, &n, &r));
        assert_eq!(monotone_on_samples(&m, &n, &r, 1), 0, "{file}");
        let s = syntactic_classify(&n.norms()[0], &r.norms()[0], Some(&m));
        assert_eq!(s.direction, SyntacticDirection::RelaxationOrEquivalent, "{file}");
        assert_eq!(s.fired_cases, vec![case], "{file}");
        assert!(!s.deviation);
    }
    let s1 = common::norms("road/s1.norm");
    assert_eq!(compare_sanctions(&n, &s1), SanctionChange::Decreased);
    assert_eq!(classify_revision(&m, &n, &s1).unwrap().relation, Relation::Equivalent);
}

#[test]
fn noise_revisions() {
    let m = common::model("noise/model.ts.json");
    let n = common::norms("noise/n2.norm");
    for file in ["noise/r5.norm", "noise/r6.norm"] {
        let r = common::norms(file);
        let v = classify_revision(&m, &n, &r).unwrap();
        assert_eq!(v.relation, Relation::Strengthening, "{file}");
        assert!(replay_ok(&m, &v, &n, &r));
    }
    let r6 = common::norms("noise/r6.norm");
    let s = syntactic_classify(&n.norms()[0], &r6.norms()[0], Some(&m));
    assert_eq!(s.direction, SyntacticDirection::StrengtheningOrEquivalent);
    assert_eq!(s.fired_cases, vec![Case::TargetCase]);
    // the condition strengthens while the later deadline relaxes the obligation
    let r5 = common::norms("noise/r5.norm");
    let s = syntactic_classify(&n.norms()[0], &r5.norms()[0], Some(&m));
    assert_eq!(s.direction, SyntacticDirection::Unknown);
    assert!(s.deviation);
    assert_eq!(compare_sanctions(&n, &common::norms("noise/s2.norm")), SanctionChange::Increased);
}

#[test]
fn narrow_revisions() {
    let m = common::model("narrow/model.ts.json");
    let n = common::norms("narrow/n3.norm");
    for file in ["narrow/r8.norm", "narrow/r9.norm"] {
        let r = common::norms(file);
        let v = classify_revision(&m, &n, &r).unwrap();
        assert_eq!(v.relation, Relation::Incomparable, "{file}");
        assert!(v.witness_in_original_not_revised.is_some() && v.witness_in_revised_not_original.is_some());
        assert!(replay_ok(&m, &v, &n, &r));
        assert_eq!(oracle_compare(&m, &n, &r, None).unwrap().relation, Relation::Incomparable);
    }
}
