#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use normrev::dsl::{parse_model, parse_norms, parse_scenario};
use normrev::model::{ModelDescription, StateDescription};
use normrev::revision::CandidatePool;
use normrev::supervision::{steps_within, AgentSpec, Enforcement, Objective, ObjectiveKind, Scenario, Thresholds};
use normrev::{Deadline, Decimal, Formula, Norm, NormKind, NormSet, TransitionSystem};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ATOMS: [&str; 3] = ["a", "b", "c"];

pub fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(rel)
}

pub fn read(rel: &str) -> String {
    std::fs::read_to_string(data(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn model(rel: &str) -> TransitionSystem {
    parse_model(&read(rel)).unwrap_or_else(|e| panic!("{rel}: {e:?}"))
}

pub fn norms(rel: &str) -> NormSet {
    parse_norms(&read(rel)).unwrap_or_else(|e| panic!("{rel}: {e:?}"))
}

pub fn scenario(rel: &str) -> Scenario {
    parse_scenario(&read(rel)).unwrap_or_else(|e| panic!("{rel}: {e:?}"))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random formula of depth at most `depth` over `atoms`.
pub fn formula(rng: &mut ChaCha8Rng, atoms: &[&str], depth: usize) -> Formula {
    let leaf = depth == 0 || rng.random_bool(0.35);
    if leaf {
        return match rng.random_range(0..10) {
            0 => Formula::True,
            1 => Formula::False,
            _ => Formula::atom(*atoms.choose(rng).unwrap()),
        };
    }
    match rng.random_range(0..3) {
        0 => Formula::not(formula(rng, atoms, depth - 1)),
        1 => Formula::and(formula(rng, atoms, depth - 1), formula(rng, atoms, depth - 1)),
        _ => Formula::or(formula(rng, atoms, depth - 1), formula(rng, atoms, depth - 1)),
    }
}

/// Random total model with 1 to 5 states over up to 3 atoms.
pub fn random_model(rng: &mut ChaCha8Rng) -> TransitionSystem {
    let n = rng.random_range(1..=5);
    let atoms: Vec<String> = ATOMS[..rng.random_range(1..=3)].iter().map(|s| s.to_string()).collect();
    let ids: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let states = ids
        .iter()
        .map(|id| StateDescription {
            id: id.clone(),
            labels: atoms.iter().filter(|_| rng.random_bool(0.5)).cloned().collect(),
        })
        .collect();
    let mut edges = Vec::new();
    for from in &ids {
        let first = ids.choose(rng).unwrap().clone();
        edges.push((from.clone(), first));
        for to in &ids {
            if rng.random_bool(0.3) {
                edges.push((from.clone(), to.clone()));
            }
        }
    }
    let desc = ModelDescription { atoms, states, init: ids[0].clone(), edges };
    TransitionSystem::from_description(&desc).expect("generated model is valid")
}

pub fn model_atoms(m: &TransitionSystem) -> Vec<&str> {
    m.atoms().iter().map(String::as_str).collect()
}

pub fn random_norm(rng: &mut ChaCha8Rng, id: &str, atoms: &[&str]) -> Norm {
    let deadline = if rng.random_bool(0.2) { Deadline::Never } else { Deadline::At(formula(rng, atoms, 2)) };
    Norm {
        id: id.to_string(),
        cond: formula(rng, atoms, 2),
        kind: if rng.random_bool(0.5) { NormKind::Obligation } else { NormKind::Prohibition },
        target: formula(rng, atoms, 2),
        deadline,
        sanction: Decimal::from(rng.random_range(0..=20u32) * 5),
    }
}

pub fn random_set(rng: &mut ChaCha8Rng, set_id: &str, atoms: &[&str]) -> NormSet {
    let k = rng.random_range(1..=2);
    let norms = (0..k).map(|i| random_norm(rng, &format!("n{i}"), atoms)).collect();
    NormSet::new(set_id, norms).expect("distinct ids")
}

/// `n` with one component replaced by a random formula or amount.
pub fn single_edit(rng: &mut ChaCha8Rng, n: &Norm, atoms: &[&str]) -> Norm {
    let mut out = n.clone();
    match rng.random_range(0..4) {
        0 => out.cond = formula(rng, atoms, 2),
        1 => out.target = formula(rng, atoms, 2),
        2 => out.deadline = if rng.random_bool(0.2) { Deadline::Never } else { Deadline::At(formula(rng, atoms, 2)) },
        _ => out.sanction = Decimal::from(rng.random_range(0..=20u32) * 5),
    }
    out
}

pub struct Instance {
    pub seed: u64,
    pub model: TransitionSystem,
    pub original: NormSet,
    pub revised: NormSet,
}

/// Random classification instance; half of the revisions are single edits
/// of the original set, the rest independent sets sharing the norm ids.
pub fn instance(seed: u64) -> Instance {
    let mut r = rng(seed);
    let model = random_model(&mut r);
    let atoms = model_atoms(&model);
    let original = random_set(&mut r, "N", &atoms);
    let revised = if r.random_bool(0.5) {
        let i = r.random_range(0..original.len());
        let edited = single_edit(&mut r, &original.norms()[i], &atoms);
        original.with_replaced("NR", edited)
    } else {
        let mut s = random_set(&mut r, "NR", &atoms);
        s.id = "NR".into();
        s
    };
    Instance { seed, model, original, revised }
}

/// Random model with one norm and a single-component edit of it.
pub fn edit_pair(seed: u64) -> (TransitionSystem, Norm, Norm) {
    let mut r = rng(seed);
    let model = random_model(&mut r);
    let atoms = model_atoms(&model);
    let n = random_norm(&mut r, "n0", &atoms);
    let e = single_edit(&mut r, &n, &atoms);
    (model, n, e)
}

/// Small random scenario over a template world.
pub fn random_scenario(seed: u64) -> Scenario {
    let mut r = rng(seed);
    let base = random_model(&mut r);
    // templatise every atom
    let mut desc = base.to_description();
    let t = |a: &String| format!("{a}_{{a}}");
    desc.atoms = desc.atoms.iter().map(t).collect();
    for s in &mut desc.states {
        s.labels = s.labels.iter().map(t).collect();
    }
    let world = TransitionSystem::from_description(&desc).unwrap();
    let templ: Vec<String> = world.atoms().iter().cloned().collect();
    let templ_refs: Vec<&str> = templ.iter().map(String::as_str).collect();
    let n_agents = r.random_range(1..=3);
    let agents = (0..n_agents)
        .map(|i| AgentSpec {
            id: format!("g{i}"),
            start: if r.random_bool(0.3) {
                Some(world.state_id(r.random_range(0..world.num_states())).to_string())
            } else {
                None
            },
            utilities: {
                let mut u = BTreeMap::new();
                for s in world.state_ids() {
                    if r.random_bool(0.6) {
                        u.insert(s.clone(), f64::from(r.random_range(0..40u32)) / 4.0);
                    }
                }
                u
            },
            sanction_sensitivity: f64::from(r.random_range(0..8u32)) / 2.0,
            exploration: f64::from(r.random_range(0..5u32)) / 10.0,
        })
        .collect();
    let norms = random_set(&mut r, "N", &templ_refs);
    let atom = templ_refs.choose(&mut r).unwrap().to_string();
    let minutes_per_step = r.random_bool(0.5).then(|| Decimal::from(r.random_range(1..=5u32)));
    let kind = match r.random_range(0..3) {
        0 => ObjectiveKind::MaxConsecutive {
            atom,
            k: match minutes_per_step {
                Some(m) => steps_within(Decimal::from(10), m).unwrap(),
                None => r.random_range(1..5),
            },
            max_minutes: minutes_per_step.map(|_| Decimal::from(10)),
        },
        1 => ObjectiveKind::AlwaysBelowCount { atom, t: r.random_range(1..=3) },
        _ => ObjectiveKind::NeverAtom { atom },
    };
    let horizon = r.random_range(0..12);
    let window = r.random_range(1..=horizon.max(1));
    Scenario {
        name: format!("random{seed}"),
        world,
        agents,
        norms,
        objectives: vec![Objective { id: "o".into(), kind }],
        pool: CandidatePool {
            formulas: (0..r.random_range(0..3)).map(|_| formula(&mut r, &templ_refs, 1)).collect(),
            sanctions: (0..r.random_range(0..2)).map(|_| Decimal::new(r.random_range(1..1000), 1)).collect(),
        },
        enforcement: if r.random_bool(0.5) { Enforcement::Sanctioning } else { Enforcement::Regimentation },
        seed: r.random(),
        horizon,
        window,
        thresholds: Thresholds { low: 0.5, high: 0.9 },
        minutes_per_step,
    }
}
