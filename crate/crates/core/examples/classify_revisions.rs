//! Classifies every shipped revision against its original norm set and
//! prints the relation, the sanction change and the witness lassos.
//!
//! ```text
//! cargo run --example classify_revisions
//! ```

use std::path::PathBuf;

use normrev::dsl::{parse_model, parse_norms};
use normrev::revision::compare_sanctions;
use normrev::{classify_revision, NormSet, TransitionSystem};

fn data(rel: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(rel);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn model(rel: &str) -> TransitionSystem {
    parse_model(&data(rel)).expect("shipped model parses")
}

fn norms(rel: &str) -> NormSet {
    parse_norms(&data(rel)).expect("shipped norms parse")
}

fn main() {
    let cases = [
        ("road", "n1", &["r1", "r2", "r3", "s1"][..]),
        ("noise", "n2", &["r5", "r6", "s2"][..]),
        ("narrow", "n3", &["r8", "r9"][..]),
    ];
    for (world, original, revisions) in cases {
        let m = model(&format!("{world}/model.ts.json"));
        let n = norms(&format!("{world}/{original}.norm"));
        for r in revisions {
            let revised = norms(&format!("{world}/{r}.norm"));
            let v = classify_revision(&m, &n, &revised).expect("shipped models are total");
            println!(
                "{world}: {} -> {}: {} (sanctions {:?})",
                n.id,
                revised.id,
                v.relation,
                compare_sanctions(&n, &revised)
            );
            if let Some(p) = &v.witness_in_original_not_revised {
                println!("  violates only {}: {p}", n.id);
            }
            if let Some(p) = &v.witness_in_revised_not_original {
                println!("  violates only {}: {p}", revised.id);
            }
        }
    }
}
