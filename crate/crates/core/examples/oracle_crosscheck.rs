//! Cross-checks the product-automaton classifier against brute-force run
//! enumeration on the shipped revisions.
//!
//! ```text
//! cargo run --example oracle_crosscheck
//! ```

use std::path::PathBuf;

use normrev::classify_revision;
use normrev::dsl::{parse_model, parse_norms};
use normrev::revision::oracle_compare;

fn data(rel: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(rel);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn main() {
    let pairs = [
        ("road", "n1", "r1"),
        ("road", "n1", "r2"),
        ("road", "n1", "r3"),
        ("noise", "n2", "r5"),
        ("noise", "n2", "r6"),
        ("narrow", "n3", "r8"),
        ("narrow", "n3", "r9"),
    ];
    let mut disagreements = 0;
    for (world, before, after) in pairs {
        let model = parse_model(&data(&format!("{world}/model.ts.json"))).unwrap();
        let n = parse_norms(&data(&format!("{world}/{before}.norm"))).unwrap();
        let r = parse_norms(&data(&format!("{world}/{after}.norm"))).unwrap();
        let exact = classify_revision(&model, &n, &r).unwrap();
        let brute = oracle_compare(&model, &n, &r, None).unwrap();
        let mark = if exact.relation == brute.relation { "agree" } else { "DISAGREE" };
        disagreements += usize::from(exact.relation != brute.relation);
        println!("{world} {before}->{after}: classifier {}, oracle {} [{mark}]", exact.relation, brute.relation);
    }
    std::process::exit(i32::from(disagreements > 0));
}
