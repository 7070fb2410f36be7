//! Lists the relaxing and strengthening single-component edits of the road
//! prohibition for a small pool, with the syntactic verdict of each.
//!
//! ```text
//! cargo run --example revise_candidates
//! ```

use normrev::dsl::{parse_formula, parse_model, parse_norms};
use normrev::revision::{generate_candidates, syntactic_classify, CandidatePool, Component, RevisionDirection};
use normrev::Decimal;

const MODEL: &str = include_str!("../data/road/model.ts.json");
const NORMS: &str = include_str!("../data/road/n1.norm");

fn main() {
    let model = parse_model(MODEL).unwrap();
    let set = parse_norms(NORMS).unwrap();
    let n1 = &set.norms()[0];
    let pool = CandidatePool {
        formulas: ["trafficHigh", "speedAbove20", "firstHalfCompleted"]
            .iter()
            .map(|f| parse_formula(f).unwrap())
            .collect(),
        sanctions: vec![Decimal::from(5), Decimal::from(20000)],
    };
    for direction in [RevisionDirection::Relax, RevisionDirection::Strengthen] {
        let candidates = generate_candidates(n1, &pool, direction, Some(&model));
        println!("{direction:?}: {} candidate(s)", candidates.len());
        for c in candidates {
            if c.component == Component::Sanction {
                println!("  {c}");
                continue;
            }
            let v = syntactic_classify(n1, &c.norm, Some(&model));
            println!("  {:<40} {:?} {:?}", c.to_string(), v.direction, v.fired_cases);
        }
    }
}
