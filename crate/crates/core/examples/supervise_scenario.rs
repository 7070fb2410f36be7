//! Runs a scenario under the norm-update loop and prints each window score
//! and every adopted revision.
//!
//! ```text
//! cargo run --example supervise_scenario -- data/road/road.scenario.json
//! ```

use normrev::dsl::parse_scenario;
use normrev::supervision::supervise;

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| "data/road/road.scenario.json".into());
    let text = std::fs::read_to_string(&path).expect("readable scenario");
    let scenario = match parse_scenario(&text) {
        Ok(s) => s,
        Err(errors) => {
            for e in errors {
                eprintln!("{path}: {e}");
            }
            std::process::exit(1);
        }
    };
    let run = supervise(&scenario);
    let summary = run.log.summary.as_ref().expect("supervised runs are summarised");
    for w in &summary.window_scores {
        println!("window {} (steps {}..={}): {:.3} {:?}", w.window, w.first_step, w.last_step, w.score, w.status);
    }
    for r in &run.revisions {
        println!(
            "step {}: {:?} {} -> {} ({:.3} over {:.3}, {} candidates)",
            r.step, r.direction, r.before, r.after, r.candidate_score, r.observed_score, r.candidates_scored
        );
        if let Some(v) = &r.verdict {
            println!("  verdict: {:?}, sanctions {:?}", v.relation, v.sanction_change);
        }
    }
    println!("violations: {}, final set {}", run.log.violations(), run.final_set.id);
}
