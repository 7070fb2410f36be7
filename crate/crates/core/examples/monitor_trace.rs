//! Runs the road prohibition over a hand-written label trace in both
//! monitor modes, then over a lasso of the road model.
//!
//! ```text
//! cargo run --example monitor_trace
//! ```

use normrev::dsl::{parse_model, parse_norms};
use normrev::norms::{run_trace, run_trace_on_path, MonitorMode, Semantics, LASSO_UNROLL_CYCLES};
use normrev::{Labels, Path};

const MODEL: &str = include_str!("../data/road/model.ts.json");
const NORMS: &str = include_str!("../data/road/n1.norm");

fn labels(atoms: &[&str]) -> Labels {
    atoms.iter().map(|a| a.to_string()).collect()
}

fn main() {
    let model = parse_model(MODEL).expect("road model parses");
    let set = parse_norms(NORMS).expect("n1 parses");
    let trace = vec![
        labels(&[]),
        labels(&["inRoad"]),
        labels(&["inRoad", "speedAbove15"]),
        labels(&["inRoad"]),
        labels(&["inRoad", "speedAbove15", "speedAbove20"]),
        labels(&[]),
    ];
    for mode in [MonitorMode::Event, MonitorMode::Path] {
        let out = run_trace(&set, &trace, mode, Semantics::default());
        println!("{mode:?} mode:");
        for e in &out.events {
            println!("  step {} {} {:?}", e.step, e.norm, e.kind);
        }
        println!("  {} violation(s), sanctions {}", out.violations(), out.ledger.total);
    }

    let lasso = Path::lasso(vec!["out".into(), "in".into()], vec!["mid".into()]);
    let out = run_trace_on_path(&model, &set, &lasso, LASSO_UNROLL_CYCLES, MonitorMode::Path, Semantics::default())
        .expect("lasso is a run of the model");
    println!("lasso {lasso}: {} violation(s)", out.violations());
}
