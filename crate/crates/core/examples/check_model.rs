//! Loads a model, reports its shape and deadlocks, and lints norm files
//! against its vocabulary.
//!
//! ```text
//! cargo run --example check_model -- data/noise/model.ts.json data/noise/n2.norm
//! ```

use normrev::dsl::{parse_model, parse_norms};
use normrev::norms::lint;

fn main() {
    let mut args = std::env::args().skip(1);
    let base = concat!(env!("CARGO_MANIFEST_DIR"), "/data/road/");
    let model_path = args.next().unwrap_or_else(|| format!("{base}model.ts.json"));
    let mut norm_paths: Vec<String> = args.collect();
    if norm_paths.is_empty() {
        norm_paths = ["n1", "r1", "r2", "r3", "s1"].iter().map(|n| format!("{base}{n}.norm")).collect();
    }

    let model = match parse_model(&std::fs::read_to_string(&model_path).unwrap()) {
        Ok(m) => m,
        Err(errors) => {
            errors.iter().for_each(|e| eprintln!("{model_path}: {e}"));
            std::process::exit(1);
        }
    };
    println!("{} states, {} edges, atoms {:?}", model.num_states(), model.num_edges(), model.atoms());
    match model.deadlock() {
        Some(s) => println!("deadlock state: {}", model.state_id(s)),
        None => println!("transition relation is total"),
    }

    for p in &norm_paths {
        let set = parse_norms(&std::fs::read_to_string(p).unwrap()).unwrap_or_else(|e| panic!("{p}: {e:?}"));
        let unknown = set.unknown_atoms(model.atoms());
        println!("{}: {} norm(s), {} unknown atom use(s)", set.id, set.len(), unknown.len());
        for l in lint(&set) {
            println!("  lint: {l}");
        }
    }
}
