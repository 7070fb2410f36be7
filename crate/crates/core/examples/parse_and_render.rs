//! Parses a norm file, prints its canonical rendering, and shows how
//! defects are reported with their locations.
//!
//! ```text
//! cargo run --example parse_and_render -- data/noise/r5.norm
//! ```

use normrev::dsl::{parse_formula, parse_norms, render_formula, render_norms};

const BROKEN: &str = "# format 1
norm a { when: inRoad &; forbid: speedAbove15; until: never; sanction: 1; }
norm b { when: inRoad; forbid: speedAbove15; until: never; sanction: lots; }
norm a { when: inRoad; forbid: speedAbove15; until: never; sanction: 1; }
";

fn main() {
    let path =
        std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/road/r1.norm").into());
    let text = std::fs::read_to_string(&path).expect("readable norm file");
    match parse_norms(&text) {
        Ok(set) => print!("{}", render_norms(&set)),
        Err(errors) => errors.iter().for_each(|e| eprintln!("{path}: {e}")),
    }

    let f = parse_formula("!a & b | c & (d | !e)").unwrap();
    println!("\nformula tree: {f:?}\nrendered:     {}", render_formula(&f));

    println!("\ndefects in a broken file:");
    for e in parse_norms(BROKEN).unwrap_err() {
        println!("  {e}");
    }
}
