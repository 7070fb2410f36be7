//! Runs the noise scenario, writes the run log, reads it back and replays
//! the monitors over the logged labels to confirm every event.
//!
//! ```text
//! cargo run --example replay_runlog
//! ```

use normrev::dsl::{parse_runlog, parse_scenario, render_runlog};
use normrev::norms::Semantics;
use normrev::supervision::{replay_matches, run_episode};

const SCENARIO: &str = include_str!("../data/noise/noise.scenario.json");

fn main() {
    let scenario = parse_scenario(SCENARIO).expect("noise scenario parses");
    let log = run_episode(&scenario, &scenario.norms);
    let text = render_runlog(&log);
    println!("{} line(s), {} violation(s)", text.lines().count(), log.violations());
    for line in text.lines().take(3) {
        println!("  {line}");
    }

    let back = parse_runlog(&text).expect("run logs round-trip");
    assert_eq!(back, log);
    let ok = replay_matches(&back, Semantics::default()).expect("replayable");
    println!("replay matches logged events: {ok}");
}
