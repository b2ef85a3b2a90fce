//! One full episode in each condition with the same seed, printed as the
//! orchestrator saw it.

use std::path::Path;

use assist_sim::cli::{simulate, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = Scenario::load(Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/lab.json")))?;
    let seed = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(4);
    for condition in ["A", "B"] {
        let (ep, m) = simulate(&scenario, condition, seed)?;
        println!("== condition {condition}, seed {seed}");
        for e in &ep.log.events {
            let acts: Vec<String> = e.actions.iter().map(|a| format!("{a:?}")).collect();
            println!("{:>7.1} {:<60} {:?}/{:?} {}", e.t, format!("{:?}", e.event), e.phase, e.level, acts.join("; "));
        }
        println!(
            "{:?} at {:.1} s; located at {:.1} s{}; {} rounds; {} gaze samples\n",
            m.outcome,
            m.duration,
            m.time_to_locate,
            if m.censored { " (censored)" } else { "" },
            m.interaction_rounds,
            ep.gaze.len()
        );
    }
    Ok(())
}
