//! Paired batch over ten seeds, then rebuild the report from the stored logs.

use std::path::Path;

use assist_sim::cli::{batch, report, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = Scenario::load(Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/lab.json")))?;
    let out = tempfile::tempdir()?;
    let seeds: Vec<u64> = (1..=10).collect();
    let b = batch(&scenario, &[], &seeds, out.path(), None)?;
    print!("{}", b.summary);
    println!("{} runs, {} failures", b.manifest.runs.len(), b.manifest.failures.len());

    let again = report(out.path(), None)?;
    println!("report from logs matches: {}", again.summary == b.summary);
    Ok(())
}
