//! Global plan plus DWA tracking from the start pose to every ROI in the lab.

use std::path::Path;

use assist_sim::cli::Scenario;
use assist_sim::navigation::{navigate_to, plan_global, NavStatus};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = Scenario::load(Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/lab.json")))?;
    let scene = scenario.scene(1)?;
    let cm = &scenario.costmap;
    let nav = &scenario.config.search.nav;

    let mut robot = scenario.robot_start();
    for roi in &scene.rois {
        let planned = plan_global(cm, (robot.x, robot.y), (roi.x, roi.y))?;
        let out = navigate_to(&mut robot, (roi.x, roi.y, roi.heading), &scene, cm, nav);
        let driven: f64 = out.trajectory.windows(2).map(|w| (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1)).sum();
        println!(
            "{:<11} {:?}: plan {:.2} m, driven {:.2} m in {:.1} s, {} replans, {} collisions, pose ({:.2}, {:.2}, {:+.0} deg)",
            roi.id,
            out.status,
            planned.length(),
            driven,
            out.elapsed,
            out.replans,
            out.collisions,
            robot.x,
            robot.y,
            robot.heading.to_degrees()
        );
        if out.status == NavStatus::Unreachable {
            break;
        }
    }
    Ok(())
}
