//! Park the robot at each ROI, pan the head until the detector fires, then
//! turn the box into a base-frame estimate and compare with ground truth.

use std::path::Path;

use assist_sim::geometry::localize_target;
use assist_sim::rng::{SimRng, Stream};
use assist_sim::worldsim::{scan_at_roi, RobotState};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = assist_sim::cli::Scenario::load(Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/lab.json")))?;
    let seed = 3;
    let scene = scenario.scene(seed)?;
    let cfg = &scenario.config;
    let mut det = SimRng::new(seed, Stream::Detector);
    let mut noise = SimRng::new(seed, Stream::DepthNoise);
    let (_, bottle) = scene.pill_bottle().expect("scenario places a bottle");

    for roi in &scene.rois {
        let mut robot = RobotState::at(roi.x, roi.y, roi.heading);
        let scan = scan_at_roi(&scene, &mut robot, &cfg.camera, &cfg.detector, &cfg.search.pan_schedule, cfg.search.render_mode, &mut det, Some(&mut noise));
        let Some(hit) = scan.hit else {
            println!("{:<11} nothing after {} frames", roi.id, scan.visited.len());
            continue;
        };
        robot.set_head_pan(hit.pan);
        let est = localize_target(&hit.depth, &hit.detection.bbox, &cfg.camera.intrinsics, &hit.base_from_camera, &cfg.localization)?;
        let truth = robot.world_from_base().inverse().apply(&bottle.position);
        let kind = if hit.detection.true_positive { "bottle" } else { "false hit" };
        println!(
            "{:<11} {kind} at pan {:+.0} deg, {} px, estimate ({:.3}, {:.3}, {:.3}) m, error {:.1} mm",
            roi.id,
            hit.pan.to_degrees(),
            est.mask_pixels,
            est.centroid.x,
            est.centroid.y,
            est.centroid.z,
            (est.centroid - truth).norm() * 1000.0
        );
        if let Some(p) = est.plane {
            println!("{:<11} surface normal ({:.2}, {:.2}, {:.2})", "", p.normal.x, p.normal.y, p.normal.z);
        }
    }
    Ok(())
}
