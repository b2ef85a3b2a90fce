//! Synthesize a 180 Hz gaze stream for a short made-up episode and run the
//! confusion detector over it.

use assist_sim::rng::{SimRng, Stream};
use assist_sim::usersim::{detect_confusion, first_bottle_fixation, gaze_stream, Aoi, GazeConfig, Preset, Timeline};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tl = Timeline {
        duration: 60.0,
        locate_time: Some(18.0),
        prompts: vec![0.0, 15.0, 30.0, 42.0],
        pointing: vec![(15.0, 18.0)],
        actions: vec![20.0, 33.0, 47.0, 55.0],
    };
    let profile = Preset::NeedsStepByStep.profile();
    let cfg = GazeConfig::default();
    let mut rng = SimRng::new(6, Stream::Gaze);
    let (stream, inserted) = gaze_stream(&tl, &profile, &cfg, &mut rng);

    let share = |aoi| stream.iter().filter(|s| s.aoi == aoi).count() as f64 / stream.len() as f64 * 100.0;
    println!("{} samples over {:.1} s", stream.len(), tl.duration);
    for aoi in [Aoi::Bottle, Aoi::Robot, Aoi::TabletUi, Aoi::Elsewhere] {
        println!("  {aoi:?}: {:.1}%", share(aoi));
    }
    println!("first bottle fixation at {:.3} s", first_bottle_fixation(&stream).unwrap_or(f64::NAN));

    let found = detect_confusion(&stream, &tl.actions, cfg.confusion_threshold)?;
    println!("inserted {} confusion runs, detected {}", inserted.len(), found.len());
    for e in &found {
        println!("  {:?} {:.2}..{:.2} s ({:.2} s)", e.aoi, e.start, e.end, e.duration());
    }
    Ok(())
}
