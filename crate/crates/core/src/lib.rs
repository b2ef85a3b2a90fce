//! Deterministic desk-scale simulator for a robot that reminds a person to
//! take their medication and helps them find the pill bottle.
//!
//! The pieces, bottom up:
//!
//! - [`geometry`]: pinhole back-projection, depth-band segmentation, plane fits
//!   and pointing angles.
//! - [`worldsim`]: occupancy grid, scene objects, unicycle base, depth
//!   rendering and a parametric detector.
//! - [`navigation`]: inflated costmap, A* global planning and a dynamic-window
//!   local planner, plus the ROI search loop.
//! - [`orchestrator`]: the L1/L2/L3 escalation state machine and the episode
//!   driver.
//! - [`usersim`]: probabilistic user profiles, a 180 Hz gaze model and
//!   confusion detection.
//! - [`metrics`]: per-session metrics, questionnaires and aggregate reports.
//! - [`cli`]: scenario files and the `run`, `batch` and `report` commands.
//!
//! All randomness comes from [`rng::SimRng`], keyed by run seed and stream, so
//! a `(scenario, condition, seed)` triple always yields the same log bytes.
//!
//! ```no_run
//! use assist_sim::cli::{simulate, Scenario};
//!
//! let s = Scenario::load("scenarios/lab.json".as_ref()).unwrap();
//! let (episode, metrics) = simulate(&s, "B", 1).unwrap();
//! println!("{:?} after {:.1} s", metrics.outcome, episode.log.end.t);
//! ```

pub mod geometry;
pub mod rng;
pub mod worldsim;
pub mod navigation;
pub mod orchestrator;
pub mod usersim;
pub mod metrics;
pub mod cli;
