//! Drive the assistance state machine by hand: a user who ignores two L1
//! reminders, gets the L2 beckon, then follows along.

use assist_sim::orchestrator::{step, AssistEvent, AssistLevel, IntentKind, OrchestratorConfig, OrchestratorState, Phase, TimedEvent};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = OrchestratorConfig { start_level: AssistLevel::L1, roi_labels: vec!["desk".into(), "table".into()], ..Default::default() };
    let script = [
        (0.0, AssistEvent::ScheduleDue),
        (20.0, AssistEvent::Timeout { phase: Phase::Reminding }),
        (40.0, AssistEvent::Timeout { phase: Phase::Reminding }),
        (44.0, AssistEvent::RecordPressed { transcript: "ok, coming".into() }),
        (44.5, AssistEvent::Intent { intent: IntentKind::Confirm }),
    ];
    let mut state = OrchestratorState::new(&cfg);
    for (t, ev) in script {
        let tr = step(&state, &TimedEvent::new(t, ev.clone()), &cfg)?;
        println!("{t:>5.1} s  {ev:?}");
        println!("         -> {:?} at {:?}, timer {:?}", tr.state.phase, tr.state.level, tr.timer);
        for a in &tr.actions {
            println!("            {a:?}");
        }
        state = tr.state;
    }
    Ok(())
}
