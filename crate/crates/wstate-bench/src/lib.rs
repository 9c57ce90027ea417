//! Shared setup for the criterion benchmarks in `benches/`.

use wstate_core::{scenario, Scenario, ScenarioId};

/// The fast-emission working point with a shortened horizon, used by the
/// open-system benchmarks so a single sample stays in the millisecond range.
pub fn short_emission_scenario() -> Scenario {
    let mut s = scenario(ScenarioId::Fig5K200).expect("catalog entry");
    s.t_span = (0.0, 10.0);
    s.samples = 201;
    s
}

/// The three-mode generation scenario with a shortened span for the
/// closed-system benchmarks.
pub fn short_generation_scenario() -> Scenario {
    let mut s = scenario(ScenarioId::Fig2a).expect("catalog entry");
    s.t_span = (0.0, 100.0);
    s.samples = 201;
    s
}
