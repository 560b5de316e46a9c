//! Frequency response of optimized surfaces.

use crate::engine::Engine;
use crate::error::Result;
use crate::linkalg::UserState;
use crate::scenario::Scenario;

/// Mean amplitude and phase of the reflection coefficients on one subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRow {
    pub subcarrier: usize,
    pub frequency: f64,
    pub amplitude: f64,
    /// Mean of `arg(phi)` in radians.
    pub phase: f64,
}

/// Averages `|phi|` and `arg(phi)` over every element of every state set.
pub fn reflection_profile(freqs: &[f64], runs: &[Vec<UserState>]) -> Vec<ProfileRow> {
    freqs
        .iter()
        .enumerate()
        .map(|(k, &frequency)| {
            let values = runs.iter().flatten().flat_map(|st| st.phi[k].iter());
            let (mut amp, mut phase, mut n) = (0.0, 0.0, 0usize);
            for v in values {
                amp += v.norm();
                phase += v.arg();
                n += 1;
            }
            let n = n.max(1) as f64;
            ProfileRow { subcarrier: k, frequency, amplitude: amp / n, phase: phase / n }
        })
        .collect()
}

/// Optimizes the scenario for `seeds` consecutive seeds and profiles the result.
pub fn profile_runs(base: &Scenario, seeds: usize) -> Result<Vec<ProfileRow>> {
    let mut runs = Vec::with_capacity(seeds);
    let mut freqs = Vec::new();
    for i in 0..seeds.max(1) {
        let mut s = base.clone();
        s.seed = base.seed + i as u64;
        let mut engine = Engine::new(s)?;
        engine.run()?;
        freqs = engine.net.freqs.clone();
        runs.push(engine.states);
    }
    Ok(reflection_profile(&freqs, &runs))
}

/// `max - min` of a column.
pub fn spread(values: impl IntoIterator<Item = f64>) -> f64 {
    let (lo, hi) = values
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi >= lo {
        hi - lo
    } else {
        0.0
    }
}
