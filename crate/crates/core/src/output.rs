//! CSV writers for run traces, sweeps and reflection profiles.

use std::io::Write;

use crate::engine::RunTrace;
use crate::error::Result;
use crate::profile::ProfileRow;
use crate::sweep::SweepResult;

pub fn run_header(users: usize) -> Vec<String> {
    let mut h = vec!["iteration".to_string(), "sum_rate".to_string()];
    h.extend((1..=users).map(|q| format!("rate_user_{q}")));
    h.push("alpha".to_string());
    h
}

/// One row per iteration.
pub fn write_run_csv<W: Write>(out: W, trace: &RunTrace, users: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(run_header(users))?;
    for (t, rec) in trace.records.iter().enumerate() {
        let mut row = vec![(t + 1).to_string(), rec.sum_rate.to_string()];
        row.extend(rec.user_rates.iter().map(f64::to_string));
        row.push(rec.alpha.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub const SWEEP_HEADER: [&str; 9] =
    ["kind", "scheme", "param", "value", "seed", "sum_rate", "iterations", "converged", "ci95"];

/// Per-seed rows followed by one mean row per `(scheme, value)`.
pub fn write_sweep_csv<W: Write>(out: W, result: &SweepResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    let param = result.param.to_string();
    for r in &result.rows {
        w.write_record([
            "run".to_string(),
            r.scheme.to_string(),
            param.clone(),
            r.value.to_string(),
            r.seed.to_string(),
            r.sum_rate.to_string(),
            r.iterations.to_string(),
            r.converged.to_string(),
            String::new(),
        ])?;
    }
    for m in &result.means {
        w.write_record([
            "mean".to_string(),
            m.scheme.to_string(),
            param.clone(),
            m.value.to_string(),
            String::new(),
            m.mean.to_string(),
            String::new(),
            String::new(),
            m.ci95.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const PROFILE_HEADER: [&str; 4] = ["subcarrier", "frequency", "amplitude", "phase"];

pub fn write_profile_csv<W: Write>(out: W, rows: &[ProfileRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PROFILE_HEADER)?;
    for r in rows {
        w.write_record([
            r.subcarrier.to_string(),
            r.frequency.to_string(),
            r.amplitude.to_string(),
            r.phase.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
