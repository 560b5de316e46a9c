//! Monte Carlo sweeps over one scenario parameter.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::engine::Engine;
use crate::error::{invalid, Error, Result};
use crate::scenario::{dbm_to_watt, default_geometry, Scenario, Scheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// Transmit power in dBm.
    P,
    M,
    N,
    Q,
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::P => "P",
            SweepParam::M => "M",
            SweepParam::N => "N",
            SweepParam::Q => "Q",
        })
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "P" | "p" => Ok(SweepParam::P),
            "M" | "m" => Ok(SweepParam::M),
            "N" | "n" => Ok(SweepParam::N),
            "Q" | "q" => Ok(SweepParam::Q),
            other => Err(invalid("param", format!("unknown sweep parameter `{other}` (expected P, M, N or Q)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
    /// Seeds used are `base.seed .. base.seed + seeds`.
    pub seeds: usize,
    pub schemes: Vec<Scheme>,
    /// Side of the default deployment square, used when `Q` is swept.
    pub width: f64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(invalid("values", "must not be empty"));
        }
        if self.seeds < 1 {
            return Err(invalid("seeds", "must be >= 1"));
        }
        if self.schemes.is_empty() {
            return Err(invalid("schemes", "must not be empty"));
        }
        Ok(())
    }
}

/// `base` with `param` set to `value`; the seed and scheme are set by the caller.
pub fn apply_param(base: &Scenario, param: SweepParam, value: f64, width: f64) -> Result<Scenario> {
    let mut s = base.clone();
    let count = |key: &'static str| -> Result<usize> {
        if value >= 1.0 && value.fract() == 0.0 {
            Ok(value as usize)
        } else {
            Err(invalid(key, format!("sweep value {value} is not a positive integer")))
        }
    };
    match param {
        SweepParam::P => s.power = dbm_to_watt(value),
        SweepParam::M => s.m = count("M")?,
        SweepParam::N => s.n = count("N")?,
        SweepParam::Q => {
            s.q = count("Q")?;
            s.positions = default_geometry(s.q, width)?;
        }
    }
    s.validate()?;
    Ok(s)
}

/// Final result of one `(scheme, value, seed)` job.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scheme: Scheme,
    pub value: f64,
    pub seed: u64,
    pub sum_rate: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Mean over seeds with a two-sided 95% t interval half-width.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepMean {
    pub scheme: Scheme,
    pub value: f64,
    pub seeds: usize,
    pub mean: f64,
    pub ci95: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub param: SweepParam,
    pub rows: Vec<SweepRow>,
    pub means: Vec<SweepMean>,
}

/// Mean and 95% half-width of a sample.
pub fn mean_ci95(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .map(|d| d.inverse_cdf(0.975))
        .unwrap_or(f64::NAN);
    (mean, t * (var / n as f64).sqrt())
}

/// Runs every job (in parallel) and aggregates per `(scheme, value)`.
pub fn run_sweep(base: &Scenario, spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let mut jobs = Vec::new();
    for &scheme in &spec.schemes {
        for &value in &spec.values {
            for i in 0..spec.seeds {
                jobs.push((scheme, value, base.seed + i as u64));
            }
        }
    }
    let rows = jobs
        .par_iter()
        .map(|&(scheme, value, seed)| {
            let mut s = apply_param(&base.clone().with_scheme(scheme), spec.param, value, spec.width)?;
            if scheme.pricing == base.scheme.pricing {
                s.tau = base.tau;
            }
            s.seed = seed;
            let trace = Engine::new(s)?.run()?;
            Ok(SweepRow {
                scheme,
                value,
                seed,
                sum_rate: trace.final_sum_rate(),
                iterations: trace.iterations(),
                converged: trace.converged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let means = rows
        .chunks(spec.seeds)
        .map(|chunk| {
            let rates: Vec<f64> = chunk.iter().map(|r| r.sum_rate).collect();
            let (mean, ci95) = mean_ci95(&rates);
            SweepMean { scheme: chunk[0].scheme, value: chunk[0].value, seeds: chunk.len(), mean, ci95 }
        })
        .collect();
    Ok(SweepResult { param: spec.param, rows, means })
}
