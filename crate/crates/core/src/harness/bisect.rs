//! Bisection for the empirical critical timestep.

use crate::error::{check_positive, Error, Result};

use super::config::{Init, SimConfig};
use super::sim::{run, RunStatus};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BisectOptions {
    /// Stop when the bracket width is at most `rel_tol` times its midpoint.
    pub rel_tol: f64,
    /// Number of Gaussian seeds to average; ignored for other initial states.
    pub n_seeds: usize,
    /// Indeterminate runs are repeated with the horizon doubled until it
    /// reaches this multiple of the configured step count.
    pub max_horizon_factor: usize,
}

impl Default for BisectOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-3,
            n_seeds: 1,
            max_horizon_factor: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalDt {
    /// Mean of the per-seed bracket midpoints.
    pub dt: f64,
    pub per_seed: Vec<f64>,
    /// Final `(stable, unstable)` bracket for each seed.
    pub brackets: Vec<(f64, f64)>,
}

/// Classify `cfg`, doubling the horizon while the verdict is indeterminate.
pub fn classify_with_escalation(cfg: &SimConfig, max_factor: usize) -> Result<RunStatus> {
    let mut c = cfg.clone();
    loop {
        let v = run(&c)?;
        match v.status {
            RunStatus::Indeterminate if c.steps * 2 <= cfg.steps * max_factor.max(1) => {
                c.steps *= 2;
            }
            RunStatus::Indeterminate => {
                return Err(Error::HorizonExhausted {
                    dt: c.dt,
                    steps: c.steps,
                })
            }
            s => return Ok(s),
        }
    }
}

fn bisect_one(cfg: &SimConfig, lo: f64, hi: f64, opts: &BisectOptions) -> Result<(f64, f64)> {
    let at = |dt: f64| {
        let mut c = cfg.clone();
        c.dt = dt;
        classify_with_escalation(&c, opts.max_horizon_factor)
    };
    let s_lo = at(lo)?;
    if s_lo != RunStatus::Stable {
        return Err(Error::InvalidBracket {
            lo,
            hi,
            reason: format!("lower end is {s_lo:?}, expected Stable"),
        });
    }
    let s_hi = at(hi)?;
    if s_hi != RunStatus::Unstable {
        return Err(Error::InvalidBracket {
            lo,
            hi,
            reason: format!("upper end is {s_hi:?}, expected Unstable"),
        });
    }
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > opts.rel_tol * 0.5 * (lo + hi) {
        let mid = 0.5 * (lo + hi);
        match at(mid)? {
            RunStatus::Stable => lo = mid,
            _ => hi = mid,
        }
    }
    Ok((lo, hi))
}

/// Bisect on `dt` between a stable `dt_lo` and an unstable `dt_hi`.
pub fn find_critical_dt(
    template: &SimConfig,
    dt_lo: f64,
    dt_hi: f64,
    opts: &BisectOptions,
) -> Result<CriticalDt> {
    check_positive("dt_lo", dt_lo)?;
    check_positive("dt_hi", dt_hi)?;
    check_positive("rel_tol", opts.rel_tol)?;
    if dt_lo >= dt_hi {
        return Err(Error::InvalidBracket {
            lo: dt_lo,
            hi: dt_hi,
            reason: "lower end must be below upper end".into(),
        });
    }
    template.validate()?;
    let configs: Vec<SimConfig> = match template.init {
        Init::Gaussian { amplitude, seed } => (0..opts.n_seeds.max(1) as u64)
            .map(|i| SimConfig {
                init: Init::Gaussian {
                    amplitude,
                    seed: seed + i,
                },
                ..template.clone()
            })
            .collect(),
        _ => vec![template.clone()],
    };
    let mut brackets = Vec::with_capacity(configs.len());
    for c in &configs {
        brackets.push(bisect_one(c, dt_lo, dt_hi, opts)?);
    }
    let per_seed: Vec<f64> = brackets.iter().map(|(a, b)| 0.5 * (a + b)).collect();
    let dt = per_seed.iter().sum::<f64>() / per_seed.len() as f64;
    Ok(CriticalDt {
        dt,
        per_seed,
        brackets,
    })
}
