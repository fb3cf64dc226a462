//! Simulation configuration and its flat `key = value` text format.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{check_grid, check_nonnegative, check_positive, Error, Result};
use crate::field::Vec3;
use crate::forcing::{DeltaMode, ForcingKind, ForcingModel};

/// Initial fluid and boundary state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Init {
    /// I.i.d. Gaussian velocity, projected divergence-free and rescaled so
    /// each component has RMS `amplitude`.
    Gaussian {
        amplitude: f64,
        seed: u64,
    },
    Zero,
    /// Membrane lifted by `A (sin(2π(3x1 + 4x2)) + cos(2π x2))`, fluid at rest.
    MembranePerturbation {
        amplitude: f64,
    },
    /// Analytic channel profile `u_x = (f0/2μ) z (L - z)` with the wall
    /// already carrying the balancing force.
    Poiseuille,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub p: usize,
    pub l: f64,
    pub rho: f64,
    pub mu: f64,
    pub k: f64,
    pub dt: f64,
    pub steps: usize,
    pub forcing: ForcingKind,
    pub delta_mode: DeltaMode,
    pub eps: Vec3,
    pub nonlinear: bool,
    pub init: Init,
    /// Uniform body force density along `x1`.
    pub f0: f64,
    pub record_every: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 32,
            p: 2,
            l: 1.0,
            rho: 1.0,
            mu: 0.01,
            k: 8e4,
            dt: 1e-3,
            steps: 5000,
            forcing: ForcingKind::TargetPoint,
            delta_mode: DeltaMode::FixedAtTarget,
            eps: [0.0; 3],
            nonlinear: false,
            init: Init::Gaussian {
                amplitude: 1.0,
                seed: 0,
            },
            f0: 0.0,
            record_every: 1,
        }
    }
}

const KEYS: [&str; 19] = [
    "n",
    "p",
    "l",
    "rho",
    "mu",
    "k",
    "dt",
    "steps",
    "forcing",
    "delta_mode",
    "eps1",
    "eps2",
    "eps3",
    "nonlinear",
    "init",
    "amplitude",
    "f0",
    "seed",
    "record_every",
];

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config {
        line,
        reason: format!("cannot parse `{value}` for `{key}`"),
    })
}

impl SimConfig {
    pub fn h(&self) -> f64 {
        self.l / self.n as f64
    }

    pub fn forcing_model(&self) -> Result<ForcingModel> {
        ForcingModel::new(self.forcing, self.k, self.delta_mode)
    }

    pub fn validate(&self) -> Result<()> {
        check_grid(self.n)?;
        if self.p == 0 {
            return Err(Error::InvalidParameter {
                name: "p",
                reason: "grid ratio must be at least 1".into(),
            });
        }
        check_positive("l", self.l)?;
        check_positive("rho", self.rho)?;
        check_nonnegative("mu", self.mu)?;
        check_positive("dt", self.dt)?;
        if !self.f0.is_finite() {
            return Err(Error::InvalidParameter {
                name: "f0",
                reason: "must be finite".into(),
            });
        }
        if self.steps == 0 {
            return Err(Error::InvalidParameter {
                name: "steps",
                reason: "must be positive".into(),
            });
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter {
                name: "record_every",
                reason: "must be positive".into(),
            });
        }
        if self.eps.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "eps",
                reason: "must be finite".into(),
            });
        }
        match self.init {
            Init::Gaussian { amplitude, .. } => check_nonnegative("amplitude", amplitude)?,
            Init::MembranePerturbation { amplitude } => {
                check_nonnegative("amplitude", amplitude)?;
                if self.forcing != ForcingKind::Membrane {
                    return Err(Error::InvalidParameter {
                        name: "init",
                        reason: "membrane_perturbation needs forcing = membrane".into(),
                    });
                }
            }
            Init::Poiseuille => {
                if self.forcing != ForcingKind::TargetPoint {
                    return Err(Error::InvalidParameter {
                        name: "init",
                        reason: "poiseuille needs forcing = target".into(),
                    });
                }
                check_positive("mu", self.mu)?;
            }
            Init::Zero => {}
        }
        self.forcing_model()?;
        Ok(())
    }

    /// Parse the flat text format. Keys not given keep their defaults;
    /// `delta_mode` defaults to `moving` for membranes. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SimConfig::default();
        let mut seen: Vec<&str> = Vec::new();
        let mut init_name = "gaussian".to_string();
        let mut amplitude = None;
        let mut seed = 0u64;
        let mut delta_given = false;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.trim();
            if body.is_empty() || body.starts_with('#') {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| Error::Config {
                line,
                reason: format!("expected `key = value`, got `{body}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let Some(&known) = KEYS.iter().find(|k| **k == key) else {
                return Err(Error::Config {
                    line,
                    reason: format!("unknown key `{key}`"),
                });
            };
            if seen.contains(&known) {
                return Err(Error::Config {
                    line,
                    reason: format!("duplicate key `{key}`"),
                });
            }
            seen.push(known);
            match known {
                "n" => cfg.n = parse_value(line, key, value)?,
                "p" => cfg.p = parse_value(line, key, value)?,
                "l" => cfg.l = parse_value(line, key, value)?,
                "rho" => cfg.rho = parse_value(line, key, value)?,
                "mu" => cfg.mu = parse_value(line, key, value)?,
                "k" => cfg.k = parse_value(line, key, value)?,
                "dt" => cfg.dt = parse_value(line, key, value)?,
                "steps" => cfg.steps = parse_value(line, key, value)?,
                "forcing" => {
                    cfg.forcing = match value {
                        "target" => ForcingKind::TargetPoint,
                        "membrane" => ForcingKind::Membrane,
                        _ => {
                            return Err(Error::Config {
                                line,
                                reason: format!(
                                    "forcing must be target or membrane, got `{value}`"
                                ),
                            })
                        }
                    }
                }
                "delta_mode" => {
                    delta_given = true;
                    cfg.delta_mode = match value {
                        "fixed" => DeltaMode::FixedAtTarget,
                        "moving" => DeltaMode::Moving,
                        _ => {
                            return Err(Error::Config {
                                line,
                                reason: format!(
                                    "delta_mode must be fixed or moving, got `{value}`"
                                ),
                            })
                        }
                    }
                }
                "eps1" => cfg.eps[0] = parse_value(line, key, value)?,
                "eps2" => cfg.eps[1] = parse_value(line, key, value)?,
                "eps3" => cfg.eps[2] = parse_value(line, key, value)?,
                "nonlinear" => cfg.nonlinear = parse_value(line, key, value)?,
                "init" => {
                    if !["gaussian", "zero", "membrane_perturbation", "poiseuille"].contains(&value)
                    {
                        return Err(Error::Config {
                            line,
                            reason: format!("unknown init `{value}`"),
                        });
                    }
                    init_name = value.to_string();
                }
                "amplitude" => amplitude = Some(parse_value(line, key, value)?),
                "f0" => cfg.f0 = parse_value(line, key, value)?,
                "seed" => seed = parse_value(line, key, value)?,
                "record_every" => cfg.record_every = parse_value(line, key, value)?,
                _ => unreachable!(),
            }
        }
        if !delta_given && cfg.forcing == ForcingKind::Membrane {
            cfg.delta_mode = DeltaMode::Moving;
        }
        cfg.init = match init_name.as_str() {
            "gaussian" => Init::Gaussian {
                amplitude: amplitude.unwrap_or(1.0),
                seed,
            },
            "zero" => Init::Zero,
            "membrane_perturbation" => Init::MembranePerturbation {
                amplitude: amplitude.unwrap_or(0.01),
            },
            _ => Init::Poiseuille,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            line: 0,
            reason: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    /// Render in the text format; `parse(to_text())` round-trips.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let forcing = match self.forcing {
            ForcingKind::TargetPoint => "target",
            ForcingKind::Membrane => "membrane",
        };
        let delta = match self.delta_mode {
            DeltaMode::FixedAtTarget => "fixed",
            DeltaMode::Moving => "moving",
        };
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "p = {}", self.p);
        let _ = writeln!(s, "l = {:e}", self.l);
        let _ = writeln!(s, "rho = {:e}", self.rho);
        let _ = writeln!(s, "mu = {:e}", self.mu);
        let _ = writeln!(s, "k = {:e}", self.k);
        let _ = writeln!(s, "dt = {:e}", self.dt);
        let _ = writeln!(s, "steps = {}", self.steps);
        let _ = writeln!(s, "forcing = {forcing}");
        let _ = writeln!(s, "delta_mode = {delta}");
        for (i, e) in self.eps.iter().enumerate() {
            let _ = writeln!(s, "eps{} = {:e}", i + 1, e);
        }
        let _ = writeln!(s, "nonlinear = {}", self.nonlinear);
        match self.init {
            Init::Gaussian { amplitude, seed } => {
                let _ = writeln!(
                    s,
                    "init = gaussian\namplitude = {amplitude:e}\nseed = {seed}"
                );
            }
            Init::Zero => {
                let _ = writeln!(s, "init = zero");
            }
            Init::MembranePerturbation { amplitude } => {
                let _ = writeln!(s, "init = membrane_perturbation\namplitude = {amplitude:e}");
            }
            Init::Poiseuille => {
                let _ = writeln!(s, "init = poiseuille");
            }
        }
        let _ = writeln!(s, "f0 = {:e}", self.f0);
        let _ = writeln!(s, "record_every = {}", self.record_every);
        s
    }
}
