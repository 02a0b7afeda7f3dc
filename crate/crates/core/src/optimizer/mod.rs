//! Multi-start derivative-free maximization of `|<M3>|` or `|Σ|` over a
//! separability class, optionally jointly over the six measurement directions.
//!
//! The search vector is the class parameter vector (see
//! [`crate::stateclasses`]) followed, when settings are free, by twelve
//! spherical angles `(θ, φ)` for a, a', b, b', c, c'. Restart `k` starts from a
//! point drawn from random stream `k` of the master seed, so results do not
//! depend on how restarts are scheduled.

pub mod simplex;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bell::{sigma_value, MeasurementSettings};
use crate::error::{Error, Result};
use crate::rng;
use crate::stateclasses::{decode, sample_with, ClassParameters, PartitionClass};

use simplex::{minimize, SimplexOptions};

/// Excess over a claimed bound that counts as a violation.
pub const VIOLATION_MARGIN: f64 = 1e-6;

const SETTING_ANGLES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Functional {
    /// `M3` with settings pinned to the X/Y axes.
    MerminFixed,
    /// `Σ`; settings are X/Y unless the config frees them.
    SigmaGeneral,
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Functional::MerminFixed => "mermin",
            Functional::SigmaGeneral => "sigma",
        })
    }
}

impl FromStr for Functional {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mermin" | "mermin-fixed" => Ok(Functional::MerminFixed),
            "sigma" | "sigma-general" => Ok(Functional::SigmaGeneral),
            _ => Err(Error::rejected(format!("unknown functional {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizationConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub optimize_settings: bool,
}

impl Default for OptimizationConfig {
    fn default() -> Self {
        OptimizationConfig {
            restarts: 64,
            max_iterations: 2000,
            tolerance: 1e-8,
            seed: 0,
            optimize_settings: false,
        }
    }
}

impl OptimizationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::rejected("restarts must be at least 1"));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::rejected("tolerance must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub class: PartitionClass,
    pub functional: Functional,
    pub best_value: f64,
    pub best_state: ClassParameters,
    pub best_settings: MeasurementSettings,
    pub best_restart: usize,
    pub per_restart: Vec<f64>,
    pub iterations: usize,
    /// Best objective after each iteration of each restart.
    #[serde(skip)]
    pub trajectories: Vec<Vec<f64>>,
}

/// Whether the Σ search includes the measurement directions.
fn settings_free(functional: Functional, cfg: &OptimizationConfig) -> bool {
    functional == Functional::SigmaGeneral && cfg.optimize_settings
}

/// Splits a search vector into the state parameters and the settings.
fn split(
    class: PartitionClass,
    free: bool,
    x: &[f64],
) -> Result<(ClassParameters, MeasurementSettings)> {
    let n = class.param_len();
    let state = ClassParameters::new(class, x[..n].to_vec())?;
    let settings = if free {
        MeasurementSettings::from_angles(&x[n..])?
    } else {
        MeasurementSettings::mermin_axes()
    };
    Ok((state, settings))
}

/// `|value|` of the functional at a search point.
fn objective(class: PartitionClass, free: bool, x: &[f64]) -> Result<f64> {
    let (state, settings) = split(class, free, x)?;
    Ok(sigma_value(&decode(&state)?, &settings)?.abs())
}

fn starting_point<R: Rng + ?Sized>(class: PartitionClass, free: bool, rng: &mut R) -> Vec<f64> {
    let mut x = sample_with(class, rng).params;
    if free {
        x.extend((0..SETTING_ANGLES).map(|k| {
            let u: f64 = rng.random();
            if k % 2 == 0 {
                (1.0 - 2.0 * u).acos()
            } else {
                std::f64::consts::TAU * u
            }
        }));
    }
    x
}

struct RestartOutcome {
    value: f64,
    x: Vec<f64>,
    iterations: usize,
    trajectory: Vec<f64>,
}

/// Maximizes the functional over the class.
pub fn maximize(
    class: PartitionClass,
    functional: Functional,
    cfg: &OptimizationConfig,
) -> Result<OptimizationResult> {
    maximize_observed(class, functional, cfg, |_: &ClassParameters| {})
}

/// [`maximize`], calling `observer` with the state parameters of every
/// objective evaluation.
pub fn maximize_observed<F>(
    class: PartitionClass,
    functional: Functional,
    cfg: &OptimizationConfig,
    observer: F,
) -> Result<OptimizationResult>
where
    F: Fn(&ClassParameters) + Sync,
{
    cfg.validate()?;
    let free = settings_free(functional, cfg);
    let opts = SimplexOptions {
        max_iterations: cfg.max_iterations,
        tolerance: cfg.tolerance,
        initial_step: 0.5,
    };
    let n_state = class.param_len();

    let outcomes: Vec<RestartOutcome> = (0..cfg.restarts)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng::stream(cfg.seed, k as u64);
            let x0 = starting_point(class, free, &mut rng);
            let out = minimize(
                |x| {
                    if let Ok(p) = ClassParameters::new(class, x[..n_state].to_vec()) {
                        observer(&p);
                    }
                    objective(class, free, x).map_or(f64::NAN, |v| -v)
                },
                &x0,
                &opts,
            );
            RestartOutcome {
                value: -out.fx,
                x: out.x,
                iterations: out.iterations,
                trajectory: out.trajectory.iter().map(|v| -v).collect(),
            }
        })
        .collect();

    // Highest value wins; ties go to the lowest restart index.
    let (best_restart, best) = outcomes
        .iter()
        .enumerate()
        .fold(None::<(usize, &RestartOutcome)>, |acc, (k, o)| match acc {
            Some((_, b)) if b.value >= o.value => acc,
            _ => Some((k, o)),
        })
        .expect("at least one restart");
    let (best_state, best_settings) = split(class, free, &best.x)?;

    Ok(OptimizationResult {
        class,
        functional,
        best_value: best.value,
        best_state,
        best_settings,
        best_restart,
        per_restart: outcomes.iter().map(|o| o.value).collect(),
        iterations: outcomes.iter().map(|o| o.iterations).sum(),
        trajectories: outcomes.into_iter().map(|o| o.trajectory).collect(),
    })
}

/// Re-evaluates `|value|` at a result's reported optimum.
pub fn reevaluate(result: &OptimizationResult) -> Result<f64> {
    Ok(sigma_value(&decode(&result.best_state)?, &result.best_settings)?.abs())
}

/// Largest attainable value of the functional over the class.
pub fn known_maximum(class: PartitionClass, functional: Functional, free_settings: bool) -> f64 {
    let free = functional == Functional::SigmaGeneral && free_settings;
    match (class, free) {
        (PartitionClass::Unrestricted, _) => 4.0,
        (PartitionClass::FullSeparable, false) => 1.0,
        (PartitionClass::FullSeparable, true) => 2.0,
        (_, false) => 2.0,
        (_, true) => 2.0 * std::f64::consts::SQRT_2,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub class: PartitionClass,
    pub functional: Functional,
    pub free_settings: bool,
    pub claimed_bound: f64,
    pub achieved: f64,
    /// `claimed_bound - achieved`.
    pub gap: f64,
    /// Set when `achieved > claimed_bound + VIOLATION_MARGIN`.
    pub violation: bool,
    pub witness_state: ClassParameters,
    pub witness_settings: MeasurementSettings,
}

/// Searches for a counterexample to `claimed_bound` and reports the best
/// value found.
pub fn certify_bound(
    class: PartitionClass,
    functional: Functional,
    claimed_bound: f64,
    cfg: &OptimizationConfig,
) -> Result<BoundCertificate> {
    if claimed_bound.is_nan() || claimed_bound <= 0.0 {
        return Err(Error::rejected("claimed bound must be positive"));
    }
    let r = maximize(class, functional, cfg)?;
    Ok(BoundCertificate {
        class,
        functional,
        free_settings: settings_free(functional, cfg),
        claimed_bound,
        achieved: r.best_value,
        gap: claimed_bound - r.best_value,
        violation: r.best_value > claimed_bound + VIOLATION_MARGIN,
        witness_state: r.best_state,
        witness_settings: r.best_settings,
    })
}
