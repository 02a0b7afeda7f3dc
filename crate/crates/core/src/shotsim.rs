//! Monte Carlo simulation of ±1 product measurements on a three-qubit state.
//!
//! For every setting the exact distribution over the eight sign patterns is
//! computed from eigenprojector products, then sampled by inverse CDF. Pattern
//! index bits follow the basis convention (qubit 1 most significant); a set
//! bit means outcome `-1` on that qubit.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bell::Observable;
use crate::error::{Error, Result};
use crate::qcore::{expectation, tensor, DensityMatrix, HermitianOperator, PureState, C64};
use crate::rng;
use crate::stateclasses::{ghz, noisy_ghz};
use crate::witness::{CorrelationEntry, CorrelationRecord, Setting};

#[derive(Debug, Clone, PartialEq)]
pub struct ShotPlan {
    pub state: DensityMatrix,
    /// Human-readable description recorded in output metadata.
    pub description: String,
    pub settings: Vec<Setting>,
    pub shots: u64,
    pub seed: u64,
}

impl ShotPlan {
    pub fn validate(&self) -> Result<()> {
        if self.state.dim() != 8 {
            return Err(Error::DimensionMismatch {
                expected: 8,
                found: self.state.dim(),
            });
        }
        if self.settings.is_empty() {
            return Err(Error::NoSettings);
        }
        if self.shots == 0 {
            return Err(Error::rejected("shots must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub settings: Vec<Setting>,
    /// `counts[s][pattern]` for setting `s`; each row sums to `shots`.
    pub counts: Vec<[u64; 8]>,
    pub shots: u64,
}

/// Sign of the outcome product for a pattern index.
pub fn pattern_sign(pattern: usize) -> f64 {
    if pattern.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn projector(o: &Observable, positive: bool) -> HermitianOperator {
    HermitianOperator::from_mat2(&o.projector(positive), if positive { "P+" } else { "P-" })
}

/// Born-rule probabilities of the eight sign patterns.
pub fn outcome_distribution(state: &DensityMatrix, setting: &[Observable; 3]) -> Result<[f64; 8]> {
    let mut p = [0.0; 8];
    for (pattern, slot) in p.iter_mut().enumerate() {
        let projs: Vec<HermitianOperator> = (0..3)
            .map(|q| projector(&setting[q], (pattern >> (2 - q)) & 1 == 0))
            .collect();
        let joint = tensor(&[&projs[0], &projs[1], &projs[2]])?;
        *slot = expectation(state, &joint)?.max(0.0);
    }
    let total: f64 = p.iter().sum();
    for v in &mut p {
        *v /= total;
    }
    Ok(p)
}

fn draw<R: Rng + ?Sized>(dist: &[f64; 8], shots: u64, rng: &mut R) -> [u64; 8] {
    let mut cdf = [0.0; 8];
    let mut acc = 0.0;
    for (c, p) in cdf.iter_mut().zip(dist) {
        acc += p;
        *c = acc;
    }
    let mut counts = [0u64; 8];
    for _ in 0..shots {
        let u: f64 = rng.random();
        // Rounding can leave cdf[7] slightly below 1; fall through to the last
        // pattern with nonzero probability.
        let idx = cdf
            .iter()
            .position(|c| u < *c)
            .unwrap_or_else(|| dist.iter().rposition(|p| *p > 0.0).unwrap_or(7));
        counts[idx] += 1;
    }
    counts
}

/// Samples every setting independently; setting `i` uses random stream `i`
/// of the plan seed.
pub fn sample_outcomes(plan: &ShotPlan) -> Result<OutcomeCounts> {
    plan.validate()?;
    let counts = plan
        .settings
        .par_iter()
        .enumerate()
        .map(|(i, setting)| {
            let obs = setting.map(|d| d.observable());
            let dist = outcome_distribution(&plan.state, &obs)?;
            let mut rng = rng::stream(plan.seed, i as u64);
            Ok(draw(&dist, plan.shots, &mut rng))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OutcomeCounts {
        settings: plan.settings.clone(),
        counts,
        shots: plan.shots,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShotWarningKind {
    /// One shot: no variance estimate; std-error reported as 0.
    SingleShot,
    /// Every shot gave the same product; std-error reported as 0.
    ZeroVariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotWarning {
    pub setting: usize,
    pub kind: ShotWarningKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatedCorrelations {
    pub record: CorrelationRecord,
    pub warnings: Vec<ShotWarning>,
}

/// Mean sign product and its standard error (unbiased sample variance).
pub fn estimate_correlations(counts: &OutcomeCounts) -> EstimatedCorrelations {
    let n = counts.shots;
    let mut entries = Vec::with_capacity(counts.settings.len());
    let mut warnings = Vec::new();
    for (i, (setting, row)) in counts.settings.iter().zip(&counts.counts).enumerate() {
        let plus: u64 = (0..8)
            .filter(|p| pattern_sign(*p) > 0.0)
            .map(|p| row[p])
            .sum();
        let minus = n - plus;
        let mean = (plus as f64 - minus as f64) / n as f64;
        let std_error = if n == 1 {
            warnings.push(ShotWarning {
                setting: i,
                kind: ShotWarningKind::SingleShot,
            });
            0.0
        } else if plus == 0 || minus == 0 {
            warnings.push(ShotWarning {
                setting: i,
                kind: ShotWarningKind::ZeroVariance,
            });
            0.0
        } else {
            let nf = n as f64;
            let variance = (nf * (1.0 - mean * mean) / (nf - 1.0)).max(0.0);
            (variance / nf).sqrt()
        };
        entries.push(CorrelationEntry {
            setting: *setting,
            value: mean,
            std_error,
        });
    }
    EstimatedCorrelations {
        record: CorrelationRecord {
            entries,
            metadata: None,
        },
        warnings,
    }
}

/// Samples and estimates; the record's metadata names the state, shots and seed.
pub fn run_experiment(plan: &ShotPlan) -> Result<EstimatedCorrelations> {
    let counts = sample_outcomes(plan)?;
    let mut out = estimate_correlations(&counts);
    out.record.metadata = Some(format!(
        "simulated: state={}; shots={} per setting; seed={}",
        plan.description, plan.shots, plan.seed
    ));
    Ok(out)
}

/// State selector in plan files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PlanState {
    Named(String),
    NoisyGhz { noisy_ghz: f64 },
    Amplitudes { amplitudes: Vec<Amplitude> },
}

/// A real amplitude or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Amplitude {
    Real(f64),
    Complex([f64; 2]),
}

impl Amplitude {
    pub fn to_complex(self) -> C64 {
        match self {
            Amplitude::Real(re) => C64::new(re, 0.0),
            Amplitude::Complex([re, im]) => C64::new(re, im),
        }
    }
}

impl PlanState {
    /// Resolves to a density matrix and a description. Amplitude vectors are
    /// rescaled to unit norm.
    pub fn resolve(&self) -> Result<(DensityMatrix, String)> {
        match self {
            PlanState::Named(name) if name == "ghz" => Ok((ghz().to_density(), "ghz".into())),
            PlanState::Named(name) => Err(Error::rejected(format!("unknown state {name:?}"))),
            PlanState::NoisyGhz { noisy_ghz: v } => Ok((noisy_ghz(*v)?, format!("noisy_ghz({v})"))),
            PlanState::Amplitudes { amplitudes } => {
                let amps = amplitudes.iter().map(|a| a.to_complex()).collect();
                let s = PureState::normalized(amps)?;
                if s.dim() != 8 {
                    return Err(Error::DimensionMismatch {
                        expected: 8,
                        found: s.dim(),
                    });
                }
                Ok((s.to_density(), "amplitudes".into()))
            }
        }
    }
}

/// JSON plan file: `{"state": ..., "settings": [...], "shots": n, "seed": s}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub state: PlanState,
    pub settings: Vec<Setting>,
    pub shots: u64,
    pub seed: u64,
}

impl PlanFile {
    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(Error::from_json)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_plan(&self) -> Result<ShotPlan> {
        let (state, description) = self.state.resolve()?;
        let plan = ShotPlan {
            state,
            description,
            settings: self.settings.clone(),
            shots: self.shots,
            seed: self.seed,
        };
        plan.validate()?;
        Ok(plan)
    }
}

/// The four settings of the Mermin operator.
pub fn mermin_settings() -> Vec<Setting> {
    use crate::witness::SettingDescriptor::{X, Y};
    vec![[X, X, X], [Y, Y, X], [X, Y, Y], [Y, X, Y]]
}
