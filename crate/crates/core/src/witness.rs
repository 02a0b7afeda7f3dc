//! Correlation records, `<M3>` estimation with error propagation, and the
//! entanglement verdict.
//!
//! File format (UTF-8 JSON):
//!
//! ```json
//! {
//!   "entries": [
//!     {"setting": ["X", "X", "X"], "value": 0.7075, "std_error": 0.045},
//!     {"setting": ["Y", {"bloch": [0.0, 1.0, 0.0]}, "X"], "value": -0.7, "std_error": 0.05}
//!   ],
//!   "metadata": "free text"
//! }
//! ```
//!
//! Errors on different settings are treated as independent and Gaussian, so
//! they combine in quadrature.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bell::{MeasurementSettings, Observable, SigmaTerm};
use crate::error::{Error, Result};

/// Per-qubit measurement label as written in correlation files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSetting", into = "RawSetting")]
pub enum SettingDescriptor {
    X,
    Y,
    Bloch(Observable),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawSetting {
    Axis(String),
    Bloch { bloch: [f64; 3] },
}

impl TryFrom<RawSetting> for SettingDescriptor {
    type Error = Error;

    fn try_from(raw: RawSetting) -> Result<Self> {
        match raw {
            RawSetting::Axis(s) if s == "X" => Ok(SettingDescriptor::X),
            RawSetting::Axis(s) if s == "Y" => Ok(SettingDescriptor::Y),
            RawSetting::Axis(s) => Err(Error::rejected(format!(
                "unknown setting {s:?}; expected \"X\", \"Y\" or {{\"bloch\": [x, y, z]}}"
            ))),
            RawSetting::Bloch { bloch } => Ok(SettingDescriptor::Bloch(Observable::new(bloch)?)),
        }
    }
}

impl From<SettingDescriptor> for RawSetting {
    fn from(s: SettingDescriptor) -> Self {
        match s {
            SettingDescriptor::X => RawSetting::Axis("X".into()),
            SettingDescriptor::Y => RawSetting::Axis("Y".into()),
            SettingDescriptor::Bloch(o) => RawSetting::Bloch { bloch: o.bloch() },
        }
    }
}

impl SettingDescriptor {
    pub fn observable(&self) -> Observable {
        match self {
            SettingDescriptor::X => Observable::x_axis(),
            SettingDescriptor::Y => Observable::y_axis(),
            SettingDescriptor::Bloch(o) => *o,
        }
    }

    /// Axis labels for X and Y directions, explicit Bloch vectors otherwise.
    pub fn from_observable(o: &Observable) -> Self {
        if *o == Observable::x_axis() {
            SettingDescriptor::X
        } else if *o == Observable::y_axis() {
            SettingDescriptor::Y
        } else {
            SettingDescriptor::Bloch(*o)
        }
    }
}

impl fmt::Display for SettingDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SettingDescriptor::X => f.write_str("X"),
            SettingDescriptor::Y => f.write_str("Y"),
            SettingDescriptor::Bloch(o) => {
                let [x, y, z] = o.bloch();
                write!(f, "({x}, {y}, {z})")
            }
        }
    }
}

pub type Setting = [SettingDescriptor; 3];

fn setting_label(s: &Setting) -> String {
    format!("({}, {}, {})", s[0], s[1], s[2])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEntry {
    pub setting: Setting,
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRecord {
    pub entries: Vec<CorrelationEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<String>,
}

impl CorrelationRecord {
    /// Checks the record invariants: nonempty, finite nonnegative errors, and
    /// every value within `[-1 - 3σ, 1 + 3σ]`.
    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::NoSettings);
        }
        for (i, e) in self.entries.iter().enumerate() {
            if !e.std_error.is_finite() || e.std_error < 0.0 {
                return Err(Error::Invariant {
                    entry: i,
                    message: format!("std_error {} must be finite and nonnegative", e.std_error),
                });
            }
            let band = 1.0 + 3.0 * e.std_error;
            if !e.value.is_finite() || e.value.abs() > band {
                return Err(Error::Invariant {
                    entry: i,
                    message: format!(
                        "value outside sanity band: {} not in [-{band}, {band}]",
                        e.value
                    ),
                });
            }
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let record: CorrelationRecord = serde_json::from_str(s).map_err(Error::from_json)?;
        record.validate()?;
        Ok(record)
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("record serializes");
        s.push('\n');
        s
    }

    pub fn store(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }

    fn find(&self, setting: &[Observable; 3]) -> Result<&CorrelationEntry> {
        let mut hits = self.entries.iter().filter(|e| {
            e.setting
                .iter()
                .map(|d| d.observable())
                .eq(setting.iter().copied())
        });
        let label = || setting_label(&setting.map(|o| SettingDescriptor::from_observable(&o)));
        let first = hits.next().ok_or_else(|| Error::MissingSetting(label()))?;
        if hits.next().is_some() {
            return Err(Error::DuplicateSetting(label()));
        }
        Ok(first)
    }
}

/// Reads and validates a correlation file.
pub fn load_correlations(path: impl AsRef<Path>) -> Result<CorrelationRecord> {
    let text = std::fs::read_to_string(path)?;
    CorrelationRecord::from_json_str(&text)
}

pub fn load_correlations_from_reader<R: Read>(mut reader: R) -> Result<CorrelationRecord> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    CorrelationRecord::from_json_str(&text)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

fn estimate_terms(record: &CorrelationRecord, terms: &[SigmaTerm]) -> Result<Estimate> {
    let mut value = 0.0;
    let mut variance = 0.0;
    for (sign, setting) in terms {
        let e = record.find(setting)?;
        value += sign * e.value;
        variance += e.std_error * e.std_error;
    }
    Ok(Estimate {
        value,
        std_error: variance.sqrt(),
    })
}

/// `E(XXX) - E(YYX) - E(XYY) - E(YXY)` with errors added in quadrature.
pub fn estimate_m3(record: &CorrelationRecord) -> Result<Estimate> {
    estimate_terms(record, &MeasurementSettings::mermin_axes().terms())
}

/// The signed Σ combination for arbitrary settings.
pub fn estimate_sigma(
    record: &CorrelationRecord,
    settings: &MeasurementSettings,
) -> Result<Estimate> {
    estimate_terms(record, &settings.terms())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSet {
    pub lhv: f64,
    pub biseparable_orthogonal: f64,
    pub biseparable_free: f64,
    pub algebraic_max: f64,
}

impl Default for BoundSet {
    fn default() -> Self {
        BoundSet {
            lhv: 2.0,
            biseparable_orthogonal: 2.0,
            biseparable_free: 2.0 * SQRT_2,
            algebraic_max: 4.0,
        }
    }
}

impl BoundSet {
    pub fn validate(&self) -> Result<()> {
        let ordered = self.lhv <= self.biseparable_orthogonal
            && self.biseparable_orthogonal < self.biseparable_free
            && self.biseparable_free < self.algebraic_max;
        if ordered && self.lhv > 0.0 {
            Ok(())
        } else {
            Err(Error::rejected(format!("bounds out of order: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Classification {
    #[serde(rename = "consistent-with-LHV")]
    ConsistentWithLhv,
    /// With orthogonal observables the LHV and biseparable bounds coincide at 2,
    /// so exceeding 2 certifies genuine tripartite entanglement.
    #[serde(rename = "violates-LHV-and-biseparable-orthogonal")]
    ViolatesLhvAndBiseparableOrthogonal,
    #[serde(rename = "violates-biseparable-any-observables")]
    ViolatesBiseparableAnyObservables,
}

impl Classification {
    pub fn tag(&self) -> &'static str {
        match self {
            Classification::ConsistentWithLhv => "consistent-with-LHV",
            Classification::ViolatesLhvAndBiseparableOrthogonal => {
                "violates-LHV-and-biseparable-orthogonal"
            }
            Classification::ViolatesBiseparableAnyObservables => {
                "violates-biseparable-any-observables"
            }
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            Classification::ConsistentWithLhv => "consistent with a local hidden variable model",
            Classification::ViolatesLhvAndBiseparableOrthogonal => {
                "genuine three-qubit entanglement (orthogonal observables)"
            }
            Classification::ViolatesBiseparableAnyObservables => {
                "genuine three-qubit entanglement (any observables)"
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub estimate: f64,
    pub std_error: f64,
    /// `(|estimate| - 2) / std_error`; infinite when the error is zero.
    pub sigma_above_2: f64,
    /// `(|estimate| - 2√2) / std_error`.
    pub sigma_above_2sqrt2: f64,
    pub classification: Classification,
    pub confidence: f64,
}

impl Verdict {
    /// One-line summary, e.g. `2.83 ± 0.09, 9.22σ above 2, genuine ...`.
    pub fn summary(&self) -> String {
        format!(
            "{:.2} ± {:.2}, {}σ above 2, {}",
            self.estimate,
            self.std_error,
            fmt_sigma(self.sigma_above_2),
            self.classification.description()
        )
    }
}

fn fmt_sigma(s: f64) -> String {
    if s == f64::INFINITY {
        "∞".into()
    } else if s == f64::NEG_INFINITY {
        "-∞".into()
    } else {
        format!("{s:.2}")
    }
}

fn sigma_distance(excess: f64, std_error: f64) -> f64 {
    if std_error > 0.0 {
        excess / std_error
    } else if excess > 0.0 {
        f64::INFINITY
    } else if excess < 0.0 {
        f64::NEG_INFINITY
    } else {
        0.0
    }
}

pub const DEFAULT_CONFIDENCE: f64 = 3.0;

/// Strongest tier whose threshold `bound + k·std_error` the magnitude of
/// `value` strictly exceeds.
pub fn classify(value: f64, std_error: f64, bounds: &BoundSet, k: f64) -> Result<Verdict> {
    if std_error.is_nan() || std_error < 0.0 {
        return Err(Error::rejected(format!("negative std-error {std_error}")));
    }
    if k.is_nan() || k <= 0.0 {
        return Err(Error::rejected(format!(
            "confidence multiplier {k} must be positive"
        )));
    }
    bounds.validate()?;
    let magnitude = value.abs();
    let margin = k * std_error;
    let classification = if magnitude > bounds.biseparable_free + margin {
        Classification::ViolatesBiseparableAnyObservables
    } else if magnitude > bounds.lhv.max(bounds.biseparable_orthogonal) + margin {
        Classification::ViolatesLhvAndBiseparableOrthogonal
    } else {
        Classification::ConsistentWithLhv
    };
    Ok(Verdict {
        estimate: value,
        std_error,
        sigma_above_2: sigma_distance(magnitude - bounds.lhv, std_error),
        sigma_above_2sqrt2: sigma_distance(magnitude - bounds.biseparable_free, std_error),
        classification,
        confidence: k,
    })
}

/// Correlation file for the three-photon GHZ experiment's aggregate
/// `<M3> = 2.83 ± 0.09`, split evenly over the four settings.
pub const PAN2000_FIXTURE: &str = include_str!("../fixtures/pan2000.json");

pub fn pan2000_record() -> CorrelationRecord {
    CorrelationRecord::from_json_str(PAN2000_FIXTURE).expect("bundled fixture is valid")
}
