//! Separability classes of three-qubit pure states, their parametrizations,
//! samplers and the named fixture states.
//!
//! Parameter layouts (`ClassParameters::params`):
//!
//! | class            | length | layout                                                       |
//! |------------------|--------|--------------------------------------------------------------|
//! | `full-separable` | 6      | `(θ, φ)` for qubits 1, 2, 3                                   |
//! | `bisep-*`        | 10     | 4 complex pair amplitudes as `re, im` (8 reals), then `(θ, φ)` of the single qubit |
//! | `unrestricted`   | 16     | 8 complex amplitudes as `re, im`                              |
//!
//! A single qubit `(θ, φ)` decodes to `cos(θ/2)|0> + e^{iφ} sin(θ/2)|1>`. Raw
//! amplitude blocks are normalized on decode, so every finite nonzero vector
//! is a valid parameter point.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{gaussian_amplitudes, mix, DensityMatrix, PureState, C64, PHYSICAL_TOL};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PartitionClass {
    FullSeparable,
    /// Qubits 1 and 2 entangled, qubit 3 separate.
    Bisep12_3,
    /// Qubits 1 and 3 entangled, qubit 2 separate.
    Bisep13_2,
    /// Qubits 2 and 3 entangled, qubit 1 separate.
    Bisep1_23,
    Unrestricted,
}

impl PartitionClass {
    pub const ALL: [PartitionClass; 5] = [
        PartitionClass::FullSeparable,
        PartitionClass::Bisep12_3,
        PartitionClass::Bisep13_2,
        PartitionClass::Bisep1_23,
        PartitionClass::Unrestricted,
    ];

    pub const BISEPARABLE: [PartitionClass; 3] = [
        PartitionClass::Bisep12_3,
        PartitionClass::Bisep13_2,
        PartitionClass::Bisep1_23,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            PartitionClass::FullSeparable => "full-separable",
            PartitionClass::Bisep12_3 => "bisep-12|3",
            PartitionClass::Bisep13_2 => "bisep-13|2",
            PartitionClass::Bisep1_23 => "bisep-1|23",
            PartitionClass::Unrestricted => "unrestricted",
        }
    }

    pub fn param_len(&self) -> usize {
        match self {
            PartitionClass::FullSeparable => 6,
            PartitionClass::Unrestricted => 16,
            _ => 10,
        }
    }

    /// Entangled pair and the separate qubit (0-based) for biseparable classes.
    pub fn pair_and_single(&self) -> Option<([usize; 2], usize)> {
        match self {
            PartitionClass::Bisep12_3 => Some(([0, 1], 2)),
            PartitionClass::Bisep13_2 => Some(([0, 2], 1)),
            PartitionClass::Bisep1_23 => Some(([1, 2], 0)),
            _ => None,
        }
    }

    pub fn is_biseparable(&self) -> bool {
        self.pair_and_single().is_some()
    }
}

impl fmt::Display for PartitionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for PartitionClass {
    type Err = Error;

    /// Accepts the canonical tags; `|` may also be written as `-` or `_`.
    fn from_str(s: &str) -> Result<Self> {
        let canonical = match s {
            "bisep-12-3" | "bisep-12_3" => "bisep-12|3",
            "bisep-13-2" | "bisep-13_2" => "bisep-13|2",
            "bisep-1-23" | "bisep-1_23" => "bisep-1|23",
            other => other,
        };
        PartitionClass::ALL
            .into_iter()
            .find(|c| c.tag() == canonical)
            .ok_or_else(|| Error::rejected(format!("unknown class {s:?}")))
    }
}

impl TryFrom<String> for PartitionClass {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PartitionClass> for String {
    fn from(c: PartitionClass) -> Self {
        c.tag().to_string()
    }
}

/// A point in a class's parameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassParameters {
    pub partition: PartitionClass,
    pub params: Vec<f64>,
}

impl ClassParameters {
    pub fn new(partition: PartitionClass, params: Vec<f64>) -> Result<Self> {
        if params.len() != partition.param_len() {
            return Err(Error::rejected(format!(
                "{} takes {} parameters, got {}",
                partition,
                partition.param_len(),
                params.len()
            )));
        }
        Ok(ClassParameters { partition, params })
    }
}

fn qubit_from_angles(theta: f64, phi: f64) -> PureState {
    let (s, c) = (theta / 2.0).sin_cos();
    PureState::new(vec![C64::new(c, 0.0), C64::from_polar(s, phi)]).expect("cos²+sin² = 1")
}

fn angles_from_bloch(r: [f64; 3]) -> (f64, f64) {
    (r[2].clamp(-1.0, 1.0).acos(), r[1].atan2(r[0]))
}

fn complex_block(reals: &[f64]) -> Vec<C64> {
    reals
        .chunks_exact(2)
        .map(|p| C64::new(p[0], p[1]))
        .collect()
}

fn flatten_block(amps: &[C64]) -> Vec<f64> {
    amps.iter().flat_map(|a| [a.re, a.im]).collect()
}

/// Permutation taking the `(pair0, pair1, single)` ordering back to standard order.
fn standard_order(pair: [usize; 2], single: usize) -> [usize; 3] {
    let mut perm = [0; 3];
    perm[pair[0]] = 0;
    perm[pair[1]] = 1;
    perm[single] = 2;
    perm
}

/// The pair and single-qubit factors of a biseparable parameter point.
pub fn factors(p: &ClassParameters) -> Result<(PureState, PureState)> {
    ClassParameters::new(p.partition, p.params.clone())?;
    if !p.partition.is_biseparable() {
        return Err(Error::rejected(format!(
            "{} is not biseparable",
            p.partition
        )));
    }
    let pair = PureState::normalized(complex_block(&p.params[..8]))?;
    let single = qubit_from_angles(p.params[8], p.params[9]);
    Ok((pair, single))
}

/// Decodes a parameter point to the corresponding pure state.
pub fn decode(p: &ClassParameters) -> Result<PureState> {
    if p.params.len() != p.partition.param_len() {
        return Err(Error::rejected(format!(
            "{} takes {} parameters, got {}",
            p.partition,
            p.partition.param_len(),
            p.params.len()
        )));
    }
    match p.partition {
        PartitionClass::FullSeparable => {
            let q = |k: usize| qubit_from_angles(p.params[2 * k], p.params[2 * k + 1]);
            q(0).kron(&q(1))?.kron(&q(2))
        }
        PartitionClass::Unrestricted => PureState::normalized(complex_block(&p.params)),
        bisep => {
            let (pair_q, single_q) = bisep.pair_and_single().expect("biseparable");
            let (pair, single) = factors(p)?;
            let ordered = pair.kron(&single)?;
            ordered.permute_qubits(&standard_order(pair_q, single_q))
        }
    }
}

fn pure_qubit_angles(state: &PureState, qubit: usize) -> Result<(f64, f64)> {
    let r = state.reduced_qubit(qubit)?.bloch_vector()?;
    let len = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    if len < 1.0 - PHYSICAL_TOL {
        return Err(Error::InvalidState(format!(
            "qubit {} is entangled with the rest (Bloch length {len})",
            qubit + 1
        )));
    }
    Ok(angles_from_bloch(r))
}

/// Finds parameters of `partition` that decode to `state` up to a global phase.
///
/// Fails when the state does not factorize across the partition.
pub fn encode(state: &PureState, partition: PartitionClass) -> Result<ClassParameters> {
    if state.dim() != 8 {
        return Err(Error::DimensionMismatch {
            expected: 8,
            found: state.dim(),
        });
    }
    let params = match partition {
        PartitionClass::Unrestricted => flatten_block(state.amplitudes()),
        PartitionClass::FullSeparable => {
            let mut params = Vec::with_capacity(6);
            for q in 0..3 {
                let (t, f) = pure_qubit_angles(state, q)?;
                params.extend([t, f]);
            }
            params
        }
        bisep => {
            let (pair_q, single_q) = bisep.pair_and_single().expect("biseparable");
            let (theta, phi) = pure_qubit_angles(state, single_q)?;
            let single = qubit_from_angles(theta, phi);
            let ordered = state.permute_qubits(&[pair_q[0], pair_q[1], single_q])?;
            let a = ordered.amplitudes();
            let s = single.amplitudes();
            let pair: Vec<C64> = (0..4)
                .map(|i| a[2 * i] * s[0].conj() + a[2 * i + 1] * s[1].conj())
                .collect();
            let mut params = flatten_block(&pair);
            params.extend([theta, phi]);
            params
        }
    };
    let encoded = ClassParameters::new(partition, params)?;
    let fidelity = decode(&encoded)?.inner(state)?.norm_sqr();
    if fidelity < 1.0 - PHYSICAL_TOL {
        return Err(Error::InvalidState(format!(
            "state is not in class {partition} (reconstruction fidelity {fidelity})"
        )));
    }
    Ok(encoded)
}

/// Whether `state` factorizes as `partition` requires, up to `tol` in Bloch length.
pub fn is_member(state: &PureState, partition: PartitionClass, tol: f64) -> bool {
    let pure = |q: usize| {
        state
            .reduced_qubit(q)
            .and_then(|r| r.bloch_vector())
            .map(|b| (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt() >= 1.0 - tol)
            .unwrap_or(false)
    };
    match partition {
        PartitionClass::Unrestricted => state.dim() == 8,
        PartitionClass::FullSeparable => (0..3).all(pure),
        bisep => pure(bisep.pair_and_single().expect("biseparable").1),
    }
}

fn sphere_angles<R: Rng + ?Sized>(rng: &mut R) -> [f64; 2] {
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    [(1.0 - 2.0 * u).acos(), 2.0 * PI * v]
}

pub(crate) fn sample_with<R: Rng + ?Sized>(
    partition: PartitionClass,
    rng: &mut R,
) -> ClassParameters {
    let params = match partition {
        PartitionClass::FullSeparable => (0..3).flat_map(|_| sphere_angles(rng)).collect(),
        PartitionClass::Unrestricted => flatten_block(&gaussian_amplitudes(8, rng)),
        _ => {
            let mut p = flatten_block(&gaussian_amplitudes(4, rng));
            p.extend(sphere_angles(rng));
            p
        }
    };
    ClassParameters { partition, params }
}

/// Random parameters of the class: Gaussian amplitude blocks and uniformly
/// distributed single-qubit Bloch directions. Deterministic per seed.
pub fn sample(partition: PartitionClass, seed: u64) -> ClassParameters {
    sample_with(partition, &mut rng::stream(seed, 0))
}

/// `(|000> + |111>)/√2`.
pub fn ghz() -> PureState {
    let mut a = vec![C64::new(0.0, 0.0); 8];
    a[0] = C64::new(FRAC_1_SQRT_2, 0.0);
    a[7] = C64::new(FRAC_1_SQRT_2, 0.0);
    PureState::new(a).expect("normalized")
}

/// `(|00> + |11>)(|0> + |1>)/2`, the biseparable state with `<M3> = 2`.
pub fn sharp_bisep() -> PureState {
    let mut a = vec![C64::new(0.0, 0.0); 8];
    for idx in [0b000, 0b001, 0b110, 0b111] {
        a[idx] = C64::new(0.5, 0.0);
    }
    PureState::new(a).expect("normalized")
}

/// Parameters of [`sharp_bisep`] in the `bisep-12|3` layout.
pub fn sharp_bisep_params() -> ClassParameters {
    let h = FRAC_1_SQRT_2;
    ClassParameters {
        partition: PartitionClass::Bisep12_3,
        params: vec![h, 0.0, 0.0, 0.0, 0.0, 0.0, h, 0.0, PI / 2.0, 0.0],
    }
}

/// `V |GHZ><GHZ| + (1 - V) I/8`.
pub fn noisy_ghz(visibility: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&visibility) {
        return Err(Error::rejected(format!(
            "visibility {visibility} outside [0, 1]"
        )));
    }
    mix(
        &[ghz().to_density(), DensityMatrix::maximally_mixed(8)?],
        &[visibility, 1.0 - visibility],
    )
}

/// Computational basis state from a bit string such as `"010"` (qubit 1 first).
pub fn basis_state(bits: &str) -> Result<PureState> {
    if bits.is_empty() || bits.len() > 3 || !bits.chars().all(|c| c == '0' || c == '1') {
        return Err(Error::rejected(format!("invalid basis label {bits:?}")));
    }
    let index = usize::from_str_radix(bits, 2).expect("binary digits");
    PureState::basis(1 << bits.len(), index)
}

/// Convex mixture of decoded biseparable pure states; partitions may differ.
pub fn mix_biseparable(components: &[(ClassParameters, f64)]) -> Result<DensityMatrix> {
    let mut states = Vec::with_capacity(components.len());
    let mut weights = Vec::with_capacity(components.len());
    for (p, w) in components {
        if p.partition == PartitionClass::Unrestricted {
            return Err(Error::rejected(
                "unrestricted component in biseparable mixture",
            ));
        }
        states.push(decode(p)?.to_density());
        weights.push(*w);
    }
    mix(&states, &weights)
}
