//! Dichotomic observables, the Mermin operator and the general Σ combination.
//!
//! The Mermin operator is
//!
//! ```text
//! M3 = XXX - YYX - XYY - YXY
//! ```
//!
//! and the Σ combination for settings `(a, a', b, b', c, c')` is the signed operator
//!
//! ```text
//! a⊗b⊗c - a'⊗b'⊗c - a⊗b'⊗c' - a'⊗b⊗c'
//! ```
//!
//! which reduces to `M3` when the unprimed settings are X and the primed ones Y.
//! The absolute value is applied only when results are classified.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{
    self, expectation, pauli_x2, pauli_y2, pauli_z2, tensor, HermitianOperator, Mat2, PureState,
    QuantumState, C64, CONSTRUCTION_TOL,
};

/// A ±1-valued spin observable `n·(X, Y, Z)` for a unit Bloch vector `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct Observable {
    bloch: [f64; 3],
}

impl Observable {
    pub fn new(bloch: [f64; 3]) -> Result<Self> {
        let norm = bloch.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > CONSTRUCTION_TOL {
            return Err(Error::rejected(format!(
                "Bloch vector {bloch:?} has norm {norm}, not 1"
            )));
        }
        Ok(Observable { bloch })
    }

    pub const fn x_axis() -> Self {
        Observable {
            bloch: [1.0, 0.0, 0.0],
        }
    }

    pub const fn y_axis() -> Self {
        Observable {
            bloch: [0.0, 1.0, 0.0],
        }
    }

    pub const fn z_axis() -> Self {
        Observable {
            bloch: [0.0, 0.0, 1.0],
        }
    }

    /// Direction `(sin θ cos φ, sin θ sin φ, cos θ)`; unit norm by construction.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Observable {
            bloch: [st * cp, st * sp, ct],
        }
    }

    pub fn bloch(&self) -> [f64; 3] {
        self.bloch
    }

    pub(crate) fn mat2(&self) -> Mat2 {
        let [nx, ny, nz] = self.bloch;
        let (x, y, z) = (pauli_x2(), pauli_y2(), pauli_z2());
        let mut m = [[C64::new(0.0, 0.0); 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                m[r][c] = x[r][c] * nx + y[r][c] * ny + z[r][c] * nz;
            }
        }
        m
    }

    /// Eigenprojector onto outcome `+1` (`positive`) or `-1`.
    pub(crate) fn projector(&self, positive: bool) -> Mat2 {
        let s = if positive { 0.5 } else { -0.5 };
        let o = self.mat2();
        let mut p = [[C64::new(0.0, 0.0); 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                let id = if r == c { 0.5 } else { 0.0 };
                p[r][c] = o[r][c] * s + id;
            }
        }
        p
    }

    fn label(&self) -> String {
        match self.bloch {
            [1.0, 0.0, 0.0] => "X".into(),
            [0.0, 1.0, 0.0] => "Y".into(),
            [0.0, 0.0, 1.0] => "Z".into(),
            [x, y, z] => format!("n({x:.4},{y:.4},{z:.4})"),
        }
    }
}

impl TryFrom<[f64; 3]> for Observable {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        Observable::new(v)
    }
}

impl From<Observable> for [f64; 3] {
    fn from(o: Observable) -> Self {
        o.bloch
    }
}

/// The 2x2 operator realizing `o`.
pub fn observable_matrix(o: &Observable) -> HermitianOperator {
    HermitianOperator::from_mat2(&o.mat2(), &o.label())
}

/// Two settings per qubit: `(a, a')` on qubit 1, `(b, b')` on 2, `(c, c')` on 3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSettings {
    pub a: Observable,
    pub a_prime: Observable,
    pub b: Observable,
    pub b_prime: Observable,
    pub c: Observable,
    pub c_prime: Observable,
}

/// Sign and per-qubit observables of one term of the Σ combination.
pub type SigmaTerm = (f64, [Observable; 3]);

impl MeasurementSettings {
    /// Unprimed settings on X, primed settings on Y.
    pub const fn mermin_axes() -> Self {
        MeasurementSettings {
            a: Observable::x_axis(),
            a_prime: Observable::y_axis(),
            b: Observable::x_axis(),
            b_prime: Observable::y_axis(),
            c: Observable::x_axis(),
            c_prime: Observable::y_axis(),
        }
    }

    /// Settings from six `(θ, φ)` pairs in the order a, a', b, b', c, c'.
    pub fn from_angles(angles: &[f64]) -> Result<Self> {
        if angles.len() != 12 {
            return Err(Error::rejected(format!(
                "expected 12 setting angles, got {}",
                angles.len()
            )));
        }
        let o = |k: usize| Observable::from_angles(angles[2 * k], angles[2 * k + 1]);
        Ok(MeasurementSettings {
            a: o(0),
            a_prime: o(1),
            b: o(2),
            b_prime: o(3),
            c: o(4),
            c_prime: o(5),
        })
    }

    /// The four terms `+abc, -a'b'c, -ab'c', -a'bc'`.
    pub fn terms(&self) -> [SigmaTerm; 4] {
        [
            (1.0, [self.a, self.b, self.c]),
            (-1.0, [self.a_prime, self.b_prime, self.c]),
            (-1.0, [self.a, self.b_prime, self.c_prime]),
            (-1.0, [self.a_prime, self.b, self.c_prime]),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BellKind {
    MerminFixed,
    SigmaGeneral,
}

/// An 8x8 Bell operator together with the settings that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct BellOperator {
    pub operator: HermitianOperator,
    pub settings: MeasurementSettings,
    pub kind: BellKind,
}

/// `M3 = XXX - YYX - XYY - YXY`, assembled from Pauli matrices.
pub fn build_mermin() -> BellOperator {
    let x = HermitianOperator::pauli_x();
    let y = HermitianOperator::pauli_y();
    let products = [
        tensor(&[&x, &x, &x]),
        tensor(&[&y, &y, &x]),
        tensor(&[&x, &y, &y]),
        tensor(&[&y, &x, &y]),
    ]
    .map(|p| p.expect("three-qubit Pauli product"));
    let operator = HermitianOperator::linear_combination(
        &[
            (1.0, &products[0]),
            (-1.0, &products[1]),
            (-1.0, &products[2]),
            (-1.0, &products[3]),
        ],
        "M3",
    )
    .expect("M3 is Hermitian");
    BellOperator {
        operator,
        settings: MeasurementSettings::mermin_axes(),
        kind: BellKind::MerminFixed,
    }
}

/// The signed Σ operator for arbitrary settings.
pub fn build_sigma(settings: &MeasurementSettings) -> BellOperator {
    let products: Vec<(f64, HermitianOperator)> = settings
        .terms()
        .iter()
        .map(|(sign, obs)| {
            let [o1, o2, o3] = obs.map(|o| observable_matrix(&o));
            (
                *sign,
                tensor(&[&o1, &o2, &o3]).expect("three-qubit product"),
            )
        })
        .collect();
    let refs: Vec<(f64, &HermitianOperator)> = products.iter().map(|(s, o)| (*s, o)).collect();
    let operator = HermitianOperator::linear_combination(&refs, "Sigma").expect("Σ is Hermitian");
    BellOperator {
        operator,
        settings: *settings,
        kind: BellKind::SigmaGeneral,
    }
}

/// Signed expectation of the Bell operator.
pub fn bell_value<S: QuantumState + ?Sized>(state: &S, op: &BellOperator) -> Result<f64> {
    expectation(state, &op.operator)
}

/// `E(o1, o2, o3)` on a pure three-qubit state.
pub fn correlation(state: &PureState, setting: &[Observable; 3]) -> Result<f64> {
    let [m1, m2, m3] = setting.map(|o| o.mat2());
    state.local_product_expectation(&[&m1, &m2, &m3])
}

/// Signed Σ value on a pure state, evaluated term by term from local products.
pub fn sigma_value(state: &PureState, settings: &MeasurementSettings) -> Result<f64> {
    settings.terms().iter().try_fold(0.0, |acc, (sign, obs)| {
        Ok(acc + sign * correlation(state, obs)?)
    })
}

/// `v1` on a two-qubit state and `v2` on a one-qubit state; for the product
/// state `v1·v2 = <M3>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationVectorPair {
    pub v1: [f64; 2],
    pub v2: [f64; 2],
}

impl CorrelationVectorPair {
    pub fn dot(&self) -> f64 {
        self.v1[0] * self.v2[0] + self.v1[1] * self.v2[1]
    }

    pub fn v1_norm(&self) -> f64 {
        self.v1[0].hypot(self.v1[1])
    }

    pub fn v2_norm(&self) -> f64 {
        self.v2[0].hypot(self.v2[1])
    }
}

/// `v1 = (<XX> - <YY>, -<XY> - <YX>)`, `v2 = (<X>, <Y>)`.
pub fn correlation_vectors<A, B>(state12: &A, state3: &B) -> Result<CorrelationVectorPair>
where
    A: QuantumState + ?Sized,
    B: QuantumState + ?Sized,
{
    if state12.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: state12.dim(),
        });
    }
    if state3.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: state3.dim(),
        });
    }
    let x = HermitianOperator::pauli_x();
    let y = HermitianOperator::pauli_y();
    let pair = |p: &HermitianOperator, q: &HermitianOperator| -> Result<f64> {
        expectation(state12, &qcore::tensor(&[p, q])?)
    };
    let v1 = [
        pair(&x, &x)? - pair(&y, &y)?,
        -pair(&x, &y)? - pair(&y, &x)?,
    ];
    let v2 = [expectation(state3, &x)?, expectation(state3, &y)?];
    Ok(CorrelationVectorPair { v1, v2 })
}
