//! Dense complex linear algebra for one to three qubits.
//!
//! Basis ordering: qubit 1 is the most significant bit of the basis index, so
//! `|q1 q2 q3>` has index `4*q1 + 2*q2 + q3`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// 2x2 complex matrix in row-major order, used on the hot paths.
pub type Mat2 = [[C64; 2]; 2];

/// Construction-level identities (norms, Hermiticity of built operators).
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Validation of physical states (Hermiticity, positivity, trace).
pub const PHYSICAL_TOL: f64 = 1e-9;
/// Largest imaginary residue tolerated in an expectation value.
pub const IMAG_TOL: f64 = 1e-10;

pub const MAX_DIM: usize = 8;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

pub fn pauli_x2() -> Mat2 {
    [[ZERO, ONE], [ONE, ZERO]]
}

pub fn pauli_y2() -> Mat2 {
    [[ZERO, -I], [I, ZERO]]
}

pub fn pauli_z2() -> Mat2 {
    [[ONE, ZERO], [ZERO, -ONE]]
}

fn mat2_to_matrix(m: &Mat2) -> CMatrix {
    CMatrix::from_fn(2, 2, |r, c| m[r][c])
}

fn qubits_for_dim(dim: usize) -> Result<usize> {
    match dim {
        2 => Ok(1),
        4 => Ok(2),
        8 => Ok(3),
        _ => Err(Error::rejected(format!("dimension {dim} is not 2, 4 or 8"))),
    }
}

fn max_hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for r in 0..n {
        for c in r..n {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

/// A Hermitian operator on one to three qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
    label: String,
}

impl HermitianOperator {
    pub fn new(matrix: CMatrix, label: impl Into<String>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::rejected(format!(
                "operator is {}x{}, not square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() == 0 || matrix.nrows() > MAX_DIM {
            return Err(Error::rejected(format!(
                "operator dimension {} outside 1..={MAX_DIM}",
                matrix.nrows()
            )));
        }
        let defect = max_hermitian_defect(&matrix);
        if defect > CONSTRUCTION_TOL {
            return Err(Error::rejected(format!(
                "operator not Hermitian (defect {defect:e})"
            )));
        }
        Ok(HermitianOperator {
            matrix,
            label: label.into(),
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(CMatrix::identity(dim, dim), format!("I{dim}"))
    }

    pub fn pauli_x() -> Self {
        Self::from_mat2(&pauli_x2(), "X")
    }

    pub fn pauli_y() -> Self {
        Self::from_mat2(&pauli_y2(), "Y")
    }

    pub fn pauli_z() -> Self {
        Self::from_mat2(&pauli_z2(), "Z")
    }

    pub(crate) fn from_mat2(m: &Mat2, label: &str) -> Self {
        HermitianOperator {
            matrix: mat2_to_matrix(m),
            label: label.to_string(),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Linear combination `sum_k w_k O_k`; all operators must share a dimension.
    pub fn linear_combination(
        terms: &[(f64, &HermitianOperator)],
        label: impl Into<String>,
    ) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::rejected("empty linear combination"))?;
        let dim = first.1.dim();
        let mut acc = CMatrix::zeros(dim, dim);
        for (w, op) in terms {
            if op.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: op.dim(),
                });
            }
            acc += op.matrix.map(|z| z * *w);
        }
        Self::new(acc, label)
    }
}

/// Kronecker product in argument order (first operand acts on qubit 1).
pub fn tensor(ops: &[&HermitianOperator]) -> Result<HermitianOperator> {
    if ops.is_empty() {
        return Err(Error::rejected("tensor of an empty list"));
    }
    let total: usize = ops.iter().try_fold(1usize, |acc, op| {
        acc.checked_mul(op.dim())
            .filter(|d| *d <= MAX_DIM)
            .ok_or_else(|| Error::rejected(format!("tensor dimension exceeds {MAX_DIM}")))
    })?;
    debug_assert!(total <= MAX_DIM);

    let mut acc = ops[0].matrix.clone();
    for op in &ops[1..] {
        acc = kron(&acc, &op.matrix);
    }
    let label = ops
        .iter()
        .map(|o| o.label.as_str())
        .collect::<Vec<_>>()
        .join("⊗");
    HermitianOperator::new(acc, label)
}

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMatrix::from_fn(ar * br, ac * bc, |r, c| {
        a[(r / br, c / bc)] * b[(r % br, c % bc)]
    })
}

/// A normalized pure state of one to three qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    /// Accepts amplitudes whose squared norm is 1 within the construction tolerance.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        qubits_for_dim(amplitudes.len())?;
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > CONSTRUCTION_TOL {
            return Err(Error::InvalidState(format!(
                "squared norm {norm_sqr} differs from 1"
            )));
        }
        Ok(PureState { amplitudes })
    }

    /// Rescales any nonzero amplitude vector to unit norm.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        qubits_for_dim(amplitudes.len())?;
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidState(format!(
                "cannot normalize a vector of norm {norm}"
            )));
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Ok(PureState { amplitudes })
    }

    /// Computational basis state `|index>` of the given dimension.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        qubits_for_dim(dim)?;
        if index >= dim {
            return Err(Error::rejected(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(PureState { amplitudes })
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    /// `self ⊗ other`.
    pub fn kron(&self, other: &PureState) -> Result<PureState> {
        let dim = self.dim() * other.dim();
        if dim > MAX_DIM {
            return Err(Error::rejected(format!(
                "product state dimension {dim} exceeds {MAX_DIM}"
            )));
        }
        let mut amplitudes = Vec::with_capacity(dim);
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Ok(PureState { amplitudes })
    }

    pub fn to_density(&self) -> DensityMatrix {
        let n = self.dim();
        let m = CMatrix::from_fn(n, n, |r, c| self.amplitudes[r] * self.amplitudes[c].conj());
        DensityMatrix { matrix: m }
    }

    pub fn inner(&self, other: &PureState) -> Result<C64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Reorders qubits: qubit `k` of the result is qubit `perm[k]` of `self`.
    pub fn permute_qubits(&self, perm: &[usize]) -> Result<PureState> {
        let n = self.num_qubits();
        let map = permutation_index_map(n, perm)?;
        let mut amplitudes = vec![ZERO; self.dim()];
        for (new_idx, old_idx) in map.into_iter().enumerate() {
            amplitudes[new_idx] = self.amplitudes[old_idx];
        }
        Ok(PureState { amplitudes })
    }

    /// Applies a single-qubit matrix to qubit `qubit` (0-based, 0 = most significant).
    pub(crate) fn apply_local(&mut self, qubit: usize, m: &Mat2) {
        let n = self.num_qubits();
        let stride = 1usize << (n - 1 - qubit);
        let dim = self.dim();
        for i in 0..dim {
            if i & stride != 0 {
                continue;
            }
            let a = self.amplitudes[i];
            let b = self.amplitudes[i + stride];
            self.amplitudes[i] = m[0][0] * a + m[0][1] * b;
            self.amplitudes[i + stride] = m[1][0] * a + m[1][1] * b;
        }
    }

    /// Reduced density matrix of a single qubit (0-based index).
    pub fn reduced_qubit(&self, qubit: usize) -> Result<DensityMatrix> {
        let n = self.num_qubits();
        if qubit >= n {
            return Err(Error::rejected(format!(
                "qubit {qubit} out of range for {n} qubits"
            )));
        }
        let stride = 1usize << (n - 1 - qubit);
        let mut m = CMatrix::zeros(2, 2);
        for i in 0..self.dim() {
            if i & stride != 0 {
                continue;
            }
            let a0 = self.amplitudes[i];
            let a1 = self.amplitudes[i + stride];
            m[(0, 0)] += a0 * a0.conj();
            m[(0, 1)] += a0 * a1.conj();
            m[(1, 0)] += a1 * a0.conj();
            m[(1, 1)] += a1 * a1.conj();
        }
        Ok(DensityMatrix { matrix: m })
    }

    /// `<psi| A1 ⊗ A2 ⊗ ... |psi>` for single-qubit factors, without forming the
    /// full operator. Factors must be Hermitian for the result to be real.
    pub fn local_product_expectation(&self, factors: &[&Mat2]) -> Result<f64> {
        check_dim(self.num_qubits(), factors.len())?;
        let mut phi = self.clone();
        for (q, m) in factors.iter().enumerate() {
            phi.apply_local(q, m);
        }
        let z: C64 = self
            .amplitudes
            .iter()
            .zip(&phi.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        real_part(z)
    }
}

/// For each new basis index, the old basis index it reads from.
fn permutation_index_map(n: usize, perm: &[usize]) -> Result<Vec<usize>> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::rejected(format!(
            "permutation of length {} for {n} qubits",
            perm.len()
        )));
    }
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::rejected(format!("{perm:?} is not a permutation")));
        }
        seen[p] = true;
    }
    let dim = 1usize << n;
    Ok((0..dim)
        .map(|new_idx| {
            (0..n).fold(0usize, |old_idx, k| {
                let bit = (new_idx >> (n - 1 - k)) & 1;
                old_idx | (bit << (n - 1 - perm[k]))
            })
        })
        .collect())
}

/// A validated density matrix: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidState("density matrix not square".into()));
        }
        qubits_for_dim(matrix.nrows())?;
        let defect = max_hermitian_defect(&matrix);
        if defect > PHYSICAL_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (defect {defect:e})"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > PHYSICAL_TOL || tr.im.abs() > PHYSICAL_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = min_eigenvalue(&matrix);
        if min < -PHYSICAL_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(DensityMatrix { matrix })
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        qubits_for_dim(dim)?;
        Ok(DensityMatrix {
            matrix: CMatrix::identity(dim, dim).map(|z| z / dim as f64),
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn num_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// `P rho P†` where qubit `k` of the result is qubit `perm[k]` of `self`.
    pub fn permute_qubits(&self, perm: &[usize]) -> Result<DensityMatrix> {
        let map = permutation_index_map(self.num_qubits(), perm)?;
        let n = self.dim();
        let m = CMatrix::from_fn(n, n, |r, c| self.matrix[(map[r], map[c])]);
        Ok(DensityMatrix { matrix: m })
    }

    /// Bloch vector `(<X>, <Y>, <Z>)` of a single-qubit state.
    pub fn bloch_vector(&self) -> Result<[f64; 3]> {
        check_dim(2, self.dim())?;
        let m = &self.matrix;
        Ok([
            2.0 * m[(0, 1)].re,
            -2.0 * m[(0, 1)].im,
            (m[(0, 0)] - m[(1, 1)]).re,
        ])
    }
}

fn min_eigenvalue(m: &CMatrix) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

impl From<&PureState> for DensityMatrix {
    fn from(s: &PureState) -> Self {
        s.to_density()
    }
}

/// Anything an expectation value can be taken on.
pub trait QuantumState {
    fn dim(&self) -> usize;
    /// `<psi|M|psi>` or `Tr(rho M)` without any Hermiticity checks.
    fn raw_expectation(&self, m: &CMatrix) -> C64;
}

impl QuantumState for PureState {
    fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    fn raw_expectation(&self, m: &CMatrix) -> C64 {
        let n = self.amplitudes.len();
        let mut acc = ZERO;
        for r in 0..n {
            let mut row = ZERO;
            for c in 0..n {
                row += m[(r, c)] * self.amplitudes[c];
            }
            acc += self.amplitudes[r].conj() * row;
        }
        acc
    }
}

impl QuantumState for DensityMatrix {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn raw_expectation(&self, m: &CMatrix) -> C64 {
        let n = self.matrix.nrows();
        let mut acc = ZERO;
        for r in 0..n {
            for c in 0..n {
                acc += self.matrix[(r, c)] * m[(c, r)];
            }
        }
        acc
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

fn real_part(z: C64) -> Result<f64> {
    if z.im.abs() > IMAG_TOL {
        Err(Error::NonHermitianExpectation(z.im))
    } else {
        Ok(z.re)
    }
}

/// `<psi|O|psi>` or `Tr(rho O)`.
pub fn expectation<S: QuantumState + ?Sized>(state: &S, op: &HermitianOperator) -> Result<f64> {
    check_dim(op.dim(), state.dim())?;
    real_part(state.raw_expectation(op.matrix()))
}

/// Convex combination `sum_k w_k rho_k`.
pub fn mix(states: &[DensityMatrix], weights: &[f64]) -> Result<DensityMatrix> {
    if states.is_empty() {
        return Err(Error::rejected("mixture of zero states"));
    }
    if states.len() != weights.len() {
        return Err(Error::rejected(format!(
            "{} states but {} weights",
            states.len(),
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| w.is_nan() || **w < 0.0) {
        return Err(Error::rejected(format!("negative weight {w}")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > CONSTRUCTION_TOL {
        return Err(Error::rejected(format!("weights sum to {total}, not 1")));
    }
    let dim = states[0].dim();
    let mut acc = CMatrix::zeros(dim, dim);
    for (s, w) in states.iter().zip(weights) {
        check_dim(dim, s.dim())?;
        acc += s.matrix.map(|z| z * *w);
    }
    DensityMatrix::new(acc)
}

/// Normalized complex standard-normal vector; deterministic per seed.
pub fn random_pure(dim: usize, seed: u64) -> Result<PureState> {
    let mut rng = rng::stream(seed, 0);
    random_pure_with(dim, &mut rng)
}

pub(crate) fn random_pure_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<PureState> {
    qubits_for_dim(dim)?;
    let amplitudes = gaussian_amplitudes(dim, rng);
    PureState::normalized(amplitudes)
}

pub(crate) fn gaussian_amplitudes<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    (0..dim)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im)
        })
        .collect()
}
