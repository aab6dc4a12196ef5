use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::hamiltonian::PauliSum;
use crate::linalg::{apply_local, eigh, hermiticity_error, CMatrix, ONE, ZERO};

use super::channel::KrausChannel;
use super::circuit::Circuit;
use super::gate::Gate;

fn check_targets(n: usize, targets: &[usize], arity: usize) -> Result<()> {
    if targets.len() != arity {
        return Err(Error::Dimension(format!(
            "operation acts on {arity} qubits but {} targets given",
            targets.len()
        )));
    }
    for (i, &q) in targets.iter().enumerate() {
        if q >= n {
            return Err(Error::Targets(format!(
                "qubit {q} out of range for {n} qubits"
            )));
        }
        if targets[..i].contains(&q) {
            return Err(Error::Targets(format!("qubit {q} repeated")));
        }
    }
    Ok(())
}

/// Normalized state vector.
#[derive(Clone, Debug)]
pub struct PureState {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn zero(num_qubits: usize) -> Self {
        let mut amplitudes = vec![ZERO; 1 << num_qubits];
        amplitudes[0] = ONE;
        Self {
            num_qubits,
            amplitudes,
        }
    }

    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![ZERO; 1 << num_qubits];
        amplitudes[index] = ONE;
        Self {
            num_qubits,
            amplitudes,
        }
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::Dimension(format!(
                "state length {dim} is not a power of two"
            )));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Parameter(format!(
                "state norm {norm} differs from 1"
            )));
        }
        Ok(Self {
            num_qubits: dim.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        check_targets(self.num_qubits, gate.targets(), gate.targets().len())?;
        apply_local(
            &mut self.amplitudes,
            0,
            1,
            self.num_qubits,
            gate.targets(),
            gate.matrix(),
        );
        Ok(())
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.num_qubits() != self.num_qubits {
            return Err(Error::Dimension("circuit and state sizes differ".into()));
        }
        for g in circuit.gates() {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    /// `<self|other>`
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Dense density operator; may be sub-normalized after post-selection.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    num_qubits: usize,
    matrix: CMatrix,
    normalized: bool,
}

impl DensityMatrix {
    pub fn zero_state(num_qubits: usize) -> Self {
        let dim = 1usize << num_qubits;
        let mut matrix = CMatrix::zeros(dim, dim);
        matrix[(0, 0)] = ONE;
        Self {
            num_qubits,
            matrix,
            normalized: true,
        }
    }

    pub fn from_pure(state: &PureState) -> Self {
        let a = &state.amplitudes;
        let dim = a.len();
        let matrix = CMatrix::from_fn(dim, dim, |i, j| a[i] * a[j].conj());
        Self {
            num_qubits: state.num_qubits,
            matrix,
            normalized: true,
        }
    }

    /// Validates Hermiticity, positivity and trace before wrapping `matrix`.
    pub fn from_matrix(matrix: CMatrix, normalized: bool) -> Result<Self> {
        let dim = matrix.nrows();
        if dim == 0 || !dim.is_power_of_two() || matrix.ncols() != dim {
            return Err(Error::Dimension(format!(
                "{}x{} is not a qubit operator",
                dim,
                matrix.ncols()
            )));
        }
        let herm = hermiticity_error(&matrix);
        if herm > 1e-10 {
            return Err(Error::NotHermitian(herm));
        }
        let (vals, _) = eigh(&matrix);
        if vals[0] < -1e-10 {
            return Err(Error::Parameter(format!(
                "negative eigenvalue {:.3e}",
                vals[0]
            )));
        }
        let tr = matrix.trace().re;
        if normalized && (tr - 1.0).abs() > 1e-10 {
            return Err(Error::Parameter(format!(
                "trace {tr} of normalized state differs from 1"
            )));
        }
        if !normalized && !(-1e-10..=1.0 + 1e-10).contains(&tr) {
            return Err(Error::Parameter(format!("trace {tr} outside [0, 1]")));
        }
        Ok(Self {
            num_qubits: dim.trailing_zeros() as usize,
            matrix,
            normalized,
        })
    }

    pub fn maximally_mixed(num_qubits: usize) -> Self {
        let dim = 1usize << num_qubits;
        let matrix = CMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0);
        Self {
            num_qubits,
            matrix,
            normalized: true,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn element(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        // Tr[rho^2] = sum |rho_ij|^2 for Hermitian rho.
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Real diagonal of the matrix: outcome probabilities in the computational basis.
    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.matrix.nrows())
            .map(|i| self.matrix[(i, i)].re)
            .collect()
    }

    /// `alpha * self + beta * other`; the result is flagged normalized when its trace is 1.
    pub fn linear_combination(
        &self,
        alpha: f64,
        other: &DensityMatrix,
        beta: f64,
    ) -> Result<DensityMatrix> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::Dimension("mixing states of different size".into()));
        }
        let matrix =
            &self.matrix * Complex64::new(alpha, 0.0) + &other.matrix * Complex64::new(beta, 0.0);
        let normalized = (matrix.trace().re - 1.0).abs() < 1e-12;
        Ok(DensityMatrix {
            num_qubits: self.num_qubits,
            matrix,
            normalized,
        })
    }

    pub fn apply_gate_in_place(&mut self, gate: &Gate) -> Result<()> {
        check_targets(self.num_qubits, gate.targets(), gate.targets().len())?;
        self.conjugate_in_place(gate.targets(), gate.matrix());
        Ok(())
    }

    /// `rho -> U rho U^dag` for a local operator `u` (no unitarity check).
    pub(crate) fn conjugate_in_place(&mut self, targets: &[usize], u: &CMatrix) {
        let n = self.num_qubits;
        let dim = 1usize << n;
        let data = self.matrix.as_mut_slice();
        for col in 0..dim {
            apply_local(data, col * dim, 1, n, targets, u);
        }
        let uc = u.map(|z| z.conj());
        for row in 0..dim {
            apply_local(data, row, dim, n, targets, &uc);
        }
    }

    pub fn apply_channel_in_place(
        &mut self,
        channel: &KrausChannel,
        targets: &[usize],
    ) -> Result<()> {
        check_targets(self.num_qubits, targets, channel.num_qubits())?;
        if channel.is_identity() {
            return Ok(());
        }
        let n = self.num_qubits;
        let dim = 1usize << n;
        let k = targets.len();
        let sub = 1usize << k;
        let masks: Vec<usize> = targets.iter().map(|&q| 1usize << (n - 1 - q)).collect();
        let all: usize = masks.iter().sum();
        let offs: Vec<usize> = (0..sub)
            .map(|s| {
                masks
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| s >> (k - 1 - b) & 1 == 1)
                    .map(|(_, m)| m)
                    .sum()
            })
            .collect();
        let sop = channel.superop();
        let data = self.matrix.as_mut_slice();
        let mut block = vec![ZERO; sub * sub];
        for cb in (0..dim).filter(|c| c & all == 0) {
            for rb in (0..dim).filter(|r| r & all == 0) {
                for a in 0..sub {
                    for b in 0..sub {
                        block[a * sub + b] = data[(cb | offs[b]) * dim + (rb | offs[a])];
                    }
                }
                for a2 in 0..sub {
                    for b2 in 0..sub {
                        let row = a2 * sub + b2;
                        let mut acc = ZERO;
                        for (idx, v) in block.iter().enumerate() {
                            acc += sop[(row, idx)] * v;
                        }
                        data[(cb | offs[b2]) * dim + (rb | offs[a2])] = acc;
                    }
                }
            }
        }
        Ok(())
    }

    /// Applies every moment of `circuit` in order, without noise.
    pub fn apply_circuit_in_place(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.num_qubits() != self.num_qubits {
            return Err(Error::Dimension(format!(
                "{}-qubit circuit on {}-qubit state",
                circuit.num_qubits(),
                self.num_qubits
            )));
        }
        for g in circuit.gates() {
            self.apply_gate_in_place(g)?;
        }
        Ok(())
    }
}

pub fn apply_gate(state: &DensityMatrix, gate: &Gate) -> Result<DensityMatrix> {
    let mut out = state.clone();
    out.apply_gate_in_place(gate)?;
    Ok(out)
}

pub fn apply_channel(
    state: &DensityMatrix,
    channel: &KrausChannel,
    targets: &[usize],
) -> Result<DensityMatrix> {
    let mut out = state.clone();
    out.apply_channel_in_place(channel, targets)?;
    Ok(out)
}

/// `Tr[rho O]` for a Pauli-sum observable.
pub fn expectation(state: &DensityMatrix, observable: &PauliSum) -> Result<f64> {
    let value = expectation_complex(state, observable)?;
    let scale = 1.0
        + observable
            .terms()
            .iter()
            .map(|t| t.coefficient().abs())
            .sum::<f64>();
    if value.im.abs() > 1e-10 * scale {
        return Err(Error::NotHermitian(value.im.abs()));
    }
    Ok(value.re)
}

pub(crate) fn expectation_complex(
    state: &DensityMatrix,
    observable: &PauliSum,
) -> Result<Complex64> {
    let n = state.num_qubits;
    if observable.num_qubits() != n {
        return Err(Error::Dimension(format!(
            "{}-qubit observable on {n}-qubit state",
            observable.num_qubits()
        )));
    }
    let dim = 1usize << n;
    let mut total = ZERO;
    for term in observable.terms() {
        let mut acc = ZERO;
        for j in 0..dim {
            let (flipped, phase) = term.action_on_basis(j);
            acc += state.matrix[(j, flipped)] * phase;
        }
        total += acc * term.coefficient();
    }
    Ok(total)
}

/// Reduced state on `keep` (in the given order).
pub fn partial_trace(state: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = state.num_qubits;
    check_targets(n, keep, keep.len())?;
    if keep.is_empty() {
        return Err(Error::Targets(
            "partial trace must keep at least one qubit".into(),
        ));
    }
    let k = keep.len();
    let dim = 1usize << n;
    let keep_mask: usize = keep.iter().map(|&q| 1usize << (n - 1 - q)).sum();
    let reduce = |idx: usize| -> usize {
        keep.iter().enumerate().fold(0, |acc, (b, &q)| {
            acc | ((idx >> (n - 1 - q)) & 1) << (k - 1 - b)
        })
    };
    let mut out = CMatrix::zeros(1 << k, 1 << k);
    for r in 0..dim {
        for c in 0..dim {
            if r & !keep_mask == c & !keep_mask {
                out[(reduce(r), reduce(c))] += state.matrix[(r, c)];
            }
        }
    }
    Ok(DensityMatrix {
        num_qubits: k,
        matrix: out,
        normalized: state.normalized,
    })
}

/// Draws one computational-basis outcome after applying single-qubit
/// pre-rotations `(qubit, matrix)`. Bits are returned in qubit order.
pub fn sample_measurement<R: Rng + ?Sized>(
    state: &DensityMatrix,
    rng: &mut R,
    rotations: &[(usize, CMatrix)],
) -> Result<Vec<u8>> {
    let mut rotated = state.clone();
    for (q, m) in rotations {
        rotated.apply_gate_in_place(&Gate::new(vec![*q], m.clone())?)?;
    }
    let probs = rotated.probabilities();
    let total: f64 = probs.iter().sum();
    let expected = rotated.trace();
    if (total - expected).abs() > 1e-8 || total <= 0.0 {
        return Err(Error::Probability { total, expected });
    }
    let mut u = rng.random::<f64>() * total;
    let mut outcome = probs.len() - 1;
    for (i, p) in probs.iter().enumerate() {
        if u < *p {
            outcome = i;
            break;
        }
        u -= p.max(0.0);
    }
    let n = state.num_qubits;
    Ok((0..n)
        .map(|q| ((outcome >> (n - 1 - q)) & 1) as u8)
        .collect())
}
