//! Exact time-evolution circuits for fast-forwardable operators.
//!
//! Every block is `basis, D(t), basis^dag` with `D(t)` a product of
//! diagonal phase gates; `Evolution::matrix(t)` is `e^{iHt}`.

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::sim::{gate, Circuit, Gate};

use super::givens::GivensNetwork;
use super::pauli::{Pauli, PauliString};

/// Diagonal generator piece; the gate applied for time `t` is `e^{i a t G}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DiagonalTerm {
    /// `G = I`
    Global { a: f64 },
    /// `G = Z_q`
    Z { q: usize, a: f64 },
    /// `G = Z_qa Z_qb`
    ZZ { qa: usize, qb: usize, a: f64 },
    /// `G = n_q`
    Number { q: usize, a: f64 },
    /// `G = n_qa n_qb`
    NumberPair { qa: usize, qb: usize, a: f64 },
}

impl DiagonalTerm {
    fn qubits(&self) -> Vec<usize> {
        match *self {
            DiagonalTerm::Global { .. } => vec![],
            DiagonalTerm::Z { q, .. } | DiagonalTerm::Number { q, .. } => vec![q],
            DiagonalTerm::ZZ { qa, qb, .. } | DiagonalTerm::NumberPair { qa, qb, .. } => {
                vec![qa, qb]
            }
        }
    }

    /// Phase `a * G(bits)` on a computational basis state of the term's qubits.
    fn phase_on(&self, bits: &[bool]) -> f64 {
        let z = |b: bool| if b { -1.0 } else { 1.0 };
        let n = |b: bool| if b { 1.0 } else { 0.0 };
        match *self {
            DiagonalTerm::Global { a } => a,
            DiagonalTerm::Z { a, .. } => a * z(bits[0]),
            DiagonalTerm::ZZ { a, .. } => a * z(bits[0]) * z(bits[1]),
            DiagonalTerm::Number { a, .. } => a * n(bits[0]),
            DiagonalTerm::NumberPair { a, .. } => a * n(bits[0]) * n(bits[1]),
        }
    }

    /// Value on the all-zero state.
    pub fn vacuum_value(&self) -> f64 {
        self.phase_on(&[false, false])
    }

    fn remapped(&self, offset: usize) -> DiagonalTerm {
        match *self {
            DiagonalTerm::Global { a } => DiagonalTerm::Global { a },
            DiagonalTerm::Z { q, a } => DiagonalTerm::Z { q: q + offset, a },
            DiagonalTerm::ZZ { qa, qb, a } => DiagonalTerm::ZZ {
                qa: qa + offset,
                qb: qb + offset,
                a,
            },
            DiagonalTerm::Number { q, a } => DiagonalTerm::Number { q: q + offset, a },
            DiagonalTerm::NumberPair { qa, qb, a } => DiagonalTerm::NumberPair {
                qa: qa + offset,
                qb: qb + offset,
                a,
            },
        }
    }

    /// Gate for `e^{i a t G}`; `None` for the global phase.
    fn gate(&self, t: f64) -> Option<Gate> {
        match *self {
            DiagonalTerm::Global { .. } => None,
            DiagonalTerm::Z { q, a } => Some(gate::z_rotation(q, a * t)),
            DiagonalTerm::ZZ { qa, qb, a } => Some(gate::zz_rotation(qa, qb, a * t)),
            DiagonalTerm::Number { q, a } => Some(gate::phase(q, a * t)),
            DiagonalTerm::NumberPair { qa, qb, a } => Some(gate::cphase(qa, qb, a * t)),
        }
    }

    /// Gate for `e^{i a t G}` applied only when `control` is `|1>`.
    fn controlled_gate(&self, t: f64, control: usize) -> Gate {
        let qubits = self.qubits();
        let k = qubits.len();
        let mut phases = vec![0.0; 1 << (k + 1)];
        for idx in 0..(1usize << k) {
            let bits: Vec<bool> = (0..k).map(|b| (idx >> (k - 1 - b)) & 1 == 1).collect();
            phases[(1 << k) + idx] = t * self.phase_on(&bits);
        }
        let mut targets = vec![control];
        targets.extend(qubits);
        gate::diagonal(targets, &phases)
    }
}

/// How a block's basis change is turned into gates.
#[derive(Clone, Debug)]
pub enum BasisChange {
    Circuit(Circuit),
    Network(GivensNetwork),
}

/// Gate set used for Givens networks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Compilation {
    /// One two-qubit matchgate per rotation.
    #[default]
    Matchgate,
    /// Single-qubit phases and `ISWAP^{+-1/2}`.
    Native,
}

impl BasisChange {
    fn circuit(&self, compilation: Compilation) -> Circuit {
        match (self, compilation) {
            (BasisChange::Circuit(c), _) => c.clone(),
            (BasisChange::Network(n), Compilation::Matchgate) => n.circuit(),
            (BasisChange::Network(n), Compilation::Native) => n.native_circuit(),
        }
    }

    fn num_qubits(&self) -> usize {
        match self {
            BasisChange::Circuit(c) => c.num_qubits(),
            BasisChange::Network(n) => n.num_modes(),
        }
    }
}

/// `basis`, then the diagonal phases for time `t`, then `basis^dag`.
#[derive(Clone, Debug)]
pub struct EvolutionBlock {
    basis: BasisChange,
    diagonal: Vec<DiagonalTerm>,
}

impl EvolutionBlock {
    pub fn new(basis: BasisChange, diagonal: Vec<DiagonalTerm>) -> Result<Self> {
        let n = basis.num_qubits();
        if let Some(q) = diagonal.iter().flat_map(|d| d.qubits()).find(|&q| q >= n) {
            return Err(Error::Targets(format!(
                "diagonal term on qubit {q} outside {n}-qubit block"
            )));
        }
        Ok(Self { basis, diagonal })
    }

    pub fn basis(&self) -> &BasisChange {
        &self.basis
    }

    pub fn diagonal(&self) -> &[DiagonalTerm] {
        &self.diagonal
    }

    /// `e^{i a t P}` for one Pauli string.
    pub fn pauli(string: &PauliString) -> Self {
        let n = string.num_qubits();
        let a = string.coefficient();
        let support = string.support();
        let mut basis = Circuit::new(n);
        let term = match support.as_slice() {
            [] => DiagonalTerm::Global { a },
            [q] if string.is_diagonal() => DiagonalTerm::Z { q: *q, a },
            [qa, qb] if string.is_diagonal() => DiagonalTerm::ZZ {
                qa: *qa,
                qb: *qb,
                a,
            },
            _ => {
                let mut changes = Vec::new();
                for &q in &support {
                    match string.letters()[q] {
                        Pauli::X => changes.push(gate::h(q)),
                        Pauli::Y => changes.push(gate::fuse_single(
                            q,
                            &[gate::sdg(q).matrix(), &gate::hadamard_matrix()],
                        )),
                        _ => {}
                    }
                }
                basis.push_moment(changes).expect("support within register");
                for w in support.windows(2) {
                    basis
                        .push(gate::cnot(w[0], w[1]))
                        .expect("support within register");
                }
                DiagonalTerm::Z {
                    q: *support.last().expect("non-empty support"),
                    a,
                }
            }
        };
        Self {
            basis: BasisChange::Circuit(basis),
            diagonal: vec![term],
        }
    }

    fn num_qubits(&self) -> usize {
        self.basis.num_qubits()
    }

    fn circuit(&self, t: f64, compilation: Compilation) -> Circuit {
        let basis = self.basis.circuit(compilation);
        let mut out = basis.clone();
        for d in &self.diagonal {
            if let Some(g) = d.gate(t) {
                out.push(g).expect("validated qubits");
            }
        }
        out.append(&basis.inverse()).expect("same register");
        out
    }

    fn controlled_circuit(
        &self,
        t: f64,
        control: usize,
        total: usize,
        offset: usize,
        compilation: Compilation,
    ) -> Result<Circuit> {
        let basis = self.basis.circuit(compilation).shifted(total, offset)?;
        let mut out = basis.clone();
        for d in &self.diagonal {
            out.push(d.remapped(offset).controlled_gate(t, control))?;
        }
        out.append(&basis.inverse())?;
        Ok(out)
    }

    /// Dense generator `B^dag diag B`, where `B` is the basis circuit.
    fn generator(&self) -> CMatrix {
        let n = self.num_qubits();
        let dim = 1usize << n;
        let mut diag = CMatrix::zeros(dim, dim);
        for idx in 0..dim {
            let bits = |qs: &[usize]| -> Vec<bool> {
                qs.iter().map(|&q| (idx >> (n - 1 - q)) & 1 == 1).collect()
            };
            let value: f64 = self
                .diagonal
                .iter()
                .map(|d| d.phase_on(&bits(&d.qubits())))
                .sum();
            diag[(idx, idx)] = value.into();
        }
        let b = self.basis.circuit(Compilation::Matchgate).unitary();
        b.adjoint() * diag * b
    }
}

/// Product of evolution blocks acting on `num_qubits` system qubits.
#[derive(Clone, Debug)]
pub struct Evolution {
    num_qubits: usize,
    blocks: Vec<EvolutionBlock>,
    compilation: Compilation,
}

impl Evolution {
    pub fn new(num_qubits: usize, blocks: Vec<EvolutionBlock>) -> Result<Self> {
        if let Some(b) = blocks.iter().find(|b| b.num_qubits() != num_qubits) {
            return Err(Error::Dimension(format!(
                "block on {} qubits in a {num_qubits}-qubit evolution",
                b.num_qubits()
            )));
        }
        Ok(Self {
            num_qubits,
            blocks,
            compilation: Compilation::Matchgate,
        })
    }

    /// One block per Pauli string.
    pub fn from_pauli_strings<'a>(
        num_qubits: usize,
        strings: impl IntoIterator<Item = &'a PauliString>,
    ) -> Result<Self> {
        Self::new(
            num_qubits,
            strings.into_iter().map(EvolutionBlock::pauli).collect(),
        )
    }

    pub fn with_compilation(mut self, compilation: Compilation) -> Self {
        self.compilation = compilation;
        self
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn blocks(&self) -> &[EvolutionBlock] {
        &self.blocks
    }

    /// Sum of the global-phase coefficients, which uncontrolled circuits drop.
    pub fn global_phase_rate(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| &b.diagonal)
            .map(|d| match d {
                DiagonalTerm::Global { a } => *a,
                _ => 0.0,
            })
            .sum()
    }

    /// Uncontrolled circuit for `e^{iHt}`, up to the dropped global phase.
    pub fn circuit(&self, t: f64) -> Circuit {
        let mut out = Circuit::new(self.num_qubits);
        for b in &self.blocks {
            out.append(&b.circuit(t, self.compilation))
                .expect("same register");
        }
        out.packed()
    }

    /// Controlled `e^{iHt}` with the system on qubits `offset..offset + n` of `total`.
    /// Basis changes are left uncontrolled; only the diagonal phases see the control.
    pub fn controlled_circuit(
        &self,
        t: f64,
        control: usize,
        total: usize,
        offset: usize,
    ) -> Result<Circuit> {
        if offset + self.num_qubits > total
            || (control >= offset && control < offset + self.num_qubits)
        {
            return Err(Error::Targets(format!(
                "control {control} and system at offset {offset} do not fit {total} qubits"
            )));
        }
        let mut out = Circuit::new(total);
        for b in &self.blocks {
            out.append(&b.controlled_circuit(t, control, total, offset, self.compilation)?)?;
        }
        Ok(out.packed())
    }

    /// Dense generator `H` with `matrix(t) = e^{iHt}`.
    pub fn generator(&self) -> CMatrix {
        let dim = 1usize << self.num_qubits;
        self.blocks
            .iter()
            .fold(CMatrix::zeros(dim, dim), |acc, b| acc + b.generator())
    }

    /// Dense `e^{iHt}` including the global phase, as the product of block exponentials.
    pub fn matrix(&self, t: f64) -> CMatrix {
        let dim = 1usize << self.num_qubits;
        let mut u = CMatrix::identity(dim, dim);
        for b in &self.blocks {
            u = crate::linalg::expm_i_hermitian(&b.generator(), t) * u;
        }
        u
    }
}

/// Dense matrix of a diagonal term's generator.
#[cfg(test)]
fn term_matrix(n: usize, d: &DiagonalTerm) -> CMatrix {
    use crate::linalg::{c, diag, embed};
    let qs = d.qubits();
    let k = qs.len();
    let entries: Vec<_> = (0..(1usize << k))
        .map(|idx| {
            let bits: Vec<bool> = (0..k).map(|b| (idx >> (k - 1 - b)) & 1 == 1).collect();
            c(d.phase_on(&bits), 0.0)
        })
        .collect();
    if k == 0 {
        return CMatrix::identity(1 << n, 1 << n) * entries[0];
    }
    embed(n, &qs, &diag(&entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expm_i_hermitian, max_abs_diff};

    fn strings() -> Vec<PauliString> {
        vec![
            PauliString::new(vec![Pauli::X, Pauli::Y, Pauli::Z], 0.7),
            PauliString::new(vec![Pauli::Z, Pauli::I, Pauli::Z], -0.3),
            PauliString::new(vec![Pauli::I, Pauli::Y, Pauli::I], 1.1),
            PauliString::new(vec![Pauli::Y, Pauli::Y, Pauli::X], 0.4),
            PauliString::identity(3, 0.25),
        ]
    }

    #[test]
    fn pauli_blocks_match_dense_exponential() {
        for s in strings() {
            let ev = Evolution::from_pauli_strings(3, [&s]).unwrap();
            for t in [0.1, 0.5, 1.0] {
                let exact = expm_i_hermitian(&s.matrix(), t);
                assert!(max_abs_diff(&ev.matrix(t), &exact) < 1e-10);
                if !s.is_identity() {
                    assert!(
                        max_abs_diff(&ev.circuit(t).unitary(), &exact) < 1e-10,
                        "{s}"
                    );
                }
            }
        }
    }

    #[test]
    fn controlled_circuit_is_block_diagonal() {
        let s = PauliString::new(vec![Pauli::X, Pauli::Z], 0.6);
        let global = PauliString::identity(2, -0.2);
        let ev = Evolution::from_pauli_strings(2, [&s, &global]).unwrap();
        let t = 0.8;
        let u = ev.controlled_circuit(t, 0, 3, 1).unwrap().unitary();
        let exact = expm_i_hermitian(&(s.matrix() + global.matrix()), t);
        for r in 0..4 {
            for c in 0..4 {
                let id = if r == c { 1.0 } else { 0.0 };
                assert!((u[(r, c)] - id).norm() < 1e-10);
                assert!((u[(4 + r, 4 + c)] - exact[(r, c)]).norm() < 1e-10);
                assert!(u[(4 + r, c)].norm() < 1e-10);
            }
        }
    }

    #[test]
    fn number_terms_are_projector_phases() {
        let d = DiagonalTerm::NumberPair {
            qa: 0,
            qb: 2,
            a: 0.9,
        };
        let block = EvolutionBlock::new(BasisChange::Circuit(Circuit::new(3)), vec![d]).unwrap();
        let ev = Evolution::new(3, vec![block]).unwrap();
        let exact = expm_i_hermitian(&term_matrix(3, &d), 1.3);
        assert!(max_abs_diff(&ev.circuit(1.3).unitary(), &exact) < 1e-12);
    }

    #[test]
    fn global_rate_is_reported() {
        let ev = Evolution::from_pauli_strings(3, &strings()).unwrap();
        assert!((ev.global_phase_rate() - 0.25).abs() < 1e-15);
    }
}
