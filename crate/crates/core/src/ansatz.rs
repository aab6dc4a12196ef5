//! State-preparation circuits.
//!
//! Number-conserving ansatze (Givens and fermionic-swap networks) act on a
//! Hartree-Fock-like occupation of the first `occupation` modes; the VHA acts
//! on `|1...1>`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{GivensBlock, GivensNetwork};
use crate::linalg::{c, cis, from_rows, ONE, ZERO};
use crate::sim::{gate, Circuit, Gate};

/// Modes `(j, j+1)` of the brick pattern, layer by layer.
fn brick_pairs(n: usize, layers: usize) -> Vec<Vec<usize>> {
    (0..layers)
        .map(|l| (l % 2..n.saturating_sub(1)).step_by(2).collect())
        .collect()
}

fn check_len(what: &str, got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(Error::Parameter(format!(
            "{what} expects {expected} parameters, got {got}"
        )));
    }
    Ok(())
}

/// Full brick network of `n (n - 1) / 2` real Givens rotations in `n` layers.
pub fn givens_ansatz(n: usize, theta: &[f64]) -> Result<GivensNetwork> {
    check_len("Givens network", theta.len(), n * n.saturating_sub(1) / 2)?;
    let modes = brick_pairs(n, n).into_iter().flatten();
    let blocks = modes
        .zip(theta)
        .map(|(m, &t)| GivensBlock::rotation(m, t))
        .collect();
    GivensNetwork::new(n, blocks, vec![0.0; n])
}

pub fn givens_network(n: usize, theta: &[f64]) -> Result<Circuit> {
    let net = givens_ansatz(n, theta)?;
    let mut c = Circuit::new(n);
    for b in net.blocks() {
        c.push(b.gate())?;
    }
    Ok(c.packed())
}

/// Hadamard on qubit 0 followed by a CNOT chain over the first `n_f` qubits.
pub fn ghz_prep(n_f: usize, n: usize) -> Result<Circuit> {
    if n_f == 0 || n_f > n {
        return Err(Error::Parameter(format!(
            "occupation {n_f} must lie in 1..={n}"
        )));
    }
    let mut c = Circuit::new(n);
    c.push(gate::h(0))?;
    c.append(&cnot_chain(n_f, n)?)?;
    Ok(c)
}

/// `|1 0...0> -> |1...1 0...0>` with `n_f` ones; fixes `|0...0>`.
pub fn cnot_chain(n_f: usize, n: usize) -> Result<Circuit> {
    let mut c = Circuit::new(n);
    for q in 1..n_f {
        c.push(gate::cnot(q - 1, q))?;
    }
    Ok(c)
}

/// Ring bonds split into parallel moments.
fn ring_layers(n: usize) -> Vec<Vec<(usize, usize)>> {
    let bonds: Vec<(usize, usize)> = if n == 2 {
        vec![(0, 1)]
    } else {
        (0..n).map(|j| (j, (j + 1) % n)).collect()
    };
    let mut layers: Vec<Vec<(usize, usize)>> = Vec::new();
    for b in bonds {
        match layers.iter_mut().find(|l| {
            l.iter()
                .all(|&(x, y)| x != b.0 && x != b.1 && y != b.0 && y != b.1)
        }) {
            Some(l) => l.push(b),
            None => layers.push(vec![b]),
        }
    }
    layers
}

/// `p` layers of `e^{i x sum XX}` on the ring followed by `e^{i z sum Z}`,
/// with `theta = (x_1, z_1, ..., x_p, z_p)`.
pub fn vha_circuit(theta: &[f64], p: usize, n: usize) -> Result<Circuit> {
    check_len("VHA", theta.len(), 2 * p)?;
    if n < 2 {
        return Err(Error::Parameter("VHA needs at least 2 qubits".into()));
    }
    let mut c = Circuit::new(n);
    for layer in theta.chunks(2) {
        let (x, z) = (layer[0], layer[1]);
        // for n = 2 the single bond stands for both ring bonds
        let x = if n == 2 { 2.0 * x } else { x };
        for moment in ring_layers(n) {
            c.push_moment(
                moment
                    .into_iter()
                    .map(|(a, b)| gate::xx_rotation(a, b, x))
                    .collect(),
            )?;
        }
        c.push_moment((0..n).map(|q| gate::z_rotation(q, z)).collect())?;
    }
    Ok(c)
}

/// Fermionic simulation gate on the `|00>, |01>, |10>, |11>` basis.
pub fn fsim_matrix(theta: f64, phi: f64) -> crate::linalg::CMatrix {
    let (co, si) = (c(theta.cos(), 0.0), c(0.0, theta.sin()));
    from_rows(&[
        &[ONE, ZERO, ZERO, ZERO],
        &[ZERO, co, si, ZERO],
        &[ZERO, si, co, ZERO],
        &[ZERO, ZERO, ZERO, cis(phi)],
    ])
}

pub fn fsim_gate(a: usize, b: usize, theta: f64, phi: f64) -> Result<Gate> {
    Gate::new(vec![a, b], fsim_matrix(theta, phi))
}

/// Number of fsim gates in a linear brick network.
pub fn fsw_gate_count(layers: usize, n: usize) -> usize {
    brick_pairs(n, layers).iter().map(Vec::len).sum()
}

/// Brick network of fsim gates, parameters `(theta, phi)` per gate in layer order.
pub fn fsw_network(params: &[f64], layers: usize, n: usize) -> Result<Circuit> {
    check_len(
        "fermionic swap network",
        params.len(),
        2 * fsw_gate_count(layers, n),
    )?;
    let mut c = Circuit::new(n);
    let mut p = params.chunks(2);
    for layer in brick_pairs(n, layers) {
        let mut gates = Vec::with_capacity(layer.len());
        for m in layer {
            let tp = p.next().expect("count checked");
            gates.push(fsim_gate(m, m + 1, tp[0], tp[1])?);
        }
        c.push_moment(gates)?;
    }
    Ok(c)
}

/// Preparation unitary for control-free estimation: the CNOT chain that maps
/// `|1_T>` onto the occupied modes, then the ansatz, then an optional basis
/// rotation. Fixes the vacuum when the ansatz conserves particle number.
pub fn compose_prep_for_control_free(
    ansatz: &Circuit,
    basis_rotation: Option<&Circuit>,
    n_f: usize,
) -> Result<Circuit> {
    let n = ansatz.num_qubits();
    if !conserves_number(ansatz) {
        return Err(Error::Parameter(
            "ansatz does not conserve particle number".into(),
        ));
    }
    let mut c = cnot_chain(n_f, n)?;
    c.append(ansatz)?;
    if let Some(b) = basis_rotation {
        c.append(b)?;
    }
    Ok(c.packed())
}

/// Givens ansatz and Givens basis rotation merged into one network.
pub fn merge_givens(
    ansatz: &GivensNetwork,
    basis_rotation: &GivensNetwork,
) -> Result<GivensNetwork> {
    ansatz.then(basis_rotation)
}

/// Whether every gate preserves the number of `|1>`s on its targets.
pub fn conserves_number(circuit: &Circuit) -> bool {
    circuit.gates().all(|g| {
        let m = g.matrix();
        let weight = |i: usize| i.count_ones();
        (0..m.nrows())
            .all(|r| (0..m.ncols()).all(|c| weight(r) == weight(c) || m[(r, c)].norm() < 1e-12))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzKind {
    Givens,
    Vha,
    Fsw,
}

/// Ansatz family with concrete parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzSpec {
    pub kind: AnsatzKind,
    pub num_qubits: usize,
    /// Layer count for VHA and fermionic-swap networks.
    #[serde(default)]
    pub layers: usize,
    /// Occupied modes in the initial state (Givens and fermionic-swap networks).
    #[serde(default)]
    pub occupation: usize,
    pub parameters: Vec<f64>,
}

impl AnsatzSpec {
    pub fn parameter_count(kind: AnsatzKind, num_qubits: usize, layers: usize) -> usize {
        match kind {
            AnsatzKind::Givens => num_qubits * num_qubits.saturating_sub(1) / 2,
            AnsatzKind::Vha => 2 * layers,
            AnsatzKind::Fsw => 2 * fsw_gate_count(layers, num_qubits),
        }
    }

    pub fn new(
        kind: AnsatzKind,
        num_qubits: usize,
        layers: usize,
        occupation: usize,
        parameters: Vec<f64>,
    ) -> Result<Self> {
        let spec = Self {
            kind,
            num_qubits,
            layers,
            occupation,
            parameters,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        check_len(
            &format!("{:?} ansatz", self.kind),
            self.parameters.len(),
            Self::parameter_count(self.kind, self.num_qubits, self.layers),
        )?;
        if self.kind != AnsatzKind::Vha
            && (self.occupation == 0 || self.occupation > self.num_qubits)
        {
            return Err(Error::Parameter(format!(
                "occupation {} must lie in 1..={}",
                self.occupation, self.num_qubits
            )));
        }
        Ok(())
    }

    /// Uniform angles in `[-pi, pi]`.
    pub fn random<R: Rng + ?Sized>(
        kind: AnsatzKind,
        num_qubits: usize,
        layers: usize,
        occupation: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let k = Self::parameter_count(kind, num_qubits, layers);
        let parameters = (0..k).map(|_| rng.random_range(-PI..=PI)).collect();
        Self::new(kind, num_qubits, layers, occupation, parameters)
    }

    pub fn with_parameters(&self, parameters: Vec<f64>) -> Result<Self> {
        Self::new(
            self.kind,
            self.num_qubits,
            self.layers,
            self.occupation,
            parameters,
        )
    }

    pub fn conserves_number(&self) -> bool {
        self.kind != AnsatzKind::Vha
    }

    /// The network as single-particle data, for Givens ansatze.
    pub fn givens(&self) -> Option<GivensNetwork> {
        (self.kind == AnsatzKind::Givens)
            .then(|| givens_ansatz(self.num_qubits, &self.parameters).expect("validated"))
    }

    /// Variational unitary `U(theta)` alone.
    pub fn unitary_circuit(&self) -> Result<Circuit> {
        match self.kind {
            AnsatzKind::Givens => givens_network(self.num_qubits, &self.parameters),
            AnsatzKind::Vha => vha_circuit(&self.parameters, self.layers, self.num_qubits),
            AnsatzKind::Fsw => fsw_network(&self.parameters, self.layers, self.num_qubits),
        }
    }

    /// Qubits flipped to build the initial product state.
    pub fn initial_ones(&self) -> Vec<usize> {
        match self.kind {
            AnsatzKind::Vha => (0..self.num_qubits).collect(),
            _ => (0..self.occupation).collect(),
        }
    }

    /// `|0...0> -> U(theta) |initial>`.
    pub fn prep_circuit(&self) -> Result<Circuit> {
        let mut c = Circuit::new(self.num_qubits);
        c.push_moment(self.initial_ones().into_iter().map(gate::x).collect())?;
        c.append(&self.unitary_circuit()?)?;
        Ok(c.packed())
    }
}
