//! Circuit families for the single-control and control-free protocols.
//!
//! The target qubit is always qubit 0. Its initial rotation and its final
//! pre-rotation are single gates so that the compilation flags add no depth.

use num_complex::Complex64;

use crate::ansatz::{cnot_chain, AnsatzSpec};
use crate::error::{Error, Result};
use crate::hamiltonian::{BasisChange, Compilation, Evolution, EvolutionBlock};
use crate::linalg::{c, cis, from_rows, CMatrix, ONE, ZERO};
use crate::sim::{gate, Circuit, Gate};

use super::{MeasurementSetting, Protocol, Quadrature};

#[derive(Clone, Debug)]
pub struct VpeCircuit {
    protocol: Protocol,
    system_qubits: usize,
    /// System preparation (single control) or `U_p` with the target on qubit 0 (control free).
    prep: Circuit,
    evolution: Evolution,
    reference_energy: f64,
}

fn phase_matrix(phi: f64) -> CMatrix {
    from_rows(&[&[ONE, ZERO], &[ZERO, cis(phi)]])
}

fn sdg_matrix() -> CMatrix {
    from_rows(&[&[ONE, ZERO], &[ZERO, c(0.0, -1.0)]])
}

fn x_matrix() -> CMatrix {
    from_rows(&[&[ZERO, ONE], &[ONE, ZERO]])
}

impl VpeCircuit {
    /// `prep` maps `|0...0>` to the system state; the control is added in front.
    pub fn single_control(prep: Circuit, evolution: Evolution) -> Result<Self> {
        if prep.num_qubits() != evolution.num_qubits() {
            return Err(Error::Dimension(format!(
                "{}-qubit preparation with {}-qubit evolution",
                prep.num_qubits(),
                evolution.num_qubits()
            )));
        }
        Ok(Self {
            protocol: Protocol::SingleControl,
            system_qubits: prep.num_qubits(),
            prep,
            evolution,
            reference_energy: 0.0,
        })
    }

    /// `prep` maps `|0...0>` to the reference state and `|1 0...0>` to the system state.
    pub fn control_free(
        prep: Circuit,
        evolution: Evolution,
        reference_energy: f64,
    ) -> Result<Self> {
        let mut out = Self::single_control(prep, evolution)?;
        out.protocol = Protocol::ControlFree;
        out.reference_energy = reference_energy;
        Ok(out)
    }

    pub fn protocol(&self) -> Protocol {
        self.protocol
    }

    pub fn system_qubits(&self) -> usize {
        self.system_qubits
    }

    /// Total register width, control included.
    pub fn num_qubits(&self) -> usize {
        match self.protocol {
            Protocol::SingleControl => self.system_qubits + 1,
            Protocol::ControlFree => self.system_qubits,
        }
    }

    pub fn reference_energy(&self) -> f64 {
        self.reference_energy
    }

    /// Factor that turns the measured off-diagonal into `g(t)`.
    pub fn phase_correction(&self, t: f64) -> Complex64 {
        match self.protocol {
            Protocol::SingleControl => ONE,
            Protocol::ControlFree => cis(self.reference_energy * t),
        }
    }

    /// Everything between the target's initial rotation and its pre-rotation.
    pub fn body(&self, t: f64) -> Result<Circuit> {
        match self.protocol {
            Protocol::SingleControl => {
                let total = self.system_qubits + 1;
                let prep = self.prep.shifted(total, 1)?;
                let mut c = prep.clone();
                c.append(&self.evolution.controlled_circuit(t, 0, total, 1)?)?;
                c.append(&prep.inverse())?;
                Ok(c)
            }
            Protocol::ControlFree => {
                let mut c = self.prep.clone();
                c.append(&self.evolution.circuit(t))?;
                c.append(&self.prep.inverse())?;
                Ok(c)
            }
        }
    }

    /// Hadamard on the target followed by the compiled phase.
    pub fn initial_gate(phase: f64) -> Gate {
        gate::fuse_single(0, &[&gate::hadamard_matrix(), &phase_matrix(phase)])
    }

    /// Undo the compiled phase, rotate into the measured basis, optionally flip.
    pub fn final_gate(quadrature: Quadrature, flip: bool, phase: f64) -> Gate {
        let undo = phase_matrix(-phase);
        let sdg = sdg_matrix();
        let h = gate::hadamard_matrix();
        let x = x_matrix();
        let mut seq: Vec<&CMatrix> = vec![&undo];
        if quadrature == Quadrature::Y {
            seq.push(&sdg);
        }
        seq.push(&h);
        if flip {
            seq.push(&x);
        }
        gate::fuse_single(0, &seq)
    }

    /// Circuit up to, but excluding, the final pre-rotation.
    pub fn pre_final_circuit(&self, t: f64, phase: f64) -> Result<Circuit> {
        let mut c = Circuit::new(self.num_qubits());
        c.push(Self::initial_gate(phase))?;
        c.append(&self.body(t)?)?;
        Ok(c.packed())
    }

    /// Full circuit for one measurement setting; the pre-rotation is the last moment.
    pub fn circuit(&self, t: f64, setting: &MeasurementSetting) -> Result<Circuit> {
        let mut c = self.pre_final_circuit(t, setting.phase)?;
        c.push_moment(vec![Self::final_gate(
            setting.quadrature,
            setting.flip,
            setting.phase,
        )])?;
        Ok(c)
    }
}

/// Control-free family for a Givens ansatz whose summand evolves through a
/// single Givens basis change: the ansatz and the basis change merge into one
/// network, leaving only diagonal phases in the evolution.
pub fn control_free_givens(
    ansatz: &AnsatzSpec,
    evolution: &Evolution,
    reference_energy: f64,
    compilation: Compilation,
) -> Result<Option<VpeCircuit>> {
    let Some(net) = ansatz.givens() else {
        return Ok(None);
    };
    let [block] = evolution.blocks() else {
        return Ok(None);
    };
    let BasisChange::Network(basis) = block.basis() else {
        return Ok(None);
    };
    let n = ansatz.num_qubits;
    let merged = net.then(basis)?;
    let mut prep = cnot_chain(ansatz.occupation, n)?;
    prep.append(&match compilation {
        Compilation::Matchgate => merged.circuit(),
        Compilation::Native => merged.native_circuit(),
    })?;
    let diagonal = EvolutionBlock::new(
        BasisChange::Circuit(Circuit::new(n)),
        block.diagonal().to_vec(),
    )?;
    let evolution = Evolution::new(n, vec![diagonal])?.with_compilation(compilation);
    VpeCircuit::control_free(prep.packed(), evolution, reference_energy).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    #[test]
    fn final_gate_zero_phase_matches_textbook() {
        let gx = VpeCircuit::final_gate(Quadrature::X, false, 0.0);
        assert!(max_abs_diff(gx.matrix(), &gate::hadamard_matrix()) < 1e-14);
        let gy = VpeCircuit::final_gate(Quadrature::Y, false, 0.0);
        let expected = gate::hadamard_matrix() * sdg_matrix();
        assert!(max_abs_diff(gy.matrix(), &expected) < 1e-14);
    }

    #[test]
    fn initial_and_final_phases_cancel() {
        let phi = 0.7;
        let m = VpeCircuit::final_gate(Quadrature::X, false, phi).matrix()
            * VpeCircuit::initial_gate(phi).matrix();
        assert!(max_abs_diff(&m, &CMatrix::identity(2, 2)) < 1e-14);
    }
}
