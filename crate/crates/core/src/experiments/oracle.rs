//! Reference values from plain matrix products, independent of the
//! simulator's state-update kernels.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::linalg::{eigh, embed, CMatrix, ONE};
use crate::sim::Circuit;

/// `C |0...0>` as a product of embedded gate matrices.
pub fn prepared_state(circuit: &Circuit) -> DVector<Complex64> {
    let n = circuit.num_qubits();
    let mut psi = DVector::from_element(1 << n, Complex64::new(0.0, 0.0));
    psi[0] = ONE;
    for g in circuit.gates() {
        psi = embed(n, g.targets(), g.matrix()) * psi;
    }
    psi
}

pub fn expectation_value(psi: &DVector<Complex64>, h: &CMatrix) -> f64 {
    (psi.adjoint() * h * psi)[(0, 0)].re
}

pub fn ground_energy(h: &CMatrix) -> f64 {
    eigh(h).0[0]
}

/// Lowest eigenvalue of `h` restricted to basis states with `occupation` set bits.
pub fn sector_ground_energy(h: &CMatrix, occupation: usize) -> f64 {
    let states: Vec<usize> = (0..h.nrows())
        .filter(|i| i.count_ones() as usize == occupation)
        .collect();
    if states.is_empty() {
        return f64::NAN;
    }
    let block = CMatrix::from_fn(states.len(), states.len(), |a, b| h[(states[a], states[b])]);
    eigh(&block).0[0]
}

/// Largest `|E|` of `h` with its trace part removed.
pub fn traceless_radius(h: &CMatrix) -> f64 {
    let shift = h.trace().re / h.nrows() as f64;
    eigh(h)
        .0
        .iter()
        .map(|e| (e - shift).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{gate, PureState};

    #[test]
    fn matches_state_vector_simulation() {
        let mut c = Circuit::new(3);
        c.push(gate::h(0)).unwrap();
        c.push(gate::cnot(0, 2)).unwrap();
        c.push(gate::xx_rotation(1, 2, 0.3)).unwrap();
        let mut psi = PureState::zero(3);
        psi.apply_circuit(&c).unwrap();
        let dense = prepared_state(&c);
        for (a, b) in dense.iter().zip(psi.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
