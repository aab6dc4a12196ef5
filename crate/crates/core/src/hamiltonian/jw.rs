use num_complex::Complex64;

use crate::linalg::{c, ONE};

use super::fermion::{FermionOperator, Ladder};
use super::pauli::{multiply_letters, ComplexPauliSum, Pauli, PauliSum};

/// Qubit image of a fermionic operator.
#[derive(Clone, Debug)]
pub struct JordanWigner {
    pub operator: PauliSum,
    /// Largest imaginary coefficient dropped; nonzero means the input was not Hermitian.
    pub max_imaginary: f64,
}

impl JordanWigner {
    pub fn is_hermitian(&self) -> bool {
        self.max_imaginary < 1e-12
    }
}

fn ladder_strings(n: usize, (mode, dagger): Ladder) -> [(Vec<Pauli>, Complex64); 2] {
    let mut x = vec![Pauli::I; n];
    for l in x.iter_mut().take(mode) {
        *l = Pauli::Z;
    }
    let mut y = x.clone();
    x[mode] = Pauli::X;
    y[mode] = Pauli::Y;
    let y_coeff = if dagger { c(0.0, -0.5) } else { c(0.0, 0.5) };
    [(x, c(0.5, 0.0)), (y, y_coeff)]
}

/// Standard Jordan-Wigner map: mode `j` on qubit `j`, occupied = `|1>`.
pub fn jordan_wigner(op: &FermionOperator) -> JordanWigner {
    let n = op.num_modes();
    let mut acc = ComplexPauliSum::default();
    for (ops, coeff) in op.terms() {
        let mut partial: Vec<(Vec<Pauli>, Complex64)> = vec![(vec![Pauli::I; n], ONE)];
        for &l in ops {
            let mut next = Vec::with_capacity(partial.len() * 2);
            for (letters, c0) in &partial {
                for (s, c1) in ladder_strings(n, l) {
                    let (phase, prod) = multiply_letters(letters, &s);
                    next.push((prod, c0 * c1 * phase));
                }
            }
            partial = next;
        }
        for (letters, c0) in partial {
            acc.add(letters, c0 * coeff);
        }
    }
    let (operator, max_imaginary) = acc.into_real(n);
    JordanWigner {
        operator,
        max_imaginary,
    }
}
