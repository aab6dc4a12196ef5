use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, I, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// `self * other = phase * result`
    pub fn mul(self, other: Pauli) -> (Complex64, Pauli) {
        match (self, other) {
            (Pauli::I, p) | (p, Pauli::I) => (ONE, p),
            (a, b) if a == b => (ONE, Pauli::I),
            (Pauli::X, Pauli::Y) => (I, Pauli::Z),
            (Pauli::Y, Pauli::X) => (-I, Pauli::Z),
            (Pauli::Y, Pauli::Z) => (I, Pauli::X),
            (Pauli::Z, Pauli::Y) => (-I, Pauli::X),
            (Pauli::Z, Pauli::X) => (I, Pauli::Y),
            (Pauli::X, Pauli::Z) => (-I, Pauli::Y),
            _ => unreachable!(),
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_symbol(c: char) -> Option<Pauli> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// Multiplies two letter patterns, returning the accumulated phase.
pub(crate) fn multiply_letters(a: &[Pauli], b: &[Pauli]) -> (Complex64, Vec<Pauli>) {
    let mut phase = ONE;
    let letters = a
        .iter()
        .zip(b)
        .map(|(&p, &q)| {
            let (ph, r) = p.mul(q);
            phase *= ph;
            r
        })
        .collect();
    (phase, letters)
}

/// Real multiple of a tensor product of Pauli operators.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliString {
    letters: Vec<Pauli>,
    coefficient: f64,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>, coefficient: f64) -> Self {
        Self {
            letters,
            coefficient,
        }
    }

    pub fn identity(num_qubits: usize, coefficient: f64) -> Self {
        Self {
            letters: vec![Pauli::I; num_qubits],
            coefficient,
        }
    }

    /// String with the listed `(qubit, letter)` factors and identity elsewhere.
    pub fn from_sparse(
        num_qubits: usize,
        factors: &[(usize, Pauli)],
        coefficient: f64,
    ) -> Result<Self> {
        let mut letters = vec![Pauli::I; num_qubits];
        for &(q, p) in factors {
            if q >= num_qubits {
                return Err(Error::Targets(format!(
                    "qubit {q} out of range for {num_qubits} qubits"
                )));
            }
            if letters[q] != Pauli::I {
                return Err(Error::Parameter(format!(
                    "qubit {q} listed twice in Pauli string"
                )));
            }
            letters[q] = p;
        }
        Ok(Self {
            letters,
            coefficient,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn with_coefficient(&self, coefficient: f64) -> Self {
        Self {
            letters: self.letters.clone(),
            coefficient,
        }
    }

    /// Qubits carrying a non-identity letter.
    pub fn support(&self) -> Vec<usize> {
        (0..self.letters.len())
            .filter(|&q| self.letters[q] != Pauli::I)
            .collect()
    }

    pub fn weight(&self) -> usize {
        self.support().len()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    /// True when every letter is `I` or `Z`.
    pub fn is_diagonal(&self) -> bool {
        self.letters
            .iter()
            .all(|&p| matches!(p, Pauli::I | Pauli::Z))
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(&a, &b)| a != Pauli::I && b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }

    /// For basis state `j`, returns `(k, phase)` with `P|j> = phase |k>`
    /// (coefficient excluded).
    pub fn action_on_basis(&self, j: usize) -> (usize, Complex64) {
        let n = self.letters.len();
        let mut k = j;
        let mut phase = ONE;
        for (q, &p) in self.letters.iter().enumerate() {
            let bit = (j >> (n - 1 - q)) & 1;
            match p {
                Pauli::I => {}
                Pauli::X => k ^= 1 << (n - 1 - q),
                Pauli::Y => {
                    k ^= 1 << (n - 1 - q);
                    phase *= if bit == 0 { I } else { -I };
                }
                Pauli::Z => {
                    if bit == 1 {
                        phase = -phase;
                    }
                }
            }
        }
        (k, phase)
    }

    /// Dense matrix including the coefficient.
    pub fn matrix(&self) -> CMatrix {
        let n = self.letters.len();
        let dim = 1usize << n;
        let mut m = CMatrix::from_element(dim, dim, ZERO);
        for j in 0..dim {
            let (k, phase) = self.action_on_basis(j);
            m[(k, j)] = phase * self.coefficient;
        }
        m
    }

    /// Compact label such as `X0 Y1`; the identity is `I`.
    pub fn label(&self) -> String {
        let parts: Vec<String> = self
            .support()
            .into_iter()
            .map(|q| format!("{}{}", self.letters[q].symbol(), q))
            .collect();
        if parts.is_empty() {
            "I".to_string()
        } else {
            parts.join(" ")
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.coefficient, self.label())
    }
}

/// Sum of Pauli strings with distinct letter patterns.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    num_qubits: usize,
    terms: Vec<PauliString>,
}

impl PauliSum {
    pub fn zero(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            terms: Vec::new(),
        }
    }

    /// Merges duplicate letter patterns and drops zero coefficients.
    pub fn from_terms(
        num_qubits: usize,
        terms: impl IntoIterator<Item = PauliString>,
    ) -> Result<Self> {
        let mut acc: BTreeMap<Vec<Pauli>, f64> = BTreeMap::new();
        for t in terms {
            if t.num_qubits() != num_qubits {
                return Err(Error::Dimension(format!(
                    "{}-qubit string in {num_qubits}-qubit sum",
                    t.num_qubits()
                )));
            }
            *acc.entry(t.letters).or_insert(0.0) += t.coefficient;
        }
        Ok(Self::from_map(num_qubits, acc))
    }

    fn from_map(num_qubits: usize, acc: BTreeMap<Vec<Pauli>, f64>) -> Self {
        let terms = acc
            .into_iter()
            .filter(|(_, c)| c.abs() > 1e-14)
            .map(|(letters, coefficient)| PauliString {
                letters,
                coefficient,
            })
            .collect();
        Self { num_qubits, terms }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn add(&self, other: &PauliSum) -> Result<PauliSum> {
        PauliSum::from_terms(
            self.num_qubits,
            self.terms.iter().chain(&other.terms).cloned(),
        )
    }

    pub fn scaled(&self, factor: f64) -> PauliSum {
        let terms = self
            .terms
            .iter()
            .map(|t| t.with_coefficient(t.coefficient * factor))
            .collect();
        PauliSum {
            num_qubits: self.num_qubits,
            terms,
        }
    }

    pub fn identity_coefficient(&self) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.is_identity())
            .map(|t| t.coefficient)
            .sum()
    }

    pub fn without_identity(&self) -> PauliSum {
        let terms = self
            .terms
            .iter()
            .filter(|t| !t.is_identity())
            .cloned()
            .collect();
        PauliSum {
            num_qubits: self.num_qubits,
            terms,
        }
    }

    /// Value of `<0...0| self |0...0>`: the sum of the diagonal-string coefficients.
    pub fn vacuum_expectation(&self) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.is_diagonal())
            .map(|t| t.coefficient)
            .sum()
    }

    pub fn all_commute(&self) -> bool {
        self.terms
            .iter()
            .enumerate()
            .all(|(i, a)| self.terms[i + 1..].iter().all(|b| a.commutes_with(b)))
    }

    pub fn commutes_with(&self, other: &PauliSum) -> bool {
        // Exact for sums whose strings pairwise commute across the two sums;
        // otherwise fall back to the dense commutator.
        if self
            .terms
            .iter()
            .all(|a| other.terms.iter().all(|b| a.commutes_with(b)))
        {
            return true;
        }
        let (a, b) = (self.matrix(), other.matrix());
        let comm = &a * &b - &b * &a;
        comm.iter().all(|z| z.norm() < 1e-10)
    }

    pub fn matrix(&self) -> CMatrix {
        let dim = 1usize << self.num_qubits;
        let mut m = CMatrix::from_element(dim, dim, ZERO);
        for t in &self.terms {
            for j in 0..dim {
                let (k, phase) = t.action_on_basis(j);
                m[(k, j)] += phase * t.coefficient;
            }
        }
        m
    }

    /// Sum of absolute coefficients, an upper bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.abs()).sum()
    }
}

/// Accumulator for Pauli strings with complex coefficients.
#[derive(Clone, Debug, Default)]
pub(crate) struct ComplexPauliSum {
    pub(crate) terms: BTreeMap<Vec<Pauli>, Complex64>,
}

impl ComplexPauliSum {
    pub(crate) fn add(&mut self, letters: Vec<Pauli>, coeff: Complex64) {
        *self.terms.entry(letters).or_insert(ZERO) += coeff;
    }

    /// Real part as a [`PauliSum`] and the largest discarded imaginary part.
    pub(crate) fn into_real(self, num_qubits: usize) -> (PauliSum, f64) {
        let max_imag = self.terms.values().map(|c| c.im.abs()).fold(0.0, f64::max);
        let acc = self.terms.into_iter().map(|(k, v)| (k, v.re)).collect();
        (PauliSum::from_map(num_qubits, acc), max_imag)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::sim::gate::{pauli_x_matrix, pauli_y_matrix, pauli_z_matrix};

    #[test]
    fn letter_products() {
        assert_eq!(Pauli::X.mul(Pauli::Y), (I, Pauli::Z));
        assert_eq!(Pauli::Z.mul(Pauli::Z), (ONE, Pauli::I));
        let (ph, _) = Pauli::Y.mul(Pauli::X);
        assert_eq!(ph, -I);
    }

    #[test]
    fn string_matrix_matches_kron() {
        let s = PauliString::new(vec![Pauli::X, Pauli::Y, Pauli::Z], 0.5);
        let expected = pauli_x_matrix()
            .kronecker(&pauli_y_matrix())
            .kronecker(&pauli_z_matrix())
            * Complex64::new(0.5, 0.0);
        assert!(max_abs_diff(&s.matrix(), &expected) < 1e-15);
    }

    #[test]
    fn duplicates_merge() {
        let z0 = PauliString::from_sparse(2, &[(0, Pauli::Z)], 1.0).unwrap();
        let sum = PauliSum::from_terms(2, vec![z0.clone(), z0.with_coefficient(2.0)]).unwrap();
        assert_eq!(sum.len(), 1);
        assert_eq!(sum.terms()[0].coefficient(), 3.0);
    }

    #[test]
    fn commutation_parity() {
        let xx = PauliString::new(vec![Pauli::X, Pauli::X], 1.0);
        let yy = PauliString::new(vec![Pauli::Y, Pauli::Y], 1.0);
        let zi = PauliString::new(vec![Pauli::Z, Pauli::I], 1.0);
        assert!(xx.commutes_with(&yy));
        assert!(!xx.commutes_with(&zi));
    }

    #[test]
    fn labels() {
        let s = PauliString::from_sparse(4, &[(0, Pauli::Z), (1, Pauli::Z)], 1.0).unwrap();
        assert_eq!(s.label(), "Z0 Z1");
        assert_eq!(PauliString::identity(3, 1.0).label(), "I");
    }
}
