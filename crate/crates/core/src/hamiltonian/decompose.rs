//! Splitting a Hamiltonian into summands with exactly compilable evolutions.

use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::linalg::{eigh, CMatrix};

use super::evolution::{BasisChange, DiagonalTerm, Evolution, EvolutionBlock};
use super::fermion::FermionOperator;
use super::givens::{diagonalize_quadratic, GivensNetwork};
use super::jw::jordan_wigner;
use super::pauli::{PauliString, PauliSum};

/// Largest register for which summand spectra are found by dense diagonalization.
const DENSE_SPECTRUM_LIMIT: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SummandKind {
    PauliTerm,
    CommutingGroup,
    Quadratic,
    LowRankFactor,
}

/// One fast-forwardable piece `H_s` of a Hamiltonian.
#[derive(Clone, Debug)]
pub struct Summand {
    pub label: String,
    pub kind: SummandKind,
    /// Qubit image of `H_s`, identity part included.
    pub operator: PauliSum,
    pub evolution: Evolution,
    /// Eigenvalue multiset, ascending, when known.
    pub eigenvalues: Option<Vec<f64>>,
    /// Eigenvalue of the all-zero state when it is an eigenstate.
    pub reference_energy: Option<f64>,
}

/// Eigenvalue of `|0...0>` under `op`, if it is an eigenstate.
pub fn vacuum_eigenvalue(op: &PauliSum) -> Option<f64> {
    let mut off = BTreeMap::<usize, num_complex::Complex64>::new();
    let mut diag = 0.0;
    for s in op.terms() {
        let (k, phase) = s.action_on_basis(0);
        if k == 0 {
            diag += (phase * s.coefficient()).re;
        } else {
            *off.entry(k).or_default() += phase * s.coefficient();
        }
    }
    off.values().all(|v| v.norm() < 1e-12).then_some(diag)
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn subset_values(eps: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
    let n = eps.len();
    let values = (0..(1usize << n))
        .map(|mask| f((0..n).filter(|a| mask >> a & 1 == 1).map(|a| eps[a]).sum()))
        .collect();
    sorted(values)
}

impl Summand {
    /// A single Pauli string; eigenvalues `+-|c|`.
    pub fn pauli_term(string: &PauliString) -> Result<Self> {
        let n = string.num_qubits();
        let operator = PauliSum::from_terms(n, [string.clone()])?;
        let c = string.coefficient();
        let eigenvalues = if string.is_identity() {
            vec![c]
        } else {
            vec![-c.abs(), c.abs()]
        };
        Ok(Self {
            label: string.label(),
            kind: SummandKind::PauliTerm,
            reference_energy: vacuum_eigenvalue(&operator),
            evolution: Evolution::from_pauli_strings(n, [string])?,
            operator,
            eigenvalues: Some(eigenvalues),
        })
    }

    /// Mutually commuting strings evolved as a product of exact exponentials.
    pub fn commuting_group(label: impl Into<String>, operator: PauliSum) -> Result<Self> {
        let label = label.into();
        let terms = operator.terms();
        for (i, a) in terms.iter().enumerate() {
            if let Some(b) = terms[i + 1..].iter().find(|b| !a.commutes_with(b)) {
                return Err(Error::NonCommuting(format!(
                    "{label}: {} and {}",
                    a.label(),
                    b.label()
                )));
            }
        }
        let n = operator.num_qubits();
        let eigenvalues = (n <= DENSE_SPECTRUM_LIMIT).then(|| eigh(&operator.matrix()).0);
        Ok(Self {
            label,
            kind: SummandKind::CommutingGroup,
            reference_energy: vacuum_eigenvalue(&operator),
            evolution: Evolution::from_pauli_strings(n, terms)?,
            operator,
            eigenvalues,
        })
    }

    /// `sum_pq t_pq c^dag_p c_q + constant`, evolved in its eigenmode basis.
    pub fn quadratic(label: impl Into<String>, hopping: &CMatrix, constant: f64) -> Result<Self> {
        let diag = diagonalize_quadratic(hopping)?;
        let n = hopping.nrows();
        let mut terms: Vec<DiagonalTerm> = diag
            .energies
            .iter()
            .enumerate()
            .map(|(q, &a)| DiagonalTerm::Number { q, a })
            .collect();
        if constant != 0.0 {
            terms.push(DiagonalTerm::Global { a: constant });
        }
        let block = EvolutionBlock::new(BasisChange::Network(diag.basis_change.clone()), terms)?;
        let mut op = FermionOperator::from_hopping_matrix(hopping)?;
        op.add_constant(constant);
        Ok(Self {
            label: label.into(),
            kind: SummandKind::Quadratic,
            operator: hermitian_image(&op)?,
            evolution: Evolution::new(n, vec![block])?,
            eigenvalues: Some(subset_values(&diag.energies, |e| e + constant)),
            reference_energy: Some(constant),
        })
    }

    /// `(sum_pq t_pq c^dag_p c_q)^2` with `t = basis diag(eigs) basis^dag`.
    pub fn low_rank_factor(
        label: impl Into<String>,
        basis: &CMatrix,
        eigs: &[f64],
    ) -> Result<Self> {
        let n = eigs.len();
        if basis.nrows() != n || basis.ncols() != n {
            return Err(Error::Dimension(format!(
                "factor basis is {}x{}, {n} eigenvalues",
                basis.nrows(),
                basis.ncols()
            )));
        }
        let network = GivensNetwork::from_unitary(&basis.adjoint())?;
        let mut terms = Vec::new();
        for a in 0..n {
            terms.push(DiagonalTerm::Number {
                q: a,
                a: eigs[a] * eigs[a],
            });
            for b in a + 1..n {
                terms.push(DiagonalTerm::NumberPair {
                    qa: a,
                    qb: b,
                    a: 2.0 * eigs[a] * eigs[b],
                });
            }
        }
        let block = EvolutionBlock::new(BasisChange::Network(network), terms)?;
        let t = basis
            * CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                n,
                eigs.iter().map(|&e| e.into()),
            ))
            * basis.adjoint();
        let one = FermionOperator::from_hopping_matrix(&t)?;
        Ok(Self {
            label: label.into(),
            kind: SummandKind::LowRankFactor,
            operator: hermitian_image(&one.mul(&one)?)?,
            evolution: Evolution::new(n, vec![block])?,
            eigenvalues: Some(subset_values(eigs, |e| e * e)),
            reference_energy: Some(0.0),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.operator.num_qubits()
    }

    /// Distinct eigenvalues, merged within `tol`.
    pub fn distinct_eigenvalues(&self, tol: f64) -> Option<Vec<f64>> {
        let eigs = self.eigenvalues.as_ref()?;
        let mut out: Vec<f64> = Vec::new();
        for &e in eigs {
            if out.last().is_none_or(|&l| e - l > tol) {
                out.push(e);
            }
        }
        Some(out)
    }

    /// Largest eigenvalue magnitude (or a norm bound when the spectrum is unknown).
    pub fn spectral_radius(&self) -> f64 {
        match &self.eigenvalues {
            Some(e) => e.iter().fold(0.0, |m, x| f64::max(m, x.abs())),
            None => self.operator.norm_bound(),
        }
    }
}

fn hermitian_image(op: &FermionOperator) -> Result<PauliSum> {
    let jw = jordan_wigner(op);
    if !jw.is_hermitian() {
        return Err(Error::NotHermitian(jw.max_imaginary));
    }
    Ok(jw.operator)
}

/// `H = constant + sum_s H_s`.
#[derive(Clone, Debug)]
pub struct HamiltonianDecomposition {
    pub num_qubits: usize,
    pub summands: Vec<Summand>,
    pub constant: f64,
}

impl HamiltonianDecomposition {
    pub fn new(num_qubits: usize, summands: Vec<Summand>, constant: f64) -> Result<Self> {
        if let Some(s) = summands.iter().find(|s| s.num_qubits() != num_qubits) {
            return Err(Error::Dimension(format!(
                "summand {} has {} qubits, expected {num_qubits}",
                s.label,
                s.num_qubits()
            )));
        }
        Ok(Self {
            num_qubits,
            summands,
            constant,
        })
    }

    /// Qubit operator of the full Hamiltonian.
    pub fn operator(&self) -> PauliSum {
        let constant = PauliSum::from_terms(
            self.num_qubits,
            [PauliString::identity(self.num_qubits, self.constant)],
        )
        .expect("identity fits register");
        self.summands.iter().fold(constant, |acc, s| {
            acc.add(&s.operator).expect("common register")
        })
    }

    pub fn matrix(&self) -> CMatrix {
        let dim = 1usize << self.num_qubits;
        let id = CMatrix::identity(dim, dim) * num_complex::Complex64::from(self.constant);
        self.summands
            .iter()
            .fold(id, |acc, s| acc + s.operator.matrix())
    }

    /// Energy from per-summand expectation values.
    pub fn combine(&self, summand_values: &[f64]) -> Result<f64> {
        if summand_values.len() != self.summands.len() {
            return Err(Error::Dimension(format!(
                "{} values for {} summands",
                summand_values.len(),
                self.summands.len()
            )));
        }
        Ok(self.constant + summand_values.iter().sum::<f64>())
    }
}

/// One summand per non-identity Pauli string; the identity part becomes the constant.
pub fn decompose_pauli(op: &PauliSum) -> Result<HamiltonianDecomposition> {
    let summands = op
        .without_identity()
        .terms()
        .iter()
        .map(Summand::pauli_term)
        .collect::<Result<_>>()?;
    HamiltonianDecomposition::new(op.num_qubits(), summands, op.identity_coefficient())
}

fn mode_label(modes: &BTreeSet<usize>) -> String {
    modes
        .iter()
        .map(|m| m.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Groups fermionic terms with their Hermitian conjugates and maps each group
/// to a commuting set of Pauli strings.
///
/// Diagonal terms are grouped by their mode set; the rest by the set of modes
/// whose occupation changes together with the set of spectator modes.
pub fn decompose_number_conserving(op: &FermionOperator) -> Result<HamiltonianDecomposition> {
    if !op.is_number_conserving() {
        return Err(Error::NotNumberConserving);
    }
    let n = op.num_modes();
    let mut constant = op.constant().re;
    let mut groups: BTreeMap<(bool, Vec<usize>, Vec<usize>), FermionOperator> = BTreeMap::new();
    for (ops, coeff) in op.terms() {
        if ops.is_empty() {
            continue;
        }
        let created: BTreeSet<usize> = ops.iter().filter(|l| l.1).map(|l| l.0).collect();
        let annihilated: BTreeSet<usize> = ops.iter().filter(|l| !l.1).map(|l| l.0).collect();
        let key = if created == annihilated {
            (false, created.into_iter().collect(), Vec::new())
        } else {
            let moved = created
                .symmetric_difference(&annihilated)
                .copied()
                .collect();
            let spectators = created.intersection(&annihilated).copied().collect();
            (true, moved, spectators)
        };
        groups
            .entry(key)
            .or_insert_with(|| FermionOperator::zero(n))
            .add_term(ops, coeff)?;
    }
    let mut summands = Vec::new();
    for ((off_diagonal, modes, spectators), group) in groups {
        let image = hermitian_image(&group)?;
        constant += image.identity_coefficient();
        let image = image.without_identity();
        if image.is_empty() {
            continue;
        }
        let modes: BTreeSet<usize> = modes.into_iter().collect();
        let label = if off_diagonal {
            let spectators: BTreeSet<usize> = spectators.into_iter().collect();
            if spectators.is_empty() {
                format!("hop[{}]", mode_label(&modes))
            } else {
                format!("hop[{}|{}]", mode_label(&modes), mode_label(&spectators))
            }
        } else {
            format!("n[{}]", mode_label(&modes))
        };
        summands.push(Summand::commuting_group(label, image)?);
    }
    HamiltonianDecomposition::new(n, summands, constant)
}

/// Number-conserving groups with the diagonal part split into single `Z`
/// strings, each of which has the vacuum as an eigenstate.
pub fn decompose_number_conserving_split(op: &FermionOperator) -> Result<HamiltonianDecomposition> {
    let grouped = decompose_number_conserving(op)?;
    let n = grouped.num_qubits;
    let mut diagonal = PauliSum::zero(n);
    let mut rest = Vec::new();
    for s in grouped.summands {
        if s.operator.terms().iter().all(PauliString::is_diagonal) {
            diagonal = diagonal.add(&s.operator)?;
        } else {
            rest.push(s);
        }
    }
    let mut summands = Vec::new();
    for string in diagonal.terms() {
        if string.coefficient().abs() > 1e-14 {
            summands.push(Summand::pauli_term(string)?);
        }
    }
    summands.extend(rest);
    HamiltonianDecomposition::new(n, summands, grouped.constant)
}

/// Whole quadratic Hamiltonian as a single summand.
pub fn decompose_quadratic(op: &FermionOperator) -> Result<HamiltonianDecomposition> {
    let (t, constant) = op
        .quadratic_matrix()
        .ok_or_else(|| Error::Parameter("operator is not quadratic".into()))?;
    let s = Summand::quadratic("quadratic", &t, 0.0)?;
    HamiltonianDecomposition::new(op.num_modes(), vec![s], constant)
}

/// A matrix entry that is either real or `[re, im]`.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl From<Entry> for num_complex::Complex64 {
    fn from(e: Entry) -> Self {
        match e {
            Entry::Real(r) => r.into(),
            Entry::Complex([re, im]) => num_complex::Complex64::new(re, im),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorSpec {
    pub basis: Vec<Vec<Entry>>,
    pub eigs: Vec<f64>,
}

/// Two-body factorization `H = constant + one_body + sum_l (sum_pq t^(l)_pq c^dag_p c_q)^2`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowRankFactors {
    #[serde(default)]
    pub constant: f64,
    pub one_body: Vec<Vec<Entry>>,
    pub factors: Vec<FactorSpec>,
}

pub(crate) fn square_matrix(rows: &[Vec<Entry>], what: &str) -> Result<CMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension(format!("{what} is not square")));
    }
    Ok(CMatrix::from_fn(n, n, |r, c| rows[r][c].into()))
}

impl LowRankFactors {
    pub fn num_modes(&self) -> usize {
        self.one_body.len()
    }

    pub fn one_body_matrix(&self) -> Result<CMatrix> {
        square_matrix(&self.one_body, "one_body")
    }

    pub fn factor(&self, l: usize) -> Result<(CMatrix, Vec<f64>)> {
        let f = self
            .factors
            .get(l)
            .ok_or_else(|| Error::Parameter(format!("no factor {l}")))?;
        let basis = square_matrix(&f.basis, "factor basis")?;
        if basis.nrows() != self.num_modes() || f.eigs.len() != self.num_modes() {
            return Err(Error::Dimension(format!(
                "factor {l} does not match {} modes",
                self.num_modes()
            )));
        }
        Ok((basis, f.eigs.clone()))
    }

    /// Quadratic summand followed by one summand per factor.
    pub fn decomposition(&self) -> Result<HamiltonianDecomposition> {
        let mut summands = vec![Summand::quadratic(
            "one-body",
            &self.one_body_matrix()?,
            0.0,
        )?];
        for l in 0..self.factors.len() {
            let (basis, eigs) = self.factor(l)?;
            summands.push(Summand::low_rank_factor(
                format!("factor{l}"),
                &basis,
                &eigs,
            )?);
        }
        HamiltonianDecomposition::new(self.num_modes(), summands, self.constant)
    }
}

/// Circuit for `prod_l e^{i H^(l) t}` over the two-body factors.
pub fn low_rank_evolution(factors: &LowRankFactors, t: f64) -> Result<crate::sim::Circuit> {
    let mut out = crate::sim::Circuit::new(factors.num_modes());
    for l in 0..factors.factors.len() {
        let (basis, eigs) = factors.factor(l)?;
        out.append(
            &Summand::low_rank_factor("", &basis, &eigs)?
                .evolution
                .circuit(t),
        )?;
    }
    Ok(out)
}
