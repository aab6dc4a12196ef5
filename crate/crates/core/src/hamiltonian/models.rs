use num_complex::Complex64;

use crate::error::{Error, Result};

use super::fermion::FermionOperator;
use super::pauli::{Pauli, PauliString, PauliSum};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Boundary {
    #[default]
    Periodic,
    Open,
}

fn bonds(n: usize, range: usize, boundary: Boundary) -> Vec<(usize, usize)> {
    match boundary {
        Boundary::Periodic => (0..n).map(|j| (j, (j + range) % n)).collect(),
        Boundary::Open => (0..n.saturating_sub(range))
            .map(|j| (j, j + range))
            .collect(),
    }
}

fn hopping(n: usize, range: usize, t: f64, boundary: Boundary) -> Result<FermionOperator> {
    if n < 2 {
        return Err(Error::Parameter(format!(
            "chain needs at least 2 sites, got {n}"
        )));
    }
    let mut op = FermionOperator::zero(n);
    for (a, b) in bonds(n, range, boundary) {
        op.add_term(&[(a, true), (b, false)], Complex64::new(-t, 0.0))?;
        op.add_term(&[(b, true), (a, false)], Complex64::new(-t, 0.0))?;
    }
    Ok(op)
}

/// `-t sum_j (c^dag_j c_{j+1} + h.c.)` on a periodic ring.
pub fn build_hopping_chain(n: usize, t: f64) -> Result<FermionOperator> {
    hopping(n, 1, t, Boundary::Periodic)
}

pub fn build_hopping_chain_with(n: usize, t: f64, boundary: Boundary) -> Result<FermionOperator> {
    hopping(n, 1, t, boundary)
}

/// `-t (sum_j (c^dag_j c_{j+2} + h.c.) + sum_j n_j)` on a periodic ring.
pub fn build_next_nearest_chain(n: usize, t: f64) -> Result<FermionOperator> {
    let mut op = hopping(n, 2, t, Boundary::Periodic)?;
    for j in 0..n {
        op.add_term(&[(j, true), (j, false)], Complex64::new(-t, 0.0))?;
    }
    Ok(op)
}

/// `J_z sum_j Z_j + J_x sum_j X_j X_{j+1}` with periodic boundary.
pub fn build_tfim(n: usize, j_z: f64, j_x: f64) -> Result<PauliSum> {
    if n < 2 {
        return Err(Error::Parameter(format!(
            "chain needs at least 2 sites, got {n}"
        )));
    }
    let mut terms = Vec::new();
    for j in 0..n {
        terms.push(PauliString::from_sparse(n, &[(j, Pauli::Z)], j_z)?);
    }
    for (a, b) in bonds(n, 1, Boundary::Periodic) {
        terms.push(PauliString::from_sparse(
            n,
            &[(a, Pauli::X), (b, Pauli::X)],
            j_x,
        )?);
    }
    PauliSum::from_terms(n, terms)
}
