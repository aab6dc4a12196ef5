use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, ZERO};

/// A ladder operator: `(mode, true)` is `c^dag_mode`, `(mode, false)` is `c_mode`.
pub type Ladder = (usize, bool);

/// Sum of products of fermionic ladder operators, kept in normal order
/// (creators left of annihilators, each group by descending mode).
#[derive(Clone, Debug, PartialEq)]
pub struct FermionOperator {
    num_modes: usize,
    terms: BTreeMap<Vec<Ladder>, Complex64>,
}

fn normal_order_term(ops: Vec<Ladder>, coeff: Complex64) -> Vec<(Vec<Ladder>, Complex64)> {
    let mut out = Vec::new();
    let mut stack = vec![(ops, coeff)];
    while let Some((mut ops, mut coeff)) = stack.pop() {
        for i in 1..ops.len() {
            for j in (1..=i).rev() {
                let (a, b) = (ops[j - 1], ops[j]);
                let swap = if a.1 == b.1 { b.0 > a.0 } else { b.1 };
                if !swap {
                    break;
                }
                if a.0 == b.0 {
                    // c_k c^dag_k = 1 - c^dag_k c_k
                    let mut reduced = ops.clone();
                    reduced.drain(j - 1..=j);
                    stack.push((reduced, coeff));
                }
                ops.swap(j - 1, j);
                coeff = -coeff;
            }
        }
        if ops.windows(2).all(|w| w[0] != w[1]) {
            out.push((ops, coeff));
        }
    }
    out
}

impl FermionOperator {
    pub fn zero(num_modes: usize) -> Self {
        Self {
            num_modes,
            terms: BTreeMap::new(),
        }
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    /// Adds `coeff * ops` (any ordering), normal ordering on the way in.
    pub fn add_term(&mut self, ops: &[Ladder], coeff: Complex64) -> Result<()> {
        if let Some(&(m, _)) = ops.iter().find(|(m, _)| *m >= self.num_modes) {
            return Err(Error::Targets(format!(
                "mode {m} out of range for {} modes",
                self.num_modes
            )));
        }
        for (term, c) in normal_order_term(ops.to_vec(), coeff) {
            *self.terms.entry(term).or_insert(ZERO) += c;
        }
        self.terms.retain(|_, c| c.norm() > 1e-14);
        Ok(())
    }

    pub fn add_constant(&mut self, value: f64) {
        *self.terms.entry(Vec::new()).or_insert(ZERO) += Complex64::new(value, 0.0);
        self.terms.retain(|_, c| c.norm() > 1e-14);
    }

    pub fn add(&self, other: &FermionOperator) -> Result<FermionOperator> {
        let mut out = FermionOperator::zero(self.num_modes.max(other.num_modes));
        for (ops, c) in self.terms.iter().chain(&other.terms) {
            out.add_term(ops, *c)?;
        }
        Ok(out)
    }

    pub fn scaled(&self, factor: f64) -> FermionOperator {
        let terms = self
            .terms
            .iter()
            .map(|(k, v)| (k.clone(), v * factor))
            .collect();
        FermionOperator {
            num_modes: self.num_modes,
            terms,
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[Ladder], Complex64)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), *v))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant(&self) -> Complex64 {
        self.terms.get(&Vec::new()).copied().unwrap_or(ZERO)
    }

    pub fn adjoint(&self) -> FermionOperator {
        let mut out = FermionOperator::zero(self.num_modes);
        for (ops, c) in &self.terms {
            let rev: Vec<Ladder> = ops.iter().rev().map(|&(m, d)| (m, !d)).collect();
            out.add_term(&rev, c.conj())
                .expect("modes already validated");
        }
        out
    }

    /// Largest coefficient of `self - self^dag`.
    pub fn hermiticity_error(&self) -> f64 {
        let diff = self
            .add(&self.adjoint().scaled(-1.0))
            .expect("same mode count");
        diff.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    pub fn is_number_conserving(&self) -> bool {
        self.terms.keys().all(|ops| {
            let created = ops.iter().filter(|(_, d)| *d).count();
            2 * created == ops.len()
        })
    }

    /// Hopping matrix `t` and constant when the operator is `sum t_pq c^dag_p c_q + const`.
    pub fn quadratic_matrix(&self) -> Option<(CMatrix, f64)> {
        let n = self.num_modes;
        let mut t = CMatrix::zeros(n, n);
        let mut constant = 0.0;
        for (ops, c) in &self.terms {
            match ops.as_slice() {
                [] => constant += c.re,
                [(p, true), (q, false)] => t[(*p, *q)] += c,
                _ => return None,
            }
        }
        Some((t, constant))
    }

    /// `sum_pq t_pq c^dag_p c_q`
    pub fn from_hopping_matrix(t: &CMatrix) -> Result<FermionOperator> {
        let n = t.nrows();
        if t.ncols() != n {
            return Err(Error::Dimension("hopping matrix must be square".into()));
        }
        let mut op = FermionOperator::zero(n);
        for p in 0..n {
            for q in 0..n {
                if t[(p, q)].norm() > 0.0 {
                    op.add_term(&[(p, true), (q, false)], t[(p, q)])?;
                }
            }
        }
        Ok(op)
    }

    /// Product `self * other`.
    pub fn mul(&self, other: &FermionOperator) -> Result<FermionOperator> {
        let mut out = FermionOperator::zero(self.num_modes.max(other.num_modes));
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let ops: Vec<Ladder> = a.iter().chain(b).copied().collect();
                out.add_term(&ops, ca * cb)?;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;

    #[test]
    fn anticommutator_produces_identity() {
        // c_0 c^dag_0 = 1 - c^dag_0 c_0
        let mut op = FermionOperator::zero(1);
        op.add_term(&[(0, false), (0, true)], ONE).unwrap();
        assert_eq!(op.constant(), ONE);
        assert_eq!(op.len(), 2);
    }

    #[test]
    fn repeated_creators_vanish() {
        let mut op = FermionOperator::zero(2);
        op.add_term(&[(1, true), (1, true)], ONE).unwrap();
        assert!(op.is_empty());
    }

    #[test]
    fn swap_gives_sign() {
        let mut a = FermionOperator::zero(2);
        a.add_term(&[(0, true), (1, true)], ONE).unwrap();
        let mut b = FermionOperator::zero(2);
        b.add_term(&[(1, true), (0, true)], -ONE).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn hopping_plus_adjoint_is_hermitian() {
        let mut op = FermionOperator::zero(2);
        op.add_term(&[(0, true), (1, false)], ONE).unwrap();
        assert!(!op.is_hermitian(1e-12));
        let herm = op.add(&op.adjoint()).unwrap();
        assert!(herm.is_hermitian(1e-12));
        assert!(herm.is_number_conserving());
    }
}
