//! Line-oriented Hamiltonian files and JSON low-rank factor files.
//!
//! Each non-comment line is a term followed by a real coefficient:
//! `X0 Y2 0.5` (Pauli form) or `+0 -1 1.0` (`c^dag_0 c_1`, fermionic form).
//! A bare number is a constant. One file uses a single form.

use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};

use super::decompose::LowRankFactors;
use super::fermion::{FermionOperator, Ladder};
use super::pauli::{Pauli, PauliString, PauliSum};

#[derive(Clone, Debug)]
pub enum LoadedHamiltonian {
    Pauli(PauliSum),
    Fermion(FermionOperator),
}

impl LoadedHamiltonian {
    pub fn num_qubits(&self) -> usize {
        match self {
            LoadedHamiltonian::Pauli(p) => p.num_qubits(),
            LoadedHamiltonian::Fermion(f) => f.num_modes(),
        }
    }

    /// Qubit operator, through Jordan-Wigner for fermionic files.
    pub fn to_pauli(&self) -> PauliSum {
        match self {
            LoadedHamiltonian::Pauli(p) => p.clone(),
            LoadedHamiltonian::Fermion(f) => super::jw::jordan_wigner(f).operator,
        }
    }
}

enum Token {
    Pauli(usize, Pauli),
    Ladder(Ladder),
}

fn parse_token(tok: &str) -> Option<Token> {
    let mut chars = tok.chars();
    let head = chars.next()?;
    let index: usize = chars.as_str().parse().ok()?;
    match head {
        '+' => Some(Token::Ladder((index, true))),
        '-' => Some(Token::Ladder((index, false))),
        c => Pauli::from_symbol(c).map(|p| Token::Pauli(index, p)),
    }
}

/// Parses the text format.
pub fn parse_hamiltonian(text: &str) -> Result<LoadedHamiltonian> {
    let mut pauli: Vec<(Vec<(usize, Pauli)>, f64)> = Vec::new();
    let mut fermion: Vec<(Vec<Ladder>, f64)> = Vec::new();
    let mut constant = 0.0;
    let mut width = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let (coeff_tok, term_toks) = tokens.split_last().expect("non-empty line");
        let coeff: f64 = coeff_tok
            .parse()
            .map_err(|_| err(format!("invalid coefficient '{coeff_tok}'")))?;
        if !coeff.is_finite() {
            return Err(err(format!("coefficient '{coeff_tok}' is not finite")));
        }
        let mut factors = Vec::new();
        let mut ladders = Vec::new();
        for tok in term_toks {
            match parse_token(tok) {
                Some(Token::Pauli(q, p)) => factors.push((q, p)),
                Some(Token::Ladder(l)) => ladders.push(l),
                None => return Err(err(format!("unrecognised term '{tok}'"))),
            }
            let q = factors
                .last()
                .map(|f| f.0)
                .into_iter()
                .chain(ladders.last().map(|l| l.0));
            width = width.max(q.max().unwrap_or(0) + 1);
        }
        match (factors.is_empty(), ladders.is_empty()) {
            (true, true) => constant += coeff,
            (false, true) => {
                if !fermion.is_empty() {
                    return Err(err("Pauli term in a fermionic file".into()));
                }
                let mut seen = std::collections::BTreeSet::new();
                if let Some((q, _)) = factors.iter().find(|(q, _)| !seen.insert(*q)) {
                    return Err(err(format!("qubit {q} appears twice")));
                }
                pauli.push((factors, coeff));
            }
            (true, false) => {
                if !pauli.is_empty() {
                    return Err(err("fermionic term in a Pauli file".into()));
                }
                fermion.push((ladders, coeff));
            }
            (false, false) => return Err(err("mixed Pauli and fermionic factors".into())),
        }
    }
    let width = width.max(1);
    if !fermion.is_empty() {
        let mut op = FermionOperator::zero(width);
        for (ladders, c) in fermion {
            op.add_term(&ladders, Complex64::new(c, 0.0))?;
        }
        op.add_constant(constant);
        let herm = op.hermiticity_error();
        if herm > 1e-12 {
            return Err(Error::NotHermitian(herm));
        }
        return Ok(LoadedHamiltonian::Fermion(op));
    }
    let mut terms = Vec::with_capacity(pauli.len() + 1);
    for (factors, c) in pauli {
        terms.push(PauliString::from_sparse(width, &factors, c)?);
    }
    terms.push(PauliString::identity(width, constant));
    Ok(LoadedHamiltonian::Pauli(PauliSum::from_terms(
        width, terms,
    )?))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_hamiltonian_file(path: impl AsRef<Path>) -> Result<LoadedHamiltonian> {
    parse_hamiltonian(&read(path.as_ref())?)
}

pub fn load_low_rank_file(path: impl AsRef<Path>) -> Result<LowRankFactors> {
    parse_low_rank(&read(path.as_ref())?)
}

/// JSON factor file contents, checked for Hermiticity and shape.
pub fn parse_low_rank(text: &str) -> Result<LowRankFactors> {
    let factors: LowRankFactors = serde_json::from_str(text)?;
    let h = factors.one_body_matrix()?;
    let err = crate::linalg::hermiticity_error(&h);
    if err > 1e-10 {
        return Err(Error::NotHermitian(err));
    }
    for l in 0..factors.factors.len() {
        factors.factor(l)?;
    }
    Ok(factors)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_z_line() {
        let LoadedHamiltonian::Pauli(p) = parse_hamiltonian("Z0 1.0").unwrap() else {
            panic!()
        };
        assert_eq!(
            p,
            PauliSum::from_terms(1, [PauliString::new(vec![Pauli::Z], 1.0)]).unwrap()
        );
    }

    #[test]
    fn duplicates_merge() {
        let LoadedHamiltonian::Pauli(p) =
            parse_hamiltonian("X0 X1 0.5\n# c\n\nX0 X1 0.25\n").unwrap()
        else {
            panic!()
        };
        assert_eq!(p.len(), 1);
        assert!((p.terms()[0].coefficient() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn parse_error_reports_line() {
        match parse_hamiltonian("Z0 1.0\nQ1 2.0") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_hamiltonian("Z0 abc"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn non_hermitian_fermion_file() {
        assert!(matches!(
            parse_hamiltonian("+0 -1 1.0"),
            Err(Error::NotHermitian(_))
        ));
        let LoadedHamiltonian::Fermion(f) = parse_hamiltonian("+0 -1 1.0\n+1 -0 1.0\n0.5").unwrap()
        else {
            panic!()
        };
        assert_eq!(f.num_modes(), 2);
        assert!((f.constant().re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn mixed_forms_rejected() {
        assert!(matches!(
            parse_hamiltonian("Z0 1.0\n+0 -0 1.0"),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
