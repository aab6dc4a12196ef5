//! Dense spectra of Hamiltonian files.

use std::fmt::Write as _;
use std::path::Path;

use vpe_core::hamiltonian::{
    load_hamiltonian_file, load_low_rank_file, LoadedHamiltonian, PauliSum,
};
use vpe_core::linalg::eigh;

use crate::error::CliError;

/// Dense diagonalization is capped here.
pub const MAX_QUBITS: usize = 12;

/// Rounds to 10 decimals and prints without trailing zeros.
pub fn number(x: f64) -> String {
    let r = (x * 1e10).round() / 1e10;
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

/// Groups sorted values that agree within `tol`.
fn multiplicities(values: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    for &v in values {
        match out.last_mut() {
            Some((first, count)) if (v - *first).abs() <= tol => *count += 1,
            _ => out.push((v, 1)),
        }
    }
    out
}

fn report(
    form: &str,
    operator: &PauliSum,
    single_particle: Option<Vec<f64>>,
) -> Result<String, CliError> {
    let n = operator.num_qubits();
    if n > MAX_QUBITS {
        return Err(CliError::Runtime(format!(
            "{n} qubits exceeds the dense limit of {MAX_QUBITS}"
        )));
    }
    let (spectrum, _) = eigh(&operator.matrix());
    let mut s = String::new();
    let _ = writeln!(s, "qubits: {n}");
    let _ = writeln!(s, "form: {form}");
    if let Some(eps) = single_particle {
        let _ = writeln!(
            s,
            "single-particle eigenvalues: {}",
            eps.iter().map(|&e| number(e)).collect::<Vec<_>>().join(" ")
        );
    }
    let _ = writeln!(s, "ground energy: {}", number(spectrum[0]));
    let levels: Vec<String> = multiplicities(&spectrum, 1e-9)
        .into_iter()
        .map(|(e, m)| format!("{} x{m}", number(e)))
        .collect();
    let _ = writeln!(s, "spectrum: {}", levels.join(", "));
    Ok(s)
}

/// Text report for a Hamiltonian file (`.json` files are low-rank factors).
pub fn oracle_report(path: &Path) -> Result<String, CliError> {
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        let factors = load_low_rank_file(path)?;
        let operator = factors.decomposition()?.operator();
        return report("low-rank factors", &operator, None);
    }
    match load_hamiltonian_file(path)? {
        LoadedHamiltonian::Pauli(p) => report("pauli", &p, None),
        LoadedHamiltonian::Fermion(f) => {
            let single = f.quadratic_matrix().map(|(h, _)| eigh(&h).0);
            report(
                "fermionic",
                &LoadedHamiltonian::Fermion(f).to_pauli(),
                single,
            )
        }
    }
}
