//! Unverified baseline: expectation values read directly off the noisy state.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::hamiltonian::PauliSum;
use crate::noise::attach_noise;
use crate::sim::{expectation, Circuit, DensityMatrix};
use crate::vpe::{Mode, NoiseSetup};

/// Noisy `prep |0...0>`.
pub fn noisy_state(prep: &Circuit, noise: &NoiseSetup) -> Result<DensityMatrix> {
    attach_noise(prep, &noise.model, &noise.mask)?
        .run(&DensityMatrix::zero_state(prep.num_qubits()))
}

/// `+1` probabilities of each non-identity string of `operator`, with their coefficients.
pub fn pauli_probabilities(rho: &DensityMatrix, operator: &PauliSum) -> Result<Vec<(f64, f64)>> {
    operator
        .without_identity()
        .terms()
        .iter()
        .map(|p| {
            let single = PauliSum::from_terms(operator.num_qubits(), [p.with_coefficient(1.0)])?;
            let mean = expectation(rho, &single)?;
            Ok((p.coefficient(), ((1.0 + mean) / 2.0).clamp(0.0, 1.0)))
        })
        .collect()
}

/// `shots` single-string measurements per term, each string on its own preparation.
pub fn sampled_from_probabilities<R: Rng + ?Sized>(
    identity: f64,
    probabilities: &[(f64, f64)],
    shots: usize,
    rng: &mut R,
) -> Result<f64> {
    if shots == 0 {
        return Err(Error::Parameter("shot count must be at least 1".into()));
    }
    let m = shots as u64;
    let mut total = identity;
    for &(c, p) in probabilities {
        let plus = if p <= 0.0 {
            0
        } else if p >= 1.0 {
            m
        } else {
            Binomial::new(m, p)
                .expect("probability in (0, 1)")
                .sample(rng)
        };
        total += c * (2.0 * plus as f64 / shots as f64 - 1.0);
    }
    Ok(total)
}

/// `Tr[rho H]` on the noisy prepared state, exactly or from `M` shots per string.
pub fn tomography_estimate<R: Rng + ?Sized>(
    operator: &PauliSum,
    prep: &Circuit,
    noise: &NoiseSetup,
    mode: Mode,
    rng: &mut R,
) -> Result<f64> {
    let rho = noisy_state(prep, noise)?;
    match mode {
        Mode::Exact => expectation(&rho, operator),
        Mode::Sampled { shots } => {
            let probs = pauli_probabilities(&rho, operator)?;
            sampled_from_probabilities(operator.identity_coefficient(), &probs, shots, rng)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{Pauli, PauliString};
    use crate::rng::rng_for;
    use crate::sim::gate;

    #[test]
    fn sampled_converges_to_exact() {
        let op = PauliSum::from_terms(
            2,
            [
                PauliString::new(vec![Pauli::Z, Pauli::I], 0.7),
                PauliString::new(vec![Pauli::X, Pauli::X], -0.4),
                PauliString::identity(2, 0.25),
            ],
        )
        .unwrap();
        let mut prep = Circuit::new(2);
        prep.push(gate::h(0)).unwrap();
        prep.push(gate::cnot(0, 1)).unwrap();
        let noise = NoiseSetup::noiseless();
        let mut rng = rng_for(5, &[]);
        let exact = tomography_estimate(&op, &prep, &noise, Mode::Exact, &mut rng).unwrap();
        assert!((exact - (0.25 - 0.4)).abs() < 1e-12);
        let sampled = tomography_estimate(
            &op,
            &prep,
            &noise,
            Mode::Sampled { shots: 1_000_000 },
            &mut rng,
        )
        .unwrap();
        assert!((sampled - exact).abs() < 5e-3);
    }
}
