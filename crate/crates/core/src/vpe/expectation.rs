//! Verified expectation values: one phase function per summand, each
//! post-processed into a renormalized `<H_s>`, then summed.

use std::f64::consts::PI;

use crate::ansatz::{compose_prep_for_control_free, AnsatzSpec};
use crate::error::{Error, Result};
use crate::hamiltonian::{Compilation, HamiltonianDecomposition, PauliSum, Summand};
use crate::noise::attach_noise;
use crate::signal::{
    fit_known_phases, prony, renormalized_expectation, single_point_estimate, SpectralEstimate,
};
use crate::sim::{expectation, gate, Circuit, DensityMatrix};

use super::circuits::{control_free_givens, VpeCircuit};
use super::estimate::{phase_function, NoiseSetup};
use super::{CompilationFlags, Mode, PhaseFunctionRecord, Protocol};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PostProcessing {
    #[default]
    Prony,
    KnownPhases,
    SinglePoint,
}

/// Uniform grid `t_k = k * step`, `k = 0..points`, and the Prony model order.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub step: f64,
    pub points: usize,
    pub order: usize,
}

impl TimeGrid {
    pub fn times(&self) -> Vec<f64> {
        (0..self.points).map(|k| k as f64 * self.step).collect()
    }
}

/// Spacing `pi / (4 rho)` keeps every `E dt` inside `(-pi/4, pi/4]`; the grid
/// holds `max(4, 2 d)` points for `d` distinct eigenvalues and the order is `d`.
/// Without a known spectrum the order falls back to 4.
pub fn default_time_grid(summand: &Summand) -> TimeGrid {
    let radius = summand.spectral_radius();
    let step = if radius > 1e-12 {
        PI / (4.0 * radius)
    } else {
        1.0
    };
    let distinct = summand.distinct_eigenvalues(1e-9).map_or(4, |d| d.len());
    TimeGrid {
        step,
        points: (2 * distinct).max(4),
        order: distinct,
    }
}

#[derive(Clone, Debug)]
pub struct ExpectationOptions {
    pub protocol: Protocol,
    pub flags: CompilationFlags,
    pub mode: Mode,
    pub post: PostProcessing,
    pub compilation: Compilation,
    /// Merge a Givens ansatz with a Givens basis change (control-free only).
    pub merge_givens: bool,
    /// Replaces every summand's default grid.
    pub time_grid: Option<TimeGrid>,
    /// Overrides the Prony order while keeping the default grid.
    pub prony_order: Option<usize>,
    pub seed: u64,
}

impl Default for ExpectationOptions {
    fn default() -> Self {
        Self {
            protocol: Protocol::SingleControl,
            flags: CompilationFlags::default(),
            mode: Mode::Exact,
            post: PostProcessing::Prony,
            compilation: Compilation::Matchgate,
            merge_givens: true,
            time_grid: None,
            prony_order: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SummandEstimate {
    pub label: String,
    pub value: f64,
    pub record: PhaseFunctionRecord,
    pub spectral: Option<SpectralEstimate>,
}

#[derive(Clone, Debug)]
pub struct VerifiedExpectation {
    pub value: f64,
    pub summands: Vec<SummandEstimate>,
}

/// `|0...0> -> U(theta)|initial>` in the requested gate set.
pub fn ansatz_prep(ansatz: &AnsatzSpec, compilation: Compilation) -> Result<Circuit> {
    match (compilation, ansatz.givens()) {
        (Compilation::Native, Some(net)) => {
            let mut c = Circuit::new(ansatz.num_qubits);
            c.push_moment(ansatz.initial_ones().into_iter().map(gate::x).collect())?;
            c.append(&net.native_circuit())?;
            Ok(c.packed())
        }
        _ => ansatz.prep_circuit(),
    }
}

/// Circuit family estimating `summand` on the ansatz state.
pub fn summand_circuit(
    summand: &Summand,
    ansatz: &AnsatzSpec,
    options: &ExpectationOptions,
) -> Result<VpeCircuit> {
    if summand.num_qubits() != ansatz.num_qubits {
        return Err(Error::Dimension(format!(
            "{}-qubit summand with {}-qubit ansatz",
            summand.num_qubits(),
            ansatz.num_qubits
        )));
    }
    let evolution = summand
        .evolution
        .clone()
        .with_compilation(options.compilation);
    match options.protocol {
        Protocol::SingleControl => {
            VpeCircuit::single_control(ansatz_prep(ansatz, options.compilation)?, evolution)
        }
        Protocol::ControlFree => {
            let e_r = summand.reference_energy.ok_or_else(|| {
                Error::Protocol(format!(
                    "the vacuum is not an eigenstate of summand {}",
                    summand.label
                ))
            })?;
            if options.merge_givens {
                if let Some(vc) = control_free_givens(ansatz, &evolution, e_r, options.compilation)?
                {
                    return Ok(vc);
                }
            }
            let unitary = match (options.compilation, ansatz.givens()) {
                (Compilation::Native, Some(net)) => net.native_circuit(),
                _ => ansatz.unitary_circuit()?,
            };
            let prep = compose_prep_for_control_free(&unitary, None, ansatz.occupation)?;
            VpeCircuit::control_free(prep, evolution, e_r)
        }
    }
}

fn post_process(
    summand: &Summand,
    record: &PhaseFunctionRecord,
    grid: &TimeGrid,
    post: PostProcessing,
) -> Result<(f64, Option<SpectralEstimate>)> {
    match post {
        PostProcessing::Prony => {
            let est = prony(&record.t_grid, &record.g, grid.order)?;
            Ok((renormalized_expectation(&est)?, Some(est)))
        }
        PostProcessing::KnownPhases => {
            let eigs = summand.distinct_eigenvalues(1e-9).ok_or_else(|| {
                Error::Protocol("known-phase fitting needs the summand spectrum".into())
            })?;
            let est = fit_known_phases(&record.t_grid, &record.g, &eigs)?;
            Ok((renormalized_expectation(&est)?, Some(est)))
        }
        PostProcessing::SinglePoint => {
            if record.len() < 2 {
                return Err(Error::Parameter(
                    "single-point estimation needs t = 0 and one more time".into(),
                ));
            }
            Ok((
                single_point_estimate(record.g[1], record.g[0], record.t_grid[1])?,
                None,
            ))
        }
    }
}

/// Estimate for one summand; `index` seeds its sampling stream.
pub fn estimate_summand(
    summand: &Summand,
    index: usize,
    ansatz: &AnsatzSpec,
    noise: &NoiseSetup,
    options: &ExpectationOptions,
) -> Result<SummandEstimate> {
    let wrap = |source: Error| Error::Summand {
        label: summand.label.clone(),
        source: Box::new(source),
    };
    let mut grid = options
        .time_grid
        .unwrap_or_else(|| default_time_grid(summand));
    if let Some(order) = options.prony_order {
        grid.order = order;
    }
    let vc = summand_circuit(summand, ansatz, options).map_err(wrap)?;
    let record = phase_function(
        &vc,
        &grid.times(),
        noise,
        options.flags,
        options.mode,
        options.seed,
        &[index as u64],
    )
    .map_err(wrap)?;
    let (value, spectral) = post_process(summand, &record, &grid, options.post).map_err(wrap)?;
    Ok(SummandEstimate {
        label: summand.label.clone(),
        value,
        record,
        spectral,
    })
}

/// `constant + sum_s <H_s>` with each `<H_s>` from its own verified phase function.
pub fn verified_expectation(
    decomposition: &HamiltonianDecomposition,
    ansatz: &AnsatzSpec,
    noise: &NoiseSetup,
    options: &ExpectationOptions,
) -> Result<VerifiedExpectation> {
    let summands = decomposition
        .summands
        .iter()
        .enumerate()
        .map(|(i, s)| estimate_summand(s, i, ansatz, noise, options))
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = summands.iter().map(|s| s.value).collect();
    Ok(VerifiedExpectation {
        value: decomposition.combine(&values)?,
        summands,
    })
}

/// Unmitigated baseline: `Tr[rho H]` on the noisy prepared state.
pub fn tomography_expectation(
    operator: &PauliSum,
    prep: &Circuit,
    noise: &NoiseSetup,
) -> Result<f64> {
    let plan = attach_noise(prep, &noise.model, &noise.mask)?;
    let rho = plan.run(&DensityMatrix::zero_state(prep.num_qubits()))?;
    expectation(&rho, operator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::AnsatzKind;
    use crate::hamiltonian::{
        build_hopping_chain, decompose_number_conserving, decompose_pauli, Pauli, PauliString,
    };
    use crate::linalg::{eigh, CMatrix};
    use crate::sim::PureState;

    fn dense_energy(h: &CMatrix, prep: &Circuit) -> f64 {
        let mut psi = PureState::zero(prep.num_qubits());
        psi.apply_circuit(prep).unwrap();
        let v = CMatrix::from_column_slice(h.nrows(), 1, psi.amplitudes());
        (v.adjoint() * h * &v)[(0, 0)].re
    }

    #[test]
    fn z_on_zero_state() {
        let op = PauliSum::from_terms(1, [PauliString::new(vec![Pauli::Z], 1.0)]).unwrap();
        let dec = decompose_pauli(&op).unwrap();
        let grid = default_time_grid(&dec.summands[0]);
        assert_eq!(grid.points, 4);
        let vc =
            VpeCircuit::single_control(Circuit::new(1), dec.summands[0].evolution.clone()).unwrap();
        let rec = phase_function(
            &vc,
            &grid.times(),
            &NoiseSetup::noiseless(),
            CompilationFlags::default(),
            Mode::Exact,
            0,
            &[],
        )
        .unwrap();
        for post in [PostProcessing::Prony, PostProcessing::KnownPhases] {
            let (value, _) = post_process(&dec.summands[0], &rec, &grid, post).unwrap();
            assert!((value - 1.0).abs() < 1e-8, "{post:?}");
        }
        // sin(t) / t at short times
        let short = TimeGrid {
            step: 1e-3,
            points: 2,
            order: 1,
        };
        let rec = phase_function(
            &vc,
            &short.times(),
            &NoiseSetup::noiseless(),
            CompilationFlags::default(),
            Mode::Exact,
            0,
            &[],
        )
        .unwrap();
        let (value, _) =
            post_process(&dec.summands[0], &rec, &short, PostProcessing::SinglePoint).unwrap();
        assert!((value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn protocols_agree_on_hopping_chain() {
        let h = build_hopping_chain(4, 1.0).unwrap();
        let dec = decompose_number_conserving(&h).unwrap();
        let theta = [0.3, -1.1, 0.7, 2.0, -0.4, 0.9];
        let ansatz = AnsatzSpec::new(AnsatzKind::Givens, 4, 0, 2, theta.to_vec()).unwrap();
        let truth = dense_energy(&dec.matrix(), &ansatz.prep_circuit().unwrap());
        for protocol in [Protocol::SingleControl, Protocol::ControlFree] {
            let options = ExpectationOptions {
                protocol,
                ..Default::default()
            };
            let got =
                verified_expectation(&dec, &ansatz, &NoiseSetup::noiseless(), &options).unwrap();
            assert!(
                (got.value - truth).abs() < 1e-8,
                "{protocol:?}: {} vs {truth}",
                got.value
            );
        }
        let (e, _) = eigh(&dec.matrix());
        assert!(truth >= e[0] - 1e-12);
    }

    #[test]
    fn summand_errors_carry_label() {
        let op =
            PauliSum::from_terms(2, [PauliString::new(vec![Pauli::X, Pauli::X], 1.0)]).unwrap();
        let dec = decompose_pauli(&op).unwrap();
        let ansatz = AnsatzSpec::new(AnsatzKind::Givens, 2, 0, 1, vec![0.2]).unwrap();
        let options = ExpectationOptions {
            protocol: Protocol::ControlFree,
            ..Default::default()
        };
        match verified_expectation(&dec, &ansatz, &NoiseSetup::noiseless(), &options) {
            Err(Error::Summand { label, .. }) => assert_eq!(label, dec.summands[0].label),
            other => panic!("{other:?}"),
        }
    }
}
