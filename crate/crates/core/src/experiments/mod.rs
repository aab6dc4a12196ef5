//! Reusable studies: noise-rate sweeps over random ansatz states, variational
//! loops, sampling convergence, split-noise and term-wise diagnostics.
//!
//! Every error is measured against a dense-matrix truth. Work items draw
//! their randomness from streams derived from the plan seed, so results do
//! not depend on thread count or scheduling.

mod optimize;
mod oracle;
mod plan;
mod presets;
mod sampling;
mod sweep;
mod tomography;
mod vqe;

pub use optimize::{
    cobyla, minimize, nelder_mead, Evaluation, OptimizeResult, OptimizerConfig, OptimizerMethod,
};
pub use oracle::{
    expectation_value, ground_energy, prepared_state, sector_ground_energy, traceless_radius,
};
pub use plan::{
    AnsatzChoice, BuiltSystem, DecompositionKind, Estimator, ExperimentKind, ExperimentPlan,
    MaskChoice, Molecule, NoiseKind, NoiseSweep, Prepared, SamplingConfig, SystemSpec,
};
pub use presets::{preset, PRESETS};
pub use sampling::{
    bias_study, curve_name, run_sampling_convergence, variational_minimum, BiasStudy,
    SamplingResult,
};
pub use sweep::{
    log_log_slope, median, rms, run_error_sweep, run_split_noise, run_termwise, Aggregate,
    ErrorRecord, FailureRecord, Statistic, SweepResult,
};
pub use tomography::{
    noisy_state, pauli_probabilities, sampled_from_probabilities, tomography_estimate,
};
pub use vqe::{run_vqe_loop, VqeResult, VqeRun};

use crate::error::Result;

/// Result of any plan kind.
#[derive(Clone, Debug)]
pub enum ExperimentOutput {
    Sweep(SweepResult),
    Vqe(VqeResult),
    Sampling(SamplingResult),
}

impl ExperimentOutput {
    /// Error table common to every kind.
    pub fn sweep(&self) -> &SweepResult {
        match self {
            ExperimentOutput::Sweep(s) => s,
            ExperimentOutput::Vqe(v) => &v.sweep,
            ExperimentOutput::Sampling(s) => &s.sweep,
        }
    }
}

pub fn run_plan(plan: &ExperimentPlan) -> Result<ExperimentOutput> {
    Ok(match plan.kind {
        ExperimentKind::ErrorSweep => ExperimentOutput::Sweep(run_error_sweep(plan)?),
        ExperimentKind::SplitNoise => ExperimentOutput::Sweep(run_split_noise(plan)?),
        ExperimentKind::Termwise => ExperimentOutput::Sweep(run_termwise(plan)?),
        ExperimentKind::Vqe => ExperimentOutput::Vqe(run_vqe_loop(plan)?),
        ExperimentKind::SamplingConvergence => {
            ExperimentOutput::Sampling(run_sampling_convergence(plan)?)
        }
    })
}
