//! Verified phase estimation.
//!
//! A phase function `g(t)` is read off a target qubit (the control in the
//! single-control protocol, the first system qubit in the control-free one)
//! by measuring it in the X and Y bases. A shot only counts toward the
//! numerator when every other qubit reads 0; the denominator is the total
//! shot count.

mod circuits;
mod estimate;
mod expectation;
mod parallel;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use circuits::{control_free_givens, VpeCircuit};
pub use estimate::{
    exact_phase_function, exact_phase_value, phase_function, sampled_phase_value,
    sampled_vpe_control_free, sampled_vpe_single_control, NoiseSetup, OutcomeTable,
};
pub use expectation::{
    ansatz_prep, default_time_grid, estimate_summand, summand_circuit, tomography_expectation,
    verified_expectation, ExpectationOptions, PostProcessing, SummandEstimate, TimeGrid,
    VerifiedExpectation,
};
pub use parallel::{ghost_spectrum, parallel_vpe, ParallelVpe};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    SingleControl,
    ControlFree,
}

/// Symmetrizations compiled into the target qubit's first and last rotations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompilationFlags {
    /// Flip the target's readout for half of the shots and negate their tally.
    #[serde(default)]
    pub basis_flip: bool,
    /// Prepend `+-pi/4` phases to the target and undo them before readout.
    #[serde(default)]
    pub quarter_phase: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifiedEstimatorConfig {
    pub protocol: Protocol,
    #[serde(default)]
    pub flags: CompilationFlags,
    /// Eigenvalue of the reference state (control-free only).
    #[serde(default)]
    pub reference_energy: Option<f64>,
    #[serde(default = "one")]
    pub parallel_controls: usize,
}

fn one() -> usize {
    1
}

impl VerifiedEstimatorConfig {
    pub fn single_control() -> Self {
        Self {
            protocol: Protocol::SingleControl,
            flags: CompilationFlags::default(),
            reference_energy: None,
            parallel_controls: 1,
        }
    }

    pub fn control_free(reference_energy: f64) -> Self {
        Self {
            protocol: Protocol::ControlFree,
            reference_energy: Some(reference_energy),
            ..Self::single_control()
        }
    }

    pub fn with_flags(mut self, flags: CompilationFlags) -> Self {
        self.flags = flags;
        self
    }

    pub fn validate(&self) -> crate::Result<()> {
        if self.parallel_controls == 0 {
            return Err(crate::Error::Parameter(
                "parallel control count must be at least 1".into(),
            ));
        }
        if self.protocol == Protocol::ControlFree && self.reference_energy.is_none() {
            return Err(crate::Error::Protocol(
                "control-free estimation needs a reference energy".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Mode {
    #[default]
    Exact,
    Sampled {
        shots: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Quadrature {
    X,
    Y,
}

/// One circuit variant and the shots spent on it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementSetting {
    pub quadrature: Quadrature,
    pub flip: bool,
    pub phase: f64,
    pub shots: usize,
}

/// Splits `shots` for one quadrature over the symmetrized variants. With
/// both flags on, each of the four branches receives `shots / 4` (rounded down).
pub fn control_noise_compilation(
    flags: CompilationFlags,
    quadrature: Quadrature,
    shots: usize,
) -> Vec<MeasurementSetting> {
    let flips: &[bool] = if flags.basis_flip {
        &[false, true]
    } else {
        &[false]
    };
    let phases: &[f64] = if flags.quarter_phase {
        &[std::f64::consts::FRAC_PI_4, -std::f64::consts::FRAC_PI_4]
    } else {
        &[0.0]
    };
    let per = shots / (flips.len() * phases.len());
    phases
        .iter()
        .flat_map(|&phase| {
            flips.iter().map(move |&flip| MeasurementSetting {
                quadrature,
                flip,
                phase,
                shots: per,
            })
        })
        .collect()
}

/// Shot bookkeeping for one quadrature at one time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct QuadratureCounts {
    pub shots: u64,
    /// Raw target readouts, verified or not.
    pub zeros: u64,
    pub ones: u64,
    /// Readouts with every other qubit at 0.
    pub verified_zeros: u64,
    pub verified_ones: u64,
    /// Signed verified tally (`g^x` or `g^y`), flips already undone.
    pub tally: i64,
}

impl QuadratureCounts {
    pub fn estimate(&self) -> f64 {
        if self.shots == 0 {
            0.0
        } else {
            self.tally as f64 / self.shots as f64
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseFunctionRecord {
    pub t_grid: Vec<f64>,
    pub g: Vec<Complex64>,
    pub mode: Mode,
    /// Per time point `[x, y]`; empty in exact mode.
    pub counts: Vec<[QuadratureCounts; 2]>,
}

impl PhaseFunctionRecord {
    pub fn len(&self) -> usize {
        self.t_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_grid.is_empty()
    }

    pub fn shots(&self) -> Option<usize> {
        match self.mode {
            Mode::Exact => None,
            Mode::Sampled { shots } => Some(shots),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_without_flags_is_identity() {
        let s = control_noise_compilation(CompilationFlags::default(), Quadrature::X, 100);
        assert_eq!(
            s,
            vec![MeasurementSetting {
                quadrature: Quadrature::X,
                flip: false,
                phase: 0.0,
                shots: 100
            }]
        );
    }

    #[test]
    fn schedule_splits_shots() {
        let flags = CompilationFlags {
            basis_flip: true,
            quarter_phase: true,
        };
        let s = control_noise_compilation(flags, Quadrature::Y, 101);
        assert_eq!(s.len(), 4);
        assert!(s.iter().all(|m| m.shots == 25));
        assert_eq!(s.iter().filter(|m| m.flip).count(), 2);
    }

    #[test]
    fn control_free_needs_reference() {
        let mut cfg = VerifiedEstimatorConfig::control_free(0.0);
        assert!(cfg.validate().is_ok());
        cfg.reference_energy = None;
        assert!(cfg.validate().is_err());
    }
}
