//! Built-in plans for the standard studies.

use crate::ansatz::AnsatzKind;
use crate::hamiltonian::Compilation;
use crate::vpe::{CompilationFlags, Mode, PostProcessing, Protocol};

use super::optimize::{OptimizerConfig, OptimizerMethod};
use super::plan::{
    AnsatzChoice, DecompositionKind, Estimator, ExperimentKind, ExperimentPlan, MaskChoice,
    Molecule, NoiseKind, NoiseSweep, SamplingConfig, SystemSpec,
};

/// Name and one-line description of every preset.
pub const PRESETS: &[(&str, &str)] = &[
    (
        "givens-depol",
        "free-fermion chain, random Givens states, control-free, uniform depolarizing",
    ),
    (
        "givens-damping",
        "free-fermion chain, random Givens states, control-free, amplitude and phase damping",
    ),
    (
        "tfim-sweep",
        "critical transverse-field Ising chain, random VHA states, single control per Pauli term",
    ),
    (
        "tfim-vqe",
        "variational ground state of the Ising chain with either estimator as objective",
    ),
    (
        "fsw-pauli",
        "stretched H2, swap-network states, control-free number-conserving Pauli decomposition",
    ),
    (
        "fsw-lowrank",
        "equilibrium H2, swap-network states, control-free low-rank factorization",
    ),
    (
        "sampling-convergence",
        "finite-shot convergence of Prony, known-phase fitting and tomography",
    ),
    (
        "split-noise",
        "Ising chain with depolarizing noise on the system only or the control only",
    ),
    (
        "termwise",
        "two single summands of stretched H2 under amplitude and phase damping",
    ),
    (
        "vqe-control-error",
        "two-part hopping chain, variational loop under coherent control error and damping",
    ),
];

const SWEEP_RATES: [f64; 5] = [1e-4, 3e-4, 1e-3, 3e-3, 1e-2];

fn base(
    name: &str,
    system: SystemSpec,
    ansatz: AnsatzChoice,
    decomposition: DecompositionKind,
) -> ExperimentPlan {
    ExperimentPlan {
        name: name.into(),
        kind: ExperimentKind::ErrorSweep,
        system,
        ansatz,
        decomposition,
        protocol: Protocol::SingleControl,
        flags: CompilationFlags::default(),
        post: PostProcessing::Prony,
        compilation: Compilation::Matchgate,
        noise: NoiseSweep {
            kind: NoiseKind::Depolarizing,
            rates: SWEEP_RATES.to_vec(),
            mask: MaskChoice::All,
        },
        replicates: 50,
        seed: 2020,
        mode: Mode::Exact,
        estimators: vec![Estimator::Vpe, Estimator::Tomography],
        time_grid: None,
        prony_order: None,
        summands: None,
        normalize_summands: false,
        optimizer: None,
        sampling: None,
    }
}

fn givens(name: &str, noise: NoiseKind) -> ExperimentPlan {
    let mut p = base(
        name,
        SystemSpec::HoppingChain {
            sites: 4,
            hopping: 1.0,
        },
        AnsatzChoice {
            kind: AnsatzKind::Givens,
            layers: 0,
            occupation: 2,
            parameters: None,
        },
        DecompositionKind::Quadratic,
    );
    p.protocol = Protocol::ControlFree;
    p.flags.basis_flip = true;
    p.noise.kind = noise;
    p
}

fn tfim(name: &str) -> ExperimentPlan {
    base(
        name,
        SystemSpec::Tfim {
            sites: 4,
            jz: 1.0,
            jx: 1.0,
        },
        AnsatzChoice {
            kind: AnsatzKind::Vha,
            layers: 2,
            occupation: 0,
            parameters: None,
        },
        DecompositionKind::Pauli,
    )
}

fn fsw(
    name: &str,
    molecule: Molecule,
    layers: usize,
    decomposition: DecompositionKind,
) -> ExperimentPlan {
    let mut p = base(
        name,
        SystemSpec::Molecule { name: molecule },
        AnsatzChoice {
            kind: AnsatzKind::Fsw,
            layers,
            occupation: 2,
            parameters: None,
        },
        decomposition,
    );
    p.protocol = Protocol::ControlFree;
    p.flags.basis_flip = true;
    p
}

pub fn preset(name: &str) -> Option<ExperimentPlan> {
    let plan = match name {
        "givens-depol" => givens(name, NoiseKind::Depolarizing),
        "givens-damping" => givens(name, NoiseKind::AmplitudePhaseDamping),
        "tfim-sweep" => tfim(name),
        "tfim-vqe" => {
            let mut p = tfim(name);
            p.kind = ExperimentKind::Vqe;
            p.replicates = 10;
            p.noise.rates = vec![1e-4, 1e-3, 1e-2];
            p.optimizer = Some(OptimizerConfig::default());
            p
        }
        "fsw-pauli" => fsw(
            name,
            Molecule::H2Stretched,
            6,
            DecompositionKind::NumberConservingSplit,
        ),
        "fsw-lowrank" => fsw(name, Molecule::H2Equilibrium, 4, DecompositionKind::LowRank),
        "sampling-convergence" => {
            let mut p = tfim(name);
            p.kind = ExperimentKind::SamplingConvergence;
            p.noise.rates = vec![1e-2];
            p.replicates = 1;
            p.sampling = Some(SamplingConfig {
                shots: vec![100, 300, 1_000, 3_000, 10_000],
                trials: 200,
                steps: 10,
                prony_order: None,
                compensate: true,
                include_noiseless: true,
            });
            p
        }
        "split-noise" => {
            let mut p = tfim(name);
            p.kind = ExperimentKind::SplitNoise;
            p.flags = CompilationFlags {
                basis_flip: true,
                quarter_phase: true,
            };
            p
        }
        "termwise" => {
            let mut p = fsw(
                name,
                Molecule::H2Stretched,
                6,
                DecompositionKind::NumberConservingSplit,
            );
            p.kind = ExperimentKind::Termwise;
            p.noise.kind = NoiseKind::AmplitudePhaseDamping;
            p.summands = Some(vec!["Z0 Z1".into(), "hop[0,1,2,3]".into()]);
            p.normalize_summands = true;
            p
        }
        "vqe-control-error" => {
            let mut p = givens(name, NoiseKind::ControlErrorDamping);
            p.kind = ExperimentKind::Vqe;
            p.system = SystemSpec::TwoPartChain {
                sites: 4,
                t1: 1.0,
                t2: 0.5,
            };
            p.compilation = Compilation::Native;
            p.replicates = 10;
            p.noise.rates = vec![1e-4, 1e-3, 1e-2];
            p.optimizer = Some(OptimizerConfig {
                method: OptimizerMethod::Cobyla,
                ..Default::default()
            });
            p
        }
        _ => return None,
    };
    Some(plan)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_checks() {
        for (name, _) in PRESETS {
            let plan = preset(name).unwrap_or_else(|| panic!("missing preset {name}"));
            assert_eq!(&plan.name, name);
            plan.check().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(preset("nope").is_none());
    }

    #[test]
    fn presets_round_trip_through_json() {
        for (name, _) in PRESETS {
            let plan = preset(name).unwrap();
            let text = serde_json::to_string(&plan).unwrap();
            assert_eq!(ExperimentPlan::from_json(&text).unwrap(), plan);
        }
    }
}
