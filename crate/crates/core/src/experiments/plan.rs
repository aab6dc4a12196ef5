//! Experiment plans: what to simulate, under which noise, and how often.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzKind, AnsatzSpec};
use crate::error::{Error, Result};
use crate::hamiltonian::{
    build_hopping_chain, build_next_nearest_chain, build_tfim, decompose_number_conserving,
    decompose_number_conserving_split, decompose_pauli, decompose_quadratic, load_hamiltonian_file,
    load_low_rank_file, parse_hamiltonian, parse_low_rank, Compilation, FermionOperator,
    HamiltonianDecomposition, LoadedHamiltonian, LowRankFactors, PauliSum,
};
use crate::noise::{
    amplitude_damping, amplitude_phase_damping, depolarizing, phase_damping, ControlErrorModel,
    NoiseMask, NoiseModel,
};
use crate::rng::rng_for;
use crate::vpe::{CompilationFlags, Mode, PostProcessing, Protocol, TimeGrid};

use super::optimize::OptimizerConfig;

/// Built-in molecular Hamiltonians (STO-3G, four spin orbitals).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Molecule {
    /// Bond length 0.7414 A.
    H2Equilibrium,
    /// Bond length 2.0 A.
    H2Stretched,
}

impl Molecule {
    fn hamiltonian_text(self) -> &'static str {
        match self {
            Molecule::H2Equilibrium => include_str!("../../tests/fixtures/h2_0.7414.ham"),
            Molecule::H2Stretched => include_str!("../../tests/fixtures/h2_2.0.ham"),
        }
    }

    fn low_rank_text(self) -> &'static str {
        match self {
            Molecule::H2Equilibrium => include_str!("../../tests/fixtures/h2_0.7414_lowrank.json"),
            Molecule::H2Stretched => include_str!("../../tests/fixtures/h2_2.0_lowrank.json"),
        }
    }
}

fn unit() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    /// `-t sum_j (c^dag_j c_{j+1} + h.c.)`, periodic.
    HoppingChain {
        sites: usize,
        #[serde(default = "unit")]
        hopping: f64,
    },
    /// Nearest-neighbour hopping `t1` plus next-nearest hopping and chemical
    /// potential `t2`, kept as two separately estimated parts.
    TwoPartChain {
        sites: usize,
        t1: f64,
        t2: f64,
    },
    /// `jz sum Z + jx sum XX`, periodic.
    Tfim {
        sites: usize,
        jz: f64,
        jx: f64,
    },
    Molecule {
        name: Molecule,
    },
    HamiltonianFile {
        path: PathBuf,
    },
    LowRankFile {
        path: PathBuf,
    },
}

/// A target operator as one or more parts, plus optional low-rank factors.
#[derive(Clone, Debug)]
pub struct BuiltSystem {
    pub num_qubits: usize,
    pub parts: Vec<LoadedHamiltonian>,
    pub low_rank: Option<LowRankFactors>,
}

impl SystemSpec {
    pub fn build(&self) -> Result<BuiltSystem> {
        let fermion = |op: FermionOperator| LoadedHamiltonian::Fermion(op);
        let (parts, low_rank) = match self {
            SystemSpec::HoppingChain { sites, hopping } => {
                (vec![fermion(build_hopping_chain(*sites, *hopping)?)], None)
            }
            SystemSpec::TwoPartChain { sites, t1, t2 } => (
                vec![
                    fermion(build_hopping_chain(*sites, *t1)?),
                    fermion(build_next_nearest_chain(*sites, *t2)?),
                ],
                None,
            ),
            SystemSpec::Tfim { sites, jz, jx } => (
                vec![LoadedHamiltonian::Pauli(build_tfim(*sites, *jz, *jx)?)],
                None,
            ),
            SystemSpec::Molecule { name } => (
                vec![parse_hamiltonian(name.hamiltonian_text())?],
                Some(parse_low_rank(name.low_rank_text())?),
            ),
            SystemSpec::HamiltonianFile { path } => (vec![load_hamiltonian_file(path)?], None),
            SystemSpec::LowRankFile { path } => (Vec::new(), Some(load_low_rank_file(path)?)),
        };
        let num_qubits = match (parts.first(), &low_rank) {
            (Some(p), _) => p.num_qubits(),
            (None, Some(f)) => f.num_modes(),
            (None, None) => unreachable!("every system has a part or factors"),
        };
        if parts.iter().any(|p| p.num_qubits() != num_qubits) {
            return Err(Error::Dimension("system parts differ in width".into()));
        }
        if let Some(f) = &low_rank {
            if f.num_modes() != num_qubits {
                return Err(Error::Dimension(format!(
                    "{} factor modes for {num_qubits} qubits",
                    f.num_modes()
                )));
            }
        }
        Ok(BuiltSystem {
            num_qubits,
            parts,
            low_rank,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecompositionKind {
    /// One summand per Pauli string.
    Pauli,
    /// Fermionic terms grouped with their conjugates.
    NumberConserving,
    /// As `NumberConserving`, with the diagonal part split into single `Z` strings.
    NumberConservingSplit,
    /// One quadratic summand per part.
    Quadratic,
    LowRank,
}

impl BuiltSystem {
    fn fermion_parts(&self) -> Result<Vec<&FermionOperator>> {
        self.parts
            .iter()
            .map(|p| match p {
                LoadedHamiltonian::Fermion(f) => Ok(f),
                LoadedHamiltonian::Pauli(_) => Err(Error::Parameter(
                    "decomposition needs a fermionic Hamiltonian".into(),
                )),
            })
            .collect()
    }

    fn fermion_sum(&self) -> Result<FermionOperator> {
        let parts = self.fermion_parts()?;
        parts
            .iter()
            .skip(1)
            .try_fold(parts[0].clone(), |acc, p| acc.add(p))
    }

    /// Whole operator on qubits.
    pub fn operator(&self) -> Result<PauliSum> {
        if self.parts.is_empty() {
            let factors = self.low_rank.as_ref().expect("checked at build");
            return Ok(factors.decomposition()?.operator());
        }
        self.parts
            .iter()
            .skip(1)
            .try_fold(self.parts[0].to_pauli(), |acc, p| acc.add(&p.to_pauli()))
    }

    pub fn decompose(&self, kind: DecompositionKind) -> Result<HamiltonianDecomposition> {
        if self.parts.is_empty() && kind != DecompositionKind::LowRank {
            return Err(Error::Parameter(format!(
                "a factor file supports only the low-rank decomposition, not {kind:?}"
            )));
        }
        match kind {
            DecompositionKind::Pauli => decompose_pauli(&self.operator()?),
            DecompositionKind::NumberConserving => {
                decompose_number_conserving(&self.fermion_sum()?)
            }
            DecompositionKind::NumberConservingSplit => {
                decompose_number_conserving_split(&self.fermion_sum()?)
            }
            DecompositionKind::Quadratic => {
                let parts = self.fermion_parts()?;
                let mut summands = Vec::new();
                let mut constant = 0.0;
                for (i, part) in parts.iter().enumerate() {
                    let d = decompose_quadratic(part)?;
                    constant += d.constant;
                    for mut s in d.summands {
                        if parts.len() > 1 {
                            s.label = format!("part{}", i + 1);
                        }
                        summands.push(s);
                    }
                }
                HamiltonianDecomposition::new(self.num_qubits, summands, constant)
            }
            DecompositionKind::LowRank => self
                .low_rank
                .as_ref()
                .ok_or_else(|| Error::Parameter("low-rank decomposition needs factor data".into()))?
                .decomposition(),
        }
    }
}

/// Ansatz family; parameters are drawn per replicate unless given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzChoice {
    pub kind: AnsatzKind,
    #[serde(default)]
    pub layers: usize,
    #[serde(default)]
    pub occupation: usize,
    #[serde(default)]
    pub parameters: Option<Vec<f64>>,
}

/// Stream tags under the plan seed.
pub(crate) const STREAM_ANSATZ: u64 = 1;
pub(crate) const STREAM_SAMPLING: u64 = 2;
pub(crate) const STREAM_CONTROL_ERROR: u64 = 3;
pub(crate) const STREAM_TOMOGRAPHY: u64 = 4;

impl AnsatzChoice {
    pub fn parameter_count(&self, num_qubits: usize) -> usize {
        AnsatzSpec::parameter_count(self.kind, num_qubits, self.layers)
    }

    /// Fixed parameters, or uniform angles drawn from the replicate's stream.
    pub fn instantiate(
        &self,
        num_qubits: usize,
        seed: u64,
        replicate: usize,
    ) -> Result<AnsatzSpec> {
        match &self.parameters {
            Some(p) => AnsatzSpec::new(
                self.kind,
                num_qubits,
                self.layers,
                self.occupation,
                p.clone(),
            ),
            None => {
                let mut rng = rng_for(seed, &[STREAM_ANSATZ, replicate as u64]);
                AnsatzSpec::random(
                    self.kind,
                    num_qubits,
                    self.layers,
                    self.occupation,
                    &mut rng,
                )
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Depolarizing,
    AmplitudeDamping,
    PhaseDamping,
    /// Amplitude and phase damping, both at the rate.
    AmplitudePhaseDamping,
    /// Coherent `ISWAP^{1/2}` exponent offsets bounded by `rate / pi`, plus
    /// amplitude and phase damping at `rate / 2`.
    ControlErrorDamping,
}

impl NoiseKind {
    /// Model at `rate`; `seed` fixes the coherent offsets.
    pub fn model(self, rate: f64, seed: u64) -> Result<NoiseModel> {
        match self {
            NoiseKind::Depolarizing => NoiseModel::uniform(depolarizing(rate)?),
            NoiseKind::AmplitudeDamping => NoiseModel::uniform(amplitude_damping(rate)?),
            NoiseKind::PhaseDamping => NoiseModel::uniform(phase_damping(rate)?),
            NoiseKind::AmplitudePhaseDamping => {
                NoiseModel::uniform(amplitude_phase_damping(rate, rate)?)
            }
            NoiseKind::ControlErrorDamping => Ok(NoiseModel::uniform(amplitude_phase_damping(
                rate / 2.0,
                rate / 2.0,
            )?)?
            .with_control_error(ControlErrorModel::from_rate(rate, seed)?)),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskChoice {
    #[default]
    All,
    SystemOnly,
    ControlOnly,
}

impl MaskChoice {
    /// Mask on the VPE register; the control is qubit 0.
    pub fn vpe_mask(self) -> NoiseMask {
        match self {
            MaskChoice::All => NoiseMask::All,
            MaskChoice::SystemOnly => NoiseMask::SystemOnly { control: vec![0] },
            MaskChoice::ControlOnly => NoiseMask::ControlOnly { control: vec![0] },
        }
    }

    /// Whether the control-free state preparation, which has no control, sees noise.
    pub fn system_noisy(self) -> bool {
        self != MaskChoice::ControlOnly
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSweep {
    pub kind: NoiseKind,
    pub rates: Vec<f64>,
    #[serde(default)]
    pub mask: MaskChoice,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Vpe,
    Tomography,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::Vpe => "vpe",
            Estimator::Tomography => "tomography",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    #[default]
    ErrorSweep,
    SplitNoise,
    Termwise,
    Vqe,
    SamplingConvergence,
}

/// Settings of a sampling-convergence study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    /// Shots per time point and quadrature (VPE) or per Pauli term (tomography).
    pub shots: Vec<usize>,
    #[serde(default = "two_hundred")]
    pub trials: usize,
    /// Time points `K` of every phase function.
    #[serde(default = "ten")]
    pub steps: usize,
    /// Prony order; half the step count when absent.
    #[serde(default)]
    pub prony_order: Option<usize>,
    /// Undo the sampling shrinkage of Prony estimates.
    #[serde(default = "yes")]
    pub compensate: bool,
    /// Also run at zero noise.
    #[serde(default = "yes")]
    pub include_noiseless: bool,
}

fn two_hundred() -> usize {
    200
}

fn ten() -> usize {
    10
}

fn yes() -> bool {
    true
}

fn fifty() -> usize {
    50
}

fn single_control() -> Protocol {
    Protocol::SingleControl
}

fn both_estimators() -> Vec<Estimator> {
    vec![Estimator::Vpe, Estimator::Tomography]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub name: String,
    #[serde(default)]
    pub kind: ExperimentKind,
    pub system: SystemSpec,
    pub ansatz: AnsatzChoice,
    pub decomposition: DecompositionKind,
    #[serde(default = "single_control")]
    pub protocol: Protocol,
    #[serde(default)]
    pub flags: CompilationFlags,
    #[serde(default)]
    pub post: PostProcessing,
    #[serde(default)]
    pub compilation: Compilation,
    pub noise: NoiseSweep,
    #[serde(default = "fifty")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "both_estimators")]
    pub estimators: Vec<Estimator>,
    /// Replaces every summand's default time grid.
    #[serde(default)]
    pub time_grid: Option<TimeGrid>,
    #[serde(default)]
    pub prony_order: Option<usize>,
    /// Summand labels to study one by one (term-wise runs).
    #[serde(default)]
    pub summands: Option<Vec<String>>,
    /// Divide each summand's errors by its spectral radius.
    #[serde(default)]
    pub normalize_summands: bool,
    #[serde(default)]
    pub optimizer: Option<OptimizerConfig>,
    #[serde(default)]
    pub sampling: Option<SamplingConfig>,
}

fn config(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        message: message.into(),
    }
}

impl ExperimentPlan {
    pub fn from_json(text: &str) -> Result<Self> {
        let plan: Self =
            serde_json::from_str(text).map_err(|e| config(json_path(&e), e.to_string()))?;
        Ok(plan)
    }

    /// Structural checks that need no file access.
    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(config("name", "must not be empty"));
        }
        if self.replicates == 0 {
            return Err(config("replicates", "must be at least 1"));
        }
        let rates = &self.noise.rates;
        if rates.is_empty() && self.kind != ExperimentKind::SamplingConvergence {
            return Err(config("noise.rates", "must list at least one rate"));
        }
        for (i, &r) in rates.iter().enumerate() {
            if !(r.is_finite() && r > 0.0 && r <= 1.0) {
                return Err(config(
                    format!("noise.rates[{i}]"),
                    format!("rate {r} must lie in (0, 1]"),
                ));
            }
            if i > 0 && r <= rates[i - 1] {
                return Err(config(
                    format!("noise.rates[{i}]"),
                    "rates must be strictly ascending",
                ));
            }
        }
        if let Mode::Sampled { shots: 0 } = self.mode {
            return Err(config("mode.shots", "must be at least 1"));
        }
        if self.estimators.is_empty() {
            return Err(config("estimators", "must name at least one estimator"));
        }
        for (i, e) in self.estimators.iter().enumerate() {
            if self.estimators[..i].contains(e) {
                return Err(config(
                    format!("estimators[{i}]"),
                    format!("{} listed twice", e.name()),
                ));
            }
        }
        if let Some(g) = &self.time_grid {
            if !(g.step.is_finite() && g.step > 0.0) {
                return Err(config("time_grid.step", "must be positive"));
            }
            if g.order == 0 || g.points < 2 * g.order {
                return Err(config(
                    "time_grid.order",
                    format!("order {} needs 1 <= order <= points / 2", g.order),
                ));
            }
        }
        if self.prony_order == Some(0) {
            return Err(config("prony_order", "must be at least 1"));
        }
        if self.protocol == Protocol::ControlFree && self.noise.mask != MaskChoice::All {
            return Err(config(
                "noise.mask",
                "control-free circuits have no control qubit to mask",
            ));
        }
        if let Some(p) = &self.ansatz.parameters {
            if let Some(i) = p.iter().position(|x| !x.is_finite()) {
                return Err(config(format!("ansatz.parameters[{i}]"), "must be finite"));
            }
        }
        match self.kind {
            ExperimentKind::SplitNoise if self.protocol != Protocol::SingleControl => {
                return Err(config(
                    "protocol",
                    "split-noise runs need the single-control protocol",
                ));
            }
            ExperimentKind::SamplingConvergence => {
                let s = self
                    .sampling
                    .as_ref()
                    .ok_or_else(|| config("sampling", "required for sampling-convergence runs"))?;
                if s.shots.is_empty() {
                    return Err(config(
                        "sampling.shots",
                        "must list at least one shot count",
                    ));
                }
                if let Some(i) = s.shots.iter().position(|&m| m == 0) {
                    return Err(config(format!("sampling.shots[{i}]"), "must be at least 1"));
                }
                if s.trials == 0 {
                    return Err(config("sampling.trials", "must be at least 1"));
                }
                let order = s.prony_order.unwrap_or(s.steps / 2);
                if order == 0 || s.steps < 2 * order {
                    return Err(config(
                        "sampling.steps",
                        format!("{} steps cannot carry Prony order {order}", s.steps),
                    ));
                }
                if !s.include_noiseless && rates.is_empty() {
                    return Err(config(
                        "noise.rates",
                        "nothing to run without rates or the noiseless point",
                    ));
                }
            }
            _ => {}
        }
        if let Some(o) = &self.optimizer {
            o.validate()
                .map_err(|(field, message)| config(format!("optimizer.{field}"), message))?;
        }
        Ok(())
    }

    /// Structural checks plus building the system, decomposition and ansatz.
    pub fn check(&self) -> Result<Prepared> {
        self.validate()?;
        let system = self
            .system
            .build()
            .map_err(|e| config("system", e.to_string()))?;
        let decomposition = system
            .decompose(self.decomposition)
            .map_err(|e| config("decomposition", e.to_string()))?;
        let n = system.num_qubits;
        if let Some(p) = &self.ansatz.parameters {
            let want = self.ansatz.parameter_count(n);
            if p.len() != want {
                return Err(config(
                    "ansatz.parameters",
                    format!("expected {want} parameters, got {}", p.len()),
                ));
            }
        }
        self.ansatz
            .instantiate(n, self.seed, 0)
            .map_err(|e| config("ansatz", e.to_string()))?;
        if let Some(labels) = &self.summands {
            for (i, l) in labels.iter().enumerate() {
                if !decomposition.summands.iter().any(|s| &s.label == l) {
                    let known: Vec<&str> = decomposition
                        .summands
                        .iter()
                        .map(|s| s.label.as_str())
                        .collect();
                    return Err(config(
                        format!("summands[{i}]"),
                        format!("no summand '{l}' (have {})", known.join("; ")),
                    ));
                }
            }
        }
        Ok(Prepared {
            system,
            decomposition,
        })
    }
}

/// Built pieces of a checked plan.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub system: BuiltSystem,
    pub decomposition: HamiltonianDecomposition,
}

/// Best-effort field path from a serde error message.
fn json_path(e: &serde_json::Error) -> String {
    let msg = e.to_string();
    for key in ["unknown field `", "missing field `", "unknown variant `"] {
        if let Some(rest) = msg.split(key).nth(1) {
            if let Some(name) = rest.split('`').next() {
                return name.to_string();
            }
        }
    }
    format!("line {} column {}", e.line(), e.column())
}
