//! Noise channels, per-qubit noise models, masks and coherent control errors.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{c, diag, from_rows, CMatrix, ONE, ZERO};
use crate::rng::rng_for;
use crate::sim::gate::{self, pauli_x_matrix, pauli_y_matrix, pauli_z_matrix};
use crate::sim::{Circuit, DensityMatrix, Gate, GateKind, KrausChannel};

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::Parameter(format!("{name} = {p} outside [0, 1]")));
    }
    Ok(())
}

/// `(1 - 3l/4) rho + (l/4)(X rho X + Y rho Y + Z rho Z)`.
pub fn depolarizing(lambda: f64) -> Result<KrausChannel> {
    check_probability("depolarizing strength", lambda)?;
    let a = c((1.0 - 0.75 * lambda).sqrt(), 0.0);
    let b = c((lambda / 4.0).sqrt(), 0.0);
    KrausChannel::new(vec![
        CMatrix::identity(2, 2) * a,
        pauli_x_matrix() * b,
        pauli_y_matrix() * b,
        pauli_z_matrix() * b,
    ])
}

/// Decay `|1> -> |0>` with probability `gamma`.
pub fn amplitude_damping(gamma: f64) -> Result<KrausChannel> {
    check_probability("amplitude damping rate", gamma)?;
    KrausChannel::new(vec![
        diag(&[ONE, c((1.0 - gamma).sqrt(), 0.0)]),
        from_rows(&[&[ZERO, c(gamma.sqrt(), 0.0)], &[ZERO, ZERO]]),
    ])
}

/// Off-diagonal coherence scaled by `sqrt(1 - gamma)`.
pub fn phase_damping(gamma: f64) -> Result<KrausChannel> {
    check_probability("phase damping rate", gamma)?;
    KrausChannel::new(vec![
        diag(&[ONE, c((1.0 - gamma).sqrt(), 0.0)]),
        diag(&[ZERO, c(gamma.sqrt(), 0.0)]),
    ])
}

/// Amplitude damping followed by phase damping.
pub fn amplitude_phase_damping(gamma_amp: f64, gamma_phase: f64) -> Result<KrausChannel> {
    amplitude_damping(gamma_amp)?.then(&phase_damping(gamma_phase)?)
}

/// `X` applied with probability `q`.
pub fn bit_flip(q: f64) -> Result<KrausChannel> {
    check_probability("bit flip probability", q)?;
    KrausChannel::new(vec![
        CMatrix::identity(2, 2) * c((1.0 - q).sqrt(), 0.0),
        pauli_x_matrix() * c(q.sqrt(), 0.0),
    ])
}

/// `ISWAP^{1/2 + x}`, the miscalibrated square-root-of-ISWAP.
pub fn control_error_iswap(x: f64) -> Result<Gate> {
    if x.abs() >= 0.5 || x.is_nan() {
        return Err(Error::Parameter(format!(
            "control error offset {x} must satisfy |x| < 0.5"
        )));
    }
    Ok(gate::iswap_power(0, 1, 0.5 + x))
}

/// Coherent exponent offsets for `ISWAP^e` gates, one per gate instance,
/// drawn uniformly from `[-max_offset, max_offset]` and fixed for the experiment.
#[derive(Clone, Debug)]
pub struct ControlErrorModel {
    max_offset: f64,
    seed: u64,
}

impl ControlErrorModel {
    pub fn new(max_offset: f64, seed: u64) -> Result<Self> {
        if !(0.0..0.5).contains(&max_offset) {
            return Err(Error::Parameter(format!(
                "offset bound {max_offset} must lie in [0, 0.5)"
            )));
        }
        Ok(Self { max_offset, seed })
    }

    /// Offsets bounded by `rate / pi`.
    pub fn from_rate(rate: f64, seed: u64) -> Result<Self> {
        Self::new(rate / PI, seed)
    }

    pub fn max_offset(&self) -> f64 {
        self.max_offset
    }

    /// Offset of the `instance`-th ISWAP-power gate of a circuit.
    pub fn offset(&self, instance: usize) -> f64 {
        if self.max_offset == 0.0 {
            return 0.0;
        }
        let mut rng = rng_for(self.seed, &[instance as u64]);
        rng.random_range(-self.max_offset..=self.max_offset)
    }
}

#[derive(Clone, Debug, Default)]
pub struct NoiseModel {
    channel: Option<KrausChannel>,
    qubit_channels: BTreeMap<usize, KrausChannel>,
    readout: Option<KrausChannel>,
    control_error: Option<ControlErrorModel>,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self::default()
    }

    /// Same single-qubit channel on every qubit after every moment.
    pub fn uniform(channel: KrausChannel) -> Result<Self> {
        if channel.num_qubits() != 1 {
            return Err(Error::Dimension(
                "per-qubit channels must act on one qubit".into(),
            ));
        }
        Ok(Self {
            channel: Some(channel),
            ..Self::default()
        })
    }

    pub fn with_qubit_channel(mut self, qubit: usize, channel: KrausChannel) -> Result<Self> {
        if channel.num_qubits() != 1 {
            return Err(Error::Dimension(
                "per-qubit channels must act on one qubit".into(),
            ));
        }
        self.qubit_channels.insert(qubit, channel);
        Ok(self)
    }

    /// Channel applied to measured qubits between the last pre-rotation and readout.
    pub fn with_readout(mut self, channel: KrausChannel) -> Result<Self> {
        if channel.num_qubits() != 1 {
            return Err(Error::Dimension(
                "readout channel must act on one qubit".into(),
            ));
        }
        self.readout = Some(channel);
        Ok(self)
    }

    pub fn with_control_error(mut self, model: ControlErrorModel) -> Self {
        self.control_error = Some(model);
        self
    }

    pub fn channel_for(&self, qubit: usize) -> Option<&KrausChannel> {
        self.qubit_channels.get(&qubit).or(self.channel.as_ref())
    }

    pub fn readout(&self) -> Option<&KrausChannel> {
        self.readout.as_ref()
    }

    pub fn control_error(&self) -> Option<&ControlErrorModel> {
        self.control_error.as_ref()
    }

    pub fn is_noiseless(&self) -> bool {
        let idle = |ch: &KrausChannel| ch.is_identity();
        self.channel.as_ref().is_none_or(idle)
            && self.qubit_channels.values().all(idle)
            && self.readout.as_ref().is_none_or(idle)
            && self
                .control_error
                .as_ref()
                .is_none_or(|m| m.max_offset == 0.0)
    }

    /// Replaces every ISWAP-power gate `ISWAP^e` by `ISWAP^{e + sign(e) x_i}`.
    pub fn realize(&self, circuit: &Circuit) -> Result<Circuit> {
        let Some(model) = &self.control_error else {
            return Ok(circuit.clone());
        };
        let mut out = Circuit::new(circuit.num_qubits());
        let mut instance = 0usize;
        for m in circuit.moments() {
            let gates = m
                .gates()
                .iter()
                .map(|g| match g.kind() {
                    GateKind::IswapPower(e) => {
                        let x = model.offset(instance);
                        instance += 1;
                        let t = g.targets();
                        gate::iswap_power(t[0], t[1], e + e.signum() * x)
                    }
                    GateKind::Generic => g.clone(),
                })
                .collect();
            out.push_moment(gates)?;
        }
        Ok(out)
    }
}

/// Which qubits receive noise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NoiseMask {
    All,
    SystemOnly { control: Vec<usize> },
    ControlOnly { control: Vec<usize> },
}

impl NoiseMask {
    fn admits(&self, qubit: usize) -> bool {
        match self {
            NoiseMask::All => true,
            NoiseMask::SystemOnly { control } => !control.contains(&qubit),
            NoiseMask::ControlOnly { control } => control.contains(&qubit),
        }
    }
}

/// A circuit with its noise resolved per qubit.
#[derive(Clone, Debug)]
pub struct NoisyPlan {
    circuit: Circuit,
    channels: Vec<Option<KrausChannel>>,
    readout: Vec<Option<KrausChannel>>,
}

pub fn attach_noise(circuit: &Circuit, model: &NoiseModel, mask: &NoiseMask) -> Result<NoisyPlan> {
    let n = circuit.num_qubits();
    if let NoiseMask::SystemOnly { control } | NoiseMask::ControlOnly { control } = mask {
        if let Some(q) = control.iter().find(|&&q| q >= n) {
            return Err(Error::Targets(format!(
                "mask names qubit {q} outside the {n}-qubit circuit"
            )));
        }
    }
    let pick = |q: usize, ch: Option<&KrausChannel>| {
        ch.filter(|ch| mask.admits(q) && !ch.is_identity()).cloned()
    };
    Ok(NoisyPlan {
        circuit: model.realize(circuit)?,
        channels: (0..n).map(|q| pick(q, model.channel_for(q))).collect(),
        readout: (0..n).map(|q| pick(q, model.readout())).collect(),
    })
}

impl NoisyPlan {
    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn run_in_place(&self, state: &mut DensityMatrix) -> Result<()> {
        for m in self.circuit.moments() {
            for g in m.gates() {
                state.apply_gate_in_place(g)?;
            }
            self.apply_idle_noise(state)?;
        }
        Ok(())
    }

    pub fn run(&self, state: &DensityMatrix) -> Result<DensityMatrix> {
        let mut out = state.clone();
        self.run_in_place(&mut out)?;
        Ok(out)
    }

    /// One round of per-qubit noise, as after a moment.
    pub fn apply_idle_noise(&self, state: &mut DensityMatrix) -> Result<()> {
        for (q, ch) in self.channels.iter().enumerate() {
            if let Some(ch) = ch {
                state.apply_channel_in_place(ch, &[q])?;
            }
        }
        Ok(())
    }

    /// Readout channel on each measured qubit that the mask admits.
    pub fn apply_readout(&self, state: &mut DensityMatrix, measured: &[usize]) -> Result<()> {
        for &q in measured {
            if let Some(Some(ch)) = self.readout.get(q) {
                state.apply_channel_in_place(ch, &[q])?;
            }
        }
        Ok(())
    }
}
