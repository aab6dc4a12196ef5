//! Dense density-matrix simulation of moment-structured circuits.
//!
//! Qubit 0 is the most significant bit of every basis index. Noise, when
//! present, is applied to every qubit after every moment.

mod channel;
mod circuit;
pub mod gate;
mod state;

pub use channel::KrausChannel;
pub use circuit::{Circuit, Moment};
pub use gate::{Gate, GateKind};
pub use state::{
    apply_channel, apply_gate, expectation, partial_trace, sample_measurement, DensityMatrix,
    PureState,
};

use crate::error::Result;
use crate::noise::{attach_noise, NoiseMask, NoiseModel};

/// Runs `circuit` on `state`, applying the per-qubit channels of `noise`
/// after every moment.
pub fn apply_circuit(
    state: &DensityMatrix,
    circuit: &Circuit,
    noise: Option<&NoiseModel>,
) -> Result<DensityMatrix> {
    let mut out = state.clone();
    match noise {
        None => out.apply_circuit_in_place(circuit)?,
        Some(model) => attach_noise(circuit, model, &NoiseMask::All)?.run_in_place(&mut out)?,
    }
    Ok(out)
}
