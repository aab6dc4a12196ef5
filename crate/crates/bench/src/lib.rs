//! Shared workloads for the criterion benches.

use num_complex::Complex64;
use vpe_core::experiments::{preset, ExperimentPlan};
use vpe_core::sim::{gate, Circuit};

/// Brickwork of Hadamards, CNOTs and Z rotations on `n` qubits.
pub fn brickwork(n: usize, layers: usize) -> Circuit {
    let mut c = Circuit::new(n);
    for layer in 0..layers {
        for q in 0..n {
            c.push(gate::h(q)).expect("valid qubit");
            c.push(gate::z_rotation(q, 0.1 * (layer * n + q) as f64))
                .expect("valid qubit");
        }
        for q in (layer % 2..n.saturating_sub(1)).step_by(2) {
            c.push(gate::cnot(q, q + 1)).expect("valid pair");
        }
    }
    c
}

/// Three-mode phase function sampled at `k = 0..points`.
pub fn phase_function(points: usize) -> (Vec<f64>, Vec<Complex64>) {
    let modes = [(0.5, -1.1), (0.3, 0.4), (0.2, 2.0)];
    let t: Vec<f64> = (0..points).map(|k| k as f64 * 0.3).collect();
    let g = t
        .iter()
        .map(|&tk| {
            modes
                .iter()
                .map(|&(a, e)| Complex64::from_polar(a, e * tk))
                .sum()
        })
        .collect();
    (t, g)
}

/// A built-in plan cut down to `replicates` and a single rate.
pub fn small_plan(name: &str, replicates: usize) -> ExperimentPlan {
    let mut plan = preset(name).expect("known preset");
    plan.replicates = replicates;
    plan.noise.rates = vec![1e-3];
    plan
}
