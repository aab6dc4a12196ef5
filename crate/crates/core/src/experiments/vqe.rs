//! Variational outer loop with either estimator as the black-box objective.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;

use super::optimize::{minimize, OptimizeResult};
use crate::ansatz::AnsatzKind;

use super::oracle::{expectation_value, ground_energy, prepared_state, sector_ground_energy};
use super::plan::{Estimator, ExperimentKind, ExperimentPlan};
use super::sweep::{
    estimate, expectation_options, noise_model, targets, ErrorRecord, FailureRecord, SweepResult,
};

#[derive(Clone, Debug, Serialize)]
pub struct VqeRun {
    pub rate: f64,
    pub replicate: usize,
    pub estimator: String,
    pub optimization: OptimizeResult,
    /// Objective at the returned parameters.
    pub final_estimate: f64,
    /// Dense energy of the returned state.
    pub final_truth: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VqeResult {
    /// `|final estimate - ground energy|` per rate, replicate and estimator.
    /// Number-conserving ansatzes are scored against their particle sector.
    pub sweep: SweepResult,
    pub runs: Vec<VqeRun>,
    pub ground_energy: f64,
}

/// Minimizes each requested estimator from the replicate's random start, at
/// zero noise (reported as the floor) and at every rate.
pub fn run_vqe_loop(plan: &ExperimentPlan) -> Result<VqeResult> {
    if plan.kind != ExperimentKind::Vqe {
        return Err(crate::Error::Config {
            path: "kind".into(),
            message: format!("expected Vqe, plan is {:?}", plan.kind),
        });
    }
    let prepared = plan.check()?;
    let targets = targets(plan, &prepared)?;
    let target = &targets[0];
    let e0 = match plan.ansatz.kind {
        AnsatzKind::Vha => ground_energy(&target.matrix),
        _ => sector_ground_energy(&target.matrix, plan.ansatz.occupation),
    };
    let config = plan.optimizer.clone().unwrap_or_default();
    let n = prepared.system.num_qubits;
    let mut rates = vec![0.0];
    rates.extend(&plan.noise.rates);
    let jobs: Vec<(f64, usize, Estimator)> = rates
        .iter()
        .flat_map(|&p| {
            (0..plan.replicates).flat_map(move |r| plan.estimators.iter().map(move |&e| (p, r, e)))
        })
        .collect();
    let outcomes: Vec<std::result::Result<VqeRun, FailureRecord>> = jobs
        .par_iter()
        .map(|&(rate, replicate, estimator)| {
            let fail = |message: String| FailureRecord {
                rate,
                replicate,
                estimator: estimator.name().into(),
                message,
            };
            let start = plan
                .ansatz
                .instantiate(n, plan.seed, replicate)
                .map_err(|e| fail(e.to_string()))?;
            let model = noise_model(plan, rate, replicate).map_err(|e| fail(e.to_string()))?;
            let base = expectation_options(plan, rate, replicate);
            let mut calls = 0u64;
            let mut objective = |theta: &[f64]| -> f64 {
                calls += 1;
                let mut options = base.clone();
                options.seed = crate::rng::derive_seed(base.seed, &[calls]);
                let stream = [replicate as u64, rate.to_bits(), calls];
                start
                    .with_parameters(theta.to_vec())
                    .and_then(|a| {
                        estimate(
                            plan,
                            target,
                            estimator,
                            &a,
                            &model,
                            plan.noise.mask,
                            &options,
                            &stream,
                        )
                    })
                    .unwrap_or(f64::NAN)
            };
            let optimization = minimize(&mut objective, &start.parameters, &config);
            let final_estimate = if optimization.value.is_finite() {
                optimization.value
            } else {
                objective(&optimization.parameters)
            };
            let best = start
                .with_parameters(optimization.parameters.clone())
                .map_err(|e| fail(e.to_string()))?;
            let psi = prepared_state(&best.prep_circuit().map_err(|e| fail(e.to_string()))?);
            let final_truth = expectation_value(&psi, &target.matrix);
            Ok(VqeRun {
                rate,
                replicate,
                estimator: estimator.name().into(),
                optimization,
                final_estimate,
                final_truth,
            })
        })
        .collect();
    let mut sweep = SweepResult {
        name: plan.name.clone(),
        axis: "rate".into(),
        ..Default::default()
    };
    let mut runs = Vec::new();
    for o in outcomes {
        match o {
            Ok(run) => {
                let rec = ErrorRecord {
                    rate: run.rate,
                    replicate: run.replicate,
                    estimator: run.estimator.clone(),
                    abs_error: (run.final_estimate - e0).abs(),
                };
                if run.rate == 0.0 {
                    sweep.floor.push(rec);
                } else {
                    sweep.records.push(rec);
                }
                runs.push(run);
            }
            Err(f) => sweep.failures.push(f),
        }
    }
    sweep.sort();
    Ok(VqeResult {
        sweep,
        runs,
        ground_energy: e0,
    })
}
