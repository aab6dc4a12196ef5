//! Finite-shot convergence of verified and unverified estimates at a fixed state.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::ansatz::AnsatzSpec;
use crate::error::{Error, Result};
use crate::linalg::cis;
use crate::rng::{derive_seed, rng_for};
use crate::signal::{bias_compensate, fit_known_phases, prony, renormalized_expectation};
use crate::vpe::{ansatz_prep, default_time_grid, summand_circuit, OutcomeTable};

use super::optimize::{nelder_mead, OptimizerConfig};
use super::oracle::{expectation_value, prepared_state};
use super::plan::{ExperimentKind, ExperimentPlan, MaskChoice, STREAM_SAMPLING, STREAM_TOMOGRAPHY};
use super::sweep::{
    expectation_options, log_log_slope, noise_model, noise_setups, targets, ErrorRecord,
    FailureRecord, Statistic, SweepResult,
};
use super::tomography::{noisy_state, pauli_probabilities, sampled_from_probabilities};

#[derive(Clone, Debug, Serialize)]
pub struct SamplingResult {
    /// Errors against the noiseless truth; `rate` holds the shot count.
    pub sweep: SweepResult,
    /// Infinite-shot error of every curve.
    pub limits: BTreeMap<String, f64>,
    pub parameters: Vec<f64>,
    pub truth: f64,
}

impl SamplingResult {
    /// Log-log slope of the median error against shots.
    pub fn slope(&self, estimator: &str) -> Option<f64> {
        log_log_slope(&self.sweep.curve(estimator, Statistic::Median))
    }
}

pub fn curve_name(method: &str, rate: f64) -> String {
    format!("{method}@{rate}")
}

/// Noiseless variational minimum of the dense energy, best of a few restarts.
pub fn variational_minimum(
    plan: &ExperimentPlan,
    matrix: &crate::linalg::CMatrix,
    num_qubits: usize,
) -> Result<AnsatzSpec> {
    if plan.ansatz.parameters.is_some() {
        return plan.ansatz.instantiate(num_qubits, plan.seed, 0);
    }
    let config = OptimizerConfig {
        max_evaluations: 4000,
        tolerance: 1e-14,
        ..plan.optimizer.clone().unwrap_or_default()
    };
    let mut best: Option<(f64, AnsatzSpec)> = None;
    for restart in 0..8 {
        let start = plan.ansatz.instantiate(num_qubits, plan.seed, restart)?;
        let energy = |theta: &[f64]| {
            start
                .with_parameters(theta.to_vec())
                .and_then(|a| a.prep_circuit())
                .map(|c| expectation_value(&prepared_state(&c), matrix))
                .unwrap_or(f64::INFINITY)
        };
        let r = nelder_mead(energy, &start.parameters, &config);
        if best.as_ref().is_none_or(|(e, _)| r.value < *e) {
            best = Some((r.value, start.with_parameters(r.parameters)?));
        }
    }
    Ok(best.expect("at least one restart").1)
}

struct SummandTable {
    table: OutcomeTable,
    eigenvalues: Option<Vec<f64>>,
}

/// Sampled Prony (optionally compensated), sampled known-phase fitting and
/// sampled tomography, each with `M` shots per time point or Pauli string.
pub fn run_sampling_convergence(plan: &ExperimentPlan) -> Result<SamplingResult> {
    if plan.kind != ExperimentKind::SamplingConvergence {
        return Err(Error::Config {
            path: "kind".into(),
            message: format!("expected SamplingConvergence, plan is {:?}", plan.kind),
        });
    }
    let prepared = plan.check()?;
    let study = plan.sampling.clone().expect("validated");
    let target = targets(plan, &prepared)?.remove(0);
    let n = prepared.system.num_qubits;
    let ansatz = variational_minimum(plan, &target.matrix, n)?;
    let truth = expectation_value(&prepared_state(&ansatz.prep_circuit()?), &target.matrix);
    let order = study.prony_order.unwrap_or(study.steps / 2);
    let dec = &target.decomposition;
    let mut rates = Vec::new();
    if study.include_noiseless {
        rates.push(0.0);
    }
    rates.extend(&plan.noise.rates);

    let mut sweep = SweepResult {
        name: plan.name.clone(),
        axis: "shots".into(),
        ..Default::default()
    };
    let mut limits = BTreeMap::new();
    for &rate in &rates {
        let model = noise_model(plan, rate, 0)?;
        let (vpe_noise, bare_noise) = noise_setups(plan, &model, MaskChoice::All);
        let options = expectation_options(plan, rate, 0);
        let tables = dec
            .summands
            .iter()
            .map(|s| {
                let vc = summand_circuit(s, &ansatz, &options)?;
                let step = plan
                    .time_grid
                    .map_or_else(|| default_time_grid(s).step, |g| g.step);
                let times: Vec<f64> = (0..study.steps).map(|k| k as f64 * step).collect();
                Ok(SummandTable {
                    table: OutcomeTable::new(&vc, &times, &vpe_noise, plan.flags)?,
                    eigenvalues: s.distinct_eigenvalues(1e-9),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let rho = noisy_state(&ansatz_prep(&ansatz, plan.compilation)?, &bare_noise)?;
        let probs = pauli_probabilities(&rho, &target.operator)?;
        let identity = target.operator.identity_coefficient();

        let names = ["prony", "known_phases", "tomography"].map(|m| curve_name(m, rate));
        let exact: Vec<_> = tables.iter().map(|t| t.table.exact()).collect();
        let limit = |post: &dyn Fn(
            &SummandTable,
            &crate::vpe::PhaseFunctionRecord,
        ) -> Result<f64>|
         -> Result<f64> {
            let values = tables
                .iter()
                .zip(&exact)
                .map(|(t, r)| post(t, r))
                .collect::<Result<Vec<_>>>()?;
            Ok((dec.combine(&values)? - truth).abs())
        };
        if let Ok(e) = limit(&|_, r| renormalized_expectation(&prony(&r.t_grid, &r.g, order)?)) {
            limits.insert(names[0].clone(), e);
        }
        if let Ok(e) = limit(&|t, r| known_phase_value(t, r)) {
            limits.insert(names[1].clone(), e);
        }
        limits.insert(
            names[2].clone(),
            (identity + probs.iter().map(|(c, p)| c * (2.0 * p - 1.0)).sum::<f64>() - truth).abs(),
        );

        let jobs: Vec<(usize, usize)> = study
            .shots
            .iter()
            .flat_map(|&m| (0..study.trials).map(move |k| (m, k)))
            .collect();
        let outcomes: Vec<Vec<std::result::Result<ErrorRecord, FailureRecord>>> = jobs
            .par_iter()
            .map(|&(shots, trial)| {
                let coords = [STREAM_SAMPLING, rate.to_bits(), shots as u64, trial as u64];
                let rec = |i: usize, value: Result<f64>| match value {
                    Ok(v) => Ok(ErrorRecord {
                        rate: shots as f64,
                        replicate: trial,
                        estimator: names[i].clone(),
                        abs_error: (v - truth).abs(),
                    }),
                    Err(e) => Err(FailureRecord {
                        rate: shots as f64,
                        replicate: trial,
                        estimator: names[i].clone(),
                        message: e.to_string(),
                    }),
                };
                let records: Result<Vec<_>> = tables
                    .iter()
                    .enumerate()
                    .map(|(si, t)| {
                        let mut path = coords.to_vec();
                        path.push(si as u64);
                        t.table.sample(shots, plan.seed, &path)
                    })
                    .collect();
                let records = match records {
                    Ok(r) => r,
                    Err(e) => {
                        return (0..2)
                            .map(|i| rec(i, Err(Error::Parameter(e.to_string()))))
                            .collect()
                    }
                };
                let prony_value = tables
                    .iter()
                    .zip(&records)
                    .map(|(_, r)| {
                        let raw = renormalized_expectation(&prony(&r.t_grid, &r.g, order)?)?;
                        if study.compensate {
                            bias_compensate(raw, study.steps, shots)
                        } else {
                            Ok(raw)
                        }
                    })
                    .collect::<Result<Vec<_>>>()
                    .and_then(|v| dec.combine(&v));
                let known_value = tables
                    .iter()
                    .zip(&records)
                    .map(|(t, r)| known_phase_value(t, r))
                    .collect::<Result<Vec<_>>>()
                    .and_then(|v| dec.combine(&v));
                let mut tomo_path = vec![STREAM_TOMOGRAPHY];
                tomo_path.extend_from_slice(&coords[1..]);
                let tomography = sampled_from_probabilities(
                    identity,
                    &probs,
                    shots,
                    &mut rng_for(plan.seed, &tomo_path),
                );
                vec![rec(0, prony_value), rec(1, known_value), rec(2, tomography)]
            })
            .collect();
        for o in outcomes.into_iter().flatten() {
            match o {
                Ok(r) => sweep.records.push(r),
                Err(f) => sweep.failures.push(f),
            }
        }
    }
    sweep.sort();
    Ok(SamplingResult {
        sweep,
        limits,
        parameters: ansatz.parameters,
        truth,
    })
}

fn known_phase_value(t: &SummandTable, r: &crate::vpe::PhaseFunctionRecord) -> Result<f64> {
    let eigs = t
        .eigenvalues
        .as_ref()
        .ok_or_else(|| Error::Protocol("known-phase fitting needs the summand spectrum".into()))?;
    renormalized_expectation(&fit_known_phases(&r.t_grid, &r.g, eigs)?)
}

/// Mean `|bias|` of sampled Prony estimates before and after compensation.
#[derive(Clone, Debug, Serialize)]
pub struct BiasStudy {
    pub raw: f64,
    pub compensated: f64,
    pub failures: usize,
}

/// Synthetic phase functions `g(k) = sum_j A_j e^{i E_j k}`, `k = 0..K`, with
/// random spectra in `(-pi, pi)`, sampled with `M` shots per quadrature
/// (every shot verified) and post-processed with Prony at order `K / 2`.
/// The bias of an instance is the mean over trials minus the truth.
pub fn bias_study(
    steps: usize,
    shots: usize,
    trials: usize,
    instances: usize,
    seed: u64,
) -> Result<BiasStudy> {
    let order = steps / 2;
    let t: Vec<f64> = (0..steps).map(|k| k as f64).collect();
    let per_instance: Vec<(f64, f64, usize)> = (0..instances)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, &[i as u64]);
            let count = rng.random_range(2..=3);
            let mut amps: Vec<f64> = (0..count).map(|_| rng.random_range(0.1..1.0)).collect();
            let total: f64 = amps.iter().sum();
            amps.iter_mut().for_each(|a| *a /= total);
            let eigs: Vec<f64> = (0..count)
                .map(|_| rng.random_range(-0.8 * PI..0.8 * PI))
                .collect();
            let truth: f64 = amps.iter().zip(&eigs).map(|(a, e)| a * e).sum();
            let g: Vec<Complex64> = t
                .iter()
                .map(|&tk| amps.iter().zip(&eigs).map(|(a, e)| cis(e * tk) * a).sum())
                .collect();
            let (mut raw, mut comp, mut ok, mut failed) = (0.0, 0.0, 0usize, 0usize);
            for trial in 0..trials {
                let mut rng = rng_for(derive_seed(seed, &[i as u64]), &[trial as u64]);
                let sampled: Vec<Complex64> = g
                    .iter()
                    .map(|z| {
                        Complex64::new(
                            sample_mean(z.re, shots, &mut rng),
                            sample_mean(z.im, shots, &mut rng),
                        )
                    })
                    .collect();
                match prony(&t, &sampled, order).and_then(|e| renormalized_expectation(&e)) {
                    Ok(v) => {
                        raw += v;
                        comp += bias_compensate(v, steps, shots).expect("K >= 2");
                        ok += 1;
                    }
                    Err(_) => failed += 1,
                }
            }
            let k = ok.max(1) as f64;
            ((raw / k - truth).abs(), (comp / k - truth).abs(), failed)
        })
        .collect();
    let m = instances.max(1) as f64;
    Ok(BiasStudy {
        raw: per_instance.iter().map(|p| p.0).sum::<f64>() / m,
        compensated: per_instance.iter().map(|p| p.1).sum::<f64>() / m,
        failures: per_instance.iter().map(|p| p.2).sum(),
    })
}

/// Mean of `shots` draws of `+-1` with mean `x`.
fn sample_mean<R: Rng + ?Sized>(x: f64, shots: usize, rng: &mut R) -> f64 {
    let p = ((1.0 + x) / 2.0).clamp(0.0, 1.0);
    let plus = Binomial::new(shots as u64, p)
        .expect("probability in [0, 1]")
        .sample(rng);
    2.0 * plus as f64 / shots as f64 - 1.0
}
