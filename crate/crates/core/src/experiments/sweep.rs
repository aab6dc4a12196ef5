//! Error-versus-noise-rate sweeps over an ensemble of ansatz states.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::ansatz::AnsatzSpec;
use crate::error::{Error, Result};
use crate::hamiltonian::{HamiltonianDecomposition, PauliSum};
use crate::linalg::CMatrix;
use crate::noise::{NoiseMask, NoiseModel};
use crate::rng::{derive_seed, rng_for};
use crate::vpe::{ansatz_prep, verified_expectation, ExpectationOptions, NoiseSetup, Protocol};

use super::oracle::{expectation_value, prepared_state, traceless_radius};
use super::plan::{
    Estimator, ExperimentKind, ExperimentPlan, MaskChoice, Prepared, STREAM_CONTROL_ERROR,
    STREAM_SAMPLING, STREAM_TOMOGRAPHY,
};
use super::tomography::tomography_estimate;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorRecord {
    /// Noise rate, or shot count in sampling studies.
    pub rate: f64,
    pub replicate: usize,
    pub estimator: String,
    pub abs_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FailureRecord {
    pub rate: f64,
    pub replicate: usize,
    pub estimator: String,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Statistic {
    Rms,
    Median,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub estimator: String,
    pub rate: f64,
    pub count: usize,
    pub rms: f64,
    pub median: f64,
}

impl Aggregate {
    pub fn get(&self, stat: Statistic) -> f64 {
        match stat {
            Statistic::Rms => self.rms,
            Statistic::Median => self.median,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SweepResult {
    pub name: String,
    /// Name of the x coordinate: `rate`, or `shots` for sampling studies.
    pub axis: String,
    pub records: Vec<ErrorRecord>,
    pub failures: Vec<FailureRecord>,
    /// The same estimators at zero noise.
    pub floor: Vec<ErrorRecord>,
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    }
}

pub fn rms(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt()
}

/// Least-squares slope of `log10 y` against `log10 x`; needs two distinct `x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (mx, my) = (
        pts.iter().map(|p| p.0).sum::<f64>() / n,
        pts.iter().map(|p| p.1).sum::<f64>() / n,
    );
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn aggregate(records: &[ErrorRecord]) -> Vec<Aggregate> {
    let mut groups: BTreeMap<(&str, u64), Vec<f64>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.estimator.as_str(), r.rate.to_bits()))
            .or_default()
            .push(r.abs_error);
    }
    groups
        .into_iter()
        .map(|((estimator, bits), mut v)| Aggregate {
            estimator: estimator.to_string(),
            rate: f64::from_bits(bits),
            count: v.len(),
            rms: rms(&v),
            median: median(&mut v),
        })
        .collect()
}

impl SweepResult {
    pub fn estimators(&self) -> Vec<String> {
        let mut names: Vec<String> = self.records.iter().map(|r| r.estimator.clone()).collect();
        names.extend(self.failures.iter().map(|f| f.estimator.clone()));
        names.sort();
        names.dedup();
        names
    }

    /// RMS and median per estimator and rate, ordered by estimator then rate.
    pub fn aggregates(&self) -> Vec<Aggregate> {
        aggregate(&self.records)
    }

    pub fn aggregate(&self, estimator: &str, rate: f64) -> Option<Aggregate> {
        self.aggregates()
            .into_iter()
            .find(|a| a.estimator == estimator && a.rate == rate)
    }

    /// Aggregate curve `(rate, value)` of one estimator.
    pub fn curve(&self, estimator: &str, stat: Statistic) -> Vec<(f64, f64)> {
        self.aggregates()
            .iter()
            .filter(|a| a.estimator == estimator)
            .map(|a| (a.rate, a.get(stat)))
            .collect()
    }

    /// Zero-noise value of `stat` for one estimator.
    pub fn floor_value(&self, estimator: &str, stat: Statistic) -> Option<f64> {
        aggregate(&self.floor)
            .into_iter()
            .find(|a| a.estimator == estimator)
            .map(|a| a.get(stat))
    }

    /// Log-log slope over rates whose aggregate exceeds ten times the floor.
    pub fn slope(&self, estimator: &str, stat: Statistic) -> Option<f64> {
        let floor = self.floor_value(estimator, stat).unwrap_or(0.0);
        let pts: Vec<(f64, f64)> = self
            .curve(estimator, stat)
            .into_iter()
            .filter(|&(_, y)| y > 10.0 * floor)
            .collect();
        log_log_slope(&pts)
    }

    /// Canonical order: rate, replicate, estimator.
    pub fn sort(&mut self) {
        let key = |r: &ErrorRecord| (r.rate.to_bits(), r.replicate, r.estimator.clone());
        self.records.sort_by_key(key);
        self.floor.sort_by_key(key);
        self.failures
            .sort_by_key(|f| (f.rate.to_bits(), f.replicate, f.estimator.clone()));
    }
}

/// What one error column estimates.
pub(crate) struct Target {
    pub(crate) label: Option<String>,
    pub(crate) decomposition: HamiltonianDecomposition,
    pub(crate) operator: PauliSum,
    pub(crate) matrix: CMatrix,
    /// Errors are divided by this.
    pub(crate) scale: f64,
}

pub(crate) fn targets(plan: &ExperimentPlan, prepared: &Prepared) -> Result<Vec<Target>> {
    let dec = &prepared.decomposition;
    if plan.kind != ExperimentKind::Termwise {
        let operator = prepared.system.operator()?;
        let matrix = operator.matrix();
        return Ok(vec![Target {
            label: None,
            decomposition: dec.clone(),
            operator,
            matrix,
            scale: 1.0,
        }]);
    }
    let selected: Vec<_> = match &plan.summands {
        Some(labels) => labels
            .iter()
            .filter_map(|l| dec.summands.iter().find(|s| &s.label == l))
            .collect(),
        None => dec.summands.iter().collect(),
    };
    selected
        .into_iter()
        .map(|s| {
            let matrix = s.operator.matrix();
            let scale = if plan.normalize_summands {
                traceless_radius(&matrix)
            } else {
                1.0
            };
            Ok(Target {
                label: Some(s.label.clone()),
                decomposition: HamiltonianDecomposition::new(dec.num_qubits, vec![s.clone()], 0.0)?,
                operator: s.operator.clone(),
                matrix,
                scale: if scale > 1e-12 { scale } else { 1.0 },
            })
        })
        .collect()
}

/// One output column: an estimator on a target under a noise mask.
pub(crate) struct Column {
    pub(crate) name: String,
    pub(crate) estimator: Estimator,
    pub(crate) target: usize,
    pub(crate) mask: MaskChoice,
}

fn columns(plan: &ExperimentPlan, targets: &[Target]) -> Vec<Column> {
    let mut out = Vec::new();
    for (ti, t) in targets.iter().enumerate() {
        for &estimator in &plan.estimators {
            let base = match &t.label {
                Some(l) => format!("{}:{l}", estimator.name()),
                None => estimator.name().to_string(),
            };
            if plan.kind == ExperimentKind::SplitNoise && estimator == Estimator::Vpe {
                for (mask, suffix) in [
                    (MaskChoice::All, "all"),
                    (MaskChoice::SystemOnly, "system_only"),
                    (MaskChoice::ControlOnly, "control_only"),
                ] {
                    out.push(Column {
                        name: format!("{base}_{suffix}"),
                        estimator,
                        target: ti,
                        mask,
                    });
                }
            } else {
                let mask = if estimator == Estimator::Tomography
                    && plan.kind == ExperimentKind::SplitNoise
                {
                    MaskChoice::All
                } else {
                    plan.noise.mask
                };
                out.push(Column {
                    name: base,
                    estimator,
                    target: ti,
                    mask,
                });
            }
        }
    }
    out
}

pub(crate) struct ReplicateState {
    pub(crate) ansatz: AnsatzSpec,
    pub(crate) truths: Vec<f64>,
}

pub(crate) fn replicate_state(
    plan: &ExperimentPlan,
    prepared: &Prepared,
    targets: &[Target],
    replicate: usize,
) -> Result<ReplicateState> {
    let ansatz = plan
        .ansatz
        .instantiate(prepared.system.num_qubits, plan.seed, replicate)?;
    let psi = prepared_state(&ansatz.prep_circuit()?);
    let truths = targets
        .iter()
        .map(|t| expectation_value(&psi, &t.matrix))
        .collect();
    Ok(ReplicateState { ansatz, truths })
}

pub(crate) fn noise_model(
    plan: &ExperimentPlan,
    rate: f64,
    replicate: usize,
) -> Result<NoiseModel> {
    if rate == 0.0 {
        return Ok(NoiseModel::noiseless());
    }
    plan.noise.kind.model(
        rate,
        derive_seed(plan.seed, &[STREAM_CONTROL_ERROR, replicate as u64]),
    )
}

pub(crate) fn expectation_options(
    plan: &ExperimentPlan,
    rate: f64,
    replicate: usize,
) -> ExpectationOptions {
    ExpectationOptions {
        protocol: plan.protocol,
        flags: plan.flags,
        mode: plan.mode,
        post: plan.post,
        compilation: plan.compilation,
        merge_givens: true,
        time_grid: plan.time_grid,
        prony_order: plan.prony_order,
        seed: derive_seed(
            plan.seed,
            &[STREAM_SAMPLING, replicate as u64, rate.to_bits()],
        ),
    }
}

/// Noise seen by the VPE register and by the bare state preparation.
pub(crate) fn noise_setups(
    plan: &ExperimentPlan,
    model: &NoiseModel,
    mask: MaskChoice,
) -> (NoiseSetup, NoiseSetup) {
    let vpe_mask = match plan.protocol {
        Protocol::SingleControl => mask.vpe_mask(),
        Protocol::ControlFree => NoiseMask::All,
    };
    let bare = if mask.system_noisy() {
        model.clone()
    } else {
        NoiseModel::noiseless()
    };
    (
        NoiseSetup::new(model.clone(), vpe_mask),
        NoiseSetup::everywhere(bare),
    )
}

/// Estimate of a target on one replicate's state.
pub(crate) fn estimate(
    plan: &ExperimentPlan,
    target: &Target,
    estimator: Estimator,
    ansatz: &AnsatzSpec,
    model: &NoiseModel,
    mask: MaskChoice,
    options: &ExpectationOptions,
    stream: &[u64],
) -> Result<f64> {
    let (vpe_noise, bare_noise) = noise_setups(plan, model, mask);
    match estimator {
        Estimator::Vpe => {
            Ok(verified_expectation(&target.decomposition, ansatz, &vpe_noise, options)?.value)
        }
        Estimator::Tomography => {
            let prep = ansatz_prep(ansatz, plan.compilation)?;
            let mut path = vec![STREAM_TOMOGRAPHY];
            path.extend_from_slice(stream);
            tomography_estimate(
                &target.operator,
                &prep,
                &bare_noise,
                plan.mode,
                &mut rng_for(plan.seed, &path),
            )
        }
    }
}

type Outcome = std::result::Result<ErrorRecord, FailureRecord>;

fn run_job(
    plan: &ExperimentPlan,
    targets: &[Target],
    columns: &[Column],
    state: &std::result::Result<ReplicateState, String>,
    rate: f64,
    replicate: usize,
) -> Vec<Outcome> {
    let fail = |c: &Column, message: String| FailureRecord {
        rate,
        replicate,
        estimator: c.name.clone(),
        message,
    };
    let state = match state {
        Ok(s) => s,
        Err(m) => return columns.iter().map(|c| Err(fail(c, m.clone()))).collect(),
    };
    let model = match noise_model(plan, rate, replicate) {
        Ok(m) => m,
        Err(e) => {
            return columns
                .iter()
                .map(|c| Err(fail(c, e.to_string())))
                .collect()
        }
    };
    let options = expectation_options(plan, rate, replicate);
    columns
        .iter()
        .enumerate()
        .map(|(ci, c)| {
            let target = &targets[c.target];
            let stream = [replicate as u64, rate.to_bits(), ci as u64];
            estimate(
                plan,
                target,
                c.estimator,
                &state.ansatz,
                &model,
                c.mask,
                &options,
                &stream,
            )
            .map(|v| ErrorRecord {
                rate,
                replicate,
                estimator: c.name.clone(),
                abs_error: (v - state.truths[c.target]).abs() / target.scale,
            })
            .map_err(|e| fail(c, e.to_string()))
        })
        .collect()
}

/// Error sweep for any plan kind built from columns (sweep, split noise, term-wise).
fn run_columns(plan: &ExperimentPlan) -> Result<SweepResult> {
    let prepared = plan.check()?;
    let targets = targets(plan, &prepared)?;
    let columns = columns(plan, &targets);
    let states: Vec<_> = (0..plan.replicates)
        .into_par_iter()
        .map(|r| replicate_state(plan, &prepared, &targets, r).map_err(|e| e.to_string()))
        .collect();
    let mut rates = vec![0.0];
    rates.extend(&plan.noise.rates);
    let jobs: Vec<(f64, usize)> = rates
        .iter()
        .flat_map(|&p| (0..plan.replicates).map(move |r| (p, r)))
        .collect();
    let outcomes: Vec<Vec<Outcome>> = jobs
        .par_iter()
        .map(|&(p, r)| run_job(plan, &targets, &columns, &states[r], p, r))
        .collect();
    let mut result = SweepResult {
        name: plan.name.clone(),
        axis: "rate".into(),
        ..Default::default()
    };
    for o in outcomes.into_iter().flatten() {
        match o {
            Ok(rec) if rec.rate == 0.0 => result.floor.push(rec),
            Ok(rec) => result.records.push(rec),
            Err(f) if f.rate == 0.0 => {}
            Err(f) => result.failures.push(f),
        }
    }
    result.sort();
    Ok(result)
}

fn require_kind(plan: &ExperimentPlan, kind: ExperimentKind) -> Result<()> {
    if plan.kind != kind {
        return Err(Error::Config {
            path: "kind".into(),
            message: format!("expected {kind:?}, plan is {:?}", plan.kind),
        });
    }
    Ok(())
}

/// Per rate and replicate: dense truth, tomography and verified estimates.
pub fn run_error_sweep(plan: &ExperimentPlan) -> Result<SweepResult> {
    require_kind(plan, ExperimentKind::ErrorSweep)?;
    run_columns(plan)
}

/// Verified estimates with noise everywhere, on the system only and on the control only.
pub fn run_split_noise(plan: &ExperimentPlan) -> Result<SweepResult> {
    require_kind(plan, ExperimentKind::SplitNoise)?;
    run_columns(plan)
}

/// One error curve per selected summand.
pub fn run_termwise(plan: &ExperimentPlan) -> Result<SweepResult> {
    require_kind(plan, ExperimentKind::Termwise)?;
    run_columns(plan)
}
