//! Derivative-free minimizers for noisy black-box energies.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerMethod {
    /// Simplex search.
    #[default]
    NelderMead,
    /// Linear-approximation trust region.
    Cobyla,
}

fn budget() -> usize {
    500
}

fn step() -> f64 {
    0.3
}

fn tolerance() -> f64 {
    1e-10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    #[serde(default)]
    pub method: OptimizerMethod,
    #[serde(default = "budget")]
    pub max_evaluations: usize,
    /// Initial simplex edge or trust-region radius.
    #[serde(default = "step")]
    pub initial_step: f64,
    /// Stop once the objective spread (simplex) or change (trust region) falls below this.
    #[serde(default = "tolerance")]
    pub tolerance: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            method: OptimizerMethod::default(),
            max_evaluations: budget(),
            initial_step: step(),
            tolerance: tolerance(),
        }
    }
}

impl OptimizerConfig {
    /// Offending field and message.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        if !(self.initial_step.is_finite() && self.initial_step > 0.0) {
            return Err((
                "initial_step",
                format!("{} must be positive", self.initial_step),
            ));
        }
        if !(self.tolerance.is_finite() && self.tolerance >= 0.0) {
            return Err((
                "tolerance",
                format!("{} must be non-negative", self.tolerance),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Evaluation {
    pub parameters: Vec<f64>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizeResult {
    /// Best point seen; the initial point when nothing was evaluated.
    pub parameters: Vec<f64>,
    /// Objective at `parameters`, NaN when nothing was evaluated.
    pub value: f64,
    pub evaluations: usize,
    /// False when the budget ran out first.
    pub converged: bool,
    /// Every evaluation in call order.
    pub trajectory: Vec<Evaluation>,
}

/// Budgeted, recording objective. Non-finite values are replaced by `+inf`
/// for comparisons but recorded as returned.
struct Recorder<F> {
    f: F,
    budget: usize,
    trajectory: Vec<Evaluation>,
}

impl<F: FnMut(&[f64]) -> f64> Recorder<F> {
    fn eval(&mut self, x: &[f64]) -> Option<f64> {
        if self.trajectory.len() >= self.budget {
            return None;
        }
        let value = (self.f)(x);
        self.trajectory.push(Evaluation {
            parameters: x.to_vec(),
            value,
        });
        Some(if value.is_nan() { f64::INFINITY } else { value })
    }

    fn finish(self, converged: bool, x0: &[f64]) -> OptimizeResult {
        let best = self
            .trajectory
            .iter()
            .filter(|e| !e.value.is_nan())
            .min_by(|a, b| a.value.total_cmp(&b.value));
        let (parameters, value) = match best {
            Some(e) => (e.parameters.clone(), e.value),
            None => (x0.to_vec(), f64::NAN),
        };
        OptimizeResult {
            parameters,
            value,
            evaluations: self.trajectory.len(),
            converged,
            trajectory: self.trajectory,
        }
    }
}

pub fn minimize(
    f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    config: &OptimizerConfig,
) -> OptimizeResult {
    match config.method {
        OptimizerMethod::NelderMead => nelder_mead(f, x0, config),
        OptimizerMethod::Cobyla => cobyla(f, x0, config),
    }
}

fn lerp(a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(a, b)| a + s * (b - a)).collect()
}

/// Standard simplex search: reflection 1, expansion 2, contraction and shrink 1/2.
pub fn nelder_mead(
    f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    config: &OptimizerConfig,
) -> OptimizeResult {
    let mut rec = Recorder {
        f,
        budget: config.max_evaluations,
        trajectory: Vec::new(),
    };
    let n = x0.len();
    let Some(f0) = rec.eval(x0) else {
        return rec.finish(false, x0);
    };
    if n == 0 {
        return rec.finish(true, x0);
    }
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(x0.to_vec(), f0)];
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += config.initial_step;
        let Some(fx) = rec.eval(&x) else {
            return rec.finish(false, x0);
        };
        simplex.push((x, fx));
    }
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[n].1);
        let size = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if (worst - best).abs() <= config.tolerance && size <= config.tolerance.sqrt() {
            return rec.finish(true, x0);
        }
        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|(x, _)| x[k]).sum::<f64>() / n as f64)
            .collect();
        let xr = lerp(&centroid, &simplex[n].0, -1.0);
        let Some(fr) = rec.eval(&xr) else {
            return rec.finish(false, x0);
        };
        if fr < best {
            let xe = lerp(&centroid, &simplex[n].0, -2.0);
            let Some(fe) = rec.eval(&xe) else {
                return rec.finish(false, x0);
            };
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, limit) = if fr < worst {
            (lerp(&centroid, &xr, 0.5), fr)
        } else {
            (lerp(&centroid, &simplex[n].0, 0.5), worst)
        };
        let Some(fc) = rec.eval(&xc) else {
            return rec.finish(false, x0);
        };
        if fc < limit {
            simplex[n] = (xc, fc);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x = lerp(&anchor, &vertex.0, 0.5);
            let Some(fx) = rec.eval(&x) else {
                return rec.finish(false, x0);
            };
            *vertex = (x, fx);
        }
    }
}

/// Penalty handed to the trust-region solver in place of non-finite values.
const PENALTY: f64 = 1e6;

pub fn cobyla(
    f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    config: &OptimizerConfig,
) -> OptimizeResult {
    if config.max_evaluations == 0 || x0.is_empty() {
        return nelder_mead(f, x0, config);
    }
    let rec = RefCell::new(Recorder {
        f,
        budget: config.max_evaluations,
        trajectory: Vec::new(),
    });
    let objective = |x: &[f64], _: &mut ()| match rec.borrow_mut().eval(x) {
        Some(v) if v.is_finite() => v,
        _ => PENALTY,
    };
    let bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); x0.len()];
    let tols = cobyla::StopTols {
        ftol_abs: config.tolerance,
        ..Default::default()
    };
    let no_constraints: &[fn(&[f64], &mut ()) -> f64] = &[];
    let outcome = cobyla::minimize(
        objective,
        x0,
        &bounds,
        no_constraints,
        (),
        config.max_evaluations,
        cobyla::RhoBeg::All(config.initial_step),
        Some(tols),
    );
    let converged = matches!(
        outcome,
        Ok((
            cobyla::SuccessStatus::Success
                | cobyla::SuccessStatus::FtolReached
                | cobyla::SuccessStatus::XtolReached,
            ..
        ))
    );
    rec.into_inner().finish(converged, x0)
}
