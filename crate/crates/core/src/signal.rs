//! Post-processing of phase functions `g(t) = sum_j A_j e^{i E_j t}` into
//! eigenvalue/amplitude pairs and expectation values.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::cis;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralMethod {
    Prony,
    KnownPhaseFit,
    SinglePoint,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralEstimate {
    pub eigenvalues: Vec<f64>,
    /// Nonnegative raw amplitudes `A'_j`.
    pub amplitudes: Vec<f64>,
    pub method: SpectralMethod,
    /// Root-mean-square misfit of the amplitude fit.
    pub residual: f64,
    /// Set when Prony had to lower the requested order.
    pub reduced_order: bool,
}

impl SpectralEstimate {
    /// Phase function synthesized from the estimate.
    pub fn evaluate(&self, t: f64) -> Complex64 {
        self.eigenvalues
            .iter()
            .zip(&self.amplitudes)
            .map(|(&e, &a)| cis(e * t) * a)
            .sum()
    }

    pub fn total_amplitude(&self) -> f64 {
        self.amplitudes.iter().sum()
    }
}

/// Nonnegative least squares `min |A x - b|, x >= 0` (Lawson-Hanson active set).
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let tol = 1e-12 * scale * (a.nrows().max(n) as f64);
    for _ in 0..(3 * n + 10) {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else { break };
        passive[j] = true;
        loop {
            let idx: Vec<usize> = (0..n).filter(|&k| passive[k]).collect();
            let sub = DMatrix::from_fn(a.nrows(), idx.len(), |r, c| a[(r, idx[c])]);
            let z_sub = sub
                .svd(true, true)
                .solve(b, 1e-14)
                .expect("SVD with both factors");
            if z_sub.iter().all(|&v| v > 0.0) {
                for (c, &k) in idx.iter().enumerate() {
                    x[k] = z_sub[c];
                }
                break;
            }
            // step back toward the feasible region and drop variables that hit zero
            let mut alpha = f64::INFINITY;
            for (c, &k) in idx.iter().enumerate() {
                if z_sub[c] <= 0.0 {
                    alpha = alpha.min(x[k] / (x[k] - z_sub[c]));
                }
            }
            for (c, &k) in idx.iter().enumerate() {
                x[k] += alpha * (z_sub[c] - x[k]);
                if x[k] <= 1e-15 {
                    x[k] = 0.0;
                    passive[k] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    x
}

/// Real design for `sum_j A_j e^{i E_j t_k}` with stacked real and imaginary rows.
fn fit_amplitudes(t: &[f64], g: &[Complex64], eigenvalues: &[f64]) -> (Vec<f64>, f64) {
    let k = t.len();
    let design = DMatrix::from_fn(2 * k, eigenvalues.len(), |r, c| {
        let z = cis(eigenvalues[c] * t[r % k]);
        if r < k {
            z.re
        } else {
            z.im
        }
    });
    let target = DVector::from_fn(2 * k, |r, _| if r < k { g[r].re } else { g[r - k].im });
    let x = nnls(&design, &target);
    let residual = ((&design * &x - &target).norm_squared() / k as f64).sqrt();
    (x.iter().copied().collect(), residual)
}

fn check_record(t: &[f64], g: &[Complex64]) -> Result<()> {
    if t.len() != g.len() {
        return Err(Error::Dimension(format!(
            "{} times for {} samples",
            t.len(),
            g.len()
        )));
    }
    if g.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Parameter(
            "phase function contains non-finite samples".into(),
        ));
    }
    Ok(())
}

/// Spacing of a uniform grid.
fn uniform_step(t: &[f64]) -> Result<f64> {
    if t.len() < 2 {
        return Err(Error::Parameter("need at least two time points".into()));
    }
    let dt = t[1] - t[0];
    let scale = t.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    if dt <= 0.0
        || t.windows(2)
            .any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * scale)
    {
        return Err(Error::Parameter(
            "Prony needs a uniformly spaced, increasing time grid".into(),
        ));
    }
    Ok(dt)
}

fn polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    // monic z^p + c_{p-1} z^{p-1} + ... + c_0
    let p = coeffs.len();
    if p == 0 {
        return Vec::new();
    }
    let mut companion = DMatrix::<Complex64>::zeros(p, p);
    for i in 1..p {
        companion[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..p {
        companion[(i, p - 1)] = -coeffs[i];
    }
    companion
        .schur()
        .eigenvalues()
        .map(|v| v.iter().copied().collect())
        .unwrap_or_default()
}

/// Least-squares Prony fit of up to `order` exponentials.
///
/// The prediction matrix is rank-checked first; when it carries fewer modes
/// than requested the order is lowered and `reduced_order` set. Roots further
/// than 0.5 from the unit circle are dropped, the rest are projected onto it.
pub fn prony(t: &[f64], g: &[Complex64], order: usize) -> Result<SpectralEstimate> {
    check_record(t, g)?;
    let dt = uniform_step(t)?;
    let k = t.len();
    if order == 0 || k < 2 * order {
        return Err(Error::Parameter(format!(
            "order {order} needs at least {} points, got {k}",
            2 * order
        )));
    }
    let hankel = |p: usize| DMatrix::from_fn(k - p, p, |r, c| g[r + c]);
    let sv = hankel(order).singular_values();
    let top = sv.iter().fold(0.0f64, |m, &v| m.max(v));
    if top < 1e-14 {
        return Err(Error::SignalLost(top));
    }
    let rank = sv.iter().filter(|&&v| v > 1e-9 * top).count().max(1);
    let p = order.min(rank);
    let h = hankel(p);
    let rhs = DVector::from_fn(k - p, |r, _| -g[r + p]);
    let coeffs = h
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::Degenerate(e.to_string()))?;
    let roots = polynomial_roots(coeffs.as_slice());
    let mut eigenvalues: Vec<f64> = roots
        .iter()
        .filter(|z| (z.norm() - 1.0).abs() <= 0.5)
        .map(|z| z.arg() / dt)
        .collect();
    eigenvalues.sort_by(f64::total_cmp);
    if eigenvalues.is_empty() {
        return Err(Error::SignalLost(0.0));
    }
    let (amplitudes, residual) = fit_amplitudes(t, g, &eigenvalues);
    Ok(SpectralEstimate {
        eigenvalues,
        amplitudes,
        method: SpectralMethod::Prony,
        residual,
        reduced_order: p < order,
    })
}

/// Distinct values of a multiset, merging those within `tol`.
pub fn merge_degenerate(values: &[f64], tol: f64) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::new();
    for e in v {
        if out.last().is_none_or(|&l| e - l > tol) {
            out.push(e);
        }
    }
    out
}

/// Nonnegative amplitude fit at known eigenvalues; degenerate values share a column.
pub fn fit_known_phases(
    t: &[f64],
    g: &[Complex64],
    eigenvalues: &[f64],
) -> Result<SpectralEstimate> {
    check_record(t, g)?;
    let eigenvalues = merge_degenerate(eigenvalues, 1e-9);
    if eigenvalues.is_empty() {
        return Err(Error::Parameter("no eigenvalues supplied".into()));
    }
    let k = t.len();
    let design = DMatrix::from_fn(k, eigenvalues.len(), |r, c| cis(eigenvalues[c] * t[r]));
    let sv = design.singular_values();
    let top = sv.max();
    if sv.len() < eigenvalues.len() || sv.min() < 1e-10 * top {
        return Err(Error::Degenerate(format!(
            "{} time points cannot separate {} eigenvalues",
            k,
            eigenvalues.len()
        )));
    }
    let (amplitudes, residual) = fit_amplitudes(t, g, &eigenvalues);
    Ok(SpectralEstimate {
        eigenvalues,
        amplitudes,
        method: SpectralMethod::KnownPhaseFit,
        residual,
        reduced_order: false,
    })
}

/// `sum_j A'_j E_j / sum_j A'_j`
pub fn renormalized_expectation(est: &SpectralEstimate) -> Result<f64> {
    let total = est.total_amplitude();
    if total.is_nan() || total < 1e-6 {
        return Err(Error::SignalLost(total));
    }
    Ok(est
        .eigenvalues
        .iter()
        .zip(&est.amplitudes)
        .map(|(e, a)| e * a)
        .sum::<f64>()
        / total)
}

/// `Im g(t) / (t |g(0)|)`, biased at `O(t^2)`.
pub fn single_point_estimate(g_t: Complex64, g_0: Complex64, t: f64) -> Result<f64> {
    if t == 0.0 {
        return Err(Error::Parameter(
            "single-point estimate needs t != 0".into(),
        ));
    }
    if g_0.norm() < 1e-6 {
        return Err(Error::SignalLost(g_0.norm()));
    }
    Ok(g_t.im / (t * g_0.norm()))
}

/// Removes the shrinkage of sampled Prony estimates: `raw / (1 + sqrt((K - 2) / M))`.
pub fn bias_compensate(raw: f64, steps: usize, shots: usize) -> Result<f64> {
    if steps < 2 || shots == 0 {
        return Err(Error::Parameter(format!(
            "compensation needs K >= 2 and M > 0, got K={steps}, M={shots}"
        )));
    }
    Ok(raw / (1.0 + ((steps - 2) as f64).sqrt() / (shots as f64).sqrt()))
}
