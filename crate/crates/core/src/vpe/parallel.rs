//! Parallel estimation of commuting summands with one control each.
//!
//! Control `s` sees its own evolution kicked back together with the
//! evolutions of the other summands, which produces a "ghost" spectrum of
//! frequencies `E_j^s + sum_{s' != s} v_{s'} (E_j^{s'} - E_{j'}^{s'})`. The
//! weighted mean of that spectrum is still `<H_s>`.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::hamiltonian::Evolution;
use crate::linalg::{eigh, max_abs_diff, CMatrix, ZERO};
use crate::noise::attach_noise;
use crate::rng::rng_for;
use crate::signal::merge_degenerate;
use crate::sim::{gate, Circuit, DensityMatrix, PureState};

use super::estimate::NoiseSetup;
use super::{Mode, PhaseFunctionRecord, QuadratureCounts};

#[derive(Clone, Debug)]
pub struct ParallelVpe {
    prep: Circuit,
    evolutions: Vec<Evolution>,
}

/// Largest register on which commutation is checked densely.
const DENSE_CHECK_QUBITS: usize = 10;

impl ParallelVpe {
    pub fn new(prep: Circuit, evolutions: Vec<Evolution>) -> Result<Self> {
        if evolutions.is_empty() {
            return Err(Error::Parameter(
                "parallel estimation needs at least one summand".into(),
            ));
        }
        let n = prep.num_qubits();
        if let Some(e) = evolutions.iter().find(|e| e.num_qubits() != n) {
            return Err(Error::Dimension(format!(
                "{}-qubit evolution with {n}-qubit preparation",
                e.num_qubits()
            )));
        }
        if n <= DENSE_CHECK_QUBITS {
            let gens: Vec<CMatrix> = evolutions.iter().map(Evolution::generator).collect();
            for a in 0..gens.len() {
                for b in a + 1..gens.len() {
                    if max_abs_diff(&(&gens[a] * &gens[b]), &(&gens[b] * &gens[a])) > 1e-10 {
                        return Err(Error::NonCommuting(format!("summands {a} and {b}")));
                    }
                }
            }
        }
        Ok(Self { prep, evolutions })
    }

    pub fn controls(&self) -> usize {
        self.evolutions.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.controls() + self.prep.num_qubits()
    }

    /// Controls on qubits `0..L`, system on the rest.
    pub fn circuit(&self, t: f64) -> Result<Circuit> {
        let l = self.controls();
        let total = self.num_qubits();
        let mut c = Circuit::new(total);
        c.push_moment((0..l).map(gate::h).collect())?;
        let prep = self.prep.shifted(total, l)?;
        c.append(&prep)?;
        for (s, e) in self.evolutions.iter().enumerate() {
            c.append(&e.controlled_circuit(t, s, total, l)?)?;
        }
        c.append(&prep.inverse())?;
        Ok(c.packed())
    }

    /// Per control, `sum_r rho[(a_s, r, 0), (b_s, r, 0)]` over the other controls `r`.
    fn verified_blocks(&self, rho: &DensityMatrix) -> Vec<[[Complex64; 2]; 2]> {
        let l = self.controls();
        let n = self.num_qubits();
        let sys_bits = n - l;
        (0..l)
            .map(|s| {
                let bit = 1usize << (l - 1 - s);
                let mut m = [[ZERO; 2]; 2];
                for r in (0..(1usize << l)).filter(|r| r & bit == 0) {
                    for (a, ma) in m.iter_mut().enumerate() {
                        for (b, mab) in ma.iter_mut().enumerate() {
                            let row = (r | if a == 1 { bit } else { 0 }) << sys_bits;
                            let col = (r | if b == 1 { bit } else { 0 }) << sys_bits;
                            *mab += rho.element(row, col);
                        }
                    }
                }
                m
            })
            .collect()
    }

    fn final_state(&self, t: f64, noise: &NoiseSetup) -> Result<DensityMatrix> {
        let plan = attach_noise(&self.circuit(t)?, &noise.model, &noise.mask)?;
        plan.run(&DensityMatrix::zero_state(self.num_qubits()))
    }

    /// Exact verified off-diagonal `g_s(t)` for every control.
    pub fn exact_values(&self, t: f64, noise: &NoiseSetup) -> Result<Vec<Complex64>> {
        let rho = self.final_state(t, noise)?;
        Ok(self
            .verified_blocks(&rho)
            .into_iter()
            .map(|m| m[1][0] * 2.0)
            .collect())
    }

    /// Sampled values, drawing each control's marginal outcomes separately.
    pub fn sampled_values<R: Rng + ?Sized>(
        &self,
        t: f64,
        shots: usize,
        rng: &mut R,
        noise: &NoiseSetup,
    ) -> Result<Vec<(Complex64, [QuadratureCounts; 2])>> {
        if shots == 0 {
            return Err(Error::Parameter("shot count must be at least 1".into()));
        }
        let rho = self.final_state(t, noise)?;
        let mut out = Vec::with_capacity(self.controls());
        for m in self.verified_blocks(&rho) {
            let mut counts = [QuadratureCounts::default(); 2];
            // `<X>` and `<Y>` restricted to the verified subspace.
            let population = (m[0][0].re + m[1][1].re).clamp(0.0, 1.0);
            let quadratures = [2.0 * m[1][0].re, 2.0 * m[1][0].im];
            for (k, q) in quadratures.into_iter().enumerate() {
                let p0 = ((population + q) / 2.0).clamp(0.0, 1.0);
                let p1 = ((population - q) / 2.0).clamp(0.0, 1.0);
                let v0 = sample_binomial(rng, shots as u64, p0);
                let rest = 1.0 - p0;
                let v1 = sample_binomial(
                    rng,
                    shots as u64 - v0,
                    if rest > 0.0 {
                        (p1 / rest).min(1.0)
                    } else {
                        0.0
                    },
                );
                counts[k] = QuadratureCounts {
                    shots: shots as u64,
                    verified_zeros: v0,
                    verified_ones: v1,
                    tally: v0 as i64 - v1 as i64,
                    ..QuadratureCounts::default()
                };
            }
            out.push((
                Complex64::new(counts[0].estimate(), counts[1].estimate()),
                counts,
            ));
        }
        Ok(out)
    }
}

fn sample_binomial<R: Rng + ?Sized>(rng: &mut R, n: u64, p: f64) -> u64 {
    use rand_distr::{Binomial, Distribution};
    if n == 0 || p <= 0.0 {
        0
    } else if p >= 1.0 {
        n
    } else {
        Binomial::new(n, p)
            .expect("probability in (0, 1)")
            .sample(rng)
    }
}

/// One phase-function record per summand. Sampled points use
/// `rng_for(seed, [t_index])`; only verified counters are recorded.
pub fn parallel_vpe(
    evolutions: &[Evolution],
    prep: &Circuit,
    t_grid: &[f64],
    noise: &NoiseSetup,
    mode: Mode,
    seed: u64,
) -> Result<Vec<PhaseFunctionRecord>> {
    let pv = ParallelVpe::new(prep.clone(), evolutions.to_vec())?;
    let l = pv.controls();
    let mut records: Vec<PhaseFunctionRecord> = (0..l)
        .map(|_| PhaseFunctionRecord {
            t_grid: t_grid.to_vec(),
            g: Vec::new(),
            mode,
            counts: Vec::new(),
        })
        .collect();
    for (i, &t) in t_grid.iter().enumerate() {
        match mode {
            Mode::Exact => {
                for (rec, g) in records.iter_mut().zip(pv.exact_values(t, noise)?) {
                    rec.g.push(g);
                }
            }
            Mode::Sampled { shots } => {
                let values = pv.sampled_values(t, shots, &mut rng_for(seed, &[i as u64]), noise)?;
                for (rec, (g, c)) in records.iter_mut().zip(values) {
                    rec.g.push(g);
                    rec.counts.push(c);
                }
            }
        }
    }
    Ok(records)
}

/// Frequencies and weights `(F, B)` seen by control `s`, merged within `1e-9`.
/// `generators` must commute pairwise; `state` is the prepared system state.
pub fn ghost_spectrum(
    generators: &[CMatrix],
    state: &PureState,
    s: usize,
) -> Result<Vec<(f64, f64)>> {
    let l = generators.len();
    if s >= l {
        return Err(Error::Parameter(format!("summand {s} out of {l}")));
    }
    let dim = state.amplitudes().len();
    if generators
        .iter()
        .any(|g| g.nrows() != dim || g.ncols() != dim)
    {
        return Err(Error::Dimension(
            "generator and state dimensions differ".into(),
        ));
    }
    for a in 0..l {
        for b in a + 1..l {
            if max_abs_diff(
                &(&generators[a] * &generators[b]),
                &(&generators[b] * &generators[a]),
            ) > 1e-10
            {
                return Err(Error::NonCommuting(format!("summands {a} and {b}")));
            }
        }
    }
    // A generic combination separates the joint eigenspaces.
    let mix = generators
        .iter()
        .enumerate()
        .fold(CMatrix::zeros(dim, dim), |acc, (k, g)| {
            acc + g * Complex64::new((k as f64 + 1.0).sqrt() + 0.1 * k as f64, 0.0)
        });
    let (_, vecs) = eigh(&mix);
    let psi = CMatrix::from_column_slice(dim, 1, state.amplitudes());
    let mut energies = vec![vec![0.0; dim]; l];
    let mut weights = vec![0.0; dim];
    for j in 0..dim {
        let v = vecs.column(j);
        weights[j] = (v.adjoint() * &psi)[(0, 0)].norm_sqr();
        for (k, g) in generators.iter().enumerate() {
            energies[k][j] = (v.adjoint() * g * v)[(0, 0)].re;
        }
    }
    let support: Vec<usize> = (0..dim).filter(|&j| weights[j] > 1e-14).collect();
    let scale = 1.0 / (1usize << l) as f64;
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for v in 0..(1usize << l) {
        for &j in &support {
            for &jp in &support {
                let f = energies[s][j]
                    + (0..l)
                        .filter(|&k| k != s && (v >> k) & 1 == 1)
                        .map(|k| energies[k][j] - energies[k][jp])
                        .sum::<f64>();
                pairs.push((f, weights[j] * weights[jp] * scale));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let freqs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let merged = merge_degenerate(&freqs, 1e-9);
    Ok(merged
        .into_iter()
        .map(|f| {
            (
                f,
                pairs
                    .iter()
                    .filter(|p| (p.0 - f).abs() <= 1e-9)
                    .map(|p| p.1)
                    .sum(),
            )
        })
        .collect())
}
