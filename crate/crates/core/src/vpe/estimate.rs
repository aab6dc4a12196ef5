//! Exact and shot-sampled evaluation of the phase function.
//!
//! Both modes share one density-matrix simulation per compiled phase. Exact
//! mode returns the expected tally; sampled mode draws the four outcome
//! classes (verified or not, target 0 or 1) from their exact probabilities.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::noise::{attach_noise, NoiseMask, NoiseModel, NoisyPlan};
use crate::rng::rng_for;
use crate::sim::DensityMatrix;

use super::circuits::VpeCircuit;
use super::{
    control_noise_compilation, CompilationFlags, MeasurementSetting, Mode, PhaseFunctionRecord,
    Protocol, Quadrature, QuadratureCounts,
};

/// Noise model and the qubits it acts on.
#[derive(Clone, Debug)]
pub struct NoiseSetup {
    pub model: NoiseModel,
    pub mask: NoiseMask,
}

impl NoiseSetup {
    pub fn new(model: NoiseModel, mask: NoiseMask) -> Self {
        Self { model, mask }
    }

    pub fn noiseless() -> Self {
        Self::everywhere(NoiseModel::noiseless())
    }

    pub fn everywhere(model: NoiseModel) -> Self {
        Self {
            model,
            mask: NoiseMask::All,
        }
    }
}

/// Readout probabilities of one setting, in terms of the recorded target bit.
#[derive(Clone, Copy, Debug)]
struct Outcome {
    /// Target reads 0 (resp. 1) and every other qubit reads 0.
    verified: [f64; 2],
    /// Target reads 0, regardless of the other qubits.
    target_zero: f64,
}

fn outcomes(
    vc: &VpeCircuit,
    t: f64,
    noise: &NoiseSetup,
    settings: &[MeasurementSetting],
) -> Result<Vec<Outcome>> {
    let n = vc.num_qubits();
    let measured: Vec<usize> = (0..n).collect();
    let v1 = 1usize << (n - 1);
    let mut cache: Vec<(f64, NoisyPlan, DensityMatrix)> = Vec::new();
    let mut out = Vec::with_capacity(settings.len());
    for s in settings {
        let idx = match cache.iter().position(|(p, ..)| *p == s.phase) {
            Some(i) => i,
            None => {
                let plan = attach_noise(
                    &vc.pre_final_circuit(t, s.phase)?,
                    &noise.model,
                    &noise.mask,
                )?;
                let rho = plan.run(&DensityMatrix::zero_state(n))?;
                cache.push((s.phase, plan, rho));
                cache.len() - 1
            }
        };
        let (_, plan, rho) = &cache[idx];
        let mut r = rho.clone();
        r.apply_gate_in_place(&VpeCircuit::final_gate(s.quadrature, s.flip, s.phase))?;
        plan.apply_idle_noise(&mut r)?;
        plan.apply_readout(&mut r, &measured)?;
        let target_zero = (0..v1).map(|i| r.element(i, i).re).sum();
        out.push(Outcome {
            verified: [r.element(0, 0).re, r.element(v1, v1).re],
            target_zero,
        });
    }
    Ok(out)
}

fn sign(flip: bool) -> f64 {
    if flip {
        -1.0
    } else {
        1.0
    }
}

/// Readout distribution of every measurement setting at one time.
#[derive(Clone, Debug)]
struct TimeOutcomes {
    correction: Complex64,
    flags: CompilationFlags,
    quadratures: [Vec<(MeasurementSetting, Outcome)>; 2],
}

fn time_outcomes(
    vc: &VpeCircuit,
    t: f64,
    noise: &NoiseSetup,
    flags: CompilationFlags,
) -> Result<TimeOutcomes> {
    let mut quadratures = [Vec::new(), Vec::new()];
    for (k, q) in [Quadrature::X, Quadrature::Y].into_iter().enumerate() {
        let settings = control_noise_compilation(flags, q, 0);
        let probs = outcomes(vc, t, noise, &settings)?;
        quadratures[k] = settings.into_iter().zip(probs).collect();
    }
    Ok(TimeOutcomes {
        correction: vc.phase_correction(t),
        flags,
        quadratures,
    })
}

impl TimeOutcomes {
    fn exact(&self) -> Complex64 {
        let [x, y] = [0, 1].map(|k| {
            let rows = &self.quadratures[k];
            rows.iter()
                .map(|(s, o)| sign(s.flip) * (o.verified[0] - o.verified[1]))
                .sum::<f64>()
                / rows.len() as f64
        });
        Complex64::new(x, y) * self.correction
    }

    fn sample<R: Rng + ?Sized>(
        &self,
        shots: usize,
        rng: &mut R,
    ) -> Result<(Complex64, [QuadratureCounts; 2])> {
        if shots == 0 {
            return Err(Error::Parameter("shot count must be at least 1".into()));
        }
        let mut counts = [QuadratureCounts::default(); 2];
        for (k, q) in [Quadrature::X, Quadrature::Y].into_iter().enumerate() {
            let split = control_noise_compilation(self.flags, q, shots);
            if split[0].shots == 0 {
                return Err(Error::Parameter(format!(
                    "{shots} shots cannot cover {} settings",
                    split.len()
                )));
            }
            for (s, (_, o)) in split.iter().zip(&self.quadratures[k]) {
                draw(rng, o, s.shots as u64, s.flip, &mut counts[k]);
            }
        }
        let g = Complex64::new(counts[0].estimate(), counts[1].estimate()) * self.correction;
        Ok((g, counts))
    }
}

/// Readout distributions over a time grid, computed once and sampled many times.
#[derive(Clone, Debug)]
pub struct OutcomeTable {
    t_grid: Vec<f64>,
    rows: Vec<TimeOutcomes>,
}

impl OutcomeTable {
    pub fn new(
        vc: &VpeCircuit,
        t_grid: &[f64],
        noise: &NoiseSetup,
        flags: CompilationFlags,
    ) -> Result<Self> {
        let rows = t_grid
            .iter()
            .map(|&t| time_outcomes(vc, t, noise, flags))
            .collect::<Result<_>>()?;
        Ok(Self {
            t_grid: t_grid.to_vec(),
            rows,
        })
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.t_grid
    }

    /// Infinite-shot record.
    pub fn exact(&self) -> PhaseFunctionRecord {
        PhaseFunctionRecord {
            t_grid: self.t_grid.clone(),
            g: self.rows.iter().map(TimeOutcomes::exact).collect(),
            mode: Mode::Exact,
            counts: Vec::new(),
        }
    }

    /// `shots` per quadrature and time; point `i` draws from `rng_for(seed, coords ++ [i])`.
    pub fn sample(&self, shots: usize, seed: u64, coords: &[u64]) -> Result<PhaseFunctionRecord> {
        let mut g = Vec::with_capacity(self.rows.len());
        let mut counts = Vec::with_capacity(self.rows.len());
        let mut path = coords.to_vec();
        path.push(0);
        for (i, row) in self.rows.iter().enumerate() {
            *path.last_mut().expect("non-empty") = i as u64;
            let (value, c) = row.sample(shots, &mut rng_for(seed, &path))?;
            g.push(value);
            counts.push(c);
        }
        Ok(PhaseFunctionRecord {
            t_grid: self.t_grid.clone(),
            g,
            mode: Mode::Sampled { shots },
            counts,
        })
    }
}

fn binomial<R: Rng + ?Sized>(rng: &mut R, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p)
        .expect("probability clamped to (0, 1)")
        .sample(rng)
}

/// Conditional probability `p / rest`, clamped to `[0, 1]`.
fn ratio(p: f64, rest: f64) -> f64 {
    if rest <= 0.0 {
        0.0
    } else {
        (p / rest).clamp(0.0, 1.0)
    }
}

fn draw<R: Rng + ?Sized>(
    rng: &mut R,
    o: &Outcome,
    shots: u64,
    flip: bool,
    counts: &mut QuadratureCounts,
) {
    let [pv0, pv1] = o.verified.map(|p| p.max(0.0));
    let pu0 = (o.target_zero - o.verified[0]).max(0.0);
    let v0 = binomial(rng, shots, pv0.min(1.0));
    let v1 = binomial(rng, shots - v0, ratio(pv1, 1.0 - pv0));
    let u0 = binomial(rng, shots - v0 - v1, ratio(pu0, 1.0 - pv0 - pv1));
    counts.shots += shots;
    counts.zeros += v0 + u0;
    counts.ones += shots - v0 - u0;
    counts.verified_zeros += v0;
    counts.verified_ones += v1;
    counts.tally += sign(flip) as i64 * (v0 as i64 - v1 as i64);
}

/// Expected value of the estimator at one time, i.e. the infinite-shot limit.
pub fn exact_phase_value(
    vc: &VpeCircuit,
    t: f64,
    noise: &NoiseSetup,
    flags: CompilationFlags,
) -> Result<Complex64> {
    Ok(time_outcomes(vc, t, noise, flags)?.exact())
}

/// One sampled estimate `g^x / M + i g^y / M` with `shots` per quadrature.
pub fn sampled_phase_value<R: Rng + ?Sized>(
    vc: &VpeCircuit,
    t: f64,
    shots: usize,
    rng: &mut R,
    noise: &NoiseSetup,
    flags: CompilationFlags,
) -> Result<(Complex64, [QuadratureCounts; 2])> {
    if shots == 0 {
        return Err(Error::Parameter("shot count must be at least 1".into()));
    }
    time_outcomes(vc, t, noise, flags)?.sample(shots, rng)
}

fn require(vc: &VpeCircuit, protocol: Protocol) -> Result<()> {
    if vc.protocol() != protocol {
        return Err(Error::Protocol(format!(
            "expected a {protocol:?} circuit, got {:?}",
            vc.protocol()
        )));
    }
    Ok(())
}

/// Sampled estimate from the single-control circuit family.
pub fn sampled_vpe_single_control<R: Rng + ?Sized>(
    vc: &VpeCircuit,
    t: f64,
    shots: usize,
    rng: &mut R,
    noise: &NoiseSetup,
    flags: CompilationFlags,
) -> Result<Complex64> {
    require(vc, Protocol::SingleControl)?;
    Ok(sampled_phase_value(vc, t, shots, rng, noise, flags)?.0)
}

/// Sampled estimate from the control-free family, reference phase removed.
pub fn sampled_vpe_control_free<R: Rng + ?Sized>(
    vc: &VpeCircuit,
    t: f64,
    shots: usize,
    rng: &mut R,
    noise: &NoiseSetup,
    flags: CompilationFlags,
) -> Result<Complex64> {
    require(vc, Protocol::ControlFree)?;
    Ok(sampled_phase_value(vc, t, shots, rng, noise, flags)?.0)
}

pub fn exact_phase_function(
    vc: &VpeCircuit,
    t_grid: &[f64],
    noise: &NoiseSetup,
    flags: CompilationFlags,
) -> Result<PhaseFunctionRecord> {
    phase_function(vc, t_grid, noise, flags, Mode::Exact, 0, &[])
}

/// Phase function over a grid. Sampled points draw from
/// `rng_for(seed, coords ++ [t_index])`, so each point is reproducible alone.
pub fn phase_function(
    vc: &VpeCircuit,
    t_grid: &[f64],
    noise: &NoiseSetup,
    flags: CompilationFlags,
    mode: Mode,
    seed: u64,
    coords: &[u64],
) -> Result<PhaseFunctionRecord> {
    let table = OutcomeTable::new(vc, t_grid, noise, flags)?;
    match mode {
        Mode::Exact => Ok(table.exact()),
        Mode::Sampled { shots } => table.sample(shots, seed, coords),
    }
}
