//! Property checks shared by the proptest targets and the acceptance runner.
//! Each check returns `Err` with a short diagnosis instead of panicking.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use vpe_core::ansatz::{conserves_number, fsw_network, givens_network, AnsatzKind, AnsatzSpec};
use vpe_core::experiments::{
    expectation_value, log_log_slope, median, prepared_state, preset, run_plan, ExperimentPlan,
    SweepResult,
};
use vpe_core::hamiltonian::{
    build_hopping_chain, build_next_nearest_chain, build_tfim, decompose_number_conserving,
    decompose_number_conserving_split, decompose_pauli, decompose_quadratic, load_low_rank_file,
    parse_hamiltonian, HamiltonianDecomposition, LoadedHamiltonian, Pauli, PauliString, PauliSum,
    Summand, SummandKind,
};
use vpe_core::linalg::{cis, embed, expm_i_hermitian, max_abs_diff, unitarity_error, CMatrix};
use vpe_core::noise::{
    amplitude_damping, amplitude_phase_damping, attach_noise, bit_flip, control_error_iswap,
    depolarizing, phase_damping, NoiseMask, NoiseModel,
};
use vpe_core::rng::rng_for;
use vpe_core::signal::{
    fit_known_phases, prony, renormalized_expectation, SpectralEstimate, SpectralMethod,
};
use vpe_core::sim::{
    apply_channel, apply_circuit, gate, partial_trace, Circuit, DensityMatrix, KrausChannel,
    PureState,
};
use vpe_core::vpe::{
    exact_phase_value, CompilationFlags, Mode, NoiseSetup, OutcomeTable, VpeCircuit,
};

pub type Check = Result<(), String>;

pub fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fail(e: impl std::fmt::Display) -> String {
    e.to_string()
}

pub fn fixture(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

// ---------------------------------------------------------------- builders

/// Random layered circuit of single-qubit rotations and entanglers.
pub fn random_circuit(n: usize, layers: usize, rng: &mut ChaCha8Rng) -> Circuit {
    let mut c = Circuit::new(n);
    for layer in 0..layers {
        for q in 0..n {
            c.push(gate::h(q)).unwrap();
            c.push(gate::z_rotation(q, rng.random_range(-PI..PI)))
                .unwrap();
            c.push(gate::phase(q, rng.random_range(-PI..PI))).unwrap();
        }
        for a in (layer % 2..n.saturating_sub(1)).step_by(2) {
            let g = match rng.random_range(0..3) {
                0 => gate::cnot(a, a + 1),
                1 => gate::xx_rotation(a, a + 1, rng.random_range(-PI..PI)),
                _ => gate::iswap_power(a, a + 1, rng.random_range(-1.0..1.0)),
            };
            c.push(g).unwrap();
        }
    }
    c.packed()
}

pub fn random_pure(n: usize, rng: &mut ChaCha8Rng) -> PureState {
    let mut s = PureState::zero(n);
    s.apply_circuit(&random_circuit(n, 3, rng)).unwrap();
    s
}

/// Mixture of a few random pure states.
pub fn random_mixed(n: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let weights: Vec<f64> = (0..3).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let dim = 1 << n;
    let mut m = CMatrix::zeros(dim, dim);
    for w in weights {
        m += DensityMatrix::from_pure(&random_pure(n, rng)).matrix()
            * Complex64::new(w / total, 0.0);
    }
    DensityMatrix::from_matrix(m, true).unwrap()
}

pub fn random_pauli_string(n: usize, rng: &mut ChaCha8Rng) -> PauliString {
    loop {
        let letters: Vec<Pauli> = (0..n)
            .map(|_| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.random_range(0..4)])
            .collect();
        let s = PauliString::new(
            letters,
            rng.random_range(0.2..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 },
        );
        if !s.is_identity() {
            return s;
        }
    }
}

/// Systems on which decompositions are checked.
pub fn test_decompositions() -> Vec<(String, PauliSum, HamiltonianDecomposition)> {
    let mut out = Vec::new();
    let chain = build_hopping_chain(4, 1.0).unwrap();
    let pauli = LoadedHamiltonian::Fermion(chain.clone()).to_pauli();
    out.push((
        "chain/quadratic".into(),
        pauli.clone(),
        decompose_quadratic(&chain).unwrap(),
    ));
    out.push((
        "chain/number-conserving".into(),
        pauli.clone(),
        decompose_number_conserving(&chain).unwrap(),
    ));
    out.push((
        "chain/split".into(),
        pauli,
        decompose_number_conserving_split(&chain).unwrap(),
    ));
    let nnn = build_next_nearest_chain(4, 0.5).unwrap();
    out.push((
        "nnn/number-conserving".into(),
        LoadedHamiltonian::Fermion(nnn.clone()).to_pauli(),
        decompose_number_conserving(&nnn).unwrap(),
    ));
    let tfim = build_tfim(4, 1.0, 1.0).unwrap();
    out.push((
        "tfim/pauli".into(),
        tfim.clone(),
        decompose_pauli(&tfim).unwrap(),
    ));
    for bond in ["0.7414", "2.0"] {
        let text = std::fs::read_to_string(fixture(&format!("h2_{bond}.ham"))).unwrap();
        let LoadedHamiltonian::Fermion(f) = parse_hamiltonian(&text).unwrap() else {
            panic!("H2 fixture is fermionic");
        };
        let pauli = LoadedHamiltonian::Fermion(f.clone()).to_pauli();
        out.push((
            format!("h2 {bond}/number-conserving"),
            pauli.clone(),
            decompose_number_conserving(&f).unwrap(),
        ));
        out.push((
            format!("h2 {bond}/split"),
            pauli.clone(),
            decompose_number_conserving_split(&f).unwrap(),
        ));
        let factors = load_low_rank_file(fixture(&format!("h2_{bond}_lowrank.json"))).unwrap();
        out.push((
            format!("h2 {bond}/low-rank"),
            pauli,
            factors.decomposition().unwrap(),
        ));
    }
    out
}

// ---------------------------------------------------------------- simulator

pub fn unitarity_preserves_purity(seed: u64) -> Check {
    let mut rng = rng_for(seed, &[1]);
    let rho = random_mixed(3, &mut rng);
    let out = apply_circuit(&rho, &random_circuit(3, 4, &mut rng), None).map_err(fail)?;
    let (a, b) = (rho.purity(), out.purity());
    ensure((a - b).abs() < 1e-10, || format!("purity {a} -> {b}"))
}

pub fn unital_channels_contract(seed: u64, p: f64) -> Check {
    let mut rng = rng_for(seed, &[2]);
    let rho = random_mixed(2, &mut rng);
    let channels = [depolarizing(p), phase_damping(p), bit_flip(p)];
    for ch in channels {
        let ch = ch.map_err(fail)?;
        for q in 0..2 {
            let out = apply_channel(&rho, &ch, &[q]).map_err(fail)?;
            ensure(out.purity() <= rho.purity() + 1e-12, || {
                format!("purity grew {} -> {}", rho.purity(), out.purity())
            })?;
        }
    }
    Ok(())
}

pub fn density_matches_statevector(seed: u64) -> Check {
    let mut rng = rng_for(seed, &[3]);
    let n = rng.random_range(1..=4);
    let c = random_circuit(n, 3, &mut rng);
    let input = random_pure(n, &mut rng);
    let mut psi = input.clone();
    psi.apply_circuit(&c).map_err(fail)?;
    let rho = apply_circuit(&DensityMatrix::from_pure(&input), &c, None).map_err(fail)?;
    let err = max_abs_diff(rho.matrix(), DensityMatrix::from_pure(&psi).matrix());
    ensure(err < 1e-10, || format!("{n} qubits: deviation {err:e}"))
}

pub fn evolution_is_linear(seed: u64, alpha: f64) -> Check {
    let mut rng = rng_for(seed, &[4]);
    let (r1, r2) = (random_mixed(2, &mut rng), random_mixed(2, &mut rng));
    let c = random_circuit(2, 2, &mut rng);
    let model =
        NoiseModel::uniform(amplitude_phase_damping(0.05, 0.03).map_err(fail)?).map_err(fail)?;
    let beta = 1.0 - alpha;
    let mixed = r1.linear_combination(alpha, &r2, beta).map_err(fail)?;
    let lhs = apply_circuit(&mixed, &c, Some(&model)).map_err(fail)?;
    let a = apply_circuit(&r1, &c, Some(&model)).map_err(fail)?;
    let b = apply_circuit(&r2, &c, Some(&model)).map_err(fail)?;
    let rhs = a.linear_combination(alpha, &b, beta).map_err(fail)?;
    let err = max_abs_diff(lhs.matrix(), rhs.matrix());
    ensure(err < 1e-12, || format!("deviation {err:e}"))
}

// ---------------------------------------------------------------- noise

fn completeness_error(ch: &KrausChannel) -> f64 {
    let dim = ch.operators()[0].nrows();
    let sum = ch
        .operators()
        .iter()
        .fold(CMatrix::zeros(dim, dim), |acc, k| acc + k.adjoint() * k);
    max_abs_diff(&sum, &CMatrix::identity(dim, dim))
}

pub fn channels_complete(p: f64) -> Check {
    let channels = [
        ("depolarizing", depolarizing(p)),
        ("amplitude damping", amplitude_damping(p)),
        ("phase damping", phase_damping(p)),
        (
            "amplitude+phase damping",
            amplitude_phase_damping(p, p / 2.0),
        ),
        ("bit flip", bit_flip(p)),
    ];
    for (name, ch) in channels {
        let ch = ch.map_err(fail)?;
        let err = completeness_error(&ch);
        ensure(err < 1e-10, || {
            format!("{name}({p}): completeness off by {err:e}")
        })?;
        let composed = ch.then(&ch).map_err(fail)?;
        ensure(completeness_error(&composed) < 1e-10, || {
            format!("{name}({p}) composed twice")
        })?;
    }
    Ok(())
}

pub fn depolarizing_fixes_identity_and_damping_fixes_ground(p: f64) -> Check {
    let mixed = DensityMatrix::maximally_mixed(1);
    let out = apply_channel(&mixed, &depolarizing(p).map_err(fail)?, &[0]).map_err(fail)?;
    ensure(max_abs_diff(out.matrix(), mixed.matrix()) < 1e-12, || {
        "depolarizing moved I/2".into()
    })?;
    let ground = DensityMatrix::zero_state(1);
    let out = apply_channel(&ground, &amplitude_damping(p).map_err(fail)?, &[0]).map_err(fail)?;
    ensure(max_abs_diff(out.matrix(), ground.matrix()) < 1e-12, || {
        "amplitude damping moved |0><0|".into()
    })
}

pub fn control_error_gate_unitary(x: f64) -> Check {
    let g = control_error_iswap(x).map_err(fail)?;
    let err = unitarity_error(g.matrix());
    ensure(err < 1e-12, || format!("x={x}: unitarity error {err:e}"))
}

// ---------------------------------------------------------------- hamiltonian

pub fn decompositions_complete() -> Check {
    for (name, op, dec) in test_decompositions() {
        let err = max_abs_diff(&dec.matrix(), &op.matrix());
        ensure(err < 1e-10, || {
            format!("{name}: sum of summands off by {err:e}")
        })?;
    }
    Ok(())
}

/// Compiled circuit (with its dropped global phase restored) against `expm`,
/// and the controlled circuit against the dense controlled exponential.
pub fn summand_fast_forward(s: &Summand, t: f64) -> Check {
    let n = s.num_qubits();
    let want = expm_i_hermitian(&s.operator.matrix(), t);
    let got = s.evolution.circuit(t).unitary() * cis(s.evolution.global_phase_rate() * t);
    let err = max_abs_diff(&got, &want);
    ensure(err < 1e-8, || {
        format!("{} at t={t}: uncontrolled off by {err:e}", s.label)
    })?;
    let dim = 1usize << n;
    let mut controlled = CMatrix::identity(2 * dim, 2 * dim);
    controlled.view_mut((dim, dim), (dim, dim)).copy_from(&want);
    let got = s
        .evolution
        .controlled_circuit(t, 0, n + 1, 1)
        .map_err(fail)?
        .unitary();
    let err = max_abs_diff(&got, &controlled);
    ensure(err < 1e-8, || {
        format!("{} at t={t}: controlled off by {err:e}", s.label)
    })
}

pub fn fast_forward_matches_expm() -> Check {
    for (name, _, dec) in test_decompositions() {
        for s in &dec.summands {
            for t in [0.1, 0.5, 1.0] {
                summand_fast_forward(s, t).map_err(|e| format!("{name}: {e}"))?;
            }
        }
    }
    Ok(())
}

pub fn number_conserving_summands_commute() -> Check {
    for (name, _, dec) in test_decompositions() {
        for s in dec
            .summands
            .iter()
            .filter(|s| s.kind == SummandKind::CommutingGroup)
        {
            let terms = s.operator.terms();
            for (i, a) in terms.iter().enumerate() {
                for b in &terms[i + 1..] {
                    ensure(a.commutes_with(b), || {
                        format!(
                            "{name}/{}: {} and {} anticommute",
                            s.label,
                            a.label(),
                            b.label()
                        )
                    })?;
                }
            }
        }
    }
    Ok(())
}

pub fn pauli_summand_eigenvalues(string: &PauliString) -> Check {
    let s = Summand::pauli_term(string).map_err(fail)?;
    let c = string.coefficient().abs();
    let eigs = s.distinct_eigenvalues(1e-9).ok_or("no spectrum recorded")?;
    ensure(
        eigs.len() == 2 && (eigs[0] + c).abs() < 1e-12 && (eigs[1] - c).abs() < 1e-12,
        || format!("{}: eigenvalues {eigs:?}, expected +-{c}", string.label()),
    )
}

// ---------------------------------------------------------------- ansatz

fn total_z(n: usize) -> CMatrix {
    (0..n).fold(CMatrix::zeros(1 << n, 1 << n), |acc, q| {
        acc + embed(n, &[q], &gate::pauli_z_matrix())
    })
}

pub fn ansatz_conserves_number(seed: u64) -> Check {
    let mut rng = rng_for(seed, &[5]);
    let z = total_z(4);
    let k = 6;
    let g = givens_network(
        4,
        &(0..k)
            .map(|_| rng.random_range(-PI..PI))
            .collect::<Vec<_>>(),
    )
    .map_err(fail)?;
    let f = fsw_network(
        &(0..12)
            .map(|_| rng.random_range(-PI..PI))
            .collect::<Vec<_>>(),
        4,
        4,
    )
    .map_err(fail)?;
    for (name, c) in [("givens", g), ("fsw", f)] {
        let u = c.unitary();
        let err = max_abs_diff(&(&u * &z), &(&z * &u));
        ensure(err < 1e-10 && conserves_number(&c), || {
            format!("{name}: [U, Z_total] = {err:e}")
        })?;
    }
    Ok(())
}

pub fn givens_depth_is_n(n: usize, seed: u64) -> Check {
    let mut rng = rng_for(seed, &[6]);
    let k = n * (n - 1) / 2;
    let c = givens_network(
        n,
        &(0..k)
            .map(|_| rng.random_range(-PI..PI))
            .collect::<Vec<_>>(),
    )
    .map_err(fail)?;
    let want = if n == 2 { 1 } else { n };
    ensure(c.depth() == want, || {
        format!("{n} modes: depth {}", c.depth())
    })
}

pub fn inverse_round_trip(seed: u64) -> Check {
    let mut rng = rng_for(seed, &[7]);
    for kind in [AnsatzKind::Givens, AnsatzKind::Vha, AnsatzKind::Fsw] {
        let spec = AnsatzSpec::random(kind, 4, 2, 2, &mut rng).map_err(fail)?;
        let c = spec.prep_circuit().map_err(fail)?;
        let round = c.clone().then(&c.inverse()).map_err(fail)?;
        let err = max_abs_diff(&round.unitary(), &CMatrix::identity(16, 16));
        ensure(err < 1e-10, || {
            format!("{kind:?}: U U^dag off identity by {err:e}")
        })?;
    }
    Ok(())
}

// ---------------------------------------------------------------- vpe

/// Random 4-qubit preparation and a random commuting Pauli evolution.
fn random_vpe(seed: u64) -> (Circuit, vpe_core::hamiltonian::Evolution, CMatrix) {
    let mut rng = rng_for(seed, &[8]);
    let prep = random_circuit(4, 2, &mut rng);
    let s = random_pauli_string(4, &mut rng);
    let ev = vpe_core::hamiltonian::Evolution::from_pauli_strings(4, [&s]).unwrap();
    (prep, ev, s.matrix())
}

/// Noiseless single-control state before the final pre-rotation.
fn pre_final_state(vc: &VpeCircuit, t: f64) -> Result<DensityMatrix, String> {
    let c = vc.pre_final_circuit(t, 0.0).map_err(fail)?;
    apply_circuit(&DensityMatrix::zero_state(c.num_qubits()), &c, None).map_err(fail)
}

/// Verified off-diagonal equals the plain control off-diagonal, and both equal
/// `<psi| e^{iHt} |psi>` from dense algebra.
pub fn verification_identity(seed: u64, t: f64) -> Check {
    let (prep, ev, h) = random_vpe(seed);
    let vc = VpeCircuit::single_control(prep.clone(), ev).map_err(fail)?;
    let rho = pre_final_state(&vc, t)?;
    let control = partial_trace(&rho, &[0]).map_err(fail)?;
    let unverified = control.element(1, 0) * 2.0;
    let verified = exact_phase_value(
        &vc,
        t,
        &NoiseSetup::noiseless(),
        CompilationFlags::default(),
    )
    .map_err(fail)?;
    let psi = prepared_state(&prep);
    let dense = (psi.adjoint() * expm_i_hermitian(&h, t) * &psi)[(0, 0)];
    let (e1, e2) = ((verified - unverified).norm(), (verified - dense).norm());
    ensure(e1 < 1e-10 && e2 < 1e-10, || {
        format!("verified vs unverified {e1:e}, vs dense {e2:e}")
    })
}

/// Conditioned on a failed verification the control is exactly `|1>`.
pub fn failure_projects_control(seed: u64, t: f64) -> Check {
    let (prep, ev, _) = random_vpe(seed);
    let vc = VpeCircuit::single_control(prep, ev).map_err(fail)?;
    let rho = pre_final_state(&vc, t)?;
    let dim = rho.matrix().nrows();
    let half = dim / 2;
    let mut block = [[Complex64::new(0.0, 0.0); 2]; 2];
    for r in 1..half {
        for (a, row) in block.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                *v += rho.element(a * half + r, b * half + r);
            }
        }
    }
    let weight = block[0][0].re + block[1][1].re;
    if weight < 1e-9 {
        return Ok(());
    }
    let err = block[0][0]
        .norm()
        .max(block[0][1].norm())
        .max(block[1][0].norm())
        / weight;
    ensure(err < 1e-10, || {
        format!("failing ensemble has {err:e} outside |1><1|")
    })
}

/// Under uniform depolarizing a fast-forwarded phase function shrinks by a
/// time-independent factor.
pub fn constant_damping(rate: f64) -> Check {
    let spec = AnsatzSpec::new(
        AnsatzKind::Givens,
        4,
        0,
        2,
        vec![0.4, -0.9, 1.3, 0.2, -0.5, 0.8],
    )
    .map_err(fail)?;
    let chain = build_hopping_chain(4, 1.0).map_err(fail)?;
    let dec = decompose_quadratic(&chain).map_err(fail)?;
    let s = &dec.summands[0];
    let vc = VpeCircuit::single_control(spec.prep_circuit().map_err(fail)?, s.evolution.clone())
        .map_err(fail)?;
    let noise = NoiseSetup::everywhere(
        NoiseModel::uniform(depolarizing(rate).map_err(fail)?).map_err(fail)?,
    );
    let step = PI / (4.0 * s.spectral_radius());
    let mut ratios = Vec::new();
    for k in 0..8 {
        let t = k as f64 * step;
        let clean = exact_phase_value(
            &vc,
            t,
            &NoiseSetup::noiseless(),
            CompilationFlags::default(),
        )
        .map_err(fail)?;
        let noisy = exact_phase_value(&vc, t, &noise, CompilationFlags::default()).map_err(fail)?;
        if clean.norm() > 0.05 {
            ratios.push(noisy / clean);
        }
    }
    let first = ratios[0];
    let worst = ratios
        .iter()
        .map(|r| (r / first - 1.0).norm())
        .fold(0.0, f64::max);
    ensure(worst < 0.02, || {
        format!("damping factor varies by {worst:.3e} over time")
    })
}

/// With one noisy controlled step per unit of time, `|g(t)|` decays exponentially.
pub fn padded_depth_decays_exponentially(rate: f64) -> Check {
    let z = PauliString::new(vec![Pauli::Z, Pauli::I], 1.0);
    let ev = vpe_core::hamiltonian::Evolution::from_pauli_strings(2, [&z]).map_err(fail)?;
    let model = NoiseModel::uniform(depolarizing(rate).map_err(fail)?).map_err(fail)?;
    let dt = 0.3;
    let mut points = Vec::new();
    for steps in 1..=12 {
        let mut c = Circuit::new(3);
        c.push(gate::h(0)).map_err(fail)?;
        for _ in 0..steps {
            c.append(&ev.controlled_circuit(dt, 0, 3, 1).map_err(fail)?)
                .map_err(fail)?;
        }
        let plan = attach_noise(&c, &model, &NoiseMask::All).map_err(fail)?;
        let rho = plan.run(&DensityMatrix::zero_state(3)).map_err(fail)?;
        let g = rho.element(4, 0) * 2.0;
        points.push((steps as f64, g.norm().ln()));
    }
    let n = points.len() as f64;
    let (mx, my) = (
        points.iter().map(|p| p.0).sum::<f64>() / n,
        points.iter().map(|p| p.1).sum::<f64>() / n,
    );
    let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / points.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let worst = points
        .iter()
        .map(|p| ((p.1 - (my + slope * (p.0 - mx))).exp() - 1.0).abs())
        .fold(0.0, f64::max);
    ensure(slope < 0.0 && worst < 0.02, || {
        format!("decay slope {slope:e}, worst residual {worst:.3e}")
    })
}

/// `Z` evolution of a system in `|0...0>`, so `g(t) = e^{it}`. A fully random readout on
/// `randomized` system qubits sets the verification probability to `2^-randomized`.
/// Returns the outcome table, `p_ne` and the noiseless `g^x`.
pub fn variance_setup(t: f64, randomized: usize) -> Result<(OutcomeTable, f64, f64), String> {
    let n = randomized.max(1);
    let mut letters = vec![Pauli::I; n];
    letters[0] = Pauli::Z;
    let ev =
        vpe_core::hamiltonian::Evolution::from_pauli_strings(n, [&PauliString::new(letters, 1.0)])
            .map_err(fail)?;
    let vc = VpeCircuit::single_control(Circuit::new(n), ev).map_err(fail)?;
    let noise = if randomized == 0 {
        NoiseSetup::noiseless()
    } else {
        let model = NoiseModel::noiseless()
            .with_readout(bit_flip(0.5).map_err(fail)?)
            .map_err(fail)?;
        NoiseSetup::new(model, NoiseMask::SystemOnly { control: vec![0] })
    };
    let table = OutcomeTable::new(&vc, &[t], &noise, CompilationFlags::default()).map_err(fail)?;
    let p_ne = 0.5f64.powi(randomized as i32);
    let gx = table.exact().g[0].re / p_ne;
    Ok((table, p_ne, gx))
}

/// Empirical `Var[Re g]` against `p/M - p^2 g_x^2 / M`, as a relative error.
pub fn sampling_variance(
    p_randomized: usize,
    shots: usize,
    trials: usize,
    seed: u64,
) -> Result<(f64, f64, f64), String> {
    let (table, p_ne, gx) = variance_setup(0.7, p_randomized)?;
    let values: Vec<f64> = (0..trials)
        .map(|k| table.sample(shots, seed, &[k as u64]).map(|r| r.g[0].re))
        .collect::<Result<_, _>>()
        .map_err(fail)?;
    let mean = values.iter().sum::<f64>() / trials as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials as f64 - 1.0);
    let predicted = p_ne / shots as f64 - p_ne * p_ne * gx * gx / shots as f64;
    Ok((var, predicted, p_ne))
}

/// Shots needed for a fixed spread of the renormalized estimate grow as `1/p_ne`.
pub fn shot_scaling(seed: u64) -> Check {
    let shots = 400;
    let trials = 3000;
    let spread = |randomized: usize| -> Result<(f64, f64), String> {
        let (table, p_ne, _) = variance_setup(PI / 2.0, randomized)?;
        let values: Vec<f64> = (0..trials)
            .map(|k| {
                table
                    .sample(shots, seed, &[randomized as u64, k as u64])
                    .map(|r| {
                        let c = r.counts[0][0];
                        let kept = (c.verified_zeros + c.verified_ones).max(1) as f64;
                        c.tally as f64 / kept
                    })
            })
            .collect::<Result<_, _>>()
            .map_err(fail)?;
        let mean = values.iter().sum::<f64>() / trials as f64;
        Ok((
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials as f64 - 1.0),
            p_ne,
        ))
    };
    let (base, _) = spread(0)?;
    for randomized in [1, 2] {
        let (var, p_ne) = spread(randomized)?;
        // Var ~ 1/M, so the shots for equal spread scale with the variance ratio.
        let needed = var / base;
        let ratio = needed * p_ne;
        ensure((1.0 / 1.5..=1.5).contains(&ratio), || {
            format!("p_ne={p_ne}: shot factor {needed:.3} vs {:.3}", 1.0 / p_ne)
        })?;
    }
    Ok(())
}

// ---------------------------------------------------------------- signal

pub fn renormalization_scale_invariant(eigs: &[f64], amps: &[f64], c: f64) -> Check {
    let est = |a: Vec<f64>| SpectralEstimate {
        eigenvalues: eigs.to_vec(),
        amplitudes: a,
        method: SpectralMethod::KnownPhaseFit,
        residual: 0.0,
        reduced_order: false,
    };
    let base = renormalized_expectation(&est(amps.to_vec())).map_err(fail)?;
    let scaled =
        renormalized_expectation(&est(amps.iter().map(|a| a * c).collect())).map_err(fail)?;
    ensure((base - scaled).abs() <= 1e-12 * base.abs().max(1.0), || {
        format!("c={c}: {base} vs {scaled}")
    })
}

/// Synthesize `sum A_j e^{iE_j t}` and recover it with Prony.
pub fn prony_round_trip(eigs: &[f64], amps: &[f64]) -> Check {
    let k = 2 * eigs.len() + 2;
    let t: Vec<f64> = (0..k).map(|i| i as f64 * 0.5).collect();
    let g: Vec<Complex64> = t
        .iter()
        .map(|&t| eigs.iter().zip(amps).map(|(e, a)| cis(e * t) * *a).sum())
        .collect();
    let est = prony(&t, &g, eigs.len()).map_err(fail)?;
    let mut want: Vec<(f64, f64)> = eigs.iter().copied().zip(amps.iter().copied()).collect();
    want.sort_by(|a, b| a.0.total_cmp(&b.0));
    ensure(est.eigenvalues.len() == want.len(), || {
        format!(
            "recovered {} modes of {}",
            est.eigenvalues.len(),
            want.len()
        )
    })?;
    for ((e, a), (we, wa)) in est.eigenvalues.iter().zip(&est.amplitudes).zip(&want) {
        ensure((e - we).abs() < 1e-6 && (a - wa).abs() < 1e-6, || {
            format!("mode ({we}, {wa}) came back as ({e}, {a})")
        })?;
    }
    Ok(())
}

/// Exact records of Pauli summands give the same energy under both fits.
pub fn known_phase_matches_prony(seed: u64) -> Check {
    let mut rng = rng_for(seed, &[9]);
    let spec = AnsatzSpec::random(AnsatzKind::Vha, 4, 2, 0, &mut rng).map_err(fail)?;
    let prep = spec.prep_circuit().map_err(fail)?;
    let s = random_pauli_string(4, &mut rng);
    let summand = Summand::pauli_term(&s).map_err(fail)?;
    let vc = VpeCircuit::single_control(prep, summand.evolution.clone()).map_err(fail)?;
    let c = s.coefficient().abs();
    let t: Vec<f64> = (0..4).map(|k| k as f64 * PI / (4.0 * c)).collect();
    let r = OutcomeTable::new(
        &vc,
        &t,
        &NoiseSetup::noiseless(),
        CompilationFlags::default(),
    )
    .map_err(fail)?
    .exact();
    let known = renormalized_expectation(&fit_known_phases(&t, &r.g, &[-c, c]).map_err(fail)?)
        .map_err(fail)?;
    let pr = prony(&t, &r.g, 2).and_then(|e| renormalized_expectation(&e));
    let truth = expectation_value(
        &prepared_state(&spec.prep_circuit().map_err(fail)?),
        &s.matrix(),
    );
    ensure((known - truth).abs() < 1e-8, || {
        format!("known-phase {known} vs truth {truth}")
    })?;
    match pr {
        Ok(p) => ensure((p - known).abs() < 1e-6, || {
            format!("prony {p} vs known-phase {known}")
        }),
        // An eigenstate leaves a single mode, which Prony returns with reduced order.
        Err(e) => Err(format!("prony failed: {e}")),
    }
}

/// Median known-phase error over `trials` sampled records at each `M`.
pub fn convergence_curve(
    shots: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>, String> {
    let z = PauliString::new(vec![Pauli::Z, Pauli::Z, Pauli::I], 1.0);
    let ev = vpe_core::hamiltonian::Evolution::from_pauli_strings(3, [&z]).map_err(fail)?;
    let mut rng = rng_for(seed, &[10]);
    let prep = random_circuit(3, 2, &mut rng);
    let truth = expectation_value(&prepared_state(&prep), &z.matrix());
    let vc = VpeCircuit::single_control(prep, ev).map_err(fail)?;
    let t: Vec<f64> = (0..4).map(|k| k as f64 * PI / 4.0).collect();
    let table = OutcomeTable::new(
        &vc,
        &t,
        &NoiseSetup::noiseless(),
        CompilationFlags::default(),
    )
    .map_err(fail)?;
    shots
        .iter()
        .map(|&m| {
            let mut errs: Vec<f64> = (0..trials)
                .map(|k| {
                    let r = table.sample(m, seed, &[m as u64, k as u64]).map_err(fail)?;
                    let est = fit_known_phases(&t, &r.g, &[-1.0, 1.0])
                        .and_then(|e| renormalized_expectation(&e));
                    Ok(est.map_or(2.0, |v| (v - truth).abs()))
                })
                .collect::<Result<_, String>>()?;
            Ok((m as f64, median(&mut errs)))
        })
        .collect()
}

pub fn convergence_slope(seed: u64) -> Check {
    let curve = convergence_curve(&[100, 1_000, 10_000, 100_000], 200, seed)?;
    let slope = log_log_slope(&curve).ok_or("no slope")?;
    ensure((slope + 0.5).abs() <= 0.1, || format!("slope {slope:.3}"))
}

// ---------------------------------------------------------------- experiments

pub fn small_plan(name: &str, replicates: usize, rates: &[f64]) -> ExperimentPlan {
    let mut p = preset(name).expect("preset exists");
    p.replicates = replicates;
    p.noise.rates = rates.to_vec();
    p
}

pub fn records_bitwise_equal(a: &SweepResult, b: &SweepResult) -> bool {
    a.records.len() == b.records.len()
        && a.records.iter().zip(&b.records).all(|(x, y)| {
            x.rate.to_bits() == y.rate.to_bits()
                && x.replicate == y.replicate
                && x.estimator == y.estimator
                && x.abs_error.to_bits() == y.abs_error.to_bits()
        })
}

pub fn determinism(name: &str, seed: u64) -> Check {
    let mut plan = small_plan(name, 2, &[1e-3, 1e-2]);
    plan.seed = seed;
    let a = run_plan(&plan).map_err(fail)?;
    let b = run_plan(&plan).map_err(fail)?;
    ensure(records_bitwise_equal(a.sweep(), b.sweep()), || {
        format!("{name}: reruns differ")
    })
}

/// The simulator's expectation on the prepared state equals the oracle's.
pub fn truth_independent_of_simulator(seed: u64) -> Check {
    let mut rng = rng_for(seed, &[11]);
    let spec = AnsatzSpec::random(AnsatzKind::Vha, 4, 2, 0, &mut rng).map_err(fail)?;
    let prep = spec.prep_circuit().map_err(fail)?;
    let h = build_tfim(4, 1.0, 1.0).map_err(fail)?;
    let oracle = expectation_value(&prepared_state(&prep), &h.matrix());
    let rho = apply_circuit(&DensityMatrix::zero_state(4), &prep, None).map_err(fail)?;
    let sim = vpe_core::sim::expectation(&rho, &h).map_err(fail)?;
    ensure((oracle - sim).abs() < 1e-10, || {
        format!("oracle {oracle} vs simulator {sim}")
    })
}

/// Sampled records are a pure function of seed and coordinates.
pub fn sampled_mode_is_seeded(seed: u64) -> Check {
    let (table, _, _) = variance_setup(0.4, 0)?;
    let a = table.sample(100, seed, &[1]).map_err(fail)?;
    let b = table.sample(100, seed, &[1]).map_err(fail)?;
    ensure(a.g == b.g && a.mode == Mode::Sampled { shots: 100 }, || {
        "sampling not reproducible".into()
    })
}
