//! Trotter evolution checked against exact propagation, closed forms and
//! conservation laws.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;
use proptest::prelude::*;
use tcsim::analytic::{
    dispersive_state, exact_evolve, rwa_resonant_state, transfer_time_dispersive,
    transfer_time_resonant, trotter_error_bound, ExactPropagator, SingleExcitationAmplitudes,
};
use tcsim::simulator::{
    apply_kraus, cavity_occupations, evolve, evolve_damped, evolve_with, fidelity, init_state,
    partial_trace, populations_and_phase, propagate, total_energy, transfer_target, trotter_step,
    DensityMatrix, EvolveOptions, Frame, KrausChannel, StateSpec, StateVector, TargetConvention,
    TrotterConfig, TrotterStepper,
};
use tcsim::{
    build_fourlevel_qubitized, build_full_qubitized, build_rwa_qubitized, split_trotter, Layout,
    SystemParams, C64,
};

const ONE: C64 = C64::new(1.0, 0.0);
const ZERO: C64 = C64::new(0.0, 0.0);

fn polarized(layout: &Layout) -> StateVector {
    init_state(&StateSpec::Polarized, layout).unwrap()
}

fn target(layout: &Layout) -> StateVector {
    transfer_target(&StateSpec::Polarized, layout, TargetConvention::Corrected).unwrap()
}

fn dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `e^{-iHt}` by scaled Taylor series and repeated squaring.
fn taylor_expm(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let norm: f64 = h.iter().map(|z| z.norm()).sum::<f64>() * t.abs();
    let squarings = (norm.max(1.0).log2().ceil() as u32) + 4;
    let a = h * C64::new(0.0, -t / 2f64.powi(squarings as i32));
    let d = h.nrows();
    let mut term = DMatrix::<C64>::identity(d, d);
    let mut sum = term.clone();
    for k in 1..30 {
        term = &term * &a / C64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

#[test]
fn resonant_full_transfer_after_223_steps() {
    let h = build_full_qubitized(&SystemParams::default()).unwrap();
    let l = h.layout.clone();
    let stepper = TrotterStepper::new(&h, 0.01).unwrap();
    let psi = propagate(&polarized(&l), &stepper, 223).unwrap();
    assert!(fidelity(&psi, &target(&l)).unwrap() >= 0.999);
}

#[test]
fn zero_step_is_identity() {
    let p = SystemParams::default().with_detunings(1.0, -2.0);
    let h = build_rwa_qubitized(&p).unwrap();
    let split = split_trotter(&h).unwrap();
    let r = FRAC_1_SQRT_2;
    let s = init_state(
        &StateSpec::superposition(C64::new(r, 0.0), C64::new(0.0, r)),
        &h.layout,
    )
    .unwrap();
    let out = trotter_step(&s, &split.h0, &split.blocks, 0.0).unwrap();
    assert!(dist(&out.amplitudes, &s.amplitudes) < 1e-15);
    let wrong = polarized(&Layout::four_level());
    assert!(trotter_step(&wrong, &split.h0, &split.blocks, 0.01).is_err());
}

#[test]
fn step_unitary_matches_product_of_exponentials() {
    // oracle: e^{-iH0 dt} applied first, then each block in order
    let p = SystemParams::default()
        .with_omega_c(7.0)
        .with_detunings(0.4, -1.2)
        .with_couplings(1.1, 0.7);
    for h in [
        build_rwa_qubitized(&p).unwrap(),
        build_fourlevel_qubitized(&p).unwrap(),
    ] {
        let dt = 0.03;
        let split = split_trotter(&h).unwrap();
        let mut u = taylor_expm(&split.h0.to_matrix().unwrap(), dt);
        for b in &split.blocks {
            u = taylor_expm(&b.to_matrix().unwrap(), dt) * u;
        }
        let mine = TrotterStepper::new(&h, dt).unwrap().unitary();
        assert!((mine - u).iter().all(|z| z.norm() < 1e-12));
    }
}

#[test]
fn single_step_error_scales_with_commutator_weight() {
    // local error ≤ C dt² (g1|Δ1| + g2|Δ2| + g1g2); C is fitted on the sample
    let mut worst: f64 = 0.0;
    for (d1, d2, g1, g2) in [
        (0.0, 0.0, 1.0, 1.0),
        (3.0, -2.0, 1.0, 0.5),
        (-5.0, 4.0, 2.0, 1.5),
        (1.0, 1.0, 0.5, 2.0),
    ] {
        let p = SystemParams::default()
            .with_omega_c(20.0)
            .with_detunings(d1, d2)
            .with_couplings(g1, g2);
        let h = build_rwa_qubitized(&p).unwrap();
        let m = h.to_matrix().unwrap();
        for dt in [0.01, 0.02, 0.04] {
            let u = TrotterStepper::new(&h, dt).unwrap().unitary();
            let exact = taylor_expm(&m, dt);
            let err = (u - exact).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let weight = g1 * f64::abs(d1) + g2 * f64::abs(d2) + g1 * g2;
            worst = worst.max(err / (dt * dt * weight));
        }
    }
    assert!(worst < 3.0, "fitted constant {worst}");
}

#[test]
fn cavity_population_peaks_at_one_half_midway() {
    let p = SystemParams::default();
    let h = build_full_qubitized(&p).unwrap();
    let l = h.layout.clone();
    let tf = transfer_time_resonant(1.0, 1.0).unwrap();
    let tr = evolve(
        &polarized(&l),
        &h,
        &TrotterConfig::for_duration(0.01, tf),
        &target(&l),
    )
    .unwrap();
    let (i, pc) = tr
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| (i, s.pc()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    assert!((pc - 0.5).abs() < 0.01, "peak {pc}");
    assert!((tr.samples[i].t - tf / 2.0).abs() < 0.05);
}

#[test]
fn detuned_receiver_barely_responds() {
    let p = SystemParams::default().with_detunings(0.0, 5.0);
    let h = build_full_qubitized(&p).unwrap();
    let l = h.layout.clone();
    let tf = transfer_time_resonant(1.0, 1.0).unwrap();
    let tr = evolve(
        &polarized(&l),
        &h,
        &TrotterConfig::for_duration(0.01, tf),
        &target(&l),
    )
    .unwrap();
    let sim = tr.samples.iter().map(|s| s.p2()).fold(0.0, f64::max);

    let prop = ExactPropagator::new(&h.to_matrix().unwrap()).unwrap();
    let psi0 = polarized(&l).amplitudes;
    let oracle = (0..=400)
        .map(|k| {
            let psi = prop.evolve(&psi0, tf * k as f64 / 400.0).unwrap();
            psi[0b001].norm_sqr()
        })
        .fold(0.0, f64::max);
    assert!((sim - oracle).abs() < 2e-3, "sim {sim} oracle {oracle}");
    // exact value 0.0464
    assert!((oracle - 0.0464).abs() < 5e-4, "oracle max p2 {oracle}");
}

#[test]
fn decoupled_populations_are_constant() {
    let p = SystemParams::default()
        .with_couplings(0.0, 0.0)
        .with_detunings(2.0, -3.0);
    let h = build_full_qubitized(&p).unwrap();
    let l = h.layout.clone();
    let tr = evolve(
        &polarized(&l),
        &h,
        &TrotterConfig::new(0.01, 300),
        &target(&l),
    )
    .unwrap();
    for s in &tr.samples {
        assert!((s.p1() - 1.0).abs() < 1e-12 && s.pc().abs() < 1e-12 && s.p2().abs() < 1e-12);
    }
}

#[test]
fn trajectory_times_are_strictly_increasing() {
    let h = build_full_qubitized(&SystemParams::default()).unwrap();
    let l = h.layout.clone();
    let cfg = TrotterConfig::new(0.01, 101).with_stride(10);
    let tr = evolve(&polarized(&l), &h, &cfg, &target(&l)).unwrap();
    assert_eq!(tr.len(), 12);
    assert!(tr.times().windows(2).all(|w| w[1] > w[0]));
    assert!((tr.last().unwrap().t - 1.01).abs() < 1e-12);
}

#[test]
fn dark_state_stays_put() {
    let p = SystemParams::default()
        .with_detunings(1.5, -0.5)
        .with_couplings(1.0, 2.0);
    let h = build_rwa_qubitized(&p).unwrap();
    let l = h.layout.clone();
    let g = init_state(&StateSpec::superposition(ONE, ZERO), &l).unwrap();
    let tr = evolve(&g, &h, &TrotterConfig::new(0.01, 1000), &g).unwrap();
    assert!(tr.samples.iter().all(|s| s.fidelity >= 1.0 - 1e-10));
}

#[test]
fn superposition_evolves_linearly() {
    let p = SystemParams::default().with_detunings(0.7, 0.7);
    let h = build_rwa_qubitized(&p).unwrap();
    let l = h.layout.clone();
    let stepper = TrotterStepper::new(&h, 0.01).unwrap();
    let (alpha, beta) = (C64::new(0.6, 0.0), C64::new(0.0, 0.8));
    let mixed = init_state(&StateSpec::superposition(alpha, beta), &l).unwrap();
    let n = 500;
    let a = propagate(&mixed, &stepper, n).unwrap();
    let g = propagate(
        &init_state(&StateSpec::superposition(ONE, ZERO), &l).unwrap(),
        &stepper,
        n,
    )
    .unwrap();
    let e = propagate(&polarized(&l), &stepper, n).unwrap();
    let combo: Vec<C64> = g
        .amplitudes
        .iter()
        .zip(&e.amplitudes)
        .map(|(x, y)| alpha * x + beta * y)
        .collect();
    assert!(dist(&a.amplitudes, &combo) < 1e-9);
}

#[test]
fn superposition_transfer_shifts_phase_by_pi() {
    let h = build_rwa_qubitized(&SystemParams::default()).unwrap();
    let l = h.layout.clone();
    let (alpha, beta) = (
        C64::new(FRAC_1_SQRT_2, 0.0),
        C64::from_polar(FRAC_1_SQRT_2, 0.4),
    );
    let spec = StateSpec::superposition(alpha, beta);
    let tf = transfer_time_resonant(1.0, 1.0).unwrap();
    let n = (tf / 0.001).round() as usize;
    let cfg = TrotterConfig::new(tf / n as f64, n);
    let opts = EvolveOptions::rotating(100.0, Frame::Cavity { omega_c: 100.0 });
    let corrected = transfer_target(&spec, &l, TargetConvention::Corrected).unwrap();
    let tr = evolve_with(&init_state(&spec, &l).unwrap(), &h, &cfg, &corrected, &opts).unwrap();
    let first = &tr.samples[0];
    let last = tr.last().unwrap();
    assert!((first.obs.qubit1.phase - 0.4).abs() < 1e-12);
    let shift = (last.obs.qubit2.phase - first.obs.qubit1.phase).rem_euclid(2.0 * PI);
    assert!((shift - PI).abs() < 1e-4, "shift {shift}");
    assert!(last.fidelity > 1.0 - 1e-5);

    let raw = transfer_target(&spec, &l, TargetConvention::Raw).unwrap();
    let tr_raw = evolve_with(&init_state(&spec, &l).unwrap(), &h, &cfg, &raw, &opts).unwrap();
    assert!(tr_raw.last().unwrap().fidelity < 0.01);
}

#[test]
fn lab_frame_phase_rotates_at_cavity_frequency() {
    let h = build_rwa_qubitized(&SystemParams::default().with_couplings(0.0, 0.0)).unwrap();
    let l = h.layout.clone();
    let r = FRAC_1_SQRT_2;
    let spec = StateSpec::superposition(C64::new(r, 0.0), C64::new(r, 0.0));
    let cfg = TrotterConfig::new(0.001, 10);
    let tr = evolve(&init_state(&spec, &l).unwrap(), &h, &cfg, &polarized(&l)).unwrap();
    let s = tr.last().unwrap();
    let expect = (-100.0 * s.t + PI).rem_euclid(2.0 * PI) - PI;
    assert!((s.obs.qubit1.phase - expect).abs() < 1e-9);
}

#[test]
fn rwa_conserves_excitation_and_full_fluctuates_slightly() {
    let p = SystemParams::default().with_detunings(2.0, -1.0);
    for (h, tol) in [
        (build_rwa_qubitized(&p).unwrap(), 1e-9),
        (
            build_full_qubitized(&p).unwrap(),
            10.0 * (1.0f64 / 100.0).powi(2),
        ),
    ] {
        let l = h.layout.clone();
        let tr = evolve(
            &polarized(&l),
            &h,
            &TrotterConfig::new(0.01, 800),
            &target(&l),
        )
        .unwrap();
        let dev = tr
            .samples
            .iter()
            .map(|s| (s.total_excitation() - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(dev < tol, "deviation {dev}");
    }
}

#[test]
fn exact_energy_is_conserved_and_trotter_energy_converges() {
    let h = build_full_qubitized(&SystemParams::default()).unwrap();
    let l = h.layout.clone();
    let psi0 = polarized(&l);
    let e0 = total_energy(&psi0, &h).unwrap();
    let prop = ExactPropagator::new(&h.to_matrix().unwrap()).unwrap();
    for t in [0.5, 1.1, 2.2] {
        let psi = StateVector::new(prop.evolve(&psi0.amplitudes, t).unwrap(), l.clone()).unwrap();
        assert!((total_energy(&psi, &h).unwrap() - e0).abs() < 1e-9);
    }
    let deviation = |dt: f64| {
        let n = (2.2 / dt).round() as usize;
        evolve(&psi0, &h, &TrotterConfig::new(dt, n), &target(&l))
            .unwrap()
            .samples
            .iter()
            .map(|s| (s.energy - e0).abs())
            .fold(0.0, f64::max)
    };
    assert!(deviation(0.08) > 10.0 * deviation(0.01));
}

#[test]
fn damping_free_density_run_matches_pure_run() {
    let p = SystemParams::default().with_detunings(1.0, 1.0);
    let h = build_full_qubitized(&p).unwrap();
    let l = h.layout.clone();
    let cfg = TrotterConfig::new(0.01, 300);
    let pure = evolve(&polarized(&l), &h, &cfg, &target(&l)).unwrap();
    let rho0 = DensityMatrix::from_pure(&polarized(&l));
    let mixed =
        evolve_damped(&rho0, &h, 0.0, &cfg, &target(&l), &EvolveOptions::default()).unwrap();
    for (a, b) in pure.samples.iter().zip(&mixed.samples) {
        assert!((a.p1() - b.p1()).abs() < 1e-9);
        assert!((a.pc() - b.pc()).abs() < 1e-9);
        assert!((a.p2() - b.p2()).abs() < 1e-9);
        assert!((a.fidelity - b.fidelity).abs() < 1e-9);
    }
}

/// Dense exact unitary plus Kraus channel on a step ten times finer.
fn damped_oracle(h: &tcsim::PauliHamiltonian, kappa: f64, dt: f64, t: f64) -> f64 {
    let l = &h.layout;
    let fine = dt / 10.0;
    let u = ExactPropagator::new(&h.to_matrix().unwrap())
        .unwrap()
        .unitary(fine);
    let ch = KrausChannel::from_rate(kappa, fine, 1).unwrap();
    let mut rho = DensityMatrix::from_pure(&polarized(l));
    for _ in 0..(t / fine).round() as usize {
        rho = apply_kraus(&rho.conjugate_by(&u), &ch, l).unwrap();
    }
    rho.probabilities()
        .iter()
        .enumerate()
        .map(|(b, p)| p * l.excitation_number(b) as f64)
        .sum()
}

#[test]
fn damped_excitation_tracks_fine_step_oracle_and_favours_dispersive_transfer() {
    let dt = 0.01;
    let opts = EvolveOptions::default();
    let run = |delta: f64, kappa: f64, t: f64| {
        let h = build_rwa_qubitized(&SystemParams::default().with_detunings(delta, delta)).unwrap();
        let l = h.layout.clone();
        let tr = evolve_damped(
            &DensityMatrix::from_pure(&polarized(&l)),
            &h,
            kappa,
            &TrotterConfig::for_duration(dt, t),
            &target(&l),
            &opts,
        )
        .unwrap();
        (tr, h)
    };
    let tf = transfer_time_resonant(1.0, 1.0).unwrap();
    let tpf = transfer_time_dispersive(1.0, 10.0).unwrap().magnitude;

    let (res, hr) = run(0.0, 0.1, tf);
    let (dis, hd) = run(10.0, 0.1, tpf);
    let e_res = res.sample_at(tf).unwrap().total_excitation();
    let e_dis = dis.sample_at(tpf).unwrap().total_excitation();
    let o_res = damped_oracle(&hr, 0.1, dt, res.sample_at(tf).unwrap().t);
    let o_dis = damped_oracle(&hd, 0.1, dt, dis.sample_at(tpf).unwrap().t);
    assert!((e_res - o_res).abs() < 2e-3, "{e_res} vs {o_res}");
    assert!((e_dis - o_dis).abs() < 2e-3, "{e_dis} vs {o_dis}");
    assert!(e_dis > e_res);

    for tr in [&res, &dis] {
        assert!(tr
            .samples
            .windows(2)
            .all(|w| w[1].total_excitation() <= w[0].total_excitation() + 1e-12));
    }
    let (slow, _) = run(0.0, 0.01, tf);
    assert!(slow.last().unwrap().total_excitation() > res.last().unwrap().total_excitation());
}

#[test]
fn dispersive_damping_keeps_qubit_coherence() {
    let h = build_rwa_qubitized(&SystemParams::default().with_detunings(10.0, 10.0)).unwrap();
    let l = h.layout.clone();
    let t = transfer_time_dispersive(1.0, 10.0).unwrap().magnitude / 2.0;
    let tr = evolve_damped(
        &DensityMatrix::from_pure(&polarized(&l)),
        &h,
        0.1,
        &TrotterConfig::for_duration(0.01, t),
        &target(&l),
        &EvolveOptions::default(),
    )
    .unwrap();
    let s = tr.last().unwrap();
    assert!(s.obs.coh_12.magnitude > 0.45, "{}", s.obs.coh_12.magnitude);
    assert!(s.obs.coh_1c.magnitude < 0.1 && s.obs.coh_2c.magnitude < 0.1);
}

#[test]
fn reduced_states_at_transfer() {
    let h = build_rwa_qubitized(&SystemParams::default()).unwrap();
    let l = h.layout.clone();
    let stepper = TrotterStepper::new(&h, 0.001).unwrap();
    let half = propagate(
        &polarized(&l),
        &stepper,
        (transfer_time_resonant(1.0, 1.0).unwrap() / 0.002).round() as usize,
    )
    .unwrap();
    let rho = DensityMatrix::from_pure(&half);
    let q1 = populations_and_phase(&partial_trace(&rho, &[0]).unwrap()).unwrap();
    assert!((q1.p_excited - 0.25).abs() < 1e-3);
    assert!((partial_trace(&rho, &[0, 2]).unwrap().trace() - 1.0).abs() < 1e-12);
}

#[test]
fn closed_forms_match_exact_diagonalization() {
    // 3×3 single-excitation block in the emitter frame
    for (g1, g2) in [(1.0, 1.0), (0.5, 1.7)] {
        let h = DMatrix::from_row_slice(
            3,
            3,
            &[
                ZERO,
                C64::new(g1, 0.0),
                ZERO,
                C64::new(g1, 0.0),
                ZERO,
                C64::new(g2, 0.0),
                ZERO,
                C64::new(g2, 0.0),
                ZERO,
            ],
        );
        for k in 0..20 {
            let t = 0.37 * k as f64;
            let psi = exact_evolve(&h, &[ONE, ZERO, ZERO], t).unwrap();
            let c = rwa_resonant_state(t, g1, g2, ZERO, ONE).unwrap();
            let closed = [c.a_e0g, c.a_g1g, c.a_g0e];
            assert!(dist(&psi, &closed) < 1e-12, "t = {t}");
        }
    }
}

#[test]
fn dispersive_closed_form_matches_large_detuning_dynamics() {
    let (g1, g2, delta) = (1.0, 0.6, 40.0);
    let p = SystemParams::default()
        .with_detunings(delta, delta)
        .with_couplings(g1, g2);
    let h = build_rwa_qubitized(&p).unwrap().to_matrix().unwrap();
    let prop = ExactPropagator::new(&h).unwrap();
    let l = Layout::two_level();
    let psi0 = polarized(&l).amplitudes;
    let tpf = PI * delta / (g1 * g1 + g2 * g2);
    for k in 0..=8 {
        let t = tpf * k as f64 / 8.0;
        let psi = prop.evolve(&psi0, t).unwrap();
        let c = dispersive_state(t, g1, g2, delta, ZERO, ONE).unwrap();
        assert!(
            (psi[0b001].norm_sqr() - c.a_g0e.norm_sqr()).abs() < 0.02,
            "t = {t}"
        );
        assert!(
            (psi[0b100].norm_sqr() - c.a_e0g.norm_sqr()).abs() < 0.02,
            "t = {t}"
        );
    }
}

#[test]
fn exact_evolve_matches_taylor_series_and_composes() {
    let p = SystemParams::default()
        .with_omega_c(10.0)
        .with_detunings(1.0, -2.0)
        .with_couplings(0.8, 1.3);
    let h = build_full_qubitized(&p).unwrap().to_matrix().unwrap();
    let psi0 = polarized(&Layout::two_level()).amplitudes;
    let a = exact_evolve(&h, &psi0, 1.3).unwrap();
    let b: Vec<C64> = (taylor_expm(&h, 1.3) * nalgebra::DVector::from_column_slice(&psi0))
        .iter()
        .copied()
        .collect();
    assert!(dist(&a, &b) < 1e-10);
    let half = exact_evolve(&h, &psi0, 0.5).unwrap();
    let both = exact_evolve(&h, &half, 0.8).unwrap();
    assert!(dist(&both, &a) < 1e-10);
    assert!(dist(&exact_evolve(&h, &psi0, 0.0).unwrap(), &psi0) < 1e-12);
}

#[test]
fn trotter_converges_quadratically_to_oracle() {
    let p = SystemParams::default()
        .with_detunings(1.0, -1.5)
        .with_couplings(1.0, 0.8);
    let h = build_rwa_qubitized(&p).unwrap();
    let l = h.layout.clone();
    let t = 2.0;
    let exact = exact_evolve(&h.to_matrix().unwrap(), &polarized(&l).amplitudes, t).unwrap();
    let errs: Vec<(f64, f64)> = [0.005, 0.01, 0.02, 0.04]
        .iter()
        .map(|&dt| {
            let n = (t / dt).round() as usize;
            let psi = propagate(&polarized(&l), &TrotterStepper::new(&h, dt).unwrap(), n).unwrap();
            let f = C64::norm_sqr(
                &exact
                    .iter()
                    .zip(&psi.amplitudes)
                    .map(|(a, b)| a.conj() * b)
                    .sum(),
            );
            (dt.ln(), (1.0 - f).ln())
        })
        .collect();
    let slope = (errs[3].1 - errs[0].1) / (errs[3].0 - errs[0].0);
    assert!((slope - 2.0).abs() < 0.2, "slope {slope}");
}

#[test]
fn weak_coupling_keeps_higher_photon_states_empty() {
    let p = SystemParams::default().with_omega_c(100.0);
    let h = build_fourlevel_qubitized(&p).unwrap();
    let l = h.layout.clone();
    let prop = ExactPropagator::new(&h.to_matrix().unwrap()).unwrap();
    let psi0 = polarized(&l).amplitudes;
    let mut worst: f64 = 0.0;
    for k in 0..=300 {
        let psi =
            StateVector::new(prop.evolve(&psi0, 0.01 * k as f64).unwrap(), l.clone()).unwrap();
        let occ = cavity_occupations(&psi).unwrap();
        worst = worst.max(occ[2]).max(occ[3]);
    }
    assert!(worst < 1e-4, "{worst}");
}

#[test]
fn transfer_is_symmetric_under_detuning_exchange() {
    for (d1, d2) in [(1.0, 3.0), (-2.0, 4.0)] {
        let best = |a: f64, b: f64| {
            let h = build_full_qubitized(&SystemParams::default().with_detunings(a, b)).unwrap();
            let prop = ExactPropagator::new(&h.to_matrix().unwrap()).unwrap();
            let psi0 = polarized(&h.layout).amplitudes;
            (0..600)
                .map(|k| prop.evolve(&psi0, 0.05 * k as f64).unwrap()[0b001].norm_sqr())
                .fold(0.0, f64::max)
        };
        assert!((best(d1, d2) - best(d2, d1)).abs() < 1e-9);
    }
}

#[test]
fn oracle_distance_within_error_bound() {
    let draws = [
        (1.2, -3.4, 0.9, 1.6),
        (-4.8, 4.1, 1.9, 0.5),
        (0.0, 2.5, 1.0, 1.0),
    ];
    for (d1, d2, g1, g2) in draws {
        let p = SystemParams::default()
            .with_detunings(d1, d2)
            .with_couplings(g1, g2);
        let h = build_full_qubitized(&p).unwrap();
        let l = h.layout.clone();
        let exact = exact_evolve(&h.to_matrix().unwrap(), &polarized(&l).amplitudes, 3.0).unwrap();
        let psi = propagate(
            &polarized(&l),
            &TrotterStepper::new(&h, 0.005).unwrap(),
            600,
        )
        .unwrap();
        let bound = trotter_error_bound(g1, g2, d1, d2, 3.0, 0.005);
        assert!(dist(&psi.amplitudes, &exact) <= 5.0 * bound);
    }
}

fn amp() -> impl Strategy<Value = (f64, f64)> {
    (0.0..1.0f64, 0.0..(2.0 * PI))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn steps_preserve_norm(d1 in -5.0..5.0f64, d2 in -5.0..5.0f64, g1 in 0.0..2.0f64, g2 in 0.0..2.0f64,
                           dt in 0.001..0.1f64, (w, phi) in amp()) {
        let p = SystemParams::default().with_detunings(d1, d2).with_couplings(g1, g2);
        let spec = StateSpec::superposition(C64::new(w.sqrt(), 0.0), C64::from_polar((1.0 - w).sqrt(), phi));
        for h in [build_full_qubitized(&p).unwrap(), build_rwa_qubitized(&p).unwrap(), build_fourlevel_qubitized(&p).unwrap()] {
            let s = init_state(&spec, &h.layout).unwrap();
            let out = propagate(&s, &TrotterStepper::new(&h, dt).unwrap(), 50).unwrap();
            prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn kraus_keeps_states_physical(gamma in 0.0..1.0f64, re in proptest::collection::vec(-1.0..1.0f64, 16)) {
        let amps: Vec<C64> = re.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
        let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        prop_assume!(n > 1e-3);
        let psi = StateVector::new(amps.iter().map(|a| a / n).collect(), Layout::two_level()).unwrap();
        let l = Layout::two_level();
        let out = apply_kraus(&DensityMatrix::from_pure(&psi), &KrausChannel::new(gamma, 1).unwrap(), &l).unwrap();
        prop_assert!((out.trace() - 1.0).abs() < 1e-12);
        prop_assert!(out.hermiticity_error() < 1e-12);
        prop_assert!(out.min_eigenvalue() > -1e-9);
        let before = partial_trace(&DensityMatrix::from_pure(&psi), &[1]).unwrap().matrix[(1, 1)].re;
        let after = partial_trace(&out, &[1]).unwrap().matrix[(1, 1)].re;
        prop_assert!((after - before * (1.0 - gamma * gamma)).abs() < 1e-12);
    }

    #[test]
    fn closed_forms_stay_normalized_and_periodic(g1 in 0.1..3.0f64, g2 in 0.1..3.0f64, t in 0.0..20.0f64,
                                                 (w, phi) in amp(), delta in 5.0..50.0f64) {
        let (a, b) = (C64::new(w.sqrt(), 0.0), C64::from_polar((1.0 - w).sqrt(), phi));
        let s = rwa_resonant_state(t, g1, g2, a, b).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        let period = 2.0 * PI / (g1 * g1 + g2 * g2).sqrt();
        let later: SingleExcitationAmplitudes = rwa_resonant_state(t + period, g1, g2, a, b).unwrap();
        prop_assert!(s.distance(&later) < 1e-12);
        let d = dispersive_state(t, g1, g2, delta, a, b).unwrap();
        prop_assert!((d.norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert_eq!(d.a_g1g, ZERO);
    }

    #[test]
    fn exact_evolution_is_unitary(t in 0.0..10.0f64, d1 in -5.0..5.0f64) {
        let p = SystemParams::default().with_omega_c(10.0).with_detunings(d1, 0.5);
        let h = build_full_qubitized(&p).unwrap().to_matrix().unwrap();
        let psi = exact_evolve(&h, &polarized(&Layout::two_level()).amplitudes, t).unwrap();
        let n: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        prop_assert!((n - 1.0).abs() < 1e-12);
    }
}
