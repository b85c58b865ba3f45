mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use qtransfer::analytics::efficiency;
use qtransfer::dynamics::{
    evolve_cavity_free, simulate_cavity, simulate_cavity_every, simulate_waveguide,
    transfer_cavity, transfer_waveguide, waveguide_amplitude_analytic, Amplitudes, CavityState,
    TimeGrid, TransferOutcome,
};
use qtransfer::params::{CavityParams, Scenario, WaveguideParams};
use qtransfer::pulses::{PulseEnvelope, PulseKind, Tabulated};
use qtransfer::sweep::run_point;
use qtransfer::Error;
use rand::Rng;

use common::*;

fn halved(grid: &TimeGrid) -> TimeGrid {
    TimeGrid::new(grid.t_start, grid.t_end, 0.5 * grid.step).unwrap()
}

fn run_on(s: &Scenario, env: &PulseEnvelope, grid: &TimeGrid) -> TransferOutcome {
    match s {
        Scenario::Cavity(p) => transfer_cavity(p, env, grid).unwrap(),
        Scenario::Waveguide(p) => transfer_waveguide(p, env, grid).unwrap(),
    }
}

fn default_grid(s: &Scenario, env: &PulseEnvelope) -> TimeGrid {
    match s {
        Scenario::Cavity(p) => TimeGrid::for_cavity(p, env).unwrap(),
        Scenario::Waveguide(p) => TimeGrid::for_waveguide(p, env).unwrap(),
    }
}

#[test]
fn halving_the_step_changes_little() {
    let mut r = rng(11);
    let mut scenarios = vec![
        Scenario::Cavity(fig3(1.0)),
        Scenario::Cavity(fig3(2f64.sqrt())),
        Scenario::Waveguide(fig4(1.0)),
        Scenario::Waveguide(fig4(2.0)),
    ];
    for _ in 0..4 {
        scenarios.push(Scenario::Cavity(modest_cavity(&mut r)));
        scenarios.push(Scenario::Waveguide(modest_waveguide(&mut r)));
    }
    for s in &scenarios {
        for kind in [PulseKind::Gaussian, PulseKind::Antisymmetric] {
            for w in [0.05, 0.5] {
                let env = PulseEnvelope::analytic(kind, w * slowest_threshold(s)).unwrap();
                let grid = default_grid(s, &env);
                let coarse = run_on(s, &env, &grid).p_sf;
                let fine = run_on(s, &env, &halved(&grid)).p_sf;
                assert!(
                    (coarse - fine).abs() < 1e-8,
                    "{s:?} {kind} {w}: {coarse} vs {fine}"
                );
            }
        }
    }
}

#[test]
fn scaling_the_input_scales_the_response() {
    let p = CavityParams {
        gamma_eo: 0.1,
        gamma_es: 0.05,
        ..fig3(1.3)
    };
    let base = PulseEnvelope::gaussian(0.2).unwrap();
    let (t0, t1) = base.support();
    let table = base.tabulate(t0, t1, 4096).unwrap();
    let c = Complex64::new(0.3, -0.7);
    let env = PulseEnvelope::Tabulated(table.clone());
    let env_c = PulseEnvelope::Tabulated(table.scaled(c));
    let grid = TimeGrid::for_cavity(&p, &env).unwrap();

    let (traj, out) = simulate_cavity(&p, &env, &grid).unwrap();
    let (traj_c, out_c) = simulate_cavity(&p, &env_c, &grid).unwrap();
    let (Amplitudes::Cavity(a), Amplitudes::Cavity(b)) = (&traj.states, &traj_c.states) else {
        unreachable!()
    };
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        for (u, v) in [(x.psi_s, y.psi_s), (x.psi_e, y.psi_e), (x.psi_f, y.psi_f)] {
            assert!((u * c - v).norm() < 1e-12);
        }
    }
    let k = c.norm_sqr();
    for (u, v) in [
        (out.p_sf, out_c.p_sf),
        (out.p_other, out_c.p_other),
        (out.p_back_bg, out_c.p_back_bg),
        (out.input_norm, out_c.input_norm),
    ] {
        assert!((u * k - v).abs() < 1e-12, "{u} * {k} vs {v}");
    }
}

#[test]
fn tabulated_copy_behaves_like_the_analytic_pulse() {
    let p = fig3(1.0);
    let env = PulseEnvelope::antisymmetric(0.1).unwrap();
    let (t0, t1) = env.support();
    let tab = PulseEnvelope::Tabulated(env.tabulate(t0, t1, 20001).unwrap());
    let grid = TimeGrid::for_cavity(&p, &env).unwrap();
    let a = transfer_cavity(&p, &env, &grid).unwrap();
    let b = transfer_cavity(&p, &tab, &grid).unwrap();
    assert!((a.p_sf - b.p_sf).abs() < 1e-5, "{} vs {}", a.p_sf, b.p_sf);
}

#[test]
fn undriven_norm_never_grows() {
    let mut r = rng(12);
    for _ in 0..50 {
        let p = modest_cavity(&mut r);
        let mut z = || Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
        let mut s = CavityState::new(z(), z(), z());
        for _ in 0..500 {
            let next = evolve_cavity_free(&p, s, 0.02, 1).unwrap();
            assert!(next.norm_sqr().sqrt() <= s.norm_sqr().sqrt() * (1.0 + 1e-12));
            s = next;
        }
    }
}

#[test]
fn amplitude_never_exceeds_supplied_input() {
    let mut r = rng(13);
    for _ in 0..6 {
        let p = modest_cavity(&mut r);
        let env = PulseEnvelope::gaussian(r.random_range(0.1..2.0)).unwrap();
        let grid = TimeGrid::for_cavity(&p, &env).unwrap();
        let (traj, out) = simulate_cavity(&p, &env, &grid).unwrap();
        assert_eq!(traj.times.len(), traj.states.len());
        assert_eq!(traj.times.len(), traj.input_values.len());
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));

        let mut supplied = 0.0;
        for k in 0..traj.times.len() {
            if k > 0 {
                let h = traj.times[k] - traj.times[k - 1];
                supplied += 0.5
                    * h
                    * (traj.input_values[k - 1].norm_sqr() + traj.input_values[k].norm_sqr());
            }
            assert!(
                traj.states.norm_sqr(k) <= supplied + 1e-6,
                "t = {}",
                traj.times[k]
            );
        }
        assert!(out.residual_norm < 1e-12);
        let spent = out.p_sf + out.p_other + out.p_back_bg;
        assert!(spent <= out.input_norm + 1e-9);
        assert!(out.p_back_fiber() >= -1e-9);
    }
}

#[test]
fn waveguide_branching_is_exact() {
    let mut r = rng(14);
    for _ in 0..20 {
        let mut p = modest_waveguide(&mut r);
        p.gamma_eo = 0.0;
        p.gamma_es = r.random_range(0.05..0.5);
        let env = PulseEnvelope::analytic(PulseKind::Gaussian, r.random_range(0.05..1.0)).unwrap();
        let (_, out) =
            simulate_waveguide(&p, &env, &TimeGrid::for_waveguide(&p, &env).unwrap()).unwrap();
        let excited_time = out.p_back_bg / p.gamma_es;
        let total = p.total_decay() * excited_time;
        let ratio = out.p_sf / total;
        let expected = (p.guided_ef + p.gamma_ef) / p.total_decay();
        assert!(
            (ratio - expected).abs() < 1e-9 * expected,
            "{ratio} vs {expected}"
        );
    }
}

#[test]
fn waveguide_amplitude_follows_the_pulse_when_slow() {
    let p = WaveguideParams {
        guided_es: 1.0,
        guided_ef: 0.7,
        gamma_es: 0.1,
        ..Default::default()
    };
    let r = p.total_decay();
    for w in [1e-2, 1e-3] {
        let env = PulseEnvelope::gaussian(w).unwrap();
        let mut worst: f64 = 0.0;
        for t in [-1.0 / w, -0.3 / w, 0.0, 0.5 / w] {
            let exact = waveguide_amplitude_analytic(&p, &env, t).unwrap();
            let follow = Complex64::new(0.0, 2.0 * p.guided_es.sqrt() / r) * env.eval(t);
            worst = worst.max((exact - follow).norm() / follow.norm());
        }
        assert!(worst < 5.0 * w / r, "Δω = {w}: relative error {worst}");
    }
}

#[test]
fn simulation_examples() {
    // no input, nothing happens
    let zeros = Tabulated::new(vec![-5.0, 0.0, 5.0], vec![Complex64::new(0.0, 0.0); 3]).unwrap();
    let env = PulseEnvelope::Tabulated(zeros);
    let p = fig3(1.0);
    let grid = TimeGrid::new(-5.0, 5.0, 0.01).unwrap();
    let (traj, out) = simulate_cavity(&p, &env, &grid).unwrap();
    assert_eq!(out.p_sf, 0.0);
    assert!((0..traj.states.len()).all(|k| traj.states.norm_sqr(k) == 0.0));

    // matched and mismatched cavities, narrow band
    let env = PulseEnvelope::gaussian(1e-3).unwrap();
    for (g_ef, target) in [(1.0, 1.0), (2f64.sqrt(), 8.0 / 9.0)] {
        let s = Scenario::Cavity(fig3(g_ef));
        let eta = efficiency(&s).unwrap().eta_sf;
        let out = run_point(&s, &env).unwrap();
        assert!(
            (out.p_sf - eta).abs() < 1e-3 && (out.p_sf - target).abs() < 1e-3,
            "{}",
            out.p_sf
        );
        assert!(out.max_adiabaticity() < 1.1e-3);
    }

    // waveguide without an f-channel
    let p = WaveguideParams {
        guided_es: 1.0,
        gamma_es: 0.2,
        ..Default::default()
    };
    let env = PulseEnvelope::antisymmetric(0.3).unwrap();
    let out = transfer_waveguide(&p, &env, &TimeGrid::for_waveguide(&p, &env).unwrap()).unwrap();
    assert_eq!(out.p_sf, 0.0);
    assert!(out.p_back_bg > 0.0);
}

#[test]
fn grid_errors() {
    let p = fig3(1.0);
    let env = PulseEnvelope::gaussian(0.5).unwrap();
    let grid = TimeGrid::for_cavity(&p, &env).unwrap();
    let coarse = TimeGrid::new(grid.t_start, grid.t_end, 1.01 * grid.step).unwrap();
    assert!(matches!(
        transfer_cavity(&p, &env, &coarse),
        Err(Error::InvalidGrid(_))
    ));
    assert!(TimeGrid::new(1.0, 0.0, 0.1).is_err());
    assert!(TimeGrid::new(0.0, 1.0, 0.0).is_err());

    let no_input = CavityParams { kappa_es: 0.0, ..p };
    assert!(transfer_cavity(&no_input, &env, &grid).is_err());
}

#[test]
fn strided_trajectory_is_a_subsequence() {
    let p = fig3(1.0);
    let env = PulseEnvelope::gaussian(0.5).unwrap();
    let grid = TimeGrid::for_cavity(&p, &env).unwrap();
    let (full, a) = simulate_cavity(&p, &env, &grid).unwrap();
    let (sparse, b) = simulate_cavity_every(&p, &env, &grid, 7).unwrap();
    assert_eq!(a, b);
    assert_eq!(sparse.times.first(), full.times.first());
    assert_eq!(sparse.times.last(), full.times.last());
    for (k, t) in sparse.times.iter().enumerate().take(sparse.times.len() - 1) {
        assert_eq!(*t, full.times[7 * k]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn outcome_probabilities_are_consistent(
        g_es in 0.2f64..2.0, g_ef in 0.0f64..2.0, kappa_es in 0.2f64..2.0, kappa_ef in 0.0f64..2.0,
        gamma_es in 0.0f64..0.5, gamma_ef in 0.0f64..0.5, gamma_eo in 0.0f64..0.5,
        w in 0.1f64..2.0, antisymmetric in any::<bool>(),
    ) {
        let p = CavityParams { g_es, g_ef, kappa_es, kappa_ef, gamma_es, gamma_ef, gamma_eo };
        let kind = if antisymmetric { PulseKind::Antisymmetric } else { PulseKind::Gaussian };
        let env = PulseEnvelope::analytic(kind, w).unwrap();
        let out = transfer_cavity(&p, &env, &TimeGrid::for_cavity(&p, &env).unwrap()).unwrap();
        for x in [out.p_sf, out.p_other, out.p_back_bg] {
            prop_assert!((0.0..=1.0).contains(&x));
        }
        prop_assert!(out.p_sf + out.p_other + out.p_back_bg <= out.input_norm + 1e-9);
        prop_assert!((out.input_norm - 1.0).abs() < 1e-6);
    }
}
