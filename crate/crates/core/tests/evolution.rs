mod common;

use std::f64::consts::PI;

use vicinal_core::energy::{energy_total, functional_f_a, min_slope};
use vicinal_core::spectral::{derivative, make_field, norm_lp, project_zero_mean, second_antiderivative_zero_mean};
use vicinal_core::stepper::{
    implicit_step, lipschitz_ratio, run_evolution, run_sweep, step_objective, StepConfig, SweepJob,
};
use vicinal_core::variational::pairing_h;
use vicinal_core::verification::{log_integrability_report, log_l1_sup};
use vicinal_core::{Error, Execution, SpectralField};

use common::{grid, params, sine};

#[test]
fn baseline_trajectory_invariants() {
    let g = grid(256);
    let p = params(1.0);
    let tau = 1e-3;
    let traj = run_evolution(&sine(&g, 1.0, 0.1), &p, 0.1, &StepConfig::new(tau)).unwrap();
    assert_eq!(traj.steps(), 100);
    assert!(traj.initial_truncation.is_none());
    for (n, u) in traj.states.iter().enumerate() {
        assert!((traj.times[n] - n as f64 * tau).abs() < 1e-15);
        assert!(u.mean().abs() <= 1e-12);
        assert!(derivative(u, 1).unwrap().mean().abs() <= 1e-12);
        assert!(derivative(u, 2).unwrap().mean().abs() <= 1e-12);
        assert!(min_slope(u, &p) > 0.0);
    }
    for (n, d) in traj.diagnostics.iter().enumerate() {
        let (prev, next) = (&traj.states[n], &traj.states[n + 1]);
        assert!(d.grad_norm <= 1e-10);
        assert!(d.min_slope >= 1e-8);
        let j_next = step_objective(next, prev, &p, tau).unwrap();
        let j_prev = step_objective(prev, prev, &p, tau).unwrap();
        assert!(j_next <= j_prev);
    }
    let sups: Vec<f64> = traj.states.iter().map(|u| u.max_abs()).collect();
    assert!(sups.windows(2).all(|w| w[1] <= w[0]));
    // every mode has a negative linear rate; the first one decays like exp(-t)
    let ratio = sups[100] / sups[0];
    assert!((ratio - (-0.1f64).exp()).abs() < 2e-3, "{ratio}");
}

#[test]
fn energy_log_is_monotone() {
    let g = grid(128);
    let p = params(1.0);
    let u0 = sine(&g, 1.0, 0.1).add(&sine(&g, 3.0, 0.005)).unwrap();
    let traj = run_evolution(&u0, &p, 0.05, &StepConfig::new(1e-3)).unwrap();
    let energies: Vec<f64> = traj.states.iter().map(|u| energy_total(u, &p).total).collect();
    assert!(energies.windows(2).all(|w| w[1] <= w[0] + 1e-12));
}

#[test]
fn final_state_converges_at_first_order() {
    let g = grid(128);
    let p = params(1.0);
    let u0 = sine(&g, 1.0, 0.1);
    let finals: Vec<SpectralField> = [4e-3, 2e-3, 1e-3, 5e-4]
        .iter()
        .map(|&tau| run_evolution(&u0, &p, 0.1, &StepConfig::new(tau)).unwrap().final_state().clone())
        .collect();
    let gaps: Vec<f64> = finals.windows(2).map(|w| norm_lp(&w[0].sub(&w[1]).unwrap(), 2.0)).collect();
    for w in gaps.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 0.9, "{gaps:?}");
    }
}

#[test]
fn lipschitz_ratio_matches_linear_oracle() {
    let g = grid(64);
    let p = params(1.0);
    let eps = 1e-4;
    let tau = 0.1;
    let traj = run_evolution(&sine(&g, 1.0, eps), &p, 0.1, &StepConfig::new(tau)).unwrap();
    // one step: |u^1 - u^0| = eps (1 - 1/1.1) sqrt(pi)
    let expected = eps * PI.sqrt() * (1.0 - 1.0 / 1.1) / tau;
    assert!((lipschitz_ratio(&traj) - expected).abs() < 1e-6 * expected + 1e-12);
    let zero = run_evolution(&SpectralField::zeros(&g), &p, 0.3, &StepConfig::new(tau)).unwrap();
    assert_eq!(lipschitz_ratio(&zero), 0.0);
}

#[test]
fn log_integrability_along_the_baseline() {
    let g = grid(128);
    let p = params(1.0);
    let traj = run_evolution(&sine(&g, 1.0, 0.1), &p, 0.1, &StepConfig::new(1e-3)).unwrap();
    let report = log_integrability_report(&traj, &p);
    assert_eq!(report.len(), traj.states.len());
    assert!(report.iter().all(|r| r.holds()));
    assert!(log_l1_sup(&report) < 1.0);
}

#[test]
fn near_floor_initial_data_is_lifted_once() {
    let g = grid(64);
    let p = params(1.0);
    // u_xx = cos x, so u_xx + a touches zero at x = -pi (at the node)
    let u0 = SpectralField::from_fn(&g, |x| -(1.0 - 1e-9) * x.cos()).unwrap();
    let traj = run_evolution(&u0, &p, 0.01, &StepConfig::new(0.01)).unwrap();
    let stats = traj.initial_truncation.expect("truncation recorded");
    assert_eq!(stats.delta, 1e-7);
    assert!(stats.active_nodes >= 1);
    assert!(min_slope(&traj.states[0], &p) > 0.0);
}

#[test]
fn errors_carry_the_step_index() {
    let g = grid(32);
    let p = params(1.0);
    let mut cfg = StepConfig::new(0.01);
    cfg.max_iter = 1;
    cfg.newton_tol = 1e-300;
    let err = run_evolution(&sine(&g, 1.0, 0.1), &p, 0.05, &cfg).unwrap_err();
    match &err {
        Error::StepFailed { step, .. } => assert_eq!(*step, 1),
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(err.root(), Error::NonConvergence { .. }));
}

#[test]
fn runs_are_deterministic_across_policies() {
    let g = grid(64);
    let p = params(1.0);
    let u0 = sine(&g, 2.0, 0.02);
    let seq = run_evolution(&u0, &p, 0.02, &StepConfig::new(1e-3).with_execution(Execution::Sequential)).unwrap();
    let par = run_evolution(&u0, &p, 0.02, &StepConfig::new(1e-3).with_execution(Execution::Parallel)).unwrap();
    for (a, b) in seq.states.iter().zip(&par.states) {
        assert_eq!(a.samples(), b.samples());
    }
}

#[test]
fn sweep_returns_results_in_job_order() {
    let g = grid(64);
    let p = params(1.0);
    let amps = [0.02, 0.05, 0.08];
    let jobs: Vec<SweepJob> = amps
        .iter()
        .map(|&a| SweepJob {
            u0: sine(&g, 1.0, a),
            params: p,
            t_final: 0.01,
            cfg: StepConfig::new(1e-3),
        })
        .collect();
    let out = run_sweep(&jobs, Execution::Parallel);
    for (res, &amp) in out.iter().zip(&amps) {
        let traj = res.as_ref().unwrap();
        assert!((traj.states[0].max_abs() - amp).abs() < 1e-15);
    }
}

#[test]
fn zero_is_stationary_for_every_step_size() {
    let g = grid(64);
    let p = params(2.0);
    for tau in [1e-3, 0.1, 1.0] {
        let (next, _) = implicit_step(&SpectralField::zeros(&g), &p, &StepConfig::new(tau)).unwrap();
        assert_eq!(next.max_abs(), 0.0);
    }
}

fn coercivity_ratio(u: &SpectralField) -> f64 {
    let p = params(1.0);
    let f = functional_f_a(u, &p);
    if f.is_infinite() {
        return f64::INFINITY;
    }
    (-pairing_h(u, u).unwrap() + f) / norm_lp(u, 2.0)
}

#[test]
fn coercivity_probe_along_a_ray() {
    let g = grid(256);
    let u0 = sine(&g, 1.0, 0.05);
    let at10 = coercivity_ratio(&u0.scaled(10.0));
    let at100 = coercivity_ratio(&u0.scaled(100.0));
    assert!(at10.is_finite());
    assert!(at100 > 10.0 * at10);
}

#[test]
fn energy_grows_without_bound_on_concentrating_profiles() {
    // v_xx = 0.9 a (f - 1) with f a normalised von Mises density: admissible,
    // bounded in L2, increasingly concentrated.
    let g = grid(512);
    let ratios: Vec<f64> = [1.0, 4.0, 16.0, 64.0]
        .iter()
        .map(|&kappa: &f64| {
            let raw = g.sample(|x| (kappa * (x.cos() - 1.0)).exp());
            let mean = raw.iter().sum::<f64>() / raw.len() as f64;
            let vxx: Vec<f64> = raw.iter().map(|r| 0.9 * (r / mean - 1.0)).collect();
            let vxx = make_field(&g, project_zero_mean(&vxx)).unwrap();
            let v = second_antiderivative_zero_mean(&vxx);
            coercivity_ratio(&v)
        })
        .collect();
    assert!(ratios.windows(2).all(|w| w[1] > w[0]), "{ratios:?}");
    assert!(ratios[3] > 10.0 * ratios[0], "{ratios:?}");
}
