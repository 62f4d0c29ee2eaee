//! Built-in invariant checks across every solver layer, runnable from the
//! command line without a configuration.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vicinal_core::energy::{
    functional_f_a, min_slope, phi_a_prime, phi_a_second, phi_prime_root, psi_a_second,
};
use vicinal_core::spectral::{derivative, hilbert, inner_product, norm_lp};
use vicinal_core::stepper::{
    check_truncation, implicit_step, implicit_step_from, run_evolution, step_objective, step_objective_gradient,
    step_objective_hessian_form, truncate_second_derivative, StepConfig,
};
use vicinal_core::variational::{certify_vi, pairing_b, random_band_limited, vi_direction_battery};
use vicinal_core::verification::{height_bracket, make_test_battery, potential_bracket, weak_form_residual};
use vicinal_core::{BarrierParams, Execution, PeriodicGrid, SpectralField};

use crate::commands::Check;

fn check(name: &str, pass: bool, detail: String) -> Check {
    Check {
        name: name.to_string(),
        pass,
        detail,
    }
}

fn admissible(g: &PeriodicGrid, p: &BarrierParams, max_k: usize, amp: f64, rng: &mut ChaCha8Rng) -> SpectralField {
    let mut u = random_band_limited(g, max_k, rng).scaled(amp);
    while min_slope(&u, p) < 0.5 * p.a() {
        u = u.scaled(0.5);
    }
    u
}

fn spectral_checks(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let g = PeriodicGrid::new(128).expect("grid");
    let (mut iso, mut inv, mut skew, mut comm, mut poincare): (f64, f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0, f64::INFINITY);
    for _ in 0..50 {
        let f = random_band_limited(&g, rng.gen_range(1..48), rng);
        let h = random_band_limited(&g, 24, rng);
        let hf = hilbert(&f);
        iso = iso.max((norm_lp(&hf, 2.0) / norm_lp(&f, 2.0) - 1.0).abs());
        inv = inv.max(hilbert(&hf).add(&f).expect("grid").max_abs());
        skew = skew.max((inner_product(&hf, &h).expect("grid") + inner_product(&f, &hilbert(&h)).expect("grid")).abs());
        let a = hilbert(&derivative(&f, 1).expect("order"));
        let b = derivative(&hf, 1).expect("order");
        comm = comm.max(a.sub(&b).expect("grid").max_abs());
        let fx = derivative(&f, 1).expect("order");
        poincare = poincare.min(norm_lp(&fx, 2.0).powi(2) - norm_lp(&f, 2.0).powi(2));
    }
    vec![
        check("hilbert isometry", iso <= 1e-12, format!("max |ratio - 1| = {iso:.2e}")),
        check("hilbert inverse", inv <= 1e-12, format!("max |HHf + f| = {inv:.2e}")),
        check("hilbert skew-adjoint", skew <= 1e-12, format!("max gap = {skew:.2e}")),
        check("hilbert commutes with d/dx", comm <= 1e-12, format!("max gap = {comm:.2e}")),
        check("sharp poincare", poincare >= -1e-10, format!("min |f_x|^2 - |f|^2 = {poincare:.3e}")),
    ]
}

fn energy_checks(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut min_phi: f64 = f64::INFINITY;
    let mut min_psi: f64 = f64::INFINITY;
    for a in [0.5, 1.0, 2.0] {
        let p = BarrierParams::new(a).expect("a");
        for i in 0..10_000 {
            let s = 10f64.powf(-8.0 + 11.0 * i as f64 / 9_999.0);
            min_phi = min_phi.min(phi_a_second(s - a, &p).expect("domain"));
            min_psi = min_psi.min(psi_a_second(s - a, &p).expect("domain"));
        }
    }
    let p = BarrierParams::new(1.0).expect("a");
    let root = phi_prime_root(&p);
    let residual = phi_a_prime(root, &p).expect("domain").abs();

    let g = PeriodicGrid::new(64).expect("grid");
    let mut worst: f64 = f64::NEG_INFINITY;
    for _ in 0..30 {
        let u = admissible(&g, &p, 10, 0.3, rng);
        let v = admissible(&g, &p, 10, 0.3, rng);
        let l = rng.gen_range(0.0..1.0);
        let mix = u.lincomb(l, 1.0 - l, &v).expect("grid");
        worst = worst.max(functional_f_a(&mix, &p) - l * functional_f_a(&u, &p) - (1.0 - l) * functional_f_a(&v, &p));
    }
    vec![
        check(
            "barrier curvature bounds",
            min_phi >= 2.0 && min_psi >= 1.0,
            format!("min Phi'' = {min_phi:.12}, min Psi'' = {min_psi:.12}"),
        ),
        check("slope root", residual <= 1e-12, format!("root {root:.12}, |Phi'(root)| = {residual:.1e}")),
        check("barrier convexity", worst <= 1e-10, format!("max convexity defect = {worst:.3e}")),
    ]
}

fn operator_checks(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let g = PeriodicGrid::new(128).expect("grid");
    let min_b = (0..50)
        .map(|_| {
            let w = random_band_limited(&g, 32, rng);
            pairing_b(&w, &w).expect("grid")
        })
        .fold(f64::INFINITY, f64::min);
    let s2 = SpectralField::from_fn(&g, |x| (2.0 * x).sin()).expect("zero mean");
    let at_s2 = pairing_b(&s2, &s2).expect("grid");
    vec![check(
        "monotone regularised operator",
        min_b >= -1e-10 && (at_s2 - 8.0 * PI).abs() <= 1e-8,
        format!("min <Bw,w> = {min_b:.3e}, <B sin 2x, sin 2x> - 8 pi = {:.1e}", at_s2 - 8.0 * PI),
    )]
}

fn stepper_checks(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let g = PeriodicGrid::new(64).expect("grid");
    let p = BarrierParams::new(1.0).expect("a");
    let mut out = Vec::new();

    let (zero_next, _) = implicit_step(&SpectralField::zeros(&g), &p, &StepConfig::new(0.1)).expect("step");
    out.push(check("zero is stationary", zero_next.max_abs() == 0.0, format!("sup = {:.1e}", zero_next.max_abs())));

    let eps = 1e-4;
    let u = SpectralField::from_fn(&g, |x| eps * x.sin()).expect("zero mean");
    let (next, _) = implicit_step(&u, &p, &StepConfig::new(0.1)).expect("step");
    let target = SpectralField::from_fn(&g, |x| eps / 1.1 * x.sin()).expect("zero mean");
    let err = next.sub(&target).expect("grid").max_abs();
    out.push(check("linearized decay", err <= 5e-9, format!("error {err:.2e}")));

    let tau = 1e-2;
    let mut grad_err: f64 = 0.0;
    let mut hess_min = f64::INFINITY;
    let mut unique: f64 = 0.0;
    for _ in 0..5 {
        let prev = admissible(&g, &p, 8, 0.3, rng);
        let v = admissible(&g, &p, 8, 0.3, rng);
        let w = random_band_limited(&g, 12, rng);
        let grad = step_objective_gradient(&v, &prev, &p, tau).expect("admissible");
        let an = inner_product(&grad, &w).expect("grid");
        let h = 1e-6;
        let fd = (step_objective(&v.lincomb(1.0, h, &w).expect("grid"), &prev, &p, tau).expect("finite")
            - step_objective(&v.lincomb(1.0, -h, &w).expect("grid"), &prev, &p, tau).expect("finite"))
            / (2.0 * h);
        grad_err = grad_err.max((fd - an).abs() / an.abs().max(1.0));
        hess_min = hess_min.min(step_objective_hessian_form(&v, &w, &p, tau).expect("admissible"));
        let cfg = StepConfig::new(tau);
        let (a, _) = implicit_step_from(&prev, &prev, &p, &cfg).expect("step");
        let (b, _) = implicit_step_from(&prev, &v, &p, &cfg).expect("step");
        unique = unique.max(norm_lp(&a.sub(&b).expect("grid"), 2.0));
    }
    out.push(check("objective gradient", grad_err <= 1e-6, format!("max relative error {grad_err:.2e}")));
    out.push(check("objective hessian positive", hess_min > 0.0, format!("min form {hess_min:.3e}")));
    out.push(check("step uniqueness", unique <= 1e-8, format!("max distance {unique:.2e}")));

    let u = SpectralField::from_fn(&g, |x| -0.95 * x.cos()).expect("zero mean");
    let mut ok = true;
    for delta in [0.3, 0.2, 0.1] {
        let (ud, stats) = truncate_second_derivative(&u, &p, delta).expect("delta in (0, a)");
        ok &= check_truncation(&u, &ud, &stats, &p).all_hold();
    }
    out.push(check("truncation bounds (admissible data)", ok, "delta in {0.3, 0.2, 0.1}".to_string()));
    out
}

fn trajectory_checks() -> Vec<Check> {
    let g = PeriodicGrid::new(128).expect("grid");
    let p = BarrierParams::new(1.0).expect("a");
    let u0 = SpectralField::from_fn(&g, |x| 0.1 * x.sin()).expect("zero mean");
    let tau = 1e-3;
    let traj = run_evolution(&u0, &p, 0.05, &StepConfig::new(tau)).expect("run");
    let worst = traj
        .states
        .windows(2)
        .map(|w| {
            let inc = norm_lp(&w[1].sub(&w[0]).expect("grid"), 2.0);
            vicinal_core::energy_total(&w[1], &p).total + inc * inc / (2.0 * tau)
                - vicinal_core::energy_total(&w[0], &p).total
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let n = traj.steps();
    let u = &traj.states[n];
    let u_dot = u.lincomb(1.0 / tau, -1.0 / tau, &traj.states[n - 1]).expect("grid");
    let cert = certify_vi(&u_dot, u, &p, &vi_direction_battery(u, &p, 1), Execution::default()).expect("admissible");
    let residual = weak_form_residual(&traj, &p, &make_test_battery(0.05, 4, 2)).max;
    let means = traj.states.iter().map(|s| s.mean().abs()).fold(0.0, f64::max);
    vec![
        check("dissipation", worst <= 1e-9, format!("max defect {worst:.3e}")),
        check("variational inequality", cert.passed, format!("min residual {:.3e}", cert.min_value)),
        check("weak form", residual <= 1e-4, format!("max residual {residual:.3e}")),
        check("mass conservation", means <= 1e-12, format!("max |mean| {means:.1e}")),
    ]
}

fn height_checks(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let g = PeriodicGrid::new(256).expect("grid");
    let p = BarrierParams::new(1.0).expect("a");
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let u = admissible(&g, &p, 8, 0.5, rng);
        let l = height_bracket(&u, &p).expect("orders");
        let r = potential_bracket(&u, &p).expect("orders");
        worst = worst.max(l.iter().zip(&r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    vec![check("height bracket", worst <= 1e-8, format!("max gap {worst:.2e}"))]
}

pub fn run_selftest() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut checks = spectral_checks(&mut rng);
    checks.extend(energy_checks(&mut rng));
    checks.extend(operator_checks(&mut rng));
    checks.extend(stepper_checks(&mut rng));
    checks.extend(trajectory_checks());
    checks.extend(height_checks(&mut rng));
    checks
}
