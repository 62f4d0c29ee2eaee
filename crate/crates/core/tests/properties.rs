mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use vicinal_core::energy::{
    functional_f_a, phi_a, phi_a_prime, phi_a_second, psi_a_second, BarrierParams,
};
use vicinal_core::spectral::{derivative, hilbert, inner_product, norm_lp, PeriodicGrid, SpectralField};
use vicinal_core::stepper::{implicit_step_from, step_objective_hessian_form, StepConfig};
use vicinal_core::variational::{pairing_b, pairing_h, random_band_limited, vi_residual, ViForm};

use common::{grid, hilbert_pv, random_admissible, rng};

fn field(n: usize, max_k: usize, seed: u64) -> SpectralField {
    random_band_limited(&grid(n), max_k, &mut rng(seed))
}

fn sup_diff(f: &SpectralField, g: &SpectralField) -> f64 {
    f.sub(g).unwrap().max_abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hilbert_is_an_isometry(seed in any::<u64>(), max_k in 1usize..32) {
        let f = field(128, max_k, seed);
        let ratio = norm_lp(&hilbert(&f), 2.0) / norm_lp(&f, 2.0);
        prop_assert!((ratio - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn hilbert_squares_to_minus_identity(seed in any::<u64>(), max_k in 1usize..32) {
        let f = field(128, max_k, seed);
        prop_assert!(sup_diff(&hilbert(&hilbert(&f)), &f.scaled(-1.0)) <= 1e-12);
    }

    #[test]
    fn hilbert_is_skew_adjoint(s1 in any::<u64>(), s2 in any::<u64>()) {
        let f = field(64, 16, s1);
        let g = field(64, 16, s2);
        let lhs = inner_product(&hilbert(&f), &g).unwrap();
        let rhs = -inner_product(&f, &hilbert(&g)).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn hilbert_commutes_with_differentiation(seed in any::<u64>()) {
        let f = field(64, 12, seed);
        let a = hilbert(&derivative(&f, 1).unwrap());
        let b = derivative(&hilbert(&f), 1).unwrap();
        prop_assert!(sup_diff(&a, &b) <= 1e-12);
    }

    #[test]
    fn sharp_poincare_inequality(seed in any::<u64>(), amp in 0.01f64..100.0) {
        let f = field(128, 24, seed).scaled(amp);
        let fx = derivative(&f, 1).unwrap();
        prop_assert!(norm_lp(&f, 2.0).powi(2) <= norm_lp(&fx, 2.0).powi(2) + 1e-10 * amp * amp);
    }

    #[test]
    fn first_modes_attain_poincare_equality(c in -3.0f64..3.0, s in -3.0f64..3.0) {
        let f = SpectralField::from_fn(&grid(32), |x| c * x.cos() + s * x.sin()).unwrap();
        let fx = derivative(&f, 1).unwrap();
        let gap = norm_lp(&fx, 2.0).powi(2) - norm_lp(&f, 2.0).powi(2);
        prop_assert!(gap.abs() <= 1e-10);
    }

    #[test]
    fn multiplier_matches_kernel_quadrature(seed in any::<u64>()) {
        let n = 32;
        let f = field(n, 6, seed);
        let hf = hilbert(&f);
        for (j, &x) in f.grid().nodes().iter().enumerate().step_by(5) {
            let oracle = hilbert_pv(|y| f.eval_at(y), x, 8 * n);
            prop_assert!((oracle - hf.samples()[j]).abs() <= 1e-6);
        }
    }

    #[test]
    fn barrier_curvatures_are_bounded_below(a in 0.05f64..5.0, t in 1e-6f64..50.0) {
        let p = BarrierParams::new(a).unwrap();
        let xi = t - a;
        prop_assert!(phi_a_second(xi, &p).unwrap() >= 2.0 - 1e-12);
        prop_assert!(psi_a_second(xi, &p).unwrap() >= 1.0 - 1e-12);
    }

    #[test]
    fn barrier_derivatives_match_differences(a in 0.1f64..3.0, t in 0.0f64..1.0) {
        let p = BarrierParams::new(a).unwrap();
        let xi = -a + 0.01 + t * (10.0 + a - 0.01);
        let h = 1e-5 * (xi + a).min(1.0);
        let d1 = (phi_a(xi + h, &p) - phi_a(xi - h, &p)) / (2.0 * h);
        let d2 = (phi_a_prime(xi + h, &p).unwrap() - phi_a_prime(xi - h, &p).unwrap()) / (2.0 * h);
        let e1 = phi_a_prime(xi, &p).unwrap();
        let e2 = phi_a_second(xi, &p).unwrap();
        prop_assert!((d1 - e1).abs() <= 1e-6 * e1.abs().max(1.0));
        prop_assert!((d2 - e2).abs() <= 1e-6 * e2.abs());
    }

    #[test]
    fn barrier_functional_is_convex(s1 in any::<u64>(), s2 in any::<u64>(), lambda in 0.01f64..0.99) {
        let g = grid(64);
        let p = BarrierParams::new(1.0).unwrap();
        let u = random_admissible(&g, &p, 10, 0.3, &mut rng(s1));
        let v = random_admissible(&g, &p, 10, 0.3, &mut rng(s2));
        let mix = u.lincomb(lambda, 1.0 - lambda, &v).unwrap();
        let lhs = functional_f_a(&mix, &p);
        let rhs = lambda * functional_f_a(&u, &p) + (1.0 - lambda) * functional_f_a(&v, &p);
        prop_assert!(lhs <= rhs + 1e-10);
    }

    #[test]
    fn pairing_b_is_linear(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let (u, w, v) = (field(64, 12, s1), field(64, 12, s2), field(64, 12, s3));
        let lhs = pairing_b(&u.add(&w).unwrap(), &v).unwrap();
        let rhs = pairing_b(&u, &v).unwrap() + pairing_b(&w, &v).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));
    }

    #[test]
    fn pairing_b_is_monotone(s1 in any::<u64>(), s2 in any::<u64>(), amp in 0.01f64..10.0) {
        let u = field(64, 16, s1).scaled(amp);
        let v = field(64, 16, s2);
        let d = u.sub(&v).unwrap();
        prop_assert!(pairing_b(&d, &d).unwrap() >= -1e-10);
    }

    #[test]
    fn hilbert_pairing_obeys_holder_bound(s1 in any::<u64>(), s2 in any::<u64>()) {
        let u = field(128, 16, s1);
        let v = field(128, 16, s2);
        let bound = norm_lp(&derivative(&u, 2).unwrap(), 3.0) * norm_lp(&derivative(&v, 1).unwrap(), 1.5);
        prop_assert!(pairing_h(&u, &v).unwrap().abs() <= bound + 1e-10);
    }

    #[test]
    fn inequality_forms_differ_by_curvature_term(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let g = grid(64);
        let p = BarrierParams::new(1.0).unwrap();
        let u = random_admissible(&g, &p, 8, 0.2, &mut rng(s1));
        let v = random_admissible(&g, &p, 8, 0.2, &mut rng(s2));
        let u_dot = field(64, 8, s3);
        let plain = vi_residual(&u_dot, &u, &v, &p, ViForm::Plain).unwrap().value;
        let conv = vi_residual(&u_dot, &u, &v, &p, ViForm::Convexified).unwrap().value;
        let wxx = derivative(&v.sub(&u).unwrap(), 2).unwrap();
        let half = 0.5 * norm_lp(&wxx, 2.0).powi(2);
        prop_assert!((conv - (plain - half)).abs() <= 1e-10);
    }

    #[test]
    fn step_hessian_dominates_its_lower_bound(s1 in any::<u64>(), s2 in any::<u64>(), tau in 1e-3f64..1.0) {
        let g = grid(64);
        let p = BarrierParams::new(1.0).unwrap();
        let v = random_admissible(&g, &p, 10, 0.3, &mut rng(s1));
        let w = field(64, 20, s2);
        let form = step_objective_hessian_form(&v, &w, &p, tau).unwrap();
        let modal: f64 = (1..g.nyquist())
            .map(|k| {
                let k = k as f64;
                2.0 * k.powi(3) * (2.0 * k - 1.0) * w.coeff(k as i64).norm_sqr()
            })
            .sum();
        let bound = norm_lp(&w, 2.0).powi(2) / tau + 2.0 * PI * modal;
        prop_assert!(bound > 0.0);
        prop_assert!(form >= bound * (1.0 - 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn step_minimizer_is_unique(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let g = grid(64);
        let p = BarrierParams::new(1.0).unwrap();
        let prev = random_admissible(&g, &p, 8, 0.2, &mut rng(s1));
        let init_a = random_admissible(&g, &p, 8, 0.3, &mut rng(s2));
        let init_b = random_admissible(&g, &p, 8, 0.3, &mut rng(s3));
        let cfg = StepConfig::new(0.05);
        let (a, _) = implicit_step_from(&prev, &init_a, &p, &cfg).unwrap();
        let (b, _) = implicit_step_from(&prev, &init_b, &p, &cfg).unwrap();
        prop_assert!(norm_lp(&a.sub(&b).unwrap(), 2.0) <= 1e-8);
    }
}

#[test]
fn grids_of_different_size_do_not_mix() {
    let f = SpectralField::zeros(&PeriodicGrid::new(16).unwrap());
    let g = SpectralField::zeros(&PeriodicGrid::new(32).unwrap());
    assert!(inner_product(&f, &g).is_err());
}
