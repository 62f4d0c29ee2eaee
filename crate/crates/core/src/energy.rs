//! Barrier potentials and the energy whose L2 gradient flow is the evolution
//! `u_t = -[H(u_x) + Phi_a'(u_xx)]_xx`.
//!
//! `E(u) = (1/2) integral H(u_x) u_xx dx + F_a(u)` with
//! `F_a(u) = integral Phi_a(u_xx) dx`. The quadratic Hilbert part is
//! non-positive; the cubic growth of `Phi_a` dominates it.
//!
//! Extended-real results use `f64::INFINITY` for `+inf`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spectral::{derivative, SpectralField};

/// The shift `a > 0` in `Phi_a(xi) = Phi(xi + a)`; admissible states keep
/// `u_xx + a > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierParams {
    a: f64,
}

impl BarrierParams {
    pub fn new(a: f64) -> Result<Self> {
        if !a.is_finite() || a <= 1e-8 {
            return Err(Error::InvalidParameter(format!(
                "a must be positive (above 1e-8), got {a}"
            )));
        }
        Ok(Self { a })
    }

    pub fn a(&self) -> f64 {
        self.a
    }
}

/// `Phi(xi)`: `+inf` for `xi < 0`, `0` at `xi = 0`, `xi log xi + xi^3/6` otherwise.
pub fn phi(xi: f64) -> f64 {
    if xi < 0.0 {
        f64::INFINITY
    } else if xi == 0.0 {
        0.0
    } else {
        xi * xi.ln() + xi * xi * xi / 6.0
    }
}

pub fn phi_a(xi: f64, p: &BarrierParams) -> f64 {
    phi(xi + p.a)
}

fn shifted(xi: f64, p: &BarrierParams) -> Result<f64> {
    let s = xi + p.a;
    if s > 0.0 {
        Ok(s)
    } else {
        Err(Error::DomainError { xi, a: p.a })
    }
}

/// `log(xi + a) + (xi + a)^2 / 2 + 1`.
pub fn phi_a_prime(xi: f64, p: &BarrierParams) -> Result<f64> {
    shifted(xi, p).map(barrier_slope)
}

/// `1 / (xi + a) + (xi + a)`, never below 2.
pub fn phi_a_second(xi: f64, p: &BarrierParams) -> Result<f64> {
    shifted(xi, p).map(barrier_curvature)
}

/// `Psi_a(xi) = Phi_a(xi) - xi^2 / 2`, the convexified potential.
pub fn psi_a(xi: f64, p: &BarrierParams) -> f64 {
    let v = phi_a(xi, p);
    if v.is_infinite() {
        v
    } else {
        v - 0.5 * xi * xi
    }
}

/// `xi + a + 1/(xi + a) - 1 >= 1`.
pub fn psi_a_second(xi: f64, p: &BarrierParams) -> Result<f64> {
    shifted(xi, p).map(|s| s + 1.0 / s - 1.0)
}

// Fast paths on the shifted variable s = xi + a > 0.
#[inline]
pub(crate) fn barrier_value(s: f64) -> f64 {
    s * s.ln() + s * s * s / 6.0
}

#[inline]
pub(crate) fn barrier_slope(s: f64) -> f64 {
    s.ln() + 0.5 * s * s + 1.0
}

#[inline]
pub(crate) fn barrier_curvature(s: f64) -> f64 {
    1.0 / s + s
}

pub(crate) fn second_derivative_samples(u: &SpectralField) -> Vec<f64> {
    derivative(u, 2).expect("order 2 is valid").samples().to_vec()
}

/// `min_j (u_xx(x_j) + a)`.
pub fn min_slope(u: &SpectralField, p: &BarrierParams) -> f64 {
    min_shifted(&second_derivative_samples(u), p)
}

pub(crate) fn min_shifted(uxx: &[f64], p: &BarrierParams) -> f64 {
    uxx.iter().fold(f64::INFINITY, |m, v| m.min(v + p.a))
}

/// Quadrature of `Phi_a` over given second-derivative samples.
pub(crate) fn barrier_integral(uxx: &[f64], p: &BarrierParams, dx: f64) -> f64 {
    let mut acc = 0.0;
    for v in uxx {
        let s = v + p.a;
        if !(s > 0.0) {
            return f64::INFINITY;
        }
        acc += barrier_value(s);
    }
    dx * acc
}

/// `F_a(u) = integral Phi_a(u_xx) dx`; `+inf` as soon as a node has
/// `u_xx + a <= 0`.
pub fn functional_f_a(u: &SpectralField, p: &BarrierParams) -> f64 {
    barrier_integral(&second_derivative_samples(u), p, u.grid().dx())
}

/// `psi(u) = integral Psi_a(u_xx) dx`.
pub fn functional_psi(u: &SpectralField, p: &BarrierParams) -> f64 {
    let uxx = second_derivative_samples(u);
    let f = barrier_integral(&uxx, p, u.grid().dx());
    if f.is_infinite() {
        return f;
    }
    f - 0.5 * u.grid().dx() * uxx.iter().map(|v| v * v).sum::<f64>()
}

/// `(1/2) integral H(u_x) u_xx dx = -pi * sum_{k != 0} |k|^3 |c_k|^2`,
/// evaluated on the coefficients.
pub fn hilbert_energy(u: &SpectralField) -> f64 {
    let nyq = u.grid().nyquist();
    let sum: f64 = (1..nyq)
        .map(|k| (k as f64).powi(3) * u.coeffs()[k].norm_sqr())
        .sum();
    -2.0 * PI * sum
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub total: f64,
    pub hilbert_part: f64,
    pub potential_part: f64,
    /// `min_j (u_xx(x_j) + a)`.
    pub min_slope: f64,
}

pub fn energy_total(u: &SpectralField, p: &BarrierParams) -> EnergyReport {
    let uxx = second_derivative_samples(u);
    let hilbert_part = hilbert_energy(u);
    let potential_part = barrier_integral(&uxx, p, u.grid().dx());
    EnergyReport {
        total: hilbert_part + potential_part,
        hilbert_part,
        potential_part,
        min_slope: min_shifted(&uxx, p),
    }
}

/// The unique root of `Phi_a'` on `(-a, inf)`: bisection down to 1e-12, then
/// one Newton polish.
pub fn phi_prime_root(p: &BarrierParams) -> f64 {
    let a = p.a;
    let slope = |xi: f64| barrier_slope(xi + a);
    let mut lo = -a;
    let mut hi = 0.0;
    while slope(hi) <= 0.0 {
        lo = hi;
        hi = 2.0 * hi + 1.0;
    }
    // slope(-a^+) = -inf, so `lo = -a` is a valid open left end.
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if mid <= -a || slope(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let b = 0.5 * (lo + hi);
    let polished = b - slope(b) / barrier_curvature(b + a);
    if polished > -a && slope(polished).abs() <= slope(b).abs() {
        polished
    } else {
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::PeriodicGrid;

    fn params(a: f64) -> BarrierParams {
        BarrierParams::new(a).unwrap()
    }

    #[test]
    fn params_reject_non_positive() {
        assert!(BarrierParams::new(0.0).is_err());
        assert!(BarrierParams::new(-1.0).is_err());
        assert!(BarrierParams::new(1e-9).is_err());
        assert!(BarrierParams::new(f64::NAN).is_err());
        assert!(BarrierParams::new(0.5).is_ok());
    }

    #[test]
    fn phi_values() {
        assert!((phi(1.0) - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(phi(0.0), 0.0);
        assert_eq!(phi(-0.5), f64::INFINITY);
    }

    #[test]
    fn phi_a_derivatives_at_origin() {
        let p = params(1.0);
        assert!((phi_a_prime(0.0, &p).unwrap() - 1.5).abs() < 1e-15);
        assert!((phi_a_second(0.0, &p).unwrap() - 2.0).abs() < 1e-15);
        assert!(phi_a_prime(-1.0 + 1e-15, &p).unwrap() < -30.0);
        assert!(matches!(phi_a_prime(-1.0, &p), Err(Error::DomainError { .. })));
        assert!(matches!(phi_a_second(-2.0, &p), Err(Error::DomainError { .. })));
    }

    #[test]
    fn psi_second_minimum_is_one() {
        for a in [0.5, 1.0, 2.0] {
            let p = params(a);
            assert!((psi_a_second(1.0 - a, &p).unwrap() - 1.0).abs() < 1e-15);
        }
        assert!((psi_a_second(0.0, &params(1.0)).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(psi_a(-3.0, &params(1.0)), f64::INFINITY);
    }

    #[test]
    fn curvature_lower_bounds_on_dense_samples() {
        for a in [0.5, 1.0, 2.0] {
            let p = params(a);
            for i in 0..10_000 {
                let xi = -a + (i as f64 + 0.5) * (10.0 + a) / 10_000.0;
                assert!(psi_a_second(xi, &p).unwrap() >= 1.0 - 1e-14);
                assert!(phi_a_second(xi, &p).unwrap() >= 2.0 - 1e-14);
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let p = params(1.0);
        let h = 1e-5;
        for i in 0..200 {
            let xi = -1.0 + 0.01 + i as f64 * (11.0 - 0.02) / 200.0;
            let fd1 = (phi_a(xi + h, &p) - phi_a(xi - h, &p)) / (2.0 * h);
            let fd2 = (phi_a_prime(xi + h, &p).unwrap() - phi_a_prime(xi - h, &p).unwrap()) / (2.0 * h);
            let d1 = phi_a_prime(xi, &p).unwrap();
            let d2 = phi_a_second(xi, &p).unwrap();
            assert!((fd1 - d1).abs() <= 1e-6 * d1.abs().max(1.0), "xi = {xi}");
            assert!((fd2 - d2).abs() <= 1e-6 * d2.abs().max(1.0), "xi = {xi}");
        }
    }

    #[test]
    fn f_a_examples() {
        let g = PeriodicGrid::new(64).unwrap();
        let p = params(1.0);
        let zero = SpectralField::zeros(&g);
        assert!((functional_f_a(&zero, &p) - PI / 3.0).abs() < 1e-14);
        // u_xx = -1.5 sin x dips below -a.
        let bad = SpectralField::from_fn(&g, |x| 1.5 * x.sin()).unwrap();
        assert_eq!(functional_f_a(&bad, &p), f64::INFINITY);
        // u_xx = 0.5 sin x.
        let ok = SpectralField::from_fn(&g, |x| -0.5 * x.sin()).unwrap();
        let v = functional_f_a(&ok, &p);
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn energy_of_zero_and_sine() {
        let g = PeriodicGrid::new(64).unwrap();
        let p = params(1.0);
        let e0 = energy_total(&SpectralField::zeros(&g), &p);
        assert_eq!(e0.hilbert_part, 0.0);
        assert!((e0.total - PI / 3.0).abs() < 1e-14);
        let s = SpectralField::from_fn(&g, f64::sin).unwrap();
        assert!((hilbert_energy(&s) + PI / 2.0).abs() < 1e-13);
        let e = energy_total(&s, &p);
        assert_eq!(e.total, e.hilbert_part + e.potential_part);
        assert!((e.min_slope - 0.0).abs() < 1e-12);
    }

    #[test]
    fn root_of_slope() {
        for a in [0.5, 1.0, 2.0] {
            let p = params(a);
            let b = phi_prime_root(&p);
            assert!(b > -a);
            assert!(phi_a_prime(b, &p).unwrap().abs() <= 1e-12);
            assert!(phi_a_prime(b - 1e-9, &p).unwrap() < 0.0);
            assert!(phi_a_prime(b + 1e-9, &p).unwrap() > 0.0);
            assert_eq!(b <= 0.0, phi_a_prime(0.0, &p).unwrap() >= 0.0);
        }
    }

    #[test]
    fn root_on_positive_side_for_small_a() {
        // Phi_a'(0) = log a + a^2/2 + 1 < 0 for a = 0.1, so the root b_1 >= 0.
        let p = params(0.1);
        let b = phi_prime_root(&p);
        assert!(b >= 0.0);
        assert!(phi_a_prime(b, &p).unwrap().abs() <= 1e-12);
    }
}
