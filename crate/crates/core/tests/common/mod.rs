//! Independent oracles shared by the integration suites.

#![allow(dead_code)]

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vicinal_core::energy::{min_slope, BarrierParams};
use vicinal_core::spectral::{PeriodicGrid, SpectralField};
use vicinal_core::variational::random_band_limited;

/// Principal-value conjugate function
/// `(1/2pi) PV integral f(x - y) cot(y/2) dy` by the periodic midpoint rule
/// on `m` cells. The midpoints sit symmetrically about the singularity, so
/// the odd part of the kernel cancels exactly and the rule stays spectrally
/// accurate.
pub fn hilbert_pv(f: impl Fn(f64) -> f64, x: f64, m: usize) -> f64 {
    let h = 2.0 * PI / m as f64;
    let fx = f(x);
    (0..m)
        .map(|i| {
            let y = (i as f64 + 0.5) * h;
            (f(x - y) - fx) / (0.5 * y).tan()
        })
        .sum::<f64>()
        * h
        / (2.0 * PI)
}

/// Root of an increasing function on `[lo, hi]` by plain bisection.
pub fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random field with `min(u_xx + a) >= a/2`, rescaling a unit-norm draw.
pub fn random_admissible(
    grid: &PeriodicGrid,
    p: &BarrierParams,
    max_k: usize,
    amplitude: f64,
    rng: &mut ChaCha8Rng,
) -> SpectralField {
    let mut u = random_band_limited(grid, max_k, rng).scaled(amplitude);
    while min_slope(&u, p) < 0.5 * p.a() {
        u = u.scaled(0.5);
    }
    u
}

pub fn grid(n: usize) -> PeriodicGrid {
    PeriodicGrid::new(n).expect("valid grid size")
}

pub fn params(a: f64) -> BarrierParams {
    BarrierParams::new(a).expect("positive a")
}

pub fn sine(grid: &PeriodicGrid, k: f64, amp: f64) -> SpectralField {
    SpectralField::from_fn(grid, |x| amp * (k * x).sin()).expect("zero mean")
}

pub fn cosine(grid: &PeriodicGrid, k: f64, amp: f64) -> SpectralField {
    SpectralField::from_fn(grid, |x| amp * (k * x).cos()).expect("zero mean")
}
