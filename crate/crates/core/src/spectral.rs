//! Uniform periodic grid on [-pi, pi) and the zero-mean field type built on it.
//!
//! A [`SpectralField`] stores nodal samples and the half spectrum
//! `c_0 ..= c_{n/2}` side by side. Coefficients follow the continuous
//! convention `c_k = (1/2pi) * integral f(x) exp(-ikx) dx`, realised on the
//! nodes `x_j = -pi + 2 pi j / n`, so `sin x` has `c_1 = -i/2`. Negative
//! wavenumbers are implied by conjugate symmetry.
//!
//! The Nyquist mode `k = n/2` is carried (as a real coefficient) so that
//! nodal values of nonlinear constructions survive the round trip. Every
//! odd-order operator (first and third derivatives, single antiderivative,
//! Hilbert transform) drops it: its image vanishes at every node anyway.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    nodes: Vec<f64>,
}

/// `n` uniformly spaced nodes on `[-pi, pi)`. Cloning is cheap; FFT plans are
/// shared.
#[derive(Clone)]
pub struct PeriodicGrid {
    n: usize,
    plans: Arc<Plans>,
}

impl fmt::Debug for PeriodicGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicGrid").field("n", &self.n).finish()
    }
}

impl PartialEq for PeriodicGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl PeriodicGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(n));
        }
        let mut planner = FftPlanner::new();
        let nodes = (0..n)
            .map(|j| -PI + 2.0 * PI * j as f64 / n as f64)
            .collect();
        Ok(Self {
            n,
            plans: Arc::new(Plans {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
                nodes,
            }),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Index of the Nyquist wavenumber, `n / 2`.
    pub fn nyquist(&self) -> usize {
        self.n / 2
    }

    pub fn nodes(&self) -> &[f64] {
        &self.plans.nodes
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes().iter().map(|&x| f(x)).collect()
    }

    /// Uniform-weight quadrature `dx * sum_j values_j`, the trapezoidal rule on
    /// a periodic grid.
    pub fn quadrature(&self, values: &[f64]) -> f64 {
        self.dx() * values.iter().sum::<f64>()
    }

    /// `S_m = sum_j w_j exp(-i m x_j)` for `m = 0 .. n`.
    pub fn exponential_sums(&self, weights: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(weights.len(), self.n);
        let mut buf: Vec<Complex64> = weights.iter().map(|&w| Complex64::new(w, 0.0)).collect();
        self.plans.forward.process(&mut buf);
        for (m, c) in buf.iter_mut().enumerate() {
            if m % 2 == 1 {
                *c = -*c;
            }
        }
        buf
    }

    /// Half spectrum `c_0 ..= c_{n/2}` of arbitrary real samples.
    pub fn spectrum(&self, samples: &[f64]) -> Vec<Complex64> {
        let inv_n = 1.0 / self.n as f64;
        let sums = self.exponential_sums(samples);
        let mut coeffs: Vec<Complex64> = sums[..=self.nyquist()].iter().map(|c| c * inv_n).collect();
        coeffs[self.nyquist()].im = 0.0;
        coeffs
    }

    /// Nodal values of the real trigonometric polynomial with half spectrum
    /// `coeffs`.
    pub fn synthesize(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let n = self.n;
        let nyq = self.nyquist();
        debug_assert_eq!(coeffs.len(), nyq + 1);
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        buf[0] = coeffs[0];
        for k in 1..nyq {
            buf[k] = coeffs[k];
            buf[n - k] = coeffs[k].conj();
        }
        buf[nyq] = Complex64::new(coeffs[nyq].re, 0.0);
        for (m, c) in buf.iter_mut().enumerate() {
            if m % 2 == 1 {
                *c = -*c;
            }
        }
        self.plans.inverse.process(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Spectral derivative of arbitrary (not necessarily zero-mean) samples.
    pub fn differentiate(&self, samples: &[f64], order: u32) -> Vec<f64> {
        let coeffs = self.spectrum(samples);
        self.synthesize(&derivative_coeffs(&coeffs, order))
    }

    /// Hilbert transform of arbitrary samples; the mean is annihilated.
    pub fn hilbert_samples(&self, samples: &[f64]) -> Vec<f64> {
        let coeffs = self.spectrum(samples);
        self.synthesize(&hilbert_coeffs(&coeffs))
    }
}

fn derivative_coeffs(coeffs: &[Complex64], order: u32) -> Vec<Complex64> {
    let nyq = coeffs.len() - 1;
    let mut out: Vec<Complex64> = coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c * Complex64::new(0.0, k as f64).powu(order))
        .collect();
    if order % 2 == 1 {
        out[nyq] = Complex64::new(0.0, 0.0);
    } else {
        out[nyq].im = 0.0;
    }
    out
}

fn hilbert_coeffs(coeffs: &[Complex64]) -> Vec<Complex64> {
    let nyq = coeffs.len() - 1;
    let minus_i = Complex64::new(0.0, -1.0);
    let mut out: Vec<Complex64> = coeffs.iter().map(|c| c * minus_i).collect();
    out[0] = Complex64::new(0.0, 0.0);
    out[nyq] = Complex64::new(0.0, 0.0);
    out
}

/// `(ik)^-order` on `k != 0`; Nyquist kept only for even orders.
fn antiderivative_coeffs(coeffs: &[Complex64], order: u32) -> Vec<Complex64> {
    let nyq = coeffs.len() - 1;
    let mut out = vec![Complex64::new(0.0, 0.0); coeffs.len()];
    for k in 1..=nyq {
        out[k] = coeffs[k] / Complex64::new(0.0, k as f64).powu(order);
    }
    if order % 2 == 1 {
        out[nyq] = Complex64::new(0.0, 0.0);
    } else {
        out[nyq].im = 0.0;
    }
    out
}

/// Real, 2pi-periodic, zero-mean function held as nodal samples plus Fourier
/// coefficients. Immutable after construction.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: PeriodicGrid,
    samples: Vec<f64>,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &PeriodicGrid) -> Self {
        Self {
            grid: grid.clone(),
            samples: vec![0.0; grid.n()],
            coeffs: vec![Complex64::new(0.0, 0.0); grid.nyquist() + 1],
        }
    }

    /// Build from a half spectrum. `c_0` is discarded and the Nyquist
    /// coefficient made real.
    pub fn from_spectrum(grid: &PeriodicGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.nyquist() + 1 {
            return Err(Error::LengthMismatch {
                expected: grid.nyquist() + 1,
                actual: coeffs.len(),
            });
        }
        let mut coeffs = coeffs;
        coeffs[0] = Complex64::new(0.0, 0.0);
        let nyq = grid.nyquist();
        coeffs[nyq].im = 0.0;
        let samples = grid.synthesize(&coeffs);
        Ok(Self {
            grid: grid.clone(),
            samples,
            coeffs,
        })
    }

    /// Sample `f` on the grid and build a field; `f` must have zero mean.
    pub fn from_fn(grid: &PeriodicGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        make_field(grid, grid.sample(f))
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Half spectrum `c_0 ..= c_{n/2}`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `c_k` for any integer `k`; zero beyond the Nyquist index.
    pub fn coeff(&self, k: i64) -> Complex64 {
        let m = k.unsigned_abs() as usize;
        if m >= self.coeffs.len() {
            return Complex64::new(0.0, 0.0);
        }
        if k < 0 {
            self.coeffs[m].conj()
        } else {
            self.coeffs[m]
        }
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.abs()))
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Evaluate the trigonometric interpolant at an arbitrary point.
    pub fn eval_at(&self, x: f64) -> f64 {
        let nyq = self.grid.nyquist();
        let step = Complex64::from_polar(1.0, x);
        let mut phase = step;
        let mut acc = 0.0;
        for k in 1..nyq {
            acc += 2.0 * (self.coeffs[k] * phase).re;
            phase *= step;
        }
        acc + self.coeffs[nyq].re * (nyq as f64 * x).cos()
    }

    /// `alpha * self + beta * other`, computed in both representations.
    pub fn lincomb(&self, alpha: f64, beta: f64, other: &SpectralField) -> Result<SpectralField> {
        check_same_grid(self, other)?;
        Ok(SpectralField {
            grid: self.grid.clone(),
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| alpha * a + beta * b)
                .collect(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a * alpha + b * beta)
                .collect(),
        })
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.lincomb(1.0, 1.0, other)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.lincomb(1.0, -1.0, other)
    }

    pub fn scaled(&self, s: f64) -> SpectralField {
        SpectralField {
            grid: self.grid.clone(),
            samples: self.samples.iter().map(|v| v * s).collect(),
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Sum of `|c_k|^2` over all `k != 0`, both signs.
    pub fn spectral_energy(&self) -> f64 {
        let nyq = self.grid.nyquist();
        let interior: f64 = self.coeffs[1..nyq].iter().map(|c| c.norm_sqr()).sum();
        2.0 * interior + self.coeffs[nyq].norm_sqr()
    }

    /// Share of the spectral energy in wavenumbers `|k| > 3n/8`.
    pub fn top_quarter_fraction(&self) -> f64 {
        let total = self.spectral_energy();
        if total == 0.0 {
            return 0.0;
        }
        let nyq = self.grid.nyquist();
        let cut = 3 * self.grid.n() / 8;
        let top: f64 = (cut + 1..=nyq)
            .map(|k| {
                let w = if k == nyq { 1.0 } else { 2.0 };
                w * self.coeffs[k].norm_sqr()
            })
            .sum();
        top / total
    }

    fn with_coeffs(&self, coeffs: Vec<Complex64>) -> SpectralField {
        let samples = self.grid.synthesize(&coeffs);
        SpectralField {
            grid: self.grid.clone(),
            samples,
            coeffs,
        }
    }
}

pub(crate) fn check_same_grid(f: &SpectralField, g: &SpectralField) -> Result<()> {
    if f.grid != g.grid {
        return Err(Error::GridMismatch {
            left: f.grid.n(),
            right: g.grid.n(),
        });
    }
    Ok(())
}

/// Wrap nodal samples as a field. The mean must already be zero up to
/// `1e-10 * max(1, max|samples|)`; it is then removed exactly.
pub fn make_field(grid: &PeriodicGrid, samples: Vec<f64>) -> Result<SpectralField> {
    if samples.len() != grid.n() {
        return Err(Error::LengthMismatch {
            expected: grid.n(),
            actual: samples.len(),
        });
    }
    let scale = samples.iter().fold(1.0_f64, |m, s| m.max(s.abs()));
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let allowed = 1e-10 * scale;
    if !(mean.abs() <= allowed) {
        return Err(Error::MeanNotZero { mean, allowed });
    }
    let samples = project_zero_mean(&samples);
    let mut coeffs = grid.spectrum(&samples);
    coeffs[0] = Complex64::new(0.0, 0.0);
    Ok(SpectralField {
        grid: grid.clone(),
        samples,
        coeffs,
    })
}

pub fn project_zero_mean(samples: &[f64]) -> Vec<f64> {
    if samples.is_empty() {
        return Vec::new();
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    samples.iter().map(|s| s - mean).collect()
}

/// Periodic Hilbert transform, Fourier multiplier `-i sgn(k)`.
pub fn hilbert(f: &SpectralField) -> SpectralField {
    f.with_coeffs(hilbert_coeffs(&f.coeffs))
}

/// Spectral derivative of order 1 through 4.
pub fn derivative(f: &SpectralField, order: u32) -> Result<SpectralField> {
    if !(1..=4).contains(&order) {
        return Err(Error::InvalidParameter(format!(
            "derivative order must be in 1..=4, got {order}"
        )));
    }
    Ok(f.with_coeffs(derivative_coeffs(&f.coeffs, order)))
}

/// The zero-mean `g` with `g' = f`.
pub fn antiderivative_zero_mean(f: &SpectralField) -> SpectralField {
    f.with_coeffs(antiderivative_coeffs(&f.coeffs, 1))
}

/// The zero-mean `g` with `g'' = f`; keeps the Nyquist mode so nodal second
/// derivatives are reproduced exactly.
pub fn second_antiderivative_zero_mean(f: &SpectralField) -> SpectralField {
    f.with_coeffs(antiderivative_coeffs(&f.coeffs, 2))
}

/// `integral_I f g dx` by uniform-weight quadrature.
pub fn inner_product(f: &SpectralField, g: &SpectralField) -> Result<f64> {
    check_same_grid(f, g)?;
    Ok(dot_quadrature(&f.grid, &f.samples, &g.samples))
}

pub(crate) fn dot_quadrature(grid: &PeriodicGrid, a: &[f64], b: &[f64]) -> f64 {
    grid.dx() * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
}

/// `L^p` norm by uniform-weight quadrature; `p = f64::INFINITY` gives the
/// nodal maximum. Panics if `p < 1`.
pub fn norm_lp(f: &SpectralField, p: f64) -> f64 {
    norm_lp_samples(&f.grid, &f.samples, p)
}

pub fn norm_lp_samples(grid: &PeriodicGrid, samples: &[f64], p: f64) -> f64 {
    assert!(p >= 1.0, "L^p norm needs p >= 1, got {p}");
    if p.is_infinite() {
        return samples.iter().fold(0.0, |m, s| m.max(s.abs()));
    }
    let integral = grid.quadrature(&samples.iter().map(|s| s.abs().powf(p)).collect::<Vec<_>>());
    integral.powf(1.0 / p)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(m);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=m {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    rule
}

/// Running integral `R(x_j) = integral_{-pi}^{x_j} f dx` of the trigonometric
/// interpolant, by 8-point Gauss-Legendre on every cell. Independent of the
/// spectral antiderivative; used to cross-check it.
pub fn running_integral_quadrature(f: &SpectralField) -> Vec<f64> {
    let grid = f.grid();
    let half = 0.5 * grid.dx();
    let rule = gauss_legendre(8);
    let mut out = Vec::with_capacity(grid.n());
    let mut acc = 0.0;
    for &left in grid.nodes() {
        out.push(acc);
        let mid = left + half;
        acc += rule
            .iter()
            .map(|&(t, w)| w * half * f.eval_at(mid + half * t))
            .sum::<f64>();
    }
    out
}

/// Antiderivative by running quadrature plus a constant fixed so the result
/// has zero mean (the same normalization as the truncation reconstruction).
pub fn antiderivative_by_quadrature(f: &SpectralField) -> Result<SpectralField> {
    let running = running_integral_quadrature(f);
    make_field(f.grid(), project_zero_mean(&running))
}
