//! Duality pairings of the Hilbert operator and of its monotone
//! regularisation `B`, plus the variational-inequality residuals used to
//! certify computed states.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energy::{functional_f_a, functional_psi, BarrierParams};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::spectral::{
    check_same_grid, derivative, dot_quadrature, hilbert, inner_product, norm_lp, PeriodicGrid,
    SpectralField,
};

/// `<H u, v> = integral H(u_xx) v_x dx`.
pub fn pairing_h(u: &SpectralField, v: &SpectralField) -> Result<f64> {
    check_same_grid(u, v)?;
    let h_uxx = hilbert(&derivative(u, 2)?);
    let vx = derivative(v, 1)?;
    Ok(dot_quadrature(u.grid(), h_uxx.samples(), vx.samples()))
}

/// `<B u, v> = integral u_xx v_xx dx - <H u, v>`.
pub fn pairing_b(u: &SpectralField, v: &SpectralField) -> Result<f64> {
    check_same_grid(u, v)?;
    let uxx = derivative(u, 2)?;
    let vxx = derivative(v, 2)?;
    Ok(dot_quadrature(u.grid(), uxx.samples(), vxx.samples()) - pairing_h(u, v)?)
}

/// `||w_xx||^2 - <H w, w> = <B w, w>`, non-negative by the sharp Poincare
/// inequality and the Hilbert isometry.
pub fn monotonicity_gap(w: &SpectralField) -> f64 {
    pairing_b(w, w).expect("same field, same grid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViForm {
    /// `<u_t, v-u> - <H u, v-u> + F_a(v) - F_a(u) >= 0`.
    Plain,
    /// `<u_t, v-u> + <B u, v-u> + psi(v) - psi(u) >= 0`.
    Convexified,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViResidual {
    pub value: f64,
    pub direction_id: String,
    pub convexified: bool,
}

/// Left-hand side of the selected variational inequality at `u` tested with
/// `v`. `+inf` when `v` is inadmissible.
pub fn vi_residual(
    u_dot: &SpectralField,
    u: &SpectralField,
    v: &SpectralField,
    p: &BarrierParams,
    form: ViForm,
) -> Result<ViResidual> {
    check_same_grid(u, u_dot)?;
    check_same_grid(u, v)?;
    let convexified = form == ViForm::Convexified;
    let (fu, fv) = match form {
        ViForm::Plain => (functional_f_a(u, p), functional_f_a(v, p)),
        ViForm::Convexified => (functional_psi(u, p), functional_psi(v, p)),
    };
    if fu.is_infinite() {
        return Err(Error::Inadmissible {
            min_slope: crate::energy::min_slope(u, p),
        });
    }
    let value = if fv.is_infinite() {
        f64::INFINITY
    } else {
        let w = v.sub(u)?;
        let operator = match form {
            ViForm::Plain => -pairing_h(u, &w)?,
            ViForm::Convexified => pairing_b(u, &w)?,
        };
        inner_product(u_dot, &w)? + operator + (fv - fu)
    };
    Ok(ViResidual {
        value,
        direction_id: String::new(),
        convexified,
    })
}

/// Acceptance threshold for "residual >= 0": `-1e-8 * (1 + ||u||_2)`.
pub fn vi_tolerance(u: &SpectralField) -> f64 {
    -1e-8 * (1.0 + norm_lp(u, 2.0))
}

/// Random real trigonometric polynomial with modes `1..=max_k`, coefficient
/// magnitudes decaying like `1/k^2`, scaled to unit L2 norm.
pub fn random_band_limited<R: Rng>(grid: &PeriodicGrid, max_k: usize, rng: &mut R) -> SpectralField {
    let max_k = max_k.min(grid.nyquist() - 1).max(1);
    let mut coeffs = vec![num_complex::Complex64::new(0.0, 0.0); grid.nyquist() + 1];
    for (k, c) in coeffs.iter_mut().enumerate().take(max_k + 1).skip(1) {
        let scale = 1.0 / (k * k) as f64;
        *c = num_complex::Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale;
    }
    let f = SpectralField::from_spectrum(grid, coeffs).expect("length matches grid");
    let norm = norm_lp(&f, 2.0);
    if norm > 0.0 {
        f.scaled(1.0 / norm)
    } else {
        f
    }
}

#[derive(Debug, Clone)]
pub struct ViDirection {
    pub id: String,
    pub field: SpectralField,
}

/// Admissible test fields `u +- eps e` with `e` running over unit-norm
/// `sin kx`, `cos kx` (`k <= 8`) and eight random band-limited fields. `eps`
/// starts at 0.1 and is halved until `min(v_xx + a) > 0`.
pub fn vi_direction_battery(u: &SpectralField, p: &BarrierParams, seed: u64) -> Vec<ViDirection> {
    let grid = u.grid();
    let max_mode = 8.min(grid.nyquist() - 1);
    let unit = 1.0 / PI.sqrt();
    let mut bases: Vec<(String, SpectralField)> = Vec::new();
    for k in 1..=max_mode {
        let kf = k as f64;
        bases.push((
            format!("sin{k}"),
            SpectralField::from_fn(grid, |x| unit * (kf * x).sin()).expect("zero mean"),
        ));
        bases.push((
            format!("cos{k}"),
            SpectralField::from_fn(grid, |x| unit * (kf * x).cos()).expect("zero mean"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for r in 0..8 {
        bases.push((format!("rand{r}"), random_band_limited(grid, grid.n() / 4, &mut rng)));
    }

    let mut out = Vec::with_capacity(2 * bases.len());
    for (name, e) in bases {
        for sign in [1.0, -1.0] {
            let mut eps = 0.1;
            let mut v = u.lincomb(1.0, sign * eps, &e).expect("same grid");
            while crate::energy::min_slope(&v, p) <= 0.0 && eps > 1e-12 {
                eps *= 0.5;
                v = u.lincomb(1.0, sign * eps, &e).expect("same grid");
            }
            let tag = if sign > 0.0 { '+' } else { '-' };
            out.push(ViDirection {
                id: format!("{tag}{name}"),
                field: v,
            });
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct ViCertificate {
    pub residuals: Vec<ViResidual>,
    pub min_value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Evaluate both inequality forms on every direction.
pub fn certify_vi(
    u_dot: &SpectralField,
    u: &SpectralField,
    p: &BarrierParams,
    directions: &[ViDirection],
    exec: Execution,
) -> Result<ViCertificate> {
    let forms = [ViForm::Plain, ViForm::Convexified];
    let results = exec.map_range(2 * directions.len(), |i| {
        let dir = &directions[i / 2];
        vi_residual(u_dot, u, &dir.field, p, forms[i % 2]).map(|mut r| {
            r.direction_id = dir.id.clone();
            r
        })
    });
    let residuals = results.into_iter().collect::<Result<Vec<_>>>()?;
    let min_value = residuals.iter().map(|r| r.value).fold(f64::INFINITY, f64::min);
    let tolerance = vi_tolerance(u);
    Ok(ViCertificate {
        passed: min_value >= tolerance,
        residuals,
        min_value,
        tolerance,
    })
}
