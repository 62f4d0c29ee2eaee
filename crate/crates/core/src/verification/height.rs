//! Recovery of the surface height `h = u_x + a x` and the two equivalent
//! forms of the flux bracket.

use std::f64::consts::PI;

use crate::energy::{barrier_slope, second_derivative_samples, BarrierParams};
use crate::error::Result;
use crate::spectral::{derivative, hilbert, make_field, project_zero_mean, SpectralField};

/// `(x_j, h(x_j))` with `h = u_x + a x`, so that `h(-pi) = u_x(-pi) - a pi`.
pub fn surface_height(u: &SpectralField, p: &BarrierParams) -> Vec<(f64, f64)> {
    let ux = derivative(u, 1).expect("order 1 is supported");
    u.grid()
        .nodes()
        .iter()
        .zip(ux.samples())
        .map(|(&x, &d)| (x, d + p.a() * x))
        .collect()
}

/// `h` at an arbitrary `x`, through the trigonometric interpolant of `u_x`.
pub fn surface_height_at(u: &SpectralField, p: &BarrierParams, x: f64) -> f64 {
    let ux = derivative(u, 1).expect("order 1 is supported");
    ux.eval_at(x) + p.a() * x
}

/// `h(x + 2 pi) - h(x)`; equals `2 pi a` for every `x`.
pub fn period_offset(u: &SpectralField, p: &BarrierParams, x: f64) -> f64 {
    surface_height_at(u, p, x + 2.0 * PI) - surface_height_at(u, p, x)
}

/// `h_x = u_xx + a` at the nodes.
pub fn height_slope(u: &SpectralField, p: &BarrierParams) -> Vec<f64> {
    second_derivative_samples(u).iter().map(|v| v + p.a()).collect()
}

/// `H(h_x) + (1/h_x + h_x) h_xx`, written in the height variable.
pub fn height_bracket(u: &SpectralField, p: &BarrierParams) -> Result<Vec<f64>> {
    let hx = height_slope(u, p);
    // H annihilates the constant part of h_x.
    let h_of_hx = hilbert(&derivative(u, 2)?);
    let hxx = derivative(u, 3)?;
    Ok(hx
        .iter()
        .zip(h_of_hx.samples())
        .zip(hxx.samples())
        .map(|((&s, &h), &d)| h + (1.0 / s + s) * d)
        .collect())
}

/// `H(u_xx) + [Phi_a'(u_xx)]_x`, differentiating the nodal potential slope
/// spectrally.
pub fn potential_bracket(u: &SpectralField, p: &BarrierParams) -> Result<Vec<f64>> {
    let uxx = second_derivative_samples(u);
    let slope: Vec<f64> = uxx.iter().map(|v| barrier_slope(v + p.a())).collect();
    let slope = make_field(u.grid(), project_zero_mean(&slope))?;
    let slope_x = derivative(&slope, 1)?;
    let h_uxx = hilbert(&derivative(u, 2)?);
    Ok(h_uxx
        .samples()
        .iter()
        .zip(slope_x.samples())
        .map(|(h, s)| h + s)
        .collect())
}
