//! Heat extensions and spectral gradients.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::fft::{wavevector, Spectrum};
use super::field::{FormField, Grid};
use super::symbol::REAL_OUTPUT_TOL;
use crate::error::{domain, Result};
use crate::exec::Exec;

/// `|k/L|²` for an integer wave vector.
pub(crate) fn xi_sq(k: &[i64], length: f64) -> f64 {
    k.iter().map(|&v| (v * v) as f64).sum::<f64>() / (length * length)
}

/// The heat factor `exp(-2π²|ξ|² t)` of `e^{½tΔ}`.
pub fn heat_factor(xi_sq: f64, t: f64) -> f64 {
    (-2.0 * PI * PI * xi_sq * t).exp()
}

pub fn heat_extension(f: &FormField, t: f64) -> Result<FormField> {
    heat_extension_with(f, t, Exec::default())
}

/// `u(·, t) = e^{½tΔ} f`.
pub fn heat_extension_with(f: &FormField, t: f64, exec: Exec) -> Result<FormField> {
    if !(t >= 0.0) || !t.is_finite() {
        return domain(format!("heat time must be finite and nonnegative, got {t}"));
    }
    f.check_finite()?;
    if t == 0.0 {
        return Ok(f.clone());
    }
    let mut spec = Spectrum::of(f, exec);
    let length = f.grid().length();
    spec.apply_scalar(exec, |k, _| {
        Complex64::new(heat_factor(xi_sq(k, length), t), 0.0)
    });
    spec.synthesize(exec).into_real(REAL_OUTPUT_TOL)
}

/// Coefficients of `∂_a` applied to a spectrum, optionally after the heat
/// flow for time `t`. The Nyquist mode of axis `a` is dropped so that real
/// fields have real derivatives.
pub(crate) fn gradient_coeffs(spec: &Spectrum, axis: usize, t: f64) -> Vec<Vec<Complex64>> {
    let grid = spec.grid();
    let length = grid.length();
    let mut k = vec![0i64; grid.dim()];
    let factors: Vec<Complex64> = (0..grid.len())
        .map(|flat| {
            let nyq = wavevector(grid, flat, &mut k);
            if nyq & (1 << axis) != 0 {
                return Complex64::default();
            }
            let decay = if t > 0.0 {
                heat_factor(xi_sq(&k, length), t)
            } else {
                1.0
            };
            Complex64::new(0.0, 2.0 * PI * k[axis] as f64 / length * decay)
        })
        .collect();
    spec.coeffs()
        .iter()
        .map(|c| c.iter().zip(&factors).map(|(a, b)| a * b).collect())
        .collect()
}

pub fn spectral_gradient(f: &FormField) -> Result<Vec<FormField>> {
    spectral_gradient_with(f, Exec::default())
}

/// `∂_a f` for every axis `a`, each with the components of `f`.
pub fn spectral_gradient_with(f: &FormField, exec: Exec) -> Result<Vec<FormField>> {
    f.check_finite()?;
    let spec = Spectrum::of(f, exec);
    (0..f.dim())
        .map(|a| {
            let d = Spectrum::from_coeffs(f, gradient_coeffs(&spec, a, 0.0));
            d.synthesize(exec).into_real(REAL_OUTPUT_TOL)
        })
        .collect()
}

/// Pointwise `‖∇u(x, t)‖` (summed over axes and components) on the grid, for
/// `u` the heat extension of the field whose spectrum is given.
pub(crate) fn heat_gradient_norms(spec: &Spectrum, t: f64, exec: Exec) -> Vec<f64> {
    let grid: &Grid = spec.grid();
    let mut acc = vec![0.0; grid.len()];
    for a in 0..grid.dim() {
        let coeffs = gradient_coeffs(spec, a, t);
        let d = Spectrum {
            coeffs,
            ..spec.clone_shape()
        };
        for comp in d.synthesize(exec).components() {
            acc.iter_mut()
                .zip(comp)
                .for_each(|(s, v)| *s += v.re * v.re);
        }
    }
    acc.iter_mut().for_each(|v| *v = v.sqrt());
    acc
}

/// `∫ ‖∇u(x, t)‖² dx` evaluated from the coefficients (Parseval).
pub(crate) fn gradient_energy(spec: &Spectrum, t: f64) -> f64 {
    let grid = spec.grid();
    let length = grid.length();
    let mut k = vec![0i64; grid.dim()];
    let weights: Vec<f64> = (0..grid.len())
        .map(|flat| {
            wavevector(grid, flat, &mut k);
            let q = xi_sq(&k, length);
            4.0 * PI * PI * q * heat_factor(q, t).powi(2)
        })
        .collect();
    let terms: Vec<f64> = spec
        .coeffs()
        .iter()
        .flat_map(|c| c.iter().zip(&weights).map(|(a, w)| a.norm_sqr() * w))
        .collect();
    grid.volume() * crate::exec::pairwise_sum(&terms)
}
