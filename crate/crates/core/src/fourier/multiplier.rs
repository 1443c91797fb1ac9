//! Laplace-transform-type multipliers `a(-Δ)` with
//! `a(λ) = ∫₀^∞ λ A(t) e^{-λt} dt`, and the imaginary powers `(-Δ)^{is}`.
//!
//! With `t = e^v / λ` the integral becomes `∫ A(e^v/λ) exp(v - e^v) dv`,
//! whose weight decays doubly exponentially as `v → +∞` and exponentially as
//! `v → -∞`; the trapezoid rule on a truncated range converges geometrically.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::fft::{wavevector, Spectrum};
use super::field::{ComplexField, FormField};
use crate::error::{domain, Error, Result};
use crate::exec::Exec;
use crate::heat_matrix::p_star;
use crate::special::gamma;

type Kernel = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// A bounded function `A(t)` on `t > 0` together with the data needed to
/// apply `a(-Δ)`.
#[derive(Clone)]
pub struct SpectralSymbol {
    label: String,
    kernel: Kernel,
    sup: f64,
    zero_limit: Option<Complex64>,
}

impl fmt::Debug for SpectralSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralSymbol")
            .field("label", &self.label)
            .field("sup", &self.sup)
            .field("zero_limit", &self.zero_limit)
            .finish()
    }
}

impl SpectralSymbol {
    /// `sup` is an upper bound for `|A|`; `zero_limit` is `lim_{λ→0⁺} a(λ)`
    /// when it exists (the zero frequency is multiplied by it, or by `0`).
    pub fn new<F>(label: impl Into<String>, sup: f64, zero_limit: Option<Complex64>, a: F) -> Self
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            kernel: Arc::new(a),
            sup,
            zero_limit,
        }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(format!("constant({c})"), c.norm(), Some(c), move |_| c)
    }

    /// `A(t) = e^{-μt}`, so `a(λ) = λ / (λ + μ)`.
    pub fn exponential(mu: f64) -> Result<Self> {
        if !(mu > 0.0) {
            return domain("exponential rate must be positive");
        }
        Ok(Self::new(
            format!("exponential({mu})"),
            1.0,
            Some(Complex64::default()),
            move |t| Complex64::new((-mu * t).exp(), 0.0),
        ))
    }

    /// `A(t) = t^{-is} / Γ(1 - is)`, for which `a(λ) = λ^{is}`.
    pub fn imaginary_power(s: f64) -> Result<Self> {
        if !s.is_finite() {
            return domain("imaginary power must be finite");
        }
        let inv = 1.0 / gamma(Complex64::new(1.0, -s));
        let limit = if s == 0.0 {
            Some(Complex64::new(1.0, 0.0))
        } else {
            None
        };
        Ok(Self::new(
            format!("imaginary_power({s})"),
            inv.norm(),
            limit,
            move |t| inv * Complex64::new(0.0, -s * t.ln()).exp(),
        ))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn sup(&self) -> f64 {
        self.sup
    }

    pub fn zero_limit(&self) -> Option<Complex64> {
        self.zero_limit
    }

    pub fn eval_kernel(&self, t: f64) -> Complex64 {
        (self.kernel)(t)
    }
}

/// Truncated-trapezoid settings for [`laplace_symbol_eval`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadConfig {
    /// Relative accuracy target.
    pub target: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub initial_step: f64,
    pub max_nodes: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            target: 1e-8,
            v_min: -45.0,
            v_max: 5.0,
            initial_step: 0.5,
            max_nodes: 1 << 16,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaplaceValue {
    pub value: Complex64,
    pub error_estimate: f64,
    pub nodes: usize,
}

/// `a(λ)` by step-halving trapezoid sums, stopping when two successive sums
/// agree to the relative target.
pub fn laplace_symbol_eval(
    sym: &SpectralSymbol,
    lambda: f64,
    cfg: &QuadConfig,
) -> Result<LaplaceValue> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return domain(format!("λ must be positive, got {lambda}"));
    }
    if !(cfg.target > 0.0) || !(cfg.v_max > cfg.v_min) || !(cfg.initial_step > 0.0) {
        return domain("invalid quadrature configuration");
    }
    let integrand = |v: f64| sym.eval_kernel(v.exp() / lambda) * (v - v.exp()).exp();
    let width = cfg.v_max - cfg.v_min;
    let mut cells = (width / cfg.initial_step).ceil().max(1.0) as usize;
    let mut h = width / cells as f64;
    let mut sum: Complex64 = (0..=cells)
        .map(|j| {
            let w = if j == 0 || j == cells { 0.5 } else { 1.0 };
            integrand(cfg.v_min + j as f64 * h) * w
        })
        .sum();
    let mut value = sum * h;
    loop {
        let fresh: Complex64 = (0..cells)
            .map(|j| integrand(cfg.v_min + (j as f64 + 0.5) * h))
            .sum();
        sum += fresh;
        cells *= 2;
        h *= 0.5;
        let next = sum * h;
        let err = (next - value).norm();
        value = next;
        if !err.is_finite() {
            return Err(Error::Accuracy {
                achieved: err,
                target: cfg.target,
            });
        }
        if err <= cfg.target * value.norm() {
            return Ok(LaplaceValue {
                value,
                error_estimate: err,
                nodes: cells + 1,
            });
        }
        if cells + 1 > cfg.max_nodes {
            let achieved = err / value.norm().max(f64::MIN_POSITIVE);
            return Err(Error::Accuracy {
                achieved,
                target: cfg.target,
            });
        }
    }
}

/// `(p* - 1) / |Γ(1 - is)|`.
pub fn imaginary_power_constant(s: f64, p: f64) -> Result<f64> {
    if s == 0.0 {
        return Ok(p_star(p)? - 1.0);
    }
    Ok((p_star(p)? - 1.0) / gamma(Complex64::new(1.0, -s)).norm())
}

/// `(p* - 1) √(sinh(πs) / (πs))`, extended by continuity at `s = 0`.
pub fn imaginary_power_constant_closed_form(s: f64, p: f64) -> Result<f64> {
    let x = PI * s.abs();
    let ratio = if x < 1e-8 {
        1.0 + x * x / 6.0
    } else {
        x.sinh() / x
    };
    Ok((p_star(p)? - 1.0) * ratio.sqrt())
}

/// Multiplies the Fourier coefficients of every component by `a(4π²|ξ|²)`.
/// The zero frequency uses the symbol's declared limit, else `0`.
pub fn apply_spectral_multiplier(
    sym: &SpectralSymbol,
    f: &FormField,
    cfg: &QuadConfig,
    exec: Exec,
) -> Result<ComplexField> {
    f.check_finite()?;
    let mut spec = Spectrum::of(f, exec);
    let grid = f.grid().clone();
    // a depends on |k|² only.
    let mut shells = BTreeMap::new();
    let mut k = vec![0i64; grid.dim()];
    for flat in 0..grid.len() {
        wavevector(&grid, flat, &mut k);
        shells.insert(k.iter().map(|v| v * v).sum::<i64>(), Complex64::default());
    }
    let keys: Vec<i64> = shells.keys().copied().collect();
    let scale = 4.0 * PI * PI / (grid.length() * grid.length());
    let values = exec.map(keys.len(), |i| {
        if keys[i] == 0 {
            Ok(sym.zero_limit().unwrap_or_default())
        } else {
            laplace_symbol_eval(sym, scale * keys[i] as f64, cfg).map(|v| v.value)
        }
    });
    for (key, value) in keys.iter().zip(values) {
        shells.insert(*key, value?);
    }
    spec.apply_scalar(exec, |k, _| shells[&k.iter().map(|v| v * v).sum::<i64>()]);
    Ok(spec.synthesize(exec))
}
