//! The bilinear heat integral `∫₀^T ∫ ‖∇u‖ ‖∇v‖ dx dt` against
//! `(p* - 1) ‖f‖_p ‖g‖_{p'}`.

use std::f64::consts::PI;

use super::fft::{wavevector, Spectrum};
use super::field::FormField;
use super::ops::{gradient_energy, heat_gradient_norms, xi_sq};
use crate::error::{domain, Error, Result};
use crate::exec::{pairwise_sum, Exec};
use crate::heat_matrix::p_star;
use crate::quadrature::{gauss_legendre, integrate_gl};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PswConfig {
    /// Gauss–Legendre order per panel; the error estimate compares with
    /// order `order + 4`.
    pub order: usize,
    /// Relative accuracy target on the time integral.
    pub target: f64,
    /// Maximum number of panel bisection rounds.
    pub max_rounds: usize,
}

impl Default for PswConfig {
    fn default() -> Self {
        Self {
            order: 8,
            target: 1e-9,
            max_rounds: 12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PswResult {
    pub lhs: f64,
    pub rhs: f64,
    /// Bound on the discarded part `∫_T^∞`.
    pub tail_bound: f64,
    pub quad_error: f64,
}

impl PswResult {
    /// `lhs ≤ rhs + tail + quadrature error + slack`.
    pub fn holds(&self, slack: f64) -> bool {
        self.lhs <= self.rhs + self.tail_bound + self.quad_error + slack
    }
}

pub fn psw_integral(
    f: &FormField,
    g: &FormField,
    p: f64,
    t_max: f64,
    cfg: &PswConfig,
) -> Result<PswResult> {
    psw_integral_with(f, g, p, t_max, cfg, Exec::default())
}

pub fn psw_integral_with(
    f: &FormField,
    g: &FormField,
    p: f64,
    t_max: f64,
    cfg: &PswConfig,
    exec: Exec,
) -> Result<PswResult> {
    if !(t_max > 0.0) || !t_max.is_finite() {
        return domain(format!("t_max must be positive, got {t_max}"));
    }
    if !f.same_shape(g) {
        return Err(Error::Input("f and g must share grid and grades".into()));
    }
    f.check_finite()?;
    g.check_finite()?;
    let ps = p_star(p)?;
    let q = p / (p - 1.0);
    let rhs = (ps - 1.0) * f.lp_norm(p)? * g.lp_norm(q)?;

    let sf = Spectrum::of(f, exec);
    let sg = Spectrum::of(g, exec);
    let (lambda_min, lambda_max) = match frequency_range(&sf, &sg) {
        Some(r) => r,
        None => {
            return Ok(PswResult {
                lhs: 0.0,
                rhs,
                tail_bound: 0.0,
                quad_error: 0.0,
            })
        }
    };

    let cell = f.grid().cell_volume();
    let integrand = |t: f64| {
        let a = heat_gradient_norms(&sf, t, exec);
        let b = heat_gradient_norms(&sg, t, exec);
        let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        cell * pairwise_sum(&prod)
    };

    // Geometric panels t_max 2^{-j} down to where the fastest mode is O(1).
    let c_max = 4.0 * PI * PI * lambda_max;
    let mut edges = vec![t_max];
    while c_max * edges.last().unwrap() > 1.0 && edges.len() < 200 {
        let next = edges.last().unwrap() * 0.5;
        edges.push(next);
    }
    edges.push(0.0);
    edges.reverse();
    let mut pending: Vec<(f64, f64)> = edges.windows(2).map(|w| (w[0], w[1])).collect();

    let low = gauss_legendre(cfg.order)?;
    let high = gauss_legendre(cfg.order + 4)?;
    // (value, error estimate) per accepted panel
    let mut done: Vec<(f64, f64)> = Vec::new();
    for round in 0..=cfg.max_rounds {
        let estimates: Vec<(f64, f64, f64, f64)> = pending
            .iter()
            .map(|&(a, b)| {
                let lo = integrate_gl(&low, a, b, integrand);
                let hi = integrate_gl(&high, a, b, integrand);
                (a, b, hi, (hi - lo).abs())
            })
            .collect();
        let total: f64 = done
            .iter()
            .map(|d| d.0)
            .chain(estimates.iter().map(|e| e.2))
            .sum();
        let per_panel = cfg.target * total.abs() / (done.len() + estimates.len()) as f64;
        pending.clear();
        for (a, b, value, err) in estimates {
            if err > per_panel && round < cfg.max_rounds {
                let mid = 0.5 * (a + b);
                pending.extend([(a, mid), (mid, b)]);
            } else {
                done.push((value, err));
            }
        }
        if pending.is_empty() {
            break;
        }
    }
    let values: Vec<f64> = done.iter().map(|d| d.0).collect();
    let errs: Vec<f64> = done.iter().map(|d| d.1).collect();
    let lhs = pairwise_sum(&values);
    let quad_error = pairwise_sum(&errs);
    if quad_error > cfg.target * lhs.abs() {
        return Err(Error::Accuracy {
            achieved: quad_error / lhs.abs().max(f64::MIN_POSITIVE),
            target: cfg.target,
        });
    }

    let tail_bound = (gradient_energy(&sf, t_max) * gradient_energy(&sg, t_max)).sqrt()
        / (4.0 * PI * PI * lambda_min);
    if !tail_bound.is_finite() {
        return Err(Error::Accuracy {
            achieved: f64::INFINITY,
            target: cfg.target,
        });
    }
    Ok(PswResult {
        lhs,
        rhs,
        tail_bound,
        quad_error,
    })
}

/// Smallest and largest `|ξ|²` carrying a nonzero coefficient in either
/// spectrum, or `None` when both fields are constant.
fn frequency_range(a: &Spectrum, b: &Spectrum) -> Option<(f64, f64)> {
    let grid = a.grid();
    let mut k = vec![0i64; grid.dim()];
    let mut range: Option<(f64, f64)> = None;
    for flat in 1..grid.len() {
        let live = a
            .coeffs()
            .iter()
            .chain(b.coeffs())
            .any(|c| c[flat].norm_sqr() > 0.0);
        if !live {
            continue;
        }
        wavevector(grid, flat, &mut k);
        let q = xi_sq(&k, grid.length());
        range = Some(match range {
            None => (q, q),
            Some((lo, hi)) => (lo.min(q), hi.max(q)),
        });
    }
    range
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::MultiIndex;
    use crate::fourier::field::Grid;

    #[test]
    fn single_mode_equality() {
        let grid = Grid::cube(2, 16, 1.0).unwrap();
        let e1 = MultiIndex::from_elements(2, &[1]).unwrap();
        let f = FormField::from_fn(grid, &[0, 1, 2], |s, x| {
            if *s == e1 {
                (2.0 * PI * x[0]).cos()
            } else {
                0.0
            }
        })
        .unwrap();
        let r = psw_integral(&f, &f, 2.0, 1.0, &PswConfig::default()).unwrap();
        assert!((r.rhs - 0.5).abs() < 1e-12);
        assert!((r.lhs + r.tail_bound - 0.5).abs() < 1e-6);
        assert!(r.tail_bound < 1e-12);
        assert!(r.holds(1e-12));
    }

    #[test]
    fn constant_field_has_zero_lhs() {
        let grid = Grid::cube(2, 8, 1.0).unwrap();
        let f = FormField::from_fn(grid.clone(), &[1], |_, _| 1.0).unwrap();
        let g = FormField::from_fn(grid, &[1], |_, x| (2.0 * PI * x[1]).sin()).unwrap();
        let r = psw_integral(&f, &g, 3.0, 0.5, &PswConfig::default()).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.holds(0.0));
        assert!(psw_integral(&f, &g, 3.0, 0.0, &PswConfig::default()).is_err());
    }
}
