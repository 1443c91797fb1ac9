//! Gauss–Legendre rules.

use std::f64::consts::PI;

use crate::error::{domain, Result};

/// Nodes and weights of the `m`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if m == 0 {
        return domain("Gauss–Legendre rule needs at least one node");
    }
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre(m, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let dp = legendre(m, x).1;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    Ok((nodes, weights))
}

/// `(P_m(x), P_m'(x))` by the three-term recurrence.
fn legendre(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, m as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// Integrates `f` over `[a, b]` with a Gauss–Legendre rule given on `[-1, 1]`.
pub fn integrate_gl<F: Fn(f64) -> f64>(rule: &(Vec<f64>, Vec<f64>), a: f64, b: f64, f: F) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule.0
        .iter()
        .zip(&rule.1)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_polynomials() {
        for m in 1..=20 {
            let rule = gauss_legendre(m).unwrap();
            assert!((rule.1.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            for deg in 0..2 * m {
                let got = integrate_gl(&rule, 0.0, 1.0, |x| x.powi(deg as i32));
                assert!(
                    (got - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14,
                    "m={m} deg={deg}"
                );
            }
        }
    }

    #[test]
    fn smooth_integrand() {
        let rule = gauss_legendre(12).unwrap();
        let got = integrate_gl(&rule, 0.0, 2.0, |x| (-x).exp());
        assert!((got - (1.0 - (-2.0f64).exp())).abs() < 1e-15);
        assert!(gauss_legendre(0).is_err());
    }
}
