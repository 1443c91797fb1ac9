//! Off-grid evaluation of a field as the trigonometric polynomial
//! `Re Σ_k c_k exp(2πi k·x/L)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::fft::{wavevector, Spectrum};
use super::field::FormField;
use super::ops::heat_factor;
use crate::exec::Exec;

/// Coefficients with modulus below this are dropped.
const COEFF_FLOOR: f64 = 1e-14;

#[derive(Clone, Debug)]
pub struct TrigPolynomial {
    n: usize,
    length: f64,
    /// Wave numbers `k/L` of the retained modes.
    xis: Vec<Vec<f64>>,
    /// Per mode, one coefficient per component.
    coeffs: Vec<Vec<Complex64>>,
    components: usize,
}

impl TrigPolynomial {
    pub fn from_field(f: &FormField) -> Self {
        let spec = Spectrum::of(f, Exec::Sequential);
        let grid = f.grid();
        let scale = spec
            .coeffs()
            .iter()
            .flatten()
            .fold(0.0f64, |m, c| m.max(c.norm()));
        let mut xis = Vec::new();
        let mut coeffs = Vec::new();
        let mut k = vec![0i64; grid.dim()];
        for flat in 0..grid.len() {
            let cs: Vec<Complex64> = spec.coeffs().iter().map(|c| c[flat]).collect();
            if cs.iter().all(|c| c.norm() <= COEFF_FLOOR * scale) {
                continue;
            }
            wavevector(grid, flat, &mut k);
            xis.push(k.iter().map(|&v| v as f64 / grid.length()).collect());
            coeffs.push(cs);
        }
        Self {
            n: grid.dim(),
            length: grid.length(),
            xis,
            coeffs,
            components: f.components().len(),
        }
    }

    pub fn modes(&self) -> usize {
        self.xis.len()
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// The heat extension `e^{½tΔ}` of this polynomial.
    pub fn at_time(&self, t: f64) -> Self {
        let mut out = self.clone();
        for (xi, cs) in out.xis.iter().zip(out.coeffs.iter_mut()) {
            let q: f64 = xi.iter().map(|v| v * v).sum();
            let d = heat_factor(q, t);
            cs.iter_mut().for_each(|c| *c *= d);
        }
        out
    }

    /// Component values at `x`.
    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (xi, cs) in self.xis.iter().zip(&self.coeffs) {
            let phase: f64 = xi.iter().zip(x).map(|(a, b)| a * b).sum();
            let e = Complex64::from_polar(1.0, 2.0 * PI * phase);
            for (o, c) in out.iter_mut().zip(cs) {
                *o += (c * e).re;
            }
        }
    }

    /// `grad[a * components + c] = ∂_a f_c (x)`.
    pub fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        grad.iter_mut().for_each(|v| *v = 0.0);
        for (xi, cs) in self.xis.iter().zip(&self.coeffs) {
            let phase: f64 = xi.iter().zip(x).map(|(a, b)| a * b).sum();
            let e = Complex64::from_polar(1.0, 2.0 * PI * phase);
            for (c, coef) in cs.iter().enumerate() {
                // d/dx Re(c e^{iθ}) = Re(i c e^{iθ}) θ'
                let v = -(coef * e).im;
                for a in 0..self.n {
                    grad[a * self.components + c] += v * 2.0 * PI * xi[a];
                }
            }
        }
    }

    /// Mean of each component over the torus.
    pub fn means(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.components];
        for (xi, cs) in self.xis.iter().zip(&self.coeffs) {
            if xi.iter().all(|&v| v == 0.0) {
                out.iter_mut().zip(cs).for_each(|(o, c)| *o += c.re);
            }
        }
        out
    }

    /// `|ξ|²` of the slowest nonconstant mode.
    pub fn slowest_rate(&self) -> Option<f64> {
        self.xis
            .iter()
            .map(|xi| xi_sq_f(xi))
            .filter(|&q| q > 0.0)
            .fold(None, |m: Option<f64>, q| Some(m.map_or(q, |m| m.min(q))))
    }
}

fn xi_sq_f(xi: &[f64]) -> f64 {
    xi.iter().map(|v| v * v).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::field::Grid;
    use crate::fourier::ops::{heat_extension, spectral_gradient};

    fn field() -> FormField {
        let grid = Grid::new(vec![16, 8], 2.0).unwrap();
        FormField::from_fn(grid, &[0, 1], |s, x| {
            let m = s.mask() as f64;
            (PI * (x[0] + m * x[1])).sin() + 0.3 * (2.0 * PI * x[0]).cos() + m
        })
        .unwrap()
    }

    #[test]
    fn matches_grid_values_heat_and_gradient() {
        let f = field();
        let tp = TrigPolynomial::from_field(&f);
        let t = 0.05;
        let u = heat_extension(&f, t).unwrap();
        let tu = tp.at_time(t);
        let grads = spectral_gradient(&f).unwrap();
        let grid = f.grid().clone();
        let c = f.components().len();
        let mut x = vec![0.0; 2];
        let mut val = vec![0.0; c];
        let mut grad = vec![0.0; 2 * c];
        for flat in (0..grid.len()).step_by(7) {
            grid.point(flat, &mut x);
            tp.eval(&x, &mut val);
            for (v, comp) in val.iter().zip(f.components()) {
                assert!((v - comp[flat]).abs() < 1e-12);
            }
            tu.eval(&x, &mut val);
            for (v, comp) in val.iter().zip(u.components()) {
                assert!((v - comp[flat]).abs() < 1e-12);
            }
            tp.gradient(&x, &mut grad);
            for a in 0..2 {
                for i in 0..c {
                    assert!((grad[a * c + i] - grads[a].components()[i][flat]).abs() < 1e-11);
                }
            }
        }
        assert_eq!(tp.means().len(), c);
        assert!((tp.means()[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn off_grid_gradient_matches_difference_quotient() {
        let tp = TrigPolynomial::from_field(&field());
        let x = [0.3141, 1.777];
        let c = tp.components();
        let mut grad = vec![0.0; 2 * c];
        tp.gradient(&x, &mut grad);
        let h = 1e-6;
        let (mut a, mut b) = (vec![0.0; c], vec![0.0; c]);
        for axis in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[axis] += h;
            xm[axis] -= h;
            tp.eval(&xp, &mut a);
            tp.eval(&xm, &mut b);
            for i in 0..c {
                assert!(((a[i] - b[i]) / (2.0 * h) - grad[axis * c + i]).abs() < 1e-7);
            }
        }
        assert!((tp.slowest_rate().unwrap() - 0.25).abs() < 1e-15);
    }
}
