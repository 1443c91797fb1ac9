//! Complex Gamma function (Lanczos, g = 7, nine terms) in logarithmic form.

use std::f64::consts::PI;

use num_complex::Complex64;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(z)` on some branch of the logarithm; `exp` of it is `Γ(z)`.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Γ(z)Γ(1-z) = π / sin(πz)
        let s = (z * PI).sin();
        return Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma(Complex64::new(1.0, 0.0) - z);
    }
    let w = z - 1.0;
    let mut acc = Complex64::new(LANCZOS_COEF[0], 0.0);
    for (k, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (w + k as f64);
    }
    let t = w + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (w + 0.5) * t.ln() - t + acc.ln()
}

pub fn gamma(z: Complex64) -> Complex64 {
    ln_gamma(z).exp()
}

/// `ln Γ(x)` for real `x > 0`.
pub fn ln_gamma_real(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    ln_gamma(Complex64::new(x, 0.0)).re
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
        (a - b).norm() <= rel * b.norm().max(1e-300)
    }

    #[test]
    fn real_values() {
        let c = |x: f64| Complex64::new(x, 0.0);
        assert!(close(gamma(c(5.0)), c(24.0), 1e-14));
        assert!(close(gamma(c(0.5)), c(PI.sqrt()), 1e-14));
        assert!(close(gamma(c(1.0)), c(1.0), 1e-15));
        assert!(close(gamma(c(-0.5)), c(-2.0 * PI.sqrt()), 1e-13));
        let ln170: f64 = (1..=170).map(|k| (k as f64).ln()).sum();
        assert!((ln_gamma_real(171.0) - ln170).abs() < 1e-12 * ln170);
    }

    #[test]
    fn complex_reference_value() {
        let g = gamma(Complex64::new(4.0, 10.0));
        assert!(close(
            g,
            Complex64::new(0.000_771_534_294_239_966_2, -0.001_019_082_799_041_7),
            1e-11
        ));
    }

    /// `|Γ(1 + it)|² = πt / sinh(πt)`.
    #[test]
    fn modulus_on_the_line_re_one() {
        for &t in &[1e-4, 0.3, 1.0, 2.0, 5.0, 10.0] {
            let g = gamma(Complex64::new(1.0, t)).norm_sqr();
            let exact = PI * t / (PI * t).sinh();
            assert!((g - exact).abs() < 1e-12 * exact, "t={t}");
            let conj = gamma(Complex64::new(1.0, -t)).norm_sqr();
            assert!((conj - g).abs() < 1e-14 * g);
        }
    }

    #[test]
    fn recurrence() {
        for &(re, im) in &[(0.7, 0.2), (2.5, -3.0), (-1.3, 0.8), (10.0, 4.0)] {
            let z = Complex64::new(re, im);
            assert!(close(gamma(z + 1.0), z * gamma(z), 1e-12));
        }
    }
}
