//! Partial contractions `σ·A` of the symmetric (`α = 1/2`) heat matrix with
//! unit vectors `σ ∈ Λ`, and the large-`p` constants built from them.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::exec::{pairwise_sum, Exec};
use crate::exterior::{enumerate_all, interval_count_mask, MultiIndex, MAX_DIM};
use crate::fourier::search::stream_rng;
use crate::heat_matrix::{p_star, spectral_norm};
use crate::special::ln_gamma_real;

/// Tolerance on `Σ σ_I² = 1`.
pub const UNIT_TOL: f64 = 1e-12;

/// Dimensions for which `σ·A` (of size `n × n 2^n`) is assembled densely.
pub const MAX_SIGMA_DIM: usize = 12;

/// A unit vector of `Λ(ℝⁿ)`, indexed by mask.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitDirection {
    n: usize,
    sigma: Vec<f64>,
}

impl UnitDirection {
    pub fn new(n: usize, sigma: Vec<f64>) -> Result<Self> {
        check_dim(n)?;
        if sigma.len() != 1 << n {
            return domain(format!(
                "σ needs {} coordinates, got {}",
                1usize << n,
                sigma.len()
            ));
        }
        if sigma.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("non-finite σ".into()));
        }
        let norm_sq: f64 = sigma.iter().map(|v| v * v).sum();
        if (norm_sq - 1.0).abs() > UNIT_TOL {
            return domain(format!("σ must have unit length, |σ|² = {norm_sq}"));
        }
        Ok(Self { n, sigma })
    }

    /// Rescales a nonzero vector to unit length.
    pub fn normalized(n: usize, mut raw: Vec<f64>) -> Result<Self> {
        let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return domain("cannot normalize a zero or non-finite vector");
        }
        raw.iter_mut().for_each(|v| *v /= norm);
        Self::new(n, raw)
    }

    pub fn indicator(set: &MultiIndex) -> Result<Self> {
        let mut sigma = vec![0.0; 1 << set.dim()];
        sigma[set.mask() as usize] = 1.0;
        Self::new(set.dim(), sigma)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        check_dim(n)?;
        Self::normalized(n, vec![1.0; 1 << n])
    }

    /// Uniform on the sphere `S^{2^n - 1}`.
    pub fn random(n: usize, rng: &mut ChaCha8Rng) -> Result<Self> {
        check_dim(n)?;
        let raw: Vec<f64> = (0..1usize << n)
            .map(|_| rng.sample(StandardNormal))
            .collect();
        Self::normalized(n, raw)
    }

    /// Uniform on the unit sphere of the span of the grade-`r` basis.
    pub fn random_in_grade(n: usize, r: usize, rng: &mut ChaCha8Rng) -> Result<Self> {
        check_dim(n)?;
        if r > n {
            return domain(format!("grade {r} exceeds dimension {n}"));
        }
        let raw: Vec<f64> = (0..1u32 << n)
            .map(|m| {
                if m.count_ones() as usize == r {
                    rng.sample(StandardNormal)
                } else {
                    0.0
                }
            })
            .collect();
        Self::normalized(n, raw)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> &[f64] {
        &self.sigma
    }

    pub fn get(&self, set: &MultiIndex) -> f64 {
        self.sigma[set.mask() as usize]
    }
}

fn check_dim(n: usize) -> Result<()> {
    if !(1..=MAX_SIGMA_DIM.min(MAX_DIM)).contains(&n) {
        return domain(format!("dimension must be in 1..={MAX_SIGMA_DIM}, got {n}"));
    }
    Ok(())
}

fn sign(mask: u32, a: usize, b: usize) -> f64 {
    if interval_count_mask(mask, a, b).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Entry `(σ·A)_{i, Jj}` (1-based `i`, `j`).
pub fn sigma_dot_entry(sigma: &UnitDirection, i: usize, big_j: &MultiIndex, j: usize) -> f64 {
    let m = big_j.mask();
    let (bi, bj) = (1u32 << (i - 1), 1u32 << (j - 1));
    let s = |mask: u32| sigma.sigma[mask as usize];
    let mut v = 0.0;
    if i == j {
        v += if m & bi != 0 { s(m) } else { -s(m) };
    }
    if m & bi != 0 && m & bj == 0 {
        v += s((m & !bi) | bj) * sign(m, i, j);
    }
    if m & bi == 0 && m & bj != 0 {
        v += s((m & !bj) | bi) * sign(m, i, j);
    }
    v
}

/// The `n × (n 2^n)` matrix `σ·A`; columns ordered by `J` (ascending mask),
/// then `j`.
pub fn sigma_dot_matrix(sigma: &UnitDirection) -> Result<DMatrix<f64>> {
    let n = sigma.n;
    let sets = enumerate_all(n)?;
    let mut m = DMatrix::zeros(n, n << n);
    for (c, set) in sets.iter().enumerate() {
        for j in 1..=n {
            for i in 1..=n {
                m[(i - 1, c * n + j - 1)] = sigma_dot_entry(sigma, i, set, j);
            }
        }
    }
    Ok(m)
}

/// The `n × n` block `(σ·A)_J` with rows and columns permuted so that the
/// elements of `J` come first, `[[σ_J I_r, Σ_J], [Σ_Jᵀ, -σ_J I_{n-r}]]`.
#[derive(Clone, Debug)]
pub struct SigmaBlock {
    pub matrix: DMatrix<f64>,
    pub sigma_j: f64,
    /// The `r × (n - r)` matrix `Σ_J`.
    pub off: DMatrix<f64>,
}

impl SigmaBlock {
    /// `σ_J² + ‖Σ_J‖²`.
    pub fn identity_norm_sq(&self) -> Result<f64> {
        let off = if self.off.is_empty() {
            0.0
        } else {
            spectral_norm(&self.off, 1e-14)?
        };
        Ok(self.sigma_j * self.sigma_j + off * off)
    }

    pub fn numeric_norm(&self) -> Result<f64> {
        spectral_norm(&self.matrix, 1e-14)
    }
}

pub fn sigma_block(sigma: &UnitDirection, big_j: &MultiIndex) -> Result<SigmaBlock> {
    let n = sigma.n;
    if big_j.dim() != n {
        return domain("σ and J must share the dimension");
    }
    let order: Vec<usize> = big_j
        .elements()
        .chain(big_j.complement_elements())
        .collect();
    let mut matrix = DMatrix::zeros(n, n);
    for (a, &i) in order.iter().enumerate() {
        for (b, &j) in order.iter().enumerate() {
            matrix[(a, b)] = sigma_dot_entry(sigma, i, big_j, j);
        }
    }
    let r = big_j.grade();
    let off = matrix.view((0, r), (r, n - r)).into_owned();
    Ok(SigmaBlock {
        matrix,
        sigma_j: sigma.get(big_j),
        off,
    })
}

/// `√(Σ_I σ_I² (1 + #I·#I^c))`.
pub fn aggregate_bound(sigma: &UnitDirection) -> f64 {
    let n = sigma.n as u32;
    let terms: Vec<f64> = sigma
        .sigma
        .iter()
        .enumerate()
        .map(|(m, v)| {
            let r = (m as u32).count_ones();
            v * v * (1 + r * (n - r)) as f64
        })
        .collect();
    pairwise_sum(&terms).sqrt()
}

/// `√((n/2)² + 1)` for even `n`, `√((n/2)² + 3/4)` for odd `n`; the maximum
/// of the aggregate bound over the sphere.
pub fn c_asym(n: usize) -> f64 {
    let half = n as f64 / 2.0;
    if n.is_multiple_of(2) {
        (half * half + 1.0).sqrt()
    } else {
        (half * half + 0.75).sqrt()
    }
}

/// `E|σ₁|^p` under the normalized measure on `S^{N-1}`:
/// `Γ(N/2) Γ((p+1)/2) / (√π Γ((N+p)/2))`.
pub fn sphere_coordinate_moment(big_n: usize, p: f64) -> Result<f64> {
    Ok(ln_sphere_moment(big_n, p)?.exp())
}

/// `‖σ₁‖_{L^p(S^{N-1})}`.
pub fn sphere_coordinate_lp_norm(big_n: usize, p: f64) -> Result<f64> {
    Ok((ln_sphere_moment(big_n, p)? / p).exp())
}

fn ln_sphere_moment(big_n: usize, p: f64) -> Result<f64> {
    check_sphere(big_n, p)?;
    let nf = big_n as f64;
    Ok(ln_gamma_real(nf / 2.0) + ln_gamma_real((p + 1.0) / 2.0)
        - 0.5 * PI.ln()
        - ln_gamma_real((nf + p) / 2.0))
}

fn check_sphere(big_n: usize, p: f64) -> Result<()> {
    if big_n < 2 {
        return domain(format!(
            "sphere dimension N must be at least 2, got {big_n}"
        ));
    }
    if !(p >= 1.0) || !p.is_finite() {
        return domain(format!("p must lie in [1, ∞), got {p}"));
    }
    Ok(())
}

/// Monte Carlo estimate of `E|σ₁|^p` with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MonteCarlo {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Samples `|σ₁|^p` for uniform `σ ∈ S^{N-1}` (normalized Gaussians); sample
/// `i` uses RNG stream `i / SAMPLE_BLOCK` of `seed`.
pub fn sphere_moment_mc(
    big_n: usize,
    p: f64,
    samples: usize,
    seed: u64,
    exec: Exec,
) -> Result<MonteCarlo> {
    check_sphere(big_n, p)?;
    if samples < 2 {
        return domain("need at least two samples");
    }
    const SAMPLE_BLOCK: usize = 1 << 14;
    let blocks = samples.div_ceil(SAMPLE_BLOCK);
    let sums = exec.map(blocks, |b| {
        let mut rng = stream_rng(seed, b as u64);
        let count = SAMPLE_BLOCK.min(samples - b * SAMPLE_BLOCK);
        let mut vals = Vec::with_capacity(count);
        for _ in 0..count {
            let first: f64 = rng.sample(StandardNormal);
            let mut sq = first * first;
            for _ in 1..big_n {
                let g: f64 = rng.sample(StandardNormal);
                sq += g * g;
            }
            vals.push((first * first / sq).powf(p / 2.0));
        }
        let sq: Vec<f64> = vals.iter().map(|v| v * v).collect();
        (pairwise_sum(&vals), pairwise_sum(&sq))
    });
    let (s1, s2): (Vec<f64>, Vec<f64>) = sums.into_iter().unzip();
    let (s1, s2) = (pairwise_sum(&s1), pairwise_sum(&s2));
    let m = samples as f64;
    let mean = s1 / m;
    let var = ((s2 - m * mean * mean) / (m - 1.0)).max(0.0);
    Ok(MonteCarlo {
        mean,
        std_error: (var / m).sqrt(),
        samples,
    })
}

/// `C_asym(n) (p* - 1) / ‖σ₁‖_{L^p(S^{2^n - 1})}`.
pub fn asymptotic_bound(n: usize, p: f64) -> Result<f64> {
    if n < 2 {
        return domain(format!("dimension must be at least 2, got {n}"));
    }
    if n > 60 {
        return domain("dimension too large for the sphere S^{2^n - 1}");
    }
    let ps = p_star(p)?;
    Ok(c_asym(n) * (ps - 1.0) / sphere_coordinate_lp_norm(1usize << n, p)?)
}

/// Summary of a random sweep over `σ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SigmaProbe {
    pub n: usize,
    pub samples: usize,
    /// Largest numeric `‖σ·A‖`.
    pub max_norm: f64,
    /// Largest aggregate bound.
    pub max_aggregate: f64,
    /// Largest `‖σ·A‖ - aggregate_bound(σ)` (nonpositive when the bound holds).
    pub max_excess: f64,
    /// Smallest `‖σ·A‖² / Σ_J ‖(σ·A)_J‖²` (slack of the block chain).
    pub min_chain_ratio: f64,
    /// Largest `|‖(σ·A)_J‖² - σ_J² - ‖Σ_J‖²|`.
    pub max_identity_error: f64,
}

/// Evaluates `samples` random directions; half of them uniform on the sphere,
/// half concentrated on the middle grade `⌊n/2⌋`. Sample `i` uses stream `i`.
pub fn sigma_probe(n: usize, samples: usize, seed: u64, exec: Exec) -> Result<SigmaProbe> {
    check_dim(n)?;
    let sets = enumerate_all(n)?;
    let rows = exec.map(samples, |i| -> Result<(f64, f64, f64, f64)> {
        let mut rng = stream_rng(seed, i as u64);
        let sigma = if i % 2 == 0 {
            UnitDirection::random(n, &mut rng)?
        } else {
            UnitDirection::random_in_grade(n, n / 2, &mut rng)?
        };
        let norm = spectral_norm(&sigma_dot_matrix(&sigma)?, 1e-14)?;
        let mut chain = 0.0;
        let mut identity_err = 0.0f64;
        for set in &sets {
            let b = sigma_block(&sigma, set)?;
            let num = b.numeric_norm()?;
            chain += num * num;
            identity_err = identity_err.max((num * num - b.identity_norm_sq()?).abs());
        }
        Ok((
            norm,
            aggregate_bound(&sigma),
            norm * norm / chain,
            identity_err,
        ))
    });
    let mut probe = SigmaProbe {
        n,
        samples,
        max_norm: 0.0,
        max_aggregate: 0.0,
        max_excess: f64::NEG_INFINITY,
        min_chain_ratio: f64::INFINITY,
        max_identity_error: 0.0,
    };
    for row in rows {
        let (norm, agg, ratio, err) = row?;
        probe.max_norm = probe.max_norm.max(norm);
        probe.max_aggregate = probe.max_aggregate.max(agg);
        probe.max_excess = probe.max_excess.max(norm - agg);
        probe.min_chain_ratio = probe.min_chain_ratio.min(ratio);
        probe.max_identity_error = probe.max_identity_error.max(err);
    }
    Ok(probe)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(n: usize, e: &[usize]) -> MultiIndex {
        MultiIndex::from_elements(n, e).unwrap()
    }

    #[test]
    fn indicator_of_empty_set() {
        for n in 2..=4 {
            let s = UnitDirection::indicator(&MultiIndex::empty(n).unwrap()).unwrap();
            let m = sigma_dot_matrix(&s).unwrap();
            assert_eq!(m.ncols(), n << n);
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(m[(i, j)], if i == j { -1.0 } else { 0.0 });
                }
            }
            assert!((spectral_norm(&m, 1e-14).unwrap() - 1.0).abs() < 1e-12);
            assert_eq!(aggregate_bound(&s), 1.0);
        }
    }

    #[test]
    fn indicator_blocks() {
        let n = 4;
        for j in enumerate_all(n).unwrap() {
            let s = UnitDirection::indicator(&j).unwrap();
            let b = sigma_block(&s, &j).unwrap();
            let r = j.grade();
            for a in 0..n {
                for c in 0..n {
                    let expect = if a != c {
                        0.0
                    } else if a < r {
                        1.0
                    } else {
                        -1.0
                    };
                    assert_eq!(b.matrix[(a, c)], expect);
                }
            }
            assert!((b.numeric_norm().unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn block_examples_n2() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut sigma = vec![0.0; 4];
        sigma[set(2, &[1]).mask() as usize] = h;
        sigma[set(2, &[2]).mask() as usize] = h;
        let s = UnitDirection::new(2, sigma).unwrap();
        let b = sigma_block(&s, &set(2, &[1])).unwrap();
        assert_eq!(b.off.shape(), (1, 1));
        assert!((b.off[(0, 0)] - h).abs() < 1e-15);
        assert!((b.identity_norm_sq().unwrap() - 1.0).abs() < 1e-14);
        assert!((b.numeric_norm().unwrap() - 1.0).abs() < 1e-12);

        let e1 = UnitDirection::indicator(&set(2, &[1])).unwrap();
        assert!((aggregate_bound(&e1) - 2f64.sqrt()).abs() < 1e-15);
        let u = UnitDirection::uniform(2).unwrap();
        assert!((aggregate_bound(&u) - 1.5f64.sqrt()).abs() < 1e-15);
        let norm = spectral_norm(&sigma_dot_matrix(&u).unwrap(), 1e-14).unwrap();
        assert!(norm <= 1.5f64.sqrt() + 1e-12);
    }

    #[test]
    fn random_directions() {
        for n in 2..=4 {
            let p = sigma_probe(n, 100, 17, Exec::default()).unwrap();
            assert!(p.max_excess <= 1e-10, "n={n}");
            assert!(p.max_identity_error < 1e-12);
            assert!(p.max_aggregate <= c_asym(n) + 1e-12);
            assert!(p.min_chain_ratio <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn c_asym_is_max_aggregate() {
        assert_eq!(c_asym(2), 2f64.sqrt());
        assert_eq!(c_asym(3), 3f64.sqrt());
        assert_eq!(c_asym(4), 5f64.sqrt());
        for n in 2..=8 {
            let best = (0..=n)
                .map(|r| (1 + r * (n - r)) as f64)
                .fold(0.0, f64::max)
                .sqrt();
            assert!((best - c_asym(n)).abs() < 1e-15);
            let mid =
                UnitDirection::indicator(&MultiIndex::from_mask(n, (1u32 << (n / 2)) - 1).unwrap())
                    .unwrap();
            assert!((aggregate_bound(&mid) - c_asym(n)).abs() < 1e-15);
        }
    }

    #[test]
    fn sphere_norms() {
        for big_n in [2, 3, 8, 64] {
            assert!(
                (sphere_coordinate_lp_norm(big_n, 2.0).unwrap() - 1.0 / (big_n as f64).sqrt())
                    .abs()
                    < 1e-14
            );
        }
        assert!((sphere_coordinate_lp_norm(2, 4.0).unwrap() - 0.375f64.powf(0.25)).abs() < 1e-14);
        let a = sphere_coordinate_lp_norm(16, 1e2).unwrap();
        let b = sphere_coordinate_lp_norm(16, 1e4).unwrap();
        assert!(a < b && b < 1.0);
        let mut prev = 0.0;
        for k in 1..60 {
            let v = sphere_coordinate_lp_norm(8, k as f64).unwrap();
            assert!(v > prev);
            prev = v;
        }
        assert!(sphere_coordinate_lp_norm(1, 2.0).is_err());
        assert!(sphere_coordinate_lp_norm(4, 0.5).is_err());
        let mc = sphere_moment_mc(2, 4.0, 100_000, 1, Exec::default()).unwrap();
        assert!((mc.mean - 0.375).abs() < 4.0 * mc.std_error);
    }

    #[test]
    fn asymptotic_constants() {
        for n in [2, 3] {
            let r = asymptotic_bound(n, 1000.0).unwrap() / 999.0;
            assert!((r / c_asym(n) - 1.0).abs() < 0.03, "n={n} r={r}");
        }
        assert!(asymptotic_bound(2, 1.0).is_err());
    }
}
