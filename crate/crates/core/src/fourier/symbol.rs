//! The Fourier multiplier matrix of `S` and its application to fields.
//!
//! With the Riesz symbol `-iξ_k/|ξ|`, the multiplier of `S` at frequency `ξ`
//! acts on `Σ_K f_K e_K` by
//!
//! ```text
//! e_K   ↦ (|ξ|² - 2 Σ_{k∈K} ξ_k²)/|ξ|² · e_K
//!       - Σ_{k∈K, l∉K} 2 ξ_k ξ_l (-1)^{#K(k,l)} / |ξ|² · e_{K\k∪l}
//! ```
//!
//! At the zero frequency the symbol is taken to be `0`, so `S` annihilates
//! the mean of a field.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::fft::{wavevector, Spectrum};
use super::field::{FormField, Grid};
use crate::error::{domain, Error, Result};
use crate::exec::Exec;
use crate::exterior::{
    enumerate_all, substitute_with_sign, substitutions, MultiIndex, Substitution,
};
use crate::heat_matrix::{entry, spectral_norm, HeatMatrixSpec};

/// Frequency-chunk length for the per-frequency matrix products.
const FREQ_CHUNK: usize = 4096;

/// The `2^n × 2^n` real multiplier matrix of `S` at one frequency; rows and
/// columns in ascending mask order.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolMatrix {
    pub xi: Vec<f64>,
    pub matrix: DMatrix<f64>,
}

impl SymbolMatrix {
    pub fn dim(&self) -> usize {
        self.xi.len()
    }

    pub fn norm(&self) -> Result<f64> {
        spectral_norm(&self.matrix, 1e-12)
    }

    /// Largest entry-wise difference to another symbol matrix.
    pub fn max_diff(&self, other: &SymbolMatrix) -> f64 {
        (&self.matrix - &other.matrix).amax()
    }
}

fn check_xi(xi: &[f64], n: usize) -> Result<f64> {
    if xi.len() != n {
        return domain(format!(
            "frequency has {} coordinates, dimension is {n}",
            xi.len()
        ));
    }
    if xi.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("non-finite frequency".into()));
    }
    let q: f64 = xi.iter().map(|v| v * v).sum();
    if q == 0.0 {
        return domain("the symbol of S is undefined at ξ = 0");
    }
    Ok(q)
}

/// The multiplier matrix of `S` at `xi ≠ 0`, built from the Riesz symbols.
pub fn symbol_matrix(xi: &[f64], n: usize) -> Result<SymbolMatrix> {
    let q = check_xi(xi, n)?;
    let size = 1usize << n;
    let mut m = DMatrix::zeros(size, size);
    for set in enumerate_all(n)? {
        let col = set.mask() as usize;
        let inside: f64 = set.elements().map(|k| xi[k - 1] * xi[k - 1]).sum();
        let outside: f64 = set
            .complement_elements()
            .map(|l| xi[l - 1] * xi[l - 1])
            .sum();
        m[(col, col)] = (outside - inside) / q;
        for k in set.elements() {
            for l in set.complement_elements() {
                let (to, sign) = substitute_with_sign(&set, k, l)?;
                m[(to.mask() as usize, col)] += -2.0 * xi[k - 1] * xi[l - 1] * sign.to_f64() / q;
            }
        }
    }
    Ok(SymbolMatrix {
        xi: xi.to_vec(),
        matrix: m,
    })
}

/// The multiplier matrix obtained by contracting the heat matrix `A` (which
/// represents `-S`) against `ξ ⊗ ξ / |ξ|²`:
/// `M_{I,J} = -Σ_{i,j} A_{Ii,Jj} ξ_i ξ_j / |ξ|²`.
pub fn symbol_from_contraction(spec: &HeatMatrixSpec, xi: &[f64]) -> Result<SymbolMatrix> {
    let n = spec.dim();
    let q = check_xi(xi, n)?;
    let sets = enumerate_all(n)?;
    let size = 1usize << n;
    let mut m = DMatrix::zeros(size, size);
    for big_i in &sets {
        for big_j in sets.iter().filter(|s| s.grade() == big_i.grade()) {
            let alpha = spec.alpha(big_i.grade());
            let mut acc = 0.0;
            for i in 1..=n {
                for j in 1..=n {
                    acc += entry(big_i, i, big_j, j, alpha) * xi[i - 1] * xi[j - 1];
                }
            }
            m[(big_i.mask() as usize, big_j.mask() as usize)] = -acc / q;
        }
    }
    Ok(SymbolMatrix {
        xi: xi.to_vec(),
        matrix: m,
    })
}

/// Applies the multiplier of `S` to coefficient vectors over the basis of a
/// field (which may carry only some grades).
pub(crate) struct SymbolKernel {
    n: usize,
    /// Component position of each mask, `usize::MAX` if absent.
    position: Vec<usize>,
    components: Vec<MultiIndex>,
    subs: Vec<Substitution>,
}

impl SymbolKernel {
    pub(crate) fn new(n: usize, basis: &[MultiIndex]) -> Result<Self> {
        let mut position = vec![usize::MAX; 1 << n];
        for (c, b) in basis.iter().enumerate() {
            position[b.mask() as usize] = c;
        }
        let subs = substitutions(n)?
            .into_iter()
            .filter(|s| position[s.from as usize] != usize::MAX)
            .collect();
        Ok(Self {
            n,
            position,
            components: basis.to_vec(),
            subs,
        })
    }

    /// `out = M(ξ) input`; axes flagged in `nyquist` have their cross terms
    /// averaged over both signs (i.e. dropped).
    pub(crate) fn apply(
        &self,
        xi: &[f64],
        nyquist: u32,
        input: &[Complex64],
        out: &mut [Complex64],
    ) {
        let q: f64 = xi.iter().map(|v| v * v).sum();
        if q == 0.0 {
            out.iter_mut().for_each(|v| *v = Complex64::default());
            return;
        }
        for (c, set) in self.components.iter().enumerate() {
            let inside: f64 = set.elements().map(|k| xi[k - 1] * xi[k - 1]).sum();
            out[c] = input[c] * ((q - 2.0 * inside) / q);
        }
        for s in &self.subs {
            if nyquist & ((1 << (s.k - 1)) | (1 << (s.l - 1))) != 0 {
                continue;
            }
            let w = -2.0 * xi[s.k - 1] * xi[s.l - 1] * s.sign / q;
            out[self.position[s.to as usize]] += input[self.position[s.from as usize]] * w;
        }
    }

    /// The dense matrix the kernel applies at `(xi, nyquist)`, over the
    /// field's components.
    pub(crate) fn dense(&self, xi: &[f64], nyquist: u32) -> DMatrix<f64> {
        let m = self.components.len();
        let mut unit = vec![Complex64::default(); m];
        let mut col = vec![Complex64::default(); m];
        let mut out = DMatrix::zeros(m, m);
        for j in 0..m {
            unit.iter_mut().for_each(|v| *v = Complex64::default());
            unit[j] = Complex64::new(1.0, 0.0);
            self.apply(xi, nyquist, &unit, &mut col);
            for i in 0..m {
                out[(i, j)] = col[i].re;
            }
        }
        out
    }

    pub(crate) fn dim(&self) -> usize {
        self.n
    }
}

/// Multiplies each frequency's coefficient vector by the symbol of `S`.
pub(crate) fn apply_symbol_to_spectrum(spec: &mut Spectrum, exec: Exec) -> Result<()> {
    let grid = spec.grid.clone();
    let kernel = SymbolKernel::new(grid.dim(), &spec.basis)?;
    let comps = spec.coeffs.len();
    let total = grid.len();
    let chunks = total.div_ceil(FREQ_CHUNK);
    let coeffs = &spec.coeffs;
    let blocks = exec.map(chunks, |b| {
        let lo = b * FREQ_CHUNK;
        let hi = (lo + FREQ_CHUNK).min(total);
        let mut k = vec![0i64; kernel.dim()];
        let mut xi = vec![0.0; kernel.dim()];
        let mut input = vec![Complex64::default(); comps];
        let mut output = vec![Complex64::default(); comps];
        let mut block = vec![Complex64::default(); comps * (hi - lo)];
        for flat in lo..hi {
            let nyq = wavevector(&grid, flat, &mut k);
            for a in 0..k.len() {
                xi[a] = k[a] as f64 / grid.length();
            }
            for c in 0..comps {
                input[c] = coeffs[c][flat];
            }
            kernel.apply(&xi, nyq, &input, &mut output);
            for c in 0..comps {
                block[c * (hi - lo) + flat - lo] = output[c];
            }
        }
        block
    });
    for (b, block) in blocks.into_iter().enumerate() {
        let lo = b * FREQ_CHUNK;
        let len = block.len() / comps.max(1);
        for c in 0..comps {
            spec.coeffs[c][lo..lo + len].copy_from_slice(&block[c * len..(c + 1) * len]);
        }
    }
    Ok(())
}

/// Tolerance on the imaginary residue of outputs that must be real.
pub const REAL_OUTPUT_TOL: f64 = 1e-10;

pub fn apply_s(f: &FormField) -> Result<FormField> {
    apply_s_with(f, Exec::default())
}

/// `S f` on the torus: FFT, per-frequency multiplication by the symbol
/// matrix, inverse FFT.
pub fn apply_s_with(f: &FormField, exec: Exec) -> Result<FormField> {
    f.check_finite()?;
    let mut spec = Spectrum::of(f, exec);
    apply_symbol_to_spectrum(&mut spec, exec)?;
    spec.synthesize(exec).into_real(REAL_OUTPUT_TOL)
}

/// The multiplier matrix `apply_s` uses at the signed wave vector `k` of a
/// grid (full basis, ascending mask order); Nyquist cross terms are dropped.
pub fn grid_symbol_matrix(grid: &Grid, k: &[i64]) -> Result<DMatrix<f64>> {
    let n = grid.dim();
    if k.len() != n {
        return domain(format!(
            "wave vector has {} entries, dimension is {n}",
            k.len()
        ));
    }
    let mut nyq = 0u32;
    for (a, &v) in k.iter().enumerate() {
        let half = (grid.dims()[a] / 2) as i64;
        if v.abs() > half {
            return domain(format!("wave number {v} outside the grid"));
        }
        if v.abs() == half && half > 0 {
            nyq |= 1 << a;
        }
    }
    let kernel = SymbolKernel::new(n, &enumerate_all(n)?)?;
    let xi: Vec<f64> = k.iter().map(|&v| v as f64 / grid.length()).collect();
    Ok(kernel.dense(&xi, nyq))
}

/// Largest `‖M(ξ)‖` over the nonzero frequencies of a grid, with the
/// frequency attaining it.
pub fn grid_symbol_sup(grid: &Grid, exec: Exec) -> Result<(f64, Vec<i64>)> {
    let n = grid.dim();
    let basis = enumerate_all(n)?;
    let kernel = SymbolKernel::new(n, &basis)?;
    // M depends only on the direction of ξ (and the Nyquist flags).
    let mut directions: BTreeMap<(Vec<i64>, u32), Vec<i64>> = BTreeMap::new();
    let mut k = vec![0i64; n];
    for flat in 1..grid.len() {
        let nyq = wavevector(grid, flat, &mut k);
        let g = k.iter().fold(0i64, |acc, &v| gcd(acc, v.abs()));
        let reduced: Vec<i64> = k.iter().map(|&v| v / g).collect();
        directions
            .entry((reduced, nyq))
            .or_insert_with(|| k.clone());
    }
    let dirs: Vec<(u32, Vec<i64>)> = directions
        .into_iter()
        .map(|((_, nyq), k)| (nyq, k))
        .collect();
    let norms = exec.map(dirs.len(), |d| {
        let (nyq, ref k) = dirs[d];
        let xi: Vec<f64> = k.iter().map(|&v| v as f64 / grid.length()).collect();
        spectral_norm(&kernel.dense(&xi, nyq), 1e-12)
    });
    let mut best = (0.0f64, vec![0i64; n]);
    for (d, norm) in norms.into_iter().enumerate() {
        let norm = norm?;
        if norm > best.0 {
            best = (norm, dirs[d].1.clone());
        }
    }
    Ok(best)
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn idx(n: usize, e: &[usize]) -> usize {
        MultiIndex::from_elements(n, e).unwrap().mask() as usize
    }

    #[test]
    fn symbol_examples_n2() {
        let m = symbol_matrix(&[1.0, 0.0], 2).unwrap().matrix;
        assert_eq!(m[(0, 0)], 1.0);
        assert_eq!(m[(idx(2, &[1]), idx(2, &[1]))], -1.0);
        assert_eq!(m[(idx(2, &[2]), idx(2, &[2]))], 1.0);
        assert_eq!(m[(idx(2, &[1]), idx(2, &[2]))], 0.0);
        assert_eq!(m[(3, 3)], -1.0);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let d = symbol_matrix(&[s, s], 2).unwrap();
        let (a, b) = (idx(2, &[1]), idx(2, &[2]));
        assert!(d.matrix[(a, a)].abs() < 1e-15 && d.matrix[(b, b)].abs() < 1e-15);
        assert!((d.matrix[(a, b)] + 1.0).abs() < 1e-15 && (d.matrix[(b, a)] + 1.0).abs() < 1e-15);
        assert!((d.norm().unwrap() - 1.0).abs() < 1e-14);

        // coordinate swap: ξ=(0,1) exchanges the e1/e2 diagonal entries
        let sw = symbol_matrix(&[0.0, 1.0], 2).unwrap().matrix;
        assert_eq!(sw[(a, a)], 1.0);
        assert_eq!(sw[(b, b)], -1.0);
        assert!(symbol_matrix(&[0.0, 0.0], 2).is_err());
    }

    #[test]
    fn symbol_invariants_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..=4 {
            for _ in 0..1000 {
                let xi: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let m = symbol_matrix(&xi, n).unwrap();
                assert!((&m.matrix - m.matrix.transpose()).amax() < 1e-15);
                let neg: Vec<f64> = xi.iter().map(|v| -v).collect();
                assert!(m.max_diff(&symbol_matrix(&neg, n).unwrap()) < 1e-15);
                let c = rng.gen_range(0.1..10.0);
                let scaled: Vec<f64> = xi.iter().map(|v| v * c).collect();
                assert!(m.max_diff(&symbol_matrix(&scaled, n).unwrap()) < 1e-13);
                for i in 0..1usize << n {
                    for j in 0..1usize << n {
                        if i.count_ones() != j.count_ones() {
                            assert_eq!(m.matrix[(i, j)], 0.0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn contraction_examples() {
        let spec = HeatMatrixSpec::new(2, vec![0.5, 0.3, 0.5]).unwrap();
        let a = symbol_from_contraction(&spec, &[1.0, 0.0]).unwrap();
        assert!(a.max_diff(&symbol_matrix(&[1.0, 0.0], 2).unwrap()) < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xi: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let alphas: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..=1.0)).collect();
        let rand_spec = HeatMatrixSpec::new(3, alphas).unwrap();
        let half = HeatMatrixSpec::uniform(3, 0.5).unwrap();
        let d = symbol_from_contraction(&rand_spec, &xi)
            .unwrap()
            .max_diff(&symbol_from_contraction(&half, &xi).unwrap());
        assert!(d < 1e-13);
    }

    #[test]
    fn kernel_matches_dense_symbol() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 2..=4 {
            let basis = enumerate_all(n).unwrap();
            let kernel = SymbolKernel::new(n, &basis).unwrap();
            for _ in 0..50 {
                let xi: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let dense = kernel.dense(&xi, 0);
                assert!((dense - symbol_matrix(&xi, n).unwrap().matrix).amax() < 1e-14);
            }
        }
    }

    #[test]
    fn apply_s_examples() {
        let grid = Grid::cube(2, 16, 1.0).unwrap();
        let c = FormField::from_fn(grid.clone(), &[0, 1, 2], |_, _| 3.0).unwrap();
        assert!(apply_s(&c).unwrap().max_abs() < 1e-14);

        let e1 = MultiIndex::from_elements(2, &[1]).unwrap();
        let f = FormField::from_fn(grid.clone(), &[0, 1, 2], |s, x| {
            if *s == e1 {
                (2.0 * PI * x[0]).cos()
            } else {
                0.0
            }
        })
        .unwrap();
        let mut sf = apply_s(&f).unwrap();
        sf.add_scaled(1.0, &f).unwrap();
        assert!(sf.max_abs() < 1e-13);

        let e0 = MultiIndex::empty(2).unwrap();
        let g = FormField::from_fn(grid, &[0, 1, 2], |s, x| {
            if *s == e0 {
                (2.0 * PI * x[0]).cos()
            } else {
                0.0
            }
        })
        .unwrap();
        let mut sg = apply_s(&g).unwrap();
        sg.add_scaled(-1.0, &g).unwrap();
        assert!(sg.max_abs() < 1e-13);
    }

    #[test]
    fn apply_s_single_grade_acts_by_its_block() {
        let grid = Grid::cube(3, 8, 1.0).unwrap();
        let full = FormField::from_fn(grid.clone(), &[0, 1, 2, 3], |s, x| {
            if s.grade() == 2 {
                (2.0 * PI * (x[0] + 2.0 * x[1] * s.mask() as f64)).sin() + x[2].cos()
            } else {
                0.0
            }
        })
        .unwrap();
        let single = FormField::from_fn(grid, &[2], |s, x| {
            (2.0 * PI * (x[0] + 2.0 * x[1] * s.mask() as f64)).sin() + x[2].cos()
        })
        .unwrap();
        let a = apply_s(&full).unwrap();
        let b = apply_s(&single).unwrap();
        for set in b.basis() {
            let x = a.component(set).unwrap();
            let y = b.component(set).unwrap();
            assert!(x.iter().zip(y).all(|(u, v)| (u - v).abs() < 1e-12));
        }
    }

    #[test]
    fn apply_s_rejects_non_finite() {
        let grid = Grid::cube(2, 4, 1.0).unwrap();
        let mut f = FormField::zeros_full(grid).unwrap();
        f.components_mut()[1][2] = f64::INFINITY;
        assert!(matches!(apply_s(&f), Err(Error::Input(_))));
    }

    #[test]
    fn grid_sup_n2_is_one() {
        let grid = Grid::cube(2, 16, 1.0).unwrap();
        let (sup, _) = grid_symbol_sup(&grid, Exec::default()).unwrap();
        assert!((sup - 1.0).abs() < 1e-12);
    }
}
