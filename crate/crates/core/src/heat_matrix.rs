//! The constant matrix `A` representing `-S` in the heat-extension
//! representation, its grade blocks and their spectra, and the resulting
//! norm-bound constants.
//!
//! Rows and columns of `A` are indexed by pairs `(I, i)` of a subset and an
//! element. Within a grade the pairs are ordered by the ascending-mask order
//! of `I`, then by `i` ascending.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::exec::Exec;
use crate::exterior::{
    enumerate_all, enumerate_grade, interval_count_mask, substitute_with_sign, MultiIndex,
};

/// Default cap on the side length of a dense grade matrix.
pub const DEFAULT_GRADE_CAP: usize = 10_000;

/// Largest dimension for which the full `n·2^n` matrix may be built.
pub const DEFAULT_FULL_DIM_CAP: usize = 10;

/// Parameters of `A`: the dimension and one coefficient `α_r ∈ [0, 1]` per grade.
#[derive(Clone, Debug, PartialEq)]
pub struct HeatMatrixSpec {
    n: usize,
    alpha: Vec<f64>,
}

impl HeatMatrixSpec {
    pub fn new(n: usize, alpha: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return domain(format!("dimension must be at least 2, got {n}"));
        }
        if alpha.len() != n + 1 {
            return domain(format!(
                "expected {} per-grade coefficients, got {}",
                n + 1,
                alpha.len()
            ));
        }
        if let Some(a) = alpha.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return domain(format!("coefficient {a} outside [0, 1]"));
        }
        Ok(Self { n, alpha })
    }

    /// The same `α` on every grade.
    pub fn uniform(n: usize, alpha: f64) -> Result<Self> {
        Self::new(n, vec![alpha; n + 1])
    }

    /// `α_r = 1 - r/n`, which balances the two block norms of every grade.
    pub fn optimal(n: usize) -> Result<Self> {
        Self::new(n, (0..=n).map(|r| optimal_alpha(n, r)).collect())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn alpha(&self, r: usize) -> f64 {
        self.alpha[r]
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alpha
    }
}

pub fn optimal_alpha(n: usize, r: usize) -> f64 {
    1.0 - r as f64 / n as f64
}

/// Entry `A_{Ii,Jj}` for the coefficient `alpha`.
pub fn entry(big_i: &MultiIndex, i: usize, big_j: &MultiIndex, j: usize, alpha: f64) -> f64 {
    let n = big_i.dim();
    debug_assert_eq!(n, big_j.dim());
    debug_assert!((1..=n).contains(&i) && (1..=n).contains(&j));
    let mut value = 0.0;
    if big_i == big_j && i == j {
        value += if big_i.contains(i) { 1.0 } else { -1.0 };
    }
    if i == j {
        return value;
    }
    let (im, jm) = (1u32 << (i - 1), 1u32 << (j - 1));
    let sign = if interval_count_mask(big_j.mask(), i, j).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    };
    if big_j.contains(i) && !big_j.contains(j) && big_i.mask() == (big_j.mask() & !im) | jm {
        value += 2.0 * alpha * sign;
    }
    if !big_j.contains(i) && big_j.contains(j) && big_i.mask() == (big_j.mask() & !jm) | im {
        value += 2.0 * (1.0 - alpha) * sign;
    }
    value
}

/// Row/column layout of one grade: the pairs `(I, i)` and a lookup from mask
/// to the position of `I` among the grade's subsets.
struct GradeLayout {
    sets: Vec<MultiIndex>,
    position: Vec<usize>,
}

impl GradeLayout {
    fn new(n: usize, r: usize) -> Result<Self> {
        let sets = enumerate_grade(n, r)?;
        let mut position = vec![usize::MAX; 1 << n];
        for (p, s) in sets.iter().enumerate() {
            position[s.mask() as usize] = p;
        }
        Ok(Self { sets, position })
    }

    #[inline]
    fn index(&self, n: usize, mask: u32, i: usize) -> usize {
        self.position[mask as usize] * n + (i - 1)
    }
}

/// The pairs `(I, i)` with `#I = r`, in matrix order.
pub fn grade_pairs(n: usize, r: usize) -> Result<Vec<(MultiIndex, usize)>> {
    Ok(enumerate_grade(n, r)?
        .into_iter()
        .flat_map(|s| (1..=n).map(move |i| (s, i)))
        .collect())
}

pub fn build_grade_matrix(spec: &HeatMatrixSpec, r: usize) -> Result<DMatrix<f64>> {
    build_grade_matrix_capped(spec, r, DEFAULT_GRADE_CAP)
}

pub fn build_grade_matrix_capped(
    spec: &HeatMatrixSpec,
    r: usize,
    cap: usize,
) -> Result<DMatrix<f64>> {
    let n = spec.n;
    if r > n {
        return domain(format!("grade {r} outside 0..={n}"));
    }
    let size = n * crate::exterior::binomial(n, r);
    if size > cap {
        return Err(Error::CapExceeded { size, cap });
    }
    let alpha = spec.alpha(r);
    let layout = GradeLayout::new(n, r)?;
    let mut m = DMatrix::zeros(size, size);
    for set in &layout.sets {
        for i in 1..=n {
            let d = layout.index(n, set.mask(), i);
            m[(d, d)] = if set.contains(i) { 1.0 } else { -1.0 };
        }
        // K → K\k∪l feeds row (K\k∪l, k), column (K, l) with 2α and
        // row (K\k∪l, l), column (K, k) with 2(1-α).
        for k in set.elements() {
            for l in set.complement_elements() {
                let (to, sign) = substitute_with_sign(set, k, l)?;
                let s = sign.to_f64();
                m[(
                    layout.index(n, to.mask(), k),
                    layout.index(n, set.mask(), l),
                )] += 2.0 * alpha * s;
                m[(
                    layout.index(n, to.mask(), l),
                    layout.index(n, set.mask(), k),
                )] += 2.0 * (1.0 - alpha) * s;
            }
        }
    }
    Ok(m)
}

/// The full `n·2^n` square matrix, rows ordered by ascending mask of `I`, then `i`.
pub fn build_full_matrix(spec: &HeatMatrixSpec) -> Result<DMatrix<f64>> {
    let n = spec.n;
    if n > DEFAULT_FULL_DIM_CAP {
        return Err(Error::CapExceeded {
            size: n << n,
            cap: DEFAULT_FULL_DIM_CAP << DEFAULT_FULL_DIM_CAP,
        });
    }
    let size = n << n;
    let mut m = DMatrix::zeros(size, size);
    let sets = enumerate_all(n)?;
    for (p, big_i) in sets.iter().enumerate() {
        for i in 1..=n {
            for (q, big_j) in sets.iter().enumerate() {
                if big_i.grade() != big_j.grade() {
                    continue;
                }
                for j in 1..=n {
                    let e = entry(big_i, i, big_j, j, spec.alpha(big_i.grade()));
                    if e != 0.0 {
                        m[(p * n + i - 1, q * n + j - 1)] = e;
                    }
                }
            }
        }
    }
    Ok(m)
}

/// The pairs `(Ĩ \ i_t, i_t)` spanning the block of type `i ∉ I` attached to
/// `Ĩ = {i_0 < … < i_r}`.
pub fn out_block_pairs(tilde: &MultiIndex) -> Result<Vec<(MultiIndex, usize)>> {
    if tilde.grade() == 0 {
        return domain("out-block needs a nonempty index set");
    }
    tilde
        .elements()
        .map(|e| Ok((tilde.remove(e)?, e)))
        .collect()
}

/// Block of type `i ∉ I`: `-1` on the diagonal and `2α(-1)^{s+t+1}` at `(t, s)`.
pub fn out_block(tilde: &MultiIndex, alpha: f64) -> Result<DMatrix<f64>> {
    if tilde.grade() == 0 {
        return domain("out-block needs a nonempty index set");
    }
    let size = tilde.grade();
    Ok(DMatrix::from_fn(size, size, |t, s| {
        if t == s {
            -1.0
        } else if (s + t + 1) % 2 == 0 {
            2.0 * alpha
        } else {
            -2.0 * alpha
        }
    }))
}

/// The pairs `(Ĩ ∪ i, i)`, `i ∉ Ĩ` ascending, spanning the block of type `i ∈ I`.
pub fn in_block_pairs(tilde: &MultiIndex) -> Result<Vec<(MultiIndex, usize)>> {
    tilde
        .complement_elements()
        .map(|e| Ok((tilde.insert(e)?, e)))
        .collect()
}

/// Block of type `i ∈ I`: `+1` on the diagonal and `2(1-α)(-1)^{#Ĩ(i,j)}` off it.
pub fn in_block(tilde: &MultiIndex, n: usize, alpha: f64) -> Result<DMatrix<f64>> {
    if tilde.dim() != n {
        return domain(format!(
            "index set lives in dimension {}, not {n}",
            tilde.dim()
        ));
    }
    let free: Vec<usize> = tilde.complement_elements().collect();
    if free.is_empty() {
        return domain("in-block needs a proper subset");
    }
    let m = free.len();
    Ok(DMatrix::from_fn(m, m, |a, b| {
        if a == b {
            1.0
        } else {
            let c = interval_count_mask(tilde.mask(), free[a], free[b]);
            2.0 * (1.0 - alpha) * if c.is_multiple_of(2) { 1.0 } else { -1.0 }
        }
    }))
}

/// Diagonal signs `d` with `d_a d_b = (-1)^{#Ĩ(i_a, i_b)}`, conjugating the
/// in-block to the all-plus form `2(1-α)J + (2α-1)I`.
pub fn in_block_signs(tilde: &MultiIndex) -> Vec<f64> {
    tilde
        .complement_elements()
        .map(|e| {
            let below = (tilde.mask() & ((1u32 << (e - 1)) - 1)).count_ones();
            if below.is_multiple_of(2) {
                1.0
            } else {
                -1.0
            }
        })
        .collect()
}

/// The unitary `x_{ts} = exp(2πi ts/m)/√m`, which diagonalizes the all-ones matrix.
pub fn fourier_similarity(m: usize) -> DMatrix<Complex64> {
    let scale = 1.0 / (m as f64).sqrt();
    DMatrix::from_fn(m, m, |t, s| {
        let phase = 2.0 * std::f64::consts::PI * ((t * s) % m) as f64 / m as f64;
        Complex64::from_polar(scale, phase)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    /// Pairs with `i ∉ I`; block size `r + 1`.
    Out,
    /// Pairs with `i ∈ I`; block size `n - r + 1`.
    In,
}

/// Eigenvalues of a block in closed form, ascending.
pub fn closed_form_spectrum(kind: BlockKind, n: usize, r: usize, alpha: f64) -> Result<Vec<f64>> {
    if r > n {
        return domain(format!("grade {r} outside 0..={n}"));
    }
    let mut spec = match kind {
        BlockKind::Out => {
            let mut v = vec![-(2.0 * alpha * r as f64 + 1.0)];
            v.extend(std::iter::repeat_n(2.0 * alpha - 1.0, r));
            v
        }
        BlockKind::In => {
            if r == 0 {
                return domain("in-blocks exist only for grades r ≥ 1");
            }
            let mut v = vec![2.0 * (1.0 - alpha) * (n - r) as f64 + 1.0];
            v.extend(std::iter::repeat_n(2.0 * alpha - 1.0, n - r));
            v
        }
    };
    spec.sort_by(f64::total_cmp);
    Ok(spec)
}

/// `max{2αr + 1, 2(1-α)(n-r) + 1}`, the norm of the grade-`r` part when both
/// block types are present (`1 ≤ r ≤ n-1`).
pub fn two_block_norm(n: usize, r: usize, alpha: f64) -> f64 {
    (2.0 * alpha * r as f64 + 1.0).max(2.0 * (1.0 - alpha) * (n - r) as f64 + 1.0)
}

/// Closed-form norm of the grade-`r` part, taking the maximum over the block
/// types that occur: out-blocks need `r ≤ n-1`, in-blocks need `r ≥ 1`.
/// Grade 0 is `-I` and grade `n` is `I`.
pub fn closed_form_grade_norm(n: usize, r: usize, alpha: f64) -> f64 {
    let out = if r < n {
        2.0 * alpha * r as f64 + 1.0
    } else {
        0.0
    };
    let inn = if r >= 1 {
        2.0 * (1.0 - alpha) * (n - r) as f64 + 1.0
    } else {
        0.0
    };
    out.max(inn)
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Input("matrix has non-finite entries".into()));
    }
    let mut v: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Largest singular value.
///
/// A matrix symmetric to within `tol` (relative to its largest entry) is
/// handled by a symmetric eigensolve; anything else through the eigenvalues
/// of its smaller Gram matrix.
pub fn spectral_norm(m: &DMatrix<f64>, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return domain(format!("tolerance must be positive, got {tol}"));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Input("matrix has non-finite entries".into()));
    }
    if m.is_empty() {
        return Ok(0.0);
    }
    let scale = m.amax().max(1.0);
    let symmetric = m.is_square() && (m - m.transpose()).amax() <= tol.max(1e-12) * scale;
    if symmetric {
        Ok(m.symmetric_eigenvalues()
            .iter()
            .fold(0.0f64, |acc, x| acc.max(x.abs())))
    } else {
        let gram = if m.nrows() <= m.ncols() {
            m * m.transpose()
        } else {
            m.transpose() * m
        };
        Ok(gram
            .symmetric_eigenvalues()
            .iter()
            .fold(0.0f64, |acc, x| acc.max(*x))
            .max(0.0)
            .sqrt())
    }
}

/// A reduced nonnegative fraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num, den);
        Self {
            num: num / g,
            den: den / g,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradeBound {
    pub r: usize,
    pub alpha_star: f64,
    /// `2r(n-r)/n + 1`.
    pub constant: f64,
    pub exact: Ratio,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub p: f64,
    pub p_star: f64,
    pub per_grade: Vec<GradeBound>,
    pub overall_constant: f64,
    pub overall_exact: Ratio,
    /// `overall_constant · (p* - 1)`.
    pub overall_bound: f64,
}

/// `max{p, p/(p-1)}`.
pub fn p_star(p: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return domain(format!("exponent must lie in (1, ∞), got {p}"));
    }
    Ok(p.max(p / (p - 1.0)))
}

pub fn bound_constants(n: usize, p: f64) -> Result<BoundReport> {
    if n < 2 {
        return domain(format!("dimension must be at least 2, got {n}"));
    }
    let p_star = p_star(p)?;
    let per_grade: Vec<GradeBound> = (0..=n)
        .map(|r| {
            let exact = Ratio::new((2 * r * (n - r) + n) as u64, n as u64);
            GradeBound {
                r,
                alpha_star: optimal_alpha(n, r),
                constant: exact.to_f64(),
                exact,
            }
        })
        .collect();
    let best = per_grade
        .iter()
        .max_by(|a, b| (a.exact.num * b.exact.den).cmp(&(b.exact.num * a.exact.den)))
        .expect("at least one grade");
    let overall_exact = best.exact;
    let overall_constant = overall_exact.to_f64();
    Ok(BoundReport {
        n,
        p,
        p_star,
        overall_constant,
        overall_exact,
        overall_bound: overall_constant * (p_star - 1.0),
        per_grade,
    })
}

/// `n/2 + 1` for even `n`, `n/2 + 1 - 1/(2n)` for odd `n`.
pub fn overall_constant_closed_form(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    if n.is_multiple_of(2) {
        h + 1.0
    } else {
        h + 1.0 - 1.0 / (2.0 * n as f64)
    }
}

/// One cell of the grade-norm sweep.
#[derive(Clone, Debug, Serialize)]
pub struct GradeNormCell {
    pub n: usize,
    pub r: usize,
    pub alpha: f64,
    pub numeric: f64,
    pub closed_form: f64,
}

impl GradeNormCell {
    pub fn error(&self) -> f64 {
        (self.numeric - self.closed_form).abs()
    }
}

/// Numeric versus closed-form norm of every grade matrix for the given `α` grid.
pub fn grade_norm_sweep(n: usize, alphas: &[f64], exec: Exec) -> Result<Vec<GradeNormCell>> {
    let cells: Vec<(usize, f64)> = (0..=n)
        .flat_map(|r| alphas.iter().map(move |&a| (r, a)))
        .collect();
    exec.map(cells.len(), |c| {
        let (r, alpha) = cells[c];
        let spec = HeatMatrixSpec::uniform(n, alpha)?;
        let m = build_grade_matrix(&spec, r)?;
        Ok(GradeNormCell {
            n,
            r,
            alpha,
            numeric: spectral_norm(&m, 1e-12)?,
            closed_form: closed_form_grade_norm(n, r, alpha),
        })
    })
    .into_iter()
    .collect()
}

/// Largest deviation between numeric block eigenvalues and the closed forms,
/// over every block of every grade of dimension `n` at coefficient `alpha`.
pub fn block_spectrum_deviation(n: usize, alpha: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for g in 1..=n {
        for tilde in enumerate_grade(n, g)? {
            let numeric = symmetric_eigenvalues(&out_block(&tilde, alpha)?)?;
            let closed = closed_form_spectrum(BlockKind::Out, n, g - 1, alpha)?;
            worst = worst.max(max_abs_diff(&numeric, &closed));
        }
    }
    for g in 0..n {
        for tilde in enumerate_grade(n, g)? {
            let numeric = symmetric_eigenvalues(&in_block(&tilde, n, alpha)?)?;
            let closed = closed_form_spectrum(BlockKind::In, n, g + 1, alpha)?;
            worst = worst.max(max_abs_diff(&numeric, &closed));
        }
    }
    Ok(worst)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()))
}

/// Grade-`r` norm at `α* = 1 - r/n` minus the smallest grade norm over the grid.
/// Nonnegative margins mean `α*` is at least as good as every grid point.
pub fn optimality_margin(n: usize, r: usize, grid: &[f64]) -> Result<f64> {
    let at = |a: f64| -> Result<f64> {
        spectral_norm(
            &build_grade_matrix(&HeatMatrixSpec::uniform(n, a)?, r)?,
            1e-12,
        )
    };
    let star = at(optimal_alpha(n, r))?;
    let mut margin = f64::INFINITY;
    for &a in grid {
        margin = margin.min(at(a)? - star);
    }
    Ok(margin)
}

/// `k + 1` equally spaced points on `[0, 1]`.
pub fn alpha_grid(points: usize) -> Vec<f64> {
    assert!(points >= 2, "grid needs at least two points");
    let k = (points - 1) as f64;
    (0..points).map(|i| i as f64 / k).collect()
}
