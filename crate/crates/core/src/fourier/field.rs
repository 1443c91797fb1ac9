//! Periodic grids and exterior-algebra valued fields on them.

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::exec::Exec;
use crate::exterior::{enumerate_grade, MultiIndex, MAX_DIM};

/// The torus `[0, L)^n` sampled on `dims[0] × … × dims[n-1]` points.
///
/// Samples are stored row-major with axis 1 slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    dims: Vec<usize>,
    length: f64,
}

impl Grid {
    pub fn new(dims: Vec<usize>, length: f64) -> Result<Self> {
        if dims.is_empty() || dims.len() > MAX_DIM {
            return domain(format!("grid needs 1..={MAX_DIM} axes, got {}", dims.len()));
        }
        if let Some(d) = dims.iter().find(|d| !d.is_power_of_two()) {
            return domain(format!("axis length {d} is not a power of two"));
        }
        if !(length > 0.0) || !length.is_finite() {
            return domain(format!("period length must be positive, got {length}"));
        }
        Ok(Self { dims, length })
    }

    /// `points` samples along each of `n` axes.
    pub fn cube(n: usize, points: usize, length: f64) -> Result<Self> {
        Self::new(vec![points; n], length)
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Riemann-sum weight `Π (L / dims_a)`.
    pub fn cell_volume(&self) -> f64 {
        self.dims.iter().map(|&d| self.length / d as f64).product()
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim() as i32)
    }

    /// Multi-index of a flat sample position.
    pub fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        for a in (0..self.dim()).rev() {
            out[a] = flat % self.dims[a];
            flat /= self.dims[a];
        }
    }

    /// Physical coordinates of a flat sample position.
    pub fn point(&self, flat: usize, out: &mut [f64]) {
        let mut idx = vec![0; self.dim()];
        self.unravel(flat, &mut idx);
        for a in 0..self.dim() {
            out[a] = idx[a] as f64 * self.length / self.dims[a] as f64;
        }
    }

    /// Signed integer wave number of FFT index `j` on axis `a`, and whether it
    /// is the (sign-ambiguous) Nyquist index.
    #[inline]
    pub fn wavenumber(&self, a: usize, j: usize) -> (i64, bool) {
        let d = self.dims[a];
        if 2 * j < d {
            (j as i64, false)
        } else if 2 * j == d {
            (j as i64, true)
        } else {
            (j as i64 - d as i64, false)
        }
    }
}

/// Which basis vectors `e_I` a field carries: those whose grade is listed.
pub(crate) fn component_masks(n: usize, grades: &[usize]) -> Result<Vec<MultiIndex>> {
    let mut out = Vec::new();
    for &r in grades {
        out.extend(enumerate_grade(n, r)?);
    }
    out.sort();
    Ok(out)
}

fn normalize_grades(n: usize, grades: &[usize]) -> Result<Vec<usize>> {
    let mut g = grades.to_vec();
    g.sort_unstable();
    g.dedup();
    if g.is_empty() {
        return domain("a field needs at least one grade");
    }
    if let Some(r) = g.iter().find(|&&r| r > n) {
        return domain(format!("grade {r} outside 0..={n}"));
    }
    Ok(g)
}

/// A `Λ(ℝ^n)`-valued real field on a periodic grid: one scalar grid per basis
/// vector `e_I` of the listed grades, in ascending mask order.
#[derive(Clone, Debug, PartialEq)]
pub struct FormField {
    grid: Grid,
    grades: Vec<usize>,
    basis: Vec<MultiIndex>,
    components: Vec<Vec<f64>>,
}

impl FormField {
    pub fn zeros(grid: Grid, grades: &[usize]) -> Result<Self> {
        let n = grid.dim();
        let grades = normalize_grades(n, grades)?;
        let basis = component_masks(n, &grades)?;
        let components = vec![vec![0.0; grid.len()]; basis.len()];
        Ok(Self {
            grid,
            grades,
            basis,
            components,
        })
    }

    /// All `2^n` components.
    pub fn zeros_full(grid: Grid) -> Result<Self> {
        let n = grid.dim();
        Self::zeros(grid, &(0..=n).collect::<Vec<_>>())
    }

    /// Samples `f(I, x)` at every grid point for every basis vector `e_I`.
    pub fn from_fn<F>(grid: Grid, grades: &[usize], f: F) -> Result<Self>
    where
        F: Fn(&MultiIndex, &[f64]) -> f64,
    {
        let mut field = Self::zeros(grid, grades)?;
        let mut x = vec![0.0; field.grid.dim()];
        for (c, set) in field.basis.iter().enumerate() {
            for flat in 0..field.grid.len() {
                field.grid.point(flat, &mut x);
                field.components[c][flat] = f(set, &x);
            }
        }
        field.check_finite()?;
        Ok(field)
    }

    pub fn from_components(
        grid: Grid,
        grades: &[usize],
        components: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let mut field = Self::zeros(grid, grades)?;
        if components.len() != field.basis.len() {
            return Err(Error::Input(format!(
                "expected {} components, got {}",
                field.basis.len(),
                components.len()
            )));
        }
        if let Some(c) = components.iter().find(|c| c.len() != field.grid.len()) {
            return Err(Error::Input(format!(
                "component has {} samples, grid has {}",
                c.len(),
                field.grid.len()
            )));
        }
        field.components = components;
        field.check_finite()?;
        Ok(field)
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.components.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Input("field has non-finite samples".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn grades(&self) -> &[usize] {
        &self.grades
    }

    pub fn basis(&self) -> &[MultiIndex] {
        &self.basis
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn components_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.components
    }

    pub fn component(&self, set: &MultiIndex) -> Option<&[f64]> {
        self.basis
            .iter()
            .position(|b| b == set)
            .map(|c| self.components[c].as_slice())
    }

    pub fn component_mut(&mut self, set: &MultiIndex) -> Option<&mut Vec<f64>> {
        self.basis
            .iter()
            .position(|b| b == set)
            .map(move |c| &mut self.components[c])
    }

    /// Same grid and basis.
    pub fn same_shape(&self, other: &FormField) -> bool {
        self.grid == other.grid && self.basis == other.basis
    }

    pub fn scale(&mut self, c: f64) {
        self.components.iter_mut().flatten().for_each(|v| *v *= c);
    }

    /// `self + c·other`.
    pub fn add_scaled(&mut self, c: f64, other: &FormField) -> Result<()> {
        if !self.same_shape(other) {
            return Err(Error::Precondition("fields differ in grid or basis".into()));
        }
        for (a, b) in self.components.iter_mut().zip(&other.components) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += c * y);
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Pointwise Euclidean norm `(Σ_I f_I(x)²)^{1/2}` at a flat position.
    #[inline]
    pub fn pointwise_norm(&self, flat: usize) -> f64 {
        self.components
            .iter()
            .map(|c| c[flat] * c[flat])
            .sum::<f64>()
            .sqrt()
    }

    /// Mean of every component over the torus.
    pub fn means(&self) -> Vec<f64> {
        let n = self.grid.len() as f64;
        self.components
            .iter()
            .map(|c| crate::exec::pairwise_sum(c) / n)
            .collect()
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_norm_with(self, p, Exec::default())
    }
}

/// `((L/dims)^n Σ_x (Σ_I f_I(x)²)^{p/2})^{1/p}`.
pub fn lp_norm(f: &FormField, p: f64) -> Result<f64> {
    lp_norm_with(f, p, Exec::default())
}

pub fn lp_norm_with(f: &FormField, p: f64, exec: Exec) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return domain(format!("exponent must lie in [1, ∞), got {p}"));
    }
    f.check_finite()?;
    let half = p / 2.0;
    let s = exec.sum(f.grid.len(), |x| {
        let sq: f64 = f.components.iter().map(|c| c[x] * c[x]).sum();
        sq.powf(half)
    });
    Ok((f.grid.cell_volume() * s).powf(1.0 / p))
}

/// A complex-valued counterpart of [`FormField`], produced by multipliers
/// whose symbol is not real.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    grid: Grid,
    grades: Vec<usize>,
    basis: Vec<MultiIndex>,
    components: Vec<Vec<Complex64>>,
}

impl ComplexField {
    pub(crate) fn from_parts(
        grid: Grid,
        grades: Vec<usize>,
        basis: Vec<MultiIndex>,
        components: Vec<Vec<Complex64>>,
    ) -> Self {
        Self {
            grid,
            grades,
            basis,
            components,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn basis(&self) -> &[MultiIndex] {
        &self.basis
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.components
    }

    pub fn max_imag(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.im.abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.norm()))
    }

    /// Drops the imaginary part after checking it is below `tol · max(1, max|f|)`.
    pub fn into_real(self, tol: f64) -> Result<FormField> {
        let residue = self.max_imag();
        let scale = self.max_abs().max(1.0);
        if residue > tol * scale {
            return Err(Error::Accuracy {
                achieved: residue / scale,
                target: tol,
            });
        }
        Ok(self.real_part())
    }

    pub fn real_part(self) -> FormField {
        FormField {
            grid: self.grid,
            grades: self.grades,
            basis: self.basis,
            components: self
                .components
                .into_iter()
                .map(|c| c.into_iter().map(|v| v.re).collect())
                .collect(),
        }
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) || !p.is_finite() {
            return domain(format!("exponent must lie in [1, ∞), got {p}"));
        }
        let half = p / 2.0;
        let s = Exec::default().sum(self.grid.len(), |x| {
            let sq: f64 = self.components.iter().map(|c| c[x].norm_sqr()).sum();
            sq.powf(half)
        });
        Ok((self.grid.cell_volume() * s).powf(1.0 / p))
    }
}

impl From<&FormField> for ComplexField {
    fn from(f: &FormField) -> Self {
        Self {
            grid: f.grid.clone(),
            grades: f.grades.clone(),
            basis: f.basis.clone(),
            components: f
                .components
                .iter()
                .map(|c| c.iter().map(|&v| Complex64::new(v, 0.0)).collect())
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn grid_validation() {
        assert!(Grid::new(vec![8, 6], 1.0).is_err());
        assert!(Grid::new(vec![8, 8], 0.0).is_err());
        assert!(Grid::new(vec![], 1.0).is_err());
        let g = Grid::new(vec![4, 8], 2.0).unwrap();
        assert_eq!(g.len(), 32);
        assert_eq!(g.cell_volume(), 0.5 * 0.25);
        let mut x = [0.0; 2];
        g.point(9, &mut x); // (1, 1)
        assert_eq!(x, [0.5, 0.25]);
        assert_eq!(g.wavenumber(1, 5), (-3, false));
        assert_eq!(g.wavenumber(1, 4), (4, true));
    }

    #[test]
    fn component_counts() {
        let g = Grid::cube(3, 4, 1.0).unwrap();
        assert_eq!(
            FormField::zeros_full(g.clone()).unwrap().components().len(),
            8
        );
        assert_eq!(
            FormField::zeros(g.clone(), &[2])
                .unwrap()
                .components()
                .len(),
            3
        );
        assert!(FormField::zeros(g, &[4]).is_err());
    }

    #[test]
    fn lp_norm_examples() {
        let g = Grid::cube(2, 16, 1.0).unwrap();
        let zero = FormField::zeros_full(g.clone()).unwrap();
        assert_eq!(lp_norm(&zero, 3.0).unwrap(), 0.0);

        let c = FormField::from_fn(g.clone(), &[0], |_, _| -2.5).unwrap();
        for p in [1.0, 2.0, 4.5] {
            assert!((lp_norm(&c, p).unwrap() - 2.5).abs() < 1e-13);
        }

        let e1 = MultiIndex::from_elements(2, &[1]).unwrap();
        let f = FormField::from_fn(g, &[1], |s, x| {
            if *s == e1 {
                (2.0 * PI * x[0]).cos()
            } else {
                0.0
            }
        })
        .unwrap();
        assert!((lp_norm(&f, 2.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-10);
        assert!(lp_norm(&f, 0.5).is_err());
    }

    #[test]
    fn non_finite_rejected() {
        let g = Grid::cube(1, 4, 1.0).unwrap();
        assert!(matches!(
            FormField::from_fn(g, &[0], |_, _| f64::NAN),
            Err(Error::Input(_))
        ));
    }
}
