//! n-dimensional FFTs on the periodic grid and the coefficient representation
//! `f(x) = Σ_k c_k exp(2πi k·x / L)`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::field::{ComplexField, FormField, Grid};
use crate::exec::Exec;
use crate::exterior::MultiIndex;

/// Lines handed to one task when transforming along an axis.
const LINES_PER_TASK: usize = 64;

struct AxisPlan {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Planned forward/inverse transforms for every axis of a grid.
pub(crate) struct FftEngine {
    dims: Vec<usize>,
    plans: Vec<AxisPlan>,
}

impl FftEngine {
    pub(crate) fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        let plans = grid
            .dims()
            .iter()
            .map(|&d| AxisPlan {
                forward: planner.plan_fft_forward(d),
                inverse: planner.plan_fft_inverse(d),
            })
            .collect();
        Self {
            dims: grid.dims().to_vec(),
            plans,
        }
    }

    /// Unnormalized in-place transform over all axes.
    pub(crate) fn transform(&self, data: &mut [Complex64], inverse: bool, exec: Exec) {
        let total: usize = self.dims.iter().product();
        assert_eq!(data.len(), total);
        for (a, &d) in self.dims.iter().enumerate() {
            if d == 1 {
                continue;
            }
            let fft = if inverse {
                &self.plans[a].inverse
            } else {
                &self.plans[a].forward
            };
            let stride: usize = self.dims[a + 1..].iter().product();
            let run = |buf: &mut [Complex64]| {
                exec.for_each_chunk_mut(buf, d * LINES_PER_TASK, |_, chunk| fft.process(chunk));
            };
            if stride == 1 {
                run(data);
                continue;
            }
            // Gather lines along axis `a` into contiguous storage and back.
            let outer = total / (d * stride);
            let mut lines = vec![Complex64::default(); total];
            for o in 0..outer {
                let base = o * d * stride;
                for j in 0..d {
                    let src = &data[base + j * stride..base + (j + 1) * stride];
                    for (i, &v) in src.iter().enumerate() {
                        lines[(o * stride + i) * d + j] = v;
                    }
                }
            }
            run(&mut lines);
            for o in 0..outer {
                let base = o * d * stride;
                for j in 0..d {
                    let dst = &mut data[base + j * stride..base + (j + 1) * stride];
                    for (i, v) in dst.iter_mut().enumerate() {
                        *v = lines[(o * stride + i) * d + j];
                    }
                }
            }
        }
    }
}

/// Fourier coefficients `c_k` (forward FFT divided by the number of samples)
/// of every component of a field.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub(crate) grid: Grid,
    pub(crate) grades: Vec<usize>,
    pub(crate) basis: Vec<MultiIndex>,
    pub(crate) coeffs: Vec<Vec<Complex64>>,
}

impl Spectrum {
    pub fn of(field: &FormField, exec: Exec) -> Self {
        let grid = field.grid().clone();
        let engine = FftEngine::new(&grid);
        let scale = 1.0 / grid.len() as f64;
        let coeffs = exec.map(field.components().len(), |c| {
            let mut buf: Vec<Complex64> = field.components()[c]
                .iter()
                .map(|&v| Complex64::new(v, 0.0))
                .collect();
            engine.transform(&mut buf, false, exec);
            buf.iter_mut().for_each(|v| *v *= scale);
            buf
        });
        Self {
            grid,
            grades: field.grades().to_vec(),
            basis: field.basis().to_vec(),
            coeffs,
        }
    }

    /// Builds a spectrum with the given coefficients.
    pub(crate) fn from_coeffs(template: &FormField, coeffs: Vec<Vec<Complex64>>) -> Self {
        Self {
            grid: template.grid().clone(),
            grades: template.grades().to_vec(),
            basis: template.basis().to_vec(),
            coeffs,
        }
    }

    /// A spectrum with the same shape and no coefficients.
    pub(crate) fn clone_shape(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            grades: self.grades.clone(),
            basis: self.basis.clone(),
            coeffs: Vec::new(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn basis(&self) -> &[MultiIndex] {
        &self.basis
    }

    pub fn coeffs(&self) -> &[Vec<Complex64>] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Vec<Complex64>] {
        &mut self.coeffs
    }

    /// Synthesizes `Σ_k c_k exp(2πi k·x/L)` on the grid.
    pub fn synthesize(&self, exec: Exec) -> ComplexField {
        let engine = FftEngine::new(&self.grid);
        let comps = exec.map(self.coeffs.len(), |c| {
            let mut buf = self.coeffs[c].clone();
            engine.transform(&mut buf, true, exec);
            buf
        });
        ComplexField::from_parts(
            self.grid.clone(),
            self.grades.clone(),
            self.basis.clone(),
            comps,
        )
    }

    /// Multiplies every component by the scalar `m(k, nyquist)` at each
    /// frequency, where `k` is the signed wave-number vector.
    pub fn apply_scalar<F>(&mut self, exec: Exec, m: F)
    where
        F: Fn(&[i64], u32) -> Complex64 + Sync + Send,
    {
        let grid = self.grid.clone();
        let factors = exec.map(grid.len(), |flat| {
            let mut k = vec![0i64; grid.dim()];
            let nyq = wavevector(&grid, flat, &mut k);
            m(&k, nyq)
        });
        for comp in &mut self.coeffs {
            comp.iter_mut().zip(&factors).for_each(|(c, f)| *c *= f);
        }
    }
}

/// Writes the signed wave numbers of frequency `flat` into `k` and returns the
/// bit mask of axes sitting at the Nyquist index.
pub(crate) fn wavevector(grid: &Grid, flat: usize, k: &mut [i64]) -> u32 {
    let mut rest = flat;
    let mut nyq = 0u32;
    for a in (0..grid.dim()).rev() {
        let d = grid.dims()[a];
        let (w, at_nyq) = grid.wavenumber(a, rest % d);
        k[a] = w;
        if at_nyq {
            nyq |= 1 << a;
        }
        rest /= d;
    }
    nyq
}
