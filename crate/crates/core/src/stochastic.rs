//! Brownian paths on the torus and Monte Carlo checks of the martingale
//! identities behind the heat representation.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::exec::{pairwise_sum, Exec};
use crate::fourier::search::stream_rng;
use crate::fourier::{FormField, TrigPolynomial};
use crate::heat_matrix::p_star;

/// RNG streams at or above this offset are reserved for resampling.
const BOOTSTRAP_STREAM: u64 = 1 << 62;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleConfig {
    pub n: usize,
    /// Time step.
    pub h: f64,
    pub steps: usize,
    pub paths: usize,
    pub seed: u64,
    /// Period of the torus.
    pub length: f64,
}

/// Euler paths of standard Brownian motion started uniformly on the torus.
/// Path `i` draws from RNG stream `i`: its start point, then its increments
/// step by step.
#[derive(Clone, Debug, PartialEq)]
pub struct PathEnsemble {
    cfg: EnsembleConfig,
    starts: Vec<f64>,
    increments: Vec<f64>,
}

pub fn simulate_paths(cfg: &EnsembleConfig, exec: Exec) -> Result<PathEnsemble> {
    if cfg.n == 0 || cfg.steps == 0 || cfg.paths == 0 {
        return domain("dimension, steps and paths must be at least 1");
    }
    if !(cfg.h > 0.0) || !cfg.h.is_finite() || !(cfg.length > 0.0) {
        return domain("step and torus length must be positive");
    }
    let (n, steps) = (cfg.n, cfg.steps);
    let sd = cfg.h.sqrt();
    let per_path = exec.map(cfg.paths, |p| {
        let mut rng = stream_rng(cfg.seed, p as u64);
        let start: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * cfg.length).collect();
        let inc: Vec<f64> = (0..n * steps)
            .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
            .collect();
        (start, inc)
    });
    let mut starts = Vec::with_capacity(n * cfg.paths);
    let mut increments = Vec::with_capacity(n * steps * cfg.paths);
    for (s, i) in per_path {
        starts.extend(s);
        increments.extend(i);
    }
    Ok(PathEnsemble {
        cfg: cfg.clone(),
        starts,
        increments,
    })
}

impl PathEnsemble {
    pub fn config(&self) -> &EnsembleConfig {
        &self.cfg
    }

    pub fn dim(&self) -> usize {
        self.cfg.n
    }

    pub fn paths(&self) -> usize {
        self.cfg.paths
    }

    pub fn steps(&self) -> usize {
        self.cfg.steps
    }

    pub fn step(&self) -> f64 {
        self.cfg.h
    }

    pub fn start(&self, path: usize) -> &[f64] {
        &self.starts[path * self.cfg.n..(path + 1) * self.cfg.n]
    }

    /// `ΔX` of step `k` (from `t_k` to `t_{k+1}`).
    pub fn increment(&self, path: usize, k: usize) -> &[f64] {
        let n = self.cfg.n;
        let base = (path * self.cfg.steps + k) * n;
        &self.increments[base..base + n]
    }

    /// Unwrapped displacement `X_{t_k} - X_0`.
    pub fn displacement(&self, path: usize, k: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for m in 0..k {
            out.iter_mut()
                .zip(self.increment(path, m))
                .for_each(|(o, d)| *o += d);
        }
    }

    /// Position at `t_k`, wrapped onto `[0, L)ⁿ`.
    pub fn position(&self, path: usize, k: usize, out: &mut [f64]) {
        self.displacement(path, k, out);
        let l = self.cfg.length;
        out.iter_mut()
            .zip(self.start(path))
            .for_each(|(o, s)| *o = (*o + s).rem_euclid(l));
    }

    /// The same Brownian paths sampled with step `factor·h` (increments
    /// summed in groups of `factor`).
    pub fn coarsen(&self, factor: usize) -> Result<PathEnsemble> {
        if factor == 0 || !self.cfg.steps.is_multiple_of(factor) {
            return domain(format!(
                "factor {factor} does not divide {} steps",
                self.cfg.steps
            ));
        }
        let n = self.cfg.n;
        let steps = self.cfg.steps / factor;
        let mut increments = vec![0.0; n * steps * self.cfg.paths];
        for p in 0..self.cfg.paths {
            for k in 0..self.cfg.steps {
                let dst = (p * steps + k / factor) * n;
                for (a, d) in self.increment(p, k).iter().enumerate() {
                    increments[dst + a] += d;
                }
            }
        }
        let cfg = EnsembleConfig {
            h: self.cfg.h * factor as f64,
            steps,
            ..self.cfg.clone()
        };
        Ok(PathEnsemble {
            cfg,
            starts: self.starts.clone(),
            increments,
        })
    }

    /// Per-axis mean and variance of all increments with standard errors.
    pub fn increment_stats(&self) -> Vec<AxisStats> {
        let n = self.cfg.n;
        (0..n)
            .map(|a| {
                let vals: Vec<f64> = self.increments.iter().skip(a).step_by(n).copied().collect();
                let mean = MeanEstimate::of(&vals);
                let sq: Vec<f64> = vals.iter().map(|v| v * v).collect();
                AxisStats {
                    mean,
                    second_moment: MeanEstimate::of(&sq),
                }
            })
            .collect()
    }
}

/// A sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub count: usize,
}

impl MeanEstimate {
    pub fn of(values: &[f64]) -> Self {
        let m = values.len() as f64;
        let mean = pairwise_sum(values) / m;
        let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        let var = if values.len() > 1 {
            pairwise_sum(&dev) / (m - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            std_error: (var / m).sqrt(),
            count: values.len(),
        }
    }

    /// `|mean - target| ≤ k·SE` (exact equality passes when `SE = 0`).
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_error
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AxisStats {
    pub mean: MeanEstimate,
    pub second_moment: MeanEstimate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MarkovCheck {
    pub mc_value: f64,
    pub exact_value: f64,
    pub std_error: f64,
}

impl MarkovCheck {
    pub fn passes(&self, k: f64) -> bool {
        (self.mc_value - self.exact_value).abs() <= k * self.std_error
    }
}

/// Average of `g(X_t)` over paths started uniformly, against the torus mean
/// of `g`. `g` must have exactly one component and `t = k·h`.
pub fn markov_identity_check(
    g: &FormField,
    k: usize,
    ens: &PathEnsemble,
    exec: Exec,
) -> Result<MarkovCheck> {
    if g.components().len() != 1 {
        return domain("the Markov check takes a scalar (single-component) field");
    }
    if g.dim() != ens.dim() || (g.grid().length() - ens.cfg.length).abs() > 0.0 {
        return domain("field and ensemble must share dimension and torus");
    }
    if k > ens.steps() {
        return domain(format!("time index {k} exceeds {} steps", ens.steps()));
    }
    let tp = TrigPolynomial::from_field(g);
    let values = exec.map(ens.paths(), |p| {
        let mut x = vec![0.0; ens.dim()];
        let mut v = [0.0];
        ens.position(p, k, &mut x);
        tp.eval(&x, &mut v);
        v[0]
    });
    let est = MeanEstimate::of(&values);
    let exact = pairwise_sum(&g.components()[0]) / g.grid().len() as f64;
    Ok(MarkovCheck {
        mc_value: est.mean,
        exact_value: exact,
        std_error: est.std_error,
    })
}

/// RMS over paths of `|U_N - (f(X_τ) - e^{½τΔ}f(X_0))|` where
/// `U_N = Σ_k ∇u(X_{t_k}, τ - t_k)·ΔX_k` and `τ = N h`.
pub fn ito_terminal_check(f: &FormField, ens: &PathEnsemble, exec: Exec) -> Result<f64> {
    if f.dim() != ens.dim() || (f.grid().length() - ens.cfg.length).abs() > 0.0 {
        return domain("field and ensemble must share dimension and torus");
    }
    let tp = TrigPolynomial::from_field(f);
    let (n, steps, h) = (ens.dim(), ens.steps(), ens.step());
    let tau = steps as f64 * h;
    let at: Vec<TrigPolynomial> = (0..steps).map(|k| tp.at_time(tau - k as f64 * h)).collect();
    let heat_tau = tp.at_time(tau);
    let c = tp.components();
    let sq = exec.map(ens.paths(), |p| {
        let mut x = vec![0.0; n];
        let mut grad = vec![0.0; n * c];
        let mut u = vec![0.0; c];
        for (k, poly) in at.iter().enumerate() {
            ens.position(p, k, &mut x);
            poly.gradient(&x, &mut grad);
            let dx = ens.increment(p, k);
            for (comp, uc) in u.iter_mut().enumerate() {
                *uc += (0..n).map(|a| grad[a * c + comp] * dx[a]).sum::<f64>();
            }
        }
        let mut end = vec![0.0; c];
        let mut start = vec![0.0; c];
        ens.position(p, steps, &mut x);
        tp.eval(&x, &mut end);
        heat_tau.eval(ens.start(p), &mut start);
        (0..c)
            .map(|i| (u[i] - (end[i] - start[i])).powi(2))
            .sum::<f64>()
    });
    Ok((pairwise_sum(&sq) / ens.paths() as f64).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ItoConvergence {
    pub step_sizes: Vec<f64>,
    pub rms: Vec<f64>,
    /// Least-squares slope of `log rms` against `log h`.
    pub order: f64,
}

/// Runs [`ito_terminal_check`] on coarsenings of one fine ensemble by the
/// given factors, so all step sizes share the Brownian paths.
pub fn ito_convergence(
    f: &FormField,
    fine: &PathEnsemble,
    factors: &[usize],
    exec: Exec,
) -> Result<ItoConvergence> {
    if factors.len() < 2 {
        return domain("need at least two step sizes");
    }
    let mut step_sizes = Vec::new();
    let mut rms = Vec::new();
    for &m in factors {
        let ens = fine.coarsen(m)?;
        step_sizes.push(ens.step());
        rms.push(ito_terminal_check(f, &ens, exec)?);
    }
    let xs: Vec<f64> = step_sizes.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = rms.iter().map(|r| r.ln()).collect();
    Ok(ItoConvergence {
        order: ls_slope(&xs, &ys),
        step_sizes,
        rms,
    })
}

fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

/// A predictable diagonal multiplier sequence: at step `k` the multipliers
/// may depend on `U_0, …, U_k` only, and each must lie in `[-1, 1]`.
pub trait PredictableTransform: Sync {
    fn multipliers(&self, k: usize, u: &[f64], out: &mut [f64]);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Transform {
    Identity,
    /// `(-1)^k`.
    Alternating,
    /// `sign(U_k)` per axis (`+1` at zero).
    SignOfU,
    /// `1` while the first coordinate of `U` is nonnegative, else `0`.
    StopBelowZero,
}

impl Transform {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "identity" => Some(Self::Identity),
            "alternating" => Some(Self::Alternating),
            "sign" => Some(Self::SignOfU),
            "stop" => Some(Self::StopBelowZero),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Identity => "identity",
            Self::Alternating => "alternating",
            Self::SignOfU => "sign",
            Self::StopBelowZero => "stop",
        }
    }
}

impl PredictableTransform for Transform {
    fn multipliers(&self, k: usize, u: &[f64], out: &mut [f64]) {
        match self {
            Self::Identity => out.iter_mut().for_each(|v| *v = 1.0),
            Self::Alternating => {
                let s = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
                out.iter_mut().for_each(|v| *v = s);
            }
            Self::SignOfU => out
                .iter_mut()
                .zip(u)
                .for_each(|(v, x)| *v = if *x >= 0.0 { 1.0 } else { -1.0 }),
            Self::StopBelowZero => {
                let s = if u[0] >= 0.0 { 1.0 } else { 0.0 };
                out.iter_mut().for_each(|v| *v = s);
            }
        }
    }
}

/// One simulated pair: `U` a Gaussian walk in `ℝ^d`, `Y_k = Σ V_m ΔU_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct MartingalePair {
    pub dim: usize,
    /// `U_0 = 0, U_1, …, U_K`, flattened.
    pub u: Vec<f64>,
    pub y: Vec<f64>,
    pub qv_u: Vec<f64>,
    pub qv_y: Vec<f64>,
    /// `⟨U⟩_k - ⟨Y⟩_k`, accumulated from nonnegative per-step terms.
    pub qv_gap: Vec<f64>,
}

impl MartingalePair {
    /// `⟨U⟩ - ⟨Y⟩` is nonnegative and nondecreasing (exact comparison).
    pub fn subordinate(&self) -> bool {
        self.qv_gap.first().is_none_or(|&g| g >= 0.0)
            && self.qv_gap.windows(2).all(|w| w[1] >= w[0])
    }

    pub fn terminal_u(&self) -> &[f64] {
        &self.u[self.u.len() - self.dim..]
    }

    pub fn terminal_y(&self) -> &[f64] {
        &self.y[self.y.len() - self.dim..]
    }
}

/// Simulates trial `trial` (RNG stream `trial` of `seed`) with unit-variance
/// increments.
pub fn simulate_pair<T: PredictableTransform + ?Sized>(
    transform: &T,
    dim: usize,
    steps: usize,
    seed: u64,
    trial: u64,
) -> Result<MartingalePair> {
    let mut rng = stream_rng(seed, trial);
    let mut pair = MartingalePair {
        dim,
        u: vec![0.0; dim],
        y: vec![0.0; dim],
        qv_u: vec![0.0],
        qv_y: vec![0.0],
        qv_gap: vec![0.0],
    };
    let mut v = vec![0.0; dim];
    let mut du = vec![0.0; dim];
    for k in 0..steps {
        let base = k * dim;
        transform.multipliers(k, &pair.u[base..base + dim], &mut v);
        if let Some(bad) = v.iter().find(|x| !(x.abs() <= 1.0)) {
            return Err(Error::Precondition(format!(
                "transform multiplier {bad} at step {k} exceeds 1"
            )));
        }
        du.iter_mut().for_each(|d| *d = rng.sample(StandardNormal));
        let (mut su, mut sy, mut gap) = (0.0, 0.0, 0.0);
        for a in 0..dim {
            let dy = v[a] * du[a];
            let (qu, qy) = (du[a] * du[a], dy * dy);
            su += qu;
            sy += qy;
            gap += qu - qy;
            pair.u.push(pair.u[base + a] + du[a]);
            pair.y.push(pair.y[base + a] + dy);
        }
        pair.qv_u.push(pair.qv_u[k] + su);
        pair.qv_y.push(pair.qv_y[k] + sy);
        pair.qv_gap.push(pair.qv_gap[k] + gap);
    }
    Ok(pair)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransformConfig {
    pub p: f64,
    pub dim: usize,
    pub steps: usize,
    pub trials: usize,
    pub seed: u64,
    pub bootstrap: usize,
    /// Largest acceptable relative bootstrap standard error.
    pub max_rel_se: f64,
}

impl TransformConfig {
    pub fn new(p: f64, steps: usize, trials: usize, seed: u64) -> Self {
        Self {
            p,
            dim: 1,
            steps,
            trials,
            seed,
            bootstrap: 200,
            max_rel_se: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransformReport {
    /// `(E‖Y_K‖^p)^{1/p} / (E‖U_K‖^p)^{1/p}`.
    pub ratio: f64,
    /// Bootstrap standard error of the ratio.
    pub std_error: f64,
    pub ceiling: f64,
    pub subordination_violations: usize,
}

impl TransformReport {
    pub fn relative_se(&self) -> f64 {
        self.std_error / self.ratio.abs().max(f64::MIN_POSITIVE)
    }

    /// `ratio ≤ (p* - 1)(1 + 3·relative SE)` and no subordination failures.
    pub fn passes(&self) -> bool {
        self.subordination_violations == 0
            && self.ratio <= self.ceiling * (1.0 + 3.0 * self.relative_se())
    }
}

pub fn martingale_transform_experiment<T: PredictableTransform + ?Sized>(
    transform: &T,
    cfg: &TransformConfig,
    exec: Exec,
) -> Result<TransformReport> {
    let ceiling = p_star(cfg.p)? - 1.0;
    if cfg.dim == 0 || cfg.steps == 0 || cfg.trials < 2 || cfg.bootstrap < 2 {
        return domain("dimension, steps, trials and bootstrap replicates must be positive");
    }
    let rows = exec.map(cfg.trials, |t| -> Result<(f64, f64, bool)> {
        let pair = simulate_pair(transform, cfg.dim, cfg.steps, cfg.seed, t as u64)?;
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt().powf(cfg.p);
        Ok((
            norm(pair.terminal_y()),
            norm(pair.terminal_u()),
            pair.subordinate(),
        ))
    });
    let mut ys = Vec::with_capacity(cfg.trials);
    let mut us = Vec::with_capacity(cfg.trials);
    let mut violations = 0;
    for r in rows {
        let (y, u, ok) = r?;
        ys.push(y);
        us.push(u);
        violations += usize::from(!ok);
    }
    let ratio_of = |y: &[f64], u: &[f64]| (pairwise_sum(y) / pairwise_sum(u)).powf(1.0 / cfg.p);
    let ratio = ratio_of(&ys, &us);
    let boots = exec.map(cfg.bootstrap, |b| {
        let mut rng = stream_rng(cfg.seed, BOOTSTRAP_STREAM + b as u64);
        let mut by = Vec::with_capacity(cfg.trials);
        let mut bu = Vec::with_capacity(cfg.trials);
        for _ in 0..cfg.trials {
            let i = rng.gen_range(0..cfg.trials);
            by.push(ys[i]);
            bu.push(us[i]);
        }
        ratio_of(&by, &bu)
    });
    let boot = MeanEstimate::of(&boots);
    let std_error = boot.std_error * (cfg.bootstrap as f64).sqrt();
    let report = TransformReport {
        ratio,
        std_error,
        ceiling,
        subordination_violations: violations,
    };
    if report.relative_se() > cfg.max_rel_se {
        return Err(Error::StatisticalPower {
            half_width: report.relative_se(),
            limit: cfg.max_rel_se,
        });
    }
    Ok(report)
}
