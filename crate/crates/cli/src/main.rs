mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use ba_heat::asymptotics::{asymptotic_bound, c_asym, sigma_probe};
use ba_heat::fourier::{
    apply_s_with, apply_spectral_multiplier, heat_extension_with, imaginary_power_constant,
    imaginary_power_constant_closed_form, laplace_symbol_eval, load_ffld, lp_norm_with,
    norm_search, psw_integral_with, random_field, save_ffld, stream_rng, FormField,
    NormSearchConfig, PswConfig, QuadConfig, RandomFieldSpec, SpectralSymbol,
};
use ba_heat::heat_matrix::{
    block_spectrum_deviation, bound_constants, closed_form_grade_norm, grade_norm_sweep,
    optimality_margin, overall_constant_closed_form, p_star, two_block_norm,
};
use ba_heat::stochastic::{
    ito_convergence, markov_identity_check, martingale_transform_experiment, simulate_paths,
    EnsembleConfig, Transform, TransformConfig,
};
use ba_heat::Exec;
use report::{Format, Report};

#[derive(Parser, Debug)]
#[command(
    name = "ba-heat",
    version,
    about = "Heat-matrix bounds, Fourier transforms and Monte Carlo checks"
)]
struct Cli {
    /// Base RNG seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (speed only; results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the command's default tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Per-grade and overall L^p bound constants.
    Bounds {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
    },
    /// Grade norms and block spectra of the heat matrix over an α grid.
    MatrixVerify {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 21)]
        alpha_grid: usize,
    },
    /// Applies an operator to an FFLD field.
    Apply(ApplyArgs),
    /// Writes a random band-limited FFLD field.
    RandomField(FieldArgs),
    /// Random search for large ‖S f‖_p / ‖f‖_p.
    NormSearch {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 32)]
        points: usize,
        #[arg(long, default_value_t = 6)]
        band: usize,
        #[arg(long, default_value_t = 64)]
        budget: usize,
    },
    /// Heat-extension integral against its L^p × L^q bound.
    Psw {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 32)]
        points: usize,
        #[arg(long, default_value_t = 5)]
        band: usize,
        #[arg(long, default_value_t = 1.0)]
        t_max: f64,
        /// FFLD input for f (random if absent).
        #[arg(long)]
        f: Option<PathBuf>,
        /// FFLD input for g (random if absent).
        #[arg(long)]
        g: Option<PathBuf>,
    },
    /// Laplace-transform evaluation of λ^{is} and the (-Δ)^{is} constant.
    Impow {
        #[arg(long)]
        s: f64,
        #[arg(long)]
        p: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.1,1,10")]
        lambda: Vec<f64>,
    },
    /// Asymptotic constant and a random probe of ‖σ·A‖.
    Asymptotics {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Monte Carlo checks on Brownian paths and martingale transforms.
    #[command(subcommand)]
    Simulate(Simulate),
}

#[derive(Args, Debug)]
struct ApplyArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// `s`, `heat` or `impow`.
    #[arg(long)]
    op: String,
    /// Heat time.
    #[arg(long, default_value_t = 0.0)]
    t: f64,
    /// Imaginary power exponent.
    #[arg(long, default_value_t = 0.0)]
    s: f64,
    /// Imaginary part of the `impow` output (`--output` gets the real part).
    #[arg(long)]
    output_imag: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FieldArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 32)]
    points: usize,
    #[arg(long, default_value_t = 5)]
    band: usize,
    #[arg(long, default_value_t = 1.0)]
    length: f64,
    /// Grades to populate (all if empty).
    #[arg(long, value_delimiter = ',')]
    grades: Vec<usize>,
    /// Keep the zero mode.
    #[arg(long)]
    with_mean: bool,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Simulate {
    /// Path average of g(X_t) against the torus mean of g.
    Markov {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 20_000)]
        paths: usize,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, default_value_t = 0.01)]
        h: f64,
    },
    /// Discrete Itô representation error over coupled step sizes.
    Ito {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 4000)]
        paths: usize,
        #[arg(long, default_value_t = 64)]
        steps: usize,
        #[arg(long, default_value_t = 0.1)]
        horizon: f64,
        #[arg(long, value_delimiter = ',', default_value = "4,2,1")]
        factors: Vec<usize>,
    },
    /// Ratio of L^p norms of a transformed martingale and its source.
    Transform {
        #[arg(long)]
        p: f64,
        /// `identity`, `alternating`, `sign` or `stop`.
        #[arg(long, default_value = "sign")]
        transform: String,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 16)]
        steps: usize,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(report) => {
            if let Err(e) = report.write(cli.format, std::io::stdout().lock()) {
                eprintln!("error: {e:#}");
                return ExitCode::from(1);
            }
            ExitCode::from(if report.passed() { 0 } else { 2 })
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<Report> {
    if let Some(k) = cli.threads {
        if k == 0 {
            bail!("--threads must be at least 1");
        }
        #[cfg(feature = "parallel")]
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .context("building thread pool")?;
    }
    let exec = Exec::default();
    let mut r = match &cli.command {
        Command::Bounds { n, p } => bounds(*n, *p, cli.tol)?,
        Command::MatrixVerify { n, alpha_grid } => matrix_verify(*n, *alpha_grid, cli.tol, exec)?,
        Command::Apply(a) => apply(a, exec)?,
        Command::RandomField(a) => random_field_cmd(a, cli.seed, exec)?,
        Command::NormSearch {
            n,
            p,
            points,
            band,
            budget,
        } => {
            let mut r = Report::new("norm-search");
            r.input("n", *n)
                .input("p", *p)
                .input("points", *points)
                .input("band", *band)
                .input("budget", *budget);
            let res = norm_search(
                *p,
                &NormSearchConfig::new(*n, *points, *band, *budget, cli.seed),
                exec,
            )?;
            r.row("best_ratio", res.best_ratio)
                .row("ceiling", res.ceiling)
                .row("evaluations", res.evaluations as f64)
                .row("degenerate", res.degenerate as f64)
                .row("best_index", res.best.index as f64)
                .row("best_climbs", res.best.climbs as f64);
            r.check("best_ratio_below_ceiling", res.best_ratio <= res.ceiling);
            r
        }
        Command::Psw {
            n,
            p,
            points,
            band,
            t_max,
            f,
            g,
        } => psw(
            *n,
            *p,
            *points,
            *band,
            *t_max,
            f.as_ref(),
            g.as_ref(),
            cli.seed,
            cli.tol,
            exec,
        )?,
        Command::Impow { s, p, lambda } => impow(*s, *p, lambda, cli.tol)?,
        Command::Asymptotics { n, p, samples } => {
            asymptotics(*n, *p, *samples, cli.seed, cli.tol, exec)?
        }
        Command::Simulate(s) => simulate(s, cli.seed, cli.tol, exec)?,
    };
    r.input("seed", cli.seed);
    if let Some(t) = cli.tol {
        r.input("tol", t);
    }
    Ok(r)
}

fn bounds(n: usize, p: f64, tol: Option<f64>) -> anyhow::Result<Report> {
    let tol = tol.unwrap_or(1e-12);
    let b = bound_constants(n, p)?;
    let mut r = Report::new("bounds");
    r.input("n", n).input("p", p);
    r.row("p_star", b.p_star);
    for g in &b.per_grade {
        r.row(format!("grade_{}_alpha_star", g.r), g.alpha_star);
        r.row(format!("grade_{}_constant", g.r), g.constant);
    }
    r.row("overall_constant", b.overall_constant)
        .row("overall_exact_num", b.overall_exact.num as f64)
        .row("overall_exact_den", b.overall_exact.den as f64)
        .row("bound", b.overall_bound);
    r.check(
        "overall_matches_closed_form",
        (b.overall_constant - overall_constant_closed_form(n)).abs() <= tol,
    );
    r.check(
        "exact_matches_float",
        (b.overall_exact.to_f64() - b.overall_constant).abs() <= tol,
    );
    Ok(r)
}

fn matrix_verify(n: usize, points: usize, tol: Option<f64>, exec: Exec) -> anyhow::Result<Report> {
    let tol = tol.unwrap_or(1e-9);
    if points < 2 {
        bail!("--alpha-grid needs at least 2 points");
    }
    let alphas: Vec<f64> = (0..points)
        .map(|i| i as f64 / (points - 1) as f64)
        .collect();
    let cells = grade_norm_sweep(n, &alphas, exec)?;
    let mut r = Report::new("matrix-verify");
    r.input("n", n).input("alpha_grid", points);
    let mut worst_formula = 0.0f64;
    let mut edge_excess = f64::NEG_INFINITY;
    for c in &cells {
        r.row(format!("norm_r{}_alpha{:.6}", c.r, c.alpha), c.numeric);
        worst_formula =
            worst_formula.max((c.numeric - closed_form_grade_norm(n, c.r, c.alpha)).abs());
        if c.r == 0 || c.r == n {
            edge_excess = edge_excess.max(c.numeric - two_block_norm(n, c.r, c.alpha));
        }
    }
    let mut worst_block = 0.0f64;
    for &a in &alphas {
        worst_block = worst_block.max(block_spectrum_deviation(n, a)?);
    }
    let mut margin = f64::INFINITY;
    for rr in 0..=n {
        margin = margin.min(optimality_margin(n, rr, &alphas)?);
    }
    r.row("max_norm_error", worst_formula)
        .row("max_block_spectrum_error", worst_block)
        .row("min_optimality_margin", margin)
        .row("max_edge_excess_over_two_block", edge_excess);
    r.check("grade_norms", worst_formula <= tol)
        .check("block_spectra", worst_block <= tol)
        .check("optimal_alpha", margin >= -tol)
        .check("edge_grades_below_two_block", edge_excess <= tol);
    Ok(r)
}

fn apply(a: &ApplyArgs, exec: Exec) -> anyhow::Result<Report> {
    let f = load_ffld(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let mut imag_max = 0.0;
    let out = match a.op.as_str() {
        "s" => apply_s_with(&f, exec)?,
        "heat" => heat_extension_with(&f, a.t, exec)?,
        "impow" => {
            let sym = SpectralSymbol::imaginary_power(a.s)?;
            let out = apply_spectral_multiplier(&sym, &f, &QuadConfig::default(), exec)?;
            imag_max = out.max_imag();
            if let Some(path) = &a.output_imag {
                let im = out
                    .components()
                    .iter()
                    .map(|c| c.iter().map(|z| z.im).collect())
                    .collect();
                let im = FormField::from_components(f.grid().clone(), f.grades(), im)?;
                save_ffld(&im, path).with_context(|| format!("writing {}", path.display()))?;
            }
            out.real_part()
        }
        other => bail!("unknown operator `{other}` (expected s, heat or impow)"),
    };
    save_ffld(&out, &a.output).with_context(|| format!("writing {}", a.output.display()))?;
    let mut r = Report::new("apply");
    r.input("input", a.input.display().to_string())
        .input("output", a.output.display().to_string())
        .input("op", a.op.clone());
    if a.op == "heat" {
        r.input("t", a.t);
    }
    if a.op == "impow" {
        r.input("s", a.s).input(
            "output_imag",
            a.output_imag.as_ref().map(|p| p.display().to_string()),
        );
    }
    let before = lp_norm_with(&f, 2.0, exec)?;
    let after = lp_norm_with(&out, 2.0, exec)?;
    r.row("input_l2", before)
        .row("output_l2", after)
        .row("output_max_abs", out.max_abs())
        .row("output_imag_max_abs", imag_max);
    r.check("finite_output", out.check_finite().is_ok());
    Ok(r)
}

fn field_spec(
    n: usize,
    points: usize,
    band: usize,
    length: f64,
    grades: Vec<usize>,
    mean_zero: bool,
) -> RandomFieldSpec {
    RandomFieldSpec {
        dims: vec![points; n],
        length,
        grades,
        band,
        mean_zero,
    }
}

fn random_field_cmd(a: &FieldArgs, seed: u64, exec: Exec) -> anyhow::Result<Report> {
    let spec = field_spec(
        a.n,
        a.points,
        a.band,
        a.length,
        a.grades.clone(),
        !a.with_mean,
    );
    let f = random_field(&spec, &mut stream_rng(seed, 0), exec)?;
    save_ffld(&f, &a.output).with_context(|| format!("writing {}", a.output.display()))?;
    let mut r = Report::new("random-field");
    r.input("n", a.n)
        .input("points", a.points)
        .input("band", a.band)
        .input("length", a.length)
        .input("grades", json!(a.grades))
        .input("with_mean", a.with_mean)
        .input("output", a.output.display().to_string());
    r.row("components", f.components().len() as f64)
        .row("l2", lp_norm_with(&f, 2.0, exec)?);
    Ok(r)
}

#[allow(clippy::too_many_arguments)]
fn psw(
    n: usize,
    p: f64,
    points: usize,
    band: usize,
    t_max: f64,
    f_path: Option<&PathBuf>,
    g_path: Option<&PathBuf>,
    seed: u64,
    tol: Option<f64>,
    exec: Exec,
) -> anyhow::Result<Report> {
    let spec = field_spec(n, points, band, 1.0, Vec::new(), true);
    let load = |path: Option<&PathBuf>, stream: u64| -> anyhow::Result<FormField> {
        match path {
            Some(p) => load_ffld(p).with_context(|| format!("reading {}", p.display())),
            None => Ok(random_field(&spec, &mut stream_rng(seed, stream), exec)?),
        }
    };
    let f = load(f_path, 0)?;
    let g = load(g_path, 1)?;
    let res = psw_integral_with(&f, &g, p, t_max, &PswConfig::default(), exec)?;
    let mut r = Report::new("psw");
    r.input("n", f.dim()).input("p", p).input("t_max", t_max);
    match (f_path, g_path) {
        (None, None) => {
            r.input("points", points).input("band", band);
        }
        _ => {
            r.input("f", f_path.map(|p| p.display().to_string()));
            r.input("g", g_path.map(|p| p.display().to_string()));
        }
    }
    r.row("lhs", res.lhs)
        .row("rhs", res.rhs)
        .row("tail_bound", res.tail_bound)
        .row("quad_error", res.quad_error);
    r.check(
        "inequality",
        res.holds(tol.unwrap_or(1e-6) * res.rhs.max(1.0)),
    );
    Ok(r)
}

fn impow(s: f64, p: f64, lambdas: &[f64], tol: Option<f64>) -> anyhow::Result<Report> {
    let tol = tol.unwrap_or(1e-6);
    let sym = SpectralSymbol::imaginary_power(s)?;
    let cfg = QuadConfig::default();
    let mut r = Report::new("impow");
    r.input("s", s)
        .input("p", p)
        .input("lambda", json!(lambdas));
    let mut worst = 0.0f64;
    for &l in lambdas {
        let v = laplace_symbol_eval(&sym, l, &cfg)?;
        let theta = s * l.ln();
        let err = (v.value.re - theta.cos()).hypot(v.value.im - theta.sin());
        worst = worst.max(err);
        r.row(format!("a_re_lambda{l}"), v.value.re)
            .row(format!("a_im_lambda{l}"), v.value.im)
            .row(format!("quad_error_lambda{l}"), err);
    }
    let c = imaginary_power_constant(s, p)?;
    let closed = imaginary_power_constant_closed_form(s, p)?;
    r.row("constant", c).row("constant_closed_form", closed);
    r.check("quadrature", worst <= tol)
        .check("constant_closed_form", (c - closed).abs() <= 1e-10);
    Ok(r)
}

fn asymptotics(
    n: usize,
    p: f64,
    samples: usize,
    seed: u64,
    tol: Option<f64>,
    exec: Exec,
) -> anyhow::Result<Report> {
    let bound = asymptotic_bound(n, p)?;
    let ps = p_star(p)?;
    let scaled = bound / (ps - 1.0);
    let c = c_asym(n);
    let mut r = Report::new("asymptotics");
    r.input("n", n).input("p", p).input("samples", samples);
    r.row("c_asym", c)
        .row("bound", bound)
        .row("bound_over_p_star_minus_1", scaled)
        .row("relative_excess", scaled / c - 1.0);
    if samples > 0 {
        let probe = sigma_probe(n, samples, seed, exec)?;
        r.row("probe_max_norm", probe.max_norm)
            .row("probe_max_aggregate", probe.max_aggregate)
            .row("probe_max_excess", probe.max_excess)
            .row("probe_min_chain_ratio", probe.min_chain_ratio)
            .row("probe_max_identity_error", probe.max_identity_error);
        r.check("aggregate_bound", probe.max_excess <= tol.unwrap_or(1e-10))
            .check("block_identity", probe.max_identity_error <= 1e-12);
    }
    if ps >= 100.0 {
        r.check("asymptotic_regime", (scaled / c - 1.0).abs() < 0.03);
    }
    Ok(r)
}

fn simulate(s: &Simulate, seed: u64, tol: Option<f64>, exec: Exec) -> anyhow::Result<Report> {
    match s {
        Simulate::Markov { n, paths, steps, h } => {
            let spec = field_spec(*n, 16, 3, 1.0, vec![0], false);
            let g = random_field(&spec, &mut stream_rng(seed, u64::MAX), exec)?;
            let ens = simulate_paths(
                &EnsembleConfig {
                    n: *n,
                    h: *h,
                    steps: *steps,
                    paths: *paths,
                    seed,
                    length: 1.0,
                },
                exec,
            )?;
            let m = markov_identity_check(&g, *steps, &ens, exec)?;
            let k = tol.unwrap_or(4.0);
            let mut r = Report::new("simulate markov");
            r.input("n", *n)
                .input("paths", *paths)
                .input("steps", *steps)
                .input("h", *h)
                .input("se_multiple", k);
            r.row_se("path_mean", m.mc_value, m.std_error)
                .row("torus_mean", m.exact_value);
            r.check("markov_identity", m.passes(k));
            Ok(r)
        }
        Simulate::Ito {
            n,
            paths,
            steps,
            horizon,
            factors,
        } => {
            let spec = field_spec(*n, 16, 2, 1.0, vec![1], true);
            let f = random_field(&spec, &mut stream_rng(seed, u64::MAX), exec)?;
            let h = horizon / *steps as f64;
            let fine = simulate_paths(
                &EnsembleConfig {
                    n: *n,
                    h,
                    steps: *steps,
                    paths: *paths,
                    seed,
                    length: 1.0,
                },
                exec,
            )?;
            let conv = ito_convergence(&f, &fine, factors, exec)?;
            let mut r = Report::new("simulate ito");
            r.input("n", *n)
                .input("paths", *paths)
                .input("steps", *steps)
                .input("horizon", *horizon)
                .input("factors", json!(factors));
            for (h, e) in conv.step_sizes.iter().zip(&conv.rms) {
                r.row(format!("rms_h{h}"), *e);
            }
            r.row("order", conv.order);
            let slack = tol.unwrap_or(0.2);
            r.check("half_order", (conv.order - 0.5).abs() <= slack);
            Ok(r)
        }
        Simulate::Transform {
            p,
            transform,
            dim,
            steps,
            trials,
        } => {
            let Some(t) = Transform::parse(transform) else {
                bail!("unknown transform `{transform}` (expected identity, alternating, sign or stop)");
            };
            let mut cfg = TransformConfig {
                dim: *dim,
                ..TransformConfig::new(*p, *steps, *trials, seed)
            };
            if let Some(tol) = tol {
                cfg.max_rel_se = tol;
            }
            let rep = martingale_transform_experiment(&t, &cfg, exec)?;
            let mut r = Report::new("simulate transform");
            r.input("p", *p)
                .input("transform", t.name())
                .input("dim", *dim)
                .input("steps", *steps)
                .input("trials", *trials)
                .input("max_rel_se", cfg.max_rel_se);
            r.row_se("ratio", rep.ratio, rep.std_error)
                .row("ceiling", rep.ceiling)
                .row(
                    "subordination_violations",
                    rep.subordination_violations as f64,
                );
            r.check("subordination", rep.subordination_violations == 0)
                .check("ratio_below_ceiling", rep.passes());
            Ok(r)
        }
    }
}
