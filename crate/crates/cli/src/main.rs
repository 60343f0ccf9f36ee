//! Command-line driver: wave profiles, modulation-velocity sweeps, the
//! relaxation rate, the stability index and band boundaries, subcharacteristic
//! reports, Evans-function checks and Hill spectra, with CSV and optional SVG
//! output.
//!
//! Exit codes: 0 success, 2 validation error, 3 numerical failure.

mod svg;

use clap::{Args, Parser, Subcommand};
use kdvks_core::elliptic::EllipticModulus;
use kdvks_core::error::Error as CoreError;
use kdvks_core::evans::{
    evans_from_monodromy, hill_spectrum, monodromy_kdv, selected_params, HillOptions,
};
use kdvks_core::perturbed::correctors;
use kdvks_core::selection::{modulus_from_period, period_range};
use kdvks_core::spectral::{
    band_edges, band_sample, stability_index, Branch, IndexResolution, StabilityIndex,
    WaveContext,
};
use kdvks_core::whitham::{subchar_report, BetaPair};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "kdvks",
    about = "Spectral stability of periodic KdV-KS wave trains in the KdV limit",
    version
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GlobalOpts {
    /// Output path (CSV or text report); stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also emit a self-contained SVG plot next to the CSV (or to this path).
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "")]
    svg: Option<String>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override the default sweep tolerance of the stability index.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Plain `key = value` config file; command-line flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the selected wave profile and correctors.
    /// CSV columns: x, U0, U0p, U1, U2.
    Wave {
        /// Elliptic modulus k in [1e-8, 1-1e-7]; exclusive with --x.
        #[arg(long)]
        k: Option<f64>,
        /// Period X (inverted to k along the selected family).
        #[arg(long)]
        x: Option<f64>,
        /// Sample count (power of two).
        #[arg(long, default_value_t = 256)]
        n: usize,
    },
    /// Sweep the Whitham characteristic velocities.
    /// CSV columns: X, alpha1, alpha2, alpha3, beta1, beta2.
    Velocities {
        #[arg(long, default_value_t = 6.3831853)]
        x_min: f64,
        #[arg(long, default_value_t = 30.0)]
        x_max: f64,
        #[arg(long, default_value_t = 500)]
        n_pts: usize,
    },
    /// Sweep the homogeneous relaxation rate.
    /// CSV columns: X, lambda_star.
    RelaxRate {
        #[arg(long, default_value_t = 6.2831854)]
        x_min: f64,
        #[arg(long, default_value_t = 30.0)]
        x_max: f64,
        #[arg(long, default_value_t = 300)]
        n_pts: usize,
    },
    /// Stability index Ind(X) with the subcharacteristic flags.
    Index {
        #[arg(long)]
        x: f64,
        /// Band sample counts per band.
        #[arg(long, default_value_t = 400)]
        resolution: usize,
    },
    /// Locate the stability band boundaries (X1, X2).
    Boundaries {
        /// Band sample counts per band for each index evaluation.
        #[arg(long, default_value_t = 400)]
        resolution: usize,
    },
    /// Subcharacteristic report (S1)-(S3) at period X.
    Subchar {
        #[arg(long)]
        x: f64,
    },
    /// Validate the band parameterization against the Evans function.
    /// CSV columns: eta, Im_lambda0, xi, evans_rel.
    EvansCheck {
        #[arg(long)]
        x: f64,
        /// Band samples per band.
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Hill (Fourier-Galerkin) spectrum of the Bloch operator at delta > 0.
    /// CSV columns: re, im (eigenvalues, descending real part).
    Hill {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        delta: f64,
        /// Bloch parameter; accepts a literal value.
        #[arg(long, default_value_t = 0.0)]
        xi: f64,
        /// Truncation: modes -N..N.
        #[arg(long, default_value_t = 64)]
        n_modes: usize,
        /// Exclude the O(delta^2) profile corrector.
        #[arg(long)]
        no_u2: bool,
    },
}

fn main() -> ExitCode {
    let mut cli = Cli::parse();
    if let Err(e) = apply_config(&mut cli.global) {
        eprintln!("error: config: {e}");
        return ExitCode::from(2);
    }
    if let Some(t) = cli.global.threads {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .is_err()
        {
            eprintln!("error: validation: could not configure {t} threads");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = match &e {
                AppError::Validation(_) => 2,
                AppError::Numerical(_) => 3,
                AppError::Io(_) => 2,
            };
            eprintln!("error: {e}");
            ExitCode::from(code)
        }
    }
}

#[derive(Debug)]
enum AppError {
    Validation(String),
    Numerical(String),
    Io(String),
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Validation(m) => write!(f, "validation: {m}"),
            AppError::Numerical(m) => write!(f, "numerical: {m}"),
            AppError::Io(m) => write!(f, "io: {m}"),
        }
    }
}

impl From<CoreError> for AppError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Numerical { .. } => AppError::Numerical(e.to_string()),
            _ => AppError::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e.to_string())
    }
}

type AppResult = Result<(), AppError>;

fn apply_config(g: &mut GlobalOpts) -> Result<(), String> {
    let Some(path) = &g.config else {
        return Ok(());
    };
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("line {}: expected key = value", lineno + 1));
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            // flags win over config
            "threads" => {
                if g.threads.is_none() {
                    g.threads = Some(value.parse().map_err(|_| "bad threads value")?);
                }
            }
            "tol" => {
                if g.tol.is_none() {
                    g.tol = Some(value.parse().map_err(|_| "bad tol value")?);
                }
            }
            _ => return Err(format!("unknown config key `{key}`")),
        }
    }
    Ok(())
}

/// 17-significant-digit decimal formatting for reproducible CSV output.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn emit(global: &GlobalOpts, content: &str) -> AppResult {
    match &global.out {
        Some(path) => std::fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn emit_svg(global: &GlobalOpts, default_stem: &str, content: &str) -> AppResult {
    let Some(opt) = &global.svg else {
        return Ok(());
    };
    let path = if opt.is_empty() {
        match &global.out {
            Some(p) => p.with_extension("svg"),
            None => PathBuf::from(format!("{default_stem}.svg")),
        }
    } else {
        PathBuf::from(opt)
    };
    std::fs::write(path, content)?;
    Ok(())
}

fn modulus_for(k: Option<f64>, x: Option<f64>) -> Result<EllipticModulus, AppError> {
    let k = match (k, x) {
        (Some(k), None) => k,
        (None, Some(x)) => modulus_from_period(x)?,
        _ => {
            return Err(AppError::Validation(
                "provide exactly one of --k or --x".into(),
            ))
        }
    };
    Ok(EllipticModulus::new_admissible(k)?)
}

fn resolution_for(n: usize, tol: Option<f64>) -> IndexResolution {
    IndexResolution {
        n_mid: n,
        n_low: n,
        target: tol.unwrap_or(1e-4),
        ..IndexResolution::default()
    }
}

fn run(cli: &Cli) -> AppResult {
    match &cli.command {
        Command::Wave { k, x, n } => {
            let modulus = modulus_for(*k, *x)?;
            if !n.is_power_of_two() || *n < 32 {
                return Err(AppError::Validation(format!(
                    "n = {n} must be a power of two >= 32"
                )));
            }
            let corr = correctors(modulus, *n)?;
            let mut out = String::from("x,U0,U0p,U1,U2\n");
            for j in 0..*n {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    num(corr.grids.u0.node(j)),
                    num(corr.grids.u0.values()[j]),
                    num(corr.grids.d1.values()[j]),
                    num(corr.u1.values()[j]),
                    num(corr.u2.values()[j]),
                )
                .unwrap();
            }
            emit(&cli.global, &out)?;
            let xs: Vec<f64> = corr.grids.u0.nodes().collect();
            let mk = |vals: &[f64]| xs.iter().cloned().zip(vals.iter().cloned()).collect();
            let plot = svg::line_plot(
                &format!("selected wave, k = {:.6}", modulus.k()),
                "x",
                &[
                    svg::Series { label: "U0", color: svg::PALETTE[0], points: mk(corr.grids.u0.values()) },
                    svg::Series { label: "U1", color: svg::PALETTE[1], points: mk(corr.u1.values()) },
                    svg::Series { label: "U2", color: svg::PALETTE[2], points: mk(corr.u2.values()) },
                ],
            );
            emit_svg(&cli.global, "wave", &plot)
        }
        Command::Velocities { x_min, x_max, n_pts } => {
            validate_period_window(*x_min, *x_max, *n_pts)?;
            let rows: Vec<Result<(f64, [f64; 3], [f64; 2]), AppError>> = grid(*x_min, *x_max, *n_pts)
                .into_par_iter()
                .map(|x| {
                    let rep = subchar_report(x)?;
                    let betas = match rep.betas {
                        BetaPair::Real(b) => b,
                        BetaPair::ComplexPair { re, .. } => [re, f64::NAN],
                    };
                    Ok((x, rep.alphas, betas))
                })
                .collect();
            let mut out = String::from("X,alpha1,alpha2,alpha3,beta1,beta2\n");
            let mut series: Vec<Vec<(f64, f64)>> = vec![Vec::new(); 5];
            for row in rows {
                let (x, a, b) = row?;
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    num(x), num(a[0]), num(a[1]), num(a[2]), num(b[0]), num(b[1])
                )
                .unwrap();
                for (i, &v) in a.iter().chain(b.iter()).enumerate() {
                    series[i].push((x, v));
                }
            }
            emit(&cli.global, &out)?;
            let labels = ["alpha1", "alpha2", "alpha3", "beta1", "beta2"];
            let plot_series: Vec<svg::Series> = series
                .iter()
                .enumerate()
                .map(|(i, pts)| svg::Series {
                    label: labels[i],
                    color: svg::PALETTE[i],
                    points: pts.clone(),
                })
                .collect();
            emit_svg(
                &cli.global,
                "velocities",
                &svg::line_plot("Whitham characteristic velocities", "X", &plot_series),
            )
        }
        Command::RelaxRate { x_min, x_max, n_pts } => {
            validate_period_window(*x_min, *x_max, *n_pts)?;
            let rows: Vec<Result<(f64, f64), AppError>> = grid(*x_min, *x_max, *n_pts)
                .into_par_iter()
                .map(|x| Ok((x, subchar_report(x)?.lambda_star)))
                .collect();
            let mut out = String::from("X,lambda_star\n");
            let mut pts = Vec::new();
            for row in rows {
                let (x, ls) = row?;
                writeln!(out, "{},{}", num(x), num(ls)).unwrap();
                pts.push((x, ls));
            }
            emit(&cli.global, &out)?;
            emit_svg(
                &cli.global,
                "relax-rate",
                &svg::line_plot(
                    "homogeneous relaxation rate",
                    "X",
                    &[svg::Series { label: "lambda_*", color: svg::PALETTE[0], points: pts }],
                ),
            )
        }
        Command::Index { x, resolution } => {
            let res = resolution_for(*resolution, cli.global.tol);
            let idx = stability_index(*x, &res)?;
            emit(&cli.global, &index_report(&idx))
        }
        Command::Boundaries { resolution } => {
            let res = resolution_for(*resolution, cli.global.tol);
            let (x1, x2) = kdvks_core::spectral::find_boundaries(&res)?;
            let mut out = String::new();
            writeln!(out, "X1 = {}", num(x1)).unwrap();
            writeln!(out, "X2 = {}", num(x2)).unwrap();
            emit(&cli.global, &out)
        }
        Command::Subchar { x } => {
            let rep = subchar_report(*x)?;
            let mut out = String::new();
            writeln!(out, "X = {}", num(rep.x)).unwrap();
            writeln!(out, "k = {}", num(rep.k)).unwrap();
            for (i, a) in rep.alphas.iter().enumerate() {
                writeln!(out, "alpha{} = {}", i + 1, num(*a)).unwrap();
            }
            match rep.betas {
                BetaPair::Real(b) => {
                    writeln!(out, "beta1 = {}", num(b[0])).unwrap();
                    writeln!(out, "beta2 = {}", num(b[1])).unwrap();
                }
                BetaPair::ComplexPair { re, im } => {
                    writeln!(out, "beta_re = {}", num(re)).unwrap();
                    writeln!(out, "beta_im = {}", num(im)).unwrap();
                }
            }
            writeln!(out, "lambda_star = {}", num(rep.lambda_star)).unwrap();
            writeln!(out, "s1 = {}", rep.s1).unwrap();
            writeln!(out, "s2 = {}", rep.s2).unwrap();
            writeln!(out, "s3 = {}", rep.s3).unwrap();
            writeln!(out, "margin_s1 = {}", num(rep.margins.s1)).unwrap();
            writeln!(out, "margin_s2 = {}", num(rep.margins.s2)).unwrap();
            writeln!(out, "margin_s3 = {}", num(rep.margins.s3)).unwrap();
            emit(&cli.global, &out)
        }
        Command::EvansCheck { x, samples } => {
            let modulus = modulus_for(None, Some(*x))?;
            let ctx = WaveContext::new(modulus)?;
            let params = selected_params(modulus)?;
            let (e1, e2, e3) = band_edges(modulus);
            let width = e3 - e2;
            let mut etas = Vec::new();
            // the bounded band collapses into the origin regime at large
            // periods; only sweep it while its eigenvalues are resolvable
            if width > 1e-3 {
                let half = *samples / 2;
                for i in 0..half {
                    let f = 0.05 + 0.9 * i as f64 / half.max(2) as f64;
                    etas.push(e2 + f * width);
                }
            }
            let rest = *samples - etas.len();
            for i in 0..rest {
                etas.push(e1 - 0.02 * (100.0f64).powf(i as f64 / (rest - 1).max(1) as f64));
            }
            let rows: Vec<Result<(f64, f64, f64, f64), AppError>> = etas
                .into_par_iter()
                .map(|eta| {
                    let b = band_sample(&ctx, eta, Branch::Plus)?;
                    let mono = monodromy_kdv(&params, b.lambda0, 256)?;
                    let e = evans_from_monodromy(&mono, b.xi, params.period());
                    Ok((eta, b.lambda0.im, b.xi, e.relative))
                })
                .collect();
            let mut out = String::from("eta,Im_lambda0,xi,evans_rel\n");
            let mut worst: f64 = 0.0;
            for row in rows {
                let (eta, l, xi, e) = row?;
                worst = worst.max(e);
                writeln!(out, "{},{},{},{}", num(eta), num(l), num(xi), num(e)).unwrap();
            }
            writeln!(out, "# max_evans_rel = {}", num(worst)).unwrap();
            emit(&cli.global, &out)?;
            if worst > 1e-6 {
                return Err(AppError::Numerical(format!(
                    "Evans oracle defect {worst:.3e} exceeds 1e-6"
                )));
            }
            Ok(())
        }
        Command::Hill { x, delta, xi, n_modes, no_u2 } => {
            let modulus = modulus_for(None, Some(*x))?;
            let grid_n = (4 * *n_modes + 2).next_power_of_two().max(256);
            let corr = correctors(modulus, grid_n)?;
            let spec = hill_spectrum(
                &corr,
                *delta,
                *xi,
                *n_modes,
                HillOptions { include_u2: !no_u2 },
            )?;
            let mut out = String::from("re,im\n");
            for e in &spec.eigenvalues {
                writeln!(out, "{},{}", num(e.re), num(e.im)).unwrap();
            }
            if spec.profile_tail > 1e-12 {
                writeln!(out, "# warning: profile_tail = {}", num(spec.profile_tail)).unwrap();
            }
            emit(&cli.global, &out)
        }
    }
}

fn index_report(idx: &StabilityIndex) -> String {
    let mut out = String::new();
    writeln!(out, "X = {}", num(idx.x)).unwrap();
    writeln!(out, "k = {}", num(idx.k)).unwrap();
    writeln!(out, "ind = {}", num(idx.ind)).unwrap();
    writeln!(out, "band_max = {}", num(idx.band_max)).unwrap();
    writeln!(out, "argmax_eta = {}", num(idx.argmax_eta)).unwrap();
    writeln!(out, "origin_lambda1 = {}", num(idx.origin_lambda1)).unwrap();
    for (i, a) in idx.edge_slopes.iter().enumerate() {
        writeln!(out, "edge_slope{} = {}", i + 1, num(*a)).unwrap();
    }
    writeln!(out, "s1 = {}", idx.subchar.s1).unwrap();
    writeln!(out, "s2 = {}", idx.subchar.s2).unwrap();
    writeln!(out, "s3 = {}", idx.subchar.s3).unwrap();
    writeln!(out, "route_disagreement = {}", num(idx.max_route_disagreement)).unwrap();
    writeln!(out, "max_im_lambda1 = {}", num(idx.max_im_lambda1)).unwrap();
    writeln!(out, "samples = {}", idx.samples).unwrap();
    writeln!(out, "invalid_fraction = {}", num(idx.invalid_fraction)).unwrap();
    out
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1).max(1) as f64)
        .collect()
}

fn validate_period_window(x_min: f64, x_max: f64, n_pts: usize) -> AppResult {
    let (lo, hi) = period_range();
    if !(x_min < x_max) || n_pts < 2 {
        return Err(AppError::Validation(
            "need x_min < x_max and n_pts >= 2".into(),
        ));
    }
    if x_min < lo - 1e-9 || x_max > hi {
        return Err(AppError::Validation(format!(
            "period window [{x_min}, {x_max}] outside attainable [{lo:.6}, {hi:.6}]"
        )));
    }
    Ok(())
}
