mod io;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aaatrig::baselines::{aaa_fit, fft_interpolant};
use aaatrig::calculus::{derivative_at, diff_matrix};
use aaatrig::experiments::{equispaced, history_table, random_rectangle, TestFunction};
use aaatrig::lightning::{field_grid, semicircle_demo, LightningConfig};
use aaatrig::polezero::poles_and_zeros;
use aaatrig::solver::cleanup_with_report;
use aaatrig::trigbary::TWO_PI;
use aaatrig::{fit, Complex64, FarField, FitConfig, Parity, SampleSet};
use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use io::{error_table, ingest, read_raw, Cell, Format, ModelFile, Table};

#[derive(Parser)]
#[command(name = "aaatrig", version, about = "Trigonometric rational approximation of periodic data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit samples and write the model and its error history.
    Fit {
        input: PathBuf,
        #[command(flatten)]
        opts: FitOpts,
        /// Attach poles, residues and zeros to the model file.
        #[arg(long)]
        with_poles: bool,
    },
    /// Evaluate a model file at the points of a sample file.
    Eval {
        model: PathBuf,
        points: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[command(flatten)]
        out: OutOpt,
    },
    /// List poles and residues of a model file.
    Poles {
        model: PathBuf,
        #[command(flatten)]
        out: OutOpt,
    },
    /// Derivatives of a model, at its support points or at given points.
    Diff {
        model: PathBuf,
        #[arg(long, default_value_t = 1)]
        order: usize,
        /// Points file; defaults to the support points.
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[command(flatten)]
        out: OutOpt,
    },
    /// Fit without cleanup, then remove spurious poles.
    Clean {
        input: PathBuf,
        #[command(flatten)]
        opts: FitOpts,
    },
    /// Error tables of the trigonometric fit and classic AAA on the same samples.
    CompareAaa {
        #[command(flatten)]
        source: SampleSource,
        #[command(flatten)]
        opts: FitOpts,
    },
    /// Error tables of the trigonometric fit and truncated FFT interpolation.
    CompareFft {
        #[command(flatten)]
        source: SampleSource,
        #[command(flatten)]
        opts: FitOpts,
    },
    /// Periodic flow past semicircles: lightning solve, then compression.
    LightningDemo {
        #[arg(long, default_value_t = 60)]
        poles_per_corner: usize,
        #[arg(long, default_value_t = 20)]
        runge_degree: usize,
        #[arg(long, default_value_t = 64)]
        nx: usize,
        #[arg(long, default_value_t = 48)]
        ny: usize,
        #[command(flatten)]
        out: OutOpt,
    },
}

#[derive(Args, Clone)]
struct OutOpt {
    /// Output directory; without it the primary result goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ParityArg {
    Odd,
    Even,
}

#[derive(Args, Clone)]
struct FitOpts {
    #[arg(long, value_enum, default_value_t = ParityArg::Odd)]
    parity: ParityArg,
    #[arg(long, default_value_t = 1e-13)]
    tol: f64,
    #[arg(long, default_value_t = 100)]
    mmax: usize,
    #[arg(long, default_value_t = TWO_PI)]
    period: f64,
    #[arg(long)]
    no_cleanup: bool,
    /// Far-field values: "re,im" for both ends or "re,im;re,im" for +i∞ then −i∞.
    #[arg(long)]
    finf: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[command(flatten)]
    out: OutOpt,
}

#[derive(Args, Clone)]
struct SampleSource {
    /// Sample file; when absent the named function is sampled.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    function: Option<FunctionArg>,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Half height of the random rectangle (compare-aaa only).
    #[arg(long, default_value_t = 0.5)]
    half_height: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum FunctionArg {
    Tanh60cos,
    Expsin,
    Exp,
    Logcos4,
}

impl From<FunctionArg> for TestFunction {
    fn from(f: FunctionArg) -> Self {
        match f {
            FunctionArg::Tanh60cos => TestFunction::Tanh60Cos,
            FunctionArg::Expsin => TestFunction::ExpSin,
            FunctionArg::Exp => TestFunction::Exp,
            FunctionArg::Logcos4 => TestFunction::LogCos4,
        }
    }
}

/// A bad flag value or flag combination.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(String);

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Fit { input, opts, with_poles } => {
            let config = fit_config(&opts)?;
            let samples = ingest(&input, Format::detect(&input, opts.format), opts.period)?;
            let model = fit(&samples, &config)?;
            let mut file = ModelFile::from_model(&model, opts.period);
            if with_poles {
                file = file.with_poles(&poles_and_zeros(&model)?);
            }
            let history = error_table(&history_table(model.err_history()));
            emit(&opts.out, &[("model.json", &file.to_json()), ("history.tsv", history.as_str())])
        }
        Command::Eval { model, points, format, out } => {
            let file = ModelFile::read(&model)?;
            let m = file.model()?;
            let raw = read_raw(&points, Format::detect(&points, format), false)?;
            let factor = TWO_PI / file.period();
            let mut t = Table::new(&["re_z", "im_z", "re_f", "im_f"]);
            for &z in &raw.points {
                let f = m.eval(z * factor);
                t.row(&[Cell::Real(z.re), Cell::Real(z.im), Cell::Real(f.re), Cell::Real(f.im)]);
            }
            emit(&out, &[("values.tsv", t.as_str())])
        }
        Command::Poles { model, out } => {
            let file = ModelFile::read(&model)?;
            let report = poles_and_zeros(&file.model()?)?;
            let c = file.period() / TWO_PI;
            let mut t = Table::new(&["re_pole", "im_pole", "re_res", "im_res"]);
            for (&p, &r) in report.poles.iter().zip(&report.residues) {
                let (p, r) = (p * c, r * c);
                t.row(&[Cell::Real(p.re), Cell::Real(p.im), Cell::Real(r.re), Cell::Real(r.im)]);
            }
            let mut zt = Table::new(&["re_zero", "im_zero"]);
            for &z in &report.zeros {
                let z = z * c;
                zt.row(&[Cell::Real(z.re), Cell::Real(z.im)]);
            }
            emit(&out, &[("poles.tsv", t.as_str()), ("zeros.tsv", zt.as_str())])
        }
        Command::Diff { model, order, points, format, out } => {
            if order == 0 {
                return Err(usage("--order must be at least 1"));
            }
            let file = ModelFile::read(&model)?;
            let m = file.model()?;
            let factor = TWO_PI / file.period();
            let chain = factor.powi(order as i32);
            let mut t = Table::new(&["re_z", "im_z", "re_d", "im_d"]);
            match points {
                Some(path) => {
                    let raw = read_raw(&path, Format::detect(&path, format), false)?;
                    for &z in &raw.points {
                        let d = derivative_at(&m, z * factor, order)? * chain;
                        t.row(&[Cell::Real(z.re), Cell::Real(z.im), Cell::Real(d.re), Cell::Real(d.im)]);
                    }
                }
                None => {
                    let d = diff_matrix(&m, order)?.apply(m.fvals());
                    for (&u, &d) in m.support().iter().zip(&d) {
                        let (z, d) = (u / factor, d * chain);
                        t.row(&[Cell::Real(z.re), Cell::Real(z.im), Cell::Real(d.re), Cell::Real(d.im)]);
                    }
                }
            }
            emit(&out, &[("derivatives.tsv", t.as_str())])
        }
        Command::Clean { input, opts } => {
            let config = fit_config(&opts)?;
            let samples = ingest(&input, Format::detect(&input, opts.format), opts.period)?;
            let raw = fit(&samples, &FitConfig { cleanup: false, ..config.clone() })?;
            let (cleaned, report) = cleanup_with_report(&raw, &samples, &config)?;
            eprintln!(
                "order {} -> {}; {} spurious poles",
                raw.order(),
                cleaned.order(),
                report.spurious_poles.len()
            );
            let c = opts.period / TWO_PI;
            let mut t = Table::new(&["re_pole", "im_pole"]);
            for &p in &report.spurious_poles {
                let p = p * c;
                t.row(&[Cell::Real(p.re), Cell::Real(p.im)]);
            }
            let file = ModelFile::from_model(&cleaned, opts.period);
            emit(&opts.out, &[("model.json", &file.to_json()), ("spurious.tsv", t.as_str())])
        }
        Command::CompareAaa { source, opts } => {
            let config = fit_config(&opts)?;
            let samples = load_source(&source, &opts, |n, seed| random_rectangle(n, source.half_height, seed))?;
            let trig = fit(&samples, &config)?;
            let aaa = aaa_fit(&samples, &config)?;
            let trig_table = error_table(&history_table(trig.err_history()));
            let aaa_table = error_table(&history_table(&aaa.err_history));
            emit_pair(&opts.out, ("aaatrig.tsv", &trig_table), ("aaa.tsv", &aaa_table))
        }
        Command::CompareFft { source, opts } => {
            let config = fit_config(&opts)?;
            let samples = load_source(&source, &opts, |n, _| equispaced(n))?;
            let trig = fit(&samples, &config)?;
            let full = fft_interpolant(&samples, samples.len() / 2)?;
            let mut rows = Vec::new();
            for order in 0..=samples.len() / 2 {
                let t = full.truncated(order)?;
                let err = samples
                    .points()
                    .iter()
                    .zip(samples.values())
                    .map(|(&z, &f)| (t.eval(z) - f).norm())
                    .fold(0.0, f64::max);
                rows.push((order, err));
            }
            let trig_table = error_table(&history_table(trig.err_history()));
            emit_pair(&opts.out, ("aaatrig.tsv", &trig_table), ("fft.tsv", &error_table(&rows)))
        }
        Command::LightningDemo { poles_per_corner, runge_degree, nx, ny, out } => {
            let config = LightningConfig { poles_per_corner, runge_degree, ..LightningConfig::default() };
            let demo = semicircle_demo(&config)?;
            eprintln!(
                "lightning: {} poles, boundary residual {:.3e}; compressed: {} support points, interior difference {:.3e}",
                demo.lightning.pole_count(),
                demo.verified_residual,
                demo.compressed.order(),
                demo.interior_error
            );
            let mut t = Table::new(&["re_z", "im_z", "re_f", "im_f"]);
            for (z, f) in field_grid(&demo.lightning, nx, ny, (-2.0, 2.0)) {
                t.row(&[Cell::Real(z.re), Cell::Real(z.im), Cell::Real(f.re), Cell::Real(f.im)]);
            }
            let file = ModelFile::from_model(&demo.compressed, TWO_PI).with_poles(&poles_and_zeros(&demo.compressed)?);
            emit(&out, &[("field.tsv", t.as_str()), ("model.json", &file.to_json())])
        }
    }
}

fn fit_config(opts: &FitOpts) -> Result<FitConfig> {
    if !(opts.tol >= 0.0) || !opts.tol.is_finite() {
        return Err(usage(format!("--tol must be a finite non-negative number, got {}", opts.tol)));
    }
    if opts.mmax == 0 {
        return Err(usage("--mmax must be at least 1"));
    }
    if !(opts.period > 0.0) || !opts.period.is_finite() {
        return Err(usage(format!("--period must be positive, got {}", opts.period)));
    }
    let far_field_constraint = opts.finf.as_deref().map(parse_finf).transpose()?;
    Ok(FitConfig {
        parity: match opts.parity {
            ParityArg::Odd => Parity::Odd,
            ParityArg::Even => Parity::Even,
        },
        rel_tol: opts.tol,
        max_order: opts.mmax,
        cleanup: !opts.no_cleanup,
        far_field_constraint,
        ..FitConfig::default()
    })
}

fn parse_finf(text: &str) -> Result<FarField> {
    let parse_pair = |s: &str| -> Result<Complex64> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [re, im] = parts.as_slice() else {
            return Err(usage(format!("--finf expects re,im pairs, got {s:?}")));
        };
        let num = |x: &str| x.parse::<f64>().map_err(|_| usage(format!("--finf: cannot parse {x:?}")));
        Ok(Complex64::new(num(re)?, num(im)?))
    };
    let pairs: Vec<&str> = text.split(';').collect();
    match pairs.as_slice() {
        [one] => Ok(FarField::uniform(parse_pair(one)?)),
        [plus, minus] => Ok(FarField::new(parse_pair(plus)?, parse_pair(minus)?)),
        _ => Err(usage("--finf takes one or two re,im pairs")),
    }
}

fn load_source(
    source: &SampleSource,
    opts: &FitOpts,
    points: impl Fn(usize, u64) -> Vec<Complex64>,
) -> Result<SampleSet> {
    match (&source.input, source.function) {
        (Some(path), None) => ingest(path, Format::detect(path, opts.format), opts.period),
        (None, Some(f)) => {
            if source.samples < 2 {
                return Err(usage("--samples must be at least 2"));
            }
            let f = TestFunction::from(f);
            Ok(SampleSet::from_fn(points(source.samples, opts.seed), |z| f.eval(z))?)
        }
        _ => Err(usage("give exactly one of --input or --function")),
    }
}

/// Writes every file into `out`, or the first one to stdout.
fn emit(out: &OutOpt, files: &[(&str, &str)]) -> Result<()> {
    match &out.out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            for (name, contents) in files {
                write_file(&dir.join(name), contents)?;
            }
            Ok(())
        }
        None => {
            print!("{}", files[0].1);
            Ok(())
        }
    }
}

fn emit_pair(out: &OutOpt, a: (&str, &Table), b: (&str, &Table)) -> Result<()> {
    match &out.out {
        Some(_) => emit(out, &[(a.0, a.1.as_str()), (b.0, b.1.as_str())]),
        None => {
            print!("# {}\n{}# {}\n{}", a.0.trim_end_matches(".tsv"), a.1.as_str(), b.0.trim_end_matches(".tsv"), b.1.as_str());
            Ok(())
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}
