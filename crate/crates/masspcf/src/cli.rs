//! Command line front-end.
//!
//! Exit codes: `0` success, `1` other failures, `2` invalid input or
//! arguments, `3` divergent integral, `130` interrupted.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use masspcf_core::datagen::{noisy_trig, synthetic_benchmark, RngSpec, TrigKind, DEFAULT_SIGMA};
use masspcf_core::{
    Bounds, CombinationIntegral, L2InnerProduct, LpDistance, Pcf, PcfError, ScalarKind,
};

use crate::error::Error;
use crate::io::{self, MatrixFormat, PcfCollection, TextScalar};
use crate::matrix::{CancelToken, PairwiseJob, PairwiseMatrix};
use crate::parallel::par_mean;
use crate::Result;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_DIVERGENT: i32 = 3;
pub const EXIT_CANCELLED: i32 = 130;

#[derive(Debug, Parser)]
#[command(
    name = "masspcf",
    version,
    about = "Distance matrices, kernels and means of piecewise constant functions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// L_p distance matrix
    Pdist {
        #[command(flatten)]
        job: MatrixArgs,
        /// Exponent p >= 1
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// Integration interval [A, B); B may be `inf`
        #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
        bounds: Option<Vec<f64>>,
    },
    /// L_2 inner product (Gram) matrix
    Kernel {
        #[command(flatten)]
        job: MatrixArgs,
    },
    /// Pointwise mean PCF, written in the input's format
    Mean {
        #[command(flatten)]
        input: InputArgs,
        /// Output file (JSON input) or directory (CSV input); stdout if omitted
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Random PCF collection
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// JSON collection files or directories of `t,v` CSV files
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Precision used for CSV directory inputs
    #[arg(long, value_enum, default_value_t = Dtype::F64)]
    pub csv_dtype: Dtype,
    /// Suppress progress output
    #[arg(long, short)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct MatrixArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Worker threads (default: MASSPCF_THREADS, then all cores)
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output file; stdout if omitted
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: GenKind,
    /// Number of PCFs
    #[arg(long)]
    pub count: usize,
    /// Sample points per PCF (sin/cos only)
    #[arg(long, default_value_t = 100)]
    pub n_points: usize,
    /// Noise standard deviation (sin/cos only)
    #[arg(long, default_value_t = DEFAULT_SIGMA)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output JSON file or CSV directory; JSON to stdout if omitted
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Dtype::F64)]
    pub dtype: Dtype,
    #[arg(long, value_enum, default_value_t = CollectionFormat::Json)]
    pub format: CollectionFormat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Dtype {
    F32,
    F64,
}

impl From<Dtype> for ScalarKind {
    fn from(d: Dtype) -> Self {
        match d {
            Dtype::F32 => ScalarKind::F32,
            Dtype::F64 => ScalarKind::F64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CollectionFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Synthetic,
    Sin,
    Cos,
}

/// Exit status for a failed command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Cancelled => EXIT_CANCELLED,
        Error::Pair {
            source: PcfError::DivergentIntegral,
            ..
        }
        | Error::Pcf(PcfError::DivergentIntegral) => EXIT_DIVERGENT,
        Error::Pair { .. } => EXIT_FAILURE,
        Error::Pcf(_) | Error::Format { .. } | Error::Io { .. } => EXIT_INVALID,
    }
}

/// Prints whole percentages to `err` as they are reached.
struct ProgressPrinter<'a> {
    err: &'a mut dyn Write,
    last: Option<u32>,
}

impl ProgressPrinter<'_> {
    fn report(&mut self, fraction: f64) {
        let pct = (fraction * 100.0).floor() as u32;
        if self.last.is_none_or(|l| pct > l) {
            self.last = Some(pct);
            let _ = writeln!(self.err, "progress: {pct}%");
        }
    }
}

/// Executes `cli`, writing results without `--output` to `out` and
/// diagnostics to `err`. Returns the process exit status.
pub fn run(cli: &Cli, cancel: &CancelToken, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match dispatch(cli, cancel, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let code = exit_code(&e);
            match &e {
                Error::Pair { row, col, source } => {
                    let _ = writeln!(err, "error: pair ({row}, {col}): {source}");
                }
                _ => {
                    let _ = writeln!(err, "error: {e}");
                }
            }
            code
        }
    }
}

fn dispatch(
    cli: &Cli,
    cancel: &CancelToken,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<()> {
    match &cli.command {
        Command::Pdist { job, p, bounds } => {
            let bounds = bounds.as_deref().map(|b| (b[0], b[1]));
            match load(&job.input)? {
                PcfCollection::F32(items) => {
                    let lp = LpDistance::new(*p)?.with_bounds(make_bounds(bounds)?);
                    run_matrix(&items, &lp, job, cancel, out, err)
                }
                PcfCollection::F64(items) => {
                    let lp = LpDistance::new(*p)?.with_bounds(make_bounds(bounds)?);
                    run_matrix(&items, &lp, job, cancel, out, err)
                }
            }
        }
        Command::Kernel { job } => match load(&job.input)? {
            PcfCollection::F32(items) => {
                run_matrix(&items, &L2InnerProduct::default(), job, cancel, out, err)
            }
            PcfCollection::F64(items) => {
                run_matrix(&items, &L2InnerProduct::default(), job, cancel, out, err)
            }
        },
        Command::Mean {
            input,
            output,
            threads,
        } => {
            let csv_input = input.inputs.iter().any(|p| p.is_dir());
            let target = Output::new(output.as_deref(), csv_input);
            match load(input)? {
                PcfCollection::F32(items) => write_mean(&items, *threads, cancel, target, out),
                PcfCollection::F64(items) => write_mean(&items, *threads, cancel, target, out),
            }
        }
        Command::Generate(args) => generate(args, out),
    }
}

fn load(input: &InputArgs) -> Result<PcfCollection> {
    let collection = io::read_collections(&input.inputs, input.csv_dtype.into())?;
    if collection.is_empty() {
        return Err(PcfError::EmptyCollection.into());
    }
    Ok(collection)
}

fn make_bounds<T: TextScalar>(bounds: Option<(f64, f64)>) -> Result<Bounds<T>> {
    match bounds {
        None => Ok(Bounds::unbounded()),
        Some((a, b)) => Ok(Bounds::new(T::from_f64(a), T::from_f64(b))?),
    }
}

fn run_matrix<T, F>(
    items: &[Pcf<T>],
    integral: &F,
    args: &MatrixArgs,
    cancel: &CancelToken,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<()>
where
    T: TextScalar,
    F: CombinationIntegral<T> + Sync,
{
    let mut printer = ProgressPrinter { err, last: None };
    let mut job = PairwiseJob::new(items, integral)
        .workers(args.threads)
        .cancel_token(cancel.clone());
    if !args.input.quiet {
        job = job.on_progress(|f| printer.report(f));
    }
    let matrix: PairwiseMatrix<T> = job.run()?;
    let format = match args.format {
        OutputFormat::Csv => MatrixFormat::Csv,
        OutputFormat::Json => MatrixFormat::Json,
    };
    match &args.output {
        Some(path) => io::write_matrix(path, &matrix, format),
        None => {
            let text = match format {
                MatrixFormat::Csv => io::matrix_csv(&matrix),
                MatrixFormat::Json => io::matrix_json(&matrix),
            };
            write_stdout(out, &text)
        }
    }
}

fn write_stdout(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Error::io("<stdout>", e))
}

/// Where a collection-valued result goes.
enum Output<'a> {
    Stdout { csv: bool },
    Json(&'a Path),
    CsvDir(&'a Path),
}

impl<'a> Output<'a> {
    fn new(path: Option<&'a Path>, csv: bool) -> Self {
        match path {
            None => Output::Stdout { csv },
            Some(p) if csv => Output::CsvDir(p),
            Some(p) => Output::Json(p),
        }
    }
}

fn write_mean<T: TextScalar>(
    items: &[Pcf<T>],
    threads: Option<usize>,
    cancel: &CancelToken,
    target: Output,
    out: &mut dyn Write,
) -> Result<()>
where
    PcfCollection: From<Vec<Pcf<T>>>,
{
    let mean = par_mean(items, threads)?;
    if cancel.is_cancelled() {
        return Err(Error::Cancelled);
    }
    match target {
        Output::Stdout { csv: true } => write_stdout(out, &io::pcf_csv(&mean)),
        Output::Stdout { csv: false } => write_stdout(out, &io::collection_json(&[mean])),
        Output::Json(path) => io::write_json(path, &PcfCollection::from(vec![mean])),
        Output::CsvDir(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            io::write_csv_pcf(&dir.join("mean.csv"), &mean)
        }
    }
}

fn generated<T: TextScalar>(args: &GenerateArgs) -> Result<Vec<Pcf<T>>> {
    let rng = RngSpec::new(args.seed);
    let trig = match args.kind {
        GenKind::Synthetic => return Ok(synthetic_benchmark(args.count, rng)),
        GenKind::Sin => TrigKind::Sin,
        GenKind::Cos => TrigKind::Cos,
    };
    let array = noisy_trig::<T>(&[args.count], args.n_points, trig, args.sigma, rng)?;
    Ok(array.iter().cloned().collect())
}

fn generate(args: &GenerateArgs, out: &mut dyn Write) -> Result<()> {
    let collection = match args.dtype {
        Dtype::F32 => PcfCollection::from(generated::<f32>(args)?),
        Dtype::F64 => PcfCollection::from(generated::<f64>(args)?),
    };
    match (&args.output, args.format) {
        (Some(path), CollectionFormat::Json) => io::write_json(path, &collection),
        (Some(dir), CollectionFormat::Csv) => io::write_csv_dir(dir, &collection),
        (None, CollectionFormat::Json) => {
            let text = match &collection {
                PcfCollection::F32(v) => io::collection_json(v),
                PcfCollection::F64(v) => io::collection_json(v),
            };
            write_stdout(out, &text)
        }
        (None, CollectionFormat::Csv) => Err(Error::Format {
            path: PathBuf::from("--output"),
            location: None,
            message: "CSV output needs an output directory".into(),
        }),
    }
}
