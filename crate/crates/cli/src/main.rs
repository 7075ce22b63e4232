//! `renokm` command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 2 | usage error (bad or missing flags) |
//! | 3 | I/O error (unreadable input, unwritable output) |
//! | 4 | malformed data file or report |
//! | 5 | invalid parameter for the data (e.g. `k > n`) |
//! | 6 | numeric degeneracy (identical objects, coincident centroids, failed sweep cell) |

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::builder::{PossibleValuesParser, RangedU64ValueParser, TypedValueParser};
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};
use serde::Serialize;

use renokm_core::harness::{
    bench_algorithms, bench_distance_sweep, bench_iterations, bench_time, seed_list,
};
use renokm_core::report::SCHEMA_VERSION;
use renokm_core::{
    davies_bouldin, load_csv, normalize, partition_agreement, run, Algorithm, BenchConfig,
    BenchReport, Dataset, DatasetPreset, DbVariant, Delimiter, Error, ErrorCategory, Metric,
    NormalizeMode, DEFAULT_MAX_ITER, DEFAULT_STATIC_WEIGHT, DEFAULT_TOL,
};

const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_DATA: u8 = 4;
const EXIT_PARAMETER: u8 = 5;
const EXIT_DEGENERATE: u8 = 6;

#[derive(Parser, Debug)]
#[command(
    name = "renokm",
    version,
    about = "Weighted and deterministic-init K-Means runner and benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one clustering configuration and write the result as JSON.
    Cluster(ClusterArgs),
    /// Benchmark sweeps.
    #[command(subcommand)]
    Bench(BenchCommand),
}

#[derive(Subcommand, Debug)]
enum BenchCommand {
    /// Plain K-Means under each metric for every k in a range.
    DistanceSweep(SweepArgs),
    /// All algorithms on one or more datasets at a fixed k.
    Algorithms(AlgorithmsArgs),
    /// Wall-clock time per algorithm for a list of k values.
    Time(TimeArgs),
    /// Iterations to convergence per algorithm for every k in a range.
    Iterations(IterationsArgs),
}

fn metric_parser() -> impl TypedValueParser<Value = Metric> {
    PossibleValuesParser::new(Metric::ALL.map(|m| m.as_str()))
        .map(|s| s.parse::<Metric>().expect("listed value"))
}

fn algorithm_parser() -> impl TypedValueParser<Value = Algorithm> {
    PossibleValuesParser::new(Algorithm::ALL.map(|a| a.as_str()))
        .map(|s| s.parse::<Algorithm>().expect("listed value"))
}

fn normalize_parser() -> impl TypedValueParser<Value = NormalizeMode> {
    PossibleValuesParser::new(["none", "minmax", "zscore"])
        .map(|s| s.parse::<NormalizeMode>().expect("listed value"))
}

fn variant_parser() -> impl TypedValueParser<Value = DbVariant> {
    PossibleValuesParser::new(["paper", "standard"])
        .map(|s| s.parse::<DbVariant>().expect("listed value"))
}

fn positive() -> RangedU64ValueParser<usize> {
    RangedU64ValueParser::<usize>::new().range(1..)
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Data file; repeat for several datasets where the subcommand allows it.
    #[arg(long = "data", required = true)]
    data: Vec<PathBuf>,
    /// Column layout; inferred from the file name when it is one of the known sets.
    #[arg(long, value_parser = ["iris", "ecoli", "yeast", "wine", "custom"])]
    preset: Option<String>,
    /// Field separator: `,`, `whitespace`, `tab` or any single character.
    #[arg(long)]
    delimiter: Option<Delimiter>,
    /// Zero-based column holding the class label.
    #[arg(long)]
    label_col: Option<usize>,
    /// Zero-based columns to ignore, comma separated.
    #[arg(long, value_delimiter = ',')]
    drop_cols: Option<Vec<usize>>,
    #[arg(long, default_value = "none", value_parser = normalize_parser())]
    normalize: NormalizeMode,
}

#[derive(Args, Debug)]
struct EngineArgs {
    /// Stop when no centroid moves farther than this.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER, value_parser = positive())]
    max_iter: usize,
    /// Weight used by swkmeans.
    #[arg(long, default_value_t = DEFAULT_STATIC_WEIGHT)]
    static_weight: f64,
    #[arg(long, default_value = "paper", value_parser = variant_parser())]
    db_variant: DbVariant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
enum Format {
    Json,
    Csv,
    /// One series file per table column; `--out` names the directory.
    Plotdata,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output file (directory for plotdata); standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct SeedArgs {
    /// First seed; further seeds count up from here.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of seeds for the random-init algorithms.
    #[arg(long, default_value_t = 30, value_parser = positive())]
    seeds: usize,
}

#[derive(Args, Debug)]
struct ClusterArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long, default_value = "kmeans", value_parser = algorithm_parser())]
    algo: Algorithm,
    #[arg(long, default_value = "euclidean", value_parser = metric_parser())]
    metric: Metric,
    /// Number of clusters.
    #[arg(long, value_parser = positive())]
    k: usize,
    /// Seed of the random initialization; ignored by renovated.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct KRange {
    #[arg(long, default_value_t = 2, value_parser = positive())]
    k_min: usize,
    #[arg(long, default_value_t = 10, value_parser = positive())]
    k_max: usize,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    engine: EngineArgs,
    #[command(flatten)]
    range: KRange,
    #[command(flatten)]
    seeds: SeedArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct AlgorithmsArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long, default_value_t = 5, value_parser = positive())]
    k: usize,
    #[arg(long, default_value = "euclidean", value_parser = metric_parser())]
    metric: Metric,
    #[command(flatten)]
    seeds: SeedArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct TimeArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    engine: EngineArgs,
    /// Comma separated cluster counts.
    #[arg(long, value_delimiter = ',', default_value = "3,6,9,12,15", value_parser = positive())]
    k_list: Vec<usize>,
    #[arg(long, default_value = "euclidean", value_parser = metric_parser())]
    metric: Metric,
    #[command(flatten)]
    seeds: SeedArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct IterationsArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    engine: EngineArgs,
    #[command(flatten)]
    range: KRange,
    #[arg(long, default_value = "euclidean", value_parser = metric_parser())]
    metric: Metric,
    #[command(flatten)]
    seeds: SeedArgs,
    #[command(flatten)]
    output: OutputArgs,
}

/// A failure that ends the process with a specific exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.category() {
            ErrorCategory::Io => EXIT_IO,
            ErrorCategory::Data => EXIT_DATA,
            ErrorCategory::Parameter => EXIT_PARAMETER,
            ErrorCategory::Degenerate => EXIT_DEGENERATE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage_error(kind: ErrorKind, message: &str) -> ! {
    Cli::command().error(kind, message).exit()
}

impl DataArgs {
    fn preset_for(&self, path: &Path) -> Result<DatasetPreset, Error> {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "data".to_string());
        let base = match self.preset.as_deref() {
            Some("custom") => None,
            Some(name) => DatasetPreset::by_name(name),
            None => DatasetPreset::by_name(&stem),
        };
        let (name, delimiter, label_col, drop_cols) = match base {
            Some(p) => (
                p.name().to_string(),
                p.delimiter(),
                p.label_col(),
                p.drop_cols().iter().copied().collect::<Vec<_>>(),
            ),
            None => (stem, Delimiter::Comma, None, Vec::new()),
        };
        DatasetPreset::new(
            name,
            self.delimiter.unwrap_or(delimiter),
            self.label_col.or(label_col),
            self.drop_cols.clone().unwrap_or(drop_cols),
        )
    }

    fn load(&self) -> Result<Vec<Dataset>, Error> {
        self.data
            .iter()
            .map(|path| {
                let preset = self.preset_for(path)?;
                let d = load_csv(path, &preset)?;
                log::info!("loaded {}", d.provenance());
                Ok(normalize(&d, self.normalize))
            })
            .collect()
    }

    fn load_one(&self) -> Result<Dataset, Error> {
        if self.data.len() != 1 {
            usage_error(
                ErrorKind::TooManyValues,
                "this subcommand takes exactly one --data file",
            );
        }
        Ok(self.load()?.remove(0))
    }
}

impl EngineArgs {
    fn config(&self, normalize: NormalizeMode) -> BenchConfig {
        BenchConfig {
            tol: self.tol,
            max_iter: self.max_iter,
            static_weight: self.static_weight,
            db_variant: self.db_variant,
            normalize,
        }
    }
}

impl KRange {
    fn range(&self) -> std::ops::RangeInclusive<usize> {
        if self.k_min > self.k_max {
            usage_error(
                ErrorKind::ValueValidation,
                "--k-min must not exceed --k-max",
            );
        }
        self.k_min..=self.k_max
    }
}

fn write_text(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.write_all(b"\n"))
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

#[derive(Serialize)]
struct ClusterOutput<'a> {
    schema: u32,
    dataset: &'a str,
    provenance: &'a str,
    n: usize,
    p: usize,
    algorithm: Algorithm,
    metric: Metric,
    k: usize,
    seed: Option<u64>,
    normalize: NormalizeMode,
    tol: f64,
    max_iter: usize,
    static_weight: Option<f64>,
    db_variant: DbVariant,
    assignments: &'a [usize],
    centroids: Vec<Vec<f64>>,
    iterations: usize,
    converged: bool,
    inertia_history: &'a [f64],
    db_index: Option<f64>,
    /// Adjusted Rand index against the class column, when the file has one.
    label_agreement: Option<f64>,
    elapsed_ms: f64,
    timestamp: String,
}

fn cmd_cluster(args: &ClusterArgs) -> Result<(), Failure> {
    let d = args.data.load_one()?;
    let cfg = args.engine.config(args.data.normalize);
    let run_cfg = args.algo.run_config(args.k, args.seed, args.metric, &cfg);
    let result = run(&d, &run_cfg)?;

    let db_index = if args.k >= 2 {
        Some(davies_bouldin(&d, &result.assignments, &result.centroids, cfg.db_variant)?.index)
    } else {
        None
    };
    let label_agreement = match d.labels() {
        Some(labels) => Some(partition_agreement(labels, &result.assignments)?),
        None => None,
    };
    let output = ClusterOutput {
        schema: SCHEMA_VERSION,
        dataset: d.name(),
        provenance: d.provenance(),
        n: d.n(),
        p: d.p(),
        algorithm: args.algo,
        metric: args.metric,
        k: args.k,
        seed: (!args.algo.is_deterministic()).then_some(args.seed),
        normalize: args.data.normalize,
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        static_weight: (args.algo == Algorithm::SwKMeans).then_some(cfg.static_weight),
        db_variant: cfg.db_variant,
        assignments: &result.assignments,
        centroids: result
            .centroids
            .rows()
            .into_iter()
            .map(|r| r.to_vec())
            .collect(),
        iterations: result.iterations,
        converged: result.converged,
        inertia_history: &result.inertia_history,
        db_index,
        label_agreement,
        elapsed_ms: result.elapsed.as_secs_f64() * 1e3,
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    };
    let json = serde_json::to_string_pretty(&output).map_err(Error::from)?;
    write_text(args.out.as_deref(), &json)?;
    Ok(())
}

fn emit(report: &BenchReport, output: &OutputArgs) -> Result<(), Failure> {
    match output.format {
        Format::Json => write_text(output.out.as_deref(), &report.to_json()?)?,
        Format::Csv => write_text(output.out.as_deref(), report.to_csv()?.trim_end())?,
        Format::Plotdata => {
            let Some(dir) = output.out.as_deref() else {
                usage_error(
                    ErrorKind::MissingRequiredArgument,
                    "--format plotdata needs --out <dir>",
                );
            };
            for path in report.write_plotdata(dir)? {
                log::info!("wrote {}", path.display());
            }
        }
    }
    eprint!("{}", report.table());
    match &report.error {
        Some(e) => Err(Failure {
            code: EXIT_DEGENERATE,
            message: format!("sweep stopped early, partial report written: {e}"),
        }),
        None => Ok(()),
    }
}

fn cmd_bench(cmd: &BenchCommand) -> Result<(), Failure> {
    match cmd {
        BenchCommand::DistanceSweep(a) => {
            let d = a.data.load_one()?;
            let cfg = a.engine.config(a.data.normalize);
            let seeds = seed_list(a.seeds.seed, a.seeds.seeds);
            let report = bench_distance_sweep(&d, a.range.range(), &seeds, &cfg)?;
            emit(&report, &a.output)
        }
        BenchCommand::Algorithms(a) => {
            let ds = a.data.load()?;
            let cfg = a.engine.config(a.data.normalize);
            let seeds = seed_list(a.seeds.seed, a.seeds.seeds);
            let report = bench_algorithms(&ds, a.k, &seeds, a.metric, &cfg)?;
            emit(&report, &a.output)
        }
        BenchCommand::Time(a) => {
            let d = a.data.load_one()?;
            let cfg = a.engine.config(a.data.normalize);
            let seeds = seed_list(a.seeds.seed, a.seeds.seeds);
            let report = bench_time(&d, &a.k_list, &seeds, a.metric, &cfg)?;
            emit(&report, &a.output)
        }
        BenchCommand::Iterations(a) => {
            let d = a.data.load_one()?;
            let cfg = a.engine.config(a.data.normalize);
            let seeds = seed_list(a.seeds.seed, a.seeds.seeds);
            let report = bench_iterations(&d, a.range.range(), &seeds, a.metric, &cfg)?;
            emit(&report, &a.output)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Cluster(args) => cmd_cluster(args),
        Command::Bench(cmd) => cmd_bench(cmd),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("renokm: {}", f.message);
            debug_assert_ne!(f.code, EXIT_USAGE);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_definitions_are_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn preset_inferred_from_file_stem() {
        let cli = Cli::try_parse_from(["renokm", "cluster", "--data", "x/ecoli.data", "--k", "3"])
            .unwrap();
        let Command::Cluster(a) = cli.command else {
            unreachable!()
        };
        let p = a.data.preset_for(Path::new("x/ecoli.data")).unwrap();
        assert_eq!(p, DatasetPreset::ecoli());
        let p = a.data.preset_for(Path::new("x/points.csv")).unwrap();
        assert_eq!(p.name(), "points");
        assert_eq!(p.label_col(), None);
    }

    #[test]
    fn overrides_apply_on_top_of_presets() {
        let cli = Cli::try_parse_from([
            "renokm",
            "cluster",
            "--data",
            "wine.data",
            "--preset",
            "custom",
            "--delimiter",
            ";",
            "--label-col",
            "2",
            "--drop-cols",
            "0,1",
            "--k",
            "2",
        ])
        .unwrap();
        let Command::Cluster(a) = cli.command else {
            unreachable!()
        };
        let p = a.data.preset_for(Path::new("wine.data")).unwrap();
        assert_eq!(p.delimiter(), Delimiter::Char(';'));
        assert_eq!(p.label_col(), Some(2));
        assert_eq!(
            p.drop_cols().iter().copied().collect::<Vec<_>>(),
            vec![0, 1]
        );
    }

    #[test]
    fn zero_k_is_a_usage_error() {
        let e = Cli::try_parse_from(["renokm", "cluster", "--data", "a", "--k", "0"]).unwrap_err();
        assert_eq!(e.exit_code(), i32::from(EXIT_USAGE));
    }

    #[test]
    fn k_list_default() {
        let cli = Cli::try_parse_from(["renokm", "bench", "time", "--data", "a"]).unwrap();
        let Command::Bench(BenchCommand::Time(a)) = cli.command else {
            unreachable!()
        };
        assert_eq!(a.k_list, vec![3, 6, 9, 12, 15]);
        assert_eq!(a.seeds.seeds, 30);
        assert_eq!(a.engine.db_variant, DbVariant::Paper);
    }
}
