//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 data error,
//! 3 stop rule not converged.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cardinality::{recommended_sample_size, DEFAULT_SAMPLE_FACTOR};
use crate::csvio::{self, CsvError};
use crate::error::Error;
use crate::harness::{
    default_schedule, figure_configs, stop_rule_search, sweep, ExperimentConfig, FigureId, FigureOptions,
    Measure, SampleSizePolicy, StopRuleConfig, StopRuleOutcome, SweepAxis, SweepResult, DEFAULT_TRIALS,
};
use crate::infotheory::{Dataset, MeasureReport};
use crate::synthgen::{generate_dataset, FeatureSpec, GeneratorConfig, DEFAULT_XOR_NOISE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "msu", version, about = "Entropy, SU and MSU over discrete data, with Monte Carlo bias experiments")]
struct Cli {
    /// Maximum worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset as CSV.
    Gen(GenArgs),
    /// Measure entropies, SU, total correlation and MSU of a CSV dataset.
    Measure(MeasureArgs),
    /// Run a Monte Carlo sweep or a figure preset and write curves as CSV.
    Sweep(SweepArgs),
    /// Print the recommended sample size for a set of cardinalities.
    Samplesize(SampleSizeArgs),
    /// Grow the sample size until the mean MSU stops moving.
    Stoprule(StopRuleArgs),
}

#[derive(Debug, Args)]
struct FeatureArgs {
    /// Number of class labels [default: 2]
    #[arg(long)]
    class_card: Option<u32>,

    /// Size of the XOR (noisy parity) group that determines the class.
    #[arg(long, default_value_t = 0)]
    xor: usize,

    /// Cardinalities of Kononenko-informative features.
    #[arg(long, value_delimiter = ',')]
    informative: Vec<u32>,

    /// Cardinalities of non-informative features.
    #[arg(long, value_delimiter = ',')]
    noninformative: Vec<u32>,

    /// Association level of informative features [default: 1]
    #[arg(long)]
    k: Option<u32>,

    /// Probability of flipping the parity class [default: 0.05]
    #[arg(long)]
    noise: Option<f64>,
}

impl FeatureArgs {
    fn is_empty(&self) -> bool {
        self.xor == 0 && self.informative.is_empty() && self.noninformative.is_empty()
    }

    /// Features named `f1, f2, ...`: XOR members, then informative, then
    /// non-informative.
    fn features(&self) -> Vec<FeatureSpec> {
        let k = self.k.unwrap_or(1);
        let xor = (0..self.xor).map(|_| (2, None));
        let informative = self.informative.iter().map(|&v| (v, Some(true)));
        let noninformative = self.noninformative.iter().map(|&v| (v, Some(false)));
        xor.chain(informative)
            .chain(noninformative)
            .enumerate()
            .map(|(i, (v, kind))| {
                let name = format!("f{}", i + 1);
                match kind {
                    None => FeatureSpec::xor(name, 0),
                    Some(true) => FeatureSpec::kononenko(name, v, k),
                    Some(false) => FeatureSpec::non_informative(name, v),
                }
            })
            .collect()
    }

    fn generator(&self, n_rows: usize, seed: u64) -> GeneratorConfig {
        GeneratorConfig::new(self.class_card.unwrap_or(2), self.features(), n_rows, seed)
            .with_noise(self.noise.unwrap_or(DEFAULT_XOR_NOISE))
    }
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(flatten)]
    features: FeatureArgs,

    #[arg(long)]
    rows: usize,

    #[arg(long, env = "MSU_SEED", default_value_t = 0)]
    seed: u64,

    /// Output file; standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MeasureArgs {
    input: PathBuf,

    /// Class column name [default: `class` when present]
    #[arg(long)]
    class: Option<String>,

    /// Column set to measure [default: every column]
    #[arg(long, value_delimiter = ',')]
    columns: Vec<String>,

    /// SU pairs as `x:y`; repeatable.
    #[arg(long)]
    su: Vec<String>,

    /// Report joint entropy, total correlation and MSU of the column set.
    #[arg(long)]
    msu: bool,

    /// Also write the report as CSV (`measure,columns,value`).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AxisArg {
    Cardinality,
    Features,
    Samples,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Figure preset: 1a, 1b, 2a, 2b, 3a, 3b, 4a or 4b.
    #[arg(long)]
    figure: Option<String>,

    /// Sweep axis for a custom experiment.
    #[arg(long, value_enum)]
    axis: Option<AxisArg>,

    /// Sweep values; overrides a preset's values.
    #[arg(long, value_delimiter = ',')]
    values: Vec<u64>,

    #[command(flatten)]
    features: FeatureArgs,

    /// Fixed rows per dataset.
    #[arg(long)]
    rows: Option<usize>,

    /// Size each dataset as factor x multivariate cardinality.
    #[arg(long)]
    calculated: bool,

    /// Multiplier for calculated sample sizes [default: 10]
    #[arg(long)]
    factor: Option<u64>,

    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,

    #[arg(long, env = "MSU_SEED", default_value_t = 0)]
    seed: u64,

    /// Output file; standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SampleSizeArgs {
    #[arg(long)]
    class_card: u64,

    /// Feature cardinalities.
    #[arg(long, value_delimiter = ',', required = true)]
    cards: Vec<u64>,

    #[arg(long, default_value_t = DEFAULT_SAMPLE_FACTOR)]
    factor: u64,
}

#[derive(Debug, Args)]
struct StopRuleArgs {
    #[command(flatten)]
    features: FeatureArgs,

    #[arg(long, default_value_t = 0.01)]
    threshold: f64,

    /// Sample sizes to try [default: 10,20,40,...,10240]
    #[arg(long, value_delimiter = ',')]
    schedule: Vec<u64>,

    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,

    #[arg(long, env = "MSU_SEED", default_value_t = 0)]
    seed: u64,

    /// Trace CSV (`n,mean,delta`); standard error when omitted.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_)
            | Error::CardinalityOverflow
            | Error::InvalidCardinality { .. }
            | Error::ClassIndexOutOfRange { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<CsvError> for Failure {
    fn from(e: CsvError) -> Self {
        match e {
            CsvError::Dataset(inner) => Failure::Data(inner.to_string()),
            other => Failure::Data(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type CmdResult = std::result::Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let result = pool.install(|| match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Measure(a) => cmd_measure(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Samplesize(a) => cmd_samplesize(a),
        Command::Stoprule(a) => cmd_stoprule(a),
    });
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            EXIT_DATA
        }
    }
}

fn open_output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_gen(args: GenArgs) -> CmdResult {
    let config = args.features.generator(args.rows, args.seed);
    let ds = generate_dataset(&config)?;
    csvio::write_dataset(open_output(args.output.as_deref())?, &ds)?;
    Ok(EXIT_OK)
}

fn parse_pair(ds: &Dataset, spec: &str) -> Result<(usize, usize), Failure> {
    let (x, y) = spec
        .split_once(':')
        .ok_or_else(|| Failure::Usage(format!("SU pair `{spec}` must look like x:y")))?;
    let pos = ds.positions(&[x, y])?;
    Ok((pos[0], pos[1]))
}

fn cmd_measure(args: MeasureArgs) -> CmdResult {
    let file = File::open(&args.input)
        .map_err(|e| Failure::Data(format!("{}: {e}", args.input.display())))?;
    let ds = csvio::read_dataset(io::BufReader::new(file), args.class.as_deref())?;
    let cols = if args.columns.is_empty() {
        (0..ds.n_columns()).collect()
    } else {
        ds.positions(&args.columns)?
    };
    let default_mode = args.su.is_empty() && !args.msu;

    let pairs: Vec<(usize, usize)> = if default_mode {
        match ds.class_index() {
            Some(class) => cols.iter().filter(|&&c| c != class).map(|&c| (c, class)).collect(),
            None => Vec::new(),
        }
    } else {
        args.su.iter().map(|s| parse_pair(&ds, s)).collect::<Result<_, _>>()?
    };
    let with_set = args.msu || (default_mode && cols.len() >= 2);

    let set_name = cols.iter().map(|&c| ds.name(c)).collect::<Vec<_>>().join(",");
    let mut rows: Vec<(String, String, f64)> = Vec::new();
    if with_set {
        let report = MeasureReport::compute(&ds, &cols, &pairs)?;
        rows.extend(report.entropies.into_iter().map(|(n, h)| ("H".to_string(), n, h)));
        rows.extend(report.su_pairs.into_iter().map(|(x, y, v)| ("SU".to_string(), format!("{x},{y}"), v)));
        rows.push(("H".into(), set_name.clone(), report.joint_entropy));
        rows.push(("C".into(), set_name.clone(), report.total_correlation));
        rows.push(("MSU".into(), set_name, report.msu));
    } else {
        for &c in &cols {
            rows.push(("H".into(), ds.name(c).to_string(), crate::infotheory::entropy(ds.column(c))?));
        }
        for &(x, y) in &pairs {
            let v = crate::infotheory::symmetrical_uncertainty(&ds, x, y)?;
            rows.push(("SU".into(), format!("{},{}", ds.name(x), ds.name(y)), v));
        }
    }

    let mut out = io::stdout().lock();
    for (measure, columns, value) in &rows {
        writeln!(out, "{measure}({columns}) = {value:.6}")?;
    }
    if let Some(path) = &args.csv {
        let mut wtr = csv::Writer::from_writer(File::create(path)?);
        let write = |wtr: &mut csv::Writer<File>| -> csv::Result<()> {
            wtr.write_record(["measure", "columns", "value"])?;
            for (measure, columns, value) in &rows {
                wtr.write_record([measure.as_str(), columns.as_str(), &format!("{value:.6}")])?;
            }
            wtr.flush()?;
            Ok(())
        };
        write(&mut wtr).map_err(|e| Failure::Data(e.to_string()))?;
    }
    Ok(EXIT_OK)
}

fn sweep_configs(args: &SweepArgs) -> Result<Vec<ExperimentConfig>, Failure> {
    if let Some(figure) = &args.figure {
        let id: FigureId = figure.parse()?;
        if args.axis.is_some() || !args.features.is_empty() || args.calculated {
            return Err(Failure::Usage(
                "--figure presets take only value, size and seed overrides".into(),
            ));
        }
        let mut options = FigureOptions::new(args.trials, args.seed);
        options.class_cardinality = args.features.class_card;
        options.noise = args.features.noise;
        options.k = args.features.k;
        options.n_rows = args.rows;
        options.factor = args.factor;
        if !args.values.is_empty() {
            options.values = Some(args.values.clone());
        }
        return Ok(figure_configs(id, &options));
    }

    let axis = match args.axis {
        Some(AxisArg::Cardinality) => SweepAxis::Cardinality,
        Some(AxisArg::Features) => SweepAxis::FeatureCount,
        Some(AxisArg::Samples) => SweepAxis::SampleSize,
        None => return Err(Failure::Usage("either --figure or --axis is required".into())),
    };
    if args.features.is_empty() {
        return Err(Failure::Usage("no features given".into()));
    }
    let base = args.features.generator(args.rows.unwrap_or(1000), args.seed);
    let mut measures = Vec::new();
    if axis != SweepAxis::FeatureCount {
        measures.extend(base.features.iter().map(|f| Measure::SuVsClass(f.name.clone())));
    }
    measures.push(Measure::MsuAllWithClass);
    let sample_size = if args.calculated {
        SampleSizePolicy::Calculated {
            factor: args.factor.unwrap_or(DEFAULT_SAMPLE_FACTOR),
        }
    } else {
        SampleSizePolicy::Fixed
    };
    Ok(vec![ExperimentConfig {
        family: String::new(),
        base,
        axis,
        values: args.values.clone(),
        sample_size,
        trials: args.trials,
        measures,
        master_seed: args.seed,
    }])
}

fn cmd_sweep(args: SweepArgs) -> CmdResult {
    let configs = sweep_configs(&args)?;
    let mut results: Vec<SweepResult> = Vec::new();
    for config in &configs {
        results.extend(sweep(config)?);
    }
    csvio::write_curves(open_output(args.output.as_deref())?, &results)?;
    Ok(EXIT_OK)
}

fn cmd_samplesize(args: SampleSizeArgs) -> CmdResult {
    let n = recommended_sample_size(args.class_card, &args.cards, args.factor)?;
    println!("{n}");
    Ok(EXIT_OK)
}

fn cmd_stoprule(args: StopRuleArgs) -> CmdResult {
    let mut config = StopRuleConfig::xor_pair(
        args.features.noise.unwrap_or(DEFAULT_XOR_NOISE),
        args.trials,
        args.seed,
    );
    if !args.features.is_empty() {
        config.base = args.features.generator(1, args.seed);
    } else if let Some(c) = args.features.class_card {
        config.base.class_cardinality = c;
    }
    config.threshold = args.threshold;
    config.schedule = if args.schedule.is_empty() {
        default_schedule()
    } else {
        args.schedule.clone()
    };

    let outcome = stop_rule_search(&config)?;
    match &args.trace {
        Some(path) => csvio::write_trace(File::create(path)?, outcome.trace())?,
        None => csvio::write_trace(io::stderr().lock(), outcome.trace())?,
    }
    match outcome {
        StopRuleOutcome::Converged { sample_size, .. } => {
            println!("{sample_size}");
            Ok(EXIT_OK)
        }
        StopRuleOutcome::NotConverged { .. } => {
            println!("not converged");
            Ok(EXIT_NOT_CONVERGED)
        }
    }
}
