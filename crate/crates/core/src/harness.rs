//! Monte Carlo experiments: trial-averaged measures over generated datasets,
//! sweeps along one axis, the stop-rule search over sample sizes and the
//! figure presets.
//!
//! Trial `t` of a point uses the generator streams `(master_seed, t, column)`.
//! Trials run on the rayon pool and are reduced in trial-index order, so
//! results are bit-identical for any thread count.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::cardinality::{recommended_sample_size, DEFAULT_SAMPLE_FACTOR};
use crate::error::{Error, Result};
use crate::infotheory::{msu, symmetrical_uncertainty, Dataset};
use crate::synthgen::{generate_trial, FeatureRole, FeatureSpec, GeneratorConfig, CLASS_COLUMN};

pub const DEFAULT_TRIALS: usize = 1000;
pub const DEFAULT_STOP_THRESHOLD: f64 = 0.01;

/// Cardinalities used for the generated attributes.
pub const CARDINALITY_LIST: [u64; 11] = [2, 4, 5, 8, 10, 16, 20, 30, 32, 40, 64];

/// `10, 20, 40, ...` with `len` entries.
pub fn doubling_schedule(start: u64, len: usize) -> Vec<u64> {
    (0..len as u32).map(|i| start << i).collect()
}

/// Default stop-rule schedule: 10 doubling up to 10240.
pub fn default_schedule() -> Vec<u64> {
    doubling_schedule(10, 11)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Measure {
    /// SU of the named feature against the class.
    SuVsClass(String),
    /// MSU of the named columns.
    Msu(Vec<String>),
    /// MSU of every feature together with the class.
    MsuAllWithClass,
}

impl Measure {
    pub fn label(&self) -> String {
        match self {
            Measure::SuVsClass(f) => format!("SU({f},{CLASS_COLUMN})"),
            Measure::Msu(cols) => format!("MSU({})", cols.join(",")),
            Measure::MsuAllWithClass => format!("MSU(all,{CLASS_COLUMN})"),
        }
    }

    pub fn evaluate(&self, ds: &Dataset) -> Result<f64> {
        let class = || {
            ds.class_index()
                .ok_or_else(|| Error::InvalidDataset("dataset has no class column".into()))
        };
        match self {
            Measure::SuVsClass(f) => {
                let x = ds.positions(&[f])?[0];
                symmetrical_uncertainty(ds, x, class()?)
            }
            Measure::Msu(cols) => msu(ds, &ds.positions(cols)?),
            Measure::MsuAllWithClass => {
                let mut cols = ds.feature_positions();
                cols.push(class()?);
                msu(ds, &cols)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Every non-XOR feature takes the swept cardinality.
    Cardinality,
    /// The first template feature is replicated `x` times as `f1..fx`.
    FeatureCount,
    /// `x` rows per dataset.
    SampleSize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleSizePolicy {
    /// Rows come from the generator template.
    Fixed,
    /// Rows are `factor · |class| · Π |f_i|` at each point.
    Calculated { factor: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Prefix for the measure labels, empty for none.
    pub family: String,
    /// Generator template; its seed is replaced by `master_seed`.
    pub base: GeneratorConfig,
    pub axis: SweepAxis,
    pub values: Vec<u64>,
    pub sample_size: SampleSizePolicy,
    pub trials: usize,
    pub measures: Vec<Measure>,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if self.values.is_empty() {
            return invalid("sweep values must not be empty");
        }
        if self.values.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("sweep values must be strictly increasing");
        }
        if self.trials == 0 {
            return invalid("trials must be at least 1");
        }
        if self.measures.is_empty() {
            return invalid("at least one measure is required");
        }
        if self.base.features.is_empty() {
            return invalid("the generator template needs at least one feature");
        }
        if self.axis == SweepAxis::SampleSize && self.sample_size != SampleSizePolicy::Fixed {
            return invalid("a sample size sweep cannot also use calculated sample sizes");
        }
        Ok(())
    }

    /// Generator configuration at sweep value `x`.
    pub fn generator_at(&self, x: u64) -> Result<GeneratorConfig> {
        let mut config = self.base.clone();
        config.seed = self.master_seed;
        let as_u32 = || {
            u32::try_from(x).map_err(|_| Error::InvalidConfig(format!("sweep value {x} too large")))
        };
        match self.axis {
            SweepAxis::Cardinality => {
                let v = as_u32()?;
                for f in &mut config.features {
                    if !matches!(f.role, FeatureRole::XorMember { .. }) {
                        f.cardinality = v;
                    }
                }
            }
            SweepAxis::FeatureCount => {
                let template = &self.base.features[0];
                config.features = (1..=x)
                    .map(|i| FeatureSpec::new(format!("f{i}"), template.cardinality, template.role.clone()))
                    .collect();
            }
            SweepAxis::SampleSize => {
                config.n_rows = usize::try_from(x)
                    .map_err(|_| Error::InvalidConfig(format!("sample size {x} too large")))?;
            }
        }
        if let SampleSizePolicy::Calculated { factor } = self.sample_size {
            let cards: Vec<u64> = config.features.iter().map(|f| u64::from(f.cardinality)).collect();
            let n = recommended_sample_size(u64::from(config.class_cardinality), &cards, factor)?;
            config.n_rows = usize::try_from(n).map_err(|_| Error::CardinalityOverflow)?;
        }
        Ok(config)
    }

    fn label(&self, measure: &Measure) -> String {
        if self.family.is_empty() {
            measure.label()
        } else {
            format!("{}:{}", self.family, measure.label())
        }
    }

    /// FNV-1a hash of the configuration's debug rendering.
    pub fn fingerprint(&self) -> u64 {
        fnv1a(format!("{self:?}").as_bytes())
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub x: u64,
    pub mean: f64,
    pub stddev: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub measure: String,
    pub points: Vec<CurvePoint>,
    pub fingerprint: u64,
}

impl SweepResult {
    pub fn means(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mean).collect()
    }
}

/// Mean and unbiased standard deviation, accumulated in slice order.
fn mean_stddev(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Evaluates every measure on `trials` datasets drawn from `config` with
/// per-trial streams under `master_seed`. Returns one point per measure.
pub fn run_point(
    config: &GeneratorConfig,
    x: u64,
    measures: &[Measure],
    trials: usize,
    master_seed: u64,
) -> Result<Vec<CurvePoint>> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    let mut config = config.clone();
    config.seed = master_seed;
    config.validate()?;
    let per_trial = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let ds = generate_trial(&config, t)?;
            measures.iter().map(|m| m.evaluate(&ds)).collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    Ok((0..measures.len())
        .map(|m| {
            let values: Vec<f64> = per_trial.iter().map(|row| row[m]).collect();
            let (mean, stddev) = mean_stddev(&values);
            CurvePoint {
                x,
                mean,
                stddev,
                trials,
            }
        })
        .collect())
}

/// One result per measure, each with a point per sweep value.
pub fn sweep(config: &ExperimentConfig) -> Result<Vec<SweepResult>> {
    config.validate()?;
    let fingerprint = config.fingerprint();
    let mut results: Vec<SweepResult> = config
        .measures
        .iter()
        .map(|m| SweepResult {
            measure: config.label(m),
            points: Vec::with_capacity(config.values.len()),
            fingerprint,
        })
        .collect();
    for &x in &config.values {
        let generator = config.generator_at(x)?;
        let points = run_point(&generator, x, &config.measures, config.trials, config.master_seed)?;
        for (result, point) in results.iter_mut().zip(points) {
            result.points.push(point);
        }
    }
    Ok(results)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopTraceEntry {
    pub n: u64,
    pub mean: f64,
    /// `|mean - previous mean|`, absent for the first entry.
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StopRuleOutcome {
    Converged {
        sample_size: u64,
        trace: Vec<StopTraceEntry>,
    },
    NotConverged {
        trace: Vec<StopTraceEntry>,
    },
}

impl StopRuleOutcome {
    pub fn trace(&self) -> &[StopTraceEntry] {
        match self {
            StopRuleOutcome::Converged { trace, .. } | StopRuleOutcome::NotConverged { trace } => trace,
        }
    }

    pub fn sample_size(&self) -> Option<u64> {
        match self {
            StopRuleOutcome::Converged { sample_size, .. } => Some(*sample_size),
            StopRuleOutcome::NotConverged { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StopRuleConfig {
    pub base: GeneratorConfig,
    pub measure: Measure,
    pub trials: usize,
    pub master_seed: u64,
    pub threshold: f64,
    pub schedule: Vec<u64>,
}

impl StopRuleConfig {
    /// Noisy XOR pair with a binary class, measured by MSU of all columns.
    pub fn xor_pair(noise: f64, trials: usize, master_seed: u64) -> Self {
        Self {
            base: GeneratorConfig::new(
                2,
                vec![FeatureSpec::xor("f1", 0), FeatureSpec::xor("f2", 0)],
                1,
                master_seed,
            )
            .with_noise(noise),
            measure: Measure::MsuAllWithClass,
            trials,
            master_seed,
            threshold: DEFAULT_STOP_THRESHOLD,
            schedule: default_schedule(),
        }
    }
}

/// Grows the sample size along the schedule until the trial-mean measure moves
/// by less than the threshold between consecutive entries.
pub fn stop_rule_search(config: &StopRuleConfig) -> Result<StopRuleOutcome> {
    if config.schedule.len() < 2 || config.schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(
            "schedule must be strictly increasing with at least two entries".into(),
        ));
    }
    if config.threshold.is_nan() || config.threshold < 0.0 {
        return Err(Error::InvalidConfig("threshold must be non-negative".into()));
    }
    let mut trace: Vec<StopTraceEntry> = Vec::new();
    for &n in &config.schedule {
        let mut generator = config.base.clone();
        generator.n_rows =
            usize::try_from(n).map_err(|_| Error::InvalidConfig(format!("sample size {n} too large")))?;
        let point = run_point(
            &generator,
            n,
            std::slice::from_ref(&config.measure),
            config.trials,
            config.master_seed,
        )?[0];
        let delta = trace.last().map(|prev| (point.mean - prev.mean).abs());
        trace.push(StopTraceEntry {
            n,
            mean: point.mean,
            delta,
        });
        if delta.is_some_and(|d| d < config.threshold) {
            return Ok(StopRuleOutcome::Converged { sample_size: n, trace });
        }
    }
    Ok(StopRuleOutcome::NotConverged { trace })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    F1a,
    F1b,
    F2a,
    F2b,
    F3a,
    F3b,
    F4a,
    F4b,
}

impl FigureId {
    pub const ALL: [FigureId; 8] = [
        FigureId::F1a,
        FigureId::F1b,
        FigureId::F2a,
        FigureId::F2b,
        FigureId::F3a,
        FigureId::F3b,
        FigureId::F4a,
        FigureId::F4b,
    ];
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FigureId::F1a => "1a",
            FigureId::F1b => "1b",
            FigureId::F2a => "2a",
            FigureId::F2b => "2b",
            FigureId::F3a => "3a",
            FigureId::F3b => "3b",
            FigureId::F4a => "4a",
            FigureId::F4b => "4b",
        };
        f.write_str(s)
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|id| id.to_string() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown figure `{s}`, expected one of 1a..4b")))
    }
}

/// Overrides applied on top of a figure preset. `None` keeps the preset value.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureOptions {
    pub trials: usize,
    pub master_seed: u64,
    pub class_cardinality: Option<u32>,
    pub n_rows: Option<usize>,
    pub noise: Option<f64>,
    pub k: Option<u32>,
    pub values: Option<Vec<u64>>,
    pub factor: Option<u64>,
}

impl FigureOptions {
    pub fn new(trials: usize, master_seed: u64) -> Self {
        Self {
            trials,
            master_seed,
            class_cardinality: None,
            n_rows: None,
            noise: None,
            k: None,
            values: None,
            factor: None,
        }
    }
}

fn pair(make: impl Fn(&str) -> FeatureSpec) -> Vec<FeatureSpec> {
    vec![make("f1"), make("f2")]
}

fn pair_msu() -> Vec<Measure> {
    vec![Measure::Msu(vec!["f1".into(), "f2".into(), CLASS_COLUMN.into()])]
}

/// Sweep configurations behind a figure, one per curve family.
pub fn figure_configs(id: FigureId, options: &FigureOptions) -> Vec<ExperimentConfig> {
    let k = options.k.unwrap_or(1);
    let factor = options.factor.unwrap_or(DEFAULT_SAMPLE_FACTOR);
    let calculated = SampleSizePolicy::Calculated { factor };
    let feature_counts: Vec<u64> = (4..=12).collect();
    let make = |family: &str,
                class_cardinality: u32,
                features: Vec<FeatureSpec>,
                n_rows: usize,
                axis: SweepAxis,
                values: Vec<u64>,
                sample_size: SampleSizePolicy,
                measures: Vec<Measure>| ExperimentConfig {
        family: family.to_string(),
        base: GeneratorConfig::new(class_cardinality, features, n_rows, options.master_seed),
        axis,
        values,
        sample_size,
        trials: options.trials,
        measures,
        master_seed: options.master_seed,
    };
    let kononenko = |v: u32| move |name: &str| FeatureSpec::kononenko(name, v, k);
    let noninf = |v: u32| move |name: &str| FeatureSpec::non_informative(name, v);
    let xor = |name: &str| FeatureSpec::xor(name, 0);

    let mut configs = match id {
        FigureId::F1a => vec![make(
            "",
            10,
            vec![
                FeatureSpec::kononenko("informative", 2, k),
                FeatureSpec::non_informative("non_informative", 2),
            ],
            1000,
            SweepAxis::Cardinality,
            vec![2, 4, 5, 8, 10, 16, 20, 32, 64],
            SampleSizePolicy::Fixed,
            vec![
                Measure::SuVsClass("informative".into()),
                Measure::SuVsClass("non_informative".into()),
                Measure::Msu(vec![
                    "informative".into(),
                    "non_informative".into(),
                    CLASS_COLUMN.into(),
                ]),
            ],
        )],
        FigureId::F1b => vec![make(
            "",
            2,
            pair(xor),
            1,
            SweepAxis::SampleSize,
            default_schedule(),
            SampleSizePolicy::Fixed,
            vec![
                Measure::SuVsClass("f1".into()),
                Measure::SuVsClass("f2".into()),
                Measure::Msu(vec!["f1".into(), "f2".into(), CLASS_COLUMN.into()]),
            ],
        )],
        FigureId::F2a | FigureId::F2b => {
            let informative = id == FigureId::F2a;
            let template = |v: u32| {
                if informative {
                    FeatureSpec::kononenko("f", v, k)
                } else {
                    FeatureSpec::non_informative("f", v)
                }
            };
            vec![
                make(
                    "univariate",
                    2,
                    vec![
                        FeatureSpec { name: "f1".into(), ..template(4) },
                        FeatureSpec { name: "f2".into(), ..template(4) },
                    ],
                    5000,
                    SweepAxis::Cardinality,
                    vec![4, 8, 16, 32, 64],
                    SampleSizePolicy::Fixed,
                    pair_msu(),
                ),
                make(
                    "multivariate",
                    2,
                    vec![template(2)],
                    5000,
                    SweepAxis::FeatureCount,
                    feature_counts.clone(),
                    SampleSizePolicy::Fixed,
                    vec![Measure::MsuAllWithClass],
                ),
            ]
        }
        FigureId::F3a => vec![
            make(
                "informative",
                2,
                pair(kononenko(2)),
                1,
                SweepAxis::SampleSize,
                default_schedule(),
                SampleSizePolicy::Fixed,
                pair_msu(),
            ),
            make(
                "non_informative",
                2,
                pair(noninf(2)),
                1,
                SweepAxis::SampleSize,
                default_schedule(),
                SampleSizePolicy::Fixed,
                pair_msu(),
            ),
        ],
        FigureId::F3b => vec![
            make(
                "informative",
                2,
                pair(kononenko(2)),
                1,
                SweepAxis::Cardinality,
                CARDINALITY_LIST.to_vec(),
                calculated,
                pair_msu(),
            ),
            make(
                "non_informative",
                2,
                pair(noninf(2)),
                1,
                SweepAxis::Cardinality,
                CARDINALITY_LIST.to_vec(),
                calculated,
                pair_msu(),
            ),
        ],
        FigureId::F4a | FigureId::F4b => {
            let policy = if id == FigureId::F4a {
                SampleSizePolicy::Fixed
            } else {
                calculated
            };
            let family = |name: &str, template: FeatureSpec| {
                make(
                    name,
                    2,
                    vec![template],
                    1000,
                    SweepAxis::FeatureCount,
                    feature_counts.clone(),
                    policy,
                    vec![Measure::MsuAllWithClass],
                )
            };
            vec![
                family("informative_univariate", FeatureSpec::kononenko("f", 2, k)),
                family("informative_multivariate", FeatureSpec::xor("f", 0)),
                family("non_informative", FeatureSpec::non_informative("f", 2)),
            ]
        }
    };

    for c in &mut configs {
        if let Some(cc) = options.class_cardinality {
            c.base.class_cardinality = cc;
        }
        if let Some(n) = options.n_rows {
            c.base.n_rows = n;
        }
        if let Some(noise) = options.noise {
            c.base.xor_noise = noise;
        }
        if let Some(values) = &options.values {
            c.values = values.clone();
        }
    }
    configs
}

/// Runs every curve family of a figure preset.
pub fn figure_experiment(id: FigureId, options: &FigureOptions) -> Result<Vec<SweepResult>> {
    let mut out = Vec::new();
    for config in figure_configs(id, options) {
        out.extend(sweep(&config)?);
    }
    Ok(out)
}
