//! Seedable synthetic datasets with informative and non-informative features.
//!
//! Three feature roles are supported:
//!
//! * non-informative: uniform over the labels, independent of the class;
//! * Kononenko-informative: the labels are split into a lower and an upper
//!   half, the half is chosen with a class-dependent probability and the label
//!   inside it uniformly;
//! * XOR member: uniform binary features whose noisy parity becomes the class.
//!
//! Every column draws from its own ChaCha8 stream keyed by
//! `(seed, trial, column)`, so a dataset does not depend on generation order or
//! on which thread produced it.

use std::collections::{BTreeMap, HashSet};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::infotheory::{Dataset, LabelColumn};

pub const CLASS_COLUMN: &str = "class";
pub const DEFAULT_XOR_NOISE: f64 = 0.05;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the stream for `(seed, trial, column)`: three chained SplitMix64
/// finalizer rounds.
pub fn stream_seed(seed: u64, trial: u64, column: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ trial) ^ column)
}

/// Deterministic generator: ChaCha8 seeded through [`stream_seed`].
#[derive(Debug, Clone)]
pub struct SeededRng(ChaCha8Rng);

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn for_stream(seed: u64, trial: u64, column: u64) -> Self {
        Self::new(stream_seed(seed, trial, column))
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.0.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.0.try_fill_bytes(dest)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureRole {
    NonInformative,
    /// Kononenko's construction with association level `k`.
    KononenkoInformative { k: u32 },
    /// Member of the parity group `group`.
    XorMember { group: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpec {
    pub name: String,
    pub cardinality: u32,
    pub role: FeatureRole,
}

impl FeatureSpec {
    pub fn new(name: impl Into<String>, cardinality: u32, role: FeatureRole) -> Self {
        Self {
            name: name.into(),
            cardinality,
            role,
        }
    }

    pub fn non_informative(name: impl Into<String>, cardinality: u32) -> Self {
        Self::new(name, cardinality, FeatureRole::NonInformative)
    }

    pub fn kononenko(name: impl Into<String>, cardinality: u32, k: u32) -> Self {
        Self::new(name, cardinality, FeatureRole::KononenkoInformative { k })
    }

    pub fn xor(name: impl Into<String>, group: u32) -> Self {
        Self::new(name, 2, FeatureRole::XorMember { group })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub class_cardinality: u32,
    pub features: Vec<FeatureSpec>,
    pub n_rows: usize,
    pub xor_noise: f64,
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn new(class_cardinality: u32, features: Vec<FeatureSpec>, n_rows: usize, seed: u64) -> Self {
        Self {
            class_cardinality,
            features,
            n_rows,
            xor_noise: DEFAULT_XOR_NOISE,
            seed,
        }
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.xor_noise = noise;
        self
    }

    fn xor_groups(&self) -> BTreeMap<u32, Vec<usize>> {
        let mut groups: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (i, f) in self.features.iter().enumerate() {
            if let FeatureRole::XorMember { group } = f.role {
                groups.entry(group).or_default().push(i);
            }
        }
        groups
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidConfig(msg));
        if self.features.is_empty() {
            return invalid("at least one feature is required".into());
        }
        if self.n_rows == 0 {
            return invalid("n_rows must be at least 1".into());
        }
        if self.class_cardinality == 0 {
            return invalid("class cardinality must be at least 1".into());
        }
        if !(0.0..=0.5).contains(&self.xor_noise) {
            return invalid(format!("xor noise {} outside [0, 0.5]", self.xor_noise));
        }
        let mut names = HashSet::new();
        for f in &self.features {
            if f.name == CLASS_COLUMN || !names.insert(f.name.as_str()) {
                return invalid(format!("feature name `{}` is reserved or repeated", f.name));
            }
            if f.cardinality == 0 {
                return invalid(format!("feature `{}` has cardinality 0", f.name));
            }
            match f.role {
                FeatureRole::NonInformative => {}
                FeatureRole::KononenkoInformative { k } => {
                    if f.cardinality < 2 {
                        return invalid(format!(
                            "informative feature `{}` needs cardinality >= 2",
                            f.name
                        ));
                    }
                    if k == 0 {
                        return invalid(format!("informative feature `{}` needs k >= 1", f.name));
                    }
                    if self.class_cardinality < 2 {
                        return invalid("informative features need class cardinality >= 2".into());
                    }
                }
                FeatureRole::XorMember { .. } => {
                    if f.cardinality != 2 {
                        return invalid(format!("XOR member `{}` must be binary", f.name));
                    }
                }
            }
        }
        let groups = self.xor_groups();
        if !groups.is_empty() {
            if self.class_cardinality != 2 {
                return invalid("XOR groups require class cardinality 2".into());
            }
            if groups.len() > 1 {
                return invalid("at most one XOR group is supported".into());
            }
            if groups.values().any(|g| g.len() < 2) {
                return invalid("an XOR group needs at least 2 members".into());
            }
        }
        Ok(())
    }
}

/// `n` labels drawn uniformly from `0..cardinality`.
pub fn gen_class(n: usize, cardinality: u32, rng: &mut impl Rng) -> Result<LabelColumn> {
    gen_noninformative(n, cardinality, rng)
}

/// Probability that the label lies in the lower half for class index `i`
/// (1-based) out of `classes`: `1/(i + k·C)` for even `i`, its complement for
/// odd `i`.
pub fn kononenko_subset_probability(i: u32, classes: u32, k: u32) -> Result<f64> {
    if i == 0 || i > classes {
        return Err(Error::ClassIndexOutOfRange { index: i, classes });
    }
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    let q = 1.0 / (f64::from(i) + f64::from(k) * f64::from(classes));
    Ok(if i.is_multiple_of(2) { q } else { 1.0 - q })
}

/// Kononenko-informative column of cardinality `v` conditioned on `class`.
///
/// The lower half is `0..v/2` (floor), the upper half `v/2..v`.
pub fn gen_kononenko(
    v: u32,
    class: &LabelColumn,
    classes: u32,
    k: u32,
    rng: &mut impl Rng,
) -> Result<LabelColumn> {
    if v < 2 {
        return Err(Error::InvalidCardinality {
            min: 2,
            got: u64::from(v),
        });
    }
    let lower_p = (1..=classes)
        .map(|i| kononenko_subset_probability(i, classes, k))
        .collect::<Result<Vec<_>>>()?;
    let half = v / 2;
    let values = class
        .values()
        .iter()
        .map(|&label| {
            let p = *lower_p.get(label as usize).ok_or(Error::ClassIndexOutOfRange {
                index: label + 1,
                classes,
            })?;
            Ok(if rng.gen_bool(p) {
                rng.gen_range(0..half)
            } else {
                rng.gen_range(half..v)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    LabelColumn::new(values, v)
}

/// `n` uniform labels over `0..v`, independent of everything else.
pub fn gen_noninformative(n: usize, v: u32, rng: &mut impl Rng) -> Result<LabelColumn> {
    if v == 0 {
        return Err(Error::InvalidCardinality { min: 1, got: 0 });
    }
    let values = (0..n).map(|_| rng.gen_range(0..v)).collect();
    LabelColumn::new(values, v)
}

/// Noisy parity of `features`: each row's parity is flipped with probability
/// `noise`.
pub fn parity_class(features: &[&LabelColumn], noise: f64, rng: &mut impl Rng) -> Result<LabelColumn> {
    if !(0.0..=0.5).contains(&noise) {
        return Err(Error::InvalidConfig(format!("noise {noise} outside [0, 0.5]")));
    }
    let n = features.first().map_or(0, |f| f.len());
    let values = (0..n)
        .map(|row| {
            let parity = features.iter().fold(0, |acc, f| acc ^ (f.values()[row] & 1));
            parity ^ u32::from(rng.gen_bool(noise))
        })
        .collect();
    LabelColumn::new(values, 2)
}

/// `m` uniform binary features and their noisy parity, all from one stream.
pub fn gen_xor_group(
    n: usize,
    m: usize,
    noise: f64,
    rng: &mut impl Rng,
) -> Result<(Vec<LabelColumn>, LabelColumn)> {
    if m < 2 {
        return Err(Error::InvalidConfig("an XOR group needs at least 2 members".into()));
    }
    let features = (0..m)
        .map(|_| gen_noninformative(n, 2, rng))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&LabelColumn> = features.iter().collect();
    let class = parity_class(&refs, noise, rng)?;
    Ok((features, class))
}

/// Dataset for trial 0 of `config`.
pub fn generate_dataset(config: &GeneratorConfig) -> Result<Dataset> {
    generate_trial(config, 0)
}

/// Dataset for the given trial. Features keep their configured order and the
/// class column comes last, named [`CLASS_COLUMN`].
///
/// Stream 0 drives the class (uniform labels, or the parity flips when an XOR
/// group exists); feature `i` uses stream `i + 1`.
pub fn generate_trial(config: &GeneratorConfig, trial: u64) -> Result<Dataset> {
    config.validate()?;
    let n = config.n_rows;
    let rng = |column: usize| SeededRng::for_stream(config.seed, trial, column as u64);

    let mut columns: Vec<Option<LabelColumn>> = vec![None; config.features.len()];
    for (i, f) in config.features.iter().enumerate() {
        if matches!(f.role, FeatureRole::XorMember { .. }) {
            columns[i] = Some(gen_noninformative(n, 2, &mut rng(i + 1))?);
        }
    }

    let xor_members: Vec<&LabelColumn> = columns.iter().flatten().collect();
    let class = if xor_members.is_empty() {
        gen_class(n, config.class_cardinality, &mut rng(0))?
    } else {
        parity_class(&xor_members, config.xor_noise, &mut rng(0))?
    };

    for (i, f) in config.features.iter().enumerate() {
        let column = match f.role {
            FeatureRole::XorMember { .. } => continue,
            FeatureRole::NonInformative => gen_noninformative(n, f.cardinality, &mut rng(i + 1))?,
            FeatureRole::KononenkoInformative { k } => gen_kononenko(
                f.cardinality,
                &class,
                config.class_cardinality,
                k,
                &mut rng(i + 1),
            )?,
        };
        columns[i] = Some(column);
    }

    let mut named: Vec<(String, LabelColumn)> = config
        .features
        .iter()
        .zip(columns)
        .map(|(f, c)| (f.name.clone(), c.expect("every feature generated")))
        .collect();
    named.push((CLASS_COLUMN.to_string(), class));
    let class_index = named.len() - 1;
    Dataset::new(named, Some(class_index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infotheory::{msu, symmetrical_uncertainty, Dataset};

    fn freq(col: &LabelColumn, label: u32) -> f64 {
        col.values().iter().filter(|&&v| v == label).count() as f64 / col.len() as f64
    }

    #[test]
    fn class_is_uniform() {
        let c = gen_class(1_000_000, 2, &mut SeededRng::new(3)).unwrap();
        for label in 0..2 {
            let f = freq(&c, label);
            assert!((0.497..=0.503).contains(&f), "{f}");
        }
        let single = gen_class(10, 1, &mut SeededRng::new(3)).unwrap();
        assert!(single.values().iter().all(|&v| v == 0));
        let again = gen_class(100, 5, &mut SeededRng::new(3)).unwrap();
        assert_eq!(again, gen_class(100, 5, &mut SeededRng::new(3)).unwrap());
    }

    #[test]
    fn subset_probability_examples() {
        assert!((kononenko_subset_probability(1, 2, 1).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(kononenko_subset_probability(2, 2, 1).unwrap(), 0.25);
        assert_eq!(kononenko_subset_probability(10, 10, 1).unwrap(), 0.05);
        assert!(kononenko_subset_probability(0, 2, 1).is_err());
        assert!(kononenko_subset_probability(3, 2, 1).is_err());
    }

    #[test]
    fn kononenko_binary_conditional() {
        let n = 300_000;
        let class = LabelColumn::new(vec![0; n], 2).unwrap();
        let f = gen_kononenko(2, &class, 2, 1, &mut SeededRng::new(11)).unwrap();
        // binomial sd ~ 0.00086
        assert!((freq(&f, 0) - 2.0 / 3.0).abs() < 0.004);
    }

    #[test]
    fn kononenko_lower_subset_rate() {
        let n = 1_000_000;
        let class = LabelColumn::new(vec![1; n], 2).unwrap();
        let f = gen_kononenko(4, &class, 2, 1, &mut SeededRng::new(5)).unwrap();
        let lower = freq(&f, 0) + freq(&f, 1);
        assert!((lower - 0.25).abs() < 0.003, "{lower}");
    }

    #[test]
    fn kononenko_odd_split() {
        let n = 20_000;
        let class = LabelColumn::new(vec![0; n], 2).unwrap();
        let f = gen_kononenko(5, &class, 2, 1, &mut SeededRng::new(5)).unwrap();
        let lower = freq(&f, 0) + freq(&f, 1);
        assert!((lower - 2.0 / 3.0).abs() < 0.02);
        for label in 0..5 {
            assert!(freq(&f, label) > 0.0);
        }
        assert!(gen_kononenko(1, &class, 2, 1, &mut SeededRng::new(5)).is_err());
    }

    #[test]
    fn noninformative_marginals() {
        let c = gen_noninformative(50, 1, &mut SeededRng::new(1)).unwrap();
        assert!(c.values().iter().all(|&v| v == 0));
        let c = gen_noninformative(1_000_000, 10, &mut SeededRng::new(9)).unwrap();
        for label in 0..10 {
            assert!((freq(&c, label) - 0.1).abs() < 0.002);
        }
    }

    #[test]
    fn noninformative_is_independent_of_class() {
        let n = 100_000;
        let class = gen_class(n, 2, &mut SeededRng::new(1)).unwrap();
        let f = gen_noninformative(n, 2, &mut SeededRng::new(2)).unwrap();
        let ds = Dataset::new(vec![("f".into(), f), ("class".into(), class)], Some(1)).unwrap();
        assert!(symmetrical_uncertainty(&ds, 0, 1).unwrap() < 0.001);
    }

    fn xor_dataset(n: usize, noise: f64, seed: u64) -> Dataset {
        let (features, class) = gen_xor_group(n, 2, noise, &mut SeededRng::new(seed)).unwrap();
        let mut cols: Vec<(String, LabelColumn)> = features
            .into_iter()
            .enumerate()
            .map(|(i, f)| (format!("f{}", i + 1), f))
            .collect();
        cols.push(("class".into(), class));
        Dataset::new(cols, Some(2)).unwrap()
    }

    #[test]
    fn xor_noiseless_is_exact_parity() {
        let ds = xor_dataset(1000, 0.0, 4);
        for row in 0..1000 {
            let v = |c: usize| ds.column(c).values()[row];
            assert_eq!(v(2), v(0) ^ v(1));
        }
        let m = msu(&xor_dataset(100_000, 0.0, 4), &[0, 1, 2]).unwrap();
        assert!((m - 0.5).abs() < 0.01, "{m}");
    }

    #[test]
    fn xor_noisy_limit() {
        let m = msu(&xor_dataset(100_000, 0.05, 8), &[0, 1, 2]).unwrap();
        assert!((m - 0.35680).abs() < 0.01, "{m}");
        let m = msu(&xor_dataset(100_000, 0.5, 8), &[0, 1, 2]).unwrap();
        assert!(m < 0.001, "{m}");
    }

    #[test]
    fn xor_group_rejects_bad_parameters() {
        assert!(gen_xor_group(10, 1, 0.05, &mut SeededRng::new(1)).is_err());
        assert!(gen_xor_group(10, 2, 0.6, &mut SeededRng::new(1)).is_err());
    }

    #[test]
    fn stream_seeds_differ_per_coordinate() {
        let base = stream_seed(1, 2, 3);
        assert_ne!(base, stream_seed(1, 2, 4));
        assert_ne!(base, stream_seed(1, 3, 3));
        assert_ne!(base, stream_seed(2, 2, 3));
        assert_ne!(stream_seed(0, 1, 0), stream_seed(0, 0, 1));
    }

    fn xor_config() -> GeneratorConfig {
        GeneratorConfig::new(2, vec![FeatureSpec::xor("f1", 0), FeatureSpec::xor("f2", 0)], 1000, 7)
    }

    #[test]
    fn generate_xor_config() {
        let ds = generate_dataset(&xor_config()).unwrap();
        assert_eq!(ds.n_rows(), 1000);
        assert_eq!(ds.n_columns(), 3);
        assert_eq!(ds.class_index(), Some(2));
        assert_eq!(ds.name(2), CLASS_COLUMN);
        assert_eq!(ds, generate_dataset(&xor_config()).unwrap());
        assert_ne!(ds, generate_trial(&xor_config(), 1).unwrap());
    }

    #[test]
    fn generate_rejects_invalid_configs() {
        let empty = GeneratorConfig::new(2, vec![], 10, 0);
        assert!(matches!(generate_dataset(&empty), Err(Error::InvalidConfig(_))));

        let mut ten_class_xor = xor_config();
        ten_class_xor.class_cardinality = 10;
        assert!(generate_dataset(&ten_class_xor).is_err());

        let lonely = GeneratorConfig::new(2, vec![FeatureSpec::xor("f1", 0)], 10, 0);
        assert!(generate_dataset(&lonely).is_err());

        let two_groups = GeneratorConfig::new(
            2,
            vec![
                FeatureSpec::xor("a", 0),
                FeatureSpec::xor("b", 0),
                FeatureSpec::xor("c", 1),
                FeatureSpec::xor("d", 1),
            ],
            10,
            0,
        );
        assert!(generate_dataset(&two_groups).is_err());

        let noisy = xor_config().with_noise(0.7);
        assert!(generate_dataset(&noisy).is_err());

        let binary_kononenko = GeneratorConfig::new(2, vec![FeatureSpec::kononenko("f", 1, 1)], 10, 0);
        assert!(generate_dataset(&binary_kononenko).is_err());

        let dup = GeneratorConfig::new(
            2,
            vec![FeatureSpec::non_informative("f", 2), FeatureSpec::non_informative("f", 2)],
            10,
            0,
        );
        assert!(generate_dataset(&dup).is_err());

        let mut no_rows = xor_config();
        no_rows.n_rows = 0;
        assert!(generate_dataset(&no_rows).is_err());
    }

    #[test]
    fn mixed_roles_generate() {
        let config = GeneratorConfig::new(
            10,
            vec![FeatureSpec::kononenko("inf", 8, 1), FeatureSpec::non_informative("noise", 8)],
            5000,
            42,
        );
        let ds = generate_dataset(&config).unwrap();
        assert_eq!(ds.column(2).cardinality(), 10);
        let inf = symmetrical_uncertainty(&ds, 0, 2).unwrap();
        let noise = symmetrical_uncertainty(&ds, 1, 2).unwrap();
        assert!(inf > noise, "{inf} <= {noise}");
    }
}
