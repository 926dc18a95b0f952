//! Univariate and multivariate cardinality, and the sample-size rule derived
//! from them.

use crate::error::{Error, Result};
use crate::infotheory::{Dataset, LabelColumn};

/// Multiplier applied to the multivariate cardinality by default.
pub const DEFAULT_SAMPLE_FACTOR: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CardinalityMode {
    /// Number of possible labels.
    Declared,
    /// Number of labels that actually occur.
    Observed,
}

pub fn univariate_cardinality(col: &LabelColumn, mode: CardinalityMode) -> Result<u64> {
    match mode {
        CardinalityMode::Declared => Ok(u64::from(col.cardinality())),
        CardinalityMode::Observed if col.is_empty() => Err(Error::EmptyInput),
        CardinalityMode::Observed => Ok(u64::from(col.observed_cardinality())),
    }
}

/// `|class| · Π |f_i|`, failing on overflow.
pub fn multivariate_cardinality(class_cardinality: u64, feature_cardinalities: &[u64]) -> Result<u64> {
    if feature_cardinalities.is_empty() {
        return Err(Error::InvalidConfig("at least one feature is required".into()));
    }
    std::iter::once(&class_cardinality)
        .chain(feature_cardinalities)
        .try_fold(1u64, |acc, &c| {
            if c == 0 {
                return Err(Error::InvalidCardinality { min: 1, got: 0 });
            }
            acc.checked_mul(c).ok_or(Error::CardinalityOverflow)
        })
}

/// `factor · |class| · Π |f_i|`.
pub fn recommended_sample_size(
    class_cardinality: u64,
    feature_cardinalities: &[u64],
    factor: u64,
) -> Result<u64> {
    if factor == 0 {
        return Err(Error::InvalidConfig("sample size factor must be positive".into()));
    }
    multivariate_cardinality(class_cardinality, feature_cardinalities)?
        .checked_mul(factor)
        .ok_or(Error::CardinalityOverflow)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CardinalityProfile {
    pub per_feature: Vec<(String, u64)>,
    pub class_cardinality: u64,
    pub multivariate: u64,
}

impl CardinalityProfile {
    pub fn new(per_feature: Vec<(String, u64)>, class_cardinality: u64) -> Result<Self> {
        let cards: Vec<u64> = per_feature.iter().map(|(_, c)| *c).collect();
        let multivariate = multivariate_cardinality(class_cardinality, &cards)?;
        Ok(Self {
            per_feature,
            class_cardinality,
            multivariate,
        })
    }

    /// Profile of `features` against the dataset's class column.
    pub fn from_dataset(ds: &Dataset, features: &[usize], mode: CardinalityMode) -> Result<Self> {
        let class = ds
            .class_index()
            .ok_or_else(|| Error::InvalidDataset("dataset has no class column".into()))?;
        let per_feature = features
            .iter()
            .map(|&f| Ok((ds.name(f).to_string(), univariate_cardinality(ds.column(f), mode)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(per_feature, univariate_cardinality(ds.column(class), mode)?)
    }

    pub fn recommended_sample_size(&self, factor: u64) -> Result<u64> {
        if factor == 0 {
            return Err(Error::InvalidConfig("sample size factor must be positive".into()));
        }
        self.multivariate
            .checked_mul(factor)
            .ok_or(Error::CardinalityOverflow)
    }
}
