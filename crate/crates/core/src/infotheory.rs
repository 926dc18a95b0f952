//! Plug-in entropy estimators over integer-encoded discrete columns.
//!
//! Every estimator works on empirical frequencies: the probability of a label
//! (or of a tuple of labels) is its count divided by the number of rows.
//! Labels that never occur contribute nothing, so the declared cardinality of a
//! column only matters for validation.
//!
//! Sums over cells are taken over counts sorted ascending, and sums over
//! marginal entropies are taken over sorted values. Both orders depend only on
//! the multiset being summed, which makes every measure bit-identical under row
//! shuffles, column reorderings and label renamings.

use std::collections::{BTreeMap, HashSet};

use crate::error::{Error, Result};

/// Values within this distance outside a measure's range are clamped; anything
/// further is reported as [`Error::Consistency`].
pub const CLAMP_SLACK: f64 = 1e-12;

/// One discrete attribute: label indices plus the number of possible labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelColumn {
    values: Vec<u32>,
    cardinality: u32,
}

impl LabelColumn {
    pub fn new(values: Vec<u32>, cardinality: u32) -> Result<Self> {
        if cardinality == 0 {
            return Err(Error::InvalidCardinality { min: 1, got: 0 });
        }
        if let Some(&value) = values.iter().find(|&&v| v >= cardinality) {
            return Err(Error::LabelOutOfRange { value, cardinality });
        }
        Ok(Self {
            values,
            cardinality,
        })
    }

    /// Builds a column whose cardinality is one more than its largest label.
    pub fn from_labels(values: Vec<u32>) -> Result<Self> {
        let cardinality = values.iter().copied().max().map_or(1, |m| m + 1);
        Self::new(values, cardinality)
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn cardinality(&self) -> u32 {
        self.cardinality
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of distinct labels actually present.
    pub fn observed_cardinality(&self) -> u32 {
        let mut seen = vec![false; self.cardinality as usize];
        let mut distinct = 0;
        for &v in &self.values {
            if !seen[v as usize] {
                seen[v as usize] = true;
                distinct += 1;
            }
        }
        distinct
    }
}

/// Named, equal-length columns with an optional class column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    names: Vec<String>,
    columns: Vec<LabelColumn>,
    class_index: Option<usize>,
    n_rows: usize,
}

impl Dataset {
    pub fn new(columns: Vec<(String, LabelColumn)>, class_index: Option<usize>) -> Result<Self> {
        let n_rows = columns.first().map_or(0, |(_, c)| c.len());
        let mut seen = HashSet::new();
        for (name, col) in &columns {
            if col.len() != n_rows {
                return Err(Error::InvalidDataset(format!(
                    "column `{name}` has {} rows, expected {n_rows}",
                    col.len()
                )));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidDataset(format!(
                    "duplicate column name `{name}`"
                )));
            }
        }
        if let Some(ci) = class_index {
            if ci >= columns.len() {
                return Err(Error::InvalidDataset(format!(
                    "class index {ci} out of range for {} columns",
                    columns.len()
                )));
            }
        }
        let (names, columns) = columns.into_iter().unzip();
        Ok(Self {
            names,
            columns,
            class_index,
            n_rows,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, index: usize) -> &LabelColumn {
        &self.columns[index]
    }

    pub fn columns(&self) -> &[LabelColumn] {
        &self.columns
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn class_index(&self) -> Option<usize> {
        self.class_index
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Resolves column names to positions.
    pub fn positions<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|n| {
                self.position(n.as_ref())
                    .ok_or_else(|| Error::BadSelection(format!("unknown column `{}`", n.as_ref())))
            })
            .collect()
    }

    /// Positions of every non-class column, in order.
    pub fn feature_positions(&self) -> Vec<usize> {
        (0..self.n_columns())
            .filter(|&i| Some(i) != self.class_index)
            .collect()
    }
}

/// Empirical joint distribution of a column selection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointCounts {
    pub cells: BTreeMap<Vec<u32>, u64>,
    pub total: u64,
}

impl JointCounts {
    pub fn entropy(&self) -> f64 {
        let mut counts: Vec<u64> = self.cells.values().copied().collect();
        entropy_of_counts(&mut counts, self.total)
    }
}

fn validate_selection(ds: &Dataset, cols: &[usize]) -> Result<()> {
    if cols.is_empty() {
        return Err(Error::BadSelection("no columns selected".into()));
    }
    for (i, &c) in cols.iter().enumerate() {
        if c >= ds.n_columns() {
            return Err(Error::BadSelection(format!(
                "column position {c} out of range for {} columns",
                ds.n_columns()
            )));
        }
        if cols[..i].contains(&c) {
            return Err(Error::BadSelection(format!("column position {c} repeated")));
        }
    }
    if ds.n_rows() == 0 {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

/// `-Σ p log2 p` over `counts / total`, summed in ascending count order.
fn entropy_of_counts(counts: &mut [u64], total: u64) -> f64 {
    counts.sort_unstable();
    let n = total as f64;
    let mut h = 0.0;
    for &c in counts.iter().filter(|&&c| c > 0) {
        let p = c as f64 / n;
        h -= p * p.log2();
    }
    // -0.0 for a single cell
    h.max(0.0)
}

/// Entropy of the joint distribution of `columns` over `n` rows.
fn selection_entropy<'a, I>(columns: I, n: usize) -> f64
where
    I: Iterator<Item = &'a LabelColumn> + Clone,
{
    const SMALL: usize = 64;
    let product = columns
        .clone()
        .try_fold(1u64, |acc, c| acc.checked_mul(u64::from(c.cardinality())));
    if let Some(radix) = product.filter(|&r| r as usize <= SMALL) {
        let mut table = [0u64; SMALL];
        for row in 0..n {
            let key = columns
                .clone()
                .fold(0usize, |k, c| k * c.cardinality() as usize + c.values()[row] as usize);
            table[key] += 1;
        }
        let mut cells = 0;
        for i in 0..radix as usize {
            if table[i] > 0 {
                table[cells] = table[i];
                cells += 1;
            }
        }
        return entropy_of_counts(&mut table[..cells], n as u64);
    }
    let mut counts = cell_counts(columns, n);
    entropy_of_counts(&mut counts, n as u64)
}

/// Cell counts of the joint distribution of `columns`, in unspecified order.
///
/// Rows are folded into mixed-radix `u64` keys one column at a time. When the
/// next radix would overflow, keys are re-ranked densely first, which bounds
/// the radix by the row count.
fn cell_counts<'a, I>(columns: I, n: usize) -> Vec<u64>
where
    I: Iterator<Item = &'a LabelColumn> + Clone,
{
    let dense_limit = (2 * n as u64).max(256);
    let product = columns
        .clone()
        .try_fold(1u64, |acc, c| acc.checked_mul(u64::from(c.cardinality())));
    if let Some(radix) = product.filter(|&r| r <= dense_limit) {
        let mut table = vec![0u64; radix as usize];
        for row in 0..n {
            let key = columns
                .clone()
                .fold(0usize, |k, c| k * c.cardinality() as usize + c.values()[row] as usize);
            table[key] += 1;
        }
        table.retain(|&c| c > 0);
        return table;
    }

    let mut keys = vec![0u64; n];
    let mut radix: u64 = 1;
    for col in columns {
        let card = u64::from(col.cardinality());
        if radix.checked_mul(card).is_none() {
            radix = rerank(&mut keys);
        }
        for (k, &v) in keys.iter_mut().zip(col.values()) {
            *k = *k * card + u64::from(v);
        }
        radix *= card;
    }

    if radix <= dense_limit {
        let mut table = vec![0u64; radix as usize];
        for &k in &keys {
            table[k as usize] += 1;
        }
        table.retain(|&c| c > 0);
        table
    } else {
    keys.sort_unstable();
        let mut counts = Vec::new();
        let mut iter = keys.iter().peekable();
        while let Some(&k) = iter.next() {
            let mut c = 1;
            while iter.next_if_eq(&&k).is_some() {
                c += 1;
            }
            counts.push(c);
        }
        counts
    }
}

/// Replaces keys by their rank among the distinct keys; returns the number of
/// distinct keys.
fn rerank(keys: &mut [u64]) -> u64 {
    let mut distinct = keys.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    for k in keys.iter_mut() {
        *k = distinct.binary_search(k).expect("key present") as u64;
    }
    distinct.len() as u64
}

fn selected<'a>(ds: &'a Dataset, cols: &'a [usize]) -> impl Iterator<Item = &'a LabelColumn> + Clone {
    cols.iter().map(move |&c| ds.column(c))
}

fn sorted_sum(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    values.iter().sum()
}

fn clamp_checked(value: f64, lo: f64, hi: f64, what: &str) -> Result<f64> {
    if value < lo - CLAMP_SLACK || value > hi + CLAMP_SLACK || value.is_nan() {
        return Err(Error::Consistency(format!(
            "{what} = {value} outside [{lo}, {hi}]"
        )));
    }
    Ok(value.clamp(lo, hi))
}

/// Entropy of a single column in bits.
pub fn entropy(col: &LabelColumn) -> Result<f64> {
    if col.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(selection_entropy(std::iter::once(col), col.len()))
}

pub fn joint_counts(ds: &Dataset, cols: &[usize]) -> Result<JointCounts> {
    validate_selection(ds, cols)?;
    let columns: Vec<&LabelColumn> = selected(ds, cols).collect();
    let mut cells = BTreeMap::new();
    for row in 0..ds.n_rows() {
        let tuple: Vec<u32> = columns.iter().map(|c| c.values()[row]).collect();
        *cells.entry(tuple).or_insert(0) += 1;
    }
    Ok(JointCounts {
        cells,
        total: ds.n_rows() as u64,
    })
}

/// Entropy of the joint distribution of the selected columns.
pub fn joint_entropy(ds: &Dataset, cols: &[usize]) -> Result<f64> {
    validate_selection(ds, cols)?;
    Ok(selection_entropy(selected(ds, cols), ds.n_rows()))
}

/// `H(X|Y) = H(X,Y) - H(Y)`.
pub fn conditional_entropy(ds: &Dataset, x: usize, y: usize) -> Result<f64> {
    let hxy = joint_entropy(ds, &[x, y])?;
    let hy = entropy(ds.column(y))?;
    let hx = entropy(ds.column(x))?;
    clamp_checked(hxy - hy, 0.0, hx, "conditional entropy")
}

/// `IG(X|Y) = H(X) - H(X|Y)`, computed as `H(X) + H(Y) - H(X,Y)` so that it
/// is exactly symmetric in its arguments.
pub fn information_gain(ds: &Dataset, x: usize, y: usize) -> Result<f64> {
    total_correlation(ds, &[x, y])
}

/// `2 IG / (H(X) + H(Y))`, or 0 when both columns are constant.
pub fn symmetrical_uncertainty(ds: &Dataset, x: usize, y: usize) -> Result<f64> {
    let (denom, joint) = entropy_parts(ds, &[x, y])?;
    if denom == 0.0 {
        return Ok(0.0);
    }
    let ig = clamp_checked(denom - joint, 0.0, f64::INFINITY, "total correlation")?;
    clamp_checked(2.0 * ig / denom, 0.0, 1.0, "symmetrical uncertainty")
}

/// Marginal entropy sum and joint entropy of a selection of at least two
/// columns.
fn entropy_parts(ds: &Dataset, cols: &[usize]) -> Result<(f64, f64)> {
    if cols.len() < 2 {
        return Err(Error::TooFewVariables);
    }
    let joint = joint_entropy(ds, cols)?;
    let mut small = [0.0; 16];
    let mut large = Vec::new();
    let marginals = if cols.len() <= small.len() {
        &mut small[..cols.len()]
    } else {
        large.resize(cols.len(), 0.0);
        &mut large[..]
    };
    for (h, &c) in marginals.iter_mut().zip(cols) {
        *h = entropy(ds.column(c))?;
    }
    Ok((sorted_sum(marginals), joint))
}

/// `Σ H(Xi) - H(X1..Xn)` in bits.
pub fn total_correlation(ds: &Dataset, cols: &[usize]) -> Result<f64> {
    let (sum, joint) = entropy_parts(ds, cols)?;
    clamp_checked(sum - joint, 0.0, f64::INFINITY, "total correlation")
}

/// Multivariate symmetrical uncertainty, `n/(n-1) · C / Σ H(Xi)`, or 0 when
/// every selected column is constant.
pub fn msu(ds: &Dataset, cols: &[usize]) -> Result<f64> {
    let (sum, joint) = entropy_parts(ds, cols)?;
    if sum == 0.0 {
        return Ok(0.0);
    }
    let c = clamp_checked(sum - joint, 0.0, f64::INFINITY, "total correlation")?;
    let n = cols.len() as f64;
    clamp_checked(n / (n - 1.0) * c / sum, 0.0, 1.0, "MSU")
}

/// Every measure for one column set.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureReport {
    /// `(column name, entropy)` for each selected column.
    pub entropies: Vec<(String, f64)>,
    /// `(x name, y name, SU)` for each requested pair.
    pub su_pairs: Vec<(String, String, f64)>,
    pub joint_entropy: f64,
    pub total_correlation: f64,
    pub msu: f64,
}

impl MeasureReport {
    /// Measures `cols` as a set, plus SU for each pair in `pairs`.
    pub fn compute(ds: &Dataset, cols: &[usize], pairs: &[(usize, usize)]) -> Result<Self> {
        let entropies = cols
            .iter()
            .map(|&c| Ok((ds.name(c).to_string(), entropy(ds.column(c))?)))
            .collect::<Result<Vec<_>>>()?;
        let su_pairs = pairs
            .iter()
            .map(|&(x, y)| {
                Ok((
                    ds.name(x).to_string(),
                    ds.name(y).to_string(),
                    symmetrical_uncertainty(ds, x, y)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            entropies,
            su_pairs,
            joint_entropy: joint_entropy(ds, cols)?,
            total_correlation: total_correlation(ds, cols)?,
            msu: msu(ds, cols)?,
        })
    }
}
