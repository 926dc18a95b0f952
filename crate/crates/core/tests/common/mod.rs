//! Brute-force reference estimators over raw row tables.
//!
//! Each function builds an explicit probability table from the rows and
//! evaluates the textbook formula directly. Nothing here goes through the
//! library's counting code.

#![allow(dead_code)]

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::rc::Rc;

use msu::infotheory::{Dataset, LabelColumn};

/// Column-major raw data.
pub type Table = Vec<Vec<u32>>;

pub fn dataset(table: &Table, cards: &[u32]) -> Dataset {
    let cols = table
        .iter()
        .zip(cards)
        .enumerate()
        .map(|(i, (values, &card))| (format!("c{i}"), LabelColumn::new(values.clone(), card).unwrap()))
        .collect();
    Dataset::new(cols, None).unwrap()
}

/// Up to this many columns per probability table.
pub const MAX_COLS: usize = 8;

/// A row restricted to selected columns, padded with `u32::MAX`.
pub type Key = [u32; MAX_COLS];

/// Probability of each observed key.
pub type Distribution = BTreeMap<Key, f64>;

#[allow(clippy::needless_range_loop)]
pub fn probabilities(table: &Table, cols: &[usize]) -> Distribution {
    assert!(cols.len() <= MAX_COLS);
    let n = table[0].len();
    let mut counts: BTreeMap<Key, usize> = BTreeMap::new();
    for row in 0..n {
        let mut key = [u32::MAX; MAX_COLS];
        for (k, &c) in key.iter_mut().zip(cols) {
            *k = table[c][row];
        }
        *counts.entry(key).or_default() += 1;
    }
    counts.into_iter().map(|(k, c)| (k, c as f64 / n as f64)).collect()
}

/// Brute-force estimators over one table. Probability tables are built once
/// per column selection and reused.
pub struct Oracle<'a> {
    table: &'a Table,
    tables: RefCell<Vec<(Vec<usize>, Rc<Distribution>)>>,
    entropies: RefCell<Vec<(Vec<usize>, f64)>>,
}

impl<'a> Oracle<'a> {
    pub fn new(table: &'a Table) -> Self {
        Self {
            table,
            tables: RefCell::new(Vec::new()),
            entropies: RefCell::new(Vec::new()),
        }
    }

    fn probabilities(&self, cols: &[usize]) -> Rc<Distribution> {
        if let Some((_, p)) = self.tables.borrow().iter().find(|(k, _)| k == cols) {
            return Rc::clone(p);
        }
        let p = Rc::new(probabilities(self.table, cols));
        self.tables.borrow_mut().push((cols.to_vec(), Rc::clone(&p)));
        p
    }

    pub fn entropy(&self, cols: &[usize]) -> f64 {
        if let Some(&(_, h)) = self.entropies.borrow().iter().find(|(k, _)| k == cols) {
            return h;
        }
        let h = -self.probabilities(cols).values().map(|&p| p * p.log2()).sum::<f64>();
        self.entropies.borrow_mut().push((cols.to_vec(), h));
        h
    }

    /// `-Σ_j P(y_j) Σ_i P(x_i|y_j) log2 P(x_i|y_j)`.
    pub fn conditional_entropy(&self, x: usize, y: usize) -> f64 {
        let py = self.probabilities(&[y]);
        let pxy = self.probabilities(&[x, y]);
        let mut h = 0.0;
        for (yv, &p_y) in py.iter() {
            let mut inner = 0.0;
            for (xy, &p_xy) in pxy.iter() {
                if xy[1] == yv[0] {
                    let cond = p_xy / p_y;
                    inner += cond * cond.log2();
                }
            }
            h -= p_y * inner;
        }
        h
    }

    pub fn information_gain(&self, x: usize, y: usize) -> f64 {
        self.entropy(&[x]) - self.conditional_entropy(x, y)
    }

    pub fn symmetrical_uncertainty(&self, x: usize, y: usize) -> f64 {
        let denom = self.entropy(&[x]) + self.entropy(&[y]);
        if denom == 0.0 {
            0.0
        } else {
            2.0 * self.information_gain(x, y) / denom
        }
    }

    pub fn total_correlation(&self, cols: &[usize]) -> f64 {
        cols.iter().map(|&c| self.entropy(&[c])).sum::<f64>() - self.entropy(cols)
    }

    pub fn msu(&self, cols: &[usize]) -> f64 {
        let sum: f64 = cols.iter().map(|&c| self.entropy(&[c])).sum();
        if sum == 0.0 {
            return 0.0;
        }
        let n = cols.len() as f64;
        n / (n - 1.0) * self.total_correlation(cols) / sum
    }
}

pub fn entropy(table: &Table, cols: &[usize]) -> f64 {
    Oracle::new(table).entropy(cols)
}

pub fn conditional_entropy(table: &Table, x: usize, y: usize) -> f64 {
    Oracle::new(table).conditional_entropy(x, y)
}

pub fn information_gain(table: &Table, x: usize, y: usize) -> f64 {
    Oracle::new(table).information_gain(x, y)
}

pub fn symmetrical_uncertainty(table: &Table, x: usize, y: usize) -> f64 {
    Oracle::new(table).symmetrical_uncertainty(x, y)
}

pub fn total_correlation(table: &Table, cols: &[usize]) -> f64 {
    Oracle::new(table).total_correlation(cols)
}

pub fn msu(table: &Table, cols: &[usize]) -> f64 {
    Oracle::new(table).msu(cols)
}

/// Table 1 of the MSU bias study, columns `(f1 variant, f2, class)` with
/// a=0, b=1, c=2, s=0, t=1, p=0, q=1.
pub fn table1(variant: char) -> (Table, Vec<u32>) {
    let f1: Vec<u32> = match variant {
        'a' => vec![1, 1, 1, 1, 0, 0, 0, 0],
        'b' => vec![0, 1, 1, 1, 0, 0, 0, 0],
        'c' => vec![2, 1, 1, 1, 0, 0, 0, 0],
        _ => panic!("unknown variant {variant}"),
    };
    let card = if variant == 'c' { 3 } else { 2 };
    (
        vec![f1, vec![0, 0, 1, 1, 0, 0, 1, 1], vec![0, 1, 0, 1, 0, 1, 0, 1]],
        vec![card, 2, 2],
    )
}

/// The same tables as printed, with letter labels.
pub fn table1_csv(variant: char) -> String {
    let first = match variant {
        'a' => "b",
        'b' => "a",
        'c' => "c",
        _ => panic!("unknown variant {variant}"),
    };
    let mut s = String::from("f1,f2,class\n");
    s += &format!("{first},s,p\n");
    for row in ["b,s,q", "b,t,p", "b,t,q", "a,s,p", "a,s,q", "a,t,p", "a,t,q"] {
        s += row;
        s.push('\n');
    }
    s
}

/// Every subset of `0..n` with at least `min` elements, in lexicographic
/// bitmask order.
pub fn subsets(n: usize, min: usize) -> Vec<Vec<usize>> {
    (1u32..(1 << n))
        .map(|mask| (0..n).filter(|&i| mask & (1 << i) != 0).collect::<Vec<_>>())
        .filter(|s| s.len() >= min)
        .collect()
}
