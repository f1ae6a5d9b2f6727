//! Sparse feature embeddings of the objects, built from a triplet store.
//!
//! * `k1` describes object `a` by the answers to comparisons *anchored* at
//!   `a`: one coordinate per unordered pair `i < j`, `+1` when `a` is closer
//!   to `i`, `-1` when closer to `j`, `0` when the comparison is unknown.
//! * `k2` describes `a` by the comparisons in which `a` is compared from
//!   another anchor `i` against some `j`: one coordinate per ordered pair
//!   `(i, j)`, `i != j`, `+1` for `(i, a, j)` and `-1` for `(i, j, a)`.
//!
//! Every column is scaled to unit Euclidean norm. Pair coordinates are
//! numbered lexicographically, see [`pair_index`] and [`ordered_pair_index`].

use std::io::Write;

use rayon::prelude::*;

pub use crate::error::FeatureKind;
use crate::error::{Error, Result};
use crate::triplets::{Comparison, TripletStore};

/// Lexicographic rank of the unordered pair `i < j` among `n` objects.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Lexicographic rank of the ordered pair `(i, j)`, `i != j`.
pub fn ordered_pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i != j && i < n && j < n);
    i * (n - 1) + if j < i { j } else { j - 1 }
}

/// Sparse vector with strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseColumn {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseColumn {
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for (i, v) in self.iter() {
            out[i] = v;
        }
        out
    }

    fn scale(&mut self, factor: f64) {
        for v in &mut self.values {
            *v *= factor;
        }
    }
}

/// Feature matrix with one sparse column per object.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseFeatureMatrix {
    pub kind: FeatureKind,
    pub n: usize,
    pub dim: usize,
    pub weighted: bool,
    pub columns: Vec<SparseColumn>,
}

impl SparseFeatureMatrix {
    pub fn nnz(&self) -> usize {
        self.columns.iter().map(SparseColumn::nnz).sum()
    }

    /// The embedding `-Phi`; it induces the same Gram matrix.
    pub fn negate(&self) -> SparseFeatureMatrix {
        let mut out = self.clone();
        for c in &mut out.columns {
            c.scale(-1.0);
        }
        out
    }

    /// Text dump: a `kind,n,dim` header, then `col,featidx,value` per
    /// non-zero.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{},{},{}", self.kind, self.n, self.dim)?;
        for (col, c) in self.columns.iter().enumerate() {
            for (i, v) in c.iter() {
                writeln!(w, "{col},{i},{v:.16e}")?;
            }
        }
        Ok(())
    }
}

fn unweighted_sign(c: &Comparison) -> Result<f64> {
    match c.counts {
        [0, 0] => unreachable!("stored comparisons have a positive count"),
        [_, 0] => Ok(1.0),
        [0, _] => Ok(-1.0),
        _ => Err(Error::ContradictionPresent {
            anchor: c.anchor as usize,
            first: c.lo as usize,
            second: c.hi as usize,
        }),
    }
}

/// `(#lo closer - #hi closer) / (#lo closer + #hi closer)`.
fn weighted_vote(c: &Comparison) -> f64 {
    let (p, q) = (c.counts[0] as f64, c.counts[1] as f64);
    (p - q) / (p + q)
}

/// Drops exact zeros and scales the column to unit norm. Returns `false`
/// when nothing is left.
fn normalize(col: &mut SparseColumn) -> bool {
    let mut keep = 0;
    for k in 0..col.values.len() {
        if col.values[k] != 0.0 {
            col.indices[keep] = col.indices[k];
            col.values[keep] = col.values[k];
            keep += 1;
        }
    }
    col.indices.truncate(keep);
    col.values.truncate(keep);
    if keep == 0 {
        return false;
    }
    col.scale(1.0 / col.norm());
    true
}

/// Builds the `k1` embedding.
///
/// Unweighted: entries are `±1/sqrt(m_a)` where `m_a` is the number of
/// distinct comparisons anchored at `a`; repeated identical answers count
/// once and contradicting answers are an error. Weighted: entries are the
/// vote balance of each comparison, then the column is normalized.
pub fn build_phi_k1(store: &TripletStore, weighted: bool) -> Result<SparseFeatureMatrix> {
    let n = store.n();
    let missing = store.coverage().missing_anchor();
    if !missing.is_empty() {
        return Err(Error::MissingAnchor(missing));
    }
    let columns: Vec<Result<SparseColumn>> = (0..n)
        .into_par_iter()
        .map(|a| {
            let cmp = store.anchored_at(a);
            let mut col = SparseColumn {
                indices: Vec::with_capacity(cmp.len()),
                values: Vec::with_capacity(cmp.len()),
            };
            for c in cmp {
                col.indices.push(pair_index(n, c.lo as usize, c.hi as usize));
                col.values.push(if weighted { weighted_vote(c) } else { unweighted_sign(c)? });
            }
            Ok(col)
        })
        .collect();
    finish(FeatureKind::K1, n, n * (n - 1) / 2, weighted, columns)
}

/// Builds the `k2` embedding; see [`build_phi_k1`] for the two modes.
///
/// The comparison `(i; lo, hi)` lands in column `lo` at slot `(i, hi)` and
/// in column `hi` at slot `(i, lo)`, with opposite signs.
pub fn build_phi_k2(store: &TripletStore, weighted: bool) -> Result<SparseFeatureMatrix> {
    let n = store.n();
    let missing = store.coverage().missing_non_anchor();
    if !missing.is_empty() {
        return Err(Error::MissingNonAnchor(missing));
    }
    let mut occupancy = vec![0usize; n];
    for c in store.comparisons() {
        occupancy[c.lo as usize] += 1;
        occupancy[c.hi as usize] += 1;
    }
    let mut columns: Vec<SparseColumn> = occupancy
        .iter()
        .map(|&m| SparseColumn {
            indices: Vec::with_capacity(m),
            values: Vec::with_capacity(m),
        })
        .collect();
    // comparisons arrive sorted by (anchor, lo, hi), which keeps every
    // column's slots increasing
    for c in store.comparisons() {
        let v = if weighted { weighted_vote(c) } else { unweighted_sign(c)? };
        let (i, lo, hi) = (c.anchor as usize, c.lo as usize, c.hi as usize);
        columns[lo].indices.push(ordered_pair_index(n, i, hi));
        columns[lo].values.push(v);
        columns[hi].indices.push(ordered_pair_index(n, i, lo));
        columns[hi].values.push(-v);
    }
    debug_assert!(columns.iter().all(|c| c.indices.windows(2).all(|w| w[0] < w[1])));
    finish(
        FeatureKind::K2,
        n,
        n * (n - 1),
        weighted,
        columns.into_iter().map(Ok).collect(),
    )
}

fn finish(
    kind: FeatureKind,
    n: usize,
    dim: usize,
    weighted: bool,
    columns: Vec<Result<SparseColumn>>,
) -> Result<SparseFeatureMatrix> {
    let mut out = Vec::with_capacity(columns.len());
    let mut zero = Vec::new();
    for (a, col) in columns.into_iter().enumerate() {
        let mut col = col?;
        if !normalize(&mut col) {
            zero.push(a);
        }
        out.push(col);
    }
    if !zero.is_empty() {
        return Err(Error::ZeroColumn { kind, objects: zero });
    }
    Ok(SparseFeatureMatrix {
        kind,
        n,
        dim,
        weighted,
        columns: out,
    })
}
