//! Similarity triplets and their multiset store.
//!
//! A triple `(a, b, c)` states that object `b` is closer to the anchor `a`
//! than object `c` is, i.e. `d(a, b) < d(a, c)`. Triples are stored under a
//! canonical key `(anchor, lo, hi)` with `lo < hi`, together with the
//! multiplicities of both orientations, so contradicting answers to the same
//! comparison stay visible until they are resolved.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triplet {
    pub anchor: usize,
    pub closer: usize,
    pub farther: usize,
}

impl Triplet {
    pub fn new(anchor: usize, closer: usize, farther: usize) -> Self {
        Triplet {
            anchor,
            closer,
            farther,
        }
    }

    /// The same comparison answered the other way round.
    pub fn flipped(self) -> Self {
        Triplet::new(self.anchor, self.farther, self.closer)
    }

    fn validate(&self, n: usize, line: usize) -> Result<()> {
        for index in [self.anchor, self.closer, self.farther] {
            if index >= n {
                return Err(Error::IndexOutOfRange { line, index, n });
            }
        }
        if self.anchor == self.closer || self.anchor == self.farther || self.closer == self.farther {
            return Err(Error::DegenerateTriple(
                self.anchor,
                self.closer,
                self.farther,
                line,
            ));
        }
        Ok(())
    }
}

impl From<(usize, usize, usize)> for Triplet {
    fn from((a, b, c): (usize, usize, usize)) -> Self {
        Triplet::new(a, b, c)
    }
}

/// One comparison `d(anchor, lo) ?< d(anchor, hi)` and how often each answer
/// was given. `counts[0]` counts `(anchor, lo, hi)`, `counts[1]` counts
/// `(anchor, hi, lo)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Comparison {
    pub anchor: u32,
    pub lo: u32,
    pub hi: u32,
    pub counts: [u32; 2],
}

impl Comparison {
    pub fn total(&self) -> u64 {
        self.counts[0] as u64 + self.counts[1] as u64
    }

    pub fn is_contradicting(&self) -> bool {
        self.counts[0] > 0 && self.counts[1] > 0
    }

    fn key(&self) -> (u32, u32, u32) {
        (self.anchor, self.lo, self.hi)
    }
}

/// Immutable multiset of similarity triplets over `n` objects.
///
/// Comparisons are kept sorted by `(anchor, lo, hi)`, which is also the
/// lexicographic pair order used for feature indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripletStore {
    n: usize,
    comparisons: Vec<Comparison>,
    total: u64,
}

impl TripletStore {
    /// Builds a store from triples, accumulating duplicates.
    pub fn ingest<I, T>(triplets: I, n: usize) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: Into<Triplet>,
    {
        let mut keyed = Vec::new();
        for (i, t) in triplets.into_iter().enumerate() {
            let t: Triplet = t.into();
            t.validate(n, i + 1)?;
            keyed.push(orient(t));
        }
        if keyed.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(Self::from_oriented(n, keyed))
    }

    /// Builds a store from `(key, orientation)` pairs that are already
    /// validated; `orientation` is 0 when `lo` is the closer object.
    pub(crate) fn from_oriented(n: usize, mut keyed: Vec<((u32, u32, u32), u8)>) -> Self {
        keyed.sort_unstable();
        let mut comparisons: Vec<Comparison> = Vec::new();
        for ((anchor, lo, hi), side) in keyed {
            match comparisons.last_mut() {
                Some(last) if last.key() == (anchor, lo, hi) => last.counts[side as usize] += 1,
                _ => {
                    let mut counts = [0; 2];
                    counts[side as usize] = 1;
                    comparisons.push(Comparison {
                        anchor,
                        lo,
                        hi,
                        counts,
                    });
                }
            }
        }
        let total = comparisons.iter().map(Comparison::total).sum();
        TripletStore {
            n,
            comparisons,
            total,
        }
    }

    /// Number of objects the indices refer to.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of triples, counting multiplicities.
    pub fn len(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn comparisons(&self) -> &[Comparison] {
        &self.comparisons
    }

    /// Comparisons whose anchor is `anchor`, in pair order.
    pub fn anchored_at(&self, anchor: usize) -> &[Comparison] {
        let a = anchor as u32;
        let start = self.comparisons.partition_point(|c| c.anchor < a);
        let end = self.comparisons.partition_point(|c| c.anchor <= a);
        &self.comparisons[start..end]
    }

    /// Multiplicity of the triple `(anchor, closer, farther)`.
    pub fn count(&self, t: Triplet) -> u32 {
        let ((anchor, lo, hi), side) = orient(t);
        self.comparisons
            .binary_search_by_key(&(anchor, lo, hi), Comparison::key)
            .map(|i| self.comparisons[i].counts[side as usize])
            .unwrap_or(0)
    }

    pub fn contains(&self, t: Triplet) -> bool {
        self.count(t) > 0
    }

    pub fn has_contradictions(&self) -> bool {
        self.comparisons.iter().any(Comparison::is_contradicting)
    }

    pub fn first_contradiction(&self) -> Option<&Comparison> {
        self.comparisons.iter().find(|c| c.is_contradicting())
    }

    /// Every stored triple, repeated according to its multiplicity.
    pub fn triplets(&self) -> impl Iterator<Item = Triplet> + '_ {
        self.comparisons.iter().flat_map(|c| {
            let (a, lo, hi) = (c.anchor as usize, c.lo as usize, c.hi as usize);
            std::iter::repeat_n(Triplet::new(a, lo, hi), c.counts[0] as usize)
                .chain(std::iter::repeat_n(Triplet::new(a, hi, lo), c.counts[1] as usize))
        })
    }

    /// Replaces each comparison by a single triple carrying the majority
    /// answer. Comparisons whose two answers tie are dropped.
    pub fn resolve_majority(&self) -> TripletStore {
        let comparisons: Vec<Comparison> = self
            .comparisons
            .iter()
            .filter_map(|c| {
                let counts = match c.counts[0].cmp(&c.counts[1]) {
                    std::cmp::Ordering::Greater => [1, 0],
                    std::cmp::Ordering::Less => [0, 1],
                    std::cmp::Ordering::Equal => return None,
                };
                Some(Comparison { counts, ..*c })
            })
            .collect();
        let total = comparisons.len() as u64;
        TripletStore {
            n: self.n,
            comparisons,
            total,
        }
    }

    pub fn coverage(&self) -> CoverageReport {
        let mut anchor = vec![0u64; self.n];
        let mut non_anchor = vec![0u64; self.n];
        for c in &self.comparisons {
            let t = c.total();
            anchor[c.anchor as usize] += t;
            non_anchor[c.lo as usize] += t;
            non_anchor[c.hi as usize] += t;
        }
        CoverageReport { anchor, non_anchor }
    }

    /// Writes the store in the `a,b,c` triplet file format, one line per
    /// triple occurrence.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        for t in self.triplets() {
            writeln!(w, "{},{},{}", t.anchor, t.closer, t.farther)?;
        }
        Ok(())
    }

    /// Reads a triplet file. When `n` is `None` the object count is taken as
    /// one more than the largest index seen.
    pub fn read_from<R: BufRead>(r: R, n: Option<usize>) -> Result<Self> {
        let lines = parse_triplet_lines(r)?;
        let n = match n {
            Some(n) => n,
            None => lines
                .iter()
                .map(|(_, t)| t.anchor.max(t.closer).max(t.farther) + 1)
                .max()
                .unwrap_or(0),
        };
        let mut keyed = Vec::with_capacity(lines.len());
        for (line, t) in lines {
            t.validate(n, line)?;
            keyed.push(orient(t));
        }
        if keyed.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(Self::from_oriented(n, keyed))
    }
}

fn orient(t: Triplet) -> ((u32, u32, u32), u8) {
    let (a, b, c) = (t.anchor as u32, t.closer as u32, t.farther as u32);
    if b < c {
        ((a, b, c), 0)
    } else {
        ((a, c, b), 1)
    }
}

/// Parses `a,b,c` lines, skipping blank lines and `#` comments. Returns the
/// 1-based line number with every triple.
pub fn parse_triplet_lines<R: BufRead>(r: R) -> Result<Vec<(usize, Triplet)>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: lineno,
                reason: format!("expected 3 comma-separated indices, got {}", fields.len()),
            });
        }
        let mut idx = [0usize; 3];
        for (slot, field) in idx.iter_mut().zip(&fields) {
            *slot = field.trim().parse().map_err(|_| Error::Parse {
                line: lineno,
                reason: format!("not an index: {field:?}"),
            })?;
        }
        out.push((lineno, Triplet::new(idx[0], idx[1], idx[2])));
    }
    Ok(out)
}

/// How often every object occurs as anchor and as non-anchor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageReport {
    pub anchor: Vec<u64>,
    pub non_anchor: Vec<u64>,
}

impl CoverageReport {
    /// Objects that never anchor a triple; `k1` is undefined for them.
    pub fn missing_anchor(&self) -> Vec<usize> {
        zero_positions(&self.anchor)
    }

    /// Objects that never occur as closer or farther object; `k2` is
    /// undefined for them.
    pub fn missing_non_anchor(&self) -> Vec<usize> {
        zero_positions(&self.non_anchor)
    }
}

fn zero_positions(counts: &[u64]) -> Vec<usize> {
    counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == 0)
        .map(|(i, _)| i)
        .collect()
}
