//! Simulated triplet answers.
//!
//! The comparisons `d(a, b) ?< d(a, c)` over `n` objects are numbered
//! `a * C(n-1, 2) + r`, where `r` is the lexicographic rank of the pair
//! `{b, c}` among the objects other than `a` (indices above `a` shifted down
//! by one). This order coincides with the `(anchor, lo, hi)` order of a
//! [`TripletStore`].

use std::collections::HashSet;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng;
use crate::synth::Dissimilarity;
use crate::triplets::TripletStore;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    /// Share of all comparisons to answer, in `(0, 1]`.
    pub fraction: f64,
    /// Probability that an answer is flipped, in `[0, 1]`.
    pub errprob: f64,
    pub seed: u64,
}

/// `n (n-1) (n-2) / 2`, the number of distinct comparisons.
pub fn total_comparisons(n: usize) -> u64 {
    if n < 3 {
        return 0;
    }
    let n = n as u64;
    n * (n - 1) * (n - 2) / 2
}

/// `floor(fraction * total_comparisons(n))`.
pub fn sample_size(n: usize, fraction: f64) -> Result<u64> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!("fraction {fraction} not in (0, 1]")));
    }
    let total = total_comparisons(n);
    // the relative nudge keeps products such as 0.3 * 10 from flooring to 2
    let m = ((fraction * total as f64) * (1.0 + 1e-12)).floor() as u64;
    let m = m.min(total);
    if m == 0 {
        return Err(Error::InvalidParameter(format!(
            "fraction {fraction} of {total} comparisons selects no triplet"
        )));
    }
    Ok(m)
}

fn pairs(m: u64) -> u64 {
    m * m.saturating_sub(1) / 2
}

fn pair_start(m: u64, i: u64) -> u64 {
    i * (2 * m - i - 1) / 2
}

/// Index of the comparison with anchor `anchor` and unordered pair `{b, c}`.
pub fn comparison_index(n: usize, anchor: usize, b: usize, c: usize) -> u64 {
    let (lo, hi) = if b < c { (b, c) } else { (c, b) };
    let shift = |x: usize| if x > anchor { x - 1 } else { x } as u64;
    let m = (n - 1) as u64;
    let (i, j) = (shift(lo), shift(hi));
    anchor as u64 * pairs(m) + pair_start(m, i) + (j - i - 1)
}

/// Inverse of [`comparison_index`]: `(anchor, lo, hi)` with `lo < hi`.
pub fn comparison_at(n: usize, index: u64) -> (usize, usize, usize) {
    let m = (n - 1) as u64;
    let per_anchor = pairs(m);
    let anchor = index / per_anchor;
    let r = index % per_anchor;
    let b = (2 * m - 1) as f64;
    let mut i = ((b - (b * b - 8.0 * r as f64).max(0.0).sqrt()) / 2.0).floor() as u64;
    i = i.min(m - 2);
    while i > 0 && pair_start(m, i) > r {
        i -= 1;
    }
    while i + 1 < m - 1 && pair_start(m, i + 1) <= r {
        i += 1;
    }
    let j = r - pair_start(m, i) + i + 1;
    let unshift = |x: u64| if x >= anchor { x + 1 } else { x } as usize;
    (anchor as usize, unshift(i), unshift(j))
}

/// Floyd's combination sampling: `m` distinct values from `0..total`.
fn floyd_sample(rng: &mut rng::Rng, total: u64, m: u64) -> Vec<u64> {
    if m == total {
        return (0..total).collect();
    }
    let mut chosen: HashSet<u64> = HashSet::with_capacity(m as usize);
    for j in (total - m)..total {
        let t = rng.random_range(0..=j);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    let mut out: Vec<u64> = chosen.into_iter().collect();
    out.sort_unstable();
    out
}

/// Answers a uniformly chosen subset of all comparisons.
///
/// The subset has exactly [`sample_size`] elements and is drawn without
/// replacement, so a comparison is never answered twice. Each answer follows
/// `oracle` and is then flipped with probability `errprob`, independently.
/// Equal dissimilarities are resolved by [`Dissimilarity::closer`].
pub fn sample_triplets(oracle: &impl Dissimilarity, cfg: &SamplerConfig) -> Result<TripletStore> {
    let n = oracle.len();
    if n < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 objects, got {n}")));
    }
    if !(0.0..=1.0).contains(&cfg.errprob) {
        return Err(Error::InvalidParameter(format!("errprob {} not in [0, 1]", cfg.errprob)));
    }
    let total = total_comparisons(n);
    let m = sample_size(n, cfg.fraction)?;
    let mut rng = rng::seeded(cfg.seed);
    let indices = floyd_sample(&mut rng, total, m);
    let mut keyed = Vec::with_capacity(indices.len());
    for idx in indices {
        let (a, lo, hi) = comparison_at(n, idx);
        let correct = u8::from(!oracle.closer(a, lo, hi));
        let flip = rng.random::<f64>() < cfg.errprob;
        keyed.push(((a as u32, lo as u32, hi as u32), correct ^ u8::from(flip)));
    }
    Ok(TripletStore::from_oriented(n, keyed))
}
