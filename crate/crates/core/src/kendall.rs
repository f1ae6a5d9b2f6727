//! Kendall's tau between total rankings, and the exact kernels that need a
//! full dissimilarity oracle. These are the reference values the triplet
//! kernels approximate.

use crate::error::{Error, Result};
use crate::kernels::{KernelMatrix, KernelSource, Provenance};
use crate::synth::Dissimilarity;

/// A total ranking: `position(i)` is the rank of item `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ranking {
    sigma: Vec<usize>,
}

impl Ranking {
    /// From rank positions; `sigma` must be a permutation of `0..n`.
    pub fn new(sigma: Vec<usize>) -> Result<Self> {
        let n = sigma.len();
        let mut seen = vec![false; n];
        for &s in &sigma {
            if s >= n || std::mem::replace(&mut seen[s], true) {
                return Err(Error::NotAPermutation(n));
            }
        }
        Ok(Ranking { sigma })
    }

    /// From the items listed best first, e.g. `[0, 2, 1]` for `0 < 2 < 1`.
    pub fn from_order(order: &[usize]) -> Result<Self> {
        let n = order.len();
        let mut sigma = vec![usize::MAX; n];
        for (pos, &item) in order.iter().enumerate() {
            if item >= n || sigma[item] != usize::MAX {
                return Err(Error::NotAPermutation(n));
            }
            sigma[item] = pos;
        }
        Ok(Ranking { sigma })
    }

    /// All objects ordered by their dissimilarity from `anchor`.
    pub fn by_dissimilarity(oracle: &impl Dissimilarity, anchor: usize) -> Result<Self> {
        let n = oracle.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| oracle.dissimilarity(anchor, x).total_cmp(&oracle.dissimilarity(anchor, y)));
        for w in order.windows(2) {
            if oracle.dissimilarity(anchor, w[0]) == oracle.dissimilarity(anchor, w[1]) {
                return Err(Error::TieDetected {
                    anchor,
                    first: w[0].min(w[1]),
                    second: w[0].max(w[1]),
                });
            }
        }
        Ranking::from_order(&order)
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn position(&self, item: usize) -> usize {
        self.sigma[item]
    }

    pub fn reversed(&self) -> Ranking {
        let n = self.sigma.len();
        Ranking {
            sigma: self.sigma.iter().map(|&s| n - 1 - s).collect(),
        }
    }
}

/// Concordant and discordant pair counts; they add up to `C(n, 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairCounts {
    pub concordant: u64,
    pub discordant: u64,
}

impl PairCounts {
    pub fn pairs(&self) -> u64 {
        self.concordant + self.discordant
    }
}

pub fn pair_counts(r1: &Ranking, r2: &Ranking) -> Result<PairCounts> {
    if r1.len() != r2.len() {
        return Err(Error::LengthMismatch {
            left: r1.len(),
            right: r2.len(),
        });
    }
    if r1.len() < 2 {
        return Err(Error::InvalidParameter("rankings need at least 2 items".into()));
    }
    let n = r1.len();
    let mut counts = PairCounts {
        concordant: 0,
        discordant: 0,
    };
    for i in 0..n {
        for j in (i + 1)..n {
            let a = r1.sigma[i] < r1.sigma[j];
            let b = r2.sigma[i] < r2.sigma[j];
            if a == b {
                counts.concordant += 1;
            } else {
                counts.discordant += 1;
            }
        }
    }
    Ok(counts)
}

pub fn concordant_fraction(r1: &Ranking, r2: &Ranking) -> Result<f64> {
    let c = pair_counts(r1, r2)?;
    Ok(c.concordant as f64 / c.pairs() as f64)
}

pub fn discordant_fraction(r1: &Ranking, r2: &Ranking) -> Result<f64> {
    let c = pair_counts(r1, r2)?;
    Ok(c.discordant as f64 / c.pairs() as f64)
}

/// Fraction of concordant minus fraction of discordant pairs.
pub fn kendall_tau(r1: &Ranking, r2: &Ranking) -> Result<f64> {
    let c = pair_counts(r1, r2)?;
    Ok((c.concordant as f64 - c.discordant as f64) / c.pairs() as f64)
}

/// The feature vector whose inner products give Kendall's tau between
/// rankings by dissimilarity: for every pair `i < j` (including pairs that
/// contain `anchor` itself), `±1/sqrt(C(n,2))` by which of `i`, `j` is closer
/// to `anchor`.
pub fn tau_feature_map(oracle: &impl Dissimilarity, anchor: usize) -> Result<Vec<f64>> {
    let n = oracle.len();
    let scale = 1.0 / ((n * (n - 1) / 2) as f64).sqrt();
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        let di = oracle.dissimilarity(anchor, i);
        for j in (i + 1)..n {
            let dj = oracle.dissimilarity(anchor, j);
            if di == dj {
                return Err(Error::TieDetected {
                    anchor,
                    first: i,
                    second: j,
                });
            }
            out.push(if di < dj { scale } else { -scale });
        }
    }
    Ok(out)
}

/// `G[a][b] = tau(ranking from a, ranking from b)`.
pub fn tau_gram(oracle: &impl Dissimilarity) -> Result<KernelMatrix> {
    let n = oracle.len();
    let rankings = (0..n)
        .map(|a| Ranking::by_dissimilarity(oracle, a))
        .collect::<Result<Vec<_>>>()?;
    let mut entries = vec![0.0; n * n];
    for a in 0..n {
        entries[a * n + a] = 1.0;
        for b in (a + 1)..n {
            let t = kendall_tau(&rankings[a], &rankings[b])?;
            entries[a * n + b] = t;
            entries[b * n + a] = t;
        }
    }
    KernelMatrix::new(n, entries, Provenance::new(KernelSource::KendallTau))
}

/// Agreement counts behind the full-information version of `k2`: over all
/// `n^2` pairs `(i, j)`, whether `d(i, a) < d(i, j)` and `d(i, b) < d(i, j)`
/// give the same answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AgreementCounts {
    pub agree: u64,
    pub disagree: u64,
}

impl AgreementCounts {
    /// `(agree - disagree) / n^2`.
    pub fn score(&self) -> f64 {
        (self.agree as f64 - self.disagree as f64) / (self.agree + self.disagree) as f64
    }
}

pub fn ball_agreement(oracle: &impl Dissimilarity, a: usize, b: usize) -> AgreementCounts {
    let n = oracle.len();
    let mut out = AgreementCounts { agree: 0, disagree: 0 };
    for i in 0..n {
        let (da, db) = (oracle.dissimilarity(i, a), oracle.dissimilarity(i, b));
        for j in 0..n {
            let dj = oracle.dissimilarity(i, j);
            if (da < dj) == (db < dj) {
                out.agree += 1;
            } else {
                out.disagree += 1;
            }
        }
    }
    out
}
