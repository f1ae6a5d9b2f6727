use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::synth::Dataset;

/// A symmetric dissimilarity on objects `0..len()`.
pub trait Dissimilarity: Sync {
    fn len(&self) -> usize;

    fn dissimilarity(&self, i: usize, j: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Whether `b` is closer to `anchor` than `c`. Equal dissimilarities are
    /// resolved in favour of the smaller index, so the answer is always
    /// defined.
    fn closer(&self, anchor: usize, b: usize, c: usize) -> bool {
        let (db, dc) = (self.dissimilarity(anchor, b), self.dissimilarity(anchor, c));
        db < dc || (db == dc && b < c)
    }
}

/// Dense precomputed dissimilarities.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    n: usize,
    values: Vec<f64>,
}

impl DissimilarityMatrix {
    /// Builds the matrix from `f` evaluated once per unordered pair; the
    /// diagonal is zero.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = f(i, j);
                values[i * n + j] = d;
                values[j * n + i] = d;
            }
        }
        DissimilarityMatrix { n, values }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}

impl Dissimilarity for DissimilarityMatrix {
    fn len(&self) -> usize {
        self.n
    }

    fn dissimilarity(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn euclidean_oracle(data: &Dataset) -> DissimilarityMatrix {
    DissimilarityMatrix::from_fn(data.len(), |i, j| euclidean(&data.points[i], &data.points[j]))
}

/// Hop-count distances in the Euclidean minimum spanning tree of the points,
/// the tree being treated as an unweighted graph.
pub fn mst_path_oracle(data: &Dataset) -> Result<DissimilarityMatrix> {
    let n = data.len();
    if n < 2 {
        return Err(Error::InvalidParameter("MST oracle needs at least 2 points".into()));
    }
    let dist = euclidean_oracle(data);
    for i in 0..n {
        for j in (i + 1)..n {
            if dist.dissimilarity(i, j) == 0.0 {
                return Err(Error::DuplicatePoints(i, j));
            }
        }
    }

    // Prim on the complete graph, O(n^2). Equal keys go to the smaller index.
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut adjacency = vec![Vec::new(); n];
    best[0] = 0.0;
    for _ in 0..n {
        let mut u = usize::MAX;
        for v in 0..n {
            if !in_tree[v] && (u == usize::MAX || best[v] < best[u]) {
                u = v;
            }
        }
        in_tree[u] = true;
        if parent[u] != usize::MAX {
            adjacency[u].push(parent[u]);
            adjacency[parent[u]].push(u);
        }
        for v in 0..n {
            let d = dist.dissimilarity(u, v);
            if !in_tree[v] && d < best[v] {
                best[v] = d;
                parent[v] = u;
            }
        }
    }

    let mut hops = vec![0.0; n * n];
    let mut queue = VecDeque::new();
    for source in 0..n {
        let row = &mut hops[source * n..(source + 1) * n];
        let mut seen = vec![false; n];
        seen[source] = true;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for &v in &adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    row[v] = row[u] + 1.0;
                    queue.push_back(v);
                }
            }
        }
    }
    Ok(DissimilarityMatrix { n, values: hops })
}
