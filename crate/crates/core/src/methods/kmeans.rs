use std::io::Write;

use rand::seq::index;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::KernelMatrix;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KMeansConfig {
    pub k: usize,
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            k: 3,
            restarts: 10,
            max_iter: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult {
    /// Cluster id in `0..k` for every object.
    pub assignment: Vec<usize>,
    pub k: usize,
    /// Within-cluster sum of squared feature-space distances to the means.
    pub objective: f64,
    /// Lloyd iterations of the winning restart.
    pub iterations: usize,
    /// Objective after every assignment step of the winning restart.
    pub history: Vec<f64>,
}

impl ClusteringResult {
    /// `index,cluster` lines.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        for (i, c) in self.assignment.iter().enumerate() {
            writeln!(w, "{i},{c}")?;
        }
        Ok(())
    }
}

/// The `k` distinct objects that seed restart `restart`, in centroid order.
pub fn initial_centers(seed: u64, restart: usize, n: usize, k: usize) -> Vec<usize> {
    let mut rng = rng::seeded(rng::derive(seed, &[restart as u64]));
    index::sample(&mut rng, n, k).into_vec()
}

/// Kernel k-means: Lloyd iterations on cluster means in feature space, with
/// squared distances expressed through the kernel,
/// `K[i][i] - 2 mean_{j in c} K[i][j] + mean_{j,l in c} K[j][l]`.
///
/// Each of `cfg.restarts` runs starts from `k` objects drawn uniformly at
/// random; the run with the smallest objective wins (earliest on ties).
/// A cluster that runs empty is re-seeded with the object farthest from its
/// own mean.
pub fn kernel_kmeans(kernel: &KernelMatrix, cfg: &KMeansConfig) -> Result<ClusteringResult> {
    let n = kernel.n();
    if cfg.k < 2 || cfg.k > n {
        return Err(Error::InvalidParameter(format!("k = {} must lie in 2..={n}", cfg.k)));
    }
    if cfg.restarts == 0 {
        return Err(Error::InvalidParameter("restarts must be positive".into()));
    }
    kernel.check_psd()?;

    let mut best: Option<ClusteringResult> = None;
    for restart in 0..cfg.restarts {
        let centers = initial_centers(cfg.seed, restart, n, cfg.k);
        let run = lloyd(kernel, cfg.k, &centers, cfg.max_iter);
        if best.as_ref().is_none_or(|b| run.objective < b.objective) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Distances of every object to every cluster mean, plus the objective of
/// the current assignment.
fn distances(kernel: &KernelMatrix, k: usize, assignment: &[usize]) -> (Vec<f64>, f64) {
    let n = kernel.n();
    let mut size = vec![0usize; k];
    for &c in assignment {
        size[c] += 1;
    }
    // sums[i * k + c] = sum of K[i][j] over j in cluster c
    let sums: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut s = vec![0.0; k];
            for (j, &x) in kernel.row(i).iter().enumerate() {
                s[assignment[j]] += x;
            }
            s
        })
        .collect();
    let mut within = vec![0.0; k];
    for j in 0..n {
        within[assignment[j]] += sums[j * k + assignment[j]];
    }
    let dist: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let kii = kernel.get(i, i);
            let sums = &sums;
            let size = &size;
            let within = &within;
            (0..k).map(move |c| {
                if size[c] == 0 {
                    f64::INFINITY
                } else {
                    let m = size[c] as f64;
                    kii - 2.0 * sums[i * k + c] / m + within[c] / (m * m)
                }
            })
        })
        .collect();
    let objective = (0..n).map(|i| dist[i * k + assignment[i]]).sum();
    (dist, objective)
}

fn argmin(row: &[f64]) -> usize {
    let mut best = 0;
    for (c, &d) in row.iter().enumerate().skip(1) {
        if d < row[best] {
            best = c;
        }
    }
    best
}

/// Moves the object farthest from its mean into each empty cluster.
fn repair_empty(assignment: &mut [usize], own_dist: &mut [f64], k: usize) {
    let mut size = vec![0usize; k];
    for &c in assignment.iter() {
        size[c] += 1;
    }
    for c in 0..k {
        if size[c] > 0 {
            continue;
        }
        let mut pick = None;
        for i in 0..assignment.len() {
            if size[assignment[i]] > 1 && pick.is_none_or(|p: usize| own_dist[i] > own_dist[p]) {
                pick = Some(i);
            }
        }
        let i = pick.expect("k <= n leaves a cluster with two members");
        size[assignment[i]] -= 1;
        size[c] = 1;
        assignment[i] = c;
        own_dist[i] = 0.0;
    }
}

fn lloyd(kernel: &KernelMatrix, k: usize, centers: &[usize], max_iter: usize) -> ClusteringResult {
    let n = kernel.n();
    let mut assignment = vec![0usize; n];
    let mut own = vec![0.0; n];
    for i in 0..n {
        let d: Vec<f64> = centers
            .iter()
            .map(|&s| kernel.get(i, i) - 2.0 * kernel.get(i, s) + kernel.get(s, s))
            .collect();
        assignment[i] = argmin(&d);
        own[i] = d[assignment[i]];
    }
    repair_empty(&mut assignment, &mut own, k);

    let mut history = Vec::new();
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let (dist, objective) = distances(kernel, k, &assignment);
        history.push(objective);
        let mut next: Vec<usize> = (0..n).map(|i| argmin(&dist[i * k..(i + 1) * k])).collect();
        let mut own: Vec<f64> = (0..n).map(|i| dist[i * k + next[i]]).collect();
        repair_empty(&mut next, &mut own, k);
        if next == assignment {
            break;
        }
        assignment = next;
    }
    let (_, objective) = distances(kernel, k, &assignment);
    if history.last() != Some(&objective) {
        history.push(objective);
    }
    ClusteringResult {
        assignment,
        k,
        objective,
        iterations,
        history,
    }
}
