//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

use rand::Rng;
use triplet_kernels::methods::initial_centers;
use triplet_kernels::rng;
use triplet_kernels::synth::{euclidean_oracle, sample_triplets, Dataset, Dissimilarity, SamplerConfig};
use triplet_kernels::TripletStore;

pub fn random_points(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng::seeded(seed);
    (0..n)
        .map(|_| (0..dim).map(|_| r.random_range(-10.0..10.0)).collect())
        .collect()
}

pub fn random_dataset(n: usize, dim: usize, seed: u64) -> Dataset {
    Dataset::new(random_points(n, dim, seed), vec![0; n]).unwrap()
}

pub fn complete_store(data: &Dataset) -> TripletStore {
    let cfg = SamplerConfig {
        fraction: 1.0,
        errprob: 0.0,
        seed: 0,
    };
    sample_triplets(&euclidean_oracle(data), &cfg).unwrap()
}

fn sign(x: bool) -> i64 {
    if x {
        1
    } else {
        -1
    }
}

/// Kendall tau between the rankings seen from `a` and from `b`, by counting
/// every item pair.
pub fn brute_tau(o: &impl Dissimilarity, a: usize, b: usize) -> f64 {
    let n = o.len();
    let mut s = 0i64;
    for i in 0..n {
        for j in (i + 1)..n {
            let sa = sign(o.dissimilarity(a, i) < o.dissimilarity(a, j));
            let sb = sign(o.dissimilarity(b, i) < o.dissimilarity(b, j));
            s += sa * sb;
        }
    }
    s as f64 / (n * (n - 1) / 2) as f64
}

/// `k1` on the complete correct triplet set, written out directly: pairs
/// containing either object carry no triplet, and every column has
/// `C(n-1, 2)` entries.
pub fn anchor_excluded_tau(o: &impl Dissimilarity, a: usize, b: usize) -> f64 {
    if a == b {
        return 1.0;
    }
    let n = o.len();
    let mut s = 0i64;
    for i in 0..n {
        for j in (i + 1)..n {
            if [i, j].iter().any(|x| *x == a || *x == b) {
                continue;
            }
            let sa = sign(o.dissimilarity(a, i) < o.dissimilarity(a, j));
            let sb = sign(o.dissimilarity(b, i) < o.dissimilarity(b, j));
            s += sa * sb;
        }
    }
    s as f64 / ((n - 1) * (n - 2) / 2) as f64
}

fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Merge list `(left, right, height, id)` from textbook agglomeration:
/// the cluster distance is recomputed from scratch as the largest member
/// distance at every step.
pub fn naive_complete_linkage(points: &[Vec<f64>]) -> Vec<(usize, usize, f64, usize)> {
    let n = points.len();
    let mut clusters: BTreeMap<usize, Vec<usize>> = (0..n).map(|i| (i, vec![i])).collect();
    let mut out = Vec::new();
    for step in 0..n - 1 {
        let ids: Vec<usize> = clusters.keys().copied().collect();
        let mut best = (f64::INFINITY, 0, 0);
        for (x, &p) in ids.iter().enumerate() {
            for &q in &ids[x + 1..] {
                let mut d: f64 = 0.0;
                for &i in &clusters[&p] {
                    for &j in &clusters[&q] {
                        d = d.max(sq_dist(&points[i], &points[j]).sqrt());
                    }
                }
                if d < best.0 {
                    best = (d, p, q);
                }
            }
        }
        let (h, p, q) = best;
        let mut members = clusters.remove(&p).unwrap();
        members.extend(clusters.remove(&q).unwrap());
        clusters.insert(n + step, members);
        out.push((p, q, h, n + step));
    }
    out
}

/// Lloyd's algorithm on explicit coordinates, started from the same seed
/// objects and using the same empty-cluster rule as the kernel version.
pub fn coordinate_kmeans(points: &[Vec<f64>], k: usize, restarts: usize, max_iter: usize, seed: u64) -> (Vec<usize>, f64) {
    let n = points.len();
    let dim = points[0].len();
    let mut best: Option<(Vec<usize>, f64)> = None;
    for restart in 0..restarts {
        let centers = initial_centers(seed, restart, n, k);
        let mut means: Vec<Vec<f64>> = centers.iter().map(|&c| points[c].clone()).collect();
        let assign_step = |means: &[Vec<f64>]| -> (Vec<usize>, Vec<f64>) {
            let mut a = vec![0; n];
            let mut own = vec![0.0; n];
            for i in 0..n {
                for c in 0..k {
                    if sq_dist(&points[i], &means[c]) < sq_dist(&points[i], &means[a[i]]) {
                        a[i] = c;
                    }
                }
                own[i] = sq_dist(&points[i], &means[a[i]]);
            }
            (a, own)
        };
        let repair = |a: &mut Vec<usize>, own: &mut Vec<f64>| {
            for c in 0..k {
                let size = |a: &Vec<usize>, c: usize| a.iter().filter(|&&x| x == c).count();
                if size(a, c) > 0 {
                    continue;
                }
                let mut pick: Option<usize> = None;
                for i in 0..n {
                    if size(a, a[i]) > 1 && pick.is_none_or(|p| own[i] > own[p]) {
                        pick = Some(i);
                    }
                }
                let i = pick.unwrap();
                a[i] = c;
                own[i] = 0.0;
            }
        };
        let (mut assignment, mut own) = assign_step(&means);
        repair(&mut assignment, &mut own);
        for _ in 0..max_iter {
            means = (0..k)
                .map(|c| {
                    let members: Vec<usize> = (0..n).filter(|&i| assignment[i] == c).collect();
                    (0..dim)
                        .map(|d| members.iter().map(|&i| points[i][d]).sum::<f64>() / members.len() as f64)
                        .collect()
                })
                .collect();
            let (mut next, mut own) = assign_step(&means);
            repair(&mut next, &mut own);
            if next == assignment {
                break;
            }
            assignment = next;
        }
        let objective: f64 = (0..k)
            .map(|c| {
                let members: Vec<usize> = (0..n).filter(|&i| assignment[i] == c).collect();
                let mean: Vec<f64> = (0..dim)
                    .map(|d| members.iter().map(|&i| points[i][d]).sum::<f64>() / members.len() as f64)
                    .collect();
                members.iter().map(|&i| sq_dist(&points[i], &mean)).sum::<f64>()
            })
            .sum();
        if best.as_ref().is_none_or(|b| objective < b.1) {
            best = Some((assignment, objective));
        }
    }
    best.unwrap()
}

/// Relabels clusters in order of first appearance.
pub fn canonical(assignment: &[usize]) -> Vec<usize> {
    let mut map = BTreeMap::new();
    assignment
        .iter()
        .map(|c| {
            let next = map.len();
            *map.entry(*c).or_insert(next)
        })
        .collect()
}

pub fn run_cli(dir: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_triplet-kernels"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

/// Runs the binary and panics with its stderr on failure.
pub fn cli_ok(dir: &Path, args: &[&str]) {
    let out = run_cli(dir, args);
    assert!(
        out.status.success(),
        "{:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
}
