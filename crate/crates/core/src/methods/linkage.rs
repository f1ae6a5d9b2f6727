use std::io::Write;

use crate::error::{Error, Result};
use crate::kernels::{KernelMatrix, PSD_TOL};

/// One agglomeration step. Leaves are `0..n`; the cluster created by step `s`
/// gets id `n + s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub id: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    pub n: usize,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    /// `left,right,height,newid` lines.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        for m in &self.merges {
            writeln!(w, "{},{},{:.16e},{}", m.left, m.right, m.height, m.id)?;
        }
        Ok(())
    }

    /// Flat clustering into `k` groups obtained by undoing the last `k - 1`
    /// merges. Groups are numbered by their smallest member.
    pub fn cut(&self, k: usize) -> Result<Vec<usize>> {
        if k == 0 || k > self.n {
            return Err(Error::InvalidParameter(format!("cannot cut {} leaves into {k} groups", self.n)));
        }
        let mut parent: Vec<usize> = (0..2 * self.n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for m in &self.merges[..self.n - k] {
            parent[m.left] = m.id;
            parent[m.right] = m.id;
        }
        let mut label_of_root = std::collections::BTreeMap::new();
        let mut out = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let r = find(&mut parent, i);
            let next = label_of_root.len();
            out.push(*label_of_root.entry(r).or_insert(next));
        }
        Ok(out)
    }
}

/// Distance in feature space, `sqrt(K[i][i] + K[j][j] - 2 K[i][j])`.
pub fn feature_distance(kernel: &KernelMatrix, i: usize, j: usize) -> Result<f64> {
    let sq = kernel.get(i, i) + kernel.get(j, j) - 2.0 * kernel.get(i, j);
    if sq < -PSD_TOL {
        return Err(Error::NegativeSquaredDistance {
            first: i,
            second: j,
            value: sq,
        });
    }
    Ok(sq.max(0.0).sqrt())
}

/// Complete-linkage agglomerative clustering on the distances induced by the
/// kernel.
///
/// Cluster distances are kept in a matrix updated after each merge with
/// `d(new, r) = max(d(p, r), d(q, r))`. Among equally distant pairs the one
/// with the smallest `(left id, right id)` merges first.
pub fn complete_linkage(kernel: &KernelMatrix) -> Result<Dendrogram> {
    let n = kernel.n();
    kernel.check_psd()?;
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = feature_distance(kernel, i, j)?;
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    let mut id: Vec<usize> = (0..n).collect();
    let mut active: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for step in 0..n.saturating_sub(1) {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for (x, &p) in active.iter().enumerate() {
            for &q in &active[x + 1..] {
                let dist = d[p * n + q];
                let (lo, hi) = (id[p].min(id[q]), id[p].max(id[q]));
                let better = match best {
                    None => true,
                    Some((bd, bl, bh, _, _)) => dist < bd || (dist == bd && (lo, hi) < (bl, bh)),
                };
                if better {
                    best = Some((dist, lo, hi, p, q));
                }
            }
        }
        let (height, left, right, p, q) = best.expect("two active clusters");
        for &r in &active {
            if r != p && r != q {
                let v = d[p * n + r].max(d[q * n + r]);
                d[p * n + r] = v;
                d[r * n + p] = v;
            }
        }
        active.retain(|&r| r != q);
        id[p] = n + step;
        merges.push(Merge {
            left,
            right,
            height,
            id: n + step,
        });
    }
    Ok(Dendrogram { n, merges })
}
