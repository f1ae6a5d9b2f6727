//! Kernel matrices: sparse Gram products, the `k3` combination and the
//! diagonal dominance correction.

use std::fmt;
use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::error::{Error, FeatureKind, Result};
use crate::features::SparseFeatureMatrix;
use crate::linalg::{jacobi_eigen, pivoted_cholesky_succeeds};

/// Absolute asymmetry tolerated before a matrix counts as non-symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Eigenvalues down to `-PSD_TOL` are treated as round-off.
pub const PSD_TOL: f64 = 1e-9;

/// Which construction produced a kernel matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSource {
    K1,
    K2,
    /// `mu1 * k1 + mu2 * k2`
    Combined { mu1: f64, mu2: f64 },
    /// Exact Kendall tau between full rankings.
    KendallTau,
    /// Loaded from a file or built by hand.
    External,
}

impl fmt::Display for KernelSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSource::K1 => f.write_str("k1"),
            KernelSource::K2 => f.write_str("k2"),
            KernelSource::Combined { .. } => f.write_str("k3"),
            KernelSource::KendallTau => f.write_str("tau"),
            KernelSource::External => f.write_str("external"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub source: KernelSource,
    pub weighted: bool,
    /// Total amount subtracted from the diagonal, if corrected.
    pub lambda_min: Option<f64>,
}

impl Provenance {
    pub fn new(source: KernelSource) -> Self {
        Provenance {
            source,
            weighted: false,
            lambda_min: None,
        }
    }

    /// `key=value` pairs for sidecar files.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let mut out = vec![("kernel".to_string(), self.source.to_string())];
        if let KernelSource::Combined { mu1, mu2 } = self.source {
            out.push(("mu1".into(), mu1.to_string()));
            out.push(("mu2".into(), mu2.to_string()));
        }
        out.push(("weighted".into(), self.weighted.to_string()));
        out.push(("dominance_corrected".into(), self.lambda_min.is_some().to_string()));
        if let Some(l) = self.lambda_min {
            out.push(("lambda_min".into(), format!("{l:.16e}")));
        }
        out
    }
}

/// Dense symmetric `n x n` kernel matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    n: usize,
    entries: Vec<f64>,
    pub provenance: Provenance,
}

impl KernelMatrix {
    pub fn new(n: usize, entries: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                left: n * n,
                right: entries.len(),
            });
        }
        Ok(KernelMatrix {
            n,
            entries,
            provenance,
        })
    }

    pub fn from_fn(n: usize, provenance: Provenance, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(f(i, j));
            }
        }
        KernelMatrix {
            n,
            entries,
            provenance,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Largest absolute entry-wise difference to `other`.
    pub fn max_abs_diff(&self, other: &KernelMatrix) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn check_symmetric(&self) -> Result<()> {
        let scale = self.entries.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let gap = (self.get(i, j) - self.get(j, i)).abs();
                if gap > SYMMETRY_TOL * scale {
                    return Err(Error::NonSymmetric { row: i, col: j, gap });
                }
            }
        }
        Ok(())
    }

    /// Symmetric with smallest eigenvalue above `-PSD_TOL`, checked by a
    /// pivoted Cholesky factorization of `K + PSD_TOL * I`.
    pub fn check_psd(&self) -> Result<()> {
        self.check_symmetric()?;
        if pivoted_cholesky_succeeds(&self.entries, self.n, PSD_TOL) {
            Ok(())
        } else {
            Err(Error::NotPsd { threshold: -PSD_TOL })
        }
    }

    /// Text format: a line with `n`, then `n` lines of `n` comma-separated
    /// values with 17 significant digits.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.n)?;
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate().filter(|(_, l)| match l {
            Ok(l) => !l.trim().is_empty(),
            Err(_) => true,
        });
        let (_, head) = lines.next().ok_or(Error::EmptyInput)?;
        let n: usize = head?.trim().parse().map_err(|_| Error::Parse {
            line: 1,
            reason: "first line must be the matrix size".into(),
        })?;
        let mut entries = Vec::with_capacity(n * n);
        let mut rows = 0;
        for (i, line) in lines {
            let line = line?;
            let before = entries.len();
            for field in line.split(',') {
                entries.push(field.trim().parse::<f64>().map_err(|_| Error::Parse {
                    line: i + 1,
                    reason: format!("not a number: {field:?}"),
                })?);
            }
            if entries.len() - before != n {
                return Err(Error::Parse {
                    line: i + 1,
                    reason: format!("expected {n} values"),
                });
            }
            rows += 1;
        }
        if rows != n {
            return Err(Error::DimensionMismatch { left: n, right: rows });
        }
        KernelMatrix::new(n, entries, Provenance::new(KernelSource::External))
    }
}

/// Which triplet kernel to build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    K1,
    K2,
    K3 { mu1: f64, mu2: f64 },
}

impl KernelSpec {
    /// Parses `k1`, `k2` or `k3`; `k3` takes the given weights.
    pub fn parse(name: &str, mu1: f64, mu2: f64) -> Result<Self> {
        match name.trim() {
            "k1" => Ok(KernelSpec::K1),
            "k2" => Ok(KernelSpec::K2),
            "k3" => Ok(KernelSpec::K3 { mu1, mu2 }),
            other => Err(Error::InvalidParameter(format!("unknown kernel {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::K1 => "k1",
            KernelSpec::K2 => "k2",
            KernelSpec::K3 { .. } => "k3",
        }
    }
}

/// Builds the requested kernel matrix from a store, optionally followed by
/// the diagonal dominance correction.
pub fn triplet_kernel(
    store: &crate::triplets::TripletStore,
    spec: KernelSpec,
    weighted: bool,
    dominance_fix: bool,
) -> Result<KernelMatrix> {
    use crate::features::{build_phi_k1, build_phi_k2};
    let k = match spec {
        KernelSpec::K1 => gram(&build_phi_k1(store, weighted)?),
        KernelSpec::K2 => gram(&build_phi_k2(store, weighted)?),
        KernelSpec::K3 { mu1, mu2 } => {
            if !(mu1 > 0.0 && mu2 > 0.0) {
                return Err(Error::NonPositiveWeight { mu1, mu2 });
            }
            let k1 = gram(&build_phi_k1(store, weighted)?);
            let k2 = gram(&build_phi_k2(store, weighted)?);
            combine(&k1, &k2, mu1, mu2)?
        }
    };
    if dominance_fix {
        reduce_diagonal_dominance(&k)
    } else {
        Ok(k)
    }
}

/// Number of feature blocks the Gram accumulation is split into. Fixed, so
/// the summation order never depends on the thread pool.
const GRAM_BLOCKS: usize = 4;

/// `Phi^T Phi` for a sparse feature matrix.
///
/// The columns are transposed into per-feature occupant lists; every feature
/// then adds the outer product of its occupants, so the cost is the sum of
/// squared occupancies. Features are split into [`GRAM_BLOCKS`] contiguous
/// blocks accumulated in parallel and merged in block order.
pub fn gram(features: &SparseFeatureMatrix) -> KernelMatrix {
    let n = features.n;
    let dim = features.dim;

    let mut row_start = vec![0usize; dim + 1];
    for c in &features.columns {
        for &f in &c.indices {
            row_start[f + 1] += 1;
        }
    }
    for f in 0..dim {
        row_start[f + 1] += row_start[f];
    }
    let nnz = row_start[dim];
    let mut occ_col = vec![0u32; nnz];
    let mut occ_val = vec![0f64; nnz];
    let mut fill = row_start.clone();
    for (col, c) in features.columns.iter().enumerate() {
        for (f, v) in c.iter() {
            occ_col[fill[f]] = col as u32;
            occ_val[fill[f]] = v;
            fill[f] += 1;
        }
    }

    // split so every block holds about the same number of occupants
    let mut bounds = vec![0usize];
    for b in 1..GRAM_BLOCKS {
        let goal = nnz * b / GRAM_BLOCKS;
        let f = row_start.partition_point(|&s| s < goal).min(dim);
        bounds.push(f.max(*bounds.last().unwrap()));
    }
    bounds.push(dim);

    let partials: Vec<Vec<f64>> = bounds
        .par_windows(2)
        .map(|w| {
            let mut acc = vec![0.0; n * n];
            for f in w[0]..w[1] {
                let (s, e) = (row_start[f], row_start[f + 1]);
                let cols = &occ_col[s..e];
                let vals = &occ_val[s..e];
                for x in 0..cols.len() {
                    let vx = vals[x];
                    let row = &mut acc[cols[x] as usize * n..(cols[x] as usize + 1) * n];
                    for y in x..cols.len() {
                        row[cols[y] as usize] += vx * vals[y];
                    }
                }
            }
            acc
        })
        .collect();

    let mut entries = vec![0.0; n * n];
    for part in &partials {
        for (e, p) in entries.iter_mut().zip(part) {
            *e += p;
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            entries[j * n + i] = entries[i * n + j];
        }
    }
    let source = match features.kind {
        FeatureKind::K1 => KernelSource::K1,
        FeatureKind::K2 => KernelSource::K2,
    };
    KernelMatrix {
        n,
        entries,
        provenance: Provenance {
            source,
            weighted: features.weighted,
            lambda_min: None,
        },
    }
}

/// `mu1 * k1 + mu2 * k2` with strictly positive weights.
pub fn combine(k1: &KernelMatrix, k2: &KernelMatrix, mu1: f64, mu2: f64) -> Result<KernelMatrix> {
    if !(mu1 > 0.0 && mu2 > 0.0 && mu1.is_finite() && mu2.is_finite()) {
        return Err(Error::NonPositiveWeight { mu1, mu2 });
    }
    if k1.n != k2.n {
        return Err(Error::DimensionMismatch {
            left: k1.n,
            right: k2.n,
        });
    }
    let entries = k1
        .entries
        .iter()
        .zip(&k2.entries)
        .map(|(a, b)| mu1 * a + mu2 * b)
        .collect();
    Ok(KernelMatrix {
        n: k1.n,
        entries,
        provenance: Provenance {
            source: KernelSource::Combined { mu1, mu2 },
            weighted: k1.provenance.weighted || k2.provenance.weighted,
            lambda_min: None,
        },
    })
}

/// Smallest eigenvalue via a full cyclic Jacobi decomposition.
pub fn smallest_eigenvalue(k: &KernelMatrix) -> Result<f64> {
    k.check_symmetric()?;
    if k.n == 0 {
        return Err(Error::InvalidParameter("empty kernel matrix".into()));
    }
    Ok(jacobi_eigen(&k.entries, k.n, false).values[0])
}

/// `K - lambda_min * I`: the largest diagonal shift that keeps `K` positive
/// semi-definite. Negative `lambda_min` within `-PSD_TOL` counts as zero.
pub fn reduce_diagonal_dominance(k: &KernelMatrix) -> Result<KernelMatrix> {
    let lambda = smallest_eigenvalue(k)?;
    if lambda < -PSD_TOL {
        return Err(Error::NotPsd { threshold: -PSD_TOL });
    }
    let lambda = lambda.max(0.0);
    let mut out = k.clone();
    for i in 0..k.n {
        out.entries[i * k.n + i] -= lambda;
    }
    out.provenance.lambda_min = Some(k.provenance.lambda_min.unwrap_or(0.0) + lambda);
    Ok(out)
}
