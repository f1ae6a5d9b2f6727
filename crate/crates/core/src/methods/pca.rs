use std::io::Write;

use crate::error::{Error, Result};
use crate::kernels::KernelMatrix;
use crate::linalg::jacobi_eigen;

#[derive(Debug, Clone, PartialEq)]
pub struct PcaProjection {
    /// `coordinates[i][c]`: object `i` on component `c`.
    pub coordinates: Vec<Vec<f64>>,
    /// Leading eigenvalues of the centered kernel, largest first.
    pub eigenvalues: Vec<f64>,
}

impl PcaProjection {
    /// `index,c1,...,cp` lines.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        for (i, row) in self.coordinates.iter().enumerate() {
            write!(w, "{i}")?;
            for x in row {
                write!(w, ",{x:.16e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// `H K H` with `H = I - 11^T / n`.
pub fn center_kernel(kernel: &KernelMatrix) -> Vec<f64> {
    let n = kernel.n();
    let nf = n as f64;
    let row_mean: Vec<f64> = (0..n).map(|i| kernel.row(i).iter().sum::<f64>() / nf).collect();
    let grand = row_mean.iter().sum::<f64>() / nf;
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = kernel.get(i, j) - row_mean[i] - row_mean[j] + grand;
        }
    }
    out
}

/// Kernel PCA: projections onto the top `p` eigenvectors of the centered
/// kernel, each scaled by the square root of its eigenvalue. Every
/// eigenvector's first clearly non-zero entry is made positive so the output
/// is reproducible.
pub fn kernel_pca(kernel: &KernelMatrix, p: usize) -> Result<PcaProjection> {
    let n = kernel.n();
    if p == 0 || p > n {
        return Err(Error::InvalidParameter(format!("p = {p} must lie in 1..={n}")));
    }
    kernel.check_psd()?;
    let centered = center_kernel(kernel);
    let eig = jacobi_eigen(&centered, n, true);
    let mut coordinates = vec![vec![0.0; p]; n];
    let mut eigenvalues = Vec::with_capacity(p);
    for c in 0..p {
        let k = n - 1 - c;
        let lambda = eig.values[k].max(0.0);
        let v = eig.vector(k).expect("vectors requested");
        let sign = v.iter().find(|x| x.abs() > 1e-12).map_or(1.0, |x| x.signum());
        let scale = sign * lambda.sqrt();
        for (i, row) in coordinates.iter_mut().enumerate() {
            row[c] = v[i] * scale;
        }
        eigenvalues.push(lambda);
    }
    Ok(PcaProjection {
        coordinates,
        eigenvalues,
    })
}
