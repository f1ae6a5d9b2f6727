//! Dense symmetric linear algebra on row-major `n x n` buffers.

/// Eigenvalues in ascending order, with matching eigenvectors when requested.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// Row `k` of this row-major `n x n` buffer is the eigenvector of
    /// `values[k]`.
    pub vectors: Option<Vec<f64>>,
    pub sweeps: usize,
}

impl SymmetricEigen {
    pub fn vector(&self, k: usize) -> Option<&[f64]> {
        let n = self.values.len();
        self.vectors.as_ref().map(|v| &v[k * n..(k + 1) * n])
    }
}

/// Relative reduction of the off-diagonal Frobenius norm that ends the
/// iteration.
pub const JACOBI_TOLERANCE: f64 = 1e-10;
const MAX_SWEEPS: usize = 100;

fn off_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            s += a[i * n + j] * a[i * n + j];
        }
    }
    (2.0 * s).sqrt()
}

/// Cyclic Jacobi eigendecomposition of the symmetric matrix `a`.
///
/// Sweeps over all off-diagonal positions, annihilating each with a plane
/// rotation, until the off-diagonal norm drops below [`JACOBI_TOLERANCE`]
/// times its initial value. Only the upper triangle is trusted as input;
/// the lower one is overwritten with its mirror.
pub fn jacobi_eigen(a: &[f64], n: usize, want_vectors: bool) -> SymmetricEigen {
    assert_eq!(a.len(), n * n, "buffer is not n x n");
    let mut m = a.to_vec();
    for i in 0..n {
        for j in (i + 1)..n {
            m[j * n + i] = m[i * n + j];
        }
    }
    // rows of `v` are the accumulated eigenvectors
    let mut v = want_vectors.then(|| {
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            v[i * n + i] = 1.0;
        }
        v
    });

    let initial = off_norm(&m, n);
    let target = JACOBI_TOLERANCE * initial;
    let mut sweeps = 0;
    if initial > 0.0 {
        while sweeps < MAX_SWEEPS && off_norm(&m, n) > target {
            sweeps += 1;
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = m[p * n + q];
                    if apq.abs() < f64::MIN_POSITIVE {
                        continue;
                    }
                    rotate(&mut m, v.as_deref_mut(), n, p, q, apq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| m[x * n + x].total_cmp(&m[y * n + y]));
    let values = order.iter().map(|&k| m[k * n + k]).collect();
    let vectors = v.map(|v| {
        let mut sorted = Vec::with_capacity(n * n);
        for &k in &order {
            sorted.extend_from_slice(&v[k * n..(k + 1) * n]);
        }
        sorted
    });
    SymmetricEigen {
        values,
        vectors,
        sweeps,
    }
}

fn rotate(m: &mut [f64], v: Option<&mut [f64]>, n: usize, p: usize, q: usize, apq: f64) {
    let app = m[p * n + p];
    let aqq = m[q * n + q];
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = m[p * n + k];
        let akq = m[q * n + k];
        let new_p = c * akp - s * akq;
        let new_q = s * akp + c * akq;
        m[p * n + k] = new_p;
        m[q * n + k] = new_q;
        m[k * n + p] = new_p;
        m[k * n + q] = new_q;
    }
    m[p * n + p] = app - t * apq;
    m[q * n + q] = aqq + t * apq;
    m[p * n + q] = 0.0;
    m[q * n + p] = 0.0;

    if let Some(v) = v {
        let (head, tail) = v.split_at_mut(q * n);
        let vp = &mut head[p * n..(p + 1) * n];
        let vq = &mut tail[..n];
        for (x, y) in vp.iter_mut().zip(vq.iter_mut()) {
            let (a, b) = (*x, *y);
            *x = c * a - s * b;
            *y = s * a + c * b;
        }
    }
}

/// Outer-product Cholesky with diagonal pivoting on `a + shift * I`.
///
/// Returns `true` when every pivot stays positive, i.e. the shifted matrix is
/// positive definite and the smallest eigenvalue of `a` exceeds `-shift`.
pub fn pivoted_cholesky_succeeds(a: &[f64], n: usize, shift: f64) -> bool {
    assert_eq!(a.len(), n * n, "buffer is not n x n");
    let mut w = a.to_vec();
    for i in 0..n {
        w[i * n + i] += shift;
    }
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (best, pivot) = (k..n)
            .map(|r| (r, w[perm[r] * n + perm[r]]))
            .fold((k, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        if pivot.is_nan() || pivot <= 0.0 {
            return false;
        }
        perm.swap(k, best);
        let pk = perm[k];
        let root = pivot.sqrt();
        // column k of the factor, over the remaining rows
        let col: Vec<f64> = perm[k + 1..].iter().map(|&r| w[r * n + pk] / root).collect();
        for (x, &r) in perm[k + 1..].iter().enumerate() {
            for (y, &c) in perm[k + 1..].iter().enumerate().skip(x) {
                let upd = w[r * n + c] - col[x] * col[y];
                w[r * n + c] = upd;
                w[c * n + r] = upd;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn random_symmetric(n: usize, seed: u64) -> Vec<f64> {
        use rand::Rng;
        let mut rng = crate::rng::seeded(seed);
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let x: f64 = rng.random_range(-1.0..1.0);
                a[i * n + j] = x;
                a[j * n + i] = x;
            }
        }
        a
    }

    #[test]
    fn two_by_two() {
        let e = jacobi_eigen(&[2.0, 1.0, 1.0, 2.0], 2, false);
        assert_abs_diff_eq!(e.values[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 3.0, epsilon = 1e-14);
    }

    #[test]
    fn identity_and_diagonal_need_no_sweeps() {
        let e = jacobi_eigen(&[3.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 2.0], 3, true);
        assert_eq!(e.values, vec![-1.0, 2.0, 3.0]);
        assert_eq!(e.sweeps, 0);
        assert_eq!(e.vector(0).unwrap(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn reconstructs_random_matrix() {
        let n = 12;
        let a = random_symmetric(n, 4);
        let e = jacobi_eigen(&a, n, true);
        let v = e.vectors.as_ref().unwrap();
        for i in 0..n {
            for j in 0..n {
                let r: f64 = (0..n).map(|k| v[k * n + i] * e.values[k] * v[k * n + j]).sum();
                assert_abs_diff_eq!(r, a[i * n + j], epsilon = 1e-10);
                let o: f64 = (0..n).map(|k| v[i * n + k] * v[j * n + k]).sum();
                assert_abs_diff_eq!(o, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-12);
            }
        }
        for w in e.values.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn matches_nalgebra_spectrum() {
        let n = 20;
        let a = random_symmetric(n, 9);
        let ours = jacobi_eigen(&a, n, false).values;
        let mut theirs: Vec<f64> = nalgebra::DMatrix::from_row_slice(n, n, &a)
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        theirs.sort_by(f64::total_cmp);
        for (x, y) in ours.iter().zip(&theirs) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-10);
        }
    }

    #[test]
    fn cholesky_detects_indefinite() {
        assert!(pivoted_cholesky_succeeds(&[2.0, 1.0, 1.0, 2.0], 2, 0.0));
        assert!(!pivoted_cholesky_succeeds(&[1.0, 2.0, 2.0, 1.0], 2, 0.0));
        // singular PSD passes only with a shift
        assert!(!pivoted_cholesky_succeeds(&[1.0, 1.0, 1.0, 1.0], 2, 0.0));
        assert!(pivoted_cholesky_succeeds(&[1.0, 1.0, 1.0, 1.0], 2, 1e-9));
        // zero diagonal pivot hidden behind a large one
        assert!(!pivoted_cholesky_succeeds(&[4.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0], 3, 0.0));
    }
}
