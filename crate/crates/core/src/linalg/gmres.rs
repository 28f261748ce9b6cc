use alloc::vec;
use alloc::vec::Vec;

use super::norm2;
use crate::operators::SparseMatrix;
use crate::{Error, Result, C64};

/// Incomplete LU factorization with zero fill, stored on the pattern of the
/// input matrix.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn factor(a: &SparseMatrix) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.cols(),
            });
        }
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::with_capacity(a.nnz() + n);
        let mut values = Vec::with_capacity(a.nnz() + n);
        let mut diag = vec![0; n];
        indptr.push(0);
        for i in 0..n {
            let mut has_diag = false;
            for (j, v) in a.row(i) {
                if j == i {
                    has_diag = true;
                } else if j > i && !has_diag {
                    // keep the diagonal slot even when it is structurally zero
                    diag[i] = indices.len();
                    indices.push(i);
                    values.push(C64::new(0.0, 0.0));
                    has_diag = true;
                }
                if j == i {
                    diag[i] = indices.len();
                }
                indices.push(j);
                values.push(v);
            }
            if !has_diag {
                diag[i] = indices.len();
                indices.push(i);
                values.push(C64::new(0.0, 0.0));
            }
            indptr.push(indices.len());
        }

        let scale = a.norm_inf().max(f64::MIN_POSITIVE);
        let tiny = 1e-12 * scale;
        let mut position = vec![usize::MAX; n];
        for i in 0..n {
            let (start, end) = (indptr[i], indptr[i + 1]);
            for k in start..end {
                position[indices[k]] = k;
            }
            for kk in start..end {
                let k = indices[kk];
                if k >= i {
                    break;
                }
                let lik = values[kk] / values[diag[k]];
                values[kk] = lik;
                for m in diag[k] + 1..indptr[k + 1] {
                    let j = indices[m];
                    let at = position[j];
                    if at != usize::MAX {
                        let u = values[m];
                        values[at] -= lik * u;
                    }
                }
            }
            if values[diag[i]].norm() < tiny {
                values[diag[i]] = C64::new(tiny, 0.0);
            }
            for k in start..end {
                position[indices[k]] = usize::MAX;
            }
        }
        Ok(Self {
            n,
            indptr,
            indices,
            values,
            diag,
        })
    }

    /// Solve `L U z = r`.
    pub fn apply(&self, r: &[C64]) -> Vec<C64> {
        let mut z = r.to_vec();
        for i in 0..self.n {
            let mut s = z[i];
            for k in self.indptr[i]..self.diag[i] {
                s -= self.values[k] * z[self.indices[k]];
            }
            z[i] = s;
        }
        for i in (0..self.n).rev() {
            let mut s = z[i];
            for k in self.diag[i] + 1..self.indptr[i + 1] {
                s -= self.values[k] * z[self.indices[k]];
            }
            z[i] = s / self.values[self.diag[i]];
        }
        z
    }
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub x: Vec<C64>,
    /// Final true residual relative to ‖b‖.
    pub relative_residual: f64,
    pub iterations: usize,
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Right-preconditioned restarted GMRES.
pub fn gmres(
    a: &SparseMatrix,
    b: &[C64],
    precond: &Ilu0,
    restart: usize,
    max_iter: usize,
    tol: f64,
) -> Result<GmresOutcome> {
    let n = a.rows();
    assert_eq!(b.len(), n);
    let restart = restart.max(1);
    let zero = C64::new(0.0, 0.0);
    let b_norm = norm2(b);
    let mut x = vec![zero; n];
    if b_norm == 0.0 {
        return Ok(GmresOutcome {
            x,
            relative_residual: 0.0,
            iterations: 0,
        });
    }
    let mut iterations = 0;
    let mut best = f64::INFINITY;
    loop {
        let ax = a.matvec(&x);
        let r: Vec<C64> = b.iter().zip(&ax).map(|(u, v)| u - v).collect();
        let beta = norm2(&r);
        let rel = beta / b_norm;
        if rel <= tol {
            return Ok(GmresOutcome {
                x,
                relative_residual: rel,
                iterations,
            });
        }
        // A growing true residual means the preconditioned basis has lost
        // orthogonality; further cycles only amplify the error.
        if iterations >= max_iter || !(rel < best) {
            return Err(Error::NotConverged {
                residual: rel.min(best),
            });
        }
        best = rel;

        let mut basis: Vec<Vec<C64>> = Vec::with_capacity(restart + 1);
        let mut zs: Vec<Vec<C64>> = Vec::with_capacity(restart);
        basis.push(r.iter().map(|v| v / beta).collect());
        let mut h = vec![vec![zero; restart]; restart + 1];
        let mut cs = vec![0.0f64; restart];
        let mut sn = vec![zero; restart];
        let mut g = vec![zero; restart + 1];
        g[0] = C64::new(beta, 0.0);
        let mut steps = 0;

        for j in 0..restart {
            let z = precond.apply(&basis[j]);
            let mut w = a.matvec(&z);
            zs.push(z);
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(v, &w);
                h[i][j] = hij;
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= hij * vk;
                }
            }
            let w_norm = norm2(&w);
            h[j + 1][j] = C64::new(w_norm, 0.0);

            for i in 0..j {
                let t = h[i][j] * cs[i] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i].conj() * h[i][j] + h[i + 1][j] * cs[i];
                h[i][j] = t;
            }
            let (a_, b_) = (h[j][j], h[j + 1][j]);
            let rho = libm::sqrt(a_.norm_sqr() + b_.norm_sqr());
            if a_.norm() == 0.0 {
                cs[j] = 0.0;
                sn[j] = C64::new(1.0, 0.0);
            } else {
                cs[j] = a_.norm() / rho;
                sn[j] = (a_ / a_.norm()) * b_.conj() / rho;
            }
            h[j][j] = h[j][j] * cs[j] + sn[j] * h[j + 1][j];
            h[j + 1][j] = zero;
            g[j + 1] = -sn[j].conj() * g[j];
            g[j] *= cs[j];

            steps = j + 1;
            iterations += 1;
            if g[j + 1].norm() / b_norm <= tol * 0.5 || iterations >= max_iter || w_norm == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / w_norm).collect());
        }

        let mut y = vec![zero; steps];
        for i in (0..steps).rev() {
            let mut s = g[i];
            for k in i + 1..steps {
                s -= h[i][k] * y[k];
            }
            y[i] = s / h[i][i];
        }
        for (yi, z) in y.iter().zip(&zs) {
            for (xk, zk) in x.iter_mut().zip(z) {
                *xk += yi * zk;
            }
        }
    }
}
