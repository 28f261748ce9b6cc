use alloc::vec;
use alloc::vec::Vec;

use crate::operators::SparseMatrix;
use crate::{Error, Result, C64};

/// LU factorization with partial pivoting of a banded matrix, after an
/// optional symmetric reordering that narrows the band.
///
/// Row `i` is stored contiguously over columns `i - kl ..= i + kl + ku`;
/// the extra `kl` columns on the right hold fill from row interchanges.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<C64>,
    pivots: Vec<usize>,
    perm: Vec<usize>,
}

impl BandedLu {
    /// Factor `A − shift·I` after reordering by `perm` (new index `k` takes
    /// old index `perm[k]`).
    pub fn factor(a: &SparseMatrix, perm: &[usize], shift: C64) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.cols(),
            });
        }
        if perm.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: perm.len(),
            });
        }
        let permuted = a.permute(perm);
        let (kl, ku) = permuted.bandwidth();
        let width = 2 * kl + ku + 1;
        let mut lu = Self {
            n,
            kl,
            ku,
            width,
            data: vec![C64::new(0.0, 0.0); n * width],
            pivots: vec![0; n],
            perm: perm.to_vec(),
        };
        for (i, j, v) in permuted.triplets() {
            let at = lu.offset(i, j);
            lu.data[at] = v;
        }
        for i in 0..n {
            let at = lu.offset(i, i);
            lu.data[at] -= shift;
        }
        lu.decompose()?;
        Ok(lu)
    }

    pub fn bandwidth(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        i * self.width + self.kl + j - i
    }

    fn decompose(&mut self) -> Result<()> {
        let n = self.n;
        let (kl, w) = (self.kl, self.width);
        let reach = self.kl + self.ku;
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + reach).min(n - 1);

            let mut p = k;
            let mut best = self.data[self.offset(k, k)].norm();
            for i in k + 1..=last_row {
                let v = self.data[self.offset(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(Error::Singular(k));
            }
            self.pivots[k] = p;
            if p != k {
                for j in k..=last_col {
                    let (x, y) = (self.offset(k, j), self.offset(p, j));
                    self.data.swap(x, y);
                }
            }

            let pivot = self.data[self.offset(k, k)];
            let inv_pivot = pivot.inv();
            let base_k = k * w + kl - k;
            for i in k + 1..=last_row {
                let base_i = i * w + kl - i;
                let lik = self.data[base_i + k] * inv_pivot;
                self.data[base_i + k] = lik;
                if lik == C64::new(0.0, 0.0) {
                    continue;
                }
                let (head, tail) = self.data.split_at_mut(i * w);
                let src = &head[base_k + k + 1..=base_k + last_col];
                let dst = &mut tail[kl + k + 1 - i..=kl + last_col - i];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d -= lik * s;
                }
            }
        }
        Ok(())
    }

    /// Solve `(A − shift·I) x = b` in the original ordering.
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let reach = self.kl + self.ku;
        let mut y: Vec<C64> = self.perm.iter().map(|&old| b[old]).collect();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                y.swap(k, p);
            }
            let yk = y[k];
            if yk == C64::new(0.0, 0.0) {
                continue;
            }
            for i in k + 1..=(k + self.kl).min(n - 1) {
                y[i] -= self.data[self.offset(i, k)] * yk;
            }
        }
        for k in (0..n).rev() {
            let mut s = y[k];
            let base = self.offset(k, k);
            for j in k + 1..=(k + reach).min(n - 1) {
                s -= self.data[base + j - k] * y[j];
            }
            y[k] = s / self.data[base];
        }
        let mut x = vec![C64::new(0.0, 0.0); n];
        for (k, &old) in self.perm.iter().enumerate() {
            x[old] = y[k];
        }
        x
    }
}
