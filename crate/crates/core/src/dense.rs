//! Small dense complex matrices: storage plus an LU solve with partial
//! pivoting. Used for port-matrix inversion and the dense direct-solve
//! reference path on small meshes.

use alloc::vec;
use alloc::vec::Vec;

use crate::C64;
use num_traits::Zero;

/// Row-major dense complex matrix.
#[derive(Debug, Clone)]
pub struct DenseC {
    pub n_rows: usize,
    pub n_cols: usize,
    pub data: Vec<C64>,
}

impl DenseC {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        DenseC {
            n_rows,
            n_cols,
            data: vec![C64::zero(); n_rows * n_cols],
        }
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.n_cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.n_cols + c] = v;
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.n_cols);
        let mut y = vec![C64::zero(); self.n_rows];
        for r in 0..self.n_rows {
            let mut acc = C64::zero();
            for c in 0..self.n_cols {
                acc += self.at(r, c) * x[c];
            }
            y[r] = acc;
        }
        y
    }

    /// Solve A X = B in place of a factor copy; B has one column per RHS.
    /// Returns None when a pivot vanishes.
    pub fn lu_solve(&self, rhs: &[Vec<C64>]) -> Option<Vec<Vec<C64>>> {
        assert_eq!(self.n_rows, self.n_cols);
        let n = self.n_rows;
        let mut a = self.data.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            // partial pivot
            let mut best = k;
            let mut best_mag = a[piv[k] * n + k].norm();
            for r in k + 1..n {
                let m = a[piv[r] * n + k].norm();
                if m > best_mag {
                    best = r;
                    best_mag = m;
                }
            }
            if best_mag == 0.0 {
                return None;
            }
            piv.swap(k, best);
            let akk = a[piv[k] * n + k];
            for r in k + 1..n {
                let f = a[piv[r] * n + k] / akk;
                a[piv[r] * n + k] = f;
                for c in k + 1..n {
                    let v = a[piv[k] * n + c];
                    a[piv[r] * n + c] -= f * v;
                }
            }
        }
        let mut out = Vec::with_capacity(rhs.len());
        for b in rhs {
            assert_eq!(b.len(), n);
            let mut x: Vec<C64> = (0..n).map(|r| b[piv[r]]).collect();
            for k in 0..n {
                for r in k + 1..n {
                    let f = a[piv[r] * n + k];
                    let v = x[k];
                    x[r] -= f * v;
                }
            }
            for k in (0..n).rev() {
                for c in k + 1..n {
                    let v = x[c];
                    x[k] -= a[piv[k] * n + c] * v;
                }
                x[k] /= a[piv[k] * n + k];
            }
            out.push(x);
        }
        Some(out)
    }

    /// Inverse via LU; None when singular.
    pub fn inverse(&self) -> Option<DenseC> {
        let n = self.n_rows;
        let mut cols = Vec::with_capacity(n);
        for c in 0..n {
            let mut e = vec![C64::zero(); n];
            e[c] = C64::new(1.0, 0.0);
            cols.push(e);
        }
        let sol = self.lu_solve(&cols)?;
        let mut inv = DenseC::zeros(n, n);
        for c in 0..n {
            for r in 0..n {
                inv.set(r, c, sol[c][r]);
            }
        }
        Some(inv)
    }
}
