//! Sparse matrix support: CSR storage, products, and a complex-symmetric
//! LDL^T factorization with reverse Cuthill-McKee ordering.

use alloc::vec;
use alloc::vec::Vec;

use crate::C64;
use num_traits::Zero;

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct Csr<T> {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<u32>,
    pub values: Vec<T>,
}

impl<T: Copy + Zero + core::ops::AddAssign> Csr<T> {
    /// Build from triplets, summing duplicates. Explicit zeros are kept so
    /// the pattern depends only on the triplet structure.
    pub fn from_coo(nrows: usize, ncols: usize, mut entries: Vec<(u32, u32, T)>) -> Self {
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(entries.len());
        let mut values: Vec<T> = Vec::with_capacity(entries.len());
        let mut i = 0;
        while i < entries.len() {
            let (r, c, mut v) = entries[i];
            debug_assert!((r as usize) < nrows && (c as usize) < ncols);
            i += 1;
            while i < entries.len() && entries[i].0 == r && entries[i].1 == c {
                v += entries[i].2;
                i += 1;
            }
            indices.push(c);
            values.push(v);
            indptr[r as usize + 1] += 1;
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        Csr {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn transpose(&self) -> Self {
        let mut next = vec![0usize; self.ncols + 1];
        for &c in &self.indices {
            next[c as usize + 1] += 1;
        }
        for i in 0..self.ncols {
            next[i + 1] += next[i];
        }
        let indptr = next.clone();
        let mut cursor = next;
        let mut indices = vec![0u32; self.nnz()];
        let mut values = vec![T::zero(); self.nnz()];
        for r in 0..self.nrows {
            for p in self.indptr[r]..self.indptr[r + 1] {
                let c = self.indices[p] as usize;
                let dst = cursor[c];
                indices[dst] = r as u32;
                values[dst] = self.values[p];
                cursor[c] += 1;
            }
        }
        Csr {
            nrows: self.ncols,
            ncols: self.nrows,
            indptr,
            indices,
            values,
        }
    }
}

impl Csr<f64> {
    pub fn mul_f64(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let mut acc = 0.0;
            for p in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[p] * x[self.indices[p] as usize];
            }
            y[r] = acc;
        }
    }

    pub fn mul_c64(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let mut acc = C64::zero();
            for p in self.indptr[r]..self.indptr[r + 1] {
                acc += x[self.indices[p] as usize] * self.values[p];
            }
            y[r] = acc;
        }
    }

    /// y = A^T x without materializing the transpose.
    pub fn tr_mul_c64(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.nrows);
        debug_assert_eq!(y.len(), self.ncols);
        for v in y.iter_mut() {
            *v = C64::zero();
        }
        for r in 0..self.nrows {
            let xr = x[r];
            if xr == C64::zero() {
                continue;
            }
            for p in self.indptr[r]..self.indptr[r + 1] {
                y[self.indices[p] as usize] += xr * self.values[p];
            }
        }
    }

    pub fn tr_mul_f64(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.nrows);
        debug_assert_eq!(y.len(), self.ncols);
        for v in y.iter_mut() {
            *v = 0.0;
        }
        for r in 0..self.nrows {
            let xr = x[r];
            for p in self.indptr[r]..self.indptr[r + 1] {
                y[self.indices[p] as usize] += xr * self.values[p];
            }
        }
    }

    pub fn to_complex(&self) -> Csr<C64> {
        Csr {
            nrows: self.nrows,
            ncols: self.ncols,
            indptr: self.indptr.clone(),
            indices: self.indices.clone(),
            values: self.values.iter().map(|&v| C64::new(v, 0.0)).collect(),
        }
    }
}

impl Csr<C64> {
    pub fn mul(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let mut acc = C64::zero();
            for p in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[p] * x[self.indices[p] as usize];
            }
            y[r] = acc;
        }
    }
}

/// Gustavson row-wise sparse matrix product.
pub fn spgemm(a: &Csr<C64>, b: &Csr<C64>) -> Csr<C64> {
    assert_eq!(a.ncols, b.nrows);
    let n = b.ncols;
    let mut marker = vec![usize::MAX; n];
    let mut dense = vec![C64::zero(); n];
    let mut indptr = Vec::with_capacity(a.nrows + 1);
    indptr.push(0usize);
    let mut indices: Vec<u32> = Vec::new();
    let mut values: Vec<C64> = Vec::new();
    let mut row_cols: Vec<u32> = Vec::new();
    for r in 0..a.nrows {
        row_cols.clear();
        for pa in a.indptr[r]..a.indptr[r + 1] {
            let k = a.indices[pa] as usize;
            let va = a.values[pa];
            for pb in b.indptr[k]..b.indptr[k + 1] {
                let c = b.indices[pb] as usize;
                if marker[c] != r {
                    marker[c] = r;
                    dense[c] = C64::zero();
                    row_cols.push(c as u32);
                }
                dense[c] += va * b.values[pb];
            }
        }
        row_cols.sort_unstable();
        for &c in &row_cols {
            indices.push(c);
            values.push(dense[c as usize]);
        }
        indptr.push(indices.len());
    }
    Csr {
        nrows: a.nrows,
        ncols: n,
        indptr,
        indices,
        values,
    }
}

/// Reverse Cuthill-McKee ordering of a symmetric pattern. Returns perm such
/// that `perm[new] = old`.
pub fn rcm_order(n: usize, indptr: &[usize], indices: &[u32]) -> Vec<usize> {
    let degree = |i: usize| indptr[i + 1] - indptr[i];
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    loop {
        let mut start = None;
        for i in 0..n {
            if !visited[i] && start.map_or(true, |s| degree(i) < degree(s)) {
                start = Some(i);
            }
        }
        let Some(start) = start else { break };
        visited[start] = true;
        let mut queue = alloc::collections::VecDeque::new();
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            let mut nbrs: Vec<usize> = (indptr[u]..indptr[u + 1])
                .map(|p| indices[p] as usize)
                .filter(|&v| v != u && !visited[v])
                .collect();
            nbrs.sort_unstable_by_key(|&v| (degree(v), v));
            for v in nbrs {
                visited[v] = true;
                queue.push_back(v);
            }
        }
    }
    order.reverse();
    order
}

/// Symbolic structure of an LDL^T factorization (up-looking, no numerical
/// pivoting) of an RCM-permuted complex-symmetric matrix. Reused across
/// numeric refactorizations with the same pattern.
#[derive(Debug, Clone)]
pub struct LdlSymbolic {
    pub n: usize,
    /// perm[new] = old
    pub perm: Vec<usize>,
    pub iperm: Vec<usize>,
    parent: Vec<i64>,
    lp: Vec<usize>,
    // Upper triangle (by permuted column) referencing source CSR positions.
    up_indptr: Vec<usize>,
    up_rows: Vec<u32>,
    up_src: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct LdlNumeric {
    li: Vec<u32>,
    lx: Vec<C64>,
    d: Vec<C64>,
}

/// Numerically singular pivot encountered during factorization.
#[derive(Debug, Clone, Copy)]
pub struct ZeroPivot {
    pub index: usize,
    pub magnitude: f64,
}

impl LdlSymbolic {
    /// Analyze a symmetric CSR matrix (full storage).
    pub fn analyze(a: &Csr<C64>) -> Self {
        let n = a.nrows;
        assert_eq!(a.nrows, a.ncols);
        let perm = rcm_order(n, &a.indptr, &a.indices);
        let mut iperm = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }
        // Upper triangle of the permuted matrix, column compressed.
        let mut counts = vec![0usize; n + 1];
        for old_r in 0..n {
            for p in a.indptr[old_r]..a.indptr[old_r + 1] {
                let old_c = a.indices[p] as usize;
                if iperm[old_r] <= iperm[old_c] {
                    counts[iperm[old_c] + 1] += 1;
                }
            }
        }
        for k in 0..n {
            counts[k + 1] += counts[k];
        }
        let up_indptr = counts.clone();
        let mut cursor = counts;
        let nnz_up = up_indptr[n];
        let mut up_rows = vec![0u32; nnz_up];
        let mut up_src = vec![0usize; nnz_up];
        for old_r in 0..n {
            for p in a.indptr[old_r]..a.indptr[old_r + 1] {
                let old_c = a.indices[p] as usize;
                let (i, k) = (iperm[old_r], iperm[old_c]);
                if i <= k {
                    let dst = cursor[k];
                    up_rows[dst] = i as u32;
                    up_src[dst] = p;
                    cursor[k] += 1;
                }
            }
        }
        // rows within a column need not be sorted for the elimination walk,
        // but sorted order keeps the factorization deterministic.
        for k in 0..n {
            let lo = up_indptr[k];
            let hi = up_indptr[k + 1];
            let mut pairs: Vec<(u32, usize)> = (lo..hi).map(|p| (up_rows[p], up_src[p])).collect();
            pairs.sort_unstable();
            for (off, (r, s)) in pairs.into_iter().enumerate() {
                up_rows[lo + off] = r;
                up_src[lo + off] = s;
            }
        }
        // Elimination tree and column counts in one pass.
        let mut parent = vec![-1i64; n];
        let mut flag = vec![usize::MAX; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            flag[k] = k;
            for p in up_indptr[k]..up_indptr[k + 1] {
                let mut i = up_rows[p] as usize;
                while i < k && flag[i] != k {
                    if parent[i] == -1 {
                        parent[i] = k as i64;
                    }
                    lnz[i] += 1;
                    flag[i] = k;
                    i = parent[i] as usize;
                }
            }
        }
        let mut lp = vec![0usize; n + 1];
        for k in 0..n {
            lp[k + 1] = lp[k] + lnz[k];
        }
        LdlSymbolic {
            n,
            perm,
            iperm,
            parent,
            lp,
            up_indptr,
            up_rows,
            up_src,
        }
    }

    /// Numeric factorization; `a` must have the pattern that was analyzed.
    pub fn factor(&self, a: &Csr<C64>) -> Result<LdlNumeric, ZeroPivot> {
        let n = self.n;
        let mut li = vec![0u32; self.lp[n]];
        let mut lx = vec![C64::zero(); self.lp[n]];
        let mut d = vec![C64::zero(); n];
        let mut y = vec![C64::zero(); n];
        let mut pattern = vec![0usize; n];
        let mut flag = vec![usize::MAX; n];
        let mut lnz = vec![0usize; n];
        let amax = a.values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        let tiny = amax * 1e-14;

        for k in 0..n {
            let mut top = n;
            flag[k] = k;
            y[k] = C64::zero();
            for p in self.up_indptr[k]..self.up_indptr[k + 1] {
                let entry_row = self.up_rows[p] as usize;
                y[entry_row] += a.values[self.up_src[p]];
                let mut len = 0usize;
                let mut i = entry_row;
                while flag[i] != k {
                    pattern[len] = i;
                    len += 1;
                    flag[i] = k;
                    i = self.parent[i] as usize;
                }
                while len > 0 {
                    len -= 1;
                    top -= 1;
                    pattern[top] = pattern[len];
                }
            }
            d[k] = y[k];
            y[k] = C64::zero();
            for t in top..n {
                let i = pattern[t];
                let yi = y[i];
                y[i] = C64::zero();
                let p2 = self.lp[i] + lnz[i];
                for p in self.lp[i]..p2 {
                    y[li[p] as usize] -= lx[p] * yi;
                }
                let lki = yi / d[i];
                d[k] -= lki * yi;
                li[p2] = k as u32;
                lx[p2] = lki;
                lnz[i] += 1;
            }
            if d[k].norm() <= tiny {
                return Err(ZeroPivot {
                    index: self.perm[k],
                    magnitude: d[k].norm(),
                });
            }
        }
        Ok(LdlNumeric { li, lx, d })
    }

    /// Solve A x = b via the factorization.
    pub fn solve(&self, num: &LdlNumeric, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut x = vec![C64::zero(); n];
        for k in 0..n {
            x[k] = b[self.perm[k]];
        }
        for j in 0..n {
            let xj = x[j];
            for p in self.lp[j]..self.lp[j + 1] {
                x[num.li[p] as usize] -= num.lx[p] * xj;
            }
        }
        for j in 0..n {
            x[j] /= num.d[j];
        }
        for j in (0..n).rev() {
            let mut acc = x[j];
            for p in self.lp[j]..self.lp[j + 1] {
                acc -= num.lx[p] * x[num.li[p] as usize];
            }
            x[j] = acc;
        }
        let mut out = vec![C64::zero(); n];
        for k in 0..n {
            out[self.perm[k]] = x[k];
        }
        out
    }

    /// Factor fill-in, for diagnostics.
    pub fn l_nnz(&self) -> usize {
        self.lp[self.n]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::XorShift64;
    use alloc::vec::Vec;

    fn random_sym_csr(n: usize, rng: &mut XorShift64) -> Csr<C64> {
        // diagonally dominant complex symmetric matrix with random couplings
        let mut entries: Vec<(u32, u32, C64)> = Vec::new();
        for i in 0..n {
            entries.push((i as u32, i as u32, C64::new(4.0 + rng.next_f64(), 1.0)));
            for _ in 0..3 {
                let j = (rng.next_u64() as usize) % n;
                if j == i {
                    continue;
                }
                let v = C64::new(0.3 * rng.next_sym(), 0.2 * rng.next_sym());
                entries.push((i as u32, j as u32, v));
                entries.push((j as u32, i as u32, v));
            }
        }
        Csr::from_coo(n, n, entries)
    }

    #[test]
    fn from_coo_sums_duplicates() {
        let m = Csr::from_coo(
            2,
            2,
            alloc::vec![(0u32, 0u32, 1.0f64), (0, 0, 2.0), (1, 0, 5.0)],
        );
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.values[0], 3.0);
        assert_eq!(m.indptr, alloc::vec![0, 1, 2]);
    }

    #[test]
    fn transpose_of_symmetric_spmv_agrees() {
        let mut rng = XorShift64::new(7);
        let a = random_sym_csr(40, &mut rng);
        let x: Vec<C64> = (0..40)
            .map(|_| C64::new(rng.next_sym(), rng.next_sym()))
            .collect();
        let mut y1 = alloc::vec![C64::zero(); 40];
        a.mul(&x, &mut y1);
        let at = a.transpose();
        let mut y2 = alloc::vec![C64::zero(); 40];
        at.mul(&x, &mut y2);
        for i in 0..40 {
            assert!((y1[i] - y2[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn spgemm_matches_dense() {
        let mut rng = XorShift64::new(13);
        let a = random_sym_csr(20, &mut rng);
        let b = random_sym_csr(20, &mut rng);
        let c = spgemm(&a, &b);
        let dense = |m: &Csr<C64>| {
            let mut out = alloc::vec![C64::zero(); 400];
            for r in 0..20 {
                for p in m.indptr[r]..m.indptr[r + 1] {
                    out[r * 20 + m.indices[p] as usize] += m.values[p];
                }
            }
            out
        };
        let (da, db, dc) = (dense(&a), dense(&b), dense(&c));
        for i in 0..20 {
            for j in 0..20 {
                let mut acc = C64::zero();
                for k in 0..20 {
                    acc += da[i * 20 + k] * db[k * 20 + j];
                }
                assert!((acc - dc[i * 20 + j]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn ldl_roundtrip() {
        let mut rng = XorShift64::new(99);
        for n in [1usize, 2, 5, 30, 120] {
            let a = random_sym_csr(n, &mut rng);
            let sym = LdlSymbolic::analyze(&a);
            let num = sym.factor(&a).expect("factorization");
            let x: Vec<C64> = (0..n)
                .map(|_| C64::new(rng.next_sym(), rng.next_sym()))
                .collect();
            let mut b = alloc::vec![C64::zero(); n];
            a.mul(&x, &mut b);
            let xr = sym.solve(&num, &b);
            let err: f64 = x
                .iter()
                .zip(&xr)
                .map(|(u, v)| (u - v).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-10, "n={n} err={err}");
        }
    }

    #[test]
    fn ldl_reports_singular() {
        let a = Csr::from_coo(
            2,
            2,
            alloc::vec![
                (0u32, 0u32, C64::new(1.0, 0.0)),
                (0, 1, C64::new(1.0, 0.0)),
                (1, 0, C64::new(1.0, 0.0)),
                (1, 1, C64::new(1.0, 0.0)),
            ],
        );
        let sym = LdlSymbolic::analyze(&a);
        assert!(sym.factor(&a).is_err());
    }

    #[test]
    fn rcm_is_permutation() {
        let mut rng = XorShift64::new(3);
        let a = random_sym_csr(50, &mut rng);
        let p = rcm_order(50, &a.indptr, &a.indices);
        let mut seen = alloc::vec![false; 50];
        for &i in &p {
            assert!(!seen[i]);
            seen[i] = true;
        }
    }
}
