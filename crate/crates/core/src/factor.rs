//! Sparse direct factorizations for the local subdomain solves.
//!
//! Both factorizations first apply a nested-dissection ordering of the
//! symmetrized pattern. Cholesky is the up-looking row algorithm driven by
//! the elimination tree; LU is the left-looking Gilbert–Peierls algorithm
//! with partial pivoting.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::math;
use crate::ordering::nested_dissection;
use crate::sparse::CsrMatrix;

/// What the caller knows about the matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverHint {
    Spd,
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorKind {
    Cholesky,
    Lu,
}

/// A reusable factorization of a square sparse matrix.
#[derive(Debug, Clone)]
pub struct Factorization {
    n: usize,
    perm: Vec<usize>,
    inner: Inner,
}

#[derive(Debug, Clone)]
enum Inner {
    Cholesky(Cholesky),
    Lu(Lu),
}

impl Factorization {
    /// Factors `a`. With [`SolverHint::Spd`] a Cholesky factorization is
    /// attempted first and LU is used when a pivot fails or `a` is not
    /// symmetric.
    pub fn new(a: &CsrMatrix, hint: SolverHint) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch { expected: a.nrows(), found: a.ncols() });
        }
        let n = a.nrows();
        let perm = nested_dissection(&Graph::from_matrix(a));
        let pa = a.permute_symmetric(&perm);
        if hint == SolverHint::Spd && a.is_symmetric(1e-14) {
            if let Ok(c) = Cholesky::factor(&pa) {
                return Ok(Self { n, perm, inner: Inner::Cholesky(c) });
            }
        }
        let lu = Lu::factor(&pa)?;
        Ok(Self { n, perm, inner: Inner::Lu(lu) })
    }

    pub fn kind(&self) -> FactorKind {
        match self.inner {
            Inner::Cholesky(_) => FactorKind::Cholesky,
            Inner::Lu(_) => FactorKind::Lu,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Nonzeros held by the factors.
    pub fn factor_nnz(&self) -> usize {
        match &self.inner {
            Inner::Cholesky(c) => c.li.len(),
            Inner::Lu(l) => l.li.len() + l.ui.len(),
        }
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: b.len() });
        }
        let mut work: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        match &self.inner {
            Inner::Cholesky(c) => c.solve_in_place(&mut work),
            Inner::Lu(l) => l.solve_in_place(&mut work),
        }
        let mut x = vec![0.0; self.n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = work[k];
        }
        Ok(x)
    }
}

/// Solves `A x = b` with a fresh factorization.
pub fn factor_solve(a: &CsrMatrix, b: &[f64], hint: SolverHint) -> Result<Vec<f64>> {
    Factorization::new(a, hint)?.solve(b)
}

// ---------------------------------------------------------------------------
// Cholesky

#[derive(Debug, Clone)]
struct Cholesky {
    // column-compressed L, diagonal first in each column
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
}

/// Elimination tree of the lower triangle of a symmetric matrix.
fn etree(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let mut parent = vec![usize::MAX; n];
    let mut ancestor = vec![usize::MAX; n];
    for k in 0..n {
        for &j in a.row(k).0 {
            if j >= k {
                break;
            }
            let mut i = j;
            while i != usize::MAX && i < k {
                let next = ancestor[i];
                ancestor[i] = k;
                if next == usize::MAX {
                    parent[i] = k;
                }
                i = next;
            }
        }
    }
    parent
}

/// Nonzero pattern of row `k` of L, written to `s[top..]` in topological order.
fn ereach(a: &CsrMatrix, k: usize, parent: &[usize], s: &mut [usize], mark: &mut [usize]) -> usize {
    let n = a.nrows();
    let mut top = n;
    let stamp = k + 1;
    mark[k] = stamp;
    for &j in a.row(k).0 {
        if j >= k {
            break;
        }
        let mut len = 0;
        let mut i = j;
        while mark[i] != stamp {
            s[len] = i;
            len += 1;
            mark[i] = stamp;
            i = parent[i];
        }
        while len > 0 {
            top -= 1;
            len -= 1;
            s[top] = s[len];
        }
    }
    top
}

impl Cholesky {
    fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        let parent = etree(a);
        let mut s = vec![0usize; n];
        let mut mark = vec![0usize; n];

        // column counts from the row patterns
        let mut counts = vec![1usize; n];
        for k in 0..n {
            let top = ereach(a, k, &parent, &mut s, &mut mark);
            for &i in &s[top..] {
                counts[i] += 1;
            }
        }
        let mut lp = vec![0usize; n + 1];
        for j in 0..n {
            lp[j + 1] = lp[j] + counts[j];
        }
        let nnz = lp[n];
        let mut li = vec![0usize; nnz];
        let mut lx = vec![0.0; nnz];
        let mut next: Vec<usize> = lp[..n].to_vec();
        let mut x = vec![0.0; n];
        mark.iter_mut().for_each(|m| *m = 0);

        for k in 0..n {
            let top = ereach(a, k, &parent, &mut s, &mut mark);
            let (cols, vals) = a.row(k);
            let mut akk = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                if j <= k {
                    x[j] += v;
                }
                if j == k {
                    akk = v;
                }
            }
            let mut d = x[k];
            x[k] = 0.0;
            for &i in &s[top..] {
                let lki = x[i] / lx[lp[i]];
                x[i] = 0.0;
                for p in (lp[i] + 1)..next[i] {
                    x[li[p]] -= lx[p] * lki;
                }
                d -= lki * lki;
                let p = next[i];
                next[i] += 1;
                li[p] = k;
                lx[p] = lki;
            }
            if !(d > 1e-14 * akk.abs()) || !d.is_finite() {
                return Err(Error::NotSpd);
            }
            let p = next[k];
            next[k] += 1;
            li[p] = k;
            lx[p] = math::sqrt(d);
        }
        Ok(Self { lp, li, lx })
    }

    fn solve_in_place(&self, x: &mut [f64]) {
        let n = x.len();
        for j in 0..n {
            let (lo, hi) = (self.lp[j], self.lp[j + 1]);
            x[j] /= self.lx[lo];
            let xj = x[j];
            for p in (lo + 1)..hi {
                x[self.li[p]] -= self.lx[p] * xj;
            }
        }
        for j in (0..n).rev() {
            let (lo, hi) = (self.lp[j], self.lp[j + 1]);
            let mut acc = x[j];
            for p in (lo + 1)..hi {
                acc -= self.lx[p] * x[self.li[p]];
            }
            x[j] = acc / self.lx[lo];
        }
    }
}

// ---------------------------------------------------------------------------
// LU

#[derive(Debug, Clone)]
struct Lu {
    // unit lower L (pivot order rows, diagonal first), upper U (diagonal last)
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
    up: Vec<usize>,
    ui: Vec<usize>,
    ux: Vec<f64>,
    pinv: Vec<usize>,
}

const UNSET: usize = usize::MAX;

impl Lu {
    /// `a` is given by rows; the algorithm walks columns, so it runs on the
    /// transpose's rows.
    fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        let at = a.transpose(); // row j of `at` = column j of `a`
        let tiny = 1e-14 * a.max_abs().max(f64::MIN_POSITIVE);
        let mut lp = vec![0usize; n + 1];
        let mut up = vec![0usize; n + 1];
        let mut li: Vec<usize> = Vec::with_capacity(4 * a.nnz() + n);
        let mut lx: Vec<f64> = Vec::with_capacity(4 * a.nnz() + n);
        let mut ui: Vec<usize> = Vec::with_capacity(4 * a.nnz() + n);
        let mut ux: Vec<f64> = Vec::with_capacity(4 * a.nnz() + n);
        let mut pinv = vec![UNSET; n];
        let mut x = vec![0.0; n];
        let mut xi = vec![0usize; 2 * n];
        let mut marked = vec![false; n];

        for k in 0..n {
            lp[k] = li.len();
            up[k] = ui.len();
            let (bcols, bvals) = at.row(k);
            let top = reach(n, &lp, &li, bcols, &pinv, &mut xi, &mut marked);
            for &i in &xi[top..n] {
                x[i] = 0.0;
            }
            for (&i, &v) in bcols.iter().zip(bvals) {
                x[i] = v;
            }
            for px in top..n {
                let j = xi[px];
                let jj = pinv[j];
                if jj == UNSET {
                    continue;
                }
                // L(:, jj) has unit diagonal stored first
                let xj = x[j];
                for p in (lp[jj] + 1)..lp[jj + 1] {
                    x[li[p]] -= lx[p] * xj;
                }
            }
            let mut ipiv = UNSET;
            let mut best = -1.0;
            for px in top..n {
                let i = xi[px];
                if pinv[i] == UNSET {
                    let t = x[i].abs();
                    if t > best {
                        best = t;
                        ipiv = i;
                    }
                } else {
                    ui.push(pinv[i]);
                    ux.push(x[i]);
                }
            }
            if ipiv == UNSET || best <= tiny || !best.is_finite() {
                return Err(Error::SingularMatrix);
            }
            if pinv[k] == UNSET && x[k].abs() >= best {
                ipiv = k;
            }
            let pivot = x[ipiv];
            ui.push(k);
            ux.push(pivot);
            pinv[ipiv] = k;
            li.push(ipiv);
            lx.push(1.0);
            for px in top..n {
                let i = xi[px];
                if pinv[i] == UNSET {
                    li.push(i);
                    lx.push(x[i] / pivot);
                }
                x[i] = 0.0;
            }
        }
        lp[n] = li.len();
        up[n] = ui.len();
        for r in li.iter_mut() {
            *r = pinv[*r];
        }
        Ok(Self { lp, li, lx, up, ui, ux, pinv })
    }

    fn solve_in_place(&self, b: &mut [f64]) {
        let n = b.len();
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[self.pinv[i]] = b[i];
        }
        for j in 0..n {
            let xj = x[j];
            for p in (self.lp[j] + 1)..self.lp[j + 1] {
                x[self.li[p]] -= self.lx[p] * xj;
            }
        }
        for j in (0..n).rev() {
            let hi = self.up[j + 1];
            x[j] /= self.ux[hi - 1];
            let xj = x[j];
            for p in self.up[j]..(hi - 1) {
                x[self.ui[p]] -= self.ux[p] * xj;
            }
        }
        b.copy_from_slice(&x);
    }
}

/// Nodes reachable from the pattern of `b` in the graph of the partial L,
/// returned in `xi[top..n]` in topological order.
fn reach(
    n: usize,
    lp: &[usize],
    li: &[usize],
    bcols: &[usize],
    pinv: &[usize],
    xi: &mut [usize],
    marked: &mut [bool],
) -> usize {
    let mut top = n;
    let (stack, pstack) = xi.split_at_mut(n);
    for &start in bcols {
        if marked[start] {
            continue;
        }
        // iterative DFS; stack lives in xi[0..], positions in pstack
        let mut head: isize = 0;
        stack[0] = start;
        while head >= 0 {
            let h = head as usize;
            let j = stack[h];
            let jj = pinv[j];
            if !marked[j] {
                marked[j] = true;
                pstack[h] = if jj == UNSET { 0 } else { lp[jj] };
            }
            let end = if jj == UNSET { 0 } else { lp[jj + 1] };
            let mut done = true;
            let mut p = pstack[h];
            while p < end {
                let i = li[p];
                if !marked[i] {
                    pstack[h] = p;
                    head += 1;
                    stack[head as usize] = i;
                    done = false;
                    break;
                }
                p += 1;
            }
            if done {
                head -= 1;
                top -= 1;
                stack[top] = j;
            }
        }
    }
    for &j in &stack[top..n] {
        marked[j] = false;
    }
    top
}
