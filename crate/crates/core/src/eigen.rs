//! Dense eigenvalue routines.
//!
//! Symmetric matrices use Householder tridiagonalization followed by the
//! implicit QL algorithm. General matrices are balanced, reduced to upper
//! Hessenberg form and handed to the shifted QR algorithm.

use alloc::vec;
use alloc::vec::Vec;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::math;

/// Relative symmetry tolerance accepted by [`sym_eigen`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Eigenvalues at or below this multiple of the largest one are treated as
/// non-positive.
pub const SPD_THRESHOLD: f64 = 1e-12;

/// Above this order [`spectral_radius`] switches to power iteration.
pub const FULL_EIGEN_LIMIT: usize = 2000;

/// Symmetric eigendecomposition `M = Q·diag(λ)·Qᵀ`.
///
/// Eigenvalues are returned in ascending order, eigenvectors as the columns
/// of `Q`.
pub fn sym_eigen(m: &DenseMatrix) -> Result<(DenseMatrix, Vec<f64>)> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
    }
    if !m.is_symmetric(SYMMETRY_TOL) {
        return Err(Error::NotSymmetric);
    }
    let n = m.nrows();
    if n == 0 {
        return Ok((DenseMatrix::zeros(0, 0), Vec::new()));
    }
    let mut v = m.symmetric_part();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e)?;
    Ok((v, d))
}

fn tred2(v: &mut DenseMatrix, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let f = d[i - 1];
            let mut g = math::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                let f = d[j];
                v[(j, i)] = f;
                let mut g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                for k in j..i {
                    v[(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    // accumulate transformations
    for i in 0..n - 1 {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

fn tql2(v: &mut DenseMatrix, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 100 {
                    return Err(Error::EigenNoConvergence);
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = math::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = math::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let h = v[(k, i + 1)];
                        v[(k, i + 1)] = s * v[(k, i)] + c * h;
                        v[(k, i)] = c * v[(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    // selection sort, ascending, columns follow
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for r in 0..n {
                let t = v[(r, i)];
                v[(r, i)] = v[(r, k)];
                v[(r, k)] = t;
            }
        }
    }
    Ok(())
}

/// Symmetric eigenvalues only, ascending.
pub fn sym_eigenvalues(m: &DenseMatrix) -> Result<Vec<f64>> {
    sym_eigen(m).map(|(_, d)| d)
}

/// Symmetric and every eigenvalue above `SPD_THRESHOLD · λ_max`.
pub fn is_spd(m: &DenseMatrix) -> bool {
    match sym_eigenvalues(m) {
        Ok(d) => spd_spectrum(&d),
        Err(_) => false,
    }
}

/// Symmetric with no eigenvalue below `-SPD_THRESHOLD · λ_max`.
pub fn is_snnd(m: &DenseMatrix) -> bool {
    match sym_eigenvalues(m) {
        Ok(d) => match (d.first(), d.last()) {
            (Some(&lo), Some(&hi)) => lo >= -SPD_THRESHOLD * hi.abs().max(f64::MIN_POSITIVE),
            _ => true,
        },
        Err(_) => false,
    }
}

pub(crate) fn spd_spectrum(d: &[f64]) -> bool {
    let (Some(&lo), Some(&hi)) = (d.first(), d.last()) else {
        return true;
    };
    hi > 0.0 && lo > SPD_THRESHOLD * hi
}

/// Square root factor `R = diag(√λ)·Qᵀ` of an SPD matrix, so `RᵀR = Z`.
pub fn matrix_sqrt(z: &DenseMatrix) -> Result<DenseMatrix> {
    let (q, d) = sym_eigen(z)?;
    if !spd_spectrum(&d) {
        return Err(Error::NotSpd);
    }
    let n = d.len();
    let mut r = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let s = math::sqrt(d[i]);
        for j in 0..n {
            r[(i, j)] = s * q[(j, i)];
        }
    }
    Ok(r)
}

/// A complex eigenvalue `re + i·im`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

impl Eigenvalue {
    pub fn modulus(&self) -> f64 {
        math::hypot(self.re, self.im)
    }
}

/// All eigenvalues of a general square matrix, in no particular order.
pub fn eigenvalues(m: &DenseMatrix) -> Result<Vec<Eigenvalue>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if m.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenNoConvergence);
    }
    // 1-based working copy
    let mut a = Hess::new(m);
    a.balance();
    a.reduce();
    a.qr()
}

struct Hess {
    n: usize,
    a: Vec<f64>,
}

impl Hess {
    fn new(m: &DenseMatrix) -> Self {
        let n = m.nrows();
        let mut a = vec![0.0; (n + 1) * (n + 1)];
        for i in 0..n {
            for j in 0..n {
                a[(i + 1) * (n + 1) + j + 1] = m[(i, j)];
            }
        }
        Self { n, a }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * (self.n + 1) + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        let n1 = self.n + 1;
        self.a[i * n1 + j] = v;
    }

    fn balance(&mut self) {
        const RADIX: f64 = 2.0;
        let sqrdx = RADIX * RADIX;
        let n = self.n;
        let mut done = false;
        while !done {
            done = true;
            for i in 1..=n {
                let mut r = 0.0;
                let mut c = 0.0;
                for j in 1..=n {
                    if j != i {
                        c += self.at(j, i).abs();
                        r += self.at(i, j).abs();
                    }
                }
                if c != 0.0 && r != 0.0 {
                    let mut g = r / RADIX;
                    let mut f = 1.0;
                    let s = c + r;
                    while c < g {
                        f *= RADIX;
                        c *= sqrdx;
                    }
                    g = r * RADIX;
                    while c > g {
                        f /= RADIX;
                        c /= sqrdx;
                    }
                    if (c + r) / f < 0.95 * s {
                        done = false;
                        let g = 1.0 / f;
                        for j in 1..=n {
                            self.set(i, j, self.at(i, j) * g);
                            self.set(j, i, self.at(j, i) * f);
                        }
                    }
                }
            }
        }
    }

    /// Gaussian-elimination reduction to upper Hessenberg form.
    fn reduce(&mut self) {
        let n = self.n;
        for m in 2..n {
            let mut x: f64 = 0.0;
            let mut i = m;
            for j in m..=n {
                if self.at(j, m - 1).abs() > x.abs() {
                    x = self.at(j, m - 1);
                    i = j;
                }
            }
            if i != m {
                for j in (m - 1)..=n {
                    let t = self.at(i, j);
                    self.set(i, j, self.at(m, j));
                    self.set(m, j, t);
                }
                for j in 1..=n {
                    let t = self.at(j, i);
                    self.set(j, i, self.at(j, m));
                    self.set(j, m, t);
                }
            }
            if x != 0.0 {
                for i in (m + 1)..=n {
                    let mut y = self.at(i, m - 1);
                    if y != 0.0 {
                        y /= x;
                        self.set(i, m - 1, y);
                        for j in m..=n {
                            self.set(i, j, self.at(i, j) - y * self.at(m, j));
                        }
                        for j in 1..=n {
                            self.set(j, m, self.at(j, m) + y * self.at(j, i));
                        }
                    }
                }
            }
        }
        for i in 1..=n {
            for j in 1..i.saturating_sub(1) {
                self.set(i, j, 0.0);
            }
        }
    }

    fn qr(mut self) -> Result<Vec<Eigenvalue>> {
        let n = self.n;
        let mut wr = vec![0.0; n + 1];
        let mut wi = vec![0.0; n + 1];
        let mut anorm = 0.0;
        for i in 1..=n {
            for j in i.saturating_sub(1).max(1)..=n {
                anorm += self.at(i, j).abs();
            }
        }
        let mut nn = n;
        let mut t = 0.0;
        let (mut p, mut q, mut r): (f64, f64, f64);
        let (mut x, mut y, mut z, mut w, mut s): (f64, f64, f64, f64, f64);
        while nn >= 1 {
            let mut its = 0;
            loop {
                let mut l = nn;
                while l >= 2 {
                    s = self.at(l - 1, l - 1).abs() + self.at(l, l).abs();
                    if s == 0.0 {
                        s = anorm;
                    }
                    if self.at(l, l - 1).abs() + s == s {
                        self.set(l, l - 1, 0.0);
                        break;
                    }
                    l -= 1;
                }
                x = self.at(nn, nn);
                if l == nn {
                    wr[nn] = x + t;
                    wi[nn] = 0.0;
                    nn -= 1;
                } else {
                    y = self.at(nn - 1, nn - 1);
                    w = self.at(nn, nn - 1) * self.at(nn - 1, nn);
                    if l == nn - 1 {
                        p = 0.5 * (y - x);
                        q = p * p + w;
                        z = math::sqrt(q.abs());
                        x += t;
                        if q >= 0.0 {
                            z = p + if p >= 0.0 { z.abs() } else { -z.abs() };
                            wr[nn - 1] = x + z;
                            wr[nn] = x + z;
                            if z != 0.0 {
                                wr[nn] = x - w / z;
                            }
                            wi[nn - 1] = 0.0;
                            wi[nn] = 0.0;
                        } else {
                            wr[nn - 1] = x + p;
                            wr[nn] = x + p;
                            wi[nn - 1] = -z;
                            wi[nn] = z;
                        }
                        nn -= 2;
                    } else {
                        if its >= 60 {
                            return Err(Error::EigenNoConvergence);
                        }
                        if its % 10 == 0 && its > 0 {
                            // exceptional shift
                            t += x;
                            for i in 1..=nn {
                                self.set(i, i, self.at(i, i) - x);
                            }
                            s = self.at(nn, nn - 1).abs() + self.at(nn - 1, nn - 2).abs();
                            x = 0.75 * s;
                            y = x;
                            w = -0.4375 * s * s;
                        }
                        its += 1;
                        let mut m = nn - 2;
                        loop {
                            z = self.at(m, m);
                            r = x - z;
                            s = y - z;
                            p = (r * s - w) / self.at(m + 1, m) + self.at(m, m + 1);
                            q = self.at(m + 1, m + 1) - z - r - s;
                            r = self.at(m + 2, m + 1);
                            s = p.abs() + q.abs() + r.abs();
                            p /= s;
                            q /= s;
                            r /= s;
                            if m == l {
                                break;
                            }
                            let u = self.at(m, m - 1).abs() * (q.abs() + r.abs());
                            let v = p.abs() * (self.at(m - 1, m - 1).abs() + z.abs() + self.at(m + 1, m + 1).abs());
                            if u + v == v {
                                break;
                            }
                            m -= 1;
                        }
                        for i in (m + 2)..=nn {
                            self.set(i, i - 2, 0.0);
                            if i != m + 2 {
                                self.set(i, i - 3, 0.0);
                            }
                        }
                        let mut k = m;
                        while k < nn {
                            if k != m {
                                p = self.at(k, k - 1);
                                q = self.at(k + 1, k - 1);
                                r = 0.0;
                                if k != nn - 1 {
                                    r = self.at(k + 2, k - 1);
                                }
                                x = p.abs() + q.abs() + r.abs();
                                if x != 0.0 {
                                    p /= x;
                                    q /= x;
                                    r /= x;
                                }
                            }
                            let mag = math::sqrt(p * p + q * q + r * r);
                            s = if p >= 0.0 { mag } else { -mag };
                            if s != 0.0 {
                                if k == m {
                                    if l != m {
                                        self.set(k, k - 1, -self.at(k, k - 1));
                                    }
                                } else {
                                    self.set(k, k - 1, -s * x);
                                }
                                p += s;
                                x = p / s;
                                y = q / s;
                                z = r / s;
                                q /= p;
                                r /= p;
                                for j in k..=nn {
                                    p = self.at(k, j) + q * self.at(k + 1, j);
                                    if k != nn - 1 {
                                        p += r * self.at(k + 2, j);
                                        self.set(k + 2, j, self.at(k + 2, j) - p * z);
                                    }
                                    self.set(k + 1, j, self.at(k + 1, j) - p * y);
                                    self.set(k, j, self.at(k, j) - p * x);
                                }
                                let mmin = if nn < k + 3 { nn } else { k + 3 };
                                for i in l..=mmin {
                                    p = x * self.at(i, k) + y * self.at(i, k + 1);
                                    if k != nn - 1 {
                                        p += z * self.at(i, k + 2);
                                        self.set(i, k + 2, self.at(i, k + 2) - p * r);
                                    }
                                    self.set(i, k + 1, self.at(i, k + 1) - p * q);
                                    self.set(i, k, self.at(i, k) - p);
                                }
                            }
                            k += 1;
                        }
                    }
                }
                if nn < 2 || l + 1 >= nn {
                    break;
                }
            }
        }
        let out: Vec<Eigenvalue> = (1..=n).map(|i| Eigenvalue { re: wr[i], im: wi[i] }).collect();
        if out.iter().any(|e| !e.re.is_finite() || !e.im.is_finite()) {
            return Err(Error::EigenNoConvergence);
        }
        Ok(out)
    }
}

/// Largest eigenvalue modulus.
///
/// Orders up to [`FULL_EIGEN_LIMIT`] use a full eigensolve (symmetric
/// routine when applicable); larger ones, or a failed QR sweep, fall back to
/// power iteration.
pub fn spectral_radius(m: &DenseMatrix) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return 0.0;
    }
    if n <= FULL_EIGEN_LIMIT {
        if m.is_symmetric(SYMMETRY_TOL) {
            if let Ok(d) = sym_eigenvalues(m) {
                return d.iter().fold(0.0, |a: f64, v| a.max(v.abs()));
            }
        }
        if let Ok(ev) = eigenvalues(m) {
            return ev.iter().fold(0.0, |a: f64, e| a.max(e.modulus()));
        }
    }
    power_radius(m, 1e-8, 100_000)
}

/// Power iteration estimate of the spectral radius.
///
/// The ratio is taken over two steps, `(‖M²v‖/‖v‖)^{1/2}`, so that a
/// dominant `±λ` pair or a complex-conjugate pair does not make the
/// estimate oscillate.
pub fn power_radius(m: &DenseMatrix, stagnation_tol: f64, max_iter: usize) -> f64 {
    let n = m.nrows();
    let mut v = vec![1.0; n];
    v[0] += 1e-3;
    let mut nv = crate::norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut last = f64::INFINITY;
    for _ in 0..max_iter {
        let w = m.matvec(&v).expect("square");
        let w2 = m.matvec(&w).expect("square");
        nv = crate::norm2(&w2);
        if nv == 0.0 || !nv.is_finite() {
            return if nv == 0.0 { 0.0 } else { f64::INFINITY };
        }
        let est = math::sqrt(nv);
        v = w2;
        v.iter_mut().for_each(|x| *x /= nv);
        if (est - last).abs() <= stagnation_tol * est {
            return est;
        }
        last = est;
    }
    last
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn random_symmetric(n: usize, rng: &mut SplitMix64) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = rng.uniform(-1.0, 1.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    fn random_spd(n: usize, rng: &mut SplitMix64) -> DenseMatrix {
        let b = random_symmetric(n, rng);
        let mut z = b.transpose().matmul(&b).unwrap();
        for i in 0..n {
            z[(i, i)] += 0.1;
        }
        z
    }

    #[test]
    fn diagonal_spectrum() {
        let m = DenseMatrix::from_diagonal(&[9.0, 4.0]);
        let (q, d) = sym_eigen(&m).unwrap();
        assert_eq!(d, std::vec![4.0, 9.0]);
        for i in 0..2 {
            let col = q.column(i);
            assert_eq!(col.iter().filter(|v| v.abs() == 1.0).count(), 1);
        }
        let (_, d) = sym_eigen(&DenseMatrix::identity(5)).unwrap();
        assert!(d.iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn nonsymmetric_is_rejected() {
        let m = DenseMatrix::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]).unwrap();
        assert_eq!(sym_eigen(&m).unwrap_err(), Error::NotSymmetric);
    }

    #[test]
    fn reconstruction_and_orthogonality() {
        let mut rng = SplitMix64::new(3);
        let m = random_symmetric(20, &mut rng);
        let (q, d) = sym_eigen(&m).unwrap();
        let qtq = q.transpose().matmul(&q).unwrap();
        assert!(qtq.sub(&DenseMatrix::identity(20)).unwrap().max_abs() < 1e-10);
        let rec = q.matmul(&DenseMatrix::from_diagonal(&d)).unwrap().matmul(&q.transpose()).unwrap();
        assert!(rec.sub(&m).unwrap().frobenius_norm() <= 1e-9 * m.frobenius_norm());
    }

    #[test]
    fn sqrt_of_diagonal_is_canonical() {
        let r = matrix_sqrt(&DenseMatrix::from_diagonal(&[4.0, 9.0])).unwrap();
        assert_eq!(r, DenseMatrix::from_diagonal(&[2.0, 3.0]));
        let r = matrix_sqrt(&DenseMatrix::identity(3)).unwrap();
        let rtr = r.transpose().matmul(&r).unwrap();
        assert!(rtr.sub(&DenseMatrix::identity(3)).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn sqrt_identity_on_random_spd() {
        let mut rng = SplitMix64::new(8);
        let z = random_spd(15, &mut rng);
        let r = matrix_sqrt(&z).unwrap();
        let res = r.transpose().matmul(&r).unwrap().sub(&z).unwrap().frobenius_norm();
        assert!(res <= 1e-9 * z.frobenius_norm());
    }

    #[test]
    fn sqrt_rejects_indefinite() {
        let z = DenseMatrix::from_diagonal(&[1.0, -1.0]);
        assert_eq!(matrix_sqrt(&z).unwrap_err(), Error::NotSpd);
        let z = DenseMatrix::from_diagonal(&[1.0, 1e-13]);
        assert_eq!(matrix_sqrt(&z).unwrap_err(), Error::NotSpd);
    }

    #[test]
    fn radius_examples() {
        assert!((spectral_radius(&DenseMatrix::from_diagonal(&[0.5, -0.9])) - 0.9).abs() < 1e-15);
        let nil = DenseMatrix::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert_eq!(spectral_radius(&nil), 0.0);
        // rotation by 90 degrees scaled by 2: eigenvalues ±2i
        let rot = DenseMatrix::from_rows(&[&[0.0, -2.0], &[2.0, 0.0]]).unwrap();
        assert!((spectral_radius(&rot) - 2.0).abs() < 1e-14);
        assert!((power_radius(&rot, 1e-12, 1000) - 2.0).abs() < 1e-10);
    }

    #[test]
    fn companion_matrix_roots() {
        // x^3 - 6x^2 + 11x - 6 = (x-1)(x-2)(x-3)
        let c = DenseMatrix::from_rows(&[&[6.0, -11.0, 6.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]).unwrap();
        let mut ev: Vec<f64> = eigenvalues(&c).unwrap().iter().map(|e| e.re).collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in ev.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn general_solver_agrees_with_power_iteration() {
        let mut rng = SplitMix64::new(21);
        let n = 30;
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = rng.uniform(-1.0, 1.0);
            }
            // a dominant real eigenvalue keeps power iteration honest
            m[(i, i)] += if i == 0 { 12.0 } else { 0.0 };
        }
        let full = eigenvalues(&m).unwrap().iter().fold(0.0, |a: f64, e| a.max(e.modulus()));
        let pw = power_radius(&m, 1e-14, 100_000);
        assert!((full - pw).abs() <= 1e-6 * full);
        // eigenvalues of a triangular matrix are its diagonal
        let mut t = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                t[(i, j)] = rng.uniform(-1.0, 1.0);
            }
        }
        let want = t.diagonal().iter().fold(0.0, |a: f64, v| a.max(v.abs()));
        assert!((spectral_radius(&t) - want).abs() <= 1e-6 * want);
    }
}
