//! Small dense kernels: symmetric eigensolver (Householder reduction plus
//! implicit QL), complex LU solve, Hermitian eigenvalues.
//!
//! Matrices are row-major slices. These routines are meant for matrices up
//! to a few hundred rows; the `hscar` crate routes large problems to LAPACK.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{bail, Result};

const MAX_QL_ITERS: usize = 64;

/// Eigenvalues (ascending) and eigenvectors of a real symmetric matrix.
#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    pub n: usize,
    pub values: Vec<f64>,
    /// Row-major `n × n`; column `k` is the eigenvector of `values[k]`.
    pub vectors: Vec<f64>,
}

impl SymmetricEigen {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.vectors[i * self.n + k]).collect()
    }
}

/// Full eigendecomposition of the symmetric row-major matrix `a`.
pub fn symmetric_eigen(a: &[f64], n: usize) -> Result<SymmetricEigen> {
    if a.len() != n * n {
        bail!(Contract, "matrix has {} entries, expected {}", a.len(), n * n);
    }
    if n == 0 {
        return Ok(SymmetricEigen { n, values: Vec::new(), vectors: Vec::new() });
    }
    let mut v = a.to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(n, &mut v, &mut d, &mut e);
    tql2(n, &mut d, &mut e, Some(&mut v))?;
    Ok(sort_pairs(n, d, Some(v)))
}

/// Eigenvalues only, ascending.
pub fn symmetric_eigenvalues(a: &[f64], n: usize) -> Result<Vec<f64>> {
    Ok(symmetric_eigen(a, n)?.values)
}

/// Eigen-decomposition of the symmetric tridiagonal matrix with diagonal
/// `diag` and off-diagonal `off` (`off.len() == diag.len() - 1`).
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<SymmetricEigen> {
    let n = diag.len();
    if n == 0 {
        return Ok(SymmetricEigen { n, values: Vec::new(), vectors: Vec::new() });
    }
    if off.len() + 1 != n {
        bail!(Contract, "tridiagonal matrix needs {} off-diagonal entries", n - 1);
    }
    let mut d = diag.to_vec();
    // tql2 expects the subdiagonal in e[1..n]
    let mut e = vec![0.0; n];
    e[1..].copy_from_slice(off);
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    tql2(n, &mut d, &mut e, Some(&mut v))?;
    Ok(sort_pairs(n, d, Some(v)))
}

fn sort_pairs(n: usize, d: Vec<f64>, v: Option<Vec<f64>>) -> SymmetricEigen {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&k| d[k]).collect();
    let vectors = match v {
        Some(v) => {
            let mut out = vec![0.0; n * n];
            for (new, &old) in order.iter().enumerate() {
                for i in 0..n {
                    out[i * n + new] = v[i * n + old];
                }
            }
            out
        }
        None => Vec::new(),
    };
    SymmetricEigen { n, values, vectors }
}

/// Householder reduction to tridiagonal form, accumulating the transform
/// in `v`. On exit `d` holds the diagonal and `e[1..]` the subdiagonal.
fn tred2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    let idx = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
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
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = 0.0;
                v[idx(j, i)] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = libm::sqrt(h);
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
                f = d[j];
                v[idx(j, i)] = f;
                g = e[j] + v[idx(j, j)] * f;
                for k in j + 1..i {
                    g += v[idx(k, j)] * d[k];
                    e[k] += v[idx(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[idx(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[idx(n - 1, i)] = v[idx(i, i)];
        v[idx(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[idx(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[idx(k, i + 1)] * v[idx(k, j)];
                }
                for k in 0..=i {
                    v[idx(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[idx(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
        v[idx(n - 1, j)] = 0.0;
    }
    v[idx(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL iterations on a symmetric tridiagonal matrix. `e[1..]` is the
/// subdiagonal on entry. Rotations are applied to the columns of `v`.
fn tql2(n: usize, d: &mut [f64], e: &mut [f64], mut v: Option<&mut [f64]>) -> Result<()> {
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
                if iter > MAX_QL_ITERS {
                    bail!(Numerical, "tridiagonal QL did not converge");
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
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
                    g = c * e[i];
                    h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(v) = v.as_deref_mut() {
                        for k in 0..n {
                            let row = k * n;
                            h = v[row + i + 1];
                            v[row + i + 1] = s * v[row + i] + c * h;
                            v[row + i] = c * v[row + i] - s * h;
                        }
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
    Ok(())
}

/// Solves `a x = b` in place by LU with partial pivoting. `a` is row-major
/// and overwritten.
pub fn solve_complex(a: &mut [Complex64], n: usize, b: &mut [Complex64]) -> Result<()> {
    if a.len() != n * n || b.len() != n {
        bail!(Contract, "complex solve dimensions do not match n = {n}");
    }
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].norm();
        for r in col + 1..n {
            let m = a[r * n + col].norm();
            if m > best {
                best = m;
                piv = r;
            }
        }
        if best == 0.0 || !best.is_finite() {
            bail!(Numerical, "singular matrix in complex solve");
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        let inv = a[col * n + col].inv();
        for r in col + 1..n {
            let factor = a[r * n + col] * inv;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            a[r * n + col] = Complex64::new(0.0, 0.0);
            for k in col + 1..n {
                let t = a[col * n + k];
                a[r * n + k] -= factor * t;
            }
            let t = b[col];
            b[r] -= factor * t;
        }
    }
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc -= a[col * n + k] * b[k];
        }
        b[col] = acc / a[col * n + col];
    }
    Ok(())
}

/// Eigenvalues of a Hermitian row-major matrix, via the real symmetric
/// embedding `[[Re, -Im], [Im, Re]]` whose spectrum is each value twice.
pub fn hermitian_eigenvalues(a: &[Complex64], n: usize) -> Result<Vec<f64>> {
    if a.len() != n * n {
        bail!(Contract, "matrix has {} entries, expected {}", a.len(), n * n);
    }
    if a.iter().all(|z| z.im == 0.0) {
        let re: Vec<f64> = a.iter().map(|z| z.re).collect();
        return symmetric_eigenvalues(&re, n);
    }
    let m = 2 * n;
    let mut big = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = a[i * n + j];
            big[i * m + j] = z.re;
            big[(i + n) * m + j + n] = z.re;
            big[i * m + j + n] = -z.im;
            big[(i + n) * m + j] = z.im;
        }
    }
    let vals = symmetric_eigenvalues(&big, m)?;
    Ok(vals.into_iter().step_by(2).collect())
}
