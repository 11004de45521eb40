//! Lanczos propagation of `exp(-iHt)ψ` for a real symmetric sparse `H`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{bail, Result};
use crate::linalg::tridiagonal_eigen;
use crate::operator::SparseHamiltonian;

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct KrylovConfig {
    /// Largest Krylov subspace per step.
    pub max_dim: usize,
    /// Error bound per step, estimated from the last Lanczos coefficient.
    pub tol: f64,
    /// How many times a step may be halved before giving up.
    pub max_halvings: u32,
}

impl Default for KrylovConfig {
    fn default() -> Self {
        Self { max_dim: 30, tol: 1e-10, max_halvings: 30 }
    }
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        re += x.re * y.re + x.im * y.im;
        im += x.re * y.im - x.im * y.re;
    }
    Complex64::new(re, im)
}

pub(crate) fn norm(a: &[Complex64]) -> f64 {
    libm::sqrt(a.iter().map(|z| z.norm_sqr()).sum())
}

/// Reusable Lanczos workspace bound to one Hamiltonian.
pub struct KrylovPropagator<'a> {
    h: &'a SparseHamiltonian,
    cfg: KrylovConfig,
    hnorm: f64,
    basis: Vec<Vec<Complex64>>,
    w: Vec<Complex64>,
    /// Total matrix-vector products performed.
    pub matvecs: usize,
}

impl<'a> KrylovPropagator<'a> {
    pub fn new(h: &'a SparseHamiltonian, cfg: KrylovConfig) -> Result<Self> {
        if cfg.max_dim < 2 {
            bail!(Contract, "Krylov dimension must be at least 2");
        }
        if !(cfg.tol > 0.0) {
            bail!(Contract, "Krylov tolerance must be positive");
        }
        let dim = h.dim();
        Ok(Self { h, cfg, hnorm: h.norm_bound(), basis: Vec::new(), w: vec![ZERO; dim], matvecs: 0 })
    }

    /// Advances `psi` by `dt` in place, halving sub-steps while the error
    /// estimate exceeds the tolerance.
    pub fn propagate(&mut self, psi: &mut [Complex64], dt: f64) -> Result<()> {
        if psi.len() != self.h.dim() {
            bail!(Contract, "state has length {}, operator dimension {}", psi.len(), self.h.dim());
        }
        let mut remaining = dt;
        let mut sub = dt;
        let mut halvings = 0;
        while remaining.abs() > 0.0 {
            let step = if sub.abs() >= remaining.abs() { remaining } else { sub };
            if self.try_step(psi, step)? {
                remaining -= step;
                if remaining.abs() < 1e-15 * dt.abs() {
                    break;
                }
            } else {
                halvings += 1;
                if halvings > self.cfg.max_halvings {
                    bail!(Numerical, "Krylov step did not reach tolerance {} after {halvings} halvings", self.cfg.tol);
                }
                sub = step / 2.0;
            }
        }
        Ok(())
    }

    fn try_step(&mut self, psi: &mut [Complex64], dt: f64) -> Result<bool> {
        let beta0 = norm(psi);
        if beta0 == 0.0 {
            return Ok(true);
        }
        let dim = self.h.dim();
        let m_max = self.cfg.max_dim.min(dim);
        while self.basis.len() < m_max + 1 {
            self.basis.push(vec![ZERO; dim]);
        }
        for (b, p) in self.basis[0].iter_mut().zip(psi.iter()) {
            *b = *p / beta0;
        }
        let mut alpha: Vec<f64> = Vec::with_capacity(m_max);
        let mut beta: Vec<f64> = Vec::with_capacity(m_max);
        let breakdown = 1e-12 * self.hnorm.max(1.0);
        let mut accepted: Option<Vec<Complex64>> = None;
        for j in 0..m_max {
            self.h.matvec_complex(&self.basis[j], &mut self.w);
            self.matvecs += 1;
            let a = dot(&self.basis[j], &self.w).re;
            alpha.push(a);
            // full reorthogonalisation against the whole basis
            for i in 0..=j {
                let c = dot(&self.basis[i], &self.w);
                for (w, v) in self.w.iter_mut().zip(&self.basis[i]) {
                    *w -= c * v;
                }
            }
            let b = norm(&self.w);
            let m = j + 1;
            let exhausted = b <= breakdown || m == dim;
            if exhausted || m == m_max || (m >= 4 && m % 2 == 0) {
                let y = exp_tridiagonal(&alpha, &beta, dt)?;
                let err = if exhausted { 0.0 } else { beta0 * b * y[m - 1].norm() };
                if err <= self.cfg.tol {
                    accepted = Some(y);
                    break;
                }
            }
            if m == m_max {
                break;
            }
            beta.push(b);
            for (v, w) in self.basis[j + 1].iter_mut().zip(&self.w) {
                *v = *w / b;
            }
        }
        let Some(y) = accepted else {
            return Ok(false);
        };
        for p in psi.iter_mut() {
            *p = ZERO;
        }
        for (k, yk) in y.iter().enumerate() {
            let c = *yk * beta0;
            for (p, v) in psi.iter_mut().zip(&self.basis[k]) {
                *p += c * v;
            }
        }
        Ok(true)
    }
}

/// First column of `exp(-i T dt)` for the tridiagonal `T`.
fn exp_tridiagonal(alpha: &[f64], beta: &[f64], dt: f64) -> Result<Vec<Complex64>> {
    let m = alpha.len();
    let es = tridiagonal_eigen(alpha, &beta[..m - 1])?;
    let mut y = vec![ZERO; m];
    for k in 0..m {
        let w = es.vectors[k]; // first component of eigenvector k
        let phase = Complex64::new(0.0, -es.values[k] * dt).exp() * w;
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += phase * es.vectors[i * m + k];
        }
    }
    Ok(y)
}
