//! Bipartite von Neumann entanglement entropy of sector states.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{bail, Result};
use crate::hilbert::{binomial, BasisSector};
use crate::linalg::{hermitian_eigenvalues, symmetric_eigenvalues};

const MAX_SIDE_BITS: usize = 24;

/// Precomputed bookkeeping for one cut of one sector.
#[derive(Clone, Debug)]
pub struct Bipartition {
    /// Sites of the side whose reduced density matrix is diagonalised.
    small: Vec<usize>,
    large: Vec<usize>,
    /// Per sector state: (small-side particle count, small index, large index).
    coords: Vec<(u8, u32, u32)>,
    /// Per small-side particle count: (small dimension, large dimension).
    shapes: Vec<(usize, usize)>,
}

fn compress(bits: u64, sites: &[usize]) -> u64 {
    sites.iter().enumerate().fold(0u64, |acc, (k, &s)| acc | ((bits >> s) & 1) << k)
}

/// Index of every bit pattern within its popcount class, counted in
/// ascending order.
fn class_index(width: usize) -> Vec<u32> {
    let mut next = vec![0u32; width + 1];
    (0u64..1 << width)
        .map(|p| {
            let c = p.count_ones() as usize;
            next[c] += 1;
            next[c] - 1
        })
        .collect()
}

impl Bipartition {
    /// `cut` lists the sites of subsystem A; B is the rest.
    pub fn new(sec: &BasisSector, cut: &[usize]) -> Result<Self> {
        let l = sec.sites();
        let mut in_a = vec![false; l];
        for &s in cut {
            if s >= l {
                bail!(Contract, "cut site {s} outside {l} sites");
            }
            in_a[s] = true;
        }
        let a: Vec<usize> = (0..l).filter(|&s| in_a[s]).collect();
        let b: Vec<usize> = (0..l).filter(|&s| !in_a[s]).collect();
        if a.is_empty() || b.is_empty() {
            bail!(Contract, "cut must be a nonempty proper subset of the sites");
        }
        let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
        if large.len() > MAX_SIDE_BITS {
            bail!(Capacity, "subsystem of {} sites is too large for the entropy bookkeeping", large.len());
        }
        let idx_small = class_index(small.len());
        let idx_large = class_index(large.len());
        let n = sec.particles();
        let coords = sec
            .raw_states()
            .iter()
            .map(|&s| {
                let ps = compress(s, &small);
                let pl = compress(s, &large);
                (ps.count_ones() as u8, idx_small[ps as usize], idx_large[pl as usize])
            })
            .collect();
        let shapes = (0..=small.len().min(n))
            .map(|k| (binomial(small.len(), k) as usize, binomial(large.len(), n.saturating_sub(k)) as usize))
            .collect();
        Ok(Self { small, large, coords, shapes })
    }

    pub fn small_side(&self) -> &[usize] {
        &self.small
    }

    pub fn large_side(&self) -> &[usize] {
        &self.large
    }

    /// Entropy in nats of a complex sector vector.
    pub fn entropy(&self, psi: &[Complex64]) -> Result<f64> {
        if psi.len() != self.coords.len() {
            bail!(Contract, "state length {} does not match the sector", psi.len());
        }
        if psi.iter().all(|z| z.im == 0.0) {
            let re: Vec<f64> = psi.iter().map(|z| z.re).collect();
            return self.entropy_real(&re);
        }
        let mut blocks: Vec<Vec<Complex64>> =
            self.shapes.iter().map(|&(ds, dl)| vec![Complex64::new(0.0, 0.0); ds * dl]).collect();
        for (&(k, i, j), &amp) in self.coords.iter().zip(psi) {
            let dl = self.shapes[k as usize].1;
            blocks[k as usize][i as usize * dl + j as usize] = amp;
        }
        let mut s = 0.0;
        for (m, &(ds, dl)) in blocks.iter().zip(&self.shapes) {
            if m.iter().all(|z| z.norm_sqr() == 0.0) {
                continue;
            }
            let mut rho = vec![Complex64::new(0.0, 0.0); ds * ds];
            for r in 0..ds {
                for c in r..ds {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..dl {
                        acc += m[r * dl + k] * m[c * dl + k].conj();
                    }
                    rho[r * ds + c] = acc;
                    rho[c * ds + r] = acc.conj();
                }
            }
            s += von_neumann(&hermitian_eigenvalues(&rho, ds)?);
        }
        Ok(s)
    }

    /// Entropy in nats of a real sector vector.
    pub fn entropy_real(&self, v: &[f64]) -> Result<f64> {
        if v.len() != self.coords.len() {
            bail!(Contract, "state length {} does not match the sector", v.len());
        }
        let mut blocks: Vec<Vec<f64>> = self.shapes.iter().map(|&(ds, dl)| vec![0.0; ds * dl]).collect();
        for (&(k, i, j), &amp) in self.coords.iter().zip(v) {
            let dl = self.shapes[k as usize].1;
            blocks[k as usize][i as usize * dl + j as usize] = amp;
        }
        let mut s = 0.0;
        for (m, &(ds, dl)) in blocks.iter().zip(&self.shapes) {
            if m.iter().all(|&x| x == 0.0) {
                continue;
            }
            let mut rho = vec![0.0; ds * ds];
            for r in 0..ds {
                for c in r..ds {
                    let acc: f64 = (0..dl).map(|k| m[r * dl + k] * m[c * dl + k]).sum();
                    rho[r * ds + c] = acc;
                    rho[c * ds + r] = acc;
                }
            }
            s += von_neumann(&symmetric_eigenvalues(&rho, ds)?);
        }
        Ok(s)
    }
}

fn von_neumann(eigs: &[f64]) -> f64 {
    eigs.iter().filter(|&&p| p > 1e-15).map(|&p| -p * libm::log(p)).sum()
}

/// One-shot entropy of a real vector across `cut`.
pub fn eigenstate_entropy(v: &[f64], cut: &[usize], sec: &BasisSector) -> Result<f64> {
    Bipartition::new(sec, cut)?.entropy_real(v)
}

/// Typical entropy of a random pure state at half filling, `N ln 2 − 1/2`
/// for `N` dimers.
pub fn page_value(dimers: usize) -> f64 {
    dimers as f64 * core::f64::consts::LN_2 - 0.5
}
