//! Hypercube decay approximation: the thermal region is replaced by a
//! diagonal self-energy on the hypercube, leaving a Green's function of
//! dimension `𝒟_H` only.
//!
//! Two self-energy models are provided. [`SelfEnergyModel::Dyson`] solves
//! `σ_p = γ_p² [(z − H_H − σ_p |p⟩⟨p|)⁻¹]_pp` self-consistently.
//! With `g_p(z) = [(z − H_H)⁻¹]_pp` this reduces (Sherman–Morrison) to the
//! scalar fixed point `σ = γ² g / (1 − σ g)`, iterated with damping from
//! `σ = 0`. [`SelfEnergyModel::SurfaceChain`] attaches an independent
//! semi-infinite chain of hopping `γ_p` to each state,
//! `σ_p = (z − √(z² − 4γ_p²))/2`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{bail, Result};
use crate::linalg::{solve_complex, symmetric_eigen, SymmetricEigen};
use crate::operator::SparseHamiltonian;
use crate::subspace::SubspaceSplit;

/// Largest hypercube the solver accepts.
pub const MAX_HYPER_DIM: usize = 4096;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum SelfEnergyModel {
    Dyson,
    SurfaceChain,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HdaConfig {
    /// Energy grid, strictly ascending.
    pub grid: Vec<f64>,
    /// Broadening `η` standing in for `0⁺`.
    pub eta: f64,
    pub tol: f64,
    /// Mixing factor `d` in `σ ← (1 − d)σ + d·f(σ)`.
    pub damping: f64,
    pub max_iters: usize,
    pub model: SelfEnergyModel,
}

impl HdaConfig {
    /// Defaults for `n` units of intra coupling `j0`: `η = 0.05·J0` and 2001
    /// points over `±(n·J0 + 2·J0)`.
    pub fn for_lattice(n: usize, j0: f64) -> Self {
        let half = (n as f64 + 2.0) * j0.abs();
        let grid = (0..2001).map(|k| -half + 2.0 * half * k as f64 / 2000.0).collect();
        Self { grid, eta: 0.05 * j0.abs(), tol: 1e-10, damping: 0.5, max_iters: 500, model: SelfEnergyModel::Dyson }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.len() < 2 || self.grid.windows(2).any(|w| !(w[1] > w[0])) {
            bail!(Contract, "energy grid must be strictly ascending with at least 2 points");
        }
        if !(self.eta > 0.0) {
            bail!(Contract, "broadening must be positive");
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            bail!(Contract, "damping must lie in (0, 1]");
        }
        if !(self.tol > 0.0) || self.max_iters == 0 {
            bail!(Contract, "tolerance and iteration cap must be positive");
        }
        Ok(())
    }
}

/// Dense hypercube block of `h`, row-major.
pub fn hypercube_hamiltonian(h: &SparseHamiltonian, split: &SubspaceSplit) -> Result<Vec<f64>> {
    if split.hyper.len() > MAX_HYPER_DIM {
        bail!(Capacity, "hypercube dimension {} exceeds {MAX_HYPER_DIM}", split.hyper.len());
    }
    Ok(h.restrict_dense(&split.hyper))
}

/// Self-energies on the grid for every hypercube state.
#[derive(Clone, Debug)]
pub struct SelfEnergies {
    /// `sigma[p][k]` at grid point `k`.
    pub sigma: Vec<Vec<Complex64>>,
    pub iterations: Vec<Vec<u32>>,
    pub residual: Vec<Vec<f64>>,
    /// Per grid point: every state converged on the retarded branch.
    pub converged: Vec<bool>,
}

fn surface_chain(z: Complex64, gamma: f64) -> Complex64 {
    let g2 = Complex64::new(4.0 * gamma * gamma, 0.0);
    let root = (z * z - g2).sqrt();
    let a = (z - root) / 2.0;
    let b = (z + root) / 2.0;
    // the decaying root has |σ| ≤ γ
    if a.norm() <= b.norm() {
        a
    } else {
        b
    }
}

/// Solves for every `σ_p` on the grid. States with `γ_p = 0` get `σ_p ≡ 0`.
pub fn solve_dyson(hh: &[f64], n: usize, gamma: &[f64], cfg: &HdaConfig) -> Result<SelfEnergies> {
    cfg.validate()?;
    if hh.len() != n * n || gamma.len() != n {
        bail!(Contract, "hypercube matrix and escape couplings disagree on dimension {n}");
    }
    if n > MAX_HYPER_DIM {
        bail!(Capacity, "hypercube dimension {n} exceeds {MAX_HYPER_DIM}");
    }
    let es = symmetric_eigen(hh, n)?;
    let npts = cfg.grid.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut sigma = vec![vec![zero; npts]; n];
    let mut iterations = vec![vec![0u32; npts]; n];
    let mut residual = vec![vec![0.0; npts]; n];
    let mut converged = vec![true; npts];
    for p in 0..n {
        let g = gamma[p];
        if g == 0.0 {
            continue;
        }
        let weights: Vec<f64> = (0..n).map(|k| es.vectors[p * n + k] * es.vectors[p * n + k]).collect();
        for (k, &e) in cfg.grid.iter().enumerate() {
            let z = Complex64::new(e, cfg.eta);
            let (s, it, res, ok) = match cfg.model {
                SelfEnergyModel::SurfaceChain => (surface_chain(z, g), 0, 0.0, true),
                SelfEnergyModel::Dyson => {
                    let gp: Complex64 = weights.iter().zip(&es.values).map(|(&w, &ek)| w / (z - ek)).sum();
                    let mut s = zero;
                    let mut it = 0;
                    let mut res = f64::INFINITY;
                    while it < cfg.max_iters {
                        let update = g * g * gp / (1.0 - s * gp);
                        res = (update - s).norm();
                        it += 1;
                        if res <= cfg.tol {
                            s = update;
                            break;
                        }
                        s = s * (1.0 - cfg.damping) + update * cfg.damping;
                    }
                    let ok = res <= cfg.tol && s.im <= 1e-12 && s.is_finite();
                    (s, it, res, ok)
                }
            };
            sigma[p][k] = s;
            iterations[p][k] = it as u32;
            residual[p][k] = res;
            converged[k] &= ok;
        }
    }
    Ok(SelfEnergies { sigma, iterations, residual, converged })
}

/// Local densities of states `A_p(E) = −Im G_pp(E)/π` for the probes.
#[derive(Clone, Debug, PartialEq)]
pub struct HdaResult {
    pub grid: Vec<f64>,
    /// Hypercube indices of the probes.
    pub probes: Vec<usize>,
    /// `local_dos[i][k]` for probe `i` at grid point `k`.
    pub local_dos: Vec<Vec<f64>>,
    pub converged: Vec<bool>,
}

impl HdaResult {
    /// Trapezoid integral of the probe density over the grid.
    pub fn sum_rule(&self, probe: usize) -> f64 {
        let a = &self.local_dos[probe];
        self.grid.windows(2).zip(a.windows(2)).map(|(e, y)| 0.5 * (e[1] - e[0]) * (y[0] + y[1])).sum()
    }

    pub fn converged_fraction(&self) -> f64 {
        self.converged.iter().filter(|&&c| c).count() as f64 / self.converged.len() as f64
    }
}

/// Inverts `(E + iη) − H_H − Σ(E)` at every grid point.
pub fn spectral_density(
    hh: &[f64],
    n: usize,
    sigmas: &SelfEnergies,
    cfg: &HdaConfig,
    probes: &[usize],
) -> Result<HdaResult> {
    cfg.validate()?;
    if hh.len() != n * n || sigmas.sigma.len() != n {
        bail!(Contract, "self-energies do not match hypercube dimension {n}");
    }
    if let Some(&p) = probes.iter().find(|&&p| p >= n) {
        bail!(Contract, "probe {p} outside hypercube dimension {n}");
    }
    let npts = cfg.grid.len();
    let mut local_dos = vec![vec![0.0; npts]; probes.len()];
    let mut converged = sigmas.converged.clone();
    let mut a = vec![Complex64::new(0.0, 0.0); n * n];
    for (k, &e) in cfg.grid.iter().enumerate() {
        let z = Complex64::new(e, cfg.eta);
        for (pi, &p) in probes.iter().enumerate() {
            for (i, ai) in a.iter_mut().enumerate() {
                *ai = Complex64::new(-hh[i], 0.0);
            }
            for q in 0..n {
                a[q * n + q] += z - sigmas.sigma[q][k];
            }
            let mut rhs = vec![Complex64::new(0.0, 0.0); n];
            rhs[p] = Complex64::new(1.0, 0.0);
            match solve_complex(&mut a, n, &mut rhs) {
                Ok(()) => local_dos[pi][k] = -rhs[p].im / core::f64::consts::PI,
                Err(_) => converged[k] = false,
            }
        }
    }
    Ok(HdaResult { grid: cfg.grid.clone(), probes: probes.to_vec(), local_dos, converged })
}

/// Lorentzian-broadened hypercube spectrum seen from `probe`; the exact
/// result when every `γ` vanishes.
pub fn lorentzian_reference(es: &SymmetricEigen, probe: usize, grid: &[f64], eta: f64) -> Vec<f64> {
    let n = es.n;
    grid.iter()
        .map(|&e| {
            (0..n)
                .map(|k| {
                    let w = es.vectors[probe * n + k] * es.vectors[probe * n + k];
                    let d = e - es.values[k];
                    w * eta / core::f64::consts::PI / (d * d + eta * eta)
                })
                .sum()
        })
        .collect()
}

/// Local maxima of the probe density at least `prominence` times the global
/// maximum.
pub fn tower_peaks(result: &HdaResult, probe: usize, prominence: f64) -> Vec<f64> {
    let a = &result.local_dos[probe];
    let top = a.iter().copied().fold(0.0, f64::max);
    (1..a.len().saturating_sub(1))
        .filter(|&k| result.converged[k] && a[k] > a[k - 1] && a[k] >= a[k + 1] && a[k] >= prominence * top)
        .map(|k| result.grid[k])
        .collect()
}

/// Integrated weight of the probe density within `±half_width` of `center`.
pub fn window_weight(result: &HdaResult, probe: usize, center: f64, half_width: f64) -> f64 {
    let a = &result.local_dos[probe];
    result
        .grid
        .windows(2)
        .zip(a.windows(2))
        .filter(|(e, _)| e[0] >= center - half_width && e[1] <= center + half_width)
        .map(|(e, y)| 0.5 * (e[1] - e[0]) * (y[0] + y[1]))
        .sum()
}
