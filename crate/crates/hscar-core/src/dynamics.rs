//! Quench dynamics from Fock states: fidelity and entropy traces, first
//! revivals and their size scaling.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::entropy::Bipartition;
use crate::error::{bail, Result};
use crate::hilbert::{enumerate_sector, BasisSector, FockState};
use crate::krylov::{norm, KrylovConfig, KrylovPropagator};
use crate::lattice::{collective_states, Boundary, CollectiveLabel, LatticeSpec};
use crate::operator::{assemble_hamiltonian, SparseHamiltonian};

#[derive(Clone, Debug, PartialEq)]
pub struct DynamicsTrace {
    /// Sample times in units of `1/J1` when energies are in units of `J1`.
    pub times: Vec<f64>,
    /// `|⟨ψ(0)|ψ(t)⟩|²`.
    pub fidelity: Vec<f64>,
    /// Half-cut entropy in nats, when requested.
    pub entropy: Option<Vec<f64>>,
    /// `max_t |‖ψ(t)‖ − 1|`.
    pub norm_drift: f64,
    /// `max_t |⟨H⟩_t − ⟨H⟩_0|`.
    pub energy_drift: f64,
}

/// Uniform grid of `points` samples on `[0, t_max]`.
pub fn time_grid(t_max: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![0.0];
    }
    (0..points).map(|k| t_max * k as f64 / (points - 1) as f64).collect()
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.first() != Some(&0.0) {
        bail!(Contract, "time grid must start at 0");
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        bail!(Contract, "time grid must be strictly ascending");
    }
    Ok(())
}

/// Propagates `psi0` and calls `observe(k, t_k, ψ(t_k))` at every sample.
pub fn evolve_with<F>(
    h: &SparseHamiltonian,
    psi0: &[Complex64],
    times: &[f64],
    cfg: KrylovConfig,
    mut observe: F,
) -> Result<DynamicsTrace>
where
    F: FnMut(usize, f64, &[Complex64]) -> Result<()>,
{
    check_times(times)?;
    if psi0.len() != h.dim() {
        bail!(Contract, "state has length {}, operator dimension {}", psi0.len(), h.dim());
    }
    if (norm(psi0) - 1.0).abs() > 1e-10 {
        bail!(Contract, "initial state is not normalised");
    }
    let mut kp = KrylovPropagator::new(h, cfg)?;
    let mut psi = psi0.to_vec();
    let e0 = h.expectation(psi0);
    let mut fidelity = Vec::with_capacity(times.len());
    let (mut norm_drift, mut energy_drift): (f64, f64) = (0.0, 0.0);
    let mut t_prev = 0.0;
    for (k, &t) in times.iter().enumerate() {
        if t > t_prev {
            kp.propagate(&mut psi, t - t_prev)?;
            t_prev = t;
        }
        let amp: Complex64 = psi0.iter().zip(&psi).map(|(a, b)| a.conj() * b).sum();
        fidelity.push(amp.norm_sqr());
        norm_drift = norm_drift.max((norm(&psi) - 1.0).abs());
        energy_drift = energy_drift.max((h.expectation(&psi) - e0).abs());
        observe(k, t, &psi)?;
    }
    Ok(DynamicsTrace { times: times.to_vec(), fidelity, entropy: None, norm_drift, energy_drift })
}

/// Fidelity trace of `psi0`.
pub fn evolve(h: &SparseHamiltonian, psi0: &[Complex64], times: &[f64], cfg: KrylovConfig) -> Result<DynamicsTrace> {
    evolve_with(h, psi0, times, cfg, |_, _, _| Ok(()))
}

/// Basis vector of `s` in `sec`.
pub fn fock_vector(sec: &BasisSector, s: FockState) -> Result<Vec<Complex64>> {
    let Some(r) = sec.rank(s) else {
        bail!(Contract, "state {s} is not in the sector");
    };
    let mut psi = vec![Complex64::new(0.0, 0.0); sec.dim()];
    psi[r] = Complex64::new(1.0, 0.0);
    Ok(psi)
}

/// Fidelity trace of a Fock state, plus its entropy across `cut` if given.
pub fn evolve_fock(
    h: &SparseHamiltonian,
    sec: &BasisSector,
    s: FockState,
    times: &[f64],
    cut: Option<&[usize]>,
    cfg: KrylovConfig,
) -> Result<DynamicsTrace> {
    let psi0 = fock_vector(sec, s)?;
    match cut {
        None => evolve(h, &psi0, times, cfg),
        Some(cut) => {
            let bp = Bipartition::new(sec, cut)?;
            let mut ent = Vec::with_capacity(times.len());
            let mut trace = evolve_with(h, &psi0, times, cfg, |_, _, psi| {
                ent.push(bp.entropy(psi)?);
                Ok(())
            })?;
            trace.entropy = Some(ent);
            Ok(trace)
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct RevivalReport {
    pub t1: f64,
    pub f1: f64,
    /// `ln(F1) / L`.
    pub log_density: f64,
}

/// First revival: the fidelity maximum over `[0.5, 1.5]·2π/ΔE`.
pub fn first_revival(trace: &DynamicsTrace, delta_e_guess: f64, sites: usize) -> Result<RevivalReport> {
    if !(delta_e_guess > 0.0) {
        bail!(Contract, "spacing guess must be positive");
    }
    let period = 2.0 * core::f64::consts::PI / delta_e_guess;
    let (lo, hi) = (0.5 * period, 1.5 * period);
    let t_end = trace.times.last().copied().unwrap_or(0.0);
    if t_end < hi * (1.0 - 1e-9) {
        bail!(Contract, "trace ends at {t_end}, revival window needs {hi}");
    }
    let best = trace
        .times
        .iter()
        .zip(&trace.fidelity)
        .filter(|(&t, _)| t >= lo && t <= hi)
        .max_by(|a, b| a.1.total_cmp(b.1));
    let Some((&t1, &f1)) = best else {
        bail!(Contract, "no samples inside the revival window");
    };
    if !(f1 > 0.0) {
        bail!(Numerical, "revival fidelity vanished");
    }
    Ok(RevivalReport { t1, f1, log_density: libm::log(f1) / sites as f64 })
}

/// `count` distinct sector states drawn uniformly, skipping `exclude`.
pub fn random_fock_states(sec: &BasisSector, count: usize, seed: u64, exclude: &[FockState]) -> Result<Vec<FockState>> {
    let mut excluded: Vec<usize> = exclude.iter().filter_map(|&s| sec.rank(s)).collect();
    excluded.sort_unstable();
    let eligible: Vec<usize> = (0..sec.dim()).filter(|r| excluded.binary_search(r).is_err()).collect();
    if count > eligible.len() {
        bail!(Contract, "asked for {count} states, only {} available", eligible.len());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = rand::seq::index::sample(&mut rng, eligible.len(), count);
    Ok(picks.iter().map(|i| sec.unrank(eligible[i])).collect())
}

/// Lattice families for size scans.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Family {
    Ssh { boundary: Boundary },
    Comb,
    RandomCluster { seeds: usize, base_seed: u64 },
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ScalingParams {
    pub j0: f64,
    pub j1: f64,
    pub j3: f64,
    /// Spacing guess for the revival window; `2·J0` is the decoupled value.
    pub delta_e_guess: f64,
    /// Samples per revival period.
    pub samples_per_period: usize,
    pub krylov: KrylovConfig,
}

impl ScalingParams {
    pub fn new(j0: f64, j1: f64, j3: f64) -> Self {
        Self { j0, j1, j3, delta_e_guess: 2.0 * j0, samples_per_period: 200, krylov: KrylovConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingPoint {
    pub dimers: usize,
    pub sites: usize,
    /// Mean of `ln(F1)/L` over configurations.
    pub log_density: f64,
    /// Standard error of the mean (zero for a single configuration).
    pub stderr: f64,
    /// `ln(1/𝒟)/L`.
    pub thermal_reference: f64,
    pub t1: f64,
    pub configurations: usize,
}

/// Revival of the collective state `C` of one lattice.
pub fn collective_revival(spec: &LatticeSpec, params: &ScalingParams) -> Result<RevivalReport> {
    let sec = enumerate_sector(spec.sites(), spec.half_filling())?;
    let h = assemble_hamiltonian(spec, &sec)?;
    let Some(c) = collective_states(spec).get(CollectiveLabel::C) else {
        bail!(Contract, "lattice has no collective state C");
    };
    let period = 2.0 * core::f64::consts::PI / params.delta_e_guess;
    let points = libm::ceil(params.samples_per_period as f64 * 1.5) as usize + 1;
    let times = time_grid(1.5 * period, points);
    let trace = evolve_fock(&h, &sec, c, &times, None, params.krylov)?;
    first_revival(&trace, params.delta_e_guess, spec.sites())
}

/// Builds the family member with `n` dimers (and `seed` for clusters).
pub fn family_lattice(family: Family, n: usize, params: &ScalingParams, seed: u64) -> Result<LatticeSpec> {
    match family {
        Family::Ssh { boundary } => LatticeSpec::ssh(n, params.j0, params.j1, params.j3, boundary),
        Family::Comb => LatticeSpec::comb(n, params.j0, params.j1),
        Family::RandomCluster { .. } => LatticeSpec::random_cluster(n, params.j0, params.j1, seed),
    }
}

/// Logarithmic fidelity density of `C` per size.
pub fn scaling_sweep(family: Family, sizes: &[usize], params: &ScalingParams) -> Result<Vec<ScalingPoint>> {
    let mut out = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let seeds: Vec<u64> = match family {
            Family::RandomCluster { seeds, base_seed } => (0..seeds as u64).map(|k| base_seed + k).collect(),
            _ => vec![0],
        };
        if seeds.is_empty() {
            bail!(Contract, "random-cluster scaling needs at least one seed");
        }
        let mut values = Vec::with_capacity(seeds.len());
        let mut t1 = 0.0;
        for &seed in &seeds {
            let spec = family_lattice(family, n, params, seed)?;
            let rep = collective_revival(&spec, params)?;
            values.push(rep.log_density);
            t1 += rep.t1;
        }
        let m = values.len() as f64;
        let mean = values.iter().sum::<f64>() / m;
        let stderr = if values.len() > 1 {
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0);
            libm::sqrt(var / m)
        } else {
            0.0
        };
        let sites = 2 * n;
        let dim = crate::hilbert::binomial(sites, n) as f64;
        out.push(ScalingPoint {
            dimers: n,
            sites,
            log_density: mean,
            stderr,
            thermal_reference: -libm::log(dim) / sites as f64,
            t1: t1 / m,
            configurations: values.len(),
        });
    }
    Ok(out)
}
