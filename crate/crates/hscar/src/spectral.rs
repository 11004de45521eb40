//! Dense exact diagonalisation and the observables built on it: overlap
//! spectra, eigenstate entropies, level statistics and tower spacings.

use hscar_core::entropy::Bipartition;
use hscar_core::hilbert::{BasisSector, FockState};
use hscar_core::lattice::LatticeSpec;
use hscar_core::operator::SparseHamiltonian;
use hscar_core::stats::{extract_towers, gap_ratio, pooled_gap_ratio, GapRatio, TowerConfig, Towers, MIN_RATIOS};
use hscar_core::symmetry::{lattice_symmetries, SymmetryBlock, SymmetryDecomposition};
use hscar_core::{Complex64, Error};
use rayon::prelude::*;

use crate::lapack::{eigh, Selection};

/// Largest matrix handed to the dense solver by default.
pub const DEFAULT_EIGEN_CAP: usize = 20_000;

/// Largest sector propagated through the full spectrum.
pub const EXACT_PROPAGATOR_CAP: usize = 4_000;

type Result<T> = std::result::Result<T, Error>;

fn check_cap(dim: usize, cap: usize) -> Result<()> {
    if dim > cap {
        return Err(Error::Capacity(format!(
            "matrix dimension {dim} exceeds the eigen cap {cap}; run the dynamics command (Krylov propagation) \
             instead or raise spectrum.eigen_cap"
        )));
    }
    Ok(())
}

/// Ascending energies with orthonormal eigenvectors over one basis.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    energies: Vec<f64>,
    vectors: Vec<f64>,
    dim: usize,
}

impl EigenSystem {
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Basis dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored eigenpairs.
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn has_vectors(&self) -> bool {
        !self.vectors.is_empty()
    }

    pub fn vector(&self, k: usize) -> &[f64] {
        &self.vectors[k * self.dim..(k + 1) * self.dim]
    }

    /// `max_k ‖H v_k − E_k v_k‖`.
    pub fn max_residual(&self, h: &SparseHamiltonian) -> f64 {
        let mut hv = vec![0.0; self.dim];
        (0..self.len())
            .map(|k| {
                let v = self.vector(k);
                h.matvec(v, &mut hv);
                hv.iter().zip(v).map(|(a, b)| (a - self.energies[k] * b).powi(2)).sum::<f64>().sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Eigenpairs of a dense row-major matrix.
pub fn diagonalize_dense(a: Vec<f64>, n: usize, sel: Selection, want_vectors: bool) -> Result<EigenSystem> {
    let e = eigh(a, n, sel, want_vectors)?;
    Ok(EigenSystem { energies: e.values, vectors: e.vectors, dim: n })
}

/// Full spectrum and eigenvectors of `h`, refused above `cap`.
pub fn diagonalize(h: &SparseHamiltonian, cap: usize) -> Result<EigenSystem> {
    check_cap(h.dim(), cap)?;
    diagonalize_dense(h.to_dense(), h.dim(), Selection::All, true)
}

/// `(E_k, |⟨s|E_k⟩|²)` for the basis state of rank `rank`.
pub fn overlaps(es: &EigenSystem, rank: usize) -> Vec<(f64, f64)> {
    (0..es.len()).map(|k| (es.energies[k], es.vector(k)[rank].powi(2))).collect()
}

/// One symmetry sector of a resolved spectrum.
#[derive(Clone, Debug)]
pub struct SectorSpectrum {
    pub block: SymmetryBlock,
    /// `(generator name, ±1)` for every generator.
    pub parities: Vec<(&'static str, i8)>,
    pub system: EigenSystem,
}

/// Spectrum split into blocks of the commuting lattice symmetries.
#[derive(Clone, Debug)]
pub struct ResolvedSpectrum {
    pub decomposition: SymmetryDecomposition,
    pub sectors: Vec<SectorSpectrum>,
}

/// Diagonalises every symmetry block of `h`; `select(dim)` picks the
/// eigenpairs of a block of dimension `dim`.
pub fn resolve<F>(
    spec: &LatticeSpec,
    sec: &BasisSector,
    h: &SparseHamiltonian,
    cap: usize,
    want_vectors: bool,
    select: F,
) -> Result<ResolvedSpectrum>
where
    F: Fn(usize) -> Selection,
{
    let decomposition = SymmetryDecomposition::new(sec, lattice_symmetries(spec, sec))?;
    resolve_with(decomposition, h, cap, want_vectors, select, |_| true)
}

/// As [`resolve`] over a given decomposition, skipping characters rejected by
/// `keep`.
pub fn resolve_with<F, K>(
    decomposition: SymmetryDecomposition,
    h: &SparseHamiltonian,
    cap: usize,
    want_vectors: bool,
    select: F,
    keep: K,
) -> Result<ResolvedSpectrum>
where
    F: Fn(usize) -> Selection,
    K: Fn(u8) -> bool,
{
    let mut sectors = Vec::new();
    for c in decomposition.characters().filter(|&c| keep(c)) {
        let block = decomposition.block(c);
        let d = block.dim();
        if d == 0 {
            continue;
        }
        check_cap(d, cap)?;
        let m = decomposition.block_matrix(h, &block)?;
        let system = diagonalize_dense(m, d, select(d), want_vectors)?;
        let parities = decomposition
            .generators()
            .iter()
            .enumerate()
            .map(|(k, g)| (g.name, SymmetryDecomposition::parity(c, k)))
            .collect();
        sectors.push(SectorSpectrum { block, parities, system });
    }
    Ok(ResolvedSpectrum { decomposition, sectors })
}

impl ResolvedSpectrum {
    /// All stored energies, ascending.
    pub fn energies(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.sectors.iter().flat_map(|s| s.system.energies().iter().copied()).collect();
        e.sort_by(f64::total_cmp);
        e
    }

    /// Overlap spectrum of the basis state `rank`, sorted by energy.
    pub fn overlaps(&self, rank: usize) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for s in &self.sectors {
            match self.decomposition.overlap_coefficient(&s.block, rank) {
                Some((k, c)) => {
                    out.extend((0..s.system.len()).map(|j| (s.system.energies[j], (c * s.system.vector(j)[k]).powi(2))))
                }
                None => out.extend(s.system.energies().iter().map(|&e| (e, 0.0))),
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }

    /// Eigenvector `k` of sector `s` in the full sector basis.
    pub fn embed(&self, s: usize, k: usize) -> Vec<f64> {
        let sector = &self.sectors[s];
        self.decomposition.embed(&sector.block, sector.system.vector(k))
    }

    /// `(E, S)` for every stored eigenpair.
    pub fn entropies(&self, sec: &BasisSector, cut: &[usize]) -> Result<Vec<(f64, f64)>> {
        let bp = Bipartition::new(sec, cut)?;
        let mut out = Vec::new();
        for (s, sector) in self.sectors.iter().enumerate() {
            let part: Result<Vec<(f64, f64)>> = (0..sector.system.len())
                .into_par_iter()
                .map(|k| Ok((sector.system.energies[k], bp.entropy_real(&self.embed(s, k))?)))
                .collect();
            out.extend(part?);
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(out)
    }
}

/// Per-eigenstate `(E_k, |⟨s|E_k⟩|², S_k)`.
pub fn eigenstate_table(resolved: &ResolvedSpectrum, sec: &BasisSector, s: FockState, cut: &[usize]) -> Result<Vec<[f64; 3]>> {
    let Some(rank) = sec.rank(s) else {
        return Err(Error::Contract(format!("state {s} is not in the sector")));
    };
    let bp = Bipartition::new(sec, cut)?;
    let mut rows = Vec::new();
    for (si, sector) in resolved.sectors.iter().enumerate() {
        let coeff = resolved.decomposition.overlap_coefficient(&sector.block, rank);
        let part: Result<Vec<[f64; 3]>> = (0..sector.system.len())
            .into_par_iter()
            .map(|k| {
                let w = coeff.map_or(0.0, |(j, c)| (c * sector.system.vector(k)[j]).powi(2));
                Ok([sector.system.energies[k], w, bp.entropy_real(&resolved.embed(si, k))?])
            })
            .collect();
        rows.extend(part?);
    }
    rows.sort_by(|a, b| a[0].total_cmp(&b[0]));
    Ok(rows)
}

/// Gap-ratio statistics of one spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelStatistics {
    pub ratio: GapRatio,
    /// Number of spectra pooled.
    pub sectors: usize,
    /// Set when some sector has fewer than [`MIN_RATIOS`] ratios.
    pub warning: Option<String>,
}

/// `⟨r⟩` of `h`, either over the raw spectrum or pooled over symmetry
/// sectors.
pub fn level_spacing_ratio(
    spec: &LatticeSpec,
    sec: &BasisSector,
    h: &SparseHamiltonian,
    resolve_symmetry: bool,
    cap: usize,
) -> Result<LevelStatistics> {
    let spectra: Vec<Vec<f64>> = if resolve_symmetry {
        resolve(spec, sec, h, cap, false, |_| Selection::All)?
            .sectors
            .into_iter()
            .map(|s| s.system.energies)
            .collect()
    } else {
        check_cap(h.dim(), cap)?;
        vec![diagonalize_dense(h.to_dense(), h.dim(), Selection::All, false)?.energies]
    };
    let small = spectra.iter().filter(|s| gap_ratio(s).map_or(0, |g| g.count) < MIN_RATIOS).count();
    let Some(ratio) = pooled_gap_ratio(&spectra) else {
        return Err(Error::Fit("spectrum too small for any gap ratio".into()));
    };
    let warning = (small > 0).then(|| format!("{small} of {} spectra have fewer than {MIN_RATIOS} ratios", spectra.len()));
    Ok(LevelStatistics { ratio, sectors: spectra.len(), warning })
}

/// Overlap towers of the basis state `s`.
pub fn state_towers(resolved: &ResolvedSpectrum, sec: &BasisSector, s: FockState, cfg: &TowerConfig) -> Result<Towers> {
    let Some(rank) = sec.rank(s) else {
        return Err(Error::Contract(format!("state {s} is not in the sector")));
    };
    extract_towers(&resolved.overlaps(rank), cfg)
}

/// Full-spectrum propagator, used as an oracle for Krylov propagation.
#[derive(Clone, Debug)]
pub struct ExactPropagator {
    es: EigenSystem,
}

impl ExactPropagator {
    pub fn new(h: &SparseHamiltonian) -> Result<Self> {
        Ok(Self { es: diagonalize(h, EXACT_PROPAGATOR_CAP)? })
    }

    /// `e^{−iHt} ψ0`.
    pub fn state_at(&self, psi0: &[Complex64], t: f64) -> Vec<Complex64> {
        let n = self.es.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..self.es.len() {
            let v = self.es.vector(k);
            let c: Complex64 = v.iter().zip(psi0).map(|(a, b)| b * a).sum();
            let ph = Complex64::from_polar(1.0, -self.es.energies[k] * t) * c;
            for (o, a) in out.iter_mut().zip(v) {
                *o += ph * a;
            }
        }
        out
    }

    /// `|⟨ψ0|e^{−iHt}|ψ0⟩|²` at every time.
    pub fn fidelity(&self, psi0: &[Complex64], times: &[f64]) -> Vec<f64> {
        let weights: Vec<(f64, f64)> = (0..self.es.len())
            .map(|k| {
                let c: Complex64 = self.es.vector(k).iter().zip(psi0).map(|(a, b)| b * a).sum();
                (self.es.energies[k], c.norm_sqr())
            })
            .collect();
        times
            .iter()
            .map(|&t| weights.iter().map(|&(e, w)| Complex64::from_polar(w, -e * t)).sum::<Complex64>().norm_sqr())
            .collect()
    }
}
