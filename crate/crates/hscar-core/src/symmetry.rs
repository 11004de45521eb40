//! Block decomposition under commuting involutive symmetries: spatial
//! reflections and, at half filling with uniform on-site energies, global
//! particle-hole conjugation.
//!
//! A group of `2^k` elements is generated by `k` commuting involutions.
//! Element `g` is a bit mask over generators and character `c` acts as
//! `χ_c(g) = (-1)^{popcount(g & c)}`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::hilbert::BasisSector;
use crate::lattice::LatticeSpec;
use crate::operator::SparseHamiltonian;

const MAX_GENERATORS: usize = 4;

/// Site permutation optionally followed by particle-hole conjugation.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteSymmetry {
    pub name: &'static str,
    pub perm: Vec<usize>,
    pub complement: bool,
}

impl SiteSymmetry {
    pub fn apply(&self, bits: u64) -> u64 {
        let mut out = 0u64;
        let mut rest = bits;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            out |= 1 << self.perm[i];
            rest &= rest - 1;
        }
        if self.complement {
            out ^= crate::hilbert::mask(self.perm.len());
        }
        out
    }
}

fn preserves_bonds(spec: &LatticeSpec, perm: &[usize]) -> bool {
    let key = |u: usize, v: usize| (u.min(v), u.max(v));
    let bonds: BTreeMap<(usize, usize), u64> =
        spec.edges().iter().map(|e| (key(e.u, e.v), e.amplitude.to_bits())).collect();
    let onsite = spec.onsite();
    spec.edges().iter().all(|e| bonds.get(&key(perm[e.u], perm[e.v])) == Some(&e.amplitude.to_bits()))
        && (0..spec.sites()).all(|i| onsite[perm[i]] == onsite[i])
}

/// Verified symmetries of `spec` that map the sector `sec` onto itself.
pub fn lattice_symmetries(spec: &LatticeSpec, sec: &BasisSector) -> Vec<SiteSymmetry> {
    let names = ["reflection-x", "reflection-y", "reflection-z"];
    let mut out: Vec<SiteSymmetry> = spec
        .spatial_involutions()
        .into_iter()
        .enumerate()
        .filter(|(_, p)| preserves_bonds(spec, p))
        .map(|(i, perm)| SiteSymmetry { name: names[i.min(2)], perm, complement: false })
        .collect();
    if out.len() == 1 {
        out[0].name = "inversion";
    }
    if sec.particles() * 2 == sec.sites() && spec.uniform_onsite() {
        out.push(SiteSymmetry { name: "particle-hole", perm: (0..spec.sites()).collect(), complement: true });
    }
    out
}

#[derive(Clone, Debug)]
struct Orbit {
    rep: usize,
    /// Bit set over group elements fixing `rep`.
    stab: u16,
}

/// Orbit structure of a sector under a symmetry group.
#[derive(Clone, Debug)]
pub struct SymmetryDecomposition {
    generators: Vec<SiteSymmetry>,
    orbit_of: Vec<u32>,
    /// Group element mapping the orbit representative to each state.
    to_rep: Vec<u8>,
    orbits: Vec<Orbit>,
}

/// Symmetry-adapted basis for one character.
#[derive(Clone, Debug)]
pub struct SymmetryBlock {
    pub character: u8,
    orbits: Vec<u32>,
    stab_sizes: Vec<u32>,
}

impl SymmetryBlock {
    pub fn dim(&self) -> usize {
        self.orbits.len()
    }
}

#[inline]
fn chi(character: u8, g: usize) -> f64 {
    if (character as usize & g).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl SymmetryDecomposition {
    pub fn new(sec: &BasisSector, generators: Vec<SiteSymmetry>) -> Result<Self> {
        if generators.len() > MAX_GENERATORS {
            bail!(Contract, "at most {MAX_GENERATORS} generators are supported");
        }
        for g in &generators {
            if g.perm.len() != sec.sites() {
                bail!(Contract, "symmetry {} acts on {} sites, sector has {}", g.name, g.perm.len(), sec.sites());
            }
        }
        let gsize = 1usize << generators.len();
        let states = sec.raw_states();
        let dim = sec.dim();
        let mut orbit_of = vec![u32::MAX; dim];
        let mut to_rep = vec![0u8; dim];
        let mut orbits = Vec::new();
        for r in 0..dim {
            if orbit_of[r] != u32::MAX {
                continue;
            }
            let oi = orbits.len() as u32;
            let mut stab = 0u16;
            for g in 0..gsize {
                let mut bits = states[r];
                for (k, gen) in generators.iter().enumerate() {
                    if g >> k & 1 == 1 {
                        bits = gen.apply(bits);
                    }
                }
                let Some(t) = sec.rank_bits(bits) else {
                    bail!(Contract, "symmetry group does not preserve the sector");
                };
                if t == r {
                    stab |= 1 << g;
                }
                if orbit_of[t] == u32::MAX {
                    orbit_of[t] = oi;
                    to_rep[t] = g as u8;
                }
            }
            orbits.push(Orbit { rep: r, stab });
        }
        Ok(Self { generators, orbit_of, to_rep, orbits })
    }

    pub fn generators(&self) -> &[SiteSymmetry] {
        &self.generators
    }

    pub fn group_size(&self) -> usize {
        1 << self.generators.len()
    }

    pub fn orbit_count(&self) -> usize {
        self.orbits.len()
    }

    /// Characters `0..2^k`.
    pub fn characters(&self) -> impl Iterator<Item = u8> {
        0..self.group_size() as u8
    }

    /// Eigenvalue (±1) of generator `k` in the block of `character`.
    pub fn parity(character: u8, k: usize) -> i8 {
        if character >> k & 1 == 1 {
            -1
        } else {
            1
        }
    }

    pub fn block(&self, character: u8) -> SymmetryBlock {
        let gsize = self.group_size();
        let mut orbits = Vec::new();
        let mut stab_sizes = Vec::new();
        for (oi, o) in self.orbits.iter().enumerate() {
            let compatible = (0..gsize).filter(|g| o.stab >> g & 1 == 1).all(|g| chi(character, g) > 0.0);
            if compatible {
                orbits.push(oi as u32);
                stab_sizes.push(o.stab.count_ones());
            }
        }
        SymmetryBlock { character, orbits, stab_sizes }
    }

    fn positions(&self, block: &SymmetryBlock) -> Vec<u32> {
        let mut pos = vec![u32::MAX; self.orbits.len()];
        for (k, &o) in block.orbits.iter().enumerate() {
            pos[o as usize] = k as u32;
        }
        pos
    }

    /// Dense row-major block of `h` in the symmetry-adapted basis.
    pub fn block_matrix(&self, h: &SparseHamiltonian, block: &SymmetryBlock) -> Result<Vec<f64>> {
        if h.dim() != self.orbit_of.len() {
            bail!(Contract, "operator dimension {} does not match the sector", h.dim());
        }
        let d = block.dim();
        let pos = self.positions(block);
        let mut m = vec![0.0; d * d];
        for (col, &o) in block.orbits.iter().enumerate() {
            let r = self.orbits[o as usize].rep;
            let sr = block.stab_sizes[col] as f64;
            for (t, v) in h.row(r) {
                let ot = self.orbit_of[t] as usize;
                let row = pos[ot];
                if row == u32::MAX {
                    continue;
                }
                let ss = block.stab_sizes[row as usize] as f64;
                let g = self.to_rep[t] as usize;
                m[row as usize * d + col] += v * chi(block.character, g) * libm::sqrt(ss / sr);
            }
        }
        Ok(m)
    }

    /// Amplitude `⟨s|R⟩` of every sector state on block vector `v`.
    pub fn embed(&self, block: &SymmetryBlock, v: &[f64]) -> Vec<f64> {
        let pos = self.positions(block);
        let gsize = self.group_size() as f64;
        self.orbit_of
            .iter()
            .zip(&self.to_rep)
            .map(|(&o, &g)| {
                let k = pos[o as usize];
                if k == u32::MAX {
                    0.0
                } else {
                    let stab = block.stab_sizes[k as usize] as f64;
                    v[k as usize] * chi(block.character, g as usize) * libm::sqrt(stab / gsize)
                }
            })
            .collect()
    }

    /// `⟨s|v⟩` for a single sector rank, `None` if `s` has no support in the
    /// block.
    pub fn overlap_coefficient(&self, block: &SymmetryBlock, rank: usize) -> Option<(usize, f64)> {
        let o = self.orbit_of[rank];
        let k = block.orbits.binary_search(&o).ok()?;
        let stab = block.stab_sizes[k] as f64;
        Some((k, chi(block.character, self.to_rep[rank] as usize) * libm::sqrt(stab / self.group_size() as f64)))
    }
}
