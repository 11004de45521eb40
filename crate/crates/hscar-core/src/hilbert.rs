//! Fock-basis combinatorics.
//!
//! Site `i` (1-based, as in the documentation of the lattice builders) is
//! stored in bit `i - 1` of a `u64`. Internally every API takes 0-based site
//! indices, i.e. bit positions.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{bail, Result};

/// Largest supported site count.
pub const MAX_SITES: usize = 63;

/// Largest sector that [`enumerate_sector`] will materialise.
pub const MAX_SECTOR_DIM: u128 = 1 << 31;

/// Occupation pattern of `sites` lattice sites.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FockState {
    bits: u64,
    sites: u8,
}

impl FockState {
    pub fn new(bits: u64, sites: usize) -> Result<Self> {
        if sites > MAX_SITES {
            bail!(Capacity, "{sites} sites exceeds the maximum of {MAX_SITES}");
        }
        if bits >> sites != 0 {
            bail!(Contract, "bit pattern {bits:#b} does not fit in {sites} sites");
        }
        Ok(Self { bits, sites: sites as u8 })
    }

    /// Builds a state from occupations listed in site order.
    pub fn from_occupations(occ: &[u8]) -> Result<Self> {
        let mut bits = 0u64;
        if occ.len() > MAX_SITES {
            bail!(Capacity, "{} sites exceeds the maximum of {MAX_SITES}", occ.len());
        }
        for (i, &z) in occ.iter().enumerate() {
            match z {
                0 => {}
                1 => bits |= 1 << i,
                _ => bail!(Contract, "occupation {z} at site {} is not hard-core", i + 1),
            }
        }
        Self::new(bits, occ.len())
    }

    pub(crate) fn from_raw(bits: u64, sites: usize) -> Self {
        debug_assert!(sites <= MAX_SITES && bits >> sites == 0);
        Self { bits, sites: sites as u8 }
    }

    #[inline]
    pub fn bits(self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn sites(self) -> usize {
        self.sites as usize
    }

    #[inline]
    pub fn occupied(self, site: usize) -> bool {
        site < self.sites() && (self.bits >> site) & 1 == 1
    }

    #[inline]
    pub fn particles(self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn occupations(self) -> Vec<u8> {
        (0..self.sites()).map(|i| self.occupied(i) as u8).collect()
    }

    /// Particle-hole conjugate: every site flipped.
    pub fn complement(self) -> Self {
        Self { bits: !self.bits & mask(self.sites()), sites: self.sites }
    }

    /// Moves a particle from `from` to `to`. Returns `None` unless `from` is
    /// occupied, `to` is empty and both are distinct valid sites.
    #[inline]
    pub fn hop(self, from: usize, to: usize) -> Option<Self> {
        if from == to || from >= self.sites() || to >= self.sites() {
            return None;
        }
        if self.occupied(from) && !self.occupied(to) {
            Some(Self { bits: self.bits ^ (1 << from) ^ (1 << to), sites: self.sites })
        } else {
            None
        }
    }
}

impl fmt::Display for FockState {
    /// Occupations in site order, e.g. `1001`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.sites() {
            f.write_str(if self.occupied(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Parses an occupation string such as `1001` (site 1 first).
impl core::str::FromStr for FockState {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        let occ: Result<Vec<u8>> = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(crate::Error::Contract(alloc::format!("bad occupation character {c:?}"))),
            })
            .collect();
        Self::from_occupations(&occ?)
    }
}

/// Single-hop helper with the signature used throughout the docs.
#[inline]
pub fn apply_hop(s: FockState, from: usize, to: usize) -> Option<FockState> {
    s.hop(from, to)
}

#[inline]
pub(crate) fn mask(sites: usize) -> u64 {
    if sites >= 64 {
        u64::MAX
    } else {
        (1u64 << sites) - 1
    }
}

/// Binomial coefficient in 128-bit arithmetic. Exact for every `n <= 63`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// All Fock states of `sites` sites holding `particles` particles, in
/// ascending integer order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisSector {
    sites: usize,
    particles: usize,
    states: Vec<u64>,
}

/// Enumerates the fixed-particle-number sector.
pub fn enumerate_sector(sites: usize, particles: usize) -> Result<BasisSector> {
    if sites > MAX_SITES {
        bail!(Capacity, "{sites} sites exceeds the maximum of {MAX_SITES}");
    }
    if particles > sites {
        bail!(Contract, "{particles} particles do not fit in {sites} sites");
    }
    let dim = binomial(sites, particles);
    if dim > MAX_SECTOR_DIM {
        bail!(Capacity, "sector C({sites},{particles}) = {dim} is too large to enumerate");
    }
    let mut states = Vec::with_capacity(dim as usize);
    if particles == 0 {
        states.push(0);
    } else {
        // Gosper's hack walks all k-subsets in increasing order.
        let mut s: u64 = (1u64 << particles) - 1;
        let limit = mask(sites);
        loop {
            states.push(s);
            let c = s & s.wrapping_neg();
            let r = s + c;
            if r > limit || r == 0 {
                break;
            }
            let next = (((r ^ s) >> 2) / c) | r;
            if next > limit {
                break;
            }
            s = next;
        }
    }
    debug_assert_eq!(states.len() as u128, dim);
    Ok(BasisSector { sites, particles, states })
}

impl BasisSector {
    #[inline]
    pub fn sites(&self) -> usize {
        self.sites
    }

    #[inline]
    pub fn particles(&self) -> usize {
        self.particles
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn raw_states(&self) -> &[u64] {
        &self.states
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = FockState> + '_ {
        self.states.iter().map(move |&b| FockState::from_raw(b, self.sites))
    }

    #[inline]
    pub fn unrank(&self, k: usize) -> FockState {
        FockState::from_raw(self.states[k], self.sites)
    }

    /// Position of `s` in the sector, or `None` if it belongs elsewhere.
    #[inline]
    pub fn rank(&self, s: FockState) -> Option<usize> {
        if s.sites() != self.sites || s.particles() != self.particles {
            return None;
        }
        self.rank_bits(s.bits())
    }

    #[inline]
    pub fn rank_bits(&self, bits: u64) -> Option<usize> {
        self.states.binary_search(&bits).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn st(occ: &[u8]) -> FockState {
        FockState::from_occupations(occ).unwrap()
    }

    #[test]
    fn small_sector_listing() {
        let sec = enumerate_sector(4, 2).unwrap();
        assert_eq!(sec.raw_states(), &[0b0011, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100]);
    }

    #[test]
    fn sector_sizes() {
        assert_eq!(enumerate_sector(18, 9).unwrap().dim(), 48620);
        // independent product formula 16!/(8!8!)
        let direct: u64 = (9..=16u64).product::<u64>() / (1..=8u64).product::<u64>();
        assert_eq!(enumerate_sector(16, 8).unwrap().dim() as u64, direct);
        assert_eq!(enumerate_sector(5, 0).unwrap().dim(), 1);
        assert_eq!(enumerate_sector(5, 5).unwrap().dim(), 1);
        assert_eq!(enumerate_sector(0, 0).unwrap().dim(), 1);
    }

    #[test]
    fn sector_limits() {
        assert!(matches!(enumerate_sector(64, 2), Err(crate::Error::Capacity(_))));
        assert!(matches!(enumerate_sector(63, 31), Err(crate::Error::Capacity(_))));
        assert!(enumerate_sector(3, 4).is_err());
        assert_eq!(enumerate_sector(63, 1).unwrap().dim(), 63);
        assert_eq!(enumerate_sector(63, 63).unwrap().raw_states(), &[mask(63)]);
    }

    #[test]
    fn ranks() {
        let sec = enumerate_sector(4, 2).unwrap();
        assert_eq!(sec.rank(st(&[1, 1, 0, 0])), Some(0));
        assert_eq!(sec.rank(st(&[1, 0, 1, 0])), Some(1));
        assert_eq!(sec.rank(st(&[1, 1, 1, 0])), None);
    }

    #[test]
    fn hops() {
        // 1-based sites in the docs, 0-based here
        assert_eq!(apply_hop(st(&[1, 0, 1, 0]), 2, 1), Some(st(&[1, 1, 0, 0])));
        assert_eq!(apply_hop(st(&[1, 0, 1, 0]), 0, 2), None);
        assert_eq!(apply_hop(st(&[0, 1, 0, 1]), 1, 2), Some(st(&[0, 0, 1, 1])));
        assert_eq!(apply_hop(st(&[0, 1]), 1, 1), None);
        assert_eq!(apply_hop(st(&[0, 1]), 1, 5), None);
    }

    #[test]
    fn display_roundtrip() {
        let s = st(&[1, 0, 0, 1]);
        assert_eq!(alloc::format!("{s}"), "1001");
        assert_eq!("1001".parse::<FockState>().unwrap(), s);
        assert!("10x1".parse::<FockState>().is_err());
        assert_eq!(s.complement().occupations(), vec![0, 1, 1, 0]);
    }
}
