//! Hypercube / hyperpolyhedron subspace: the Fock states in which every unit
//! is half-filled, their escape couplings into the rest of the sector, and
//! the internal versus escape hopping sums.

use alloc::vec;
use alloc::vec::Vec;

use num_rational::Ratio;

use crate::error::{bail, Result};
use crate::hilbert::{BasisSector, FockState};
use crate::lattice::{EdgeClass, LatticeSpec};

/// Largest hypercube that [`hopping_sums_direct`] will walk.
pub const MAX_DIRECT_HYPER: u64 = 100_000_000;

/// Partition of a sector into hypercube and thermal ranks.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceSplit {
    /// Sector ranks with every unit half-filled, ascending.
    pub hyper: Vec<usize>,
    /// The remaining ranks, ascending.
    pub thermal: Vec<usize>,
    /// Escape coupling of each hypercube state, aligned with `hyper`.
    pub gamma: Vec<f64>,
}

impl SubspaceSplit {
    /// `(𝒟_H, 𝒟_T)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.hyper.len(), self.thermal.len())
    }

    /// Position of sector rank `r` inside `hyper`.
    pub fn hyper_index(&self, r: usize) -> Option<usize> {
        self.hyper.binary_search(&r).ok()
    }
}

fn check(spec: &LatticeSpec, sec: &BasisSector) -> Result<()> {
    if spec.sites() != sec.sites() {
        bail!(Contract, "lattice has {} sites but sector has {}", spec.sites(), sec.sites());
    }
    Ok(())
}

/// Splits the sector and computes the escape coupling of every hypercube
/// state.
pub fn identify_hyperpolyhedron(spec: &LatticeSpec, sec: &BasisSector) -> Result<SubspaceSplit> {
    check(spec, sec)?;
    let masks = spec.unit_masks();
    let halves: Vec<u32> = spec.units().iter().map(|u| (u.sites.len() / 2) as u32).collect();
    let mut hyper = Vec::new();
    let mut thermal = Vec::new();
    for (r, &s) in sec.raw_states().iter().enumerate() {
        if masks.iter().zip(&halves).all(|(&m, &h)| (s & m).count_ones() == h) {
            hyper.push(r);
        } else {
            thermal.push(r);
        }
    }
    let mut split = SubspaceSplit { hyper, thermal, gamma: Vec::new() };
    split.gamma = escape_coupling(&split, spec, sec)?;
    Ok(split)
}

/// Hypercube states with `γ = 0`: the collective states together with any
/// mixed patterns that are equally cut off from the thermal region.
pub fn decoupled_states(spec: &LatticeSpec, sec: &BasisSector) -> Result<Vec<FockState>> {
    let split = identify_hyperpolyhedron(spec, sec)?;
    Ok(split.hyper.iter().zip(&split.gamma).filter(|&(_, &g)| g == 0.0).map(|(&r, _)| sec.unrank(r)).collect())
}

/// Per hypercube state, `Σ |⟨p|H|q⟩|` over thermal `q`, from the inter-unit
/// bond classes.
pub fn escape_coupling(split: &SubspaceSplit, spec: &LatticeSpec, sec: &BasisSector) -> Result<Vec<f64>> {
    check(spec, sec)?;
    let bonds: Vec<(u64, f64)> = spec
        .edges()
        .iter()
        .filter(|e| e.class != EdgeClass::Intra && e.amplitude != 0.0)
        .map(|e| ((1u64 << e.u) | (1u64 << e.v), e.amplitude.abs()))
        .collect();
    let states = sec.raw_states();
    let mut gamma = vec![0.0; split.hyper.len()];
    for (g, &r) in gamma.iter_mut().zip(&split.hyper) {
        let s = states[r];
        for &(m, j) in &bonds {
            if (s & m).count_ones() == 1 {
                let t = sec.rank_bits(s ^ m).expect("hop stays inside the sector");
                if split.hyper_index(t).is_none() {
                    *g += j;
                }
            }
        }
    }
    Ok(gamma)
}

/// Escape coupling of a single hypercube state, no sector needed.
pub fn escape_coupling_of(spec: &LatticeSpec, s: FockState) -> f64 {
    spec.edges()
        .iter()
        .filter(|e| e.class != EdgeClass::Intra && e.amplitude != 0.0)
        .filter(|e| s.occupied(e.u) != s.occupied(e.v))
        .filter(|e| {
            let moved = FockState::new(s.bits() ^ (1 << e.u) ^ (1 << e.v), s.sites()).unwrap();
            !spec.is_hyper(moved)
        })
        .map(|e| e.amplitude.abs())
        .sum()
}

/// Hopping sums over unordered pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct HoppingSums {
    /// `Θ`: summed `|H_pq|` over hypercube–hypercube pairs.
    pub theta: f64,
    /// `Γ`: summed `|H_pq|` over hypercube–thermal pairs.
    pub gamma_sum: f64,
    /// `Θ/Γ`, infinite when `Γ = 0`.
    pub ratio: f64,
    /// Number of connected hypercube–hypercube pairs.
    pub hyper_pairs: u64,
    /// Number of connected hypercube–thermal pairs.
    pub escape_pairs: u64,
}

impl HoppingSums {
    fn new(theta: f64, gamma_sum: f64, hyper_pairs: u64, escape_pairs: u64) -> Self {
        let ratio = if gamma_sum == 0.0 { f64::INFINITY } else { theta / gamma_sum };
        Self { theta, gamma_sum, ratio, hyper_pairs, escape_pairs }
    }

    /// `hyper_pairs / escape_pairs`. Equals the ratio in units of `J0/J1`
    /// when only intra bonds connect hypercube states.
    pub fn pair_ratio(&self) -> Option<Ratio<u64>> {
        (self.escape_pairs > 0).then(|| Ratio::new(self.hyper_pairs, self.escape_pairs))
    }
}

/// Hopping sums from an explicit split.
pub fn hopping_sums(split: &SubspaceSplit, spec: &LatticeSpec, sec: &BasisSector) -> Result<HoppingSums> {
    check(spec, sec)?;
    let bonds: Vec<(u64, f64)> = spec
        .edges()
        .iter()
        .filter(|e| e.amplitude != 0.0)
        .map(|e| ((1u64 << e.u) | (1u64 << e.v), e.amplitude.abs()))
        .collect();
    let states = sec.raw_states();
    let (mut theta2, mut gamma) = (0.0, 0.0);
    let (mut hp2, mut ep) = (0u64, 0u64);
    for &r in &split.hyper {
        let s = states[r];
        for &(m, j) in &bonds {
            if (s & m).count_ones() == 1 {
                let t = sec.rank_bits(s ^ m).expect("hop stays inside the sector");
                if split.hyper_index(t).is_some() {
                    theta2 += j;
                    hp2 += 1;
                } else {
                    gamma += j;
                    ep += 1;
                }
            }
        }
    }
    Ok(HoppingSums::new(theta2 / 2.0, gamma, hp2 / 2, ep))
}

/// Hopping sums by walking the hypercube directly, without enumerating the
/// full sector. A hop along an intra bond keeps every unit half-filled; any
/// other bond changes two unit fillings and leaves the hypercube.
pub fn hopping_sums_direct(spec: &LatticeSpec) -> Result<HoppingSums> {
    if spec.sites() > crate::hilbert::MAX_SITES {
        bail!(Capacity, "{} sites exceeds the maximum of {}", spec.sites(), crate::hilbert::MAX_SITES);
    }
    // half-filled patterns of every unit, as global bit masks
    let patterns: Vec<Vec<u64>> = spec
        .units()
        .iter()
        .map(|u| {
            let k = u.sites.len();
            (0u32..1 << k)
                .filter(|p| p.count_ones() as usize * 2 == k)
                .map(|p| (0..k).filter(|&i| p >> i & 1 == 1).fold(0u64, |m, i| m | 1 << u.sites[i]))
                .collect()
        })
        .collect();
    let total = patterns.iter().try_fold(1u64, |acc, p| acc.checked_mul(p.len() as u64));
    match total {
        Some(t) if t <= MAX_DIRECT_HYPER => {}
        _ => bail!(Capacity, "hypercube too large to enumerate (limit {MAX_DIRECT_HYPER})"),
    }
    let intra: Vec<(u64, f64)> = spec
        .edges()
        .iter()
        .filter(|e| e.class == EdgeClass::Intra && e.amplitude != 0.0)
        .map(|e| ((1u64 << e.u) | (1u64 << e.v), e.amplitude.abs()))
        .collect();
    let other: Vec<(u64, f64)> = spec
        .edges()
        .iter()
        .filter(|e| e.class != EdgeClass::Intra && e.amplitude != 0.0)
        .map(|e| ((1u64 << e.u) | (1u64 << e.v), e.amplitude.abs()))
        .collect();
    let mut digits = vec![0usize; patterns.len()];
    let (mut theta2, mut gamma) = (0.0, 0.0);
    let (mut hp2, mut ep) = (0u64, 0u64);
    loop {
        let s = digits.iter().zip(&patterns).fold(0u64, |acc, (&d, p)| acc | p[d]);
        for &(m, j) in &intra {
            if (s & m).count_ones() == 1 {
                theta2 += j;
                hp2 += 1;
            }
        }
        for &(m, j) in &other {
            if (s & m).count_ones() == 1 {
                gamma += j;
                ep += 1;
            }
        }
        // odometer increment
        let mut k = 0;
        loop {
            if k == digits.len() {
                return Ok(HoppingSums::new(theta2 / 2.0, gamma, hp2 / 2, ep));
            }
            digits[k] += 1;
            if digits[k] < patterns[k].len() {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
    }
}

/// Geometry families with closed-form hopping ratios.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum RatioKind {
    OneD { n: u64 },
    TwoD { nx: u64, ny: u64 },
    ThreeD { nx: u64, ny: u64, nz: u64 },
    MdLimit { m: u32 },
}

/// Closed-form `Θ/Γ` in units of `J0/J1`, as an exact rational.
///
/// * chain of `N` dimers: `N/(N-1)`;
/// * tetramer grid: `(4/3)·NxNy / (2NxNy − Nx − Ny)`;
/// * octamer grid: `(24/7)·NxNyNz / (2(3NxNyNz − NxNy − NyNz − NzNx))`;
/// * `M`-dimensional limit: `2^{M-1} / (2^M − 1)`.
pub fn ratio_coefficient(kind: RatioKind) -> Result<Ratio<u64>> {
    match kind {
        RatioKind::OneD { n } => {
            if n < 2 {
                bail!(Geometry, "the chain ratio needs N >= 2, got {n}");
            }
            Ok(Ratio::new(n, n - 1))
        }
        RatioKind::TwoD { nx, ny } => {
            if nx == 0 || ny == 0 || nx * ny < 2 {
                bail!(Geometry, "the 2D ratio needs at least two coupled tetramers, got {nx}x{ny}");
            }
            Ok(Ratio::new(4 * nx * ny, 3 * (2 * nx * ny - nx - ny)))
        }
        RatioKind::ThreeD { nx, ny, nz } => {
            let v = nx * ny * nz;
            if nx == 0 || ny == 0 || nz == 0 || v < 2 {
                bail!(Geometry, "the 3D ratio needs at least two coupled octamers, got {nx}x{ny}x{nz}");
            }
            let a = 3 * v - nx * ny - ny * nz - nz * nx;
            Ok(Ratio::new(24 * v, 7 * 2 * a))
        }
        RatioKind::MdLimit { m } => {
            if m == 0 || m > 62 {
                bail!(Geometry, "dimension M = {m} outside 1..=62");
            }
            Ok(Ratio::new(1u64 << (m - 1), (1u64 << m) - 1))
        }
    }
}

/// Closed-form ratio as a float, `coefficient · J0/J1`.
pub fn ratio_closed_form(kind: RatioKind, j0: f64, j1: f64) -> Result<f64> {
    let c = ratio_coefficient(kind)?;
    Ok(*c.numer() as f64 / *c.denom() as f64 * j0 / j1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::enumerate_sector;
    use crate::lattice::{collective_states, Boundary};

    #[test]
    fn decoupled_states_cover_the_collective_set() {
        let spec = LatticeSpec::tetramer_grid(2, 2, 2.5, 1.0).unwrap();
        let sec = enumerate_sector(16, 8).unwrap();
        let free = decoupled_states(&spec, &sec).unwrap();
        let set = collective_states(&spec);
        assert!(set.states().iter().all(|s| free.contains(s)));
        assert_eq!(free.len(), 14);
        let leaky: FockState = "1001011000110101".parse().unwrap();
        assert_eq!(escape_coupling_of(&spec, leaky), 4.0);
        assert!(!free.contains(&leaky));
    }

    #[test]
    fn two_dimer_split() {
        let spec = LatticeSpec::ssh(2, 1.0, 0.7, 0.0, Boundary::Open).unwrap();
        let sec = enumerate_sector(4, 2).unwrap();
        let split = identify_hyperpolyhedron(&spec, &sec).unwrap();
        assert_eq!(split.dims(), (4, 2));
        let want: Vec<usize> =
            [0b0101u64, 0b1001, 0b0110, 0b1010].iter().map(|&b| sec.rank_bits(b).unwrap()).collect::<Vec<_>>();
        let mut want = want;
        want.sort_unstable();
        assert_eq!(split.hyper, want);
        let g = |bits: u64| split.gamma[split.hyper_index(sec.rank_bits(bits).unwrap()).unwrap()];
        // (1,0,1,0) escapes to (1,1,0,0); (1,0,0,1) does not
        assert_eq!(g(0b0101), 0.7);
        assert_eq!(g(0b1001), 0.0);
        let sums = hopping_sums(&split, &spec, &sec).unwrap();
        assert_eq!((sums.theta, sums.gamma_sum), (4.0, 1.4));
        assert_eq!(sums, hopping_sums_direct(&spec).unwrap());
    }

    #[test]
    fn long_range_opens_escape() {
        let spec = LatticeSpec::ssh(3, 1.0, 1.0, -0.2, Boundary::Open).unwrap();
        let c = collective_states(&spec).get(crate::lattice::CollectiveLabel::C).unwrap();
        assert!(escape_coupling_of(&spec, c) > 0.0);
    }

    #[test]
    fn decoupled_ratio_is_infinite() {
        let spec = LatticeSpec::ssh(3, 1.0, 0.0, 0.0, Boundary::Open).unwrap();
        let sums = hopping_sums_direct(&spec).unwrap();
        assert!(sums.ratio.is_infinite());
        assert!(sums.pair_ratio().is_none());
    }

    #[test]
    fn closed_forms() {
        assert_eq!(ratio_coefficient(RatioKind::OneD { n: 5 }).unwrap(), Ratio::new(5, 4));
        assert_eq!(ratio_coefficient(RatioKind::MdLimit { m: 3 }).unwrap(), Ratio::new(4, 7));
        assert_eq!(ratio_coefficient(RatioKind::MdLimit { m: 1 }).unwrap(), Ratio::new(1, 1));
        assert_eq!(ratio_coefficient(RatioKind::TwoD { nx: 2, ny: 2 }).unwrap(), Ratio::new(16, 12));
        assert!(ratio_coefficient(RatioKind::OneD { n: 1 }).is_err());
        assert!(ratio_coefficient(RatioKind::TwoD { nx: 1, ny: 1 }).is_err());
        assert!(ratio_coefficient(RatioKind::MdLimit { m: 0 }).is_err());
        assert!((ratio_closed_form(RatioKind::OneD { n: 5 }, 2.0, 1.0).unwrap() - 2.5).abs() < 1e-15);
    }
}
