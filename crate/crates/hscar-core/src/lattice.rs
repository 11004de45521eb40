//! Lattice geometries built from dimers, tetramers and octamers, and their
//! collective Fock states.
//!
//! Site numbering:
//! * dimer chains: `a1, b1, a2, b2, ...`, so `a_α = 2(α-1)` and `b_α = 2α-1`;
//! * tetramer grids: site `4u + k` with `k ∈ {TL, TR, BL, BR} = {0, 1, 2, 3}`
//!   and unit `u = X + Nx·Y` (`Y` grows downwards);
//! * octamer grids: site `8u + c` with corner `c = x + 2y + 4z` and unit
//!   `u = X + Nx·(Y + Ny·Z)`.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{bail, Result};
use crate::hilbert::{FockState, MAX_SITES};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum UnitKind {
    Dimer,
    Tetramer,
    Octamer,
}

impl UnitKind {
    pub fn size(self) -> usize {
        match self {
            UnitKind::Dimer => 2,
            UnitKind::Tetramer => 4,
            UnitKind::Octamer => 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Unit {
    pub kind: UnitKind,
    /// Member sites in local order (`[a, b]`, `[TL, TR, BL, BR]`, cube corners).
    pub sites: Vec<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum EdgeClass {
    Intra,
    Inter,
    LongRange,
}

#[derive(Copy, Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub amplitude: f64,
    pub class: EdgeClass,
}

impl Edge {
    fn key(&self) -> (usize, usize) {
        (self.u.min(self.v), self.u.max(self.v))
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Boundary {
    Open,
    Periodic,
}

/// Which builder produced a spec. Used for symmetries, cuts and collective
/// states.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case"))]
pub enum Geometry {
    Ssh { dimers: usize },
    Comb { dimers: usize },
    RandomCluster { dimers: usize, seed: u64 },
    TetramerGrid { nx: usize, ny: usize },
    OctamerGrid { nx: usize, ny: usize, nz: usize },
    Custom,
}

/// Deserialising runs [`LatticeSpec::validate`].
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "RawLatticeSpec"))]
pub struct LatticeSpec {
    sites: usize,
    units: Vec<Unit>,
    edges: Vec<Edge>,
    boundary: Boundary,
    onsite: Vec<f64>,
    geometry: Geometry,
}

#[cfg(feature = "serde")]
#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLatticeSpec {
    sites: usize,
    units: Vec<Unit>,
    edges: Vec<Edge>,
    boundary: Boundary,
    #[serde(default)]
    onsite: Option<Vec<f64>>,
    #[serde(default = "custom_geometry")]
    geometry: Geometry,
}

#[cfg(feature = "serde")]
fn custom_geometry() -> Geometry {
    Geometry::Custom
}

#[cfg(feature = "serde")]
impl TryFrom<RawLatticeSpec> for LatticeSpec {
    type Error = crate::Error;

    fn try_from(raw: RawLatticeSpec) -> Result<Self> {
        let spec = Self::from_parts(raw.units, raw.edges, raw.boundary, raw.onsite, raw.geometry)?;
        if spec.sites != raw.sites {
            bail!(Geometry, "declared {} sites, units cover {}", raw.sites, spec.sites);
        }
        Ok(spec)
    }
}

fn check_coupling(name: &str, j: f64) -> Result<()> {
    if !j.is_finite() {
        bail!(Geometry, "coupling {name} = {j} is not finite");
    }
    Ok(())
}

struct EdgeSet {
    edges: Vec<Edge>,
}

impl EdgeSet {
    fn new() -> Self {
        Self { edges: Vec::new() }
    }

    /// Adds an edge, summing amplitudes if the same undirected bond of the
    /// same class is already present.
    fn add(&mut self, u: usize, v: usize, amplitude: f64, class: EdgeClass) -> Result<()> {
        let e = Edge { u, v, amplitude, class };
        if let Some(prev) = self.edges.iter_mut().find(|p| p.key() == e.key()) {
            if prev.class != class {
                bail!(Geometry, "bond ({u},{v}) appears as both {:?} and {:?}", prev.class, class);
            }
            prev.amplitude += amplitude;
            return Ok(());
        }
        self.edges.push(e);
        Ok(())
    }
}

#[inline]
fn a(alpha: usize) -> usize {
    2 * alpha
}
#[inline]
fn b(alpha: usize) -> usize {
    2 * alpha + 1
}

fn dimer_units(n: usize) -> Vec<Unit> {
    (0..n).map(|al| Unit { kind: UnitKind::Dimer, sites: vec![a(al), b(al)] }).collect()
}

impl LatticeSpec {
    /// Assembles a spec from parts and validates it.
    pub fn from_parts(
        units: Vec<Unit>,
        edges: Vec<Edge>,
        boundary: Boundary,
        onsite: Option<Vec<f64>>,
        geometry: Geometry,
    ) -> Result<Self> {
        let sites = units.iter().map(|u| u.sites.len()).sum();
        let onsite = onsite.unwrap_or_else(|| vec![0.0; sites]);
        let spec = Self { sites, units, edges, boundary, onsite, geometry };
        spec.validate()?;
        Ok(spec)
    }

    /// SSH chain of `n` dimers with intra `j0`, inter `j1` and long-range `j3`.
    ///
    /// Long-range bonds `(a_α, b_{α+1})` and `(b_α, a_{α+2})` are only added
    /// when `j3 != 0`. With periodic boundaries all three classes wrap; for
    /// `n = 3` the two long-range families land on the same bonds and their
    /// amplitudes add.
    pub fn ssh(n: usize, j0: f64, j1: f64, j3: f64, boundary: Boundary) -> Result<Self> {
        if n < 2 {
            bail!(Geometry, "an SSH chain needs at least 2 dimers, got {n}");
        }
        if boundary == Boundary::Periodic && n < 3 {
            bail!(Geometry, "a periodic SSH chain needs at least 3 dimers, got {n}");
        }
        for (name, j) in [("J0", j0), ("J1", j1), ("J3", j3)] {
            check_coupling(name, j)?;
        }
        let pbc = boundary == Boundary::Periodic;
        let wrap = |k: usize| if k < n { Some(k) } else if pbc { Some(k % n) } else { None };
        let mut es = EdgeSet::new();
        for al in 0..n {
            es.add(a(al), b(al), j0, EdgeClass::Intra)?;
        }
        for al in 0..n {
            if let Some(be) = wrap(al + 1) {
                es.add(b(al), a(be), j1, EdgeClass::Inter)?;
            }
        }
        if j3 != 0.0 {
            for al in 0..n {
                if let Some(be) = wrap(al + 1) {
                    es.add(a(al), b(be), j3, EdgeClass::LongRange)?;
                }
            }
            for al in 0..n {
                if let Some(be) = wrap(al + 2) {
                    es.add(b(al), a(be), j3, EdgeClass::LongRange)?;
                }
            }
        }
        Self::from_parts(dimer_units(n), es.edges, boundary, None, Geometry::Ssh { dimers: n })
    }

    /// Comb: J1 backbone on the `a` sites, `b` sites as teeth.
    pub fn comb(n: usize, j0: f64, j1: f64) -> Result<Self> {
        if n < 2 {
            bail!(Geometry, "a comb needs at least 2 dimers, got {n}");
        }
        check_coupling("J0", j0)?;
        check_coupling("J1", j1)?;
        let mut es = EdgeSet::new();
        for al in 0..n {
            es.add(a(al), b(al), j0, EdgeClass::Intra)?;
        }
        for al in 0..n - 1 {
            es.add(a(al), a(al + 1), j1, EdgeClass::Inter)?;
        }
        Self::from_parts(dimer_units(n), es.edges, Boundary::Open, None, Geometry::Comb { dimers: n })
    }

    /// Random connected dimer cluster. A random spanning tree is grown first;
    /// extra bonds are then added only when they keep a collective state
    /// with zero escape coupling. Every site carries at most two inter bonds
    /// and each dimer pair at most one.
    pub fn random_cluster(n: usize, j0: f64, j1: f64, seed: u64) -> Result<Self> {
        if n < 2 {
            bail!(Geometry, "a cluster needs at least 2 dimers, got {n}");
        }
        check_coupling("J0", j0)?;
        check_coupling("J1", j1)?;
        let geometry = Geometry::RandomCluster { dimers: n, seed };
        let mut es = EdgeSet::new();
        for al in 0..n {
            es.add(a(al), b(al), j0, EdgeClass::Intra)?;
        }
        let inter = match grow_cluster(n, seed) {
            Some(bonds) => bonds,
            None => (0..n - 1).map(|al| (b(al), a(al + 1))).collect(),
        };
        for (u, v) in inter {
            es.add(u, v, j1, EdgeClass::Inter)?;
        }
        Self::from_parts(dimer_units(n), es.edges, Boundary::Open, None, geometry)
    }

    /// `nx × ny` grid of tetramers. Neighbouring tetramers share two parallel
    /// J1 bonds.
    pub fn tetramer_grid(nx: usize, ny: usize, j0: f64, j1: f64) -> Result<Self> {
        if nx == 0 || ny == 0 {
            bail!(Geometry, "tetramer grid extents must be positive, got {nx}x{ny}");
        }
        check_coupling("J0", j0)?;
        check_coupling("J1", j1)?;
        const TL: usize = 0;
        const TR: usize = 1;
        const BL: usize = 2;
        const BR: usize = 3;
        let unit = |x: usize, y: usize| x + nx * y;
        let site = |u: usize, k: usize| 4 * u + k;
        let mut units = Vec::new();
        let mut es = EdgeSet::new();
        for y in 0..ny {
            for x in 0..nx {
                let u = unit(x, y);
                units.push(Unit { kind: UnitKind::Tetramer, sites: (0..4).map(|k| site(u, k)).collect() });
                for (p, q) in [(TL, TR), (BL, BR), (TL, BL), (TR, BR)] {
                    es.add(site(u, p), site(u, q), j0, EdgeClass::Intra)?;
                }
            }
        }
        for y in 0..ny {
            for x in 0..nx {
                let u = unit(x, y);
                if x + 1 < nx {
                    let w = unit(x + 1, y);
                    es.add(site(u, TR), site(w, TL), j1, EdgeClass::Inter)?;
                    es.add(site(u, BR), site(w, BL), j1, EdgeClass::Inter)?;
                }
                if y + 1 < ny {
                    let w = unit(x, y + 1);
                    es.add(site(u, BL), site(w, TL), j1, EdgeClass::Inter)?;
                    es.add(site(u, BR), site(w, TR), j1, EdgeClass::Inter)?;
                }
            }
        }
        Self::from_parts(units, es.edges, Boundary::Open, None, Geometry::TetramerGrid { nx, ny })
    }

    /// `nx × ny × nz` grid of octamers (cube graphs). Face-adjacent octamers
    /// share four parallel J1 bonds.
    pub fn octamer_grid(nx: usize, ny: usize, nz: usize, j0: f64, j1: f64) -> Result<Self> {
        if nx == 0 || ny == 0 || nz == 0 {
            bail!(Geometry, "octamer grid extents must be positive, got {nx}x{ny}x{nz}");
        }
        check_coupling("J0", j0)?;
        check_coupling("J1", j1)?;
        let unit = |x: usize, y: usize, z: usize| x + nx * (y + ny * z);
        let site = |u: usize, c: usize| 8 * u + c;
        let mut units = Vec::new();
        let mut es = EdgeSet::new();
        for z in 0..nz {
            for y in 0..ny {
                for x in 0..nx {
                    let u = unit(x, y, z);
                    units.push(Unit { kind: UnitKind::Octamer, sites: (0..8).map(|c| site(u, c)).collect() });
                    for c in 0..8 {
                        for bit in [1, 2, 4] {
                            if c & bit == 0 {
                                es.add(site(u, c), site(u, c | bit), j0, EdgeClass::Intra)?;
                            }
                        }
                    }
                }
            }
        }
        for z in 0..nz {
            for y in 0..ny {
                for x in 0..nx {
                    let u = unit(x, y, z);
                    let neighbours = [
                        (x + 1 < nx, 1usize, if x + 1 < nx { unit(x + 1, y, z) } else { 0 }),
                        (y + 1 < ny, 2, if y + 1 < ny { unit(x, y + 1, z) } else { 0 }),
                        (z + 1 < nz, 4, if z + 1 < nz { unit(x, y, z + 1) } else { 0 }),
                    ];
                    for (present, bit, w) in neighbours {
                        if !present {
                            continue;
                        }
                        for c in (0..8).filter(|c| c & bit != 0) {
                            es.add(site(u, c), site(w, c ^ bit), j1, EdgeClass::Inter)?;
                        }
                    }
                }
            }
        }
        Self::from_parts(units, es.edges, Boundary::Open, None, Geometry::OctamerGrid { nx, ny, nz })
    }

    /// Replaces the on-site energies.
    pub fn with_onsite(mut self, onsite: Vec<f64>) -> Result<Self> {
        self.onsite = onsite;
        self.validate()?;
        Ok(self)
    }

    /// Checks every structural invariant. Call after deserialising.
    pub fn validate(&self) -> Result<()> {
        if self.units.is_empty() {
            bail!(Geometry, "lattice has no units");
        }
        let mut owner = vec![usize::MAX; self.sites];
        for (ui, unit) in self.units.iter().enumerate() {
            if unit.sites.len() != unit.kind.size() {
                bail!(Geometry, "unit {ui} is a {:?} with {} sites", unit.kind, unit.sites.len());
            }
            for &s in &unit.sites {
                if s >= self.sites {
                    bail!(Geometry, "unit {ui} references site {s} beyond {}", self.sites);
                }
                if owner[s] != usize::MAX {
                    bail!(Geometry, "site {s} belongs to units {} and {ui}", owner[s]);
                }
                owner[s] = ui;
            }
        }
        if let Some(s) = owner.iter().position(|&o| o == usize::MAX) {
            bail!(Geometry, "site {s} belongs to no unit");
        }
        if self.onsite.len() != self.sites {
            bail!(Geometry, "{} on-site energies for {} sites", self.onsite.len(), self.sites);
        }
        if self.onsite.iter().any(|w| !w.is_finite()) {
            bail!(Geometry, "non-finite on-site energy");
        }
        let mut seen = BTreeSet::new();
        for e in &self.edges {
            if e.u >= self.sites || e.v >= self.sites || e.u == e.v {
                bail!(Geometry, "bad bond ({}, {})", e.u, e.v);
            }
            if !e.amplitude.is_finite() {
                bail!(Geometry, "bond ({}, {}) has non-finite amplitude", e.u, e.v);
            }
            if !seen.insert(e.key()) {
                bail!(Geometry, "duplicate bond ({}, {})", e.u, e.v);
            }
            let same = owner[e.u] == owner[e.v];
            match (e.class, same) {
                (EdgeClass::Intra, false) => bail!(Geometry, "intra bond ({}, {}) joins two units", e.u, e.v),
                (EdgeClass::Inter | EdgeClass::LongRange, true) => {
                    bail!(Geometry, "inter-unit bond ({}, {}) lies inside one unit", e.u, e.v)
                }
                _ => {}
            }
        }
        if self.units.iter().all(|u| u.kind == UnitKind::Dimer) {
            let mut degree = vec![0usize; self.sites];
            let mut pairs = BTreeSet::new();
            for e in self.edges.iter().filter(|e| e.class == EdgeClass::Inter) {
                degree[e.u] += 1;
                degree[e.v] += 1;
                let p = (owner[e.u].min(owner[e.v]), owner[e.u].max(owner[e.v]));
                if !pairs.insert(p) {
                    bail!(Geometry, "dimers {} and {} share more than one inter bond", p.0, p.1);
                }
            }
            if let Some(s) = degree.iter().position(|&d| d > 2) {
                bail!(Geometry, "site {s} has more than two inter bonds");
            }
        }
        Ok(())
    }

    #[inline]
    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn onsite(&self) -> &[f64] {
        &self.onsite
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    /// Half-filling particle count.
    pub fn half_filling(&self) -> usize {
        self.sites / 2
    }

    /// Unit index of every site.
    pub fn unit_of_site(&self) -> Vec<usize> {
        let mut owner = vec![0; self.sites];
        for (ui, unit) in self.units.iter().enumerate() {
            for &s in &unit.sites {
                owner[s] = ui;
            }
        }
        owner
    }

    /// Bit mask of every unit.
    pub fn unit_masks(&self) -> Vec<u64> {
        self.units.iter().map(|u| u.sites.iter().fold(0u64, |m, &s| m | 1 << s)).collect()
    }

    /// True if every unit is half-filled in `s`.
    pub fn is_hyper(&self, s: FockState) -> bool {
        self.units
            .iter()
            .all(|u| u.sites.iter().filter(|&&i| s.occupied(i)).count() * 2 == u.sites.len())
    }

    pub fn uniform_onsite(&self) -> bool {
        self.onsite.windows(2).all(|w| w[0] == w[1])
    }

    /// Sites on the left of the standard bipartition: the first `L/2` sites
    /// for dimer geometries (an odd dimer count splits the middle dimer),
    /// the left `⌈Nx/2⌉` columns for grids.
    pub fn half_cut(&self) -> Vec<usize> {
        let keep: Vec<usize> = match self.geometry {
            Geometry::TetramerGrid { nx, ny } => {
                (0..nx * ny).filter(|u| u % nx < nx.div_ceil(2)).collect()
            }
            Geometry::OctamerGrid { nx, ny, nz } => {
                (0..nx * ny * nz).filter(|u| u % nx < nx.div_ceil(2)).collect()
            }
            _ => return (0..self.sites / 2).collect(),
        };
        let mut cut: Vec<usize> = keep.iter().flat_map(|&u| self.units[u].sites.iter().copied()).collect();
        cut.sort_unstable();
        cut
    }

    /// Spatial involutions of the geometry as site permutations. Candidates
    /// only; [`crate::symmetry`] checks that each one preserves the bonds.
    pub fn spatial_involutions(&self) -> Vec<Vec<usize>> {
        match self.geometry {
            Geometry::Ssh { .. } => vec![(0..self.sites).rev().collect()],
            Geometry::Comb { dimers } => {
                vec![(0..self.sites).map(|s| 2 * (dimers - 1 - s / 2) + s % 2).collect()]
            }
            Geometry::TetramerGrid { nx, ny } => {
                let map = |flip_x: bool| -> Vec<usize> {
                    (0..self.sites)
                        .map(|s| {
                            let (u, k) = (s / 4, s % 4);
                            let (mut x, mut y) = (u % nx, u / nx);
                            let (mut lx, mut ly) = (k & 1, k >> 1);
                            if flip_x {
                                x = nx - 1 - x;
                                lx ^= 1;
                            } else {
                                y = ny - 1 - y;
                                ly ^= 1;
                            }
                            4 * (x + nx * y) + lx + 2 * ly
                        })
                        .collect()
                };
                vec![map(true), map(false)]
            }
            Geometry::OctamerGrid { nx, ny, nz } => {
                let dims = [nx, ny, nz];
                (0..3)
                    .map(|axis| {
                        (0..self.sites)
                            .map(|s| {
                                let (u, c) = (s / 8, s % 8);
                                let mut pos = [u % nx, (u / nx) % ny, u / (nx * ny)];
                                pos[axis] = dims[axis] - 1 - pos[axis];
                                let c = c ^ (1 << axis);
                                8 * (pos[0] + nx * (pos[1] + ny * pos[2])) + c
                            })
                            .collect()
                    })
                    .collect()
            }
            Geometry::RandomCluster { .. } | Geometry::Custom => Vec::new(),
        }
    }
}

/// Grows a random spanning tree plus compatible extra bonds. Returns `None`
/// if the bounded random search fails, in which case the caller falls back
/// to a chain.
fn grow_cluster(n: usize, seed: u64) -> Option<Vec<(usize, usize)>> {
    const TRIES: usize = 64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut degree = vec![0u8; 2 * n];
    // occupation of site a_α in the collective state
    let mut xa = vec![0u8; n];
    let mut linked = BTreeSet::new();
    let mut bonds = Vec::new();
    for beta in 1..n {
        let mut placed = false;
        for _ in 0..TRIES {
            let alpha = rng.gen_range(0..beta);
            let (pu, pv) = (rng.gen_range(0..2usize), rng.gen_range(0..2usize));
            let (u, v) = (2 * alpha + pu, 2 * beta + pv);
            if degree[u] < 2 && degree[v] < 2 {
                degree[u] += 1;
                degree[v] += 1;
                xa[beta] = xa[alpha] ^ pu as u8 ^ pv as u8;
                linked.insert((alpha, beta));
                bonds.push((u, v));
                placed = true;
                break;
            }
        }
        if !placed {
            return None;
        }
    }
    for _ in 0..n {
        let alpha = rng.gen_range(0..n);
        let beta = rng.gen_range(0..n);
        let (pu, pv) = (rng.gen_range(0..2usize), rng.gen_range(0..2usize));
        if alpha == beta || linked.contains(&(alpha.min(beta), alpha.max(beta))) {
            continue;
        }
        let (u, v) = (2 * alpha + pu, 2 * beta + pv);
        if degree[u] >= 2 || degree[v] >= 2 || xa[alpha] ^ pu as u8 != xa[beta] ^ pv as u8 {
            continue;
        }
        degree[u] += 1;
        degree[v] += 1;
        linked.insert((alpha.min(beta), alpha.max(beta)));
        bonds.push((u, v));
    }
    Some(bonds)
}

/// Names of the collective states.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CollectiveLabel {
    C,
    CPrime,
    Parallel,
    ParallelPrime,
    Equal,
    EqualPrime,
    Cross,
    CrossPrime,
    Star,
}

impl CollectiveLabel {
    pub const ALL: [CollectiveLabel; 9] = [
        Self::C,
        Self::CPrime,
        Self::Parallel,
        Self::ParallelPrime,
        Self::Equal,
        Self::EqualPrime,
        Self::Cross,
        Self::CrossPrime,
        Self::Star,
    ];

    /// ASCII name used in configs and output files.
    pub fn name(self) -> &'static str {
        match self {
            Self::C => "C",
            Self::CPrime => "C'",
            Self::Parallel => "C_par",
            Self::ParallelPrime => "C_par'",
            Self::Equal => "C_eq",
            Self::EqualPrime => "C_eq'",
            Self::Cross => "C_x",
            Self::CrossPrime => "C_x'",
            Self::Star => "C_star",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.name() == name)
    }
}

impl core::fmt::Display for CollectiveLabel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollectiveStateSet {
    entries: Vec<(CollectiveLabel, FockState)>,
    frustrated_bonds: usize,
}

impl CollectiveStateSet {
    pub fn get(&self, label: CollectiveLabel) -> Option<FockState> {
        self.entries.iter().find(|(l, _)| *l == label).map(|&(_, s)| s)
    }

    pub fn iter(&self) -> impl Iterator<Item = (CollectiveLabel, FockState)> + '_ {
        self.entries.iter().copied()
    }

    pub fn states(&self) -> Vec<FockState> {
        self.entries.iter().map(|&(_, s)| s).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Inter bonds whose endpoints differ in occupation. Nonzero only for
    /// periodic SSH chains with an odd number of dimers.
    pub fn frustrated_bonds(&self) -> usize {
        self.frustrated_bonds
    }
}

/// Collective Fock states of a lattice.
///
/// Dimer geometries give `C` and `C'`: half-filled states where every
/// inter bond joins equal occupations, `C` being the one with `b` occupied
/// in the last dimer. Tetramer grids give the column, row and diagonal
/// classes, octamer grids `C_star` plus the same three classes replicated.
pub fn collective_states(spec: &LatticeSpec) -> CollectiveStateSet {
    let kinds: BTreeSet<_> = spec.units.iter().map(|u| u.kind as u8).collect();
    if kinds.len() != 1 || spec.sites > MAX_SITES {
        return CollectiveStateSet { entries: Vec::new(), frustrated_bonds: 0 };
    }
    let l = spec.sites;
    let build = |occ: &dyn Fn(usize) -> bool| -> FockState {
        let bits = (0..l).filter(|&s| occ(s)).fold(0u64, |m, s| m | 1 << s);
        FockState::from_raw(bits, l)
    };
    let mut entries = Vec::new();
    match (spec.units[0].kind, spec.geometry) {
        (UnitKind::Dimer, _) => {
            let (c, frustrated) = dimer_collective(spec);
            if frustrated > 0 && !matches!(spec.geometry, Geometry::Ssh { .. }) {
                return CollectiveStateSet { entries, frustrated_bonds: frustrated };
            }
            entries.push((CollectiveLabel::C, c));
            entries.push((CollectiveLabel::CPrime, c.complement()));
            return CollectiveStateSet { entries, frustrated_bonds: frustrated };
        }
        (UnitKind::Tetramer, Geometry::TetramerGrid { nx, .. }) => {
            let coords = |s: usize| {
                let (u, k) = (s / 4, s % 4);
                (k & 1, k >> 1, u % nx, u / nx)
            };
            let par = build(&|s| {
                let (x, _, gx, _) = coords(s);
                x == gx % 2
            });
            let eq = build(&|s| {
                let (_, y, _, gy) = coords(s);
                y == gy % 2
            });
            let cross = build(&|s| {
                let (x, y, gx, gy) = coords(s);
                (x ^ y ^ gx ^ gy) & 1 == 0
            });
            for (lab, st) in [
                (CollectiveLabel::Parallel, par),
                (CollectiveLabel::ParallelPrime, par.complement()),
                (CollectiveLabel::Equal, eq),
                (CollectiveLabel::EqualPrime, eq.complement()),
                (CollectiveLabel::Cross, cross),
                (CollectiveLabel::CrossPrime, cross.complement()),
            ] {
                entries.push((lab, st));
            }
        }
        (UnitKind::Octamer, Geometry::OctamerGrid { nx, ny, .. }) => {
            let coords = |s: usize| {
                let (u, c) = (s / 8, s % 8);
                (c & 1, (c >> 1) & 1, c >> 2, u % nx, (u / nx) % ny, u / (nx * ny))
            };
            let star = build(&|s| {
                let (x, y, z, gx, gy, gz) = coords(s);
                (x ^ y ^ z ^ gx ^ gy ^ gz) & 1 == 0
            });
            let par = build(&|s| {
                let (x, _, _, gx, _, _) = coords(s);
                x == gx % 2
            });
            let eq = build(&|s| {
                let (_, y, _, _, gy, _) = coords(s);
                y == gy % 2
            });
            let cross = build(&|s| {
                let (x, y, _, gx, gy, _) = coords(s);
                (x ^ y ^ gx ^ gy) & 1 == 0
            });
            for (lab, st) in [
                (CollectiveLabel::Star, star),
                (CollectiveLabel::Parallel, par),
                (CollectiveLabel::ParallelPrime, par.complement()),
                (CollectiveLabel::Equal, eq),
                (CollectiveLabel::EqualPrime, eq.complement()),
                (CollectiveLabel::Cross, cross),
                (CollectiveLabel::CrossPrime, cross.complement()),
            ] {
                entries.push((lab, st));
            }
        }
        _ => {}
    }
    CollectiveStateSet { entries, frustrated_bonds: 0 }
}

/// Propagates the equal-occupation constraint over the inter bonds,
/// starting from the highest-index dimer with `b` occupied. Returns the state
/// and the number of violated bonds.
fn dimer_collective(spec: &LatticeSpec) -> (FockState, usize) {
    let n = spec.units.len();
    let owner = spec.unit_of_site();
    // sublattice of a site: 0 for a, 1 for b
    let sub = |s: usize| usize::from(spec.units[owner[s]].sites[1] == s) as u8;
    let inter: Vec<&Edge> = spec.edges.iter().filter(|e| e.class == EdgeClass::Inter).collect();
    let mut xa: Vec<Option<u8>> = vec![None; n];
    for root in (0..n).rev() {
        if xa[root].is_some() {
            continue;
        }
        xa[root] = Some(0);
        let mut stack = vec![root];
        while let Some(d) = stack.pop() {
            for e in &inter {
                let (du, dv) = (owner[e.u], owner[e.v]);
                let (from, to, other) = if du == d {
                    (e.u, e.v, dv)
                } else if dv == d {
                    (e.v, e.u, du)
                } else {
                    continue;
                };
                if xa[other].is_none() {
                    xa[other] = Some(xa[d].unwrap() ^ sub(from) ^ sub(to));
                    stack.push(other);
                }
            }
        }
    }
    let occ = |s: usize| xa[owner[s]].unwrap() ^ sub(s) == 1;
    let frustrated = inter.iter().filter(|e| occ(e.u) != occ(e.v)).count();
    let bits = (0..spec.sites).filter(|&s| occ(s)).fold(0u64, |m, s| m | 1 << s);
    (FockState::from_raw(bits, spec.sites), frustrated)
}
