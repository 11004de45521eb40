//! Versioned experiment configuration.
//!
//! A config is a TOML document; every key is listed in [`ExperimentConfig`]
//! and its sub-blocks, and anything else is rejected.

use std::path::{Path, PathBuf};

use hscar_core::hilbert::FockState;
use hscar_core::hda::SelfEnergyModel;
use hscar_core::krylov::KrylovConfig;
use hscar_core::lattice::{collective_states, Boundary, CollectiveLabel, LatticeSpec};
use hscar_core::stats::TowerConfig;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Error, Result};
use crate::spectral::DEFAULT_EIGEN_CAP;

/// The only schema version understood by this build.
pub const CONFIG_VERSION: u32 = 1;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Ssh,
    Comb,
    RandomCluster,
    #[serde(rename = "tetramer-2d")]
    Tetramer2d,
    #[serde(rename = "octamer-3d")]
    Octamer3d,
    /// Lattice read from `lattice_file`.
    Custom,
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryChoice {
    #[default]
    Open,
    Periodic,
}

impl From<BoundaryChoice> for Boundary {
    fn from(b: BoundaryChoice) -> Self {
        match b {
            BoundaryChoice::Open => Boundary::Open,
            BoundaryChoice::Periodic => Boundary::Periodic,
        }
    }
}

/// A single string or a list of strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

impl OneOrMany {
    pub fn items(&self) -> Vec<String> {
        match self {
            Self::One(s) => vec![s.clone()],
            Self::Many(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeBlock {
    /// Final time in units of `1/J`.
    pub t_max: f64,
    pub points: usize,
}

impl Default for TimeBlock {
    fn default() -> Self {
        Self { t_max: 40.0, points: 2000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsBlock {
    pub random_states: usize,
    /// Revival-window spacing guess; defaults to the level spacing of one
    /// isolated unit.
    pub delta_e: Option<f64>,
    pub entropy: bool,
    pub krylov_dim: usize,
    pub krylov_tol: f64,
}

impl Default for DynamicsBlock {
    fn default() -> Self {
        let k = KrylovConfig::default();
        Self { random_states: 10, delta_e: None, entropy: true, krylov_dim: k.max_dim, krylov_tol: k.tol }
    }
}

impl DynamicsBlock {
    pub fn krylov(&self) -> KrylovConfig {
        KrylovConfig { max_dim: self.krylov_dim, tol: self.krylov_tol, ..KrylovConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumBlock {
    pub eigen_cap: usize,
    pub resolve_symmetry: bool,
    pub entropy: bool,
    pub tower_threshold: f64,
    /// Defaults to `|J0|`.
    pub tower_window: Option<f64>,
    pub tower_min_weight: f64,
}

impl Default for SpectrumBlock {
    fn default() -> Self {
        let t = TowerConfig::for_coupling(1.0);
        Self {
            eigen_cap: DEFAULT_EIGEN_CAP,
            resolve_symmetry: true,
            entropy: true,
            tower_threshold: t.threshold,
            tower_window: None,
            tower_min_weight: t.min_relative_weight,
        }
    }
}

impl SpectrumBlock {
    pub fn towers(&self, j0: f64) -> TowerConfig {
        let mut t = TowerConfig::for_coupling(j0);
        t.threshold = self.tower_threshold;
        t.min_relative_weight = self.tower_min_weight;
        if let Some(w) = self.tower_window {
            t.window = w;
        }
        t
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HdaModelChoice {
    #[default]
    Dyson,
    SurfaceChain,
}

impl From<HdaModelChoice> for SelfEnergyModel {
    fn from(m: HdaModelChoice) -> Self {
        match m {
            HdaModelChoice::Dyson => SelfEnergyModel::Dyson,
            HdaModelChoice::SurfaceChain => SelfEnergyModel::SurfaceChain,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HdaBlock {
    /// Defaults to `0.05·|J0|`.
    pub eta: Option<f64>,
    pub points: usize,
    /// Grid half-width; defaults to `(units + 2)·|J0|`.
    pub half_width: Option<f64>,
    pub tol: f64,
    pub damping: f64,
    pub max_iters: usize,
    pub model: HdaModelChoice,
    /// Peak prominence relative to the global maximum.
    pub prominence: f64,
    /// Compare with exact towers when the sector fits under the eigen cap.
    pub compare_exact: bool,
}

impl Default for HdaBlock {
    fn default() -> Self {
        Self {
            eta: None,
            points: 2001,
            half_width: None,
            tol: 1e-10,
            damping: 0.5,
            max_iters: 500,
            model: HdaModelChoice::Dyson,
            prominence: 0.01,
            compare_exact: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalingBlock {
    /// Dimer counts.
    pub sizes: Vec<usize>,
    /// Random-cluster configurations per size.
    pub seeds: usize,
    pub samples_per_period: usize,
}

impl Default for ScalingBlock {
    fn default() -> Self {
        Self { sizes: Vec::new(), seeds: 20, samples_per_period: 200 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RatioBlock {
    /// Cases such as `"1d:4"`, `"2d:3x2"`, `"3d:2x2x1"` or `"md:3"`.
    pub cases: Vec<String>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    J0,
    J1,
    J3,
    Seed,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            Self::J0 => "j0",
            Self::J1 => "j1",
            Self::J3 => "j3",
            Self::Seed => "seed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub model: Model,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nx: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ny: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nz: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice_file: Option<PathBuf>,
    #[serde(default = "one")]
    pub j0: f64,
    #[serde(default = "one")]
    pub j1: f64,
    #[serde(default)]
    pub j3: f64,
    #[serde(default)]
    pub boundary: BoundaryChoice,
    #[serde(default)]
    pub seed: u64,
    /// Collective-state labels such as `"C"` or `"C_x"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<OneOrMany>,
    /// Explicit bit patterns, site 1 first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_bits: Option<OneOrMany>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub time: TimeBlock,
    #[serde(default)]
    pub dynamics: DynamicsBlock,
    #[serde(default)]
    pub spectrum: SpectrumBlock,
    #[serde(default)]
    pub hda: HdaBlock,
    #[serde(default)]
    pub scaling: ScalingBlock,
    #[serde(default)]
    pub ratio: RatioBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
}

/// One run of a (possibly swept) config.
#[derive(Clone, Debug, PartialEq)]
pub struct RunPoint {
    /// `(parameter, value)` when part of a sweep.
    pub swept: Option<(SweepParameter, f64)>,
    pub j0: f64,
    pub j1: f64,
    pub j3: f64,
    pub seed: u64,
}

impl RunPoint {
    /// File-name suffix, empty outside sweeps.
    pub fn tag(&self) -> String {
        match self.swept {
            None => String::new(),
            Some((p, v)) => format!("_{}_{}", p.name(), v),
        }
    }
}

fn finite(name: &str, x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(config_err!("{name} = {x} is not finite"));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| config_err!("{}", e.message()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text)?;
        // lattice files resolve relative to the config
        if let (Some(f), Some(dir)) = (&cfg.lattice_file, path.parent()) {
            if f.is_relative() {
                cfg.lattice_file = Some(dir.join(f));
            }
        }
        Ok(cfg)
    }

    /// Canonical TOML echo of the resolved config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(config_err!("unsupported config version {} (expected {CONFIG_VERSION})", self.version));
        }
        finite("j0", self.j0)?;
        finite("j1", self.j1)?;
        finite("j3", self.j3)?;
        let dims = (self.dimers.is_some(), self.nx.is_some(), self.ny.is_some(), self.nz.is_some());
        let expected = match self.model {
            Model::Ssh | Model::Comb | Model::RandomCluster => (true, false, false, false),
            Model::Tetramer2d => (false, true, true, false),
            Model::Octamer3d => (false, true, true, true),
            Model::Custom => (false, false, false, false),
        };
        // scaling runs take sizes from the scaling block
        let dims = if self.dimers.is_none() && !self.scaling.sizes.is_empty() { (true, dims.1, dims.2, dims.3) } else { dims };
        if dims != expected {
            return Err(config_err!(
                "model {:?} takes {}",
                self.model,
                match self.model {
                    Model::Ssh | Model::Comb | Model::RandomCluster => "`dimers` (or scaling.sizes) and no nx/ny/nz",
                    Model::Tetramer2d => "`nx` and `ny` only",
                    Model::Octamer3d => "`nx`, `ny` and `nz` only",
                    Model::Custom => "no size keys; the lattice comes from `lattice_file`",
                }
            ));
        }
        if (self.model == Model::Custom) != self.lattice_file.is_some() {
            return Err(config_err!("`lattice_file` is required for, and only allowed with, model = \"custom\""));
        }
        if self.boundary == BoundaryChoice::Periodic && self.model != Model::Ssh {
            return Err(config_err!("periodic boundaries are only implemented for the ssh model"));
        }
        if self.initial.is_some() && self.initial_bits.is_some() {
            return Err(config_err!("give either `initial` or `initial_bits`, not both"));
        }
        if let Some(l) = &self.initial {
            for name in l.items() {
                if CollectiveLabel::from_name(&name).is_none() {
                    return Err(config_err!("unknown collective-state label {name:?}"));
                }
            }
        }
        if !(self.time.t_max > 0.0) || self.time.points < 2 {
            return Err(config_err!("time grid needs t_max > 0 and at least 2 points"));
        }
        if let Some(d) = self.dynamics.delta_e {
            if !(d > 0.0) {
                return Err(config_err!("dynamics.delta_e must be positive"));
            }
        }
        if self.dynamics.krylov_dim < 2 || !(self.dynamics.krylov_tol > 0.0) {
            return Err(config_err!("krylov_dim must be at least 2 and krylov_tol positive"));
        }
        if let Some(e) = self.hda.eta {
            if !(e > 0.0) {
                return Err(config_err!("hda.eta must be positive"));
            }
        }
        if self.hda.points < 2 || self.hda.half_width.is_some_and(|w| !(w > 0.0)) {
            return Err(config_err!("hda grid needs at least 2 points and a positive half width"));
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(config_err!("sweep.values is empty"));
            }
            for &v in &s.values {
                finite("sweep value", v)?;
            }
            if s.parameter == SweepParameter::Seed {
                if self.model != Model::RandomCluster {
                    return Err(config_err!("seed sweeps only apply to random clusters"));
                }
                if s.values.iter().any(|&v| v < 0.0 || v.fract() != 0.0) {
                    return Err(config_err!("seed sweep values must be non-negative integers"));
                }
            }
        }
        Ok(())
    }

    /// Runs implied by the sweep block, in config order.
    pub fn points(&self) -> Vec<RunPoint> {
        let base = RunPoint { swept: None, j0: self.j0, j1: self.j1, j3: self.j3, seed: self.seed };
        let Some(s) = &self.sweep else {
            return vec![base];
        };
        s.values
            .iter()
            .map(|&v| {
                let mut p = base.clone();
                p.swept = Some((s.parameter, v));
                match s.parameter {
                    SweepParameter::J0 => p.j0 = v,
                    SweepParameter::J1 => p.j1 = v,
                    SweepParameter::J3 => p.j3 = v,
                    SweepParameter::Seed => p.seed = v as u64,
                }
                p
            })
            .collect()
    }

    /// Lattice of one run point.
    pub fn lattice(&self, p: &RunPoint) -> Result<LatticeSpec> {
        let need = |x: Option<usize>, name: &str| x.ok_or_else(|| config_err!("`{name}` is required"));
        let spec = match self.model {
            Model::Ssh => LatticeSpec::ssh(need(self.dimers, "dimers")?, p.j0, p.j1, p.j3, self.boundary.into())?,
            Model::Comb => LatticeSpec::comb(need(self.dimers, "dimers")?, p.j0, p.j1)?,
            Model::RandomCluster => LatticeSpec::random_cluster(need(self.dimers, "dimers")?, p.j0, p.j1, p.seed)?,
            Model::Tetramer2d => LatticeSpec::tetramer_grid(need(self.nx, "nx")?, need(self.ny, "ny")?, p.j0, p.j1)?,
            Model::Octamer3d => {
                LatticeSpec::octamer_grid(need(self.nx, "nx")?, need(self.ny, "ny")?, need(self.nz, "nz")?, p.j0, p.j1)?
            }
            Model::Custom => {
                let path = self.lattice_file.as_ref().expect("validated");
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                serde_json::from_str(&text)?
            }
        };
        if self.model != Model::Ssh && p.j3 != 0.0 {
            return Err(config_err!("j3 only applies to the ssh model"));
        }
        Ok(spec)
    }

    /// Named initial states, or an error if none are configured.
    pub fn initial_states(&self, spec: &LatticeSpec) -> Result<Vec<(String, FockState)>> {
        if let Some(labels) = &self.initial {
            let set = collective_states(spec);
            return labels
                .items()
                .into_iter()
                .map(|name| {
                    let label = CollectiveLabel::from_name(&name).expect("validated");
                    set.get(label)
                        .map(|s| (name.clone(), s))
                        .ok_or_else(|| config_err!("this lattice has no collective state {name}"))
                })
                .collect();
        }
        if let Some(bits) = &self.initial_bits {
            return bits
                .items()
                .into_iter()
                .map(|b| {
                    let s: FockState = b.parse().map_err(|e| config_err!("bad bit pattern {b:?}: {e}"))?;
                    if s.sites() != spec.sites() || s.particles() != spec.half_filling() {
                        return Err(config_err!(
                            "bit pattern {b} must have {} sites and {} particles",
                            spec.sites(),
                            spec.half_filling()
                        ));
                    }
                    Ok((b.clone(), s))
                })
                .collect();
        }
        Err(config_err!("this command needs `initial` or `initial_bits`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "version = 1\nmodel = \"ssh\"\ndimers = 4\nj0 = 1.6\nj3 = -0.162\ninitial = \"C\"\n";

    #[test]
    fn parses_and_echoes() {
        let cfg = ExperimentConfig::parse(BASE).unwrap();
        assert_eq!(cfg.j1, 1.0);
        assert_eq!(cfg.time, TimeBlock::default());
        let again = ExperimentConfig::parse(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
        let spec = cfg.lattice(&cfg.points()[0]).unwrap();
        let init = cfg.initial_states(&spec).unwrap();
        assert_eq!(init[0].1.to_string(), "10011001");
    }

    #[test]
    fn rejects_unknown_and_conflicting_keys() {
        assert!(matches!(ExperimentConfig::parse(&format!("{BASE}j4 = 1.0\n")), Err(Error::Config(_))));
        assert!(ExperimentConfig::parse(&format!("{BASE}[time]\ntmax = 3.0\n")).is_err());
        assert!(ExperimentConfig::parse(&format!("{BASE}initial_bits = \"10011001\"\n")).is_err());
        assert!(ExperimentConfig::parse(&BASE.replace("version = 1", "version = 2")).is_err());
        assert!(ExperimentConfig::parse(&format!("{BASE}nx = 2\n")).is_err());
        assert!(ExperimentConfig::parse(&BASE.replace("\"C\"", "\"C_q\"")).is_err());
    }

    #[test]
    fn sweeps_expand_in_order() {
        let cfg = ExperimentConfig::parse(&format!("{BASE}[sweep]\nparameter = \"j1\"\nvalues = [0.8, 0.9]\n")).unwrap();
        let pts = cfg.points();
        assert_eq!(pts.len(), 2);
        assert_eq!((pts[1].j1, pts[1].tag()), (0.9, "_j1_0.9".to_string()));
    }

    #[test]
    fn bit_patterns_are_checked() {
        let text = BASE.replace("initial = \"C\"", "initial_bits = [\"10101010\", \"111\"]");
        let cfg = ExperimentConfig::parse(&text).unwrap();
        let spec = cfg.lattice(&cfg.points()[0]).unwrap();
        assert!(cfg.initial_states(&spec).is_err());
    }
}
