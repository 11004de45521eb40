//! One function per CLI subcommand. Each writes its files into an
//! [`OutputDir`]; [`run`] adds the resolved-config echo and the manifest.

use std::path::Path;
use std::time::Instant;

use hscar_core::dynamics::{evolve_fock, first_revival, random_fock_states, scaling_sweep, time_grid, Family, ScalingParams};
use hscar_core::hda::{hypercube_hamiltonian, solve_dyson, spectral_density, tower_peaks, window_weight, HdaConfig};
use hscar_core::hilbert::{enumerate_sector, BasisSector, FockState};
use hscar_core::lattice::{EdgeClass, LatticeSpec};
use hscar_core::linalg::symmetric_eigenvalues;
use hscar_core::operator::{assemble_hamiltonian, SparseHamiltonian};
use hscar_core::stats::{extract_towers, fit_lambda_shifted, pooled_gap_ratio, Towers, FIT_WINDOW};
use hscar_core::subspace::{decoupled_states, hopping_sums_direct, identify_hyperpolyhedron, ratio_closed_form, ratio_coefficient, RatioKind};
use hscar_core::symmetry::{lattice_symmetries, SymmetryDecomposition};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, Model, RunPoint, SweepParameter};
use crate::error::{config_err, Error, Result};
use crate::lapack::Selection;
use crate::output::{fmt_f64, OutputDir, RunManifest};
use crate::spectral::{eigenstate_table, resolve_with, ResolvedSpectrum};

/// Largest hypercube enumerated by the ratio command.
pub const MAX_RATIO_HYPER: u64 = 1_000_000;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Dynamics,
    Scaling,
    Hda,
    Ratio,
    ClusterGen,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Spectrum => "spectrum",
            Self::Dynamics => "dynamics",
            Self::Scaling => "scaling",
            Self::Hda => "hda",
            Self::Ratio => "ratio",
            Self::ClusterGen => "cluster-gen",
        }
    }
}

/// Runs `command` and writes its outputs, the config echo and the manifest
/// under `out`.
pub fn run(command: Command, cfg: &ExperimentConfig, out: &Path) -> Result<RunManifest> {
    let start = Instant::now();
    let mut dir = OutputDir::create(out)?;
    match command {
        Command::Spectrum => cmd_spectrum(cfg, &mut dir)?,
        Command::Dynamics => cmd_dynamics(cfg, &mut dir)?,
        Command::Scaling => cmd_scaling(cfg, &mut dir)?,
        Command::Hda => cmd_hda(cfg, &mut dir)?,
        Command::Ratio => cmd_ratio(cfg, &mut dir)?,
        Command::ClusterGen => cmd_cluster_gen(cfg, &mut dir)?,
    }
    dir.text("config.toml", &cfg.to_toml())?;
    RunManifest::write(&dir, command.name(), cfg, start.elapsed().as_secs_f64())
}

struct Problem {
    spec: LatticeSpec,
    sec: BasisSector,
    h: SparseHamiltonian,
}

fn problem(cfg: &ExperimentConfig, p: &RunPoint) -> Result<Problem> {
    let spec = cfg.lattice(p)?;
    let sec = enumerate_sector(spec.sites(), spec.half_filling())?;
    let h = assemble_hamiltonian(&spec, &sec)?;
    Ok(Problem { spec, sec, h })
}

fn file_safe(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { 'p' }).collect()
}

/// Smallest gap between distinct levels of one isolated unit at half
/// filling: `2·J0` for a dimer, `2√2·J0` for a tetramer.
pub fn unit_spacing(spec: &LatticeSpec) -> Result<f64> {
    let unit = &spec.units()[0];
    let local = |s: usize| unit.sites.iter().position(|&u| u == s);
    let n = unit.sites.len();
    let sec = enumerate_sector(n, n / 2)?;
    let d = sec.dim();
    let mut a = vec![0.0; d * d];
    for (r, s) in sec.iter().enumerate() {
        for e in spec.edges().iter().filter(|e| e.class == EdgeClass::Intra) {
            let (Some(u), Some(v)) = (local(e.u), local(e.v)) else { continue };
            for (from, to) in [(u, v), (v, u)] {
                if let Some(t) = s.hop(from, to) {
                    let c = sec.rank(t).expect("hop stays in sector");
                    a[c * d + r] += e.amplitude;
                }
            }
        }
    }
    let vals = symmetric_eigenvalues(&a, d)?;
    let tol = 1e-9 * vals.iter().fold(1.0, |m: f64, v| m.max(v.abs()));
    vals.windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&g| g > tol)
        .min_by(f64::total_cmp)
        .ok_or_else(|| Error::Core(hscar_core::Error::Contract("unit spectrum is degenerate".into())))
}

/// Mean spacing of the `count` peaks nearest zero energy.
pub fn peak_spacing(peaks: &[f64], count: usize) -> Option<f64> {
    let mut near: Vec<f64> = peaks.to_vec();
    near.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    near.truncate(count);
    if near.len() < 2 {
        return None;
    }
    near.sort_by(f64::total_cmp);
    Some((near[near.len() - 1] - near[0]) / (near.len() - 1) as f64)
}

fn decomposition(cfg: &ExperimentConfig, pb: &Problem) -> Result<SymmetryDecomposition> {
    let gens = if cfg.spectrum.resolve_symmetry { lattice_symmetries(&pb.spec, &pb.sec) } else { Vec::new() };
    Ok(SymmetryDecomposition::new(&pb.sec, gens)?)
}

fn resolved(cfg: &ExperimentConfig, pb: &Problem, vectors: bool) -> Result<ResolvedSpectrum> {
    Ok(resolve_with(decomposition(cfg, pb)?, &pb.h, cfg.spectrum.eigen_cap, vectors, |_| Selection::All, |_| true)?)
}

#[derive(Serialize)]
struct TowerSummary {
    state: String,
    bits: String,
    centers: Vec<f64>,
    weights: Vec<f64>,
    delta_e: Option<f64>,
    spacing_spread: Option<f64>,
    error: Option<String>,
}

fn tower_summary(name: &str, s: FockState, towers: std::result::Result<Towers, hscar_core::Error>) -> TowerSummary {
    match towers {
        Ok(t) => TowerSummary {
            state: name.into(),
            bits: s.to_string(),
            delta_e: Some(t.delta_e()),
            spacing_spread: Some(t.spacing_spread()),
            centers: t.centers,
            weights: t.weights,
            error: None,
        },
        Err(e) => TowerSummary {
            state: name.into(),
            bits: s.to_string(),
            centers: Vec::new(),
            weights: Vec::new(),
            delta_e: None,
            spacing_spread: None,
            error: Some(e.to_string()),
        },
    }
}

#[derive(Serialize)]
struct SpectrumPointSummary {
    j0: f64,
    j1: f64,
    j3: f64,
    dimension: usize,
    symmetry_sectors: Vec<Vec<(String, i8)>>,
    gap_ratio: Option<f64>,
    gap_ratio_count: usize,
    gap_ratio_warning: Option<String>,
    towers: Vec<TowerSummary>,
}

#[derive(Serialize)]
struct LambdaSummary {
    state: String,
    shift: f64,
    lambda: Option<f64>,
    residual: Option<f64>,
    error: Option<String>,
}

#[derive(Serialize)]
struct SpectrumSummary {
    points: Vec<SpectrumPointSummary>,
    lambda_fits: Vec<LambdaSummary>,
}

/// Overlap spectra, eigenstate entropies, towers and gap ratios.
pub fn cmd_spectrum(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<()> {
    struct PointResult {
        point: RunPoint,
        tables: Vec<(String, Vec<[f64; 3]>)>,
        summary: SpectrumPointSummary,
    }
    let points = cfg.points();
    let results: Result<Vec<PointResult>> = points
        .par_iter()
        .map(|p| {
            let pb = problem(cfg, p)?;
            let states = cfg.initial_states(&pb.spec)?;
            let res = resolved(cfg, &pb, true)?;
            let cut = pb.spec.half_cut();
            let tcfg = cfg.spectrum.towers(p.j0);
            let mut tables = Vec::new();
            let mut towers = Vec::new();
            for (name, s) in &states {
                let rows = if cfg.spectrum.entropy {
                    eigenstate_table(&res, &pb.sec, *s, &cut)?
                } else {
                    let rank = pb.sec.rank(*s).expect("validated state");
                    res.overlaps(rank).into_iter().map(|(e, w)| [e, w, f64::NAN]).collect()
                };
                let ov: Vec<(f64, f64)> = rows.iter().map(|r| (r[0], r[1])).collect();
                towers.push(tower_summary(name, *s, extract_towers(&ov, &tcfg)));
                tables.push((name.clone(), rows));
            }
            let spectra: Vec<Vec<f64>> = res.sectors.iter().map(|s| s.system.energies().to_vec()).collect();
            let ratio = pooled_gap_ratio(&spectra);
            let small = spectra.iter().filter(|s| s.len() < hscar_core::stats::MIN_RATIOS + 2).count();
            let summary = SpectrumPointSummary {
                j0: p.j0,
                j1: p.j1,
                j3: p.j3,
                dimension: pb.sec.dim(),
                symmetry_sectors: res
                    .sectors
                    .iter()
                    .map(|s| s.parities.iter().map(|&(n, v)| (n.to_string(), v)).collect())
                    .collect(),
                gap_ratio: ratio.map(|g| g.mean),
                gap_ratio_count: ratio.map_or(0, |g| g.count),
                gap_ratio_warning: (small > 0).then(|| format!("{small} sectors have fewer than 100 gap ratios")),
                towers,
            };
            Ok(PointResult { point: p.clone(), tables, summary })
        })
        .collect();
    let results = results?;
    let header = ["energy [J]", "overlap [1]", "entropy [nats]"];
    for r in &results {
        for (name, rows) in &r.tables {
            let body = rows.iter().map(|row| row.iter().map(|&x| fmt_f64(x)).collect());
            out.csv(&format!("spectrum_{}{}.csv", file_safe(name), r.point.tag()), &header, body)?;
        }
    }
    let param = cfg.sweep.as_ref().map_or("j3", |s| s.parameter.name());
    let value = |p: &RunPoint| p.swept.map_or(p.j3, |(_, v)| v);
    out.csv(
        "level_stats.csv",
        &[&format!("{param} [J]"), "r_mean [1]", "ratios [count]", "sectors [count]"],
        results.iter().map(|r| {
            vec![
                fmt_f64(value(&r.point)),
                r.summary.gap_ratio.map_or("NaN".into(), fmt_f64),
                r.summary.gap_ratio_count.to_string(),
                r.summary.symmetry_sectors.len().to_string(),
            ]
        }),
    )?;
    let mut lambda_fits = Vec::new();
    let fit_sweep = matches!(cfg.sweep.as_ref().map(|s| s.parameter), Some(SweepParameter::J0 | SweepParameter::J1));
    if fit_sweep {
        let names: Vec<String> = results[0].tables.iter().map(|t| t.0.clone()).collect();
        let mut rows = Vec::new();
        for (i, name) in names.iter().enumerate() {
            let samples: Vec<(f64, f64)> = results
                .iter()
                .filter_map(|r| {
                    let x = r.point.j1 / r.point.j0;
                    r.summary.towers[i].delta_e.map(|d| (x, d / r.point.j0)).filter(|&(x, _)| (0.0..=FIT_WINDOW).contains(&x))
                })
                .collect();
            let shift = results[0].point.j3 / results[0].point.j0;
            match fit_lambda_shifted(&samples, shift) {
                Ok(fit) => {
                    rows.extend(samples.iter().map(|&(x, y)| {
                        vec![name.clone(), fmt_f64(x), fmt_f64(y), fmt_f64(fit.lambda), fmt_f64(fit.lambda * (x + shift).powi(2) + 2.0)]
                    }));
                    lambda_fits.push(LambdaSummary {
                        state: name.clone(),
                        shift,
                        lambda: Some(fit.lambda),
                        residual: Some(fit.residual),
                        error: None,
                    });
                }
                Err(e) => lambda_fits.push(LambdaSummary {
                    state: name.clone(),
                    shift,
                    lambda: None,
                    residual: None,
                    error: Some(e.to_string()),
                }),
            }
        }
        out.csv("lambda_fit.csv", &["state", "x [1]", "delta_e_over_j0 [1]", "lambda [1]", "fit [1]"], rows)?;
    }
    let summary = SpectrumSummary { points: results.into_iter().map(|r| r.summary).collect(), lambda_fits };
    out.json("towers.json", &summary)?;
    Ok(())
}

/// Fidelity and entropy traces of the configured and random initial states.
pub fn cmd_dynamics(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<()> {
    struct Trace {
        name: String,
        bits: String,
        trace: hscar_core::dynamics::DynamicsTrace,
        revival: Option<hscar_core::dynamics::RevivalReport>,
        late_mean: f64,
    }
    let times = time_grid(cfg.time.t_max, cfg.time.points);
    let mut sweep_rows = Vec::new();
    for p in cfg.points() {
        let pb = problem(cfg, &p)?;
        let mut states = cfg.initial_states(&pb.spec)?;
        let exclude = decoupled_states(&pb.spec, &pb.sec)?;
        let randoms = random_fock_states(&pb.sec, cfg.dynamics.random_states, p.seed, &exclude)?;
        states.extend(randoms.into_iter().enumerate().map(|(k, s)| (format!("random_{k:02}"), s)));
        let delta_e = match cfg.dynamics.delta_e {
            Some(d) => d,
            None => unit_spacing(&pb.spec)?,
        };
        let cut = pb.spec.half_cut();
        let cut = cfg.dynamics.entropy.then_some(cut.as_slice());
        let traces: Result<Vec<Trace>> = states
            .par_iter()
            .map(|(name, s)| {
                let trace = evolve_fock(&pb.h, &pb.sec, *s, &times, cut, cfg.dynamics.krylov())?;
                let revival = first_revival(&trace, delta_e, pb.spec.sites()).ok();
                let late: Vec<f64> =
                    trace.times.iter().zip(&trace.fidelity).filter(|(&t, _)| t >= 0.5 * cfg.time.t_max).map(|(_, &f)| f).collect();
                let late_mean = late.iter().sum::<f64>() / late.len().max(1) as f64;
                Ok(Trace { name: name.clone(), bits: s.to_string(), trace, revival, late_mean })
            })
            .collect();
        let traces = traces?;
        for t in &traces {
            let ent = t.trace.entropy.as_ref();
            let rows = (0..t.trace.times.len()).map(|k| {
                vec![
                    fmt_f64(t.trace.times[k]),
                    fmt_f64(t.trace.fidelity[k]),
                    ent.map_or("NaN".into(), |e| fmt_f64(e[k])),
                ]
            });
            out.csv(&format!("trace_{}{}.csv", file_safe(&t.name), p.tag()), &["t [1/J]", "fidelity [1]", "entropy [nats]"], rows)?;
        }
        let na = || "NaN".to_string();
        out.csv(
            &format!("revivals{}.csv", p.tag()),
            &["state", "bits", "t1 [1/J]", "f1 [1]", "log_density [1]", "late_mean_fidelity [1]", "norm_drift [1]"],
            traces.iter().map(|t| {
                vec![
                    t.name.clone(),
                    t.bits.clone(),
                    t.revival.map_or_else(na, |r| fmt_f64(r.t1)),
                    t.revival.map_or_else(na, |r| fmt_f64(r.f1)),
                    t.revival.map_or_else(na, |r| fmt_f64(r.log_density)),
                    fmt_f64(t.late_mean),
                    fmt_f64(t.trace.norm_drift),
                ]
            }),
        )?;
        if let (Some((_, v)), Some(first)) = (p.swept, traces.first()) {
            let r = first.revival;
            sweep_rows.push(vec![
                fmt_f64(v),
                r.map_or_else(na, |r| fmt_f64(r.t1)),
                r.map_or_else(na, |r| fmt_f64(r.f1)),
                r.map_or_else(na, |r| fmt_f64(r.log_density)),
                fmt_f64(0.0),
            ]);
        }
    }
    if let Some(s) = &cfg.sweep {
        let first = format!("{} [J]", s.parameter.name());
        out.csv("revival_sweep.csv", &[&first, "t1 [1/J]", "f1 [1]", "log_density [1]", "stderr [1]"], sweep_rows)?;
    }
    Ok(())
}

/// Logarithmic fidelity density of `C` against system size.
pub fn cmd_scaling(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<()> {
    let sizes: Vec<usize> = if cfg.scaling.sizes.is_empty() { cfg.dimers.into_iter().collect() } else { cfg.scaling.sizes.clone() };
    if sizes.is_empty() {
        return Err(config_err!("scaling needs scaling.sizes"));
    }
    if cfg.sweep.is_some() {
        return Err(config_err!("scaling runs do not take a sweep block"));
    }
    let family = match cfg.model {
        Model::Ssh => Family::Ssh { boundary: cfg.boundary.into() },
        Model::Comb => Family::Comb,
        Model::RandomCluster => Family::RandomCluster { seeds: cfg.scaling.seeds, base_seed: cfg.seed },
        _ => return Err(config_err!("scaling supports the ssh, comb and random-cluster models")),
    };
    let mut params = ScalingParams::new(cfg.j0, cfg.j1, cfg.j3);
    if let Some(d) = cfg.dynamics.delta_e {
        params.delta_e_guess = d;
    }
    params.samples_per_period = cfg.scaling.samples_per_period;
    params.krylov = cfg.dynamics.krylov();
    let points: Result<Vec<_>> =
        sizes.par_iter().map(|&n| Ok(scaling_sweep(family, &[n], &params)?.remove(0))).collect();
    let rows = points?.into_iter().map(|p| {
        vec![
            p.dimers.to_string(),
            p.sites.to_string(),
            fmt_f64(1.0 / p.sites as f64),
            fmt_f64(p.log_density),
            fmt_f64(p.stderr),
            fmt_f64(p.thermal_reference),
            fmt_f64(p.t1),
            p.configurations.to_string(),
        ]
    });
    out.csv(
        "scaling.csv",
        &[
            "dimers",
            "sites",
            "inverse_sites [1]",
            "log_density [1]",
            "stderr [1]",
            "thermal_reference [1]",
            "t1 [1/J]",
            "configurations",
        ],
        rows,
    )?;
    Ok(())
}

#[derive(Serialize)]
struct ExactComparison {
    tower_centers: Vec<f64>,
    /// Discrete overlap summed within `±3η` of each center.
    exact_weights: Vec<f64>,
    /// Spectral density integrated over the same windows.
    hda_weights: Vec<f64>,
}

#[derive(Serialize)]
struct HdaProbeSummary {
    state: String,
    bits: String,
    peaks: Vec<f64>,
    peak_spacing: Option<f64>,
    sum_rule: f64,
    exact: Option<ExactComparison>,
}

#[derive(Serialize)]
struct HdaPointSummary {
    j0: f64,
    j1: f64,
    j3: f64,
    hyper_dimension: usize,
    eta: f64,
    converged_fraction: f64,
    probes: Vec<HdaProbeSummary>,
}

/// Number of central peaks used for the HDA spacing estimate.
pub const HDA_SPACING_PEAKS: usize = 5;

/// Hypercube-decay spectral functions of the configured states.
pub fn cmd_hda(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<()> {
    let mut summaries = Vec::new();
    let mut spacing_rows = Vec::new();
    for p in cfg.points() {
        let pb = problem(cfg, &p)?;
        let split = identify_hyperpolyhedron(&pb.spec, &pb.sec)?;
        let hh = hypercube_hamiltonian(&pb.h, &split)?;
        let nh = split.hyper.len();
        let mut hcfg = HdaConfig::for_lattice(pb.spec.units().len(), p.j0);
        let half = cfg.hda.half_width.unwrap_or((pb.spec.units().len() as f64 + 2.0) * p.j0.abs());
        let m = cfg.hda.points;
        hcfg.grid = (0..m).map(|k| -half + 2.0 * half * k as f64 / (m - 1) as f64).collect();
        hcfg.eta = cfg.hda.eta.unwrap_or(0.05 * p.j0.abs());
        hcfg.tol = cfg.hda.tol;
        hcfg.damping = cfg.hda.damping;
        hcfg.max_iters = cfg.hda.max_iters;
        hcfg.model = cfg.hda.model.into();
        let states = cfg.initial_states(&pb.spec)?;
        let mut probes = Vec::new();
        for (name, s) in &states {
            let r = pb.sec.rank(*s).expect("validated state");
            let Some(i) = split.hyper_index(r) else {
                return Err(config_err!("state {name} is not in the hypercube"));
            };
            probes.push(i);
        }
        let sigmas = solve_dyson(&hh, nh, &split.gamma, &hcfg)?;
        let result = spectral_density(&hh, nh, &sigmas, &hcfg, &probes)?;
        let exact = if cfg.hda.compare_exact && pb.sec.dim() <= cfg.spectrum.eigen_cap {
            Some(resolved(cfg, &pb, true)?)
        } else {
            None
        };
        let mut probe_summaries = Vec::new();
        for (i, (name, s)) in states.iter().enumerate() {
            let rows = (0..hcfg.grid.len()).map(|k| {
                vec![fmt_f64(hcfg.grid[k]), fmt_f64(result.local_dos[i][k]), u8::from(result.converged[k]).to_string()]
            });
            out.csv(
                &format!("hda_{}{}.csv", file_safe(name), p.tag()),
                &["energy [J]", "spectral_density [1/J]", "converged [bool]"],
                rows,
            )?;
            let peaks = tower_peaks(&result, i, cfg.hda.prominence);
            let comparison = match &exact {
                Some(res) => {
                    let ov = res.overlaps(pb.sec.rank(*s).expect("validated state"));
                    match extract_towers(&ov, &cfg.spectrum.towers(p.j0)) {
                        Ok(t) => {
                            let w = 3.0 * hcfg.eta;
                            Some(ExactComparison {
                                exact_weights: t
                                    .centers
                                    .iter()
                                    .map(|&c| ov.iter().filter(|(e, _)| (e - c).abs() <= w).map(|x| x.1).sum())
                                    .collect(),
                                hda_weights: t.centers.iter().map(|&c| window_weight(&result, i, c, w)).collect(),
                                tower_centers: t.centers,
                            })
                        }
                        Err(_) => None,
                    }
                }
                None => None,
            };
            let spacing = peak_spacing(&peaks, HDA_SPACING_PEAKS);
            if let (Some((_, v)), 0) = (p.swept, i) {
                spacing_rows.push(vec![
                    fmt_f64(v),
                    fmt_f64(p.j1 / p.j0),
                    spacing.map_or("NaN".into(), |d| fmt_f64(d / p.j0)),
                ]);
            }
            probe_summaries.push(HdaProbeSummary {
                state: name.clone(),
                bits: s.to_string(),
                peak_spacing: spacing,
                sum_rule: result.sum_rule(i),
                peaks,
                exact: comparison,
            });
        }
        summaries.push(HdaPointSummary {
            j0: p.j0,
            j1: p.j1,
            j3: p.j3,
            hyper_dimension: nh,
            eta: hcfg.eta,
            converged_fraction: result.converged_fraction(),
            probes: probe_summaries,
        });
    }
    out.json("hda_peaks.json", &summaries)?;
    if let Some(s) = &cfg.sweep {
        let first = format!("{} [J]", s.parameter.name());
        out.csv("hda_spacing.csv", &[&first, "x [1]", "delta_e_over_j0 [1]"], spacing_rows)?;
    }
    Ok(())
}

/// Parses a ratio case such as `"2d:3x2"`.
pub fn parse_ratio_case(case: &str) -> Result<RatioKind> {
    let bad = || config_err!("bad ratio case {case:?}; expected 1d:N, 2d:NXxNY, 3d:NXxNYxNZ or md:M");
    let (kind, dims) = case.split_once(':').ok_or_else(bad)?;
    let nums: Vec<u64> = dims.split('x').map(|d| d.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?;
    match (kind.trim(), nums.as_slice()) {
        ("1d", &[n]) => Ok(RatioKind::OneD { n }),
        ("2d", &[nx, ny]) => Ok(RatioKind::TwoD { nx, ny }),
        ("3d", &[nx, ny, nz]) => Ok(RatioKind::ThreeD { nx, ny, nz }),
        ("md", &[m]) => Ok(RatioKind::MdLimit { m: u32::try_from(m).map_err(|_| bad())? }),
        _ => Err(bad()),
    }
}

fn ratio_lattice(kind: RatioKind, j0: f64, j1: f64) -> Result<Option<LatticeSpec>> {
    if let RatioKind::MdLimit { .. } = kind {
        return Ok(None);
    }
    let hyper = hyper_dim(kind);
    if hyper > MAX_RATIO_HYPER as u128 {
        return Err(Error::Core(hscar_core::Error::Capacity(format!(
            "hypercube of dimension {hyper} exceeds the enumeration limit {MAX_RATIO_HYPER}"
        ))));
    }
    let spec = match kind {
        RatioKind::OneD { n } => LatticeSpec::ssh(n as usize, j0, j1, 0.0, hscar_core::lattice::Boundary::Open)?,
        RatioKind::TwoD { nx, ny } => LatticeSpec::tetramer_grid(nx as usize, ny as usize, j0, j1)?,
        RatioKind::ThreeD { nx, ny, nz } => LatticeSpec::octamer_grid(nx as usize, ny as usize, nz as usize, j0, j1)?,
        RatioKind::MdLimit { .. } => unreachable!(),
    };
    Ok(Some(spec))
}

/// Enumerated hopping sums against the closed-form ratios.
pub fn cmd_ratio(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<()> {
    if cfg.ratio.cases.is_empty() {
        return Err(config_err!("ratio needs ratio.cases"));
    }
    let kinds: Vec<(String, RatioKind)> =
        cfg.ratio.cases.iter().map(|c| Ok((c.clone(), parse_ratio_case(c)?))).collect::<Result<_>>()?;
    let rows: Result<Vec<Vec<String>>> = kinds
        .par_iter()
        .map(|(case, kind)| {
            let coeff = ratio_coefficient(*kind)?;
            let closed = ratio_closed_form(*kind, cfg.j0, cfg.j1)?;
            let closed_cols = [coeff.to_string(), fmt_f64(closed)];
            let row = match ratio_lattice(*kind, cfg.j0, cfg.j1)? {
                None => {
                    let na = "NaN".to_string();
                    let mut r = vec![case.clone(), na.clone(), na.clone(), na.clone(), na.clone(), na.clone(), na.clone(), na];
                    r.extend(closed_cols);
                    r.push("NaN".into());
                    r
                }
                Some(spec) => {
                    let sums = hopping_sums_direct(&spec)?;
                    let pr = sums.pair_ratio();
                    let matches = pr == Some(coeff) && (sums.ratio - closed).abs() <= 1e-12 * closed.abs().max(1.0);
                    let mut r = vec![
                        case.clone(),
                        hyper_dim(*kind).to_string(),
                        sums.hyper_pairs.to_string(),
                        sums.escape_pairs.to_string(),
                        fmt_f64(sums.theta),
                        fmt_f64(sums.gamma_sum),
                        fmt_f64(sums.ratio),
                        pr.map_or("NaN".into(), |p| p.to_string()),
                    ];
                    r.extend(closed_cols);
                    r.push(u8::from(matches).to_string());
                    r
                }
            };
            Ok(row)
        })
        .collect();
    out.csv(
        "ratio.csv",
        &[
            "case",
            "hyper_dimension",
            "hyper_pairs",
            "escape_pairs",
            "theta [J]",
            "gamma_sum [J]",
            "ratio [1]",
            "pair_ratio",
            "closed_form_coefficient",
            "closed_form [1]",
            "match [bool]",
        ],
        rows?,
    )?;
    Ok(())
}

/// Hypercube dimension of a ratio case; zero for the large-`m` limit.
fn hyper_dim(kind: RatioKind) -> u128 {
    match kind {
        RatioKind::OneD { n } => 1u128.checked_shl(n as u32).unwrap_or(u128::MAX),
        RatioKind::TwoD { nx, ny } => 6u128.saturating_pow((nx * ny) as u32),
        RatioKind::ThreeD { nx, ny, nz } => 70u128.saturating_pow((nx * ny * nz) as u32),
        RatioKind::MdLimit { .. } => 0,
    }
}

/// Writes one random dimer cluster as `lattice.json`.
pub fn cmd_cluster_gen(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<()> {
    if cfg.model != Model::RandomCluster {
        return Err(config_err!("cluster-gen needs model = \"random-cluster\""));
    }
    if cfg.sweep.is_some() {
        return Err(config_err!("cluster-gen does not take a sweep block"));
    }
    let spec = cfg.lattice(&cfg.points()[0])?;
    out.json("lattice.json", &spec)?;
    Ok(())
}
