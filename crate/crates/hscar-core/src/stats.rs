//! Spectral statistics: gap ratios, overlap towers and the quadratic fit of
//! the tower spacing.

use alloc::vec::Vec;

use crate::error::{bail, Result};

/// Mean consecutive-gap ratio of one spectrum.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct GapRatio {
    pub mean: f64,
    /// Number of ratios averaged.
    pub count: usize,
}

/// Below this many ratios the mean is statistically weak.
pub const MIN_RATIOS: usize = 100;

/// `⟨r⟩` with `r_n = min(s_n, s_{n+1}) / max(s_n, s_{n+1})` over an
/// ascending spectrum. Pairs of (numerically) degenerate gaps are skipped.
pub fn gap_ratio(sorted: &[f64]) -> Option<GapRatio> {
    let gaps: Vec<f64> = sorted.windows(2).map(|w| w[1] - w[0]).collect();
    let (mut sum, mut count) = (0.0, 0usize);
    for w in gaps.windows(2) {
        let (lo, hi) = if w[0] < w[1] { (w[0], w[1]) } else { (w[1], w[0]) };
        if hi <= 1e-12 {
            continue;
        }
        sum += lo / hi;
        count += 1;
    }
    (count > 0).then(|| GapRatio { mean: sum / count as f64, count })
}

/// Pools several sector spectra, weighting each ratio equally.
pub fn pooled_gap_ratio(spectra: &[Vec<f64>]) -> Option<GapRatio> {
    let (mut sum, mut count) = (0.0, 0usize);
    for s in spectra {
        if let Some(g) = gap_ratio(s) {
            sum += g.mean * g.count as f64;
            count += g.count;
        }
    }
    (count > 0).then(|| GapRatio { mean: sum / count as f64, count })
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct TowerConfig {
    /// Minimum overlap for an eigenstate to count.
    pub threshold: f64,
    /// Half-width of the peak search and assignment window (energy units).
    pub window: f64,
    /// Towers lighter than this fraction of the heaviest tower are dropped.
    pub min_relative_weight: f64,
}

impl TowerConfig {
    /// Defaults for intra-unit coupling `j0`.
    pub fn for_coupling(j0: f64) -> Self {
        Self { threshold: 1e-3, window: j0.abs(), min_relative_weight: 0.05 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Towers {
    /// Weighted mean energies, ascending.
    pub centers: Vec<f64>,
    /// Summed overlap of each tower.
    pub weights: Vec<f64>,
}

impl Towers {
    /// Mean spacing of consecutive centers.
    pub fn delta_e(&self) -> f64 {
        let n = self.centers.len();
        (self.centers[n - 1] - self.centers[0]) / (n - 1) as f64
    }

    /// Largest relative deviation of a consecutive spacing from the mean.
    pub fn spacing_spread(&self) -> f64 {
        let d = self.delta_e();
        self.centers.windows(2).map(|w| ((w[1] - w[0]) - d).abs() / d).fold(0.0, f64::max)
    }
}

/// Groups `(energy, overlap)` pairs into towers.
///
/// Peaks are states above the threshold whose overlap is maximal within
/// `±window`; every remaining state above the threshold joins the nearest
/// peak within the window.
pub fn extract_towers(overlaps: &[(f64, f64)], cfg: &TowerConfig) -> Result<Towers> {
    let mut cand: Vec<(f64, f64)> = overlaps.iter().copied().filter(|&(_, w)| w >= cfg.threshold).collect();
    cand.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut by_weight: Vec<usize> = (0..cand.len()).collect();
    by_weight.sort_by(|&i, &j| cand[j].1.total_cmp(&cand[i].1));
    let mut peaks: Vec<f64> = Vec::new();
    for &i in &by_weight {
        let (e, w) = cand[i];
        let dominated = cand.iter().any(|&(e2, w2)| (e2 - e).abs() <= cfg.window && w2 > w);
        if !dominated && peaks.iter().all(|&p| (p - e).abs() > cfg.window) {
            peaks.push(e);
        }
    }
    peaks.sort_by(f64::total_cmp);
    let mut sum_w = alloc::vec![0.0; peaks.len()];
    let mut sum_ew = alloc::vec![0.0; peaks.len()];
    for &(e, w) in &cand {
        let nearest = peaks
            .iter()
            .enumerate()
            .map(|(k, &p)| (k, (p - e).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((k, d)) = nearest {
            if d <= cfg.window {
                sum_w[k] += w;
                sum_ew[k] += e * w;
            }
        }
    }
    let heaviest = sum_w.iter().copied().fold(0.0, f64::max);
    let mut centers = Vec::new();
    let mut weights = Vec::new();
    for k in 0..peaks.len() {
        if sum_w[k] > 0.0 && sum_w[k] >= cfg.min_relative_weight * heaviest {
            centers.push(sum_ew[k] / sum_w[k]);
            weights.push(sum_w[k]);
        }
    }
    if centers.len() < 3 {
        bail!(Fit, "found {} towers, need at least 3", centers.len());
    }
    Ok(Towers { centers, weights })
}

/// Result of fitting `ΔE/J0 = λ·x² + 2`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct TowerFit {
    pub lambda: f64,
    /// Root-mean-square deviation of the samples from the fit.
    pub residual: f64,
}

impl TowerFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.lambda * x * x + 2.0
    }
}

/// Largest coupling ratio accepted by [`fit_lambda`].
pub const FIT_WINDOW: f64 = 1.2;

/// Least-squares `λ` in `y = λ·(x + shift)² + 2` over samples `(x, y)` with
/// `x = J1/J0` and `y = ΔE/J0`. Use `shift = J3/J0` for chains with
/// long-range hopping, zero otherwise.
pub fn fit_lambda_shifted(samples: &[(f64, f64)], shift: f64) -> Result<TowerFit> {
    if samples.len() < 4 {
        bail!(Fit, "need at least 4 samples, got {}", samples.len());
    }
    if samples.iter().any(|&(x, y)| !(0.0..=FIT_WINDOW).contains(&x) || !y.is_finite()) {
        bail!(Fit, "samples must have x in [0, {FIT_WINDOW}] and finite y");
    }
    let x0 = samples[0].0;
    if samples.iter().all(|&(x, _)| x == x0) {
        bail!(Fit, "all samples share x = {x0}");
    }
    let (mut num, mut den) = (0.0, 0.0);
    for &(x, y) in samples {
        let u = (x + shift) * (x + shift);
        num += u * (y - 2.0);
        den += u * u;
    }
    if den == 0.0 {
        bail!(Fit, "degenerate fit arguments");
    }
    let lambda = num / den;
    let ss: f64 = samples
        .iter()
        .map(|&(x, y)| {
            let r = y - (lambda * (x + shift) * (x + shift) + 2.0);
            r * r
        })
        .sum();
    Ok(TowerFit { lambda, residual: libm::sqrt(ss / samples.len() as f64) })
}

pub fn fit_lambda(samples: &[(f64, f64)]) -> Result<TowerFit> {
    fit_lambda_shifted(samples, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn gap_ratio_of_ladder_is_one() {
        let e: Vec<f64> = (0..50).map(|k| k as f64 * 0.3).collect();
        let g = gap_ratio(&e).unwrap();
        assert!((g.mean - 1.0).abs() < 1e-12);
        assert_eq!(g.count, 48);
        assert!(gap_ratio(&[0.0, 1.0]).is_none());
    }

    #[test]
    fn exact_parabola() {
        let s: Vec<(f64, f64)> = [0.0, 0.3, 0.6, 0.9, 1.2].iter().map(|&x| (x, 3.0 * x * x + 2.0)).collect();
        let f = fit_lambda(&s).unwrap();
        assert!((f.lambda - 3.0).abs() < 1e-14 && f.residual < 1e-14);
        assert_eq!(f.predict(0.0), 2.0);
        assert!(fit_lambda(&s[..3]).is_err());
        assert!(fit_lambda(&[(0.5, 2.0); 4]).is_err());
        assert!(fit_lambda(&[(0.5, 2.0), (0.6, 2.0), (0.7, 2.0), (1.5, 2.0)]).is_err());
    }

    #[test]
    fn decoupled_towers() {
        // four dimers: weights C(4,k)/16 at energies (2k-4)
        let ov: Vec<(f64, f64)> = (0..=4).map(|k| ((2 * k) as f64 - 4.0, [1., 4., 6., 4., 1.][k] / 16.0)).collect();
        let t = extract_towers(&ov, &TowerConfig::for_coupling(1.0)).unwrap();
        assert_eq!(t.centers, vec![-4.0, -2.0, 0.0, 2.0, 4.0]);
        assert!((t.delta_e() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn too_few_towers() {
        let ov = [(-1.0, 0.5), (1.0, 0.5)];
        assert!(matches!(extract_towers(&ov, &TowerConfig::for_coupling(1.0)), Err(crate::Error::Fit(_))));
    }
}
