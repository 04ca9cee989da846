//! Level statistics: consecutive-gap ratios, unfolded nearest-neighbour
//! spacing histograms, reference ensembles, and parameter sweeps.
//!
//! The gap-ratio statistic r̃ = min(sₙ, sₙ₊₁)/max(sₙ, sₙ₊₁) needs no
//! unfolding and separates Poisson (⟨r̃⟩ = 2 ln 2 − 1 ≈ 0.3863) from GOE
//! (⟨r̃⟩ ≈ 0.5307). Spacing histograms are unfolded with a polynomial fit to
//! the spectral staircase. Both work on converged levels of a single
//! symmetry sector with the spectral edges trimmed away.

use ndarray::{Array1, Array2};
use ndarray_linalg::Solve;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{diagonalize_with, split_parity_sectors_with, ConvergenceOptions, Spectrum};
use crate::error::{Error, Result};
use crate::linalg::eigvalsh_real;
use crate::models::{ModelKind, ModelParams};

/// Mean gap ratio of a Poisson level sequence, 2 ln 2 − 1.
pub const POISSON_MEAN_RATIO: f64 = 0.386_294_361_119_890_6;

/// Mean gap ratio of the GOE, 4 − 2√3 from the Wigner surmise (the large-N
/// value is ≈ 0.5307).
pub const GOE_SURMISE_RATIO: f64 = 0.535_898_384_862_245_4;

/// Level selection policy for the statistics.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct StatsOptions {
    /// Fraction of converged levels dropped at each spectral edge.
    pub trim_fraction: f64,
    /// Gaps below this fraction of the trimmed spectral width count as
    /// degeneracies and are removed.
    pub degeneracy_rel_tol: f64,
    /// Minimum number of converged levels required.
    pub min_levels: usize,
}

impl Default for StatsOptions {
    fn default() -> Self {
        Self { trim_fraction: 0.15, degeneracy_rel_tol: 1e-10, min_levels: 50 }
    }
}

/// Unfolding and binning controls for the spacing histogram.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct HistogramOptions {
    /// Degree of the polynomial staircase fit.
    pub unfolding_degree: usize,
    pub bins: usize,
    /// Upper edge of the histogram range (in units of the mean spacing).
    pub s_max: f64,
}

impl Default for HistogramOptions {
    fn default() -> Self {
        Self { unfolding_degree: 7, bins: 40, s_max: 4.0 }
    }
}

/// Density histogram of unfolded spacings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` edges from 0 to s_max.
    pub edges: Vec<f64>,
    /// Normalized by total count and bin width.
    pub densities: Vec<f64>,
    pub total_spacings: usize,
}

/// Gap-ratio (and optionally spacing) statistics of a level sequence.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelStats {
    pub mean_ratio: f64,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub gap_ratios: Vec<f64>,
    pub n_levels_used: usize,
    pub n_degenerate_removed: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub histogram: Option<Histogram>,
}

/// Converged, trimmed, degeneracy-free level list — the common front end of
/// every statistic here.
fn select_levels(converged: &[f64], opts: &StatsOptions) -> Result<(Vec<f64>, usize)> {
    if converged.len() < opts.min_levels {
        return Err(Error::TooFewLevels { needed: opts.min_levels, got: converged.len() });
    }
    if !(0.0..0.5).contains(&opts.trim_fraction) {
        return Err(Error::InvalidParameter(format!(
            "trim fraction must be in [0, 0.5), got {}",
            opts.trim_fraction
        )));
    }
    let mut levels: Vec<f64> = converged.to_vec();
    if levels.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("non-finite level".into()));
    }
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = (opts.trim_fraction * levels.len() as f64).floor() as usize;
    let trimmed = &levels[k..levels.len() - k];
    if trimmed.len() < 3 {
        return Err(Error::TooFewLevels { needed: 3, got: trimmed.len() });
    }
    let width = trimmed[trimmed.len() - 1] - trimmed[0];
    if width <= 0.0 {
        return Err(Error::InvalidParameter("trimmed spectrum has zero width".into()));
    }
    let tol = opts.degeneracy_rel_tol * width;
    let mut kept = Vec::with_capacity(trimmed.len());
    let mut removed = 0usize;
    for &e in trimmed {
        match kept.last() {
            Some(&prev) if e - prev < tol => removed += 1,
            _ => kept.push(e),
        }
    }
    if kept.len() < 3 {
        return Err(Error::TooFewLevels { needed: 3, got: kept.len() });
    }
    Ok((kept, removed))
}

fn ratios_of(levels: &[f64]) -> Vec<f64> {
    let gaps: Vec<f64> = levels.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            if a < b {
                a / b
            } else {
                b / a
            }
        })
        .collect()
}

/// Map a sorted level list to unfolded positions: the value of a polynomial
/// staircase fit (Chebyshev basis of the given degree) at each level. After
/// unfolding, the mean local level density is 1 by construction.
pub fn unfold_levels(levels: &[f64], degree: usize) -> Result<Vec<f64>> {
    let n = levels.len();
    if degree < 1 {
        return Err(Error::InvalidParameter("unfolding degree must be >= 1".into()));
    }
    if 10 * degree > n {
        return Err(Error::InvalidParameter(format!(
            "unfolding degree {degree} too high for {n} levels"
        )));
    }
    let lo = levels[0];
    let hi = levels[n - 1];
    if !(hi > lo) {
        return Err(Error::InvalidParameter("levels must span a positive width".into()));
    }
    let scale = 2.0 / (hi - lo);
    // Chebyshev design matrix on [-1, 1].
    let cols = degree + 1;
    let mut design = Array2::<f64>::zeros((n, cols));
    for (i, &e) in levels.iter().enumerate() {
        let t = scale * (e - lo) - 1.0;
        design[(i, 0)] = 1.0;
        if cols > 1 {
            design[(i, 1)] = t;
        }
        for k in 2..cols {
            design[(i, k)] = 2.0 * t * design[(i, k - 1)] - design[(i, k - 2)];
        }
    }
    let target = Array1::from_iter((0..n).map(|i| i as f64 + 0.5));
    let ata = design.t().dot(&design);
    let atb = design.t().dot(&target);
    let coeff = ata
        .solve(&atb)
        .map_err(|e| Error::InvalidParameter(format!("staircase fit failed: {e}")))?;
    Ok(design.dot(&coeff).to_vec())
}

/// Unfold a level list and return the spacings normalized to unit mean.
fn unfolded_spacings(levels: &[f64], degree: usize) -> Result<Vec<f64>> {
    let staircase = unfold_levels(levels, degree)?;
    let mut spacings: Vec<f64> = staircase
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|s| *s > 0.0)
        .collect();
    if spacings.is_empty() {
        return Err(Error::InvalidParameter("unfolding produced no positive spacings".into()));
    }
    let mean = spacings.iter().sum::<f64>() / spacings.len() as f64;
    for s in &mut spacings {
        *s /= mean;
    }
    Ok(spacings)
}

fn histogram_of(spacings: &[f64], hopts: &HistogramOptions) -> Result<Histogram> {
    if hopts.bins == 0 || !(hopts.s_max > 0.0) {
        return Err(Error::InvalidParameter("histogram needs bins > 0 and s_max > 0".into()));
    }
    let dx = hopts.s_max / hopts.bins as f64;
    let mut counts = vec![0usize; hopts.bins];
    for &s in spacings {
        if s >= 0.0 && s < hopts.s_max {
            counts[(s / dx) as usize] += 1;
        }
    }
    let total = spacings.len();
    let densities = counts
        .iter()
        .map(|&c| c as f64 / (total as f64 * dx))
        .collect();
    let edges = (0..=hopts.bins).map(|k| k as f64 * dx).collect();
    Ok(Histogram { edges, densities, total_spacings: total })
}

fn stats_from_levels(
    converged: &[f64],
    opts: &StatsOptions,
    hopts: Option<&HistogramOptions>,
) -> Result<LevelStats> {
    let (kept, removed) = select_levels(converged, opts)?;
    let ratios = ratios_of(&kept);
    if ratios.is_empty() {
        return Err(Error::TooFewLevels { needed: 4, got: kept.len() });
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let histogram = match hopts {
        Some(h) => Some(histogram_of(&unfolded_spacings(&kept, h.unfolding_degree)?, h)?),
        None => None,
    };
    Ok(LevelStats {
        mean_ratio: mean,
        gap_ratios: ratios,
        n_levels_used: kept.len(),
        n_degenerate_removed: removed,
        histogram,
    })
}

/// Consecutive-gap-ratio statistics of one spectrum (converged levels only).
pub fn gap_ratios(spectrum: &Spectrum, opts: &StatsOptions) -> Result<LevelStats> {
    stats_from_levels(&spectrum.converged_levels(), opts, None)
}

/// Gap ratios plus an unfolded nearest-neighbour spacing histogram.
pub fn nnsd_histogram(
    spectrum: &Spectrum,
    opts: &StatsOptions,
    hopts: &HistogramOptions,
) -> Result<LevelStats> {
    stats_from_levels(&spectrum.converged_levels(), opts, Some(hopts))
}

/// Synthetic reference ensembles for calibrating the statistics pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    /// Independent uniform levels — Poisson statistics.
    Poisson,
    /// Gaussian orthogonal ensemble.
    Goe,
}

impl std::str::FromStr for EnsembleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "poisson" => Ok(EnsembleKind::Poisson),
            "goe" => Ok(EnsembleKind::Goe),
            other => Err(Error::InvalidParameter(format!(
                "unknown ensemble `{other}` (expected poisson|goe)"
            ))),
        }
    }
}

fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller; rejection of u = 0 keeps the log finite.
    loop {
        let u: f64 = rng.gen();
        if u > f64::MIN_POSITIVE {
            let v: f64 = rng.gen();
            return (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos();
        }
    }
}

fn ensemble_draw(kind: EnsembleKind, dimension: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    match kind {
        EnsembleKind::Poisson => {
            let mut levels: Vec<f64> = (0..dimension).map(|_| rng.gen::<f64>()).collect();
            levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
            Ok(levels)
        }
        EnsembleKind::Goe => {
            let mut m = Array2::<f64>::zeros((dimension, dimension));
            for i in 0..dimension {
                m[(i, i)] = standard_normal(rng);
                for j in (i + 1)..dimension {
                    let x = standard_normal(rng) * std::f64::consts::FRAC_1_SQRT_2;
                    m[(i, j)] = x;
                    m[(j, i)] = x;
                }
            }
            eigvalsh_real(&m)
        }
    }
}

/// Pooled statistics over `draws` independent realizations of a reference
/// ensemble. Every draw runs through the same selection pipeline as a model
/// spectrum (all levels count as converged). Draw `i` uses an independent
/// ChaCha stream `i` of the given seed, so results are deterministic and
/// independent of evaluation order.
pub fn reference_ensembles(
    kind: EnsembleKind,
    dimension: usize,
    draws: usize,
    seed: u64,
    opts: &StatsOptions,
    hopts: Option<&HistogramOptions>,
) -> Result<LevelStats> {
    if dimension < 100.max(opts.min_levels) {
        return Err(Error::TooFewLevels { needed: 100.max(opts.min_levels), got: dimension });
    }
    if draws < 10 {
        return Err(Error::InvalidParameter(format!(
            "reference ensembles need at least 10 draws, got {draws}"
        )));
    }
    let mut pooled_ratios: Vec<f64> = Vec::new();
    let mut pooled_spacings: Vec<f64> = Vec::new();
    let mut used = 0usize;
    let mut removed = 0usize;
    for draw in 0..draws {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(draw as u64);
        let levels = ensemble_draw(kind, dimension, &mut rng)?;
        let (kept, rem) = select_levels(&levels, opts)?;
        pooled_ratios.extend(ratios_of(&kept));
        if let Some(h) = hopts {
            pooled_spacings.extend(unfolded_spacings(&kept, h.unfolding_degree)?);
        }
        used += kept.len();
        removed += rem;
    }
    if pooled_ratios.is_empty() {
        return Err(Error::TooFewLevels { needed: 4, got: 0 });
    }
    let mean = pooled_ratios.iter().sum::<f64>() / pooled_ratios.len() as f64;
    let histogram = match hopts {
        Some(h) => Some(histogram_of(&pooled_spacings, h)?),
        None => None,
    };
    Ok(LevelStats {
        mean_ratio: mean,
        gap_ratios: pooled_ratios,
        n_levels_used: used,
        n_degenerate_removed: removed,
        histogram,
    })
}

/// Which sector(s) a sweep analyzes at each grid point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectorPolicy {
    Both,
    Plus,
    Minus,
    /// No parity resolution (appropriate when parity is broken).
    Unsectored,
}

impl std::str::FromStr for SectorPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "both" => Ok(SectorPolicy::Both),
            "plus" => Ok(SectorPolicy::Plus),
            "minus" => Ok(SectorPolicy::Minus),
            "unsectored" => Ok(SectorPolicy::Unsectored),
            other => Err(Error::InvalidParameter(format!(
                "unknown sector policy `{other}` (expected both|plus|minus|unsectored)"
            ))),
        }
    }
}

/// One grid point of a sweep.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SweepPoint {
    pub kind: ModelKind,
    pub params: ModelParams,
}

/// One output row of a sweep: statistics or a per-point error, never a
/// failure of the whole sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRow {
    pub kind: ModelKind,
    pub params: ModelParams,
    pub sector: Option<i8>,
    pub mean_ratio: Option<f64>,
    pub n_levels_used: usize,
    pub n_degenerate_removed: usize,
    pub converged_fraction: f64,
    pub error: Option<String>,
}

fn row_from_spectrum(spectrum: &Spectrum, opts: &StatsOptions) -> SweepRow {
    let base = SweepRow {
        kind: spectrum.kind,
        params: spectrum.params,
        sector: spectrum.sector,
        mean_ratio: None,
        n_levels_used: 0,
        n_degenerate_removed: 0,
        converged_fraction: spectrum.converged_fraction(),
        error: None,
    };
    match gap_ratios(spectrum, opts) {
        Ok(stats) => SweepRow {
            mean_ratio: Some(stats.mean_ratio),
            n_levels_used: stats.n_levels_used,
            n_degenerate_removed: stats.n_degenerate_removed,
            ..base
        },
        Err(e) => SweepRow { error: Some(e.to_string()), ..base },
    }
}

fn error_row(point: &SweepPoint, sector: Option<i8>, e: &Error) -> SweepRow {
    SweepRow {
        kind: point.kind,
        params: point.params,
        sector,
        mean_ratio: None,
        n_levels_used: 0,
        n_degenerate_removed: 0,
        converged_fraction: 0.0,
        error: Some(e.to_string()),
    }
}

/// Gap-ratio statistics over a parameter grid. Points run in parallel;
/// output order matches input order, and a failing point produces an error
/// row rather than aborting the sweep.
pub fn sweep_stats(
    points: &[SweepPoint],
    policy: SectorPolicy,
    opts: &StatsOptions,
    conv: &ConvergenceOptions,
) -> Vec<SweepRow> {
    points
        .par_iter()
        .map(|point| -> Vec<SweepRow> {
            match policy {
                SectorPolicy::Unsectored => {
                    match diagonalize_with(point.kind, &point.params, conv) {
                        Ok(s) => vec![row_from_spectrum(&s, opts)],
                        Err(e) => vec![error_row(point, None, &e)],
                    }
                }
                SectorPolicy::Plus | SectorPolicy::Minus | SectorPolicy::Both => {
                    match split_parity_sectors_with(point.kind, &point.params, conv) {
                        Ok((plus, minus)) => match policy {
                            SectorPolicy::Plus => vec![row_from_spectrum(&plus, opts)],
                            SectorPolicy::Minus => vec![row_from_spectrum(&minus, opts)],
                            _ => vec![
                                row_from_spectrum(&plus, opts),
                                row_from_spectrum(&minus, opts),
                            ],
                        },
                        Err(e) => vec![error_row(point, None, &e)],
                    }
                }
            }
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_spectrum(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64).collect()
    }

    #[test]
    fn picket_fence_has_unit_ratio() {
        let (kept, removed) = select_levels(&uniform_spectrum(100), &StatsOptions::default())
            .unwrap();
        assert_eq!(removed, 0);
        let r = ratios_of(&kept);
        assert!(r.iter().all(|&x| (x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn ratios_live_in_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let levels = ensemble_draw(EnsembleKind::Poisson, 300, &mut rng).unwrap();
        let (kept, _) = select_levels(&levels, &StatsOptions::default()).unwrap();
        for r in ratios_of(&kept) {
            assert!((0.0..=1.0).contains(&r));
        }
    }

    #[test]
    fn degenerate_levels_are_removed() {
        let mut levels = uniform_spectrum(100);
        // Triplicate one interior level.
        levels.push(40.0);
        levels.push(40.0);
        levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (kept, removed) = select_levels(&levels, &StatsOptions::default()).unwrap();
        assert_eq!(removed, 2);
        let gaps_ok = kept.windows(2).all(|w| w[1] - w[0] > 0.5);
        assert!(gaps_ok);
    }

    #[test]
    fn trim_drops_both_edges() {
        let levels = uniform_spectrum(100);
        let opts = StatsOptions { trim_fraction: 0.15, ..Default::default() };
        let (kept, _) = select_levels(&levels, &opts).unwrap();
        assert_eq!(kept.len(), 70);
        assert_eq!(kept[0], 15.0);
        assert_eq!(kept[kept.len() - 1], 84.0);
    }

    #[test]
    fn too_few_levels_is_an_error() {
        let r = select_levels(&uniform_spectrum(10), &StatsOptions::default());
        assert!(matches!(r, Err(Error::TooFewLevels { needed: 50, got: 10 })));
    }

    #[test]
    fn unfolding_flattens_a_polynomial_staircase() {
        // Levels E_k = (k + ½)^(1/3) have the exact staircase N(E) = E³, a
        // polynomial the degree-7 fit reproduces, so the unfolded spacings
        // are 1 up to the least-squares conditioning.
        let levels: Vec<f64> = (0..400).map(|k| (k as f64 + 0.5).cbrt()).collect();
        let spacings = unfolded_spacings(&levels, 7).unwrap();
        let var: f64 = spacings.iter().map(|s| (s - 1.0).powi(2)).sum::<f64>()
            / spacings.len() as f64;
        assert!(var < 1e-10, "unfolded variance {var:.3e} too large");

        // A density with an edge singularity (E_k = k², N(E) = √E) is only
        // approximated; the bulk still flattens to within a few percent.
        let levels: Vec<f64> = (1..400).map(|k| (k as f64).powi(2)).collect();
        let spacings = unfolded_spacings(&levels, 7).unwrap();
        let bulk = &spacings[40..spacings.len() - 40];
        let var: f64 =
            bulk.iter().map(|s| (s - 1.0).powi(2)).sum::<f64>() / bulk.len() as f64;
        assert!(var < 5e-2, "bulk unfolded variance {var:.3e} too large");
    }

    #[test]
    fn unfolding_degree_bounds() {
        let levels = uniform_spectrum(60);
        assert!(unfolded_spacings(&levels, 0).is_err());
        assert!(unfolded_spacings(&levels, 7).is_err()); // 10·7 > 60
        assert!(unfolded_spacings(&levels, 5).is_ok());
    }

    #[test]
    fn poisson_reference_hits_the_analytic_mean() {
        let opts = StatsOptions::default();
        let stats =
            reference_ensembles(EnsembleKind::Poisson, 2000, 10, 42, &opts, None).unwrap();
        assert!(
            (stats.mean_ratio - POISSON_MEAN_RATIO).abs() < 0.01,
            "poisson mean ratio {}",
            stats.mean_ratio
        );
    }

    #[test]
    fn goe_reference_is_clearly_rigid() {
        let opts = StatsOptions::default();
        let stats = reference_ensembles(EnsembleKind::Goe, 150, 10, 42, &opts, None).unwrap();
        assert!(stats.mean_ratio > 0.5, "goe mean ratio {}", stats.mean_ratio);
    }

    #[test]
    fn ensembles_are_deterministic_per_seed_and_stream() {
        let opts = StatsOptions::default();
        let a = reference_ensembles(EnsembleKind::Poisson, 500, 10, 9, &opts, None).unwrap();
        let b = reference_ensembles(EnsembleKind::Poisson, 500, 10, 9, &opts, None).unwrap();
        assert_eq!(a.gap_ratios, b.gap_ratios);
        let c = reference_ensembles(EnsembleKind::Poisson, 500, 10, 10, &opts, None).unwrap();
        assert_ne!(a.gap_ratios, c.gap_ratios);
    }

    #[test]
    fn ensemble_preconditions_are_enforced() {
        let opts = StatsOptions::default();
        assert!(reference_ensembles(EnsembleKind::Poisson, 99, 10, 1, &opts, None).is_err());
        assert!(reference_ensembles(EnsembleKind::Poisson, 500, 9, 1, &opts, None).is_err());
    }

    #[test]
    fn histogram_is_normalized() {
        let opts = StatsOptions::default();
        let hopts = HistogramOptions::default();
        let stats =
            reference_ensembles(EnsembleKind::Poisson, 1000, 10, 3, &opts, Some(&hopts)).unwrap();
        let h = stats.histogram.unwrap();
        let dx = h.edges[1] - h.edges[0];
        let mass: f64 = h.densities.iter().map(|d| d * dx).sum();
        // Almost all Poisson spacings lie below s_max = 4.
        assert!(mass > 0.9 && mass <= 1.0 + 1e-12, "histogram mass {mass}");
    }
}
