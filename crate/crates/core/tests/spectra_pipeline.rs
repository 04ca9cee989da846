//! End-to-end behavior of the parity-sector and level-statistics pipeline:
//! sector completeness, statistics of the reference ensembles against the
//! analytic spacing densities, and the unfolding-insensitivity of the
//! gap-ratio statistic.

use rabilab::{
    diagonalize, gap_ratios, nnsd_histogram, reference_ensembles, split_parity_sectors,
    unfold_levels, EnsembleKind, HistogramOptions, ModelKind, ModelParams, SpinRep, StatsOptions,
    Spectrum,
};

fn base_params(n_qubits: usize, n_max: usize) -> ModelParams {
    ModelParams {
        delta: 0.7,
        omega: 1.1,
        g: 0.4,
        epsilon: 0.0,
        n_qubits,
        rep: SpinRep::Collective,
        n_max,
    }
}

#[test]
fn sector_union_reproduces_the_full_spectrum_for_all_models() {
    let cases = [
        (ModelKind::Rabi, 1),
        (ModelKind::JaynesCummings, 1),
        (ModelKind::Dicke, 2),
        (ModelKind::TavisCummings, 3),
    ];
    for (kind, n_qubits) in cases {
        let p = base_params(n_qubits, 20);
        let full = diagonalize(kind, &p).unwrap();
        let (plus, minus) = split_parity_sectors(kind, &p).unwrap();
        assert_eq!(plus.len() + minus.len(), full.len());
        let mut union: Vec<f64> = plus
            .eigenvalues
            .iter()
            .chain(minus.eigenvalues.iter())
            .copied()
            .collect();
        union.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let width = full.eigenvalues.last().unwrap() - full.eigenvalues[0];
        for (u, f) in union.iter().zip(full.eigenvalues.iter()) {
            assert!(
                (u - f).abs() <= 1e-11 * width,
                "{kind:?}: sector union misses {f} (nearest {u})"
            );
        }
    }
}

#[test]
fn decoupled_levels_alternate_between_parity_sectors() {
    // g = 0: |σ, n⟩ are exact eigenstates with parity (−1)^(n + [σ=↑]).
    // Levels ωn − Δ/2 (σ=↓) carry parity (−1)^n; ωn + Δ/2 carry (−1)^(n+1).
    let p = ModelParams { g: 0.0, ..base_params(1, 16) };
    let (plus, minus) = split_parity_sectors(ModelKind::Rabi, &p).unwrap();
    let contains = |s: &Spectrum, e: f64| s.eigenvalues.iter().any(|x| (x - e).abs() <= 1e-12);
    for n in 0..8 {
        let down = p.omega * n as f64 - p.delta / 2.0;
        let up = p.omega * n as f64 + p.delta / 2.0;
        let (down_sector, up_sector) = if n % 2 == 0 {
            (&plus, &minus)
        } else {
            (&minus, &plus)
        };
        assert!(contains(down_sector, down), "n={n}: down level in wrong sector");
        assert!(contains(up_sector, up), "n={n}: up level in wrong sector");
    }
}

#[test]
fn no_cross_sector_degeneracy_at_generic_parameters() {
    let p = ModelParams { delta: 0.63, omega: 0.97, g: 0.31, ..base_params(2, 36) };
    let (plus, minus) = split_parity_sectors(ModelKind::Dicke, &p).unwrap();
    let width = plus.eigenvalues.last().unwrap() - plus.eigenvalues[0];
    for (e, &c) in plus.eigenvalues.iter().zip(&plus.converged) {
        if !c {
            continue;
        }
        let clash = minus
            .eigenvalues
            .iter()
            .zip(&minus.converged)
            .any(|(x, &cc)| cc && (x - e).abs() <= 1e-10 * width);
        assert!(!clash, "converged level {e} appears in both sectors");
    }
}

#[test]
fn poisson_histogram_matches_the_exponential_density() {
    let opts = StatsOptions::default();
    let hopts = HistogramOptions::default();
    // ~1400 ratios per draw after trimming; 72 draws ≈ 10⁵ spacings.
    let stats =
        reference_ensembles(EnsembleKind::Poisson, 2000, 72, 2024, &opts, Some(&hopts)).unwrap();
    assert!(stats.gap_ratios.len() >= 100_000);
    let hist = stats.histogram.unwrap();
    let mut worst = 0.0f64;
    for (k, d) in hist.densities.iter().enumerate() {
        let s = 0.5 * (hist.edges[k] + hist.edges[k + 1]);
        worst = worst.max((d - (-s).exp()).abs());
    }
    assert!(worst < 0.05, "Poisson NNSD deviates from e^(-s) by {worst:.3}");
}

#[test]
fn goe_histogram_matches_the_wigner_surmise() {
    let opts = StatsOptions::default();
    let hopts = HistogramOptions::default();
    let stats =
        reference_ensembles(EnsembleKind::Goe, 500, 50, 2024, &opts, Some(&hopts)).unwrap();
    let hist = stats.histogram.unwrap();
    let mut worst = 0.0f64;
    for (k, d) in hist.densities.iter().enumerate() {
        let s = 0.5 * (hist.edges[k] + hist.edges[k + 1]);
        let surmise = std::f64::consts::FRAC_PI_2 * s
            * (-std::f64::consts::FRAC_PI_4 * s * s).exp();
        worst = worst.max((d - surmise).abs());
    }
    assert!(worst < 0.05, "GOE NNSD deviates from the surmise by {worst:.3}");
}

#[test]
fn gap_ratio_is_insensitive_to_unfolding() {
    // r̃ needs no unfolding; check that unfolding the levels first moves the
    // mean ratio by < 0.005 on a Poisson sample.
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
    let mut levels: Vec<f64> = (0..20_000).map(|_| rng.gen::<f64>()).collect();
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let ratios_of = |ls: &[f64]| {
        let gaps: Vec<f64> = ls.windows(2).map(|w| w[1] - w[0]).collect();
        let rs: Vec<f64> = gaps
            .windows(2)
            .map(|w| if w[0] < w[1] { w[0] / w[1] } else { w[1] / w[0] })
            .collect();
        rs.iter().sum::<f64>() / rs.len() as f64
    };
    let raw = ratios_of(&levels);
    let unfolded = unfold_levels(&levels, 7).unwrap();
    let refit = ratios_of(&unfolded);
    assert!(
        (raw - refit).abs() < 0.005,
        "unfolding moved mean r̃ from {raw:.4} to {refit:.4}"
    );
}

#[test]
fn model_gap_ratios_flow_through_the_stats_pipeline() {
    // A strongly coupled Dicke sector produces a usable LevelStats row with
    // ratios in [0, 1]; this is the plumbing the sweep builds on.
    let p = ModelParams {
        delta: 0.5,
        omega: 1.0,
        g: 0.5,
        epsilon: 0.0,
        n_qubits: 4,
        rep: SpinRep::Collective,
        n_max: 60,
    };
    let (plus, _) = split_parity_sectors(ModelKind::Dicke, &p).unwrap();
    let opts = StatsOptions { min_levels: 40, ..Default::default() };
    let stats = gap_ratios(&plus, &opts).unwrap();
    assert!(stats.n_levels_used >= 28);
    assert!(stats.gap_ratios.iter().all(|r| (0.0..=1.0).contains(r)));
    assert!((0.0..=1.0).contains(&stats.mean_ratio));

    let hopts = HistogramOptions { unfolding_degree: 2, ..Default::default() };
    let with_hist = nnsd_histogram(&plus, &opts, &hopts).unwrap();
    let hist = with_hist.histogram.unwrap();
    assert_eq!(hist.densities.len(), hopts.bins);
}
