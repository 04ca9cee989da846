//! The acceptance gate: one test per shipped guarantee, each printing a
//! single summary line with the measured value next to its tolerance.
//!
//! Run `cargo test --test acceptance -- --nocapture` to see the lines; a
//! plain `cargo test` still enforces everything, since each line is also an
//! assertion. The timed criteria budget wall-clock seconds, so every test
//! takes a shared lock and the suite runs sequentially even when the harness
//! is given more threads.

use std::path::PathBuf;
use std::sync::{Mutex, MutexGuard};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use rabilab::{
    charge_search_probe, check_rtt, check_tau_identity, check_ybe, commutator_residual,
    diagonalize, extract_charges, gap_ratios, hamiltonian, monodromy, projector_below,
    reference_ensembles, split_parity_sectors, symmetry_operator, transfer_matrix, EnsembleKind,
    IntegrablePoint, ModelKind, ModelParams, ProbeConfig, ProbeSample, SpectralParams, SpinRep,
    StatsOptions, SymmetryKind, TwistModel,
};

static SEQUENTIAL: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    // A poisoned lock only means another criterion failed; this one should
    // still run and report.
    SEQUENTIAL.lock().unwrap_or_else(|e| e.into_inner())
}

/// One independent generator per (seed, draw) pair: draws can be reordered or
/// parallelized without changing any sampled value.
fn rng(seed: u64, draw: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(draw);
    r
}

fn uniform(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * r.gen::<f64>()
}

#[test]
fn criterion_01_yang_baxter_equation() {
    let _guard = serial();
    let start = Instant::now();
    let mut max_residual = 0.0f64;
    for draw in 0..100 {
        let mut r = rng(7, draw);
        let u = uniform(&mut r, -2.0, 2.0);
        let v = uniform(&mut r, -2.0, 2.0);
        let eta = uniform(&mut r, 0.2, 2.2);
        let residual = check_ybe(&SpectralParams::new(u, v, eta));
        assert!(
            residual <= 1e-12,
            "criterion 1 FAIL: YBE residual {residual:.3e} > 1e-12 at (u, v, eta) = ({u}, {v}, {eta})"
        );
        max_residual = max_residual.max(residual);
    }
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 1.0, "criterion 1 FAIL: runtime {secs:.3} s >= 1 s");
    println!(
        "criterion 1 PASS: YBE over 100 seeded (u, v, eta) draws, max residual {max_residual:.3e} <= 1e-12, runtime {secs:.3} s < 1 s"
    );
}

/// The RTT model/point grid: each entry fixes the twist model, spin count,
/// representation, and drive strength; `factorised` applies at omega0, where
/// the full-tensor chain factorizes into per-site Lax operators.
struct RttCombo {
    label: &'static str,
    model: TwistModel,
    n_qubits: usize,
    rep: SpinRep,
    epsilon: f64,
    factorised: bool,
}

const RTT_COMBOS: [RttCombo; 7] = [
    RttCombo {
        label: "rabi",
        model: TwistModel::Rabi,
        n_qubits: 1,
        rep: SpinRep::Collective,
        epsilon: 0.0,
        factorised: false,
    },
    RttCombo {
        label: "dicke nq=2 full_tensor",
        model: TwistModel::Dicke,
        n_qubits: 2,
        rep: SpinRep::FullTensor,
        epsilon: 0.0,
        factorised: true,
    },
    RttCombo {
        label: "dicke nq=3 full_tensor",
        model: TwistModel::Dicke,
        n_qubits: 3,
        rep: SpinRep::FullTensor,
        epsilon: 0.0,
        factorised: true,
    },
    RttCombo {
        label: "dicke nq=4 collective",
        model: TwistModel::Dicke,
        n_qubits: 4,
        rep: SpinRep::Collective,
        epsilon: 0.0,
        factorised: false,
    },
    RttCombo {
        label: "dicke nq=6 collective",
        model: TwistModel::Dicke,
        n_qubits: 6,
        rep: SpinRep::Collective,
        epsilon: 0.0,
        factorised: false,
    },
    RttCombo {
        label: "generalized eps=0.3",
        model: TwistModel::Generalized,
        n_qubits: 1,
        rep: SpinRep::Collective,
        epsilon: 0.3,
        factorised: false,
    },
    RttCombo {
        label: "generalized eps=1.0",
        model: TwistModel::Generalized,
        n_qubits: 1,
        rep: SpinRep::Collective,
        epsilon: 1.0,
        factorised: false,
    },
];

/// Model parameters with the couplings an integrable point requires: Δ = 0 at
/// delta0, ω = 0 at omega0, the free one drawn from `[0.3, 1.5]`.
fn rtt_params(combo: &RttCombo, point: IntegrablePoint, r: &mut ChaCha8Rng, n_max: usize) -> ModelParams {
    let g = uniform(r, 0.2, 1.2);
    let (delta, omega) = match point {
        IntegrablePoint::Delta0 => (0.0, uniform(r, 0.3, 1.5)),
        IntegrablePoint::Omega0 => (uniform(r, 0.3, 1.5), 0.0),
    };
    ModelParams {
        delta,
        omega,
        g,
        epsilon: combo.epsilon,
        n_qubits: combo.n_qubits,
        rep: combo.rep,
        n_max,
    }
}

#[test]
fn criterion_02_rtt_relation() {
    let _guard = serial();
    let start = Instant::now();
    let mut max_projected = 0.0f64;
    for (ci, combo) in RTT_COMBOS.iter().enumerate() {
        for (pi, point) in [IntegrablePoint::Delta0, IntegrablePoint::Omega0].into_iter().enumerate()
        {
            let factorised = combo.factorised && point == IntegrablePoint::Omega0;
            for draw in 0..20 {
                let mut r = rng(100 + 2 * ci as u64 + pi as u64, draw);
                let mp = rtt_params(combo, point, &mut r, 24);
                let u = uniform(&mut r, -1.5, 1.5);
                let v = uniform(&mut r, -1.5, 1.5);
                let eta = match point {
                    IntegrablePoint::Delta0 => None,
                    IntegrablePoint::Omega0 => Some(uniform(&mut r, 0.3, 1.5)),
                };
                let sp = SpectralParams::pinned(point, combo.model, &mp, u, v, eta).unwrap();
                let m = monodromy(point, combo.model, &mp, &sp, factorised).unwrap();
                let check = check_rtt(&m, u, v, 2).unwrap();
                assert!(
                    check.projected <= 1e-10,
                    "criterion 2 FAIL: projected RTT residual {:.3e} > 1e-10 for {} at {point} draw {draw}",
                    check.projected,
                    combo.label,
                );
                max_projected = max_projected.max(check.projected);
            }
        }
    }

    // Truncation-edge contrast. At delta0 the Lax operator is bosonic, so the
    // unprojected relation picks up the corrupted ladder commutator at the top
    // of the Fock space; the projected one must stay at float level. (At
    // omega0 the boson enters only through the twist, whose entries commute
    // with themselves, so no edge defect exists there to contrast against.)
    let mut min_ratio = f64::INFINITY;
    for combo in &RTT_COMBOS {
        let mp = ModelParams {
            delta: 0.0,
            omega: 1.0,
            g: 0.6,
            epsilon: combo.epsilon,
            n_qubits: combo.n_qubits,
            rep: combo.rep,
            n_max: 16,
        };
        let sp =
            SpectralParams::pinned(IntegrablePoint::Delta0, combo.model, &mp, 0.31, -0.27, None)
                .unwrap();
        let m = monodromy(IntegrablePoint::Delta0, combo.model, &mp, &sp, false).unwrap();
        let check = check_rtt(&m, 0.31, -0.27, 2).unwrap();
        assert!(
            check.unprojected > 1e-10,
            "criterion 2 FAIL: no visible truncation-edge defect for {} (unprojected {:.3e})",
            combo.label,
            check.unprojected,
        );
        assert!(
            check.unprojected >= 1e3 * check.projected,
            "criterion 2 FAIL: unprojected {:.3e} < 1e3 x projected {:.3e} for {}",
            check.unprojected,
            check.projected,
            combo.label,
        );
        min_ratio = min_ratio.min(check.unprojected / check.projected.max(f64::MIN_POSITIVE));
    }

    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 120.0, "criterion 2 FAIL: runtime {secs:.1} s >= 120 s");
    println!(
        "criterion 2 PASS: RTT over 14 model/point combos x 20 draws (n_max 24, buffer 2), max projected residual {max_projected:.3e} <= 1e-10; edge contrast at n_max 16 over the delta0 (bosonic-Lax) constructions, min unprojected/projected ratio {min_ratio:.1e} >= 1e3; runtime {secs:.1} s < 120 s"
    );
}

#[test]
fn criterion_03_transfer_matrix_identities() {
    let _guard = serial();
    let single = |delta: f64, omega: f64, epsilon: f64| ModelParams {
        delta,
        omega,
        g: 0.4,
        epsilon,
        n_qubits: 1,
        rep: SpinRep::Collective,
        n_max: 14,
    };
    let dicke_chain = ModelParams {
        delta: 0.7,
        omega: 0.0,
        g: 0.4,
        epsilon: 0.0,
        n_qubits: 3,
        rep: SpinRep::FullTensor,
        n_max: 12,
    };
    // The five closed-form tau claims: the two single-qubit displays, the
    // leading coefficients of the factorised chain, and the two
    // generalized-model identities.
    let cases: [(&str, IntegrablePoint, TwistModel, bool, ModelParams); 5] = [
        ("delta0 rabi", IntegrablePoint::Delta0, TwistModel::Rabi, false, single(0.0, 0.9, 0.0)),
        ("omega0 rabi", IntegrablePoint::Omega0, TwistModel::Rabi, false, single(0.7, 0.0, 0.0)),
        ("omega0 dicke factorised", IntegrablePoint::Omega0, TwistModel::Dicke, true, dicke_chain),
        (
            "delta0 generalized",
            IntegrablePoint::Delta0,
            TwistModel::Generalized,
            false,
            single(0.0, 0.9, 0.5),
        ),
        (
            "omega0 generalized",
            IntegrablePoint::Omega0,
            TwistModel::Generalized,
            false,
            single(0.7, 0.0, 0.5),
        ),
    ];
    let mut max_residual = 0.0f64;
    for (label, point, model, factorised, mp) in cases {
        let eta = match point {
            IntegrablePoint::Delta0 => None,
            IntegrablePoint::Omega0 => Some(1.1),
        };
        let sp = SpectralParams::pinned(point, model, &mp, 0.31, -0.27, eta).unwrap();
        let m = monodromy(point, model, &mp, &sp, factorised).unwrap();
        let residual = check_tau_identity(&m).unwrap();
        assert!(
            residual <= 1e-13,
            "criterion 3 FAIL: tau identity residual {residual:.3e} > 1e-13 for {label}"
        );
        max_residual = max_residual.max(residual);
    }
    println!(
        "criterion 3 PASS: five tau identities hold coefficient-wise, max relative residual {max_residual:.3e} <= 1e-13"
    );
}

#[test]
fn criterion_04_conserved_charges() {
    let _guard = serial();
    let mp = ModelParams {
        delta: 0.45,
        omega: 0.0,
        g: 0.6,
        epsilon: 0.0,
        n_qubits: 3,
        rep: SpinRep::FullTensor,
        n_max: 16,
    };
    let sp =
        SpectralParams::pinned(IntegrablePoint::Omega0, TwistModel::Dicke, &mp, 0.31, -0.27, Some(1.0))
            .unwrap();
    let m = monodromy(IntegrablePoint::Omega0, TwistModel::Dicke, &mp, &sp, true).unwrap();
    let set = extract_charges(&transfer_matrix(&m)).unwrap();
    assert_eq!(
        set.len(),
        3,
        "criterion 4 FAIL: expected n_qubits = 3 nontrivial charges, found {}",
        set.len()
    );
    let projector = projector_below(mp.space().unwrap(), mp.n_max - 2).unwrap();
    let h = hamiltonian(ModelKind::Dicke, &mp).unwrap();
    let pairwise = set.max_pairwise_residual(Some(&projector)).unwrap();
    let with_h = set.max_residual_with(&h, Some(&projector)).unwrap();
    assert!(
        pairwise <= 1e-10,
        "criterion 4 FAIL: pairwise charge residual {pairwise:.3e} > 1e-10"
    );
    assert!(
        with_h <= 1e-10,
        "criterion 4 FAIL: [H, I_k] residual {with_h:.3e} > 1e-10"
    );
    println!(
        "criterion 4 PASS: omega0 Dicke n_qubits=3 yields 3 charges, max pairwise residual {pairwise:.3e} and max [H, I_k] residual {with_h:.3e}, both <= 1e-10"
    );
}

#[test]
fn criterion_05_extra_conserved_quantities() {
    let _guard = serial();
    let buffered = |mp: &ModelParams| projector_below(mp.space().unwrap(), mp.n_max - 2).unwrap();

    // Full-coupling models at the degenerate points, projected.
    let dicke_delta0 = ModelParams {
        delta: 0.0,
        omega: 0.9,
        g: 0.55,
        epsilon: 0.0,
        n_qubits: 3,
        rep: SpinRep::Collective,
        n_max: 24,
    };
    let h = hamiltonian(ModelKind::Dicke, &dicke_delta0).unwrap();
    let op = symmetry_operator(&dicke_delta0, SymmetryKind::SpinCoupling).unwrap();
    let r_spin = commutator_residual(&h, &op.matrix, Some(&buffered(&dicke_delta0))).unwrap();
    assert!(
        r_spin <= 1e-13,
        "criterion 5 FAIL: [H_D(delta=0), S+ + S-] projected residual {r_spin:.3e} > 1e-13"
    );

    let dicke_omega0 = ModelParams { delta: 0.7, omega: 0.0, ..dicke_delta0 };
    let h = hamiltonian(ModelKind::Dicke, &dicke_omega0).unwrap();
    let op = symmetry_operator(&dicke_omega0, SymmetryKind::FieldQuadrature).unwrap();
    let r_quad = commutator_residual(&h, &op.matrix, Some(&buffered(&dicke_omega0))).unwrap();
    assert!(
        r_quad <= 1e-13,
        "criterion 5 FAIL: [H_D(omega=0), a + a\u{2020}] projected residual {r_quad:.3e} > 1e-13"
    );

    // Rotating-wave models, unprojected: their conserved quantities survive
    // truncation exactly.
    let jc = ModelParams {
        delta: 0.7,
        omega: 1.1,
        g: 0.6,
        epsilon: 0.0,
        n_qubits: 1,
        rep: SpinRep::Collective,
        n_max: 24,
    };
    let h = hamiltonian(ModelKind::JaynesCummings, &jc).unwrap();
    let m_op = symmetry_operator(&jc, SymmetryKind::ExcitationNumber).unwrap();
    let r_jc = commutator_residual(&h, &m_op.matrix, None).unwrap();
    assert!(
        r_jc <= 1e-13,
        "criterion 5 FAIL: [H_JC, M] residual {r_jc:.3e} > 1e-13"
    );

    let tc = ModelParams { n_qubits: 3, ..jc };
    let h = hamiltonian(ModelKind::TavisCummings, &tc).unwrap();
    let m_op = symmetry_operator(&tc, SymmetryKind::ExcitationNumber).unwrap();
    let s2 = symmetry_operator(&tc, SymmetryKind::TotalSpinSquared).unwrap();
    let r_tc_m = commutator_residual(&h, &m_op.matrix, None).unwrap();
    let r_tc_s2 = commutator_residual(&h, &s2.matrix, None).unwrap();
    assert!(
        r_tc_m <= 1e-13,
        "criterion 5 FAIL: [H_TC, M] residual {r_tc_m:.3e} > 1e-13"
    );
    assert!(
        r_tc_s2 <= 1e-13,
        "criterion 5 FAIL: [H_TC, S^2] residual {r_tc_s2:.3e} > 1e-13"
    );

    let worst = r_spin.max(r_quad).max(r_jc).max(r_tc_m).max(r_tc_s2);
    println!(
        "criterion 5 PASS: extra conserved quantities — [H_D(delta=0), S+ + S-] {r_spin:.3e}, [H_D(omega=0), a + a\u{2020}] {r_quad:.3e} (projected); [H_JC, M] {r_jc:.3e}, [H_TC, M] {r_tc_m:.3e}, [H_TC, S^2] {r_tc_s2:.3e} (unprojected); max {worst:.3e} <= 1e-13"
    );
}

#[test]
fn criterion_06_closed_form_spectra() {
    let _guard = serial();

    // g = 0: the exact spectrum is {omega n +- delta/2}, every level.
    let decoupled = ModelParams {
        delta: 0.7,
        omega: 1.1,
        g: 0.0,
        epsilon: 0.0,
        n_qubits: 1,
        rep: SpinRep::Collective,
        n_max: 30,
    };
    let spectrum = diagonalize(ModelKind::Rabi, &decoupled).unwrap();
    let mut expected: Vec<f64> = (0..=30)
        .flat_map(|n| {
            let base = 1.1 * n as f64;
            [base - 0.35, base + 0.35]
        })
        .collect();
    expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(spectrum.eigenvalues.len(), expected.len());
    let dev_g0 = spectrum
        .eigenvalues
        .iter()
        .zip(&expected)
        .map(|(got, want)| (got - want).abs())
        .fold(0.0f64, f64::max);
    assert!(
        dev_g0 <= 1e-12,
        "criterion 6 FAIL: g=0 levels deviate from omega n +- delta/2 by {dev_g0:.3e} > 1e-12"
    );

    // delta = 0 Rabi: displaced oscillator, levels omega n - g^2/(4 omega),
    // each doubly degenerate (the two s^x branches displace oppositely but
    // share the spectrum).
    let displaced = ModelParams {
        delta: 0.0,
        omega: 1.0,
        g: 0.8,
        epsilon: 0.0,
        n_qubits: 1,
        rep: SpinRep::Collective,
        n_max: 72,
    };
    let spectrum = diagonalize(ModelKind::Rabi, &displaced).unwrap();
    let levels = spectrum.converged_levels();
    assert!(levels.len() >= 40, "criterion 6 FAIL: only {} converged levels at n_max 72", levels.len());
    let shift = 0.8f64.powi(2) / 4.0;
    let mut dev_rabi = 0.0f64;
    for pair in 0..20 {
        let want = pair as f64 - shift;
        dev_rabi = dev_rabi.max((levels[2 * pair] - want).abs());
        dev_rabi = dev_rabi.max((levels[2 * pair + 1] - want).abs());
    }
    assert!(
        dev_rabi <= 1e-8,
        "criterion 6 FAIL: delta=0 Rabi doublets deviate from omega n - g^2/(4 omega) by {dev_rabi:.3e} > 1e-8"
    );

    // delta = 0 Dicke, two qubits: ground energy -4 g^2 / omega from the
    // maximally displaced S^x branch.
    let dicke = ModelParams {
        delta: 0.0,
        omega: 1.0,
        g: 0.4,
        epsilon: 0.0,
        n_qubits: 2,
        rep: SpinRep::Collective,
        n_max: 64,
    };
    let spectrum = diagonalize(ModelKind::Dicke, &dicke).unwrap();
    let ground = spectrum.eigenvalues[0];
    let dev_dicke = (ground - (-4.0 * 0.4f64.powi(2))).abs();
    assert!(
        dev_dicke <= 1e-8,
        "criterion 6 FAIL: delta=0 Dicke ground energy off by {dev_dicke:.3e} > 1e-8"
    );

    println!(
        "criterion 6 PASS: closed-form spectra — g=0 levels within {dev_g0:.3e} (tol 1e-12); delta=0 Rabi doublets within {dev_rabi:.3e} (tol 1e-8); delta=0 Dicke ground within {dev_dicke:.3e} (tol 1e-8)"
    );
}

fn probe_baseline_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/probe_baseline.json")
}

#[test]
fn criterion_07_probe_endpoints_and_baseline() {
    let _guard = serial();
    let template = ModelParams {
        delta: 0.0,
        omega: 0.0,
        g: 0.5,
        epsilon: 0.0,
        n_qubits: 1,
        rep: SpinRep::Collective,
        n_max: 16,
    };
    let mut config = ProbeConfig::with_steps(1.0, 33).unwrap();
    config.buffer = 1;
    let samples = charge_search_probe(&template, &config).unwrap();

    let first = samples.first().unwrap();
    let last = samples.last().unwrap();
    assert!(
        first.residual <= 1e-10 && last.residual <= 1e-10,
        "criterion 7 FAIL: endpoint residuals {:.3e} / {:.3e} exceed 1e-10",
        first.residual,
        last.residual,
    );
    assert!(
        first.overlap_spin > 0.99,
        "criterion 7 FAIL: theta=0 minimizer overlap with s^x is {:.4} <= 0.99",
        first.overlap_spin,
    );
    assert!(
        last.overlap_quadrature > 0.99,
        "criterion 7 FAIL: theta=pi/2 minimizer overlap with a + a\u{2020} is {:.4} <= 0.99",
        last.overlap_quadrature,
    );

    // Continuity of the interior curve: adjacent points may not jump by more
    // than a decade once both sit above the numerical floor.
    for (i, window) in samples.windows(2).enumerate() {
        let (a, b) = (window[0].residual, window[1].residual);
        if a > 1e-8 && b > 1e-8 {
            let jump = (a / b).max(b / a);
            assert!(
                jump < 10.0,
                "criterion 7 FAIL: residual jumps {jump:.1}x between grid points {i} and {}",
                i + 1
            );
        }
    }
    // The interpolation floor the construction cannot cross: mid-arc the
    // residual is macroscopic, not a rounding artifact.
    let mid = samples[16];
    assert!(
        mid.residual > 1e-3,
        "criterion 7 FAIL: interior residual {:.3e} at theta=pi/4 is not macroscopic",
        mid.residual,
    );

    let path = probe_baseline_path();
    if std::env::var_os("RABILAB_REGEN_PROBE_BASELINE").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, serde_json::to_string_pretty(&samples).unwrap()).unwrap();
        println!("criterion 7: probe baseline regenerated at {}", path.display());
    }
    let frozen: Vec<ProbeSample> =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap_or_else(|e| {
            panic!(
                "criterion 7 FAIL: no probe baseline at {} ({e}); run once with RABILAB_REGEN_PROBE_BASELINE=1",
                path.display()
            )
        }))
        .unwrap();
    assert_eq!(frozen.len(), samples.len(), "criterion 7 FAIL: baseline grid size changed");
    let mut worst_drift = 0.0f64;
    for (got, want) in samples.iter().zip(&frozen) {
        for (g, w) in [
            (got.theta, want.theta),
            (got.delta, want.delta),
            (got.omega, want.omega),
            (got.residual, want.residual),
            (got.residual_relative, want.residual_relative),
            (got.overlap_spin, want.overlap_spin),
            (got.overlap_quadrature, want.overlap_quadrature),
        ] {
            let drift = (g - w).abs();
            assert!(
                drift <= 1e-12 + 1e-6 * w.abs(),
                "criterion 7 FAIL: probe value drifted from baseline at theta={}: got {g}, baseline {w}",
                want.theta,
            );
            worst_drift = worst_drift.max(drift);
        }
    }

    println!(
        "criterion 7 PASS: probe endpoints {:.3e} / {:.3e} <= 1e-10 with overlaps {:.6} / {:.6} > 0.99; interior floor {:.3} at theta=pi/4; curve continuous and within {worst_drift:.3e} of the frozen baseline",
        first.residual, last.residual, first.overlap_spin, last.overlap_quadrature, mid.residual,
    );
}

#[test]
fn criterion_08_reference_statistics() {
    let _guard = serial();
    let start = Instant::now();
    let opts = StatsOptions::default();
    let poisson = reference_ensembles(EnsembleKind::Poisson, 2000, 72, 2024, &opts, None).unwrap();
    assert!(
        poisson.gap_ratios.len() >= 100_000,
        "criterion 8 FAIL: only {} pooled Poisson gap ratios (need 1e5)",
        poisson.gap_ratios.len()
    );
    assert!(
        (0.381..=0.391).contains(&poisson.mean_ratio),
        "criterion 8 FAIL: Poisson mean gap ratio {:.4} outside [0.381, 0.391]",
        poisson.mean_ratio
    );
    let goe = reference_ensembles(EnsembleKind::Goe, 500, 50, 2024, &opts, None).unwrap();
    assert!(
        (0.521..=0.541).contains(&goe.mean_ratio),
        "criterion 8 FAIL: GOE mean gap ratio {:.4} outside [0.521, 0.541]",
        goe.mean_ratio
    );
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 60.0, "criterion 8 FAIL: runtime {secs:.1} s >= 60 s");
    println!(
        "criterion 8 PASS: Poisson mean gap ratio {:.4} in [0.381, 0.391] over {} ratios; GOE mean {:.4} in [0.521, 0.541] over 50 draws of dimension 500; runtime {secs:.1} s < 60 s",
        poisson.mean_ratio,
        poisson.gap_ratios.len(),
        goe.mean_ratio,
    );
}

/// A trend endpoint parsed from its shipped config; the file is the frozen
/// source of truth, so the test reads it rather than repeating the numbers.
struct TrendPoint {
    params: ModelParams,
    min_levels: usize,
}

fn load_trend_config(name: &str) -> TrendPoint {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    let text = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("criterion 9 FAIL: cannot read {} ({e})", path.display()));
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["model"], "dicke", "criterion 9 FAIL: {name} must pin the Dicke model");
    assert_eq!(v["rep"], "collective", "criterion 9 FAIL: {name} must use the collective representation");
    assert_eq!(v["sector"], "plus", "criterion 9 FAIL: {name} must select a single parity sector");
    let n_qubits = v["n_qubits"].as_u64().unwrap() as usize;
    assert_eq!(n_qubits, 20, "criterion 9 FAIL: {name} must fix n_qubits = 20");
    let n_max = v["n_max"].as_u64().unwrap() as usize;
    assert!(n_max >= 120, "criterion 9 FAIL: {name} must fix n_max >= 120, found {n_max}");
    let min_levels = v["stats"]["min_levels"].as_u64().unwrap() as usize;
    assert!(min_levels >= 300, "criterion 9 FAIL: {name} must demand >= 300 levels, found {min_levels}");
    TrendPoint {
        params: ModelParams {
            delta: v["delta"].as_f64().unwrap(),
            omega: v["omega"].as_f64().unwrap(),
            g: v["g"].as_f64().unwrap(),
            epsilon: 0.0,
            n_qubits,
            rep: SpinRep::Collective,
            n_max,
        },
        min_levels,
    }
}

#[test]
fn criterion_09_dicke_statistics_trend() {
    let _guard = serial();
    let start = Instant::now();
    let chaotic = load_trend_config("dicke_trend_chaotic.json");
    let regular = load_trend_config("dicke_trend_regular.json");
    let run = |point: &TrendPoint| {
        let (plus, _minus) = split_parity_sectors(ModelKind::Dicke, &point.params).unwrap();
        let opts = StatsOptions { min_levels: point.min_levels, ..StatsOptions::default() };
        gap_ratios(&plus, &opts).unwrap()
    };
    let strong = run(&chaotic);
    let adiabatic = run(&regular);
    assert!(
        strong.n_levels_used >= 300,
        "criterion 9 FAIL: chaotic point used only {} levels",
        strong.n_levels_used
    );
    assert!(
        adiabatic.n_levels_used >= 300,
        "criterion 9 FAIL: regular point used only {} levels",
        adiabatic.n_levels_used
    );
    let gap = strong.mean_ratio - adiabatic.mean_ratio;
    assert!(
        gap >= 0.05,
        "criterion 9 FAIL: chaotic mean {:.4} exceeds regular mean {:.4} by only {gap:.4} < 0.05",
        strong.mean_ratio,
        adiabatic.mean_ratio,
    );
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 600.0, "criterion 9 FAIL: runtime {secs:.1} s >= 600 s");
    println!(
        "criterion 9 PASS: Dicke n_qubits=20 plus-sector trend — strong-coupling mean gap ratio {:.4} ({} levels) minus near-adiabatic mean {:.4} ({} levels) = {gap:.4} >= 0.05; runtime {secs:.1} s < 600 s",
        strong.mean_ratio, strong.n_levels_used, adiabatic.mean_ratio, adiabatic.n_levels_used,
    );
}

/// Serialize one full seeded pipeline — YBE draws, an RTT check, a GOE
/// baseline — so equality below means byte-identical reports, not just equal
/// floats.
fn seeded_report() -> String {
    let mut rows = Vec::new();
    for draw in 0..20 {
        let mut r = rng(7, draw);
        let u = uniform(&mut r, -2.0, 2.0);
        let v = uniform(&mut r, -2.0, 2.0);
        let eta = uniform(&mut r, 0.2, 2.2);
        rows.push(serde_json::json!({
            "u": u,
            "v": v,
            "eta": eta,
            "residual": check_ybe(&SpectralParams::new(u, v, eta)),
        }));
    }
    let mp = ModelParams {
        delta: 0.0,
        omega: 0.9,
        g: 0.4,
        epsilon: 0.0,
        n_qubits: 2,
        rep: SpinRep::Collective,
        n_max: 12,
    };
    let sp = SpectralParams::pinned(IntegrablePoint::Delta0, TwistModel::Dicke, &mp, 0.31, -0.27, None)
        .unwrap();
    let m = monodromy(IntegrablePoint::Delta0, TwistModel::Dicke, &mp, &sp, false).unwrap();
    let rtt = check_rtt(&m, 0.31, -0.27, 2).unwrap();
    let goe =
        reference_ensembles(EnsembleKind::Goe, 200, 10, 11, &StatsOptions::default(), None).unwrap();
    serde_json::to_string(&serde_json::json!({
        "ybe": rows,
        "rtt": rtt,
        "goe_mean": goe.mean_ratio,
        "goe_ratios": goe.gap_ratios,
    }))
    .unwrap()
}

#[test]
fn criterion_10_determinism() {
    let _guard = serial();
    let first = seeded_report();
    let second = seeded_report();
    assert_eq!(first, second, "criterion 10 FAIL: repeated seeded runs serialized differently");
    println!(
        "criterion 10 PASS: repeated seeded run serialized to byte-identical reports ({} bytes)",
        first.len()
    );
}
