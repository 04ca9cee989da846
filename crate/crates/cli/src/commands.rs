//! The seven subcommands. Each resolves its configuration (flags over file
//! over defaults), runs the corresponding library operation, and returns a
//! JSON report plus, for the tabular commands, a CSV rendering.

use anyhow::{anyhow, bail, Context, Result};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use rabilab::{
    charge_search_probe, check_rtt, check_ybe, diagonalize_with, extract_charges, gap_ratios,
    hamiltonian, monodromy, nnsd_histogram, projector_below, reference_ensembles,
    split_parity_sectors_with, sweep_stats, transfer_matrix, ConvergenceOptions, EnsembleKind,
    HistogramOptions, IntegrablePoint, LevelStats, ModelKind, ModelParams, ProbeConfig,
    SectorPolicy, SpectralParams, Spectrum, SpinRep, StatsOptions, SweepPoint, SweepRow,
    TwistModel,
};

use crate::config::{pick, pick_opt, FileConfig, ResolvedModel};
use crate::Flags;

/// What a command hands back to the output layer.
pub struct Outcome {
    /// Full JSON report: command, version, resolved config, results, pass.
    pub report: Value,
    /// Tabular rendering for `--format csv`, when the command has one.
    pub csv: Option<String>,
    pub pass: bool,
}

const VERSION: &str = env!("CARGO_PKG_VERSION");

fn envelope(command: &str, config: Value, results: Value, pass: bool) -> Value {
    json!({
        "command": command,
        "version": VERSION,
        "config": config,
        "results": results,
        "pass": pass,
    })
}

/// Independent generator per draw index: reseeding by stream keeps each
/// draw's values stable no matter how many draws run.
fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}

fn parse_rep(s: &str) -> Result<SpinRep> {
    match s {
        "collective" => Ok(SpinRep::Collective),
        "full_tensor" => Ok(SpinRep::FullTensor),
        other => bail!("unknown rep `{other}` (expected collective|full_tensor)"),
    }
}

/// CSV field quoting for free-text columns (errors may contain commas).
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Assemble a CSV table with provenance comment lines (version + resolved
/// config), so no output lacks its origin.
fn csv_table(command: &str, config: &Value, header: &str, rows: &[String]) -> String {
    let mut out = String::new();
    out.push_str(&format!("# rabilab {VERSION} {command}\n"));
    out.push_str(&format!("# config {config}\n"));
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(row);
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// verify-ybe

pub fn cmd_verify_ybe(fl: &Flags, fc: &FileConfig) -> Result<Outcome> {
    let seed = pick(fl.seed, fc.seed, 7);
    let samples = pick(fl.samples, fc.samples, 100);
    let threshold = pick(fl.threshold, fc.threshold, 1e-12);
    let fixed_u = pick_opt(fl.u, fc.u);
    let fixed_v = pick_opt(fl.v, fc.v);
    let fixed_eta = pick_opt(fl.eta, fc.eta);
    if samples == 0 {
        bail!("samples must be >= 1");
    }

    let mut rows = Vec::with_capacity(samples);
    let mut max_residual: f64 = 0.0;
    for i in 0..samples {
        let mut rng = rng_for(seed, i as u64);
        // Draw all three before applying fixes so each parameter's sequence
        // is independent of which others are pinned by flags.
        let du = uniform(&mut rng, -2.0, 2.0);
        let dv = uniform(&mut rng, -2.0, 2.0);
        let de = uniform(&mut rng, 0.2, 2.2);
        let u = fixed_u.unwrap_or(du);
        let v = fixed_v.unwrap_or(dv);
        let eta = fixed_eta.unwrap_or(de);
        let residual = check_ybe(&SpectralParams::new(u, v, eta));
        max_residual = max_residual.max(residual);
        rows.push(json!({ "u": u, "v": v, "eta": eta, "residual": residual }));
    }
    let pass = max_residual.is_finite() && max_residual <= threshold;

    let config = json!({
        "seed": seed,
        "samples": samples,
        "threshold": threshold,
        "u": fixed_u,
        "v": fixed_v,
        "eta": fixed_eta,
    });
    let results = json!({ "max_residual": max_residual, "draws": rows });
    Ok(Outcome { report: envelope("verify-ybe", config, results, pass), csv: None, pass })
}

// ---------------------------------------------------------------------------
// verify-rtt

pub fn cmd_verify_rtt(fl: &Flags, fc: &FileConfig) -> Result<Outcome> {
    let point: IntegrablePoint =
        pick(fl.point.clone(), fc.point.clone(), "delta0".into()).parse()?;
    let model: TwistModel = pick(fl.model.clone(), fc.model.clone(), "rabi".into()).parse()?;
    let factorised = pick(fl.factorised, fc.factorised, false);
    let default_rep = if factorised { "full_tensor" } else { "collective" };
    let rep = parse_rep(&pick(fl.rep.clone(), fc.rep.clone(), default_rep.into()))?;
    let rm = ResolvedModel {
        delta: pick(
            fl.delta,
            fc.delta,
            if point == IntegrablePoint::Delta0 { 0.0 } else { 0.4 },
        ),
        omega: pick(
            fl.omega,
            fc.omega,
            if point == IntegrablePoint::Omega0 { 0.0 } else { 1.0 },
        ),
        g: pick(fl.g, fc.g, 0.6),
        epsilon: pick(fl.epsilon, fc.epsilon, 0.0),
        n_qubits: pick(
            fl.n_qubits,
            fc.n_qubits,
            if model == TwistModel::Dicke { 3 } else { 1 },
        ),
        rep,
        n_max: pick(fl.n_max, fc.n_max, 24),
    };
    let buffer = pick(fl.buffer, fc.buffer, 2);
    let threshold = pick(fl.threshold, fc.threshold, 1e-10);
    let samples = pick(fl.samples, fc.samples, 1);
    let seed = pick(fl.seed, fc.seed, 7);
    let flag_u = pick_opt(fl.u, fc.u);
    let flag_v = pick_opt(fl.v, fc.v);
    let flag_eta = pick_opt(fl.eta, fc.eta);
    if samples == 0 {
        bail!("samples must be >= 1");
    }

    let mp = rm.to_params();
    let mut rows = Vec::with_capacity(samples);
    let mut max_projected: f64 = 0.0;
    let mut max_unprojected: f64 = 0.0;
    let mut last_sp = None;
    for i in 0..samples {
        let mut rng = rng_for(seed, i as u64);
        let du = uniform(&mut rng, -1.5, 1.5);
        let dv = uniform(&mut rng, -1.5, 1.5);
        let de = uniform(&mut rng, 0.3, 1.5);
        // Single runs use a fixed canonical evaluation point; multi-sample
        // runs draw whatever the flags leave free.
        let (u, v) = if samples == 1 {
            (flag_u.unwrap_or(0.31), flag_v.unwrap_or(-0.27))
        } else {
            (flag_u.unwrap_or(du), flag_v.unwrap_or(dv))
        };
        let eta = match point {
            // delta0 pins eta = omega/g; pass the flag through so a
            // contradictory value is rejected with the pin message.
            IntegrablePoint::Delta0 => flag_eta,
            IntegrablePoint::Omega0 => {
                Some(flag_eta.unwrap_or(if samples == 1 { 1.0 } else { de }))
            }
        };
        let mut sp = SpectralParams::pinned(point, model, &mp, u, v, eta)?;
        if let Some(x) = pick_opt(fl.lambda, fc.lambda) {
            sp.lambda = x;
        }
        if let Some(x) = pick_opt(fl.b, fc.b) {
            sp.b = x;
        }
        if let Some(x) = pick_opt(fl.c, fc.c) {
            sp.c = x;
        }
        let m = monodromy(point, model, &mp, &sp, factorised)?;
        let check = check_rtt(&m, u, v, buffer)?;
        max_projected = max_projected.max(check.projected);
        max_unprojected = max_unprojected.max(check.unprojected);
        rows.push(json!({
            "u": u,
            "v": v,
            "eta": sp.eta,
            "projected": check.projected,
            "unprojected": check.unprojected,
        }));
        last_sp = Some(sp);
    }
    let pass = max_projected.is_finite() && max_projected <= threshold;

    let sp = last_sp.expect("samples >= 1");
    let config = json!({
        "point": point,
        "model": model,
        "factorised": factorised,
        "delta": rm.delta,
        "omega": rm.omega,
        "g": rm.g,
        "epsilon": rm.epsilon,
        "n_qubits": rm.n_qubits,
        "rep": rm.rep,
        "n_max": rm.n_max,
        "buffer": buffer,
        "threshold": threshold,
        "samples": samples,
        "seed": seed,
        "eta": sp.eta,
        "lambda": sp.lambda,
        "b": sp.b,
        "c": sp.c,
    });
    let results = json!({
        "max_projected": max_projected,
        "max_unprojected": max_unprojected,
        "draws": rows,
    });
    Ok(Outcome { report: envelope("verify-rtt", config, results, pass), csv: None, pass })
}

// ---------------------------------------------------------------------------
// charges

pub fn cmd_charges(fl: &Flags, fc: &FileConfig) -> Result<Outcome> {
    let point: IntegrablePoint =
        pick(fl.point.clone(), fc.point.clone(), "omega0".into()).parse()?;
    let model: TwistModel = pick(fl.model.clone(), fc.model.clone(), "dicke".into()).parse()?;
    let n_qubits = pick(
        fl.n_qubits,
        fc.n_qubits,
        if model == TwistModel::Dicke { 3 } else { 1 },
    );
    // The factorised chain is what yields one charge per qubit at omega0;
    // everything else defaults to the collective construction.
    let factorised = pick(
        fl.factorised,
        fc.factorised,
        point == IntegrablePoint::Omega0 && n_qubits > 1,
    );
    let default_rep = if factorised { "full_tensor" } else { "collective" };
    let rep = parse_rep(&pick(fl.rep.clone(), fc.rep.clone(), default_rep.into()))?;
    let rm = ResolvedModel {
        delta: pick(
            fl.delta,
            fc.delta,
            if point == IntegrablePoint::Delta0 { 0.0 } else { 0.4 },
        ),
        omega: pick(
            fl.omega,
            fc.omega,
            if point == IntegrablePoint::Omega0 { 0.0 } else { 1.0 },
        ),
        g: pick(fl.g, fc.g, 0.6),
        epsilon: pick(fl.epsilon, fc.epsilon, 0.0),
        n_qubits,
        rep,
        n_max: pick(fl.n_max, fc.n_max, 16),
    };
    let buffer = pick(fl.buffer, fc.buffer, 2);
    let threshold = pick(fl.threshold, fc.threshold, 1e-10);
    let u = pick(fl.u, fc.u, 0.31);
    let v = pick(fl.v, fc.v, -0.27);
    let flag_eta = pick_opt(fl.eta, fc.eta);

    let mp = rm.to_params();
    let mut sp = SpectralParams::pinned(point, model, &mp, u, v, flag_eta)?;
    if let Some(x) = pick_opt(fl.lambda, fc.lambda) {
        sp.lambda = x;
    }
    if let Some(x) = pick_opt(fl.b, fc.b) {
        sp.b = x;
    }
    if let Some(x) = pick_opt(fl.c, fc.c) {
        sp.c = x;
    }
    let m = monodromy(point, model, &mp, &sp, factorised)?;
    let tau = transfer_matrix(&m);
    let set = extract_charges(&tau)?;
    let space = mp.space()?;
    if buffer > rm.n_max {
        bail!("buffer {buffer} exceeds n_max {}", rm.n_max);
    }
    let projector = projector_below(space, rm.n_max - buffer)?;
    let h = hamiltonian(model.model_kind(), &mp)?;
    let pairwise = set.max_pairwise_residual(Some(&projector))?;
    let with_h = set.max_residual_with(&h, Some(&projector))?;
    let pass = pairwise <= threshold && with_h <= threshold;

    let charges: Vec<Value> = set
        .charges()
        .iter()
        .map(|c| {
            json!({
                "power": c.power,
                "hermiticity_defect": c.hermiticity_defect,
                "hermitized": c.hermitized,
            })
        })
        .collect();
    let config = json!({
        "point": point,
        "model": model,
        "factorised": factorised,
        "delta": rm.delta,
        "omega": rm.omega,
        "g": rm.g,
        "epsilon": rm.epsilon,
        "n_qubits": rm.n_qubits,
        "rep": rm.rep,
        "n_max": rm.n_max,
        "buffer": buffer,
        "threshold": threshold,
        "u": u,
        "v": v,
        "eta": sp.eta,
        "lambda": sp.lambda,
        "b": sp.b,
        "c": sp.c,
    });
    let mut results = json!({
        "tau_degree": set.degree(),
        "count": set.len(),
        "charges": charges,
        "max_pairwise_residual": pairwise,
        "max_hamiltonian_residual": with_h,
    });
    if set.degree() == 1 {
        results["note"] =
            json!("tau is linear in u: its single nontrivial coefficient is the Hamiltonian line");
    }
    Ok(Outcome { report: envelope("charges", config, results, pass), csv: None, pass })
}

// ---------------------------------------------------------------------------
// spectrum

/// Resolve the plain-model parameters shared by the spectra commands.
fn resolve_spectra_model(fl: &Flags, fc: &FileConfig) -> Result<(ModelKind, ResolvedModel)> {
    let kind: ModelKind = pick(fl.model.clone(), fc.model.clone(), "rabi".into()).parse()?;
    let collective_pair = matches!(kind, ModelKind::Dicke | ModelKind::TavisCummings);
    let rm = ResolvedModel {
        delta: pick(fl.delta, fc.delta, 0.5),
        omega: pick(fl.omega, fc.omega, 1.0),
        g: pick(fl.g, fc.g, 0.6),
        epsilon: pick(fl.epsilon, fc.epsilon, 0.0),
        n_qubits: pick(fl.n_qubits, fc.n_qubits, if collective_pair { 2 } else { 1 }),
        rep: parse_rep(&pick(fl.rep.clone(), fc.rep.clone(), "collective".into()))?,
        n_max: pick(fl.n_max, fc.n_max, 40),
    };
    Ok((kind, rm))
}

/// Diagonalize under the requested sector policy; one spectrum per sector.
fn sectored_spectra(
    kind: ModelKind,
    mp: &ModelParams,
    policy: SectorPolicy,
) -> Result<Vec<Spectrum>> {
    let conv = ConvergenceOptions::default();
    Ok(match policy {
        SectorPolicy::Unsectored => vec![diagonalize_with(kind, mp, &conv)?],
        SectorPolicy::Plus => vec![split_parity_sectors_with(kind, mp, &conv)?.0],
        SectorPolicy::Minus => vec![split_parity_sectors_with(kind, mp, &conv)?.1],
        SectorPolicy::Both => {
            let (plus, minus) = split_parity_sectors_with(kind, mp, &conv)?;
            vec![plus, minus]
        }
    })
}

pub fn cmd_spectrum(fl: &Flags, fc: &FileConfig) -> Result<Outcome> {
    let (kind, rm) = resolve_spectra_model(fl, fc)?;
    let policy: SectorPolicy =
        pick(fl.sector.clone(), fc.sector.clone(), "unsectored".into()).parse()?;
    let spectra = sectored_spectra(kind, &rm.to_params(), policy)?;

    let config = json!({
        "model": kind,
        "delta": rm.delta,
        "omega": rm.omega,
        "g": rm.g,
        "epsilon": rm.epsilon,
        "n_qubits": rm.n_qubits,
        "rep": rm.rep,
        "n_max": rm.n_max,
        "sector": policy,
    });
    let rows: Vec<Value> = spectra
        .iter()
        .map(|s| {
            json!({
                "sector": s.sector,
                "n_levels": s.len(),
                "converged_fraction": s.converged_fraction(),
                "eigenvalues": s.eigenvalues,
                "converged": s.converged,
            })
        })
        .collect();

    let mut csv_rows = Vec::new();
    for s in &spectra {
        let sector = s.sector.map(|x| x.to_string()).unwrap_or_default();
        for (i, (e, c)) in s.eigenvalues.iter().zip(&s.converged).enumerate() {
            csv_rows.push(format!("{i},{e},{c},{sector}"));
        }
    }
    let csv = csv_table("spectrum", &config, "index,eigenvalue,converged,sector", &csv_rows);
    let results = json!({ "spectra": rows });
    Ok(Outcome { report: envelope("spectrum", config, results, true), csv: Some(csv), pass: true })
}

// ---------------------------------------------------------------------------
// level-stats

struct ResolvedStats {
    opts: StatsOptions,
    hopts: HistogramOptions,
    histogram: bool,
}

fn resolve_stats(fl: &Flags, fc: &FileConfig) -> ResolvedStats {
    let sect = fc.stats.clone().unwrap_or_default();
    let d_opts = StatsOptions::default();
    let d_hopts = HistogramOptions::default();
    ResolvedStats {
        opts: StatsOptions {
            trim_fraction: pick(fl.trim_fraction, sect.trim_fraction, d_opts.trim_fraction),
            degeneracy_rel_tol: pick(
                fl.degeneracy_rel_tol,
                sect.degeneracy_rel_tol,
                d_opts.degeneracy_rel_tol,
            ),
            min_levels: pick(fl.min_levels, sect.min_levels, d_opts.min_levels),
        },
        hopts: HistogramOptions {
            unfolding_degree: pick(
                fl.unfolding_degree,
                sect.unfolding_degree,
                d_hopts.unfolding_degree,
            ),
            bins: pick(fl.bins, sect.bins, d_hopts.bins),
            s_max: pick(fl.s_max, sect.s_max, d_hopts.s_max),
        },
        histogram: pick(fl.histogram, fc.histogram, false),
    }
}

fn stats_row(sector: Option<i8>, converged_fraction: Option<f64>, s: &LevelStats) -> Value {
    json!({
        "sector": sector,
        "converged_fraction": converged_fraction,
        "mean_ratio": s.mean_ratio,
        "n_ratios": s.gap_ratios.len(),
        "n_levels_used": s.n_levels_used,
        "n_degenerate_removed": s.n_degenerate_removed,
        "histogram": s.histogram,
    })
}

pub fn cmd_level_stats(fl: &Flags, fc: &FileConfig) -> Result<Outcome> {
    let rs = resolve_stats(fl, fc);
    let stats_sect = fc.stats.clone().unwrap_or_default();
    let ensemble_name = pick_opt(fl.ensemble.clone(), stats_sect.ensemble.clone());
    let seed = pick(fl.seed, fc.seed, 7);

    let stats_config = json!({
        "trim_fraction": rs.opts.trim_fraction,
        "degeneracy_rel_tol": rs.opts.degeneracy_rel_tol,
        "min_levels": rs.opts.min_levels,
        "unfolding_degree": rs.hopts.unfolding_degree,
        "bins": rs.hopts.bins,
        "s_max": rs.hopts.s_max,
    });

    let (config, rows) = if let Some(name) = ensemble_name {
        let kind: EnsembleKind = name.parse()?;
        let dimension = pick(fl.dimension, stats_sect.dimension, 500);
        let draws = pick(fl.draws, stats_sect.draws, 50);
        let stats = reference_ensembles(
            kind,
            dimension,
            draws,
            seed,
            &rs.opts,
            rs.histogram.then_some(&rs.hopts),
        )?;
        let config = json!({
            "ensemble": kind,
            "dimension": dimension,
            "draws": draws,
            "seed": seed,
            "histogram": rs.histogram,
            "stats": stats_config,
        });
        (config, vec![stats_row(None, None, &stats)])
    } else {
        let (kind, rm) = resolve_spectra_model(fl, fc)?;
        let policy: SectorPolicy =
            pick(fl.sector.clone(), fc.sector.clone(), "plus".into()).parse()?;
        let spectra = sectored_spectra(kind, &rm.to_params(), policy)?;
        let mut rows = Vec::new();
        for s in &spectra {
            let stats = if rs.histogram {
                nnsd_histogram(s, &rs.opts, &rs.hopts)?
            } else {
                gap_ratios(s, &rs.opts)?
            };
            rows.push(stats_row(s.sector, Some(s.converged_fraction()), &stats));
        }
        let config = json!({
            "model": kind,
            "delta": rm.delta,
            "omega": rm.omega,
            "g": rm.g,
            "epsilon": rm.epsilon,
            "n_qubits": rm.n_qubits,
            "rep": rm.rep,
            "n_max": rm.n_max,
            "sector": policy,
            "seed": seed,
            "histogram": rs.histogram,
            "stats": stats_config,
        });
        (config, rows)
    };

    // The CSV rendering of this command is the spacing histogram, so it
    // needs exactly one analyzed sequence and histogram=true.
    let csv = if rows.len() == 1 {
        rows[0]["histogram"].as_object().map(|h| {
            let edges: Vec<f64> =
                h["edges"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
            let densities: Vec<f64> =
                h["densities"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
            let csv_rows: Vec<String> = densities
                .iter()
                .enumerate()
                .map(|(i, d)| format!("{},{},{d}", edges[i], edges[i + 1]))
                .collect();
            csv_table("level-stats", &config, "bin_left,bin_right,density", &csv_rows)
        })
    } else {
        None
    };

    let results = json!({ "rows": rows });
    Ok(Outcome { report: envelope("level-stats", config, results, true), csv, pass: true })
}

// ---------------------------------------------------------------------------
// sweep

fn apply_sweep_value(base: &ModelParams, param: &str, value: f64) -> Result<ModelParams> {
    let mut p = *base;
    let as_count = |v: f64, name: &str| -> Result<usize> {
        if v.fract() != 0.0 || v < 0.0 {
            bail!("sweep over {name} needs non-negative integer values, got {v}");
        }
        Ok(v as usize)
    };
    match param {
        "delta" => p.delta = value,
        "omega" => p.omega = value,
        "g" => p.g = value,
        "epsilon" => p.epsilon = value,
        "n_qubits" => p.n_qubits = as_count(value, "n_qubits")?,
        "n_max" => p.n_max = as_count(value, "n_max")?,
        other => bail!(
            "unknown sweep parameter `{other}` (expected delta|omega|g|epsilon|n_qubits|n_max)"
        ),
    }
    Ok(p)
}

fn rep_str(rep: SpinRep) -> &'static str {
    match rep {
        SpinRep::Collective => "collective",
        SpinRep::FullTensor => "full_tensor",
    }
}

fn sweep_csv_row(r: &SweepRow) -> String {
    let sector = r.sector.map(|x| x.to_string()).unwrap_or_default();
    let mean = r.mean_ratio.map(|x| x.to_string()).unwrap_or_default();
    let error = r.error.as_deref().map(csv_field).unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{},{},{sector},{mean},{},{},{},{error}",
        r.kind,
        r.params.delta,
        r.params.omega,
        r.params.g,
        r.params.epsilon,
        r.params.n_qubits,
        rep_str(r.params.rep),
        r.params.n_max,
        r.n_levels_used,
        r.n_degenerate_removed,
        r.converged_fraction,
    )
}

pub fn cmd_sweep(fl: &Flags, fc: &FileConfig) -> Result<Outcome> {
    let grid = match (&fl.sweep_param, &fl.sweep_values) {
        (Some(param), Some(values)) => {
            let values = values
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|e| anyhow!("bad sweep value: {e}")))
                .collect::<Result<Vec<f64>>>()?;
            (param.clone(), values)
        }
        (None, None) => match &fc.sweep {
            Some(s) => (s.param.clone(), s.values.clone()),
            None => bail!(
                "sweep needs a grid: set sweep.param and sweep.values in the config \
                 or pass --sweep-param and --sweep-values"
            ),
        },
        _ => bail!("--sweep-param and --sweep-values must be given together"),
    };
    if grid.1.is_empty() {
        bail!("sweep grid is empty");
    }
    let (kind, rm) = {
        // Sweeps default to the Dicke family, the model whose statistics
        // interpolate between regular and chaotic.
        let kind: ModelKind = pick(fl.model.clone(), fc.model.clone(), "dicke".into()).parse()?;
        let collective_pair = matches!(kind, ModelKind::Dicke | ModelKind::TavisCummings);
        let rm = ResolvedModel {
            delta: pick(fl.delta, fc.delta, 0.5),
            omega: pick(fl.omega, fc.omega, 1.0),
            g: pick(fl.g, fc.g, 0.6),
            epsilon: pick(fl.epsilon, fc.epsilon, 0.0),
            n_qubits: pick(fl.n_qubits, fc.n_qubits, if collective_pair { 2 } else { 1 }),
            rep: parse_rep(&pick(fl.rep.clone(), fc.rep.clone(), "collective".into()))?,
            n_max: pick(fl.n_max, fc.n_max, 40),
        };
        (kind, rm)
    };
    let policy: SectorPolicy = pick(fl.sector.clone(), fc.sector.clone(), "both".into()).parse()?;
    let rs = resolve_stats(fl, fc);
    let base = rm.to_params();
    let points = grid
        .1
        .iter()
        .map(|&v| Ok(SweepPoint { kind, params: apply_sweep_value(&base, &grid.0, v)? }))
        .collect::<Result<Vec<_>>>()?;
    let rows = sweep_stats(&points, policy, &rs.opts, &ConvergenceOptions::default());
    let pass = rows.iter().all(|r| r.error.is_none());

    let config = json!({
        "model": kind,
        "delta": rm.delta,
        "omega": rm.omega,
        "g": rm.g,
        "epsilon": rm.epsilon,
        "n_qubits": rm.n_qubits,
        "rep": rm.rep,
        "n_max": rm.n_max,
        "sector": policy,
        "sweep": { "param": grid.0, "values": grid.1 },
        "stats": {
            "trim_fraction": rs.opts.trim_fraction,
            "degeneracy_rel_tol": rs.opts.degeneracy_rel_tol,
            "min_levels": rs.opts.min_levels,
        },
    });
    let header = "kind,delta,omega,g,epsilon,n_qubits,rep,n_max,sector,mean_ratio,\
                  n_levels_used,n_degenerate_removed,converged_fraction,error";
    let csv_rows: Vec<String> = rows.iter().map(sweep_csv_row).collect();
    let csv = csv_table("sweep", &config, header, &csv_rows);
    let results = serde_json::to_value(&rows)?;
    Ok(Outcome {
        report: envelope("sweep", config, json!({ "rows": results }), pass),
        csv: Some(csv),
        pass,
    })
}

// ---------------------------------------------------------------------------
// probe

pub fn cmd_probe(fl: &Flags, fc: &FileConfig) -> Result<Outcome> {
    let probe_sect = fc.probe.clone().unwrap_or_default();
    let g = pick(fl.g, fc.g, 0.5);
    let n_max = pick(fl.n_max, fc.n_max, 16);
    let r = pick(fl.r, probe_sect.r, 1.0);
    let steps = pick(fl.steps, probe_sect.steps, 33);
    let buffer = pick(fl.buffer, pick_opt(probe_sect.buffer, fc.buffer), 1);
    let threshold = pick(fl.threshold, fc.threshold, 1e-10);

    let template = ModelParams {
        delta: 0.0,
        omega: 0.0,
        g,
        epsilon: 0.0,
        n_qubits: 1,
        rep: SpinRep::Collective,
        n_max,
    };
    let mut probe = ProbeConfig::with_steps(r, steps)?;
    probe.buffer = buffer;
    let samples = charge_search_probe(&template, &probe)?;
    let first = samples.first().context("probe produced no samples")?;
    let last = samples.last().context("probe produced no samples")?;
    let pass = first.residual <= threshold
        && last.residual <= threshold
        && first.overlap_spin > 0.99
        && last.overlap_quadrature > 0.99;

    let config = json!({
        "g": g,
        "n_max": n_max,
        "r": r,
        "steps": steps,
        "buffer": buffer,
        "threshold": threshold,
    });
    let results = json!({
        "endpoint_theta0": {
            "residual": first.residual,
            "overlap_spin": first.overlap_spin,
        },
        "endpoint_theta_half_pi": {
            "residual": last.residual,
            "overlap_quadrature": last.overlap_quadrature,
        },
        "samples": samples,
    });
    let csv_rows: Vec<String> = samples
        .iter()
        .map(|s| {
            format!(
                "{},{},{},{},{},{},{}",
                s.theta,
                s.delta,
                s.omega,
                s.residual,
                s.residual_relative,
                s.overlap_spin,
                s.overlap_quadrature
            )
        })
        .collect();
    let header = "theta,delta,omega,residual,residual_relative,overlap_spin,overlap_quadrature";
    let csv = csv_table("probe", &config, header, &csv_rows);
    Ok(Outcome { report: envelope("probe", config, results, pass), csv: Some(csv), pass })
}
