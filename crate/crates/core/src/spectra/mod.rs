//! Spectra of the model Hamiltonians: truncation-aware diagonalization,
//! parity-sector resolution, and the level statistics built on top
//! ([`stats`]).
//!
//! Truncated eigenvalues are only trustworthy where they have converged, so
//! every spectrum carries a per-level flag obtained by re-diagonalizing at a
//! larger cutoff and comparing level by level. The statistics functions
//! ignore unconverged levels entirely.

mod stats;

pub use stats::{
    gap_ratios, nnsd_histogram, reference_ensembles, sweep_stats, unfold_levels, EnsembleKind, Histogram,
    HistogramOptions, LevelStats, SectorPolicy, StatsOptions, SweepPoint, SweepRow,
    GOE_SURMISE_RATIO, POISSON_MEAN_RATIO,
};

use ndarray::Axis;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{diagonal_real, hermitian_eigenvalues};
use crate::models::{hamiltonian, symmetry_operator, ModelKind, ModelParams, SymmetryKind};

/// How convergence of each level is decided: re-diagonalize with `step`
/// extra Fock states and accept levels that moved less than `tol`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ConvergenceOptions {
    pub step: usize,
    pub tol: f64,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        Self { step: 8, tol: 1e-8 }
    }
}

/// Eigenvalues of one model instance (optionally restricted to a parity
/// sector), each flagged as converged or not under the truncation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Spectrum {
    pub kind: ModelKind,
    pub params: ModelParams,
    /// +1 / −1 when this spectrum is one parity sector, `None` for the full
    /// spectrum.
    pub sector: Option<i8>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub converged: Vec<bool>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn converged_levels(&self) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .zip(&self.converged)
            .filter(|(_, &c)| c)
            .map(|(e, _)| *e)
            .collect()
    }

    pub fn converged_count(&self) -> usize {
        self.converged.iter().filter(|&&c| c).count()
    }

    pub fn converged_fraction(&self) -> f64 {
        if self.converged.is_empty() {
            0.0
        } else {
            self.converged_count() as f64 / self.converged.len() as f64
        }
    }
}

fn flag_converged(base: &[f64], refined: &[f64], tol: f64) -> Vec<bool> {
    base.iter()
        .zip(refined.iter())
        .map(|(a, b)| (a - b).abs() < tol)
        .collect()
}

/// Diagonalize a model with the default convergence check.
pub fn diagonalize(kind: ModelKind, params: &ModelParams) -> Result<Spectrum> {
    diagonalize_with(kind, params, &ConvergenceOptions::default())
}

/// Diagonalize a model, flagging per-level convergence against a run with
/// `opts.step` extra Fock states.
pub fn diagonalize_with(
    kind: ModelKind,
    params: &ModelParams,
    opts: &ConvergenceOptions,
) -> Result<Spectrum> {
    let h = hamiltonian(kind, params)?;
    let vals = hermitian_eigenvalues(&h)?;
    let refined_params = params.with_n_max(params.n_max + opts.step);
    let refined = hermitian_eigenvalues(&hamiltonian(kind, &refined_params)?)?;
    let converged = flag_converged(&vals, &refined, opts.tol);
    Ok(Spectrum { kind, params: *params, sector: None, eigenvalues: vals, converged })
}

/// Eigenvalues of one parity sector of H, verified block-diagonal first.
fn sector_eigenvalues(kind: ModelKind, params: &ModelParams, plus: bool) -> Result<Vec<f64>> {
    let h = hamiltonian(kind, params)?;
    let pi = symmetry_operator(params, SymmetryKind::Parity)?.matrix;
    let signs = diagonal_real(&pi).expect("parity is diagonal in the computational basis");

    // Parity must be a symmetry of H for the split to make sense; check the
    // off-sector block directly (O(n²), the eigensolve dwarfs it).
    let scale = h.max_abs();
    let mut cross: f64 = 0.0;
    for ((i, j), z) in h.entries().indexed_iter() {
        if (signs[i] > 0.0) != (signs[j] > 0.0) {
            cross = cross.max(z.norm());
        }
    }
    if cross > 1e-12 * scale {
        return Err(Error::InvalidParameter(format!(
            "Hamiltonian is not parity-block-diagonal (off-block max {cross:.3e}); \
             is a parity-breaking drive on?"
        )));
    }

    let want = plus;
    let idx: Vec<usize> = signs
        .iter()
        .enumerate()
        .filter(|(_, &s)| (s > 0.0) == want)
        .map(|(i, _)| i)
        .collect();
    let sub = h.entries().select(Axis(0), &idx).select(Axis(1), &idx);
    let sub_op = OperatorMatrixView::from_array(sub);
    sub_op.eigenvalues()
}

/// A dense Hermitian block that is not tied to a registered `Space`
/// (parity sectors have no standalone space descriptor).
struct OperatorMatrixView {
    entries: ndarray::Array2<crate::space::C64>,
}

impl OperatorMatrixView {
    fn from_array(entries: ndarray::Array2<crate::space::C64>) -> Self {
        Self { entries }
    }

    fn eigenvalues(&self) -> Result<Vec<f64>> {
        use ndarray_linalg::{Eigh, UPLO};
        let scale = self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return Ok(vec![0.0; self.entries.nrows()]);
        }
        let max_im = self.entries.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        if max_im <= 1e-14 * scale {
            let re = self.entries.mapv(|z| z.re);
            let sym = (&re + &re.t()).mapv(|x| 0.5 * x);
            let (vals, _) = sym.eigh(UPLO::Lower)?;
            Ok(vals.to_vec())
        } else {
            let herm = (&self.entries + &self.entries.t().mapv(|z| z.conj())).mapv(|z| 0.5 * z);
            let (vals, _) = herm.eigh(UPLO::Lower)?;
            Ok(vals.to_vec())
        }
    }
}

/// Split a parity-symmetric model into its (+1, −1) sector spectra, each
/// with its own convergence flags.
pub fn split_parity_sectors(kind: ModelKind, params: &ModelParams) -> Result<(Spectrum, Spectrum)> {
    split_parity_sectors_with(kind, params, &ConvergenceOptions::default())
}

pub fn split_parity_sectors_with(
    kind: ModelKind,
    params: &ModelParams,
    opts: &ConvergenceOptions,
) -> Result<(Spectrum, Spectrum)> {
    if params.epsilon != 0.0 {
        return Err(Error::InvalidParameter(
            "parity sectors need epsilon = 0 (the drive breaks parity)".into(),
        ));
    }
    let refined_params = params.with_n_max(params.n_max + opts.step);
    let mut out: Vec<Spectrum> = Vec::with_capacity(2);
    for plus in [true, false] {
        let vals = sector_eigenvalues(kind, params, plus)?;
        let refined = sector_eigenvalues(kind, &refined_params, plus)?;
        let converged = flag_converged(&vals, &refined, opts.tol);
        out.push(Spectrum {
            kind,
            params: *params,
            sector: Some(if plus { 1 } else { -1 }),
            eigenvalues: vals,
            converged,
        });
    }
    let minus = out.pop().expect("two sectors");
    let plus = out.pop().expect("two sectors");
    Ok((plus, minus))
}
