//! Config-file schema and flag merging. A run resolves, in order of
//! precedence: command-line flags, then the JSON config file, then the
//! documented defaults. The resolved values are echoed into every report.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use rabilab::{ModelParams, SpinRep};

/// JSON config file. Unknown keys are rejected so typos fail loudly.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<String>,
    pub point: Option<String>,
    pub factorised: Option<bool>,
    pub rep: Option<String>,
    pub delta: Option<f64>,
    pub omega: Option<f64>,
    pub g: Option<f64>,
    pub epsilon: Option<f64>,
    pub n_qubits: Option<usize>,
    pub n_max: Option<usize>,
    pub u: Option<f64>,
    pub v: Option<f64>,
    pub eta: Option<f64>,
    pub lambda: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub buffer: Option<usize>,
    pub threshold: Option<f64>,
    pub sector: Option<String>,
    pub histogram: Option<bool>,
    pub probe: Option<ProbeSection>,
    pub stats: Option<StatsSection>,
    pub sweep: Option<SweepSection>,
    pub output: Option<PathBuf>,
    pub format: Option<String>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    pub r: Option<f64>,
    pub steps: Option<usize>,
    pub buffer: Option<usize>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsSection {
    pub trim_fraction: Option<f64>,
    pub degeneracy_rel_tol: Option<f64>,
    pub min_levels: Option<usize>,
    pub unfolding_degree: Option<usize>,
    pub bins: Option<usize>,
    pub s_max: Option<f64>,
    pub ensemble: Option<String>,
    pub dimension: Option<usize>,
    pub draws: Option<usize>,
}

/// One-parameter sweep grid: the named model parameter takes each value in
/// turn, all other parameters held at their resolved base values.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub param: String,
    pub values: Vec<f64>,
}

/// Fully-resolved model parameters plus provenance, echoed into reports.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResolvedModel {
    pub delta: f64,
    pub omega: f64,
    pub g: f64,
    pub epsilon: f64,
    pub n_qubits: usize,
    pub rep: SpinRep,
    pub n_max: usize,
}

impl ResolvedModel {
    pub fn to_params(self) -> ModelParams {
        ModelParams {
            delta: self.delta,
            omega: self.omega,
            g: self.g,
            epsilon: self.epsilon,
            n_qubits: self.n_qubits,
            rep: self.rep,
            n_max: self.n_max,
        }
    }
}

/// Merge helper: flag wins, then file value, then default.
pub fn pick<T: Clone>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Merge helper for genuinely optional values (no default).
pub fn pick_opt<T: Clone>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}
