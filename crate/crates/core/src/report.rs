//! Machine-readable result record shared by the verification commands.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// One verification outcome: which check ran, where, and how it scored.
///
/// `params` is a flat name → value map (couplings, spectral parameters,
/// tolerances); a `BTreeMap` keeps serialization order deterministic so
/// repeated runs are byte-identical.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct VerificationReport {
    pub check: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    pub params: BTreeMap<String, f64>,
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub buffer: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new(check: impl Into<String>) -> Self {
        Self {
            check: check.into(),
            point: None,
            model: None,
            params: BTreeMap::new(),
            residual: 0.0,
            buffer: None,
            n_max: None,
            pass: false,
        }
    }

    pub fn point(mut self, point: impl ToString) -> Self {
        self.point = Some(point.to_string());
        self
    }

    pub fn model(mut self, model: impl ToString) -> Self {
        self.model = Some(model.to_string());
        self
    }

    pub fn param(mut self, name: impl Into<String>, value: f64) -> Self {
        self.params.insert(name.into(), value);
        self
    }

    pub fn buffer(mut self, buffer: usize) -> Self {
        self.buffer = Some(buffer);
        self
    }

    pub fn n_max(mut self, n_max: usize) -> Self {
        self.n_max = Some(n_max);
        self
    }

    /// Record the measured residual against its threshold; sets `pass`.
    pub fn scored(mut self, residual: f64, tolerance: f64) -> Self {
        self.residual = residual;
        self.params.insert("tolerance".into(), tolerance);
        self.pass = residual.is_finite() && residual <= tolerance;
        self
    }
}
