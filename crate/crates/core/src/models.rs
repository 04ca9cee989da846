//! The light-matter Hamiltonians under study and their symmetry operators.
//!
//! Five members of one family, all on the product space spin ⊗ fock:
//!
//! * `rabi` — single qubit, full coupling `g s^x (a + a†)`
//! * `jc` — single qubit, rotating-wave coupling `g (s⁺a + s⁻a†)`
//! * `dicke` — collective spin, full coupling `g (S⁺ + S⁻)(a + a†)`
//!   with the qubit splitting written as `2Δ S^z`
//! * `tc` — collective spin, rotating-wave coupling
//! * `generalized` — single qubit with an extra parity-breaking drive `ε s^x`
//!
//! All builders produce real symmetric matrices. The rotating-wave models
//! conserve the excitation number exactly even on the truncated space; the
//! full-coupling models conserve parity, and at the degenerate points Δ = 0
//! or ω = 0 an extra conserved quantity appears (the spin coupling S⁺ + S⁻,
//! or the field quadrature a + a†), which is what the transfer-matrix
//! machinery in [`crate::yang_baxter`] explains.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{
    boson_op, embed, spin_op, FockSpace, OperatorMatrix, OperatorTag, ProductSpace, Slot, Space,
    SpinRep, SpinSpace,
};

/// Which Hamiltonian to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "rabi")]
    Rabi,
    #[serde(rename = "jc")]
    JaynesCummings,
    #[serde(rename = "dicke")]
    Dicke,
    #[serde(rename = "tc")]
    TavisCummings,
    #[serde(rename = "generalized")]
    GeneralizedRabi,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Rabi,
        ModelKind::JaynesCummings,
        ModelKind::Dicke,
        ModelKind::TavisCummings,
        ModelKind::GeneralizedRabi,
    ];

    /// Models whose coupling is single-qubit only.
    pub fn single_qubit_only(self) -> bool {
        matches!(
            self,
            ModelKind::Rabi | ModelKind::JaynesCummings | ModelKind::GeneralizedRabi
        )
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ModelKind::Rabi => "rabi",
            ModelKind::JaynesCummings => "jc",
            ModelKind::Dicke => "dicke",
            ModelKind::TavisCummings => "tc",
            ModelKind::GeneralizedRabi => "generalized",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rabi" => Ok(ModelKind::Rabi),
            "jc" => Ok(ModelKind::JaynesCummings),
            "dicke" => Ok(ModelKind::Dicke),
            "tc" => Ok(ModelKind::TavisCummings),
            "generalized" => Ok(ModelKind::GeneralizedRabi),
            other => Err(Error::InvalidParameter(format!(
                "unknown model `{other}` (expected rabi|jc|dicke|tc|generalized)"
            ))),
        }
    }
}

/// Physical and truncation parameters of a model instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Qubit splitting Δ.
    pub delta: f64,
    /// Field frequency ω.
    pub omega: f64,
    /// Coupling g.
    pub g: f64,
    /// Parity-breaking drive ε (generalized model only; keep 0 elsewhere).
    #[serde(default)]
    pub epsilon: f64,
    pub n_qubits: usize,
    pub rep: SpinRep,
    pub n_max: usize,
}

impl ModelParams {
    pub fn space(&self) -> Result<ProductSpace> {
        let spin = SpinSpace::new(self.n_qubits, self.rep)?;
        let fock = FockSpace::new(self.n_max)?;
        Ok(ProductSpace::new(spin, fock))
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("delta", self.delta),
            ("omega", self.omega),
            ("g", self.g),
            ("epsilon", self.epsilon),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(())
    }
}

/// Embedded elementary operators on a product space, built once per
/// Hamiltonian assembly.
pub(crate) struct EmbeddedOps {
    pub sz: OperatorMatrix,
    pub sp: OperatorMatrix,
    pub sm: OperatorMatrix,
    pub a: OperatorMatrix,
    pub ad: OperatorMatrix,
    pub n: OperatorMatrix,
}

impl EmbeddedOps {
    pub fn build(space: ProductSpace) -> Result<Self> {
        let lift_s = |tag| -> Result<OperatorMatrix> {
            embed(&spin_op(space.spin, tag, None)?, space, Slot::Spin)
        };
        let lift_f = |tag| -> Result<OperatorMatrix> {
            embed(&boson_op(space.fock, tag)?, space, Slot::Fock)
        };
        Ok(Self {
            sz: lift_s(OperatorTag::TotalSz)?,
            sp: lift_s(OperatorTag::TotalSPlus)?,
            sm: lift_s(OperatorTag::TotalSMinus)?,
            a: lift_f(OperatorTag::A)?,
            ad: lift_f(OperatorTag::ADagger)?,
            n: lift_f(OperatorTag::NHat)?,
        })
    }

    /// Spin coupling S⁺ + S⁻ (= 2 S^x).
    pub fn coupling(&self) -> OperatorMatrix {
        &self.sp + &self.sm
    }

    /// Field quadrature a + a†.
    pub fn quadrature(&self) -> OperatorMatrix {
        &self.a + &self.ad
    }
}

fn require_single_qubit(kind: ModelKind, params: &ModelParams) -> Result<()> {
    if params.n_qubits != 1 {
        return Err(Error::InvalidParameter(format!(
            "model `{kind}` is defined for a single qubit, got n_qubits={}",
            params.n_qubits
        )));
    }
    Ok(())
}

/// Quantum Rabi model: H = Δ s^z + ω n̂ + g s^x (a + a†).
pub fn build_rabi(params: &ModelParams) -> Result<OperatorMatrix> {
    params.validate()?;
    require_single_qubit(ModelKind::Rabi, params)?;
    let ops = EmbeddedOps::build(params.space()?)?;
    let sx = ops.coupling().scale_re(0.5);
    Ok(&(&ops.sz.scale_re(params.delta) + &ops.n.scale_re(params.omega))
        + &sx.dot(&ops.quadrature()).scale_re(params.g))
}

/// Jaynes-Cummings model: H = Δ s^z + ω n̂ + g (s⁺ a + s⁻ a†).
pub fn build_jc(params: &ModelParams) -> Result<OperatorMatrix> {
    params.validate()?;
    require_single_qubit(ModelKind::JaynesCummings, params)?;
    let ops = EmbeddedOps::build(params.space()?)?;
    let exchange = &ops.sp.dot(&ops.a) + &ops.sm.dot(&ops.ad);
    Ok(&(&ops.sz.scale_re(params.delta) + &ops.n.scale_re(params.omega))
        + &exchange.scale_re(params.g))
}

/// Dicke model: H = 2Δ S^z + ω n̂ + g (S⁺ + S⁻)(a + a†).
pub fn build_dicke(params: &ModelParams) -> Result<OperatorMatrix> {
    params.validate()?;
    let ops = EmbeddedOps::build(params.space()?)?;
    Ok(&(&ops.sz.scale_re(2.0 * params.delta) + &ops.n.scale_re(params.omega))
        + &ops.coupling().dot(&ops.quadrature()).scale_re(params.g))
}

/// Tavis-Cummings model: H = Δ S^z + ω n̂ + g (S⁺ a + S⁻ a†).
pub fn build_tc(params: &ModelParams) -> Result<OperatorMatrix> {
    params.validate()?;
    let ops = EmbeddedOps::build(params.space()?)?;
    let exchange = &ops.sp.dot(&ops.a) + &ops.sm.dot(&ops.ad);
    Ok(&(&ops.sz.scale_re(params.delta) + &ops.n.scale_re(params.omega))
        + &exchange.scale_re(params.g))
}

/// Generalized Rabi model with a parity-breaking drive:
/// H = 2Δ s^z + ω n̂ + g (s⁺ + s⁻)(a + a†) + ε s^x.
pub fn build_generalized(params: &ModelParams) -> Result<OperatorMatrix> {
    params.validate()?;
    require_single_qubit(ModelKind::GeneralizedRabi, params)?;
    let ops = EmbeddedOps::build(params.space()?)?;
    let coupling = ops.coupling();
    let sx = coupling.scale_re(0.5);
    Ok(&(&(&ops.sz.scale_re(2.0 * params.delta) + &ops.n.scale_re(params.omega))
        + &coupling.dot(&ops.quadrature()).scale_re(params.g))
        + &sx.scale_re(params.epsilon))
}

/// Build the Hamiltonian for any model kind.
pub fn hamiltonian(kind: ModelKind, params: &ModelParams) -> Result<OperatorMatrix> {
    match kind {
        ModelKind::Rabi => build_rabi(params),
        ModelKind::JaynesCummings => build_jc(params),
        ModelKind::Dicke => build_dicke(params),
        ModelKind::TavisCummings => build_tc(params),
        ModelKind::GeneralizedRabi => build_generalized(params),
    }
}

/// The symmetry operators relevant to this family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryKind {
    /// Π = exp{iπ(n̂ + S^z + n_qubits/2)} — diagonal with entries ±1.
    Parity,
    /// M = n̂ + S^z, conserved by the rotating-wave models.
    ExcitationNumber,
    /// S² = S⁺S⁻ + S^z(S^z − 1), conserved whenever the coupling is
    /// collective.
    TotalSpinSquared,
    /// S⁺ + S⁻ — the extra conserved quantity of the full-coupling models
    /// at Δ = 0.
    SpinCoupling,
    /// a + a† — the extra conserved quantity at ω = 0.
    FieldQuadrature,
}

impl std::fmt::Display for SymmetryKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SymmetryKind::Parity => "parity",
            SymmetryKind::ExcitationNumber => "excitation_number",
            SymmetryKind::TotalSpinSquared => "total_spin_squared",
            SymmetryKind::SpinCoupling => "spin_coupling",
            SymmetryKind::FieldQuadrature => "field_quadrature",
        };
        f.write_str(s)
    }
}

/// A symmetry operator together with its label.
#[derive(Clone, Debug)]
pub struct SymmetryOperator {
    pub kind: SymmetryKind,
    pub matrix: OperatorMatrix,
}

/// Build a symmetry operator on the model's product space.
pub fn symmetry_operator(params: &ModelParams, kind: SymmetryKind) -> Result<SymmetryOperator> {
    let space = params.space()?;
    let matrix = match kind {
        SymmetryKind::Parity => parity_matrix(space)?,
        SymmetryKind::ExcitationNumber => {
            let ops = EmbeddedOps::build(space)?;
            &ops.n + &ops.sz
        }
        SymmetryKind::TotalSpinSquared => {
            let sz = spin_op(space.spin, OperatorTag::TotalSz, None)?;
            let sp = spin_op(space.spin, OperatorTag::TotalSPlus, None)?;
            let sm = spin_op(space.spin, OperatorTag::TotalSMinus, None)?;
            let id = OperatorMatrix::identity(Space::Spin(space.spin));
            let s2 = &sp.dot(&sm) + &sz.dot(&(&sz - &id));
            embed(&s2, space, Slot::Spin)?
        }
        SymmetryKind::SpinCoupling => EmbeddedOps::build(space)?.coupling(),
        SymmetryKind::FieldQuadrature => EmbeddedOps::build(space)?.quadrature(),
    };
    Ok(SymmetryOperator { kind, matrix })
}

/// Parity weight (±1) of each basis state of the spin factor: the number of
/// down flips from the top state, i.e. j − m.
fn spin_parity_weights(spin: SpinSpace) -> Vec<f64> {
    match spin.rep() {
        // Index i has m = j − i, so n̂ + S^z + j ≡ n + (n_qubits − i) (mod 2).
        SpinRep::Collective => (0..spin.dim())
            .map(|i| if (spin.n_qubits() - i) % 2 == 0 { 1.0 } else { -1.0 })
            .collect(),
        // Index b has one down spin per set bit, so m + j = n_qubits − popcount(b).
        SpinRep::FullTensor => (0..spin.dim())
            .map(|b| {
                let ups = spin.n_qubits() - (b as u64).count_ones() as usize;
                if ups % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect(),
    }
}

fn parity_matrix(space: ProductSpace) -> Result<OperatorMatrix> {
    let spin_w = spin_parity_weights(space.spin);
    let nf = space.fock.dim();
    let mut m = ndarray::Array2::<f64>::zeros((space.dim(), space.dim()));
    for (s, w) in spin_w.iter().enumerate() {
        for n in 0..nf {
            let idx = s * nf + n;
            m[(idx, idx)] = if n % 2 == 0 { *w } else { -*w };
        }
    }
    OperatorMatrix::from_real(Space::Product(space), m)
}
