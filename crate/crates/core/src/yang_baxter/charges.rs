//! Conserved charges read off the transfer matrix, and a variational grid
//! search demonstrating that no simple charge survives between the two
//! integrable endpoints.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::OperatorPolynomial;
use crate::error::{Error, Result};
use crate::linalg::eigh_real;
use crate::models::{build_rabi, symmetry_operator, ModelParams, SymmetryKind};
use crate::space::{
    boson_op, commutator_residual, embed, projector_below, spin_op, OperatorMatrix, OperatorTag,
    Slot, Space, C64,
};

/// Coefficients closer than this (relative Frobenius) to a multiple of the
/// identity carry no dynamical information and are dropped.
const SCALAR_TOL: f64 = 1e-12;

/// Hermiticity defects below this are float noise; the coefficient is then
/// symmetrized. Larger defects are structural (the ω = 0 factorised
/// transfer matrix is only pseudo-Hermitian) and the raw operator is kept:
/// the raw coefficients commute exactly, their symmetrized halves do not.
const HERMITIZE_TOL: f64 = 1e-12;

/// One conserved operator extracted from a transfer-matrix coefficient.
#[derive(Clone, Debug)]
pub struct Charge {
    /// Power of u this coefficient multiplies.
    pub power: usize,
    pub matrix: OperatorMatrix,
    /// Relative ‖C − C†‖_max / ‖C‖_max of the raw coefficient.
    pub hermiticity_defect: f64,
    /// Whether the stored matrix was symmetrized (only done when the defect
    /// is float-level).
    pub hermitized: bool,
}

/// The commuting family produced by one transfer matrix.
#[derive(Clone, Debug)]
pub struct ChargeSet {
    charges: Vec<Charge>,
    space: Space,
    degree: usize,
}

impl ChargeSet {
    pub fn charges(&self) -> &[Charge] {
        &self.charges
    }

    pub fn len(&self) -> usize {
        self.charges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charges.is_empty()
    }

    pub fn space(&self) -> Space {
        self.space
    }

    /// Degree of the transfer-matrix polynomial the set came from.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// The u^(N−1) coefficient, which carries the Hamiltonian.
    pub fn hamiltonian_charge(&self) -> Option<&Charge> {
        let want = self.degree.checked_sub(1)?;
        self.charges.iter().find(|c| c.power == want)
    }

    /// Largest normalized commutator among the charges.
    pub fn max_pairwise_residual(&self, projector: Option<&OperatorMatrix>) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for i in 0..self.charges.len() {
            for j in (i + 1)..self.charges.len() {
                let r = commutator_residual(
                    &self.charges[i].matrix,
                    &self.charges[j].matrix,
                    projector,
                )?;
                worst = worst.max(r);
            }
        }
        Ok(worst)
    }

    /// Largest normalized commutator of any charge with a given operator
    /// (typically the Hamiltonian).
    pub fn max_residual_with(
        &self,
        other: &OperatorMatrix,
        projector: Option<&OperatorMatrix>,
    ) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for ch in &self.charges {
            worst = worst.max(commutator_residual(&ch.matrix, other, projector)?);
        }
        Ok(worst)
    }
}

/// Extract the non-scalar coefficients of a transfer-matrix polynomial as
/// conserved charges.
///
/// Coefficients proportional to the identity (like the leading 2·1 of the
/// factorised construction) are skipped. Each kept coefficient records its
/// hermiticity defect; symmetrization is applied only when the defect is
/// pure rounding noise, because the genuinely non-Hermitian coefficients of
/// the ω = 0 factorised family stop commuting once symmetrized.
pub fn extract_charges(tau: &OperatorPolynomial) -> Result<ChargeSet> {
    let space = tau.space();
    let dim = space.dim() as f64;
    let mut charges = Vec::new();
    for (power, coeff) in tau.coeffs().iter().enumerate() {
        let scale = coeff.frobenius();
        if scale == 0.0 {
            continue;
        }
        let mean = coeff.trace() / C64::new(dim, 0.0);
        let scalar_part = OperatorMatrix::identity(space).scale(mean);
        if coeff.distance(&scalar_part) <= SCALAR_TOL * scale {
            continue;
        }
        let defect = coeff.hermiticity_defect();
        let (matrix, hermitized) = if defect <= HERMITIZE_TOL {
            (coeff.hermitian_part(), true)
        } else {
            (coeff.clone(), false)
        };
        charges.push(Charge { power, matrix, hermiticity_defect: defect, hermitized });
    }
    Ok(ChargeSet { charges, space, degree: tau.degree() })
}

/// Elementary Hermitian building blocks for the candidate-charge span.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzOp {
    /// s^x on the qubit.
    Sx,
    /// s^y on the qubit.
    Sy,
    /// s^z on the qubit.
    Sz,
    /// a + a†.
    Quadrature,
    /// i(a† − a).
    Momentum,
    /// n̂.
    Number,
}

/// Operators projected out of the span before minimizing: trivially
/// conserved quantities that would mask a genuine charge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exclusion {
    Identity,
    Hamiltonian,
    HamiltonianSquared,
    Parity,
}

/// Configuration of the interpolation search.
///
/// The probe walks the arc (Δ, ω) = r·(sin θ, cos θ) of the Rabi model from
/// the Δ = 0 endpoint (θ = 0, conserved s^x) to the ω = 0 endpoint
/// (θ = π/2, conserved a + a†) and at each point minimizes
/// ‖[H(θ), C]‖_F over unit-norm combinations C of the ansatz operators,
/// Frobenius-orthogonalized against the exclusions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// Radius of the (Δ, ω) arc.
    pub r: f64,
    /// Grid of θ values in [0, π/2].
    pub theta_grid: Vec<f64>,
    /// Products of elementary operators spanning the candidate charges
    /// (each product is symmetrized).
    pub ansatz: Vec<Vec<AnsatzOp>>,
    pub exclusions: Vec<Exclusion>,
    /// Fock buffer used for the quadrature-overlap diagnostic.
    pub buffer: usize,
}

impl ProbeConfig {
    /// Uniform grid of `steps ≥ 2` points over [0, π/2] with the default
    /// ansatz and all exclusions.
    pub fn with_steps(r: f64, steps: usize) -> Result<Self> {
        if steps < 2 {
            return Err(Error::InvalidParameter("probe grid needs at least 2 points".into()));
        }
        let half_pi = std::f64::consts::FRAC_PI_2;
        let theta_grid = (0..steps)
            .map(|k| half_pi * k as f64 / (steps - 1) as f64)
            .collect();
        Ok(Self {
            r,
            theta_grid,
            ansatz: default_ansatz(),
            exclusions: vec![
                Exclusion::Identity,
                Exclusion::Hamiltonian,
                Exclusion::HamiltonianSquared,
                Exclusion::Parity,
            ],
            buffer: 1,
        })
    }
}

/// The nine-operator span used by default: the spin components, the three
/// quadratic field observables, and the parity-even cross terms that contain
/// both endpoint charges.
pub fn default_ansatz() -> Vec<Vec<AnsatzOp>> {
    vec![
        vec![AnsatzOp::Sx],
        vec![AnsatzOp::Sy],
        vec![AnsatzOp::Sz],
        vec![AnsatzOp::Quadrature],
        vec![AnsatzOp::Momentum],
        vec![AnsatzOp::Number],
        vec![AnsatzOp::Sx, AnsatzOp::Quadrature],
        vec![AnsatzOp::Sy, AnsatzOp::Momentum],
        vec![AnsatzOp::Sz, AnsatzOp::Number],
    ]
}

/// One grid point of the interpolation search.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ProbeSample {
    pub theta: f64,
    pub delta: f64,
    pub omega: f64,
    /// Smallest singular value of C ↦ [H, C] on the projected span, i.e.
    /// min ‖[H, C]‖_F over unit-Frobenius C.
    pub residual: f64,
    /// The same minimum divided by ‖H‖_F, a scale-free diagnostic.
    pub residual_relative: f64,
    /// |⟨minimizer, s^x⟩| (both unit-normalized).
    pub overlap_spin: f64,
    /// |⟨minimizer, a + a†⟩| after projecting both below the buffer.
    pub overlap_quadrature: f64,
}

/// Eigen-directions of the overlap Gram matrix below this relative weight
/// are treated as collapsed and excluded from the minimization.
const GRAM_TOL: f64 = 1e-10;

/// Run the charge-interpolation search. The template supplies g and the
/// space; Δ and ω are driven around the arc by the config.
pub fn charge_search_probe(
    template: &ModelParams,
    config: &ProbeConfig,
) -> Result<Vec<ProbeSample>> {
    if template.n_qubits != 1 {
        return Err(Error::InvalidParameter("the probe interpolates the single-qubit model".into()));
    }
    if template.epsilon != 0.0 {
        return Err(Error::InvalidParameter("the probe needs epsilon = 0".into()));
    }
    if !(config.r.is_finite() && config.r > 0.0) {
        return Err(Error::InvalidParameter("probe radius must be positive".into()));
    }
    if config.theta_grid.is_empty() || config.ansatz.is_empty() {
        return Err(Error::InvalidParameter("probe needs a grid and an ansatz".into()));
    }
    let space = template.space()?;
    if config.buffer > space.fock.n_max() {
        return Err(Error::InvalidParameter("probe buffer exceeds n_max".into()));
    }

    // θ-independent pieces.
    let basis: Vec<OperatorMatrix> = config
        .ansatz
        .iter()
        .map(|product| build_ansatz_product(template, product))
        .collect::<Result<Vec<_>>>()?;
    let parity = symmetry_operator(template, SymmetryKind::Parity)?.matrix;
    let p_buf = projector_below(space, space.fock.n_max() - config.buffer)?;
    let spin_ref = embed(
        &spin_op(space.spin, OperatorTag::TotalSx, None)?,
        space,
        Slot::Spin,
    )?;
    let quad_ref = (&embed(&boson_op(space.fock, OperatorTag::A)?, space, Slot::Fock)?
        + &embed(&boson_op(space.fock, OperatorTag::ADagger)?, space, Slot::Fock)?)
        .projected(&p_buf);

    let mut samples = Vec::with_capacity(config.theta_grid.len());
    for &theta in &config.theta_grid {
        let mut mp = *template;
        mp.delta = config.r * theta.sin();
        mp.omega = config.r * theta.cos();
        let h = build_rabi(&mp)?;

        // Orthonormalize the exclusions, then project them out of the span.
        let mut excl: Vec<OperatorMatrix> = Vec::new();
        for kind in &config.exclusions {
            let raw = match kind {
                Exclusion::Identity => OperatorMatrix::identity(Space::Product(space)),
                Exclusion::Hamiltonian => h.clone(),
                Exclusion::HamiltonianSquared => h.dot(&h),
                Exclusion::Parity => parity.clone(),
            };
            let scale = raw.frobenius();
            let mut next = raw;
            for e in &excl {
                let c = e.frobenius_inner(&next);
                next = &next - &e.scale(c);
            }
            let n = next.frobenius();
            if n > 1e-12 * scale.max(1.0) {
                excl.push(next.scale_re(1.0 / n));
            }
        }
        let projected: Vec<OperatorMatrix> = basis
            .iter()
            .map(|b| {
                let mut out = b.clone();
                for e in &excl {
                    let c = e.frobenius_inner(&out);
                    out = &out - &e.scale(c);
                }
                out
            })
            .collect();

        // Gram matrices of the span and of its image under [H, ·].
        let k = projected.len();
        let mut gram = Array2::<f64>::zeros((k, k));
        let mut comm_gram = Array2::<f64>::zeros((k, k));
        let comms: Vec<OperatorMatrix> = projected.iter().map(|b| h.commutator(b)).collect();
        for i in 0..k {
            for j in i..k {
                let g = projected[i].frobenius_inner(&projected[j]).re;
                let c = comms[i].frobenius_inner(&comms[j]).re;
                gram[(i, j)] = g;
                gram[(j, i)] = g;
                comm_gram[(i, j)] = c;
                comm_gram[(j, i)] = c;
            }
        }

        // Whiten the span and minimize the commutator norm over it.
        let (gvals, gvecs) = eigh_real(&gram)?;
        let gmax = gvals.iter().cloned().fold(0.0, f64::max);
        if gmax <= 0.0 {
            return Err(Error::InvalidParameter(
                "ansatz span collapsed to the exclusions".into(),
            ));
        }
        let kept: Vec<usize> =
            (0..k).filter(|&i| gvals[i] > GRAM_TOL * gmax).collect();
        let mut white = Array2::<f64>::zeros((k, kept.len()));
        for (col, &i) in kept.iter().enumerate() {
            let w = 1.0 / gvals[i].sqrt();
            for row in 0..k {
                white[(row, col)] = gvecs[(row, i)] * w;
            }
        }
        let reduced = white.t().dot(&comm_gram).dot(&white);
        let (mvals, mvecs) = eigh_real(&reduced)?;
        let best = 0; // ascending order: smallest commutator norm first
        let _ = mvals;
        let coeff = white.dot(&mvecs.column(best).to_owned());

        let mut minimizer = OperatorMatrix::zeros(Space::Product(space));
        for (i, b) in projected.iter().enumerate() {
            minimizer = &minimizer + &b.scale_re(coeff[i]);
        }
        // Whitened coordinates give ‖C‖_F = 1 up to rounding; renormalize so
        // the residual is exactly the singular value of C ↦ [H, C].
        let norm = minimizer.frobenius();
        if norm > 0.0 {
            minimizer = minimizer.scale_re(1.0 / norm);
        }
        let residual = h.commutator(&minimizer).frobenius();
        let h_norm = h.frobenius();
        let residual_relative = if h_norm > 0.0 { residual / h_norm } else { residual };

        let overlap_spin = normalized_overlap(&minimizer, &spin_ref);
        let overlap_quadrature = normalized_overlap(&minimizer.projected(&p_buf), &quad_ref);

        samples.push(ProbeSample {
            theta,
            delta: mp.delta,
            omega: mp.omega,
            residual,
            residual_relative,
            overlap_spin,
            overlap_quadrature,
        });
    }
    Ok(samples)
}

fn normalized_overlap(a: &OperatorMatrix, b: &OperatorMatrix) -> f64 {
    let na = a.frobenius();
    let nb = b.frobenius();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    a.frobenius_inner(b).norm() / (na * nb)
}

fn build_ansatz_product(template: &ModelParams, product: &[AnsatzOp]) -> Result<OperatorMatrix> {
    if product.is_empty() {
        return Err(Error::InvalidParameter("empty ansatz product".into()));
    }
    let space = template.space()?;
    let elementary = |op: AnsatzOp| -> Result<OperatorMatrix> {
        match op {
            AnsatzOp::Sx => embed(&spin_op(space.spin, OperatorTag::TotalSx, None)?, space, Slot::Spin),
            AnsatzOp::Sy => {
                let sp = spin_op(space.spin, OperatorTag::TotalSPlus, None)?;
                let sm = spin_op(space.spin, OperatorTag::TotalSMinus, None)?;
                embed(&(&sp - &sm).scale(C64::new(0.0, -0.5)), space, Slot::Spin)
            }
            AnsatzOp::Sz => embed(&spin_op(space.spin, OperatorTag::TotalSz, None)?, space, Slot::Spin),
            AnsatzOp::Quadrature => {
                let a = boson_op(space.fock, OperatorTag::A)?;
                let ad = boson_op(space.fock, OperatorTag::ADagger)?;
                embed(&(&a + &ad), space, Slot::Fock)
            }
            AnsatzOp::Momentum => {
                let a = boson_op(space.fock, OperatorTag::A)?;
                let ad = boson_op(space.fock, OperatorTag::ADagger)?;
                embed(&(&ad - &a).scale(C64::new(0.0, 1.0)), space, Slot::Fock)
            }
            AnsatzOp::Number => embed(&boson_op(space.fock, OperatorTag::NHat)?, space, Slot::Fock),
        }
    };
    let mut acc = elementary(product[0])?;
    for op in &product[1..] {
        acc = acc.dot(&elementary(*op)?);
    }
    Ok(acc.hermitian_part())
}
