//! Truncated Hilbert spaces and exact matrix representations of the
//! elementary operators on them.
//!
//! Three kinds of space appear: a bosonic Fock space hard-truncated at
//! occupation `n_max` (so `a_dag` annihilates the top state and `[a, a_dag]`
//! picks up a single defect entry `-n_max` in the corner), a spin space for
//! `n_qubits` two-level systems in either the collective spin-j
//! representation or the full 2^n tensor product, and the product of the two
//! with the ordering fixed as spin ⊗ fock.
//!
//! Matrix elements are exact (up to float rounding) inside the retained
//! block; truncation artifacts enter only through products whose
//! intermediate states would leave the block through the top of the ladder.

use ndarray::linalg::kron;
use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Bosonic Fock space truncated at occupation `n_max` (dimension `n_max + 1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockSpace {
    n_max: usize,
}

impl FockSpace {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidSpace("fock space needs n_max >= 1".into()));
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }
}

/// How the spin degrees of freedom are represented.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpinRep {
    /// Maximal-spin multiplet j = n_qubits/2, dimension n_qubits + 1,
    /// basis ordered by descending magnetic number m = j, j-1, ..., -j.
    Collective,
    /// Full 2^n_qubits tensor product; site 1 is the leftmost Kronecker
    /// factor and each site's basis is (up, down).
    FullTensor,
}

/// Spin space for `n_qubits` two-level systems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinSpace {
    n_qubits: usize,
    rep: SpinRep,
}

impl SpinSpace {
    pub fn new(n_qubits: usize, rep: SpinRep) -> Result<Self> {
        if n_qubits < 1 {
            return Err(Error::InvalidSpace("spin space needs n_qubits >= 1".into()));
        }
        if rep == SpinRep::FullTensor && n_qubits > 20 {
            return Err(Error::InvalidSpace(format!(
                "full tensor representation of {n_qubits} qubits is too large"
            )));
        }
        Ok(Self { n_qubits, rep })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn rep(&self) -> SpinRep {
        self.rep
    }

    /// Total spin j of the collective multiplet.
    pub fn j(&self) -> f64 {
        self.n_qubits as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        match self.rep {
            SpinRep::Collective => self.n_qubits + 1,
            SpinRep::FullTensor => 1usize << self.n_qubits,
        }
    }
}

/// Product space with the ordering fixed as spin ⊗ fock.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductSpace {
    pub spin: SpinSpace,
    pub fock: FockSpace,
}

impl ProductSpace {
    pub fn new(spin: SpinSpace, fock: FockSpace) -> Self {
        Self { spin, fock }
    }

    pub fn dim(&self) -> usize {
        self.spin.dim() * self.fock.dim()
    }
}

/// The space an operator matrix acts on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    Fock(FockSpace),
    Spin(SpinSpace),
    Product(ProductSpace),
}

impl Space {
    pub fn dim(&self) -> usize {
        match self {
            Space::Fock(f) => f.dim(),
            Space::Spin(s) => s.dim(),
            Space::Product(p) => p.dim(),
        }
    }
}

/// Names for the elementary operators the factories can produce.
///
/// Lower-case spin tags act on a single site (full tensor representation,
/// or n_qubits = 1 where the two representations coincide); the `Total*`
/// tags are collective sums and work in both representations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorTag {
    A,
    ADagger,
    NHat,
    Sx,
    Sy,
    Sz,
    SPlus,
    SMinus,
    TotalSx,
    TotalSz,
    TotalSPlus,
    TotalSMinus,
    Identity,
}

impl OperatorTag {
    pub fn is_bosonic(self) -> bool {
        matches!(self, OperatorTag::A | OperatorTag::ADagger | OperatorTag::NHat)
    }

    pub fn is_single_site(self) -> bool {
        matches!(
            self,
            OperatorTag::Sx | OperatorTag::Sy | OperatorTag::Sz | OperatorTag::SPlus | OperatorTag::SMinus
        )
    }

    pub fn is_collective(self) -> bool {
        matches!(
            self,
            OperatorTag::TotalSx | OperatorTag::TotalSz | OperatorTag::TotalSPlus | OperatorTag::TotalSMinus
        )
    }
}

impl std::fmt::Display for OperatorTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            OperatorTag::A => "a",
            OperatorTag::ADagger => "a_dagger",
            OperatorTag::NHat => "n_hat",
            OperatorTag::Sx => "sx",
            OperatorTag::Sy => "sy",
            OperatorTag::Sz => "sz",
            OperatorTag::SPlus => "s_plus",
            OperatorTag::SMinus => "s_minus",
            OperatorTag::TotalSx => "total_sx",
            OperatorTag::TotalSz => "total_sz",
            OperatorTag::TotalSPlus => "total_s_plus",
            OperatorTag::TotalSMinus => "total_s_minus",
            OperatorTag::Identity => "identity",
        };
        f.write_str(name)
    }
}

/// Dense complex matrix tied to the space it acts on.
///
/// All arithmetic checks that both operands live on the same space; the
/// checks are cheap (space descriptors are tiny) and catch the classic
/// mistake of combining operators from different truncations.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    entries: Array2<C64>,
    space: Space,
}

impl OperatorMatrix {
    pub fn new(space: Space, entries: Array2<C64>) -> Result<Self> {
        let d = space.dim();
        if entries.nrows() != d || entries.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, actual: entries.nrows() });
        }
        Ok(Self { entries, space })
    }

    pub fn from_real(space: Space, entries: Array2<f64>) -> Result<Self> {
        Self::new(space, entries.mapv(|x| C64::new(x, 0.0)))
    }

    pub fn zeros(space: Space) -> Self {
        let d = space.dim();
        Self { entries: Array2::zeros((d, d)), space }
    }

    pub fn identity(space: Space) -> Self {
        let d = space.dim();
        Self { entries: Array2::eye(d), space }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> Array2<C64> {
        self.entries
    }

    /// Hermitian conjugate.
    pub fn dagger(&self) -> Self {
        Self { entries: self.entries.t().mapv(|z| z.conj()), space: self.space }
    }

    /// Matrix product (BLAS-backed).
    pub fn dot(&self, other: &Self) -> Self {
        assert_eq!(self.space, other.space, "matrix product across different spaces");
        Self { entries: self.entries.dot(&other.entries), space: self.space }
    }

    /// Commutator [self, other].
    pub fn commutator(&self, other: &Self) -> Self {
        assert_eq!(self.space, other.space, "commutator across different spaces");
        let ab = self.entries.dot(&other.entries);
        let ba = other.entries.dot(&self.entries);
        Self { entries: ab - ba, space: self.space }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { entries: self.entries.mapv(|z| z * c), space: self.space }
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    /// P · self · P for a projector (or any sandwiching operator) P.
    pub fn projected(&self, p: &Self) -> Self {
        assert_eq!(self.space, p.space, "projection across different spaces");
        let m = p.entries.dot(&self.entries).dot(&p.entries);
        Self { entries: m, space: self.space }
    }

    pub fn trace(&self) -> C64 {
        self.entries.diag().sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.entries.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// Relative non-Hermiticity in the max norm: ‖A − A†‖_max / ‖A‖_max
    /// (zero for the zero matrix).
    pub fn hermiticity_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut defect: f64 = 0.0;
        for i in 0..self.dim() {
            for j in i..self.dim() {
                let d = (self.entries[(i, j)] - self.entries[(j, i)].conj()).norm();
                defect = defect.max(d);
            }
        }
        defect / scale
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.hermiticity_defect() <= rel_tol
    }

    /// (A + A†)/2.
    pub fn hermitian_part(&self) -> Self {
        let h = (&self.entries + &self.entries.t().mapv(|z| z.conj())).mapv(|z| z * 0.5);
        Self { entries: h, space: self.space }
    }

    /// Real part of the entries, as a plain array.
    pub fn real_entries(&self) -> Array2<f64> {
        self.entries.mapv(|z| z.re)
    }

    /// Frobenius inner product ⟨self, other⟩ = tr(self† · other).
    pub fn frobenius_inner(&self, other: &Self) -> C64 {
        assert_eq!(self.space, other.space, "inner product across different spaces");
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// ‖self − other‖_F.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(self.space, other.space, "distance across different spaces");
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

impl std::ops::Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.space, rhs.space, "sum across different spaces");
        OperatorMatrix { entries: &self.entries + &rhs.entries, space: self.space }
    }
}

impl std::ops::Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.space, rhs.space, "difference across different spaces");
        OperatorMatrix { entries: &self.entries - &rhs.entries, space: self.space }
    }
}

/// Which factor of a product space an operator is embedded into.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Spin,
    Fock,
}

/// Bosonic ladder/number operator on a truncated Fock space.
///
/// `a` lowers with exact amplitudes √n; `a_dagger` is its transpose, so it
/// annihilates the top state |n_max⟩ (hard truncation). Within the retained
/// block every matrix element is exact.
pub fn boson_op(space: FockSpace, tag: OperatorTag) -> Result<OperatorMatrix> {
    if !tag.is_bosonic() {
        return Err(Error::InvalidTag {
            tag: tag.to_string(),
            reason: "not a bosonic operator".into(),
        });
    }
    let d = space.dim();
    let mut m = Array2::<f64>::zeros((d, d));
    match tag {
        OperatorTag::A => {
            for n in 1..d {
                m[(n - 1, n)] = (n as f64).sqrt();
            }
        }
        OperatorTag::ADagger => {
            for n in 1..d {
                m[(n, n - 1)] = (n as f64).sqrt();
            }
        }
        OperatorTag::NHat => {
            for n in 0..d {
                m[(n, n)] = n as f64;
            }
        }
        _ => unreachable!(),
    }
    OperatorMatrix::from_real(Space::Fock(space), m)
}

fn site_matrix(tag: OperatorTag) -> Array2<C64> {
    let i = C64::new(0.0, 1.0);
    let mut m = Array2::<C64>::zeros((2, 2));
    match tag {
        OperatorTag::Sx => {
            m[(0, 1)] = C64::new(0.5, 0.0);
            m[(1, 0)] = C64::new(0.5, 0.0);
        }
        OperatorTag::Sy => {
            m[(0, 1)] = -0.5 * i;
            m[(1, 0)] = 0.5 * i;
        }
        OperatorTag::Sz => {
            m[(0, 0)] = C64::new(0.5, 0.0);
            m[(1, 1)] = C64::new(-0.5, 0.0);
        }
        OperatorTag::SPlus => {
            m[(0, 1)] = C64::new(1.0, 0.0);
        }
        OperatorTag::SMinus => {
            m[(1, 0)] = C64::new(1.0, 0.0);
        }
        _ => unreachable!(),
    }
    m
}

fn collective_ladder(n_qubits: usize, raising: bool) -> Array2<f64> {
    let j = n_qubits as f64 / 2.0;
    let d = n_qubits + 1;
    let mut m = Array2::<f64>::zeros((d, d));
    for idx in 0..d {
        let mag = j - idx as f64; // m for basis index idx (descending from +j)
        if raising {
            // S⁺|j,m⟩ = √(j(j+1) − m(m+1)) |j,m+1⟩ → row idx−1
            if idx >= 1 {
                m[(idx - 1, idx)] = (j * (j + 1.0) - mag * (mag + 1.0)).sqrt();
            }
        } else if idx + 1 < d {
            // S⁻|j,m⟩ = √(j(j+1) − m(m−1)) |j,m−1⟩ → row idx+1
            m[(idx + 1, idx)] = (j * (j + 1.0) - mag * (mag - 1.0)).sqrt();
        }
    }
    m
}

fn embed_site(n_qubits: usize, site: usize, m: &Array2<C64>) -> Array2<C64> {
    let left = Array2::<C64>::eye(1 << (site - 1));
    let right = Array2::<C64>::eye(1 << (n_qubits - site));
    kron(&kron(&left, m), &right)
}

/// Spin operator in the requested representation.
///
/// Collective (`Total*`) tags need no site and are available in both
/// representations (in the full tensor product they are sums over sites).
/// Single-site tags address one qubit of the full tensor product; for a
/// single qubit the two representations coincide and the site may be
/// omitted.
pub fn spin_op(space: SpinSpace, tag: OperatorTag, site: Option<usize>) -> Result<OperatorMatrix> {
    let sp = Space::Spin(space);
    if tag.is_collective() {
        if site.is_some() {
            return Err(Error::InvalidTag {
                tag: tag.to_string(),
                reason: "collective operators take no site".into(),
            });
        }
        let m = match space.rep() {
            SpinRep::Collective => {
                let n = space.n_qubits();
                let raw = match tag {
                    OperatorTag::TotalSPlus => collective_ladder(n, true),
                    OperatorTag::TotalSMinus => collective_ladder(n, false),
                    OperatorTag::TotalSx => {
                        let m = &collective_ladder(n, true) + &collective_ladder(n, false);
                        m.mapv(|x| x * 0.5)
                    }
                    OperatorTag::TotalSz => {
                        let j = space.j();
                        Array2::from_diag(&ndarray::Array1::from_iter(
                            (0..space.dim()).map(|idx| j - idx as f64),
                        ))
                    }
                    _ => unreachable!(),
                };
                raw.mapv(|x| C64::new(x, 0.0))
            }
            SpinRep::FullTensor => {
                let site_tag = match tag {
                    OperatorTag::TotalSx => OperatorTag::Sx,
                    OperatorTag::TotalSz => OperatorTag::Sz,
                    OperatorTag::TotalSPlus => OperatorTag::SPlus,
                    OperatorTag::TotalSMinus => OperatorTag::SMinus,
                    _ => unreachable!(),
                };
                let s = site_matrix(site_tag);
                let d = space.dim();
                let mut total = Array2::<C64>::zeros((d, d));
                for k in 1..=space.n_qubits() {
                    total = total + embed_site(space.n_qubits(), k, &s);
                }
                total
            }
        };
        return OperatorMatrix::new(sp, m);
    }

    if tag.is_single_site() {
        let n = space.n_qubits();
        if space.rep() == SpinRep::Collective && n > 1 {
            return Err(Error::InvalidTag {
                tag: tag.to_string(),
                reason: "single-site operators need the full tensor representation".into(),
            });
        }
        let site = site.unwrap_or(1);
        if site < 1 || site > n {
            return Err(Error::SiteOutOfRange { site, n_qubits: n });
        }
        let m = if n == 1 {
            site_matrix(tag)
        } else {
            embed_site(n, site, &site_matrix(tag))
        };
        return OperatorMatrix::new(sp, m);
    }

    Err(Error::InvalidTag { tag: tag.to_string(), reason: "not a spin operator".into() })
}

/// Lift a factor-space operator into the product space (spin ⊗ fock).
pub fn embed(op: &OperatorMatrix, into: ProductSpace, slot: Slot) -> Result<OperatorMatrix> {
    let expected = match slot {
        Slot::Spin => Space::Spin(into.spin),
        Slot::Fock => Space::Fock(into.fock),
    };
    if op.space() != expected {
        return Err(Error::SpaceMismatch);
    }
    let m = match slot {
        Slot::Spin => kron(op.entries(), &Array2::<C64>::eye(into.fock.dim())),
        Slot::Fock => kron(&Array2::<C64>::eye(into.spin.dim()), op.entries()),
    };
    OperatorMatrix::new(Space::Product(into), m)
}

/// Diagonal projector onto the product-space states with Fock occupation ≤ k.
///
/// Used to excise the truncation edge: operator products that pass through
/// occupations above `k` are exactly the ones whose matrix elements the hard
/// truncation corrupts.
pub fn projector_below(space: ProductSpace, k: usize) -> Result<OperatorMatrix> {
    if k > space.fock.n_max() {
        return Err(Error::InvalidParameter(format!(
            "projector cutoff {k} exceeds n_max {}",
            space.fock.n_max()
        )));
    }
    let nf = space.fock.dim();
    let mut m = Array2::<C64>::zeros((space.dim(), space.dim()));
    for s in 0..space.spin.dim() {
        for n in 0..=k {
            let idx = s * nf + n;
            m[(idx, idx)] = C64::new(1.0, 0.0);
        }
    }
    OperatorMatrix::new(Space::Product(space), m)
}

/// Scale-free commutation test: ‖P [A, B] P‖_F / (‖A‖_F ‖B‖_F), with the
/// optional projector P applied to the commutator before taking the norm.
/// Returns 0 when either operand vanishes.
pub fn commutator_residual(
    a: &OperatorMatrix,
    b: &OperatorMatrix,
    projector: Option<&OperatorMatrix>,
) -> Result<f64> {
    if a.space() != b.space() {
        return Err(Error::SpaceMismatch);
    }
    if let Some(p) = projector {
        if p.space() != a.space() {
            return Err(Error::SpaceMismatch);
        }
    }
    let na = a.frobenius();
    let nb = b.frobenius();
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    let mut c = a.commutator(b);
    if let Some(p) = projector {
        c = c.projected(p);
    }
    Ok(c.frobenius() / (na * nb))
}
