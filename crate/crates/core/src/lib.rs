//! Numerical laboratory for light-matter models of the Rabi/Dicke family.
//!
//! The crate builds exact matrix representations of bosonic and spin operators
//! on truncated Hilbert spaces ([`space`]), assembles the standard model
//! Hamiltonians and their symmetry operators ([`models`]), verifies the
//! Yang-Baxter / RTT machinery that makes the degenerate points integrable and
//! extracts the conserved charges it produces ([`yang_baxter`]), and measures
//! spectral statistics that separate integrable from chaotic parameter regions
//! ([`spectra`]).
//!
//! Everything works on finite truncations, so each check carries an explicit
//! notion of where truncation artifacts live (the top of the Fock ladder) and
//! how they are excised (projection below a buffer).

// ndarray's cblas symbols only link when some crate references the native
// library; this anchor keeps the system OpenBLAS in the link line even for
// binaries that never name an ndarray-linalg routine.
extern crate openblas_src as _;

pub mod error;
pub mod linalg;
pub mod models;
pub mod report;
pub mod space;
pub mod spectra;
pub mod yang_baxter;

pub use error::{Error, Result};
pub use models::{
    hamiltonian, symmetry_operator, ModelKind, ModelParams, SymmetryKind, SymmetryOperator,
};
pub use report::VerificationReport;
pub use space::{
    boson_op, commutator_residual, embed, projector_below, spin_op, FockSpace, OperatorMatrix,
    OperatorTag, ProductSpace, Slot, Space, SpinRep, SpinSpace,
};
pub use spectra::{
    diagonalize, diagonalize_with, gap_ratios, nnsd_histogram, reference_ensembles,
    split_parity_sectors, split_parity_sectors_with, sweep_stats, unfold_levels,
    ConvergenceOptions,
    EnsembleKind, Histogram, HistogramOptions, LevelStats, SectorPolicy, Spectrum, StatsOptions,
    SweepPoint, SweepRow, GOE_SURMISE_RATIO, POISSON_MEAN_RATIO,
};
pub use yang_baxter::{
    charge_search_probe, check_rtt, check_tau_identity, check_ybe, extract_charges, l_boson,
    l_spin, monodromy, r_matrix, transfer_matrix, twist_boson, twist_spin, AnsatzOp, AuxMatrix,
    AuxPolynomial, Charge, ChargeSet, Exclusion, IntegrablePoint, Monodromy, OperatorPolynomial,
    ProbeConfig, ProbeSample, RMatrix, RttCheck, SpectralParams, TwistModel,
};
