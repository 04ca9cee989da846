//! Thin wrappers over the LAPACK-backed dense eigensolvers.
//!
//! Every Hamiltonian in this crate is real symmetric in the computational
//! basis, so the wrappers detect that and route to the real solver (`dsyev`
//! family), which is roughly twice as fast as the complex one at the
//! dimensions the acceptance runs use.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};

use crate::error::{Error, Result};
use crate::space::OperatorMatrix;

/// Relative asymmetry above which a matrix is rejected as non-Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Entries with |Im| below this (relative to the largest entry) are treated
/// as real so the real solver can be used.
const REAL_TOL: f64 = 1e-14;

/// Eigenvalues of a Hermitian operator, ascending.
pub fn hermitian_eigenvalues(op: &OperatorMatrix) -> Result<Vec<f64>> {
    let defect = op.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian { defect });
    }
    let scale = op.max_abs();
    if scale == 0.0 {
        return Ok(vec![0.0; op.dim()]);
    }
    if op.max_imag() <= REAL_TOL * scale {
        let (vals, _) = symmetrize(&op.real_entries()).eigh(UPLO::Lower)?;
        Ok(vals.to_vec())
    } else {
        let sym = op.hermitian_part();
        let (vals, _) = sym.entries().eigh(UPLO::Lower)?;
        Ok(vals.to_vec())
    }
}

/// Full eigensystem of a real symmetric matrix: ascending eigenvalues and
/// the matrix whose columns are the eigenvectors.
pub fn eigh_real(a: &Array2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    let (vals, vecs) = symmetrize(a).eigh(UPLO::Lower)?;
    Ok((vals.to_vec(), vecs))
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn eigvalsh_real(a: &Array2<f64>) -> Result<Vec<f64>> {
    let (vals, _) = symmetrize(a).eigh(UPLO::Lower)?;
    Ok(vals.to_vec())
}

fn symmetrize(a: &Array2<f64>) -> Array2<f64> {
    let mut s = a.clone();
    s += &a.t();
    s *= 0.5;
    s
}

/// Eigenvalues of a diagonal operator read straight off the diagonal
/// (used for parity, which is diagonal in the computational basis).
pub fn diagonal_real(op: &OperatorMatrix) -> Option<Array1<f64>> {
    let scale = op.max_abs();
    let mut off: f64 = 0.0;
    for ((i, j), z) in op.entries().indexed_iter() {
        if i != j {
            off = off.max(z.norm());
        }
    }
    if scale > 0.0 && off > REAL_TOL * scale {
        return None;
    }
    Some(Array1::from_iter(op.entries().diag().iter().map(|z| z.re)))
}
