use std::f64::consts::PI;

use nalgebra::Schur;

use super::{ComplexMatrix, C64};
use crate::{Error, Result};

const UNITARY_TOL: f64 = 1e-9;

/// Hermitian `H` with `e^{iH} = U`, eigenphases on the principal branch `(-π, π]`.
pub fn matrix_log_unitary(u: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !u.is_square() {
        return Err(Error::DimensionMismatch("matrix_log_unitary needs a square matrix".into()));
    }
    let defect = u.unitarity_defect();
    if defect > UNITARY_TOL {
        return Err(Error::NotUnitary(defect));
    }
    let n = u.rows();
    let schur = Schur::try_new(u.as_dmatrix().clone(), 1e-15, 100_000)
        .ok_or_else(|| Error::NonConvergence("complex Schur decomposition".into()))?;
    let (q, t) = schur.unpack();
    // A normal matrix has a diagonal Schur form; the off-diagonal residue is roundoff.
    let phases: Vec<f64> = (0..n).map(|k| principal_phase(t[(k, k)])).collect();
    let mut qd = q.clone();
    for (j, &phi) in phases.iter().enumerate() {
        for i in 0..n {
            qd[(i, j)] *= phi;
        }
    }
    let h = ComplexMatrix::from_dmatrix(qd * q.adjoint());
    Ok(h.hermitian_part())
}

fn principal_phase(z: C64) -> f64 {
    let phi = z.im.atan2(z.re);
    if phi <= -PI {
        phi + 2.0 * PI
    } else {
        phi
    }
}
