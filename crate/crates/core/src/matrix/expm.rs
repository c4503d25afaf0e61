use nalgebra::SymmetricEigen;

use super::{c, ComplexMatrix, C64};
use crate::{Error, Result};

// Padé(13) coefficients and the 1-norm bound below which no scaling is needed
// (Higham, "The scaling and squaring method for the matrix exponential revisited").
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Anti-Hermitian inputs within this relative tolerance take the spectral path.
const SKEW_TOL: f64 = 1e-13;

/// `e^A`.
///
/// Inputs of the form `i·(Hermitian)` are exponentiated through a Hermitian
/// eigendecomposition; everything else goes through Padé(13) with scaling and
/// squaring.
pub fn mat_exp(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("mat_exp needs a square matrix".into()));
    }
    if !a.is_finite() {
        return Err(Error::NonConvergence("non-finite input".into()));
    }
    let scale = a.max_abs().max(1.0);
    let skew = (a + &a.dagger()).max_abs();
    let out = if skew <= SKEW_TOL * scale {
        // A = iH with H = -iA
        let h = a.scale(c(0.0, -1.0));
        exp_i_hermitian(&h, 1.0)?
    } else {
        pade13(a)?
    };
    if !out.is_finite() {
        return Err(Error::NonConvergence("matrix exponential overflowed".into()));
    }
    Ok(out)
}

/// `e^{i t H}` for Hermitian `H` via its eigendecomposition.
pub fn exp_i_hermitian(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch("exp_i_hermitian needs a square matrix".into()));
    }
    let herm = h.hermitian_part();
    let eig = SymmetricEigen::try_new(herm.into_dmatrix(), 1e-15, 10_000)
        .ok_or_else(|| Error::NonConvergence("Hermitian eigensolver".into()))?;
    let q = &eig.eigenvectors;
    let phases: Vec<C64> = eig.eigenvalues.iter().map(|&l| C64::from_polar(1.0, t * l)).collect();
    let mut qd = q.clone();
    for (j, p) in phases.iter().enumerate() {
        for i in 0..qd.nrows() {
            qd[(i, j)] *= p;
        }
    }
    Ok(ComplexMatrix::from_dmatrix(qd * q.adjoint()))
}

fn pade13(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.rows();
    let norm = a.norm_1();
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = a.scale_real(0.5f64.powi(s));
    let id = ComplexMatrix::identity(n);
    let b = |k: usize| PADE13[k];

    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_inner = &(&(&a6 * b(13)) + &(&a4 * b(11))) + &(&a2 * b(9));
    let u_poly = &(&(&(&(&a6 * &u_inner) + &(&a6 * b(7))) + &(&a4 * b(5))) + &(&a2 * b(3))) + &(&id * b(1));
    let u = &a * &u_poly;

    let v_inner = &(&(&a6 * b(12)) + &(&a4 * b(10))) + &(&a2 * b(8));
    let v = &(&(&(&(&a6 * &v_inner) + &(&a6 * b(6))) + &(&a4 * b(4))) + &(&a2 * b(2))) + &(&id * b(0));

    let p = &v + &u;
    let q = &v - &u;
    let lu = q.into_dmatrix().lu();
    let mut r = lu
        .solve(p.as_dmatrix())
        .map(ComplexMatrix::from_dmatrix)
        .ok_or_else(|| Error::NonConvergence("singular Padé denominator".into()))?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::super::{pauli, I, ONE, ZERO};
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn exp_of_zero_is_identity() {
        let e = mat_exp(&ComplexMatrix::zeros(3, 3)).unwrap();
        assert!(e.max_diff(&ComplexMatrix::identity(3)) < 1e-15);
    }

    #[test]
    fn half_turn_about_x() {
        let e = mat_exp(&pauli::x().scale(c(0.0, PI / 2.0))).unwrap();
        assert!(e.max_diff(&pauli::x().scale(I)) < 1e-14);
    }

    #[test]
    fn phase_gate_from_sigma_z() {
        let theta = 0.731;
        let e = mat_exp(&pauli::z().scale(c(0.0, theta))).unwrap();
        let p = ComplexMatrix::from_diagonal(&[C64::from_polar(1.0, theta), C64::from_polar(1.0, -theta)]);
        assert!(e.max_diff(&p) < 1e-14);
    }

    #[test]
    fn pade_matches_spectral_path() {
        // Same Hermitian generator, once as iH (spectral) and once perturbed
        // off the anti-Hermitian set so Padé is taken, then compared to a
        // diagonal closed form.
        let d = [0.3, -1.7, 2.9, 5.5];
        let a = ComplexMatrix::from_diagonal(&[c(d[0], 0.1), c(d[1], 0.0), c(d[2], 0.0), c(d[3], -0.2)]);
        let e = pade13(&a).unwrap();
        for (k, z) in a.diagonal().iter().enumerate() {
            assert!((e.get(k, k) - z.exp()).norm() < 1e-10 * z.exp().norm().max(1.0));
        }
        let nilpotent = ComplexMatrix::from_rows(&[vec![ZERO, ONE], vec![ZERO, ZERO]]).unwrap();
        let e = mat_exp(&nilpotent.scale_real(40.0)).unwrap();
        assert!((e.get(0, 1) - c(40.0, 0.0)).norm() < 1e-9);
        assert!((e.get(0, 0) - ONE).norm() < 1e-12);
    }

    #[test]
    fn large_norm_is_scaled() {
        let h = pauli::x().scale_real(100.0);
        let spectral = exp_i_hermitian(&h, 1.0).unwrap();
        let pade = pade13(&h.scale(I)).unwrap();
        assert!(spectral.max_diff(&pade) < 1e-10);
    }
}
