//! Seeded sampling helpers. Every random draw in the crate goes through a
//! `ChaCha8Rng` so runs are reproducible from a single `u64` seed.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matrix::{c, ComplexMatrix, StateVector, C64};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `index` derived from `seed`.
pub fn stream(seed: u64, index: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) / 2f64.sqrt()
}

/// Uniform in the closed unit disc.
pub fn complex_disc<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let r = rng.random::<f64>().sqrt();
    let phi = rng.random::<f64>() * std::f64::consts::TAU;
    C64::from_polar(r, phi)
}

/// Haar-random pure state.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> StateVector {
    let v = StateVector::new((0..dim).map(|_| gaussian_complex(rng)).collect());
    let norm = v.norm();
    v.scale(c(1.0 / norm, 0.0))
}

/// Haar-random unitary via QR of a Ginibre matrix with phase-fixed `R`.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let g = DMatrix::from_fn(dim, dim, |_, _| gaussian_complex(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    ComplexMatrix::from_dmatrix(q)
}

/// Haar-random element of `SU(d)`.
pub fn haar_special_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let u = haar_unitary(rng, dim);
    let det = u.as_dmatrix().determinant();
    let fix = C64::from_polar(1.0, -det.arg() / dim as f64);
    u.scale(fix)
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| gaussian_complex(rng));
    (&g + &g.dagger()).scale_real(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible() {
        let a = haar_unitary(&mut seeded(7), 4);
        let b = haar_unitary(&mut seeded(7), 4);
        assert_eq!(a, b);
    }

    #[test]
    fn unitary_and_special() {
        let mut rng = seeded(1);
        for d in [1, 2, 3, 8] {
            let u = haar_special_unitary(&mut rng, d);
            assert!(u.unitarity_defect() < 1e-12);
            assert!((u.as_dmatrix().determinant() - c(1.0, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn disc_samples_stay_inside() {
        let mut rng = seeded(3);
        assert!((0..1000).all(|_| complex_disc(&mut rng).norm() <= 1.0));
        assert!(random_state(&mut rng, 16).is_normalized());
    }
}
