//! Dense complex matrices and state vectors.
//!
//! Everything in the crate (operators, bases, density matrices) is carried as a
//! [`ComplexMatrix`]. The JSON form is a row-major nested array whose entries
//! are `[re, im]` pairs.

mod expm;
mod logm;

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{config, Error, Result};

pub use expm::{exp_i_hermitian, mat_exp};
pub use logm::matrix_log_unitary;

pub type C64 = num_complex::Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    data: DMatrix<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{}", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            let row: Vec<String> = (0..self.cols())
                .map(|j| {
                    let z = self.data[(i, j)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { data: DMatrix::zeros(rows, cols) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { data: DMatrix::identity(dim, dim) }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self { data: DMatrix::from_fn(rows, cols, f) }
    }

    pub fn from_dmatrix(data: DMatrix<C64>) -> Self {
        Self { data }
    }

    /// Builds a matrix from rows, rejecting ragged or non-finite input.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::InvalidInput("matrix has no rows".into()));
        }
        let cols = rows[0].len();
        if cols == 0 {
            return Err(Error::InvalidInput("matrix has no columns".into()));
        }
        if rows.iter().any(|row| row.len() != cols) {
            return Err(Error::InvalidInput("ragged matrix rows".into()));
        }
        if rows.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        Ok(Self::from_fn(r, cols, |i, j| rows[i][j]))
    }

    /// Convenience for real-valued literals.
    pub fn from_real(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let cols = rows.first().map_or(0, |row| row.len());
        Self::from_fn(r, cols, |i, j| c(rows[i][j], 0.0))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { ZERO })
    }

    pub fn from_columns(cols: &[StateVector]) -> Result<Self> {
        let Some(first) = cols.first() else {
            return Err(Error::InvalidInput("no columns".into()));
        };
        let rows = first.dim();
        if cols.iter().any(|v| v.dim() != rows) {
            return Err(Error::DimensionMismatch("columns of unequal length".into()));
        }
        Ok(Self::from_fn(rows, cols.len(), |i, j| cols[j].amps[i]))
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.data
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        self.data[(i, j)] = z;
    }

    pub fn column(&self, j: usize) -> StateVector {
        StateVector { amps: self.data.column(j).into_owned() }
    }

    /// Columns `start..start+len`.
    pub fn columns(&self, start: usize, len: usize) -> ComplexMatrix {
        Self { data: self.data.columns(start, len).into_owned() }
    }

    /// Square sub-block `[r0..r0+rows, c0..c0+cols]`.
    pub fn view(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> ComplexMatrix {
        Self { data: self.data.view((r0, c0), (rows, cols)).into_owned() }
    }

    pub fn dagger(&self) -> ComplexMatrix {
        Self { data: self.data.adjoint() }
    }

    pub fn transpose(&self) -> ComplexMatrix {
        Self { data: self.data.transpose() }
    }

    pub fn trace(&self) -> C64 {
        self.data.diagonal().iter().sum()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        self.data.diagonal().iter().copied().collect()
    }

    pub fn scale(&self, z: C64) -> ComplexMatrix {
        Self { data: &self.data * z }
    }

    pub fn scale_real(&self, x: f64) -> ComplexMatrix {
        self.scale(c(x, 0.0))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        (0..self.cols()).map(|j| self.data.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `max |A - A†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `max |U†U - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (&self.dagger() * self).sub_identity().max_abs()
    }

    /// Hermitian part `(A + A†)/2`.
    pub fn hermitian_part(&self) -> ComplexMatrix {
        (self + &self.dagger()).scale_real(0.5)
    }

    fn sub_identity(mut self) -> ComplexMatrix {
        for i in 0..self.rows().min(self.cols()) {
            self.data[(i, i)] -= ONE;
        }
        self
    }

    /// Removes `Tr(A)/d` times the identity.
    pub fn traceless(&self) -> ComplexMatrix {
        let d = self.rows();
        let t = self.trace() / d as f64;
        let mut out = self.clone();
        for i in 0..d {
            out.data[(i, i)] -= t;
        }
        out
    }

    pub fn mul_vec(&self, v: &StateVector) -> Result<StateVector> {
        if self.cols() != v.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix applied to vector of length {}",
                self.rows(),
                self.cols(),
                v.dim()
            )));
        }
        Ok(StateVector { amps: &self.data * &v.amps })
    }

    /// Checked product.
    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols() != other.rows() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Ok(self * other)
    }

    pub fn max_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows(), self.cols()), (other.rows(), other.cols()));
        self.data.iter().zip(other.data.iter()).fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn entries(&self) -> impl Iterator<Item = &C64> {
        self.data.iter()
    }
}

fn ensure_same_shape(a: &ComplexMatrix, b: &ComplexMatrix, what: &str) -> Result<()> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::DimensionMismatch(format!(
            "{what}: {}x{} vs {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(())
}

fn ensure_square_pair(a: &ComplexMatrix, b: &ComplexMatrix, what: &str) -> Result<()> {
    ensure_same_shape(a, b, what)?;
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!("{what}: operands must be square")));
    }
    Ok(())
}

/// Tensor product `A ⊗ B`. Fails when the product dimension is above the cap.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let rows = a.rows().checked_mul(b.rows());
    let cols = a.cols().checked_mul(b.cols());
    match (rows, cols) {
        (Some(r), Some(c)) => {
            config::check_dim(r.max(c))?;
        }
        _ => {
            return Err(Error::ResourceLimit { requested: usize::MAX, cap: config::dim_cap() });
        }
    }
    Ok(ComplexMatrix { data: a.data.kronecker(&b.data) })
}

/// `AB - BA`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    ensure_square_pair(a, b, "commutator")?;
    Ok(&(a * b) - &(b * a))
}

/// `AB + BA`.
pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    ensure_square_pair(a, b, "anticommutator")?;
    Ok(&(a * b) + &(b * a))
}

/// Hilbert-Schmidt inner product `Tr(A†B)`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    ensure_same_shape(a, b, "hs_inner")?;
    Ok(a.data.iter().zip(b.data.iter()).map(|(x, y)| x.conj() * y).sum())
}

/// `d(U, V) = sqrt(1 - Re Tr(U†V) / d)`.
///
/// Evaluated as `‖U − V‖_F / sqrt(2d)`, which is the same number for unitary
/// inputs but keeps full relative accuracy when `U ≈ V`.
pub fn trace_distance(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<f64> {
    ensure_square_pair(u, v, "trace_distance")?;
    let d = u.rows() as f64;
    Ok((u - v).frobenius_norm() / (2.0 * d).sqrt())
}

/// [`trace_distance`] minimized over a global phase on `V`:
/// `sqrt(1 - |Tr(U†V)| / d)` for unitaries.
pub fn phase_free_distance(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<f64> {
    ensure_square_pair(u, v, "phase_free_distance")?;
    let overlap = hs_inner(u, v)?;
    let phase = if overlap.norm() > 0.0 { overlap.conj() / overlap.norm() } else { ONE };
    trace_distance(u, &v.scale(phase))
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix { data: &self.data $op &rhs.data }
            }
        }
        impl $trait<ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;
            fn $method(self, rhs: ComplexMatrix) -> ComplexMatrix {
                ComplexMatrix { data: self.data $op rhs.data }
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        self.data += &rhs.data;
    }
}

impl SubAssign<&ComplexMatrix> for ComplexMatrix {
    fn sub_assign(&mut self, rhs: &ComplexMatrix) {
        self.data -= &rhs.data;
    }
}

impl Mul<C64> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: C64) -> ComplexMatrix {
        self.scale(rhs)
    }
}

impl Mul<f64> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: f64) -> ComplexMatrix {
        self.scale_real(rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix { data: -&self.data }
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> =
            (0..self.rows()).map(|i| (0..self.cols()).map(|j| pair(self.get(i, j))).collect()).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let rows: Vec<Vec<C64>> = rows.into_iter().map(|r| r.into_iter().map(|[re, im]| c(re, im)).collect()).collect();
        ComplexMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

#[inline]
fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

/// A ket in `C^dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: DVector<C64>,
}

impl StateVector {
    pub fn new(amps: Vec<C64>) -> Self {
        Self { amps: DVector::from_vec(amps) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { amps: DVector::zeros(dim) }
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.amps[index] = ONE;
        v
    }

    pub fn from_dvector(amps: DVector<C64>) -> Self {
        Self { amps }
    }

    pub fn as_dvector(&self) -> &DVector<C64> {
        &self.amps
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    #[inline]
    pub fn amp(&self, i: usize) -> C64 {
        self.amps[i]
    }

    pub fn amps(&self) -> &[C64] {
        self.amps.as_slice()
    }

    pub fn amps_mut(&mut self) -> &mut [C64] {
        self.amps.as_mut_slice()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n < 1e-300 {
            return Err(Error::InvalidInput("cannot normalize a zero vector".into()));
        }
        Ok(Self { amps: &self.amps / c(n, 0.0) })
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= 1e-12
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(other.amps.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn scale(&self, z: C64) -> Self {
        Self { amps: &self.amps * z }
    }

    pub fn add(&self, other: &StateVector) -> Self {
        Self { amps: &self.amps + &other.amps }
    }

    pub fn sub(&self, other: &StateVector) -> Self {
        Self { amps: &self.amps - &other.amps }
    }

    pub fn max_diff(&self, other: &StateVector) -> f64 {
        self.amps.iter().zip(other.amps.iter()).fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn kron(&self, other: &StateVector) -> Self {
        let (da, db) = (self.dim(), other.dim());
        let mut out = DVector::zeros(da * db);
        for i in 0..da {
            for j in 0..db {
                out[i * db + j] = self.amps[i] * other.amps[j];
            }
        }
        Self { amps: out }
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix { data: &self.amps * self.amps.adjoint() }
    }

    pub fn as_column(&self) -> ComplexMatrix {
        ComplexMatrix { data: DMatrix::from_column_slice(self.dim(), 1, self.amps.as_slice()) }
    }
}

impl Serialize for StateVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<[f64; 2]> = self.amps.iter().map(|&z| pair(z)).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<[f64; 2]> = Vec::deserialize(d)?;
        if v.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(serde::de::Error::custom("non-finite amplitude"));
        }
        Ok(StateVector::new(v.into_iter().map(|[re, im]| c(re, im)).collect()))
    }
}

/// The three Pauli matrices and the identity, in the `{|0⟩, |1⟩}` basis.
pub mod pauli {
    use super::*;

    pub fn id() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![ZERO, -I], vec![I, ZERO]]).expect("literal")
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real(&[&[1.0, 0.0], &[0.0, -1.0]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_identities() {
        let i4 = kron(&pauli::id(), &pauli::id()).unwrap();
        assert_eq!(i4, ComplexMatrix::identity(4));
        let zi = kron(&pauli::z(), &pauli::id()).unwrap();
        assert_eq!(zi, ComplexMatrix::from_diagonal(&[ONE, ONE, -ONE, -ONE]));
    }

    #[test]
    fn kron_xx_flips_both_bits() {
        let xx = kron(&pauli::x(), &pauli::x()).unwrap();
        let out = xx.mul_vec(&StateVector::basis(4, 0)).unwrap();
        assert_eq!(out, StateVector::basis(4, 3));
    }

    #[test]
    fn kron_respects_cap() {
        crate::config::set_dim_cap(crate::config::DEFAULT_DIM_CAP);
        let big = ComplexMatrix::identity(128);
        assert!(matches!(kron(&big, &big), Err(Error::ResourceLimit { .. })));
    }

    #[test]
    fn pauli_commutators() {
        let xy = commutator(&pauli::x(), &pauli::y()).unwrap();
        assert!(xy.max_diff(&pauli::z().scale(c(0.0, 2.0))) < 1e-15);
        let a = pauli::x();
        assert_eq!(commutator(&a, &a).unwrap().max_abs(), 0.0);
        assert!(commutator(&a, &ComplexMatrix::identity(3)).is_err());
    }

    #[test]
    fn hs_inner_examples() {
        assert_eq!(hs_inner(&pauli::id(), &pauli::z()).unwrap(), ZERO);
        assert_eq!(hs_inner(&pauli::x(), &pauli::x()).unwrap(), c(2.0, 0.0));
        assert!(hs_inner(&pauli::x(), &ComplexMatrix::identity(3)).is_err());
    }

    #[test]
    fn trace_distance_examples() {
        let u = pauli::y();
        assert_eq!(trace_distance(&u, &u).unwrap(), 0.0);
        let ix = pauli::x().scale(I);
        assert!((trace_distance(&pauli::id(), &ix).unwrap() - 1.0).abs() < 1e-15);
        assert!(trace_distance(&u, &ComplexMatrix::identity(4)).is_err());
        assert!(phase_free_distance(&pauli::id(), &pauli::id().scale(I)).unwrap() < 1e-15);
        assert!((phase_free_distance(&pauli::id(), &ix).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let m = pauli::y();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[[0.0,0.0],[-0.0,-1.0]],[[0.0,1.0],[0.0,0.0]]]");
        let back: ComplexMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<ComplexMatrix>("[[[1,0]],[[1,0],[2,0]]]").is_err());
    }
}
