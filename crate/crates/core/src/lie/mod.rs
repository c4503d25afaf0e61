//! Block restriction, real Lie-algebra closure and independence
//! certificates for encoded universality.
//!
//! All algebra is carried on the commutant side: one `n_J × n_J` matrix per
//! block. Closure works with anti-Hermitian traceless representatives and
//! real coefficients, using the real Hilbert-Schmidt inner product
//! `Re Tr(A†B)` summed over blocks.

mod boundary;
mod identities;

pub use boundary::{boundary_exchange_check, boundary_exchange_sweep, BoundaryReport};
pub use identities::{constructive_identities, IdentityCheck, IdentityReport};

use nalgebra::DVector;
use serde::Serialize;

use crate::basis::{DfsBlock, Model};
use crate::matrix::{c, commutator, mat_exp, ComplexMatrix, ZERO};
use crate::operators::{build, OperatorKind};
use crate::par::{self, ExecMode};
use crate::stabilizer::restrict_with_leakage;
use crate::{Error, Result};

/// Leakage and commutant-factor tolerance for restriction.
pub const RESTRICT_TOL: f64 = 1e-9;
/// Residual norm above which a candidate enters the closure basis.
pub const ADMIT_TOL: f64 = 1e-8;
/// Membership residual for independence certificates.
pub const MEMBERSHIP_TOL: f64 = 1e-8;

/// One operator as a list of commutant-side block matrices.
#[derive(Clone, Debug, Serialize)]
pub struct BlockRestricted {
    pub two_js: Vec<i64>,
    pub blocks: Vec<ComplexMatrix>,
    /// Largest `‖(I − BB†)(op)B‖_max` over the blocks.
    pub leakage: f64,
    /// Largest deviation from the `C ⊗ I_{d_J}` form.
    pub factor_deviation: f64,
}

impl BlockRestricted {
    pub fn block(&self, two_j: i64) -> Option<&ComplexMatrix> {
        self.two_js.iter().position(|&t| t == two_j).map(|k| &self.blocks[k])
    }
}

/// `B†(op)B` per block with the `I_{d_J}` factor checked and stripped.
/// Never fails on leakage; see [`restrict`].
pub fn restrict_unchecked(op: &ComplexMatrix, blocks: &[DfsBlock]) -> Result<BlockRestricted> {
    let mut out = BlockRestricted {
        two_js: Vec::with_capacity(blocks.len()),
        blocks: Vec::with_capacity(blocks.len()),
        leakage: 0.0,
        factor_deviation: 0.0,
    };
    for b in blocks {
        let (r, leak) = restrict_with_leakage(b, op)?;
        let d = b.d_j;
        let mut factor = ComplexMatrix::zeros(b.n_j, b.n_j);
        for x in 0..b.n_j {
            for y in 0..b.n_j {
                let sub = r.view(x * d, y * d, d, d);
                let cxy = sub.trace() / d as f64;
                factor.set(x, y, cxy);
                let dev = sub.max_diff(&ComplexMatrix::identity(d).scale(cxy));
                out.factor_deviation = out.factor_deviation.max(dev);
            }
        }
        out.two_js.push(b.two_j);
        out.blocks.push(factor);
        out.leakage = out.leakage.max(leak);
    }
    Ok(out)
}

/// As [`restrict_unchecked`], failing when the operator leaves a block or
/// acts on the noise-exposed factor.
pub fn restrict(op: &ComplexMatrix, blocks: &[DfsBlock]) -> Result<BlockRestricted> {
    let r = restrict_unchecked(op, blocks)?;
    let worst = r.leakage.max(r.factor_deviation);
    if worst > RESTRICT_TOL {
        return Err(Error::Leakage { leakage: worst, tol: RESTRICT_TOL });
    }
    Ok(r)
}

/// Element of a block-diagonal real Lie algebra.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LieElement {
    pub blocks: Vec<ComplexMatrix>,
}

impl LieElement {
    pub fn zeros(sizes: &[usize]) -> Self {
        Self { blocks: sizes.iter().map(|&d| ComplexMatrix::zeros(d, d)).collect() }
    }

    /// `i·H` with the trace removed per block.
    pub fn from_hermitian(h: &BlockRestricted) -> Self {
        Self { blocks: h.blocks.iter().map(|m| m.scale(c(0.0, 1.0)).traceless()).collect() }
    }

    /// `−i·A`, the Hermitian operator this element generates.
    pub fn hamiltonian(&self) -> Vec<ComplexMatrix> {
        self.blocks.iter().map(|m| m.scale(c(0.0, -1.0))).collect()
    }

    pub fn commutator(&self, other: &LieElement) -> Result<LieElement> {
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| if a.rows() == 0 { Ok(a.clone()) } else { commutator(a, b) })
            .collect::<Result<_>>()?;
        Ok(LieElement { blocks })
    }

    pub fn scale_real(&self, x: f64) -> LieElement {
        LieElement { blocks: self.blocks.iter().map(|m| m.scale_real(x)).collect() }
    }

    pub fn add(&self, other: &LieElement) -> LieElement {
        LieElement { blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a + b).collect() }
    }

    /// Real coordinates: per block, row-major `(re, im)` pairs.
    pub fn to_real(&self) -> DVector<f64> {
        let len: usize = self.blocks.iter().map(|m| 2 * m.rows() * m.cols()).sum();
        let mut v = DVector::zeros(len);
        let mut k = 0;
        for m in &self.blocks {
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    let z = m.get(i, j);
                    v[k] = z.re;
                    v[k + 1] = z.im;
                    k += 2;
                }
            }
        }
        v
    }

    pub fn from_real(sizes: &[usize], v: &DVector<f64>) -> Self {
        let mut k = 0;
        let blocks = sizes
            .iter()
            .map(|&d| {
                ComplexMatrix::from_fn(d, d, |_, _| {
                    let z = c(v[k], v[k + 1]);
                    k += 2;
                    z
                })
            })
            .collect();
        Self { blocks }
    }
}

/// Orthonormal basis of a generated real Lie algebra.
#[derive(Clone, Debug, Serialize)]
pub struct LieBasis {
    pub two_js: Vec<i64>,
    pub sizes: Vec<usize>,
    pub elements: Vec<LieElement>,
    #[serde(skip)]
    vectors: Vec<DVector<f64>>,
    pub tol: f64,
}

impl LieBasis {
    pub fn new(two_js: Vec<i64>, sizes: Vec<usize>, tol: f64) -> Self {
        Self { two_js, sizes, elements: Vec::new(), vectors: Vec::new(), tol }
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    /// Largest possible dimension, `Σ (n_J² − 1)`.
    pub fn max_dim(&self) -> usize {
        self.sizes.iter().map(|&d| (d * d).saturating_sub(1)).sum()
    }

    fn project_out(&self, mut v: DVector<f64>) -> DVector<f64> {
        // twice for numerical orthogonality
        for _ in 0..2 {
            for e in &self.vectors {
                let coef = e.dot(&v);
                v.axpy(-coef, e, 1.0);
            }
        }
        v
    }

    /// Norm of the part of `x` outside the span.
    pub fn residual(&self, x: &LieElement) -> f64 {
        self.project_out(x.to_real()).norm()
    }

    /// Adds `x` if its residual exceeds the tolerance. Returns whether it did.
    pub fn admit(&mut self, x: &LieElement) -> bool {
        let r = self.project_out(x.to_real());
        let norm = r.norm();
        if norm <= self.tol {
            return false;
        }
        let unit = r / norm;
        self.elements.push(LieElement::from_real(&self.sizes, &unit));
        self.vectors.push(unit);
        true
    }

    /// Rank of the basis projected onto one block.
    pub fn block_dim(&self, block: usize) -> usize {
        let offset: usize = self.sizes[..block].iter().map(|&d| 2 * d * d).sum();
        let width = 2 * self.sizes[block] * self.sizes[block];
        if width == 0 || self.vectors.is_empty() {
            return 0;
        }
        let m = nalgebra::DMatrix::from_fn(self.vectors.len(), width, |i, j| self.vectors[i][offset + j]);
        let sv = m.svd(false, false).singular_values;
        sv.iter().filter(|&&s| s > MEMBERSHIP_TOL).count()
    }

    /// Largest `|⟨e_i, e_j⟩ − δ_ij|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.vectors.iter().enumerate() {
            for (j, b) in self.vectors.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.dot(b) - want).abs());
            }
        }
        worst
    }
}

/// Breadth-first closure of `seeds` under commutators.
pub fn close_elements(
    two_js: Vec<i64>,
    sizes: Vec<usize>,
    seeds: &[LieElement],
    tol: f64,
    mode: ExecMode,
) -> Result<LieBasis> {
    let mut basis = LieBasis::new(two_js, sizes, tol);
    let cap = basis.max_dim();
    for s in seeds {
        basis.admit(s);
    }
    let mut done = 0;
    while done < basis.dim() && basis.dim() < cap {
        let frontier = basis.dim();
        let pairs: Vec<(usize, usize)> = (done..frontier).flat_map(|k| (0..k).map(move |j| (j, k))).collect();
        let elems = &basis.elements;
        let comms = par::try_map(mode, &pairs, |&(j, k)| elems[j].commutator(&elems[k]))?;
        for x in &comms {
            if basis.dim() >= cap {
                break;
            }
            basis.admit(x);
        }
        if basis.dim() > cap {
            return Err(Error::ResourceLimit { requested: basis.dim(), cap });
        }
        done = frontier;
    }
    Ok(basis)
}

/// Real Lie closure of Hermitian block-restricted generators.
pub fn lie_closure(generators: &[BlockRestricted], tol: f64, mode: ExecMode) -> Result<LieBasis> {
    let first = generators.first().ok_or_else(|| Error::InvalidInput("closure needs at least one generator".into()))?;
    let sizes: Vec<usize> = first.blocks.iter().map(|m| m.rows()).collect();
    for g in generators {
        if g.two_js != first.two_js {
            return Err(Error::DimensionMismatch("generators restricted to different blocks".into()));
        }
        if g.leakage > RESTRICT_TOL || g.factor_deviation > RESTRICT_TOL {
            return Err(Error::Leakage { leakage: g.leakage.max(g.factor_deviation), tol: RESTRICT_TOL });
        }
    }
    let seeds: Vec<LieElement> = generators.iter().map(LieElement::from_hermitian).collect();
    close_elements(first.two_js.clone(), sizes, &seeds, tol, mode)
}

/// Orthonormal generalized Gell-Mann basis of `su(d)`, anti-Hermitian form.
pub fn su_basis(d: usize) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(d * d - 1);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..d {
        for k in (j + 1)..d {
            let mut sym = ComplexMatrix::zeros(d, d);
            sym.set(j, k, c(0.0, h));
            sym.set(k, j, c(0.0, h));
            out.push(sym);
            let mut anti = ComplexMatrix::zeros(d, d);
            anti.set(j, k, c(h, 0.0));
            anti.set(k, j, c(-h, 0.0));
            out.push(anti);
        }
    }
    for l in 1..d {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut diag = vec![ZERO; d];
        for z in diag.iter_mut().take(l) {
            *z = c(0.0, norm);
        }
        diag[l] = c(0.0, -(l as f64) * norm);
        out.push(ComplexMatrix::from_diagonal(&diag));
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockCertificate {
    #[serde(rename = "twoJ")]
    pub two_j: i64,
    pub n_j: usize,
    pub dim: usize,
    pub expected: usize,
    pub worst_residual: f64,
    pub independent: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct IndependenceReport {
    pub per_block: Vec<BlockCertificate>,
    pub total_dim: usize,
    pub pass: bool,
}

/// For every block, checks that each `su(n_J)` basis element supported on
/// that block alone lies in the span.
pub fn independence_certificate(basis: &LieBasis) -> IndependenceReport {
    let mut per_block = Vec::with_capacity(basis.sizes.len());
    for (bi, &d) in basis.sizes.iter().enumerate() {
        let mut worst: f64 = 0.0;
        for g in su_basis(d.max(1)).into_iter().take(if d > 1 { usize::MAX } else { 0 }) {
            let mut x = LieElement::zeros(&basis.sizes);
            x.blocks[bi] = g;
            worst = worst.max(basis.residual(&x));
        }
        let expected = (d * d).saturating_sub(1);
        let dim = basis.block_dim(bi);
        per_block.push(BlockCertificate {
            two_j: basis.two_js[bi],
            n_j: d,
            dim,
            expected,
            worst_residual: worst,
            independent: worst <= MEMBERSHIP_TOL,
        });
    }
    let pass = per_block.iter().all(|b| b.independent && b.dim == b.expected);
    IndependenceReport { per_block, total_dim: basis.dim(), pass }
}

/// `U H U†`.
pub fn conjugate_hamiltonian(u: &ComplexMatrix, h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let defect = u.unitarity_defect();
    if defect > 1e-9 {
        return Err(Error::NotUnitary(defect));
    }
    Ok(&(u * h) * &u.dagger())
}

/// `e^g` applied blockwise.
pub fn exp_element(g: &LieElement) -> Result<Vec<ComplexMatrix>> {
    g.blocks.iter().map(|m| if m.rows() == 0 { Ok(m.clone()) } else { mat_exp(m) }).collect()
}

/// Conjugates an element blockwise: `U x U†`.
pub fn conjugate_element(u: &[ComplexMatrix], x: &LieElement) -> Result<LieElement> {
    let blocks = u
        .iter()
        .zip(&x.blocks)
        .map(|(ub, xb)| if xb.rows() == 0 { Ok(xb.clone()) } else { conjugate_hamiltonian(ub, xb) })
        .collect::<Result<_>>()?;
    Ok(LieElement { blocks })
}

/// Weak-model generating set: `E_{i,i+1}, T^P_{i,i+1}, T^Q_{i,i+1}` and `Ā_{12}`.
pub fn weak_generator_set(n: usize) -> Vec<OperatorKind> {
    let mut out = Vec::new();
    for i in 1..n {
        out.push(OperatorKind::exchange(i, i + 1));
        out.push(OperatorKind::t_p(i, i + 1));
        out.push(OperatorKind::t_q(i, i + 1));
    }
    if n >= 2 {
        out.push(OperatorKind::z_bar_12());
    }
    out
}

/// Nearest-neighbour exchanges `E_{i,i+1}`.
pub fn nearest_neighbour_exchanges(n: usize) -> Vec<OperatorKind> {
    (1..n).map(|i| OperatorKind::exchange(i, i + 1)).collect()
}

pub fn default_generators(model: Model, n: usize) -> Vec<OperatorKind> {
    match model {
        Model::Weak => weak_generator_set(n),
        Model::Strong => nearest_neighbour_exchanges(n),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosureReport {
    pub model: Model,
    pub n: usize,
    pub generators: Vec<String>,
    pub per_block: Vec<BlockCertificate>,
    pub total_dim: usize,
    pub pass: bool,
}

/// Builds, restricts and closes a generator set over the given blocks.
pub fn closure_report(
    model: Model,
    n: usize,
    blocks: &[DfsBlock],
    generators: &[OperatorKind],
    tol: f64,
    mode: ExecMode,
) -> Result<ClosureReport> {
    let restricted = par::try_map(mode, generators, |k| restrict(&build(n, k)?, blocks))?;
    let basis = lie_closure(&restricted, tol, mode)?;
    let cert = independence_certificate(&basis);
    Ok(ClosureReport {
        model,
        n,
        generators: generators.iter().map(|k| k.label()).collect(),
        per_block: cert.per_block,
        total_dim: cert.total_dim,
        pass: cert.pass,
    })
}

/// Closure over every block of the model with its default generators.
pub fn universality_certificate(model: Model, n: usize, mode: ExecMode) -> Result<ClosureReport> {
    let blocks = crate::basis::all_blocks(model, n)?;
    closure_report(model, n, &blocks, &default_generators(model, n), ADMIT_TOL, mode)
}
