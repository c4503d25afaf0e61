//! Membership conditions, the continuous stabilizer, and error-detection
//! checks for DFS blocks.

use serde::Serialize;

use crate::basis::{DfsBlock, Model};
use crate::matrix::{anticommutator, c, kron, mat_exp, ComplexMatrix, StateVector, C64, ZERO};
use crate::operators::{collective, embed_one, PauliAxis};
use crate::par::{self, ExecMode};
use crate::random;
use crate::{Error, Result};

/// Structural tolerance for block checks.
pub const STRUCTURE_TOL: f64 = 1e-9;
/// Tolerance for anticommutation tests.
pub const ANTICOMMUTE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct DfsConditionReport {
    /// `λ`-averaged `d_J × d_J` action of each operator.
    pub m: Vec<ComplexMatrix>,
    /// Largest entry of `B†(op)B − I ⊗ M`.
    pub deviation: f64,
    /// `‖(I − BB†)(op)B‖_max`.
    pub leakage: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutantReport {
    /// `n_J × n_J` factor `C` in `B†(op)B = C ⊗ I`.
    pub factor: ComplexMatrix,
    pub deviation: f64,
    pub leakage: f64,
    pub pass: bool,
}

fn check_operator(block: &DfsBlock, op: &ComplexMatrix) -> Result<()> {
    let dim = block.basis.rows();
    if !op.is_square() || op.rows() != dim {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}×{}, block lives in dimension {dim}",
            op.rows(),
            op.cols()
        )));
    }
    Ok(())
}

/// `(B†(op)B, ‖(op)B − B·B†(op)B‖_max)`.
pub fn restrict_with_leakage(block: &DfsBlock, op: &ComplexMatrix) -> Result<(ComplexMatrix, f64)> {
    check_operator(block, op)?;
    let ob = op * &block.basis;
    let r = &block.basis.dagger() * &ob;
    let leakage = (&ob - &(&block.basis * &r)).max_abs();
    Ok((r, leakage))
}

fn split_action(block: &DfsBlock, r: &ComplexMatrix) -> (ComplexMatrix, f64) {
    let d = block.d_j;
    let mut m = ComplexMatrix::zeros(d, d);
    for lam in 0..block.n_j {
        m += &r.view(lam * d, lam * d, d, d);
    }
    let m = m.scale_real(1.0 / block.n_j as f64);
    let mut worst: f64 = 0.0;
    for a in 0..block.n_j {
        for b in 0..block.n_j {
            let sub = r.view(a * d, b * d, d, d);
            let dev = if a == b { sub.max_diff(&m) } else { sub.max_abs() };
            worst = worst.max(dev);
        }
    }
    (m, worst)
}

fn check_structure(block: &DfsBlock, ops: &[ComplexMatrix], tol: f64) -> Result<DfsConditionReport> {
    let mut ms = Vec::with_capacity(ops.len());
    let (mut deviation, mut leakage) = (0f64, 0f64);
    for op in ops {
        let (r, leak) = restrict_with_leakage(block, op)?;
        let (m, dev) = split_action(block, &r);
        ms.push(m);
        deviation = deviation.max(dev);
        leakage = leakage.max(leak);
    }
    let pass = deviation <= tol && leakage <= tol;
    Ok(DfsConditionReport { m: ms, deviation, leakage, tol, pass })
}

/// Checks `B†(op)B = I_{n_J} ⊗ M` and block invariance for each operator.
pub fn check_dfs_condition(block: &DfsBlock, ops: &[ComplexMatrix]) -> Result<DfsConditionReport> {
    check_dfs_condition_tol(block, ops, STRUCTURE_TOL)
}

pub fn check_dfs_condition_tol(block: &DfsBlock, ops: &[ComplexMatrix], tol: f64) -> Result<DfsConditionReport> {
    check_structure(block, ops, tol)
}

/// Same structural check for arbitrary, possibly non-Hermitian, Lindblad
/// operators.
pub fn lindblad_dfs_condition(block: &DfsBlock, f_ops: &[ComplexMatrix]) -> Result<DfsConditionReport> {
    check_structure(block, f_ops, STRUCTURE_TOL)
}

/// Checks `B†(op)B = C ⊗ I_{d_J}`: the operator acts only on the path label.
pub fn check_commutant_form(block: &DfsBlock, op: &ComplexMatrix) -> Result<CommutantReport> {
    let (r, leakage) = restrict_with_leakage(block, op)?;
    let d = block.d_j;
    let mut factor = ComplexMatrix::zeros(block.n_j, block.n_j);
    let mut deviation: f64 = 0.0;
    for a in 0..block.n_j {
        for b in 0..block.n_j {
            let sub = r.view(a * d, b * d, d, d);
            let cab = sub.trace() / d as f64;
            factor.set(a, b, cab);
            deviation = deviation.max(sub.max_diff(&ComplexMatrix::identity(d).scale(cab)));
        }
    }
    let pass = deviation <= STRUCTURE_TOL && leakage <= STRUCTURE_TOL;
    Ok(CommutantReport { factor, deviation, leakage, pass })
}

/// Collective couplings of a model: `S_z` (weak) or `S_x, S_y, S_z` (strong).
pub fn coupling_operators(model: Model, n: usize) -> Result<Vec<ComplexMatrix>> {
    match model {
        Model::Weak => Ok(vec![collective(n, PauliAxis::Z)?]),
        Model::Strong => PauliAxis::ALL.iter().map(|&a| collective(n, a)).collect(),
    }
}

/// `exp(Σ v_α (S_α − Λ_α))` with `Λ_α = B(I ⊗ M_α)B†`, zero off the block.
#[derive(Clone, Debug, Serialize)]
pub struct StabilizerElement {
    pub generator: ComplexMatrix,
    pub v: Vec<C64>,
    pub realized: ComplexMatrix,
}

impl StabilizerElement {
    /// `‖D·B − B‖_max`.
    pub fn fixation_error(&self, block: &DfsBlock) -> f64 {
        (&self.realized * &block.basis).max_diff(&block.basis)
    }

    /// `‖D·ψ − ψ‖`.
    pub fn violation(&self, state: &StateVector) -> Result<f64> {
        Ok(self.realized.mul_vec(state)?.sub(state).norm())
    }
}

/// Precomputed `S_α − Λ_α` terms for a block.
#[derive(Clone, Debug)]
pub struct StabilizerGenerators {
    terms: Vec<ComplexMatrix>,
}

impl StabilizerGenerators {
    pub fn new(block: &DfsBlock) -> Result<Self> {
        let couplings = coupling_operators(block.model, block.n)?;
        let report = check_dfs_condition(block, &couplings)?;
        if !report.pass {
            return Err(Error::Leakage { leakage: report.deviation.max(report.leakage), tol: report.tol });
        }
        let bd = block.basis.dagger();
        let terms = couplings
            .iter()
            .zip(&report.m)
            .map(|(s, m)| {
                let lift = kron(&ComplexMatrix::identity(block.n_j), m)?;
                Ok(s - &(&(&block.basis * &lift) * &bd))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { terms })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn element(&self, v: &[C64]) -> Result<StabilizerElement> {
        if v.len() != self.terms.len() {
            return Err(Error::DimensionMismatch(format!(
                "stabilizer needs {} parameters, got {}",
                self.terms.len(),
                v.len()
            )));
        }
        let dim = self.terms[0].rows();
        let mut generator = ComplexMatrix::zeros(dim, dim);
        for (t, &va) in self.terms.iter().zip(v) {
            if va != ZERO {
                generator += &t.scale(va);
            }
        }
        let realized = mat_exp(&generator)?;
        Ok(StabilizerElement { generator, v: v.to_vec(), realized })
    }
}

pub fn stabilizer_element(block: &DfsBlock, v: &[C64]) -> Result<StabilizerElement> {
    StabilizerGenerators::new(block)?.element(v)
}

/// `P(θ) = exp(iθσ_z)`.
pub fn phase_gate(theta: f64) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&[C64::from_polar(1.0, theta), C64::from_polar(1.0, -theta)])
}

/// `e^{−iλθ} P(θ)^{⊗n}`.
pub fn weak_phase_stabilizer(n: usize, lambda: i64, theta: f64) -> Result<ComplexMatrix> {
    let dim = crate::config::qubit_dim(n)?;
    let global = C64::from_polar(1.0, -(lambda as f64) * theta);
    Ok(ComplexMatrix::from_fn(dim, dim, |i, j| {
        if i != j {
            return ZERO;
        }
        let ones = i.count_ones() as f64;
        let zeros = n as f64 - ones;
        global * C64::from_polar(1.0, theta * (zeros - ones))
    }))
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorizationReport {
    /// `‖exp(iθ(S_z − λI)) − e^{−iλθ}P(θ)^{⊗n}‖_max` on the full space.
    pub closed_form_deviation: f64,
    /// `‖(D(iθ) − e^{−iλθ}P(θ)^{⊗n})·B‖_max` for the zero-off-block element.
    pub block_deviation: f64,
    pub pass: bool,
}

/// Compares the realized weak stabilizer with the tensor-product phase form.
pub fn weak_factorization_check(block: &DfsBlock, theta: f64) -> Result<FactorizationReport> {
    if block.model != Model::Weak {
        return Err(Error::InvalidInput("factorization applies to weak blocks".into()));
    }
    let n = block.n;
    let lambda = block.lambda();
    let closed = weak_phase_stabilizer(n, lambda, theta)?;
    let sz = collective(n, PauliAxis::Z)?;
    let dim = sz.rows();
    let shifted = &sz - &ComplexMatrix::identity(dim).scale_real(lambda as f64);
    let full = mat_exp(&shifted.scale(c(0.0, theta)))?;
    let closed_form_deviation = full.max_diff(&closed);
    let d = stabilizer_element(block, &[c(0.0, theta)])?;
    let block_deviation = (&(&d.realized - &closed) * &block.basis).max_abs();
    let pass = closed_form_deviation <= 1e-10 && block_deviation <= 1e-10;
    Ok(FactorizationReport { closed_form_deviation, block_deviation, pass })
}

/// `e^{−2πiλ/n} Z_{1/n}^{⊗n} ψ = ψ` with `Z_{1/n} = P(2π/n)`.
pub fn wcd_finite_stabilizer_check(n: usize, lambda: i64, state: &StateVector) -> Result<bool> {
    let op = weak_phase_stabilizer(n, lambda, std::f64::consts::TAU / n as f64)?;
    Ok(op.mul_vec(state)?.max_diff(state) <= STRUCTURE_TOL)
}

/// `σ^{⊗n}` for one axis.
pub fn global_pauli(n: usize, axis: PauliAxis) -> Result<ComplexMatrix> {
    let mut out = ComplexMatrix::identity(crate::config::qubit_dim(n)?);
    for site in 1..=n {
        out = &out * &embed_one(n, site, &axis.matrix())?;
    }
    Ok(out)
}

/// True when some listed element anticommutes with `error` (and the product
/// is not trivially zero).
pub fn detects(stabilizers: &[ComplexMatrix], error: &ComplexMatrix) -> Result<bool> {
    detects_tol(stabilizers, error, ANTICOMMUTE_TOL)
}

pub fn detects_tol(stabilizers: &[ComplexMatrix], error: &ComplexMatrix, tol: f64) -> Result<bool> {
    for s in stabilizers {
        let anti = anticommutator(s, error)?;
        if anti.max_abs() <= tol && (s * error).max_abs() > tol {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KlMode {
    /// `⟨Ψ_i|E|Ψ_j⟩ = c_E δ_ij` for each listed error.
    #[default]
    Detection,
    /// `⟨Ψ_i|E_β†E_α|Ψ_j⟩ = c_αβ δ_ij` for every pair.
    Correction,
}

#[derive(Clone, Debug, Serialize)]
pub struct KlReport {
    pub mode: KlMode,
    /// `c` per error (detection, diagonal filled) or per pair (correction).
    pub c: Vec<Vec<C64>>,
    /// Deviation of each entry from the `c δ_ij` form.
    pub deviations: Vec<Vec<f64>>,
    pub worst_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

pub fn kl_check(block: &DfsBlock, errors: &[ComplexMatrix], mode: KlMode) -> Result<KlReport> {
    let k = errors.len();
    let dim = block.dim();
    let images: Vec<ComplexMatrix> = errors
        .iter()
        .map(|e| {
            check_operator(block, e)?;
            Ok(e * &block.basis)
        })
        .collect::<Result<_>>()?;
    let ident = ComplexMatrix::identity(dim);
    let contract = |g: ComplexMatrix| -> (C64, f64) {
        let cval = g.trace() / dim as f64;
        (cval, g.max_diff(&ident.scale(cval)))
    };
    let mut cmat = vec![vec![ZERO; k]; k];
    let mut devs = vec![vec![0.0; k]; k];
    match mode {
        KlMode::Detection => {
            for (a, e) in images.iter().enumerate() {
                let (cv, dv) = contract(&block.basis.dagger() * e);
                cmat[a][a] = cv;
                devs[a][a] = dv;
            }
        }
        KlMode::Correction => {
            for a in 0..k {
                for b in 0..k {
                    let (cv, dv) = contract(&images[b].dagger() * &images[a]);
                    cmat[b][a] = cv;
                    devs[b][a] = dv;
                }
            }
        }
    }
    let worst = devs.iter().flatten().fold(0f64, |m, &x| m.max(x));
    Ok(KlReport {
        mode,
        c: cmat,
        deviations: devs,
        worst_deviation: worst,
        tol: STRUCTURE_TOL,
        pass: worst <= STRUCTURE_TOL,
    })
}

/// The `3n` single-qubit Pauli errors, site-major then `x, y, z`.
pub fn weight_one_paulis(n: usize) -> Result<Vec<ComplexMatrix>> {
    let mut out = Vec::with_capacity(3 * n);
    for site in 1..=n {
        for axis in PauliAxis::ALL {
            out.push(embed_one(n, site, &axis.matrix())?);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockStabilizerStats {
    pub label: String,
    pub samples: usize,
    pub worst_fixation: f64,
    pub orthogonal_states: usize,
    /// Smallest, over orthogonal states, of the largest violation over `v`.
    pub min_violation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilizerSuiteReport {
    pub model: Model,
    pub n: usize,
    pub blocks: Vec<BlockStabilizerStats>,
    pub fixation_tol: f64,
    pub violation_floor: f64,
    pub pass: bool,
}

/// Random component of the complement of `block`, normalized.
fn orthogonal_state(block: &DfsBlock, rng: &mut random::SeededRng) -> Result<StateVector> {
    let dim = block.basis.rows();
    for _ in 0..16 {
        let psi = random::random_state(rng, dim);
        let coeffs = block.basis.dagger().mul_vec(&psi)?;
        let rest = psi.sub(&block.basis.mul_vec(&coeffs)?);
        if rest.norm() > 1e-6 {
            return rest.normalized();
        }
    }
    Err(Error::NonConvergence("could not sample outside the block".into()))
}

/// Fixation-iff-membership over random complex parameters for every block
/// of one model.
pub fn stabilizer_suite(
    model: Model,
    n: usize,
    samples: usize,
    orthogonal: usize,
    seed: u64,
    mode: ExecMode,
) -> Result<StabilizerSuiteReport> {
    let blocks = crate::basis::all_blocks(model, n)?;
    let fixation_tol = STRUCTURE_TOL;
    let violation_floor = 1e-3;
    let mut stats = Vec::with_capacity(blocks.len());
    for (bi, block) in blocks.iter().enumerate() {
        let gens = StabilizerGenerators::new(block)?;
        let mut rng = random::stream(seed, bi as u64);
        let vs: Vec<Vec<C64>> =
            (0..samples).map(|_| (0..gens.len()).map(|_| random::complex_disc(&mut rng)).collect()).collect();
        let has_complement = block.dim() < block.basis.rows();
        let states: Vec<StateVector> = if has_complement {
            (0..orthogonal).map(|_| orthogonal_state(block, &mut rng)).collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        let per_v = par::try_map(mode, &vs, |v| -> Result<(f64, Vec<f64>)> {
            let d = gens.element(v)?;
            let viol = states.iter().map(|s| d.violation(s)).collect::<Result<Vec<_>>>()?;
            Ok((d.fixation_error(block), viol))
        })?;
        let worst_fixation = per_v.iter().fold(0f64, |m, (f, _)| m.max(*f));
        let min_violation =
            (0..states.len()).map(|s| per_v.iter().fold(0f64, |m, (_, v)| m.max(v[s]))).fold(f64::INFINITY, f64::min);
        stats.push(BlockStabilizerStats {
            label: block.label(),
            samples,
            worst_fixation,
            orthogonal_states: states.len(),
            min_violation: if states.is_empty() { f64::NAN } else { min_violation },
        });
    }
    let pass = stats
        .iter()
        .all(|s| s.worst_fixation <= fixation_tol && (s.orthogonal_states == 0 || s.min_violation >= violation_floor));
    Ok(StabilizerSuiteReport { model, n, blocks: stats, fixation_tol, violation_floor, pass })
}
