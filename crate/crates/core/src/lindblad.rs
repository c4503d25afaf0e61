//! Markovian master equation with collective couplings.
//!
//! `dρ/dt = −i[H_S, ρ] + ½ Σ_{αβ} a_{αβ} ([F_α, ρF_β†] + [F_α ρ, F_β†])`,
//! integrated with fixed-step RK4.

use nalgebra::SymmetricEigen;
use serde::Serialize;

use crate::basis::{DfsBlock, Model};
use crate::matrix::{c, commutator, ComplexMatrix, StateVector, C64, ZERO};
use crate::operators::{collective, PauliAxis};
use crate::{Error, Result};

pub const DEFAULT_DT: f64 = 1e-3;
/// Most negative eigenvalue accepted for the coefficient matrix.
pub const COEFF_EIG_FLOOR: f64 = -1e-12;
pub const TRACE_TOL: f64 = 1e-8;
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Integrator drift budget for negative density-matrix eigenvalues.
pub const POSITIVITY_TOL: f64 = 1e-6;
/// Block population below which the encoded state counts as lost.
pub const MIN_POPULATION: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct LindbladModel {
    pub f_ops: Vec<ComplexMatrix>,
    pub a: ComplexMatrix,
    pub h_s: ComplexMatrix,
    // Σ a_{αβ} F_β† F_α
    anti: ComplexMatrix,
    f_dag: Vec<ComplexMatrix>,
}

impl LindbladModel {
    pub fn new(f_ops: Vec<ComplexMatrix>, a: ComplexMatrix, h_s: ComplexMatrix) -> Result<Self> {
        let dim = h_s.rows();
        if !h_s.is_square() {
            return Err(Error::DimensionMismatch("H_S must be square".into()));
        }
        if let Some(f) = f_ops.iter().find(|f| f.rows() != dim || f.cols() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "coupling operator is {}×{}, system dimension is {dim}",
                f.rows(),
                f.cols()
            )));
        }
        if a.rows() != f_ops.len() || a.cols() != f_ops.len() {
            return Err(Error::DimensionMismatch(format!(
                "coefficient matrix is {}×{} for {} coupling operators",
                a.rows(),
                a.cols(),
                f_ops.len()
            )));
        }
        if !a.is_hermitian(1e-12) {
            return Err(Error::InvalidInput("coefficient matrix is not Hermitian".into()));
        }
        if !f_ops.is_empty() {
            let low = min_eigenvalue(&a)?;
            if low < COEFF_EIG_FLOOR {
                return Err(Error::InvalidInput(format!(
                    "coefficient matrix is not positive semidefinite (eigenvalue {low:e})"
                )));
            }
        }
        if !h_s.is_hermitian(1e-12) {
            return Err(Error::InvalidInput("H_S is not Hermitian".into()));
        }
        let f_dag: Vec<ComplexMatrix> = f_ops.iter().map(|f| f.dagger()).collect();
        let mut anti = ComplexMatrix::zeros(dim, dim);
        for (al, f) in f_ops.iter().enumerate() {
            for (be, fd) in f_dag.iter().enumerate() {
                let w = a.get(al, be);
                if w != ZERO {
                    anti += &(fd * f).scale(w);
                }
            }
        }
        Ok(Self { f_ops, a, h_s, anti, f_dag })
    }

    /// `F = {S_z}` (weak) or `{S_x, S_y, S_z}` (strong) with `a = rate·I` and no
    /// system Hamiltonian.
    pub fn collective(model: Model, n: usize, rate: f64) -> Result<Self> {
        let axes: &[PauliAxis] = match model {
            Model::Weak => &[PauliAxis::Z],
            Model::Strong => &PauliAxis::ALL,
        };
        let f_ops = axes.iter().map(|&ax| collective(n, ax)).collect::<Result<Vec<_>>>()?;
        let dim = f_ops[0].rows();
        let a = ComplexMatrix::identity(f_ops.len()).scale_real(rate);
        Self::new(f_ops, a, ComplexMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.h_s.rows()
    }

    /// Right-hand side of the master equation.
    pub fn rhs(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.rows() != self.dim() || !rho.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "density matrix is {}×{}, model dimension is {}",
                rho.rows(),
                rho.cols(),
                self.dim()
            )));
        }
        // the bracket sum equals Σ a_{αβ} F_α ρ F_β† − ½{K, ρ}
        let mut out = commutator(&self.h_s, rho)?.scale(c(0.0, -1.0));
        for (al, f) in self.f_ops.iter().enumerate() {
            let f_rho = f * rho;
            for (be, fd) in self.f_dag.iter().enumerate() {
                let w = self.a.get(al, be);
                if w != ZERO {
                    out += &(&f_rho * fd).scale(w);
                }
            }
        }
        let k_rho = &self.anti * rho;
        let rho_k = rho * &self.anti;
        out -= &(&k_rho + &rho_k).scale_real(0.5);
        Ok(out)
    }
}

fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    let eig = SymmetricEigen::try_new(m.hermitian_part().into_dmatrix(), 1e-15, 10_000)
        .ok_or_else(|| Error::NonConvergence("Hermitian eigensolver".into()))?;
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

fn hermitian_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = SymmetricEigen::try_new(m.hermitian_part().into_dmatrix(), 1e-15, 10_000)
        .ok_or_else(|| Error::NonConvergence("Hermitian eigensolver".into()))?;
    let q = &eig.eigenvectors;
    let mut qd = q.clone();
    for (j, &l) in eig.eigenvalues.iter().enumerate() {
        let s = l.max(0.0).sqrt();
        for i in 0..qd.nrows() {
            qd[(i, j)] *= C64::from(s);
        }
    }
    Ok(ComplexMatrix::from_dmatrix(qd * q.adjoint()))
}

/// A density matrix with its validity checks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityMatrix {
    pub rho: ComplexMatrix,
}

impl DensityMatrix {
    pub fn pure(psi: &StateVector) -> Self {
        Self { rho: psi.projector() }
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    /// Fails with [`Error::InvariantBreach`] when the matrix is not a state
    /// within the integrator's budgets.
    pub fn check(&self) -> Result<()> {
        let herm = self.rho.hermiticity_defect();
        if herm > HERMITICITY_TOL {
            return Err(Error::InvariantBreach(format!("Hermiticity defect {herm:e}")));
        }
        let tr = self.rho.trace();
        if (tr - c(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvariantBreach(format!("trace {tr}")));
        }
        let low = min_eigenvalue(&self.rho)?;
        if low < -POSITIVITY_TOL {
            return Err(Error::InvariantBreach(format!("negative eigenvalue {low:e}")));
        }
        Ok(())
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn overlap(&self, psi: &StateVector) -> Result<f64> {
        Ok(psi.inner(&self.rho.mul_vec(psi)?).re)
    }
}

/// Uhlmann fidelity `(Tr sqrt(√σ ρ √σ))²`; `⟨ψ|ρ|ψ⟩` when `σ = |ψ⟩⟨ψ|`.
pub fn fidelity(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    let eig = SymmetricEigen::try_new(sigma.hermitian_part().into_dmatrix(), 1e-15, 10_000)
        .ok_or_else(|| Error::NonConvergence("Hermitian eigensolver".into()))?;
    let purity = (sigma * sigma).trace().re;
    let tr = sigma.trace().re;
    if (purity - tr * tr).abs() <= 1e-12 {
        // rank one: avoids square roots of roundoff-level eigenvalues
        let top = eig.eigenvalues.imax();
        let psi = StateVector::from_dvector(eig.eigenvectors.column(top).into_owned());
        return Ok(tr * psi.inner(&rho.mul_vec(&psi)?).re);
    }
    let s = hermitian_sqrt(sigma)?;
    let inner = hermitian_sqrt(&(&(&s * rho) * &s))?;
    Ok(inner.trace().re.powi(2))
}

fn rk4_step(model: &LindbladModel, rho: &ComplexMatrix, dt: f64) -> Result<ComplexMatrix> {
    let k1 = model.rhs(rho)?;
    let k2 = model.rhs(&(rho + &k1.scale_real(0.5 * dt)))?;
    let k3 = model.rhs(&(rho + &k2.scale_real(0.5 * dt)))?;
    let k4 = model.rhs(&(rho + &k3.scale_real(dt)))?;
    let incr = &(&(&k1 + &k2.scale_real(2.0)) + &k3.scale_real(2.0)) + &k4;
    Ok(rho + &incr.scale_real(dt / 6.0))
}

fn step_count(t_end: f64, dt: f64) -> Result<usize> {
    if !dt.is_finite() || !t_end.is_finite() || dt <= 0.0 || t_end < dt {
        return Err(Error::InvalidInput(format!("need 0 < dt <= T, got dt = {dt}, T = {t_end}")));
    }
    Ok((t_end / dt).round() as usize)
}

/// Integrates from `rho0` to `t_end`, calling `observe(t, ρ)` at `t = 0` and
/// after every step. Every state is checked.
pub fn evolve_with<F>(model: &LindbladModel, rho0: &DensityMatrix, t_end: f64, dt: f64, mut observe: F) -> Result<()>
where
    F: FnMut(f64, &DensityMatrix) -> Result<()>,
{
    let steps = step_count(t_end, dt)?;
    rho0.check()?;
    let mut rho = rho0.clone();
    observe(0.0, &rho)?;
    for k in 1..=steps {
        rho = DensityMatrix { rho: rk4_step(model, &rho.rho, dt)? };
        rho.check().map_err(|e| match e {
            Error::InvariantBreach(msg) => Error::InvariantBreach(format!("{msg} at t = {}", k as f64 * dt)),
            other => other,
        })?;
        observe(k as f64 * dt, &rho)?;
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

impl Trajectory {
    pub fn last(&self) -> &DensityMatrix {
        self.states.last().expect("trajectory holds at least the initial state")
    }
}

pub fn evolve(model: &LindbladModel, rho0: &DensityMatrix, t_end: f64, dt: f64) -> Result<Trajectory> {
    let mut traj = Trajectory { times: Vec::new(), states: Vec::new() };
    evolve_with(model, rho0, t_end, dt, |t, rho| {
        traj.times.push(t);
        traj.states.push(rho.clone());
        Ok(())
    })?;
    Ok(traj)
}

#[derive(Clone, Debug, Serialize)]
pub struct SubsystemReport {
    pub population: f64,
    /// Fidelity of the normalized path-factor state; zero when `lost`.
    pub fidelity: f64,
    pub mu_purity: f64,
    pub lost: bool,
}

/// `B†ρB` traced over the noise-exposed factor, compared with `lambda_ref`.
pub fn subsystem_fidelity(
    block: &DfsBlock,
    rho: &ComplexMatrix,
    lambda_ref: &ComplexMatrix,
) -> Result<SubsystemReport> {
    if lambda_ref.rows() != block.n_j || !lambda_ref.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "reference is {}×{}, path factor has dimension {}",
            lambda_ref.rows(),
            lambda_ref.cols(),
            block.n_j
        )));
    }
    if rho.rows() != block.basis.rows() {
        return Err(Error::DimensionMismatch("density matrix and block live in different spaces".into()));
    }
    let r = &(&block.basis.dagger() * rho) * &block.basis;
    let population = r.trace().re;
    if population < MIN_POPULATION {
        return Ok(SubsystemReport { population, fidelity: 0.0, mu_purity: 0.0, lost: true });
    }
    let (nj, dj) = (block.n_j, block.d_j);
    let mut lam = ComplexMatrix::zeros(nj, nj);
    let mut mu = ComplexMatrix::zeros(dj, dj);
    for a in 0..nj {
        for b in 0..nj {
            let z: C64 = (0..dj).map(|m| r.get(a * dj + m, b * dj + m)).sum();
            lam.set(a, b, z / population);
        }
    }
    for m in 0..dj {
        for n in 0..dj {
            let z: C64 = (0..nj).map(|a| r.get(a * dj + m, a * dj + n)).sum();
            mu.set(m, n, z / population);
        }
    }
    let mu_purity = (&mu * &mu).trace().re;
    Ok(SubsystemReport { population, fidelity: fidelity(&lam, lambda_ref)?, mu_purity, lost: false })
}

/// What a contrast run tracks.
#[derive(Clone, Debug)]
pub enum Probe {
    /// Overlap with the initial pure state.
    State(StateVector),
    /// A path-factor state `λ ⊗ μ` on a block, scored on the path factor only.
    Subsystem { block: DfsBlock, lambda: StateVector, mu: StateVector },
}

impl Probe {
    pub fn initial(&self) -> Result<DensityMatrix> {
        match self {
            Probe::State(psi) => Ok(DensityMatrix::pure(psi)),
            Probe::Subsystem { block, lambda, mu } => {
                if lambda.dim() != block.n_j || mu.dim() != block.d_j {
                    return Err(Error::DimensionMismatch("subsystem factors do not fit the block".into()));
                }
                let coords = lambda.kron(mu);
                Ok(DensityMatrix::pure(&block.basis.mul_vec(&coords)?))
            }
        }
    }

    pub fn score(&self, rho: &DensityMatrix) -> Result<ProbeSample> {
        match self {
            Probe::State(psi) => Ok(ProbeSample { fidelity: rho.overlap(psi)?, population: None, mu_purity: None }),
            Probe::Subsystem { block, lambda, .. } => {
                let r = subsystem_fidelity(block, &rho.rho, &lambda.projector())?;
                Ok(ProbeSample { fidelity: r.fidelity, population: Some(r.population), mu_purity: Some(r.mu_purity) })
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ProbeSample {
    pub fidelity: f64,
    pub population: Option<f64>,
    pub mu_purity: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContrastReport {
    pub times: Vec<f64>,
    pub protected: Vec<ProbeSample>,
    pub unprotected: Vec<ProbeSample>,
    pub protected_final: f64,
    pub unprotected_final: f64,
    /// Largest `|population − 1|` seen by a subsystem probe.
    pub max_population_drift: f64,
    pub pass: bool,
}

/// Evolves both probes under the same model and records their fidelities
/// every `sample_every` steps.
pub fn contrast_run(
    model: &LindbladModel,
    protected: &Probe,
    unprotected: &Probe,
    t_end: f64,
    dt: f64,
    sample_every: usize,
) -> Result<ContrastReport> {
    let every = sample_every.max(1);
    let run = |probe: &Probe| -> Result<(Vec<f64>, Vec<ProbeSample>)> {
        let (mut ts, mut ss) = (Vec::new(), Vec::new());
        let steps = step_count(t_end, dt)?;
        let mut k = 0usize;
        evolve_with(model, &probe.initial()?, t_end, dt, |t, rho| {
            if k.is_multiple_of(every) || k == steps {
                ts.push(t);
                ss.push(probe.score(rho)?);
            }
            k += 1;
            Ok(())
        })?;
        Ok((ts, ss))
    };
    let (times, prot) = run(protected)?;
    let (_, unprot) = run(unprotected)?;
    let protected_final = prot.last().map_or(1.0, |s| s.fidelity);
    let unprotected_final = unprot.last().map_or(1.0, |s| s.fidelity);
    let max_population_drift =
        prot.iter().chain(&unprot).filter_map(|s| s.population).map(|p| (p - 1.0).abs()).fold(0.0, f64::max);
    let pass = protected_final >= 1.0 - 1e-6 && unprotected_final <= 0.9;
    Ok(ContrastReport {
        times,
        protected: prot,
        unprotected: unprot,
        protected_final,
        unprotected_final,
        max_population_drift,
        pass,
    })
}

/// A shipped demonstration: model, probes and run length.
#[derive(Clone, Debug)]
pub struct Demo {
    pub name: &'static str,
    pub model: LindbladModel,
    pub protected: Probe,
    pub unprotected: Probe,
    pub t_end: f64,
}

impl Demo {
    pub fn run(&self, dt: f64, sample_every: usize) -> Result<ContrastReport> {
        contrast_run(&self.model, &self.protected, &self.unprotected, self.t_end, dt, sample_every)
    }
}

fn ket(amps: &[C64]) -> StateVector {
    StateVector::new(amps.to_vec())
}

/// Weak collective dephasing on two qubits: a `{|01⟩, |10⟩}` superposition
/// against `(|00⟩ + |11⟩)/√2`, whose coherence decays as `e^{−8t}`.
pub fn demo_weak_pair() -> Result<Demo> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = ZERO;
    let protected = ket(&[z, c(0.6, 0.0), c(0.0, -0.8), z]);
    let ghz = ket(&[c(s, 0.0), z, z, c(s, 0.0)]);
    Ok(Demo {
        name: "weak n=2",
        model: LindbladModel::collective(Model::Weak, 2, 1.0)?,
        protected: Probe::State(protected),
        unprotected: Probe::State(ghz),
        t_end: 2.0,
    })
}

/// Strong collective noise on three qubits: a path qubit on the `J = ½`
/// block against the same amplitudes stored in qubit 1.
pub fn demo_strong_three() -> Result<Demo> {
    let block = crate::basis::block(Model::Strong, 3, 1)?;
    let (al, be) = (c(0.6, 0.0), c(0.0, 0.8));
    let lambda = ket(&[al, be]);
    let mu = ket(&[c(1.0, 0.0), ZERO]);
    let mut naive = StateVector::zeros(8);
    naive.amps_mut()[0] = al;
    naive.amps_mut()[4] = be;
    Ok(Demo {
        name: "strong n=3",
        model: LindbladModel::collective(Model::Strong, 3, 1.0)?,
        protected: Probe::Subsystem { block, lambda, mu },
        unprotected: Probe::State(naive),
        t_end: 5.0,
    })
}

/// Single qubit with `F = {σ₋, σ_z}`, `σ₋ = |0⟩⟨1|`: `|0⟩` is stationary and
/// `|1⟩` decays as `e^{−t}`.
pub fn demo_amplitude_damping() -> Result<Demo> {
    let lower = ComplexMatrix::from_real(&[&[0.0, 1.0], &[0.0, 0.0]]);
    let sz = ComplexMatrix::from_real(&[&[1.0, 0.0], &[0.0, -1.0]]);
    let model = LindbladModel::new(vec![lower, sz], ComplexMatrix::identity(2), ComplexMatrix::zeros(2, 2))?;
    Ok(Demo {
        name: "amplitude damping",
        model,
        protected: Probe::State(StateVector::basis(2, 0)),
        unprotected: Probe::State(StateVector::basis(2, 1)),
        t_end: 2.0,
    })
}

pub fn shipped_demos() -> Result<Vec<Demo>> {
    Ok(vec![demo_weak_pair()?, demo_strong_three()?, demo_amplitude_damping()?])
}

/// Single qubit dephasing `F = σ_z`, `a = 1`, started in `|+⟩`.
pub fn dephasing_qubit() -> Result<(LindbladModel, DensityMatrix)> {
    let sz = ComplexMatrix::from_real(&[&[1.0, 0.0], &[0.0, -1.0]]);
    let model = LindbladModel::new(vec![sz], ComplexMatrix::identity(1), ComplexMatrix::zeros(2, 2))?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Ok((model, DensityMatrix::pure(&ket(&[c(s, 0.0), c(s, 0.0)]))))
}

/// `|ρ₀₁(1) − ½e^{−2}|` for the dephasing qubit at step `dt`.
pub fn dephasing_error(dt: f64) -> Result<f64> {
    let (model, rho0) = dephasing_qubit()?;
    let traj = evolve(&model, &rho0, 1.0, dt)?;
    let want = 0.5 * (-2.0f64).exp();
    Ok((traj.last().rho.get(0, 1) - c(want, 0.0)).norm())
}

/// Error ratio under halving the step, `e(dt) / e(dt/2)`; about 16 for RK4.
pub fn rk4_order_factor(dt: f64) -> Result<f64> {
    Ok(dephasing_error(dt)? / dephasing_error(dt / 2.0)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{exp_i_hermitian, pauli};
    use crate::random::{random_hermitian, random_state, seeded};

    #[test]
    fn zero_coefficients_leave_only_hamiltonian() {
        let h = pauli::x();
        let m = LindbladModel::new(vec![pauli::z()], ComplexMatrix::zeros(1, 1), h.clone()).unwrap();
        let rho = pauli::z().scale_real(0.5);
        let want = commutator(&h, &rho).unwrap().scale(c(0.0, -1.0));
        assert!(m.rhs(&rho).unwrap().max_diff(&want) < 1e-15);
    }

    #[test]
    fn dephasing_rate_is_two() {
        let (m, rho) = dephasing_qubit().unwrap();
        let d = m.rhs(&rho.rho).unwrap();
        assert!((d.get(0, 1) - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rhs_is_trace_free() {
        let mut rng = seeded(4);
        for _ in 0..10 {
            let f: Vec<ComplexMatrix> = (0..3)
                .map(|_| &random_hermitian(&mut rng, 4) + &random_hermitian(&mut rng, 4).scale(c(0.0, 1.0)))
                .collect();
            let g = random_hermitian(&mut rng, 3);
            let a = &g * &g;
            let m = LindbladModel::new(f, a, random_hermitian(&mut rng, 4)).unwrap();
            let rho = DensityMatrix::pure(&random_state(&mut rng, 4));
            assert!(m.rhs(&rho.rho).unwrap().trace().norm() <= 1e-12);
        }
    }

    #[test]
    fn rejects_bad_coefficients() {
        let a = ComplexMatrix::from_real(&[&[1.0, 0.0], &[0.0, -0.1]]);
        let f = vec![pauli::x(), pauli::z()];
        assert!(LindbladModel::new(f.clone(), a, ComplexMatrix::zeros(2, 2)).is_err());
        assert!(LindbladModel::new(f, ComplexMatrix::identity(3), ComplexMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn dephasing_matches_analytic() {
        let err = dephasing_error(DEFAULT_DT).unwrap();
        assert!(err / (0.5 * (-2.0f64).exp()) < 1e-6, "{err}");
    }

    #[test]
    fn unitary_evolution() {
        let m = LindbladModel::new(vec![], ComplexMatrix::zeros(0, 0), pauli::z()).unwrap();
        let psi = random_state(&mut seeded(2), 2);
        let traj = evolve(&m, &DensityMatrix::pure(&psi), 1.0, DEFAULT_DT).unwrap();
        let u = exp_i_hermitian(&pauli::z(), -1.0).unwrap();
        let want = &(&u * &psi.projector()) * &u.dagger();
        assert!(traj.last().rho.max_diff(&want) < 1e-8);
    }

    #[test]
    fn rk4_order() {
        let f = rk4_order_factor(0.1).unwrap();
        assert!((8.0..=32.0).contains(&f), "{f}");
    }

    #[test]
    fn weak_pair_contrast() {
        let demo = demo_weak_pair().unwrap();
        let r = demo.run(DEFAULT_DT, 100).unwrap();
        assert!(r.pass);
        assert!((r.protected_final - 1.0).abs() < 1e-8);
        let want = 0.5 * (1.0 + (-16.0f64).exp());
        assert!((r.unprotected_final - want).abs() < 1e-6);
    }

    #[test]
    fn amplitude_damping_contrast() {
        let r = demo_amplitude_damping().unwrap().run(DEFAULT_DT, 100).unwrap();
        assert!(r.pass);
        assert!((r.unprotected_final - (-2.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn zero_noise_keeps_both() {
        let demo = demo_weak_pair().unwrap();
        let quiet = LindbladModel::new(vec![], ComplexMatrix::zeros(0, 0), ComplexMatrix::zeros(4, 4)).unwrap();
        let r = contrast_run(&quiet, &demo.protected, &demo.unprotected, 0.5, 0.01, 10).unwrap();
        assert!((r.protected_final - 1.0).abs() < 1e-12);
        assert!((r.unprotected_final - 1.0).abs() < 1e-12);
        assert!(!r.pass);
    }

    #[test]
    fn strong_three_protects_path_qubit() {
        let r = demo_strong_three().unwrap().run(DEFAULT_DT, 500).unwrap();
        assert!(r.protected_final >= 1.0 - 1e-6, "{}", r.protected_final);
        assert!(r.unprotected_final < 0.9);
        assert!(r.max_population_drift <= 1e-8);
        let purity = r.protected.last().unwrap().mu_purity.unwrap();
        assert!(purity < 0.999, "{purity}");
    }

    #[test]
    fn initial_subsystem_fidelity_is_one() {
        let demo = demo_strong_three().unwrap();
        let s = demo.protected.score(&demo.protected.initial().unwrap()).unwrap();
        assert!((s.fidelity - 1.0).abs() < 1e-12);
        assert!((s.mu_purity.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixed_fidelity() {
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        assert!((fidelity(&half, &half).unwrap() - 1.0).abs() < 1e-12);
        let zero = StateVector::basis(2, 0).projector();
        assert!((fidelity(&half, &zero).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn lost_block_is_reported() {
        let block = crate::basis::block(Model::Strong, 3, 1).unwrap();
        let rho = StateVector::basis(8, 7).projector();
        let r = subsystem_fidelity(&block, &rho, &ComplexMatrix::identity(2).scale_real(0.5)).unwrap();
        assert!(r.lost);
    }

    #[test]
    fn large_step_breaks_invariants() {
        let (m, rho) = dephasing_qubit().unwrap();
        let fast =
            LindbladModel::new(m.f_ops.clone(), ComplexMatrix::identity(1).scale_real(400.0), m.h_s.clone()).unwrap();
        assert!(matches!(evolve(&fast, &rho, 1.0, 0.1), Err(Error::InvariantBreach(_))));
    }
}
