use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{EncodedBlock, Pulse, PulseSequence, DEFAULT_STEP_CAP, PREFIX_LEAKAGE_TOL};
use crate::lie::{LieBasis, LieElement, ADMIT_TOL};
use crate::matrix::{c, commutator, matrix_log_unitary, pauli, phase_free_distance, ComplexMatrix};
use crate::{Error, Result};

const SU2_TOL: f64 = 1e-9;
const EXPANSION_TOL: f64 = 1e-8;
const DROP_COEFF: f64 = 1e-12;

/// How a Hamiltonian in the generated algebra is obtained from primitives.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Derivation {
    Primitive {
        index: usize,
    },
    /// `i[left, right]`
    Commutator {
        left: Box<Derivation>,
        right: Box<Derivation>,
    },
}

impl Derivation {
    pub fn depth(&self) -> usize {
        match self {
            Derivation::Primitive { .. } => 0,
            Derivation::Commutator { left, right } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn hamiltonian(&self, enc: &EncodedBlock) -> Result<ComplexMatrix> {
        match self {
            Derivation::Primitive { index } => Ok(enc.encoded(*index).clone()),
            Derivation::Commutator { left, right } => {
                let l = left.hamiltonian(enc)?;
                let r = right.hamiltonian(enc)?;
                Ok(commutator(&l, &r)?.scale(c(0.0, 1.0)))
            }
        }
    }

    /// Appends pulses approximating `e^{isM}`, `M` the derived Hamiltonian.
    ///
    /// Commutators use the balanced group commutator
    /// `e^X e^Y e^{-X} e^{-Y} e^{-X} e^{-Y} e^X e^Y = e^{2[X,Y] + O(τ⁴)}`
    /// with `X = iτL`, `Y = iτR`.
    pub fn realize(&self, s: f64, out: &mut Vec<Pulse>) {
        match self {
            Derivation::Primitive { index } => {
                if s != 0.0 {
                    out.push(Pulse::new(*index, s));
                }
            }
            Derivation::Commutator { left, right } => {
                if s == 0.0 {
                    return;
                }
                // e^{isM} = e^{-s[L,R]} = e^{2[X,Y]} with 2τ² = s; negative s swaps the pair
                let (a, b) = if s > 0.0 { (left, right) } else { (right, left) };
                let tau = (s.abs() / 2.0).sqrt();
                let mut x = Vec::new();
                a.realize(tau, &mut x);
                let mut y = Vec::new();
                b.realize(tau, &mut y);
                let xi = inverse(&x);
                let yi = inverse(&y);
                for part in [&y, &x, &yi, &xi, &yi, &xi, &y, &x] {
                    out.extend_from_slice(part);
                }
            }
        }
    }
}

fn inverse(pulses: &[Pulse]) -> Vec<Pulse> {
    pulses.iter().rev().map(|p| Pulse::new(p.primitive, -p.duration)).collect()
}

/// Merges neighbouring pulses on the same primitive.
fn merge(pulses: Vec<Pulse>) -> Vec<Pulse> {
    let mut out: Vec<Pulse> = Vec::with_capacity(pulses.len());
    for p in pulses {
        match out.last_mut() {
            Some(last) if last.primitive == p.primitive => last.duration += p.duration,
            _ => out.push(p),
        }
    }
    out.retain(|p| p.duration != 0.0);
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct Monomial {
    pub derivation: Derivation,
    #[serde(skip)]
    pub hamiltonian: ComplexMatrix,
}

fn as_element(h: &ComplexMatrix) -> LieElement {
    LieElement { blocks: vec![h.clone()] }
}

/// Linearly independent right-nested commutators of the primitives, grown one
/// level at a time until they span `su(n_J)` or stop producing anything new.
pub fn lie_monomials(enc: &EncodedBlock, max_depth: usize) -> Result<Vec<Monomial>> {
    let d = enc.dim();
    let mut span = LieBasis::new(vec![enc.block.two_j], vec![d], ADMIT_TOL);
    let full = span.max_dim();
    let mut out = Vec::new();
    let mut frontier = Vec::new();
    for k in 0..enc.len() {
        let h = enc.encoded(k).clone();
        if span.admit(&as_element(&h)) {
            frontier.push(out.len());
            out.push(Monomial { derivation: Derivation::Primitive { index: k }, hamiltonian: h });
        }
    }
    for _ in 0..max_depth {
        if span.dim() == full || frontier.is_empty() {
            break;
        }
        let mut next = Vec::new();
        for &m in &frontier {
            for k in 0..enc.len() {
                let h = commutator(enc.encoded(k), &out[m].hamiltonian)?.scale(c(0.0, 1.0));
                if span.admit(&as_element(&h)) {
                    next.push(out.len());
                    let derivation = Derivation::Commutator {
                        left: Box::new(Derivation::Primitive { index: k }),
                        right: Box::new(out[m].derivation.clone()),
                    };
                    out.push(Monomial { derivation, hamiltonian: h });
                }
            }
        }
        frontier = next;
    }
    Ok(out)
}

/// Real coefficients with `Σ c_m M_m = h` and the residual norm.
fn expand(monomials: &[Monomial], h: &ComplexMatrix) -> (Vec<f64>, f64) {
    let cols: Vec<DVector<f64>> = monomials.iter().map(|m| as_element(&m.hamiltonian).to_real()).collect();
    let rhs = as_element(h).to_real();
    if cols.is_empty() {
        return (Vec::new(), rhs.norm());
    }
    let a = DMatrix::from_columns(&cols);
    let coeffs = a.clone().svd(true, true).solve(&rhs, 1e-12).expect("SVD with both factors");
    let residual = (&a * &coeffs - &rhs).norm();
    (coeffs.iter().copied().collect(), residual)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CompileOptions {
    pub epsilon: f64,
    pub step_cap: usize,
    pub max_depth: usize,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self { epsilon: 1e-3, step_cap: DEFAULT_STEP_CAP, max_depth: 6 }
    }
}

fn matrix_power_of_two(u: &ComplexMatrix, k: u32) -> ComplexMatrix {
    let mut p = u.clone();
    for _ in 0..k {
        p = &p * &p;
    }
    p
}

/// Compiles an encoded unitary.
///
/// The principal logarithm of the target is expanded over commutator
/// monomials of the primitives, each monomial is realized from its derivation
/// tree, and the sum is Trotterized with the step count doubled until the
/// phase-free distance reaches `epsilon`.
pub fn compile(enc: &EncodedBlock, target: &ComplexMatrix, opts: CompileOptions) -> Result<PulseSequence> {
    enc.check_target(target)?;
    if opts.epsilon.is_nan() || opts.epsilon <= 0.0 {
        return Err(Error::InvalidInput("epsilon must be positive".into()));
    }
    let h = matrix_log_unitary(target)?.traceless();
    let monomials = lie_monomials(enc, opts.max_depth)?;
    let (coeffs, residual) = expand(&monomials, &h);
    if residual > EXPANSION_TOL * h.frobenius_norm().max(1.0) {
        return Err(Error::InvalidInput(format!(
            "target generator lies outside the algebra of the primitives (residual {residual:e})"
        )));
    }
    let terms: Vec<(&Monomial, f64)> = monomials.iter().zip(coeffs).filter(|(_, w)| w.abs() > DROP_COEFF).collect();

    let mut best = (f64::INFINITY, 0usize);
    for k in 0..=usize::BITS - 1 {
        let n = 1usize << k;
        let mut step = Vec::new();
        for (m, w) in &terms {
            m.derivation.realize(w / n as f64, &mut step);
        }
        let step = merge(step);
        let length = step.len().saturating_mul(n);
        if length > opts.step_cap {
            break;
        }
        let estimate = phase_free_distance(&matrix_power_of_two(&enc.product(&step)?, k), target)?;
        if estimate > opts.epsilon * 1.5 {
            if estimate < best.0 {
                best = (estimate, length);
            }
            continue;
        }
        let steps: Vec<Pulse> = step.iter().copied().cycle().take(length).collect();
        let seq = enc.sequence(steps, target.clone())?;
        if seq.achieved_error < best.0 {
            best = (seq.achieved_error, seq.length);
        }
        if seq.achieved_error <= opts.epsilon {
            if seq.max_prefix_leakage > PREFIX_LEAKAGE_TOL {
                return Err(Error::Leakage { leakage: seq.max_prefix_leakage, tol: PREFIX_LEAKAGE_TOL });
            }
            return Ok(seq);
        }
        if terms.is_empty() {
            break;
        }
    }
    Err(Error::Unattainable { best_error: best.0, length: best.1 })
}

/// `±1` if `m = ±p`.
fn pauli_sign(m: &ComplexMatrix, p: &ComplexMatrix) -> Option<f64> {
    if m.max_diff(p) <= SU2_TOL {
        Some(1.0)
    } else if m.max_diff(&-p) <= SU2_TOL {
        Some(-1.0)
    } else {
        None
    }
}

/// Exact `Z(α)·X(β)·Z(γ)` decomposition of an encoded `SU(2)` target, with
/// `X(θ) = e^{iθσ_x}` and `Z(θ) = e^{iθσ_z}`. Zero rotations are omitted.
pub fn euler_su2(enc: &EncodedBlock, target: &ComplexMatrix, x_prim: usize, z_prim: usize) -> Result<PulseSequence> {
    enc.check_target(target)?;
    if enc.dim() != 2 {
        return Err(Error::DimensionMismatch(format!("Euler angles need a 2-dim factor, got {}", enc.dim())));
    }
    for k in [x_prim, z_prim] {
        if k >= enc.len() {
            return Err(Error::InvalidIndex(format!("primitive {k} of {}", enc.len())));
        }
    }
    let sx = pauli_sign(enc.encoded(x_prim), &pauli::x())
        .ok_or_else(|| Error::InvalidInput("x generator does not act as σ_x".into()))?;
    let sz = pauli_sign(enc.encoded(z_prim), &pauli::z())
        .ok_or_else(|| Error::InvalidInput("z generator does not act as σ_z".into()))?;
    let unit = target.unitarity_defect();
    let det = target.get(0, 0) * target.get(1, 1) - target.get(0, 1) * target.get(1, 0);
    if unit > SU2_TOL || (det - c(1.0, 0.0)).norm() > SU2_TOL {
        return Err(Error::InvalidInput("target is not special unitary".into()));
    }
    let a = target.get(0, 0);
    let b = target.get(0, 1);
    let beta = b.norm().atan2(a.norm());
    let sum = if a.norm() > 1e-12 { a.arg() } else { 0.0 };
    let diff = if b.norm() > 1e-12 { b.arg() - FRAC_PI_2 } else { 0.0 };
    let alpha = 0.5 * (sum + diff);
    let gamma = 0.5 * (sum - diff);
    let steps: Vec<Pulse> = [(z_prim, gamma * sz), (x_prim, beta * sx), (z_prim, alpha * sz)]
        .into_iter()
        .filter(|(_, t)| t.abs() > 1e-15)
        .map(|(k, t)| Pulse::new(k, t))
        .collect();
    enc.sequence(steps, target.clone())
}

#[cfg(test)]
mod tests {
    use super::super::{three_qubit_pair, Primitive};
    use super::*;
    use crate::basis::Model;
    use crate::matrix::{exp_i_hermitian, I};
    use crate::operators::OperatorKind;
    use crate::random::{haar_special_unitary, seeded};

    fn pair() -> EncodedBlock {
        EncodedBlock::for_model(Model::Strong, 3, 1, three_qubit_pair()).unwrap()
    }

    #[test]
    fn euler_identity_is_empty() {
        let seq = euler_su2(&pair(), &ComplexMatrix::identity(2), 0, 1).unwrap();
        assert!(seq.steps.is_empty());
        assert!(seq.achieved_error < 1e-15);
    }

    #[test]
    fn euler_i_sigma_x_is_one_pulse() {
        let enc = pair();
        let seq = euler_su2(&enc, &pauli::x().scale(I), 0, 1).unwrap();
        assert_eq!(seq.length, 1);
        assert_eq!(seq.steps[0].primitive, 0);
        assert!((seq.steps[0].duration.abs() - FRAC_PI_2).abs() < 1e-12);
        assert!(seq.achieved_error < 1e-12);
    }

    #[test]
    fn euler_random_targets() {
        let enc = pair();
        let mut rng = seeded(7);
        for _ in 0..25 {
            let u = haar_special_unitary(&mut rng, 2);
            let seq = euler_su2(&enc, &u, 0, 1).unwrap();
            assert!(seq.length <= 3);
            assert!(seq.achieved_error <= 1e-9, "{}", seq.achieved_error);
            // exact, not just up to phase
            assert!(enc.product(&seq.steps).unwrap().max_diff(&u) < 1e-9);
        }
    }

    #[test]
    fn euler_rejects_non_special() {
        let enc = pair();
        assert!(euler_su2(&enc, &pauli::x(), 0, 1).is_err());
    }

    #[test]
    fn commutator_realization_orders() {
        let enc = pair();
        let tree = Derivation::Commutator {
            left: Box::new(Derivation::Primitive { index: 0 }),
            right: Box::new(Derivation::Primitive { index: 1 }),
        };
        let m = tree.hamiltonian(&enc).unwrap();
        for s in [1e-2, -1e-2] {
            let mut pulses = Vec::new();
            tree.realize(s, &mut pulses);
            let got = enc.product(&pulses).unwrap();
            let want = exp_i_hermitian(&m, s).unwrap();
            // balanced commutator: error O(s²)
            assert!(got.max_diff(&want) < 10.0 * s * s, "{s}: {}", got.max_diff(&want));
        }
    }

    #[test]
    fn monomials_span_su2_and_su4() {
        let enc = EncodedBlock::with_default_generators(Model::Strong, 4, 0).unwrap();
        assert_eq!(lie_monomials(&enc, 6).unwrap().len(), 3);
        let enc = EncodedBlock::with_default_generators(Model::Strong, 5, 3).unwrap();
        assert_eq!(lie_monomials(&enc, 8).unwrap().len(), 15);
    }

    #[test]
    fn primitive_target_is_one_pulse() {
        let enc = EncodedBlock::with_default_generators(Model::Strong, 4, 0).unwrap();
        let target = exp_i_hermitian(enc.encoded(0), std::f64::consts::PI / 7.0).unwrap();
        let seq = compile(&enc, &target, CompileOptions::default()).unwrap();
        assert_eq!(seq.length, 1);
        assert!(seq.achieved_error <= 1e-12, "{}", seq.achieved_error);
    }

    #[test]
    fn random_su2_on_three_qubits() {
        let prims = vec![
            Primitive::single(3, OperatorKind::exchange(1, 2)),
            Primitive::single(3, OperatorKind::exchange(2, 3)),
        ];
        let enc = EncodedBlock::for_model(Model::Strong, 3, 1, prims).unwrap();
        let mut rng = seeded(11);
        let u = haar_special_unitary(&mut rng, 2);
        let seq = compile(&enc, &u, CompileOptions::default()).unwrap();
        assert!(seq.achieved_error <= 1e-3);
        assert!(seq.max_prefix_leakage <= PREFIX_LEAKAGE_TOL);
        assert_eq!(enc.replay_error(&seq).unwrap(), seq.achieved_error);
    }

    #[test]
    fn diagonal_target_on_four_dim_block() {
        let enc = EncodedBlock::with_default_generators(Model::Strong, 5, 3).unwrap();
        assert_eq!(enc.dim(), 4);
        let target = ComplexMatrix::from_diagonal(&[c(-1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]);
        let seq = compile(&enc, &target, CompileOptions::default()).unwrap();
        assert!(seq.achieved_error <= 1e-3);
        assert!(seq.length > 0);
    }

    #[test]
    fn length_monotone_in_epsilon() {
        let enc = EncodedBlock::with_default_generators(Model::Strong, 4, 0).unwrap();
        let u = haar_special_unitary(&mut seeded(3), 2);
        let lens: Vec<usize> = [1e-1, 1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&eps| compile(&enc, &u, CompileOptions { epsilon: eps, ..Default::default() }).unwrap().length)
            .collect();
        assert!(lens.windows(2).all(|w| w[0] <= w[1]), "{lens:?}");
    }

    #[test]
    fn cap_reports_unattainable() {
        let enc = EncodedBlock::with_default_generators(Model::Strong, 4, 0).unwrap();
        let u = haar_special_unitary(&mut seeded(5), 2);
        let opts = CompileOptions { epsilon: 1e-9, step_cap: 64, ..Default::default() };
        assert!(matches!(compile(&enc, &u, opts), Err(Error::Unattainable { .. })));
    }

    #[test]
    fn deterministic() {
        let enc = EncodedBlock::with_default_generators(Model::Strong, 4, 0).unwrap();
        let u = haar_special_unitary(&mut seeded(9), 2);
        let a = compile(&enc, &u, CompileOptions::default()).unwrap();
        let b = compile(&enc, &u, CompileOptions::default()).unwrap();
        assert_eq!(a.steps, b.steps);
    }
}
