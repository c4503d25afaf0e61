//! Pulse schedules for encoded gates.
//!
//! A pulse switches one primitive Hamiltonian `H` on for a signed duration
//! `t` and applies `e^{itH}`. Schedules are listed in time order, so the
//! first pulse acts first. Everything is evaluated on the path (λ) factor of
//! one DFS block, with each primitive's block trace removed: a global phase
//! on the block carries no encoded information, and all distances here are
//! taken modulo it.

mod synth;

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::basis::{self, DfsBlock, Model};
use crate::lie::restrict;
use crate::matrix::{commutator, exp_i_hermitian, mat_exp, phase_free_distance, trace_distance, ComplexMatrix};
use crate::operators::{build_sum, OperatorKind};
use crate::{Error, Result};

pub use synth::{compile, euler_su2, lie_monomials, CompileOptions, Derivation, Monomial};

/// Default cap on the number of pulses in one schedule.
pub const DEFAULT_STEP_CAP: usize = 1 << 20;
/// Largest tolerated leakage of any running product out of the block.
pub const PREFIX_LEAKAGE_TOL: f64 = 1e-8;

/// A switchable Hamiltonian: a fixed real combination of operators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    pub name: String,
    pub n: usize,
    pub terms: Vec<(f64, OperatorKind)>,
}

impl Primitive {
    pub fn single(n: usize, kind: OperatorKind) -> Self {
        Self { name: kind.label(), n, terms: vec![(1.0, kind)] }
    }

    pub fn combination(name: impl Into<String>, n: usize, terms: Vec<(f64, OperatorKind)>) -> Self {
        Self { name: name.into(), n, terms }
    }

    pub fn build(&self) -> Result<ComplexMatrix> {
        build_sum(self.n, &self.terms)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub primitive: usize,
    pub duration: f64,
}

impl Pulse {
    pub fn new(primitive: usize, duration: f64) -> Self {
        Self { primitive, duration }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PulseSequence {
    pub model: Model,
    pub n: usize,
    #[serde(rename = "twoJ")]
    pub two_j: i64,
    pub primitives: Vec<Primitive>,
    pub steps: Vec<Pulse>,
    pub target: ComplexMatrix,
    pub achieved_error: f64,
    pub length: usize,
    pub max_prefix_leakage: f64,
}

/// A block together with the primitives available on it.
#[derive(Clone, Debug)]
pub struct EncodedBlock {
    pub block: DfsBlock,
    pub primitives: Vec<Primitive>,
    full: Vec<ComplexMatrix>,
    encoded: Vec<ComplexMatrix>,
}

type PulseCache = HashMap<(usize, u64), ComplexMatrix>;

impl EncodedBlock {
    /// Fails with [`Error::Leakage`] if a primitive leaves the block or acts
    /// on its noise-exposed factor.
    pub fn new(block: DfsBlock, primitives: Vec<Primitive>) -> Result<Self> {
        let mut full = Vec::with_capacity(primitives.len());
        let mut encoded = Vec::with_capacity(primitives.len());
        for p in &primitives {
            if p.n != block.n {
                return Err(Error::DimensionMismatch(format!(
                    "primitive {} is on {} qubits, block on {}",
                    p.name, p.n, block.n
                )));
            }
            let h = p.build()?;
            let r = restrict(&h, std::slice::from_ref(&block))?;
            encoded.push(r.blocks[0].traceless().hermitian_part());
            full.push(h);
        }
        Ok(Self { block, primitives, full, encoded })
    }

    pub fn for_model(model: Model, n: usize, two_j: i64, primitives: Vec<Primitive>) -> Result<Self> {
        Self::new(basis::block(model, n, two_j)?, primitives)
    }

    /// Block with the model's default generators as single-operator primitives.
    pub fn with_default_generators(model: Model, n: usize, two_j: i64) -> Result<Self> {
        let prims = crate::lie::default_generators(model, n).into_iter().map(|k| Primitive::single(n, k)).collect();
        Self::for_model(model, n, two_j, prims)
    }

    /// Size of the encoded (path) factor.
    pub fn dim(&self) -> usize {
        self.block.n_j
    }

    /// Traceless action of primitive `k` on the path factor.
    pub fn encoded(&self, k: usize) -> &ComplexMatrix {
        &self.encoded[k]
    }

    pub fn len(&self) -> usize {
        self.primitives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primitives.is_empty()
    }

    fn check_pulse(&self, p: &Pulse) -> Result<()> {
        if p.primitive >= self.len() {
            return Err(Error::InvalidIndex(format!("primitive {} of {}", p.primitive, self.len())));
        }
        if !p.duration.is_finite() {
            return Err(Error::InvalidInput("non-finite pulse duration".into()));
        }
        Ok(())
    }

    fn cached<'a>(cache: &'a mut PulseCache, hams: &[ComplexMatrix], p: &Pulse) -> Result<&'a ComplexMatrix> {
        let key = (p.primitive, p.duration.to_bits());
        if let Entry::Vacant(e) = cache.entry(key) {
            e.insert(exp_i_hermitian(&hams[p.primitive], p.duration)?);
        }
        Ok(&cache[&key])
    }

    /// Encoded unitary of a schedule.
    pub fn product(&self, steps: &[Pulse]) -> Result<ComplexMatrix> {
        let mut cache = PulseCache::new();
        let mut u = ComplexMatrix::identity(self.dim());
        for p in steps {
            self.check_pulse(p)?;
            u = Self::cached(&mut cache, &self.encoded, p)? * &u;
        }
        Ok(u)
    }

    /// Worst leakage of the running full-space product out of the block, over
    /// every prefix of the schedule.
    pub fn prefix_leakage(&self, steps: &[Pulse]) -> Result<f64> {
        let mut cache = PulseCache::new();
        let b = &self.block.basis;
        let bd = b.dagger();
        let mut w = b.clone();
        let mut worst: f64 = 0.0;
        for p in steps {
            self.check_pulse(p)?;
            w = Self::cached(&mut cache, &self.full, p)? * &w;
            let inside = b * &(&bd * &w);
            worst = worst.max((&w - &inside).max_abs());
        }
        Ok(worst)
    }

    /// Builds the sequence record, measuring error and prefix leakage.
    pub fn sequence(&self, steps: Vec<Pulse>, target: ComplexMatrix) -> Result<PulseSequence> {
        let u = self.product(&steps)?;
        let achieved_error = phase_free_distance(&u, &target)?;
        let max_prefix_leakage = self.prefix_leakage(&steps)?;
        Ok(PulseSequence {
            model: self.block.model,
            n: self.block.n,
            two_j: self.block.two_j,
            primitives: self.primitives.clone(),
            length: steps.len(),
            steps,
            target,
            achieved_error,
            max_prefix_leakage,
        })
    }

    /// Recomputes the error of a stored sequence from its pulses.
    pub fn replay_error(&self, seq: &PulseSequence) -> Result<f64> {
        phase_free_distance(&self.product(&seq.steps)?, &seq.target)
    }

    fn check_target(&self, target: &ComplexMatrix) -> Result<()> {
        if target.rows() != self.dim() || !target.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "target is {}×{}, encoded factor has dimension {}",
                target.rows(),
                target.cols(),
                self.dim()
            )));
        }
        Ok(())
    }
}

/// First-order product formula for `exp(i Σ t_k H_k)`: the pulses
/// `(H_k, t_k / n_steps)` cycled `n_steps` times.
pub fn trotter_compose(enc: &EncodedBlock, coeffs: &[(usize, f64)], n_steps: usize) -> Result<PulseSequence> {
    if n_steps == 0 {
        return Err(Error::InvalidInput("n_steps must be positive".into()));
    }
    let mut h = ComplexMatrix::zeros(enc.dim(), enc.dim());
    for &(k, t) in coeffs {
        enc.check_pulse(&Pulse::new(k, t))?;
        h += &enc.encoded(k).scale_real(t);
    }
    let target = exp_i_hermitian(&h, 1.0)?;
    let cycle: Vec<Pulse> = coeffs.iter().map(|&(k, t)| Pulse::new(k, t / n_steps as f64)).collect();
    let steps = cycle.iter().copied().cycle().take(cycle.len() * n_steps).collect();
    enc.sequence(steps, target)
}

/// Group-commutator formula for `exp(t [H_i, H_j])`: `n_steps` cycles of
/// `(H_i, H_j, −H_i, −H_j)`, each pulse of length `sqrt(|t| / n_steps)`.
/// Negative `t` swaps the roles of the two Hamiltonians.
pub fn commutator_compose(enc: &EncodedBlock, i: usize, j: usize, t: f64, n_steps: usize) -> Result<PulseSequence> {
    if n_steps == 0 {
        return Err(Error::InvalidInput("n_steps must be positive".into()));
    }
    enc.check_pulse(&Pulse::new(i, t))?;
    enc.check_pulse(&Pulse::new(j, t))?;
    let gen = commutator(enc.encoded(i), enc.encoded(j))?.scale_real(t);
    let target = mat_exp(&gen)?;
    let (a, b) = if t >= 0.0 { (i, j) } else { (j, i) };
    let tau = (t.abs() / n_steps as f64).sqrt();
    let cycle = [Pulse::new(a, tau), Pulse::new(b, tau), Pulse::new(a, -tau), Pulse::new(b, -tau)];
    let steps = cycle.iter().copied().cycle().take(4 * n_steps).collect();
    enc.sequence(steps, target)
}

/// `d(e^{iφH}, e^{i(φ+Δφ)H})` for an involution `H`.
pub fn faulty_gate_distance(h: &ComplexMatrix, phi: f64, dphi: f64) -> Result<f64> {
    let sq = h * h;
    let defect = sq.max_diff(&ComplexMatrix::identity(h.rows()));
    if !h.is_square() || defect > 1e-10 {
        return Err(Error::InvalidInput(format!("H² ≠ I (deviation {defect:e})")));
    }
    trace_distance(&exp_i_hermitian(h, phi)?, &exp_i_hermitian(h, phi + dphi)?)
}

/// Closed form of [`faulty_gate_distance`]: `√2·sin(Δφ/2)`.
pub fn faulty_gate_analytic(dphi: f64) -> f64 {
    2f64.sqrt() * (dphi / 2.0).sin().abs()
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// `σ_x`-like and `σ_z`-like primitives on the three-qubit `J = ½` block:
/// `(E13 − E23)/√3` and `½(−E12 + E13 + E23)`.
pub fn three_qubit_pair() -> Vec<Primitive> {
    let s3 = 1.0 / 3f64.sqrt();
    vec![
        Primitive::combination("X3", 3, vec![(s3, OperatorKind::exchange(1, 3)), (-s3, OperatorKind::exchange(2, 3))]),
        Primitive::combination(
            "Z3",
            3,
            vec![
                (-0.5, OperatorKind::exchange(1, 2)),
                (0.5, OperatorKind::exchange(1, 3)),
                (0.5, OperatorKind::exchange(2, 3)),
            ],
        ),
    ]
}
