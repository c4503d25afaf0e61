//! System operators on `n` qubits: single-site Paulis, collective sums,
//! partial total-spin observables, exchange, the two-qubit family commuting
//! with `P(θ)⊗P(θ)`, and Heisenberg Hamiltonians.
//!
//! Qubit 1 is the most significant bit of a computational-basis index.

use serde::{Deserialize, Serialize};

use crate::config;
use crate::matrix::{c, commutator, pauli, ComplexMatrix, ZERO};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub const ALL: [PauliAxis; 3] = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z];

    pub fn matrix(self) -> ComplexMatrix {
        match self {
            PauliAxis::X => pauli::x(),
            PauliAxis::Y => pauli::y(),
            PauliAxis::Z => pauli::z(),
        }
    }
}

/// What to build. Site and qubit indices are 1-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorKind {
    Identity,
    Sigma {
        axis: PauliAxis,
        site: usize,
    },
    Collective {
        axis: PauliAxis,
    },
    /// `(s^k)² = Σ_α (½ Σ_{i≤k} σ_α^i)²`, eigenvalue `J_k(J_k+1)`.
    PartialSq {
        k: usize,
    },
    Exchange {
        i: usize,
        j: usize,
    },
    /// `T_ij(z1..z4, h)` in the `{|00⟩,|01⟩,|10⟩,|11⟩}` basis of qubits `(i, j)`.
    TFamily {
        i: usize,
        j: usize,
        z: [f64; 4],
        h: [f64; 2],
    },
    /// `Σ ε_j σ_z^j + ½ Σ_{i,j} J_ij σ_i·σ_j`.
    Heisenberg {
        eps: Vec<f64>,
        couplings: Vec<Vec<f64>>,
    },
}

impl OperatorKind {
    pub fn exchange(i: usize, j: usize) -> Self {
        OperatorKind::Exchange { i, j }
    }

    /// `diag(1,0,0,0)` on `(i, j)`: phase on `|00⟩`.
    pub fn t_p(i: usize, j: usize) -> Self {
        OperatorKind::TFamily { i, j, z: [1.0, 0.0, 0.0, 0.0], h: [0.0, 0.0] }
    }

    /// `diag(0,0,0,1)` on `(i, j)`: phase on `|11⟩`.
    pub fn t_q(i: usize, j: usize) -> Self {
        OperatorKind::TFamily { i, j, z: [0.0, 0.0, 0.0, 1.0], h: [0.0, 0.0] }
    }

    /// `diag(0,0,1,0)` on `(1, 2)`: phase on `|10⟩`.
    pub fn z_bar_12() -> Self {
        OperatorKind::TFamily { i: 1, j: 2, z: [0.0, 0.0, 1.0, 0.0], h: [0.0, 0.0] }
    }

    /// Short label used in schedules and reports (e.g. `E12`, `TP23`).
    pub fn label(&self) -> String {
        match self {
            OperatorKind::Identity => "I".into(),
            OperatorKind::Sigma { axis, site } => format!("sigma_{axis:?}{site}").to_lowercase(),
            OperatorKind::Collective { axis } => format!("S{axis:?}").to_lowercase(),
            OperatorKind::PartialSq { k } => format!("s2_{k}"),
            OperatorKind::Exchange { i, j } => format!("E{i}{j}"),
            OperatorKind::TFamily { i, j, z, h } => match (z, h) {
                ([1.0, 0.0, 0.0, 0.0], [0.0, 0.0]) => format!("TP{i}{j}"),
                ([0.0, 0.0, 0.0, 1.0], [0.0, 0.0]) => format!("TQ{i}{j}"),
                ([0.0, 0.0, 1.0, 0.0], [0.0, 0.0]) => format!("A{i}{j}"),
                _ => format!("T{i}{j}"),
            },
            OperatorKind::Heisenberg { .. } => "H_heis".into(),
        }
    }

    /// Parses a short label: `I`, `E12`, `TP12`, `TQ12`, `A12`, `Sx`, `sx3`.
    pub fn parse_label(label: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("unknown operator label {label:?}"));
        let pair = |digits: &str| -> Result<(usize, usize)> {
            let parts: Vec<&str> = digits.split(',').collect();
            let (a, b) = match parts.as_slice() {
                [a, b] => (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?),
                [ab] if ab.len() == 2 => (ab[..1].parse().map_err(|_| bad())?, ab[1..].parse().map_err(|_| bad())?),
                _ => return Err(bad()),
            };
            Ok((a, b))
        };
        let axis = |ch: &str| match ch {
            "x" | "X" => Ok(PauliAxis::X),
            "y" | "Y" => Ok(PauliAxis::Y),
            "z" | "Z" => Ok(PauliAxis::Z),
            _ => Err(bad()),
        };
        if label == "I" {
            return Ok(OperatorKind::Identity);
        }
        if let Some(rest) = label.strip_prefix("TP") {
            let (i, j) = pair(rest)?;
            return Ok(Self::t_p(i, j));
        }
        if let Some(rest) = label.strip_prefix("TQ") {
            let (i, j) = pair(rest)?;
            return Ok(Self::t_q(i, j));
        }
        if let Some(rest) = label.strip_prefix('A') {
            let (i, j) = pair(rest)?;
            return Ok(OperatorKind::TFamily { i, j, z: [0.0, 0.0, 1.0, 0.0], h: [0.0, 0.0] });
        }
        if let Some(rest) = label.strip_prefix('E') {
            let (i, j) = pair(rest)?;
            return Ok(Self::exchange(i, j));
        }
        if let Some(rest) = label.strip_prefix('S') {
            return Ok(OperatorKind::Collective { axis: axis(rest)? });
        }
        if let Some(rest) = label.strip_prefix('s') {
            if rest.len() >= 2 {
                let site = rest[1..].parse().map_err(|_| bad())?;
                return Ok(OperatorKind::Sigma { axis: axis(&rest[..1])?, site });
            }
        }
        Err(bad())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub n: usize,
    #[serde(flatten)]
    pub kind: OperatorKind,
}

impl OperatorSpec {
    pub fn new(n: usize, kind: OperatorKind) -> Self {
        Self { n, kind }
    }

    pub fn build(&self) -> Result<ComplexMatrix> {
        build(self.n, &self.kind)
    }
}

fn check_site(n: usize, site: usize) -> Result<()> {
    if site == 0 || site > n {
        return Err(Error::InvalidIndex(format!("qubit {site} outside 1..={n}")));
    }
    Ok(())
}

fn check_pair(n: usize, i: usize, j: usize) -> Result<()> {
    check_site(n, i)?;
    check_site(n, j)?;
    if i == j {
        return Err(Error::InvalidIndex(format!("two-qubit operator needs distinct qubits, got ({i}, {j})")));
    }
    Ok(())
}

/// A 2×2 operator acting on `site` of `n` qubits.
pub fn embed_one(n: usize, site: usize, op: &ComplexMatrix) -> Result<ComplexMatrix> {
    let dim = config::qubit_dim(n)?;
    check_site(n, site)?;
    let shift = n - site;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for col in 0..dim {
        let b = (col >> shift) & 1;
        let base = col & !(1 << shift);
        for a in 0..2 {
            let z = op.get(a, b);
            if z != ZERO {
                out.set(base | (a << shift), col, z);
            }
        }
    }
    Ok(out)
}

/// A 4×4 operator acting on qubits `(i, j)`; local index is `2·b_i + b_j`.
pub fn embed_two(n: usize, i: usize, j: usize, op: &ComplexMatrix) -> Result<ComplexMatrix> {
    let dim = config::qubit_dim(n)?;
    check_pair(n, i, j)?;
    let (si, sj) = (n - i, n - j);
    let mut out = ComplexMatrix::zeros(dim, dim);
    for col in 0..dim {
        let local_in = 2 * ((col >> si) & 1) + ((col >> sj) & 1);
        let base = col & !(1 << si) & !(1 << sj);
        for local_out in 0..4 {
            let z = op.get(local_out, local_in);
            if z != ZERO {
                let row = base | ((local_out >> 1) << si) | ((local_out & 1) << sj);
                out.set(row, col, z);
            }
        }
    }
    Ok(out)
}

/// The 4×4 matrix of `T(z1..z4, h)`.
pub fn t_family_local(z: [f64; 4], h: [f64; 2]) -> ComplexMatrix {
    let hz = c(h[0], h[1]);
    let mut m = ComplexMatrix::from_diagonal(&z.map(|x| c(x, 0.0)));
    m.set(1, 2, hz);
    m.set(2, 1, hz.conj());
    m
}

pub fn build(n: usize, kind: &OperatorKind) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::InvalidIndex("need at least one qubit".into()));
    }
    let dim = config::qubit_dim(n)?;
    match kind {
        OperatorKind::Identity => Ok(ComplexMatrix::identity(dim)),
        OperatorKind::Sigma { axis, site } => embed_one(n, *site, &axis.matrix()),
        OperatorKind::Collective { axis } => collective(n, *axis),
        OperatorKind::PartialSq { k } => partial_sq(n, *k),
        OperatorKind::Exchange { i, j } => exchange(n, *i, *j),
        OperatorKind::TFamily { i, j, z, h } => {
            if z.iter().chain(h.iter()).any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput("T-family parameters must be finite".into()));
            }
            embed_two(n, *i, *j, &t_family_local(*z, *h))
        }
        OperatorKind::Heisenberg { eps, couplings } => heisenberg(n, eps, couplings),
    }
}

pub fn collective(n: usize, axis: PauliAxis) -> Result<ComplexMatrix> {
    partial_collective(n, n, axis)
}

/// `S_α^k = Σ_{i≤k} σ_α^i`.
pub fn partial_collective(n: usize, k: usize, axis: PauliAxis) -> Result<ComplexMatrix> {
    let dim = config::qubit_dim(n)?;
    if k == 0 || k > n {
        return Err(Error::InvalidIndex(format!("partial collective k = {k} outside 1..={n}")));
    }
    let single = axis.matrix();
    let mut out = ComplexMatrix::zeros(dim, dim);
    for site in 1..=k {
        out += &embed_one(n, site, &single)?;
    }
    Ok(out)
}

/// `(s^k)²` from its definition as a sum of squares.
pub fn partial_sq(n: usize, k: usize) -> Result<ComplexMatrix> {
    let mut out = ComplexMatrix::zeros(1 << n, 1 << n);
    for axis in PauliAxis::ALL {
        let s = partial_collective(n, k, axis)?;
        out += &(&s * &s);
    }
    Ok(out.scale_real(0.25))
}

pub fn exchange(n: usize, i: usize, j: usize) -> Result<ComplexMatrix> {
    embed_two(n, i, j, &t_family_local([1.0, 0.0, 0.0, 1.0], [1.0, 0.0]))
}

pub fn heisenberg(n: usize, eps: &[f64], couplings: &[Vec<f64>]) -> Result<ComplexMatrix> {
    if eps.len() != n || couplings.len() != n || couplings.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch(format!(
            "Heisenberg parameters must be n = {n} fields and an n×n coupling matrix"
        )));
    }
    let asymmetric = couplings
        .iter()
        .enumerate()
        .any(|(a, row)| row.iter().enumerate().any(|(b, x)| (x - couplings[b][a]).abs() > 1e-12));
    if asymmetric {
        return Err(Error::InvalidInput("coupling matrix must be symmetric".into()));
    }
    let dim = config::qubit_dim(n)?;
    let mut h = ComplexMatrix::zeros(dim, dim);
    for (site, &e) in eps.iter().enumerate() {
        if e != 0.0 {
            h += &embed_one(n, site + 1, &pauli::z())?.scale_real(e);
        }
    }
    for (a, row) in couplings.iter().enumerate() {
        for (b, &jab) in row.iter().enumerate() {
            if jab == 0.0 {
                continue;
            }
            // σ_a·σ_b = 2E_ab - I off the diagonal, 3I on it
            let dot = if a == b {
                ComplexMatrix::identity(dim).scale_real(3.0)
            } else {
                &exchange(n, a + 1, b + 1)?.scale_real(2.0) - &ComplexMatrix::identity(dim)
            };
            h += &dot.scale_real(0.5 * jab);
        }
    }
    Ok(h)
}

/// Weighted sum `Σ w_k · build(kind_k)`.
pub fn build_sum(n: usize, terms: &[(f64, OperatorKind)]) -> Result<ComplexMatrix> {
    let dim = config::qubit_dim(n)?;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for (w, kind) in terms {
        out += &build(n, kind)?.scale_real(*w);
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutatorReport {
    pub n: usize,
    pub max_norm: f64,
    pub tol: f64,
    pub pass: bool,
}

/// `max_{k,l} ‖[(S^k)², (S^l)²]‖_max` over all partial total-spin observables.
pub fn check_commuting_family(n: usize) -> Result<CommutatorReport> {
    let tol = 1e-10;
    let squares: Vec<ComplexMatrix> =
        (1..=n).map(|k| partial_sq(n, k).map(|m| m.scale_real(4.0))).collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    for k in 0..n {
        for l in (k + 1)..n {
            worst = worst.max(commutator(&squares[k], &squares[l])?.max_abs());
        }
    }
    Ok(CommutatorReport { n, max_norm: worst, tol, pass: worst <= tol })
}

/// `‖[H_Heis, S_z]‖_max`.
pub fn check_heisenberg_preserves_wcd(n: usize, eps: &[f64], couplings: &[Vec<f64>]) -> Result<CommutatorReport> {
    let tol = 1e-10;
    let h = heisenberg(n, eps, couplings)?;
    let sz = collective(n, PauliAxis::Z)?;
    let norm = commutator(&h, &sz)?.max_abs();
    Ok(CommutatorReport { n, max_norm: norm, tol, pass: norm <= tol })
}

/// Levi-Civita symbol on axis indices.
pub fn levi_civita(a: PauliAxis, b: PauliAxis, g: PauliAxis) -> f64 {
    let idx = |p: PauliAxis| p as i32;
    let (a, b, g) = (idx(a), idx(b), idx(g));
    if a == b || b == g || a == g {
        0.0
    } else if (a, b, g) == (0, 1, 2) || (a, b, g) == (1, 2, 0) || (a, b, g) == (2, 0, 1) {
        1.0
    } else {
        -1.0
    }
}

/// `σ_α^i σ_α^j` summed over the three axes.
pub fn pauli_dot(n: usize, i: usize, j: usize) -> Result<ComplexMatrix> {
    let dim = config::qubit_dim(n)?;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for axis in PauliAxis::ALL {
        out += &(&embed_one(n, i, &axis.matrix())? * &embed_one(n, j, &axis.matrix())?);
    }
    Ok(out)
}

/// Tensor product of one-qubit operators, qubit 1 first.
pub fn pauli_string(ops: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let n = ops.len();
    let dim = config::qubit_dim(n)?;
    let mut out = ComplexMatrix::identity(dim);
    for (k, op) in ops.iter().enumerate() {
        out = &out * &embed_one(n, k + 1, op)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{StateVector, I};

    #[test]
    fn exchange_swaps_01_and_10() {
        let e = build(2, &OperatorKind::exchange(1, 2)).unwrap();
        let out = e.mul_vec(&StateVector::basis(4, 0b01)).unwrap();
        assert_eq!(out, StateVector::basis(4, 0b10));
    }

    #[test]
    fn collective_z_two_qubits() {
        let sz = build(2, &OperatorKind::Collective { axis: PauliAxis::Z }).unwrap();
        let want = ComplexMatrix::from_diagonal(&[c(2.0, 0.0), ZERO, ZERO, c(-2.0, 0.0)]);
        assert_eq!(sz, want);
    }

    #[test]
    fn qubit_one_is_most_significant() {
        let x1 = build(3, &OperatorKind::Sigma { axis: PauliAxis::X, site: 1 }).unwrap();
        let out = x1.mul_vec(&StateVector::basis(8, 0)).unwrap();
        assert_eq!(out, StateVector::basis(8, 0b100));
    }

    #[test]
    fn partial_sq_is_a_sum_of_exchanges() {
        for n in 1..=5 {
            for k in 1..=n {
                let direct = partial_sq(n, k).unwrap();
                let kk = k as f64;
                let mut via = ComplexMatrix::identity(1 << n).scale_real(kk * (1.0 - kk / 4.0));
                for i in 1..=k {
                    for j in 1..=k {
                        if i != j {
                            via += &exchange(n, i, j).unwrap().scale_real(0.5);
                        }
                    }
                }
                assert!(direct.max_diff(&via) < 1e-12, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn exchange_expansion_and_involution() {
        let n = 4;
        for i in 1..=n {
            for j in 1..=n {
                if i == j {
                    continue;
                }
                let e = exchange(n, i, j).unwrap();
                let expanded = (&ComplexMatrix::identity(16) + &pauli_dot(n, i, j).unwrap()).scale_real(0.5);
                assert!(e.max_diff(&expanded) < 1e-12);
                assert!(e.is_hermitian(0.0));
                assert!((&e * &e).max_diff(&ComplexMatrix::identity(16)) < 1e-15);
            }
        }
    }

    #[test]
    fn collective_su2_relations() {
        // [S_α, S_β] = 2i ε_αβγ S_γ with the Pauli matrices as given
        for n in 1..=6 {
            let s: Vec<ComplexMatrix> = PauliAxis::ALL.iter().map(|&a| collective(n, a).unwrap()).collect();
            for (ia, &a) in PauliAxis::ALL.iter().enumerate() {
                for (ib, &b) in PauliAxis::ALL.iter().enumerate() {
                    let lhs = commutator(&s[ia], &s[ib]).unwrap();
                    let mut rhs = ComplexMatrix::zeros(1 << n, 1 << n);
                    for (ig, &g) in PauliAxis::ALL.iter().enumerate() {
                        rhs += &s[ig].scale(I * 2.0 * levi_civita(a, b, g));
                    }
                    assert!(lhs.max_diff(&rhs) < 1e-10, "n={n}");
                }
            }
        }
    }

    #[test]
    fn sx_sz_commutator_on_two_qubits() {
        let sx = collective(2, PauliAxis::X).unwrap();
        let sy = collective(2, PauliAxis::Y).unwrap();
        let sz = collective(2, PauliAxis::Z).unwrap();
        let lhs = commutator(&sx, &sz).unwrap();
        assert!(lhs.max_diff(&sy.scale(c(0.0, -2.0))) < 1e-14);
    }

    #[test]
    fn invalid_indices() {
        assert!(matches!(build(3, &OperatorKind::exchange(1, 1)), Err(Error::InvalidIndex(_))));
        assert!(matches!(build(3, &OperatorKind::exchange(0, 2)), Err(Error::InvalidIndex(_))));
        assert!(matches!(build(3, &OperatorKind::Sigma { axis: PauliAxis::X, site: 4 }), Err(Error::InvalidIndex(_))));
        assert!(build(3, &OperatorKind::PartialSq { k: 4 }).is_err());
    }

    #[test]
    fn commuting_family_small() {
        assert_eq!(check_commuting_family(1).unwrap().max_norm, 0.0);
        assert!(check_commuting_family(3).unwrap().pass);
        assert!(check_commuting_family(5).unwrap().pass);
    }

    #[test]
    fn heisenberg_commutes_with_sz() {
        let r = check_heisenberg_preserves_wcd(2, &[1.0, 1.0], &[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(r.pass);
        let r = check_heisenberg_preserves_wcd(2, &[0.3, -2.0], &[vec![0.0; 2], vec![0.0; 2]]).unwrap();
        assert_eq!(r.max_norm, 0.0);
        assert!(heisenberg(2, &[0.0, 0.0], &[vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
    }

    #[test]
    fn t_family_is_hermitian_and_commutes_with_phase_pair() {
        let t = build(3, &OperatorKind::TFamily { i: 3, j: 1, z: [0.1, -0.4, 2.0, 1.5], h: [0.3, -0.8] }).unwrap();
        assert!(t.is_hermitian(1e-15));
        let sz = collective(3, PauliAxis::Z).unwrap();
        assert!(commutator(&t, &sz).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn build_is_deterministic() {
        let k = OperatorKind::Heisenberg {
            eps: vec![0.1, 0.2, 0.3],
            couplings: vec![vec![0.0, 1.0, 0.5], vec![1.0, 0.0, 0.2], vec![0.5, 0.2, 0.0]],
        };
        assert_eq!(build(3, &k).unwrap(), build(3, &k).unwrap());
    }

    #[test]
    fn labels_round_trip() {
        for k in [
            OperatorKind::exchange(1, 2),
            OperatorKind::t_p(2, 3),
            OperatorKind::t_q(1, 2),
            OperatorKind::z_bar_12(),
            OperatorKind::Identity,
        ] {
            assert_eq!(OperatorKind::parse_label(&k.label()).unwrap(), k);
        }
        assert!(OperatorKind::parse_label("Q12").is_err());
    }

    #[test]
    fn spec_json_schema() {
        let spec = OperatorSpec::new(3, OperatorKind::exchange(1, 3));
        let s = serde_json::to_string(&spec).unwrap();
        assert_eq!(s, r#"{"n":3,"kind":"exchange","i":1,"j":3}"#);
        let back: OperatorSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, spec);
    }
}
