//! Closed forms for states two recursion steps deep, written in terms of
//! the `(n−2)`-qubit prefix states.

use serde::{Deserialize, Serialize};

use super::paths::{check_strong_label, enumerate_scd_paths, ScdPath};
use super::{fmt_two_j, scd_path_states};
use crate::matrix::{c, StateVector, ZERO};
use crate::{Error, Result};

/// The last two steps, named by where each one comes from:
/// `T` for a step down (from the top), `B` for a step up (from the bottom).
/// `TT` = down, down; `BT` = up, down; `TB` = down, up; `BB` = up, up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TwoDeepKind {
    TT,
    BT,
    TB,
    BB,
}

impl TwoDeepKind {
    pub const ALL: [TwoDeepKind; 4] = [TwoDeepKind::TT, TwoDeepKind::BT, TwoDeepKind::TB, TwoDeepKind::BB];

    pub fn steps(self) -> [i8; 2] {
        match self {
            TwoDeepKind::TT => [-1, -1],
            TwoDeepKind::BT => [1, -1],
            TwoDeepKind::TB => [-1, 1],
            TwoDeepKind::BB => [1, 1],
        }
    }

    /// `2J` of the prefix for a final `2J`, if non-negative.
    pub fn prefix_two_j(self, two_j: usize) -> Option<usize> {
        let [a, b] = self.steps();
        let p = two_j as i64 - i64::from(a) - i64::from(b);
        // the intermediate value must also be non-negative
        (p >= 0 && p + i64::from(a) >= 0).then_some(p as usize)
    }
}

#[derive(Clone, Debug)]
pub struct TwoDeepStates {
    pub tt: Option<StateVector>,
    pub bt: Option<StateVector>,
    pub tb: Option<StateVector>,
    pub bb: Option<StateVector>,
}

impl TwoDeepStates {
    pub fn get(&self, kind: TwoDeepKind) -> Option<&StateVector> {
        match kind {
            TwoDeepKind::TT => self.tt.as_ref(),
            TwoDeepKind::BT => self.bt.as_ref(),
            TwoDeepKind::TB => self.tb.as_ref(),
            TwoDeepKind::BB => self.bb.as_ref(),
        }
    }
}

/// Appends the two-qubit basis state `|a b⟩`.
fn with_pair(v: &StateVector, a: usize, b: usize) -> StateVector {
    let mut out = vec![ZERO; 4 * v.dim()];
    for (idx, &z) in v.amps().iter().enumerate() {
        out[4 * idx + 2 * a + b] = z;
    }
    StateVector::new(out)
}

/// Closed-form two-deep state on top of `prefix`, ending at `2J = two_j`.
pub fn two_deep_state(prefix: &ScdPath, two_j: usize, kind: TwoDeepKind) -> Result<StateVector> {
    let missing = || {
        Error::BoundaryCase(format!(
            "{kind:?} state with J = {} on a prefix with J = {}",
            fmt_two_j(two_j),
            fmt_two_j(prefix.two_j())
        ))
    };
    if prefix.is_empty() {
        return Err(Error::BoundaryCase("two-deep states need n ≥ 3".into()));
    }
    let want = kind.prefix_two_j(two_j).ok_or_else(missing)?;
    if want != prefix.two_j() {
        return Err(missing());
    }
    let m = scd_path_states(prefix)?;
    let j2 = two_j as f64;
    let term = |k: usize, a: usize, b: usize, coef: f64| with_pair(&m[k], a, b).scale(c(coef, 0.0));
    let state = match kind {
        TwoDeepKind::TT => {
            let d = (j2 + 2.0) * (j2 + 3.0);
            term(0, 0, 0, ((j2 + 1.0) / (j2 + 3.0)).sqrt())
                .add(&term(1, 1, 0, -((j2 + 1.0) / d).sqrt()))
                .add(&term(1, 0, 1, -((j2 + 1.0) / d).sqrt()))
                .add(&term(2, 1, 1, (2.0 / d).sqrt()))
        }
        TwoDeepKind::BT => {
            let mut s = term(0, 1, 0, -((j2 + 1.0) / (j2 + 2.0)).sqrt()).add(&term(
                0,
                0,
                1,
                1.0 / ((j2 + 2.0) * (j2 + 1.0)).sqrt(),
            ));
            if two_j > 0 {
                s = s.add(&term(1, 1, 1, (j2 / ((j2 + 1.0) * (j2 + 2.0))).sqrt()));
            }
            s
        }
        TwoDeepKind::TB => term(0, 0, 1, -(j2 / (j2 + 1.0)).sqrt()).add(&term(1, 1, 1, 1.0 / (j2 + 1.0).sqrt())),
        TwoDeepKind::BB => term(0, 1, 1, 1.0),
    };
    Ok(state)
}

/// The four two-deep states for `(n, J)`, each built on the first prefix
/// path (in block order) that supports it. Absent states are `None`.
pub fn two_deep_states(n: usize, two_j: usize) -> Result<TwoDeepStates> {
    check_strong_label(n, two_j)?;
    if n < 3 {
        return Err(Error::BoundaryCase(format!("two-deep states need n ≥ 3, got {n}")));
    }
    let build = |kind: TwoDeepKind| -> Result<Option<StateVector>> {
        let Some(p2j) = kind.prefix_two_j(two_j) else { return Ok(None) };
        if check_strong_label(n - 2, p2j).is_err() {
            return Ok(None);
        }
        match enumerate_scd_paths(n - 2, p2j)?.first() {
            Some(prefix) => two_deep_state(prefix, two_j, kind).map(Some),
            None => Ok(None),
        }
    };
    Ok(TwoDeepStates {
        tt: build(TwoDeepKind::TT)?,
        bt: build(TwoDeepKind::BT)?,
        tb: build(TwoDeepKind::TB)?,
        bb: build(TwoDeepKind::BB)?,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{scd_maximal_state, strong_labels};
    use super::*;

    #[test]
    fn closed_forms_match_the_recursion() {
        for n in 3..=8 {
            for tj in strong_labels(n) {
                for kind in TwoDeepKind::ALL {
                    let Some(p2j) = kind.prefix_two_j(tj) else { continue };
                    if check_strong_label(n - 2, p2j).is_err() {
                        continue;
                    }
                    for prefix in enumerate_scd_paths(n - 2, p2j).unwrap() {
                        let [a, b] = kind.steps();
                        let full = prefix.extended(a).unwrap().extended(b).unwrap();
                        let want = scd_maximal_state(&full).unwrap();
                        let got = two_deep_state(&prefix, tj, kind).unwrap();
                        assert!(got.max_diff(&want) < 1e-12, "n={n} 2J={tj} {kind:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn bb_is_prefix_with_two_ups() {
        let prefix = ScdPath::new(vec![1, 1, -1, 1]).unwrap();
        let got = two_deep_state(&prefix, 4, TwoDeepKind::BB).unwrap();
        let m = scd_maximal_state(&prefix).unwrap();
        assert!(got.max_diff(&with_pair(&m, 1, 1)) < 1e-15);
    }

    #[test]
    fn tb_at_half() {
        let prefix = ScdPath::new(vec![1]).unwrap();
        let got = two_deep_state(&prefix, 1, TwoDeepKind::TB).unwrap();
        let h = 0.5f64.sqrt();
        // -√½ |1⟩|0⟩|1⟩ + √½ |0⟩|1⟩|1⟩
        assert!((got.amp(0b101) - c(-h, 0.0)).norm() < 1e-15);
        assert!((got.amp(0b011) - c(h, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn missing_states_are_boundary_cases() {
        let s = two_deep_states(3, 3).unwrap();
        assert!(s.tt.is_none() && s.bt.is_none() && s.tb.is_none() && s.bb.is_some());
        let s = two_deep_states(4, 0).unwrap();
        assert!(s.tt.is_some() && s.bt.is_some() && s.tb.is_none() && s.bb.is_none());
        assert!(matches!(two_deep_states(2, 0), Err(Error::BoundaryCase(_))));
        let prefix = ScdPath::new(vec![1, -1]).unwrap();
        assert!(matches!(two_deep_state(&prefix, 0, TwoDeepKind::TB), Err(Error::BoundaryCase(_))));
    }
}
