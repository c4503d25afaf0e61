//! Path labels for the two collective models.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Weak-model path: step `+1` for a `|0⟩` qubit, `-1` for `|1⟩`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WcdPath {
    steps: Vec<i8>,
}

impl WcdPath {
    pub fn new(steps: Vec<i8>) -> Result<Self> {
        if steps.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidInput("weak path steps must be ±1".into()));
        }
        Ok(Self { steps })
    }

    /// Path of an `n`-bit string, qubit 1 first.
    pub fn from_bits(n: usize, bits: usize) -> Self {
        let steps = (1..=n).map(|k| if (bits >> (n - k)) & 1 == 0 { 1 } else { -1 }).collect();
        Self { steps }
    }

    pub fn bits(&self) -> usize {
        self.steps.iter().fold(0, |acc, &s| (acc << 1) | usize::from(s < 0))
    }

    pub fn steps(&self) -> &[i8] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn partial_sums(&self) -> Vec<i64> {
        self.steps
            .iter()
            .scan(0i64, |acc, &s| {
                *acc += i64::from(s);
                Some(*acc)
            })
            .collect()
    }

    /// Endpoint `#0 − #1`, the `S_z` eigenvalue.
    pub fn lambda(&self) -> i64 {
        self.steps.iter().map(|&s| i64::from(s)).sum()
    }
}

/// Strong-model path: step `+1` adds spin ½, `-1` subtracts it.
/// Partial sums are carried as `2J_k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScdPath {
    steps: Vec<i8>,
}

impl ScdPath {
    pub fn new(steps: Vec<i8>) -> Result<Self> {
        let mut two_j: i64 = 0;
        for (k, &s) in steps.iter().enumerate() {
            if s != 1 && s != -1 {
                return Err(Error::InvalidInput("strong path steps must be ±1 (units of ½)".into()));
            }
            two_j += i64::from(s);
            if two_j < 0 {
                return Err(Error::InvalidInput(format!("strong path goes negative at step {}", k + 1)));
            }
        }
        Ok(Self { steps })
    }

    pub fn steps(&self) -> &[i8] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `2J_1, …, 2J_n`.
    pub fn partial_two_j(&self) -> Vec<usize> {
        let mut acc = 0i64;
        self.steps
            .iter()
            .map(|&s| {
                acc += i64::from(s);
                acc as usize
            })
            .collect()
    }

    /// `2J` of the endpoint.
    pub fn two_j(&self) -> usize {
        self.steps.iter().map(|&s| i64::from(s)).sum::<i64>() as usize
    }

    pub fn prefix(&self, len: usize) -> ScdPath {
        ScdPath { steps: self.steps[..len].to_vec() }
    }

    pub fn extended(&self, step: i8) -> Result<ScdPath> {
        let mut steps = self.steps.clone();
        steps.push(step);
        ScdPath::new(steps)
    }
}

/// Checks `0 ≤ 2J ≤ n` and `2J ≡ n (mod 2)`.
pub fn check_strong_label(n: usize, two_j: usize) -> Result<()> {
    if two_j > n {
        return Err(Error::InvalidIndex(format!("2J = {two_j} exceeds n = {n}")));
    }
    if !(n - two_j).is_multiple_of(2) {
        return Err(Error::Parity { n, value: two_j as i64 });
    }
    Ok(())
}

/// Checks `|λ| ≤ n` and `λ ≡ n (mod 2)`.
pub fn check_weak_label(n: usize, lambda: i64) -> Result<()> {
    if lambda.unsigned_abs() as usize > n {
        return Err(Error::InvalidIndex(format!("|lambda| = {} exceeds n = {n}", lambda.abs())));
    }
    if (n as i64 - lambda).rem_euclid(2) != 0 {
        return Err(Error::Parity { n, value: lambda });
    }
    Ok(())
}

/// All strong paths of length `n` ending at `2J`, ordered lexicographically
/// by the partial-sum sequence `(J_1, …, J_n)`.
pub fn enumerate_scd_paths(n: usize, two_j: usize) -> Result<Vec<ScdPath>> {
    check_strong_label(n, two_j)?;
    let mut out = Vec::new();
    let mut steps = Vec::with_capacity(n);
    walk(n, two_j as i64, 0, &mut steps, &mut out);
    Ok(out)
}

fn walk(n: usize, target: i64, cur: i64, steps: &mut Vec<i8>, out: &mut Vec<ScdPath>) {
    let remaining = (n - steps.len()) as i64;
    if remaining == 0 {
        if cur == target {
            out.push(ScdPath { steps: steps.clone() });
        }
        return;
    }
    // lower partial sum first
    for s in [-1i8, 1] {
        let next = cur + i64::from(s);
        if next < 0 || (next - target).abs() > remaining - 1 {
            continue;
        }
        steps.push(s);
        walk(n, target, next, steps, out);
        steps.pop();
    }
}

/// Weak paths (equivalently bitstrings) ending at `λ`, bitstring ascending.
pub fn enumerate_wcd_paths(n: usize, lambda: i64) -> Result<Vec<WcdPath>> {
    check_weak_label(n, lambda)?;
    crate::config::qubit_dim(n)?;
    let ones = ((n as i64 - lambda) / 2) as u32;
    Ok((0..1usize << n).filter(|b| b.count_ones() == ones).map(|b| WcdPath::from_bits(n, b)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weak_path_bijection() {
        for b in 0..32 {
            let p = WcdPath::from_bits(5, b);
            assert_eq!(p.bits(), b);
            assert_eq!(p.lambda(), 5 - 2 * b.count_ones() as i64);
            assert_eq!(*p.partial_sums().last().unwrap(), p.lambda());
        }
    }

    #[test]
    fn strong_order_puts_lower_partial_sums_first() {
        let p = enumerate_scd_paths(3, 1).unwrap();
        assert_eq!(p[0].steps(), &[1, -1, 1]);
        assert_eq!(p[1].steps(), &[1, 1, -1]);
        let p = enumerate_scd_paths(4, 0).unwrap();
        assert_eq!(p[0].steps(), &[1, -1, 1, -1]);
        assert_eq!(p[1].steps(), &[1, 1, -1, -1]);
    }

    #[test]
    fn strong_paths_stay_non_negative() {
        for p in enumerate_scd_paths(8, 2).unwrap() {
            assert!(ScdPath::new(p.steps().to_vec()).is_ok());
            assert_eq!(p.two_j(), 2);
            assert_eq!(p.partial_two_j()[0], 1);
        }
        assert!(ScdPath::new(vec![1, -1, -1]).is_err());
    }

    #[test]
    fn label_checks() {
        assert!(matches!(enumerate_scd_paths(4, 1), Err(Error::Parity { .. })));
        assert!(matches!(enumerate_scd_paths(4, 6), Err(Error::InvalidIndex(_))));
        assert!(matches!(enumerate_wcd_paths(3, 0), Err(Error::Parity { .. })));
        assert!(enumerate_wcd_paths(3, -3).is_ok());
    }
}
