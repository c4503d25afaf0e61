//! Action of the last-pair exchange `E_{n−1,n}` on a strong block, compared
//! with the closed form in terms of the two-deep path classes.

use serde::Serialize;

use super::restrict;
use crate::basis::{check_strong_label, scd_full_basis, strong_labels};
use crate::matrix::{c, ComplexMatrix};
use crate::operators::exchange;
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct BoundaryReport {
    pub n: usize,
    #[serde(rename = "twoJ")]
    pub two_j: usize,
    /// Number of paths ending TT, BT, TB, BB.
    pub counts: [usize; 4],
    pub cos_theta: f64,
    pub sin_theta: f64,
    pub deviation: f64,
    pub pass: bool,
}

fn class(steps: &[i8]) -> usize {
    match (steps[steps.len() - 2], steps[steps.len() - 1]) {
        (-1, -1) => 0,
        (1, -1) => 1,
        (-1, 1) => 2,
        _ => 3,
    }
}

/// Expected restriction: identity on TT and BB paths, and on each BT/TB
/// pair sharing a prefix `[[−cos θ, sin θ], [sin θ, cos θ]]` with
/// `cos θ = 1/(2J+1)`, i.e. `tan θ = 2√(J(J+1))`.
pub fn boundary_exchange_check(n: usize, two_j: usize) -> Result<BoundaryReport> {
    check_strong_label(n, two_j)?;
    if n < 2 {
        return Err(Error::BoundaryCase("the last-pair exchange needs n ≥ 2".into()));
    }
    let block = scd_full_basis(n, two_j)?;
    let got = restrict(&exchange(n, n - 1, n)?, std::slice::from_ref(&block))?.blocks.remove(0);
    let tj = two_j as f64;
    let cos = 1.0 / (tj + 1.0);
    let sin = (tj * (tj + 2.0)).sqrt() / (tj + 1.0);
    let k = block.n_j;
    let mut want = ComplexMatrix::zeros(k, k);
    let mut counts = [0; 4];
    let classes: Vec<usize> = block.paths.iter().map(|p| class(p)).collect();
    for (a, pa) in block.paths.iter().enumerate() {
        counts[classes[a]] += 1;
        let diag = match classes[a] {
            1 => -cos,
            2 => cos,
            _ => 1.0,
        };
        want.set(a, a, c(diag, 0.0));
        for (b, pb) in block.paths.iter().enumerate() {
            let pair = (classes[a], classes[b]);
            if (pair == (1, 2) || pair == (2, 1)) && pa[..n - 2] == pb[..n - 2] {
                want.set(a, b, c(sin, 0.0));
            }
        }
    }
    let deviation = got.max_diff(&want);
    Ok(BoundaryReport { n, two_j, counts, cos_theta: cos, sin_theta: sin, deviation, pass: deviation <= 1e-9 })
}

/// Every admissible `(n, J)` with `2 ≤ n ≤ max_n`.
pub fn boundary_exchange_sweep(max_n: usize) -> Result<Vec<BoundaryReport>> {
    let mut out = Vec::new();
    for n in 2..=max_n {
        for tj in strong_labels(n) {
            out.push(boundary_exchange_check(n, tj)?);
        }
    }
    Ok(out)
}
