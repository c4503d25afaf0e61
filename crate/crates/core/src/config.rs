//! Process-wide limits.

use std::sync::atomic::{AtomicUsize, Ordering};

/// Default cap on the full Hilbert-space dimension (12 qubits).
pub const DEFAULT_DIM_CAP: usize = 1 << 12;

pub const DIM_CAP_ENV: &str = "DFS_FORGE_DIM_CAP";

static DIM_CAP: AtomicUsize = AtomicUsize::new(0);

/// Current dimension cap. The first call reads `DFS_FORGE_DIM_CAP`.
pub fn dim_cap() -> usize {
    match DIM_CAP.load(Ordering::Relaxed) {
        0 => {
            let cap = std::env::var(DIM_CAP_ENV)
                .ok()
                .and_then(|v| v.trim().parse::<usize>().ok())
                .filter(|&v| v > 0)
                .unwrap_or(DEFAULT_DIM_CAP);
            DIM_CAP.store(cap, Ordering::Relaxed);
            cap
        }
        cap => cap,
    }
}

pub fn set_dim_cap(cap: usize) {
    DIM_CAP.store(cap.max(1), Ordering::Relaxed);
}

/// Fails with a resource error when `dim` is above the cap.
pub fn check_dim(dim: usize) -> crate::Result<()> {
    let cap = dim_cap();
    if dim > cap {
        Err(crate::Error::ResourceLimit { requested: dim, cap })
    } else {
        Ok(())
    }
}

/// Full-space dimension of `n` qubits, checked against the cap.
pub fn qubit_dim(n: usize) -> crate::Result<usize> {
    if n >= usize::BITS as usize - 1 {
        return Err(crate::Error::ResourceLimit { requested: usize::MAX, cap: dim_cap() });
    }
    let dim = 1usize << n;
    check_dim(dim)?;
    Ok(dim)
}
