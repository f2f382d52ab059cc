//! Leading-order multiplication counts per iteration.

use anyhow::{bail, Result};
use serde::Serialize;

use crate::config::Algorithm;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FlopEstimate {
    pub algorithm: String,
    pub dims: Vec<usize>,
    pub rank: usize,
    pub order: usize,
    /// Power-iteration count of the SVD steps.
    pub k: usize,
    pub count: u128,
}

/// Evaluates the per-iteration operation counts:
///
/// | algorithm     | count                   |
/// |---------------|-------------------------|
/// | `als`         | `N R ∏I`                |
/// | `cg`          | `((2^N + 1) R + N²) ∏I` |
/// | `thosvd`      | `(2Nk + 2) ∏I`          |
/// | `seroap`      | `(2k + 2) ∏I`           |
/// | `dcpd-thosvd` | `(2Nk + 2) R ∏I`        |
/// | `dcpd-seroap` | `(2k + 2) R ∏I`         |
pub fn complexity_estimate(algorithm: Algorithm, dims: &[usize], rank: usize, k: usize) -> Result<FlopEstimate> {
    if dims.is_empty() || dims.contains(&0) {
        bail!("dimensions must be positive");
    }
    let p: u128 = dims.iter().map(|&d| d as u128).product();
    let n = dims.len() as u128;
    let (r, k128) = (rank as u128, k as u128);
    let count = match algorithm {
        Algorithm::Als => n * r * p,
        Algorithm::Cg => ((1u128 << n) + 1) * r * p + n * n * p,
        Algorithm::Thosvd => (2 * n * k128 + 2) * p,
        Algorithm::Seroap => (2 * k128 + 2) * p,
        Algorithm::DcpdThosvd => (2 * n * k128 + 2) * r * p,
        Algorithm::DcpdSeroap => (2 * k128 + 2) * r * p,
        other => bail!("no operation count for `{other}`"),
    };
    Ok(FlopEstimate {
        algorithm: algorithm.to_string(),
        dims: dims.to_vec(),
        rank,
        order: dims.len(),
        k,
        count,
    })
}
