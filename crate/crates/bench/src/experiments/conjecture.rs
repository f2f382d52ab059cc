use anyhow::{bail, Result};
use cpdeflate::diagnostics::{estimate_f, FConfig, FEstimate};
use cpdeflate::random::derive_seed;
use cpdeflate::rank1::{BestRank1Oracle, Rank1Method, Seroap, Thosvd};
use cpdeflate::{c64, Field, Scalar};

use super::cell;
use crate::config::{Algorithm, ExperimentConfig};
use crate::rows::ResultRow;

/// Monte-Carlo estimate of the residual-chain probability `F_L[β]` on the
/// β grid, with the reference oracle as rank-1 operator unless
/// `algorithms` names THOSVD or SeROAP (empirical runs).
pub fn run_conjecture(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    match cfg.field {
        Field::Real => typed::<f64>(cfg),
        Field::Complex => typed::<c64>(cfg),
    }
}

fn operators<S: Scalar>(cfg: &ExperimentConfig, k: usize) -> Result<Vec<Box<dyn Rank1Method<S>>>> {
    if cfg.algorithms.is_empty() {
        let seed = derive_seed(cfg.seed, &[k as u64, u64::MAX]);
        return Ok(vec![Box::new(BestRank1Oracle::new(cfg.oracle_restarts, seed))]);
    }
    cfg.algorithms
        .iter()
        .map(|a| -> Result<Box<dyn Rank1Method<S>>> {
            match a {
                Algorithm::Thosvd => Ok(Box::new(Thosvd)),
                Algorithm::Seroap => Ok(Box::new(Seroap::default())),
                other => bail!("`{other}` cannot drive the chain estimate"),
            }
        })
        .collect()
}

fn typed<S: Scalar>(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    let mut k = 0;
    for shape in &cfg.shapes {
        for &rank in &cfg.ranks {
            for phi in operators::<S>(cfg, k)? {
                let fc = FConfig {
                    shape: shape.clone(),
                    rank,
                    sweeps: cfg.sweeps,
                    trials: cfg.trials,
                    seed: derive_seed(cfg.seed, &[k as u64]),
                    betas: cfg.betas.clone(),
                };
                let est: FEstimate = estimate_f(&fc, phi.as_ref())?;
                let c = cell(cfg, shape, Some(rank), None).with_algorithm(est.method.clone());
                for (j, &beta) in est.betas.iter().enumerate() {
                    let mut row = c.step_row("f_hat", j, est.estimates[j]);
                    row.param = Some(beta);
                    rows.push(row);
                    let mut row = c.step_row("half_width", j, est.half_widths[j]);
                    row.param = Some(beta);
                    rows.push(row);
                }
                rows.push(c.row("empirical", if est.empirical { 1.0 } else { 0.0 }));
            }
            k += 1;
        }
    }
    Ok(rows)
}
