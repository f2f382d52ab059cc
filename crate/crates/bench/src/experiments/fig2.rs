use anyhow::Result;
use cpdeflate::random::{random_cp, random_tensor, Distribution};
use cpdeflate::rank1::{compare_rank1, Seroap, Thosvd};
use cpdeflate::{c64, Field, Scalar, Tensor};

use super::{cell, par_trials, trial_rng};
use crate::config::ExperimentConfig;
use crate::rows::{mean, ResultRow};

/// Tolerance below zero still counted as a non-negative gap.
pub const DELTA_SLACK: f64 = 1e-10;

/// `Δφ = |T - THOSVD(T)| - |T - SeROAP(T)|` per trial, with per-shape
/// minimum, mean and count of negative gaps. With `ranks` set, inputs are
/// exact CP tensors of the first rank instead of dense random tensors.
pub fn run_fig2(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    match cfg.field {
        Field::Real => typed::<f64>(cfg),
        Field::Complex => typed::<c64>(cfg),
    }
}

fn typed<S: Scalar>(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let rank = cfg.ranks.first().copied();
    let mut rows = Vec::new();
    for (k, shape) in cfg.shapes.iter().enumerate() {
        let c = cell(cfg, shape, rank, None).with_algorithm("thosvd-seroap");
        let gaps = par_trials(cfg.trials, |i| -> cpdeflate::Result<f64> {
            let mut rng = trial_rng(cfg, k, i);
            let t: Tensor<S> = match rank {
                None => random_tensor(shape, Distribution::Uniform, &mut rng)?,
                Some(r) => random_cp(shape, r, Distribution::Uniform, &mut rng)?.1,
            };
            compare_rank1(&t, &Thosvd, &Seroap::default())
        });
        let mut ok = Vec::with_capacity(gaps.len());
        for (i, gap) in gaps.into_iter().enumerate() {
            match gap {
                Ok(d) => {
                    rows.push(c.step_row("delta_phi", i, d));
                    ok.push(d);
                }
                Err(e) => rows.push(c.error_row(i, &e.to_string())),
            }
        }
        rows.push(c.row("min_delta_phi", ok.iter().copied().fold(f64::INFINITY, f64::min)));
        rows.push(c.row("mean_delta_phi", mean(&ok)));
        rows.push(c.row("negative_count", ok.iter().filter(|&&d| d < -DELTA_SLACK).count() as f64));
    }
    Ok(rows)
}
