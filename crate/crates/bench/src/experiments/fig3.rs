use anyhow::Result;
use cpdeflate::cpd::{random_init, SolveReport};
use cpdeflate::random::{random_cp, Distribution};
use cpdeflate::{c64, Field, Scalar};

use super::{cell, par_trials, run_cpd, trial_rng, trial_seed};
use crate::config::ExperimentConfig;
use crate::rows::{mean, ResultRow};

/// Success percentage of each CP solver on exact low-rank tensors, where
/// success means a final residual at most `threshold`. ALS and CG share one
/// random initialisation per trial.
pub fn run_fig3(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    match cfg.field {
        Field::Real => typed::<f64>(cfg),
        Field::Complex => typed::<c64>(cfg),
    }
}

fn typed<S: Scalar>(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    let mut k = 0;
    for shape in &cfg.shapes {
        for &rank in &cfg.ranks {
            let base = cell(cfg, shape, Some(rank), None);
            let outcomes = par_trials(cfg.trials, |i| -> Vec<cpdeflate::Result<SolveReport>> {
                let mut rng = trial_rng(cfg, k, i);
                let setup = random_cp::<S, _>(shape, rank, Distribution::Uniform, &mut rng)
                    .and_then(|(_, t)| Ok((t, random_init::<S>(shape, rank, trial_seed(cfg, k, i, 1))?)));
                cfg.algorithms
                    .iter()
                    .map(|&alg| {
                        let (t, init) = setup.as_ref().map_err(|e| cpdeflate::Error::InvalidArgument(e.to_string()))?;
                        run_cpd(alg, t, init, &cfg.stop_rule(alg))
                    })
                    .collect()
            });
            for (a, alg) in cfg.algorithms.iter().enumerate() {
                let c = base.with_algorithm(alg.name());
                let mut finals = Vec::new();
                let mut iters = Vec::new();
                for (i, o) in outcomes.iter().enumerate() {
                    match &o[a] {
                        Ok(r) => {
                            finals.push(r.final_residual());
                            iters.push(r.iterations as f64);
                        }
                        Err(e) => rows.push(c.error_row(i, &e.to_string())),
                    }
                }
                let successes = finals.iter().filter(|&&r| r <= cfg.threshold).count();
                rows.push(c.row("success_pct", 100.0 * successes as f64 / cfg.trials as f64));
                rows.push(c.row("mean_final_residual", mean(&finals)));
                rows.push(c.row("mean_iterations", mean(&iters)));
            }
            k += 1;
        }
    }
    Ok(rows)
}
