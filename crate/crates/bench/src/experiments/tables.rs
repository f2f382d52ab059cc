use anyhow::Result;
use cpdeflate::rank1::{
    ce_refine, rank1_als, seroap, thosvd, BestRank1Oracle, DEFAULT_CE_MAX_ITER, DEFAULT_CE_TOL,
};
use cpdeflate::random::{random_tensor, Distribution};
use cpdeflate::{c64, Field, Scalar, Tensor};

use super::{cell, par_trials, trial_rng, trial_seed};
use crate::config::{Algorithm, ExperimentConfig};
use crate::rows::{mean, ResultRow};

/// Rank-1 ALS stopping tolerance on the change of `|λ|` relative to `|T|`.
pub const RANK1_ALS_TOL: f64 = 1e-12;

struct Outcome {
    deltas: Vec<f64>,
    iterations: Vec<Option<usize>>,
    oracle_beaten: bool,
}

/// MSE of each rank-1 method against the reference oracle, and mean
/// iteration counts of the iterative ones (both started from SeROAP).
pub fn run_tables(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    match cfg.field {
        Field::Real => typed::<f64>(cfg),
        Field::Complex => typed::<c64>(cfg),
    }
}

fn trial<S: Scalar>(cfg: &ExperimentConfig, k: usize, i: usize, shape: &[usize]) -> cpdeflate::Result<Outcome> {
    let mut rng = trial_rng(cfg, k, i);
    let t = loop {
        let t: Tensor<S> = random_tensor(shape, Distribution::Uniform, &mut rng)?;
        if t.norm() > 0.0 {
            break t;
        }
    };
    let oracle = BestRank1Oracle::new(cfg.oracle_restarts, trial_seed(cfg, k, i, 1));
    let best = oracle.approximate_tensor(&t, None)?.residual(&t)?;
    let se = seroap(&t)?;
    let max_iter = cfg.stop.max_iterations.unwrap_or(DEFAULT_CE_MAX_ITER);
    let mut deltas = Vec::new();
    let mut iterations = Vec::new();
    for alg in &cfg.algorithms {
        let (residual, iters) = match alg {
            Algorithm::Thosvd => (thosvd(&t)?.residual(&t)?, None),
            Algorithm::Seroap => (se.residual(&t)?, None),
            Algorithm::Ce => {
                let (term, state) = ce_refine(&t, &se, max_iter, cfg.stop.rel_tol.unwrap_or(DEFAULT_CE_TOL))?;
                (term.residual(&t)?, Some(state.iterations))
            }
            Algorithm::Rank1Als => {
                let (term, report) = rank1_als(&t, &se, max_iter, cfg.stop.rel_tol.unwrap_or(RANK1_ALS_TOL))?;
                (term.residual(&t)?, Some(report.iterations))
            }
            other => {
                return Err(cpdeflate::Error::InvalidArgument(format!(
                    "`{other}` is not a rank-1 method"
                )))
            }
        };
        deltas.push(residual - best);
        iterations.push(iters);
    }
    Ok(Outcome {
        oracle_beaten: deltas.iter().any(|&d| d < -1e-12),
        deltas,
        iterations,
    })
}

fn typed<S: Scalar>(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for (k, shape) in cfg.shapes.iter().enumerate() {
        let base = cell(cfg, shape, Some(1), None);
        let outcomes = par_trials(cfg.trials, |i| trial::<S>(cfg, k, i, shape));
        let mut ok = Vec::new();
        for (i, o) in outcomes.into_iter().enumerate() {
            match o {
                Ok(o) => ok.push(o),
                Err(e) => rows.push(base.with_algorithm("all").error_row(i, &e.to_string())),
            }
        }
        for (a, alg) in cfg.algorithms.iter().enumerate() {
            let c = base.with_algorithm(alg.name());
            let d: Vec<f64> = ok.iter().map(|o| o.deltas[a]).collect();
            let sq: Vec<f64> = d.iter().map(|x| x * x).collect();
            rows.push(c.row("mse", mean(&sq)));
            rows.push(c.row("max_abs_delta", d.iter().fold(0.0, |m, x| x.abs().max(m))));
            let iters: Vec<f64> = ok.iter().filter_map(|o| o.iterations[a]).map(|n| n as f64).collect();
            if !iters.is_empty() {
                rows.push(c.row("mean_iterations", mean(&iters)));
            }
        }
        let beaten = ok.iter().filter(|o| o.oracle_beaten).count();
        rows.push(base.with_algorithm("oracle").row("oracle_beaten", beaten as f64));
    }
    Ok(rows)
}
