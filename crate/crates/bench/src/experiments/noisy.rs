use anyhow::Result;
use cpdeflate::cpd::{random_init, StopRule};
use cpdeflate::random::{add_noise, random_cp, Distribution};
use cpdeflate::{c64, CPModel, Field, Scalar, Tensor};

use super::{cell, par_trials, run_cpd, trial_rng, trial_seed};
use crate::config::{Algorithm, ExperimentConfig};
use crate::rows::{mean, ResultRow};

/// Draws the noisy observation and the shared initialisation of one trial.
fn setup<S: Scalar>(
    cfg: &ExperimentConfig,
    k: usize,
    i: usize,
    shape: &[usize],
    rank: usize,
    snr: Option<f64>,
) -> cpdeflate::Result<(Tensor<S>, CPModel<S>)> {
    let mut rng = trial_rng(cfg, k, i);
    let (_, mut t) = random_cp::<S, _>(shape, rank, Distribution::Uniform, &mut rng)?;
    if cfg.normalize {
        t = t.scale(S::from_real(1.0 / t.norm()));
    }
    if let Some(db) = snr {
        t = add_noise(&t, db, &mut rng)?;
    }
    Ok((t, random_init(shape, rank, trial_seed(cfg, k, i, 1))?))
}

/// Residual after `i` shared-axis iterations. One deflation sweep costs
/// `sweep_cost` iterations; histories that stopped early hold their last
/// value.
fn curve_value(history: &[f64], alg: Algorithm, i: usize, sweep_cost: usize) -> f64 {
    let idx = match alg {
        Algorithm::DcpdThosvd | Algorithm::DcpdSeroap => i / sweep_cost,
        _ => i,
    };
    history[idx.min(history.len() - 1)]
}

fn fixed_rule(alg: Algorithm, iterations: usize, sweep_cost: usize) -> StopRule {
    match alg {
        Algorithm::DcpdThosvd | Algorithm::DcpdSeroap => StopRule::fixed(iterations.div_ceil(sweep_cost)),
        _ => StopRule::fixed(iterations),
    }
}

/// Mean residual per iteration for every (SNR, solver), each solver run for
/// exactly `iterations` shared-axis iterations.
pub fn run_fig4(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    match cfg.field {
        Field::Real => fig4::<f64>(cfg),
        Field::Complex => fig4::<c64>(cfg),
    }
}

fn fig4<S: Scalar>(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    let mut k = 0;
    for shape in &cfg.shapes {
        for &rank in &cfg.ranks {
            for &snr in &cfg.snr_db {
                let base = cell(cfg, shape, Some(rank), snr);
                let curves = par_trials(cfg.trials, |i| -> Vec<cpdeflate::Result<Vec<f64>>> {
                    let data = setup::<S>(cfg, k, i, shape, rank, snr);
                    cfg.algorithms
                        .iter()
                        .map(|&alg| {
                            let (t, init) = data.as_ref().map_err(|e| cpdeflate::Error::InvalidArgument(e.to_string()))?;
                            let report = run_cpd(alg, t, init, &fixed_rule(alg, cfg.iterations, cfg.sweep_cost))?;
                            Ok((0..=cfg.iterations)
                                .map(|it| curve_value(&report.residual_history, alg, it, cfg.sweep_cost))
                                .collect())
                        })
                        .collect()
                });
                for (a, alg) in cfg.algorithms.iter().enumerate() {
                    let c = base.with_algorithm(alg.name());
                    let mut ok: Vec<&Vec<f64>> = Vec::new();
                    for (i, trial) in curves.iter().enumerate() {
                        match &trial[a] {
                            Ok(curve) => ok.push(curve),
                            Err(e) => rows.push(c.error_row(i, &e.to_string())),
                        }
                    }
                    for it in 0..=cfg.iterations {
                        let at: Vec<f64> = ok.iter().map(|curve| curve[it]).collect();
                        rows.push(c.step_row("mean_residual", it, mean(&at)));
                    }
                    let last: Vec<f64> = ok.iter().map(|curve| curve[cfg.iterations]).collect();
                    rows.push(c.row("final_mean_residual", mean(&last)));
                }
                k += 1;
            }
        }
    }
    Ok(rows)
}

/// Mean final residual per (rank, SNR, solver) under each solver's stop rule.
pub fn run_fig5(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    match cfg.field {
        Field::Real => fig5::<f64>(cfg),
        Field::Complex => fig5::<c64>(cfg),
    }
}

fn fig5<S: Scalar>(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    let mut k = 0;
    for shape in &cfg.shapes {
        for &rank in &cfg.ranks {
            for &snr in &cfg.snr_db {
                let base = cell(cfg, shape, Some(rank), snr);
                let outcomes = par_trials(cfg.trials, |i| -> Vec<cpdeflate::Result<(f64, usize)>> {
                    let data = setup::<S>(cfg, k, i, shape, rank, snr);
                    cfg.algorithms
                        .iter()
                        .map(|&alg| {
                            let (t, init) = data.as_ref().map_err(|e| cpdeflate::Error::InvalidArgument(e.to_string()))?;
                            let r = run_cpd(alg, t, init, &cfg.stop_rule(alg))?;
                            Ok((r.final_residual(), r.iterations))
                        })
                        .collect()
                });
                for (a, alg) in cfg.algorithms.iter().enumerate() {
                    let c = base.with_algorithm(alg.name());
                    let mut finals = Vec::new();
                    let mut iters = Vec::new();
                    for (i, trial) in outcomes.iter().enumerate() {
                        match &trial[a] {
                            Ok((r, n)) => {
                                finals.push(*r);
                                iters.push(*n as f64);
                            }
                            Err(e) => rows.push(c.error_row(i, &e.to_string())),
                        }
                    }
                    rows.push(c.row("mean_final_residual", mean(&finals)));
                    rows.push(c.row("mean_iterations", mean(&iters)));
                }
                k += 1;
            }
        }
    }
    Ok(rows)
}
