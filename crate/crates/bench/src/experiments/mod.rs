//! Experiment drivers. Every trial draws from its own stream seeded by
//! `(master seed, cell, trial)`, so results do not depend on scheduling.

mod conjecture;
mod fig2;
mod fig3;
mod noisy;
mod tables;

pub use conjecture::run_conjecture;
pub use fig2::run_fig2;
pub use fig3::run_fig3;
pub use noisy::{run_fig4, run_fig5};
pub use tables::run_tables;

use anyhow::Result;
use cpdeflate::cpd::{als, cg_els, dcpd, SolveReport, StopRule};
use cpdeflate::random::{derive_seed, rng_from_seed, SeededRng};
use cpdeflate::rank1::{Seroap, Thosvd};
use cpdeflate::{CPModel, Error, Scalar, Tensor};
use rayon::prelude::*;

use crate::config::{format_shape, format_snr, Algorithm, Experiment, ExperimentConfig};
use crate::rows::{Cell, ResultRow};

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    match cfg.experiment {
        Experiment::Fig2 => run_fig2(cfg),
        Experiment::Tables => run_tables(cfg),
        Experiment::Fig3 => run_fig3(cfg),
        Experiment::Fig4 => run_fig4(cfg),
        Experiment::Fig5 => run_fig5(cfg),
        Experiment::Conjecture => run_conjecture(cfg),
    }
}

pub(crate) fn par_trials<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..n).into_par_iter().map(f).collect()
}

pub(crate) fn trial_seed(cfg: &ExperimentConfig, cell: usize, trial: usize, stream: u64) -> u64 {
    derive_seed(cfg.seed, &[cell as u64, trial as u64, stream])
}

pub(crate) fn trial_rng(cfg: &ExperimentConfig, cell: usize, trial: usize) -> SeededRng {
    rng_from_seed(trial_seed(cfg, cell, trial, 0))
}

pub(crate) fn cell(cfg: &ExperimentConfig, shape: &[usize], rank: Option<usize>, snr: Option<f64>) -> Cell {
    Cell {
        experiment: cfg.experiment.to_string(),
        shape: format_shape(shape),
        rank: rank.map_or_else(|| "full".into(), |r| r.to_string()),
        snr_db: format_snr(snr),
        algorithm: String::new(),
        trials: cfg.trials,
    }
}

/// Runs one full CP solver and returns its report.
pub fn run_cpd<S: Scalar>(
    algorithm: Algorithm,
    t: &Tensor<S>,
    init: &CPModel<S>,
    stop: &StopRule,
) -> cpdeflate::Result<SolveReport> {
    let rank = init.rank();
    match algorithm {
        Algorithm::Als => als(t, init, stop).map(|r| r.1),
        Algorithm::Cg => cg_els(t, init, stop).map(|r| r.1),
        Algorithm::DcpdThosvd => dcpd(t, rank, &Thosvd, stop, false).map(|r| r.1.report),
        Algorithm::DcpdSeroap => dcpd(t, rank, &Seroap::default(), stop, false).map(|r| r.1.report),
        other => Err(Error::InvalidArgument(format!("`{other}` is not a CP solver"))),
    }
}
