//! Full CP decomposition: alternating least squares, nonlinear conjugate
//! gradient with exact line search, and rank-1 deflation.

mod als;
mod cg;
mod dcpd;

pub use als::{als, random_init};
pub use cg::{cg_els, els_step, gradient, objective, ElsStep, DEFAULT_TRUST_RADIUS};
pub use dcpd::{dcpd, DeflationTrace, StepRecord};

use std::time::Duration;

use serde::{Deserialize, Serialize};

/// When an iterative solver stops: after `max_iterations`, once the residual
/// is at most `abs_tol`, or once it changes by at most `rel_tol` relative to
/// its previous value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub max_iterations: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl StopRule {
    /// ALS default: 1000 sweeps or relative change below 1e-10.
    pub fn als() -> Self {
        StopRule {
            max_iterations: 1000,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
        }
    }

    pub fn cg() -> Self {
        Self::als()
    }

    /// Deflation default: residual at most 1e-6, 5000 sweeps, or relative
    /// change below 1e-12.
    pub fn dcpd() -> Self {
        StopRule {
            max_iterations: 5000,
            rel_tol: 1e-12,
            abs_tol: 1e-6,
        }
    }

    /// A rule that only counts iterations.
    pub fn fixed(iterations: usize) -> Self {
        StopRule {
            max_iterations: iterations,
            rel_tol: f64::NEG_INFINITY,
            abs_tol: f64::NEG_INFINITY,
        }
    }

    /// Decides whether to stop after iteration `iteration` (1-based) moved
    /// the residual from `prev` to `current`.
    pub fn check(&self, iteration: usize, prev: f64, current: f64) -> Option<StopReason> {
        if current <= self.abs_tol {
            Some(StopReason::AbsoluteTarget)
        } else if (prev - current).abs() <= self.rel_tol * prev {
            Some(StopReason::RelativeChange)
        } else if iteration >= self.max_iterations {
            Some(StopReason::MaxIterations)
        } else {
            None
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    AbsoluteTarget,
    RelativeChange,
    MaxIterations,
}

/// Residual history and outcome of an iterative solve.
#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    /// `|T - model|` before the first iteration and after each one.
    pub residual_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    #[serde(serialize_with = "as_seconds")]
    pub wall_time: Duration,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().expect("history includes the initial residual")
    }
}

fn as_seconds<Se: serde::Serializer>(d: &Duration, s: Se) -> Result<Se::Ok, Se::Error> {
    s.serialize_f64(d.as_secs_f64())
}
