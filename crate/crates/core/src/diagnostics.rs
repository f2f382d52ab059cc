//! Geometry of deflation residuals.
//!
//! For sweep `l >= 1` and component `r`, `γ[r,l]` is the angle between the
//! residual entering the update and the previous estimate of that component:
//! `E[r-1,l]` against `X[r,l-1]`, or `E[R,l-1]` against `X[1,l-1]` for the
//! first component. When the rank-1 operator is the best approximation,
//! `|E[r,l]| <= sin(γ[r,l]) |E_in|` and hence
//! `|E[R,l]| <= c_l |E[R,l-1]|` with `c_l = Π_r sin(γ[r,l])`.
//!
//! Indices are 0-based: sweep 0 is the initialisation, which has no angles.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::cpd::{dcpd, DeflationTrace, StopRule};
use crate::random::{derive_seed, random_cp, rng_from_seed, Distribution};
use crate::rank1::{Rank1Method, Rank1Term};
use crate::{Angle, Error, Result, Scalar, Tensor};

/// Slack used by every inequality check.
pub const CHECK_SLACK: f64 = 1e-8;

/// Angles of one sweep.
#[derive(Clone, Debug, Serialize)]
pub struct AngleRow {
    pub sweep: usize,
    pub gamma: Vec<Angle>,
    /// `Π_r sin(γ[r, l])`.
    pub c: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AngleTable {
    pub rows: Vec<AngleRow>,
}

/// Angle between two tensors; `π/2` when either is zero.
fn angle_or_right<S: Scalar>(a: &Tensor<S>, b: &Tensor<S>) -> Result<Angle> {
    if a.norm() == 0.0 || b.norm() == 0.0 {
        return Ok(Angle::new(FRAC_PI_2));
    }
    a.angle(b)
}

/// The residual entering the update of component `r` in sweep `l >= 1`.
fn incoming<S: Scalar>(trace: &DeflationTrace<S>, r: usize, l: usize) -> Result<&Tensor<S>> {
    if r == 0 {
        trace.e(trace.rank - 1, l - 1)
    } else {
        trace.e(r - 1, l)
    }
}

fn incoming_norm<S: Scalar>(trace: &DeflationTrace<S>, r: usize, l: usize) -> f64 {
    if r == 0 {
        trace.records[l - 1][trace.rank - 1].e_norm
    } else {
        trace.records[l][r - 1].e_norm
    }
}

/// All `γ[r,l]` of a trace recorded with tensor retention.
pub fn angle_table<S: Scalar>(trace: &DeflationTrace<S>) -> Result<AngleTable> {
    if trace.residuals.is_none() {
        return Err(Error::MissingTensors);
    }
    let mut rows = Vec::with_capacity(trace.sweeps().saturating_sub(1));
    for l in 1..trace.sweeps() {
        let gamma = (0..trace.rank)
            .map(|r| angle_or_right(incoming(trace, r, l)?, &trace.x(r, l - 1)))
            .collect::<Result<Vec<_>>>()?;
        let c = gamma.iter().map(|g| g.sin()).product();
        rows.push(AngleRow { sweep: l, gamma, c });
    }
    Ok(AngleTable { rows })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Lemma1Check {
    /// `|X + E - φ(X + E)|`.
    pub lhs: f64,
    /// `sin(γ) |E|`.
    pub rhs: f64,
    pub gamma: Angle,
    pub holds: bool,
    /// True when `φ` is not a best-approximation oracle, so a failure is an
    /// observation rather than a contradiction.
    pub empirical: bool,
}

/// Checks `|X + E - φ(X + E)| <= sin(γ)|E|` with `γ` the angle between `E`
/// and `X`. `X` is passed to `φ` as a hint.
pub fn check_lemma1<S: Scalar>(x: &Rank1Term<S>, e: &Tensor<S>, phi: &dyn Rank1Method<S>) -> Result<Lemma1Check> {
    let xt = x.to_tensor();
    if xt.shape() != e.shape() {
        return Err(Error::shape(format!("X {:?} and E {:?}", xt.shape(), e.shape())));
    }
    let y = &xt + e;
    let gamma = angle_or_right(e, &xt)?;
    let lhs = if y.norm() == 0.0 {
        0.0
    } else {
        phi.approximate(&y, Some(x))?.residual(&y)?
    };
    let rhs = gamma.sin() * e.norm();
    Ok(Lemma1Check {
        lhs,
        rhs,
        gamma,
        holds: lhs <= rhs + CHECK_SLACK,
        empirical: !phi.is_best(),
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Violation {
    pub r: usize,
    pub sweep: usize,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Stagnation {
    pub sweep: usize,
    pub ratio: f64,
    pub c: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorollaryReport {
    pub checked_steps: usize,
    pub corollary1: Vec<Violation>,
    pub corollary2: Vec<Violation>,
    pub stagnations: Vec<Stagnation>,
    pub empirical: bool,
}

impl CorollaryReport {
    pub fn all_hold(&self) -> bool {
        self.corollary1.is_empty() && self.corollary2.is_empty() && self.stagnations.iter().all(|s| s.holds)
    }
}

fn require_best<S: Scalar>(trace: &DeflationTrace<S>, empirical: bool) -> Result<()> {
    if !trace.best_operator && !empirical {
        return Err(Error::WrongProvenance(trace.method.clone()));
    }
    Ok(())
}

/// Checks the per-step and per-sweep contraction bounds and the stagnation
/// consequence (`|E[R,l]| >= (1 - 1e-6)|E[R,l-1]|` implies
/// `c_l >= 1 - 1e-3`). Residuals already below [`CHECK_SLACK`] are never
/// treated as stagnating, since their angles are rounding noise. Traces from operators that are not best-approximation
/// oracles are refused unless `empirical` is set.
pub fn check_corollaries<S: Scalar>(trace: &DeflationTrace<S>, empirical: bool) -> Result<CorollaryReport> {
    require_best(trace, empirical)?;
    let table = angle_table(trace)?;
    let mut report = CorollaryReport {
        checked_steps: 0,
        corollary1: Vec::new(),
        corollary2: Vec::new(),
        stagnations: Vec::new(),
        empirical: !trace.best_operator,
    };
    for row in &table.rows {
        let l = row.sweep;
        for r in 0..trace.rank {
            let lhs = trace.records[l][r].e_norm;
            let rhs = row.gamma[r].sin() * incoming_norm(trace, r, l);
            report.checked_steps += 1;
            if lhs > rhs + CHECK_SLACK {
                report.corollary1.push(Violation { r, sweep: l, lhs, rhs });
            }
        }
        let now = trace.sweep_residuals[l];
        let before = trace.sweep_residuals[l - 1];
        if now > row.c * before + CHECK_SLACK {
            report.corollary2.push(Violation {
                r: trace.rank - 1,
                sweep: l,
                lhs: now,
                rhs: row.c * before,
            });
        }
        if before > CHECK_SLACK && now >= (1.0 - 1e-6) * before {
            report.stagnations.push(Stagnation {
                sweep: l,
                ratio: if before > 0.0 { now / before } else { 1.0 },
                c: row.c,
                holds: row.c >= 1.0 - 1e-3,
            });
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConeReport {
    /// `max_{l>=1} min_r γ[r,l]` in radians; `π/2` when the trace has a
    /// single sweep.
    pub beta_bound: f64,
    /// `|E[R,l]| / |E[R,l-1]|` for `l >= 1` (0 when the denominator is 0).
    pub ratios: Vec<f64>,
    /// Sweeps whose residual stayed within a factor `1 - 1e-6`.
    pub stagnation: Vec<bool>,
    /// `|E[R,l]| <= sin(β)^l |E[R,0]| + 1e-8` for each sweep `l`.
    pub decay_holds: Vec<bool>,
}

impl ConeReport {
    pub fn decay_violations(&self) -> usize {
        self.decay_holds.iter().filter(|&&h| !h).count()
    }
}

pub fn beta_bound<S: Scalar>(trace: &DeflationTrace<S>) -> Result<ConeReport> {
    let table = angle_table(trace)?;
    let beta = table
        .rows
        .iter()
        .map(|row| row.gamma.iter().map(|g| g.radians()).fold(FRAC_PI_2, f64::min))
        .fold(None, |acc: Option<f64>, g| Some(acc.map_or(g, |a| a.max(g))))
        .unwrap_or(FRAC_PI_2);
    let z = &trace.sweep_residuals;
    let ratios = z.windows(2).map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 }).collect();
    let stagnation = z.windows(2).map(|w| w[1] >= (1.0 - 1e-6) * w[0]).collect();
    let decay_holds = z
        .iter()
        .enumerate()
        .map(|(l, &zl)| zl <= predict_decay(beta, l + 1) * z[0] + CHECK_SLACK)
        .collect();
    Ok(ConeReport {
        beta_bound: beta,
        ratios,
        stagnation,
        decay_holds,
    })
}

/// `sin(β)^(L-1)`: guaranteed contraction of `|E[R,L]| / |E[R,1]|` when every
/// sweep has a residual inside a cone of half-angle `β`.
pub fn predict_decay(beta: f64, sweeps: usize) -> f64 {
    if sweeps <= 1 {
        return 1.0;
    }
    Angle::new(beta).sin().powi((sweeps - 1) as i32)
}

/// Monte-Carlo setup for [`estimate_f`].
#[derive(Clone, Debug, Serialize)]
pub struct FConfig {
    pub shape: Vec<usize>,
    pub rank: usize,
    /// Number of sweeps `L`.
    pub sweeps: usize,
    pub trials: usize,
    pub seed: u64,
    pub betas: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FEstimate {
    pub sweeps: usize,
    pub betas: Vec<f64>,
    pub estimates: Vec<f64>,
    /// 95% Wilson interval half-widths.
    pub half_widths: Vec<f64>,
    pub trials: usize,
    pub method: String,
    pub empirical: bool,
}

/// 95% Wilson score interval `(centre, half-width)` for `k` successes out of `n`.
pub fn wilson_interval(k: usize, n: usize) -> (f64, f64) {
    let z = 1.959_963_984_540_054;
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    (centre, half)
}

/// Whether `Z_L <= s Z_{L-1} <= ... <= s^(L-1) Z_1` holds for `s = sin(β)`,
/// up to an absolute rounding slack of `1e-12 * Z_1`.
pub fn chain_holds(z: &[f64], beta: f64) -> bool {
    let Some(&z1) = z.first() else {
        return true;
    };
    let s = Angle::new(beta).sin();
    let slack = 1e-12 * z1;
    let n = z.len();
    // Term k of the chain is s^k Z_{L-k}.
    let term = |k: usize| s.powi(k as i32) * z[n - 1 - k];
    (0..n - 1).all(|k| term(k) <= term(k + 1) + slack)
}

fn run_trial<S: Scalar>(cfg: &FConfig, phi: &dyn Rank1Method<S>, trial: usize) -> Result<Vec<f64>> {
    let mut rng = rng_from_seed(derive_seed(cfg.seed, &[trial as u64]));
    let (_, t) = random_cp::<S, _>(&cfg.shape, cfg.rank, Distribution::Uniform, &mut rng)?;
    let (_, trace) = dcpd(&t, cfg.rank, phi, &StopRule::fixed(cfg.sweeps), false)?;
    Ok(trace.sweep_residuals)
}

/// Estimates `F_L[β]`, the probability that the residual norms
/// `Z_l = |E[R,l]|` contract by `sin(β)` at every sweep up to `L`, over
/// exact rank-`R` tensors with uniform `[-1, 1]` factor entries.
pub fn estimate_f<S: Scalar>(cfg: &FConfig, phi: &dyn Rank1Method<S>) -> Result<FEstimate> {
    if cfg.trials == 0 || cfg.sweeps == 0 {
        return Err(Error::InvalidArgument("need at least one trial and one sweep".into()));
    }
    #[cfg(feature = "parallel")]
    let chains: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        (0..cfg.trials)
            .into_par_iter()
            .map(|i| run_trial(cfg, phi, i))
            .collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let chains: Vec<Vec<f64>> = (0..cfg.trials).map(|i| run_trial(cfg, phi, i)).collect::<Result<_>>()?;

    let mut estimates = Vec::with_capacity(cfg.betas.len());
    let mut half_widths = Vec::with_capacity(cfg.betas.len());
    for &beta in &cfg.betas {
        let hits = chains.iter().filter(|z| chain_holds(z, beta)).count();
        estimates.push(hits as f64 / cfg.trials as f64);
        half_widths.push(wilson_interval(hits, cfg.trials).1);
    }
    Ok(FEstimate {
        sweeps: cfg.sweeps,
        betas: cfg.betas.clone(),
        estimates,
        half_widths,
        trials: cfg.trials,
        method: phi.name().to_string(),
        empirical: !phi.is_best(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_tensor;
    use crate::rank1::{BestRank1Oracle, Seroap, Thosvd};
    use crate::{c64, Vector};

    fn oracle() -> BestRank1Oracle {
        BestRank1Oracle::new(8, 3)
    }

    fn unit(n: usize, i: usize) -> Vector<f64> {
        Vector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 })
    }

    #[test]
    fn lemma1_trivial_cases() {
        let x = Rank1Term::from_vectors(2.0, vec![unit(2, 0), unit(2, 0), unit(2, 0)]).unwrap();
        let zero = Tensor::zeros(&[2, 2, 2]).unwrap();
        let c = check_lemma1(&x, &zero, &oracle()).unwrap();
        assert!(c.lhs < 1e-12 && c.rhs == 0.0 && c.holds && !c.empirical);

        let e = Tensor::outer(&[unit(2, 1), unit(2, 1), unit(2, 1)]).unwrap().scale(0.5);
        let c = check_lemma1(&x, &e, &Thosvd).unwrap();
        assert!((c.gamma.radians() - FRAC_PI_2).abs() < 1e-12);
        assert!(c.holds && c.empirical);
    }

    #[test]
    fn lemma1_holds_for_the_oracle() {
        let mut rng = rng_from_seed(41);
        for _ in 0..40 {
            let x_t: Tensor<f64> = random_tensor(&[2, 2, 2], Distribution::Uniform, &mut rng).unwrap();
            let x = crate::rank1::thosvd(&x_t).unwrap();
            let e: Tensor<f64> = random_tensor(&[2, 2, 2], Distribution::Uniform, &mut rng).unwrap();
            assert!(check_lemma1(&x, &e.scale(0.3), &oracle()).unwrap().holds);
        }
    }

    #[test]
    fn angle_table_matches_recomputation() {
        let mut rng = rng_from_seed(5);
        let t: Tensor<c64> = random_tensor(&[3, 3, 2], Distribution::Uniform, &mut rng).unwrap();
        let (_, trace) = dcpd(&t, 2, &Seroap::default(), &StopRule::fixed(6), true).unwrap();
        let table = angle_table(&trace).unwrap();
        assert_eq!(table.rows.len(), 5);
        for row in &table.rows {
            let l = row.sweep;
            let g0 = trace.e(1, l - 1).unwrap().angle(&trace.x(0, l - 1)).unwrap();
            let g1 = trace.e(0, l).unwrap().angle(&trace.x(1, l - 1)).unwrap();
            assert!((row.gamma[0].radians() - g0.radians()).abs() < 1e-12);
            assert!((row.gamma[1].radians() - g1.radians()).abs() < 1e-12);
            assert!((row.c - g0.sin() * g1.sin()).abs() < 1e-12);
            assert!((0.0..=1.0).contains(&row.c));
        }
        let (_, bare) = dcpd(&t, 2, &Seroap::default(), &StopRule::fixed(2), false).unwrap();
        assert!(matches!(angle_table(&bare), Err(Error::MissingTensors)));
    }

    #[test]
    fn collinear_and_orthogonal_angles() {
        let a = Tensor::outer(&[unit(2, 0), unit(2, 0)]).unwrap();
        let b = Tensor::outer(&[unit(2, 1), unit(2, 1)]).unwrap();
        assert_eq!(angle_or_right(&a, &b).unwrap().sin(), 1.0);
        assert!(angle_or_right(&a, &a.scale(3.0)).unwrap().sin() < 1e-7);
        assert_eq!(angle_or_right(&a, &Tensor::zeros(&[2, 2]).unwrap()).unwrap().radians(), FRAC_PI_2);
    }

    #[test]
    fn corollaries_with_the_oracle() {
        for seed in 0..6 {
            let mut rng = rng_from_seed(seed);
            let t: Tensor<f64> = random_tensor(&[2, 2, 2], Distribution::Uniform, &mut rng).unwrap();
            let (_, trace) = dcpd(&t, 2, &oracle(), &StopRule::fixed(8), true).unwrap();
            let report = check_corollaries(&trace, false).unwrap();
            assert!(report.all_hold(), "seed {seed}: {report:?}");
            let cone = beta_bound(&trace).unwrap();
            assert!((0.0..=FRAC_PI_2).contains(&cone.beta_bound));
            assert_eq!(cone.decay_violations(), 0);
        }
    }

    #[test]
    fn exact_input_is_trivially_fine() {
        let mut rng = rng_from_seed(8);
        let (_, t) = random_cp::<f64, _>(&[2, 2, 2], 1, Distribution::Uniform, &mut rng).unwrap();
        let (_, trace) = dcpd(&t, 1, &oracle(), &StopRule::fixed(3), true).unwrap();
        assert!(check_corollaries(&trace, false).unwrap().all_hold());
    }

    #[test]
    fn non_oracle_traces_need_the_empirical_flag() {
        let mut rng = rng_from_seed(9);
        let t: Tensor<f64> = random_tensor(&[2, 2, 2], Distribution::Uniform, &mut rng).unwrap();
        let (_, trace) = dcpd(&t, 2, &Thosvd, &StopRule::fixed(3), true).unwrap();
        assert!(matches!(check_corollaries(&trace, false), Err(Error::WrongProvenance(_))));
        assert!(check_corollaries(&trace, true).unwrap().empirical);
    }

    #[test]
    fn decay_prediction() {
        assert_eq!(predict_decay(0.0, 2), 0.0);
        assert_eq!(predict_decay(FRAC_PI_2, 7), 1.0);
        assert_eq!(predict_decay(0.3, 1), 1.0);
        assert!((predict_decay(0.5, 3) - 0.5f64.sin().powi(2)).abs() < 1e-15);
    }

    #[test]
    fn chain_event() {
        assert!(chain_holds(&[1.0, 0.5, 0.25], FRAC_PI_2));
        assert!(chain_holds(&[1.0, 0.5, 0.25], (0.5f64).asin()));
        assert!(!chain_holds(&[1.0, 0.5, 0.25], 0.3));
        assert!(!chain_holds(&[1.0, 1.1], FRAC_PI_2));
        assert!(!chain_holds(&[1.0, 0.1], 0.0));
        assert!(chain_holds(&[1.0, 0.0], 0.0));
    }

    #[test]
    fn wilson_interval_examples() {
        let (c, h) = wilson_interval(50, 100);
        assert!((c - 0.5).abs() < 1e-12);
        assert!((h - 0.0962).abs() < 1e-3);
        let (c, h) = wilson_interval(100, 100);
        assert!(c + h <= 1.0 + 1e-12 && c - h > 0.95);
    }

    #[test]
    fn f_estimate_is_monotone_and_full_at_right_angle() {
        let cfg = FConfig {
            shape: vec![2, 2, 2],
            rank: 2,
            sweeps: 4,
            trials: 20,
            seed: 11,
            betas: vec![0.0, 0.5, 1.0, 1.4, FRAC_PI_2],
        };
        let est = estimate_f::<f64>(&cfg, &oracle()).unwrap();
        assert_eq!(*est.estimates.last().unwrap(), 1.0);
        assert_eq!(est.estimates[0], 0.0);
        for w in est.estimates.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }
}
