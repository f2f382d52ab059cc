use web_time::Instant;

use crate::cpd::{SolveReport, StopReason, StopRule};
use crate::linalg::pinv;
use crate::products::khatri_rao_except;
use crate::random::{rng_from_seed, Distribution};
use crate::{CPModel, Error, Matrix, Result, Scalar, Tensor};

const PINV_RANK_TOL: f64 = 1e-12;

/// Random model with i.i.d. uniform `[-1, 1]` factor entries drawn from `seed`.
pub fn random_init<S: Scalar>(shape: &[usize], rank: usize, seed: u64) -> Result<CPModel<S>> {
    CPModel::random(shape, rank, Distribution::Uniform, &mut rng_from_seed(seed))
}

pub(crate) fn check_model<S: Scalar>(t: &Tensor<S>, model: &CPModel<S>) -> Result<()> {
    if model.shape() != t.shape() {
        return Err(Error::shape(format!(
            "model of shape {:?} for tensor {:?}",
            model.shape(),
            t.shape()
        )));
    }
    Ok(())
}

/// Alternating least squares. Each sweep replaces every factor by the exact
/// least-squares solution `A(n) = T(n) conj(K) pinv(conj(V))`, where `K` is
/// the Khatri-Rao product of the other factors and `V` the Hadamard product
/// of their Gram matrices.
pub fn als<S: Scalar>(t: &Tensor<S>, init: &CPModel<S>, stop: &StopRule) -> Result<(CPModel<S>, SolveReport)> {
    check_model(t, init)?;
    let clock = Instant::now();
    let order = t.order();
    let unfoldings: Vec<Matrix<S>> = (0..order).map(|n| t.unfold(n)).collect::<Result<_>>()?;
    let mut factors = init.factors().to_vec();
    let mut grams: Vec<Matrix<S>> = factors.iter().map(|a| a.adjoint() * a).collect();
    let mut history = vec![(t - &init.reconstruct()).norm()];
    let mut iterations = 0;
    let reason = loop {
        if history[0] <= stop.abs_tol {
            break StopReason::AbsoluteTarget;
        }
        if stop.max_iterations == 0 {
            break StopReason::MaxIterations;
        }
        iterations += 1;
        for n in 0..order {
            let k = khatri_rao_except(&factors, n)?;
            let mut v = Matrix::from_element(init.rank(), init.rank(), S::one());
            for (j, g) in grams.iter().enumerate() {
                if j != n {
                    v.component_mul_assign(g);
                }
            }
            let rhs = &unfoldings[n] * k.map(|z| z.conjugate());
            factors[n] = rhs * pinv(&v.map(|z| z.conjugate()), PINV_RANK_TOL);
            grams[n] = factors[n].adjoint() * &factors[n];
        }
        let model = CPModel::new(factors.clone())?;
        let prev = *history.last().expect("nonempty");
        let current = (t - &model.reconstruct()).norm();
        history.push(current);
        if let Some(reason) = stop.check(iterations, prev, current) {
            break reason;
        }
    };
    Ok((
        CPModel::new(factors)?,
        SolveReport {
            residual_history: history,
            iterations,
            converged: reason != StopReason::MaxIterations,
            stop_reason: reason,
            wall_time: clock.elapsed(),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::random::{random_cp, random_tensor};

    #[test]
    fn recovers_exact_low_rank_tensors() {
        let mut successes = 0;
        for seed in 0..10 {
            let mut rng = rng_from_seed(seed);
            let (_, t) = random_cp::<f64, _>(&[4, 4, 4], 3, Distribution::Uniform, &mut rng).unwrap();
            let init = random_init(&[4, 4, 4], 3, 1000 + seed).unwrap();
            let (_, report) = als(&t, &init, &StopRule { max_iterations: 500, ..StopRule::als() }).unwrap();
            if report.final_residual() <= 1e-6 {
                successes += 1;
            }
            assert_eq!(report.residual_history.len(), report.iterations + 1);
        }
        assert!(successes > 5, "{successes}/10");
    }

    #[test]
    fn exact_rank_one_fixed_point() {
        let mut rng = rng_from_seed(5);
        let (model, t) = random_cp::<c64, _>(&[3, 2, 4], 1, Distribution::Uniform, &mut rng).unwrap();
        let (_, report) = als(&t, &model, &StopRule::als()).unwrap();
        assert!(report.final_residual() < 1e-12 * t.norm().max(1.0) || report.iterations <= 1);
        assert!(report.iterations <= 1);
    }

    #[test]
    fn residual_never_increases() {
        for seed in 0..5 {
            let mut rng = rng_from_seed(seed);
            let t: Tensor<c64> = random_tensor(&[3, 4, 3], Distribution::Uniform, &mut rng).unwrap();
            let init = random_init(&[3, 4, 3], 2, seed).unwrap();
            let (_, report) = als(&t, &init, &StopRule::fixed(50)).unwrap();
            assert_eq!(report.iterations, 50);
            for w in report.residual_history.windows(2) {
                assert!(w[1] <= w[0] + 1e-9);
            }
        }
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let t = Tensor::<f64>::zeros(&[2, 2, 2]).unwrap();
        let init = random_init::<f64>(&[2, 3, 2], 1, 0).unwrap();
        assert!(als(&t, &init, &StopRule::als()).is_err());
    }
}
