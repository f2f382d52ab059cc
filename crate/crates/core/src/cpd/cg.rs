use std::f64::consts::PI;
use web_time::Instant;

use crate::cpd::als::check_model;
use crate::cpd::{SolveReport, StopReason, StopRule};
use crate::products::khatri_rao_except;
use crate::{CPModel, Error, Field, Matrix, Result, Scalar, Tensor};

pub const DEFAULT_TRUST_RADIUS: f64 = 10.0;

fn real_tensor<S: Scalar>(t: &Tensor<S>) -> Result<Tensor<f64>> {
    if S::FIELD != Field::Real {
        return Err(Error::UnsupportedField);
    }
    Tensor::new(t.shape().to_vec(), t.data().iter().map(|z| z.real()).collect())
}

fn real_model<S: Scalar>(m: &CPModel<S>) -> Result<CPModel<f64>> {
    if S::FIELD != Field::Real {
        return Err(Error::UnsupportedField);
    }
    CPModel::new(m.factors().iter().map(|f| f.map(|z| z.real())).collect())
}

fn lift_model<S: Scalar>(m: CPModel<f64>) -> CPModel<S> {
    CPModel::new(m.into_factors().into_iter().map(|f| f.map(S::from_real)).collect())
        .expect("shape preserved")
}

/// `f(model) = |T - model|^2`.
pub fn objective<S: Scalar>(t: &Tensor<S>, model: &CPModel<S>) -> Result<f64> {
    check_model(t, model)?;
    Ok((t - &model.reconstruct()).norm_squared())
}

/// Gradient of `|T - model|^2` with respect to the stacked factors (layout
/// of [`CPModel::to_flat`]): block `n` is `2 vec(A(n) V(n) - T(n) K(n))`.
/// Real field only.
pub fn gradient<S: Scalar>(t: &Tensor<S>, model: &CPModel<S>) -> Result<Vec<S>> {
    check_model(t, model)?;
    let g = gradient_f64(&real_tensor(t)?, &real_model(model)?)?;
    Ok(g.into_iter().map(S::from_real).collect())
}

fn gradient_f64(t: &Tensor<f64>, model: &CPModel<f64>) -> Result<Vec<f64>> {
    let factors = model.factors();
    let grams: Vec<Matrix<f64>> = factors.iter().map(|a| a.transpose() * a).collect();
    let mut out = Vec::with_capacity(factors.iter().map(|f| f.len()).sum());
    for n in 0..factors.len() {
        let k = khatri_rao_except(factors, n)?;
        let mut v = Matrix::from_element(model.rank(), model.rank(), 1.0);
        for (j, g) in grams.iter().enumerate() {
            if j != n {
                v.component_mul_assign(g);
            }
        }
        let g = (&factors[n] * v - t.unfold(n)? * k) * 2.0;
        out.extend_from_slice(g.as_slice());
    }
    Ok(out)
}

/// Result of an exact line search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElsStep {
    pub mu: f64,
    /// `f(model + mu * direction)`.
    pub value: f64,
    /// Whether `mu` is an endpoint of the trust interval.
    pub on_boundary: bool,
}

/// Exact line search along `direction`.
///
/// `f(mu) = |T - [[model + mu * direction]]|^2` is a polynomial of degree
/// `2N`. It is interpolated at `2N + 1` Chebyshev points of
/// `[-radius, radius]`; the real roots of its derivative (companion-matrix
/// eigenvalues) together with the endpoints and `mu = 0` are the candidates,
/// and the one with the smallest exact `f` wins. A second interpolation on a
/// narrower window around the first minimiser sharpens the root. The step
/// never increases `f`.
pub fn els_step<S: Scalar>(
    t: &Tensor<S>,
    model: &CPModel<S>,
    direction: &CPModel<S>,
    radius: f64,
) -> Result<ElsStep> {
    check_model(t, model)?;
    check_model(t, direction)?;
    if model.rank() != direction.rank() {
        return Err(Error::shape("direction rank differs from the model rank"));
    }
    if radius.is_nan() || radius <= 0.0 {
        return Err(Error::InvalidArgument(format!("trust radius must be positive, got {radius}")));
    }
    els_f64(&real_tensor(t)?, &real_model(model)?, &real_model(direction)?, radius)
}

fn els_f64(t: &Tensor<f64>, model: &CPModel<f64>, dir: &CPModel<f64>, radius: f64) -> Result<ElsStep> {
    let f0 = (t - &model.reconstruct()).norm_squared();
    let at_zero = ElsStep {
        mu: 0.0,
        value: f0,
        on_boundary: false,
    };
    if dir.factors().iter().all(|d| d.iter().all(|&x| x == 0.0)) {
        return Ok(at_zero);
    }
    let f = |mu: f64| -> f64 {
        let moved = CPModel::new(
            model
                .factors()
                .iter()
                .zip(dir.factors())
                .map(|(a, d)| a + d * mu)
                .collect(),
        )
        .expect("same shapes");
        (t - &moved.reconstruct()).norm_squared()
    };
    let degree = 2 * t.order();
    let mut best = at_zero;
    let consider = |mu: f64, boundary: bool, best: &mut ElsStep| {
        let value = f(mu);
        if value < best.value {
            *best = ElsStep {
                mu,
                value,
                on_boundary: boundary,
            };
        }
    };
    consider(-radius, true, &mut best);
    consider(radius, true, &mut best);
    for s in critical_points(&f, 0.0, radius, degree) {
        consider(s, false, &mut best);
    }
    let width = radius / 16.0;
    let centre = best.mu;
    for s in critical_points(&f, centre, width, degree) {
        if s.abs() <= radius {
            consider(s, false, &mut best);
        }
    }
    Ok(best)
}

/// Real critical points in `[centre - half, centre + half]` of the
/// degree-`degree` polynomial `f`, recovered by Chebyshev interpolation.
fn critical_points(f: &dyn Fn(f64) -> f64, centre: f64, half: f64, degree: usize) -> Vec<f64> {
    let n = degree + 1;
    let nodes: Vec<f64> = (0..n)
        .map(|j| ((2 * j + 1) as f64 * PI / (2 * n) as f64).cos())
        .collect();
    let values = nalgebra::DVector::from_iterator(n, nodes.iter().map(|&s| f(centre + half * s)));
    let vander = Matrix::from_fn(n, n, |j, k| nodes[j].powi(k as i32));
    let Some(coeffs) = vander.lu().solve(&values) else {
        return Vec::new();
    };
    let deriv: Vec<f64> = (1..n).map(|k| k as f64 * coeffs[k]).collect();
    real_roots(&deriv)
        .into_iter()
        .filter(|s| s.abs() <= 1.0 + 1e-12)
        .map(|s| centre + half * s.clamp(-1.0, 1.0))
        .collect()
}

/// Real roots of `Σ_k c[k] x^k`, from the eigenvalues of the companion
/// matrix. Negligible leading coefficients are dropped first.
pub(crate) fn real_roots(c: &[f64]) -> Vec<f64> {
    let scale = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return Vec::new();
    }
    let mut deg = c.len() - 1;
    while deg > 0 && c[deg].abs() <= 1e-13 * scale {
        deg -= 1;
    }
    if deg == 0 {
        return Vec::new();
    }
    let lead = c[deg];
    let mut comp = Matrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -c[i] / lead;
    }
    comp.complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= 1e-6 * (1.0 + z.re.abs()))
        .map(|z| z.re)
        .collect()
}

/// Nonlinear conjugate gradient with exact line search and Polak-Ribière
/// updates (`beta = max(beta, 0)`). Real field only.
pub fn cg_els<S: Scalar>(t: &Tensor<S>, init: &CPModel<S>, stop: &StopRule) -> Result<(CPModel<S>, SolveReport)> {
    check_model(t, init)?;
    let tr = real_tensor(t)?;
    let mut model = real_model(init)?;
    let clock = Instant::now();
    let shape = model.shape();
    let rank = model.rank();
    let mut g = gradient_f64(&tr, &model)?;
    let mut d: Vec<f64> = g.iter().map(|x| -x).collect();
    let mut radius = DEFAULT_TRUST_RADIUS;
    let mut boundary_hits = 0;
    let mut history = vec![(&tr - &model.reconstruct()).norm()];
    let mut iterations = 0;
    let reason = loop {
        if history[0] <= stop.abs_tol {
            break StopReason::AbsoluteTarget;
        }
        if stop.max_iterations == 0 {
            break StopReason::MaxIterations;
        }
        iterations += 1;
        let dir = CPModel::from_flat(&shape, rank, &d)?;
        let step = els_f64(&tr, &model, &dir, radius)?;
        if step.on_boundary {
            boundary_hits += 1;
            if boundary_hits == 2 {
                radius *= 2.0;
                boundary_hits = 0;
            }
        } else {
            boundary_hits = 0;
        }
        let p: Vec<f64> = model.to_flat().iter().zip(&d).map(|(p, d)| p + step.mu * d).collect();
        model = CPModel::from_flat(&shape, rank, &p)?;
        let g_new = gradient_f64(&tr, &model)?;
        let gg: f64 = g.iter().map(|x| x * x).sum();
        let beta = if gg > 0.0 {
            let num: f64 = g_new.iter().zip(&g).map(|(a, b)| a * (a - b)).sum();
            (num / gg).max(0.0)
        } else {
            0.0
        };
        d = g_new.iter().zip(&d).map(|(gn, dk)| -gn + beta * dk).collect();
        if d.iter().zip(&g_new).map(|(a, b)| a * b).sum::<f64>() >= 0.0 {
            d = g_new.iter().map(|x| -x).collect();
        }
        g = g_new;
        let prev = *history.last().expect("nonempty");
        let current = step.value.max(0.0).sqrt();
        history.push(current);
        if let Some(reason) = stop.check(iterations, prev, current) {
            break reason;
        }
    };
    Ok((
        lift_model(model),
        SolveReport {
            residual_history: history,
            iterations,
            converged: reason != StopReason::MaxIterations,
            stop_reason: reason,
            wall_time: clock.elapsed(),
        },
    ))
}
