use serde::Serialize;

use crate::linalg::{hermitian_eig_max_from, nkp_decompose, normalize_phase, EigPair, DEFAULT_MAX_ITER};
use crate::rank1::Rank1Term;
use crate::{c64, Error, Field, Matrix, Result, Scalar, Tensor, Vector};

pub const DEFAULT_CE_MAX_ITER: usize = 200;
pub const DEFAULT_CE_TOL: f64 = 1e-12;

/// Iteration state of the coupled-eigenvalue refinement.
#[derive(Clone, Debug, Serialize)]
pub struct CeState {
    #[serde(skip)]
    pub x: Vector<c64>,
    #[serde(skip)]
    pub y: Vector<c64>,
    /// Objective `z^H M z` at the starting point, then after every half-step
    /// (y update, x update, ...).
    pub lambda_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// `M = Σ_k t_k t_k^H` over the vectorised frontal slices `t_k` of a
/// three-way tensor.
pub fn build_gram<S: Scalar>(t: &Tensor<S>) -> Result<Matrix<S>> {
    if t.order() != 3 {
        return Err(Error::InvalidArgument(format!(
            "the slice Gram matrix needs a three-way tensor, got order {}",
            t.order()
        )));
    }
    let s = t.shape();
    let slices = Matrix::from_column_slice(s[0] * s[1], s[2], t.data());
    Ok(&slices * slices.adjoint())
}

fn top_eig<S: Scalar>(g: &Matrix<c64>, warm: &Vector<c64>) -> Result<EigPair<c64>> {
    let tol = 1e-12;
    if S::FIELD == Field::Real {
        let gr = g.map(|z| z.re);
        let e = hermitian_eig_max_from(&gr, Some(&warm.map(|z| z.re)), DEFAULT_MAX_ITER, tol)?;
        return Ok(EigPair {
            lambda: e.lambda,
            x: e.x.map(|r| c64::new(r, 0.0)),
            converged: e.converged,
            iterations: e.iterations,
        });
    }
    hermitian_eig_max_from(g, Some(warm), DEFAULT_MAX_ITER, tol)
}

/// Coupled-eigenvalue refinement of a rank-1 approximation of a three-way
/// tensor.
///
/// The slice Gram matrix is split as `Σ_r kron(Q_r, P_r)`; then `y` and `x`
/// are alternately replaced by the top eigenvectors of
/// `Σ_r (x^H P_r x) Q_r*` and `Σ_r (y^H Q_r* y) P_r`. The iteration starts
/// from the largest mode-1 fibre of `phi0` and stops once the objective
/// changes by at most `tol * max(1, λ)` over one full iteration. The result
/// is `x o conj(y) o α` with `α_k = (conj(y) ⊗ x)^H t_k`, stored as
/// `λ = |α|` and unit factors.
pub fn ce_refine<S: Scalar>(
    t: &Tensor<S>,
    phi0: &Rank1Term<S>,
    max_iter: usize,
    tol: f64,
) -> Result<(Rank1Term<S>, CeState)> {
    if t.order() != 3 {
        return Err(Error::InvalidArgument(format!(
            "CE refinement needs a three-way tensor, got order {}",
            t.order()
        )));
    }
    if phi0.shape() != t.shape() {
        return Err(Error::shape(format!(
            "initial term {:?} for tensor {:?}",
            phi0.shape(),
            t.shape()
        )));
    }
    let (i1, i2, i3) = (t.shape()[0], t.shape()[1], t.shape()[2]);
    let tc = t.to_complex();
    let slices = Matrix::from_column_slice(i1 * i2, i3, tc.data());
    let gram = &slices * slices.adjoint();
    let nkp = nkp_decompose(&gram, i1, i2, 1e-13)?;
    let objective = |x: &Vector<c64>, y: &Vector<c64>| -> f64 {
        let z = kron_vec(&y.map(|c| c.conj()), x);
        (slices.adjoint() * z).norm_squared()
    };

    let start = phi0.to_tensor().to_complex();
    let mut x = largest_fibre(&start).or_else(|_| largest_fibre(&tc))?;
    let mut y = match phi0.factors[1].norm() {
        n if n > 0.0 => phi0.factors[1].map(|z| z.to_c64().conj()) / c64::new(n, 0.0),
        _ => Vector::from_element(i2, c64::new(1.0 / (i2 as f64).sqrt(), 0.0)),
    };
    let mut history = vec![objective(&x, &y)];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let prev = *history.last().expect("nonempty");
        let ey = top_eig::<S>(&nkp.contract_p(&x), &y)?;
        y = ey.x;
        history.push(ey.lambda);
        let ex = top_eig::<S>(&nkp.contract_q(&y), &x)?;
        x = ex.x;
        history.push(ex.lambda);
        if (ex.lambda - prev).abs() <= tol * prev.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    normalize_phase(&mut x);
    normalize_phase(&mut y);
    let z = kron_vec(&y.map(|c| c.conj()), &x);
    let alpha = (slices.adjoint() * &z).map(|c| c.conj());
    let to_s = |v: &Vector<c64>| v.map(S::from_c64);
    let term = Rank1Term::from_vectors(
        S::one(),
        vec![to_s(&x), to_s(&y.map(|c| c.conj())), to_s(&alpha)],
    )?;
    Ok((
        term,
        CeState {
            x,
            y,
            lambda_history: history,
            iterations,
            converged,
        },
    ))
}

fn kron_vec(a: &Vector<c64>, b: &Vector<c64>) -> Vector<c64> {
    Vector::from_fn(a.len() * b.len(), |k, _| a[k / b.len()] * b[k % b.len()])
}

/// Normalised mode-1 fibre of largest norm (ties go to the first in storage
/// order).
fn largest_fibre(t: &Tensor<c64>) -> Result<Vector<c64>> {
    let n = t.shape()[0];
    let best = t
        .data()
        .chunks(n)
        .map(Vector::from_column_slice)
        .fold(None::<Vector<c64>>, |best, f| match best {
            Some(b) if b.norm() >= f.norm() => Some(b),
            _ => Some(f),
        })
        .expect("tensor is nonempty");
    let norm = best.norm();
    if norm == 0.0 {
        return Err(Error::ZeroNorm("starting fibre"));
    }
    Ok(best / c64::new(norm, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_cp, random_tensor, rng_from_seed, Distribution};
    use crate::rank1::{seroap, thosvd, BestRank1Oracle};
    use crate::linalg::nkp_decompose;
    use nalgebra::SymmetricEigen;
    use proptest::prelude::*;

    #[test]
    fn gram_of_single_slice_is_rank_one() {
        let mut rng = rng_from_seed(1);
        let t: Tensor<c64> = random_tensor(&[2, 3, 1], Distribution::Uniform, &mut rng).unwrap();
        let m = build_gram(&t).unwrap();
        let s = crate::linalg::full_svd(&m).singular_values;
        assert!(s[1] < 1e-12 * s[0]);
        assert!(build_gram(&Tensor::<f64>::zeros(&[2, 2]).unwrap()).is_err());
    }

    #[test]
    fn gram_is_hermitian_psd_and_sums_slice_products() {
        let mut rng = rng_from_seed(2);
        let t: Tensor<c64> = random_tensor(&[3, 2, 4], Distribution::Uniform, &mut rng).unwrap();
        let m = build_gram(&t).unwrap();
        assert!((&m - m.adjoint()).norm() < 1e-12);
        let trace: f64 = m.diagonal().iter().map(|z| z.re).sum();
        assert!(SymmetricEigen::new(m.clone()).eigenvalues.min() >= -1e-10 * trace);
        let z: Tensor<c64> = random_tensor(&[6], Distribution::Normal, &mut rng).unwrap();
        let z = Vector::from_column_slice(z.data()).normalize();
        let direct: f64 = (0..4).map(|k| t.frontal_slice(k).unwrap().dotc(&z).norm_sqr()).sum();
        assert!((z.dotc(&(&m * &z)).re - direct).abs() < 1e-10 * direct.max(1.0));
    }

    #[test]
    fn exact_rank_one_is_a_fixed_point() {
        let mut rng = rng_from_seed(3);
        let (model, t) = random_cp::<c64, _>(&[3, 4, 2], 1, Distribution::Uniform, &mut rng).unwrap();
        let phi0 = Rank1Term::from_vectors(
            c64::new(1.0, 0.0),
            model.factors().iter().map(|f| f.column(0).into_owned()).collect(),
        )
        .unwrap();
        let (out, state) = ce_refine(&t, &phi0, 200, 1e-12).unwrap();
        assert!(state.iterations <= 2);
        assert!(out.residual(&t).unwrap() < 1e-9 * t.norm());
    }

    #[test]
    fn real_two_by_two_reaches_the_oracle() {
        for seed in 0..20 {
            let mut rng = rng_from_seed(seed);
            let t: Tensor<f64> = random_tensor(&[2, 2, 2], Distribution::Uniform, &mut rng).unwrap();
            let (out, _) = ce_refine(&t, &seroap(&t).unwrap(), 200, 1e-12).unwrap();
            let best = BestRank1Oracle::new(32, seed).approximate_tensor(&t, None).unwrap();
            assert!(out.residual(&t).unwrap() <= best.residual(&t).unwrap() + 1e-6, "seed {seed}");
            assert!(out.factors.iter().all(|f| (f.norm() - 1.0).abs() < 1e-10));
        }
    }

    #[test]
    fn assembled_matrix_matches_direct_contraction() {
        let mut rng = rng_from_seed(4);
        let t: Tensor<c64> = random_tensor(&[3, 2, 5], Distribution::Uniform, &mut rng).unwrap();
        let m = build_gram(&t).unwrap();
        let nkp = nkp_decompose(&m, 3, 2, 1e-13).unwrap();
        let y: Tensor<c64> = random_tensor(&[2], Distribution::Normal, &mut rng).unwrap();
        let y = Vector::from_column_slice(y.data()).normalize();
        let g = nkp.contract_q(&y);
        let direct = Matrix::from_fn(3, 3, |mm, nn| {
            let mut s = c64::new(0.0, 0.0);
            for k in 0..2 {
                for l in 0..2 {
                    s += y[k] * m[(mm + k * 3, nn + l * 3)] * y[l].conj();
                }
            }
            s
        });
        assert!((g - &direct).norm() <= 1e-9 * direct.norm());
    }

    #[test]
    fn objective_equivalence_at_the_output() {
        let mut rng = rng_from_seed(5);
        let t: Tensor<c64> = random_tensor(&[3, 3, 4], Distribution::Uniform, &mut rng).unwrap();
        let (out, state) = ce_refine(&t, &thosvd(&t).unwrap(), 200, 1e-12).unwrap();
        let r = out.residual(&t).unwrap();
        let lambda = *state.lambda_history.last().unwrap();
        assert!((r * r - (t.norm_squared() - lambda)).abs() <= 1e-9 * t.norm_squared());
        assert!((out.lambda.norm() - lambda.sqrt()).abs() <= 1e-9 * t.norm());
    }

    #[test]
    fn rejects_bad_input() {
        let t = Tensor::<f64>::zeros(&[2, 2, 2, 2]).unwrap();
        let phi = Rank1Term::from_vectors(1.0, vec![Vector::from_element(2, 1.0); 4]).unwrap();
        assert!(ce_refine(&t, &phi, 10, 1e-12).is_err());
        let t = Tensor::<f64>::zeros(&[2, 2, 3]).unwrap();
        let phi = Rank1Term::from_vectors(1.0, vec![Vector::from_element(2, 1.0); 3]).unwrap();
        assert!(matches!(ce_refine(&t, &phi, 10, 1e-12), Err(Error::ShapeMismatch(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn improves_any_start_monotonically(seed in any::<u64>(),
                                            dims in proptest::collection::vec(1usize..5, 3),
                                            complex in any::<bool>()) {
            let mut rng = rng_from_seed(seed);
            let check = |t_res: f64, out_res: f64, hist: &[f64], norm2: f64| {
                prop_assert!(out_res <= t_res + 1e-9);
                for w in hist.windows(2) {
                    prop_assert!(w[1] >= w[0] - 1e-10 * norm2.max(1.0));
                }
                prop_assert!(hist.iter().all(|&l| l <= norm2 * (1.0 + 1e-12)));
                Ok(())
            };
            if complex {
                let t: Tensor<c64> = random_tensor(&dims, Distribution::Uniform, &mut rng).unwrap();
                let start = Rank1Term::from_vectors(
                    c64::new(0.3, 0.1),
                    dims.iter().map(|&n| Vector::from_fn(n, |_, _| c64::new(1.0, 0.5))).collect(),
                ).unwrap();
                let (out, st) = ce_refine(&t, &start, 200, 1e-12).unwrap();
                check(start.residual(&t).unwrap(), out.residual(&t).unwrap(), &st.lambda_history, t.norm_squared())?;
            } else {
                let t: Tensor<f64> = random_tensor(&dims, Distribution::Normal, &mut rng).unwrap();
                let start = thosvd(&t).unwrap();
                let (out, st) = ce_refine(&t, &start, 200, 1e-12).unwrap();
                check(start.residual(&t).unwrap(), out.residual(&t).unwrap(), &st.lambda_history, t.norm_squared())?;
            }
        }
    }
}
