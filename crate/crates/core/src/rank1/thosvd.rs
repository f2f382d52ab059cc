use crate::linalg::{dense_eig_max, dominant_triplet_or_dense};
use crate::rank1::Rank1Term;
use crate::{Error, Result, Scalar, Tensor};

/// Truncated HOSVD: the dominant left singular vector of every unfolding,
/// scaled by `lambda = <T, u1 o ... o uN>`.
///
/// Wide unfoldings take the top eigenvector of `T(n) T(n)^H` from a dense
/// Hermitian eigensolver, so a repeated top singular value resolves to the
/// first coordinate direction rather than an arbitrary mixture.
pub fn thosvd<S: Scalar>(t: &Tensor<S>) -> Result<Rank1Term<S>> {
    if t.order() < 2 {
        return Err(Error::InvalidArgument("THOSVD needs a tensor of order >= 2".into()));
    }
    if t.norm() == 0.0 {
        return Err(Error::ZeroNorm("tensor"));
    }
    let factors = (0..t.order())
        .map(|n| {
            let m = t.unfold(n)?;
            if m.nrows() <= m.ncols() {
                Ok(dense_eig_max(&(&m * m.adjoint())).x)
            } else {
                Ok(dominant_triplet_or_dense(&m)?.u)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let u = Tensor::outer(&factors)?;
    Ok(Rank1Term {
        lambda: t.inner(&u)?,
        factors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_tensor, rng_from_seed, Distribution};
    use crate::rank1::BestRank1Oracle;
    use crate::{c64, Vector};

    #[test]
    fn exact_rank_one() {
        let a = Vector::from_vec(vec![0.6, 0.8]);
        let b = Vector::from_vec(vec![0.0, 1.0, 0.0]);
        let c = Vector::from_vec(vec![0.5, 0.5, 0.5, 0.5]);
        let t = Tensor::outer(&[a, b, c]).unwrap().scale(2.0);
        let term = thosvd(&t).unwrap();
        assert!(term.residual(&t).unwrap() < 1e-9);
        assert!((term.lambda.abs() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn superdiagonal_picks_one_term() {
        let t = Tensor::from_fn(&[2, 2, 2], |i| if i[0] == i[1] && i[1] == i[2] { 1.0 } else { 0.0 }).unwrap();
        let term = thosvd(&t).unwrap();
        assert!((term.lambda.abs() - 1.0).abs() < 1e-9);
        assert!((term.residual(&t).unwrap() - 1.0).abs() < 1e-9);
        // The two symmetric candidates e1 o e1 o e1 and e2 o e2 o e2 both leave
        // residual 1, and the oracle finds nothing better.
        let oracle = BestRank1Oracle::new(32, 5).approximate_tensor(&t, None).unwrap();
        assert!((oracle.residual(&t).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn residual_identity_on_random_complex() {
        let mut rng = rng_from_seed(17);
        let t: Tensor<c64> = random_tensor(&[3, 4, 5], Distribution::Uniform, &mut rng).unwrap();
        let term = thosvd(&t).unwrap();
        let r = term.residual(&t).unwrap();
        let lhs = r * r + term.lambda.norm_sqr();
        assert!((lhs - t.norm_squared()).abs() <= 1e-9 * t.norm_squared());
        assert!(term.factors.iter().all(|f| (f.norm() - 1.0).abs() < 1e-10));
        let oracle = BestRank1Oracle::new(16, 1).approximate_tensor(&t, None).unwrap();
        assert!(r >= oracle.residual(&t).unwrap() - 1e-12);
    }

    #[test]
    fn zero_tensor_is_rejected() {
        assert!(thosvd(&Tensor::<f64>::zeros(&[2, 2, 2]).unwrap()).is_err());
    }
}
