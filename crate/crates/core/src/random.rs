//! Seeded generation of tensors, CP models and additive noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{CPModel, Error, Result, Scalar, Tensor};

/// Entry distribution. Complex scalars draw both parts independently.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    /// Uniform on `[-1, 1]`.
    #[default]
    Uniform,
    /// Standard normal.
    Normal,
}

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from a master seed and a path of
/// identifiers (cell id, trial index, ...).
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix(master), |acc, &p| mix(acc ^ mix(p)))
}

pub fn random_tensor<S: Scalar, R: Rng + ?Sized>(
    shape: &[usize],
    dist: Distribution,
    rng: &mut R,
) -> Result<Tensor<S>> {
    let len: usize = shape.iter().product();
    let data = (0..len).map(|_| S::sample(dist, rng)).collect();
    Tensor::new(shape.to_vec(), data)
}

/// Draws a rank-`rank` model with i.i.d. factor entries and returns it with
/// its reconstruction.
pub fn random_cp<S: Scalar, R: Rng + ?Sized>(
    shape: &[usize],
    rank: usize,
    dist: Distribution,
    rng: &mut R,
) -> Result<(CPModel<S>, Tensor<S>)> {
    let model = CPModel::random(shape, rank, dist, rng)?;
    let t = model.reconstruct();
    Ok((model, t))
}

/// Returns `t + n` with Gaussian `n` scaled so that
/// `10 log10(|t|^2 / |n|^2) == snr_db` exactly. An infinite SNR returns `t`.
pub fn add_noise<S: Scalar, R: Rng + ?Sized>(
    t: &Tensor<S>,
    snr_db: f64,
    rng: &mut R,
) -> Result<Tensor<S>> {
    if snr_db.is_nan() {
        return Err(Error::InvalidArgument("SNR is NaN".into()));
    }
    if snr_db == f64::INFINITY {
        return Ok(t.clone());
    }
    let signal = t.norm();
    if signal == 0.0 {
        return Err(Error::ZeroNorm("signal tensor"));
    }
    let noise: Tensor<S> = random_tensor(t.shape(), Distribution::Normal, rng)?;
    let target = signal * 10f64.powf(-snr_db / 20.0);
    let scale = target / noise.norm();
    let mut out = t.clone();
    out.axpy(S::from_real(scale), &noise)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    #[test]
    fn same_seed_same_tensor() {
        let a: Tensor<c64> = random_tensor(&[3, 2, 2], Distribution::Uniform, &mut rng_from_seed(9)).unwrap();
        let b: Tensor<c64> = random_tensor(&[3, 2, 2], Distribution::Uniform, &mut rng_from_seed(9)).unwrap();
        assert_eq!(a, b);
        let c: Tensor<c64> = random_tensor(&[3, 2, 2], Distribution::Uniform, &mut rng_from_seed(10)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn uniform_samples_are_centred() {
        // 10^4 samples on [-1,1]: standard error of the mean is 0.0058.
        let t: Tensor<f64> = random_tensor(&[10_000], Distribution::Uniform, &mut rng_from_seed(1)).unwrap();
        let mean = t.data().iter().sum::<f64>() / 1e4;
        assert!(mean.abs() < 0.05, "mean {mean}");
        assert!(t.data().iter().all(|x| (-1.0..=1.0).contains(x)));
    }

    #[test]
    fn noise_hits_the_requested_snr() {
        let mut rng = rng_from_seed(2);
        let (_, t) = random_cp::<c64, _>(&[5, 5, 5], 3, Distribution::Uniform, &mut rng).unwrap();
        for snr in [40.0, 20.0, 3.5, -10.0] {
            let noisy = add_noise(&t, snr, &mut rng).unwrap();
            let n = &noisy - &t;
            let measured = 10.0 * (t.norm_squared() / n.norm_squared()).log10();
            assert!((measured - snr).abs() < 1e-9, "{measured} vs {snr}");
        }
        let noisy = add_noise(&t, 40.0, &mut rng).unwrap();
        assert!(((&noisy - &t).norm() / t.norm() - 0.1f64.powi(2)).abs() < 1e-9);
        assert_eq!(add_noise(&t, f64::INFINITY, &mut rng).unwrap(), t);
        assert!(add_noise(&Tensor::<f64>::zeros(&[2, 2]).unwrap(), 10.0, &mut rng).is_err());
    }

    #[test]
    fn derived_seeds_differ_per_path() {
        let a = derive_seed(7, &[1, 2]);
        assert_eq!(a, derive_seed(7, &[1, 2]));
        assert_ne!(a, derive_seed(7, &[2, 1]));
        assert_ne!(a, derive_seed(8, &[1, 2]));
    }
}
