use nalgebra::ComplexField;
use rand::Rng;
use rand_distr::{Distribution as _, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::random::Distribution;

#[allow(non_camel_case_types)]
pub type c64 = num_complex::Complex64;

/// Field over which a tensor is defined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Field::Real => "real",
            Field::Complex => "complex",
        })
    }
}

impl std::str::FromStr for Field {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "real" => Ok(Field::Real),
            "complex" => Ok(Field::Complex),
            other => Err(format!("unknown field `{other}`")),
        }
    }
}

/// Scalar type of a tensor: `f64` or [`c64`].
///
/// Everything numeric (conjugation, modulus, arithmetic) comes from
/// nalgebra's `ComplexField`; this trait only adds the field tag, lossless
/// conversion to and from `c64`, and sampling.
pub trait Scalar: ComplexField<RealField = f64> + Copy + Default + Send + Sync {
    const FIELD: Field;

    /// Builds a scalar from real and imaginary parts. Real scalars drop `im`.
    fn from_parts(re: f64, im: f64) -> Self;

    fn to_c64(self) -> c64;

    /// Real scalars keep only the real part.
    fn from_c64(z: c64) -> Self;

    /// Draws one scalar; complex scalars draw real and imaginary parts
    /// independently.
    fn sample<R: Rng + ?Sized>(dist: Distribution, rng: &mut R) -> Self;
}

fn sample_component<R: Rng + ?Sized>(dist: Distribution, rng: &mut R) -> f64 {
    match dist {
        Distribution::Uniform => rng.random_range(-1.0..=1.0),
        Distribution::Normal => StandardNormal.sample(rng),
    }
}

impl Scalar for f64 {
    const FIELD: Field = Field::Real;

    fn from_parts(re: f64, _im: f64) -> Self {
        re
    }

    fn to_c64(self) -> c64 {
        c64::new(self, 0.0)
    }

    fn from_c64(z: c64) -> Self {
        z.re
    }

    fn sample<R: Rng + ?Sized>(dist: Distribution, rng: &mut R) -> Self {
        sample_component(dist, rng)
    }
}

impl Scalar for c64 {
    const FIELD: Field = Field::Complex;

    fn from_parts(re: f64, im: f64) -> Self {
        c64::new(re, im)
    }

    fn to_c64(self) -> c64 {
        self
    }

    fn from_c64(z: c64) -> Self {
        z
    }

    fn sample<R: Rng + ?Sized>(dist: Distribution, rng: &mut R) -> Self {
        let re = sample_component(dist, rng);
        let im = sample_component(dist, rng);
        c64::new(re, im)
    }
}
