//! Floating point abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

/// Real scalar the toolkit can run on.
///
/// Implemented for `f32` and `f64`. Besides the usual float algebra it carries
/// the complementary error function and the handful of primitive random
/// draws the samplers need, so that generic code never names a concrete type.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy literal conversion, `T::of(0.5)`.
    fn of(x: f64) -> Self;

    fn erf(self) -> Self;

    fn erfc(self) -> Self;

    /// Uniform draw on the open interval (0, 1).
    fn open01<R: Rng + ?Sized>(rng: &mut R) -> Self;

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    fn standard_exponential<R: Rng + ?Sized>(rng: &mut R) -> Self;

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn of_usize(n: usize) -> Self {
        Self::of(n as f64)
    }
}

macro_rules! impl_scalar {
    ($t:ty, $erf:path, $erfc:path) => {
        impl Scalar for $t {
            #[inline]
            fn of(x: f64) -> Self {
                x as $t
            }

            #[inline]
            fn erf(self) -> Self {
                $erf(self)
            }

            #[inline]
            fn erfc(self) -> Self {
                $erfc(self)
            }

            #[inline]
            fn open01<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.sample(rand::distr::Open01)
            }

            #[inline]
            fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                StandardNormal.sample(rng)
            }

            #[inline]
            fn standard_exponential<R: Rng + ?Sized>(rng: &mut R) -> Self {
                Exp1.sample(rng)
            }
        }
    };
}

impl_scalar!(f64, libm::erf, libm::erfc);
impl_scalar!(f32, libm::erff, libm::erfcf);
