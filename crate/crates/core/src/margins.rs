//! Exact marginal laws and monotone transformations between them.

use std::io::{Read, Write};
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::arch::arch_tail_index;
use crate::numerics::grid::{read_pairs, GridFunction};
use crate::numerics::special::{norm_cdf, norm_isf, norm_quantile, norm_sf};
use crate::scalar::Scalar;

/// Probabilities handed to Fréchet inverses are kept at or above this value so
/// that T(x) = −1/ln(1 − e^{−x}) stays finite.
pub const FRECHET_CLAMP: f64 = 1e-300;

/// A continuous marginal distribution with exact cdf and quantile.
#[derive(Debug, Clone)]
pub enum MarginalLaw<T> {
    StandardExponential,
    StandardLaplace,
    /// Unit Fréchet, F(x) = exp(−1/x).
    StandardFrechet,
    StandardGaussian,
    ArchStationary(Arc<ArchStationary<T>>),
}

/// Stationary law of ARCH(1): symmetric empirical body plus Pareto tails.
#[derive(Debug, Clone)]
pub struct ArchStationary<T> {
    pub theta0: T,
    pub theta1: T,
    pub kappa: T,
    pub c: T,
    grid: GridFunction<T>,
}

impl<T: Scalar> ArchStationary<T> {
    /// `grid` tabulates F on [−x_b, x_b]; beyond ±x_b the tails are c|x|^{−κ}.
    pub fn new(theta0: T, theta1: T, kappa: T, c: T, grid: GridFunction<T>) -> Result<Self> {
        if !(theta0 > T::zero()) {
            return Err(Error::validation("theta0", theta0.as_f64(), "theta0 > 0"));
        }
        if !(theta1 > T::zero() && theta1 <= T::one()) {
            return Err(Error::validation("theta1", theta1.as_f64(), "0 < theta1 <= 1"));
        }
        if !(kappa > T::zero()) {
            return Err(Error::validation("kappa", kappa.as_f64(), "kappa > 0"));
        }
        if !(c > T::zero()) {
            return Err(Error::validation("c", c.as_f64(), "c > 0"));
        }
        if grid.x_max() <= T::zero() {
            return Err(Error::validation("grid", grid.x_max().as_f64(), "must extend past 0"));
        }
        Ok(ArchStationary { theta0, theta1, kappa, c, grid })
    }

    pub fn grid(&self) -> &GridFunction<T> {
        &self.grid
    }

    /// Upper blend point x_b, beyond which the Pareto tail applies.
    pub fn blend_point(&self) -> T {
        self.grid.x_max()
    }

    /// Upper tail c x^{−κ}.
    pub fn pareto_sf(&self, x: T) -> T {
        self.c * x.powf(-self.kappa)
    }

    fn cdf(&self, x: T) -> T {
        let xb = self.blend_point();
        if x > xb {
            T::one() - self.pareto_sf(x)
        } else if x < -xb {
            self.pareto_sf(-x)
        } else {
            self.grid.eval(x)
        }
    }

    fn sf(&self, x: T) -> T {
        // symmetric law
        self.cdf(-x)
    }

    fn quantile(&self, p: T) -> Result<T> {
        if p > T::of(0.5) {
            return self.isf(T::one() - p);
        }
        Ok(-self.isf(p)?)
    }

    fn isf(&self, q: T) -> Result<T> {
        let tail = self.pareto_sf(self.blend_point());
        if q <= tail {
            return Ok((self.c / q).powf(T::one() / self.kappa));
        }
        if q > T::of(0.5) {
            return Ok(-self.isf(T::one() - q)?);
        }
        self.grid.inverse(T::one() - q)
    }

    /// Writes the tabulated body as `x,F` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        self.grid.write_csv(writer, "F")
    }

    /// Restores a law written by [`ArchStationary::write_csv`]. κ is recomputed
    /// from θ1 and c from continuity at the last grid point.
    pub fn read_csv<R: Read>(reader: R, theta0: T, theta1: T) -> Result<Self> {
        let (xs, fs) = read_pairs(reader)?;
        let grid = GridFunction::linear(xs, fs)?;
        let kappa = arch_tail_index(theta1)?;
        let xb = grid.x_max();
        let c = (T::one() - grid.ys()[grid.len() - 1]) * xb.powf(kappa);
        Self::new(theta0, theta1, kappa, c, grid)
    }
}

fn check_probability<T: Scalar>(p: T) -> Result<()> {
    if p > T::zero() && p < T::one() {
        Ok(())
    } else {
        Err(Error::domain("p", p.as_f64(), "(0, 1)"))
    }
}

impl<T: Scalar> MarginalLaw<T> {
    pub fn name(&self) -> &'static str {
        match self {
            MarginalLaw::StandardExponential => "exponential",
            MarginalLaw::StandardLaplace => "laplace",
            MarginalLaw::StandardFrechet => "frechet",
            MarginalLaw::StandardGaussian => "gaussian",
            MarginalLaw::ArchStationary(_) => "arch_stationary",
        }
    }

    /// F(x). Saturates to 0 or 1 outside the support; ±∞ are accepted.
    pub fn cdf(&self, x: T) -> T {
        let one = T::one();
        let zero = T::zero();
        if x.is_nan() {
            return T::nan();
        }
        match self {
            MarginalLaw::StandardExponential => {
                if x <= zero {
                    zero
                } else {
                    -(-x).exp_m1()
                }
            }
            MarginalLaw::StandardLaplace => {
                if x < zero {
                    T::of(0.5) * x.exp()
                } else {
                    one - T::of(0.5) * (-x).exp()
                }
            }
            MarginalLaw::StandardFrechet => {
                if x <= zero {
                    zero
                } else {
                    (-one / x).exp()
                }
            }
            MarginalLaw::StandardGaussian => norm_cdf(x),
            MarginalLaw::ArchStationary(a) => a.cdf(x),
        }
    }

    /// 1 − F(x), computed without cancellation in the upper tail.
    pub fn sf(&self, x: T) -> T {
        let one = T::one();
        let zero = T::zero();
        if x.is_nan() {
            return T::nan();
        }
        match self {
            MarginalLaw::StandardExponential => {
                if x <= zero {
                    one
                } else {
                    (-x).exp()
                }
            }
            MarginalLaw::StandardLaplace => {
                if x < zero {
                    one - T::of(0.5) * x.exp()
                } else {
                    T::of(0.5) * (-x).exp()
                }
            }
            MarginalLaw::StandardFrechet => {
                if x <= zero {
                    one
                } else {
                    -(-one / x).exp_m1()
                }
            }
            MarginalLaw::StandardGaussian => norm_sf(x),
            MarginalLaw::ArchStationary(a) => a.sf(x),
        }
    }

    /// F^{-1}(p) for p in (0, 1).
    pub fn quantile(&self, p: T) -> Result<T> {
        check_probability(p)?;
        let one = T::one();
        let half = T::of(0.5);
        Ok(match self {
            MarginalLaw::StandardExponential => -(-p).ln_1p(),
            MarginalLaw::StandardLaplace => {
                if p < half {
                    (T::of(2.0) * p).ln()
                } else {
                    -(T::of(2.0) * (one - p)).ln()
                }
            }
            MarginalLaw::StandardFrechet => {
                let p = p.max(T::of(FRECHET_CLAMP));
                -one / p.ln()
            }
            MarginalLaw::StandardGaussian => norm_quantile(p),
            MarginalLaw::ArchStationary(a) => a.quantile(p)?,
        })
    }

    /// Upper quantile: x with 1 − F(x) = q, for q in (0, 1).
    pub fn isf(&self, q: T) -> Result<T> {
        check_probability(q)?;
        let one = T::one();
        let half = T::of(0.5);
        Ok(match self {
            MarginalLaw::StandardExponential => -q.ln(),
            MarginalLaw::StandardLaplace => {
                if q < half {
                    -(T::of(2.0) * q).ln()
                } else {
                    (T::of(2.0) * (one - q)).ln()
                }
            }
            MarginalLaw::StandardFrechet => {
                let q = q.max(T::of(FRECHET_CLAMP));
                -one / (-q).ln_1p()
            }
            MarginalLaw::StandardGaussian => norm_isf(q),
            MarginalLaw::ArchStationary(a) => a.isf(q)?,
        })
    }

    /// Inverse-cdf draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        match self {
            MarginalLaw::StandardExponential => T::standard_exponential(rng),
            MarginalLaw::StandardGaussian => T::standard_normal(rng),
            MarginalLaw::StandardLaplace => {
                let e = T::standard_exponential(rng);
                if rng.random::<bool>() {
                    e
                } else {
                    -e
                }
            }
            _ => {
                let u = T::open01(rng);
                self.quantile(u).expect("open uniform draw is a valid probability")
            }
        }
    }
}

/// Maps x from the scale of `from` to the scale of `to` through the
/// probability integral transform, using whichever tail keeps precision.
pub fn transform<T: Scalar>(x: T, from: &MarginalLaw<T>, to: &MarginalLaw<T>) -> Result<T> {
    let p = from.cdf(x);
    if p <= T::of(0.5) {
        let p = clamp_for(to, p);
        to.quantile(p)
    } else {
        let q = clamp_for(to, from.sf(x));
        to.isf(q)
    }
}

fn clamp_for<T: Scalar>(to: &MarginalLaw<T>, p: T) -> T {
    if matches!(to, MarginalLaw::StandardFrechet) {
        p.max(T::of(FRECHET_CLAMP))
    } else {
        p
    }
}

/// Exponential → unit Fréchet, T(x) = −1/ln(1 − e^{−x}).
pub fn exp_to_frechet<T: Scalar>(x: T) -> T {
    let q = (-x).exp().max(T::of(FRECHET_CLAMP));
    -T::one() / (-q).ln_1p()
}

/// Unit Fréchet → exponential, the inverse of [`exp_to_frechet`].
pub fn frechet_to_exp<T: Scalar>(z: T) -> T {
    -(-(-T::one() / z).exp_m1()).ln()
}
