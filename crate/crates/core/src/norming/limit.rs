//! Limit laws K of normalised kernels, possibly with atoms at ±∞.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::margins::MarginalLaw;
use crate::numerics::arch::arch_tail_index;
use crate::numerics::special::{norm_cdf, norm_isf, norm_quantile, norm_sf};
use crate::scalar::Scalar;

/// A point of the extended real line. Atoms at ±∞ travel as flags and never
/// as float infinities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal<T> {
    NegInf,
    Finite(T),
    PosInf,
}

impl<T: Scalar> ExtendedReal<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            ExtendedReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    /// Label used in CSV output: the value, `-inf` or `inf`.
    pub fn label(self) -> String {
        match self {
            ExtendedReal::NegInf => "-inf".into(),
            ExtendedReal::PosInf => "inf".into(),
            ExtendedReal::Finite(x) => format!("{:?}", x.as_f64()),
        }
    }
}

/// Atomless distribution on the reals with closed-form cdf and quantile.
#[derive(Debug, Clone, PartialEq)]
pub enum ContinuousLaw<T> {
    /// Centred normal with standard deviation `sd`.
    Gaussian { sd: T },
    /// (1 + e^{−x/γ})^{γ−1}, the location limit of the logistic BEV kernel.
    LogisticBev { gamma: T },
    /// [1 + (r e^{−x})^{1/ν}]^{ν−1} with r = φ2/φ1.
    AsymLogistic { ratio: T, nu: T },
    /// 1 − exp(−γ x^{1/γ}) on (0, ∞), the scale limit of the inverted logistic kernel.
    Weibull { gamma: T },
    /// 1 − exp(−(8π)^{−1/2} γ exp(√2 x/γ)).
    HuslerReiss { gamma: T },
    /// 1 − exp(−c exp(γ x)).
    DensityDecay { gamma: T, c: T },
    Exponential,
    Laplace,
    /// 2Φ(e^{x/κ}/√θ1) − 1.
    ArchPlus { kappa: T, theta1: T },
    /// 2Φ(−e^{−x/κ}/√θ1).
    ArchMinus { kappa: T, theta1: T },
}

fn softplus<T: Scalar>(s: T) -> T {
    s.max(T::zero()) + (-s.abs()).exp().ln_1p()
}

// 1 − exp(−k e^{x/s}) and its inverse
fn gumbel_min_cdf<T: Scalar>(x: T, s: T, k: T) -> T {
    -(-k * (x / s).exp()).exp_m1()
}

fn gumbel_min_quantile<T: Scalar>(p: T, s: T, k: T) -> T {
    s * (-(-p).ln_1p() / k).ln()
}

impl<T: Scalar> ContinuousLaw<T> {
    pub fn cdf(&self, x: T) -> T {
        let zero = T::zero();
        let one = T::one();
        if x.is_nan() {
            return T::nan();
        }
        match *self {
            ContinuousLaw::Gaussian { sd } => norm_cdf(x / sd),
            ContinuousLaw::LogisticBev { gamma } => ((gamma - one) * softplus(-x / gamma)).exp(),
            ContinuousLaw::AsymLogistic { ratio, nu } => {
                ((nu - one) * softplus((ratio.ln() - x) / nu)).exp()
            }
            ContinuousLaw::Weibull { gamma } => {
                if x <= zero {
                    zero
                } else {
                    -(-gamma * x.powf(one / gamma)).exp_m1()
                }
            }
            ContinuousLaw::HuslerReiss { gamma } => {
                let k = gamma / T::of((8.0 * std::f64::consts::PI).sqrt());
                gumbel_min_cdf(x, gamma / T::SQRT_2(), k)
            }
            ContinuousLaw::DensityDecay { gamma, c } => gumbel_min_cdf(x, one / gamma, c),
            ContinuousLaw::Exponential => MarginalLaw::StandardExponential.cdf(x),
            ContinuousLaw::Laplace => MarginalLaw::StandardLaplace.cdf(x),
            ContinuousLaw::ArchPlus { kappa, theta1 } => {
                // 2Φ(w) − 1 = erf(w/√2), accurate for small w
                let w = (x / kappa).exp() / theta1.sqrt();
                (w * T::FRAC_1_SQRT_2()).erf()
            }
            ContinuousLaw::ArchMinus { kappa, theta1 } => {
                let w = (-x / kappa).exp() / theta1.sqrt();
                T::of(2.0) * norm_sf(w)
            }
        }
    }

    /// Inverse cdf on (0, 1).
    pub fn quantile(&self, p: T) -> Result<T> {
        let one = T::one();
        if !(p > T::zero() && p < one) {
            return Err(Error::domain("p", p.as_f64(), "(0, 1)"));
        }
        let half = T::of(0.5);
        Ok(match *self {
            ContinuousLaw::Gaussian { sd } => sd * norm_quantile(p),
            ContinuousLaw::LogisticBev { gamma } => -gamma * (p.ln() / (gamma - one)).exp_m1().ln(),
            ContinuousLaw::AsymLogistic { ratio, nu } => {
                ratio.ln() - nu * (p.ln() / (nu - one)).exp_m1().ln()
            }
            ContinuousLaw::Weibull { gamma } => (-(-p).ln_1p() / gamma).powf(gamma),
            ContinuousLaw::HuslerReiss { gamma } => {
                let k = gamma / T::of((8.0 * std::f64::consts::PI).sqrt());
                gumbel_min_quantile(p, gamma / T::SQRT_2(), k)
            }
            ContinuousLaw::DensityDecay { gamma, c } => gumbel_min_quantile(p, one / gamma, c),
            ContinuousLaw::Exponential => MarginalLaw::StandardExponential.quantile(p)?,
            ContinuousLaw::Laplace => MarginalLaw::StandardLaplace.quantile(p)?,
            ContinuousLaw::ArchPlus { kappa, theta1 } => {
                // Φ(w) = (1 + p)/2, so w is the upper (1 − p)/2 point
                let w = norm_isf((one - p) * half);
                kappa * (theta1.sqrt() * w).ln()
            }
            ContinuousLaw::ArchMinus { kappa, theta1 } => {
                let w = norm_isf(p * half);
                -kappa * (theta1.sqrt() * w).ln()
            }
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        match *self {
            ContinuousLaw::Gaussian { sd } => sd * T::standard_normal(rng),
            ContinuousLaw::Exponential => T::standard_exponential(rng),
            _ => {
                let u = T::open01(rng);
                // quantile only fails outside (0, 1), which open01 excludes
                self.quantile(u).unwrap_or_else(|_| T::nan())
            }
        }
    }

    /// Lower end of the support.
    pub fn support_lower(&self) -> T {
        match self {
            ContinuousLaw::Weibull { .. } | ContinuousLaw::Exponential => T::zero(),
            _ => T::neg_infinity(),
        }
    }
}

/// K = atom_lo·δ_{−∞} + (1 − atom_lo − atom_hi)·G + atom_hi·δ_{+∞}.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitLaw<T> {
    pub continuous: ContinuousLaw<T>,
    pub atom_lo: T,
    pub atom_hi: T,
}

impl<T: Scalar> LimitLaw<T> {
    pub fn atomless(continuous: ContinuousLaw<T>) -> Self {
        LimitLaw { continuous, atom_lo: T::zero(), atom_hi: T::zero() }
    }

    pub fn with_atoms(continuous: ContinuousLaw<T>, atom_lo: T, atom_hi: T) -> Result<Self> {
        let zero = T::zero();
        if !(atom_lo >= zero && atom_hi >= zero && atom_lo + atom_hi < T::one()) {
            return Err(Error::validation(
                "atoms",
                (atom_lo + atom_hi).as_f64(),
                "nonnegative with total mass below 1",
            ));
        }
        Ok(LimitLaw { continuous, atom_lo, atom_hi })
    }

    pub fn has_atoms(&self) -> bool {
        self.atom_lo > T::zero() || self.atom_hi > T::zero()
    }

    /// Mass carried by the continuous component.
    pub fn continuous_mass(&self) -> T {
        T::one() - self.atom_lo - self.atom_hi
    }

    /// K(x) for finite x, counting the atom at −∞.
    pub fn cdf(&self, x: T) -> T {
        self.atom_lo + self.continuous_mass() * self.continuous.cdf(x)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ExtendedReal<T> {
        if !self.has_atoms() {
            return ExtendedReal::Finite(self.continuous.sample(rng));
        }
        let u = T::open01(rng);
        if u < self.atom_lo {
            ExtendedReal::NegInf
        } else if u > T::one() - self.atom_hi {
            ExtendedReal::PosInf
        } else {
            ExtendedReal::Finite(self.continuous.sample(rng))
        }
    }
}

/// Catalogue of limit laws addressable from configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case", deny_unknown_fields)]
pub enum LimitParams {
    Gaussian { sd: f64 },
    /// Gaussian copula limit on the stated margin ("exponential", "laplace" or "gaussian").
    GaussianCopula { rho: f64, margin: String },
    LogisticBev { gamma: f64 },
    InvertedLogistic { gamma: f64 },
    HuslerReiss { gamma: f64 },
    DensityDecay { gamma: f64, delta: f64 },
    /// K1 of the asymmetric logistic kernel under location norming.
    AsymLogisticLocation { phi1: f64, phi2: f64, nu: f64 },
    /// K2 of the asymmetric logistic kernel without location norming.
    AsymLogisticScale { phi1: f64 },
    Exponential,
    Laplace,
    ArchPlus { theta1: f64 },
    ArchMinus { theta1: f64 },
    ArchKPlus { theta1: f64 },
    ArchKMinus { theta1: f64 },
    /// The exponential autoregression; no closed-form limit is known.
    ExpAr { phi: f64 },
}

fn positive<T: Scalar>(name: &'static str, v: f64) -> Result<T> {
    if v > 0.0 && v.is_finite() {
        Ok(T::of(v))
    } else {
        Err(Error::validation(name, v, "positive and finite"))
    }
}

fn unit_open<T: Scalar>(name: &'static str, v: f64) -> Result<T> {
    if v > 0.0 && v < 1.0 {
        Ok(T::of(v))
    } else {
        Err(Error::validation(name, v, "0 < value < 1"))
    }
}

fn arch_law<T: Scalar>(theta1: f64, plus: bool) -> Result<ContinuousLaw<T>> {
    if !(theta1 > 0.0 && theta1 <= 1.0) {
        return Err(Error::validation("theta1", theta1, "0 < theta1 <= 1"));
    }
    let theta1 = T::of(theta1);
    let kappa = arch_tail_index(theta1)?;
    Ok(if plus {
        ContinuousLaw::ArchPlus { kappa, theta1 }
    } else {
        ContinuousLaw::ArchMinus { kappa, theta1 }
    })
}

/// Gaussian copula limit: Φ(x/(1 − ρ²)^{1/2}) on Gaussian margins and
/// Φ(x/(2ρ²(1 − ρ²))^{1/2}) on exponential or Laplace margins.
pub fn gaussian_copula_limit<T: Scalar>(rho: T, margin: &MarginalLaw<T>) -> Result<LimitLaw<T>> {
    let one = T::one();
    if !(rho.abs() < one) || rho == T::zero() {
        return Err(Error::validation("rho", rho.as_f64(), "-1 < rho < 1, rho != 0"));
    }
    let var = match margin {
        MarginalLaw::StandardGaussian => one - rho * rho,
        MarginalLaw::StandardExponential | MarginalLaw::StandardLaplace => {
            T::of(2.0) * rho * rho * (one - rho * rho)
        }
        other => return Err(Error::Unsupported(format!("Gaussian copula limit on {} margins", other.name()))),
    };
    Ok(LimitLaw::atomless(ContinuousLaw::Gaussian { sd: var.sqrt() }))
}

/// Builds a limit law from its catalogue entry.
pub fn limit_law<T: Scalar>(p: &LimitParams) -> Result<LimitLaw<T>> {
    let half = T::of(0.5);
    Ok(match p {
        LimitParams::Gaussian { sd } => LimitLaw::atomless(ContinuousLaw::Gaussian { sd: positive("sd", *sd)? }),
        LimitParams::GaussianCopula { rho, margin } => {
            let m = match margin.as_str() {
                "exponential" => MarginalLaw::StandardExponential,
                "laplace" => MarginalLaw::StandardLaplace,
                "gaussian" => MarginalLaw::StandardGaussian,
                other => return Err(Error::Unsupported(format!("margin {other:?}"))),
            };
            gaussian_copula_limit(T::of(*rho), &m)?
        }
        LimitParams::LogisticBev { gamma } => {
            LimitLaw::atomless(ContinuousLaw::LogisticBev { gamma: unit_open("gamma", *gamma)? })
        }
        LimitParams::InvertedLogistic { gamma } => {
            LimitLaw::atomless(ContinuousLaw::Weibull { gamma: unit_open("gamma", *gamma)? })
        }
        LimitParams::HuslerReiss { gamma } => {
            LimitLaw::atomless(ContinuousLaw::HuslerReiss { gamma: positive("gamma", *gamma)? })
        }
        LimitParams::DensityDecay { gamma, delta } => {
            let gamma_t: T = positive("gamma", *gamma)?;
            let c = delta + 2.0 * (1.0 + gamma);
            LimitLaw::atomless(ContinuousLaw::DensityDecay { gamma: gamma_t, c: positive("c", c)? })
        }
        LimitParams::AsymLogisticLocation { phi1, phi2, nu } => {
            let phi1_t: T = unit_open("phi1", *phi1)?;
            let phi2_t: T = unit_open("phi2", *phi2)?;
            let g = ContinuousLaw::AsymLogistic { ratio: phi2_t / phi1_t, nu: unit_open("nu", *nu)? };
            LimitLaw::with_atoms(g, T::one() - phi1_t, T::zero())?
        }
        LimitParams::AsymLogisticScale { phi1 } => {
            let phi1_t: T = unit_open("phi1", *phi1)?;
            LimitLaw::with_atoms(ContinuousLaw::Exponential, T::zero(), phi1_t)?
        }
        LimitParams::Exponential => LimitLaw::atomless(ContinuousLaw::Exponential),
        LimitParams::Laplace => LimitLaw::atomless(ContinuousLaw::Laplace),
        LimitParams::ArchPlus { theta1 } => LimitLaw::atomless(arch_law(*theta1, true)?),
        LimitParams::ArchMinus { theta1 } => LimitLaw::atomless(arch_law(*theta1, false)?),
        LimitParams::ArchKPlus { theta1 } => LimitLaw::with_atoms(arch_law(*theta1, true)?, half, T::zero())?,
        LimitParams::ArchKMinus { theta1 } => LimitLaw::with_atoms(arch_law(*theta1, false)?, T::zero(), half)?,
        LimitParams::ExpAr { .. } => {
            return Err(Error::Unsupported(
                "no closed-form limit kernel is available for the exponential autoregression".into(),
            ))
        }
    })
}
