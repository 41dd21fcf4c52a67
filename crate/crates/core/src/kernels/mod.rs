//! Bivariate transition kernels π(x, ·) with exact conditional cdfs and
//! samplers.
//!
//! Every kernel lives on a declared marginal scale: standard exponential for
//! the copula examples, standard Laplace for the tail switching ones. Forms
//! stated on the Fréchet scale are evaluated internally through
//! T(x) = −1/ln(1 − e^{−x}).

mod exponent;
mod params;

use std::sync::Arc;

use rand::Rng;

pub use exponent::{ExponentMeasure, SpectralDensity};
pub use params::{make_kernel, DensityParams, ExponentParams, KernelParams};

use crate::error::{Error, Result};
use crate::margins::{transform, ArchStationary, MarginalLaw};
use crate::numerics::fixed_point::FvSolution;
use crate::numerics::root::{bracket_root, RootOptions};
use crate::numerics::special::{norm_cdf, norm_quantile};
use crate::scalar::Scalar;

/// Initial half-width of the inverse-cdf bracket around the conditioning state.
pub const BRACKET_HALF_WIDTH: f64 = 50.0;
/// Number of times the bracket may double before sampling gives up.
pub const BRACKET_DOUBLINGS: usize = 10;
/// Probability tolerance of the inverse-cdf root search.
pub const SAMPLE_TOL: f64 = 1e-12;

/// A parameterised transition kernel.
#[derive(Debug, Clone)]
pub enum KernelSpec<T> {
    /// Gaussian copula with correlation ρ, on the given stationary margin.
    GaussianCopula { rho: T, margin: MarginalLaw<T> },
    /// Bivariate extreme value copula, symmetric logistic dependence, exponential margins.
    BevLogistic { gamma: T },
    /// Inverted logistic BEV copula, exponential margins.
    InvertedBevLogistic { gamma: T },
    /// Asymmetric logistic BEV copula, exponential margins.
    AsymmetricLogistic { phi1: T, phi2: T, nu: T },
    /// Inverted max-stable copula for a general exponent measure, exponential margins.
    InvertedMaxStable { exponent: ExponentMeasure<T> },
    /// Exponential autoregression with constant slowly varying function.
    ExpAr { phi: T, fv: Arc<FvSolution<T>> },
    /// λπ1 + (1 − λ)π2 with canonical normings (α_i, β_i), α1 > α2.
    HtMixture {
        lambda: T,
        first: Box<KernelSpec<T>>,
        second: Box<KernelSpec<T>>,
        alpha1: T,
        beta1: T,
        alpha2: T,
        beta2: T,
    },
    /// X_{t+1} = −X_t with probability ½, otherwise a fresh Laplace draw.
    RootzenSmith,
    /// ARCH(1) transformed to Laplace margins.
    ArchLaplace { theta0: T, theta1: T, stationary: Arc<ArchStationary<T>> },
}

fn softplus<T: Scalar>(s: T) -> T {
    s.max(T::zero()) + (-s.abs()).exp().ln_1p()
}

/// ln T(x) for the exponential-to-Fréchet map T(x) = −1/ln(1 − e^{−x}).
pub fn log_frechet<T: Scalar>(x: T) -> T {
    let l = if x > T::LN_2() {
        (-(-x).exp()).ln_1p()
    } else {
        (-(-x).exp_m1()).ln()
    };
    -(-l).ln()
}

/// Logistic family on the exponential scale; the symmetric BEV is φ1 = φ2 = 1.
fn asym_logistic_cdf<T: Scalar>(phi1: T, phi2: T, nu: T, x: T, y: T) -> T {
    let one = T::one();
    let lx = log_frechet(x);
    let ly = log_frechet(y);
    let s = ((phi2 / phi1).ln() + lx - ly) / nu;
    let sp = softplus(s);
    let lead = (one - phi1) + phi1 * ((nu - one) * sp).exp();
    let expo = -(-lx).exp() * phi1 * (nu * sp).exp_m1() - (one - phi2) * (-ly).exp();
    (lead * expo.exp()).min(one)
}

fn inverted_logistic_cdf<T: Scalar>(gamma: T, x: T, y: T) -> T {
    let s = (y.ln() - x.ln()) / gamma;
    let sp = softplus(s);
    let log_surv = (gamma - T::one()) * sp - x * (gamma * sp).exp_m1();
    -log_surv.exp_m1()
}

impl<T: Scalar> KernelSpec<T> {
    pub fn id(&self) -> &'static str {
        match self {
            KernelSpec::GaussianCopula { .. } => "gaussian_copula",
            KernelSpec::BevLogistic { .. } => "bev_logistic",
            KernelSpec::InvertedBevLogistic { .. } => "inverted_bev_logistic",
            KernelSpec::AsymmetricLogistic { .. } => "asymmetric_logistic",
            KernelSpec::InvertedMaxStable { .. } => "inverted_max_stable",
            KernelSpec::ExpAr { .. } => "exp_ar",
            KernelSpec::HtMixture { .. } => "ht_mixture",
            KernelSpec::RootzenSmith => "rootzen_smith",
            KernelSpec::ArchLaplace { .. } => "arch_laplace",
        }
    }

    /// The stationary marginal law the kernel preserves.
    pub fn margin(&self) -> MarginalLaw<T> {
        match self {
            KernelSpec::GaussianCopula { margin, .. } => margin.clone(),
            KernelSpec::RootzenSmith | KernelSpec::ArchLaplace { .. } => MarginalLaw::StandardLaplace,
            KernelSpec::HtMixture { first, .. } => first.margin(),
            _ => MarginalLaw::StandardExponential,
        }
    }

    fn check_state(&self, x: T) -> Result<()> {
        if !x.is_finite() {
            return Err(Error::domain("x", x.as_f64(), "finite conditioning state"));
        }
        match self.margin() {
            MarginalLaw::StandardExponential if x <= T::zero() => {
                Err(Error::domain("x", x.as_f64(), "x > 0 on the exponential scale"))
            }
            _ => Ok(()),
        }
    }

    fn validate(&self) -> Result<()> {
        let zero = T::zero();
        let one = T::one();
        let open01 = |name, v: T| {
            if v > zero && v < one {
                Ok(())
            } else {
                Err(Error::validation(name, v.as_f64(), "0 < value < 1"))
            }
        };
        match self {
            KernelSpec::GaussianCopula { rho, margin } => {
                if !(rho.abs() < one) || *rho == zero {
                    return Err(Error::validation("rho", rho.as_f64(), "-1 < rho < 1, rho != 0"));
                }
                if matches!(margin, MarginalLaw::StandardFrechet | MarginalLaw::ArchStationary(_)) {
                    return Err(Error::Unsupported(format!(
                        "Gaussian copula on {} margins",
                        margin.name()
                    )));
                }
                Ok(())
            }
            KernelSpec::BevLogistic { gamma } | KernelSpec::InvertedBevLogistic { gamma } => {
                open01("gamma", *gamma)
            }
            KernelSpec::AsymmetricLogistic { phi1, phi2, nu } => {
                open01("phi1", *phi1)?;
                open01("phi2", *phi2)?;
                open01("nu", *nu)
            }
            KernelSpec::InvertedMaxStable { .. } => Ok(()),
            KernelSpec::ExpAr { phi, fv } => {
                open01("phi", *phi)?;
                if fv.phi() != *phi {
                    return Err(Error::validation("phi", phi.as_f64(), "equal to the solved F_V"));
                }
                Ok(())
            }
            KernelSpec::HtMixture { lambda, first, second, alpha1, beta1, alpha2, beta2 } => {
                open01("lambda", *lambda)?;
                if !(*alpha1 > *alpha2) {
                    return Err(Error::validation("alpha1", alpha1.as_f64(), "alpha1 > alpha2"));
                }
                for (name, a) in [("alpha1", *alpha1), ("alpha2", *alpha2)] {
                    if !(a >= zero && a <= one) {
                        return Err(Error::validation(name, a.as_f64(), "0 <= alpha <= 1"));
                    }
                }
                for (name, b) in [("beta1", *beta1), ("beta2", *beta2)] {
                    if !(b >= zero && b < one) {
                        return Err(Error::validation(name, b.as_f64(), "0 <= beta < 1"));
                    }
                }
                first.validate()?;
                second.validate()?;
                if first.margin().name() != second.margin().name() {
                    return Err(Error::validation("second", 0.0, "same margin as first component"));
                }
                Ok(())
            }
            KernelSpec::RootzenSmith => Ok(()),
            KernelSpec::ArchLaplace { theta0, theta1, .. } => {
                if !(*theta0 > zero) {
                    return Err(Error::validation("theta0", theta0.as_f64(), "theta0 > 0"));
                }
                if !(*theta1 > zero && *theta1 <= one) {
                    return Err(Error::validation("theta1", theta1.as_f64(), "0 < theta1 <= 1"));
                }
                Ok(())
            }
        }
    }

    /// Validated constructor for an arbitrary variant.
    pub fn checked(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }
}

/// Pr(X_{t+1} ≤ y | X_t = x).
pub fn kernel_cdf<T: Scalar>(k: &KernelSpec<T>, x: T, y: T) -> Result<T> {
    k.check_state(x)?;
    if y.is_nan() {
        return Err(Error::domain("y", f64::NAN, "extended reals"));
    }
    let zero = T::zero();
    let one = T::one();
    if y == T::infinity() {
        return Ok(one);
    }
    if y == T::neg_infinity() {
        return Ok(zero);
    }
    let exp_scale = matches!(k.margin(), MarginalLaw::StandardExponential);
    if exp_scale && y <= zero {
        return Ok(zero);
    }
    Ok(match k {
        KernelSpec::GaussianCopula { rho, margin } => {
            let z = |v: T| -> Result<T> { transform(v, margin, &MarginalLaw::StandardGaussian) };
            let zx = z(x)?;
            let zy = z(y)?;
            norm_cdf((zy - *rho * zx) / (one - *rho * *rho).sqrt())
        }
        KernelSpec::BevLogistic { gamma } => asym_logistic_cdf(one, one, *gamma, x, y),
        KernelSpec::InvertedBevLogistic { gamma } => inverted_logistic_cdf(*gamma, x, y),
        KernelSpec::AsymmetricLogistic { phi1, phi2, nu } => asym_logistic_cdf(*phi1, *phi2, *nu, x, y),
        KernelSpec::InvertedMaxStable { exponent } => {
            let (log_neg_v1, one_minus_v) = exponent.inverted_terms(x / y)?;
            -(log_neg_v1 + x * one_minus_v).exp_m1()
        }
        KernelSpec::ExpAr { phi, fv } => {
            let ux = fv.isf_log(x)?;
            let uy = fv.isf_log(y)?;
            let e = uy - *phi * ux + one;
            if e <= zero {
                zero
            } else {
                -(-e).exp_m1()
            }
        }
        KernelSpec::HtMixture { lambda, first, second, .. } => {
            *lambda * kernel_cdf(first, x, y)? + (one - *lambda) * kernel_cdf(second, x, y)?
        }
        KernelSpec::RootzenSmith => {
            let jump = if y >= -x { T::of(0.5) } else { zero };
            jump + T::of(0.5) * MarginalLaw::StandardLaplace.cdf(y)
        }
        KernelSpec::ArchLaplace { theta0, theta1, stationary } => {
            let law = MarginalLaw::ArchStationary(stationary.clone());
            let lap = MarginalLaw::StandardLaplace;
            let ax = transform(x, &lap, &law)?;
            let ay = transform(y, &lap, &law)?;
            norm_cdf(ay / (*theta0 + *theta1 * ax * ax).sqrt())
        }
    })
}

/// The u-quantile of π(x, ·). Kernels with a closed-form conditional
/// quantile use it; the rest invert [`kernel_cdf`] numerically.
pub fn kernel_quantile<T: Scalar>(k: &KernelSpec<T>, x: T, u: T) -> Result<T> {
    k.check_state(x)?;
    if !(u > T::zero() && u < T::one()) {
        return Err(Error::domain("u", u.as_f64(), "(0, 1)"));
    }
    let one = T::one();
    let half = T::of(0.5);
    match k {
        KernelSpec::GaussianCopula { rho, margin } => {
            let g = MarginalLaw::StandardGaussian;
            let zx = transform(x, margin, &g)?;
            let z = *rho * zx + (one - *rho * *rho).sqrt() * norm_quantile(u);
            transform(z, &g, margin)
        }
        KernelSpec::ExpAr { phi, fv } => {
            let ux = fv.isf_log(x)?;
            let v = *phi * ux - one - (-u).ln_1p();
            Ok(exp_ar_state(fv, v))
        }
        KernelSpec::RootzenSmith => {
            let lap = MarginalLaw::StandardLaplace;
            let below = half * lap.cdf(-x);
            if u < below {
                lap.quantile(u / half)
            } else if u <= below + half {
                Ok(-x)
            } else {
                lap.quantile((u - half) / half)
            }
        }
        KernelSpec::ArchLaplace { theta0, theta1, stationary } => {
            let law = MarginalLaw::ArchStationary(stationary.clone());
            let lap = MarginalLaw::StandardLaplace;
            let ax = transform(x, &lap, &law)?;
            let y = (*theta0 + *theta1 * ax * ax).sqrt() * norm_quantile(u);
            transform(y, &law, &lap)
        }
        _ => invert_cdf(k, x, u),
    }
}

// Exponential-scale state of an AR value. The survival grid is flat at the
// lower endpoint, so keep the state strictly inside the support.
fn exp_ar_state<T: Scalar>(fv: &FvSolution<T>, v: T) -> T {
    fv.neg_log_sf(v).max(T::min_positive_value())
}

fn invert_cdf<T: Scalar>(k: &KernelSpec<T>, x: T, u: T) -> Result<T> {
    let fail = || Error::Sampling { x: x.as_f64(), u: u.as_f64() };
    let f = |y: T| kernel_cdf(k, x, y).map(|p| p - u);
    let mut half_width = T::of(BRACKET_HALF_WIDTH);
    let mut doublings = 0;
    let (lo, hi) = loop {
        let lo = x - half_width;
        let hi = x + half_width;
        let flo = f(lo).map_err(|_| fail())?;
        let fhi = f(hi).map_err(|_| fail())?;
        if flo <= T::zero() && fhi >= T::zero() {
            break (lo, hi);
        }
        if doublings == BRACKET_DOUBLINGS {
            return Err(fail());
        }
        half_width = half_width * T::of(2.0);
        doublings += 1;
    };
    let opts = RootOptions {
        x_tol: T::of(1e-13) * (T::one() + x.abs()),
        f_tol: T::of(SAMPLE_TOL),
        max_iter: 300,
    };
    let g = |y: T| f(y).unwrap_or(T::nan());
    bracket_root(g, lo, hi, opts).map(|b| b.root).map_err(|_| fail())
}

/// One draw from π(x, ·).
pub fn kernel_sample<T: Scalar, R: Rng + ?Sized>(k: &KernelSpec<T>, x: T, rng: &mut R) -> Result<T> {
    match k {
        KernelSpec::GaussianCopula { rho, margin } => {
            k.check_state(x)?;
            let g = MarginalLaw::StandardGaussian;
            let zx = transform(x, margin, &g)?;
            let z = *rho * zx + (T::one() - *rho * *rho).sqrt() * T::standard_normal(rng);
            transform(z, &g, margin)
        }
        KernelSpec::ExpAr { phi, fv } => {
            k.check_state(x)?;
            let v = *phi * fv.isf_log(x)? + T::standard_exponential(rng) - T::one();
            Ok(exp_ar_state(fv, v))
        }
        KernelSpec::HtMixture { lambda, first, second, .. } => {
            k.check_state(x)?;
            if T::open01(rng) < *lambda {
                kernel_sample(first, x, rng)
            } else {
                kernel_sample(second, x, rng)
            }
        }
        KernelSpec::RootzenSmith => {
            k.check_state(x)?;
            if rng.random::<bool>() {
                Ok(-x)
            } else {
                Ok(MarginalLaw::StandardLaplace.sample(rng))
            }
        }
        KernelSpec::ArchLaplace { theta0, theta1, stationary } => {
            k.check_state(x)?;
            let law = MarginalLaw::ArchStationary(stationary.clone());
            let lap = MarginalLaw::StandardLaplace;
            let ax = transform(x, &lap, &law)?;
            let y = (*theta0 + *theta1 * ax * ax).sqrt() * T::standard_normal(rng);
            transform(y, &law, &lap)
        }
        _ => kernel_quantile(k, x, T::open01(rng)),
    }
}

#[cfg(test)]
mod tests;
