use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ExponentMeasure, KernelSpec, SpectralDensity};
use crate::error::{Error, Result};
use crate::margins::MarginalLaw;
use crate::numerics::arch::{arch_stationary_fit_with, ArchFitOptions};
use crate::numerics::fixed_point::solve_fv_fixed_point;
use crate::scalar::Scalar;

/// Raw kernel description as it appears in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelParams {
    GaussianCopula {
        rho: f64,
        /// "exponential" (default), "laplace" or "gaussian".
        #[serde(default, skip_serializing_if = "Option::is_none")]
        margin: Option<String>,
    },
    BevLogistic {
        gamma: f64,
    },
    InvertedBevLogistic {
        gamma: f64,
    },
    AsymmetricLogistic {
        phi1: f64,
        phi2: f64,
        nu: f64,
    },
    InvertedMaxStable {
        exponent: ExponentParams,
    },
    ExpAr {
        phi: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grid_size: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
    },
    HtMixture {
        lambda: f64,
        first: Box<KernelParams>,
        second: Box<KernelParams>,
        alpha1: f64,
        beta1: f64,
        alpha2: f64,
        beta2: f64,
    },
    RootzenSmith,
    ArchLaplace {
        theta0: f64,
        theta1: f64,
        /// Length of the simulation behind the stationary law.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fit_steps: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExponentParams {
    HuslerReiss { gamma: f64 },
    Density { density: DensityParams },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensityParams {
    SymmetricBeta { a: f64 },
    SymmetricDecay { kappa: f64, gamma: f64, delta: f64 },
}

pub const DEFAULT_FV_GRID: usize = 2048;
pub const DEFAULT_FV_TOL: f64 = 1e-10;

fn margin_by_name<T: Scalar>(name: Option<&str>) -> Result<MarginalLaw<T>> {
    match name.unwrap_or("exponential") {
        "exponential" => Ok(MarginalLaw::StandardExponential),
        "laplace" => Ok(MarginalLaw::StandardLaplace),
        "gaussian" => Ok(MarginalLaw::StandardGaussian),
        other => Err(Error::Unsupported(format!("margin {other:?} for a Gaussian copula"))),
    }
}

impl ExponentParams {
    pub fn build<T: Scalar>(&self) -> Result<ExponentMeasure<T>> {
        match self {
            ExponentParams::HuslerReiss { gamma } => ExponentMeasure::husler_reiss(T::of(*gamma)),
            ExponentParams::Density { density } => Ok(ExponentMeasure::density(match density {
                DensityParams::SymmetricBeta { a } => SpectralDensity::symmetric_beta(T::of(*a))?,
                DensityParams::SymmetricDecay { kappa, gamma, delta } => {
                    SpectralDensity::symmetric_decay(T::of(*kappa), T::of(*gamma), T::of(*delta))?
                }
            })),
        }
    }
}

/// Validates raw parameters and builds the kernel.
///
/// The exponential autoregression solves for its stationary law here and the
/// ARCH kernel fits its stationary law from a simulation seeded by `seed`.
pub fn make_kernel<T: Scalar>(p: &KernelParams, seed: u64) -> Result<KernelSpec<T>> {
    let k = match p {
        KernelParams::GaussianCopula { rho, margin } => KernelSpec::GaussianCopula {
            rho: T::of(*rho),
            margin: margin_by_name(margin.as_deref())?,
        },
        KernelParams::BevLogistic { gamma } => KernelSpec::BevLogistic { gamma: T::of(*gamma) },
        KernelParams::InvertedBevLogistic { gamma } => {
            KernelSpec::InvertedBevLogistic { gamma: T::of(*gamma) }
        }
        KernelParams::AsymmetricLogistic { phi1, phi2, nu } => KernelSpec::AsymmetricLogistic {
            phi1: T::of(*phi1),
            phi2: T::of(*phi2),
            nu: T::of(*nu),
        },
        KernelParams::InvertedMaxStable { exponent } => KernelSpec::InvertedMaxStable {
            exponent: exponent.build()?,
        },
        KernelParams::ExpAr { phi, grid_size, tol } => {
            let phi_t = T::of(*phi);
            if !(phi_t > T::zero() && phi_t < T::one()) {
                return Err(Error::validation("phi", *phi, "0 < phi < 1"));
            }
            let fv = solve_fv_fixed_point(
                phi_t,
                grid_size.unwrap_or(DEFAULT_FV_GRID),
                T::of(tol.unwrap_or(DEFAULT_FV_TOL)),
            )?;
            KernelSpec::ExpAr { phi: phi_t, fv: Arc::new(fv) }
        }
        KernelParams::HtMixture { lambda, first, second, alpha1, beta1, alpha2, beta2 } => {
            if !(alpha1 > alpha2) {
                return Err(Error::validation("alpha1", *alpha1, "alpha1 > alpha2"));
            }
            KernelSpec::HtMixture {
                lambda: T::of(*lambda),
                first: Box::new(make_kernel(first, seed)?),
                second: Box::new(make_kernel(second, seed.wrapping_add(1))?),
                alpha1: T::of(*alpha1),
                beta1: T::of(*beta1),
                alpha2: T::of(*alpha2),
                beta2: T::of(*beta2),
            }
        }
        KernelParams::RootzenSmith => KernelSpec::RootzenSmith,
        KernelParams::ArchLaplace { theta0, theta1, fit_steps } => {
            let mut opts = ArchFitOptions::default();
            if let Some(n) = fit_steps {
                opts.steps = *n;
            }
            let law = arch_stationary_fit_with(T::of(*theta0), T::of(*theta1), seed, opts)?;
            let MarginalLaw::ArchStationary(stationary) = law else {
                return Err(Error::Internal("ARCH fit returned a different law".into()));
            };
            KernelSpec::ArchLaplace { theta0: T::of(*theta0), theta1: T::of(*theta1), stationary }
        }
    };
    k.checked()
}
