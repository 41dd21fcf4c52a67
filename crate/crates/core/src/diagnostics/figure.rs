//! The four exponential-margin chains used to compare actual paths from an
//! extreme start with their tail chain approximation.

use serde::{Deserialize, Serialize};

use super::{conditional_forward_sim, quantile_envelope, EnvelopeSource, InitialState, QuantileEnvelope};
use crate::error::Result;
use crate::kernels::{make_kernel, KernelParams, KernelSpec};
use crate::margins::MarginalLaw;
use crate::norming::{limit_law, LimitLaw, LimitParams, NormingScheme};
use crate::scalar::Scalar;
use crate::tailchain::{reconstruct_paths, simulate_nonneg_tail_chain, simulate_tail_chain};

/// Common extreme start, the 1 − 4.54e-5 quantile of Exp(1).
pub const FIGURE1_X0: f64 = 10.0;

const LOGISTIC_GAMMA: f64 = 0.152;
const EXP_AR_PHI: f64 = 0.8;
const GAUSSIAN_RHO: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Figure1Chain {
    /// (i) logistic BEV copula, asymptotically dependent, (α, β) = (1, 0).
    BevLogistic,
    /// (ii) inverted logistic BEV copula, (α, β) = (0, 1 − γ).
    InvertedBevLogistic,
    /// (iii) exponential autoregression, (α, β) = (φ, 0); no known limit kernel.
    ExpAr,
    /// (iv) Gaussian copula, (α, β) = (ρ², 1/2).
    GaussianCopula,
}

impl Figure1Chain {
    pub const ALL: [Figure1Chain; 4] = [
        Figure1Chain::BevLogistic,
        Figure1Chain::InvertedBevLogistic,
        Figure1Chain::ExpAr,
        Figure1Chain::GaussianCopula,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Figure1Chain::BevLogistic => "i_bev_logistic",
            Figure1Chain::InvertedBevLogistic => "ii_inverted_bev_logistic",
            Figure1Chain::ExpAr => "iii_exp_ar",
            Figure1Chain::GaussianCopula => "iv_gaussian_copula",
        }
    }

    pub fn kernel_params(self) -> KernelParams {
        match self {
            Figure1Chain::BevLogistic => KernelParams::BevLogistic { gamma: LOGISTIC_GAMMA },
            Figure1Chain::InvertedBevLogistic => KernelParams::InvertedBevLogistic { gamma: LOGISTIC_GAMMA },
            Figure1Chain::ExpAr => KernelParams::ExpAr { phi: EXP_AR_PHI, grid_size: None, tol: None },
            Figure1Chain::GaussianCopula => KernelParams::GaussianCopula { rho: GAUSSIAN_RHO, margin: None },
        }
    }

    pub fn kernel<T: Scalar>(self, seed: u64) -> Result<KernelSpec<T>> {
        make_kernel(&self.kernel_params(), seed)
    }

    /// Norming scheme and limit law of the tail chain, when one is known.
    pub fn tail_model<T: Scalar>(self) -> Result<Option<(NormingScheme<T>, LimitLaw<T>)>> {
        let t = T::of;
        Ok(Some(match self {
            Figure1Chain::BevLogistic => (
                NormingScheme::HtCanonical { alpha: T::one(), beta: T::zero() },
                limit_law(&LimitParams::LogisticBev { gamma: LOGISTIC_GAMMA })?,
            ),
            Figure1Chain::InvertedBevLogistic => (
                NormingScheme::HtCanonical { alpha: T::zero(), beta: t(1.0 - LOGISTIC_GAMMA) },
                limit_law(&LimitParams::InvertedLogistic { gamma: LOGISTIC_GAMMA })?,
            ),
            Figure1Chain::ExpAr => return Ok(None),
            Figure1Chain::GaussianCopula => (
                NormingScheme::HtCanonical { alpha: t(GAUSSIAN_RHO * GAUSSIAN_RHO), beta: t(0.5) },
                limit_law(&LimitParams::GaussianCopula { rho: GAUSSIAN_RHO, margin: "exponential".into() })?,
            ),
        }))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure1Output<T> {
    pub chain: Figure1Chain,
    /// Envelope of the chain itself for t = 0..=horizon.
    pub actual: QuantileEnvelope<T>,
    /// Envelope of a_t(x0) + b_t(x0) M_t for t = 0..=horizon, absent for (iii).
    pub tailchain: Option<QuantileEnvelope<T>>,
}

/// Envelopes of the actual chain and of its tail chain approximation, both
/// started from `x0` on the exponential scale.
pub fn figure1<T: Scalar>(chain: Figure1Chain, x0: T, horizon: usize, n: usize, seed: u64) -> Result<Figure1Output<T>> {
    let k = chain.kernel::<T>(seed)?;
    let paths = conditional_forward_sim(&k, &MarginalLaw::StandardExponential, InitialState::FixedX0(x0), horizon, n, seed)?;
    let actual = quantile_envelope(&paths, EnvelopeSource::Actual, 0)?;
    let tailchain = match chain.tail_model::<T>()? {
        None => None,
        Some((scheme, limit)) => {
            let u = scheme.update_functions();
            let sims = match scheme {
                NormingScheme::HtCanonical { alpha, .. } if alpha == T::zero() => {
                    simulate_nonneg_tail_chain(&u, &limit, horizon, n, seed)?
                }
                _ => simulate_tail_chain(&u, &limit, horizon, n, seed)?,
            };
            let m: Vec<Vec<T>> = sims.into_iter().map(|p| p.m).collect();
            let xs: Vec<Vec<T>> = reconstruct_paths(x0, &scheme, &m)?
                .into_iter()
                .map(|p| std::iter::once(x0).chain(p).collect())
                .collect();
            Some(quantile_envelope(&xs, EnvelopeSource::Tailchain, 0)?)
        }
    };
    Ok(Figure1Output { chain, actual, tailchain })
}
