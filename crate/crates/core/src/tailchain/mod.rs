//! Tail chains, hidden tail chains and the reconstruction
//! X^TC_t = a_t(X_0) + b_t(X_0) M_t.

mod changepoint;
mod hidden;


use std::io::Write;

use rand::Rng;

use crate::error::{Error, Result};
use crate::norming::{LimitLaw, NormingScheme, UpdateFunctions};
use crate::numerics::grid::format_real;
use crate::random::{par_map, tag};
use crate::scalar::Scalar;

pub use changepoint::{detect_changepoints, ChangePointRule};
pub use hidden::{
    hidden_arch, hidden_asym_logistic, hidden_ht_mixture, hidden_ht_mixture_path, hidden_rootzen_smith,
    latent_changepoints, HiddenChainPath, HtMixtureChain, MixtureComponent, Regime,
};

/// One draw of (E_0, M_1, …, M_T).
#[derive(Debug, Clone, PartialEq)]
pub struct TailChainPath<T> {
    /// Initial exceedance X_0 − u, standard exponential in the limit.
    pub e0: T,
    /// M_1..M_T; `m[t − 1]` holds M_t.
    pub m: Vec<T>,
}

fn atomless<T: Scalar>(k: &LimitLaw<T>, what: &str) -> Result<()> {
    if k.has_atoms() {
        return Err(Error::Regime(format!(
            "{what} has atoms at ±∞; use one of the hidden tail chain simulators"
        )));
    }
    Ok(())
}

fn finite_draw<T: Scalar, R: Rng + ?Sized>(k: &LimitLaw<T>, rng: &mut R) -> T {
    k.continuous.sample(rng)
}

/// M_1 ∼ K and M_{t+1} = ψ^a_{t+1}(M_t) + ψ^b_{t+1}(M_t) ε_{t+1} with i.i.d. ε ∼ K.
pub fn simulate_tail_chain<T: Scalar>(
    u: &UpdateFunctions<T>,
    k: &LimitLaw<T>,
    horizon: usize,
    n: usize,
    seed: u64,
) -> Result<Vec<TailChainPath<T>>> {
    atomless(k, "limit law")?;
    par_map(n, seed, tag("tail_chain"), |rng, _| {
        let e0 = T::standard_exponential(rng);
        let mut m = Vec::with_capacity(horizon);
        if horizon > 0 {
            m.push(finite_draw(k, rng));
        }
        for t in 1..horizon {
            let eps = finite_draw(k, rng);
            m.push(u.step(t + 1, m[t - 1], eps));
        }
        Ok(TailChainPath { e0, m })
    })
}

/// Multiplicative tail chain M_{t+1} = ψ^b_{t+1}(M_t) ε_{t+1} on (0, ∞).
pub fn simulate_nonneg_tail_chain<T: Scalar>(
    u: &UpdateFunctions<T>,
    k: &LimitLaw<T>,
    horizon: usize,
    n: usize,
    seed: u64,
) -> Result<Vec<TailChainPath<T>>> {
    atomless(k, "limit law")?;
    if k.continuous.support_lower() < T::zero() {
        return Err(Error::Regime(
            "limit law charges the negative half-line; a multiplicative tail chain needs support in (0, ∞)".into(),
        ));
    }
    par_map(n, seed, tag("nonneg_tail_chain"), |rng, _| {
        let e0 = T::standard_exponential(rng);
        let mut m = Vec::with_capacity(horizon);
        if horizon > 0 {
            m.push(finite_draw(k, rng));
        }
        for t in 1..horizon {
            let eps = finite_draw(k, rng);
            m.push(u.psi_b(t + 1, m[t - 1]) * eps);
        }
        Ok(TailChainPath { e0, m })
    })
}

/// Negative-dependence tail chain: M_1 ∼ K−, and the innovation producing
/// M_{t+1} is drawn from K+ when t is odd and from K− when t is even.
pub fn simulate_negdep_tail_chain<T: Scalar>(
    u: &UpdateFunctions<T>,
    k_minus: &LimitLaw<T>,
    k_plus: &LimitLaw<T>,
    horizon: usize,
    n: usize,
    seed: u64,
) -> Result<Vec<TailChainPath<T>>> {
    atomless(k_minus, "lower limit law")?;
    atomless(k_plus, "upper limit law")?;
    par_map(n, seed, tag("negdep_tail_chain"), |rng, _| {
        let e0 = T::standard_exponential(rng);
        let mut m = Vec::with_capacity(horizon);
        if horizon > 0 {
            m.push(finite_draw(k_minus, rng));
        }
        for t in 1..horizon {
            let law = if t % 2 == 1 { k_plus } else { k_minus };
            let eps = finite_draw(law, rng);
            m.push(u.step(t + 1, m[t - 1], eps));
        }
        Ok(TailChainPath { e0, m })
    })
}

/// X^TC_t = a_t(x0) + b_t(x0) M_t for each path; entry t − 1 holds time t.
pub fn reconstruct_paths<T: Scalar>(x0: T, scheme: &NormingScheme<T>, paths: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    let horizon = paths.iter().map(Vec::len).max().unwrap_or(0);
    let normings: Vec<(T, T)> = (1..=horizon).map(|t| scheme.norming(t, x0)).collect::<Result<_>>()?;
    Ok(paths
        .iter()
        .map(|m| m.iter().zip(&normings).map(|(&mt, &(a, b))| a + b * mt).collect())
        .collect())
}

/// Writes tail chain paths as `path_id,t,value,regime,is_changepoint`
/// (regime `tail`, no change-points).
pub fn write_tail_paths_csv<T: Scalar, W: Write>(paths: &[TailChainPath<T>], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(PATH_HEADER)?;
    for (id, p) in paths.iter().enumerate() {
        for (i, &m) in p.m.iter().enumerate() {
            w.write_record([id.to_string(), (i + 1).to_string(), format_real(m), "tail".into(), "false".into()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes hidden chain paths with their regime labels and change-points.
pub fn write_hidden_paths_csv<T: Scalar, W: Write>(paths: &[HiddenChainPath<T>], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(PATH_HEADER)?;
    for (id, p) in paths.iter().enumerate() {
        for (i, (&m, r)) in p.m.iter().zip(&p.regimes).enumerate() {
            let t = i + 1;
            let cp = p.changepoints.contains(&t);
            w.write_record([id.to_string(), t.to_string(), format_real(m), r.label(), cp.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub const PATH_HEADER: [&str; 5] = ["path_id", "t", "value", "regime", "is_changepoint"];
