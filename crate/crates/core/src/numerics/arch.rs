//! Tail index and stationary law of the ARCH(1) recursion
//! Y_t = (θ0 + θ1 Y_{t−1}²)^{1/2} W_t with standard Gaussian W_t.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::slice::ParallelSliceMut;

use crate::error::{Error, Result};
use crate::margins::{ArchStationary, MarginalLaw};
use crate::numerics::grid::GridFunction;
use crate::numerics::root::solve_root;
use crate::numerics::special::ln_gamma;
use crate::scalar::Scalar;

/// Tail index κ = 2u of the stationary ARCH(1) law, where u > 0 solves
/// E[(θ1 W²)^u] = 1, i.e. (2θ1)^u Γ(u + ½)/√π = 1.
///
/// θ1 = 1 is the closed-form case E[W²] = 1, returned as exactly 2.
pub fn arch_tail_index<T: Scalar>(theta1: T) -> Result<T> {
    if !(theta1 > T::zero() && theta1 <= T::one()) {
        return Err(Error::validation("theta1", theta1.as_f64(), "0 < theta1 <= 1"));
    }
    if theta1 == T::one() {
        return Ok(T::of(2.0));
    }
    let ln_sqrt_pi = T::of(0.5 * std::f64::consts::PI.ln());
    let ln_2t = (T::of(2.0) * theta1).ln();
    let g = move |u: T| u * ln_2t + ln_gamma(u + T::of(0.5)) - ln_sqrt_pi;
    // g(0) = 0 with g'(0) < 0, so the positive root sits right of a point
    // where g is still negative.
    let lo = T::of(0.05);
    let mut hi = T::of(2.0);
    let mut guard = 0;
    while g(hi) <= T::zero() {
        hi = hi * T::of(2.0);
        guard += 1;
        if guard > 60 {
            return Err(Error::Internal("tail index bracket did not close".into()));
        }
    }
    let tol = T::epsilon().sqrt() * T::of(1e-4) * hi;
    let u = solve_root(g, lo, hi, tol.max(T::epsilon() * hi * T::of(4.0)))?;
    Ok(T::of(2.0) * u)
}

/// Simulation sizes for [`arch_stationary_fit_with`].
#[derive(Debug, Clone, Copy)]
pub struct ArchFitOptions {
    pub burn_in: usize,
    pub steps: usize,
    /// Number of grid points, split evenly between the two half-lines.
    pub grid_points: usize,
}

impl Default for ArchFitOptions {
    fn default() -> Self {
        ArchFitOptions {
            burn_in: 10_000,
            steps: 10_000_000,
            grid_points: 4096,
        }
    }
}

/// Probability mass beyond the blend point in each tail.
pub const ARCH_TAIL_MASS: f64 = 0.001;

/// Fits the stationary law with the default simulation sizes.
pub fn arch_stationary_fit<T: Scalar>(theta0: T, theta1: T, seed: u64) -> Result<MarginalLaw<T>> {
    arch_stationary_fit_with(theta0, theta1, seed, ArchFitOptions::default())
}

/// Simulates the recursion, takes the symmetrised empirical law of |Y| on a
/// quantile grid, and attaches the Pareto tail c x^{−κ} beyond the
/// 1 − [`ARCH_TAIL_MASS`] quantile, with c fixed by continuity there.
pub fn arch_stationary_fit_with<T: Scalar>(
    theta0: T,
    theta1: T,
    seed: u64,
    opts: ArchFitOptions,
) -> Result<MarginalLaw<T>> {
    if !(theta0 > T::zero()) || !theta0.is_finite() {
        return Err(Error::validation("theta0", theta0.as_f64(), "theta0 > 0"));
    }
    let kappa = arch_tail_index(theta1)?;
    let half_points = opts.grid_points / 2;
    if half_points < 8 || opts.steps < 10 * half_points {
        return Err(Error::validation(
            "steps",
            opts.steps as f64,
            "at least ten draws per grid point",
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y = T::zero();
    for _ in 0..opts.burn_in {
        y = (theta0 + theta1 * y * y).sqrt() * T::standard_normal(&mut rng);
    }
    let mut abs = Vec::with_capacity(opts.steps);
    for _ in 0..opts.steps {
        y = (theta0 + theta1 * y * y).sqrt() * T::standard_normal(&mut rng);
        if !y.is_finite() {
            return Err(Error::Internal(format!("ARCH state became {y}")));
        }
        abs.push(y.abs());
    }
    abs.par_sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite states"));

    // |Y| quantiles at levels q_k = (1 − 2·mass)(k + 1)/K; the last one is the
    // blend point where F = 1 − mass.
    let body = 1.0 - 2.0 * ARCH_TAIL_MASS;
    let n = abs.len();
    let mut pos: Vec<(T, T)> = Vec::with_capacity(half_points);
    for k in 0..half_points {
        let q = body * (k + 1) as f64 / half_points as f64;
        let idx = ((q * n as f64).ceil() as usize).clamp(1, n) - 1;
        let x = abs[idx];
        let f = T::of(0.5 + 0.5 * q);
        match pos.last() {
            Some(&(px, _)) if x <= px => {
                // tie in the sample: keep the higher probability at the same x
                let last = pos.len() - 1;
                pos[last].1 = f;
            }
            _ => pos.push((x, f)),
        }
    }
    if pos[0].0 <= T::zero() {
        return Err(Error::Internal("degenerate ARCH sample at zero".into()));
    }
    let mut xs = Vec::with_capacity(2 * pos.len());
    let mut fs = Vec::with_capacity(2 * pos.len());
    for &(x, f) in pos.iter().rev() {
        xs.push(-x);
        fs.push(T::one() - f);
    }
    for &(x, f) in &pos {
        xs.push(x);
        fs.push(f);
    }
    let grid = GridFunction::linear(xs, fs)?;
    let x_b = pos[pos.len() - 1].0;
    let c = T::of(ARCH_TAIL_MASS) * x_b.powf(kappa);
    Ok(MarginalLaw::ArchStationary(std::sync::Arc::new(ArchStationary::new(
        theta0, theta1, kappa, c, grid,
    )?)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_theta_gives_kappa_two() {
        assert_eq!(arch_tail_index(1.0f64).unwrap(), 2.0);
        // the root finder agrees when pushed next to the closed-form case
        let k = arch_tail_index(1.0f64 - 1e-12).unwrap();
        assert!((k - 2.0).abs() < 1e-9);
    }

    #[test]
    fn kappa_solves_the_moment_equation() {
        for &t in &[0.1f64, 0.5, 0.7, 0.9] {
            let k = arch_tail_index(t).unwrap();
            let u = k / 2.0;
            let lhs = (2.0 * t).powf(u) * crate::numerics::special::gamma(u + 0.5)
                / std::f64::consts::PI.sqrt();
            assert!((lhs - 1.0).abs() < 1e-9, "theta1 = {t}");
        }
    }

    #[test]
    fn heavier_tails_for_larger_theta() {
        assert!(arch_tail_index(0.5f64).unwrap() > arch_tail_index(0.9f64).unwrap());
    }

    #[test]
    fn rejects_theta_outside_unit_interval() {
        assert!(arch_tail_index(0.0f64).is_err());
        assert!(arch_tail_index(1.5f64).is_err());
    }

    #[test]
    fn small_fit_is_symmetric() {
        let opts = ArchFitOptions { burn_in: 1000, steps: 200_000, grid_points: 512 };
        let law = arch_stationary_fit_with(1.0f64, 0.5, 3, opts).unwrap();
        assert!((law.cdf(0.0) - 0.5).abs() < 1e-12);
        for &x in &[0.3, 1.0, 2.5, 6.0, 50.0] {
            assert!((law.cdf(x) + law.cdf(-x) - 1.0).abs() < 1e-12);
        }
    }
}
