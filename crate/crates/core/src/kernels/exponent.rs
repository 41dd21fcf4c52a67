//! Exponent measures of bivariate max-stable laws.

use crate::error::{Error, Result};
use crate::numerics::quadrature::quadrature;
use crate::numerics::special::{gamma, norm_cdf, norm_log_sf, norm_sf};
use crate::scalar::Scalar;

const QUAD_TOL: f64 = 1e-12;

/// A spectral density h on [0, 1] with total mass 2 and ∫ w h(w) dw = 1.
///
/// Both families are symmetric about ½, which makes the moment constraint
/// automatic once the mass is normalised.
#[derive(Debug, Clone)]
pub enum SpectralDensity<T> {
    /// h = 2 · Beta(a, a) density, a ≥ 1. a = 1 is the constant h ≡ 2.
    SymmetricBeta { a: T, norm: T },
    /// h(w) ∝ q(w) q(1 − w) with q(w) = w^δ exp(−κ w^{−γ}), so that near 0
    /// h decays like w^δ exp(−κ w^{−γ}).
    SymmetricDecay { kappa: T, gamma: T, delta: T, norm: T },
}

impl<T: Scalar> SpectralDensity<T> {
    pub fn symmetric_beta(a: T) -> Result<Self> {
        if !(a >= T::one()) || !a.is_finite() {
            return Err(Error::validation("a", a.as_f64(), "a >= 1"));
        }
        let beta = gamma(a) * gamma(a) / gamma(a + a);
        let d = SpectralDensity::SymmetricBeta { a, norm: T::of(2.0) / beta };
        d.check_moments()?;
        Ok(d)
    }

    pub fn symmetric_decay(kappa: T, gamma_: T, delta: T) -> Result<Self> {
        if !(kappa > T::zero()) {
            return Err(Error::validation("kappa", kappa.as_f64(), "kappa > 0"));
        }
        if !(gamma_ > T::zero()) {
            return Err(Error::validation("gamma", gamma_.as_f64(), "gamma > 0"));
        }
        if !delta.is_finite() {
            return Err(Error::validation("delta", delta.as_f64(), "finite"));
        }
        let raw = SpectralDensity::SymmetricDecay { kappa, gamma: gamma_, delta, norm: T::one() };
        let mass = quadrature(|w| raw.h(w), T::zero(), T::one(), T::of(QUAD_TOL))?;
        let d = SpectralDensity::SymmetricDecay {
            kappa,
            gamma: gamma_,
            delta,
            norm: T::of(2.0) / mass,
        };
        d.check_moments()?;
        Ok(d)
    }

    pub fn h(&self, w: T) -> T {
        if !(w > T::zero() && w < T::one()) {
            return T::zero();
        }
        let one = T::one();
        match *self {
            SpectralDensity::SymmetricBeta { a, norm } => {
                norm * (w * (one - w)).powf(a - one)
            }
            SpectralDensity::SymmetricDecay { kappa, gamma, delta, norm } => {
                let lq = |u: T| delta * u.ln() - kappa * u.powf(-gamma);
                norm * (lq(w) + lq(one - w)).exp()
            }
        }
    }

    fn check_moments(&self) -> Result<()> {
        let tol = T::of(QUAD_TOL);
        let mass = quadrature(|w| self.h(w), T::zero(), T::one(), tol)?;
        let mean = quadrature(|w| w * self.h(w), T::zero(), T::one(), tol)?;
        let slack = T::of(1e-8).max(T::epsilon() * T::of(100.0));
        if (mass - T::of(2.0)).abs() > slack {
            return Err(Error::validation("spectral mass", mass.as_f64(), "equal to 2"));
        }
        if (mean - T::one()).abs() > slack {
            return Err(Error::validation("spectral mean", mean.as_f64(), "equal to 1"));
        }
        Ok(())
    }
}

/// Exponent measure V of a bivariate max-stable law on unit Fréchet margins.
#[derive(Debug, Clone)]
pub enum ExponentMeasure<T> {
    HuslerReiss { gamma: T },
    DensityFamily { density: SpectralDensity<T> },
}

fn check_args<T: Scalar>(x: T, y: T) -> Result<()> {
    if !(x > T::zero()) {
        return Err(Error::domain("x", x.as_f64(), "x > 0"));
    }
    if !(y > T::zero()) {
        return Err(Error::domain("y", y.as_f64(), "y > 0"));
    }
    Ok(())
}

impl<T: Scalar> ExponentMeasure<T> {
    pub fn husler_reiss(gamma: T) -> Result<Self> {
        if !(gamma > T::zero()) || !gamma.is_finite() {
            return Err(Error::validation("gamma", gamma.as_f64(), "gamma > 0"));
        }
        Ok(ExponentMeasure::HuslerReiss { gamma })
    }

    pub fn density(density: SpectralDensity<T>) -> Self {
        ExponentMeasure::DensityFamily { density }
    }

    /// V(x, y) for x, y > 0; either argument may be +∞.
    pub fn v(&self, x: T, y: T) -> Result<T> {
        check_args(x, y)?;
        if y.is_infinite() {
            return Ok(T::one() / x);
        }
        if x.is_infinite() {
            return Ok(T::one() / y);
        }
        match self {
            ExponentMeasure::HuslerReiss { gamma } => {
                let g = *gamma;
                let half = T::of(0.5) * g;
                let l = (y / x).ln();
                Ok(norm_cdf(half + l / g) / x + norm_cdf(half - l / g) / y)
            }
            ExponentMeasure::DensityFamily { density } => {
                let ws = x / (x + y);
                let tol = T::of(QUAD_TOL);
                let lo = quadrature(|w| (T::one() - w) * density.h(w), T::zero(), ws, tol)?;
                let hi = quadrature(|w| w * density.h(w), ws, T::one(), tol)?;
                Ok(lo / y + hi / x)
            }
        }
    }

    /// ∂V/∂x at (x, y).
    pub fn v1(&self, x: T, y: T) -> Result<T> {
        check_args(x, y)?;
        if y.is_infinite() {
            return Ok(-T::one() / (x * x));
        }
        match self {
            ExponentMeasure::HuslerReiss { gamma } => {
                let g = *gamma;
                let l = (y / x).ln();
                Ok(-norm_cdf(T::of(0.5) * g + l / g) / (x * x))
            }
            ExponentMeasure::DensityFamily { density } => {
                // differentiating under the integral; boundary terms cancel at w*
                let ws = x / (x + y);
                let hi = quadrature(|w| w * density.h(w), ws, T::one(), T::of(QUAD_TOL))?;
                Ok(-hi / (x * x))
            }
        }
    }

    /// ln(−V_1(1, w)) and 1 − V(1, w), evaluated without cancellation where
    /// the closed form allows. These drive the inverted kernel.
    pub(crate) fn inverted_terms(&self, w: T) -> Result<(T, T)> {
        check_args(T::one(), w)?;
        let one = T::one();
        match self {
            ExponentMeasure::HuslerReiss { gamma } => {
                let g = *gamma;
                let l = w.ln();
                let a = T::of(0.5) * g + l / g;
                let b = T::of(0.5) * g - l / g;
                Ok((norm_log_sf(-a), norm_sf(a) - norm_cdf(b) / w))
            }
            ExponentMeasure::DensityFamily { density } => {
                // 1 − V(1, w) = −∫_0^{s} ((1 − u)/w − u) h(u) du with s = 1/(1 + w)
                let s = one / (one + w);
                let tol = T::of(QUAD_TOL);
                let deficit =
                    quadrature(|u| ((one - u) / w - u) * density.h(u), T::zero(), s, tol)?;
                let upper = quadrature(|u| u * density.h(u), s, one, tol)?;
                Ok((upper.ln(), -deficit))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn husler_reiss_at_unit_point() {
        for &g in &[0.3f64, 1.0, 2.5] {
            let e = ExponentMeasure::husler_reiss(g).unwrap();
            let v = e.v(1.0, 1.0).unwrap();
            assert!((v - 2.0 * norm_cdf(g / 2.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn margin_constraint() {
        let hr = ExponentMeasure::husler_reiss(1.0f64).unwrap();
        let uni = ExponentMeasure::density(SpectralDensity::symmetric_beta(1.0f64).unwrap());
        for e in [&hr, &uni] {
            assert!((e.v(2.0, f64::INFINITY).unwrap() - 0.5).abs() < 1e-15);
            assert!((e.v(0.5, f64::INFINITY).unwrap() - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn uniform_density_v11() {
        let e = ExponentMeasure::density(SpectralDensity::symmetric_beta(1.0f64).unwrap());
        assert!((e.v(1.0, 1.0).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn homogeneity_of_order_minus_one() {
        let hr = ExponentMeasure::husler_reiss(0.7f64).unwrap();
        let beta = ExponentMeasure::density(SpectralDensity::symmetric_beta(3.0f64).unwrap());
        let decay = ExponentMeasure::density(SpectralDensity::symmetric_decay(1.0f64, 0.5, 0.0).unwrap());
        for e in [&hr, &beta, &decay] {
            for &(x, y, s) in &[(1.0f64, 2.0, 3.0), (0.3, 0.1, 0.25), (5.0, 1.0, 10.0)] {
                let lhs = e.v(s * x, s * y).unwrap();
                let rhs = e.v(x, y).unwrap() / s;
                assert!((lhs - rhs).abs() < 1e-10 * rhs, "{e:?} {x} {y} {s}");
            }
        }
    }

    #[test]
    fn v1_matches_finite_difference() {
        let beta = ExponentMeasure::density(SpectralDensity::symmetric_beta(2.0f64).unwrap());
        let hr = ExponentMeasure::husler_reiss(1.3f64).unwrap();
        for e in [&beta, &hr] {
            for &(x, y) in &[(1.0f64, 1.0), (0.4, 2.0), (3.0, 0.7)] {
                let h = 1e-5;
                let fd = (e.v(x + h, y).unwrap() - e.v(x - h, y).unwrap()) / (2.0 * h);
                assert!((fd - e.v1(x, y).unwrap()).abs() < 1e-7, "{x} {y}");
            }
        }
    }

    #[test]
    fn inverted_terms_agree_with_direct_formulas() {
        let beta = ExponentMeasure::density(SpectralDensity::symmetric_beta(2.0f64).unwrap());
        let hr = ExponentMeasure::husler_reiss(1.0f64).unwrap();
        for e in [&beta, &hr] {
            for &y in &[0.2f64, 1.0, 4.0] {
                let (lv1, omv) = e.inverted_terms(y).unwrap();
                assert!((lv1 - (-e.v1(1.0, y).unwrap()).ln()).abs() < 1e-10);
                assert!((omv - (1.0 - e.v(1.0, y).unwrap())).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rejects_nonpositive_arguments() {
        let e = ExponentMeasure::husler_reiss(1.0f64).unwrap();
        assert!(matches!(e.v(0.0, 1.0), Err(Error::Domain { .. })));
        assert!(matches!(e.v1(1.0, -1.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn decay_density_has_unit_mean() {
        let d = SpectralDensity::symmetric_decay(2.0f64, 1.0, 1.5).unwrap();
        let m = quadrature(|w| w * d.h(w), 0.0, 1.0, 1e-12).unwrap();
        assert!((m - 1.0).abs() < 1e-8);
    }
}
