//! Norming functions a_t, b_t, the update functions ψ^a, ψ^b of the tail
//! chain they induce, limit laws and remainder-term diagnostics.
//!
//! Indexing: `norming(t, v)` is the t-step norming (t = 0 is the identity
//! v ↦ (v, 1)). The update functions are stored under the index of the state
//! they produce, so `psi_a(n, x)` maps M_{n−1} to the location of M_n.

pub mod limit;

#[cfg(test)]
mod tests;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::margins::MarginalLaw;
use crate::numerics::grid::format_real;
use crate::scalar::Scalar;

pub use limit::{gaussian_copula_limit, limit_law, ContinuousLaw, ExtendedReal, LimitLaw, LimitParams};

/// Half-width of the compact on which remainders are checked.
pub const REMAINDER_COMPACT: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormingScheme<T> {
    /// a_t(v) = α^t v, b_t(v) = v^β for α > 0; a_t = 0, b_t(v) = v^{β^t} for α = 0.
    HtCanonical { alpha: T, beta: T },
    /// Random walk norming of inverted Hüsler–Reiss type kernels.
    HuslerReiss { gamma: T },
    /// Norming of inverted max-stable kernels whose spectral density decays
    /// like w^δ exp(−κ w^{−γ}) at the boundary.
    DensityDecay { kappa: T, gamma: T, delta: T },
    /// Sign-alternating norming on Laplace margins,
    /// a_t(v) = α−^{⌈t/2⌉} α+^{⌊t/2⌋} v and b_t(v) = |v|^β.
    NegativeHt { alpha_minus: T, alpha_plus: T, beta: T },
    /// Gaussian copula with ρ < 0 on Laplace margins: α± = −ρ², β = 1/2.
    AlternatingGaussian { rho: T },
}

/// Closed-form update functions, indexed by the produced time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpdateFunctions<T> {
    /// ψ^a_n(x) = αx, ψ^b_n(x) = α^{(n−1)β}.
    ScaledAr { alpha: T, beta: T },
    /// ψ^a_n(x) = 0, ψ^b_n(x) = x^β.
    PowerAr { beta: T },
    /// ψ^a_n(x) = x − (n−1)·drift_rate, ψ^b_n(x) = 1.
    RandomWalk { drift_rate: T },
    /// ψ^a_n(x) = α+ x for n even and α− x for n odd, with
    /// ψ^b_n = |α−^{⌈(n−1)/2⌉} α+^{⌊(n−1)/2⌋}|^β.
    Alternating { alpha_minus: T, alpha_plus: T, beta: T },
}

impl<T: Scalar> UpdateFunctions<T> {
    pub fn psi_a(&self, n: usize, x: T) -> T {
        match *self {
            UpdateFunctions::ScaledAr { alpha, .. } => alpha * x,
            UpdateFunctions::PowerAr { .. } => T::zero(),
            UpdateFunctions::RandomWalk { drift_rate } => x - T::of_usize(n.saturating_sub(1)) * drift_rate,
            UpdateFunctions::Alternating { alpha_minus, alpha_plus, .. } => {
                if n % 2 == 0 {
                    alpha_plus * x
                } else {
                    alpha_minus * x
                }
            }
        }
    }

    pub fn psi_b(&self, n: usize, x: T) -> T {
        let t = n.saturating_sub(1);
        match *self {
            UpdateFunctions::ScaledAr { alpha, beta } => {
                if beta == T::zero() {
                    T::one()
                } else {
                    alpha.powf(T::of_usize(t) * beta)
                }
            }
            UpdateFunctions::PowerAr { beta } => x.max(T::zero()).powf(beta),
            UpdateFunctions::RandomWalk { .. } => T::one(),
            UpdateFunctions::Alternating { alpha_minus, alpha_plus, beta } => {
                let lo = T::of_usize(t.div_ceil(2)) * alpha_minus.abs().ln();
                let hi = T::of_usize(t / 2) * alpha_plus.abs().ln();
                (beta * (lo + hi)).exp()
            }
        }
    }

    /// M_n = ψ^a_n(M_{n−1}) + ψ^b_n(M_{n−1}) ε_n.
    pub fn step(&self, n: usize, m: T, eps: T) -> T {
        self.psi_a(n, m) + self.psi_b(n, m) * eps
    }

    /// sup{x : ψ^b_n(x) ≤ c}, with sup ∅ = 0; +∞ when the whole line qualifies.
    pub fn scale_sublevel_sup(&self, n: usize, c: T) -> T {
        match *self {
            UpdateFunctions::PowerAr { beta } => {
                if c <= T::zero() {
                    T::zero()
                } else {
                    c.powf(T::one() / beta)
                }
            }
            _ => {
                if self.psi_b(n, T::zero()) <= c {
                    T::infinity()
                } else {
                    T::zero()
                }
            }
        }
    }
}

/// Remainder terms r^a_{t+1}, r^b_{t+1} at one (t, v, x).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemainderRow<T> {
    pub t: usize,
    pub v: T,
    pub x: T,
    pub r_a: T,
    pub r_b: T,
}

impl<T: Scalar> NormingScheme<T> {
    pub fn id(&self) -> &'static str {
        match self {
            NormingScheme::HtCanonical { .. } => "ht_canonical",
            NormingScheme::HuslerReiss { .. } => "husler_reiss",
            NormingScheme::DensityDecay { .. } => "density_decay",
            NormingScheme::NegativeHt { .. } => "negative_ht",
            NormingScheme::AlternatingGaussian { .. } => "alternating_gaussian",
        }
    }

    /// Marginal scale the scheme is stated on.
    pub fn margin(&self) -> MarginalLaw<T> {
        match self {
            NormingScheme::NegativeHt { .. } | NormingScheme::AlternatingGaussian { .. } => {
                MarginalLaw::StandardLaplace
            }
            _ => MarginalLaw::StandardExponential,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let zero = T::zero();
        let one = T::one();
        let finite_pos = |name, v: T| {
            if v > zero && v.is_finite() {
                Ok(())
            } else {
                Err(Error::validation(name, v.as_f64(), "positive and finite"))
            }
        };
        match *self {
            NormingScheme::HtCanonical { alpha, beta } => {
                if !(alpha >= zero && alpha <= one) {
                    return Err(Error::validation("alpha", alpha.as_f64(), "0 <= alpha <= 1"));
                }
                if !(beta >= zero && beta < one) {
                    return Err(Error::validation("beta", beta.as_f64(), "0 <= beta < 1"));
                }
                if alpha == zero && beta == zero {
                    return Err(Error::validation("alpha", 0.0, "(alpha, beta) != (0, 0)"));
                }
                Ok(())
            }
            NormingScheme::HuslerReiss { gamma } => finite_pos("gamma", gamma),
            NormingScheme::DensityDecay { kappa, gamma, delta } => {
                finite_pos("kappa", kappa)?;
                finite_pos("gamma", gamma)?;
                if !delta.is_finite() {
                    return Err(Error::validation("delta", delta.as_f64(), "finite"));
                }
                finite_pos("c", self.decay_constant())
            }
            NormingScheme::NegativeHt { alpha_minus, alpha_plus, beta } => {
                for (name, a) in [("alpha_minus", alpha_minus), ("alpha_plus", alpha_plus)] {
                    if !(a > -one && a < zero) {
                        return Err(Error::validation(name, a.as_f64(), "-1 < value < 0"));
                    }
                }
                if !(beta >= zero && beta < one) {
                    return Err(Error::validation("beta", beta.as_f64(), "0 <= beta < 1"));
                }
                Ok(())
            }
            NormingScheme::AlternatingGaussian { rho } => {
                if rho > -one && rho < zero {
                    Ok(())
                } else {
                    Err(Error::validation("rho", rho.as_f64(), "-1 < rho < 0"))
                }
            }
        }
    }

    pub fn checked(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// c = δ + 2(1 + γ) of the density-decay scheme (zero otherwise).
    pub fn decay_constant(&self) -> T {
        match *self {
            NormingScheme::DensityDecay { gamma, delta, .. } => delta + T::of(2.0) * (T::one() + gamma),
            _ => T::zero(),
        }
    }

    /// ζ_t = C(t, t−2) + C(t, t−1)·c of the density-decay scheme.
    pub fn zeta(&self, t: usize) -> T {
        let tt = T::of_usize(t);
        tt * (tt - T::one()) * T::of(0.5) + tt * self.decay_constant()
    }

    // (α−, α+, β) of the sign-alternating schemes
    fn alternating(&self) -> Option<(T, T, T)> {
        match *self {
            NormingScheme::NegativeHt { alpha_minus, alpha_plus, beta } => Some((alpha_minus, alpha_plus, beta)),
            NormingScheme::AlternatingGaussian { rho } => {
                let a = -rho * rho;
                Some((a, a, T::of(0.5)))
            }
            _ => None,
        }
    }

    /// Whether the scheme is evaluated through `log_norming`, because a_t and
    /// b_t only separate from v at astronomically large v.
    pub fn is_log_scale(&self) -> bool {
        matches!(self, NormingScheme::HuslerReiss { .. } | NormingScheme::DensityDecay { .. })
    }

    /// (a_t(v), b_t(v)).
    pub fn norming(&self, t: usize, v: T) -> Result<(T, T)> {
        if t == 0 {
            return Ok((v, T::one()));
        }
        match *self {
            NormingScheme::HtCanonical { alpha, beta } => {
                if !(v > T::zero()) {
                    return Err(Error::domain("v", v.as_f64(), "v > 0"));
                }
                if alpha > T::zero() {
                    Ok((alpha.powi(t as i32) * v, v.powf(beta)))
                } else {
                    Ok((T::zero(), v.powf(beta.powi(t as i32))))
                }
            }
            NormingScheme::HuslerReiss { .. } | NormingScheme::DensityDecay { .. } => {
                if !(v > T::one()) {
                    return Err(Error::domain("v", v.as_f64(), "v > 1"));
                }
                let (la, lb) = self.log_norming(t, v.ln())?;
                Ok((la.exp(), lb.exp()))
            }
            _ => {
                let (am, ap, beta) = self.alternating().expect("alternating scheme");
                let a = am.powi(t.div_ceil(2) as i32) * ap.powi((t / 2) as i32) * v;
                Ok((a, v.abs().powf(beta)))
            }
        }
    }

    /// (ln a_t(v), ln b_t(v)) from ln v, for schemes with a_t > 0.
    pub fn log_norming(&self, t: usize, ln_v: T) -> Result<(T, T)> {
        let (da, db) = self.log_offsets(t, ln_v)?;
        Ok((ln_v + da, ln_v + db))
    }

    // (ln a_t(v) − ln v, ln b_t(v) − ln v). Working with offsets keeps the
    // remainders accurate when ln v itself is huge.
    fn log_offsets(&self, t: usize, l: T) -> Result<(T, T)> {
        if t == 0 {
            return Ok((T::zero(), -l));
        }
        let tt = T::of_usize(t);
        match *self {
            NormingScheme::HtCanonical { alpha, beta } if alpha > T::zero() => {
                Ok((tt * alpha.ln(), (beta - T::one()) * l))
            }
            NormingScheme::HuslerReiss { gamma } => {
                if !(l > T::one()) {
                    return Err(Error::domain("ln v", l.as_f64(), "ln v > 1"));
                }
                let gt = gamma * tt;
                let da = -gt * (T::of(2.0) * l).sqrt() + gt * l.ln() / l + gt * gt * T::of(0.5);
                Ok((da, da - T::of(0.5) * l.ln()))
            }
            NormingScheme::DensityDecay { kappa, gamma, .. } => {
                if !(l > T::one()) {
                    return Err(Error::domain("ln v", l.as_f64(), "ln v > 1"));
                }
                let corr = self.zeta(t) / (gamma * gamma) * l.ln() / l;
                let da = -tt / gamma * (l / kappa).ln() + corr.ln_1p();
                Ok((da, da - l.ln()))
            }
            _ => Err(Error::Unsupported(format!("log-scale norming for {}", self.id()))),
        }
    }

    /// One-step norming (a(y), b(y)) applied to a state reached at time t.
    ///
    /// Only the sign-alternating schemes depend on t: states at odd times
    /// are negative and are normed with α+.
    pub fn one_step(&self, t: usize, y: T) -> Result<(T, T)> {
        match self.alternating() {
            Some((am, ap, beta)) => {
                let a = if t % 2 == 1 { ap } else { am };
                Ok((a * y, y.abs().powf(beta)))
            }
            None => self.norming(1, y),
        }
    }

    pub fn update_functions(&self) -> UpdateFunctions<T> {
        match *self {
            NormingScheme::HtCanonical { alpha, beta } => {
                if alpha > T::zero() {
                    UpdateFunctions::ScaledAr { alpha, beta }
                } else {
                    UpdateFunctions::PowerAr { beta }
                }
            }
            NormingScheme::HuslerReiss { .. } => UpdateFunctions::RandomWalk { drift_rate: T::zero() },
            NormingScheme::DensityDecay { kappa, gamma, .. } => UpdateFunctions::RandomWalk {
                drift_rate: kappa.ln() / (gamma * gamma),
            },
            _ => {
                let (alpha_minus, alpha_plus, beta) = self.alternating().expect("alternating scheme");
                UpdateFunctions::Alternating { alpha_minus, alpha_plus, beta }
            }
        }
    }

    /// r^a_{t+1}(v, x) and r^b_{t+1}(v, x).
    pub fn remainder_terms(&self, t: usize, v: T, x: T) -> Result<(T, T)> {
        if self.is_log_scale() {
            if !(v > T::one()) {
                return Err(Error::domain("v", v.as_f64(), "v > 1"));
            }
            return self.remainder_terms_log(t, v.ln(), x);
        }
        let (at, bt) = self.norming(t, v)?;
        let (an, bn) = self.norming(t + 1, v)?;
        let (a_y, b_y) = self.one_step(t, at + bt * x)?;
        if !(b_y > T::zero()) {
            return Err(Error::domain("x", x.as_f64(), "a_t(v) + b_t(v) x inside the norming range"));
        }
        let psi = self.update_functions();
        let r_a = (an - a_y + bn * psi.psi_a(t + 1, x)) / b_y;
        let r_b = T::one() - bn * psi.psi_b(t + 1, x) / b_y;
        Ok((r_a, r_b))
    }

    // With y = a_t(v) + b_t(v) x: ln a_{t+1}(v) − ln a(y), ln b_{t+1}(v) − ln b(y),
    // a(y)/b(y) and a_{t+1}(v)/b_{t+1}(v).
    fn log_step(&self, t: usize, ln_v: T, x: T) -> Result<[T; 4]> {
        let (da_t, db_t) = self.log_offsets(t, ln_v)?;
        let (da_n, db_n) = self.log_offsets(t + 1, ln_v)?;
        let rel = x * (db_t - da_t).exp();
        if !(rel > -T::one()) {
            return Err(Error::domain("x", x.as_f64(), "a_t(v) + b_t(v) x > 0"));
        }
        // ln y − ln v
        let shift = da_t + rel.ln_1p();
        let (da_y, db_y) = self.log_offsets(1, ln_v + shift)?;
        Ok([da_n - shift - da_y, db_n - shift - db_y, (da_y - db_y).exp(), (da_n - db_n).exp()])
    }

    /// Remainder terms from ln v, stable for v far beyond the float range.
    pub fn remainder_terms_log(&self, t: usize, ln_v: T, x: T) -> Result<(T, T)> {
        let [dla, dlb, ratio_y, _] = self.log_step(t, ln_v, x)?;
        let psi = self.update_functions();
        let r_a = ratio_y * dla.exp_m1() + psi.psi_a(t + 1, x) * dlb.exp();
        let r_b = -(dlb + psi.psi_b(t + 1, x).ln()).exp_m1();
        Ok((r_a, r_b))
    }

    /// Finite-v versions of the limits defining ψ^a_{t+1}(x), ψ^b_{t+1}(x).
    pub fn update_estimates(&self, t: usize, v: T, x: T) -> Result<(T, T)> {
        if self.is_log_scale() {
            if !(v > T::one()) {
                return Err(Error::domain("v", v.as_f64(), "v > 1"));
            }
            return self.update_estimates_log(t, v.ln(), x);
        }
        let (at, bt) = self.norming(t, v)?;
        let (an, bn) = self.norming(t + 1, v)?;
        let (a_y, b_y) = self.one_step(t, at + bt * x)?;
        Ok(((a_y - an) / bn, b_y / bn))
    }

    pub fn update_estimates_log(&self, t: usize, ln_v: T, x: T) -> Result<(T, T)> {
        let [dla, dlb, _, ratio_n] = self.log_step(t, ln_v, x)?;
        Ok((ratio_n * (-dla).exp_m1(), (-dlb).exp()))
    }

    /// Remainders on an even grid of `points` values of x across
    /// [−5, 5] (restricted to x > 0 for scale-only schemes).
    pub fn remainder_grid(&self, t: usize, v: T, points: usize) -> Result<Vec<RemainderRow<T>>> {
        let c = T::of(REMAINDER_COMPACT);
        let lo = if matches!(self.update_functions(), UpdateFunctions::PowerAr { .. }) {
            c / T::of_usize(points.max(2))
        } else {
            -c
        };
        let points = points.max(2);
        (0..points)
            .map(|i| {
                let x = lo + (c - lo) * T::of_usize(i) / T::of_usize(points - 1);
                let (r_a, r_b) = self.remainder_terms(t, v, x)?;
                Ok(RemainderRow { t, v, x, r_a, r_b })
            })
            .collect()
    }
}

/// Config-facing norming description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case", deny_unknown_fields)]
pub enum SchemeParams {
    HtCanonical { alpha: f64, beta: f64 },
    HuslerReiss { gamma: f64 },
    DensityDecay { kappa: f64, gamma: f64, delta: f64 },
    NegativeHt { alpha_minus: f64, alpha_plus: f64, beta: f64 },
    AlternatingGaussian { rho: f64 },
}

pub fn make_norming<T: Scalar>(p: &SchemeParams) -> Result<NormingScheme<T>> {
    let s = match *p {
        SchemeParams::HtCanonical { alpha, beta } => NormingScheme::HtCanonical { alpha: T::of(alpha), beta: T::of(beta) },
        SchemeParams::HuslerReiss { gamma } => NormingScheme::HuslerReiss { gamma: T::of(gamma) },
        SchemeParams::DensityDecay { kappa, gamma, delta } => NormingScheme::DensityDecay {
            kappa: T::of(kappa),
            gamma: T::of(gamma),
            delta: T::of(delta),
        },
        SchemeParams::NegativeHt { alpha_minus, alpha_plus, beta } => NormingScheme::NegativeHt {
            alpha_minus: T::of(alpha_minus),
            alpha_plus: T::of(alpha_plus),
            beta: T::of(beta),
        },
        SchemeParams::AlternatingGaussian { rho } => NormingScheme::AlternatingGaussian { rho: T::of(rho) },
    };
    s.checked()
}

/// Writes remainder rows with header `t,v,x,r_a,r_b`.
pub fn write_remainder_csv<T: Scalar, W: Write>(rows: &[RemainderRow<T>], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["t", "v", "x", "r_a", "r_b"])?;
    for r in rows {
        w.write_record([r.t.to_string(), format_real(r.v), format_real(r.x), format_real(r.r_a), format_real(r.r_b)])?;
    }
    w.flush()?;
    Ok(())
}
