//! Hidden tail chains: limits under change-point adapted normings, driven by
//! latent Bernoulli sequences. B_0 = 1 throughout, so change-points are the
//! times t ≥ 1 with B_t ≠ B_{t−1}.

use rand::Rng;

use crate::error::{Error, Result};
use crate::kernels::{kernel_sample, KernelSpec};
use crate::margins::MarginalLaw;
use crate::norming::ContinuousLaw;
use crate::numerics::arch::arch_tail_index;
use crate::random::{par_map, tag};
use crate::scalar::Scalar;

/// What produced a state of a hidden tail chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Random walk increment before termination.
    RandomWalk,
    /// Fresh draw from the stationary law at a terminating change-point.
    Restart,
    /// Original transition kernel after termination.
    Original,
    /// Identically zero before termination.
    Dormant,
    /// Initial draw from mixture component 1 or 2.
    MixtureStart(u8),
    /// Row 1..=6 of the mixture update table, first matching row wins.
    MixtureCase(u8),
    /// Innovation from G+; `flip` marks a sign reversal s = −1.
    Upper { flip: bool },
    /// Innovation from G−.
    Lower { flip: bool },
}

impl Regime {
    pub fn label(&self) -> String {
        match self {
            Regime::RandomWalk => "random_walk".into(),
            Regime::Restart => "restart".into(),
            Regime::Original => "original".into(),
            Regime::Dormant => "dormant".into(),
            Regime::MixtureStart(c) => format!("mixture_start_{c}"),
            Regime::MixtureCase(c) => format!("mixture_case_{c}"),
            Regime::Upper { flip } => if *flip { "upper_flip" } else { "upper" }.into(),
            Regime::Lower { flip } => if *flip { "lower_flip" } else { "lower" }.into(),
        }
    }
}

/// One hidden tail chain draw; index t − 1 holds time t.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenChainPath<T> {
    pub m: Vec<T>,
    /// Latent Bernoulli variables as drawn; `b[t − 1]` drives time t.
    pub b: Vec<bool>,
    /// Latent change-points T^B_1 < T^B_2 < … within the horizon.
    pub changepoints: Vec<usize>,
    pub regimes: Vec<Regime>,
    /// Innovation entering each step, `None` for deterministic steps.
    pub innovations: Vec<Option<T>>,
}

impl<T> HiddenChainPath<T> {
    fn with_capacity(horizon: usize) -> Self {
        HiddenChainPath {
            m: Vec::with_capacity(horizon),
            b: Vec::with_capacity(horizon),
            changepoints: Vec::new(),
            regimes: Vec::with_capacity(horizon),
            innovations: Vec::with_capacity(horizon),
        }
    }

    fn push(&mut self, m: T, regime: Regime, eps: Option<T>) {
        self.m.push(m);
        self.regimes.push(regime);
        self.innovations.push(eps);
    }
}

/// Times t ≥ 1 with B_t ≠ B_{t−1}, taking B_0 = 1; `b[t − 1]` is B_t.
pub fn latent_changepoints(b: &[bool]) -> Vec<usize> {
    let mut prev = true;
    let mut out = Vec::new();
    for (i, &bt) in b.iter().enumerate() {
        if bt != prev {
            out.push(i + 1);
        }
        prev = bt;
    }
    out
}

fn bernoullis<T: Scalar, R: Rng + ?Sized>(p: T, horizon: usize, rng: &mut R) -> Vec<bool> {
    (0..horizon).map(|_| T::open01(rng) < p).collect()
}

/// Asymmetric logistic chain: a random walk with G1 increments until the
/// first B_t = 0 (B_t ∼ Ber(φ1)), a fresh standard exponential at that
/// time, then the original kernel.
pub fn hidden_asym_logistic<T: Scalar>(
    phi1: T,
    phi2: T,
    nu: T,
    horizon: usize,
    n: usize,
    seed: u64,
) -> Result<Vec<HiddenChainPath<T>>> {
    let kernel = KernelSpec::AsymmetricLogistic { phi1, phi2, nu }.checked()?;
    let g1 = ContinuousLaw::AsymLogistic { ratio: phi2 / phi1, nu };
    par_map(n, seed, tag("hidden_asym_logistic"), |rng, _| {
        let mut p = HiddenChainPath::with_capacity(horizon);
        p.b = bernoullis(phi1, horizon, rng);
        let tb = p.b.iter().position(|&b| !b).map(|i| i + 1);
        p.changepoints.extend(tb);
        let tb = tb.unwrap_or(usize::MAX);
        for t in 1..=horizon {
            if t < tb {
                let eps = g1.sample(rng);
                let prev = if t == 1 { T::zero() } else { p.m[t - 2] };
                p.push(prev + eps, Regime::RandomWalk, Some(eps));
            } else if t == tb {
                let e = T::standard_exponential(rng);
                p.push(e, Regime::Restart, Some(e));
            } else {
                let y = kernel_sample(&kernel, p.m[t - 2], rng)?;
                p.push(y, Regime::Original, None);
            }
        }
        Ok(p)
    })
}

/// One component of a two-component canonical mixture kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureComponent<T> {
    pub alpha: T,
    pub beta: T,
    /// Limit G_i of the component under its own norming.
    pub innovation: ContinuousLaw<T>,
}

/// λπ1 + (1 − λ)π2 with α1 > α2.
#[derive(Debug, Clone, PartialEq)]
pub struct HtMixtureChain<T> {
    pub lambda: T,
    pub first: MixtureComponent<T>,
    pub second: MixtureComponent<T>,
}

impl<T: Scalar> HtMixtureChain<T> {
    pub fn validate(&self) -> Result<()> {
        let (zero, one) = (T::zero(), T::one());
        if !(self.lambda > zero && self.lambda < one) {
            return Err(Error::validation("lambda", self.lambda.as_f64(), "0 < lambda < 1"));
        }
        for c in [&self.first, &self.second] {
            if !(c.alpha > zero && c.alpha <= one) {
                return Err(Error::validation("alpha", c.alpha.as_f64(), "0 < alpha <= 1"));
            }
            if !(c.beta >= zero && c.beta < one) {
                return Err(Error::validation("beta", c.beta.as_f64(), "0 <= beta < 1"));
            }
        }
        if !(self.first.alpha > self.second.alpha) {
            return Err(Error::validation("alpha1", self.first.alpha.as_f64(), "alpha1 > alpha2"));
        }
        Ok(())
    }

    /// Default separating constant c = (α1 + α2)/2.
    pub fn default_c(&self) -> T {
        (self.first.alpha + self.second.alpha) * T::of(0.5)
    }
}

// Row of the update table producing M_s (s = t + 1 ≥ 2), first match wins.
fn mixture_case(s: usize, k: usize, t1: usize, t2: usize, b1: f64, b2: f64) -> Option<u8> {
    let k_even = k % 2 == 0;
    let k_odd = !k_even;
    let rows = [
        (s < t1 || (k_even && b1 >= b2)) && !(t1 == 1 && s == t2 && b1 > b2),
        ((t1 == 1 && s < t2 && b1 > b2) || (k_odd && b1 <= b2)) && !(s == t1 && b1 < b2),
        t1 == 1 && s == t2 && b1 > b2,
        s == t1 && b1 < b2,
        k_even && b1 < b2,
        k_odd && b1 > b2 && !(t1 == 1 && k == 1),
    ];
    rows.iter().position(|&r| r).map(|i| i as u8 + 1)
}

/// Mixture hidden tail chain for a given latent sequence (`b[t − 1]` = B_t,
/// true selecting component 1).
pub fn hidden_ht_mixture_path<T: Scalar, R: Rng + ?Sized>(
    chain: &HtMixtureChain<T>,
    b: &[bool],
    rng: &mut R,
) -> Result<HiddenChainPath<T>> {
    let horizon = b.len();
    let cps = latent_changepoints(b);
    let t1 = cps.first().copied().unwrap_or(usize::MAX);
    let t2 = cps.get(1).copied().unwrap_or(usize::MAX);
    let (c1, c2) = (&chain.first, &chain.second);
    let mut p = HiddenChainPath::with_capacity(horizon);
    p.b = b.to_vec();
    p.changepoints = cps.clone();
    if horizon == 0 {
        return Ok(p);
    }
    if t1 > 1 {
        let e = c1.innovation.sample(rng);
        p.push(e, Regime::MixtureStart(1), Some(e));
    } else {
        let e = c2.innovation.sample(rng);
        p.push(e, Regime::MixtureStart(2), Some(e));
    }
    // n^α_t = ∏_{s ≤ t} α_{component of B_s}
    let mut n_alpha = if b[0] { c1.alpha } else { c2.alpha };
    for s in 2..=horizon {
        let k = cps.iter().take_while(|&&c| c <= s).count();
        let case = mixture_case(s, k, t1, t2, c1.beta.as_f64(), c2.beta.as_f64())
            .ok_or_else(|| Error::Internal(format!("no mixture update row matches at t + 1 = {s}")))?;
        let prev = p.m[s - 2];
        let (m, eps) = match case {
            1 => {
                let e = c1.innovation.sample(rng);
                (c1.alpha * prev + n_alpha.powf(c1.beta) * e, Some(e))
            }
            2 => {
                let e = c2.innovation.sample(rng);
                (c2.alpha * prev + n_alpha.powf(c2.beta) * e, Some(e))
            }
            3 => {
                let e = c1.innovation.sample(rng);
                (n_alpha.powf(c1.beta) * e, Some(e))
            }
            4 => {
                let e = c2.innovation.sample(rng);
                (n_alpha.powf(c2.beta) * e, Some(e))
            }
            5 => (c1.alpha * prev, None),
            _ => (c2.alpha * prev, None),
        };
        p.push(m, Regime::MixtureCase(case), eps);
        n_alpha = n_alpha * if b[s - 1] { c1.alpha } else { c2.alpha };
    }
    Ok(p)
}

/// Mixture hidden tail chain with B_t ∼ Ber(λ).
pub fn hidden_ht_mixture<T: Scalar>(
    chain: &HtMixtureChain<T>,
    horizon: usize,
    n: usize,
    seed: u64,
) -> Result<Vec<HiddenChainPath<T>>> {
    chain.validate()?;
    par_map(n, seed, tag("hidden_ht_mixture"), |rng, _| {
        let b = bernoullis(chain.lambda, horizon, rng);
        hidden_ht_mixture_path(chain, &b, rng)
    })
}

/// Sign-switching chain: zero until the first fresh Laplace draw
/// at T ∼ Geometric(1/2), then an independent copy of the chain.
pub fn hidden_rootzen_smith<T: Scalar>(horizon: usize, n: usize, seed: u64) -> Result<Vec<HiddenChainPath<T>>> {
    let kernel = KernelSpec::<T>::RootzenSmith;
    let laplace = MarginalLaw::<T>::StandardLaplace;
    let half = T::of(0.5);
    par_map(n, seed, tag("hidden_rootzen_smith"), |rng, _| {
        let mut p = HiddenChainPath::with_capacity(horizon);
        let mut terminated = false;
        for t in 1..=horizon {
            if terminated {
                let y = kernel_sample(&kernel, p.m[t - 2], rng)?;
                p.push(y, Regime::Original, None);
                continue;
            }
            // B_{t−1} = 1 keeps flipping X, which normalises to zero
            let flip = T::open01(rng) < half;
            p.b.push(flip);
            if flip {
                p.push(T::zero(), Regime::Dormant, None);
            } else {
                let l = laplace.sample(rng);
                p.push(l, Regime::Restart, Some(l));
                p.changepoints.push(t);
                terminated = true;
            }
        }
        Ok(p)
    })
}

/// ARCH hidden tail chain on Laplace margins: M_{t+1} = s_{t+1} M_t + ε_{t+1},
/// s = −1 exactly at latent change-points, ε ∼ G+ between change-points
/// T^B_k ≤ t + 1 < T^B_{k+1} with k even and G− with k odd.
pub fn hidden_arch<T: Scalar>(theta0: T, theta1: T, horizon: usize, n: usize, seed: u64) -> Result<Vec<HiddenChainPath<T>>> {
    if !(theta0 > T::zero() && theta0.is_finite()) {
        return Err(Error::validation("theta0", theta0.as_f64(), "theta0 > 0"));
    }
    let kappa = arch_tail_index(theta1)?;
    let plus = ContinuousLaw::ArchPlus { kappa, theta1 };
    let minus = ContinuousLaw::ArchMinus { kappa, theta1 };
    let half = T::of(0.5);
    par_map(n, seed, tag("hidden_arch"), |rng, _| {
        let mut p = HiddenChainPath::<T>::with_capacity(horizon);
        p.b = bernoullis(half, horizon, rng);
        p.changepoints = latent_changepoints(&p.b);
        let mut k = 0;
        for s in 1..=horizon {
            let flip = p.changepoints.get(k) == Some(&s);
            if flip {
                k += 1;
            }
            let (law, upper) = if k % 2 == 0 { (&plus, true) } else { (&minus, false) };
            let e = law.sample(rng);
            let m = if s == 1 {
                e
            } else if flip {
                -p.m[s - 2] + e
            } else {
                p.m[s - 2] + e
            };
            let regime = if upper { Regime::Upper { flip } } else { Regime::Lower { flip } };
            p.push(m, regime, Some(e));
        }
        Ok(p)
    })
}
