//! Monte Carlo checks of the limit theory: conditional forward simulation,
//! KS distances against limit laws, quantile envelopes, χ estimates and
//! change-point laws.
//!
//! Every simulation is keyed by a master seed and runs on the chunked
//! streams of [`crate::random`], so results do not depend on the number of
//! worker threads.

mod figure;


use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{kernel_sample, KernelSpec};
use crate::margins::MarginalLaw;
use crate::norming::{LimitLaw, NormingScheme};
use crate::numerics::grid::format_real;
use crate::random::{par_map, tag};
use crate::scalar::Scalar;
use crate::tailchain::{detect_changepoints, ChangePointRule, PATH_HEADER};

pub use figure::{figure1, Figure1Chain, Figure1Output, FIGURE1_X0};

/// Samples beyond ±`ATOM_CUTOFF` count toward the atoms at ∓∞.
pub const ATOM_CUTOFF: f64 = 20.0;
/// Envelopes from fewer paths than this carry a precision warning.
pub const MIN_ENVELOPE_PATHS: usize = 100;
/// χ rows with fewer conditioning exceedances than this are flagged.
pub const MIN_EXCEEDANCES: usize = 50;

/// How X_0 is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum InitialState<T> {
    /// X_0 = x0.
    FixedX0(T),
    /// X_0 drawn from the margin truncated to (u, ∞).
    Exceedance(T),
}

fn draw_initial<T: Scalar, R: Rng + ?Sized>(law: &MarginalLaw<T>, init: InitialState<T>, tail: T, rng: &mut R) -> Result<T> {
    match init {
        InitialState::FixedX0(x0) => Ok(x0),
        InitialState::Exceedance(_) => law.isf(tail * T::open01(rng)),
    }
}

fn exceedance_tail<T: Scalar>(law: &MarginalLaw<T>, init: InitialState<T>) -> Result<T> {
    match init {
        InitialState::FixedX0(x0) => {
            if !x0.is_finite() {
                return Err(Error::domain("x0", x0.as_f64(), "finite"));
            }
            Ok(T::one())
        }
        InitialState::Exceedance(u) => {
            let tail = law.sf(u);
            if !(tail > T::zero()) || !u.is_finite() {
                return Err(Error::domain("u", u.as_f64(), "threshold with positive survival probability"));
            }
            Ok(tail)
        }
    }
}

fn step_forward<T: Scalar, R: Rng + ?Sized>(k: &KernelSpec<T>, x0: T, steps: usize, rng: &mut R) -> Result<T> {
    (0..steps).try_fold(x0, |x, _| kernel_sample(k, x, rng))
}

/// Paths (X_0, …, X_T) of the chain with kernel `k`, started from `init`.
///
/// Exceedance starts invert the conditional tail probability, so on the
/// exponential scale X_0 − u is exactly Exp(1).
pub fn conditional_forward_sim<T: Scalar>(
    k: &KernelSpec<T>,
    law: &MarginalLaw<T>,
    init: InitialState<T>,
    horizon: usize,
    n: usize,
    seed: u64,
) -> Result<Vec<Vec<T>>> {
    let tail = exceedance_tail(law, init)?;
    par_map(n, seed, tag("forward_sim"), |rng, _| {
        let mut path = Vec::with_capacity(horizon + 1);
        path.push(draw_initial(law, init, tail, rng)?);
        for t in 0..horizon {
            path.push(kernel_sample(k, path[t], rng)?);
        }
        Ok(path)
    })
}

/// Draws of (X_t − a_t(v))/b_t(v) given X_0 = v.
pub fn normalized_samples<T: Scalar>(
    k: &KernelSpec<T>,
    v: T,
    scheme: &NormingScheme<T>,
    t: usize,
    n: usize,
    seed: u64,
) -> Result<Vec<T>> {
    if t == 0 {
        return Err(Error::validation("t", 0.0, "t >= 1"));
    }
    let (a, b) = scheme.norming(t, v)?;
    par_map(n, seed, tag("normalized_samples"), |rng, _| {
        Ok((step_forward(k, v, t, rng)? - a) / b)
    })
}

fn sorted<T: Scalar>(samples: &[T]) -> Result<Vec<T>> {
    if samples.is_empty() {
        return Err(Error::domain("samples", 0.0, "nonempty sample"));
    }
    if let Some(x) = samples.iter().find(|x| x.is_nan()) {
        return Err(Error::domain("samples", x.as_f64(), "no NaN values"));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("NaN filtered above"));
    Ok(xs)
}

/// sup_x |F_n(x) − F(x)| for a continuous reference cdf.
pub fn ks_distance<T: Scalar>(samples: &[T], cdf: impl Fn(T) -> T) -> Result<T> {
    let xs = sorted(samples)?;
    let n = T::of_usize(xs.len());
    let mut d = T::zero();
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        let above = T::of_usize(i + 1) / n - f;
        let below = f - T::of_usize(i) / n;
        d = d.max(above).max(below);
    }
    Ok(d.min(T::one()))
}

/// sup_x |F_n(x) − G_m(x)| for two samples.
pub fn ks_two_sample<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    let a = sorted(a)?;
    let b = sorted(b)?;
    let (na, nb) = (T::of_usize(a.len()), T::of_usize(b.len()));
    let (mut i, mut j, mut d) = (0, 0, T::zero());
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((T::of_usize(i) / na - T::of_usize(j) / nb).abs());
    }
    Ok(d)
}

/// KS distance to a limit law together with the mass that escaped to ±∞.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitFit<T> {
    pub ks: T,
    /// Fraction of samples below −`ATOM_CUTOFF`.
    pub atom_lo: T,
    /// Fraction of samples above `ATOM_CUTOFF`.
    pub atom_hi: T,
}

/// Compares samples with a limit law.
///
/// Atomless laws are compared directly. For laws with atoms the KS distance
/// uses only samples inside [−m, m] against the continuous part renormalised
/// to that window, and the escaped fractions are reported separately.
pub fn ks_limit<T: Scalar>(samples: &[T], law: &LimitLaw<T>) -> Result<LimitFit<T>> {
    if samples.is_empty() {
        return Err(Error::domain("samples", 0.0, "nonempty sample"));
    }
    let m = T::of(ATOM_CUTOFF);
    let n = T::of_usize(samples.len());
    let atom_lo = T::of_usize(samples.iter().filter(|&&x| x < -m).count()) / n;
    let atom_hi = T::of_usize(samples.iter().filter(|&&x| x > m).count()) / n;
    let ks = if law.has_atoms() {
        let inner: Vec<T> = samples.iter().copied().filter(|x| x.abs() <= m).collect();
        let g = &law.continuous;
        let (lo, hi) = (g.cdf(-m), g.cdf(m));
        if !(hi > lo) {
            return Err(Error::domain("law", 0.0, "continuous part charging [-20, 20]"));
        }
        ks_distance(&inner, |x| (g.cdf(x) - lo) / (hi - lo))?
    } else {
        ks_distance(samples, |x| law.cdf(x))?
    };
    Ok(LimitFit { ks, atom_lo, atom_hi })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow<T> {
    pub v: T,
    pub n: usize,
    pub ks: T,
    pub atom_lo: T,
    pub atom_hi: T,
    /// Seed that reproduces the row through [`normalized_samples`].
    pub seed: u64,
}

/// KS distances of normalized kernel draws from the limit law along a
/// threshold grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable<T> {
    pub kernel: String,
    pub scheme: String,
    pub t: usize,
    pub rows: Vec<ConvergenceRow<T>>,
}

/// One row per v in `v_grid`. All rows share `seed`, so neighbouring rows
/// use common random numbers and the trend in v is not swamped by noise.
pub fn convergence_table<T: Scalar>(
    k: &KernelSpec<T>,
    scheme: &NormingScheme<T>,
    limit: &LimitLaw<T>,
    t: usize,
    v_grid: &[T],
    n: usize,
    seed: u64,
) -> Result<ConvergenceTable<T>> {
    let up = v_grid.windows(2).all(|w| w[0] < w[1]);
    let down = v_grid.windows(2).all(|w| w[0] > w[1]);
    if !(up || down) {
        return Err(Error::validation("v_grid", v_grid.len() as f64, "strictly monotone thresholds"));
    }
    let rows = v_grid
        .iter()
        .map(|&v| {
            let xs = normalized_samples(k, v, scheme, t, n, seed)?;
            let fit = ks_limit(&xs, limit)?;
            Ok(ConvergenceRow { v, n, ks: fit.ks, atom_lo: fit.atom_lo, atom_hi: fit.atom_hi, seed })
        })
        .collect::<Result<_>>()?;
    Ok(ConvergenceTable { kernel: k.id().into(), scheme: scheme.id().into(), t, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeSource {
    Actual,
    Tailchain,
}

impl EnvelopeSource {
    pub fn label(self) -> &'static str {
        match self {
            EnvelopeSource::Actual => "actual",
            EnvelopeSource::Tailchain => "tailchain",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeRow<T> {
    pub t: usize,
    pub q025: T,
    pub mean: T,
    pub q975: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantileEnvelope<T> {
    pub source: EnvelopeSource,
    pub n_paths: usize,
    pub rows: Vec<EnvelopeRow<T>>,
    /// Set when fewer than [`MIN_ENVELOPE_PATHS`] paths were supplied.
    pub warning: Option<String>,
}

/// Linear-interpolation quantile of sorted data.
fn quantile_sorted<T: Scalar>(xs: &[T], p: T) -> T {
    let h = p * T::of_usize(xs.len() - 1);
    let lo = h.floor();
    let i = lo.to_usize().unwrap_or(0).min(xs.len() - 1);
    let j = (i + 1).min(xs.len() - 1);
    xs[i] + (h - lo) * (xs[j] - xs[i])
}

/// Per-time 2.5% quantile, mean and 97.5% quantile across paths. Entry `i`
/// of each path is reported as time `first_t + i`.
pub fn quantile_envelope<T: Scalar>(
    paths: &[Vec<T>],
    source: EnvelopeSource,
    first_t: usize,
) -> Result<QuantileEnvelope<T>> {
    let len = paths.first().map_or(0, Vec::len);
    if len == 0 {
        return Err(Error::domain("paths", 0.0, "at least one path with at least one state"));
    }
    if paths.iter().any(|p| p.len() != len) {
        return Err(Error::validation("paths", paths.len() as f64, "paths of equal length"));
    }
    let rows = (0..len)
        .map(|i| {
            let col: Vec<T> = paths.iter().map(|p| p[i]).collect();
            let xs = sorted(&col)?;
            let mean = xs.iter().fold(T::zero(), |s, &x| s + x) / T::of_usize(xs.len());
            Ok(EnvelopeRow {
                t: first_t + i,
                q025: quantile_sorted(&xs, T::of(0.025)),
                mean,
                q975: quantile_sorted(&xs, T::of(0.975)),
            })
        })
        .collect::<Result<_>>()?;
    let warning = (paths.len() < MIN_ENVELOPE_PATHS).then(|| {
        format!("only {} paths; quantiles are imprecise below {MIN_ENVELOPE_PATHS}", paths.len())
    });
    Ok(QuantileEnvelope { source, n_paths: paths.len(), rows, warning })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiRow<T> {
    pub u: T,
    pub estimate: T,
    /// Paths with F(X_0) > u.
    pub n_exceed: usize,
    /// Fewer than [`MIN_EXCEEDANCES`] conditioning exceedances.
    pub flagged: bool,
}

/// Pr(F(X_t) > u | F(X_0) > u) for each u in `u_grid`.
///
/// X_0 is drawn from the margin above its quantile at the smallest u, so
/// every path counts toward the lowest level and the higher levels use the
/// nested subsets. `n_exceed` is the size of that subset.
pub fn chi_estimate<T: Scalar>(
    k: &KernelSpec<T>,
    law: &MarginalLaw<T>,
    t: usize,
    u_grid: &[T],
    n: usize,
    seed: u64,
) -> Result<Vec<ChiRow<T>>> {
    if let Some(&u) = u_grid.iter().find(|&&u| !(u > T::zero() && u < T::one())) {
        return Err(Error::validation("u", u.as_f64(), "0 < u < 1"));
    }
    let Some(u_min) = u_grid.iter().copied().reduce(T::min) else {
        return Ok(Vec::new());
    };
    let pairs = par_map(n, seed, tag("chi_estimate"), |rng, _| {
        let x0 = law.isf((T::one() - u_min) * T::open01(rng))?;
        Ok((x0, step_forward(k, x0, t, rng)?))
    })?;
    u_grid
        .iter()
        .map(|&u| {
            let x = law.quantile(u)?;
            let base = pairs.iter().filter(|p| p.0 > x);
            let n_exceed = base.clone().count();
            let joint = base.filter(|p| p.1 > x).count();
            let estimate = if n_exceed > 0 { T::of_usize(joint) / T::of_usize(n_exceed) } else { T::nan() };
            Ok(ChiRow { u, estimate, n_exceed, flagged: n_exceed < MIN_EXCEEDANCES })
        })
        .collect()
}

/// Total variation distance between the law of the first change-point T^X
/// of the paths and Pr(T = t) = stay^{t−1}(1 − stay).
///
/// Both laws are truncated at the horizon H = path length − 1, with the
/// remaining mass (no change-point up to H) pooled in one extra cell.
pub fn changepoint_law_check<T: Scalar>(paths: &[Vec<T>], rule: ChangePointRule, stay: T) -> Result<T> {
    let len = paths.first().map_or(0, Vec::len);
    if len < 2 {
        return Err(Error::domain("paths", len as f64, "at least one path with horizon >= 1"));
    }
    if paths.iter().any(|p| p.len() != len) {
        return Err(Error::validation("paths", paths.len() as f64, "paths of equal length"));
    }
    if !(stay >= T::zero() && stay < T::one()) {
        return Err(Error::validation("stay", stay.as_f64(), "0 <= stay < 1"));
    }
    let horizon = len - 1;
    // cells 1..=H, plus cell 0 for "no change-point within the horizon"
    let mut counts = vec![0usize; horizon + 1];
    for p in paths {
        match detect_changepoints(p, rule).first() {
            Some(&t) => counts[t] += 1,
            None => counts[0] += 1,
        }
    }
    let n = T::of_usize(paths.len());
    let mut tv = (T::of_usize(counts[0]) / n - stay.powi(horizon as i32)).abs();
    for (t, &c) in counts.iter().enumerate().skip(1) {
        let reference = stay.powi(t as i32 - 1) * (T::one() - stay);
        tv = tv + (T::of_usize(c) / n - reference).abs();
    }
    Ok(tv / T::of(2.0))
}

/// Writes `kernel,scheme,t,v,n,ks,atom_lo,atom_hi,seed`.
pub fn write_convergence_csv<T: Scalar, W: Write>(tables: &[ConvergenceTable<T>], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["kernel", "scheme", "t", "v", "n", "ks", "atom_lo", "atom_hi", "seed"])?;
    for tab in tables {
        for r in &tab.rows {
            w.write_record([
                tab.kernel.clone(),
                tab.scheme.clone(),
                tab.t.to_string(),
                format_real(r.v),
                r.n.to_string(),
                format_real(r.ks),
                format_real(r.atom_lo),
                format_real(r.atom_hi),
                r.seed.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `source,t,q025,mean,q975`.
pub fn write_envelope_csv<T: Scalar, W: Write>(envelopes: &[QuantileEnvelope<T>], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["source", "t", "q025", "mean", "q975"])?;
    for e in envelopes {
        for r in &e.rows {
            w.write_record([
                e.source.label().to_string(),
                r.t.to_string(),
                format_real(r.q025),
                format_real(r.mean),
                format_real(r.q975),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `u,estimate,n_exceed`.
pub fn write_chi_csv<T: Scalar, W: Write>(rows: &[ChiRow<T>], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["u", "estimate", "n_exceed"])?;
    for r in rows {
        w.write_record([format_real(r.u), format_real(r.estimate), r.n_exceed.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes chain paths (X_0, …, X_T) with regime `actual`; change-points
/// follow `rule` when one is given.
pub fn write_forward_paths_csv<T: Scalar, W: Write>(
    paths: &[Vec<T>],
    rule: Option<ChangePointRule>,
    writer: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(PATH_HEADER)?;
    for (id, p) in paths.iter().enumerate() {
        let cps = rule.map(|r| detect_changepoints(p, r)).unwrap_or_default();
        for (t, &x) in p.iter().enumerate() {
            w.write_record([
                id.to_string(),
                t.to_string(),
                format_real(x),
                "actual".into(),
                cps.contains(&t).to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
