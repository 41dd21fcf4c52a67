//! Stationary law of the autoregression V = φV' + E − 1.
//!
//! With E standard exponential and V' an independent copy of V, the survival
//! function S = 1 − F_V satisfies
//!
//! ```text
//! S(y) = e^{−(y − y0)} + φ e^{−(y + 1)} ∫_{y0}^{(y + 1)/φ} S(x) e^{φx} dx,   y ≥ y0,
//! ```
//!
//! with lower endpoint y0 = −1/(1 − φ). Differentiating gives the exact slope
//! S'(y) = S((y + 1)/φ) − S(y), which feeds a cubic Hermite interpolant, so the
//! discretisation error is fourth order in the grid spacing.

use crate::error::{Error, Result};
use crate::numerics::grid::GridFunction;
use crate::numerics::quadrature::quadrature;
use crate::scalar::Scalar;

const GL4_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL4_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

const MAX_ITER: usize = 20_000;
/// Margin (in nats) between ln E[e^{φV}] and the last grid point; gives S(y_max) < 1e-10.
const TAIL_MARGIN: f64 = 26.0;
/// Share of grid points spent on the uniform body.
const BODY_SHARE: f64 = 0.75;

/// Numerical solution of the stationary law of V.
#[derive(Debug, Clone)]
pub struct FvSolution<T> {
    phi: T,
    survival: GridFunction<T>,
    /// sup over nodes of |S − map(S)| at the returned iterate.
    pub residual: T,
    pub iterations: usize,
}

impl<T: Scalar> FvSolution<T> {
    pub fn phi(&self) -> T {
        self.phi
    }

    /// Lower endpoint −1/(1 − φ) of the support.
    pub fn lower(&self) -> T {
        self.survival.x_min()
    }

    pub fn upper(&self) -> T {
        self.survival.x_max()
    }

    /// The tabulated survival function 1 − F_V.
    pub fn survival(&self) -> &GridFunction<T> {
        &self.survival
    }

    /// F_V as a grid function on the same nodes.
    pub fn cdf_grid(&self) -> GridFunction<T> {
        let ys = self.survival.ys().iter().map(|s| T::one() - *s).collect();
        let ds = self.survival.slopes().iter().map(|d| -*d).collect();
        GridFunction::hermite(self.survival.xs().to_vec(), ys, ds)
            .expect("grid was validated on construction")
    }

    /// 1 − F_V(y), with an exponential tail beyond the grid.
    pub fn sf(&self, y: T) -> T {
        sf_eval(&self.survival, y)
    }

    pub fn cdf(&self, y: T) -> T {
        T::one() - self.sf(y)
    }

    /// −ln(1 − F_V(y)), accurate far into the tail.
    pub fn neg_log_sf(&self, y: T) -> T {
        let g = &self.survival;
        if y > g.x_max() {
            -g.ys()[g.len() - 1].ln() + (y - g.x_max())
        } else {
            -self.sf(y).ln()
        }
    }

    /// Solves 1 − F_V(y) = q for q in (0, 1].
    pub fn isf(&self, q: T) -> Result<T> {
        if !(q > T::zero() && q <= T::one()) {
            return Err(Error::domain("survival probability", q.as_f64(), "(0, 1]"));
        }
        let g = &self.survival;
        let s_max = g.ys()[g.len() - 1];
        if q <= s_max {
            return Ok(g.x_max() + (s_max / q).ln());
        }
        g.inverse(q)
    }

    /// Solves −ln(1 − F_V(y)) = e, i.e. maps a standard exponential quantile to V.
    pub fn isf_log(&self, e: T) -> Result<T> {
        let g = &self.survival;
        let s_max = g.ys()[g.len() - 1];
        if e >= -s_max.ln() {
            return Ok(g.x_max() + e + s_max.ln());
        }
        self.isf((-e).exp())
    }

    /// E[V] = y0 + ∫ S over the support.
    pub fn mean(&self) -> T {
        let g = &self.survival;
        let body = cumulative(g, T::zero(), |x| sf_eval(g, x));
        self.lower() + body[body.len() - 1] + g.ys()[g.len() - 1]
    }

    /// Recomputes the fixed-point residual at the nodes and the cell midpoints
    /// (twice the grid resolution) with adaptive quadrature of the interpolant.
    pub fn verify_residual(&self) -> Result<T> {
        let g = &self.survival;
        let phi = self.phi;
        let y0 = self.lower();
        let one = T::one();
        let mut points = Vec::with_capacity(2 * g.len());
        for w in g.xs().windows(2) {
            points.push(w[0]);
            points.push(T::of(0.5) * (w[0] + w[1]));
        }
        points.push(g.x_max());
        let mut worst = T::zero();
        for &y in &points {
            let z = (y + one) / phi;
            let top = z.min(g.x_max());
            let scale = (y + one).exp() / phi;
            let tol = T::of(1e-13) * scale;
            let mut integral = if top > y0 {
                quadrature(|x: T| sf_eval(g, x) * (phi * x).exp(), y0, top, tol)?
            } else {
                T::zero()
            };
            integral = integral + tail_integral(g, phi, z);
            let rhs = (-(y - y0)).exp() + phi * (-(y + one)).exp() * integral;
            worst = worst.max((rhs - sf_eval(g, y)).abs());
        }
        Ok(worst)
    }
}

/// ln E[e^{φV}] = Σ_{j≥1} (−φ^j − ln(1 − φ^j)).
pub fn log_mgf_phi<T: Scalar>(phi: T) -> T {
    let mut acc = T::zero();
    let mut p = phi;
    for _ in 0..100_000 {
        let term = -p - (-p).ln_1p();
        acc = acc + term;
        if term.abs() < T::epsilon() * T::of(1e-3) {
            break;
        }
        p = p * phi;
    }
    acc
}

/// Solves for F_V on `grid_size` nodes until the fixed-point residual is
/// below `tol`.
///
/// Nodes are uniform over the body of the law and log-spaced in (y − y0)
/// over the upper tail. The iteration is damped, new = ½ old + ½ map(old).
pub fn solve_fv_fixed_point<T: Scalar>(phi: T, grid_size: usize, tol: T) -> Result<FvSolution<T>> {
    if !(phi > T::zero() && phi < T::one()) {
        return Err(Error::validation("phi", phi.as_f64(), "0 < phi < 1"));
    }
    if grid_size < 16 {
        return Err(Error::validation("grid_size", grid_size as f64, "at least 16"));
    }
    if !(tol > T::zero()) {
        return Err(Error::validation("tol", tol.as_f64(), "tol > 0"));
    }
    let one = T::one();
    let half = T::of(0.5);
    let y0 = -one / (one - phi);
    let y_max = log_mgf_phi(phi) + T::of(TAIL_MARGIN);
    let xs = make_nodes(y0, y_max, grid_size);

    // Start from y0 + Exp(1), a valid law; the map propagates laws of the chain.
    let mut s: Vec<T> = xs.iter().map(|&y| (-(y - y0)).exp()).collect();
    s[0] = one;
    let mut iterations = 0;
    let mut g = GridFunction::linear(xs.clone(), s.clone())?;
    loop {
        g = hermite_from(&xs, &s, &g, phi)?;
        let rhs = apply_map(&g, phi);
        let residual = s
            .iter()
            .zip(&rhs)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()));
        if !residual.is_finite() {
            return Err(Error::Convergence {
                iterations,
                residual: residual.as_f64(),
            });
        }
        if residual < tol {
            return Ok(FvSolution {
                phi,
                survival: g,
                residual,
                iterations,
            });
        }
        if iterations >= MAX_ITER {
            return Err(Error::Convergence {
                iterations,
                residual: residual.as_f64(),
            });
        }
        for (a, b) in s.iter_mut().zip(&rhs) {
            *a = half * *a + half * *b;
        }
        s[0] = one;
        iterations += 1;
    }
}

fn make_nodes<T: Scalar>(y0: T, y_max: T, n: usize) -> Vec<T> {
    let n_body = ((n as f64) * BODY_SHARE) as usize;
    let n_tail = n - n_body;
    let y_b = y0 + T::of(0.5) * (y_max - y0);
    let mut xs = Vec::with_capacity(n);
    for i in 0..n_body {
        xs.push(y0 + (y_b - y0) * T::of_usize(i) / T::of_usize(n_body));
    }
    let l0 = (y_b - y0).ln();
    let l1 = (y_max - y0).ln();
    for i in 0..n_tail {
        let l = l0 + (l1 - l0) * T::of_usize(i) / T::of_usize(n_tail - 1);
        xs.push(y0 + l.exp());
    }
    let last = xs.len() - 1;
    xs[last] = y_max;
    xs
}

fn sf_eval<T: Scalar>(g: &GridFunction<T>, y: T) -> T {
    if y <= g.x_min() {
        return T::one();
    }
    if y > g.x_max() {
        return g.ys()[g.len() - 1] * (-(y - g.x_max())).exp();
    }
    g.eval(y)
}

fn hermite_from<T: Scalar>(
    xs: &[T],
    s: &[T],
    prev: &GridFunction<T>,
    phi: T,
) -> Result<GridFunction<T>> {
    // Slopes via S'(y) = S((y + 1)/φ) − S(y), reading the upper argument off
    // the previous interpolant. At the fixed point the two agree.
    let one = T::one();
    let ds = xs
        .iter()
        .zip(s)
        .map(|(&y, &sy)| sf_eval(prev, (y + one) / phi) - sy)
        .collect();
    GridFunction::hermite(xs.to_vec(), s.to_vec(), ds)
}

/// ∫_{y_max}^{z} S(x) e^{φx} dx under the exponential tail (zero when z ≤ y_max).
fn tail_integral<T: Scalar>(g: &GridFunction<T>, phi: T, z: T) -> T {
    let y_max = g.x_max();
    if z <= y_max {
        return T::zero();
    }
    let s_m = g.ys()[g.len() - 1];
    let r = T::one() - phi;
    // S_m e^{y_max} ∫ e^{−(1−φ)x} dx
    s_m * (phi * y_max).exp() * (T::one() - (-r * (z - y_max)).exp()) / r
}

fn gl4<T: Scalar, F: Fn(T) -> T>(f: &F, a: T, b: T) -> T {
    let c = T::of(0.5) * (a + b);
    let h = T::of(0.5) * (b - a);
    let mut acc = T::zero();
    for k in 0..4 {
        acc = acc + T::of(GL4_WEIGHTS[k]) * f(c + h * T::of(GL4_NODES[k]));
    }
    acc * h
}

/// Cumulative integrals of `f` from the first node to every node.
fn cumulative<T: Scalar, F: Fn(T) -> T>(g: &GridFunction<T>, start: T, f: F) -> Vec<T> {
    let xs = g.xs();
    let mut out = Vec::with_capacity(xs.len());
    let mut acc = start;
    out.push(acc);
    for w in xs.windows(2) {
        acc = acc + gl4(&f, w[0], w[1]);
        out.push(acc);
    }
    out
}

fn apply_map<T: Scalar>(g: &GridFunction<T>, phi: T) -> Vec<T> {
    let one = T::one();
    let xs = g.xs();
    let y0 = xs[0];
    let y_max = g.x_max();
    let integrand = |x: T| sf_eval(g, x) * (phi * x).exp();
    let cum = cumulative(g, T::zero(), integrand);
    xs.iter()
        .map(|&y| {
            let z = (y + one) / phi;
            let integral = if z >= y_max {
                cum[cum.len() - 1] + tail_integral(g, phi, z)
            } else {
                let j = g.cell(z);
                cum[j] + gl4(&integrand, xs[j], z)
            };
            ((-(y - y0)).exp() + phi * (-(y + one)).exp() * integral).min(one)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lower_endpoint_has_zero_mass() {
        let sol = solve_fv_fixed_point(0.8f64, 2048, 1e-10).unwrap();
        assert!((sol.lower() + 5.0).abs() < 1e-12);
        assert_eq!(sol.cdf(sol.lower()), 0.0);
        assert!(sol.sf(sol.upper()) < 1e-10);
    }

    #[test]
    fn residual_survives_independent_check() {
        let sol = solve_fv_fixed_point(0.8f64, 2048, 1e-10).unwrap();
        assert!(sol.residual < 1e-10);
        let check = sol.verify_residual().unwrap();
        assert!(check < 1e-8, "{check}");
    }

    #[test]
    fn cdf_is_nondecreasing() {
        let sol = solve_fv_fixed_point(0.5f64, 1024, 1e-10).unwrap();
        let g = sol.cdf_grid();
        for w in g.ys().windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn mean_and_variance_match_the_recursion() {
        // E[V] = 0 and Var V = 1/(1 − φ²) by stationarity of V = φV' + E − 1.
        let phi = 0.8f64;
        let sol = solve_fv_fixed_point(phi, 2048, 1e-10).unwrap();
        assert!(sol.mean().abs() < 1e-7, "{}", sol.mean());
        let g = sol.survival();
        // E[(V − y0)²] = ∫ 2(y − y0) S(y) dy
        let y0 = sol.lower();
        let m2 = quadrature(|y: f64| 2.0 * (y - y0) * sol.sf(y), y0, sol.upper() + 40.0, 1e-11).unwrap();
        let var = m2 - y0 * y0;
        assert!((var - 1.0 / (1.0 - phi * phi)).abs() < 1e-6, "{var}");
        assert!(g.len() == 2048);
    }

    #[test]
    fn mean_matches_direct_simulation() {
        let phi = 0.8f64;
        let sol = solve_fv_fixed_point(phi, 2048, 1e-10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 200_000;
        let mut v = 0.0f64;
        for _ in 0..1000 {
            v = phi * v + f64::standard_exponential(&mut rng) - 1.0;
        }
        let mut sum = 0.0;
        // thin by 20 so draws are nearly independent
        for _ in 0..n {
            for _ in 0..20 {
                v = phi * v + f64::standard_exponential(&mut rng) - 1.0;
            }
            sum += v;
        }
        let mc = sum / n as f64;
        let se = (1.0 / (1.0 - phi * phi) / n as f64).sqrt();
        assert!((mc - sol.mean()).abs() < 3.0 * se, "mc {mc} vs {}", sol.mean());
    }

    #[test]
    fn survival_inverse_round_trips_into_the_tail() {
        let sol = solve_fv_fixed_point(0.8f64, 2048, 1e-10).unwrap();
        for &e in &[0.1f64, 1.0, 5.0, 20.0, 40.0] {
            let y = sol.isf_log(e).unwrap();
            assert!((sol.neg_log_sf(y) - e).abs() < 1e-8, "e = {e}");
        }
    }

    #[test]
    fn log_mgf_closed_form() {
        // φ small: ln E[e^{φV}] ≈ φ²/2 · Var(V) to leading order
        let phi = 0.01f64;
        let approx = phi * phi / 2.0 / (1.0 - phi * phi);
        assert!((log_mgf_phi(phi) - approx).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_phi() {
        assert!(matches!(
            solve_fv_fixed_point(1.0f64, 256, 1e-8),
            Err(Error::Validation { .. })
        ));
    }
}
