use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Stopping rules for [`bracket_root`].
#[derive(Debug, Clone, Copy)]
pub struct RootOptions<T> {
    /// Terminate once the bracket is no wider than this.
    pub x_tol: T,
    /// Terminate early when |f(x)| falls to this level. Zero disables it.
    pub f_tol: T,
    pub max_iter: usize,
}

impl<T: Scalar> RootOptions<T> {
    pub fn x_tol(tol: T) -> Self {
        RootOptions {
            x_tol: tol,
            f_tol: T::zero(),
            max_iter: 400,
        }
    }
}

/// Final state of a root search.
#[derive(Debug, Clone, Copy)]
pub struct RootBracket<T> {
    pub root: T,
    pub lo: T,
    pub hi: T,
    pub iterations: usize,
}

impl<T: Scalar> RootBracket<T> {
    pub fn width(&self) -> T {
        self.hi - self.lo
    }
}

/// Finds a sign change of `f` on `[lo, hi]` to width `tol`.
pub fn solve_root<T: Scalar, F: FnMut(T) -> T>(f: F, lo: T, hi: T, tol: T) -> Result<T> {
    bracket_root(f, lo, hi, RootOptions::x_tol(tol)).map(|b| b.root)
}

/// Bisection with secant (regula falsi) acceleration.
///
/// A secant step is only accepted when it lands strictly inside the bracket
/// and the previous step at least halved the bracket; otherwise the interval
/// is bisected. The width therefore shrinks geometrically while smooth
/// functions still converge superlinearly.
pub fn bracket_root<T: Scalar, F: FnMut(T) -> T>(
    mut f: F,
    lo: T,
    hi: T,
    opts: RootOptions<T>,
) -> Result<RootBracket<T>> {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a);
    let mut fb = f(b);
    let bracket_err = |fa: T, fb: T| Error::Bracketing {
        lo: a.as_f64(),
        hi: b.as_f64(),
        f_lo: fa.as_f64(),
        f_hi: fb.as_f64(),
    };
    if fa.is_nan() || fb.is_nan() {
        return Err(bracket_err(fa, fb));
    }
    if fa == T::zero() {
        return Ok(RootBracket { root: a, lo: a, hi: a, iterations: 0 });
    }
    if fb == T::zero() {
        return Ok(RootBracket { root: b, lo: b, hi: b, iterations: 0 });
    }
    if fa.signum() == fb.signum() {
        return Err(bracket_err(fa, fb));
    }

    let half = T::of(0.5);
    let mut last_width = b - a;
    let mut force_bisect = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let width = b - a;
        if width <= opts.x_tol {
            break;
        }
        iterations += 1;
        let mid = a + half * width;
        let secant = b - fb * (b - a) / (fb - fa);
        let x = if !force_bisect && secant > a && secant < b {
            secant
        } else {
            mid
        };
        let x = if x <= a || x >= b { mid } else { x };
        if x <= a || x >= b {
            // Bracket has collapsed to adjacent floats.
            break;
        }
        let fx = f(x);
        if fx.is_nan() {
            return Err(Error::Internal(format!(
                "objective returned NaN at x = {}",
                x.as_f64()
            )));
        }
        if fx == T::zero() || fx.abs() <= opts.f_tol {
            return Ok(RootBracket { root: x, lo: x, hi: x, iterations });
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        let new_width = b - a;
        force_bisect = new_width > half * last_width;
        last_width = new_width;
    }
    let root = if fa.abs() <= fb.abs() { a } else { b };
    Ok(RootBracket {
        root,
        lo: a,
        hi: b,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::special::gamma;
    use proptest::prelude::*;

    #[test]
    fn linear_root() {
        let r = solve_root(|x: f64| x - 1.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sqrt_two() {
        let r = solve_root(|x: f64| x * x - 2.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn second_moment_equation_root_is_one() {
        let f = |u: f64| 2f64.powf(u) * gamma(u + 0.5) / std::f64::consts::PI.sqrt() - 1.0;
        let r = solve_root(f, 0.5, 1.5, 1e-10).unwrap();
        assert!((r - 1.0).abs() < 1e-10);
    }

    #[test]
    fn no_sign_change_is_reported() {
        let err = solve_root(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-10).unwrap_err();
        assert!(matches!(err, Error::Bracketing { .. }));
    }

    #[test]
    fn f_tolerance_stops_early() {
        let b = bracket_root(
            |x: f64| x.powi(3) - 0.3,
            0.0,
            1.0,
            RootOptions { x_tol: 1e-300, f_tol: 1e-12, max_iter: 500 },
        )
        .unwrap();
        assert!((b.root.powi(3) - 0.3).abs() <= 1e-12);
    }

    #[test]
    fn works_in_f32() {
        let r = solve_root(|x: f32| x * x - 2.0, 0.0, 2.0, 1e-6).unwrap();
        assert!((r - std::f32::consts::SQRT_2).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn bracket_width_within_tolerance(
            root in -50.0f64..50.0,
            k in 0.1f64..10.0,
            cube in any::<bool>(),
            tol_exp in 3i32..13,
        ) {
            let tol = 10f64.powi(-tol_exp);
            let f = |x: f64| if cube { (x - root).powi(3) * k } else { (x - root) * k + (x - root).powi(3) };
            let b = bracket_root(f, -100.0, 100.0, RootOptions::x_tol(tol)).unwrap();
            prop_assert!(b.width() <= tol);
            prop_assert!(b.lo <= b.root && b.root <= b.hi);
            prop_assert!(b.lo - 1e-12 <= root && root <= b.hi + 1e-12);
        }
    }
}
