use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::numerics::root::{bracket_root, RootOptions};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    Linear,
    /// Piecewise cubic Hermite with slopes limited so monotone data stay monotone.
    MonotoneCubic,
}

/// A real function tabulated on strictly increasing abscissae.
///
/// Outside the tabulated range the endpoint values are held constant.
#[derive(Debug, Clone)]
pub struct GridFunction<T> {
    xs: Vec<T>,
    ys: Vec<T>,
    slopes: Vec<T>,
    rule: Interpolation,
}

impl<T: Scalar> GridFunction<T> {
    pub fn linear(xs: Vec<T>, ys: Vec<T>) -> Result<Self> {
        check_abscissae(&xs, &ys)?;
        Ok(GridFunction {
            xs,
            ys,
            slopes: Vec::new(),
            rule: Interpolation::Linear,
        })
    }

    /// Monotone cubic with Fritsch–Carlson slope estimates.
    pub fn monotone_cubic(xs: Vec<T>, ys: Vec<T>) -> Result<Self> {
        check_abscissae(&xs, &ys)?;
        let slopes = fritsch_carlson_slopes(&xs, &ys);
        Ok(GridFunction {
            xs,
            ys,
            slopes,
            rule: Interpolation::MonotoneCubic,
        })
    }

    /// Monotone cubic Hermite with caller-supplied slopes (e.g. exact
    /// derivatives). Slopes are limited where they would break monotonicity.
    pub fn hermite(xs: Vec<T>, ys: Vec<T>, mut slopes: Vec<T>) -> Result<Self> {
        check_abscissae(&xs, &ys)?;
        if slopes.len() != xs.len() {
            return Err(Error::validation(
                "slopes length",
                slopes.len() as f64,
                "equal to the number of abscissae",
            ));
        }
        limit_slopes(&xs, &ys, &mut slopes);
        Ok(GridFunction {
            xs,
            ys,
            slopes,
            rule: Interpolation::MonotoneCubic,
        })
    }

    pub fn with_rule(xs: Vec<T>, ys: Vec<T>, rule: Interpolation) -> Result<Self> {
        match rule {
            Interpolation::Linear => Self::linear(xs, ys),
            Interpolation::MonotoneCubic => Self::monotone_cubic(xs, ys),
        }
    }

    pub fn xs(&self) -> &[T] {
        &self.xs
    }

    pub fn ys(&self) -> &[T] {
        &self.ys
    }

    pub fn slopes(&self) -> &[T] {
        &self.slopes
    }

    pub fn rule(&self) -> Interpolation {
        self.rule
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn x_min(&self) -> T {
        self.xs[0]
    }

    pub fn x_max(&self) -> T {
        self.xs[self.xs.len() - 1]
    }

    /// Index `i` with `xs[i] <= x < xs[i + 1]`, clamped to valid cells.
    pub fn cell(&self, x: T) -> usize {
        let n = self.xs.len();
        match self.xs.binary_search_by(|p| p.partial_cmp(&x).unwrap_or(std::cmp::Ordering::Less)) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    pub fn eval(&self, x: T) -> T {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = self.cell(x);
        self.eval_in_cell(i, x)
    }

    fn eval_in_cell(&self, i: usize, x: T) -> T {
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let h = x1 - x0;
        let s = (x - x0) / h;
        match self.rule {
            Interpolation::Linear => y0 + (y1 - y0) * s,
            Interpolation::MonotoneCubic => {
                let (d0, d1) = (self.slopes[i], self.slopes[i + 1]);
                let one = T::one();
                let two = T::of(2.0);
                let three = T::of(3.0);
                let s2 = s * s;
                let s3 = s2 * s;
                let h00 = two * s3 - three * s2 + one;
                let h10 = s3 - two * s2 + s;
                let h01 = -two * s3 + three * s2;
                let h11 = s3 - s2;
                h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
            }
        }
    }

    /// Solves `eval(x) = target` for monotone data. Targets beyond the
    /// tabulated range map to the nearest endpoint.
    pub fn inverse(&self, target: T) -> Result<T> {
        let n = self.ys.len();
        let increasing = self.ys[n - 1] >= self.ys[0];
        let key = |y: T| if increasing { y } else { -y };
        let t = key(target);
        if t <= key(self.ys[0]) {
            return Ok(self.xs[0]);
        }
        if t >= key(self.ys[n - 1]) {
            return Ok(self.xs[n - 1]);
        }
        // first node whose value is >= target
        let mut lo = 0;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if key(self.ys[mid]) < t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if self.rule == Interpolation::Linear {
            let (y0, y1) = (self.ys[lo], self.ys[hi]);
            if y1 == y0 {
                return Ok(self.xs[lo]);
            }
            return Ok(self.xs[lo] + (self.xs[hi] - self.xs[lo]) * (target - y0) / (y1 - y0));
        }
        let width = self.xs[hi] - self.xs[lo];
        let tol = width * T::of(4.0) * T::epsilon();
        let b = bracket_root(
            |x| self.eval_in_cell(lo, x) - target,
            self.xs[lo],
            self.xs[hi],
            RootOptions { x_tol: tol, f_tol: T::zero(), max_iter: 200 },
        )?;
        Ok(b.root)
    }

    pub fn write_csv<W: Write>(&self, writer: W, value_header: &str) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["x", value_header])?;
        for (x, y) in self.xs.iter().zip(&self.ys) {
            w.write_record([format_real(*x), format_real(*y)])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads `(x, value)` rows (header line required).
    pub fn read_csv<R: Read>(reader: R, rule: Interpolation) -> Result<Self> {
        let (xs, ys) = read_pairs(reader)?;
        Self::with_rule(xs, ys, rule)
    }
}

pub(crate) fn read_pairs<T: Scalar, R: Read>(reader: R) -> Result<(Vec<T>, Vec<T>)> {
    let mut r = csv::Reader::from_reader(reader);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() < 2 {
            return Err(Error::Io(format!("expected 2 columns, got {}", rec.len())));
        }
        let parse = |s: &str| -> Result<T> {
            s.trim()
                .parse::<f64>()
                .map(T::of)
                .map_err(|e| Error::Io(format!("bad number {s:?}: {e}")))
        };
        xs.push(parse(&rec[0])?);
        ys.push(parse(&rec[1])?);
    }
    Ok((xs, ys))
}

/// Shortest representation that round-trips through `f64` parsing.
pub(crate) fn format_real<T: Scalar>(x: T) -> String {
    format!("{:?}", x.as_f64())
}

fn check_abscissae<T: Scalar>(xs: &[T], ys: &[T]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::validation(
            "ordinates length",
            ys.len() as f64,
            "equal to the number of abscissae",
        ));
    }
    if xs.len() < 2 {
        return Err(Error::validation("grid size", xs.len() as f64, "at least 2 points"));
    }
    for w in xs.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::validation(
                "abscissa",
                w[1].as_f64(),
                "strictly increasing",
            ));
        }
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::validation("grid value", f64::NAN, "finite"));
    }
    Ok(())
}

fn fritsch_carlson_slopes<T: Scalar>(xs: &[T], ys: &[T]) -> Vec<T> {
    let n = xs.len();
    let secants: Vec<T> = (0..n - 1)
        .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
        .collect();
    let mut d = vec![T::zero(); n];
    d[0] = secants[0];
    d[n - 1] = secants[n - 2];
    for i in 1..n - 1 {
        let (a, b) = (secants[i - 1], secants[i]);
        if a * b <= T::zero() {
            d[i] = T::zero();
        } else {
            // weighted harmonic mean (Fritsch–Butland)
            let h0 = xs[i] - xs[i - 1];
            let h1 = xs[i + 1] - xs[i];
            let w1 = T::of(2.0) * h1 + h0;
            let w2 = h1 + T::of(2.0) * h0;
            d[i] = (w1 + w2) / (w1 / a + w2 / b);
        }
    }
    limit_slopes(xs, ys, &mut d);
    d
}

fn limit_slopes<T: Scalar>(xs: &[T], ys: &[T], d: &mut [T]) {
    let three = T::of(3.0);
    for i in 0..xs.len() - 1 {
        let delta = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
        if delta == T::zero() {
            d[i] = T::zero();
            d[i + 1] = T::zero();
            continue;
        }
        if d[i] * delta < T::zero() {
            d[i] = T::zero();
        }
        if d[i + 1] * delta < T::zero() {
            d[i + 1] = T::zero();
        }
        let a = d[i] / delta;
        let b = d[i + 1] / delta;
        let r2 = a * a + b * b;
        if r2 > T::of(9.0) {
            let tau = three / r2.sqrt();
            d[i] = tau * a * delta;
            d[i + 1] = tau * b * delta;
        }
    }
}
