use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

// Gauss–Kronrod 7/15 abscissae and weights on [-1, 1] (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_SUBINTERVALS: usize = 4096;

fn gk15<T: Scalar, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> (T, T) {
    let half = T::of(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let fc = f(center);
    let mut kronrod = fc * T::of(WGK[7]);
    let mut gauss = fc * T::of(WG[3]);
    for j in 0..7 {
        let dx = half_len * T::of(XGK[j]);
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + T::of(WGK[j]) * pair;
        if j % 2 == 1 {
            gauss = gauss + T::of(WG[j / 2]) * pair;
        }
    }
    let result = kronrod * half_len;
    let err = ((kronrod - gauss) * half_len).abs();
    (result, err)
}

struct Segment<T> {
    a: T,
    b: T,
    value: T,
    err: T,
}

impl<T: Scalar> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl<T: Scalar> Eq for Segment<T> {}
impl<T: Scalar> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Scalar> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err
            .partial_cmp(&other.err)
            .unwrap_or(std::cmp::Ordering::Equal)
    }
}

/// Adaptive Gauss–Kronrod integration of `f` over `[lo, hi]` to absolute
/// tolerance `tol`.
///
/// The segment with the largest error estimate is bisected until the summed
/// estimate drops below `tol`. Running out of subdivisions yields
/// [`Error::Accuracy`] carrying the best estimate.
pub fn quadrature<T: Scalar, F: FnMut(T) -> T>(f: F, lo: T, hi: T, tol: T) -> Result<T> {
    quadrature_with_breaks(f, &[lo, hi], tol)
}

/// Like [`quadrature`] but starts from the segments delimited by `points`,
/// which should include any kinks of the integrand.
pub fn quadrature_with_breaks<T: Scalar, F: FnMut(T) -> T>(
    mut f: F,
    points: &[T],
    tol: T,
) -> Result<T> {
    if points.len() < 2 {
        return Ok(T::zero());
    }
    let mut heap = BinaryHeap::new();
    let mut total = T::zero();
    let mut total_err = T::zero();
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::domain("interval endpoint", (a + b).as_f64(), "finite reals"));
        }
        if a == b {
            continue;
        }
        let (value, err) = gk15(&mut f, a, b);
        total = total + value;
        total_err = total_err + err;
        heap.push(Segment { a, b, value, err });
    }
    // Roundoff floor: tolerances below a few ulps of the result are unreachable.
    let floor = |total: T| T::of(50.0) * T::epsilon() * total.abs();
    let mut count = heap.len();
    while total_err > tol.max(floor(total)) || !total_err.is_finite() {
        if count >= MAX_SUBINTERVALS || !total.is_finite() {
            return Err(Error::Accuracy {
                estimate: total.as_f64(),
                error: total_err.as_f64(),
            });
        }
        let Some(seg) = heap.pop() else { break };
        let mid = T::of(0.5) * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            heap.push(seg);
            return Err(Error::Accuracy {
                estimate: total.as_f64(),
                error: total_err.as_f64(),
            });
        }
        let (v1, e1) = gk15(&mut f, seg.a, mid);
        let (v2, e2) = gk15(&mut f, mid, seg.b);
        total = total - seg.value + v1 + v2;
        total_err = total_err - seg.err + e1 + e2;
        heap.push(Segment { a: seg.a, b: mid, value: v1, err: e1 });
        heap.push(Segment { a: mid, b: seg.b, value: v2, err: e2 });
        count += 1;
    }
    // Re-sum to shed accumulated cancellation in the running totals.
    let value = heap.iter().fold(T::zero(), |acc, s| acc + s.value);
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_density_has_total_mass_two() {
        let v = quadrature(|_w: f64| 2.0, 0.0, 1.0, 1e-10).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn first_moment_of_uniform_spectral_density() {
        let v = quadrature(|w: f64| w * 2.0, 0.0, 1.0, 1e-10).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kinked_integrand_v11() {
        // ∫ 2 max{w, 1 − w} dw = 1.5 exactly (two linear pieces, 0.75 each)
        let v = quadrature(|w: f64| 2.0 * w.max(1.0 - w), 0.0, 1.0, 1e-10).unwrap();
        assert!((v - 1.5).abs() < 1e-10);
    }

    #[test]
    fn peaked_integrand() {
        let v = quadrature(|x: f64| (-x * x * 100.0).exp(), -1.0, 1.0, 1e-12).unwrap();
        assert!((v - std::f64::consts::PI.sqrt() / 10.0).abs() < 1e-12);
    }

    #[test]
    fn singular_integrand_reports_accuracy_error() {
        let err = quadrature(|x: f64| 1.0 / x.abs(), -1.0, 1.0, 1e-12).unwrap_err();
        assert!(matches!(err, Error::Accuracy { .. }));
        // divergent but finite everywhere GK samples it
        let err = quadrature(|x: f64| 1.0 / x, 0.0, 1.0, 1e-12).unwrap_err();
        assert!(matches!(err, Error::Accuracy { .. }));
    }

    proptest! {
        #[test]
        fn cubics_integrate_exactly(
            c in proptest::array::uniform4(-10.0f64..10.0),
            a in -5.0f64..5.0,
            len in 0.01f64..10.0,
        ) {
            let b = a + len;
            let p = |x: f64| c[0] + c[1] * x + c[2] * x * x + c[3] * x * x * x;
            let anti = |x: f64| c[0] * x + c[1] * x * x / 2.0 + c[2] * x.powi(3) / 3.0 + c[3] * x.powi(4) / 4.0;
            let exact = anti(b) - anti(a);
            let v = quadrature(p, a, b, 1e-12).unwrap();
            prop_assert!((v - exact).abs() <= 1e-12 * (1.0 + exact.abs()));
        }
    }
}
