//! One-dimensional quadrature.
//!
//! Global adaptive Gauss–Kronrod (7/15 point) bisection, a semi-infinite
//! wrapper using the map x = a − ln u, and Gauss–Legendre rules for product
//! integration over spheres.

use crate::error::{Error, Result};

// Kronrod abscissae on [-1, 1], positive half; the odd entries (1, 3, 5) are
// the 7-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

#[allow(clippy::excessive_precision)]
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

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Tolerances for [`adaptive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub relative: f64,
    pub absolute: f64,
    pub max_subdivisions: usize,
}

impl Tolerance {
    pub fn relative(relative: f64) -> Self {
        Self {
            relative,
            absolute: 0.0,
            max_subdivisions: 2000,
        }
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    (value, error)
}

/// Integrates `f` over `[a, b]` with global adaptive Gauss–Kronrod bisection.
///
/// Fails with [`Error::NumericalFailure`] when the subdivision budget runs out
/// before the error estimate drops below `max(absolute, relative·|I|)`.
pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "integration limits must be finite, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let (value, error) = kronrod15(&f, a, b);
    let mut segments = vec![Segment { a, b, value, error }];
    let mut evaluations = 15;

    loop {
        let total: f64 = segments.iter().map(|s| s.value).sum();
        let total_error: f64 = segments.iter().map(|s| s.error).sum();
        if !total.is_finite() {
            return Err(Error::NumericalFailure {
                what: "non-finite integrand".into(),
                estimate: total,
                error: total_error,
                evaluations,
            });
        }
        if total_error <= tol.absolute.max(tol.relative * total.abs()) {
            return Ok(Integral {
                value: total,
                error: total_error,
                evaluations,
            });
        }
        if segments.len() >= tol.max_subdivisions {
            return Err(Error::NumericalFailure {
                what: "adaptive Gauss-Kronrod subdivision limit".into(),
                estimate: total,
                error: total_error,
                evaluations,
            });
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("segment list is never empty");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            return Err(Error::NumericalFailure {
                what: "interval collapsed below machine resolution".into(),
                estimate: total,
                error: total_error,
                evaluations,
            });
        }
        let (lv, le) = kronrod15(&f, seg.a, mid);
        let (rv, re) = kronrod15(&f, mid, seg.b);
        evaluations += 30;
        segments.push(Segment {
            a: seg.a,
            b: mid,
            value: lv,
            error: le,
        });
        segments.push(Segment {
            a: mid,
            b: seg.b,
            value: rv,
            error: re,
        });
    }
}

/// Integrates `f` over `[a, ∞)` through the substitution x = a − ln u,
/// u ∈ (0, 1], so that ∫ f(x) dx = ∫ f(a − ln u) / u du.
pub fn semi_infinite<F: Fn(f64) -> f64>(f: F, a: f64, tol: Tolerance) -> Result<Integral> {
    adaptive(
        |u: f64| {
            if u <= 0.0 {
                return 0.0;
            }
            let x = a - u.ln();
            let v = f(x) / u;
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess, refined by Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_is_exact() {
        let r = adaptive(|x| 3.0 * x * x + 2.0 * x + 1.0, -1.0, 2.0, Tolerance::relative(1e-13)).unwrap();
        assert_relative_eq!(r.value, 15.0, max_relative = 1e-14);
    }

    #[test]
    fn oscillatory_integral() {
        let tol = Tolerance {
            absolute: 1e-14,
            ..Tolerance::relative(1e-12)
        };
        let r = adaptive(|x| (10.0 * x).sin(), 0.0, std::f64::consts::PI, tol).unwrap();
        assert!(r.value.abs() < 1e-12);
        let r = adaptive(f64::exp, 0.0, 3.0, Tolerance::relative(1e-12)).unwrap();
        assert_relative_eq!(r.value, 3f64.exp() - 1.0, max_relative = 1e-12);
    }

    #[test]
    fn semi_infinite_exponential() {
        let r = semi_infinite(|x| (-x).exp(), 0.0, Tolerance::relative(1e-12)).unwrap();
        assert_relative_eq!(r.value, 1.0, max_relative = 1e-12);
        let r = semi_infinite(|x| (-2.0 * x).exp(), 1.0, Tolerance::relative(1e-12)).unwrap();
        assert_relative_eq!(r.value, 0.5 * (-2f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let tol = Tolerance {
            relative: 1e-15,
            absolute: 0.0,
            max_subdivisions: 3,
        };
        let err = adaptive(|x: f64| x.abs().sqrt().recip(), -1.0, 1.0, tol).unwrap_err();
        assert!(matches!(err, Error::NumericalFailure { .. }));
    }

    #[test]
    fn gauss_legendre_rules() {
        for n in [1, 2, 5, 8, 16] {
            let (x, w) = gauss_legendre(n);
            let sum: f64 = w.iter().sum();
            assert_relative_eq!(sum, 2.0, max_relative = 1e-14);
            // exact for degree 2n - 1
            let deg = 2 * n - 2;
            let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert_relative_eq!(approx, 2.0 / (deg as f64 + 1.0), max_relative = 1e-13);
        }
    }
}
