//! Independent analytic references.
//!
//! Nothing here calls into the simulation, wavenumber or TMTF code: the
//! plane-wave synthesis, the quadrature and the special functions are all
//! implemented locally so that agreement with the main modules means something.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

/// Two-point plane-wave field on a duct axis, per frequency bin.
///
/// Positions are distances from the reference surface, which carries the
/// reflection coefficient `r0`. The incident wave travels toward it.
#[derive(Debug, Clone)]
pub struct SyntheticFieldSpec {
    pub r0: Vec<Complex64>,
    pub k: Vec<Complex64>,
    pub amplitude: Vec<Complex64>,
    pub x1: f64,
    pub x2: f64,
}

/// Plane-wave pressure `A (e^{jkx} + R0 e^{-jkx})` at a distance `x` from the reference.
pub fn plane_wave_pressure(a: Complex64, r0: Complex64, k: Complex64, x: f64) -> Complex64 {
    let j = Complex64::i();
    a * ((j * k * x).exp() + r0 * (-j * k * x).exp())
}

pub fn synthetic_two_point_field(spec: &SyntheticFieldSpec) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = spec.r0.len().min(spec.k.len()).min(spec.amplitude.len());
    (0..n)
        .map(|i| {
            let (a, r, k) = (spec.amplitude[i], spec.r0[i], spec.k[i]);
            (
                plane_wave_pressure(a, r, k, spec.x1),
                plane_wave_pressure(a, r, k, spec.x2),
            )
        })
        .unzip()
}

/// Magnitude of the propagation factor lost when the translation to the
/// reference surface uses `Re k` instead of the complex `k`.
pub fn real_k_missing_factor(k: Complex64, x1: f64) -> f64 {
    (2.0 * x1 * k.im).exp()
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let s = f(c - h * XGK[i]) + f(c + h * XGK[i]);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) integration to an absolute tolerance.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let width = b - a;
    let mut total = 0.0;
    let mut stack = vec![(a, b, 0u32)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let (val, err) = gk15(&f, lo, hi);
        let budget = tol * (hi - lo) / width;
        if err <= budget || depth >= 50 {
            total += val;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    total
}

/// `int_0^{pi/2} sqrt(1 - e^2 cos^2 t) dt` by adaptive quadrature.
pub fn quadrature_elliptic_integral(e: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&e) {
        return Err(Error::Domain(format!(
            "eccentricity must lie in [0, 1], got {e}"
        )));
    }
    let e2 = e * e;
    Ok(integrate(
        |t| (1.0 - e2 * t.cos().powi(2)).max(0.0).sqrt(),
        0.0,
        0.5 * PI,
        1e-13,
    ))
}

/// Resonances `n c0 / (2L)` of a duct closed at both ends.
pub fn closed_duct_modes(length: f64, c0: f64, n_max: usize) -> Result<Vec<f64>> {
    if !(length > 0.0) {
        return Err(Error::Domain(format!(
            "length must be positive, got {length}"
        )));
    }
    Ok((1..=n_max)
        .map(|n| n as f64 * c0 / (2.0 * length))
        .collect())
}

const SERIES_LIMIT: f64 = 12.0;

fn bessel_j1_series(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 0.5 * x;
    let mut sum = term;
    for m in 1..200 {
        term *= q / (m as f64 * (m + 1) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn struve_h1_series(x: f64) -> f64 {
    let q = -0.25 * x * x;
    // (x/2)^2 / (Gamma(3/2) Gamma(5/2)) = (x/2)^2 * 8 / (3 pi)
    let mut term = 0.25 * x * x * 8.0 / (3.0 * PI);
    let mut sum = term;
    for m in 0..200 {
        let m = m as f64;
        term *= q / ((m + 1.5) * (m + 2.5));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// `J1(x) = (1/pi) int_0^pi cos(t - x sin t) dt`.
pub fn bessel_j1_quadrature(x: f64) -> f64 {
    integrate(|t| (t - x * t.sin()).cos(), 0.0, PI, 1e-14) / PI
}

/// `H1(x) = (2x/pi) int_0^{pi/2} cos^2 t sin(x sin t) dt`.
pub fn struve_h1_quadrature(x: f64) -> f64 {
    2.0 * x / PI
        * integrate(
            |t| t.cos().powi(2) * (x * t.sin()).sin(),
            0.0,
            0.5 * PI,
            1e-14,
        )
}

/// Bessel function of the first kind, order one.
pub fn bessel_j1(x: f64) -> f64 {
    if x.abs() <= SERIES_LIMIT {
        bessel_j1_series(x)
    } else {
        bessel_j1_quadrature(x)
    }
}

/// Struve function of order one.
pub fn struve_h1(x: f64) -> f64 {
    if x.abs() <= SERIES_LIMIT {
        struve_h1_series(x)
    } else {
        struve_h1_quadrature(x)
    }
}

/// Normalized radiation impedance of a rigid circular piston in an infinite baffle.
pub fn flanged_piston_impedance(ka: f64) -> Result<Complex64> {
    if !(ka > 0.0) {
        return Err(Error::Domain(format!("ka must be positive, got {ka}")));
    }
    let x = 2.0 * ka;
    Ok(Complex64::new(1.0 - bessel_j1(x) / ka, struve_h1(x) / ka))
}
