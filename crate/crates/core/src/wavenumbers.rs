//! Complex axial wavenumbers of lossy ducts, admittance matching, circular
//! cutoffs and microphone-placement advice.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::geometry::EllipseSection;
use crate::{Error, Result};

/// `I(e) = int_0^{pi/2} sqrt(1 - e^2 cos^2 t) dt`, summed as a power series in e².
pub fn elliptic_i(e: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&e) {
        return Err(Error::Domain(format!(
            "eccentricity must lie in [0, 1), got {e}"
        )));
    }
    let e2 = e * e;
    // c_n = ((2n-1)!!/(2n)!!)^2 e^{2n}; the n-th term is c_n / (2n - 1)
    let mut c = 1.0;
    let mut sum = 1.0;
    let mut n = 0u32;
    loop {
        let r = f64::from(2 * n + 1) / f64::from(2 * n + 2);
        c *= r * r * e2;
        n += 1;
        let term = c / f64::from(2 * n - 1);
        sum -= term;
        if term < 1e-14 * sum || n > 200_000 {
            break;
        }
    }
    Ok(0.5 * PI * sum)
}

/// A uniform elliptical duct with admittance-type wall losses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossyDuctModel {
    pub section: EllipseSection,
    pub mu_z: f64,
    pub c0: f64,
}

impl LossyDuctModel {
    pub fn new(section: EllipseSection, mu_z: f64, c0: f64) -> Result<Self> {
        if !(mu_z >= 0.0) {
            return Err(Error::Domain(format!(
                "mu_z must be non-negative, got {mu_z}"
            )));
        }
        if !(c0 > 0.0) {
            return Err(Error::Domain(format!("c0 must be positive, got {c0}")));
        }
        Ok(Self { section, mu_z, c0 })
    }

    /// Size of the first-order wall correction `4 mu I(e) / (k0 pi b)` at `f`.
    pub fn correction(&self, f: f64) -> Result<f64> {
        let k0 = wavenumber(f, self.c0)?;
        let i = elliptic_i(self.section.eccentricity())?;
        Ok(4.0 * self.mu_z * i / (k0 * PI * self.section.b()))
    }

    /// True when the wall correction is too large for the first-order model.
    pub fn hard_wall_advisory(&self, f: f64) -> Result<bool> {
        Ok(self.correction(f)? >= 0.5)
    }

    pub fn kz(&self, f: f64) -> Result<Complex64> {
        kz_elliptical(f, self)
    }
}

fn wavenumber(f: f64, c0: f64) -> Result<f64> {
    if !(f > 0.0) {
        return Err(Error::Domain(format!(
            "frequency must be positive, got {f}"
        )));
    }
    Ok(2.0 * PI * f / c0)
}

fn corrected(k0: f64, correction: f64) -> Complex64 {
    k0 * Complex64::new(1.0, -correction).sqrt()
}

pub fn kz_elliptical(f: f64, model: &LossyDuctModel) -> Result<Complex64> {
    let k0 = wavenumber(f, model.c0)?;
    if model.mu_z == 0.0 {
        return Ok(Complex64::new(k0, 0.0));
    }
    Ok(corrected(k0, model.correction(f)?))
}

pub fn kz_circular(f: f64, a: f64, mu_z: f64, c0: f64) -> Result<Complex64> {
    let k0 = wavenumber(f, c0)?;
    if !(a > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {a}")));
    }
    if mu_z == 0.0 {
        return Ok(Complex64::new(k0, 0.0));
    }
    Ok(corrected(k0, 2.0 * mu_z / (k0 * a)))
}

/// Admittance for duct i giving the same axial attenuation as duct j.
pub fn match_admittance(mu_j: f64, e_j: f64, b_j: f64, e_i: f64, b_i: f64) -> Result<f64> {
    if !(b_i > 0.0 && b_j > 0.0) {
        return Err(Error::Domain("semi-axes must be positive".into()));
    }
    Ok(mu_j * (elliptic_i(e_j)? / elliptic_i(e_i)?) * (b_i / b_j))
}

/// Zeros of J1', J2' and the first non-trivial zero of J0'.
pub const BESSEL_DERIVATIVE_ZEROS: [(&str, f64); 3] = [
    ("(1,0)", 1.841_183_781),
    ("(2,0)", 3.054_236_928),
    ("(0,1)", 3.831_705_970),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Cutoff {
    pub label: &'static str,
    pub f_hz: f64,
    /// First mode without a nodal plane through the axis.
    pub centerline_limiting: bool,
}

/// First three non-planar cutoff frequencies of a rigid circular duct.
pub fn circular_cutoffs(a: f64, c0: f64) -> Result<Vec<Cutoff>> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {a}")));
    }
    Ok(BESSEL_DERIVATIVE_ZEROS
        .iter()
        .enumerate()
        .map(|(i, &(label, j))| Cutoff {
            label,
            f_hz: j * c0 / (2.0 * PI * a),
            centerline_limiting: i == 2,
        })
        .collect())
}

/// Usable band edge for centerline probes.
pub fn centerline_cutoff(a: f64, c0: f64) -> Result<f64> {
    Ok(circular_cutoffs(a, c0)?[2].f_hz)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacingAdvice {
    pub lambda_min: f64,
    pub s_min: f64,
    pub s_max: f64,
    pub s_opt: f64,
    /// Minimum distance of the first probe from the reference surface.
    pub x1_min: Option<f64>,
}

impl SpacingAdvice {
    /// Whether `s` lies strictly within the recommended range.
    pub fn accepts(&self, s: f64) -> bool {
        s > self.s_min && s < self.s_max
    }

    pub fn in_wavelengths(&self, s: f64) -> f64 {
        s / self.lambda_min
    }
}

pub fn spacing_advice(f_max: f64, c0: f64, h: f64, a_e: Option<f64>) -> Result<SpacingAdvice> {
    if !(f_max > 0.0 && h > 0.0 && c0 > 0.0) {
        return Err(Error::Domain("f_max, c0 and h must be positive".into()));
    }
    let lambda_min = c0 / f_max;
    if h >= 0.4 * lambda_min {
        return Err(Error::Domain(format!(
            "mesh size {h} m is too coarse for {f_max} Hz (needs < {} m)",
            0.4 * lambda_min
        )));
    }
    Ok(SpacingAdvice {
        lambda_min,
        s_min: h.max(0.1 * lambda_min),
        s_max: 0.4 * lambda_min,
        s_opt: 0.25 * lambda_min,
        x1_min: a_e.map(|a| 2.1 * a),
    })
}

/// 2-norm condition number of the plane-wave decomposition at two points `s` apart.
///
/// Returns `+inf` where the decomposition is singular (k s a multiple of pi).
pub fn sensitivity_proxy(s: f64, f: f64, c0: f64) -> f64 {
    let k = 2.0 * PI * f / c0;
    let ph = |x: f64| Complex64::from_polar(1.0, x);
    // x1 = 0, x2 = s; the condition number does not depend on the offset
    let m = [[ph(0.0), ph(0.0)], [ph(-k * s), ph(k * s)]];
    let fro2: f64 = m.iter().flatten().map(|z| z.norm_sqr()).sum();
    let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).norm();
    if det <= 1e-14 * fro2 {
        return f64::INFINITY;
    }
    // singular values of a 2x2 from its Frobenius norm and determinant
    let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt();
    let smax = (0.5 * (fro2 + disc)).sqrt();
    let smin = det / smax;
    smax / smin
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn elliptic_i_values() {
        assert_eq!(elliptic_i(0.0).unwrap(), PI / 2.0);
        assert!((elliptic_i(0.6).unwrap() - 1.418_083).abs() < 1e-6);
        assert!((elliptic_i(0.8).unwrap() - 1.276_350).abs() < 1e-6);
        assert!(elliptic_i(1.0).is_err());
        assert!(elliptic_i(-0.1).is_err());
    }

    #[test]
    fn wavenumber_examples() {
        let sec = EllipseSection::new(0.005 / 0.6, 0.005).unwrap();
        assert!((sec.eccentricity() - 0.8).abs() < 1e-12);
        let m = LossyDuctModel::new(sec, 0.01, 345.0).unwrap();
        let k = m.kz(1000.0).unwrap();
        assert!(
            (k.re - 18.28).abs() < 5e-3 && (k.im + 1.62).abs() < 5e-3,
            "{k}"
        );
        let k = kz_circular(1000.0, 0.01, 0.01, 345.0).unwrap();
        assert!(
            (k.re - 18.239).abs() < 1e-3 && (k.im + 0.9986).abs() < 1e-4,
            "{k}"
        );
        let k0 = 2.0 * PI * 1000.0 / 345.0;
        assert_eq!(
            kz_circular(1000.0, 0.01, 0.0, 345.0).unwrap(),
            Complex64::new(k0, 0.0)
        );
        assert!(kz_circular(0.0, 0.01, 0.01, 345.0).is_err());
        assert!(kz_circular(100.0, 0.0, 0.01, 345.0).is_err());
    }

    #[test]
    fn circular_reduction_exact() {
        let m = LossyDuctModel::new(EllipseSection::circular(0.01).unwrap(), 0.01, 345.0).unwrap();
        for f in [100.0, 1000.0, 7000.0] {
            let a = m.kz(f).unwrap();
            let b = kz_circular(f, 0.01, 0.01, 345.0).unwrap();
            assert!((a - b).norm() < 1e-13 * b.norm());
        }
    }

    #[test]
    fn matching_examples() {
        assert_eq!(match_admittance(0.01, 0.3, 0.01, 0.3, 0.01).unwrap(), 0.01);
        assert!((match_admittance(0.01, 0.0, 0.01, 0.0, 0.02).unwrap() - 0.02).abs() < 1e-15);
        let mu = match_admittance(0.01, 0.0, 0.01, 0.8, 0.005).unwrap();
        assert!((mu - 0.006153).abs() < 1e-6, "{mu}");
        let sec = EllipseSection::new(0.005 / 0.6, 0.005).unwrap();
        let m = LossyDuctModel::new(sec, mu, 345.0).unwrap();
        for f in [200.0, 1000.0, 5000.0] {
            let a = m.kz(f).unwrap();
            let b = kz_circular(f, 0.01, 0.01, 345.0).unwrap();
            assert!((a - b).norm() < 1e-12 * b.norm());
        }
    }

    #[test]
    fn cutoffs() {
        let c = circular_cutoffs(0.01, 345.0).unwrap();
        assert!((c[0].f_hz - 10_110.0).abs() < 5.0);
        assert!(((c[1].f_hz / c[0].f_hz) - 1.6588).abs() < 1e-4);
        assert!(c[2].centerline_limiting && !c[0].centerline_limiting);
        let d = circular_cutoffs(0.02, 345.0).unwrap();
        assert!((d[1].f_hz * 2.0 - c[1].f_hz).abs() < 1e-9);
        assert!(circular_cutoffs(0.0, 345.0).is_err());
    }

    #[test]
    fn advice_examples() {
        let adv = spacing_advice(10_000.0, 345.0, 0.001, Some(0.01)).unwrap();
        assert!((adv.s_opt - 0.008625).abs() < 1e-12);
        assert!(adv.accepts(0.01));
        assert!((adv.in_wavelengths(0.01) - 0.2899).abs() < 1e-3);
        assert!((adv.x1_min.unwrap() - 0.021).abs() < 1e-15);
        let half = spacing_advice(5_000.0, 345.0, 0.001, None).unwrap();
        assert!((half.s_opt - 2.0 * adv.s_opt).abs() < 1e-15);
        assert!((half.s_max - 2.0 * adv.s_max).abs() < 1e-15);
        let coarse = spacing_advice(10_000.0, 345.0, 0.005, None).unwrap();
        assert_eq!(coarse.s_min, 0.005);
        assert!(spacing_advice(10_000.0, 345.0, 0.014, None).is_err());
    }

    #[test]
    fn proxy_shape() {
        let f = 1000.0;
        let lam = 0.345;
        assert!(sensitivity_proxy(lam / 2.0, f, 345.0).is_infinite());
        let n = 2000;
        let (best, _) = (1..n)
            .map(|i| {
                let s = lam / 2.0 * i as f64 / n as f64;
                (s, sensitivity_proxy(s, f, 345.0))
            })
            .fold(
                (0.0, f64::INFINITY),
                |acc, x| if x.1 < acc.1 { x } else { acc },
            );
        assert!((best - lam / 4.0).abs() <= lam / 2.0 / n as f64);
        assert!((sensitivity_proxy(lam / 4.0, f, 345.0) - 1.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn reduction_small_eccentricity(f in 100.0..10_000.0f64, mu in 0.0..0.02f64, a in 0.005..0.03f64) {
            let sec = EllipseSection::new(a, a * (1.0 - 1e-16f64).sqrt()).unwrap();
            let m = LossyDuctModel::new(sec, mu, 345.0).unwrap();
            let x = m.kz(f).unwrap();
            let y = kz_circular(f, a, mu, 345.0).unwrap();
            prop_assert!((x - y).norm() <= 1e-12 * y.norm());
        }

        #[test]
        fn attenuation_monotone(f in 100.0..10_000.0f64, mu in 0.001..0.02f64, b in 0.004..0.03f64) {
            let im = |mu: f64, b: f64| kz_circular(f, b, mu, 345.0).unwrap().im.abs();
            prop_assert!(im(mu * 1.1, b) > im(mu, b));
            prop_assert!(im(mu, b * 1.1) < im(mu, b));
            prop_assert!(kz_circular(f, b, mu, 345.0).unwrap().im <= 0.0);
        }

        #[test]
        fn matched_ducts_agree(f in 100.0..10_000.0f64, mu in 0.0..0.02f64, e in 0.0..0.95f64, b in 0.003..0.02f64) {
            let mu_i = match_admittance(mu, 0.0, 0.01, e, b).unwrap();
            let a = b / (1.0 - e * e).sqrt();
            let m = LossyDuctModel::new(EllipseSection::new(a, b).unwrap(), mu_i, 345.0).unwrap();
            let x = m.kz(f).unwrap();
            let y = kz_circular(f, 0.01, mu, 345.0).unwrap();
            prop_assert!((x - y).norm() <= 1e-12 * y.norm());
        }

        #[test]
        fn proxy_at_least_one(s in 0.001..0.2f64, f in 100.0..10_000.0f64) {
            prop_assert!(sensitivity_proxy(s, f, 345.0) >= 1.0 - 1e-12);
        }
    }
}
