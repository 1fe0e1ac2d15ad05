//! Two-microphone transfer-function method.
//!
//! Pressures are taken as `P(x) = A (e^{jkx} + R e^{-jkx})` with `x` the
//! distance from the reference surface and time dependence `e^{jwt}`, so the
//! incident wave runs toward the reference and decays along the way when
//! `Im k < 0`.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::solver::ProbeRecord;
use crate::wavenumbers::{centerline_cutoff, LossyDuctModel};
use crate::{Error, Result};

/// Probe positions as distances from the reference surface.
///
/// `x1` belongs to the first record. The usual layout has `x1 > x2`, but the
/// formulas hold for either order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeGeometry {
    pub x1: f64,
    pub x2: f64,
}

impl ProbeGeometry {
    pub fn new(x1: f64, x2: f64) -> Result<Self> {
        if !(x1 > 0.0 && x2 > 0.0) || x1 == x2 {
            return Err(Error::Domain(format!(
                "probe distances must be positive and distinct, got {x1}, {x2}"
            )));
        }
        Ok(Self { x1, x2 })
    }

    /// Spacing `|x1 - x2|`.
    pub fn s(&self) -> f64 {
        (self.x1 - self.x2).abs()
    }

    fn signed_s(&self) -> f64 {
        self.x1 - self.x2
    }

    pub fn swapped(&self) -> Self {
        Self {
            x1: self.x2,
            x2: self.x1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinFlag {
    Ok,
    Invalid,
    Singular,
    Pole,
    AboveCutoff,
}

impl BinFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            BinFlag::Ok => "ok",
            BinFlag::Invalid => "invalid",
            BinFlag::Singular => "singular",
            BinFlag::Pole => "pole",
            BinFlag::AboveCutoff => "above_cutoff",
        }
    }
}

/// Tail-to-peak amplitude ratio of a record (last 10% of samples).
pub fn tail_ratio(samples: &[f64]) -> f64 {
    let peak = samples.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if peak == 0.0 {
        return 0.0;
    }
    let start = samples.len() - samples.len().div_ceil(10);
    samples[start..].iter().fold(0.0f64, |m, x| m.max(x.abs())) / peak
}

pub const DECAY_WARN: f64 = 0.01;
pub const DECAY_FAIL: f64 = 0.1;

/// One-sided spectra of two probes on the DFT grid.
#[derive(Debug, Clone)]
pub struct ProbeSpectra {
    pub freqs: Vec<f64>,
    pub p1: Vec<Complex64>,
    pub p2: Vec<Complex64>,
    /// Worst tail-to-peak ratio of the two records.
    pub tail_ratio: f64,
    pub warnings: Vec<String>,
}

/// Rectangular-window DFT of a real signal, bins `0..=n/2`.
pub fn dft(samples: &[f64]) -> Vec<Complex64> {
    let n = samples.len();
    if n == 0 {
        return Vec::new();
    }
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf.truncate(n / 2 + 1);
    buf
}

pub fn spectra_from_samples(dt: f64, s1: &[f64], s2: &[f64]) -> Result<ProbeSpectra> {
    if s1.len() != s2.len() {
        return Err(Error::Signal(format!(
            "probe records differ in length ({} vs {})",
            s1.len(),
            s2.len()
        )));
    }
    if s1.is_empty() || !(dt > 0.0) {
        return Err(Error::Signal(
            "probe records are empty or have no sampling step".into(),
        ));
    }
    let tail = tail_ratio(s1).max(tail_ratio(s2));
    let mut warnings = Vec::new();
    if tail >= DECAY_WARN {
        warnings.push(format!(
            "probe signals have not decayed: tail/peak = {tail:.3e}, spectral leakage likely"
        ));
    }
    let n = s1.len();
    let df = 1.0 / (n as f64 * dt);
    let p1 = dft(s1);
    Ok(ProbeSpectra {
        freqs: (0..p1.len()).map(|k| k as f64 * df).collect(),
        p1,
        p2: dft(s2),
        tail_ratio: tail,
        warnings,
    })
}

pub fn spectra_from_probes(rec1: &ProbeRecord, rec2: &ProbeRecord) -> Result<ProbeSpectra> {
    if rec1.dt != rec2.dt {
        return Err(Error::Signal(format!(
            "probe records use different steps ({} vs {})",
            rec1.dt, rec2.dt
        )));
    }
    spectra_from_samples(rec1.dt, &rec1.samples, &rec2.samples)
}

/// `H12 = P2 / P1`; `None` where `|P1|` is below `1e-12` of its peak.
pub fn transfer_function(p1: &[Complex64], p2: &[Complex64]) -> Vec<Option<Complex64>> {
    let peak = p1.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    p1.iter()
        .zip(p2)
        .map(|(&a, &b)| {
            if peak == 0.0 || a.norm() < 1e-12 * peak {
                None
            } else {
                Some(b / a)
            }
        })
        .collect()
}

const SINGULAR_TOL: f64 = 1e-12;

/// Reflection coefficient at the first probe; `None` at singular bins.
pub fn local_reflection(h12: Complex64, k: Complex64, geom: &ProbeGeometry) -> Option<Complex64> {
    let j = Complex64::i();
    let s = geom.signed_s();
    let den = (j * k * s).exp() - h12;
    if den.norm() < SINGULAR_TOL {
        return None;
    }
    Some((h12 - (-j * k * s).exp()) / den)
}

/// Carries a reflection coefficient from the first probe to the reference surface.
pub fn translate_to_reference(r1: Complex64, k: Complex64, geom: &ProbeGeometry) -> Complex64 {
    r1 * (2.0 * Complex64::i() * k * geom.x1).exp()
}

pub fn reflection_at_reference(
    h12: Complex64,
    geom: &ProbeGeometry,
    k: Complex64,
) -> Option<Complex64> {
    local_reflection(h12, k, geom).map(|r1| translate_to_reference(r1, k, geom))
}

/// `Z' = (1 + R) / (1 - R)`; `None` at the pole `R = 1`.
pub fn normalized_impedance(r: Complex64) -> Option<Complex64> {
    let den = Complex64::new(1.0, 0.0) - r;
    if den.norm() < SINGULAR_TOL {
        return None;
    }
    Some((1.0 + r) / den)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpedanceBin {
    pub f: f64,
    pub r: Complex64,
    /// Normalized impedance `Z / (rho0 c0)`; non-finite at flagged bins.
    pub z: Complex64,
    pub flag: BinFlag,
}

impl ImpedanceBin {
    pub fn resistance(&self) -> f64 {
        self.z.re
    }

    pub fn reactance(&self) -> f64 {
        self.z.im
    }
}

#[derive(Debug, Clone, Default)]
pub struct ImpedanceSpectrum {
    pub bins: Vec<ImpedanceBin>,
    pub warnings: Vec<String>,
}

impl ImpedanceSpectrum {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("f_hz,re_R,im_R,resistance,reactance,flag\n");
        for b in &self.bins {
            let _ = writeln!(
                out,
                "{:?},{:?},{:?},{:?},{:?},{}",
                b.f,
                b.r.re,
                b.r.im,
                b.z.re,
                b.z.im,
                b.flag.as_str()
            );
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn ok_bins(&self) -> impl Iterator<Item = &ImpedanceBin> {
        self.bins.iter().filter(|b| b.flag == BinFlag::Ok)
    }
}

/// Per-bin TMTF with a caller-supplied wavenumber. Bins at `f <= 0` or above
/// `f_max` are dropped; bins above `cutoff` are flagged but kept.
pub fn impedance_from_spectra(
    freqs: &[f64],
    p1: &[Complex64],
    p2: &[Complex64],
    geom: &ProbeGeometry,
    kz: impl Fn(f64) -> Result<Complex64>,
    f_max: f64,
    cutoff: Option<f64>,
) -> Result<ImpedanceSpectrum> {
    let h = transfer_function(p1, p2);
    let nan = Complex64::new(f64::NAN, f64::NAN);
    let mut bins = Vec::new();
    for (i, &f) in freqs.iter().enumerate() {
        if f <= 0.0 {
            continue;
        }
        if f > f_max {
            break;
        }
        let k = kz(f)?;
        let (r, z, flag) = match h[i] {
            None => (nan, nan, BinFlag::Invalid),
            Some(h12) => match reflection_at_reference(h12, geom, k) {
                None => (nan, nan, BinFlag::Singular),
                Some(r) => match normalized_impedance(r) {
                    None => (
                        r,
                        Complex64::new(f64::INFINITY, f64::INFINITY),
                        BinFlag::Pole,
                    ),
                    Some(z) => {
                        let above = cutoff.is_some_and(|fc| f > fc);
                        (
                            r,
                            z,
                            if above {
                                BinFlag::AboveCutoff
                            } else {
                                BinFlag::Ok
                            },
                        )
                    }
                },
            },
        };
        bins.push(ImpedanceBin { f, r, z, flag });
    }
    let mut warnings = Vec::new();
    if let Some(fc) = cutoff {
        if f_max > fc {
            warnings.push(format!(
                "f_max {f_max} Hz exceeds the centerline-limiting cutoff {fc:.1} Hz"
            ));
        }
    }
    Ok(ImpedanceSpectrum { bins, warnings })
}

/// Full pipeline from two probe records to the impedance at the reference surface.
pub fn extract_impedance(
    rec1: &ProbeRecord,
    rec2: &ProbeRecord,
    geom: &ProbeGeometry,
    duct: &LossyDuctModel,
    f_max: f64,
) -> Result<ImpedanceSpectrum> {
    let spectra = spectra_from_probes(rec1, rec2)?;
    if spectra.tail_ratio > DECAY_FAIL {
        return Err(Error::Signal(format!(
            "probe signals have not decayed (tail/peak = {:.3e} > {DECAY_FAIL})",
            spectra.tail_ratio
        )));
    }
    // elliptical cutoffs need Mathieu characteristic values and are not available
    let cutoff = if duct.section.is_circular() {
        Some(centerline_cutoff(duct.section.a(), duct.c0)?)
    } else {
        None
    };
    let mut out = impedance_from_spectra(
        &spectra.freqs,
        &spectra.p1,
        &spectra.p2,
        geom,
        |f| duct.kz(f),
        f_max,
        cutoff,
    )?;
    let mut warnings = spectra.warnings;
    warnings.append(&mut out.warnings);
    out.warnings = warnings;
    Ok(out)
}
