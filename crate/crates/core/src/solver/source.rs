//! Pulse source, zero-phase low-pass and the CFL time step.

use std::f64::consts::PI;

use crate::geometry::Mesh;
use crate::{Error, Result};

/// Default CFL factor applied to the smallest inscribed-sphere diameter.
pub const DEFAULT_CFL: f64 = 0.2;

/// Unit-peak Gaussian centred at `t_gp` with 1/e half-width `0.29 t_gp`.
pub fn gaussian_pulse(n: i64, dt: f64, t_gp: f64) -> f64 {
    let x = (dt * n as f64 - t_gp) / (0.29 * t_gp);
    (-x * x).exp()
}

/// Pulse delay matched to a nominal bandwidth `f0`.
pub fn pulse_delay(f0: f64) -> f64 {
    0.646 / f0
}

pub fn cfl_timestep(mesh: &Mesh, c0: f64, factor: f64) -> Result<f64> {
    if !(factor > 0.0 && factor <= 1.0) {
        return Err(Error::Config(format!(
            "CFL factor must lie in (0, 1], got {factor}"
        )));
    }
    if !(c0 > 0.0) {
        return Err(Error::Config(format!("c0 must be positive, got {c0}")));
    }
    Ok(factor * mesh.min_inscribed_diameter()? / c0)
}

/// Second-order section in transposed direct form II.
#[derive(Debug, Clone, Copy)]
struct Biquad {
    b: [f64; 3],
    a: [f64; 2],
}

impl Biquad {
    fn lowpass(w0: f64, q: f64) -> Self {
        let (s, c) = w0.sin_cos();
        let alpha = s / (2.0 * q);
        let a0 = 1.0 + alpha;
        let b1 = (1.0 - c) / a0;
        Self {
            b: [0.5 * b1, b1, 0.5 * b1],
            a: [-2.0 * c / a0, (1.0 - alpha) / a0],
        }
    }

    fn run(&self, x: &mut [f64]) {
        let (mut z1, mut z2) = (0.0, 0.0);
        for v in x.iter_mut() {
            let y = self.b[0] * *v + z1;
            z1 = self.b[1] * *v - self.a[0] * y + z2;
            z2 = self.b[2] * *v - self.a[1] * y;
            *v = y;
        }
    }
}

/// 4th-order Butterworth low-pass run forward and backward (zero phase).
///
/// The magnitude response is the Butterworth response squared, so the
/// effective order is 8 and the gain at `cutoff` is 1/2.
pub fn zero_phase_lowpass(x: &mut [f64], cutoff: f64, fs: f64) -> Result<()> {
    if !(cutoff > 0.0 && cutoff < 0.5 * fs) {
        return Err(Error::Config(format!(
            "low-pass cutoff {cutoff} Hz must lie in (0, {}) Hz",
            0.5 * fs
        )));
    }
    // prewarped analog cutoff maps exactly onto `cutoff`
    let w0 = 2.0 * PI * cutoff / fs;
    let sections = [0.541_196_100_146_197, 1.306_562_964_876_376_5].map(|q| Biquad::lowpass(w0, q));
    for pass in 0..2 {
        for s in &sections {
            s.run(x);
        }
        if pass == 0 {
            x.reverse();
        }
    }
    x.reverse();
    Ok(())
}

fn onset(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        0.5 * (1.0 - (PI * u).cos())
    }
}

/// Sampled, filtered volume-velocity pulse `Q(n dt)` for `n in -1..=n_last`.
///
/// The window is padded so the filter sees the whole pulse and its ring-down
/// regardless of how short the requested record is.
pub fn filtered_pulse(
    n_last: usize,
    dt: f64,
    t_gp: f64,
    cutoff: Option<f64>,
    amplitude: f64,
) -> Result<Vec<f64>> {
    if !(t_gp > 0.0 && dt > 0.0) {
        return Err(Error::Config(
            "pulse delay and time step must be positive".into(),
        ));
    }
    let support = (3.0 * t_gp / dt).ceil() as usize;
    let ring = cutoff.map_or(0, |fc| (40.0 / (fc * dt)).ceil() as usize);
    let len = (n_last + 2).max(support + ring + 2);
    let mut q: Vec<f64> = (0..len)
        .map(|i| amplitude * gaussian_pulse(i as i64 - 1, dt, t_gp))
        .collect();
    if let Some(fc) = cutoff {
        zero_phase_lowpass(&mut q, fc, 1.0 / dt)?;
        // The zero-phase filter rings ahead of the pulse; left alone, the
        // non-zero value at t = 0 acts as a step in Q and leaves a permanent
        // flow behind. A raised-cosine onset brings it to zero smoothly.
        let ramp = 0.5 * t_gp;
        for (i, v) in q.iter_mut().enumerate() {
            let t = (i as f64 - 1.0) * dt;
            if t >= ramp {
                break;
            }
            *v *= onset(t / ramp);
        }
    }
    q.truncate(n_last + 2);
    Ok(q)
}
