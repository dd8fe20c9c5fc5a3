//! Larmor precession of j- and particle wavepackets about a fixed field.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::wigner_d_matrix;
use crate::qnum::NormConvention;
use crate::wavepacket::{
    build_j_wavepacket, direction, fit_gaussian, particle_equator, q_lobe_direction_amps, rectified_stats, AmpBlock,
    Amplitudes, GaussFit, WavepacketSpec,
};

/// Samples on the circle perpendicular to the field.
pub const EQUATOR_NODES: usize = 720;

/// Below this polar offset the Q maximum has no usable azimuth about the field.
pub const MIN_LOBE_OFFSET: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrecessionConfig {
    pub spec: WavepacketSpec,
    pub omega_l: f64,
    pub t_samples: Vec<f64>,
    pub field_axis: [f64; 3],
}

impl PrecessionConfig {
    /// Field along the rectification-corrected orientation `(theta_bar, 0)`.
    pub fn new(spec: WavepacketSpec, omega_l: f64, t_samples: Vec<f64>) -> Result<Self> {
        let r = rectified_stats(spec.j_center, spec.m_center, spec.dm, NormConvention::JPlusHalf)?;
        Self::with_axis(spec, omega_l, t_samples, direction(r.theta_bar, 0.0))
    }

    pub fn with_axis(spec: WavepacketSpec, omega_l: f64, t_samples: Vec<f64>, axis: [f64; 3]) -> Result<Self> {
        if !(omega_l >= 0.0 && omega_l.is_finite()) {
            return Err(Error::Domain(format!("Larmor rate {omega_l} must be finite and non-negative")));
        }
        if t_samples.windows(2).any(|w| !(w[0] <= w[1])) || t_samples.iter().any(|t| !t.is_finite()) {
            return Err(Error::Domain("time samples must be finite and ascending".into()));
        }
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Domain("field axis must be a nonzero vector".into()));
        }
        Ok(PrecessionConfig { spec, omega_l, t_samples, field_axis: [axis[0] / n, axis[1] / n, axis[2] / n] })
    }

    /// `(theta_B, phi_B)` of the field.
    pub fn field_angles(&self) -> (f64, f64) {
        let a = self.field_axis;
        (a[2].clamp(-1.0, 1.0).acos(), a[1].atan2(a[0]))
    }
}

/// Amplitudes in the basis quantized along the field, at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPacket {
    pub t: f64,
    pub theta_b: f64,
    pub phi_b: f64,
    pub amps: Amplitudes,
}

impl FieldPacket {
    /// Back to the lab basis.
    pub fn to_lab(&self) -> Result<Amplitudes> {
        rotate(&self.amps, self.theta_b, self.phi_b, false)
    }
}

/// `to_field`: `b_{mB} = sum_m e^{i m phi_B} d_{m mB}(theta_B) c_m`; otherwise the inverse.
fn rotate(a: &Amplitudes, theta_b: f64, phi_b: f64, to_field: bool) -> Result<Amplitudes> {
    let mut blocks = Vec::with_capacity(a.blocks.len());
    for b in &a.blocks {
        let d = wigner_d_matrix(b.j, theta_b)?;
        let out = b
            .j
            .projections()
            .map(|mo| {
                let s: Complex64 = b
                    .amps
                    .iter()
                    .map(|&(mi, c)| {
                        if to_field {
                            c * Complex64::from_polar(d.get(mi, mo), mi.value() * phi_b)
                        } else {
                            c * Complex64::from_polar(d.get(mo, mi), -mo.value() * phi_b)
                        }
                    })
                    .sum();
                (mo, s)
            })
            .collect();
        blocks.push(AmpBlock { j: b.j, amps: out });
    }
    Ok(Amplitudes { blocks })
}

/// Linear Zeeman evolution; every `j` block precesses at the same rate.
pub fn evolve(config: &PrecessionConfig) -> Result<Vec<FieldPacket>> {
    let packet = build_j_wavepacket(&config.spec)?;
    let (theta_b, phi_b) = config.field_angles();
    let start = rotate(&(&packet).into(), theta_b, phi_b, true)?;
    Ok(config
        .t_samples
        .iter()
        .map(|&t| {
            let wt = config.omega_l * t;
            let blocks = start
                .blocks
                .iter()
                .map(|b| AmpBlock {
                    j: b.j,
                    amps: b.amps.iter().map(|&(m, c)| (m, c * Complex64::from_polar(1.0, -m.value() * wt))).collect(),
                })
                .collect();
            FieldPacket { t, theta_b, phi_b, amps: Amplitudes { blocks } }
        })
        .collect())
}

/// Unwrapped azimuths about the field axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotationTrace {
    pub times: Vec<f64>,
    pub j_azimuth: Vec<f64>,
    pub particle_azimuth: Vec<f64>,
    /// Gaussian width of the particle lobe along the circle perpendicular to the field.
    pub particle_width: Vec<f64>,
    pub norm: Vec<f64>,
}

impl RotationTrace {
    /// Least-squares slope of `y` against time.
    pub fn slope(&self, y: &[f64]) -> f64 {
        let n = self.times.len() as f64;
        let mt = self.times.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let sxy: f64 = self.times.iter().zip(y).map(|(t, v)| (t - mt) * (v - my)).sum();
        let sxx: f64 = self.times.iter().map(|t| (t - mt).powi(2)).sum();
        sxy / sxx
    }
}

fn unwrap(xs: &mut [f64]) {
    for i in 1..xs.len() {
        let d = xs[i] - xs[i - 1];
        xs[i] -= TAU * (d / TAU).round();
    }
}

/// Grid argmax refined by a parabola through its neighbours, periodic in the index.
fn periodic_peak(samples: &[(f64, f64)]) -> (usize, f64) {
    let n = samples.len();
    let (k, _) = samples
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, s)| if s.1 > acc.1 { (i, s.1) } else { acc });
    let (ym, y0, yp) = (samples[(k + n - 1) % n].1, samples[k].1, samples[(k + 1) % n].1);
    let den = ym - 2.0 * y0 + yp;
    let off = if den < 0.0 { 0.5 * (ym - yp) / den } else { 0.0 };
    (k, samples[k].0 + off * TAU / n as f64)
}

pub fn particle_lobe(a: &Amplitudes) -> Result<(f64, GaussFit)> {
    let eq = particle_equator(a, EQUATOR_NODES)?;
    let (hi, lo) = eq.iter().fold((f64::NEG_INFINITY, f64::INFINITY), |acc, s| (acc.0.max(s.1), acc.1.min(s.1)));
    if !(hi > 2.0 * lo) {
        return Err(Error::Tracking(format!("particle density azimuthally flat (max {hi:.3e}, min {lo:.3e})")));
    }
    let (_, peak) = periodic_peak(&eq);
    let (x, y): (Vec<f64>, Vec<f64>) = eq.iter().map(|&(p, v)| ((p - peak + PI).rem_euclid(TAU) - PI, v)).unzip();
    Ok((peak, fit_gaussian(&x, &y)?))
}

pub fn track_rotation(config: &PrecessionConfig) -> Result<RotationTrace> {
    let frames = evolve(config)?;
    let mut tr = RotationTrace {
        times: Vec::with_capacity(frames.len()),
        j_azimuth: Vec::new(),
        particle_azimuth: Vec::new(),
        particle_width: Vec::new(),
        norm: Vec::new(),
    };
    for f in &frames {
        let (qt, qp) = q_lobe_direction_amps(&f.amps);
        if qt < MIN_LOBE_OFFSET || qt > PI - MIN_LOBE_OFFSET {
            return Err(Error::Tracking(format!("Q maximum on the field axis at t = {}", f.t)));
        }
        let (pp, fit) = particle_lobe(&f.amps)?;
        tr.times.push(f.t);
        tr.j_azimuth.push(qp);
        tr.particle_azimuth.push(pp);
        tr.particle_width.push(fit.sigma);
        tr.norm.push(f.amps.norm_sqr().sqrt());
    }
    unwrap(&mut tr.j_azimuth);
    unwrap(&mut tr.particle_azimuth);
    Ok(tr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qnum::HalfInt;
    use crate::wavepacket::JWavepacket;
    use approx::assert_abs_diff_eq;

    fn small_config(times: Vec<f64>) -> PrecessionConfig {
        let spec = WavepacketSpec::new(HalfInt::int(12), HalfInt::int(5), 2.0, 2.0).unwrap();
        PrecessionConfig::new(spec, 1.0, times).unwrap()
    }

    #[test]
    fn identity_and_period() {
        let c = small_config(vec![0.0, TAU]);
        let frames = evolve(&c).unwrap();
        let lab = frames[0].to_lab().unwrap();
        let start = Amplitudes::from(&build_j_wavepacket(&c.spec).unwrap());
        assert!(lab.max_abs_diff(&start) < 1e-12);
        assert!(frames[1].amps.max_abs_diff(&frames[0].amps) < 1e-10);
    }

    #[test]
    fn rejects_bad_config() {
        let spec = WavepacketSpec::new(HalfInt::int(3), HalfInt::int(1), 1.0, 1.0).unwrap();
        assert!(PrecessionConfig::new(spec, -1.0, vec![0.0]).is_err());
        assert!(PrecessionConfig::new(spec, 1.0, vec![1.0, 0.0]).is_err());
        assert!(PrecessionConfig::with_axis(spec, 1.0, vec![0.0], [0.0; 3]).is_err());
    }

    #[test]
    fn peak_interpolation() {
        let s: Vec<(f64, f64)> = (0..360)
            .map(|k| {
                let p = TAU * k as f64 / 360.0;
                (p, (-((p - 1.2345f64).powi(2)) * 50.0).exp())
            })
            .collect();
        assert_abs_diff_eq!(periodic_peak(&s).1, 1.2345, epsilon = 1e-3);
    }

    #[test]
    fn flat_density_is_rejected() {
        let a = Amplitudes::from(&JWavepacket::single(HalfInt::int(4), HalfInt::int(2)).unwrap());
        assert!(matches!(particle_lobe(&a), Err(Error::Tracking(_))));
    }
}
