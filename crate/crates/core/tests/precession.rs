use std::f64::consts::{FRAC_PI_2, PI, TAU};

use vmw::precession::*;
use vmw::wavepacket::*;
use vmw::HalfInt;

fn spec(j: i64, m: i64, dj: f64, dm: f64) -> WavepacketSpec {
    WavepacketSpec::new(HalfInt::int(j), HalfInt::int(m), dj, dm).unwrap()
}

/// Rotate `r` by `angle` about unit `n`.
fn rodrigues(r: [f64; 3], n: [f64; 3], angle: f64) -> [f64; 3] {
    let (s, c) = angle.sin_cos();
    let d = n[0] * r[0] + n[1] * r[1] + n[2] * r[2];
    let x = [n[1] * r[2] - n[2] * r[1], n[2] * r[0] - n[0] * r[2], n[0] * r[1] - n[1] * r[0]];
    std::array::from_fn(|i| r[i] * c + x[i] * s + n[i] * d * (1.0 - c))
}

fn angles(r: [f64; 3]) -> (f64, f64) {
    (r[2].clamp(-1.0, 1.0).acos(), r[1].atan2(r[0]))
}

#[test]
fn norm_is_conserved() {
    let times: Vec<f64> = (0..40).map(|k| 0.37 * k as f64).collect();
    let c = PrecessionConfig::new(spec(20, 7, 2.0, 2.5), 1.3, times).unwrap();
    let n0 = Amplitudes::from(&build_j_wavepacket(&c.spec).unwrap()).norm_sqr();
    for f in evolve(&c).unwrap() {
        assert!((f.amps.norm_sqr() / n0 - 1.0).abs() < 1e-12);
        assert!((f.to_lab().unwrap().norm_sqr() / n0 - 1.0).abs() < 1e-12);
    }
}

#[test]
fn density_revives_after_one_period() {
    let omega = 0.7;
    let c = PrecessionConfig::new(spec(15, 4, 2.0, 2.0), omega, vec![0.0, TAU / omega]).unwrap();
    let frames = evolve(&c).unwrap();
    let (a, b) = (frames[0].to_lab().unwrap(), frames[1].to_lab().unwrap());
    let grid = SphereGrid::new(41, 80).unwrap();
    let (da, db) = (particle_density_amps(&a, &grid).unwrap(), particle_density_amps(&b, &grid).unwrap());
    for i in 0..grid.theta().len() {
        for k in 0..grid.phi().len() {
            assert!((da.value(i, k) - db.value(i, k)).abs() < 1e-8);
        }
    }
}

#[test]
fn half_integer_blocks_return_with_a_sign() {
    let s = WavepacketSpec::new(HalfInt::from_twice(21), HalfInt::from_twice(7), 0.1, 2.0).unwrap();
    let c = PrecessionConfig::new(s, 1.0, vec![0.0, TAU]).unwrap();
    let f = evolve(&c).unwrap();
    let mut flipped = f[1].amps.clone();
    for b in &mut flipped.blocks {
        for (_, a) in &mut b.amps {
            *a = -*a;
        }
    }
    assert!(flipped.max_abs_diff(&f[0].amps) < 1e-12);
}

#[test]
fn quarter_period_is_a_rigid_rotation() {
    let c = PrecessionConfig::new(spec(12, 5, 2.0, 2.0), 1.0, vec![0.0, FRAC_PI_2]).unwrap();
    let n = c.field_axis;
    let frames = evolve(&c).unwrap();
    let (a, b) = (frames[0].to_lab().unwrap(), frames[1].to_lab().unwrap());
    for k in 0..60 {
        let (t, f) = (PI * (k as f64 + 0.5) / 60.0, 0.61 * k as f64);
        let (t0, f0) = angles(rodrigues(direction(t, f), n, -FRAC_PI_2));
        let now = particle_value(&b, t, f).unwrap();
        let before = particle_value(&a, t0, f0).unwrap();
        assert!((now - before).abs() < 1e-10, "({t}, {f}): {now} vs {before}");
    }
}

#[test]
fn particle_lobe_does_not_spread() {
    let times: Vec<f64> = (0..=6).map(|k| TAU * k as f64 / 6.0).collect();
    let tr = track_rotation(&PrecessionConfig::new(spec(30, 15, 4.0, 4.0), 2.0, times).unwrap()).unwrap();
    let w0 = tr.particle_width[0];
    for w in &tr.particle_width {
        assert!(((w - w0) / w0).abs() < 0.02, "{w} vs {w0}");
    }
    assert!((tr.slope(&tr.j_azimuth) - 2.0).abs() < 0.1);
    assert!((tr.slope(&tr.particle_azimuth) - 2.0).abs() < 0.1);
}

#[test]
fn config_is_validated() {
    let s = spec(4, 1, 1.0, 1.0);
    assert!(PrecessionConfig::new(s, -0.1, vec![0.0]).is_err());
    assert!(PrecessionConfig::new(s, f64::INFINITY, vec![0.0]).is_err());
    assert!(PrecessionConfig::new(s, 1.0, vec![1.0, 0.5]).is_err());
    assert!(PrecessionConfig::new(s, 1.0, vec![0.0, f64::NAN]).is_err());
    assert!(PrecessionConfig::with_axis(s, 1.0, vec![0.0], [0.0; 3]).is_err());
    let c = PrecessionConfig::with_axis(s, 0.0, vec![0.0, 5.0], [0.0, 0.0, 2.0]).unwrap();
    assert_eq!(c.field_axis, [0.0, 0.0, 1.0]);
    let f = evolve(&c).unwrap();
    assert!(f[1].amps.max_abs_diff(&f[0].amps) == 0.0);
}
