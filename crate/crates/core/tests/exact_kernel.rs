use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use proptest::prelude::*;

use vmw::exact::*;
use vmw::{EulerAngles, HalfInt};

fn h(twice: i64) -> HalfInt {
    HalfInt::from_twice(twice)
}

fn cg(j1: i64, m1: i64, j2: i64, m2: i64, j3: i64) -> f64 {
    cg_exact(&CGKey::coupled(h(j1), h(m1), h(j2), h(m2), h(j3))).unwrap()
}

// reference values from an independent arbitrary-precision evaluation
#[test]
fn frozen_cg_values() {
    assert_abs_diff_eq!(cg(80, 20, 60, -30, 74), 0.15829901997539366, epsilon = 1e-14);
    assert_abs_diff_eq!(cg(80, 20, 60, -30, 130), 0.22091364016161021, epsilon = 1e-14);
    assert_abs_diff_eq!(cg(80, 20, 60, -30, 24), -0.060012515097758216, epsilon = 1e-14);
    assert_abs_diff_eq!(cg(80, 20, 60, -30, 138), 0.011749409686100922, epsilon = 1e-14);
    assert_abs_diff_eq!(cg(9, 3, 7, 1, 8), 0.32892523191723707, epsilon = 1e-14);
}

#[test]
fn frozen_d_values() {
    let d = |j, mp, m, t| wigner_d_exact(h(j), h(mp), h(m), t).unwrap();
    assert_abs_diff_eq!(d(80, 20, -10, 1.1), 0.12553332634462046, epsilon = 1e-13);
    assert_abs_diff_eq!(d(160, 80, 74, 0.9), -0.064175186290575244, epsilon = 1e-13);
    assert_abs_diff_eq!(d(61, -7, 25, 2.3), 0.11973570558056757, epsilon = 1e-13);
}

#[test]
fn log_mode_matches_exact() {
    for j3 in [24, 74, 130, 138] {
        let k = CGKey::coupled(h(80), h(20), h(60), h(-30), h(j3));
        let a = cg_exact_mode(&k, CgMode::Exact).unwrap();
        let b = cg_exact_mode(&k, CgMode::Log).unwrap();
        // alternating-sum cancellation costs the log path a few digits
        assert_abs_diff_eq!(a, b, epsilon = 1e-8);
    }
}

#[test]
fn selection_rules_give_zero() {
    assert_eq!(cg(2, 2, 2, 2, 0), 0.0);
    assert_eq!(cg(2, 0, 2, 0, 2), 0.0);
}

#[test]
fn spin_half_pair_states() {
    let v = coupled_state_product_basis(h(1), h(1), h(0), h(0)).unwrap();
    let up_down = product_index(h(1), h(1), h(1), h(-1));
    let down_up = product_index(h(1), h(-1), h(1), h(1));
    assert_abs_diff_eq!(v[up_down].re, 0.5f64.sqrt(), epsilon = 1e-15);
    assert_abs_diff_eq!(v[down_up].re, -(0.5f64.sqrt()), epsilon = 1e-15);
    let s = coupled_state_product_basis(h(1), h(1), h(2), h(2)).unwrap();
    assert_eq!(s[product_index(h(1), h(1), h(1), h(1))], Complex64::new(1.0, 0.0));
    for (j3, m3, want) in [(2, 0, 0.25), (0, 0, -0.25), (2, 2, 0.0)] {
        assert_abs_diff_eq!(pairwise_xx_expectation(h(1), h(1), h(j3), h(m3)).unwrap(), want, epsilon = 1e-14);
    }
}

#[test]
fn spin_half_rotation() {
    let a = EulerAngles::new(PI, 0.0, 0.0).unwrap();
    let v = wigner_D(h(1), h(1), h(1), &a).unwrap();
    assert_abs_diff_eq!(v.re, 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(v.im, -1.0, epsilon = 1e-15);
}

fn key_strategy(max_twice: i64) -> impl Strategy<Value = CGKey> {
    (0..=max_twice, 0..=max_twice)
        .prop_flat_map(move |(a, b)| {
            let lo = (a - b).abs();
            let n = (a + b - lo) / 2;
            (Just(a), Just(b), 0..=n, 0..=a, 0..=b)
        })
        .prop_map(|(a, b, k, i1, i2)| {
            let j3 = (a - b).abs() + 2 * k;
            let m1 = a - 2 * i1;
            let m2 = b - 2 * i2;
            CGKey::new(h(a), h(m1), h(b), h(m2), h(j3), h(m1 + m2))
        })
}

proptest! {
    #[test]
    fn orthonormal_columns(a in 0i64..=12, b in 0i64..=12, k in 0i64..=12, s in 0i64..=24) {
        let (j1, j2) = (h(a), h(b));
        let j3 = h((a - b).abs() + 2 * (k % ((a + b - (a - b).abs()) / 2 + 1)));
        let m3 = j3 - HalfInt::int(s % (j3.twice() + 1));
        let total: f64 = j1
            .projections()
            .filter(|&m1| (m3 - m1).abs() <= j2)
            .map(|m1| cg_exact(&CGKey::coupled(j1, m1, j2, m3 - m1, j3)).unwrap().powi(2))
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetry_factors_consistent(key in key_strategy(16)) {
        let v = cg_exact(&key).unwrap();
        for rel in [CgSymmetry::SwapToJ2, CgSymmetry::SwapToJ1] {
            let (t, f) = cg_symmetry(&key, rel);
            prop_assert!((v - f * cg_exact(&t).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn d_matrix_orthogonal(tj in 0i64..=12, k in 0usize..25) {
        let j = h(tj);
        let d = wigner_d_matrix(j, PI * k as f64 / 24.0).unwrap();
        let n = d.dim();
        for a in 0..n {
            for b in 0..n {
                let s: f64 = (0..n).map(|r| d.at(r, a) * d.at(r, b)).sum();
                let delta = if a == b { 1.0 } else { 0.0 };
                prop_assert!((s - delta).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn d_symmetry_relations(tj in 0i64..=16, i in 0i64..=16, l in 0i64..=16, t in 0.0..PI) {
        let j = h(tj);
        let mp = j - HalfInt::int(i % (tj + 1));
        let m = j - HalfInt::int(l % (tj + 1));
        let d = |a, b, x| wigner_d_exact(j, a, b, x).unwrap();
        let ph = |x: HalfInt| x.phase().unwrap();
        let d0 = d(mp, m, t);
        prop_assert!((d0 - ph(mp - m) * d(-mp, -m, t)).abs() < 1e-12);
        prop_assert!((d0 - ph(mp - m) * d(m, mp, t)).abs() < 1e-12);
        prop_assert!((d0 - ph(mp - m) * d(mp, m, -t)).abs() < 1e-12);
        prop_assert!((d0 - ph(j - m) * d(-mp, m, PI - t)).abs() < 1e-12);
        prop_assert!((d0 - ph(j + mp) * d(mp, -m, PI - t)).abs() < 1e-12);
    }

    #[test]
    fn large_j_composes(tj in 33i64..=60, a in 0.0..1.5f64, b in 0.0..1.5f64) {
        let j = h(tj);
        let (da, db, dab) = (wigner_d_matrix(j, a).unwrap(), wigner_d_matrix(j, b).unwrap(), wigner_d_matrix(j, a + b).unwrap());
        let n = da.dim();
        for r in 0..n {
            for c in 0..n {
                let s: f64 = (0..n).map(|k| da.at(r, k) * db.at(k, c)).sum();
                prop_assert!((s - dab.at(r, c)).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn coupled_states_normalized(key in key_strategy(8)) {
        prop_assume!(key.m3.abs() <= key.j3);
        let v = coupled_state_product_basis(key.j1, key.j2, key.j3, key.m3).unwrap();
        let n: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((n - 1.0).abs() < 1e-12);
    }
}
