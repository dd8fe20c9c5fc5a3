use std::f64::consts::{FRAC_PI_4, PI};

use proptest::prelude::*;

use vmw::exact::{cg_exact, wigner_d_exact, CGKey};
use vmw::semiclassical_cg::{cg_allowed, cg_wkb, classify_region, coupling_geometry, RegionTag};
use vmw::semiclassical_wigd::{r_classifier, wigd_asymptotic, wigd_phase, wigd_symmetry, wigd_wkb, WigdQuery};
use vmw::special::{airy, std_normal_cdf};
use vmw::{lambda_perp, theta_m, HalfInt, NormConvention};

fn h(twice: i64) -> HalfInt {
    HalfInt::from_twice(twice)
}

proptest! {
    #[test]
    fn theta_m_reflects(tj in 1i64..400, k in 0i64..400) {
        let j = h(tj);
        let m = j - HalfInt::int(k % (tj + 1));
        for conv in [NormConvention::JPlusHalf, NormConvention::SqrtJJPlus1] {
            let a = theta_m(j, m, conv).unwrap();
            let b = theta_m(j, -m, conv).unwrap();
            prop_assert!((a + b - PI).abs() < 1e-12);
        }
    }

    #[test]
    fn perpendicular_projection_completes_length(tj in 0i64..400, k in 0i64..400) {
        let j = h(tj);
        let m = j - HalfInt::int(k % (tj + 1));
        for conv in [NormConvention::JPlusHalf, NormConvention::SqrtJJPlus1] {
            let l = conv.length(j);
            let p = lambda_perp(j, m, conv);
            prop_assert!((p * p + m.value().powi(2) - l * l).abs() <= 1e-12 * (l * l).max(1.0));
        }
    }

    #[test]
    fn halfint_round_trip(a in -10_000i64..10_000, b in -10_000i64..10_000) {
        let (x, y) = (h(a), h(b));
        prop_assert_eq!((x + y) - y, x);
        prop_assert_eq!(-(-x), x);
        prop_assert_eq!(x.to_string().parse::<HalfInt>().unwrap(), x);
    }

    #[test]
    fn airy_wronskian(x in -200.0..100.0f64) {
        let a = airy(x).unwrap();
        let w = a.ai * a.bip - a.aip * a.bi;
        // Bi grows like exp(2/3 x^1.5); the bound scales with the product size
        let scale = (a.ai * a.bip).abs().max((a.aip * a.bi).abs()).max(1.0);
        prop_assert!((w - 1.0 / PI).abs() <= 1e-9 * scale);
    }

    #[test]
    fn airy_solves_its_equation(x in -5.5..5.0f64) {
        let step = 1e-3;
        let f = |t: f64| airy(t).unwrap().ai;
        let d2 = (f(x + step) - 2.0 * f(x) + f(x - step)) / (step * step);
        prop_assert!((d2 - x * f(x)).abs() < 1e-6);
    }

    #[test]
    fn airy_difference_error_is_pure_truncation(x in -10.0..5.0f64) {
        let step = 1e-3;
        let a = airy(x).unwrap();
        let f = |t: f64| airy(t).unwrap().ai;
        let d2 = (f(x + step) - 2.0 * f(x) + f(x - step)) / (step * step);
        // leading error of the three-point stencil, h^2/12 y'''' with y'''' = x^2 y + 2 y'
        let trunc = step * step / 12.0 * (x * x * a.ai + 2.0 * a.aip);
        prop_assert!((d2 - x * a.ai - trunc).abs() < 2e-8);
    }

    #[test]
    fn normal_cdf_symmetric(x in -40.0..40.0f64) {
        prop_assert!((std_normal_cdf(x) + std_normal_cdf(-x) - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn cg_exchange_phase(a in 2i64..=16, b in 2i64..=16, k in 0i64..16, i1 in 0i64..=16, i2 in 0i64..=16) {
        let (j1, j2) = (h(a), h(b));
        let j3 = h((a - b).abs() + 2 * (k % ((a + b - (a - b).abs()) / 2 + 1)));
        let m1 = j1 - HalfInt::int(i1 % (a + 1));
        let m2 = j2 - HalfInt::int(i2 % (b + 1));
        let m3 = m1 + m2;
        prop_assume!(m3.abs() <= j3);
        let x = cg_wkb(j1, m1, j2, m2, j3, m3).unwrap();
        let y = cg_wkb(j2, m2, j1, m1, j3, m3).unwrap();
        let phase = (j1 + j2 - j3).phase().unwrap();
        prop_assert!((y - phase * x).abs() < 1e-6, "{} vs {}", y, phase * x);
    }
}

#[test]
fn wkb_tracks_allowed_form_inside() {
    let (j1, m1, j2, m2) = (HalfInt::int(40), HalfInt::int(10), HalfInt::int(30), HalfInt::int(-15));
    let m3 = m1 + m2;
    let inside: Vec<i64> = (10..=70)
        .filter(|&j3| {
            let g = coupling_geometry(j1, m1, j2, m2, HalfInt::int(j3), m3).unwrap();
            classify_region(&g) == RegionTag::Allowed && g.beta.im == 0.0
        })
        .collect();
    let (lo, hi) = (inside[0], *inside.last().unwrap());
    let mut n = 0;
    for j3 in lo + 5..=hi - 5 {
        let j3 = HalfInt::int(j3);
        let g = coupling_geometry(j1, m1, j2, m2, j3, m3).unwrap();
        let w = cg_wkb(j1, m1, j2, m2, j3, m3).unwrap();
        assert!((w - cg_allowed(&g, j3).unwrap()).abs() <= 0.02, "j3 = {j3}");
        n += 1;
    }
    assert!(n > 20);
}

#[test]
fn wkb_signs_on_large_sweep() {
    let (j1, m1, j2, m2) = (HalfInt::int(40), HalfInt::int(10), HalfInt::int(30), HalfInt::int(-15));
    for j3 in 10..=70 {
        let j3 = HalfInt::int(j3);
        let e = cg_exact(&CGKey::coupled(j1, m1, j2, m2, j3)).unwrap();
        if e.abs() > 0.01 {
            assert_eq!(cg_wkb(j1, m1, j2, m2, j3, m1 + m2).unwrap().signum(), e.signum(), "j3 = {j3}");
        }
    }
}

#[test]
fn approximate_rows_stay_normalized() {
    for tj in 10..=40 {
        let j = h(tj);
        for m in j.projections() {
            let s: f64 = j
                .projections()
                .map(|mp| wigd_wkb(&WigdQuery::new(j, mp, m, PI / 3.0).unwrap()).unwrap().powi(2))
                .sum();
            assert!((0.9..=1.1).contains(&s), "j = {j}, m = {m}: {s}");
        }
    }
}

/// Airy argument of the uniform form, or `None` on the wedge edges handled separately.
fn airy_argument(q: &WigdQuery) -> Option<f64> {
    let (c, _) = wigd_symmetry(q);
    if c.mp.abs() == c.m || c.m.twice() == 0 {
        return None;
    }
    let p = wigd_phase(&c).ok()?;
    if r_classifier(&c) > 0.0 {
        let big = c.j.value() + 0.5;
        let to_upper = big * PI - (p.re + FRAC_PI_4);
        let to_lower = p.re + FRAC_PI_4 - c.m.value() * PI;
        Some(-(1.5 * to_upper.min(to_lower).abs()).powf(2.0 / 3.0))
    } else {
        Some((1.5 * p.im.abs()).powf(2.0 / 3.0))
    }
}

/// `|Z|` beyond which the two forms differ by less than the Airy asymptotic correction allows.
const FAR_FROM_TURNING: f64 = 2.75;

#[test]
fn asymptotic_meets_uniform_far_from_turning_points() {
    let mut n = 0;
    for tj in 2..=20 {
        let j = h(tj);
        for mp in j.projections() {
            for m in j.projections() {
                for k in 1..=19 {
                    let q = WigdQuery::new(j, mp, m, PI * k as f64 / 20.0).unwrap();
                    if airy_argument(&q).is_some_and(|z| z.abs() > FAR_FROM_TURNING) {
                        let a = wigd_asymptotic(&q).unwrap();
                        let u = wigd_wkb(&q).unwrap();
                        assert!((a - u).abs() <= 0.01, "{q:?}: {a} vs {u}");
                        n += 1;
                    }
                }
            }
        }
    }
    assert!(n > 1000);
}

#[test]
fn uniform_form_near_exact_at_moderate_j() {
    let j = HalfInt::int(30);
    for (mp, m) in [(3, 12), (-7, 20), (0, 5)] {
        for k in 1..=19 {
            let q = WigdQuery::new(j, HalfInt::int(mp), HalfInt::int(m), PI * k as f64 / 20.0).unwrap();
            let e = wigner_d_exact(q.j, q.mp, q.m, q.theta).unwrap();
            assert!((wigd_wkb(&q).unwrap() - e).abs() < 0.02);
        }
    }
}
