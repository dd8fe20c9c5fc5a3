//! Acceptance criteria as runnable checks, shared by `vmw verify` and the acceptance test target.

use std::f64::consts::{PI, TAU};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use vmw::correlations::{g_factor, mstate_correlation_closed, mstate_correlation_vm, CorrelationInput};
use vmw::exact::{cg_exact, pairwise_expectation, pairwise_xx_expectation, wigner_d_exact, wigner_d_matrix, Axis, CGKey};
use vmw::precession::{track_rotation, PrecessionConfig};
use vmw::semiclassical_cg::{beta_area, cg_allowed, cg_sq_avg, cg_wkb, coupling_geometry, AvgVariant};
use vmw::semiclassical_wigd::{r_classifier, wigd_from_cg_limit, wigd_wkb, WigdQuery};
use vmw::special::{airy, std_normal_cdf};
use vmw::wavepacket::{
    build_j_wavepacket, particle_density, q_polar_peak, rectified_stats, uncertainty_report, vmw_operator_check,
    SphereGrid, WavepacketSpec,
};
use vmw::{lambda_perp, HalfInt, NormConvention};

/// One verified property with its measured figures.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

type Outcome = (bool, String);

fn single(name: &str, (pass, detail): Outcome) -> Vec<Check> {
    vec![Check { name: name.to_string(), pass, detail }]
}

pub struct Criterion {
    pub id: &'static str,
    pub alias: &'static str,
    pub title: &'static str,
    pub run: fn() -> Vec<Check>,
}

pub const CRITERIA: [Criterion; 12] = [
    Criterion { id: "A1", alias: "exact-kernel", title: "exact kernel integrity", run: || single("A1", a1()) },
    Criterion { id: "A2", alias: "wigner-average", title: "windowed C-G average", run: || single("A2", a2()) },
    Criterion { id: "A3", alias: "semiclassical-cg", title: "semiclassical C-G", run: || single("A3", a3()) },
    Criterion { id: "A4", alias: "wigner-d", title: "Wigner-d asymptotics", run: || single("A4", a4()) },
    Criterion { id: "A5", alias: "limit", title: "C-G to Wigner-d limit", run: || single("A5", a5()) },
    Criterion { id: "A6", alias: "uncertainty", title: "uncertainty relations", run: || single("A6", a6()) },
    Criterion { id: "A7", alias: "rectification", title: "rectification", run: || single("A7", a7()) },
    Criterion { id: "A8", alias: "appendix-a", title: "VMW operator relations", run: a8 },
    Criterion { id: "A9", alias: "correlations", title: "m-state correlations", run: || single("A9", a9()) },
    Criterion { id: "A10", alias: "g-factor", title: "g-factor", run: || single("A10", a10()) },
    Criterion { id: "A11", alias: "precession", title: "precession coupling", run: || single("A11", a11()) },
    Criterion { id: "A12", alias: "special", title: "special functions", run: || single("A12", a12()) },
];

/// Criteria named by `suite`: an id such as `A8`, its alias such as `appendix-a`, or `all`.
pub fn lookup(suite: &str) -> Option<Vec<&'static Criterion>> {
    if suite.eq_ignore_ascii_case("all") {
        return Some(CRITERIA.iter().collect());
    }
    CRITERIA
        .iter()
        .find(|c| c.id.eq_ignore_ascii_case(suite) || c.alias == suite)
        .map(|c| vec![c])
}

pub fn suite_names() -> Vec<String> {
    let mut v: Vec<String> = CRITERIA.iter().map(|c| format!("{} ({})", c.alias, c.id)).collect();
    v.push("all".into());
    v
}


fn h(twice: i64) -> HalfInt {
    HalfInt::from_twice(twice)
}

fn hi(x: i64) -> HalfInt {
    HalfInt::int(x)
}

/// All `j <= max` in half-integer steps.
fn js(max_twice: i64) -> impl Iterator<Item = HalfInt> {
    (0..=max_twice).map(h)
}

fn a1() -> Outcome {
    let mut orth: f64 = 0.0;
    for j1 in js(12) {
        for j2 in js(12) {
            let mut j3 = (j1 - j2).abs();
            while j3 <= j1 + j2 {
                for m3 in j3.projections() {
                    let s: f64 = j1
                        .projections()
                        .filter(|&m1| (m3 - m1).abs() <= j2)
                        .map(|m1| cg_exact(&CGKey::coupled(j1, m1, j2, m3 - m1, j3)).unwrap().powi(2))
                        .sum();
                    orth = orth.max((s - 1.0).abs());
                }
                j3 = j3 + HalfInt::ONE;
            }
        }
    }
    let thetas: Vec<f64> = (0..25).map(|k| PI * k as f64 / 24.0).collect();
    let mut unit: f64 = 0.0;
    let mut sym: f64 = 0.0;
    for j in js(12) {
        let n = (j.twice() + 1) as usize;
        for &t in &thetas {
            let d = wigner_d_matrix(j, t).unwrap();
            for a in 0..n {
                for b in 0..n {
                    let s: f64 = (0..n).map(|k| d.at(k, a) * d.at(k, b)).sum();
                    unit = unit.max((s - if a == b { 1.0 } else { 0.0 }).abs());
                }
            }
            for mp in j.projections() {
                for m in j.projections() {
                    let ph = |x: HalfInt| x.phase().unwrap();
                    let d0 = wigner_d_exact(j, mp, m, t).unwrap();
                    let rel = [
                        ph(mp - m) * wigner_d_exact(j, -mp, -m, t).unwrap(),
                        ph(mp - m) * wigner_d_exact(j, m, mp, t).unwrap(),
                        ph(mp - m) * wigner_d_exact(j, mp, m, -t).unwrap(),
                        ph(j - m) * wigner_d_exact(j, -mp, m, PI - t).unwrap(),
                        ph(j + mp) * wigner_d_exact(j, mp, -m, PI - t).unwrap(),
                    ];
                    for r in rel {
                        sym = sym.max((d0 - r).abs());
                    }
                }
            }
        }
    }
    let tol = 1e-12;
    (orth < tol && unit < tol && sym < tol, format!("orthonormality {orth:.1e}, unitarity {unit:.1e}, symmetries {sym:.1e} (tol {tol:.0e})"))
}

/// `j3` values where the perpendicular-projection triangle exists, with their distance to the region edge.
fn allowed_depths(j1: HalfInt, m1: HalfInt, j2: HalfInt, m2: HalfInt) -> Vec<(HalfInt, i64)> {
    let c = NormConvention::JPlusHalf;
    let m3 = m1 + m2;
    let lo = (j1 - j2).abs().max(m3.abs());
    let mut inside = Vec::new();
    let mut j3 = lo;
    while j3 <= j1 + j2 {
        let b = beta_area(lambda_perp(j1, m1, c), lambda_perp(j2, m2, c), lambda_perp(j3, m3, c));
        if b.im == 0.0 && b.re > 0.0 {
            inside.push(j3);
        }
        j3 = j3 + HalfInt::ONE;
    }
    let (first, last) = match (inside.first(), inside.last()) {
        (Some(&f), Some(&l)) => (f, l),
        _ => return Vec::new(),
    };
    inside
        .into_iter()
        .map(|j3| {
            let d = ((j3 - first).twice() / 2).min((last - j3).twice() / 2);
            (j3, d)
        })
        .collect()
}

fn a2() -> Outcome {
    let (j1, m1, j2, m2) = (hi(40), hi(10), hi(30), hi(-15));
    let m3 = m1 + m2;
    let c2 = |j3: HalfInt| cg_exact(&CGKey::coupled(j1, m1, j2, m2, j3)).unwrap().powi(2);
    let mut worst: f64 = 0.0;
    let mut worst_at = 0.0;
    let mut variant_gap: f64 = 0.0;
    let mut n = 0;
    for (j3, depth) in allowed_depths(j1, m1, j2, m2) {
        if depth < 3 || j3.abs() < m3.abs() {
            continue;
        }
        let mean = (-2..=2).map(|k| c2(j3 + hi(k))).sum::<f64>() / 5.0;
        let avg = cg_sq_avg(j1, m1, j2, m2, j3, AvgVariant::JPlusOne).unwrap();
        let alt = cg_sq_avg(j1, m1, j2, m2, j3, AvgVariant::TwoJPlusOne).unwrap();
        variant_gap = variant_gap.max(((avg - alt) / avg).abs());
        let rel = ((mean - avg) / avg).abs();
        if rel > worst {
            worst = rel;
            worst_at = j3.value();
        }
        n += 1;
    }
    (
        n > 0 && worst <= 0.10,
        format!("{n} j3 values, worst windowed-mean rel. error {worst:.3} at j3 = {worst_at} (tol 0.10); (2j3+1) vs 2(j3+1) prefactor differ by <= {variant_gap:.3}"),
    )
}

fn cg_sweep(j1: HalfInt, m1: HalfInt, j2: HalfInt, m2: HalfInt) -> (usize, f64, f64, usize) {
    let m3 = m1 + m2;
    let depth: std::collections::HashMap<i64, i64> =
        allowed_depths(j1, m1, j2, m2).into_iter().map(|(j, d)| (j.twice(), d)).collect();
    let (mut sign_bad, mut wkb_err, mut allowed_err, mut n) = (0, 0.0f64, 0.0f64, 0);
    let mut j3 = (j1 - j2).abs().max(m3.abs());
    while j3 <= j1 + j2 {
        let exact = cg_exact(&CGKey::coupled(j1, m1, j2, m2, j3)).unwrap();
        let w = cg_wkb(j1, m1, j2, m2, j3, m3).unwrap();
        if exact.abs() > 0.01 && w.signum() != exact.signum() {
            sign_bad += 1;
        }
        wkb_err = wkb_err.max((w - exact).abs());
        if depth.get(&j3.twice()).is_some_and(|&d| d >= 5) {
            let g = coupling_geometry(j1, m1, j2, m2, j3, m3).unwrap();
            allowed_err = allowed_err.max((cg_allowed(&g, j3).unwrap() - exact).abs());
        }
        n += 1;
        j3 = j3 + HalfInt::ONE;
    }
    (sign_bad, wkb_err, allowed_err, n)
}

fn a3() -> Outcome {
    let cases = [
        (hi(40), hi(10), hi(30), hi(-15)),
        (hi(5), hi(2), hi(4), hi(-1)),
        (hi(4), hi(1), hi(3), hi(0)),
        (h(9), h(3), h(7), h(-1)),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (j1, m1, j2, m2) in cases {
        let (bad, we, ae, n) = cg_sweep(j1, m1, j2, m2);
        ok &= bad == 0 && we <= 0.05 && ae <= 0.05;
        parts.push(format!("({j1},{m1},{j2},{m2}) n={n} sign-miss={bad} wkb={we:.4} allowed={ae:.4}"));
    }
    (ok, format!("{} (tol 0.05)", parts.join("; ")))
}

fn a4() -> Outcome {
    let (mut worst, mut deep_worst, mut deep_bad, mut n) = (0.0f64, 0.0f64, 0, 0);
    for j in js(20).skip(1) {
        for mp in j.projections() {
            for m in j.projections() {
                for k in 1..=19 {
                    let q = WigdQuery::new(j, mp, m, PI * k as f64 / 20.0).unwrap();
                    let e = (wigd_wkb(&q).unwrap() - wigner_d_exact(j, mp, m, q.theta).unwrap()).abs();
                    worst = worst.max(e);
                    if r_classifier(&q) > j.value() + 0.5 {
                        deep_worst = deep_worst.max(e);
                        if e > 0.01 {
                            deep_bad += 1;
                        }
                    }
                    n += 1;
                }
            }
        }
    }
    (
        worst <= 0.05 && deep_worst <= 0.01,
        format!("{n} points, max error {worst:.4} (tol 0.05); deep allowed max {deep_worst:.4} with {deep_bad} points above 0.01"),
    )
}

fn a5() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let j2s = [50, 100, 200, 400];
    let mut failures = 0;
    let mut ratios = Vec::new();
    for _ in 0..20 {
        let j1 = h(rng.gen_range(1..=8));
        let pick = |r: &mut StdRng| j1 - hi(r.gen_range(0..=j1.twice()));
        let mp = pick(&mut rng);
        let m = pick(&mut rng);
        let theta = rng.gen_range(0.3..2.8);
        let errs: Vec<f64> = j2s
            .iter()
            .map(|&j2| {
                let (v, te) = wigd_from_cg_limit(j1, mp, m, theta, hi(j2)).unwrap();
                (v - wigner_d_exact(j1, mp, m, te).unwrap()).abs()
            })
            .collect();
        if !errs.windows(2).all(|w| w[1] < w[0]) {
            failures += 1;
        }
        ratios.push(errs[0] / errs[3]);
    }
    let min_ratio = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    (failures == 0, format!("20 tuples, {failures} non-decreasing; error shrinks by >= {min_ratio:.2}x from j2 = 50 to 400"))
}

fn a6() -> Outcome {
    let grid = SphereGrid::default();
    let spec = WavepacketSpec::new(hi(80), hi(40), 5.0, 5.0).unwrap();
    let packet = build_j_wavepacket(&spec).unwrap();
    let r = uncertainty_report(&spec, &packet, &particle_density(&packet, &grid).unwrap()).unwrap();
    let p = r.products;
    let within = |x: f64| (x - 0.5).abs() <= 0.05;
    let mut ok = within(p.dm_dphi) && within(p.dj_dchi) && within(p.jsin_dtheta_dphi);
    let mut ratios = Vec::new();
    for dm in [1.0, 2.0, 3.0, 5.0] {
        let s = WavepacketSpec::new(hi(80), hi(40), 5.0, dm).unwrap();
        let pk = build_j_wavepacket(&s).unwrap();
        let rr = uncertainty_report(&s, &pk, &particle_density(&pk, &grid).unwrap()).unwrap();
        let x = rr.products.jsin_dtheta_over_dm;
        ok &= (0.9..=1.1).contains(&x);
        ratios.push(format!("{x:.3}"));
    }
    (
        ok,
        format!(
            "dm*dphi {:.4}, dj*dchi {:.4}, Jsin*dtheta*dphi {:.4} (0.5 +/- 10%); Jsin*dtheta/dm for dm=1,2,3,5: {} ([0.9, 1.1])",
            p.dm_dphi,
            p.dj_dchi,
            p.jsin_dtheta_dphi,
            ratios.join(", ")
        ),
    )
}

/// Mean and spread of `clip(Z, a, b)` for standard normal `Z`, midpoint rule on `n` nodes.
fn censored_oracle(a: f64, b: f64, n: usize) -> (f64, f64) {
    let (lo, hi) = (-40.0, 40.0);
    let dz = (hi - lo) / n as f64;
    let (mut s1, mut s2) = (0.0, 0.0);
    for k in 0..n {
        let z = lo + (k as f64 + 0.5) * dz;
        let w = (-0.5 * z * z).exp() / (TAU).sqrt() * dz;
        let c = z.clamp(a, b);
        s1 += w * c;
        s2 += w * c * c;
    }
    (s1, (s2 - s1 * s1).sqrt())
}

fn a7() -> Outcome {
    let mut moment_err: f64 = 0.0;
    for j in 1..=20 {
        for m in (-j..=j).step_by(3) {
            for dm in [0.5, 1.0, 3.0, 7.0] {
                let r = rectified_stats(hi(j), hi(m), dm, NormConvention::JPlusHalf).unwrap();
                let (a, b) = ((-j - m) as f64 / dm, (j - m) as f64 / dm);
                let (mu, sd) = censored_oracle(a, b, 1_000_000);
                moment_err = moment_err.max((r.mu - mu).abs()).max((r.sigma - sd).abs());
            }
        }
    }
    let mut angle_err: f64 = 0.0;
    let mut worst = String::new();
    for j in [5, 10, 20, 30] {
        for dm in [3.0, 4.0, 5.0] {
            for m in [j, (j + 1) / 2, 0] {
                // fixed-j packet: the j window is empty at this width
                let spec = WavepacketSpec::new(hi(j), hi(m), 0.1, dm).unwrap();
                let packet = build_j_wavepacket(&spec).unwrap();
                let peak = q_polar_peak(&packet);
                let bar = rectified_stats(hi(j), hi(m), dm, NormConvention::JPlusHalf).unwrap().theta_bar;
                let e = (peak - bar).abs().to_degrees();
                if e > angle_err {
                    angle_err = e;
                    worst = format!("j={j} m={m} dm={dm}");
                }
            }
        }
    }
    (
        moment_err <= 1e-6 && angle_err <= 2.0,
        format!("moments vs quadrature {moment_err:.1e} (tol 1e-6); theta_bar vs Q peak worst {angle_err:.2} deg at {worst} (tol 2)"),
    )
}

fn a8() -> Vec<Check> {
    let mut checks: Vec<Check> = Vec::new();
    for (j, m) in [(hi(10), hi(3)), (hi(10), hi(10)), (h(1), h(1))] {
        let r = vmw_operator_check(j, m, 0.01).unwrap();
        for c in &r.relations {
            let fine = (3.5..=4.5).contains(&c.ratio);
            let part = format!("({j},{m}) {:.3}", c.ratio);
            match checks.iter_mut().find(|k| k.name == c.name) {
                Some(k) => {
                    k.pass &= fine;
                    k.detail.push_str(&format!(", {part}"));
                }
                None => checks.push(Check { name: c.name.to_string(), pass: fine, detail: format!("ratios {part}") }),
            }
        }
    }
    for k in &mut checks {
        k.detail.push_str(" (want [3.5, 4.5])");
    }
    checks
}

fn a9() -> Outcome {
    let (mut three, mut xy, mut n) = (0.0f64, 0.0f64, 0);
    for j1 in js(8) {
        for j2 in js(8) {
            let mut j3 = (j1 - j2).abs();
            while j3 <= j1 + j2 {
                for m3 in j3.projections() {
                    let x = CorrelationInput::new(j1, j2, j3, m3).unwrap();
                    let vm = mstate_correlation_vm(&x, 64).unwrap();
                    let cl = mstate_correlation_closed(&x).unwrap();
                    let ex = pairwise_xx_expectation(j1, j2, j3, m3).unwrap();
                    let yy = pairwise_expectation(j1, j2, j3, m3, Axis::Y).unwrap();
                    three = three.max((vm - cl).abs()).max((vm - ex).abs()).max((cl - ex).abs());
                    xy = xy.max((yy - ex).abs());
                    n += 1;
                }
                j3 = j3 + HalfInt::ONE;
            }
        }
    }
    (three <= 1e-10 && xy <= 1e-12, format!("{n} states, three-way {three:.1e} (tol 1e-10), XX-YY {xy:.1e} (tol 1e-12)"))
}

fn a10() -> Outcome {
    let mut n = 0;
    let mut bad = Vec::new();
    for s in 1..=20 {
        for m in h(s).projections().filter(|m| m.twice() != 0) {
            let g = g_factor(h(s), m).unwrap();
            if g != 2.0 {
                bad.push(format!("S={} M={m}: {g:e}", h(s)));
            }
            n += 1;
        }
    }
    (bad.is_empty(), format!("{n} (S, M) pairs, {} not exactly 2 {}", bad.len(), bad.join(" ")))
}

fn a11() -> Outcome {
    let spec = WavepacketSpec::new(hi(80), hi(40), 5.0, 5.0).unwrap();
    let omega = 1.0;
    let times: Vec<f64> = (0..=12).map(|k| TAU / omega * k as f64 / 12.0).collect();
    let tr = track_rotation(&PrecessionConfig::new(spec, omega, times).unwrap()).unwrap();
    let sj = tr.slope(&tr.j_azimuth);
    let sp = tr.slope(&tr.particle_azimuth);
    let diff: Vec<f64> = tr.j_azimuth.iter().zip(&tr.particle_azimuth).map(|(a, b)| a - b).collect();
    let spread = |v: &[f64]| {
        v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let norm_drift = spread(&tr.norm) / tr.norm[0];
    let width_drift = spread(&tr.particle_width) / tr.particle_width[0];
    let ok = ((sj - omega) / omega).abs() <= 0.05
        && ((sp - omega) / omega).abs() <= 0.05
        && spread(&diff) <= TAU / 720.0
        && norm_drift <= 1e-12
        && width_drift < 0.02;
    (
        ok,
        format!(
            "slopes j {sj:.6}, particle {sp:.6} (omega {omega}, 5%); offset spread {:.2e} (tol {:.2e}); norm drift {norm_drift:.1e} (1e-12); dchi drift {width_drift:.1e} (0.02)",
            spread(&diff),
            TAU / 720.0
        ),
    )
}

fn a12() -> Outcome {
    let mut wr: f64 = 0.0;
    for k in 0..=1500 {
        let x = -10.0 + 15.0 * k as f64 / 1500.0;
        let a = airy(x).unwrap();
        wr = wr.max((a.ai * a.bip - a.aip * a.bi - 1.0 / PI).abs());
    }
    let g23 = libm::tgamma(2.0 / 3.0);
    let a0 = airy(0.0).unwrap();
    let ai0 = (a0.ai - 3f64.powf(-2.0 / 3.0) / g23).abs();
    let bi0 = (a0.bi - 3f64.powf(-1.0 / 6.0) / g23).abs();
    let mut sym: f64 = 0.0;
    for k in 0..=2000 {
        let x = -10.0 + 0.01 * k as f64;
        sym = sym.max((std_normal_cdf(x) + std_normal_cdf(-x) - 1.0).abs());
    }
    (
        wr <= 1e-9 && ai0 <= 1e-9 && bi0 <= 1e-9 && sym <= 1e-14,
        format!("Wronskian {wr:.1e} (1e-9); Ai(0) {ai0:.1e}, Bi(0) {bi0:.1e} (1e-9); cdf symmetry {sym:.1e} (1e-14)"),
    )
}
