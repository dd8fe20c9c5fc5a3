//! Semiclassical Clebsch-Gordan coefficients from the rotation geometry of three coupled vectors.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{cg_symmetry, CGKey, CgSymmetry};
use crate::qnum::{check_jm, lambda_perp, triangle_ok, HalfInt, NormConvention};
use crate::special::{acos_complex, airy};

/// Turning-region threshold as a fraction of `(j1 + j2 + j3 + 3/2)^2`.
pub const TURNING_FRACTION: f64 = 0.05;

type C = Complex64;
type V3 = [C; 3];

/// Rotation angles, signs and phases of one coupling configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingGeometry {
    pub phi1: C,
    pub phi2: C,
    pub eps1: C,
    pub eps2: C,
    pub eps3: C,
    pub s1: i8,
    pub s2: i8,
    pub s3: i8,
    pub alpha: f64,
    pub beta: C,
    pub omega: C,
    /// `(j3 - j1 - j2) pi / 2`
    pub ex_phase: f64,
    pub theta_total: C,
    /// `j1 + j2 + j3 + 3/2`
    scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegionTag {
    Allowed,
    Forbidden,
    Turning,
}

impl RegionTag {
    pub fn as_str(self) -> &'static str {
        match self {
            RegionTag::Allowed => "allowed",
            RegionTag::Forbidden => "forbidden",
            RegionTag::Turning => "turning",
        }
    }
}

fn heron(a: f64, b: f64, c: f64) -> f64 {
    (a + b + c) * (-a + b + c) * (a - b + c) * (a + b - c)
}

/// Four times the area of the triangle with sides `l1, l2, l3`; imaginary when no triangle exists.
pub fn beta_area(l1: f64, l2: f64, l3: f64) -> C {
    let p = heron(l1, l2, l3);
    if p >= 0.0 {
        C::new(p.sqrt(), 0.0)
    } else {
        C::new(0.0, (-p).sqrt())
    }
}

/// Which prefactor the averaged square uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AvgVariant {
    /// `2 (j3 + 1) / (pi beta)`
    #[default]
    JPlusOne,
    /// `(2 j3 + 1) / (pi beta)`
    TwoJPlusOne,
}

fn lambdas(j1: HalfInt, m1: HalfInt, j2: HalfInt, m2: HalfInt, j3: HalfInt) -> [f64; 3] {
    let c = NormConvention::JPlusHalf;
    [lambda_perp(j1, m1, c), lambda_perp(j2, m2, c), lambda_perp(j3, m1 + m2, c)]
}

/// Classical mean of the squared coefficient over neighbouring `j3`.
pub fn cg_sq_avg(j1: HalfInt, m1: HalfInt, j2: HalfInt, m2: HalfInt, j3: HalfInt, variant: AvgVariant) -> Result<f64> {
    let [l1, l2, l3] = lambdas(j1, m1, j2, m2, j3);
    let beta = beta_area(l1, l2, l3);
    if beta.im != 0.0 || beta.re <= 0.0 {
        return Err(Error::Region(format!("beta = {beta} is not real positive")));
    }
    let num = match variant {
        AvgVariant::JPlusOne => 2.0 * (j3.value() + 1.0),
        AvgVariant::TwoJPlusOne => 2.0 * j3.value() + 1.0,
    };
    Ok(num / (PI * beta.re))
}

fn cross(a: &V3, b: &V3) -> V3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: &V3, b: &V3) -> C {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn scale(a: &V3, k: C) -> V3 {
    [a[0] * k, a[1] * k, a[2] * k]
}

/// Real arguments within `1e-12` outside `[-1, 1]` are pulled back before the inverse cosine.
fn acos_clamped(x: f64) -> C {
    let x = if x.abs() > 1.0 && x.abs() <= 1.0 + 1e-12 { x.signum() } else { x };
    acos_complex(C::new(x, 0.0))
}

/// Sense of the rotation about `j`: sign of `(n x Z_perp) . j_hat`.
fn rotation_sign(v: &V3, length: f64, normal: &V3) -> i8 {
    let jh = scale(v, C::new(1.0 / length, 0.0));
    let z: V3 = [C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(1.0, 0.0)];
    let zp = {
        let p = dot(&z, &jh);
        [z[0] - p * jh[0], z[1] - p * jh[1], z[2] - p * jh[2]]
    };
    if dot(&cross(normal, &zp), &jh).re >= 0.0 {
        1
    } else {
        -1
    }
}

/// Rotation geometry taking the three vectors from the XZ plane into the coupled configuration.
pub fn coupling_geometry(j1: HalfInt, m1: HalfInt, j2: HalfInt, m2: HalfInt, j3: HalfInt, m3: HalfInt) -> Result<CouplingGeometry> {
    if m1 + m2 != m3 {
        return Err(Error::Selection(format!("m3 = {m3} != m1 + m2")));
    }
    if !triangle_ok(j1, j2, j3) {
        return Err(Error::Selection(format!("({j1}, {j2}, {j3}) violates the triangle rule")));
    }
    check_jm(j1, m1)?;
    check_jm(j2, m2)?;
    check_jm(j3, m3)?;
    let big = [j1.value() + 0.5, j2.value() + 0.5, j3.value() + 0.5];
    let ms = [m1.value(), m2.value(), m3.value()];
    let [l1, l2, l3] = lambdas(j1, m1, j2, m2, j3);
    let beta = beta_area(l1, l2, l3);
    let alpha = heron(big[0], big[1], big[2]);
    if alpha <= 0.0 {
        return Err(Error::Degenerate("collinear vector triangle (alpha = 0)".into()));
    }
    let alpha = alpha.sqrt();
    let phi1 = acos_clamped((l1 * l1 + l3 * l3 - l2 * l2) / (2.0 * l1 * l3));
    let phi2 = acos_clamped((l2 * l2 + l3 * l3 - l1 * l1) / (2.0 * l2 * l3));
    let re = |x: f64| C::new(x, 0.0);
    let v1: V3 = [re(l1) * phi1.cos(), re(l1) * phi1.sin(), re(ms[0])];
    let v2: V3 = [re(l2) * phi2.cos(), -re(l2) * phi2.sin(), re(ms[1])];
    let v3: V3 = [re(l3), re(0.0), re(ms[2])];
    let n = cross(&v1, &v2);
    let n3 = scale(&n, re(-1.0));
    let s1 = rotation_sign(&v1, big[0], &n);
    let s2 = rotation_sign(&v2, big[1], &n);
    let s3 = rotation_sign(&v3, big[2], &n3);
    let k = 2.0 / alpha;
    let eps1 = re(s1 as f64) * acos_complex(re(k * l3 * big[0]) * phi1.sin());
    let eps2 = re(s2 as f64) * acos_complex(re(k * l3 * big[1]) * phi2.sin());
    let eps3 = re(s3 as f64) * acos_complex(re(k * l1 * big[2]) * phi1.sin());
    let omega = eps1 * big[0] + eps2 * big[1] + eps3 * big[2] + phi1 * ms[0] - phi2 * ms[1];
    let ex_phase = (j3 - j1 - j2).value() * FRAC_PI_2;
    Ok(CouplingGeometry {
        phi1,
        phi2,
        eps1,
        eps2,
        eps3,
        s1,
        s2,
        s3,
        alpha,
        beta,
        omega,
        ex_phase,
        theta_total: omega + ex_phase,
        scale: big.iter().sum(),
    })
}

/// Allowed, forbidden, or too close to a turning point for the simple forms.
pub fn classify_region(geom: &CouplingGeometry) -> RegionTag {
    if geom.beta.norm() < TURNING_FRACTION * geom.scale * geom.scale {
        RegionTag::Turning
    } else if geom.beta.im == 0.0 && geom.beta.re > 0.0 {
        RegionTag::Allowed
    } else {
        RegionTag::Forbidden
    }
}

/// Oscillatory closed form for real `beta`.
pub fn cg_allowed(geom: &CouplingGeometry, j3: HalfInt) -> Result<f64> {
    if geom.beta.im != 0.0 || geom.beta.re <= 0.0 {
        return Err(Error::Region("allowed form needs real positive beta".into()));
    }
    if geom.theta_total.im.abs() >= 1e-9 {
        return Err(Error::Region(format!("complex phase {} in the allowed form", geom.theta_total)));
    }
    Ok(2.0 * ((j3.value() + 1.0) / (PI * geom.beta.re)).sqrt() * geom.theta_total.re.cos())
}

/// Exponentially damped closed form for imaginary `beta`.
pub fn cg_forbidden(geom: &CouplingGeometry, j3: HalfInt) -> Result<f64> {
    if geom.beta.im == 0.0 {
        return Err(Error::Region("forbidden form needs imaginary beta".into()));
    }
    let t = geom.theta_total;
    let amp = 2.0 * ((j3.value() + 1.0) / (PI * geom.beta.norm())).sqrt() * 2f64.sqrt();
    Ok(amp * t.re.cos() * (-t.im.abs() - FRAC_PI_4).exp())
}

fn sgn(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn unit_branch(x: f64) -> Result<i32> {
    let r = x.round();
    if (x - r).abs() > 1e-6 {
        return Err(Error::Branch(format!("branch parameter {x} is not an integer")));
    }
    Ok(r as i32)
}

/// Uniform Airy approximation valid across allowed, turning and forbidden regions.
pub fn cg_wkb(j1: HalfInt, m1: HalfInt, j2: HalfInt, m2: HalfInt, j3: HalfInt, m3: HalfInt) -> Result<f64> {
    let key = CGKey::new(j1, m1, j2, m2, j3, m3);
    if !key.allowed() {
        return Ok(0.0);
    }
    // parity: <j1 0, j2 0|j3 0> vanishes for odd j1 + j2 + j3
    if m1.twice() == 0 && m2.twice() == 0 && (j1 + j2 + j3).twice() % 4 != 0 {
        return Ok(0.0);
    }
    if !j3.is_integer() {
        let rel = if j2.is_integer() { CgSymmetry::SwapToJ2 } else { CgSymmetry::SwapToJ1 };
        let (t, f) = cg_symmetry(&key, rel);
        return Ok(f * cg_wkb(t.j1, t.m1, t.j2, t.m2, t.j3, t.m3)?);
    }
    let g = coupling_geometry(j1, m1, j2, m2, j3, m3)?;
    let big = [j1.value() + 0.5, j2.value() + 0.5, j3.value() + 0.5];
    let (m1v, m2v) = (m1.value(), m2.value());
    let omega0 = FRAC_PI_2
        * (big[0] * g.s1 as f64
            + big[1] * g.s2 as f64
            + big[2] * g.s3 as f64
            + m1v * (1.0 - sgn(FRAC_PI_2 - g.phi1.re))
            - m2v * (1.0 - sgn(FRAC_PI_2 - g.phi2.re)));
    let delta0 = (big[0] + big[1] + big[2]) * FRAC_PI_2;
    let c0 = unit_branch((omega0 + delta0).cos())?;
    let s0 = unit_branch((omega0 + delta0).sin())?;
    if (c0 == 0) == (s0 == 0) {
        return Err(Error::Branch(format!("c0 = {c0}, s0 = {s0}")));
    }
    let (c0, s0) = (c0 as f64, s0 as f64);
    let d = g.omega - omega0;
    let z = (1.5 * d.norm()).powf(2.0 / 3.0);
    let sign = (j1 + j2 + HalfInt::ONE).phase()?;
    let pre = sign * (2.0 * j3.value() + 1.0).sqrt() * z.powf(0.25);
    if g.beta.im == 0.0 {
        let a = airy(-z)?;
        let v = if d.re < 0.0 { c0 * a.ai - s0 * a.bi } else { c0 * a.bi - s0 * a.ai };
        Ok(pre / (g.beta.re / 2.0).sqrt() * v)
    } else {
        let a = airy(z)?;
        let v = if d.im > 0.0 { c0 * a.ai - s0 * a.bi } else { c0 * a.bi - s0 * a.ai };
        Ok(pre / (g.beta.norm() / 2.0).sqrt() * v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::cg_exact;
    use approx::assert_abs_diff_eq;

    fn h(n: i64) -> HalfInt {
        HalfInt::int(n)
    }

    #[test]
    fn beta_examples() {
        assert_eq!(beta_area(3.0, 4.0, 5.0), C::new(24.0, 0.0));
        let b = beta_area(1.0, 1.0, 3.0);
        assert_eq!(b.re, 0.0);
        assert_abs_diff_eq!(b.im, 45f64.sqrt(), epsilon = 1e-14);
        assert_eq!(beta_area(0.0, 2.0, 2.0), C::new(0.0, 0.0));
    }

    #[test]
    fn regions_for_reference_sweep() {
        let g = coupling_geometry(h(40), h(10), h(30), h(-15), h(60), h(-5)).unwrap();
        assert!(g.beta.im == 0.0 && g.beta.re > 0.0);
        assert!(g.theta_total.im.abs() < 1e-9);
        assert_eq!(classify_region(&g), RegionTag::Allowed);
        let g = coupling_geometry(h(40), h(10), h(30), h(-15), h(69), h(-5)).unwrap();
        assert!(g.beta.re == 0.0 && g.beta.im > 0.0);
        assert!(g.theta_total.im.abs() > 1e-3);
        assert_eq!(classify_region(&g), RegionTag::Forbidden);
    }

    #[test]
    fn stretched_geometry_is_real() {
        let g = coupling_geometry(h(3), h(3), h(2), h(2), h(5), h(5)).unwrap();
        assert!(g.theta_total.im.abs() < 1e-9);
        assert!(g.beta.im == 0.0 && g.beta.re > 0.0);
    }

    #[test]
    fn wkb_low_j_example() {
        let w = cg_wkb(h(2), h(0), h(2), h(0), h(2), h(0)).unwrap();
        assert_abs_diff_eq!(w, -(2.0f64 / 7.0).sqrt(), epsilon = 0.05);
    }

    #[test]
    fn wkb_half_integer_j3_uses_symmetry() {
        let half = |t: i64| HalfInt::from_twice(t);
        let (j1, m1, j2, m2, j3) = (h(3), h(1), half(5), half(1), half(7));
        let w = cg_wkb(j1, m1, j2, m2, j3, m1 + m2).unwrap();
        let e = cg_exact(&CGKey::coupled(j1, m1, j2, m2, j3)).unwrap();
        assert_abs_diff_eq!(w, e, epsilon = 0.05);
    }

    #[test]
    fn forms_check_region() {
        let g = coupling_geometry(h(40), h(10), h(30), h(-15), h(69), h(-5)).unwrap();
        assert!(cg_allowed(&g, h(69)).is_err());
        assert!(cg_forbidden(&g, h(69)).unwrap().abs() < 0.05);
        let g = coupling_geometry(h(40), h(10), h(30), h(-15), h(40), h(-5)).unwrap();
        assert!(cg_forbidden(&g, h(40)).is_err());
        let bound = 2.0 * (41.0 / (PI * g.beta.re)).sqrt();
        assert!(cg_allowed(&g, h(40)).unwrap().abs() <= bound);
    }

    #[test]
    fn avg_requires_allowed() {
        assert!(cg_sq_avg(h(40), h(10), h(30), h(-15), h(69), AvgVariant::JPlusOne).is_err());
        let a = cg_sq_avg(h(40), h(10), h(30), h(-15), h(40), AvgVariant::JPlusOne).unwrap();
        let b = cg_sq_avg(h(40), h(10), h(30), h(-15), h(40), AvgVariant::TwoJPlusOne).unwrap();
        assert!(a > 0.0 && b < a);
    }
}
