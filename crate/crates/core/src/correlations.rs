//! Transverse m-state correlations of coupled angular momenta and the geometric g-factor.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{cg_exact, CGKey};
use crate::qnum::{check_jm, lambda_perp, triangle_ok, HalfInt, NormConvention};
use crate::special::acos_complex;

/// Smallest accepted number of nodes for the delocalization-angle quadrature.
pub const MIN_QUADRATURE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CorrelationInput {
    pub j1: HalfInt,
    pub j2: HalfInt,
    pub j3: HalfInt,
    pub m3: HalfInt,
}

impl CorrelationInput {
    pub fn new(j1: HalfInt, j2: HalfInt, j3: HalfInt, m3: HalfInt) -> Result<Self> {
        if !triangle_ok(j1, j2, j3) {
            return Err(Error::Selection(format!("({j1}, {j2}, {j3}) fails the triangle rule")));
        }
        check_jm(j3, m3)?;
        Ok(CorrelationInput { j1, j2, j3, m3 })
    }

    /// Projections `m1` with a partner `m2 = m3 - m1` inside `j2`.
    pub fn m1_range(&self) -> impl Iterator<Item = HalfInt> + '_ {
        self.j1.projections().filter(|&m1| (self.m3 - m1).abs() <= self.j2)
    }

    /// Squared coupling weight of the `m1` term.
    pub fn weight(&self, m1: HalfInt) -> Result<f64> {
        let c = cg_exact(&CGKey::coupled(self.j1, m1, self.j2, self.m3 - m1, self.j3))?;
        Ok(c * c)
    }

    /// `j3(j3+1) - j1(j1+1) - j2(j2+1) - 2 m1 m2`
    fn bracket(&self, m1: HalfInt) -> f64 {
        let cas = |j: HalfInt| j.value() * (j.value() + 1.0);
        let m2 = self.m3 - m1;
        cas(self.j3) - cas(self.j1) - cas(self.j2) - 2.0 * m1.value() * m2.value()
    }
}

/// Cosine of the relative azimuth of `j1` and `j2`; outside `[-1, 1]` the configuration is classically forbidden.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CosPhi12 {
    pub value: f64,
    pub out_of_range: bool,
}

pub fn cos_phi12(input: &CorrelationInput, m1: HalfInt) -> Result<CosPhi12> {
    cos_phi12_with(input, m1, NormConvention::SqrtJJPlus1)
}

pub fn cos_phi12_with(input: &CorrelationInput, m1: HalfInt, conv: NormConvention) -> Result<CosPhi12> {
    check_jm(input.j1, m1)?;
    let m2 = input.m3 - m1;
    check_jm(input.j2, m2)?;
    let p1 = lambda_perp(input.j1, m1, conv);
    let p2 = lambda_perp(input.j2, m2, conv);
    if p1 == 0.0 || p2 == 0.0 {
        return Err(Error::Domain(format!("vanishing perpendicular projection (m1 = {m1}, m2 = {m2})")));
    }
    let value = input.bracket(m1) / (2.0 * p1 * p2);
    Ok(CosPhi12 { value, out_of_range: value.abs() > 1.0 + 1e-12 })
}

/// Rotating-frame average over the delocalization angle, one vector-model figure per `m1`.
pub fn mstate_correlation_vm(input: &CorrelationInput, quadrature_n: usize) -> Result<f64> {
    if quadrature_n < MIN_QUADRATURE {
        return Err(Error::Domain(format!("quadrature needs at least {MIN_QUADRATURE} nodes, got {quadrature_n}")));
    }
    let conv = NormConvention::SqrtJJPlus1;
    let mut integral = 0.0;
    let mut reduced = 0.0;
    for m1 in input.m1_range() {
        let w = input.weight(m1)?;
        if w == 0.0 {
            continue;
        }
        let m2 = input.m3 - m1;
        let (p1, p2) = (lambda_perp(input.j1, m1, conv), lambda_perp(input.j2, m2, conv));
        if p1 == 0.0 || p2 == 0.0 {
            continue;
        }
        let c = cos_phi12(input, m1)?.value;
        let phi12 = acos_complex(Complex64::new(c, 0.0));
        let sum: Complex64 = (0..quadrature_n)
            .map(|k| {
                let big_phi = TAU * k as f64 / quadrature_n as f64;
                (phi12 + big_phi).cos() * big_phi.cos()
            })
            .sum();
        integral += w * p1 * p2 * sum.re / quadrature_n as f64;
        reduced += 0.5 * w * p1 * p2 * c;
    }
    if (integral - reduced).abs() >= 1e-10 {
        return Err(Error::Consistency(format!("delocalization integral {integral} vs reduced form {reduced}")));
    }
    Ok(integral)
}

pub fn mstate_correlation_closed(input: &CorrelationInput) -> Result<f64> {
    let mut s = 0.0;
    for m1 in input.m1_range() {
        s += input.weight(m1)? * input.bracket(m1);
    }
    Ok(s / 4.0)
}

/// Ratio of magnetic moment to `M` for a spin `S` precessing at `cos(theta) = M/S`.
pub fn g_factor(s: HalfInt, m: HalfInt) -> Result<f64> {
    if s.twice() <= 0 {
        return Err(Error::Domain("g-factor needs S > 0".into()));
    }
    check_jm(s, m)?;
    if m.twice() == 0 {
        return Err(Error::Domain("g undefined at M = 0".into()));
    }
    let (s, m) = (s.value(), m.value());
    let cos_theta = m / s;
    Ok((m + s * cos_theta) / m)
}
