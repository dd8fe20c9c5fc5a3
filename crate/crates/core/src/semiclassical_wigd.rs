//! Asymptotic and uniform Airy approximations to Wigner small-d functions.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{cg_exact, wigner_d_exact, CGKey};
use crate::qnum::{check_jm, HalfInt};
use crate::special::{acos_complex, acosh_real_branch, airy};

/// `|R| / J^2` below which a point is treated as sitting on a turning point.
pub const TURNING_EPS: f64 = 1e-6;

/// Up to this `j` the wedge edges `|m'| = m` and `m = 0` are evaluated exactly.
pub const EDGE_EXACT_MAX_J: HalfInt = HalfInt::int(20);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WigdQuery {
    pub j: HalfInt,
    pub mp: HalfInt,
    pub m: HalfInt,
    pub theta: f64,
}

impl WigdQuery {
    pub fn new(j: HalfInt, mp: HalfInt, m: HalfInt, theta: f64) -> Result<Self> {
        check_jm(j, mp)?;
        check_jm(j, m)?;
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::Domain(format!("theta = {theta} outside [0, pi]")));
        }
        Ok(WigdQuery { j, mp, m, theta })
    }

    fn big_j(&self) -> f64 {
        self.j.value() + 0.5
    }
}

/// Which turning point the allowed-region Airy argument is measured from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TurningRule {
    /// The nearer of the two turning points.
    #[default]
    Nearest,
    /// Selected by `m' < m cos(theta)`.
    ByProjection,
}

/// `J^2 sin^2 - m^2 - m'^2 + 2 m m' cos`; positive in the classically allowed region.
pub fn r_classifier(q: &WigdQuery) -> f64 {
    let (jj, m, mp) = (q.big_j(), q.m.value(), q.mp.value());
    let (s, c) = q.theta.sin_cos();
    jj * jj * s * s - m * m - mp * mp + 2.0 * m * mp * c
}

struct Args {
    first: f64,
    middle: f64,
    last: f64,
}

fn phase_args(q: &WigdQuery) -> Args {
    let (jj, m, mp) = (q.big_j(), q.m.value(), q.mp.value());
    let (s, c) = q.theta.sin_cos();
    let rp = (jj * jj - mp * mp).sqrt();
    let rm = (jj * jj - m * m).sqrt();
    Args { first: (m - mp * c) / (s * rp), middle: (m * mp - jj * jj * c) / (rm * rp), last: (m * c - mp) / (s * rm) }
}

/// Semiclassical phase; the imaginary part in the forbidden region comes from the hyperbolic forms.
pub fn wigd_phase(q: &WigdQuery) -> Result<Complex64> {
    if q.theta.sin() <= 0.0 {
        return Err(Error::Domain(format!("phase is singular at theta = {}", q.theta)));
    }
    let (jj, m, mp) = (q.big_j(), q.m.value(), q.mp.value());
    let a = phase_args(q);
    let ac = |x: f64| acos_complex(Complex64::new(x, 0.0));
    let mut p = -mp * ac(a.first) + jj * ac(a.middle) + m * ac(a.last) - FRAC_PI_4;
    if r_classifier(q) < 0.0 {
        p.im = forbidden_exponent(q)?;
    }
    Ok(p)
}

fn forbidden_exponent(q: &WigdQuery) -> Result<f64> {
    let (jj, m, mp) = (q.big_j(), q.m.value(), q.mp.value());
    let a = phase_args(q);
    let low = mp < m * q.theta.cos();
    let sg = if low { -1.0 } else { 1.0 };
    Ok(sg * mp * acosh_real_branch(a.first.abs())? - jj * acosh_real_branch(a.middle.abs())?
        + m * acosh_real_branch(a.last.abs())?)
}

/// Maps a query into `0 < theta <= pi/2`, `m > 0`, `|m'| <= m`, returning the sign picked up.
pub fn wigd_symmetry(q: &WigdQuery) -> (WigdQuery, f64) {
    let mut out = *q;
    let mut sign = 1.0;
    let ph = |x: HalfInt| x.phase().expect("integer exponent");
    if out.theta > FRAC_PI_2 {
        sign *= ph(out.j - out.m);
        out.mp = -out.mp;
        out.theta = PI - out.theta;
    }
    if out.mp.abs() > out.m.abs() {
        sign *= ph(out.mp - out.m);
        std::mem::swap(&mut out.mp, &mut out.m);
    }
    if out.m.twice() < 0 {
        sign *= ph(out.mp - out.m);
        out.mp = -out.mp;
        out.m = -out.m;
    }
    (out, sign)
}

fn is_edge(q: &WigdQuery) -> bool {
    q.mp.abs() == q.m || q.m.twice() == 0
}

/// Closed-form asymptotics away from turning points.
pub fn wigd_asymptotic(q: &WigdQuery) -> Result<f64> {
    if q.theta <= 0.0 || q.theta >= PI {
        return Err(Error::Domain("asymptotic form needs 0 < theta < pi".into()));
    }
    let (c, sign) = wigd_symmetry(q);
    let r = r_classifier(&c);
    if r.abs() < 1e-12 * c.big_j() * c.big_j() {
        return Err(Error::Region("turning point: R = 0".into()));
    }
    let p = wigd_phase(&c)? - c.j.value() * PI;
    let amp = (2.0 / PI).sqrt() / r.abs().powf(0.25);
    let v = if r > 0.0 {
        amp * p.re.cos()
    } else {
        amp * 2f64.sqrt() * p.re.cos() * (-p.im.abs() - FRAC_PI_4).exp()
    };
    Ok(sign * v)
}

/// Uniform Airy approximation, reduced to the canonical wedge first.
pub fn wigd_wkb(q: &WigdQuery) -> Result<f64> {
    wigd_wkb_with(q, TurningRule::Nearest)
}

pub fn wigd_wkb_with(q: &WigdQuery, rule: TurningRule) -> Result<f64> {
    if q.theta <= 0.0 || q.theta >= PI {
        return wigner_d_exact(q.j, q.mp, q.m, q.theta);
    }
    let (c, sign) = wigd_symmetry(q);
    if is_edge(&c) {
        return if c.j <= EDGE_EXACT_MAX_J {
            wigner_d_exact(q.j, q.mp, q.m, q.theta)
        } else {
            wigd_asymptotic(q)
        };
    }
    Ok(sign * wkb_canonical(&c, rule)?)
}

fn wkb_canonical(q: &WigdQuery, rule: TurningRule) -> Result<f64> {
    let jj = q.big_j();
    if r_classifier(q).abs() < TURNING_EPS * jj * jj {
        // Z and R both vanish here and their ratio is lost to rounding; the form is smooth across
        let step = 1e-3 / jj;
        let near = |t: f64| uniform_form(&WigdQuery { theta: t, ..*q }, rule);
        return Ok(0.5 * (near(q.theta - step)? + near(q.theta + step)?));
    }
    uniform_form(q, rule)
}

fn uniform_form(q: &WigdQuery, rule: TurningRule) -> Result<f64> {
    let (jj, m, mp) = (q.big_j(), q.m.value(), q.mp.value());
    let r = r_classifier(q);
    let low = mp < m * q.theta.cos();
    let flip = (q.j - q.m).phase()?;
    let (z, pre) = if r > 0.0 {
        let p = wigd_phase(q)?.re;
        let to_upper = jj * PI - (p + FRAC_PI_4);
        let to_lower = p + FRAC_PI_4 - m * PI;
        let use_upper = match rule {
            TurningRule::Nearest => to_upper <= to_lower,
            TurningRule::ByProjection => low,
        };
        if use_upper {
            (-(1.5 * to_upper.abs()).powf(2.0 / 3.0), 1.0)
        } else {
            (-(1.5 * to_lower.abs()).powf(2.0 / 3.0), flip)
        }
    } else {
        let im = forbidden_exponent(q)?;
        ((1.5 * im.abs()).powf(2.0 / 3.0), if low { 1.0 } else { flip })
    };
    Ok(pre * (-4.0 * z / r).powf(0.25) * airy(z)?.ai)
}

/// `d^{j1}_{mp m}` from a C-G coefficient with a large partner `j2`; also returns the effective angle.
pub fn wigd_from_cg_limit(j1: HalfInt, mp: HalfInt, m: HalfInt, theta: f64, j2: HalfInt) -> Result<(f64, f64)> {
    check_jm(j1, mp)?;
    check_jm(j1, m)?;
    let target = j2.value() * theta.cos();
    // nearest projection of j2 (same parity as j2)
    let steps = ((j2.value() - target).round() as i64).clamp(0, j2.twice());
    let m2 = j2 - HalfInt::int(steps);
    if m2.abs() > j2 {
        return Err(Error::Domain(format!("m2 = {m2} outside j2 = {j2}")));
    }
    let theta_eff = (m2.value() / j2.value()).clamp(-1.0, 1.0).acos();
    let key = CGKey::coupled(j1, m, j2, m2, j2 + mp);
    let v = (j1 - m).phase()? * cg_exact(&key)?;
    Ok((v, theta_eff))
}
