//! Airy functions, the standard normal distribution and complex inverse cosine.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Argument range for the Airy functions; `Bi` overflows shortly above the upper end.
pub const AIRY_DOMAIN: (f64, f64) = (-200.0, 100.0);

/// Below this `|x|` the Maclaurin series is summed in double-double arithmetic;
/// above it the asymptotic expansions take over.
pub const AIRY_SERIES_LIMIT: f64 = 8.0;

// Ai(0) and -Ai'(0) as unevaluated sums hi + lo.
const AI0: Dd = Dd { hi: 0.355_028_053_887_817_2, lo: 2.052_336_324_362_12e-17 };
const DAI0: Dd = Dd { hi: 0.258_819_403_792_806_8, lo: -2.522_243_111_610_832e-17 };

/// `(Ai, Ai', Bi, Bi')` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Airy {
    pub ai: f64,
    pub aip: f64,
    pub bi: f64,
    pub bip: f64,
}

#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    fn norm(hi: f64, lo: f64) -> Dd {
        let (h, l) = two_sum(hi, lo);
        Dd { hi: h, lo: l }
    }

    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        Dd::norm(s, e + self.lo + o.lo)
    }

    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        Dd::norm(p, e + self.hi * o.lo + self.lo * o.hi)
    }

    fn div_f(self, d: f64) -> Dd {
        let q = self.hi / d;
        let (p, e) = two_prod(q, d);
        let r = (self.hi - p - e + self.lo) / d;
        Dd::norm(q, r)
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

fn maclaurin(x: f64) -> Airy {
    let x3 = Dd::from(x).mul(Dd::from(x)).mul(Dd::from(x));
    let mut f = Dd::from(1.0);
    let mut g = Dd::from(x);
    let (x2h, x2l) = two_prod(x, x);
    let mut fp = Dd::norm(x2h, x2l).div_f(2.0);
    let mut gp = Dd::from(1.0);
    let (mut tf, mut tg, mut tfp, mut tgp) = (f, g, fp, gp);
    for k in 1..200 {
        let k = k as f64;
        tf = tf.mul(x3).div_f((3.0 * k) * (3.0 * k - 1.0));
        tg = tg.mul(x3).div_f((3.0 * k) * (3.0 * k + 1.0));
        tgp = tgp.mul(x3).div_f((3.0 * k) * (3.0 * k - 2.0));
        if k >= 2.0 {
            tfp = tfp.mul(x3).div_f((3.0 * k - 3.0) * (3.0 * k - 1.0));
            fp = fp.add(tfp);
        }
        f = f.add(tf);
        g = g.add(tg);
        gp = gp.add(tgp);
        let small = |t: Dd, s: Dd| t.hi.abs() <= 1e-34 * s.hi.abs().max(1.0);
        if small(tf, f) && small(tg, g) && small(tfp, fp) && small(tgp, gp) {
            break;
        }
    }
    let s3 = 3f64.sqrt();
    let a = AI0.mul(f);
    let b = DAI0.mul(g);
    let ap = AI0.mul(fp);
    let bp = DAI0.mul(gp);
    Airy {
        ai: a.add(b.neg()).to_f64(),
        aip: ap.add(bp.neg()).to_f64(),
        bi: s3 * a.add(b).to_f64(),
        bip: s3 * ap.add(bp).to_f64(),
    }
}

/// `u_k` and `v_k` of the large-argument expansions.
fn uv(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![1.0; n];
    let mut v = vec![1.0; n];
    for k in 1..n {
        let kf = k as f64;
        u[k] = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        v[k] = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u[k];
    }
    (u, v)
}

/// Sums `sum c_k s_k z^-k` up to the smallest term.
fn series(c: &[f64], zeta: f64, sign: impl Fn(usize) -> f64, pick: impl Fn(usize) -> Option<usize>) -> f64 {
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    for (i, k) in (0..).map_while(&pick).enumerate() {
        if k >= c.len() {
            break;
        }
        let t = sign(i) * c[k] / zeta.powi(k as i32);
        if t.abs() > last {
            break;
        }
        sum += t;
        last = t.abs();
        if last < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

fn asymptotic(x: f64) -> Airy {
    let (u, v) = uv(40);
    let z = x.abs();
    let zeta = 2.0 / 3.0 * z * z.sqrt();
    let q = z.powf(0.25);
    let sp = PI.sqrt();
    if x > 0.0 {
        let alt = |i: usize| if i % 2 == 0 { 1.0 } else { -1.0 };
        let all = |k: usize| Some(k);
        let su_alt = series(&u, zeta, alt, all);
        let sv_alt = series(&v, zeta, alt, all);
        let su = series(&u, zeta, |_| 1.0, all);
        let sv = series(&v, zeta, |_| 1.0, all);
        let em = (-zeta).exp();
        let ep = zeta.exp();
        Airy {
            ai: em / (2.0 * sp * q) * su_alt,
            aip: -q * em / (2.0 * sp) * sv_alt,
            bi: ep / (sp * q) * su,
            bip: q * ep / sp * sv,
        }
    } else {
        let alt = |i: usize| if i % 2 == 0 { 1.0 } else { -1.0 };
        let even = |i: usize| Some(2 * i);
        let odd = |i: usize| Some(2 * i + 1);
        let ue = series(&u, zeta, alt, even);
        let uo = series(&u, zeta, alt, odd);
        let ve = series(&v, zeta, alt, even);
        let vo = series(&v, zeta, alt, odd);
        let (s, c) = (zeta - FRAC_PI_4).sin_cos();
        Airy {
            ai: (c * ue + s * uo) / (sp * q),
            aip: q / sp * (s * ve - c * vo),
            bi: (-s * ue + c * uo) / (sp * q),
            bip: q / sp * (c * ve + s * vo),
        }
    }
}

/// `(Ai, Ai', Bi, Bi')` on [`AIRY_DOMAIN`].
pub fn airy(x: f64) -> Result<Airy> {
    if !(AIRY_DOMAIN.0..=AIRY_DOMAIN.1).contains(&x) {
        return Err(Error::Domain(format!("Airy argument {x} outside [{}, {}]", AIRY_DOMAIN.0, AIRY_DOMAIN.1)));
    }
    Ok(airy_unchecked(x))
}

pub(crate) fn airy_unchecked(x: f64) -> Airy {
    if x.abs() <= AIRY_SERIES_LIMIT {
        maclaurin(x)
    } else {
        asymptotic(x)
    }
}

/// Series and asymptotic branches evaluated separately, for crossover checks.
pub fn airy_branches(x: f64) -> (Airy, Airy) {
    (maclaurin(x), asymptotic(x))
}

pub fn airy_ai(x: f64) -> Result<f64> {
    airy(x).map(|a| a.ai)
}

pub fn airy_bi(x: f64) -> Result<f64> {
    airy(x).map(|a| a.bi)
}

/// `exp(-x^2/2)/sqrt(2 pi)`
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal cumulative distribution.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Principal `acos` on the complex plane; real `x > 1` maps to `+i acosh(x)`.
pub fn acos_complex(z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        let x = z.re;
        return if x > 1.0 {
            Complex64::new(0.0, x.acosh())
        } else if x < -1.0 {
            Complex64::new(PI, -(-x).acosh())
        } else {
            Complex64::new(x.acos(), 0.0)
        };
    }
    let i = Complex64::i();
    -i * (z + i * (Complex64::new(1.0, 0.0) - z * z).sqrt()).ln()
}

/// `acosh` with arguments within `1e-12` below one clamped to one.
pub fn acosh_real_branch(x: f64) -> Result<f64> {
    if x < 1.0 - 1e-12 || x.is_nan() {
        return Err(Error::Domain(format!("acosh argument {x} < 1")));
    }
    Ok(x.max(1.0).acosh())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // x, Ai, Ai', Bi, Bi' at 17 significant digits.
    const TABLE: &[[f64; 5]] = &[
        [-100.0, 0.17675339323955288, -0.24229703166058381, 0.024273887680160132, 1.7675948932340609],
        [-50.0, -0.16188142361232092, 0.96898983727674909, -0.13715015212882007, -1.1453617002654776],
        [-30.0, -0.087968188456842163, 1.2286206026374851, -0.22444694220056632, -0.48369472582768149],
        [-20.0, -0.17640612707798469, 0.89286285673647124, -0.20013930932265135, -0.79142903383953648],
        [-10.0, 0.040241238486443191, 0.99626504413279006, -0.31467982964383863, 0.11941411339990924],
        [-8.0, -0.052705050356386203, 0.93556093819830655, -0.33125158075113786, -0.15945049781298139],
        [-5.0, 0.35076100902411432, 0.32719281855444314, -0.13836913490160058, 0.77841177300189925],
        [-2.0, 0.22740742820168558, 0.61825902074169104, -0.41230258795639849, 0.27879516692116952],
        [0.0, 0.35502805388781724, -0.2588194037928068, 0.61492662744600074, 0.44828835735382636],
        [1.0, 0.13529241631288142, -0.15914744129679321, 1.2074235949528713, 0.93243593339277563],
        [4.5, 0.00033025032351430898, -0.00071786656755750889, 227.58808183559972, 469.1350773279664],
        [8.0, 4.6922076160992316e-8, -1.3414392979067866e-7, 1199586.0041244599, 3354342.3127445389],
        [10.0, 1.1047532552898686e-10, -3.5206336767389236e-10, 455641153.54822514, 1429236134.4828658],
    ];

    const FAR: &[[f64; 5]] = &[
        [20.0, 1.6916728686705403e-27, -7.586391625748355e-27, 2.1037650496511038e+25, 9.3818393361339643e+25],
        [50.0, 4.5849417240748285e-104, -3.2443318198287993e-103, 4.9090996994442193e+101, 3.4687987795459767e+102],
        [100.0, 2.6344821520881845e-291, -2.6351403616044099e-290, 6.0412239966702014e+288, 6.0397127453106029e+289],
    ];

    #[test]
    fn far_positive_relative() {
        for r in FAR {
            let a = airy(r[0]).unwrap();
            for (got, want) in [(a.ai, r[1]), (a.aip, r[2]), (a.bi, r[3]), (a.bip, r[4])] {
                assert!(((got - want) / want).abs() < 1e-12, "{}: {got} vs {want}", r[0]);
            }
        }
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * b.abs().max(1.0)
    }

    #[test]
    fn reference_values() {
        for r in TABLE {
            let a = airy(r[0]).unwrap();
            assert!(close(a.ai, r[1]), "Ai({}) = {} vs {}", r[0], a.ai, r[1]);
            assert!(close(a.aip, r[2]), "Ai'({}) = {} vs {}", r[0], a.aip, r[2]);
            assert!(close(a.bi, r[3]), "Bi({}) = {} vs {}", r[0], a.bi, r[3]);
            assert!(close(a.bip, r[4]), "Bi'({}) = {} vs {}", r[0], a.bip, r[4]);
        }
    }

    #[test]
    fn origin_values() {
        assert_abs_diff_eq!(airy_ai(0.0).unwrap(), 0.355_028_053_9, epsilon = 1e-10);
        assert_abs_diff_eq!(airy_bi(0.0).unwrap(), 0.614_926_627_4, epsilon = 1e-10);
        assert!(airy(-200.5).is_err());
        assert!(airy(100.5).is_err());
    }

    #[test]
    fn crossover_branches_agree() {
        for x in [AIRY_SERIES_LIMIT, -AIRY_SERIES_LIMIT] {
            let (s, a) = airy_branches(x);
            assert!(close(a.ai, s.ai) && close(a.aip, s.aip), "{x}: {s:?} {a:?}");
            assert!(close(a.bi, s.bi) && close(a.bip, s.bip), "{x}: {s:?} {a:?}");
        }
    }

    #[test]
    fn normal_values() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        assert_abs_diff_eq!(std_normal_pdf(0.0), 0.398_942_280_4, epsilon = 1e-10);
        assert_abs_diff_eq!(std_normal_cdf(1.96), 0.975_002_104_851_780, epsilon = 1e-12);
    }

    #[test]
    fn acos_values() {
        assert_eq!(acos_complex(Complex64::new(1.0, 0.0)), Complex64::new(0.0, 0.0));
        assert_eq!(acosh_real_branch(1.0).unwrap(), 0.0);
        assert_eq!(acosh_real_branch(1.0 - 1e-13).unwrap(), 0.0);
        let v = acos_complex(Complex64::new(2.0, 0.0));
        assert_abs_diff_eq!(v.re, 0.0);
        assert_abs_diff_eq!(v.im, 1.316_957_896_924_816_6, epsilon = 1e-15);
        let w = acos_complex(Complex64::new(0.3, 1e-30));
        assert_abs_diff_eq!(w.re, 0.3f64.acos(), epsilon = 1e-15);
    }
}
