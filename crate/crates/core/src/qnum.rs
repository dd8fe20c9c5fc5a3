//! Half-integer quantum numbers and vector-model primitives.

use std::cmp::Ordering;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A half-integer stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct HalfInt {
    twice: i64,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { twice: 0 };
    pub const HALF: HalfInt = HalfInt { twice: 1 };
    pub const ONE: HalfInt = HalfInt { twice: 2 };

    pub const fn from_twice(twice: i64) -> Self {
        HalfInt { twice }
    }

    pub const fn int(n: i64) -> Self {
        HalfInt { twice: 2 * n }
    }

    pub const fn twice(self) -> i64 {
        self.twice
    }

    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    pub const fn abs(self) -> Self {
        HalfInt { twice: self.twice.abs() }
    }

    /// Integer value, if this is an integer.
    pub fn to_int(self) -> Option<i64> {
        self.is_integer().then_some(self.twice / 2)
    }

    /// Same parity (both integer or both half-odd).
    pub const fn same_parity(self, other: HalfInt) -> bool {
        (self.twice - other.twice) % 2 == 0
    }

    /// `(-1)^self` for integer `self`.
    pub fn phase(self) -> Result<f64> {
        match self.to_int() {
            Some(n) if n % 2 == 0 => Ok(1.0),
            Some(_) => Ok(-1.0),
            None => Err(Error::Domain(format!("(-1)^{self} is not real"))),
        }
    }

    /// The projections `j, j-1, ..., -j`.
    pub fn projections(self) -> impl Iterator<Item = HalfInt> {
        let t = self.twice;
        (0..=t.max(-1)).map(move |k| HalfInt::from_twice(t - 2 * k))
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("not a half-integer: {s:?}"));
        if let Some((num, den)) = s.split_once('/') {
            let num: i64 = num.trim().parse().map_err(|_| bad())?;
            match den.trim() {
                "1" => Ok(HalfInt::int(num)),
                "2" => Ok(HalfInt::from_twice(num)),
                _ => Err(bad()),
            }
        } else if let Ok(n) = s.parse::<i64>() {
            Ok(HalfInt::int(n))
        } else {
            let x: f64 = s.parse().map_err(|_| bad())?;
            let twice = 2.0 * x;
            if !twice.is_finite() || twice.fract() != 0.0 || twice.abs() > 1e15 {
                return Err(bad());
            }
            Ok(HalfInt::from_twice(twice as i64))
        }
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt::from_twice(self.twice + rhs.twice)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt::from_twice(self.twice - rhs.twice)
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt::from_twice(-self.twice)
    }
}

impl From<i64> for HalfInt {
    fn from(n: i64) -> Self {
        HalfInt::int(n)
    }
}

/// A `|j m>` label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JM {
    pub j: HalfInt,
    pub m: HalfInt,
}

impl JM {
    pub fn new(j: HalfInt, m: HalfInt) -> Result<Self> {
        check_jm(j, m)?;
        Ok(JM { j, m })
    }
}

pub(crate) fn check_jm(j: HalfInt, m: HalfInt) -> Result<()> {
    if j.twice() < 0 {
        return Err(Error::Domain(format!("negative j = {j}")));
    }
    if m.abs() > j || !j.same_parity(m) {
        return Err(Error::Domain(format!("invalid projection m = {m} for j = {j}")));
    }
    Ok(())
}

/// Euler angles, active z-y-z, reduced at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    phi: f64,
    theta: f64,
    chi: f64,
}

fn wrap_tau(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

impl EulerAngles {
    pub fn new(phi: f64, theta: f64, chi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::Domain(format!("theta = {theta} outside [0, pi]")));
        }
        Ok(EulerAngles { phi: wrap_tau(phi), theta, chi: wrap_tau(chi) })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }
}

/// How the length of an angular momentum vector is assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum NormConvention {
    /// `|j| = j + 1/2`
    #[default]
    JPlusHalf,
    /// `|j| = sqrt(j(j+1))`
    SqrtJJPlus1,
}

impl NormConvention {
    pub fn length(self, j: HalfInt) -> f64 {
        let j = j.value();
        match self {
            NormConvention::JPlusHalf => j + 0.5,
            NormConvention::SqrtJJPlus1 => (j * (j + 1.0)).sqrt(),
        }
    }
}

impl FromStr for NormConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "j-plus-half" | "jplushalf" => Ok(NormConvention::JPlusHalf),
            "sqrt-jj1" | "sqrtjjplus1" => Ok(NormConvention::SqrtJJPlus1),
            _ => Err(Error::Parse(format!("unknown norm convention {s:?}"))),
        }
    }
}

/// Vector-model polar angle `acos(m/|j|)`.
pub fn theta_m(j: HalfInt, m: HalfInt, conv: NormConvention) -> Result<f64> {
    if j.twice() <= 0 {
        return Err(Error::Domain("theta_m needs j > 0".into()));
    }
    check_jm(j, m)?;
    Ok((m.value() / conv.length(j)).clamp(-1.0, 1.0).acos())
}

/// Triangle rule with integer perimeter.
pub fn triangle_ok(j1: HalfInt, j2: HalfInt, j3: HalfInt) -> bool {
    let (a, b, c) = (j1.twice(), j2.twice(), j3.twice());
    a >= 0 && b >= 0 && c >= 0 && (a - b).abs() <= c && c <= a + b && (a + b + c) % 2 == 0
}

/// Length of the projection onto the XY plane, `sqrt(|j|^2 - m^2)`.
pub fn lambda_perp(j: HalfInt, m: HalfInt, conv: NormConvention) -> f64 {
    let l = conv.length(j);
    let m = m.value();
    let r = l * l - m * m;
    match r.partial_cmp(&0.0) {
        Some(Ordering::Less) if r > -1e-12 => 0.0,
        _ => r.sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn h(s: &str) -> HalfInt {
        s.parse().unwrap()
    }

    #[test]
    fn parse_forms() {
        assert_eq!(h("7/2").twice(), 7);
        assert_eq!(h("3").twice(), 6);
        assert_eq!(h("3.5").twice(), 7);
        assert_eq!(h("-1/2").twice(), -1);
        assert!("0.3".parse::<HalfInt>().is_err());
        assert!("1/3".parse::<HalfInt>().is_err());
        assert_eq!(h("7/2").to_string(), "7/2");
        assert_eq!(h("-4").to_string(), "-4");
    }

    #[test]
    fn theta_m_examples() {
        let t = theta_m(HalfInt::HALF, HalfInt::HALF, NormConvention::JPlusHalf).unwrap();
        assert_relative_eq!(t, PI / 3.0, epsilon = 1e-15);
        let t = theta_m(HalfInt::int(10), HalfInt::int(10), NormConvention::SqrtJJPlus1).unwrap();
        assert_relative_eq!(t, 0.306_277_369_169_669_36, epsilon = 1e-12);
        for conv in [NormConvention::JPlusHalf, NormConvention::SqrtJJPlus1] {
            let t = theta_m(HalfInt::int(5), HalfInt::ZERO, conv).unwrap();
            assert_relative_eq!(t, PI / 2.0);
        }
        assert!(theta_m(HalfInt::ZERO, HalfInt::ZERO, NormConvention::JPlusHalf).is_err());
        assert!(theta_m(HalfInt::int(1), HalfInt::int(2), NormConvention::JPlusHalf).is_err());
    }

    #[test]
    fn triangle_examples() {
        assert!(triangle_ok(HalfInt::HALF, HalfInt::HALF, HalfInt::ONE));
        assert!(!triangle_ok(HalfInt::HALF, HalfInt::HALF, HalfInt::HALF));
        assert!(!triangle_ok(HalfInt::int(40), HalfInt::int(30), HalfInt::int(5)));
    }

    #[test]
    fn lambda_examples() {
        let c = NormConvention::JPlusHalf;
        assert_relative_eq!(lambda_perp(HalfInt::int(10), HalfInt::int(10), c), 3.201_562_118_716_424, epsilon = 1e-12);
        assert_relative_eq!(lambda_perp(HalfInt::int(5), HalfInt::ZERO, c), 5.5);
        assert_relative_eq!(lambda_perp(HalfInt::int(40), HalfInt::int(10), c), 39.246_018_906_380_81, epsilon = 1e-10);
    }

    #[test]
    fn euler_reduction() {
        let e = EulerAngles::new(-PI / 2.0, 1.0, 7.0).unwrap();
        assert_relative_eq!(e.phi(), 1.5 * PI);
        assert_relative_eq!(e.chi(), 7.0 - TAU);
        assert!(EulerAngles::new(0.0, -0.1, 0.0).is_err());
    }
}
