//! Exact angular momentum: Clebsch-Gordan coefficients, Wigner d/D, product-basis operators.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qnum::{check_jm, triangle_ok, EulerAngles, HalfInt};

/// Largest `2j` evaluated with exact rational arithmetic in [`CgMode::Auto`].
pub const EXACT_TWICE_LIMIT: i64 = 200;

/// Largest `2j` handled by the explicit Wigner-d sum before switching to the recursion.
pub const DSUM_TWICE_LIMIT: i64 = 32;

/// Largest product-basis dimension for dense operators.
pub const MAX_DENSE_DIM: usize = 4096;

/// `<j1 m1, j2 m2 | j3 m3>`
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CGKey {
    pub j1: HalfInt,
    pub m1: HalfInt,
    pub j2: HalfInt,
    pub m2: HalfInt,
    pub j3: HalfInt,
    pub m3: HalfInt,
}

impl CGKey {
    pub fn new(j1: HalfInt, m1: HalfInt, j2: HalfInt, m2: HalfInt, j3: HalfInt, m3: HalfInt) -> Self {
        CGKey { j1, m1, j2, m2, j3, m3 }
    }

    /// Key with `m3 = m1 + m2`.
    pub fn coupled(j1: HalfInt, m1: HalfInt, j2: HalfInt, m2: HalfInt, j3: HalfInt) -> Self {
        CGKey { j1, m1, j2, m2, j3, m3: m1 + m2 }
    }

    fn max_twice(&self) -> i64 {
        self.j1.twice().max(self.j2.twice()).max(self.j3.twice())
    }

    /// True when the coefficient can be nonzero.
    pub fn allowed(&self) -> bool {
        triangle_ok(self.j1, self.j2, self.j3)
            && self.m1 + self.m2 == self.m3
            && check_jm(self.j1, self.m1).is_ok()
            && check_jm(self.j2, self.m2).is_ok()
            && check_jm(self.j3, self.m3).is_ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CgMode {
    /// Exact rationals up to [`EXACT_TWICE_LIMIT`], log-factorials beyond.
    #[default]
    Auto,
    Exact,
    Log,
}

fn big_factorials() -> &'static [BigInt] {
    static TABLE: OnceLock<Vec<BigInt>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = (3 * EXACT_TWICE_LIMIT / 2 + 2) as usize;
        let mut v = Vec::with_capacity(n + 1);
        v.push(BigInt::one());
        for k in 1..=n {
            let next = &v[k - 1] * BigInt::from(k);
            v.push(next);
        }
        v
    })
}

fn ln_factorial(n: i64) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}

/// Integer arguments of the Racah sum, all as plain integers.
struct Racah {
    tri: [i64; 3],
    perim: i64,
    proj: [i64; 6],
    kmin: i64,
    kmax: i64,
    // k!, (j1+j2-j3-k)!, (j1-m1-k)!, (j2+m2-k)!, (j3-j2+m1+k)!, (j3-j1-m2+k)!
    offs: [i64; 6],
    signs: [i64; 6],
}

impl Racah {
    fn new(key: &CGKey) -> Self {
        let h = |x: HalfInt| x.to_int().expect("integer combination");
        let (j1, m1, j2, m2, j3, m3) = (key.j1, key.m1, key.j2, key.m2, key.j3, key.m3);
        let tri = [h(j1 + j2 - j3), h(j1 - j2 + j3), h(j2 + j3 - j1)];
        let perim = h(j1 + j2 + j3) + 1;
        let proj = [h(j1 + m1), h(j1 - m1), h(j2 + m2), h(j2 - m2), h(j3 + m3), h(j3 - m3)];
        let offs = [0, h(j1 + j2 - j3), h(j1 - m1), h(j2 + m2), h(j3 - j2 + m1), h(j3 - j1 - m2)];
        let signs = [1, -1, -1, -1, 1, 1];
        let kmin = 0.max(-offs[4]).max(-offs[5]);
        let kmax = offs[1].min(offs[2]).min(offs[3]);
        Racah { tri, perim, proj, kmin, kmax, offs, signs }
    }

    fn args(&self, k: i64) -> impl Iterator<Item = usize> + '_ {
        (0..6).map(move |i| (self.offs[i] + self.signs[i] * k) as usize)
    }
}

/// Clebsch-Gordan coefficient, Condon-Shortley phase.
pub fn cg_exact(key: &CGKey) -> Result<f64> {
    cg_exact_mode(key, CgMode::Auto)
}

pub fn cg_exact_mode(key: &CGKey, mode: CgMode) -> Result<f64> {
    if !key.allowed() {
        return Ok(0.0);
    }
    let exact = match mode {
        CgMode::Auto => key.max_twice() <= EXACT_TWICE_LIMIT,
        CgMode::Exact if key.max_twice() > EXACT_TWICE_LIMIT => return Err(Error::Overflow(key.max_twice())),
        CgMode::Exact => true,
        CgMode::Log => false,
    };
    let r = Racah::new(key);
    if exact {
        Ok(cg_rational(key, &r))
    } else {
        Ok(cg_log(key, &r))
    }
}

fn cg_rational(key: &CGKey, r: &Racah) -> f64 {
    let f = big_factorials();
    let mut num = BigInt::from(key.j3.twice() + 1);
    for &t in &r.tri {
        num *= &f[t as usize];
    }
    for &p in &r.proj {
        num *= &f[p as usize];
    }
    let pref = BigRational::new(num, f[r.perim as usize].clone());
    let mut sum = BigRational::zero();
    for k in r.kmin..=r.kmax {
        let mut den = BigInt::one();
        for a in r.args(k) {
            den *= &f[a];
        }
        let term = BigRational::new(if k % 2 == 0 { BigInt::one() } else { -BigInt::one() }, den);
        sum += term;
    }
    if sum.is_zero() {
        return 0.0;
    }
    let sign = if sum.is_negative() { -1.0 } else { 1.0 };
    let sq = pref * &sum * &sum;
    sign * sq.to_f64().unwrap_or(f64::NAN).sqrt()
}

fn cg_log(key: &CGKey, r: &Racah) -> f64 {
    let mut half = ((key.j3.twice() + 1) as f64).ln() - ln_factorial(r.perim);
    for &t in r.tri.iter().chain(r.proj.iter()) {
        half += ln_factorial(t);
    }
    half *= 0.5;
    let mut sum = 0.0;
    let mut comp = 0.0;
    for k in r.kmin..=r.kmax {
        let lden: f64 = r.args(k).map(|a| ln_factorial(a as i64)).sum();
        let term = if k % 2 == 0 { 1.0 } else { -1.0 } * (half - lden).exp();
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Which C-G symmetry to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CgSymmetry {
    /// Exchange the roles of `j2` and `j3`.
    SwapToJ2,
    /// Exchange the roles of `j1` and `j3`.
    SwapToJ1,
}

/// Transformed key and the factor with `cg(key) = factor * cg(transformed)`.
pub fn cg_symmetry(key: &CGKey, relation: CgSymmetry) -> (CGKey, f64) {
    let k = key;
    let ratio = |den: HalfInt| ((k.j3.twice() + 1) as f64 / (den.twice() + 1) as f64).sqrt();
    match relation {
        CgSymmetry::SwapToJ2 => {
            let t = CGKey::new(k.j1, k.m1, k.j3, -k.m3, k.j2, -k.m2);
            (t, (k.j1 - k.m1).phase().unwrap_or(1.0) * ratio(k.j2))
        }
        CgSymmetry::SwapToJ1 => {
            let t = CGKey::new(k.j3, -k.m3, k.j2, k.m2, k.j1, -k.m1);
            (t, (k.j2 + k.m2).phase().unwrap_or(1.0) * ratio(k.j1))
        }
    }
}

fn factorial_f64(n: i64) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Wigner small-d `d^j_{mp m}(theta)`.
///
/// Explicit alternating sum for `2j <= DSUM_TWICE_LIMIT`; stable recursion in `j` above.
pub fn wigner_d_exact(j: HalfInt, mp: HalfInt, m: HalfInt, theta: f64) -> Result<f64> {
    check_jm(j, mp)?;
    check_jm(j, m)?;
    if j.twice() > DSUM_TWICE_LIMIT {
        let d = wigner_d_matrix(j, theta)?;
        return Ok(d.get(mp, m));
    }
    Ok(d_sum(j, mp, m, theta))
}

fn d_sum(j: HalfInt, mp: HalfInt, m: HalfInt, theta: f64) -> f64 {
    let i = |x: HalfInt| x.to_int().expect("integer combination");
    let (jpm, jmm, jpp, jmp) = (i(j + m), i(j - m), i(j + mp), i(j - mp));
    let dm = i(mp - m);
    let pref = (factorial_f64(jpp) * factorial_f64(jmp) * factorial_f64(jpm) * factorial_f64(jmm)).sqrt();
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let kmin = 0.max(-dm);
    let kmax = jpm.min(jmp);
    let mut sum = 0.0;
    for k in kmin..=kmax {
        let den = factorial_f64(jpm - k) * factorial_f64(k) * factorial_f64(jmp - k) * factorial_f64(k + dm);
        let sign = if (k + dm) % 2 == 0 { 1.0 } else { -1.0 };
        let pc = (j.twice() - 2 * k - dm) as i32;
        let ps = (2 * k + dm) as i32;
        sum += sign * c.powi(pc) * s.powi(ps) / den;
    }
    pref * sum
}

/// Dense `d^j(theta)`, rows `mp = j, j-1, ...`, columns `m = j, j-1, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct DMatrix {
    j: HalfInt,
    data: Vec<f64>,
}

impl DMatrix {
    pub fn dim(&self) -> usize {
        (self.j.twice() + 1) as usize
    }

    pub fn j(&self) -> HalfInt {
        self.j
    }

    fn idx(&self, x: HalfInt) -> usize {
        ((self.j - x).twice() / 2) as usize
    }

    pub fn get(&self, mp: HalfInt, m: HalfInt) -> f64 {
        self.data[self.idx(mp) * self.dim() + self.idx(m)]
    }

    /// Entry by row/column index (`0` is projection `j`).
    pub fn at(&self, a: usize, b: usize) -> f64 {
        self.data[a * self.dim() + b]
    }
}

/// Builds `d^j(theta)` by adding spin 1/2 one step at a time; each step is orthogonal.
pub fn wigner_d_matrix(j: HalfInt, theta: f64) -> Result<DMatrix> {
    if j.twice() < 0 {
        return Err(Error::Domain(format!("negative j = {j}")));
    }
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let start = if j.is_integer() { 0 } else { 1 };
    let mut prev: Vec<f64> = if start == 0 { vec![1.0] } else { vec![c, -s, s, c] };
    let mut n = start as usize + 1;
    for j2 in (start + 1)..=j.twice() {
        let nn = j2 as usize + 1;
        let mut next = vec![0.0; nn * nn];
        let jj = j2 as f64;
        let up = |a: usize| ((jj - a as f64) / jj).sqrt();
        let dn = |a: usize| (a as f64 / jj).sqrt();
        let p = |a: usize, b: usize| prev[a * n + b];
        for a in 0..nn {
            for b in 0..nn {
                let mut v = 0.0;
                if a < n && b < n {
                    v += up(a) * up(b) * p(a, b) * c;
                }
                if a < n && b >= 1 {
                    v -= up(a) * dn(b) * p(a, b - 1) * s;
                }
                if a >= 1 && b < n {
                    v += dn(a) * up(b) * p(a - 1, b) * s;
                }
                if a >= 1 && b >= 1 {
                    v += dn(a) * dn(b) * p(a - 1, b - 1) * c;
                }
                next[a * nn + b] = v;
            }
        }
        prev = next;
        n = nn;
    }
    Ok(DMatrix { j, data: prev })
}

/// `D^j_{mp m} = exp(-i mp phi) d^j_{mp m}(theta) exp(-i m chi)`.
#[allow(non_snake_case)]
pub fn wigner_D(j: HalfInt, mp: HalfInt, m: HalfInt, angles: &EulerAngles) -> Result<Complex64> {
    let d = wigner_d_exact(j, mp, m, angles.theta())?;
    let ph = -mp.value() * angles.phi() - m.value() * angles.chi();
    Ok(Complex64::from_polar(d, ph))
}

/// Complex matrix over a product basis, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    dim: usize,
    entries: Vec<Complex64>,
}

impl DenseOperator {
    pub fn zeros(dim: usize) -> Result<Self> {
        if dim > MAX_DENSE_DIM {
            return Err(Error::Domain(format!("dense dimension {dim} exceeds {MAX_DENSE_DIM}")));
        }
        Ok(DenseOperator { dim, entries: vec![Complex64::zero(); dim * dim] })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut op = Self::zeros(dim)?;
        for i in 0..dim {
            op.entries[i * dim + i] = Complex64::one();
        }
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.entries[r * self.dim + c]
    }

    fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.entries[r * self.dim + c] = v;
    }

    /// `J+` on the `2j+1` states ordered `m = j, j-1, ...`.
    pub fn raising(j: HalfInt) -> Result<Self> {
        let n = (j.twice() + 1) as usize;
        let mut op = Self::zeros(n)?;
        let jv = j.value();
        for a in 1..n {
            let m = jv - a as f64;
            op.set(a - 1, a, Complex64::new((jv * (jv + 1.0) - m * (m + 1.0)).sqrt(), 0.0));
        }
        Ok(op)
    }

    pub fn lowering(j: HalfInt) -> Result<Self> {
        Ok(Self::raising(j)?.adjoint())
    }

    pub fn jz(j: HalfInt) -> Result<Self> {
        let n = (j.twice() + 1) as usize;
        let mut op = Self::zeros(n)?;
        for a in 0..n {
            op.set(a, a, Complex64::new(j.value() - a as f64, 0.0));
        }
        Ok(op)
    }

    pub fn jx(j: HalfInt) -> Result<Self> {
        Ok(Self::raising(j)?.add(&Self::lowering(j)?).scale(Complex64::new(0.5, 0.0)))
    }

    pub fn jy(j: HalfInt) -> Result<Self> {
        let diff = Self::raising(j)?.add(&Self::lowering(j)?.scale(Complex64::new(-1.0, 0.0)));
        Ok(diff.scale(Complex64::new(0.0, -0.5)))
    }

    pub fn adjoint(&self) -> Self {
        let mut out = self.clone();
        for r in 0..self.dim {
            for c in 0..self.dim {
                out.set(r, c, self.get(c, r).conj());
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        DenseOperator { dim: self.dim, entries }
    }

    pub fn scale(&self, k: Complex64) -> Self {
        DenseOperator { dim: self.dim, entries: self.entries.iter().map(|a| a * k).collect() }
    }

    pub fn kron(&self, other: &Self) -> Result<Self> {
        let n = self.dim * other.dim;
        let mut out = Self::zeros(n)?;
        for r1 in 0..self.dim {
            for c1 in 0..self.dim {
                let a = self.get(r1, c1);
                if a.is_zero() {
                    continue;
                }
                for r2 in 0..other.dim {
                    for c2 in 0..other.dim {
                        out.set(r1 * other.dim + r2, c1 * other.dim + c2, a * other.get(r2, c2));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|r| self.entries[r * self.dim..(r + 1) * self.dim].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn expectation(&self, v: &[Complex64]) -> Complex64 {
        let w = self.apply(v);
        v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..self.dim).all(|r| (0..self.dim).all(|c| (self.get(r, c) - self.get(c, r).conj()).norm() <= tol))
    }
}

/// Index of `|j1 m1> (x) |j2 m2>` in the product basis.
pub fn product_index(j1: HalfInt, m1: HalfInt, j2: HalfInt, m2: HalfInt) -> usize {
    let a1 = ((j1 - m1).twice() / 2) as usize;
    let a2 = ((j2 - m2).twice() / 2) as usize;
    a1 * (j2.twice() + 1) as usize + a2
}

/// `|j3 m3>` expanded over `|j1 m1> (x) |j2 m2>`.
pub fn coupled_state_product_basis(j1: HalfInt, j2: HalfInt, j3: HalfInt, m3: HalfInt) -> Result<Vec<Complex64>> {
    if !triangle_ok(j1, j2, j3) || check_jm(j3, m3).is_err() {
        return Err(Error::Selection(format!("no state |{j3} {m3}> in {j1} x {j2}")));
    }
    let dim = ((j1.twice() + 1) * (j2.twice() + 1)) as usize;
    let mut v = vec![Complex64::zero(); dim];
    for m1 in j1.projections() {
        let m2 = m3 - m1;
        if m2.abs() > j2 {
            continue;
        }
        let c = cg_exact(&CGKey::new(j1, m1, j2, m2, j3, m3))?;
        v[product_index(j1, m1, j2, m2)] = Complex64::new(c, 0.0);
    }
    Ok(v)
}

/// Cartesian component selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

fn component(j: HalfInt, axis: Axis) -> Result<DenseOperator> {
    match axis {
        Axis::X => DenseOperator::jx(j),
        Axis::Y => DenseOperator::jy(j),
        Axis::Z => DenseOperator::jz(j),
    }
}

/// `<j3 m3| j1_a j2_a |j3 m3>` with dense product-basis matrices.
pub fn pairwise_expectation(j1: HalfInt, j2: HalfInt, j3: HalfInt, m3: HalfInt, axis: Axis) -> Result<f64> {
    let psi = coupled_state_product_basis(j1, j2, j3, m3)?;
    let n1 = (j1.twice() + 1) as usize;
    let n2 = (j2.twice() + 1) as usize;
    let a1 = component(j1, axis)?.kron(&DenseOperator::identity(n2)?)?;
    let a2 = DenseOperator::identity(n1)?.kron(&component(j2, axis)?)?;
    let w = a1.apply(&a2.apply(&psi));
    Ok(psi.iter().zip(&w).map(|(a, b)| a.conj() * b).sum::<Complex64>().re)
}

/// `<j3 m3| j1X j2X |j3 m3>`, cross-checked against the ladder-operator identity.
pub fn pairwise_xx_expectation(j1: HalfInt, j2: HalfInt, j3: HalfInt, m3: HalfInt) -> Result<f64> {
    let direct = pairwise_expectation(j1, j2, j3, m3, Axis::X)?;
    let psi = coupled_state_product_basis(j1, j2, j3, m3)?;
    let n1 = (j1.twice() + 1) as usize;
    let n2 = (j2.twice() + 1) as usize;
    let pp = DenseOperator::raising(j1)?.kron(&DenseOperator::raising(j2)?)?;
    let mm = DenseOperator::lowering(j1)?.kron(&DenseOperator::lowering(j2)?)?;
    let zz = DenseOperator::jz(j1)?.kron(&DenseOperator::jz(j2)?)?;
    debug_assert_eq!(pp.dim(), n1 * n2);
    let cas = |j: HalfInt| j.value() * (j.value() + 1.0);
    let ladder = (pp.expectation(&psi) + mm.expectation(&psi)).re;
    let via_identity = (cas(j3) - cas(j1) - cas(j2) - 2.0 * zz.expectation(&psi).re + ladder) / 4.0;
    if (direct - via_identity).abs() >= 1e-10 {
        return Err(Error::Consistency(format!("xx correlation {direct} vs identity {via_identity}")));
    }
    Ok(direct)
}
