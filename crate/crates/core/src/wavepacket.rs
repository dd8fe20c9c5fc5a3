//! Gaussian j-wavepackets, particle wavepackets on the sphere, their widths and
//! the rectified-Gaussian orientation correction.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt};
use nalgebra::storage::Owned;
use nalgebra::{Dyn, Matrix3, OMatrix, OVector, SymmetricEigen, Vector3, U3};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{cg_exact, wigner_d_exact, CGKey};
use crate::qnum::{check_jm, theta_m, HalfInt, NormConvention};
use crate::special::{std_normal_cdf, std_normal_pdf};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WavepacketSpec {
    pub j_center: HalfInt,
    pub m_center: HalfInt,
    pub dj: f64,
    pub dm: f64,
    /// Window half-width in units of the corresponding width.
    pub j_cut: f64,
}

impl WavepacketSpec {
    pub const DEFAULT_CUT: f64 = 5.0;
    pub const MIN_CUT: f64 = 4.0;

    pub fn new(j_center: HalfInt, m_center: HalfInt, dj: f64, dm: f64) -> Result<Self> {
        check_jm(j_center, m_center)?;
        if !(dj > 0.0 && dm > 0.0 && dj.is_finite() && dm.is_finite()) {
            return Err(Error::Domain(format!("widths must be positive, got dj = {dj}, dm = {dm}")));
        }
        Ok(WavepacketSpec { j_center, m_center, dj, dm, j_cut: Self::DEFAULT_CUT })
    }

    pub fn with_cut(mut self, j_cut: f64) -> Result<Self> {
        if !(j_cut >= Self::MIN_CUT) {
            return Err(Error::Domain(format!("window cut {j_cut} below {}", Self::MIN_CUT)));
        }
        self.j_cut = j_cut;
        Ok(self)
    }

    /// `J = j + 1/2` of the centre.
    pub fn big_j(&self) -> f64 {
        self.j_center.value() + 0.5
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Term {
    pub j: HalfInt,
    pub m: HalfInt,
    pub weight: f64,
}

/// Coefficient table over `(j', m')`; `norm^2` is the sum of squared weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JWavepacket {
    pub terms: Vec<Term>,
    pub norm: f64,
}

/// One fixed-`j` slice of a packet, `m` descending.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub j: HalfInt,
    pub coeffs: Vec<(HalfInt, f64)>,
}

impl JWavepacket {
    pub fn from_terms(terms: Vec<Term>) -> Result<Self> {
        let mut kept = Vec::with_capacity(terms.len());
        for t in terms {
            check_jm(t.j, t.m)?;
            if !(t.weight >= 0.0 && t.weight.is_finite()) {
                return Err(Error::Domain(format!("weight {} for ({}, {})", t.weight, t.j, t.m)));
            }
            if t.weight > 0.0 {
                kept.push(t);
            }
        }
        kept.sort_by(|a, b| a.j.cmp(&b.j).then(b.m.cmp(&a.m)));
        kept.dedup_by(|a, b| a.j == b.j && a.m == b.m);
        let norm = kept.iter().map(|t| t.weight * t.weight).sum::<f64>().sqrt();
        if kept.is_empty() || norm == 0.0 {
            return Err(Error::EmptyPacket);
        }
        Ok(JWavepacket { terms: kept, norm })
    }

    pub fn single(j: HalfInt, m: HalfInt) -> Result<Self> {
        Self::from_terms(vec![Term { j, m, weight: 1.0 }])
    }

    pub fn blocks(&self) -> Vec<Block> {
        let mut out: Vec<Block> = Vec::new();
        for t in &self.terms {
            match out.last_mut() {
                Some(b) if b.j == t.j => b.coeffs.push((t.m, t.weight)),
                _ => out.push(Block { j: t.j, coeffs: vec![(t.m, t.weight)] }),
            }
        }
        out
    }

    pub fn is_integer(&self) -> bool {
        self.terms.iter().all(|t| t.j.is_integer())
    }

    /// `<J>` with the packet normalized.
    pub fn mean_j(&self) -> [f64; 3] {
        let n2 = self.norm * self.norm;
        let (mut jx, mut jz) = (0.0, 0.0);
        for b in self.blocks() {
            let jj = b.j.value() * (b.j.value() + 1.0);
            for w in b.coeffs.windows(2) {
                let ((m_hi, c_hi), (m_lo, c_lo)) = (w[0], w[1]);
                if m_hi - m_lo == HalfInt::ONE {
                    let m = m_lo.value();
                    jx += c_hi * c_lo * (jj - m * (m + 1.0)).sqrt();
                }
            }
            jz += b.coeffs.iter().map(|&(m, c)| c * c * m.value()).sum::<f64>();
        }
        [jx / n2, 0.0, jz / n2]
    }

    /// Unit vector along `<J>`; `z` when the transverse part vanishes and `<Jz>` too.
    pub fn mean_direction(&self) -> [f64; 3] {
        let v = self.mean_j();
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n == 0.0 {
            return [0.0, 0.0, 1.0];
        }
        [v[0] / n, v[1] / n, v[2] / n]
    }
}

/// Gaussian weights over the window, clamped at the physical boundaries.
pub fn build_j_wavepacket(spec: &WavepacketSpec) -> Result<JWavepacket> {
    let kj = (spec.j_cut * spec.dj).floor() as i64;
    let km = (spec.j_cut * spec.dm).floor() as i64;
    let mut terms = Vec::new();
    for dj in -kj..=kj {
        let j = spec.j_center + HalfInt::int(dj);
        if j.twice() < 0 {
            continue;
        }
        let wj = (-(dj as f64 / (2.0 * spec.dj)).powi(2)).exp();
        for dm in -km..=km {
            let m = spec.m_center + HalfInt::int(dm);
            if m.abs() > j {
                continue;
            }
            let w = wj * (-(dm as f64 / (2.0 * spec.dm)).powi(2)).exp();
            if w > 0.0 {
                terms.push(Term { j, m, weight: w });
            }
        }
    }
    JWavepacket::from_terms(terms)
}

/// `(theta, phi)` nodes with quadrature weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereGrid {
    theta: Vec<f64>,
    theta_weight: Vec<f64>,
    phi: Vec<f64>,
}

impl SphereGrid {
    pub const DEFAULT_THETA: usize = 181;
    pub const DEFAULT_PHI: usize = 360;

    /// Midpoint rule in `cos(theta)`, uniform periodic rule in `phi`.
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < 2 || n_phi < 4 {
            return Err(Error::Domain(format!("grid {n_theta} x {n_phi} too small")));
        }
        let h = 2.0 / n_theta as f64;
        let theta = (0..n_theta).map(|i| (1.0 - (i as f64 + 0.5) * h).acos()).collect();
        Ok(SphereGrid { theta, theta_weight: vec![h; n_theta], phi: uniform_phi(n_phi) })
    }

    /// Uniform nodes on `[lo, hi]` in theta, trapezoid weights `sin(theta) dtheta`.
    pub fn band(lo: f64, hi: f64, n_theta: usize, n_phi: usize) -> Result<Self> {
        if !(0.0 <= lo && lo < hi && hi <= PI) || n_theta < 2 || n_phi < 4 {
            return Err(Error::Domain(format!("bad band [{lo}, {hi}] with {n_theta} x {n_phi}")));
        }
        let h = (hi - lo) / (n_theta - 1) as f64;
        let theta: Vec<f64> = (0..n_theta).map(|i| lo + i as f64 * h).collect();
        let theta_weight = theta
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let end = i == 0 || i == n_theta - 1;
                t.sin() * h * if end { 0.5 } else { 1.0 }
            })
            .collect();
        Ok(SphereGrid { theta, theta_weight, phi: uniform_phi(n_phi) })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn dphi(&self) -> f64 {
        TAU / self.phi.len() as f64
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.theta_weight[i] * self.dphi()
    }

    pub fn len(&self) -> usize {
        self.theta.len() * self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Default for SphereGrid {
    fn default() -> Self {
        SphereGrid::new(Self::DEFAULT_THETA, Self::DEFAULT_PHI).expect("default grid")
    }
}

fn uniform_phi(n: usize) -> Vec<f64> {
    (0..n).map(|k| TAU * k as f64 / n as f64).collect()
}

/// Values on a [`SphereGrid`], row-major with theta outer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngularDensity {
    pub grid: SphereGrid,
    pub values: Vec<f64>,
    /// Quadrature integral before any normalization.
    pub raw_integral: f64,
}

impl AngularDensity {
    pub fn new(grid: SphereGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Domain(format!("{} values for {} nodes", values.len(), grid.len())));
        }
        let mut d = AngularDensity { grid, values, raw_integral: 0.0 };
        d.raw_integral = d.integral();
        Ok(d)
    }

    pub fn value(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.grid.phi.len() + k]
    }

    pub fn integral(&self) -> f64 {
        let np = self.grid.phi.len();
        (0..self.grid.theta.len()).map(|i| self.grid.weight(i) * self.values[i * np..(i + 1) * np].iter().sum::<f64>()).sum()
    }

    /// Probability density in theta, `sin(theta) * integral over phi`.
    pub fn theta_marginal(&self) -> Vec<(f64, f64)> {
        let np = self.grid.phi.len();
        let dphi = self.grid.dphi();
        self.grid
            .theta
            .iter()
            .enumerate()
            .map(|(i, &t)| (t, t.sin() * dphi * self.values[i * np..(i + 1) * np].iter().sum::<f64>()))
            .collect()
    }

    /// Node of the largest value, `(theta, phi)`.
    pub fn argmax(&self) -> (f64, f64) {
        let (idx, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let np = self.grid.phi.len();
        (self.grid.theta[idx / np], self.grid.phi[idx % np])
    }

    /// Bilinear interpolation; phi is periodic, theta is clamped to the node range.
    pub fn interpolate(&self, theta: f64, phi: f64) -> f64 {
        let th = &self.grid.theta;
        let np = self.grid.phi.len();
        let asc = th[0] < th[th.len() - 1];
        let pos = th.partition_point(|&t| if asc { t < theta } else { t > theta });
        let (i0, i1, ft) = if pos == 0 {
            (0, 0, 0.0)
        } else if pos >= th.len() {
            (th.len() - 1, th.len() - 1, 0.0)
        } else {
            (pos - 1, pos, (theta - th[pos - 1]) / (th[pos] - th[pos - 1]))
        };
        let x = phi.rem_euclid(TAU) / self.grid.dphi();
        let k0 = (x.floor() as usize) % np;
        let k1 = (k0 + 1) % np;
        let fp = x - x.floor();
        let row = |i: usize| self.value(i, k0) * (1.0 - fp) + self.value(i, k1) * fp;
        row(i0) * (1.0 - ft) + row(i1) * ft
    }

    /// Unit normal of the best-fit plane through the origin (smallest second moment).
    pub fn plane_normal(&self) -> [f64; 3] {
        let np = self.grid.phi.len();
        let mut m = Matrix3::<f64>::zeros();
        for (i, &t) in self.grid.theta.iter().enumerate() {
            let w = self.grid.weight(i);
            let (st, ct) = t.sin_cos();
            for (k, &p) in self.grid.phi.iter().enumerate() {
                let (sp, cp) = p.sin_cos();
                let r = Vector3::new(st * cp, st * sp, ct);
                m += r * r.transpose() * (w * self.values[i * np + k]);
            }
        }
        let eig = SymmetricEigen::new(m);
        let k = eig.eigenvalues.imin();
        let v = eig.eigenvectors.column(k);
        [v[0], v[1], v[2]]
    }
}

/// `P_l^mu(x)` scaled so that `Y_l^mu = P e^{i mu phi}` (Condon-Shortley), for `l = mu..=lmax`.
pub fn normalized_legendre(mu: usize, lmax: usize, x: f64) -> Vec<f64> {
    if lmax < mu {
        return Vec::new();
    }
    let s = (1.0 - x * x).max(0.0).sqrt();
    // seed carried as sign * exp(log)
    let mut log_seed = -0.5 * (4.0 * PI).ln();
    for k in 1..=mu {
        log_seed += 0.5 * ((2 * k + 1) as f64 / (2 * k) as f64).ln();
    }
    let sign = if mu % 2 == 1 { -1.0 } else { 1.0 };
    if mu > 0 {
        if s == 0.0 {
            return vec![0.0; lmax - mu + 1];
        }
        log_seed += mu as f64 * s.ln();
    }
    const BIG: f64 = 1e200;
    let mut out = Vec::with_capacity(lmax - mu + 1);
    let mut scale = log_seed;
    let (mut prev, mut cur) = (0.0, 1.0);
    out.push((cur, scale));
    let m2 = (mu * mu) as f64;
    let mut a_prev = 0.0;
    for l in (mu + 1)..=lmax {
        let l2 = (l * l) as f64;
        let a = ((4.0 * l2 - 1.0) / (l2 - m2)).sqrt();
        let next = if l == mu + 1 { a * x * cur } else { a * (x * cur - prev / a_prev) };
        prev = cur;
        cur = next;
        a_prev = a;
        if cur.abs() > BIG {
            prev /= BIG;
            cur /= BIG;
            scale += BIG.ln();
        }
        out.push((cur, scale));
    }
    out.into_iter().map(|(v, sc)| if v == 0.0 { 0.0 } else { sign * v * sc.exp() }).collect()
}

/// `Y_l^m(theta, phi)` for integer `l`, `m`.
pub fn spherical_harmonic(l: i64, m: i64, theta: f64, phi: f64) -> Result<Complex64> {
    if l < 0 || m.abs() > l {
        return Err(Error::Domain(format!("Y({l}, {m}) undefined")));
    }
    let mu = m.unsigned_abs() as usize;
    let p = normalized_legendre(mu, l as usize, theta.cos())[l as usize - mu];
    let p = if m < 0 && mu % 2 == 1 { -p } else { p };
    Ok(Complex64::from_polar(p, m as f64 * phi))
}

/// Complex amplitudes of one `j` block, `m` descending.
#[derive(Debug, Clone, PartialEq)]
pub struct AmpBlock {
    pub j: HalfInt,
    pub amps: Vec<(HalfInt, Complex64)>,
}

/// A state as complex amplitudes over `(j, m)`, not necessarily normalized.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Amplitudes {
    pub blocks: Vec<AmpBlock>,
}

impl Amplitudes {
    pub fn norm_sqr(&self) -> f64 {
        self.blocks.iter().flat_map(|b| b.amps.iter()).map(|(_, a)| a.norm_sqr()).sum()
    }

    pub fn is_integer(&self) -> bool {
        self.blocks.iter().all(|b| b.j.is_integer())
    }

    /// Largest coefficient difference against `other` over the union of labels.
    pub fn max_abs_diff(&self, other: &Amplitudes) -> f64 {
        let mut map: BTreeMap<(HalfInt, HalfInt), Complex64> = BTreeMap::new();
        for b in &self.blocks {
            for &(m, a) in &b.amps {
                *map.entry((b.j, m)).or_default() += a;
            }
        }
        for b in &other.blocks {
            for &(m, a) in &b.amps {
                *map.entry((b.j, m)).or_default() -= a;
            }
        }
        map.values().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl From<&JWavepacket> for Amplitudes {
    fn from(p: &JWavepacket) -> Self {
        let blocks = p
            .blocks()
            .into_iter()
            .map(|b| AmpBlock { j: b.j, amps: b.coeffs.iter().map(|&(m, c)| (m, Complex64::new(c, 0.0))).collect() })
            .collect();
        Amplitudes { blocks }
    }
}

/// Particle wavefunction: per `m`, the `(l, amplitude)` pairs and the largest `l` per `|m|`.
struct Harmonics {
    by_m: BTreeMap<i64, Vec<(usize, Complex64)>>,
    lmax: BTreeMap<usize, usize>,
    norm_sqr: f64,
}

impl Harmonics {
    fn new(a: &Amplitudes) -> Result<Self> {
        if !a.is_integer() {
            return Err(Error::Domain("particle wavepacket needs integer j".into()));
        }
        let mut by_m: BTreeMap<i64, Vec<(usize, Complex64)>> = BTreeMap::new();
        let mut lmax: BTreeMap<usize, usize> = BTreeMap::new();
        for b in &a.blocks {
            let l = b.j.to_int().expect("integer j") as usize;
            for &(m, c) in &b.amps {
                let m = m.to_int().expect("integer m");
                by_m.entry(m).or_default().push((l, c));
                let e = lmax.entry(m.unsigned_abs() as usize).or_insert(0);
                *e = (*e).max(l);
            }
        }
        let norm_sqr = a.norm_sqr();
        if !(norm_sqr > 0.0) {
            return Err(Error::EmptyPacket);
        }
        Ok(Harmonics { by_m, lmax, norm_sqr })
    }

    /// theta-dependent factor of each `m` component, in key order.
    fn profile(&self, theta: f64) -> Vec<(i64, Complex64)> {
        let x = theta.cos();
        let cols: BTreeMap<usize, Vec<f64>> =
            self.lmax.iter().map(|(&mu, &lm)| (mu, normalized_legendre(mu, lm, x))).collect();
        self.by_m
            .iter()
            .map(|(&m, terms)| {
                let mu = m.unsigned_abs() as usize;
                let sg = if m < 0 && mu % 2 == 1 { -1.0 } else { 1.0 };
                (m, sg * terms.iter().map(|&(l, c)| c * cols[&mu][l - mu]).sum::<Complex64>())
            })
            .collect()
    }
}

/// Normalized `|psi(theta, phi)|^2` at a single point.
pub fn particle_value(a: &Amplitudes, theta: f64, phi: f64) -> Result<f64> {
    let h = Harmonics::new(a)?;
    let psi: Complex64 = h.profile(theta).into_iter().map(|(m, f)| f * Complex64::from_polar(1.0, m as f64 * phi)).sum();
    Ok(psi.norm_sqr() / h.norm_sqr)
}

/// `|sum_{j'm'} w Y_{j'}^{m'}|^2`, divided by the quadrature integral.
pub fn particle_density(packet: &JWavepacket, grid: &SphereGrid) -> Result<AngularDensity> {
    particle_density_amps(&packet.into(), grid)
}

pub fn particle_density_amps(a: &Amplitudes, grid: &SphereGrid) -> Result<AngularDensity> {
    let h = Harmonics::new(a)?;
    let np = grid.phi.len();
    let phases: Vec<Vec<Complex64>> = h
        .by_m
        .keys()
        .map(|&m| grid.phi.iter().map(|&p| Complex64::from_polar(1.0, m as f64 * p)).collect())
        .collect();
    let mut values = vec![0.0; grid.len()];
    for (i, &t) in grid.theta.iter().enumerate() {
        let f = h.profile(t);
        for k in 0..np {
            let psi: Complex64 = f.iter().zip(&phases).map(|(&(_, fm), ph)| ph[k] * fm).sum();
            values[i * np + k] = psi.norm_sqr() / h.norm_sqr;
        }
    }
    let mut d = AngularDensity::new(grid.clone(), values)?;
    let s = d.raw_integral;
    if !(s > 0.0) {
        return Err(Error::EmptyPacket);
    }
    d.values.iter_mut().for_each(|v| *v /= s);
    Ok(d)
}

/// Normalized `|psi|^2` at `n` equally spaced azimuths on the circle `theta = pi/2`.
pub fn particle_equator(a: &Amplitudes, n: usize) -> Result<Vec<(f64, f64)>> {
    let h = Harmonics::new(a)?;
    let f = h.profile(PI / 2.0);
    Ok((0..n)
        .map(|k| {
            let p = TAU * k as f64 / n as f64;
            let psi: Complex64 = f.iter().map(|&(m, fm)| fm * Complex64::from_polar(1.0, m as f64 * p)).sum();
            (p, psi.norm_sqr() / h.norm_sqr)
        })
        .collect())
}

/// `d^j_{m j}(theta)` for `m = j, j-1, ..., -j`.
pub fn stretched_column(j: HalfInt, theta: f64) -> Vec<f64> {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let tj = j.twice();
    let lg = |n: i64| libm::lgamma(n as f64 + 1.0);
    let plog = |x: f64, n: i64| if n == 0 { 0.0 } else { n as f64 * x.abs().ln() };
    (0..=tj)
        .map(|k| {
            // m = j - k: exponents j+m = 2j - k, j-m = k
            let (a, b) = (tj - k, k);
            let sign = if c < 0.0 && a % 2 == 1 { -1.0 } else { 1.0 };
            sign * (0.5 * (lg(tj) - lg(a) - lg(b)) + plog(c, a) + plog(s, b)).exp()
        })
        .collect()
}

/// Stretched-state population along `(theta, phi)`, blocks summed with their weights.
pub fn q_value(packet: &JWavepacket, theta: f64, phi: f64) -> f64 {
    q_value_amps(&packet.into(), theta, phi)
}

pub fn q_value_amps(a: &Amplitudes, theta: f64, phi: f64) -> f64 {
    QEvaluator::new(a).value(theta, phi)
}

struct QBlock {
    twice_j: i64,
    /// `ln sqrt(binom(2j, k))` for `k = j - m`
    half_log_binom: Vec<f64>,
    /// `(k, m, amplitude)`
    amps: Vec<(i64, f64, Complex64)>,
}

/// Stretched-state overlaps with the binomial factors precomputed.
pub struct QEvaluator {
    blocks: Vec<QBlock>,
    norm_sqr: f64,
}

impl QEvaluator {
    pub fn new(a: &Amplitudes) -> Self {
        let lg = |n: i64| libm::lgamma(n as f64 + 1.0);
        let blocks = a
            .blocks
            .iter()
            .map(|b| {
                let tj = b.j.twice();
                QBlock {
                    twice_j: tj,
                    half_log_binom: (0..=tj).map(|k| 0.5 * (lg(tj) - lg(k) - lg(tj - k))).collect(),
                    amps: b.amps.iter().map(|&(m, c)| ((b.j - m).twice() / 2, m.value(), c)).collect(),
                }
            })
            .collect();
        QEvaluator { blocks, norm_sqr: a.norm_sqr() }
    }

    pub fn value(&self, theta: f64, phi: f64) -> f64 {
        let (lc, ls) = ((theta / 2.0).cos().abs().ln(), (theta / 2.0).sin().abs().ln());
        let pow = |l: f64, n: i64| if n == 0 { 0.0 } else { n as f64 * l };
        let mut total = 0.0;
        for b in &self.blocks {
            let mut amp = Complex64::new(0.0, 0.0);
            for &(k, m, c) in &b.amps {
                let d = (b.half_log_binom[k as usize] + pow(lc, b.twice_j - k) + pow(ls, k)).exp();
                amp += c * Complex64::from_polar(d, m * phi);
            }
            total += amp.norm_sqr();
        }
        total / self.norm_sqr
    }
}

pub fn q_distribution(packet: &JWavepacket, grid: &SphereGrid) -> Result<AngularDensity> {
    q_distribution_amps(&packet.into(), grid)
}

pub fn q_distribution_amps(a: &Amplitudes, grid: &SphereGrid) -> Result<AngularDensity> {
    let mut values = Vec::with_capacity(grid.len());
    for &t in &grid.theta {
        for &p in &grid.phi {
            values.push(q_value_amps(a, t, p));
        }
    }
    AngularDensity::new(grid.clone(), values)
}

/// Same population from the multipole moments of a single-`j` density matrix.
pub fn q_value_moments(packet: &JWavepacket, theta: f64, phi: f64) -> Result<f64> {
    let blocks = packet.blocks();
    let [b] = blocks.as_slice() else {
        return Err(Error::Domain("moment expansion needs a single-j packet".into()));
    };
    let j = b.j;
    let n2 = packet.norm * packet.norm;
    let mut q = Complex64::new(0.0, 0.0);
    for k in 0..=j.twice() {
        let kk = HalfInt::int(k);
        let stretched = cg_exact(&CGKey::new(j, j, j, -j, kk, HalfInt::ZERO))?;
        for qq in kk.projections() {
            // rho_kq = sum rho_{m m'} (-1)^{j-m'} <j m, j -m' | k q>
            let mut rho = 0.0;
            for &(m, cm) in &b.coeffs {
                for &(mp, cmp) in &b.coeffs {
                    if m - mp != qq {
                        continue;
                    }
                    let w = cg_exact(&CGKey::new(j, m, j, -mp, kk, qq))?;
                    rho += cm * cmp / n2 * (j - mp).phase()? * w;
                }
            }
            if rho == 0.0 {
                continue;
            }
            let d = wigner_d_exact(kk, qq, HalfInt::ZERO, theta)?;
            q += Complex64::from_polar(rho * stretched * d, qq.value() * phi);
        }
    }
    Ok(q.re)
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}

fn scan_then_refine(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    let best = (0..=n).map(|i| lo + i as f64 * h).fold((lo, f64::NEG_INFINITY), |acc, x| {
        let v = f(x);
        if v > acc.1 {
            (x, v)
        } else {
            acc
        }
    });
    golden_max(&f, (best.0 - h).max(lo), (best.0 + h).min(hi), 1e-10)
}

/// Polar angle maximizing `Q(theta, 0)`.
pub fn q_polar_peak(packet: &JWavepacket) -> f64 {
    let q = QEvaluator::new(&packet.into());
    scan_then_refine(|t| q.value(t, 0.0), 0.0, PI, 720)
}

/// Direction of the Q maximum, `(theta, phi)`.
pub fn q_lobe_direction(packet: &JWavepacket) -> (f64, f64) {
    q_lobe_direction_amps(&packet.into())
}

pub fn q_lobe_direction_amps(a: &Amplitudes) -> (f64, f64) {
    let ev = QEvaluator::new(a);
    let (nt, np) = (30, 60);
    let mut best = (0.0, 0.0, f64::NEG_INFINITY);
    for i in 0..=nt {
        let t = PI * i as f64 / nt as f64;
        for k in 0..np {
            let p = TAU * k as f64 / np as f64;
            let v = ev.value(t, p);
            if v > best.2 {
                best = (t, p, v);
            }
        }
    }
    // Newton steps in a tangent plane at the best node, free of the pole singularity
    let n0 = Vector3::from(direction(best.0, best.1));
    let seed = if n0[2].abs() < 0.9 { Vector3::z() } else { Vector3::x() };
    let e1 = n0.cross(&seed).normalize();
    let e2 = n0.cross(&e1);
    let point = |x: f64, y: f64| (n0 + e1 * x + e2 * y).normalize();
    let q = |x: f64, y: f64| {
        let r = point(x, y);
        ev.value(r[2].clamp(-1.0, 1.0).acos(), r[1].atan2(r[0]))
    };
    let span = PI / nt as f64;
    let (hg, hh) = (1e-5, 1e-3);
    let (mut x, mut y) = (0.0, 0.0);
    for _ in 0..40 {
        let g = [(q(x + hg, y) - q(x - hg, y)) / (2.0 * hg), (q(x, y + hg) - q(x, y - hg)) / (2.0 * hg)];
        let q0 = q(x, y);
        let hxx = (q(x + hh, y) - 2.0 * q0 + q(x - hh, y)) / (hh * hh);
        let hyy = (q(x, y + hh) - 2.0 * q0 + q(x, y - hh)) / (hh * hh);
        let hxy = (q(x + hh, y + hh) - q(x + hh, y - hh) - q(x - hh, y + hh) + q(x - hh, y - hh)) / (4.0 * hh * hh);
        let det = hxx * hyy - hxy * hxy;
        let (mut dx, mut dy) = if hxx < 0.0 && det > 0.0 {
            (-(hyy * g[0] - hxy * g[1]) / det, -(hxx * g[1] - hxy * g[0]) / det)
        } else {
            // not locally concave: line search along the gradient
            let gn = (g[0] * g[0] + g[1] * g[1]).sqrt().max(f64::MIN_POSITIVE);
            let (ux, uy) = (g[0] / gn, g[1] / gn);
            let s = golden_max(|s| q(x + s * ux, y + s * uy), 0.0, span, 1e-12);
            (s * ux, s * uy)
        };
        let len = (dx * dx + dy * dy).sqrt();
        if len > span {
            dx *= span / len;
            dy *= span / len;
        }
        x += dx;
        y += dy;
        if len < 1e-12 {
            break;
        }
    }
    let r = point(x, y);
    (r[2].clamp(-1.0, 1.0).acos(), r[1].atan2(r[0]).rem_euclid(TAU))
}

pub fn direction(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    [st * phi.cos(), st * phi.sin(), ct]
}

/// Angle between two axes, ignoring orientation.
pub fn axis_angle(a: [f64; 3], b: [f64; 3]) -> f64 {
    let na = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    let nb = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
    let d = (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]) / (na * nb);
    d.abs().min(1.0).acos()
}

/// Angle-operator spread of the azimuth, window centred on the mean azimuth.
pub fn width_phi(packet: &JWavepacket) -> f64 {
    let n2 = packet.norm * packet.norm;
    let blocks = packet.blocks();
    // <e^{i phi}> = sum c_m c_{m-1}
    let mut e1 = 0.0;
    for b in &blocks {
        for w in b.coeffs.windows(2) {
            if w[0].0 - w[1].0 == HalfInt::ONE {
                e1 += w[0].1 * w[1].1;
            }
        }
    }
    let phi0 = if (e1 / n2).abs() < 1e-14 { 0.0 } else { 0.0_f64.atan2(e1) };
    let (mut u1, mut u2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for b in &blocks {
        for &(m, cm) in &b.coeffs {
            for &(mp, cmp) in &b.coeffs {
                let w = cm * cmp / n2;
                if m == mp {
                    u2 += w * PI * PI / 3.0;
                    continue;
                }
                let k = ((mp - m).twice() / 2) as i32;
                let alt = if k % 2 == 0 { 1.0 } else { -1.0 };
                let kf = k as f64;
                let ph = Complex64::from_polar(w, kf * phi0);
                u1 += ph * Complex64::new(0.0, -alt / kf);
                u2 += ph * (2.0 * alt / (kf * kf));
            }
        }
    }
    (u2.re - u1.re * u1.re).max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussFit {
    pub amplitude: f64,
    pub center: f64,
    pub sigma: f64,
    pub r_squared: f64,
}

pub const MIN_R_SQUARED: f64 = 0.9;

struct GaussProblem<'a> {
    x: &'a [f64],
    y: &'a [f64],
    p: Vector3<f64>,
}

impl LeastSquaresProblem<f64, Dyn, U3> for GaussProblem<'_> {
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, U3>;
    type ParameterStorage = Owned<f64, U3>;

    fn set_params(&mut self, p: &Vector3<f64>) {
        self.p = *p;
    }

    fn params(&self) -> Vector3<f64> {
        self.p
    }

    fn residuals(&self) -> Option<OVector<f64, Dyn>> {
        let (a, x0, s) = (self.p[0], self.p[1], self.p[2]);
        Some(OVector::<f64, Dyn>::from_iterator(
            self.x.len(),
            self.x.iter().zip(self.y).map(|(&x, &y)| a * (-(x - x0).powi(2) / (2.0 * s * s)).exp() - y),
        ))
    }

    fn jacobian(&self) -> Option<OMatrix<f64, Dyn, U3>> {
        let (a, x0, s) = (self.p[0], self.p[1], self.p[2]);
        let mut jac = OMatrix::<f64, Dyn, U3>::zeros(self.x.len());
        for (r, &x) in self.x.iter().enumerate() {
            let u = x - x0;
            let e = (-u * u / (2.0 * s * s)).exp();
            jac[(r, 0)] = e;
            jac[(r, 1)] = a * e * u / (s * s);
            jac[(r, 2)] = a * e * u * u / (s * s * s);
        }
        Some(jac)
    }
}

/// Least-squares fit of `a exp(-(x-x0)^2 / (2 s^2))`.
pub fn fit_gaussian(x: &[f64], y: &[f64]) -> Result<GaussFit> {
    if x.len() != y.len() || x.len() < 4 {
        return Err(Error::Fit(format!("need at least 4 paired points, got {} and {}", x.len(), y.len())));
    }
    let (imax, &ymax) = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    if !(ymax > 0.0) {
        return Err(Error::Fit("no positive data".into()));
    }
    let x0 = x[imax];
    let (mut sw, mut sv) = (0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        if yi > 0.1 * ymax {
            sw += yi;
            sv += yi * (xi - x0).powi(2);
        }
    }
    let s0 = (sv / sw).sqrt().max(1e-6);
    let problem = GaussProblem { x, y, p: Vector3::new(ymax, x0, s0) };
    let (done, report) = LevenbergMarquardt::new().with_tol(1e-14).minimize(problem);
    if !report.termination.was_successful() {
        return Err(Error::Fit(format!("least squares did not converge: {:?}", report.termination)));
    }
    let p = done.p;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = done.residuals().expect("residuals").iter().map(|r| r * r).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 0.0 };
    let fit = GaussFit { amplitude: p[0], center: p[1], sigma: p[2].abs(), r_squared };
    if r_squared < MIN_R_SQUARED {
        return Err(Error::Fit(format!("R^2 = {r_squared:.4} below {MIN_R_SQUARED}")));
    }
    Ok(fit)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitAxis {
    /// Theta marginal.
    Theta,
    /// Great circle perpendicular to `normal`, angle measured from the density peak.
    ChiGreatCircle { normal: [f64; 3] },
}

pub const CHI_NODES: usize = 720;

pub fn width_fit(density: &AngularDensity, axis: FitAxis) -> Result<GaussFit> {
    match axis {
        FitAxis::Theta => {
            let (x, y): (Vec<f64>, Vec<f64>) = density.theta_marginal().into_iter().unzip();
            fit_gaussian(&x, &y)
        }
        FitAxis::ChiGreatCircle { normal } => {
            let (x, y) = great_circle_section(density, normal)?;
            fit_gaussian(&x, &y)
        }
    }
}

/// Density sampled on the circle perpendicular to `normal`, starting at the peak's projection.
pub fn great_circle_section(density: &AngularDensity, normal: [f64; 3]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = Vector3::from(normal);
    if n.norm() == 0.0 {
        return Err(Error::Domain("zero normal".into()));
    }
    let n = n.normalize();
    let (t, p) = density.argmax();
    let peak = Vector3::from(direction(t, p));
    let mut u = peak - n * n.dot(&peak);
    if u.norm() < 1e-12 {
        // peak on the axis: any perpendicular will do
        u = n.cross(&Vector3::new(1.0, 0.0, 0.0));
        if u.norm() < 1e-12 {
            u = n.cross(&Vector3::new(0.0, 1.0, 0.0));
        }
    }
    let u = u.normalize();
    let v = n.cross(&u);
    let mut xs = Vec::with_capacity(CHI_NODES);
    let mut ys = Vec::with_capacity(CHI_NODES);
    for k in 0..CHI_NODES {
        let chi = -PI + TAU * k as f64 / CHI_NODES as f64;
        let r = u * chi.cos() + v * chi.sin();
        let th = r[2].clamp(-1.0, 1.0).acos();
        let ph = r[1].atan2(r[0]);
        xs.push(chi);
        ys.push(density.interpolate(th, ph));
    }
    Ok((xs, ys))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Width large enough for the equality form to be expected.
    Equality,
    /// Below the threshold; only the inequality is expected.
    Inequality,
}

impl Regime {
    fn at_least(x: f64, threshold: f64) -> Self {
        if x >= threshold {
            Regime::Equality
        } else {
            Regime::Inequality
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Products {
    pub dm_dphi: f64,
    pub dj_dchi: f64,
    pub jsin_dtheta_dphi: f64,
    /// `(J sin theta_m) dtheta / dm`
    pub jsin_dtheta_over_dm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Flags {
    pub dm_dphi: Regime,
    pub dj_dchi: Regime,
    pub jsin_dtheta_dphi: Regime,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WidthReport {
    pub d_phi: f64,
    pub d_theta: f64,
    pub d_chi: f64,
    pub products: Products,
    pub flags: Flags,
    pub theta_fit: GaussFit,
    pub chi_fit: GaussFit,
}

pub const DPHI_THRESHOLD: f64 = 0.5;
pub const DCHI_THRESHOLD: f64 = 2.0;
pub const DTHETA_THRESHOLD: f64 = 1.0;

pub fn uncertainty_report(spec: &WavepacketSpec, packet: &JWavepacket, density: &AngularDensity) -> Result<WidthReport> {
    let d_phi = width_phi(packet);
    let theta_fit = width_fit(density, FitAxis::Theta)?;
    let chi_fit = width_fit(density, FitAxis::ChiGreatCircle { normal: packet.mean_direction() })?;
    let jsin = spec.big_j() * theta_m(spec.j_center, spec.m_center, NormConvention::JPlusHalf)?.sin();
    let products = Products {
        dm_dphi: spec.dm * d_phi,
        dj_dchi: spec.dj * chi_fit.sigma,
        jsin_dtheta_dphi: jsin * theta_fit.sigma * d_phi,
        jsin_dtheta_over_dm: jsin * theta_fit.sigma / spec.dm,
    };
    let flags = Flags {
        dm_dphi: Regime::at_least(spec.dm, DPHI_THRESHOLD),
        dj_dchi: Regime::at_least(spec.dj, DCHI_THRESHOLD),
        jsin_dtheta_dphi: Regime::at_least(spec.dm, DTHETA_THRESHOLD),
    };
    Ok(WidthReport { d_phi, d_theta: theta_fit.sigma, d_chi: chi_fit.sigma, products, flags, theta_fit, chi_fit })
}

/// Moments of a clamped Gaussian in units of `dm`, and the corrected mean, spread and angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rectified {
    pub mu: f64,
    pub sigma: f64,
    pub mean: f64,
    pub sd: f64,
    pub theta_bar: f64,
}

/// Mass outside `[-j, j]` is piled onto the nearer bound.
pub fn rectified_stats(j: HalfInt, m: HalfInt, dm: f64, conv: NormConvention) -> Result<Rectified> {
    check_jm(j, m)?;
    if !(dm > 0.0 && dm.is_finite()) {
        return Err(Error::Domain(format!("dm = {dm} must be positive")));
    }
    let (jv, mv) = (j.value(), m.value());
    let a = (-jv - mv) / dm;
    let b = (jv - mv) / dm;
    let (g, cdf) = (std_normal_pdf, std_normal_cdf);
    let mu = g(a) - g(b) + a * cdf(a) + b * cdf(-b);
    let var = (mu * mu + 1.0) * (cdf(b) - cdf(a)) - (b - 2.0 * mu) * g(b) + (a - 2.0 * mu) * g(a)
        + (a - mu).powi(2) * cdf(a)
        + (b - mu).powi(2) * cdf(-b);
    let sigma = var.max(0.0).sqrt();
    let mean = mv + mu * dm;
    let len = conv.length(j);
    if len == 0.0 {
        return Err(Error::Domain("orientation undefined for j = 0".into()));
    }
    Ok(Rectified { mu, sigma, mean, sd: sigma * dm, theta_bar: (mean / len).clamp(-1.0, 1.0).acos() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationCheck {
    pub name: &'static str,
    pub expected: f64,
    pub value: f64,
    pub error: f64,
    pub error_half_step: f64,
    /// `error / error_half_step`; close to 4 for second-order differences.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorReport {
    pub j: HalfInt,
    pub m: HalfInt,
    pub big_j: f64,
    pub theta_m: f64,
    pub h: f64,
    pub relations: Vec<RelationCheck>,
}

const CHECK_POINTS: [f64; 4] = [0.3, 1.8, 3.3, 4.8];

/// Applies the reduced differential operators, with theta frozen at `theta_m`, to
/// `exp(i(m phi + J chi))` by central differences at steps `h` and `h/2`.
pub fn vmw_operator_check(j: HalfInt, m: HalfInt, h: f64) -> Result<OperatorReport> {
    check_jm(j, m)?;
    if !(h > 1e-4 && h < 0.1) {
        return Err(Error::Domain(format!("step {h} outside (1e-4, 0.1)")));
    }
    let big_j = j.value() + 0.5;
    let mv = m.value();
    let th = theta_m(j, m, NormConvention::JPlusHalf)?;
    let (s, c) = th.sin_cos();
    let f = |p: f64, x: f64| Complex64::from_polar(1.0, mv * p + big_j * x);
    let i = Complex64::i();
    type Rel = (&'static str, f64, fn(Complex64) -> f64);
    let rels: [Rel; 5] = [
        ("J^2", big_j * big_j, |z| z.re),
        ("J_Z", mv, |z| z.re),
        ("j_z'", big_j, |z| z.re),
        ("J_pm", (big_j * big_j - mv * mv).sqrt(), |z| z.re),
        ("j_mp", 0.0, |z| z.norm()),
    ];
    // each relation's value at every check point for a given step
    let eval = |h: f64| -> Vec<Vec<Complex64>> {
        let mut out = vec![Vec::new(); 5];
        for &p in &CHECK_POINTS {
            for &x in &CHECK_POINTS {
                let f0 = f(p, x);
                let dp = (f(p + h, x) - f(p - h, x)) / (2.0 * h);
                let dx = (f(p, x + h) - f(p, x - h)) / (2.0 * h);
                let dpp = (f(p + h, x) - 2.0 * f0 + f(p - h, x)) / (h * h);
                let dxx = (f(p, x + h) - 2.0 * f0 + f(p, x - h)) / (h * h);
                let dpx = (f(p + h, x + h) - f(p + h, x - h) - f(p - h, x + h) + f(p - h, x - h)) / (4.0 * h * h);
                out[0].push(-(dpp + dxx - 2.0 * c * dpx) / (s * s) / f0);
                out[1].push(-i * dp / f0);
                out[2].push(-i * dx / f0);
                // the e^{+-i phi} factor is the shift to m +- 1 and divides out
                out[3].push(i * (c / s * dp - dx / s) / f0);
                // likewise e^{+-i chi}
                out[4].push(-i * (c / s * dx - dp / s) / f0);
            }
        }
        out
    };
    let (full, half) = (eval(h), eval(h / 2.0));
    let relations = rels
        .iter()
        .enumerate()
        .map(|(r, &(name, expected, part))| {
            let err = |vals: &[Complex64]| {
                vals.iter().map(|&z| if expected == 0.0 { z.norm() } else { (z - expected).norm() }).fold(0.0, f64::max)
            };
            let (e1, e2) = (err(&full[r]), err(&half[r]));
            RelationCheck { name, expected, value: part(full[r][0]), error: e1, error_half_step: e2, ratio: e1 / e2 }
        })
        .collect();
    Ok(OperatorReport { j, m, big_j, theta_m: th, h, relations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn h(n: i64) -> HalfInt {
        HalfInt::int(n)
    }

    #[test]
    fn build_limits() {
        let s = WavepacketSpec::new(h(6), h(2), 1e-3, 1e-3).unwrap();
        let p = build_j_wavepacket(&s).unwrap();
        assert_eq!(p.terms.len(), 1);
        assert_eq!((p.terms[0].j, p.terms[0].m), (h(6), h(2)));
        let s = WavepacketSpec::new(h(10), h(10), 1e-3, 3.0).unwrap();
        let p = build_j_wavepacket(&s).unwrap();
        assert!(p.terms.iter().all(|t| t.m <= h(10)));
        assert!(p.terms.len() > 5);
        assert!(WavepacketSpec::new(h(1), h(0), 0.0, 1.0).is_err());
    }

    #[test]
    fn legendre_matches_closed_forms() {
        let (t, p) = (0.7, 1.3);
        let y10 = spherical_harmonic(1, 0, t, p).unwrap();
        assert_abs_diff_eq!(y10.re, (3.0 / (4.0 * PI)).sqrt() * t.cos(), epsilon = 1e-14);
        let y11 = spherical_harmonic(1, 1, t, p).unwrap();
        let want = -(3.0 / (8.0 * PI)).sqrt() * t.sin();
        assert_abs_diff_eq!(y11.re, want * p.cos(), epsilon = 1e-14);
        assert_abs_diff_eq!(y11.im, want * p.sin(), epsilon = 1e-14);
        let y2m2 = spherical_harmonic(2, -2, t, p).unwrap();
        let want = 0.25 * (15.0 / (2.0 * PI)).sqrt() * t.sin().powi(2);
        assert_abs_diff_eq!(y2m2.re, want * (2.0 * p).cos(), epsilon = 1e-14);
        assert_abs_diff_eq!(y2m2.im, -want * (2.0 * p).sin(), epsilon = 1e-14);
        let y1m1 = spherical_harmonic(1, -1, t, 0.0).unwrap();
        assert_abs_diff_eq!(y1m1.re, -y11.re / p.cos(), epsilon = 1e-14);
    }

    #[test]
    fn legendre_addition_theorem() {
        for &x in &[0.9, 0.1, -0.99, 0.999_999] {
            let l = 150usize;
            let mut sum = 0.0;
            for mu in 0..=l {
                let v = normalized_legendre(mu, l, x)[l - mu];
                sum += if mu == 0 { v * v } else { 2.0 * v * v };
            }
            assert_abs_diff_eq!(sum, (2 * l + 1) as f64 / (4.0 * PI), epsilon = 1e-10);
        }
    }

    #[test]
    fn stretched_column_matches_exact() {
        for tj in 0..9 {
            let j = HalfInt::from_twice(tj);
            for &t in &[0.0, 0.4, 1.7, PI] {
                let col = stretched_column(j, t);
                for (k, m) in j.projections().enumerate() {
                    assert_abs_diff_eq!(col[k], wigner_d_exact(j, m, j, t).unwrap(), epsilon = 1e-13);
                }
            }
        }
    }

    #[test]
    fn single_l_density() {
        let p = JWavepacket::single(h(1), h(0)).unwrap();
        let d = particle_density(&p, &SphereGrid::default()).unwrap();
        assert_abs_diff_eq!(d.raw_integral, 1.0, epsilon = 1e-4);
        assert_abs_diff_eq!(d.integral(), 1.0, epsilon = 1e-14);
        let (t, _) = d.argmax();
        assert!(t < 0.15 || t > PI - 0.15);
        let half = JWavepacket::single(HalfInt::HALF, HalfInt::HALF).unwrap();
        assert!(particle_density(&half, &SphereGrid::default()).is_err());
    }

    #[test]
    fn q_simple_states() {
        let p = JWavepacket::single(h(3), h(3)).unwrap();
        assert_abs_diff_eq!(q_value(&p, 0.0, 0.0), 1.0, epsilon = 1e-14);
        assert!(q_polar_peak(&p) < 1e-6);
        let p = JWavepacket::single(h(3), h(1)).unwrap();
        assert_abs_diff_eq!(q_value(&p, 0.8, 0.0), q_value(&p, 0.8, 2.1), epsilon = 1e-14);
    }

    #[test]
    fn q_moments_agree() {
        let s = WavepacketSpec::new(h(4), h(1), 1e-3, 1.5).unwrap();
        let p = build_j_wavepacket(&s).unwrap();
        for &(t, ph) in &[(0.3, 0.0), (1.2, 0.7), (2.5, 4.0)] {
            assert_abs_diff_eq!(q_value(&p, t, ph), q_value_moments(&p, t, ph).unwrap(), epsilon = 1e-12);
        }
    }

    #[test]
    fn uniform_angle_spread() {
        let p = JWavepacket::single(h(5), h(2)).unwrap();
        assert_abs_diff_eq!(width_phi(&p), PI / 3f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn fit_recovers_gaussian() {
        let x: Vec<f64> = (0..400).map(|i| -1.0 + i as f64 * 0.005).collect();
        let y: Vec<f64> = x.iter().map(|&v| 2.5 * (-(v - 0.2f64).powi(2) / (2.0 * 0.01)).exp()).collect();
        let f = fit_gaussian(&x, &y).unwrap();
        assert_abs_diff_eq!(f.sigma, 0.1, epsilon = 1e-6);
        assert_abs_diff_eq!(f.center, 0.2, epsilon = 1e-6);
        let flat = vec![1.0; x.len()];
        let mut bumpy = flat.clone();
        bumpy[10] = 1.5;
        assert!(fit_gaussian(&x, &bumpy).is_err());
    }

    #[test]
    fn rectified_symmetric() {
        let r = rectified_stats(h(50), h(0), 3.0, NormConvention::JPlusHalf).unwrap();
        assert_abs_diff_eq!(r.mu, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.sigma, 1.0, epsilon = 1e-12);
        let r = rectified_stats(h(10), h(10), 3.0, NormConvention::JPlusHalf).unwrap();
        assert!(r.mean < 10.0);
    }

    #[test]
    fn operator_eigenvalues() {
        let r = vmw_operator_check(h(10), h(3), 0.01).unwrap();
        assert_abs_diff_eq!(r.relations[0].value, 110.25, epsilon = 0.1);
        assert_abs_diff_eq!(r.relations[3].value, 101.25f64.sqrt(), epsilon = 0.05);
        for rel in &r.relations {
            assert!((3.5..=4.5).contains(&rel.ratio), "{rel:?}");
        }
    }
}
