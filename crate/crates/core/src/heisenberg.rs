//! Heisenberg manifolds H_3/Gamma_l and H_5/Gamma_l with the standard
//! orthonormal metric.
//!
//! The spectrum splits into a vertical part (Landau levels over the nonzero
//! dual vectors mu = 2 l |k| of the centre) and the spectrum of the flat base
//! torus. The determinant is the torus determinant times e^{-zeta_V'(0)}, and
//! zeta_V'(0) is a log-weighted integral of an explicit function.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::analytic::{log_weighted_integral, Integrand, IntegrandKind, Method, QuadResult};
use crate::error::{Error, Result};
use crate::fm::{self, Kahan, PI};
use crate::product::SpectralData;
use crate::result::DetResult;
use crate::specfun::{
    coeff_table, double_factorial, gamma, gen_binomial, hurwitz_zeta, rational_to_f64, CoeffKind, Rational,
};
use crate::tori::{det_t2, det_t4_diagonal, Lattice, T2Params, TorusSpectrum};

/// Heat coefficients carried by the spectral types (enough for the oracle).
const HEAT_TERMS: usize = 8;
/// Trace sums stop once the Gaussian factor is below e^{-EXP_CUTOFF}.
const EXP_CUTOFF: f64 = 80.0;
/// Allowed disagreement between the two W_k evaluations.
const W_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HeisenbergDim {
    Three,
    Five,
}

impl HeisenbergDim {
    pub fn value(self) -> usize {
        match self {
            HeisenbergDim::Three => 3,
            HeisenbergDim::Five => 5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HeisenbergParams {
    pub dim: HeisenbergDim,
    pub ell: u32,
}

impl HeisenbergParams {
    pub fn new(dim: HeisenbergDim, ell: u32) -> Result<Self> {
        if ell == 0 {
            return Err(Error::Input("ell must be a positive integer"));
        }
        Ok(Self { dim, ell })
    }

    pub fn three(ell: u32) -> Result<Self> {
        Self::new(HeisenbergDim::Three, ell)
    }

    pub fn five(ell: u32) -> Result<Self> {
        Self::new(HeisenbergDim::Five, ell)
    }

    fn base_dim(&self) -> usize {
        self.dim.value() - 1
    }

    fn base_torus(&self) -> TorusSpectrum {
        TorusSpectrum::new(Lattice::identity(self.base_dim()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BucketKind {
    /// Landau levels over a nonzero dual vector of the centre.
    Vertical,
    /// Eigenvalues of the base torus.
    Toral,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenvalueBucket {
    pub value: f64,
    pub multiplicity: f64,
    pub kind: BucketKind,
}

/// c_k in int k(t; x, x) dx ~ (4 pi t)^{-n/2} sum_k c_k t^k.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeatCoefficient {
    pub k: usize,
    pub value: f64,
}

impl HeatCoefficient {
    /// From the residue of the spectral zeta function at n/2 - k.
    fn from_residue(k: usize, n: usize, residue: f64) -> Self {
        let h = n as f64 / 2.0;
        let value = fm::powf(4.0 * PI, h) * gamma(h - k as f64) * residue;
        Self { k, value }
    }

    /// Residue of the spectral zeta function at n/2 - k.
    pub fn zeta_residue(&self, n: usize) -> f64 {
        let h = n as f64 / 2.0;
        self.value / (fm::powf(4.0 * PI, h) * gamma(h - self.k as f64))
    }
}

fn require_dim(p: &HeisenbergParams, dim: HeisenbergDim) -> Result<()> {
    if p.dim != dim {
        return Err(Error::Input("wrong Heisenberg dimension for this operation"));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// spectrum

/// All eigenvalues in (0, cutoff], ascending. The zero mode is not listed.
pub fn spectrum(p: &HeisenbergParams, cutoff: f64) -> Result<Vec<EigenvalueBucket>> {
    if !(cutoff > 0.0) || !cutoff.is_finite() {
        return Err(Error::Domain("spectrum cutoff must be positive and finite"));
    }
    let mut out = vertical_buckets(p, cutoff);
    out.extend(toral_buckets(p.base_dim(), cutoff));
    out.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(out)
}

pub fn h3_spectrum(p: &HeisenbergParams, cutoff: f64) -> Result<Vec<EigenvalueBucket>> {
    require_dim(p, HeisenbergDim::Three)?;
    spectrum(p, cutoff)
}

pub fn h5_spectrum(p: &HeisenbergParams, cutoff: f64) -> Result<Vec<EigenvalueBucket>> {
    require_dim(p, HeisenbergDim::Five)?;
    spectrum(p, cutoff)
}

// Both signs of k are folded into one bucket. In dimension 5 the level
// depends on m1 + m2 = M only and there are M + 1 such pairs.
fn vertical_buckets(p: &HeisenbergParams, cutoff: f64) -> Vec<EigenvalueBucket> {
    let five = p.dim == HeisenbergDim::Five;
    let mut out = Vec::new();
    let mut k = 1u64;
    loop {
        let mu = 2.0 * p.ell as f64 * k as f64;
        let base = 4.0 * PI * PI * mu * mu;
        let ground = if five { 2.0 } else { 1.0 };
        if base + 2.0 * PI * ground * mu > cutoff {
            break;
        }
        let mut m = 0u64;
        loop {
            let (osc, degeneracy) = if five {
                (2.0 * (m as f64 + 1.0), mu * mu * (m as f64 + 1.0))
            } else {
                (2.0 * m as f64 + 1.0, mu)
            };
            let value = base + 2.0 * PI * osc * mu;
            if value > cutoff {
                break;
            }
            out.push(EigenvalueBucket { value, multiplicity: 2.0 * degeneracy, kind: BucketKind::Vertical });
            m += 1;
        }
        k += 1;
    }
    out
}

// Counts of integer vectors by squared length, grouped into buckets.
fn toral_buckets(dim: usize, cutoff: f64) -> Vec<EigenvalueBucket> {
    let q_max = fm::floor(cutoff / (4.0 * PI * PI)) as usize;
    let counts = lattice_counts(dim, q_max);
    counts
        .iter()
        .enumerate()
        .skip(1)
        .filter(|&(_, &c)| c > 0)
        .map(|(q, &c)| EigenvalueBucket {
            value: 4.0 * PI * PI * q as f64,
            multiplicity: c as f64,
            kind: BucketKind::Toral,
        })
        .collect()
}

/// Number of n in Z^dim with |n|^2 = q, for q = 0 ..= q_max.
fn lattice_counts(dim: usize, q_max: usize) -> Vec<u64> {
    let r = fm::floor(fm::sqrt(q_max as f64)) as i64;
    let mut counts = vec![0u64; q_max + 1];
    counts[0] = 1;
    for _ in 0..dim {
        let mut next = vec![0u64; q_max + 1];
        for (q, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for n in -r..=r {
                let q2 = q + (n * n) as usize;
                if q2 <= q_max {
                    next[q2] += c;
                }
            }
        }
        counts = next;
    }
    counts
}

// ---------------------------------------------------------------------------
// heat traces

/// Z_V(t), the vertical part of the heat trace, summed over k with the
/// oscillator sums done in closed form.
pub fn vertical_trace(p: &HeisenbergParams, t: f64) -> f64 {
    let mut acc = Kahan::new();
    let mut k = 1u64;
    loop {
        let mu = 2.0 * p.ell as f64 * k as f64;
        let gauss = 4.0 * PI * PI * mu * mu * t;
        if gauss > EXP_CUTOFF {
            break;
        }
        // sum_m e^{-2 pi (2m+1) mu t}
        let osc = fm::exp(-2.0 * PI * mu * t) / -fm::expm1(-4.0 * PI * mu * t);
        let term = match p.dim {
            HeisenbergDim::Three => 2.0 * mu * osc * fm::exp(-gauss),
            HeisenbergDim::Five => 2.0 * mu * mu * osc * osc * fm::exp(-gauss),
        };
        acc.add(term);
        k += 1;
    }
    acc.value()
}

/// Full heat trace Z_V(t) + Z_torus(t), zero mode included.
pub fn heat_trace(p: &HeisenbergParams, t: f64) -> f64 {
    vertical_trace(p, t) + p.base_torus().trace(t)
}

/// Laplace spectrum of H_n/Gamma_l.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeisenbergSpectrum {
    pub params: HeisenbergParams,
}

impl HeisenbergSpectrum {
    pub fn new(params: HeisenbergParams) -> Self {
        Self { params }
    }
}

fn as_pairs(buckets: &[EigenvalueBucket]) -> impl Iterator<Item = (f64, u64)> + '_ {
    buckets.iter().map(|b| (b.value, fm::round(b.multiplicity) as u64))
}

impl SpectralData for HeisenbergSpectrum {
    fn dim(&self) -> usize {
        self.params.dim.value()
    }

    fn eigenvalues(&self, lambda_max: f64) -> Vec<(f64, u64)> {
        let mut out = vec![(0.0, 1)];
        if let Ok(b) = spectrum(&self.params, lambda_max) {
            out.extend(as_pairs(&b));
        }
        out
    }

    // The t^{-(n-1)/2} term of Z_V cancels against the torus, so only the
    // c_k survive in the full trace.
    fn heat_coeffs(&self) -> Option<Vec<f64>> {
        heat_coefficients(&self.params, HEAT_TERMS).ok()
    }

    fn trace(&self, t: f64) -> f64 {
        heat_trace(&self.params, t)
    }
}

/// The vertical part alone, padded with a unit zero mode so that the
/// oracle's zero-mode convention applies; its zeta function is zeta_V.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerticalSpectrum {
    pub params: HeisenbergParams,
}

impl VerticalSpectrum {
    pub fn new(params: HeisenbergParams) -> Self {
        Self { params }
    }
}

impl SpectralData for VerticalSpectrum {
    fn dim(&self) -> usize {
        self.params.dim.value()
    }

    fn eigenvalues(&self, lambda_max: f64) -> Vec<(f64, u64)> {
        let mut out = vec![(0.0, 1)];
        if lambda_max > 0.0 {
            let mut b = vertical_buckets(&self.params, lambda_max);
            b.sort_by(|x, y| x.value.total_cmp(&y.value));
            out.extend(as_pairs(&b));
        }
        out
    }

    fn heat_coeffs(&self) -> Option<Vec<f64>> {
        heat_coefficients(&self.params, HEAT_TERMS).ok()
    }

    fn heat_asymptotics(&self) -> Option<Vec<(f64, f64)>> {
        let n = self.dim() as f64;
        let pre = fm::powf(4.0 * PI, -n / 2.0);
        let mut a: Vec<(f64, f64)> = self
            .heat_coeffs()?
            .iter()
            .enumerate()
            .map(|(i, &c)| (i as f64 - n / 2.0, pre * c))
            .collect();
        // Z_V = (1/l) int_0^inf (...) dmu - g(0): the missing k = 0 term
        let b = (n - 1.0) / 2.0;
        a.push((-b, -fm::powf(4.0 * PI, -b)));
        a.push((0.0, 1.0));
        Some(a)
    }

    fn trace(&self, t: f64) -> f64 {
        1.0 + vertical_trace(&self.params, t)
    }
}

/// zeta_V(s) for s > 3/2 in dimension 3 from the double Dirichlet series
/// 4l sum_n sum_m n (4 pi l)^{-2s} (n^2 + n(2m+1)/(4 pi l))^{-s}.
///
/// The m-sum is a Hurwitz zeta value; the n-sum is done directly up to
/// N - 1 and its tail from the large-argument expansion of the Hurwitz zeta.
pub fn h3_vertical_zeta_series(ell: u32, s: f64) -> Result<f64> {
    if ell == 0 {
        return Err(Error::Input("ell must be a positive integer"));
    }
    if !(s > 1.5) {
        return Err(Error::Domain("the double series converges only for s > 3/2"));
    }
    const N: usize = 64;
    let l = ell as f64;
    let c = 2.0 * PI * l;
    let pre = 4.0 * l * fm::powf(4.0 * PI * l, -2.0 * s) * fm::powf(c, s);
    let mut acc = Kahan::new();
    for n in 1..N {
        let nf = n as f64;
        acc.add(fm::powf(nf, 1.0 - s) * hurwitz_zeta(s, c * nf + 0.5)?);
    }
    // zeta(s, a) ~ sum_j e_j a^{-p_j}, a = c n + 1/2,
    // a^{-p} = (c n)^{-p} sum_i C(-p, i) (2 c n)^{-i}
    let mut expansion: Vec<(f64, f64)> = vec![(1.0 / (s - 1.0), s - 1.0), (0.5, s)];
    let b2k = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0];
    let mut rising = s;
    let mut fact = 2.0;
    for (j, b) in b2k.iter().enumerate() {
        let k2 = 2.0 * (j + 1) as f64;
        expansion.push((b / fact * rising, s + k2 - 1.0));
        rising *= (s + k2 - 1.0) * (s + k2);
        fact *= (k2 + 1.0) * (k2 + 2.0);
    }
    for &(e, p) in &expansion {
        let mut scale = e * fm::powf(c, -p);
        for i in 0..14 {
            let q = s - 1.0 + p + i as f64;
            acc.add(scale * gen_binomial(-p, i) * hurwitz_zeta(q, N as f64)?);
            scale /= 2.0 * c;
        }
    }
    Ok(pre * acc.value())
}

// ---------------------------------------------------------------------------
// J_r, W_k, W_{i,j}

// J_r = a_r + b_r pi/4 with rational a_r, b_r.
fn j_exact(r_max: usize) -> Vec<(Rational, Rational)> {
    let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(r_max + 1);
    out.push((Rational::zero(), Rational::one()));
    for r in 1..=r_max {
        let mut a = Rational::zero();
        let mut b = Rational::zero();
        let mut binom = BigInt::one();
        for (i, (ai, bi)) in out.iter().enumerate() {
            let cb = Rational::from_integer(binom.clone());
            let frac = Rational::new(BigInt::from(r - i), BigInt::from(r * (2 * i + 1)));
            a += &cb * (frac - ai);
            b -= &cb * bi;
            binom = binom * BigInt::from(r - i) / BigInt::from(i + 1);
        }
        out.push((a, b));
    }
    out
}

fn j_value(ab: &(Rational, Rational)) -> f64 {
    rational_to_f64(&ab.0) + rational_to_f64(&ab.1) * PI / 4.0
}

/// J_r = int_0^1 theta^{2r}/(1 + theta^2) dtheta from the binomial recursion,
/// run in exact arithmetic on the rational and pi/4 parts.
pub fn j_r(r: usize) -> f64 {
    j_value(&j_exact(r)[r])
}

// sum_{r<k} (-1)^r/(r - k + 1/2) + (-1)^k pi/2
fn w_finite_part(k: usize) -> f64 {
    let mut acc = 0.0;
    for r in 0..k {
        let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign / (r as f64 - k as f64 + 0.5);
    }
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    acc + sign * PI / 2.0
}

/// W_k via J_r: the tail int_0^1 v^{k-1/2}/(1+v) dv equals 2 J_k.
pub fn w_k_closed(k: usize) -> f64 {
    w_finite_part(k) + 2.0 * j_r(k)
}

/// W_k via the alternating series sum_j (-1)^j/(j + k + 1/2), summed with
/// the Cohen-Rodriguez Villegas-Zagier acceleration.
pub fn w_k_series(k: usize) -> f64 {
    w_finite_part(k) + alternating_sum(&|j| 1.0 / (j as f64 + k as f64 + 0.5), 30)
}

// sum_{j>=0} (-1)^j a(j) for a totally monotone sequence a
fn alternating_sum(a: &dyn Fn(usize) -> f64, n: usize) -> f64 {
    let mut d = fm::powf(3.0 + fm::sqrt(8.0), n as f64);
    d = (d + 1.0 / d) / 2.0;
    let mut b = -1.0;
    let mut c = -d;
    let mut s = 0.0;
    for k in 0..n {
        c = b - c;
        s += c * a(k);
        let kf = k as f64;
        let nf = n as f64;
        b *= (kf + nf) * (kf - nf) / ((kf + 0.5) * (kf + 1.0));
    }
    s / d
}

/// W_k = W_{0,k}(3/2 - k), the continuation of int_0^1 (1 + v^{2k}) v^{s-2}/(1+v) dv.
///
/// Both evaluations are computed and the series value returned.
pub fn w_k(k: usize) -> Result<f64> {
    let series = w_k_series(k);
    let closed = w_k_closed(k);
    let diff = fm::abs(series - closed);
    if !(diff <= W_TOL * f64::max(1.0, fm::abs(series))) {
        return Err(Error::Inconsistent { what: "W_k series and J_r forms", diff });
    }
    Ok(series)
}

/// Partial-fraction form of int_0^1 (1+v)^{2i} (1 + v^{2j}) v^{s-2}/(1+v) dv
/// for i >= 1:
/// sum_{r=0}^{2i-1} C(2i-1, r) (1/(r+s-1) + 1/(r+2j+s-1)).
pub fn w_ij(i: usize, j: usize, s: f64) -> Result<f64> {
    if i == 0 {
        return Err(Error::Domain("the partial-fraction form needs i >= 1"));
    }
    let n = 2 * i - 1;
    let mut acc = 0.0;
    let mut binom = 1.0;
    for r in 0..=n {
        let rf = r as f64;
        acc += binom * (1.0 / (rf + s - 1.0) + 1.0 / (rf + 2.0 * j as f64 + s - 1.0));
        binom *= (n - r) as f64 / (r + 1) as f64;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// heat coefficients

fn check_ell(ell: u32) -> Result<()> {
    if ell == 0 {
        return Err(Error::Input("ell must be a positive integer"));
    }
    Ok(())
}

fn sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// c_k for H_3/Gamma_l. The residue of zeta_V at 3/2 - k is
/// (-1)^k beta_{2k} W_k / (16 pi^2 l Gamma(3/2-k) Gamma(1/2-k)).
pub fn h3_heat_coefficient(k: usize, ell: u32) -> Result<HeatCoefficient> {
    check_ell(ell)?;
    let beta = rational_to_f64(&coeff_table(CoeffKind::Beta, k).values[k]);
    let kf = k as f64;
    let residue = sign(k) * beta * w_k(k)? / (16.0 * PI * PI * ell as f64 * gamma(1.5 - kf) * gamma(0.5 - kf));
    Ok(HeatCoefficient::from_residue(k, 3, residue))
}

/// The displayed residue 4 pi/(Gamma(3/2-k)Gamma(1/2-k)) beta_{2k}/(2(4 pi l)^2) W_k,
/// kept for comparison. It differs from the true residue by (-1)^k 2 pi / l.
pub fn h3_heat_coefficient_displayed(k: usize, ell: u32) -> Result<f64> {
    check_ell(ell)?;
    let beta = rational_to_f64(&coeff_table(CoeffKind::Beta, k).values[k]);
    let kf = k as f64;
    let l4 = 4.0 * PI * ell as f64;
    Ok(4.0 * PI / (gamma(1.5 - kf) * gamma(0.5 - kf)) * beta / (2.0 * l4 * l4) * w_k(k)?)
}

/// c_k for H_5/Gamma_l. The residue of zeta_V at 5/2 - k is
/// (2k-5)!!(2k-1)!!/2^{2k+4} * (-1)^k delta_k W_k / (pi^4 l).
pub fn h5_heat_coefficient(k: usize, ell: u32) -> Result<HeatCoefficient> {
    Ok(HeatCoefficient::from_residue(k, 5, h5_heat_coefficient_displayed(k, ell)? / PI))
}

/// The displayed (2k-5)!!(2k-1)!!/2^{2k+4} (-1)^k/(pi^3 l) delta_k W_k,
/// which is pi times the residue of zeta_V at 5/2 - k.
pub fn h5_heat_coefficient_displayed(k: usize, ell: u32) -> Result<f64> {
    check_ell(ell)?;
    let delta = rational_to_f64(&coeff_table(CoeffKind::Delta, k).values[k]);
    let k2 = 2 * k as i64;
    let df = double_factorial(k2 - 5)? * double_factorial(k2 - 1)?;
    let pow = fm::powi(2.0, 2 * k as i32 + 4);
    Ok(df / pow * sign(k) / (PI * PI * PI * ell as f64) * delta * w_k(k)?)
}

/// Log-spaced fit window for c_k from the trace. Its upper end keeps the
/// correction e^{-L^2/4t} from the fibre of length L = 1/(2l) below 1e-18;
/// the default [1e-3, 1e-2] window of the oracle is too wide here.
pub fn heat_fit_window(p: &HeisenbergParams) -> (f64, f64) {
    let fibre = 1.0 / (2.0 * p.ell as f64);
    let hi = fibre * fibre / (4.0 * 42.0);
    (hi / 15.0, hi)
}

/// c_0 ..= c_{n-1} for either dimension.
pub fn heat_coefficients(p: &HeisenbergParams, n: usize) -> Result<Vec<f64>> {
    (0..n)
        .map(|k| match p.dim {
            HeisenbergDim::Three => h3_heat_coefficient(k, p.ell).map(|c| c.value),
            HeisenbergDim::Five => h5_heat_coefficient(k, p.ell).map(|c| c.value),
        })
        .collect()
}

// ---------------------------------------------------------------------------
// determinants

fn cross_checked(f: &Integrand, k: usize, r: f64) -> Result<QuadResult> {
    let jet = log_weighted_integral(f, k, Method::JetDirect)?;
    let sub = log_weighted_integral(f, k, Method::Subtraction { r })?;
    let dev = fm::abs(jet.value - sub.value);
    Ok(QuadResult {
        value: jet.value,
        error_estimate: jet.error_estimate + dev,
        evaluations: jet.evaluations + sub.evaluations,
    })
}

/// The split point at which the boundary terms of the dimension-5 limit
/// integral cancel: r^4 = 48.
pub fn h5_split_point() -> f64 {
    2.0 * fm::powf(3.0, 0.25)
}

/// int_0^inf d^4/du^4 {h(u/2)^2 (h(u/(4 pi l)) + 1)} log u du, h(x) = x/sinh x.
pub fn h3_integral(ell: u32) -> Result<QuadResult> {
    check_ell(ell)?;
    cross_checked(&Integrand::h3(ell), 4, 2.0)
}

/// R_0 = -4 pi l * h3_integral(l).
pub fn h3_r0(ell: u32) -> Result<QuadResult> {
    let i = h3_integral(ell)?;
    let f = -4.0 * PI * ell as f64;
    Ok(QuadResult { value: f * i.value, error_estimate: fm::abs(f) * i.error_estimate, evaluations: i.evaluations })
}

/// zeta_V'(0) = l R_0 / 3 for H_3/Gamma_l.
pub fn h3_zeta_v_prime0(ell: u32) -> Result<QuadResult> {
    let r0 = h3_r0(ell)?;
    let f = ell as f64 / 3.0;
    Ok(QuadResult { value: f * r0.value, error_estimate: f * r0.error_estimate, evaluations: r0.evaluations })
}

/// log Det of H_3/Gamma_l: the unit square torus plus (4 pi l^2/3) I.
pub fn h3_log_det(ell: u32) -> Result<DetResult> {
    let zv = h3_zeta_v_prime0(ell)?;
    let torus = det_t2(&T2Params::new(0.0, 1.0)?);
    Ok(DetResult::new(torus.log_det - zv.value)
        .with_term("torus_factor", torus.log_det)
        .with_term("exponent_term", -zv.value)
        .with_error(torus.error_estimate + zv.error_estimate))
}

/// zeta_V'(0) = -(8/15) pi^2 l^4 int_0^inf d^6/du^6 {...} log u du for H_5/Gamma_l.
pub fn h5_zeta_v_prime0(ell: u32) -> Result<QuadResult> {
    check_ell(ell)?;
    let i = cross_checked(&Integrand::h5(ell), 6, h5_split_point())?;
    let l2 = ell as f64 * ell as f64;
    let f = -(8.0 / 15.0) * PI * PI * l2 * l2;
    Ok(QuadResult { value: f * i.value, error_estimate: fm::abs(f) * i.error_estimate, evaluations: i.evaluations })
}

/// log Det of H_5/Gamma_l: the unit diagonal T^4 minus zeta_V'(0).
pub fn h5_log_det(ell: u32) -> Result<DetResult> {
    let zv = h5_zeta_v_prime0(ell)?;
    let torus = det_t4_diagonal()?;
    Ok(DetResult::new(torus.log_det - zv.value)
        .with_term("torus_factor", torus.log_det)
        .with_term("exponent_term", -zv.value)
        .with_error(torus.error_estimate + zv.error_estimate))
}

pub fn log_det(p: &HeisenbergParams) -> Result<DetResult> {
    match p.dim {
        HeisenbergDim::Three => h3_log_det(p.ell),
        HeisenbergDim::Five => h5_log_det(p.ell),
    }
}

/// int_0^inf d^6/du^6 {F} log u du, F = h(u/2)^3 cosh(u/2), in the split form
/// 4!/r^5 - 1/(2r) - 5! int_0^r (F - 1 + u^4/240) u^{-6} du - 5! int_r^inf F u^{-6} du.
pub fn h5_limit_split_form(r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain("split point must be positive"));
    }
    let taylor = Integrand::new(IntegrandKind::H5Limit).jet::<31>(0.0).c;
    let big_f = |u: f64| {
        let x = u / 2.0;
        let h = x / fm::sinh(x);
        h * h * h * fm::cosh(x)
    };
    // below 1/2 the subtracted integrand comes from the Maclaurin series
    let small = |u: f64| -> f64 {
        let mut acc = 0.0;
        for j in (6..31).rev() {
            acc = acc * u + taylor[j] / 2.0;
        }
        acc
    };
    let inner = |u: f64| {
        if u < 0.5 {
            small(u)
        } else {
            (big_f(u) - 1.0 + fm::powi(u, 4) / 240.0) * fm::powi(u, -6)
        }
    };
    let outer = |u: f64| big_f(u) * fm::powi(u, -6);
    let i_inner = crate::oracle::quad(&inner, 0.0, r)?;
    let mut i_outer = Kahan::new();
    let mut a = r;
    while a < 400.0 {
        let b = f64::max(2.0 * a, a + 1.0);
        i_outer.add(crate::oracle::quad(&outer, a, b)?);
        a = b;
    }
    Ok(24.0 / fm::powi(r, 5) - 0.5 / r - 120.0 * (i_inner + i_outer.value()))
}
