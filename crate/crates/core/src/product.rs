//! Determinants of product manifolds.
//!
//! For M x N with eigenvalues lambda_m of M and heat trace k_N of N,
//!
//!   zeta_{MxN}(s) = Q_0(s) + sum_i b_i G_M(s + i - N/2) / ((4 pi)^{N/2} Gamma(s)) + zeta_N(s)
//!
//! with G_M(w) = Gamma(w) zeta_M(w) and b_i the heat coefficients of N. Q_0 is
//! holomorphic and its derivative at 0 is a sum over the spectrum of M; the
//! middle sum (Q_1) needs G_M at the shifted points, pole-subtracted where
//! G_M has a pole.

use alloc::vec::Vec;

use crate::analytic::adaptive_quad_abs;
use crate::error::{Error, Result};
use crate::fm::{self, Kahan, PI};
use crate::oracle;
use crate::result::DetResult;
use crate::specfun::{bessel_k, gamma, gen_binomial, riemann_zeta, EULER_GAMMA};
use crate::tori::{det_t2, zeta_t2, T2Params};

/// What the product formulas and the oracle need to know about a manifold.
pub trait SpectralData {
    fn dim(&self) -> usize;

    /// Eigenvalues up to `lambda_max` with multiplicities, ascending, the
    /// zero mode `(0.0, 1)` first.
    fn eigenvalues(&self, lambda_max: f64) -> Vec<(f64, u64)>;

    /// c_i in trace(t) ~ (4 pi t)^{-dim/2} sum c_i t^i, when known.
    fn heat_coeffs(&self) -> Option<Vec<f64>> {
        None
    }

    /// (power, coefficient) pairs of the small-t expansion of the trace.
    fn heat_asymptotics(&self) -> Option<Vec<(f64, f64)>> {
        let d = self.dim() as f64;
        let pre = fm::powf(4.0 * PI, -d / 2.0);
        self.heat_coeffs()
            .map(|c| c.iter().enumerate().map(|(i, &ci)| (i as f64 - d / 2.0, pre * ci)).collect())
    }

    /// Heat trace including the zero mode.
    fn trace(&self, t: f64) -> f64 {
        let mut acc = Kahan::new();
        for (lambda, mult) in self.eigenvalues(46.0 / t) {
            acc.add(mult as f64 * fm::exp(-lambda * t));
        }
        acc.value()
    }

    fn zeta(&self, _s: f64) -> Result<f64> {
        Err(Error::Capability("no closed-form zeta"))
    }

    fn zeta_prime_zero(&self) -> Result<f64> {
        Err(Error::Capability("no closed-form zeta'(0)"))
    }
}

/// Parities of (dim M, dim N).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParityCase {
    EvenOdd,
    OddEven,
    OddOdd,
    EvenEven,
}

impl ParityCase {
    pub fn of(dim_m: usize, dim_n: usize) -> Self {
        match (dim_m % 2 == 0, dim_n % 2 == 0) {
            (true, false) => ParityCase::EvenOdd,
            (false, true) => ParityCase::OddEven,
            (false, false) => ParityCase::OddOdd,
            (true, true) => ParityCase::EvenEven,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ParityCase::EvenOdd => "even-odd",
            ParityCase::OddEven => "odd-even",
            ParityCase::OddOdd => "odd-odd",
            ParityCase::EvenEven => "even-even",
        }
    }
}

/// The circle R / 2 pi ell Z.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Circle {
    ell: f64,
}

impl Circle {
    pub fn new(ell: f64) -> Result<Self> {
        if !(ell > 0.0) || !ell.is_finite() {
            return Err(Error::Input("circle needs ell > 0"));
        }
        Ok(Self { ell })
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }
}

impl SpectralData for Circle {
    fn dim(&self) -> usize {
        1
    }

    fn eigenvalues(&self, lambda_max: f64) -> Vec<(f64, u64)> {
        let mut v = alloc::vec![(0.0, 1)];
        let mut k = 1.0f64;
        loop {
            let l = k * k / (self.ell * self.ell);
            if l > lambda_max {
                return v;
            }
            v.push((l, 2));
            k += 1.0;
        }
    }

    fn heat_coeffs(&self) -> Option<Vec<f64>> {
        Some(alloc::vec![2.0 * PI * self.ell])
    }

    fn trace(&self, t: f64) -> f64 {
        let a = t / (self.ell * self.ell);
        let mut acc = 1.0;
        let mut k = 1.0f64;
        loop {
            let v = fm::exp(-a * k * k);
            acc += 2.0 * v;
            if v < 1e-19 * acc {
                return acc;
            }
            k += 1.0;
        }
    }

    fn zeta(&self, s: f64) -> Result<f64> {
        Ok(2.0 * fm::powf(self.ell, 2.0 * s) * riemann_zeta(2.0 * s)?)
    }

    fn zeta_prime_zero(&self) -> Result<f64> {
        Ok(-fm::ln(4.0 * PI * PI * self.ell * self.ell))
    }
}

/// The round unit sphere S^2: eigenvalues k(k+1) with multiplicity 2k+1.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Sphere2;

impl SpectralData for Sphere2 {
    fn dim(&self) -> usize {
        2
    }

    fn eigenvalues(&self, lambda_max: f64) -> Vec<(f64, u64)> {
        let mut v = Vec::new();
        let mut k = 0u64;
        loop {
            let l = (k * (k + 1)) as f64;
            if l > lambda_max {
                return v;
            }
            v.push((l, 2 * k + 1));
            k += 1;
        }
    }

    fn heat_coeffs(&self) -> Option<Vec<f64>> {
        let c = [1.0, 1.0 / 3.0, 1.0 / 15.0, 4.0 / 315.0, 1.0 / 315.0];
        Some(c.iter().map(|x| 4.0 * PI * x).collect())
    }

    fn trace(&self, t: f64) -> f64 {
        let mut acc = Kahan::new();
        let mut k = 0.0f64;
        loop {
            let v = (2.0 * k + 1.0) * fm::exp(-k * (k + 1.0) * t);
            acc.add(v);
            if k * (k + 1.0) * t > 1.0 && v < 1e-19 * acc.value() {
                return acc.value();
            }
            k += 1.0;
        }
    }

    fn zeta(&self, s: f64) -> Result<f64> {
        zeta_s2(s)
    }

    fn zeta_prime_zero(&self) -> Result<f64> {
        Ok(4.0 * crate::specfun::riemann_zeta_prime(-1.0)? - 0.5)
    }
}

/// lim_{s -> 0} [f(s) - r/s] for any r: symmetric averages at +-h cancel the
/// pole, then one Richardson step in h^2 with h in {1e-3, 1e-4}.
pub fn regularized_limit(f: &dyn Fn(f64) -> Result<f64>) -> Result<f64> {
    let sym = |h: f64| -> Result<f64> { Ok(0.5 * (f(h)? + f(-h)?)) };
    let c1 = sym(1e-3)?;
    let c2 = sym(1e-4)?;
    Ok((100.0 * c2 - c1) / 99.0)
}

// Residue of Gamma(w) zeta_M(w) at w0, zero when w0 is a regular point.
fn gamma_zeta_residue<M: SpectralData + ?Sized>(m: &M, w0: f64) -> Result<f64> {
    let mut r = if w0 == 0.0 { -1.0 } else { 0.0 };
    match m.heat_asymptotics() {
        Some(asym) => {
            for (p, c) in asym {
                if fm::abs(p + w0) < 1e-12 {
                    r += c;
                }
            }
            Ok(r)
        }
        None => {
            let g = |h: f64| -> Result<f64> { Ok(0.5 * h * (shifted(m, w0 + h)? - shifted(m, w0 - h)?)) };
            let r1 = g(1e-3)?;
            let r2 = g(1e-4)?;
            Ok((100.0 * r2 - r1) / 99.0)
        }
    }
}

fn shifted<M: SpectralData + ?Sized>(m: &M, w: f64) -> Result<f64> {
    Ok(gamma(w) * m.zeta(w)?)
}

/// (C, R) with Gamma(w0 + s) zeta_M(w0 + s) = R/s + C + O(s).
pub fn gamma_zeta_laurent<M: SpectralData + ?Sized>(m: &M, w0: f64) -> Result<(f64, f64)> {
    let r = gamma_zeta_residue(m, w0)?;
    let on_gamma_pole = w0 <= 0.0 && fm::floor(w0) == w0;
    if r == 0.0 && !on_gamma_pole {
        return Ok((shifted(m, w0)?, 0.0));
    }
    let c = regularized_limit(&|s| shifted(m, w0 + s))?;
    Ok((c, r))
}

// d/ds at 0 of G(w0 + s)/Gamma(s) = (R/s + C)(s + C_e s^2) = R + (C + C_e R) s.
fn shifted_prime_at_zero<M: SpectralData + ?Sized>(m: &M, w0: f64) -> Result<f64> {
    let (c, r) = gamma_zeta_laurent(m, w0)?;
    Ok(c + EULER_GAMMA * r)
}

fn n_heat_coeffs<N: SpectralData + ?Sized>(n: &N) -> Result<Vec<f64>> {
    n.heat_coeffs().ok_or(Error::Capability("heat coefficients of the second factor"))
}

/// Terms skipped once three in a row fall below this fraction of the sum.
const Q0_REL_CUTOFF: f64 = 1e-18;
const Q0_MAX_TERMS: usize = 200_000;
const Q0_ABS_TOL: f64 = 1e-13;
const Q0_NOISE: f64 = 1e-10;
/// Error allowed in the closed-form tail, relative to max(1, |sum|).
const Q0_TAIL_TOL: f64 = 1e-11;

// sum_m mult_m int_0^inf {k_N(t) - A_N(t)} e^{-lambda_m t} t^{s-1} dt, where A_N
// keeps floor((dim M + dim N)/2) + 1 heat coefficients of N.
fn q0_sum<M, N>(m: &M, n: &N, s: f64) -> Result<f64>
where
    M: SpectralData + ?Sized,
    N: SpectralData + ?Sized,
{
    let b = n_heat_coeffs(n)?;
    let p = (m.dim() + n.dim()) / 2;
    let dn = n.dim() as f64;
    let pre = fm::powf(4.0 * PI, -dn / 2.0);
    let expansion = |t: f64| -> f64 {
        b.iter().take(p + 1).enumerate().map(|(i, &bi)| pre * bi * fm::powf(t, i as f64 - dn / 2.0)).sum()
    };
    // The coefficients beyond the subtracted ones give the remainder at small
    // t without the cancellation in trace - expansion.
    let extra: Vec<(f64, f64)> = b
        .iter()
        .enumerate()
        .skip(p + 1)
        .filter(|&(_, &bi)| bi != 0.0)
        .map(|(i, &bi)| (i as f64 - dn / 2.0, pre * bi))
        .collect();
    let series = |t: f64| extra.iter().map(|&(w, c)| c * fm::powf(t, w)).sum::<f64>();
    let subtracted = |t: f64| n.trace(t) - expansion(t);
    // largest t at which the two agree to rounding level
    let mut t_series = 0.0;
    if !extra.is_empty() {
        let mut t = 0.5;
        while t > 1e-8 {
            if fm::abs(subtracted(t) - series(t)) <= 1e-14 * fm::abs(expansion(t)) {
                t_series = t;
                break;
            }
            t *= 0.5;
        }
    }
    let rem = |t: f64| if t < t_series { series(t) } else { subtracted(t) };

    // Below t_lo the remainder is at rounding level (or stops shrinking,
    // which is the same thing for a summed trace).
    let mut t_lo = 1.0;
    let mut last = f64::INFINITY;
    while t_lo > 1e-6 {
        let r = fm::abs(rem(t_lo));
        if r <= 1e-14 * fm::abs(expansion(t_lo)) || r >= last {
            break;
        }
        last = r;
        t_lo *= 0.5;
    }

    let term = |lambda: f64| -> Result<f64> {
        let f = |u: f64| {
            let t = fm::exp(u);
            rem(t) * fm::exp(-lambda * t + s * u)
        };
        // With the series the integrand is smooth down to 0; go low enough
        // that the part below is under 1e-20.
        let a = match extra.first() {
            Some(&(w, _)) => fm::ln(t_lo).min(-46.0 / (w + s)),
            None => fm::ln(t_lo),
        };
        let z = fm::ln(t_lo + (60.0 + 2.0 * fm::abs(s)) / lambda);
        // The subtracted trace carries rounding noise of about 1e-15 A(t),
        // hence the absolute floor.
        match adaptive_quad_abs(&f, a, z, 1e-12, Q0_ABS_TOL) {
            Ok(q) => Ok(q.value),
            // panels exhausted on rounding noise alone
            Err(Error::Accuracy { best, error }) if error <= Q0_NOISE => Ok(best),
            Err(e) => Err(e),
        }
    };

    // Watson's lemma: for large lambda the term is sum_i r_i Gamma(w_i) lambda^{-w_i}
    // over the same extra coefficients, w_i shifted by s.
    let asym: Vec<(f64, f64)> = extra.iter().map(|&(w, c)| (w + s, c * gamma(w + s))).collect();
    let asym_at = |lambda: f64| asym.iter().map(|&(w, c)| c * fm::powf(lambda, -w)).sum::<f64>();
    // Once the expansion reproduces the terms, the rest of the sum is
    // sum_i r_i Gamma(w_i) (zeta_M(w_i) - partial sum up to lambda).
    let closed_tail = |upto: f64| -> Result<f64> {
        let ev = m.eigenvalues(upto);
        let mut tail = 0.0;
        for &(w, c) in &asym {
            let z = match m.zeta(w) {
                Ok(z) => z,
                Err(Error::Capability(_)) => oracle::mellin_continuation(m, w)?,
                Err(e) => return Err(e),
            };
            let mut part = Kahan::new();
            for &(l, mult) in ev.iter().filter(|&&(l, _)| l > 0.0 && l <= upto) {
                part.add(mult as f64 * fm::powf(l, -w));
            }
            tail += c * (z - part.value());
        }
        Ok(tail)
    };
    let mut last_term = (0.0f64, 0.0f64);

    let mut acc = Kahan::new();
    let mut first: Option<f64> = None;
    let mut small_run = 0;
    let mut count = 0usize;
    let mut done_to = 0.0f64;
    let mut lambda_max = 1.0f64;
    let mut empty_doublings = 0;
    loop {
        let ev = m.eigenvalues(lambda_max);
        let mut fresh = false;
        for &(lambda, mult) in &ev {
            if !(lambda > done_to) {
                continue;
            }
            fresh = true;
            let single = term(lambda)?;
            let v = mult as f64 * single;
            acc.add(v);
            count += 1;
            last_term = (lambda, single);
            let f0 = *first.get_or_insert(v);
            if count % 1000 == 0 && fm::abs(v) > 0.5 * fm::abs(f0) {
                return Err(Error::Divergence("Q_0 terms do not decay"));
            }
            if fm::abs(v) <= Q0_REL_CUTOFF * fm::abs(acc.value()) {
                small_run += 1;
                if small_run >= 3 {
                    return Ok(acc.value());
                }
            } else {
                small_run = 0;
            }
            if count >= Q0_MAX_TERMS {
                return Err(Error::Accuracy { best: acc.value(), error: fm::abs(v) });
            }
        }
        if let Some(&(l, _)) = ev.last() {
            done_to = done_to.max(l);
        }
        // The mismatch of the last term against its expansion bounds the
        // relative error of the closed tail; the quadrature noise only
        // inflates it.
        let (l_last, t_last) = last_term;
        if fresh && !asym.is_empty() && t_last != 0.0 {
            let rel = fm::abs(t_last - asym_at(l_last)) / fm::abs(t_last);
            if rel < 1e-2 {
                let tail = closed_tail(l_last)?;
                if rel * fm::abs(tail) <= Q0_TAIL_TOL * fm::abs(acc.value()).max(1.0) {
                    return Ok(acc.value() + tail);
                }
            }
        }
        if fresh {
            empty_doublings = 0;
        } else {
            empty_doublings += 1;
            if empty_doublings > 60 {
                // no positive spectrum at all
                return Ok(acc.value());
            }
        }
        lambda_max *= 2.0;
    }
}

/// Q_0'(0).
pub fn q0_prime<M, N>(m: &M, n: &N) -> Result<f64>
where
    M: SpectralData + ?Sized,
    N: SpectralData + ?Sized,
{
    q0_sum(m, n, 0.0)
}

/// Q_0(s) itself, for small s; it vanishes at 0.
pub fn q0_value<M, N>(m: &M, n: &N, s: f64) -> Result<f64>
where
    M: SpectralData + ?Sized,
    N: SpectralData + ?Sized,
{
    if s == 0.0 {
        return Ok(0.0);
    }
    Ok(q0_sum(m, n, s)? / gamma(s))
}

/// The nonzero q_i'(0) as (i, value).
pub fn q1_terms<M, N>(m: &M, n: &N) -> Result<Vec<(usize, f64)>>
where
    M: SpectralData + ?Sized,
    N: SpectralData + ?Sized,
{
    let b = n_heat_coeffs(n)?;
    let p = (m.dim() + n.dim()) / 2;
    let dn = n.dim() as f64;
    let pre = fm::powf(4.0 * PI, -dn / 2.0);
    let mut out = Vec::new();
    for (i, &bi) in b.iter().enumerate().take(p + 1) {
        if bi == 0.0 {
            continue;
        }
        let w0 = i as f64 - dn / 2.0;
        out.push((i, pre * bi * shifted_prime_at_zero(m, w0)?));
    }
    Ok(out)
}

/// Q_1'(0).
pub fn q1_prime<M, N>(m: &M, n: &N) -> Result<f64>
where
    M: SpectralData + ?Sized,
    N: SpectralData + ?Sized,
{
    Ok(q1_terms(m, n)?.iter().map(|&(_, v)| v).sum())
}

fn log_det_of<N: SpectralData + ?Sized>(n: &N) -> Result<f64> {
    match n.zeta_prime_zero() {
        Ok(z) => Ok(-z),
        Err(Error::Capability(_)) => Ok(-oracle::zeta_prime_at_zero(n)?),
        Err(e) => Err(e),
    }
}

/// log Det(M x N) = log Det N - Q_0'(0) - Q_1'(0).
pub fn det_product_general<M, N>(m: &M, n: &N) -> Result<DetResult>
where
    M: SpectralData + ?Sized,
    N: SpectralData + ?Sized,
{
    let case = ParityCase::of(m.dim(), n.dim());
    let q0 = q0_prime(m, n)?;
    let terms = q1_terms(m, n)?;
    let q1: f64 = terms.iter().map(|&(_, v)| v).sum();
    let log_n = log_det_of(n)?;
    let mut r = DetResult::new(log_n - q0 - q1)
        .with_term("log_det_n", log_n)
        .with_term("q0_prime", q0)
        .with_term("q1_prime", q1)
        .with_error(1e-9 * (1.0 + fm::abs(q0) + fm::abs(q1)))
        .with_note(case.name());
    for (i, v) in terms {
        let name = alloc::format!("q1_term_{i}");
        r = r.with_term(&name, v);
    }
    Ok(r)
}

/// log C_M: 2 pi ell zeta_M(-1/2) for even dim M; for odd dim M,
/// -sqrt(pi) ell (C + C_e R) with Gamma(s - 1/2) zeta_M(s - 1/2) = R/s + C + O(s).
pub fn log_c_m<M: SpectralData + ?Sized>(m: &M, ell: f64) -> Result<f64> {
    if m.dim() % 2 == 0 {
        Ok(2.0 * PI * ell * m.zeta(-0.5)?)
    } else {
        Ok(-fm::sqrt(PI) * ell * shifted_prime_at_zero(m, -0.5)?)
    }
}

/// 2 sum mult log(1 - e^{-2 pi ell sqrt(lambda)}) over the positive spectrum of M.
pub fn s1_log_product<M: SpectralData + ?Sized>(m: &M, ell: f64) -> f64 {
    let x_max = 50.0;
    let lambda_max = (x_max / (2.0 * PI * ell)) * (x_max / (2.0 * PI * ell));
    let mut acc = Kahan::new();
    for (l, k) in m.eigenvalues(lambda_max) {
        if l > 0.0 {
            acc.add(2.0 * k as f64 * fm::ln1p(-fm::exp(-2.0 * PI * ell * fm::sqrt(l))));
        }
    }
    acc.value()
}

/// Det of M x S^1 with S^1 = R / 2 pi ell Z.
pub fn det_product_s1<M: SpectralData + ?Sized>(m: &M, ell: f64) -> Result<DetResult> {
    if !(ell > 0.0) || !ell.is_finite() {
        return Err(Error::Input("ell must be positive"));
    }
    let lead = fm::ln(4.0 * PI * PI * ell * ell);
    let c = log_c_m(m, ell)?;
    let prod = s1_log_product(m, ell);
    Ok(DetResult::new(lead + c + prod)
        .with_term("log_4pi2_ell2", lead)
        .with_term("log_c_m", c)
        .with_term("log_product", prod)
        .with_error(1e-12 * (1.0 + fm::abs(c)))
        .with_note(if m.dim() % 2 == 0 { "even-dimensional factor" } else { "odd-dimensional factor" }))
}

/// Depth n of the explicitly continued part of zeta_{S^2}.
const S2_DEPTH: usize = 8;

// zeta(x) - 1 without the cancellation for large x.
fn zeta_minus_one(x: f64) -> Result<f64> {
    if x < 16.0 {
        return Ok(riemann_zeta(x)? - 1.0);
    }
    let mut acc = 0.0;
    let mut k = 2.0f64;
    loop {
        let v = fm::powf(k, -x);
        acc += v;
        if v < 1e-22 * acc {
            return Ok(acc);
        }
        k += 1.0;
    }
}

/// zeta_{S^2}(s) = 2^{-s} + 2 sum_m d_{2m}(-s) (zeta(2s - 1 + 2m) - 1), where
/// d_j(a) are the binomial coefficients of (1 + z)^a; the terms 2m > 8 form
/// the tail and are summed until below 1e-15.
pub fn zeta_s2(s: f64) -> Result<f64> {
    if !(s > (2.0 - S2_DEPTH as f64) / 2.0) {
        return Err(Error::Domain("zeta_s2 needs s > -3 at depth 8"));
    }
    let mut acc = Kahan::new();
    acc.add(fm::powf(2.0, -s));
    let mut m = 0usize;
    loop {
        let x = 2.0 * s - 1.0 + 2.0 * m as f64;
        if x == 1.0 {
            return Err(Error::Pole(s));
        }
        let v = 2.0 * gen_binomial(-s, 2 * m) * zeta_minus_one(x)?;
        acc.add(v);
        if 2 * m > S2_DEPTH && fm::abs(v) < 1e-15 {
            return Ok(acc.value());
        }
        if m > 500 {
            return Err(Error::Divergence("zeta_s2 tail"));
        }
        m += 1;
    }
}

/// (4m)! / (2^{4m - 1} (4m - 1) ((2m)!)^2).
fn alternating_coeffs(n: usize) -> Vec<f64> {
    // r_m = (4m)! / (2^{4m} ((2m)!)^2)
    let mut r = 1.0;
    let mut out = Vec::with_capacity(n);
    for m in 0..n {
        let mf = m as f64;
        out.push(2.0 * r / (4.0 * mf - 1.0));
        r *= (4.0 * mf + 1.0) * (4.0 * mf + 2.0) * (4.0 * mf + 3.0) * (4.0 * mf + 4.0)
            / (16.0 * (2.0 * mf + 1.0) * (2.0 * mf + 1.0) * (2.0 * mf + 2.0) * (2.0 * mf + 2.0));
    }
    out
}

/// zeta_{S^2}(-1/2) = -sum_m (4m)!/(2^{4m-1}(4m-1)((2m)!)^2) zeta(2m - 2).
///
/// The terms decay only like m^{-3/2}; writing zeta = 1 + (zeta - 1), the
/// coefficients alone sum to -sqrt 2 (binomial series of (1 +- 1)^{1/2}).
pub fn zeta_s2_at_minus_half() -> Result<f64> {
    let c = alternating_coeffs(80);
    let mut acc = Kahan::new();
    acc.add(fm::sqrt(2.0));
    for (m, cm) in c.iter().enumerate() {
        let x = 2.0 * m as f64 - 2.0;
        acc.add(-cm * zeta_minus_one(x)?);
    }
    Ok(acc.value())
}

/// The same value as a double integral:
/// -(2/3pi) int int d^2/dx^2 (d^2/dy^2 ((x+y)/(e^{x+y} - 1)) e^{-x}) (xy)^{-1/2} dx dy.
pub fn zeta_s2_double_integral() -> Result<f64> {
    use crate::analytic::{adaptive_quad, Jet, SeriesTables};
    let tables = SeriesTables::new();
    // f'''' - 2 f''' + f'' at u = x + y, times e^{-x}
    let integrand = |x: f64, y: f64| -> f64 {
        let j = tables.g(&Jet::<5>::variable(x + y));
        (j.derivative(4) - 2.0 * j.derivative(3) + j.derivative(2)) * fm::exp(-x)
    };
    // x = p^2, y = q^2 absorbs the inverse square roots
    let breaks = [0.0, 1.0, 3.0, 8.0];
    let inner = |p: f64| -> f64 {
        let x = p * p;
        let f = |q: f64| 4.0 * integrand(x, q * q);
        let mut acc = 0.0;
        for w in breaks.windows(2) {
            acc += match adaptive_quad(&f, w[0], w[1], 1e-11) {
                Ok(r) => r.value,
                Err(Error::Accuracy { best, .. }) => best,
                Err(_) => f64::NAN,
            };
        }
        acc
    };
    let mut total = 0.0;
    for w in breaks.windows(2) {
        total += adaptive_quad(&inner, w[0], w[1], 1e-10)?.value;
    }
    if !total.is_finite() {
        return Err(Error::Accuracy { best: total, error: f64::INFINITY });
    }
    Ok(-2.0 / (3.0 * PI) * total)
}

/// Gamma(-1) zeta_{T^2}(-1) from the Bessel series:
/// 32 pi / sqrt B sum (n/m)^{3/2} cos(2 pi A n m) K_{3/2}(2 pi B n m) + (8B/pi) zeta(4) + 4 zeta(3)/B^2.
pub fn t2_limit_term_bessel(p: &T2Params) -> Result<f64> {
    let (a, b) = (p.a(), p.b());
    let mut acc = Kahan::new();
    let mut n = 1.0f64;
    while 2.0 * PI * b * n <= 50.0 {
        let mut m = 1.0f64;
        while 2.0 * PI * b * n * m <= 50.0 {
            let z = 2.0 * PI * b * n * m;
            acc.add(fm::powf(n / m, 1.5) * fm::cospi(2.0 * a * n * m) * bessel_k(1.5, z)?);
            m += 1.0;
        }
        n += 1.0;
    }
    let z3 = riemann_zeta(3.0)?;
    let z4 = PI * PI * PI * PI / 90.0;
    Ok(32.0 * PI / fm::sqrt(b) * acc.value() + 8.0 * b / PI * z4 + 4.0 * z3 / (b * b))
}

/// The same number as (4 pi / B)^3 Gamma(2) zeta_{T^2}(2).
pub fn t2_limit_term_identity(p: &T2Params) -> Result<f64> {
    let c = 4.0 * PI / p.b();
    Ok(c * c * c * zeta_t2(2.0, p)?)
}

/// -Q_0'(0) for T^2 x T^2 in closed form: minus the sum over nonzero
/// eigenvalues lambda of M and nonzero periods gamma of N of
/// b_0 sqrt(lambda) K_1(sqrt(lambda) |gamma|) / (pi |gamma|).
pub fn t2xt2_bessel_exponent(m: &T2Params, n: &T2Params) -> Result<f64> {
    let lm = m.lattice();
    let ln = n.lattice();
    let b0 = n.b();
    let z_max = 50.0;
    let g_min = ln.shortest_vector();
    let mut acc = Kahan::new();
    let mut err = None;
    lm.for_each_dual(z_max / (2.0 * PI * g_min), &mut |_, q| {
        if q == 0.0 {
            return;
        }
        let root = 2.0 * PI * fm::sqrt(q);
        ln.for_each_primal(z_max / root, &mut |_, g2| {
            if g2 == 0.0 {
                return;
            }
            let g = fm::sqrt(g2);
            match bessel_k(1.0, root * g) {
                Ok(k) => acc.add(b0 * root * k / (PI * g)),
                Err(e) => err = Some(e),
            }
        });
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(-acc.value())
}

/// Det of T^2_M x T^2_N assembled from the K_1 exponent, the Gamma(s-1) zeta_M(s-1)
/// limit and Det T^2_N.
pub fn det_t2xt2(m: &T2Params, n: &T2Params) -> Result<DetResult> {
    let k1 = t2xt2_bessel_exponent(m, n)?;
    let lim = t2_limit_term_bessel(m)?;
    let lim_id = t2_limit_term_identity(m)?;
    let diff = fm::abs(lim - lim_id);
    if diff > 1e-8 * (1.0 + fm::abs(lim)) {
        return Err(Error::Inconsistent { what: "Gamma(-1) zeta_T2(-1) two ways", diff });
    }
    let q1 = n.b() / (4.0 * PI) * lim;
    let log_n = det_t2(n).log_det;
    Ok(DetResult::new(log_n + k1 - q1)
        .with_term("log_det_n", log_n)
        .with_term("k1_exponent", k1)
        .with_term("limit_term", lim)
        .with_term("limit_identity", lim_id)
        .with_term("q1_prime", q1)
        .with_error(diff + 1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tori::{det_t3, det_t4, Lattice, TorusSpectrum};

    fn close(x: f64, y: f64, tol: f64) -> bool {
        fm::abs(x - y) <= tol * (1.0 + fm::abs(y))
    }

    fn t2(a: f64, b: f64) -> TorusSpectrum {
        TorusSpectrum::new(T2Params::new(a, b).unwrap().lattice())
    }

    fn lattice3(rows: [[f64; 3]; 3]) -> Lattice {
        Lattice::from_rows(&rows).unwrap()
    }

    struct Point;

    impl SpectralData for Point {
        fn dim(&self) -> usize {
            0
        }
        fn eigenvalues(&self, _: f64) -> Vec<(f64, u64)> {
            alloc::vec![(0.0, 1)]
        }
        fn heat_coeffs(&self) -> Option<Vec<f64>> {
            Some(alloc::vec![1.0])
        }
        fn trace(&self, _: f64) -> f64 {
            1.0
        }
        fn zeta(&self, _: f64) -> Result<f64> {
            Ok(0.0)
        }
        fn zeta_prime_zero(&self) -> Result<f64> {
            Ok(0.0)
        }
    }

    struct Empty;

    impl SpectralData for Empty {
        fn dim(&self) -> usize {
            2
        }
        fn eigenvalues(&self, _: f64) -> Vec<(f64, u64)> {
            alloc::vec![(0.0, 1)]
        }
    }

    // a bad enumerator: the same eigenvalue over and over
    struct Stuck;

    impl SpectralData for Stuck {
        fn dim(&self) -> usize {
            2
        }
        fn eigenvalues(&self, lambda_max: f64) -> Vec<(f64, u64)> {
            let mut v = alloc::vec![(0.0, 1)];
            if lambda_max >= 1.0 {
                for k in 0..5000 {
                    v.push((1.0 + 1e-12 * k as f64, 1));
                }
            }
            v
        }
    }

    #[test]
    fn parity_from_dims() {
        assert_eq!(ParityCase::of(2, 1), ParityCase::EvenOdd);
        assert_eq!(ParityCase::of(1, 2), ParityCase::OddEven);
        assert_eq!(ParityCase::of(3, 1), ParityCase::OddOdd);
        assert_eq!(ParityCase::of(2, 2), ParityCase::EvenEven);
    }

    #[test]
    fn extractor_on_synthetic_pole() {
        for c in [0.0, 1.0, -PI] {
            let v = regularized_limit(&|s| Ok(1.0 / s + c)).unwrap();
            assert!(fm::abs(v - c) < 1e-9, "{c} {v}");
        }
        // a smooth part with curvature is also removed to h^4
        let v = regularized_limit(&|s| Ok(2.0 / s + fm::exp(s))).unwrap();
        assert!(fm::abs(v - 1.0) < 1e-12);
    }

    #[test]
    fn circle_and_sphere_match_oracle() {
        let c = Circle::new(1.3).unwrap();
        let z = oracle::zeta_prime_at_zero(&c).unwrap();
        assert!(close(z, c.zeta_prime_zero().unwrap(), 1e-6));
        let z = oracle::zeta_prime_at_zero(&Sphere2).unwrap();
        assert!(close(z, Sphere2.zeta_prime_zero().unwrap(), 1e-6), "{z}");
        let fit = oracle::fit_heat_coeffs(&Sphere2, 4).unwrap();
        let known = Sphere2.heat_coeffs().unwrap();
        for i in 0..3 {
            assert!(close(fit[i], known[i], 1e-4), "{i} {} {}", fit[i], known[i]);
        }
    }

    #[test]
    fn zeta_s2_direct_at_two() {
        let mut direct = 0.0;
        for k in (1..200_000).rev() {
            let k = k as f64;
            direct += (2.0 * k + 1.0) / (k * k * (k + 1.0) * (k + 1.0));
        }
        // tail ~ 2/(3 K^3) is below 1e-15 here
        assert!(close(zeta_s2(2.0).unwrap(), direct, 1e-10));
        let o = oracle::mellin_continuation(&Sphere2, 2.0).unwrap();
        assert!(close(o, direct, 1e-8));
    }

    #[test]
    fn zeta_s2_three_ways_at_minus_half() {
        let cont = zeta_s2(-0.5).unwrap();
        let alt = zeta_s2_at_minus_half().unwrap();
        let dbl = zeta_s2_double_integral().unwrap();
        assert!(fm::abs(cont - alt) < 1e-8, "{cont} {alt}");
        assert!(fm::abs(cont - dbl) < 1e-5, "{cont} {dbl}");
        assert!(fm::abs(cont + 0.265_095_549_118_858_5) < 1e-12);
        let o = oracle::mellin_continuation(&Sphere2, -0.5).unwrap();
        assert!(fm::abs(o - cont) < 1e-7, "{o}");
    }

    #[test]
    fn zeta_s2_errors() {
        assert!(matches!(zeta_s2(-4.0), Err(Error::Domain(_))));
        assert!(matches!(zeta_s2(1.0), Err(Error::Pole(_))));
    }

    #[test]
    fn displayed_double_integral_factor_is_off() {
        let dbl = zeta_s2_double_integral().unwrap();
        let displayed = dbl * (4.0 / (9.0 * PI)) / (-2.0 / (3.0 * PI));
        assert!(fm::abs(displayed - zeta_s2(-0.5).unwrap()) > 0.1);
    }

    #[test]
    fn q0_over_circle_is_the_log_product() {
        let m = t2(0.3, 1.2);
        let c = Circle::new(0.7).unwrap();
        let q0 = q0_prime(&m, &c).unwrap();
        assert!(close(q0, -s1_log_product(&m, 0.7), 1e-9), "{q0}");
    }

    #[test]
    fn q0_degenerate_cases() {
        assert_eq!(q0_prime(&Empty, &Circle::new(1.0).unwrap()).unwrap(), 0.0);
        assert_eq!(q0_prime(&t2(0.0, 1.0), &Point).unwrap(), 0.0);
        assert!(matches!(q0_prime(&Stuck, &Circle::new(1.0).unwrap()), Err(Error::Divergence(_))));
    }

    #[test]
    fn q0_vanishes_at_zero() {
        let v = q0_value(&t2(0.0, 1.0), &Circle::new(1.0).unwrap(), 1e-9).unwrap();
        assert!(fm::abs(v) < 1e-8);
        let v = q0_value(&Circle::new(1.0).unwrap(), &t2(0.2, 1.1), 1e-9).unwrap();
        assert!(fm::abs(v) < 1e-8);
    }

    #[test]
    fn q0_two_tori_matches_bessel_form() {
        let (pm, pn) = (T2Params::new(0.0, 1.0).unwrap(), T2Params::new(0.0, 1.0).unwrap());
        let q0 = q0_prime(&TorusSpectrum::new(pm.lattice()), &TorusSpectrum::new(pn.lattice())).unwrap();
        let k1 = t2xt2_bessel_exponent(&pm, &pn).unwrap();
        assert!(close(q0, -k1, 1e-8), "{q0} {k1}");
    }

    #[test]
    fn q1_reduces_to_log_c_m() {
        let c = Circle::new(0.8).unwrap();
        let m = t2(0.25, 0.9);
        assert!(close(q1_prime(&m, &c).unwrap(), -log_c_m(&m, 0.8).unwrap(), 1e-12));
        let m3 = TorusSpectrum::new(lattice3([[1.0, 0.2, 0.1], [0.0, 1.1, 0.3], [0.0, 0.0, 0.9]]));
        assert!(close(q1_prime(&m3, &c).unwrap(), -log_c_m(&m3, 0.8).unwrap(), 1e-9));
    }

    #[test]
    fn q1_flat_only_b0() {
        let terms = q1_terms(&t2(0.1, 1.0), &t2(0.3, 1.4)).unwrap();
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].0, 0);
    }

    #[test]
    fn q1_two_tori_is_the_limit_term() {
        let (pm, pn) = (T2Params::new(0.2, 1.1).unwrap(), T2Params::new(0.4, 0.8).unwrap());
        let q1 = q1_prime(&TorusSpectrum::new(pm.lattice()), &TorusSpectrum::new(pn.lattice())).unwrap();
        let lim = t2_limit_term_bessel(&pm).unwrap();
        assert!(close(q1, pn.b() / (4.0 * PI) * lim, 1e-8));
    }

    #[test]
    fn limit_term_chain() {
        for (a, b) in [(0.0, 1.0), (0.3, 1.2), (-0.45, 0.7)] {
            let p = T2Params::new(a, b).unwrap();
            let l1 = t2_limit_term_bessel(&p).unwrap();
            let l2 = t2_limit_term_identity(&p).unwrap();
            assert!(fm::abs(l1 - l2) < 1e-8 * (1.0 + fm::abs(l1)), "{a} {b} {l1} {l2}");
            // the direct lattice sum (4B/pi) sum' ((Bn)^2 + (m - nA)^2)^{-2}
            let mut s = 0.0;
            let r = 400i64;
            for n in -r..=r {
                for m in -r..=r {
                    if n == 0 && m == 0 {
                        continue;
                    }
                    let q = (b * n as f64) * (b * n as f64) + (m as f64 - n as f64 * a) * (m as f64 - n as f64 * a);
                    s += 1.0 / (q * q);
                }
            }
            // the square cutoff leaves a tail of order 1/r^2
            assert!(fm::abs(4.0 * b / PI * s - l1) < 1e-4 * l1);
        }
    }

    #[test]
    fn displayed_limit_constants_fail_the_chain() {
        // (8 pi/B) zeta(4) on the left and 4 pi B on the right break the identity
        let p = T2Params::new(0.3, 1.2).unwrap();
        let b = p.b();
        let z4 = PI * PI * PI * PI / 90.0;
        let lhs = t2_limit_term_bessel(&p).unwrap() - 8.0 * b / PI * z4 + 8.0 * PI / b * z4;
        let rhs = t2_limit_term_identity(&p).unwrap() * PI * PI;
        assert!(fm::abs(lhs - rhs) > 1.0);
    }

    #[test]
    fn t2xt2_agrees_with_t4_and_general() {
        let (pm, pn) = (T2Params::new(0.2, 1.1).unwrap(), T2Params::new(-0.3, 0.9).unwrap());
        let d = det_t2xt2(&pm, &pn).unwrap();
        let l4 = Lattice::from_rows(&[
            [1.0, pm.a(), 0.0, 0.0],
            [0.0, pm.b(), 0.0, 0.0],
            [0.0, 0.0, 1.0, pn.a()],
            [0.0, 0.0, 0.0, pn.b()],
        ])
        .unwrap();
        let t4 = det_t4(&l4).unwrap();
        assert!(close(d.log_det, t4.log_det, 1e-6), "{} {}", d.log_det, t4.log_det);
        let g = det_product_general(&TorusSpectrum::new(pm.lattice()), &TorusSpectrum::new(pn.lattice())).unwrap();
        assert!(close(d.log_det, g.log_det, 1e-6));
        let swapped = det_t2xt2(&pn, &pm).unwrap();
        assert!(close(d.log_det, swapped.log_det, 1e-6));
    }

    #[test]
    fn parity_dispatch_against_tori() {
        let (a, b, ell) = (0.15, 1.05, 0.6);
        let m2 = t2(a, b);
        let s1 = Circle::new(ell).unwrap();
        let block3 = lattice3([[1.0, a, 0.0], [0.0, b, 0.0], [0.0, 0.0, 2.0 * PI * ell]]);
        let t3 = det_t3(&block3).unwrap().log_det;
        // even x odd and odd x even
        let eo = det_product_general(&m2, &s1).unwrap();
        assert_eq!(eo.notes[0], "even-odd");
        assert!(close(eo.log_det, t3, 1e-6), "{} {t3}", eo.log_det);
        let oe = det_product_general(&s1, &m2).unwrap();
        assert!(close(oe.log_det, t3, 1e-6), "{} {t3}", oe.log_det);
        // odd x odd: two circles form a rectangle of sides 2 pi ell_1, 2 pi ell_2
        let (l1, l2) = (0.6, 0.9);
        let oo = det_product_general(&Circle::new(l1).unwrap(), &Circle::new(l2).unwrap()).unwrap();
        let rect = det_t2(&T2Params::new(0.0, l2 / l1).unwrap()).log_det + 2.0 * fm::ln(2.0 * PI * l1);
        assert!(close(oo.log_det, rect, 1e-6), "{} {rect}", oo.log_det);
        // odd x odd with a 3-torus
        let l3 = lattice3([[1.0, 0.2, 0.1], [0.0, 1.1, 0.3], [0.0, 0.0, 0.9]]);
        let oo3 = det_product_general(&s1, &TorusSpectrum::new(l3.clone())).unwrap();
        let mut rows = [[0.0; 4]; 4];
        for i in 0..3 {
            for j in 0..3 {
                rows[i][j] = l3.a(i, j);
            }
        }
        rows[3][3] = 2.0 * PI * ell;
        let t4 = det_t4(&Lattice::from_rows(&rows).unwrap()).unwrap().log_det;
        assert!(close(oo3.log_det, t4, 1e-6), "{} {t4}", oo3.log_det);
        // even x even
        let ee = det_product_general(&m2, &t2(0.0, 1.0)).unwrap();
        let t4b = det_t2xt2(&T2Params::new(a, b).unwrap(), &T2Params::new(0.0, 1.0).unwrap()).unwrap();
        assert!(close(ee.log_det, t4b.log_det, 1e-6));
    }

    #[test]
    fn product_symmetry() {
        let m = t2(0.35, 1.3);
        let n = t2(0.0, 0.8);
        let x = det_product_general(&m, &n).unwrap().log_det;
        let y = det_product_general(&n, &m).unwrap().log_det;
        assert!(close(x, y, 1e-6), "{x} {y}");
        let c = Circle::new(1.0).unwrap();
        let x = det_product_general(&m, &c).unwrap().log_det;
        let y = det_product_general(&c, &m).unwrap().log_det;
        assert!(close(x, y, 1e-6), "{x} {y}");
        // S^2 as the second factor: its remainder is only O(t)
        let x = det_product_general(&m, &Sphere2).unwrap().log_det;
        let y = det_product_general(&Sphere2, &m).unwrap().log_det;
        assert!(close(x, y, 1e-6), "{x} {y}");
        let x = det_product_general(&c, &Sphere2).unwrap().log_det;
        let y = det_product_s1(&Sphere2, 1.0).unwrap().log_det;
        assert!(close(x, y, 1e-6), "{x} {y}");
    }

    #[test]
    fn times_a_point() {
        let m = t2(0.1, 1.2);
        let d = det_product_general(&m, &Point).unwrap();
        assert!(close(d.log_det, -m.zeta_prime_zero().unwrap(), 1e-8));
    }

    #[test]
    fn s1_product_matches_t3_and_t4() {
        for (a, b, ell) in [(0.0, 1.0, 1.0), (0.3, 0.8, 0.5)] {
            let d = det_product_s1(&t2(a, b), ell).unwrap();
            let l = lattice3([[1.0, a, 0.0], [0.0, b, 0.0], [0.0, 0.0, 2.0 * PI * ell]]);
            let t3 = det_t3(&l).unwrap().log_det;
            assert!(close(d.log_det, t3, 1e-6), "{} {t3}", d.log_det);
        }
        let l3 = lattice3([[1.0, 0.2, 0.1], [0.0, 1.1, 0.3], [0.0, 0.0, 0.9]]);
        let d = det_product_s1(&TorusSpectrum::new(l3.clone()), 0.7).unwrap();
        let mut rows = [[0.0; 4]; 4];
        for i in 0..3 {
            for j in 0..3 {
                rows[i][j] = l3.a(i, j);
            }
        }
        rows[3][3] = 2.0 * PI * 0.7;
        let t4 = det_t4(&Lattice::from_rows(&rows).unwrap()).unwrap().log_det;
        assert!(close(d.log_det, t4, 1e-6), "{} {t4}", d.log_det);
        // odd factor: a circle, giving a rectangle
        let d = det_product_s1(&Circle::new(0.6).unwrap(), 0.9).unwrap();
        let rect = det_t2(&T2Params::new(0.0, 1.5).unwrap()).log_det + 2.0 * fm::ln(2.0 * PI * 0.6);
        assert!(close(d.log_det, rect, 1e-9), "{} {rect}", d.log_det);
    }

    #[test]
    fn s2_times_circle_display() {
        let ell = 1.0;
        let d = det_product_s1(&Sphere2, ell).unwrap();
        assert!(d.log_det.is_finite());
        // 4 pi^2 ell^2 prod_m e^{-pi ell c_m' zeta(2m-2)} prod_k |(1 - e^{-2 pi ell sqrt(k(k+1))})^{2k+1}|^2
        // with c_m' = (4m)!/(2^{4m-2}(4m-1)((2m)!)^2) = 2 c_m
        let c = alternating_coeffs(80);
        let mut expo = 0.0;
        for (m, cm) in c.iter().enumerate().skip(1) {
            expo += -PI * ell * 2.0 * cm * zeta_minus_one(2.0 * m as f64 - 2.0).unwrap();
        }
        // the constant parts sum_{m >= 1} c_m = -sqrt 2 + 2
        expo += -PI * ell * 2.0 * (2.0 - fm::sqrt(2.0));
        assert!(close(expo, d.term("log_c_m").unwrap(), 1e-9), "{expo}");
        let mut prod = 0.0;
        for k in 1..40u32 {
            let k = k as f64;
            prod += 2.0 * (2.0 * k + 1.0) * fm::ln1p(-fm::exp(-2.0 * PI * ell * fm::sqrt(k * (k + 1.0))));
        }
        assert!(close(prod, d.term("log_product").unwrap(), 1e-12));
        let display = fm::ln(4.0 * PI * PI * ell * ell) + expo + prod;
        assert!(close(d.log_det, display, 1e-9));
    }

    #[test]
    fn s2_times_circle_matches_general() {
        let d = det_product_s1(&Sphere2, 0.5).unwrap();
        let g = det_product_general(&Sphere2, &Circle::new(0.5).unwrap()).unwrap();
        assert!(close(d.log_det, g.log_det, 1e-8), "{} {}", d.log_det, g.log_det);
    }

    #[test]
    fn long_circle_is_linear_in_ell() {
        let m = t2(0.0, 1.0);
        let z = m.zeta(-0.5).unwrap();
        for ell in [4.0, 8.0] {
            let d = det_product_s1(&m, ell).unwrap();
            let lin = fm::ln(4.0 * PI * PI * ell * ell) + 2.0 * PI * ell * z;
            assert!(fm::abs(d.log_det - lin) < 1e-10 * ell);
        }
    }

    #[test]
    fn bad_ell() {
        assert!(det_product_s1(&Sphere2, 0.0).is_err());
        assert!(Circle::new(-1.0).is_err());
    }
}
