//! Truncated Taylor arithmetic and quadrature for integrals of the form
//! ∫₀^∞ F^{(k)}(u) log u du.

use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::fm::{self, Kahan, PI};
use crate::specfun::{coeff_table, rational_to_f64, CoeffKind};

/// Highest derivative order a public jet carries.
pub const MAX_ORDER: usize = 12;

/// Truncated power series f(center + t) = Σ c_j t^j with N slots.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<const N: usize> {
    pub center: f64,
    pub c: [f64; N],
}

/// The public carrier: up to 12 derivatives.
pub type TaylorJet = Jet<13>;

impl<const N: usize> Jet<N> {
    pub fn constant(center: f64, v: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = v;
        Self { center, c }
    }

    /// The identity map t ↦ center + t.
    pub fn variable(center: f64) -> Self {
        let mut c = [0.0; N];
        c[0] = center;
        if N > 1 {
            c[1] = 1.0;
        }
        Self { center, c }
    }

    pub fn from_coeffs(center: f64, coeffs: &[f64]) -> Self {
        let mut c = [0.0; N];
        for (dst, src) in c.iter_mut().zip(coeffs) {
            *dst = *src;
        }
        Self { center, c }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// j-th derivative at the center.
    pub fn derivative(&self, j: usize) -> f64 {
        self.c[j] * crate::specfun::factorial(j)
    }

    pub fn scale(mut self, a: f64) -> Self {
        for x in self.c.iter_mut() {
            *x *= a;
        }
        self
    }

    pub fn add_const(mut self, a: f64) -> Self {
        self.c[0] += a;
        self
    }

    /// Jet of the derivative (top slot becomes zero).
    pub fn diff(&self) -> Self {
        let mut c = [0.0; N];
        for j in 0..N - 1 {
            c[j] = (j + 1) as f64 * self.c[j + 1];
        }
        Self { center: self.center, c }
    }

    pub fn recip(&self) -> Result<Self> {
        let b0 = self.c[0];
        if b0 == 0.0 {
            return Err(Error::Domain("jet reciprocal of a zero constant term"));
        }
        let mut r = [0.0; N];
        r[0] = 1.0 / b0;
        for n in 1..N {
            let mut acc = 0.0;
            for k in 1..=n {
                acc += self.c[k] * r[n - k];
            }
            r[n] = -acc / b0;
        }
        Ok(Self { center: self.center, c: r })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(*self * other.recip()?)
    }

    pub fn square(&self) -> Self {
        *self * *self
    }

    pub fn exp(&self) -> Self {
        let mut e = [0.0; N];
        e[0] = fm::exp(self.c[0]);
        for n in 1..N {
            let mut acc = 0.0;
            for k in 1..=n {
                acc += k as f64 * self.c[k] * e[n - k];
            }
            e[n] = acc / n as f64;
        }
        Self { center: self.center, c: e }
    }

    /// (sinh, cosh) by the coupled recurrence.
    pub fn sinh_cosh(&self) -> (Self, Self) {
        let mut s = [0.0; N];
        let mut ch = [0.0; N];
        s[0] = fm::sinh(self.c[0]);
        ch[0] = fm::cosh(self.c[0]);
        for n in 1..N {
            let mut as_ = 0.0;
            let mut ac = 0.0;
            for k in 1..=n {
                let w = k as f64 * self.c[k];
                as_ += w * ch[n - k];
                ac += w * s[n - k];
            }
            s[n] = as_ / n as f64;
            ch[n] = ac / n as f64;
        }
        (Self { center: self.center, c: s }, Self { center: self.center, c: ch })
    }

    pub fn sinh(&self) -> Self {
        self.sinh_cosh().0
    }

    pub fn cosh(&self) -> Self {
        self.sinh_cosh().1
    }

    pub fn ln(&self) -> Result<Self> {
        let a0 = self.c[0];
        if !(a0 > 0.0) {
            return Err(Error::Domain("jet log of a non-positive constant term"));
        }
        let mut l = [0.0; N];
        l[0] = fm::ln(a0);
        // x l' = x'  ⇒  n a0 l_n = n x_n − Σ_{k=1}^{n−1} k l_k x_{n−k}
        for n in 1..N {
            let mut acc = n as f64 * self.c[n];
            for k in 1..n {
                acc -= k as f64 * l[k] * self.c[n - k];
            }
            l[n] = acc / (n as f64 * a0);
        }
        Ok(Self { center: self.center, c: l })
    }

    /// Σ p_i X^i by Horner.
    pub fn compose_poly(&self, p: &[f64]) -> Self {
        let mut acc = Self::constant(self.center, 0.0);
        for &pi in p.iter().rev() {
            acc = (acc * *self).add_const(pi);
        }
        acc
    }
}

impl<const N: usize> Add for Jet<N> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        for (a, b) in self.c.iter_mut().zip(o.c.iter()) {
            *a += *b;
        }
        self
    }
}

impl<const N: usize> Sub for Jet<N> {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        for (a, b) in self.c.iter_mut().zip(o.c.iter()) {
            *a -= *b;
        }
        self
    }
}

impl<const N: usize> Neg for Jet<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl<const N: usize> Mul for Jet<N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut c = [0.0; N];
        for (i, a) in self.c.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for j in 0..N - i {
                c[i + j] += a * o.c[j];
            }
        }
        Self { center: self.center, c }
    }
}

impl<const N: usize> Mul<f64> for Jet<N> {
    type Output = Self;
    fn mul(self, a: f64) -> Self {
        self.scale(a)
    }
}

const SERIES_TERMS: usize = 21;
const SMALL_ARG: f64 = 1e-2;
const MID_ARG: f64 = 2.0;

/// Float copies of the exact Maclaurin tables used for series seeding.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesTables {
    /// x/sinh x = Σ (−1)^k beta[k] x^{2k}
    pub beta: [f64; SERIES_TERMS],
    /// x/(e^x − 1) = Σ alpha[j] x^j
    pub alpha: [f64; 2 * SERIES_TERMS],
}

impl SeriesTables {
    pub fn new() -> Self {
        let b = coeff_table(CoeffKind::Beta, SERIES_TERMS - 1).to_f64();
        let a = coeff_table(CoeffKind::Alpha, 2 * SERIES_TERMS - 1).to_f64();
        let mut beta = [0.0; SERIES_TERMS];
        let mut alpha = [0.0; 2 * SERIES_TERMS];
        beta.copy_from_slice(&b);
        alpha.copy_from_slice(&a);
        Self { beta, alpha }
    }

    /// x/sinh x applied to a jet.
    pub fn h<const N: usize>(&self, x: &Jet<N>) -> Jet<N> {
        let x0 = fm::abs(x.c[0]);
        if x0 < SMALL_ARG {
            self.h_series(x)
        } else if x0 <= MID_ARG {
            h_reciprocal(x)
        } else {
            h_direct(x)
        }
    }

    fn h_series<const N: usize>(&self, x: &Jet<N>) -> Jet<N> {
        let mut p = [0.0; SERIES_TERMS];
        for (k, b) in self.beta.iter().enumerate() {
            p[k] = if k % 2 == 0 { *b } else { -*b };
        }
        x.square().compose_poly(&p)
    }

    /// x/(e^x − 1) applied to a jet.
    pub fn g<const N: usize>(&self, x: &Jet<N>) -> Jet<N> {
        let x0 = fm::abs(x.c[0]);
        if x0 < SMALL_ARG {
            self.g_series(x)
        } else if x0 <= MID_ARG {
            g_reciprocal(x)
        } else {
            g_direct(x)
        }
    }

    fn g_series<const N: usize>(&self, x: &Jet<N>) -> Jet<N> {
        x.compose_poly(&self.alpha)
    }
}

// 1 / (sinh x / x), the divisor being an entire series with positive terms
fn h_reciprocal<const N: usize>(x: &Jet<N>) -> Jet<N> {
    let mut p = [0.0; 26];
    let mut f = 1.0;
    for (j, pj) in p.iter_mut().enumerate() {
        *pj = 1.0 / f;
        f *= ((2 * j + 2) * (2 * j + 3)) as f64;
    }
    x.square().compose_poly(&p).recip().unwrap()
}

fn h_direct<const N: usize>(x: &Jet<N>) -> Jet<N> {
    x.div(&x.sinh()).unwrap()
}

fn g_reciprocal<const N: usize>(x: &Jet<N>) -> Jet<N> {
    let mut p = [0.0; 40];
    let mut f = 1.0;
    for (j, pj) in p.iter_mut().enumerate() {
        f *= (j + 1) as f64;
        *pj = 1.0 / f;
    }
    x.compose_poly(&p).recip().unwrap()
}

fn g_direct<const N: usize>(x: &Jet<N>) -> Jet<N> {
    x.div(&x.exp().add_const(-1.0)).unwrap()
}

impl Default for SeriesTables {
    fn default() -> Self {
        Self::new()
    }
}

/// Which analytic function of u an integrand descriptor stands for.
#[derive(Clone, Debug, PartialEq)]
pub enum IntegrandKind {
    /// h(u/2)²(h(u/(4πℓ)) + 1)
    H3 { ell: u32 },
    /// h(u/2)³ cosh(u/2)(h(u/(4πℓ))² + 1) − (1/3)(u/(4πℓ))² e^{−u/2} h(u/2)
    H5 { ell: u32 },
    /// 2h(u/2)², the ℓ → ∞ form of `H3`
    H3Limit,
    /// 2h(u/2)³ cosh(u/2), the ℓ → ∞ form of `H5`
    H5Limit,
    /// h(u/2)²
    HalfSquare,
    /// u/sinh u
    XOverSinh,
    /// e^{−u}
    ExpDecay,
    /// Σ p_i u^i
    Polynomial(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Integrand {
    pub kind: IntegrandKind,
    tables: SeriesTables,
}

impl Integrand {
    pub fn new(kind: IntegrandKind) -> Self {
        Self { kind, tables: SeriesTables::new() }
    }

    pub fn h3(ell: u32) -> Self {
        Self::new(IntegrandKind::H3 { ell })
    }

    pub fn h5(ell: u32) -> Self {
        Self::new(IntegrandKind::H5 { ell })
    }

    pub fn tables(&self) -> &SeriesTables {
        &self.tables
    }

    /// Exponentially decaying at infinity (needed by the subtraction method).
    pub fn is_decaying(&self) -> bool {
        !matches!(self.kind, IntegrandKind::Polynomial(_))
    }

    pub fn jet<const N: usize>(&self, u: f64) -> Jet<N> {
        let x = Jet::<N>::variable(u);
        let t = &self.tables;
        match &self.kind {
            IntegrandKind::H3 { ell } => {
                let c = 1.0 / (4.0 * PI * *ell as f64);
                let a = t.h(&x.scale(0.5)).square();
                a * t.h(&x.scale(c)).add_const(1.0)
            }
            IntegrandKind::H5 { ell } => {
                let c = 1.0 / (4.0 * PI * *ell as f64);
                let half = x.scale(0.5);
                let hh = t.h(&half);
                let first = hh.square() * hh * half.cosh() * t.h(&x.scale(c)).square().add_const(1.0);
                let xc = x.scale(c);
                let second = xc.square() * (-half).exp() * hh;
                first - second.scale(1.0 / 3.0)
            }
            IntegrandKind::H3Limit => t.h(&x.scale(0.5)).square().scale(2.0),
            IntegrandKind::H5Limit => {
                let half = x.scale(0.5);
                let hh = t.h(&half);
                (hh.square() * hh * half.cosh()).scale(2.0)
            }
            IntegrandKind::HalfSquare => t.h(&x.scale(0.5)).square(),
            IntegrandKind::XOverSinh => t.h(&x),
            IntegrandKind::ExpDecay => (-x).exp(),
            IntegrandKind::Polynomial(p) => x.compose_poly(p),
        }
    }

    pub fn value(&self, u: f64) -> f64 {
        self.jet::<1>(u).c[0]
    }

    /// F^{(k)}(u) for k ≤ 12.
    pub fn derivative(&self, u: f64, k: usize) -> f64 {
        self.jet::<13>(u).derivative(k)
    }
}

/// Public jet evaluation capped at order 12.
pub fn jet_eval(f: &Integrand, u: f64, order: usize) -> Result<TaylorJet> {
    if order > MAX_ORDER {
        return Err(Error::UnsupportedOrder(order));
    }
    if !(u >= 0.0) {
        return Err(Error::Domain("jet_eval needs u >= 0"));
    }
    let mut j = f.jet::<13>(u);
    for c in j.c.iter_mut().skip(order + 1) {
        *c = 0.0;
    }
    Ok(j)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    abs: f64,
}

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let hl = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    let mut abs = WGK[7] * fm::abs(fc);
    for j in 0..7 {
        let dx = hl * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        k += WGK[j] * (f1 + f2);
        abs += WGK[j] * (fm::abs(f1) + fm::abs(f2));
        if j % 2 == 1 {
            g += WG[j / 2] * (f1 + f2);
        }
    }
    Panel { a, b, value: k * hl, err: fm::abs((k - g) * hl), abs: abs * fm::abs(hl) }
}

const MAX_PANELS: usize = 4000;

/// Adaptive Gauss–Kronrod (7/15) quadrature. `b` may be +∞, in which case
/// the interval is mapped onto [0, 1) by u = a + x/(1 − x).
pub fn adaptive_quad(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<QuadResult> {
    adaptive_quad_abs(f, a, b, tol, 0.0)
}

/// As `adaptive_quad`, also stopping once the error estimate is below `abs_tol`.
pub fn adaptive_quad_abs(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, abs_tol: f64) -> Result<QuadResult> {
    if !(a < b) {
        return Err(Error::Domain("adaptive_quad needs a < b"));
    }
    if b == f64::INFINITY {
        let g = |x: f64| {
            let d = 1.0 - x;
            f(a + x / d) / (d * d)
        };
        return adaptive_quad_abs(&g, 0.0, 1.0, tol, abs_tol);
    }
    let mut panels: Vec<Panel> = Vec::new();
    panels.push(gk15(f, a, b));
    let mut evals = 15;
    loop {
        let mut total = Kahan::new();
        let mut err = 0.0;
        let mut abs = 0.0;
        let mut worst = 0;
        for (i, p) in panels.iter().enumerate() {
            total.add(p.value);
            err += p.err;
            abs += p.abs;
            if p.err > panels[worst].err {
                worst = i;
            }
        }
        let value = total.value();
        let floor = f64::max(50.0 * f64::EPSILON * abs, abs_tol);
        if err <= f64::max(tol * fm::abs(value), floor) || err == 0.0 {
            return Ok(QuadResult { value, error_estimate: err, evaluations: evals });
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::Accuracy { best: value, error: err });
        }
        let p = panels.swap_remove(worst);
        let m = 0.5 * (p.a + p.b);
        if !(m > p.a && m < p.b) {
            // interval exhausted at machine resolution: accept what we have
            panels.push(p);
            let v: f64 = panels.iter().map(|p| p.value).sum();
            return Ok(QuadResult { value: v, error_estimate: err, evaluations: evals });
        }
        panels.push(gk15(f, p.a, m));
        panels.push(gk15(f, m, p.b));
        evals += 30;
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    /// Direct quadrature of F^{(k)}(u) log u.
    JetDirect,
    /// Repeated integration by parts against the Taylor polynomial on [0, r].
    Subtraction { r: f64 },
}

impl Method {
    pub fn subtraction() -> Self {
        Method::Subtraction { r: 2.0 }
    }
}

const EPS_PANEL: f64 = 1e-3;
const QUAD_TOL: f64 = 1e-13;
const TAIL_REL: f64 = 1e-18;
const MAX_U: f64 = 8192.0;

/// ∫₀^∞ F^{(k)}(u) log u du.
pub fn log_weighted_integral(f: &Integrand, k: usize, method: Method) -> Result<QuadResult> {
    if k == 0 || k > MAX_ORDER {
        return Err(Error::UnsupportedOrder(k));
    }
    match method {
        Method::JetDirect => jet_direct(f, k),
        Method::Subtraction { r } => subtraction(f, k, r),
    }
}

// ∫₀^ε u^j log u du
fn log_moment(j: usize, eps: f64) -> f64 {
    let p = (j + 1) as f64;
    fm::powf(eps, p) * (fm::ln(eps) / p - 1.0 / (p * p))
}

/// Sum panel integrals over [a, 2a], [2a, 4a], ... until they are negligible.
fn doubling_tail(g: &dyn Fn(f64) -> f64, start: f64, acc: &mut Kahan, err: &mut f64, evals: &mut usize) -> Result<()> {
    let mut a = start;
    let mut b = f64::max(2.0 * start, start + 1.0);
    loop {
        let q = adaptive_quad(g, a, b, QUAD_TOL)?;
        acc.add(q.value);
        *err += q.error_estimate;
        *evals += q.evaluations;
        if b >= 16.0 && fm::abs(q.value) <= TAIL_REL * f64::max(fm::abs(acc.value()), 1e-300) {
            return Ok(());
        }
        if b > 8.0 && q.value == 0.0 && acc.value() == 0.0 {
            return Ok(());
        }
        if b >= MAX_U {
            return Err(Error::Accuracy { best: acc.value(), error: fm::abs(q.value) });
        }
        a = b;
        b *= 2.0;
    }
}

fn jet_direct(f: &Integrand, k: usize) -> Result<QuadResult> {
    let j0 = f.jet::<13>(0.0);
    let mut acc = Kahan::new();
    // singular panel: F^{(k)}(u) = Σ_j (k+j)!/j! c_{k+j} u^j
    let mut fall = crate::specfun::factorial(k);
    for j in 0..=(MAX_ORDER - k) {
        acc.add(fall * j0.c[k + j] * log_moment(j, EPS_PANEL));
        fall *= (k + j + 1) as f64 / (j + 1) as f64;
    }
    let g = |u: f64| f.derivative(u, k) * fm::ln(u);
    let mut err = 0.0;
    let mut evals = 0;
    let q = adaptive_quad(&g, EPS_PANEL, 1.0, QUAD_TOL)?;
    acc.add(q.value);
    err += q.error_estimate;
    evals += q.evaluations;
    doubling_tail(&g, 1.0, &mut acc, &mut err, &mut evals)?;
    Ok(QuadResult { value: acc.value(), error_estimate: err, evaluations: evals })
}

const SUB_SERIES: usize = 31;
const SUB_SWITCH: f64 = 1.0;

fn subtraction(f: &Integrand, k: usize, r: f64) -> Result<QuadResult> {
    if !f.is_decaying() {
        return Err(Error::Capability("subtraction needs an integrand decaying at infinity"));
    }
    if !(r > 0.0) {
        return Err(Error::Domain("split point r must be positive"));
    }
    let c = f.jet::<SUB_SERIES>(0.0).c;
    // P^{(m)}(r) for the degree-(k−1) Taylor polynomial P
    let p_deriv = |m: usize| -> f64 {
        let mut s = 0.0;
        for j in m..k {
            let mut ff = 1.0;
            for i in 0..m {
                ff *= (j - i) as f64;
            }
            s += c[j] * ff * fm::powi(r, (j - m) as i32);
        }
        s
    };
    let mut boundary = -p_deriv(k - 1) * fm::ln(r);
    for j in 1..k {
        boundary += crate::specfun::factorial(j - 1) * p_deriv(k - j - 1) * fm::powi(r, -(j as i32));
    }

    let mut inner = Kahan::new();
    let mut err = 0.0;
    let mut evals = 0;
    // (F − P)/u^k = Σ_{j≥k} c_j u^{j−k} integrated exactly up to min(r, 1)
    let rs = f64::min(r, SUB_SWITCH);
    for j in k..SUB_SERIES {
        let p = (j - k + 1) as f64;
        inner.add(c[j] * fm::powf(rs, p) / p);
    }
    if r > SUB_SWITCH {
        let g = |u: f64| {
            let mut poly = 0.0;
            for j in (0..k).rev() {
                poly = poly * u + c[j];
            }
            (f.value(u) - poly) * fm::powi(u, -(k as i32))
        };
        let q = adaptive_quad(&g, SUB_SWITCH, r, QUAD_TOL)?;
        inner.add(q.value);
        err += q.error_estimate;
        evals += q.evaluations;
    }
    let tail = |u: f64| f.value(u) * fm::powi(u, -(k as i32));
    doubling_tail(&tail, r, &mut inner, &mut err, &mut evals)?;

    let kf = crate::specfun::factorial(k - 1);
    let value = boundary - kf * inner.value();
    Ok(QuadResult { value, error_estimate: kf * err, evaluations: evals })
}

/// Beta table as floats, handy for comparing against jets.
pub fn beta_f64(k_max: usize) -> Vec<f64> {
    coeff_table(CoeffKind::Beta, k_max).values.iter().map(rational_to_f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::EULER_GAMMA;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        fm::abs(a - b) / f64::max(fm::abs(b), 1e-300)
    }

    // 4th derivative by central differences, two Richardson levels
    fn fd4(f: &dyn Fn(f64) -> f64, u: f64, h: f64) -> f64 {
        let d = |h: f64| {
            (f(u + 2.0 * h) - 4.0 * f(u + h) + 6.0 * f(u) - 4.0 * f(u - h) + f(u - 2.0 * h)) / fm::powi(h, 4)
        };
        let r1 = |h: f64| (4.0 * d(h / 2.0) - d(h)) / 3.0;
        (16.0 * r1(h / 2.0) - r1(h)) / 15.0
    }

    #[test]
    fn jet_eval_examples() {
        let f = Integrand::h3(1);
        assert!(fm::abs(jet_eval(&f, 0.0, 4).unwrap().c[0] - 2.0) < 1e-15);
        let hs = Integrand::new(IntegrandKind::HalfSquare);
        assert!(fm::abs(jet_eval(&hs, 0.0, 2).unwrap().c[2] + 1.0 / 12.0) < 1e-15);
        let d4 = jet_eval(&f, 1.0, 4).unwrap().derivative(4);
        let fd = fd4(&|u| f.value(u), 1.0, 0.08);
        assert!(rel(d4, fd) < 1e-6, "{d4} vs {fd}");
        assert_eq!(jet_eval(&f, 0.0, 13), Err(Error::UnsupportedOrder(13)));
    }

    #[test]
    fn beta_matches_jet() {
        let b = beta_f64(6);
        let j = jet_eval(&Integrand::new(IntegrandKind::XOverSinh), 0.0, 12).unwrap();
        for k in 0..=6 {
            let expect = if k % 2 == 0 { b[k] } else { -b[k] };
            assert!(fm::abs(j.c[2 * k] - expect) <= 1e-12 * fm::abs(expect));
            if 2 * k + 1 <= 12 {
                assert!(fm::abs(j.c[2 * k + 1]) < 1e-15);
            }
        }
    }

    #[test]
    fn branches_agree_at_thresholds() {
        // the three evaluation regimes must agree where they hand over
        let t = SeriesTables::new();
        let close = |a: &TaylorJet, b: &TaylorJet| (0..13).all(|j| fm::abs(a.c[j] - b.c[j]) < 1e-13 * (1.0 + fm::abs(a.c[j])));
        let x = Jet::<13>::variable(SMALL_ARG);
        assert!(close(&t.h_series(&x), &h_reciprocal(&x)));
        assert!(close(&t.g_series(&x), &g_reciprocal(&x)));
        let x = Jet::<13>::variable(MID_ARG);
        assert!(close(&h_reciprocal(&x), &h_direct(&x)));
        assert!(close(&g_reciprocal(&x), &g_direct(&x)));
    }

    #[test]
    fn jet_polynomial_exact() {
        // (1 + u)^5 at u = 0.7
        let y = Jet::<13>::variable(0.7).add_const(1.0);
        let q = y * y * y * y * y;
        let base: f64 = 1.7;
        let binom = [1.0, 5.0, 10.0, 10.0, 5.0, 1.0];
        for j in 0..6 {
            let expect = binom[j] * fm::powi(base, 5 - j as i32);
            assert!(fm::abs(q.c[j] - expect) < 1e-14 * expect);
        }
        let p = y.compose_poly(&[0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(p.c, q.c);
    }

    #[test]
    fn quad_examples() {
        let q = adaptive_quad(&|u| fm::ln(u), 0.0, 1.0, 1e-12).unwrap();
        assert!(fm::abs(q.value + 1.0) < 1e-12);
        let z: f64 = 2.0;
        let q = adaptive_quad(&|t| fm::exp(-t - z * z / (4.0 * t)) / fm::sqrt(t), 0.0, f64::INFINITY, 1e-13).unwrap();
        assert!(rel(q.value, fm::sqrt(PI) * fm::exp(-z)) < 1e-12);
        let q = adaptive_quad(&|t| t * t / (1.0 + t * t), 0.0, 1.0, 1e-14).unwrap();
        assert!(fm::abs(q.value - (1.0 - PI / 4.0)) < 1e-14);
    }

    #[test]
    fn exp_decay_log_integral() {
        // ∫ (e^{−u})^{(k)} log u = (−1)^k ∫ e^{−u} log u = (−1)^{k+1} γ
        let f = Integrand::new(IntegrandKind::ExpDecay);
        for &k in &[4usize, 6] {
            let expect = if k % 2 == 0 { -EULER_GAMMA } else { EULER_GAMMA };
            let a = log_weighted_integral(&f, k, Method::JetDirect).unwrap().value;
            let b = log_weighted_integral(&f, k, Method::subtraction()).unwrap().value;
            assert!(fm::abs(a - expect) < 1e-12, "{a}");
            assert!(fm::abs(b - expect) < 1e-12, "{b}");
        }
    }

    #[test]
    fn methods_agree_h3() {
        for ell in [1u32, 3] {
            let f = Integrand::h3(ell);
            let a = log_weighted_integral(&f, 4, Method::JetDirect).unwrap().value;
            for &r in &[1.0, 2.0, 2.0 * fm::powf(3.0, 0.25)] {
                let b = log_weighted_integral(&f, 4, Method::Subtraction { r }).unwrap().value;
                assert!(rel(a, b) < 1e-10, "ell={ell} r={r}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn methods_agree_h5() {
        let f = Integrand::h5(1);
        let a = log_weighted_integral(&f, 6, Method::JetDirect).unwrap().value;
        for &r in &[1.0, 2.0, 2.0 * fm::powf(3.0, 0.25)] {
            let b = log_weighted_integral(&f, 6, Method::Subtraction { r }).unwrap().value;
            assert!(rel(a, b) < 1e-9, "r={r}: {a} vs {b}");
        }
    }

    #[test]
    fn limit_integral_signs() {
        let a = log_weighted_integral(&Integrand::new(IntegrandKind::H3Limit), 4, Method::JetDirect).unwrap();
        assert!(a.value < 0.0);
        let b = log_weighted_integral(&Integrand::new(IntegrandKind::H5Limit), 6, Method::JetDirect).unwrap();
        assert!(b.value < 0.0);
    }

    #[test]
    fn polynomial_below_order_vanishes() {
        let f = Integrand::new(IntegrandKind::Polynomial(alloc::vec![1.0, -2.0, 0.5, 3.0]));
        let q = log_weighted_integral(&f, 4, Method::JetDirect).unwrap();
        assert!(fm::abs(q.value) < 1e-14);
        assert!(log_weighted_integral(&f, 4, Method::subtraction()).is_err());
    }

    proptest! {
        #[test]
        fn jet_exp_log_roundtrip(c in 0.1f64..5.0, a in -2.0f64..2.0) {
            let x = Jet::<13>::variable(c);
            let y = (x.scale(a)).exp().ln().unwrap();
            let z = x.scale(a);
            for j in 0..13 {
                prop_assert!(fm::abs(y.c[j] - z.c[j]) < 1e-12 * (1.0 + fm::abs(z.c[j])));
            }
        }

        #[test]
        fn jet_div_mul_inverse(c in 0.5f64..3.0) {
            let x = Jet::<13>::variable(c);
            let s = x.sinh();
            let q = (s * x).div(&x).unwrap();
            for j in 0..13 {
                prop_assert!(fm::abs(q.c[j] - s.c[j]) < 1e-12 * (1.0 + fm::abs(s.c[j])));
            }
        }

        #[test]
        fn h3_derivative_matches_fd(u in 0.3f64..6.0) {
            let f = Integrand::h3(2);
            let d4 = f.derivative(u, 4);
            let fd = fd4(&|v| f.value(v), u, 0.08);
            prop_assert!(fm::abs(d4 - fd) < 1e-6 * (1.0 + fm::abs(d4)));
        }
    }
}
