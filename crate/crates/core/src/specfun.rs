//! Special functions: exact Bernoulli-type tables, Riemann zeta, Gamma,
//! digamma and the modified Bessel function K.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::fm::{self, LN_2, PI};

pub type Rational = BigRational;

/// Euler's constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn binomial_big(n: usize, k: usize) -> BigInt {
    let mut b = BigInt::one();
    for i in 0..k {
        b = b * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    b
}

fn factorial_big(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// B_0 ..= B_n with the B_1 = -1/2 convention.
pub fn bernoulli_table(n: usize) -> Vec<Rational> {
    let mut b: Vec<Rational> = Vec::with_capacity(n + 1);
    b.push(Rational::one());
    for k in 1..=n {
        let mut acc = Rational::zero();
        for (j, bj) in b.iter().enumerate() {
            acc += Rational::from_integer(binomial_big(k + 1, j)) * bj;
        }
        b.push(-acc / Rational::from_integer(BigInt::from(k + 1)));
    }
    b
}

/// Exact Bernoulli number B_k. Odd k >= 3 gives 0.
pub fn bernoulli(k: usize) -> Rational {
    if k >= 3 && k % 2 == 1 {
        return Rational::zero();
    }
    bernoulli_table(k).pop().unwrap()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoeffKind {
    /// Taylor coefficients of x/(e^x - 1), indexed by the power of x.
    Alpha,
    /// beta_{2k}: x/sinh x = sum (-1)^k beta_{2k} x^{2k}, indexed by k.
    Beta,
    /// gamma_{2k}: (x/sinh x)^2 = sum (-1)^k gamma_{2k} x^{2k}, indexed by k.
    Gamma,
    /// Same convolution as `Gamma` under its other name.
    Delta,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoeffTable {
    pub kind: CoeffKind,
    pub values: Vec<Rational>,
}

impl CoeffTable {
    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(rational_to_f64).collect()
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn beta_values(k_max: usize) -> Vec<Rational> {
    let b = bernoulli_table(2 * k_max);
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(Rational::one());
    for k in 1..=k_max {
        let two_pow = (BigInt::one() << (2 * k)) - BigInt::from(2);
        let v = Rational::from_integer(two_pow) * &b[2 * k]
            / Rational::from_integer(factorial_big(2 * k));
        // B_{2k} alternates in sign; beta_{2k} is its positive magnitude.
        out.push(v.abs());
    }
    out
}

pub fn coeff_table(kind: CoeffKind, k_max: usize) -> CoeffTable {
    let values = match kind {
        CoeffKind::Alpha => {
            let b = bernoulli_table(k_max);
            b.iter()
                .enumerate()
                .map(|(j, bj)| bj / Rational::from_integer(factorial_big(j)))
                .collect()
        }
        CoeffKind::Beta => beta_values(k_max),
        CoeffKind::Gamma | CoeffKind::Delta => {
            let beta = beta_values(k_max);
            (0..=k_max)
                .map(|k| {
                    let mut acc = Rational::zero();
                    for l in 0..=k {
                        acc += &beta[k - l] * &beta[l];
                    }
                    acc
                })
                .collect()
        }
    };
    CoeffTable { kind, values }
}

/// Coefficients a_n of x^{2n} in cosh x - (1 - x^4/15)(sinh x / x)^3,
/// for n = 0 ..= n_max (the first three vanish).
pub fn sinh_cube_coeffs(n_max: usize) -> Vec<Rational> {
    // sinh x / x = sum x^{2j}/(2j+1)!
    let s: Vec<Rational> = (0..=n_max)
        .map(|j| Rational::new(BigInt::one(), factorial_big(2 * j + 1)))
        .collect();
    let conv = |a: &[Rational], b: &[Rational]| -> Vec<Rational> {
        (0..=n_max)
            .map(|n| {
                let mut acc = Rational::zero();
                for i in 0..=n {
                    acc += &a[i] * &b[n - i];
                }
                acc
            })
            .collect()
    };
    let s3 = conv(&conv(&s, &s), &s);
    let fifteenth = rat(1, 15);
    (0..=n_max)
        .map(|n| {
            let cosh = Rational::new(BigInt::one(), factorial_big(2 * n));
            let mut poly = s3[n].clone();
            if n >= 2 {
                poly -= &fifteenth * &s3[n - 2];
            }
            cosh - poly
        })
        .collect()
}

// B_{2k} for k = 0..=11 as floats, used for zeta at negative integers.
const BERNOULLI_EVEN: [f64; 12] = [
    1.0,
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
];

const BORWEIN_N: usize = 50;

fn borwein_d() -> [f64; BORWEIN_N + 1] {
    let n = BORWEIN_N as f64;
    let mut d = [0.0; BORWEIN_N + 1];
    let mut term = 1.0;
    let mut acc = 1.0;
    d[0] = 1.0;
    for i in 1..=BORWEIN_N {
        let fi = i as f64;
        term *= 4.0 * (n + fi - 1.0) * (n - fi + 1.0) / ((2.0 * fi) * (2.0 * fi - 1.0));
        acc += term;
        d[i] = acc;
    }
    d
}

/// Dirichlet eta and its derivative for s >= 0.
fn eta_and_prime(s: f64) -> (f64, f64) {
    let d = borwein_d();
    let dn = d[BORWEIN_N];
    let mut e = fm::Kahan::new();
    let mut ep = fm::Kahan::new();
    for k in 0..BORWEIN_N {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let lk = fm::ln((k + 1) as f64);
        let w = sign * (d[k] - dn) * fm::exp(-s * lk);
        e.add(w);
        ep.add(-w * lk);
    }
    (-e.value() / dn, -ep.value() / dn)
}

fn is_integer(x: f64) -> bool {
    fm::floor(x) == x
}

/// Riemann zeta on the real line.
pub fn riemann_zeta(s: f64) -> Result<f64> {
    if s == 1.0 {
        return Err(Error::Pole(1.0));
    }
    if s.is_nan() {
        return Err(Error::Domain("zeta argument is NaN"));
    }
    if s >= 0.0 {
        if s > 60.0 {
            return Ok(1.0 + fm::powf(2.0, -s) + fm::powf(3.0, -s));
        }
        let (eta, _) = eta_and_prime(s);
        let den = -fm::expm1((1.0 - s) * LN_2);
        return Ok(eta / den);
    }
    if is_integer(s) {
        let n = (-s) as usize;
        if n % 2 == 0 {
            return Ok(0.0);
        }
        if n + 1 < 2 * BERNOULLI_EVEN.len() {
            return Ok(-BERNOULLI_EVEN[(n + 1) / 2] / (n as f64 + 1.0));
        }
    }
    let zr = riemann_zeta(1.0 - s)?;
    Ok(fm::powf(2.0, s) * fm::powf(PI, s - 1.0) * fm::sinpi(s / 2.0) * gamma(1.0 - s) * zr)
}

/// Hurwitz zeta sum_{j>=0} (a+j)^{-s} for s > 1, a > 0 (Euler-Maclaurin).
pub fn hurwitz_zeta(s: f64, a: f64) -> Result<f64> {
    if !(s > 1.0) || !(a > 0.0) {
        return Err(Error::Domain("hurwitz zeta needs s > 1 and a > 0"));
    }
    const N: usize = 12;
    let mut acc = fm::Kahan::new();
    for j in 0..N {
        acc.add(fm::powf(a + j as f64, -s));
    }
    let x = a + N as f64;
    acc.add(fm::powf(x, 1.0 - s) / (s - 1.0) + 0.5 * fm::powf(x, -s));
    // B_{2k}/(2k)! * s(s+1)...(s+2k-2) x^{-s-2k+1}
    let mut rising = s;
    let mut fact = 2.0;
    let mut xp = fm::powf(x, -s - 1.0);
    for k in 1..BERNOULLI_EVEN.len() {
        acc.add(BERNOULLI_EVEN[k] / fact * rising * xp);
        let k2 = 2.0 * k as f64;
        rising *= (s + k2 - 1.0) * (s + k2);
        fact *= (k2 + 1.0) * (k2 + 2.0);
        xp /= x * x;
    }
    Ok(acc.value())
}

/// Derivative of the Riemann zeta function on the real line.
pub fn riemann_zeta_prime(s: f64) -> Result<f64> {
    if s == 1.0 {
        return Err(Error::Pole(1.0));
    }
    if s == 0.0 {
        return Ok(-0.5 * fm::ln(2.0 * PI));
    }
    if s > 0.0 {
        if s > 60.0 {
            return Ok(-LN_2 * fm::powf(2.0, -s) - fm::ln(3.0) * fm::powf(3.0, -s));
        }
        let (eta, etap) = eta_and_prime(s);
        let p = fm::exp((1.0 - s) * LN_2);
        let den = -fm::expm1((1.0 - s) * LN_2);
        let dden = p * LN_2;
        return Ok((etap * den - eta * dden) / (den * den));
    }
    let a = 1.0 - s;
    let z = riemann_zeta(a)?;
    let zp = riemann_zeta_prime(a)?;
    let pref = fm::powf(2.0, s) * fm::powf(PI, s - 1.0) * gamma(a);
    let sn = fm::sinpi(s / 2.0);
    let cs = fm::cospi(s / 2.0);
    let chi_p = pref * (sn * (fm::ln(2.0 * PI) - digamma(a)) + 0.5 * PI * cs);
    Ok(chi_p * z - pref * sn * zp)
}

pub fn gamma(x: f64) -> f64 {
    fm::tgamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    fm::lgamma(x)
}

/// Digamma function psi = Gamma'/Gamma. Poles at the non-positive integers
/// give NaN.
pub fn digamma(x: f64) -> f64 {
    if x <= 0.0 {
        if is_integer(x) {
            return f64::NAN;
        }
        return digamma(1.0 - x) - PI * fm::cospi(x) / fm::sinpi(x);
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let x2 = 1.0 / (x * x);
    // sum B_{2k}/(2k x^{2k}), k = 1..=7
    let mut series = 0.0;
    let mut p = x2;
    for k in 1..=7 {
        series += BERNOULLI_EVEN[k] / (2.0 * k as f64) * p;
        p *= x2;
    }
    acc + fm::ln(x) - 0.5 / x - series
}

/// Modified Bessel function of the second kind K_nu(z), z > 0.
pub fn bessel_k(nu: f64, z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::Domain("bessel_k needs z > 0"));
    }
    let nu = fm::abs(nu);
    if z > 740.0 {
        return Ok(0.0);
    }
    let half = || fm::sqrt(PI / (2.0 * z)) * fm::exp(-z);
    if nu == 0.5 {
        return Ok(half());
    }
    if nu == 1.5 {
        return Ok(half() * (1.0 + 1.0 / z));
    }
    if nu == 2.5 {
        return Ok(half() * (1.0 + 3.0 / z + 3.0 / (z * z)));
    }
    Ok(bessel_k_trapezoid(nu, z))
}

// Trapezoid rule on int_0^inf exp(-z cosh t) cosh(nu t) dt. The integrand is
// entire, so the rule converges geometrically; the strip half-width `a` is
// narrowed for large z where exp(-z cosh) grows quickly off the real axis.
fn bessel_k_trapezoid(nu: f64, z: f64) -> f64 {
    let a = f64::min(1.4, 2.0 / fm::sqrt(z));
    let h = 2.0 * PI * a / 45.0;
    let t_peak = fm::asinh(nu / z);
    let f = |t: f64| {
        let e = -z * fm::cosh(t) + nu * t;
        fm::exp(e) * 0.5 * (1.0 + fm::exp(-2.0 * nu * t))
    };
    let mut acc = fm::Kahan::new();
    acc.add(0.5 * f(0.0));
    let mut j = 1usize;
    loop {
        let t = j as f64 * h;
        let v = f(t);
        acc.add(v);
        if t > t_peak && v < 1e-18 * acc.value() {
            break;
        }
        if j > 100_000 {
            break;
        }
        j += 1;
    }
    acc.value() * h
}

/// Generalized binomial coefficient alpha(alpha-1)...(alpha-m+1)/m!.
pub fn gen_binomial(alpha: f64, m: usize) -> f64 {
    let mut d = 1.0;
    for i in 0..m {
        d *= (alpha - i as f64) / (i as f64 + 1.0);
    }
    d
}

/// Double factorial, extended to negative odd n by n!! = (n+2)!!/(n+2).
pub fn double_factorial(n: i64) -> Result<f64> {
    if n >= 0 {
        let mut p = 1.0;
        let mut k = n;
        while k > 1 {
            p *= k as f64;
            k -= 2;
        }
        return Ok(p);
    }
    if n % 2 == 0 {
        return Err(Error::Domain("double factorial of a negative even integer"));
    }
    let mut v = 1.0; // (-1)!!
    let mut k = -1;
    while k > n {
        // (k-2)!! = k!! / k
        v /= k as f64;
        k -= 2;
    }
    Ok(v)
}

/// Exact rational double factorial for odd n (negative allowed).
pub fn double_factorial_exact(n: i64) -> Result<Rational> {
    if n >= 0 {
        let mut p = BigInt::one();
        let mut k = n;
        while k > 1 {
            p *= BigInt::from(k);
            k -= 2;
        }
        return Ok(Rational::from_integer(p));
    }
    if n % 2 == 0 {
        return Err(Error::Domain("double factorial of a negative even integer"));
    }
    let mut v = Rational::one();
    let mut k = -1;
    while k > n {
        v /= Rational::from_integer(BigInt::from(k));
        k -= 2;
    }
    Ok(v)
}

/// Harmonic number H_k.
pub fn harmonic(k: usize) -> f64 {
    (1..=k).map(|j| 1.0 / j as f64).sum()
}

/// Factorial as a float.
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}
