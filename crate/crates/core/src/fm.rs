//! Thin f64 math layer over `libm` so the core stays `no_std`.

pub use core::f64::consts::{LN_2, PI};

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}
#[inline]
pub fn expm1(x: f64) -> f64 {
    libm::expm1(x)
}
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}
#[inline]
pub fn ln1p(x: f64) -> f64 {
    libm::log1p(x)
}
#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}
#[inline]
pub fn powi(x: f64, n: i32) -> f64 {
    libm::pow(x, n as f64)
}
#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}
#[inline]
pub fn sinh(x: f64) -> f64 {
    libm::sinh(x)
}
#[inline]
pub fn cosh(x: f64) -> f64 {
    libm::cosh(x)
}
#[inline]
pub fn asinh(x: f64) -> f64 {
    libm::asinh(x)
}
#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}
#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}
#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}
#[inline]
pub fn tgamma(x: f64) -> f64 {
    libm::tgamma(x)
}
#[inline]
pub fn lgamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// sin(πx) with exact zeros at the integers.
pub fn sinpi(x: f64) -> f64 {
    let r = x - 2.0 * round(x / 2.0);
    // r in [-1, 1]
    if r == 0.0 || abs(r) == 1.0 {
        return 0.0;
    }
    if abs(r) == 0.5 {
        return r.signum();
    }
    if r > 0.5 {
        sin(PI * (1.0 - r))
    } else if r < -0.5 {
        sin(PI * (-1.0 - r))
    } else {
        sin(PI * r)
    }
}

/// cos(πx) with exact zeros at the half-integers.
pub fn cospi(x: f64) -> f64 {
    sinpi(x + 0.5)
}

/// Compensated accumulator with a fixed summation order.
#[derive(Clone, Copy, Debug, Default)]
pub struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Self::default()
    }
    #[inline]
    pub fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }
    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}
