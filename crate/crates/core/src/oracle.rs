//! Ground truth that knows only the spectrum: heat traces by direct
//! summation and the spectral zeta function continued through the split
//! Mellin transform
//!
//!   Gamma(s) zeta(s) = int_0^tau (K - A) t^{s-1} dt + sum_i c_i tau^{s+p_i}/(s+p_i)
//!                      - tau^s / s + int_tau^inf (K - 1) t^{s-1} dt
//!
//! where K is the heat trace and A = sum_i c_i t^{p_i} its small-t expansion.

use alloc::vec::Vec;

use crate::analytic::adaptive_quad;
use crate::error::{Error, Result};
use crate::fm::{self, PI};
use crate::product::SpectralData;
use crate::specfun::{factorial, gamma, EULER_GAMMA};

const QUAD_TOL: f64 = 1e-12;
const POLE_GUARD: f64 = 1e-3 - 1e-12;
// Past t ~ 1e-2 the geodesic terms e^{-|gamma|^2/4t} of unit-size manifolds
// are no longer negligible and spoil a power-series fit.
const FIT_RANGE: (f64, f64) = (1e-3, 1e-2);
const FIT_POINTS: usize = 48;

pub fn theta_trace<M: SpectralData + ?Sized>(m: &M, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain("heat trace needs t > 0"));
    }
    Ok(m.trace(t))
}

/// Least-squares fit of (4 pi t)^{dim/2} K(t) against 1, t, ..., t^{n-1} on a
/// log grid over [1e-3, 1e-2].
pub fn fit_heat_coeffs<M: SpectralData + ?Sized>(m: &M, n_terms: usize) -> Result<Vec<f64>> {
    let d = m.dim() as f64;
    fit_power_series(&|t| fm::powf(4.0 * PI * t, d / 2.0) * m.trace(t), n_terms, FIT_RANGE)
}

/// Least-squares coefficients of f(t) ~ sum_i c_i t^i on a log grid.
///
/// The basis is scaled to t / t_max so the normal equations stay well
/// conditioned for the handful of terms used here.
pub fn fit_power_series(f: &dyn Fn(f64) -> f64, n_terms: usize, range: (f64, f64)) -> Result<Vec<f64>> {
    if n_terms == 0 || n_terms > 8 {
        return Err(Error::Input("fit needs between 1 and 8 terms"));
    }
    let (lo, hi) = range;
    let mut ata = [[0.0f64; 8]; 8];
    let mut atb = [0.0f64; 8];
    for j in 0..FIT_POINTS {
        let t = lo * fm::powf(hi / lo, j as f64 / (FIT_POINTS - 1) as f64);
        let y = f(t);
        if !y.is_finite() {
            return Err(Error::Capability("heat trace not finite on the fit grid"));
        }
        let x = t / hi;
        let mut row = [0.0f64; 8];
        let mut p = 1.0;
        for r in row.iter_mut().take(n_terms) {
            *r = p;
            p *= x;
        }
        for a in 0..n_terms {
            atb[a] += row[a] * y;
            for b in 0..n_terms {
                ata[a][b] += row[a] * row[b];
            }
        }
    }
    let c = solve(&mut ata, &mut atb, n_terms)?;
    Ok((0..n_terms).map(|i| c[i] * fm::powi(hi, -(i as i32))).collect())
}

// Accepts a quadrature whose only shortfall is an absolute error at rounding level.
pub(crate) fn quad(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    if !(a < b) {
        return Ok(0.0);
    }
    match adaptive_quad(f, a, b, QUAD_TOL) {
        Ok(r) => Ok(r.value),
        Err(Error::Accuracy { best, error }) if error < 1e-12 => Ok(best),
        Err(e) => Err(e),
    }
}

fn solve(a: &mut [[f64; 8]; 8], b: &mut [f64; 8], n: usize) -> Result<[f64; 8]> {
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| fm::abs(a[i][col]).total_cmp(&fm::abs(a[j][col]))).unwrap();
        if fm::abs(a[piv][col]) < 1e-300 {
            return Err(Error::Capability("singular fit"));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 8];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Ok(x)
}

/// A prepared continuation: expansion coefficients, split point and the
/// integration range, shared by every s.
pub struct Continuation<'a, M: SpectralData + ?Sized> {
    m: &'a M,
    /// (p_i, c_i) with K(t) ~ sum c_i t^{p_i}.
    asymptotics: Vec<(f64, f64)>,
    tau: f64,
    t_lo: f64,
    lambda1: f64,
    mult1: f64,
}

impl<'a, M: SpectralData + ?Sized> Continuation<'a, M> {
    /// Uses the supplied heat coefficients, fitting them when absent.
    pub fn new(m: &'a M) -> Result<Self> {
        let asym = match m.heat_asymptotics() {
            Some(a) => a,
            None => fitted_asymptotics(m)?,
        };
        Self::with_asymptotics(m, asym)
    }

    /// Ignores any supplied coefficients and fits them from the trace.
    pub fn fitted(m: &'a M) -> Result<Self> {
        let asym = fitted_asymptotics(m)?;
        Self::with_asymptotics(m, asym)
    }

    pub fn with_asymptotics(m: &'a M, asymptotics: Vec<(f64, f64)>) -> Result<Self> {
        let (lambda1, mult1) = first_eigenvalue(m)?;
        let tau = 1.0;
        let mut c = Self { m, asymptotics, tau, t_lo: tau, lambda1, mult1 };
        c.t_lo = c.find_t_lo();
        Ok(c)
    }

    pub fn asymptotics(&self) -> &[(f64, f64)] {
        &self.asymptotics
    }

    fn expansion(&self, t: f64) -> f64 {
        self.asymptotics.iter().map(|&(p, c)| c * fm::powf(t, p)).sum()
    }

    // Below t_lo the subtracted trace is at rounding level or the floor is hit.
    fn find_t_lo(&self) -> f64 {
        let mut t = self.tau;
        while t > 1e-6 {
            let a = self.expansion(t);
            let k = self.m.trace(t);
            if fm::abs(k - a) <= 1e-15 * fm::abs(a) {
                break;
            }
            t *= 0.5;
        }
        t
    }

    /// Gamma(s) zeta(s) for s away from 0.
    fn gamma_zeta(&self, s: f64) -> Result<f64> {
        let tau = self.tau;
        let near = |u: f64| {
            let t = fm::exp(u);
            (self.m.trace(t) - self.expansion(t)) * fm::exp(u * s)
        };
        let i0 = quad(&near, fm::ln(self.t_lo), fm::ln(tau))?;
        let i_inf = self.large_t_integral(s)?;
        let mut total = i0 + i_inf - fm::powf(tau, s) / s;
        for &(p, c) in &self.asymptotics {
            total += c * fm::powf(tau, s + p) / (s + p);
        }
        Ok(total)
    }

    fn large_t_integral(&self, s: f64) -> Result<f64> {
        let tau = self.tau;
        let t_hi = tau + (50.0 + 3.0 * fm::abs(s) + fm::ln(self.mult1.max(1.0))) / self.lambda1;
        let far = |t: f64| (self.m.trace(t) - 1.0) * fm::powf(t, s - 1.0);
        // Split so each panel sees a few e-foldings of the lowest mode.
        let step = 8.0 / self.lambda1;
        let mut a = tau;
        let mut acc = 0.0;
        while a < t_hi {
            let b = (a + step).min(t_hi);
            acc += quad(&far, a, b)?;
            a = b;
        }
        Ok(acc)
    }

    fn check_pole(&self, s: f64) -> Result<()> {
        for &(p, c) in &self.asymptotics {
            let pole = -p;
            let cancelled = pole <= 0.0 && fm::floor(pole) == pole;
            if c != 0.0 && !cancelled && fm::abs(s - pole) < POLE_GUARD {
                return Err(Error::Pole(pole));
            }
        }
        Ok(())
    }

    pub fn zeta(&self, s: f64) -> Result<f64> {
        self.check_pole(s)?;
        if s <= 0.0 && fm::floor(s) == s {
            // 1/Gamma vanishes; only the residue of Gamma zeta survives.
            let n = (-s) as usize;
            let mut res: f64 = self
                .asymptotics
                .iter()
                .filter(|&&(p, _)| p == n as f64)
                .map(|&(_, c)| c)
                .sum();
            if n == 0 {
                res -= 1.0;
            }
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            return Ok(sign * factorial(n) * res);
        }
        if fm::abs(s) < POLE_GUARD {
            // Too close to 0 for the split form; use the Taylor data at 0.
            let (z0, z1) = self.zeta_jet_at_zero()?;
            return Ok(z0 + z1 * s);
        }
        Ok(self.gamma_zeta(s)? / gamma(s))
    }

    /// (zeta(0), zeta'(0)).
    fn zeta_jet_at_zero(&self) -> Result<(f64, f64)> {
        let tau = self.tau;
        let near = |u: f64| {
            let t = fm::exp(u);
            self.m.trace(t) - self.expansion(t)
        };
        let i0 = quad(&near, fm::ln(self.t_lo), fm::ln(tau))?;
        let i_inf = self.large_t_integral(0.0)?;
        let mut residue = -1.0;
        let mut regular = i0 + i_inf - fm::ln(tau);
        for &(p, c) in &self.asymptotics {
            if p == 0.0 {
                residue += c;
                regular += c * fm::ln(tau);
            } else {
                regular += c * fm::powf(tau, p) / p;
            }
        }
        // 1/Gamma(s) = s + C_e s^2 + ...
        Ok((residue, regular + EULER_GAMMA * residue))
    }

    pub fn zeta_prime_zero(&self) -> Result<f64> {
        Ok(self.zeta_jet_at_zero()?.1)
    }

    /// Residue of zeta at `pole` from symmetric evaluations at pole +- h,
    /// h in {1e-2, 1e-3}, extrapolated in h^2.
    pub fn residue(&self, pole: f64) -> Result<f64> {
        let sym = |h: f64| -> Result<f64> { Ok(0.5 * h * (self.zeta(pole + h)? - self.zeta(pole - h)?)) };
        let r1 = sym(1e-2)?;
        let r2 = sym(1e-3)?;
        Ok((100.0 * r2 - r1) / 99.0)
    }
}

fn fitted_asymptotics<M: SpectralData + ?Sized>(m: &M) -> Result<Vec<(f64, f64)>> {
    let d = m.dim() as f64;
    let n = m.dim() / 2 + 2;
    let c = fit_heat_coeffs(m, n)?;
    let pre = fm::powf(4.0 * PI, -d / 2.0);
    Ok(c.iter().enumerate().map(|(i, &ci)| (i as f64 - d / 2.0, pre * ci)).collect())
}

fn first_eigenvalue<M: SpectralData + ?Sized>(m: &M) -> Result<(f64, f64)> {
    let mut lam = 1.0;
    for _ in 0..60 {
        let ev = m.eigenvalues(lam);
        if let Some(&(l, k)) = ev.iter().find(|&&(l, _)| l > 0.0) {
            return Ok((l, k as f64));
        }
        lam *= 4.0;
    }
    Err(Error::Capability("no positive eigenvalue found"))
}

pub fn mellin_continuation<M: SpectralData + ?Sized>(m: &M, s: f64) -> Result<f64> {
    Continuation::new(m)?.zeta(s)
}

pub fn zeta_prime_at_zero<M: SpectralData + ?Sized>(m: &M) -> Result<f64> {
    Continuation::new(m)?.zeta_prime_zero()
}

pub fn residue_at<M: SpectralData + ?Sized>(m: &M, pole: f64) -> Result<f64> {
    Continuation::new(m)?.residue(pole)
}

/// sum mult lambda^{-s} over the positive eigenvalues up to `lambda_max`.
pub fn direct_zeta<M: SpectralData + ?Sized>(m: &M, s: f64, lambda_max: f64) -> f64 {
    let mut acc = fm::Kahan::new();
    for (l, k) in m.eigenvalues(lambda_max) {
        if l > 0.0 {
            acc.add(k as f64 * fm::powf(l, -s));
        }
    }
    acc.value()
}
