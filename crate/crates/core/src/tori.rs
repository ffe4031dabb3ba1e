//! Flat tori of dimension 2, 3 and 4: determinants, the T^2 zeta function
//! through its Bessel expansion, and the Epstein zeta function.
//!
//! A lattice is given by an upper-triangular matrix `a` whose columns are the
//! basis vectors, with `a[0][0] = 1`. `g` is its inverse transpose, so dual
//! vectors are `g n` and eigenvalues are `4 pi^2 |g n|^2`.

use alloc::vec::Vec;

use crate::analytic::adaptive_quad;
use crate::error::{Error, Result};
use crate::fm::{self, Kahan, LN_2, PI};
use crate::product::SpectralData;
use crate::result::DetResult;
use crate::specfun::{bessel_k, factorial, gamma, riemann_zeta, riemann_zeta_prime, EULER_GAMMA};

/// Terms of size e^{-x} with x past this are dropped; e^{-45} is about 3e-20.
const TAIL_EXPONENT: f64 = 45.0;

/// Bessel-series terms are dropped once the argument exceeds this.
const BESSEL_Z_MAX: f64 = 50.0;

/// Half-width used to step around removable singularities.
const SYM_STEP: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    dim: usize,
    a: [[f64; 4]; 4],
    g: [[f64; 4]; 4],
}

impl Lattice {
    /// Rows of the upper-triangular basis matrix. Requires `a11 = 1`.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        if !(2..=4).contains(&dim) {
            return Err(Error::Input("lattice dimension must be 2, 3 or 4"));
        }
        let mut a = [[0.0; 4]; 4];
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::Input("lattice matrix must be square"));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Input("lattice entries must be finite"));
                }
                if j < i && v != 0.0 {
                    return Err(Error::Input("lattice matrix must be upper-triangular"));
                }
                a[i][j] = v;
            }
            if !(a[i][i] > 0.0) {
                return Err(Error::Input("lattice diagonal must be positive"));
            }
        }
        if a[0][0] != 1.0 {
            return Err(Error::Input("lattice needs a11 = 1 (normalize first)"));
        }
        Ok(Self::build(dim, a))
    }

    /// Rescales so that `a11 = 1`. Returns the lattice and the factor that
    /// was divided out. The determinant is not scale invariant.
    pub fn normalized<R: AsRef<[f64]>>(rows: &[R]) -> Result<(Self, f64)> {
        let scale = rows.first().and_then(|r| r.as_ref().first()).copied().unwrap_or(0.0);
        if !(scale > 0.0) {
            return Err(Error::Input("lattice diagonal must be positive"));
        }
        let scaled: Vec<Vec<f64>> =
            rows.iter().map(|r| r.as_ref().iter().map(|v| v / scale).collect()).collect();
        Ok((Self::from_rows(&scaled)?, scale))
    }

    pub fn identity(dim: usize) -> Self {
        assert!((2..=4).contains(&dim), "lattice dimension must be 2, 3 or 4");
        let mut a = [[0.0; 4]; 4];
        for (i, row) in a.iter_mut().enumerate().take(dim) {
            row[i] = 1.0;
        }
        Self::build(dim, a)
    }

    fn build(dim: usize, a: [[f64; 4]; 4]) -> Self {
        // Back substitution for the upper-triangular inverse x, then g = x^T.
        let mut x = [[0.0; 4]; 4];
        for j in 0..dim {
            x[j][j] = 1.0 / a[j][j];
            for i in (0..j).rev() {
                let s: f64 = (i + 1..=j).map(|k| a[i][k] * x[k][j]).sum();
                x[i][j] = -s / a[i][i];
            }
        }
        let mut g = [[0.0; 4]; 4];
        for i in 0..dim {
            for j in 0..dim {
                g[i][j] = x[j][i];
            }
        }
        Self { dim, a, g }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i][j]
    }

    pub fn g(&self, i: usize, j: usize) -> f64 {
        self.g[i][j]
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim).map(|i| self.a[i][i]).product()
    }

    /// The lattice spanned by the first `k` basis vectors.
    pub fn leading(&self, k: usize) -> Result<Self> {
        if !(2..=self.dim).contains(&k) {
            return Err(Error::Input("sublattice dimension out of range"));
        }
        let mut a = [[0.0; 4]; 4];
        for i in 0..k {
            a[i][..k].copy_from_slice(&self.a[i][..k]);
        }
        Ok(Self::build(k, a))
    }

    /// Parameters of the 2-torus spanned by the first two basis vectors.
    pub fn t2_params(&self) -> T2Params {
        T2Params { a: self.a[0][1], b: self.a[1][1] }
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| i == j || self.a[i][j] == 0.0))
    }

    /// |g n|^2 for an integer vector.
    pub fn dual_norm2(&self, n: &[i64]) -> f64 {
        (0..self.dim)
            .map(|i| {
                let y: f64 = (0..=i).map(|j| self.g[i][j] * n[j] as f64).sum();
                y * y
            })
            .sum()
    }

    /// Calls `f(n, |g n|^2)` for every dual vector with |g n| <= r, zero included.
    pub fn for_each_dual(&self, r: f64, f: &mut dyn FnMut(&[i64], f64)) {
        for_each_in_ball(&self.g, self.dim, r, f);
    }

    /// Calls `f(n, |a n|^2)` for every lattice vector with |a n| <= r.
    pub fn for_each_primal(&self, r: f64, f: &mut dyn FnMut(&[i64], f64)) {
        let d = self.dim;
        let mut low = [[0.0; 4]; 4];
        for i in 0..d {
            for j in 0..d {
                low[i][j] = self.a[d - 1 - i][d - 1 - j];
            }
        }
        for_each_in_ball(&low, d, r, f);
    }

    /// Length of the shortest nonzero lattice vector.
    pub fn shortest_vector(&self) -> f64 {
        // u_1 = e_1 has length one, so the ball of radius one suffices.
        let mut best = 1.0f64;
        self.for_each_primal(1.0, &mut |_, q| {
            if q > 0.0 {
                best = best.min(fm::sqrt(q));
            }
        });
        best
    }
}

fn for_each_in_ball(low: &[[f64; 4]; 4], dim: usize, r: f64, f: &mut dyn FnMut(&[i64], f64)) {
    fn rec(
        low: &[[f64; 4]; 4],
        dim: usize,
        level: usize,
        n: &mut [i64; 4],
        rem: f64,
        acc: f64,
        f: &mut dyn FnMut(&[i64], f64),
    ) {
        if level == dim {
            f(&n[..dim], acc);
            return;
        }
        let off: f64 = (0..level).map(|j| low[level][j] * n[j] as f64).sum();
        let d = low[level][level];
        let c = -off / d;
        let w = fm::sqrt(rem.max(0.0)) / d;
        let lo = fm::floor(c - w) as i64;
        let hi = fm::floor(c + w) as i64 + 1;
        for k in lo..=hi {
            let y = off + d * k as f64;
            let y2 = y * y;
            if y2 <= rem {
                n[level] = k;
                rec(low, dim, level + 1, n, rem - y2, acc + y2, f);
            }
        }
    }
    let mut n = [0i64; 4];
    rec(low, dim, 0, &mut n, r * r, 0.0, f);
}

/// The 2-torus with basis e_1 and A e_1 + B e_2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct T2Params {
    a: f64,
    b: f64,
}

impl T2Params {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(b > 0.0) || !b.is_finite() || !a.is_finite() {
            return Err(Error::Input("T2 parameters need finite A and B > 0"));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn lattice(&self) -> Lattice {
        let mut a = [[0.0; 4]; 4];
        a[0][0] = 1.0;
        a[0][1] = self.a;
        a[1][1] = self.b;
        Lattice::build(2, a)
    }
}

/// The quadratic form and phase used by the T^3 and T^4 product formulas.
///
/// For a lattice of dimension d the sums run over nonzero integer vectors of
/// the leading (d-1)-sublattice. `quadratic` is |g' n|^2 for that sublattice
/// and `phase` is (sum_j g_{d,j} n_j) / g_{d,d}.
#[derive(Clone, Copy, Debug)]
pub struct LatticeSumSpec<'a> {
    lattice: &'a Lattice,
    pub exponent_cutoff: f64,
}

impl<'a> LatticeSumSpec<'a> {
    pub fn new(lattice: &'a Lattice) -> Self {
        Self { lattice, exponent_cutoff: TAIL_EXPONENT }
    }

    fn last(&self) -> usize {
        self.lattice.dim - 1
    }

    pub fn quadratic(&self, n: &[i64]) -> f64 {
        let g = &self.lattice.g;
        (0..self.last())
            .map(|i| {
                let y: f64 = (0..=i).map(|j| g[i][j] * n[j] as f64).sum();
                y * y
            })
            .sum()
    }

    pub fn phase(&self, n: &[i64]) -> f64 {
        let d = self.last();
        let g = &self.lattice.g;
        let s: f64 = (0..d).map(|j| g[d][j] * n[j] as f64).sum();
        s / g[d][d]
    }

    /// Largest sqrt(I) whose terms e^{-2 pi sqrt(I) / g_dd} are kept.
    pub fn radius(&self) -> f64 {
        let d = self.last();
        self.exponent_cutoff * self.lattice.g[d][d] / (2.0 * PI)
    }

    /// Calls `f(n, I(n))` for the nonzero vectors within `radius`.
    pub fn for_each(&self, f: &mut dyn FnMut(&[i64], f64)) {
        let r = self.radius();
        for_each_in_ball(&self.lattice.g, self.last(), r, &mut |n, q| {
            if q > 0.0 {
                f(n, q);
            }
        });
    }
}

/// log |1 - e^{-x + i 2 pi y}|.
fn log_abs_one_minus(x: f64, y: f64) -> f64 {
    let r = fm::exp(-x);
    0.5 * fm::ln1p(r * (r - 2.0 * fm::cospi(2.0 * y)))
}

fn is_nonpositive_integer(s: f64) -> bool {
    s <= 0.0 && fm::floor(s) == s
}

fn recip_gamma(s: f64) -> f64 {
    if is_nonpositive_integer(s) {
        0.0
    } else {
        1.0 / gamma(s)
    }
}

/// Gamma(w) zeta(2w), continued through the removable points w = -1, -2, ...
fn gamma_zeta_double(w: f64) -> Result<f64> {
    if w == 0.0 || w == 0.5 {
        return Err(Error::Pole(w));
    }
    if is_nonpositive_integer(w) {
        let k = (-w) as usize;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        return Ok(2.0 * sign * riemann_zeta_prime(-2.0 * k as f64)? / factorial(k));
    }
    Ok(gamma(w) * riemann_zeta(2.0 * w)?)
}

/// sum_n log|1 - e^{-2 pi n (B - iA)}| over n = 1..=n_terms.
fn t2_log_product(p: &T2Params, n_terms: usize) -> f64 {
    let mut acc = Kahan::new();
    for n in 1..=n_terms {
        let nf = n as f64;
        acc.add(log_abs_one_minus(2.0 * PI * nf * p.b, nf * p.a));
    }
    acc.value()
}

fn t2_terms_needed(p: &T2Params) -> usize {
    // 4 e^{-2 pi n B} < 1e-18
    (fm::ln(4e18) / (2.0 * PI * p.b)) as usize + 1
}

pub fn det_t2(p: &T2Params) -> DetResult {
    det_t2_truncated(p, t2_terms_needed(p))
}

/// det_t2 with the product cut after `n_terms` factors.
pub fn det_t2_truncated(p: &T2Params, n_terms: usize) -> DetResult {
    let b = p.b;
    let log_b = 2.0 * fm::ln(b);
    let exp_term = -PI * b / 3.0;
    let prod = 4.0 * t2_log_product(p, n_terms);
    let q = fm::exp(-2.0 * PI * b);
    let remainder = 8.0 * fm::powi(q, n_terms as i32 + 1) / (1.0 - q);
    DetResult::new(log_b + exp_term + prod)
        .with_term("log_b_squared", log_b)
        .with_term("exponential", exp_term)
        .with_term("log_product", prod)
        .with_error(remainder)
}

/// sum_{n,m >= 1} cos(2 pi A n m) (m/n)^{s-1/2} K_{1/2-s}(2 pi B n m).
fn h0_bessel_sum(s: f64, p: &T2Params) -> Result<f64> {
    let nu = 0.5 - s;
    let z_max = BESSEL_Z_MAX + 2.0 * fm::abs(s);
    let mut acc = Kahan::new();
    let mut n = 1u64;
    while 2.0 * PI * p.b * n as f64 <= z_max {
        let mut m = 1u64;
        loop {
            let z = 2.0 * PI * p.b * (n * m) as f64;
            if z > z_max {
                break;
            }
            let ratio = m as f64 / n as f64;
            let c = fm::cospi(2.0 * p.a * (n * m) as f64);
            acc.add(c * fm::powf(ratio, s - 0.5) * bessel_k(nu, z)?);
            m += 1;
        }
        n += 1;
    }
    Ok(acc.value())
}

/// The holomorphic part H_0(s) of the T^2 zeta function.
pub fn h0(s: f64, p: &T2Params) -> Result<f64> {
    let b = p.b;
    let pre = 8.0 * fm::powf(b, s + 0.5) * fm::powf(4.0 * PI, -s);
    Ok(pre * h0_bessel_sum(s, p)? * recip_gamma(s))
}

/// H_0'(0) from the closed log-product.
pub fn h0_prime_zero(p: &T2Params) -> f64 {
    -4.0 * t2_log_product(p, t2_terms_needed(p))
}

/// Gamma(s) zeta_{T^2}(s), finite at the negative integers; poles at 0 and 1.
pub fn gamma_zeta_t2(s: f64, p: &T2Params) -> Result<f64> {
    if s == 1.0 || s == 0.0 {
        return Err(Error::Pole(s));
    }
    if s == 0.5 {
        let lo = gamma_zeta_t2(0.5 - SYM_STEP, p)?;
        let hi = gamma_zeta_t2(0.5 + SYM_STEP, p)?;
        return Ok(0.5 * (lo + hi));
    }
    let b = p.b;
    let four_pi2_s = fm::powf(4.0 * PI * PI, -s);
    let t1 = 8.0 * fm::powf(b, s + 0.5) * fm::powf(4.0 * PI, -s) * h0_bessel_sum(s, p)?;
    let t2 = 2.0 * fm::sqrt(PI) * b * four_pi2_s * gamma_zeta_double(s - 0.5)?;
    let t3 = 2.0 * fm::powf(b, 2.0 * s) * four_pi2_s * gamma_zeta_double(s)?;
    Ok(t1 + t2 + t3)
}

/// Spectral zeta function of T^2 on the real line.
pub fn zeta_t2(s: f64, p: &T2Params) -> Result<f64> {
    if s == 1.0 {
        return Err(Error::Pole(1.0));
    }
    if is_nonpositive_integer(s) {
        return Ok(if s == 0.0 { -1.0 } else { 0.0 });
    }
    Ok(gamma_zeta_t2(s, p)? / gamma(s))
}

/// The constant term at s = 1 in the closed form
/// (B/4pi) H_0'(0) + (B/2) C_e + (2 B^2 / 4 pi^2) zeta(2),
/// meant as lim {zeta_{T^2}(s) - 1/(2s - 2)}.
pub fn kronecker_limit_constant(p: &T2Params) -> f64 {
    let b = p.b;
    b / (4.0 * PI) * h0_prime_zero(p) + 0.5 * b * EULER_GAMMA + 2.0 * b * b / (4.0 * PI * PI) * (PI * PI / 6.0)
}

/// lim_{s -> 1} {zeta_{T^2}(s) - B / (4 pi (s - 1))}, the honest constant term.
/// The pole of zeta_{T^2} at 1 has residue B/(4 pi), so subtracting 1/(2s-2)
/// only leaves a finite limit when B = 2 pi.
pub fn kronecker_pole_constant(p: &T2Params) -> f64 {
    let b = p.b;
    b / (4.0 * PI) * h0_prime_zero(p) + b / (2.0 * PI) * (EULER_GAMMA - fm::ln(4.0 * PI)) + b * b / 12.0
}

/// log Det - (4 pi / B) times the closed-form limit constant.
pub fn kronecker_corollary_lhs(p: &T2Params) -> f64 {
    det_t2(p).log_det - 4.0 * PI / p.b * kronecker_limit_constant(p)
}

/// 2 log B - 2 pi C_e - B (pi/3 + 2/pi), the value claimed for
/// [`kronecker_corollary_lhs`].
pub fn kronecker_corollary_rhs(p: &T2Params) -> f64 {
    let b = p.b;
    2.0 * fm::ln(b) - 2.0 * PI * EULER_GAMMA - b * (PI / 3.0 + 2.0 / PI)
}

fn t2_of(l: &Lattice) -> T2Params {
    let g = &l.g;
    T2Params { a: -g[1][0] / g[1][1], b: g[0][0] / g[1][1] }
}

/// zeta_{T^2}(-1/2) split into its K_1 series, zeta(3) and pi/(3B) parts.
fn t2_minus_half_parts(p: &T2Params) -> Result<(f64, f64, f64)> {
    let b = p.b;
    let mut acc = Kahan::new();
    let mut n = 1u64;
    while 2.0 * PI * b * n as f64 <= BESSEL_Z_MAX {
        let mut m = 1u64;
        loop {
            let z = 2.0 * PI * b * (n * m) as f64;
            if z > BESSEL_Z_MAX {
                break;
            }
            let c = fm::cospi(2.0 * p.a * (n * m) as f64);
            acc.add(n as f64 / m as f64 * bessel_k(1.0, z)? * c);
            m += 1;
        }
        n += 1;
    }
    let k1 = -8.0 * acc.value();
    let z3 = -b * riemann_zeta(3.0)? / PI;
    let pi_term = -PI / (3.0 * b);
    Ok((k1, z3, pi_term))
}

pub fn det_t3(l: &Lattice) -> Result<DetResult> {
    if l.dim != 3 {
        return Err(Error::Input("det_t3 needs a 3-dimensional lattice"));
    }
    let g11 = l.g[0][0];
    let g33 = l.g[2][2];
    let spec = LatticeSumSpec::new(l);
    let mut acc = Kahan::new();
    spec.for_each(&mut |n, q| {
        acc.add(log_abs_one_minus(2.0 * PI * fm::sqrt(q) / g33, spec.phase(n)));
    });
    // Over the full plane every factor appears twice (n and -n).
    let log_product = 2.0 * acc.value();
    let (k1, z3, pi_term) = t2_minus_half_parts(&t2_of(l))?;
    let r = g11 / g33;
    let log_g = -2.0 * fm::ln(g33);
    Ok(DetResult::new(log_product + r * (k1 + z3 + pi_term) + log_g)
        .with_term("log_product", log_product)
        .with_term("k1_series", r * k1)
        .with_term("zeta3_term", r * z3)
        .with_term("pi_term", r * pi_term)
        .with_term("log_g33", log_g)
        .with_note("K1 series carries the factor 8; zeta(3) coefficient is B/pi"))
}

/// Spectral zeta function of T^3 on the real line.
pub fn zeta_t3(s: f64, l: &Lattice) -> Result<f64> {
    if l.dim != 3 {
        return Err(Error::Input("zeta_t3 needs a 3-dimensional lattice"));
    }
    if s == 1.5 {
        return Err(Error::Pole(1.5));
    }
    if is_nonpositive_integer(s) {
        return Ok(if s == 0.0 { -1.0 } else { 0.0 });
    }
    if s == 0.5 {
        let lo = zeta_t3(0.5 - SYM_STEP, l)?;
        let hi = zeta_t3(0.5 + SYM_STEP, l)?;
        return Ok(0.5 * (lo + hi));
    }
    let g11 = l.g[0][0];
    let g33 = l.g[2][2];
    let rg = recip_gamma(s);
    let four_pi2_s = fm::powf(4.0 * PI * PI, -s);

    let nu = s - 0.5;
    let mut acc = Kahan::new();
    let mut err = None;
    let spec = LatticeSumSpec { lattice: l, exponent_cutoff: BESSEL_Z_MAX + 2.0 * fm::abs(s) };
    spec.for_each(&mut |n, q| {
        let root = fm::sqrt(q);
        let theta = spec.phase(n);
        let mut k = 1u64;
        loop {
            let kf = k as f64;
            let z = 2.0 * PI * root * kf / g33;
            if z > spec.exponent_cutoff {
                break;
            }
            match bessel_k(nu, z) {
                Ok(bk) => {
                    let w = fm::powf(root, -nu) * fm::powf(PI * kf / g33, nu);
                    acc.add(2.0 * fm::cospi(2.0 * kf * theta) * w * bk);
                }
                Err(e) => err = Some(e),
            }
            k += 1;
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let a0 = 2.0 * fm::sqrt(PI) / g33 * four_pi2_s * rg * acc.value();
    let a1 = fm::powf(g11, 1.0 - 2.0 * s) / (2.0 * fm::sqrt(PI) * g33)
        * gamma_zeta_t2(s - 0.5, &t2_of(l))?
        * rg;
    let a2 = 2.0 * fm::powf(2.0 * PI * g33, -2.0 * s) * riemann_zeta(2.0 * s)?;
    Ok(a0 + a1 + a2)
}

pub fn det_t4(l: &Lattice) -> Result<DetResult> {
    if l.dim != 4 {
        return Err(Error::Input("det_t4 needs a 4-dimensional lattice"));
    }
    let g44 = l.g[3][3];
    let spec = LatticeSumSpec::new(l);
    let mut acc = Kahan::new();
    spec.for_each(&mut |n, q| {
        acc.add(log_abs_one_minus(2.0 * PI * fm::sqrt(q) / g44, spec.phase(n)));
    });
    let b0 = -2.0 * acc.value();
    let b1 = -zeta_t3(-0.5, &l.leading(3)?)? / g44;
    let b2 = 2.0 * fm::ln(g44);
    Ok(DetResult::new(-(b0 + b1 + b2))
        .with_term("b0_prime", b0)
        .with_term("b1_prime", b1)
        .with_term("b2_prime", b2)
        .with_note("b1 uses zeta_T3(-1/2) from the Bessel decomposition of the T3 zeta"))
}

/// Zeta function of the unit 4-torus from the four-square count:
/// (4 pi^2)^{-s} 8 (1 - 2^{2-2s}) zeta(s) zeta(s-1).
pub fn diagonal_t4_zeta(s: f64) -> Result<f64> {
    if s == 2.0 {
        return Err(Error::Pole(2.0));
    }
    if s == 1.0 {
        // zeta(s) has a pole there but zeta(0) (1 - 2^0) = 0 leaves c/(s-1) * 0.
        let e = 8.0 * (-2.0 * LN_2) * -1.0 * riemann_zeta(0.0)?;
        return Ok(e / (4.0 * PI * PI));
    }
    let e = 8.0 * (1.0 - fm::powf(2.0, 2.0 - 2.0 * s)) * riemann_zeta(s)? * riemann_zeta(s - 1.0)?;
    Ok(fm::powf(4.0 * PI * PI, -s) * e)
}

/// Determinant of the unit 4-torus from the four-square zeta function.
pub fn det_t4_diagonal() -> Result<DetResult> {
    let z0 = riemann_zeta(0.0)?;
    let z1 = riemann_zeta(-1.0)?;
    let zp0 = riemann_zeta_prime(0.0)?;
    let zp1 = riemann_zeta_prime(-1.0)?;
    let mixed = zp0 * z1 + z0 * zp1;
    // E(s) = 8 (1 - 2^{2-2s}) zeta(s) zeta(s-1); zeta_T4 = (4 pi^2)^{-s} E.
    let e0 = -24.0 * z0 * z1;
    let e0_prime = 8.0 * (8.0 * LN_2 * z0 * z1 - 3.0 * mixed);
    let log_det = fm::ln(4.0 * PI * PI) * e0 - e0_prime;
    let displayed = 16.0 * (fm::ln(2.0 * PI) + 2.0 * LN_2 * LN_2) * z0 * z1 - 8.0 * mixed;
    Ok(DetResult::new(log_det)
        .with_term("e_at_zero", e0)
        .with_term("e_prime_at_zero", e0_prime)
        .with_term("displayed_formula", displayed)
        .with_note("log Det = log(4 pi^2) E(0) - E'(0); the displayed closed form disagrees"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EpsteinMode {
    /// Lattice sum with a smooth cutoff and the remainder replaced by its integral.
    Direct,
    /// Mellin continuation of the heat trace.
    Continued,
}

/// sum' (4 pi^2 |g n|^2)^{-s}: direct for s > dim/2, continued otherwise.
pub fn epstein_zeta(l: &Lattice, s: f64) -> Result<f64> {
    let half = l.dim as f64 / 2.0;
    if s > half {
        epstein_zeta_with(l, s, EpsteinMode::Direct)
    } else {
        epstein_zeta_with(l, s, EpsteinMode::Continued)
    }
}

pub fn epstein_zeta_with(l: &Lattice, s: f64, mode: EpsteinMode) -> Result<f64> {
    let half = l.dim as f64 / 2.0;
    if s == half {
        return Err(Error::Pole(half));
    }
    match mode {
        EpsteinMode::Direct => {
            if s <= half {
                return Err(Error::Domain("direct Epstein sum needs s > dim/2"));
            }
            epstein_direct(l, s)
        }
        EpsteinMode::Continued => crate::oracle::mellin_continuation(&TorusSpectrum::new(l.clone()), s),
    }
}

// The summand is split as f = f chi + f (1 - chi) with chi a smooth radial
// step of width w centred at r0. The first part is summed exactly. The second
// is smooth on the scale w, so by Poisson summation its lattice sum equals
// its integral up to roughly exp(-(pi w |gamma|)^2), gamma the shortest
// vector of the primal lattice.
fn epstein_direct(l: &Lattice, s: f64) -> Result<f64> {
    let w = 1.2 / l.shortest_vector();
    let r0 = 12.0 * w;
    let chi = |r: f64| if r <= 0.5 * r0 { 1.0 } else { 0.5 * libm::erfc((r - r0) / w) };
    let mut acc = Kahan::new();
    l.for_each_dual(r0 + 6.0 * w, &mut |_, q| {
        if q > 0.0 {
            acc.add(fm::powf(q, -s) * chi(fm::sqrt(q)));
        }
    });
    let d = l.dim as f64;
    let sphere = 2.0 * fm::powf(PI, d / 2.0) / gamma(d / 2.0);
    let tail = adaptive_quad(
        &|r: f64| if r <= 0.5 * r0 { 0.0 } else { fm::powf(r, d - 1.0 - 2.0 * s) * (1.0 - chi(r)) },
        0.5 * r0,
        f64::INFINITY,
        1e-13,
    )?;
    let total = acc.value() + l.volume() * sphere * tail.value;
    Ok(fm::powf(4.0 * PI * PI, -s) * total)
}

/// sum over the dual lattice of e^{-4 pi^2 t |nu|^2} minus
/// vol (4 pi t)^{-dim/2} sum over the lattice of e^{-|gamma|^2/(4t)}.
pub fn jacobi_residual(l: &Lattice, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain("Jacobi check needs t > 0"));
    }
    let dual = TorusSpectrum::new(l.clone()).trace(t);
    let mut acc = Kahan::new();
    l.for_each_primal(fm::sqrt(4.0 * t * 46.0), &mut |_, q| acc.add(fm::exp(-q / (4.0 * t))));
    let pre = l.volume() * fm::powf(4.0 * PI * t, -(l.dim as f64) / 2.0);
    Ok(dual - pre * acc.value())
}

/// The Laplace spectrum of a flat torus.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusSpectrum {
    lattice: Lattice,
}

impl TorusSpectrum {
    pub fn new(lattice: Lattice) -> Self {
        Self { lattice }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }
}

fn theta_1d(a: f64) -> f64 {
    // sum_k e^{-a k^2}
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

impl SpectralData for TorusSpectrum {
    fn dim(&self) -> usize {
        self.lattice.dim
    }

    fn eigenvalues(&self, lambda_max: f64) -> Vec<(f64, u64)> {
        let mut v: Vec<f64> = Vec::new();
        let r = fm::sqrt(lambda_max.max(0.0)) / (2.0 * PI);
        self.lattice.for_each_dual(r, &mut |_, q| v.push(4.0 * PI * PI * q));
        v.sort_by(|x, y| x.total_cmp(y));
        let mut out: Vec<(f64, u64)> = Vec::new();
        for x in v {
            match out.last_mut() {
                Some((y, c)) if fm::abs(x - *y) <= 1e-12 * x => *c += 1,
                _ => out.push((x, 1)),
            }
        }
        out
    }

    fn heat_coeffs(&self) -> Option<Vec<f64>> {
        Some(alloc::vec![self.lattice.volume()])
    }

    fn trace(&self, t: f64) -> f64 {
        let l = &self.lattice;
        if l.is_diagonal() {
            return (0..l.dim).map(|i| theta_1d(4.0 * PI * PI * t * l.g[i][i] * l.g[i][i])).product();
        }
        let mut acc = Kahan::new();
        let r = fm::sqrt(46.0 / t) / (2.0 * PI);
        let c = 4.0 * PI * PI * t;
        l.for_each_dual(r, &mut |_, q| acc.add(fm::exp(-c * q)));
        acc.value()
    }

    fn zeta(&self, s: f64) -> Result<f64> {
        match self.lattice.dim {
            2 => zeta_t2(s, &t2_of(&self.lattice)),
            3 => zeta_t3(s, &self.lattice),
            _ => epstein_zeta(&self.lattice, s),
        }
    }

    fn zeta_prime_zero(&self) -> Result<f64> {
        let d = match self.lattice.dim {
            2 => det_t2(&t2_of(&self.lattice)),
            3 => det_t3(&self.lattice)?,
            _ => det_t4(&self.lattice)?,
        };
        Ok(-d.log_det)
    }
}
