//! Acceptance criteria 1 to 15, plus the CLI contract. Each criterion prints
//! one PASS/FAIL line. Criterion 5 compares a displayed constant that is
//! known to be wrong; it is evaluated at its pinned tolerance like the rest,
//! and the test asserts that it still fails so the list below stays honest.

use std::f64::consts::PI;
use std::process::Command;

use spectral_det::analytic::{log_weighted_integral, Integrand, IntegrandKind, Method};
use spectral_det::heisenberg::{self, HeisenbergParams, HeisenbergSpectrum};
use spectral_det::oracle;
use spectral_det::product::{self, Circle, SpectralData, Sphere2};
use spectral_det::specfun::{self, coeff_table, sinh_cube_coeffs, CoeffKind};
use spectral_det::tori::{self, EpsteinMode, Lattice, T2Params, TorusSpectrum};

const EXPECTED_FAILURES: &[u32] = &[5];

struct Outcome {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
}

struct Tally {
    ok: bool,
    worst: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Self { ok: true, worst: Vec::new() }
    }

    fn check(&mut self, what: &str, ok: bool, msg: String) {
        if !ok {
            self.ok = false;
            self.worst.push(format!("{what}: {msg}"));
        }
    }

    fn abs(&mut self, what: &str, lhs: f64, rhs: f64, tol: f64) {
        let d = (lhs - rhs).abs();
        self.check(what, d <= tol, format!("{lhs} vs {rhs} (diff {d:e}, tol {tol:e})"));
    }

    fn rel(&mut self, what: &str, lhs: f64, rhs: f64, tol: f64) {
        let d = (lhs - rhs).abs() / rhs.abs();
        self.check(what, d <= tol, format!("{lhs} vs {rhs} (rel {d:e}, tol {tol:e})"));
    }

    fn done(self, id: u32, title: &'static str) -> Outcome {
        let detail = if self.ok { String::new() } else { self.worst.join("; ") };
        Outcome { id, title, pass: self.ok, detail }
    }
}

fn t2(a: f64, b: f64) -> T2Params {
    T2Params::new(a, b).unwrap()
}

fn generic_t3() -> Lattice {
    Lattice::from_rows(&[[1.0, 0.3, 0.2], [0.0, 1.1, 0.1], [0.0, 0.0, 0.9]]).unwrap()
}

fn generic_t4() -> Lattice {
    Lattice::from_rows(&[
        [1.0, 0.3, 0.2, 0.4],
        [0.0, 1.1, 0.1, 0.2],
        [0.0, 0.0, 0.9, 0.1],
        [0.0, 0.0, 0.0, 1.3],
    ])
    .unwrap()
}

fn c1() -> Outcome {
    let mut t = Tally::new();
    let exact = |kind, k: usize| coeff_table(kind, k).values[k].to_string();
    let mut eq = |what: &str, got: String, want: &str| t.check(what, got == want, format!("{got} != {want}"));
    eq("beta_2", exact(CoeffKind::Beta, 1), "1/6");
    eq("beta_4", exact(CoeffKind::Beta, 2), "7/360");
    eq("alpha_1", exact(CoeffKind::Alpha, 1), "-1/2");
    eq("alpha_2", exact(CoeffKind::Alpha, 2), "1/12");
    // T_2 = -delta_2 / 4
    let d = &coeff_table(CoeffKind::Delta, 1).values[1];
    eq("T_2", (-d / num_four(d)).to_string(), "-1/12");
    eq("a_3", sinh_cube_coeffs(3)[3].to_string(), "4/189");
    t.done(1, "coefficient identities (exact)")
}

// 4 as a rational of the same type, built without naming the big-integer crate.
fn num_four(d: &specfun::Rational) -> specfun::Rational {
    let one = d / d;
    &one + &one + &one + &one
}

fn c2() -> Outcome {
    let mut t = Tally::new();
    for z in [0.1f64, 1.0, 10.0] {
        let lhs = (2.0 * z).sqrt() * specfun::bessel_k(0.5, z).unwrap();
        t.rel(&format!("z = {z}"), lhs, PI.sqrt() * (-z).exp(), 1e-12);
    }
    t.done(2, "Bessel K_1/2 identity")
}

fn c3() -> Outcome {
    let mut t = Tally::new();
    for p in [t2(0.0, 1.0), t2(0.3, 1.2)] {
        for s in [0.25, 0.75, 2.0] {
            let lhs = tori::gamma_zeta_t2(1.0 - s, &p).unwrap();
            let rhs = (4.0 * PI / p.b()).powf(2.0 * s - 1.0) * tori::gamma_zeta_t2(s, &p).unwrap();
            t.abs(&format!("A = {}, B = {}, s = {s}", p.a(), p.b()), lhs, rhs, 1e-8);
        }
    }
    t.done(3, "T2 functional relation")
}

fn c4() -> Outcome {
    let mut t = Tally::new();
    for p in [t2(0.0, 1.0), t2(0.3, 1.2)] {
        let lhs = tori::h0(1.0, &p).unwrap();
        t.abs(&format!("A = {}, B = {}", p.a(), p.b()), lhs, p.b() / (4.0 * PI) * tori::h0_prime_zero(&p), 1e-8);
    }
    t.done(4, "H_0 relation")
}

/// Richardson extrapolation of the symmetric average at 1 +- h, h and h/10.
fn richardson_at_one(f: &dyn Fn(f64) -> f64) -> f64 {
    let sym = |h: f64| 0.5 * (f(1.0 + h) + f(1.0 - h));
    (100.0 * sym(1e-3) - sym(1e-2)) / 99.0
}

fn c5() -> Outcome {
    let mut t = Tally::new();
    for p in [t2(0.0, 1.0), t2(0.3, 1.2), t2(0.0, 2.0 * PI)] {
        let lim = richardson_at_one(&|s| tori::zeta_t2(s, &p).unwrap() - 1.0 / (2.0 * s - 2.0));
        t.abs(&format!("A = {}, B = {}", p.a(), p.b()), tori::kronecker_limit_constant(&p), lim, 1e-5);
    }
    t.done(5, "Kronecker limit constant")
}

fn c6() -> Outcome {
    let mut t = Tally::new();
    let g = specfun::gamma(0.25);
    t.rel("det_t2(0, 1)", tori::det_t2(&t2(0.0, 1.0)).det(), g.powi(4) / (16.0 * PI.powi(3)), 1e-10);
    t.done(6, "square-torus determinant")
}

fn c7() -> Outcome {
    let mut t = Tally::new();
    for (a, b, ell) in [(0.0, 1.0, 1.0), (0.3, 1.2, 0.4), (-0.2, 0.8, 2.0)] {
        let l = Lattice::from_rows(&[[1.0, a, 0.0], [0.0, b, 0.0], [0.0, 0.0, 2.0 * PI * ell]]).unwrap();
        let d3 = tori::det_t3(&l).unwrap().det();
        let ds = product::det_product_s1(&TorusSpectrum::new(t2(a, b).lattice()), ell).unwrap().det();
        t.rel(&format!("A = {a}, B = {b}, ell = {ell}"), d3, ds, 1e-6);
    }
    t.done(7, "T3 degenerates to T2 x S1")
}

fn c8() -> Outcome {
    let mut t = Tally::new();
    let id = Lattice::identity(4);
    let a = tori::det_t4(&id).unwrap().det();
    let b = tori::det_t4_diagonal().unwrap().det();
    let c = (-oracle::zeta_prime_at_zero(&TorusSpectrum::new(id.clone())).unwrap()).exp();
    t.rel("t4 vs diagonal", a, b, 1e-5);
    t.rel("t4 vs oracle", a, c, 1e-5);
    t.rel("diagonal vs oracle", b, c, 1e-5);
    // the direct mode is the brute-force lattice sum
    let closed = tori::diagonal_t4_zeta(3.0).unwrap();
    let brute = tori::epstein_zeta_with(&id, 3.0, EpsteinMode::Direct).unwrap();
    t.rel("diagonal zeta(3) vs lattice sum", closed, brute, 1e-8);
    t.done(8, "T4 triple agreement")
}

fn c9() -> Outcome {
    let mut t = Tally::new();
    let (pm, pn) = (t2(0.2, 1.1), t2(-0.3, 0.9));
    let two = product::det_t2xt2(&pm, &pn).unwrap().det();
    let block = Lattice::from_rows(&[
        [1.0, pm.a(), 0.0, 0.0],
        [0.0, pm.b(), 0.0, 0.0],
        [0.0, 0.0, 1.0, pn.a()],
        [0.0, 0.0, 0.0, pn.b()],
    ])
    .unwrap();
    let t4 = tori::det_t4(&block).unwrap().det();
    let gen = product::det_product_general(&TorusSpectrum::new(pm.lattice()), &TorusSpectrum::new(pn.lattice()))
        .unwrap()
        .det();
    t.rel("t2xt2 vs t4", two, t4, 1e-6);
    t.rel("t2xt2 vs general", two, gen, 1e-6);
    t.rel("t4 vs general", t4, gen, 1e-6);
    for p in [pm, pn, t2(0.0, 1.0)] {
        let lhs = product::t2_limit_term_bessel(&p).unwrap();
        let rhs = product::t2_limit_term_identity(&p).unwrap();
        t.abs(&format!("K_3/2 chain A = {}, B = {}", p.a(), p.b()), lhs, rhs, 1e-8);
    }
    t.done(9, "two-tori identity")
}

fn c10() -> Outcome {
    let mut t = Tally::new();
    for ell in [1u32, 2, 5] {
        let f = Integrand::h3(ell);
        let a = log_weighted_integral(&f, 4, Method::JetDirect).unwrap().value;
        let b = log_weighted_integral(&f, 4, Method::subtraction()).unwrap().value;
        t.rel(&format!("quadrature l = {ell}"), a, b, 1e-8);
    }
    // compared in log form: Det underflows long before l = 20
    let logs: Vec<f64> = (1..=20).map(|l| heisenberg::h3_log_det(l).unwrap().log_det).collect();
    t.check("strictly decreasing", logs.windows(2).all(|w| w[1] < w[0]), format!("{logs:?}"));
    t.check("Det(20) < Det(1)/10", logs[19] < logs[0] - 10f64.ln(), format!("{} vs {}", logs[19], logs[0]));
    let z = oracle::zeta_prime_at_zero(&HeisenbergSpectrum::new(HeisenbergParams::three(1).unwrap())).unwrap();
    t.rel("oracle l = 1", logs[0].exp(), (-z).exp(), 1e-3);
    t.done(10, "H3 determinant")
}

fn c11() -> Outcome {
    let mut t = Tally::new();
    let r0 = heisenberg::h5_split_point();
    for ell in [1u32, 2] {
        let f = Integrand::h5(ell);
        let a = log_weighted_integral(&f, 6, Method::JetDirect).unwrap().value;
        let b = log_weighted_integral(&f, 6, Method::Subtraction { r: r0 }).unwrap().value;
        t.rel(&format!("quadrature l = {ell}"), a, b, 1e-8);
    }
    // compared in log form: Det underflows long before l = 20
    let logs: Vec<f64> = (1..=20).map(|l| heisenberg::h5_log_det(l).unwrap().log_det).collect();
    t.check("strictly decreasing", logs.windows(2).all(|w| w[1] < w[0]), format!("{logs:?}"));
    t.check("Det(20) < Det(1)/10", logs[19] < logs[0] - 10f64.ln(), format!("{} vs {}", logs[19], logs[0]));
    let z = oracle::zeta_prime_at_zero(&HeisenbergSpectrum::new(HeisenbergParams::five(1).unwrap())).unwrap();
    t.rel("oracle l = 1", logs[0].exp(), (-z).exp(), 1e-3);
    // the limiting integrand: any split point gives the same value, r0 included
    let lim = Integrand::new(IntegrandKind::H5Limit);
    let direct = log_weighted_integral(&lim, 6, Method::JetDirect).unwrap().value;
    for r in [r0, 1.5, 3.0] {
        let split = log_weighted_integral(&lim, 6, Method::Subtraction { r }).unwrap().value;
        t.abs(&format!("split at r = {r}"), split, direct, 1e-8);
    }
    t.abs("displayed split form at r0", 2.0 * heisenberg::h5_limit_split_form(r0).unwrap(), direct, 1e-8);
    t.done(11, "H5 determinant")
}

fn c12() -> Outcome {
    let mut t = Tally::new();
    for (p, n) in [(HeisenbergParams::three(1).unwrap(), 3usize), (HeisenbergParams::five(1).unwrap(), 2)] {
        let spec = HeisenbergSpectrum::new(p);
        let d = p.dim.value() as f64;
        let fit = oracle::fit_power_series(
            &|s| (4.0 * PI * s).powf(d / 2.0) * spec.trace(s),
            4,
            heisenberg::heat_fit_window(&p),
        )
        .unwrap();
        for k in 0..n {
            let c = match p.dim.value() {
                3 => heisenberg::h3_heat_coefficient(k, 1),
                _ => heisenberg::h5_heat_coefficient(k, 1),
            }
            .unwrap()
            .value;
            t.rel(&format!("H{} c_{k}", p.dim.value()), c, fit[k], 1e-3);
        }
    }
    for k in 0..=10 {
        t.abs(&format!("W_{k}"), heisenberg::w_k_closed(k), heisenberg::w_k_series(k), 1e-10);
    }
    for i in 1..=4 {
        for j in 0..=3 {
            let s = 1.5 - (i + j) as f64;
            t.abs(&format!("W_{i},{j}"), heisenberg::w_ij(i, j, s).unwrap(), 0.0, 1e-10);
        }
    }
    t.done(12, "heat coefficients")
}

fn c13() -> Outcome {
    let mut t = Tally::new();
    let a = product::zeta_s2(-0.5).unwrap();
    let b = product::zeta_s2_at_minus_half().unwrap();
    let c = product::zeta_s2_double_integral().unwrap();
    t.rel("series vs alternating", a, b, 1e-5);
    t.rel("series vs double integral", a, c, 1e-5);
    t.rel("alternating vs double integral", b, c, 1e-5);
    let d = product::det_product_s1(&Sphere2, 1.0).unwrap();
    t.check("finite and positive", d.log_det.is_finite() && d.det() > 0.0, format!("{}", d.log_det));
    let names: Vec<&str> = d.breakdown.iter().map(|(k, _)| k.as_str()).collect();
    t.check(
        "breakdown 4 pi^2 l^2, C_M, product",
        names == ["log_4pi2_ell2", "log_c_m", "log_product"],
        format!("{names:?}"),
    );
    let sum: f64 = d.breakdown.iter().map(|(_, v)| v).sum();
    t.abs("breakdown sums to log Det", sum, d.log_det, 1e-12);
    t.abs("leading factor", d.term("log_4pi2_ell2").unwrap(), (4.0 * PI * PI).ln(), 1e-14);
    t.done(13, "S2 example")
}

fn c14() -> Outcome {
    let mut t = Tally::new();
    let (m, n) = (TorusSpectrum::new(t2(0.2, 1.1).lattice()), TorusSpectrum::new(t2(-0.3, 0.9).lattice()));
    let x = product::det_product_general(&m, &n).unwrap().det();
    let y = product::det_product_general(&n, &m).unwrap().det();
    t.rel("(T2, T2)", x, y, 1e-6);
    let c = Circle::new(0.7).unwrap();
    let x = product::det_product_general(&m, &c).unwrap().det();
    let y = product::det_product_general(&c, &m).unwrap().det();
    t.rel("(T2, S1)", x, y, 1e-6);
    t.done(14, "product symmetry")
}

fn c15() -> Outcome {
    let mut t = Tally::new();
    let fixtures = [
        Lattice::identity(2),
        t2(0.3, 1.2).lattice(),
        Lattice::identity(3),
        generic_t3(),
        Lattice::identity(4),
        generic_t4(),
    ];
    for (i, l) in fixtures.iter().enumerate() {
        for s in [0.5, 1.0, 2.0] {
            t.abs(&format!("fixture {i} t = {s}"), tori::jacobi_residual(l, s).unwrap(), 0.0, 1e-12);
        }
    }
    t.done(15, "Jacobi identity")
}

fn cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_spectral-det")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn cli_contract() -> Outcome {
    let mut t = Tally::new();
    let (code, out) = cli(&["det", "t2", "--A", "0", "--B", "1", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap_or_default();
    t.check("det t2 exit", code == 0, format!("{code}"));
    let ld = v["log_det"].as_f64().unwrap_or(f64::NAN);
    t.rel("det t2 log_det", ld, 0.348_300_982_421_419_f64.ln(), 1e-12);
    for key in ["quantity", "inputs", "breakdown", "error_estimate", "method_notes"] {
        t.check(key, v.get(key).is_some(), "missing".into());
    }
    let (code, out) = cli(&["det", "h3", "--ell", "1", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap_or_default();
    t.check("det h3 exit", code == 0, format!("{code}"));
    t.check(
        "det h3 breakdown",
        v["breakdown"].get("torus_factor").is_some() && v["breakdown"].get("exponent_term").is_some(),
        out.clone(),
    );
    let (code, _) = cli(&["verify", "--suite", "tori", "--tol", "1e-6"]);
    t.check("verify tori exit", code == 0, format!("{code}"));
    let (code, _) = cli(&["det", "klein"]);
    t.check("unknown subcommand exit", code == 1, format!("{code}"));
    let (code, _) = cli(&["det", "t2", "--A", "0", "--B", "-1"]);
    t.check("bad input exit", code == 1, format!("{code}"));
    let args = ["det", "product", "--left", "t2:0.2,1.1", "--right", "s2", "--format", "json", "--reproducible"];
    let (a, b) = (cli(&args), cli(&args));
    t.check("byte-identical JSON", a == b && a.0 == 0, format!("{a:?}"));
    t.done(16, "command-line contract")
}

fn main() {
    let outcomes = [
        c1(),
        c2(),
        c3(),
        c4(),
        c5(),
        c6(),
        c7(),
        c8(),
        c9(),
        c10(),
        c11(),
        c12(),
        c13(),
        c14(),
        c15(),
        cli_contract(),
    ];
    for o in &outcomes {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let known = if !o.pass && EXPECTED_FAILURES.contains(&o.id) { " (known)" } else { "" };
        println!("{tag} criterion {:>2}: {}{known}", o.id, o.title);
        if !o.pass {
            println!("     {}", o.detail);
        }
    }
    let unexpected: Vec<u32> =
        outcomes.iter().filter(|o| !o.pass && !EXPECTED_FAILURES.contains(&o.id)).map(|o| o.id).collect();
    let fixed: Vec<u32> =
        outcomes.iter().filter(|o| o.pass && EXPECTED_FAILURES.contains(&o.id)).map(|o| o.id).collect();
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("acceptance: {passed} of {} passed", outcomes.len());
    if !unexpected.is_empty() {
        eprintln!("criteria failed: {unexpected:?}");
        std::process::exit(1);
    }
    if !fixed.is_empty() {
        eprintln!("criteria listed as failing now pass: {fixed:?}");
        std::process::exit(1);
    }
}
