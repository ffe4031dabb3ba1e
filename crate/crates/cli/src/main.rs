//! `spectral-det`: zeta-regularized determinants from the command line.

mod input;
mod report;
mod verify;

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use spectral_det::heisenberg::{self, HeisenbergParams};
use spectral_det::product::{self, Sphere2};
use spectral_det::tori::{self, T2Params, TorusSpectrum};
use spectral_det::DetResult;

use report::{num, Format, Headline, Output, Table};

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Accuracy(String),
    Verification(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Accuracy(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Accuracy(m) => write!(f, "accuracy error: {m}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<spectral_det::Error> for CliError {
    fn from(e: spectral_det::Error) -> Self {
        use spectral_det::Error as E;
        match e {
            E::Input(_) | E::Domain(_) | E::Pole(_) => CliError::Input(e.to_string()),
            _ => CliError::Accuracy(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "spectral-det", version, about = "Zeta-regularized determinants of Laplacians")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Series cutoff (recorded in the inputs; the library uses it as its internal default).
    #[arg(long, global = true, default_value_t = 1e-18)]
    tail_eps: f64,
    /// Quadrature tolerance (recorded in the inputs, as above).
    #[arg(long, global = true, default_value_t = 1e-10)]
    quad_tol: f64,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress all wall-clock content.
    #[arg(long, global = true)]
    reproducible: bool,
    /// Add a unix timestamp to JSON output (ignored with --reproducible).
    #[arg(long, global = true)]
    timestamp: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Determinant of the Laplacian.
    Det {
        #[command(subcommand)]
        what: DetCmd,
    },
    /// Heat coefficients c_0 .. c_{k_max} of a Heisenberg manifold.
    Heat {
        which: Heis,
        #[arg(long)]
        ell: u32,
        #[arg(long, default_value_t = 3)]
        k_max: usize,
    },
    /// Spectral zeta functions.
    Zeta {
        #[command(subcommand)]
        what: ZetaCmd,
    },
    /// Table of the determinant over a range of ell.
    Sweep {
        which: Heis,
        /// `A..B` or `N` (meaning 1..N).
        #[arg(long)]
        ell: String,
    },
    /// Run the cross-formula and oracle checks.
    Verify {
        #[arg(long, value_enum, default_value_t = verify::Suite::All)]
        suite: verify::Suite,
        /// Tolerance floor: no check is run tighter than this.
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Heis {
    H3,
    H5,
}

#[derive(Clone, Copy, ValueEnum)]
enum S1Factor {
    T2,
    S2,
    T3,
}

#[derive(Subcommand)]
enum DetCmd {
    /// Flat torus with basis (1, 0), (A, B).
    T2 {
        #[arg(long = "A", allow_negative_numbers = true)]
        a: f64,
        #[arg(long = "B", allow_negative_numbers = true)]
        b: f64,
    },
    T3 {
        #[arg(long)]
        lattice: PathBuf,
    },
    T4 {
        #[arg(long, required_unless_present = "diagonal")]
        lattice: Option<PathBuf>,
        /// The unit 4-torus through its diagonal closed form.
        #[arg(long, conflicts_with = "lattice")]
        diagonal: bool,
    },
    H3 {
        #[arg(long)]
        ell: u32,
    },
    H5 {
        #[arg(long)]
        ell: u32,
    },
    /// M x S^1 with a circle of length 2 pi ell.
    ProductS1 {
        #[arg(long, value_enum)]
        manifold: S1Factor,
        #[arg(long)]
        ell: f64,
        #[arg(long = "A", allow_negative_numbers = true)]
        a: Option<f64>,
        #[arg(long = "B", allow_negative_numbers = true)]
        b: Option<f64>,
        #[arg(long)]
        lattice: Option<PathBuf>,
    },
    /// General product; factors are circle:<ell>, s2, t2:<A>,<B> or torus:<file>.
    Product {
        #[arg(long, allow_hyphen_values = true)]
        left: String,
        #[arg(long, allow_hyphen_values = true)]
        right: String,
    },
}

#[derive(Subcommand)]
enum ZetaCmd {
    T2 {
        #[arg(long, allow_negative_numbers = true)]
        s: f64,
        #[arg(long = "A", allow_negative_numbers = true)]
        a: f64,
        #[arg(long = "B", allow_negative_numbers = true)]
        b: f64,
    },
    S2 {
        #[arg(long, allow_negative_numbers = true)]
        s: f64,
    },
    /// Epstein zeta of a lattice file.
    Epstein {
        #[arg(long, allow_negative_numbers = true)]
        s: f64,
        #[arg(long)]
        lattice: PathBuf,
    },
}

enum Rendered {
    Single(Output),
    Table(Table),
    Report(Value, bool),
}

fn inputs(pairs: &[(&str, Value)]) -> Map<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn need(v: Option<f64>, name: &str) -> Result<f64, CliError> {
    v.ok_or_else(|| CliError::Input(format!("--{name} is required here")))
}

fn det(cmd: &DetCmd) -> Result<Output, CliError> {
    let (quantity, inp, d): (&str, _, DetResult) = match cmd {
        DetCmd::T2 { a, b } => {
            let p = T2Params::new(*a, *b)?;
            ("det_t2", inputs(&[("A", json!(a)), ("B", json!(b))]), tori::det_t2(&p))
        }
        DetCmd::T3 { lattice } => {
            let l = input::lattice_of_dim(lattice, 3)?;
            ("det_t3", inputs(&[("lattice", json!(lattice))]), tori::det_t3(&l)?)
        }
        DetCmd::T4 { lattice: Some(path), .. } => {
            let l = input::lattice_of_dim(path, 4)?;
            ("det_t4", inputs(&[("lattice", json!(path))]), tori::det_t4(&l)?)
        }
        DetCmd::T4 { lattice: None, .. } => ("det_t4_diagonal", Map::new(), tori::det_t4_diagonal()?),
        DetCmd::H3 { ell } => ("det_h3", inputs(&[("ell", json!(ell))]), heisenberg::h3_log_det(*ell)?),
        DetCmd::H5 { ell } => ("det_h5", inputs(&[("ell", json!(ell))]), heisenberg::h5_log_det(*ell)?),
        DetCmd::ProductS1 { manifold, ell, a, b, lattice } => match manifold {
            S1Factor::T2 => {
                let (a, b) = (need(*a, "A")?, need(*b, "B")?);
                let m = TorusSpectrum::new(T2Params::new(a, b)?.lattice());
                let inp = inputs(&[("manifold", json!("t2")), ("A", json!(a)), ("B", json!(b)), ("ell", json!(ell))]);
                ("det_product_s1", inp, product::det_product_s1(&m, *ell)?)
            }
            S1Factor::S2 => {
                let inp = inputs(&[("manifold", json!("s2")), ("ell", json!(ell))]);
                ("det_product_s1", inp, product::det_product_s1(&Sphere2, *ell)?)
            }
            S1Factor::T3 => {
                let path = lattice.as_ref().ok_or_else(|| CliError::Input("--lattice is required for t3".into()))?;
                let m = TorusSpectrum::new(input::lattice_of_dim(path, 3)?);
                let inp = inputs(&[("manifold", json!("t3")), ("lattice", json!(path)), ("ell", json!(ell))]);
                ("det_product_s1", inp, product::det_product_s1(&m, *ell)?)
            }
        },
        DetCmd::Product { left, right } => {
            let m = input::parse_manifold(left)?;
            let n = input::parse_manifold(right)?;
            let inp = inputs(&[("left", json!(left)), ("right", json!(right))]);
            ("det_product", inp, product::det_product_general(m.as_ref(), n.as_ref())?)
        }
    };
    Ok(Output::from_det(quantity, inp, &d))
}

fn heis(which: Heis, ell: u32) -> Result<HeisenbergParams, CliError> {
    Ok(match which {
        Heis::H3 => HeisenbergParams::three(ell)?,
        Heis::H5 => HeisenbergParams::five(ell)?,
    })
}

fn heat(which: Heis, ell: u32, k_max: usize) -> Result<Output, CliError> {
    let p = heis(which, ell)?;
    let n = p.dim.value();
    let mut rows = Vec::new();
    for k in 0..=k_max {
        let (c, shown) = match which {
            Heis::H3 => (heisenberg::h3_heat_coefficient(k, ell)?, heisenberg::h3_heat_coefficient_displayed(k, ell)?),
            Heis::H5 => (heisenberg::h5_heat_coefficient(k, ell)?, heisenberg::h5_heat_coefficient_displayed(k, ell)?),
        };
        rows.push(json!({
            "k": k,
            "c_k": num(c.value),
            "zeta_residue": num(c.zeta_residue(n)),
            "displayed": num(shown),
        }));
    }
    let inp = inputs(&[("manifold", json!(format!("h{n}"))), ("ell", json!(ell)), ("k_max", json!(k_max))]);
    let mut o = Output::new("heat_coefficients", inp, Headline::Value(Value::Array(rows)));
    o.notes.push(format!("trace ~ (4 pi t)^(-{n}/2) sum_k c_k t^k"));
    o.notes.push("displayed: the uncorrected closed residue formula, kept for comparison".into());
    Ok(o)
}

fn zeta(cmd: &ZetaCmd) -> Result<Output, CliError> {
    let (quantity, inp, v) = match cmd {
        ZetaCmd::T2 { s, a, b } => {
            let p = T2Params::new(*a, *b)?;
            ("zeta_t2", inputs(&[("s", json!(s)), ("A", json!(a)), ("B", json!(b))]), tori::zeta_t2(*s, &p)?)
        }
        ZetaCmd::S2 { s } => ("zeta_s2", inputs(&[("s", json!(s))]), product::zeta_s2(*s)?),
        ZetaCmd::Epstein { s, lattice } => {
            let l = input::read_lattice(lattice)?;
            ("epstein_zeta", inputs(&[("s", json!(s)), ("lattice", json!(lattice))]), tori::epstein_zeta(&l, *s)?)
        }
    };
    Ok(Output::new(quantity, inp, Headline::Value(num(v))))
}

fn sweep(which: Heis, range: &str) -> Result<Table, CliError> {
    let (lo, hi) = input::parse_range(range)?;
    let mut rows = Vec::new();
    for ell in lo..=hi {
        let d = heisenberg::log_det(&heis(which, ell)?)?;
        rows.push(vec![ell as f64, d.log_det, d.det(), d.error_estimate]);
    }
    let name = match which {
        Heis::H3 => "sweep_h3",
        Heis::H5 => "sweep_h5",
    };
    Ok(Table {
        quantity: name.into(),
        inputs: inputs(&[("ell", json!(range))]),
        columns: ["ell", "log_det", "det", "error_estimate"].iter().map(|s| s.to_string()).collect(),
        rows,
    })
}

fn execute(cli: &Cli) -> Result<Rendered, CliError> {
    Ok(match &cli.cmd {
        Cmd::Det { what } => Rendered::Single(det(what)?),
        Cmd::Heat { which, ell, k_max } => Rendered::Single(heat(*which, *ell, *k_max)?),
        Cmd::Zeta { what } => Rendered::Single(zeta(what)?),
        Cmd::Sweep { which, ell } => Rendered::Table(sweep(*which, ell)?),
        Cmd::Verify { suite, tol } => {
            if !(*tol >= 0.0) {
                return Err(CliError::Input("--tol must be non-negative".into()));
            }
            let checks = verify::run(*suite, *tol);
            let ok = checks.iter().all(|c| c.informational || c.pass());
            Rendered::Report(verify::report(&checks), ok)
        }
    })
}

fn render(cli: &Cli, r: &Rendered) -> Result<String, CliError> {
    let decorate = |mut v: Value| {
        if let Value::Object(m) = &mut v {
            if let Some(Value::Object(inp)) = m.get_mut("inputs") {
                inp.insert("tail_eps".into(), num(cli.tail_eps));
                inp.insert("quad_tol".into(), num(cli.quad_tol));
            }
            if cli.timestamp && !cli.reproducible {
                let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
                m.insert("timestamp".into(), json!(secs));
            }
        }
        v
    };
    let pretty = |v: Value| serde_json::to_string_pretty(&v).expect("JSON values always serialize") + "\n";
    match (cli.format, r) {
        (Format::Csv, Rendered::Table(t)) => Ok(t.to_csv()),
        (Format::Csv, _) => Err(CliError::Input("csv output is only available for sweep".into())),
        (Format::Json, Rendered::Single(o)) => Ok(pretty(decorate(o.to_json()))),
        (Format::Json, Rendered::Table(t)) => Ok(pretty(decorate(t.to_json()))),
        (Format::Json, Rendered::Report(v, _)) => Ok(pretty(decorate(v.clone()))),
        (Format::Text, Rendered::Single(o)) => Ok(o.to_text()),
        (Format::Text, Rendered::Table(t)) => Ok(t.to_text()),
        (Format::Text, Rendered::Report(v, _)) => Ok(report_text(v)),
    }
}

fn report_text(v: &Value) -> String {
    let mut s = String::new();
    for c in v["checks"].as_array().into_iter().flatten() {
        let tag = match (c["pass"].as_bool(), c.get("informational").is_some()) {
            (_, true) => "INFO",
            (Some(true), _) => "PASS",
            _ => "FAIL",
        };
        s.push_str(&format!(
            "{tag} {:<48} lhs={} rhs={} diff={} tol={}\n",
            c["name"].as_str().unwrap_or(""),
            c["lhs"],
            c["rhs"],
            c["abs_diff"],
            c["tol"]
        ));
    }
    let m = &v["summary"];
    s.push_str(&format!(
        "{} of {} checks passed ({} informational)\n",
        m["passed"], m["total"], m["informational"]
    ));
    s
}

fn run() -> Result<(), CliError> {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Err(CliError::Input("bad command line".into())) } else { Ok(()) };
        }
    };
    let r = execute(&cli)?;
    let text = render(&cli, &r)?;
    match &cli.out {
        Some(path) => fs::write(path, &text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    if let Rendered::Report(_, false) = r {
        return Err(CliError::Verification("at least one check is outside its tolerance".into()));
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spectral-det: {e}");
            ExitCode::from(e.code())
        }
    }
}
