//! Lattice files and manifold descriptors given on the command line.

use std::fs;
use std::path::Path;

use serde::Deserialize;
use spectral_det::product::{Circle, SpectralData, Sphere2};
use spectral_det::tori::{Lattice, T2Params, TorusSpectrum};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LatticeFile {
    dim: usize,
    a: Vec<Vec<f64>>,
    #[serde(default)]
    normalize: bool,
}

/// Reads `{"dim": n, "a": [[...], ...]}` with upper-triangular rows.
/// With `"normalize": true` the basis is rescaled to a11 = 1 first.
pub fn read_lattice(path: &Path) -> Result<Lattice, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read lattice file {}: {e}", path.display())))?;
    parse_lattice(&text)
}

pub fn parse_lattice(text: &str) -> Result<Lattice, CliError> {
    let f: LatticeFile =
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("bad lattice file: {e}")))?;
    if f.a.len() != f.dim {
        return Err(CliError::Input(format!("lattice has {} rows but dim is {}", f.a.len(), f.dim)));
    }
    let lattice = if f.normalize { Lattice::normalized(&f.a).map(|(l, _)| l) } else { Lattice::from_rows(&f.a) };
    Ok(lattice?)
}

pub fn lattice_of_dim(path: &Path, dim: usize) -> Result<Lattice, CliError> {
    let l = read_lattice(path)?;
    if l.dim() != dim {
        return Err(CliError::Input(format!("expected a {dim}-dimensional lattice, got {}", l.dim())));
    }
    Ok(l)
}

/// A factor of a product manifold:
/// `circle:<ell>`, `s2`, `t2:<A>,<B>` or `torus:<lattice file>`.
pub fn parse_manifold(spec: &str) -> Result<Box<dyn SpectralData>, CliError> {
    let (kind, rest) = match spec.split_once(':') {
        Some((k, r)) => (k, Some(r)),
        None => (spec, None),
    };
    let num = |s: &str| -> Result<f64, CliError> {
        s.trim().parse::<f64>().map_err(|_| CliError::Input(format!("bad number '{s}' in '{spec}'")))
    };
    match (kind, rest) {
        ("circle" | "s1", Some(r)) => Ok(Box::new(Circle::new(num(r)?)?)),
        ("s2", None) => Ok(Box::new(Sphere2)),
        ("t2", Some(r)) => {
            let (a, b) = r
                .split_once(',')
                .ok_or_else(|| CliError::Input(format!("t2 needs '<A>,<B>' in '{spec}'")))?;
            let p = T2Params::new(num(a)?, num(b)?)?;
            Ok(Box::new(TorusSpectrum::new(p.lattice())))
        }
        ("torus", Some(r)) => Ok(Box::new(TorusSpectrum::new(read_lattice(Path::new(r))?))),
        _ => Err(CliError::Input(format!(
            "unknown manifold '{spec}' (use circle:<ell>, s2, t2:<A>,<B> or torus:<file>)"
        ))),
    }
}

/// `a..b` (inclusive) or a single integer.
pub fn parse_range(s: &str) -> Result<(u32, u32), CliError> {
    let bad = || CliError::Input(format!("bad range '{s}' (expected N or A..B)"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => {
            let n: u32 = s.trim().parse().map_err(|_| bad())?;
            (1, n)
        }
    };
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}
