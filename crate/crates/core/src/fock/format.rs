//! Plain-text storage for states and spectra.
//!
//! ```text
//! fock-density v1
//! modes 1
//! dim 3
//! tail_bound 0
//! 0.5 0 0 0 0 0
//! 0 0 0.3 0 0 0
//! 0 0 0 0 0.2 0
//! ```
//!
//! Each matrix row is written as `re im` pairs. Spectra are whitespace- or
//! comma-separated numbers. Lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::path::Path;

use super::{DensityOperator, FockCutoff, Spectrum};
use crate::error::{Error, Result};
use crate::{CMatrix, C64};

const HEADER: &str = "fock-density v1";

fn content_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

fn parse_f64(tok: &str) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| Error::Parse(format!("bad number {tok:?}")))
}

fn keyed<'a>(line: Option<&'a str>, key: &str) -> Result<&'a str> {
    let line = line.ok_or_else(|| Error::Parse(format!("missing `{key}` line")))?;
    let mut parts = line.split_whitespace();
    match (parts.next(), parts.next(), parts.next()) {
        (Some(k), Some(v), None) if k == key => Ok(v),
        _ => Err(Error::Parse(format!(
            "expected `{key} <value>`, found {line:?}"
        ))),
    }
}

pub fn write_density(rho: &DensityOperator) -> String {
    let c = rho.cutoff();
    let mut out = String::new();
    let _ = writeln!(out, "{HEADER}");
    let _ = writeln!(out, "modes {}", c.modes());
    let _ = writeln!(out, "dim {}", c.dim());
    let _ = writeln!(out, "tail_bound {:e}", rho.tail_bound());
    let m = rho.matrix();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("{:e} {:e}", m[(i, j)].re, m[(i, j)].im))
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

/// Parses and validates a state written by [`write_density`].
pub fn read_density(text: &str) -> Result<DensityOperator> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some(HEADER) => {}
        other => {
            return Err(Error::Parse(format!(
                "expected header {HEADER:?}, found {other:?}"
            )))
        }
    }
    let modes: usize = keyed(lines.next(), "modes")?
        .parse()
        .map_err(|_| Error::Parse("bad mode count".into()))?;
    let dim: usize = keyed(lines.next(), "dim")?
        .parse()
        .map_err(|_| Error::Parse("bad dim".into()))?;
    let tail = parse_f64(keyed(lines.next(), "tail_bound")?)?;
    let cutoff = FockCutoff::new(dim, modes)?;
    let n = cutoff.total_dim();
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("expected {n} matrix rows, found {i}")))?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(parse_f64)
            .collect::<Result<_>>()?;
        if vals.len() != 2 * n {
            return Err(Error::Parse(format!(
                "row {i} has {} numbers, expected {}",
                vals.len(),
                2 * n
            )));
        }
        for j in 0..n {
            m[(i, j)] = C64::new(vals[2 * j], vals[2 * j + 1]);
        }
    }
    if lines.next().is_some() {
        return Err(Error::Parse("trailing content after matrix".into()));
    }
    DensityOperator::new(cutoff, m, tail)
}

pub fn read_spectrum(text: &str) -> Result<Spectrum> {
    let vals: Vec<f64> = content_lines(text)
        .flat_map(|l| l.split(|c: char| c == ',' || c.is_whitespace()))
        .filter(|t| !t.is_empty())
        .map(parse_f64)
        .collect::<Result<_>>()?;
    Spectrum::new(vals)
}

pub fn write_spectrum(spec: &Spectrum) -> String {
    spec.probs().iter().map(|p| format!("{p:e}\n")).collect()
}

pub fn load_density(path: impl AsRef<Path>) -> Result<DensityOperator> {
    read_density(&std::fs::read_to_string(path)?)
}

pub fn save_density(rho: &DensityOperator, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_density(rho))?;
    Ok(())
}

pub fn load_spectrum(path: impl AsRef<Path>) -> Result<Spectrum> {
    read_spectrum(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{random_isospectral_state, thermal_state};

    #[test]
    fn density_round_trip_is_exact() {
        let c = FockCutoff::single(6).unwrap();
        let spec = Spectrum::new(vec![0.5, 0.25, 0.125, 0.125]).unwrap();
        let rho = random_isospectral_state(&spec, c, 11).unwrap();
        let back = read_density(&write_density(&rho)).unwrap();
        assert_eq!(back, rho);
        let w = thermal_state(0.3, c).unwrap();
        assert_eq!(read_density(&write_density(&w)).unwrap(), w);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(read_density("fock-density v2\n").is_err());
        assert!(read_density("fock-density v1\nmodes 1\ndim 2\ntail_bound 0\n1 0 0 0\n").is_err());
        let not_psd = "fock-density v1\nmodes 1\ndim 2\ntail_bound 0\n0.5 0 0.9 0\n0.9 0 0.5 0\n";
        assert!(matches!(read_density(not_psd), Err(Error::NotAState(_))));
    }

    #[test]
    fn spectrum_parsing() {
        let s = read_spectrum("# comment\n0.2, 0.5\n0.3\n").unwrap();
        assert_eq!(s.probs(), &[0.5, 0.3, 0.2]);
        assert!(read_spectrum("0.7 0.7").is_err());
        assert_eq!(read_spectrum(&write_spectrum(&s)).unwrap(), s);
    }
}
