//! State specifications: `vacuum`, `thermal:Z`, `fock:N`, `coherent:RE[,IM]`
//! or a path to a `fock-density v1` file (optionally `file:PATH`).

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::Context;
use serde::Serialize;
use wehrl_core::fock::format::load_density;
use wehrl_core::fock::{coherent_state, fock_state, thermal_state, vacuum};
use wehrl_core::{CoherentAmplitude, DensityOperator, FockCutoff, C64};

use crate::Usage;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateSpec {
    Vacuum,
    Thermal { z: f64 },
    Fock { n: usize },
    Coherent { re: f64, im: f64 },
    File { path: PathBuf },
}

impl FromStr for StateSpec {
    type Err = Usage;

    fn from_str(s: &str) -> Result<Self, Usage> {
        let bad = || {
            Usage(format!(
                "unknown state spec `{s}` (vacuum, thermal:Z, fock:N, coherent:RE,IM or a file)"
            ))
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        let spec = match s.split_once(':') {
            None if s == "vacuum" => StateSpec::Vacuum,
            Some(("thermal", z)) => StateSpec::Thermal { z: num(z)? },
            Some(("fock", n)) => StateSpec::Fock {
                n: n.trim().parse().map_err(|_| bad())?,
            },
            Some(("coherent", z)) => {
                let (re, im) = z.split_once(',').unwrap_or((z, "0"));
                StateSpec::Coherent {
                    re: num(re)?,
                    im: num(im)?,
                }
            }
            Some(("file", p)) => StateSpec::File { path: p.into() },
            _ if std::path::Path::new(s).is_file() => StateSpec::File { path: s.into() },
            _ => return Err(bad()),
        };
        Ok(spec)
    }
}

impl StateSpec {
    /// Builds the state. `dim` overrides the automatic cutoff; `tail` is the
    /// truncation target for thermal and coherent states.
    pub fn build(&self, dim: Option<usize>, tail: f64) -> anyhow::Result<DensityOperator> {
        let fixed = |auto: usize| FockCutoff::single(dim.unwrap_or(auto));
        let rho = match self {
            StateSpec::Vacuum => vacuum(fixed(2)?),
            StateSpec::Thermal { z } => {
                let c = match dim {
                    Some(d) => FockCutoff::single(d)?,
                    None => FockCutoff::for_thermal(*z, tail)?,
                };
                thermal_state(*z, c)?
            }
            StateSpec::Fock { n } => fock_state(*n, fixed((n + 1).max(2))?)?,
            StateSpec::Coherent { re, im } => {
                let z = C64::new(*re, *im);
                let c = match dim {
                    Some(d) => FockCutoff::single(d)?,
                    None => FockCutoff::for_coherent(z.norm_sqr(), tail)?,
                };
                coherent_state(&CoherentAmplitude::single(z), c)?
            }
            StateSpec::File { path } => {
                if dim.is_some() {
                    return Err(Usage("--dim cannot be combined with a state file".into()).into());
                }
                load_density(path).with_context(|| format!("reading state {}", path.display()))?
            }
        };
        Ok(rho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_form() {
        assert_eq!("vacuum".parse::<StateSpec>().unwrap(), StateSpec::Vacuum);
        assert_eq!(
            "thermal:0.5".parse::<StateSpec>().unwrap(),
            StateSpec::Thermal { z: 0.5 }
        );
        assert_eq!(
            "fock:3".parse::<StateSpec>().unwrap(),
            StateSpec::Fock { n: 3 }
        );
        assert_eq!(
            "coherent:1,-0.5".parse::<StateSpec>().unwrap(),
            StateSpec::Coherent { re: 1.0, im: -0.5 }
        );
        assert_eq!(
            "coherent:2".parse::<StateSpec>().unwrap(),
            StateSpec::Coherent { re: 2.0, im: 0.0 }
        );
        for bad in ["squeezed:1", "thermal:x", "fock:-1", "/no/such/file"] {
            assert!(bad.parse::<StateSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn cutoffs_follow_the_tail() {
        let rho = StateSpec::Thermal { z: 0.5 }.build(None, 1e-12).unwrap();
        assert!(rho.tail_bound() <= 1e-12);
        assert_eq!(
            StateSpec::Fock { n: 3 }
                .build(None, 1e-12)
                .unwrap()
                .cutoff()
                .dim(),
            4
        );
        assert_eq!(
            StateSpec::Vacuum
                .build(Some(5), 1e-12)
                .unwrap()
                .cutoff()
                .dim(),
            5
        );
    }
}
