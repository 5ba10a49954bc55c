use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Convex functions on `[0, 1]` with `f(0) = 0`, the family every
/// phase-space functional in the crate is built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ConvexFn {
    Identity,
    Square,
    Cube,
    /// `x^q` with `q ≥ 1`.
    Power(f64),
    /// `x ln x` with `0 ln 0 = 0`; convex but not C¹ at the origin.
    XLogX,
}

impl ConvexFn {
    #[inline]
    pub fn eval(self, x: f64) -> f64 {
        match self {
            ConvexFn::Identity => x,
            ConvexFn::Square => x * x,
            ConvexFn::Cube => x * x * x,
            ConvexFn::Power(q) => {
                if x <= 0.0 {
                    0.0
                } else {
                    x.powf(q)
                }
            }
            ConvexFn::XLogX => xlogx(x),
        }
    }

    /// `sup_{[0,1]} |f'|`, or `None` when `f` is not C¹ on `[0, 1]`.
    pub fn derivative_sup(self) -> Option<f64> {
        match self {
            ConvexFn::Identity => Some(1.0),
            ConvexFn::Square => Some(2.0),
            ConvexFn::Cube => Some(3.0),
            ConvexFn::Power(q) => Some(q),
            ConvexFn::XLogX => None,
        }
    }

    pub fn is_c1(self) -> bool {
        self.derivative_sup().is_some()
    }

    /// Exponent when `f` is a positive integer power.
    pub fn integer_power(self) -> Option<u32> {
        match self {
            ConvexFn::Identity => Some(1),
            ConvexFn::Square => Some(2),
            ConvexFn::Cube => Some(3),
            ConvexFn::Power(q) if q.fract() == 0.0 && (1.0..=3.0).contains(&q) => Some(q as u32),
            _ => None,
        }
    }

    pub fn name(self) -> String {
        match self {
            ConvexFn::Identity => "identity".into(),
            ConvexFn::Square => "square".into(),
            ConvexFn::Cube => "cube".into(),
            ConvexFn::Power(q) => format!("power:{q}"),
            ConvexFn::XLogX => "xlogx".into(),
        }
    }

    /// The family used for majorization checks.
    pub fn majorization_family() -> [ConvexFn; 3] {
        [ConvexFn::Square, ConvexFn::Cube, ConvexFn::XLogX]
    }
}

impl fmt::Display for ConvexFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for ConvexFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "identity" | "x" => Ok(ConvexFn::Identity),
            "square" | "x2" => Ok(ConvexFn::Square),
            "cube" | "x3" => Ok(ConvexFn::Cube),
            "xlogx" | "xlnx" => Ok(ConvexFn::XLogX),
            other => {
                let q = other
                    .strip_prefix("power:")
                    .ok_or_else(|| Error::Parse(format!("unknown convex function `{other}`")))?;
                let q: f64 = q
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad exponent in `{other}`")))?;
                if !(q >= 1.0) {
                    return Err(Error::Domain(format!(
                        "power exponent {q} < 1 is not convex"
                    )));
                }
                Ok(ConvexFn::Power(q))
            }
        }
    }
}

/// `x ln x` with the convention `0 ln 0 = 0`.
#[inline]
pub fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        for f in [
            ConvexFn::Identity,
            ConvexFn::Square,
            ConvexFn::Cube,
            ConvexFn::XLogX,
            ConvexFn::Power(2.5),
        ] {
            assert_eq!(f.name().parse::<ConvexFn>().unwrap(), f);
        }
        assert!("power:0.5".parse::<ConvexFn>().is_err());
        assert!("sin".parse::<ConvexFn>().is_err());
    }

    #[test]
    fn vanish_at_origin() {
        for f in [ConvexFn::Square, ConvexFn::XLogX, ConvexFn::Power(1.5)] {
            assert_eq!(f.eval(0.0), 0.0);
        }
    }
}
