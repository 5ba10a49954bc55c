//! Structured records of inequality and limit checks.
//!
//! A report's `pass` flag is always `margin ≥ −tolerance_budget`; it is set
//! in one place ([`VerificationReport::finish`]) and never assigned directly.
//! Non-finite numbers (a divergent supremum, say) serialise as the strings
//! `"inf"`, `"-inf"` and `"nan"` so reports round-trip through JSON.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// A proven statement: a failure is a bug or a violated budget.
    Hard,
    /// Evidence for an open conjecture; never affects exit status.
    ConjectureEvidence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    #[serde(with = "real")]
    pub parameter: f64,
    #[serde(with = "real")]
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub name: String,
    pub kind: CheckKind,
    pub inputs: BTreeMap<String, serde_json::Value>,
    #[serde(with = "real")]
    pub lhs: f64,
    #[serde(with = "real")]
    pub rhs: f64,
    #[serde(with = "real")]
    pub margin: f64,
    #[serde(with = "real")]
    pub tolerance_budget: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<SeriesPoint>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty", with = "real_map")]
    pub details: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub flags: BTreeMap<String, bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl VerificationReport {
    /// Report for a claim `lhs ≤ rhs`; margin is `rhs − lhs`.
    pub fn upper_bound(name: impl Into<String>, lhs: f64, rhs: f64, budget: f64) -> Self {
        Self::with_margin(name, lhs, rhs, rhs - lhs, budget)
    }

    /// Report for a claim `lhs ≥ rhs`; margin is `lhs − rhs`.
    pub fn lower_bound(name: impl Into<String>, lhs: f64, rhs: f64, budget: f64) -> Self {
        Self::with_margin(name, lhs, rhs, lhs - rhs, budget)
    }

    /// Report with an explicitly computed margin (trend and equality checks).
    pub fn with_margin(
        name: impl Into<String>,
        lhs: f64,
        rhs: f64,
        margin: f64,
        budget: f64,
    ) -> Self {
        let mut r = Self {
            name: name.into(),
            kind: CheckKind::Hard,
            inputs: BTreeMap::new(),
            lhs,
            rhs,
            margin,
            tolerance_budget: budget,
            pass: false,
            series: Vec::new(),
            details: BTreeMap::new(),
            flags: BTreeMap::new(),
            notes: Vec::new(),
        };
        r.finish();
        r
    }

    /// Recomputes `pass` from the margin and budget. NaN margins fail.
    pub fn finish(&mut self) {
        self.pass = self.margin >= -self.tolerance_budget;
    }

    pub fn set_margin(&mut self, margin: f64) {
        self.margin = margin;
        self.finish();
    }

    pub fn add_budget(&mut self, extra: f64) {
        self.tolerance_budget += extra;
        self.finish();
    }

    pub fn input(mut self, key: &str, value: impl Serialize) -> Self {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.inputs.insert(key.to_string(), v);
        self
    }

    pub fn detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }

    pub fn flag(mut self, key: &str, value: bool) -> Self {
        self.flags.insert(key.to_string(), value);
        self
    }

    pub fn note(mut self, text: impl Into<String>) -> Self {
        self.notes.push(text.into());
        self
    }

    pub fn series(mut self, points: impl IntoIterator<Item = (f64, f64)>) -> Self {
        self.series = points
            .into_iter()
            .map(|(parameter, value)| SeriesPoint { parameter, value })
            .collect();
        self
    }

    pub fn conjecture_evidence(mut self) -> Self {
        self.kind = CheckKind::ConjectureEvidence;
        self
    }

    /// True when this report should fail a suite: a hard check that did not pass.
    pub fn is_hard_failure(&self) -> bool {
        self.kind == CheckKind::Hard && !self.pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialise")
    }
}

/// Serialises a batch of reports as one JSON array.
pub fn reports_to_json(reports: &[VerificationReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports always serialise")
}

pub fn reports_from_json(text: &str) -> crate::Result<Vec<VerificationReport>> {
    Ok(serde_json::from_str(text)?)
}

/// `x` to `digits` significant digits, fixed-point for moderate magnitudes.
pub fn format_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return real::label(x).to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..9).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{:.*e}", digits.saturating_sub(1), x)
    }
}

/// Fixed-width table: one row per report with both sides, margin and budget.
pub fn render_table(reports: &[VerificationReport]) -> String {
    let width = reports
        .iter()
        .map(|r| r.name.len())
        .max()
        .unwrap_or(4)
        .max(4);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>16}  {:>16}  {:>16}  {:>16}  status",
        "name", "lhs", "rhs", "margin", "budget"
    );
    for r in reports {
        let status = match (r.pass, r.kind) {
            (true, _) => "pass",
            (false, CheckKind::Hard) => "FAIL",
            (false, CheckKind::ConjectureEvidence) => "counterexample?",
        };
        let _ = writeln!(
            out,
            "{:<width$}  {:>16}  {:>16}  {:>16}  {:>16}  {}",
            r.name,
            format_sig(r.lhs, 9),
            format_sig(r.rhs, 9),
            format_sig(r.margin, 9),
            format_sig(r.tolerance_budget, 9),
            status
        );
    }
    out
}

mod real {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub(super) fn label(x: f64) -> &'static str {
        if x.is_nan() {
            "nan"
        } else if x > 0.0 {
            "inf"
        } else {
            "-inf"
        }
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_str(label(*x))
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    pub(super) enum Repr {
        Num(f64),
        Text(String),
    }

    impl Repr {
        pub(super) fn value<E: de::Error>(self) -> Result<f64, E> {
            match self {
                Repr::Num(x) => Ok(x),
                Repr::Text(t) => match t.as_str() {
                    "inf" => Ok(f64::INFINITY),
                    "-inf" => Ok(f64::NEG_INFINITY),
                    "nan" => Ok(f64::NAN),
                    other => Err(E::custom(format!("not a number: {other:?}"))),
                },
            }
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Repr::deserialize(d)?.value()
    }
}

mod real_map {
    use std::collections::BTreeMap;

    use serde::ser::SerializeMap;
    use serde::{Deserialize, Deserializer, Serializer};

    struct Wrapped(f64);

    impl serde::Serialize for Wrapped {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            super::real::serialize(&self.0, s)
        }
    }

    pub fn serialize<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(m.len()))?;
        for (k, v) in m {
            map.serialize_entry(k, &Wrapped(*v))?;
        }
        map.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
        let raw = BTreeMap::<String, super::real::Repr>::deserialize(d)?;
        raw.into_iter().map(|(k, v)| Ok((k, v.value()?))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_tracks_margin_and_budget() {
        let r = VerificationReport::upper_bound("a", 1.0, 1.0 - 1e-10, 1e-9);
        assert!(r.pass);
        let r = VerificationReport::upper_bound("a", 1.0, 1.0 - 1e-8, 1e-9);
        assert!(!r.pass);
        let mut r = VerificationReport::lower_bound("b", 2.0, 1.0, 0.0);
        assert!(r.pass && r.margin == 1.0);
        r.set_margin(f64::NAN);
        assert!(!r.pass);
    }

    #[test]
    fn json_round_trip_with_infinities() {
        let r = VerificationReport::upper_bound("pq", 0.8, f64::INFINITY, 1e-9)
            .input("p", 2.0)
            .detail("grid_max", f64::INFINITY)
            .flag("divergent", true)
            .series([(0.9, 1.0), (0.99, 3.0)])
            .note("p > q")
            .conjecture_evidence();
        let text = r.to_json();
        assert!(text.contains("\"inf\""));
        let back: VerificationReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
        assert!(back.pass && !back.is_hard_failure());
    }

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(1.693147180559945, 9), "1.69314718");
        assert_eq!(format_sig(0.5773502691896258, 9), "0.577350269");
        assert_eq!(format_sig(1e-12, 9), "1.00000000e-12");
        assert_eq!(format_sig(f64::INFINITY, 9), "inf");
        assert!(
            render_table(&[VerificationReport::upper_bound("x", 0.0, 1.0, 0.0)]).contains("pass")
        );
    }
}
