//! Report files. Without `--out`, every run writes a new file
//! `<out_dir>/<stem>-<UTC timestamp>.<ext>` and never overwrites an older
//! one. Deterministic mode leaves timestamps and timings out of the
//! content, so identical runs produce byte-identical files.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Map, Value};

use crate::config::RunConfig;

pub struct Sink<'a> {
    pub cfg: &'a RunConfig,
    pub out: Option<PathBuf>,
    started: Instant,
}

impl<'a> Sink<'a> {
    pub fn new(cfg: &'a RunConfig, out: Option<PathBuf>) -> Self {
        Self {
            cfg,
            out,
            started: Instant::now(),
        }
    }

    /// JSON record: command, configuration and payload, plus creation time
    /// and elapsed seconds outside deterministic mode.
    pub fn record(&self, command: &str, payload: Value) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), json!(command));
        m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        m.insert(
            "config".into(),
            serde_json::to_value(self.cfg).expect("config serialises"),
        );
        if !self.cfg.deterministic {
            m.insert("created".into(), json!(chrono::Utc::now().to_rfc3339()));
            m.insert(
                "elapsed_seconds".into(),
                json!(self.started.elapsed().as_secs_f64()),
            );
        }
        if let Value::Object(p) = payload {
            m.extend(p);
        }
        Value::Object(m)
    }

    pub fn write_json(&self, stem: &str, record: &Value) -> anyhow::Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(record)?;
        text.push('\n');
        self.write(stem, "json", &text)
    }

    pub fn write(&self, stem: &str, ext: &str, content: &str) -> anyhow::Result<PathBuf> {
        let path = match &self.out {
            Some(p) => {
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir)?;
                }
                std::fs::write(p, content)?;
                return Ok(p.clone());
            }
            None => {
                std::fs::create_dir_all(&self.cfg.out_dir)?;
                let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ");
                self.cfg.out_dir.join(format!("{stem}-{stamp}"))
            }
        };
        write_new(&path, ext, content)
    }
}

/// Creates `<base>.<ext>`, or `<base>-2.<ext>`, … if it already exists.
fn write_new(base: &Path, ext: &str, content: &str) -> anyhow::Result<PathBuf> {
    for i in 1.. {
        let path = if i == 1 {
            PathBuf::from(format!("{}.{ext}", base.display()))
        } else {
            PathBuf::from(format!("{}-{i}.{ext}", base.display()))
        };
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                f.write_all(content.as_bytes())?;
                return Ok(path);
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e.into()),
        }
    }
    unreachable!()
}

/// `x` to 9 significant digits.
pub fn sig(x: f64) -> String {
    wehrl_core::report::format_sig(x, 9)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn never_overwrites() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("entropy-x");
        let a = write_new(&base, "json", "a").unwrap();
        let b = write_new(&base, "json", "b").unwrap();
        assert_ne!(a, b);
        assert_eq!(std::fs::read_to_string(a).unwrap(), "a");
        assert_eq!(std::fs::read_to_string(b).unwrap(), "b");
    }
}
