//! Line-oriented learner snapshot files.
//!
//! Every snapshot starts with [`SNAPSHOT_HEADER`] and a `kind` line, then one
//! `key value...` line per field in a fixed order. Floats are written in
//! shortest round-trip form, so a restore is bit-exact.

use std::path::Path;

use crate::error::{Error, Result};

pub const SNAPSHOT_HEADER: &str = "cwim-learner v1";

pub(crate) struct Reader {
    lines: std::vec::IntoIter<String>,
}

impl Reader {
    pub fn open(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines: Vec<String> = text.lines().map(str::to_owned).collect::<Vec<_>>();
        if lines.first().map(String::as_str) != Some(SNAPSHOT_HEADER) {
            return Err(Error::Format(format!(
                "{}: not a learner snapshot",
                path.display()
            )));
        }
        lines.remove(0);
        Ok(Reader {
            lines: lines.into_iter(),
        })
    }

    /// Peeks at the `kind` line without consuming anything else.
    pub fn kind(path: &Path) -> Result<String> {
        let mut r = Reader::open(path)?;
        r.word("kind")
    }

    fn field(&mut self, key: &str) -> Result<Vec<String>> {
        let line = self
            .lines
            .next()
            .ok_or_else(|| Error::Format(format!("snapshot ends before `{key}`")))?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some(key) {
            return Err(Error::Format(format!("expected `{key}`, got {line:?}")));
        }
        Ok(parts.map(str::to_owned).collect())
    }

    pub fn expect_kind(&mut self, kind: &str) -> Result<()> {
        let got = self.word("kind")?;
        if got != kind {
            return Err(Error::Format(format!(
                "snapshot kind {got:?}, expected {kind:?}"
            )));
        }
        Ok(())
    }

    pub fn word(&mut self, key: &str) -> Result<String> {
        let mut parts = self.field(key)?;
        if parts.len() != 1 {
            return Err(Error::Format(format!("`{key}` takes one value")));
        }
        Ok(parts.remove(0))
    }

    pub fn float(&mut self, key: &str) -> Result<f64> {
        let w = self.word(key)?;
        w.parse()
            .map_err(|_| Error::Format(format!("bad `{key}` value {w:?}")))
    }

    pub fn usize(&mut self, key: &str) -> Result<usize> {
        let w = self.word(key)?;
        w.parse()
            .map_err(|_| Error::Format(format!("bad `{key}` value {w:?}")))
    }

    pub fn floats(&mut self, key: &str, len: usize) -> Result<Vec<f64>> {
        let parts = self.field(key)?;
        if parts.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                actual: parts.len(),
            });
        }
        parts
            .iter()
            .map(|s| {
                s.parse()
                    .map_err(|_| Error::Format(format!("bad `{key}` entry {s:?}")))
            })
            .collect()
    }
}
