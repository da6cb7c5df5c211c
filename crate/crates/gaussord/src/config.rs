//! Run configuration files.
//!
//! Flat `key = value` lines grouped under `[section]` headers; `#` starts a
//! comment line. Keys before any header belong to the empty section.
//!
//! ```text
//! [dataset]
//! generator = blobs
//! n = 500
//!
//! [sampling]
//! p = 4
//! noise = 0.1
//!
//! [train]
//! dim = 2
//! seed = 7
//! ```
//!
//! Recognized sections and keys:
//!
//! * `dataset`: `generator` (blobs, moons, circles, linear, hierarchy) or
//!   `points` / `graph` (file paths), `n`, `noise`, `factor`, `classes`,
//!   `items_per_class`, `items_per_fine`, `fines_per_super`, `supers`, `seed`
//! * `sampling`: `p`, `noise`, `strategy` (uniform, graph-hop), `dim`,
//!   `budget`, `seed`
//! * `train`: `dim`, `clamp`, `lr`, `lr_decay`, `batch_size`, `max_epochs`,
//!   `patience`, `margin`, `input_dim`, `hidden_dim`, `dirac`, `seed`
//! * `plot`: `radius`, `canvas`
//! * `output`: `dir`
//!
//! Command-line flags override file values.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<(String, String), String>,
}

impl ConfigFile {
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        let mut section = String::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::parse(source, n + 1, "unterminated section header"))?;
                section = name.trim().to_owned();
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(source, n + 1, "expected key = value"))?;
            let v = v.trim().trim_matches('"');
            values.insert((section.clone(), k.trim().to_owned()), v.to_owned());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.values.get(&(section.to_owned(), key.to_owned())).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>> {
        self.raw(section, key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Usage(format!("config [{section}] {key}: cannot parse {v:?}")))
            })
            .transpose()
    }

    /// `flag`, else the file value, else `default`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, section: &str, key: &str, default: T) -> Result<T> {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.get(section, key)?.unwrap_or(default)),
        }
    }

    pub fn pick_opt<T: FromStr>(&self, flag: Option<T>, section: &str, key: &str) -> Result<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(section, key),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_overrides() {
        let cfg = ConfigFile::parse("top = 1\n# c\n[train]\nseed = 7\nlr=0.5\n[plot]\nradius = \"3\"\n", "c").unwrap();
        assert_eq!(cfg.raw("", "top"), Some("1"));
        assert_eq!(cfg.get::<u64>("train", "seed").unwrap(), Some(7));
        assert_eq!(cfg.pick(Some(9u64), "train", "seed", 0).unwrap(), 9);
        assert_eq!(cfg.pick(None::<f64>, "train", "lr", 0.01).unwrap(), 0.5);
        assert_eq!(cfg.pick(None::<f64>, "train", "margin", 1.0).unwrap(), 1.0);
        assert_eq!(cfg.get::<f64>("plot", "radius").unwrap(), Some(3.0));
        assert!(cfg.get::<u64>("train", "lr").is_err());
    }

    #[test]
    fn malformed_lines() {
        assert!(ConfigFile::parse("[train\n", "c").is_err());
        assert!(ConfigFile::parse("novalue\n", "c").unwrap_err().to_string().contains("c:1"));
    }
}
