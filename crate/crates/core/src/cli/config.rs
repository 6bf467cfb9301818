//! `key = value` configuration files. Keys are the long flag names.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

const KNOWN_KEYS: [&str; 19] = [
    "rho",
    "sr",
    "s",
    "cg-tol",
    "cg-max-iter",
    "dense-threshold",
    "max-outer",
    "f-tol-factor",
    "p-tol",
    "warm-start",
    "rho-growth",
    "seed",
    "test-fraction",
    "n-features",
    "label-map",
    "jobs",
    "dcd-c",
    "dcd-eps",
    "dcd-max-epochs",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let bad = |message: String| Error::Parse {
                line: lineno + 1,
                message,
            };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key = value, got `{content}`")))?;
            let key = key.trim().replace('_', "-");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(bad(format!("unknown key `{key}`")));
            }
            if values.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(bad(format!("key `{key}` given twice")));
            }
        }
        Ok(Self { values })
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.values
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::invalid(format!("config value `{v}` for `{key}` is invalid")))
            })
            .transpose()
    }

    /// Flag value if given, else the config file value, else the default.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.get(key)?.unwrap_or(default)),
        }
    }

    /// Like [`pick`](Self::pick) for settings without a default.
    pub fn pick_opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }
}
