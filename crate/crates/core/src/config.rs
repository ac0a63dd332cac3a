//! Plain-text `key = value` configuration.
//!
//! Grammar: one `key = value` pair per line; blank lines and lines whose
//! first non-blank character is `#` are ignored; a `#` after a value starts
//! a trailing comment. Keys are `[A-Za-z0-9_.-]+`; values are trimmed and
//! may be empty. Later occurrences of a key override earlier ones.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeyValues {
    entries: Vec<(String, String)>,
}

fn valid_key(k: &str) -> bool {
    !k.is_empty()
        && k
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
}

impl KeyValues {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = KeyValues::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(idx + 1, format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim();
            if !valid_key(key) {
                return Err(Error::parse(idx + 1, format!("invalid key `{key}`")));
            }
            kv.set(key, value.trim());
        }
        Ok(kv)
    }

    /// Inserts or overrides `key`, keeping the position of the first
    /// occurrence.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        let value = value.into();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Parsed value of `key`; `Ok(None)` when absent or empty.
    pub fn get_parsed<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None | Some("") => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| Error::domain(format!("{key} = {v}: {e}"))),
        }
    }

    pub fn require<T>(&self, key: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        self.get_parsed(key)?
            .ok_or_else(|| Error::domain(format!("missing required key `{key}`")))
    }

    /// Rejects any key not in `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for (k, _) in &self.entries {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::domain(format!("unknown key `{k}`")));
            }
        }
        Ok(())
    }

    /// Overlays `other` on top of `self`.
    pub fn merge(&mut self, other: &KeyValues) {
        for (k, v) in &other.entries {
            self.set(k, v.clone());
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl fmt::Display for KeyValues {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_overrides() {
        let kv = KeyValues::parse("# header\nM = 50\n\nw=200 # window\nM = 70\nseed =\n").unwrap();
        assert_eq!(kv.get("M"), Some("70"));
        assert_eq!(kv.get("w"), Some("200"));
        assert_eq!(kv.get_parsed::<u64>("seed").unwrap(), None);
        assert_eq!(kv.require::<usize>("w").unwrap(), 200);
        assert!(kv.require::<usize>("N").is_err());
        assert_eq!(kv.iter().next(), Some(("M", "70")));
    }

    #[test]
    fn round_trips_through_display() {
        let mut kv = KeyValues::new();
        kv.set("b", "51.04");
        kv.set("kind", "gaussian");
        let back = KeyValues::parse(&kv.to_string()).unwrap();
        assert_eq!(back, kv);
    }

    #[test]
    fn reports_line_numbers() {
        match KeyValues::parse("a = 1\nnot a pair\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(KeyValues::parse("bad key = 1").is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let kv = KeyValues::parse("M = 1\nbogus = 2").unwrap();
        assert!(kv.check_keys(&["M", "bogus"]).is_ok());
        assert!(kv.check_keys(&["M"]).is_err());
        assert!(kv.get_parsed::<f64>("bogus").unwrap() == Some(2.0));
    }
}
