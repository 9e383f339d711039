//! Person-name canonicalisation and blacklist filtering.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

/// A cleaned person name. Construct through [`clean_name`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PersonKey(String);

impl PersonKey {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }

    /// Wraps a string that is already known to be canonical (aliases, test data).
    pub(crate) fn from_canonical(s: impl Into<String>) -> Self {
        Self(s.into())
    }
}

impl fmt::Display for PersonKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Borrow<str> for PersonKey {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl AsRef<str> for PersonKey {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("name {raw:?} is empty after cleaning")]
pub struct EmptyName {
    pub raw: String,
}

/// Canonicalises a raw person-name string.
///
/// NFC-composes, collapses whitespace runs, trims non-alphanumeric characters
/// at both ends and removes leading `By ` credit tokens (case-insensitive).
/// Letter case is otherwise preserved. Idempotent.
pub fn clean_name(raw: &str) -> Result<PersonKey, EmptyName> {
    let composed: String = raw.nfc().collect();
    let mut current = composed.split_whitespace().collect::<Vec<_>>().join(" ");
    loop {
        let trimmed = current.trim_matches(|c: char| !c.is_alphanumeric());
        let stripped = strip_credit_prefix(trimmed);
        if stripped.len() == current.len() {
            break;
        }
        current = stripped.to_string();
    }
    if current.is_empty() {
        return Err(EmptyName { raw: raw.to_string() });
    }
    Ok(PersonKey(current))
}

fn strip_credit_prefix(s: &str) -> &str {
    let mut chars = s.char_indices();
    match (chars.next(), chars.next(), chars.next()) {
        (Some((_, b)), Some((_, y)), Some((i, sp)))
            if b.eq_ignore_ascii_case(&'b') && y.eq_ignore_ascii_case(&'y') && sp == ' ' =>
        {
            &s[i + 1..]
        }
        _ => s,
    }
}

fn alphabetic_tokens(name: &str) -> usize {
    name.split_whitespace()
        .filter(|tok| tok.chars().any(char::is_alphabetic))
        .count()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Blacklist {
    #[serde(default)]
    pub deceased: BTreeSet<String>,
    #[serde(default)]
    pub public_figures: BTreeSet<String>,
    #[serde(default)]
    pub spurious: BTreeSet<String>,
}

#[derive(Debug, Error)]
pub enum BlacklistError {
    #[error("cannot read blacklist {path}: {source}")]
    Unreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("blacklist {path} is not valid JSON: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("blacklist entry {entry:?} in '{group}' is not in canonical form (expected {expected:?})")]
    NotCanonical {
        group: &'static str,
        entry: String,
        expected: String,
    },
}

impl Blacklist {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, BlacklistError> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|source| BlacklistError::Unreadable {
            path: path.to_path_buf(),
            source,
        })?;
        let list: Blacklist = serde_json::from_slice(&bytes).map_err(|source| BlacklistError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        list.validate()?;
        Ok(list)
    }

    /// Checks every entry is canonical. Spurious entries that clean to nothing
    /// (bare punctuation) are accepted since such names never survive cleaning.
    pub fn validate(&self) -> Result<(), BlacklistError> {
        let groups: [(&'static str, &BTreeSet<String>); 3] = [
            ("deceased", &self.deceased),
            ("public_figures", &self.public_figures),
            ("spurious", &self.spurious),
        ];
        for (group, entries) in groups {
            for entry in entries {
                match clean_name(entry) {
                    Ok(key) if key.as_str() == entry => {}
                    Err(_) if group == "spurious" => {}
                    Ok(key) => {
                        return Err(BlacklistError::NotCanonical {
                            group,
                            entry: entry.clone(),
                            expected: key.into_string(),
                        })
                    }
                    Err(_) => {
                        return Err(BlacklistError::NotCanonical {
                            group,
                            entry: entry.clone(),
                            expected: String::new(),
                        })
                    }
                }
            }
        }
        Ok(())
    }

    fn excludes(&self, name: &str) -> bool {
        self.deceased.contains(name) || self.public_figures.contains(name)
    }
}

/// True when `name` has fewer than two alphabetic tokens or is listed as spurious.
pub fn is_spurious(name: &PersonKey, blacklist: &Blacklist) -> bool {
    alphabetic_tokens(name.as_str()) < 2 || blacklist.spurious.contains(name.as_str())
}

/// Drops blacklisted and spurious names; surviving counts are untouched.
pub fn filter_mentions(mentions: &BTreeMap<PersonKey, u64>, blacklist: &Blacklist) -> BTreeMap<PersonKey, u64> {
    mentions
        .iter()
        .filter(|(name, _)| !blacklist.excludes(name.as_str()) && !is_spurious(name, blacklist))
        .map(|(name, &count)| (name.clone(), count))
        .collect()
}

/// Cleans every raw key of an article's mention map, summing counts of raw
/// variants that clean to the same person. Names that clean to nothing are dropped.
pub fn clean_mentions(raw: &BTreeMap<String, u64>) -> BTreeMap<PersonKey, u64> {
    let mut out = BTreeMap::new();
    for (name, &count) in raw {
        if let Ok(key) = clean_name(name) {
            *out.entry(key).or_insert(0) += count;
        }
    }
    out
}
