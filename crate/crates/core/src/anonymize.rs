//! Journalist anonymisation: a deterministic byline → `Author_XXX` bijection.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use thiserror::Error;

use crate::corpus::{Article, Corpus};
use crate::names::{clean_name, PersonKey};

/// Largest index expressible with three decimal digits.
pub const MAX_AUTHORS: usize = 999;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnonymizeError {
    /// Aliases are fixed at three digits; corpora with more bylines than that
    /// need to be split (for example with the per-outlet mode).
    #[error("{authors} distinct authors exceed the {MAX_AUTHORS}-alias space of Author_XXX")]
    AliasSpaceExhausted { authors: usize },
    #[error("a byline name already has the alias form Author_XXX; aliases would be ambiguous")]
    BylineLooksLikeAlias,
    #[error("byline {0:?} is empty after cleaning")]
    EmptyByline(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnonymizationMap {
    forward: BTreeMap<String, String>,
    reverse: BTreeMap<String, String>,
}

pub fn is_alias(s: &str) -> bool {
    s.len() == 10 && s.starts_with("Author_") && s[7..].bytes().all(|b| b.is_ascii_digit())
}

impl AnonymizationMap {
    /// Assigns aliases to an arbitrary set of byline strings.
    pub fn from_bylines<'a>(bylines: impl IntoIterator<Item = &'a str>) -> Result<Self, AnonymizeError> {
        let mut names = BTreeSet::new();
        for raw in bylines {
            let key = clean_name(raw).map_err(|_| AnonymizeError::EmptyByline(raw.to_string()))?;
            if is_alias(key.as_str()) {
                return Err(AnonymizeError::BylineLooksLikeAlias);
            }
            names.insert(key.into_string());
        }
        if names.len() > MAX_AUTHORS {
            return Err(AnonymizeError::AliasSpaceExhausted { authors: names.len() });
        }
        let mut forward = BTreeMap::new();
        let mut reverse = BTreeMap::new();
        for (idx, name) in names.into_iter().enumerate() {
            let alias = format!("Author_{:03}", idx + 1);
            reverse.insert(alias.clone(), name.clone());
            forward.insert(name, alias);
        }
        Ok(Self { forward, reverse })
    }

    /// Alias for a byline (raw or canonical).
    pub fn alias_of(&self, byline: &str) -> Option<&str> {
        if let Some(alias) = self.forward.get(byline) {
            return Some(alias);
        }
        let key = clean_name(byline).ok()?;
        self.forward.get(key.as_str()).map(String::as_str)
    }

    pub fn author_of(&self, alias: &str) -> Option<&str> {
        self.reverse.get(alias).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    /// Canonical byline names, i.e. the strings that must never reach a report.
    pub fn real_names(&self) -> impl Iterator<Item = &str> {
        self.forward.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.forward.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Writes the restricted `author,alias` CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        writer.write_record(["author", "alias"])?;
        for (author, alias) in self.iter() {
            writer.write_record([author, alias])?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Collects every distinct byline in the corpus, sorts by canonical form and
/// assigns `Author_001`, `Author_002`, ... in that order.
pub fn build_author_map(corpus: &Corpus) -> Result<AnonymizationMap, AnonymizeError> {
    build_author_map_for(corpus.articles())
}

pub fn build_author_map_for(articles: &[Article]) -> Result<AnonymizationMap, AnonymizeError> {
    AnonymizationMap::from_bylines(articles.iter().flat_map(|a| a.authors.iter().map(String::as_str)))
}

/// Renames keys that are byline names to their alias, merging counts on collision.
pub fn apply_anonymization(mentions: &BTreeMap<PersonKey, u64>, map: &AnonymizationMap) -> BTreeMap<PersonKey, u64> {
    let mut out = BTreeMap::new();
    for (name, &count) in mentions {
        let key = match map.forward.get(name.as_str()) {
            Some(alias) => PersonKey::from_canonical(alias.clone()),
            None => name.clone(),
        };
        *out.entry(key).or_insert(0) += count;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn key(s: &str) -> PersonKey {
        clean_name(s).unwrap()
    }

    #[test]
    fn sorted_assignment() {
        let map = AnonymizationMap::from_bylines(["B. Lee", "A. Kim", "By A. Kim"]).unwrap();
        assert_eq!(map.len(), 2);
        assert_eq!(map.alias_of("A. Kim"), Some("Author_001"));
        assert_eq!(map.alias_of("B. Lee"), Some("Author_002"));
        assert_eq!(map.alias_of("By B. Lee"), Some("Author_002"));
        assert_eq!(map.author_of("Author_001"), Some("A. Kim"));
    }

    #[test]
    fn empty_map() {
        let map = AnonymizationMap::from_bylines([]).unwrap();
        assert!(map.is_empty());
    }

    #[test]
    fn alias_space_limit() {
        let names: Vec<String> = (0..1000).map(|i| format!("Writer Number{i:04}")).collect();
        let err = AnonymizationMap::from_bylines(names.iter().map(String::as_str)).unwrap_err();
        assert_eq!(err, AnonymizeError::AliasSpaceExhausted { authors: 1000 });
        let ok = AnonymizationMap::from_bylines(names[..999].iter().map(String::as_str)).unwrap();
        assert_eq!(ok.author_of("Author_999"), Some("Writer Number0998"));
    }

    #[test]
    fn alias_shaped_bylines_rejected() {
        assert_eq!(
            AnonymizationMap::from_bylines(["Author_004"]).unwrap_err(),
            AnonymizeError::BylineLooksLikeAlias
        );
    }

    #[test]
    fn apply_examples() {
        let map = AnonymizationMap::from_bylines(["A. Kim"]).unwrap();
        let input: BTreeMap<_, _> = [(key("A. Kim"), 3), (key("Jane Doe"), 1)].into();
        let out = apply_anonymization(&input, &map);
        let expected: BTreeMap<_, _> = [(PersonKey::from_canonical("Author_001"), 3), (key("Jane Doe"), 1)].into();
        assert_eq!(out, expected);

        assert!(apply_anonymization(&BTreeMap::new(), &map).is_empty());

        let input: BTreeMap<_, _> = [(key("Jane Doe"), 2)].into();
        assert_eq!(apply_anonymization(&input, &map), input);
    }

    #[test]
    fn csv_output() {
        let map = AnonymizationMap::from_bylines(["B. Lee", "A. Kim"]).unwrap();
        let mut buf = Vec::new();
        map.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "author,alias\nA. Kim,Author_001\nB. Lee,Author_002\n"
        );
    }

    #[test]
    fn alias_predicate() {
        assert!(is_alias("Author_001"));
        assert!(!is_alias("Author_01"));
        assert!(!is_alias("Author_0001"));
        assert!(!is_alias("Author_0a1"));
    }

    proptest! {
        #[test]
        fn bijection_and_idempotence(
            authors in proptest::collection::btree_set("[A-Z][a-z]{1,5} [A-Z][a-z]{1,6}", 0..40),
            others in proptest::collection::btree_map("[A-Z][a-z]{1,5} [A-Z][a-z]{1,6}", 1u64..20, 0..20),
        ) {
            let map = AnonymizationMap::from_bylines(authors.iter().map(String::as_str)).unwrap();
            prop_assert_eq!(map.len(), authors.len());
            for (name, alias) in map.iter() {
                prop_assert!(is_alias(alias));
                prop_assert_eq!(map.author_of(alias), Some(name));
            }
            let mentions: BTreeMap<PersonKey, u64> = others
                .into_iter()
                .chain(authors.iter().take(3).map(|a| (a.clone(), 2)))
                .map(|(k, v)| (key(&k), v))
                .collect();
            let once = apply_anonymization(&mentions, &map);
            let twice = apply_anonymization(&once, &map);
            prop_assert_eq!(&once, &twice);
            prop_assert_eq!(once.values().sum::<u64>(), mentions.values().sum::<u64>());
            prop_assert!(once.keys().all(|k| map.alias_of(k.as_str()).is_none() || is_alias(k.as_str())));
        }
    }
}
