//! Channel names and the deterministic fresh-name supply.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Reserved name standing for an absent datum or binder (`x!` / `x?()`).
pub const UNIT: &str = "_unit";

/// A channel name. Equality is exact token equality.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: impl AsRef<str>) -> Self {
        Name(Arc::from(s.as_ref()))
    }

    pub fn unit() -> Self {
        Name::new(UNIT)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_unit(&self) -> bool {
        &*self.0 == UNIT
    }

    /// True if `s` is a legal name token: non-empty over `[A-Za-z0-9_']`.
    ///
    /// Tokens made only of digits are accepted so numerals can be used as names.
    pub fn is_valid_token(s: &str) -> bool {
        !s.is_empty()
            && s
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
    }

    /// The name with any `'k` fresh-name suffix removed.
    pub fn base(&self) -> &str {
        let s = self.as_str();
        if let Some(pos) = s.rfind('\'') {
            let tail = &s[pos + 1..];
            if !tail.is_empty() && tail.chars().all(|c| c.is_ascii_digit()) && pos > 0 {
                return &s[..pos];
            }
        }
        s
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

impl Serialize for Name {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Name {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(Name::new(s))
    }
}

/// Emits names of the form `base'k` that avoid a given set and each other.
#[derive(Debug, Clone, Default)]
pub struct FreshSupply {
    avoid: BTreeSet<Name>,
    counter: u64,
}

impl FreshSupply {
    pub fn new(avoid: BTreeSet<Name>) -> Self {
        FreshSupply { avoid, counter: 0 }
    }

    pub fn avoid(&mut self, name: Name) {
        self.avoid.insert(name);
    }

    pub fn avoid_all<I: IntoIterator<Item = Name>>(&mut self, names: I) {
        self.avoid.extend(names);
    }

    pub fn is_avoided(&self, name: &Name) -> bool {
        self.avoid.contains(name)
    }

    /// A fresh variant of `like`, recorded so it is never emitted again.
    pub fn fresh(&mut self, like: &Name) -> Name {
        let base = like.base().to_string();
        let mut k = 1u64;
        loop {
            let candidate = Name::new(format!("{base}'{k}"));
            if !self.avoid.contains(&candidate) {
                self.avoid.insert(candidate.clone());
                self.counter += 1;
                return candidate;
            }
            k += 1;
        }
    }

    /// Number of names emitted so far.
    pub fn emitted(&self) -> u64 {
        self.counter
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_names_skip_avoided_and_previous() {
        let mut s = FreshSupply::new([Name::new("x'1")].into_iter().collect());
        assert_eq!(s.fresh(&Name::new("x")), Name::new("x'2"));
        assert_eq!(s.fresh(&Name::new("x'2")), Name::new("x'3"));
        assert_eq!(s.emitted(), 2);
    }

    #[test]
    fn base_strips_counter_only() {
        assert_eq!(Name::new("x'12").base(), "x");
        assert_eq!(Name::new("x'").base(), "x'");
        assert_eq!(Name::new("1").base(), "1");
    }

    #[test]
    fn tokens() {
        assert!(Name::is_valid_token("out"));
        assert!(Name::is_valid_token("x'"));
        assert!(Name::is_valid_token("1"));
        assert!(!Name::is_valid_token(""));
        assert!(!Name::is_valid_token("a-b"));
    }
}
