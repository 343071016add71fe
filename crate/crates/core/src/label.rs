//! Transition labels.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::name::Name;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Tau,
    BoundOutput { subject: Name, object: Name },
    FreeOutput { subject: Name, object: Name },
    FreeInput { subject: Name, object: Name },
}

impl Label {
    pub fn subject(&self) -> Option<&Name> {
        match self {
            Label::Tau => None,
            Label::BoundOutput { subject, .. }
            | Label::FreeOutput { subject, .. }
            | Label::FreeInput { subject, .. } => Some(subject),
        }
    }

    pub fn object(&self) -> Option<&Name> {
        match self {
            Label::Tau => None,
            Label::BoundOutput { object, .. }
            | Label::FreeOutput { object, .. }
            | Label::FreeInput { object, .. } => Some(object),
        }
    }

    pub fn is_tau(&self) -> bool {
        matches!(self, Label::Tau)
    }

    pub fn is_output(&self) -> bool {
        matches!(self, Label::BoundOutput { .. } | Label::FreeOutput { .. })
    }

    pub fn is_input(&self) -> bool {
        matches!(self, Label::FreeInput { .. })
    }

    pub fn is_bound_output(&self) -> bool {
        matches!(self, Label::BoundOutput { .. })
    }

    /// Bound names of the label: the object of a bound output.
    pub fn bound_names(&self) -> BTreeSet<Name> {
        match self {
            Label::BoundOutput { object, .. } => [object.clone()].into_iter().collect(),
            _ => BTreeSet::new(),
        }
    }

    pub fn names(&self) -> BTreeSet<Name> {
        self.subject().into_iter().chain(self.object()).cloned().collect()
    }

    /// The free-output variant of a bound output; other labels unchanged.
    pub fn unbound(&self) -> Label {
        match self {
            Label::BoundOutput { subject, object } => Label::FreeOutput {
                subject: subject.clone(),
                object: object.clone(),
            },
            other => other.clone(),
        }
    }

    /// Ordering rank used by deterministic transition choice.
    pub fn kind_rank(&self) -> u8 {
        match self {
            Label::Tau => 0,
            Label::BoundOutput { .. } => 1,
            Label::FreeOutput { .. } => 2,
            Label::FreeInput { .. } => 3,
        }
    }

    pub fn rename(&self, f: impl Fn(&Name) -> Name) -> Label {
        match self {
            Label::Tau => Label::Tau,
            Label::BoundOutput { subject, object } => Label::BoundOutput {
                subject: f(subject),
                object: f(object),
            },
            Label::FreeOutput { subject, object } => Label::FreeOutput {
                subject: f(subject),
                object: f(object),
            },
            Label::FreeInput { subject, object } => Label::FreeInput {
                subject: f(subject),
                object: f(object),
            },
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Tau => f.write_str("tau"),
            Label::BoundOutput { subject, object } => write!(f, "{subject}!({object})"),
            Label::FreeOutput { subject, object } if object.is_unit() => write!(f, "{subject}!"),
            Label::FreeOutput { subject, object } => write!(f, "{subject}!{object}"),
            Label::FreeInput { subject, object } if object.is_unit() => write!(f, "{subject}?"),
            Label::FreeInput { subject, object } => write!(f, "{subject}?{object}"),
        }
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "tau" {
            return Ok(Label::Tau);
        }
        let check = |n: &str| -> Result<Name, String> {
            if Name::is_valid_token(n) {
                Ok(Name::new(n))
            } else {
                Err(format!("bad name `{n}` in label `{s}`"))
            }
        };
        if let Some((subj, obj)) = s.split_once('!') {
            let subject = check(subj)?;
            if obj.is_empty() {
                return Ok(Label::FreeOutput { subject, object: Name::unit() });
            }
            if let Some(inner) = obj.strip_prefix('(').and_then(|o| o.strip_suffix(')')) {
                return Ok(Label::BoundOutput { subject, object: check(inner)? });
            }
            return Ok(Label::FreeOutput { subject, object: check(obj)? });
        }
        if let Some((subj, obj)) = s.split_once('?') {
            let subject = check(subj)?;
            let object = if obj.is_empty() { Name::unit() } else { check(obj)? };
            return Ok(Label::FreeInput { subject, object });
        }
        Err(format!("unrecognised label `{s}`"))
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_parse_agree() {
        for text in ["tau", "a!b", "a!(x)", "a!", "a?w", "a?"] {
            let l: Label = text.parse().unwrap();
            assert_eq!(l.to_string(), text);
        }
    }

    #[test]
    fn bound_names_only_for_bound_output() {
        let l: Label = "a!(x)".parse().unwrap();
        assert_eq!(l.bound_names().len(), 1);
        let l: Label = "a!x".parse().unwrap();
        assert!(l.bound_names().is_empty());
    }
}
