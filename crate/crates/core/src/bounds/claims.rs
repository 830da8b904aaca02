//! The claim database: exact values, upper bounds and arrows.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::solver::LeafProfile;

/// Bundled claims database.
pub const BUNDLED_CLAIMS: &str = include_str!("../../data/claims.json");

/// Either an explicit list of set sizes or `k` sets of size `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Subject {
    Sizes(Vec<u32>),
    Power { n: u32, k: u32 },
}

impl Subject {
    /// Size to multiplicity.
    pub fn multiset(&self) -> Multiset {
        let mut m = BTreeMap::new();
        match self {
            Subject::Sizes(v) => {
                for &n in v {
                    *m.entry(n).or_insert(0) += 1;
                }
            }
            Subject::Power { n, k } => {
                m.insert(*n, *k);
            }
        }
        Multiset(m)
    }

    /// `(n, k)` when all sets share one size.
    pub fn as_power(&self) -> Option<(u32, u32)> {
        let m = self.multiset();
        match m.0.len() {
            1 => m.0.into_iter().next(),
            _ => None,
        }
    }
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Power { n, k } => write!(f, "({n}|{k})"),
            Subject::Sizes(v) => {
                let parts: Vec<String> = v.iter().map(|n| n.to_string()).collect();
                write!(f, "({})", parts.join(","))
            }
        }
    }
}

/// Set sizes with multiplicities; the shape subproblems are keyed by.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Multiset(pub BTreeMap<u32, u32>);

impl Multiset {
    pub fn sizes(&self) -> Vec<u32> {
        self.0
            .iter()
            .flat_map(|(&n, &c)| std::iter::repeat_n(n, c as usize))
            .collect()
    }

    pub fn total(&self) -> u32 {
        self.0.values().sum()
    }
}

impl fmt::Display for Multiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            let (n, k) = self.0.iter().next().unwrap();
            if *k > 1 {
                return write!(f, "({n}|{k})");
            }
        }
        let parts: Vec<String> = self.sizes().iter().map(|n| n.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactKind {
    Exact,
    Upper,
    Arrow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    PaperClaimed,
    Verified,
    Derived,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fact {
    pub tag: String,
    pub subject: Subject,
    pub kind: FactKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<u32>,
    /// leaf profiles of an arrow, `one-rep:4@3` style
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub profiles: Vec<String>,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<String>,
}

impl Fact {
    pub fn leaf_profiles(&self) -> Result<Vec<LeafProfile>, ClaimsError> {
        self.profiles
            .iter()
            .map(|p| {
                p.parse().map_err(|_| ClaimsError::Profile {
                    tag: self.tag.clone(),
                    profile: p.clone(),
                })
            })
            .collect()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ClaimsError {
    #[error("claims file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{tag}: bad leaf profile `{profile}`")]
    Profile { tag: String, profile: String },
    #[error("{tag}: {message}")]
    Invalid { tag: String, message: String },
}

pub fn parse_claims(text: &str) -> Result<Vec<Fact>, ClaimsError> {
    let facts: Vec<Fact> = serde_json::from_str(text)?;
    for f in &facts {
        let invalid = |message: &str| ClaimsError::Invalid {
            tag: f.tag.clone(),
            message: message.to_string(),
        };
        let m = f.subject.multiset();
        if m.total() == 0 || m.0.contains_key(&0) {
            return Err(invalid("subject needs at least one set, all nonempty"));
        }
        match f.kind {
            FactKind::Exact | FactKind::Upper if f.value.is_none() => {
                return Err(invalid("value missing"))
            }
            FactKind::Arrow if f.profiles.is_empty() => {
                return Err(invalid("arrow without profiles"))
            }
            FactKind::Arrow => {
                f.leaf_profiles()?;
            }
            _ => {}
        }
    }
    Ok(facts)
}

pub fn bundled_claims() -> Vec<Fact> {
    parse_claims(BUNDLED_CLAIMS).expect("bundled claims are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_fixture_loads() {
        let facts = bundled_claims();
        let exact = facts.iter().filter(|f| f.kind == FactKind::Exact).count();
        let arrows = facts.iter().filter(|f| f.kind == FactKind::Arrow).count();
        assert_eq!(exact, 43);
        assert_eq!(arrows, 17);
        let triple = facts.iter().find(|f| f.tag == "eq14").unwrap();
        assert_eq!(triple.subject, Subject::Sizes(vec![4, 4, 5]));
        assert_eq!(triple.value, Some(4));
    }

    #[test]
    fn subject_forms() {
        let s: Subject = serde_json::from_str(r#"{"n":4,"k":7}"#).unwrap();
        assert_eq!(s.as_power(), Some((4, 7)));
        assert_eq!(s.to_string(), "(4|7)");
        let t: Subject = serde_json::from_str("[8,8,8,4]").unwrap();
        assert_eq!(t.multiset().sizes(), vec![4, 8, 8, 8]);
        assert_eq!(t.as_power(), None);
    }

    #[test]
    fn rejects_bad_records() {
        assert!(parse_claims(
            r#"[{"tag":"x","subject":[2],"kind":"exact","status":"PaperClaimed"}]"#
        )
        .is_err());
        assert!(parse_claims(
            r#"[{"tag":"x","subject":[2],"kind":"arrow","profiles":["one-rep"],"status":"PaperClaimed"}]"#
        )
        .is_err());
        assert!(parse_claims("[").is_err());
    }
}
