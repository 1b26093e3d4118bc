use std::fmt;
use std::str::FromStr;

use semver::{Version, VersionReq};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Package version constraint: an exact version, a caret range, or `latest`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum VersionConstraint {
    /// Verbatim exact version (`18.3.1`, or a runtime label such as `20`).
    Exact(String),
    Caret(Version),
    Latest,
}

impl VersionConstraint {
    /// Intersection of two constraints, keeping the tighter one.
    /// `None` when no version satisfies both.
    pub fn intersect(&self, other: &VersionConstraint) -> Option<VersionConstraint> {
        use VersionConstraint::*;
        match (self, other) {
            (Latest, c) | (c, Latest) => Some(c.clone()),
            (Exact(a), Exact(b)) => (a == b).then(|| self.clone()),
            (Exact(a), Caret(v)) | (Caret(v), Exact(a)) => {
                let exact = Version::parse(a).ok()?;
                caret_req(v).matches(&exact).then(|| Exact(a.clone()))
            }
            (Caret(a), Caret(b)) => {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                caret_req(lo).matches(hi).then(|| Caret(hi.clone()))
            }
        }
    }

    /// Range form without caret syntax, e.g. `>=1.9.4 <2.0.0`.
    pub fn explicit_range(&self) -> String {
        match self {
            VersionConstraint::Exact(v) => v.clone(),
            VersionConstraint::Latest => "latest".into(),
            VersionConstraint::Caret(v) => {
                let upper = if v.major > 0 {
                    Version::new(v.major + 1, 0, 0)
                } else if v.minor > 0 {
                    Version::new(0, v.minor + 1, 0)
                } else {
                    Version::new(0, 0, v.patch + 1)
                };
                format!(">={v} <{upper}")
            }
        }
    }
}

fn caret_req(v: &Version) -> VersionReq {
    VersionReq::parse(&format!("^{v}")).expect("caret of a valid version parses")
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid version constraint `{0}`")]
pub struct ConstraintParseError(pub String);

impl FromStr for VersionConstraint {
    type Err = ConstraintParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("latest") {
            return Ok(VersionConstraint::Latest);
        }
        if let Some(rest) = s.strip_prefix('^') {
            return Version::parse(rest.trim())
                .map(VersionConstraint::Caret)
                .map_err(|_| ConstraintParseError(s.to_string()));
        }
        let valid = !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '+'));
        if valid {
            Ok(VersionConstraint::Exact(s.to_string()))
        } else {
            Err(ConstraintParseError(s.to_string()))
        }
    }
}

impl fmt::Display for VersionConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VersionConstraint::Exact(v) => f.write_str(v),
            VersionConstraint::Caret(v) => write!(f, "^{v}"),
            VersionConstraint::Latest => f.write_str("latest"),
        }
    }
}

impl Serialize for VersionConstraint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for VersionConstraint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
