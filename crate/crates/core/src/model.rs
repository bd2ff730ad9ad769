//! Domain types: practice identifiers, categories, objectives, practices and
//! typed relations.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Identifier of an agile practice, `AP01` through `AP99`.
///
/// Ordering is numeric, which coincides with the lexicographic order of the
/// canonical two-digit rendering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PracticeId(u8);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid practice id `{0}`: expected AP followed by two digits (AP01..AP99)")]
pub struct InvalidPracticeId(pub String);

impl PracticeId {
    pub fn new(number: u8) -> Option<Self> {
        (1..=99).contains(&number).then_some(Self(number))
    }

    pub fn number(self) -> u8 {
        self.0
    }
}

impl FromStr for PracticeId {
    type Err = InvalidPracticeId;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bytes = s.as_bytes();
        let ok_shape = bytes.len() == 4
            && bytes[..2].eq_ignore_ascii_case(b"AP")
            && bytes[2].is_ascii_digit()
            && bytes[3].is_ascii_digit();
        if !ok_shape {
            return Err(InvalidPracticeId(s.to_string()));
        }
        let number = (bytes[2] - b'0') * 10 + (bytes[3] - b'0');
        Self::new(number).ok_or_else(|| InvalidPracticeId(s.to_string()))
    }
}

impl fmt::Display for PracticeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AP{:02}", self.0)
    }
}

impl Serialize for PracticeId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PracticeId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! closed_enum {
    (
        $(#[$meta:meta])*
        $name:ident, $err:literal { $($variant:ident => $text:literal),+ $(,)? }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $text)] $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = String;

            /// Case-insensitive.
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                Self::ALL
                    .iter()
                    .copied()
                    .find(|v| v.as_str().eq_ignore_ascii_case(s))
                    .ok_or_else(|| format!(concat!("unknown ", $err, " `{}`"), s))
            }
        }
    };
}

closed_enum! {
    /// The five practice categories of the integrated list.
    Category, "category" {
        Technical => "Technical",
        Collaboration => "Collaboration",
        Process => "Process",
        Requirements => "Requirements",
        Organizational => "Organizational",
    }
}

closed_enum! {
    /// Core objectives a practice can serve: service provision, process
    /// optimization, knowledge and experience exchange.
    ObjectiveTag, "objective" {
        ServiceProvision => "sp",
        ProcessOptimization => "po",
        KnowledgeExchange => "ke",
    }
}

closed_enum! {
    /// Relation types. Declaration order is the canonical sort order of
    /// relations.
    RelationType, "relation type" {
        Specialization => "specialization",
        Support => "support",
        Requires => "requires",
        Alternative => "alternative",
    }
}

/// How a relation type constrains the `bidirectional` flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Directionality {
    AlwaysOneWay,
    AlwaysTwoWay,
    Either,
}

impl RelationType {
    pub fn directionality(self) -> Directionality {
        match self {
            RelationType::Specialization | RelationType::Requires => Directionality::AlwaysOneWay,
            RelationType::Alternative => Directionality::AlwaysTwoWay,
            RelationType::Support => Directionality::Either,
        }
    }

    /// Whether a relation of this type may carry the given flag.
    pub fn permits(self, bidirectional: bool) -> bool {
        match self.directionality() {
            Directionality::AlwaysOneWay => !bidirectional,
            Directionality::AlwaysTwoWay => bidirectional,
            Directionality::Either => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AgilePractice {
    pub id: PracticeId,
    pub name: String,
    pub category: Category,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub sources: Vec<String>,
    #[serde(default)]
    pub excluded: bool,
    #[serde(default)]
    pub exclusion_reason: Option<String>,
    #[serde(default)]
    pub non_specific: bool,
    #[serde(default)]
    pub objectives: Vec<ObjectiveTag>,
}

impl AgilePractice {
    pub fn new(id: PracticeId, name: impl Into<String>, category: Category) -> Self {
        Self {
            id,
            name: name.into(),
            category,
            description: String::new(),
            sources: Vec::new(),
            excluded: false,
            exclusion_reason: None,
            non_specific: false,
            objectives: Vec::new(),
        }
    }

    pub fn excluded_because(mut self, reason: impl Into<String>) -> Self {
        self.excluded = true;
        self.exclusion_reason = Some(reason.into());
        self
    }

    pub fn with_objectives(mut self, tags: impl IntoIterator<Item = ObjectiveTag>) -> Self {
        self.objectives = tags.into_iter().collect();
        self.objectives.sort();
        self.objectives.dedup();
        self
    }

    pub fn has_objective(&self, tag: ObjectiveTag) -> bool {
        self.objectives.contains(&tag)
    }
}

/// A typed edge between two practices. A bidirectional relation is
/// semantically unordered; in a built map its endpoints are stored smaller
/// id first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Relation {
    pub source: PracticeId,
    pub target: PracticeId,
    #[serde(rename = "type")]
    pub kind: RelationType,
    pub bidirectional: bool,
}

impl Relation {
    pub fn new(source: PracticeId, target: PracticeId, kind: RelationType, bidirectional: bool) -> Self {
        Self { source, target, kind, bidirectional }
    }

    pub fn requires(source: PracticeId, target: PracticeId) -> Self {
        Self::new(source, target, RelationType::Requires, false)
    }

    pub fn supports(source: PracticeId, target: PracticeId) -> Self {
        Self::new(source, target, RelationType::Support, false)
    }

    pub fn mutual_support(a: PracticeId, b: PracticeId) -> Self {
        Self::new(a, b, RelationType::Support, true).canonical()
    }

    pub fn specializes(source: PracticeId, target: PracticeId) -> Self {
        Self::new(source, target, RelationType::Specialization, false)
    }

    pub fn alternative(a: PracticeId, b: PracticeId) -> Self {
        Self::new(a, b, RelationType::Alternative, true).canonical()
    }

    /// Bidirectional relations get their endpoints ordered; one-way
    /// relations are returned unchanged.
    pub fn canonical(self) -> Self {
        if self.bidirectional && self.source > self.target {
            Self { source: self.target, target: self.source, ..self }
        } else {
            self
        }
    }

    /// Sort key: type, then source, then target.
    pub fn sort_key(&self) -> (RelationType, PracticeId, PracticeId) {
        (self.kind, self.source, self.target)
    }

    pub fn touches(&self, id: PracticeId) -> bool {
        self.source == id || self.target == id
    }

    /// The endpoint opposite `id`, if `id` is an endpoint.
    pub fn other(&self, id: PracticeId) -> Option<PracticeId> {
        if self.source == id {
            Some(self.target)
        } else if self.target == id {
            Some(self.source)
        } else {
            None
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arrow = if self.bidirectional { "<->" } else { "->" };
        write!(f, "{} {} {} ({})", self.source, arrow, self.target, self.kind)
    }
}

/// Convenience for tests and literals; panics on malformed input.
pub fn pid(s: &str) -> PracticeId {
    s.parse().unwrap_or_else(|e| panic!("{e}"))
}
