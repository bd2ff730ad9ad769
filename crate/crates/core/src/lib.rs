//! Engine for the Agile Map: a typed relation graph over agile practices.
//!
//! * [`model`]: practice ids, categories, objectives, typed relations.
//! * [`map`]: the validated [`AgileMap`] and its construction checks.
//! * [`io`]: the `.agilemap` text format, DOT and JSON exports.
//! * [`analysis`]: requires-closure, selection validation, alternatives,
//!   objective filtering, composition planning, statistics.
//! * [`graph`]: the requires digraph the analyses run on.

pub mod analysis;
pub mod graph;
pub mod io;
pub mod map;
pub mod model;
pub mod seed;
#[cfg(feature = "testkit")]
pub mod testkit;

pub use analysis::{
    adaption_class, alternatives_for, compose_plan, map_stats, requires_closure, select_by_objectives,
    substitute, validate_selection, AdaptionClass, AlternativeHint, AnalysisError, CompositionPlan, MapStats,
    PublishedTotals, Selection, SelectionReport, SupportSuggestion, PUBLISHED_TOTALS,
};
pub use graph::RequiresGraph;
pub use map::{merge_opposite_pairs, AgileMap, MapMetadata, NotFound, Violation, ViolationKind};
pub use model::{AgilePractice, Category, ObjectiveTag, PracticeId, Relation, RelationType};
