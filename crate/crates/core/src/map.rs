//! The validated, immutable agile map and the checks that guard its
//! construction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::RequiresGraph;
use crate::model::{AgilePractice, PracticeId, Relation, RelationType};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapMetadata {
    pub name: String,
    pub version: String,
    /// Free-text provenance and caveats carried with the dataset.
    #[serde(default)]
    pub notes: Vec<String>,
    /// The map claims to be the complete published map, so its totals can be
    /// audited against the published counts.
    #[serde(default)]
    pub full: bool,
}

impl MapMetadata {
    pub fn new(name: impl Into<String>, version: impl Into<String>) -> Self {
        Self { name: name.into(), version: version.into(), ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    SelfLoop,
    UnknownEndpoint,
    DuplicateRelation,
    DirectionalityIllegal,
    MergeIllegal,
    DuplicatePracticeId,
    DuplicatePracticeName,
    EmptyPracticeName,
    MissingExclusionReason,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationKind::SelfLoop => "self-loop",
            ViolationKind::UnknownEndpoint => "unknown-endpoint",
            ViolationKind::DuplicateRelation => "duplicate-relation",
            ViolationKind::DirectionalityIllegal => "directionality-illegal",
            ViolationKind::MergeIllegal => "merge-illegal",
            ViolationKind::DuplicatePracticeId => "duplicate-practice-id",
            ViolationKind::DuplicatePracticeName => "duplicate-practice-name",
            ViolationKind::EmptyPracticeName => "empty-practice-name",
            ViolationKind::MissingExclusionReason => "missing-exclusion-reason",
        }
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A meta-model violation. `practices` and `relations` hold indices into the
/// input lists handed to [`AgileMap::build`] (or [`merge_opposite_pairs`]), so
/// callers can map them back to source positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: String,
    pub practices: Vec<usize>,
    pub relations: Vec<usize>,
}

impl Violation {
    fn on_practices(kind: ViolationKind, practices: Vec<usize>, message: String) -> Self {
        Self { kind, message, practices, relations: Vec::new() }
    }

    fn on_relations(kind: ViolationKind, relations: Vec<usize>, message: String) -> Self {
        Self { kind, message, practices: Vec::new(), relations }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no practice matches `{query}`")]
pub struct NotFound {
    pub query: String,
    /// Practices whose names are within edit distance 2 of the query.
    pub suggestions: Vec<(PracticeId, String)>,
}

/// A validated agile map. Construct with [`AgileMap::build`]; once built the
/// map is immutable and every meta-model invariant holds.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AgileMap {
    metadata: MapMetadata,
    practices: BTreeMap<PracticeId, AgilePractice>,
    relations: Vec<Relation>,
}

impl AgileMap {
    /// Validates raw practices and relations, applies the merge rule and
    /// canonicalizes. On failure every violation found is returned.
    pub fn build(
        practices: Vec<AgilePractice>,
        relations: Vec<Relation>,
        metadata: MapMetadata,
    ) -> Result<AgileMap, Vec<Violation>> {
        let mut violations = check_practices(&practices);

        let known: BTreeSet<PracticeId> = practices.iter().map(|p| p.id).collect();
        let mut mergeable = Vec::with_capacity(relations.len());
        let mut relation_violations = Vec::new();
        for (index, relation) in relations.iter().enumerate() {
            let before = relation_violations.len();
            if relation.source == relation.target {
                relation_violations.push(Violation::on_relations(
                    ViolationKind::SelfLoop,
                    vec![index],
                    format!("{relation}: source and target must differ"),
                ));
            }
            let unknown: Vec<String> = [relation.source, relation.target]
                .iter()
                .filter(|id| !known.contains(id))
                .map(ToString::to_string)
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            if !unknown.is_empty() {
                relation_violations.push(Violation::on_relations(
                    ViolationKind::UnknownEndpoint,
                    vec![index],
                    format!("{relation}: unknown practice {}", unknown.join(", ")),
                ));
            }
            // A one-way Alternative may still be completed by its opposite
            // entry through the merge rule, so it is checked after merging.
            if relation.bidirectional && !relation.kind.permits(true) {
                relation_violations.push(Violation::on_relations(
                    ViolationKind::DirectionalityIllegal,
                    vec![index],
                    format!("{relation}: a {} relation is always unidirectional", relation.kind),
                ));
            }
            if relation_violations.len() == before {
                mergeable.push((index, *relation));
            }
        }

        let (merged, merge_violations) = merge_indexed(&mergeable);
        relation_violations.extend(merge_violations);
        for (origin, relation) in &merged {
            if !relation.kind.permits(relation.bidirectional) {
                relation_violations.push(Violation::on_relations(
                    ViolationKind::DirectionalityIllegal,
                    origin.clone(),
                    format!("{relation}: a {} relation is always bidirectional", relation.kind),
                ));
            }
        }
        relation_violations.sort_by(|a, b| (&a.relations, a.kind).cmp(&(&b.relations, b.kind)));
        violations.extend(relation_violations);

        if !violations.is_empty() {
            return Err(violations);
        }

        let practices = practices
            .into_iter()
            .map(|mut p| {
                p.objectives.sort();
                p.objectives.dedup();
                if !p.excluded {
                    p.exclusion_reason = None;
                }
                (p.id, p)
            })
            .collect();
        Ok(AgileMap {
            metadata,
            practices,
            relations: merged.into_iter().map(|(_, r)| r).collect(),
        })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn metadata(&self) -> &MapMetadata {
        &self.metadata
    }

    /// Practices in ascending id order.
    pub fn practices(&self) -> impl ExactSizeIterator<Item = &AgilePractice> + Clone {
        self.practices.values()
    }

    pub fn practice(&self, id: PracticeId) -> Option<&AgilePractice> {
        self.practices.get(&id)
    }

    pub fn contains(&self, id: PracticeId) -> bool {
        self.practices.contains_key(&id)
    }

    pub fn is_excluded(&self, id: PracticeId) -> bool {
        self.practices.get(&id).is_some_and(|p| p.excluded)
    }

    pub fn practice_ids(&self) -> impl Iterator<Item = PracticeId> + '_ {
        self.practices.keys().copied()
    }

    /// Relations sorted by type, source, target.
    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn relations_of(&self, kind: RelationType) -> impl Iterator<Item = &Relation> {
        self.relations.iter().filter(move |r| r.kind == kind)
    }

    /// Targets of the outgoing requires edges of `id`, ascending.
    pub fn required_by(&self, id: PracticeId) -> impl Iterator<Item = PracticeId> + '_ {
        self.relations_of(RelationType::Requires)
            .filter(move |r| r.source == id)
            .map(|r| r.target)
    }

    pub fn into_parts(self) -> (Vec<AgilePractice>, Vec<Relation>, MapMetadata) {
        (self.practices.into_values().collect(), self.relations, self.metadata)
    }

    /// Resolves a practice by id (case-insensitive), then by exact
    /// case-insensitive name.
    pub fn lookup(&self, key: &str) -> Result<&AgilePractice, NotFound> {
        let key = key.trim();
        if let Some(p) = key.parse::<PracticeId>().ok().and_then(|id| self.practice(id)) {
            return Ok(p);
        }
        let folded = key.to_lowercase();
        if let Some(p) = self.practices.values().find(|p| p.name.to_lowercase() == folded) {
            return Ok(p);
        }
        let mut near: Vec<(usize, PracticeId, &str)> = self
            .practices
            .values()
            .map(|p| (strsim::levenshtein(&folded, &p.name.to_lowercase()), p.id, p.name.as_str()))
            .filter(|(d, _, _)| *d <= 2)
            .collect();
        near.sort();
        Err(NotFound {
            query: key.to_string(),
            suggestions: near.into_iter().take(3).map(|(_, id, n)| (id, n.to_string())).collect(),
        })
    }

    /// Groups of practices that require each other in a cycle. Permitted,
    /// but worth reporting.
    pub fn requires_cycles(&self) -> Vec<Vec<PracticeId>> {
        RequiresGraph::from_map(self)
            .components()
            .into_iter()
            .filter(|c| c.len() > 1)
            .collect()
    }

    pub fn warnings(&self) -> Vec<String> {
        self.requires_cycles()
            .into_iter()
            .map(|cycle| {
                let ids: Vec<String> = cycle.iter().map(ToString::to_string).collect();
                format!("requires-cycle: {} require each other", ids.join(", "))
            })
            .collect()
    }
}

fn check_practices(practices: &[AgilePractice]) -> Vec<Violation> {
    let mut violations = Vec::new();
    let mut by_id: BTreeMap<PracticeId, Vec<usize>> = BTreeMap::new();
    let mut by_name: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (index, p) in practices.iter().enumerate() {
        by_id.entry(p.id).or_default().push(index);
        if p.name.trim().is_empty() {
            violations.push(Violation::on_practices(
                ViolationKind::EmptyPracticeName,
                vec![index],
                format!("{} has an empty name", p.id),
            ));
        } else {
            by_name.entry(p.name.to_lowercase()).or_default().push(index);
        }
        if p.excluded && p.exclusion_reason.as_deref().is_none_or(|r| r.trim().is_empty()) {
            violations.push(Violation::on_practices(
                ViolationKind::MissingExclusionReason,
                vec![index],
                format!("{} is excluded without a reason", p.id),
            ));
        }
    }
    for (id, indices) in by_id {
        if indices.len() > 1 {
            violations.push(Violation::on_practices(
                ViolationKind::DuplicatePracticeId,
                indices,
                format!("practice id {id} is declared more than once"),
            ));
        }
    }
    for (name, indices) in by_name {
        if indices.len() > 1 {
            violations.push(Violation::on_practices(
                ViolationKind::DuplicatePracticeName,
                indices,
                format!("practice name `{name}` is used more than once"),
            ));
        }
    }
    violations.sort_by(|a, b| (&a.practices, a.kind).cmp(&(&b.practices, b.kind)));
    violations
}

/// Applies the merge rule: two same-type relations running in opposite
/// directions become one bidirectional relation. Output is canonical and
/// sorted by type, source, target.
///
/// Opposite Requires or Specialization pairs cannot merge and are reported
/// as `MergeIllegal`; exact duplicates (including a one-way relation already
/// covered by a bidirectional one) as `DuplicateRelation`.
pub fn merge_opposite_pairs(relations: &[Relation]) -> Result<Vec<Relation>, Vec<Violation>> {
    let indexed: Vec<(usize, Relation)> = relations.iter().copied().enumerate().collect();
    let (merged, violations) = merge_indexed(&indexed);
    if violations.is_empty() {
        Ok(merged.into_iter().map(|(_, r)| r).collect())
    } else {
        Err(violations)
    }
}

type Indexed = Vec<(Vec<usize>, Relation)>;

fn merge_indexed(relations: &[(usize, Relation)]) -> (Indexed, Vec<Violation>) {
    // Group by type and unordered endpoint pair.
    let mut groups: BTreeMap<(RelationType, PracticeId, PracticeId), Vec<(usize, Relation)>> =
        BTreeMap::new();
    for &(index, r) in relations {
        let (lo, hi) = if r.source <= r.target { (r.source, r.target) } else { (r.target, r.source) };
        groups.entry((r.kind, lo, hi)).or_default().push((index, r));
    }

    let mut out = Vec::new();
    let mut violations = Vec::new();
    for ((kind, lo, hi), members) in groups {
        let mut both: Vec<usize> = Vec::new();
        let mut forward: Vec<usize> = Vec::new();
        let mut backward: Vec<usize> = Vec::new();
        for (index, r) in &members {
            match (r.bidirectional, r.source == lo) {
                (true, _) => both.push(*index),
                (false, true) => forward.push(*index),
                (false, false) => backward.push(*index),
            }
        }
        for (indices, shape) in [(&both, "<->"), (&forward, "->"), (&backward, "<-")] {
            if indices.len() > 1 {
                violations.push(Violation::on_relations(
                    ViolationKind::DuplicateRelation,
                    indices.clone(),
                    format!("{lo} {shape} {hi} ({kind}) is declared more than once"),
                ));
            }
        }
        if !both.is_empty() && (!forward.is_empty() || !backward.is_empty()) {
            let mut indices = vec![both[0]];
            indices.extend(forward.first());
            indices.extend(backward.first());
            indices.sort();
            violations.push(Violation::on_relations(
                ViolationKind::DuplicateRelation,
                indices,
                format!("{lo} <-> {hi} ({kind}) already covers the one-way declaration"),
            ));
            continue;
        }
        match (both.first(), forward.first(), backward.first()) {
            (Some(&b), _, _) => {
                out.push((vec![b], Relation::new(lo, hi, kind, true)));
            }
            (None, Some(&f), Some(&r)) => {
                if kind.permits(true) {
                    let mut origin = vec![f, r];
                    origin.sort();
                    out.push((origin, Relation::new(lo, hi, kind, true)));
                } else {
                    let mut indices = vec![f, r];
                    indices.sort();
                    violations.push(Violation::on_relations(
                        ViolationKind::MergeIllegal,
                        indices,
                        format!("{lo} and {hi} {kind} each other; a {kind} relation cannot be bidirectional"),
                    ));
                }
            }
            (None, Some(&f), None) => out.push((vec![f], Relation::new(lo, hi, kind, false))),
            (None, None, Some(&r)) => out.push((vec![r], Relation::new(hi, lo, kind, false))),
            (None, None, None) => unreachable!("groups are never empty"),
        }
    }
    out.sort_by_key(|(_, r)| r.sort_key());
    (out, violations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{pid, Category};

    fn practices(ids: &[&str]) -> Vec<AgilePractice> {
        ids.iter()
            .map(|id| AgilePractice::new(pid(id), format!("Practice {id}"), Category::Technical))
            .collect()
    }

    fn kinds(violations: &[Violation]) -> Vec<ViolationKind> {
        violations.iter().map(|v| v.kind).collect()
    }

    #[test]
    fn excerpt_chain_builds() {
        let map = AgileMap::build(
            practices(&["AP28", "AP31", "AP32"]),
            vec![
                Relation::requires(pid("AP28"), pid("AP32")),
                Relation::requires(pid("AP32"), pid("AP31")),
            ],
            MapMetadata::default(),
        )
        .unwrap();
        assert_eq!(map.relations().len(), 2);
        assert!(map.warnings().is_empty());
    }

    #[test]
    fn empty_map_is_valid() {
        let map = AgileMap::build(vec![], vec![], MapMetadata::default()).unwrap();
        assert_eq!(map.practices().len(), 0);
        assert!(map.relations().is_empty());
    }

    #[test]
    fn self_loop_rejected() {
        let err = AgileMap::build(
            practices(&["AP05"]),
            vec![Relation::supports(pid("AP05"), pid("AP05"))],
            MapMetadata::default(),
        )
        .unwrap_err();
        assert_eq!(kinds(&err), vec![ViolationKind::SelfLoop]);
        assert_eq!(err[0].relations, vec![0]);
    }

    #[test]
    fn bidirectional_requires_rejected() {
        let err = AgileMap::build(
            practices(&["AP28", "AP32"]),
            vec![Relation::new(pid("AP28"), pid("AP32"), RelationType::Requires, true)],
            MapMetadata::default(),
        )
        .unwrap_err();
        assert_eq!(kinds(&err), vec![ViolationKind::DirectionalityIllegal]);
    }

    #[test]
    fn all_violations_reported() {
        // The repeated AP02 also repeats its name.
        let mut ps = practices(&["AP01", "AP02", "AP02"]);
        ps.push(AgilePractice::new(pid("AP03"), "practice ap01", Category::Process));
        let mut excluded = AgilePractice::new(pid("AP04"), "Four", Category::Process);
        excluded.excluded = true;
        ps.push(excluded);
        let err = AgileMap::build(
            ps,
            vec![
                Relation::supports(pid("AP01"), pid("AP01")),
                Relation::requires(pid("AP01"), pid("AP77")),
                Relation::requires(pid("AP01"), pid("AP02")),
                Relation::requires(pid("AP01"), pid("AP02")),
            ],
            MapMetadata::default(),
        )
        .unwrap_err();
        let mut got = kinds(&err);
        got.sort();
        assert_eq!(
            got,
            vec![
                ViolationKind::SelfLoop,
                ViolationKind::UnknownEndpoint,
                ViolationKind::DuplicateRelation,
                ViolationKind::DuplicatePracticeId,
                ViolationKind::DuplicatePracticeName,
                ViolationKind::DuplicatePracticeName,
                ViolationKind::MissingExclusionReason,
            ]
        );
    }

    #[test]
    fn opposite_supports_merge() {
        let (a, b) = (pid("AP07"), pid("AP02"));
        let merged = merge_opposite_pairs(&[Relation::supports(a, b), Relation::supports(b, a)]).unwrap();
        assert_eq!(merged, vec![Relation::new(b, a, RelationType::Support, true)]);
    }

    #[test]
    fn lone_support_unchanged() {
        let r = Relation::supports(pid("AP07"), pid("AP02"));
        assert_eq!(merge_opposite_pairs(&[r]).unwrap(), vec![r]);
    }

    #[test]
    fn opposite_requires_cannot_merge() {
        let (a, b) = (pid("AP01"), pid("AP02"));
        let err = merge_opposite_pairs(&[Relation::requires(a, b), Relation::requires(b, a)]).unwrap_err();
        assert_eq!(kinds(&err), vec![ViolationKind::MergeIllegal]);
        assert_eq!(err[0].relations, vec![0, 1]);
    }

    #[test]
    fn opposite_one_way_alternatives_merge() {
        let (a, b) = (pid("AP01"), pid("AP02"));
        let map = AgileMap::build(
            practices(&["AP01", "AP02"]),
            vec![
                Relation::new(b, a, RelationType::Alternative, false),
                Relation::new(a, b, RelationType::Alternative, false),
            ],
            MapMetadata::default(),
        )
        .unwrap();
        assert_eq!(map.relations(), &[Relation::alternative(a, b)]);
    }

    #[test]
    fn lone_one_way_alternative_rejected() {
        let err = AgileMap::build(
            practices(&["AP01", "AP02"]),
            vec![Relation::new(pid("AP01"), pid("AP02"), RelationType::Alternative, false)],
            MapMetadata::default(),
        )
        .unwrap_err();
        assert_eq!(kinds(&err), vec![ViolationKind::DirectionalityIllegal]);
    }

    #[test]
    fn one_way_under_bidirectional_is_duplicate() {
        let (a, b) = (pid("AP01"), pid("AP02"));
        let err = merge_opposite_pairs(&[Relation::mutual_support(a, b), Relation::supports(b, a)]).unwrap_err();
        assert_eq!(kinds(&err), vec![ViolationKind::DuplicateRelation]);
    }

    #[test]
    fn lookup_by_id_and_name() {
        let map = AgileMap::build(practices(&["AP04", "AP05"]), vec![], MapMetadata::default()).unwrap();
        assert_eq!(map.lookup("ap04").unwrap().id, pid("AP04"));
        assert_eq!(map.lookup("PRACTICE AP05").unwrap().id, pid("AP05"));
        let miss = map.lookup("AP99").unwrap_err();
        assert!(miss.suggestions.is_empty());
        let miss = map.lookup("Practice AP0").unwrap_err();
        assert_eq!(miss.suggestions.len(), 2);
    }

    #[test]
    fn requires_cycle_is_a_warning() {
        let (a, b) = (pid("AP01"), pid("AP02"));
        let map = AgileMap::build(
            practices(&["AP01", "AP02"]),
            vec![Relation::requires(a, b), Relation::requires(b, a)],
            MapMetadata::default(),
        );
        // Opposite requires cannot merge, so a two-node requires cycle is
        // never buildable; longer cycles are.
        assert!(map.is_err());

        let c = pid("AP03");
        let mut ps = practices(&["AP01", "AP02"]);
        ps.extend(practices(&["AP03"]));
        let map = AgileMap::build(
            ps,
            vec![Relation::requires(a, b), Relation::requires(b, c), Relation::requires(c, a)],
            MapMetadata::default(),
        )
        .unwrap();
        assert_eq!(map.requires_cycles(), vec![vec![a, b, c]]);
        assert_eq!(map.warnings().len(), 1);
    }
}
