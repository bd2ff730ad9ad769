//! Resolution engine over a built map: requires-closure, selection checks,
//! adaption classification, alternatives, objective filtering, composition
//! planning and dataset statistics.
//!
//! Excluded practices are left out of every answer unless a selection asks
//! for them with `include_excluded`, and even then they are never suggested.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::RequiresGraph;
use crate::map::AgileMap;
use crate::model::{Category, ObjectiveTag, PracticeId, RelationType};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Selection {
    pub chosen: BTreeSet<PracticeId>,
    #[serde(default)]
    pub include_excluded: bool,
}

impl Selection {
    pub fn of(chosen: impl IntoIterator<Item = PracticeId>) -> Self {
        Self { chosen: chosen.into_iter().collect(), include_excluded: false }
    }

    pub fn including_excluded(mut self) -> Self {
        self.include_excluded = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportSuggestion {
    pub id: PracticeId,
    /// Members of the selection or its closure that `id` supports.
    pub supports: Vec<PracticeId>,
    pub justification: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlternativeHint {
    pub missing: PracticeId,
    pub alternatives: BTreeSet<PracticeId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SelectionReport {
    pub closure: BTreeSet<PracticeId>,
    pub missing_required: BTreeSet<PracticeId>,
    pub support_suggestions: Vec<SupportSuggestion>,
    pub alternative_hints: Vec<AlternativeHint>,
    pub warnings: Vec<String>,
}

impl SelectionReport {
    pub fn is_complete(&self) -> bool {
        self.missing_required.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AdaptionClass {
    /// No outgoing requires edge: usable on its own.
    Individual,
    /// Needs the practices it requires.
    RequiresCombination,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CompositionPlan {
    pub stages: Vec<Vec<PracticeId>>,
    pub by_category: BTreeMap<Category, Vec<PracticeId>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MapStats {
    pub practice_count: usize,
    pub non_specific_count: usize,
    pub excluded_count: usize,
    pub relation_count_by_type: BTreeMap<RelationType, usize>,
    pub total_relations: usize,
}

/// Totals reported for the complete published map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PublishedTotals {
    pub practices: usize,
    pub relations: usize,
    pub requires: usize,
}

pub const PUBLISHED_TOTALS: PublishedTotals = PublishedTotals { practices: 37, relations: 47, requires: 20 };

impl MapStats {
    pub fn count(&self, kind: RelationType) -> usize {
        self.relation_count_by_type.get(&kind).copied().unwrap_or(0)
    }

    /// Differences from the published totals, one line each; empty when the
    /// map matches.
    pub fn audit(&self, expected: PublishedTotals) -> Vec<String> {
        let checks = [
            ("practices", self.practice_count, expected.practices),
            ("relations", self.total_relations, expected.relations),
            ("requires relations", self.count(RelationType::Requires), expected.requires),
        ];
        checks
            .into_iter()
            .filter(|(_, got, want)| got != want)
            .map(|(what, got, want)| format!("{what}: expected {want}, found {got}"))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("unknown practice {}", join(.0))]
    UnknownPractice(Vec<PracticeId>),
    #[error("excluded practice {} (set include_excluded to use it)", join(.0))]
    ExcludedPractice(Vec<PracticeId>),
    #[error("{0} is not part of the selection")]
    NotSelected(PracticeId),
    #[error("{0} is already part of the selection")]
    AlreadySelected(PracticeId),
    #[error("{from} and {to} are not alternatives{}", relation_note(.relation))]
    NotAlternatives { from: PracticeId, to: PracticeId, relation: Option<RelationType> },
    #[error("selection incomplete: missing {}", join_set(&.0.missing_required))]
    SelectionIncomplete(Box<SelectionReport>),
}

fn join(ids: &[PracticeId]) -> String {
    ids.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

fn join_set(ids: &BTreeSet<PracticeId>) -> String {
    ids.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

fn relation_note(relation: &Option<RelationType>) -> String {
    relation.map(|r| format!(" (relation: {r})")).unwrap_or_default()
}

fn ensure_known<'a>(map: &AgileMap, ids: impl IntoIterator<Item = &'a PracticeId>) -> Result<(), AnalysisError> {
    let unknown: Vec<PracticeId> = ids.into_iter().copied().filter(|id| !map.contains(*id)).collect();
    if unknown.is_empty() {
        Ok(())
    } else {
        Err(AnalysisError::UnknownPractice(unknown))
    }
}

/// Everything transitively required by the seeds. Seeds themselves are
/// included only if re-reached through a cycle.
pub fn requires_closure(map: &AgileMap, seeds: &BTreeSet<PracticeId>) -> Result<BTreeSet<PracticeId>, AnalysisError> {
    RequiresGraph::from_map(map).closure(seeds).map_err(AnalysisError::UnknownPractice)
}

fn check_selection(map: &AgileMap, sel: &Selection) -> Result<(), AnalysisError> {
    ensure_known(map, &sel.chosen)?;
    if !sel.include_excluded {
        let excluded: Vec<PracticeId> = sel.chosen.iter().copied().filter(|id| map.is_excluded(*id)).collect();
        if !excluded.is_empty() {
            return Err(AnalysisError::ExcludedPractice(excluded));
        }
    }
    Ok(())
}

pub fn validate_selection(map: &AgileMap, sel: &Selection) -> Result<SelectionReport, AnalysisError> {
    check_selection(map, sel)?;
    let closure = requires_closure(map, &sel.chosen)?;
    let missing_required: BTreeSet<PracticeId> = closure.difference(&sel.chosen).copied().collect();
    let covered: BTreeSet<PracticeId> = sel.chosen.union(&closure).copied().collect();

    let mut supported: BTreeMap<PracticeId, BTreeSet<PracticeId>> = BTreeMap::new();
    for r in map.relations_of(RelationType::Support) {
        let mut directions = vec![(r.source, r.target)];
        if r.bidirectional {
            directions.push((r.target, r.source));
        }
        for (supporter, member) in directions {
            if covered.contains(&member) && !covered.contains(&supporter) && !map.is_excluded(supporter) {
                supported.entry(supporter).or_default().insert(member);
            }
        }
    }
    let mut support_suggestions: Vec<SupportSuggestion> = supported
        .into_iter()
        .map(|(id, members)| {
            let supports: Vec<PracticeId> = members.into_iter().collect();
            let justification = format!("supports {}", join(&supports));
            SupportSuggestion { id, supports, justification }
        })
        .collect();
    support_suggestions.sort_by(|a, b| b.supports.len().cmp(&a.supports.len()).then(a.id.cmp(&b.id)));

    let alternative_hints = missing_required
        .iter()
        .filter_map(|&missing| {
            let alternatives: BTreeSet<PracticeId> = alternatives_partners(map, missing)
                .filter(|id| sel.include_excluded || !map.is_excluded(*id))
                .collect();
            (!alternatives.is_empty()).then_some(AlternativeHint { missing, alternatives })
        })
        .collect();

    let mut warnings = Vec::new();
    if !missing_required.is_empty() {
        warnings.push(format!("selection incomplete: missing {}", join_set(&missing_required)));
    }
    let excluded_required: Vec<PracticeId> = missing_required.iter().copied().filter(|id| map.is_excluded(*id)).collect();
    if !sel.include_excluded && !excluded_required.is_empty() {
        warnings.push(format!("requires excluded practice {}", join(&excluded_required)));
    }

    Ok(SelectionReport { closure, missing_required, support_suggestions, alternative_hints, warnings })
}

pub fn adaption_class(map: &AgileMap, id: PracticeId) -> Result<AdaptionClass, AnalysisError> {
    ensure_known(map, [&id])?;
    Ok(if map.required_by(id).next().is_none() {
        AdaptionClass::Individual
    } else {
        AdaptionClass::RequiresCombination
    })
}

fn alternatives_partners(map: &AgileMap, id: PracticeId) -> impl Iterator<Item = PracticeId> + '_ {
    map.relations_of(RelationType::Alternative).filter_map(move |r| r.other(id))
}

pub fn alternatives_for(map: &AgileMap, id: PracticeId) -> Result<BTreeSet<PracticeId>, AnalysisError> {
    ensure_known(map, [&id])?;
    Ok(alternatives_partners(map, id).collect())
}

/// Swaps `from` for an alternative practice `to`. The closure of the result
/// is not carried over; validate the returned selection again.
pub fn substitute(
    map: &AgileMap,
    sel: &Selection,
    from: PracticeId,
    to: PracticeId,
) -> Result<Selection, AnalysisError> {
    ensure_known(map, [&from, &to])?;
    if !sel.chosen.contains(&from) {
        return Err(AnalysisError::NotSelected(from));
    }
    if sel.chosen.contains(&to) {
        return Err(AnalysisError::AlreadySelected(to));
    }
    if !sel.include_excluded && map.is_excluded(to) {
        return Err(AnalysisError::ExcludedPractice(vec![to]));
    }
    if !alternatives_partners(map, from).any(|p| p == to) {
        let relation = map
            .relations()
            .iter()
            .find(|r| r.touches(from) && r.touches(to))
            .map(|r| r.kind);
        return Err(AnalysisError::NotAlternatives { from, to, relation });
    }
    let mut next = sel.clone();
    next.chosen.remove(&from);
    next.chosen.insert(to);
    Ok(next)
}

/// Non-excluded practices tagged with any of the objectives. No closure is
/// applied.
pub fn select_by_objectives(map: &AgileMap, objectives: &BTreeSet<ObjectiveTag>) -> BTreeSet<PracticeId> {
    map.practices()
        .filter(|p| !p.excluded && objectives.iter().any(|&t| p.has_objective(t)))
        .map(|p| p.id)
        .collect()
}

/// Orders a requirement-complete selection into stages, dependencies first.
pub fn compose_plan(map: &AgileMap, sel: &Selection) -> Result<CompositionPlan, AnalysisError> {
    let report = validate_selection(map, sel)?;
    if !report.is_complete() {
        return Err(AnalysisError::SelectionIncomplete(Box::new(report)));
    }
    let members: BTreeSet<PracticeId> = sel.chosen.union(&report.closure).copied().collect();
    let stages = RequiresGraph::induced(map, members.iter().copied()).stages();
    let mut by_category: BTreeMap<Category, Vec<PracticeId>> = BTreeMap::new();
    for id in &members {
        if let Some(p) = map.practice(*id) {
            by_category.entry(p.category).or_default().push(*id);
        }
    }
    Ok(CompositionPlan { stages, by_category })
}

pub fn map_stats(map: &AgileMap) -> MapStats {
    let mut relation_count_by_type: BTreeMap<RelationType, usize> =
        RelationType::ALL.iter().map(|&k| (k, 0)).collect();
    for r in map.relations() {
        *relation_count_by_type.entry(r.kind).or_default() += 1;
    }
    MapStats {
        practice_count: map.practices().len(),
        non_specific_count: map.practices().filter(|p| p.non_specific).count(),
        excluded_count: map.practices().filter(|p| p.excluded).count(),
        total_relations: relation_count_by_type.values().sum(),
        relation_count_by_type,
    }
}
