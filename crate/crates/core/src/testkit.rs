//! Random generators for property and acceptance tests.

use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::map::{AgileMap, MapMetadata};
use crate::model::{AgilePractice, Category, ObjectiveTag, PracticeId, Relation, RelationType};

pub fn id(n: u8) -> PracticeId {
    PracticeId::new(n).expect("1..=99")
}

/// Practices `AP01..APn` with random categories, flags and objectives.
pub fn random_practices<R: Rng>(rng: &mut R, n: u8) -> Vec<AgilePractice> {
    (1..=n)
        .map(|k| {
            let category = *Category::ALL.choose(rng).expect("non-empty");
            let mut p = AgilePractice::new(id(k), format!("Practice {k:02}"), category);
            if rng.random_bool(0.15) {
                p = p.excluded_because(format!("reason {k}"));
            }
            p.non_specific = rng.random_bool(0.1);
            let tags: Vec<ObjectiveTag> =
                ObjectiveTag::ALL.iter().copied().filter(|_| rng.random_bool(0.3)).collect();
            p = p.with_objectives(tags);
            if rng.random_bool(0.2) {
                p.description = format!("description of \"{k}\"\nsecond line");
            }
            if rng.random_bool(0.2) {
                p.sources = vec![format!("source {k}"), "shared source".to_string()];
            }
            p
        })
        .collect()
}

/// A valid map with up to `max_practices` practices and a random mix of
/// all relation types. Requires cycles of length three or more can occur.
pub fn random_map<R: Rng>(rng: &mut R, max_practices: u8) -> AgileMap {
    let n = rng.random_range(0..=max_practices);
    let practices = random_practices(rng, n);
    let mut used: BTreeSet<(RelationType, PracticeId, PracticeId)> = BTreeSet::new();
    let mut relations = Vec::new();
    if n >= 2 {
        let attempts = rng.random_range(0..=(n as usize * 3));
        for _ in 0..attempts {
            let a = id(rng.random_range(1..=n));
            let b = id(rng.random_range(1..=n));
            if a == b {
                continue;
            }
            let kind = *RelationType::ALL.choose(rng).expect("non-empty");
            let key = (kind, a.min(b), a.max(b));
            if !used.insert(key) {
                continue;
            }
            let relation = match kind {
                RelationType::Alternative => Relation::alternative(a, b),
                RelationType::Support if rng.random_bool(0.4) => Relation::mutual_support(a, b),
                _ => Relation::new(a, b, kind, false),
            };
            relations.push(relation);
        }
    }
    let metadata = MapMetadata {
        name: format!("random {n}"),
        version: rng.random_range(0..100u32).to_string(),
        notes: if rng.random_bool(0.3) { vec!["generated".to_string()] } else { Vec::new() },
        full: rng.random_bool(0.1),
    };
    AgileMap::build(practices, relations, metadata).expect("generator emits valid maps")
}

/// An unchecked relation list over `AP01..APn` (plus an occasional unknown
/// endpoint), mixing legal and illegal shapes.
pub fn random_relation_list<R: Rng>(rng: &mut R, n: u8, len: usize) -> Vec<Relation> {
    (0..len)
        .map(|_| {
            let pick = |rng: &mut R| {
                if rng.random_bool(0.03) {
                    id(n + 1)
                } else {
                    id(rng.random_range(1..=n))
                }
            };
            let source = pick(rng);
            let target = if rng.random_bool(0.08) { source } else { pick(rng) };
            let kind = *RelationType::ALL.choose(rng).expect("non-empty");
            let bidirectional = match kind {
                RelationType::Alternative | RelationType::Support => rng.random_bool(0.5),
                _ => rng.random_bool(0.1),
            };
            Relation::new(source, target, kind, bidirectional)
        })
        .collect()
}
