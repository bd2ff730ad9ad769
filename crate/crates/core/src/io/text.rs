//! Canonical `.agilemap` serialization.

use std::fmt::Write;

use crate::map::AgileMap;
use crate::model::{Relation, RelationType};

pub(crate) fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn relation_line(r: &Relation) -> String {
    let verb = match (r.kind, r.bidirectional) {
        (RelationType::Specialization, _) => "specializes",
        (RelationType::Support, false) => "supports",
        (RelationType::Support, true) => "supports <->",
        (RelationType::Requires, _) => "requires",
        (RelationType::Alternative, _) => "alternative-to",
    };
    format!("relation {} {verb} {}", r.source, r.target)
}

/// Practices by id, then relations by type, source, target. Parsing the
/// output rebuilds an equal map.
pub fn serialize_map(map: &AgileMap) -> String {
    let meta = map.metadata();
    let mut out = format!("map {} version {}", quote(&meta.name), quote(&meta.version));
    if meta.full {
        out.push_str(" full");
    }
    out.push('\n');
    for note in &meta.notes {
        let _ = writeln!(out, "note {}", quote(note));
    }

    if map.practices().len() > 0 {
        out.push('\n');
    }
    for p in map.practices() {
        let _ = write!(out, "practice {} {} category {}", p.id, quote(&p.name), p.category);
        if p.excluded {
            let _ = write!(out, " excluded {}", quote(p.exclusion_reason.as_deref().unwrap_or_default()));
        }
        if p.non_specific {
            out.push_str(" nonspecific");
        }
        if !p.objectives.is_empty() {
            let tags: Vec<&str> = p.objectives.iter().map(|t| t.as_str()).collect();
            let _ = write!(out, " objectives {}", tags.join(","));
        }
        if !p.description.is_empty() {
            let _ = write!(out, " description {}", quote(&p.description));
        }
        for source in &p.sources {
            let _ = write!(out, " source {}", quote(source));
        }
        out.push('\n');
    }

    if !map.relations().is_empty() {
        out.push('\n');
    }
    for r in map.relations() {
        out.push_str(&relation_line(r));
        out.push('\n');
    }
    out
}
