//! Graphviz DOT export.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::map::AgileMap;
use crate::model::{AgilePractice, Category, RelationType};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DotOptions {
    pub include_excluded: bool,
    pub cluster_by_category: bool,
}

fn escape(text: &str) -> String {
    let mut out = String::new();
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => {}
            c => out.push(c),
        }
    }
    out
}

fn node_line(p: &AgilePractice) -> String {
    // `\n` inside a DOT label is a line break, so it is written escaped.
    let label = format!("{}\\n{}", p.id, escape(&p.name));
    let style = if p.excluded { ", style=dashed" } else { "" };
    format!("\"{}\" [label=\"{label}\"{style}];", p.id)
}

/// Edge styles: specialization uses an empty-triangle head, requires is a
/// solid labelled edge, support is dashed (`dir=both` when mutual) and
/// alternative is dashed without arrowheads.
pub fn export_dot(map: &AgileMap, options: DotOptions) -> String {
    let visible: Vec<&AgilePractice> = map
        .practices()
        .filter(|p| options.include_excluded || !p.excluded)
        .collect();

    let mut out = String::from("digraph agile_map {\n");
    out.push_str("  node [shape=box];\n");
    if options.cluster_by_category {
        let mut groups: BTreeMap<Category, Vec<&AgilePractice>> = BTreeMap::new();
        for p in &visible {
            groups.entry(p.category).or_default().push(p);
        }
        for (category, members) in groups {
            let _ = writeln!(out, "  subgraph \"cluster_{category}\" {{");
            let _ = writeln!(out, "    label=\"{category}\";");
            for p in members {
                let _ = writeln!(out, "    {}", node_line(p));
            }
            out.push_str("  }\n");
        }
    } else {
        for p in &visible {
            let _ = writeln!(out, "  {}", node_line(p));
        }
    }

    for r in map.relations() {
        let shown = |id| visible.iter().any(|p| p.id == id);
        if !shown(r.source) || !shown(r.target) {
            continue;
        }
        let attrs = match (r.kind, r.bidirectional) {
            (RelationType::Specialization, _) => "arrowhead=empty",
            (RelationType::Requires, _) => "label=\"requires\"",
            (RelationType::Support, false) => "style=dashed, label=\"supports\"",
            (RelationType::Support, true) => "style=dashed, label=\"supports\", dir=both",
            (RelationType::Alternative, _) => "style=dashed, label=\"alt\", dir=none",
        };
        let _ = writeln!(out, "  \"{}\" -> \"{}\" [{attrs}];", r.source, r.target);
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_digraph() {
        assert_eq!(export_dot(&AgileMap::empty(), DotOptions::default()), "digraph agile_map {\n  node [shape=box];\n}\n");
    }

    #[test]
    fn label_escaping() {
        assert_eq!(escape("a \"b\" \\ c"), "a \\\"b\\\" \\\\ c");
    }
}
