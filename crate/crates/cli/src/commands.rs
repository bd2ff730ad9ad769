use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Value};

use agilemap_core::io::{
    export_dot, export_json_graph, parse_map_bytes, DotOptions, LocatedViolation, MapDocument, ParseError,
    ParseErrorKind, JSON_SCHEMA_VERSION,
};
use agilemap_core::{
    compose_plan, map_stats, requires_closure, validate_selection, AgileMap, PracticeId, RelationType, Selection,
    SelectionReport, PUBLISHED_TOTALS,
};
use agilemap_service::{router_with, ServiceConfig};

/// Non-error exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Outcome {
    Clean = 0,
    Findings = 1,
}

fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes()).and_then(|()| out.flush()).context("writing to stdout")
}

fn emit_json(value: &Value) -> Result<()> {
    emit(&format!("{}\n", serde_json::to_string_pretty(value)?))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

enum Loaded {
    Map(AgileMap),
    ParseErrors(Vec<ParseError>),
    Violations(MapDocument, Vec<LocatedViolation>),
}

fn load(bytes: &[u8]) -> Loaded {
    match parse_map_bytes(bytes) {
        Err(errors) => Loaded::ParseErrors(errors),
        Ok(doc) => match doc.build() {
            Ok(map) => Loaded::Map(map),
            Err(violations) => Loaded::Violations(doc, violations),
        },
    }
}

fn parse_kind(kind: ParseErrorKind) -> String {
    serde_json::to_value(kind).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
}

fn diagnostics(file: &Path, loaded: &Loaded) -> String {
    let mut text = String::new();
    let name = file.display();
    match loaded {
        Loaded::Map(_) => {}
        Loaded::ParseErrors(errors) => {
            for e in errors {
                let _ = writeln!(text, "{name}:{}:{}: error[{}]: {}", e.line, e.column, parse_kind(e.kind), e.message);
                if !e.snippet.is_empty() {
                    let _ = writeln!(text, "    | {}", e.snippet);
                }
            }
        }
        Loaded::Violations(_, violations) => {
            for v in violations {
                let (line, column) = v.spans.first().map_or((0, 0), |s| (s.line, s.column));
                let _ = writeln!(text, "{name}:{line}:{column}: error[{}]: {}", v.violation.kind, v.violation.message);
                for extra in v.spans.iter().skip(1) {
                    let _ = writeln!(text, "    also at {name}:{}:{}", extra.line, extra.column);
                }
            }
        }
    }
    text
}

/// Loads a map for the analysis commands; an invalid file is a usage error.
fn load_valid(file: &Path) -> Result<AgileMap> {
    match load(&read(file)?) {
        Loaded::Map(map) => Ok(map),
        other => {
            eprint!("{}", diagnostics(file, &other));
            bail!("{} is not a valid map (run `agilemap validate` for details)", file.display())
        }
    }
}

pub fn validate(file: &Path, as_json: bool) -> Result<Outcome> {
    let bytes = read(file)?;
    let loaded = load(&bytes);
    if let Loaded::ParseErrors(errors) = &loaded {
        if errors.iter().any(|e| e.kind == ParseErrorKind::InvalidEncoding) {
            eprint!("{}", diagnostics(file, &loaded));
            bail!("{} is not valid UTF-8", file.display());
        }
    }
    let outcome = if matches!(loaded, Loaded::Map(_)) { Outcome::Clean } else { Outcome::Findings };
    if as_json {
        let mut report = json!({
            "schemaVersion": JSON_SCHEMA_VERSION,
            "valid": outcome == Outcome::Clean,
            "parseErrors": [],
            "violations": [],
            "warnings": [],
        });
        match &loaded {
            Loaded::Map(map) => {
                report["practices"] = json!(map.practices().count());
                report["relations"] = json!(map.relations().len());
                report["warnings"] = json!(map.warnings());
            }
            Loaded::ParseErrors(errors) => report["parseErrors"] = json!(errors),
            Loaded::Violations(_, violations) => report["violations"] = json!(violations),
        }
        emit_json(&report)?;
    } else {
        let mut text = diagnostics(file, &loaded);
        match &loaded {
            Loaded::Map(map) => {
                for warning in map.warnings() {
                    let _ = writeln!(text, "warning: {warning}");
                }
                let _ = writeln!(text, "OK: {} practices, {} relations", map.practices().count(), map.relations().len());
            }
            Loaded::ParseErrors(errors) => {
                let _ = writeln!(text, "{} parse error(s)", errors.len());
            }
            Loaded::Violations(doc, violations) => {
                let _ = writeln!(
                    text,
                    "{} violation(s) in {} declarations",
                    violations.len(),
                    doc.declaration_count()
                );
            }
        }
        emit(&text)?;
    }
    Ok(outcome)
}

/// Resolves practice ids or exact names; all unresolvable entries are
/// reported at once.
fn resolve(map: &AgileMap, raw: &[&str]) -> Result<BTreeSet<PracticeId>> {
    let mut ids = BTreeSet::new();
    let mut problems = Vec::new();
    for query in raw {
        match map.lookup(query) {
            Ok(p) => {
                ids.insert(p.id);
            }
            Err(miss) if miss.suggestions.is_empty() => problems.push(format!("unknown practice `{query}`")),
            Err(miss) => {
                let hints: Vec<String> = miss.suggestions.iter().map(|(id, name)| format!("{id} {name}")).collect();
                problems.push(format!("unknown practice `{query}` (did you mean {}?)", hints.join(", ")));
            }
        }
    }
    if problems.is_empty() {
        Ok(ids)
    } else {
        Err(anyhow!(problems.join("; ")))
    }
}

fn id_list<'a>(ids: impl IntoIterator<Item = &'a PracticeId>) -> String {
    let parts: Vec<String> = ids.into_iter().map(ToString::to_string).collect();
    if parts.is_empty() {
        "(none)".to_string()
    } else {
        parts.join(", ")
    }
}

pub fn closure(file: &Path, raw: &[String], as_json: bool) -> Result<Outcome> {
    let map = load_valid(file)?;
    let queries: Vec<&str> = raw.iter().map(String::as_str).collect();
    let seeds = resolve(&map, &queries)?;
    let closure = requires_closure(&map, &seeds)?;
    if as_json {
        emit_json(&json!({ "schemaVersion": JSON_SCHEMA_VERSION, "seeds": seeds, "closure": closure }))?;
    } else {
        let mut text = String::new();
        for id in &closure {
            let name = map.practice(*id).map_or("", |p| p.name.as_str());
            let _ = writeln!(text, "{id} {name}");
        }
        emit(&text)?;
    }
    Ok(Outcome::Clean)
}

fn report_text(map: &AgileMap, sel: &Selection, report: &SelectionReport) -> String {
    let mut text = String::new();
    let _ = writeln!(text, "chosen: {}", id_list(&sel.chosen));
    let _ = writeln!(text, "closure: {}", id_list(&report.closure));
    let _ = writeln!(text, "missing required: {}", id_list(&report.missing_required));
    if !report.support_suggestions.is_empty() {
        let _ = writeln!(text, "support suggestions:");
        for s in &report.support_suggestions {
            let name = map.practice(s.id).map_or("", |p| p.name.as_str());
            let _ = writeln!(text, "  {} {name}: {}", s.id, s.justification);
        }
    }
    if !report.alternative_hints.is_empty() {
        let _ = writeln!(text, "alternatives:");
        for hint in &report.alternative_hints {
            let _ = writeln!(text, "  {} could be replaced by {}", hint.missing, id_list(&hint.alternatives));
        }
    }
    for warning in &report.warnings {
        let _ = writeln!(text, "warning: {warning}");
    }
    text
}

pub fn select(file: &Path, choose: &str, with_plan: bool, include_excluded: bool, as_json: bool) -> Result<Outcome> {
    let map = load_valid(file)?;
    let queries: Vec<&str> = choose.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    let sel = Selection { chosen: resolve(&map, &queries)?, include_excluded };
    let report = validate_selection(&map, &sel)?;
    let plan = if with_plan && report.is_complete() { Some(compose_plan(&map, &sel)?) } else { None };

    if as_json {
        emit_json(&json!({ "schemaVersion": JSON_SCHEMA_VERSION, "report": report, "plan": plan }))?;
    } else {
        let mut text = report_text(&map, &sel, &report);
        if with_plan && plan.is_none() {
            let _ = writeln!(text, "no plan: add the missing required practices first");
        }
        if let Some(plan) = &plan {
            let _ = writeln!(text, "plan:");
            for (i, stage) in plan.stages.iter().enumerate() {
                let names: Vec<String> = stage
                    .iter()
                    .map(|id| format!("{id} {}", map.practice(*id).map_or("", |p| p.name.as_str())))
                    .collect();
                let _ = writeln!(text, "  stage {}: {}", i + 1, names.join("; "));
            }
            let _ = writeln!(text, "by category:");
            for (category, ids) in &plan.by_category {
                let _ = writeln!(text, "  {category}: {}", id_list(ids));
            }
        }
        emit(&text)?;
    }
    Ok(if report.is_complete() { Outcome::Clean } else { Outcome::Findings })
}

pub fn export(file: &Path, dot: bool, include_excluded: bool, cluster_by_category: bool) -> Result<Outcome> {
    let map = load_valid(file)?;
    let mut text = if dot {
        export_dot(&map, DotOptions { include_excluded, cluster_by_category })
    } else {
        export_json_graph(&map)
    };
    if !text.ends_with('\n') {
        text.push('\n');
    }
    emit(&text)?;
    Ok(Outcome::Clean)
}

pub fn stats(file: &Path, as_json: bool) -> Result<Outcome> {
    let map = load_valid(file)?;
    let stats = map_stats(&map);
    let audit = map.metadata().full.then(|| stats.audit(PUBLISHED_TOTALS));
    if as_json {
        emit_json(&json!({ "schemaVersion": JSON_SCHEMA_VERSION, "stats": stats, "audit": audit }))?;
    } else {
        let mut text = String::new();
        let _ = writeln!(text, "practices: {}", stats.practice_count);
        let _ = writeln!(text, "non-specific: {}", stats.non_specific_count);
        let _ = writeln!(text, "excluded: {}", stats.excluded_count);
        let _ = writeln!(text, "relations: {}", stats.total_relations);
        for kind in RelationType::ALL {
            let _ = writeln!(text, "  {kind}: {}", stats.count(*kind));
        }
        match &audit {
            None => {}
            Some(diffs) if diffs.is_empty() => {
                let _ = writeln!(
                    text,
                    "full map audit: matches published totals ({} practices, {} relations, {} requires)",
                    PUBLISHED_TOTALS.practices, PUBLISHED_TOTALS.relations, PUBLISHED_TOTALS.requires
                );
            }
            Some(diffs) => {
                for diff in diffs {
                    let _ = writeln!(text, "full map audit: {diff}");
                }
            }
        }
        emit(&text)?;
    }
    Ok(match audit {
        Some(diffs) if !diffs.is_empty() => Outcome::Findings,
        _ => Outcome::Clean,
    })
}

pub fn serve(file: &Path, bind: &str, port: u16, ui_dir: Option<PathBuf>) -> Result<Outcome> {
    let map = load_valid(file)?;
    let _ = tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .try_init();
    if let Some(dir) = &ui_dir {
        if !dir.is_dir() {
            bail!("UI directory {} does not exist", dir.display());
        }
    }
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build().context("starting runtime")?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind((bind, port))
            .await
            .with_context(|| format!("cannot bind {bind}:{port}"))?;
        let addr = listener.local_addr()?;
        emit(&format!("listening on http://{addr}\n"))?;
        let app = router_with(map, ServiceConfig { ui_dir });
        agilemap_service::serve(listener, app).await.context("server stopped")
    })?;
    Ok(Outcome::Clean)
}
