//! Parser for the line-oriented `.agilemap` format.
//!
//! ```text
//! map "<name>" version "<v>" [full]
//! note "<text>"
//! practice APnn "<Name>" category <Category> [excluded "<reason>"] [nonspecific]
//!          [objectives sp,po,ke] [description "<text>"] [source "<text>"]...
//! relation APnn requires|supports|supports <->|specializes|alternative-to APnn
//! # comment
//! ```
//!
//! Each declaration occupies one line. A malformed line yields a
//! [`ParseError`] and parsing resumes on the next line, so one pass reports
//! every syntax problem in the file.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::map::{AgileMap, MapMetadata, Violation};
use crate::model::{AgilePractice, Category, ObjectiveTag, PracticeId, Relation, RelationType};

/// Position of a declaration: 1-based line, and 1-based character columns
/// from the first token to one past the last.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Span {
    pub line: usize,
    pub column: usize,
    pub end_column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Declared<T> {
    pub value: T,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Header {
    pub name: String,
    pub version: String,
    pub full: bool,
}

/// A syntactically parsed map file. It may still break meta-model rules;
/// those surface in [`MapDocument::build`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MapDocument {
    pub header: Option<Declared<Header>>,
    pub notes: Vec<Declared<String>>,
    pub practices: Vec<Declared<AgilePractice>>,
    pub relations: Vec<Declared<Relation>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParseErrorKind {
    Syntax,
    UnknownKeyword,
    BadPracticeId,
    UnterminatedString,
    InvalidEncoding,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub snippet: String,
}

/// A build violation together with the spans of the declarations involved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocatedViolation {
    #[serde(flatten)]
    pub violation: Violation,
    pub spans: Vec<Span>,
}

impl fmt::Display for LocatedViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.spans.first() {
            Some(s) => write!(f, "line {}, column {}: {}", s.line, s.column, self.violation),
            None => write!(f, "{}", self.violation),
        }
    }
}

impl MapDocument {
    pub fn metadata(&self) -> MapMetadata {
        let mut metadata = match &self.header {
            Some(h) => MapMetadata {
                name: h.value.name.clone(),
                version: h.value.version.clone(),
                full: h.value.full,
                ..MapMetadata::default()
            },
            None => MapMetadata::default(),
        };
        metadata.notes = self.notes.iter().map(|n| n.value.clone()).collect();
        metadata
    }

    pub fn declaration_count(&self) -> usize {
        usize::from(self.header.is_some()) + self.notes.len() + self.practices.len() + self.relations.len()
    }

    /// Runs the meta-model checks, attaching source spans to violations.
    pub fn build(&self) -> Result<AgileMap, Vec<LocatedViolation>> {
        AgileMap::build(
            self.practices.iter().map(|d| d.value.clone()).collect(),
            self.relations.iter().map(|d| d.value).collect(),
            self.metadata(),
        )
        .map_err(|violations| {
            violations
                .into_iter()
                .map(|violation| {
                    let spans = violation
                        .practices
                        .iter()
                        .map(|&i| self.practices[i].span)
                        .chain(violation.relations.iter().map(|&i| self.relations[i].span))
                        .collect();
                    LocatedViolation { violation, spans }
                })
                .collect()
        })
    }
}

/// Parses raw bytes, rejecting invalid UTF-8 with a positioned error.
pub fn parse_map_bytes(bytes: &[u8]) -> Result<MapDocument, Vec<ParseError>> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_map_document(text),
        Err(e) => {
            let valid = std::str::from_utf8(&bytes[..e.valid_up_to()]).unwrap_or_default();
            let line = valid.matches('\n').count() + 1;
            let line_start = valid.rfind('\n').map_or(valid, |i| &valid[i + 1..]);
            Err(vec![ParseError {
                kind: ParseErrorKind::InvalidEncoding,
                line,
                column: line_start.chars().count() + 1,
                message: "invalid UTF-8".to_string(),
                snippet: line_start.to_string(),
            }])
        }
    }
}

pub fn parse_map_document(source: &str) -> Result<MapDocument, Vec<ParseError>> {
    let source = source.strip_prefix('\u{feff}').unwrap_or(source);
    let mut doc = MapDocument::default();
    let mut errors = Vec::new();
    for (i, raw) in source.split('\n').enumerate() {
        let text = raw.strip_suffix('\r').unwrap_or(raw);
        let mut line = LineParser { number: i + 1, text, tokens: Vec::new(), pos: 0 };
        if let Err(e) = line.parse_into(&mut doc) {
            errors.push(e);
        }
    }
    if errors.is_empty() {
        Ok(doc)
    } else {
        Err(errors)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum TokenKind {
    Word,
    Quoted,
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    text: String,
    column: usize,
    end_column: usize,
}

struct LineParser<'a> {
    number: usize,
    text: &'a str,
    tokens: Vec<Token>,
    pos: usize,
}

impl LineParser<'_> {
    fn error(&self, kind: ParseErrorKind, column: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            kind,
            line: self.number,
            column,
            message: message.into(),
            snippet: self.text.to_string(),
        }
    }

    fn end_column(&self) -> usize {
        self.tokens.last().map_or(1, |t| t.end_column)
    }

    fn tokenize(&mut self) -> Result<(), ParseError> {
        let chars: Vec<char> = self.text.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() {
                i += 1;
            } else if c == '#' {
                break;
            } else if c == '"' {
                let start = i;
                let mut text = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => {
                            return Err(self.error(
                                ParseErrorKind::UnterminatedString,
                                start + 1,
                                "unterminated string: expected closing `\"`",
                            ))
                        }
                        Some('"') => break,
                        Some('\\') => {
                            let escaped = match chars.get(i + 1) {
                                Some('"') => '"',
                                Some('\\') => '\\',
                                Some('n') => '\n',
                                Some('r') => '\r',
                                Some('t') => '\t',
                                _ => {
                                    return Err(self.error(
                                        ParseErrorKind::Syntax,
                                        i + 1,
                                        "invalid escape: expected one of \\\" \\\\ \\n \\r \\t",
                                    ))
                                }
                            };
                            text.push(escaped);
                            i += 2;
                        }
                        Some(&other) => {
                            text.push(other);
                            i += 1;
                        }
                    }
                }
                i += 1;
                self.tokens.push(Token { kind: TokenKind::Quoted, text, column: start + 1, end_column: i + 1 });
            } else {
                let start = i;
                while i < chars.len() && !chars[i].is_whitespace() && chars[i] != '"' {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                self.tokens.push(Token { kind: TokenKind::Word, text, column: start + 1, end_column: i + 1 });
            }
        }
        Ok(())
    }

    fn next(&mut self) -> Option<Token> {
        let token = self.tokens.get(self.pos).cloned();
        self.pos += usize::from(token.is_some());
        token
    }

    fn peek_word(&self) -> Option<&str> {
        self.tokens
            .get(self.pos)
            .filter(|t| t.kind == TokenKind::Word)
            .map(|t| t.text.as_str())
    }

    fn expect_word(&mut self, expected: &str) -> Result<Token, ParseError> {
        match self.next() {
            Some(t) if t.kind == TokenKind::Word => Ok(t),
            Some(t) => Err(self.error(ParseErrorKind::Syntax, t.column, format!("expected {expected}, found a quoted string"))),
            None => Err(self.error(ParseErrorKind::Syntax, self.end_column(), format!("expected {expected}, found end of line"))),
        }
    }

    fn expect_keyword(&mut self, keyword: &str) -> Result<(), ParseError> {
        let t = self.expect_word(&format!("keyword `{keyword}`"))?;
        if t.text == keyword {
            Ok(())
        } else {
            Err(self.error(ParseErrorKind::Syntax, t.column, format!("expected keyword `{keyword}`, found `{}`", t.text)))
        }
    }

    fn expect_quoted(&mut self, what: &str) -> Result<String, ParseError> {
        match self.next() {
            Some(t) if t.kind == TokenKind::Quoted => Ok(t.text),
            Some(t) => Err(self.error(ParseErrorKind::Syntax, t.column, format!("expected quoted {what}, found `{}`", t.text))),
            None => Err(self.error(ParseErrorKind::Syntax, self.end_column(), format!("expected quoted {what}, found end of line"))),
        }
    }

    fn expect_id(&mut self) -> Result<PracticeId, ParseError> {
        let t = self.expect_word("practice id (AP01..AP99)")?;
        t.text.parse().map_err(|_| {
            self.error(
                ParseErrorKind::BadPracticeId,
                t.column,
                format!("bad practice id `{}`: expected AP followed by two digits (AP01..AP99)", t.text),
            )
        })
    }

    fn expect_end(&mut self) -> Result<(), ParseError> {
        match self.next() {
            None => Ok(()),
            Some(t) => Err(self.error(ParseErrorKind::Syntax, t.column, format!("unexpected `{}`: expected end of line", t.text))),
        }
    }

    fn span(&self) -> Span {
        Span {
            line: self.number,
            column: self.tokens.first().map_or(1, |t| t.column),
            end_column: self.end_column(),
        }
    }

    fn parse_into(&mut self, doc: &mut MapDocument) -> Result<(), ParseError> {
        self.tokenize()?;
        let Some(first) = self.next() else {
            return Ok(());
        };
        const KEYWORDS: &str = "expected one of `map`, `note`, `practice`, `relation`";
        if first.kind != TokenKind::Word {
            return Err(self.error(ParseErrorKind::UnknownKeyword, first.column, format!("{KEYWORDS}, found a quoted string")));
        }
        match first.text.as_str() {
            "map" => {
                let name = self.expect_quoted("map name")?;
                self.expect_keyword("version")?;
                let version = self.expect_quoted("version")?;
                let full = self.peek_word() == Some("full");
                if full {
                    self.pos += 1;
                }
                self.expect_end()?;
                if doc.header.is_some() {
                    return Err(self.error(ParseErrorKind::Syntax, first.column, "duplicate `map` header"));
                }
                doc.header = Some(Declared { value: Header { name, version, full }, span: self.span() });
            }
            "note" => {
                let text = self.expect_quoted("note text")?;
                self.expect_end()?;
                doc.notes.push(Declared { value: text, span: self.span() });
            }
            "practice" => {
                let practice = self.parse_practice()?;
                doc.practices.push(Declared { value: practice, span: self.span() });
            }
            "relation" => {
                let relation = self.parse_relation()?;
                doc.relations.push(Declared { value: relation, span: self.span() });
            }
            other => {
                return Err(self.error(ParseErrorKind::UnknownKeyword, first.column, format!("unknown keyword `{other}`: {KEYWORDS}")))
            }
        }
        Ok(())
    }

    fn parse_practice(&mut self) -> Result<AgilePractice, ParseError> {
        let id = self.expect_id()?;
        let name = self.expect_quoted("practice name")?;
        self.expect_keyword("category")?;
        let t = self.expect_word("category")?;
        let category: Category = t.text.parse().map_err(|_| {
            let names: Vec<&str> = Category::ALL.iter().map(|c| c.as_str()).collect();
            self.error(
                ParseErrorKind::Syntax,
                t.column,
                format!("unknown category `{}`: expected one of {}", t.text, names.join(", ")),
            )
        })?;
        let mut practice = AgilePractice::new(id, name, category);

        let mut seen: Vec<String> = Vec::new();
        while let Some(t) = self.next() {
            if t.kind != TokenKind::Word {
                return Err(self.error(ParseErrorKind::Syntax, t.column, "expected a practice clause, found a quoted string"));
            }
            if t.text != "source" && seen.contains(&t.text) {
                return Err(self.error(ParseErrorKind::Syntax, t.column, format!("duplicate clause `{}`", t.text)));
            }
            seen.push(t.text.clone());
            match t.text.as_str() {
                "excluded" => {
                    practice.excluded = true;
                    practice.exclusion_reason = Some(self.expect_quoted("exclusion reason")?);
                }
                "nonspecific" => practice.non_specific = true,
                "objectives" => {
                    let list = self.expect_word("objective list (sp,po,ke)")?;
                    let mut tags = Vec::new();
                    for item in list.text.split(',') {
                        let tag: ObjectiveTag = item.parse().map_err(|_| {
                            self.error(
                                ParseErrorKind::Syntax,
                                list.column,
                                format!("unknown objective `{item}`: expected a comma-separated list of sp, po, ke"),
                            )
                        })?;
                        tags.push(tag);
                    }
                    practice = practice.with_objectives(tags);
                }
                "description" => practice.description = self.expect_quoted("description")?,
                "source" => practice.sources.push(self.expect_quoted("source")?),
                other => {
                    return Err(self.error(
                        ParseErrorKind::Syntax,
                        t.column,
                        format!("unknown practice clause `{other}`: expected excluded, nonspecific, objectives, description or source"),
                    ))
                }
            }
        }
        Ok(practice)
    }

    fn parse_relation(&mut self) -> Result<Relation, ParseError> {
        let source = self.expect_id()?;
        let verb = self.expect_word("relation verb")?;
        let (kind, bidirectional) = match verb.text.as_str() {
            "requires" => (RelationType::Requires, false),
            "specializes" => (RelationType::Specialization, false),
            "alternative-to" => (RelationType::Alternative, true),
            "supports" => {
                let both = self.peek_word() == Some("<->");
                if both {
                    self.pos += 1;
                }
                (RelationType::Support, both)
            }
            other => {
                return Err(self.error(
                    ParseErrorKind::Syntax,
                    verb.column,
                    format!("unknown relation verb `{other}`: expected requires, supports, supports <->, specializes or alternative-to"),
                ))
            }
        };
        let target = self.expect_id()?;
        self.expect_end()?;
        Ok(Relation::new(source, target, kind, bidirectional))
    }
}
