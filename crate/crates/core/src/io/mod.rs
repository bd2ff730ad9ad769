//! File formats: the `.agilemap` text format, DOT and JSON exports.

mod dot;
mod json;
mod parse;
mod text;

pub use dot::{export_dot, DotOptions};
pub use json::{export_json_graph, JSON_SCHEMA_VERSION};
pub use parse::{
    parse_map_bytes, parse_map_document, Declared, Header, LocatedViolation, MapDocument, ParseError,
    ParseErrorKind, Span,
};
pub use text::serialize_map;
