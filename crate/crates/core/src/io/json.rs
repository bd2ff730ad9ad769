//! JSON graph export; the same document is served by `GET /api/map`.

use serde::Serialize;

use crate::map::{AgileMap, MapMetadata};
use crate::model::{AgilePractice, Relation};

pub const JSON_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct JsonGraph<'a> {
    schema_version: u32,
    metadata: &'a MapMetadata,
    practices: Vec<&'a AgilePractice>,
    relations: &'a [Relation],
}

pub fn export_json_graph(map: &AgileMap) -> String {
    let graph = JsonGraph {
        schema_version: JSON_SCHEMA_VERSION,
        metadata: map.metadata(),
        practices: map.practices().collect(),
        relations: map.relations(),
    };
    serde_json::to_string(&graph).expect("map serializes to JSON")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_map() {
        assert_eq!(
            export_json_graph(&AgileMap::empty()),
            r#"{"schemaVersion":1,"metadata":{"name":"","version":"","notes":[],"full":false},"practices":[],"relations":[]}"#
        );
    }
}
