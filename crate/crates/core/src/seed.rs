//! The bundled seed dataset.

use crate::io::parse_map_document;
use crate::map::AgileMap;

/// Source text of `seed/agile-map-paper.agilemap`.
pub const SEED_SOURCE: &str = include_str!("../../../seed/agile-map-paper.agilemap");

pub fn seed_map() -> AgileMap {
    parse_map_document(SEED_SOURCE)
        .expect("seed dataset parses")
        .build()
        .expect("seed dataset is a valid map")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{pid, Category};

    #[test]
    fn seed_shape() {
        let map = seed_map();
        assert_eq!(map.practices().len(), 38);
        assert_eq!(map.relations().len(), 3);
        let count = |c| map.practices().filter(|p| p.category == c).count();
        assert_eq!(
            [Category::Technical, Category::Collaboration, Category::Process, Category::Requirements, Category::Organizational]
                .map(count),
            [12, 11, 3, 7, 5]
        );
        let excluded: Vec<_> = map.practices().filter(|p| p.excluded).map(|p| p.id).collect();
        assert_eq!(excluded, vec![pid("AP11"), pid("AP16"), pid("AP23"), pid("AP35")]);
        assert_eq!(map.lookup("AP04").unwrap().name, "Collective code ownership");
    }
}
