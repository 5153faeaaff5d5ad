//! Bundled scenarios.

use crate::scenario::Scenario;
use serde::Serialize;

const SOURCES: [(&str, &str); 12] = [
    ("gluing", include_str!("../presets/gluing.json")),
    (
        "kernel-constants",
        include_str!("../presets/kernel-constants.json"),
    ),
    ("green-disk", include_str!("../presets/green-disk.json")),
    (
        "lyons-example",
        include_str!("../presets/lyons-example.json"),
    ),
    (
        "balayage-mollified",
        include_str!("../presets/balayage-mollified.json"),
    ),
    (
        "duality-round-trip",
        include_str!("../presets/duality-round-trip.json"),
    ),
    (
        "duality-bounds",
        include_str!("../presets/duality-bounds.json"),
    ),
    ("classical-pj", include_str!("../presets/classical-pj.json")),
    ("pj-presets", include_str!("../presets/pj-presets.json")),
    (
        "zeros-polynomial",
        include_str!("../presets/zeros-polynomial.json"),
    ),
    (
        "zeros-blaschke",
        include_str!("../presets/zeros-blaschke.json"),
    ),
    (
        "zeros-divergent",
        include_str!("../presets/zeros-divergent.json"),
    ),
];

/// A row of `potkit list`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PresetInfo {
    pub name: String,
    pub tags: Vec<String>,
    pub description: String,
}

pub fn names() -> impl Iterator<Item = &'static str> {
    SOURCES.iter().map(|(n, _)| *n)
}

/// The scenario text of a preset.
pub fn source(name: &str) -> Option<&'static str> {
    SOURCES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Presets in listing order, optionally restricted to a tag.
pub fn list(tag: Option<&str>) -> Vec<PresetInfo> {
    SOURCES
        .iter()
        .map(|(name, text)| {
            let sc = Scenario::parse(text, name)
                .unwrap_or_else(|e| panic!("bundled preset is invalid: {e}"));
            PresetInfo {
                name: name.to_string(),
                tags: sc.tags,
                description: sc.description,
            }
        })
        .filter(|p| tag.is_none_or(|t| p.tags.iter().any(|x| x == t)))
        .collect()
}
