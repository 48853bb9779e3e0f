//! The bundled example fibrations.

use std::collections::BTreeMap;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::fibration::{build_kgraph, Fibration};
use crate::fincat::kgraph::EdgeSpec;
use crate::fincat::KGraphSpec;
use crate::io::{load_bundle_str, Bundle};

const ENTRIES: &[(&str, &str, &str)] = &[
    (
        "o2",
        "Cuntz graph with one vertex and two loops",
        include_str!("../data/o2.json"),
    ),
    (
        "o3",
        "Cuntz graph with one vertex and three loops",
        include_str!("../data/o3.json"),
    ),
    (
        "2-graph",
        "one vertex, two blue and two red loops, flip squares",
        include_str!("../data/2-graph.json"),
    ),
    (
        "2-graph-commuting",
        "one vertex, one blue and one red loop that commute",
        include_str!("../data/2-graph-commuting.json"),
    ),
    (
        "z2",
        "identity functor on the cyclic group of order 2",
        include_str!("../data/z2.json"),
    ),
    (
        "z3",
        "identity functor on the cyclic group of order 3",
        include_str!("../data/z3.json"),
    ),
    (
        "s3",
        "identity functor on the symmetric group on 3 letters",
        include_str!("../data/s3.json"),
    ),
    (
        "chain-sections",
        "sections of a presheaf on the chain 0 <= 1 <= 2",
        include_str!("../data/chain-sections.json"),
    ),
    (
        "pair-groupoid-3",
        "identity functor on the pair groupoid of 3 points",
        include_str!("../data/pair-groupoid-3.json"),
    ),
];

pub fn names() -> Vec<&'static str> {
    ENTRIES.iter().map(|(n, _, _)| *n).collect()
}

/// `(name, description)` for every bundled example.
pub fn descriptions() -> Vec<(&'static str, &'static str)> {
    ENTRIES.iter().map(|(n, d, _)| (*n, *d)).collect()
}

/// The raw JSON of a bundled example.
pub fn source(name: &str) -> Option<&'static str> {
    ENTRIES
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|(_, _, s)| *s)
}

fn cache() -> &'static Mutex<BTreeMap<String, Bundle>> {
    static CACHE: OnceLock<Mutex<BTreeMap<String, Bundle>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(BTreeMap::new()))
}

/// Loads a bundled example once per process, so that repeated lookups
/// return the same fibration and share its caches.
pub(crate) fn bundle(name: &str) -> Option<Result<Bundle>> {
    let text = source(name)?;
    let mut cache = cache().lock().expect("catalog cache poisoned");
    if let Some(b) = cache.get(name) {
        return Some(Ok(b.clone()));
    }
    Some(load_bundle_str(text).map(|b| cache.entry(name.to_string()).or_insert(b).clone()))
}

pub fn load(name: &str) -> Result<Bundle> {
    bundle(name).unwrap_or_else(|| Err(Error::Parse(format!("no bundled example named {name}"))))
}

pub fn by_name(name: &str) -> Result<Fibration> {
    Ok(load(name)?.fibration)
}

/// The Cuntz graph `O_n`: one vertex `v` with loops `e1, ..., en`. The
/// bundled `o2` and `o3` are returned for those ranks.
pub fn o_n(n: usize) -> Result<Fibration> {
    if let Some(b) = bundle(&format!("o{n}")) {
        return Ok(b?.fibration);
    }
    let edges = (1..=n)
        .map(|i| EdgeSpec {
            id: format!("e{i}"),
            src: "v".into(),
            tgt: "v".into(),
            color: 0,
        })
        .collect();
    Ok(build_kgraph(KGraphSpec {
        k: Some(1),
        vertices: vec!["v".into()],
        edges,
        squares: Vec::new(),
    })?
    .with_name(&format!("o{n}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_loads_as_a_kpf() {
        for name in names() {
            let b = load(name).unwrap();
            assert!(b.warnings.is_empty(), "{name}");
            let flags = b.fibration.flags(2);
            assert!(flags.is_kpf(), "{name}: {flags:?}");
            assert!(flags.row_finite && flags.strongly_surjective, "{name}");
        }
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(load("o9"), Err(Error::Parse(_))));
    }
}
