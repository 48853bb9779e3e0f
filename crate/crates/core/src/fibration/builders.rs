//! Constructors for the standard fibrations: k-graph degree functors,
//! identity functors and presheaf section categories over posets.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{check_dcf, ore, Fibration, FunctorMap, SplittingWitness};
use crate::error::{Error, Result};
use crate::fincat::explicit::poset_backend;
use crate::fincat::{Category, ExplicitCategory, KGraph, KGraphSpec, NkMonoid};
use crate::ids::{MorphismId, ObjectId};

fn degree_fibration(graph: KGraph, name: &str) -> Fibration {
    let k = graph.rank();
    let doc = json!({"name": name, "functor": "degree", "domain": crate::fincat::CategoryBackend::to_doc(&graph)});
    Fibration::assemble(
        name,
        Category::new(graph),
        Category::new(NkMonoid::new(k)),
        FunctorMap::Degree {
            coordinates: (0..k).collect(),
            rank: k,
        },
        SplittingWitness::MinLex,
        Some(doc),
    )
}

/// The degree functor of a k-graph, with the unique factorization property
/// verified on every path of degree at most `(1, ..., 1)`.
pub fn build_kgraph(spec: KGraphSpec) -> Result<Fibration> {
    let graph = KGraph::from_spec(spec)?;
    if let Some(d) = graph.duplicate_squares().first() {
        return Err(Error::InconsistentSquares(format!(
            "the pair {d} appears in more than one square"
        )));
    }
    let trial = degree_fibration(graph.clone(), "kgraph");
    let outcome = check_dcf(&trial, 1);
    if let Some(cx) = outcome.counterexample {
        return Err(Error::InconsistentSquares(format!(
            "{} has {} factorizations over ({}, {})",
            cx.phi, cx.lifts, cx.lambda, cx.rho
        )));
    }
    Ok(degree_fibration(graph.into_certified(), "kgraph"))
}

/// The degree functor of a k-graph without the unique factorization check,
/// so that invalid square data can be loaded and diagnosed by `check_dcf`.
pub fn build_kgraph_unchecked(spec: KGraphSpec) -> Result<Fibration> {
    Ok(degree_fibration(KGraph::from_spec(spec)?, "kgraph"))
}

/// The identity functor on a category.
pub fn identity_fibration(cat: Category, name: &str) -> Fibration {
    let doc = json!({"name": name, "functor": "identity", "domain": cat.to_doc()});
    Fibration::assemble(
        name,
        cat.clone(),
        cat,
        FunctorMap::Identity,
        SplittingWitness::Unique,
        Some(doc),
    )
}

/// A presheaf of finite sets on a finite poset. `restrictions` lists, for
/// each strict relation `V <= U`, the map from sections over `U` to sections
/// over `V`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct PresheafSpec {
    pub elements: Vec<String>,
    pub leq: Vec<(String, String)>,
    pub sections: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub restrictions: Vec<Restriction>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct Restriction {
    /// The smaller element.
    pub to: String,
    /// The larger element.
    pub from: String,
    pub map: BTreeMap<String, String>,
}

fn section_object(u: &str, a: &str) -> ObjectId {
    ObjectId::named(&format!("{u}:{a}"))
}

fn section_arrow(v: &str, b: &str, u: &str, a: &str) -> MorphismId {
    MorphismId::named(&format!("{v}:{b}<={u}:{a}"))
}

/// The category of sections `(U, a)`, with one morphism `(V, a|V) -> (U, a)`
/// for each `V <= U`, and its projection onto the base poset.
pub fn build_presheaf_sections(spec: PresheafSpec) -> Result<Fibration> {
    let base_backend = poset_backend(spec.elements.clone(), spec.leq.clone())?;
    let base_cat = Category::new(base_backend.clone());
    let report = ore::check_ore(&base_cat, 1);
    if !report.right_ore {
        return Err(Error::BaseNotOre(
            report
                .ore_counterexample
                .map(|v| v.to_string())
                .unwrap_or_default(),
        ));
    }
    let elements: Vec<String> = base_cat.objects().iter().map(|x| x.to_string()).collect();
    let mut pairs: BTreeSet<(String, String)> = BTreeSet::new();
    for (_, s, t) in base_backend.morphism_records() {
        if s != t {
            pairs.insert((s.to_string(), t.to_string()));
        }
    }
    let stalk = |u: &str| -> Vec<String> { spec.sections.get(u).cloned().unwrap_or_default() };
    let mut res: BTreeMap<(String, String), BTreeMap<String, String>> = BTreeMap::new();
    for r in &spec.restrictions {
        if !pairs.contains(&(r.to.clone(), r.from.clone())) {
            return Err(Error::NonFunctorialRestriction(format!(
                "{} <= {} is not a strict relation of the base",
                r.to, r.from
            )));
        }
        for a in stalk(&r.from) {
            match r.map.get(&a) {
                Some(b) if stalk(&r.to).contains(b) => {}
                _ => {
                    return Err(Error::NonFunctorialRestriction(format!(
                        "restriction from {} to {} is not a map on sections at {a}",
                        r.from, r.to
                    )))
                }
            }
        }
        res.insert((r.to.clone(), r.from.clone()), r.map.clone());
    }
    for (v, u) in &pairs {
        if !res.contains_key(&(v.clone(), u.clone())) {
            return Err(Error::NonFunctorialRestriction(format!(
                "no restriction from {u} to {v}"
            )));
        }
    }
    let restrict = |v: &str, u: &str, a: &str| -> String {
        if v == u {
            a.to_string()
        } else {
            res[&(v.to_string(), u.to_string())][a].clone()
        }
    };
    for (w, v) in &pairs {
        for (v2, u) in &pairs {
            if v != v2 {
                continue;
            }
            for a in stalk(u) {
                let direct = restrict(w, u, &a);
                let stepwise = restrict(w, v, &restrict(v, u, &a));
                if direct != stepwise {
                    return Err(Error::NonFunctorialRestriction(format!(
                        "restricting {a} from {u} to {w} directly gives {direct} but through {v} gives {stepwise}"
                    )));
                }
            }
        }
    }

    let leq = |v: &str, u: &str| v == u || pairs.contains(&(v.to_string(), u.to_string()));
    let mut objects = Vec::new();
    let mut object_map = BTreeMap::new();
    let mut identities = BTreeMap::new();
    let mut morphism_map = BTreeMap::new();
    // (lower element, lower section, upper element, upper section)
    let mut arrows: Vec<(String, String, String, String)> = Vec::new();
    for u in &elements {
        for a in stalk(u) {
            let x = section_object(u, &a);
            objects.push(x.clone());
            object_map.insert(x.clone(), ObjectId::named(u));
            identities.insert(x, section_arrow(u, &a, u, &a));
            for v in &elements {
                if leq(v, u) {
                    let b = restrict(v, u, &a);
                    morphism_map.insert(
                        section_arrow(v, &b, u, &a),
                        MorphismId::named(&format!("{v}<={u}")),
                    );
                    arrows.push((v.clone(), b, u.clone(), a.clone()));
                }
            }
        }
    }
    let morphisms = arrows
        .iter()
        .map(|(v, b, u, a)| {
            (
                section_arrow(v, b, u, a),
                section_object(v, b),
                section_object(u, a),
            )
        })
        .collect();
    let mut composition = Vec::new();
    for (v, b, u, a) in &arrows {
        for (w, c, v2, b2) in &arrows {
            if v == v2 && b == b2 {
                composition.push((
                    section_arrow(v, b, u, a),
                    section_arrow(w, c, v, b),
                    section_arrow(w, c, u, a),
                ));
            }
        }
    }
    let doc_sections = json!({
        "backend": "presheaf",
        "elements": spec.elements,
        "leq": spec.leq,
        "sections": spec.sections,
        "restrictions": spec.restrictions,
    });
    let total = ExplicitCategory::new(objects, morphisms, composition, identities)?;
    let name = "sections";
    Ok(Fibration::assemble(
        name,
        Category::new(total),
        base_cat,
        FunctorMap::Table {
            objects: object_map,
            morphisms: morphism_map,
        },
        SplittingWitness::Restriction,
        Some(json!({"name": name, "functor": "presheaf", "presheaf": doc_sections})),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::kgraph::EdgeSpec;

    fn loops(colors: &[(&str, usize)]) -> Vec<EdgeSpec> {
        colors
            .iter()
            .map(|(id, c)| EdgeSpec {
                id: id.to_string(),
                src: "v".into(),
                tgt: "v".into(),
                color: *c,
            })
            .collect()
    }

    fn sq(a: &str, b: &str, c: &str, d: &str) -> [String; 4] {
        [a.into(), b.into(), c.into(), d.into()]
    }

    #[test]
    fn commuting_two_graph_has_singleton_fibers() {
        let f = build_kgraph(KGraphSpec {
            k: Some(2),
            vertices: vec!["v".into()],
            edges: loops(&[("f", 0), ("e", 1)]),
            squares: vec![sq("f", "e", "e", "f")],
        })
        .unwrap();
        let v = ObjectId::named("v");
        for m in 0..3 {
            for n in 0..3 {
                assert_eq!(
                    f.enumerate_fiber(&v, &MorphismId::degree(&[m, n]))
                        .unwrap()
                        .len(),
                    1
                );
            }
        }
    }

    #[test]
    fn non_bijective_squares_are_rejected() {
        let bad = KGraphSpec {
            k: Some(2),
            vertices: vec!["v".into()],
            edges: loops(&[("b1", 0), ("b2", 0), ("r1", 1)]),
            squares: vec![sq("b1", "r1", "r1", "b1"), sq("b2", "r1", "r1", "b1")],
        };
        assert!(matches!(
            build_kgraph(bad),
            Err(Error::InconsistentSquares(_))
        ));
        let missing = KGraphSpec {
            k: Some(2),
            vertices: vec!["v".into()],
            edges: loops(&[("b1", 0), ("r1", 1)]),
            squares: vec![],
        };
        assert!(matches!(
            build_kgraph(missing),
            Err(Error::InconsistentSquares(_))
        ));
    }

    fn chain_spec(restrict: &[(&str, &str)]) -> PresheafSpec {
        PresheafSpec {
            elements: vec!["0".into(), "1".into()],
            leq: vec![("0".into(), "1".into())],
            sections: BTreeMap::from([
                ("0".into(), vec!["a".into(), "b".into()]),
                ("1".into(), vec!["a".into(), "b".into()]),
            ]),
            restrictions: vec![Restriction {
                to: "0".into(),
                from: "1".into(),
                map: restrict
                    .iter()
                    .map(|(x, y)| (x.to_string(), y.to_string()))
                    .collect(),
            }],
        }
    }

    #[test]
    fn two_element_stalks_over_a_chain_pass_dcf() {
        let f = build_presheaf_sections(chain_spec(&[("a", "a"), ("b", "b")])).unwrap();
        assert!(check_dcf(&f, 1).passed);
        assert_eq!(f.domain().morphisms(1).len(), 6);
    }

    #[test]
    fn constant_presheaf_is_the_base() {
        let spec = PresheafSpec {
            elements: vec!["0".into(), "1".into(), "2".into()],
            leq: vec![("0".into(), "1".into()), ("1".into(), "2".into())],
            sections: ["0", "1", "2"]
                .iter()
                .map(|u| (u.to_string(), vec!["s".into()]))
                .collect(),
            restrictions: [("0", "1"), ("1", "2"), ("0", "2")]
                .iter()
                .map(|(v, u)| Restriction {
                    to: v.to_string(),
                    from: u.to_string(),
                    map: BTreeMap::from([("s".into(), "s".into())]),
                })
                .collect(),
        };
        let f = build_presheaf_sections(spec).unwrap();
        assert_eq!(
            f.domain().morphisms(1).len(),
            f.codomain().morphisms(1).len()
        );
        assert!(check_dcf(&f, 1).passed);
    }

    #[test]
    fn incompatible_restrictions_are_rejected() {
        let spec = PresheafSpec {
            elements: vec!["0".into(), "1".into(), "2".into()],
            leq: vec![("0".into(), "1".into()), ("1".into(), "2".into())],
            sections: ["0", "1", "2"]
                .iter()
                .map(|u| (u.to_string(), vec!["a".into(), "b".into()]))
                .collect(),
            restrictions: vec![
                Restriction {
                    to: "0".into(),
                    from: "1".into(),
                    map: BTreeMap::from([("a".into(), "a".into()), ("b".into(), "b".into())]),
                },
                Restriction {
                    to: "1".into(),
                    from: "2".into(),
                    map: BTreeMap::from([("a".into(), "a".into()), ("b".into(), "b".into())]),
                },
                Restriction {
                    to: "0".into(),
                    from: "2".into(),
                    map: BTreeMap::from([("a".into(), "b".into()), ("b".into(), "a".into())]),
                },
            ],
        };
        assert!(matches!(
            build_presheaf_sections(spec),
            Err(Error::NonFunctorialRestriction(_))
        ));
    }

    #[test]
    fn non_ore_base_is_rejected() {
        let spec = PresheafSpec {
            elements: vec!["a".into(), "b".into(), "c".into()],
            leq: vec![("a".into(), "c".into()), ("b".into(), "c".into())],
            sections: BTreeMap::new(),
            restrictions: vec![],
        };
        assert!(matches!(
            build_presheaf_sections(spec),
            Err(Error::BaseNotOre(_))
        ));
    }
}
