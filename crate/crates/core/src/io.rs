//! JSON bundles describing a fibration, and their export.
//!
//! A bundle names a functor kind (`identity`, `degree`, `table` or
//! `presheaf`, defaulting to `table`) together with the category documents
//! it needs. Category documents carry a `backend` tag: `explicit`, `nk`, `group`, `poset`,
//! `kgraph`, `product`, `pair_groupoid` or `trivial`.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fibration::{
    build_kgraph, build_kgraph_unchecked, build_presheaf_sections, identity_fibration, Fibration,
    FunctorMap, PresheafSpec,
};
use crate::fincat::{
    build_group_category, build_pair_groupoid, build_poset_category, product, trivial_category,
    Category, ExplicitCategory, KGraph, KGraphSpec, NkMonoid,
};
use crate::ids::{MorphismId, ObjectId};
use crate::paths::{canonical_splitting, Chooser, PathOracle};

/// A named path recorded in a bundle: a chooser growing a path into
/// `target` (the first object when absent).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedPath {
    pub target: Option<String>,
    pub chooser: String,
}

#[derive(Debug, Clone)]
pub struct Bundle {
    pub fibration: Fibration,
    pub paths: BTreeMap<String, NamedPath>,
    /// Problems tolerated while loading, such as inconsistent square data.
    pub warnings: Vec<String>,
}

impl Bundle {
    /// Builds the named path; the name `canonical` is always available.
    pub fn path(&self, name: &str, depth: usize) -> Result<PathOracle> {
        let f = &self.fibration;
        let first = || {
            f.domain()
                .objects()
                .into_iter()
                .next()
                .ok_or_else(|| Error::Precondition("the fibration has no objects".into()))
        };
        if name == "canonical" {
            return canonical_splitting(f, &first()?, depth);
        }
        let spec = self
            .paths
            .get(name)
            .ok_or_else(|| Error::Parse(format!("unknown path {name}")))?;
        let target = match &spec.target {
            Some(t) => f.domain().parse_object(t)?,
            None => first()?,
        };
        PathOracle::grown(f, &target, Chooser::parse(&spec.chooser)?)
    }
}

fn field<'a>(doc: &'a Value, key: &str, path: &str) -> Result<&'a Value> {
    doc.get(key)
        .ok_or_else(|| Error::schema(format!("{path}.{key}"), "missing field"))
}

fn string_list(v: &Value, path: &str) -> Result<Vec<String>> {
    serde_json::from_value(v.clone()).map_err(|e| Error::schema(path, e.to_string()))
}

fn string_map(v: &Value, path: &str) -> Result<BTreeMap<String, String>> {
    serde_json::from_value(v.clone()).map_err(|e| Error::schema(path, e.to_string()))
}

fn usize_field(doc: &Value, key: &str, path: &str) -> Result<usize> {
    field(doc, key, path)?
        .as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| Error::schema(format!("{path}.{key}"), "expected a non-negative integer"))
}

/// Builds a category from its document.
pub fn category_from_doc(doc: &Value, path: &str) -> Result<Category> {
    let backend = field(doc, "backend", path)?
        .as_str()
        .ok_or_else(|| Error::schema(format!("{path}.backend"), "expected a string"))?;
    match backend {
        "explicit" => explicit_from_doc(doc, path),
        "nk" => Ok(Category::new(NkMonoid::new(usize_field(doc, "k", path)?))),
        "group" => {
            let elements = match doc.get("elements") {
                Some(v) => Some(string_list(v, &format!("{path}.elements"))?),
                None => None,
            };
            let table: Vec<Vec<String>> =
                serde_json::from_value(field(doc, "table", path)?.clone())
                    .map_err(|e| Error::schema(format!("{path}.table"), e.to_string()))?;
            build_group_category(elements, table)
        }
        "poset" => {
            let elements = string_list(field(doc, "elements", path)?, &format!("{path}.elements"))?;
            let leq: Vec<(String, String)> =
                serde_json::from_value(field(doc, "leq", path)?.clone())
                    .map_err(|e| Error::schema(format!("{path}.leq"), e.to_string()))?;
            build_poset_category(elements, leq)
        }
        "kgraph" => {
            let spec: KGraphSpec = serde_json::from_value(doc.clone())
                .map_err(|e| Error::schema(path, e.to_string()))?;
            Ok(Category::new(KGraph::from_spec(spec)?))
        }
        "product" => {
            let factors = field(doc, "factors", path)?
                .as_array()
                .ok_or_else(|| Error::schema(format!("{path}.factors"), "expected an array"))?;
            let cats = factors
                .iter()
                .enumerate()
                .map(|(i, d)| category_from_doc(d, &format!("{path}.factors[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            product(cats)
        }
        "pair_groupoid" => build_pair_groupoid(usize_field(doc, "points", path)?),
        "trivial" => Ok(trivial_category()),
        other => Err(Error::schema(
            format!("{path}.backend"),
            format!("unknown backend {other}"),
        )),
    }
}

fn explicit_from_doc(doc: &Value, path: &str) -> Result<Category> {
    let objects: Vec<ObjectId> =
        string_list(field(doc, "objects", path)?, &format!("{path}.objects"))?
            .iter()
            .map(|s| ObjectId::named(s))
            .collect();
    let records = field(doc, "morphisms", path)?
        .as_array()
        .ok_or_else(|| Error::schema(format!("{path}.morphisms"), "expected an array"))?;
    let mut morphisms = Vec::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        let p = format!("{path}.morphisms[{i}]");
        let get = |k: &str| -> Result<String> {
            Ok(field(r, k, &p)?
                .as_str()
                .ok_or_else(|| Error::schema(format!("{p}.{k}"), "expected a string"))?
                .to_string())
        };
        morphisms.push((
            MorphismId::named(&get("id")?),
            ObjectId::named(&get("src")?),
            ObjectId::named(&get("tgt")?),
        ));
    }
    let triples: Vec<[String; 3]> = match doc.get("composition") {
        Some(v) => serde_json::from_value(v.clone())
            .map_err(|e| Error::schema(format!("{path}.composition"), e.to_string()))?,
        None => Vec::new(),
    };
    let composition = triples
        .iter()
        .map(|[f, g, fg]| {
            (
                MorphismId::named(f),
                MorphismId::named(g),
                MorphismId::named(fg),
            )
        })
        .collect();
    let identities = string_map(
        field(doc, "identities", path)?,
        &format!("{path}.identities"),
    )?
    .into_iter()
    .map(|(x, m)| (ObjectId::named(&x), MorphismId::named(&m)))
    .collect();
    Ok(Category::new(ExplicitCategory::new(
        objects,
        morphisms,
        composition,
        identities,
    )?))
}

fn parse_paths(doc: &Value) -> Result<BTreeMap<String, NamedPath>> {
    let mut out = BTreeMap::new();
    let Some(paths) = doc.get("paths") else {
        return Ok(out);
    };
    let obj = paths
        .as_object()
        .ok_or_else(|| Error::schema("paths", "expected an object"))?;
    for (name, spec) in obj {
        let p = format!("paths.{name}");
        let named = match spec {
            Value::String(c) => NamedPath {
                target: None,
                chooser: c.clone(),
            },
            Value::Object(_) => NamedPath {
                target: spec
                    .get("target")
                    .and_then(Value::as_str)
                    .map(str::to_string),
                chooser: field(spec, "chooser", &p)?
                    .as_str()
                    .ok_or_else(|| Error::schema(format!("{p}.chooser"), "expected a string"))?
                    .to_string(),
            },
            _ => return Err(Error::schema(p, "expected a chooser string or object")),
        };
        Chooser::parse(&named.chooser)?;
        out.insert(name.clone(), named);
    }
    Ok(out)
}

fn table_fibration(doc: &Value, name: &str) -> Result<Fibration> {
    let domain = category_from_doc(field(doc, "domain", "")?, "domain")?;
    let codomain = category_from_doc(field(doc, "codomain", "")?, "codomain")?;
    let mut objects = BTreeMap::new();
    for (x, y) in string_map(field(doc, "object_map", "")?, "object_map")? {
        objects.insert(domain.parse_object(&x)?, codomain.parse_object(&y)?);
    }
    let mut morphisms = BTreeMap::new();
    for (m, n) in string_map(field(doc, "morphism_map", "")?, "morphism_map")? {
        morphisms.insert(domain.parse_morphism(&m)?, codomain.parse_morphism(&n)?);
    }
    // Identities map to identities unless listed otherwise.
    for x in domain.objects() {
        if let Some(y) = objects.get(&x) {
            let id = domain.identity(&x)?;
            if let std::collections::btree_map::Entry::Vacant(slot) = morphisms.entry(id) {
                slot.insert(codomain.identity(y)?);
            }
        }
    }
    Ok(Fibration::new(
        name,
        domain,
        codomain,
        FunctorMap::Table { objects, morphisms },
    )
    .with_doc(doc.clone()))
}

/// Loads a bundle from its JSON document.
pub fn load_bundle(doc: &Value) -> Result<Bundle> {
    let name = doc
        .get("name")
        .and_then(Value::as_str)
        .unwrap_or("fibration")
        .to_string();
    // Bundles without a functor tag give the functor by its tables.
    let functor = match doc.get("functor") {
        Some(v) => v
            .as_str()
            .ok_or_else(|| Error::schema("functor", "expected a string"))?,
        None => "table",
    };
    let mut warnings = Vec::new();
    let fibration = match functor {
        "identity" => identity_fibration(
            category_from_doc(field(doc, "domain", "")?, "domain")?,
            &name,
        ),
        "degree" => {
            let d = field(doc, "domain", "")?;
            let spec: KGraphSpec = serde_json::from_value(d.clone())
                .map_err(|e| Error::schema("domain", e.to_string()))?;
            match build_kgraph(spec.clone()) {
                Ok(f) => f,
                Err(Error::InconsistentSquares(msg)) => {
                    warnings.push(format!("loaded without the factorization check: {msg}"));
                    build_kgraph_unchecked(spec)?
                }
                Err(e) => return Err(e),
            }
        }
        "table" => table_fibration(doc, &name)?,
        "presheaf" => {
            let spec: PresheafSpec = serde_json::from_value(field(doc, "presheaf", "")?.clone())
                .map_err(|e| Error::schema("presheaf", e.to_string()))?;
            build_presheaf_sections(spec)?
        }
        other => {
            return Err(Error::schema(
                "functor",
                format!("unknown functor kind {other}"),
            ))
        }
    };
    let mut exported = doc.clone();
    exported["name"] = json!(name);
    Ok(Bundle {
        fibration: fibration.with_name(&name).with_doc(exported),
        paths: parse_paths(doc)?,
        warnings,
    })
}

pub fn load_bundle_str(text: &str) -> Result<Bundle> {
    load_bundle(&serde_json::from_str(text)?)
}

pub fn load_bundle_file(path: &Path) -> Result<Bundle> {
    load_bundle_str(&std::fs::read_to_string(path)?)
}

/// The bundle document of a fibration. Fibrations built without a document
/// are exported through the table functor.
pub fn export_bundle(f: &Fibration) -> Result<Value> {
    if let Some(doc) = f.doc() {
        let mut doc = doc.clone();
        doc["name"] = json!(f.name());
        return Ok(doc);
    }
    let FunctorMap::Table { objects, morphisms } = f.map() else {
        return Err(Error::Precondition(format!(
            "{} has no recorded document to export",
            f.name()
        )));
    };
    let object_map: BTreeMap<String, String> = objects
        .iter()
        .map(|(x, y)| (x.to_string(), y.to_string()))
        .collect();
    let morphism_map: BTreeMap<String, String> = morphisms
        .iter()
        .map(|(x, y)| (x.to_string(), y.to_string()))
        .collect();
    Ok(json!({
        "name": f.name(),
        "functor": "table",
        "domain": f.domain().to_doc(),
        "codomain": f.codomain().to_doc(),
        "object_map": object_map,
        "morphism_map": morphism_map,
    }))
}

/// A catalog name or the path of a bundle file.
pub fn resolve(name_or_path: &str) -> Result<Bundle> {
    if let Some(b) = crate::catalog::bundle(name_or_path) {
        return b;
    }
    let path = Path::new(name_or_path);
    if path.exists() {
        return load_bundle_file(path);
    }
    Err(Error::Io(format!(
        "{name_or_path} is neither a catalog entry nor a readable file"
    )))
}
