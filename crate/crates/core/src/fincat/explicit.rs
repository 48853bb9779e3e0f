//! Finite categories given by an explicit composition table.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde_json::json;

use super::{Category, CategoryBackend, Completion};
use crate::error::{Error, Result};
use crate::ids::{MorphismId, ObjectId};

#[derive(Debug, Clone)]
pub struct ExplicitCategory {
    objects: Vec<ObjectId>,
    morphisms: BTreeMap<MorphismId, (ObjectId, ObjectId)>,
    identities: BTreeMap<ObjectId, MorphismId>,
    table: HashMap<(MorphismId, MorphismId), MorphismId>,
    inverses: Option<BTreeMap<MorphismId, MorphismId>>,
    doc: Option<serde_json::Value>,
}

impl ExplicitCategory {
    /// Builds a table-backed category. Composites involving identities are
    /// filled in automatically; every other composable pair must appear in
    /// `composition` for the category to pass validation.
    pub fn new(
        objects: Vec<ObjectId>,
        morphisms: Vec<(MorphismId, ObjectId, ObjectId)>,
        composition: Vec<(MorphismId, MorphismId, MorphismId)>,
        identities: BTreeMap<ObjectId, MorphismId>,
    ) -> Result<Self> {
        let mut objects = objects;
        objects.sort();
        objects.dedup();
        let object_set: BTreeSet<&ObjectId> = objects.iter().collect();
        let mut table_m = BTreeMap::new();
        for (id, src, tgt) in morphisms {
            for x in [&src, &tgt] {
                if !object_set.contains(x) {
                    return Err(Error::unknown_object(x));
                }
            }
            if table_m.insert(id.clone(), (src, tgt)).is_some() {
                return Err(Error::schema(
                    "morphisms",
                    format!("duplicate morphism {id}"),
                ));
            }
        }
        for x in &objects {
            let id = identities.get(x).ok_or_else(|| {
                Error::schema("identities", format!("object {x} has no identity"))
            })?;
            match table_m.get(id) {
                Some((s, t)) if s == x && t == x => {}
                Some(_) => {
                    return Err(Error::schema(
                        "identities",
                        format!("identity {id} is not an endomorphism of {x}"),
                    ))
                }
                None => return Err(Error::unknown_morphism(id)),
            }
        }
        let mut table = HashMap::new();
        for (f, g, fg) in composition {
            for m in [&f, &g, &fg] {
                if !table_m.contains_key(m) {
                    return Err(Error::unknown_morphism(m));
                }
            }
            if table_m[&f].0 != table_m[&g].1 {
                return Err(Error::not_composable(&f, &g));
            }
            table.insert((f, g), fg);
        }
        for (m, (src, tgt)) in &table_m {
            table
                .entry((identities[tgt].clone(), m.clone()))
                .or_insert_with(|| m.clone());
            table
                .entry((m.clone(), identities[src].clone()))
                .or_insert_with(|| m.clone());
        }
        Ok(ExplicitCategory {
            objects,
            morphisms: table_m,
            identities,
            table,
            inverses: None,
            doc: None,
        })
    }

    pub fn with_doc(mut self, doc: serde_json::Value) -> Self {
        self.doc = Some(doc);
        self
    }

    /// The composition table as `(f, g, fg)` triples, sorted.
    pub fn composition_entries(&self) -> Vec<(MorphismId, MorphismId, MorphismId)> {
        let mut out: Vec<_> = self
            .table
            .iter()
            .map(|((f, g), fg)| (f.clone(), g.clone(), fg.clone()))
            .collect();
        out.sort();
        out
    }

    /// Overwrites one table entry. Used to construct invalid tables in tests
    /// and fixtures.
    pub fn set_composite(&mut self, f: &MorphismId, g: &MorphismId, fg: &MorphismId) {
        self.table.insert((f.clone(), g.clone()), fg.clone());
        self.doc = None;
    }

    pub fn morphism_records(&self) -> Vec<(MorphismId, ObjectId, ObjectId)> {
        self.morphisms
            .iter()
            .map(|(m, (s, t))| (m.clone(), s.clone(), t.clone()))
            .collect()
    }

    fn explicit_doc(&self) -> serde_json::Value {
        let morphisms: Vec<_> = self
            .morphisms
            .iter()
            .map(|(m, (s, t))| json!({"id": m.to_string(), "src": s.to_string(), "tgt": t.to_string()}))
            .collect();
        let composition: Vec<_> = self
            .composition_entries()
            .into_iter()
            .map(|(f, g, fg)| json!([f.to_string(), g.to_string(), fg.to_string()]))
            .collect();
        let identities: BTreeMap<String, String> = self
            .identities
            .iter()
            .map(|(x, m)| (x.to_string(), m.to_string()))
            .collect();
        json!({
            "backend": "explicit",
            "objects": self.objects.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "morphisms": morphisms,
            "composition": composition,
            "identities": identities,
        })
    }
}

impl CategoryBackend for ExplicitCategory {
    fn kind(&self) -> &'static str {
        "explicit"
    }

    fn objects(&self) -> Vec<ObjectId> {
        self.objects.clone()
    }

    fn has_object(&self, x: &ObjectId) -> bool {
        self.identities.contains_key(x)
    }

    fn contains(&self, m: &MorphismId) -> bool {
        self.morphisms.contains_key(m)
    }

    fn source(&self, m: &MorphismId) -> Result<ObjectId> {
        self.morphisms
            .get(m)
            .map(|(s, _)| s.clone())
            .ok_or_else(|| Error::unknown_morphism(m))
    }

    fn target(&self, m: &MorphismId) -> Result<ObjectId> {
        self.morphisms
            .get(m)
            .map(|(_, t)| t.clone())
            .ok_or_else(|| Error::unknown_morphism(m))
    }

    fn identity(&self, x: &ObjectId) -> Result<MorphismId> {
        self.identities
            .get(x)
            .cloned()
            .ok_or_else(|| Error::unknown_object(x))
    }

    fn compose_unchecked(&self, a: &MorphismId, b: &MorphismId) -> Result<MorphismId> {
        self.table
            .get(&(a.clone(), b.clone()))
            .cloned()
            .ok_or_else(|| Error::CompositionUndefined {
                left: a.to_string(),
                right: b.to_string(),
            })
    }

    fn level(&self, m: &MorphismId) -> usize {
        match self.morphisms.get(m) {
            Some((s, _)) if self.identities.get(s) == Some(m) => 0,
            _ => 1,
        }
    }

    fn morphisms_into(&self, x: &ObjectId, max_level: usize) -> Vec<MorphismId> {
        self.morphisms
            .iter()
            .filter(|(m, (_, t))| t == x && self.level(m) <= max_level)
            .map(|(m, _)| m.clone())
            .collect()
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn parse_morphism(&self, s: &str) -> Result<MorphismId> {
        let m = MorphismId::named(s.trim());
        if self.contains(&m) {
            Ok(m)
        } else {
            Err(Error::UnknownMorphism(s.trim().to_string()))
        }
    }

    fn to_doc(&self) -> serde_json::Value {
        self.doc.clone().unwrap_or_else(|| self.explicit_doc())
    }

    fn ore_hint(&self, m: &MorphismId, n: &MorphismId) -> Option<Result<Completion>> {
        let inv = self.inverses.as_ref()?;
        let p = self.compose_unchecked(inv.get(m)?, n);
        let q = self.identity(&ObjectId::Star);
        Some(p.and_then(|p| Ok((p, q?))))
    }

    fn known_cancellative(&self) -> Option<(bool, bool)> {
        self.inverses.as_ref().map(|_| (true, true))
    }
}

/// One-object category of a finite group. `table[i][j]` is the product
/// `elements[i] * elements[j]`; `elements` defaults to the first row of the
/// table.
pub fn build_group_category(
    elements: Option<Vec<String>>,
    table: Vec<Vec<String>>,
) -> Result<Category> {
    Ok(Category::new(group_backend(elements, table)?))
}

pub(crate) fn group_backend(
    elements: Option<Vec<String>>,
    table: Vec<Vec<String>>,
) -> Result<ExplicitCategory> {
    let elements = match elements {
        Some(e) => e,
        None => table
            .first()
            .cloned()
            .ok_or_else(|| Error::NotAGroup("empty table".into()))?,
    };
    let n = elements.len();
    let index: HashMap<&str, usize> = elements
        .iter()
        .enumerate()
        .map(|(i, e)| (e.as_str(), i))
        .collect();
    if index.len() != n || n == 0 {
        return Err(Error::NotAGroup(
            "elements must be distinct and nonempty".into(),
        ));
    }
    if table.len() != n || table.iter().any(|row| row.len() != n) {
        return Err(Error::NotAGroup(format!("table must be {n}x{n}")));
    }
    let mut mul = vec![vec![0usize; n]; n];
    for i in 0..n {
        for j in 0..n {
            mul[i][j] = *index.get(table[i][j].as_str()).ok_or_else(|| {
                Error::NotAGroup(format!("product {} is not an element", table[i][j]))
            })?;
        }
    }
    let e = (0..n)
        .find(|&e| (0..n).all(|j| mul[e][j] == j && mul[j][e] == j))
        .ok_or_else(|| Error::NotAGroup("no identity element".into()))?;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                    return Err(Error::NotAGroup(format!(
                        "associativity fails on ({}, {}, {})",
                        elements[a], elements[b], elements[c]
                    )));
                }
            }
        }
    }
    let mut inverses = BTreeMap::new();
    for a in 0..n {
        let inv = (0..n)
            .find(|&b| mul[a][b] == e && mul[b][a] == e)
            .ok_or_else(|| Error::NotAGroup(format!("{} has no inverse", elements[a])))?;
        inverses.insert(
            MorphismId::named(&elements[a]),
            MorphismId::named(&elements[inv]),
        );
    }
    let star = ObjectId::Star;
    let morphisms = elements
        .iter()
        .map(|g| (MorphismId::named(g), star.clone(), star.clone()))
        .collect();
    let mut composition = Vec::new();
    for i in 0..n {
        for j in 0..n {
            composition.push((
                MorphismId::named(&elements[i]),
                MorphismId::named(&elements[j]),
                MorphismId::named(&elements[mul[i][j]]),
            ));
        }
    }
    let identities = BTreeMap::from([(star.clone(), MorphismId::named(&elements[e]))]);
    let mut cat = ExplicitCategory::new(vec![star], morphisms, composition, identities)?;
    cat.inverses = Some(inverses);
    cat.doc = Some(json!({"backend": "group", "elements": elements, "table": table}));
    Ok(cat)
}

/// The cyclic group Z/n with elements named `0..n`.
pub fn cyclic_group(n: usize) -> Result<Category> {
    let elements: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let table = (0..n)
        .map(|i| (0..n).map(|j| ((i + j) % n).to_string()).collect())
        .collect();
    build_group_category(Some(elements), table)
}

/// The symmetric group on three letters, elements named by one-line notation.
pub fn symmetric_group_3() -> Result<Category> {
    let perms: Vec<[usize; 3]> = vec![
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let name = |p: &[usize; 3]| format!("s{}{}{}", p[0], p[1], p[2]);
    let elements: Vec<String> = perms.iter().map(name).collect();
    // (p q)(i) = p(q(i)): apply q first, matching composition of functions.
    let table = perms
        .iter()
        .map(|p| {
            perms
                .iter()
                .map(|q| name(&[p[q[0]], p[q[1]], p[q[2]]]))
                .collect()
        })
        .collect();
    build_group_category(Some(elements), table)
}

/// The poset category of `(elements, leq)`: one morphism `p<=q` from `p` to
/// `q` whenever `p <= q` in the reflexive-transitive closure of `leq`.
pub fn build_poset_category(elements: Vec<String>, leq: Vec<(String, String)>) -> Result<Category> {
    Ok(Category::new(poset_backend(elements, leq)?))
}

pub(crate) fn poset_backend(
    elements: Vec<String>,
    leq: Vec<(String, String)>,
) -> Result<ExplicitCategory> {
    let mut elements = elements;
    for (a, b) in &leq {
        for x in [a, b] {
            if !elements.contains(x) {
                elements.push(x.clone());
            }
        }
    }
    elements.sort();
    elements.dedup();
    let n = elements.len();
    let idx: HashMap<&str, usize> = elements
        .iter()
        .enumerate()
        .map(|(i, e)| (e.as_str(), i))
        .collect();
    let mut rel = vec![vec![false; n]; n];
    for i in 0..n {
        rel[i][i] = true;
    }
    for (a, b) in &leq {
        rel[idx[a.as_str()]][idx[b.as_str()]] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if rel[i][k] {
                for j in 0..n {
                    if rel[k][j] {
                        rel[i][j] = true;
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && rel[i][j] && rel[j][i] {
                return Err(Error::NotAPoset(format!(
                    "{} and {} are mutually related",
                    elements[i], elements[j]
                )));
            }
        }
    }
    let arrow =
        |i: usize, j: usize| MorphismId::named(&format!("{}<={}", elements[i], elements[j]));
    let obj = |i: usize| ObjectId::named(&elements[i]);
    let mut morphisms = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if rel[i][j] {
                morphisms.push((arrow(i, j), obj(i), obj(j)));
            }
        }
    }
    let mut composition = Vec::new();
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                if rel[p][q] && rel[q][r] {
                    composition.push((arrow(q, r), arrow(p, q), arrow(p, r)));
                }
            }
        }
    }
    let identities = (0..n).map(|i| (obj(i), arrow(i, i))).collect();
    let cat = ExplicitCategory::new(
        (0..n).map(obj).collect(),
        morphisms,
        composition,
        identities,
    )?;
    let leq_doc: Vec<_> = leq.iter().map(|(a, b)| json!([a, b])).collect();
    Ok(cat.with_doc(json!({"backend": "poset", "elements": elements, "leq": leq_doc})))
}

/// The pair groupoid on `n` points: one morphism `g{i}{j}` from `p{j}` to
/// `p{i}` for every ordered pair.
pub fn build_pair_groupoid(n: usize) -> Result<Category> {
    let obj = |i: usize| ObjectId::named(&format!("p{i}"));
    let arrow = |i: usize, j: usize| MorphismId::named(&format!("g{i}{j}"));
    let mut morphisms = Vec::new();
    let mut composition = Vec::new();
    for i in 0..n {
        for j in 0..n {
            morphisms.push((arrow(i, j), obj(j), obj(i)));
            for k in 0..n {
                composition.push((arrow(i, j), arrow(j, k), arrow(i, k)));
            }
        }
    }
    let identities = (0..n).map(|i| (obj(i), arrow(i, i))).collect();
    let cat = ExplicitCategory::new(
        (0..n).map(obj).collect(),
        morphisms,
        composition,
        identities,
    )?;
    Ok(Category::new(cat.with_doc(
        json!({"backend": "pair_groupoid", "points": n}),
    )))
}

/// The category with one object and only its identity.
pub fn trivial_category() -> Category {
    let star = ObjectId::Star;
    let id = MorphismId::named("1");
    let cat = ExplicitCategory::new(
        vec![star.clone()],
        vec![(id.clone(), star.clone(), star.clone())],
        vec![],
        BTreeMap::from([(star, id)]),
    )
    .expect("trivial category is well formed");
    Category::new(cat)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(s: &str) -> MorphismId {
        MorphismId::named(s)
    }

    #[test]
    fn poset_composition_follows_order() {
        let c = build_poset_category(
            vec!["0".into(), "1".into(), "2".into()],
            vec![("0".into(), "1".into()), ("1".into(), "2".into())],
        )
        .unwrap();
        assert_eq!(c.morphisms(1).len(), 6);
        assert_eq!(c.compose(&m("1<=2"), &m("0<=1")).unwrap(), m("0<=2"));
        assert!(c.compose(&m("0<=1"), &m("1<=2")).is_err());
    }

    #[test]
    fn antichain_and_cycle() {
        let c = build_poset_category(vec!["a".into(), "b".into()], vec![]).unwrap();
        assert_eq!(c.morphisms(1).len(), 2);
        let err = build_poset_category(
            vec![],
            vec![("a".into(), "b".into()), ("b".into(), "a".into())],
        );
        assert!(matches!(err, Err(Error::NotAPoset(_))));
    }

    #[test]
    fn groups_are_checked() {
        let s3 = symmetric_group_3().unwrap();
        assert_eq!(s3.morphisms(1).len(), 6);
        let a = m("s102");
        let b = m("s021");
        assert_ne!(s3.compose(&a, &b).unwrap(), s3.compose(&b, &a).unwrap());
        let broken = build_group_category(
            None,
            vec![vec!["e".into(), "g".into()], vec!["g".into(), "g".into()]],
        );
        assert!(matches!(broken, Err(Error::NotAGroup(_))));
        let z2 = cyclic_group(2).unwrap();
        assert_eq!(z2.morphisms(1).len(), 2);
    }

    #[test]
    fn identity_laws_hold() {
        let c = cyclic_group(3).unwrap();
        let e = c.identity(&ObjectId::Star).unwrap();
        for g in c.morphisms(1) {
            assert_eq!(c.compose(&e, &g).unwrap(), g);
            assert_eq!(c.compose(&g, &e).unwrap(), g);
        }
    }

    #[test]
    fn pair_groupoid_shape() {
        let c = build_pair_groupoid(3).unwrap();
        assert_eq!(c.morphisms(1).len(), 9);
        assert_eq!(c.compose(&m("g01"), &m("g12")).unwrap(), m("g02"));
    }
}
