//! Path categories of k-graphs presented by coloured edges and factorization
//! squares.
//!
//! A morphism is stored in normal form: a chain of edges, listed from the
//! range end, whose colours are non-decreasing. Composition concatenates and
//! then bubble-sorts adjacent out-of-order pairs through the square map.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::CategoryBackend;
use crate::error::{Error, Result};
use crate::ids::{MorphismId, ObjectId};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct EdgeSpec {
    pub id: String,
    pub src: String,
    pub tgt: String,
    pub color: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct KGraphSpec {
    #[serde(default)]
    pub k: Option<usize>,
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeSpec>,
    /// `[e, f, f2, e2]` records the relation `e f = f2 e2`, where `e` and
    /// `e2` share one colour and `f`, `f2` share another.
    #[serde(default)]
    pub squares: Vec<[String; 4]>,
}

impl KGraphSpec {
    pub fn rank(&self) -> usize {
        self.k
            .unwrap_or_else(|| self.edges.iter().map(|e| e.color + 1).max().unwrap_or(1))
    }
}

#[derive(Debug, Clone)]
struct Edge {
    src: Arc<str>,
    tgt: Arc<str>,
    color: usize,
}

type Pair = (Arc<str>, Arc<str>);

#[derive(Debug, Clone)]
pub struct KGraph {
    spec: KGraphSpec,
    k: usize,
    vertices: Vec<Arc<str>>,
    edges: BTreeMap<Arc<str>, Edge>,
    by_range: BTreeMap<(Arc<str>, usize), Vec<Arc<str>>>,
    forward: HashMap<Pair, Pair>,
    backward: HashMap<Pair, Pair>,
    duplicate_squares: Vec<String>,
    certified: bool,
}

impl KGraph {
    /// Checks the skeleton and square shapes but not the unique
    /// factorization property; see `fibration::build_kgraph` for the
    /// validated constructor.
    pub fn from_spec(spec: KGraphSpec) -> Result<Self> {
        let k = spec.rank();
        let mut vertices: Vec<Arc<str>> = spec
            .vertices
            .iter()
            .map(|v| Arc::from(v.as_str()))
            .collect();
        vertices.sort();
        vertices.dedup();
        let mut edges: BTreeMap<Arc<str>, Edge> = BTreeMap::new();
        for e in &spec.edges {
            for v in [&e.src, &e.tgt] {
                if !vertices.iter().any(|w| w.as_ref() == v) {
                    return Err(Error::DanglingEdge(e.id.clone()));
                }
            }
            if e.color >= k {
                return Err(Error::schema(
                    format!("edges.{}", e.id),
                    format!("colour {} out of range for k = {k}", e.color),
                ));
            }
            if vertices.iter().any(|v| v.as_ref() == e.id) {
                return Err(Error::schema(
                    format!("edges.{}", e.id),
                    "edge names must differ from vertex names",
                ));
            }
            let edge = Edge {
                src: Arc::from(e.src.as_str()),
                tgt: Arc::from(e.tgt.as_str()),
                color: e.color,
            };
            if edges.insert(Arc::from(e.id.as_str()), edge).is_some() {
                return Err(Error::schema("edges", format!("duplicate edge {}", e.id)));
            }
        }
        let mut by_range: BTreeMap<(Arc<str>, usize), Vec<Arc<str>>> = BTreeMap::new();
        for (id, e) in &edges {
            by_range
                .entry((e.tgt.clone(), e.color))
                .or_default()
                .push(id.clone());
        }
        let mut g = KGraph {
            spec: spec.clone(),
            k,
            vertices,
            edges,
            by_range,
            forward: HashMap::new(),
            backward: HashMap::new(),
            duplicate_squares: Vec::new(),
            certified: false,
        };
        for sq in &spec.squares {
            g.add_square(sq)?;
        }
        Ok(g)
    }

    fn edge(&self, name: &str) -> Result<(&Arc<str>, &Edge)> {
        self.edges
            .get_key_value(name)
            .ok_or_else(|| Error::InconsistentSquares(format!("unknown edge {name}")))
    }

    fn add_square(&mut self, sq: &[String; 4]) -> Result<()> {
        let (e, ee) = self.edge(&sq[0])?;
        let (f, fe) = self.edge(&sq[1])?;
        let (f2, f2e) = self.edge(&sq[2])?;
        let (e2, e2e) = self.edge(&sq[3])?;
        let shape_ok = ee.color == e2e.color
            && fe.color == f2e.color
            && ee.color != fe.color
            && ee.src == fe.tgt
            && f2e.src == e2e.tgt
            && ee.tgt == f2e.tgt
            && fe.src == e2e.src;
        if !shape_ok {
            return Err(Error::InconsistentSquares(format!(
                "square [{}, {}, {}, {}] does not have the shape of a commuting square",
                sq[0], sq[1], sq[2], sq[3]
            )));
        }
        let ef = (e.clone(), f.clone());
        let f2e2 = (f2.clone(), e2.clone());
        let (out_of_order, in_order) = if ee.color < fe.color {
            (f2e2, ef)
        } else {
            (ef, f2e2)
        };
        if self.forward.contains_key(&out_of_order) {
            self.duplicate_squares
                .push(format!("{}{}", out_of_order.0, out_of_order.1));
        } else {
            self.forward.insert(out_of_order.clone(), in_order.clone());
        }
        if let std::collections::hash_map::Entry::Vacant(slot) =
            self.backward.entry(in_order.clone())
        {
            slot.insert(out_of_order);
        } else {
            self.duplicate_squares
                .push(format!("{}{}", in_order.0, in_order.1));
        }
        Ok(())
    }

    pub fn spec(&self) -> &KGraphSpec {
        &self.spec
    }

    pub fn rank(&self) -> usize {
        self.k
    }

    pub fn certified(&self) -> bool {
        self.certified
    }

    /// Pairs named by more than one square; such data can never be a
    /// bijection.
    pub fn duplicate_squares(&self) -> &[String] {
        &self.duplicate_squares
    }

    pub(crate) fn into_certified(mut self) -> Self {
        self.certified = true;
        self
    }

    pub fn vertex_names(&self) -> Vec<String> {
        self.vertices.iter().map(|v| v.to_string()).collect()
    }

    pub fn edge_names(&self) -> Vec<String> {
        self.edges.keys().map(|e| e.to_string()).collect()
    }

    fn vertex(&self, name: &str) -> Option<&Arc<str>> {
        self.vertices.iter().find(|v| v.as_ref() == name)
    }

    fn parts<'a>(&self, m: &'a MorphismId) -> Result<(&'a Arc<str>, &'a [Arc<str>])> {
        match m {
            MorphismId::Path { range, edges } => Ok((range, edges)),
            _ => Err(Error::unknown_morphism(m)),
        }
    }

    pub fn path(&self, range: &Arc<str>, edges: Vec<Arc<str>>) -> MorphismId {
        MorphismId::Path {
            range: range.clone(),
            edges,
        }
    }

    pub fn vertex_identity(&self, v: &str) -> Result<MorphismId> {
        let v = self
            .vertex(v)
            .ok_or_else(|| Error::UnknownObject(v.to_string()))?;
        Ok(self.path(v, Vec::new()))
    }

    /// The single-edge morphism named `name`.
    pub fn edge_morphism(&self, name: &str) -> Result<MorphismId> {
        let (id, e) = self
            .edges
            .get_key_value(name)
            .ok_or_else(|| Error::UnknownMorphism(name.to_string()))?;
        Ok(self.path(&e.tgt, vec![id.clone()]))
    }

    pub fn color_of(&self, edge: &str) -> Option<usize> {
        self.edges.get(edge).map(|e| e.color)
    }

    pub fn degree(&self, m: &MorphismId) -> Result<Vec<u32>> {
        let (_, es) = self.parts(m)?;
        let mut d = vec![0u32; self.k];
        for e in es {
            let edge = self
                .edges
                .get(e)
                .ok_or_else(|| Error::unknown_morphism(m))?;
            d[edge.color] += 1;
        }
        Ok(d)
    }

    fn path_source(&self, range: &Arc<str>, edges: &[Arc<str>]) -> Result<Arc<str>> {
        match edges.last() {
            None => Ok(range.clone()),
            Some(e) => self
                .edges
                .get(e)
                .map(|e| e.src.clone())
                .ok_or_else(|| Error::UnknownMorphism(e.to_string())),
        }
    }

    fn valid_chain(&self, range: &Arc<str>, edges: &[Arc<str>]) -> bool {
        if self.vertex(range).is_none() {
            return false;
        }
        let mut cur = range.clone();
        let mut color = 0;
        for e in edges {
            match self.edges.get(e) {
                Some(edge) if edge.tgt == cur && edge.color >= color => {
                    cur = edge.src.clone();
                    color = edge.color;
                }
                _ => return false,
            }
        }
        true
    }

    fn swap(&self, x: &Arc<str>, y: &Arc<str>) -> Option<Pair> {
        let (cx, cy) = (self.edges.get(x)?.color, self.edges.get(y)?.color);
        let key = (x.clone(), y.clone());
        if cx > cy {
            self.forward.get(&key).cloned()
        } else if cx < cy {
            self.backward.get(&key).cloned()
        } else {
            None
        }
    }

    /// Sorts a chain of edges into normal form.
    pub fn normalize(&self, range: &Arc<str>, mut w: Vec<Arc<str>>) -> Result<MorphismId> {
        loop {
            let pos = w.windows(2).position(|p| {
                let c0 = self.edges.get(&p[0]).map(|e| e.color).unwrap_or(0);
                let c1 = self.edges.get(&p[1]).map(|e| e.color).unwrap_or(0);
                c0 > c1
            });
            let Some(i) = pos else { break };
            let key = (w[i].clone(), w[i + 1].clone());
            let (a, b) =
                self.forward
                    .get(&key)
                    .cloned()
                    .ok_or_else(|| Error::CompositionUndefined {
                        left: key.0.to_string(),
                        right: key.1.to_string(),
                    })?;
            w[i] = a;
            w[i + 1] = b;
        }
        Ok(self.path(range, w))
    }

    /// All normal-form paths with range `v` and degree `d`, sorted.
    pub fn paths_of_degree(&self, v: &str, d: &[u32]) -> Vec<MorphismId> {
        let Some(v) = self.vertex(v).cloned() else {
            return Vec::new();
        };
        if d.len() != self.k {
            return Vec::new();
        }
        let colors: Vec<usize> = d
            .iter()
            .enumerate()
            .flat_map(|(c, &n)| std::iter::repeat_n(c, n as usize))
            .collect();
        let mut out = Vec::new();
        let mut stack = Vec::new();
        self.dfs(&v, &colors, &mut stack, &mut out, &v);
        out
    }

    fn dfs(
        &self,
        cur: &Arc<str>,
        colors: &[usize],
        stack: &mut Vec<Arc<str>>,
        out: &mut Vec<MorphismId>,
        range: &Arc<str>,
    ) {
        let Some((&c, rest)) = colors.split_first() else {
            out.push(self.path(range, stack.clone()));
            return;
        };
        if let Some(es) = self.by_range.get(&(cur.clone(), c)) {
            for e in es {
                stack.push(e.clone());
                let src = self.edges[e].src.clone();
                self.dfs(&src, rest, stack, out, range);
                stack.pop();
            }
        }
    }

    /// Splits `m` as `outer inner` with `outer` of degree `u` by moving
    /// edges through the squares. Only meaningful once the square data has
    /// been certified to satisfy unique factorization.
    pub fn factor_at(&self, m: &MorphismId, u: &[u32]) -> Option<(MorphismId, MorphismId)> {
        let (range, es) = self.parts(m).ok()?;
        let d = self.degree(m).ok()?;
        if u.len() != self.k || u.iter().zip(&d).any(|(a, b)| a > b) {
            return None;
        }
        let mut target: Vec<usize> = Vec::with_capacity(es.len());
        for (c, &n) in u.iter().enumerate() {
            target.extend(std::iter::repeat_n(c, n as usize));
        }
        for (c, (&n, &total)) in u.iter().zip(&d).enumerate() {
            target.extend(std::iter::repeat_n(c, (total - n) as usize));
        }
        let mut w: Vec<Arc<str>> = es.to_vec();
        for i in 0..w.len() {
            let j = (i..w.len()).find(|&j| self.edges[&w[j]].color == target[i])?;
            for p in (i..j).rev() {
                let (a, b) = self.swap(&w[p], &w[p + 1])?;
                w[p] = a;
                w[p + 1] = b;
            }
        }
        let split: usize = u.iter().map(|&n| n as usize).sum();
        let outer = self.path(range, w[..split].to_vec());
        let mid = self.path_source(range, &w[..split]).ok()?;
        let inner = self.path(&mid, w[split..].to_vec());
        Some((outer, inner))
    }
}

impl CategoryBackend for KGraph {
    fn kind(&self) -> &'static str {
        "kgraph"
    }

    fn objects(&self) -> Vec<ObjectId> {
        self.vertices
            .iter()
            .map(|v| ObjectId::Named(v.clone()))
            .collect()
    }

    fn has_object(&self, x: &ObjectId) -> bool {
        matches!(x, ObjectId::Named(n) if self.vertex(n).is_some())
    }

    fn contains(&self, m: &MorphismId) -> bool {
        match m {
            MorphismId::Path { range, edges } => self.valid_chain(range, edges),
            _ => false,
        }
    }

    fn source(&self, m: &MorphismId) -> Result<ObjectId> {
        let (range, es) = self.parts(m)?;
        Ok(ObjectId::Named(self.path_source(range, es)?))
    }

    fn target(&self, m: &MorphismId) -> Result<ObjectId> {
        let (range, _) = self.parts(m)?;
        Ok(ObjectId::Named(range.clone()))
    }

    fn identity(&self, x: &ObjectId) -> Result<MorphismId> {
        match x {
            ObjectId::Named(n) if self.vertex(n).is_some() => Ok(self.path(n, Vec::new())),
            _ => Err(Error::unknown_object(x)),
        }
    }

    fn compose_unchecked(&self, a: &MorphismId, b: &MorphismId) -> Result<MorphismId> {
        let (range, ea) = self.parts(a)?;
        let (_, eb) = self.parts(b)?;
        if eb.is_empty() {
            return Ok(a.clone());
        }
        if ea.is_empty() {
            return Ok(b.clone());
        }
        let mut w = ea.to_vec();
        w.extend_from_slice(eb);
        self.normalize(range, w)
    }

    fn level(&self, m: &MorphismId) -> usize {
        self.degree(m)
            .map(|d| d.into_iter().max().unwrap_or(0) as usize)
            .unwrap_or(0)
    }

    fn morphisms_into(&self, x: &ObjectId, max_level: usize) -> Vec<MorphismId> {
        let ObjectId::Named(v) = x else {
            return Vec::new();
        };
        let mut out: Vec<MorphismId> = super::nk::NkMonoid::box_vectors(self.k, max_level as u32)
            .iter()
            .flat_map(|d| self.paths_of_degree(v, d))
            .collect();
        out.sort();
        out
    }

    fn is_finite(&self) -> bool {
        false
    }

    fn parse_morphism(&self, s: &str) -> Result<MorphismId> {
        let s = s.trim();
        if let Some(v) = self.vertex(s) {
            return Ok(self.path(v, Vec::new()));
        }
        let mut acc: Option<MorphismId> = None;
        for name in s.split('.') {
            let e = self.edge_morphism(name.trim())?;
            acc = Some(match acc {
                None => e,
                Some(a) => {
                    if self.source(&a)? != self.target(&e)? {
                        return Err(Error::Parse(format!("{s} is not a path")));
                    }
                    self.compose_unchecked(&a, &e)?
                }
            });
        }
        acc.ok_or_else(|| Error::Parse(format!("empty path {s}")))
    }

    fn to_doc(&self) -> serde_json::Value {
        let mut doc = serde_json::to_value(&self.spec).expect("spec serializes");
        doc["backend"] = serde_json::json!("kgraph");
        doc["k"] = serde_json::json!(self.k);
        doc
    }

    fn divide_left_hint(&self, a: &MorphismId, b: &MorphismId) -> Option<Vec<MorphismId>> {
        if !self.certified {
            return None;
        }
        let da = self.degree(a).ok()?;
        Some(match self.factor_at(b, &da) {
            Some((outer, inner)) if &outer == a => vec![inner],
            _ => Vec::new(),
        })
    }

    fn factorizations_hint(&self, m: &MorphismId) -> Option<Vec<(MorphismId, MorphismId)>> {
        if !self.certified {
            return None;
        }
        let d = self.degree(m).ok()?;
        super::nk::NkMonoid::vectors_below(&d)
            .iter()
            .map(|u| self.factor_at(m, u))
            .collect()
    }

    fn as_kgraph(&self) -> Option<&KGraph> {
        Some(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::Category;

    fn edge(id: &str, color: usize) -> EdgeSpec {
        EdgeSpec {
            id: id.into(),
            src: "v".into(),
            tgt: "v".into(),
            color,
        }
    }

    fn commuting() -> KGraph {
        KGraph::from_spec(KGraphSpec {
            k: Some(2),
            vertices: vec!["v".into()],
            edges: vec![edge("f", 0), edge("e", 1)],
            squares: vec![["f".into(), "e".into(), "e".into(), "f".into()]],
        })
        .unwrap()
    }

    #[test]
    fn one_graph_fibers_are_words() {
        let g = KGraph::from_spec(KGraphSpec {
            k: Some(1),
            vertices: vec!["v".into()],
            edges: vec![edge("e1", 0), edge("e2", 0)],
            squares: vec![],
        })
        .unwrap();
        for n in 0..5u32 {
            assert_eq!(g.paths_of_degree("v", &[n]).len(), 1 << n);
        }
    }

    #[test]
    fn commuting_squares_give_unique_normal_forms() {
        let g = commuting();
        assert_eq!(g.paths_of_degree("v", &[2, 3]).len(), 1);
        let cat = Category::new(g.clone());
        let e = g.edge_morphism("e").unwrap();
        let f = g.edge_morphism("f").unwrap();
        assert_eq!(cat.compose(&e, &f).unwrap(), cat.compose(&f, &e).unwrap());
    }

    #[test]
    fn factor_moves_edges_through_squares() {
        let g = commuting().into_certified();
        let cat = Category::new(g.clone());
        let m = cat.parse_morphism("f.e").unwrap();
        let (outer, inner) = g.factor_at(&m, &[0, 1]).unwrap();
        assert_eq!(outer, g.edge_morphism("e").unwrap());
        assert_eq!(inner, g.edge_morphism("f").unwrap());
    }

    #[test]
    fn dangling_and_malformed_squares_are_rejected() {
        let bad = KGraphSpec {
            k: Some(1),
            vertices: vec!["v".into()],
            edges: vec![EdgeSpec {
                id: "e".into(),
                src: "w".into(),
                tgt: "v".into(),
                color: 0,
            }],
            squares: vec![],
        };
        assert!(matches!(
            KGraph::from_spec(bad),
            Err(Error::DanglingEdge(_))
        ));
        let bad_square = KGraphSpec {
            k: Some(2),
            vertices: vec!["v".into()],
            edges: vec![edge("f", 0), edge("e", 1)],
            squares: vec![["f".into(), "f".into(), "e".into(), "e".into()]],
        };
        assert!(matches!(
            KGraph::from_spec(bad_square),
            Err(Error::InconsistentSquares(_))
        ));
    }
}
