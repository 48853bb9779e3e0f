//! Small categories: explicit finite tables, graded lazy backends, products,
//! slices and the builders for the standard example classes.

pub mod explicit;
pub mod image;
pub mod kgraph;
pub mod nk;
pub mod product;
pub mod slice;
pub mod validate;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::ids::{MorphismId, ObjectId};

pub use explicit::{
    build_group_category, build_pair_groupoid, build_poset_category, trivial_category,
    ExplicitCategory,
};
pub use kgraph::{KGraph, KGraphSpec};
pub use nk::NkMonoid;
pub use product::product;
pub use slice::SliceCategory;
pub use validate::{validate_category, CheckResult, ValidationReport};

/// A pair of base morphisms completing a cospan to a commuting square.
pub type Completion = (MorphismId, MorphismId);

/// Storage-specific operations of a category.
///
/// `compose_unchecked` may assume that `s(a) = r(b)`; the [`Category`]
/// wrapper performs that check. Levels grade the morphisms so that
/// `morphisms_into` is finite for every bound, and factors of a morphism
/// never have a larger level than the morphism itself.
pub trait CategoryBackend: fmt::Debug + Send + Sync {
    fn kind(&self) -> &'static str;
    fn objects(&self) -> Vec<ObjectId>;
    fn has_object(&self, x: &ObjectId) -> bool;
    fn contains(&self, m: &MorphismId) -> bool;
    fn source(&self, m: &MorphismId) -> Result<ObjectId>;
    fn target(&self, m: &MorphismId) -> Result<ObjectId>;
    fn identity(&self, x: &ObjectId) -> Result<MorphismId>;
    fn compose_unchecked(&self, a: &MorphismId, b: &MorphismId) -> Result<MorphismId>;
    fn level(&self, m: &MorphismId) -> usize;
    /// Morphisms with target `x` and level at most `max_level`, sorted.
    fn morphisms_into(&self, x: &ObjectId, max_level: usize) -> Vec<MorphismId>;
    fn is_finite(&self) -> bool;
    fn parse_morphism(&self, s: &str) -> Result<MorphismId>;
    fn to_doc(&self) -> serde_json::Value;

    fn parse_object(&self, s: &str) -> Result<ObjectId> {
        let s = s.trim();
        let x = if s == "*" {
            ObjectId::Star
        } else {
            ObjectId::named(s)
        };
        if self.has_object(&x) {
            Ok(x)
        } else {
            Err(Error::UnknownObject(s.to_string()))
        }
    }

    fn ore_hint(&self, _m: &MorphismId, _n: &MorphismId) -> Option<Result<Completion>> {
        None
    }

    fn divide_left_hint(&self, _a: &MorphismId, _b: &MorphismId) -> Option<Vec<MorphismId>> {
        None
    }

    fn factorizations_hint(&self, _m: &MorphismId) -> Option<Vec<(MorphismId, MorphismId)>> {
        None
    }

    /// Solutions (a, b) of `m1 a = m2 b` and `n1 a = n2 b`, when the backend
    /// has a closed form. All solutions are refinements of those returned.
    fn joint_completion_hint(
        &self,
        _m1: &MorphismId,
        _m2: &MorphismId,
        _n1: &MorphismId,
        _n2: &MorphismId,
    ) -> Option<Vec<Completion>> {
        None
    }

    /// `(left_cancellative, right_cancellative)` when known by construction.
    fn known_cancellative(&self) -> Option<(bool, bool)> {
        None
    }

    fn as_kgraph(&self) -> Option<&KGraph> {
        None
    }
}

type OreCache = HashMap<(MorphismId, MorphismId), Completion>;

/// A shared handle on a category backend.
#[derive(Clone)]
pub struct Category {
    backend: Arc<dyn CategoryBackend>,
    ore_cache: Arc<Mutex<OreCache>>,
}

impl fmt::Debug for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Category")
            .field("kind", &self.backend.kind())
            .finish()
    }
}

impl Category {
    pub fn new(backend: impl CategoryBackend + 'static) -> Self {
        Self::from_arc(Arc::new(backend))
    }

    pub fn from_arc(backend: Arc<dyn CategoryBackend>) -> Self {
        Category {
            backend,
            ore_cache: Arc::new(Mutex::new(HashMap::new())),
        }
    }

    pub fn backend(&self) -> &dyn CategoryBackend {
        self.backend.as_ref()
    }

    pub fn kind(&self) -> &'static str {
        self.backend.kind()
    }

    pub fn objects(&self) -> Vec<ObjectId> {
        self.backend.objects()
    }

    pub fn has_object(&self, x: &ObjectId) -> bool {
        self.backend.has_object(x)
    }

    pub fn contains(&self, m: &MorphismId) -> bool {
        self.backend.contains(m)
    }

    pub fn source(&self, m: &MorphismId) -> Result<ObjectId> {
        self.backend.source(m)
    }

    pub fn target(&self, m: &MorphismId) -> Result<ObjectId> {
        self.backend.target(m)
    }

    pub fn identity(&self, x: &ObjectId) -> Result<MorphismId> {
        if !self.has_object(x) {
            return Err(Error::unknown_object(x));
        }
        self.backend.identity(x)
    }

    pub fn is_identity(&self, m: &MorphismId) -> bool {
        self.source(m)
            .and_then(|x| self.identity(&x))
            .map(|id| &id == m)
            .unwrap_or(false)
    }

    pub fn level(&self, m: &MorphismId) -> usize {
        self.backend.level(m)
    }

    pub fn is_finite(&self) -> bool {
        self.backend.is_finite()
    }

    /// A level bound covering every factor of `m`. Graded backends bound
    /// factors by the level of `m`; finite ones may not (in a group, `e`
    /// factors through every element).
    fn factor_bound(&self, m: &MorphismId) -> usize {
        if self.is_finite() {
            usize::MAX
        } else {
            self.level(m)
        }
    }

    pub fn parse_morphism(&self, s: &str) -> Result<MorphismId> {
        self.backend.parse_morphism(s)
    }

    pub fn parse_object(&self, s: &str) -> Result<ObjectId> {
        self.backend.parse_object(s)
    }

    pub fn to_doc(&self) -> serde_json::Value {
        self.backend.to_doc()
    }

    pub fn as_kgraph(&self) -> Option<&KGraph> {
        self.backend.as_kgraph()
    }

    /// The level of `a b` when it can be read off without composing. In a
    /// k-graph degrees add, so this is the largest coordinate of the sum.
    pub fn composite_level(&self, a: &MorphismId, b: &MorphismId) -> Option<usize> {
        let g = self.as_kgraph()?;
        let (da, db) = (g.degree(a).ok()?, g.degree(b).ok()?);
        da.iter().zip(&db).map(|(x, y)| (x + y) as usize).max()
    }

    pub fn known_cancellative(&self) -> Option<(bool, bool)> {
        self.backend.known_cancellative()
    }

    /// The composite `a b`, defined when `s(a) = r(b)`.
    pub fn compose(&self, a: &MorphismId, b: &MorphismId) -> Result<MorphismId> {
        if !self.contains(a) {
            return Err(Error::unknown_morphism(a));
        }
        if !self.contains(b) {
            return Err(Error::unknown_morphism(b));
        }
        if self.backend.source(a)? != self.backend.target(b)? {
            return Err(Error::not_composable(a, b));
        }
        self.backend.compose_unchecked(a, b)
    }

    /// Composes a nonempty chain from left to right.
    pub fn compose_all(&self, chain: &[MorphismId]) -> Result<MorphismId> {
        let (first, rest) = chain
            .split_first()
            .ok_or_else(|| Error::Precondition("empty composition chain".into()))?;
        let mut acc = first.clone();
        for m in rest {
            acc = self.compose(&acc, m)?;
        }
        Ok(acc)
    }

    pub fn morphisms_into(&self, x: &ObjectId, max_level: usize) -> Vec<MorphismId> {
        self.backend.morphisms_into(x, max_level)
    }

    /// Every morphism of level at most `max_level`, sorted.
    pub fn morphisms(&self, max_level: usize) -> Vec<MorphismId> {
        let mut all: Vec<MorphismId> = self
            .objects()
            .iter()
            .flat_map(|x| self.morphisms_into(x, max_level))
            .collect();
        all.sort();
        all
    }

    /// Morphisms with source `x` and level at most `max_level`, sorted.
    pub fn morphisms_from(&self, x: &ObjectId, max_level: usize) -> Vec<MorphismId> {
        self.morphisms(max_level)
            .into_iter()
            .filter(|m| self.source(m).ok().as_ref() == Some(x))
            .collect()
    }

    /// Every pair `(outer, inner)` with `outer inner = m`.
    pub fn factorizations(&self, m: &MorphismId) -> Result<Vec<(MorphismId, MorphismId)>> {
        if !self.contains(m) {
            return Err(Error::unknown_morphism(m));
        }
        if let Some(f) = self.backend.factorizations_hint(m) {
            return Ok(f);
        }
        let r = self.target(m)?;
        let mut out = Vec::new();
        for outer in self.morphisms_into(&r, self.factor_bound(m)) {
            for inner in self.divide_left(&outer, m)? {
                out.push((outer.clone(), inner));
            }
        }
        Ok(out)
    }

    /// Every `d` with `a d = b`, sorted.
    pub fn divide_left(&self, a: &MorphismId, b: &MorphismId) -> Result<Vec<MorphismId>> {
        if self.target(a)? != self.target(b)? {
            return Ok(Vec::new());
        }
        if let Some(ds) = self.backend.divide_left_hint(a, b) {
            return Ok(ds);
        }
        let sa = self.source(a)?;
        let sb = self.source(b)?;
        let mut out = Vec::new();
        for d in self.morphisms_into(&sa, self.factor_bound(b)) {
            if self.source(&d)? != sb {
                continue;
            }
            if let Ok(c) = self.backend.compose_unchecked(a, &d) {
                if &c == b {
                    out.push(d);
                }
            }
        }
        Ok(out)
    }

    /// Solutions `(a, b)` of `m1 a = m2 b` and `n1 a = n2 b` with levels at
    /// most `max_level`. The flag reports whether the search was exhaustive,
    /// in the sense that every solution refines one of those returned.
    pub fn joint_completions(
        &self,
        m1: &MorphismId,
        m2: &MorphismId,
        n1: &MorphismId,
        n2: &MorphismId,
        max_level: usize,
    ) -> Result<(Vec<Completion>, bool)> {
        let x1 = self.source(m1)?;
        let x2 = self.source(m2)?;
        if x1 != self.source(n1)? || x2 != self.source(n2)? {
            return Ok((Vec::new(), true));
        }
        if self.target(m1)? != self.target(m2)? || self.target(n1)? != self.target(n2)? {
            return Ok((Vec::new(), true));
        }
        if let Some(sols) = self.backend.joint_completion_hint(m1, m2, n1, n2) {
            return Ok((sols, true));
        }
        let bs = self.morphisms_into(&x2, max_level);
        let mut by_source: BTreeMap<ObjectId, Vec<(MorphismId, MorphismId, MorphismId)>> =
            BTreeMap::new();
        for b in bs {
            let mb = self.backend.compose_unchecked(m2, &b);
            let nb = self.backend.compose_unchecked(n2, &b);
            if let (Ok(mb), Ok(nb)) = (mb, nb) {
                by_source
                    .entry(self.source(&b)?)
                    .or_default()
                    .push((b, mb, nb));
            }
        }
        let mut out = Vec::new();
        for a in self.morphisms_into(&x1, max_level) {
            let ma = self.backend.compose_unchecked(m1, &a);
            let na = self.backend.compose_unchecked(n1, &a);
            let (Ok(ma), Ok(na)) = (ma, na) else { continue };
            if let Some(cands) = by_source.get(&self.source(&a)?) {
                for (b, mb, nb) in cands {
                    if &ma == mb && &na == nb {
                        out.push((a.clone(), b.clone()));
                    }
                }
            }
        }
        Ok((out, self.is_finite()))
    }

    pub(crate) fn cached_completion(&self, m: &MorphismId, n: &MorphismId) -> Option<Completion> {
        self.ore_cache
            .lock()
            .expect("ore cache poisoned")
            .get(&(m.clone(), n.clone()))
            .cloned()
    }

    pub(crate) fn store_completion(&self, m: &MorphismId, n: &MorphismId, c: &Completion) {
        self.ore_cache
            .lock()
            .expect("ore cache poisoned")
            .insert((m.clone(), n.clone()), c.clone());
    }
}
