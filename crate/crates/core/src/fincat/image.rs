//! Subcategories cut out by a membership predicate, used for the image of a
//! functor.

use std::fmt;
use std::sync::Arc;

use super::{Category, CategoryBackend, Completion};
use crate::error::{Error, Result};
use crate::ids::{MorphismId, ObjectId};

pub type Membership = Arc<dyn Fn(&MorphismId) -> bool + Send + Sync>;

#[derive(Clone)]
pub struct SubCategory {
    inner: Category,
    objects: Vec<ObjectId>,
    member: Membership,
}

impl fmt::Debug for SubCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SubCategory")
            .field("inner", &self.inner)
            .field("objects", &self.objects)
            .finish()
    }
}

impl SubCategory {
    /// The caller guarantees that the predicate holds on identities of the
    /// listed objects and is closed under composition.
    pub fn new(inner: Category, mut objects: Vec<ObjectId>, member: Membership) -> Self {
        objects.sort();
        objects.dedup();
        SubCategory {
            inner,
            objects,
            member,
        }
    }

    fn keep(&self, m: &MorphismId) -> bool {
        self.inner.contains(m)
            && (self.member)(m)
            && self
                .inner
                .source(m)
                .map(|x| self.objects.contains(&x))
                .unwrap_or(false)
            && self
                .inner
                .target(m)
                .map(|x| self.objects.contains(&x))
                .unwrap_or(false)
    }

    fn keep_all(&self, ms: &[MorphismId]) -> bool {
        ms.iter().all(|m| self.keep(m))
    }
}

impl CategoryBackend for SubCategory {
    fn kind(&self) -> &'static str {
        "image"
    }

    fn objects(&self) -> Vec<ObjectId> {
        self.objects.clone()
    }

    fn has_object(&self, x: &ObjectId) -> bool {
        self.objects.contains(x)
    }

    fn contains(&self, m: &MorphismId) -> bool {
        self.keep(m)
    }

    fn source(&self, m: &MorphismId) -> Result<ObjectId> {
        if !self.keep(m) {
            return Err(Error::unknown_morphism(m));
        }
        self.inner.source(m)
    }

    fn target(&self, m: &MorphismId) -> Result<ObjectId> {
        if !self.keep(m) {
            return Err(Error::unknown_morphism(m));
        }
        self.inner.target(m)
    }

    fn identity(&self, x: &ObjectId) -> Result<MorphismId> {
        if !self.has_object(x) {
            return Err(Error::unknown_object(x));
        }
        self.inner.identity(x)
    }

    fn compose_unchecked(&self, a: &MorphismId, b: &MorphismId) -> Result<MorphismId> {
        self.inner.compose(a, b)
    }

    fn level(&self, m: &MorphismId) -> usize {
        self.inner.level(m)
    }

    fn morphisms_into(&self, x: &ObjectId, max_level: usize) -> Vec<MorphismId> {
        if !self.has_object(x) {
            return Vec::new();
        }
        self.inner
            .morphisms_into(x, max_level)
            .into_iter()
            .filter(|m| self.keep(m))
            .collect()
    }

    fn is_finite(&self) -> bool {
        self.inner.is_finite()
    }

    fn parse_morphism(&self, s: &str) -> Result<MorphismId> {
        let m = self.inner.parse_morphism(s)?;
        if self.keep(&m) {
            Ok(m)
        } else {
            Err(Error::UnknownMorphism(s.to_string()))
        }
    }

    fn parse_object(&self, s: &str) -> Result<ObjectId> {
        let x = self.inner.parse_object(s)?;
        if self.has_object(&x) {
            Ok(x)
        } else {
            Err(Error::UnknownObject(s.to_string()))
        }
    }

    fn to_doc(&self) -> serde_json::Value {
        serde_json::json!({"backend": "image", "of": self.inner.to_doc()})
    }

    fn ore_hint(&self, m: &MorphismId, n: &MorphismId) -> Option<Result<Completion>> {
        match self.inner.backend().ore_hint(m, n)? {
            Ok((p, q)) if self.keep_all(&[p.clone(), q.clone()]) => Some(Ok((p, q))),
            Ok(_) => None,
            Err(e) => Some(Err(e)),
        }
    }

    fn divide_left_hint(&self, a: &MorphismId, b: &MorphismId) -> Option<Vec<MorphismId>> {
        let ds = self.inner.backend().divide_left_hint(a, b)?;
        Some(ds.into_iter().filter(|d| self.keep(d)).collect())
    }

    fn factorizations_hint(&self, m: &MorphismId) -> Option<Vec<(MorphismId, MorphismId)>> {
        let fs = self.inner.backend().factorizations_hint(m)?;
        Some(
            fs.into_iter()
                .filter(|(o, i)| self.keep(o) && self.keep(i))
                .collect(),
        )
    }
}
