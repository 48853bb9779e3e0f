//! Slice categories C/X.
//!
//! Objects are morphisms of C with target X. A morphism `(alpha, gamma)` has
//! range `alpha` and source `alpha gamma`; composition is
//! `(alpha, gamma)(alpha gamma, delta) = (alpha, gamma delta)`.

use super::Category;
use crate::error::{Error, Result};
use crate::ids::{MorphismId, ObjectId};

#[derive(Debug, Clone)]
pub struct SliceCategory {
    base: Category,
    apex: ObjectId,
}

impl SliceCategory {
    pub fn new(base: &Category, apex: &ObjectId) -> Result<Self> {
        if !base.has_object(apex) {
            return Err(Error::unknown_object(apex));
        }
        Ok(SliceCategory {
            base: base.clone(),
            apex: apex.clone(),
        })
    }

    pub fn apex(&self) -> &ObjectId {
        &self.apex
    }

    pub fn base(&self) -> &Category {
        &self.base
    }

    /// Objects of level at most `max_level`, sorted by level then id.
    pub fn objects(&self, max_level: usize) -> Vec<MorphismId> {
        let mut objs = self.base.morphisms_into(&self.apex, max_level);
        objs.sort_by_key(|m| (self.base.level(m), m.clone()));
        objs
    }

    pub fn is_object(&self, alpha: &MorphismId) -> bool {
        self.base.target(alpha).ok().as_ref() == Some(&self.apex)
    }

    pub fn morphism(&self, alpha: &MorphismId, gamma: &MorphismId) -> Result<MorphismId> {
        if !self.is_object(alpha) {
            return Err(Error::Precondition(format!(
                "{alpha} is not an object of the slice over {}",
                self.apex
            )));
        }
        if self.base.source(alpha)? != self.base.target(gamma)? {
            return Err(Error::not_composable(alpha, gamma));
        }
        Ok(MorphismId::SlicePair(
            Box::new(alpha.clone()),
            Box::new(gamma.clone()),
        ))
    }

    fn split<'a>(&self, m: &'a MorphismId) -> Result<(&'a MorphismId, &'a MorphismId)> {
        match m {
            MorphismId::SlicePair(a, g) => Ok((a, g)),
            _ => Err(Error::unknown_morphism(m)),
        }
    }

    /// Morphisms from `source` to `target`, i.e. all `gamma` with
    /// `target gamma = source`.
    pub fn hom(&self, source: &MorphismId, target: &MorphismId) -> Result<Vec<MorphismId>> {
        Ok(self
            .base
            .divide_left(target, source)?
            .into_iter()
            .map(|g| MorphismId::SlicePair(Box::new(target.clone()), Box::new(g)))
            .collect())
    }

    pub fn range(&self, m: &MorphismId) -> Result<MorphismId> {
        Ok(self.split(m)?.0.clone())
    }

    pub fn domain(&self, m: &MorphismId) -> Result<MorphismId> {
        let (a, g) = self.split(m)?;
        self.base.compose(a, g)
    }

    pub fn compose(&self, m: &MorphismId, n: &MorphismId) -> Result<MorphismId> {
        let (a, g) = self.split(m)?;
        let (b, d) = self.split(n)?;
        if &self.base.compose(a, g)? != b {
            return Err(Error::not_composable(m, n));
        }
        let gd = self.base.compose(g, d)?;
        Ok(MorphismId::SlicePair(Box::new(a.clone()), Box::new(gd)))
    }

    pub fn pi1(&self, m: &MorphismId) -> Result<MorphismId> {
        self.range(m)
    }

    pub fn pi2(&self, m: &MorphismId) -> Result<MorphismId> {
        Ok(self.split(m)?.1.clone())
    }

    /// Checks `pi1 pi2 = domain` and that `pi2` respects composition for all
    /// slice morphisms between objects of level at most `max_level`.
    pub fn validate(&self, max_level: usize) -> Result<Vec<String>> {
        let mut failures = Vec::new();
        let objs = self.objects(max_level);
        let mut morphisms = Vec::new();
        for s in &objs {
            for t in &objs {
                morphisms.extend(self.hom(s, t)?);
            }
        }
        for m in &morphisms {
            let composite = self.base.compose(&self.pi1(m)?, &self.pi2(m)?)?;
            if composite != self.domain(m)? {
                failures.push(format!("pi1 pi2 differs from the source of {m}"));
            }
        }
        for m in &morphisms {
            for n in &morphisms {
                if self.domain(m)? != self.range(n)? {
                    continue;
                }
                let mn = self.compose(m, n)?;
                let expected = self.base.compose(&self.pi2(m)?, &self.pi2(n)?)?;
                if self.pi2(&mn)? != expected {
                    failures.push(format!("pi2 does not respect the composite of {m} and {n}"));
                }
            }
        }
        Ok(failures)
    }
}
