//! Functors between categories, fiber enumeration and factorization lifting.

pub mod builders;
pub mod ore;
pub mod validate;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fincat::Category;
use crate::ids::{MorphismId, ObjectId};

pub use builders::{
    build_kgraph, build_kgraph_unchecked, build_presheaf_sections, identity_fibration,
    PresheafSpec, Restriction,
};
pub use ore::{check_ore, morphism_properties, ore_complete, ore_match, ore_match_with, OreReport};
pub use validate::{
    check_dcf, check_row_finite, check_strong_surjectivity, restrict_to_image, validate_functor,
    DcfCounterexample, DcfOutcome,
};

/// Default bound on candidate enumeration in bounded searches.
pub const DEFAULT_BUDGET: usize = 10_000;

#[derive(Debug, Clone)]
pub enum FunctorMap {
    Identity,
    /// The degree functor of a k-graph into N^n, sending colour `c` to
    /// coordinate `coordinates[c]`.
    Degree {
        coordinates: Vec<usize>,
        rank: usize,
    },
    Table {
        objects: BTreeMap<ObjectId, ObjectId>,
        morphisms: BTreeMap<MorphismId, MorphismId>,
    },
}

/// How a splitting of the fibration is constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SplittingWitness {
    /// Each fiber over a base object has one element, so the section is forced.
    Unique,
    /// The restriction splitting of a presheaf of sections.
    Restriction,
    /// Greedy extension choosing the least candidate.
    MinLex,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FibrationFlags {
    pub depth: usize,
    pub functor_valid: bool,
    pub dcf: bool,
    pub row_finite: bool,
    pub strongly_surjective: bool,
    pub right_ore: bool,
    pub strongly_right_ore: bool,
    pub left_cancellative: bool,
    pub right_cancellative: bool,
    pub locally_split: bool,
}

impl FibrationFlags {
    pub fn is_kpf(&self) -> bool {
        self.functor_valid && self.dcf && self.strongly_right_ore && self.locally_split
    }
}

struct FibInner {
    name: String,
    domain: Category,
    codomain: Category,
    map: FunctorMap,
    splitting: SplittingWitness,
    doc: Option<serde_json::Value>,
    budget: usize,
    fiber_index: OnceLock<BTreeMap<(ObjectId, MorphismId), Vec<MorphismId>>>,
    flags: Mutex<BTreeMap<usize, FibrationFlags>>,
}

/// A functor `F: E -> B` with cached validation results.
#[derive(Clone)]
pub struct Fibration(Arc<FibInner>);

impl fmt::Debug for Fibration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fibration")
            .field("name", &self.0.name)
            .field("domain", &self.0.domain)
            .field("codomain", &self.0.codomain)
            .finish()
    }
}

impl PartialEq for Fibration {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Fibration {
    pub fn new(name: &str, domain: Category, codomain: Category, map: FunctorMap) -> Self {
        Self::assemble(name, domain, codomain, map, SplittingWitness::MinLex, None)
    }

    fn assemble(
        name: &str,
        domain: Category,
        codomain: Category,
        map: FunctorMap,
        splitting: SplittingWitness,
        doc: Option<serde_json::Value>,
    ) -> Self {
        Fibration(Arc::new(FibInner {
            name: name.to_string(),
            domain,
            codomain,
            map,
            splitting,
            doc,
            budget: DEFAULT_BUDGET,
            fiber_index: OnceLock::new(),
            flags: Mutex::new(BTreeMap::new()),
        }))
    }

    pub fn with_splitting(&self, splitting: SplittingWitness) -> Self {
        Self::assemble(
            &self.0.name,
            self.0.domain.clone(),
            self.0.codomain.clone(),
            self.0.map.clone(),
            splitting,
            self.0.doc.clone(),
        )
    }

    pub fn with_doc(&self, doc: serde_json::Value) -> Self {
        Self::assemble(
            &self.0.name,
            self.0.domain.clone(),
            self.0.codomain.clone(),
            self.0.map.clone(),
            self.0.splitting,
            Some(doc),
        )
    }

    /// A copy whose fiber and path enumerations stop after `budget` items.
    pub fn with_budget(&self, budget: usize) -> Self {
        Fibration(Arc::new(FibInner {
            name: self.0.name.clone(),
            domain: self.0.domain.clone(),
            codomain: self.0.codomain.clone(),
            map: self.0.map.clone(),
            splitting: self.0.splitting,
            doc: self.0.doc.clone(),
            budget: budget.max(1),
            fiber_index: OnceLock::new(),
            flags: Mutex::new(BTreeMap::new()),
        }))
    }

    pub fn with_name(&self, name: &str) -> Self {
        Self::assemble(
            name,
            self.0.domain.clone(),
            self.0.codomain.clone(),
            self.0.map.clone(),
            self.0.splitting,
            self.0.doc.clone(),
        )
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn domain(&self) -> &Category {
        &self.0.domain
    }

    pub fn codomain(&self) -> &Category {
        &self.0.codomain
    }

    pub fn map(&self) -> &FunctorMap {
        &self.0.map
    }

    pub fn splitting(&self) -> SplittingWitness {
        self.0.splitting
    }

    pub fn budget(&self) -> usize {
        self.0.budget
    }

    /// The bundle document this fibration was loaded from, if any.
    pub fn doc(&self) -> Option<&serde_json::Value> {
        self.0.doc.as_ref()
    }

    pub fn same_as(&self, other: &Fibration) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn apply_object(&self, x: &ObjectId) -> Result<ObjectId> {
        if !self.domain().has_object(x) {
            return Err(Error::unknown_object(x));
        }
        match &self.0.map {
            FunctorMap::Identity => Ok(x.clone()),
            FunctorMap::Degree { .. } => Ok(ObjectId::Star),
            FunctorMap::Table { objects, .. } => objects
                .get(x)
                .cloned()
                .ok_or_else(|| Error::schema("object_map", format!("no image for {x}"))),
        }
    }

    pub fn apply(&self, m: &MorphismId) -> Result<MorphismId> {
        match &self.0.map {
            FunctorMap::Identity => {
                if self.domain().contains(m) {
                    Ok(m.clone())
                } else {
                    Err(Error::unknown_morphism(m))
                }
            }
            FunctorMap::Degree { coordinates, rank } => {
                let g = self
                    .domain()
                    .as_kgraph()
                    .ok_or_else(|| Error::Precondition("degree functor needs a k-graph".into()))?;
                let d = g.degree(m)?;
                let mut v = vec![0u32; *rank];
                for (c, n) in d.into_iter().enumerate() {
                    v[coordinates[c]] += n;
                }
                Ok(MorphismId::Degree(v))
            }
            FunctorMap::Table { morphisms, .. } => morphisms
                .get(m)
                .cloned()
                .ok_or_else(|| Error::schema("morphism_map", format!("no image for {m}"))),
        }
    }

    fn fiber_index(&self) -> &BTreeMap<(ObjectId, MorphismId), Vec<MorphismId>> {
        self.0.fiber_index.get_or_init(|| {
            let mut idx: BTreeMap<(ObjectId, MorphismId), Vec<MorphismId>> = BTreeMap::new();
            for m in self.domain().morphisms(1) {
                if let (Ok(x), Ok(b)) = (self.domain().target(&m), self.apply(&m)) {
                    idx.entry((x, b)).or_default().push(m);
                }
            }
            idx
        })
    }

    /// All morphisms `alpha` with `r(alpha) = x` and `F(alpha) = b`, sorted.
    pub fn enumerate_fiber(&self, x: &ObjectId, b: &MorphismId) -> Result<Vec<MorphismId>> {
        let fx = self.apply_object(x)?;
        if self.codomain().target(b)? != fx {
            return Err(Error::Precondition(format!(
                "{b} does not end at F({x}) = {fx}"
            )));
        }
        match &self.0.map {
            FunctorMap::Identity => Ok(vec![b.clone()]),
            FunctorMap::Degree { coordinates, .. } => {
                let g = self
                    .domain()
                    .as_kgraph()
                    .expect("degree functor on a k-graph");
                let MorphismId::Degree(v) = b else {
                    return Err(Error::unknown_morphism(b));
                };
                let mut d = Vec::with_capacity(coordinates.len());
                let mut used = vec![false; v.len()];
                for &c in coordinates {
                    d.push(v[c]);
                    used[c] = true;
                }
                if v.iter().zip(&used).any(|(n, u)| !u && *n > 0) {
                    return Ok(Vec::new());
                }
                let ObjectId::Named(name) = x else {
                    return Err(Error::unknown_object(x));
                };
                Ok(g.paths_of_degree(name, &d))
            }
            FunctorMap::Table { .. } if self.domain().is_finite() => Ok(self
                .fiber_index()
                .get(&(x.clone(), b.clone()))
                .cloned()
                .unwrap_or_default()),
            FunctorMap::Table { .. } => {
                let mut out = Vec::new();
                let candidates = self.domain().morphisms_into(x, self.codomain().level(b));
                if candidates.len() > self.budget() {
                    return Err(Error::FiberInfinite {
                        object: x.to_string(),
                        base: b.to_string(),
                    });
                }
                for m in candidates {
                    if self.apply(&m).ok().as_ref() == Some(b) {
                        out.push(m);
                    }
                }
                Ok(out)
            }
        }
    }

    /// Lifts a factorization `parts[0] parts[1] ... = F(phi)` to the unique
    /// factorization of `phi` with those images.
    pub fn lift_factorization(
        &self,
        phi: &MorphismId,
        parts: &[MorphismId],
    ) -> Result<Vec<MorphismId>> {
        let b = self.codomain();
        let image = self.apply(phi)?;
        if parts.is_empty() || b.compose_all(parts).ok().as_ref() != Some(&image) {
            return Err(Error::BadFactorization(phi.to_string()));
        }
        if parts.len() == 1 {
            return Ok(vec![phi.clone()]);
        }
        if let FunctorMap::Identity = self.0.map {
            return Ok(parts.to_vec());
        }
        let rest = b.compose_all(&parts[1..])?;
        let (head, tail) = self.lift_pair(phi, &parts[0], &rest)?;
        let mut out = vec![head];
        out.extend(self.lift_factorization(&tail, &parts[1..])?);
        Ok(out)
    }

    /// The unique `(u, v)` with `u v = phi`, `F(u) = a` and `F(v) = c`.
    pub fn lift_pair(
        &self,
        phi: &MorphismId,
        a: &MorphismId,
        c: &MorphismId,
    ) -> Result<(MorphismId, MorphismId)> {
        let e = self.domain();
        if let FunctorMap::Identity = self.0.map {
            if &self.codomain().compose(a, c)? != phi {
                return Err(Error::BadFactorization(phi.to_string()));
            }
            return Ok((a.clone(), c.clone()));
        }
        let describe = || format!("({a}, {c})");
        if let (FunctorMap::Degree { coordinates, .. }, Some(g)) = (&self.0.map, e.as_kgraph()) {
            if g.certified() {
                if let MorphismId::Degree(av) = a {
                    let u: Vec<u32> = coordinates.iter().map(|&i| av[i]).collect();
                    if let Some((outer, inner)) = g.factor_at(phi, &u) {
                        if &self.apply(&inner)? == c {
                            return Ok((outer, inner));
                        }
                    }
                }
                return Err(Error::NoLift {
                    morphism: phi.to_string(),
                    factorization: describe(),
                });
            }
        }
        let x = e.target(phi)?;
        let mut found = Vec::new();
        for u in self.enumerate_fiber(&x, a)? {
            for v in e.divide_left(&u, phi)? {
                if self.apply(&v).ok().as_ref() == Some(c) {
                    found.push((u.clone(), v));
                }
            }
        }
        match found.len() {
            1 => Ok(found.pop().expect("one lift")),
            0 => Err(Error::NoLift {
                morphism: phi.to_string(),
                factorization: describe(),
            }),
            n => Err(Error::MultipleLifts {
                morphism: phi.to_string(),
                factorization: describe(),
                count: n,
            }),
        }
    }

    pub(crate) fn cached_flags(&self, depth: usize) -> Option<FibrationFlags> {
        self.0
            .flags
            .lock()
            .expect("flag cache poisoned")
            .get(&depth)
            .cloned()
    }

    pub(crate) fn store_flags(&self, flags: FibrationFlags) {
        self.0
            .flags
            .lock()
            .expect("flag cache poisoned")
            .insert(flags.depth, flags);
    }

    /// The flags computed at `depth`, running the validators if needed.
    pub fn flags(&self, depth: usize) -> FibrationFlags {
        if let Some(f) = self.cached_flags(depth) {
            return f;
        }
        let flags = validate::compute_flags(self, depth);
        self.store_flags(flags.clone());
        flags
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn o2_fibers_have_two_to_the_n_elements() {
        let f = catalog::o_n(2).unwrap();
        let v = f.domain().objects()[0].clone();
        for n in 0..5u32 {
            let fib = f.enumerate_fiber(&v, &MorphismId::degree(&[n])).unwrap();
            assert_eq!(fib.len(), 1 << n);
        }
    }

    #[test]
    fn identity_fiber_is_singleton() {
        let f = catalog::by_name("z3").unwrap();
        let g = MorphismId::named("2");
        assert_eq!(f.enumerate_fiber(&ObjectId::Star, &g).unwrap(), vec![g]);
    }

    #[test]
    fn kgraph_lift_of_degree_one_one() {
        let f = catalog::by_name("2-graph").unwrap();
        let e = f.domain();
        let lam = e.parse_morphism("b1.r2").unwrap();
        let parts = [MorphismId::degree(&[0, 1]), MorphismId::degree(&[1, 0])];
        let lifted = f.lift_factorization(&lam, &parts).unwrap();
        assert_eq!(e.compose(&lifted[0], &lifted[1]).unwrap(), lam);
        assert_eq!(f.apply(&lifted[0]).unwrap(), parts[0]);
        assert_eq!(
            f.lift_factorization(&lam, &[f.apply(&lam).unwrap()])
                .unwrap(),
            vec![lam]
        );
    }

    #[test]
    fn three_part_lift_matches_iterated_pairs() {
        let f = catalog::o_n(2).unwrap();
        let e = f.domain();
        let phi = e.parse_morphism("e1.e2.e2").unwrap();
        let one = MorphismId::degree(&[1]);
        let two = MorphismId::degree(&[2]);
        let three = f
            .lift_factorization(&phi, &[one.clone(), one.clone(), one.clone()])
            .unwrap();
        let (h, t) = f.lift_pair(&phi, &one, &two).unwrap();
        let (m, l) = f.lift_pair(&t, &one, &one).unwrap();
        assert_eq!(three, vec![h, m, l]);
    }
}
