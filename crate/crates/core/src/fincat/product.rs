//! Finite products of categories.

use serde_json::json;

use super::{Category, CategoryBackend, Completion};
use crate::error::{Error, Result};
use crate::fibration::ore::ore_complete;
use crate::ids::{split_top_level, MorphismId, ObjectId};

#[derive(Debug, Clone)]
pub struct ProductCategory {
    factors: Vec<Category>,
}

/// The product of a nonempty list of categories, with componentwise
/// composition and level equal to the largest component level.
pub fn product(factors: Vec<Category>) -> Result<Category> {
    if factors.is_empty() {
        return Err(Error::Precondition("product of an empty list".into()));
    }
    Ok(Category::new(ProductCategory { factors }))
}

fn cartesian<T: Clone>(lists: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for list in lists {
        let mut next = Vec::with_capacity(out.len() * list.len());
        for prefix in &out {
            for item in list {
                let mut v = prefix.clone();
                v.push(item.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out
}

impl ProductCategory {
    pub fn factors(&self) -> &[Category] {
        &self.factors
    }

    fn components<'a>(&self, m: &'a MorphismId) -> Result<&'a [MorphismId]> {
        match m {
            MorphismId::Tuple(parts) if parts.len() == self.factors.len() => Ok(parts),
            _ => Err(Error::unknown_morphism(m)),
        }
    }

    fn object_components<'a>(&self, x: &'a ObjectId) -> Result<&'a [ObjectId]> {
        match x {
            ObjectId::Tuple(parts) if parts.len() == self.factors.len() => Ok(parts),
            _ => Err(Error::unknown_object(x)),
        }
    }

    fn zip_map<T>(
        &self,
        a: &MorphismId,
        b: &MorphismId,
        f: impl Fn(&Category, &MorphismId, &MorphismId) -> Result<T>,
    ) -> Result<Vec<T>> {
        let (pa, pb) = (self.components(a)?, self.components(b)?);
        self.factors
            .iter()
            .zip(pa.iter().zip(pb))
            .map(|(c, (x, y))| f(c, x, y))
            .collect()
    }
}

impl CategoryBackend for ProductCategory {
    fn kind(&self) -> &'static str {
        "product"
    }

    fn objects(&self) -> Vec<ObjectId> {
        let lists: Vec<Vec<ObjectId>> = self.factors.iter().map(|c| c.objects()).collect();
        cartesian(&lists).into_iter().map(ObjectId::Tuple).collect()
    }

    fn has_object(&self, x: &ObjectId) -> bool {
        self.object_components(x)
            .map(|xs| self.factors.iter().zip(xs).all(|(c, x)| c.has_object(x)))
            .unwrap_or(false)
    }

    fn contains(&self, m: &MorphismId) -> bool {
        self.components(m)
            .map(|ms| self.factors.iter().zip(ms).all(|(c, m)| c.contains(m)))
            .unwrap_or(false)
    }

    fn source(&self, m: &MorphismId) -> Result<ObjectId> {
        let ms = self.components(m)?;
        Ok(ObjectId::Tuple(
            self.factors
                .iter()
                .zip(ms)
                .map(|(c, m)| c.source(m))
                .collect::<Result<_>>()?,
        ))
    }

    fn target(&self, m: &MorphismId) -> Result<ObjectId> {
        let ms = self.components(m)?;
        Ok(ObjectId::Tuple(
            self.factors
                .iter()
                .zip(ms)
                .map(|(c, m)| c.target(m))
                .collect::<Result<_>>()?,
        ))
    }

    fn identity(&self, x: &ObjectId) -> Result<MorphismId> {
        let xs = self.object_components(x)?;
        Ok(MorphismId::Tuple(
            self.factors
                .iter()
                .zip(xs)
                .map(|(c, x)| c.identity(x))
                .collect::<Result<_>>()?,
        ))
    }

    fn compose_unchecked(&self, a: &MorphismId, b: &MorphismId) -> Result<MorphismId> {
        Ok(MorphismId::Tuple(
            self.zip_map(a, b, |c, x, y| c.compose(x, y))?,
        ))
    }

    fn level(&self, m: &MorphismId) -> usize {
        self.components(m)
            .map(|ms| {
                self.factors
                    .iter()
                    .zip(ms)
                    .map(|(c, m)| c.level(m))
                    .max()
                    .unwrap_or(0)
            })
            .unwrap_or(0)
    }

    fn morphisms_into(&self, x: &ObjectId, max_level: usize) -> Vec<MorphismId> {
        let Ok(xs) = self.object_components(x) else {
            return Vec::new();
        };
        let lists: Vec<Vec<MorphismId>> = self
            .factors
            .iter()
            .zip(xs)
            .map(|(c, x)| c.morphisms_into(x, max_level))
            .collect();
        let mut out: Vec<MorphismId> = cartesian(&lists)
            .into_iter()
            .map(MorphismId::Tuple)
            .collect();
        out.sort();
        out
    }

    fn is_finite(&self) -> bool {
        self.factors.iter().all(|c| c.is_finite())
    }

    fn parse_morphism(&self, s: &str) -> Result<MorphismId> {
        let t = s.trim();
        let inner = t
            .strip_prefix('<')
            .and_then(|r| r.strip_suffix('>'))
            .ok_or_else(|| Error::Parse(format!("expected <a, b, ...>, got {s}")))?;
        let parts = split_top_level(inner, ',');
        if parts.len() != self.factors.len() {
            return Err(Error::Parse(format!(
                "{s} has the wrong number of components"
            )));
        }
        Ok(MorphismId::Tuple(
            self.factors
                .iter()
                .zip(parts)
                .map(|(c, p)| c.parse_morphism(p))
                .collect::<Result<_>>()?,
        ))
    }

    fn parse_object(&self, s: &str) -> Result<ObjectId> {
        let t = s.trim();
        let inner = t
            .strip_prefix('<')
            .and_then(|r| r.strip_suffix('>'))
            .ok_or_else(|| Error::Parse(format!("expected <X, Y, ...>, got {s}")))?;
        let parts = split_top_level(inner, ',');
        if parts.len() != self.factors.len() {
            return Err(Error::Parse(format!(
                "{s} has the wrong number of components"
            )));
        }
        Ok(ObjectId::Tuple(
            self.factors
                .iter()
                .zip(parts)
                .map(|(c, p)| c.parse_object(p))
                .collect::<Result<_>>()?,
        ))
    }

    fn to_doc(&self) -> serde_json::Value {
        json!({
            "backend": "product",
            "factors": self.factors.iter().map(|c| c.to_doc()).collect::<Vec<_>>(),
        })
    }

    fn ore_hint(&self, m: &MorphismId, n: &MorphismId) -> Option<Result<Completion>> {
        let pairs = self.zip_map(m, n, ore_complete);
        Some(pairs.map(|ps| {
            let (p, q): (Vec<_>, Vec<_>) = ps.into_iter().unzip();
            (MorphismId::Tuple(p), MorphismId::Tuple(q))
        }))
    }

    fn divide_left_hint(&self, a: &MorphismId, b: &MorphismId) -> Option<Vec<MorphismId>> {
        let lists = self.zip_map(a, b, |c, x, y| c.divide_left(x, y)).ok()?;
        Some(
            cartesian(&lists)
                .into_iter()
                .map(MorphismId::Tuple)
                .collect(),
        )
    }

    fn factorizations_hint(&self, m: &MorphismId) -> Option<Vec<(MorphismId, MorphismId)>> {
        let ms = self.components(m).ok()?;
        let lists: Vec<Vec<(MorphismId, MorphismId)>> = self
            .factors
            .iter()
            .zip(ms)
            .map(|(c, m)| c.factorizations(m))
            .collect::<Result<_>>()
            .ok()?;
        Some(
            cartesian(&lists)
                .into_iter()
                .map(|combo| {
                    let (o, i): (Vec<_>, Vec<_>) = combo.into_iter().unzip();
                    (MorphismId::Tuple(o), MorphismId::Tuple(i))
                })
                .collect(),
        )
    }

    fn joint_completion_hint(
        &self,
        m1: &MorphismId,
        m2: &MorphismId,
        n1: &MorphismId,
        n2: &MorphismId,
    ) -> Option<Vec<Completion>> {
        let (m1, m2) = (self.components(m1).ok()?, self.components(m2).ok()?);
        let (n1, n2) = (self.components(n1).ok()?, self.components(n2).ok()?);
        let mut lists = Vec::new();
        for (i, c) in self.factors.iter().enumerate() {
            let (sols, exact) = c
                .joint_completions(&m1[i], &m2[i], &n1[i], &n2[i], 2)
                .ok()?;
            if !exact {
                return None;
            }
            lists.push(sols);
        }
        Some(
            cartesian(&lists)
                .into_iter()
                .map(|combo| {
                    let (a, b): (Vec<_>, Vec<_>) = combo.into_iter().unzip();
                    (MorphismId::Tuple(a), MorphismId::Tuple(b))
                })
                .collect(),
        )
    }

    fn known_cancellative(&self) -> Option<(bool, bool)> {
        let mut acc = (true, true);
        for c in &self.factors {
            let (l, r) = c.known_cancellative()?;
            acc = (acc.0 && l, acc.1 && r);
        }
        Some(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::{trivial_category, NkMonoid};

    #[test]
    fn n_times_n_matches_n2() {
        let p = product(vec![
            Category::new(NkMonoid::new(1)),
            Category::new(NkMonoid::new(1)),
        ])
        .unwrap();
        let n2 = Category::new(NkMonoid::new(2));
        let x = p.objects()[0].clone();
        for level in 0..=3 {
            let pm = p.morphisms_into(&x, level);
            let nm = n2.morphisms(level);
            assert_eq!(pm.len(), nm.len());
            let to_n2 = |m: &MorphismId| match m {
                MorphismId::Tuple(v) => {
                    let comps: Vec<u32> = v
                        .iter()
                        .map(|c| match c {
                            MorphismId::Degree(d) => d[0],
                            _ => unreachable!(),
                        })
                        .collect();
                    MorphismId::Degree(comps)
                }
                _ => unreachable!(),
            };
            for a in &pm {
                for b in &pm {
                    let ab = p.compose(a, b).unwrap();
                    assert_eq!(to_n2(&ab), n2.compose(&to_n2(a), &to_n2(b)).unwrap());
                }
            }
        }
    }

    #[test]
    fn product_with_trivial_is_original() {
        let n1 = Category::new(NkMonoid::new(1));
        let p = product(vec![n1.clone(), trivial_category()]).unwrap();
        let x = p.objects()[0].clone();
        assert_eq!(p.morphisms_into(&x, 3).len(), n1.morphisms(3).len());
    }
}
