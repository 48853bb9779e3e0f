//! The additive monoid N^k regarded as a one-object category.

use serde_json::json;

use super::{CategoryBackend, Completion};
use crate::error::{Error, Result};
use crate::ids::{split_top_level, MorphismId, ObjectId};

#[derive(Debug, Clone)]
pub struct NkMonoid {
    k: usize,
}

impl NkMonoid {
    pub fn new(k: usize) -> Self {
        NkMonoid { k }
    }

    pub fn rank(&self) -> usize {
        self.k
    }

    fn vector<'a>(&self, m: &'a MorphismId) -> Result<&'a [u32]> {
        match m {
            MorphismId::Degree(v) if v.len() == self.k => Ok(v),
            _ => Err(Error::unknown_morphism(m)),
        }
    }

    /// All vectors with every coordinate at most `bound`, in lexicographic order.
    pub fn box_vectors(k: usize, bound: u32) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new()];
        for _ in 0..k {
            let mut next = Vec::new();
            for v in &out {
                for c in 0..=bound {
                    let mut w = v.clone();
                    w.push(c);
                    next.push(w);
                }
            }
            out = next;
        }
        out
    }

    /// All vectors componentwise below `v`, in lexicographic order.
    pub fn vectors_below(v: &[u32]) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new()];
        for &bound in v {
            let mut next = Vec::new();
            for w in &out {
                for c in 0..=bound {
                    let mut w2 = w.clone();
                    w2.push(c);
                    next.push(w2);
                }
            }
            out = next;
        }
        out
    }
}

fn leq(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn sub(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

impl CategoryBackend for NkMonoid {
    fn kind(&self) -> &'static str {
        "nk"
    }

    fn objects(&self) -> Vec<ObjectId> {
        vec![ObjectId::Star]
    }

    fn has_object(&self, x: &ObjectId) -> bool {
        *x == ObjectId::Star
    }

    fn contains(&self, m: &MorphismId) -> bool {
        self.vector(m).is_ok()
    }

    fn source(&self, m: &MorphismId) -> Result<ObjectId> {
        self.vector(m).map(|_| ObjectId::Star)
    }

    fn target(&self, m: &MorphismId) -> Result<ObjectId> {
        self.vector(m).map(|_| ObjectId::Star)
    }

    fn identity(&self, x: &ObjectId) -> Result<MorphismId> {
        if self.has_object(x) {
            Ok(MorphismId::Degree(vec![0; self.k]))
        } else {
            Err(Error::unknown_object(x))
        }
    }

    fn compose_unchecked(&self, a: &MorphismId, b: &MorphismId) -> Result<MorphismId> {
        let (a, b) = (self.vector(a)?, self.vector(b)?);
        Ok(MorphismId::Degree(
            a.iter().zip(b).map(|(x, y)| x + y).collect(),
        ))
    }

    fn level(&self, m: &MorphismId) -> usize {
        self.vector(m)
            .map(|v| v.iter().copied().max().unwrap_or(0) as usize)
            .unwrap_or(0)
    }

    fn morphisms_into(&self, x: &ObjectId, max_level: usize) -> Vec<MorphismId> {
        if !self.has_object(x) {
            return Vec::new();
        }
        Self::box_vectors(self.k, max_level as u32)
            .into_iter()
            .map(MorphismId::Degree)
            .collect()
    }

    fn is_finite(&self) -> bool {
        false
    }

    fn parse_morphism(&self, s: &str) -> Result<MorphismId> {
        let t = s.trim();
        let inner = t
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .unwrap_or(t);
        let parts: Vec<u32> = split_top_level(inner, ',')
            .into_iter()
            .map(|p| p.trim().parse::<u32>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse(format!("not a degree: {s}")))?;
        if parts.len() != self.k {
            return Err(Error::Parse(format!(
                "degree {s} does not have {} entries",
                self.k
            )));
        }
        Ok(MorphismId::Degree(parts))
    }

    fn parse_object(&self, s: &str) -> Result<ObjectId> {
        match s.trim() {
            "*" | "" => Ok(ObjectId::Star),
            other => Err(Error::UnknownObject(other.to_string())),
        }
    }

    fn to_doc(&self) -> serde_json::Value {
        json!({"backend": "nk", "k": self.k})
    }

    fn ore_hint(&self, m: &MorphismId, n: &MorphismId) -> Option<Result<Completion>> {
        let (m, n) = match (self.vector(m), self.vector(n)) {
            (Ok(m), Ok(n)) => (m, n),
            (Err(e), _) | (_, Err(e)) => return Some(Err(e)),
        };
        let join: Vec<u32> = m.iter().zip(n).map(|(x, y)| *x.max(y)).collect();
        Some(Ok((
            MorphismId::Degree(sub(&join, m)),
            MorphismId::Degree(sub(&join, n)),
        )))
    }

    fn divide_left_hint(&self, a: &MorphismId, b: &MorphismId) -> Option<Vec<MorphismId>> {
        let (a, b) = (self.vector(a).ok()?, self.vector(b).ok()?);
        Some(if leq(a, b) {
            vec![MorphismId::Degree(sub(b, a))]
        } else {
            Vec::new()
        })
    }

    fn factorizations_hint(&self, m: &MorphismId) -> Option<Vec<(MorphismId, MorphismId)>> {
        let v = self.vector(m).ok()?;
        Some(
            Self::vectors_below(v)
                .into_iter()
                .map(|u| {
                    let rest = sub(v, &u);
                    (MorphismId::Degree(u), MorphismId::Degree(rest))
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
        let (m1, m2) = (self.vector(m1).ok()?, self.vector(m2).ok()?);
        let (n1, n2) = (self.vector(n1).ok()?, self.vector(n2).ok()?);
        // a - b must equal both m2 - m1 and n2 - n1.
        let mut a = Vec::with_capacity(self.k);
        let mut b = Vec::with_capacity(self.k);
        for i in 0..self.k {
            let d1 = m2[i] as i64 - m1[i] as i64;
            let d2 = n2[i] as i64 - n1[i] as i64;
            if d1 != d2 {
                return Some(Vec::new());
            }
            let ai = d1.max(0);
            a.push(ai as u32);
            b.push((ai - d1) as u32);
        }
        Some(vec![(MorphismId::Degree(a), MorphismId::Degree(b))])
    }

    fn known_cancellative(&self) -> Option<(bool, bool)> {
        Some((true, true))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::Category;

    #[test]
    fn addition_and_join() {
        let c = Category::new(NkMonoid::new(2));
        let a = MorphismId::degree(&[1, 0]);
        let b = MorphismId::degree(&[0, 1]);
        assert_eq!(c.compose(&a, &b).unwrap(), MorphismId::degree(&[1, 1]));
        let (p, q) = c.backend().ore_hint(&a, &b).unwrap().unwrap();
        assert_eq!(p, MorphismId::degree(&[0, 1]));
        assert_eq!(q, MorphismId::degree(&[1, 0]));
    }

    #[test]
    fn parse_and_levels() {
        let c = Category::new(NkMonoid::new(2));
        let m = c.parse_morphism("(2,1)").unwrap();
        assert_eq!(c.level(&m), 2);
        assert_eq!(c.morphisms(1).len(), 4);
        assert!(c.parse_morphism("(1)").is_err());
    }

    #[test]
    fn joint_completion_closed_form() {
        let c = Category::new(NkMonoid::new(1));
        let d = |n: u32| MorphismId::degree(&[n]);
        let (sols, exact) = c.joint_completions(&d(2), &d(1), &d(3), &d(2), 5).unwrap();
        assert!(exact);
        assert_eq!(sols, vec![(d(0), d(1))]);
        let (none, _) = c.joint_completions(&d(2), &d(1), &d(3), &d(1), 5).unwrap();
        assert!(none.is_empty());
    }
}
