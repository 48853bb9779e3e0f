//! Finite linear combinations of spans `(alpha, beta)` with `s(alpha) =
//! s(beta)`, shared by spanning words `s_alpha s_beta^*` of the algebra and
//! indicator functions `1_{Z(alpha, beta)}` of the groupoid.

use std::collections::BTreeMap;

use num::traits::Zero;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fibration::{morphism_properties, ore_complete, ore_match_with, Fibration};
use crate::fincat::{Category, Completion};
use crate::ids::{MorphismId, ObjectId};
use crate::scalar::{self, Scalar};

pub type Span = (MorphismId, MorphismId);

/// A three-valued answer: `Unknown` when the available certificate does not
/// settle the question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Equal,
    NotEqual,
    Unknown,
}

/// A completion rule for cospans `(F(beta), F(mu))` of the base.
pub type CompletionRule<'a> = &'a dyn Fn(&Category, &MorphismId, &MorphismId) -> Result<Completion>;

#[derive(Clone)]
pub struct SpanSum {
    fib: Fibration,
    terms: BTreeMap<Span, Scalar>,
}

impl std::fmt::Debug for SpanSum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_map()
            .entries(
                self.terms
                    .iter()
                    .map(|((a, b), c)| (format!("({a}, {b})"), scalar::to_string(c))),
            )
            .finish()
    }
}

/// Whether the base is known to be left and right cancellative, which makes
/// distinct refined spans linearly independent.
pub(crate) fn cancellative_certified(base: &Category) -> bool {
    match base.known_cancellative() {
        Some((l, r)) => l && r,
        None if base.is_finite() => {
            let p = morphism_properties(base, 1);
            p.left_cancellative && p.right_cancellative
        }
        None => false,
    }
}

impl SpanSum {
    pub fn zero(f: &Fibration) -> Self {
        SpanSum {
            fib: f.clone(),
            terms: BTreeMap::new(),
        }
    }

    /// The single span `(alpha, beta)` with coefficient `c`.
    pub fn span(f: &Fibration, alpha: &MorphismId, beta: &MorphismId, c: Scalar) -> Result<Self> {
        let e = f.domain();
        let (sa, sb) = (e.source(alpha)?, e.source(beta)?);
        if sa != sb {
            return Err(Error::Precondition(format!(
                "({alpha}, {beta}) is not a span: sources {sa} and {sb} differ"
            )));
        }
        let mut out = Self::zero(f);
        out.add_term((alpha.clone(), beta.clone()), c);
        Ok(out)
    }

    pub fn fibration(&self) -> &Fibration {
        &self.fib
    }

    pub fn terms(&self) -> &BTreeMap<Span, Scalar> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, alpha: &MorphismId, beta: &MorphismId) -> Scalar {
        self.terms
            .get(&(alpha.clone(), beta.clone()))
            .cloned()
            .unwrap_or_else(scalar::zero)
    }

    pub fn add_term(&mut self, span: Span, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(span.clone()).or_insert_with(scalar::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&span);
        }
    }

    fn check_same(&self, other: &SpanSum) -> Result<()> {
        if self.fib.same_as(&other.fib) {
            Ok(())
        } else {
            Err(Error::FibrationMismatch(
                self.fib.name().to_string(),
                other.fib.name().to_string(),
            ))
        }
    }

    pub fn plus(&self, other: &SpanSum) -> Result<SpanSum> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (s, c) in &other.terms {
            out.add_term(s.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn minus(&self, other: &SpanSum) -> Result<SpanSum> {
        self.plus(&other.scale(&scalar::from_int(-1)))
    }

    pub fn scale(&self, c: &Scalar) -> SpanSum {
        let mut out = Self::zero(&self.fib);
        for (s, d) in &self.terms {
            out.add_term(s.clone(), d * c);
        }
        out
    }

    /// `(alpha, beta) -> (beta, alpha)` with conjugated coefficients.
    pub fn adjoint(&self) -> SpanSum {
        let mut out = Self::zero(&self.fib);
        for ((a, b), c) in &self.terms {
            out.add_term((b.clone(), a.clone()), scalar::conj(c));
        }
        out
    }

    /// The product of spans through the canonical Ore completion.
    pub fn product(&self, other: &SpanSum) -> Result<SpanSum> {
        self.product_with(other, &|base, m, n| ore_complete(base, m, n))
    }

    /// `(alpha, beta)(mu, nu) = sum of (alpha eta, nu lambda)` over the
    /// pairs with `beta eta = mu lambda` above the completion chosen by
    /// `rule` for `(F(beta), F(mu))`.
    pub fn product_with(&self, other: &SpanSum, rule: CompletionRule<'_>) -> Result<SpanSum> {
        self.check_same(other)?;
        let f = &self.fib;
        let e = f.domain();
        let mut out = Self::zero(f);
        for ((alpha, beta), c) in &self.terms {
            let rb = e.target(beta)?;
            let fb = f.apply(beta)?;
            for ((mu, nu), d) in &other.terms {
                if e.target(mu)? != rb {
                    continue;
                }
                let completion = rule(f.codomain(), &fb, &f.apply(mu)?)?;
                let cd = c * d;
                for (eta, lam) in ore_match_with(f, beta, mu, &completion)? {
                    out.add_term((e.compose(alpha, &eta)?, e.compose(nu, &lam)?), cd.clone());
                }
            }
        }
        Ok(out)
    }

    /// Rewrites each span whose source lies over `r(c)` as the sum of
    /// `(alpha gamma, beta gamma)` over the lifts `gamma` of `c`; other spans
    /// are unchanged.
    pub fn refine(&self, c: &MorphismId) -> Result<SpanSum> {
        let f = &self.fib;
        let rc = f.codomain().target(c)?;
        let mut out = Self::zero(f);
        for ((alpha, beta), k) in &self.terms {
            let x = f.domain().source(alpha)?;
            if f.apply_object(&x)? != rc {
                out.add_term((alpha.clone(), beta.clone()), k.clone());
                continue;
            }
            self.refine_span(&mut out, alpha, beta, &x, c, k)?;
        }
        Ok(out)
    }

    fn refine_span(
        &self,
        out: &mut SpanSum,
        alpha: &MorphismId,
        beta: &MorphismId,
        x: &ObjectId,
        c: &MorphismId,
        k: &Scalar,
    ) -> Result<()> {
        let e = self.fib.domain();
        for gamma in self.fib.enumerate_fiber(x, c)? {
            out.add_term(
                (e.compose(alpha, &gamma)?, e.compose(beta, &gamma)?),
                k.clone(),
            );
        }
        Ok(())
    }

    /// A base morphism into `y` through which every morphism of `degrees`
    /// factors on the left: the least one in level order for finite bases,
    /// iterated Ore completion otherwise.
    fn common_multiple(&self, y: &ObjectId, degrees: &[MorphismId]) -> Result<MorphismId> {
        let base = self.fib.codomain();
        if base.is_finite() {
            let mut candidates = base.morphisms_into(y, usize::MAX);
            candidates.sort_by_key(|m| (base.level(m), m.clone()));
            for n in candidates {
                let mut all = true;
                for d in degrees {
                    if base.divide_left(d, &n)?.is_empty() {
                        all = false;
                        break;
                    }
                }
                if all {
                    return Ok(n);
                }
            }
        }
        let mut n = degrees[0].clone();
        for d in &degrees[1..] {
            let (p, _) = ore_complete(base, &n, d)?;
            n = base.compose(&n, &p)?;
        }
        Ok(n)
    }

    /// Refines every span so that, among spans whose range lies over the
    /// same base object, all first legs have the same image.
    pub fn common_refinement(&self) -> Result<SpanSum> {
        let f = &self.fib;
        let base = f.codomain();
        let mut groups: BTreeMap<ObjectId, Vec<(&Span, &Scalar)>> = BTreeMap::new();
        for (s, c) in &self.terms {
            let y = f.apply_object(&f.domain().target(&s.0)?)?;
            groups.entry(y).or_default().push((s, c));
        }
        let mut out = Self::zero(f);
        for (y, terms) in groups {
            let mut degrees: Vec<MorphismId> = terms
                .iter()
                .map(|((a, _), _)| f.apply(a))
                .collect::<Result<_>>()?;
            degrees.sort();
            degrees.dedup();
            let n = self.common_multiple(&y, &degrees)?;
            for ((alpha, beta), k) in terms {
                let fa = f.apply(alpha)?;
                let c = base
                    .divide_left(&fa, &n)?
                    .into_iter()
                    .next()
                    .ok_or_else(|| Error::NoCompletion {
                        left: fa.to_string(),
                        right: n.to_string(),
                    })?;
                let x = f.domain().source(alpha)?;
                self.refine_span(&mut out, alpha, beta, &x, &c, k)?;
            }
        }
        Ok(out)
    }

    /// Decides equality by refining the difference to a common level and
    /// comparing coefficients. A nonzero remainder proves inequality only
    /// when the base is certified cancellative.
    pub fn compare(&self, other: &SpanSum) -> Result<Verdict> {
        let diff = self.minus(other)?;
        if diff.is_zero() {
            return Ok(Verdict::Equal);
        }
        if diff.common_refinement()?.is_zero() {
            return Ok(Verdict::Equal);
        }
        Ok(if cancellative_certified(self.fib.codomain()) {
            Verdict::NotEqual
        } else {
            Verdict::Unknown
        })
    }

    /// `{"terms": [{"alpha", "beta", "re", "im"}]}` in span order.
    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|((a, b), c)| {
                json!({
                    "alpha": a.to_string(),
                    "beta": b.to_string(),
                    "re": scalar::rational_to_string(&c.re),
                    "im": scalar::rational_to_string(&c.im),
                })
            })
            .collect();
        json!({ "terms": terms })
    }

    pub fn from_json(f: &Fibration, doc: &Value) -> Result<SpanSum> {
        let terms = doc
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::schema("terms", "expected an array"))?;
        let e = f.domain();
        let mut out = Self::zero(f);
        for (i, t) in terms.iter().enumerate() {
            let get = |k: &str| -> Result<&str> {
                t.get(k)
                    .and_then(Value::as_str)
                    .ok_or_else(|| Error::schema(format!("terms[{i}].{k}"), "expected a string"))
            };
            let im = t.get("im").and_then(Value::as_str).unwrap_or("0");
            let term = Self::span(
                f,
                &e.parse_morphism(get("alpha")?)?,
                &e.parse_morphism(get("beta")?)?,
                scalar::parse_scalar(get("re")?, im)?,
            )?;
            out = out.plus(&term)?;
        }
        Ok(out)
    }
}

impl PartialEq for SpanSum {
    /// Syntactic equality of the term maps over the same fibration.
    fn eq(&self, other: &Self) -> bool {
        self.fib.same_as(&other.fib) && self.terms == other.terms
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn o2_span(a: &str, b: &str) -> SpanSum {
        let f = catalog::o_n(2).unwrap();
        let e = f.domain();
        SpanSum::span(
            &f,
            &e.parse_morphism(a).unwrap(),
            &e.parse_morphism(b).unwrap(),
            scalar::one(),
        )
        .unwrap()
    }

    #[test]
    fn spans_need_a_common_source() {
        let f = catalog::by_name("pair-groupoid-3").unwrap();
        let e = f.domain();
        let g01 = e.parse_morphism("g01").unwrap();
        let g02 = e.parse_morphism("g02").unwrap();
        assert!(SpanSum::span(&f, &g01, &g02, scalar::one()).is_err());
    }

    #[test]
    fn refinement_preserves_equality() {
        let unit = o2_span("v", "v");
        let refined = unit.refine(&MorphismId::degree(&[1])).unwrap();
        assert_eq!(refined.len(), 2);
        assert_eq!(unit.compare(&refined).unwrap(), Verdict::Equal);
        let twice = refined.refine(&MorphismId::degree(&[1])).unwrap();
        assert_eq!(twice, unit.refine(&MorphismId::degree(&[2])).unwrap());
        assert_eq!(
            o2_span("e1", "v").compare(&o2_span("e2", "v")).unwrap(),
            Verdict::NotEqual
        );
    }

    #[test]
    fn json_round_trip() {
        let a = o2_span("e1", "e2")
            .plus(&o2_span("e2.e1", "e1").scale(&scalar::from_ratio(-1, 3)))
            .unwrap();
        let back = SpanSum::from_json(a.fibration(), &a.to_json()).unwrap();
        assert_eq!(back, a);
    }
}
