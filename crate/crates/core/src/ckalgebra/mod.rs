//! The symbolic *-algebra spanned by the words `s_alpha s_beta^*`, the
//! relation checker for concrete matrix assignments, and the map to
//! functions on the germ groupoid.

mod probe;
mod rep;
mod word;

use std::fmt;

use serde_json::Value;

use crate::error::Result;
use crate::fibration::Fibration;
use crate::groupoid::GroupoidFunction;
use crate::ids::{MorphismId, ObjectId};
use crate::scalar::{self, Scalar};
use crate::span_sum::{CompletionRule, SpanSum, Verdict};

pub use probe::{injectivity_probe, right_cancellative_certified, InjectivityReport, PairProbe};
pub use rep::{
    check_ck_relations, default_degrees, group_regular_representation, path_representation,
    truncated_path_representation, CkReport, RelationResult, RepAssignment,
};
pub use word::parse_word;

/// A finite combination of spanning words `s_alpha s_beta^*`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement(pub(crate) SpanSum);

impl AlgebraElement {
    pub fn zero(f: &Fibration) -> Self {
        AlgebraElement(SpanSum::zero(f))
    }

    /// `p_X`, the word `(Id_X, Id_X)`.
    pub fn p(f: &Fibration, x: &ObjectId) -> Result<Self> {
        let id = f.domain().identity(x)?;
        Self::word(f, &id, &id, scalar::one())
    }

    /// `s_alpha`, the word `(alpha, Id_{s(alpha)})`.
    pub fn s(f: &Fibration, alpha: &MorphismId) -> Result<Self> {
        let e = f.domain();
        let id = e.identity(&e.source(alpha)?)?;
        Self::word(f, alpha, &id, scalar::one())
    }

    /// `s_alpha^*`, the word `(Id_{s(alpha)}, alpha)`.
    pub fn s_adj(f: &Fibration, alpha: &MorphismId) -> Result<Self> {
        Ok(Self::s(f, alpha)?.involute())
    }

    /// `c s_alpha s_beta^*`.
    pub fn word(f: &Fibration, alpha: &MorphismId, beta: &MorphismId, c: Scalar) -> Result<Self> {
        Ok(AlgebraElement(SpanSum::span(f, alpha, beta, c)?))
    }

    pub fn fibration(&self) -> &Fibration {
        self.0.fibration()
    }

    /// `((alpha, beta), coefficient)` in word order.
    pub fn terms(&self) -> Vec<((MorphismId, MorphismId), Scalar)> {
        self.0
            .terms()
            .iter()
            .map(|(s, c)| (s.clone(), c.clone()))
            .collect()
    }

    pub fn coefficient(&self, alpha: &MorphismId, beta: &MorphismId) -> Scalar {
        self.0.coefficient(alpha, beta)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        Ok(AlgebraElement(self.0.plus(&other.0)?))
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        Ok(AlgebraElement(self.0.minus(&other.0)?))
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        AlgebraElement(self.0.scale(c))
    }

    /// The product, expanding `s_beta^* s_mu` through the canonical Ore
    /// completion of `(F(beta), F(mu))`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        Ok(AlgebraElement(self.0.product(&other.0)?))
    }

    /// The product through completions chosen by `rule`.
    pub fn multiply_with(&self, other: &Self, rule: CompletionRule<'_>) -> Result<Self> {
        Ok(AlgebraElement(self.0.product_with(&other.0, rule)?))
    }

    /// `(alpha, beta) -> (beta, alpha)` with conjugated coefficients.
    pub fn involute(&self) -> Self {
        AlgebraElement(self.0.adjoint())
    }

    /// Rewrites each word `s_alpha s_beta^*` whose source lies over `r(c)`
    /// as the sum of `s_{alpha gamma} s_{beta gamma}^*` over lifts `gamma`
    /// of `c`.
    pub fn refine(&self, c: &MorphismId) -> Result<Self> {
        Ok(AlgebraElement(self.0.refine(c)?))
    }

    /// The element refined so that words with ranges over the same base
    /// object share the image of their first leg.
    pub fn normal_form(&self) -> Result<Self> {
        Ok(AlgebraElement(self.0.common_refinement()?))
    }

    /// Equality decided by common refinement. A nonzero difference is
    /// conclusive only over a base certified to be cancellative.
    pub fn equal(&self, other: &Self) -> Result<Verdict> {
        self.0.compare(&other.0)
    }

    /// The word `(alpha, beta)` goes to the indicator of `Z(alpha, beta)`.
    pub fn upsilon(&self) -> GroupoidFunction {
        GroupoidFunction(self.0.clone())
    }

    pub fn to_json(&self) -> Value {
        self.0.to_json()
    }

    pub fn from_json(f: &Fibration, doc: &Value) -> Result<Self> {
        Ok(AlgebraElement(SpanSum::from_json(f, doc)?))
    }

    /// Parses a sum of words such as `2*s(e1)*s(e2)^* + p(v)`.
    pub fn parse(f: &Fibration, text: &str) -> Result<Self> {
        parse_word(f, text)
    }
}

fn word_text(f: &Fibration, alpha: &MorphismId, beta: &MorphismId) -> String {
    let e = f.domain();
    match (e.is_identity(alpha), e.is_identity(beta)) {
        (true, true) => match e.target(alpha) {
            Ok(x) => format!("p({x})"),
            Err(_) => format!("s({alpha})*s({beta})^*"),
        },
        (false, true) => format!("s({alpha})"),
        (true, false) => format!("s({beta})^*"),
        (false, false) => format!("s({alpha})*s({beta})^*"),
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_zero() {
            return write!(f, "0");
        }
        let fib = self.fibration();
        for (i, ((a, b), c)) in self.0.terms().iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if c != &scalar::one() {
                let text = scalar::to_string(c);
                if c.im == num::Zero::zero() {
                    write!(f, "{text}*")?;
                } else {
                    write!(f, "({text})*")?;
                }
            }
            write!(f, "{}", word_text(fib, a, b))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::groupoid::GermBasisSet;

    fn el(f: &Fibration, s: &str) -> AlgebraElement {
        AlgebraElement::parse(f, s).unwrap()
    }

    #[test]
    fn cuntz_relations() {
        for n in [2, 3] {
            let f = catalog::o_n(n).unwrap();
            for i in 1..=n {
                for j in 1..=n {
                    for k in 1..=n {
                        for l in 1..=n {
                            let a = el(&f, &format!("s(e{i})*s(e{j})^*"));
                            let b = el(&f, &format!("s(e{k})*s(e{l})^*"));
                            let expected = if j == k {
                                el(&f, &format!("s(e{i})*s(e{l})^*"))
                            } else {
                                AlgebraElement::zero(&f)
                            };
                            assert_eq!(a.multiply(&b).unwrap(), expected);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn refinement_and_equality() {
        let f = catalog::o_n(2).unwrap();
        let p = el(&f, "p(v)");
        let one = MorphismId::degree(&[1]);
        let sum = el(&f, "s(e1)*s(e1)^* + s(e2)*s(e2)^*");
        assert_eq!(p.refine(&one).unwrap(), sum);
        assert_eq!(p.equal(&sum).unwrap(), Verdict::Equal);
        assert_eq!(p.refine(&MorphismId::degree(&[0])).unwrap(), p);
        assert_eq!(
            el(&f, "s(e1)").equal(&el(&f, "s(e2)")).unwrap(),
            Verdict::NotEqual
        );
        let twice = p.refine(&one).unwrap().refine(&one).unwrap();
        assert_eq!(twice, p.refine(&MorphismId::degree(&[2])).unwrap());
    }

    #[test]
    fn group_words_reduce() {
        let f = catalog::by_name("z3").unwrap();
        let g = el(&f, "s(1)^**s(2)");
        assert_eq!(g, el(&f, "s(1)"));
        assert_eq!(el(&f, "s(1)*s(1)*s(1)"), el(&f, "p(*)"));
    }

    #[test]
    fn generator_relations() {
        let f = catalog::by_name("2-graph").unwrap();
        let e = f.domain();
        let ms = e.morphisms(1);
        for a in &ms {
            let sa = el(&f, &format!("s({a})"));
            let p = AlgebraElement::p(&f, &e.source(a).unwrap()).unwrap();
            assert_eq!(sa.involute().multiply(&sa).unwrap(), p);
            for b in &ms {
                if a != b && f.apply(a).unwrap() == f.apply(b).unwrap() {
                    let sb = el(&f, &format!("s({b})"));
                    assert!(sb.involute().multiply(&sa).unwrap().is_zero());
                }
            }
        }
    }

    #[test]
    fn upsilon_maps_words_to_cells() {
        let f = catalog::o_n(2).unwrap();
        let a = el(&f, "s(e1)");
        let cell = GermBasisSet::parse(&f, "Z(e1, v)").unwrap();
        assert_eq!(a.upsilon(), GroupoidFunction::indicator(&f, &cell).unwrap());
        let b = el(&f, "s(e2)^*");
        assert_eq!(
            a.multiply(&b).unwrap().upsilon(),
            a.upsilon().convolve(&b.upsilon()).unwrap()
        );
        assert_eq!(a.involute().upsilon(), a.upsilon().involute());
    }

    #[test]
    fn display_round_trips() {
        let f = catalog::o_n(2).unwrap();
        let a = el(&f, "1/2*s(e1)*s(e2)^* + p(v) + -3*s(e2.e1)");
        assert_eq!(el(&f, &a.to_string()), a);
        assert_eq!(AlgebraElement::from_json(&f, &a.to_json()).unwrap(), a);
    }
}
