//! Distinguishing generators `s_alpha` and `s_beta` symbolically, with a
//! search for collapsing morphisms when the base is not right cancellative.

use serde::Serialize;

use super::AlgebraElement;
use crate::error::Result;
use crate::fibration::{morphism_properties, Fibration};
use crate::fincat::Category;
use crate::ids::MorphismId;
use crate::span_sum::Verdict;

fn cancellation(base: &Category, depth: usize) -> (bool, bool) {
    match base.known_cancellative() {
        Some(lr) => lr,
        None => {
            let p = morphism_properties(base, depth);
            (p.left_cancellative, p.right_cancellative)
        }
    }
}

/// Whether the base is known, or exhaustively checked on a finite base, to
/// be right cancellative.
pub fn right_cancellative_certified(base: &Category) -> bool {
    match base.known_cancellative() {
        Some((_, r)) => r,
        None if base.is_finite() => morphism_properties(base, 1).right_cancellative,
        None => false,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairProbe {
    pub alpha: String,
    pub beta: String,
    pub verdict: Verdict,
    /// A base morphism `a` with `F(alpha) a = F(beta) a`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collapse_witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InjectivityReport {
    /// Left cancellativity of the base, checked to `depth` on infinite bases.
    pub left_cancellative: bool,
    pub right_cancellative_certified: bool,
    /// `Some(true)` when right cancellativity is certified and every distinct
    /// pair is separated, `Some(false)` when a pair collapses or a certified
    /// base fails to separate one.
    pub injective: Option<bool>,
    pub pairs: Vec<PairProbe>,
}

/// Compares `s_alpha` with `s_beta` for each pair.
pub fn injectivity_probe(
    f: &Fibration,
    pairs: &[(MorphismId, MorphismId)],
    depth: usize,
) -> Result<InjectivityReport> {
    let base = f.codomain();
    let (left, _) = cancellation(base, depth);
    let certified = right_cancellative_certified(base);
    let mut out = Vec::new();
    let mut injective = certified.then_some(true);
    for (alpha, beta) in pairs {
        let verdict = AlgebraElement::s(f, alpha)?.equal(&AlgebraElement::s(f, beta)?)?;
        let mut witness = None;
        if alpha != beta {
            if certified && verdict != Verdict::NotEqual {
                injective = Some(false);
            }
            if !certified {
                let (fa, fb) = (f.apply(alpha)?, f.apply(beta)?);
                if base.source(&fa)? == base.source(&fb)?
                    && base.target(&fa)? == base.target(&fb)?
                {
                    let level = if base.is_finite() { usize::MAX } else { depth };
                    for a in base.morphisms_into(&base.source(&fa)?, level) {
                        if base.compose(&fa, &a)? == base.compose(&fb, &a)? {
                            witness = Some(a.to_string());
                            injective = Some(false);
                            break;
                        }
                    }
                }
            }
        }
        out.push(PairProbe {
            alpha: alpha.to_string(),
            beta: beta.to_string(),
            verdict,
            collapse_witness: witness,
        });
    }
    Ok(InjectivityReport {
        left_cancellative: left,
        right_cancellative_certified: certified,
        injective,
        pairs: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn graded_base_separates_generators() {
        let f = catalog::by_name("2-graph").unwrap();
        let ms = f.domain().morphisms(1);
        let pairs: Vec<_> = ms
            .iter()
            .flat_map(|a| ms.iter().map(move |b| (a.clone(), b.clone())))
            .collect();
        let report = injectivity_probe(&f, &pairs, 2).unwrap();
        assert!(report.right_cancellative_certified);
        assert_eq!(report.injective, Some(true));
        for p in &report.pairs {
            let expected = if p.alpha == p.beta {
                Verdict::Equal
            } else {
                Verdict::NotEqual
            };
            assert_eq!(p.verdict, expected, "{} {}", p.alpha, p.beta);
        }
    }
}
