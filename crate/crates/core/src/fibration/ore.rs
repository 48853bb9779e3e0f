//! Ore completions, the Ore and strong Ore checks, and cancellativity.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use serde_json::{json, Value};

use super::Fibration;
use crate::error::{Error, Result};
use crate::fincat::{Category, Completion};
use crate::ids::MorphismId;

fn completion_key(cat: &Category, c: &Completion) -> (usize, usize, MorphismId, MorphismId) {
    let (p, q) = c;
    (
        cat.level(p) + cat.level(q),
        cat.level(q),
        p.clone(),
        q.clone(),
    )
}

/// Every completion `(p, q)` of the cospan `(m, n)` with `m p = n q` and both
/// legs of level at most `max_level`, sorted by
/// `(level p + level q, level q, p, q)`.
pub fn all_completions(
    cat: &Category,
    m: &MorphismId,
    n: &MorphismId,
    max_level: usize,
) -> Result<Vec<Completion>> {
    if cat.target(m)? != cat.target(n)? {
        return Err(Error::NotACospan {
            left: m.to_string(),
            right: n.to_string(),
        });
    }
    let (sm, sn) = (cat.source(m)?, cat.source(n)?);
    let mut by_value: HashMap<(MorphismId, crate::ids::ObjectId), Vec<MorphismId>> = HashMap::new();
    for q in cat.morphisms_into(&sn, max_level) {
        if let Ok(nq) = cat.compose(n, &q) {
            by_value.entry((nq, cat.source(&q)?)).or_default().push(q);
        }
    }
    let mut out = Vec::new();
    for p in cat.morphisms_into(&sm, max_level) {
        let Ok(mp) = cat.compose(m, &p) else { continue };
        if let Some(qs) = by_value.get(&(mp, cat.source(&p)?)) {
            for q in qs {
                out.push((p.clone(), q.clone()));
            }
        }
    }
    out.sort_by_key(|c| completion_key(cat, c));
    Ok(out)
}

/// Whether `(p2, q2)` factors through `(p, q)`, i.e. `p t = p2`, `q t = q2`
/// for some `t`. Returns the number of such `t`.
fn factor_count(cat: &Category, (p, q): &Completion, (p2, q2): &Completion) -> Result<usize> {
    let mut n = 0;
    for t in cat.divide_left(p, p2)? {
        if cat.compose(q, &t).ok().as_ref() == Some(q2) {
            n += 1;
        }
    }
    Ok(n)
}

/// The canonical completion of the cospan `(m, n)`.
///
/// Backends with a closed form (groups, N^k, products of those) supply it.
/// Otherwise, among the completions found by bounded search, the first one
/// through which every other completion factors is chosen, falling back to
/// the first completion in search order.
pub fn ore_complete(cat: &Category, m: &MorphismId, n: &MorphismId) -> Result<Completion> {
    if cat.target(m)? != cat.target(n)? {
        return Err(Error::NotACospan {
            left: m.to_string(),
            right: n.to_string(),
        });
    }
    if let Some(c) = cat.cached_completion(m, n) {
        return Ok(c);
    }
    let c = match cat.backend().ore_hint(m, n) {
        Some(r) => r?,
        None => {
            let bound = if cat.is_finite() {
                1
            } else {
                cat.level(m) + cat.level(n)
            };
            let all = all_completions(cat, m, n, bound)?;
            let mut chosen = None;
            if cat.is_finite() {
                for c in &all {
                    let mut terminal = true;
                    for other in &all {
                        if factor_count(cat, c, other)? == 0 {
                            terminal = false;
                            break;
                        }
                    }
                    if terminal {
                        chosen = Some(c.clone());
                        break;
                    }
                }
            }
            match chosen.or_else(|| all.into_iter().next()) {
                Some(c) => c,
                None => {
                    return Err(Error::NoCompletion {
                        left: m.to_string(),
                        right: n.to_string(),
                    })
                }
            }
        }
    };
    cat.store_completion(m, n, &c);
    Ok(c)
}

/// The pairs `(eta, lambda)` with `beta eta = sigma lambda`, `F(eta) = a` and
/// `F(lambda) = b`, where `(a, b)` is the canonical completion of
/// `(F(beta), F(sigma))`. Empty when `beta` and `sigma` have different
/// targets.
pub fn ore_match(f: &Fibration, beta: &MorphismId, sigma: &MorphismId) -> Result<Vec<Completion>> {
    let e = f.domain();
    if e.target(beta)? != e.target(sigma)? {
        return Ok(Vec::new());
    }
    let completion = ore_complete(f.codomain(), &f.apply(beta)?, &f.apply(sigma)?)?;
    ore_match_with(f, beta, sigma, &completion)
}

/// [`ore_match`] with an explicitly supplied completion `(a, b)` of
/// `(F(beta), F(sigma))`.
pub fn ore_match_with(
    f: &Fibration,
    beta: &MorphismId,
    sigma: &MorphismId,
    (a, b): &Completion,
) -> Result<Vec<Completion>> {
    let e = f.domain();
    if e.target(beta)? != e.target(sigma)? {
        return Ok(Vec::new());
    }
    let base = f.codomain();
    if base.compose(&f.apply(beta)?, a)? != base.compose(&f.apply(sigma)?, b)? {
        return Err(Error::Precondition(format!(
            "({a}, {b}) does not complete ({beta}, {sigma})"
        )));
    }
    let mut by_composite: HashMap<MorphismId, Vec<MorphismId>> = HashMap::new();
    for lam in f.enumerate_fiber(&e.source(sigma)?, b)? {
        by_composite
            .entry(e.compose(sigma, &lam)?)
            .or_default()
            .push(lam);
    }
    let mut out = Vec::new();
    for eta in f.enumerate_fiber(&e.source(beta)?, a)? {
        if let Some(lams) = by_composite.get(&e.compose(beta, &eta)?) {
            for lam in lams {
                out.push((eta.clone(), lam.clone()));
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Cancellativity decided by searching for colliding composites among
/// morphisms of level at most `depth`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MorphismProperties {
    pub depth: Option<usize>,
    pub not_monic: Vec<String>,
    pub not_epi: Vec<String>,
    pub left_cancellative: bool,
    pub right_cancellative: bool,
}

impl MorphismProperties {
    pub fn is_monic(&self, m: &MorphismId) -> bool {
        !self.not_monic.contains(&m.to_string())
    }

    pub fn is_epi(&self, m: &MorphismId) -> bool {
        !self.not_epi.contains(&m.to_string())
    }
}

pub fn morphism_properties(cat: &Category, depth: usize) -> MorphismProperties {
    let ms = cat.morphisms(if cat.is_finite() { 1 } else { depth });
    let mut by_target: BTreeMap<_, Vec<&MorphismId>> = BTreeMap::new();
    for m in &ms {
        if let Ok(t) = cat.target(m) {
            by_target.entry(t).or_default().push(m);
        }
    }
    let mut left: HashMap<(MorphismId, MorphismId), MorphismId> = HashMap::new();
    let mut right: HashMap<(MorphismId, MorphismId), MorphismId> = HashMap::new();
    let mut not_monic = Vec::new();
    let mut not_epi = Vec::new();
    for a in &ms {
        let Ok(sa) = cat.source(a) else { continue };
        for b in by_target.get(&sa).into_iter().flatten() {
            let Ok(ab) = cat.compose(a, b) else { continue };
            // a b = a b' with b != b' means a is not monic.
            if let Some(prev) = left.insert((a.clone(), ab.clone()), (*b).clone()) {
                if &prev != *b && !not_monic.contains(a) {
                    not_monic.push(a.clone());
                }
            }
            if let Some(prev) = right.insert(((*b).clone(), ab), a.clone()) {
                if &prev != a && !not_epi.contains(*b) {
                    not_epi.push((*b).clone());
                }
            }
        }
    }
    not_monic.sort();
    not_epi.sort();
    MorphismProperties {
        depth: (!cat.is_finite()).then_some(depth),
        left_cancellative: not_monic.is_empty(),
        right_cancellative: not_epi.is_empty(),
        not_monic: not_monic.iter().map(|m| m.to_string()).collect(),
        not_epi: not_epi.iter().map(|m| m.to_string()).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FastPath {
    pub applies: bool,
    /// True when the fast path does not apply, or when it applies and the
    /// exhaustive check confirms its conclusion.
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OreReport {
    pub depth: Option<usize>,
    pub cospans_checked: usize,
    pub right_ore: bool,
    pub strongly_right_ore: bool,
    pub has_pullbacks: bool,
    pub left_cancellative: bool,
    pub right_cancellative: bool,
    pub pullback_fast_path: FastPath,
    pub cancellative_fast_path: FastPath,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ore_counterexample: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strong_counterexample: Option<Value>,
}

/// Exhaustive Ore checks over all cospans of level at most `depth` (every
/// cospan for finite categories).
///
/// Completions are searched up to level `depth` on graded backends (where
/// the canonical completion is added if it lies above that bound) and
/// exhaustively on finite ones. The two sufficient conditions for the strong
/// property, pullbacks and left cancellativity plus right Ore, are evaluated
/// independently and compared with the exhaustive verdict.
pub fn check_ore(cat: &Category, depth: usize) -> OreReport {
    let finite = cat.is_finite();
    let level = if finite { 1 } else { depth };
    let ms = cat.morphisms(level);
    let mut by_target: BTreeMap<_, Vec<&MorphismId>> = BTreeMap::new();
    for m in &ms {
        if let Ok(t) = cat.target(m) {
            by_target.entry(t).or_default().push(m);
        }
    }
    let mut cospans_checked = 0;
    let mut right_ore = true;
    let mut strong = true;
    let mut pullbacks = true;
    let mut ore_cx = None;
    let mut strong_cx = None;
    for group in by_target.values() {
        for m in group {
            for n in group {
                cospans_checked += 1;
                let mut comps = all_completions(cat, m, n, level).unwrap_or_default();
                if !finite {
                    if let Some(Ok(c)) = cat.backend().ore_hint(m, n) {
                        if !comps.contains(&c) {
                            comps.insert(0, c);
                        }
                    }
                }
                if comps.is_empty() {
                    right_ore = false;
                    strong = false;
                    pullbacks = false;
                    if ore_cx.is_none() {
                        ore_cx = Some(json!({"cospan": [m.to_string(), n.to_string()]}));
                    }
                    continue;
                }
                if pullbacks {
                    let has_pullback = comps.iter().any(|c| {
                        comps
                            .iter()
                            .all(|o| factor_count(cat, c, o).map(|k| k == 1).unwrap_or(false))
                    });
                    pullbacks = has_pullback;
                }
                if strong_cx.is_some() {
                    continue;
                }
                'pairs: for c1 in &comps {
                    for c2 in &comps {
                        let (sols, exact) = cat
                            .joint_completions(&c1.0, &c2.0, &c1.1, &c2.1, level)
                            .unwrap_or((Vec::new(), true));
                        if sols.is_empty() && exact {
                            strong = false;
                            strong_cx = Some(json!({
                                "cospan": [m.to_string(), n.to_string()],
                                "completions": [
                                    [c1.0.to_string(), c1.1.to_string()],
                                    [c2.0.to_string(), c2.1.to_string()],
                                ],
                            }));
                            break 'pairs;
                        }
                    }
                }
            }
        }
    }
    let props = morphism_properties(cat, depth);
    let cancellative_applies = props.left_cancellative && right_ore;
    OreReport {
        depth: (!finite).then_some(depth),
        cospans_checked,
        right_ore,
        strongly_right_ore: strong,
        has_pullbacks: pullbacks,
        left_cancellative: props.left_cancellative,
        right_cancellative: props.right_cancellative,
        pullback_fast_path: FastPath {
            applies: pullbacks,
            agrees: !pullbacks || strong,
        },
        cancellative_fast_path: FastPath {
            applies: cancellative_applies,
            agrees: !cancellative_applies || strong,
        },
        ore_counterexample: ore_cx,
        strong_counterexample: strong_cx,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::explicit::{cyclic_group, symmetric_group_3};
    use crate::fincat::{build_poset_category, product, NkMonoid};

    fn poset(elements: &[&str], leq: &[(&str, &str)]) -> Category {
        build_poset_category(
            elements.iter().map(|s| s.to_string()).collect(),
            leq.iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn nk_completion_is_the_join() {
        let c = Category::new(NkMonoid::new(2));
        let (p, q) = ore_complete(
            &c,
            &MorphismId::degree(&[1, 0]),
            &MorphismId::degree(&[0, 1]),
        )
        .unwrap();
        assert_eq!(p, MorphismId::degree(&[0, 1]));
        assert_eq!(q, MorphismId::degree(&[1, 0]));
    }

    #[test]
    fn group_completion_is_quotient() {
        let s3 = symmetric_group_3().unwrap();
        for g in s3.morphisms(1) {
            for h in s3.morphisms(1) {
                let (p, q) = ore_complete(&s3, &g, &h).unwrap();
                assert!(s3.is_identity(&q));
                assert_eq!(s3.compose(&g, &p).unwrap(), s3.compose(&h, &q).unwrap());
            }
        }
    }

    #[test]
    fn poset_completion_is_the_meet() {
        let diamond = poset(
            &["b", "l", "r", "t"],
            &[("b", "l"), ("b", "r"), ("l", "t"), ("r", "t")],
        );
        let (p, q) = ore_complete(&diamond, &"l<=t".into(), &"r<=t".into()).unwrap();
        assert_eq!(p, MorphismId::named("b<=l"));
        assert_eq!(q, MorphismId::named("b<=r"));
    }

    #[test]
    fn fast_paths_agree_on_finite_fixtures() {
        let chain = poset(&["0", "1", "2"], &[("0", "1"), ("1", "2")]);
        let diamond = poset(
            &["b", "l", "r", "t"],
            &[("b", "l"), ("b", "r"), ("l", "t"), ("r", "t")],
        );
        for cat in [cyclic_group(3).unwrap(), chain, diamond] {
            let r = check_ore(&cat, 2);
            assert!(r.right_ore && r.strongly_right_ore);
            assert!(r.pullback_fast_path.applies && r.pullback_fast_path.agrees);
            assert!(r.cancellative_fast_path.agrees);
        }
    }

    #[test]
    fn v_poset_is_not_right_ore() {
        let v = poset(&["a", "b", "c"], &[("a", "c"), ("b", "c")]);
        let r = check_ore(&v, 2);
        assert!(!r.right_ore);
        assert!(r.ore_counterexample.is_some());
        assert!(matches!(
            ore_complete(&v, &"a<=c".into(), &"b<=c".into()),
            Err(Error::NoCompletion { .. })
        ));
    }

    #[test]
    fn product_of_posets_is_strongly_right_ore() {
        let chain = poset(&["0", "1"], &[("0", "1")]);
        let p = product(vec![chain.clone(), chain]).unwrap();
        let r = check_ore(&p, 2);
        assert!(r.strongly_right_ore);
    }

    #[test]
    fn cancellativity() {
        let nk = Category::new(NkMonoid::new(2));
        let p = morphism_properties(&nk, 2);
        assert!(p.left_cancellative && p.right_cancellative);
        assert_eq!(p.depth, Some(2));
        let chain = poset(&["0", "1", "2"], &[("0", "1"), ("1", "2")]);
        assert!(morphism_properties(&chain, 1).left_cancellative);
        let z3 = cyclic_group(3).unwrap();
        let p = morphism_properties(&z3, 1);
        assert!(p.left_cancellative && p.right_cancellative && p.depth.is_none());
    }

    #[test]
    fn nk_is_strongly_right_ore_to_depth() {
        let r = check_ore(&Category::new(NkMonoid::new(2)), 2);
        assert!(r.strongly_right_ore && r.left_cancellative);
        assert!(r.cancellative_fast_path.applies && r.cancellative_fast_path.agrees);
    }
}
