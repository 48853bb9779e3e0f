//! Functor laws, the unique factorization lifting check, row finiteness,
//! strong surjectivity and restriction to the image.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;
use serde_json::json;

use super::{ore, Fibration, FibrationFlags};
use crate::error::{Error, Result};
use crate::fincat::image::SubCategory;
use crate::fincat::{Category, CheckResult, ValidationReport};
use crate::ids::MorphismId;

fn level_bound(cat: &Category, depth: usize) -> usize {
    if cat.is_finite() {
        1
    } else {
        depth
    }
}

/// Whether `u v` is known to have level above `depth`, so that it cannot be
/// one of the morphisms being checked.
fn beyond(cat: &Category, depth: usize, u: &MorphismId, v: &MorphismId) -> bool {
    !cat.is_finite() && cat.composite_level(u, v).is_some_and(|l| l > depth)
}

fn reported_depth(cat: &Category, depth: usize) -> Option<usize> {
    (!cat.is_finite()).then_some(depth)
}

/// Checks that objects and morphisms land in the codomain, that sources,
/// targets and identities are preserved, and that composable pairs of level
/// at most `depth` are sent to composites. On infinite domains a pair is
/// skipped when its composite is known to exceed the level bound.
pub fn validate_functor(f: &Fibration, depth: usize) -> ValidationReport {
    let e = f.domain();
    let b = f.codomain();
    let d = reported_depth(e, depth);
    let ms = e.morphisms(level_bound(e, depth));
    let mut report = ValidationReport::default();

    let bad_object = e.objects().into_iter().find(|x| {
        !f.apply_object(x)
            .map(|fx| b.has_object(&fx))
            .unwrap_or(false)
    });
    report.push(
        "object_map",
        bad_object.is_none(),
        None,
        bad_object.map(|x| json!({"object": x.to_string()})),
    );

    let bad_ends = ms.iter().find(|m| {
        (|| -> Result<bool> {
            let fm = f.apply(m)?;
            Ok(b.contains(&fm)
                && b.source(&fm)? == f.apply_object(&e.source(m)?)?
                && b.target(&fm)? == f.apply_object(&e.target(m)?)?)
        })()
        .map(|ok| !ok)
        .unwrap_or(true)
    });
    report.push(
        "source_target",
        bad_ends.is_none(),
        d,
        bad_ends.map(|m| json!({"morphism": m.to_string()})),
    );

    let bad_identity = e.objects().into_iter().find(|x| {
        (|| -> Result<bool> { Ok(f.apply(&e.identity(x)?)? == b.identity(&f.apply_object(x)?)?) })()
            .map(|ok| !ok)
            .unwrap_or(true)
    });
    report.push(
        "identities",
        bad_identity.is_none(),
        None,
        bad_identity.map(|x| json!({"object": x.to_string()})),
    );

    let mut bad_pair = None;
    'pairs: for u in &ms {
        for v in &ms {
            if e.source(u).ok() != e.target(v).ok() || beyond(e, depth, u, v) {
                continue;
            }
            let ok = (|| -> Result<bool> {
                let uv = e.compose(u, v)?;
                Ok(f.apply(&uv)? == b.compose(&f.apply(u)?, &f.apply(v)?)?)
            })()
            .unwrap_or(false);
            if !ok {
                bad_pair = Some(json!({"pair": [u.to_string(), v.to_string()]}));
                break 'pairs;
            }
        }
    }
    report.push("composition", bad_pair.is_none(), d, bad_pair);
    report
}

/// A morphism `phi` and a factorization `F(phi) = lambda rho` with a number
/// of lifts other than one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DcfCounterexample {
    pub phi: String,
    pub lambda: String,
    pub rho: String,
    pub lifts: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DcfOutcome {
    pub passed: bool,
    pub depth: Option<usize>,
    pub morphisms_checked: usize,
    pub factorizations_checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<DcfCounterexample>,
}

/// Counts, for every `phi` of level at most `depth` and every factorization
/// of `F(phi)`, the factorizations of `phi` lying over it. Passes when every
/// count is one; otherwise returns the first failure in morphism order.
pub fn check_dcf(f: &Fibration, depth: usize) -> DcfOutcome {
    let e = f.domain();
    let b = f.codomain();
    let ms = e.morphisms(level_bound(e, depth));
    let images: HashMap<&MorphismId, MorphismId> = ms
        .iter()
        .filter_map(|m| f.apply(m).ok().map(|fm| (m, fm)))
        .collect();
    let mut by_target: HashMap<_, Vec<&MorphismId>> = HashMap::new();
    for m in &ms {
        if let Ok(t) = e.target(m) {
            by_target.entry(t).or_default().push(m);
        }
    }
    let mut counts: HashMap<(MorphismId, MorphismId, MorphismId), usize> = HashMap::new();
    for u in &ms {
        let (Ok(su), Some(fu)) = (e.source(u), images.get(u)) else {
            continue;
        };
        for v in by_target.get(&su).into_iter().flatten() {
            if beyond(e, depth, u, v) {
                continue;
            }
            let (Ok(uv), Some(fv)) = (e.compose(u, v), images.get(*v)) else {
                continue;
            };
            *counts.entry((uv, fu.clone(), fv.clone())).or_default() += 1;
        }
    }
    let mut factorizations_checked = 0;
    for phi in &ms {
        let Some(fphi) = images.get(phi) else {
            continue;
        };
        let Ok(facts) = b.factorizations(fphi) else {
            continue;
        };
        for (lambda, rho) in facts {
            factorizations_checked += 1;
            let n = counts
                .get(&(phi.clone(), lambda.clone(), rho.clone()))
                .copied()
                .unwrap_or(0);
            if n != 1 {
                return DcfOutcome {
                    passed: false,
                    depth: reported_depth(e, depth),
                    morphisms_checked: ms.len(),
                    factorizations_checked,
                    counterexample: Some(DcfCounterexample {
                        phi: phi.to_string(),
                        lambda: lambda.to_string(),
                        rho: rho.to_string(),
                        lifts: n,
                    }),
                };
            }
        }
    }
    DcfOutcome {
        passed: true,
        depth: reported_depth(e, depth),
        morphisms_checked: ms.len(),
        factorizations_checked,
        counterexample: None,
    }
}

/// Every fiber over a base morphism of level at most `depth` into every
/// object of the domain is finite within the enumeration budget.
pub fn check_row_finite(f: &Fibration, depth: usize) -> CheckResult {
    let b = f.codomain();
    let mut failure = None;
    'outer: for x in f.domain().objects() {
        let Ok(fx) = f.apply_object(&x) else { continue };
        for beta in b.morphisms_into(&fx, level_bound(b, depth)) {
            if let Err(e) = f.enumerate_fiber(&x, &beta) {
                failure = Some(json!({
                    "object": x.to_string(),
                    "base": beta.to_string(),
                    "error": e.to_string(),
                }));
                break 'outer;
            }
        }
    }
    CheckResult {
        name: "row_finite".into(),
        passed: failure.is_none(),
        depth: reported_depth(b, depth),
        detail: failure,
    }
}

/// Surjectivity on objects, and a nonempty fiber over every base morphism of
/// level at most `depth` into every `F(X)`.
pub fn check_strong_surjectivity(f: &Fibration, depth: usize) -> CheckResult {
    let b = f.codomain();
    let e = f.domain();
    let images: Vec<_> = e
        .objects()
        .iter()
        .filter_map(|x| f.apply_object(x).ok())
        .collect();
    let mut failure = b
        .objects()
        .into_iter()
        .find(|y| !images.contains(y))
        .map(|y| json!({"object_not_hit": y.to_string()}));
    if failure.is_none() {
        'outer: for x in e.objects() {
            let Ok(fx) = f.apply_object(&x) else { continue };
            for beta in b.morphisms_into(&fx, level_bound(b, depth)) {
                let empty = f
                    .enumerate_fiber(&x, &beta)
                    .map(|v| v.is_empty())
                    .unwrap_or(true);
                if empty {
                    failure = Some(json!({"object": x.to_string(), "base": beta.to_string()}));
                    break 'outer;
                }
            }
        }
    }
    CheckResult {
        name: "strongly_surjective".into(),
        passed: failure.is_none(),
        depth: reported_depth(b, depth),
        detail: failure,
    }
}

pub(crate) fn compute_flags(f: &Fibration, depth: usize) -> FibrationFlags {
    let functor_valid = validate_functor(f, depth).passed();
    let dcf = functor_valid && check_dcf(f, depth).passed;
    let ore_report = ore::check_ore(f.codomain(), depth);
    let row_finite = check_row_finite(f, depth).passed;
    let locally_split = dcf
        && row_finite
        && f.domain()
            .objects()
            .iter()
            .all(|x| crate::paths::canonical_splitting(f, x, depth).is_ok());
    FibrationFlags {
        depth,
        functor_valid,
        dcf,
        row_finite,
        strongly_surjective: check_strong_surjectivity(f, depth).passed,
        right_ore: ore_report.right_ore,
        strongly_right_ore: ore_report.strongly_right_ore,
        left_cancellative: ore_report.left_cancellative,
        right_cancellative: ore_report.right_cancellative,
        locally_split,
    }
}

/// Replaces the codomain by the image subcategory: base morphisms into some
/// `F(X)` with a nonempty fiber over them.
///
/// Requires validation flags showing that `F` is a discrete Conduché
/// fibration.
pub fn restrict_to_image(f: &Fibration) -> Result<Fibration> {
    let flags =
        f.0.flags
            .lock()
            .expect("flag cache poisoned")
            .values()
            .last()
            .cloned()
            .ok_or_else(|| Error::FlagsMissing(f.name().to_string()))?;
    if !flags.dcf {
        return Err(Error::FlagsMissing(format!(
            "{} is not certified as a discrete Conduché fibration",
            f.name()
        )));
    }
    let objects: Vec<_> = f
        .domain()
        .objects()
        .iter()
        .filter_map(|x| f.apply_object(x).ok())
        .collect();
    let probe = f.clone();
    let member = Arc::new(move |b: &MorphismId| {
        let Ok(r) = probe.codomain().target(b) else {
            return false;
        };
        probe.domain().objects().iter().any(|x| {
            probe.apply_object(x).ok().as_ref() == Some(&r)
                && probe
                    .enumerate_fiber(x, b)
                    .map(|v| !v.is_empty())
                    .unwrap_or(false)
        })
    });
    let image = Category::new(SubCategory::new(f.codomain().clone(), objects, member));
    Ok(Fibration::assemble(
        &format!("{}-image", f.name()),
        f.domain().clone(),
        image,
        f.map().clone(),
        f.splitting(),
        None,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::fibration::{builders, FunctorMap};
    use crate::fincat::{KGraphSpec, NkMonoid};
    use std::collections::BTreeMap;

    #[test]
    fn identity_passes_everything() {
        let f = catalog::by_name("s3").unwrap();
        assert!(validate_functor(&f, 2).passed());
        assert!(check_dcf(&f, 2).passed);
        assert!(check_strong_surjectivity(&f, 2).passed);
    }

    #[test]
    fn single_arrow_over_two_has_no_lift() {
        // E: one non-identity arrow e : x -> y; B = N; F(e) = 2.
        let x = crate::ids::ObjectId::named("x");
        let y = crate::ids::ObjectId::named("y");
        let (ix, iy, e) = (
            MorphismId::named("1x"),
            MorphismId::named("1y"),
            MorphismId::named("e"),
        );
        let cat = crate::fincat::ExplicitCategory::new(
            vec![x.clone(), y.clone()],
            vec![
                (ix.clone(), x.clone(), x.clone()),
                (iy.clone(), y.clone(), y.clone()),
                (e.clone(), x.clone(), y.clone()),
            ],
            vec![],
            BTreeMap::from([(x.clone(), ix.clone()), (y.clone(), iy.clone())]),
        )
        .unwrap();
        let star = crate::ids::ObjectId::Star;
        let f = Fibration::new(
            "arrow",
            Category::new(cat),
            Category::new(NkMonoid::new(1)),
            FunctorMap::Table {
                objects: BTreeMap::from([(x, star.clone()), (y, star)]),
                morphisms: BTreeMap::from([
                    (ix, MorphismId::degree(&[0])),
                    (iy, MorphismId::degree(&[0])),
                    (e, MorphismId::degree(&[2])),
                ]),
            },
        );
        assert!(validate_functor(&f, 2).passed());
        let out = check_dcf(&f, 2);
        assert!(!out.passed);
        let cx = out.counterexample.unwrap();
        assert_eq!(cx.phi, "e");
        assert_eq!(cx.lifts, 0);
    }

    #[test]
    fn wrong_composite_image_fails_functor_check() {
        let f = catalog::by_name("z2").unwrap();
        let mut morphisms = BTreeMap::new();
        morphisms.insert(MorphismId::named("0"), MorphismId::named("0"));
        morphisms.insert(MorphismId::named("1"), MorphismId::named("0"));
        let bad = Fibration::new(
            "bad",
            f.domain().clone(),
            f.domain().clone(),
            FunctorMap::Table {
                objects: BTreeMap::from([(crate::ids::ObjectId::Star, crate::ids::ObjectId::Star)]),
                morphisms,
            },
        );
        assert!(validate_functor(&bad, 1).passed());
        let mut morphisms = BTreeMap::new();
        morphisms.insert(MorphismId::named("0"), MorphismId::named("0"));
        morphisms.insert(MorphismId::named("1"), MorphismId::named("1"));
        let g = catalog::by_name("z3").unwrap();
        let broken = Fibration::new(
            "broken",
            f.domain().clone(),
            g.domain().clone(),
            FunctorMap::Table {
                objects: BTreeMap::from([(crate::ids::ObjectId::Star, crate::ids::ObjectId::Star)]),
                morphisms,
            },
        );
        let r = validate_functor(&broken, 1);
        assert!(!r.get("composition").unwrap().passed);
    }

    #[test]
    fn source_vertex_breaks_strong_surjectivity() {
        let spec: KGraphSpec = serde_json::from_value(serde_json::json!({
            "k": 1,
            "vertices": ["u", "v"],
            "edges": [{"id": "e", "src": "u", "tgt": "v", "color": 0}],
        }))
        .unwrap();
        let f = builders::build_kgraph(spec).unwrap();
        assert!(check_row_finite(&f, 3).passed);
        assert!(!check_strong_surjectivity(&f, 3).passed);
    }

    #[test]
    fn image_of_a_one_graph_in_n2() {
        let f = catalog::o_n(2).unwrap();
        let embedded = Fibration::new(
            "o2-in-n2",
            f.domain().clone(),
            Category::new(NkMonoid::new(2)),
            FunctorMap::Degree {
                coordinates: vec![0],
                rank: 2,
            },
        );
        assert!(matches!(
            restrict_to_image(&embedded),
            Err(Error::FlagsMissing(_))
        ));
        let flags = embedded.flags(2);
        assert!(flags.dcf && !flags.strongly_surjective);
        let image = restrict_to_image(&embedded).unwrap();
        let star = crate::ids::ObjectId::Star;
        for level in 0..=3 {
            let got = image.codomain().morphisms_into(&star, level);
            let want: Vec<_> = (0..=level as u32)
                .map(|n| MorphismId::degree(&[n, 0]))
                .collect();
            assert_eq!(got, want);
        }
        assert!(check_strong_surjectivity(&image, 3).passed);
    }
}
