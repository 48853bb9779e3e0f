//! Infinite paths, the restriction and induction maps between cylinders,
//! cylinder intersections and the aperiodicity scan.

mod oracle;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fibration::{ore_match, Fibration, FunctorMap, SplittingWitness};
use crate::fincat::{Category, SliceCategory};
use crate::ids::{MorphismId, ObjectId};

use oracle::Source;
pub use oracle::{Callback, Chooser, PathOracle, WordFn};

/// Base objects of `B / F(x)` of level at most `depth`, sorted by level then
/// identifier; every object when the base is finite.
pub fn slice_objects(f: &Fibration, x: &ObjectId, depth: usize) -> Result<Vec<MorphismId>> {
    let base = f.codomain();
    let fx = f.apply_object(x)?;
    let level = if base.is_finite() { 1 } else { depth };
    Ok(SliceCategory::new(base, &fx)?.objects(level))
}

fn reported_depth(base: &Category, depth: usize) -> Option<usize> {
    (!base.is_finite()).then_some(depth)
}

/// `(x(a), x_2(a, b))`: the factorization of `x(ab)` over `(a, b)`.
pub fn eval_path_morphism(
    x: &PathOracle,
    a: &MorphismId,
    b: &MorphismId,
) -> Result<(MorphismId, MorphismId)> {
    let f = x.fibration();
    let ab = f.codomain().compose(a, b)?;
    let whole = x.eval(&ab)?;
    f.lift_pair(&whole, a, b)
}

/// Whether `alpha b = beta` already determines `x(beta)` from `x(alpha)`:
/// checks consistency of a candidate value against the assigned points.
fn consistent(
    f: &Fibration,
    assigned: &BTreeMap<MorphismId, MorphismId>,
    b: &MorphismId,
    value: &MorphismId,
) -> Result<bool> {
    let base = f.codomain();
    for (b2, v2) in assigned {
        for c in base.divide_left(b2, b)? {
            match f.lift_pair(value, b2, &c) {
                Ok((p, _)) if &p == v2 => {}
                _ => return Ok(false),
            }
        }
        for d in base.divide_left(b, b2)? {
            match f.lift_pair(v2, b, &d) {
                Ok((p, _)) if &p == value => {}
                _ => return Ok(false),
            }
        }
    }
    Ok(true)
}

/// Coherent sections over the finitely many base objects into `F(x)`, found
/// by backtracking in the chooser's preference order. At most `limit` are
/// returned.
pub(crate) fn sections(
    f: &Fibration,
    x: &ObjectId,
    chooser: &Chooser,
    limit: usize,
) -> Result<Vec<BTreeMap<MorphismId, MorphismId>>> {
    if !f.codomain().is_finite() {
        return Err(Error::PathSpaceNotFinite(f.name().to_string()));
    }
    let objects = slice_objects(f, x, 1)?;
    let mut fibers = Vec::with_capacity(objects.len());
    for (i, b) in objects.iter().enumerate() {
        fibers.push(chooser.order(i, f.enumerate_fiber(x, b)?));
    }
    let mut out = Vec::new();
    let mut assigned = BTreeMap::new();
    search(f, &objects, &fibers, 0, &mut assigned, &mut out, limit)?;
    Ok(out)
}

fn search(
    f: &Fibration,
    objects: &[MorphismId],
    fibers: &[Vec<MorphismId>],
    i: usize,
    assigned: &mut BTreeMap<MorphismId, MorphismId>,
    out: &mut Vec<BTreeMap<MorphismId, MorphismId>>,
    limit: usize,
) -> Result<()> {
    if out.len() >= limit {
        return Ok(());
    }
    if i == objects.len() {
        out.push(assigned.clone());
        return Ok(());
    }
    for value in &fibers[i] {
        if consistent(f, assigned, &objects[i], value)? {
            assigned.insert(objects[i].clone(), value.clone());
            search(f, objects, fibers, i + 1, assigned, out, limit)?;
            assigned.remove(&objects[i]);
            if out.len() >= limit {
                break;
            }
        }
    }
    Ok(())
}

/// Every infinite path into `x`, for fibrations over a finite base.
pub fn enumerate_paths(f: &Fibration, x: &ObjectId) -> Result<Vec<PathOracle>> {
    let tables = sections(f, x, &Chooser::MinLex, f.budget())?;
    if tables.len() >= f.budget() {
        return Err(Error::PathSpaceNotFinite(format!(
            "{} has at least {} paths into {x}",
            f.name(),
            f.budget()
        )));
    }
    tables
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            let p = PathOracle::from_table(f, x, &format!("path{i}@{x}"), t)?;
            p.set_certified(None);
            Ok(p)
        })
        .collect()
}

/// Every infinite path of the fibration, grouped by range in object order.
pub fn enumerate_all_paths(f: &Fibration) -> Result<Vec<PathOracle>> {
    let mut out = Vec::new();
    for x in f.domain().objects() {
        out.extend(enumerate_paths(f, &x)?);
    }
    Ok(out)
}

/// A splitting into `x`, verified coherent on base objects of level at most
/// `depth`.
///
/// Fibrations with singleton fibers use the forced section; k-graphs grow
/// the least path along the diagonal; other finite bases use backtracking.
pub fn canonical_splitting(f: &Fibration, x: &ObjectId, depth: usize) -> Result<PathOracle> {
    let unique = matches!(f.map(), FunctorMap::Identity)
        || matches!(
            f.splitting(),
            SplittingWitness::Unique | SplittingWitness::Restriction
        );
    let oracle = if unique {
        let label = match f.splitting() {
            SplittingWitness::Restriction => "restriction",
            _ => "unique",
        };
        PathOracle::from_source(f, x, label.into(), Source::Unique)?
    } else {
        PathOracle::grown(f, x, Chooser::MinLex)?
    };
    for b in slice_objects(f, x, depth)? {
        if let Err(e) = oracle.eval(&b) {
            return Err(Error::NoSplittingFound {
                object: x.to_string(),
                depth,
                reason: e.to_string(),
            });
        }
    }
    oracle.set_certified(reported_depth(f.codomain(), depth));
    Ok(oracle)
}

/// `res_mu(x)`, the path to `s(mu)` with `res_mu(x)(a) = x_2(F(mu), a)`.
pub fn res(mu: &MorphismId, x: &PathOracle) -> Result<PathOracle> {
    let f = x.fibration();
    let e = f.domain();
    if &e.target(mu)? != x.target() || x.eval(&f.apply(mu)?)? != *mu {
        return Err(Error::PathNotInCylinder(mu.to_string()));
    }
    PathOracle::from_source(
        f,
        &e.source(mu)?,
        format!("res[{mu}]({})", x.label()),
        Source::Res {
            mu: mu.clone(),
            inner: x.clone(),
        },
    )
}

/// `ind_mu(x)`, the path to `r(mu)` in `Z(mu)` with
/// `ind_mu(x)(F(mu) a) = mu x(a)`.
pub fn ind(mu: &MorphismId, x: &PathOracle) -> Result<PathOracle> {
    let f = x.fibration();
    let e = f.domain();
    if &e.source(mu)? != x.target() {
        return Err(Error::Precondition(format!(
            "ind of {} along {mu}: the path ends at {} but {mu} starts at {}",
            x.label(),
            x.target(),
            e.source(mu)?
        )));
    }
    PathOracle::from_source(
        f,
        &e.target(mu)?,
        format!("ind[{mu}]({})", x.label()),
        Source::Ind {
            mu: mu.clone(),
            inner: x.clone(),
        },
    )
}

/// `ind_mu(x)(d)` computed from a caller-supplied completion
/// `F(mu) c = d e` instead of the canonical one.
pub fn ind_at_with(
    mu: &MorphismId,
    x: &PathOracle,
    d: &MorphismId,
    completion: &(MorphismId, MorphismId),
) -> Result<MorphismId> {
    oracle::ind_value(mu, x, d, completion)
}

/// `Z(alpha)`, the paths whose value at `F(alpha)` is `alpha`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CylinderSet {
    pub alpha: MorphismId,
}

impl fmt::Display for CylinderSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z({})", self.alpha)
    }
}

impl CylinderSet {
    pub fn new(alpha: &MorphismId) -> Self {
        CylinderSet {
            alpha: alpha.clone(),
        }
    }

    /// `Z(X) = Z(Id_X)`.
    pub fn of_object(f: &Fibration, x: &ObjectId) -> Result<Self> {
        Ok(CylinderSet::new(&f.domain().identity(x)?))
    }

    pub fn contains(&self, x: &PathOracle) -> Result<bool> {
        let f = x.fibration();
        if &f.domain().target(&self.alpha)? != x.target() {
            return Ok(false);
        }
        Ok(x.eval(&f.apply(&self.alpha)?)? == self.alpha)
    }
}

/// The cylinders `Z(beta)` for `beta` in the fiber over `b` into `x`, which
/// partition `Z(x)`.
pub fn partition_by_lifts(f: &Fibration, x: &ObjectId, b: &MorphismId) -> Result<Vec<CylinderSet>> {
    Ok(f.enumerate_fiber(x, b)?
        .iter()
        .map(CylinderSet::new)
        .collect())
}

/// The morphisms `mu` with `Z(alpha) ∩ Z(beta)` the disjoint union of the
/// `Z(mu)`: common extensions `alpha gamma = beta delta` over the canonical
/// completion of `(F(alpha), F(beta))`.
pub fn cylinder_intersection(
    f: &Fibration,
    alpha: &MorphismId,
    beta: &MorphismId,
) -> Result<Vec<MorphismId>> {
    let e = f.domain();
    if e.target(alpha)? != e.target(beta)? {
        return Ok(Vec::new());
    }
    let mut cells: Vec<MorphismId> = ore_match(f, alpha, beta)?
        .into_iter()
        .map(|(g, _)| e.compose(alpha, &g))
        .collect::<Result<_>>()?;
    cells.sort();
    cells.dedup();
    Ok(cells)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum PathComparison {
    /// No disagreement on base objects of level at most `depth` (on every
    /// base object when `depth` is `None`).
    Equal {
        depth: Option<usize>,
    },
    Distinguished {
        at: String,
    },
    DifferentTargets,
}

impl PathComparison {
    pub fn is_equal(&self) -> bool {
        matches!(self, PathComparison::Equal { .. })
    }
}

pub fn path_equal(x: &PathOracle, y: &PathOracle, depth: usize) -> Result<PathComparison> {
    if x.target() != y.target() {
        return Ok(PathComparison::DifferentTargets);
    }
    let f = x.fibration();
    for b in slice_objects(f, x.target(), depth)? {
        if x.eval(&b)? != y.eval(&b)? {
            return Ok(PathComparison::Distinguished { at: b.to_string() });
        }
    }
    Ok(PathComparison::Equal {
        depth: reported_depth(f.codomain(), depth),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AperiodicityOutcome {
    pub depth: Option<usize>,
    pub candidates: usize,
    /// A pair `alpha != beta` with `res_alpha(x) = res_beta(x)` to depth.
    pub witness: Option<(String, String)>,
}

/// Searches pairs of distinct prefixes `alpha`, `beta` of `x` (the values
/// `x(b)` for `b` of level at most `depth`) whose restrictions agree on all
/// base objects of level at most `depth`.
pub fn aperiodicity_scan(x: &PathOracle, depth: usize) -> Result<AperiodicityOutcome> {
    let f = x.fibration();
    let e = f.domain();
    let mut prefixes = Vec::new();
    for b in slice_objects(f, x.target(), depth)? {
        let v = x.eval(&b)?;
        if !prefixes.contains(&v) {
            prefixes.push(v);
        }
    }
    let mut restricted = Vec::with_capacity(prefixes.len());
    for p in &prefixes {
        restricted.push(res(p, x)?);
    }
    for i in 0..prefixes.len() {
        for j in 0..i {
            if e.source(&prefixes[i])? != e.source(&prefixes[j])? {
                continue;
            }
            if path_equal(&restricted[i], &restricted[j], depth)?.is_equal() {
                return Ok(AperiodicityOutcome {
                    depth: reported_depth(f.codomain(), depth),
                    candidates: prefixes.len(),
                    witness: Some((prefixes[i].to_string(), prefixes[j].to_string())),
                });
            }
        }
    }
    Ok(AperiodicityOutcome {
        depth: reported_depth(f.codomain(), depth),
        candidates: prefixes.len(),
        witness: None,
    })
}
