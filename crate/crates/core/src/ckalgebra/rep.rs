//! Concrete matrix assignments and the check of the six Cuntz-Krieger
//! relations against them.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::fibration::{Fibration, FunctorMap};
use crate::ids::{MorphismId, ObjectId};
use crate::matrix::Matrix;
use crate::paths::{self, path_equal, PathOracle};

/// Matrices `P_X` for objects and `S_alpha` for morphisms on a common
/// finite-dimensional space.
#[derive(Debug, Clone)]
pub struct RepAssignment {
    pub dimension: usize,
    pub projections: BTreeMap<ObjectId, Matrix>,
    pub isometries: BTreeMap<MorphismId, Matrix>,
    /// Zero selects exact comparison.
    pub tolerance: f64,
    /// Set for truncations, where only relations 1 and 3 are asserted.
    pub approximate: bool,
    /// Labels of the basis vectors, when known.
    pub basis: Vec<String>,
}

impl RepAssignment {
    pub fn new(dimension: usize) -> Self {
        RepAssignment {
            dimension,
            projections: BTreeMap::new(),
            isometries: BTreeMap::new(),
            tolerance: 0.0,
            approximate: false,
            basis: Vec::new(),
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    fn check_shape(&self, what: &str, m: &Matrix) -> Result<()> {
        if m.rows() != self.dimension || m.cols() != self.dimension {
            return Err(Error::DimensionMismatch(format!(
                "{what} is {}x{}, expected {}x{}",
                m.rows(),
                m.cols(),
                self.dimension,
                self.dimension
            )));
        }
        Ok(())
    }

    pub fn set_projection(&mut self, x: ObjectId, m: Matrix) -> Result<()> {
        self.check_shape(&format!("P_{x}"), &m)?;
        self.projections.insert(x, m);
        Ok(())
    }

    pub fn set_isometry(&mut self, alpha: MorphismId, m: Matrix) -> Result<()> {
        self.check_shape(&format!("S_{alpha}"), &m)?;
        self.isometries.insert(alpha, m);
        Ok(())
    }

    /// Reads `{"projections": {X: matrix}, "isometries": {alpha: matrix},
    /// "tolerance": eps}`; the dimension is taken from the first matrix.
    pub fn from_json(f: &Fibration, doc: &Value) -> Result<Self> {
        let e = f.domain();
        let section = |key: &str| -> Result<Map<String, Value>> {
            match doc.get(key) {
                None => Ok(Map::new()),
                Some(Value::Object(m)) => Ok(m.clone()),
                Some(_) => Err(Error::schema(key, "expected an object of matrices")),
            }
        };
        let projections = section("projections")?;
        let isometries = section("isometries")?;
        let mut parsed_p = Vec::new();
        for (k, v) in &projections {
            parsed_p.push((
                e.parse_object(k)?,
                Matrix::from_json(v, &format!("projections.{k}"))?,
            ));
        }
        let mut parsed_s = Vec::new();
        for (k, v) in &isometries {
            parsed_s.push((
                e.parse_morphism(k)?,
                Matrix::from_json(v, &format!("isometries.{k}"))?,
            ));
        }
        let dimension = parsed_p
            .first()
            .map(|(_, m)| m.rows())
            .or_else(|| parsed_s.first().map(|(_, m)| m.rows()))
            .ok_or_else(|| Error::schema("projections", "no matrices given"))?;
        let mut rep = RepAssignment::new(dimension);
        if let Some(t) = doc.get("tolerance") {
            rep.tolerance = t
                .as_f64()
                .filter(|t| *t >= 0.0)
                .ok_or_else(|| Error::schema("tolerance", "expected a non-negative number"))?;
        }
        for (x, m) in parsed_p {
            rep.set_projection(x, m)?;
        }
        for (a, m) in parsed_s {
            rep.set_isometry(a, m)?;
        }
        Ok(rep)
    }

    pub fn to_json(&self) -> Value {
        let p: Map<String, Value> = self
            .projections
            .iter()
            .map(|(x, m)| (x.to_string(), m.to_json()))
            .collect();
        let s: Map<String, Value> = self
            .isometries
            .iter()
            .map(|(a, m)| (a.to_string(), m.to_json()))
            .collect();
        json!({
            "dimension": self.dimension,
            "basis": self.basis,
            "approximate": self.approximate,
            "tolerance": self.tolerance,
            "projections": p,
            "isometries": s,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationResult {
    pub relation: u8,
    pub name: &'static str,
    pub passed: bool,
    pub max_deviation: f64,
    pub checked: usize,
    /// False for relations a truncated representation cannot satisfy.
    pub asserted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CkReport {
    pub dimension: usize,
    pub mode: &'static str,
    pub tolerance: f64,
    pub approximate: bool,
    pub degrees: Vec<String>,
    pub relations: Vec<RelationResult>,
    pub passed: bool,
}

impl CkReport {
    pub fn relation(&self, n: u8) -> &RelationResult {
        &self.relations[usize::from(n) - 1]
    }
}

struct Tally {
    exact: bool,
    tolerance: f64,
    result: RelationResult,
}

impl Tally {
    fn new(rep: &RepAssignment, relation: u8, name: &'static str) -> Self {
        Tally {
            exact: rep.tolerance == 0.0,
            tolerance: rep.tolerance,
            result: RelationResult {
                relation,
                name,
                passed: true,
                max_deviation: 0.0,
                checked: 0,
                asserted: !rep.approximate || relation == 1 || relation == 3,
                first_failure: None,
            },
        }
    }

    fn record(&mut self, label: impl FnOnce() -> String, diff: &Matrix) {
        let r = &mut self.result;
        r.checked += 1;
        let dev = diff.max_abs();
        r.max_deviation = r.max_deviation.max(dev);
        let bad = if self.exact {
            !diff.is_zero()
        } else {
            dev > self.tolerance
        };
        if bad {
            r.passed = false;
            if r.first_failure.is_none() {
                r.first_failure = Some(label());
            }
        }
    }
}

/// Base morphisms used for relation 6 when none are listed: every morphism
/// of a finite base, and those of level at most 2 otherwise.
pub fn default_degrees(f: &Fibration) -> Vec<MorphismId> {
    let base = f.codomain();
    base.morphisms(if base.is_finite() { usize::MAX } else { 2 })
}

/// Checks the six relations: projections (1), multiplicativity on assigned
/// composable pairs (2), `S_{Id_X} = P_X` (3), `S_a^* S_a = P_{s(a)}` (4),
/// `S_b^* S_a = 0` for distinct `a, b` in one fiber (5), and
/// `sum S_a S_a^* = P_X` over the lifts of each listed `b` (6).
pub fn check_ck_relations(
    f: &Fibration,
    rep: &RepAssignment,
    degrees: &[MorphismId],
) -> Result<CkReport> {
    let e = f.domain();
    let missing_p = |x: &ObjectId| Error::MissingMatrix(format!("P_{x}"));
    for m in rep.projections.values().chain(rep.isometries.values()) {
        rep.check_shape("assigned matrix", m)?;
    }
    let objects = e.objects();
    for x in &objects {
        if !rep.projections.contains_key(x) {
            return Err(missing_p(x));
        }
    }

    let mut r1 = Tally::new(rep, 1, "projections");
    for (x, p) in &rep.projections {
        r1.record(
            || format!("P_{x} is not self-adjoint"),
            &p.sub(&p.adjoint())?,
        );
        r1.record(|| format!("P_{x} is not idempotent"), &p.mul(p)?.sub(p)?);
        for (y, q) in &rep.projections {
            if x < y {
                r1.record(|| format!("P_{x} P_{y} != 0"), &p.mul(q)?);
            }
        }
    }

    let mut r2 = Tally::new(rep, 2, "multiplicativity");
    for (a, sa) in &rep.isometries {
        let src = e.source(a)?;
        for (b, sb) in &rep.isometries {
            if e.target(b)? != src {
                continue;
            }
            let ab = e.compose(a, b)?;
            if let Some(sab) = rep.isometries.get(&ab) {
                r2.record(|| format!("S_{ab} != S_{a} S_{b}"), &sa.mul(sb)?.sub(sab)?);
            }
        }
    }

    let mut r3 = Tally::new(rep, 3, "identities");
    for x in &objects {
        let id = e.identity(x)?;
        if let Some(s) = rep.isometries.get(&id) {
            r3.record(|| format!("S_{id} != P_{x}"), &s.sub(&rep.projections[x])?);
        }
    }

    let mut r4 = Tally::new(rep, 4, "partial_isometries");
    for (a, s) in &rep.isometries {
        let src = e.source(a)?;
        let p = rep.projections.get(&src).ok_or_else(|| missing_p(&src))?;
        r4.record(
            || format!("S_{a}^* S_{a} != P_{src}"),
            &s.adjoint().mul(s)?.sub(p)?,
        );
    }

    let mut r5 = Tally::new(rep, 5, "orthogonal_ranges");
    for (a, sa) in &rep.isometries {
        let fa = f.apply(a)?;
        for (b, sb) in &rep.isometries {
            if a != b && f.apply(b)? == fa {
                r5.record(|| format!("S_{b}^* S_{a} != 0"), &sb.adjoint().mul(sa)?);
            }
        }
    }

    let mut r6 = Tally::new(rep, 6, "fiber_sums");
    let base = f.codomain();
    for b in degrees {
        let rb = base.target(b)?;
        for x in &objects {
            if f.apply_object(x)? != rb {
                continue;
            }
            let mut sum = Matrix::zeros(rep.dimension, rep.dimension);
            for a in f.enumerate_fiber(x, b)? {
                let s = rep
                    .isometries
                    .get(&a)
                    .ok_or_else(|| Error::MissingMatrix(format!("S_{a}")))?;
                sum = sum.add(&s.mul(&s.adjoint())?)?;
            }
            r6.record(
                || format!("sum of S S^* over the lifts of {b} into {x} != P_{x}"),
                &sum.sub(&rep.projections[x])?,
            );
        }
    }

    let relations: Vec<RelationResult> = [r1, r2, r3, r4, r5, r6]
        .into_iter()
        .map(|t| t.result)
        .collect();
    let passed = relations.iter().all(|r| r.passed || !r.asserted);
    Ok(CkReport {
        dimension: rep.dimension,
        mode: if rep.tolerance == 0.0 {
            "exact"
        } else {
            "tolerance"
        },
        tolerance: rep.tolerance,
        approximate: rep.approximate,
        degrees: degrees.iter().map(|d| d.to_string()).collect(),
        relations,
        passed,
    })
}

/// The left regular representation of a finite group on itself:
/// `S_g e_h = e_{gh}` and `P = I`.
pub fn group_regular_representation(f: &Fibration) -> Result<RepAssignment> {
    let e = f.domain();
    let objects = e.objects();
    if objects.len() != 1 || !e.is_finite() {
        return Err(Error::NotAGroup(format!(
            "{} has {} objects",
            f.name(),
            objects.len()
        )));
    }
    let elements = e.morphisms(usize::MAX);
    let n = elements.len();
    let index: BTreeMap<&MorphismId, usize> =
        elements.iter().enumerate().map(|(i, g)| (g, i)).collect();
    let mut rep = RepAssignment::new(n);
    rep.basis = elements.iter().map(|g| format!("e_{g}")).collect();
    rep.set_projection(objects[0].clone(), Matrix::identity(n))?;
    let unit = e.identity(&objects[0])?;
    for g in &elements {
        let mut m = Matrix::zeros(n, n);
        let mut invertible = false;
        for h in &elements {
            let gh = e.compose(g, h)?;
            invertible |= gh == unit;
            m.set(index[&gh], index[h], crate::scalar::one());
        }
        if !invertible {
            return Err(Error::NotAGroup(format!("{g} has no inverse")));
        }
        rep.set_isometry(g.clone(), m)?;
    }
    Ok(rep)
}

fn path_index(paths: &[PathOracle], x: &PathOracle) -> Result<usize> {
    for (i, p) in paths.iter().enumerate() {
        if path_equal(p, x, 1)?.is_equal() {
            return Ok(i);
        }
    }
    Err(Error::Precondition(format!(
        "path {} is not enumerated",
        x.label()
    )))
}

/// The representation on the finitely many paths: `T_mu e_x = e_{ind_mu x}`
/// for `x` into `s(mu)`, and `Q_X` the projection onto paths into `X`.
pub fn path_representation(f: &Fibration) -> Result<RepAssignment> {
    let e = f.domain();
    if !e.is_finite() {
        return Err(Error::PathSpaceNotFinite(format!(
            "{} has infinitely many morphisms; request a truncation",
            f.name()
        )));
    }
    let all = paths::enumerate_all_paths(f)?;
    let n = all.len();
    let mut rep = RepAssignment::new(n);
    rep.basis = all
        .iter()
        .map(|p| format!("{} to {}", p.label(), p.target()))
        .collect();
    for x in e.objects() {
        let mut q = Matrix::zeros(n, n);
        for (i, p) in all.iter().enumerate() {
            if p.target() == &x {
                q.set(i, i, crate::scalar::one());
            }
        }
        rep.set_projection(x, q)?;
    }
    for mu in e.morphisms(usize::MAX) {
        let src = e.source(&mu)?;
        let mut t = Matrix::zeros(n, n);
        for (i, p) in all.iter().enumerate() {
            if p.target() == &src {
                let j = path_index(&all, &paths::ind(&mu, p)?)?;
                t.set(j, i, crate::scalar::one());
            }
        }
        rep.set_isometry(mu, t)?;
    }
    Ok(rep)
}

/// A finite truncation for k-graphs: the basis is the paths of degree
/// `(n, ..., n)`, and `T_mu lambda` is the degree `(n, ..., n)` prefix of
/// `mu lambda`, for `mu` of level at most `n`. Only relations 1 and 3 hold
/// exactly, and the result is marked approximate.
pub fn truncated_path_representation(f: &Fibration, n: u32) -> Result<RepAssignment> {
    let FunctorMap::Degree { rank, .. } = f.map() else {
        return Err(Error::Precondition(format!(
            "{} is not a k-graph with its degree functor",
            f.name()
        )));
    };
    let e = f.domain();
    let degree = MorphismId::degree(&vec![n; *rank]);
    let mut basis = Vec::new();
    for x in e.objects() {
        basis.extend(f.enumerate_fiber(&x, &degree)?);
    }
    let dim = basis.len();
    let index: BTreeMap<&MorphismId, usize> =
        basis.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut rep = RepAssignment::new(dim);
    rep.approximate = true;
    rep.basis = basis.iter().map(|m| m.to_string()).collect();
    for x in e.objects() {
        let mut q = Matrix::zeros(dim, dim);
        for (i, lam) in basis.iter().enumerate() {
            if e.target(lam)? == x {
                q.set(i, i, crate::scalar::one());
            }
        }
        rep.set_projection(x, q)?;
    }
    for mu in e.morphisms(n as usize) {
        let src = e.source(&mu)?;
        let fmu = f.apply(&mu)?;
        let mut t = Matrix::zeros(dim, dim);
        for (i, lam) in basis.iter().enumerate() {
            if e.target(lam)? != src {
                continue;
            }
            let whole = e.compose(&mu, lam)?;
            let (prefix, _) = f.lift_pair(&whole, &degree, &fmu)?;
            t.set(index[&prefix], i, crate::scalar::one());
        }
        rep.set_isometry(mu, t)?;
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn group_regular_representation_passes_exactly() {
        for name in ["z2", "z3", "s3"] {
            let f = catalog::by_name(name).unwrap();
            let rep = group_regular_representation(&f).unwrap();
            let report = check_ck_relations(&f, &rep, &default_degrees(&f)).unwrap();
            assert!(report.passed, "{name}: {report:?}");
            assert_eq!(report.mode, "exact");
        }
    }

    #[test]
    fn non_unitary_assignment_fails_relation_six() {
        let f = catalog::by_name("z2").unwrap();
        let e = f.domain();
        let mut rep = RepAssignment::new(2);
        rep.set_projection(e.objects()[0].clone(), Matrix::identity(2))
            .unwrap();
        rep.set_isometry(e.parse_morphism("0").unwrap(), Matrix::identity(2))
            .unwrap();
        rep.set_isometry(
            e.parse_morphism("1").unwrap(),
            Matrix::from_ints(&[&[0, 1], &[0, 0]]).unwrap(),
        )
        .unwrap();
        let report = check_ck_relations(&f, &rep, &default_degrees(&f)).unwrap();
        assert!(!report.passed);
        assert!(!report.relation(6).passed);
        assert!(report.relation(1).passed && report.relation(3).passed);
    }

    #[test]
    fn trivial_and_path_representations() {
        let f = catalog::by_name("z2").unwrap();
        let rep = path_representation(&f).unwrap();
        assert_eq!(rep.dimension, 1);
        assert!(
            check_ck_relations(&f, &rep, &default_degrees(&f))
                .unwrap()
                .passed
        );
        let f = catalog::by_name("pair-groupoid-3").unwrap();
        let rep = path_representation(&f).unwrap();
        assert_eq!(rep.dimension, 3);
        assert!(
            check_ck_relations(&f, &rep, &default_degrees(&f))
                .unwrap()
                .passed
        );
        let f = catalog::by_name("chain-sections").unwrap();
        let rep = path_representation(&f).unwrap();
        assert!(
            check_ck_relations(&f, &rep, &default_degrees(&f))
                .unwrap()
                .passed
        );
        assert!(matches!(
            path_representation(&catalog::o_n(2).unwrap()),
            Err(Error::PathSpaceNotFinite(_))
        ));
    }

    #[test]
    fn truncation_is_labelled_approximate() {
        let f = catalog::by_name("2-graph").unwrap();
        let rep = truncated_path_representation(&f, 1).unwrap();
        assert!(rep.approximate);
        assert_eq!(rep.dimension, 4);
        let report = check_ck_relations(&f, &rep, &f.codomain().morphisms(1)).unwrap();
        assert!(report.relation(1).passed && report.relation(3).passed);
        assert!(report.passed);
    }

    #[test]
    fn shapes_are_checked() {
        let f = catalog::by_name("z2").unwrap();
        let mut rep = RepAssignment::new(2);
        assert!(matches!(
            rep.set_projection(ObjectId::Star, Matrix::identity(3)),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            check_ck_relations(&f, &rep, &[]),
            Err(Error::MissingMatrix(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let f = catalog::by_name("z3").unwrap();
        let rep = group_regular_representation(&f).unwrap();
        let back = RepAssignment::from_json(&f, &rep.to_json()).unwrap();
        assert_eq!(back.isometries, rep.isometries);
        assert_eq!(back.projections, rep.projections);
    }
}
