//! Germs `[mu, nu, x]` of the groupoid, their products and inverses, the
//! germ equality test, and exact enumeration over finite categories.

use std::fmt;

use serde::Serialize;
use serde_json::{json, Value};

use super::{GermBasisSet, GroupoidFunction};
use crate::error::{Error, Result};
use crate::fibration::{ore_complete, Fibration};
use crate::ids::MorphismId;
use crate::matrix::Matrix;
use crate::paths::{self, eval_path_morphism, path_equal, CylinderSet, PathOracle};
use crate::scalar::{self, Scalar};
use crate::span_sum::Verdict;

/// The germ `[mu, nu, x]` with `x` in `Z(nu)`. Its source is `x` and its
/// range is `ind_mu(res_nu(x))`.
#[derive(Debug, Clone)]
pub struct GermElement {
    mu: MorphismId,
    nu: MorphismId,
    source: PathOracle,
    range: PathOracle,
}

impl fmt::Display for GermElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}]", self.mu, self.nu, self.source.label())
    }
}

impl GermElement {
    pub fn new(mu: &MorphismId, nu: &MorphismId, x: &PathOracle) -> Result<Self> {
        let e = x.fibration().domain();
        if e.source(mu)? != e.source(nu)? {
            return Err(Error::Precondition(format!(
                "({mu}, {nu}) is not a span: the sources differ"
            )));
        }
        if !CylinderSet::new(nu).contains(x)? {
            return Err(Error::PathNotInCylinder(format!(
                "{} is not in Z({nu})",
                x.label()
            )));
        }
        let range = paths::ind(mu, &paths::res(nu, x)?)?;
        Ok(GermElement {
            mu: mu.clone(),
            nu: nu.clone(),
            source: x.clone(),
            range,
        })
    }

    /// The unit germ `[X, X, x]` at a path into `X`.
    pub fn unit(x: &PathOracle) -> Result<Self> {
        let id = x.fibration().domain().identity(x.target())?;
        Self::new(&id, &id, x)
    }

    pub fn mu(&self) -> &MorphismId {
        &self.mu
    }

    pub fn nu(&self) -> &MorphismId {
        &self.nu
    }

    pub fn fibration(&self) -> &Fibration {
        self.source.fibration()
    }

    pub fn source(&self) -> &PathOracle {
        &self.source
    }

    pub fn range(&self) -> Result<PathOracle> {
        Ok(self.range.clone())
    }

    /// `[mu, nu, x]^{-1} = [nu, mu, ind_mu res_nu x]`.
    pub fn inverse(&self) -> Result<Self> {
        Self::new(&self.nu, &self.mu, &self.range)
    }

    /// The product `self * other`, defined when the source of `self` equals
    /// the range of `other` on base objects of level at most `depth`.
    pub fn compose(&self, other: &GermElement, depth: usize) -> Result<Self> {
        let f = self.fibration();
        if !f.same_as(other.fibration()) {
            return Err(Error::FibrationMismatch(
                f.name().into(),
                other.fibration().name().into(),
            ));
        }
        let x = &self.source;
        if !path_equal(x, &other.range, depth)?.is_equal() {
            return Err(Error::Precondition(format!(
                "germs {self} and {other} are not composable"
            )));
        }
        let e = f.domain();
        let (fnu, fsigma) = (f.apply(&self.nu)?, f.apply(&other.mu)?);
        let (a, b) = ore_complete(f.codomain(), &fnu, &fsigma)?;
        let (_, gamma) = eval_path_morphism(x, &fnu, &a)?;
        let (_, eta) = eval_path_morphism(x, &fsigma, &b)?;
        Self::new(
            &e.compose(&self.mu, &gamma)?,
            &e.compose(&other.nu, &eta)?,
            &other.source,
        )
    }

    /// Whether the germ lies in `Z(cell.mu, cell.nu)`. Undecided comparisons
    /// are reported as an error.
    pub fn in_cell(&self, cell: &GermBasisSet, depth: usize) -> Result<bool> {
        if !CylinderSet::new(&cell.nu).contains(&self.source)? {
            return Ok(false);
        }
        let e = self.fibration().domain();
        if e.target(&cell.mu)? != e.target(&self.mu)? {
            return Ok(false);
        }
        let other = GermElement::new(&cell.mu, &cell.nu, &self.source)?;
        match equal_germ(self, &other, depth)?.verdict {
            Verdict::Equal => Ok(true),
            Verdict::NotEqual => Ok(false),
            Verdict::Unknown => Err(Error::Precondition(format!(
                "membership of {self} in {cell} is undecided at depth {depth}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GermComparison {
    pub verdict: Verdict,
    /// The depth the comparison is certified to; `None` on a finite base.
    pub depth: Option<usize>,
}

/// Decides `[mu, nu, x] = [mu', nu', x']`. The sources must agree, and some
/// joint completion `F(nu) a = F(nu') b`, `F(mu) a = F(mu') b` must give
/// `mu x_2(F(nu), a) = mu' x_2(F(nu'), b)`. A match at one completion is
/// conclusive; a failure at every completion of an exhaustive search rules
/// out equality, since a match at a refinement would factor through it.
pub fn equal_germ(g1: &GermElement, g2: &GermElement, depth: usize) -> Result<GermComparison> {
    let f = g1.fibration();
    let base = f.codomain();
    let reported = (!base.is_finite()).then_some(depth);
    let done = |verdict| {
        Ok(GermComparison {
            verdict,
            depth: reported,
        })
    };
    if !path_equal(&g1.source, &g2.source, depth)?.is_equal() {
        return done(Verdict::NotEqual);
    }
    let e = f.domain();
    if e.target(&g1.mu)? != e.target(&g2.mu)? {
        return done(Verdict::NotEqual);
    }
    let (fnu1, fnu2) = (f.apply(&g1.nu)?, f.apply(&g2.nu)?);
    let (fmu1, fmu2) = (f.apply(&g1.mu)?, f.apply(&g2.mu)?);
    let max = if base.is_finite() { usize::MAX } else { depth };
    let (completions, exact) = base.joint_completions(&fnu1, &fnu2, &fmu1, &fmu2, max)?;
    let x = &g1.source;
    for (a, b) in &completions {
        let (_, gamma) = eval_path_morphism(x, &fnu1, a)?;
        let (_, gamma2) = eval_path_morphism(x, &fnu2, b)?;
        if e.compose(&g1.mu, &gamma)? == e.compose(&g2.mu, &gamma2)? {
            return done(Verdict::Equal);
        }
    }
    done(if exact {
        Verdict::NotEqual
    } else {
        Verdict::Unknown
    })
}

/// Every germ of a fibration between finite categories, with the partial
/// multiplication table.
#[derive(Debug, Clone)]
pub struct GermTable {
    pub paths: Vec<PathOracle>,
    pub germs: Vec<GermElement>,
    /// Index into `paths` of each germ's source.
    pub sources: Vec<usize>,
    pub ranges: Vec<usize>,
    pub inverses: Vec<usize>,
    /// `products[i][j]` is `germs[i] * germs[j]` when the source of `i` is
    /// the range of `j`.
    pub products: Vec<Vec<Option<usize>>>,
}

impl GermTable {
    pub fn len(&self) -> usize {
        self.germs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.germs.is_empty()
    }

    /// The germs that are units `[X, X, x]`, one per path.
    pub fn units(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.products[i][i] == Some(i))
            .collect()
    }

    fn find(&self, g: &GermElement, source: usize) -> Result<usize> {
        for i in (0..self.len()).filter(|&i| self.sources[i] == source) {
            if equal_germ(&self.germs[i], g, 1)?.verdict == Verdict::Equal {
                return Ok(i);
            }
        }
        Err(Error::Precondition(format!(
            "germ {g} is missing from the table"
        )))
    }

    pub fn to_json(&self) -> Value {
        let label = |i: usize| self.germs[i].to_string();
        json!({
            "paths": self.paths.iter().map(|p| p.label().to_string()).collect::<Vec<_>>(),
            "germs": (0..self.len()).map(|i| json!({
                "germ": label(i),
                "source": self.paths[self.sources[i]].label(),
                "range": self.paths[self.ranges[i]].label(),
                "inverse": label(self.inverses[i]),
            })).collect::<Vec<_>>(),
            "products": self.products.iter().map(|row| row.iter().map(|p| match p {
                Some(k) => Value::String(label(*k)),
                None => Value::Null,
            }).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
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

/// Enumerates the germs of a fibration between finite categories: every
/// `[mu, nu, x]` with `x` ranging over the (finitely many) paths in `Z(nu)`,
/// deduplicated by [`equal_germ`].
pub fn enumerate_germs(f: &Fibration) -> Result<GermTable> {
    let e = f.domain();
    if !e.is_finite() || !f.codomain().is_finite() {
        return Err(Error::PathSpaceNotFinite(format!(
            "germ enumeration of {} needs finite categories",
            f.name()
        )));
    }
    let paths = paths::enumerate_all_paths(f)?;
    let morphisms = e.morphisms(usize::MAX);
    let mut germs: Vec<GermElement> = Vec::new();
    let mut sources = Vec::new();
    for (pi, x) in paths.iter().enumerate() {
        for nu in morphisms
            .iter()
            .filter(|nu| e.target(nu).ok().as_ref() == Some(x.target()))
        {
            if !CylinderSet::new(nu).contains(x)? {
                continue;
            }
            for mu in &morphisms {
                if e.source(mu)? != e.source(nu)? {
                    continue;
                }
                let g = GermElement::new(mu, nu, x)?;
                let mut seen = false;
                for (i, h) in germs.iter().enumerate() {
                    if sources[i] == pi && equal_germ(h, &g, 1)?.verdict == Verdict::Equal {
                        seen = true;
                        break;
                    }
                }
                if !seen {
                    germs.push(g);
                    sources.push(pi);
                }
                if germs.len() > f.budget() {
                    return Err(Error::OrbitBudgetExceeded(f.budget()));
                }
            }
        }
    }
    let ranges = germs
        .iter()
        .map(|g| path_index(&paths, &g.range))
        .collect::<Result<Vec<_>>>()?;
    let mut table = GermTable {
        paths,
        germs,
        sources,
        ranges,
        inverses: Vec::new(),
        products: Vec::new(),
    };
    let n = table.len();
    let mut inverses = Vec::with_capacity(n);
    for i in 0..n {
        let inv = table.germs[i].inverse()?;
        inverses.push(table.find(&inv, table.ranges[i])?);
    }
    let mut products = vec![vec![None; n]; n];
    for i in 0..n {
        for j in 0..n {
            if table.sources[i] == table.ranges[j] {
                let g = table.germs[i].compose(&table.germs[j], 1)?;
                products[i][j] = Some(table.find(&g, table.sources[j])?);
            }
        }
    }
    table.inverses = inverses;
    table.products = products;
    Ok(table)
}

/// The left regular representation on the germs with source a fixed path
/// `u`: `L(f) delta_xi = sum over eta with s(eta) = r(xi) of f(eta) delta_{eta xi}`.
#[derive(Debug, Clone)]
pub struct RegularRepresentation {
    table: GermTable,
    /// Indices into the table of the basis germs.
    basis: Vec<usize>,
}

impl RegularRepresentation {
    /// Builds the representation at `u`. The orbit of `u` must be
    /// enumerable within `budget` germs.
    pub fn new(f: &Fibration, u: &PathOracle, budget: usize) -> Result<Self> {
        let table = enumerate_germs(&f.with_budget(budget.max(f.budget())))?;
        let ui = path_index(&table.paths, u)?;
        let basis: Vec<usize> = (0..table.len())
            .filter(|&i| table.sources[i] == ui)
            .collect();
        if basis.len() > budget {
            return Err(Error::OrbitBudgetExceeded(budget));
        }
        Ok(RegularRepresentation { table, basis })
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> Vec<&GermElement> {
        self.basis.iter().map(|&i| &self.table.germs[i]).collect()
    }

    pub fn table(&self) -> &GermTable {
        &self.table
    }

    pub fn matrix(&self, func: &GroupoidFunction) -> Result<Matrix> {
        let t = &self.table;
        let values: Vec<Scalar> = t
            .germs
            .iter()
            .map(|g| func.eval(g, 1))
            .collect::<Result<_>>()?;
        let n = self.dimension();
        let mut m = Matrix::zeros(n, n);
        for (col, &xi) in self.basis.iter().enumerate() {
            for eta in 0..t.len() {
                if t.sources[eta] != t.ranges[xi] || values[eta] == scalar::zero() {
                    continue;
                }
                let prod = t.products[eta][xi].expect("composable germs have a product");
                let row = self
                    .basis
                    .iter()
                    .position(|&b| b == prod)
                    .expect("products of basis germs stay in the basis");
                let v = m.get(row, col) + &values[eta];
                m.set(row, col, v);
            }
        }
        Ok(m)
    }
}

/// The regular representation of the germ groupoid at `u`, in exact
/// arithmetic.
pub fn regular_representation(
    f: &Fibration,
    u: &PathOracle,
    budget: usize,
) -> Result<RegularRepresentation> {
    RegularRepresentation::new(f, u, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::ids::ObjectId;
    use crate::paths::Chooser;

    fn morph(f: &Fibration, s: &str) -> MorphismId {
        f.domain().parse_morphism(s).unwrap()
    }

    #[test]
    fn germ_equality_on_o2() {
        let f = catalog::o_n(2).unwrap();
        let v = ObjectId::named("v");
        let x = PathOracle::grown(&f, &v, Chooser::periodic(vec![0, 1])).unwrap();
        let y = paths::ind(&morph(&f, "e1"), &x).unwrap();
        let g1 = GermElement::new(&morph(&f, "v"), &morph(&f, "e1"), &y).unwrap();
        let g2 = GermElement::new(&morph(&f, "e2"), &morph(&f, "e1.e1"), &y).unwrap();
        assert_eq!(equal_germ(&g1, &g2, 4).unwrap().verdict, Verdict::NotEqual);
        let g3 = GermElement::new(&morph(&f, "e1"), &morph(&f, "e1.e1"), &y).unwrap();
        assert_eq!(equal_germ(&g1, &g3, 4).unwrap().verdict, Verdict::Equal);
        let z = paths::ind(&morph(&f, "e1"), &y).unwrap();
        let h1 = GermElement::new(&morph(&f, "e2"), &morph(&f, "e1"), &z).unwrap();
        let h2 = GermElement::new(&morph(&f, "e2.e1"), &morph(&f, "e1.e1"), &z).unwrap();
        assert_eq!(equal_germ(&h1, &h2, 4).unwrap().verdict, Verdict::Equal);
    }

    #[test]
    fn inverse_and_products() {
        let f = catalog::o_n(2).unwrap();
        let v = ObjectId::named("v");
        let x = PathOracle::grown(&f, &v, Chooser::thue_morse()).unwrap();
        let y = paths::ind(&morph(&f, "e2"), &x).unwrap();
        let g = GermElement::new(&morph(&f, "e1.e1"), &morph(&f, "e2"), &y).unwrap();
        let inv = g.inverse().unwrap();
        let left = inv.compose(&g, 6).unwrap();
        let unit = GermElement::unit(&y).unwrap();
        assert_eq!(equal_germ(&left, &unit, 6).unwrap().verdict, Verdict::Equal);
        let right = g.compose(&inv, 6).unwrap();
        let unit_r = GermElement::unit(&g.range().unwrap()).unwrap();
        assert_eq!(
            equal_germ(&right, &unit_r, 6).unwrap().verdict,
            Verdict::Equal
        );
        assert!(inv.compose(&inv, 6).is_err());
    }

    #[test]
    fn kgraph_degree_cocycle_respects_products() {
        let f = catalog::by_name("2-graph").unwrap();
        let v = ObjectId::named("v");
        let x = PathOracle::grown(&f, &v, Chooser::thue_morse()).unwrap();
        let degree = |g: &GermElement| -> Vec<i64> {
            let (MorphismId::Degree(a), MorphismId::Degree(b)) =
                (f.apply(g.mu()).unwrap(), f.apply(g.nu()).unwrap())
            else {
                panic!("degree functor")
            };
            a.iter()
                .zip(&b)
                .map(|(p, q)| *p as i64 - *q as i64)
                .collect()
        };
        let y = paths::ind(&morph(&f, "r1"), &x).unwrap();
        let g = GermElement::new(&morph(&f, "b1.b2"), &morph(&f, "r1"), &y).unwrap();
        let x2 = g.range().unwrap();
        let h = GermElement::new(&morph(&f, "r2"), &morph(&f, "b1"), &x2).unwrap();
        let hg = h.compose(&g, 4).unwrap();
        let sum: Vec<i64> = degree(&h)
            .iter()
            .zip(degree(&g))
            .map(|(a, b)| a + b)
            .collect();
        assert_eq!(degree(&hg), sum);
    }

    #[test]
    fn finite_germ_counts() {
        for (name, n) in [("z2", 2), ("z3", 3), ("pair-groupoid-3", 9), ("s3", 6)] {
            let f = catalog::by_name(name).unwrap();
            let t = enumerate_germs(&f).unwrap();
            assert_eq!(t.len(), n, "{name}");
            for i in 0..n {
                let inv = t.inverses[i];
                assert!(t.units().contains(&t.products[i][inv].unwrap()));
            }
        }
        assert!(enumerate_germs(&catalog::o_n(2).unwrap()).is_err());
    }

    #[test]
    fn regular_representation_is_multiplicative() {
        let f = catalog::by_name("pair-groupoid-3").unwrap();
        let t = enumerate_germs(&f).unwrap();
        let u = t.paths[0].clone();
        let rep = regular_representation(&f, &u, 100).unwrap();
        assert_eq!(rep.dimension(), 3);
        let cells: Vec<GermBasisSet> = f
            .domain()
            .morphisms(usize::MAX)
            .iter()
            .map(|m| {
                let s = f.domain().source(m).unwrap();
                GermBasisSet::new(&f, m, &f.domain().identity(&s).unwrap()).unwrap()
            })
            .collect();
        for a in &cells {
            for b in &cells {
                let fa = GroupoidFunction::indicator(&f, a).unwrap();
                let fb = GroupoidFunction::indicator(&f, b).unwrap();
                let lhs = rep.matrix(&fa.convolve(&fb).unwrap()).unwrap();
                let rhs = rep
                    .matrix(&fa)
                    .unwrap()
                    .mul(&rep.matrix(&fb).unwrap())
                    .unwrap();
                assert_eq!(lhs, rhs, "{a} {b}");
            }
        }
        assert!(matches!(
            regular_representation(&f, &u, 2),
            Err(Error::OrbitBudgetExceeded(2))
        ));
    }
}
