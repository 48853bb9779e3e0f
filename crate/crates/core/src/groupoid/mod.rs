//! Basis arithmetic for the germ groupoid: the compact open sets
//! `Z(mu, nu)`, their inverses, inclusions, intersections and products,
//! and convolution of finite combinations of their indicator functions.

mod germ;

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fibration::{ore_match, Fibration};
use crate::fincat::Completion;
use crate::ids::{MorphismId, ObjectId};
use crate::matrix::Matrix;
use crate::scalar::{self, Scalar};
use crate::span_sum::{CompletionRule, SpanSum, Verdict};

pub use germ::{
    enumerate_germs, equal_germ, regular_representation, GermComparison, GermElement, GermTable,
    RegularRepresentation,
};

/// The set `Z(mu, nu)` of germs `[mu, nu, x]` with `x` in `Z(nu)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct GermBasisSet {
    pub mu: MorphismId,
    pub nu: MorphismId,
}

impl fmt::Display for GermBasisSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z({}, {})", self.mu, self.nu)
    }
}

impl GermBasisSet {
    pub fn new(f: &Fibration, mu: &MorphismId, nu: &MorphismId) -> Result<Self> {
        let e = f.domain();
        if e.source(mu)? != e.source(nu)? {
            return Err(Error::Precondition(format!(
                "({mu}, {nu}) is not a span: the sources differ"
            )));
        }
        Ok(GermBasisSet {
            mu: mu.clone(),
            nu: nu.clone(),
        })
    }

    /// The unit cell `Z(X, X)`.
    pub fn unit(f: &Fibration, x: &ObjectId) -> Result<Self> {
        let id = f.domain().identity(x)?;
        Ok(GermBasisSet {
            mu: id.clone(),
            nu: id,
        })
    }

    /// `Z(mu, nu)^{-1} = Z(nu, mu)`.
    pub fn invert(&self) -> Self {
        GermBasisSet {
            mu: self.nu.clone(),
            nu: self.mu.clone(),
        }
    }

    /// Parses `Z(a, b)`; the arguments may be bracketed morphism names.
    pub fn parse(f: &Fibration, s: &str) -> Result<Self> {
        let s = s.trim();
        let inner = s
            .strip_prefix("Z(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| Error::Parse(format!("expected Z(mu, nu), got {s}")))?;
        let parts = crate::ids::split_top_level(inner, ',');
        if parts.len() != 2 {
            return Err(Error::Parse(format!("expected two legs in {s}")));
        }
        let e = f.domain();
        let leg = |p: &str| -> Result<MorphismId> {
            let p = p.trim();
            e.parse_morphism(p).or_else(|err| {
                e.parse_object(p)
                    .and_then(|x| e.identity(&x))
                    .map_err(|_| err)
            })
        };
        Self::new(f, &leg(parts[0])?, &leg(parts[1])?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Inclusion {
    Subset,
    Disjoint,
    Unknown,
}

/// Decides `Z(mu, nu) ⊆ Z(alpha, beta)`. When some `a` satisfies
/// `F(alpha) a = F(mu)` and `F(beta) a = F(nu)`, the cell is a subset exactly
/// when a lift `gamma` of `a` has `(alpha gamma, beta gamma) = (mu, nu)`,
/// and disjoint otherwise. Without such an `a` the answer is `Unknown`.
pub fn basis_inclusion(
    f: &Fibration,
    small: &GermBasisSet,
    big: &GermBasisSet,
) -> Result<Inclusion> {
    let e = f.domain();
    let base = f.codomain();
    if e.target(&small.mu)? != e.target(&big.mu)? || e.target(&small.nu)? != e.target(&big.nu)? {
        return Ok(Inclusion::Disjoint);
    }
    let over_mu = base.divide_left(&f.apply(&big.mu)?, &f.apply(&small.mu)?)?;
    let over_nu: BTreeSet<MorphismId> = base
        .divide_left(&f.apply(&big.nu)?, &f.apply(&small.nu)?)?
        .into_iter()
        .collect();
    let Some(a) = over_mu.into_iter().find(|a| over_nu.contains(a)) else {
        return Ok(Inclusion::Unknown);
    };
    for gamma in f.enumerate_fiber(&e.source(&big.mu)?, &a)? {
        if e.compose(&big.mu, &gamma)? == small.mu && e.compose(&big.nu, &gamma)? == small.nu {
            return Ok(Inclusion::Subset);
        }
    }
    Ok(Inclusion::Disjoint)
}

/// `Z(alpha, beta) ∩ Z(sigma, tau)` as a disjoint union of cells
/// `(alpha gamma, beta gamma) = (sigma eta, tau eta)`, taken over the
/// minimal joint completions `(a, b)` of `F(alpha) a = F(sigma) b` and
/// `F(beta) a = F(tau) b`.
pub fn intersect_basis(
    f: &Fibration,
    x: &GermBasisSet,
    y: &GermBasisSet,
) -> Result<Vec<GermBasisSet>> {
    let e = f.domain();
    let base = f.codomain();
    if e.target(&x.mu)? != e.target(&y.mu)? || e.target(&x.nu)? != e.target(&y.nu)? {
        return Ok(Vec::new());
    }
    let (fa, fb) = (f.apply(&x.mu)?, f.apply(&x.nu)?);
    let (fs, ft) = (f.apply(&y.mu)?, f.apply(&y.nu)?);
    let max_level = if base.is_finite() {
        usize::MAX
    } else {
        [&fa, &fb, &fs, &ft].iter().map(|m| base.level(m)).sum()
    };
    let (mut completions, _) = base.joint_completions(&fa, &fs, &fb, &ft, max_level)?;
    completions.sort_by_key(|(a, b)| (base.level(a) + base.level(b), a.clone(), b.clone()));
    // Keep completions that do not refine an earlier one.
    let mut kept: Vec<Completion> = Vec::new();
    for (a, b) in completions {
        let mut refines = false;
        for (a0, b0) in &kept {
            for t in base.divide_left(a0, &a)? {
                if base.compose(b0, &t)? == b {
                    refines = true;
                    break;
                }
            }
            if refines {
                break;
            }
        }
        if !refines {
            kept.push((a, b));
        }
    }
    let mut cells = BTreeSet::new();
    for (a, b) in kept {
        let etas = f.enumerate_fiber(&e.source(&y.mu)?, &b)?;
        for gamma in f.enumerate_fiber(&e.source(&x.mu)?, &a)? {
            let (ag, bg) = (e.compose(&x.mu, &gamma)?, e.compose(&x.nu, &gamma)?);
            for eta in &etas {
                if e.compose(&y.mu, eta)? == ag && e.compose(&y.nu, eta)? == bg {
                    cells.insert(GermBasisSet {
                        mu: ag.clone(),
                        nu: bg.clone(),
                    });
                }
            }
        }
    }
    Ok(cells.into_iter().collect())
}

/// `Z(alpha, beta) Z(sigma, tau)` as the disjoint cells
/// `Z(alpha eta, tau lambda)` over `(eta, lambda)` in `ore_match(beta, sigma)`.
pub fn product_basis(
    f: &Fibration,
    x: &GermBasisSet,
    y: &GermBasisSet,
) -> Result<Vec<GermBasisSet>> {
    let e = f.domain();
    ore_match(f, &x.nu, &y.mu)?
        .into_iter()
        .map(|(eta, lam)| {
            Ok(GermBasisSet {
                mu: e.compose(&x.mu, &eta)?,
                nu: e.compose(&y.nu, &lam)?,
            })
        })
        .collect()
}

/// A finite combination of indicator functions `1_{Z(mu, nu)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupoidFunction(pub(crate) SpanSum);

impl fmt::Display for GroupoidFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_zero() {
            return write!(f, "0");
        }
        for (i, ((a, b), c)) in self.0.terms().iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if c != &scalar::one() {
                write!(f, "({})", scalar::to_string(c))?;
            }
            write!(f, "1_Z({a}, {b})")?;
        }
        Ok(())
    }
}

impl GroupoidFunction {
    pub fn zero(f: &Fibration) -> Self {
        GroupoidFunction(SpanSum::zero(f))
    }

    pub fn indicator(f: &Fibration, cell: &GermBasisSet) -> Result<Self> {
        Ok(GroupoidFunction(SpanSum::span(
            f,
            &cell.mu,
            &cell.nu,
            scalar::one(),
        )?))
    }

    pub fn from_cells(f: &Fibration, cells: &[GermBasisSet]) -> Result<Self> {
        let mut out = SpanSum::zero(f);
        for c in cells {
            out = out.plus(&SpanSum::span(f, &c.mu, &c.nu, scalar::one())?)?;
        }
        Ok(GroupoidFunction(out))
    }

    pub fn fibration(&self) -> &Fibration {
        self.0.fibration()
    }

    /// `(cell, coefficient)` pairs in cell order.
    pub fn terms(&self) -> Vec<(GermBasisSet, Scalar)> {
        self.0
            .terms()
            .iter()
            .map(|((a, b), c)| {
                (
                    GermBasisSet {
                        mu: a.clone(),
                        nu: b.clone(),
                    },
                    c.clone(),
                )
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        Ok(GroupoidFunction(self.0.plus(&other.0)?))
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        GroupoidFunction(self.0.scale(c))
    }

    /// `f*(g) = conj(f(g^{-1}))`: cells inverted, coefficients conjugated.
    pub fn involute(&self) -> Self {
        GroupoidFunction(self.0.adjoint())
    }

    /// Convolution, extending `product_basis` bilinearly.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        Ok(GroupoidFunction(self.0.product(&other.0)?))
    }

    pub fn convolve_with(&self, other: &Self, rule: CompletionRule<'_>) -> Result<Self> {
        Ok(GroupoidFunction(self.0.product_with(&other.0, rule)?))
    }

    /// The same function written over cells refined to a common level, in
    /// which distinct cells are disjoint.
    pub fn disjoint_form(&self) -> Result<Self> {
        Ok(GroupoidFunction(self.0.common_refinement()?))
    }

    pub fn equal(&self, other: &Self) -> Result<Verdict> {
        self.0.compare(&other.0)
    }

    /// The value at a germ: the sum of the coefficients of the cells that
    /// contain it.
    pub fn eval(&self, g: &GermElement, depth: usize) -> Result<Scalar> {
        let mut total = scalar::zero();
        for ((mu, nu), c) in self.0.terms() {
            if g.in_cell(
                &GermBasisSet {
                    mu: mu.clone(),
                    nu: nu.clone(),
                },
                depth,
            )? {
                total += c;
            }
        }
        Ok(total)
    }

    /// `(f * g)(gamma)` by the convolution formula, summing over the germs
    /// `eta` of `f`'s cells whose range is `r(gamma)`.
    pub fn convolve_at(&self, other: &Self, gamma: &GermElement, depth: usize) -> Result<Scalar> {
        let y = gamma.range()?;
        let mut total = scalar::zero();
        for ((alpha, beta), c) in self.0.terms() {
            let cell = crate::paths::CylinderSet::new(alpha);
            if !cell.contains(&y)? {
                continue;
            }
            let eta_inverse = GermElement::new(beta, alpha, &y)?;
            let rest = eta_inverse.compose(gamma, depth)?;
            total += c * other.eval(&rest, depth)?;
        }
        Ok(total)
    }

    /// The matrix of the left regular representation at a path.
    pub fn represent(&self, rep: &RegularRepresentation) -> Result<Matrix> {
        rep.matrix(self)
    }

    pub fn to_json(&self) -> serde_json::Value {
        self.0.to_json()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn cell(f: &Fibration, s: &str) -> GermBasisSet {
        GermBasisSet::parse(f, s).unwrap()
    }

    #[test]
    fn inversion() {
        let f = catalog::o_n(2).unwrap();
        let z = cell(&f, "Z(e1, v)");
        assert_eq!(z.invert(), cell(&f, "Z(v, e1)"));
        assert_eq!(z.invert().invert(), z);
        let u = GermBasisSet::unit(&f, &ObjectId::named("v")).unwrap();
        assert_eq!(u.invert(), u);
    }

    #[test]
    fn inclusion_criterion() {
        let f = catalog::o_n(2).unwrap();
        let big = cell(&f, "Z(e1, e2)");
        let small = cell(&f, "Z(e1.e1, e2.e1)");
        assert_eq!(
            basis_inclusion(&f, &small, &big).unwrap(),
            Inclusion::Subset
        );
        assert_eq!(basis_inclusion(&f, &big, &big).unwrap(), Inclusion::Subset);
        assert_eq!(
            basis_inclusion(&f, &cell(&f, "Z(e1, e1)"), &cell(&f, "Z(e2, e2)")).unwrap(),
            Inclusion::Disjoint
        );
        assert_eq!(
            basis_inclusion(&f, &big, &small).unwrap(),
            Inclusion::Unknown
        );
    }

    #[test]
    fn intersections() {
        let f = catalog::o_n(2).unwrap();
        let big = cell(&f, "Z(e1, e2)");
        assert_eq!(intersect_basis(&f, &big, &big).unwrap(), vec![big.clone()]);
        let small = cell(&f, "Z(e1.e2, e2.e2)");
        assert_eq!(
            intersect_basis(&f, &big, &small).unwrap(),
            vec![small.clone()]
        );
        assert!(
            intersect_basis(&f, &cell(&f, "Z(e1, e1)"), &cell(&f, "Z(e2, e2)"))
                .unwrap()
                .is_empty()
        );
        // Units over Z(e1) and the shift by e1 meet only at the fixed point
        // e1 e1 e1 ..., which is not open, so no cell is returned.
        assert!(
            intersect_basis(&f, &cell(&f, "Z(e1, e1)"), &cell(&f, "Z(e1, e1.e1)"))
                .unwrap()
                .is_empty()
        );
    }

    #[test]
    fn products() {
        let f = catalog::o_n(2).unwrap();
        let p = product_basis(&f, &cell(&f, "Z(e1, v)"), &cell(&f, "Z(v, e2)")).unwrap();
        assert_eq!(p, vec![cell(&f, "Z(e1, e2)")]);
        assert!(
            product_basis(&f, &cell(&f, "Z(v, e1)"), &cell(&f, "Z(e2, v)"))
                .unwrap()
                .is_empty()
        );
        let diag = product_basis(&f, &cell(&f, "Z(e1, v)"), &cell(&f, "Z(v, e1)")).unwrap();
        assert_eq!(diag, vec![cell(&f, "Z(e1, e1)")]);
        // Product cells are pairwise disjoint.
        let q = product_basis(&f, &cell(&f, "Z(v, e1)"), &cell(&f, "Z(e1.e1, v)")).unwrap();
        for (i, a) in q.iter().enumerate() {
            for b in &q[i + 1..] {
                assert!(intersect_basis(&f, a, b).unwrap().is_empty());
            }
        }
    }

    #[test]
    fn unit_cell_is_idempotent() {
        let f = catalog::o_n(2).unwrap();
        let u = GroupoidFunction::indicator(&f, &cell(&f, "Z(v, v)")).unwrap();
        assert_eq!(u.convolve(&u).unwrap(), u);
    }

    #[test]
    fn convolution_matches_pointwise_formula() {
        let f = catalog::o_n(2).unwrap();
        let a = GroupoidFunction::from_cells(&f, &[cell(&f, "Z(e1, e2)"), cell(&f, "Z(v, e1)")])
            .unwrap();
        let b = GroupoidFunction::from_cells(&f, &[cell(&f, "Z(e2.e1, v)"), cell(&f, "Z(e1, e1)")])
            .unwrap()
            .scale(&scalar::from_int(3));
        let ab = a.convolve(&b).unwrap();
        let v = ObjectId::named("v");
        let x =
            crate::paths::PathOracle::grown(&f, &v, crate::paths::Chooser::periodic(vec![1, 0, 0]))
                .unwrap();
        let e = f.domain();
        for (mu, nu) in [("e1", "e2"), ("v", "e1"), ("e2.e1", "e1"), ("e1.e1", "e2")] {
            let (mu, nu) = (e.parse_morphism(mu).unwrap(), e.parse_morphism(nu).unwrap());
            let y = crate::paths::ind(&nu, &x).unwrap();
            let g = GermElement::new(&mu, &nu, &y).unwrap();
            assert_eq!(
                ab.eval(&g, 4).unwrap(),
                a.convolve_at(&b, &g, 4).unwrap(),
                "{mu} {nu}"
            );
        }
    }
}
