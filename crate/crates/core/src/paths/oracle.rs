//! Infinite paths as memoized evaluators on objects of the base slice.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::fibration::{ore_complete, Fibration, FunctorMap};
use crate::ids::{MorphismId, ObjectId};

pub type WordFn = Arc<dyn Fn(usize) -> usize + Send + Sync>;
pub type Callback = Arc<dyn Fn(&MorphismId) -> Result<MorphismId> + Send + Sync>;

/// Preference order among candidate extensions when growing a path.
#[derive(Clone)]
pub enum Chooser {
    /// The least candidate in identifier order.
    MinLex,
    /// The candidate whose name is given, falling back to the least one.
    Constant(String),
    /// At step `i`, the candidate at position `word(i)` modulo the number of
    /// candidates.
    Word { label: String, word: WordFn },
}

impl fmt::Debug for Chooser {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

fn thue_morse(i: usize) -> usize {
    (i.count_ones() % 2) as usize
}

impl Chooser {
    pub fn periodic(pattern: Vec<usize>) -> Self {
        let label = format!(
            "periodic:{}",
            pattern
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        Chooser::Word {
            label,
            word: Arc::new(move |i| pattern[i % pattern.len()]),
        }
    }

    /// The Thue-Morse word, which contains no repeated factor of the form
    /// `www` and is therefore not eventually periodic.
    pub fn thue_morse() -> Self {
        Chooser::Word {
            label: "thue-morse".into(),
            word: Arc::new(thue_morse),
        }
    }

    /// Parses `minlex`, `constant:NAME`, `periodic:0,1,1` or `thue-morse`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "minlex" {
            return Ok(Chooser::MinLex);
        }
        if s == "thue-morse" {
            return Ok(Chooser::thue_morse());
        }
        if let Some(name) = s.strip_prefix("constant:") {
            return Ok(Chooser::Constant(name.trim().to_string()));
        }
        if let Some(p) = s.strip_prefix("periodic:") {
            let pattern = p
                .split(',')
                .map(|t| t.trim().parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::Parse(format!("bad periodic pattern {p}")))?;
            if pattern.is_empty() {
                return Err(Error::Parse("empty periodic pattern".into()));
            }
            return Ok(Chooser::periodic(pattern));
        }
        Err(Error::Parse(format!("unknown chooser {s}")))
    }

    pub fn label(&self) -> String {
        match self {
            Chooser::MinLex => "minlex".into(),
            Chooser::Constant(n) => format!("constant:{n}"),
            Chooser::Word { label, .. } => label.clone(),
        }
    }

    /// Candidates in order of preference at step `step`.
    pub fn order(&self, step: usize, mut candidates: Vec<MorphismId>) -> Vec<MorphismId> {
        candidates.sort();
        match self {
            Chooser::MinLex => {}
            Chooser::Constant(name) => {
                if let Some(i) = candidates.iter().position(|c| &c.to_string() == name) {
                    let c = candidates.remove(i);
                    candidates.insert(0, c);
                }
            }
            Chooser::Word { word, .. } => {
                if !candidates.is_empty() {
                    let n = candidates.len();
                    candidates.rotate_left(word(step) % n);
                }
            }
        }
        candidates
    }
}

pub(crate) enum Source {
    /// Every fiber over a base object is a singleton.
    Unique,
    /// k-graph paths grown along the diagonal: `steps[n]` is the value at
    /// `(n, ..., n)`.
    Diagonal {
        chooser: Chooser,
        steps: Mutex<Vec<MorphismId>>,
    },
    Table(BTreeMap<MorphismId, MorphismId>),
    Res {
        mu: MorphismId,
        inner: PathOracle,
    },
    Ind {
        mu: MorphismId,
        inner: PathOracle,
    },
    Callback(Callback),
}

struct Inner {
    fib: Fibration,
    target: ObjectId,
    label: String,
    source: Source,
    memo: Mutex<BTreeMap<MorphismId, MorphismId>>,
    certified: Mutex<Option<Option<usize>>>,
}

/// An infinite path `x` with range `target`: a coherent choice of `x(b)`
/// over every base morphism `b` into `F(target)`.
#[derive(Clone)]
pub struct PathOracle(Arc<Inner>);

impl fmt::Debug for PathOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PathOracle({} to {})", self.0.label, self.0.target)
    }
}

impl fmt::Display for PathOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.label)
    }
}

fn identity_coordinates(map: &FunctorMap) -> bool {
    match map {
        FunctorMap::Degree { coordinates, rank } => {
            coordinates.len() == *rank && coordinates.iter().enumerate().all(|(i, &c)| i == c)
        }
        _ => false,
    }
}

impl PathOracle {
    pub(crate) fn from_source(
        f: &Fibration,
        target: &ObjectId,
        label: String,
        source: Source,
    ) -> Result<Self> {
        if !f.domain().has_object(target) {
            return Err(Error::unknown_object(target));
        }
        Ok(PathOracle(Arc::new(Inner {
            fib: f.clone(),
            target: target.clone(),
            label,
            source,
            memo: Mutex::new(BTreeMap::new()),
            certified: Mutex::new(None),
        })))
    }

    /// A path grown greedily with `chooser`: along the diagonal for k-graphs,
    /// by backtracking search over the finitely many base objects otherwise.
    pub fn grown(f: &Fibration, target: &ObjectId, chooser: Chooser) -> Result<Self> {
        let label = chooser.label();
        if f.domain().as_kgraph().is_some() && identity_coordinates(f.map()) {
            let start = f.domain().identity(target)?;
            return Self::from_source(
                f,
                target,
                label,
                Source::Diagonal {
                    chooser,
                    steps: Mutex::new(vec![start]),
                },
            );
        }
        if f.codomain().is_finite() {
            let mut found = super::sections(f, target, &chooser, 1)?;
            return match found.pop() {
                Some(table) => Self::from_source(f, target, label, Source::Table(table)),
                None => Err(Error::NoSplittingFound {
                    object: target.to_string(),
                    depth: 1,
                    reason: "no coherent section exists".into(),
                }),
            };
        }
        Err(Error::NoSplittingFound {
            object: target.to_string(),
            depth: 0,
            reason: "no growth strategy for this base".into(),
        })
    }

    pub fn constant(f: &Fibration, target: &ObjectId, step: &str) -> Result<Self> {
        Self::grown(f, target, Chooser::Constant(step.to_string()))
    }

    /// The path whose value at each base object is the unique lift.
    pub fn unique(f: &Fibration, target: &ObjectId) -> Result<Self> {
        Self::from_source(f, target, "unique".into(), Source::Unique)
    }

    /// A path given by explicit values; other points are derived from a
    /// tabulated extension by unique factorization.
    pub fn from_table(
        f: &Fibration,
        target: &ObjectId,
        label: &str,
        table: BTreeMap<MorphismId, MorphismId>,
    ) -> Result<Self> {
        Self::from_source(f, target, label.to_string(), Source::Table(table))
    }

    pub fn from_callback(
        f: &Fibration,
        target: &ObjectId,
        label: &str,
        callback: Callback,
    ) -> Result<Self> {
        Self::from_source(f, target, label.to_string(), Source::Callback(callback))
    }

    pub fn fibration(&self) -> &Fibration {
        &self.0.fib
    }

    pub fn target(&self) -> &ObjectId {
        &self.0.target
    }

    pub fn label(&self) -> &str {
        &self.0.label
    }

    /// `Some(d)` when coherence was verified on all base objects of level at
    /// most `d`; `Some(None)` denotes verification on a finite base.
    pub fn certified_depth(&self) -> Option<Option<usize>> {
        *self.0.certified.lock().expect("oracle lock poisoned")
    }

    pub(crate) fn set_certified(&self, depth: Option<usize>) {
        *self.0.certified.lock().expect("oracle lock poisoned") = Some(depth);
    }

    pub fn memo_len(&self) -> usize {
        self.0.memo.lock().expect("oracle lock poisoned").len()
    }

    /// The value `x(b)` at a base object `b` of `B / F(r(x))`.
    pub fn eval(&self, b: &MorphismId) -> Result<MorphismId> {
        if let Some(v) = self.0.memo.lock().expect("oracle lock poisoned").get(b) {
            return Ok(v.clone());
        }
        let f = &self.0.fib;
        let base = f.codomain();
        let fx = f.apply_object(&self.0.target)?;
        if !base.contains(b) || base.target(b)? != fx {
            return Err(Error::Precondition(format!(
                "{b} is not an object of the slice over {fx}"
            )));
        }
        let value = self.compute(b)?;
        let e = f.domain();
        if f.apply(&value).ok().as_ref() != Some(b)
            || e.target(&value).ok().as_ref() != Some(&self.0.target)
        {
            return Err(Error::NotASection {
                base: b.to_string(),
                value: value.to_string(),
                target: self.0.target.to_string(),
            });
        }
        let snapshot: Vec<(MorphismId, MorphismId)> = self
            .0
            .memo
            .lock()
            .expect("oracle lock poisoned")
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        for (b2, v2) in &snapshot {
            for c in base.divide_left(b2, b)? {
                let prefix = f.lift_pair(&value, b2, &c).map(|p| p.0);
                if prefix.as_ref().ok() != Some(v2) {
                    return Err(Error::IncoherentOracle {
                        coarse: b2.to_string(),
                        fine: b.to_string(),
                        value: v2.to_string(),
                        prefix: prefix
                            .map(|p| p.to_string())
                            .unwrap_or_else(|_| "none".into()),
                    });
                }
            }
            for d in base.divide_left(b, b2)? {
                let prefix = f.lift_pair(v2, b, &d).map(|p| p.0);
                if prefix.as_ref().ok() != Some(&value) {
                    return Err(Error::IncoherentOracle {
                        coarse: b.to_string(),
                        fine: b2.to_string(),
                        value: value.to_string(),
                        prefix: prefix
                            .map(|p| p.to_string())
                            .unwrap_or_else(|_| "none".into()),
                    });
                }
            }
        }
        self.0
            .memo
            .lock()
            .expect("oracle lock poisoned")
            .insert(b.clone(), value.clone());
        Ok(value)
    }

    fn compute(&self, b: &MorphismId) -> Result<MorphismId> {
        let f = &self.0.fib;
        let base = f.codomain();
        match &self.0.source {
            Source::Unique => {
                let mut fiber = f.enumerate_fiber(&self.0.target, b)?;
                if fiber.len() != 1 {
                    return Err(Error::NoSplittingFound {
                        object: self.0.target.to_string(),
                        depth: base.level(b),
                        reason: format!("the fiber over {b} has {} elements", fiber.len()),
                    });
                }
                Ok(fiber.pop().expect("singleton fiber"))
            }
            Source::Diagonal { chooser, steps } => {
                let MorphismId::Degree(v) = b else {
                    return Err(Error::unknown_morphism(b));
                };
                let n = v.iter().copied().max().unwrap_or(0) as usize;
                let k = v.len();
                let top = {
                    let mut steps = steps.lock().expect("oracle lock poisoned");
                    while steps.len() <= n {
                        let last = steps
                            .last()
                            .expect("diagonal starts at the identity")
                            .clone();
                        let from = f.domain().source(&last)?;
                        let unit = MorphismId::Degree(vec![1; k]);
                        let candidates = f.enumerate_fiber(&from, &unit)?;
                        let step = steps.len() - 1;
                        let next = chooser
                            .order(step, candidates)
                            .into_iter()
                            .next()
                            .ok_or_else(|| Error::NoSplittingFound {
                                object: self.0.target.to_string(),
                                depth: steps.len(),
                                reason: format!("no path of degree {unit} into {from}"),
                            })?;
                        let grown = f.domain().compose(&last, &next)?;
                        steps.push(grown);
                    }
                    steps[n].clone()
                };
                let rest = MorphismId::Degree(v.iter().map(|&c| n as u32 - c).collect());
                Ok(f.lift_pair(&top, b, &rest)?.0)
            }
            Source::Table(table) => {
                if let Some(v) = table.get(b) {
                    return Ok(v.clone());
                }
                for (b2, v2) in table {
                    if let Some(d) = base.divide_left(b, b2)?.into_iter().next() {
                        return Ok(f.lift_pair(v2, b, &d)?.0);
                    }
                }
                Err(Error::Precondition(format!(
                    "{} has no value at {b}",
                    self.0.label
                )))
            }
            Source::Res { mu, inner } => {
                let fmu = f.apply(mu)?;
                let whole = inner.eval(&base.compose(&fmu, b)?)?;
                Ok(f.lift_pair(&whole, &fmu, b)?.1)
            }
            Source::Ind { mu, inner } => {
                let fmu = f.apply(mu)?;
                let completion = ore_complete(base, &fmu, b)?;
                ind_value(mu, inner, b, &completion)
            }
            Source::Callback(cb) => cb(b),
        }
    }
}

/// `ind_mu(x)(d)` computed from a completion `F(mu) c = d e`: the degree-`d`
/// part of `mu x(c)`.
pub(crate) fn ind_value(
    mu: &MorphismId,
    x: &PathOracle,
    d: &MorphismId,
    (c, e): &(MorphismId, MorphismId),
) -> Result<MorphismId> {
    let f = x.fibration();
    let base = f.codomain();
    let fmu = f.apply(mu)?;
    if base.compose(&fmu, c)? != base.compose(d, e)? {
        return Err(Error::Precondition(format!(
            "({c}, {e}) does not complete ({fmu}, {d})"
        )));
    }
    let whole = f.domain().compose(mu, &x.eval(c)?)?;
    Ok(f.lift_pair(&whole, d, e)?.0)
}
