use thiserror::Error;

use crate::ids::{MorphismId, ObjectId};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("morphisms {left} and {right} are not composable")]
    NotComposable { left: String, right: String },
    #[error("composition of {left} and {right} is not defined by the table")]
    CompositionUndefined { left: String, right: String },
    #[error("unknown morphism {0}")]
    UnknownMorphism(String),
    #[error("unknown object {0}")]
    UnknownObject(String),
    #[error("not a group: {0}")]
    NotAGroup(String),
    #[error("not a poset: {0}")]
    NotAPoset(String),
    #[error("inconsistent factorization squares: {0}")]
    InconsistentSquares(String),
    #[error("edge {0} refers to an unknown vertex")]
    DanglingEdge(String),
    #[error("restriction maps are not functorial: {0}")]
    NonFunctorialRestriction(String),
    #[error("base category is not right Ore: {0}")]
    BaseNotOre(String),
    #[error("no lift of {factorization} through {morphism}")]
    NoLift {
        morphism: String,
        factorization: String,
    },
    #[error("{count} lifts of {factorization} through {morphism}")]
    MultipleLifts {
        morphism: String,
        factorization: String,
        count: usize,
    },
    #[error("parts do not compose to the image of {0}")]
    BadFactorization(String),
    #[error("fiber over {base} into {object} exceeds the enumeration budget")]
    FiberInfinite { object: String, base: String },
    #[error("{left} and {right} do not share a target")]
    NotACospan { left: String, right: String },
    #[error("no completion of the cospan ({left}, {right}) found")]
    NoCompletion { left: String, right: String },
    #[error("fibration flags missing: {0}")]
    FlagsMissing(String),
    #[error("incoherent path oracle: value at {coarse} is {value} but the prefix of the value at {fine} is {prefix}")]
    IncoherentOracle {
        coarse: String,
        fine: String,
        value: String,
        prefix: String,
    },
    #[error("path oracle returned {value} at {base}, which is not a lift into {target}")]
    NotASection {
        base: String,
        value: String,
        target: String,
    },
    #[error("no splitting found into {object} within depth {depth}: {reason}")]
    NoSplittingFound {
        object: String,
        depth: usize,
        reason: String,
    },
    #[error("path is not in the cylinder of {0}")]
    PathNotInCylinder(String),
    #[error("path space is not finite: {0}")]
    PathSpaceNotFinite(String),
    #[error("orbit exceeds budget {0}")]
    OrbitBudgetExceeded(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("no matrix supplied for {0}")]
    MissingMatrix(String),
    #[error("{0} and {1} live over different fibrations")]
    FibrationMismatch(String, String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn not_composable(left: &MorphismId, right: &MorphismId) -> Self {
        Error::NotComposable {
            left: left.to_string(),
            right: right.to_string(),
        }
    }

    pub fn unknown_morphism(m: &MorphismId) -> Self {
        Error::UnknownMorphism(m.to_string())
    }

    pub fn unknown_object(x: &ObjectId) -> Self {
        Error::UnknownObject(x.to_string())
    }

    pub fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Schema {
            path: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        }
    }
}
