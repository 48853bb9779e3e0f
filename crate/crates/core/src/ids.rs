//! Identifiers for objects and morphisms.
//!
//! Every backend shares one identifier type so that fibrations, paths and
//! algebra elements can mix morphisms from different categories. The derived
//! ordering is the lexicographic order used wherever enumeration order is
//! observable.

use std::fmt;
use std::sync::Arc;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum ObjectId {
    Named(Arc<str>),
    /// The single object of a monoid regarded as a category.
    Star,
    Tuple(Vec<ObjectId>),
    /// An object of a slice category: a morphism into the base object.
    Arrow(Box<MorphismId>),
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum MorphismId {
    Named(Arc<str>),
    /// An element of the additive monoid N^k.
    Degree(Vec<u32>),
    /// A path in a k-graph in normal form, edges listed from the range end.
    Path {
        range: Arc<str>,
        edges: Vec<Arc<str>>,
    },
    Tuple(Vec<MorphismId>),
    /// A slice morphism (alpha, gamma) from alpha.gamma to alpha.
    SlicePair(Box<MorphismId>, Box<MorphismId>),
}

impl ObjectId {
    pub fn named(name: &str) -> Self {
        ObjectId::Named(Arc::from(name))
    }
}

impl MorphismId {
    pub fn named(name: &str) -> Self {
        MorphismId::Named(Arc::from(name))
    }

    pub fn degree(v: &[u32]) -> Self {
        MorphismId::Degree(v.to_vec())
    }
}

impl serde::Serialize for ObjectId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl serde::Serialize for MorphismId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl From<&str> for ObjectId {
    fn from(s: &str) -> Self {
        ObjectId::named(s)
    }
}

impl From<&str> for MorphismId {
    fn from(s: &str) -> Self {
        MorphismId::named(s)
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectId::Named(n) => write!(f, "{n}"),
            ObjectId::Star => write!(f, "*"),
            ObjectId::Tuple(parts) => {
                write!(f, "<")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ">")
            }
            ObjectId::Arrow(m) => write!(f, "[{m}]"),
        }
    }
}

impl fmt::Display for MorphismId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MorphismId::Named(n) => write!(f, "{n}"),
            MorphismId::Degree(v) => {
                write!(f, "(")?;
                for (i, c) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
            MorphismId::Path { range, edges } => {
                if edges.is_empty() {
                    write!(f, "{range}")
                } else {
                    for (i, e) in edges.iter().enumerate() {
                        if i > 0 {
                            write!(f, ".")?;
                        }
                        write!(f, "{e}")?;
                    }
                    Ok(())
                }
            }
            MorphismId::Tuple(parts) => {
                write!(f, "<")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ">")
            }
            MorphismId::SlicePair(a, g) => write!(f, "[{a} ; {g}]"),
        }
    }
}

/// Splits `s` at top-level occurrences of `sep`, ignoring separators nested
/// inside brackets.
pub(crate) fn split_top_level(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '<' | '[' | '{' => depth += 1,
            ')' | '>' | ']' | '}' => depth -= 1,
            _ if c == sep && depth == 0 => {
                out.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_is_stable() {
        assert_eq!(MorphismId::degree(&[1, 0]).to_string(), "(1,0)");
        let p = MorphismId::Path {
            range: Arc::from("v"),
            edges: vec![Arc::from("e"), Arc::from("f")],
        };
        assert_eq!(p.to_string(), "e.f");
        let id = MorphismId::Path {
            range: Arc::from("v"),
            edges: vec![],
        };
        assert_eq!(id.to_string(), "v");
    }

    #[test]
    fn top_level_split_respects_brackets() {
        assert_eq!(split_top_level("<(1,0), a>", ','), vec!["<(1,0), a>"]);
        assert_eq!(split_top_level("(1,0), a", ','), vec!["(1,0)", " a"]);
        assert_eq!(split_top_level("(1,0),(0,1)", ','), vec!["(1,0)", "(0,1)"]);
    }
}
