//! Parsing of algebra words: `s(m)`, `s(m)^*` (also `s(m)^'`) and `p(X)`
//! factors joined by `*`, an optional rational coefficient in front, and
//! terms joined by `+`.

use super::AlgebraElement;
use crate::error::{Error, Result};
use crate::fibration::Fibration;
use crate::scalar::{self, Scalar};

/// Splits at top-level occurrences of `+`.
fn split_terms(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in text.char_indices() {
        match ch {
            '(' | '[' | '<' => depth += 1,
            ')' | ']' | '>' => depth -= 1,
            '+' if depth == 0 => {
                out.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&text[start..]);
    out
}

/// The index just past the parenthesis matching the one at `open`.
fn closing(text: &str, open: usize) -> Result<usize> {
    let mut depth = 0i32;
    for (i, ch) in text[open..].char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Ok(open + i + 1);
                }
            }
            _ => {}
        }
    }
    Err(Error::Parse(format!("unbalanced parentheses in {text}")))
}

fn parse_factor(f: &Fibration, text: &str) -> Result<(AlgebraElement, usize)> {
    let e = f.domain();
    let kind = text.as_bytes().first().copied();
    if !matches!(kind, Some(b's') | Some(b'p')) || !text[1..].starts_with('(') {
        return Err(Error::Parse(format!("expected s(..) or p(..) at {text}")));
    }
    let end = closing(text, 1)?;
    let arg = text[2..end - 1].trim();
    if kind == Some(b'p') {
        return Ok((AlgebraElement::p(f, &e.parse_object(arg)?)?, end));
    }
    let m = e.parse_morphism(arg).or_else(|err| {
        e.parse_object(arg)
            .and_then(|x| e.identity(&x))
            .map_err(|_| err)
    })?;
    let rest = &text[end..];
    if rest.starts_with("^*") || rest.starts_with("^'") {
        Ok((AlgebraElement::s_adj(f, &m)?, end + 2))
    } else {
        Ok((AlgebraElement::s(f, &m)?, end))
    }
}

fn parse_term(f: &Fibration, text: &str) -> Result<AlgebraElement> {
    let mut rest: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if rest.is_empty() {
        return Err(Error::Parse("empty term".into()));
    }
    let mut coefficient: Scalar = scalar::one();
    if let Some(stripped) = rest.strip_prefix('-') {
        if stripped.starts_with("s(") || stripped.starts_with("p(") {
            coefficient = scalar::from_int(-1);
            rest = stripped.to_string();
        }
    }
    if !rest.starts_with("s(") && !rest.starts_with("p(") {
        let (c, tail) = rest
            .split_once('*')
            .ok_or_else(|| Error::Parse(format!("term {text} has no factors")))?;
        coefficient = Scalar::new(scalar::parse_rational(c)?, num::Zero::zero());
        rest = tail.to_string();
    }
    let mut acc: Option<AlgebraElement> = None;
    let mut pos = 0;
    while pos < rest.len() {
        let (factor, used) = parse_factor(f, &rest[pos..])?;
        acc = Some(match acc {
            None => factor,
            Some(a) => a.multiply(&factor)?,
        });
        pos += used;
        if pos < rest.len() {
            if !rest[pos..].starts_with('*') {
                return Err(Error::Parse(format!("expected * at {}", &rest[pos..])));
            }
            pos += 1;
            if pos == rest.len() {
                return Err(Error::Parse(format!("dangling * in {text}")));
            }
        }
    }
    let acc = acc.ok_or_else(|| Error::Parse(format!("term {text} has no factors")))?;
    Ok(acc.scale(&coefficient))
}

/// Parses a sum of words over `f`.
pub fn parse_word(f: &Fibration, text: &str) -> Result<AlgebraElement> {
    let mut out = AlgebraElement::zero(f);
    for term in split_terms(text) {
        out = out.plus(&parse_term(f, term)?)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn factors_and_coefficients() {
        let f = catalog::o_n(2).unwrap();
        let e1 = f.domain().parse_morphism("e1").unwrap();
        let a = parse_word(&f, "s(e1)^'").unwrap();
        assert_eq!(a, AlgebraElement::s_adj(&f, &e1).unwrap());
        let b = parse_word(&f, "-1/2 * s(e1)").unwrap();
        assert_eq!(
            b.coefficient(&e1, &f.domain().parse_morphism("v").unwrap()),
            scalar::from_ratio(-1, 2)
        );
        let c = parse_word(&f, "-s(e1) + s(e1)").unwrap();
        assert!(c.is_zero());
    }

    #[test]
    fn rejects_malformed_words() {
        let f = catalog::o_n(2).unwrap();
        for bad in ["", "s(e1", "s(e1)*", "q(v)", "s(e1)s(e2)", "2", "s(e9)"] {
            assert!(parse_word(&f, bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn degree_identifiers_inside_factors() {
        let f = catalog::by_name("2-graph").unwrap();
        let a = parse_word(&f, "s(b1.r2)*s(r1.b2)^*").unwrap();
        assert_eq!(a.len(), 1);
    }
}
