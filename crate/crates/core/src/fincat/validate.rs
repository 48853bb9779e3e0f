//! Validation reports and the category axiom checker.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::Category;
use crate::ids::MorphismId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Level bound up to which the check was run; `None` for exhaustive
    /// checks on finite data.
    pub depth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn push(&mut self, name: &str, passed: bool, depth: Option<usize>, detail: Option<Value>) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            passed,
            depth,
            detail,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.checks.extend(other.checks);
    }
}

/// Checks composability closure, identity laws and associativity on every
/// morphism of level at most `depth` (all morphisms for finite categories).
pub fn validate_category(cat: &Category, depth: usize) -> ValidationReport {
    let level_bound = if cat.is_finite() { usize::MAX } else { depth };
    let reported_depth = if cat.is_finite() { None } else { Some(depth) };
    let ms = cat.morphisms(if cat.is_finite() { 1 } else { depth });
    let mut report = ValidationReport::default();

    let mut closure_failure = None;
    'closure: for a in &ms {
        for b in &ms {
            if cat.source(a).ok() != cat.target(b).ok() {
                continue;
            }
            match cat.compose(a, b) {
                Ok(ab) if cat.contains(&ab) => {}
                _ => {
                    closure_failure = Some(json!([a.to_string(), b.to_string()]));
                    break 'closure;
                }
            }
        }
    }
    report.push(
        "composition_closed",
        closure_failure.is_none(),
        reported_depth,
        closure_failure.map(|p| json!({"pair": p})),
    );

    let mut identity_failure = None;
    for m in &ms {
        let ok = (|| -> crate::error::Result<bool> {
            let left = cat.identity(&cat.target(m)?)?;
            let right = cat.identity(&cat.source(m)?)?;
            Ok(&cat.compose(&left, m)? == m && &cat.compose(m, &right)? == m)
        })()
        .unwrap_or(false);
        if !ok {
            identity_failure = Some(json!({"morphism": m.to_string()}));
            break;
        }
    }
    report.push(
        "identity_laws",
        identity_failure.is_none(),
        reported_depth,
        identity_failure,
    );

    let within = |m: &MorphismId| cat.level(m) <= level_bound;
    let mut assoc_failure = None;
    'assoc: for a in &ms {
        for b in &ms {
            if cat.source(a).ok() != cat.target(b).ok() {
                continue;
            }
            let Ok(ab) = cat.compose(a, b) else { continue };
            for c in &ms {
                if cat.source(b).ok() != cat.target(c).ok() {
                    continue;
                }
                let Ok(bc) = cat.compose(b, c) else { continue };
                if !within(&ab) && !within(&bc) {
                    continue;
                }
                let left = cat.compose(&ab, c);
                let right = cat.compose(a, &bc);
                let same = matches!((&left, &right), (Ok(l), Ok(r)) if l == r);
                if !same {
                    assoc_failure = Some(json!({
                        "triple": [a.to_string(), b.to_string(), c.to_string()],
                        "left": left.map(|m| m.to_string()).unwrap_or_else(|e| e.to_string()),
                        "right": right.map(|m| m.to_string()).unwrap_or_else(|e| e.to_string()),
                    }));
                    break 'assoc;
                }
            }
        }
    }
    report.push(
        "associativity",
        assoc_failure.is_none(),
        reported_depth,
        assoc_failure,
    );
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::explicit::{cyclic_group, group_backend};
    use crate::fincat::NkMonoid;

    #[test]
    fn cyclic_group_passes() {
        assert!(validate_category(&cyclic_group(3).unwrap(), 3).passed());
    }

    #[test]
    fn nk_passes_to_depth() {
        let r = validate_category(&Category::new(NkMonoid::new(2)), 3);
        assert!(r.passed());
        assert_eq!(r.get("associativity").unwrap().depth, Some(3));
    }

    #[test]
    fn corrupted_table_names_a_triple() {
        let elements: Vec<String> = (0..3).map(|i| i.to_string()).collect();
        let table = (0..3)
            .map(|i| (0..3).map(|j| ((i + j) % 3).to_string()).collect())
            .collect();
        let mut backend = group_backend(Some(elements), table).unwrap();
        let one = MorphismId::named("1");
        backend.set_composite(&one, &one, &one);
        let r = validate_category(&Category::new(backend), 3);
        let assoc = r.get("associativity").unwrap();
        assert!(!assoc.passed);
        assert!(assoc.detail.as_ref().unwrap()["triple"].is_array());
    }
}
