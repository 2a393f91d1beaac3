//! Link complexity: (Gromov norm, number of JSJ pieces) under the lexicographic order.

use std::cmp::Ordering;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CompanionshipGraph, Geometry, VolumeAtom};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const TOLERANCE_ENV: &str = "SPLICEKIT_TOLERANCE";

/// Absolute tolerance for norm equality; `SPLICEKIT_TOLERANCE` overrides the default once per process.
pub fn tolerance() -> f64 {
    static TOL: OnceLock<f64> = OnceLock::new();
    *TOL.get_or_init(|| {
        std::env::var(TOLERANCE_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|t| t.is_finite() && *t >= 0.0)
            .unwrap_or(DEFAULT_TOLERANCE)
    })
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComplexityError {
    #[error("bound {0} is negative")]
    BoundNegative(f64),
    #[error("atom set is empty")]
    NoAtoms,
    #[error("atom value {0} is not positive")]
    NonPositiveAtom(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GromovNorm {
    pub terms: Vec<VolumeAtom>,
    pub value: f64,
}

impl GromovNorm {
    pub fn from_terms(mut terms: Vec<VolumeAtom>) -> Self {
        terms.sort_by(|a, b| a.name.cmp(&b.name).then(a.value.total_cmp(&b.value)));
        let value = terms.iter().fold(0.0, |acc, t| acc + t.value);
        GromovNorm { terms, value }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Complexity {
    pub norm: GromovNorm,
    pub vertex_count: usize,
}

impl Complexity {
    pub fn value(&self) -> f64 {
        self.norm.value
    }

    pub fn pair(value: f64, vertex_count: usize) -> Self {
        Complexity { norm: GromovNorm { terms: Vec::new(), value }, vertex_count }
    }
}

impl std::fmt::Display for Complexity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({:.9}, {})", self.norm.value, self.vertex_count)
    }
}

/// Works for split graphs too: both coordinates are summed over all pieces.
pub fn complexity(graph: &CompanionshipGraph) -> Complexity {
    let terms = graph
        .vertices
        .iter()
        .filter_map(|v| match &v.geometry {
            Geometry::Hyperbolic(atom) => {
                Some(VolumeAtom { name: atom.clone(), value: graph.atom_value(atom).unwrap_or(0.0) })
            }
            Geometry::Seifert => None,
        })
        .collect();
    Complexity { norm: GromovNorm::from_terms(terms), vertex_count: graph.vertices.len() }
}

pub fn compare_with(a: &Complexity, b: &Complexity, tol: f64) -> Ordering {
    let d = a.norm.value - b.norm.value;
    if d.abs() <= tol {
        a.vertex_count.cmp(&b.vertex_count)
    } else if d < 0.0 {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

pub fn compare(a: &Complexity, b: &Complexity) -> Ordering {
    compare_with(a, b, tolerance())
}

/// Every value `sum a_i * atom_i <= bound` with natural coefficients, sorted, with near-equal values merged.
pub fn enumerate_norms(atoms: &[f64], bound: f64) -> Result<Vec<f64>, ComplexityError> {
    if !(bound >= 0.0) {
        return Err(ComplexityError::BoundNegative(bound));
    }
    if atoms.is_empty() {
        return Err(ComplexityError::NoAtoms);
    }
    if let Some(&a) = atoms.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
        return Err(ComplexityError::NonPositiveAtom(a));
    }
    let tol = tolerance();
    let mut values = Vec::new();
    fn go(atoms: &[f64], acc: f64, bound: f64, tol: f64, out: &mut Vec<f64>) {
        match atoms.split_first() {
            None => out.push(acc),
            Some((&a, rest)) => {
                // coefficient cap floor(bound / a), realized by the running sum check
                let mut k = 0.0;
                loop {
                    let s = acc + k * a;
                    if s > bound + tol {
                        break;
                    }
                    go(rest, s, bound, tol, out);
                    k += 1.0;
                }
            }
        }
    }
    go(atoms, 0.0, bound, tol, &mut values);
    values.sort_by(f64::total_cmp);
    let mut merged: Vec<f64> = Vec::with_capacity(values.len());
    for v in values {
        match merged.last() {
            Some(&last) if v - last <= tol => {}
            _ => merged.push(v),
        }
    }
    Ok(merged)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Descent {
    StabilizesAt(usize),
    StrictlyDecreasingThroughout,
    NotDecreasing,
}

pub fn descent_check(seq: &[Complexity]) -> Descent {
    let mut strict = true;
    for w in seq.windows(2) {
        match compare(&w[1], &w[0]) {
            Ordering::Greater => return Descent::NotDecreasing,
            Ordering::Equal => strict = false,
            Ordering::Less => {}
        }
    }
    if strict {
        return Descent::StrictlyDecreasingThroughout;
    }
    let mut i = seq.len() - 1;
    while i > 0 && compare(&seq[i - 1], &seq[i]) == Ordering::Equal {
        i -= 1;
    }
    Descent::StabilizesAt(i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Vertex;

    fn c(v: f64, n: usize) -> Complexity {
        Complexity::pair(v, n)
    }

    #[test]
    fn lexicographic_compare() {
        assert_eq!(compare(&c(0.0, 1), &c(0.0, 2)), Ordering::Less);
        assert_eq!(compare(&c(2.0299, 5), &c(3.6639, 1)), Ordering::Less);
        assert_eq!(compare(&c(2.029883213, 3), &c(2.029883213, 3)), Ordering::Equal);
        assert_eq!(compare(&c(1.0, 3), &c(1.0 + 5e-10, 2)), Ordering::Greater);
    }

    #[test]
    fn seifert_pieces_contribute_nothing() {
        let mut g = CompanionshipGraph::new();
        for id in ["a", "b", "c"] {
            g.add_vertex(Vertex::new(id, Geometry::Seifert));
        }
        let cx = complexity(&g);
        assert_eq!((cx.value(), cx.vertex_count), (0.0, 3));

        let mut g = CompanionshipGraph::new().with_atom("v41", 2.029883213);
        g.add_vertex(Vertex::new("f", Geometry::Hyperbolic("v41".into())));
        let cx = complexity(&g);
        assert_eq!((cx.value(), cx.vertex_count), (2.029883213, 1));
    }

    #[test]
    fn enumerate_small_cases() {
        assert_eq!(enumerate_norms(&[2.0], 5.0).unwrap(), vec![0.0, 2.0, 4.0]);
        assert_eq!(enumerate_norms(&[2.029883213], 2.0).unwrap(), vec![0.0]);
        assert_eq!(enumerate_norms(&[1.0, 1.0], 2.0).unwrap(), vec![0.0, 1.0, 2.0]);
        assert!(matches!(enumerate_norms(&[1.0], -1.0), Err(ComplexityError::BoundNegative(_))));
    }

    #[test]
    fn descent_examples() {
        assert_eq!(descent_check(&[c(3.0, 2), c(3.0, 2), c(3.0, 2)]), Descent::StabilizesAt(0));
        assert_eq!(
            descent_check(&[c(3.6639, 1), c(2.0299, 4), c(2.0299, 3), c(0.0, 1)]),
            Descent::StrictlyDecreasingThroughout
        );
        assert_eq!(descent_check(&[c(0.0, 1), c(0.0, 2)]), Descent::NotDecreasing);
        assert_eq!(descent_check(&[c(5.0, 1), c(3.0, 2), c(3.0, 2)]), Descent::StabilizesAt(1));
        assert_eq!(descent_check(&[]), Descent::StrictlyDecreasingThroughout);
    }
}
