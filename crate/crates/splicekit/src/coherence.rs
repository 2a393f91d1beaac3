//! Coherent and incoherent fixed edges, the maximal coherent subtree, and structure decisions.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{root_of, CompanionshipGraph, EdgeId, GraphError, VertexId, Violation};
use crate::symmetry::{check_valid, AmphichiralAction, Sign, SymmetryError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoherenceError {
    #[error("invalid action: {0:?}")]
    InvalidAction(Vec<Violation>),
    #[error("not a knot graph: {0}")]
    NotAKnotGraph(String),
    #[error("no winding number stored for fixed edge {0}")]
    MissingWindingData(EdgeId),
}

impl From<SymmetryError> for CoherenceError {
    fn from(e: SymmetryError) -> Self {
        match e {
            SymmetryError::InvalidAction(v) => CoherenceError::InvalidAction(v),
            other => CoherenceError::InvalidAction(vec![Violation {
                rule: crate::graph::Rule::Permutation,
                subject: "action".into(),
                message: other.to_string(),
            }]),
        }
    }
}

impl From<GraphError> for CoherenceError {
    fn from(e: GraphError) -> Self {
        CoherenceError::NotAKnotGraph(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeClass {
    CoherentlyDirected,
    IncoherentlyDirected,
    UndirectedFixed,
    NotFixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexClass {
    Coherent,
    Incoherent,
    Mixed,
    NotFixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Structure {
    TotallyCoherent,
    ProperlyIncoherent,
    Neither,
}

/// Class of one edge; assumes the action is valid on the graph.
pub fn edge_class(graph: &CompanionshipGraph, action: &AmphichiralAction, edge: &str) -> EdgeClass {
    let e = graph.edge(edge).expect("known edge");
    if !action.edge_fixed(edge) {
        return EdgeClass::NotFixed;
    }
    match e.head() {
        None => EdgeClass::UndirectedFixed,
        Some(head) => match action.sign_at(edge, head) {
            Some(Sign::Plus) => EdgeClass::CoherentlyDirected,
            _ => EdgeClass::IncoherentlyDirected,
        },
    }
}

pub(crate) fn edge_classes(graph: &CompanionshipGraph, action: &AmphichiralAction) -> BTreeMap<EdgeId, EdgeClass> {
    graph.edges.iter().map(|e| (e.id.clone(), edge_class(graph, action, &e.id))).collect()
}

pub fn classify_edges(
    graph: &CompanionshipGraph,
    action: &AmphichiralAction,
) -> Result<BTreeMap<EdgeId, EdgeClass>, CoherenceError> {
    check_valid(graph, action)?;
    Ok(edge_classes(graph, action))
}

/// Class of `v` counting only incident fixed edges other than `skip`.
pub(crate) fn vertex_class_skipping(
    graph: &CompanionshipGraph,
    action: &AmphichiralAction,
    v: &str,
    skip: Option<&str>,
) -> VertexClass {
    if !action.vertex_fixed(v) {
        return VertexClass::NotFixed;
    }
    let classes: Vec<EdgeClass> = graph
        .incident_edges(v)
        .into_iter()
        .filter(|e| Some(e.id.as_str()) != skip)
        .map(|e| edge_class(graph, action, &e.id))
        .filter(|c| *c != EdgeClass::NotFixed)
        .collect();
    if classes.iter().all(|c| *c == EdgeClass::CoherentlyDirected) {
        VertexClass::Coherent
    } else if classes.iter().all(|c| *c == EdgeClass::IncoherentlyDirected) {
        VertexClass::Incoherent
    } else {
        VertexClass::Mixed
    }
}

pub(crate) fn vertex_classes(
    graph: &CompanionshipGraph,
    action: &AmphichiralAction,
) -> BTreeMap<VertexId, VertexClass> {
    graph.vertices.iter().map(|v| (v.id.clone(), vertex_class_skipping(graph, action, &v.id, None))).collect()
}

pub fn classify_vertices(
    graph: &CompanionshipGraph,
    action: &AmphichiralAction,
) -> Result<BTreeMap<VertexId, VertexClass>, CoherenceError> {
    check_valid(graph, action)?;
    Ok(vertex_classes(graph, action))
}

pub(crate) fn max_subtree_unchecked(
    graph: &CompanionshipGraph,
    action: &AmphichiralAction,
    root: &str,
) -> BTreeSet<VertexId> {
    let classes = vertex_classes(graph, action);
    let admit = |v: &str| matches!(classes.get(v), Some(VertexClass::Coherent) | Some(VertexClass::NotFixed));
    let mut out = BTreeSet::new();
    if classes.get(root) != Some(&VertexClass::Coherent) {
        return out;
    }
    let adj = graph.adjacency();
    let mut queue = VecDeque::from([root.to_string()]);
    out.insert(root.to_string());
    while let Some(v) = queue.pop_front() {
        for (_, w) in &adj[&v] {
            if admit(w) && out.insert(w.clone()) {
                queue.push_back(w.clone());
            }
        }
    }
    out
}

pub fn maximal_coherent_subtree(
    graph: &CompanionshipGraph,
    action: &AmphichiralAction,
) -> Result<BTreeSet<VertexId>, CoherenceError> {
    let root = root_of(graph)?;
    check_valid(graph, action)?;
    Ok(max_subtree_unchecked(graph, action, &root))
}

/// A component of the complement of the maximal coherent subtree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Piece {
    pub root: VertexId,
    /// Edge joining the piece to the maximal coherent subtree.
    pub joining_edge: Option<EdgeId>,
    pub vertices: BTreeSet<VertexId>,
    pub root_class: VertexClass,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureDecision {
    pub structure: Structure,
    pub root: VertexId,
    pub g_max: BTreeSet<VertexId>,
    pub pieces: Vec<Piece>,
}

pub(crate) fn decide_unchecked(
    graph: &CompanionshipGraph,
    action: &AmphichiralAction,
    root: &str,
) -> StructureDecision {
    let g_max = max_subtree_unchecked(graph, action, root);
    if g_max.len() == graph.vertices.len() {
        return StructureDecision { structure: Structure::TotallyCoherent, root: root.into(), g_max, pieces: vec![] };
    }
    if g_max.is_empty() {
        let class = vertex_class_skipping(graph, action, root, None);
        let structure =
            if class == VertexClass::Incoherent { Structure::ProperlyIncoherent } else { Structure::Neither };
        let piece = Piece { root: root.into(), joining_edge: None, vertices: graph.vertex_ids(), root_class: class };
        return StructureDecision { structure, root: root.into(), g_max, pieces: vec![piece] };
    }
    let mut pieces = Vec::new();
    for e in &graph.edges {
        let [a, b] = &e.endpoints;
        let outside = match (g_max.contains(a), g_max.contains(b)) {
            (true, false) => b,
            (false, true) => a,
            _ => continue,
        };
        let vertices = graph.side_of(&e.id, outside);
        let root_class = vertex_class_skipping(graph, action, outside, Some(&e.id));
        pieces.push(Piece { root: outside.clone(), joining_edge: Some(e.id.clone()), vertices, root_class });
    }
    pieces.sort_by(|x, y| x.root.cmp(&y.root));
    let structure = if pieces.iter().all(|p| p.root_class == VertexClass::Incoherent) {
        Structure::ProperlyIncoherent
    } else {
        Structure::Neither
    };
    StructureDecision { structure, root: root.into(), g_max, pieces }
}

pub fn decide_structure(
    graph: &CompanionshipGraph,
    action: &AmphichiralAction,
) -> Result<StructureDecision, CoherenceError> {
    let root = root_of(graph)?;
    check_valid(graph, action)?;
    Ok(decide_unchecked(graph, action, &root))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    /// Incoherent fixed edges whose pattern winds a nonzero number of times.
    pub contradictions: Vec<EdgeId>,
    /// Fixed edges with winding 0 although the knot is declared fibered.
    pub zero_winding: Vec<EdgeId>,
    pub consistent: bool,
    pub structure: Structure,
}

/// Winding is read from the head of each fixed edge, falling back to its tail.
pub fn check_fibered_consistency(
    graph: &CompanionshipGraph,
    action: &AmphichiralAction,
    fibered: bool,
) -> Result<ConsistencyReport, CoherenceError> {
    let root = root_of(graph)?;
    check_valid(graph, action)?;
    let mut contradictions = Vec::new();
    let mut zero_winding = Vec::new();
    for e in &graph.edges {
        if !action.edge_fixed(&e.id) {
            continue;
        }
        let lookup = |v: Option<&str>| v.and_then(|v| graph.vertex(v)).and_then(|x| x.winding.get(&e.id)).copied();
        let w = lookup(e.head())
            .or_else(|| lookup(e.tail()))
            .ok_or_else(|| CoherenceError::MissingWindingData(e.id.clone()))?;
        let class = edge_class(graph, action, &e.id);
        if w != 0 && class == EdgeClass::IncoherentlyDirected {
            contradictions.push(e.id.clone());
        }
        if fibered && w == 0 {
            zero_winding.push(e.id.clone());
        }
    }
    let structure = decide_unchecked(graph, action, &root).structure;
    let consistent = contradictions.is_empty() && zero_winding.is_empty();
    Ok(ConsistencyReport { contradictions, zero_winding, consistent, structure })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Geometry, Vertex};

    /// r <- a <- b, identity action, signs chosen per edge.
    fn path(coherent_ra: bool, coherent_ab: bool) -> (CompanionshipGraph, AmphichiralAction) {
        let mut g = CompanionshipGraph::new();
        for v in ["r", "a", "b"] {
            g.add_vertex(Vertex::new(v, Geometry::Seifert));
        }
        g.add_external("r", "K");
        g.directed("ra", "a", "r").directed("ab", "b", "a");
        let s = |c: bool| if c { Sign::Plus } else { Sign::Minus };
        let act = AmphichiralAction::identity()
            .with_external("K", Sign::Minus)
            .with_signs("ra", ("r", s(coherent_ra)), ("a", s(coherent_ra).flip()))
            .with_signs("ab", ("a", s(coherent_ab)), ("b", s(coherent_ab).flip()));
        (g, act)
    }

    #[test]
    fn classes_and_structures() {
        let (g, a) = path(true, true);
        assert_eq!(decide_structure(&g, &a).unwrap().structure, Structure::TotallyCoherent);
        let (g, a) = path(false, true);
        assert!(maximal_coherent_subtree(&g, &a).unwrap().is_empty());
        assert_eq!(classify_vertices(&g, &a).unwrap()["r"], VertexClass::Incoherent);
        assert_eq!(decide_structure(&g, &a).unwrap().structure, Structure::ProperlyIncoherent);
        let (g, a) = path(true, false);
        let d = decide_structure(&g, &a).unwrap();
        assert_eq!(d.g_max, BTreeSet::from(["r".to_string()]));
        // a is mixed in the whole graph but incoherent as the root of its piece
        assert_eq!(classify_vertices(&g, &a).unwrap()["a"], VertexClass::Mixed);
        assert_eq!(d.pieces[0].root_class, VertexClass::Incoherent);
        assert_eq!(d.structure, Structure::ProperlyIncoherent);
        assert_eq!(classify_edges(&g, &a).unwrap()["ab"], EdgeClass::IncoherentlyDirected);
    }

    #[test]
    fn winding_checks() {
        let (mut g, a) = path(true, false);
        assert_eq!(check_fibered_consistency(&g, &a, false), Err(CoherenceError::MissingWindingData("ra".into())));
        g.vertex_mut("a").unwrap().winding.insert("ab".into(), 5);
        g.vertex_mut("r").unwrap().winding.insert("ra".into(), 1);
        let rep = check_fibered_consistency(&g, &a, false).unwrap();
        assert_eq!(rep.contradictions, vec!["ab".to_string()]);
        g.vertex_mut("a").unwrap().winding.insert("ab".into(), 0);
        assert!(check_fibered_consistency(&g, &a, false).unwrap().consistent);
        assert_eq!(check_fibered_consistency(&g, &a, true).unwrap().zero_winding, vec!["ab".to_string()]);
    }
}
