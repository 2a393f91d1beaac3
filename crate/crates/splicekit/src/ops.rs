//! Cutting companionship graphs along edges and grafting them back together.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CompanionshipGraph, ComponentRef, Direction, EdgeId, Geometry, VertexId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OpsError {
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("graph is split")]
    SplitGraph,
    #[error("{0} is not an external component")]
    ComponentNotExternal(String),
    #[error("direction is inconsistent with the glued components: {0}")]
    DirectionInconsistent(String),
    #[error("id {0} occurs on both sides")]
    DuplicateId(String),
    #[error("atom {0} has different values on the two sides")]
    AtomConflict(String),
    #[error("external component {0} already exists")]
    NameCollision(String),
    #[error("vertex set does not induce a connected subgraph")]
    NotConnected,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutResult {
    pub side1: CompanionshipGraph,
    pub side2: CompanionshipGraph,
    pub cut_edge: EdgeId,
    /// Whether the cut edge pointed from side1 into side2.
    pub directed: bool,
    pub undirected_by_dc: BTreeSet<EdgeId>,
}

/// Orientation of a spliced edge relative to the argument order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpliceDirection {
    Undirected,
    FirstToSecond,
    SecondToFirst,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spliced {
    pub graph: CompanionshipGraph,
    pub edge: EdgeId,
    /// Both glued pieces are Seifert fibered; genuine JSJ pieces might merge here.
    pub both_hosts_seifert: bool,
}

/// The cut component replaces the edge component at `host`.
fn open_edge(side: &mut CompanionshipGraph, host: &str, edge: &str) {
    let v = side.vertex_mut(host).expect("endpoint is on this side");
    for c in v.components.iter_mut() {
        if *c == ComponentRef::Edge(edge.to_string()) {
            *c = ComponentRef::External(edge.to_string());
        }
    }
    v.winding.remove(edge);
}

/// Edges that lose their direction after cutting an edge whose head is `head`.
///
/// Approximation of the downward consequences: the directed edges reachable from the head
/// along directed paths. Traversal stops at an edge gluing a component known to be knotted,
/// since such an edge cannot become undirected.
pub fn downward_consequences(side: &CompanionshipGraph, head: &str) -> BTreeSet<EdgeId> {
    let mut out = BTreeSet::new();
    let mut queue = VecDeque::from([head.to_string()]);
    let mut seen = BTreeSet::from([head.to_string()]);
    while let Some(v) = queue.pop_front() {
        for e in side.edges.iter().filter(|e| e.tail() == Some(v.as_str())) {
            let to = e.head().expect("directed").to_string();
            let knotted = e.endpoints.iter().any(|x| {
                let vx = side.vertex(x).expect("endpoint");
                match (&vx.model, vx.position(&ComponentRef::Edge(e.id.clone()))) {
                    (Some(m), Some(i)) => m.unknotted(i) == Some(false),
                    _ => false,
                }
            });
            if knotted || !seen.insert(to.clone()) {
                continue;
            }
            out.insert(e.id.clone());
            queue.push_back(to);
        }
    }
    out
}

pub fn edge_cut(graph: &CompanionshipGraph, edge: &str) -> Result<CutResult, OpsError> {
    let e = graph.edge(edge).ok_or_else(|| OpsError::UnknownEdge(edge.to_string()))?.clone();
    if !graph.is_connected() {
        return Err(OpsError::SplitGraph);
    }
    if graph.externals().contains_key(edge) {
        return Err(OpsError::NameCollision(edge.to_string()));
    }
    let (a, b, directed) = match &e.direction {
        Direction::Directed { from, to } => (from.clone(), to.clone(), true),
        Direction::Undirected => (e.endpoints[0].clone(), e.endpoints[1].clone(), false),
    };
    let mut side1 = graph.induced(&graph.side_of(edge, &a));
    let mut side2 = graph.induced(&graph.side_of(edge, &b));
    open_edge(&mut side1, &a, edge);
    open_edge(&mut side2, &b, edge);
    let mut undirected_by_dc = BTreeSet::new();
    if directed {
        undirected_by_dc = downward_consequences(&side2, &b);
        for id in &undirected_by_dc {
            side2.edge_mut(id).expect("edge of side2").direction = Direction::Undirected;
        }
    }
    Ok(CutResult { side1, side2, cut_edge: edge.to_string(), directed, undirected_by_dc })
}

pub fn splice(
    side1: &CompanionshipGraph,
    comp1: &str,
    side2: &CompanionshipGraph,
    comp2: &str,
    direction: SpliceDirection,
) -> Result<Spliced, OpsError> {
    let host1 = side1.host_of(comp1).ok_or_else(|| OpsError::ComponentNotExternal(comp1.to_string()))?.clone();
    let host2 = side2.host_of(comp2).ok_or_else(|| OpsError::ComponentNotExternal(comp2.to_string()))?.clone();
    let edge_id = if comp1 == comp2 { comp1.to_string() } else { format!("{comp1}~{comp2}") };

    for v in &side2.vertices {
        if side1.vertex(&v.id).is_some() {
            return Err(OpsError::DuplicateId(v.id.clone()));
        }
    }
    for e in &side2.edges {
        if side1.edge(&e.id).is_some() {
            return Err(OpsError::DuplicateId(e.id.clone()));
        }
    }
    if side1.edge(&edge_id).is_some() || side2.edge(&edge_id).is_some() {
        return Err(OpsError::DuplicateId(edge_id));
    }
    let mut other_externals: BTreeSet<String> = side1.externals().into_keys().collect();
    other_externals.remove(comp1);
    for n in side2.externals().into_keys() {
        if n != comp2 && !other_externals.insert(n.clone()) {
            return Err(OpsError::DuplicateId(n));
        }
    }
    if other_externals.contains(&edge_id) {
        return Err(OpsError::NameCollision(edge_id));
    }

    let knotted = |host: &crate::graph::Vertex, comp: &str| {
        let i = host.position(&ComponentRef::External(comp.to_string())).expect("host carries comp");
        host.model.as_ref().and_then(|m| m.unknotted(i)) == Some(false)
    };
    let heads: Vec<(&crate::graph::Vertex, &str)> = match direction {
        SpliceDirection::Undirected => vec![(&host1, comp1), (&host2, comp2)],
        SpliceDirection::FirstToSecond => vec![(&host2, comp2)],
        SpliceDirection::SecondToFirst => vec![(&host1, comp1)],
    };
    for (h, c) in heads {
        if knotted(h, c) {
            return Err(OpsError::DirectionInconsistent(format!(
                "the edge points into {} whose component {} is knotted",
                h.id, c
            )));
        }
    }

    let mut g = side1.clone();
    for atom in &side2.atoms {
        match g.atom_value(&atom.name) {
            Some(v) if (v - atom.value).abs() > crate::complexity::tolerance() => {
                return Err(OpsError::AtomConflict(atom.name.clone()))
            }
            Some(_) => {}
            None => g.atoms.push(atom.clone()),
        }
    }
    g.vertices.extend(side2.vertices.iter().cloned());
    for (host, comp) in [(&host1.id, comp1), (&host2.id, comp2)] {
        let v = g.vertex_mut(host).expect("host present");
        for c in v.components.iter_mut() {
            if *c == ComponentRef::External(comp.to_string()) {
                *c = ComponentRef::Edge(edge_id.clone());
            }
        }
    }
    g.edges.extend(side2.edges.iter().cloned());
    let dir = match direction {
        SpliceDirection::Undirected => Direction::Undirected,
        SpliceDirection::FirstToSecond => Direction::Directed { from: host1.id.clone(), to: host2.id.clone() },
        SpliceDirection::SecondToFirst => Direction::Directed { from: host2.id.clone(), to: host1.id.clone() },
    };
    g.edges.push(crate::graph::Edge {
        id: edge_id.clone(),
        endpoints: [host1.id.clone(), host2.id.clone()],
        direction: dir,
    });
    let both_hosts_seifert = host1.geometry == Geometry::Seifert && host2.geometry == Geometry::Seifert;
    Ok(Spliced { graph: g.canonical(), edge: edge_id, both_hosts_seifert })
}

/// Splices the two sides of a cut back together and restores the directions the cut removed.
pub fn rejoin(cut: &CutResult) -> Result<CompanionshipGraph, OpsError> {
    let dir = if cut.directed { SpliceDirection::FirstToSecond } else { SpliceDirection::Undirected };
    let head = cut
        .side2
        .host_of(&cut.cut_edge)
        .ok_or_else(|| OpsError::ComponentNotExternal(cut.cut_edge.clone()))?
        .id
        .clone();
    let mut g = splice(&cut.side1, &cut.cut_edge, &cut.side2, &cut.cut_edge, dir)?.graph;
    // every removed direction pointed away from the head of the cut edge
    let mut depth: BTreeMap<VertexId, usize> = BTreeMap::from([(head.clone(), 0)]);
    let adj = cut.side2.adjacency();
    let mut queue = VecDeque::from([head]);
    while let Some(v) = queue.pop_front() {
        let d = depth[&v];
        for (_, w) in &adj[&v] {
            if !depth.contains_key(w) {
                depth.insert(w.clone(), d + 1);
                queue.push_back(w.clone());
            }
        }
    }
    for id in &cut.undirected_by_dc {
        let e = g.edge_mut(id).ok_or_else(|| OpsError::UnknownEdge(id.clone()))?;
        let [a, b] = e.endpoints.clone();
        let (from, to) = if depth[&a] < depth[&b] { (a, b) } else { (b, a) };
        e.direction = Direction::Directed { from, to };
    }
    Ok(g)
}

fn check_connected(graph: &CompanionshipGraph, subtree: &BTreeSet<VertexId>) -> Result<(), OpsError> {
    for v in subtree {
        if graph.vertex(v).is_none() {
            return Err(OpsError::UnknownVertex(v.clone()));
        }
    }
    let Some(start) = subtree.iter().next() else { return Err(OpsError::NotConnected) };
    let outside: BTreeSet<EdgeId> = graph
        .edges
        .iter()
        .filter(|e| !(subtree.contains(&e.endpoints[0]) && subtree.contains(&e.endpoints[1])))
        .map(|e| e.id.clone())
        .collect();
    let reached = graph.reach(start, &outside);
    if reached != *subtree {
        return Err(OpsError::NotConnected);
    }
    Ok(())
}

/// Edges with exactly one endpoint in `subtree`, sorted by id.
pub fn boundary_edges(graph: &CompanionshipGraph, subtree: &BTreeSet<VertexId>) -> Vec<EdgeId> {
    graph
        .edges
        .iter()
        .filter(|e| subtree.contains(&e.endpoints[0]) != subtree.contains(&e.endpoints[1]))
        .map(|e| e.id.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Cuts every boundary edge of `subtree` in id order. Returns the graph of the subtree and
/// the cut performed at each boundary edge.
pub fn subtree_cut(
    graph: &CompanionshipGraph,
    subtree: &BTreeSet<VertexId>,
) -> Result<(CompanionshipGraph, Vec<CutResult>), OpsError> {
    check_connected(graph, subtree)?;
    let anchor = subtree.iter().next().expect("nonempty").clone();
    let mut current = graph.clone().canonical();
    let mut cuts = Vec::new();
    for e in boundary_edges(graph, subtree) {
        let cut = edge_cut(&current, &e)?;
        current = if cut.side1.vertex(&anchor).is_some() { cut.side1.clone() } else { cut.side2.clone() };
        cuts.push(cut);
    }
    Ok((current, cuts))
}

/// The piece of a cut that does not contain `anchor`.
pub fn outer_side<'a>(cut: &'a CutResult, anchor: &str) -> &'a CompanionshipGraph {
    if cut.side1.vertex(anchor).is_some() {
        &cut.side2
    } else {
        &cut.side1
    }
}

/// True iff every boundary edge of `subtree` is directed into it.
pub fn deduce_unlink(graph: &CompanionshipGraph, subtree: &BTreeSet<VertexId>) -> Result<bool, OpsError> {
    check_connected(graph, subtree)?;
    Ok(boundary_edges(graph, subtree).iter().all(|id| {
        let e = graph.edge(id).expect("boundary edge");
        matches!(e.head(), Some(h) if subtree.contains(h))
    }))
}
