//! Amphichiral maps as sign-decorated automorphisms of companionship graphs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::complexity::tolerance;
use crate::graph::{
    validate, CompanionshipGraph, ComponentRef, Direction, EdgeId, Geometry, ModelLink, Rule, ValidationReport, Vertex,
    VertexId, Violation,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Minus => -1,
            Sign::Plus => 1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Minus => Sign::Plus,
            Sign::Plus => Sign::Minus,
        }
    }

    pub fn from_value(v: i64) -> Option<Sign> {
        match v {
            -1 => Some(Sign::Minus),
            1 => Some(Sign::Plus),
            _ => None,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if *self == Sign::Plus { "+1" } else { "-1" })
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i8(self.value())
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = i64::deserialize(d)?;
        Sign::from_value(v).ok_or_else(|| serde::de::Error::custom(format!("sign must be -1 or +1, got {v}")))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymmetryError {
    #[error("invalid action: {}", summarize(.0))]
    InvalidAction(Vec<Violation>),
    #[error("signs on edge {0} do not multiply to -1")]
    SignProductViolation(EdgeId),
    #[error("edge {0} needs signs at both endpoints")]
    IncompleteAnnotation(EdgeId),
    #[error("edge {0} is not an unsigned fixed edge")]
    UnexpectedAnnotation(EdgeId),
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("malformed action document: {0}")]
    Json(String),
}

fn summarize(v: &[Violation]) -> String {
    v.iter().map(|x| format!("{}: {}", x.subject, x.message)).collect::<Vec<_>>().join("; ")
}

/// Vertex and edge ids missing from the permutation maps are fixed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmphichiralAction {
    #[serde(default)]
    pub vertex_perm: BTreeMap<VertexId, VertexId>,
    #[serde(default)]
    pub edge_perm: BTreeMap<EdgeId, EdgeId>,
    #[serde(default)]
    pub edge_signs: BTreeMap<EdgeId, BTreeMap<VertexId, Sign>>,
    #[serde(default)]
    pub external_signs: BTreeMap<String, Sign>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub local_orders: BTreeMap<VertexId, u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PQType {
    pub p: usize,
    pub q: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrbitItems {
    Vertices,
    Edges,
    ComponentsOf(VertexId),
}

fn lcm(a: u64, b: u64) -> u64 {
    let g = crate::graph::gcd(a as i64, b as i64) as u64;
    if g == 0 {
        0
    } else {
        a / g * b
    }
}

pub(crate) fn odd_part(mut n: u64) -> u64 {
    if n == 0 {
        return 1;
    }
    while n.is_multiple_of(2) {
        n /= 2;
    }
    n
}

fn cycles_of(ids: &BTreeSet<String>, image: impl Fn(&str) -> String) -> Vec<Vec<String>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for start in ids {
        if seen.contains(start) {
            continue;
        }
        let mut cycle = vec![start.clone()];
        seen.insert(start.clone());
        let mut cur = image(start);
        while &cur != start && ids.contains(&cur) && seen.insert(cur.clone()) {
            cycle.push(cur.clone());
            cur = image(&cur);
        }
        out.push(cycle);
    }
    out
}

impl AmphichiralAction {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn from_json(s: &str) -> Result<Self, SymmetryError> {
        serde_json::from_str(s).map_err(|e| SymmetryError::Json(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("action serializes")
    }

    pub fn v(&self, v: &str) -> String {
        self.vertex_perm.get(v).cloned().unwrap_or_else(|| v.to_string())
    }

    pub fn e(&self, e: &str) -> String {
        self.edge_perm.get(e).cloned().unwrap_or_else(|| e.to_string())
    }

    pub fn vertex_fixed(&self, v: &str) -> bool {
        self.v(v) == v
    }

    pub fn edge_fixed(&self, e: &str) -> bool {
        self.e(e) == e
    }

    pub fn with_signs(mut self, edge: &str, a: (&str, Sign), b: (&str, Sign)) -> Self {
        self.edge_signs.insert(edge.into(), BTreeMap::from([(a.0.into(), a.1), (b.0.into(), b.1)]));
        self
    }

    pub fn with_external(mut self, name: &str, s: Sign) -> Self {
        self.external_signs.insert(name.into(), s);
        self
    }

    pub fn sign_at(&self, edge: &str, vertex: &str) -> Option<Sign> {
        self.edge_signs.get(edge).and_then(|m| m.get(vertex)).copied()
    }

    pub fn fixed_vertices(&self, g: &CompanionshipGraph) -> BTreeSet<VertexId> {
        g.vertices.iter().filter(|v| self.vertex_fixed(&v.id)).map(|v| v.id.clone()).collect()
    }

    pub fn fixed_edges(&self, g: &CompanionshipGraph) -> BTreeSet<EdgeId> {
        g.edges.iter().filter(|e| self.edge_fixed(&e.id)).map(|e| e.id.clone()).collect()
    }

    pub fn pq(&self, g: &CompanionshipGraph) -> PQType {
        let mut pq = PQType { p: 0, q: 0 };
        for name in g.externals().keys() {
            match self.external_signs.get(name) {
                Some(Sign::Minus) => pq.p += 1,
                Some(Sign::Plus) => pq.q += 1,
                None => {}
            }
        }
        pq
    }

    /// Image of a component of `vertex` under the action; it lives at the image vertex.
    pub fn component_image(&self, c: &ComponentRef) -> ComponentRef {
        match c {
            ComponentRef::External(n) => ComponentRef::External(n.clone()),
            ComponentRef::Edge(e) => ComponentRef::Edge(self.e(e)),
        }
    }

    /// Orientation sign of a component at a fixed vertex, when the action fixes that component.
    pub fn component_sign(&self, vertex: &str, c: &ComponentRef) -> Option<Sign> {
        match c {
            ComponentRef::External(n) => self.external_signs.get(n).copied(),
            ComponentRef::Edge(e) if self.edge_fixed(e) => self.sign_at(e, vertex),
            ComponentRef::Edge(_) => None,
        }
    }

    /// Order of the induced permutation of vertices and edges of `g`.
    pub fn permutation_order(&self, g: &CompanionshipGraph) -> u64 {
        let mut order = 1;
        for c in cycles_of(&g.vertex_ids(), |v| self.v(v)).into_iter().chain(cycles_of(&g.edge_ids(), |e| self.e(e))) {
            order = lcm(order, c.len() as u64);
        }
        order
    }

    /// Permutation order and declared local orders are all powers of two.
    pub fn is_reduced(&self, g: &CompanionshipGraph) -> bool {
        self.permutation_order(g).is_power_of_two() && self.local_orders.values().all(|o| o.is_power_of_two())
    }

    /// The `k`-th power of the permutations. Signs are kept on edges that were already fixed.
    pub fn power(&self, g: &CompanionshipGraph, k: u64) -> AmphichiralAction {
        let iterate = |start: &str, f: &dyn Fn(&str) -> String| {
            let mut cur = start.to_string();
            for _ in 0..k {
                cur = f(&cur);
            }
            cur
        };
        let vertex_perm = g
            .vertex_ids()
            .into_iter()
            .filter_map(|v| {
                let w = iterate(&v, &|x| self.v(x));
                (w != v).then_some((v, w))
            })
            .collect();
        let edge_perm = g
            .edge_ids()
            .into_iter()
            .filter_map(|e| {
                let f = iterate(&e, &|x| self.e(x));
                (f != e).then_some((e, f))
            })
            .collect();
        let edge_signs =
            self.edge_signs.iter().filter(|(e, _)| self.edge_fixed(e)).map(|(e, s)| (e.clone(), s.clone())).collect();
        let local_orders = self
            .local_orders
            .iter()
            .map(|(v, o)| {
                let g = crate::graph::gcd(*o as i64, k as i64).max(1) as u64;
                (v.clone(), o / g)
            })
            .collect();
        AmphichiralAction {
            vertex_perm,
            edge_perm,
            edge_signs,
            external_signs: self.external_signs.clone(),
            local_orders,
        }
    }

    /// Drops entries that do not refer to `g`; missing external signs are taken from `extra`.
    pub fn restricted_to(&self, g: &CompanionshipGraph, extra: &BTreeMap<String, Sign>) -> AmphichiralAction {
        let vids = g.vertex_ids();
        let eids = g.edge_ids();
        let externals = g.externals();
        AmphichiralAction {
            vertex_perm: self
                .vertex_perm
                .iter()
                .filter(|(k, _)| vids.contains(*k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
            edge_perm: self
                .edge_perm
                .iter()
                .filter(|(k, _)| eids.contains(*k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
            edge_signs: self
                .edge_signs
                .iter()
                .filter(|(k, _)| eids.contains(*k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
            external_signs: externals
                .keys()
                .filter_map(|n| extra.get(n).or_else(|| self.external_signs.get(n)).map(|s| (n.clone(), *s)))
                .collect(),
            local_orders: self
                .local_orders
                .iter()
                .filter(|(k, _)| vids.contains(*k))
                .map(|(k, v)| (k.clone(), *v))
                .collect(),
        }
    }
}

/// Checks the action against the graph; graph violations are reported first.
pub fn validate_action(graph: &CompanionshipGraph, action: &AmphichiralAction) -> ValidationReport {
    let mut r = validate(graph);
    if !r.is_valid() {
        return r;
    }
    let vids = graph.vertex_ids();
    let eids = graph.edge_ids();

    for (k, v) in &action.vertex_perm {
        if !vids.contains(k) || !vids.contains(v) {
            r.push(Rule::Permutation, k, format!("vertex map {k}->{v} leaves the graph"));
        }
    }
    for (k, v) in &action.edge_perm {
        if !eids.contains(k) || !eids.contains(v) {
            r.push(Rule::Permutation, k, format!("edge map {k}->{v} leaves the graph"));
        }
    }
    let vimg: BTreeSet<String> = vids.iter().map(|v| action.v(v)).collect();
    let eimg: BTreeSet<String> = eids.iter().map(|e| action.e(e)).collect();
    if vimg.len() != vids.len() {
        r.push(Rule::Permutation, "vertex_perm", "vertex map is not injective");
    }
    if eimg.len() != eids.len() {
        r.push(Rule::Permutation, "edge_perm", "edge map is not injective");
    }
    if r.has(Rule::Permutation) {
        return r;
    }

    for e in &graph.edges {
        let f = graph.edge(&action.e(&e.id)).expect("permutation checked");
        let img: BTreeSet<String> = e.endpoints.iter().map(|v| action.v(v)).collect();
        let target: BTreeSet<String> = f.endpoints.iter().cloned().collect();
        if img != target {
            r.push(Rule::Incidence, &e.id, format!("endpoints do not map onto those of {}", f.id));
            continue;
        }
        let preserved = match (&e.direction, &f.direction) {
            (Direction::Undirected, Direction::Undirected) => true,
            (Direction::Directed { from, to }, Direction::Directed { from: f2, to: t2 }) => {
                &action.v(from) == f2 && &action.v(to) == t2
            }
            _ => false,
        };
        if !preserved {
            r.push(Rule::DirectionPreserved, &e.id, format!("direction is not carried to that of {}", f.id));
        }
    }

    let externals = graph.externals();
    for (name, host) in &externals {
        if !action.external_signs.contains_key(name) {
            r.push(Rule::ExternalSign, name, "external component has no sign");
        }
        if !action.vertex_fixed(host) {
            r.push(Rule::ExternalVertexFixed, host, format!("carries {name} but is moved"));
        }
    }
    for name in action.external_signs.keys() {
        if !externals.contains_key(name) {
            r.push(Rule::ExternalSign, name, "sign given for an unknown external component");
        }
    }

    let fixed_edges = action.fixed_edges(graph);
    let fixed_vertices = action.fixed_vertices(graph);
    for eid in &fixed_edges {
        let e = graph.edge(eid).expect("known edge");
        for v in &e.endpoints {
            if !action.vertex_fixed(v) {
                r.push(Rule::FixedEdgeEndpoints, eid, format!("fixed edge has moved endpoint {v}"));
            }
        }
        match action.edge_signs.get(eid) {
            None => r.push(Rule::SignAnnotation, eid, "fixed edge carries no signs"),
            Some(m) => {
                let keys: BTreeSet<&String> = m.keys().collect();
                let ends: BTreeSet<&String> = e.endpoints.iter().collect();
                if keys != ends {
                    r.push(Rule::SignAnnotation, eid, "signs must be given at exactly the two endpoints");
                } else {
                    let prod: i8 = m.values().map(|s| s.value()).product();
                    if prod != -1 {
                        r.push(Rule::SignProduct, eid, format!("endpoint signs multiply to {prod}"));
                    }
                }
            }
        }
    }
    for eid in action.edge_signs.keys() {
        if !fixed_edges.contains(eid) {
            r.push(Rule::SignAnnotation, eid, "signs given on an edge that is not fixed");
        }
    }

    if fixed_edges.is_empty() {
        let hosts: BTreeSet<VertexId> = externals.values().cloned().collect();
        let ok = fixed_vertices.len() == 1 && hosts.iter().all(|h| fixed_vertices.contains(h));
        if !ok {
            r.push(
                Rule::UniqueFixedVertex,
                "action",
                format!("no edge is fixed but the fixed vertices are {:?}", fixed_vertices),
            );
        }
    }

    for (v, o) in &action.local_orders {
        match graph.vertex(v) {
            None => r.push(Rule::LocalOrder, v, "unknown vertex"),
            Some(x) => {
                if !x.geometry.is_hyperbolic() || !action.vertex_fixed(v) {
                    r.push(Rule::LocalOrder, v, "local order declared on a vertex that is not fixed and hyperbolic");
                }
                if *o == 0 {
                    r.push(Rule::LocalOrder, v, "local order must be positive");
                }
            }
        }
    }

    for v in &graph.vertices {
        let w = graph.vertex(&action.v(&v.id)).expect("permutation checked");
        check_mirror(graph, v, w, &mut r);
        if action.vertex_fixed(&v.id) {
            check_linking_zero(v, action, &mut r);
        }
    }
    r
}

fn check_mirror(graph: &CompanionshipGraph, v: &Vertex, w: &Vertex, r: &mut ValidationReport) {
    match (&v.geometry, &w.geometry) {
        (Geometry::Seifert, Geometry::Seifert) => {}
        (Geometry::Hyperbolic(a), Geometry::Hyperbolic(b)) => {
            let (x, y) = (graph.atom_value(a).unwrap_or(0.0), graph.atom_value(b).unwrap_or(0.0));
            if (x - y).abs() > tolerance() {
                r.push(Rule::MirrorLabel, &v.id, format!("volume differs from that of its image {}", w.id));
            }
        }
        _ => r.push(Rule::MirrorLabel, &v.id, format!("geometry differs from that of its image {}", w.id)),
    }
    let (Some(mv), Some(mw)) = (&v.model, &w.model) else { return };
    if v.id != w.id {
        if !mw.same_link(&mv.mirror()) {
            r.push(Rule::MirrorLabel, &v.id, format!("model of {} is not the mirror of this model", w.id));
        }
    } else if mv.amphichiral() == Some(false) {
        match mv {
            ModelLink::Named(_) => r.push(Rule::MirrorLabel, &v.id, "fixed vertex carries a model annotated as chiral"),
            _ => r
                .notes
                .push(format!("{} is fixed but its model is chiral; the action is not realizable as stated", v.id)),
        }
    }
}

fn check_linking_zero(v: &Vertex, action: &AmphichiralAction, r: &mut ValidationReport) {
    let Some(model) = &v.model else { return };
    let reversed: Vec<usize> = v
        .components
        .iter()
        .enumerate()
        .filter(|(_, c)| action.component_sign(&v.id, c) == Some(Sign::Minus))
        .map(|(i, _)| i)
        .collect();
    for (a, &i) in reversed.iter().enumerate() {
        for &j in &reversed[a + 1..] {
            if let Some(lk) = model.linking(i, j) {
                if lk != 0 {
                    r.push(
                        Rule::LinkingZero,
                        &v.id,
                        format!("{} and {} are both reversed but link {} times", v.components[i], v.components[j], lk),
                    );
                }
            }
        }
    }
}

pub fn check_valid(graph: &CompanionshipGraph, action: &AmphichiralAction) -> Result<(), SymmetryError> {
    let r = validate_action(graph, action);
    if r.is_valid() {
        Ok(())
    } else {
        Err(SymmetryError::InvalidAction(r.violations))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reduction {
    pub action: AmphichiralAction,
    pub exponent: u64,
    pub newly_fixed_edges: BTreeSet<EdgeId>,
}

/// Raises the action to the odd part of its order so every order becomes a power of two.
pub fn reduce(graph: &CompanionshipGraph, action: &AmphichiralAction) -> Result<Reduction, SymmetryError> {
    check_valid(graph, action)?;
    let mut order = action.permutation_order(graph);
    for o in action.local_orders.values() {
        order = lcm(order, *o);
    }
    let m = odd_part(order);
    let reduced = if m == 1 { action.clone() } else { action.power(graph, m) };
    let before = action.fixed_edges(graph);
    let newly_fixed_edges = reduced.fixed_edges(graph).difference(&before).cloned().collect();
    Ok(Reduction { action: reduced, exponent: m, newly_fixed_edges })
}

/// Supplies signs for fixed edges that have none, then revalidates.
pub fn annotate_signs(
    graph: &CompanionshipGraph,
    action: &AmphichiralAction,
    signs: &BTreeMap<EdgeId, BTreeMap<VertexId, Sign>>,
) -> Result<AmphichiralAction, SymmetryError> {
    let unsigned: BTreeSet<EdgeId> =
        action.fixed_edges(graph).into_iter().filter(|e| !action.edge_signs.contains_key(e)).collect();
    for e in signs.keys() {
        if !unsigned.contains(e) {
            return Err(SymmetryError::UnexpectedAnnotation(e.clone()));
        }
    }
    let mut out = action.clone();
    for e in &unsigned {
        let edge = graph.edge(e).expect("fixed edge of the graph");
        let m = signs.get(e).ok_or_else(|| SymmetryError::IncompleteAnnotation(e.clone()))?;
        let ends: BTreeSet<&String> = edge.endpoints.iter().collect();
        if m.keys().collect::<BTreeSet<_>>() != ends {
            return Err(SymmetryError::IncompleteAnnotation(e.clone()));
        }
        if m.values().map(|s| s.value()).product::<i8>() != -1 {
            return Err(SymmetryError::SignProductViolation(e.clone()));
        }
        out.edge_signs.insert(e.clone(), m.clone());
    }
    check_valid(graph, &out)?;
    Ok(out)
}

/// Cycles of the relevant permutation, each starting at its least element.
/// For a moved vertex, components are permuted by the first-return power of the action.
pub fn orbits(
    graph: &CompanionshipGraph,
    action: &AmphichiralAction,
    items: &OrbitItems,
) -> Result<Vec<Vec<String>>, SymmetryError> {
    Ok(match items {
        OrbitItems::Vertices => cycles_of(&graph.vertex_ids(), |v| action.v(v)),
        OrbitItems::Edges => cycles_of(&graph.edge_ids(), |e| action.e(e)),
        OrbitItems::ComponentsOf(v) => {
            let vertex = graph.vertex(v).ok_or_else(|| SymmetryError::UnknownVertex(v.clone()))?;
            let k = cycles_of(&graph.vertex_ids(), |x| action.v(x))
                .into_iter()
                .find(|c| c.contains(v))
                .map(|c| c.len())
                .unwrap_or(1);
            let names: BTreeSet<String> = vertex.components.iter().map(|c| c.name().to_string()).collect();
            let step = |c: &str| -> String {
                let mut cur = c.to_string();
                for _ in 0..k {
                    if graph.edge(&cur).is_some() {
                        cur = action.e(&cur);
                    }
                }
                cur
            };
            cycles_of(&names, step)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Vertex;

    fn star(children: usize) -> CompanionshipGraph {
        let mut g = CompanionshipGraph::new();
        g.add_vertex(Vertex::new("r", Geometry::Seifert)).add_external("r", "K");
        for i in 0..children {
            let c = format!("c{i}");
            g.add_vertex(Vertex::new(&c, Geometry::Seifert));
            g.directed(&format!("e{i}"), &c, "r");
        }
        g
    }

    fn coherent_identity(g: &CompanionshipGraph) -> AmphichiralAction {
        let mut a = AmphichiralAction::identity().with_external("K", Sign::Minus);
        for e in &g.edges {
            a = a.with_signs(&e.id, (e.head().unwrap(), Sign::Plus), (e.tail().unwrap(), Sign::Minus));
        }
        a
    }

    #[test]
    fn identity_with_coherent_signs_is_valid() {
        let g = star(3);
        let r = validate_action(&g, &coherent_identity(&g));
        assert!(r.is_valid(), "{:?}", r.violations);
    }

    #[test]
    fn equal_signs_on_a_fixed_edge_are_rejected() {
        let g = star(1);
        let a = AmphichiralAction::identity().with_external("K", Sign::Minus).with_signs(
            "e0",
            ("r", Sign::Plus),
            ("c0", Sign::Plus),
        );
        assert!(validate_action(&g, &a).has(Rule::SignProduct));
    }

    #[test]
    fn no_fixed_edge_needs_a_unique_fixed_vertex() {
        // path c0 - r - c1 with both edges swapped but every vertex fixed
        let g = star(2);
        let mut a = AmphichiralAction::identity().with_external("K", Sign::Minus);
        a.edge_perm.insert("e0".into(), "e1".into());
        a.edge_perm.insert("e1".into(), "e0".into());
        let r = validate_action(&g, &a);
        assert!(r.has(Rule::UniqueFixedVertex));
        // the genuine swap is fine
        a.vertex_perm.insert("c0".into(), "c1".into());
        a.vertex_perm.insert("c1".into(), "c0".into());
        assert!(validate_action(&g, &a).is_valid());
    }

    #[test]
    fn reduce_three_cycle_to_identity() {
        let g = star(3);
        let mut a = AmphichiralAction::identity().with_external("K", Sign::Minus);
        for i in 0..3 {
            let j = (i + 1) % 3;
            a.vertex_perm.insert(format!("c{i}"), format!("c{j}"));
            a.edge_perm.insert(format!("e{i}"), format!("e{j}"));
        }
        assert!(validate_action(&g, &a).is_valid());
        let red = reduce(&g, &a).unwrap();
        assert_eq!(red.exponent, 3);
        assert!(red.action.vertex_perm.is_empty());
        assert_eq!(red.newly_fixed_edges.len(), 3);
        assert!(validate_action(&g, &red.action).has(Rule::SignAnnotation));

        let mut signs = BTreeMap::new();
        signs
            .insert("e0".to_string(), BTreeMap::from([("r".to_string(), Sign::Plus), ("c0".to_string(), Sign::Minus)]));
        assert_eq!(annotate_signs(&g, &red.action, &signs), Err(SymmetryError::IncompleteAnnotation("e1".into())));
        for i in 1..3 {
            signs.insert(
                format!("e{i}"),
                BTreeMap::from([("r".to_string(), Sign::Minus), (format!("c{i}"), Sign::Plus)]),
            );
        }
        let done = annotate_signs(&g, &red.action, &signs).unwrap();
        assert!(validate_action(&g, &done).is_valid());
        signs.insert("e2".into(), BTreeMap::from([("r".to_string(), Sign::Minus), ("c2".to_string(), Sign::Minus)]));
        assert_eq!(annotate_signs(&g, &red.action, &signs), Err(SymmetryError::SignProductViolation("e2".into())));
    }

    #[test]
    fn orbits_of_rotations() {
        let g = star(4);
        let mut a = AmphichiralAction::identity().with_external("K", Sign::Minus);
        for i in 0..4 {
            let j = (i + 1) % 4;
            a.vertex_perm.insert(format!("c{i}"), format!("c{j}"));
            a.edge_perm.insert(format!("e{i}"), format!("e{j}"));
        }
        assert_eq!(orbits(&g, &a, &OrbitItems::Edges).unwrap(), vec![vec!["e0", "e1", "e2", "e3"]]);
        assert_eq!(a.permutation_order(&g), 4);
        assert!(a.is_reduced(&g));
        let comps = orbits(&g, &a, &OrbitItems::ComponentsOf("r".into())).unwrap();
        assert_eq!(comps, vec![vec!["K".to_string()], vec!["e0".into(), "e1".into(), "e2".into(), "e3".into()]]);
        let id = orbits(&g, &AmphichiralAction::identity(), &OrbitItems::Vertices).unwrap();
        assert!(id.iter().all(|o| o.len() == 1));
    }

    #[test]
    fn json_shape() {
        let a = AmphichiralAction::identity().with_external("K", Sign::Minus).with_signs(
            "e",
            ("r", Sign::Plus),
            ("c", Sign::Minus),
        );
        let s = a.to_json();
        assert!(s.contains("\"K\": -1"));
        assert_eq!(AmphichiralAction::from_json(&s).unwrap(), a);
        assert!(AmphichiralAction::from_json(r#"{"external_signs":{"K":2}}"#).is_err());
        assert!(AmphichiralAction::from_json(r#"{"bogus":{}}"#).is_err());
    }
}
