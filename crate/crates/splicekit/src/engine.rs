//! Recursive case analysis producing a certificate tree, a verdict and an upper bound on the Kawauchi number.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coherence::{decide_unchecked, edge_class, vertex_class_skipping, EdgeClass, Structure, VertexClass};
use crate::complexity::{compare, complexity, Complexity};
use crate::graph::{root_of, CompanionshipGraph, ComponentRef, Geometry, ModelLink, Star, VertexId, Violation};
use crate::ops::{deduce_unlink, edge_cut, outer_side, subtree_cut, OpsError};
use crate::symmetry::{check_valid, orbits, reduce, AmphichiralAction, OrbitItems, Sign, SymmetryError};

/// Relative amount by which a deletion shrinks the volume of a hyperbolic host.
pub const DELETION_DECREMENT: f64 = 1e-3;
pub const DEFAULT_NODE_BUDGET: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Impossibility {
    /// A Seifert link S(p,q|X) cannot be the only fixed piece.
    SeifertLink,
    /// The core of a key chain with several rings is moved.
    CoreMoved,
    /// The key chain core is reversed together with another reversed component.
    CoreAndRingReversed,
    /// Local order at least 4 with two or more reversed components.
    HighOrderSeveralReversed,
    /// Local order at least 4 with a single reversed component.
    HighOrderSingleReversed,
}

impl fmt::Display for Impossibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Impossibility::SeifertLink => "a Seifert link cannot carry the whole fixed set of the symmetry",
            Impossibility::CoreMoved => {
                "the key chain core is moved although it is the unique component linking all rings"
            }
            Impossibility::CoreAndRingReversed => "the key chain core and a ring are both reversed but link once",
            Impossibility::HighOrderSeveralReversed => "local order >= 4 with several reversed components",
            Impossibility::HighOrderSingleReversed => "local order >= 4 with one reversed component forces the unknot",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("action is not reduced: {0}")]
    NotReduced(String),
    #[error("invalid action: {}", .0.iter().map(|v| format!("{}: {}", v.subject, v.message)).collect::<Vec<_>>().join("; "))]
    InvalidAction(Vec<Violation>),
    #[error("external component {0} is preserved by the action")]
    PositiveComponentPresent(String),
    #[error("impossible configuration at {vertex}: {reason}")]
    ImpossibleConfiguration { vertex: VertexId, reason: Impossibility },
    #[error("elementary hypotheses fail: {0}")]
    HypothesesNotMet(String),
    #[error("unknown external component {0}")]
    UnknownComponent(String),
    #[error("replacement volume {new} is not below {old}")]
    MonotonicityViolated { old: f64, new: f64 },
    #[error("not a knot graph: {0}")]
    NotAKnotGraph(String),
    #[error("step cannot be carried out: {0}")]
    InvalidStep(String),
    #[error(transparent)]
    Ops(#[from] OpsError),
}

impl EngineError {
    pub fn name(&self) -> &'static str {
        match self {
            EngineError::NotReduced(_) => "NotReduced",
            EngineError::InvalidAction(_) => "InvalidAction",
            EngineError::PositiveComponentPresent(_) => "PositiveComponentPresent",
            EngineError::ImpossibleConfiguration { .. } => "ImpossibleConfiguration",
            EngineError::HypothesesNotMet(_) => "HypothesesNotMet",
            EngineError::UnknownComponent(_) => "UnknownComponent",
            EngineError::MonotonicityViolated { .. } => "MonotonicityViolated",
            EngineError::NotAKnotGraph(_) => "NotAKnotGraph",
            EngineError::InvalidStep(_) => "InvalidStep",
            EngineError::Ops(_) => "Ops",
        }
    }
}

impl From<SymmetryError> for EngineError {
    fn from(e: SymmetryError) -> Self {
        match e {
            SymmetryError::InvalidAction(v) => EngineError::InvalidAction(v),
            other => EngineError::InvalidStep(other.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum VerdictKind {
    Slice,
    StronglyNegAmphichiral,
    /// Concordant to the strongly negative amphichiral knot carried by `j0`.
    ConcordantToSnack {
        j0: BTreeSet<VertexId>,
    },
    /// Slice in a boundary sum of `kaw_bound` copies of the Kawauchi manifold.
    RationallySlice,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    #[serde(flatten)]
    pub kind: VerdictKind,
    /// Upper bound only.
    pub kaw_bound: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum Step {
    EmptyLink,
    Split,
    Case1 { vertex: VertexId },
    Case2a { edge: String },
    Case2b { edge: String },
    Case2c { vertex: VertexId, subtree: BTreeSet<VertexId> },
    IncoherentRootShortcut,
    CoherentRootShortcut { subtree: BTreeSet<VertexId> },
}

impl Step {
    fn kind(&self) -> &'static str {
        match self {
            Step::EmptyLink => "empty_link",
            Step::Split => "split",
            Step::Case1 { .. } => "case1",
            Step::Case2a { .. } => "case2a",
            Step::Case2b { .. } => "case2b",
            Step::Case2c { .. } => "case2c",
            Step::IncoherentRootShortcut => "incoherent_root_shortcut",
            Step::CoherentRootShortcut { .. } => "coherent_root_shortcut",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FixedSet {
    S0,
    S2,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "branch", rename_all = "snake_case")]
pub enum ElementaryBranch {
    KeyChain {
        core_sign: Option<Sign>,
    },
    /// Seifert piece whose link is not modelled.
    UnclassifiedSeifert,
    Hyperbolic {
        local_order: u64,
        declared: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementaryReport {
    pub vertex: VertexId,
    pub branch: ElementaryBranch,
    /// Reversed and preserved external components.
    pub p: usize,
    pub q: usize,
    pub edge_orbit_sizes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_set: Option<FixedSet>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub step: Step,
    /// Knot shortcuts were available at this node.
    #[serde(default, skip_serializing_if = "is_false")]
    pub shortcuts: bool,
    pub complexity: Complexity,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elementary: Option<ElementaryReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<Certificate>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

impl Certificate {
    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(Certificate::node_count).sum::<usize>()
    }

    /// Complexities along every root-to-leaf path.
    pub fn descent_paths(&self) -> Vec<Vec<Complexity>> {
        if self.children.is_empty() {
            return vec![vec![self.complexity.clone()]];
        }
        let mut out = Vec::new();
        for c in &self.children {
            for mut p in c.descent_paths() {
                p.insert(0, self.complexity.clone());
                out.push(p);
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalyzeOptions {
    /// Try every coherent edge at each Case 2.a node and keep the smallest bound.
    pub search: bool,
    pub node_budget: usize,
    /// Replace an unreduced action by its reduction instead of failing.
    pub auto_reduce: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions { search: false, node_budget: DEFAULT_NODE_BUDGET, auto_reduce: true }
    }
}

fn model_without(model: ModelLink, pos: usize) -> Option<ModelLink> {
    match model {
        ModelLink::KeyChain { n } => (pos > 0 && n > 1).then(|| ModelLink::KeyChain { n: n - 1 }),
        ModelLink::Seifert { p, q, mut x } => {
            let mut roles = vec![None];
            roles.extend([Star::Star1, Star::Star2].into_iter().filter(|s| x.contains(s)).map(Some));
            match roles.get(pos).copied().flatten() {
                None => None,
                Some(s) => {
                    x.remove(&s);
                    Some(ModelLink::Seifert { p, q, x })
                }
            }
        }
        ModelLink::Named(mut m) => {
            if m.component_count <= 1 {
                return None;
            }
            m.component_count -= 1;
            m.name = format!("{}-c{}", m.name, pos);
            m.amphichiral = None;
            if pos < m.unknotted_flags.len() {
                m.unknotted_flags.remove(pos);
            }
            if let Some(mat) = m.linking_matrix.as_mut() {
                mat.remove(pos);
                for row in mat.iter_mut() {
                    row.remove(pos);
                }
            }
            Some(ModelLink::Named(m))
        }
    }
}

/// Removes an external component. A hyperbolic host gets a fresh, strictly smaller atom;
/// `replacement` supplies its value when known.
pub fn delete_component(
    graph: &CompanionshipGraph,
    action: &AmphichiralAction,
    external: &str,
    replacement: Option<f64>,
) -> Result<(CompanionshipGraph, AmphichiralAction), EngineError> {
    let host = graph.host_of(external).ok_or_else(|| EngineError::UnknownComponent(external.to_string()))?.id.clone();
    let mut g = graph.clone();
    let v = g.vertex_mut(&host).expect("host exists");
    let pos = v.position(&ComponentRef::External(external.to_string())).expect("host carries it");
    v.components.remove(pos);
    v.model = v.model.take().and_then(|m| model_without(m, pos));
    let hyperbolic_host = if let Geometry::Hyperbolic(atom) = v.geometry.clone() {
        let old = graph.atom_value(&atom).unwrap_or(0.0);
        let new = match replacement {
            Some(x) if x > 0.0 && x < old => x,
            Some(x) => return Err(EngineError::MonotonicityViolated { old, new: x }),
            None => old * (1.0 - DELETION_DECREMENT),
        };
        let mut name = format!("{atom}-{external}");
        while g.atom_value(&name).is_some() {
            name.push('\'');
        }
        g.set_atom(&name, new);
        g.vertex_mut(&host).expect("host exists").geometry = Geometry::Hyperbolic(name);
        let used: BTreeSet<String> = g.vertices.iter().filter_map(|v| v.geometry.atom().map(str::to_string)).collect();
        g.atoms.retain(|a| used.contains(&a.name));
        true
    } else {
        false
    };
    g.normalize_directions();
    let g = g.canonical();
    let a = action.restricted_to(&g, &BTreeMap::new());
    let (before, after) = (complexity(graph), complexity(&g));
    let ok = match compare(&after, &before) {
        Ordering::Less => true,
        Ordering::Equal => !hyperbolic_host,
        Ordering::Greater => false,
    };
    if !ok {
        return Err(EngineError::MonotonicityViolated { old: before.value(), new: after.value() });
    }
    Ok((g, a))
}

fn lcm(a: u64, b: u64) -> u64 {
    let g = crate::graph::gcd(a as i64, b as i64) as u64;
    a / g * b
}

pub fn check_elementary(
    graph: &CompanionshipGraph,
    action: &AmphichiralAction,
    vertex: &str,
) -> Result<ElementaryReport, EngineError> {
    check_valid(graph, action)?;
    let unmet = |m: String| Err(EngineError::HypothesesNotMet(m));
    let v = match graph.vertex(vertex) {
        Some(v) => v,
        None => return unmet(format!("unknown vertex {vertex}")),
    };
    if !action.fixed_edges(graph).is_empty() {
        return unmet("the action fixes an edge".into());
    }
    if action.fixed_vertices(graph) != BTreeSet::from([vertex.to_string()]) {
        return unmet(format!("{vertex} is not the only fixed vertex"));
    }
    let single = BTreeSet::from([vertex.to_string()]);
    if !deduce_unlink(graph, &single)? {
        return unmet(format!("some edge at {vertex} is not directed into it"));
    }

    // no sign choice on a Seifert link passes the unlinking hypotheses below; report the structural reason
    if let Some(ModelLink::Seifert { .. }) = &v.model {
        return Err(EngineError::ImpossibleConfiguration {
            vertex: vertex.to_string(),
            reason: Impossibility::SeifertLink,
        });
    }
    // positions of the preserved externals and of the edge components at v
    let unlinked: Vec<usize> = v
        .components
        .iter()
        .enumerate()
        .filter(|(_, c)| match c {
            ComponentRef::Edge(_) => true,
            ComponentRef::External(n) => action.external_signs.get(n) == Some(&Sign::Plus),
        })
        .map(|(i, _)| i)
        .collect();
    if let Some(model) = &v.model {
        for (k, &i) in unlinked.iter().enumerate() {
            if model.unknotted(i) == Some(false) {
                return unmet(format!("{} is knotted", v.components[i]));
            }
            for &j in &unlinked[k + 1..] {
                if let Some(lk) = model.linking(i, j).filter(|lk| *lk != 0) {
                    return unmet(format!("{} and {} link {} times", v.components[i], v.components[j], lk));
                }
            }
        }
    }

    let incident: BTreeSet<String> = graph.incident_edges(vertex).iter().map(|e| e.id.clone()).collect();
    let edge_orbit_sizes: Vec<usize> = orbits(graph, action, &OrbitItems::Edges)?
        .into_iter()
        .filter(|o| incident.contains(&o[0]))
        .map(|o| o.len())
        .collect();
    if let Some(n) = edge_orbit_sizes.iter().find(|n| *n % 2 == 1) {
        return unmet(format!("an edge orbit at {vertex} has odd size {n}"));
    }
    let pq = action.pq(graph);
    let (p, q) = (pq.p, pq.q);
    let impossible = |reason| Err(EngineError::ImpossibleConfiguration { vertex: vertex.to_string(), reason });
    let s0_if_single = if p == 1 { Some(FixedSet::S0) } else { None };

    let report = |branch, fixed_set| ElementaryReport {
        vertex: vertex.to_string(),
        branch,
        p,
        q,
        edge_orbit_sizes: edge_orbit_sizes.clone(),
        fixed_set,
    };
    match (&v.model, &v.geometry) {
        (Some(ModelLink::KeyChain { n }), _) => {
            let core_sign = action.component_sign(vertex, &v.components[0]);
            match core_sign {
                None if *n > 1 => impossible(Impossibility::CoreMoved),
                None => Ok(report(ElementaryBranch::KeyChain { core_sign }, None)),
                Some(Sign::Plus) => Ok(report(
                    ElementaryBranch::KeyChain { core_sign },
                    Some(if p == 1 { FixedSet::S0 } else { FixedSet::S2 }),
                )),
                Some(Sign::Minus) if p > 1 => impossible(Impossibility::CoreAndRingReversed),
                Some(Sign::Minus) => Ok(report(ElementaryBranch::KeyChain { core_sign }, Some(FixedSet::S0))),
            }
        }
        (_, Geometry::Hyperbolic(_)) => {
            if let Some(n) = edge_orbit_sizes.iter().find(|n| !n.is_power_of_two()) {
                return unmet(format!("edge orbit of size {n} at a hyperbolic vertex"));
            }
            let declared = action.local_orders.get(vertex).copied();
            let local_order = declared.unwrap_or_else(|| edge_orbit_sizes.iter().fold(2, |acc, n| lcm(acc, *n as u64)));
            if local_order >= 4 && p >= 2 {
                impossible(Impossibility::HighOrderSeveralReversed)
            } else if local_order >= 4 && p == 1 {
                impossible(Impossibility::HighOrderSingleReversed)
            } else {
                Ok(report(ElementaryBranch::Hyperbolic { local_order, declared: declared.is_some() }, s0_if_single))
            }
        }
        (_, Geometry::Seifert) => Ok(report(ElementaryBranch::UnclassifiedSeifert, None)),
    }
}

struct Child {
    graph: CompanionshipGraph,
    action: AmphichiralAction,
}

fn restricted(a: &AmphichiralAction, g: &CompanionshipGraph, extra: &[(&str, Sign)]) -> AmphichiralAction {
    let extra: BTreeMap<String, Sign> = extra.iter().map(|(n, s)| (n.to_string(), *s)).collect();
    a.restricted_to(g, &extra)
}

fn sign_of(a: &AmphichiralAction, edge: &str, v: &str) -> Result<Sign, EngineError> {
    a.sign_at(edge, v).ok_or_else(|| EngineError::InvalidStep(format!("edge {edge} carries no sign at {v}")))
}

/// Cuts a fixed edge; the side containing `keep` inherits the cut component, the other side loses it.
fn cut_children(
    g: &CompanionshipGraph,
    a: &AmphichiralAction,
    edge: &str,
    keep: &str,
) -> Result<Vec<Child>, EngineError> {
    let e = g.edge(edge).ok_or_else(|| EngineError::InvalidStep(format!("unknown edge {edge}")))?;
    let drop =
        e.other(keep).ok_or_else(|| EngineError::InvalidStep(format!("{keep} is not an end of {edge}")))?.to_string();
    let cut = edge_cut(g, edge)?;
    let (kept, dropped) =
        if cut.side1.vertex(keep).is_some() { (cut.side1, cut.side2) } else { (cut.side2, cut.side1) };
    let kept_action = restricted(a, &kept, &[(edge, sign_of(a, edge, keep)?)]);
    let dropped_action = restricted(a, &dropped, &[(edge, sign_of(a, edge, &drop)?)]);
    let (dropped, dropped_action) = delete_component(&dropped, &dropped_action, edge, None)?;
    Ok(vec![Child { graph: kept, action: kept_action }, Child { graph: dropped, action: dropped_action }])
}

fn derive_children(step: &Step, g: &CompanionshipGraph, a: &AmphichiralAction) -> Result<Vec<Child>, EngineError> {
    match step {
        Step::EmptyLink | Step::Case1 { .. } | Step::IncoherentRootShortcut => Ok(vec![]),
        Step::Split => Ok(g
            .connected_components()
            .into_iter()
            .map(|c| {
                let graph = g.induced(&c);
                let action = restricted(a, &graph, &[]);
                Child { graph, action }
            })
            .collect()),
        Step::CoherentRootShortcut { subtree } => {
            if subtree.len() == g.vertices.len() {
                return Ok(vec![]);
            }
            let anchor = subtree.iter().next().expect("nonempty subtree");
            let mut out = Vec::new();
            for e in crate::ops::boundary_edges(g, subtree) {
                let edge = g.edge(&e).expect("boundary edge");
                let piece_root = edge.endpoints.iter().find(|v| !subtree.contains(*v)).expect("outside end").clone();
                let cut = edge_cut(g, &e)?;
                let piece = outer_side(&cut, anchor).clone();
                let action = restricted(a, &piece, &[(&e, sign_of(a, &e, &piece_root)?)]);
                out.push(Child { graph: piece, action });
            }
            Ok(out)
        }
        Step::Case2a { edge } => {
            let tail = g
                .edge(edge)
                .and_then(|e| e.tail())
                .ok_or_else(|| EngineError::InvalidStep(format!("{edge} is not a directed edge")))?
                .to_string();
            cut_children(g, a, edge, &tail)
        }
        Step::Case2b { edge } => {
            let e = g.edge(edge).ok_or_else(|| EngineError::InvalidStep(format!("unknown edge {edge}")))?;
            let keep = e
                .endpoints
                .iter()
                .find(|v| a.sign_at(edge, v) == Some(Sign::Minus))
                .ok_or_else(|| EngineError::InvalidStep(format!("{edge} has no reversed end")))?
                .clone();
            cut_children(g, a, edge, &keep)
        }
        Step::Case2c { vertex, subtree } => {
            let (inner, cuts) = subtree_cut(g, subtree)?;
            let mut extra = Vec::new();
            let mut outer = Vec::new();
            for cut in &cuts {
                let e = &cut.cut_edge;
                let far = g
                    .edge(e)
                    .and_then(|x| x.other(vertex))
                    .ok_or_else(|| EngineError::InvalidStep(format!("boundary edge {e} does not meet {vertex}")))?;
                extra.push((e.as_str(), sign_of(a, e, vertex)?));
                let piece = outer_side(cut, vertex);
                let pa = restricted(a, piece, &[(e, sign_of(a, e, far)?)]);
                let (graph, action) = delete_component(piece, &pa, e, None)?;
                outer.push(Child { graph, action });
            }
            let inner_action = restricted(a, &inner, &extra);
            let mut out = vec![Child { graph: inner, action: inner_action }];
            out.extend(outer);
            Ok(out)
        }
    }
}

fn knot_root(g: &CompanionshipGraph) -> Option<VertexId> {
    if !g.is_connected() {
        return None;
    }
    root_of(g).ok()
}

/// The fixed-edge-free subtree around `v`.
fn free_subtree(g: &CompanionshipGraph, a: &AmphichiralAction, v: &str) -> BTreeSet<VertexId> {
    g.reach(v, &a.fixed_edges(g))
}

/// Every step kind whose guard holds at this node. Guards encode the selection priority,
/// so a well-formed input has exactly one.
fn holding_guards(g: &CompanionshipGraph, a: &AmphichiralAction, shortcuts: bool) -> Vec<&'static str> {
    let mut out = Vec::new();
    let externals = !g.externals().is_empty();
    let connected = g.is_connected();
    if !externals {
        out.push("empty_link");
    }
    if externals && !connected {
        out.push("split");
    }
    let mut shortcut = false;
    if shortcuts && externals {
        if let Some(root) = knot_root(g) {
            let incoherent = vertex_class_skipping(g, a, &root, None) == VertexClass::Incoherent;
            if incoherent {
                out.push("incoherent_root_shortcut");
                shortcut = true;
            } else if decide_unchecked(g, a, &root).structure != Structure::Neither {
                out.push("coherent_root_shortcut");
                shortcut = true;
            }
        }
    }
    if !externals || !connected || shortcut {
        return out;
    }
    let fixed = a.fixed_edges(g);
    let classes: Vec<EdgeClass> = fixed.iter().map(|e| edge_class(g, a, e)).collect();
    if fixed.is_empty() {
        out.push("case1");
    } else if classes.contains(&EdgeClass::CoherentlyDirected) {
        out.push("case2a");
    } else if classes.contains(&EdgeClass::UndirectedFixed) {
        out.push("case2b");
    } else {
        out.push("case2c");
    }
    out
}

/// Checks the parameters of `step` against the node; the kind itself is checked by `holding_guards`.
fn check_parameters(
    step: &Step,
    g: &CompanionshipGraph,
    a: &AmphichiralAction,
) -> Result<Option<ElementaryReport>, String> {
    match step {
        Step::EmptyLink | Step::Split | Step::IncoherentRootShortcut => Ok(None),
        Step::Case1 { vertex } => check_elementary(g, a, vertex).map(Some).map_err(|e| e.to_string()),
        Step::Case2a { edge } => match g.edge(edge) {
            Some(_) if edge_class(g, a, edge) == EdgeClass::CoherentlyDirected => Ok(None),
            _ => Err(format!("{edge} is not a coherently directed fixed edge")),
        },
        Step::Case2b { edge } => match g.edge(edge) {
            Some(_) if edge_class(g, a, edge) == EdgeClass::UndirectedFixed => Ok(None),
            _ => Err(format!("{edge} is not an undirected fixed edge")),
        },
        Step::Case2c { vertex, subtree } => {
            if !a.vertex_fixed(vertex) || g.vertex(vertex).is_none() {
                return Err(format!("{vertex} is not a fixed vertex"));
            }
            let fixed: Vec<_> = g.incident_edges(vertex).into_iter().filter(|e| a.edge_fixed(&e.id)).collect();
            if fixed.is_empty() || fixed.iter().any(|e| e.head() != Some(vertex.as_str())) {
                return Err(format!("some fixed edge at {vertex} does not enter it"));
            }
            if *subtree != free_subtree(g, a, vertex) {
                return Err(format!("subtree is not the fixed-edge-free subtree around {vertex}"));
            }
            Ok(None)
        }
        Step::CoherentRootShortcut { subtree } => {
            let root = knot_root(g).ok_or("not a knot graph")?;
            let d = decide_unchecked(g, a, &root);
            if d.g_max != *subtree {
                return Err("subtree is not the maximal coherent subtree".into());
            }
            Ok(None)
        }
    }
}

fn node_verdict(step: &Step, g: &CompanionshipGraph, children: &[Certificate]) -> Verdict {
    let v = |kind, kaw_bound| Verdict { kind, kaw_bound };
    match step {
        Step::EmptyLink | Step::IncoherentRootShortcut => v(VerdictKind::Slice, 0),
        Step::CoherentRootShortcut { subtree } if subtree.len() == g.vertices.len() => {
            v(VerdictKind::StronglyNegAmphichiral, 1)
        }
        Step::CoherentRootShortcut { subtree } => v(VerdictKind::ConcordantToSnack { j0: subtree.clone() }, 1),
        Step::Case1 { .. } => v(VerdictKind::StronglyNegAmphichiral, u32::from(g.externals().len() == 1)),
        Step::Split | Step::Case2a { .. } | Step::Case2b { .. } | Step::Case2c { .. } => {
            let total: u32 = children.iter().map(|c| c.verdict.kaw_bound).sum();
            v(if total == 0 { VerdictKind::Slice } else { VerdictKind::RationallySlice }, total)
        }
    }
}

struct Budget {
    used: usize,
}

/// Candidate steps in order of preference. Only Case 2.a and 2.b offer more than one.
fn candidates(
    g: &CompanionshipGraph,
    a: &AmphichiralAction,
    shortcuts: bool,
) -> Result<Vec<(Step, Vec<Child>)>, EngineError> {
    let guards = holding_guards(g, a, shortcuts);
    let kind = *guards.first().ok_or_else(|| EngineError::InvalidStep("no case applies".into()))?;
    let single = |step: Step| -> Result<Vec<(Step, Vec<Child>)>, EngineError> {
        let kids = derive_children(&step, g, a)?;
        Ok(vec![(step, kids)])
    };
    match kind {
        "empty_link" => single(Step::EmptyLink),
        "split" => single(Step::Split),
        "incoherent_root_shortcut" => single(Step::IncoherentRootShortcut),
        "coherent_root_shortcut" => {
            let root = knot_root(g).expect("guard checked");
            single(Step::CoherentRootShortcut { subtree: decide_unchecked(g, a, &root).g_max })
        }
        "case1" => {
            let fixed = a.fixed_vertices(g);
            let vertex = fixed.into_iter().next().ok_or_else(|| EngineError::InvalidStep("no fixed vertex".into()))?;
            single(Step::Case1 { vertex })
        }
        "case2a" | "case2b" => {
            let wanted = if kind == "case2a" { EdgeClass::CoherentlyDirected } else { EdgeClass::UndirectedFixed };
            let mut out = Vec::new();
            for e in a.fixed_edges(g) {
                if edge_class(g, a, &e) != wanted {
                    continue;
                }
                let step = if kind == "case2a" { Step::Case2a { edge: e } } else { Step::Case2b { edge: e } };
                let kids = derive_children(&step, g, a)?;
                out.push((step, kids));
            }
            // prefer the cut whose larger child is smallest; the sort is stable so ties keep id order
            let larger =
                |kids: &Vec<Child>| kids.iter().map(|c| complexity(&c.graph)).max_by(compare).expect("two children");
            out.sort_by(|x, y| compare(&larger(&x.1), &larger(&y.1)));
            Ok(out)
        }
        _ => {
            let vertex = a
                .fixed_vertices(g)
                .into_iter()
                .find(|v| {
                    let fixed: Vec<_> = g.incident_edges(v).into_iter().filter(|e| a.edge_fixed(&e.id)).collect();
                    !fixed.is_empty() && fixed.iter().all(|e| e.head() == Some(v.as_str()))
                })
                .ok_or_else(|| EngineError::InvalidStep("no vertex absorbs all its fixed edges".into()))?;
            let subtree = free_subtree(g, a, &vertex);
            single(Step::Case2c { vertex, subtree })
        }
    }
}

fn analyze_node(
    g: &CompanionshipGraph,
    a: &AmphichiralAction,
    shortcuts: bool,
    opts: &AnalyzeOptions,
    budget: &mut Budget,
) -> Result<Certificate, EngineError> {
    budget.used += 1;
    check_valid(g, a)?;
    let cx = complexity(g);
    let mut best: Option<Certificate> = None;
    for (i, (step, kids)) in candidates(g, a, shortcuts)?.into_iter().enumerate() {
        if i > 0 && (!opts.search || budget.used >= opts.node_budget) {
            break;
        }
        let built = build(step, kids, g, a, shortcuts, &cx, opts, budget);
        let cert = match built {
            Ok(c) => c,
            Err(e) if i == 0 => return Err(e),
            Err(_) => continue,
        };
        if best.as_ref().is_none_or(|b| cert.verdict.kaw_bound < b.verdict.kaw_bound) {
            best = Some(cert);
        }
    }
    Ok(best.expect("the first candidate is always built"))
}

#[allow(clippy::too_many_arguments)]
fn build(
    step: Step,
    kids: Vec<Child>,
    g: &CompanionshipGraph,
    a: &AmphichiralAction,
    shortcuts: bool,
    cx: &Complexity,
    opts: &AnalyzeOptions,
    budget: &mut Budget,
) -> Result<Certificate, EngineError> {
    let elementary = match &step {
        Step::Case1 { vertex } => Some(check_elementary(g, a, vertex)?),
        _ => None,
    };
    let mut children = Vec::with_capacity(kids.len());
    for k in kids {
        let child = analyze_node(&k.graph, &k.action, shortcuts, opts, budget)?;
        if compare(&child.complexity, cx) != Ordering::Less {
            return Err(EngineError::InvalidStep(format!(
                "complexity {} of a child is not below {}",
                child.complexity, cx
            )));
        }
        children.push(child);
    }
    let verdict = node_verdict(&step, g, &children);
    Ok(Certificate { step, shortcuts, complexity: cx.clone(), verdict, elementary, children })
}

fn prepare(
    graph: &CompanionshipGraph,
    action: &AmphichiralAction,
    knot: bool,
    opts: &AnalyzeOptions,
) -> Result<AmphichiralAction, EngineError> {
    check_valid(graph, action)?;
    if knot {
        root_of(graph).map_err(|e| EngineError::NotAKnotGraph(e.to_string()))?;
    }
    if let Some((name, _)) = action.external_signs.iter().find(|(_, s)| **s == Sign::Plus) {
        return Err(EngineError::PositiveComponentPresent(name.clone()));
    }
    if action.is_reduced(graph) {
        return Ok(action.clone());
    }
    if !opts.auto_reduce {
        return Err(EngineError::NotReduced(format!(
            "order {} is not a power of two",
            action.permutation_order(graph)
        )));
    }
    let r = reduce(graph, action)?;
    if !r.newly_fixed_edges.is_empty() {
        return Err(EngineError::NotReduced(format!(
            "the reduction fixes edges {:?}, which need sign annotations",
            r.newly_fixed_edges
        )));
    }
    check_valid(graph, &r.action)?;
    Ok(r.action)
}

fn run(
    graph: &CompanionshipGraph,
    action: &AmphichiralAction,
    knot: bool,
    opts: &AnalyzeOptions,
) -> Result<(Verdict, Certificate), EngineError> {
    let action = prepare(graph, action, knot, opts)?;
    let mut budget = Budget { used: 0 };
    let cert = analyze_node(&graph.clone().canonical(), &action, knot, opts, &mut budget)?;
    Ok((cert.verdict.clone(), cert))
}

pub fn analyze_link(
    graph: &CompanionshipGraph,
    action: &AmphichiralAction,
) -> Result<(Verdict, Certificate), EngineError> {
    analyze_link_with(graph, action, &AnalyzeOptions::default())
}

pub fn analyze_link_with(
    graph: &CompanionshipGraph,
    action: &AmphichiralAction,
    opts: &AnalyzeOptions,
) -> Result<(Verdict, Certificate), EngineError> {
    run(graph, action, false, opts)
}

/// Like `analyze_link`, but every knot met on the way is first tried against the coherent
/// and incoherent root criteria.
pub fn analyze_knot(
    graph: &CompanionshipGraph,
    action: &AmphichiralAction,
) -> Result<(Verdict, Certificate), EngineError> {
    analyze_knot_with(graph, action, &AnalyzeOptions::default())
}

pub fn analyze_knot_with(
    graph: &CompanionshipGraph,
    action: &AmphichiralAction,
    opts: &AnalyzeOptions,
) -> Result<(Verdict, Certificate), EngineError> {
    run(graph, action, true, opts)
}

#[derive(Debug, Error, Clone, PartialEq, Serialize, Deserialize)]
#[error("step mismatch at {path}: {reason}")]
pub struct StepMismatch {
    /// Child indices from the root, joined by '/'.
    pub path: String,
    pub reason: String,
}

/// Re-derives every node of `cert` from the input and checks guards, complexities and verdicts.
pub fn replay(cert: &Certificate, graph: &CompanionshipGraph, action: &AmphichiralAction) -> Result<(), StepMismatch> {
    let mismatch = |path: &str, reason: String| StepMismatch { path: path.to_string(), reason };
    let action = prepare(graph, action, cert.shortcuts, &AnalyzeOptions::default())
        .map_err(|e| mismatch("root", e.to_string()))?;
    replay_node(cert, &graph.clone().canonical(), &action, cert.shortcuts, "root")
}

pub fn replays(cert: &Certificate, graph: &CompanionshipGraph, action: &AmphichiralAction) -> bool {
    replay(cert, graph, action).is_ok()
}

fn replay_node(
    cert: &Certificate,
    g: &CompanionshipGraph,
    a: &AmphichiralAction,
    shortcuts: bool,
    path: &str,
) -> Result<(), StepMismatch> {
    let fail = |reason: String| Err(StepMismatch { path: path.to_string(), reason });
    if cert.shortcuts != shortcuts {
        return fail("shortcut flag differs from the parent's".into());
    }
    if let Err(e) = check_valid(g, a) {
        return fail(e.to_string());
    }
    let cx = complexity(g);
    if compare(&cx, &cert.complexity) != Ordering::Equal {
        return fail(format!("recorded complexity {} but the node has {}", cert.complexity, cx));
    }
    let guards = holding_guards(g, a, shortcuts);
    if guards.len() != 1 {
        return fail(format!("guards {guards:?} hold; expected exactly one"));
    }
    if guards[0] != cert.step.kind() {
        return fail(format!("step {} recorded but {} applies", cert.step.kind(), guards[0]));
    }
    if let Err(reason) = check_parameters(&cert.step, g, a) {
        return fail(reason);
    }
    let kids = match derive_children(&cert.step, g, a) {
        Ok(k) => k,
        Err(e) => return fail(e.to_string()),
    };
    if kids.len() != cert.children.len() {
        return fail(format!("{} children recorded, {} derived", cert.children.len(), kids.len()));
    }
    for (i, (k, c)) in kids.iter().zip(&cert.children).enumerate() {
        if compare(&c.complexity, &cx) != Ordering::Less {
            return fail(format!("child {i} does not decrease complexity"));
        }
        replay_node(c, &k.graph, &k.action, shortcuts, &format!("{path}/{i}"))?;
    }
    let expected = node_verdict(&cert.step, g, &cert.children);
    if expected != cert.verdict {
        return fail(format!("verdict {:?} recorded, {:?} follows", cert.verdict, expected));
    }
    Ok(())
}
