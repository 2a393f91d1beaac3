//! Companionship graphs: labeled, partially directed forests of JSJ pieces.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type VertexId = String;
pub type EdgeId = String;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph is not a knot graph: {0}")]
    NotAKnotGraph(String),
    #[error("no linking data available at vertex {0}")]
    NoLinkingData(VertexId),
    #[error("vertex {vertex} has no component {component}")]
    UnknownComponent { vertex: VertexId, component: String },
    #[error("linking number of a component with itself is undefined")]
    SameComponent,
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("malformed graph document: {0}")]
    Json(String),
}

/// A named hyperbolic volume. Values are dimensionless and compared with a tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolumeAtom {
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Hyperbolic(String),
    Seifert,
}

impl Geometry {
    pub fn is_hyperbolic(&self) -> bool {
        matches!(self, Geometry::Hyperbolic(_))
    }

    pub fn atom(&self) -> Option<&str> {
        match self {
            Geometry::Hyperbolic(a) => Some(a),
            Geometry::Seifert => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Star {
    Star1,
    Star2,
}

/// Concrete link data for a vertex. Component positions follow the vertex's component list:
/// key chains put the core first, Seifert links list S1, then S2 and S3 when present.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelLink {
    #[serde(rename = "keychain")]
    KeyChain {
        n: u32,
    },
    Seifert {
        p: i64,
        q: i64,
        #[serde(default)]
        x: BTreeSet<Star>,
    },
    Named(NamedModel),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedModel {
    pub name: String,
    pub component_count: usize,
    pub hyperbolic: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linking_matrix: Option<Vec<Vec<i64>>>,
    pub unknotted_flags: Vec<bool>,
    /// Set on the mirror image of the named link.
    #[serde(default, skip_serializing_if = "is_false")]
    pub mirror: bool,
    /// Known chirality, when annotated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amphichiral: Option<bool>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

pub(crate) fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl ModelLink {
    pub fn component_count(&self) -> usize {
        match self {
            ModelLink::KeyChain { n } => *n as usize + 1,
            ModelLink::Seifert { x, .. } => 1 + x.len(),
            ModelLink::Named(m) => m.component_count,
        }
    }

    pub fn is_hyperbolic(&self) -> bool {
        matches!(self, ModelLink::Named(m) if m.hyperbolic)
    }

    /// Seifert role of each position: 1 for S1, 2 for S2, 3 for S3.
    fn seifert_roles(x: &BTreeSet<Star>) -> Vec<u8> {
        let mut roles = vec![1];
        if x.contains(&Star::Star1) {
            roles.push(2);
        }
        if x.contains(&Star::Star2) {
            roles.push(3);
        }
        roles
    }

    /// Linking number between the components at positions `i` and `j` (i != j).
    pub fn linking(&self, i: usize, j: usize) -> Option<i64> {
        let n = self.component_count();
        if i >= n || j >= n || i == j {
            return None;
        }
        match self {
            ModelLink::KeyChain { .. } => Some(if i == 0 || j == 0 { 1 } else { 0 }),
            ModelLink::Seifert { p, q, x } => {
                let roles = Self::seifert_roles(x);
                let (a, b) = (roles[i].min(roles[j]), roles[i].max(roles[j]));
                Some(match (a, b) {
                    (1, 2) => *p,
                    (1, 3) => *q,
                    _ => 1,
                })
            }
            ModelLink::Named(m) => m.linking_matrix.as_ref().map(|mat| mat[i][j]),
        }
    }

    pub fn unknotted(&self, i: usize) -> Option<bool> {
        if i >= self.component_count() {
            return None;
        }
        match self {
            ModelLink::KeyChain { .. } => Some(true),
            ModelLink::Seifert { p, q, .. } => Some(i > 0 || p.abs() == 1 || q.abs() == 1),
            ModelLink::Named(m) => m.unknotted_flags.get(i).copied(),
        }
    }

    pub fn mirror(&self) -> ModelLink {
        match self {
            ModelLink::KeyChain { n } => ModelLink::KeyChain { n: *n },
            ModelLink::Seifert { p, q, x } => ModelLink::Seifert { p: -p, q: *q, x: x.clone() },
            ModelLink::Named(m) => {
                let mut m = m.clone();
                m.mirror = !m.mirror;
                if let Some(mat) = m.linking_matrix.as_mut() {
                    for row in mat.iter_mut() {
                        for v in row.iter_mut() {
                            *v = -*v;
                        }
                    }
                }
                ModelLink::Named(m)
            }
        }
    }

    /// Equality of links up to the symmetries the encoding does not see.
    pub fn same_link(&self, other: &ModelLink) -> bool {
        match (self, other) {
            (ModelLink::KeyChain { n: a }, ModelLink::KeyChain { n: b }) => a == b,
            (ModelLink::Seifert { p: p1, q: q1, x: x1 }, ModelLink::Seifert { p: p2, q: q2, x: x2 }) => {
                x1 == x2 && ((p1 == p2 && q1 == q2) || (*p1 == -p2 && *q1 == -q2))
            }
            (ModelLink::Named(a), ModelLink::Named(b)) => {
                let base = a.name == b.name && a.component_count == b.component_count && a.hyperbolic == b.hyperbolic;
                base && (a.mirror == b.mirror || a.amphichiral == Some(true))
            }
            _ => false,
        }
    }

    /// `Some(false)` when the model is known to be chiral.
    pub fn amphichiral(&self) -> Option<bool> {
        match self {
            ModelLink::KeyChain { .. } => Some(true),
            // S1 is then a nontrivial torus knot, which is chiral.
            ModelLink::Seifert { p, q, .. } if p.abs() >= 2 && q.abs() >= 2 => Some(false),
            ModelLink::Seifert { .. } => None,
            ModelLink::Named(m) => m.amphichiral,
        }
    }

    /// Shape problems of the model itself, independent of where it sits.
    pub fn shape_problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        match self {
            ModelLink::KeyChain { n } => {
                if *n == 0 {
                    out.push("key chain needs at least one ring".into());
                }
            }
            ModelLink::Seifert { p, q, .. } => {
                if *p == 0 || *q == 0 {
                    out.push("Seifert parameters must be nonzero".into());
                } else if gcd(*p, *q) != 1 {
                    out.push(format!("gcd({}, {}) != 1: the piece is not atomic", p, q));
                }
            }
            ModelLink::Named(m) => {
                if m.component_count == 0 {
                    out.push("named model needs at least one component".into());
                }
                if m.unknotted_flags.len() != m.component_count {
                    out.push("unknotted_flags length differs from component_count".into());
                }
                if let Some(mat) = &m.linking_matrix {
                    let n = m.component_count;
                    if mat.len() != n || mat.iter().any(|r| r.len() != n) {
                        out.push("linking matrix has the wrong shape".into());
                    } else {
                        for i in 0..n {
                            for j in 0..n {
                                if mat[i][j] != mat[j][i] {
                                    out.push(format!("linking matrix is not symmetric at ({i},{j})"));
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentRef {
    External(String),
    Edge(EdgeId),
}

impl ComponentRef {
    pub fn name(&self) -> &str {
        match self {
            ComponentRef::External(n) | ComponentRef::Edge(n) => n,
        }
    }
}

impl fmt::Display for ComponentRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentRef::External(n) => write!(f, "external:{n}"),
            ComponentRef::Edge(e) => write!(f, "edge:{e}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vertex {
    pub id: VertexId,
    pub geometry: Geometry,
    #[serde(default)]
    pub components: Vec<ComponentRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelLink>,
    /// Winding of this vertex's pattern around the torus of each listed edge.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub winding: BTreeMap<EdgeId, i64>,
}

impl Vertex {
    pub fn new(id: impl Into<String>, geometry: Geometry) -> Self {
        Vertex { id: id.into(), geometry, components: Vec::new(), model: None, winding: BTreeMap::new() }
    }

    pub fn with_model(mut self, model: ModelLink) -> Self {
        self.model = Some(model);
        self
    }

    pub fn position(&self, c: &ComponentRef) -> Option<usize> {
        self.components.iter().position(|x| x == c)
    }

    pub fn externals(&self) -> impl Iterator<Item = &str> {
        self.components.iter().filter_map(|c| match c {
            ComponentRef::External(n) => Some(n.as_str()),
            _ => None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "DirectionRepr", into = "DirectionRepr")]
pub enum Direction {
    Directed { from: VertexId, to: VertexId },
    Undirected,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum DirectionRepr {
    Directed { from: String, to: String },
    Word(String),
}

impl TryFrom<DirectionRepr> for Direction {
    type Error = String;
    fn try_from(r: DirectionRepr) -> Result<Self, String> {
        match r {
            DirectionRepr::Directed { from, to } => Ok(Direction::Directed { from, to }),
            DirectionRepr::Word(w) if w == "undirected" => Ok(Direction::Undirected),
            DirectionRepr::Word(w) => Err(format!("unknown direction {w:?}")),
        }
    }
}

impl From<Direction> for DirectionRepr {
    fn from(d: Direction) -> Self {
        match d {
            Direction::Directed { from, to } => DirectionRepr::Directed { from, to },
            Direction::Undirected => DirectionRepr::Word("undirected".into()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub id: EdgeId,
    pub endpoints: [VertexId; 2],
    pub direction: Direction,
}

impl Edge {
    pub fn is_directed(&self) -> bool {
        matches!(self.direction, Direction::Directed { .. })
    }

    pub fn head(&self) -> Option<&str> {
        match &self.direction {
            Direction::Directed { to, .. } => Some(to),
            Direction::Undirected => None,
        }
    }

    pub fn tail(&self) -> Option<&str> {
        match &self.direction {
            Direction::Directed { from, .. } => Some(from),
            Direction::Undirected => None,
        }
    }

    pub fn other(&self, v: &str) -> Option<&str> {
        if self.endpoints[0] == v {
            Some(&self.endpoints[1])
        } else if self.endpoints[1] == v {
            Some(&self.endpoints[0])
        } else {
            None
        }
    }

    pub fn touches(&self, v: &str) -> bool {
        self.endpoints[0] == v || self.endpoints[1] == v
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompanionshipGraph {
    #[serde(default)]
    pub atoms: Vec<VolumeAtom>,
    #[serde(default)]
    pub vertices: Vec<Vertex>,
    #[serde(default)]
    pub edges: Vec<Edge>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    Empty,
    Knot,
    Link,
    Split,
}

impl CompanionshipGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_json(s: &str) -> Result<Self, GraphError> {
        serde_json::from_str(s).map_err(|e| GraphError::Json(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serializes")
    }

    pub fn with_atom(mut self, name: &str, value: f64) -> Self {
        self.set_atom(name, value);
        self
    }

    pub fn set_atom(&mut self, name: &str, value: f64) {
        match self.atoms.iter_mut().find(|a| a.name == name) {
            Some(a) => a.value = value,
            None => self.atoms.push(VolumeAtom { name: name.into(), value }),
        }
    }

    pub fn add_vertex(&mut self, v: Vertex) -> &mut Self {
        self.vertices.push(v);
        self
    }

    pub fn add_external(&mut self, vertex: &str, name: &str) -> &mut Self {
        let v = self.vertex_mut(vertex).expect("add_external on a known vertex");
        v.components.push(ComponentRef::External(name.into()));
        self
    }

    /// Adds an edge and appends its component to both endpoints.
    pub fn connect(&mut self, id: &str, a: &str, b: &str, direction: Direction) -> &mut Self {
        for v in [a, b] {
            self.vertex_mut(v).expect("connect on known vertices").components.push(ComponentRef::Edge(id.into()));
        }
        self.edges.push(Edge { id: id.into(), endpoints: [a.into(), b.into()], direction });
        self
    }

    pub fn directed(&mut self, id: &str, from: &str, to: &str) -> &mut Self {
        self.connect(id, from, to, Direction::Directed { from: from.into(), to: to.into() })
    }

    pub fn undirected(&mut self, id: &str, a: &str, b: &str) -> &mut Self {
        self.connect(id, a, b, Direction::Undirected)
    }

    pub fn vertex(&self, id: &str) -> Option<&Vertex> {
        self.vertices.iter().find(|v| v.id == id)
    }

    pub fn vertex_mut(&mut self, id: &str) -> Option<&mut Vertex> {
        self.vertices.iter_mut().find(|v| v.id == id)
    }

    pub fn edge(&self, id: &str) -> Option<&Edge> {
        self.edges.iter().find(|e| e.id == id)
    }

    pub fn edge_mut(&mut self, id: &str) -> Option<&mut Edge> {
        self.edges.iter_mut().find(|e| e.id == id)
    }

    pub fn atom_value(&self, name: &str) -> Option<f64> {
        self.atoms.iter().find(|a| a.name == name).map(|a| a.value)
    }

    pub fn vertex_ids(&self) -> BTreeSet<VertexId> {
        self.vertices.iter().map(|v| v.id.clone()).collect()
    }

    pub fn edge_ids(&self) -> BTreeSet<EdgeId> {
        self.edges.iter().map(|e| e.id.clone()).collect()
    }

    /// External component name to host vertex. Later duplicates are ignored (validate reports them).
    pub fn externals(&self) -> BTreeMap<String, VertexId> {
        let mut out = BTreeMap::new();
        for v in &self.vertices {
            for name in v.externals() {
                out.entry(name.to_string()).or_insert_with(|| v.id.clone());
            }
        }
        out
    }

    pub fn host_of(&self, external: &str) -> Option<&Vertex> {
        self.vertices.iter().find(|v| v.externals().any(|n| n == external))
    }

    pub fn adjacency(&self) -> BTreeMap<VertexId, Vec<(EdgeId, VertexId)>> {
        let mut adj: BTreeMap<VertexId, Vec<(EdgeId, VertexId)>> =
            self.vertices.iter().map(|v| (v.id.clone(), Vec::new())).collect();
        for e in &self.edges {
            let [a, b] = &e.endpoints;
            if let Some(l) = adj.get_mut(a) {
                l.push((e.id.clone(), b.clone()));
            }
            if let Some(l) = adj.get_mut(b) {
                l.push((e.id.clone(), a.clone()));
            }
        }
        for l in adj.values_mut() {
            l.sort();
        }
        adj
    }

    pub fn incident_edges(&self, v: &str) -> Vec<&Edge> {
        self.edges.iter().filter(|e| e.touches(v)).collect()
    }

    /// Vertices reachable from `start` without crossing any edge in `avoid`.
    pub fn reach(&self, start: &str, avoid: &BTreeSet<EdgeId>) -> BTreeSet<VertexId> {
        let adj = self.adjacency();
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([start.to_string()]);
        seen.insert(start.to_string());
        while let Some(v) = queue.pop_front() {
            for (e, w) in adj.get(&v).map(|l| l.as_slice()).unwrap_or(&[]) {
                if !avoid.contains(e) && seen.insert(w.clone()) {
                    queue.push_back(w.clone());
                }
            }
        }
        seen
    }

    /// The vertices on `v`'s side of `edge`.
    pub fn side_of(&self, edge: &str, v: &str) -> BTreeSet<VertexId> {
        self.reach(v, &BTreeSet::from([edge.to_string()]))
    }

    pub fn connected_components(&self) -> Vec<BTreeSet<VertexId>> {
        let mut left = self.vertex_ids();
        let mut out = Vec::new();
        while let Some(v) = left.iter().next().cloned() {
            let comp = self.reach(&v, &BTreeSet::new());
            for w in &comp {
                left.remove(w);
            }
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components().len() <= 1
    }

    pub fn kind(&self) -> GraphKind {
        if self.vertices.is_empty() {
            GraphKind::Empty
        } else if !self.is_connected() {
            GraphKind::Split
        } else if self.externals().len() == 1 {
            GraphKind::Knot
        } else {
            GraphKind::Link
        }
    }

    /// The subgraph induced on `keep`, with atoms pruned to those still referenced.
    pub fn induced(&self, keep: &BTreeSet<VertexId>) -> CompanionshipGraph {
        let vertices: Vec<Vertex> = self.vertices.iter().filter(|v| keep.contains(&v.id)).cloned().collect();
        let edges: Vec<Edge> = self
            .edges
            .iter()
            .filter(|e| keep.contains(&e.endpoints[0]) && keep.contains(&e.endpoints[1]))
            .cloned()
            .collect();
        let used: BTreeSet<&str> = vertices.iter().filter_map(|v| v.geometry.atom()).collect();
        let atoms = self.atoms.iter().filter(|a| used.contains(a.name.as_str())).cloned().collect();
        CompanionshipGraph { atoms, vertices, edges }.canonical()
    }

    /// Sorted atoms, vertices and edges; component order inside a vertex is kept.
    pub fn canonical(mut self) -> Self {
        self.atoms.sort_by(|a, b| a.name.cmp(&b.name));
        self.vertices.sort_by(|a, b| a.id.cmp(&b.id));
        self.edges.sort_by(|a, b| a.id.cmp(&b.id));
        self
    }

    /// Directs every edge having a side without external components away from that side.
    /// Such a side is a nontrivial knot exterior, so the other side is the solid torus.
    pub fn normalize_directions(&mut self) {
        let externals = self.externals();
        if externals.is_empty() {
            return;
        }
        let hosts: BTreeSet<VertexId> = externals.values().cloned().collect();
        let updates: Vec<(usize, Direction)> = self
            .edges
            .iter()
            .enumerate()
            .filter_map(|(i, e)| {
                let [a, b] = &e.endpoints;
                let side_a = self.side_of(&e.id, a);
                let side_b = self.side_of(&e.id, b);
                let a_free = side_a.is_disjoint(&hosts);
                let b_free = side_b.is_disjoint(&hosts);
                match (a_free, b_free) {
                    (true, false) => Some((i, Direction::Directed { from: a.clone(), to: b.clone() })),
                    (false, true) => Some((i, Direction::Directed { from: b.clone(), to: a.clone() })),
                    _ => None,
                }
            })
            .collect();
        for (i, d) in updates {
            self.edges[i].direction = d;
        }
    }
}

/// Returns the vertex carrying the unique external component.
pub fn root_of(graph: &CompanionshipGraph) -> Result<VertexId, GraphError> {
    let ext = graph.externals();
    if ext.len() != 1 {
        return Err(GraphError::NotAKnotGraph(format!("{} external components", ext.len())));
    }
    if let Some(e) = graph.edges.iter().find(|e| !e.is_directed()) {
        return Err(GraphError::NotAKnotGraph(format!("edge {} is undirected", e.id)));
    }
    Ok(ext.into_values().next().expect("one external"))
}

pub fn linking_number(vertex: &Vertex, a: &ComponentRef, b: &ComponentRef) -> Result<i64, GraphError> {
    let pos = |c: &ComponentRef| {
        vertex
            .position(c)
            .ok_or_else(|| GraphError::UnknownComponent { vertex: vertex.id.clone(), component: c.to_string() })
    };
    let (i, j) = (pos(a)?, pos(b)?);
    if i == j {
        return Err(GraphError::SameComponent);
    }
    vertex.model.as_ref().and_then(|m| m.linking(i, j)).ok_or_else(|| GraphError::NoLinkingData(vertex.id.clone()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    DuplicateId,
    AtomValue,
    UnknownAtom,
    EdgeEndpoints,
    ComponentHousing,
    ExternalHousing,
    NameClash,
    ModelShape,
    GeometryModel,
    Forest,
    EdgeDirection,
    UndirectedUnknotted,
    Winding,
    // action rules
    Permutation,
    Incidence,
    DirectionPreserved,
    ExternalSign,
    ExternalVertexFixed,
    FixedEdgeEndpoints,
    SignProduct,
    SignAnnotation,
    UniqueFixedVertex,
    LocalOrder,
    MirrorLabel,
    LinkingZero,
}

impl Rule {
    pub fn clause(self) -> &'static str {
        match self {
            Rule::DuplicateId => "ids of atoms, vertices and edges are unique",
            Rule::AtomValue => "volume atoms are positive and finite",
            Rule::UnknownAtom => "hyperbolic vertices reference a declared atom",
            Rule::EdgeEndpoints => "edges join two distinct known vertices",
            Rule::ComponentHousing => "each edge appears as a component exactly at its two endpoints",
            Rule::ExternalHousing => "each external component lives at exactly one vertex",
            Rule::NameClash => "external names differ from edge ids",
            Rule::ModelShape => "vertex models are well formed and match the component count",
            Rule::GeometryModel => "hyperbolic geometry agrees with the model",
            Rule::Forest => "every connected component is a tree",
            Rule::EdgeDirection => "an edge with no external component on one side points away from that side",
            Rule::UndirectedUnknotted => "undirected edges glue unknotted components",
            Rule::Winding => "winding data refers to edge components of the vertex",
            Rule::Permutation => "vertex and edge maps are permutations of the graph's ids",
            Rule::Incidence => "the edge map carries endpoints to endpoints",
            Rule::DirectionPreserved => "the action preserves edge directions",
            Rule::ExternalSign => "every external component is fixed and carries a sign",
            Rule::ExternalVertexFixed => "vertices carrying external components are fixed",
            Rule::FixedEdgeEndpoints => "fixed edges have fixed endpoints",
            Rule::SignProduct => "the two endpoint signs of a fixed edge multiply to -1",
            Rule::SignAnnotation => "exactly the fixed edges carry endpoint signs",
            Rule::UniqueFixedVertex => {
                "with no fixed edge there is exactly one fixed vertex and it carries every external"
            }
            Rule::LocalOrder => "local orders are declared only on fixed hyperbolic vertices",
            Rule::MirrorLabel => "the action carries each model to the mirror of its image",
            Rule::LinkingZero => "two reversed components at a fixed vertex have linking number 0",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: Rule,
    pub subject: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub kind: GraphKind,
    pub violations: Vec<Violation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, rule: Rule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }

    pub(crate) fn push(&mut self, rule: Rule, subject: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation { rule, subject: subject.into(), message: message.into() });
    }
}

pub fn validate(graph: &CompanionshipGraph) -> ValidationReport {
    let mut r = ValidationReport { kind: graph.kind(), violations: Vec::new(), notes: Vec::new() };

    let mut seen = BTreeSet::new();
    for a in &graph.atoms {
        if !seen.insert(a.name.clone()) {
            r.push(Rule::DuplicateId, &a.name, "duplicate atom name");
        }
        if !(a.value.is_finite() && a.value > 0.0) {
            r.push(Rule::AtomValue, &a.name, format!("atom value {} is not positive", a.value));
        }
    }
    let mut vseen = BTreeSet::new();
    for v in &graph.vertices {
        if !vseen.insert(v.id.clone()) {
            r.push(Rule::DuplicateId, &v.id, "duplicate vertex id");
        }
    }
    let mut eseen = BTreeSet::new();
    for e in &graph.edges {
        if !eseen.insert(e.id.clone()) {
            r.push(Rule::DuplicateId, &e.id, "duplicate edge id");
        }
        let [a, b] = &e.endpoints;
        if a == b {
            r.push(Rule::EdgeEndpoints, &e.id, "edge is a loop");
        }
        for x in [a, b] {
            if !vseen.contains(x) {
                r.push(Rule::EdgeEndpoints, &e.id, format!("unknown endpoint {x}"));
            }
        }
        if let Direction::Directed { from, to } = &e.direction {
            if !((from == a && to == b) || (from == b && to == a)) {
                r.push(Rule::EdgeEndpoints, &e.id, "direction does not match the endpoints");
            }
        }
    }

    // component housing
    let mut external_count: BTreeMap<&str, usize> = BTreeMap::new();
    for v in &graph.vertices {
        if let Geometry::Hyperbolic(atom) = &v.geometry {
            if graph.atom_value(atom).is_none() {
                r.push(Rule::UnknownAtom, &v.id, format!("atom {atom} is not declared"));
            }
        }
        let mut local = BTreeSet::new();
        for c in &v.components {
            if !local.insert(c) {
                r.push(Rule::ComponentHousing, &v.id, format!("component {c} listed twice"));
            }
            match c {
                ComponentRef::External(n) => {
                    *external_count.entry(n).or_default() += 1;
                    if eseen.contains(n) {
                        r.push(Rule::NameClash, &v.id, format!("external {n} shares an edge id"));
                    }
                }
                ComponentRef::Edge(id) => match graph.edge(id) {
                    None => r.push(Rule::ComponentHousing, &v.id, format!("unknown edge {id}")),
                    Some(e) if !e.touches(&v.id) => {
                        r.push(Rule::ComponentHousing, &v.id, format!("edge {id} does not touch this vertex"))
                    }
                    _ => {}
                },
            }
        }
        for e in v.winding.keys() {
            if !v.components.contains(&ComponentRef::Edge(e.clone())) {
                r.push(Rule::Winding, &v.id, format!("winding for {e}, which is not a component here"));
            }
        }
        if let Some(m) = &v.model {
            for p in m.shape_problems() {
                r.push(Rule::ModelShape, &v.id, p);
            }
            if m.component_count() != v.components.len() {
                r.push(
                    Rule::ModelShape,
                    &v.id,
                    format!("model has {} components, vertex has {}", m.component_count(), v.components.len()),
                );
            }
            if v.geometry.is_hyperbolic() != m.is_hyperbolic() {
                r.push(Rule::GeometryModel, &v.id, "geometry and model disagree on hyperbolicity");
            }
        }
    }
    for (n, c) in external_count {
        if c > 1 {
            r.push(Rule::ExternalHousing, n, format!("external appears {c} times"));
        }
    }
    for e in &graph.edges {
        for x in &e.endpoints {
            if let Some(v) = graph.vertex(x) {
                if !v.components.contains(&ComponentRef::Edge(e.id.clone())) {
                    r.push(Rule::ComponentHousing, &e.id, format!("endpoint {x} lacks the edge component"));
                }
            }
        }
    }

    let structural_ok = r.violations.is_empty();
    let comps = graph.connected_components();
    if graph.edges.len() + comps.len() != graph.vertices.len() {
        r.push(Rule::Forest, "graph", "some connected component contains a cycle");
    }
    if !structural_ok || r.has(Rule::Forest) {
        return r;
    }

    let hosts: BTreeSet<VertexId> = graph.externals().into_values().collect();
    for e in &graph.edges {
        let [a, b] = &e.endpoints;
        let side_a = graph.side_of(&e.id, a);
        let side_b = graph.side_of(&e.id, b);
        let a_free = side_a.is_disjoint(&hosts);
        let b_free = side_b.is_disjoint(&hosts);
        let wanted = match (a_free, b_free) {
            (true, false) => Some((a, b)),
            (false, true) => Some((b, a)),
            _ => None,
        };
        if let Some((from, to)) = wanted {
            let ok = matches!(&e.direction, Direction::Directed { from: f, to: t } if f == from && t == to);
            if !ok {
                r.push(
                    Rule::EdgeDirection,
                    &e.id,
                    format!("the side of {from} carries no external component, so the edge must point {from}->{to}"),
                );
            }
        }
        if e.direction == Direction::Undirected {
            for x in [a, b] {
                let v = graph.vertex(x).expect("endpoint checked");
                if let Some(m) = &v.model {
                    let i = v.position(&ComponentRef::Edge(e.id.clone())).expect("housing checked");
                    if m.unknotted(i) != Some(true) {
                        r.push(Rule::UndirectedUnknotted, &e.id, format!("component at {x} is not flagged unknotted"));
                    }
                }
            }
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hyp(id: &str) -> Vertex {
        Vertex::new(id, Geometry::Hyperbolic("v41".into()))
    }

    #[test]
    fn single_seifert_vertex_is_a_knot_graph() {
        let mut g = CompanionshipGraph::new();
        g.add_vertex(Vertex::new("v", Geometry::Seifert)).add_external("v", "K");
        let r = validate(&g);
        assert!(r.is_valid(), "{:?}", r);
        assert_eq!(r.kind, GraphKind::Knot);
        assert_eq!(root_of(&g).unwrap(), "v");
    }

    #[test]
    fn parallel_edges_are_not_a_tree() {
        let mut g = CompanionshipGraph::new().with_atom("v41", 2.029883213);
        g.add_vertex(hyp("a")).add_vertex(hyp("b")).add_external("b", "K");
        g.directed("e1", "a", "b").directed("e2", "a", "b");
        assert!(validate(&g).has(Rule::Forest));
    }

    #[test]
    fn json_round_trip_and_unknown_fields() {
        let mut g = CompanionshipGraph::new().with_atom("v41", 2.029883213);
        g.add_vertex(hyp("a")).add_vertex(Vertex::new("b", Geometry::Seifert).with_model(ModelLink::KeyChain { n: 1 }));
        g.add_external("b", "K");
        g.directed("e", "a", "b");
        g.add_vertex(Vertex::new("c", Geometry::Seifert));
        let s = g.to_json();
        assert_eq!(CompanionshipGraph::from_json(&s).unwrap(), g);
        let bad = s.replacen("\"atoms\"", "\"extra\": 1, \"atoms\"", 1);
        assert!(CompanionshipGraph::from_json(&bad).is_err());
        let text = r#"{"vertices":[{"id":"v","geometry":"seifert","components":[{"external":"K"}],
            "model":{"seifert":{"p":2,"q":3}}}],"edges":[]}"#;
        let g2 = CompanionshipGraph::from_json(text).unwrap();
        assert!(validate(&g2).is_valid());
        let undirected = r#"{"vertices":[],"edges":[{"id":"e","endpoints":["a","b"],"direction":"undirected"}]}"#;
        assert_eq!(CompanionshipGraph::from_json(undirected).unwrap().edges[0].direction, Direction::Undirected);
    }

    #[test]
    fn linking_numbers_follow_the_models() {
        let mut v = Vertex::new("k", Geometry::Seifert).with_model(ModelLink::KeyChain { n: 3 });
        v.components = vec![
            ComponentRef::External("C".into()),
            ComponentRef::Edge("r1".into()),
            ComponentRef::Edge("r2".into()),
            ComponentRef::Edge("r3".into()),
        ];
        let c = |s: &str| ComponentRef::Edge(s.into());
        assert_eq!(linking_number(&v, &ComponentRef::External("C".into()), &c("r2")), Ok(1));
        assert_eq!(linking_number(&v, &c("r1"), &c("r3")), Ok(0));
        assert_eq!(linking_number(&v, &c("r3"), &c("r1")), Ok(0));

        let mut s = Vertex::new("s", Geometry::Seifert).with_model(ModelLink::Seifert {
            p: 3,
            q: 4,
            x: [Star::Star1, Star::Star2].into(),
        });
        s.components = vec![c("s1"), c("s2"), c("s3")];
        assert_eq!(linking_number(&s, &c("s1"), &c("s2")), Ok(3));
        assert_eq!(linking_number(&s, &c("s3"), &c("s1")), Ok(4));
        assert_eq!(linking_number(&s, &c("s2"), &c("s3")), Ok(1));

        let bare = Vertex { model: None, ..s };
        assert_eq!(linking_number(&bare, &c("s1"), &c("s2")), Err(GraphError::NoLinkingData("s".into())));
    }

    #[test]
    fn knot_graph_edges_must_point_to_the_root() {
        let mut g = CompanionshipGraph::new().with_atom("v41", 2.029883213);
        g.add_vertex(hyp("a")).add_vertex(hyp("b")).add_external("b", "K");
        g.directed("e", "b", "a");
        assert!(validate(&g).has(Rule::EdgeDirection));
        g.edges[0].direction = Direction::Undirected;
        assert!(validate(&g).has(Rule::EdgeDirection));
        assert!(matches!(root_of(&g), Err(GraphError::NotAKnotGraph(_))));
        g.normalize_directions();
        assert!(validate(&g).is_valid());
        assert_eq!(root_of(&g).unwrap(), "b");
    }

    #[test]
    fn seifert_gcd_and_undirected_flags() {
        let mut g = CompanionshipGraph::new();
        g.add_vertex(Vertex::new("v", Geometry::Seifert).with_model(ModelLink::Seifert {
            p: 2,
            q: 4,
            x: BTreeSet::new(),
        }));
        g.add_external("v", "K");
        assert!(validate(&g).has(Rule::ModelShape));

        let mut g = CompanionshipGraph::new();
        let m = ModelLink::Seifert { p: 2, q: 3, x: [Star::Star1].into() };
        g.add_vertex(Vertex::new("a", Geometry::Seifert).with_model(m.clone()));
        g.add_vertex(Vertex::new("b", Geometry::Seifert).with_model(m));
        // S1 of each side is a trefoil, knotted.
        g.undirected("e", "a", "b");
        g.add_external("a", "x").add_external("b", "y");
        assert!(validate(&g).has(Rule::UndirectedUnknotted));
    }
}
