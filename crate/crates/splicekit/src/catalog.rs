//! Named example graphs with their expected analyses, plus the Fox–Milnor factor test.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coherence::{check_fibered_consistency, decide_structure, Structure};
use crate::complexity::{complexity, tolerance};
use crate::engine::{analyze_knot, analyze_link, check_elementary, replay, FixedSet, Verdict, VerdictKind};
use crate::graph::{CompanionshipGraph, ComponentRef, Geometry, ModelLink, NamedModel, Star, Vertex};
use crate::ops::{splice, OpsError, SpliceDirection};
use crate::symmetry::{validate_action, AmphichiralAction, Sign};

pub const VOL_FIGURE_EIGHT: f64 = 2.029883213;
pub const VOL_WHITEHEAD: f64 = 3.663862377;
pub const VOL_BORROMEAN: f64 = 7.327724753;
/// Stand-in volume for hyperbolic pieces whose volume is not catalogued.
pub const PLACEHOLDER_VOLUME: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CatalogError {
    #[error("polynomial {0} is not symmetric")]
    NotSymmetric(String),
    #[error("polynomial is zero")]
    Zero,
    #[error("no Alexander polynomial annotated for {0}")]
    MissingAnnotation(String),
}

/// Integer polynomial in t, coefficients in ascending powers; read up to units ±t^k.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntPolynomial {
    pub coeffs: Vec<i64>,
}

impl IntPolynomial {
    pub fn new(coeffs: Vec<i64>) -> Self {
        IntPolynomial { coeffs }
    }

    pub fn one() -> Self {
        IntPolynomial { coeffs: vec![1] }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0)
    }

    /// Strips zero coefficients at both ends (division by a power of t).
    pub fn normalized(&self) -> Self {
        let Some(first) = self.coeffs.iter().position(|c| *c != 0) else {
            return IntPolynomial { coeffs: vec![] };
        };
        let last = self.coeffs.iter().rposition(|c| *c != 0).expect("nonzero");
        IntPolynomial { coeffs: self.coeffs[first..=last].to_vec() }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn mul(&self, other: &IntPolynomial) -> IntPolynomial {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return IntPolynomial { coeffs: vec![] };
        }
        let mut out = vec![0i64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPolynomial { coeffs: out }
    }

    /// t^deg · p(1/t).
    pub fn reversed(&self) -> IntPolynomial {
        let mut c = self.coeffs.clone();
        c.reverse();
        IntPolynomial { coeffs: c }
    }

    /// p(t^w); a negative `w` is read up to units.
    pub fn substitute_power(&self, w: i64) -> IntPolynomial {
        if w == 0 {
            return IntPolynomial { coeffs: vec![self.coeffs.iter().sum()] };
        }
        let step = w.unsigned_abs() as usize;
        let mut out = vec![0; self.degree() * step + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i * step] = *c;
        }
        let p = IntPolynomial { coeffs: out };
        if w < 0 {
            p.reversed()
        } else {
            p
        }
    }

    /// Palindromic after normalization.
    pub fn is_symmetric(&self) -> bool {
        let n = self.normalized();
        n.coeffs.iter().eq(n.coeffs.iter().rev())
    }

    /// Equality up to multiplication by ±t^k.
    pub fn same_up_to_units(&self, other: &IntPolynomial) -> bool {
        let (a, b) = (self.normalized(), other.normalized());
        a == b || a.coeffs.iter().zip(&b.coeffs).all(|(x, y)| *x == -*y) && a.coeffs.len() == b.coeffs.len()
    }
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c == 0 {
                continue;
            }
            let sign = if *c < 0 {
                "-"
            } else if first {
                ""
            } else {
                "+"
            };
            let mag = c.unsigned_abs();
            let body = match (i, mag) {
                (0, m) => m.to_string(),
                (1, 1) => "t".into(),
                (1, m) => format!("{m}t"),
                (k, 1) => format!("t^{k}"),
                (k, m) => format!("{m}t^{k}"),
            };
            write!(f, "{sign}{body}")?;
            first = false;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum FoxMilnor {
    Satisfiable {
        f: IntPolynomial,
    },
    /// No factorization exists. The search is exhaustive, so this is unconditional.
    NotSatisfiable,
}

/// Looks for an integer f with poly = ±t^k f(t) f(1/t).
///
/// The middle coefficient of f(t)f(1/t) is the sum of squares of the coefficients of f, which
/// bounds the search completely.
pub fn fox_milnor_factor(poly: &IntPolynomial) -> Result<FoxMilnor, CatalogError> {
    if poly.is_zero() {
        return Err(CatalogError::Zero);
    }
    if !poly.is_symmetric() {
        return Err(CatalogError::NotSymmetric(poly.to_string()));
    }
    let p = poly.normalized();
    if p.coeffs.len().is_multiple_of(2) {
        return Ok(FoxMilnor::NotSatisfiable);
    }
    let d = p.degree() / 2;
    let middle = p.coeffs[d];
    // the middle coefficient of f f̄ is positive, so the unit's sign is that of `middle`
    let s = middle.signum();
    if s == 0 {
        return Ok(FoxMilnor::NotSatisfiable);
    }
    let target: Vec<i64> = p.coeffs.iter().map(|c| c * s).collect();
    let budget = middle.abs();
    let end = target[0];

    if d == 0 {
        let r = (budget as f64).sqrt().round() as i64;
        return Ok(if r * r == budget {
            FoxMilnor::Satisfiable { f: IntPolynomial::new(vec![r]) }
        } else {
            FoxMilnor::NotSatisfiable
        });
    }

    fn fill(a: &mut Vec<i64>, i: usize, d: usize, left: i64, target: &[i64]) -> bool {
        if i == d {
            if left != 0 {
                return false;
            }
            let f = IntPolynomial::new(a.clone());
            return f.mul(&f.reversed()).coeffs == target;
        }
        let r = (left as f64).sqrt().floor() as i64;
        for x in -r..=r {
            a[i] = x;
            if fill(a, i + 1, d, left - x * x, target) {
                return true;
            }
        }
        a[i] = 0;
        false
    }

    // f and -f give the same product, so a0 > 0; a0 * ad must equal the end coefficient
    for a0 in 1..=end.abs() {
        if end % a0 != 0 {
            continue;
        }
        let ad = end / a0;
        let left = budget - a0 * a0 - ad * ad;
        if left < 0 {
            continue;
        }
        let mut a = vec![0; d + 1];
        a[0] = a0;
        a[d] = ad;
        if fill(&mut a, 1, d, left, &target) {
            return Ok(FoxMilnor::Satisfiable { f: IntPolynomial::new(a) });
        }
    }
    Ok(FoxMilnor::NotSatisfiable)
}

/// One companion knot contributing to a satellite's Alexander polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contribution {
    pub name: String,
    pub winding: i64,
    pub polynomial: Option<IntPolynomial>,
}

/// Product of the root polynomial and each Δ_i(t^{w_i}). Companions with winding 0 contribute 1
/// and need no annotation.
pub fn alexander_of_splice(root: &IntPolynomial, parts: &[Contribution]) -> Result<IntPolynomial, CatalogError> {
    let mut out = root.clone();
    for c in parts {
        if c.winding == 0 {
            continue;
        }
        let p = c.polynomial.as_ref().ok_or_else(|| CatalogError::MissingAnnotation(c.name.clone()))?;
        out = out.mul(&p.substitute_power(c.winding));
    }
    Ok(out.normalized())
}

pub fn alexander_trefoil() -> IntPolynomial {
    IntPolynomial::new(vec![1, -1, 1])
}

pub fn alexander_figure_eight() -> IntPolynomial {
    IntPolynomial::new(vec![-1, 3, -1])
}

fn named(name: &str, flags: &[bool], linking: Vec<Vec<i64>>, amphichiral: Option<bool>) -> ModelLink {
    ModelLink::Named(NamedModel {
        name: name.into(),
        component_count: flags.len(),
        hyperbolic: true,
        linking_matrix: Some(linking),
        unknotted_flags: flags.to_vec(),
        mirror: false,
        amphichiral,
    })
}

fn zeros(n: usize) -> Vec<Vec<i64>> {
    vec![vec![0; n]; n]
}

pub fn figure_eight_model() -> ModelLink {
    named("4_1", &[false], zeros(1), Some(true))
}

pub fn whitehead_model() -> ModelLink {
    named("Whitehead", &[true, true], zeros(2), None)
}

pub fn borromean_model() -> ModelLink {
    named("Borromean", &[true, true, true], zeros(3), Some(true))
}

fn fig8_vertex(id: &str) -> Vertex {
    Vertex::new(id, Geometry::Hyperbolic("v41".into())).with_model(figure_eight_model())
}

/// A figure-eight knot as a one-vertex graph whose component is reversed (`Minus`) or preserved.
pub fn figure_eight_knot(id: &str, external: &str, sign: Sign) -> (CompanionshipGraph, AmphichiralAction) {
    let mut g = CompanionshipGraph::new().with_atom("v41", VOL_FIGURE_EIGHT);
    g.add_vertex(fig8_vertex(id)).add_external(id, external);
    (g, AmphichiralAction::identity().with_external(external, sign))
}

/// A companion knot to be spliced into a slot of a root vertex.
#[derive(Clone, Debug)]
pub struct Companion {
    pub graph: CompanionshipGraph,
    pub action: AmphichiralAction,
    /// The symmetry of the companion can be chosen to be an involution.
    pub strongly_amphichiral: bool,
    pub alexander: Option<IntPolynomial>,
}

impl Companion {
    pub fn figure_eight(id: &str, sign: Sign) -> Self {
        let (graph, action) = figure_eight_knot(id, "K", sign);
        Companion { graph, action, strongly_amphichiral: true, alexander: Some(alexander_figure_eight()) }
    }
}

fn rename_external(g: &mut CompanionshipGraph, a: &mut AmphichiralAction, old: &str, new: &str) {
    for v in g.vertices.iter_mut() {
        for c in v.components.iter_mut() {
            if *c == ComponentRef::External(old.into()) {
                *c = ComponentRef::External(new.into());
            }
        }
    }
    if let Some(s) = a.external_signs.remove(old) {
        a.external_signs.insert(new.into(), s);
    }
}

/// Splices the single external of `comp` into the external `slot` of `root`; the new edge,
/// named `slot`, points from the companion into the root side.
pub fn splice_companion(
    root: &CompanionshipGraph,
    root_action: &AmphichiralAction,
    slot: &str,
    comp: &Companion,
) -> Result<(CompanionshipGraph, AmphichiralAction), OpsError> {
    let (mut cg, mut ca) = (comp.graph.clone(), comp.action.clone());
    let ext = cg.externals();
    let (name, comp_root) = ext.iter().next().ok_or_else(|| OpsError::ComponentNotExternal(slot.into()))?;
    let (name, comp_root) = (name.clone(), comp_root.clone());
    rename_external(&mut cg, &mut ca, &name, slot);
    let host = root.host_of(slot).ok_or_else(|| OpsError::ComponentNotExternal(slot.into()))?.id.clone();
    let spliced = splice(root, slot, &cg, slot, SpliceDirection::SecondToFirst)?;
    let mut a = root_action.clone();
    a.vertex_perm.extend(ca.vertex_perm);
    a.edge_perm.extend(ca.edge_perm);
    a.edge_signs.extend(ca.edge_signs);
    a.local_orders.extend(ca.local_orders);
    let root_sign = a.external_signs.remove(slot);
    if let (Some(r), Some(c)) = (root_sign, ca.external_signs.get(slot)) {
        a = a.with_signs(slot, (&host, r), (&comp_root, *c));
    }
    Ok((spliced.graph, a))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExpectedOutcome {
    Verdict(Verdict),
    Error { name: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expected {
    /// Use the knot shortcuts.
    pub knot: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<Structure>,
    pub outcome: ExpectedOutcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complexity: Option<(f64, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<String>,
    /// Vertex and fixed set reported by the elementary check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elementary: Option<(String, FixedSet)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fibered_consistent: Option<bool>,
    /// The Alexander polynomial fails the Fox–Milnor condition.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub not_slice: Option<bool>,
}

impl Expected {
    fn knot(outcome: ExpectedOutcome) -> Self {
        Expected {
            knot: true,
            structure: None,
            outcome,
            complexity: None,
            root: None,
            elementary: None,
            fibered_consistent: None,
            not_slice: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub name: String,
    pub graph: CompanionshipGraph,
    pub action: AmphichiralAction,
    pub expected: Expected,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub flags: BTreeMap<String, bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alexander: Option<IntPolynomial>,
    pub notes: String,
}

fn verdict(kind: VerdictKind, kaw_bound: u32) -> ExpectedOutcome {
    ExpectedOutcome::Verdict(Verdict { kind, kaw_bound })
}

fn grp_knot() -> Fixture {
    let mut g = CompanionshipGraph::new().with_atom("v41", VOL_FIGURE_EIGHT).with_atom("vWh", VOL_WHITEHEAD);
    g.add_vertex(Vertex::new("root", Geometry::Seifert).with_model(ModelLink::KeyChain { n: 3 }));
    g.add_external("root", "K");
    g.add_vertex(Vertex::new("trefoil", Geometry::Seifert).with_model(ModelLink::Seifert {
        p: -2,
        q: 3,
        x: Default::default(),
    }));
    g.add_vertex(fig8_vertex("f8"));
    g.add_vertex(Vertex::new("wh", Geometry::Hyperbolic("vWh".into())).with_model(whitehead_model()));
    g.add_vertex(fig8_vertex("f8b"));
    g.directed("e_trefoil", "trefoil", "root")
        .directed("e_f8", "f8", "root")
        .directed("e_wh", "wh", "root")
        .directed("e_f8b", "f8b", "wh");
    let mut a = AmphichiralAction::identity().with_external("K", Sign::Minus);
    for (e, tail, head) in
        [("e_trefoil", "trefoil", "root"), ("e_f8", "f8", "root"), ("e_wh", "wh", "root"), ("e_f8b", "f8b", "wh")]
    {
        a = a.with_signs(e, (head, Sign::Plus), (tail, Sign::Minus));
    }
    let mut expected = Expected::knot(verdict(VerdictKind::StronglyNegAmphichiral, 1));
    expected.structure = Some(Structure::TotallyCoherent);
    expected.complexity = Some((2.0 * VOL_FIGURE_EIGHT + VOL_WHITEHEAD, 5));
    expected.root = Some("root".into());
    Fixture {
        name: "grp_knot".into(),
        graph: g.canonical(),
        action: a,
        expected,
        flags: BTreeMap::new(),
        alexander: None,
        notes: "Connected sum of a trefoil, a figure-eight knot and a twisted Whitehead double of the \
                figure-eight knot. The trefoil is recorded as S(-2,3), the left-handed trefoil; sources \
                disagree on which chirality is meant. The identity action with every edge coherent is \
                used as a combinatorial test only: a chiral trefoil piece cannot be fixed by a genuine \
                amphichiral map, and the validator reports this as a note."
            .into(),
    }
}

fn grp_link() -> Fixture {
    let mut g = CompanionshipGraph::new().with_atom("v41", VOL_FIGURE_EIGHT).with_atom("vWh", VOL_WHITEHEAD);
    g.add_vertex(fig8_vertex("f8"));
    g.add_vertex(Vertex::new("kc", Geometry::Seifert).with_model(ModelLink::KeyChain { n: 2 }));
    g.add_vertex(Vertex::new("wh", Geometry::Hyperbolic("vWh".into())).with_model(whitehead_model()));
    // key chain components: core glued to f8, ring a, ring glued along t
    g.directed("s", "f8", "kc");
    g.add_external("kc", "a");
    g.undirected("t", "kc", "wh");
    g.add_external("wh", "b");
    let a = AmphichiralAction::identity()
        .with_external("a", Sign::Minus)
        .with_external("b", Sign::Minus)
        .with_signs("s", ("kc", Sign::Plus), ("f8", Sign::Minus))
        .with_signs("t", ("kc", Sign::Minus), ("wh", Sign::Plus));
    let mut expected = Expected::knot(verdict(VerdictKind::RationallySlice, 2));
    expected.knot = false;
    expected.complexity = Some((VOL_FIGURE_EIGHT + VOL_WHITEHEAD, 3));
    Fixture {
        name: "grp_link".into(),
        graph: g.canonical(),
        action: a,
        expected,
        flags: BTreeMap::new(),
        alexander: None,
        notes: "Two-component link: a figure-eight companion on the core of a three-component key chain, \
                whose last ring is spliced to a Whitehead link along an undirected edge. The signs are a \
                reconstruction chosen to exercise Cases 2.a and 2.b; the expected bound 2 is the hand \
                replay 1 (companion) + 0 (key chain side) + 1 (Whitehead side)."
            .into(),
    }
}

fn max_special() -> Fixture {
    let mut g = CompanionshipGraph::new()
        .with_atom("v41", VOL_FIGURE_EIGHT)
        .with_atom("vWh", VOL_WHITEHEAD)
        .with_atom("vBorr", VOL_BORROMEAN);
    g.add_vertex(Vertex::new("r", Geometry::Seifert).with_model(ModelLink::KeyChain { n: 2 }));
    g.add_external("r", "K");
    g.add_vertex(Vertex::new("a", Geometry::Hyperbolic("vWh".into())).with_model(whitehead_model()));
    g.add_vertex(Vertex::new("w", Geometry::Hyperbolic("vBorr".into())).with_model(borromean_model()));
    for v in ["d", "b", "c"] {
        g.add_vertex(fig8_vertex(v));
    }
    g.directed("e1", "a", "r").directed("e2", "w", "r").directed("e5", "d", "a");
    g.directed("e3", "b", "w").directed("e4", "c", "w");
    let mut a = AmphichiralAction::identity().with_external("K", Sign::Minus);
    for (e, tail, head) in [("e1", "a", "r"), ("e2", "w", "r"), ("e5", "d", "a")] {
        a = a.with_signs(e, (head, Sign::Plus), (tail, Sign::Minus));
    }
    for (e, tail, head) in [("e3", "b", "w"), ("e4", "c", "w")] {
        a = a.with_signs(e, (head, Sign::Minus), (tail, Sign::Plus));
    }
    let mut expected = Expected::knot(verdict(
        VerdictKind::ConcordantToSnack { j0: ["a", "d", "r"].iter().map(|s| s.to_string()).collect() },
        1,
    ));
    expected.structure = Some(Structure::ProperlyIncoherent);
    Fixture {
        name: "max_special".into(),
        graph: g.canonical(),
        action: a,
        expected,
        flags: BTreeMap::new(),
        alexander: None,
        notes: "Every edge fixed. r, a, d form the maximal coherent subtree; w is fixed with one coherent \
                and two incoherent edges, so it is neither coherent nor incoherent, but it is incoherent \
                as the root of its own piece. Models are illustrative."
            .into(),
    }
}

/// The weakly amphichiral candidate with a four-component hyperbolic root and three companions.
/// K1 must be negative amphichiral (sign -1), K2 and K3 positive amphichiral (sign +1).
pub fn cand1_with(companions: [Companion; 3]) -> Result<Fixture, OpsError> {
    let mut g = CompanionshipGraph::new().with_atom("vL", PLACEHOLDER_VOLUME);
    let mut lk = zeros(4);
    lk[0][1] = 1;
    lk[1][0] = 1;
    let mut v = Vertex::new("v", Geometry::Hyperbolic("vL".into())).with_model(named(
        "L(*,1,2,3)",
        &[false, true, true, true],
        lk,
        None,
    ));
    v.winding = [("T1", 1), ("T2", 0), ("T3", 0)].iter().map(|(e, w)| (e.to_string(), *w)).collect();
    g.add_vertex(v);
    for n in ["K", "T1", "T2", "T3"] {
        g.add_external("v", n);
    }
    let mut a = AmphichiralAction::identity()
        .with_external("K", Sign::Minus)
        .with_external("T1", Sign::Plus)
        .with_external("T2", Sign::Minus)
        .with_external("T3", Sign::Minus);
    a.local_orders.insert("v".into(), 2);
    let strongly = companions.iter().all(|c| c.strongly_amphichiral);
    let parts: Vec<Contribution> = companions
        .iter()
        .zip([1, 0, 0])
        .enumerate()
        .map(|(i, (c, w))| Contribution { name: format!("K{}", i + 1), winding: w, polynomial: c.alexander.clone() })
        .collect();
    for (i, c) in companions.iter().enumerate() {
        (g, a) = splice_companion(&g, &a, &format!("T{}", i + 1), c)?;
    }
    // the distinguished component is T(2,3) # mirror T(2,3)
    let root_poly = alexander_trefoil().mul(&alexander_trefoil());
    let alexander = alexander_of_splice(&root_poly, &parts).ok();
    let mut expected = Expected::knot(verdict(VerdictKind::RationallySlice, 1));
    expected.structure = Some(Structure::Neither);
    expected.root = Some("v".into());
    expected.fibered_consistent = Some(true);
    expected.not_slice = alexander.as_ref().map(|p| fox_milnor_factor(p) == Ok(FoxMilnor::NotSatisfiable));
    Ok(Fixture {
        name: "cand1".into(),
        graph: g.canonical(),
        action: a,
        expected,
        flags: BTreeMap::from([("companions_strongly_amphichiral".to_string(), strongly)]),
        alexander,
        notes: "Root link L indexed by *, 1, 2, 3 with the reflection reversing *, 2, 3 and preserving 1. \
                Its volume is a placeholder. The reflection is taken to be the only symmetry of L; this \
                is recorded, not recomputed. The bound comes from cutting T1: the remaining knot has an \
                incoherent root."
            .into(),
    })
}

pub fn cand1() -> Fixture {
    cand1_with([
        Companion::figure_eight("k1", Sign::Minus),
        Companion::figure_eight("k2", Sign::Plus),
        Companion::figure_eight("k3", Sign::Plus),
    ])
    .expect("static fixture")
}

/// The topologically slice candidate with a Borromean root.
pub fn cand2_with(companions: [Companion; 2]) -> Result<Fixture, OpsError> {
    let mut g = CompanionshipGraph::new().with_atom("vBorr", VOL_BORROMEAN);
    g.add_vertex(Vertex::new("v", Geometry::Hyperbolic("vBorr".into())).with_model(borromean_model()));
    for n in ["K", "T1", "T2"] {
        g.add_external("v", n);
    }
    let mut a = AmphichiralAction::identity()
        .with_external("K", Sign::Minus)
        .with_external("T1", Sign::Plus)
        .with_external("T2", Sign::Minus);
    let strongly = companions.iter().all(|c| c.strongly_amphichiral);
    for (i, c) in companions.iter().enumerate() {
        (g, a) = splice_companion(&g, &a, &format!("T{}", i + 1), c)?;
    }
    let mut expected = Expected::knot(verdict(VerdictKind::RationallySlice, 1));
    expected.structure = Some(Structure::Neither);
    expected.root = Some("v".into());
    Ok(Fixture {
        name: "cand2".into(),
        graph: g.canonical(),
        action: a,
        expected,
        flags: BTreeMap::from([("companions_strongly_amphichiral".to_string(), strongly)]),
        alexander: Some(IntPolynomial::one()),
        notes: "Borromean root with the reflection reversing * and 2 and preserving 1. The Alexander \
                polynomial is trivial, so the knot is topologically slice."
            .into(),
    })
}

pub fn cand2() -> Fixture {
    cand2_with([Companion::figure_eight("k1", Sign::Minus), Companion::figure_eight("k2", Sign::Plus)])
        .expect("static fixture")
}

fn hopf_keychain() -> Fixture {
    let mut g = CompanionshipGraph::new();
    g.add_vertex(Vertex::new("h", Geometry::Seifert).with_model(ModelLink::KeyChain { n: 1 }));
    g.add_external("h", "core").add_external("h", "ring");
    let a = AmphichiralAction::identity().with_external("core", Sign::Plus).with_external("ring", Sign::Minus);
    let mut expected = Expected::knot(ExpectedOutcome::Error { name: "PositiveComponentPresent".into() });
    expected.knot = false;
    expected.elementary = Some(("h".into(), FixedSet::S0));
    Fixture {
        name: "hopf_keychain".into(),
        graph: g,
        action: a,
        expected,
        flags: BTreeMap::new(),
        alexander: None,
        notes: "Hopf link with the core preserved and the ring reversed: the key chain branch of the \
                elementary check, with an involution fixing two points. The link analysis refuses it \
                because a component is preserved."
            .into(),
    }
}

fn keychain_swap() -> Fixture {
    let mut g = CompanionshipGraph::new().with_atom("v41", VOL_FIGURE_EIGHT);
    g.add_vertex(Vertex::new("r", Geometry::Seifert).with_model(ModelLink::KeyChain { n: 2 }));
    g.add_external("r", "K");
    g.add_vertex(fig8_vertex("x1")).add_vertex(fig8_vertex("x2"));
    g.directed("e1", "x1", "r").directed("e2", "x2", "r");
    let mut a = AmphichiralAction::identity().with_external("K", Sign::Minus);
    a.vertex_perm = [("x1", "x2"), ("x2", "x1")].iter().map(|(x, y)| (x.to_string(), y.to_string())).collect();
    a.edge_perm = [("e1", "e2"), ("e2", "e1")].iter().map(|(x, y)| (x.to_string(), y.to_string())).collect();
    let mut expected = Expected::knot(verdict(VerdictKind::StronglyNegAmphichiral, 1));
    expected.structure = Some(Structure::TotallyCoherent);
    expected.root = Some("r".into());
    Fixture {
        name: "keychain_swap".into(),
        graph: g.canonical(),
        action: a,
        expected,
        flags: BTreeMap::new(),
        alexander: None,
        notes: "Two figure-eight companions exchanged by the symmetry, spliced into the rings of a key \
                chain whose core is the knot. No edge is fixed."
            .into(),
    }
}

fn satellite_fibered() -> Fixture {
    let mut g = CompanionshipGraph::new().with_atom("v41", VOL_FIGURE_EIGHT).with_atom("vP", PLACEHOLDER_VOLUME);
    let mut lk = zeros(2);
    lk[0][1] = 5;
    lk[1][0] = 5;
    let mut p =
        Vertex::new("p", Geometry::Hyperbolic("vP".into())).with_model(named("Th(5,1) u U", &[false, true], lk, None));
    p.winding.insert("T".into(), 5);
    g.add_vertex(p).add_external("p", "K");
    g.add_vertex(fig8_vertex("j"));
    g.directed("T", "j", "p");
    let a = AmphichiralAction::identity().with_external("K", Sign::Minus).with_signs(
        "T",
        ("p", Sign::Plus),
        ("j", Sign::Minus),
    );
    let mut expected = Expected::knot(verdict(VerdictKind::StronglyNegAmphichiral, 1));
    expected.structure = Some(Structure::TotallyCoherent);
    expected.root = Some("p".into());
    expected.fibered_consistent = Some(true);
    Fixture {
        name: "satellite_fibered".into(),
        graph: g.canonical(),
        action: a,
        expected,
        flags: BTreeMap::from([("fibered".to_string(), true)]),
        alexander: None,
        notes: "Satellite with the Turk's head pattern Th(5,1) in the solid torus and a figure-eight \
                companion; the pattern winds 5 times. The pattern piece's volume is a placeholder."
            .into(),
    }
}

pub fn fixtures() -> Vec<Fixture> {
    vec![grp_knot(), grp_link(), max_special(), cand1(), cand2(), hopf_keychain(), keychain_swap(), satellite_fibered()]
}

pub fn fixture(name: &str) -> Option<Fixture> {
    fixtures().into_iter().find(|f| f.name == name)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixtureReport {
    pub name: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

/// Runs every expectation of a fixture.
pub fn run_fixture(f: &Fixture) -> FixtureReport {
    let mut checks = Vec::new();
    let mut check = |name: &str, passed: bool, detail: String| checks.push(Check { name: name.into(), passed, detail });
    let report = validate_action(&f.graph, &f.action);
    check("validates", report.is_valid(), format!("{} violations", report.violations.len()));
    let e = &f.expected;

    if let Some((value, n)) = e.complexity {
        let c = complexity(&f.graph);
        check("complexity", (c.value() - value).abs() <= tolerance() && c.vertex_count == n, format!("got {c}"));
    }
    if let Some(root) = &e.root {
        let got = crate::graph::root_of(&f.graph).ok();
        check("root", got.as_deref() == Some(root.as_str()), format!("got {got:?}"));
    }
    if let Some(s) = e.structure {
        let got = decide_structure(&f.graph, &f.action).map(|d| d.structure);
        check("structure", got.as_ref() == Ok(&s), format!("got {got:?}"));
    }
    let analysis = if e.knot { analyze_knot(&f.graph, &f.action) } else { analyze_link(&f.graph, &f.action) };
    match (&e.outcome, &analysis) {
        (ExpectedOutcome::Verdict(v), Ok((got, cert))) => {
            check("verdict", v == got, format!("got {got:?}"));
            let r = replay(cert, &f.graph, &f.action);
            check("replay", r.is_ok(), format!("{r:?}"));
        }
        (ExpectedOutcome::Error { name }, Err(err)) => {
            check("error", err.name() == name, format!("got {err}"));
        }
        (_, Ok((got, _))) => check("outcome", false, format!("unexpected verdict {got:?}")),
        (_, Err(err)) => check("outcome", false, format!("unexpected error {err}")),
    }
    if let Some((v, fs)) = &e.elementary {
        let got = check_elementary(&f.graph, &f.action, v);
        let ok = matches!(&got, Ok(r) if r.fixed_set == Some(*fs));
        check("elementary", ok, format!("got {got:?}"));
    }
    if let Some(expect) = e.fibered_consistent {
        let fibered = f.flags.get("fibered").copied().unwrap_or(false);
        let got = check_fibered_consistency(&f.graph, &f.action, fibered).map(|r| r.consistent);
        check("fibered_consistency", got == Ok(expect), format!("got {got:?}"));
    }
    if let Some(expect) = e.not_slice {
        let got = f.alexander.as_ref().map(fox_milnor_factor);
        let obstructed = matches!(got, Some(Ok(FoxMilnor::NotSatisfiable)));
        check("fox_milnor", obstructed == expect, format!("got {got:?}"));
    }
    let passed = checks.iter().all(|c| c.passed);
    FixtureReport { name: f.name.clone(), passed, checks }
}

/// Star sets are part of Seifert models; re-exported for fixture builders.
pub type SeifertStar = Star;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_basics() {
        let p = IntPolynomial::new(vec![0, 2, -1, 0]);
        assert_eq!(p.normalized().coeffs, vec![2, -1]);
        assert_eq!(p.normalized().to_string(), "2-t");
        assert_eq!(alexander_figure_eight().to_string(), "-1+3t-t^2");
        assert_eq!(alexander_trefoil().substitute_power(2).coeffs, vec![1, 0, -1, 0, 1]);
        assert!(IntPolynomial::new(vec![1, -3, 1]).same_up_to_units(&alexander_figure_eight()));
    }

    #[test]
    fn fox_milnor_examples() {
        assert_eq!(fox_milnor_factor(&IntPolynomial::one()), Ok(FoxMilnor::Satisfiable { f: IntPolynomial::one() }));
        assert_eq!(fox_milnor_factor(&alexander_figure_eight()), Ok(FoxMilnor::NotSatisfiable));
        match fox_milnor_factor(&IntPolynomial::new(vec![-2, 5, -2])).unwrap() {
            FoxMilnor::Satisfiable { f } => {
                assert!(f.mul(&f.reversed()).same_up_to_units(&IntPolynomial::new(vec![-2, 5, -2])))
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(fox_milnor_factor(&IntPolynomial::new(vec![1, 2, 3])), Err(CatalogError::NotSymmetric(_))));
    }

    #[test]
    fn cand1_polynomial() {
        let f = cand1();
        assert_eq!(f.alexander.as_ref().unwrap().coeffs, vec![-1, 5, -10, 13, -10, 5, -1]);
        assert_eq!(f.expected.not_slice, Some(true));
        let missing = alexander_of_splice(
            &IntPolynomial::one(),
            &[Contribution { name: "K1".into(), winding: 1, polynomial: None }],
        );
        assert_eq!(missing, Err(CatalogError::MissingAnnotation("K1".into())));
    }

    #[test]
    fn every_fixture_passes() {
        for f in fixtures() {
            let r = run_fixture(&f);
            assert!(r.passed, "{}: {:?}", f.name, r.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>());
        }
    }
}
