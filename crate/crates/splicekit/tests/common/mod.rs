//! Random graph and action generators shared by the integration tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use splicekit::catalog::{figure_eight_model, VOL_BORROMEAN, VOL_FIGURE_EIGHT, VOL_WHITEHEAD};
use splicekit::{AmphichiralAction, CompanionshipGraph, ComponentRef, Geometry, Sign, Vertex};

pub const ATOMS: [(&str, f64); 3] = [("v41", VOL_FIGURE_EIGHT), ("vWh", VOL_WHITEHEAD), ("vBorr", VOL_BORROMEAN)];

pub fn registry() -> CompanionshipGraph {
    let mut g = CompanionshipGraph::new();
    for (n, v) in ATOMS {
        g.set_atom(n, v);
    }
    g
}

fn random_geometry(rng: &mut ChaCha8Rng) -> Geometry {
    if rng.gen_bool(0.5) {
        Geometry::Seifert
    } else {
        Geometry::Hyperbolic(ATOMS[rng.gen_range(0..ATOMS.len())].0.to_string())
    }
}

fn prune_atoms(g: &mut CompanionshipGraph) {
    let used: BTreeSet<String> = g.vertices.iter().filter_map(|v| v.geometry.atom().map(str::to_string)).collect();
    g.atoms.retain(|a| used.contains(&a.name));
}

/// A connected tree on `n` vertices with random geometry, no models, at least one external
/// component, and directions forced where a side carries no external.
pub fn random_tree(rng: &mut ChaCha8Rng, n: usize) -> CompanionshipGraph {
    let mut g = registry();
    for i in 0..n {
        let geometry = random_geometry(rng);
        g.add_vertex(Vertex::new(format!("v{i}"), geometry));
    }
    for i in 1..n {
        let parent = rng.gen_range(0..i);
        let (a, b) = (format!("v{i}"), format!("v{parent}"));
        match rng.gen_range(0..3) {
            0 => g.directed(&format!("e{i}"), &a, &b),
            1 => g.directed(&format!("e{i}"), &b, &a),
            _ => g.undirected(&format!("e{i}"), &a, &b),
        };
    }
    let ext = rng.gen_range(1..=3.min(n + 1));
    for k in 0..ext {
        let host = format!("v{}", rng.gen_range(0..n));
        g.add_external(&host, &format!("K{k}"));
    }
    g.normalize_directions();
    prune_atoms(&mut g);
    g.canonical()
}

/// Identity action reversing every external component.
pub fn reversing_identity(g: &CompanionshipGraph) -> AmphichiralAction {
    let mut a = AmphichiralAction::identity();
    for n in g.externals().keys() {
        a = a.with_external(n, Sign::Minus);
    }
    a
}

/// A reduced negative amphichiral knot: a fixed subtree around the root with random coherent
/// or incoherent edges, plus pairs of isomorphic branches exchanged by the action.
#[derive(Clone, Debug)]
pub struct KnotInstance {
    pub graph: CompanionshipGraph,
    pub action: AmphichiralAction,
}

enum Kind {
    Seifert,
    Hyperbolic(usize),
    FigureEight,
}

fn make_vertex(id: &str, kind: &Kind) -> Vertex {
    match kind {
        Kind::Seifert => Vertex::new(id, Geometry::Seifert),
        Kind::Hyperbolic(i) => Vertex::new(id, Geometry::Hyperbolic(ATOMS[*i].0.into())),
        Kind::FigureEight => Vertex::new(id, Geometry::Hyperbolic("v41".into())).with_model(figure_eight_model()),
    }
}

pub fn random_knot(rng: &mut ChaCha8Rng, max_vertices: usize) -> KnotInstance {
    let mut g = registry();
    let mut a = AmphichiralAction::identity().with_external("K", Sign::Minus);
    let fixed_count = rng.gen_range(1..=5.min(max_vertices));
    let pick_kind = |rng: &mut ChaCha8Rng| match rng.gen_range(0..3) {
        0 => Kind::Seifert,
        _ => Kind::Hyperbolic(rng.gen_range(0..ATOMS.len())),
    };
    for i in 0..fixed_count {
        let kind = pick_kind(rng);
        g.add_vertex(make_vertex(&format!("f{i}"), &kind));
    }
    g.add_external("f0", "K");
    for i in 1..fixed_count {
        let parent = format!("f{}", rng.gen_range(0..i));
        let child = format!("f{i}");
        let e = format!("e{i}");
        g.directed(&e, &child, &parent);
        let head = if rng.gen_bool(0.5) { Sign::Plus } else { Sign::Minus };
        a = a.with_signs(&e, (&parent, head), (&child, head.flip()));
    }
    // exchanged pairs of branches of depth one or two
    let mut count = fixed_count;
    let mut pair = 0;
    while count + 2 <= max_vertices && rng.gen_bool(0.6) {
        let deep = count + 4 <= max_vertices && rng.gen_bool(0.4);
        let anchor = format!("f{}", rng.gen_range(0..fixed_count));
        let top = if rng.gen_bool(0.4) { Kind::FigureEight } else { pick_kind(rng) };
        let top = if deep && matches!(top, Kind::FigureEight) { Kind::Seifert } else { top };
        let low = Kind::FigureEight;
        for side in ["a", "b"] {
            let s = format!("s{pair}{side}");
            g.add_vertex(make_vertex(&s, &top));
            g.directed(&format!("t{pair}{side}"), &s, &anchor);
            if deep {
                let u = format!("u{pair}{side}");
                g.add_vertex(make_vertex(&u, &low));
                g.directed(&format!("w{pair}{side}"), &u, &s);
            }
        }
        let swap = |m: &mut BTreeMap<String, String>, x: String, y: String| {
            m.insert(x.clone(), y.clone());
            m.insert(y, x);
        };
        swap(&mut a.vertex_perm, format!("s{pair}a"), format!("s{pair}b"));
        swap(&mut a.edge_perm, format!("t{pair}a"), format!("t{pair}b"));
        if deep {
            swap(&mut a.vertex_perm, format!("u{pair}a"), format!("u{pair}b"));
            swap(&mut a.edge_perm, format!("w{pair}a"), format!("w{pair}b"));
        }
        count += if deep { 4 } else { 2 };
        pair += 1;
    }
    prune_atoms(&mut g);
    KnotInstance { graph: g.canonical(), action: a }
}

/// Exact comparison of two graphs up to the order of components inside each vertex.
pub fn same_graph(x: &CompanionshipGraph, y: &CompanionshipGraph) -> Result<(), String> {
    let (x, y) = (x.clone().canonical(), y.clone().canonical());
    if x.vertex_ids() != y.vertex_ids() {
        return Err(format!("vertex sets differ: {:?} vs {:?}", x.vertex_ids(), y.vertex_ids()));
    }
    for (a, b) in x.vertices.iter().zip(&y.vertices) {
        let ca: BTreeSet<&ComponentRef> = a.components.iter().collect();
        let cb: BTreeSet<&ComponentRef> = b.components.iter().collect();
        if a.geometry != b.geometry || a.model != b.model || ca != cb || a.winding != b.winding {
            return Err(format!("vertex {} differs", a.id));
        }
        let atom = |g: &CompanionshipGraph, v: &Vertex| v.geometry.atom().and_then(|n| g.atom_value(n));
        if atom(&x, a) != atom(&y, b) {
            return Err(format!("volume of {} differs", a.id));
        }
    }
    if x.edges.len() != y.edges.len() {
        return Err("edge counts differ".into());
    }
    for (a, b) in x.edges.iter().zip(&y.edges) {
        let ea: BTreeSet<&String> = a.endpoints.iter().collect();
        let eb: BTreeSet<&String> = b.endpoints.iter().collect();
        if a.id != b.id || ea != eb || a.head() != b.head() {
            return Err(format!("edge {} differs", a.id));
        }
    }
    Ok(())
}

/// Gromov norm and vertex count computed directly from the atom table.
pub fn direct_complexity(g: &CompanionshipGraph) -> (f64, usize) {
    let norm =
        g.vertices.iter().filter_map(|v| v.geometry.atom()).map(|n| g.atom_value(n).expect("declared atom")).sum();
    (norm, g.vertices.len())
}

/// -1, 0, 1 for less, equal, greater in the lexicographic order with tolerance 1e-9.
pub fn direct_compare(a: (f64, usize), b: (f64, usize)) -> i8 {
    if a.0 < b.0 - 1e-9 {
        -1
    } else if a.0 > b.0 + 1e-9 {
        1
    } else {
        (a.1 as i64 - b.1 as i64).signum() as i8
    }
}

pub fn shuffle<T>(rng: &mut ChaCha8Rng, v: &mut [T]) {
    v.shuffle(rng);
}
