use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use splicekit::coherence::{classify_vertices, edge_class, EdgeClass, VertexClass};
use splicekit::{maximal_coherent_subtree, AmphichiralAction, CompanionshipGraph, Geometry, ModelLink};

fn model_label(m: &ModelLink) -> String {
    match m {
        ModelLink::KeyChain { n } => format!("key chain H_{n}"),
        ModelLink::Seifert { p, q, x } => {
            let stars: Vec<String> = x.iter().map(|s| format!("{s:?}").to_lowercase()).collect();
            format!("S({p},{q}|{})", stars.join(","))
        }
        ModelLink::Named(n) => format!("{}{}", n.name, if n.mirror { " (mirror)" } else { "" }),
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\n"))
}

/// Directed edges are solid arrows, undirected edges dashed lines; coherently directed fixed
/// edges get a doubled arrowhead. With an action, the maximal coherent subtree is filled light
/// blue and mixed vertices red.
pub fn render(g: &CompanionshipGraph, action: Option<&AmphichiralAction>) -> String {
    let mut g_max = BTreeSet::new();
    let mut classes = BTreeMap::new();
    if let Some(a) = action {
        g_max = maximal_coherent_subtree(g, a).unwrap_or_default();
        classes = classify_vertices(g, a).unwrap_or_default();
    }
    let mut out = String::from("digraph companionship {\n  node [shape=box, fontname=\"Helvetica\"];\n");
    for v in &g.vertices {
        let mut label = vec![v.id.clone()];
        label.push(match &v.geometry {
            Geometry::Hyperbolic(atom) => match g.atom_value(atom) {
                Some(x) => format!("hyperbolic {atom} = {x}"),
                None => format!("hyperbolic {atom}"),
            },
            Geometry::Seifert => "Seifert".into(),
        });
        if let Some(m) = &v.model {
            label.push(model_label(m));
        }
        let externals: Vec<String> = v
            .externals()
            .map(|n| match action.and_then(|a| a.external_signs.get(n)) {
                Some(s) => format!("{n}({s})"),
                None => n.to_string(),
            })
            .collect();
        if !externals.is_empty() {
            label.push(format!("externals: {}", externals.join(", ")));
        }
        let mut attrs = vec![format!("label={}", quote(&label.join("\n")))];
        if g_max.contains(&v.id) {
            attrs.push("style=filled, fillcolor=lightblue".into());
        } else if classes.get(&v.id) == Some(&VertexClass::Mixed) {
            attrs.push("style=filled, fillcolor=red".into());
        }
        let _ = writeln!(out, "  {} [{}];", quote(&v.id), attrs.join(", "));
    }
    for e in &g.edges {
        let mut label = e.id.clone();
        if let Some(a) = action {
            if let Some(signs) = a.edge_signs.get(&e.id) {
                let s: Vec<String> = signs.iter().map(|(v, s)| format!("{v}:{s}")).collect();
                label = format!("{label} [{}]", s.join(" "));
            }
        }
        let mut attrs = vec![format!("label={}", quote(&label))];
        let (from, to) = match (e.tail(), e.head()) {
            (Some(t), Some(h)) => (t.to_string(), h.to_string()),
            _ => {
                attrs.push("style=dashed, dir=none".into());
                (e.endpoints[0].clone(), e.endpoints[1].clone())
            }
        };
        if action.is_some_and(|a| edge_class(g, a, &e.id) == EdgeClass::CoherentlyDirected) {
            attrs.push("arrowhead=normalnormal".into());
        }
        let _ = writeln!(out, "  {} -> {} [{}];", quote(&from), quote(&to), attrs.join(", "));
    }
    out.push_str("}\n");
    out
}
