//! Companionship graphs of link exteriors, amphichiral symmetries acting on them, and a
//! certificate engine bounding the Kawauchi number of negative amphichiral knots and links.

pub mod catalog;
pub mod coherence;
pub mod complexity;
pub mod engine;
pub mod graph;
pub mod ops;
pub mod symmetry;

pub use coherence::{decide_structure, maximal_coherent_subtree, EdgeClass, Structure, StructureDecision, VertexClass};
pub use complexity::{compare, complexity, descent_check, enumerate_norms, Complexity, Descent};
pub use engine::{
    analyze_knot, analyze_link, check_elementary, delete_component, replay, AnalyzeOptions, Certificate, EngineError,
    Verdict, VerdictKind,
};
pub use graph::{
    linking_number, root_of, validate, CompanionshipGraph, ComponentRef, Direction, Edge, Geometry, GraphKind,
    ModelLink, Rule, ValidationReport, Vertex,
};
pub use ops::{edge_cut, splice, CutResult, SpliceDirection};
pub use symmetry::{validate_action, AmphichiralAction, Sign};
