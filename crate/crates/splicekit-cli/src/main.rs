mod dot;

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};
use splicekit::catalog::{fixture, fixtures, fox_milnor_factor, run_fixture, FoxMilnor, IntPolynomial};
use splicekit::coherence::{classify_edges, classify_vertices, EdgeClass, VertexClass};
use splicekit::engine::{analyze_knot_with, analyze_link_with, replay};
use splicekit::symmetry::reduce;
use splicekit::{
    complexity, decide_structure, enumerate_norms, root_of, validate, validate_action, AmphichiralAction,
    AnalyzeOptions, Certificate, CompanionshipGraph, Complexity, StructureDecision, ValidationReport, Verdict,
};

const EXIT_INVALID: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "splicekit",
    version,
    about = "Companionship graphs, amphichiral actions and concordance certificates"
)]
struct Cli {
    /// Print the machine-readable report instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Inputs {
    /// Graph JSON file, or catalog:<name> for a shipped fixture.
    graph: String,
    /// Action JSON file; defaults to the fixture's action for catalog inputs.
    action: Option<PathBuf>,
}

#[derive(clap::Args)]
struct EngineFlags {
    /// Treat a knot graph as a link (no knot shortcuts).
    #[arg(long)]
    link: bool,
    /// Try every coherent-edge choice and keep the smallest bound.
    #[arg(long)]
    search: bool,
    /// Refuse unreduced actions instead of reducing them.
    #[arg(long)]
    no_reduce: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check the graph (and action) invariants.
    Validate(Inputs),
    /// Structure decision and verdict.
    Analyze {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        flags: EngineFlags,
    },
    /// Verdict with its certificate tree.
    Certify {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        flags: EngineFlags,
        /// Write the certificate JSON here.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Re-check a certificate against its graph and action.
    Replay {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        certificate: PathBuf,
    },
    /// Complexity pair (Gromov norm, vertex count).
    Complexity { graph: String },
    /// Attainable norms up to a bound.
    Enumerate {
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        atoms: Vec<f64>,
        #[arg(long)]
        bound: f64,
    },
    /// Shipped example fixtures.
    Catalog {
        #[command(subcommand)]
        action: CatalogCommand,
    },
    /// Graphviz rendering.
    ExportDot {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Raise the action to the odd part of its order.
    Reduce(Inputs),
    /// Fox–Milnor factor test on a symmetric Alexander polynomial.
    Foxmilnor {
        /// Coefficients in ascending powers of t, e.g. -1,3,-1.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        coeffs: Vec<i64>,
    },
}

#[derive(Subcommand)]
enum CatalogCommand {
    List,
    Show { name: String },
    Run,
}

#[derive(Serialize)]
struct InputDigest {
    role: &'static str,
    source: String,
    sha256: String,
}

#[derive(Serialize)]
struct CertificateRef {
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<String>,
    sha256: String,
    nodes: usize,
}

#[derive(Serialize, Default)]
struct Report {
    command: String,
    inputs: Vec<InputDigest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    validation: Option<ValidationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    complexity: Option<Complexity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    edge_classes: Option<BTreeMap<String, EdgeClass>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    vertex_classes: Option<BTreeMap<String, VertexClass>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    structure: Option<StructureDecision>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verdict: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kaw_bound: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate_ref: Option<CertificateRef>,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<Certificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_INVALID, message: message.into() }
}

fn sha256(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

struct Loaded {
    graph: CompanionshipGraph,
    action: Option<AmphichiralAction>,
    digests: Vec<InputDigest>,
}

fn read(path: &std::path::Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn load(graph: &str, action: Option<&PathBuf>) -> Result<Loaded, Failure> {
    let mut digests = Vec::new();
    let (g, mut a) = if let Some(name) = graph.strip_prefix("catalog:") {
        let f = fixture(name).ok_or_else(|| usage(format!("no fixture named {name}")))?;
        let json = f.graph.to_json();
        digests.push(InputDigest { role: "graph", source: graph.to_string(), sha256: sha256(json.as_bytes()) });
        let aj = f.action.to_json();
        digests.push(InputDigest { role: "action", source: graph.to_string(), sha256: sha256(aj.as_bytes()) });
        (f.graph, Some(f.action))
    } else {
        let bytes = read(std::path::Path::new(graph))?;
        digests.push(InputDigest { role: "graph", source: graph.to_string(), sha256: sha256(&bytes) });
        let text = String::from_utf8_lossy(&bytes);
        (CompanionshipGraph::from_json(&text).map_err(|e| invalid(e.to_string()))?, None)
    };
    if let Some(p) = action {
        let bytes = read(p)?;
        digests.retain(|d| d.role != "action");
        digests.push(InputDigest { role: "action", source: p.display().to_string(), sha256: sha256(&bytes) });
        a = Some(AmphichiralAction::from_json(&String::from_utf8_lossy(&bytes)).map_err(|e| invalid(e.to_string()))?);
    }
    Ok(Loaded { graph: g, action: a, digests })
}

fn need_action(l: &Loaded) -> Result<&AmphichiralAction, Failure> {
    l.action.as_ref().ok_or_else(|| usage("this command needs an action file"))
}

fn validation(l: &Loaded) -> ValidationReport {
    match &l.action {
        Some(a) => validate_action(&l.graph, a),
        None => validate(&l.graph),
    }
}

fn print_validation(r: &ValidationReport) {
    if r.is_valid() {
        println!("valid ({:?})", r.kind);
    } else {
        println!("invalid ({:?}): {} violation(s)", r.kind, r.violations.len());
        for v in &r.violations {
            println!("  [{:?}] {}: {} ({})", v.rule, v.subject, v.message, v.rule.clause());
        }
    }
    for n in &r.notes {
        println!("  note: {n}");
    }
}

fn emit_json<T: Serialize>(value: &T) {
    use std::io::Write;
    // a closed pipe on the reading side is not an error of ours
    let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn print_certificate(c: &Certificate, depth: usize) {
    let step = serde_json::to_string(&c.step).expect("serializable");
    println!("{}{step} {} -> {:?} bound {}", "  ".repeat(depth), c.complexity, c.verdict.kind, c.verdict.kaw_bound);
    for k in &c.children {
        print_certificate(k, depth + 1);
    }
}

fn analyze(
    cli_json: bool,
    command: &str,
    inputs: &Inputs,
    flags: &EngineFlags,
    emit: Option<&PathBuf>,
) -> Result<(), Failure> {
    let l = load(&inputs.graph, inputs.action.as_ref())?;
    let a = need_action(&l)?;
    let r = validation(&l);
    let mut report = Report { command: command.into(), ..Default::default() };
    let valid = r.is_valid();
    report.validation = Some(r);
    if !valid {
        report.inputs = l.digests;
        return finish(cli_json, report, "action or graph is invalid");
    }
    let knot = !flags.link && root_of(&l.graph).is_ok();
    report.complexity = Some(complexity(&l.graph));
    report.edge_classes = classify_edges(&l.graph, a).ok();
    report.vertex_classes = classify_vertices(&l.graph, a).ok();
    if knot {
        report.structure = decide_structure(&l.graph, a).ok();
    }
    let opts = AnalyzeOptions { search: flags.search, auto_reduce: !flags.no_reduce, ..Default::default() };
    let result = if knot { analyze_knot_with(&l.graph, a, &opts) } else { analyze_link_with(&l.graph, a, &opts) };
    report.inputs = l.digests;
    let (verdict, cert) = match result {
        Ok(x) => x,
        Err(e) => {
            report.error = Some(format!("{}: {e}", e.name()));
            return finish(cli_json, report, "analysis refused the input");
        }
    };
    report.verdict = Some(verdict.clone());
    report.kaw_bound = Some(verdict.kaw_bound);
    if command == "certify" {
        let cert_json = serde_json::to_string_pretty(&cert).expect("serializable");
        let path = match emit {
            Some(p) => {
                fs::write(p, format!("{cert_json}\n"))
                    .map_err(|e| usage(format!("cannot write {}: {e}", p.display())))?;
                Some(p.display().to_string())
            }
            None => None,
        };
        report.certificate_ref =
            Some(CertificateRef { path: path.clone(), sha256: sha256(cert_json.as_bytes()), nodes: cert.node_count() });
        if path.is_none() {
            report.certificate = Some(cert.clone());
        }
    }
    if cli_json {
        emit_json(&report);
        return Ok(());
    }
    println!("mode: {}", if knot { "knot" } else { "link" });
    println!("complexity: {}", report.complexity.as_ref().expect("set"));
    if let Some(s) = &report.structure {
        println!("structure: {:?} (root {}, G_max {:?})", s.structure, s.root, s.g_max);
    }
    println!("verdict: {:?}, kaw bound <= {}", verdict.kind, verdict.kaw_bound);
    if command == "certify" {
        print_certificate(&cert, 0);
        if let Some(r) = &report.certificate_ref {
            println!("certificate sha256 {} ({} nodes)", r.sha256, r.nodes);
        }
    }
    Ok(())
}

/// Prints the report and fails with exit code 1.
fn finish(cli_json: bool, report: Report, summary: &str) -> Result<(), Failure> {
    if cli_json {
        emit_json(&report);
    } else {
        if let Some(r) = &report.validation {
            print_validation(r);
        }
        if let Some(e) = &report.error {
            println!("error: {e}");
        }
    }
    Err(invalid(summary))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let json = cli.json;
    match &cli.command {
        Command::Validate(inputs) => {
            let l = load(&inputs.graph, inputs.action.as_ref())?;
            let r = validation(&l);
            let ok = r.is_valid();
            if json {
                emit_json(&Report {
                    command: "validate".into(),
                    inputs: l.digests,
                    validation: Some(r),
                    ..Default::default()
                });
            } else {
                print_validation(&r);
            }
            if ok {
                Ok(())
            } else {
                Err(invalid("validation failed"))
            }
        }
        Command::Analyze { inputs, flags } => analyze(json, "analyze", inputs, flags, None),
        Command::Certify { inputs, flags, emit } => analyze(json, "certify", inputs, flags, emit.as_ref()),
        Command::Replay { inputs, certificate } => {
            let l = load(&inputs.graph, inputs.action.as_ref())?;
            let a = need_action(&l)?;
            let bytes = read(certificate)?;
            let cert: Certificate =
                serde_json::from_slice(&bytes).map_err(|e| invalid(format!("malformed certificate: {e}")))?;
            match replay(&cert, &l.graph, a) {
                Ok(()) => {
                    if json {
                        emit_json(&serde_json::json!({"replay": true, "sha256": sha256(&bytes)}));
                    } else {
                        println!("certificate replays ({} nodes)", cert.node_count());
                    }
                    Ok(())
                }
                Err(m) => {
                    if json {
                        emit_json(&serde_json::json!({"replay": false, "mismatch": m}));
                    } else {
                        println!("mismatch at {}: {}", m.path, m.reason);
                    }
                    Err(invalid("certificate does not replay"))
                }
            }
        }
        Command::Complexity { graph } => {
            let l = load(graph, None)?;
            let c = complexity(&l.graph);
            if json {
                emit_json(&Report {
                    command: "complexity".into(),
                    inputs: l.digests,
                    complexity: Some(c),
                    ..Default::default()
                });
            } else {
                println!("{c}");
            }
            Ok(())
        }
        Command::Enumerate { atoms, bound } => {
            let v = enumerate_norms(atoms, *bound).map_err(|e| usage(e.to_string()))?;
            if json {
                emit_json(&v);
            } else {
                for x in v {
                    println!("{x}");
                }
            }
            Ok(())
        }
        Command::Catalog { action } => catalog(json, action),
        Command::ExportDot { inputs, output } => {
            let l = load(&inputs.graph, inputs.action.as_ref())?;
            let r = validation(&l);
            if !r.is_valid() {
                print_validation(&r);
                return Err(invalid("cannot render an invalid input"));
            }
            let text = dot::render(&l.graph, l.action.as_ref());
            match output {
                Some(p) => fs::write(p, text).map_err(|e| usage(format!("cannot write {}: {e}", p.display()))),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
        Command::Reduce(inputs) => {
            let l = load(&inputs.graph, inputs.action.as_ref())?;
            let a = need_action(&l)?;
            let r = reduce(&l.graph, a).map_err(|e| invalid(e.to_string()))?;
            if json {
                emit_json(&r);
            } else {
                println!("exponent {}", r.exponent);
                println!("newly fixed edges: {:?}", r.newly_fixed_edges);
                println!("{}", r.action.to_json());
            }
            Ok(())
        }
        Command::Foxmilnor { coeffs } => {
            let p = IntPolynomial::new(coeffs.clone());
            let r = fox_milnor_factor(&p).map_err(|e| usage(e.to_string()))?;
            if json {
                emit_json(&r);
            } else {
                match r {
                    FoxMilnor::Satisfiable { f } => println!("satisfiable: {p} = f(t) f(1/t) with f = {f}"),
                    FoxMilnor::NotSatisfiable => {
                        println!("not satisfiable: {p} is not of the form f(t) f(1/t); not slice")
                    }
                }
            }
            Ok(())
        }
    }
}

fn catalog(json: bool, command: &CatalogCommand) -> Result<(), Failure> {
    match command {
        CatalogCommand::List => {
            let all = fixtures();
            if json {
                emit_json(&all.iter().map(|f| f.name.as_str()).collect::<Vec<_>>());
            } else {
                for f in all {
                    let n = f.graph.vertices.len();
                    println!("catalog:{:<20} {n} {}", f.name, if n == 1 { "vertex" } else { "vertices" });
                }
            }
            Ok(())
        }
        CatalogCommand::Show { name } => {
            let f = fixture(name).ok_or_else(|| usage(format!("no fixture named {name}")))?;
            emit_json(&f);
            Ok(())
        }
        CatalogCommand::Run => {
            let reports: Vec<_> = fixtures().iter().map(run_fixture).collect();
            let ok = reports.iter().all(|r| r.passed);
            if json {
                emit_json(&reports);
            } else {
                for r in &reports {
                    println!("{} {}", if r.passed { "PASS" } else { "FAIL" }, r.name);
                    for c in r.checks.iter().filter(|c| !c.passed) {
                        println!("  {}: {}", c.name, c.detail);
                    }
                }
            }
            if ok {
                Ok(())
            } else {
                Err(invalid("some fixtures failed"))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("splicekit: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
