//! `sft`: command-line front end for the sft-core library.
//!
//! Exit codes: 0 YES / success, 1 NO, 2 UNSUPPORTED, 3 input or I/O error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use sft_core::gk3::{Place, PointedGK3};
use sft_core::invariants::{invariant_table, Verdict};
use sft_core::monoid::{canonical_form, equal_elements, is_atom, Equality};
use sft_core::oracle::{sse_search, OracleError, SearchCache, SearchLimits};
use sft_core::{
    decide_se, decide_sse, gk_dimension, is_gk3, pointed_structure, to_normal_form, verify_certificate, IntMatrix,
    MonoidElement, MultiGraph, SseCertificate,
};

#[derive(Parser)]
#[command(name = "sft", version, about = "Shift equivalence tools for directed multigraphs")]
struct Cli {
    /// Format of graph files read and written; `auto` reads either and writes JSON.
    #[arg(long, value_enum, global = true, default_value_t = Format::Auto)]
    format: Format,
    /// Also write a DOT rendering of the main graph here.
    #[arg(long, global = true, value_name = "PATH")]
    dot: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Auto,
    /// `{"vertices": [...], "edges": [[id, source, range], ...]}`
    Json,
    /// First line `n`, then `n` rows of the adjacency matrix.
    Matrix,
}

#[derive(Subcommand)]
enum Command {
    /// Counts, cycle list and GK dimension.
    Info { graph: PathBuf },
    /// Transform a GK3 graph to normal form.
    NormalForm {
        graph: PathBuf,
        /// Write the move trace (JSON) here.
        #[arg(long, value_name = "PATH")]
        emit_moves: Option<PathBuf>,
        /// Write the graph here instead of stdout.
        #[arg(long, short, value_name = "PATH")]
        output: Option<PathBuf>,
    },
    /// Decide strong shift equivalence or shift equivalence.
    Decide {
        #[arg(value_enum)]
        kind: Kind,
        a: PathBuf,
        b: PathBuf,
        /// Write the certificate (JSON) here on YES.
        #[arg(long, value_name = "PATH")]
        certificate: Option<PathBuf>,
    },
    /// Talented monoid computations on a normal-form GK3 graph.
    Monoid {
        #[arg(value_enum)]
        action: MonoidAction,
        graph: PathBuf,
        /// Element such as `u(0)+2*w(-1)`.
        expr: String,
        /// Second element, for `equal`.
        other: Option<String>,
        /// Highest level `equal` flows to; defaults to the largest shift.
        #[arg(long)]
        max_level: Option<i64>,
    },
    /// Pointed structure and trail tables of the normal form.
    Invariants { graph: PathBuf },
    /// Brute-force searches.
    Oracle {
        #[command(subcommand)]
        search: OracleCommand,
    },
    /// Check an SSE certificate against two graphs.
    Verify { a: PathBuf, b: PathBuf, certificate: PathBuf },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Bidirectional search for a move sequence from A to B.
    Sse {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value_t = 10)]
        max_vertices: usize,
        #[arg(long, default_value_t = 2)]
        max_classes: usize,
        /// Remember unsuccessful searches in this file.
        #[arg(long, value_name = "PATH")]
        cache: Option<PathBuf>,
        /// Write the trace (JSON) here instead of stdout.
        #[arg(long, value_name = "PATH")]
        emit_moves: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Sse,
    Se,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MonoidAction {
    Canon,
    Atom,
    Equal,
}

const YES: u8 = 0;
const NO: u8 = 1;
const UNSUPPORTED: u8 = 2;
const ERROR: u8 = 3;

/// A failure carrying its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure { code: ERROR, error: e.into() }
    }
}

fn unsupported(msg: impl Into<String>) -> Failure {
    Failure { code: UNSUPPORTED, error: anyhow!(msg.into()) }
}

type Outcome = Result<u8, Failure>;

fn load(path: &Path, format: Format) -> Result<MultiGraph, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let json = match format {
        Format::Auto => text.trim_start().starts_with('{'),
        f => f == Format::Json,
    };
    if json {
        Ok(MultiGraph::from_json(&text)?)
    } else {
        Ok(MultiGraph::from_matrix(&IntMatrix::parse_text(&text)?)?)
    }
}

fn render(g: &MultiGraph, format: Format) -> String {
    match format {
        Format::Auto | Format::Json => g.to_json() + "\n",
        Format::Matrix => g.adjacency_matrix().to_text(),
    }
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Sources red, sinks blue, trail edges green when the graph is GK3.
fn dot(g: &MultiGraph) -> String {
    let Ok(p) = pointed_structure(g) else {
        return g.to_dot();
    };
    let color = |place: Place| match place {
        Place::Source { .. } => Some("red"),
        Place::Sink { .. } => Some("blue"),
        Place::Interior => None,
    };
    let on_cycle = |p: &PointedGK3, e: usize| p.sources.iter().chain(&p.sinks).any(|c| c.edges.contains(&e));
    g.to_dot_styled(
        |v| color(p.place(v)),
        |e| {
            if on_cycle(&p, e) {
                color(p.place(g.edges()[e].source))
            } else {
                Some("darkgreen")
            }
        },
    )
}

fn write_dot(cli_dot: &Option<PathBuf>, g: &MultiGraph) -> Result<(), Failure> {
    match cli_dot {
        Some(path) => write(path, &dot(g)),
        None => Ok(()),
    }
}

fn info(g: &MultiGraph) -> String {
    let mut out = vec![
        format!("vertices: {}", g.vertex_count()),
        format!("edges: {}", g.edge_count()),
        format!("essential: {}", g.is_essential()),
        format!("connected: {}", g.is_connected()),
    ];
    if g.has_disjoint_cycles() {
        let cycles = g.enumerate_cycles();
        out.push(format!("cycles: {}", cycles.len()));
        for c in &cycles {
            let names: Vec<&str> = c.vertices.iter().map(|&v| g.vertex_name(v)).collect();
            out.push(format!("  [{}] length {}", names.join(" "), c.len()));
        }
    } else {
        out.push("cycles: not disjoint".into());
    }
    let dim = gk_dimension(g);
    match pointed_structure(g) {
        Ok(p) if is_gk3(g) => out.push(format!("gkdim={dim}, m={}, n={}", p.sources.len(), p.sinks.len())),
        _ => out.push(format!("gkdim={dim}")),
    }
    out.join("\n") + "\n"
}

fn require_gk3(g: &MultiGraph, what: &str) -> Result<(), Failure> {
    if is_gk3(g) {
        Ok(())
    } else {
        Err(unsupported(format!(
            "{what} needs a GK3 graph (connected, essential, GK dimension 3); got gkdim={}",
            gk_dimension(g)
        )))
    }
}

fn run(cli: Cli) -> Outcome {
    let format = cli.format;
    match cli.command {
        Command::Info { graph } => {
            let g = load(&graph, format)?;
            write_dot(&cli.dot, &g)?;
            print!("{}", info(&g));
            Ok(YES)
        }
        Command::NormalForm { graph, emit_moves, output } => {
            let g = load(&graph, format)?;
            require_gk3(&g, "normal-form")?;
            let (nf, trace) = to_normal_form(&g)?;
            if let Some(path) = emit_moves {
                write(&path, &(trace.to_json() + "\n"))?;
            }
            write_dot(&cli.dot, &nf)?;
            match output {
                Some(path) => write(&path, &render(&nf, format))?,
                None => print!("{}", render(&nf, format)),
            }
            eprintln!("{} moves", trace.len());
            Ok(YES)
        }
        Command::Decide { kind, a, b, certificate } => {
            let (e, f) = (load(&a, format)?, load(&b, format)?);
            let decision = match kind {
                Kind::Sse => decide_sse(&e, &f),
                Kind::Se => decide_se(&e, &f),
            };
            let verdict = serde_json::to_value(decision.verdict)?;
            println!("{}", verdict.as_str().unwrap_or_default());
            if let Some(refutation) = &decision.refutation {
                println!("{}", serde_json::to_string_pretty(refutation)?);
            }
            if let (Some(path), Some(cert)) = (certificate, &decision.certificate) {
                write(&path, &(serde_json::to_string_pretty(cert)? + "\n"))?;
            }
            Ok(match decision.verdict {
                Verdict::Yes => YES,
                Verdict::No => NO,
                Verdict::Unsupported => UNSUPPORTED,
            })
        }
        Command::Monoid { action, graph, expr, other, max_level } => {
            let g = load(&graph, format)?;
            let x = MonoidElement::parse(&g, &expr)?;
            if action == MonoidAction::Equal {
                let other = other.ok_or_else(|| anyhow!("`equal` needs a second element"))?;
                let y = MonoidElement::parse(&g, &other)?;
                if !g.is_essential() {
                    return Err(unsupported("flowing needs an essential graph"));
                }
                let top = x.max_shift().into_iter().chain(y.max_shift()).max().unwrap_or(0);
                return Ok(match equal_elements(&g, &x, &y, max_level.unwrap_or(top))? {
                    Equality::Equal { level } => {
                        println!("Equal (level {level})");
                        YES
                    }
                    Equality::NotEqualUpTo(level) => {
                        println!("NotEqualUpTo {level}");
                        NO
                    }
                });
            }
            require_gk3(&g, "monoid canon/atom")?;
            let p = pointed_structure(&g)?;
            if !p.is_normal_form() {
                return Err(unsupported("graph is not in normal form; run `sft normal-form` first"));
            }
            if action == MonoidAction::Atom {
                let atom = is_atom(&p, &x)?;
                println!("{atom}");
                return Ok(if atom { YES } else { NO });
            }
            let c = canonical_form(&p, &x)?;
            println!("{}", c.expand(&p));
            println!("{}", serde_json::to_string(&c)?);
            Ok(YES)
        }
        Command::Invariants { graph } => {
            let g = load(&graph, format)?;
            require_gk3(&g, "invariants")?;
            let (nf, trace) = to_normal_form(&g)?;
            let p = pointed_structure(&nf)?;
            let report = serde_json::json!({
                "normalized": !trace.is_empty(),
                "structure": p.to_json_value(),
                "table": invariant_table(&p)?,
            });
            write_dot(&cli.dot, &nf)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(YES)
        }
        Command::Oracle {
            search: OracleCommand::Sse { a, b, depth, max_vertices, max_classes, cache, emit_moves },
        } => {
            let (e, f) = (load(&a, format)?, load(&b, format)?);
            if depth == 0 || max_vertices == 0 || max_classes == 0 {
                return Err(anyhow!("limits must be positive").into());
            }
            let limits = SearchLimits { max_depth: depth, max_vertices, max_classes };
            let mut store = cache.as_deref().map(SearchCache::open).transpose()?;
            let found = match sse_search(&e, &f, limits, store.as_mut()) {
                Err(OracleError::LimitExceeded { vertices, limit }) => {
                    return Err(unsupported(format!("graph with {vertices} vertices exceeds the limit of {limit}")))
                }
                other => other?,
            };
            if let Some(store) = &store {
                store.save()?;
            }
            match found {
                Some(trace) => {
                    println!("FOUND {} moves", trace.len());
                    match emit_moves {
                        Some(path) => write(&path, &(trace.to_json() + "\n"))?,
                        None => println!("{}", trace.to_json()),
                    }
                    Ok(YES)
                }
                None => {
                    println!("NOT FOUND within depth {depth} (not a disproof)");
                    Ok(NO)
                }
            }
        }
        Command::Verify { a, b, certificate } => {
            let (e, f) = (load(&a, format)?, load(&b, format)?);
            let text =
                fs::read_to_string(&certificate).with_context(|| format!("reading {}", certificate.display()))?;
            let cert: SseCertificate = serde_json::from_str(&text).context("parsing certificate")?;
            match verify_certificate(&e, &f, &cert) {
                Ok(()) => {
                    println!("VALID");
                    Ok(YES)
                }
                Err(r) => {
                    println!("REJECTED: {r}");
                    Ok(NO)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { ERROR } else { YES });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}
