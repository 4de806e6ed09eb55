use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ontrust::constraints::{self, AxiomId, AxiomSet, Severity};
use ontrust::finder::{Finder, Property, Signature, WitnessQuery};
use ontrust::kernel::ElementId;
use ontrust::onti::{self, Document};
use ontrust::quant::{Quant, Strategy};
use ontrust::{report, risk, triples, Execution};

#[derive(Parser)]
#[command(name = "ontrust", about = "Trust-model engine over ONT-I instance documents")]
#[command(version = concat!(env!("CARGO_PKG_VERSION"), " (format ontrust-i/1)"))]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DiagFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    Triples,
    Onti,
}

#[derive(Subcommand)]
enum Command {
    /// Check a document against the axioms.
    Validate {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: DiagFormat,
        #[arg(long = "disable", value_name = "AXIOM")]
        disable: Vec<AxiomId>,
    },
    /// Most specific trust kind of every trust.
    Classify {
        file: PathBuf,
        #[arg(long)]
        trust: Option<String>,
    },
    /// Trust degrees in a named context.
    Degree {
        file: PathBuf,
        #[arg(long)]
        context: String,
        #[arg(long, default_value = "lmh")]
        scale: String,
        #[arg(long, default_value = "product-mean")]
        strategy: Strategy,
        #[arg(long)]
        trust: Option<String>,
        #[arg(long)]
        sequential: bool,
    },
    /// Risk chains from threatening situations to hurt intentions.
    Risk { file: PathBuf },
    /// Search for a bounded witness of a property.
    Find {
        #[arg(long)]
        sig: PathBuf,
        #[arg(long = "disable", value_name = "AXIOM")]
        disable: Vec<AxiomId>,
        #[arg(long, default_value = "satisfiable")]
        property: Property,
        #[arg(long)]
        bound: Option<usize>,
        #[arg(long)]
        sequential: bool,
    },
    /// Count models up to isomorphism.
    Count {
        #[arg(long)]
        sig: PathBuf,
        #[arg(long = "disable", value_name = "AXIOM")]
        disable: Vec<AxiomId>,
        #[arg(long)]
        bound: Option<usize>,
        #[arg(long)]
        sequential: bool,
    },
    /// Export a document.
    Export {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "triples")]
        format: ExportFormat,
    },
    /// Rewrite a document in canonical form.
    Fmt {
        file: PathBuf,
        /// Exit 1 if the file is not canonical instead of printing it.
        #[arg(long)]
        check: bool,
        /// Overwrite the file in place.
        #[arg(long, conflicts_with = "check")]
        write: bool,
    },
}

enum Failure {
    /// Exit 1: the input was understood but has errors.
    Findings(String),
    /// Exit 2: the input could not be read or understood.
    Usage(String),
}

type Outcome = Result<(String, bool), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Document, Failure> {
    let text = read(path)?;
    onti::parse(&text).map_err(|e| Failure::Usage(format!("{}:{}: {e}", path.display(), e.line)))
}

fn execution(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn enabled(disable: &[AxiomId]) -> AxiomSet {
    disable.iter().fold(AxiomSet::all(), |s, a| s.without(*a))
}

fn signature(path: &Path, bound: Option<usize>) -> Result<Signature, Failure> {
    let sig = Signature::from_toml(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(match bound {
        Some(b) => sig.with_bound(b),
        None => sig,
    })
}

fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Validate { file, format, disable } => {
            let doc = load(&file)?;
            let diags = constraints::validate_with(&doc.graph, enabled(&disable), Execution::Parallel);
            let failed = diags.iter().any(|d| d.severity == Severity::Error);
            let out = match format {
                DiagFormat::Text => report::diagnostics_text(&diags),
                DiagFormat::Json => {
                    serde_json::to_string_pretty(&diags).map_err(|e| Failure::Usage(e.to_string()))? + "\n"
                }
            };
            Ok((out, failed))
        }
        Command::Classify { file, trust } => {
            let doc = load(&file)?;
            let only = trust.map(ElementId::new);
            if let Some(t) = &only {
                if !doc.graph.contains(t) {
                    return Err(Failure::Usage(format!("unknown element `{t}`")));
                }
            }
            let out = report::classification_text(&doc.graph, only.as_ref());
            let failed = out.lines().any(|l| l.contains(": error: "));
            Ok((out, failed))
        }
        Command::Degree { file, context, scale, strategy, trust, sequential } => {
            let doc = load(&file)?;
            let ctx = doc.context(&context).ok_or_else(|| Failure::Usage(format!("unknown context `{context}`")))?;
            let scale = doc.scales.get(&scale).map_err(|e| Failure::Usage(e.to_string()))?.clone();
            let trusts: Vec<ElementId> = match trust {
                Some(t) => vec![ElementId::new(t)],
                None => {
                    let mut v: Vec<ElementId> =
                        doc.graph.elements_of(ontrust::ElementKind::Trust).map(|e| e.id.clone()).collect();
                    v.sort();
                    v
                }
            };
            let q = Quant::new(&doc.graph)
                .with_scales(doc.scales.clone())
                .with_strategy(strategy)
                .with_execution(execution(sequential));
            let mut reports = Vec::new();
            for r in q.trust_degrees(&trusts, &ctx, &scale) {
                reports.push(r.map_err(|e| Failure::Findings(e.to_string()))?);
            }
            Ok((report::degree_table(&reports), false))
        }
        Command::Risk { file } => {
            let doc = load(&file)?;
            let chains = risk::derive_chains_with(&doc.graph, Execution::Parallel);
            Ok((report::chains_text(&doc.graph, &chains), false))
        }
        Command::Find { sig, disable, property, bound, sequential } => {
            let sig = signature(&sig, bound)?;
            let query = WitnessQuery::new(property, enabled(&disable));
            let found = Finder::new(execution(sequential))
                .find_witness(&sig, &query)
                .map_err(|e| Failure::Usage(e.to_string()))?;
            Ok(match found {
                Some(g) => (onti::serialize_graph(&g), false),
                None => (format!("no witness within bound {}\n", sig.effective_bound()), false),
            })
        }
        Command::Count { sig, disable, bound, sequential } => {
            let sig = signature(&sig, bound)?;
            let n = Finder::new(execution(sequential))
                .count_models(&sig, enabled(&disable))
                .map_err(|e| Failure::Usage(e.to_string()))?;
            Ok((format!("{n}\n"), false))
        }
        Command::Export { file, format } => {
            let doc = load(&file)?;
            Ok(match format {
                ExportFormat::Triples => (triples::export_triples(&doc.graph), false),
                ExportFormat::Onti => (onti::serialize(&doc), false),
            })
        }
        Command::Fmt { file, check, write } => {
            let text = read(&file)?;
            let doc = onti::parse(&text).map_err(|e| Failure::Usage(format!("{}:{}: {e}", file.display(), e.line)))?;
            let canonical = onti::serialize(&doc);
            if check {
                if canonical == text {
                    Ok((String::new(), false))
                } else {
                    Err(Failure::Findings(format!("{} is not in canonical form", file.display())))
                }
            } else if write {
                std::fs::write(&file, canonical).map_err(|e| Failure::Usage(format!("{}: {e}", file.display())))?;
                Ok((String::new(), false))
            } else {
                Ok((canonical, false))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok((out, failed)) => {
            print!("{out}");
            ExitCode::from(u8::from(failed))
        }
        Err(Failure::Findings(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
