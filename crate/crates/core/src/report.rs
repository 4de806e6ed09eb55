//! Text renderings shared by the CLI and the golden-file tests.

use std::fmt::Write as _;

use crate::constraints::{Diagnostic, Severity};
use crate::kernel::{ElementId, ElementKind, InstanceGraph};
use crate::quant::{Convergence, DegreeReport};
use crate::risk::RiskChain;
use crate::typology;

pub fn summary(diags: &[Diagnostic]) -> String {
    let errors = diags.iter().filter(|d| d.severity == Severity::Error).count();
    let warnings = diags.len() - errors;
    format!("{errors} errors, {warnings} warnings")
}

/// One line per diagnostic followed by the summary line.
pub fn diagnostics_text(diags: &[Diagnostic]) -> String {
    let mut out = String::new();
    for d in diags {
        let _ = writeln!(out, "{}", d.to_line());
    }
    let _ = writeln!(out, "{}", summary(diags));
    out
}

/// `trust: trustor->trustee: Kind` per trust, sorted by trust id.
pub fn classification_text(g: &InstanceGraph, only: Option<&ElementId>) -> String {
    let mut trusts: Vec<&ElementId> = g
        .elements_of(ElementKind::Trust)
        .map(|e| &e.id)
        .filter(|t| only.is_none_or(|o| o == *t))
        .collect();
    trusts.sort();
    let mut out = String::new();
    for t in trusts {
        match typology::resolve(g, t) {
            Ok(v) => {
                let kind = typology::classify_view(g, &v);
                let _ = writeln!(out, "{t}: {}->{}: {kind}", v.trustor, v.trustee);
            }
            Err(e) => {
                let _ = writeln!(out, "{t}: error: {e}");
            }
        }
    }
    out
}

pub fn degree_table(reports: &[DegreeReport]) -> String {
    let mut out = String::from("trust\tcontext\tdegree\ton-scale\tconvergence\n");
    for r in reports {
        let conv = match r.convergence {
            Convergence::Exact => "exact".to_string(),
            Convergence::Iterative { iterations, residual } => format!("iterative({iterations}, {residual:.1e})"),
        };
        let _ = writeln!(out, "{}\t{}\t{:.6}\t{}\t{conv}", r.trust, r.context, r.degree, r.degree_on_scale);
    }
    out
}

pub fn chains_text(g: &InstanceGraph, chains: &[RiskChain]) -> String {
    let mut out = String::new();
    for c in chains {
        let tag = if c.is_potential() { "POTENTIAL" } else { "CHAIN" };
        let _ = write!(out, "{tag} {} -> {} -> {}", c.action, c.situation, c.threat);
        if let Some(l) = &c.loss {
            let _ = write!(out, " -> {l}");
        }
        out.push('\n');
        for i in &c.hurt_intentions {
            let _ = writeln!(out, "  hurts {i} ({})", g.label_or_id(i));
        }
        for d in &c.vulnerabilities {
            let _ = writeln!(out, "  vulnerability {d}");
        }
    }
    let complete = chains.iter().filter(|c| !c.is_potential()).count();
    let _ = writeln!(out, "{complete} complete, {} potential", chains.len() - complete);
    out
}
