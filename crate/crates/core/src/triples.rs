//! Line-oriented triple export.
//!
//! Every element yields a type triple plus one data triple per attribute.
//! Every relation yields one triple. Lines are sorted, so output depends only on graph content.

use std::fmt::Write as _;

use crate::kernel::{AttrValue, InstanceGraph, RelationKind};

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const ONTRUST: &str = "https://w3id.org/ontrust#";
pub const GUFO: &str = "http://purl.org/nemo/gufo#";
const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

fn subject(id: &str) -> String {
    format!("<urn:ontrust:{}>", local_name(id))
}

pub fn predicate(kind: RelationKind) -> String {
    match kind {
        RelationKind::InheresIn => format!("<{GUFO}inheresIn>"),
        RelationKind::ComponentOf => format!("<{GUFO}isComponentOf>"),
        k => format!("<{ONTRUST}{}>", k.name()),
    }
}

/// Double-quoted literal with non-ASCII and control characters escaped.
fn literal(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if c.is_ascii() && !c.is_ascii_control() => out.push(c),
            c if (c as u32) <= 0xFFFF => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => {
                let _ = write!(out, "\\U{:08X}", c as u32);
            }
        }
    }
    out.push('"');
    out
}

fn object(v: &AttrValue) -> String {
    match v {
        AttrValue::Bool(b) => format!("\"{b}\"^^<{XSD}boolean>"),
        AttrValue::Number(n) => format!("\"{n:?}\"^^<{XSD}double>"),
        AttrValue::Text(t) => literal(t),
    }
}

pub fn export_triples(g: &InstanceGraph) -> String {
    let mut lines = Vec::new();
    for e in g.elements() {
        let s = subject(e.id.as_str());
        lines.push(format!("{s} <{RDF_TYPE}> <{ONTRUST}{}> .", e.kind.name()));
        for (k, v) in &e.attrs {
            lines.push(format!("{s} <{ONTRUST}{}> {} .", local_name(k), object(v)));
        }
    }
    for r in g.relations() {
        lines.push(format!("{} {} {} .", subject(r.from.as_str()), predicate(r.kind), subject(r.to.as_str())));
    }
    lines.sort();
    let mut out = String::new();
    for l in lines {
        out.push_str(&l);
        out.push('\n');
    }
    out
}

/// Percent-encodes everything outside the unreserved IRI characters.
fn local_name(k: &str) -> String {
    let mut s = String::new();
    for b in k.bytes() {
        if b.is_ascii_alphanumeric() || b"-._~".contains(&b) {
            s.push(b as char);
        } else {
            let _ = write!(s, "%{b:02X}");
        }
    }
    s
}
