//! The ONT-I instance document: a TOML file with elements, relations,
//! declared scales and evaluation contexts.
//!
//! ```toml
//! version = "ontrust-i/1"
//! elements = [
//!   { id = "ann", kind = "HumanAgent", label = "Ann" },
//!   { id = "b1", kind = "CapabilityBelief", attrs = { intensity = "lmh:High" } },
//! ]
//! relations = [
//!   { kind = "inheresIn", from = "b1", to = "ann" },
//! ]
//! ```
//!
//! [`serialize`] writes the canonical form: elements sorted by id, relations by
//! (kind, from, to), contexts by name.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::ops::Range;

use serde::Deserialize;
use thiserror::Error;
use toml::Spanned;

use crate::kernel::{AttrValue, Attrs, Element, ElementId, ElementKind, InstanceGraph, KernelError, RelationKind};
use crate::measure::{Scale, ScaleRegistry};
use crate::quant::{self, Context};
use crate::FORMAT_VERSION;

/// Attributes parsed as measures and checked at load time.
pub const MEASURE_ATTRS: [&str; 4] = [quant::INTENSITY, quant::PERFORMANCE, quant::LIKELIHOOD, "degree"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    Version,
    UnknownKind,
    DuplicateId,
    DanglingEndpoint,
    SignatureViolation,
    InvalidValue,
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct Document {
    pub graph: InstanceGraph,
    pub scales: ScaleRegistry,
    pub contexts: Vec<Context>,
}

impl Document {
    pub fn new(graph: InstanceGraph) -> Self {
        Document { graph, ..Default::default() }
    }

    /// A declared context, or the built-in `default` context activating every influence.
    pub fn context(&self, name: &str) -> Option<Context> {
        self.contexts
            .iter()
            .find(|c| c.name == name)
            .cloned()
            .or_else(|| (name == "default").then(|| Context::all_active(&self.graph)))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDoc {
    version: Spanned<String>,
    #[serde(default)]
    scales: Vec<Spanned<RawScale>>,
    #[serde(default)]
    elements: Vec<Spanned<RawElement>>,
    #[serde(default)]
    relations: Vec<Spanned<RawRelation>>,
    #[serde(default)]
    contexts: Vec<Spanned<RawContext>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScale {
    name: String,
    #[serde(rename = "type")]
    kind: String,
    #[serde(default)]
    labels: Vec<String>,
    lo: Option<f64>,
    hi: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawElement {
    id: String,
    kind: String,
    label: Option<String>,
    #[serde(default)]
    attrs: BTreeMap<String, toml::Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRelation {
    kind: String,
    from: String,
    to: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawContext {
    name: String,
    #[serde(default)]
    active: Vec<String>,
    #[serde(default)]
    overrides: Vec<RawOverride>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOverride {
    element: String,
    measure: String,
    value: String,
}

struct Lines(Vec<usize>);

impl Lines {
    fn new(text: &str) -> Self {
        Lines(text.char_indices().filter(|(_, c)| *c == '\n').map(|(i, _)| i).collect())
    }

    fn line(&self, span: Range<usize>) -> usize {
        self.0.partition_point(|&nl| nl < span.start) + 1
    }
}

fn convert_attr(v: &toml::Value) -> Option<AttrValue> {
    match v {
        toml::Value::Boolean(b) => Some(AttrValue::Bool(*b)),
        toml::Value::Integer(i) => Some(AttrValue::Number(*i as f64)),
        toml::Value::Float(f) if f.is_finite() => Some(AttrValue::Number(*f)),
        toml::Value::String(s) => Some(AttrValue::Text(s.clone())),
        _ => None,
    }
}

pub fn parse(text: &str) -> Result<Document, ParseError> {
    let lines = Lines::new(text);
    let raw: RawDoc = toml::from_str(text).map_err(|e| ParseError {
        line: e.span().map_or(1, |s| lines.line(s)),
        kind: ParseErrorKind::Syntax,
        message: e.message().trim().to_string(),
    })?;
    let err = |span: Range<usize>, kind, message: String| ParseError { line: lines.line(span), kind, message };

    if raw.version.get_ref() != FORMAT_VERSION {
        return Err(err(
            raw.version.span(),
            ParseErrorKind::Version,
            format!("unsupported version `{}`; expected `{FORMAT_VERSION}`", raw.version.get_ref()),
        ));
    }

    let mut scales = ScaleRegistry::default();
    for s in &raw.scales {
        let (span, s) = (s.span(), s.get_ref());
        let scale = match (s.kind.as_str(), s.lo, s.hi) {
            ("ordinal", None, None) => Scale::ordinal_owned(&s.name, s.labels.clone()),
            ("continuous", Some(lo), Some(hi)) if s.labels.is_empty() => Scale::continuous(&s.name, lo, hi),
            _ => {
                return Err(err(
                    span,
                    ParseErrorKind::InvalidValue,
                    format!("scale `{}`: expected type \"ordinal\" with labels or \"continuous\" with lo and hi", s.name),
                ))
            }
        };
        scale
            .and_then(|sc| scales.register(sc))
            .map_err(|e| err(span.clone(), ParseErrorKind::InvalidValue, e.to_string()))?;
    }

    let mut graph = InstanceGraph::new();
    for e in &raw.elements {
        let (span, e) = (e.span(), e.get_ref());
        let kind: ElementKind = e
            .kind
            .parse()
            .map_err(|x: KernelError| err(span.clone(), ParseErrorKind::UnknownKind, x.to_string()))?;
        let mut attrs = Attrs::new();
        for (k, v) in &e.attrs {
            let value = convert_attr(v).ok_or_else(|| {
                err(span.clone(), ParseErrorKind::InvalidValue, format!("attribute `{k}` of `{}` must be a string, number or boolean", e.id))
            })?;
            if MEASURE_ATTRS.contains(&k.as_str()) {
                scales.parse_attr(&value).map_err(|x| {
                    err(span.clone(), ParseErrorKind::InvalidValue, format!("attribute `{k}` of `{}`: {x}", e.id))
                })?;
            }
            attrs.insert(k.clone(), value);
        }
        if kind == ElementKind::Influence {
            let w = attrs.get(quant::WEIGHT).and_then(AttrValue::as_number);
            if !w.is_some_and(|w| (-1.0..=1.0).contains(&w)) {
                return Err(err(
                    span,
                    ParseErrorKind::InvalidValue,
                    format!("influence `{}` needs a numeric weight in [-1, 1]", e.id),
                ));
            }
        }
        let id = ElementId::new(e.id.clone());
        graph
            .insert_element(Element { id, kind, label: e.label.clone(), attrs })
            .map_err(|x| err(span, ParseErrorKind::DuplicateId, x.to_string()))?;
    }

    for r in &raw.relations {
        let (span, r) = (r.span(), r.get_ref());
        let kind: RelationKind = r
            .kind
            .parse()
            .map_err(|x: KernelError| err(span.clone(), ParseErrorKind::UnknownKind, x.to_string()))?;
        graph
            .add_relation(kind, &ElementId::new(r.from.clone()), &ElementId::new(r.to.clone()))
            .map_err(|x| {
                let k = match x {
                    KernelError::DanglingEndpoint(_) => ParseErrorKind::DanglingEndpoint,
                    _ => ParseErrorKind::SignatureViolation,
                };
                err(span, k, x.to_string())
            })?;
    }

    let mut contexts: Vec<Context> = Vec::new();
    for c in &raw.contexts {
        let (span, c) = (c.span(), c.get_ref());
        let bad = |m: String| err(span.clone(), ParseErrorKind::InvalidValue, m);
        if contexts.iter().any(|x| x.name == c.name) {
            return Err(bad(format!("duplicate context `{}`", c.name)));
        }
        let mut ctx = Context::new(c.name.clone());
        for a in &c.active {
            let id = ElementId::new(a.clone());
            if graph.kind_of(&id) != Some(ElementKind::Influence) {
                return Err(bad(format!("context `{}` activates `{a}`, which is not an influence", c.name)));
            }
            ctx.active.insert(id);
        }
        for o in &c.overrides {
            let id = ElementId::new(o.element.clone());
            if !graph.contains(&id) {
                return Err(bad(format!("context `{}` overrides unknown element `{}`", c.name, o.element)));
            }
            let v = scales.parse_text(&o.value).map_err(|x| bad(format!("context `{}`: {x}", c.name)))?;
            ctx.overrides.insert((id, o.measure.clone()), v);
        }
        contexts.push(ctx);
    }
    contexts.sort_by(|a, b| a.name.cmp(&b.name));

    Ok(Document { graph, scales, contexts })
}

/// TOML basic string with every non-printable or non-ASCII character escaped.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 || c as u32 == 0x7f => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c if c.is_ascii() => out.push(c),
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

fn key(k: &str) -> String {
    if !k.is_empty() && k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
        k.to_string()
    } else {
        quote(k)
    }
}

fn number(n: f64) -> String {
    format!("{n:?}")
}

fn attr(v: &AttrValue) -> String {
    match v {
        AttrValue::Bool(b) => b.to_string(),
        AttrValue::Number(n) => number(*n),
        AttrValue::Text(t) => quote(t),
    }
}

fn list(out: &mut String, name: &str, items: Vec<String>) {
    if items.is_empty() {
        let _ = writeln!(out, "{name} = []");
        return;
    }
    let _ = writeln!(out, "{name} = [");
    for i in items {
        let _ = writeln!(out, "  {i},");
    }
    let _ = writeln!(out, "]");
}

struct Fields(Vec<String>);

impl Fields {
    fn new() -> Self {
        Fields(Vec::new())
    }
    fn add(mut self, k: &str, v: String) -> Self {
        self.0.push(format!("{} = {v}", key(k)));
        self
    }
}

impl fmt::Display for Fields {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            f.write_str("{}")
        } else {
            write!(f, "{{ {} }}", self.0.join(", "))
        }
    }
}

fn strings<'a>(items: impl IntoIterator<Item = &'a str>) -> String {
    format!("[{}]", items.into_iter().map(quote).collect::<Vec<_>>().join(", "))
}

pub fn serialize(doc: &Document) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "version = {}", quote(FORMAT_VERSION));

    let mut scales: Vec<&Scale> = doc.scales.custom().collect();
    scales.sort_by(|a, b| a.name().cmp(b.name()));
    if !scales.is_empty() {
        let items = scales
            .iter()
            .map(|s| {
                let f = Fields::new().add("name", quote(s.name()));
                match s {
                    Scale::Ordinal { labels, .. } => f
                        .add("type", quote("ordinal"))
                        .add("labels", strings(labels.iter().map(String::as_str))),
                    Scale::Continuous { lo, hi, .. } => {
                        f.add("type", quote("continuous")).add("lo", number(*lo)).add("hi", number(*hi))
                    }
                }
                .to_string()
            })
            .collect();
        list(&mut out, "scales", items);
    }

    let mut elements: Vec<&Element> = doc.graph.elements().collect();
    elements.sort_by(|a, b| a.id.cmp(&b.id));
    let items = elements
        .iter()
        .map(|e| {
            let mut f = Fields::new().add("id", quote(e.id.as_str())).add("kind", quote(e.kind.name()));
            if let Some(l) = &e.label {
                f = f.add("label", quote(l));
            }
            if !e.attrs.is_empty() {
                let attrs = e.attrs.iter().fold(Fields::new(), |f, (k, v)| f.add(k, attr(v)));
                f = f.add("attrs", attrs.to_string());
            }
            f.to_string()
        })
        .collect();
    list(&mut out, "elements", items);

    let mut relations: Vec<(&str, &ElementId, &ElementId)> =
        doc.graph.relations().iter().map(|r| (r.kind.name(), &r.from, &r.to)).collect();
    relations.sort();
    let items = relations
        .iter()
        .map(|(k, a, b)| {
            Fields::new()
                .add("kind", quote(k))
                .add("from", quote(a.as_str()))
                .add("to", quote(b.as_str()))
                .to_string()
        })
        .collect();
    list(&mut out, "relations", items);

    let mut contexts: Vec<&Context> = doc.contexts.iter().collect();
    contexts.sort_by(|a, b| a.name.cmp(&b.name));
    if !contexts.is_empty() {
        let items = contexts
            .iter()
            .map(|c| {
                let active: BTreeSet<&str> = c.active.iter().map(ElementId::as_str).collect();
                let overrides: Vec<String> = c
                    .overrides
                    .iter()
                    .map(|((e, m), v)| {
                        Fields::new()
                            .add("element", quote(e.as_str()))
                            .add("measure", quote(m))
                            .add("value", quote(&v.to_string()))
                            .to_string()
                    })
                    .collect();
                let mut f = Fields::new().add("name", quote(&c.name)).add("active", strings(active));
                if !overrides.is_empty() {
                    f = f.add("overrides", format!("[{}]", overrides.join(", ")));
                }
                f.to_string()
            })
            .collect();
        list(&mut out, "contexts", items);
    }
    out
}

/// Serializes a bare graph without scales or contexts.
pub fn serialize_graph(g: &InstanceGraph) -> String {
    serialize(&Document::new(g.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"version = "ontrust-i/1"
scales = [
  { name = "stars", type = "ordinal", labels = ["1", "2", "3"] },
]
elements = [
  { id = "ann", kind = "HumanAgent", label = "Ann \"A\" Éva" },
  { id = "b", kind = "CapabilityBelief", attrs = { intensity = "stars:2", performanceLevel = 0.5 } },
  { id = "f", kind = "Influence", attrs = { weight = -0.25 } },
  { id = "p", kind = "Perception" },
]
relations = [
  { kind = "influencedBelief", from = "f", to = "b" },
  { kind = "influences", from = "p", to = "f" },
  { kind = "inheresIn", from = "b", to = "ann" },
]
contexts = [
  { name = "c", active = ["f"], overrides = [{ element = "b", measure = "intensity", value = "lmh:High" }] },
]
"#;

    #[test]
    fn canonical_round_trip() {
        let doc = parse(SMALL).unwrap();
        assert_eq!(doc.graph.len(), 4);
        assert_eq!(doc.contexts[0].active.len(), 1);
        let text = serialize(&doc);
        assert_eq!(serialize(&parse(&text).unwrap()), text);
        assert!(text.contains("label = \"Ann \\\"A\\\" \\u00C9va\""));
    }

    #[test]
    fn empty_document() {
        let doc = Document::default();
        let text = serialize(&doc);
        assert_eq!(text, "version = \"ontrust-i/1\"\nelements = []\nrelations = []\n");
        assert!(parse(&text).unwrap().graph.is_empty());
    }

    #[test]
    fn unknown_relation_kind_reports_line() {
        let text = "version = \"ontrust-i/1\"\nelements = [\n  { id = \"a\", kind = \"HumanAgent\" },\n]\nrelations = [\n  { kind = \"trustz\", from = \"a\", to = \"a\" },\n]\n";
        let e = parse(text).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownKind);
        assert_eq!(e.line, 6);
    }

    #[test]
    fn errors() {
        let v = |body: &str| parse(&format!("version = \"ontrust-i/1\"\n{body}")).unwrap_err().kind;
        assert_eq!(parse("version = \"x\"").unwrap_err().kind, ParseErrorKind::Version);
        assert_eq!(parse("version = ").unwrap_err().kind, ParseErrorKind::Syntax);
        assert_eq!(v("elements = [{ id = \"a\", kind = \"Angel\" }]"), ParseErrorKind::UnknownKind);
        assert_eq!(
            v("elements = [{ id = \"a\", kind = \"HumanAgent\" }, { id = \"a\", kind = \"Goal\" }]"),
            ParseErrorKind::DuplicateId
        );
        assert_eq!(v("elements = [{ id = \"f\", kind = \"Influence\", attrs = { weight = 1.5 } }]"), ParseErrorKind::InvalidValue);
        assert_eq!(
            v("elements = [{ id = \"o\", kind = \"PhysicalObject\" }]\nrelations = [{ kind = \"trusts\", from = \"o\", to = \"o\" }]"),
            ParseErrorKind::SignatureViolation
        );
        assert_eq!(v("relations = [{ kind = \"trusts\", from = \"x\", to = \"y\" }]"), ParseErrorKind::DanglingEndpoint);
        assert_eq!(
            v("elements = [{ id = \"b\", kind = \"IntentionBelief\", attrs = { intensity = \"lmh:Huge\" } }]"),
            ParseErrorKind::InvalidValue
        );
    }
}
