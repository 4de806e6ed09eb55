//! Context-dependent trust degrees.
//!
//! Pipeline: normalize measures, add weighted influences to belief
//! intensities, score beliefs multiplicatively, aggregate per trust. Trust to
//! trust influences are solved per strongly connected component: exactly in
//! topological order when acyclic, by damped fixed-point iteration otherwise.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;
use thiserror::Error;

use crate::exec::Execution;
use crate::kernel::{ElementId, ElementKind, InstanceGraph, RelationKind};
use crate::measure::{MeasureError, MeasureValue, Scale, ScaleRegistry};
use crate::typology::{self, TrustView, TypologyError};

pub const DAMPING: f64 = 0.5;
pub const TOLERANCE: f64 = 1e-9;
pub const MAX_ITERATIONS: usize = 100;
pub const EQUAL_EPSILON: f64 = 1e-12;

pub const INTENSITY: &str = "intensity";
pub const PERFORMANCE: &str = "performanceLevel";
pub const LIKELIHOOD: &str = "manifestationLikelihood";
pub const WEIGHT: &str = "weight";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantError {
    #[error("unknown element `{0}`")]
    UnknownElement(ElementId),
    #[error("`{0}` is not a moment belief")]
    NotABelief(ElementId),
    #[error("belief `{0}` has no intensity")]
    MissingIntensity(ElementId),
    #[error("measure `{measure}` of `{element}`: {source}")]
    Measure { element: ElementId, measure: String, source: MeasureError },
    #[error("measure `{measure}` is not applicable to `{element}`")]
    MisplacedMeasure { element: ElementId, measure: String },
    #[error("malformed influence `{influence}`: {reason}")]
    MalformedInfluence { influence: ElementId, reason: String },
    #[error(transparent)]
    Typology(#[from] TypologyError),
    #[error("trust-to-trust influences did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergent { iterate: BTreeMap<ElementId, f64>, residual: f64, iterations: usize },
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
    #[error("context `{context}` activates `{influence}`, which is not an influence")]
    UnknownInfluence { context: String, influence: ElementId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum SourceKind {
    /// Trust influencing trust.
    F1Trust,
    F2MentalMoment,
    F3Signal,
    F4Evidence,
}

impl SourceKind {
    pub fn of(kind: ElementKind) -> Option<SourceKind> {
        if kind.is_a(ElementKind::Trust) {
            Some(SourceKind::F1Trust)
        } else if kind.is_a(ElementKind::MentalMoment) {
            Some(SourceKind::F2MentalMoment)
        } else if kind.is_a(ElementKind::TrustCalibrationSignal) {
            Some(SourceKind::F3Signal)
        } else if kind == ElementKind::TrustworthinessEvidence {
            Some(SourceKind::F4Evidence)
        } else {
            None
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            SourceKind::F1Trust => "F1",
            SourceKind::F2MentalMoment => "F2",
            SourceKind::F3Signal => "F3",
            SourceKind::F4Evidence => "F4",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfluenceEdge {
    pub influence: ElementId,
    pub source_kind: SourceKind,
    pub source: ElementId,
    pub belief: ElementId,
    pub weight: f64,
}

pub fn influence_edge(g: &InstanceGraph, influence: &ElementId) -> Result<InfluenceEdge, QuantError> {
    let e = g.element(influence).ok_or_else(|| QuantError::UnknownElement(influence.clone()))?;
    let bad = |reason: &str| QuantError::MalformedInfluence { influence: influence.clone(), reason: reason.into() };
    if e.kind != ElementKind::Influence {
        return Err(bad("not an Influence element"));
    }
    let one = |v: Vec<&ElementId>, what: &str| match v.as_slice() {
        [x] => Ok((*x).clone()),
        _ => Err(bad(&format!("expected exactly one {what}, found {}", v.len()))),
    };
    let source = one(g.incoming(influence, RelationKind::Influences).collect(), "source")?;
    let belief = one(g.outgoing(influence, RelationKind::InfluencedBelief).collect(), "belief")?;
    let source_kind = g.kind_of(&source).and_then(SourceKind::of).ok_or_else(|| bad("source kind"))?;
    let weight = e
        .attrs
        .get(WEIGHT)
        .and_then(|w| w.as_number())
        .ok_or_else(|| bad("missing numeric weight"))?;
    if !(-1.0..=1.0).contains(&weight) {
        return Err(bad("weight outside [-1, 1]"));
    }
    Ok(InfluenceEdge { influence: influence.clone(), source_kind, source, belief, weight })
}

/// Well-formed influences of the graph, in insertion order.
pub fn influence_edges(g: &InstanceGraph) -> Vec<InfluenceEdge> {
    g.elements_of(ElementKind::Influence)
        .filter_map(|e| influence_edge(g, &e.id).ok())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Context {
    pub name: String,
    pub active: BTreeSet<ElementId>,
    pub overrides: BTreeMap<(ElementId, String), MeasureValue>,
}

impl Context {
    pub fn new(name: impl Into<String>) -> Self {
        Context { name: name.into(), active: BTreeSet::new(), overrides: BTreeMap::new() }
    }

    /// The built-in context: every influence of the graph is active.
    pub fn all_active(g: &InstanceGraph) -> Self {
        let mut c = Context::new("default");
        c.active = g.elements_of(ElementKind::Influence).map(|e| e.id.clone()).collect();
        c
    }

    pub fn activate(mut self, influence: impl Into<ElementId>) -> Self {
        self.active.insert(influence.into());
        self
    }

    pub fn with_override(mut self, element: impl Into<ElementId>, measure: &str, value: MeasureValue) -> Self {
        self.overrides.insert((element.into(), measure.to_string()), value);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Strategy {
    /// Belief scores multiply intensity with disposition factors; the degree is their mean.
    ProductMean,
    /// Same scores, aggregated by minimum.
    ProductMin,
}

impl Strategy {
    pub const ALL: [Strategy; 2] = [Strategy::ProductMean, Strategy::ProductMin];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::ProductMean => "product-mean",
            Strategy::ProductMin => "product-min",
        }
    }

    fn aggregate(self, scores: &[f64]) -> f64 {
        match self {
            Strategy::ProductMean => scores.iter().sum::<f64>() / scores.len() as f64,
            Strategy::ProductMin => scores.iter().copied().fold(1.0, f64::min),
        }
    }
}

impl Default for Strategy {
    fn default() -> Self {
        Strategy::ProductMean
    }
}

impl FromStr for Strategy {
    type Err = QuantError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| QuantError::UnknownStrategy(s.into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Convergence {
    Exact,
    Iterative { iterations: usize, residual: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contribution {
    pub influence: ElementId,
    pub source_kind: SourceKind,
    pub weight: f64,
    pub strength: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeliefReport {
    pub belief: ElementId,
    pub kind: ElementKind,
    pub base_intensity: f64,
    pub effective_intensity: f64,
    pub performance: Option<f64>,
    pub likelihood: Option<f64>,
    /// Measures that fell back to the engine default.
    pub defaults: Vec<String>,
    pub contributions: Vec<Contribution>,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeReport {
    pub trust: ElementId,
    pub context: String,
    pub strategy: &'static str,
    pub degree: f64,
    pub degree_on_scale: MeasureValue,
    pub per_belief: Vec<BeliefReport>,
    pub convergence: Convergence,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Propagation {
    pub degrees: BTreeMap<ElementId, f64>,
    pub convergence: BTreeMap<ElementId, Convergence>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ContextOrder {
    AHigher,
    BHigher,
    Equal,
}

/// Computation front-end bound to a graph and its scales.
#[derive(Debug, Clone)]
pub struct Quant<'a> {
    g: &'a InstanceGraph,
    scales: ScaleRegistry,
    strategy: Strategy,
    exec: Execution,
}

impl<'a> Quant<'a> {
    pub fn new(g: &'a InstanceGraph) -> Self {
        Quant { g, scales: ScaleRegistry::default(), strategy: Strategy::default(), exec: Execution::Sequential }
    }

    pub fn with_scales(mut self, scales: ScaleRegistry) -> Self {
        self.scales = scales;
        self
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn measure(&self, ctx: &Context, element: &ElementId, name: &str) -> Result<Option<MeasureValue>, QuantError> {
        if let Some(v) = ctx.overrides.get(&(element.clone(), name.to_string())) {
            return Ok(Some(v.clone()));
        }
        let e = self.g.element(element).ok_or_else(|| QuantError::UnknownElement(element.clone()))?;
        e.attrs
            .get(name)
            .map(|a| self.scales.parse_attr(a))
            .transpose()
            .map_err(|source| QuantError::Measure { element: element.clone(), measure: name.into(), source })
    }

    fn normalized(&self, ctx: &Context, element: &ElementId, name: &str) -> Result<Option<f64>, QuantError> {
        self.measure(ctx, element, name)?
            .map(|m| m.normalize())
            .transpose()
            .map_err(|source| QuantError::Measure { element: element.clone(), measure: name.into(), source })
    }

    /// Active influences grouped by target belief.
    fn active_edges(&self, ctx: &Context) -> Result<HashMap<ElementId, Vec<InfluenceEdge>>, QuantError> {
        let mut map: HashMap<ElementId, Vec<InfluenceEdge>> = HashMap::new();
        for id in &ctx.active {
            if self.g.kind_of(id) != Some(ElementKind::Influence) {
                return Err(QuantError::UnknownInfluence { context: ctx.name.clone(), influence: id.clone() });
            }
            let e = influence_edge(self.g, id)?;
            map.entry(e.belief.clone()).or_default().push(e);
        }
        Ok(map)
    }

    fn belief_report(
        &self,
        ctx: &Context,
        edges: &HashMap<ElementId, Vec<InfluenceEdge>>,
        belief: &ElementId,
        degrees: &dyn Fn(&ElementId) -> f64,
    ) -> Result<BeliefReport, QuantError> {
        let kind = self.g.kind_of(belief).ok_or_else(|| QuantError::UnknownElement(belief.clone()))?;
        if !kind.is_a(ElementKind::MomentBelief) {
            return Err(QuantError::NotABelief(belief.clone()));
        }
        let base = self
            .normalized(ctx, belief, INTENSITY)?
            .ok_or_else(|| QuantError::MissingIntensity(belief.clone()))?;
        let mut contributions = Vec::new();
        for e in edges.get(belief).into_iter().flatten() {
            let strength = match e.source_kind {
                SourceKind::F1Trust => degrees(&e.source),
                _ => self.normalized(ctx, &e.source, INTENSITY)?.unwrap_or(1.0),
            };
            contributions.push(Contribution {
                influence: e.influence.clone(),
                source_kind: e.source_kind,
                weight: e.weight,
                strength,
            });
        }
        let effective = (base + contributions.iter().map(|c| c.weight * c.strength).sum::<f64>()).clamp(0.0, 1.0);

        let is_cap = kind == ElementKind::CapabilityBelief;
        let is_vul = kind == ElementKind::VulnerabilityBelief;
        let perf = self.normalized(ctx, belief, PERFORMANCE)?;
        let like = self.normalized(ctx, belief, LIKELIHOOD)?;
        let misplaced = |m: &str| QuantError::MisplacedMeasure { element: belief.clone(), measure: m.into() };
        if perf.is_some() && !is_cap {
            return Err(misplaced(PERFORMANCE));
        }
        if like.is_some() && !(is_cap || is_vul) {
            return Err(misplaced(LIKELIHOOD));
        }
        let mut defaults = Vec::new();
        let (performance, likelihood, score) = if is_cap {
            let p = perf.unwrap_or_else(|| {
                defaults.push(format!("{PERFORMANCE}=1"));
                1.0
            });
            let l = like.unwrap_or_else(|| {
                defaults.push(format!("{LIKELIHOOD}=1"));
                1.0
            });
            (Some(p), Some(l), effective * p * l)
        } else if is_vul {
            let l = like.unwrap_or_else(|| {
                defaults.push(format!("{LIKELIHOOD}=0"));
                0.0
            });
            (None, Some(l), effective * (1.0 - l))
        } else {
            (None, None, effective)
        };
        Ok(BeliefReport {
            belief: belief.clone(),
            kind,
            base_intensity: base,
            effective_intensity: effective,
            performance,
            likelihood,
            defaults,
            contributions,
            score: score.clamp(0.0, 1.0),
        })
    }

    fn trust_value(
        &self,
        ctx: &Context,
        edges: &HashMap<ElementId, Vec<InfluenceEdge>>,
        view: &TrustView,
        degrees: &dyn Fn(&ElementId) -> f64,
    ) -> Result<(f64, Vec<BeliefReport>), QuantError> {
        let reports = view
            .beliefs
            .iter()
            .map(|b| self.belief_report(ctx, edges, b, degrees))
            .collect::<Result<Vec<_>, _>>()?;
        let scores: Vec<f64> = reports.iter().map(|r| r.score).collect();
        Ok((self.strategy.aggregate(&scores).clamp(0.0, 1.0), reports))
    }

    /// Trusts upstream of `roots` along active trust-to-trust influences, roots included.
    fn closure(
        &self,
        edges: &HashMap<ElementId, Vec<InfluenceEdge>>,
        roots: impl IntoIterator<Item = ElementId>,
    ) -> Result<BTreeMap<ElementId, TrustView>, QuantError> {
        let mut views = BTreeMap::new();
        let mut stack: Vec<ElementId> = roots.into_iter().collect();
        while let Some(t) = stack.pop() {
            if views.contains_key(&t) {
                continue;
            }
            let v = typology::resolve(self.g, &t)?;
            for b in &v.beliefs {
                for e in edges.get(b).into_iter().flatten() {
                    if e.source_kind == SourceKind::F1Trust {
                        stack.push(e.source.clone());
                    }
                }
            }
            views.insert(t, v);
        }
        Ok(views)
    }

    fn solve(
        &self,
        ctx: &Context,
        edges: &HashMap<ElementId, Vec<InfluenceEdge>>,
        views: &BTreeMap<ElementId, TrustView>,
    ) -> Result<Propagation, QuantError> {
        let mut dep: DiGraph<&ElementId, ()> = DiGraph::new();
        let index: BTreeMap<&ElementId, _> = views.keys().map(|t| (t, dep.add_node(t))).collect();
        let mut self_loop = BTreeSet::new();
        for (t, v) in views {
            for b in &v.beliefs {
                for e in edges.get(b).into_iter().flatten() {
                    if e.source_kind == SourceKind::F1Trust {
                        dep.update_edge(index[&e.source], index[t], ());
                        if &e.source == t {
                            self_loop.insert(t);
                        }
                    }
                }
            }
        }
        let mut degrees: BTreeMap<ElementId, f64> = BTreeMap::new();
        let mut convergence = BTreeMap::new();
        // tarjan emits components after everything they reach, so upstream comes last
        let mut sccs = tarjan_scc(&dep);
        sccs.reverse();
        for scc in sccs {
            let members: Vec<&ElementId> = scc.iter().map(|n| dep[*n]).collect();
            if members.len() == 1 && !self_loop.contains(members[0]) {
                let t = members[0];
                let lookup = |s: &ElementId| degrees.get(s).copied().unwrap_or(0.0);
                let (d, _) = self.trust_value(ctx, edges, &views[t], &lookup)?;
                degrees.insert(t.clone(), d);
                convergence.insert(t.clone(), Convergence::Exact);
                continue;
            }
            let mut current: BTreeMap<ElementId, f64> = members.iter().map(|t| ((*t).clone(), 0.0)).collect();
            let mut residual = f64::INFINITY;
            let mut iterations = 0;
            while iterations < MAX_ITERATIONS && residual >= TOLERANCE {
                let lookup = |s: &ElementId| current.get(s).or_else(|| degrees.get(s)).copied().unwrap_or(0.0);
                let next = members
                    .iter()
                    .map(|t| {
                        let (f, _) = self.trust_value(ctx, edges, &views[*t], &lookup)?;
                        Ok(((*t).clone(), (1.0 - DAMPING) * current[*t] + DAMPING * f))
                    })
                    .collect::<Result<BTreeMap<_, _>, QuantError>>()?;
                residual = next.iter().map(|(t, d)| (d - current[t]).abs()).fold(0.0, f64::max);
                current = next;
                iterations += 1;
            }
            if residual >= TOLERANCE {
                let mut iterate = degrees.clone();
                iterate.extend(current);
                return Err(QuantError::NonConvergent { iterate, residual, iterations });
            }
            for (t, d) in current {
                convergence.insert(t.clone(), Convergence::Iterative { iterations, residual });
                degrees.insert(t, d);
            }
        }
        Ok(Propagation { degrees, convergence })
    }

    /// Degrees of every trust in the graph under `ctx`.
    pub fn propagate(&self, ctx: &Context) -> Result<Propagation, QuantError> {
        let edges = self.active_edges(ctx)?;
        let roots = self.g.elements_of(ElementKind::Trust).map(|e| e.id.clone());
        let views = self.closure(&edges, roots)?;
        self.solve(ctx, &edges, &views)
    }

    fn solved_lookup(
        &self,
        ctx: &Context,
        edges: &HashMap<ElementId, Vec<InfluenceEdge>>,
        roots: Vec<ElementId>,
    ) -> Result<Propagation, QuantError> {
        let views = self.closure(edges, roots)?;
        self.solve(ctx, edges, &views)
    }

    pub fn effective_intensity(&self, belief: &ElementId, ctx: &Context) -> Result<f64, QuantError> {
        Ok(self.belief_detail(belief, ctx)?.effective_intensity)
    }

    pub fn belief_score(&self, belief: &ElementId, ctx: &Context) -> Result<f64, QuantError> {
        Ok(self.belief_detail(belief, ctx)?.score)
    }

    pub fn belief_detail(&self, belief: &ElementId, ctx: &Context) -> Result<BeliefReport, QuantError> {
        let edges = self.active_edges(ctx)?;
        let sources: Vec<ElementId> = edges
            .get(belief)
            .into_iter()
            .flatten()
            .filter(|e| e.source_kind == SourceKind::F1Trust)
            .map(|e| e.source.clone())
            .collect();
        let solved = self.solved_lookup(ctx, &edges, sources)?;
        let lookup = |s: &ElementId| solved.degrees.get(s).copied().unwrap_or(0.0);
        self.belief_report(ctx, &edges, belief, &lookup)
    }

    pub fn trust_degree(&self, trust: &ElementId, ctx: &Context, scale: &Scale) -> Result<DegreeReport, QuantError> {
        let edges = self.active_edges(ctx)?;
        let views = self.closure(&edges, [trust.clone()])?;
        let solved = self.solve(ctx, &edges, &views)?;
        let lookup = |s: &ElementId| solved.degrees.get(s).copied().unwrap_or(0.0);
        let (_, per_belief) = self.trust_value(ctx, &edges, &views[trust], &lookup)?;
        let degree = solved.degrees[trust];
        Ok(DegreeReport {
            trust: trust.clone(),
            context: ctx.name.clone(),
            strategy: self.strategy.name(),
            degree,
            degree_on_scale: scale.denormalize(degree),
            per_belief,
            convergence: solved.convergence[trust],
        })
    }

    /// Reports for several trusts; independent computations may run in parallel.
    pub fn trust_degrees(&self, trusts: &[ElementId], ctx: &Context, scale: &Scale) -> Vec<Result<DegreeReport, QuantError>> {
        self.exec.map(trusts, |t| self.trust_degree(t, ctx, scale))
    }

    pub fn compare_contexts(&self, trust: &ElementId, a: &Context, b: &Context) -> Result<ContextOrder, QuantError> {
        let unit = Scale::unit();
        let da = self.trust_degree(trust, a, &unit)?.degree;
        let db = self.trust_degree(trust, b, &unit)?.degree;
        Ok(if (da - db).abs() < EQUAL_EPSILON {
            ContextOrder::Equal
        } else if da > db {
            ContextOrder::AHigher
        } else {
            ContextOrder::BHigher
        })
    }
}

impl fmt::Display for ContextOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ContextOrder::AHigher => "A_higher",
            ContextOrder::BHigher => "B_higher",
            ContextOrder::Equal => "equal",
        })
    }
}
