//! Shared helpers and independent oracles for the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::PathBuf;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use ontrust::constraints::{self, AxiomSet};
use ontrust::finder::Signature;
use ontrust::kernel::{AttrValue, Attrs, Element, ElementId, ElementKind, InstanceGraph, RelationKind};
use ontrust::measure::{Scale, ScaleRegistry};
use ontrust::onti::{self, Document};
use ontrust::quant::{self, Context, Convergence, Quant, QuantError};

pub fn seeded(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn read(rel: &str) -> String {
    let p = root().join(rel);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

pub fn load(rel: &str) -> Document {
    onti::parse(&read(rel)).unwrap_or_else(|e| panic!("{rel}:{}: {e}", e.line))
}

pub fn id(s: &str) -> ElementId {
    ElementId::new(s)
}

/// Terse graph construction for hand-written test models.
#[derive(Default)]
pub struct Builder {
    pub g: InstanceGraph,
}

impl Builder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn el(&mut self, kind: ElementKind, name: &str) -> ElementId {
        self.el_with(kind, name, &[])
    }

    pub fn el_with(&mut self, kind: ElementKind, name: &str, attrs: &[(&str, AttrValue)]) -> ElementId {
        let attrs: Attrs = attrs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
        let e = Element { id: id(name), kind, label: None, attrs };
        self.g.insert_element(e).unwrap();
        id(name)
    }

    pub fn rel(&mut self, kind: RelationKind, from: &str, to: &str) -> &mut Self {
        self.g.add_relation(kind, &id(from), &id(to)).unwrap_or_else(|e| panic!("{e}"));
        self
    }
}

pub fn text(s: &str) -> AttrValue {
    AttrValue::Text(s.to_string())
}

pub fn num(x: f64) -> AttrValue {
    AttrValue::Number(x)
}

// ---------------------------------------------------------------------------
// Naive model enumeration: every subset of admissible edges, brute-force
// isomorphism by trying every kind-preserving permutation.

fn kind_preserving_permutations(kinds: &[ElementKind]) -> Vec<Vec<usize>> {
    fn go(i: usize, kinds: &[ElementKind], used: &mut Vec<bool>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == kinds.len() {
            out.push(cur.clone());
            return;
        }
        for j in 0..kinds.len() {
            if !used[j] && kinds[j] == kinds[i] {
                used[j] = true;
                cur.push(j);
                go(i + 1, kinds, used, cur, out);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(0, kinds, &mut vec![false; kinds.len()], &mut Vec::new(), &mut out);
    out
}

type NaiveEdge = (usize, RelationKind, usize);

fn naive_key(kinds: &[ElementKind], edges: &[NaiveEdge], perms: &[Vec<usize>]) -> (Vec<ElementKind>, Vec<NaiveEdge>) {
    let best = perms
        .iter()
        .map(|p| {
            let mut e: Vec<NaiveEdge> = edges.iter().map(|&(a, r, b)| (p[a], r, p[b])).collect();
            e.sort();
            e
        })
        .min()
        .unwrap_or_default();
    (kinds.to_vec(), best)
}

fn naive_populations(sig: &Signature) -> Vec<Vec<ElementKind>> {
    let caps: Vec<(ElementKind, usize)> = sig.caps.iter().map(|(k, n)| (*k, *n)).collect();
    let bound = sig.effective_bound();
    let mut out = vec![Vec::new()];
    for (k, cap) in caps {
        let mut next = Vec::new();
        for v in &out {
            for n in 0..=cap {
                let mut w: Vec<ElementKind> = v.clone();
                w.extend(std::iter::repeat_n(k, n));
                if w.len() <= bound {
                    next.push(w);
                }
            }
        }
        out = next;
    }
    out
}

/// Graphs (one per valid edge subset) of a population, as built by the kernel.
fn naive_graphs(
    kinds: &[ElementKind],
    relations: &BTreeSet<RelationKind>,
    mut visit: impl FnMut(&InstanceGraph, &[NaiveEdge]),
) {
    let ids: Vec<ElementId> = (0..kinds.len()).map(|i| id(&format!("n{i}"))).collect();
    let mut base = InstanceGraph::new();
    for (i, k) in kinds.iter().enumerate() {
        base.insert_element(Element { id: ids[i].clone(), kind: *k, label: None, attrs: Attrs::new() }).unwrap();
    }
    // candidate edges are whatever the kernel accepts
    let mut cands: Vec<NaiveEdge> = Vec::new();
    for a in 0..kinds.len() {
        for r in relations {
            for b in 0..kinds.len() {
                let mut probe = base.clone();
                if probe.add_relation(*r, &ids[a], &ids[b]).is_ok() {
                    cands.push((a, *r, b));
                }
            }
        }
    }
    assert!(cands.len() < 26, "naive oracle population too large: {} candidate edges", cands.len());
    for mask in 0u32..(1 << cands.len()) {
        let chosen: Vec<NaiveEdge> = (0..cands.len()).filter(|i| mask >> i & 1 == 1).map(|i| cands[i]).collect();
        let mut g = base.clone();
        for &(a, r, b) in &chosen {
            g.add_relation(r, &ids[a], &ids[b]).unwrap();
        }
        visit(&g, &chosen);
    }
}

/// Number of isomorphism classes of valid graphs within the signature.
pub fn naive_count(sig: &Signature, enabled: AxiomSet) -> u64 {
    let mut seen: HashSet<(Vec<ElementKind>, Vec<NaiveEdge>)> = HashSet::new();
    for kinds in naive_populations(sig) {
        let perms = kind_preserving_permutations(&kinds);
        naive_graphs(&kinds, &sig.relations, |g, edges| {
            if constraints::is_valid(g, enabled) {
                seen.insert(naive_key(&kinds, edges, &perms));
            }
        });
    }
    seen.len() as u64
}

/// Whether any valid graph within the signature satisfies `pred`.
pub fn naive_exists(sig: &Signature, enabled: AxiomSet, pred: impl Fn(&InstanceGraph) -> bool) -> bool {
    let mut found = false;
    for kinds in naive_populations(sig) {
        if found {
            break;
        }
        naive_graphs(&kinds, &sig.relations, |g, _| {
            if !found && constraints::is_valid(g, enabled) && pred(g) {
                found = true;
            }
        });
    }
    found
}

// ---------------------------------------------------------------------------
// Degree oracles. They read the graph directly and share nothing with the
// engine beyond measure normalisation.

const BELIEF_KINDS: [ElementKind; 4] = [
    ElementKind::CapabilityBelief,
    ElementKind::VulnerabilityBelief,
    ElementKind::IntentionBelief,
    ElementKind::SocialCommitmentBelief,
];

fn norm(g: &InstanceGraph, scales: &ScaleRegistry, ctx: &Context, e: &ElementId, m: &str) -> Option<f64> {
    if let Some(v) = ctx.overrides.get(&(e.clone(), m.to_string())) {
        return Some(v.normalize().unwrap());
    }
    g.element(e)?.attrs.get(m).map(|a| scales.parse_attr(a).unwrap().normalize().unwrap())
}

/// Trusts with their component beliefs, sorted.
pub fn trust_beliefs(g: &InstanceGraph) -> BTreeMap<ElementId, Vec<ElementId>> {
    g.elements_of(ElementKind::Trust)
        .map(|t| {
            let mut bs: Vec<ElementId> = g
                .incoming(&t.id, RelationKind::ComponentOf)
                .filter(|b| g.kind_of(b).is_some_and(|k| k.is_a(ElementKind::MomentBelief)))
                .cloned()
                .collect();
            bs.sort();
            (t.id.clone(), bs)
        })
        .collect()
}

/// `(source, weight)` of the active influences on `belief`.
fn inputs(g: &InstanceGraph, ctx: &Context, belief: &ElementId) -> Vec<(ElementId, f64)> {
    let mut v = Vec::new();
    for inf in g.incoming(belief, RelationKind::InfluencedBelief) {
        if !ctx.active.contains(inf) {
            continue;
        }
        let w = g.element(inf).unwrap().attrs[quant::WEIGHT].as_number().unwrap();
        for src in g.incoming(inf, RelationKind::Influences) {
            v.push((src.clone(), w));
        }
    }
    v
}

/// One evaluation of every trust's degree given the degrees of influencing trusts.
pub fn step(
    g: &InstanceGraph,
    scales: &ScaleRegistry,
    ctx: &Context,
    beliefs: &BTreeMap<ElementId, Vec<ElementId>>,
    t: &ElementId,
    degree_of: &mut dyn FnMut(&ElementId) -> f64,
) -> f64 {
    let mut sum = 0.0;
    for b in &beliefs[t] {
        let mut eff = norm(g, scales, ctx, b, quant::INTENSITY).unwrap();
        for (src, w) in inputs(g, ctx, b) {
            let s = if g.kind_of(&src).unwrap().is_a(ElementKind::Trust) {
                degree_of(&src)
            } else {
                norm(g, scales, ctx, &src, quant::INTENSITY).unwrap_or(1.0)
            };
            eff += w * s;
        }
        let eff = eff.clamp(0.0, 1.0);
        let score = match g.kind_of(b).unwrap() {
            ElementKind::CapabilityBelief => {
                eff * norm(g, scales, ctx, b, quant::PERFORMANCE).unwrap_or(1.0)
                    * norm(g, scales, ctx, b, quant::LIKELIHOOD).unwrap_or(1.0)
            }
            ElementKind::VulnerabilityBelief => eff * (1.0 - norm(g, scales, ctx, b, quant::LIKELIHOOD).unwrap_or(0.0)),
            _ => eff,
        };
        sum += score.clamp(0.0, 1.0);
    }
    (sum / beliefs[t].len() as f64).clamp(0.0, 1.0)
}

/// Memoised recursion; only valid when trust-to-trust influences are acyclic.
pub fn memo_degrees(g: &InstanceGraph, scales: &ScaleRegistry, ctx: &Context) -> BTreeMap<ElementId, f64> {
    fn rec(
        g: &InstanceGraph,
        scales: &ScaleRegistry,
        ctx: &Context,
        beliefs: &BTreeMap<ElementId, Vec<ElementId>>,
        memo: &mut BTreeMap<ElementId, f64>,
        t: &ElementId,
    ) -> f64 {
        if let Some(d) = memo.get(t) {
            return *d;
        }
        let d = step(g, scales, ctx, beliefs, t, &mut |s| rec(g, scales, ctx, beliefs, memo, s));
        memo.insert(t.clone(), d);
        d
    }
    let beliefs = trust_beliefs(g);
    let mut memo = BTreeMap::new();
    for t in beliefs.keys() {
        rec(g, scales, ctx, &beliefs, &mut memo, t);
    }
    memo
}

/// Damped Jacobi iteration over all trusts at once for a fixed number of rounds.
/// Returns the iterate and the final residual.
pub fn brute_fixed_point(
    g: &InstanceGraph,
    scales: &ScaleRegistry,
    ctx: &Context,
    rounds: usize,
) -> (BTreeMap<ElementId, f64>, f64) {
    let beliefs = trust_beliefs(g);
    let mut cur: BTreeMap<ElementId, f64> = beliefs.keys().map(|t| (t.clone(), 0.0)).collect();
    let mut residual = f64::INFINITY;
    for _ in 0..rounds {
        let snapshot = cur.clone();
        let next: BTreeMap<ElementId, f64> = beliefs
            .keys()
            .map(|t| {
                let f = step(g, scales, ctx, &beliefs, t, &mut |s| snapshot[s]);
                (t.clone(), 0.5 * snapshot[t] + 0.5 * f)
            })
            .collect();
        residual = next.iter().map(|(t, d)| (d - snapshot[t]).abs()).fold(0.0, f64::max);
        cur = next;
        if residual == 0.0 {
            break;
        }
    }
    (cur, residual)
}

// ---------------------------------------------------------------------------
// Random trust networks for the quantitative properties.

pub struct QuantCase {
    pub g: InstanceGraph,
    pub trusts: Vec<ElementId>,
    pub influences: Vec<ElementId>,
}

fn measure_attr(rng: &mut ChaCha8Rng) -> AttrValue {
    if rng.random_bool(0.5) {
        text(&format!("lmh:{}", ["Low", "Medium", "High"].choose(rng).unwrap()))
    } else {
        text(&format!("unit:{}", rng.random_range(0.0..=1.0f64)))
    }
}

/// A well-formed network of 1–4 trusts from one trustor. With `cyclic`,
/// trust-to-trust influences may point anywhere; otherwise only from a
/// lower-numbered trust to a higher-numbered one.
pub fn random_network(rng: &mut ChaCha8Rng, cyclic: bool) -> QuantCase {
    let mut b = Builder::new();
    b.el(ElementKind::HumanAgent, "trustor");
    let n = rng.random_range(1..=4usize);
    let mut beliefs: Vec<(usize, ElementId)> = Vec::new();
    let mut trusts = Vec::new();
    for t in 0..n {
        let (tid, ag, int, mt) = (format!("t{t}"), format!("trustee{t}"), format!("int{t}"), format!("mt{t}"));
        b.el(ElementKind::HumanAgent, &ag);
        b.el(ElementKind::Intention, &int);
        b.el(ElementKind::GroundTrust, &tid);
        b.el(ElementKind::MomentType, &mt);
        b.rel(RelationKind::InheresIn, &int, "trustor")
            .rel(RelationKind::InheresIn, &tid, "trustor")
            .rel(RelationKind::MediatesTrustee, &tid, &ag)
            .rel(RelationKind::About, &tid, &int)
            .rel(RelationKind::Characterizes, &mt, &ag);
        for k in 0..rng.random_range(1..=3usize) {
            let kind = *BELIEF_KINDS.choose(rng).unwrap();
            let mut attrs = vec![(quant::INTENSITY, measure_attr(rng))];
            if kind == ElementKind::CapabilityBelief && rng.random_bool(0.7) {
                attrs.push((quant::PERFORMANCE, measure_attr(rng)));
            }
            if matches!(kind, ElementKind::CapabilityBelief | ElementKind::VulnerabilityBelief) && rng.random_bool(0.5) {
                attrs.push((quant::LIKELIHOOD, measure_attr(rng)));
            }
            let bid = format!("b{t}_{k}");
            b.el_with(kind, &bid, &attrs);
            b.rel(RelationKind::InheresIn, &bid, "trustor")
                .rel(RelationKind::ComponentOf, &bid, &tid)
                .rel(RelationKind::ExternallyDependsOn, &bid, &mt);
            beliefs.push((t, id(&bid)));
        }
        trusts.push(id(&tid));
    }
    let mut influences = Vec::new();
    for i in 0..rng.random_range(0..=6usize) {
        let (owner, target) = beliefs.choose(rng).unwrap().clone();
        let fid = format!("f{i}");
        let w = rng.random_range(-1.0..=1.0f64);
        b.el_with(ElementKind::Influence, &fid, &[(quant::WEIGHT, num(w))]);
        b.rel(RelationKind::InfluencedBelief, &fid, target.as_str());
        let trust_sources: Vec<usize> = (0..n).filter(|s| cyclic || *s < owner).collect();
        if !trust_sources.is_empty() && rng.random_bool(0.6) {
            let s = *trust_sources.choose(rng).unwrap();
            b.rel(RelationKind::Influences, &format!("t{s}"), &fid);
        } else {
            let sid = format!("src{i}");
            let kind = *[ElementKind::Perception, ElementKind::Emotion, ElementKind::TrustworthinessEvidence]
                .choose(rng)
                .unwrap();
            if rng.random_bool(0.5) {
                b.el_with(kind, &sid, &[(quant::INTENSITY, measure_attr(rng))]);
            } else {
                b.el(kind, &sid);
            }
            if kind.is_a(ElementKind::MentalMoment) {
                b.rel(RelationKind::InheresIn, &sid, "trustor");
            }
            b.rel(RelationKind::Influences, &sid, &fid);
        }
        influences.push(id(&fid));
    }
    QuantCase { g: b.g, trusts, influences }
}

/// Whether some trust-to-trust influence path forms a cycle.
pub fn has_trust_cycle(g: &InstanceGraph) -> bool {
    let beliefs = trust_beliefs(g);
    let mut succ: BTreeMap<ElementId, BTreeSet<ElementId>> = BTreeMap::new();
    for (t, bs) in &beliefs {
        for b in bs {
            for inf in g.incoming(b, RelationKind::InfluencedBelief) {
                for s in g.incoming(inf, RelationKind::Influences) {
                    if beliefs.contains_key(s) {
                        succ.entry(s.clone()).or_default().insert(t.clone());
                    }
                }
            }
        }
    }
    fn reach(succ: &BTreeMap<ElementId, BTreeSet<ElementId>>, from: &ElementId, goal: &ElementId, seen: &mut BTreeSet<ElementId>) -> bool {
        for n in succ.get(from).into_iter().flatten() {
            if n == goal || (seen.insert(n.clone()) && reach(succ, n, goal, seen)) {
                return true;
            }
        }
        false
    }
    beliefs.keys().any(|t| reach(&succ, t, t, &mut BTreeSet::new()))
}

// ---------------------------------------------------------------------------
// Per-seed quantitative properties, shared by the quant tests and the acceptance run.

pub type Check = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Acyclic propagation equals the memoised recursion oracle within 1e-12.
pub fn check_acyclic_matches_memo(seed: u64) -> Check {
    let case = random_network(&mut seeded(seed), false);
    let ctx = Context::all_active(&case.g);
    let got = Quant::new(&case.g).propagate(&ctx).map_err(|e| format!("seed {seed}: {e}"))?;
    let want = memo_degrees(&case.g, &ScaleRegistry::default(), &ctx);
    ensure(got.degrees.len() == want.len(), || format!("seed {seed}: trust count"))?;
    for (t, d) in &want {
        ensure((got.degrees[t] - d).abs() < 1e-12, || format!("seed {seed} {t}: {} vs {d}", got.degrees[t]))?;
        ensure(got.convergence[t] == Convergence::Exact, || format!("seed {seed} {t}: not exact"))?;
    }
    Ok(())
}

/// Degrees and belief scores stay within [0, 1].
pub fn check_unit_interval(seed: u64) -> Check {
    let case = random_network(&mut seeded(seed), seed % 2 == 0);
    let ctx = Context::all_active(&case.g);
    let q = Quant::new(&case.g);
    let degrees = match q.propagate(&ctx) {
        Ok(p) => p.degrees,
        Err(QuantError::NonConvergent { iterate, .. }) => iterate,
        Err(e) => return Err(format!("seed {seed}: {e}")),
    };
    for d in degrees.values() {
        ensure((0.0..=1.0).contains(d), || format!("seed {seed}: degree {d}"))?;
    }
    // belief details need upstream degrees, which only settle exactly without cycles
    if seed % 2 == 0 {
        return Ok(());
    }
    for bs in trust_beliefs(&case.g).values() {
        for b in bs {
            let r = q.belief_detail(b, &ctx).map_err(|e| format!("seed {seed}: {e}"))?;
            ensure((0.0..=1.0).contains(&r.effective_intensity), || format!("seed {seed}: intensity"))?;
            ensure((0.0..=1.0).contains(&r.score), || format!("seed {seed}: score"))?;
        }
    }
    Ok(())
}

/// With no active influence, effective intensity is the base intensity and degrees are exact.
pub fn check_empty_context_identity(seed: u64) -> Check {
    let case = random_network(&mut seeded(seed), seed % 2 == 0);
    let empty = Context::new("empty");
    let q = Quant::new(&case.g);
    for bs in trust_beliefs(&case.g).values() {
        for b in bs {
            let r = q.belief_detail(b, &empty).map_err(|e| format!("seed {seed}: {e}"))?;
            ensure(r.effective_intensity == r.base_intensity, || format!("seed {seed}: {b} moved"))?;
            ensure(r.contributions.is_empty(), || format!("seed {seed}: {b} has contributions"))?;
        }
    }
    let p = q.propagate(&empty).map_err(|e| format!("seed {seed}: {e}"))?;
    for (t, d) in memo_degrees(&case.g, &ScaleRegistry::default(), &empty) {
        ensure((p.degrees[&t] - d).abs() < 1e-12, || format!("seed {seed} {t}"))?;
        ensure(p.convergence[&t] == Convergence::Exact, || format!("seed {seed} {t}: not exact"))?;
    }
    Ok(())
}

/// Raising one influence weight never lowers its target belief or the owning trust.
/// `None` when the network has no influence to raise.
pub fn check_weight_monotone(seed: u64) -> Option<Check> {
    let case = random_network(&mut seeded(seed), false);
    let f = case.influences.first()?;
    let target = case.g.outgoing(f, RelationKind::InfluencedBelief).next().unwrap().clone();
    let owner = case.g.outgoing(&target, RelationKind::ComponentOf).next().unwrap().clone();
    let w = case.g.element(f).unwrap().attrs[quant::WEIGHT].as_number().unwrap();
    let mut raised = case.g.clone();
    let w2 = (w + (1.0 - w) * 0.5 + 1e-3).min(1.0);
    raised.element_mut(f).unwrap().attrs.insert(quant::WEIGHT.into(), AttrValue::Number(w2));
    let ctx = Context::all_active(&case.g);
    let (before, after) = (Quant::new(&case.g), Quant::new(&raised));
    let lmh = Scale::lmh();
    Some((|| {
        let i0 = before.effective_intensity(&target, &ctx).map_err(|e| e.to_string())?;
        let i1 = after.effective_intensity(&target, &ctx).map_err(|e| e.to_string())?;
        ensure(i1 >= i0, || format!("seed {seed}: intensity {i1} < {i0}"))?;
        let d0 = before.trust_degree(&owner, &ctx, &lmh).map_err(|e| e.to_string())?.degree;
        let d1 = after.trust_degree(&owner, &ctx, &lmh).map_err(|e| e.to_string())?.degree;
        ensure(d1 >= d0, || format!("seed {seed}: degree {d1} < {d0}"))
    })())
}

/// Outcome of comparing the engine with the 10,000-round oracle on one cyclic network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CyclicOutcome {
    Agree,
    BothNonConvergent,
    EngineOnlyNonConvergent,
    OracleOnlyNonConvergent,
    Differ,
}

/// `None` when the seed's network has no trust cycle.
pub fn cyclic_outcome(seed: u64) -> Option<CyclicOutcome> {
    let case = random_network(&mut seeded(seed), true);
    if !has_trust_cycle(&case.g) {
        return None;
    }
    let ctx = Context::all_active(&case.g);
    let (oracle, residual) = brute_fixed_point(&case.g, &ScaleRegistry::default(), &ctx, 10_000);
    let oracle_ok = residual < quant::TOLERANCE;
    Some(match (Quant::new(&case.g).propagate(&ctx), oracle_ok) {
        (Ok(p), true) => {
            if oracle.iter().all(|(t, d)| (p.degrees[t] - d).abs() < 1e-6) {
                CyclicOutcome::Agree
            } else {
                CyclicOutcome::Differ
            }
        }
        (Ok(_), false) => CyclicOutcome::OracleOnlyNonConvergent,
        (Err(QuantError::NonConvergent { .. }), false) => CyclicOutcome::BothNonConvergent,
        (Err(QuantError::NonConvergent { .. }), true) => CyclicOutcome::EngineOnlyNonConvergent,
        (Err(e), _) => panic!("seed {seed}: {e}"),
    })
}

pub fn cyclic_tally(seeds: std::ops::Range<u64>) -> BTreeMap<CyclicOutcome, Vec<u64>> {
    let mut tally: BTreeMap<CyclicOutcome, Vec<u64>> = BTreeMap::new();
    for seed in seeds {
        if let Some(outcome) = cyclic_outcome(seed) {
            tally.entry(outcome).or_default().push(seed);
        }
    }
    tally
}

// ---------------------------------------------------------------------------
// Random documents for round-trip checks.

const LABEL_CHARS: &[char] = &['a', 'Z', ' ', '"', '\\', 'é', 'ß', '\n', '\t', '→', '😀', '#', '=', '\'', '{'];

fn random_text(rng: &mut ChaCha8Rng) -> String {
    (0..rng.random_range(0..8)).map(|_| *LABEL_CHARS.choose(rng).unwrap()).collect()
}

/// A referentially valid document with arbitrary content.
pub fn random_document(rng: &mut ChaCha8Rng) -> String {
    let mut g = InstanceGraph::new();
    let n = rng.random_range(0..14usize);
    for i in 0..n {
        let kind = *ElementKind::ALL.choose(rng).unwrap();
        let mut attrs = Attrs::new();
        if kind == ElementKind::Influence {
            attrs.insert(quant::WEIGHT.into(), num((rng.random_range(-4..=4) as f64) / 4.0));
        }
        for k in 0..rng.random_range(0..3) {
            let v = match rng.random_range(0..4) {
                0 => AttrValue::Bool(rng.random_bool(0.5)),
                1 => num(rng.random_range(-1e6..1e6f64)),
                2 => text(&random_text(rng)),
                _ => measure_attr(rng),
            };
            let key = if k == 0 && rng.random_bool(0.3) { "intensity".to_string() } else { format!("note {}", random_text(rng)) };
            if key == "intensity" && !matches!(&v, AttrValue::Text(t) if t.contains(':')) {
                continue;
            }
            attrs.insert(key, v);
        }
        let label = rng.random_bool(0.7).then(|| random_text(rng));
        let eid = format!("{}-{i}{}", kind.name().to_lowercase(), if rng.random_bool(0.2) { " é" } else { "" });
        g.insert_element(Element { id: id(&eid), kind, label, attrs }).unwrap();
    }
    let ids: Vec<ElementId> = g.elements().map(|e| e.id.clone()).collect();
    if !ids.is_empty() {
        for _ in 0..rng.random_range(0..40) {
            let (a, b) = (ids.choose(rng).unwrap().clone(), ids.choose(rng).unwrap().clone());
            let r = *RelationKind::ALL.choose(rng).unwrap();
            let _ = g.add_relation(r, &a, &b);
        }
    }
    let mut doc = Document::new(g);
    let infl: Vec<ElementId> = doc.graph.elements_of(ElementKind::Influence).map(|e| e.id.clone()).collect();
    for c in 0..rng.random_range(0..3) {
        let mut ctx = Context::new(format!("ctx {c} {}", random_text(rng)));
        for f in &infl {
            if rng.random_bool(0.5) {
                ctx = ctx.activate(f.clone());
            }
        }
        if let Some(e) = ids.choose(rng) {
            let v = doc.scales.parse_text("lmh:Medium").unwrap();
            ctx = ctx.with_override(e.clone(), "intensity", v);
        }
        if !doc.contexts.iter().any(|x| x.name == ctx.name) {
            doc.contexts.push(ctx);
        }
    }
    doc.contexts.sort_by(|a, b| a.name.cmp(&b.name));
    onti::serialize(&doc)
}

// ---------------------------------------------------------------------------
// Typology generators.

/// A single GroundTrust with random trustee kind and optional agreement structure.
pub fn random_trust(rng: &mut impl Rng) -> Builder {
    let trustee_kind = [ElementKind::HumanAgent, ElementKind::SocialSystem, ElementKind::PhysicalObject, ElementKind::SocialAgent]
        [rng.random_range(0..4)];
    let mut b = bare_trust(trustee_kind);
    if trustee_kind == ElementKind::PhysicalObject && rng.random_bool(0.5) {
        b.el(ElementKind::SocialAgent, "owner");
        b.rel(RelationKind::ComponentOf, "trustee", "owner");
    }
    let has_goal = rng.random_bool(0.7);
    if has_goal {
        b.el(ElementKind::Goal, "goal");
        b.rel(RelationKind::About, "int", "goal");
    }
    if rng.random_bool(0.6) {
        b.el(ElementKind::Agreement, "agr");
        b.rel(RelationKind::MediatesTrustor, "agr", "trustor").rel(RelationKind::MediatesTrustee, "agr", "trustee");
        b.rel(RelationKind::GroundedOn, "t", "agr");
        if rng.random_bool(0.7) && trustee_kind != ElementKind::PhysicalObject {
            b.el(ElementKind::SocialCommitment, "cmt");
            b.rel(RelationKind::InheresIn, "cmt", "trustee").rel(RelationKind::ComponentOf, "cmt", "agr");
            if has_goal && rng.random_bool(0.8) {
                b.rel(RelationKind::About, "cmt", "goal");
            }
        }
    }
    b
}

pub fn add_commitment_belief(b: &mut Builder, n: usize) {
    let (scb, mt) = (format!("scb{n}"), format!("scb-mt{n}"));
    b.el(ElementKind::SocialCommitmentBelief, &scb);
    b.el(ElementKind::MomentType, &mt);
    b.rel(RelationKind::Characterizes, &mt, "trustee")
        .rel(RelationKind::InheresIn, &scb, "trustor")
        .rel(RelationKind::ComponentOf, &scb, "t")
        .rel(RelationKind::ExternallyDependsOn, &scb, &mt);
}

/// Minimal well-formed trust of `trustor` in `trustee` with one capability belief.
pub fn bare_trust(trustee_kind: ElementKind) -> Builder {
    let mut b = Builder::new();
    for (k, n) in [
        (ElementKind::HumanAgent, "trustor"),
        (trustee_kind, "trustee"),
        (ElementKind::GroundTrust, "t"),
        (ElementKind::Intention, "int"),
        (ElementKind::MomentType, "mt"),
        (ElementKind::CapabilityBelief, "bel"),
    ] {
        b.el(k, n);
    }
    b.rel(RelationKind::InheresIn, "int", "trustor")
        .rel(RelationKind::InheresIn, "t", "trustor")
        .rel(RelationKind::About, "t", "int")
        .rel(RelationKind::MediatesTrustee, "t", "trustee")
        .rel(RelationKind::Characterizes, "mt", "trustee")
        .rel(RelationKind::InheresIn, "bel", "trustor")
        .rel(RelationKind::ComponentOf, "bel", "t")
        .rel(RelationKind::ExternallyDependsOn, "bel", "mt");
    b
}

// ---------------------------------------------------------------------------
// Risk path oracle.

pub type Path = (ElementId, ElementId, ElementId, Option<ElementId>, Vec<ElementId>);

pub fn targets(g: &InstanceGraph, from: &ElementId, kind: RelationKind) -> BTreeSet<ElementId> {
    g.relations().iter().filter(|r| r.kind == kind && &r.from == from).map(|r| r.to.clone()).collect()
}

/// Walks the chain edges directly over the relation list.
pub fn enumerate_paths(g: &InstanceGraph) -> BTreeSet<Path> {
    let is_actor_action = |a: &ElementId| matches!(g.kind_of(a), Some(ElementKind::TrustorAction | ElementKind::TrusteeAction));
    let mut out = BTreeSet::new();
    for s in g.elements().filter(|e| e.kind.is_a(ElementKind::Situation)).map(|e| e.id.clone()) {
        let actions: Vec<ElementId> = g
            .relations()
            .iter()
            .filter(|r| r.kind == RelationKind::BringsAbout && r.to == s && is_actor_action(&r.from))
            .map(|r| r.from.clone())
            .collect();
        let threats: BTreeSet<ElementId> = targets(g, &s, RelationKind::Triggers)
            .into_iter()
            .filter(|t| g.kind_of(t) == Some(ElementKind::ThreatEvent))
            .collect();
        let threatening = match g.kind_of(&s).unwrap() {
            ElementKind::ThreateningSituation => true,
            ElementKind::SuccessfulSituation => false,
            _ => !threats.is_empty(),
        };
        if !threatening || actions.len() != 1 {
            continue;
        }
        for t in &threats {
            let losses = targets(g, t, RelationKind::Causes);
            if losses.is_empty() {
                out.insert((actions[0].clone(), s.clone(), t.clone(), None, vec![]));
            }
            for l in losses {
                let hurt = targets(g, &l, RelationKind::Hurts).into_iter().collect();
                out.insert((actions[0].clone(), s.clone(), t.clone(), Some(l), hurt));
            }
        }
    }
    out
}

pub fn two_threat_toy() -> Builder {
    let mut b = Builder::new();
    for (k, n) in [
        (ElementKind::TrusteeAction, "act"),
        (ElementKind::ThreateningSituation, "sit"),
        (ElementKind::ThreatEvent, "theft"),
        (ElementKind::ThreatEvent, "leak"),
        (ElementKind::LossEvent, "money-lost"),
        (ElementKind::LossEvent, "privacy-lost"),
        (ElementKind::Intention, "keep-savings"),
        (ElementKind::Intention, "stay-private"),
    ] {
        b.el(k, n);
    }
    b.rel(RelationKind::BringsAbout, "act", "sit")
        .rel(RelationKind::Triggers, "sit", "theft")
        .rel(RelationKind::Triggers, "sit", "leak")
        .rel(RelationKind::Causes, "theft", "money-lost")
        .rel(RelationKind::Causes, "leak", "privacy-lost")
        .rel(RelationKind::Hurts, "money-lost", "keep-savings")
        .rel(RelationKind::Hurts, "privacy-lost", "stay-private");
    b
}

// ---------------------------------------------------------------------------
// Triple counting oracle.

/// Triples expected from the raw TOML, counted per entry.
pub fn count_triples(text: &str) -> usize {
    let v: toml::Table = text.parse().unwrap();
    let elements = v.get("elements").and_then(|e| e.as_array()).cloned().unwrap_or_default();
    let attrs: usize = elements
        .iter()
        .map(|e| e.get("attrs").and_then(|a| a.as_table()).map_or(0, |t| t.len()))
        .sum();
    let relations = v.get("relations").and_then(|r| r.as_array()).map_or(0, Vec::len);
    elements.len() + attrs + relations
}
