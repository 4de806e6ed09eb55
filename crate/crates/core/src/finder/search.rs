//! Backtracking over candidate edges of one element population.

use std::collections::HashSet;

use crate::constraints::{self, AxiomId, AxiomSet};
use crate::kernel::{Attrs, Element, ElementId, ElementKind, InstanceGraph, RelationKind};

use super::canon::{canonical_form, CanonicalForm, Edge};
use super::Property;

/// Elements of one count vector with their candidate edges in (source, relation, target) order.
#[derive(Debug, Clone)]
pub struct Population {
    pub kinds: Vec<ElementKind>,
    pub ids: Vec<ElementId>,
    pub edges: Vec<Edge>,
    /// Same-kind predecessor of each element.
    prev: Vec<Option<u8>>,
    /// Cardinality window of the (source, relation) group each edge belongs to.
    window: Vec<(usize, usize)>,
    group_end: Vec<bool>,
    /// A mandatory group has no candidate edge at all.
    infeasible: bool,
}

fn id_prefix(kind: ElementKind) -> String {
    kind.name().to_ascii_lowercase()
}

/// Cardinality window implied by the enabled local axioms.
fn window(kind: ElementKind, rel: RelationKind, enabled: AxiomSet) -> (usize, usize) {
    let s1 = enabled.contains(AxiomId::S1_TrustParts);
    let mut lo = 0;
    let mut hi = usize::MAX;
    if rel == RelationKind::InheresIn && enabled.contains(AxiomId::S5_SingleBearer) {
        hi = 1;
    }
    if kind.is_a(ElementKind::Trust)
        && s1
        && matches!(rel, RelationKind::InheresIn | RelationKind::MediatesTrustee | RelationKind::About)
    {
        (lo, hi) = (1, 1);
    }
    if kind.is_a(ElementKind::MomentBelief)
        && rel == RelationKind::ExternallyDependsOn
        && enabled.contains(AxiomId::S2_MomentBeliefTarget)
    {
        (lo, hi) = (1, 1);
    }
    if kind == ElementKind::Influence
        && rel == RelationKind::InfluencedBelief
        && enabled.contains(AxiomId::S4_InfluenceShape)
    {
        (lo, hi) = (1, 1);
    }
    (lo, hi)
}

/// Relations whose group must be nonempty for elements of `kind`.
fn mandatory(kind: ElementKind, enabled: AxiomSet) -> impl Iterator<Item = RelationKind> {
    RelationKind::ALL.iter().copied().filter(move |r| window(kind, *r, enabled).0 > 0)
}

impl Population {
    pub fn new(kinds: Vec<ElementKind>, relations: &[RelationKind], enabled: AxiomSet) -> Self {
        let mut ids = Vec::with_capacity(kinds.len());
        let mut prev = Vec::with_capacity(kinds.len());
        for (i, k) in kinds.iter().enumerate() {
            let n = kinds[..i].iter().filter(|x| *x == k).count();
            ids.push(ElementId::new(format!("{}{n}", id_prefix(*k))));
            prev.push((n > 0).then(|| (i - 1) as u8));
        }
        let mut edges = Vec::new();
        let mut window_of = Vec::new();
        let mut infeasible = false;
        for (a, ka) in kinds.iter().enumerate() {
            for r in relations {
                let before = edges.len();
                for (b, kb) in kinds.iter().enumerate() {
                    if (*r == RelationKind::ComponentOf && a == b) || !r.admits(*ka, *kb) {
                        continue;
                    }
                    edges.push((a as u8, *r, b as u8));
                    window_of.push(window(*ka, *r, enabled));
                }
                if edges.len() == before && window(*ka, *r, enabled).0 > 0 {
                    infeasible = true;
                }
            }
            if mandatory(*ka, enabled).any(|r| !relations.contains(&r)) {
                infeasible = true;
            }
        }
        let group_end = (0..edges.len())
            .map(|i| {
                edges
                    .get(i + 1)
                    .is_none_or(|n: &Edge| (n.0, n.1) != (edges[i].0, edges[i].1))
            })
            .collect();
        Population { kinds, ids, edges, prev, window: window_of, group_end, infeasible }
    }

    pub fn graph(&self, chosen: &[bool]) -> InstanceGraph {
        let mut g = InstanceGraph::new();
        for (id, kind) in self.ids.iter().zip(&self.kinds) {
            g.insert_element(Element { id: id.clone(), kind: *kind, label: None, attrs: Attrs::new() })
                .expect("fresh ids");
        }
        for (e, _) in self.edges.iter().zip(chosen).filter(|(_, c)| **c) {
            g.add_relation(e.1, &self.ids[e.0 as usize], &self.ids[e.2 as usize])
                .expect("candidate edges satisfy signatures");
        }
        g
    }

    pub fn canonical(&self, chosen: &[bool]) -> CanonicalForm {
        let edges: Vec<Edge> = self.edges.iter().zip(chosen).filter(|(_, c)| **c).map(|(e, _)| *e).collect();
        canonical_form(&self.kinds, &edges)
    }
}

pub enum Mode<'a> {
    /// Stop at the first accepted leaf.
    First(&'a Property),
    /// Collect canonical forms of all accepted leaves.
    Count(&'a mut HashSet<CanonicalForm>),
}

struct Dfs<'p, 'm> {
    pop: &'p Population,
    enabled: AxiomSet,
    mode: Mode<'m>,
    chosen: Vec<bool>,
    touched: Vec<u32>,
    group_count: usize,
    found: Option<InstanceGraph>,
    pub leaves: u64,
}

impl Dfs<'_, '_> {
    fn symmetric_prune(&self, e: Edge) -> bool {
        let (a, _, b) = e;
        [a, b].into_iter().any(|x| {
            self.pop.prev[x as usize].is_some_and(|p| self.touched[p as usize] == 0 && p != a && p != b)
        })
    }

    fn leaf(&mut self) -> bool {
        self.leaves += 1;
        let g = self.pop.graph(&self.chosen);
        if !constraints::is_valid(&g, self.enabled) {
            return false;
        }
        match &mut self.mode {
            Mode::First(p) => {
                if p.holds(&g) {
                    self.found = Some(g);
                    return true;
                }
                false
            }
            Mode::Count(set) => {
                set.insert(self.pop.canonical(&self.chosen));
                false
            }
        }
    }

    /// Returns true to stop the search.
    fn go(&mut self, i: usize) -> bool {
        if i == self.pop.edges.len() {
            return self.leaf();
        }
        let (lo, hi) = self.pop.window[i];
        let end = self.pop.group_end[i];
        let saved = self.group_count;

        // exclude first
        if !(end && self.group_count < lo) {
            self.group_count = if end { 0 } else { saved };
            if self.go(i + 1) {
                return true;
            }
            self.group_count = saved;
        }

        let e = self.pop.edges[i];
        if saved + 1 <= hi && !self.symmetric_prune(e) {
            self.chosen[i] = true;
            self.touched[e.0 as usize] += 1;
            self.touched[e.2 as usize] += 1;
            self.group_count = if end { 0 } else { saved + 1 };
            let stop = !(end && saved + 1 < lo) && self.go(i + 1);
            self.chosen[i] = false;
            self.touched[e.0 as usize] -= 1;
            self.touched[e.2 as usize] -= 1;
            self.group_count = saved;
            if stop {
                return true;
            }
        }
        false
    }
}

/// Searches one population. Returns the witness (in `First` mode) and the number of leaves visited.
pub fn search(pop: &Population, enabled: AxiomSet, mode: Mode<'_>) -> (Option<InstanceGraph>, u64) {
    if pop.infeasible {
        return (None, 0);
    }
    let mut dfs = Dfs {
        pop,
        enabled,
        mode,
        chosen: vec![false; pop.edges.len()],
        touched: vec![0; pop.kinds.len()],
        group_count: 0,
        found: None,
        leaves: 0,
    };
    dfs.go(0);
    (dfs.found, dfs.leaves)
}
