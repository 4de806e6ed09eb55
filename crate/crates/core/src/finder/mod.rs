//! Bounded model finding.
//!
//! The search space of a [`Signature`] is split into count vectors (how many
//! elements of each kind), ordered by size and then lexicographically. Each
//! vector is searched independently by backtracking over candidate edges, so
//! the vectors are the unit of parallel work. Results are merged in vector
//! order, which keeps output independent of the worker count.

mod canon;
mod search;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::Deserialize;
use thiserror::Error;

pub use canon::{canonical_form, CanonicalForm, Edge};
pub use search::Population;

use crate::constraints::{self, AxiomId, AxiomSet};
use crate::exec::Execution;
use crate::kernel::{ElementKind, InstanceGraph, RelationKind};
use crate::typology::{self, TrustKind};

pub const FIND_LIMIT: usize = 12;
pub const COUNT_LIMIT: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FinderError {
    #[error("bound {bound} exceeds the {mode} limit of {limit} elements")]
    BoundExceeded { bound: usize, limit: usize, mode: &'static str },
    #[error("invalid signature: {0}")]
    InvalidSignature(String),
    #[error("unknown property `{0}`; expected open-cycle[:Kind], violation:AXIOM or satisfiable")]
    UnknownProperty(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub caps: BTreeMap<ElementKind, usize>,
    pub relations: BTreeSet<RelationKind>,
    pub bound: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SignatureFile {
    bound: Option<usize>,
    caps: BTreeMap<String, usize>,
    relations: Vec<String>,
}

impl Signature {
    pub fn new(caps: &[(ElementKind, usize)], relations: &[RelationKind]) -> Self {
        Signature {
            caps: caps.iter().copied().collect(),
            relations: relations.iter().copied().collect(),
            bound: None,
        }
    }

    pub fn with_bound(mut self, bound: usize) -> Self {
        self.bound = Some(bound);
        self
    }

    pub fn effective_bound(&self) -> usize {
        let total: usize = self.caps.values().sum();
        self.bound.map_or(total, |b| b.min(total))
    }

    /// Reads `bound`, `[caps]` and `relations` from a TOML document.
    pub fn from_toml(text: &str) -> Result<Self, FinderError> {
        let file: SignatureFile = toml::from_str(text).map_err(|e| FinderError::InvalidSignature(e.to_string()))?;
        let caps = file
            .caps
            .iter()
            .map(|(k, n)| Ok((k.parse::<ElementKind>().map_err(|e| FinderError::InvalidSignature(e.to_string()))?, *n)))
            .collect::<Result<_, FinderError>>()?;
        let relations = file
            .relations
            .iter()
            .map(|r| r.parse::<RelationKind>().map_err(|e| FinderError::InvalidSignature(e.to_string())))
            .collect::<Result<_, _>>()?;
        Ok(Signature { caps, relations, bound: file.bound })
    }

    /// Count vectors with at most `effective_bound` elements, by size then lexicographically.
    pub fn count_vectors(&self) -> Vec<Vec<usize>> {
        let caps: Vec<usize> = self.caps.values().copied().collect();
        let bound = self.effective_bound();
        let mut out = vec![Vec::new()];
        for cap in &caps {
            out = out
                .into_iter()
                .flat_map(|v: Vec<usize>| {
                    (0..=*cap).map(move |n| {
                        let mut w = v.clone();
                        w.push(n);
                        w
                    })
                })
                .filter(|v| v.iter().sum::<usize>() <= bound)
                .collect();
        }
        out.sort_by_key(|v| (v.iter().sum::<usize>(), v.clone()));
        out
    }

    pub fn population(&self, counts: &[usize], enabled: AxiomSet) -> Population {
        let kinds = self
            .caps
            .keys()
            .zip(counts)
            .flat_map(|(k, n)| std::iter::repeat_n(*k, *n))
            .collect();
        let relations: Vec<RelationKind> = self.relations.iter().copied().collect();
        Population::new(kinds, &relations, enabled)
    }

    /// The ground-trust signature: two agents around one trust and its parts.
    pub fn ground_trust() -> Self {
        use ElementKind::*;
        use RelationKind::*;
        Signature::new(
            &[
                (Agent, 2),
                (GroundTrust, 1),
                (Intention, 1),
                (CapabilityBelief, 1),
                (MomentType, 1),
                (Disposition, 1),
            ],
            &[InheresIn, About, ComponentOf, MediatesTrustee, ExternallyDependsOn, Characterizes, PlaysCapability],
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    /// Some trust of the kind has a component belief borne by a different agent than its intention.
    OpenCycle(TrustKind),
    AxiomViolation(AxiomId),
    /// At least one trust exists.
    Satisfiable,
}

impl Property {
    pub fn holds(&self, g: &InstanceGraph) -> bool {
        match self {
            Property::OpenCycle(kind) => open_cycles(g, *kind) > 0,
            Property::AxiomViolation(a) => !constraints::check_axiom(g, *a).is_empty(),
            Property::Satisfiable => g.elements_of(ElementKind::Trust).next().is_some(),
        }
    }
}

/// Number of trusts of `kind` whose intention and some component belief have different bearers.
pub fn open_cycles(g: &InstanceGraph, kind: TrustKind) -> usize {
    g.elements_of(kind.element_kind())
        .filter(|t| {
            let mut intentions = typology::about_intentions(g, &t.id);
            let (Some(i), None) = (intentions.next(), intentions.next()) else { return false };
            let Some(owner) = g.bearer(i) else { return false };
            typology::component_beliefs(g, &t.id).any(|b| g.bearer(b).is_some_and(|x| x != owner))
        })
        .count()
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Property::OpenCycle(k) => write!(f, "open-cycle:{k}"),
            Property::AxiomViolation(a) => write!(f, "violation:{a}"),
            Property::Satisfiable => f.write_str("satisfiable"),
        }
    }
}

impl FromStr for Property {
    type Err = FinderError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || FinderError::UnknownProperty(s.into());
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        match (head, arg) {
            ("satisfiable", None) => Ok(Property::Satisfiable),
            ("open-cycle", None) => Ok(Property::OpenCycle(TrustKind::GroundTrust)),
            ("open-cycle", Some(k)) => k.parse().map(Property::OpenCycle).map_err(|_| bad()),
            ("violation", Some(a)) => a.parse().map(Property::AxiomViolation).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WitnessQuery {
    pub property: Property,
    pub enabled: AxiomSet,
}

impl WitnessQuery {
    pub fn new(property: Property, enabled: AxiomSet) -> Self {
        WitnessQuery { property, enabled }
    }
}

/// Search statistics of a count run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CountStats {
    pub models: u64,
    pub leaves: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct Finder {
    pub exec: Execution,
}

impl Default for Finder {
    fn default() -> Self {
        Finder { exec: Execution::Parallel }
    }
}

impl Finder {
    pub fn new(exec: Execution) -> Self {
        Finder { exec }
    }

    /// First witness in search order, or `None` when the bounded space has none.
    pub fn find_witness(&self, sig: &Signature, query: &WitnessQuery) -> Result<Option<InstanceGraph>, FinderError> {
        let bound = sig.effective_bound();
        if bound > FIND_LIMIT {
            return Err(FinderError::BoundExceeded { bound, limit: FIND_LIMIT, mode: "find" });
        }
        let vectors = sig.count_vectors();
        Ok(self.exec.find_first(&vectors, |v| {
            let pop = sig.population(v, query.enabled);
            search::search(&pop, query.enabled, search::Mode::First(&query.property)).0
        }))
    }

    pub fn count_models(&self, sig: &Signature, enabled: AxiomSet) -> Result<u64, FinderError> {
        Ok(self.count_with_stats(sig, enabled)?.models)
    }

    pub fn count_with_stats(&self, sig: &Signature, enabled: AxiomSet) -> Result<CountStats, FinderError> {
        let bound = sig.effective_bound();
        if bound > COUNT_LIMIT {
            return Err(FinderError::BoundExceeded { bound, limit: COUNT_LIMIT, mode: "count" });
        }
        let vectors = sig.count_vectors();
        let per_vector = self.exec.map(&vectors, |v| {
            let pop = sig.population(v, enabled);
            let mut forms = HashSet::new();
            let (_, leaves) = search::search(&pop, enabled, search::Mode::Count(&mut forms));
            CountStats { models: forms.len() as u64, leaves }
        });
        Ok(per_vector.into_iter().fold(CountStats::default(), |acc, s| CountStats {
            models: acc.models + s.models,
            leaves: acc.leaves + s.leaves,
        }))
    }
}

pub fn find_witness(sig: &Signature, query: &WitnessQuery) -> Result<Option<InstanceGraph>, FinderError> {
    Finder::default().find_witness(sig, query)
}

pub fn count_models(sig: &Signature, enabled: AxiomSet) -> Result<u64, FinderError> {
    Finder::default().count_models(sig, enabled)
}
