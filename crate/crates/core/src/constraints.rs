//! Axiom checking over instance graphs.
//!
//! Every [`AxiomId`] owns exactly one checker. [`validate`] is the
//! concatenation of all checkers, each of which emits diagnostics sorted by
//! (first offender, message).

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::exec::Execution;
use crate::kernel::{ElementId, ElementKind, InstanceGraph, RelationKind};
use crate::risk::{self, SituationClass};
use crate::typology::{self, TrustKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstraintError {
    #[error("unknown axiom `{0}`")]
    UnknownAxiom(String),
}

macro_rules! axioms {
    ($($v:ident = $code:literal),* $(,)?) => {
        #[allow(non_camel_case_types)]
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
        pub enum AxiomId { $($v),* }

        impl AxiomId {
            pub const ALL: &'static [AxiomId] = &[$(AxiomId::$v),*];

            pub fn name(self) -> &'static str {
                match self { $(AxiomId::$v => stringify!($v)),* }
            }

            pub fn code(self) -> &'static str {
                match self { $(AxiomId::$v => $code),* }
            }
        }
    };
}

axioms! {
    A1_GroundTrustInherence = "A1",
    A1b_ExternalDependence = "A1b",
    A2_ComplexIntentionHomogeneity = "A2",
    A3_AgreementInherence = "A3",
    A4_WeakTrustBeliefInherence = "A4",
    A5_StrongTrustGrounding = "A5",
    A6_DelegationSameParties = "A6",
    A7_ThreateningSituationXor = "A7",
    S1_TrustParts = "S1",
    S2_MomentBeliefTarget = "S2",
    S3_DispositionRoles = "S3",
    S4_InfluenceShape = "S4",
    S5_SingleBearer = "S5",
    S6_SituationExclusivity = "S6",
    D1_DeclaredTrustKind = "D1",
    W1_InstitutionGrounding = "W1",
}

impl AxiomId {
    pub fn severity(self) -> Severity {
        match self {
            AxiomId::W1_InstitutionGrounding => Severity::Warning,
            _ => Severity::Error,
        }
    }

    fn bit(self) -> u32 {
        1 << (self as u32)
    }
}

impl fmt::Display for AxiomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Accepts full names (`A1_GroundTrustInherence`) and short codes (`A1`, `a1b`).
impl FromStr for AxiomId {
    type Err = ConstraintError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AxiomId::ALL
            .iter()
            .copied()
            .find(|a| a.name() == s || a.code().eq_ignore_ascii_case(s))
            .ok_or_else(|| ConstraintError::UnknownAxiom(s.to_string()))
    }
}

/// A set of axioms, stored as a bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AxiomSet(u32);

impl AxiomSet {
    pub fn all() -> Self {
        AxiomSet(AxiomId::ALL.iter().fold(0, |m, a| m | a.bit()))
    }

    pub fn none() -> Self {
        AxiomSet(0)
    }

    pub fn without(self, a: AxiomId) -> Self {
        AxiomSet(self.0 & !a.bit())
    }

    pub fn with(self, a: AxiomId) -> Self {
        AxiomSet(self.0 | a.bit())
    }

    pub fn contains(self, a: AxiomId) -> bool {
        self.0 & a.bit() != 0
    }

    pub fn iter(self) -> impl Iterator<Item = AxiomId> {
        AxiomId::ALL.iter().copied().filter(move |a| self.contains(*a))
    }
}

impl FromIterator<AxiomId> for AxiomSet {
    fn from_iter<I: IntoIterator<Item = AxiomId>>(iter: I) -> Self {
        iter.into_iter().fold(AxiomSet::none(), AxiomSet::with)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Diagnostic {
    pub axiom: AxiomId,
    pub severity: Severity,
    pub offenders: Vec<ElementId>,
    pub message: String,
}

impl Diagnostic {
    fn new(axiom: AxiomId, offenders: Vec<ElementId>, message: impl Into<String>) -> Self {
        Diagnostic { axiom, severity: axiom.severity(), offenders, message: message.into() }
    }

    /// `AXIOM<TAB>SEVERITY<TAB>offenders<TAB>message`, offenders comma-separated.
    pub fn to_line(&self) -> String {
        let offenders: Vec<&str> = self.offenders.iter().map(|o| o.as_str()).collect();
        format!("{}\t{}\t{}\t{}", self.axiom, self.severity, offenders.join(","), self.message)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

pub fn validate(g: &InstanceGraph) -> Vec<Diagnostic> {
    validate_with(g, AxiomSet::all(), Execution::Sequential)
}

/// Diagnostics of the enabled axioms; checkers may run in parallel but the order is fixed.
pub fn validate_with(g: &InstanceGraph, enabled: AxiomSet, exec: Execution) -> Vec<Diagnostic> {
    let axioms: Vec<AxiomId> = enabled.iter().collect();
    exec.map(&axioms, |a| check_axiom(g, *a)).into_iter().flatten().collect()
}

/// True when no enabled axiom reports an error. Stops at the first failing axiom.
pub fn is_valid(g: &InstanceGraph, enabled: AxiomSet) -> bool {
    enabled
        .iter()
        .filter(|a| a.severity() == Severity::Error)
        .all(|a| check_axiom(g, a).is_empty())
}

pub fn error_count(diags: &[Diagnostic]) -> usize {
    diags.iter().filter(|d| d.severity == Severity::Error).count()
}

pub fn check_axiom(g: &InstanceGraph, axiom: AxiomId) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut emit = |offenders: Vec<ElementId>, msg: String| out.push(Diagnostic::new(axiom, offenders, msg));
    match axiom {
        AxiomId::A1_GroundTrustInherence => a1(g, &mut emit),
        AxiomId::A1b_ExternalDependence => a1b(g, &mut emit),
        AxiomId::A2_ComplexIntentionHomogeneity => a2(g, &mut emit),
        AxiomId::A3_AgreementInherence => a3(g, &mut emit),
        AxiomId::A4_WeakTrustBeliefInherence => a4(g, &mut emit),
        AxiomId::A5_StrongTrustGrounding => a5(g, &mut emit),
        AxiomId::A6_DelegationSameParties => a6(g, &mut emit),
        AxiomId::A7_ThreateningSituationXor => a7(g, &mut emit),
        AxiomId::S1_TrustParts => s1(g, &mut emit),
        AxiomId::S2_MomentBeliefTarget => s2(g, &mut emit),
        AxiomId::S3_DispositionRoles => s3(g, &mut emit),
        AxiomId::S4_InfluenceShape => s4(g, &mut emit),
        AxiomId::S5_SingleBearer => s5(g, &mut emit),
        AxiomId::S6_SituationExclusivity => s6(g, &mut emit),
        AxiomId::D1_DeclaredTrustKind => d1(g, &mut emit),
        AxiomId::W1_InstitutionGrounding => w1(g, &mut emit),
    }
    out.sort();
    out
}

type Emit<'a> = dyn FnMut(Vec<ElementId>, String) + 'a;

fn ids<'a>(it: impl IntoIterator<Item = &'a ElementId>) -> Vec<ElementId> {
    it.into_iter().cloned().collect()
}

fn unique<'a>(mut it: impl Iterator<Item = &'a ElementId>) -> Option<&'a ElementId> {
    match (it.next(), it.next()) {
        (Some(x), None) => Some(x),
        _ => None,
    }
}

fn trusts(g: &InstanceGraph) -> impl Iterator<Item = &ElementId> {
    g.elements_of(ElementKind::Trust).map(|e| &e.id)
}

fn of_kind(g: &InstanceGraph, id: &ElementId, kind: ElementKind) -> bool {
    g.kind_of(id).is_some_and(|k| k.is_a(kind))
}

fn bearer_count(g: &InstanceGraph, id: &ElementId) -> usize {
    g.outgoing(id, RelationKind::InheresIn).count()
}

/// Checks that `part` inheres in `expected`; multiple bearers are left to S5.
fn same_bearer(g: &InstanceGraph, part: &ElementId, expected: &ElementId) -> Result<(), Option<ElementId>> {
    match bearer_count(g, part) {
        0 => Err(None),
        1 => match g.bearer(part) {
            Some(b) if b == expected => Ok(()),
            b => Err(b.cloned()),
        },
        _ => Ok(()),
    }
}

fn a1(g: &InstanceGraph, emit: &mut Emit) {
    for t in trusts(g) {
        let Some(trustor) = unique(g.outgoing(t, RelationKind::InheresIn)) else { continue };
        if let Some(i) = unique(typology::about_intentions(g, t)) {
            match same_bearer(g, i, trustor) {
                Ok(()) => {}
                Err(None) => emit(ids([t, i]), "intention lacks bearer".into()),
                Err(Some(b)) => emit(ids([t, i]), format!("intention `{i}` inheres in `{b}`, not in trustor `{trustor}`")),
            }
        }
        for b in g.incoming(t, RelationKind::ComponentOf).filter(|b| of_kind(g, b, ElementKind::Belief)) {
            match same_bearer(g, b, trustor) {
                Ok(()) => {}
                Err(None) => emit(ids([t, b]), format!("belief `{b}` lacks bearer")),
                Err(Some(x)) => emit(ids([t, b]), format!("belief `{b}` inheres in `{x}`, not in trustor `{trustor}`")),
            }
        }
    }
}

fn a1b(g: &InstanceGraph, emit: &mut Emit) {
    for t in trusts(g) {
        let Ok(v) = typology::resolve(g, t) else { continue };
        if v.trustor == v.trustee {
            continue;
        }
        let party = typology::trustee_party(g, &v.trustee);
        for b in &v.beliefs {
            for m in g.outgoing(b, RelationKind::ExternallyDependsOn) {
                let characterized = g.outgoing(m, RelationKind::Characterizes).any(|x| party.contains(x));
                if !characterized {
                    emit(
                        ids([t, b, m]),
                        format!("moment type `{m}` does not characterize trustee `{}`", v.trustee),
                    );
                }
            }
        }
    }
}

fn a2(g: &InstanceGraph, emit: &mut Emit) {
    for w in g.elements_of(ElementKind::ComplexIntention).map(|e| &e.id) {
        let Some(owner) = g.bearer(w) else { continue };
        for p in g.incoming(w, RelationKind::ComponentOf) {
            match same_bearer(g, p, owner) {
                Ok(()) => {}
                Err(None) => emit(ids([w, p]), format!("part `{p}` lacks bearer")),
                Err(Some(b)) => emit(ids([w, p]), format!("part `{p}` inheres in `{b}`, whole inheres in `{owner}`")),
            }
        }
    }
}

fn a3(g: &InstanceGraph, emit: &mut Emit) {
    for a in g.elements_of(ElementKind::Agreement).map(|e| &e.id) {
        let trustors: Vec<_> = g.outgoing(a, RelationKind::MediatesTrustor).collect();
        let trustees: Vec<_> = g.outgoing(a, RelationKind::MediatesTrustee).collect();
        let (&[trustor], &[trustee]) = (trustors.as_slice(), trustees.as_slice()) else {
            emit(
                ids([a]),
                format!(
                    "agreement mediates {} trustor(s) and {} trustee(s); exactly one each expected",
                    trustors.len(),
                    trustees.len()
                ),
            );
            continue;
        };
        let party = typology::trustee_party(g, trustee);
        let parts = g
            .incoming(a, RelationKind::ComponentOf)
            .filter(|c| g.kind_of(c).is_some_and(|k| k.is_any(&[ElementKind::SocialCommitment, ElementKind::SocialClaim])));
        for c in parts {
            let Some(bearer) = g.bearer(c) else {
                if bearer_count(g, c) == 0 {
                    emit(ids([a, c]), format!("`{c}` lacks bearer"));
                }
                continue;
            };
            let deps: Vec<_> = g.outgoing(c, RelationKind::ExternallyDependsOn).collect();
            let on_trustor = deps.iter().any(|d| *d == trustor);
            let on_trustee = deps.iter().any(|d| party.contains(*d));
            let ok = match (on_trustor, on_trustee) {
                (true, false) => party.contains(bearer),
                (false, true) => bearer == trustor,
                _ => bearer == trustor || party.contains(bearer),
            };
            if !ok {
                let side = match (on_trustor, on_trustee) {
                    (true, false) => "trustee-side",
                    (false, true) => "trustor-side",
                    _ => "party",
                };
                emit(ids([a, c]), format!("{side} `{c}` inheres in `{bearer}`, outside the agreement parties"));
            }
        }
    }
}

fn a4(g: &InstanceGraph, emit: &mut Emit) {
    for t in trusts(g) {
        let Some(i) = unique(typology::about_intentions(g, t)) else { continue };
        let Some(reference) = g.bearer(i) else { continue };
        let scbs = g
            .incoming(t, RelationKind::ComponentOf)
            .filter(|b| g.kind_of(b) == Some(ElementKind::SocialCommitmentBelief));
        for s in scbs {
            match same_bearer(g, s, reference) {
                Ok(()) => {}
                Err(None) => emit(ids([t, s]), format!("commitment belief `{s}` lacks bearer")),
                Err(Some(b)) => emit(
                    ids([t, s]),
                    format!("commitment belief `{s}` inheres in `{b}`, intention inheres in `{reference}`"),
                ),
            }
        }
    }
}

fn a5(g: &InstanceGraph, emit: &mut Emit) {
    for t in trusts(g) {
        let (Some(trustor), Some(trustee)) = (
            unique(g.outgoing(t, RelationKind::InheresIn)),
            unique(g.outgoing(t, RelationKind::MediatesTrustee)),
        ) else {
            continue;
        };
        let agreements = g
            .outgoing(t, RelationKind::GroundedOn)
            .filter(|a| g.kind_of(a) == Some(ElementKind::Agreement));
        for a in agreements {
            let (Some(ar), Some(ae)) = (
                unique(g.outgoing(a, RelationKind::MediatesTrustor)),
                unique(g.outgoing(a, RelationKind::MediatesTrustee)),
            ) else {
                continue;
            };
            if ar != trustor || ae != trustee {
                emit(
                    ids([t, a]),
                    format!("agreement mediates `{ar}`->`{ae}`, trust relates `{trustor}`->`{trustee}`"),
                );
            }
        }
    }
}

fn a6(g: &InstanceGraph, emit: &mut Emit) {
    for d in g.elements_of(ElementKind::TrustedDelegation).map(|e| &e.id) {
        let grounds: Vec<_> = g.outgoing(d, RelationKind::GroundedOn).collect();
        if grounds.is_empty() {
            emit(ids([d]), "delegation is not grounded on a trust".into());
        }
        let trustors: BTreeSet<_> = g.outgoing(d, RelationKind::MediatesTrustor).collect();
        let trustees: BTreeSet<_> = g.outgoing(d, RelationKind::MediatesTrustee).collect();
        for t in grounds {
            let Ok(v) = typology::resolve(g, t) else { continue };
            let kind = typology::classify_view(g, &v);
            if !kind.specializes(TrustKind::WeakTrust) {
                emit(ids([d, t]), format!("grounding trust `{t}` classifies as {kind}, below WeakTrust"));
            }
            if trustors != BTreeSet::from([&v.trustor]) || trustees != BTreeSet::from([&v.trustee]) {
                emit(
                    ids([d, t]),
                    format!("delegation parties differ from `{}`->`{}` of grounding trust", v.trustor, v.trustee),
                );
            }
        }
    }
}

fn a7(g: &InstanceGraph, emit: &mut Emit) {
    for s in g.elements_of(ElementKind::Situation).map(|e| &e.id) {
        if risk::situation_class(g, s) != SituationClass::Threatening {
            continue;
        }
        let actions = bringing_actions(g, s);
        if actions.len() != 1 {
            let mut offenders = vec![s.clone()];
            offenders.extend(actions.iter().map(|a| (*a).clone()));
            emit(
                offenders,
                format!(
                    "threatening situation brought about by {} trustor/trustee actions; exactly one expected",
                    actions.len()
                ),
            );
        }
    }
}

/// Trustor or trustee actions that bring about `s`.
pub(crate) fn bringing_actions<'a>(g: &'a InstanceGraph, s: &'a ElementId) -> Vec<&'a ElementId> {
    g.incoming(s, RelationKind::BringsAbout)
        .filter(|a| g.kind_of(a).is_some_and(|k| k.is_any(&[ElementKind::TrustorAction, ElementKind::TrusteeAction])))
        .collect()
}

fn s1(g: &InstanceGraph, emit: &mut Emit) {
    for t in trusts(g) {
        if let Err(typology::TypologyError::MalformedTrust { problems, .. }) = typology::resolve(g, t) {
            for p in problems {
                emit(ids([t]), p.to_string());
            }
            continue;
        }
        let about = unique(typology::about_intentions(g, t)).expect("resolved");
        for i in g
            .incoming(t, RelationKind::ComponentOf)
            .filter(|x| of_kind(g, x, ElementKind::Intention) && *x != about)
        {
            emit(ids([t, i]), format!("component intention `{i}` is not the intention the trust is about"));
        }
    }
}

fn s2(g: &InstanceGraph, emit: &mut Emit) {
    for b in g.elements_of(ElementKind::MomentBelief).map(|e| &e.id) {
        let n = g
            .outgoing(b, RelationKind::ExternallyDependsOn)
            .filter(|m| g.kind_of(m) == Some(ElementKind::MomentType))
            .count();
        if n != 1 {
            emit(ids([b]), format!("moment belief depends on {n} moment types; exactly one expected"));
        }
    }
}

fn s3(g: &InstanceGraph, emit: &mut Emit) {
    for d in g.elements_of(ElementKind::Disposition).map(|e| &e.id) {
        let roles = g
            .outgoing(d, RelationKind::PlaysCapability)
            .chain(g.outgoing(d, RelationKind::PlaysVulnerability))
            .collect::<BTreeSet<_>>();
        for t in roles {
            let Some(trustee) = unique(g.outgoing(t, RelationKind::MediatesTrustee)) else { continue };
            match g.bearer(d) {
                None if bearer_count(g, d) == 0 => emit(ids([d, t]), "disposition lacks bearer".into()),
                None => {}
                Some(b) if typology::trustee_party(g, trustee).contains(b) => {}
                Some(b) => emit(
                    ids([d, t]),
                    format!("disposition inheres in `{b}`, not in trustee `{trustee}`"),
                ),
            }
        }
    }
}

fn s4(g: &InstanceGraph, emit: &mut Emit) {
    for e in g.elements_of(ElementKind::Influence) {
        let f = &e.id;
        let sources = g.incoming(f, RelationKind::Influences).count();
        let beliefs = g.outgoing(f, RelationKind::InfluencedBelief).count();
        if sources != 1 {
            emit(ids([f]), format!("influence has {sources} sources; exactly one expected"));
        }
        if beliefs != 1 {
            emit(ids([f]), format!("influence targets {beliefs} beliefs; exactly one expected"));
        }
        match e.attrs.get("weight").map(|w| w.as_number()) {
            None => emit(ids([f]), "influence lacks weight".into()),
            Some(None) => emit(ids([f]), "influence weight is not a number".into()),
            Some(Some(w)) if !(-1.0..=1.0).contains(&w) => emit(ids([f]), format!("influence weight {w:?} outside [-1, 1]")),
            Some(Some(_)) => {}
        }
    }
}

fn s5(g: &InstanceGraph, emit: &mut Emit) {
    for e in g.elements() {
        let n = bearer_count(g, &e.id);
        if n > 1 {
            emit(ids([&e.id]), format!("element inheres in {n} bearers"));
        }
    }
}

fn s6(g: &InstanceGraph, emit: &mut Emit) {
    for e in g.elements_of(ElementKind::Situation) {
        let s = &e.id;
        let triggers = g.outgoing(s, RelationKind::Triggers).next().is_some();
        let satisfies = g.outgoing(s, RelationKind::Satisfies).next().is_some();
        match e.kind {
            ElementKind::SuccessfulSituation if triggers => {
                emit(ids([s]), "successful situation triggers a threat event".into())
            }
            ElementKind::ThreateningSituation if satisfies => {
                emit(ids([s]), "threatening situation satisfies a goal".into())
            }
            _ => {}
        }
    }
}

fn d1(g: &InstanceGraph, emit: &mut Emit) {
    for t in trusts(g) {
        let Ok(diags) = typology::check_declared(g, t) else { continue };
        for d in diags {
            emit(ids([t]), format!("declared {}: {}", d.declared, d.message));
        }
    }
}

fn w1(g: &InstanceGraph, emit: &mut Emit) {
    for t in trusts(g) {
        let Ok(v) = typology::resolve(g, t) else { continue };
        if typology::classify_view(g, &v) != TrustKind::InstitutionBasedTrust {
            continue;
        }
        let members = typology::components(g, &v.trustee);
        let grounded = g.outgoing(t, RelationKind::GroundedOn).any(|u| {
            typology::resolve(g, u).is_ok_and(|uv| {
                uv.trustor == v.trustor
                    && members.contains(&uv.trustee)
                    && typology::classify_view(g, &uv).specializes(TrustKind::SocialTrust)
            })
        });
        if !grounded {
            emit(
                ids([t]),
                "institution-based trust is not grounded on the trustor's social trust in a member of the system".into(),
            );
        }
    }
}
