//! Trust-kind lattice and structural classification of trust nodes.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::kernel::{ElementId, ElementKind, InstanceGraph, RelationKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TypologyError {
    #[error("unknown element `{0}`")]
    UnknownElement(ElementId),
    #[error("`{0}` is not a trust")]
    NotATrust(ElementId),
    #[error("`{0}` is not a trusted delegation")]
    NotADelegation(ElementId),
    #[error("malformed trust `{trust}`: {}", .problems.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", "))]
    MalformedTrust { trust: ElementId, problems: Vec<PartProblem> },
    #[error("delegation `{0}` is not grounded on a trust")]
    UngroundedDelegation(ElementId),
    #[error("delegation `{delegation}` is grounded on `{trust}`, which classifies as {classified} (below WeakTrust)")]
    GroundingTooWeak { delegation: ElementId, trust: ElementId, classified: TrustKind },
    #[error("unknown trust kind `{0}`")]
    UnknownTrustKind(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TrustPart {
    Trustor,
    Trustee,
    Intention,
    Beliefs,
}

/// A mandatory part that is missing (`found == 0`) or ambiguous.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PartProblem {
    pub part: TrustPart,
    pub found: usize,
}

impl fmt::Display for PartProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.part {
            TrustPart::Trustor => "trustor (inheresIn)",
            TrustPart::Trustee => "trustee (mediatesTrustee)",
            TrustPart::Intention => "intention (about)",
            TrustPart::Beliefs => "component moment belief",
        };
        if self.found == 0 {
            write!(f, "missing {name}")
        } else {
            write!(f, "ambiguous {name}: {} found", self.found)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum TrustKind {
    GroundTrust,
    SocialTrust,
    WeakTrust,
    StrongTrust,
    InstitutionBasedTrust,
}

impl TrustKind {
    pub const ALL: [TrustKind; 5] = [
        TrustKind::GroundTrust,
        TrustKind::SocialTrust,
        TrustKind::WeakTrust,
        TrustKind::StrongTrust,
        TrustKind::InstitutionBasedTrust,
    ];

    pub fn element_kind(self) -> ElementKind {
        match self {
            TrustKind::GroundTrust => ElementKind::GroundTrust,
            TrustKind::SocialTrust => ElementKind::SocialTrust,
            TrustKind::WeakTrust => ElementKind::WeakTrust,
            TrustKind::StrongTrust => ElementKind::StrongTrust,
            TrustKind::InstitutionBasedTrust => ElementKind::InstitutionBasedTrust,
        }
    }

    /// The declared kind of a trust element. Plain `Trust` declares only the root.
    pub fn declared_by(kind: ElementKind) -> Option<TrustKind> {
        match kind {
            ElementKind::Trust | ElementKind::GroundTrust => Some(TrustKind::GroundTrust),
            ElementKind::SocialTrust => Some(TrustKind::SocialTrust),
            ElementKind::WeakTrust => Some(TrustKind::WeakTrust),
            ElementKind::StrongTrust => Some(TrustKind::StrongTrust),
            ElementKind::InstitutionBasedTrust => Some(TrustKind::InstitutionBasedTrust),
            _ => None,
        }
    }

    /// Lattice order: `self ⊑ other` when self is at least as specific.
    pub fn specializes(self, other: TrustKind) -> bool {
        self.element_kind().is_a(other.element_kind())
    }

    pub fn parent(self) -> Option<TrustKind> {
        self.element_kind().parent().and_then(TrustKind::declared_by).filter(|p| *p != self)
    }

    pub fn name(self) -> &'static str {
        self.element_kind().name()
    }
}

impl fmt::Display for TrustKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TrustKind {
    type Err = TypologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TrustKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| TypologyError::UnknownTrustKind(s.into()))
    }
}

/// Resolved projection of a trust node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrustView {
    pub trust: ElementId,
    pub trustor: ElementId,
    pub trustee: ElementId,
    pub intention: ElementId,
    pub beliefs: Vec<ElementId>,
    pub agreement: Option<ElementId>,
    pub delegation: Option<ElementId>,
    pub degree: Option<String>,
}

fn unique<'a>(mut it: impl Iterator<Item = &'a ElementId>) -> (Option<&'a ElementId>, usize) {
    match it.next() {
        None => (None, 0),
        Some(first) => {
            let rest = it.count();
            if rest == 0 {
                (Some(first), 1)
            } else {
                (None, rest + 1)
            }
        }
    }
}

/// Moment beliefs that are parts of the trust, in insertion order.
pub(crate) fn component_beliefs<'a>(g: &'a InstanceGraph, trust: &'a ElementId) -> impl Iterator<Item = &'a ElementId> {
    g.incoming(trust, RelationKind::ComponentOf)
        .filter(|p| g.kind_of(p).is_some_and(|k| k.is_a(ElementKind::MomentBelief)))
}

pub(crate) fn about_intentions<'a>(g: &'a InstanceGraph, trust: &'a ElementId) -> impl Iterator<Item = &'a ElementId> {
    g.outgoing(trust, RelationKind::About)
        .filter(|p| g.kind_of(p).is_some_and(|k| k.is_a(ElementKind::Intention)))
}

pub fn resolve(g: &InstanceGraph, trust: &ElementId) -> Result<TrustView, TypologyError> {
    let kind = g.kind_of(trust).ok_or_else(|| TypologyError::UnknownElement(trust.clone()))?;
    if !kind.is_a(ElementKind::Trust) {
        return Err(TypologyError::NotATrust(trust.clone()));
    }
    let mut problems = Vec::new();
    let mut take = |part, (v, n): (Option<&ElementId>, usize)| {
        if v.is_none() {
            problems.push(PartProblem { part, found: n });
        }
        v.cloned()
    };
    let trustor = take(TrustPart::Trustor, unique(g.outgoing(trust, RelationKind::InheresIn)));
    let trustee = take(TrustPart::Trustee, unique(g.outgoing(trust, RelationKind::MediatesTrustee)));
    let intention = take(TrustPart::Intention, unique(about_intentions(g, trust)));
    let beliefs: Vec<ElementId> = component_beliefs(g, trust).cloned().collect();
    if beliefs.is_empty() {
        problems.push(PartProblem { part: TrustPart::Beliefs, found: 0 });
    }
    if !problems.is_empty() {
        return Err(TypologyError::MalformedTrust { trust: trust.clone(), problems });
    }
    let agreement = g
        .outgoing(trust, RelationKind::GroundedOn)
        .find(|t| g.kind_of(t) == Some(ElementKind::Agreement))
        .cloned();
    let delegation = g
        .incoming(trust, RelationKind::GroundedOn)
        .find(|d| g.kind_of(d) == Some(ElementKind::TrustedDelegation))
        .cloned();
    let degree = g
        .element(trust)
        .and_then(|e| e.attrs.get("degree"))
        .map(|v| match v {
            crate::kernel::AttrValue::Text(t) => t.clone(),
            other => format!("{other:?}"),
        });
    Ok(TrustView {
        trust: trust.clone(),
        trustor: trustor.expect("checked"),
        trustee: trustee.expect("checked"),
        intention: intention.expect("checked"),
        beliefs,
        agreement,
        delegation,
        degree,
    })
}

/// Transitive `componentOf` parts of `whole`, excluding `whole` itself.
pub(crate) fn components(g: &InstanceGraph, whole: &ElementId) -> BTreeSet<ElementId> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![whole.clone()];
    while let Some(x) = stack.pop() {
        for p in g.incoming(&x, RelationKind::ComponentOf) {
            if p != whole && g.kind_of(p).is_some_and(|k| k.is_substantial()) && seen.insert(p.clone()) {
                stack.push(p.clone());
            }
        }
    }
    seen
}

/// Agents accountable for a trustee: wholes it is a component of, or agents that refer to it.
pub(crate) fn responsible_agents(g: &InstanceGraph, trustee: &ElementId) -> BTreeSet<ElementId> {
    let is_agent = |x: &ElementId| g.kind_of(x).is_some_and(|k| k.is_a(ElementKind::Agent));
    g.outgoing(trustee, RelationKind::ComponentOf)
        .chain(g.incoming(trustee, RelationKind::RefersTo))
        .filter(|x| *x != trustee && is_agent(x))
        .cloned()
        .collect()
}

/// The trustee together with its components and responsible agents.
pub(crate) fn trustee_party(g: &InstanceGraph, trustee: &ElementId) -> BTreeSet<ElementId> {
    let mut party = components(g, trustee);
    party.extend(responsible_agents(g, trustee));
    party.insert(trustee.clone());
    party
}

/// Goals the intention is about.
pub(crate) fn goals_of<'a>(g: &'a InstanceGraph, intention: &'a ElementId) -> impl Iterator<Item = &'a ElementId> {
    g.outgoing(intention, RelationKind::About)
        .filter(|x| g.kind_of(x) == Some(ElementKind::Goal))
}

/// A structural requirement of a trust kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Requirement {
    TrusteeIsAgent,
    CommitmentBelief,
    GroundingAgreement,
    TrusteeCommitmentOnGoal,
    TrusteeIsSocialSystem,
}

impl Requirement {
    pub fn message(self) -> &'static str {
        match self {
            Requirement::TrusteeIsAgent => "trustee is not an Agent (nor an object with a responsible agent)",
            Requirement::CommitmentBelief => "missing SocialCommitmentBelief part",
            Requirement::GroundingAgreement => "missing groundedOn Agreement",
            Requirement::TrusteeCommitmentOnGoal => {
                "grounding Agreement has no trustee SocialCommitment about the trust goal"
            }
            Requirement::TrusteeIsSocialSystem => "trustee is not a SocialSystem",
        }
    }
}

fn is_social(g: &InstanceGraph, v: &TrustView) -> bool {
    match g.kind_of(&v.trustee) {
        Some(k) if k.is_a(ElementKind::Agent) => true,
        // indirect commitments of an accountable agent
        Some(k) if k.is_a(ElementKind::Object) => !responsible_agents(g, &v.trustee).is_empty(),
        _ => false,
    }
}

fn has_commitment_belief(g: &InstanceGraph, v: &TrustView) -> bool {
    v.beliefs
        .iter()
        .any(|b| g.kind_of(b).is_some_and(|k| k.is_a(ElementKind::SocialCommitmentBelief)))
}

fn grounding_agreements<'a>(g: &'a InstanceGraph, v: &'a TrustView) -> impl Iterator<Item = &'a ElementId> {
    g.outgoing(&v.trust, RelationKind::GroundedOn)
        .filter(|t| g.kind_of(t) == Some(ElementKind::Agreement))
}

fn has_trustee_commitment_on_goal(g: &InstanceGraph, v: &TrustView) -> bool {
    let goals: BTreeSet<&ElementId> = goals_of(g, &v.intention).collect();
    if goals.is_empty() {
        return false;
    }
    let party = trustee_party(g, &v.trustee);
    grounding_agreements(g, v).any(|agr| {
        g.incoming(agr, RelationKind::ComponentOf)
            .filter(|c| g.kind_of(c) == Some(ElementKind::SocialCommitment))
            .filter(|c| g.bearer(c).is_some_and(|b| party.contains(b)))
            .any(|c| g.outgoing(c, RelationKind::About).any(|t| goals.contains(t)))
    })
}

/// First unmet requirement of `kind` for the resolved trust, checking ancestors first.
pub fn unmet_requirement(g: &InstanceGraph, v: &TrustView, kind: TrustKind) -> Option<Requirement> {
    if let Some(parent) = kind.parent() {
        if let Some(r) = unmet_requirement(g, v, parent) {
            return Some(r);
        }
    }
    let ok = match kind {
        TrustKind::GroundTrust => return None,
        TrustKind::SocialTrust => is_social(g, v),
        TrustKind::WeakTrust => has_commitment_belief(g, v),
        TrustKind::StrongTrust => {
            if grounding_agreements(g, v).next().is_none() {
                return Some(Requirement::GroundingAgreement);
            }
            has_trustee_commitment_on_goal(g, v)
        }
        TrustKind::InstitutionBasedTrust => g.kind_of(&v.trustee) == Some(ElementKind::SocialSystem),
    };
    if ok {
        None
    } else {
        Some(match kind {
            TrustKind::SocialTrust => Requirement::TrusteeIsAgent,
            TrustKind::WeakTrust => Requirement::CommitmentBelief,
            TrustKind::StrongTrust => Requirement::TrusteeCommitmentOnGoal,
            TrustKind::InstitutionBasedTrust => Requirement::TrusteeIsSocialSystem,
            TrustKind::GroundTrust => unreachable!(),
        })
    }
}

pub fn classify_view(g: &InstanceGraph, v: &TrustView) -> TrustKind {
    [
        TrustKind::InstitutionBasedTrust,
        TrustKind::StrongTrust,
        TrustKind::WeakTrust,
        TrustKind::SocialTrust,
    ]
    .into_iter()
    .find(|k| unmet_requirement(g, v, *k).is_none())
    .unwrap_or(TrustKind::GroundTrust)
}

/// Most specific trust kind whose structural requirements hold.
pub fn classify(g: &InstanceGraph, trust: &ElementId) -> Result<TrustKind, TypologyError> {
    let v = resolve(g, trust)?;
    Ok(classify_view(g, &v))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeclarationDiagnostic {
    pub trust: ElementId,
    pub declared: TrustKind,
    pub classified: TrustKind,
    pub unmet: Requirement,
    pub message: String,
}

/// Empty iff the structure supports the declared kind.
pub fn check_declared(g: &InstanceGraph, trust: &ElementId) -> Result<Vec<DeclarationDiagnostic>, TypologyError> {
    let v = resolve(g, trust)?;
    let kind = g.kind_of(trust).expect("resolved");
    let declared = TrustKind::declared_by(kind).ok_or_else(|| TypologyError::NotATrust(trust.clone()))?;
    Ok(match unmet_requirement(g, &v, declared) {
        None => Vec::new(),
        Some(unmet) => vec![DeclarationDiagnostic {
            trust: trust.clone(),
            declared,
            classified: classify_view(g, &v),
            unmet,
            message: unmet.message().to_string(),
        }],
    })
}

pub fn is_self_trust(g: &InstanceGraph, trust: &ElementId) -> Result<bool, TypologyError> {
    let v = resolve(g, trust)?;
    Ok(v.trustor == v.trustee)
}

/// View of the trust a delegation is grounded on; that trust must be at least WeakTrust.
pub fn delegation_grounding(g: &InstanceGraph, delegation: &ElementId) -> Result<TrustView, TypologyError> {
    let kind = g.kind_of(delegation).ok_or_else(|| TypologyError::UnknownElement(delegation.clone()))?;
    if kind != ElementKind::TrustedDelegation {
        return Err(TypologyError::NotADelegation(delegation.clone()));
    }
    let trust = g
        .outgoing(delegation, RelationKind::GroundedOn)
        .next()
        .ok_or_else(|| TypologyError::UngroundedDelegation(delegation.clone()))?;
    let v = resolve(g, trust)?;
    let classified = classify_view(g, &v);
    if !classified.specializes(TrustKind::WeakTrust) {
        return Err(TypologyError::GroundingTooWeak {
            delegation: delegation.clone(),
            trust: trust.clone(),
            classified,
        });
    }
    Ok(v)
}
