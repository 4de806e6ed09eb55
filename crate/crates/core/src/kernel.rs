//! Typed instance-graph store for the UFO-C fragment plus the trust-specific kinds.
//!
//! Every relation is checked against a fixed signature table on insertion.
//! Cardinalities are not enforced here; see [`crate::constraints`].

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("unknown element kind `{0}`")]
    UnknownKind(String),
    #[error("unknown relation kind `{0}`")]
    UnknownRelationKind(String),
    #[error("{kind} cannot link {from} ({from_kind}) to {to} ({to_kind})")]
    SignatureViolation {
        kind: RelationKind,
        from: ElementId,
        from_kind: ElementKind,
        to: ElementId,
        to_kind: ElementKind,
    },
    #[error("relation endpoint `{0}` does not exist")]
    DanglingEndpoint(ElementId),
    #[error("duplicate element id `{0}`")]
    DuplicateId(ElementId),
    #[error("unknown element `{0}`")]
    UnknownElement(ElementId),
}

macro_rules! element_kinds {
    ($( $variant:ident : $parent:expr ),* $(,)?) => {
        /// Most-specific kind of an element. Ancestors are computed from [`ElementKind::parent`].
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum ElementKind {
            $( $variant, )*
        }

        impl ElementKind {
            pub const ALL: &'static [ElementKind] = &[ $( ElementKind::$variant, )* ];

            pub fn name(self) -> &'static str {
                match self {
                    $( ElementKind::$variant => stringify!($variant), )*
                }
            }

            pub fn parent(self) -> Option<ElementKind> {
                use ElementKind::*;
                match self {
                    $( $variant => $parent, )*
                }
            }
        }
    };
}

element_kinds! {
    Agent: None,
    HumanAgent: Some(Agent),
    ArtificialAgent: Some(Agent),
    SocialAgent: Some(Agent),
    Object: None,
    PhysicalObject: Some(Object),
    SocialObject: Some(Object),
    NormativeDescription: Some(Object),
    SocialSystem: None,
    Disposition: None,
    MomentType: None,
    MentalMoment: None,
    Perception: Some(MentalMoment),
    Desire: Some(MentalMoment),
    Emotion: Some(MentalMoment),
    Intention: Some(MentalMoment),
    ComplexIntention: Some(Intention),
    Belief: Some(MentalMoment),
    MomentBelief: Some(Belief),
    DispositionBelief: Some(MomentBelief),
    CapabilityBelief: Some(DispositionBelief),
    VulnerabilityBelief: Some(DispositionBelief),
    IntentionBelief: Some(MomentBelief),
    SocialCommitmentBelief: Some(MomentBelief),
    SocialCommitment: None,
    SocialClaim: None,
    Trust: None,
    GroundTrust: Some(Trust),
    SocialTrust: Some(GroundTrust),
    WeakTrust: Some(SocialTrust),
    StrongTrust: Some(WeakTrust),
    InstitutionBasedTrust: Some(GroundTrust),
    Agreement: None,
    TrustedDelegation: None,
    Influence: None,
    Action: None,
    TrustorAction: Some(Action),
    TrusteeAction: Some(Action),
    CommunicativeAct: Some(Action),
    TrustCalibrationCommunication: Some(CommunicativeAct),
    ThreatEvent: None,
    LossEvent: None,
    Situation: None,
    ResultingSituation: Some(Situation),
    SuccessfulSituation: Some(ResultingSituation),
    ThreateningSituation: Some(ResultingSituation),
    TrustCalibrationSignal: None,
    TrustWarrantingSignal: Some(TrustCalibrationSignal),
    UncertaintySignal: Some(TrustCalibrationSignal),
    TrustworthinessEvidence: None,
    Goal: None,
}

impl ElementKind {
    /// Reflexive ancestor test.
    pub fn is_a(self, ancestor: ElementKind) -> bool {
        let mut cur = Some(self);
        while let Some(k) = cur {
            if k == ancestor {
                return true;
            }
            cur = k.parent();
        }
        false
    }

    pub fn is_any(self, ancestors: &[ElementKind]) -> bool {
        ancestors.iter().any(|a| self.is_a(*a))
    }

    pub fn ancestors(self) -> impl Iterator<Item = ElementKind> {
        std::iter::successors(Some(self), |k| k.parent())
    }

    /// Entities that can bear moments and play trustee roles.
    pub fn is_substantial(self) -> bool {
        self.is_any(&[ElementKind::Agent, ElementKind::Object, ElementKind::SocialSystem])
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ElementKind {
    type Err = KernelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Organization" => return Ok(ElementKind::SocialAgent),
            "Proposition" => return Ok(ElementKind::Goal),
            _ => {}
        }
        ElementKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| KernelError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RelationKind {
    InheresIn,
    ExternallyDependsOn,
    ComponentOf,
    About,
    RefersTo,
    MediatesTrustor,
    MediatesTrustee,
    GroundedOn,
    Trusts,
    PlaysCapability,
    PlaysVulnerability,
    BringsAbout,
    Triggers,
    Causes,
    Hurts,
    Influences,
    InfluencedBelief,
    Emits,
    ExpressedIn,
    Satisfies,
    Characterizes,
}

/// One admissible (domain, range) pairing of a relation. Membership is by ancestor test.
#[derive(Debug, Clone, Copy)]
pub struct SignatureClause {
    pub domain: &'static [ElementKind],
    pub range: &'static [ElementKind],
}

/// Informational cardinality of the relation ends; enforced by the constraint engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cardinality {
    One,
    Many,
}

#[derive(Debug, Clone, Copy)]
pub struct RelationSignature {
    pub clauses: &'static [SignatureClause],
    pub source_cardinality: Cardinality,
    pub target_cardinality: Cardinality,
}

mod sig {
    use super::ElementKind::{self, *};
    use super::SignatureClause as C;

    pub const SUBSTANTIAL: &[ElementKind] = &[Agent, Object, SocialSystem];

    pub const INHERES_IN: &[C] = &[
        C { domain: &[MentalMoment, Trust], range: &[Agent] },
        C { domain: &[SocialCommitment, SocialClaim], range: &[Agent, SocialSystem] },
        C { domain: &[Disposition], range: SUBSTANTIAL },
    ];
    pub const EXTERNALLY_DEPENDS_ON: &[C] = &[
        C { domain: &[MomentBelief], range: &[MomentType] },
        C { domain: &[SocialCommitment, SocialClaim], range: SUBSTANTIAL },
    ];
    pub const COMPONENT_OF: &[C] = &[
        C { domain: &[Belief, Intention], range: &[Trust] },
        C { domain: &[Intention], range: &[ComplexIntention] },
        C { domain: &[SocialCommitment, SocialClaim], range: &[Agreement, TrustedDelegation] },
        C { domain: SUBSTANTIAL, range: SUBSTANTIAL },
    ];
    pub const ABOUT: &[C] = &[
        C { domain: &[Trust], range: &[Intention] },
        C { domain: &[Intention, Desire, SocialCommitment, SocialClaim], range: &[Goal] },
        C { domain: &[TrustCalibrationSignal], range: &[Disposition] },
        C { domain: &[CommunicativeAct], range: &[TrustCalibrationSignal] },
        C {
            domain: &[Belief, Perception, Emotion],
            range: &[MomentType, Goal, Situation, Disposition, Agent, Object, SocialSystem],
        },
    ];
    pub const REFERS_TO: &[C] = &[
        C {
            domain: &[
                Agent,
                SocialCommitment,
                SocialClaim,
                Action,
                TrustworthinessEvidence,
                TrustCalibrationSignal,
            ],
            range: SUBSTANTIAL,
        },
        C { domain: &[ThreatEvent, TrustworthinessEvidence], range: &[Disposition] },
    ];
    pub const MEDIATES_TRUSTOR: &[C] = &[C { domain: &[Agreement, TrustedDelegation], range: &[Agent] }];
    pub const MEDIATES_TRUSTEE: &[C] =
        &[C { domain: &[Trust, Agreement, TrustedDelegation], range: SUBSTANTIAL }];
    pub const GROUNDED_ON: &[C] = &[
        C { domain: &[Trust], range: &[Agreement, Trust] },
        C { domain: &[TrustedDelegation], range: &[Trust] },
    ];
    pub const TRUSTS: &[C] = &[C { domain: &[Agent], range: SUBSTANTIAL }];
    pub const PLAYS_ROLE: &[C] = &[C { domain: &[Disposition], range: &[Trust] }];
    pub const BRINGS_ABOUT: &[C] = &[C { domain: &[Action], range: &[Situation] }];
    pub const TRIGGERS: &[C] = &[C { domain: &[Situation], range: &[ThreatEvent] }];
    pub const CAUSES: &[C] = &[C { domain: &[ThreatEvent], range: &[LossEvent] }];
    pub const HURTS: &[C] = &[C { domain: &[LossEvent], range: &[Intention] }];
    pub const INFLUENCES: &[C] = &[C {
        domain: &[Trust, MentalMoment, TrustCalibrationSignal, TrustworthinessEvidence],
        range: &[Influence],
    }];
    pub const INFLUENCED_BELIEF: &[C] = &[C { domain: &[Influence], range: &[MomentBelief] }];
    pub const EMITS: &[C] = &[C { domain: SUBSTANTIAL, range: &[CommunicativeAct] }];
    pub const EXPRESSED_IN: &[C] = &[C { domain: &[TrustCalibrationSignal], range: &[CommunicativeAct] }];
    pub const SATISFIES: &[C] = &[C { domain: &[Situation], range: &[Intention, Goal] }];
    pub const CHARACTERIZES: &[C] = &[C { domain: &[MomentType], range: SUBSTANTIAL }];
}

impl RelationKind {
    pub const ALL: &'static [RelationKind] = &[
        RelationKind::InheresIn,
        RelationKind::ExternallyDependsOn,
        RelationKind::ComponentOf,
        RelationKind::About,
        RelationKind::RefersTo,
        RelationKind::MediatesTrustor,
        RelationKind::MediatesTrustee,
        RelationKind::GroundedOn,
        RelationKind::Trusts,
        RelationKind::PlaysCapability,
        RelationKind::PlaysVulnerability,
        RelationKind::BringsAbout,
        RelationKind::Triggers,
        RelationKind::Causes,
        RelationKind::Hurts,
        RelationKind::Influences,
        RelationKind::InfluencedBelief,
        RelationKind::Emits,
        RelationKind::ExpressedIn,
        RelationKind::Satisfies,
        RelationKind::Characterizes,
    ];

    pub fn name(self) -> &'static str {
        use RelationKind::*;
        match self {
            InheresIn => "inheresIn",
            ExternallyDependsOn => "externallyDependsOn",
            ComponentOf => "componentOf",
            About => "about",
            RefersTo => "refersTo",
            MediatesTrustor => "mediatesTrustor",
            MediatesTrustee => "mediatesTrustee",
            GroundedOn => "groundedOn",
            Trusts => "trusts",
            PlaysCapability => "playsCapability",
            PlaysVulnerability => "playsVulnerability",
            BringsAbout => "bringsAbout",
            Triggers => "triggers",
            Causes => "causes",
            Hurts => "hurts",
            Influences => "influences",
            InfluencedBelief => "influencedBelief",
            Emits => "emits",
            ExpressedIn => "expressedIn",
            Satisfies => "satisfies",
            Characterizes => "characterizes",
        }
    }

    pub fn signature(self) -> RelationSignature {
        use Cardinality::*;
        use RelationKind::*;
        let (clauses, source_cardinality, target_cardinality) = match self {
            InheresIn => (sig::INHERES_IN, Many, One),
            ExternallyDependsOn => (sig::EXTERNALLY_DEPENDS_ON, Many, Many),
            ComponentOf => (sig::COMPONENT_OF, Many, Many),
            About => (sig::ABOUT, Many, One),
            RefersTo => (sig::REFERS_TO, Many, Many),
            MediatesTrustor => (sig::MEDIATES_TRUSTOR, Many, One),
            MediatesTrustee => (sig::MEDIATES_TRUSTEE, Many, One),
            GroundedOn => (sig::GROUNDED_ON, Many, Many),
            Trusts => (sig::TRUSTS, Many, Many),
            PlaysCapability | PlaysVulnerability => (sig::PLAYS_ROLE, Many, Many),
            BringsAbout => (sig::BRINGS_ABOUT, Many, Many),
            Triggers => (sig::TRIGGERS, Many, Many),
            Causes => (sig::CAUSES, Many, Many),
            Hurts => (sig::HURTS, Many, Many),
            Influences => (sig::INFLUENCES, One, Many),
            InfluencedBelief => (sig::INFLUENCED_BELIEF, Many, One),
            Emits => (sig::EMITS, Many, Many),
            ExpressedIn => (sig::EXPRESSED_IN, Many, Many),
            Satisfies => (sig::SATISFIES, Many, Many),
            Characterizes => (sig::CHARACTERIZES, Many, Many),
        };
        RelationSignature { clauses, source_cardinality, target_cardinality }
    }

    pub fn admits(self, from: ElementKind, to: ElementKind) -> bool {
        self.signature()
            .clauses
            .iter()
            .any(|c| from.is_any(c.domain) && to.is_any(c.range))
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RelationKind {
    type Err = KernelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RelationKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| KernelError::UnknownRelationKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementId(String);

impl ElementId {
    pub fn new(id: impl Into<String>) -> Self {
        ElementId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ElementId {
    fn from(s: &str) -> Self {
        ElementId(s.to_string())
    }
}

impl From<String> for ElementId {
    fn from(s: String) -> Self {
        ElementId(s)
    }
}

impl PartialEq<str> for ElementId {
    fn eq(&self, other: &str) -> bool {
        self.0 == other
    }
}

impl PartialEq<&str> for ElementId {
    fn eq(&self, other: &&str) -> bool {
        self.0 == *other
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelationId(pub u64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttrValue {
    Bool(bool),
    Number(f64),
    Text(String),
}

impl AttrValue {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            AttrValue::Number(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            AttrValue::Text(s) => Some(s),
            _ => None,
        }
    }
}

impl From<f64> for AttrValue {
    fn from(n: f64) -> Self {
        AttrValue::Number(n)
    }
}

impl From<&str> for AttrValue {
    fn from(s: &str) -> Self {
        AttrValue::Text(s.to_string())
    }
}

impl From<bool> for AttrValue {
    fn from(b: bool) -> Self {
        AttrValue::Bool(b)
    }
}

pub type Attrs = BTreeMap<String, AttrValue>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub id: ElementId,
    pub kind: ElementKind,
    pub label: Option<String>,
    pub attrs: Attrs,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub id: RelationId,
    pub kind: RelationKind,
    pub from: ElementId,
    pub to: ElementId,
}

/// Kind filters for [`InstanceGraph::query`]. Endpoint filters match by ancestor test.
#[derive(Debug, Clone, Copy, Default)]
pub struct Pattern {
    pub relation: Option<RelationKind>,
    pub from_kind: Option<ElementKind>,
    pub to_kind: Option<ElementKind>,
}

impl Pattern {
    pub fn relation(kind: RelationKind) -> Self {
        Pattern { relation: Some(kind), ..Pattern::default() }
    }

    pub fn from_kind(mut self, kind: ElementKind) -> Self {
        self.from_kind = Some(kind);
        self
    }

    pub fn to_kind(mut self, kind: ElementKind) -> Self {
        self.to_kind = Some(kind);
        self
    }
}

#[derive(Debug, Clone, Default)]
pub struct InstanceGraph {
    elements: IndexMap<ElementId, Element>,
    relations: Vec<Relation>,
    outgoing: HashMap<ElementId, Vec<usize>>,
    incoming: HashMap<ElementId, Vec<usize>>,
    next_element: u64,
    next_relation: u64,
}

impl InstanceGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    /// Adds an element under a fresh generated id.
    pub fn add_element(&mut self, kind: ElementKind, label: Option<&str>, attrs: Attrs) -> ElementId {
        let id = loop {
            self.next_element += 1;
            let candidate = ElementId(format!("e{}", self.next_element));
            if !self.elements.contains_key(&candidate) {
                break candidate;
            }
        };
        self.elements.insert(
            id.clone(),
            Element { id: id.clone(), kind, label: label.map(str::to_string), attrs },
        );
        id
    }

    /// Adds an element with a caller-chosen id.
    pub fn insert_element(&mut self, element: Element) -> Result<(), KernelError> {
        if self.elements.contains_key(&element.id) {
            return Err(KernelError::DuplicateId(element.id));
        }
        self.elements.insert(element.id.clone(), element);
        Ok(())
    }

    pub fn add_relation(
        &mut self,
        kind: RelationKind,
        from: &ElementId,
        to: &ElementId,
    ) -> Result<RelationId, KernelError> {
        let from_kind = self.kind_of(from).ok_or_else(|| KernelError::DanglingEndpoint(from.clone()))?;
        let to_kind = self.kind_of(to).ok_or_else(|| KernelError::DanglingEndpoint(to.clone()))?;
        // parthood is irreflexive
        if !kind.admits(from_kind, to_kind) || (kind == RelationKind::ComponentOf && from == to) {
            return Err(KernelError::SignatureViolation {
                kind,
                from: from.clone(),
                from_kind,
                to: to.clone(),
                to_kind,
            });
        }
        self.next_relation += 1;
        let id = RelationId(self.next_relation);
        let pos = self.relations.len();
        self.relations.push(Relation { id, kind, from: from.clone(), to: to.clone() });
        self.outgoing.entry(from.clone()).or_default().push(pos);
        self.incoming.entry(to.clone()).or_default().push(pos);
        Ok(id)
    }

    /// Removes an element and every relation incident to it.
    pub fn remove_element(&mut self, id: &ElementId) -> Result<Element, KernelError> {
        let element = self
            .elements
            .shift_remove(id)
            .ok_or_else(|| KernelError::UnknownElement(id.clone()))?;
        self.relations.retain(|r| &r.from != id && &r.to != id);
        self.reindex();
        Ok(element)
    }

    fn reindex(&mut self) {
        self.outgoing.clear();
        self.incoming.clear();
        for (pos, r) in self.relations.iter().enumerate() {
            self.outgoing.entry(r.from.clone()).or_default().push(pos);
            self.incoming.entry(r.to.clone()).or_default().push(pos);
        }
    }

    pub fn element(&self, id: &ElementId) -> Option<&Element> {
        self.elements.get(id)
    }

    pub fn element_mut(&mut self, id: &ElementId) -> Option<&mut Element> {
        self.elements.get_mut(id)
    }

    pub fn kind_of(&self, id: &ElementId) -> Option<ElementKind> {
        self.elements.get(id).map(|e| e.kind)
    }

    pub fn contains(&self, id: &ElementId) -> bool {
        self.elements.contains_key(id)
    }

    pub fn label_or_id<'a>(&'a self, id: &'a ElementId) -> &'a str {
        self.element(id)
            .and_then(|e| e.label.as_deref())
            .unwrap_or(id.as_str())
    }

    /// Elements in insertion order.
    pub fn elements(&self) -> impl Iterator<Item = &Element> {
        self.elements.values()
    }

    pub fn elements_of(&self, kind: ElementKind) -> impl Iterator<Item = &Element> {
        self.elements.values().filter(move |e| e.kind.is_a(kind))
    }

    /// Relations in insertion order.
    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn outgoing(&self, id: &ElementId, kind: RelationKind) -> impl Iterator<Item = &ElementId> {
        self.outgoing
            .get(id)
            .into_iter()
            .flatten()
            .map(|&p| &self.relations[p])
            .filter(move |r| r.kind == kind)
            .map(|r| &r.to)
    }

    pub fn incoming(&self, id: &ElementId, kind: RelationKind) -> impl Iterator<Item = &ElementId> {
        self.incoming
            .get(id)
            .into_iter()
            .flatten()
            .map(|&p| &self.relations[p])
            .filter(move |r| r.kind == kind)
            .map(|r| &r.from)
    }

    pub fn has_relation(&self, kind: RelationKind, from: &ElementId, to: &ElementId) -> bool {
        self.outgoing(from, kind).any(|t| t == to)
    }

    /// Unique `inheresIn` target, if exactly one exists.
    pub fn bearer(&self, id: &ElementId) -> Option<&ElementId> {
        let mut it = self.outgoing(id, RelationKind::InheresIn);
        match (it.next(), it.next()) {
            (Some(b), None) => Some(b),
            _ => None,
        }
    }

    /// Every relation matching all filters, in insertion order.
    pub fn query(&self, pattern: &Pattern) -> Vec<&Relation> {
        self.relations
            .iter()
            .filter(|r| pattern.relation.is_none_or(|k| r.kind == k))
            .filter(|r| {
                pattern
                    .from_kind
                    .is_none_or(|k| self.kind_of(&r.from).is_some_and(|fk| fk.is_a(k)))
            })
            .filter(|r| {
                pattern
                    .to_kind
                    .is_none_or(|k| self.kind_of(&r.to).is_some_and(|tk| tk.is_a(k)))
            })
            .collect()
    }
}
