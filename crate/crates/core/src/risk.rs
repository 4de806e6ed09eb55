//! Risk chains: action, threatening situation, threat event, loss event, hurt intentions.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::constraints::bringing_actions;
use crate::exec::Execution;
use crate::kernel::{ElementId, ElementKind, InstanceGraph, RelationKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RiskError {
    #[error("unknown element `{0}`")]
    UnknownElement(ElementId),
    #[error("`{0}` is not a {1}")]
    WrongKind(ElementId, ElementKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SituationClass {
    Successful,
    Threatening,
    Unclassified,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct RiskChain {
    pub action: ElementId,
    pub situation: ElementId,
    pub threat: ElementId,
    pub loss: Option<ElementId>,
    pub hurt_intentions: Vec<ElementId>,
    /// Dispositions playing a vulnerability role that the threat manifests.
    pub vulnerabilities: Vec<ElementId>,
}

impl RiskChain {
    /// A chain whose threat has not caused a loss.
    pub fn is_potential(&self) -> bool {
        self.loss.is_none()
    }
}

fn is_trust_intention(g: &InstanceGraph, i: &ElementId) -> bool {
    g.incoming(i, RelationKind::About)
        .any(|t| g.kind_of(t).is_some_and(|k| k.is_a(ElementKind::Trust)))
}

fn satisfies_trust_goal(g: &InstanceGraph, s: &ElementId) -> bool {
    g.outgoing(s, RelationKind::Satisfies).any(|x| match g.kind_of(x) {
        Some(k) if k.is_a(ElementKind::Intention) => is_trust_intention(g, x),
        Some(ElementKind::Goal) => g
            .incoming(x, RelationKind::About)
            .any(|i| g.kind_of(i).is_some_and(|k| k.is_a(ElementKind::Intention)) && is_trust_intention(g, i)),
        _ => false,
    })
}

fn threats<'a>(g: &'a InstanceGraph, s: &'a ElementId) -> impl Iterator<Item = &'a ElementId> {
    g.outgoing(s, RelationKind::Triggers)
        .filter(|t| g.kind_of(t) == Some(ElementKind::ThreatEvent))
}

/// Declared subkinds take precedence over structure.
pub(crate) fn situation_class(g: &InstanceGraph, s: &ElementId) -> SituationClass {
    match g.kind_of(s) {
        Some(ElementKind::ThreateningSituation) => SituationClass::Threatening,
        Some(ElementKind::SuccessfulSituation) => SituationClass::Successful,
        Some(k) if k.is_a(ElementKind::Situation) => {
            if threats(g, s).next().is_some() {
                SituationClass::Threatening
            } else if satisfies_trust_goal(g, s) {
                SituationClass::Successful
            } else {
                SituationClass::Unclassified
            }
        }
        _ => SituationClass::Unclassified,
    }
}

pub fn classify_situation(g: &InstanceGraph, situation: &ElementId) -> Result<SituationClass, RiskError> {
    let kind = g.kind_of(situation).ok_or_else(|| RiskError::UnknownElement(situation.clone()))?;
    if !kind.is_a(ElementKind::Situation) {
        return Err(RiskError::WrongKind(situation.clone(), ElementKind::Situation));
    }
    Ok(situation_class(g, situation))
}

fn sorted<'a>(it: impl Iterator<Item = &'a ElementId>) -> Vec<ElementId> {
    it.cloned().collect::<BTreeSet<_>>().into_iter().collect()
}

fn chains_from(g: &InstanceGraph, s: &ElementId) -> Vec<RiskChain> {
    if situation_class(g, s) != SituationClass::Threatening {
        return Vec::new();
    }
    let &[action] = bringing_actions(g, s).as_slice() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for t in threats(g, s) {
        let vulnerabilities = sorted(
            g.outgoing(t, RelationKind::RefersTo)
                .filter(|d| g.outgoing(d, RelationKind::PlaysVulnerability).next().is_some()),
        );
        let chain = |loss: Option<&ElementId>| RiskChain {
            action: action.clone(),
            situation: s.clone(),
            threat: t.clone(),
            loss: loss.cloned(),
            hurt_intentions: loss
                .map(|l| sorted(g.outgoing(l, RelationKind::Hurts)))
                .unwrap_or_default(),
            vulnerabilities: vulnerabilities.clone(),
        };
        let losses: BTreeSet<&ElementId> = g.outgoing(t, RelationKind::Causes).collect();
        if losses.is_empty() {
            out.push(chain(None));
        }
        out.extend(losses.into_iter().map(|l| chain(Some(l))));
    }
    out
}

pub fn derive_chains(g: &InstanceGraph) -> Vec<RiskChain> {
    derive_chains_with(g, Execution::Sequential)
}

/// Every maximal chain, ordered by (action, situation, threat, loss).
pub fn derive_chains_with(g: &InstanceGraph, exec: Execution) -> Vec<RiskChain> {
    let situations: Vec<&ElementId> = g.elements_of(ElementKind::Situation).map(|e| &e.id).collect();
    let mut chains: Vec<RiskChain> = exec.map(&situations, |s| chains_from(g, s)).into_iter().flatten().collect();
    chains.sort();
    chains.dedup();
    chains
}

pub fn threats_to(g: &InstanceGraph, intention: &ElementId) -> Result<Vec<ElementId>, RiskError> {
    let kind = g.kind_of(intention).ok_or_else(|| RiskError::UnknownElement(intention.clone()))?;
    if !kind.is_a(ElementKind::Intention) {
        return Err(RiskError::WrongKind(intention.clone(), ElementKind::Intention));
    }
    Ok(sorted(
        derive_chains(g)
            .iter()
            .filter(|c| c.hurt_intentions.contains(intention))
            .map(|c| &c.threat),
    ))
}
