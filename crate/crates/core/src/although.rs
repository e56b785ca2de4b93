//! Perplexing actions: `Although/4` and, with a rational, `Although/5`.
//!
//! An action is perplexing when it lowers a principle's degree in one of
//! three ways: Fulfilled to NotFulfilled, IndifferentState to NotFulfilled,
//! or any non-prevented degree to Prevented. It is justified when it starts
//! the observed sequence that fulfils an equally or more important principle
//! and that sequence is as short as any plan doing so.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deontic::{
    assess, is_fulfilled, Degree, DeonticError, IdealityPrinciple, PrincipleOrder, TaggedProposition,
};
use crate::kb::KnowledgeBase;
use crate::planner::{observed_sequence, optimum_sequence};
use crate::term::ActionTerm;
use crate::trace::BehaviorInstance;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rational {
    pub principle: IdealityPrinciple,
    pub sequence: Vec<ActionTerm>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlthoughFact {
    pub before_cert: Vec<TaggedProposition>,
    pub action: ActionTerm,
    /// Index of the resulting state.
    pub state: usize,
    pub deviation_cert: Vec<TaggedProposition>,
    pub rational: Option<Rational>,
}

impl AlthoughFact {
    /// The threatened principle.
    pub fn principle(&self) -> Option<&IdealityPrinciple> {
        self.before_cert.iter().find_map(|t| match t {
            TaggedProposition::Principle(p) => Some(p),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderMode {
    Text,
    Json,
}

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("malformed explanation line: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed explanation line: {0}")]
    Term(#[from] DeonticError),
    #[error("malformed explanation line: {0}")]
    Shape(String),
}

fn perplexing(before: Degree, after: Degree) -> bool {
    matches!(
        (before, after),
        (Degree::Fulfilled, Degree::NotFulfilled)
            | (Degree::IndifferentState, Degree::NotFulfilled)
            | (
                Degree::Fulfilled | Degree::IndifferentState | Degree::NotFulfilled,
                Degree::Prevented
            )
    )
}

/// `Although/4` facts, ordered by transition, then principle rank, then
/// canonical principle text.
pub fn derive_although4(
    inst: &BehaviorInstance,
    principles: &[IdealityPrinciple],
    order: &PrincipleOrder,
    kb: &KnowledgeBase,
) -> Result<Vec<AlthoughFact>, DeonticError> {
    let mut sorted: Vec<&IdealityPrinciple> = principles.iter().collect();
    sorted.sort_by_cached_key(|p| (order.rank(p), p.to_string()));
    sorted.dedup();
    let mut out = Vec::new();
    for (i, a) in inst.actions().iter().enumerate() {
        for pr in &sorted {
            let before = assess(pr, inst, i, kb)?;
            let after = assess(pr, inst, i + 1, kb)?;
            if perplexing(before.degree, after.degree) {
                out.push(AlthoughFact {
                    before_cert: before.certificate,
                    action: a.clone(),
                    state: i + 1,
                    deviation_cert: after.certificate,
                    rational: None,
                });
            }
        }
    }
    Ok(out)
}

/// Justifications of one `Although/4` fact: one fact per principle at least
/// as important as the threatened one, not fulfilled before the action, whose
/// observed fulfilling sequence starts with the action and is optimal.
pub fn derive_although5(
    a4: &AlthoughFact,
    inst: &BehaviorInstance,
    principles: &[IdealityPrinciple],
    order: &PrincipleOrder,
    kb: &KnowledgeBase,
) -> Vec<AlthoughFact> {
    let Some(threatened) = a4.principle() else {
        return Vec::new();
    };
    let s1 = a4.state - 1;
    let mut sorted: Vec<&IdealityPrinciple> = principles.iter().collect();
    sorted.sort_by_cached_key(|p| (order.rank(p), p.to_string()));
    sorted.dedup();
    let mut out = Vec::new();
    for pj in sorted {
        if !order.le(threatened, pj) || is_fulfilled(pj, inst, s1) {
            continue;
        }
        let Some(observed) = observed_sequence(pj, inst, s1) else {
            continue;
        };
        if observed.first() != Some(&a4.action) {
            continue;
        }
        let Some((optimum, _)) = optimum_sequence(pj, inst, s1, kb) else {
            continue;
        };
        if optimum == observed.len() {
            out.push(AlthoughFact {
                rational: Some(Rational {
                    principle: pj.clone(),
                    sequence: observed,
                }),
                ..a4.clone()
            });
        }
    }
    out
}

/// All `Although/4` facts followed by all `Although/5` facts.
pub fn explain_instance(
    inst: &BehaviorInstance,
    principles: &[IdealityPrinciple],
    order: &PrincipleOrder,
    kb: &KnowledgeBase,
) -> Result<Vec<AlthoughFact>, DeonticError> {
    let a4 = derive_although4(inst, principles, order, kb)?;
    let mut out = a4.clone();
    for f in &a4 {
        out.extend(derive_although5(f, inst, principles, order, kb));
    }
    Ok(out)
}

/// Drops conjuncts that are vacuous because nothing prevents anything.
pub fn abridge(cert: &[TaggedProposition], kb: &KnowledgeBase) -> Vec<TaggedProposition> {
    let vacuous = kb.prevents.is_empty();
    cert.iter()
        .filter(|t| !(vacuous && matches!(t, TaggedProposition::NeverPreventedUpTo(..))))
        .cloned()
        .collect()
}

fn titles(cert: &[TaggedProposition]) -> String {
    let parts: Vec<String> = cert.iter().map(|t| t.display_title()).collect();
    format!("{{{}}}", parts.join(", "))
}

#[derive(Serialize, Deserialize)]
struct RationalLine {
    principle: String,
    sequence: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct FactLine {
    kind: String,
    pset1: Vec<String>,
    action: String,
    state: String,
    dev: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rational: Option<RationalLine>,
}

pub fn render_explanation(fact: &AlthoughFact, mode: RenderMode, kb: &KnowledgeBase) -> String {
    match mode {
        RenderMode::Json => {
            let line = FactLine {
                kind: if fact.rational.is_some() {
                    "although5"
                } else {
                    "although4"
                }
                .into(),
                pset1: fact.before_cert.iter().map(|t| t.to_string()).collect(),
                action: fact.action.to_string(),
                state: format!("s{}", fact.state),
                dev: fact.deviation_cert.iter().map(|t| t.to_string()).collect(),
                rational: fact.rational.as_ref().map(|r| RationalLine {
                    principle: r.principle.to_string(),
                    sequence: r.sequence.iter().map(|a| a.to_string()).collect(),
                }),
            };
            serde_json::to_string(&line).expect("fact serializes")
        }
        RenderMode::Text => {
            let mut text = format!(
                "Although {}, the actor executed {}, resulting in S{} where {}",
                titles(&abridge(&fact.before_cert, kb)),
                fact.action.display_title(),
                fact.state,
                titles(&abridge(&fact.deviation_cert, kb)),
            );
            if let Some(r) = &fact.rational {
                let seq: Vec<String> = r.sequence.iter().map(|a| a.display_title()).collect();
                text.push_str(&format!(
                    "; however, {}:[{}]",
                    r.principle.display_title(),
                    seq.join(", ")
                ));
            }
            text
        }
    }
}

/// Parses one line produced by the JSON renderer.
pub fn parse_explanation(line: &str) -> Result<AlthoughFact, RenderError> {
    let raw: FactLine = serde_json::from_str(line)?;
    let tags = |v: &[String]| -> Result<Vec<TaggedProposition>, RenderError> {
        v.iter().map(|t| Ok(TaggedProposition::parse(t)?)).collect()
    };
    let action = ActionTerm::parse(&raw.action).map_err(|e| RenderError::Shape(e.to_string()))?;
    let state = raw
        .state
        .strip_prefix('s')
        .and_then(|d| d.parse().ok())
        .ok_or_else(|| RenderError::Shape(format!("bad state `{}`", raw.state)))?;
    let rational = match raw.rational {
        None => None,
        Some(r) => Some(Rational {
            principle: IdealityPrinciple::parse(&r.principle)?,
            sequence: r
                .sequence
                .iter()
                .map(|a| ActionTerm::parse(a).map_err(|e| RenderError::Shape(e.to_string())))
                .collect::<Result<_, _>>()?,
        }),
    };
    let expected = if rational.is_some() { "although5" } else { "although4" };
    if raw.kind != expected {
        return Err(RenderError::Shape(format!(
            "kind `{}` does not match content",
            raw.kind
        )));
    }
    Ok(AlthoughFact {
        before_cert: tags(&raw.pset1)?,
        action,
        state,
        deviation_cert: tags(&raw.dev)?,
        rational,
    })
}

impl fmt::Display for AlthoughFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_explanation(self, RenderMode::Json, &KnowledgeBase::default()))
    }
}
