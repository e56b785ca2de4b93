//! Prerequisite relations learned directly from a corpus: proposition
//! classes, action models, goal, precedence, mandatory propositions, and the
//! per-instance `Achieved`/`Contributed` relations.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::term::{ActionTerm, Atom, AtomSet};
use crate::trace::{transitions, BehaviorInstance, Corpus};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LearnError {
    #[error("corpus has no instances")]
    EmptyCorpus,
    #[error("corpus has no successful (non-fragment) instances")]
    NoSuccessfulInstances,
}

pub type ActionModel = BTreeMap<ActionTerm, AtomSet>;

/// `(statics, fluents)`: statics hold in every state of every instance.
pub fn classify_propositions(corpus: &Corpus) -> Result<(AtomSet, AtomSet), LearnError> {
    if corpus.is_empty() {
        return Err(LearnError::EmptyCorpus);
    }
    let mut states = corpus.states();
    let mut statics = states.next().map(|s| s.props.clone()).unwrap_or_default();
    for s in states {
        statics.retain(|a| s.props.contains(a));
    }
    let fluents = corpus
        .observed_atoms()
        .into_iter()
        .filter(|a| !statics.contains(a))
        .collect();
    Ok((statics, fluents))
}

fn intersect_into(slot: &mut Option<AtomSet>, sample: AtomSet) {
    match slot {
        Some(acc) => acc.retain(|a| sample.contains(a)),
        None => *slot = Some(sample),
    }
}

pub fn learn_preconditions(corpus: &Corpus, fluents: &AtomSet) -> ActionModel {
    let mut acc: BTreeMap<ActionTerm, Option<AtomSet>> = BTreeMap::new();
    for (pre, a, _) in corpus.transitions() {
        let sample = pre.props.intersection(fluents).cloned().collect();
        intersect_into(acc.entry(a.clone()).or_default(), sample);
    }
    acc.into_iter().map(|(a, s)| (a, s.unwrap_or_default())).collect()
}

/// `(pos, neg)` effects: intersections of the per-execution state diffs.
pub fn learn_effects(corpus: &Corpus) -> (ActionModel, ActionModel) {
    let mut pos: BTreeMap<ActionTerm, Option<AtomSet>> = BTreeMap::new();
    let mut neg: BTreeMap<ActionTerm, Option<AtomSet>> = BTreeMap::new();
    for (pre, a, next) in corpus.transitions() {
        let added = next.props.difference(&pre.props).cloned().collect();
        let removed = pre.props.difference(&next.props).cloned().collect();
        intersect_into(pos.entry(a.clone()).or_default(), added);
        intersect_into(neg.entry(a.clone()).or_default(), removed);
    }
    let flatten = |m: BTreeMap<ActionTerm, Option<AtomSet>>| -> ActionModel {
        m.into_iter().map(|(a, s)| (a, s.unwrap_or_default())).collect()
    };
    (flatten(pos), flatten(neg))
}

/// Atoms true in the final state of every successful instance, minus statics.
pub fn learn_goal(corpus: &Corpus, statics: &AtomSet) -> Result<AtomSet, LearnError> {
    let mut goal: Option<AtomSet> = None;
    for inst in corpus.instances().iter().filter(|i| !i.is_fragment()) {
        intersect_into(&mut goal, inst.last().props.clone());
    }
    let mut goal = goal.ok_or(LearnError::NoSuccessfulInstances)?;
    goal.retain(|a| !statics.contains(a));
    Ok(goal)
}

pub fn learn_desired_props(goal: &AtomSet) -> AtomSet {
    goal.clone()
}

fn first_occurrences(inst: &BehaviorInstance) -> BTreeMap<&Atom, usize> {
    let mut first = BTreeMap::new();
    for s in inst.states() {
        for a in &s.props {
            first.entry(a).or_insert(s.index);
        }
    }
    first
}

/// Ordered pairs `(p1, p2)` where `p1` always first occurs before `p2`, and the
/// ordering is not explained by `p1` being a precondition of an action
/// executed in between.
pub fn learn_must_precede(corpus: &Corpus, fluents: &AtomSet, precond: &ActionModel) -> BTreeSet<(Atom, Atom)> {
    let firsts: Vec<_> = corpus.instances().iter().map(first_occurrences).collect();
    let mut out = BTreeSet::new();
    for p1 in fluents {
        for p2 in fluents {
            if p1 == p2 {
                continue;
            }
            let mut common = 0;
            let mut ordered = true;
            let mut explained_everywhere = true;
            for (inst, first) in corpus.instances().iter().zip(&firsts) {
                let (Some(&f1), Some(&f2)) = (first.get(p1), first.get(p2)) else {
                    continue;
                };
                common += 1;
                if f1 == 0 && f2 == 0 {
                    explained_everywhere = false;
                    continue;
                }
                if f1 >= f2 {
                    ordered = false;
                    break;
                }
                let explained = inst.actions()[f1..f2]
                    .iter()
                    .any(|a| precond.get(a).is_some_and(|pre| pre.contains(p1)));
                explained_everywhere &= explained;
            }
            if common > 0 && ordered && !explained_everywhere {
                out.insert((p1.clone(), p2.clone()));
            }
        }
    }
    out
}

/// Non-goal fluents occurring in some state of every successful instance.
pub fn learn_mandatory(corpus: &Corpus, goal: &AtomSet, fluents: &AtomSet) -> AtomSet {
    let mut candidates: Option<AtomSet> = None;
    for inst in corpus.instances().iter().filter(|i| !i.is_fragment()) {
        let seen: AtomSet = inst.states().iter().flat_map(|s| s.props.iter().cloned()).collect();
        intersect_into(&mut candidates, seen);
    }
    candidates
        .unwrap_or_default()
        .into_iter()
        .filter(|p| fluents.contains(p) && !goal.contains(p))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContributedFact {
    pub state: usize,
    pub prop: Atom,
    pub action: ActionTerm,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AchievedFact {
    pub state: usize,
    pub action: ActionTerm,
    pub props: AtomSet,
}

pub fn derive_contributed(inst: &BehaviorInstance, precond: &ActionModel) -> Vec<ContributedFact> {
    let mut out = Vec::new();
    for (s, a, _) in transitions(inst) {
        let Some(pre) = precond.get(a) else { continue };
        for p in s.props.intersection(pre) {
            out.push(ContributedFact {
                state: s.index,
                prop: p.clone(),
                action: a.clone(),
            });
        }
    }
    out
}

/// For each transition, the added atoms that are goals or that persist until
/// a later action uses them as a precondition. `state` is the pre-state index.
pub fn derive_achieved(
    inst: &BehaviorInstance,
    goal: &AtomSet,
    precond: &ActionModel,
    _pos_effects: &ActionModel,
) -> Vec<AchievedFact> {
    let states = inst.states();
    let actions = inst.actions();
    let mut out = Vec::new();
    for i in 0..actions.len() {
        let props: AtomSet = states[i + 1]
            .props
            .difference(&states[i].props)
            .filter(|p| {
                if goal.contains(*p) {
                    return true;
                }
                for j in i + 1..actions.len() {
                    if !states[j].holds(p) {
                        return false;
                    }
                    if precond.get(&actions[j]).is_some_and(|pre| pre.contains(*p)) {
                        return true;
                    }
                }
                false
            })
            .cloned()
            .collect();
        if !props.is_empty() {
            out.push(AchievedFact {
                state: i,
                action: actions[i].clone(),
                props,
            });
        }
    }
    out
}
