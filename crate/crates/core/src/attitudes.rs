//! Attitudes (desired, undesired, neutral), incompatibility and prevention.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::kb::{unordered, Entity, KnowledgeBase};
use crate::planner::Domain;
use crate::term::{ActionTerm, Atom, AtomSet};
use crate::trace::Corpus;

/// Actions adding a desired proposition while adding nothing in `undesired`
/// and deleting nothing desired.
pub fn learn_desired_actions(kb: &KnowledgeBase, undesired: &AtomSet) -> BTreeSet<ActionTerm> {
    kb.actions
        .iter()
        .filter(|a| {
            let pos = kb.pos_of(a);
            !pos.is_disjoint(&kb.desired_props)
                && pos.is_disjoint(undesired)
                && kb.neg_of(a).is_disjoint(&kb.desired_props)
        })
        .cloned()
        .collect()
}

/// Propositions that prevent some desired entity.
pub fn derive_undesired_props(prevents: &BTreeSet<(Entity, Entity)>, desired: &BTreeSet<Entity>) -> AtomSet {
    prevents
        .iter()
        .filter(|(_, e)| desired.contains(e))
        .filter_map(|(p, _)| p.as_prop().cloned())
        .collect()
}

pub fn derive_undesired_actions(kb: &KnowledgeBase) -> BTreeSet<ActionTerm> {
    kb.actions
        .iter()
        .filter(|a| !kb.pos_of(a).is_disjoint(&kb.undesired_props))
        .cloned()
        .collect()
}

pub fn derive_neutral(kb: &KnowledgeBase) -> (AtomSet, BTreeSet<ActionTerm>) {
    let props = kb
        .fluents
        .iter()
        .filter(|p| !kb.desired_props.contains(*p) && !kb.undesired_props.contains(*p))
        .cloned()
        .collect();
    let actions = kb
        .actions
        .iter()
        .filter(|a| !kb.desired_actions.contains(*a) && !kb.undesired_actions.contains(*a))
        .cloned()
        .collect();
    (props, actions)
}

/// Unordered pairs of distinct fluents that never share a state.
pub fn learn_incompatible_props(corpus: &Corpus, fluents: &AtomSet) -> BTreeSet<(Atom, Atom)> {
    let observed: Vec<&Atom> = corpus
        .observed_atoms()
        .iter()
        .filter(|a| fluents.contains(*a))
        .map(|a| fluents.get(a).expect("filtered"))
        .collect();
    let index: HashMap<&Atom, usize> = observed.iter().enumerate().map(|(i, a)| (*a, i)).collect();
    let n = observed.len();
    let mut together = vec![false; n * n];
    for s in corpus.states() {
        let present: Vec<usize> = s.props.iter().filter_map(|a| index.get(a).copied()).collect();
        for &i in &present {
            for &j in &present {
                together[i * n + j] = true;
            }
        }
    }
    let mut out = BTreeSet::new();
    for i in 0..n {
        for j in i + 1..n {
            if !together[i * n + j] {
                out.insert(unordered(observed[i].clone(), observed[j].clone()));
            }
        }
    }
    out
}

/// `(p, a)` when some precondition of `a` is incompatible with `p`.
pub fn derive_incompatible_prop_action(kb: &KnowledgeBase) -> BTreeSet<(Atom, ActionTerm)> {
    let mut partners: BTreeMap<&Atom, Vec<&Atom>> = BTreeMap::new();
    for (p, q) in &kb.incompatible {
        partners.entry(p).or_default().push(q);
        partners.entry(q).or_default().push(p);
    }
    let mut out = BTreeSet::new();
    for a in &kb.actions {
        for q in kb.precond_of(a) {
            for p in partners.get(q).into_iter().flatten() {
                out.insert(((*p).clone(), a.clone()));
            }
        }
    }
    out
}

/// First and last state index of every atom in one instance.
type Span<'a> = (HashMap<&'a Atom, usize>, HashMap<&'a Atom, usize>);

/// Stage one: `(p1, p2)` such that `p2` never holds strictly after a state
/// holding `p1`. Self pairs are admitted.
pub fn prevents_stage1(corpus: &Corpus, fluents: &AtomSet) -> BTreeSet<(Atom, Atom)> {
    let mut spans: Vec<Span> = Vec::new();
    for inst in corpus.instances() {
        let mut first = HashMap::new();
        let mut last = HashMap::new();
        for s in inst.states() {
            for a in &s.props {
                first.entry(a).or_insert(s.index);
                last.insert(a, s.index);
            }
        }
        spans.push((first, last));
    }
    let mut out = BTreeSet::new();
    for p1 in fluents {
        for p2 in fluents {
            let violated = spans
                .iter()
                .any(|(first, last)| matches!((first.get(p1), last.get(p2)), (Some(f), Some(l)) if f < l));
            if !violated {
                out.insert((p1.clone(), p2.clone()));
            }
        }
    }
    out
}

/// Two-stage prevention learner. Stage two drops `(p1, p2)` when, from some
/// observed state holding `p1`, a plan of at most `bound` actions ends with
/// an action that adds `p2`.
pub fn learn_prevents_props(
    corpus: &Corpus,
    fluents: &AtomSet,
    kb: &KnowledgeBase,
    bound: usize,
) -> BTreeSet<(Atom, Atom)> {
    let stage1 = prevents_stage1(corpus, fluents);
    if stage1.is_empty() {
        return stage1;
    }
    let observed = corpus.observed_atoms();
    let domain = Domain::new(kb, observed.iter());
    let mut cache: HashMap<&AtomSet, BTreeMap<Atom, usize>> = HashMap::new();
    let mut states_with: BTreeMap<&Atom, Vec<&AtomSet>> = BTreeMap::new();
    for s in corpus.states() {
        for a in &s.props {
            let list = states_with.entry(a).or_default();
            if !list.contains(&&s.props) {
                list.push(&s.props);
            }
        }
    }
    let mut out = BTreeSet::new();
    for (p1, p2) in stage1 {
        let mut achievable = false;
        for start in states_with.get(&p1).into_iter().flatten() {
            let reach = cache
                .entry(start)
                .or_insert_with(|| domain.achievable_atoms(start, bound));
            if reach.contains_key(&p2) {
                achievable = true;
                break;
            }
        }
        if !achievable {
            out.insert((p1, p2));
        }
    }
    log::debug!("prevention stage two kept {} pairs", out.len());
    out
}

/// Prevention between actions and propositions, derived from the
/// proposition pairs, incompatibility and the action models.
pub fn derive_prevents_mixed(kb: &KnowledgeBase) -> BTreeSet<(Entity, Entity)> {
    let prop_pairs: BTreeSet<(&Atom, &Atom)> = kb.prop_prevents().collect();
    let mut out = BTreeSet::new();
    // proposition prevents action: it prevents one of the preconditions
    let mut prop_action: BTreeSet<(Atom, ActionTerm)> = BTreeSet::new();
    for (p, q) in &prop_pairs {
        for a in &kb.actions {
            if kb.precond_of(a).contains(*q) {
                prop_action.insert(((*p).clone(), a.clone()));
            }
        }
    }
    for (p, a) in &prop_action {
        out.insert((Entity::Prop(p.clone()), Entity::Action(a.clone())));
    }
    for a1 in &kb.actions {
        for p in kb.pos_of(a1) {
            for a2 in &kb.actions {
                let key = (p.clone(), a2.clone());
                if kb.incompatible_prop_action.contains(&key) && prop_action.contains(&key) {
                    out.insert((Entity::Action(a1.clone()), Entity::Action(a2.clone())));
                }
            }
            for (q, target) in &prop_pairs {
                if *q == p && kb.are_incompatible(p, target) {
                    out.insert((Entity::Action(a1.clone()), Entity::Prop((*target).clone())));
                }
            }
        }
    }
    out
}
