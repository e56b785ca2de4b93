//! `Defining(p, body)`: `p` always co-occurs with every atom of `body`.

use std::collections::BTreeMap;

use crate::term::{Atom, AtomSet};
use crate::trace::Corpus;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefiningFact {
    pub defined: Atom,
    pub body: AtomSet,
}

/// Fluents co-occurring with `p` in every state holding `p`.
pub fn co_occurring(corpus: &Corpus, fluents: &AtomSet) -> BTreeMap<Atom, AtomSet> {
    let mut co: BTreeMap<Atom, AtomSet> = BTreeMap::new();
    for s in corpus.states() {
        let present: AtomSet = s.props.intersection(fluents).cloned().collect();
        for p in &present {
            match co.get_mut(p) {
                Some(acc) => acc.retain(|a| present.contains(a)),
                None => {
                    let mut others = present.clone();
                    others.remove(p);
                    co.insert(p.clone(), others);
                }
            }
        }
    }
    co
}

/// Two stages: keep atoms with a non-empty co-occurrence set, then strip
/// from each body every atom that itself has a definition. Atoms that
/// co-occur with each other both ways are ambiguous and get no definition.
pub fn learn_definitions(corpus: &Corpus, fluents: &AtomSet) -> Vec<DefiningFact> {
    let co: BTreeMap<Atom, AtomSet> = co_occurring(corpus, fluents)
        .into_iter()
        .filter(|(_, body)| !body.is_empty())
        .collect();
    let ambiguous: AtomSet = co
        .iter()
        .filter(|(p, body)| body.iter().any(|q| co.get(q).is_some_and(|other| other.contains(*p))))
        .map(|(p, _)| p.clone())
        .collect();
    if !ambiguous.is_empty() {
        let names: Vec<String> = ambiguous.iter().map(|a| a.to_string()).collect();
        log::warn!("mutually defining propositions left undefined: {}", names.join(", "));
    }
    co.iter()
        .filter(|(p, _)| !ambiguous.contains(*p))
        .filter_map(|(p, body)| {
            let body: AtomSet = body.iter().filter(|q| !co.contains_key(*q)).cloned().collect();
            (!body.is_empty()).then(|| DefiningFact {
                defined: p.clone(),
                body,
            })
        })
        .collect()
}
