//! Behaviour traces: states, instances, corpora and the corpus file format.
//!
//! A corpus file is compact UTF-8 JSON:
//!
//! ```text
//! {"class":"bw","instances":[{"id":"t1","states":[["on(a,p1)"],["on(a,p2)"]],"actions":["move(a,p1,p2)"]}]}
//! ```
//!
//! Instances that are incomplete behaviours carry `"fragment":true`; the key
//! is omitted otherwise.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::term::{ActionTerm, Atom, AtomSet, TermError};

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("corpus syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("instance `{instance}`, {location}: {source}")]
    Term {
        instance: String,
        location: String,
        #[source]
        source: TermError,
    },
    #[error("instance `{instance}` has no states")]
    NoStates { instance: String },
    #[error("instance `{instance}` has {states} states but {actions} actions")]
    LengthMismatch {
        instance: String,
        states: usize,
        actions: usize,
    },
    #[error("instance `{instance}`, state {state}: duplicate atom `{atom}`")]
    DuplicateAtom {
        instance: String,
        state: usize,
        atom: String,
    },
    #[error("duplicate instance id `{0}`")]
    DuplicateInstance(String),
}

/// One observed state: a set of positive ground atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct State {
    pub index: usize,
    pub props: AtomSet,
}

impl State {
    pub fn holds(&self, atom: &Atom) -> bool {
        self.props.contains(atom)
    }
}

/// A recorded behaviour: `states.len() == actions.len() + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BehaviorInstance {
    id: String,
    states: Vec<State>,
    actions: Vec<ActionTerm>,
    fragment: bool,
}

/// `(pre-state, action, post-state)`.
pub type Transition<'a> = (&'a State, &'a ActionTerm, &'a State);

impl BehaviorInstance {
    pub fn new(id: impl Into<String>, states: Vec<AtomSet>, actions: Vec<ActionTerm>) -> Result<Self, TraceError> {
        let id = id.into();
        if states.is_empty() {
            return Err(TraceError::NoStates { instance: id });
        }
        if actions.len() + 1 != states.len() {
            return Err(TraceError::LengthMismatch {
                instance: id,
                states: states.len(),
                actions: actions.len(),
            });
        }
        let states = states
            .into_iter()
            .enumerate()
            .map(|(index, props)| State { index, props })
            .collect();
        Ok(BehaviorInstance {
            id,
            states,
            actions,
            fragment: false,
        })
    }

    /// Marks the instance as an incomplete behaviour, excluded from goal learning.
    pub fn into_fragment(mut self) -> Self {
        self.fragment = true;
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn state(&self, index: usize) -> &State {
        &self.states[index]
    }

    pub fn actions(&self) -> &[ActionTerm] {
        &self.actions
    }

    pub fn is_fragment(&self) -> bool {
        self.fragment
    }

    pub fn initial(&self) -> &State {
        &self.states[0]
    }

    pub fn last(&self) -> &State {
        self.states.last().expect("instances are non-empty")
    }

    /// Number of actions.
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Index of the first state holding `atom`.
    pub fn first_occurrence(&self, atom: &Atom) -> Option<usize> {
        self.states.iter().position(|s| s.holds(atom))
    }

    pub fn occurs(&self, atom: &Atom) -> bool {
        self.first_occurrence(atom).is_some()
    }
}

/// The `NextState` triples of an instance, in order.
pub fn transitions(instance: &BehaviorInstance) -> Vec<Transition<'_>> {
    instance
        .actions
        .iter()
        .enumerate()
        .map(|(i, a)| (&instance.states[i], a, &instance.states[i + 1]))
        .collect()
}

/// A set of behaviour instances sharing one purpose.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    class_id: String,
    instances: Vec<BehaviorInstance>,
}

impl Corpus {
    pub fn new(class_id: impl Into<String>, instances: Vec<BehaviorInstance>) -> Result<Self, TraceError> {
        let mut seen = BTreeSet::new();
        for inst in &instances {
            if !seen.insert(inst.id.as_str()) {
                return Err(TraceError::DuplicateInstance(inst.id.clone()));
            }
        }
        Ok(Corpus {
            class_id: class_id.into(),
            instances,
        })
    }

    pub fn class_id(&self) -> &str {
        &self.class_id
    }

    pub fn instances(&self) -> &[BehaviorInstance] {
        &self.instances
    }

    pub fn instance(&self, id: &str) -> Option<&BehaviorInstance> {
        self.instances.iter().find(|i| i.id == id)
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn states(&self) -> impl Iterator<Item = &State> {
        self.instances.iter().flat_map(|i| i.states.iter())
    }

    pub fn transitions(&self) -> impl Iterator<Item = Transition<'_>> {
        self.instances.iter().flat_map(transitions)
    }

    /// Every atom observed in any state.
    pub fn observed_atoms(&self) -> AtomSet {
        self.states().flat_map(|s| s.props.iter().cloned()).collect()
    }

    pub fn observed_actions(&self) -> BTreeSet<ActionTerm> {
        self.instances.iter().flat_map(|i| i.actions.iter().cloned()).collect()
    }

    /// Length (number of actions) of the longest instance.
    pub fn max_instance_len(&self) -> usize {
        self.instances.iter().map(|i| i.len()).max().unwrap_or(0)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CorpusFile {
    class: String,
    instances: Vec<InstanceFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    id: String,
    states: Vec<Vec<String>>,
    actions: Vec<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    fragment: bool,
}

pub fn parse_corpus(text: &str) -> Result<Corpus, TraceError> {
    let file: CorpusFile = serde_json::from_str(text).map_err(|e| TraceError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut instances = Vec::with_capacity(file.instances.len());
    for inst in file.instances {
        let mut states = Vec::with_capacity(inst.states.len());
        for (si, raw) in inst.states.iter().enumerate() {
            let mut props = AtomSet::new();
            for text in raw {
                let atom = Atom::parse(text).map_err(|source| TraceError::Term {
                    instance: inst.id.clone(),
                    location: format!("state {si}"),
                    source,
                })?;
                if !props.insert(atom) {
                    return Err(TraceError::DuplicateAtom {
                        instance: inst.id.clone(),
                        state: si,
                        atom: text.clone(),
                    });
                }
            }
            states.push(props);
        }
        let actions = inst
            .actions
            .iter()
            .enumerate()
            .map(|(ai, text)| {
                ActionTerm::parse(text).map_err(|source| TraceError::Term {
                    instance: inst.id.clone(),
                    location: format!("action {ai}"),
                    source,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut instance = BehaviorInstance::new(inst.id, states, actions)?;
        if inst.fragment {
            instance = instance.into_fragment();
        }
        instances.push(instance);
    }
    Corpus::new(file.class, instances)
}

/// Compact, byte-deterministic serialization: props sorted by canonical text.
pub fn serialize_corpus(corpus: &Corpus) -> String {
    let file = CorpusFile {
        class: corpus.class_id.clone(),
        instances: corpus
            .instances
            .iter()
            .map(|inst| InstanceFile {
                id: inst.id.clone(),
                states: inst
                    .states
                    .iter()
                    .map(|s| crate::term::sort_canonical(&s.props))
                    .collect(),
                actions: inst.actions.iter().map(|a| a.to_string()).collect(),
                fragment: inst.fragment,
            })
            .collect(),
    };
    serde_json::to_string(&file).expect("corpus serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MINIMAL: &str =
        r#"{"class":"bw","instances":[{"id":"t1","states":[["on(a,p1)"],["on(a,p2)"]],"actions":["move(a,p1,p2)"]}]}"#;

    #[test]
    fn parses_minimal_file() {
        let c = parse_corpus(MINIMAL).unwrap();
        assert_eq!(c.class_id(), "bw");
        assert_eq!(c.instances().len(), 1);
        assert_eq!(c.instances()[0].states().len(), 2);
        assert_eq!(serialize_corpus(&c), MINIMAL);
    }

    #[test]
    fn rejects_length_mismatch() {
        let text = MINIMAL.replace(r#"[["on(a,p1)"],["on(a,p2)"]]"#, r#"[["on(a,p1)"]]"#);
        match parse_corpus(&text) {
            Err(TraceError::LengthMismatch { instance, .. }) => assert_eq!(instance, "t1"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_uppercase_atom() {
        let text = MINIMAL.replace("on(a,p1)", "On(A,B)");
        assert!(matches!(parse_corpus(&text), Err(TraceError::Term { .. })));
    }

    #[test]
    fn rejects_duplicates_and_bad_json() {
        let text = MINIMAL.replace(r#"["on(a,p1)"]"#, r#"["on(a,p1)","on(a,p1)"]"#);
        assert!(matches!(parse_corpus(&text), Err(TraceError::DuplicateAtom { .. })));
        let text = MINIMAL.replace(r#"]}]}"#, r#"]},{"id":"t1","states":[[]],"actions":[]}]}"#);
        assert!(matches!(parse_corpus(&text), Err(TraceError::DuplicateInstance(_))));
        match parse_corpus("{\"class\":\"bw\",\n\"instances\":[}") {
            Err(TraceError::Syntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_corpus_serializes_exactly() {
        let c = Corpus::new("bw", vec![]).unwrap();
        assert_eq!(serialize_corpus(&c), r#"{"class":"bw","instances":[]}"#);
    }

    #[test]
    fn fragment_flag_round_trips() {
        let inst = BehaviorInstance::new("f", vec![AtomSet::new()], vec![])
            .unwrap()
            .into_fragment();
        let c = Corpus::new("m", vec![inst]).unwrap();
        let text = serialize_corpus(&c);
        assert!(text.contains(r#""fragment":true"#));
        assert_eq!(parse_corpus(&text).unwrap(), c);
    }

    #[test]
    fn transitions_of_single_state_instance_are_empty() {
        let inst = BehaviorInstance::new("x", vec![AtomSet::new()], vec![]).unwrap();
        assert!(transitions(&inst).is_empty());
    }

    fn arb_instance(id: usize) -> impl Strategy<Value = BehaviorInstance> {
        let atom = "[a-z][a-z0-9]{0,2}(\\([a-z][0-9]?(,[a-z][0-9]?)?\\))?".prop_map(|s| Atom::parse(&s).unwrap());
        let state = prop::collection::btree_set(atom, 0..4);
        (1usize..5)
            .prop_flat_map(move |n| {
                (
                    prop::collection::vec(state.clone(), n),
                    prop::collection::vec("[a-z]{1,3}\\([a-z]\\)", n - 1),
                )
            })
            .prop_map(move |(states, acts)| {
                let acts = acts.iter().map(|a| ActionTerm::parse(a).unwrap()).collect();
                BehaviorInstance::new(format!("i{id}"), states, acts).unwrap()
            })
    }

    proptest! {
        #[test]
        fn corpus_round_trip_and_determinism(
            a in arb_instance(0), b in arb_instance(1), frag in any::<bool>()
        ) {
            let b = if frag { b.into_fragment() } else { b };
            let c = Corpus::new("k", vec![a, b]).unwrap();
            let text = serialize_corpus(&c);
            let back = parse_corpus(&text).unwrap();
            prop_assert_eq!(&back, &c);
            prop_assert_eq!(serialize_corpus(&back), text);
            for inst in c.instances() {
                let ts = transitions(inst);
                prop_assert_eq!(ts.len(), inst.actions().len());
                for (i, (s1, a, s2)) in ts.iter().enumerate() {
                    prop_assert_eq!(s1.index, i);
                    prop_assert_eq!(s2.index, i + 1);
                    prop_assert_eq!(*a, &inst.actions()[i]);
                }
            }
        }
    }
}
