//! The knowledge base: every relation learned from a corpus.
//!
//! The JSON form has sorted keys and sorted canonical-term arrays, so equal
//! knowledge bases always serialize to identical bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::term::{sort_canonical, ActionTerm, Atom, AtomSet};

/// A proposition or an action.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Entity {
    Prop(Atom),
    Action(ActionTerm),
}

impl Entity {
    pub fn as_prop(&self) -> Option<&Atom> {
        match self {
            Entity::Prop(p) => Some(p),
            Entity::Action(_) => None,
        }
    }

    pub fn display_title(&self) -> String {
        match self {
            Entity::Prop(p) => p.display_title(),
            Entity::Action(a) => a.display_title(),
        }
    }
}

impl fmt::Display for Entity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entity::Prop(p) => write!(f, "{p}"),
            Entity::Action(a) => write!(f, "{a}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum KbError {
    #[error("malformed knowledge base: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed knowledge base: {0}")]
    Shape(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeBase {
    pub statics: AtomSet,
    pub fluents: AtomSet,
    pub actions: BTreeSet<ActionTerm>,
    pub precond: BTreeMap<ActionTerm, AtomSet>,
    pub pos_effects: BTreeMap<ActionTerm, AtomSet>,
    pub neg_effects: BTreeMap<ActionTerm, AtomSet>,
    pub goal: AtomSet,
    pub desired_props: AtomSet,
    pub desired_actions: BTreeSet<ActionTerm>,
    pub undesired_props: AtomSet,
    pub undesired_actions: BTreeSet<ActionTerm>,
    pub neutral_props: AtomSet,
    pub neutral_actions: BTreeSet<ActionTerm>,
    /// Unordered pairs, stored once with the structurally smaller atom first.
    pub incompatible: BTreeSet<(Atom, Atom)>,
    pub incompatible_prop_action: BTreeSet<(Atom, ActionTerm)>,
    pub prevents: BTreeSet<(Entity, Entity)>,
    pub must_precede: BTreeSet<(Atom, Atom)>,
    pub mandatory: AtomSet,
    pub defining: BTreeMap<Atom, AtomSet>,
}

static EMPTY: AtomSet = AtomSet::new();

/// Orders an unordered pair for storage in [`KnowledgeBase::incompatible`].
pub fn unordered(p: Atom, q: Atom) -> (Atom, Atom) {
    if p <= q {
        (p, q)
    } else {
        (q, p)
    }
}

impl KnowledgeBase {
    pub fn precond_of(&self, a: &ActionTerm) -> &AtomSet {
        self.precond.get(a).unwrap_or(&EMPTY)
    }

    pub fn pos_of(&self, a: &ActionTerm) -> &AtomSet {
        self.pos_effects.get(a).unwrap_or(&EMPTY)
    }

    pub fn neg_of(&self, a: &ActionTerm) -> &AtomSet {
        self.neg_effects.get(a).unwrap_or(&EMPTY)
    }

    pub fn are_incompatible(&self, p: &Atom, q: &Atom) -> bool {
        let key = if p <= q {
            (p.clone(), q.clone())
        } else {
            (q.clone(), p.clone())
        };
        self.incompatible.contains(&key)
    }

    /// Proposition-to-proposition prevention pairs.
    pub fn prop_prevents(&self) -> impl Iterator<Item = (&Atom, &Atom)> {
        self.prevents
            .iter()
            .filter_map(|(a, b)| Some((a.as_prop()?, b.as_prop()?)))
    }

    pub fn prop_prevents_contains(&self, p: &Atom, q: &Atom) -> bool {
        self.prevents
            .contains(&(Entity::Prop(p.clone()), Entity::Prop(q.clone())))
    }

    /// Every atom mentioned anywhere in the learned models.
    pub fn observed_atoms(&self) -> AtomSet {
        self.statics.union(&self.fluents).cloned().collect()
    }

    pub fn to_json_value(&self) -> Value {
        fn atoms(s: &AtomSet) -> Value {
            json!(sort_canonical(s))
        }
        fn acts(s: &BTreeSet<ActionTerm>) -> Value {
            json!(sort_canonical(s))
        }
        fn model(m: &BTreeMap<ActionTerm, AtomSet>) -> Value {
            Value::Object(
                m.iter()
                    .map(|(a, s)| (a.to_string(), json!(sort_canonical(s))))
                    .collect(),
            )
        }
        fn pairs<A: fmt::Display, B: fmt::Display>(it: impl Iterator<Item = (A, B)>) -> Value {
            let mut v: Vec<[String; 2]> = it.map(|(a, b)| [a.to_string(), b.to_string()]).collect();
            v.sort();
            json!(v)
        }
        fn entity(e: &Entity) -> Value {
            serde_json::to_value(e).expect("entity serializes")
        }

        let mut incompatible: Vec<[String; 2]> = self
            .incompatible
            .iter()
            .map(|(a, b)| {
                let (a, b) = (a.to_string(), b.to_string());
                if a <= b {
                    [a, b]
                } else {
                    [b, a]
                }
            })
            .collect();
        incompatible.sort();
        let mut prevents: Vec<(String, Value)> = self
            .prevents
            .iter()
            .map(|(a, b)| {
                let v = json!([entity(a), entity(b)]);
                (v.to_string(), v)
            })
            .collect();
        prevents.sort_by(|x, y| x.0.cmp(&y.0));

        let mut map = Map::new();
        map.insert("actions".into(), acts(&self.actions));
        map.insert(
            "defining".into(),
            Value::Object(
                self.defining
                    .iter()
                    .map(|(p, body)| (p.to_string(), atoms(body)))
                    .collect(),
            ),
        );
        map.insert("desired_actions".into(), acts(&self.desired_actions));
        map.insert("desired_props".into(), atoms(&self.desired_props));
        map.insert("fluents".into(), atoms(&self.fluents));
        map.insert("goal".into(), atoms(&self.goal));
        map.insert("incompatible".into(), json!(incompatible));
        map.insert(
            "incompatible_prop_action".into(),
            pairs(self.incompatible_prop_action.iter().map(|(p, a)| (p, a))),
        );
        map.insert("mandatory".into(), atoms(&self.mandatory));
        map.insert("mandatory_verified".into(), Value::Bool(false));
        map.insert(
            "must_precede".into(),
            pairs(self.must_precede.iter().map(|(p, q)| (p, q))),
        );
        map.insert("neg_effects".into(), model(&self.neg_effects));
        map.insert("neutral_actions".into(), acts(&self.neutral_actions));
        map.insert("neutral_props".into(), atoms(&self.neutral_props));
        map.insert("pos_effects".into(), model(&self.pos_effects));
        map.insert("precond".into(), model(&self.precond));
        map.insert(
            "prevents".into(),
            Value::Array(prevents.into_iter().map(|(_, v)| v).collect()),
        );
        map.insert("statics".into(), atoms(&self.statics));
        map.insert("undesired_actions".into(), acts(&self.undesired_actions));
        map.insert("undesired_props".into(), atoms(&self.undesired_props));
        Value::Object(map)
    }

    /// Pretty JSON with sorted keys, terminated by a newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json_value()).expect("kb serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, KbError> {
        let raw: RawKb = serde_json::from_str(text)?;
        let pair_atoms = |v: Vec<[Atom; 2]>| -> BTreeSet<(Atom, Atom)> { v.into_iter().map(|[a, b]| (a, b)).collect() };
        let kb = KnowledgeBase {
            statics: raw.statics,
            fluents: raw.fluents,
            actions: raw.actions,
            precond: raw.precond,
            pos_effects: raw.pos_effects,
            neg_effects: raw.neg_effects,
            goal: raw.goal,
            desired_props: raw.desired_props,
            desired_actions: raw.desired_actions,
            undesired_props: raw.undesired_props,
            undesired_actions: raw.undesired_actions,
            neutral_props: raw.neutral_props,
            neutral_actions: raw.neutral_actions,
            incompatible: raw.incompatible.into_iter().map(|[a, b]| unordered(a, b)).collect(),
            incompatible_prop_action: raw.incompatible_prop_action.into_iter().collect(),
            prevents: raw.prevents.into_iter().collect(),
            must_precede: pair_atoms(raw.must_precede),
            mandatory: raw.mandatory,
            defining: raw.defining,
        };
        for a in kb.precond.keys().chain(kb.pos_effects.keys()) {
            if !kb.actions.contains(a) {
                return Err(KbError::Shape(format!("model for unlisted action `{a}`")));
            }
        }
        Ok(kb)
    }
}

#[derive(Deserialize)]
struct RawKb {
    #[serde(default)]
    statics: AtomSet,
    #[serde(default)]
    fluents: AtomSet,
    #[serde(default)]
    actions: BTreeSet<ActionTerm>,
    #[serde(default)]
    precond: BTreeMap<ActionTerm, AtomSet>,
    #[serde(default)]
    pos_effects: BTreeMap<ActionTerm, AtomSet>,
    #[serde(default)]
    neg_effects: BTreeMap<ActionTerm, AtomSet>,
    #[serde(default)]
    goal: AtomSet,
    #[serde(default)]
    desired_props: AtomSet,
    #[serde(default)]
    desired_actions: BTreeSet<ActionTerm>,
    #[serde(default)]
    undesired_props: AtomSet,
    #[serde(default)]
    undesired_actions: BTreeSet<ActionTerm>,
    #[serde(default)]
    neutral_props: AtomSet,
    #[serde(default)]
    neutral_actions: BTreeSet<ActionTerm>,
    #[serde(default)]
    incompatible: Vec<[Atom; 2]>,
    #[serde(default)]
    incompatible_prop_action: Vec<(Atom, ActionTerm)>,
    #[serde(default)]
    prevents: Vec<(Entity, Entity)>,
    #[serde(default)]
    must_precede: Vec<[Atom; 2]>,
    #[serde(default)]
    mandatory: AtomSet,
    #[serde(default)]
    defining: BTreeMap<Atom, AtomSet>,
    #[allow(dead_code)]
    #[serde(default)]
    mandatory_verified: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(s: &str) -> Atom {
        Atom::parse(s).unwrap()
    }

    #[test]
    fn empty_kb_round_trips() {
        let kb = KnowledgeBase::default();
        let text = kb.to_json();
        assert!(text.contains("\"prevents\": []"));
        assert!(text.contains("\"mandatory_verified\": false"));
        assert_eq!(KnowledgeBase::from_json(&text).unwrap(), kb);
    }

    #[test]
    fn populated_kb_round_trips_with_sorted_output() {
        let mut kb = KnowledgeBase::default();
        let act = ActionTerm::parse("spoil").unwrap();
        kb.fluents = ["q", "g", "free"].iter().map(|s| atom(s)).collect();
        kb.actions.insert(act.clone());
        kb.precond.insert(act.clone(), [atom("free")].into());
        kb.pos_effects.insert(act.clone(), [atom("q")].into());
        kb.incompatible.insert(unordered(atom("q"), atom("free")));
        kb.prevents.insert((Entity::Prop(atom("q")), Entity::Prop(atom("g"))));
        kb.prevents
            .insert((Entity::Action(act.clone()), Entity::Prop(atom("g"))));
        kb.defining
            .insert(atom("s([a,b])"), [atom("f(g(a))"), atom("f(g,b)")].into());
        let text = kb.to_json();
        assert!(text.find("\"f(g(a))\"").unwrap() < text.find("\"f(g,b)\"").unwrap());
        let back = KnowledgeBase::from_json(&text).unwrap();
        assert_eq!(back, kb);
        assert_eq!(back.to_json(), text);
        assert!(back.are_incompatible(&atom("free"), &atom("q")));
        assert!(back.prop_prevents_contains(&atom("q"), &atom("g")));
        assert_eq!(back.prop_prevents().count(), 1);
    }

    #[test]
    fn rejects_model_for_unknown_action() {
        let text = r#"{"precond":{"go":["x"]}}"#;
        assert!(matches!(KnowledgeBase::from_json(text), Err(KbError::Shape(_))));
    }
}
