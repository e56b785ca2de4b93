//! The full learning pipeline, principle configuration and KB reports.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attitudes::{
    derive_incompatible_prop_action, derive_neutral, derive_prevents_mixed, derive_undesired_actions,
    derive_undesired_props, learn_desired_actions, learn_incompatible_props, learn_prevents_props,
};
use crate::base::{
    classify_propositions, learn_desired_props, learn_effects, learn_goal, learn_mandatory, learn_must_precede,
    learn_preconditions, LearnError,
};
use crate::defining::learn_definitions;
use crate::deontic::{IdealityPrinciple, PrincipleOrder};
use crate::kb::{Entity, KnowledgeBase};
use crate::term::{sort_canonical, AtomSet};
use crate::trace::Corpus;

#[derive(Debug, Clone, Default)]
pub struct LearnOptions {
    /// Plan length bound for prevention stage two; defaults to the longest instance.
    pub plan_bound: Option<usize>,
    /// Replaces the learned goal.
    pub goal_override: Option<AtomSet>,
}

pub fn learn_kb(corpus: &Corpus, opts: &LearnOptions) -> Result<KnowledgeBase, LearnError> {
    let (statics, fluents) = classify_propositions(corpus)?;
    let mut kb = KnowledgeBase {
        actions: corpus.observed_actions(),
        precond: learn_preconditions(corpus, &fluents),
        ..Default::default()
    };
    let (pos, neg) = learn_effects(corpus);
    kb.pos_effects = pos;
    kb.neg_effects = neg;
    kb.goal = match &opts.goal_override {
        Some(g) => g.clone(),
        None => learn_goal(corpus, &statics)?,
    };
    kb.desired_props = learn_desired_props(&kb.goal);
    kb.incompatible = learn_incompatible_props(corpus, &fluents);
    kb.incompatible_prop_action = derive_incompatible_prop_action(&kb);

    let bound = opts.plan_bound.unwrap_or_else(|| corpus.max_instance_len());
    kb.statics = statics;
    kb.fluents = fluents;
    kb.prevents = learn_prevents_props(corpus, &kb.fluents, &kb, bound)
        .into_iter()
        .map(|(p, q)| (Entity::Prop(p), Entity::Prop(q)))
        .collect();

    let desired_props: BTreeSet<Entity> = kb.desired_props.iter().cloned().map(Entity::Prop).collect();
    let preventers = |kb: &KnowledgeBase, desired: &BTreeSet<Entity>| -> AtomSet {
        derive_undesired_props(&kb.prevents, desired)
            .into_iter()
            .filter(|p| !kb.desired_props.contains(p))
            .collect()
    };
    kb.undesired_props = preventers(&kb, &desired_props);
    kb.desired_actions = learn_desired_actions(&kb, &kb.undesired_props);
    let mixed = derive_prevents_mixed(&kb);
    kb.prevents.extend(mixed);

    // Desired actions and undesired props depend on each other. Growing the
    // undesired set until it is closed terminates and keeps the axiom closure.
    loop {
        let mut desired = desired_props.clone();
        desired.extend(kb.desired_actions.iter().cloned().map(Entity::Action));
        let found = preventers(&kb, &desired);
        if found.is_subset(&kb.undesired_props) {
            break;
        }
        kb.undesired_props.extend(found);
        kb.desired_actions = learn_desired_actions(&kb, &kb.undesired_props);
    }
    kb.undesired_actions = derive_undesired_actions(&kb);
    let (neutral_props, neutral_actions) = derive_neutral(&kb);
    kb.neutral_props = neutral_props;
    kb.neutral_actions = neutral_actions;

    kb.must_precede = learn_must_precede(corpus, &kb.fluents, &kb.precond);
    kb.mandatory = learn_mandatory(corpus, &kb.goal, &kb.fluents);
    kb.defining = learn_definitions(corpus, &kb.fluents)
        .into_iter()
        .map(|f| (f.defined, f.body))
        .collect();
    Ok(kb)
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("malformed principles file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed principles file: {0}")]
    Principle(#[from] crate::deontic::DeonticError),
    #[error("ranked principle `{0}` is not listed in \"principles\"")]
    UnlistedRank(String),
}

/// Configured ideality principles and their importance ranks.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrinciplesConfig {
    pub principles: Vec<IdealityPrinciple>,
    pub ranks: BTreeMap<IdealityPrinciple, i64>,
}

#[derive(Serialize, Deserialize)]
struct PrinciplesFile {
    principles: Vec<String>,
    #[serde(default)]
    ranks: BTreeMap<String, i64>,
}

impl PrinciplesConfig {
    pub fn new(principles: Vec<IdealityPrinciple>) -> Self {
        PrinciplesConfig {
            principles,
            ranks: BTreeMap::new(),
        }
    }

    /// Desired tower atoms plus `MustPrecede(on(b,c), on(a,b))`.
    pub fn blocks_default() -> Self {
        let p = |s| IdealityPrinciple::parse(s).expect("valid principle");
        PrinciplesConfig::new(vec![
            p("desired(on(a,b))"),
            p("desired(on(b,c))"),
            p("desired(clear(a))"),
            p("must_precede(on(b,c),on(a,b))"),
        ])
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let raw: PrinciplesFile = serde_json::from_str(text)?;
        let principles = raw
            .principles
            .iter()
            .map(|t| IdealityPrinciple::parse(t))
            .collect::<Result<Vec<_>, _>>()?;
        let mut ranks = BTreeMap::new();
        for (t, r) in raw.ranks {
            let pr = IdealityPrinciple::parse(&t)?;
            if !principles.contains(&pr) {
                return Err(ConfigError::UnlistedRank(t));
            }
            ranks.insert(pr, r);
        }
        Ok(PrinciplesConfig { principles, ranks })
    }

    pub fn to_json(&self) -> String {
        let file = PrinciplesFile {
            principles: self.principles.iter().map(|p| p.to_string()).collect(),
            ranks: self.ranks.iter().map(|(p, r)| (p.to_string(), *r)).collect(),
        };
        serde_json::to_string_pretty(&file).expect("config serializes") + "\n"
    }

    pub fn order(&self) -> PrincipleOrder {
        PrincipleOrder {
            ranks: self.ranks.clone(),
        }
    }

    /// Adds learned precedence, desired, mandatory and undesired principles.
    pub fn extend_from_kb(&mut self, kb: &KnowledgeBase) {
        let learned = kb
            .must_precede
            .iter()
            .map(|(a, b)| IdealityPrinciple::MustPrecede(a.clone(), b.clone()))
            .chain(kb.desired_props.iter().cloned().map(IdealityPrinciple::Desired))
            .chain(kb.mandatory.iter().cloned().map(IdealityPrinciple::Mandatory))
            .chain(kb.undesired_props.iter().cloned().map(IdealityPrinciple::Undesired));
        for pr in learned {
            if !self.principles.contains(&pr) {
                self.principles.push(pr);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
}

fn section(out: &mut String, title: &str, items: Vec<String>) {
    out.push_str(&format!("{title} ({})\n", items.len()));
    if items.is_empty() {
        out.push_str("  (none)\n");
    }
    for item in items {
        out.push_str(&format!("  {item}\n"));
    }
}

fn titled<'a, I, T>(items: I, f: impl Fn(&T) -> String) -> Vec<String>
where
    I: IntoIterator<Item = &'a T>,
    T: 'a + std::fmt::Display,
{
    let mut keyed: Vec<(String, String)> = items.into_iter().map(|x| (x.to_string(), f(x))).collect();
    keyed.sort();
    keyed.into_iter().map(|(_, t)| t).collect()
}

/// Human-readable summary of a knowledge base, one section per relation.
pub fn render_report(kb: &KnowledgeBase, format: ReportFormat) -> String {
    if format == ReportFormat::Json {
        return kb.to_json();
    }
    let mut out = String::new();
    let atoms = |s: &AtomSet| titled(s, |a: &crate::term::Atom| a.display_title());
    let acts = |s: &BTreeSet<crate::term::ActionTerm>| titled(s, |a: &crate::term::ActionTerm| a.display_title());
    section(&mut out, "Static propositions", atoms(&kb.statics));
    section(&mut out, "Goal", atoms(&kb.goal));
    section(&mut out, "Desired propositions", atoms(&kb.desired_props));
    section(&mut out, "Desired actions", acts(&kb.desired_actions));
    section(&mut out, "Undesired propositions", atoms(&kb.undesired_props));
    section(&mut out, "Undesired actions", acts(&kb.undesired_actions));
    section(&mut out, "Neutral propositions", atoms(&kb.neutral_props));
    section(&mut out, "Neutral actions", acts(&kb.neutral_actions));
    let mut inc: Vec<(String, String)> = kb
        .incompatible
        .iter()
        .map(|(a, b)| {
            let key = sort_canonical([a, b]).join(",");
            (key, format!("({}, {})", a.display_title(), b.display_title()))
        })
        .collect();
    inc.sort();
    section(
        &mut out,
        "Incompatible propositions",
        inc.into_iter().map(|x| x.1).collect(),
    );
    let mut prev: Vec<(String, String)> = kb
        .prevents
        .iter()
        .map(|(a, b)| {
            (
                format!("{a},{b}"),
                format!("Prevents({}, {})", a.display_title(), b.display_title()),
            )
        })
        .collect();
    prev.sort();
    section(&mut out, "Prevents", prev.into_iter().map(|x| x.1).collect());
    let mut mp: Vec<(String, String)> = kb
        .must_precede
        .iter()
        .map(|(a, b)| {
            (
                format!("{a},{b}"),
                format!("MustPrecede({}, {})", a.display_title(), b.display_title()),
            )
        })
        .collect();
    mp.sort();
    section(&mut out, "Must precede", mp.into_iter().map(|x| x.1).collect());
    section(
        &mut out,
        "Mandatory (occurrence only, not plan-verified)",
        atoms(&kb.mandatory),
    );
    let defs = kb
        .defining
        .iter()
        .map(|(p, body)| {
            (
                p.to_string(),
                format!("Defining({}, {{{}}})", p.display_title(), atoms(body).join(", ")),
            )
        })
        .collect::<BTreeMap<_, _>>();
    section(&mut out, "Defining", defs.into_values().collect());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocksworld::micro_domain_corpus;
    use crate::term::{ActionTerm, Atom};

    fn atom(s: &str) -> Atom {
        Atom::parse(s).unwrap()
    }

    #[test]
    fn micro_pipeline_derives_undesired() {
        let opts = LearnOptions {
            goal_override: Some([atom("g")].into()),
            ..Default::default()
        };
        let kb = learn_kb(&micro_domain_corpus(), &opts).unwrap();
        assert!(kb.prop_prevents_contains(&atom("q"), &atom("g")));
        assert_eq!(kb.undesired_props, [atom("q")].into());
        assert_eq!(kb.undesired_actions, [ActionTerm::parse("spoil").unwrap()].into());
        assert_eq!(kb.desired_actions, [ActionTerm::parse("makeg").unwrap()].into());
        assert_eq!(kb.neutral_props, [atom("free")].into());
    }

    #[test]
    fn principles_file_round_trip() {
        let mut cfg = PrinciplesConfig::blocks_default();
        cfg.ranks.insert(cfg.principles[0].clone(), 5);
        let back = PrinciplesConfig::parse(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.order().rank(&cfg.principles[0]), 5);
        assert_eq!(back.order().rank(&cfg.principles[3]), 2);
        let bad = r#"{"principles":["desired(x)"],"ranks":{"desired(y)":1}}"#;
        assert!(matches!(
            PrinciplesConfig::parse(bad),
            Err(ConfigError::UnlistedRank(_))
        ));
        assert!(PrinciplesConfig::parse(r#"{"principles":["wanted(x)"]}"#).is_err());
    }

    #[test]
    fn empty_report_sections() {
        let text = render_report(&KnowledgeBase::default(), ReportFormat::Text);
        assert!(text.lines().filter(|l| l.trim() == "(none)").count() >= 10);
        assert_eq!(
            render_report(&KnowledgeBase::default(), ReportFormat::Json),
            KnowledgeBase::default().to_json()
        );
    }
}
