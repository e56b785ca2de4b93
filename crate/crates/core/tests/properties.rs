//! Learner and engine invariants on random small corpora, each checked
//! against a brute-force oracle.

use std::collections::{BTreeSet, VecDeque};

use proptest::prelude::*;

use although_core::attitudes::{learn_incompatible_props, learn_prevents_props, prevents_stage1};
use although_core::base::classify_propositions;
use although_core::deontic::{assess, is_fulfilled, Degree, IdealityPrinciple};
use although_core::pipeline::{learn_kb, LearnOptions};
use although_core::planner::{apply, bounded_reach};
use although_core::{ActionTerm, Atom, AtomSet, BehaviorInstance, Corpus, Entity, KnowledgeBase};

const UNIVERSE: usize = 5;

fn u(i: usize) -> Atom {
    Atom::constant(format!("u{i}"))
}

fn state(mask: u8) -> AtomSet {
    (0..UNIVERSE).filter(|i| mask & (1 << i) != 0).map(u).collect()
}

fn arb_instance() -> impl Strategy<Value = (Vec<u8>, Vec<u8>)> {
    (1usize..6).prop_flat_map(|n| (prop::collection::vec(0u8..32, n), prop::collection::vec(0u8..3, n - 1)))
}

fn arb_corpus() -> impl Strategy<Value = Corpus> {
    prop::collection::vec(arb_instance(), 1..6).prop_map(|raw| {
        let instances = raw
            .into_iter()
            .enumerate()
            .map(|(i, (states, actions))| {
                BehaviorInstance::new(
                    format!("i{i}"),
                    states.into_iter().map(state).collect(),
                    actions
                        .into_iter()
                        .map(|a| ActionTerm::new(Atom::constant(format!("x{a}"))))
                        .collect(),
                )
                .expect("lengths agree")
            })
            .collect();
        Corpus::new("rand", instances).expect("unique ids")
    })
}

fn all_states(c: &Corpus) -> Vec<&AtomSet> {
    c.instances()
        .iter()
        .flat_map(|i| i.states().iter().map(|s| &s.props))
        .collect()
}

fn fluents_of(c: &Corpus) -> AtomSet {
    classify_propositions(c).expect("non-empty").1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn incompatibility_matches_pairwise_scan(c in arb_corpus()) {
        let fl = fluents_of(&c);
        let got: BTreeSet<(Atom, Atom)> = learn_incompatible_props(&c, &fl);
        let states = all_states(&c);
        let observed: BTreeSet<&Atom> = states.iter().flat_map(|s| s.iter()).filter(|a| fl.contains(*a)).collect();
        let mut want = BTreeSet::new();
        for p in &observed {
            for q in &observed {
                if p < q && !states.iter().any(|s| s.contains(*p) && s.contains(*q)) {
                    want.insert(((*p).clone(), (*q).clone()));
                }
            }
        }
        prop_assert_eq!(got, want);
    }

    #[test]
    fn stage_one_matches_later_occurrence_scan(c in arb_corpus()) {
        let fl = fluents_of(&c);
        let got = prevents_stage1(&c, &fl);
        let mut want = BTreeSet::new();
        for p1 in &fl {
            for p2 in &fl {
                let later = c.instances().iter().any(|inst| {
                    let st = inst.states();
                    (0..st.len()).any(|i| st[i].holds(p1) && (i + 1..st.len()).any(|j| st[j].holds(p2)))
                });
                if !later {
                    want.insert((p1.clone(), p2.clone()));
                }
            }
        }
        prop_assert_eq!(got, want);
    }

    #[test]
    fn stage_two_only_removes(c in arb_corpus()) {
        let kb = learn_kb(&c, &LearnOptions { plan_bound: None, goal_override: Some(AtomSet::new()) }).unwrap();
        let stage1 = prevents_stage1(&c, &kb.fluents);
        let full = learn_prevents_props(&c, &kb.fluents, &kb, c.max_instance_len());
        prop_assert!(full.is_subset(&stage1));
    }

    #[test]
    fn action_models_are_sound(c in arb_corpus()) {
        let kb = learn_kb(&c, &LearnOptions { plan_bound: None, goal_override: Some(AtomSet::new()) }).unwrap();
        for inst in c.instances() {
            for (i, a) in inst.actions().iter().enumerate() {
                let pre = &inst.state(i).props;
                let post = &inst.state(i + 1).props;
                prop_assert!(kb.precond_of(a).is_subset(pre));
                prop_assert!(kb.pos_of(a).iter().all(|q| post.contains(q) && !pre.contains(q)));
                prop_assert!(kb.neg_of(a).iter().all(|q| pre.contains(q) && !post.contains(q)));
            }
        }
    }

    #[test]
    fn attitudes_partition_and_close(c in arb_corpus(), goal_mask in 0u8..32) {
        let goal: AtomSet = state(goal_mask).into_iter().collect();
        let kb = learn_kb(&c, &LearnOptions { plan_bound: None, goal_override: Some(goal) }).unwrap();
        let classes = [&kb.desired_props, &kb.undesired_props, &kb.neutral_props];
        let union: AtomSet = classes.iter().flat_map(|s| s.iter().cloned()).collect();
        prop_assert_eq!(classes.iter().map(|s| s.len()).sum::<usize>(), union.len());
        prop_assert!(kb.fluents.is_subset(&union));
        let classes = [&kb.desired_actions, &kb.undesired_actions, &kb.neutral_actions];
        let union: BTreeSet<ActionTerm> = classes.iter().flat_map(|s| s.iter().cloned()).collect();
        prop_assert_eq!(classes.iter().map(|s| s.len()).sum::<usize>(), union.len());
        prop_assert_eq!(&union, &kb.actions);
        for (p, e) in &kb.prevents {
            let desired = match e {
                Entity::Prop(q) => kb.desired_props.contains(q),
                Entity::Action(a) => kb.desired_actions.contains(a),
            };
            if let (Entity::Prop(p), true) = (p, desired) {
                prop_assert!(kb.undesired_props.contains(p) || kb.desired_props.contains(p));
            }
        }
    }

    #[test]
    fn assessment_is_total_and_sound(c in arb_corpus(), pick in 0usize..UNIVERSE, other in 0usize..UNIVERSE) {
        let kb = learn_kb(&c, &LearnOptions { plan_bound: None, goal_override: Some(AtomSet::new()) }).unwrap();
        let (p, q) = (u(pick), u(other));
        prop_assume!(kb.fluents.contains(&p) && kb.fluents.contains(&q));
        let principles = [
            IdealityPrinciple::Desired(p.clone()),
            IdealityPrinciple::Mandatory(p.clone()),
            IdealityPrinciple::Undesired(p.clone()),
            IdealityPrinciple::MustPrecede(p.clone(), q.clone()),
        ];
        for inst in c.instances() {
            for pr in &principles {
                for s in 0..inst.states().len() {
                    let fact = assess(pr, inst, s, &kb).unwrap();
                    prop_assert_eq!(fact.degree == Degree::Fulfilled, is_fulfilled(pr, inst, s));
                    for tag in &fact.certificate {
                        prop_assert!(tag.is_true(inst, &kb), "{} at s{}: {}", pr, s, tag);
                    }
                }
            }
        }
    }

    #[test]
    fn reach_is_shortest(c in arb_corpus(), start_mask in 0u8..32, pick in 0usize..UNIVERSE, bound in 0usize..4) {
        let kb = learn_kb(&c, &LearnOptions { plan_bound: None, goal_override: Some(AtomSet::new()) }).unwrap();
        let start = state(start_mask);
        let target = u(pick);
        let got = bounded_reach(&start, &target, &kb, bound);
        prop_assert_eq!(got.as_ref().map(|p| p.len()), bfs(&kb, &start, &target, bound));
        if let Some(plan) = got {
            let mut cur = start.clone();
            for a in &plan {
                cur = apply(&kb, &cur, a).expect("applicable");
            }
            prop_assert!(cur.contains(&target));
        }
    }
}

fn bfs(kb: &KnowledgeBase, start: &AtomSet, target: &Atom, bound: usize) -> Option<usize> {
    let mut seen = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start.clone(), 0usize)]);
    while let Some((s, d)) = queue.pop_front() {
        if s.contains(target) {
            return Some(d);
        }
        if d == bound {
            continue;
        }
        for a in &kb.actions {
            if !kb.precond_of(a).is_subset(&s) {
                continue;
            }
            let mut t: AtomSet = s.difference(kb.neg_of(a)).cloned().collect();
            t.extend(kb.pos_of(a).iter().cloned());
            if seen.insert(t.clone()) {
                queue.push_back((t, d + 1));
            }
        }
    }
    None
}
