//! Bounded breadth-first forward search over learned action models.
//!
//! Actions are tried in canonical text order and nodes are deduplicated on
//! `(props, flag)`, so among the shortest plans the lexicographically
//! smallest one is returned.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use crate::deontic::{is_fulfilled, IdealityPrinciple};
use crate::kb::KnowledgeBase;
use crate::term::{ActionTerm, Atom, AtomSet};
use crate::trace::BehaviorInstance;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchNode {
    pub props: AtomSet,
    pub flags: BTreeMap<IdealityPrinciple, bool>,
    pub depth: usize,
}

impl SearchNode {
    pub fn new(props: AtomSet) -> Self {
        SearchNode {
            props,
            flags: BTreeMap::new(),
            depth: 0,
        }
    }
}

pub fn apply(kb: &KnowledgeBase, props: &AtomSet, a: &ActionTerm) -> Option<AtomSet> {
    if !kb.precond_of(a).is_subset(props) {
        return None;
    }
    let neg = kb.neg_of(a);
    let mut next: AtomSet = props.iter().filter(|p| !neg.contains(*p)).cloned().collect();
    next.extend(kb.pos_of(a).iter().cloned());
    Some(next)
}

fn canonical_actions(kb: &KnowledgeBase) -> Vec<ActionTerm> {
    let mut acts: Vec<ActionTerm> = kb.actions.iter().cloned().collect();
    acts.sort_by_cached_key(|a| a.to_string());
    acts
}

/// Applicable actions in canonical order, with flags advanced per principle.
pub fn successors(node: &SearchNode, kb: &KnowledgeBase) -> Vec<(ActionTerm, SearchNode)> {
    canonical_actions(kb)
        .into_iter()
        .filter_map(|a| {
            let props = apply(kb, &node.props, &a)?;
            let flags = node
                .flags
                .iter()
                .map(|(pr, &f)| (pr.clone(), pr.advance_flag(f, &node.props, &props)))
                .collect();
            Some((
                a,
                SearchNode {
                    props,
                    flags,
                    depth: node.depth + 1,
                },
            ))
        })
        .collect()
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct Bits(Box<[u64]>);

impl Bits {
    fn zeros(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)].into_boxed_slice())
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] & (1 << (i % 64)) != 0
    }
    fn subset_of(&self, other: &Bits) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a & !b == 0)
    }
    fn step(&self, neg: &Bits, pos: &Bits) -> Bits {
        Bits(
            self.0
                .iter()
                .zip(neg.0.iter().zip(pos.0.iter()))
                .map(|(s, (n, p))| (s & !n) | p)
                .collect(),
        )
    }
}

struct CompiledAction {
    term: ActionTerm,
    pre: Bits,
    pos: Bits,
    neg: Bits,
}

/// A knowledge base's action models compiled to bit sets.
pub struct Domain {
    atoms: Vec<Atom>,
    index: HashMap<Atom, usize>,
    actions: Vec<CompiledAction>,
}

impl Domain {
    /// Compiles `kb`, also indexing any `extra` atoms that may occur in start states.
    pub fn new<'a>(kb: &KnowledgeBase, extra: impl IntoIterator<Item = &'a Atom>) -> Self {
        let mut all: AtomSet = kb.observed_atoms();
        for m in [&kb.precond, &kb.pos_effects, &kb.neg_effects] {
            for s in m.values() {
                all.extend(s.iter().cloned());
            }
        }
        all.extend(extra.into_iter().cloned());
        let atoms: Vec<Atom> = all.into_iter().collect();
        let index: HashMap<Atom, usize> = atoms.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
        let n = atoms.len();
        let encode = |s: &AtomSet| {
            let mut b = Bits::zeros(n);
            for a in s {
                b.set(index[a]);
            }
            b
        };
        let actions = canonical_actions(kb)
            .into_iter()
            .map(|a| CompiledAction {
                pre: encode(kb.precond_of(&a)),
                pos: encode(kb.pos_of(&a)),
                neg: encode(kb.neg_of(&a)),
                term: a,
            })
            .collect();
        Domain { atoms, index, actions }
    }

    fn encode(&self, s: &AtomSet) -> Bits {
        let mut b = Bits::zeros(self.atoms.len());
        for a in s {
            b.set(*self.index.get(a).expect("atom indexed by Domain::new"));
        }
        b
    }

    fn decode(&self, b: &Bits) -> AtomSet {
        (0..self.atoms.len())
            .filter(|&i| b.get(i))
            .map(|i| self.atoms[i].clone())
            .collect()
    }

    /// Breadth-first search for the first edge satisfying `goal`. The goal
    /// sees the action index, the child state and the child flag.
    fn search(
        &self,
        start: Bits,
        start_flag: bool,
        bound: usize,
        advance: impl Fn(bool, &Bits, &Bits) -> bool,
        goal: impl Fn(usize, &Bits, bool) -> bool,
    ) -> Option<Vec<ActionTerm>> {
        struct Entry {
            state: Bits,
            flag: bool,
            parent: Option<(usize, usize)>,
            depth: usize,
        }
        let mut nodes = vec![Entry {
            state: start.clone(),
            flag: start_flag,
            parent: None,
            depth: 0,
        }];
        let mut seen: HashSet<(Bits, bool)> = HashSet::new();
        seen.insert((start, start_flag));
        let mut queue = VecDeque::from([0usize]);
        let path = |nodes: &Vec<Entry>, mut i: usize, last: usize| {
            let mut out = vec![self.actions[last].term.clone()];
            while let Some((p, a)) = nodes[i].parent {
                out.push(self.actions[a].term.clone());
                i = p;
            }
            out.reverse();
            out
        };
        while let Some(i) = queue.pop_front() {
            if nodes[i].depth >= bound {
                continue;
            }
            for (ai, act) in self.actions.iter().enumerate() {
                let state = &nodes[i].state;
                if !act.pre.subset_of(state) {
                    continue;
                }
                let child = state.step(&act.neg, &act.pos);
                let flag = advance(nodes[i].flag, state, &child);
                if goal(ai, &child, flag) {
                    return Some(path(&nodes, i, ai));
                }
                if seen.insert((child.clone(), flag)) {
                    let depth = nodes[i].depth + 1;
                    nodes.push(Entry {
                        state: child,
                        flag,
                        parent: Some((i, ai)),
                        depth,
                    });
                    queue.push_back(nodes.len() - 1);
                }
            }
        }
        None
    }

    fn plan_reach(&self, start: &AtomSet, target: &Atom, bound: usize) -> Option<Vec<ActionTerm>> {
        if start.contains(target) {
            return Some(Vec::new());
        }
        let t = *self.index.get(target)?;
        self.search(self.encode(start), false, bound, |_, _, _| false, |_, c, _| c.get(t))
    }

    fn plan_achieve(&self, start: &AtomSet, target: &Atom, bound: usize) -> Option<Vec<ActionTerm>> {
        let t = *self.index.get(target)?;
        self.search(
            self.encode(start),
            false,
            bound,
            |_, _, _| false,
            |a, _, _| self.actions[a].pos.get(t),
        )
    }

    /// For every atom, the length of the shortest non-empty plan from `start`
    /// (at most `bound` long) whose last action adds it.
    pub fn achievable_atoms(&self, start: &AtomSet, bound: usize) -> BTreeMap<Atom, usize> {
        let mut out = BTreeMap::new();
        let start = self.encode(start);
        let mut seen = HashSet::from([start.clone()]);
        let mut frontier = vec![start];
        for depth in 1..=bound {
            let mut next = Vec::new();
            for s in &frontier {
                for act in &self.actions {
                    if !act.pre.subset_of(s) {
                        continue;
                    }
                    for i in (0..self.atoms.len()).filter(|&i| act.pos.get(i)) {
                        out.entry(self.atoms[i].clone()).or_insert(depth);
                    }
                    let child = s.step(&act.neg, &act.pos);
                    if seen.insert(child.clone()) {
                        next.push(child);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        out
    }

    /// Shortest plan from `start` after which `pr` is fulfilled.
    pub fn plan_fulfil(
        &self,
        pr: &IdealityPrinciple,
        start: &AtomSet,
        start_flag: bool,
        bound: usize,
    ) -> Option<Vec<ActionTerm>> {
        if pr.fulfilled_at_node(start, start_flag) {
            return Some(Vec::new());
        }
        let ix = |a: &Atom| self.index.get(a).copied();
        let advance = |flag: bool, parent: &Bits, child: &Bits| match pr {
            IdealityPrinciple::MustPrecede(p1, p2) => {
                flag || (ix(p1).is_some_and(|i| parent.get(i)) && !ix(p2).is_some_and(|i| parent.get(i)))
            }
            IdealityPrinciple::Undesired(p) => flag || ix(p).is_some_and(|i| child.get(i)),
            _ => false,
        };
        let goal = |_: usize, child: &Bits, flag: bool| match pr {
            IdealityPrinciple::Desired(p) | IdealityPrinciple::Mandatory(p) => ix(p).is_some_and(|i| child.get(i)),
            IdealityPrinciple::Undesired(_) => !flag,
            IdealityPrinciple::MustPrecede(_, p2) => flag && ix(p2).is_some_and(|i| child.get(i)),
        };
        self.search(self.encode(start), start_flag, bound, advance, goal)
    }

    pub fn decode_state(&self, props: &AtomSet) -> AtomSet {
        self.decode(&self.encode(props))
    }
}

/// Shortest plan of length at most `bound` reaching a state with `target`.
pub fn bounded_reach(start: &AtomSet, target: &Atom, kb: &KnowledgeBase, bound: usize) -> Option<Vec<ActionTerm>> {
    Domain::new(kb, start.iter().chain([target])).plan_reach(start, target, bound)
}

/// Shortest non-empty plan of length at most `bound` whose last action adds `target`.
pub fn bounded_achieve(start: &AtomSet, target: &Atom, kb: &KnowledgeBase, bound: usize) -> Option<Vec<ActionTerm>> {
    Domain::new(kb, start.iter().chain([target])).plan_achieve(start, target, bound)
}

/// Shortest plan from state `s` that fulfils `pr`, bounded by the number of
/// actions the instance executed from `s`. History flags come from the
/// instance; a principle already fulfilled at `s` yields the empty plan.
pub fn optimum_sequence(
    pr: &IdealityPrinciple,
    inst: &BehaviorInstance,
    s: usize,
    kb: &KnowledgeBase,
) -> Option<(usize, Vec<ActionTerm>)> {
    if is_fulfilled(pr, inst, s) {
        return Some((0, Vec::new()));
    }
    let start = &inst.state(s).props;
    let domain = Domain::new(kb, start.iter().chain(pr.atoms()));
    let bound = inst.len() - s;
    domain
        .plan_fulfil(pr, start, pr.initial_flag(inst, s), bound)
        .map(|plan| (plan.len(), plan))
}

/// The actions executed from `s` up to the first later state fulfilling `pr`.
pub fn observed_sequence(pr: &IdealityPrinciple, inst: &BehaviorInstance, s: usize) -> Option<Vec<ActionTerm>> {
    (s + 1..inst.states().len())
        .find(|&j| is_fulfilled(pr, inst, j))
        .map(|j| inst.actions()[s..j].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocksworld::{figure2_instance, BlocksWorld};

    fn atom(s: &str) -> Atom {
        Atom::parse(s).unwrap()
    }

    fn names(plan: &[ActionTerm]) -> Vec<String> {
        plan.iter().map(|a| a.to_string()).collect()
    }

    #[test]
    fn reach_on_figure2() {
        let kb = BlocksWorld::standard().physics_kb();
        let f = figure2_instance();
        let plan = bounded_reach(&f.state(2).props, &atom("on(b,c)"), &kb, 4).unwrap();
        assert_eq!(names(&plan), ["move(b,p1,c)"]);
        let plan = bounded_reach(&f.state(4).props, &atom("on(a,b)"), &kb, 4).unwrap();
        assert!(plan.is_empty());
    }

    #[test]
    fn successors_replay_figure2() {
        let kb = BlocksWorld::standard().physics_kb();
        let f = figure2_instance();
        let node = SearchNode::new(f.state(1).props.clone());
        let succ = successors(&node, &kb);
        let (_, n2) = succ.iter().find(|(a, _)| a.to_string() == "move(a,b,p2)").unwrap();
        assert_eq!(n2.props, f.state(2).props);
        assert_eq!(n2.depth, 1);
        assert!(successors(&SearchNode::new(AtomSet::new()), &kb).is_empty());
    }

    #[test]
    fn optimum_and_observed_on_figure2() {
        let kb = BlocksWorld::standard().physics_kb();
        let f = figure2_instance();
        let d = IdealityPrinciple::Desired(atom("on(b,c)"));
        let (n, plan) = optimum_sequence(&d, &f, 1, &kb).unwrap();
        assert_eq!(n, 2);
        assert_eq!(names(&plan), ["move(a,b,p2)", "move(b,p1,c)"]);
        assert_eq!(names(&observed_sequence(&d, &f, 1).unwrap()), names(&plan));

        let mp = IdealityPrinciple::MustPrecede(atom("on(b,c)"), atom("on(a,b)"));
        let (n, plan) = optimum_sequence(&mp, &f, 1, &kb).unwrap();
        assert_eq!(n, 3);
        assert_eq!(names(&plan), ["move(a,b,p2)", "move(b,p1,c)", "move(a,p2,b)"]);
        let (n0, _) = optimum_sequence(&mp, &f, 0, &kb).unwrap();
        assert_eq!(n0, 3);
        assert_eq!(observed_sequence(&mp, &f, 0).unwrap().len(), 4);
        assert!(observed_sequence(&mp, &f, 4).is_none());
    }

    #[test]
    fn achieve_needs_an_adding_action() {
        let kb = BlocksWorld::standard().physics_kb();
        let f = figure2_instance();
        let on_ab = atom("on(a,b)");
        assert!(bounded_reach(&f.state(1).props, &on_ab, &kb, 0).is_some());
        assert!(bounded_achieve(&f.state(1).props, &on_ab, &kb, 0).is_none());
        let plan = bounded_achieve(&f.state(1).props, &on_ab, &kb, 2).unwrap();
        assert_eq!(plan.len(), 2);
        let domain = Domain::new(&kb, f.state(1).props.iter());
        let depths = domain.achievable_atoms(&f.state(1).props, 2);
        assert_eq!(depths[&on_ab], 2);
        assert_eq!(depths[&atom("clear(b)")], 1);
    }
}
