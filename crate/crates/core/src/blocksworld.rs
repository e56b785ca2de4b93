//! Blocks World trace generator.
//!
//! Three blocks `a`, `b`, `c` on a table with four positions `p1`..`p4`. A
//! robot stacks them into the tower `a`-on-`b`-on-`c`; every run stops at the
//! first state where the tower stands. Generation is a pure function of the
//! scenario and its seed.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::kb::KnowledgeBase;
use crate::term::{ActionTerm, Atom, AtomSet};
use crate::trace::{BehaviorInstance, Corpus};

/// Chance that the robot explores with a random legal move instead of
/// following its stacking policy.
pub const EXPLORATION: f64 = 0.9;
/// Upper bound on exploratory moves per run; the policy finishes the job after.
pub const MAX_EXPLORATORY_MOVES: usize = 400;
const ROBOT_SEED: u64 = 0x5eed_b10c;

/// Blocks and table positions of a world. Places are blocks followed by positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlocksWorld {
    pub blocks: Vec<String>,
    pub positions: Vec<String>,
}

/// Support of every block: `on[x]` is a block or a table position.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlocksConfig {
    pub on: BTreeMap<String, String>,
}

/// `move(block,from,to)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Move {
    pub block: String,
    pub from: String,
    pub to: String,
}

impl Move {
    pub fn action(&self) -> ActionTerm {
        ActionTerm::new(Atom::with_constants("move", &[&self.block, &self.from, &self.to]))
    }
}

impl BlocksConfig {
    pub fn from_pairs(pairs: &[(&str, &str)]) -> Self {
        BlocksConfig {
            on: pairs.iter().map(|(b, p)| (b.to_string(), p.to_string())).collect(),
        }
    }

    pub fn is_clear(&self, place: &str) -> bool {
        !self.on.values().any(|p| p == place)
    }

    pub fn apply(&self, m: &Move) -> BlocksConfig {
        let mut next = self.clone();
        next.on.insert(m.block.clone(), m.to.clone());
        next
    }

    /// Number of blocks resting directly on the table, counting each tower once.
    pub fn tower_count(&self, world: &BlocksWorld) -> usize {
        self.on.values().filter(|p| world.positions.contains(p)).count()
    }
}

fn goal_atoms() -> [Atom; 3] {
    [
        Atom::with_constants("on", &["a", "b"]),
        Atom::with_constants("on", &["b", "c"]),
        Atom::with_constants("clear", &["a"]),
    ]
}

impl BlocksWorld {
    pub fn new(blocks: &[&str], positions: &[&str]) -> Self {
        BlocksWorld {
            blocks: blocks.iter().map(|s| s.to_string()).collect(),
            positions: positions.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Blocks `a`, `b`, `c`; positions `p1`..`p4`.
    pub fn standard() -> Self {
        BlocksWorld::new(&["a", "b", "c"], &["p1", "p2", "p3", "p4"])
    }

    pub fn places(&self) -> impl Iterator<Item = &String> + '_ {
        self.blocks.iter().chain(self.positions.iter())
    }

    pub fn is_valid(&self, config: &BlocksConfig) -> bool {
        if config.on.len() != self.blocks.len() {
            return false;
        }
        let mut used = std::collections::BTreeSet::new();
        for b in &self.blocks {
            let Some(p) = config.on.get(b) else {
                return false;
            };
            if p == b || !self.places().any(|q| q == p) || !used.insert(p) {
                return false;
            }
        }
        self.blocks.iter().all(|b| {
            let mut cur = b;
            for _ in 0..=self.blocks.len() {
                let p = &config.on[cur];
                if self.positions.contains(p) {
                    return true;
                }
                cur = p;
            }
            false
        })
    }

    /// Every valid configuration, in lexicographic order of support tuples
    /// (the first block's support varies slowest).
    pub fn enumerate_configs(&self) -> Vec<BlocksConfig> {
        let places: Vec<&String> = self.places().collect();
        let n = self.blocks.len();
        let mut out = Vec::new();
        let mut idx = vec![0usize; n];
        loop {
            let config = BlocksConfig {
                on: self
                    .blocks
                    .iter()
                    .zip(&idx)
                    .map(|(b, &i)| (b.clone(), places[i].clone()))
                    .collect(),
            };
            if self.is_valid(&config) {
                out.push(config);
            }
            let mut k = n;
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < places.len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    pub fn to_state(&self, config: &BlocksConfig) -> AtomSet {
        let mut s = AtomSet::new();
        for (b, p) in &config.on {
            s.insert(Atom::with_constants("on", &[b, p]));
        }
        for p in self.places() {
            if config.is_clear(p) {
                s.insert(Atom::with_constants("clear", &[p]));
            }
        }
        s
    }

    /// Legal moves in block order, then destination place order.
    pub fn moves(&self, config: &BlocksConfig) -> Vec<Move> {
        let mut out = Vec::new();
        for b in &self.blocks {
            if !config.is_clear(b) {
                continue;
            }
            let from = &config.on[b];
            for p in self.places() {
                if p == b || p == from || !config.is_clear(p) {
                    continue;
                }
                out.push(Move {
                    block: b.clone(),
                    from: from.clone(),
                    to: p.clone(),
                });
            }
        }
        out
    }

    /// Every ground move action of the world.
    pub fn all_moves(&self) -> Vec<Move> {
        let mut out = Vec::new();
        for b in &self.blocks {
            for from in self.places() {
                for to in self.places() {
                    if from == b || to == b || from == to {
                        continue;
                    }
                    out.push(Move {
                        block: b.clone(),
                        from: from.clone(),
                        to: to.clone(),
                    });
                }
            }
        }
        out
    }

    /// Exact STRIPS models of every move, as a knowledge base with no attitudes.
    pub fn physics_kb(&self) -> KnowledgeBase {
        let mut kb = KnowledgeBase::default();
        for b in &self.blocks {
            for p in self.places() {
                if p != b {
                    kb.fluents.insert(Atom::with_constants("on", &[b, p]));
                }
            }
        }
        for p in self.places() {
            kb.fluents.insert(Atom::with_constants("clear", &[p]));
        }
        for m in self.all_moves() {
            let a = m.action();
            let on_from = Atom::with_constants("on", &[&m.block, &m.from]);
            let on_to = Atom::with_constants("on", &[&m.block, &m.to]);
            let clear = |x: &str| Atom::with_constants("clear", &[x]);
            kb.precond
                .insert(a.clone(), [on_from.clone(), clear(&m.block), clear(&m.to)].into());
            kb.pos_effects.insert(a.clone(), [on_to, clear(&m.from)].into());
            kb.neg_effects.insert(a.clone(), [on_from, clear(&m.to)].into());
            kb.actions.insert(a);
        }
        kb
    }
}

pub fn enumerate_initial_configs() -> Vec<BlocksConfig> {
    BlocksWorld::standard().enumerate_configs()
}

pub fn config_to_state(config: &BlocksConfig) -> AtomSet {
    BlocksWorld::standard().to_state(config)
}

pub fn is_goal_state(state: &AtomSet) -> bool {
    goal_atoms().iter().all(|g| state.contains(g))
}

fn well_placed(config: &BlocksConfig, block: &str) -> bool {
    let on = |x: &str| config.on[x].as_str();
    match block {
        "c" => on("c").starts_with('p'),
        "b" => on("b") == "c" && well_placed(config, "c"),
        "a" => on("a") == "b" && well_placed(config, "b"),
        _ => false,
    }
}

fn top_of(config: &BlocksConfig, place: &str) -> String {
    let mut cur = place.to_string();
    while let Some((b, _)) = config.on.iter().find(|(_, p)| **p == cur) {
        cur = b.clone();
    }
    cur
}

/// The robot's stacking policy: build `c`, then `b` on `c`, then `a` on `b`,
/// parking any obstructing block on the first free place that is neither its
/// support, the destination, nor part of the finished tower.
pub fn policy_move(world: &BlocksWorld, config: &BlocksConfig) -> Move {
    let (block, dest) = [("c", None), ("b", Some("c")), ("a", Some("b"))]
        .into_iter()
        .find(|(x, _)| !well_placed(config, x))
        .expect("policy_move called on a goal configuration");
    let park = |t: String| -> Move {
        let support = config.on[&t].clone();
        let to = world
            .places()
            .find(|p| {
                **p != t
                    && **p != support
                    && Some(p.as_str()) != dest
                    && !(world.blocks.contains(p) && well_placed(config, p))
                    && config.is_clear(p)
            })
            .expect("a free place always exists")
            .clone();
        Move {
            block: t,
            from: support,
            to,
        }
    };
    if !config.is_clear(block) {
        return park(top_of(config, block));
    }
    if let Some(d) = dest {
        if !config.is_clear(d) {
            return park(top_of(config, d));
        }
    }
    let to = match dest {
        Some(d) => d.to_string(),
        None => world
            .positions
            .iter()
            .find(|p| config.is_clear(p))
            .expect("a free position always exists")
            .clone(),
    };
    Move {
        block: block.to_string(),
        from: config.on[block].clone(),
        to,
    }
}

fn run_robot(config: &BlocksConfig, rng: &mut ChaCha8Rng) -> (Vec<AtomSet>, Vec<ActionTerm>) {
    let world = BlocksWorld::standard();
    let mut cur = config.clone();
    let mut states = vec![world.to_state(&cur)];
    let mut actions = Vec::new();
    let mut explored = 0;
    while !is_goal_state(states.last().expect("non-empty")) {
        let m = if explored < MAX_EXPLORATORY_MOVES && rng.gen_bool(EXPLORATION) {
            explored += 1;
            world
                .moves(&cur)
                .choose(rng)
                .expect("some move is always legal")
                .clone()
        } else {
            policy_move(&world, &cur)
        };
        actions.push(m.action());
        cur = cur.apply(&m);
        states.push(world.to_state(&cur));
    }
    (states, actions)
}

/// Solves one configuration with the exploring robot. The robot's random
/// choices depend only on `index`, the configuration's enumeration position.
pub fn solve_instance_indexed(config: &BlocksConfig, index: usize) -> BehaviorInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(ROBOT_SEED ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let (states, actions) = run_robot(config, &mut rng);
    BehaviorInstance::new(format!("bw{index:03}"), states, actions).expect("robot traces are well formed")
}

pub fn solve_instance(config: &BlocksConfig) -> BehaviorInstance {
    let index = enumerate_initial_configs()
        .iter()
        .position(|c| c == config)
        .unwrap_or(0);
    solve_instance_indexed(config, index)
}

/// Solves a configuration with the stacking policy alone.
pub fn solve_with_policy(config: &BlocksConfig) -> Vec<Move> {
    let world = BlocksWorld::standard();
    let mut cur = config.clone();
    let mut out = Vec::new();
    while !is_goal_state(&world.to_state(&cur)) {
        let m = policy_move(&world, &cur);
        cur = cur.apply(&m);
        out.push(m);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InjectionKind {
    None,
    PreventionA,
    PreventionB,
    Stacked,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InjectionScenario {
    pub kind: InjectionKind,
    pub seed: u64,
}

impl InjectionScenario {
    pub fn new(kind: InjectionKind, seed: u64) -> Self {
        InjectionScenario { kind, seed }
    }
}

pub fn preventing_atom() -> Atom {
    Atom::constant("preventingp")
}

pub fn prevented_atom() -> Atom {
    Atom::constant("p")
}

pub fn stacked_atom() -> Atom {
    Atom::parse("stacked([a,b,c])").expect("valid term")
}

/// The 120 solved instances, injected according to `scenario`.
pub fn generate_corpus(scenario: InjectionScenario) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let instances = enumerate_initial_configs()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let base = solve_instance_indexed(c, i);
            inject(base, scenario.kind, &mut rng)
        })
        .collect();
    Corpus::new("bw", instances).expect("generated ids are unique")
}

fn inject(instance: BehaviorInstance, kind: InjectionKind, rng: &mut ChaCha8Rng) -> BehaviorInstance {
    if kind == InjectionKind::None {
        return instance;
    }
    let mut states: Vec<AtomSet> = instance.states().iter().map(|s| s.props.clone()).collect();
    match kind {
        InjectionKind::None => {}
        InjectionKind::Stacked => {
            states.last_mut().expect("non-empty").insert(stacked_atom());
        }
        InjectionKind::PreventionA | InjectionKind::PreventionB => {
            let mut blocked = false;
            for s in &mut states {
                if blocked {
                    if kind == InjectionKind::PreventionB {
                        s.insert(preventing_atom());
                    }
                    continue;
                }
                if rng.gen_bool(0.5) {
                    s.insert(preventing_atom());
                    blocked = true;
                } else {
                    s.insert(prevented_atom());
                }
            }
        }
    }
    BehaviorInstance::new(instance.id(), states, instance.actions().to_vec()).expect("injection keeps lengths")
}

/// The observed behaviour of the explanation example: `c` on `p4`, `a` on
/// `c`, `b` on `p1`, then four moves ending in the tower.
pub fn figure2_instance() -> BehaviorInstance {
    let world = BlocksWorld::standard();
    let mut cur = BlocksConfig::from_pairs(&[("a", "c"), ("b", "p1"), ("c", "p4")]);
    let moves = [("a", "c", "b"), ("a", "b", "p2"), ("b", "p1", "c"), ("a", "p2", "b")];
    let mut states = vec![world.to_state(&cur)];
    let mut actions = Vec::new();
    for (b, from, to) in moves {
        let m = Move {
            block: b.into(),
            from: from.into(),
            to: to.into(),
        };
        assert!(world.moves(&cur).contains(&m), "illegal move in fixture");
        cur = cur.apply(&m);
        actions.push(m.action());
        states.push(world.to_state(&cur));
    }
    BehaviorInstance::new("figure2", states, actions).expect("fixture is well formed")
}

/// Number of instances of each kind in [`micro_domain_corpus`].
pub const MICRO_INSTANCES: usize = 3;

/// Three successful runs `{free} -makeg-> {free,g}` and three fragments
/// `{free} -spoil-> {q}`. Nothing restores `free`, so `q` blocks `g` forever.
pub fn micro_domain_corpus() -> Corpus {
    let free = Atom::constant("free");
    let g = Atom::constant("g");
    let q = Atom::constant("q");
    let mut instances = Vec::new();
    for i in 0..MICRO_INSTANCES {
        instances.push(
            BehaviorInstance::new(
                format!("ok{i}"),
                vec![[free.clone()].into(), [free.clone(), g.clone()].into()],
                vec![ActionTerm::new(Atom::constant("makeg"))],
            )
            .expect("well formed"),
        );
    }
    for i in 0..MICRO_INSTANCES {
        instances.push(
            BehaviorInstance::new(
                format!("spoiled{i}"),
                vec![[free.clone()].into(), [q.clone()].into()],
                vec![ActionTerm::new(Atom::constant("spoil"))],
            )
            .expect("well formed")
            .into_fragment(),
        );
    }
    Corpus::new("micro", instances).expect("unique ids")
}
