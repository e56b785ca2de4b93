//! Behaviour-trace mining.
//!
//! Learns a symbolic description of observed behaviour (action models,
//! goals, attitudes, incompatibility, prevention, definitions) from corpora
//! of state/action traces, and explains individual traces with `Although`
//! facts: actions that moved the actor away from an ideality principle,
//! optionally justified by an optimal pursuit of another principle.

pub mod although;
pub mod attitudes;
pub mod background;
pub mod base;
pub mod blocksworld;
pub mod defining;
pub mod deontic;
pub mod kb;
pub mod pipeline;
pub mod planner;
pub mod term;
pub mod trace;

pub use kb::{Entity, KnowledgeBase};
pub use term::{ActionTerm, Atom, AtomSet};
pub use trace::{parse_corpus, serialize_corpus, BehaviorInstance, Corpus, State};
