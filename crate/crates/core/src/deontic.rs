//! Ideality principles and their per-state satisfaction degrees.
//!
//! [`assess`] classifies a principle at a state of an instance and returns a
//! certificate: the tagged propositions that attest the degree. Every
//! certificate element can be re-checked with [`TaggedProposition::is_true`].

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::kb::KnowledgeBase;
use crate::term::{Arg, Atom, AtomSet};
use crate::trace::BehaviorInstance;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DeonticError {
    #[error("principle `{principle}` mentions `{atom}`, which is not a fluent")]
    NotAFluent { principle: String, atom: String },
    #[error("`{0}` is not an ideality principle")]
    BadPrinciple(String),
    #[error("`{0}` is not a tagged proposition")]
    BadTag(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IdealityPrinciple {
    Desired(Atom),
    Undesired(Atom),
    Mandatory(Atom),
    MustPrecede(Atom, Atom),
}

impl IdealityPrinciple {
    pub fn atoms(&self) -> Vec<&Atom> {
        match self {
            IdealityPrinciple::Desired(p) | IdealityPrinciple::Undesired(p) | IdealityPrinciple::Mandatory(p) => {
                vec![p]
            }
            IdealityPrinciple::MustPrecede(p1, p2) => vec![p1, p2],
        }
    }

    pub fn to_atom(&self) -> Atom {
        let (functor, atoms) = match self {
            IdealityPrinciple::Desired(p) => ("desired", vec![p]),
            IdealityPrinciple::Undesired(p) => ("undesired", vec![p]),
            IdealityPrinciple::Mandatory(p) => ("mandatory", vec![p]),
            IdealityPrinciple::MustPrecede(p1, p2) => ("must_precede", vec![p1, p2]),
        };
        Atom::new(functor, atoms.into_iter().map(|a| Arg::Term(a.clone())).collect())
    }

    pub fn from_atom(atom: &Atom) -> Result<Self, DeonticError> {
        let bad = || DeonticError::BadPrinciple(atom.to_string());
        let arg = |i| atom.arg_term(i).cloned().ok_or_else(bad);
        let pr = match (atom.functor(), atom.args().len()) {
            ("desired", 1) => IdealityPrinciple::Desired(arg(0)?),
            ("undesired", 1) => IdealityPrinciple::Undesired(arg(0)?),
            ("mandatory", 1) => IdealityPrinciple::Mandatory(arg(0)?),
            ("must_precede", 2) => IdealityPrinciple::MustPrecede(arg(0)?, arg(1)?),
            _ => return Err(bad()),
        };
        Ok(pr)
    }

    pub fn parse(text: &str) -> Result<Self, DeonticError> {
        let atom = Atom::parse(text).map_err(|_| DeonticError::BadPrinciple(text.to_string()))?;
        IdealityPrinciple::from_atom(&atom)
    }

    /// Rank used when the configuration gives none: precedence principles
    /// outrank the rest.
    pub fn default_rank(&self) -> i64 {
        match self {
            IdealityPrinciple::MustPrecede(..) => 2,
            _ => 1,
        }
    }

    pub fn display_title(&self) -> String {
        self.to_atom().display_title()
    }

    fn check_fluents(&self, kb: &KnowledgeBase) -> Result<(), DeonticError> {
        for a in self.atoms() {
            if !kb.fluents.contains(a) {
                return Err(DeonticError::NotAFluent {
                    principle: self.to_string(),
                    atom: a.to_string(),
                });
            }
        }
        Ok(())
    }

    /// History flag carried by search nodes. For `MustPrecede(p1,p2)` it
    /// records that some strictly earlier state had `p1` without `p2`; for
    /// `Undesired(p)` that `p` has held at some state so far.
    pub fn initial_flag(&self, inst: &BehaviorInstance, s: usize) -> bool {
        match self {
            IdealityPrinciple::MustPrecede(p1, p2) => inst.states()[..s].iter().any(|t| t.holds(p1) && !t.holds(p2)),
            IdealityPrinciple::Undesired(p) => inst.states()[..=s].iter().any(|t| t.holds(p)),
            _ => false,
        }
    }

    pub fn advance_flag(&self, flag: bool, parent: &AtomSet, child: &AtomSet) -> bool {
        match self {
            IdealityPrinciple::MustPrecede(p1, p2) => flag || (parent.contains(p1) && !parent.contains(p2)),
            IdealityPrinciple::Undesired(p) => flag || child.contains(p),
            _ => false,
        }
    }

    /// Fulfilment of a search node, for principles not trivially fulfilled
    /// by the instance's initial state.
    pub fn fulfilled_at_node(&self, props: &AtomSet, flag: bool) -> bool {
        match self {
            IdealityPrinciple::Desired(p) | IdealityPrinciple::Mandatory(p) => props.contains(p),
            IdealityPrinciple::Undesired(_) => !flag,
            IdealityPrinciple::MustPrecede(_, p2) => flag && props.contains(p2),
        }
    }
}

impl fmt::Display for IdealityPrinciple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_atom())
    }
}

/// Satisfaction degrees, ordered from worst to best.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Degree {
    Prevented = 0,
    NotFulfilled = 1,
    IndifferentState = 2,
    Fulfilled = 3,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TaggedProposition {
    Holds(Atom, usize),
    NotHolds(Atom, usize),
    Principle(IdealityPrinciple),
    IsInitial(usize),
    NotInitial(usize),
    Precedes(usize, usize),
    NeverBefore(Atom, usize),
    NeverPreventedUpTo(Atom, usize),
    PreventedAt(Atom, usize),
    PreventsFact(Atom, Atom),
    /// No state strictly before `s` has the first atom without the second.
    NoWitness(Atom, Atom, usize),
}

fn state_const(s: usize) -> Arg {
    Arg::constant(format!("s{s}"))
}

fn state_title(s: usize) -> String {
    format!("S{s}")
}

fn parse_state(arg: Option<&Atom>) -> Option<usize> {
    let a = arg?;
    if !a.is_constant() {
        return None;
    }
    let digits = a.functor().strip_prefix('s')?;
    if digits.is_empty() || (digits.len() > 1 && digits.starts_with('0')) {
        return None;
    }
    digits.parse().ok()
}

impl TaggedProposition {
    pub fn to_atom(&self) -> Atom {
        use TaggedProposition::*;
        let t = |a: &Atom| Arg::Term(a.clone());
        match self {
            Holds(p, s) => Atom::new("holds", vec![t(p), state_const(*s)]),
            NotHolds(p, s) => Atom::new("not_holds", vec![t(p), state_const(*s)]),
            Principle(pr) => Atom::new("principle", vec![Arg::Term(pr.to_atom())]),
            IsInitial(s) => Atom::new("initial", vec![state_const(*s)]),
            NotInitial(s) => Atom::new("not_initial", vec![state_const(*s)]),
            Precedes(a, b) => Atom::new("precedes", vec![state_const(*a), state_const(*b)]),
            NeverBefore(p, s) => Atom::new("never_before", vec![t(p), state_const(*s)]),
            NeverPreventedUpTo(p, s) => Atom::new("never_prevented_upto", vec![t(p), state_const(*s)]),
            PreventedAt(p, s) => Atom::new("prevented_at", vec![t(p), state_const(*s)]),
            PreventsFact(q, p) => Atom::new("prevents", vec![t(q), t(p)]),
            NoWitness(p1, p2, s) => Atom::new("no_witness", vec![t(p1), t(p2), state_const(*s)]),
        }
    }

    pub fn from_atom(atom: &Atom) -> Result<Self, DeonticError> {
        use TaggedProposition::*;
        let bad = || DeonticError::BadTag(atom.to_string());
        let term = |i| atom.arg_term(i).cloned().ok_or_else(bad);
        let state = |i| parse_state(atom.arg_term(i)).ok_or_else(bad);
        let tag = match (atom.functor(), atom.args().len()) {
            ("holds", 2) => Holds(term(0)?, state(1)?),
            ("not_holds", 2) => NotHolds(term(0)?, state(1)?),
            ("principle", 1) => Principle(IdealityPrinciple::from_atom(&term(0)?)?),
            ("initial", 1) => IsInitial(state(0)?),
            ("not_initial", 1) => NotInitial(state(0)?),
            ("precedes", 2) => Precedes(state(0)?, state(1)?),
            ("never_before", 2) => NeverBefore(term(0)?, state(1)?),
            ("never_prevented_upto", 2) => NeverPreventedUpTo(term(0)?, state(1)?),
            ("prevented_at", 2) => PreventedAt(term(0)?, state(1)?),
            ("prevents", 2) => PreventsFact(term(0)?, term(1)?),
            ("no_witness", 3) => NoWitness(term(0)?, term(1)?, state(2)?),
            _ => return Err(bad()),
        };
        Ok(tag)
    }

    pub fn parse(text: &str) -> Result<Self, DeonticError> {
        let atom = Atom::parse(text).map_err(|_| DeonticError::BadTag(text.to_string()))?;
        TaggedProposition::from_atom(&atom)
    }

    /// Presentation form, e.g. `¬(On(A, B)/S2)`.
    pub fn display_title(&self) -> String {
        use TaggedProposition::*;
        match self {
            Holds(p, s) => format!("{}/{}", p.display_title(), state_title(*s)),
            NotHolds(p, s) => format!("¬({}/{})", p.display_title(), state_title(*s)),
            Principle(pr) => pr.display_title(),
            IsInitial(s) => format!("InitialState({})", state_title(*s)),
            NotInitial(s) => format!("¬InitialState({})", state_title(*s)),
            Precedes(a, b) => format!("{} < {}", state_title(*a), state_title(*b)),
            NeverBefore(p, s) => format!("¬∃s [s < {} ∧ {}/s]", state_title(*s), p.display_title()),
            NeverPreventedUpTo(p, s) => {
                format!("¬∃t [t ≤ {} ∧ PreventedProp({})/t]", state_title(*s), p.display_title())
            }
            PreventedAt(p, s) => format!("PreventedProp({})/{}", p.display_title(), state_title(*s)),
            PreventsFact(q, p) => format!("Prevents({}, {})", q.display_title(), p.display_title()),
            NoWitness(p1, p2, s) => format!(
                "¬∃t [t < {} ∧ {}/t ∧ ¬({}/t)]",
                state_title(*s),
                p1.display_title(),
                p2.display_title()
            ),
        }
    }

    /// Checks the proposition against the instance and knowledge base.
    pub fn is_true(&self, inst: &BehaviorInstance, kb: &KnowledgeBase) -> bool {
        use TaggedProposition::*;
        let n = inst.states().len();
        let holds = |p: &Atom, s: usize| s < n && inst.state(s).holds(p);
        match self {
            Holds(p, s) => holds(p, *s),
            NotHolds(p, s) => *s < n && !holds(p, *s),
            Principle(_) => true,
            IsInitial(s) => *s == 0,
            NotInitial(s) => *s != 0 && *s < n,
            Precedes(a, b) => a < b && *b < n,
            NeverBefore(p, s) => *s < n && (0..*s).all(|t| !holds(p, t)),
            NeverPreventedUpTo(p, s) => *s < n && (0..=*s).all(|t| prevented_prop(p, inst, t, kb).is_none()),
            PreventedAt(p, s) => *s < n && prevented_prop(p, inst, *s, kb).is_some(),
            PreventsFact(q, p) => kb.prop_prevents_contains(q, p),
            NoWitness(p1, p2, s) => *s < n && (0..*s).all(|t| !(holds(p1, t) && !holds(p2, t))),
        }
    }
}

impl fmt::Display for TaggedProposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_atom())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatisfactionFact {
    pub degree: Degree,
    pub principle: IdealityPrinciple,
    pub state: usize,
    /// Principle first, then supporting propositions.
    pub certificate: Vec<TaggedProposition>,
}

/// Importance ranks; `a <= b` iff `rank(a) <= rank(b)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrincipleOrder {
    pub ranks: BTreeMap<IdealityPrinciple, i64>,
}

impl PrincipleOrder {
    pub fn rank(&self, pr: &IdealityPrinciple) -> i64 {
        self.ranks.get(pr).copied().unwrap_or_else(|| pr.default_rank())
    }

    pub fn le(&self, a: &IdealityPrinciple, b: &IdealityPrinciple) -> bool {
        self.rank(a) <= self.rank(b)
    }
}

/// A proposition in state `s` that prevents `p`, the canonically smallest if several.
pub fn prevented_prop(p: &Atom, inst: &BehaviorInstance, s: usize, kb: &KnowledgeBase) -> Option<Atom> {
    let state = &inst.state(s).props;
    kb.prop_prevents()
        .filter(|(q, target)| *target == p && state.contains(*q))
        .map(|(q, _)| q.clone())
        .min_by_key(|q| q.to_string())
}

/// Latest `t <= s` at which `p` is prevented, with its witness.
fn prevented_up_to(p: &Atom, inst: &BehaviorInstance, s: usize, kb: &KnowledgeBase) -> Option<(usize, Atom)> {
    (0..=s)
        .rev()
        .find_map(|t| prevented_prop(p, inst, t, kb).map(|q| (t, q)))
}

/// Fulfilment alone; it never depends on prevention facts.
pub fn is_fulfilled(pr: &IdealityPrinciple, inst: &BehaviorInstance, s: usize) -> bool {
    let holds = |p: &Atom, t: usize| inst.state(t).holds(p);
    match pr {
        IdealityPrinciple::Desired(p) | IdealityPrinciple::Mandatory(p) => holds(p, s),
        IdealityPrinciple::Undesired(p) => (0..=s).all(|t| !holds(p, t)),
        IdealityPrinciple::MustPrecede(p1, p2) => {
            (holds(p1, 0) && holds(p2, 0)) || (holds(p2, s) && (0..s).any(|t| holds(p1, t) && !holds(p2, t)))
        }
    }
}

/// Satisfaction degree of `pr` at state `s`, with its certificate.
pub fn assess(
    pr: &IdealityPrinciple,
    inst: &BehaviorInstance,
    s: usize,
    kb: &KnowledgeBase,
) -> Result<SatisfactionFact, DeonticError> {
    use TaggedProposition::*;
    pr.check_fluents(kb)?;
    let holds = |p: &Atom, t: usize| inst.state(t).holds(p);
    let fact = |degree, rest: Vec<TaggedProposition>| {
        let mut certificate = vec![Principle(pr.clone())];
        certificate.extend(rest);
        Ok(SatisfactionFact {
            degree,
            principle: pr.clone(),
            state: s,
            certificate,
        })
    };
    match pr {
        IdealityPrinciple::Desired(p) | IdealityPrinciple::Mandatory(p) => {
            if holds(p, s) {
                return fact(Degree::Fulfilled, vec![Holds(p.clone(), s)]);
            }
            if let Some((t, q)) = prevented_up_to(p, inst, s, kb) {
                return fact(
                    Degree::Prevented,
                    vec![PreventsFact(q.clone(), p.clone()), Holds(q, t), NotHolds(p.clone(), s)],
                );
            }
            fact(
                Degree::NotFulfilled,
                vec![NotHolds(p.clone(), s), NeverPreventedUpTo(p.clone(), s)],
            )
        }
        IdealityPrinciple::Undesired(p) => match (0..=s).find(|&t| holds(p, t)) {
            None => fact(Degree::Fulfilled, vec![NotHolds(p.clone(), s)]),
            Some(t0) => fact(Degree::NotFulfilled, vec![Holds(p.clone(), t0)]),
        },
        IdealityPrinciple::MustPrecede(p1, p2) => {
            if holds(p1, 0) && holds(p2, 0) {
                return fact(
                    Degree::Fulfilled,
                    vec![Holds(p2.clone(), 0), Holds(p1.clone(), 0), IsInitial(0)],
                );
            }
            if !holds(p2, s) {
                if s == 0 {
                    if holds(p1, 0) {
                        return fact(
                            Degree::NotFulfilled,
                            vec![IsInitial(0), Holds(p1.clone(), 0), NotHolds(p2.clone(), 0)],
                        );
                    }
                    return fact(
                        Degree::IndifferentState,
                        vec![IsInitial(0), NotHolds(p1.clone(), 0), NotHolds(p2.clone(), 0)],
                    );
                }
                return fact(Degree::IndifferentState, vec![NotInitial(s), NotHolds(p2.clone(), s)]);
            }
            if let Some(t) = (0..s).find(|&t| holds(p1, t) && !holds(p2, t)) {
                return fact(
                    Degree::Fulfilled,
                    vec![
                        Holds(p2.clone(), s),
                        Holds(p1.clone(), t),
                        NotHolds(p2.clone(), t),
                        Precedes(t, s),
                    ],
                );
            }
            if s == 0 {
                return fact(
                    Degree::NotFulfilled,
                    vec![IsInitial(0), Holds(p2.clone(), 0), NotHolds(p1.clone(), 0)],
                );
            }
            if let Some((t, q)) = prevented_up_to(p1, inst, s, kb) {
                return fact(
                    Degree::Prevented,
                    vec![
                        Holds(p2.clone(), s),
                        PreventedAt(p1.clone(), t),
                        PreventsFact(q.clone(), p1.clone()),
                        Holds(q, t),
                    ],
                );
            }
            if (0..s).all(|t| !holds(p1, t)) {
                return fact(
                    Degree::NotFulfilled,
                    vec![
                        NotInitial(s),
                        Holds(p2.clone(), s),
                        NeverBefore(p1.clone(), s),
                        NeverPreventedUpTo(p1.clone(), s),
                    ],
                );
            }
            fact(
                Degree::NotFulfilled,
                vec![
                    NotInitial(s),
                    Holds(p2.clone(), s),
                    NoWitness(p1.clone(), p2.clone(), s),
                    NeverPreventedUpTo(p1.clone(), s),
                ],
            )
        }
    }
}

/// The certificate of any degree other than `Prevented`.
pub fn not_violated(
    pr: &IdealityPrinciple,
    inst: &BehaviorInstance,
    s: usize,
    kb: &KnowledgeBase,
) -> Result<Option<SatisfactionFact>, DeonticError> {
    let f = assess(pr, inst, s, kb)?;
    Ok((f.degree != Degree::Prevented).then_some(f))
}
