//! Ground first-order terms.
//!
//! Every proposition and action handled by the engine is a ground term in
//! canonical lowercase form, e.g. `on(a,p1)` or `stacked([a,b,c])`. The
//! canonical text form is whitespace-free and round-trips through
//! [`Atom::parse`] and `Display`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

/// Error produced while parsing a term.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at offset {offset} in `{input}`")]
pub struct TermError {
    pub input: String,
    pub offset: usize,
    pub message: String,
}

/// A ground term `functor` or `functor(arg,...)`.
///
/// Constants are atoms without arguments. Ordering is structural; use
/// [`sort_canonical`] when the canonical text order is required.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    functor: String,
    args: Vec<Arg>,
}

/// An argument of a compound term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arg {
    Term(Atom),
    List(Vec<Arg>),
}

pub type AtomSet = BTreeSet<Atom>;

/// Returns true if `s` is a canonical identifier `[a-z][a-z0-9_]*`.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

impl Atom {
    /// Builds a compound term. Panics if `functor` is not a canonical identifier.
    pub fn new(functor: impl Into<String>, args: Vec<Arg>) -> Self {
        let functor = functor.into();
        assert!(is_identifier(&functor), "non-canonical functor `{functor}`");
        Atom { functor, args }
    }

    pub fn constant(name: impl Into<String>) -> Self {
        Atom::new(name, Vec::new())
    }

    /// Shorthand for a compound term whose arguments are all constants.
    pub fn with_constants(functor: impl Into<String>, args: &[&str]) -> Self {
        Atom::new(functor, args.iter().map(|a| Arg::Term(Atom::constant(*a))).collect())
    }

    pub fn parse(input: &str) -> Result<Self, TermError> {
        let mut parser = Parser { input, pos: 0 };
        let atom = parser.term()?;
        if parser.pos != input.len() {
            return Err(parser.error("trailing input"));
        }
        Ok(atom)
    }

    pub fn functor(&self) -> &str {
        &self.functor
    }

    pub fn args(&self) -> &[Arg] {
        &self.args
    }

    pub fn is_constant(&self) -> bool {
        self.args.is_empty()
    }

    /// The i-th argument when it is a term (not a list).
    pub fn arg_term(&self, i: usize) -> Option<&Atom> {
        match self.args.get(i) {
            Some(Arg::Term(t)) => Some(t),
            _ => None,
        }
    }

    /// Writes the term with the first letter of every identifier uppercased,
    /// and snake_case functors rendered as CamelCase: `must_precede(on(a,b),x)`
    /// becomes `MustPrecede(On(A,B),X)`.
    pub fn display_title(&self) -> String {
        let mut out = String::new();
        self.write_title(&mut out);
        out
    }

    fn write_title(&self, out: &mut String) {
        for part in self.functor.split('_').filter(|p| !p.is_empty()) {
            let mut chars = part.chars();
            if let Some(first) = chars.next() {
                out.push(first.to_ascii_uppercase());
                out.extend(chars);
            }
        }
        if !self.args.is_empty() {
            out.push('(');
            for (i, arg) in self.args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                arg.write_title(out);
            }
            out.push(')');
        }
    }
}

impl Arg {
    pub fn constant(name: impl Into<String>) -> Self {
        Arg::Term(Atom::constant(name))
    }

    fn write_title(&self, out: &mut String) {
        match self {
            Arg::Term(t) => t.write_title(out),
            Arg::List(items) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    item.write_title(out);
                }
                out.push(']');
            }
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.functor)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            write_args(f, &self.args)?;
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Term(t) => write!(f, "{t}"),
            Arg::List(items) => {
                f.write_str("[")?;
                write_args(f, items)?;
                f.write_str("]")
            }
        }
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Arg]) -> fmt::Result {
    for (i, arg) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{arg}")?;
    }
    Ok(())
}

impl FromStr for Atom {
    type Err = TermError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Atom::parse(s)
    }
}

impl Serialize for Atom {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Atom {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Atom::parse(&s).map_err(de::Error::custom)
    }
}

/// A ground action. Distinct argument tuples are distinct actions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionTerm(Atom);

impl ActionTerm {
    pub fn new(atom: Atom) -> Self {
        ActionTerm(atom)
    }

    pub fn parse(input: &str) -> Result<Self, TermError> {
        Atom::parse(input).map(ActionTerm)
    }

    pub fn as_atom(&self) -> &Atom {
        &self.0
    }

    pub fn display_title(&self) -> String {
        self.0.display_title()
    }
}

impl fmt::Display for ActionTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for ActionTerm {
    type Err = TermError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ActionTerm::parse(s)
    }
}

impl Serialize for ActionTerm {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ActionTerm {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Atom::deserialize(deserializer).map(ActionTerm)
    }
}

/// Canonical text of every item, sorted by that text.
pub fn sort_canonical<'a, T, I>(items: I) -> Vec<String>
where
    T: fmt::Display + 'a,
    I: IntoIterator<Item = &'a T>,
{
    let mut out: Vec<String> = items.into_iter().map(|t| t.to_string()).collect();
    out.sort();
    out
}

struct Parser<'a> {
    input: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> TermError {
        TermError {
            input: self.input.to_string(),
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.input.as_bytes().get(self.pos).copied()
    }

    fn expect(&mut self, byte: u8) -> Result<(), TermError> {
        if self.peek() == Some(byte) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected `{}`", byte as char)))
        }
    }

    fn ident(&mut self) -> Result<String, TermError> {
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_lowercase() => self.pos += 1,
            Some(c) if c.is_ascii_uppercase() => {
                return Err(self.error("identifiers must start with a lowercase letter"))
            }
            _ => return Err(self.error("expected identifier")),
        }
        while let Some(c) = self.peek() {
            if c.is_ascii_lowercase() || c.is_ascii_digit() || c == b'_' {
                self.pos += 1;
            } else if c.is_ascii_uppercase() {
                return Err(self.error("uppercase letter in identifier"));
            } else {
                break;
            }
        }
        Ok(self.input[start..self.pos].to_string())
    }

    fn term(&mut self) -> Result<Atom, TermError> {
        let functor = self.ident()?;
        let mut args = Vec::new();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            args = self.args(b')')?;
            if args.is_empty() {
                return Err(self.error("empty argument list"));
            }
            self.expect(b')')?;
        }
        Ok(Atom { functor, args })
    }

    /// Comma-separated args up to (not consuming) `close`.
    fn args(&mut self, close: u8) -> Result<Vec<Arg>, TermError> {
        let mut args = Vec::new();
        if self.peek() == Some(close) {
            return Ok(args);
        }
        loop {
            args.push(self.arg()?);
            if self.peek() == Some(b',') {
                self.pos += 1;
            } else {
                return Ok(args);
            }
        }
    }

    fn arg(&mut self) -> Result<Arg, TermError> {
        if self.peek() == Some(b'[') {
            self.pos += 1;
            let items = self.args(b']')?;
            self.expect(b']')?;
            Ok(Arg::List(items))
        } else {
            self.term().map(Arg::Term)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_nested_terms_and_lists() {
        let t = Atom::parse("stacked([a,b,c])").unwrap();
        assert_eq!(t.functor(), "stacked");
        assert_eq!(t.to_string(), "stacked([a,b,c])");
        assert_eq!(Atom::parse("nil([])").unwrap().to_string(), "nil([])");
        let t = Atom::parse("holds(on(a,b),s1)").unwrap();
        assert_eq!(t.arg_term(0).unwrap().to_string(), "on(a,b)");
    }

    #[test]
    fn rejects_uppercase_and_whitespace() {
        let err = Atom::parse("On(A,B)").unwrap_err();
        assert_eq!(err.offset, 0);
        assert!(Atom::parse("on(A,b)").is_err());
        assert!(Atom::parse("on(a, b)").is_err());
        assert!(Atom::parse("on(a,b").is_err());
        assert!(Atom::parse("on()").is_err());
        assert!(Atom::parse("1on").is_err());
        assert!(Atom::parse("").is_err());
    }

    #[test]
    fn title_rendering() {
        let t = Atom::parse("must_precede(on(b,c),on(a,b))").unwrap();
        assert_eq!(t.display_title(), "MustPrecede(On(B, C), On(A, B))");
        let t = Atom::parse("stacked([a,b,c])").unwrap();
        assert_eq!(t.display_title(), "Stacked([A, B, C])");
    }

    fn ident() -> impl Strategy<Value = String> {
        "[a-z][a-z0-9_]{0,5}"
    }

    fn arb_arg() -> impl Strategy<Value = Arg> {
        let leaf = ident().prop_map(Arg::constant);
        leaf.prop_recursive(3, 16, 3, |inner| {
            prop_oneof![
                (ident(), prop::collection::vec(inner.clone(), 1..3))
                    .prop_map(|(f, args)| Arg::Term(Atom::new(f, args))),
                prop::collection::vec(inner, 0..3).prop_map(Arg::List),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(f in ident(), args in prop::collection::vec(arb_arg(), 0..4)) {
            let atom = Atom::new(f, args);
            let text = atom.to_string();
            prop_assert_eq!(Atom::parse(&text).unwrap(), atom);
        }
    }
}
