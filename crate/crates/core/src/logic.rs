//! MALL formulas and sequents.
//!
//! Formulas are kept in negation-normal form: negation only ever sits on an
//! atom, and [`negate`] pushes a negation through the connectives by the De
//! Morgan equations.
//!
//! Concrete syntax:
//!
//! ```text
//! formula  := operand | operand op operand
//! operand  := atom | '~' atom | '(' formula ')'
//! op       := '*' (tensor) | '|' (par) | '+' (plus) | '&' (with)
//! atom     := [a-z][a-z0-9_]*
//! sequent  := '|-' formula (',' formula)*
//! ```
//!
//! Binary operators never associate implicitly: `a * b * c` is rejected and
//! must be written `(a * b) * c`.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Whose turn it is: Proponent or Opponent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Polarity {
    P,
    O,
}

impl Polarity {
    pub fn dual(self) -> Polarity {
        match self {
            Polarity::P => Polarity::O,
            Polarity::O => Polarity::P,
        }
    }

    /// Root polarity of a tensor: P moves whenever it is P's turn in either side.
    pub fn tensor(self, other: Polarity) -> Polarity {
        if self == Polarity::O && other == Polarity::O {
            Polarity::O
        } else {
            Polarity::P
        }
    }

    /// Root polarity of a par, the De Morgan dual of [`Polarity::tensor`].
    pub fn par(self, other: Polarity) -> Polarity {
        self.dual().tensor(other.dual()).dual()
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarity::P => f.write_str("P"),
            Polarity::O => f.write_str("O"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(String),
    NegAtom(String),
    Tensor(Box<Formula>, Box<Formula>),
    Par(Box<Formula>, Box<Formula>),
    Plus(Box<Formula>, Box<Formula>),
    With(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(name: &str) -> Formula {
        Formula::Atom(name.to_string())
    }

    pub fn neg_atom(name: &str) -> Formula {
        Formula::NegAtom(name.to_string())
    }

    pub fn tensor(a: Formula, b: Formula) -> Formula {
        Formula::Tensor(Box::new(a), Box::new(b))
    }

    pub fn par(a: Formula, b: Formula) -> Formula {
        Formula::Par(Box::new(a), Box::new(b))
    }

    pub fn plus(a: Formula, b: Formula) -> Formula {
        Formula::Plus(Box::new(a), Box::new(b))
    }

    pub fn with(a: Formula, b: Formula) -> Formula {
        Formula::With(Box::new(a), Box::new(b))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Formula::Atom(_) | Formula::NegAtom(_))
    }

    /// True when the formula only uses literals, tensor and par.
    pub fn is_multiplicative(&self) -> bool {
        match self {
            Formula::Atom(_) | Formula::NegAtom(_) => true,
            Formula::Tensor(a, b) | Formula::Par(a, b) => a.is_multiplicative() && b.is_multiplicative(),
            Formula::Plus(..) | Formula::With(..) => false,
        }
    }

    /// True when the formula only uses literals, plus and with.
    pub fn is_additive(&self) -> bool {
        match self {
            Formula::Atom(_) | Formula::NegAtom(_) => true,
            Formula::Plus(a, b) | Formula::With(a, b) => a.is_additive() && b.is_additive(),
            Formula::Tensor(..) | Formula::Par(..) => false,
        }
    }

    /// Literal occurrences, left to right.
    pub fn literals(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        self.collect_literals(&mut out);
        out
    }

    fn collect_literals<'a>(&'a self, out: &mut Vec<&'a Formula>) {
        match self {
            Formula::Atom(_) | Formula::NegAtom(_) => out.push(self),
            Formula::Tensor(a, b) | Formula::Par(a, b) | Formula::Plus(a, b) | Formula::With(a, b) => {
                a.collect_literals(out);
                b.collect_literals(out);
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::NegAtom(_) => 1,
            Formula::Tensor(a, b) | Formula::Par(a, b) | Formula::Plus(a, b) | Formula::With(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }
}

/// De Morgan dual with negation pushed to the atoms.
pub fn negate(f: &Formula) -> Formula {
    match f {
        Formula::Atom(a) => Formula::NegAtom(a.clone()),
        Formula::NegAtom(a) => Formula::Atom(a.clone()),
        Formula::Tensor(a, b) => Formula::par(negate(a), negate(b)),
        Formula::Par(a, b) => Formula::tensor(negate(a), negate(b)),
        Formula::Plus(a, b) => Formula::with(negate(a), negate(b)),
        Formula::With(a, b) => Formula::plus(negate(a), negate(b)),
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolarityError {
    #[error("atom `{0}` has no polarity assigned")]
    UnmappedAtom(String),
}

/// Polarity at the root of the game interpreting `f`.
pub fn root_polarity(f: &Formula, atom_pol: &HashMap<String, Polarity>) -> Result<Polarity, PolarityError> {
    let lookup = |name: &String| {
        atom_pol
            .get(name)
            .copied()
            .ok_or_else(|| PolarityError::UnmappedAtom(name.clone()))
    };
    Ok(match f {
        Formula::Atom(a) => lookup(a)?,
        Formula::NegAtom(a) => lookup(a)?.dual(),
        Formula::Plus(..) => Polarity::P,
        Formula::With(..) => Polarity::O,
        Formula::Tensor(a, b) => root_polarity(a, atom_pol)?.tensor(root_polarity(b, atom_pol)?),
        Formula::Par(a, b) => root_polarity(a, atom_pol)?.par(root_polarity(b, atom_pol)?),
    })
}

/// Root polarity with every atom read as the boolean game (a coproduct, so P).
pub fn default_root_polarity(f: &Formula) -> Polarity {
    match f {
        Formula::Atom(_) => Polarity::P,
        Formula::NegAtom(_) => Polarity::O,
        Formula::Plus(..) => Polarity::P,
        Formula::With(..) => Polarity::O,
        Formula::Tensor(a, b) => default_root_polarity(a).tensor(default_root_polarity(b)),
        Formula::Par(a, b) => default_root_polarity(a).par(default_root_polarity(b)),
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (op, a, b) = match self {
            Formula::Atom(a) => return f.write_str(a),
            Formula::NegAtom(a) => return write!(f, "~{a}"),
            Formula::Tensor(a, b) => ("*", a, b),
            Formula::Par(a, b) => ("|", a, b),
            Formula::Plus(a, b) => ("+", a, b),
            Formula::With(a, b) => ("&", a, b),
        };
        write!(f, "({a} {op} {b})")
    }
}

/// Canonical fully parenthesised text.
pub fn print_formula(f: &Formula) -> String {
    f.to_string()
}

/// A one-sided sequent. Order is kept for positional addressing of rules;
/// [`Sequent::multiset_eq`] gives the multiset reading.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sequent(pub Vec<Formula>);

impl Sequent {
    pub fn new(formulas: Vec<Formula>) -> Sequent {
        Sequent(formulas)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn formulas(&self) -> &[Formula] {
        &self.0
    }

    pub fn multiset_eq(&self, other: &Sequent) -> bool {
        multiset_eq(&self.0, &other.0)
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("|-")?;
        for (i, formula) in self.0.iter().enumerate() {
            if i == 0 {
                write!(f, " {formula}")?;
            } else {
                write!(f, ", {formula}")?;
            }
        }
        Ok(())
    }
}

pub fn multiset_eq<T: Ord + Clone>(a: &[T], b: &[T]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort();
    y.sort();
    x == y
}

/// Order-preserving matching of two multisets: `result[i]` is the index in
/// `actual` paired with `canonical[i]`. Equal items are paired in order.
pub fn match_positions<T: PartialEq>(canonical: &[T], actual: &[T]) -> Option<Vec<usize>> {
    if canonical.len() != actual.len() {
        return None;
    }
    let mut used = vec![false; actual.len()];
    let mut out = Vec::with_capacity(canonical.len());
    for item in canonical {
        let k = (0..actual.len()).find(|&k| !used[k] && actual[k] == *item)?;
        used[k] = true;
        out.push(k);
    }
    Some(out)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("syntax error at byte {offset}: expected one of {}", expected.join(", "))]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<String>,
}

impl ParseError {
    fn new(offset: usize, expected: &[&str]) -> ParseError {
        ParseError {
            offset,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) {
        if let Some(c) = self.src[self.pos..].chars().next() {
            self.pos += c.len_utf8();
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.src.as_bytes();
        if start >= bytes.len() || !bytes[start].is_ascii_lowercase() {
            return Err(ParseError::new(start, &["atom"]));
        }
        let mut end = start + 1;
        while end < bytes.len()
            && (bytes[end].is_ascii_lowercase() || bytes[end].is_ascii_digit() || bytes[end] == b'_')
        {
            end += 1;
        }
        self.pos = end;
        Ok(self.src[start..end].to_string())
    }

    fn operand(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some('~') => {
                self.bump();
                Ok(Formula::NegAtom(self.ident()?))
            }
            Some('(') => {
                self.bump();
                let f = self.formula()?;
                match self.peek() {
                    Some(')') => {
                        self.bump();
                        Ok(f)
                    }
                    _ => Err(ParseError::new(self.pos, &["')'"])),
                }
            }
            Some(c) if c.is_ascii_lowercase() => Ok(Formula::Atom(self.ident()?)),
            _ => Err(ParseError::new(self.pos, &["atom", "'~'", "'('"])),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let left = self.operand()?;
        let ctor: fn(Formula, Formula) -> Formula = match self.peek() {
            Some('*') => Formula::tensor,
            Some('|') => Formula::par,
            Some('+') => Formula::plus,
            Some('&') => Formula::with,
            _ => return Ok(left),
        };
        self.bump();
        let right = self.operand()?;
        if let Some('*' | '|' | '+' | '&') = self.peek() {
            // a second operator at the same level needs explicit parentheses
            return Err(ParseError::new(self.pos, &["')'", "end of input"]));
        }
        Ok(ctor(left, right))
    }
}

pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut cur = Cursor { src: text, pos: 0 };
    let f = cur.formula()?;
    if cur.peek().is_some() {
        return Err(ParseError::new(cur.pos, &["operator", "end of input"]));
    }
    Ok(f)
}

/// Parses `|- F1, ..., Fn`. The empty sequent `|-` is accepted here; checkers
/// reject it as an endsequent.
pub fn parse_sequent(text: &str) -> Result<Sequent, ParseError> {
    let mut cur = Cursor { src: text, pos: 0 };
    cur.skip_ws();
    if !cur.src[cur.pos..].starts_with("|-") {
        return Err(ParseError::new(cur.pos, &["'|-'"]));
    }
    cur.pos += 2;
    let mut formulas = Vec::new();
    if cur.peek().is_none() {
        return Ok(Sequent(formulas));
    }
    loop {
        formulas.push(cur.formula()?);
        match cur.peek() {
            Some(',') => cur.bump(),
            None => break,
            _ => return Err(ParseError::new(cur.pos, &["','", "end of input"])),
        }
    }
    Ok(Sequent(formulas))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a() -> Formula {
        Formula::atom("a")
    }

    #[test]
    fn parses_basic_forms() {
        assert_eq!(
            parse_formula("a * b").unwrap(),
            Formula::tensor(a(), Formula::atom("b"))
        );
        assert_eq!(
            parse_formula("~a + ~a").unwrap(),
            Formula::plus(Formula::neg_atom("a"), Formula::neg_atom("a"))
        );
        assert_eq!(parse_formula("  (a)  ").unwrap(), a());
    }

    #[test]
    fn reports_offsets() {
        let err = parse_formula("a & (b").unwrap_err();
        assert_eq!(err.offset, 6);
        assert!(err.expected.contains(&"')'".to_string()));
        assert!(parse_formula("a * b * c").is_err());
        assert!(parse_formula("~(a)").is_err());
        assert!(parse_formula("A").is_err());
        assert_eq!(parse_formula("").unwrap_err().offset, 0);
    }

    #[test]
    fn negation_examples() {
        let t = parse_formula("a * b").unwrap();
        assert_eq!(negate(&t), parse_formula("~a | ~b").unwrap());
        assert_eq!(negate(&a()), Formula::neg_atom("a"));
        let f = parse_formula("a & (b + c)").unwrap();
        assert_eq!(negate(&f), parse_formula("~a + (~b & ~c)").unwrap());
    }

    #[test]
    fn printing() {
        assert_eq!(print_formula(&a()), "a");
        assert_eq!(print_formula(&Formula::par(Formula::neg_atom("a"), a())), "(~a | a)");
        assert_eq!(print_formula(&negate(&parse_formula("a*b").unwrap())), "(~a | ~b)");
    }

    #[test]
    fn polarity_tables() {
        use Polarity::*;
        let rows = [(P, P, P), (P, O, P), (O, P, P), (O, O, O)];
        for (g, h, t) in rows {
            assert_eq!(g.tensor(h), t);
        }
        // par by brute force over the dual table
        for g in [P, O] {
            for h in [P, O] {
                let expected = if g == P && h == P { P } else { O };
                assert_eq!(g.par(h), expected);
            }
        }
        let mut pol = HashMap::new();
        pol.insert("a".to_string(), O);
        pol.insert("b".to_string(), P);
        let f = parse_formula("~b | ~a").unwrap();
        // ~b is O, ~a is P
        assert_eq!(root_polarity(&f, &pol).unwrap(), O);
        let g = parse_formula("a * a").unwrap();
        assert_eq!(root_polarity(&g, &pol).unwrap(), O);
        assert_eq!(root_polarity(&parse_formula("a + c").unwrap(), &pol).unwrap(), P);
        assert_eq!(
            root_polarity(&parse_formula("c * a").unwrap(), &pol),
            Err(PolarityError::UnmappedAtom("c".into()))
        );
    }

    #[test]
    fn sequents() {
        let s = parse_sequent("|- ~a + ~a, a + a").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.to_string(), "|- (~a + ~a), (a + a)");
        assert_eq!(parse_sequent(&s.to_string()).unwrap(), s);
        let t = Sequent(vec![s.0[1].clone(), s.0[0].clone()]);
        assert!(s.multiset_eq(&t));
        assert!(parse_sequent("|-").unwrap().is_empty());
        assert_eq!(match_positions(&[1, 2, 1], &[2, 1, 1]), Some(vec![1, 0, 2]));
        assert_eq!(match_positions(&[1, 2], &[2, 2]), None);
    }
}
