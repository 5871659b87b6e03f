//! The focussed calculus over positive formulas, with stoup sequents
//! `Γ |- Δ ; Σ`.
//!
//! Positive formulas are atoms, shifted negations `~P`, `P + Q` and `P * Q`,
//! with the same parenthesisation rules as MALL formulas. The stoup holds at
//! most one formula, and only when every formula on the left is an atom.
//!
//! Proof file rules: `(id a)`, `(foc i p)`, `(shiftR p)`, `(shiftL i p)`,
//! `(cutS p1 p2)`, `(cutR P p1 p2)`, `(tensorS p1 p2)`, `(tensorL i p)`,
//! `(plusSL p)`, `(plusSR p)`, `(plusL i p1 p2)` and `(proves "<sequent>" p)`.
//! Indices address the principal formula: in Δ for `foc`, in Γ otherwise.

use std::fmt;

use thiserror::Error;

use super::sexpr::{arity, as_number, head_args, read_sexpr, SExpr, SexprError};
use super::{NodePath, NodeVerdict};
use crate::logic::{multiset_eq, ParseError};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PosFormula {
    Atom(String),
    ShiftNeg(Box<PosFormula>),
    PlusP(Box<PosFormula>, Box<PosFormula>),
    TensorP(Box<PosFormula>, Box<PosFormula>),
}

impl PosFormula {
    pub fn atom(a: &str) -> PosFormula {
        PosFormula::Atom(a.to_string())
    }

    pub fn shift(p: PosFormula) -> PosFormula {
        PosFormula::ShiftNeg(Box::new(p))
    }

    pub fn plus(a: PosFormula, b: PosFormula) -> PosFormula {
        PosFormula::PlusP(Box::new(a), Box::new(b))
    }

    pub fn tensor(a: PosFormula, b: PosFormula) -> PosFormula {
        PosFormula::TensorP(Box::new(a), Box::new(b))
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, PosFormula::Atom(_))
    }
}

impl fmt::Display for PosFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PosFormula::Atom(a) => f.write_str(a),
            PosFormula::ShiftNeg(p) => write!(f, "~{p}"),
            PosFormula::PlusP(a, b) => write!(f, "({a} + {b})"),
            PosFormula::TensorP(a, b) => write!(f, "({a} * {b})"),
        }
    }
}

struct Reader<'a> {
    src: &'a str,
    pos: usize,
}

impl Reader<'_> {
    fn peek(&mut self) -> Option<char> {
        let rest = &self.src[self.pos..];
        let trimmed = rest.trim_start();
        self.pos += rest.len() - trimmed.len();
        trimmed.chars().next()
    }

    fn err(&self, expected: &[&str]) -> ParseError {
        ParseError {
            offset: self.pos,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn operand(&mut self) -> Result<PosFormula, ParseError> {
        match self.peek() {
            Some('~') => {
                self.pos += 1;
                Ok(PosFormula::shift(self.operand()?))
            }
            Some('↓') => {
                // the explicit shift spelling `↓~P`
                self.pos += '↓'.len_utf8();
                match self.peek() {
                    Some('~') => {
                        self.pos += 1;
                        Ok(PosFormula::shift(self.operand()?))
                    }
                    _ => Err(self.err(&["'~'"])),
                }
            }
            Some('(') => {
                self.pos += 1;
                let f = self.formula()?;
                match self.peek() {
                    Some(')') => {
                        self.pos += 1;
                        Ok(f)
                    }
                    _ => Err(self.err(&["')'"])),
                }
            }
            Some(c) if c.is_ascii_lowercase() => {
                let start = self.pos;
                let bytes = self.src.as_bytes();
                let mut end = start;
                while end < bytes.len()
                    && (bytes[end].is_ascii_lowercase() || bytes[end].is_ascii_digit() || bytes[end] == b'_')
                {
                    end += 1;
                }
                self.pos = end;
                Ok(PosFormula::Atom(self.src[start..end].to_string()))
            }
            _ => Err(self.err(&["atom", "'~'", "'('"])),
        }
    }

    fn formula(&mut self) -> Result<PosFormula, ParseError> {
        let left = self.operand()?;
        let ctor: fn(PosFormula, PosFormula) -> PosFormula = match self.peek() {
            Some('+') => PosFormula::plus,
            Some('*') => PosFormula::tensor,
            _ => return Ok(left),
        };
        self.pos += 1;
        let right = self.operand()?;
        if let Some('+' | '*') = self.peek() {
            return Err(self.err(&["')'", "end of input"]));
        }
        Ok(ctor(left, right))
    }
}

pub fn parse_pos_formula(text: &str) -> Result<PosFormula, ParseError> {
    let mut r = Reader { src: text, pos: 0 };
    let f = r.formula()?;
    if r.peek().is_some() {
        return Err(r.err(&["operator", "end of input"]));
    }
    Ok(f)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct FocSequent {
    pub gamma: Vec<PosFormula>,
    pub delta: Vec<PosFormula>,
    pub stoup: Option<PosFormula>,
}

impl FocSequent {
    pub fn new(gamma: Vec<PosFormula>, delta: Vec<PosFormula>, stoup: Option<PosFormula>) -> FocSequent {
        FocSequent { gamma, delta, stoup }
    }

    pub fn stoup_ok(&self) -> bool {
        self.stoup.is_none() || self.gamma.iter().all(PosFormula::is_atom)
    }

    pub fn multiset_eq(&self, other: &FocSequent) -> bool {
        multiset_eq(&self.gamma, &other.gamma) && multiset_eq(&self.delta, &other.delta) && self.stoup == other.stoup
    }
}

fn join(fs: &[PosFormula]) -> String {
    fs.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(", ")
}

impl fmt::Display for FocSequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.gamma.is_empty() {
            write!(f, "{} ", join(&self.gamma))?;
        }
        f.write_str("|-")?;
        if !self.delta.is_empty() {
            write!(f, " {}", join(&self.delta))?;
        }
        f.write_str(" ;")?;
        if let Some(s) = &self.stoup {
            write!(f, " {s}")?;
        }
        Ok(())
    }
}

fn parse_list(text: &str, base: usize) -> Result<Vec<PosFormula>, ParseError> {
    if text.trim().is_empty() {
        return Ok(vec![]);
    }
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (k, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(parse_pos_formula(&text[start..k]).map_err(|e| shift_err(e, base + start))?);
                start = k + 1;
            }
            _ => {}
        }
    }
    out.push(parse_pos_formula(&text[start..]).map_err(|e| shift_err(e, base + start))?);
    Ok(out)
}

fn shift_err(mut e: ParseError, by: usize) -> ParseError {
    e.offset += by;
    e
}

/// Parses `Γ |- Δ ; Σ`; the `;` may be omitted when the stoup is empty.
pub fn parse_foc_sequent(text: &str) -> Result<FocSequent, ParseError> {
    let turnstile = text.find("|-").ok_or(ParseError {
        offset: 0,
        expected: vec!["'|-'".into()],
    })?;
    let gamma = parse_list(&text[..turnstile], 0)?;
    let right_start = turnstile + 2;
    let right = &text[right_start..];
    let (delta_text, stoup_text) = match right.find(';') {
        Some(k) => (&right[..k], Some((&right[k + 1..], right_start + k + 1))),
        None => (right, None),
    };
    let delta = parse_list(delta_text, right_start)?;
    let stoup = match stoup_text {
        Some((t, base)) if !t.trim().is_empty() => Some(parse_pos_formula(t).map_err(|e| shift_err(e, base))?),
        _ => None,
    };
    Ok(FocSequent { gamma, delta, stoup })
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FocRule {
    /// Cut against the stoup formula of the left premise.
    CutStoup,
    /// Cut against a formula on the right of the left premise.
    CutRight(PosFormula),
    Id,
    /// `index` addresses the focussed formula in Δ of the conclusion.
    Foc(usize),
    ShiftR,
    ShiftL(usize),
    TensorStoup,
    TensorL(usize),
    PlusStoupL,
    PlusStoupR,
    PlusL(usize),
}

impl FocRule {
    pub fn arity(&self) -> usize {
        match self {
            FocRule::Id => 0,
            FocRule::CutStoup | FocRule::CutRight(_) | FocRule::TensorStoup | FocRule::PlusL(_) => 2,
            _ => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FocRule::CutStoup => "cutS",
            FocRule::CutRight(_) => "cutR",
            FocRule::Id => "id",
            FocRule::Foc(_) => "foc",
            FocRule::ShiftR => "shiftR",
            FocRule::ShiftL(_) => "shiftL",
            FocRule::TensorStoup => "tensorS",
            FocRule::TensorL(_) => "tensorL",
            FocRule::PlusStoupL => "plusSL",
            FocRule::PlusStoupR => "plusSR",
            FocRule::PlusL(_) => "plusL",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FocProof {
    pub rule: FocRule,
    pub premises: Vec<FocProof>,
    pub conclusion: FocSequent,
}

impl FocProof {
    /// Pre-order list of node paths, rule names and sequents.
    pub fn nodes(&self) -> Vec<(NodePath, &'static str, FocSequent)> {
        let mut out = Vec::new();
        fn walk(p: &FocProof, path: &mut Vec<usize>, out: &mut Vec<(NodePath, &'static str, FocSequent)>) {
            out.push((NodePath(path.clone()), p.rule.name(), p.conclusion.clone()));
            for (k, q) in p.premises.iter().enumerate() {
                path.push(k);
                walk(q, path, out);
                path.pop();
            }
        }
        walk(self, &mut Vec::new(), &mut out);
        out
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FocError {
    #[error(
        "at {path}: stoup constraint violated in {sequent}: the stoup is filled but the left side is not all atoms"
    )]
    StoupViolation { path: NodePath, sequent: String },
    #[error("at {path}: rule {rule} takes {expected} premise(s), found {found}")]
    Arity {
        path: NodePath,
        rule: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("at {path}: rule {rule} does not apply: expected {expected}, found {found}")]
    RuleMismatch {
        path: NodePath,
        rule: &'static str,
        expected: String,
        found: String,
    },
}

/// Checks the stoup constraint on every sequent of the tree, then every rule
/// instance; returns the endsequent.
pub fn check_foc(p: &FocProof) -> Result<FocSequent, FocError> {
    for (path, _, seq) in p.nodes() {
        if !seq.stoup_ok() {
            return Err(FocError::StoupViolation {
                path,
                sequent: seq.to_string(),
            });
        }
    }
    check_rules(p, &mut Vec::new())?;
    Ok(p.conclusion.clone())
}

fn remove_one(fs: &[PosFormula], f: &PosFormula) -> Option<Vec<PosFormula>> {
    let k = fs.iter().position(|g| g == f)?;
    let mut v = fs.to_vec();
    v.remove(k);
    Some(v)
}

fn plus(a: &[PosFormula], b: &[PosFormula]) -> Vec<PosFormula> {
    let mut v = a.to_vec();
    v.extend(b.iter().cloned());
    v
}

fn check_rules(p: &FocProof, path: &mut Vec<usize>) -> Result<(), FocError> {
    for (k, q) in p.premises.iter().enumerate() {
        path.push(k);
        check_rules(q, path)?;
        path.pop();
    }
    check_rule_at(p, NodePath(path.clone()))
}

/// One verdict per node, in pre-order, each judging only the rule instance
/// and stoup constraint at that node.
pub fn check_foc_nodes(p: &FocProof) -> Vec<NodeVerdict> {
    let mut out = Vec::new();
    fn walk(p: &FocProof, path: &mut Vec<usize>, out: &mut Vec<NodeVerdict>) {
        let here = NodePath(path.clone());
        let err = if p.conclusion.stoup_ok() {
            check_rule_at(p, here.clone()).err()
        } else {
            Some(FocError::StoupViolation {
                path: here.clone(),
                sequent: p.conclusion.to_string(),
            })
        };
        out.push(NodeVerdict {
            path: here,
            rule: p.rule.name(),
            sequent: p.conclusion.to_string(),
            error: err.map(|e| e.to_string()),
        });
        for (k, q) in p.premises.iter().enumerate() {
            path.push(k);
            walk(q, path, out);
            path.pop();
        }
    }
    walk(p, &mut Vec::new(), &mut out);
    out
}

fn check_rule_at(p: &FocProof, here: NodePath) -> Result<(), FocError> {
    if p.premises.len() != p.rule.arity() {
        return Err(FocError::Arity {
            path: here,
            rule: p.rule.name(),
            expected: p.rule.arity(),
            found: p.premises.len(),
        });
    }
    let c = &p.conclusion;
    let fail = |expected: String| FocError::RuleMismatch {
        path: here.clone(),
        rule: p.rule.name(),
        expected,
        found: c.to_string(),
    };
    let prem = |k: usize| &p.premises[k].conclusion;
    let expect = |want: FocSequent| -> Result<(), FocError> {
        if c.multiset_eq(&want) {
            Ok(())
        } else {
            Err(fail(want.to_string()))
        }
    };
    match &p.rule {
        FocRule::Id => match (&c.gamma[..], &c.delta[..], &c.stoup) {
            ([PosFormula::Atom(a)], [], Some(PosFormula::Atom(b))) if a == b => Ok(()),
            _ => Err(fail("a |- ; a for an atom a".into())),
        },
        FocRule::Foc(i) => {
            let s = prem(0);
            let Some(f) = s.stoup.clone() else {
                return Err(fail(format!("a premise with a filled stoup, got {s}")));
            };
            if c.delta.get(*i) != Some(&f) {
                return Err(fail(format!("{f} at position {i} of the right side")));
            }
            expect(FocSequent::new(s.gamma.clone(), plus(&s.delta, &[f]), None))
        }
        FocRule::ShiftR => {
            let Some(PosFormula::ShiftNeg(inner)) = &c.stoup else {
                return Err(fail("a shifted negation in the stoup".into()));
            };
            let s = prem(0);
            let want_prem = FocSequent::new(plus(&c.gamma, &[(**inner).clone()]), c.delta.clone(), None);
            if s.multiset_eq(&want_prem) {
                Ok(())
            } else {
                Err(fail(format!("premise {want_prem}, got {s}")))
            }
        }
        FocRule::ShiftL(i) => {
            let Some(PosFormula::ShiftNeg(inner)) = c.gamma.get(*i) else {
                return Err(fail(format!("a shifted negation at position {i} of the left side")));
            };
            let mut g = c.gamma.clone();
            g.remove(*i);
            let want_prem = FocSequent::new(g, plus(&c.delta, &[(**inner).clone()]), None);
            if c.stoup.is_none() && prem(0).multiset_eq(&want_prem) {
                Ok(())
            } else {
                Err(fail(format!("premise {want_prem}, got {}", prem(0))))
            }
        }
        FocRule::TensorL(i) => {
            let Some(PosFormula::TensorP(a, b)) = c.gamma.get(*i) else {
                return Err(fail(format!("a tensor at position {i} of the left side")));
            };
            let mut g = c.gamma.clone();
            g.remove(*i);
            let want_prem = FocSequent::new(plus(&g, &[(**a).clone(), (**b).clone()]), c.delta.clone(), None);
            if c.stoup.is_none() && prem(0).multiset_eq(&want_prem) {
                Ok(())
            } else {
                Err(fail(format!("premise {want_prem}, got {}", prem(0))))
            }
        }
        FocRule::PlusL(i) => {
            let Some(PosFormula::PlusP(a, b)) = c.gamma.get(*i) else {
                return Err(fail(format!("a plus at position {i} of the left side")));
            };
            let mut g = c.gamma.clone();
            g.remove(*i);
            for (k, part) in [a, b].into_iter().enumerate() {
                let want_prem = FocSequent::new(plus(&g, &[(**part).clone()]), c.delta.clone(), None);
                if c.stoup.is_some() || !prem(k).multiset_eq(&want_prem) {
                    return Err(fail(format!("premise {want_prem}, got {}", prem(k))));
                }
            }
            Ok(())
        }
        FocRule::PlusStoupL | FocRule::PlusStoupR => {
            let Some(PosFormula::PlusP(a, b)) = &c.stoup else {
                return Err(fail("a plus in the stoup".into()));
            };
            let part = if p.rule == FocRule::PlusStoupL { a } else { b };
            let want_prem = FocSequent::new(c.gamma.clone(), c.delta.clone(), Some((**part).clone()));
            if prem(0).multiset_eq(&want_prem) {
                Ok(())
            } else {
                Err(fail(format!("premise {want_prem}, got {}", prem(0))))
            }
        }
        FocRule::TensorStoup => {
            let (l, r) = (prem(0), prem(1));
            let (Some(a), Some(b)) = (&l.stoup, &r.stoup) else {
                return Err(fail("premises with filled stoups".into()));
            };
            expect(FocSequent::new(
                plus(&l.gamma, &r.gamma),
                plus(&l.delta, &r.delta),
                Some(PosFormula::tensor(a.clone(), b.clone())),
            ))
        }
        FocRule::CutStoup => {
            let (l, r) = (prem(0), prem(1));
            let Some(f) = &l.stoup else {
                return Err(fail("a left premise with a filled stoup".into()));
            };
            let Some(g2) = remove_one(&r.gamma, f) else {
                return Err(fail(format!("{f} on the left of the right premise")));
            };
            if r.stoup.is_some() {
                return Err(fail("an empty stoup in the right premise".into()));
            }
            expect(FocSequent::new(plus(&l.gamma, &g2), plus(&l.delta, &r.delta), None))
        }
        FocRule::CutRight(f) => {
            let (l, r) = (prem(0), prem(1));
            let (Some(d1), Some(g2)) = (remove_one(&l.delta, f), remove_one(&r.gamma, f)) else {
                return Err(fail(format!(
                    "{f} on the right of the left premise and on the left of the right premise"
                )));
            };
            if l.stoup.is_some() || r.stoup.is_some() {
                return Err(fail("premises with empty stoups".into()));
            }
            expect(FocSequent::new(plus(&l.gamma, &g2), plus(&d1, &r.delta), None))
        }
    }
}

fn pos_formula_of(e: &SExpr) -> Result<PosFormula, SexprError> {
    let text = e.text();
    parse_pos_formula(&text).map_err(|source| SexprError::Formula { text, source })
}

fn need<'a>(expected: Option<&'a FocSequent>, head: &str) -> Result<&'a FocSequent, SexprError> {
    expected.ok_or_else(|| {
        SexprError::Elaboration(format!(
            "`{head}` needs its conclusion; wrap it in (proves \"...\" ...)"
        ))
    })
}

fn fit(p: FocProof, expected: Option<&FocSequent>) -> Result<FocProof, SexprError> {
    match expected {
        None => Ok(p),
        Some(s) if s.multiset_eq(&p.conclusion) => Ok(FocProof {
            conclusion: s.clone(),
            ..p
        }),
        Some(s) => Err(SexprError::Elaboration(format!(
            "annotated {s} but the proof concludes {}",
            p.conclusion
        ))),
    }
}

fn node(rule: FocRule, premises: Vec<FocProof>, conclusion: FocSequent) -> FocProof {
    FocProof {
        rule,
        premises,
        conclusion,
    }
}

fn unary<'a>(head: &str, args: &'a [SExpr], indexed: bool) -> Result<(usize, &'a SExpr), SexprError> {
    match (indexed, args) {
        (true, [i, p]) => Ok((as_number(i)?, p)),
        (false, [p]) => Ok((0, p)),
        _ => Err(arity(
            head,
            if indexed { "an index and 1 proof" } else { "1 proof" },
            args.len(),
        )),
    }
}

/// Builds a focussed proof, pushing known conclusions upwards and
/// synthesizing the rest from the leaves.
pub(crate) fn elaborate(e: &SExpr, expected: Option<&FocSequent>) -> Result<FocProof, SexprError> {
    let (head, args) = head_args(e)?;
    match head {
        "proves" => {
            let [s, p] = args else {
                return Err(arity(head, "a sequent and a proof", args.len()));
            };
            let text = match s {
                SExpr::Str(t, _) => t.clone(),
                other => other.text(),
            };
            let seq = parse_foc_sequent(&text).map_err(|err| SexprError::Sequent {
                text: text.clone(),
                message: err.to_string(),
            })?;
            let p = elaborate(p, Some(&seq))?;
            fit(p, expected)
        }
        "id" => {
            let [a] = args else {
                return Err(arity(head, "1 atom", args.len()));
            };
            let a = pos_formula_of(a)?;
            let p = node(FocRule::Id, vec![], FocSequent::new(vec![a.clone()], vec![], Some(a)));
            fit(p, expected)
        }
        "foc" => {
            let (i, sub) = unary(head, args, true)?;
            match expected {
                Some(c) => {
                    let f = c.delta.get(i).cloned().ok_or_else(|| {
                        SexprError::Elaboration(format!("no formula at position {i} of the right of {c}"))
                    })?;
                    let mut d = c.delta.clone();
                    d.remove(i);
                    let q = elaborate(sub, Some(&FocSequent::new(c.gamma.clone(), d, Some(f))))?;
                    Ok(node(FocRule::Foc(i), vec![q], c.clone()))
                }
                None => {
                    let q = elaborate(sub, None)?;
                    let s = q.conclusion.clone();
                    let f = s
                        .stoup
                        .clone()
                        .ok_or_else(|| SexprError::Elaboration("foc over an empty stoup".into()))?;
                    let i = i.min(s.delta.len());
                    let mut d = s.delta.clone();
                    d.insert(i, f);
                    Ok(node(FocRule::Foc(i), vec![q], FocSequent::new(s.gamma, d, None)))
                }
            }
        }
        "shiftR" => {
            let (_, sub) = unary(head, args, false)?;
            match expected {
                Some(c) => {
                    let Some(PosFormula::ShiftNeg(inner)) = &c.stoup else {
                        return Err(SexprError::Elaboration(format!(
                            "no shifted negation in the stoup of {c}"
                        )));
                    };
                    let prem = FocSequent::new(plus(&c.gamma, &[(**inner).clone()]), c.delta.clone(), None);
                    let q = elaborate(sub, Some(&prem))?;
                    Ok(node(FocRule::ShiftR, vec![q], c.clone()))
                }
                None => {
                    let q = elaborate(sub, None)?;
                    let mut g = q.conclusion.gamma.clone();
                    let f = g
                        .pop()
                        .ok_or_else(|| SexprError::Elaboration("shiftR over an empty left side".into()))?;
                    let c = FocSequent::new(g, q.conclusion.delta.clone(), Some(PosFormula::shift(f)));
                    Ok(node(FocRule::ShiftR, vec![q], c))
                }
            }
        }
        "shiftL" | "tensorL" => {
            let (i, sub) = unary(head, args, true)?;
            let shift = head == "shiftL";
            match expected {
                Some(c) => {
                    let mut g = c.gamma.clone();
                    let prem = match (shift, c.gamma.get(i)) {
                        (true, Some(PosFormula::ShiftNeg(inner))) => {
                            g.remove(i);
                            FocSequent::new(g, plus(&c.delta, &[(**inner).clone()]), None)
                        }
                        (false, Some(PosFormula::TensorP(a, b))) => {
                            g.remove(i);
                            FocSequent::new(plus(&g, &[(**a).clone(), (**b).clone()]), c.delta.clone(), None)
                        }
                        _ => {
                            return Err(SexprError::Elaboration(format!(
                                "`{head}` finds no matching formula at position {i} of {c}"
                            )))
                        }
                    };
                    let q = elaborate(sub, Some(&prem))?;
                    let rule = if shift { FocRule::ShiftL(i) } else { FocRule::TensorL(i) };
                    Ok(node(rule, vec![q], c.clone()))
                }
                None => {
                    let q = elaborate(sub, None)?;
                    let s = q.conclusion.clone();
                    let (mut g, d, f) = if shift {
                        let mut d = s.delta.clone();
                        let f = d
                            .pop()
                            .ok_or_else(|| SexprError::Elaboration("shiftL over an empty right side".into()))?;
                        (s.gamma.clone(), d, PosFormula::shift(f))
                    } else {
                        let mut g = s.gamma.clone();
                        let (Some(b), Some(a)) = (g.pop(), g.pop()) else {
                            return Err(SexprError::Elaboration("tensorL needs two formulas on the left".into()));
                        };
                        (g, s.delta.clone(), PosFormula::tensor(a, b))
                    };
                    let i = i.min(g.len());
                    g.insert(i, f);
                    let rule = if shift { FocRule::ShiftL(i) } else { FocRule::TensorL(i) };
                    Ok(node(rule, vec![q], FocSequent::new(g, d, None)))
                }
            }
        }
        "plusSL" | "plusSR" => {
            let (_, sub) = unary(head, args, false)?;
            let c = need(expected, head)?;
            let Some(PosFormula::PlusP(a, b)) = &c.stoup else {
                return Err(SexprError::Elaboration(format!("no plus in the stoup of {c}")));
            };
            let left = head == "plusSL";
            let part = if left { a } else { b };
            let prem = FocSequent::new(c.gamma.clone(), c.delta.clone(), Some((**part).clone()));
            let q = elaborate(sub, Some(&prem))?;
            let rule = if left { FocRule::PlusStoupL } else { FocRule::PlusStoupR };
            Ok(node(rule, vec![q], c.clone()))
        }
        "plusL" => {
            let [i, l, r] = args else {
                return Err(arity(head, "an index and 2 proofs", args.len()));
            };
            let i = as_number(i)?;
            let c = need(expected, head)?;
            let Some(PosFormula::PlusP(a, b)) = c.gamma.get(i) else {
                return Err(SexprError::Elaboration(format!(
                    "no plus at position {i} of the left of {c}"
                )));
            };
            let mut g = c.gamma.clone();
            g.remove(i);
            let pl = FocSequent::new(plus(&g, &[(**a).clone()]), c.delta.clone(), None);
            let pr = FocSequent::new(plus(&g, &[(**b).clone()]), c.delta.clone(), None);
            let l = elaborate(l, Some(&pl))?;
            let r = elaborate(r, Some(&pr))?;
            Ok(node(FocRule::PlusL(i), vec![l, r], c.clone()))
        }
        "tensorS" | "cutS" => {
            let [l, r] = args else {
                return Err(arity(head, "2 proofs", args.len()));
            };
            let l = elaborate(l, None)?;
            let r = elaborate(r, None)?;
            let (ls, rs) = (&l.conclusion, &r.conclusion);
            let c = if head == "tensorS" {
                let (Some(a), Some(b)) = (&ls.stoup, &rs.stoup) else {
                    return Err(SexprError::Elaboration("tensorS needs filled stoups".into()));
                };
                FocSequent::new(
                    plus(&ls.gamma, &rs.gamma),
                    plus(&ls.delta, &rs.delta),
                    Some(PosFormula::tensor(a.clone(), b.clone())),
                )
            } else {
                let Some(f) = &ls.stoup else {
                    return Err(SexprError::Elaboration("cutS needs a filled stoup on the left".into()));
                };
                let g2 = remove_one(&rs.gamma, f)
                    .ok_or_else(|| SexprError::Elaboration(format!("cutS: {f} missing on the left of {rs}")))?;
                FocSequent::new(plus(&ls.gamma, &g2), plus(&ls.delta, &rs.delta), None)
            };
            let rule = if head == "tensorS" {
                FocRule::TensorStoup
            } else {
                FocRule::CutStoup
            };
            fit(node(rule, vec![l, r], c), expected)
        }
        "cutR" => {
            let [f, l, r] = args else {
                return Err(arity(head, "a formula and 2 proofs", args.len()));
            };
            let f = pos_formula_of(f)?;
            let l = elaborate(l, None)?;
            let r = elaborate(r, None)?;
            let (ls, rs) = (&l.conclusion, &r.conclusion);
            let (Some(d1), Some(g2)) = (remove_one(&ls.delta, &f), remove_one(&rs.gamma, &f)) else {
                return Err(SexprError::Elaboration(format!("cutR: {f} missing from {ls} or {rs}")));
            };
            let c = FocSequent::new(plus(&ls.gamma, &g2), plus(&d1, &rs.delta), None);
            fit(node(FocRule::CutRight(f), vec![l, r], c), expected)
        }
        other => Err(SexprError::UnknownRule(other.to_string())),
    }
}

pub fn parse_foc(text: &str) -> Result<FocProof, SexprError> {
    elaborate(&read_sexpr(text)?, None)
}

/// Prints with a `proves` annotation on every node, which always re-parses.
pub fn print_foc(p: &FocProof) -> String {
    fn go(p: &FocProof, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        let head = match &p.rule {
            FocRule::Id => format!("(id {})", p.conclusion.gamma[0]),
            FocRule::Foc(i) => format!("(foc {i}"),
            FocRule::ShiftL(i) => format!("(shiftL {i}"),
            FocRule::TensorL(i) => format!("(tensorL {i}"),
            FocRule::PlusL(i) => format!("(plusL {i}"),
            FocRule::CutRight(f) => format!("(cutR {f}"),
            other => format!("({}", other.name()),
        };
        out.push_str(&format!("{pad}(proves \"{}\"\n{pad}  {head}", p.conclusion));
        for q in &p.premises {
            out.push('\n');
            go(q, depth + 2, out);
        }
        if p.rule != FocRule::Id {
            out.push(')');
        }
        out.push(')');
    }
    let mut out = String::new();
    go(p, 0, &mut out);
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> FocSequent {
        parse_foc_sequent(s).unwrap()
    }

    #[test]
    fn node_verdicts_cover_every_node() {
        let good =
            parse_foc(r#"(proves "|- ~a + a, a + a ;" (foc 0 (plusSL (shiftR (foc 0 (plusSR (id a)))))))"#).unwrap();
        let v = check_foc_nodes(&good);
        assert_eq!(v.len(), good.nodes().len());
        assert!(v.iter().all(|n| n.error.is_none()));
        let bad = parse_foc(r#"(proves "~(~a + ~a) |- ; ~(~a) + b" (plusSL (shiftR (shiftL 0 (proves "~a |- ~a + ~a ;" (shiftL 0 (proves "|- a, ~a + ~a ;" (foc 1 (plusSL (shiftR (foc 0 (id a))))))))))))"#).unwrap();
        let v = check_foc_nodes(&bad);
        assert!(check_foc(&bad).is_err());
        assert!(v[0].error.as_deref().unwrap().contains("stoup"));
    }

    #[test]
    fn formula_syntax() {
        let f = parse_pos_formula("~(~a + ~a)").unwrap();
        assert_eq!(
            f,
            PosFormula::shift(PosFormula::plus(
                PosFormula::shift(PosFormula::atom("a")),
                PosFormula::shift(PosFormula::atom("a"))
            ))
        );
        assert_eq!(f.to_string(), "~(~a + ~a)");
        assert_eq!(parse_pos_formula("↓~a").unwrap(), parse_pos_formula("~a").unwrap());
        assert!(parse_pos_formula("a + b + c").is_err());
        assert!(parse_pos_formula("a & b").is_err());
    }

    #[test]
    fn sequent_syntax() {
        let s = seq("a, ~a + ~a |- ;");
        assert_eq!(s.gamma.len(), 2);
        assert!(s.delta.is_empty() && s.stoup.is_none());
        assert_eq!(seq("a |- ; a").to_string(), "a |- ; a");
        assert_eq!(seq("|- ~a + a, a + a ;").to_string(), "|- (~a + a), (a + a) ;");
        assert!(!seq("~(~a + ~a) |- ; ~(~a) + b").stoup_ok());
        assert_eq!(seq("a |- b"), seq("a |- b ;"));
    }

    #[test]
    fn identity_rule() {
        let p = parse_foc("(id a)").unwrap();
        assert_eq!(check_foc(&p).unwrap(), seq("a |- ; a"));
        let bad = node(FocRule::Id, vec![], seq("a |- ; b"));
        assert!(matches!(check_foc(&bad), Err(FocError::RuleMismatch { .. })));
    }

    #[test]
    fn stoup_checked_everywhere() {
        let p = parse_foc(r#"(proves "~(~a + ~a) |- ; ~(~a) + b" (plusSL (shiftR (shiftL 0 (proves "~a |- ~a + ~a ;" (shiftL 0 (proves "|- a, ~a + ~a ;" (foc 1 (plusSL (shiftR (foc 0 (id a))))))))))))"#).unwrap();
        match check_foc(&p) {
            Err(FocError::StoupViolation { path, .. }) => assert_eq!(path, NodePath(vec![])),
            other => panic!("expected a stoup violation, got {other:?}"),
        }
    }

    #[test]
    fn print_round_trip() {
        let p =
            parse_foc(r#"(proves "|- ~a + a, a + a ;" (foc 0 (plusSL (shiftR (foc 0 (plusSR (id a)))))))"#).unwrap();
        check_foc(&p).unwrap();
        assert_eq!(parse_foc(&print_foc(&p)).unwrap(), p);
    }
}
