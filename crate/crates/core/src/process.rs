//! A small process calculus over cells holding persistent values, with a
//! reduction semantics and a denotation as closures on boards.
//!
//! Text syntax, loosest binding first:
//!
//! ```text
//! P ::= P || P | new c. P | rec X. P | c?x -> P | c!e | 0 | TOP | X | (P)
//! ```
//!
//! `new` and `rec` scope as far right as possible; an input prefix binds
//! tighter than `||`. Cells are naturals or `l<n>`/`r<n>`; values are
//! naturals; `#` starts a comment.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::cgames::{sequent_dom, ClosureOp, Dom, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cell {
    Num(u64),
    Left(u64),
    Right(u64),
    /// A restricted cell after renaming apart.
    Hidden(u64),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(n) => write!(f, "{n}"),
            Cell::Left(n) => write!(f, "l{n}"),
            Cell::Right(n) => write!(f, "r{n}"),
            Cell::Hidden(n) => write!(f, "_{n}"),
        }
    }
}

impl FromStr for Cell {
    type Err = ProcError;

    fn from_str(s: &str) -> Result<Cell, ProcError> {
        let bad = || ProcError::Parse {
            offset: 0,
            expected: "a cell".into(),
        };
        let num = |t: &str| t.parse::<u64>().map_err(|_| bad());
        match s.as_bytes().first() {
            Some(b'l') => Ok(Cell::Left(num(&s[1..])?)),
            Some(b'r') => Ok(Cell::Right(num(&s[1..])?)),
            Some(b'_') => Ok(Cell::Hidden(num(&s[1..])?)),
            _ => Ok(Cell::Num(num(s)?)),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Val(u64),
    Var(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Proc {
    Input(Cell, String, Box<Proc>),
    Output(Cell, Expr),
    Par(Box<Proc>, Box<Proc>),
    Nil,
    Top,
    New(Cell, Box<Proc>),
    Var(String),
    Rec(String, Box<Proc>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProcError {
    #[error("parse error at byte {offset}: expected {expected}")]
    Parse { offset: usize, expected: String },
    #[error("recursion variable {0} is not guarded by an input")]
    Unguarded(String),
    #[error("free variable {0}")]
    FreeVariable(String),
    #[error("value {0} is outside the value range")]
    ValueOutOfRange(u64),
    #[error("cell {0} is not among the board cells")]
    UnknownCell(Cell),
    #[error("reduction graph exceeded {0} states")]
    GraphBound(usize),
    #[error("unfolding did not stabilise within {0} steps")]
    UnfoldBound(usize),
}

/// A finite partial map from cells to values, or the inconsistent board.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Board {
    Cells(BTreeMap<Cell, u64>),
    Top,
}

impl Board {
    pub fn empty() -> Board {
        Board::Cells(BTreeMap::new())
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Cell, u64)>) -> Board {
        pairs.into_iter().fold(Board::empty(), |b, (c, v)| {
            b.join(&Board::Cells(BTreeMap::from([(c, v)])))
        })
    }

    pub fn get(&self, c: Cell) -> Option<u64> {
        match self {
            Board::Cells(m) => m.get(&c).copied(),
            Board::Top => None,
        }
    }

    pub fn leq(&self, other: &Board) -> bool {
        match (self, other) {
            (_, Board::Top) => true,
            (Board::Top, _) => false,
            (Board::Cells(a), Board::Cells(b)) => a.iter().all(|(c, v)| b.get(c) == Some(v)),
        }
    }

    pub fn join(&self, other: &Board) -> Board {
        match (self, other) {
            (Board::Cells(a), Board::Cells(b)) => {
                let mut m = a.clone();
                for (c, v) in b {
                    if *m.entry(*c).or_insert(*v) != *v {
                        return Board::Top;
                    }
                }
                Board::Cells(m)
            }
            _ => Board::Top,
        }
    }

    fn without(&self, c: Cell) -> Board {
        match self {
            Board::Cells(m) => {
                let mut m = m.clone();
                m.remove(&c);
                Board::Cells(m)
            }
            Board::Top => Board::Top,
        }
    }

    fn visible(&self) -> Board {
        match self {
            Board::Cells(m) => Board::Cells(
                m.iter()
                    .filter(|(c, _)| !matches!(c, Cell::Hidden(_)))
                    .map(|(c, v)| (*c, *v))
                    .collect(),
            ),
            Board::Top => Board::Top,
        }
    }
}

impl fmt::Display for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Board::Top => f.write_str("TOP"),
            Board::Cells(m) => {
                let parts: Vec<String> = m.iter().map(|(c, v)| format!("{c}={v}")).collect();
                write!(f, "{{{}}}", parts.join(", "))
            }
        }
    }
}

impl Serialize for Board {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Board::Top => s.serialize_str("TOP"),
            Board::Cells(m) => s.collect_map(m.iter().map(|(c, v)| (c.to_string(), v))),
        }
    }
}

// ---------------------------------------------------------------- syntax

impl Proc {
    pub fn par(a: Proc, b: Proc) -> Proc {
        Proc::Par(Box::new(a), Box::new(b))
    }

    pub fn par_all(ps: impl IntoIterator<Item = Proc>) -> Proc {
        ps.into_iter().reduce(Proc::par).unwrap_or(Proc::Nil)
    }

    pub fn input(c: Cell, x: &str, body: Proc) -> Proc {
        Proc::Input(c, x.into(), Box::new(body))
    }

    pub fn output(c: Cell, v: u64) -> Proc {
        Proc::Output(c, Expr::Val(v))
    }

    pub fn free_cells(&self) -> BTreeSet<Cell> {
        let mut out = BTreeSet::new();
        self.collect_cells(&mut out);
        out
    }

    fn collect_cells(&self, out: &mut BTreeSet<Cell>) {
        match self {
            Proc::Input(c, _, p) => {
                out.insert(*c);
                p.collect_cells(out);
            }
            Proc::Output(c, _) => {
                out.insert(*c);
            }
            Proc::Par(a, b) => {
                a.collect_cells(out);
                b.collect_cells(out);
            }
            Proc::New(c, p) => {
                let mut inner = BTreeSet::new();
                p.collect_cells(&mut inner);
                inner.remove(c);
                out.extend(inner);
            }
            Proc::Rec(_, p) => p.collect_cells(out),
            Proc::Nil | Proc::Top | Proc::Var(_) => {}
        }
    }

    /// `self[v/x]` for a value variable.
    pub fn subst_value(&self, x: &str, v: u64) -> Proc {
        match self {
            Proc::Input(c, y, p) if y == x => Proc::Input(*c, y.clone(), p.clone()),
            Proc::Input(c, y, p) => Proc::Input(*c, y.clone(), Box::new(p.subst_value(x, v))),
            Proc::Output(c, Expr::Var(y)) if y == x => Proc::Output(*c, Expr::Val(v)),
            Proc::Par(a, b) => Proc::par(a.subst_value(x, v), b.subst_value(x, v)),
            Proc::New(c, p) => Proc::New(*c, Box::new(p.subst_value(x, v))),
            Proc::Rec(n, p) => Proc::Rec(n.clone(), Box::new(p.subst_value(x, v))),
            other => other.clone(),
        }
    }

    /// `self[q/X]` for a recursion variable.
    pub fn subst_proc(&self, x: &str, q: &Proc) -> Proc {
        match self {
            Proc::Var(y) if y == x => q.clone(),
            Proc::Rec(y, _) if y == x => self.clone(),
            Proc::Rec(y, p) => Proc::Rec(y.clone(), Box::new(p.subst_proc(x, q))),
            Proc::Input(c, y, p) => Proc::Input(*c, y.clone(), Box::new(p.subst_proc(x, q))),
            Proc::Par(a, b) => Proc::par(a.subst_proc(x, q), b.subst_proc(x, q)),
            Proc::New(c, p) => Proc::New(*c, Box::new(p.subst_proc(x, q))),
            other => other.clone(),
        }
    }

    pub fn rename_cell(&self, from: Cell, to: Cell) -> Proc {
        let r = |c: &Cell| if *c == from { to } else { *c };
        match self {
            Proc::Input(c, y, p) => Proc::Input(r(c), y.clone(), Box::new(p.rename_cell(from, to))),
            Proc::Output(c, e) => Proc::Output(r(c), e.clone()),
            Proc::Par(a, b) => Proc::par(a.rename_cell(from, to), b.rename_cell(from, to)),
            Proc::New(c, _) if *c == from => self.clone(),
            Proc::New(c, p) => Proc::New(*c, Box::new(p.rename_cell(from, to))),
            Proc::Rec(n, p) => Proc::Rec(n.clone(), Box::new(p.rename_cell(from, to))),
            other => other.clone(),
        }
    }

    /// One unfolding of `rec X. P`.
    pub fn unfold(&self) -> Proc {
        match self {
            Proc::Rec(x, p) => p.subst_proc(x, self),
            other => other.clone(),
        }
    }

    /// Every recursion variable sits under an input prefix of its binder.
    pub fn check_guarded(&self) -> Result<(), ProcError> {
        fn go(p: &Proc, unguarded: &mut Vec<String>) -> Result<(), ProcError> {
            match p {
                Proc::Var(x) if unguarded.contains(x) => Err(ProcError::Unguarded(x.clone())),
                Proc::Input(_, _, b) => go(b, &mut Vec::new()),
                Proc::Par(a, b) => {
                    go(a, unguarded)?;
                    go(b, unguarded)
                }
                Proc::New(_, b) => go(b, unguarded),
                Proc::Rec(x, b) => {
                    unguarded.push(x.clone());
                    let r = go(b, unguarded);
                    unguarded.pop();
                    r
                }
                _ => Ok(()),
            }
        }
        go(self, &mut Vec::new())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Val(v) => write!(f, "{v}"),
            Expr::Var(x) => f.write_str(x),
        }
    }
}

impl fmt::Display for Proc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // prefix bodies and par operands are bracketed unless atomic
        fn tight(p: &Proc) -> String {
            match p {
                Proc::Par(..) | Proc::New(..) | Proc::Rec(..) => format!("({p})"),
                _ => p.to_string(),
            }
        }
        match self {
            Proc::Input(c, x, p) => write!(f, "{c}?{x} -> {}", tight(p)),
            Proc::Output(c, e) => write!(f, "{c}!{e}"),
            Proc::Par(a, b) => {
                let right = match **b {
                    Proc::New(..) | Proc::Rec(..) | Proc::Par(..) => format!("({b})"),
                    _ => b.to_string(),
                };
                write!(f, "{} || {right}", tight_left(a))
            }
            Proc::Nil => f.write_str("0"),
            Proc::Top => f.write_str("TOP"),
            Proc::New(c, p) => write!(f, "new {c}. {p}"),
            Proc::Var(x) => f.write_str(x),
            Proc::Rec(x, p) => write!(f, "rec {x}. {p}"),
        }
    }
}

fn tight_left(p: &Proc) -> String {
    match p {
        Proc::New(..) | Proc::Rec(..) => format!("({p})"),
        _ => p.to_string(),
    }
}

// ---------------------------------------------------------------- parsing

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip(&mut self) {
        loop {
            let rest = &self.src[self.pos..];
            let trimmed = rest.trim_start();
            self.pos += rest.len() - trimmed.len();
            if trimmed.starts_with('#') {
                self.pos += trimmed.find('\n').unwrap_or(trimmed.len());
            } else {
                return;
            }
        }
    }

    fn err<T>(&self, expected: &str) -> Result<T, ProcError> {
        Err(ProcError::Parse {
            offset: self.pos,
            expected: expected.into(),
        })
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip();
        if self.src[self.pos..].starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<(), ProcError> {
        if self.eat(tok) {
            Ok(())
        } else {
            self.err(&format!("'{tok}'"))
        }
    }

    fn word(&mut self) -> Option<&'a str> {
        self.skip();
        let rest = &self.src[self.pos..];
        let n = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(rest.len());
        if n == 0 {
            return None;
        }
        self.pos += n;
        Some(&rest[..n])
    }

    fn peek_word(&mut self) -> Option<&'a str> {
        let save = self.pos;
        let w = self.word();
        self.pos = save;
        w
    }

    fn cell(&mut self) -> Result<Cell, ProcError> {
        let at = self.pos;
        match self.word().map(Cell::from_str) {
            Some(Ok(c)) => Ok(c),
            _ => {
                self.pos = at;
                self.err("a cell")
            }
        }
    }

    fn ident(&mut self) -> Result<String, ProcError> {
        match self.word() {
            Some(w) if w.starts_with(|c: char| c.is_ascii_alphabetic()) => Ok(w.to_string()),
            _ => self.err("an identifier"),
        }
    }

    fn par(&mut self) -> Result<Proc, ProcError> {
        let mut p = self.unit()?;
        while self.eat("||") {
            let q = self.unit()?;
            p = Proc::par(p, q);
        }
        Ok(p)
    }

    fn unit(&mut self) -> Result<Proc, ProcError> {
        self.skip();
        if self.eat("(") {
            let p = self.par()?;
            self.expect(")")?;
            return Ok(p);
        }
        let Some(w) = self.peek_word() else {
            return self.err("a process");
        };
        match w {
            "new" => {
                self.word();
                let c = self.cell()?;
                self.expect(".")?;
                Ok(Proc::New(c, Box::new(self.par()?)))
            }
            "rec" => {
                self.word();
                let x = self.ident()?;
                self.expect(".")?;
                Ok(Proc::Rec(x, Box::new(self.par()?)))
            }
            "TOP" => {
                self.word();
                Ok(Proc::Top)
            }
            _ => {
                let start = self.pos;
                self.word();
                self.skip();
                let next = self.src[self.pos..].chars().next();
                self.pos = start;
                match next {
                    Some('?') => {
                        let c = self.cell()?;
                        self.expect("?")?;
                        let x = self.ident()?;
                        self.expect("->")?;
                        let body = self.unit()?;
                        Ok(Proc::Input(c, x, Box::new(body)))
                    }
                    Some('!') => {
                        let c = self.cell()?;
                        self.expect("!")?;
                        let e = match self.word() {
                            Some(w) if w.bytes().all(|b| b.is_ascii_digit()) => {
                                Expr::Val(w.parse().map_err(|_| ProcError::Parse {
                                    offset: self.pos,
                                    expected: "a value".into(),
                                })?)
                            }
                            Some(w) if w.starts_with(|c: char| c.is_ascii_lowercase()) => Expr::Var(w.into()),
                            _ => return self.err("a value or variable"),
                        };
                        Ok(Proc::Output(c, e))
                    }
                    _ if w == "0" => {
                        self.word();
                        Ok(Proc::Nil)
                    }
                    _ if w.starts_with(|c: char| c.is_ascii_uppercase()) => {
                        self.word();
                        Ok(Proc::Var(w.into()))
                    }
                    _ => self.err("a process"),
                }
            }
        }
    }
}

pub fn parse_proc(src: &str) -> Result<Proc, ProcError> {
    let mut ps = Parser { src, pos: 0 };
    let p = ps.par()?;
    ps.skip();
    if ps.pos != src.len() {
        return ps.err("end of input");
    }
    p.check_guarded()?;
    Ok(p)
}

// ---------------------------------------------------------------- structure

fn flatten(p: &Proc, out: &mut Vec<Proc>) {
    match p {
        Proc::Par(a, b) => {
            flatten(a, out);
            flatten(b, out);
        }
        other => out.push(other.clone()),
    }
}

fn max_hidden(p: &Proc) -> u64 {
    let mut all = BTreeSet::new();
    fn go(p: &Proc, out: &mut BTreeSet<Cell>) {
        match p {
            Proc::Input(c, _, b) | Proc::New(c, b) => {
                out.insert(*c);
                go(b, out);
            }
            Proc::Output(c, _) => {
                out.insert(*c);
            }
            Proc::Par(a, b) => {
                go(a, out);
                go(b, out);
            }
            Proc::Rec(_, b) => go(b, out),
            _ => {}
        }
    }
    go(p, &mut all);
    all.iter()
        .filter_map(|c| if let Cell::Hidden(n) = c { Some(n + 1) } else { None })
        .max()
        .unwrap_or(0)
}

/// Top-level restricted cells and parallel components, with restrictions
/// pulled outward under fresh names.
fn extrude(p: &Proc, fresh: &mut u64, binders: &mut Vec<Cell>, comps: &mut Vec<Proc>) {
    match p {
        Proc::Par(a, b) => {
            extrude(a, fresh, binders, comps);
            extrude(b, fresh, binders, comps);
        }
        Proc::New(c, body) => {
            let h = Cell::Hidden(*fresh);
            *fresh += 1;
            binders.push(h);
            extrude(&body.rename_cell(*c, h), fresh, binders, comps);
        }
        Proc::Nil => {}
        other => comps.push(other.clone()),
    }
}

fn mask(p: &Proc, binders: &[Cell]) -> String {
    let mut q = p.clone();
    for b in binders {
        q = q.rename_cell(*b, Cell::Hidden(u64::MAX));
    }
    q.to_string()
}

/// Canonical form up to associativity, commutativity, unit and zero of
/// `||`, idempotent and clashing outputs, and scope extrusion.
pub fn normalize_struct(p: &Proc) -> Proc {
    let mut fresh = max_hidden(p) + 1_000_000;
    let (mut binders, mut comps) = (Vec::new(), Vec::new());
    extrude(p, &mut fresh, &mut binders, &mut comps);
    if comps.contains(&Proc::Top) {
        return Proc::Top;
    }
    let mut outs: BTreeMap<Cell, u64> = BTreeMap::new();
    for c in &comps {
        if let Proc::Output(cell, Expr::Val(v)) = c {
            if *outs.entry(*cell).or_insert(*v) != *v {
                return Proc::Top;
            }
        }
    }
    comps.sort_by_cached_key(|c| mask(c, &binders));
    comps.dedup();
    // rename binders by first use in the sorted components; unused ones go
    let text: Vec<BTreeSet<Cell>> = comps.iter().map(|c| c.free_cells()).collect();
    let mut used: Vec<Cell> = Vec::new();
    for cells in &text {
        for b in &binders {
            if cells.contains(b) && !used.contains(b) {
                used.push(*b);
            }
        }
    }
    let base = max_hidden(&Proc::par_all(
        comps
            .iter()
            .cloned()
            .map(|c| binders.iter().fold(c, |c, b| c.rename_cell(*b, Cell::Num(0)))),
    ));
    let names: Vec<Cell> = (0..used.len() as u64).map(|k| Cell::Hidden(base + k)).collect();
    let mut renamed: Vec<Proc> = comps
        .into_iter()
        .map(|c| used.iter().zip(&names).fold(c, |c, (b, n)| c.rename_cell(*b, *n)))
        .collect();
    renamed.sort_by_cached_key(|c| mask(c, &names));
    let body = Proc::par_all(renamed);
    names.iter().rev().fold(body, |b, n| Proc::New(*n, Box::new(b)))
}

fn split_normal(p: &Proc) -> (Vec<Cell>, Vec<Proc>) {
    let mut binders = Vec::new();
    let mut cur = p;
    while let Proc::New(c, b) = cur {
        binders.push(*c);
        cur = b;
    }
    let mut comps = Vec::new();
    if *cur != Proc::Nil {
        flatten(cur, &mut comps);
    }
    (binders, comps)
}

fn rebuild(binders: &[Cell], comps: Vec<Proc>) -> Proc {
    let body = Proc::par_all(comps);
    binders.iter().rev().fold(body, |b, n| Proc::New(*n, Box::new(b)))
}

/// All one-step reducts, each in normal form. Outputs persist.
pub fn reduce_step(p: &Proc) -> Vec<Proc> {
    let norm = normalize_struct(p);
    if norm == Proc::Top {
        return Vec::new();
    }
    let (binders, raw) = split_normal(&norm);
    // unfold recursion at top level until only prefixes remain
    let mut comps = Vec::new();
    let mut todo = raw;
    while let Some(c) = todo.pop() {
        match c {
            Proc::Rec(..) => flatten(&c.unfold(), &mut todo),
            Proc::Nil => {}
            other => comps.push(other),
        }
    }
    let outs: BTreeMap<Cell, u64> = comps
        .iter()
        .filter_map(|c| match c {
            Proc::Output(cell, Expr::Val(v)) => Some((*cell, *v)),
            _ => None,
        })
        .collect();
    let mut reducts = BTreeSet::new();
    for (i, c) in comps.iter().enumerate() {
        if let Proc::Input(cell, x, body) = c {
            if let Some(v) = outs.get(cell) {
                let mut next = comps.clone();
                next[i] = body.subst_value(x, *v);
                reducts.insert(normalize_struct(&rebuild(&binders, next)));
            }
        }
    }
    reducts.into_iter().collect()
}

fn visible_outputs(p: &Proc) -> Board {
    if *p == Proc::Top {
        return Board::Top;
    }
    let (binders, comps) = split_normal(p);
    Board::from_pairs(comps.iter().filter_map(|c| match c {
        Proc::Output(cell, Expr::Val(v)) if !binders.contains(cell) => Some((*cell, *v)),
        _ => None,
    }))
}

pub const GRAPH_BOUND: usize = 20_000;

/// Every state reachable from `p`, in normal form.
pub fn reduction_graph(p: &Proc) -> Result<Vec<Proc>, ProcError> {
    let start = normalize_struct(p);
    let mut seen = HashSet::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::from([start.clone()]);
    seen.insert(start);
    while let Some(s) = queue.pop_front() {
        for n in reduce_step(&s) {
            if seen.insert(n.clone()) {
                if seen.len() > GRAPH_BOUND {
                    return Err(ProcError::GraphBound(GRAPH_BOUND));
                }
                queue.push_back(n);
            }
        }
        order.push(s);
    }
    Ok(order)
}

/// Places the input as outputs and reduces to exhaustion; the result is the
/// union of everything written to visible cells.
pub fn run(p: &Proc, input: &Board) -> Result<Board, ProcError> {
    let Board::Cells(m) = input else { return Ok(Board::Top) };
    let start = Proc::par_all(std::iter::once(p.clone()).chain(m.iter().map(|(c, v)| Proc::output(*c, *v))));
    let states = reduction_graph(&start)?;
    Ok(states.iter().fold(Board::empty(), |b, s| b.join(&visible_outputs(s))))
}

// ---------------------------------------------------------------- denotation

struct Denoter {
    fresh: u64,
    bound: usize,
}

impl Denoter {
    fn eval(&mut self, p: &Proc, a: &Board) -> Result<Board, ProcError> {
        if *a == Board::Top {
            return Ok(Board::Top);
        }
        match p {
            Proc::Nil => Ok(a.clone()),
            Proc::Top => Ok(Board::Top),
            Proc::Output(c, Expr::Val(v)) => Ok(a.join(&Board::from_pairs([(*c, *v)]))),
            Proc::Output(_, Expr::Var(x)) | Proc::Var(x) => Err(ProcError::FreeVariable(x.clone())),
            Proc::Input(c, x, body) => match a.get(*c) {
                None => Ok(a.clone()),
                Some(v) => self.eval(&body.subst_value(x, v), a),
            },
            Proc::Par(l, r) => {
                let mut cur = a.clone();
                for _ in 0..=self.bound {
                    let mid = self.eval(r, &cur)?;
                    let next = self.eval(l, &mid)?;
                    if next == cur {
                        return Ok(cur);
                    }
                    cur = next;
                }
                Err(ProcError::UnfoldBound(self.bound))
            }
            Proc::New(c, body) => {
                let h = Cell::Hidden(self.fresh);
                self.fresh += 1;
                let r = self.eval(&body.rename_cell(*c, h), a)?;
                Ok(r.without(h))
            }
            Proc::Rec(x, body) => {
                let mut approx = Proc::Nil;
                let mut last: Option<Board> = None;
                for _ in 0..=self.bound + 1 {
                    approx = body.subst_proc(x, &approx);
                    let r = self.eval(&approx, a)?;
                    if last.as_ref() == Some(&r) {
                        return Ok(r);
                    }
                    last = Some(r);
                }
                Err(ProcError::UnfoldBound(self.bound))
            }
        }
    }
}

/// Denotation at a single board.
pub fn denote_at(p: &Proc, a: &Board, bound: usize) -> Result<Board, ProcError> {
    let mut d = Denoter {
        fresh: max_hidden(p) + 1_000_000,
        bound,
    };
    Ok(d.eval(p, a)?.visible())
}

/// Domain of boards over the given cells with the given values.
pub fn board_dom(cells: &[Cell], values: &[u64]) -> Dom {
    let flat = Dom::Flat(values.iter().map(u64::to_string).collect());
    sequent_dom(&vec![flat; cells.len()])
}

pub fn board_of(dom: &Dom, cells: &[Cell], values: &[u64], e: usize) -> Board {
    let vals = if cells.is_empty() { vec![] } else { dom.cell_values(e) };
    Board::from_pairs(
        cells
            .iter()
            .zip(vals)
            .filter(|(_, k)| *k != 0)
            .map(|(c, k)| (*c, values[k - 1])),
    )
}

pub fn point_of(dom: &Dom, cells: &[Cell], values: &[u64], b: &Board) -> Result<Point, ProcError> {
    let Board::Cells(m) = b else { return Ok(Point::Top) };
    if let Some(c) = m.keys().find(|c| !cells.contains(c)) {
        return Err(ProcError::UnknownCell(*c));
    }
    let mut idx = Vec::new();
    for c in cells {
        idx.push(match m.get(c) {
            None => 0,
            Some(v) => {
                1 + values
                    .iter()
                    .position(|w| w == v)
                    .ok_or(ProcError::ValueOutOfRange(*v))?
            }
        });
    }
    Ok(Point::At(if cells.is_empty() {
        0
    } else {
        dom.from_cell_values(&idx)
    }))
}

/// The closure of `p` on boards over `cells`, tabulated for every board with
/// values drawn from `values`.
pub fn denote(p: &Proc, cells: &[Cell], values: &[u64]) -> Result<ClosureOp, ProcError> {
    if let Some(c) = p.free_cells().iter().find(|c| !cells.contains(c)) {
        return Err(ProcError::UnknownCell(*c));
    }
    let dom = board_dom(cells, values);
    let bound = cells.len() * values.len() + 1;
    let mut table = Vec::with_capacity(dom.size());
    for e in 0..dom.size() {
        let b = board_of(&dom, cells, values, e);
        table.push(point_of(&dom, cells, values, &denote_at(p, &b, bound)?)?);
    }
    Ok(ClosureOp { dom, table })
}

/// Parallel copiers between `l<k>` and `r<k>` for each pair index.
pub fn copycat_process(pairs: &[u64]) -> Proc {
    Proc::par_all(pairs.iter().flat_map(|&k| {
        let (l, r) = (Cell::Left(k), Cell::Right(k));
        [
            Proc::input(l, "x", Proc::Output(r, Expr::Var("x".into()))),
            Proc::input(r, "x", Proc::Output(l, Expr::Var("x".into()))),
        ]
    }))
}

/// Parses `c=v,c=v` into a board.
pub fn parse_board(s: &str) -> Result<Board, ProcError> {
    let mut pairs = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || ProcError::Parse {
            offset: 0,
            expected: "cell=value".into(),
        };
        let (c, v) = part.split_once('=').ok_or_else(bad)?;
        pairs.push((c.trim().parse::<Cell>()?, v.trim().parse::<u64>().map_err(|_| bad())?));
    }
    Ok(Board::from_pairs(pairs))
}
