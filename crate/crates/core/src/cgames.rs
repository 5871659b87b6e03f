//! Concurrent games: finite domains of positions with strategies as closure
//! operators on the domain with a top element adjoined.
//!
//! Every domain here is finite and fully enumerated. Elements are indices;
//! bottom is always index 0. [`Point::Top`] stands for divergence and is
//! never an element of a [`Dom`].

use std::collections::HashMap;
use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::logic::Formula;
use crate::proofs::{check_mall, layout, MallProof, MallRule, ProofError, Slot};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Dom {
    /// The one-point domain.
    One,
    /// Bottom plus pairwise incomparable values.
    Flat(Vec<String>),
    /// Disjoint union of labelled components under a new bottom.
    LiftedSum(Vec<(String, Dom)>),
    Product(Box<Dom>, Box<Dom>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Point {
    At(usize),
    Top,
}

impl Dom {
    pub fn booleans() -> Dom {
        Dom::Flat(vec!["tt".into(), "ff".into()])
    }

    pub fn product(a: Dom, b: Dom) -> Dom {
        Dom::Product(Box::new(a), Box::new(b))
    }

    pub fn size(&self) -> usize {
        match self {
            Dom::One => 1,
            Dom::Flat(vs) => 1 + vs.len(),
            Dom::LiftedSum(cs) => 1 + cs.iter().map(|(_, d)| d.size()).sum::<usize>(),
            Dom::Product(a, b) => a.size() * b.size(),
        }
    }

    pub const BOTTOM: usize = 0;

    fn offset(&self, i: usize) -> usize {
        let Dom::LiftedSum(cs) = self else {
            panic!("not a lifted sum")
        };
        1 + cs[..i].iter().map(|(_, d)| d.size()).sum::<usize>()
    }

    /// `in_i(x)` in a lifted sum.
    pub fn inj(&self, i: usize, x: usize) -> usize {
        self.offset(i) + x
    }

    /// Component and inner element of a lifted-sum element, or none for bottom.
    pub fn case(&self, e: usize) -> Option<(usize, usize)> {
        let Dom::LiftedSum(cs) = self else {
            panic!("not a lifted sum")
        };
        if e == 0 {
            return None;
        }
        let mut base = 1;
        for (i, (_, d)) in cs.iter().enumerate() {
            if e < base + d.size() {
                return Some((i, e - base));
            }
            base += d.size();
        }
        panic!("element {e} out of range")
    }

    pub fn component(&self, i: usize) -> &Dom {
        let Dom::LiftedSum(cs) = self else {
            panic!("not a lifted sum")
        };
        &cs[i].1
    }

    pub fn pair(&self, x: usize, y: usize) -> usize {
        let Dom::Product(_, b) = self else {
            panic!("not a product")
        };
        x * b.size() + y
    }

    pub fn unpair(&self, e: usize) -> (usize, usize) {
        let Dom::Product(_, b) = self else {
            panic!("not a product")
        };
        (e / b.size(), e % b.size())
    }

    pub fn factors(&self) -> (&Dom, &Dom) {
        let Dom::Product(a, b) = self else {
            panic!("not a product")
        };
        (a, b)
    }

    pub fn leq(&self, x: usize, y: usize) -> bool {
        match self {
            Dom::One => true,
            Dom::Flat(_) => x == 0 || x == y,
            Dom::LiftedSum(_) => match (self.case(x), self.case(y)) {
                (None, _) => true,
                (Some((i, a)), Some((j, b))) => i == j && self.component(i).leq(a, b),
                _ => false,
            },
            Dom::Product(a, b) => {
                let ((x1, x2), (y1, y2)) = (self.unpair(x), self.unpair(y));
                a.leq(x1, y1) && b.leq(x2, y2)
            }
        }
    }

    /// Least upper bound, if the two elements are bounded.
    pub fn join(&self, x: usize, y: usize) -> Option<usize> {
        match self {
            Dom::One => Some(0),
            Dom::Flat(_) => match (x, y) {
                (0, _) => Some(y),
                (_, 0) => Some(x),
                _ => (x == y).then_some(x),
            },
            Dom::LiftedSum(_) => match (self.case(x), self.case(y)) {
                (None, _) => Some(y),
                (_, None) => Some(x),
                (Some((i, a)), Some((j, b))) if i == j => self.component(i).join(a, b).map(|c| self.inj(i, c)),
                _ => None,
            },
            Dom::Product(a, b) => {
                let ((x1, x2), (y1, y2)) = (self.unpair(x), self.unpair(y));
                Some(self.pair(a.join(x1, y1)?, b.join(x2, y2)?))
            }
        }
    }

    pub fn meet(&self, x: usize, y: usize) -> usize {
        match self {
            Dom::One => 0,
            Dom::Flat(_) => {
                if x == y {
                    x
                } else {
                    0
                }
            }
            Dom::LiftedSum(_) => match (self.case(x), self.case(y)) {
                (Some((i, a)), Some((j, b))) if i == j => self.inj(i, self.component(i).meet(a, b)),
                _ => 0,
            },
            Dom::Product(a, b) => {
                let ((x1, x2), (y1, y2)) = (self.unpair(x), self.unpair(y));
                self.pair(a.meet(x1, y1), b.meet(x2, y2))
            }
        }
    }

    pub fn leq_pt(&self, x: Point, y: Point) -> bool {
        match (x, y) {
            (_, Point::Top) => true,
            (Point::Top, _) => false,
            (Point::At(a), Point::At(b)) => self.leq(a, b),
        }
    }

    pub fn join_pt(&self, x: Point, y: Point) -> Point {
        match (x, y) {
            (Point::At(a), Point::At(b)) => self.join(a, b).map_or(Point::Top, Point::At),
            _ => Point::Top,
        }
    }

    pub fn meet_pt(&self, x: Point, y: Point) -> Point {
        match (x, y) {
            (Point::Top, p) | (p, Point::Top) => p,
            (Point::At(a), Point::At(b)) => Point::At(self.meet(a, b)),
        }
    }

    pub fn name(&self, e: usize) -> String {
        match self {
            Dom::One => "bot".into(),
            Dom::Flat(vs) => {
                if e == 0 {
                    "bot".into()
                } else {
                    vs[e - 1].clone()
                }
            }
            Dom::LiftedSum(cs) => match self.case(e) {
                None => "bot".into(),
                Some((i, x)) => format!("{}({})", cs[i].0, cs[i].1.name(x)),
            },
            Dom::Product(a, b) => {
                let (x, y) = self.unpair(e);
                format!("({}, {})", a.name(x), b.name(y))
            }
        }
    }

    pub fn point_name(&self, p: Point) -> String {
        match p {
            Point::At(e) => self.name(e),
            Point::Top => "top".into(),
        }
    }

    /// The flat factors of a product of flat domains, left to right.
    pub fn cells(&self) -> Option<Vec<&Dom>> {
        match self {
            Dom::Flat(_) => Some(vec![self]),
            Dom::Product(a, b) => {
                let mut v = a.cells()?;
                v.extend(b.cells()?);
                Some(v)
            }
            _ => None,
        }
    }

    /// Cell contents of an element of a product of flat domains; 0 is empty.
    pub fn cell_values(&self, e: usize) -> Vec<usize> {
        match self {
            Dom::Product(a, b) => {
                let (x, y) = self.unpair(e);
                let mut v = a.cell_values(x);
                v.extend(b.cell_values(y));
                v
            }
            _ => vec![e],
        }
    }

    pub fn from_cell_values(&self, vals: &[usize]) -> usize {
        fn go(d: &Dom, vals: &[usize], k: &mut usize) -> usize {
            match d {
                Dom::Product(a, b) => {
                    let x = go(a, vals, k);
                    let y = go(b, vals, k);
                    d.pair(x, y)
                }
                _ => {
                    *k += 1;
                    vals[*k - 1]
                }
            }
        }
        go(self, vals, &mut 0)
    }
}

impl fmt::Display for Dom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dom::One => f.write_str("1"),
            Dom::Flat(vs) if *vs == ["tt", "ff"] => f.write_str("B"),
            Dom::Flat(vs) => write!(f, "flat({})", vs.join(",")),
            Dom::LiftedSum(cs) => {
                let parts: Vec<String> = cs.iter().map(|(_, d)| d.to_string()).collect();
                write!(f, "({})_bot", parts.join(" + "))
            }
            Dom::Product(a, b) => write!(f, "({a} x {b})"),
        }
    }
}

/// Right-associated product of the component domains.
pub fn sequent_dom(doms: &[Dom]) -> Dom {
    match doms {
        [] => Dom::One,
        [d] => d.clone(),
        [d, rest @ ..] => Dom::product(d.clone(), sequent_dom(rest)),
    }
}

fn encode_vec(doms: &[Dom], x: &[usize]) -> usize {
    match doms {
        [] => 0,
        [_] => x[0],
        [_, rest @ ..] => x[0] * sequent_dom(rest).size() + encode_vec(rest, &x[1..]),
    }
}

fn decode_vec(doms: &[Dom], e: usize) -> Vec<usize> {
    match doms {
        [] => vec![],
        [_] => vec![e],
        [_, rest @ ..] => {
            let n = sequent_dom(rest).size();
            let mut v = vec![e / n];
            v.extend(decode_vec(rest, e % n));
            v
        }
    }
}

/// A function on a finite domain, extended with top; closure operators are
/// the tables passing [`is_closure`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ClosureOp {
    pub dom: Dom,
    pub table: Vec<Point>,
}

impl ClosureOp {
    pub fn from_fn(dom: Dom, f: impl Fn(usize) -> Point) -> ClosureOp {
        let table = (0..dom.size()).map(f).collect();
        ClosureOp { dom, table }
    }

    pub fn identity(dom: Dom) -> ClosureOp {
        ClosureOp::from_fn(dom, Point::At)
    }

    pub fn apply(&self, p: Point) -> Point {
        match p {
            Point::At(e) => self.table[e],
            Point::Top => Point::Top,
        }
    }

    pub fn at(&self, e: usize) -> Point {
        self.table[e]
    }

    /// `(position, image)` names for every element.
    pub fn named_table(&self) -> Vec<(String, String)> {
        (0..self.table.len())
            .map(|e| (self.dom.name(e), self.dom.point_name(self.table[e])))
            .collect()
    }
}

impl Serialize for ClosureOp {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ClosureOp", 2)?;
        st.serialize_field("dom", &self.dom.to_string())?;
        st.serialize_field("table", &self.named_table())?;
        st.end()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CGameError {
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("the domain is not a product of flat domains")]
    NoCellStructure,
    #[error("the function is not monotone")]
    NotMonotone,
    #[error("fixpoint iteration exceeded {0} steps")]
    IterationBound(usize),
    #[error("the strategy set cannot be enumerated")]
    NotEnumerable,
    #[error("rule {0} has no linking")]
    NotMultiplicative(&'static str),
    #[error("the linking has a cycle through leaf {0}")]
    CyclicLinking(usize),
    #[error(transparent)]
    Proof(#[from] ProofError),
}

/// Increasing, monotone and idempotent, checked on every element.
pub fn is_closure(f: &ClosureOp) -> bool {
    let d = &f.dom;
    let n = d.size();
    if f.table.len() != n {
        return false;
    }
    (0..n).all(|x| {
        let fx = f.at(x);
        d.leq_pt(Point::At(x), fx) && f.apply(fx) == fx && (0..n).all(|y| !d.leq(x, y) || d.leq_pt(fx, f.at(y)))
    })
}

/// Least fixpoint of `f` from bottom; `f` must be increasing.
fn fix(bound: usize, mut f: impl FnMut(usize) -> Result<Point, CGameError>) -> Result<Point, CGameError> {
    let mut y = Dom::BOTTOM;
    for _ in 0..=bound {
        match f(y)? {
            Point::Top => return Ok(Point::Top),
            Point::At(n) if n == y => return Ok(Point::At(y)),
            Point::At(n) => y = n,
        }
    }
    Err(CGameError::IterationBound(bound))
}

/// The position reached by playing `sigma` against `tau`.
pub fn play_closures(sigma: &ClosureOp, tau: &ClosureOp) -> Point {
    fix(sigma.dom.size() + 1, |y| Ok(sigma.apply(tau.at(y)))).expect("increasing maps stabilise")
}

fn proj(d: &Dom, p: Point, first: bool) -> Point {
    match p {
        Point::Top => Point::Top,
        Point::At(e) => {
            let (x, y) = d.unpair(e);
            Point::At(if first { x } else { y })
        }
    }
}

/// `sigma` on `(D x E)` and `tau` on `(E x F)`, played against each other
/// in `E`.
pub fn compose_closures(sigma: &ClosureOp, tau: &ClosureOp) -> Result<ClosureOp, CGameError> {
    let (d, e) = sigma.dom.factors();
    let (e2, f) = tau.dom.factors();
    if e != e2 {
        return Err(CGameError::DomainMismatch(format!("{e} against {e2}")));
    }
    let out = Dom::product(d.clone(), f.clone());
    let (sd, td) = (&sigma.dom, &tau.dom);
    let mut table = Vec::with_capacity(out.size());
    for k in 0..out.size() {
        let (x, z) = out.unpair(k);
        let y = fix(e.size() + 1, |y| {
            let t = proj(td, tau.at(td.pair(y, z)), true);
            Ok(match t {
                Point::Top => Point::Top,
                Point::At(y1) => proj(sd, sigma.at(sd.pair(x, y1)), false),
            })
        })?;
        let r = match y {
            Point::Top => Point::Top,
            Point::At(y) => match (
                proj(sd, sigma.at(sd.pair(x, y)), true),
                proj(td, tau.at(td.pair(y, z)), false),
            ) {
                (Point::At(a), Point::At(b)) => Point::At(out.pair(a, b)),
                _ => Point::Top,
            },
        };
        table.push(r);
    }
    Ok(ClosureOp { dom: out, table })
}

/// Coordinatewise action, top if either side diverges.
pub fn tensor_strategy(sigma: &ClosureOp, tau: &ClosureOp) -> ClosureOp {
    let dom = Dom::product(sigma.dom.clone(), tau.dom.clone());
    let d2 = dom.clone();
    ClosureOp::from_fn(dom, move |e| {
        let (x, y) = d2.unpair(e);
        match (sigma.at(x), tau.at(y)) {
            (Point::At(a), Point::At(b)) => Point::At(d2.pair(a, b)),
            _ => Point::Top,
        }
    })
}

/// `alpha; sigma` for `alpha` on `A` and `sigma` on `A x B`: a closure on `B`.
pub fn action(alpha: &ClosureOp, sigma: &ClosureOp) -> Result<ClosureOp, CGameError> {
    let sd = &sigma.dom;
    let (a, b) = sd.factors();
    let mut table = Vec::new();
    for z in 0..b.size() {
        let y = fix(a.size() + 1, |y| {
            Ok(alpha.apply(proj(sd, sigma.at(sd.pair(y, z)), true)))
        })?;
        table.push(match y {
            Point::Top => Point::Top,
            Point::At(y) => proj(sd, sigma.at(sd.pair(y, z)), false),
        });
    }
    Ok(ClosureOp { dom: b.clone(), table })
}

/// `sigma; beta` for `sigma` on `A x B` and `beta` on `B`: a closure on `A`.
pub fn coaction(sigma: &ClosureOp, beta: &ClosureOp) -> Result<ClosureOp, CGameError> {
    let sd = &sigma.dom;
    let (a, b) = sd.factors();
    let mut table = Vec::new();
    for x in 0..a.size() {
        let y = fix(b.size() + 1, |y| {
            Ok(match beta.at(y) {
                Point::Top => Point::Top,
                Point::At(b1) => proj(sd, sigma.at(sd.pair(x, b1)), false),
            })
        })?;
        table.push(match y {
            Point::Top => Point::Top,
            Point::At(y) => proj(sd, sigma.at(sd.pair(x, y)), true),
        });
    }
    Ok(ClosureOp { dom: a.clone(), table })
}

/// Injection `in_i(sigma)` into component `i` of a lifted sum.
pub fn inject(dom: &Dom, i: usize, sigma: &ClosureOp) -> ClosureOp {
    ClosureOp::from_fn(dom.clone(), |e| match dom.case(e) {
        None => sigma.at(Dom::BOTTOM).map_in(dom, i),
        Some((j, x)) if j == i => sigma.at(x).map_in(dom, i),
        Some(_) => Point::Top,
    })
}

/// Tupling: waits at bottom, then plays the chosen component's strategy.
pub fn tuple(dom: &Dom, sigmas: &[ClosureOp]) -> ClosureOp {
    ClosureOp::from_fn(dom.clone(), |e| match dom.case(e) {
        None => Point::At(Dom::BOTTOM),
        Some((i, x)) => sigmas[i].at(x).map_in(dom, i),
    })
}

impl Point {
    fn map_in(self, dom: &Dom, i: usize) -> Point {
        match self {
            Point::At(x) => Point::At(dom.inj(i, x)),
            Point::Top => Point::Top,
        }
    }
}

/// `in_b` on the booleans: plays `b`, and diverges if the other value is there.
pub fn bool_strategy(b: usize) -> ClosureOp {
    ClosureOp::from_fn(Dom::booleans(), |e| {
        if e == 0 || e == b {
            Point::At(b)
        } else {
            Point::Top
        }
    })
}

/// A set of strategies, listed or described by how it is built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StrategySet {
    Listed(Vec<ClosureOp>),
    Injections(Vec<StrategySet>),
    Tuplings(Vec<StrategySet>),
    Smash(Box<StrategySet>, Box<StrategySet>),
    /// Counter-strategies of `A ⊗ B`: closures whose action carries the
    /// P-strategies of `A` to counter-strategies of `B`, and whose coaction
    /// carries the P-strategies of `B` to counter-strategies of `A`.
    TensorCounter(Box<CGame>, Box<CGame>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CGame {
    pub dom: Dom,
    pub sp: StrategySet,
    pub so: StrategySet,
}

impl CGame {
    pub fn dual(&self) -> CGame {
        CGame {
            dom: self.dom.clone(),
            sp: self.so.clone(),
            so: self.sp.clone(),
        }
    }
}

impl StrategySet {
    /// Every member, when the set is finite and built without tensor
    /// counter-strategies.
    pub fn enumerate(&self, dom: &Dom) -> Option<Vec<ClosureOp>> {
        match self {
            StrategySet::Listed(v) => Some(v.clone()),
            StrategySet::Injections(sets) => {
                let mut out = Vec::new();
                for (i, s) in sets.iter().enumerate() {
                    for sigma in s.enumerate(dom.component(i))? {
                        out.push(inject(dom, i, &sigma));
                    }
                }
                Some(out)
            }
            StrategySet::Tuplings(sets) => {
                let mut acc: Vec<Vec<ClosureOp>> = vec![vec![]];
                for (i, s) in sets.iter().enumerate() {
                    let members = s.enumerate(dom.component(i))?;
                    acc = acc
                        .into_iter()
                        .flat_map(|prefix| {
                            members.iter().map(move |m| {
                                let mut p = prefix.clone();
                                p.push(m.clone());
                                p
                            })
                        })
                        .collect();
                }
                Some(acc.iter().map(|ss| tuple(dom, ss)).collect())
            }
            StrategySet::Smash(a, b) => {
                let (da, db) = dom.factors();
                let (la, lb) = (a.enumerate(da)?, b.enumerate(db)?);
                Some(
                    la.iter()
                        .flat_map(|s| lb.iter().map(move |t| tensor_strategy(s, t)))
                        .collect(),
                )
            }
            StrategySet::TensorCounter(..) => None,
        }
    }

    pub fn contains(&self, sigma: &ClosureOp) -> Result<bool, CGameError> {
        match self {
            StrategySet::TensorCounter(a, b) => member_so_tensor(sigma, a, b),
            _ => {
                let members = self.enumerate(&sigma.dom).ok_or(CGameError::NotEnumerable)?;
                Ok(members.contains(sigma))
            }
        }
    }
}

/// Membership in the counter-strategies of `A ⊗ B`, by enumerating the
/// P-strategies of both games.
pub fn member_so_tensor(sigma: &ClosureOp, a: &CGame, b: &CGame) -> Result<bool, CGameError> {
    if sigma.dom != Dom::product(a.dom.clone(), b.dom.clone()) {
        return Err(CGameError::DomainMismatch(format!(
            "{} is not {} x {}",
            sigma.dom, a.dom, b.dom
        )));
    }
    if !is_closure(sigma) {
        return Ok(false);
    }
    let alphas = a.sp.enumerate(&a.dom).ok_or(CGameError::NotEnumerable)?;
    for alpha in &alphas {
        if !b.so.contains(&action(alpha, sigma)?)? {
            return Ok(false);
        }
    }
    let betas = b.sp.enumerate(&b.dom).ok_or(CGameError::NotEnumerable)?;
    for beta in &betas {
        if !a.so.contains(&coaction(sigma, beta)?)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Domain of positions of a formula.
pub fn formula_dom(f: &Formula) -> Dom {
    match f {
        Formula::Atom(_) | Formula::NegAtom(_) => Dom::booleans(),
        Formula::Plus(a, b) | Formula::With(a, b) => {
            Dom::LiftedSum(vec![("inl".into(), formula_dom(a)), ("inr".into(), formula_dom(b))])
        }
        Formula::Tensor(a, b) | Formula::Par(a, b) => Dom::product(formula_dom(a), formula_dom(b)),
    }
}

/// Atoms are the booleans; negation swaps the strategy sets.
pub fn interpret_formula_cgame(f: &Formula) -> CGame {
    let dom = formula_dom(f);
    match f {
        Formula::Atom(_) => CGame {
            dom: dom.clone(),
            sp: StrategySet::Listed(vec![bool_strategy(1), bool_strategy(2)]),
            so: StrategySet::Listed(vec![ClosureOp::identity(dom)]),
        },
        Formula::NegAtom(a) => interpret_formula_cgame(&Formula::Atom(a.clone())).dual(),
        Formula::Plus(a, b) | Formula::With(a, b) => {
            let (ga, gb) = (interpret_formula_cgame(a), interpret_formula_cgame(b));
            let inj = |x: StrategySet, y: StrategySet| StrategySet::Injections(vec![x, y]);
            let tup = |x: StrategySet, y: StrategySet| StrategySet::Tuplings(vec![x, y]);
            let (sp, so) = if matches!(f, Formula::Plus(..)) {
                (inj(ga.sp, gb.sp), tup(ga.so, gb.so))
            } else {
                (tup(ga.sp, gb.sp), inj(ga.so, gb.so))
            };
            CGame { dom, sp, so }
        }
        Formula::Tensor(a, b) => {
            let (ga, gb) = (interpret_formula_cgame(a), interpret_formula_cgame(b));
            CGame {
                dom,
                sp: StrategySet::Smash(Box::new(ga.sp.clone()), Box::new(gb.sp.clone())),
                so: StrategySet::TensorCounter(Box::new(ga), Box::new(gb)),
            }
        }
        Formula::Par(a, b) => {
            let (ga, gb) = (interpret_formula_cgame(a), interpret_formula_cgame(b));
            CGame {
                dom,
                sp: StrategySet::TensorCounter(Box::new(ga.dual()), Box::new(gb.dual())),
                so: StrategySet::Smash(Box::new(ga.so), Box::new(gb.so)),
            }
        }
    }
}

type Memo = HashMap<(usize, Vec<usize>), Option<Vec<usize>>>;

/// Evaluates the strategy of `p` at a vector of component positions; `None`
/// is top.
fn eval(p: &MallProof, x: &[usize], memo: &mut Memo) -> Result<Option<Vec<usize>>, CGameError> {
    let key = (p as *const MallProof as usize, x.to_vec());
    if let Some(r) = memo.get(&key) {
        return Ok(r.clone());
    }
    let r = eval_rule(p, x, memo)?;
    memo.insert(key, r.clone());
    Ok(r)
}

fn premise_vec(lay_slots: &[Slot], x: &[usize], active: &[usize]) -> Vec<usize> {
    lay_slots
        .iter()
        .map(|s| match s {
            Slot::Ctx(c) => x[*c],
            Slot::Active(r) => active[*r as usize],
        })
        .collect()
}

fn eval_rule(p: &MallProof, x: &[usize], memo: &mut Memo) -> Result<Option<Vec<usize>>, CGameError> {
    let lay = layout(p)?;
    let fs = &p.conclusion.0;
    // conclusion vector from premise results, filling the principal slot
    let back = |results: &[&Vec<usize>], principal: Option<(usize, usize)>| -> Vec<usize> {
        (0..fs.len())
            .map(|c| {
                if let Some((idx, v)) = principal {
                    if idx == c {
                        return v;
                    }
                }
                (0..results.len())
                    .find_map(|m| lay.ctx(m, c).map(|q| results[m][q]))
                    .expect("context position")
            })
            .collect()
    };
    Ok(match &p.rule {
        MallRule::Id => {
            let d = formula_dom(&fs[0]);
            d.join(x[0], x[1]).map(|j| vec![j, j])
        }
        MallRule::PlusL { index } | MallRule::PlusR { index } => {
            let i = usize::from(matches!(p.rule, MallRule::PlusR { .. }));
            let d = formula_dom(&fs[*index]);
            let inner = match d.case(x[*index]) {
                None => Dom::BOTTOM,
                Some((j, y)) if j == i => y,
                Some(_) => return Ok(None),
            };
            let q = lay.active(0, 0).expect("active");
            let Some(r) = eval(&p.premises[0], &premise_vec(&lay.slots[0], x, &[inner]), memo)? else {
                return Ok(None);
            };
            Some(back(&[&r], Some((*index, d.inj(i, r[q])))))
        }
        MallRule::WithR { index } => {
            let d = formula_dom(&fs[*index]);
            match d.case(x[*index]) {
                None => Some(x.to_vec()),
                Some((i, y)) => {
                    let q = lay.active(i, i as u8).expect("active");
                    let mut act = [0, 0];
                    act[i] = y;
                    let Some(r) = eval(&p.premises[i], &premise_vec(&lay.slots[i], x, &act), memo)? else {
                        return Ok(None);
                    };
                    // only premise i is consulted for the context
                    let v = (0..fs.len())
                        .map(|c| {
                            if c == *index {
                                d.inj(i, r[q])
                            } else {
                                r[lay.ctx(i, c).expect("context")]
                            }
                        })
                        .collect();
                    Some(v)
                }
            }
        }
        MallRule::ParR { index, .. } => {
            let d = formula_dom(&fs[*index]);
            let (a, b) = d.unpair(x[*index]);
            let (qa, qb) = (lay.active(0, 0).unwrap(), lay.active(0, 1).unwrap());
            let Some(r) = eval(&p.premises[0], &premise_vec(&lay.slots[0], x, &[a, b]), memo)? else {
                return Ok(None);
            };
            Some(back(&[&r], Some((*index, d.pair(r[qa], r[qb])))))
        }
        MallRule::TensorR { .. } => {
            let idx = lay.principal.expect("principal");
            let d = formula_dom(&fs[idx]);
            let (a, b) = d.unpair(x[idx]);
            let (q0, q1) = (lay.active(0, 0).unwrap(), lay.active(1, 1).unwrap());
            let r0 = eval(&p.premises[0], &premise_vec(&lay.slots[0], x, &[a, 0]), memo)?;
            let r1 = eval(&p.premises[1], &premise_vec(&lay.slots[1], x, &[0, b]), memo)?;
            match (r0, r1) {
                (Some(r0), Some(r1)) => Some(back(&[&r0, &r1], Some((idx, d.pair(r0[q0], r1[q1]))))),
                _ => None,
            }
        }
        MallRule::Cut { .. } => {
            let (q0, q1) = (lay.active(0, 0).unwrap(), lay.active(1, 1).unwrap());
            let cut_dom = formula_dom(&p.premises[0].conclusion.0[q0]);
            let y = fix(cut_dom.size() + 1, |y| {
                let Some(r1) = eval(&p.premises[1], &premise_vec(&lay.slots[1], x, &[0, y]), memo)? else {
                    return Ok(Point::Top);
                };
                let Some(r0) = eval(&p.premises[0], &premise_vec(&lay.slots[0], x, &[r1[q1], 0]), memo)? else {
                    return Ok(Point::Top);
                };
                Ok(Point::At(r0[q0]))
            })?;
            let Point::At(y) = y else { return Ok(None) };
            let r0 = eval(&p.premises[0], &premise_vec(&lay.slots[0], x, &[y, 0]), memo)?;
            let r1 = eval(&p.premises[1], &premise_vec(&lay.slots[1], x, &[0, y]), memo)?;
            match (r0, r1) {
                (Some(r0), Some(r1)) => Some(back(&[&r0, &r1], None)),
                _ => None,
            }
        }
    })
}

/// The closure of a proof on the product of its endsequent's domains.
pub fn interpret_proof_cgame(p: &MallProof) -> Result<ClosureOp, CGameError> {
    check_mall(p)?;
    let doms: Vec<Dom> = p.conclusion.0.iter().map(formula_dom).collect();
    let dom = sequent_dom(&doms);
    let mut memo = Memo::new();
    let mut table = Vec::with_capacity(dom.size());
    for e in 0..dom.size() {
        let x = decode_vec(&doms, e);
        table.push(match eval(p, &x, &mut memo)? {
            Some(r) => Point::At(encode_vec(&doms, &r)),
            None => Point::Top,
        });
    }
    Ok(ClosureOp { dom, table })
}

/// The domain of a proof's endsequent.
pub fn proof_dom(p: &MallProof) -> Dom {
    let doms: Vec<Dom> = p.conclusion.0.iter().map(formula_dom).collect();
    sequent_dom(&doms)
}

/// `x ∨ f(x)`, top where the join does not exist; the flag says whether the
/// result is a closure operator.
pub fn lift_function(f: &ClosureOp) -> (ClosureOp, bool) {
    let d = &f.dom;
    let g = ClosureOp::from_fn(d.clone(), |x| d.join_pt(Point::At(x), f.at(x)));
    let ok = is_closure(&g);
    (g, ok)
}

/// Axiom links on literal occurrences. Leaves without a cut partner are
/// external and come first, in left-to-right order of the endsequent.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Linking {
    pub axiom: Vec<usize>,
    pub cut: Vec<Option<usize>>,
}

impl Linking {
    pub fn leaves(&self) -> usize {
        self.axiom.len()
    }

    pub fn external(&self) -> Vec<usize> {
        (0..self.leaves()).filter(|&l| self.cut[l].is_none()).collect()
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.leaves())
            .filter(|&l| l < self.axiom[l])
            .map(|l| (l, self.axiom[l]))
            .collect()
    }

    /// The permutation of external leaves, for a cut-free linking.
    pub fn permutation(&self) -> Vec<usize> {
        self.axiom.clone()
    }
}

impl Serialize for Linking {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let cuts: Vec<(usize, usize)> = (0..self.leaves())
            .filter_map(|l| self.cut[l].filter(|&m| l < m).map(|m| (l, m)))
            .collect();
        let mut st = s.serialize_struct("Linking", 3)?;
        st.serialize_field("leaves", &self.leaves())?;
        st.serialize_field("axioms", &self.pairs())?;
        st.serialize_field("cuts", &cuts)?;
        st.end()
    }
}

/// Links of a multiplicative proof. Identity axioms on compound formulas
/// link corresponding literals.
pub fn linking_of_proof(p: &MallProof) -> Result<Linking, CGameError> {
    check_mall(p)?;
    let mut axiom: Vec<usize> = Vec::new();
    let mut cut: Vec<Option<usize>> = Vec::new();
    fn go(p: &MallProof, axiom: &mut Vec<usize>, cut: &mut Vec<Option<usize>>) -> Result<Vec<Vec<usize>>, CGameError> {
        let lay = layout(p)?;
        let fs = &p.conclusion.0;
        Ok(match &p.rule {
            MallRule::Id => {
                let k = fs[0].literals().len();
                let base = axiom.len();
                for i in 0..k {
                    axiom.push(base + k + i);
                    cut.push(None);
                }
                for i in 0..k {
                    axiom.push(base + i);
                    cut.push(None);
                }
                vec![(base..base + k).collect(), (base + k..base + 2 * k).collect()]
            }
            MallRule::ParR { .. } | MallRule::TensorR { .. } | MallRule::Cut { .. } => {
                let subs: Vec<Vec<Vec<usize>>> =
                    p.premises.iter().map(|q| go(q, axiom, cut)).collect::<Result<_, _>>()?;
                let act = |m: usize, r: u8| subs[m][lay.active(m, r).unwrap()].clone();
                let out: Vec<Vec<usize>> = (0..fs.len())
                    .map(|c| {
                        if Some(c) == lay.principal {
                            match p.rule {
                                MallRule::ParR { .. } => [act(0, 0), act(0, 1)].concat(),
                                _ => [act(0, 0), act(1, 1)].concat(),
                            }
                        } else {
                            let (m, q) = (0..subs.len())
                                .find_map(|m| lay.ctx(m, c).map(|q| (m, q)))
                                .expect("context");
                            subs[m][q].clone()
                        }
                    })
                    .collect();
                if let MallRule::Cut { .. } = p.rule {
                    for (a, b) in act(0, 0).into_iter().zip(act(1, 1)) {
                        cut[a] = Some(b);
                        cut[b] = Some(a);
                    }
                }
                out
            }
            other => return Err(CGameError::NotMultiplicative(other.name())),
        })
    }
    let ends = go(p, &mut axiom, &mut cut)?;
    // renumber: external leaves first, left to right
    let mut order: Vec<usize> = ends.concat();
    order.extend((0..axiom.len()).filter(|l| cut[*l].is_some()));
    let mut rank = vec![0; axiom.len()];
    for (k, &l) in order.iter().enumerate() {
        rank[l] = k;
    }
    let mut na = vec![0; axiom.len()];
    let mut nc = vec![None; axiom.len()];
    for l in 0..axiom.len() {
        na[rank[l]] = rank[axiom[l]];
        nc[rank[l]] = cut[l].map(|m| rank[m]);
    }
    Ok(Linking { axiom: na, cut: nc })
}

/// Follows axiom and cut links from every external leaf to the external
/// leaf it reaches.
pub fn execute_linking(l: &Linking) -> Result<Linking, CGameError> {
    let ext = l.external();
    let mut index = vec![usize::MAX; l.leaves()];
    for (k, &e) in ext.iter().enumerate() {
        index[e] = k;
    }
    let mut axiom = Vec::with_capacity(ext.len());
    for &e in &ext {
        let mut cur = l.axiom[e];
        let mut steps = 0;
        while let Some(next) = l.cut[cur] {
            cur = l.axiom[next];
            steps += 1;
            if steps > l.leaves() {
                return Err(CGameError::CyclicLinking(e));
            }
        }
        axiom.push(index[cur]);
    }
    Ok(Linking {
        cut: vec![None; axiom.len()],
        axiom,
    })
}

/// The permutation of a cut-free linking as a map on a product of flat
/// domains whose cells are its leaves.
pub fn linking_function(l: &Linking, dom: &Dom) -> Result<ClosureOp, CGameError> {
    let cells = dom.cells().ok_or(CGameError::NoCellStructure)?;
    if cells.len() != l.leaves() {
        return Err(CGameError::DomainMismatch(format!(
            "{} cells for {} leaves",
            cells.len(),
            l.leaves()
        )));
    }
    Ok(ClosureOp::from_fn(dom.clone(), |e| {
        let v = dom.cell_values(e);
        let w: Vec<usize> = (0..v.len()).map(|i| v[l.axiom[i]]).collect();
        Point::At(dom.from_cell_values(&w))
    }))
}

fn is_monotone(f: &ClosureOp) -> bool {
    let n = f.dom.size();
    (0..n).all(|x| (0..n).all(|y| !f.dom.leq(x, y) || f.dom.leq_pt(f.at(x), f.at(y))))
}

/// Meets of bounded pairs are preserved.
pub fn is_stable(f: &ClosureOp) -> Result<bool, CGameError> {
    if !is_monotone(f) {
        return Err(CGameError::NotMonotone);
    }
    let d = &f.dom;
    let n = d.size();
    for x in 0..n {
        for y in 0..n {
            if d.join(x, y).is_some() && f.at(d.meet(x, y)) != d.meet_pt(f.at(x), f.at(y)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Whether cell `c` of `f(x)` is filled; top fills every cell.
fn filled(d: &Dom, p: Point, c: usize) -> bool {
    match p {
        Point::Top => true,
        Point::At(e) => d.cell_values(e)[c] != 0,
    }
}

/// Vuillemin sequentiality on a product of flat domains: whenever an output
/// cell is empty but can still be filled, some empty input cell must be
/// filled first.
pub fn is_sequential(f: &ClosureOp) -> Result<bool, CGameError> {
    let d = &f.dom;
    let cells = d.cells().ok_or(CGameError::NoCellStructure)?.len();
    let n = d.size();
    for x in 0..n {
        let above: Vec<usize> = (0..n).filter(|&y| d.leq(x, y)).collect();
        let xv = d.cell_values(x);
        for c in 0..cells {
            if filled(d, f.at(x), c) {
                continue;
            }
            let fills: Vec<usize> = above.iter().copied().filter(|&y| filled(d, f.at(y), c)).collect();
            if fills.is_empty() {
                continue;
            }
            let needed = (0..cells).any(|c2| xv[c2] == 0 && fills.iter().all(|&y| d.cell_values(y)[c2] != 0));
            if !needed {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;

    fn bb() -> Dom {
        Dom::product(Dom::booleans(), Dom::booleans())
    }

    #[test]
    fn boolean_game() {
        let g = interpret_formula_cgame(&parse_formula("a").unwrap());
        assert_eq!(g.dom.size(), 3);
        let sp = g.sp.enumerate(&g.dom).unwrap();
        assert_eq!(sp.len(), 2);
        assert_eq!(g.so.enumerate(&g.dom).unwrap().len(), 1);
        assert_eq!(sp[0].table, vec![Point::At(1), Point::At(1), Point::Top]);
        assert!(sp.iter().all(is_closure));
    }

    #[test]
    fn lattice_operations() {
        let d = bb();
        let tt_bot = d.pair(1, 0);
        let bot_ff = d.pair(0, 2);
        assert_eq!(d.join(tt_bot, bot_ff), Some(d.pair(1, 2)));
        assert_eq!(d.join(d.pair(1, 0), d.pair(2, 0)), None);
        assert_eq!(d.meet(tt_bot, bot_ff), 0);
        assert_eq!(d.name(d.pair(1, 2)), "(tt, ff)");
    }

    #[test]
    fn play_is_symmetric_on_booleans() {
        let g = interpret_formula_cgame(&parse_formula("a").unwrap());
        let id = ClosureOp::identity(g.dom.clone());
        let tt = bool_strategy(1);
        assert_eq!(play_closures(&tt, &id), Point::At(1));
        assert_eq!(play_closures(&id, &tt), Point::At(1));
        assert_eq!(play_closures(&id, &id), Point::At(0));
    }

    #[test]
    fn twist_and_copycat() {
        let d = bb();
        let tw = ClosureOp::from_fn(d.clone(), |e| {
            let (x, y) = d.unpair(e);
            Point::At(d.pair(y, x))
        });
        let (cc, ok) = lift_function(&tw);
        assert!(ok);
        assert_eq!(cc.at(d.pair(1, 0)), Point::At(d.pair(1, 1)));
        assert_eq!(cc.at(d.pair(1, 2)), Point::Top);
        assert!(is_stable(&tw).unwrap());
        assert!(!is_stable(&cc).unwrap());
        assert!(is_sequential(&tw).unwrap());
    }

    #[test]
    fn parallel_or_is_not_sequential() {
        let d = Dom::product(Dom::booleans(), Dom::product(Dom::booleans(), Dom::booleans()));
        let por = ClosureOp::from_fn(d.clone(), |e| {
            let v = d.cell_values(e);
            let out = if v[0] == 1 || v[1] == 1 {
                1
            } else if v[0] == 2 && v[1] == 2 {
                2
            } else {
                0
            };
            Point::At(d.from_cell_values(&[0, 0, out]))
        });
        assert!(!is_sequential(&por).unwrap());
        let constant = ClosureOp::from_fn(d.clone(), |_| Point::At(d.from_cell_values(&[1, 0, 0])));
        assert!(is_sequential(&constant).unwrap());
    }

    #[test]
    fn smash_is_top_strict() {
        let t = tensor_strategy(&bool_strategy(1), &bool_strategy(2));
        let d = t.dom.clone();
        assert_eq!(t.at(0), Point::At(d.pair(1, 2)));
        assert_eq!(t.at(d.pair(2, 0)), Point::Top);
    }

    use crate::proofs::parse_mall;

    const PI1: &str = r#"(proves "|- ~a + ~a, a + a" (plusR 0 (plusR 1 (id ~a))))"#;
    const PI2: &str = r#"(proves "|- ~a & ~a, a & a"
        (withR 1 (withR 0 (id ~a) (id ~a)) (withR 0 (id ~a) (id ~a))))"#;
    const PI3: &str = r#"(proves "|- ~a + ~a, a + a" (plusR 1 (plusR 0 (id ~a))))"#;

    fn closure(src: &str) -> ClosureOp {
        interpret_proof_cgame(&parse_mall(src).unwrap()).unwrap()
    }

    fn named(f: &ClosureOp, e: usize) -> String {
        f.dom.point_name(f.at(e))
    }

    #[test]
    fn c_d_equations() {
        let c = closure(PI1);
        let d = closure(PI2);
        assert!(is_closure(&c) && is_closure(&d));
        assert_eq!(named(&c, 0), "(inr(bot), inr(bot))");
        let dd = &d.dom;
        let (da, _) = dd.factors();
        let x = da.inj(0, 1);
        assert_eq!(named(&d, dd.pair(x, 0)), "(inl(tt), bot)");
        assert_eq!(named(&d, dd.pair(0, x)), "(bot, inl(tt))");
        let y = da.inj(1, 0);
        assert_eq!(named(&d, dd.pair(x, y)), "(inl(tt), inr(tt))");
        let cd = compose_closures(&c, &d).unwrap();
        assert_eq!(named(&cd, 0), "(inr(bot), bot)");
    }

    #[test]
    fn cut_matches_composition() {
        let cut = closure(&format!("(cut (a + a) {PI1} {PI2})"));
        let comp = compose_closures(&closure(PI1), &closure(PI2)).unwrap();
        assert_eq!(cut, comp);
    }

    #[test]
    fn composition_is_associative_here() {
        let (c, d, e) = (closure(PI1), closure(PI2), closure(PI3));
        let left = compose_closures(&compose_closures(&c, &d).unwrap(), &e).unwrap();
        let right = compose_closures(&c, &compose_closures(&d, &e).unwrap()).unwrap();
        assert_eq!(left, right);
        assert_eq!(left, c);
        assert_eq!(c, e);
    }

    #[test]
    fn goi_lift_matches_interpretation() {
        for src in [
            r#"(proves "|- ~a | ~a, a * a" (parR 0 (tensorR 1 1 (id ~a) (id ~a))))"#,
            r#"(proves "|- ~a | ~a, a * a" (parR 0 2 0 (tensorR 1 1 (id ~a) (id ~a))))"#,
        ] {
            let p = parse_mall(src).unwrap();
            let l = linking_of_proof(&p).unwrap();
            let f = linking_function(&l, &proof_dom(&p)).unwrap();
            let (lifted, ok) = lift_function(&f);
            assert!(ok);
            assert_eq!(lifted, interpret_proof_cgame(&p).unwrap());
        }
    }
}
