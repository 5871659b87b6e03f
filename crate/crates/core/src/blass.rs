//! Polarized game trees, strategies as subtrees, and composition by
//! interaction.
//!
//! A [`Game`] is a guarded sum labelled with the player to move, or a tensor
//! or par of two games that is expanded on demand: [`moves`] computes the
//! first moves of any game and [`expand`] unfolds the whole tree.
//!
//! Proofs and composites are run as buffered players. Each one sees a list of
//! components (the formulas of a sequent, combined with par to the right),
//! queues the opponent moves it has received per component, and acts as soon
//! as its own rule allows.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::logic::{Formula, Polarity};
use crate::proofs::{check_mall, layout, MallProof, MallRule, ProofError, Slot};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MoveLabel {
    Base(String),
    /// Simultaneous moves in both components of a tensor or par.
    PairMove(Box<MoveLabel>, Box<MoveLabel>),
    SideL(Box<MoveLabel>),
    SideR(Box<MoveLabel>),
}

impl MoveLabel {
    pub fn base(name: &str) -> MoveLabel {
        MoveLabel::Base(name.to_string())
    }

    pub fn left(m: MoveLabel) -> MoveLabel {
        MoveLabel::SideL(Box::new(m))
    }

    pub fn right(m: MoveLabel) -> MoveLabel {
        MoveLabel::SideR(Box::new(m))
    }

    pub fn pair(a: MoveLabel, b: MoveLabel) -> MoveLabel {
        MoveLabel::PairMove(Box::new(a), Box::new(b))
    }
}

impl fmt::Display for MoveLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MoveLabel::Base(s) => f.write_str(s),
            MoveLabel::PairMove(a, b) => write!(f, "<{a},{b}>"),
            MoveLabel::SideL(m) => write!(f, "L.{m}"),
            MoveLabel::SideR(m) => write!(f, "R.{m}"),
        }
    }
}

impl Serialize for MoveLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Game {
    Sum {
        polarity: Polarity,
        children: BTreeMap<MoveLabel, Game>,
    },
    TensorG(Box<Game>, Box<Game>),
    ParG(Box<Game>, Box<Game>),
}

impl Game {
    pub fn sum(polarity: Polarity, children: impl IntoIterator<Item = (MoveLabel, Game)>) -> Game {
        Game::Sum {
            polarity,
            children: children.into_iter().collect(),
        }
    }

    pub fn empty(polarity: Polarity) -> Game {
        Game::sum(polarity, [])
    }

    /// Booleans: P picks `tt` or `ff`, after which O is stuck.
    pub fn booleans() -> Game {
        Game::sum(
            Polarity::P,
            [
                (MoveLabel::base("tt"), Game::empty(Polarity::O)),
                (MoveLabel::base("ff"), Game::empty(Polarity::O)),
            ],
        )
    }

    pub fn tensor(a: Game, b: Game) -> Game {
        Game::TensorG(Box::new(a), Box::new(b))
    }

    pub fn par(a: Game, b: Game) -> Game {
        Game::ParG(Box::new(a), Box::new(b))
    }

    /// The player to move at the root.
    pub fn polarity(&self) -> Polarity {
        match self {
            Game::Sum { polarity, .. } => *polarity,
            Game::TensorG(a, b) => a.polarity().tensor(b.polarity()),
            Game::ParG(a, b) => a.polarity().par(b.polarity()),
        }
    }

    /// Number of positions of the expanded tree.
    pub fn positions(&self) -> usize {
        1 + moves(self).iter().map(|(_, g)| g.positions()).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        moves(self).iter().map(|(_, g)| 1 + g.depth()).max().unwrap_or(0)
    }

    /// Residual after one move, if the move is legal.
    pub fn after(&self, m: &MoveLabel) -> Option<Game> {
        moves(self).into_iter().find(|(l, _)| l == m).map(|(_, g)| g)
    }
}

impl fmt::Display for Game {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Game::Sum { polarity, children } => {
                write!(f, "{polarity:?}{{")?;
                for (k, (l, g)) in children.iter().enumerate() {
                    if k > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{l}: {g}")?;
                }
                f.write_str("}")
            }
            Game::TensorG(a, b) => write!(f, "({a} * {b})"),
            Game::ParG(a, b) => write!(f, "({a} | {b})"),
        }
    }
}

pub fn dualize(g: &Game) -> Game {
    match g {
        Game::Sum { polarity, children } => Game::Sum {
            polarity: polarity.dual(),
            children: children.iter().map(|(l, c)| (l.clone(), dualize(c))).collect(),
        },
        Game::TensorG(a, b) => Game::par(dualize(a), dualize(b)),
        Game::ParG(a, b) => Game::tensor(dualize(a), dualize(b)),
    }
}

fn side_moves(g: &Game, wrap: fn(MoveLabel) -> MoveLabel, rebuild: impl Fn(Game) -> Game) -> Vec<(MoveLabel, Game)> {
    moves(g).into_iter().map(|(m, r)| (wrap(m), rebuild(r))).collect()
}

/// First moves of a game with their residuals, following the expansion
/// equations for tensor and par.
pub fn moves(g: &Game) -> Vec<(MoveLabel, Game)> {
    match g {
        Game::Sum { children, .. } => children.iter().map(|(l, c)| (l.clone(), c.clone())).collect(),
        Game::TensorG(a, b) | Game::ParG(a, b) => {
            let tensor = matches!(g, Game::TensorG(..));
            let mk = |x: Game, y: Game| if tensor { Game::tensor(x, y) } else { Game::par(x, y) };
            // the polarity whose single-sided moves step one component
            let (pa, pb) = (a.polarity(), b.polarity());
            let steps = if tensor { Polarity::P } else { Polarity::O };
            let left = || side_moves(a, MoveLabel::left, |x| mk(x, (**b).clone()));
            let right = || side_moves(b, MoveLabel::right, |y| mk((**a).clone(), y));
            match (pa == steps, pb == steps) {
                (true, true) => {
                    let mut out = Vec::new();
                    for (i, x) in moves(a) {
                        for (j, y) in moves(b) {
                            out.push((MoveLabel::pair(i.clone(), j), mk(x.clone(), y)));
                        }
                    }
                    out
                }
                (true, false) => left(),
                (false, true) => right(),
                (false, false) => {
                    let mut out = left();
                    out.extend(right());
                    out
                }
            }
        }
    }
}

/// Unfolds tensor and par nodes into plain sums.
pub fn expand(g: &Game) -> Game {
    Game::Sum {
        polarity: g.polarity(),
        children: moves(g).into_iter().map(|(m, r)| (m, expand(&r))).collect(),
    }
}

/// Atoms are booleans, negated atoms their duals; the additives are binary
/// sums labelled `inl` and `inr`.
pub fn interpret_formula_blass(f: &Formula) -> Game {
    let binary = |p: Polarity, a: &Formula, b: &Formula| {
        Game::sum(
            p,
            [
                (MoveLabel::base("inl"), interpret_formula_blass(a)),
                (MoveLabel::base("inr"), interpret_formula_blass(b)),
            ],
        )
    };
    match f {
        Formula::Atom(_) => Game::booleans(),
        Formula::NegAtom(_) => dualize(&Game::booleans()),
        Formula::Plus(a, b) => binary(Polarity::P, a, b),
        Formula::With(a, b) => binary(Polarity::O, a, b),
        Formula::Tensor(a, b) => Game::tensor(interpret_formula_blass(a), interpret_formula_blass(b)),
        Formula::Par(a, b) => Game::par(interpret_formula_blass(a), interpret_formula_blass(b)),
    }
}

/// Par of the components, associated to the right.
pub fn sequent_game(components: &[Game]) -> Game {
    match components {
        [] => Game::empty(Polarity::O),
        [g] => g.clone(),
        [g, rest @ ..] => Game::par(g.clone(), sequent_game(rest)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum StrategyTree {
    OutMove(MoveLabel, Box<StrategyTree>),
    InBranch(BTreeMap<MoveLabel, StrategyTree>),
    Stop,
}

impl StrategyTree {
    pub fn out(m: MoveLabel, next: StrategyTree) -> StrategyTree {
        StrategyTree::OutMove(m, Box::new(next))
    }

    pub fn size(&self) -> usize {
        match self {
            StrategyTree::OutMove(_, n) => 1 + n.size(),
            StrategyTree::InBranch(bs) => 1 + bs.values().map(StrategyTree::size).sum::<usize>(),
            StrategyTree::Stop => 1,
        }
    }

    /// The first move this strategy makes itself, following the first O
    /// branch while it waits.
    pub fn first_out_move(&self) -> Option<&MoveLabel> {
        match self {
            StrategyTree::OutMove(m, _) => Some(m),
            StrategyTree::InBranch(bs) => bs.values().next().and_then(StrategyTree::first_out_move),
            StrategyTree::Stop => None,
        }
    }
}

impl Serialize for StrategyTree {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        match self {
            StrategyTree::Stop => s.serialize_str("stop"),
            StrategyTree::OutMove(m, n) => {
                let mut map = s.serialize_map(Some(2))?;
                map.serialize_entry("out", m)?;
                map.serialize_entry("next", n)?;
                map.end()
            }
            StrategyTree::InBranch(bs) => {
                let mut map = s.serialize_map(Some(1))?;
                map.serialize_entry("in", bs)?;
                map.end()
            }
        }
    }
}

impl fmt::Display for StrategyTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyTree::Stop => f.write_str("0"),
            StrategyTree::OutMove(m, n) => write!(f, "'{m}.{n}"),
            StrategyTree::InBranch(bs) => {
                f.write_str("[")?;
                for (k, (m, n)) in bs.iter().enumerate() {
                    if k > 0 {
                        f.write_str(" + ")?;
                    }
                    write!(f, "{m}.{n}")?;
                }
                f.write_str("]")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Loser {
    P,
    O,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BlassError {
    #[error("rule {0} is not interpreted in this model")]
    Unsupported(&'static str),
    #[error("strategies out of step at move {0}")]
    Desync(String),
    #[error("no player can move although it is {0}'s turn")]
    Deadlock(String),
    #[error("both strategies are enabled at once")]
    NotExclusive,
    #[error("illegal move {0}")]
    IllegalMove(String),
    #[error(transparent)]
    Proof(#[from] ProofError),
}

/// All deterministic total strategies for `player`.
pub fn strategies(g: &Game, player: Polarity) -> Vec<StrategyTree> {
    let next = moves(g);
    if next.is_empty() {
        return vec![StrategyTree::Stop];
    }
    if g.polarity() == player {
        let mut out = Vec::new();
        for (m, r) in next {
            for s in strategies(&r, player) {
                out.push(StrategyTree::out(m.clone(), s));
            }
        }
        out
    } else {
        let mut acc: Vec<BTreeMap<MoveLabel, StrategyTree>> = vec![BTreeMap::new()];
        for (m, r) in next {
            let subs = strategies(&r, player);
            acc = acc
                .into_iter()
                .flat_map(|b| {
                    let m = &m;
                    subs.iter().map(move |s| {
                        let mut b = b.clone();
                        b.insert(m.clone(), s.clone());
                        b
                    })
                })
                .collect();
        }
        acc.into_iter().map(StrategyTree::InBranch).collect()
    }
}

/// Checks that `s` is a deterministic total strategy for `player` on `g`.
pub fn is_strategy(s: &StrategyTree, g: &Game, player: Polarity) -> bool {
    let next = moves(g);
    match s {
        StrategyTree::Stop => next.is_empty(),
        StrategyTree::OutMove(m, rest) => {
            g.polarity() == player
                && match next.iter().find(|(l, _)| l == m) {
                    Some((_, r)) => is_strategy(rest, r, player),
                    None => false,
                }
        }
        StrategyTree::InBranch(bs) => {
            g.polarity() != player
                && !next.is_empty()
                && bs.len() == next.len()
                && next
                    .iter()
                    .all(|(l, r)| bs.get(l).is_some_and(|b| is_strategy(b, r, player)))
        }
    }
}

/// Plays a P-strategy against an O-strategy; the loser is the player to
/// move at the final empty position.
pub fn play(sigma: &StrategyTree, tau: &StrategyTree, g: &Game) -> Result<(Vec<MoveLabel>, Loser), BlassError> {
    let (mut s, mut t, mut g) = (sigma, tau, g.clone());
    let mut trace = Vec::new();
    loop {
        let next = moves(&g);
        if next.is_empty() {
            let loser = match g.polarity() {
                Polarity::P => Loser::P,
                Polarity::O => Loser::O,
            };
            return Ok((trace, loser));
        }
        let (mover, waiter) = match g.polarity() {
            Polarity::P => (&mut s, &mut t),
            Polarity::O => (&mut t, &mut s),
        };
        let (m, rest) = match *mover {
            StrategyTree::OutMove(m, rest) => (m, rest.as_ref()),
            _ => return Err(BlassError::Desync(format!("{} at {:?}", g, trace))),
        };
        let StrategyTree::InBranch(bs) = *waiter else {
            return Err(BlassError::Desync(m.to_string()));
        };
        let reply = bs.get(m).ok_or_else(|| BlassError::Desync(m.to_string()))?;
        g = g.after(m).ok_or_else(|| BlassError::IllegalMove(m.to_string()))?;
        *mover = rest;
        *waiter = reply;
        trace.push(m.clone());
    }
}

/// Copy-cat on `g⊥ | g`: every O move is replayed on the other side as
/// soon as it is P's turn.
pub fn copycat_blass(g: &Game) -> StrategyTree {
    let board = vec![dualize(g), g.clone()];
    materialize(&Agent::Copy(board, vec![VecDeque::new(), VecDeque::new()]))
        .expect("copy-cat never deadlocks on dual games")
}

/// One copy-cat step on two dual components: replays the oldest queued move.
fn copy_step(
    board: &mut [Game],
    pending: &mut [VecDeque<MoveLabel>],
) -> Result<Option<(usize, MoveLabel)>, BlassError> {
    let Some(src) = (0..2).find(|&c| !pending[c].is_empty()) else {
        return Ok(None);
    };
    let dst = 1 - src;
    let m = pending[src].pop_front().expect("nonempty queue");
    board[src] = advance(&board[src], &m)?;
    board[dst] = advance(&board[dst], &m)?;
    Ok(Some((dst, m)))
}

fn encode_p(k: usize, width: usize, m: MoveLabel) -> MoveLabel {
    if k + 1 == width {
        (0..k).fold(m, |acc, _| MoveLabel::right(acc))
    } else {
        (0..k).fold(MoveLabel::left(m), |acc, _| MoveLabel::right(acc))
    }
}

/// Splits a move of the right-associated par of `width` components into
/// component moves.
fn decode(m: &MoveLabel, k: usize, width: usize, out: &mut Vec<(usize, MoveLabel)>) -> Result<(), BlassError> {
    if k + 1 == width {
        out.push((k, m.clone()));
        return Ok(());
    }
    match m {
        MoveLabel::SideL(x) => out.push((k, (**x).clone())),
        MoveLabel::SideR(y) => decode(y, k + 1, width, out)?,
        MoveLabel::PairMove(x, y) => {
            out.push((k, (**x).clone()));
            decode(y, k + 1, width, out)?;
        }
        MoveLabel::Base(_) => return Err(BlassError::IllegalMove(m.to_string())),
    }
    Ok(())
}

fn split_pair(m: &MoveLabel) -> Result<(Option<MoveLabel>, Option<MoveLabel>), BlassError> {
    match m {
        MoveLabel::SideL(x) => Ok((Some((**x).clone()), None)),
        MoveLabel::SideR(y) => Ok((None, Some((**y).clone()))),
        MoveLabel::PairMove(x, y) => Ok((Some((**x).clone()), Some((**y).clone()))),
        MoveLabel::Base(_) => Err(BlassError::IllegalMove(m.to_string())),
    }
}

fn advance(g: &Game, m: &MoveLabel) -> Result<Game, BlassError> {
    g.after(m).ok_or_else(|| BlassError::IllegalMove(format!("{m} in {g}")))
}

fn applied(g: &Game, pending: &VecDeque<MoveLabel>) -> Game {
    pending
        .iter()
        .fold(g.clone(), |acc, m| acc.after(m).expect("queued moves are legal"))
}

/// A player acting on a list of components.
#[derive(Clone, Debug)]
enum Agent {
    Tree(TreeAgent),
    Copy(Vec<Game>, Vec<VecDeque<MoveLabel>>),
    Proof(ProofAgent),
    Compose(Box<Compose>),
}

impl Agent {
    fn width(&self) -> usize {
        match self {
            Agent::Tree(t) => t.board.len(),
            Agent::Copy(b, _) => b.len(),
            Agent::Proof(p) => p.shapes.len(),
            Agent::Compose(c) => c.back.len(),
        }
    }

    /// Current residual of component `k`, counting received moves.
    fn comp(&self, k: usize) -> Game {
        match self {
            Agent::Tree(t) => applied(&t.board[k], &t.pending[k]),
            Agent::Copy(b, q) => applied(&b[k], &q[k]),
            Agent::Proof(p) => p.comp(k),
            Agent::Compose(c) => c.comp(k),
        }
    }

    fn p_turn(&self) -> bool {
        (0..self.width()).all(|k| self.comp(k).polarity() == Polarity::P)
    }

    fn receive(&mut self, k: usize, m: MoveLabel) -> Result<(), BlassError> {
        match self {
            Agent::Tree(t) => {
                t.pending[k].push_back(m);
                t.normalize()
            }
            Agent::Copy(_, q) => {
                q[k].push_back(m);
                Ok(())
            }
            Agent::Proof(p) => p.receive(k, m),
            Agent::Compose(c) => c.receive(k, m),
        }
    }

    /// The next own move, on component `.0`, with the state after it.
    fn step(&self) -> Result<Option<(usize, MoveLabel, Agent)>, BlassError> {
        if !self.p_turn() {
            return Ok(None);
        }
        match self {
            Agent::Tree(t) => Ok(t.step()?.map(|(k, m, t)| (k, m, Agent::Tree(t)))),
            Agent::Copy(b, q) => {
                let (mut b, mut q) = (b.clone(), q.clone());
                Ok(copy_step(&mut b, &mut q)?.map(|(k, m)| (k, m, Agent::Copy(b, q))))
            }
            Agent::Proof(p) => Ok(p.step()?.map(|(k, m, p)| (k, m, Agent::Proof(p)))),
            Agent::Compose(c) => Ok(c.step()?.map(|(k, m, c)| (k, m, Agent::Compose(Box::new(c))))),
        }
    }
}

/// An explicit strategy tree over a list of components.
#[derive(Clone, Debug)]
struct TreeAgent {
    tree: StrategyTree,
    board: Vec<Game>,
    pending: Vec<VecDeque<MoveLabel>>,
}

impl TreeAgent {
    fn new(tree: StrategyTree, board: Vec<Game>) -> TreeAgent {
        let pending = vec![VecDeque::new(); board.len()];
        TreeAgent { tree, board, pending }
    }

    /// Consumes queued moves once every O-rooted component has one.
    fn normalize(&mut self) -> Result<(), BlassError> {
        loop {
            let StrategyTree::InBranch(bs) = &self.tree else {
                return Ok(());
            };
            let width = self.board.len();
            let o_comps: Vec<usize> = (0..width)
                .filter(|&k| self.board[k].polarity() == Polarity::O)
                .collect();
            if o_comps.is_empty() || o_comps.iter().any(|&k| self.pending[k].is_empty()) {
                return Ok(());
            }
            let mut parts: Vec<Option<MoveLabel>> = vec![None; width];
            for &k in &o_comps {
                parts[k] = self.pending[k].pop_front();
            }
            let label = encode_o(&parts);
            let next = bs
                .get(&label)
                .cloned()
                .ok_or_else(|| BlassError::Desync(label.to_string()))?;
            for (k, m) in parts.iter().enumerate() {
                if let Some(m) = m {
                    self.board[k] = advance(&self.board[k], m)?;
                }
            }
            self.tree = next;
        }
    }

    fn step(&self) -> Result<Option<(usize, MoveLabel, TreeAgent)>, BlassError> {
        let StrategyTree::OutMove(label, next) = &self.tree else {
            return Ok(None);
        };
        let mut parts = Vec::new();
        decode(label, 0, self.board.len(), &mut parts)?;
        let [(k, m)] = parts.as_slice() else {
            return Err(BlassError::IllegalMove(label.to_string()));
        };
        let mut t = self.clone();
        t.board[*k] = advance(&t.board[*k], m)?;
        t.tree = (**next).clone();
        t.normalize()?;
        Ok(Some((*k, m.clone(), t)))
    }
}

/// Label of a simultaneous O move on the chosen components of a
/// right-associated par.
fn encode_o(parts: &[Option<MoveLabel>]) -> MoveLabel {
    match parts {
        [last] => last.clone().expect("a move on the last component"),
        [first, rest @ ..] => {
            let rest_has = rest.iter().any(Option::is_some);
            match (first, rest_has) {
                (Some(m), true) => MoveLabel::pair(m.clone(), encode_o(rest)),
                (Some(m), false) => MoveLabel::left(m.clone()),
                (None, _) => MoveLabel::right(encode_o(rest)),
            }
        }
        [] => unreachable!("no components"),
    }
}

/// How an external component is assembled from node positions.
#[derive(Clone, Debug)]
enum Shape {
    Leaf(usize),
    Par(Box<Shape>, Box<Shape>),
}

impl Shape {
    fn map(&self, f: &impl Fn(usize) -> Shape) -> Shape {
        match self {
            Shape::Leaf(c) => f(*c),
            Shape::Par(a, b) => Shape::Par(Box::new(a.map(f)), Box::new(b.map(f))),
        }
    }

    /// Wraps a move made at leaf `c`, if the leaf lies in this shape.
    fn wrap(&self, c: usize, m: &MoveLabel) -> Option<MoveLabel> {
        match self {
            Shape::Leaf(d) => (*d == c).then(|| m.clone()),
            Shape::Par(a, b) => a
                .wrap(c, m)
                .map(MoveLabel::left)
                .or_else(|| b.wrap(c, m).map(MoveLabel::right)),
        }
    }

    fn split(&self, m: MoveLabel, out: &mut Vec<(usize, MoveLabel)>) -> Result<(), BlassError> {
        match self {
            Shape::Leaf(c) => out.push((*c, m)),
            Shape::Par(a, b) => {
                let (x, y) = split_pair(&m)?;
                if let Some(x) = x {
                    a.split(x, out)?;
                }
                if let Some(y) = y {
                    b.split(y, out)?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
enum NodeState {
    Rule {
        node: MallProof,
        board: Vec<Game>,
        pending: Vec<VecDeque<MoveLabel>>,
    },
    Cut(Box<Compose>),
}

/// A proof being played from its last rule upwards.
#[derive(Clone, Debug)]
struct ProofAgent {
    state: NodeState,
    shapes: Vec<Shape>,
}

impl ProofAgent {
    fn new(node: MallProof, board: Vec<Game>) -> Result<ProofAgent, BlassError> {
        let n = board.len();
        let mut p = ProofAgent {
            state: NodeState::Rule {
                node,
                board,
                pending: vec![VecDeque::new(); n],
            },
            shapes: (0..n).map(Shape::Leaf).collect(),
        };
        p.normalize()?;
        Ok(p)
    }

    fn leaf(&self, c: usize) -> Game {
        match &self.state {
            NodeState::Rule { board, pending, .. } => applied(&board[c], &pending[c]),
            NodeState::Cut(comp) => comp.comp(c),
        }
    }

    fn shape_game(&self, s: &Shape) -> Game {
        match s {
            Shape::Leaf(c) => self.leaf(*c),
            Shape::Par(a, b) => Game::par(self.shape_game(a), self.shape_game(b)),
        }
    }

    fn comp(&self, k: usize) -> Game {
        self.shape_game(&self.shapes[k])
    }

    fn receive(&mut self, k: usize, m: MoveLabel) -> Result<(), BlassError> {
        let mut parts = Vec::new();
        self.shapes[k].split(m, &mut parts)?;
        for (c, m) in parts {
            match &mut self.state {
                NodeState::Rule { pending, .. } => pending[c].push_back(m),
                NodeState::Cut(comp) => comp.receive(c, m)?,
            }
        }
        self.normalize()
    }

    /// Moves to premise `m` of the current rule; `active` gives the games
    /// and queued moves of the premise's active positions by role.
    fn enter(&mut self, m: usize, active: [Option<(Game, VecDeque<MoveLabel>)>; 2]) -> Result<(), BlassError> {
        let NodeState::Rule { node, board, pending } = &self.state else {
            unreachable!("enter is only called on rule nodes")
        };
        let lay = layout(node)?;
        let premise = node.premises[m].clone();
        let mut nb = Vec::new();
        let mut np = Vec::new();
        let mut active = active;
        for slot in &lay.slots[m] {
            match slot {
                Slot::Ctx(c) => {
                    nb.push(board[*c].clone());
                    np.push(pending[*c].clone());
                }
                Slot::Active(r) => {
                    let (g, q) = active[*r as usize].take().expect("active game supplied");
                    nb.push(g);
                    np.push(q);
                }
            }
        }
        let principal = lay.principal;
        let par_parts = match (&node.rule, principal) {
            (MallRule::ParR { .. }, Some(_)) => Some((lay.active(0, 0).unwrap(), lay.active(0, 1).unwrap())),
            _ => None,
        };
        let single = (0..2u8).find_map(|r| lay.active(m, r));
        let to_premise = |c: usize| -> Shape {
            if Some(c) == principal {
                match par_parts {
                    Some((a, b)) => Shape::Par(Box::new(Shape::Leaf(a)), Box::new(Shape::Leaf(b))),
                    None => Shape::Leaf(single.expect("active position")),
                }
            } else {
                Shape::Leaf(lay.ctx(m, c).expect("context position"))
            }
        };
        self.shapes = self.shapes.iter().map(|s| s.map(&to_premise)).collect();
        self.state = NodeState::Rule {
            node: premise,
            board: nb,
            pending: np,
        };
        Ok(())
    }

    /// Applies every rule that needs no move from this player.
    fn normalize(&mut self) -> Result<(), BlassError> {
        loop {
            let NodeState::Rule { node, board, pending } = &mut self.state else {
                return Ok(());
            };
            match node.rule.clone() {
                MallRule::ParR { index, .. } => {
                    let Game::ParG(a, b) = board[index].clone() else {
                        return Err(BlassError::IllegalMove(format!("par rule on {}", board[index])));
                    };
                    let (mut qa, mut qb) = (VecDeque::new(), VecDeque::new());
                    for m in std::mem::take(&mut pending[index]) {
                        let (x, y) = split_pair(&m)?;
                        qa.extend(x);
                        qb.extend(y);
                    }
                    self.enter(0, [Some((*a, qa)), Some((*b, qb))])?;
                }
                MallRule::WithR { index } => {
                    let Some(m) = pending[index].pop_front() else {
                        return Ok(());
                    };
                    let branch = match &m {
                        MoveLabel::Base(s) if s == "inl" => 0,
                        MoveLabel::Base(s) if s == "inr" => 1,
                        _ => return Err(BlassError::IllegalMove(m.to_string())),
                    };
                    let child = advance(&board[index], &m)?;
                    let rest = std::mem::take(&mut pending[index]);
                    let mut active = [None, None];
                    active[branch] = Some((child, rest));
                    self.enter(branch, active)?;
                }
                MallRule::Cut { .. } => {
                    let comp = Compose::from_cut(node, board, pending)?;
                    self.state = NodeState::Cut(Box::new(comp));
                }
                MallRule::TensorR { .. } => return Err(BlassError::Unsupported("tensorR")),
                MallRule::Id | MallRule::PlusL { .. } | MallRule::PlusR { .. } => return Ok(()),
            }
        }
    }

    fn emit_at(&self, c: usize, m: &MoveLabel) -> (usize, MoveLabel) {
        self.shapes
            .iter()
            .enumerate()
            .find_map(|(k, s)| s.wrap(c, m).map(|l| (k, l)))
            .expect("every position belongs to a component")
    }

    fn step(&self) -> Result<Option<(usize, MoveLabel, ProofAgent)>, BlassError> {
        match &self.state {
            NodeState::Cut(comp) => {
                let Some((c, m, comp2)) = comp.step()? else {
                    return Ok(None);
                };
                let (k, label) = self.emit_at(c, &m);
                let mut next = self.clone();
                next.state = NodeState::Cut(Box::new(comp2));
                Ok(Some((k, label, next)))
            }
            NodeState::Rule { node, board, .. } => match node.rule {
                MallRule::PlusL { index } | MallRule::PlusR { index } => {
                    let left = matches!(node.rule, MallRule::PlusL { .. });
                    let m = MoveLabel::base(if left { "inl" } else { "inr" });
                    let child = advance(&board[index], &m)?;
                    let (k, label) = self.emit_at(index, &m);
                    let mut next = self.clone();
                    next.enter(0, [Some((child, VecDeque::new())), None])?;
                    next.normalize()?;
                    Ok(Some((k, label, next)))
                }
                MallRule::Id => {
                    let mut next = self.clone();
                    let NodeState::Rule { board, pending, .. } = &mut next.state else {
                        unreachable!()
                    };
                    let Some((dst, m)) = copy_step(board, pending)? else {
                        return Ok(None);
                    };
                    let (k, label) = self.emit_at(dst, &m);
                    Ok(Some((k, label, next)))
                }
                _ => Ok(None),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

/// Two players sharing one hidden component, run by interaction.
#[derive(Clone, Debug)]
struct Compose {
    left: Agent,
    right: Agent,
    /// Hidden component index on each side.
    hidden: (usize, usize),
    /// Source of each external component.
    back: Vec<(Side, usize)>,
}

impl Compose {
    fn from_cut(node: &MallProof, board: &[Game], pending: &[VecDeque<MoveLabel>]) -> Result<Compose, BlassError> {
        let lay = layout(node)?;
        let mut agents = Vec::new();
        let mut hidden = [0; 2];
        let mut back = vec![(Side::Left, 0); board.len()];
        for (m, side) in [Side::Left, Side::Right].into_iter().enumerate() {
            let premise = &node.premises[m];
            let mut nb = Vec::new();
            let mut queued = Vec::new();
            for (q, slot) in lay.slots[m].iter().enumerate() {
                match slot {
                    Slot::Ctx(c) => {
                        nb.push(board[*c].clone());
                        queued.push((q, pending[*c].clone()));
                        back[*c] = (side, q);
                    }
                    Slot::Active(_) => {
                        hidden[m] = q;
                        nb.push(interpret_formula_blass(&premise.conclusion.0[q]));
                    }
                }
            }
            let mut agent = Agent::Proof(ProofAgent::new(premise.clone(), nb)?);
            for (q, ms) in queued {
                for x in ms {
                    agent.receive(q, x)?;
                }
            }
            agents.push(agent);
        }
        let right = agents.pop().unwrap();
        let left = agents.pop().unwrap();
        Ok(Compose {
            left,
            right,
            hidden: (hidden[0], hidden[1]),
            back,
        })
    }

    fn side(&self, s: Side) -> &Agent {
        match s {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    fn comp(&self, k: usize) -> Game {
        let (s, q) = self.back[k];
        self.side(s).comp(q)
    }

    fn receive(&mut self, k: usize, m: MoveLabel) -> Result<(), BlassError> {
        let (s, q) = self.back[k];
        match s {
            Side::Left => self.left.receive(q, m),
            Side::Right => self.right.receive(q, m),
        }
    }

    fn p_turn(&self) -> bool {
        (0..self.back.len()).all(|k| self.comp(k).polarity() == Polarity::P)
    }

    /// Runs hidden exchanges until one side moves outside.
    fn step(&self) -> Result<Option<(usize, MoveLabel, Compose)>, BlassError> {
        if !self.p_turn() {
            return Ok(None);
        }
        let mut cur = self.clone();
        loop {
            let (lp, rp) = (cur.left.p_turn(), cur.right.p_turn());
            if lp && rp {
                return Err(BlassError::NotExclusive);
            }
            let side = match (lp, rp) {
                (true, _) => Side::Left,
                (_, true) => Side::Right,
                _ => return Err(BlassError::Deadlock("a composite".into())),
            };
            let Some((q, m, moved)) = cur.side(side).step()? else {
                return Err(BlassError::Deadlock(format!("the {side:?} strategy")));
            };
            let (hid, other_hid) = match side {
                Side::Left => (cur.hidden.0, cur.hidden.1),
                Side::Right => (cur.hidden.1, cur.hidden.0),
            };
            match side {
                Side::Left => cur.left = moved,
                Side::Right => cur.right = moved,
            }
            if q == hid {
                match side {
                    Side::Left => cur.right.receive(other_hid, m)?,
                    Side::Right => cur.left.receive(other_hid, m)?,
                }
                continue;
            }
            let k = cur
                .back
                .iter()
                .position(|&b| b == (side, q))
                .expect("external component");
            return Ok(Some((k, m, cur)));
        }
    }
}

/// Unfolds a player into a strategy tree on the par of its components.
fn materialize(agent: &Agent) -> Result<StrategyTree, BlassError> {
    let width = agent.width();
    let comps: Vec<Game> = (0..width).map(|k| agent.comp(k)).collect();
    let g = sequent_game(&comps);
    let next = moves(&g);
    if next.is_empty() {
        return Ok(StrategyTree::Stop);
    }
    match g.polarity() {
        Polarity::P => {
            let (k, m, after) = agent.step()?.ok_or_else(|| BlassError::Deadlock("P".into()))?;
            let label = encode_p(k, width, m);
            if !next.iter().any(|(l, _)| *l == label) {
                return Err(BlassError::IllegalMove(label.to_string()));
            }
            Ok(StrategyTree::out(label, materialize(&after)?))
        }
        Polarity::O => {
            let mut bs = BTreeMap::new();
            for (label, _) in next {
                let mut parts = Vec::new();
                decode(&label, 0, width, &mut parts)?;
                let mut a = agent.clone();
                for (k, m) in parts {
                    a.receive(k, m)?;
                }
                bs.insert(label, materialize(&a)?);
            }
            Ok(StrategyTree::InBranch(bs))
        }
    }
}

/// Composes `sigma` on `A⊥ | B` with `tau` on `B⊥ | C`, hiding `B`.
pub fn compose(
    sigma: &StrategyTree,
    tau: &StrategyTree,
    a: &Game,
    b: &Game,
    c: &Game,
) -> Result<StrategyTree, BlassError> {
    let left = Agent::Tree(TreeAgent::new(sigma.clone(), vec![dualize(a), b.clone()]));
    let right = Agent::Tree(TreeAgent::new(tau.clone(), vec![dualize(b), c.clone()]));
    let comp = Compose {
        left,
        right,
        hidden: (1, 0),
        back: vec![(Side::Left, 0), (Side::Right, 1)],
    };
    materialize(&Agent::Compose(Box::new(comp)))
}

/// The strategy of a proof on the par of its endsequent. Cuts are composed;
/// the tensor rule is not interpreted.
pub fn interpret_proof_blass(p: &MallProof) -> Result<StrategyTree, BlassError> {
    check_mall(p)?;
    let board = p.conclusion.0.iter().map(interpret_formula_blass).collect();
    let agent = ProofAgent::new(p.clone(), board)?;
    materialize(&Agent::Proof(agent))
}

/// The game a proof's strategy is played on.
pub fn proof_game(p: &MallProof) -> Game {
    let comps: Vec<Game> = p.conclusion.0.iter().map(interpret_formula_blass).collect();
    sequent_game(&comps)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum InitialMover {
    O,
    Sigma,
    Tau,
    Theta,
    Ambiguous,
}

impl fmt::Display for InitialMover {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitialMover::O => "O",
            InitialMover::Sigma => "sigma",
            InitialMover::Tau => "tau",
            InitialMover::Theta => "theta",
            InitialMover::Ambiguous => "?",
        })
    }
}

/// Who moves first in `A⊥ | D` when `sigma: A -> B`, `tau: B -> C` and
/// `theta: C -> D` are composed, given the root polarities of the four games.
pub fn initial_mover(a: Polarity, b: Polarity, c: Polarity, d: Polarity) -> InitialMover {
    use InitialMover::*;
    let p = |x: Polarity, y: Polarity| x.dual().par(y) == Polarity::P;
    if !p(a, d) {
        return O;
    }
    // (sigma; tau); theta
    let first = if p(a, c) {
        if p(a, b) {
            Sigma
        } else {
            Tau
        }
    } else {
        Theta
    };
    // sigma; (tau; theta)
    let second = if p(a, b) {
        Sigma
    } else if p(b, c) {
        Tau
    } else {
        Theta
    };
    if first == second {
        first
    } else {
        Ambiguous
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;

    fn g(text: &str) -> Game {
        interpret_formula_blass(&parse_formula(text).unwrap())
    }

    #[test]
    fn booleans_and_duals() {
        let b = g("a");
        assert_eq!(b, Game::booleans());
        assert_eq!(g("~a"), dualize(&b));
        assert_eq!(dualize(&dualize(&b)), b);
        assert_eq!(g("a & a").polarity(), Polarity::O);
    }

    #[test]
    fn tensor_of_booleans_pairs_moves() {
        let e = expand(&g("a * a"));
        let Game::Sum { polarity, children } = &e else { panic!() };
        assert_eq!(*polarity, Polarity::P);
        assert_eq!(children.len(), 4);
        assert!(children.keys().all(|k| matches!(k, MoveLabel::PairMove(..))));
    }

    #[test]
    fn boolean_strategies() {
        assert_eq!(strategies(&g("a"), Polarity::P).len(), 2);
        assert_eq!(strategies(&g("a"), Polarity::O).len(), 1);
        assert_eq!(strategies(&g("~a | a"), Polarity::P).len(), 4);
    }

    #[test]
    fn play_booleans() {
        let b = g("a");
        let s = StrategyTree::out(MoveLabel::base("tt"), StrategyTree::Stop);
        let t = strategies(&b, Polarity::O).pop().unwrap();
        assert_eq!(play(&s, &t, &b).unwrap(), (vec![MoveLabel::base("tt")], Loser::O));
    }

    #[test]
    fn copycat_is_a_strategy() {
        for f in ["a", "a & a", "a + (a & a)", "a * a", "~a | a"] {
            let game = g(f);
            let cc = copycat_blass(&game);
            assert!(
                is_strategy(&cc, &Game::par(dualize(&game), game.clone()), Polarity::P),
                "{f}"
            );
        }
    }

    #[test]
    fn table_row_five() {
        use Polarity::{O, P};
        assert_eq!(initial_mover(O, P, O, P), InitialMover::Ambiguous);
        assert_eq!(initial_mover(O, O, O, P), InitialMover::Theta);
        assert_eq!(initial_mover(P, P, P, P), InitialMover::O);
    }

    const PI1: &str = r#"(proves "|- ~a + ~a, a + a" (plusR 0 (plusR 1 (id ~a))))"#;
    const PI2: &str = r#"(proves "|- ~a & ~a, a & a"
        (withR 1 (withR 0 (id ~a) (id ~a)) (withR 0 (id ~a) (id ~a))))"#;
    const PI3: &str = r#"(proves "|- ~a + ~a, a + a" (plusR 1 (plusR 0 (id ~a))))"#;

    fn strat(text: &str) -> (StrategyTree, Game) {
        let p = crate::proofs::parse_mall(text).unwrap();
        (interpret_proof_blass(&p).unwrap(), proof_game(&p))
    }

    #[test]
    fn proofs_open_as_expected() {
        let (s1, g1) = strat(PI1);
        let (s2, g2) = strat(PI2);
        let (s3, g3) = strat(PI3);
        assert!(is_strategy(&s1, &g1, Polarity::P));
        assert!(is_strategy(&s2, &g2, Polarity::P));
        assert!(is_strategy(&s3, &g3, Polarity::P));
        assert!(matches!(&s1, StrategyTree::OutMove(MoveLabel::SideL(_), _)));
        assert!(matches!(&s2, StrategyTree::InBranch(_)));
        assert!(matches!(&s3, StrategyTree::OutMove(MoveLabel::SideR(_), _)));
    }

    #[test]
    fn bracketings_differ() {
        let (s1, _) = strat(PI1);
        let (s2, _) = strat(PI2);
        let (s3, _) = strat(PI3);
        let a = g("a & a");
        let b = g("a + a");
        let left = compose(&compose(&s1, &s2, &a, &b, &a).unwrap(), &s3, &a, &a, &b).unwrap();
        let right = compose(&s1, &compose(&s2, &s3, &b, &a, &b).unwrap(), &a, &b, &b).unwrap();
        assert_ne!(left, right);
        assert!(matches!(left.first_out_move(), Some(MoveLabel::SideR(_))));
        assert!(matches!(right.first_out_move(), Some(MoveLabel::SideL(_))));
        let game = Game::par(dualize(&a), b.clone());
        assert!(is_strategy(&left, &game, Polarity::P));
        assert!(is_strategy(&right, &game, Polarity::P));
    }

    #[test]
    fn cut_matches_compose() {
        let p = crate::proofs::parse_mall(&format!("(cut (a + a) {PI1} {PI2})")).unwrap();
        let (s1, _) = strat(PI1);
        let (s2, _) = strat(PI2);
        let direct = compose(&s1, &s2, &g("a & a"), &g("a + a"), &g("a & a")).unwrap();
        assert_eq!(interpret_proof_blass(&p).unwrap(), direct);
    }
}
