//! Bounded search for rule permutations relating two cut-free proofs.
//!
//! Moves swap two adjacent rules whose principal formulas are independent:
//! a unary rule over a unary rule, a unary rule over a with (copying the
//! unary rule into both branches), a with over two copies of the same unary
//! rule (the inverse), and a with over two withs on the same formula.

use std::collections::{HashSet, VecDeque};

use serde::Serialize;

use super::{check_mall, layout, mk_cut, rebuild, reorder_root, MallProof, MallRule, Slot};
use crate::logic::match_positions;

pub const DEFAULT_BUDGET: usize = 16;

/// Hard cap on distinct proofs visited, independent of the swap budget.
const MAX_STATES: usize = 50_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PermutationResult {
    pub equal: bool,
    /// The search stopped at the budget or the state cap with unexplored proofs left.
    pub inconclusive: bool,
    pub explored: usize,
}

pub fn permutation_equal(p: &MallProof, q: &MallProof, budget: usize) -> bool {
    permutation_search(p, q, budget).equal
}

pub fn permutation_search(p: &MallProof, q: &MallProof, budget: usize) -> PermutationResult {
    let (Ok(_), Ok(_)) = (check_mall(p), check_mall(q)) else {
        return PermutationResult {
            equal: false,
            inconclusive: false,
            explored: 0,
        };
    };
    if !p.conclusion.multiset_eq(&q.conclusion) || p.has_cut() || q.has_cut() {
        return PermutationResult {
            equal: false,
            inconclusive: false,
            explored: 0,
        };
    }
    let target = canonical(&reorder_root(q.clone(), &p.conclusion));
    let start = canonical(p);
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(start.clone());
    queue.push_back((start, 0usize));
    let mut frontier_cut = false;
    while let Some((cur, depth)) = queue.pop_front() {
        if cur == target {
            return PermutationResult {
                equal: true,
                inconclusive: false,
                explored: seen.len(),
            };
        }
        if depth == budget {
            frontier_cut = true;
            continue;
        }
        for n in neighbours(&cur) {
            if seen.len() >= MAX_STATES {
                return PermutationResult {
                    equal: false,
                    inconclusive: true,
                    explored: seen.len(),
                };
            }
            if seen.insert(n.clone()) {
                queue.push_back((n, depth + 1));
            }
        }
    }
    // the closure was exhausted only if nothing was cut off by the budget
    let inconclusive = frontier_cut && seen.len() > 1;
    PermutationResult {
        equal: false,
        inconclusive,
        explored: seen.len(),
    }
}

/// Rebuilds every node bottom-up so that inner sequents are laid out the
/// same way whatever order they were written in; the root keeps its order.
pub(crate) fn canonical(p: &MallProof) -> MallProof {
    reorder_root(canon_inner(p), &p.conclusion)
}

fn canon_inner(p: &MallProof) -> MallProof {
    if p.rule == MallRule::Id {
        return p.clone();
    }
    let lay = layout(p).expect("checked proof");
    let prems: Vec<MallProof> = p.premises.iter().map(canon_inner).collect();
    let maps: Vec<Vec<usize>> = p
        .premises
        .iter()
        .zip(&prems)
        .map(|(old, new)| match_positions(old.conclusion.formulas(), new.conclusion.formulas()).expect("same multiset"))
        .collect();
    match p.rule {
        MallRule::Cut { .. } => {
            let k1 = maps[0][lay.active(0, 0).unwrap()];
            let k2 = maps[1][lay.active(1, 1).unwrap()];
            let mut it = prems.into_iter();
            mk_cut(it.next().unwrap(), k1, it.next().unwrap(), k2)
        }
        _ => rebuild(p, &lay, prems, &maps),
    }
}

/// Map from a node's premise positions to its conclusion positions.
fn down_map(node: &MallProof, premise: usize) -> Vec<usize> {
    layout(node).expect("built node").slots[premise]
        .iter()
        .map(|s| match s {
            Slot::Ctx(c) => *c,
            Slot::Active(_) => usize::MAX,
        })
        .collect()
}

/// Map from `upper`'s conclusion positions into premise `m` of `upper`.
fn up_map(upper: &MallProof, m: usize) -> Vec<usize> {
    let lay = layout(upper).expect("checked node");
    (0..upper.conclusion.len())
        .map(|c| lay.ctx(m, c).unwrap_or(usize::MAX))
        .collect()
}

fn is_unary(r: &MallRule) -> bool {
    matches!(
        r,
        MallRule::ParR { .. } | MallRule::PlusL { .. } | MallRule::PlusR { .. }
    )
}

fn same_kind(a: &MallRule, b: &MallRule) -> bool {
    std::mem::discriminant(a) == std::mem::discriminant(b)
}

/// All proofs one swap away, at any node.
fn neighbours(p: &MallProof) -> Vec<MallProof> {
    let mut out: Vec<MallProof> = swaps_at(p)
        .into_iter()
        .filter(|n| check_mall(n).is_ok())
        .map(|n| canonical(&n))
        .collect();
    for k in 0..p.premises.len() {
        for sub in neighbours(&p.premises[k]) {
            let mut q = p.clone();
            q.premises[k] = reorder_root(sub, &p.premises[k].conclusion);
            out.push(canonical(&q));
        }
    }
    out
}

fn swaps_at(n: &MallProof) -> Vec<MallProof> {
    let mut out = Vec::new();
    let Ok(lay_n) = layout(n) else { return out };
    if is_unary(&n.rule) {
        let m = &n.premises[0];
        let lay_m = match layout(m) {
            Ok(l) => l,
            Err(_) => return out,
        };
        let Some(pm) = lay_m.principal else { return out };
        if matches!(lay_n.slots[0][pm], Slot::Active(_)) {
            return out;
        }
        if is_unary(&m.rule) {
            let q = m.premises[0].clone();
            let lower = rebuild(n, &lay_n, vec![q], &[up_map(m, 0)]);
            let to_lower = down_map(&lower, 0);
            let swapped = rebuild(m, &lay_m, vec![lower], &[to_lower]);
            out.push(reorder_root(swapped, &n.conclusion));
        } else if m.rule.arity() == 2 && matches!(m.rule, MallRule::WithR { .. }) {
            let branches: Vec<MallProof> = (0..2)
                .map(|k| rebuild(n, &lay_n, vec![m.premises[k].clone()], &[up_map(m, k)]))
                .collect();
            let maps: Vec<Vec<usize>> = branches.iter().map(|b| down_map(b, 0)).collect();
            let swapped = rebuild(m, &lay_m, branches, &maps);
            out.push(reorder_root(swapped, &n.conclusion));
        }
    } else if matches!(n.rule, MallRule::WithR { .. }) {
        let (m1, m2) = (&n.premises[0], &n.premises[1]);
        let (Ok(l1), Ok(l2)) = (layout(m1), layout(m2)) else {
            return out;
        };
        let (Some(p1), Some(p2)) = (l1.principal, l2.principal) else {
            return out;
        };
        // both branches must act on the same context formula of the with
        let (Slot::Ctx(c1), Slot::Ctx(c2)) = (lay_n.slots[0][p1], lay_n.slots[1][p2]) else {
            return out;
        };
        if c1 != c2 || !same_kind(&m1.rule, &m2.rule) {
            return out;
        }
        if is_unary(&m1.rule) {
            let w = rebuild(
                n,
                &lay_n,
                vec![m1.premises[0].clone(), m2.premises[0].clone()],
                &[up_map(m1, 0), up_map(m2, 0)],
            );
            let to_w = down_map(&w, 0);
            let swapped = rebuild(m1, &l1, vec![w], &[to_w]);
            out.push(reorder_root(swapped, &n.conclusion));
        } else if matches!(m1.rule, MallRule::WithR { .. }) {
            let inner: Vec<MallProof> = (0..2)
                .map(|k| {
                    rebuild(
                        n,
                        &lay_n,
                        vec![m1.premises[k].clone(), m2.premises[k].clone()],
                        &[up_map(m1, k), up_map(m2, k)],
                    )
                })
                .collect();
            let maps: Vec<Vec<usize>> = inner.iter().map(|w| down_map(w, 0)).collect();
            let swapped = rebuild(m1, &l1, inner, &maps);
            out.push(reorder_root(swapped, &n.conclusion));
        }
    }
    out
}
