//! Cut elimination.
//!
//! The cut nearest the root is reduced first. At a cut, in order:
//! axiom reductions; commuting the cut above the left premise's last rule
//! when that rule does not act on the cut formula; the same on the right;
//! normalising a premise that is itself a cut; and finally the principal
//! reductions (plus against with, tensor against par).

use super::{check_mall, layout, mk_cut, rebuild, reorder_root, MallProof, MallRule, NodeLayout, ProofError};

/// Returns a cut-free proof of the same endsequent, with the same stored
/// conclusion order.
pub fn eliminate_cuts(p: &MallProof) -> Result<MallProof, ProofError> {
    check_mall(p)?;
    let bound = 10 * p.size();
    elim(p, 0, bound)
}

fn elim(p: &MallProof, depth: usize, bound: usize) -> Result<MallProof, ProofError> {
    if depth > bound {
        return Err(ProofError::DepthExceeded(bound));
    }
    let out = match p.rule {
        MallRule::Cut { .. } => {
            let lay = layout(p)?;
            let k1 = lay.active(0, 0).expect("cut occurrence on the left");
            let k2 = lay.active(1, 1).expect("cut occurrence on the right");
            let (l, r) = (p.premises[0].clone(), p.premises[1].clone());
            elim_cut(l, k1, r, k2, depth + 1, bound)?
        }
        _ => {
            let premises = p
                .premises
                .iter()
                .map(|q| elim(q, depth + 1, bound))
                .collect::<Result<Vec<_>, _>>()?;
            MallProof::new(p.rule.clone(), premises, p.conclusion.clone())
        }
    };
    Ok(reorder_root(out, &p.conclusion))
}

fn is_logical(rule: &MallRule) -> bool {
    !matches!(rule, MallRule::Id | MallRule::Cut { .. })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

/// Pushes the cut above the last rule of `node` (the premise on `side`),
/// which must not act on the cut formula at `k`.
fn commute(node: &MallProof, k: usize, other: &MallProof, ko: usize, side: Side) -> Result<MallProof, ProofError> {
    let lay = layout(node)?;
    let mut prems = Vec::new();
    let mut maps = Vec::new();
    for (m, q) in node.premises.iter().enumerate() {
        let n = q.conclusion.len();
        match lay.ctx(m, k) {
            Some(at) => {
                let shift = |x: usize| if x < at { x } else { x - 1 };
                let (cut, map): (MallProof, Vec<usize>) = match side {
                    Side::Left => (
                        mk_cut(q.clone(), at, other.clone(), ko),
                        (0..n).map(|x| if x == at { usize::MAX } else { shift(x) }).collect(),
                    ),
                    Side::Right => {
                        let off = other.conclusion.len() - 1;
                        (
                            mk_cut(other.clone(), ko, q.clone(), at),
                            (0..n)
                                .map(|x| if x == at { usize::MAX } else { off + shift(x) })
                                .collect(),
                        )
                    }
                };
                prems.push(cut);
                maps.push(map);
            }
            None => {
                prems.push(q.clone());
                maps.push((0..n).collect());
            }
        }
    }
    Ok(rebuild(node, &lay, prems, &maps))
}

fn elim_cut(
    l: MallProof,
    k1: usize,
    r: MallProof,
    k2: usize,
    depth: usize,
    bound: usize,
) -> Result<MallProof, ProofError> {
    if depth > bound {
        return Err(ProofError::DepthExceeded(bound));
    }
    let next = |q: MallProof| elim(&q, depth + 1, bound);
    if l.rule == MallRule::Id {
        return next(r);
    }
    if r.rule == MallRule::Id {
        return next(l);
    }
    let ll = layout(&l)?;
    let rl = layout(&r)?;
    if is_logical(&l.rule) && ll.principal != Some(k1) {
        return next(commute(&l, k1, &r, k2, Side::Left)?);
    }
    if is_logical(&r.rule) && rl.principal != Some(k2) {
        return next(commute(&r, k2, &l, k1, Side::Right)?);
    }
    if matches!(l.rule, MallRule::Cut { .. }) {
        let l = elim(&l, depth + 1, bound)?;
        return elim_cut(l, k1, r, k2, depth + 1, bound);
    }
    if matches!(r.rule, MallRule::Cut { .. }) {
        let r = elim(&r, depth + 1, bound)?;
        return elim_cut(l, k1, r, k2, depth + 1, bound);
    }
    // both premises introduce the cut formula
    let principal = |p: &MallProof, lay: &NodeLayout, m: usize, role: u8| -> (MallProof, usize) {
        (p.premises[m].clone(), lay.active(m, role).expect("active position"))
    };
    let reduced = match (&l.rule, &r.rule) {
        (MallRule::PlusL { .. } | MallRule::PlusR { .. }, MallRule::WithR { .. }) => {
            let s = usize::from(matches!(l.rule, MallRule::PlusR { .. }));
            let (q, a) = principal(&l, &ll, 0, 0);
            let (w, b) = principal(&r, &rl, s, s as u8);
            mk_cut(q, a, w, b)
        }
        (MallRule::WithR { .. }, MallRule::PlusL { .. } | MallRule::PlusR { .. }) => {
            let s = usize::from(matches!(r.rule, MallRule::PlusR { .. }));
            let (w, a) = principal(&l, &ll, s, s as u8);
            let (q, b) = principal(&r, &rl, 0, 0);
            mk_cut(w, a, q, b)
        }
        (MallRule::TensorR { .. }, MallRule::ParR { .. }) => {
            let (l0, i) = principal(&l, &ll, 0, 0);
            let (l1, j) = principal(&l, &ll, 1, 1);
            let q = &r.premises[0];
            let (pa, pb) = (rl.active(0, 0).unwrap(), rl.active(0, 1).unwrap());
            let inner = mk_cut(l0.clone(), i, q.clone(), pa);
            let pb2 = l0.conclusion.len() - 1 + if pb < pa { pb } else { pb - 1 };
            mk_cut(l1, j, inner, pb2)
        }
        (MallRule::ParR { .. }, MallRule::TensorR { .. }) => {
            let q = &l.premises[0];
            let (pa, pb) = (ll.active(0, 0).unwrap(), ll.active(0, 1).unwrap());
            let (r0, i) = principal(&r, &rl, 0, 0);
            let (r1, j) = principal(&r, &rl, 1, 1);
            let inner = mk_cut(q.clone(), pa, r0, i);
            let pb2 = if pb < pa { pb } else { pb - 1 };
            mk_cut(inner, pb2, r1, j)
        }
        _ => {
            return Err(ProofError::RuleViolation {
                path: Default::default(),
                rule: "cut",
                expected: "dual introduction rules".into(),
                found: format!("{} against {}", l.rule.name(), r.rule.name()),
            })
        }
    };
    next(reduced)
}
