//! Proof trees for MALL and for the focussed system, with checkers, cut
//! elimination and bounded rule-permutation search.
//!
//! A [`MallProof`] stores its conclusion explicitly. Rules address formula
//! occurrences by position; premises and conclusions are related by an
//! order-preserving multiset matching ([`layout`]), so the stored order of a
//! sequent is only significant where equal formulas occur more than once.

mod cutelim;
pub mod focus;
mod permute;
mod sexpr;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::logic::{match_positions, negate, Formula, Sequent};

pub use cutelim::eliminate_cuts;
pub use permute::{permutation_equal, permutation_search, PermutationResult, DEFAULT_BUDGET};
pub use sexpr::{load_mall, parse_mall, parse_proof, print_mall, ParsedProof, SexprError};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MallRule {
    Id,
    /// `pos` overrides the default cut occurrences: the last occurrence of the
    /// formula in the left premise and the first occurrence of its negation in
    /// the right premise.
    Cut {
        formula: Formula,
        pos: Option<(usize, usize)>,
    },
    /// `i` and `j` are the positions of the two factors in the left and right
    /// premise.
    TensorR {
        i: usize,
        j: usize,
    },
    /// `index` addresses the par in the conclusion; `premise_pos` optionally
    /// names the premise positions of its two components.
    ParR {
        index: usize,
        premise_pos: Option<(usize, usize)>,
    },
    /// Introduces the left disjunct.
    PlusL {
        index: usize,
    },
    /// Introduces the right disjunct.
    PlusR {
        index: usize,
    },
    WithR {
        index: usize,
    },
}

impl MallRule {
    pub fn arity(&self) -> usize {
        match self {
            MallRule::Id => 0,
            MallRule::ParR { .. } | MallRule::PlusL { .. } | MallRule::PlusR { .. } => 1,
            MallRule::Cut { .. } | MallRule::TensorR { .. } | MallRule::WithR { .. } => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MallRule::Id => "id",
            MallRule::Cut { .. } => "cut",
            MallRule::TensorR { .. } => "tensorR",
            MallRule::ParR { .. } => "parR",
            MallRule::PlusL { .. } => "plusL",
            MallRule::PlusR { .. } => "plusR",
            MallRule::WithR { .. } => "withR",
        }
    }

    /// Conclusion index of the principal formula, for rules that have one
    /// fixed by the rule itself.
    fn stated_index(&self) -> Option<usize> {
        match self {
            MallRule::ParR { index, .. }
            | MallRule::PlusL { index }
            | MallRule::PlusR { index }
            | MallRule::WithR { index } => Some(*index),
            _ => None,
        }
    }

    fn set_stated_index(&mut self, new: usize) {
        match self {
            MallRule::ParR { index, .. }
            | MallRule::PlusL { index }
            | MallRule::PlusR { index }
            | MallRule::WithR { index } => *index = new,
            _ => {}
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MallProof {
    pub rule: MallRule,
    pub premises: Vec<MallProof>,
    pub conclusion: Sequent,
}

impl MallProof {
    pub fn new(rule: MallRule, premises: Vec<MallProof>, conclusion: Sequent) -> MallProof {
        MallProof {
            rule,
            premises,
            conclusion,
        }
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(MallProof::size).sum::<usize>()
    }

    pub fn has_cut(&self) -> bool {
        matches!(self.rule, MallRule::Cut { .. }) || self.premises.iter().any(MallProof::has_cut)
    }

    pub fn uses_tensor(&self) -> bool {
        matches!(self.rule, MallRule::TensorR { .. }) || self.premises.iter().any(MallProof::uses_tensor)
    }

    /// Conclusions in pre-order, paired with node paths.
    pub fn nodes(&self) -> Vec<(NodePath, &MallProof)> {
        let mut out = Vec::new();
        fn walk<'a>(p: &'a MallProof, path: &mut Vec<usize>, out: &mut Vec<(NodePath, &'a MallProof)>) {
            out.push((NodePath(path.clone()), p));
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

/// Location of a node: premise indices followed from the root.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct NodePath(pub Vec<usize>);

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("root")?;
        for k in &self.0 {
            write!(f, ".{k}")?;
        }
        Ok(())
    }
}

/// Outcome of the local check at one proof node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NodeVerdict {
    pub path: NodePath,
    pub rule: &'static str,
    pub sequent: String,
    /// `None` when the rule instance is correct.
    pub error: Option<String>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProofError {
    #[error("at {path}: rule {rule} takes {expected} premise(s), found {found}")]
    Arity {
        path: NodePath,
        rule: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("at {path}: rule {rule} does not apply: expected {expected}, found {found}")]
    RuleViolation {
        path: NodePath,
        rule: &'static str,
        expected: String,
        found: String,
    },
    #[error("at {path}: premises of {rule} do not split the context: expected {expected}, found {found}")]
    ContextSplit {
        path: NodePath,
        rule: &'static str,
        expected: String,
        found: String,
    },
    #[error("the endsequent is empty")]
    EmptyEndsequent,
    #[error("cut elimination exceeded its depth bound of {0}")]
    DepthExceeded(usize),
}

/// Role of a premise position relative to its node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    /// Context formula, passed down unchanged from the given conclusion position.
    Ctx(usize),
    /// Active formula: 0 and 1 are the left and right components of the
    /// principal formula, or the cut formula and its negation for a cut.
    Active(u8),
}

/// How one node's premises line up with its conclusion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeLayout {
    /// Conclusion position of the principal formula (none for id and cut).
    pub principal: Option<usize>,
    /// `slots[k][p]` describes position `p` of premise `k`.
    pub slots: Vec<Vec<Slot>>,
}

impl NodeLayout {
    pub fn active(&self, premise: usize, role: u8) -> Option<usize> {
        self.slots[premise].iter().position(|s| *s == Slot::Active(role))
    }

    pub fn ctx(&self, premise: usize, conclusion_pos: usize) -> Option<usize> {
        self.slots[premise].iter().position(|s| *s == Slot::Ctx(conclusion_pos))
    }
}

fn seq_text(fs: &[Formula]) -> String {
    Sequent(fs.to_vec()).to_string()
}

fn violation(path: &NodePath, rule: &MallRule, expected: &[Formula], found: &[Formula]) -> ProofError {
    ProofError::RuleViolation {
        path: path.clone(),
        rule: rule.name(),
        expected: seq_text(expected),
        found: seq_text(found),
    }
}

pub(crate) fn without(fs: &[Formula], k: usize) -> Vec<Formula> {
    let mut v = fs.to_vec();
    v.remove(k);
    v
}

pub(crate) fn replaced(fs: &[Formula], k: usize, f: Formula) -> Vec<Formula> {
    let mut v = fs.to_vec();
    v[k] = f;
    v
}

/// Default occurrences used by a cut on `a`.
pub(crate) fn default_cut_positions(left: &[Formula], right: &[Formula], a: &Formula) -> Option<(usize, usize)> {
    let na = negate(a);
    let k1 = left.iter().rposition(|f| f == a)?;
    let k2 = right.iter().position(|f| *f == na)?;
    Some((k1, k2))
}

/// Slots of a premise given by replacing conclusion position `i` by the
/// listed active formulas, matched against the actual premise.
fn top_down_slots(
    path: &NodePath,
    rule: &MallRule,
    conc: &[Formula],
    i: usize,
    actives: &[Formula],
    premise: &[Formula],
    explicit: Option<&[usize]>,
) -> Result<Vec<Slot>, ProofError> {
    let mut canon: Vec<(Formula, Slot)> = Vec::with_capacity(conc.len() + actives.len());
    for (k, f) in conc.iter().enumerate() {
        if k == i {
            for (r, a) in actives.iter().enumerate() {
                canon.push((a.clone(), Slot::Active(r as u8)));
            }
        } else {
            canon.push((f.clone(), Slot::Ctx(k)));
        }
    }
    let expected: Vec<Formula> = canon.iter().map(|(f, _)| f.clone()).collect();
    let mismatch = || violation(path, rule, &expected, premise);
    if premise.len() != canon.len() {
        return Err(mismatch());
    }
    let mut slots = vec![Slot::Ctx(usize::MAX); premise.len()];
    match explicit {
        Some(pos) => {
            // actives are pinned, the context is matched in order
            let mut used = vec![false; premise.len()];
            for (r, &p) in pos.iter().enumerate() {
                if p >= premise.len() || used[p] || premise[p] != actives[r] {
                    return Err(mismatch());
                }
                used[p] = true;
                slots[p] = Slot::Active(r as u8);
            }
            let rest_idx: Vec<usize> = (0..premise.len()).filter(|p| !used[*p]).collect();
            let rest: Vec<Formula> = rest_idx.iter().map(|&p| premise[p].clone()).collect();
            let ctx: Vec<(Formula, Slot)> = canon
                .iter()
                .filter(|(_, s)| matches!(s, Slot::Ctx(_)))
                .cloned()
                .collect();
            let ctx_f: Vec<Formula> = ctx.iter().map(|(f, _)| f.clone()).collect();
            let m = match_positions(&ctx_f, &rest).ok_or_else(mismatch)?;
            for (c, &r) in m.iter().enumerate() {
                slots[rest_idx[r]] = ctx[c].1;
            }
        }
        None => {
            let m = match_positions(&expected, premise).ok_or_else(mismatch)?;
            for (c, &p) in m.iter().enumerate() {
                slots[p] = canon[c].1;
            }
        }
    }
    Ok(slots)
}

/// Computes how a node relates to its premises, or reports why it does not
/// instantiate its rule. Premises are not checked.
pub fn layout(p: &MallProof) -> Result<NodeLayout, ProofError> {
    layout_at(p, &NodePath::default())
}

fn layout_at(p: &MallProof, path: &NodePath) -> Result<NodeLayout, ProofError> {
    let rule = &p.rule;
    if p.premises.len() != rule.arity() {
        return Err(ProofError::Arity {
            path: path.clone(),
            rule: rule.name(),
            expected: rule.arity(),
            found: p.premises.len(),
        });
    }
    let conc = p.conclusion.formulas();
    let prem = |k: usize| p.premises[k].conclusion.formulas();
    let bad_index = |what: &str| ProofError::RuleViolation {
        path: path.clone(),
        rule: rule.name(),
        expected: what.to_string(),
        found: p.conclusion.to_string(),
    };
    match rule {
        MallRule::Id => {
            if conc.len() == 2 && conc[1] == negate(&conc[0]) {
                Ok(NodeLayout {
                    principal: None,
                    slots: vec![],
                })
            } else {
                let a = conc.first().cloned().unwrap_or_else(|| Formula::atom("a"));
                Err(violation(path, rule, &[a.clone(), negate(&a)], conc))
            }
        }
        MallRule::ParR { index, premise_pos } => {
            let (a, b) = match conc.get(*index) {
                Some(Formula::Par(a, b)) => ((**a).clone(), (**b).clone()),
                _ => return Err(bad_index(&format!("a par at position {index}"))),
            };
            let pins = premise_pos.map(|(x, y)| [x, y]);
            let slots = top_down_slots(
                path,
                rule,
                conc,
                *index,
                &[a, b],
                prem(0),
                pins.as_ref().map(|v| &v[..]),
            )?;
            Ok(NodeLayout {
                principal: Some(*index),
                slots: vec![slots],
            })
        }
        MallRule::PlusL { index } | MallRule::PlusR { index } => {
            let chosen = match (conc.get(*index), rule) {
                (Some(Formula::Plus(a, _)), MallRule::PlusL { .. }) => (**a).clone(),
                (Some(Formula::Plus(_, b)), _) => (**b).clone(),
                _ => return Err(bad_index(&format!("a plus at position {index}"))),
            };
            let slots = top_down_slots(path, rule, conc, *index, &[chosen], prem(0), None)?;
            Ok(NodeLayout {
                principal: Some(*index),
                slots: vec![slots],
            })
        }
        MallRule::WithR { index } => {
            let (a, b) = match conc.get(*index) {
                Some(Formula::With(a, b)) => ((**a).clone(), (**b).clone()),
                _ => return Err(bad_index(&format!("a with at position {index}"))),
            };
            let s0 = top_down_slots(path, rule, conc, *index, &[a], prem(0), None)?;
            let s1 = top_down_slots(path, rule, conc, *index, &[b], prem(1), None).map(|mut s| {
                // the right branch's component plays role 1
                for slot in &mut s {
                    if *slot == Slot::Active(0) {
                        *slot = Slot::Active(1);
                    }
                }
                s
            })?;
            Ok(NodeLayout {
                principal: Some(*index),
                slots: vec![s0, s1],
            })
        }
        MallRule::TensorR { i, j } => {
            let (l, r) = (prem(0), prem(1));
            if *i >= l.len() || *j >= r.len() {
                return Err(bad_index("factor positions inside the premises"));
            }
            let t = Formula::tensor(l[*i].clone(), r[*j].clone());
            // canonical conclusion: left premise with the tensor in place, then the right context
            let mut canon: Vec<(Formula, Option<(usize, usize)>)> = Vec::new();
            for (k, f) in l.iter().enumerate() {
                if k == *i {
                    canon.push((t.clone(), None));
                } else {
                    canon.push((f.clone(), Some((0, k))));
                }
            }
            for (k, f) in r.iter().enumerate() {
                if k != *j {
                    canon.push((f.clone(), Some((1, k))));
                }
            }
            let expected: Vec<Formula> = canon.iter().map(|(f, _)| f.clone()).collect();
            let m = match_positions(&expected, conc).ok_or_else(|| ProofError::ContextSplit {
                path: path.clone(),
                rule: rule.name(),
                expected: seq_text(&expected),
                found: seq_text(conc),
            })?;
            let mut slots = vec![vec![Slot::Active(0); l.len()], vec![Slot::Active(1); r.len()]];
            let mut principal = None;
            for (c, origin) in canon.iter().enumerate() {
                match origin.1 {
                    None => principal = Some(m[c]),
                    Some((k, q)) => slots[k][q] = Slot::Ctx(m[c]),
                }
            }
            Ok(NodeLayout { principal, slots })
        }
        MallRule::Cut { formula, pos } => {
            let (l, r) = (prem(0), prem(1));
            let na = negate(formula);
            let (k1, k2) = match pos {
                Some((k1, k2)) => (*k1, *k2),
                None => default_cut_positions(l, r, formula).ok_or_else(|| ProofError::RuleViolation {
                    path: path.clone(),
                    rule: rule.name(),
                    expected: format!("premises containing {formula} and {na}"),
                    found: format!("{} and {}", p.premises[0].conclusion, p.premises[1].conclusion),
                })?,
            };
            if l.get(k1) != Some(formula) || r.get(k2) != Some(&na) {
                return Err(ProofError::RuleViolation {
                    path: path.clone(),
                    rule: rule.name(),
                    expected: format!("{formula} at {k1} and {na} at {k2}"),
                    found: format!("{} and {}", p.premises[0].conclusion, p.premises[1].conclusion),
                });
            }
            let mut canon: Vec<(Formula, (usize, usize))> = Vec::new();
            for (k, f) in l.iter().enumerate() {
                if k != k1 {
                    canon.push((f.clone(), (0, k)));
                }
            }
            for (k, f) in r.iter().enumerate() {
                if k != k2 {
                    canon.push((f.clone(), (1, k)));
                }
            }
            let expected: Vec<Formula> = canon.iter().map(|(f, _)| f.clone()).collect();
            let m = match_positions(&expected, conc).ok_or_else(|| ProofError::ContextSplit {
                path: path.clone(),
                rule: rule.name(),
                expected: seq_text(&expected),
                found: seq_text(conc),
            })?;
            let mut slots = vec![vec![Slot::Active(0); l.len()], vec![Slot::Active(1); r.len()]];
            for (c, (_, (k, q))) in canon.iter().enumerate() {
                slots[*k][*q] = Slot::Ctx(m[c]);
            }
            Ok(NodeLayout { principal: None, slots })
        }
    }
}

/// Checks every node, deepest failures first, and returns the endsequent.
pub fn check_mall(p: &MallProof) -> Result<Sequent, ProofError> {
    if p.conclusion.is_empty() {
        return Err(ProofError::EmptyEndsequent);
    }
    check_node(p, &mut Vec::new())?;
    Ok(p.conclusion.clone())
}

fn check_node(p: &MallProof, path: &mut Vec<usize>) -> Result<(), ProofError> {
    for (k, q) in p.premises.iter().enumerate() {
        path.push(k);
        check_node(q, path)?;
        path.pop();
    }
    layout_at(p, &NodePath(path.clone())).map(|_| ())
}

/// One verdict per node, in pre-order, each judging only that node's rule instance.
pub fn check_mall_nodes(p: &MallProof) -> Vec<NodeVerdict> {
    p.nodes()
        .into_iter()
        .map(|(path, q)| NodeVerdict {
            rule: q.rule.name(),
            sequent: q.conclusion.to_string(),
            error: layout_at(q, &path).err().map(|e| e.to_string()),
            path,
        })
        .collect()
}

/// Replaces the stored conclusion of the root by a multiset-equal ordering,
/// keeping the rule's principal index and any pinned par positions in step.
pub fn reorder_root(mut p: MallProof, target: &Sequent) -> MallProof {
    if p.conclusion == *target {
        return p;
    }
    debug_assert!(p.conclusion.multiset_eq(target));
    let before = layout(&p).ok();
    if let Some(i) = p.rule.stated_index() {
        if let Some(m) = match_positions(p.conclusion.formulas(), target.formulas()) {
            p.rule.set_stated_index(m[i]);
        }
    }
    p.conclusion = target.clone();
    if let (Some(before), MallRule::ParR { premise_pos, .. }) = (before, &mut p.rule) {
        let pa = before.active(0, 0).unwrap();
        let pb = before.active(0, 1).unwrap();
        *premise_pos = None;
        let default_ok = matches!(layout(&p), Ok(l) if l.active(0, 0) == Some(pa) && l.active(0, 1) == Some(pb));
        if !default_ok {
            if let MallRule::ParR { premise_pos, .. } = &mut p.rule {
                *premise_pos = Some((pa, pb));
            }
        }
    }
    p
}

pub fn id_proof(a: Formula) -> MallProof {
    let na = negate(&a);
    MallProof::new(MallRule::Id, vec![], Sequent(vec![a, na]))
}

/// Par on premise positions `pa`, `pb`; the par takes the place of `pa`.
pub fn mk_par(q: MallProof, pa: usize, pb: usize) -> MallProof {
    let fs = q.conclusion.formulas();
    let par = Formula::par(fs[pa].clone(), fs[pb].clone());
    let mut conc = replaced(fs, pa, par);
    conc.remove(pb);
    let index = if pa < pb { pa } else { pa - 1 };
    let mut p = MallProof::new(
        MallRule::ParR {
            index,
            premise_pos: None,
        },
        vec![q],
        Sequent(conc),
    );
    let default_ok = matches!(layout(&p), Ok(l) if l.active(0, 0) == Some(pa) && l.active(0, 1) == Some(pb));
    if !default_ok {
        p.rule = MallRule::ParR {
            index,
            premise_pos: Some((pa, pb)),
        };
    }
    p
}

/// Plus introduction at premise position `k`; `formula` is the full disjunction.
pub fn mk_plus(q: MallProof, k: usize, left: bool, formula: Formula) -> MallProof {
    let conc = replaced(q.conclusion.formulas(), k, formula);
    let rule = if left {
        MallRule::PlusL { index: k }
    } else {
        MallRule::PlusR { index: k }
    };
    MallProof::new(rule, vec![q], Sequent(conc))
}

/// With introduction; `formula` sits at `kl` of the left premise's layout.
pub fn mk_with(l: MallProof, kl: usize, r: MallProof, formula: Formula) -> MallProof {
    let conc = replaced(l.conclusion.formulas(), kl, formula);
    MallProof::new(MallRule::WithR { index: kl }, vec![l, r], Sequent(conc))
}

pub fn mk_tensor(l: MallProof, i: usize, r: MallProof, j: usize) -> MallProof {
    let (lf, rf) = (l.conclusion.formulas(), r.conclusion.formulas());
    let t = Formula::tensor(lf[i].clone(), rf[j].clone());
    let mut conc = replaced(lf, i, t);
    conc.extend(without(rf, j));
    MallProof::new(MallRule::TensorR { i, j }, vec![l, r], Sequent(conc))
}

pub fn mk_cut(l: MallProof, k1: usize, r: MallProof, k2: usize) -> MallProof {
    let (lf, rf) = (l.conclusion.formulas(), r.conclusion.formulas());
    let formula = lf[k1].clone();
    let pos = if default_cut_positions(lf, rf, &formula) == Some((k1, k2)) {
        None
    } else {
        Some((k1, k2))
    };
    let mut conc = without(lf, k1);
    conc.extend(without(rf, k2));
    MallProof::new(MallRule::Cut { formula, pos }, vec![l, r], Sequent(conc))
}

/// Rebuilds `node`'s rule over new premises, where `maps[m][x]` is the new
/// position of old premise position `x` (for the positions that survive).
pub(crate) fn rebuild(node: &MallProof, lay: &NodeLayout, prems: Vec<MallProof>, maps: &[Vec<usize>]) -> MallProof {
    let principal = node.conclusion.formulas()[lay.principal.expect("logical rule")].clone();
    let act = |m: usize, role: u8| maps[m][lay.active(m, role).expect("active position")];
    let mut prems = prems.into_iter();
    let first = prems.next().expect("premise");
    match node.rule {
        MallRule::ParR { .. } => {
            let (pa, pb) = (act(0, 0), act(0, 1));
            mk_par(first, pa, pb)
        }
        MallRule::PlusL { .. } => {
            let a = act(0, 0);
            mk_plus(first, a, true, principal)
        }
        MallRule::PlusR { .. } => {
            let a = act(0, 0);
            mk_plus(first, a, false, principal)
        }
        MallRule::WithR { .. } => {
            let a = act(0, 0);
            mk_with(first, a, prems.next().expect("premise"), principal)
        }
        MallRule::TensorR { .. } => {
            let (i, j) = (act(0, 0), act(1, 1));
            mk_tensor(first, i, prems.next().expect("premise"), j)
        }
        MallRule::Id | MallRule::Cut { .. } => unreachable!("not a logical rule"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_formula, parse_sequent};

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn pi1() -> MallProof {
        let ax = MallProof::new(MallRule::Id, vec![], parse_sequent("|- ~a, a").unwrap());
        let inner = mk_plus(ax, 1, false, f("a + a"));
        mk_plus(inner, 0, false, f("~a + ~a"))
    }

    #[test]
    fn node_verdicts_localise_errors() {
        let good = pi1();
        let v = check_mall_nodes(&good);
        assert_eq!(v.len(), 3);
        assert!(v.iter().all(|n| n.error.is_none()));
        let mut bad = pi1();
        bad.premises[0].premises[0].conclusion = parse_sequent("|- ~b, a").unwrap();
        let v = check_mall_nodes(&bad);
        let failing: Vec<String> = v
            .iter()
            .filter(|n| n.error.is_some())
            .map(|n| n.path.to_string())
            .collect();
        // the broken axiom, and the plus that no longer matches its premise
        assert_eq!(failing, ["root.0", "root.0.0"]);
    }

    #[test]
    fn pi1_checks() {
        let p = pi1();
        assert_eq!(check_mall(&p).unwrap(), parse_sequent("|- ~a + ~a, a + a").unwrap());
    }

    #[test]
    fn id_on_any_formula() {
        let p = id_proof(f("a * b"));
        assert_eq!(check_mall(&p).unwrap(), parse_sequent("|- a * b, ~a | ~b").unwrap());
        let bad = MallProof::new(MallRule::Id, vec![], parse_sequent("|- a, a").unwrap());
        assert!(matches!(check_mall(&bad), Err(ProofError::RuleViolation { .. })));
    }

    #[test]
    fn tensor_split() {
        let t = mk_tensor(id_proof(f("~a")), 1, id_proof(f("~a")), 1);
        assert_eq!(t.conclusion, parse_sequent("|- ~a, a * a, ~a").unwrap());
        check_mall(&t).unwrap();
        let l = layout(&t).unwrap();
        assert_eq!(l.principal, Some(1));
        assert_eq!(l.slots[1], vec![Slot::Ctx(2), Slot::Active(1)]);
        let mut broken = t.clone();
        broken.conclusion = parse_sequent("|- ~a, a * a, a").unwrap();
        assert!(matches!(check_mall(&broken), Err(ProofError::ContextSplit { .. })));
    }

    #[test]
    fn pinned_par_positions() {
        let t = mk_tensor(id_proof(f("~a")), 1, id_proof(f("~a")), 1);
        let twisted = mk_par(t.clone(), 2, 0);
        assert_eq!(
            twisted.rule,
            MallRule::ParR {
                index: 1,
                premise_pos: Some((2, 0))
            }
        );
        check_mall(&twisted).unwrap();
        let straight = mk_par(t, 0, 2);
        assert_eq!(
            straight.rule,
            MallRule::ParR {
                index: 0,
                premise_pos: None
            }
        );
    }

    #[test]
    fn arity_reported() {
        let p = MallProof::new(
            MallRule::WithR { index: 0 },
            vec![pi1()],
            parse_sequent("|- a & a").unwrap(),
        );
        assert!(matches!(
            check_mall(&p),
            Err(ProofError::Arity {
                expected: 2,
                found: 1,
                ..
            })
        ));
    }

    #[test]
    fn reorder_keeps_index() {
        let p = pi1();
        let target = parse_sequent("|- a + a, ~a + ~a").unwrap();
        let q = reorder_root(p, &target);
        assert_eq!(q.rule, MallRule::PlusR { index: 1 });
        check_mall(&q).unwrap();
    }
}
