//! S-expression proof files.
//!
//! ```text
//! (id A)                      (cut A p1 p2)   (cut A k1 k2 p1 p2)
//! (tensorR i j p1 p2)         (parR i p)      (parR i pa pb p)
//! (plusL i p)  (plusR i p)    (withR i p1 p2)
//! (proves "<sequent>" p)
//! ```
//!
//! `proves` fixes the conclusion of its subproof. Plus rules cannot be
//! inferred bottom-up and need an enclosing conclusion, either from an
//! annotation or from the rule below them. Focussed proofs share the reader;
//! see [`super::focus`]. `;` starts a comment outside string literals.

use thiserror::Error;

use super::focus::{self, FocProof};
use super::{check_mall, reorder_root, MallProof, MallRule, ProofError};
use crate::logic::{negate, parse_formula, parse_sequent, Formula, ParseError, Sequent};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SexprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("`{head}` expects {expected}, found {found} argument(s)")]
    Arity {
        head: String,
        expected: String,
        found: usize,
    },
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("bad formula `{text}`: {source}")]
    Formula { text: String, source: ParseError },
    #[error("bad sequent `{text}`: {message}")]
    Sequent { text: String, message: String },
    #[error("expected a number, found `{0}`")]
    Number(String),
    #[error("{0}")]
    Elaboration(String),
    #[error(transparent)]
    Proof(#[from] ProofError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SExpr {
    Atom(String, usize),
    Str(String, usize),
    List(Vec<SExpr>, usize),
}

impl SExpr {
    pub fn offset(&self) -> usize {
        match self {
            SExpr::Atom(_, o) | SExpr::Str(_, o) | SExpr::List(_, o) => *o,
        }
    }

    /// Source-like text, used to hand formula sub-expressions to the formula parser.
    pub fn text(&self) -> String {
        match self {
            SExpr::Atom(a, _) => a.clone(),
            SExpr::Str(s, _) => format!("{s:?}"),
            SExpr::List(items, _) => {
                let inner: Vec<String> = items.iter().map(SExpr::text).collect();
                format!("({})", inner.join(" "))
            }
        }
    }
}

pub fn read_sexpr(text: &str) -> Result<SExpr, SexprError> {
    let bytes = text.as_bytes();
    let mut pos = 0;
    let e = read_one(text, bytes, &mut pos)?;
    skip_space(bytes, &mut pos);
    if pos < bytes.len() {
        return Err(SexprError::Syntax {
            offset: pos,
            message: "trailing input after proof".into(),
        });
    }
    Ok(e)
}

fn skip_space(bytes: &[u8], pos: &mut usize) {
    while *pos < bytes.len() {
        match bytes[*pos] {
            b';' => {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
            }
            c if c.is_ascii_whitespace() => *pos += 1,
            _ => break,
        }
    }
}

fn read_one(text: &str, bytes: &[u8], pos: &mut usize) -> Result<SExpr, SexprError> {
    skip_space(bytes, pos);
    let start = *pos;
    match bytes.get(start) {
        None => Err(SexprError::Syntax {
            offset: start,
            message: "unexpected end of input".into(),
        }),
        Some(b'(') => {
            *pos += 1;
            let mut items = Vec::new();
            loop {
                skip_space(bytes, pos);
                match bytes.get(*pos) {
                    None => {
                        return Err(SexprError::Syntax {
                            offset: *pos,
                            message: "expected `)`".into(),
                        })
                    }
                    Some(b')') => {
                        *pos += 1;
                        return Ok(SExpr::List(items, start));
                    }
                    _ => items.push(read_one(text, bytes, pos)?),
                }
            }
        }
        Some(b')') => Err(SexprError::Syntax {
            offset: start,
            message: "unbalanced `)`".into(),
        }),
        Some(b'"') => {
            let body = start + 1;
            let end = text[body..].find('"').ok_or(SexprError::Syntax {
                offset: start,
                message: "unterminated string".into(),
            })?;
            *pos = body + end + 1;
            Ok(SExpr::Str(text[body..body + end].to_string(), start))
        }
        Some(_) => {
            while *pos < bytes.len()
                && !bytes[*pos].is_ascii_whitespace()
                && !matches!(bytes[*pos], b'(' | b')' | b'"' | b';')
            {
                *pos += 1;
            }
            Ok(SExpr::Atom(text[start..*pos].to_string(), start))
        }
    }
}

pub(crate) fn as_formula(e: &SExpr) -> Result<Formula, SexprError> {
    let text = e.text();
    parse_formula(&text).map_err(|source| SexprError::Formula { text, source })
}

pub(crate) fn as_number(e: &SExpr) -> Result<usize, SexprError> {
    match e {
        SExpr::Atom(a, _) => a.parse().map_err(|_| SexprError::Number(a.clone())),
        other => Err(SexprError::Number(other.text())),
    }
}

pub(crate) fn is_number(e: &SExpr) -> bool {
    matches!(e, SExpr::Atom(a, _) if a.bytes().all(|b| b.is_ascii_digit()))
}

/// Splits a list into its head keyword and arguments.
pub(crate) fn head_args(e: &SExpr) -> Result<(&str, &[SExpr]), SexprError> {
    match e {
        SExpr::List(items, off) => match items.split_first() {
            Some((SExpr::Atom(h, _), rest)) => Ok((h.as_str(), rest)),
            _ => Err(SexprError::Syntax {
                offset: *off,
                message: "expected a rule name".into(),
            }),
        },
        other => Err(SexprError::Syntax {
            offset: other.offset(),
            message: "expected a proof".into(),
        }),
    }
}

pub(crate) fn arity(head: &str, expected: &str, found: usize) -> SexprError {
    SexprError::Arity {
        head: head.to_string(),
        expected: expected.to_string(),
        found,
    }
}

const FOC_ONLY: &[&str] = &[
    "foc", "shiftR", "shiftL", "cutS", "cutR", "tensorS", "tensorL", "plusSL", "plusSR",
];

fn mentions_focus(e: &SExpr) -> bool {
    match e {
        SExpr::List(items, _) => {
            matches!(items.first(), Some(SExpr::Atom(h, _)) if FOC_ONLY.contains(&h.as_str()))
                || items.iter().any(mentions_focus)
        }
        // focussed sequents always carry a stoup separator
        SExpr::Str(s, _) => s.contains(';'),
        _ => false,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParsedProof {
    Mall(MallProof),
    Foc(FocProof),
}

/// Reads either kind of proof, choosing the system from the rule names and
/// sequent annotations used.
pub fn parse_proof(text: &str) -> Result<ParsedProof, SexprError> {
    let e = read_sexpr(text)?;
    if mentions_focus(&e) {
        focus::elaborate(&e, None).map(ParsedProof::Foc)
    } else {
        elaborate(&e, None).map(ParsedProof::Mall)
    }
}

pub fn parse_mall(text: &str) -> Result<MallProof, SexprError> {
    elaborate(&read_sexpr(text)?, None)
}

fn mismatch(expected: &Sequent, found: &Sequent) -> SexprError {
    SexprError::Elaboration(format!("annotated {expected} but the proof concludes {found}"))
}

/// Fits a synthesized proof to an expected conclusion.
fn fit(p: MallProof, expected: Option<&Sequent>) -> Result<MallProof, SexprError> {
    match expected {
        None => Ok(p),
        Some(s) if s.multiset_eq(&p.conclusion) => Ok(reorder_root(p, s)),
        Some(s) => Err(mismatch(s, &p.conclusion)),
    }
}

fn need<'a>(expected: Option<&'a Sequent>, head: &str) -> Result<&'a Sequent, SexprError> {
    expected.ok_or_else(|| {
        SexprError::Elaboration(format!(
            "`{head}` needs its conclusion; wrap it in (proves \"...\" ...)"
        ))
    })
}

fn elaborate(e: &SExpr, expected: Option<&Sequent>) -> Result<MallProof, SexprError> {
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
            let seq = parse_sequent(&text).map_err(|err| SexprError::Sequent {
                text: text.clone(),
                message: err.to_string(),
            })?;
            if let Some(outer) = expected {
                if !outer.multiset_eq(&seq) {
                    return Err(mismatch(outer, &seq));
                }
            }
            let p = elaborate(p, Some(&seq))?;
            fit(p, expected)
        }
        "id" => {
            let [f] = args else {
                return Err(arity(head, "1 formula", args.len()));
            };
            let a = as_formula(f)?;
            let p = MallProof::new(MallRule::Id, vec![], Sequent(vec![a.clone(), negate(&a)]));
            fit(p, expected)
        }
        "parR" => {
            let (index, pins, sub) = match args {
                [i, p] => (as_number(i)?, None, p),
                [i, a, b, p] => (as_number(i)?, Some((as_number(a)?, as_number(b)?)), p),
                _ => {
                    return Err(arity(
                        head,
                        "an index, optional premise positions and 1 proof",
                        args.len(),
                    ))
                }
            };
            match expected {
                Some(conc) => {
                    let fs = conc.formulas();
                    let Some(Formula::Par(a, b)) = fs.get(index) else {
                        return Err(SexprError::Elaboration(format!("no par at position {index} of {conc}")));
                    };
                    let rest = super::without(fs, index);
                    let prem = match pins {
                        None => {
                            let mut v = fs[..index].to_vec();
                            v.push((**a).clone());
                            v.push((**b).clone());
                            v.extend(fs[index + 1..].iter().cloned());
                            v
                        }
                        Some((pa, pb)) => {
                            let n = fs.len() + 1;
                            if pa >= n || pb >= n || pa == pb {
                                return Err(SexprError::Elaboration(format!("bad par positions {pa} {pb}")));
                            }
                            let mut ctx = rest.into_iter();
                            (0..n)
                                .map(|k| {
                                    if k == pa {
                                        (**a).clone()
                                    } else if k == pb {
                                        (**b).clone()
                                    } else {
                                        ctx.next().unwrap()
                                    }
                                })
                                .collect()
                        }
                    };
                    let q = elaborate(sub, Some(&Sequent(prem)))?;
                    Ok(MallProof::new(
                        MallRule::ParR {
                            index,
                            premise_pos: pins,
                        },
                        vec![q],
                        conc.clone(),
                    ))
                }
                None => {
                    let q = elaborate(sub, None)?;
                    let (pa, pb) = pins.unwrap_or((index, index + 1));
                    let n = q.conclusion.len();
                    if pa >= n || pb >= n || pa == pb {
                        return Err(SexprError::Elaboration(format!(
                            "par positions {pa} {pb} out of range for {}",
                            q.conclusion
                        )));
                    }
                    Ok(super::mk_par(q, pa, pb))
                }
            }
        }
        "plusL" | "plusR" => {
            let [i, sub] = args else {
                return Err(arity(head, "an index and 1 proof", args.len()));
            };
            let index = as_number(i)?;
            let conc = need(expected, head)?;
            let fs = conc.formulas();
            let Some(Formula::Plus(a, b)) = fs.get(index) else {
                return Err(SexprError::Elaboration(format!(
                    "no plus at position {index} of {conc}"
                )));
            };
            let left = head == "plusL";
            let chosen = if left { (**a).clone() } else { (**b).clone() };
            let q = elaborate(sub, Some(&Sequent(super::replaced(fs, index, chosen))))?;
            let rule = if left {
                MallRule::PlusL { index }
            } else {
                MallRule::PlusR { index }
            };
            Ok(MallProof::new(rule, vec![q], conc.clone()))
        }
        "withR" => {
            let [i, l, r] = args else {
                return Err(arity(head, "an index and 2 proofs", args.len()));
            };
            let index = as_number(i)?;
            match expected {
                Some(conc) => {
                    let fs = conc.formulas();
                    let Some(Formula::With(a, b)) = fs.get(index) else {
                        return Err(SexprError::Elaboration(format!(
                            "no with at position {index} of {conc}"
                        )));
                    };
                    let l = elaborate(l, Some(&Sequent(super::replaced(fs, index, (**a).clone()))))?;
                    let r = elaborate(r, Some(&Sequent(super::replaced(fs, index, (**b).clone()))))?;
                    Ok(MallProof::new(MallRule::WithR { index }, vec![l, r], conc.clone()))
                }
                None => {
                    let l = elaborate(l, None)?;
                    let r = elaborate(r, None)?;
                    let (lf, rf) = (l.conclusion.formulas(), r.conclusion.formulas());
                    if index >= lf.len() || index >= rf.len() {
                        return Err(SexprError::Elaboration(format!("with index {index} out of range")));
                    }
                    let w = Formula::with(lf[index].clone(), rf[index].clone());
                    Ok(super::mk_with(l, index, r, w))
                }
            }
        }
        "tensorR" => {
            let [i, j, l, r] = args else {
                return Err(arity(head, "2 indices and 2 proofs", args.len()));
            };
            let (i, j) = (as_number(i)?, as_number(j)?);
            let l = elaborate(l, None)?;
            let r = elaborate(r, None)?;
            if i >= l.conclusion.len() || j >= r.conclusion.len() {
                return Err(SexprError::Elaboration(format!(
                    "tensor positions {i} {j} out of range"
                )));
            }
            fit(super::mk_tensor(l, i, r, j), expected)
        }
        "cut" => {
            let Some((f, rest)) = args.split_first() else {
                return Err(arity(head, "a formula and 2 proofs", 0));
            };
            let a = as_formula(f)?;
            let (pos, proofs) = if rest.len() == 4 && is_number(&rest[0]) && is_number(&rest[1]) {
                (Some((as_number(&rest[0])?, as_number(&rest[1])?)), &rest[2..])
            } else {
                (None, rest)
            };
            let [l, r] = proofs else {
                return Err(arity(head, "a formula and 2 proofs", args.len()));
            };
            let l = elaborate(l, None)?;
            let r = elaborate(r, None)?;
            let (k1, k2) = match pos {
                Some(p) => p,
                None => super::default_cut_positions(l.conclusion.formulas(), r.conclusion.formulas(), &a).ok_or_else(
                    || {
                        SexprError::Elaboration(format!(
                            "cut on {a}: premises {} and {} do not contain it",
                            l.conclusion, r.conclusion
                        ))
                    },
                )?,
            };
            if l.conclusion.formulas().get(k1) != Some(&a) || r.conclusion.formulas().get(k2) != Some(&negate(&a)) {
                return Err(SexprError::Elaboration(format!(
                    "cut positions {k1} {k2} do not address {a}"
                )));
            }
            fit(super::mk_cut(l, k1, r, k2), expected)
        }
        other => {
            if FOC_ONLY.contains(&other) {
                Err(SexprError::Elaboration(format!("`{other}` is a focussed rule")))
            } else {
                Err(SexprError::UnknownRule(other.to_string()))
            }
        }
    }
}

/// Prints a proof so that [`parse_mall`] gives it back unchanged.
pub fn print_mall(p: &MallProof) -> String {
    let mut out = String::new();
    write_annotated(p, 0, &mut out);
    out.push('\n');
    out
}

fn indent(depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn write_annotated(p: &MallProof, depth: usize, out: &mut String) {
    out.push_str(&format!("(proves \"{}\"\n", p.conclusion));
    indent(depth + 1, out);
    write_node(p, depth + 1, out);
    out.push(')');
}

/// Conclusion that elaboration would give premise `k` from its parent alone.
fn implied_premise(p: &MallProof, k: usize) -> Option<Sequent> {
    let fs = p.conclusion.formulas();
    match (&p.rule, fs.get(p.rule.stated_index()?)) {
        (MallRule::ParR { index, premise_pos }, Some(Formula::Par(a, b))) => {
            let n = fs.len() + 1;
            let (pa, pb) = premise_pos.unwrap_or((*index, *index + 1));
            let mut ctx = super::without(fs, *index).into_iter();
            Some(Sequent(
                (0..n)
                    .map(|q| {
                        if q == pa {
                            (**a).clone()
                        } else if q == pb {
                            (**b).clone()
                        } else {
                            ctx.next().unwrap()
                        }
                    })
                    .collect(),
            ))
        }
        (MallRule::PlusL { index }, Some(Formula::Plus(a, _))) => {
            Some(Sequent(super::replaced(fs, *index, (**a).clone())))
        }
        (MallRule::PlusR { index }, Some(Formula::Plus(_, b))) => {
            Some(Sequent(super::replaced(fs, *index, (**b).clone())))
        }
        (MallRule::WithR { index }, Some(Formula::With(a, b))) => {
            let c = if k == 0 { a } else { b };
            Some(Sequent(super::replaced(fs, *index, (**c).clone())))
        }
        _ => None,
    }
}

fn write_child(parent: &MallProof, k: usize, depth: usize, out: &mut String) {
    out.push('\n');
    indent(depth, out);
    let q = &parent.premises[k];
    if implied_premise(parent, k).as_ref() == Some(&q.conclusion) {
        write_node(q, depth, out);
    } else {
        write_annotated(q, depth, out);
    }
}

fn write_node(p: &MallProof, depth: usize, out: &mut String) {
    match &p.rule {
        MallRule::Id => {
            out.push_str(&format!("(id {})", p.conclusion.formulas()[0]));
            return;
        }
        MallRule::Cut { formula, pos } => {
            out.push_str(&format!("(cut {formula}"));
            if let Some((a, b)) = pos {
                out.push_str(&format!(" {a} {b}"));
            }
        }
        MallRule::TensorR { i, j } => out.push_str(&format!("(tensorR {i} {j}")),
        MallRule::ParR { index, premise_pos } => {
            out.push_str(&format!("(parR {index}"));
            if let Some((a, b)) = premise_pos {
                out.push_str(&format!(" {a} {b}"));
            }
        }
        MallRule::PlusL { index } => out.push_str(&format!("(plusL {index}")),
        MallRule::PlusR { index } => out.push_str(&format!("(plusR {index}")),
        MallRule::WithR { index } => out.push_str(&format!("(withR {index}")),
    }
    for k in 0..p.premises.len() {
        write_child(p, k, depth + 1, out);
    }
    out.push(')');
}

/// Parses and checks in one go.
pub fn load_mall(text: &str) -> Result<MallProof, SexprError> {
    let p = parse_mall(text)?;
    check_mall(&p)?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_sequent;

    const PI1: &str = r#"
        ; both disjunctions introduced on the right disjunct
        (proves "|- ~a + ~a, a + a"
          (plusR 0
            (plusR 1
              (id ~a))))"#;

    #[test]
    fn parse_and_check_pi1() {
        let p = parse_mall(PI1).unwrap();
        assert_eq!(check_mall(&p).unwrap(), parse_sequent("|- ~a + ~a, a + a").unwrap());
        assert_eq!(p.rule, MallRule::PlusR { index: 0 });
        assert_eq!(p.premises[0].conclusion, parse_sequent("|- ~a, a + a").unwrap());
    }

    #[test]
    fn id_synthesis() {
        let p = parse_mall("(id a)").unwrap();
        assert_eq!(p.conclusion, parse_sequent("|- a, ~a").unwrap());
        let q = parse_mall("(id (a * b))").unwrap();
        check_mall(&q).unwrap();
    }

    #[test]
    fn arity_errors() {
        assert!(matches!(parse_mall("(cut a (id a))"), Err(SexprError::Arity { .. })));
        assert!(matches!(parse_mall("(withR 0 (id a))"), Err(SexprError::Arity { .. })));
        assert!(matches!(parse_mall("(frob 0 (id a))"), Err(SexprError::UnknownRule(_))));
        assert!(matches!(parse_mall("(id a"), Err(SexprError::Syntax { .. })));
    }

    #[test]
    fn plus_needs_context() {
        assert!(matches!(
            parse_mall("(plusL 0 (id a))"),
            Err(SexprError::Elaboration(_))
        ));
    }

    #[test]
    fn print_round_trip() {
        let p = parse_mall(PI1).unwrap();
        let text = print_mall(&p);
        assert_eq!(parse_mall(&text).unwrap(), p);
        let twist = parse_mall("(proves \"|- ~a | ~a, a * a\" (parR 0 2 0 (tensorR 1 1 (id ~a) (id ~a))))").unwrap();
        check_mall(&twist).unwrap();
        assert_eq!(parse_mall(&print_mall(&twist)).unwrap(), twist);
    }

    #[test]
    fn cut_synthesis() {
        let p = parse_mall("(cut a (id ~a) (id a))").unwrap();
        assert_eq!(p.conclusion, parse_sequent("|- ~a, a").unwrap());
        check_mall(&p).unwrap();
    }
}
