//! The ten acceptance criteria, one reported line each.
//!
//! Run with `cargo test -p polarity-core --test acceptance -- --nocapture`
//! to see the report.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use polarity_core::blass::{
    compose, dualize, initial_mover, interpret_formula_blass, interpret_proof_blass, is_strategy, moves, proof_game,
    strategies, Game, InitialMover, MoveLabel, StrategyTree,
};
use polarity_core::cgames::{
    compose_closures, execute_linking, formula_dom, interpret_formula_cgame, interpret_proof_cgame, is_closure,
    is_sequential, is_stable, lift_function, linking_function, linking_of_proof, play_closures, proof_dom, ClosureOp,
    Dom, Point,
};
use polarity_core::logic::{negate, parse_formula, Formula, Polarity};
use polarity_core::process::{
    board_dom, board_of, copycat_process, denote, parse_proc, point_of, run, Board, Cell, Proc,
};
use polarity_core::proofs::focus::{check_foc, parse_foc, FocError};
use polarity_core::proofs::{eliminate_cuts, load_mall, print_mall, MallProof};

fn corpus(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "corpus", name]
        .iter()
        .collect();
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn mall(name: &str) -> MallProof {
    load_mall(&corpus(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn f(text: &str) -> Formula {
    parse_formula(text).unwrap()
}

fn g(text: &str) -> Game {
    interpret_formula_blass(&f(text))
}

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

const MALL_CORPUS: [&str; 11] = [
    "pi1.llp",
    "pi2.llp",
    "pi2_swapped.llp",
    "pi3.llp",
    "composite_left.llp",
    "composite_right.llp",
    "goi_id.llp",
    "goi_twist.llp",
    "goi_twist_cut_twist.llp",
    "goi_id_cut_twist.llp",
    "tensor_context.llp",
];

const PROC_CORPUS: [&str; 8] = [
    "copycat1.proc",
    "copycat2.proc",
    "clash.proc",
    "relay.proc",
    "broadcast.proc",
    "hidden_relay.proc",
    "echo.proc",
    "constant.proc",
];

fn non_associativity() -> Outcome {
    let (s1, s2, s3) = (
        interpret_proof_blass(&mall("pi1.llp")).map_err(|e| e.to_string())?,
        interpret_proof_blass(&mall("pi2.llp")).map_err(|e| e.to_string())?,
        interpret_proof_blass(&mall("pi3.llp")).map_err(|e| e.to_string())?,
    );
    // sigma1: A -> B, sigma2: B -> C, sigma3: C -> D
    let (a, b) = (g("a & a"), g("a + a"));
    let left = compose(
        &compose(&s1, &s2, &a, &b, &a).map_err(|e| e.to_string())?,
        &s3,
        &a,
        &a,
        &b,
    )
    .map_err(|e| e.to_string())?;
    let right = compose(
        &s1,
        &compose(&s2, &s3, &b, &a, &b).map_err(|e| e.to_string())?,
        &a,
        &b,
        &b,
    )
    .map_err(|e| e.to_string())?;
    ensure(left != right, "the two bracketings gave the same tree")?;
    let side = |t: &StrategyTree| match t.first_out_move() {
        Some(MoveLabel::SideL(_)) => "A-side",
        Some(MoveLabel::SideR(_)) => "D-side",
        _ => "none",
    };
    ensure(side(&left) == "D-side", format!("(s1;s2);s3 opens {}", side(&left)))?;
    ensure(side(&right) == "A-side", format!("s1;(s2;s3) opens {}", side(&right)))?;
    // the composite proofs in the corpus interpret to the same trees
    let cl = interpret_proof_blass(&mall("composite_left.llp")).map_err(|e| e.to_string())?;
    let cr = interpret_proof_blass(&mall("composite_right.llp")).map_err(|e| e.to_string())?;
    ensure(cl == left && cr == right, "cut interpretation differs from compose")?;
    let game = Game::par(dualize(&a), b);
    ensure(
        is_strategy(&left, &game, Polarity::P) && is_strategy(&right, &game, Polarity::P),
        "not strategies",
    )?;
    Ok(format!(
        "(s1;s2);s3 opens {}, s1;(s2;s3) opens {}",
        side(&left),
        side(&right)
    ))
}

fn table1() -> Outcome {
    use InitialMover::*;
    use Polarity::{O as Op, P as Pp};
    const EXPECTED: [InitialMover; 16] = [O, Theta, O, Tau, O, Ambiguous, O, Sigma, O, O, O, O, O, O, O, O];
    let mut ambiguous = Vec::new();
    for (row, want) in EXPECTED.iter().enumerate() {
        let bit = |k: usize| if row >> (3 - k) & 1 == 1 { Pp } else { Op };
        let got = initial_mover(bit(0), bit(1), bit(2), bit(3));
        ensure(got == *want, format!("row {row}: got {got}, expected {want}"))?;
        if got == Ambiguous {
            ambiguous.push(row);
        }
    }
    ensure(ambiguous == [5], format!("ambiguous rows {ambiguous:?}"))?;
    Ok("16 rows match, row 5 alone is ambiguous".into())
}

fn cut_elimination() -> Outcome {
    let left = eliminate_cuts(&mall("composite_left.llp")).map_err(|e| e.to_string())?;
    let right = eliminate_cuts(&mall("composite_right.llp")).map_err(|e| e.to_string())?;
    ensure(
        left == mall("pi3.llp"),
        format!("left composite gave {}", print_mall(&left)),
    )?;
    ensure(
        right == mall("pi1.llp"),
        format!("right composite gave {}", print_mall(&right)),
    )?;
    Ok("(pi1;pi2);pi3 reduces to pi3, pi1;(pi2;pi3) to pi1".into())
}

fn concurrent_associativity() -> Outcome {
    let err = |e: polarity_core::cgames::CGameError| e.to_string();
    let c = interpret_proof_cgame(&mall("pi1.llp")).map_err(err)?;
    let d = interpret_proof_cgame(&mall("pi2.llp")).map_err(err)?;
    let e = interpret_proof_cgame(&mall("pi3.llp")).map_err(err)?;
    let cd = compose_closures(&c, &d).map_err(err)?;
    let left = compose_closures(&cd, &e).map_err(err)?;
    let right = compose_closures(&c, &compose_closures(&d, &e).map_err(err)?).map_err(err)?;
    ensure(
        left == right && right == c && c == e,
        "c;(d;e), (c;d);e, c, e are not all equal",
    )?;

    // the sums are the choice between inl and inr, and pi1 picks inr
    let sum = formula_dom(&f("a + a"));
    let bb = Dom::booleans();
    let tt = |x: usize| sum.inj(1, x);
    let pair = |p: &ClosureOp, x: usize, y: usize| p.dom.pair(x, y);
    let at = |p: &ClosureOp, x: usize, y: usize| p.at(pair(p, x, y));
    let pt = |p: &ClosureOp, x: usize, y: usize| Point::At(pair(p, x, y));
    ensure(at(&c, 0, 0) == pt(&c, tt(0), tt(0)), "c(bot, bot)")?;
    for x in 0..bb.size() {
        for y in 0..bb.size() {
            let j = bb.join(x, y).map_or(Point::Top, |z| pt(&c, tt(z), tt(z)));
            ensure(at(&c, tt(x), tt(y)) == j, "c(in_tt x, in_tt y)")?;
        }
    }
    for x in 0..sum.size() {
        for y in 0..bb.size() {
            ensure(
                at(&c, sum.inj(0, y), x) == Point::Top && at(&c, x, sum.inj(0, y)) == Point::Top,
                "c with in_ff",
            )?;
        }
        ensure(
            at(&d, x, 0) == pt(&d, x, 0) && at(&d, 0, x) == pt(&d, 0, x),
            "d(x, bot) and d(bot, y)",
        )?;
    }
    for i in 0..2 {
        for j in 0..2 {
            for x in 0..bb.size() {
                for y in 0..bb.size() {
                    let want_d = bb
                        .join(x, y)
                        .map_or(Point::Top, |z| pt(&d, sum.inj(i, z), sum.inj(j, z)));
                    ensure(at(&d, sum.inj(i, x), sum.inj(j, y)) == want_d, "d(in_i x, in_j y)")?;
                    if i == 1 {
                        let want = bb.join(x, y).map_or(Point::Top, |z| pt(&cd, tt(z), sum.inj(j, z)));
                        ensure(at(&cd, tt(x), sum.inj(j, y)) == want, "(c;d)(in_tt x, in_j y)")?;
                    }
                }
            }
        }
    }
    ensure(at(&cd, 0, 0) == pt(&cd, tt(0), 0), "(c;d)(bot, bot)")?;
    Ok(format!(
        "tables equal on {} points; c(bot,bot) = {}, (c;d)(bot,bot) = {}",
        c.dom.size(),
        c.dom.point_name(at(&c, 0, 0)),
        cd.dom.point_name(at(&cd, 0, 0))
    ))
}

fn focussing() -> Outcome {
    for name in ["pi1p.llp", "pi2p.llp", "pi3p.llp"] {
        let p = parse_foc(&corpus(name)).map_err(|e| format!("{name}: {e}"))?;
        check_foc(&p).map_err(|e| format!("{name}: {e}"))?;
    }
    let bad = parse_foc(&corpus("bad_last_plusR.llp")).map_err(|e| e.to_string())?;
    match check_foc(&bad) {
        Err(e @ FocError::StoupViolation { .. }) => Ok(format!("three proofs check; rejected: {e}")),
        Err(e) => Err(format!("wrong diagnostic: {e}")),
        Ok(_) => Err("the bad proof was accepted".into()),
    }
}

fn goi() -> Outcome {
    let err = |e: polarity_core::cgames::CGameError| e.to_string();
    let id = linking_of_proof(&mall("goi_id.llp")).map_err(err)?;
    let twist = linking_of_proof(&mall("goi_twist.llp")).map_err(err)?;
    // leaves a, b, c, d left to right; position i receives the value of leaf axiom[i]
    ensure(id.axiom == [2, 3, 0, 1], format!("id linking {:?}", id.axiom))?;
    ensure(twist.axiom == [3, 2, 1, 0], format!("twist linking {:?}", twist.axiom))?;
    let tct = execute_linking(&linking_of_proof(&mall("goi_twist_cut_twist.llp")).map_err(err)?).map_err(err)?;
    ensure(tct == id, format!("twist cut twist executes to {:?}", tct.axiom))?;
    let ict = execute_linking(&linking_of_proof(&mall("goi_id_cut_twist.llp")).map_err(err)?).map_err(err)?;
    ensure(ict == twist, format!("id cut twist executes to {:?}", ict.axiom))?;
    for name in ["goi_id.llp", "goi_twist.llp"] {
        let p = mall(name);
        let l = linking_of_proof(&p).map_err(err)?;
        let (lifted, ok) = lift_function(&linking_function(&l, &proof_dom(&p)).map_err(err)?);
        ensure(ok, format!("{name}: lift is not a closure"))?;
        ensure(
            lifted == interpret_proof_cgame(&p).map_err(err)?,
            format!("{name}: lift differs from the closure"),
        )?;
    }
    Ok("id (c,d,a,b), twist (d,c,b,a), twist;twist = id, lifts agree".into())
}

fn bb_twist() -> ClosureOp {
    let d = Dom::product(Dom::booleans(), Dom::booleans());
    let d2 = d.clone();
    ClosureOp::from_fn(d, move |e| {
        let (x, y) = d2.unpair(e);
        Point::At(d2.pair(y, x))
    })
}

fn stability() -> Outcome {
    let err = |e: polarity_core::cgames::CGameError| e.to_string();
    let twist = bb_twist();
    let (copycat, _) = lift_function(&twist);
    ensure(is_stable(&twist).map_err(err)?, "twist is not stable")?;
    ensure(!is_stable(&copycat).map_err(err)?, "copy-cat is stable")?;
    let d = Dom::product(Dom::booleans(), Dom::product(Dom::booleans(), Dom::booleans()));
    let d2 = d.clone();
    let por = ClosureOp::from_fn(d, move |e| {
        let v = d2.cell_values(e);
        let out = match (v[0], v[1]) {
            (1, _) | (_, 1) => 1,
            (2, 2) => 2,
            _ => 0,
        };
        Point::At(d2.from_cell_values(&[0, 0, out]))
    });
    ensure(!is_sequential(&por).map_err(err)?, "parallel-or accepted")?;
    ensure(is_sequential(&twist).map_err(err)?, "twist rejected")?;
    Ok("twist stable and sequential, copy-cat unstable, parallel-or not sequential".into())
}

fn closure_laws() -> Outcome {
    let mut checked = 0;
    let mut games: BTreeSet<String> = BTreeSet::new();
    let mut pairs = 0usize;
    for name in MALL_CORPUS {
        let p = mall(name);
        let sigma = interpret_proof_cgame(&p).map_err(|e| format!("{name}: {e}"))?;
        ensure(is_closure(&sigma), format!("{name}: not a closure"))?;
        checked += 1;
        // the proof against every counter-strategy of its sequent, when these can be listed
        let fs = &p.conclusion.0;
        let seq = fs
            .iter()
            .rev()
            .cloned()
            .reduce(|acc, x| Formula::par(x, acc))
            .expect("nonempty sequent");
        let game = interpret_formula_cgame(&seq);
        if let Some(taus) = game.so.enumerate(&game.dom) {
            for tau in &taus {
                ensure(
                    play_closures(&sigma, tau) == play_closures(tau, &sigma),
                    format!("{name}: asymmetric play"),
                )?;
                pairs += 1;
            }
        }
        for x in fs {
            collect_subformulas(x, &mut games);
        }
    }
    for text in &games {
        let game = interpret_formula_cgame(&f(text));
        let (Some(sp), Some(so)) = (game.sp.enumerate(&game.dom), game.so.enumerate(&game.dom)) else {
            continue;
        };
        for s in &sp {
            ensure(is_closure(s), format!("{text}: P-strategy not a closure"))?;
            for t in &so {
                ensure(
                    play_closures(s, t) == play_closures(t, s),
                    format!("{text}: asymmetric play"),
                )?;
                pairs += 1;
            }
        }
    }
    ensure(pairs <= 10_000, format!("{pairs} pairs"))?;
    Ok(format!(
        "{checked} proofs are closures; {pairs} pairs play symmetrically"
    ))
}

fn collect_subformulas(x: &Formula, out: &mut BTreeSet<String>) {
    out.insert(x.to_string());
    out.insert(negate(x).to_string());
    match x {
        Formula::Tensor(a, b) | Formula::Par(a, b) | Formula::Plus(a, b) | Formula::With(a, b) => {
            collect_subformulas(a, out);
            collect_subformulas(b, out);
        }
        _ => {}
    }
}

/// Every way of keeping a subset of the edges at each node, filtered to
/// those keeping exactly one edge where `player` moves and all edges where
/// the other player does.
fn brute_force(game: &Game, player: Polarity) -> Vec<StrategyTree> {
    let next = moves(game);
    let mut out = Vec::new();
    for mask in 0u32..(1 << next.len()) {
        let kept: Vec<&(MoveLabel, Game)> = next
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, m)| m)
            .collect();
        let valid = if next.is_empty() {
            true
        } else if game.polarity() == player {
            kept.len() == 1
        } else {
            kept.len() == next.len()
        };
        if !valid {
            continue;
        }
        if next.is_empty() {
            out.push(StrategyTree::Stop);
        } else if game.polarity() == player {
            let (m, r) = kept[0];
            out.extend(
                brute_force(r, player)
                    .into_iter()
                    .map(|s| StrategyTree::out(m.clone(), s)),
            );
        } else {
            let mut acc = vec![BTreeMap::new()];
            for (m, r) in kept {
                let subs = brute_force(r, player);
                acc = acc
                    .into_iter()
                    .flat_map(|b: BTreeMap<MoveLabel, StrategyTree>| {
                        subs.iter().map(move |s| {
                            let mut b = b.clone();
                            b.insert(m.clone(), s.clone());
                            b
                        })
                    })
                    .collect();
            }
            out.extend(acc.into_iter().map(StrategyTree::InBranch));
        }
    }
    out
}

fn oracle_equivalence() -> Outcome {
    let mut games: Vec<(String, Game)> = Vec::new();
    let mut names = BTreeSet::new();
    for name in MALL_CORPUS {
        let p = mall(name);
        for x in &p.conclusion.0 {
            collect_subformulas(x, &mut names);
        }
        games.push((name.to_string(), proof_game(&p)));
    }
    games.extend(names.iter().map(|n| (n.clone(), g(n))));
    let mut compared = 0;
    for (name, game) in &games {
        if game.positions() > 200 {
            continue;
        }
        for player in [Polarity::P, Polarity::O] {
            let lib: BTreeSet<String> = strategies(game, player).iter().map(|s| s.to_string()).collect();
            let oracle: BTreeSet<String> = brute_force(game, player).iter().map(|s| s.to_string()).collect();
            ensure(
                lib == oracle,
                format!("{name} for {player:?}: {} vs {}", lib.len(), oracle.len()),
            )?;
        }
        compared += 1;
    }
    Ok(format!("{compared} games agree with brute force"))
}

fn adequacy_for(name: &str, p: &Proc) -> Result<usize, String> {
    let cells: Vec<Cell> = p.free_cells().into_iter().collect();
    ensure(cells.len() <= 4, format!("{name}: {} cells", cells.len()))?;
    let values = [0, 1, 2];
    let table = denote(p, &cells, &values).map_err(|e| format!("{name}: {e}"))?;
    ensure(is_closure(&table), format!("{name}: denotation is not a closure"))?;
    let dom = board_dom(&cells, &values);
    let mut n = 0;
    for e in 0..dom.size() {
        let b = board_of(&dom, &cells, &values, e);
        let r = run(p, &b).map_err(|e| format!("{name}: {e}"))?;
        let got = point_of(&dom, &cells, &values, &r).map_err(|e| e.to_string())?;
        ensure(
            got == table.at(e),
            format!("{name} at {b}: run {r}, denote {}", dom.point_name(table.at(e))),
        )?;
        n += 1;
    }
    Ok(n)
}

fn process_adequacy() -> Outcome {
    let mut boards = 0;
    for name in PROC_CORPUS {
        let p = parse_proc(&corpus(name)).map_err(|e| format!("{name}: {e}"))?;
        boards += adequacy_for(name, &p)?;
    }
    let cc = copycat_process(&[0]);
    boards += adequacy_for("copycat_process", &cc)?;
    let cells = [Cell::Left(0), Cell::Right(0)];
    let (copy, _) = lift_function(&bb_twist());
    let den = denote(&cc, &cells, &[0, 1]).map_err(|e| e.to_string())?;
    // same carrier, with values 0 and 1 in place of tt and ff
    ensure(den.table == copy.table, "copycat_process is not the copy-cat closure")?;
    let clash = parse_proc(&corpus("clash.proc")).map_err(|e| e.to_string())?;
    ensure(
        run(&clash, &Board::empty()).map_err(|e| e.to_string())? == Board::Top,
        "clash did not reach TOP",
    )?;
    Ok(format!(
        "run = denote on {boards} boards; copycat matches; clash is TOP"
    ))
}

type Criterion = fn() -> Outcome;

#[test]
fn acceptance() {
    let criteria: [(&str, Criterion); 10] = [
        ("blass non-associativity", non_associativity),
        ("initial mover table", table1),
        ("cut elimination", cut_elimination),
        ("concurrent associativity", concurrent_associativity),
        ("focussing", focussing),
        ("geometry of interaction", goi),
        ("stability and sequentiality", stability),
        ("closure laws", closure_laws),
        ("oracle equivalence", oracle_equivalence),
        ("process adequacy", process_adequacy),
    ];
    let start = Instant::now();
    let mut failed = Vec::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let ms = t.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({ms} ms): {detail}", k + 1),
            Err(detail) => {
                println!("criterion {:>2} FAIL  {name} ({ms} ms): {detail}", k + 1);
                failed.push(k + 1);
            }
        }
    }
    println!("total {} ms", start.elapsed().as_millis());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
