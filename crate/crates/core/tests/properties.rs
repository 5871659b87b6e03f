//! Property tests over random formulas, strategies and processes.
//!
//! `POLARITY_LAB_SEED` fixes the generator seed.

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use polarity_core::blass::{dualize, interpret_formula_blass, is_strategy, play, strategies, Game, StrategyTree};
use polarity_core::cgames::{
    bool_strategy, formula_dom, inject, interpret_formula_cgame, is_closure, play_closures, tuple, ClosureOp, Dom,
};
use polarity_core::logic::{default_root_polarity, negate, Formula, Polarity};
use polarity_core::process::{board_dom, board_of, denote, point_of, run, Board, Cell, Expr, Proc};

fn runner(cases: u32) -> TestRunner {
    let seed: u64 = std::env::var("POLARITY_LAB_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0x5eed);
    let bytes: Vec<u8> = (0..4).flat_map(|_| seed.to_le_bytes()).collect();
    TestRunner::new_with_rng(
        Config {
            cases,
            ..Config::default()
        },
        TestRng::from_seed(RngAlgorithm::ChaCha, &bytes),
    )
}

fn literal() -> BoxedStrategy<Formula> {
    prop_oneof![
        Just(Formula::atom("a")),
        Just(Formula::neg_atom("a")),
        Just(Formula::atom("b")),
        Just(Formula::neg_atom("b")),
    ]
    .boxed()
}

fn formula() -> BoxedStrategy<Formula> {
    literal()
        .prop_recursive(2, 6, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::tensor(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::par(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::plus(a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| Formula::with(a, b)),
            ]
        })
        .boxed()
}

fn additive() -> BoxedStrategy<Formula> {
    literal()
        .prop_recursive(3, 8, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::plus(a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| Formula::with(a, b)),
            ]
        })
        .boxed()
}

#[test]
fn dual_games() {
    runner(200)
        .run(&formula(), |f| {
            let g = interpret_formula_blass(&f);
            prop_assert_eq!(dualize(&dualize(&g)), g.clone());
            prop_assert_eq!(interpret_formula_blass(&negate(&f)), dualize(&g));
            prop_assert_eq!(g.polarity(), default_root_polarity(&f));
            prop_assert_eq!(formula_dom(&negate(&f)), formula_dom(&f));
            Ok(())
        })
        .unwrap();
}

fn small(g: &Game) -> bool {
    g.positions() <= 200
}

#[test]
fn strategies_are_valid_and_play_out() {
    runner(120)
        .run(&formula(), |f| {
            let g = interpret_formula_blass(&f);
            if !small(&g) {
                return Ok(());
            }
            let ps = strategies(&g, Polarity::P);
            let os = strategies(&g, Polarity::O);
            prop_assert!(ps.iter().all(|s| is_strategy(s, &g, Polarity::P)));
            prop_assert!(os.iter().all(|s| is_strategy(s, &g, Polarity::O)));
            // duality swaps the players' strategies
            let d = dualize(&g);
            prop_assert_eq!(strategies(&d, Polarity::O).len(), ps.len());
            for s in ps.iter().take(8) {
                for t in os.iter().take(8) {
                    prop_assert!(play(s, t, &g).is_ok());
                }
            }
            Ok(())
        })
        .unwrap();
}

/// Reads a Blass strategy on an additive formula as a closure.
fn closure_of_tree(t: &StrategyTree, f: &Formula) -> ClosureOp {
    let dom = formula_dom(f);
    let label_index = |m: &polarity_core::blass::MoveLabel| match m.to_string().as_str() {
        "inl" | "tt" => 0,
        _ => 1,
    };
    match (f, t) {
        (Formula::Atom(_) | Formula::NegAtom(_), StrategyTree::OutMove(m, _)) => bool_strategy(label_index(m) + 1),
        (Formula::Atom(_) | Formula::NegAtom(_), _) => ClosureOp::identity(dom),
        (Formula::Plus(a, b) | Formula::With(a, b), StrategyTree::OutMove(m, rest)) => {
            let i = label_index(m);
            let sub = if i == 0 { a } else { b };
            inject(&dom, i, &closure_of_tree(rest, sub))
        }
        (Formula::Plus(a, b) | Formula::With(a, b), StrategyTree::InBranch(bs)) => {
            let subs: Vec<ClosureOp> = bs
                .iter()
                .map(|(m, s)| closure_of_tree(s, if label_index(m) == 0 { a } else { b }))
                .collect();
            tuple(&dom, &subs)
        }
        _ => panic!("not an additive strategy"),
    }
}

#[test]
fn blass_and_concurrent_agree_on_additives() {
    runner(150)
        .run(&additive(), |f| {
            let g = interpret_formula_blass(&f);
            let cg = interpret_formula_cgame(&f);
            for (player, set) in [(Polarity::P, &cg.sp), (Polarity::O, &cg.so)] {
                let mut from_trees: Vec<ClosureOp> =
                    strategies(&g, player).iter().map(|t| closure_of_tree(t, &f)).collect();
                let mut listed = set.enumerate(&cg.dom).expect("additive sets are finite");
                from_trees.sort_by_key(|c| format!("{:?}", c.table));
                listed.sort_by_key(|c| format!("{:?}", c.table));
                prop_assert_eq!(from_trees, listed);
            }
            Ok(())
        })
        .unwrap();
}

#[test]
fn additive_strategies_are_closures_and_play_symmetrically() {
    runner(150)
        .run(&additive(), |f| {
            let cg = interpret_formula_cgame(&f);
            let sp = cg.sp.enumerate(&cg.dom).unwrap();
            let so = cg.so.enumerate(&cg.dom).unwrap();
            let dual = interpret_formula_cgame(&negate(&f));
            prop_assert_eq!(dual.sp.enumerate(&dual.dom).unwrap(), so.clone());
            for s in &sp {
                prop_assert!(is_closure(s));
                for t in &so {
                    prop_assert_eq!(play_closures(s, t), play_closures(t, s));
                }
            }
            Ok(())
        })
        .unwrap();
}

fn dom() -> BoxedStrategy<Dom> {
    Just(Dom::booleans())
        .prop_recursive(2, 6, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Dom::product(a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| Dom::LiftedSum(vec![("inl".into(), a), ("inr".into(), b)])),
            ]
        })
        .boxed()
}

#[test]
fn joins_are_least_upper_bounds() {
    runner(60)
        .run(&dom(), |d| {
            let n = d.size().min(60);
            for x in 0..n {
                for y in 0..n {
                    let ubs: Vec<usize> = (0..d.size()).filter(|&z| d.leq(x, z) && d.leq(y, z)).collect();
                    match d.join(x, y) {
                        Some(j) => {
                            prop_assert!(ubs.contains(&j));
                            prop_assert!(ubs.iter().all(|&z| d.leq(j, z)));
                        }
                        None => prop_assert!(ubs.is_empty()),
                    }
                    let m = d.meet(x, y);
                    prop_assert!(d.leq(m, x) && d.leq(m, y));
                }
            }
            Ok(())
        })
        .unwrap();
}

const CELLS: [Cell; 3] = [Cell::Num(0), Cell::Num(1), Cell::Num(2)];

fn process() -> BoxedStrategy<Proc> {
    let cell = prop::sample::select(CELLS.to_vec());
    let value = 0u64..3;
    let leaf = prop_oneof![
        (cell.clone(), value.clone()).prop_map(|(c, v)| Proc::output(c, v)),
        Just(Proc::Nil),
        (cell.clone(), cell.clone()).prop_map(|(c, d)| Proc::input(c, "x", Proc::Output(d, Expr::Var("x".into())))),
        (cell.clone(), cell, value).prop_map(|(c, d, v)| Proc::input(c, "x", Proc::output(d, v))),
    ];
    leaf.prop_recursive(2, 6, 2, |inner| {
        (inner.clone(), inner).prop_map(|(a, b)| Proc::par(a, b))
    })
    .boxed()
}

#[test]
fn processes() {
    let values = [0, 1, 2];
    let d = board_dom(&CELLS, &values);
    runner(60)
        .run(&(process(), process()), |(p, q)| {
            let pq = denote(&Proc::par(p.clone(), q.clone()), &CELLS, &values).unwrap();
            let qp = denote(&Proc::par(q.clone(), p.clone()), &CELLS, &values).unwrap();
            prop_assert_eq!(&pq, &qp);
            prop_assert!(is_closure(&pq));
            let runs: Vec<Board> = (0..d.size())
                .map(|e| run(&Proc::par(p.clone(), q.clone()), &board_of(&d, &CELLS, &values, e)).unwrap())
                .collect();
            for e in 0..d.size() {
                // adequacy
                prop_assert_eq!(point_of(&d, &CELLS, &values, &runs[e]).unwrap(), pq.at(e));
                // run grows with its input
                for e2 in 0..d.size() {
                    if d.leq(e, e2) {
                        prop_assert!(runs[e].leq(&runs[e2]));
                    }
                }
            }
            Ok(())
        })
        .unwrap();
}
