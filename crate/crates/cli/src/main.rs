mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use polarity_core::blass::{
    compose, dualize, initial_mover, interpret_formula_blass, interpret_proof_blass, is_strategy, play, proof_game,
    strategies, Game, InitialMover, MoveLabel, StrategyTree,
};
use polarity_core::cgames::{
    compose_closures, execute_linking, interpret_formula_cgame, interpret_proof_cgame, is_closure, lift_function,
    linking_function, linking_of_proof, play_closures, proof_dom, ClosureOp,
};
use polarity_core::logic::{default_root_polarity, negate, Formula, Polarity};
use polarity_core::process::{
    board_dom, board_of, denote, denote_at, parse_board, parse_proc, point_of, run, Cell, Expr, Proc,
};
use polarity_core::proofs::focus::{check_foc, check_foc_nodes};
use polarity_core::proofs::{
    check_mall, check_mall_nodes, eliminate_cuts, load_mall, mk_cut, parse_proof, print_mall, MallProof, ParsedProof,
};

use report::{Format, Report};

#[derive(Parser)]
#[command(name = "polarity-lab", version, about = "Proof checkers and game models for MALL")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value = "text")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum System {
    Mall,
    Foc,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Model {
    Blass,
    Concurrent,
}

#[derive(Subcommand)]
enum Command {
    /// Check a proof file.
    Check {
        path: PathBuf,
        /// Proof system; guessed from the rules used when omitted.
        #[arg(long, value_enum)]
        system: Option<System>,
    },
    /// Interpret a proof as a strategy.
    Interp {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "concurrent")]
        model: Model,
    },
    /// Cut the last formula of one proof against its negation in another.
    Compose {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, value_enum, default_value = "concurrent")]
        model: Model,
    },
    /// Both bracketings of the three-proof example in both models.
    Counterexample,
    /// Who moves first, for every polarity assignment.
    Table1,
    /// Linkings of multiplicative proofs.
    Goi {
        #[command(subcommand)]
        action: GoiAction,
    },
    /// Processes.
    Proc {
        #[command(subcommand)]
        action: ProcAction,
    },
    /// Randomised consistency checks, seeded by POLARITY_LAB_SEED.
    Selftest {
        #[arg(long, default_value_t = 50)]
        cases: usize,
    },
}

#[derive(Subcommand)]
enum GoiAction {
    /// Follow axiom and cut links to a cut-free linking.
    Exec { path: PathBuf },
}

#[derive(Subcommand)]
enum ProcAction {
    /// Reduce a process from an initial board.
    Run {
        path: PathBuf,
        /// Initial board, as `cell=value,...`.
        #[arg(long, default_value = "")]
        input: String,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn mall_file(path: &Path) -> Result<MallProof> {
    load_mall(&read(path)?).with_context(|| format!("loading {}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command, cli.format) {
        Ok(report) => {
            print!("{}", report.render(cli.format));
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command, format: Format) -> Result<Report> {
    match command {
        Command::Check { path, system } => cmd_check(&path, system),
        Command::Interp { path, model } => cmd_interp(&path, model),
        Command::Compose { left, right, model } => cmd_compose(&left, &right, model),
        Command::Counterexample => cmd_counterexample(),
        Command::Table1 => Ok(cmd_table1()),
        Command::Goi {
            action: GoiAction::Exec { path },
        } => cmd_goi_exec(&path),
        Command::Proc {
            action: ProcAction::Run { path, input },
        } => cmd_proc_run(&path, &input, format),
        Command::Selftest { cases } => cmd_selftest(cases),
    }
}

fn cmd_check(path: &Path, system: Option<System>) -> Result<Report> {
    let text = read(path)?;
    let parsed = parse_proof(&text).with_context(|| format!("parsing {}", path.display()))?;
    let mut r = Report::new("check");
    let (overall, nodes) = match (parsed, system) {
        (ParsedProof::Mall(p), None | Some(System::Mall)) => {
            r.artifact("system", "mall");
            (
                check_mall(&p).map(|s| s.to_string()).map_err(|e| e.to_string()),
                check_mall_nodes(&p),
            )
        }
        (ParsedProof::Foc(p), None | Some(System::Foc)) => {
            r.artifact("system", "foc");
            (
                check_foc(&p).map(|s| s.to_string()).map_err(|e| e.to_string()),
                check_foc_nodes(&p),
            )
        }
        (ParsedProof::Mall(_), Some(System::Foc)) => bail!("{} is a MALL proof", path.display()),
        (ParsedProof::Foc(_), Some(System::Mall)) => bail!("{} is a focussed proof", path.display()),
    };
    match overall {
        Ok(s) => {
            r.verdict("valid", true, format!("proves {s}"));
            r.artifact("endsequent", s);
        }
        Err(e) => r.verdict("valid", false, e),
    }
    for n in nodes.iter().filter(|n| n.error.is_some()) {
        r.line(format!(
            "{} {}: {}",
            n.path,
            n.rule,
            n.error.as_deref().unwrap_or_default()
        ));
    }
    r.artifact("nodes", &nodes);
    Ok(r)
}

fn closure_lines(r: &mut Report, c: &ClosureOp) {
    r.line(format!("domain {}", c.dom));
    for (x, fx) in c.named_table() {
        r.line(format!("{x} -> {fx}"));
    }
}

fn cmd_interp(path: &Path, model: Model) -> Result<Report> {
    let p = mall_file(path)?;
    let mut r = Report::new("interp");
    r.artifact("endsequent", p.conclusion.to_string());
    match model {
        Model::Blass => {
            let t = interpret_proof_blass(&p)?;
            let ok = is_strategy(&t, &proof_game(&p), Polarity::P);
            r.verdict("strategy", ok, format!("{} nodes on {}", t.size(), proof_game(&p)));
            r.line(t.to_string());
            r.artifact("strategy", &t);
        }
        Model::Concurrent => {
            let c = interpret_proof_cgame(&p)?;
            r.verdict("closure", is_closure(&c), format!("{} positions", c.dom.size()));
            closure_lines(&mut r, &c);
            r.artifact("closure", &c);
        }
    }
    Ok(r)
}

fn cmd_compose(left: &Path, right: &Path, model: Model) -> Result<Report> {
    let (l, rp) = (mall_file(left)?, mall_file(right)?);
    let k1 = l.conclusion.len() - 1;
    let cut_formula = l.conclusion.0[k1].clone();
    let k2 = rp
        .conclusion
        .0
        .iter()
        .position(|f| *f == negate(&cut_formula))
        .ok_or_else(|| anyhow!("{} has no {}", right.display(), negate(&cut_formula)))?;
    let composite = mk_cut(l, k1, rp, k2);
    check_mall(&composite)?;
    let normal = eliminate_cuts(&composite)?;
    let mut r = Report::new("compose");
    r.artifact("composite", print_mall(&composite));
    r.artifact("cut_free", print_mall(&normal));
    r.line(format!("cut-free form:\n{}", print_mall(&normal)));
    match model {
        Model::Blass => {
            let t = interpret_proof_blass(&composite)?;
            let ok = is_strategy(&t, &proof_game(&composite), Polarity::P);
            r.verdict("strategy", ok, format!("{} nodes", t.size()));
            r.line(t.to_string());
            r.artifact("strategy", &t);
        }
        Model::Concurrent => {
            let c = interpret_proof_cgame(&composite)?;
            let n = interpret_proof_cgame(&normal)?;
            r.verdict("closure", is_closure(&c), format!("{} positions", c.dom.size()));
            r.verdict(
                "invariant under cut elimination",
                c == n,
                "composite and cut-free tables compared",
            );
            closure_lines(&mut r, &c);
            r.artifact("closure", &c);
        }
    }
    Ok(r)
}

const PI1: &str = r#"(proves "|- ~a + ~a, a + a" (plusR 0 (plusR 1 (id ~a))))"#;
const PI2: &str = r#"(proves "|- ~a & ~a, a & a" (withR 1 (withR 0 (id ~a) (id ~a)) (withR 0 (id ~a) (id ~a))))"#;
const PI3: &str = r#"(proves "|- ~a + ~a, a + a" (plusR 1 (plusR 0 (id ~a))))"#;

fn side(t: &StrategyTree) -> &'static str {
    match t.first_out_move() {
        Some(MoveLabel::SideL(_)) => "A-side",
        Some(MoveLabel::SideR(_)) => "D-side",
        _ => "none",
    }
}

fn cmd_counterexample() -> Result<Report> {
    let proofs = [load_mall(PI1)?, load_mall(PI2)?, load_mall(PI3)?];
    let mut r = Report::new("counterexample");

    let [s1, s2, s3] = [0, 1, 2].map(|k| interpret_proof_blass(&proofs[k]));
    let (s1, s2, s3) = (s1?, s2?, s3?);
    let g = |s: &str| interpret_formula_blass(&polarity_core::logic::parse_formula(s).expect("fixed formula"));
    let (a, b) = (g("a & a"), g("a + a"));
    let left = compose(&compose(&s1, &s2, &a, &b, &a)?, &s3, &a, &a, &b)?;
    let right = compose(&s1, &compose(&s2, &s3, &b, &a, &b)?, &a, &b, &b)?;
    r.verdict(
        "blass bracketings differ",
        left != right,
        format!("{} vs {} nodes", left.size(), right.size()),
    );
    r.verdict(
        "blass first moves",
        side(&left) == "D-side" && side(&right) == "A-side",
        format!("(s1;s2);s3 opens {}, s1;(s2;s3) opens {}", side(&left), side(&right)),
    );
    r.artifact("blass_left", &left);
    r.artifact("blass_right", &right);
    r.line(format!("(s1;s2);s3 = {left}"));
    r.line(format!("s1;(s2;s3) = {right}"));
    // both composites against the same opponent, as move traces
    let outer = proof_game(&proofs[0]);
    if let Some(o) = strategies(&outer, Polarity::O).first() {
        let (tl, _) = play(&left, o, &outer)?;
        let (tr, _) = play(&right, o, &outer)?;
        r.artifact("blass_traces", serde_json::json!({ "left": tl, "right": tr }));
    }

    let [c, d, e] = [0, 1, 2].map(|k| interpret_proof_cgame(&proofs[k]));
    let (c, d, e) = (c?, d?, e?);
    let cl = compose_closures(&compose_closures(&c, &d)?, &e)?;
    let cr = compose_closures(&c, &compose_closures(&d, &e)?)?;
    r.verdict(
        "concurrent tables agree",
        cl == cr && cr == c && c == e,
        format!("(c;d);e, c;(d;e), c, e on {} positions", c.dom.size()),
    );
    r.artifact("concurrent", &cl);
    Ok(r)
}

const TABLE1: [InitialMover; 16] = {
    use InitialMover::*;
    [O, Theta, O, Tau, O, Ambiguous, O, Sigma, O, O, O, O, O, O, O, O]
};

fn cmd_table1() -> Report {
    let mut r = Report::new("table1");
    let mut rows = Vec::new();
    let mut mismatches = Vec::new();
    r.line("row  A B C D  first");
    for (row, want) in TABLE1.iter().enumerate() {
        let pol: Vec<Polarity> = (0..4)
            .map(|k| {
                if row >> (3 - k) & 1 == 1 {
                    Polarity::P
                } else {
                    Polarity::O
                }
            })
            .collect();
        let got = initial_mover(pol[0], pol[1], pol[2], pol[3]);
        if got != *want {
            mismatches.push(row);
        }
        let letters: Vec<String> = pol.iter().map(|p| p.to_string()).collect();
        r.line(format!("{row:>3}  {}  {got}", letters.join(" ")));
        rows.push(serde_json::json!({ "row": row, "polarities": letters, "initial_move": got.to_string() }));
    }
    let ambiguous: Vec<usize> = (0..16).filter(|&k| TABLE1[k] == InitialMover::Ambiguous).collect();
    r.verdict(
        "matches reference",
        mismatches.is_empty(),
        format!("mismatched rows {mismatches:?}"),
    );
    r.verdict(
        "one ambiguous row",
        ambiguous == [5],
        format!("ambiguous rows {ambiguous:?}"),
    );
    r.artifact("rows", rows);
    r
}

fn cmd_goi_exec(path: &Path) -> Result<Report> {
    let p = mall_file(path)?;
    let l = linking_of_proof(&p)?;
    let x = execute_linking(&l)?;
    let mut r = Report::new("goi exec");
    r.artifact("linking", &l);
    r.artifact("executed", &x);
    r.line(format!(
        "axioms {:?}, cut links {}",
        l.pairs(),
        l.cut.iter().filter(|c| c.is_some()).count() / 2
    ));
    r.line(format!("executed {:?}", x.pairs()));
    let (lifted, ok) = lift_function(&linking_function(&x, &proof_dom(&p))?);
    r.verdict("lift is a closure", ok, format!("{} positions", lifted.dom.size()));
    let c = interpret_proof_cgame(&p)?;
    r.verdict(
        "lift agrees with the proof's closure",
        lifted == c,
        "tables compared on every position",
    );
    Ok(r)
}

fn cmd_proc_run(path: &Path, input: &str, format: Format) -> Result<Report> {
    let p = parse_proc(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    let b = parse_board(input)?;
    let out = run(&p, &b)?;
    let den = denote_at(&p, &b, 64)?;
    let mut r = Report::new("proc run");
    r.artifact("board", &out);
    if format == Format::Json {
        r.verdict(
            "run agrees with denotation",
            out == den,
            format!("denotation gives {den}"),
        );
    } else {
        // text output is the board alone
        r.line(serde_json::to_string(&out)?.trim_matches('"').to_string());
        if out != den {
            r.verdict("run agrees with denotation", false, format!("denotation gives {den}"));
        }
    }
    Ok(r)
}

fn random_formula(rng: &mut StdRng, depth: u32) -> Formula {
    let names = ["a", "b"];
    if depth == 0 || rng.gen_bool(0.35) {
        let n = names[rng.gen_range(0..2)];
        return if rng.gen_bool(0.5) {
            Formula::atom(n)
        } else {
            Formula::neg_atom(n)
        };
    }
    let (x, y) = (random_formula(rng, depth - 1), random_formula(rng, depth - 1));
    match rng.gen_range(0..4) {
        0 => Formula::tensor(x, y),
        1 => Formula::par(x, y),
        2 => Formula::plus(x, y),
        _ => Formula::with(x, y),
    }
}

fn random_proc(rng: &mut StdRng, depth: u32) -> Proc {
    let cell = |rng: &mut StdRng| Cell::Num(rng.gen_range(0..3));
    if depth == 0 || rng.gen_bool(0.4) {
        return match rng.gen_range(0..4) {
            0 => Proc::output(cell(rng), rng.gen_range(0..3)),
            1 => Proc::Nil,
            2 => Proc::input(cell(rng), "x", Proc::Output(cell(rng), Expr::Var("x".into()))),
            _ => Proc::input(cell(rng), "x", Proc::output(cell(rng), rng.gen_range(0..3))),
        };
    }
    Proc::par(random_proc(rng, depth - 1), random_proc(rng, depth - 1))
}

fn is_additive(f: &Formula) -> bool {
    match f {
        Formula::Atom(_) | Formula::NegAtom(_) => true,
        Formula::Plus(a, b) | Formula::With(a, b) => is_additive(a) && is_additive(b),
        _ => false,
    }
}

fn check_formula(f: &Formula) -> Result<(), String> {
    let g: Game = interpret_formula_blass(f);
    if dualize(&dualize(&g)) != g || interpret_formula_blass(&negate(f)) != dualize(&g) {
        return Err(format!("duality fails on {f}"));
    }
    if g.polarity() != default_root_polarity(f) {
        return Err(format!("root polarity of {f}"));
    }
    if g.positions() <= 200 {
        for player in [Polarity::P, Polarity::O] {
            if !strategies(&g, player).iter().all(|s| is_strategy(s, &g, player)) {
                return Err(format!("invalid strategy on {f}"));
            }
        }
    }
    if is_additive(f) {
        let cg = interpret_formula_cgame(f);
        let (sp, so) = (
            cg.sp.enumerate(&cg.dom).unwrap_or_default(),
            cg.so.enumerate(&cg.dom).unwrap_or_default(),
        );
        for s in &sp {
            if !is_closure(s) {
                return Err(format!("non-closure strategy on {f}"));
            }
            if so.iter().any(|t| play_closures(s, t) != play_closures(t, s)) {
                return Err(format!("asymmetric play on {f}"));
            }
        }
    }
    Ok(())
}

fn check_process(p: &Proc) -> Result<(), String> {
    let cells = [Cell::Num(0), Cell::Num(1), Cell::Num(2)];
    let values = [0, 1, 2];
    let d = board_dom(&cells, &values);
    let table = denote(p, &cells, &values).map_err(|e| e.to_string())?;
    for e in 0..d.size() {
        let b = board_of(&d, &cells, &values, e);
        let got = run(p, &b).map_err(|e| e.to_string())?;
        if point_of(&d, &cells, &values, &got).map_err(|e| e.to_string())? != table.at(e) {
            return Err(format!("run and denotation differ for {p} at {b}"));
        }
    }
    Ok(())
}

fn cmd_selftest(cases: usize) -> Result<Report> {
    let seed: u64 = match std::env::var("POLARITY_LAB_SEED") {
        Ok(s) => s.parse().with_context(|| format!("POLARITY_LAB_SEED={s}"))?,
        Err(_) => 0x5eed,
    };
    let mut rng = StdRng::seed_from_u64(seed);
    let mut r = Report::new("selftest");
    r.artifact("seed", seed);
    r.artifact("cases", cases);

    let mut failure = None;
    for _ in 0..cases {
        let f = random_formula(&mut rng, 2);
        if let Err(e) = check_formula(&f) {
            failure = Some(e);
            break;
        }
    }
    r.verdict(
        "formulas",
        failure.is_none(),
        failure.unwrap_or_else(|| format!("{cases} random formulas")),
    );

    let mut failure = None;
    for _ in 0..cases {
        let p = random_proc(&mut rng, 3);
        if let Err(e) = check_process(&p) {
            failure = Some(e);
            break;
        }
    }
    r.verdict(
        "processes",
        failure.is_none(),
        failure.unwrap_or_else(|| format!("{cases} random processes")),
    );

    let t = cmd_table1();
    r.verdict("table1", t.passed(), "initial movers");
    let c = cmd_counterexample()?;
    r.verdict("counterexample", c.passed(), "both models");
    Ok(r)
}
