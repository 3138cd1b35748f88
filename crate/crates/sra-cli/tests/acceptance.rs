//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails other than the one listed in
//! `UNATTAINABLE`, which must fail in exactly the documented way.

mod oracle;

use std::collections::HashSet;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use oracle::{included, Cmd, Oracle, A, I, T};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use sra::decide::{equal_bounded, Bounds, Side, Verdict};
use sra::kernel::Term;
use sra::laws::{
    catalog, check_law, parse_script, render_counterexample, replay_derivation, CheckConfig,
    Counterexample, Domains, Law, LawReport, Outcome,
};
use sra::semantics::{Behaviour, Cx, Observation, Status};
use sra::stepalg::{AtomicDesc, SyncMode, Universe};
use sra::syntax::{parse_term, Printer};
use sra_cli::load_model;

/// Criterion 1 time limit for both universes together.
const AXIOM_TIME_LIMIT: Duration = Duration::from_secs(120);
/// Instances per law and mode: exhaustive when the instance space fits.
const BUDGET: usize = 300;
const SEED: u64 = 0x5eed;
/// Behaviour length used when the direct oracle re-checks a step.
const ORACLE_LEN: usize = 4;
const CROSS_TERMS: usize = 500;
const CROSS_DEPTH: usize = 4;
const RSPEC_MIN: usize = 20;
/// Criteria that cannot hold as stated.
const UNATTAINABLE: &[u32] = &[4];

struct Line {
    id: u32,
    pass: bool,
    title: &'static str,
    detail: String,
}

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn bounds() -> Bounds {
    Bounds::default()
}

fn rel2() -> Universe {
    Universe::relational(&["s0", "s1"]).unwrap()
}

/// One state, the silent event and `e`.
fn ev2() -> Universe {
    Universe::events(&["e"], false, false).unwrap()
}

fn universes() -> [(&'static str, Universe); 2] {
    [("2-state", rel2()), ("1-state/2-event", ev2())]
}

fn config() -> CheckConfig {
    CheckConfig {
        bounds: bounds(),
        samples: BUDGET,
        seed: SEED,
        exhaustive: false,
    }
}

/// Runs `laws` on `u`; returns (laws checked, instances, failures, sampled laws).
struct Run<'l> {
    laws: usize,
    instances: usize,
    sampled: usize,
    bad: Vec<String>,
    /// Laws with at least one instance here.
    covered: Vec<&'l str>,
}

fn run_laws<'l>(u: &Universe, laws: &[&'l Law], cfg: &CheckConfig) -> Run<'l> {
    let dom = Domains::new(u, cfg.seed);
    let mut run = Run {
        laws: 0,
        instances: 0,
        sampled: 0,
        bad: Vec::new(),
        covered: Vec::new(),
    };
    for l in laws.iter().filter(|l| l.scope.applies(u)) {
        let r = check_law(u, l, &dom, cfg);
        run.laws += 1;
        run.instances += r.instances;
        if r.instances >= cfg.samples * l.modes.len().max(1) && !l.exhaustive && !cfg.exhaustive {
            run.sampled += 1;
        }
        if !r.ok() {
            run.bad.push(describe(u, &r));
        } else if r.instances > 0 {
            run.covered.push(l.name);
        }
    }
    run
}

fn describe(u: &Universe, r: &LawReport) -> String {
    match &r.outcome {
        Outcome::Fail(cx) => format!("{}\n{}", r.line(), render_counterexample(u, cx)),
        Outcome::Exhausted(m) | Outcome::Error(m) => format!("{}: {m}", r.line()),
        Outcome::Pass if r.instances == 0 => format!("{}: no instances", r.line()),
        Outcome::Pass => r.line(),
    }
}

fn law_regime(id: u32, title: &'static str, pick: impl Fn(&Law) -> bool) -> (Line, Duration) {
    let cat = catalog();
    let laws: Vec<&Law> = cat.iter().filter(|l| !l.negative && pick(l)).collect();
    let t0 = Instant::now();
    let mut parts = Vec::new();
    let mut failures = Vec::new();
    let mut covered: HashSet<&str> = HashSet::new();
    for (name, u) in universes() {
        let run = run_laws(&u, &laws, &config());
        parts.push(format!(
            "{name}: {} laws, {} instances, {} sampled",
            run.laws, run.instances, run.sampled
        ));
        failures.extend(run.bad);
        covered.extend(run.covered);
    }
    // laws without instances on either universe are checked on one with
    // synchronising events instead
    let vacuous: Vec<&str> = laws
        .iter()
        .map(|l| l.name)
        .filter(|n| !covered.contains(n))
        .collect();
    if !vacuous.is_empty() {
        let extra: Vec<&Law> = laws
            .iter()
            .copied()
            .filter(|l| vacuous.contains(&l.name))
            .collect();
        for (name, ccs, csp) in [("ccs{e,f}", true, false), ("csp{e,f}", false, true)] {
            let u = Universe::events(&["e", "f"], ccs, csp).unwrap();
            let run = run_laws(&u, &extra, &config());
            parts.push(format!(
                "{name}: {} laws, {} instances",
                run.laws, run.instances
            ));
            failures.extend(run.bad);
            covered.extend(run.covered);
        }
        failures.extend(
            vacuous
                .iter()
                .filter(|n| !covered.contains(*n))
                .map(|n| format!("{n}: no instances on any universe")),
        );
    }
    let took = t0.elapsed();
    let mut detail = parts.join("; ");
    if !failures.is_empty() {
        detail += &format!("\n{}", failures.join("\n"));
    }
    (
        Line {
            id,
            pass: failures.is_empty(),
            title,
            detail,
        },
        took,
    )
}

fn is_axiom(l: &Law) -> bool {
    l.name.starts_with("A-")
}

fn criterion_1() -> Line {
    let (mut line, took) = law_regime(1, "axioms", is_axiom);
    let in_time = took <= AXIOM_TIME_LIMIT;
    line.pass &= in_time;
    line.detail = format!(
        "{}; {:.1}s (limit {}s)",
        line.detail,
        took.as_secs_f64(),
        AXIOM_TIME_LIMIT.as_secs()
    );
    line
}

fn criterion_2() -> Line {
    let (mut line, _) = law_regime(2, "derived laws", |l| !is_axiom(l));
    let u = rel2();
    let dom = Domains::new(&u, SEED);
    assert_eq!(dom.rels.len(), 16);
    let cat = catalog();
    for name in ["L-rely-guar", "L-combine-relies"] {
        let law = cat.iter().find(|l| l.name == name).unwrap();
        let cfg = CheckConfig {
            exhaustive: true,
            ..config()
        };
        let r = check_law(&u, law, &dom, &cfg);
        let ok = r.ok() && r.instances >= 16;
        line.pass &= ok;
        line.detail += &format!("; {name} exhaustive: {}", r.line());
    }
    line
}

/// Confirms a counterexample with the derivative membership test and, for
/// finite witnesses on a universe it can afford, the direct oracle.
fn confirm(u: &Universe, cx: &Counterexample) -> Result<&'static str, String> {
    let w = cx.witness.as_ref().ok_or("no witness")?;
    let (l, r) = (u.expand(&cx.lhs), u.expand(&cx.rhs));
    let (inside, outside) = match w.member_of {
        Side::Left => (&l, &r),
        Side::Right => (&r, &l),
    };
    let mut cx_ = Cx::new(u);
    let mem = |cx_: &mut Cx, t: &Term| match &w.observation {
        Observation::Finite(b) => cx_.member(t, b),
        Observation::Lasso(l) => cx_.member_lasso(t, l),
    };
    if mem(&mut cx_, inside) != Ok(true) || mem(&mut Cx::new(u), outside) != Ok(false) {
        return Err("witness not confirmed by membership".into());
    }
    let Observation::Finite(b) = &w.observation else {
        return Ok("lasso, membership");
    };
    let o = Oracle::new(u, b.steps.len());
    let has = |t: &Term| {
        let d = o.den(&Cmd::from_term(t));
        let m = d[b.init].get(&b.steps).copied().unwrap_or(0);
        m & status_bit(b.status) != 0
    };
    if has(inside) && !has(outside) {
        Ok("finite, membership and direct")
    } else {
        Err("direct oracle disagrees".into())
    }
}

fn status_bit(s: Status) -> u8 {
    match s {
        Status::Terminated => T,
        Status::Aborted => A,
        Status::Incomplete => I,
    }
}

fn criterion_3() -> Line {
    let cat = catalog();
    let neg: Vec<&Law> = cat.iter().filter(|l| l.negative).collect();
    let mut pass = neg.len() == 3;
    let mut parts = Vec::new();
    for l in &neg {
        for (name, u) in universes() {
            if !l.scope.applies(&u) {
                continue;
            }
            let r = check_law(&u, l, &Domains::new(&u, SEED), &config());
            let res = match &r.outcome {
                Outcome::Fail(cx) => confirm(&u, cx),
                _ => Err(r.line()),
            };
            match res {
                Ok(how) => parts.push(format!("{} on {name}: confirmed ({how})", l.name)),
                Err(e) => {
                    pass = false;
                    parts.push(format!("{} on {name}: {e}", l.name));
                }
            }
        }
    }
    Line {
        id: 3,
        pass,
        title: "non-laws refuted",
        detail: parts.join("; "),
    }
}

/// Whether the steps of `a` contain a cycle, so that `a^w` has an infinite
/// behaviour.
fn atom_cycles(u: &Universe, a: AtomicDesc) -> bool {
    let n = u.n_states();
    let mut reach = vec![vec![false; n]; n];
    for s in 0..n {
        for &p in u.steps_from(s) {
            let m = if p.is_env() { a.env } else { a.pgm };
            if (m >> p.label()) & 1 == 1 {
                reach[s][u.post(p)] = true;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    (0..n).any(|s| reach[s][s])
}

fn criterion_4() -> Line {
    let mut detail = Vec::new();
    let mut literal = true;
    let mut explained = true;
    for (name, u) in universes() {
        let nil_w = parse_term(&u, "nil^w").unwrap();
        if !equal_bounded(&u, &nil_w, &Term::bot(), bounds()).holds() {
            literal = false;
            explained = false;
            detail.push(format!("{name}: nil^w = bot fails"));
        }
        let nl = u.n_labels();
        let (mut lassos, mut equal) = (0, Vec::new());
        for m in 0u128..1 << (2 * nl) {
            let a = AtomicDesc::new(m & ((1 << nl) - 1), m >> nl);
            let t = Term::atom(a);
            let v = equal_bounded(
                &u,
                &Term::fin_iter(t.clone()),
                &Term::om_iter(t.clone()),
                bounds(),
            );
            match v {
                Verdict::Fails(w)
                    if matches!(w.observation, Observation::Lasso(_))
                        && w.member_of == Side::Right =>
                {
                    lassos += 1;
                    explained &= atom_cycles(&u, a);
                }
                Verdict::Holds => {
                    literal = false;
                    explained &= !atom_cycles(&u, a);
                    equal.push(Printer::new(&u).print(&t));
                }
                _ => {
                    literal = false;
                    explained = false;
                    equal.push(format!(
                        "{} (unexpected verdict)",
                        Printer::new(&u).print(&t)
                    ));
                }
            }
        }
        detail.push(format!(
            "{name}: nil^w = bot; a^* != a^w with a lasso witness for {lassos}/{} atoms",
            1u128 << (2 * nl)
        ));
        if !equal.is_empty() {
            detail.push(format!(
                "{name}: a^* = a^w for the {} atom(s) whose steps form no cycle: {}",
                equal.len(),
                equal.join(", ")
            ));
        }
    }
    if !literal && explained {
        detail.push("a lasso witness exists exactly for the atoms with a cycle of steps".into());
    }
    Line {
        id: 4,
        // the line reports the criterion as stated; `explained` is what the
        // final status requires of it
        pass: literal,
        title: "fixed points",
        detail: format!(
            "{}{}",
            detail.join("; "),
            if explained { "" } else { " [UNEXPLAINED]" }
        ),
    }
}

fn criterion_5() -> Line {
    let names = [
        "L-ccs-synchronise",
        "L-atomic-sync",
        "eqn-csp-synchronise",
        "eqn-csp-interleave",
        "hide-defn",
        "hide-csp-synchronise",
    ];
    let cat = catalog();
    let laws: Vec<&Law> = cat.iter().filter(|l| names.contains(&l.name)).collect();
    let mut pass = laws.len() == names.len();
    let unis: Vec<(&str, Universe)> = vec![
        ("events{e}", Universe::events(&["e"], false, false).unwrap()),
        (
            "events{e,f}",
            Universe::events(&["e", "f"], false, false).unwrap(),
        ),
        ("ccs{e}", Universe::events(&["e"], true, false).unwrap()),
        (
            "ccs{e,f}",
            Universe::events(&["e", "f"], true, false).unwrap(),
        ),
        ("csp{e}", Universe::events(&["e"], false, true).unwrap()),
        (
            "csp{e,f}",
            Universe::events(&["e", "f"], false, true).unwrap(),
        ),
    ];
    let cfg = CheckConfig {
        exhaustive: true,
        ..config()
    };
    let mut parts = Vec::new();
    let mut covered: HashSet<&str> = HashSet::new();
    for (name, u) in &unis {
        let dom = Domains::new(u, SEED);
        for l in laws.iter().filter(|l| l.scope.applies(u)) {
            let r = check_law(u, l, &dom, &cfg);
            if !r.ok() {
                pass = false;
                parts.push(format!("{name}: {}", describe(u, &r)));
            } else if r.instances > 0 {
                covered.insert(l.name);
            }
            parts.push(format!("{name} {} ({})", l.name, r.instances));
        }
    }
    pass &= covered.len() == names.len();
    Line {
        id: 5,
        pass,
        title: "process algebra",
        detail: parts.join("; "),
    }
}

/// Replays a script and re-checks every step with the direct oracle.
fn replay_checked(u: &Universe, script: &str, len: usize) -> Result<usize, String> {
    let src =
        std::fs::read_to_string(root().join("scripts").join(script)).map_err(|e| e.to_string())?;
    let s = parse_script(&src)?;
    let rep = replay_derivation(u, &catalog(), &s, bounds());
    if !rep.holds() {
        return Err(rep.error.unwrap_or_else(|| "a step failed".into()));
    }
    let o = Oracle::new(u, len);
    let den = |t: &Term| o.den(&Cmd::from_term(&u.expand(t)));
    let mut prev = den(&rep.start);
    for st in &rep.steps {
        let next = den(&st.result);
        let ok =
            included(&next, &prev).is_ok() && (st.refinement || included(&prev, &next).is_ok());
        if !ok {
            return Err(format!(
                "line {} ({}) not confirmed by the direct oracle",
                st.line, st.law
            ));
        }
        prev = next;
    }
    Ok(rep.steps.len())
}

fn criterion_6() -> Line {
    let model = |m: &str| load_model(&root().join("models").join(m)).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    let mut note = |name: String, r: Result<usize, String>| match r {
        Ok(n) => parts.push(format!("{name}: {n} steps")),
        Err(e) => {
            pass = false;
            parts.push(format!("{name}: {e}"));
        }
    };
    note(
        "conjoin-assumptions".into(),
        replay_checked(
            &model("two_state.toml"),
            "conjoin-assumptions.drv",
            ORACLE_LEN,
        ),
    );
    note(
        "test-sync-test".into(),
        replay_checked(&model("three_state.toml"), "test-sync-test.drv", 3),
    );
    note(
        "CCS-synchronise".into(),
        replay_checked(&model("ccs.toml"), "ccs-synchronise.drv", 3),
    );
    let mut held = 0;
    for r in 0..16u128 {
        let mut u = rel2();
        u.add_relation("r", r).unwrap();
        match replay_checked(&u, "rely-guar.drv", ORACLE_LEN) {
            Ok(_) => held += 1,
            Err(e) => parts.push(format!("rely-guar with r={r:#06b}: {e}")),
        }
    }
    pass &= held == 16;
    parts.push(format!("rely-guar: all {held}/16 relations"));
    Line {
        id: 6,
        pass,
        title: "derivation replays",
        detail: parts.join("; "),
    }
}

fn cmd_strategy() -> impl Strategy<Value = Cmd> {
    let leaf = prop_oneof![
        Just(Cmd::Bot),
        Just(Cmd::Top),
        Just(Cmd::Nil),
        (0u128..4).prop_map(Cmd::Test),
        (1u128..16, 0u128..16).prop_map(|(p, e)| Cmd::Atom(AtomicDesc::new(p, e))),
        (0u128..16, 1u128..16).prop_map(|(p, e)| Cmd::Atom(AtomicDesc::new(p, e))),
    ];
    leaf.prop_recursive(CROSS_DEPTH as u32, 12, 2, |c| {
        let b = |x: Cmd| Box::new(x);
        prop_oneof![
            (c.clone(), c.clone()).prop_map(move |(x, y)| Cmd::Seq(b(x), b(y))),
            (c.clone(), c.clone()).prop_map(|(x, y)| Cmd::Choice(vec![x, y])),
            (c.clone(), c.clone()).prop_map(|(x, y)| Cmd::Conj(vec![x, y])),
            (c.clone(), c.clone()).prop_map(move |(x, y)| Cmd::Sync(
                SyncMode::Parallel,
                b(x),
                b(y)
            )),
            (c.clone(), c.clone()).prop_map(move |(x, y)| Cmd::Sync(
                SyncMode::WeakConj,
                b(x),
                b(y)
            )),
            c.clone().prop_map(move |x| Cmd::Fin(b(x))),
            c.clone().prop_map(move |x| Cmd::Om(b(x))),
            c.prop_map(move |x| Cmd::Inf(b(x))),
        ]
    })
}

fn criterion_7() -> Line {
    let u = rel2();
    let o = Oracle::new(&u, CROSS_DEPTH);
    let mut behaviours = Vec::new();
    for s in 0..u.n_states() {
        for w in o.traces(s) {
            for st in [Status::Terminated, Status::Aborted, Status::Incomplete] {
                behaviours.push(Behaviour {
                    init: s,
                    steps: w.clone(),
                    status: st,
                });
            }
        }
    }
    let mut runner = TestRunner::new_with_rng(
        Config::default(),
        TestRng::from_seed(RngAlgorithm::ChaCha, &[7; 32]),
    );
    let strat = cmd_strategy();
    let (mut checks, mut agree, mut deep, mut members) = (0usize, 0usize, 0usize, 0usize);
    let mut first_bad = None;
    let mut seen = HashSet::new();
    let mut terms = 0;
    while terms < CROSS_TERMS {
        let c = strat.new_tree(&mut runner).unwrap().current();
        let raw = c.raw();
        if !seen.insert(raw.clone()) {
            continue;
        }
        terms += 1;
        deep = deep.max(raw.depth());
        let norm = c.build(&u);
        let den = o.den(&c);
        let (mut cr, mut cn) = (Cx::new(&u), Cx::new(&u));
        for b in &behaviours {
            let want = den[b.init].get(&b.steps).copied().unwrap_or(0) & status_bit(b.status) != 0;
            let got_raw = cr.member(&raw, b);
            let got_norm = cn.member(&norm, b);
            checks += 2;
            members += 2 * usize::from(want);
            agree += usize::from(got_raw == Ok(want)) + usize::from(got_norm == Ok(want));
            if (got_raw != Ok(want) || got_norm != Ok(want)) && first_bad.is_none() {
                first_bad = Some(format!(
                    "{} on {:?}: direct {want}, derivatives {got_raw:?}/{got_norm:?}",
                    Printer::new(&u).print(&raw),
                    b
                ));
            }
        }
    }
    let pct = 100.0 * agree as f64 / checks as f64;
    let mut detail = format!(
        "{terms} terms (max depth {deep}) x {} behaviours, raw and normalized: {agree}/{checks} agree ({pct:.2}%), {members} of them memberships",
        behaviours.len()
    );
    if let Some(b) = first_bad {
        detail += &format!("; first disagreement: {b}");
    }
    Line {
        id: 7,
        pass: agree == checks && deep <= CROSS_DEPTH,
        title: "oracle cross-check",
        detail,
    }
}

fn criterion_8() -> Line {
    let cat = catalog();
    let law = cat
        .iter()
        .find(|l| l.name == "L-introduce-parallel-rspec")
        .unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    let three = Universe::relational(&["s0", "s1", "s2"]).unwrap();
    for (name, u) in [("2-state", rel2()), ("3-state", three)] {
        let cfg = CheckConfig {
            samples: 24,
            ..config()
        };
        let r = check_law(&u, law, &Domains::new(&u, SEED), &cfg);
        pass &= r.ok() && r.instances >= RSPEC_MIN;
        parts.push(format!("{name}: {}", r.line()));
    }
    Line {
        id: 8,
        pass,
        title: "introduce-parallel-rspec",
        detail: parts.join("; "),
    }
}

fn main() -> ExitCode {
    let only: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.strip_prefix("--criterion=").and_then(|n| n.parse().ok()))
        .collect();
    let all: [(u32, fn() -> Line); 8] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
    ];
    let mut unexpected = 0;
    let mut known = Vec::new();
    for (id, f) in all {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let t0 = Instant::now();
        let line = f();
        let verdict = if line.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {} {:<26} {verdict} [{:.1}s] {}",
            line.id,
            line.title,
            t0.elapsed().as_secs_f64(),
            line.detail
        );
        let expected_fail =
            UNATTAINABLE.contains(&line.id) && !line.detail.contains("[UNEXPLAINED]");
        if !line.pass && !expected_fail {
            unexpected += 1;
        }
        if !line.pass && expected_fail {
            known.push(line.id.to_string());
        }
        if line.pass && UNATTAINABLE.contains(&line.id) {
            println!("criterion {} now passes; update UNATTAINABLE", line.id);
            unexpected += 1;
        }
    }
    if unexpected == 0 {
        if known.is_empty() {
            println!("acceptance: all selected criteria pass");
        } else {
            println!(
                "acceptance: every attainable criterion passes; criterion {} fails as stated (see README)",
                known.join(", ")
            );
        }
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {unexpected} unexpected failure(s)");
        ExitCode::FAILURE
    }
}
