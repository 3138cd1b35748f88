//! The law catalog. Names follow the labels of the algebra's literature;
//! unlabelled facts get descriptive names.

use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{Law, Scope};
use crate::kernel::Term;
use crate::stepalg::{bit, iter_bits, AtomicDesc, Bits, Universe, SILENT};
use crate::syntax::{Env, Mode, Value};

fn atom(env: &Env, v: &str) -> AtomicDesc {
    match env.get(v) {
        Some(Value::Atom(a)) => *a,
        _ => panic!("`{v}` is not bound to an atomic step"),
    }
}

fn bits(env: &Env, v: &str) -> Bits {
    match env.get(v) {
        Some(Value::Labels(b) | Value::Pairs(b) | Value::Events(b) | Value::Pred(b)) => *b,
        _ => panic!("`{v}` is not bound to a set"),
    }
}

fn event(env: &Env, v: &str) -> usize {
    bits(env, v).trailing_zeros() as usize
}

fn mode(env: &Env) -> Mode {
    match env.get("##") {
        Some(Value::Mode(m)) => *m,
        _ => panic!("no synchronisation mode bound"),
    }
}

fn subset(a: Bits, b: Bits) -> bool {
    a & !b == 0
}

/// The event `g` with `π(e) ∥ π(f) = π(g)`, if any.
fn sync_event(u: &Universe, env: &Env) -> Option<Value> {
    let (e, f) = (event(env, "e"), event(env, "f"));
    let s = u.sync_prim(
        crate::stepalg::SyncMode::Parallel,
        u.pi(u.lift_events(bit(e))),
        u.pi(u.lift_events(bit(f))),
    );
    (s.env == 0 && s.pgm.count_ones() == 1)
        .then(|| Value::Events(bit(u.label_event(s.pgm.trailing_zeros() as usize))))
}

fn base_event(u: &Universe, e: usize) -> bool {
    e != SILENT && !u.is_tagged(e)
}

fn sequential() -> Vec<Law> {
    [
        Law::new("A-seq-asso", "c0; (c1; c2)", "(c0; c1); c2")
            .vars("c0 c1 c2: cmd")
            .about("sequential composition is associative"),
        Law::new("A-seq-identity", "nil; c", "c")
            .vars("c: cmd")
            .about("nil is a left identity of sequential composition"),
        Law::new("A-seq-identity-right", "c; nil", "c")
            .vars("c: cmd")
            .about("nil is a right identity of sequential composition"),
        Law::new("A-seq-annihilation-left", "bot; c", "bot")
            .vars("c: cmd")
            .about("abort annihilates what follows it"),
        Law::new("top-annihilation-left", "top; c", "top")
            .vars("c: cmd")
            .about("an infeasible command annihilates what follows it"),
        Law::new("A-seq-distr-right", "(c \\/ d); e", "c; e \\/ d; e")
            .vars("c d e: cmd")
            .about("sequential composition distributes over choice on the left operand"),
        Law::new("A-seq-distr-left", "c; (d \\/ e)", "c; d \\/ c; e")
            .vars("c d e: cmd")
            .about("sequential composition distributes over nonempty choice on the right operand"),
        Law::new("choice-idempotent", "c \\/ c", "c")
            .vars("c: cmd")
            .about("choice is idempotent"),
        Law::new("choice-comm", "c \\/ d", "d \\/ c")
            .vars("c d: cmd")
            .about("choice is commutative"),
        Law::new("choice-absorb", "c \\/ (c /\\ d)", "c")
            .vars("c d: cmd")
            .about("choice absorbs a conjunction containing an operand"),
        Law::new("conj-absorb", "c /\\ (c \\/ d)", "c")
            .vars("c d: cmd")
            .about("conjunction absorbs a choice containing an operand"),
        Law::new("choice-top", "c \\/ top", "c")
            .vars("c: cmd")
            .about("top is the identity of choice"),
        Law::new("choice-bot", "c \\/ bot", "bot")
            .vars("c: cmd")
            .about("abort annihilates choice"),
    ]
    .into()
}

fn iteration() -> Vec<Law> {
    [
        Law::new("inf-iter-def", "c^inf", "c^w; top")
            .vars("c: cmd")
            .about("infinite iteration is omega iteration followed by top"),
        Law::new("L-omega-unfold", "c^w", "nil \\/ c; c^w")
            .vars("c: cmd")
            .about("omega iteration unfolds once"),
        Law::new("L-finite-unfold", "c^*", "nil \\/ c; c^*")
            .vars("c: cmd")
            .about("finite iteration unfolds once"),
        Law::new("L-infinite-unfold", "c^inf", "c; c^inf")
            .vars("c: cmd")
            .about("infinite iteration unfolds once"),
        Law::new("L-infinite-unfold-power", "c^inf", "c^i; c^inf")
            .vars("c: cmd; i: nat")
            .about("infinite iteration unfolds any finite number of times"),
        Law::new("L-infinite-annihilates", "c^inf; d", "c^inf")
            .vars("c d: cmd")
            .about("nothing follows an infinite iteration"),
        Law::new("L-omega-induction", "c^w", "x")
            .refines()
            .vars("c d x: cmd")
            .hint(
                "x",
                &[
                    "c^w",
                    "c^w; d",
                    "c^*",
                    "c^*; d",
                    "c^inf",
                    "d",
                    "bot",
                    "c^w \\/ d",
                    "top",
                ],
            )
            .premise("nil \\/ c; x", "x")
            .about("omega iteration is the least fixed point of unfolding"),
        Law::new("L-finite-induction", "x", "c^*")
            .refines()
            .vars("c d x: cmd")
            .hint(
                "x",
                &[
                    "c^*",
                    "c^*; d",
                    "c^w",
                    "top",
                    "nil",
                    "c^* /\\ d",
                    "d",
                    "bot",
                    "c^w; d",
                ],
            )
            .premise("x", "nil \\/ c; x")
            .about("finite iteration is the greatest fixed point of unfolding"),
        Law::new("L-infinite-twice", "c^w; c^w", "c^w")
            .vars("c: cmd")
            .about("omega iteration absorbs itself"),
        Law::new("L-finite-twice", "c^*; c^*", "c^*")
            .vars("c: cmd")
            .about("finite iteration absorbs itself"),
        Law::new("L-isolation", "c^w", "c^* \\/ c^inf")
            .vars("c: cmd")
            .about("omega iteration splits into finite and infinite iteration"),
        Law::new("L-finite-iteration", "c^*", "c^i")
            .refines()
            .vars("c: cmd; i: nat")
            .about("every power refines finite iteration"),
        Law::new(
            "L-finite-iteration-bounded",
            "c^*",
            "nil \\/ c \\/ c^2 \\/ c^3 \\/ c^4 \\/ c^5 \\/ c^6",
        )
        .vars("c: cmd")
        .about("finite iteration is the choice over powers, cut at the trace bound"),
        Law::new("L-iteration1", "c^w; d", "c^*; d \\/ c^inf")
            .vars("c d: cmd")
            .about("omega iteration followed by d"),
    ]
    .into()
}

fn tests_and_steps() -> Vec<Law> {
    [
        Law::new("tau-inf-tau", "test(p | q)", "test(p) \\/ test(q)")
            .vars("p q: test")
            .about("union of predicates is choice of tests"),
        Law::new("tau-sup-tau", "test(p & q)", "test(p) /\\ test(q)")
            .vars("p q: test")
            .about("intersection of predicates is conjunction of tests"),
        Law::new("tau-negate", "test(!p)", "!test(p)")
            .vars("p: test")
            .about("complement of a predicate is test negation"),
        Law::new("tau-ordering", "test(q)", "test(p)")
            .iff_fn("p is a subset of q", |_, e| {
                subset(bits(e, "p"), bits(e, "q"))
            })
            .vars("p q: test")
            .about("test refinement reverses predicate inclusion"),
        Law::new("tau-bot-top", "test(none)", "top").about("the empty predicate is top"),
        Law::new("tau-top-nil", "test(all)", "nil").about("the full predicate is nil"),
        Law::new("tau-seq-tau", "test(p & q)", "test(p); test(q)")
            .vars("p q: test")
            .about("intersection of predicates is sequencing of tests"),
        Law::new(
            "A-test-sup-interchange",
            "(t; c) /\\ (t2; d)",
            "(t /\\ t2); (c /\\ d)",
        )
        .vars("t t2: test; c d: cmd")
        .about("tests interchange with conjunction and sequencing"),
        Law::new("test-seq-test", "t; t2", "t /\\ t2")
            .vars("t t2: test")
            .about("sequenced tests are their conjunction"),
        Law::new("def-assert", "assert(p)", "test(p) \\/ test(!p); bot")
            .vars("p: test")
            .about("an assertion terminates where p holds and aborts elsewhere"),
        Law::new("assert-galois", "assert(p); c", "d")
            .iff("c", "test(p); d")
            .vars("p: test; c d: cmd")
            .about("assertions and tests form a Galois connection"),
        Law::new(
            "A-step-sup-interchange",
            "(a; c) /\\ (b; d)",
            "(a /\\ b); (c /\\ d)",
        )
        .vars("a b: atom; c d: cmd")
        .about("atomic steps interchange with conjunction and sequencing"),
        Law::new("step-boolean-complement", "a /\\ !a", "top")
            .vars("a: atom")
            .about("a step and its complement have no common behaviour"),
        Law::new("step-boolean-cover", "a \\/ !a", "alpha")
            .vars("a: atom")
            .about("a step and its complement cover all steps"),
        Law::new("A-test-atomic-sup", "alpha /\\ nil", "top")
            .about("tests and atomic steps share only top"),
        Law::new("A-test-atomic-pre", "t; a", "b")
            .vars("t: test; a b: atom")
            .compute("b", |u, e| {
                Some(Value::Atom(u.restrict_pre(atom(e, "a"), bits(e, "t"))))
            })
            .about("a test followed by an atomic step is an atomic step"),
        Law::new("def-assume", "assume(a)", "a \\/ !a; bot")
            .vars("a: atom")
            .about("an assumption takes a step in a or aborts after any other step"),
        Law::new(
            "L-conjoin-assume",
            "assume(a) /\\ assume(b)",
            "assume(a \\/ b)",
        )
        .vars("a b: atom")
        .about("conjoined assumptions combine into one"),
        Law::new("L-weaken-assume", "assume(a)", "assume(b)")
            .refines()
            .vars("a b: atom")
            .when("a is contained in b", |_, e| {
                let (a, b) = (atom(e, "a"), atom(e, "b"));
                a.meet(b) == b
            })
            .about("weakening an assumption is a refinement"),
        Law::new(
            "L-iterated-assumption",
            "assume(a)^w",
            "a^w; (nil \\/ !a; bot)",
        )
        .vars("a: atom")
        .about("iterated assumption steps through a and aborts on the first other step"),
    ]
    .into()
}

fn sync_axioms() -> Vec<Law> {
    [
        Law::new("A-sync-assoc", "c0 ## (c1 ## c2)", "(c0 ## c1) ## c2")
            .vars("c0 c1 c2: cmd")
            .sync()
            .about("synchronisation is associative"),
        Law::new("A-sync-comm", "c ## d", "d ## c")
            .vars("c d: cmd")
            .sync()
            .about("synchronisation is commutative"),
        Law::new("A-sync-id-command", "c ## syncid", "c")
            .vars("c: cmd")
            .sync()
            .about("each mode has an identity command"),
        Law::new("A-sync-Inf-distrib", "c ## (d \\/ e)", "c ## d \\/ c ## e")
            .vars("c d e: cmd")
            .sync()
            .about("synchronisation distributes over nonempty choice"),
        Law::new("A-sync-closed", "a ## b", "g")
            .vars("a b g: atom")
            .sync()
            .compute("g", |u, e| {
                Some(Value::Atom(mode(e).atom(u, atom(e, "a"), atom(e, "b"))))
            })
            .about("atomic steps are closed under synchronisation"),
        Law::new("A-sync-id", "a ## syncatomid", "a")
            .vars("a: atom")
            .sync()
            .about("each mode has an atomic identity"),
        Law::new(
            "A-sync-weak-interchange-seq",
            "c0; c1 ## d0; d1",
            "(c0 ## d0); (c1 ## d1)",
        )
        .refines()
        .vars("c0 c1 d0 d1: cmd")
        .sync()
        .about("synchronising sequences piecewise is a refinement"),
        Law::new(
            "A-atomic-sync-interchange",
            "a; c ## b; d",
            "(a ## b); (c ## d)",
        )
        .vars("a b: atom; c d: cmd")
        .sync()
        .about("leading atomic steps synchronise first"),
        Law::new(
            "parallel-interchange-sequential",
            "a; c || b; d",
            "(a || b); (c || d)",
        )
        .vars("a b: atom; c d: cmd")
        .about("parallel composition of atomically prefixed commands"),
        Law::new("A-atomic-infiter-sync", "a^inf ## b^inf", "(a ## b)^inf")
            .vars("a b: atom")
            .sync()
            .about("infinite iterations of steps synchronise stepwise"),
        Law::new("A-nil-sync-absorb", "nil ## nil", "nil")
            .sync()
            .about("nil synchronises with itself"),
        Law::new("A-nil-sync-atomic", "a; c ## nil", "top")
            .vars("a: atom; c: cmd")
            .sync()
            .about("a command that must take a step cannot synchronise with nil"),
        Law::new("A-test-sync-interchange", "t; c ## t; d", "t; (c ## d)")
            .vars("t: test; c d: cmd")
            .sync()
            .about("a common leading test moves out of a synchronisation"),
        Law::new("A-sync-cstepd", "a ## alpha", "a")
            .refines()
            .vars("a: atom")
            .sync()
            .about("synchronising with any step refines to the step itself"),
        Law::new("A-sync-test", "a; c ## t", "top")
            .vars("a: atom; c: cmd; t: test")
            .sync()
            .about("a stepping command cannot synchronise with a test"),
        Law::new("A-sync-top", "a; c ## top", "top")
            .vars("a: atom; c: cmd")
            .sync()
            .about("a stepping command synchronised with top is top"),
        Law::new("L-test-command-sync-command", "t2 ## t; d", "t; (t2 ## d)")
            .vars("t t2: test; d: cmd")
            .sync()
            .about("a test moves out of a synchronisation with a test"),
        Law::new(
            "L-test-command-sync-command-atomic",
            "a; c ## t; d",
            "t; (a; c ## d)",
        )
        .vars("a: atom; t: test; c d: cmd")
        .sync()
        .about("a test moves out of a synchronisation with a stepping command"),
        Law::new("L-test-command-sync-command-id", "c ## t; d", "t; (c ## d)")
            .vars("c d e: cmd; t: test")
            .sync()
            .hint(
                "c",
                &[
                    "syncid",
                    "syncid /\\ e",
                    "top",
                    "syncid; top",
                    "syncid; e /\\ syncid",
                ],
            )
            .premise("syncid", "c")
            .about("a test moves out of a synchronisation with a refinement of the identity"),
        Law::new("L-test-sync-test", "t ## t2", "t /\\ t2")
            .vars("t t2: test")
            .sync()
            .about("synchronised tests are their conjunction"),
        Law::new(
            "L-sync-distribute-seq",
            "c ## d0; d1",
            "(c ## d0); (c ## d1)",
        )
        .refines()
        .vars("a: atom; e c d0 d1: cmd")
        .sync()
        .hint(
            "c",
            &[
                "a^w", "a^*", "a^inf", "syncid", "chaos", "term", "nil", "bot", "e^w", "e",
            ],
        )
        .premise("c", "c; c")
        .about("a command refined by its own repetition distributes over sequencing"),
        Law::new("neg-strong-test-distribution", "c ## t; d", "t; (c ## d)")
            .vars("c d: cmd; t: test")
            .modes(&[Mode::Par, Mode::Weak])
            .negative()
            .about("a test does not in general move out of a synchronisation"),
        Law::new("neg-left-distr-empty-choice", "c; top", "top")
            .vars("c: cmd")
            .negative()
            .about("sequencing does not distribute over the empty choice on the right"),
        Law::new("neg-sync-top", "c ## top", "top")
            .vars("c: cmd")
            .modes(&[Mode::Par, Mode::Weak])
            .negative()
            .about("an abort-strict synchronisation does not send everything to top"),
    ]
    .into()
}

fn atomic_iteration() -> Vec<Law> {
    [
        Law::new("L-atomic-iteration-nil", "a^* ## nil", "nil")
            .vars("a: atom")
            .sync()
            .about("finite iteration of a step synchronised with nil"),
        Law::new("L-atomic-iteration-nil-omega", "a^w ## nil", "nil")
            .vars("a: atom")
            .sync()
            .about("omega iteration of a step synchronised with nil"),
        Law::new("L-atomic-iteration-nil-inf", "a^inf ## nil", "top")
            .vars("a: atom")
            .sync()
            .about("infinite iteration of a step synchronised with nil"),
        Law::new("L-atomic-iteration-power", "a^i; c ## b^i; d", "(a ## b)^i; (c ## d)")
            .vars("a b: atom; c d: cmd; i: nat")
            .sync()
            .about("equal powers of steps synchronise stepwise"),
        Law::new("C-atomic-iteration-power", "a^i ## b^i", "(a ## b)^i")
            .vars("a b: atom; i: nat")
            .sync()
            .about("equal powers of steps synchronise to a power"),
        Law::new(
            "L-atomic-iteration-finite",
            "a^*; c ## b^*; d",
            "(a ## b)^*; ((c ## b^*; d) \\/ (a^*; c ## d))",
        )
        .vars("a b: atom; c d: cmd")
        .sync()
        .about("finite iterations of steps synchronise until one side moves on"),
        Law::new(
            "C-atomic-iteration-finite",
            "a^*; c ## b^*; d",
            "(a ## b)^*; ((c ## d) \\/ (c ## b; b^*; d) \\/ (a; a^*; c ## d))",
        )
        .vars("a b: atom; c d: cmd")
        .sync()
        .about("unfolded form of the finite iteration synchronisation"),
        Law::new("L-atomic-finite-sync", "a^* ## b^*", "(a ## b)^*")
            .vars("a b: atom")
            .sync()
            .about("finite iterations of steps synchronise to a finite iteration"),
        Law::new("L-atomic-iteration-finite-infinite", "a^*; c ## b^inf", "(a ## b)^*; (c ## b^inf)")
            .vars("a b: atom; c: cmd")
            .sync()
            .about("a finite iteration against an infinite one"),
        Law::new(
            "L-atomic-iteration-finite-omega",
            "a^*; c ## b^w; d",
            "(a ## b)^*; ((c ## b^w; d) \\/ (a^*; c ## d))",
        )
        .vars("a b: atom; c d: cmd")
        .sync()
        .about("a finite iteration against an omega iteration"),
        Law::new(
            "L-atomic-iteration-either",
            "a^w; c ## b^w; d",
            "(a ## b)^w; ((c ## b^w; d) \\/ (a^w; c ## d))",
        )
        .vars("a b: atom; c d: cmd")
        .sync()
        .about("omega iterations of steps synchronise until one side moves on"),
        Law::new(
            "C-atomic-iteration-either",
            "a^w; c ## b^w; d",
            "(a ## b)^w; ((c ## d) \\/ (c ## b; b^w; d) \\/ (a; a^w; c ## d))",
        )
        .vars("a b: atom; c d: cmd")
        .sync()
        .about("unfolded form of the omega iteration synchronisation"),
        Law::new("L-atomic-either-sync", "a^w ## b^w", "(a ## b)^w")
            .vars("a b: atom")
            .sync()
            .about("omega iterations of steps synchronise to an omega iteration"),
        Law::new(
            "L-iterations-with-abort",
            "(a0 \\/ a1; bot)^w ## b^w",
            "(a0 ## b)^w; (nil \\/ (a1 ## b); bot)",
        )
        .vars("a0 a1 b: atom")
        .modes(&[Mode::Par, Mode::Weak])
        .about("an iteration that may abort against an omega iteration, for abort-strict modes"),
        Law::new(
            "L-atomic-iter-prefix-sync-nil",
            "a^w ## b^w; b1; c",
            "(a ## b)^w; (a ## b1); (a^w ## c)",
        )
        .vars("a b b1: atom; c: cmd")
        .sync()
        .about("an omega iteration against an iteration followed by a step"),
        Law::new(
            "L-atomic-iter-prefix-sync-atomic",
            "a^w; a1; c ## b^w; b1; d",
            "(a ## b)^w; ((a1 ## b1); (c ## d) \\/ (a1 ## b); (c ## b^w; b1; d) \\/ (a ## b1); (a^w; a1; c ## d))",
        )
        .vars("a a1 b b1: atom; c d: cmd")
        .sync()
        .about("two iterations each followed by a step"),
    ]
    .into()
}

fn conjunction_parallel() -> Vec<Law> {
    [
        Law::new("A-together-idempotent", "c && c", "c")
            .vars("c: cmd")
            .about("weak conjunction is idempotent"),
        Law::new("A-parallel-abort", "c || bot", "bot")
            .vars("c: cmd")
            .about("parallel composition is abort-strict"),
        Law::new("A-together-abort", "c && bot", "bot")
            .vars("c: cmd")
            .about("weak conjunction is abort-strict"),
        Law::new(
            "conjunction-interchange-parallel",
            "(c0 || d0) && (c1 || d1)",
            "(c0 && c1) || (d0 && d1)",
        )
        .refines()
        .vars("c0 c1 d0 d1: cmd")
        .about("weak conjunction interchanges with parallel composition"),
        Law::new("weakconj-refined-by-conj", "c && d", "c /\\ d")
            .refines()
            .vars("c d: cmd")
            .about("conjunction refines weak conjunction"),
        Law::new("A-weakconj-nonfail", "c && d", "c /\\ d")
            .vars("c d: cmd")
            .premise("chaos", "c")
            .premise("chaos", "d")
            .about("weak conjunction of commands that never abort is conjunction"),
        Law::new("A-together-atomic", "a && b", "a /\\ b")
            .vars("a b: atom")
            .about("weak conjunction of steps is conjunction"),
        Law::new("eqn-a-atomid", "a || eps", "a")
            .vars("a: atom")
            .about("the environment step is the atomic identity of parallel"),
        Law::new(
            "L-assume-iter-conj-assume-iter",
            "assume(a)^w && assume(b)^w",
            "assume(a /\\ b)^w",
        )
        .vars("a b: atom")
        .about("weak conjunction of iterated assumptions"),
        Law::new(
            "L-assump-help1",
            "a^w && b^w; !b; bot",
            "(a /\\ b)^w; (a /\\ !b); bot",
        )
        .vars("a b: atom")
        .about("an iteration against an iteration that then fails its step"),
        Law::new(
            "L-assump-help2",
            "a^w; !a; bot && b^w; !b; bot",
            "(a /\\ b)^w; ((!a /\\ !b) \\/ (!a /\\ b) \\/ (a /\\ !b)); bot",
        )
        .vars("a b: atom")
        .about("two iterations that each end in a failed step"),
        Law::new(
            "L-helper2",
            "(!a && b) \\/ (a && !b) \\/ (!a && !b)",
            "!(a && b)",
        )
        .vars("a b: atom")
        .about("complement of a weak conjunction of steps"),
        Law::new(
            "L-assump-help3",
            "(a /\\ !b) \\/ (!a /\\ b) \\/ (!a /\\ !b)",
            "!(a /\\ b)",
        )
        .vars("a b: atom")
        .about("complement of a conjunction of steps"),
    ]
    .into()
}

fn program_environment() -> Vec<Law> {
    [
        Law::new("A-pibot-ebot", "pistep", "!eps")
            .about("program steps complement environment steps"),
        Law::new("anegate-pibot", "!pistep", "eps")
            .about("environment steps complement program steps"),
        Law::new("join-pibot-ebot", "pgm(r) /\\ env(s)", "top")
            .vars("r s: rel")
            .about("program and environment steps are disjoint"),
        Law::new("choice-pi-env", "pgm(r) \\/ env(s)", "b")
            .vars("r s: rel; b: atom")
            .compute("b", |_, e| {
                Some(Value::Atom(AtomicDesc::new(bits(e, "r"), bits(e, "s"))))
            })
            .about("a choice of program and environment steps is a step"),
        Law::new("negate_e_inf_e", "!env(r) \\/ env(r)", "alpha")
            .vars("r: rel")
            .about("an environment step and its complement cover all steps"),
        Law::new("pi-inf-pi", "pgm(r | s)", "pgm(r) \\/ pgm(s)")
            .vars("r s: rel")
            .about("program steps of a union are a choice"),
        Law::new("pi-sup-pi", "pgm(r & s)", "pgm(r) /\\ pgm(s)")
            .vars("r s: rel")
            .about("program steps of an intersection are a conjunction"),
        Law::new("pstep-bot", "pgm(none)", "top").about("no program step is top"),
        Law::new("pstep-top", "pgm(all)", "pistep").about("every program step"),
        Law::new("pstep-iso", "pgm(s)", "pgm(r)")
            .iff_fn("r is a subset of s", |_, e| {
                subset(bits(e, "r"), bits(e, "s"))
            })
            .vars("r s: rel")
            .about("program step refinement reverses inclusion"),
        Law::new("e-inf-e", "env(r | s)", "env(r) \\/ env(s)")
            .vars("r s: rel")
            .about("environment steps of a union are a choice"),
        Law::new("e-sup-e", "env(r & s)", "env(r) /\\ env(s)")
            .vars("r s: rel")
            .about("environment steps of an intersection are a conjunction"),
        Law::new("estep-bot", "env(none)", "top").about("no environment step is top"),
        Law::new("estep-top", "env(all)", "eps").about("every environment step"),
        Law::new("estep-iso", "env(s)", "env(r)")
            .iff_fn("r is a subset of s", |_, e| {
                subset(bits(e, "r"), bits(e, "s"))
            })
            .vars("r s: rel")
            .about("environment step refinement reverses inclusion"),
        Law::new("cstepd-pibot", "alpha", "pistep")
            .refines()
            .about("any program step refines any step"),
        Law::new("cstepd-ebot", "alpha", "eps")
            .refines()
            .about("any environment step refines any step"),
        Law::new("def-skip", "skip", "eps^w").about("skip only lets the environment move"),
        Law::new("def-chaos", "chaos", "alpha^w").about("chaos takes any steps"),
        Law::new("def-term", "term", "alpha^*; eps^w")
            .about("term takes finitely many steps of its own"),
    ]
    .into()
}

fn spec_term(u: &Universe, q: Bits) -> Term {
    let n = u.n_states();
    u.choice(u.states_in(u.full_states()).map(|s| {
        let post = (0..n)
            .filter(|&t| q & bit(u.pair(s, t)) != 0)
            .fold(0, |a, t| a | bit(t));
        u.seq_all([u.test(bit(s)), Term::term_cmd(), u.test(post)])
    }))
}

fn rely_guarantee() -> Vec<Law> {
    [
        Law::new("defn-spost", "spec(q)", "x")
            .vars("q: pairs; x: cmd")
            .compute("x", |u, e| Some(Value::Cmd(spec_term(u, bits(e, "q")))))
            .about("a specification chooses an initial state, terminates and ends in q"),
        Law::new("L-specification-terminates", "spec(q) && term", "spec(q)")
            .vars("q: pairs")
            .exhaustive()
            .about("a specification is unaffected by weak conjunction with term"),
        Law::new(
            "L-specification-terminates-par",
            "spec(q) || term",
            "spec(q)",
        )
        .vars("q: pairs")
        .exhaustive()
        .scope(Scope::Interleave)
        .about("a specification is unaffected by parallel term"),
        Law::new(
            "L-specIdem",
            "test(p); term; test(p2) && term",
            "test(p); term; test(p2)",
        )
        .vars("p p2: test")
        .about("pre and post tested termination absorbs weak conjunction with term"),
        Law::new(
            "L-specIdem-par",
            "test(p); term; test(p2) || term",
            "test(p); term; test(p2)",
        )
        .vars("p p2: test")
        .scope(Scope::Interleave)
        .about("pre and post tested termination absorbs parallel term"),
        Law::new("term-parallel-term", "term || term", "term")
            .scope(Scope::Interleave)
            .about("term in parallel with term"),
        Law::new("eqn-def-guarantee", "guar(g)", "(pgm(g) \\/ eps)^w")
            .vars("g: rel")
            .about("a guarantee iterates a guarded step"),
        Law::new("def-rely", "rely(r)", "(assume(pistep \\/ env(r)))^w")
            .vars("r: rel")
            .about("a rely iterates an assumption on environment steps"),
        Law::new("L-strengthen-guarantee", "guar(g2)", "guar(g1)")
            .refines()
            .vars("g1 g2: rel")
            .when("g1 is a subset of g2", |_, e| {
                subset(bits(e, "g1"), bits(e, "g2"))
            })
            .about("strengthening a guarantee is a refinement"),
        Law::new(
            "L-strengthen-guarantee-step",
            "pgm(g2) \\/ eps",
            "pgm(g1) \\/ eps",
        )
        .refines()
        .vars("g1 g2: rel")
        .when("g1 is a subset of g2", |_, e| {
            subset(bits(e, "g1"), bits(e, "g2"))
        })
        .about("strengthening a guarded step is a refinement"),
        Law::new(
            "L-combine-restrict",
            "(pgm(g1) \\/ eps) && (pgm(g2) \\/ eps)",
            "pgm(g1 & g2) \\/ eps",
        )
        .vars("g1 g2: rel")
        .about("guarded steps combine by intersection"),
        Law::new(
            "L-combine-guarantees",
            "guar(g1) && guar(g2)",
            "guar(g1 & g2)",
        )
        .vars("g1 g2: rel")
        .exhaustive()
        .about("guarantees combine by intersection"),
        Law::new(
            "eqn-guar-dist",
            "guar(g) && c; d",
            "(guar(g) && c); (guar(g) && d)",
        )
        .vars("g: rel; a b: atom; c d: cmd")
        .hint(
            "c",
            &[
                "a",
                "a; b",
                "a^w",
                "a^*",
                "a \\/ b; a",
                "a^w; b",
                "nil",
                "a^inf",
            ],
        )
        .hint("d", &["b", "b; a", "b^w", "a \\/ b", "nil", "b^*; a"])
        .about("a guarantee distributes over sequencing of step-built commands"),
        Law::new("L-weaken-rely", "rely(r0)", "rely(r1)")
            .refines()
            .vars("r0 r1: rel")
            .when("r0 is a subset of r1", |_, e| {
                subset(bits(e, "r0"), bits(e, "r1"))
            })
            .about("weakening a rely is a refinement"),
        Law::new("L-combine-relies", "rely(r1) && rely(r2)", "rely(r1 & r2)")
            .vars("r1 r2: rel")
            .exhaustive()
            .about("relies combine by intersection"),
        Law::new(
            "L-conjoin-postcondition",
            "spec(q0 & q1)",
            "spec(q0) && spec(q1)",
        )
        .vars("q0 q1: pairs")
        .exhaustive()
        .about("postconditions conjoin"),
    ]
    .into()
}

fn shared_memory() -> Vec<Law> {
    [
        Law::new("pi-domain-restrict", "test(p); pgm(r)", "pgm(p <| r)")
            .vars("p: test; r: rel")
            .scope(Scope::Relational)
            .about("a test before a program step restricts its domain"),
        Law::new("pi-range-restrict", "pgm(r |> p); test(p)", "pgm(r |> p)")
            .vars("p: test; r: rel")
            .scope(Scope::Relational)
            .about("a test after a range-restricted program step is redundant"),
        Law::new("env-domain-restrict", "test(p); env(r)", "env(p <| r)")
            .vars("p: test; r: rel")
            .scope(Scope::Relational)
            .about("a test before an environment step restricts its domain"),
        Law::new("env-range-restrict", "env(r |> p); test(p)", "env(r |> p)")
            .vars("p: test; r: rel")
            .scope(Scope::Relational)
            .about("a test after a range-restricted environment step is redundant"),
        Law::new("eqn-aczel-pe", "pgm(r1) || env(r2)", "pgm(r1 & r2)")
            .vars("r1 r2: rel")
            .scope(Scope::Interleave)
            .about("a program step synchronises with a matching environment step"),
        Law::new("eqn-aczel-ee", "env(r1) || env(r2)", "env(r1 & r2)")
            .vars("r1 r2: rel")
            .scope(Scope::Interleave)
            .about("environment steps synchronise with each other"),
        Law::new("eqn-aczel-pp", "pgm(r1) || pgm(r2)", "top")
            .vars("r1 r2: rel")
            .scope(Scope::Interleave)
            .about("program steps never synchronise in shared memory"),
        Law::new("L-rely-guar", "rely(r)", "rely(r) || guar(r)")
            .vars("r: rel")
            .exhaustive()
            .scope(Scope::Interleave)
            .about("a rely admits a parallel process that guarantees it"),
        Law::new(
            "L-parallel-guarantee",
            "rely(r) && c",
            "(rely(r | r1) && c) || (guar(r | r1) && term)",
        )
        .refines()
        .vars("r r1: rel; q: pairs; p p2: test; c: cmd")
        .hint("c", &["spec(q)", "test(p); term; test(p2)", "term"])
        .premise("c || term", "c")
        .premise("c", "c || term")
        .scope(Scope::Relational)
        .about("introduce a terminating parallel process under a guarantee"),
        Law::new(
            "L-introduce-parallel",
            "rely(r) && (c && d)",
            "(rely(r | r0) && guar(r1) && c) || (rely(r | r1) && guar(r0) && d)",
        )
        .refines()
        .vars("r r0 r1: rel; q0 q1: pairs; c d: cmd")
        .hint("c", &["spec(q0)", "term"])
        .hint("d", &["spec(q1)", "term"])
        .scope(Scope::Relational)
        .about("split a command under a rely into two parallel processes"),
        Law::new(
            "L-introduce-parallel-rspec",
            "rely(r) && spec(q0 & q1)",
            "(rely(r | r0) && guar(r1) && spec(q0)) || (rely(r | r1) && guar(r0) && spec(q1))",
        )
        .refines()
        .vars("r r0 r1: rel; q0 q1: pairs")
        .scope(Scope::Relational)
        .about("split a conjoined specification into two parallel processes"),
    ]
    .into()
}

fn process_algebra() -> Vec<Law> {
    [
        Law::new("eqn-defn-atomic", "atev(e)", "eps^w; pgm(e); eps^w")
            .vars("e: event")
            .scope(Scope::Events)
            .about("an event is one program step between environment steps"),
        Law::new(
            "L-atomic-interleaving",
            "atev(e) || atev(f)",
            "atev(g) \\/ atev(e); atev(f) \\/ atev(f); atev(e)",
        )
        .vars("e f g: event")
        .compute("g", sync_event)
        .scope(Scope::Events)
        .exhaustive()
        .about("two synchronisable events synchronise or interleave"),
        Law::new(
            "L-prefixed-interleaving",
            "atev(e); c || atev(f); d",
            "atev(g); (c || d) \\/ atev(e); (c || atev(f); d) \\/ atev(f); (atev(e); c || d)",
        )
        .vars("e f g: event; c d: proc")
        .compute("g", sync_event)
        .premise("skip; c", "c")
        .premise("c", "skip; c")
        .premise("skip; d", "d")
        .premise("d", "skip; d")
        .scope(Scope::Events)
        .about("prefixed processes synchronise or interleave on their first events"),
        Law::new("rename-nil", "rename[phi](nil)", "nil")
            .vars("phi: ren")
            .scope(Scope::Events)
            .about("renaming fixes nil"),
        Law::new(
            "eqn-dist-rename-choice",
            "rename[phi](c \\/ d)",
            "rename[phi](c) \\/ rename[phi](d)",
        )
        .vars("phi: ren; c d: cmd")
        .scope(Scope::Events)
        .about("renaming distributes over choice"),
        Law::new(
            "rename-seq",
            "rename[phi](c; d)",
            "rename[phi](c); rename[phi](d)",
        )
        .vars("phi: ren; c d: cmd")
        .scope(Scope::Events)
        .about("renaming distributes over sequencing"),
        Law::new("rename-atomic", "rename[phi](a)", "b")
            .vars("phi: ren; a b: atom")
            .compute("b", |_, e| match (e.get("phi"), e.get("a")) {
                (Some(Value::Ren(r)), Some(Value::Atom(a))) => Some(Value::Atom(r.apply_atom(*a))),
                _ => None,
            })
            .scope(Scope::Events)
            .about("renaming a step applies the map"),
        Law::new("eqn-ccs-pp", "pgm(e) || pgm(f)", "pgm(iota)")
            .vars("e f: event")
            .compute("f", |u, e| {
                u.complement_of(event(e, "e"))
                    .map(|c| Value::Events(bit(c)))
            })
            .scope(Scope::Ccs)
            .exhaustive()
            .about("complementary program steps synchronise to a silent step"),
        Law::new(
            "eqn-ccs-atev-sync",
            "atev(e) || atev(f)",
            "atev(iota) \\/ atev(e); atev(f) \\/ atev(f); atev(e)",
        )
        .vars("e f: event")
        .compute("f", |u, e| {
            u.complement_of(event(e, "e"))
                .map(|c| Value::Events(bit(c)))
        })
        .scope(Scope::Ccs)
        .exhaustive()
        .about("complementary events synchronise silently or interleave"),
        Law::new("eqn-ccs-res", "restrict[E](c)", "c && guar(!E)")
            .vars("E: events; c: cmd")
            .scope(Scope::Events)
            .about("restriction forbids program steps on the given events"),
        Law::new("L-atomic-restriction", "atev(e) && guar(E)", "atev(e)")
            .vars("e: event; E: events")
            .when("e is in E", |_, env| bits(env, "e") & bits(env, "E") != 0)
            .scope(Scope::Events)
            .exhaustive()
            .about("an allowed event passes a guarantee"),
        Law::new(
            "L-atomic-restriction-out",
            "atev(f) && guar(E)",
            "skip; top",
        )
        .vars("f: event; E: events")
        .when("f is not in E", |_, env| {
            bits(env, "f") & bits(env, "E") == 0
        })
        .scope(Scope::Events)
        .exhaustive()
        .about("a forbidden event stops under a guarantee"),
        Law::new("eqn-omsidtop-elim", "atev(e) \\/ skip; top", "atev(e)")
            .vars("e: event")
            .scope(Scope::Events)
            .about("a stopped process is absorbed by an event"),
        Law::new(
            "L-ccs-synchronise",
            "restrict[e | f](atev(e) || atev(f))",
            "atev(iota)",
        )
        .vars("e f: event")
        .compute("f", |u, e| {
            u.complement_of(event(e, "e"))
                .map(|c| Value::Events(bit(c)))
        })
        .scope(Scope::Ccs)
        .exhaustive()
        .about("restricted complementary events can only synchronise"),
        Law::new("eqn-csp-pp", "pgm(e) || pgm(e)", "pgm(h)")
            .vars("e h: event")
            .compute("h", |u, e| {
                u.tag_of(event(e, "e")).map(|t| Value::Events(bit(t)))
            })
            .scope(Scope::Csp)
            .exhaustive()
            .about("equal program steps synchronise to a tagged step"),
        Law::new(
            "eqn-csp-atev-sync",
            "atev(e) || atev(e)",
            "atev(h) \\/ atev(e); atev(e)",
        )
        .vars("e h: event")
        .compute("h", |u, e| {
            u.tag_of(event(e, "e")).map(|t| Value::Events(bit(t)))
        })
        .scope(Scope::Csp)
        .exhaustive()
        .about("equal events synchronise or interleave"),
        Law::new(
            "eqn-csp-pl-defn",
            "parcsp[E](c, d)",
            "rename[phi]((c || d) && guar(A))",
        )
        .vars("E A: events; c d: proc; phi: ren")
        .compute("A", |u, e| {
            let es = bits(e, "E") & !bit(SILENT);
            Some(Value::Events(u.tagged(es) | (u.untagged_events() & !es)))
        })
        .compute("phi", |u, e| {
            Some(Value::Ren(Arc::new(u.phi_hat(bits(e, "E") & !bit(SILENT)))))
        })
        .scope(Scope::Csp)
        .about("CSP parallel synchronises on E and interleaves elsewhere"),
        Law::new("L-atomic-sync", "parcsp[e](atev(e), atev(e))", "atev(e)")
            .vars("e: event")
            .when("e is a base event", |u, env| base_event(u, event(env, "e")))
            .scope(Scope::Csp)
            .exhaustive()
            .about("an event synchronised on itself"),
        Law::new(
            "eqn-csp-synchronise",
            "parcsp[e](atev(e); c, atev(e); d)",
            "atev(e); parcsp[e](c, d)",
        )
        .vars("e: event; c d: proc")
        .when("e is a base event", |u, env| base_event(u, event(env, "e")))
        .scope(Scope::Csp)
        .exhaustive()
        .about("processes prefixed by a synchronised event"),
        Law::new(
            "eqn-csp-interleave",
            "parcsp[e](atev(e); c, atev(f); d)",
            "atev(f); parcsp[e](atev(e); c, d)",
        )
        .vars("e f: event; c d: proc")
        .when("e and f are distinct base events", |u, env| {
            let (e, f) = (event(env, "e"), event(env, "f"));
            e != f && base_event(u, e) && base_event(u, f)
        })
        .scope(Scope::Csp)
        .exhaustive()
        .about("a process prefixed by an unsynchronised event moves first"),
        Law::new("hide-defn", "hide[E](c)", "rename[phi](c)")
            .vars("E: events; c: cmd; phi: ren")
            .compute("phi", |u, e| {
                Some(Value::Ren(Arc::new(u.hiding(bits(e, "E")))))
            })
            .scope(Scope::Events)
            .about("hiding renames events to the silent event"),
        Law::new(
            "hide-csp-synchronise",
            "hide[e](parcsp[e](atev(e); c, atev(e); d))",
            "atev(iota); hide[e](parcsp[e](c, d))",
        )
        .vars("e: event; c d: proc")
        .when("e is a base event", |u, env| base_event(u, event(env, "e")))
        .scope(Scope::Csp)
        .exhaustive()
        .about("a hidden synchronised event becomes a silent step"),
        Law::new("eqn-interp-csps", "pgm(t1) || pgm(t2)", "pgm(h)")
            .vars("t1 t2 h: rel")
            .when(
                "both label sets avoid silent and tagged events",
                |u, env| {
                    let allowed = u.lift_events(u.untagged_events() & !bit(SILENT));
                    subset(bits(env, "t1"), allowed) && subset(bits(env, "t2"), allowed)
                },
            )
            .compute("h", |u, e| {
                let both = bits(e, "t1") & bits(e, "t2");
                let tagged = iter_bits(both).fold(0, |acc, l| {
                    let ev = u.label_event(l);
                    match u.tag_of(ev) {
                        Some(t) => acc | bit(u.label(u.label_pre(l), t, u.label_post(l))),
                        None => acc,
                    }
                });
                Some(Value::Labels(tagged))
            })
            .scope(Scope::Csp)
            .about("program steps synchronise exactly on common events, tagged"),
    ]
    .into()
}

/// The complete catalog, negative entries included.
pub fn catalog() -> Vec<Law> {
    let mut v = Vec::new();
    v.extend(sequential());
    v.extend(iteration());
    v.extend(tests_and_steps());
    v.extend(sync_axioms());
    v.extend(atomic_iteration());
    v.extend(conjunction_parallel());
    v.extend(program_environment());
    v.extend(rely_guarantee());
    v.extend(shared_memory());
    v.extend(process_algebra());
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::{free_idents, uses_mode, LawKind};
    use alloc::string::String;

    #[test]
    fn names_are_unique() {
        let c = catalog();
        for (i, l) in c.iter().enumerate() {
            assert!(
                c[..i].iter().all(|m| m.name != l.name),
                "duplicate {}",
                l.name
            );
        }
    }

    #[test]
    fn every_variable_is_declared() {
        let names = ["iota", "all", "none", "id"];
        for l in catalog() {
            let mut ids: Vec<String> = Vec::new();
            free_idents(&l.lhs, &mut ids);
            free_idents(&l.rhs, &mut ids);
            if let LawKind::Equivalence(a, b) = &l.kind {
                free_idents(a, &mut ids);
                free_idents(b, &mut ids);
            }
            for (_, hs) in &l.hints {
                for h in hs {
                    free_idents(h, &mut ids);
                }
            }
            for v in ids {
                assert!(
                    l.sort_of(&v).is_some() || names.contains(&v.as_str()),
                    "{}: `{v}` undeclared",
                    l.name
                );
            }
            let m = uses_mode(&l.lhs) || uses_mode(&l.rhs);
            assert_eq!(m, !l.modes.is_empty(), "{}: mode declaration", l.name);
            assert!(!l.about.is_empty(), "{} lacks a description", l.name);
        }
    }
}
