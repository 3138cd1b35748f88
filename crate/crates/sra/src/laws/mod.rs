//! Law catalog, instance sampling, bounded law checking and rewriting.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use crate::decide::{equal_bounded, refines_bounded, render_observation, Bounds, Verdict, Witness};
use crate::kernel::Term;
use crate::stepalg::{LabelKind, ParStyle, Universe};
use crate::syntax::{parse_expr, Env, Expr, Mode, Printer, Resolver, SetExpr, Value};

mod catalog;
mod rewrite;
mod sample;

pub use catalog::catalog;
pub use rewrite::{
    parse_script, replay_derivation, rewrite_step, Direction, Path, ReplayReport, RewriteError,
    Script, Step, StepReport,
};
pub use sample::{random_atom, random_term, Domains, Rng};

/// Sort of a law metavariable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sort {
    Cmd,
    /// Event-based process built from `atev`, prefixing and choice.
    Proc,
    Atom,
    Test,
    /// Step labels: a lifted relation or event set.
    Rel,
    /// A relation on states as a set of pairs.
    Pairs,
    Events,
    Event,
    Nat,
    Ren,
}

impl Sort {
    fn parse(s: &str) -> Option<Sort> {
        Some(match s {
            "cmd" => Sort::Cmd,
            "proc" => Sort::Proc,
            "atom" => Sort::Atom,
            "test" => Sort::Test,
            "rel" => Sort::Rel,
            "pairs" => Sort::Pairs,
            "events" => Sort::Events,
            "event" => Sort::Event,
            "nat" => Sort::Nat,
            "ren" => Sort::Ren,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug)]
pub enum LawKind {
    Equality,
    /// `lhs ⊑ rhs`: every behaviour of `rhs` is one of `lhs`.
    Refinement,
    /// `(lhs ⊑ rhs) ⟺ (l2 ⊑ r2)`.
    Equivalence(Expr, Expr),
    /// `(lhs ⊑ rhs) ⟺ f(env)`.
    IffFn(&'static str, CondFn),
}

/// Which universes a law is stated for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scope {
    Any,
    Relational,
    /// Universes whose program steps never synchronise.
    Interleave,
    Events,
    Ccs,
    Csp,
}

impl Scope {
    pub fn applies(self, u: &Universe) -> bool {
        match self {
            Scope::Any => true,
            Scope::Relational => u.kind() == LabelKind::Relational,
            Scope::Interleave => u.style() == ParStyle::Interleave,
            Scope::Events => u.kind() == LabelKind::Event,
            Scope::Ccs => u.style() == ParStyle::Ccs,
            Scope::Csp => u.style() == ParStyle::Csp,
        }
    }
}

pub type CondFn = fn(&Universe, &Env) -> bool;
pub type ComputeFn = fn(&Universe, &Env) -> Option<Value>;

#[derive(Clone, Debug)]
pub enum Cond {
    /// Bounded semantic premise `lhs ⊑ rhs`.
    Refines(Expr, Expr),
    Holds(&'static str, CondFn),
}

#[derive(Clone, Debug)]
pub struct Law {
    pub name: &'static str,
    /// One-line statement of what the law says.
    pub about: &'static str,
    pub lhs: Expr,
    pub rhs: Expr,
    pub kind: LawKind,
    pub vars: Vec<(String, Sort)>,
    pub modes: Vec<Mode>,
    pub conds: Vec<Cond>,
    pub computed: Vec<(String, ComputeFn)>,
    /// Candidate values for a variable, as expressions over the others.
    pub hints: Vec<(String, Vec<Expr>)>,
    pub scope: Scope,
    /// A non-law: checking must find a counterexample.
    pub negative: bool,
    /// Enumerate every instance regardless of the sample budget.
    pub exhaustive: bool,
}

impl Law {
    pub fn new(name: &'static str, lhs: &str, rhs: &str) -> Law {
        let p = |s: &str| parse_expr(s).unwrap_or_else(|e| panic!("law {name}: {e}: {s}"));
        Law {
            name,
            about: "",
            lhs: p(lhs),
            rhs: p(rhs),
            kind: LawKind::Equality,
            vars: Vec::new(),
            modes: Vec::new(),
            conds: Vec::new(),
            computed: Vec::new(),
            hints: Vec::new(),
            scope: Scope::Any,
            negative: false,
            exhaustive: false,
        }
    }

    /// Declare variables, e.g. `"c d: cmd; a: atom"`.
    pub fn vars(mut self, decl: &str) -> Law {
        for group in decl.split(';') {
            let (names, sort) = group
                .split_once(':')
                .unwrap_or_else(|| panic!("law {}: bad declaration `{group}`", self.name));
            let sort = Sort::parse(sort.trim())
                .unwrap_or_else(|| panic!("law {}: unknown sort `{sort}`", self.name));
            for n in names.split_whitespace() {
                self.vars.push((n.to_string(), sort));
            }
        }
        self
    }

    pub fn about(mut self, s: &'static str) -> Law {
        self.about = s;
        self
    }
    pub fn refines(mut self) -> Law {
        self.kind = LawKind::Refinement;
        self
    }
    pub fn iff(mut self, l2: &str, r2: &str) -> Law {
        let p = |s: &str| parse_expr(s).unwrap_or_else(|e| panic!("law {}: {e}", self.name));
        self.kind = LawKind::Equivalence(p(l2), p(r2));
        self
    }
    pub fn iff_fn(mut self, what: &'static str, f: CondFn) -> Law {
        self.kind = LawKind::IffFn(what, f);
        self
    }
    /// Applies to all three synchronisation modes.
    pub fn sync(self) -> Law {
        self.modes(&Mode::ALL)
    }
    pub fn modes(mut self, m: &[Mode]) -> Law {
        self.modes = m.to_vec();
        self
    }
    pub fn premise(mut self, l: &str, r: &str) -> Law {
        let p = |s: &str| parse_expr(s).unwrap_or_else(|e| panic!("law {}: {e}", self.name));
        self.conds.push(Cond::Refines(p(l), p(r)));
        self
    }
    pub fn when(mut self, what: &'static str, f: CondFn) -> Law {
        self.conds.push(Cond::Holds(what, f));
        self
    }
    pub fn compute(mut self, v: &str, f: ComputeFn) -> Law {
        self.computed.push((v.to_string(), f));
        self
    }
    pub fn hint(mut self, v: &str, exprs: &[&str]) -> Law {
        let es = exprs
            .iter()
            .map(|s| parse_expr(s).unwrap_or_else(|e| panic!("law {}: {e}", self.name)))
            .collect();
        self.hints.push((v.to_string(), es));
        self
    }
    pub fn scope(mut self, s: Scope) -> Law {
        self.scope = s;
        self
    }
    pub fn negative(mut self) -> Law {
        self.negative = true;
        self
    }
    pub fn exhaustive(mut self) -> Law {
        self.exhaustive = true;
        self
    }

    pub fn sort_of(&self, v: &str) -> Option<Sort> {
        self.vars.iter().find(|(n, _)| n == v).map(|(_, s)| *s)
    }

    /// Statement in the concrete syntax.
    pub fn statement(&self) -> String {
        let rel = match self.kind {
            LawKind::Refinement => "[=",
            _ => "=",
        };
        let mut s = format!("{} {rel} {}", self.lhs, self.rhs);
        if let LawKind::Equivalence(l2, r2) = &self.kind {
            s = format!("{} [= {}  iff  {l2} [= {r2}", self.lhs, self.rhs);
        }
        if let LawKind::IffFn(what, _) = &self.kind {
            s = format!("{} [= {}  iff  {what}", self.lhs, self.rhs);
        }
        s
    }
}

/// Find a catalog entry by name.
pub fn law_by_name<'a>(laws: &'a [Law], name: &str) -> Option<&'a Law> {
    laws.iter().find(|l| l.name == name)
}

/// Glob match with `*` and `?`.
pub fn glob_match(pat: &str, s: &str) -> bool {
    let (p, t): (Vec<char>, Vec<char>) = (pat.chars().collect(), s.chars().collect());
    let (mut pi, mut ti, mut star, mut mark) = (0, 0, None, 0);
    while ti < t.len() {
        if pi < p.len() && (p[pi] == '?' || p[pi] == t[ti]) {
            pi += 1;
            ti += 1;
        } else if pi < p.len() && p[pi] == '*' {
            star = Some(pi);
            mark = ti;
            pi += 1;
        } else if let Some(sp) = star {
            pi = sp + 1;
            mark += 1;
            ti = mark;
        } else {
            return false;
        }
    }
    p[pi..].iter().all(|&c| c == '*')
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckConfig {
    pub bounds: Bounds,
    /// Instance budget per synchronisation mode.
    pub samples: usize,
    pub seed: u64,
    /// Enumerate all instances over the finite sorts.
    pub exhaustive: bool,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            bounds: Bounds::default(),
            samples: 24,
            seed: 0x5eed,
            exhaustive: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Counterexample {
    pub env: Env,
    pub lhs: Term,
    pub rhs: Term,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug)]
pub enum Outcome {
    /// No instance fails.
    Pass,
    Fail(Counterexample),
    Exhausted(String),
    Error(String),
}

#[derive(Clone, Debug)]
pub struct LawReport {
    pub name: &'static str,
    pub instances: usize,
    pub negative: bool,
    pub outcome: Outcome,
}

impl LawReport {
    /// Whether the result is the expected one: no counterexample for a law,
    /// a counterexample for a non-law.
    pub fn ok(&self) -> bool {
        match self.outcome {
            Outcome::Pass => !self.negative,
            Outcome::Fail(_) => self.negative,
            _ => false,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "LAW {} {} ({} instances)",
            self.name,
            if self.ok() { "PASS" } else { "FAIL" },
            self.instances
        )
    }
}

/// Render bindings as `x=value, ...`.
pub fn render_env(u: &Universe, env: &Env) -> String {
    let pr = Printer::new(u);
    let mut out = String::new();
    for (k, v) in env {
        if k == "##" {
            continue;
        }
        if !out.is_empty() {
            out.push_str(", ");
        }
        let s = match v {
            Value::Cmd(t) => pr.print(t),
            Value::Atom(a) => pr.print(&Term::atom(*a)),
            Value::Pred(p) => pr.pred(*p),
            Value::Labels(l) => pr.labels(*l),
            Value::Pairs(r) => pr.pairs(*r),
            Value::Events(e) => pr.events(*e),
            Value::Nat(n) => format!("{n}"),
            Value::Mode(m) => m.name().to_string(),
            Value::Ren(r) => r.name.clone(),
        };
        let _ = write!(out, "{k}={s}");
    }
    if let Some(Value::Mode(m)) = env.get("##") {
        let _ = write!(
            out,
            "{}##={}",
            if out.is_empty() { "" } else { ", " },
            m.name()
        );
    }
    out
}

/// Render a counterexample over several lines.
pub fn render_counterexample(u: &Universe, cx: &Counterexample) -> String {
    let pr = Printer::new(u);
    let mut s = format!(
        "  with {}\n  lhs = {}\n  rhs = {}",
        render_env(u, &cx.env),
        pr.print(&cx.lhs),
        pr.print(&cx.rhs)
    );
    if let Some(w) = &cx.witness {
        let side = match w.member_of {
            crate::decide::Side::Left => "lhs",
            crate::decide::Side::Right => "rhs",
        };
        let _ = write!(
            s,
            "\n  witness (only in {side}): {}",
            render_observation(u, &w.observation)
        );
    }
    s
}

fn cond_holds(u: &Universe, c: &Cond, env: &Env, b: Bounds) -> Result<bool, String> {
    match c {
        Cond::Holds(_, f) => Ok(f(u, env)),
        Cond::Refines(l, r) => {
            let res = Resolver::new(u);
            let l = res.term(l, env).map_err(|e| e.to_string())?;
            let r = res.term(r, env).map_err(|e| e.to_string())?;
            match refines_bounded(u, &l, &r, b) {
                Verdict::Holds => Ok(true),
                Verdict::Fails(_) => Ok(false),
                Verdict::ResourceExhausted(m) => Err(m),
            }
        }
    }
}

/// Complete an assignment with computed variables and test the side
/// conditions. `Ok(None)` means the instance is outside the law's scope.
pub fn admit(u: &Universe, law: &Law, mut env: Env, b: Bounds) -> Result<Option<Env>, String> {
    for (v, f) in &law.computed {
        match f(u, &env) {
            Some(x) => {
                env.insert(v.clone(), x);
            }
            None => return Ok(None),
        }
    }
    for c in &law.conds {
        if !cond_holds(u, c, &env, b)? {
            return Ok(None);
        }
    }
    Ok(Some(env))
}

/// Check one instance. `Ok(None)` means the instance satisfies the law.
pub fn check_instance(
    u: &Universe,
    law: &Law,
    env: &Env,
    b: Bounds,
) -> Result<Option<Counterexample>, String> {
    let res = Resolver::new(u);
    let term = |e: &Expr| res.term(e, env).map_err(|e| format!("{}: {e}", law.name));
    let (l, r) = (term(&law.lhs)?, term(&law.rhs)?);
    let verdict = match &law.kind {
        LawKind::Equality => equal_bounded(u, &l, &r, b),
        LawKind::Refinement => refines_bounded(u, &l, &r, b),
        LawKind::Equivalence(l2, r2) => {
            let (l2, r2) = (term(l2)?, term(r2)?);
            let v1 = refines_bounded(u, &l, &r, b);
            let v2 = refines_bounded(u, &l2, &r2, b);
            for v in [&v1, &v2] {
                if let Verdict::ResourceExhausted(m) = v {
                    return Err(m.clone());
                }
            }
            if v1.holds() == v2.holds() {
                Verdict::Holds
            } else {
                let w = v1.witness().or(v2.witness()).cloned();
                return Ok(Some(Counterexample {
                    env: env.clone(),
                    lhs: l,
                    rhs: r,
                    witness: w,
                }));
            }
        }
        LawKind::IffFn(_, f) => {
            let v = refines_bounded(u, &l, &r, b);
            if let Verdict::ResourceExhausted(m) = &v {
                return Err(m.clone());
            }
            if v.holds() == f(u, env) {
                Verdict::Holds
            } else {
                let w = v.witness().cloned();
                return Ok(Some(Counterexample {
                    env: env.clone(),
                    lhs: l,
                    rhs: r,
                    witness: w,
                }));
            }
        }
    };
    match verdict {
        Verdict::Holds => Ok(None),
        Verdict::Fails(w) => Ok(Some(Counterexample {
            env: env.clone(),
            lhs: l,
            rhs: r,
            witness: Some(w),
        })),
        Verdict::ResourceExhausted(m) => Err(format!("resource limit: {m}")),
    }
}

/// Check a law on sampled instances over `u`.
pub fn check_law(u: &Universe, law: &Law, dom: &Domains, cfg: &CheckConfig) -> LawReport {
    let mut report = LawReport {
        name: law.name,
        instances: 0,
        negative: law.negative,
        outcome: Outcome::Pass,
    };
    let envs = match dom.instances(u, law, cfg) {
        Ok(v) => v,
        Err(e) => {
            report.outcome = Outcome::Error(e);
            return report;
        }
    };
    for env in envs {
        report.instances += 1;
        match check_instance(u, law, &env, cfg.bounds) {
            Ok(None) => {}
            Ok(Some(cx)) => {
                report.outcome = Outcome::Fail(cx);
                return report;
            }
            Err(e) if e.starts_with("resource") => {
                report.outcome = Outcome::Exhausted(e);
                return report;
            }
            Err(e) => {
                report.outcome = Outcome::Error(e);
                return report;
            }
        }
    }
    report
}

/// Identifiers used as command or set variables in an expression.
pub fn free_idents(e: &Expr, out: &mut Vec<String>) {
    fn set(s: &SetExpr, out: &mut Vec<String>) {
        match s {
            SetExpr::Ident(n) => out.push(n.clone()),
            SetExpr::Lit(_) => {}
            SetExpr::Not(x) => set(x, out),
            SetExpr::And(a, b) | SetExpr::Or(a, b) | SetExpr::Dom(a, b) | SetExpr::Ran(a, b) => {
                set(a, out);
                set(b, out);
            }
        }
    }
    match e {
        Expr::Ident(n) => out.push(n.clone()),
        Expr::Const(_) => {}
        Expr::Call(_, s) => set(s, out),
        Expr::Assume(a) | Expr::Iter(_, a) | Expr::Not(a) => free_idents(a, out),
        Expr::Indexed(_, s, args) => {
            set(s, out);
            for a in args {
                free_idents(a, out);
            }
        }
        Expr::Seq(a, b) | Expr::Choice(a, b) | Expr::Bin(_, a, b) => {
            free_idents(a, out);
            free_idents(b, out);
        }
        Expr::Power(a, n) => {
            free_idents(a, out);
            if let crate::syntax::Nat::Var(v) = n {
                out.push(v.clone());
            }
        }
    }
}

/// Whether an expression uses the generic operator or mode constants.
pub fn uses_mode(e: &Expr) -> bool {
    use crate::syntax::{BinOp, Const};
    match e {
        Expr::Bin(BinOp::Sync, _, _) => true,
        Expr::Const(Const::SyncId | Const::SyncAtomId) => true,
        Expr::Ident(_) | Expr::Const(_) | Expr::Call(..) => false,
        Expr::Assume(a) | Expr::Iter(_, a) | Expr::Not(a) | Expr::Power(a, _) => uses_mode(a),
        Expr::Indexed(_, _, args) => args.iter().any(uses_mode),
        Expr::Seq(a, b) | Expr::Choice(a, b) | Expr::Bin(_, a, b) => uses_mode(a) || uses_mode(b),
    }
}
