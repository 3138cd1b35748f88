//! Law-directed rewriting of terms and replay of derivation scripts.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::{admit, free_idents, law_by_name, Law, LawKind, Sort};
use crate::decide::{equal_bounded, refines_bounded, Bounds, Verdict};
use crate::kernel::{Derived, Kind, Term};
use crate::stepalg::{bit, SyncMode, Universe};
use crate::syntax::{
    parse_expr, parse_set, BinOp, Env, Expr, IdxFn, IterOp, Mode, Resolver, SetExpr, SetFn,
    SetSort, Value,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Replace an instance of the left side by the right side.
    Forward,
    Backward,
}

/// Where to rewrite: a child-index path, or the first matching position in
/// pre-order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Path {
    At(Vec<usize>),
    First,
}

impl Path {
    pub fn parse(s: &str) -> Result<Path, String> {
        match s {
            "*" => Ok(Path::First),
            "root" | "." | "" => Ok(Path::At(Vec::new())),
            _ => s
                .split('.')
                .map(|x| x.parse::<usize>().map_err(|_| format!("bad path `{s}`")))
                .collect::<Result<Vec<_>, _>>()
                .map(Path::At),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RewriteError {
    UnknownLaw(String),
    /// A refinement law used right to left.
    Orientation(String),
    BadPath(String),
    NoMatch(String),
    Unbound(String),
    Other(String),
}

impl fmt::Display for RewriteError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RewriteError::UnknownLaw(n) => write!(f, "unknown law `{n}`"),
            RewriteError::Orientation(n) => {
                write!(
                    f,
                    "law `{n}` is a refinement and only rewrites left to right"
                )
            }
            RewriteError::BadPath(p) => write!(f, "no subterm at path {p}"),
            RewriteError::NoMatch(m) => write!(f, "no match: {m}"),
            RewriteError::Unbound(v) => {
                write!(
                    f,
                    "metavariable `{v}` is not determined by the match; bind it with `with`"
                )
            }
            RewriteError::Other(m) => f.write_str(m),
        }
    }
}

/// Children of a term for path navigation.
pub fn children(t: &Term) -> Vec<Term> {
    match t.kind() {
        Kind::Seq(a, b) | Kind::Sync(_, a, b) => vec![a.clone(), b.clone()],
        Kind::Choice(v) | Kind::Join(v) => v.clone(),
        Kind::FinIter(b) | Kind::OmIter(b) | Kind::InfIter(b) | Kind::Rename(_, b) => {
            vec![b.clone()]
        }
        Kind::Derived(d) => match &**d {
            Derived::CcsRestrict(_, c) | Derived::Hide(_, c) => vec![c.clone()],
            Derived::CspPar(_, c, d) => vec![c.clone(), d.clone()],
            _ => Vec::new(),
        },
        _ => Vec::new(),
    }
}

fn with_child(u: &Universe, t: &Term, i: usize, new: Term) -> Term {
    let mut cs = children(t);
    cs[i] = new;
    match t.kind() {
        Kind::Seq(..) => u.seq(cs[0].clone(), cs[1].clone()),
        Kind::Sync(m, ..) => Term::sync(*m, cs[0].clone(), cs[1].clone()),
        Kind::Choice(_) => u.choice(cs),
        Kind::Join(_) => u.join(cs),
        Kind::FinIter(_) => Term::fin_iter(cs[0].clone()),
        Kind::OmIter(_) => Term::om_iter(cs[0].clone()),
        Kind::InfIter(_) => Term::inf_iter(cs[0].clone()),
        Kind::Rename(r, _) => Term::rename(r.clone(), cs[0].clone()),
        Kind::Derived(d) => match &**d {
            Derived::CcsRestrict(es, _) => u.ccs_restrict(*es, cs[0].clone()),
            Derived::Hide(es, _) => u.hide(*es, cs[0].clone()),
            Derived::CspPar(es, ..) => u.csp_par(*es, cs[0].clone(), cs[1].clone()),
            _ => t.clone(),
        },
        _ => t.clone(),
    }
}

fn subterm(t: &Term, path: &[usize]) -> Option<Term> {
    let mut cur = t.clone();
    for &i in path {
        cur = children(&cur).get(i)?.clone();
    }
    Some(cur)
}

fn replace(u: &Universe, t: &Term, path: &[usize], new: Term) -> Term {
    match path.split_first() {
        None => new,
        Some((&i, rest)) => {
            let c = children(t)[i].clone();
            with_child(u, t, i, replace(u, &c, rest, new))
        }
    }
}

fn preorder(t: &Term, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    out.push(path.clone());
    for (i, c) in children(t).iter().enumerate() {
        path.push(i);
        preorder(c, path, out);
        path.pop();
    }
}

struct Matcher<'a, 'u> {
    u: &'u Universe,
    res: Resolver<'u>,
    law: &'a Law,
    /// Whether a sequence pattern may match with `nil` filling one side.
    pad: bool,
}

fn flatten<'e>(e: &'e Expr, choice: bool, out: &mut Vec<&'e Expr>) {
    match e {
        Expr::Choice(a, b) if choice => {
            flatten(a, choice, out);
            flatten(b, choice, out);
        }
        Expr::Bin(BinOp::Conj, a, b) if !choice => {
            flatten(a, choice, out);
            flatten(b, choice, out);
        }
        _ => out.push(e),
    }
}

impl<'a, 'u> Matcher<'a, 'u> {
    fn bound(&self, e: &Expr, env: &Env) -> bool {
        let mut ids = Vec::new();
        free_idents(e, &mut ids);
        ids.iter()
            .all(|v| env.contains_key(v) || self.law.sort_of(v).is_none())
            && (!super::uses_mode(e) || env.contains_key("##"))
    }

    fn mode(env: &Env) -> Option<Mode> {
        match env.get("##") {
            Some(Value::Mode(m)) => Some(*m),
            _ => None,
        }
    }

    fn bind(&self, env: &Env, v: &str, val: Value) -> Vec<Env> {
        match env.get(v) {
            Some(x) if *x == val => vec![env.clone()],
            Some(_) => Vec::new(),
            None => {
                let mut e = env.clone();
                e.insert(v.to_string(), val);
                vec![e]
            }
        }
    }

    fn set_var(&self, s: &SetExpr, env: &Env, val: Value) -> Vec<Env> {
        match s {
            SetExpr::Ident(v) if self.law.sort_of(v).is_some() && !env.contains_key(v) => {
                let val = match (self.law.sort_of(v), val) {
                    (Some(Sort::Rel), Value::Pairs(p)) => Value::Labels(self.u.lift_rel(p)),
                    (Some(Sort::Pairs), Value::Labels(l))
                        if self.u.kind() == crate::stepalg::LabelKind::Relational =>
                    {
                        Value::Pairs(l)
                    }
                    (Some(Sort::Event), Value::Events(e)) if e.count_ones() == 1 => {
                        Value::Events(e)
                    }
                    (Some(Sort::Events), Value::Events(e)) => Value::Events(e),
                    (Some(Sort::Events), Value::Labels(l))
                        if self.u.kind() != crate::stepalg::LabelKind::Relational =>
                    {
                        let es = (0..self.u.n_events())
                            .filter(|&e| {
                                let le = self.u.lift_events(bit(e));
                                le & l == le
                            })
                            .fold(0, |a, e| a | bit(e));
                        if self.u.lift_events(es) != l {
                            return Vec::new();
                        }
                        Value::Events(es)
                    }
                    (Some(Sort::Rel), Value::Events(e)) => Value::Labels(self.u.lift_events(e)),
                    (Some(Sort::Rel), v @ Value::Labels(_)) => v,
                    (Some(Sort::Pairs), v @ Value::Pairs(_)) => v,
                    (Some(Sort::Test), v @ Value::Pred(_)) => v,
                    _ => return Vec::new(),
                };
                self.bind(env, v, val)
            }
            _ => {
                let sort = match val {
                    Value::Pred(_) => SetSort::Pred,
                    Value::Labels(_) => SetSort::Labels,
                    Value::Pairs(_) => SetSort::Pairs,
                    _ => SetSort::Events,
                };
                let want = match val {
                    Value::Pred(b) | Value::Labels(b) | Value::Pairs(b) | Value::Events(b) => b,
                    _ => return Vec::new(),
                };
                match self.res.set(s, sort, env) {
                    Ok(b) if b == want => vec![env.clone()],
                    _ => Vec::new(),
                }
            }
        }
    }

    fn m(&self, p: &Expr, t: &Term, env: &Env) -> Vec<Env> {
        if self.bound(p, env) {
            return match self.res.term(p, env) {
                Ok(x) if x == *t => vec![env.clone()],
                _ => Vec::new(),
            };
        }
        let u = self.u;
        match p {
            Expr::Ident(v) => {
                let val = match self.law.sort_of(v) {
                    Some(Sort::Cmd | Sort::Proc) => Value::Cmd(t.clone()),
                    Some(Sort::Atom) => match t.kind() {
                        Kind::Atom(a) => Value::Atom(*a),
                        Kind::Top => Value::Atom(crate::stepalg::AtomicDesc::TOP),
                        _ => return Vec::new(),
                    },
                    Some(Sort::Test) => match t.kind() {
                        Kind::Test(p) => Value::Pred(*p),
                        Kind::Nil => Value::Pred(u.full_states()),
                        Kind::Top => Value::Pred(0),
                        _ => return Vec::new(),
                    },
                    _ => return Vec::new(),
                };
                self.bind(env, v, val)
            }
            Expr::Not(x) => match t.kind() {
                Kind::Atom(a) => self.m(x, &Term::atom(u.negate(*a)), env),
                Kind::Test(q) => self.m(x, &u.neg_test(*q), env),
                Kind::Nil => self.m(x, &Term::top(), env),
                _ => Vec::new(),
            },
            Expr::Seq(a, b) => {
                let elems: Vec<Term> = t.seq_elems().into_iter().cloned().collect();
                let mut out = Vec::new();
                // proper splits first, nil-padded ones last
                let n = elems.len();
                let pads: &[usize] = if self.pad { &[0, n] } else { &[] };
                for k in (1..n).chain(pads.iter().copied()) {
                    let left = u.seq_all(elems[..k].iter().cloned());
                    let right = u.seq_all(elems[k..].iter().cloned());
                    for e1 in self.m(a, &left, env) {
                        out.extend(self.m(b, &right, &e1));
                    }
                }
                // top; d = top, so a top head swallows a bound tail
                if out.is_empty() && matches!(t.kind(), Kind::Top) {
                    out.extend(self.m(a, t, env).into_iter().filter(|e| self.bound(b, e)));
                }
                out
            }
            Expr::Choice(..) => {
                let mut ps = Vec::new();
                flatten(p, true, &mut ps);
                let ts = match t.kind() {
                    Kind::Choice(v) => v.clone(),
                    _ => vec![t.clone()],
                };
                let out = self.ac(&ps, ts.clone(), env, true);
                if !out.is_empty() {
                    return out;
                }
                // one structured element may stand for the unit top
                let mut out = Vec::new();
                for i in 0..ps.len() {
                    if matches!(ps[i], Expr::Ident(v) if self.law.sort_of(v) == Some(Sort::Cmd)) {
                        continue;
                    }
                    let rest: Vec<&Expr> = ps
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, p)| *p)
                        .collect();
                    for e in self.m(ps[i], &Term::top(), env) {
                        out.extend(self.ac(&rest, ts.clone(), &e, true));
                    }
                }
                out
            }
            Expr::Bin(op, a, b) => {
                let mode = match op {
                    BinOp::Par => Some(Mode::Par),
                    BinOp::Weak => Some(Mode::Weak),
                    BinOp::Conj => Some(Mode::Conj),
                    BinOp::Sync => Self::mode(env),
                };
                let mut out = Vec::new();
                let modes: Vec<Mode> = match mode {
                    Some(m) => vec![m],
                    None => Mode::ALL.to_vec(),
                };
                for m in modes {
                    let mut env = env.clone();
                    if *op == BinOp::Sync {
                        env.insert("##".into(), Value::Mode(m));
                    }
                    match (m, t.kind()) {
                        (Mode::Par, Kind::Sync(SyncMode::Parallel, x, y))
                        | (Mode::Weak, Kind::Sync(SyncMode::WeakConj, x, y)) => {
                            for e1 in self.m(a, x, &env) {
                                out.extend(self.m(b, y, &e1));
                            }
                        }
                        (Mode::Conj, _) => {
                            let ts = match t.kind() {
                                Kind::Join(v) => v.clone(),
                                _ => vec![t.clone()],
                            };
                            let ps: Vec<&Expr> = if *op == BinOp::Conj {
                                let mut ps = Vec::new();
                                flatten(p, false, &mut ps);
                                ps
                            } else {
                                vec![a, b]
                            };
                            out.extend(self.ac(&ps, ts, &env, false));
                        }
                        _ => {}
                    }
                }
                out
            }
            Expr::Iter(op, a) => match (op, t.kind()) {
                (IterOp::Fin, Kind::FinIter(x))
                | (IterOp::Om, Kind::OmIter(x))
                | (IterOp::Inf, Kind::InfIter(x)) => self.m(a, x, env),
                _ => Vec::new(),
            },
            Expr::Call(f, s) => {
                let d = match t.kind() {
                    Kind::Derived(d) => Some(&**d),
                    _ => None,
                };
                match (f, t.kind(), d) {
                    (SetFn::Test, Kind::Test(p), _) => self.set_var(s, env, Value::Pred(*p)),
                    (SetFn::Test, Kind::Nil, _) => {
                        self.set_var(s, env, Value::Pred(u.full_states()))
                    }
                    (SetFn::Pgm, Kind::Atom(a), _) if a.env == 0 => {
                        self.set_var(s, env, Value::Labels(a.pgm))
                    }
                    (SetFn::Env, Kind::Atom(a), _) if a.pgm == 0 => {
                        self.set_var(s, env, Value::Labels(a.env))
                    }
                    (SetFn::Assert, _, Some(Derived::Assert(p))) => {
                        self.set_var(s, env, Value::Pred(*p))
                    }
                    (SetFn::Guar, _, Some(Derived::Guar(g))) => {
                        self.set_var(s, env, Value::Labels(*g))
                    }
                    (SetFn::Rely, _, Some(Derived::Rely(r))) => {
                        self.set_var(s, env, Value::Labels(*r))
                    }
                    (SetFn::Spec, _, Some(Derived::Spec(q))) => {
                        self.set_var(s, env, Value::Pairs(*q))
                    }
                    (SetFn::Atev, _, Some(Derived::Atev(e))) => {
                        self.set_var(s, env, Value::Events(bit(*e)))
                    }
                    _ => Vec::new(),
                }
            }
            Expr::Assume(a) => match t.kind() {
                Kind::Derived(d) => match &**d {
                    Derived::AssumeStep(x) => self.m(a, &Term::atom(*x), env),
                    _ => Vec::new(),
                },
                _ => Vec::new(),
            },
            Expr::Indexed(f, s, args) => {
                let mut out = Vec::new();
                match (f, t.kind()) {
                    (IdxFn::Rename, Kind::Rename(r, c)) => {
                        let envs = match s {
                            SetExpr::Ident(v) if self.law.sort_of(v) == Some(Sort::Ren) => {
                                self.bind(env, v, Value::Ren(r.clone()))
                            }
                            SetExpr::Ident(n) if *n == r.name => vec![env.clone()],
                            _ => Vec::new(),
                        };
                        for e in envs {
                            out.extend(self.m(&args[0], c, &e));
                        }
                    }
                    (_, Kind::Derived(d)) => match (f, &**d) {
                        (IdxFn::Restrict, Derived::CcsRestrict(es, c))
                        | (IdxFn::Hide, Derived::Hide(es, c)) => {
                            for e in self.set_var(s, env, Value::Events(*es)) {
                                out.extend(self.m(&args[0], c, &e));
                            }
                        }
                        (IdxFn::ParCsp, Derived::CspPar(es, c, d)) => {
                            for e in self.set_var(s, env, Value::Events(*es)) {
                                for e1 in self.m(&args[0], c, &e) {
                                    out.extend(self.m(&args[1], d, &e1));
                                }
                            }
                        }
                        _ => {}
                    },
                    _ => {}
                }
                out
            }
            _ => Vec::new(),
        }
    }

    /// Match a flattened choice or conjunction modulo associativity and
    /// commutativity. A command variable may absorb several elements.
    fn ac(&self, ps: &[&Expr], ts: Vec<Term>, env: &Env, choice: bool) -> Vec<Env> {
        if ps.is_empty() {
            return if ts.is_empty() {
                vec![env.clone()]
            } else {
                Vec::new()
            };
        }
        if ts.is_empty() {
            return Vec::new();
        }
        if ps.len() == 1 {
            let t = if choice {
                self.u.choice(ts)
            } else {
                self.u.join(ts)
            };
            return self.m(ps[0], &t, env);
        }
        let mut out = Vec::new();
        // Bound and structured patterns first; absorbing variables last.
        let first = ps
            .iter()
            .position(|p| !matches!(p, Expr::Ident(v) if self.law.sort_of(v) == Some(Sort::Cmd) && !env.contains_key(v)))
            .unwrap_or(0);
        let rest: Vec<&Expr> = ps
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != first)
            .map(|(_, p)| *p)
            .collect();
        for i in 0..ts.len() {
            let mut others = ts.clone();
            let t = others.remove(i);
            for e in self.m(ps[first], &t, env) {
                out.extend(self.ac(&rest, others.clone(), &e, choice));
            }
        }
        out
    }
}

/// Rewrite with a law at a position. With `Path::First` the first position
/// in pre-order where the law applies is used.
pub fn rewrite_step(
    u: &Universe,
    t: &Term,
    law: &Law,
    dir: Direction,
    path: &Path,
    bindings: &Env,
    b: Bounds,
) -> Result<Term, RewriteError> {
    if law.negative {
        return Err(RewriteError::Other(format!("`{}` is not a law", law.name)));
    }
    let (from, to) = match (dir, &law.kind) {
        (_, LawKind::Equivalence(..) | LawKind::IffFn(..)) => {
            return Err(RewriteError::Other(format!(
                "`{}` is an equivalence, not a rewrite rule",
                law.name
            )))
        }
        (Direction::Forward, _) => (&law.lhs, &law.rhs),
        (Direction::Backward, LawKind::Equality) => (&law.rhs, &law.lhs),
        (Direction::Backward, _) => return Err(RewriteError::Orientation(law.name.to_string())),
    };
    let positions = match path {
        Path::At(p) => {
            if subterm(t, p).is_none() {
                return Err(RewriteError::BadPath(render_path(p)));
            }
            vec![p.clone()]
        }
        Path::First => {
            let mut out = Vec::new();
            preorder(t, &mut Vec::new(), &mut out);
            out
        }
    };
    let mut unbound: Option<String> = None;
    for pad in [false, true] {
        let mt = Matcher {
            u,
            res: Resolver::new(u),
            law,
            pad,
        };
        for pos in &positions {
            let sub = subterm(t, pos).expect("valid path");
            let mut starts = vec![bindings.clone()];
            if !law.modes.is_empty() && !bindings.contains_key("##") {
                starts = law
                    .modes
                    .iter()
                    .map(|m| {
                        let mut e = bindings.clone();
                        e.insert("##".into(), Value::Mode(*m));
                        e
                    })
                    .collect();
            }
            // A sequence pattern may also match a contiguous part of a chain.
            let mut windows = vec![(0, 0, sub.clone())];
            if matches!(from, Expr::Seq(..)) {
                let el: Vec<Term> = sub.seq_elems().into_iter().cloned().collect();
                let n = el.len();
                for len in (2..n).rev() {
                    for i in 0..=n - len {
                        windows.push((i, n - i - len, u.seq_all(el[i..i + len].iter().cloned())));
                    }
                }
            }
            for (start, (pre, post, piece)) in starts
                .iter()
                .flat_map(|s| windows.iter().map(move |w| (s, w)))
            {
                for env in mt.m(from, piece, start) {
                    let env = match admit(u, law, env, b) {
                        Ok(Some(e)) => e,
                        Ok(None) => continue,
                        Err(m) => return Err(RewriteError::Other(m)),
                    };
                    let mut ids = Vec::new();
                    free_idents(to, &mut ids);
                    if let Some(v) = ids
                        .iter()
                        .find(|v| law.sort_of(v).is_some() && !env.contains_key(*v))
                    {
                        unbound.get_or_insert(v.clone());
                        continue;
                    }
                    let new = mt
                        .res
                        .term(to, &env)
                        .map_err(|e| RewriteError::Other(e.to_string()))?;
                    let new = if *pre + *post > 0 {
                        let el: Vec<Term> = sub.seq_elems().into_iter().cloned().collect();
                        let n = el.len();
                        u.seq_all(
                            el[..*pre]
                                .iter()
                                .cloned()
                                .chain([new])
                                .chain(el[n - post..].iter().cloned()),
                        )
                    } else {
                        new
                    };
                    return Ok(replace(u, t, pos, new));
                }
            }
        }
    }
    if let Some(v) = unbound {
        return Err(RewriteError::Unbound(v));
    }
    let at = match path {
        Path::At(p) => format!("at {}", render_path(p)),
        Path::First => "anywhere".to_string(),
    };
    Err(RewriteError::NoMatch(format!(
        "`{}` does not apply {at}",
        law.name
    )))
}

fn render_path(p: &[usize]) -> String {
    if p.is_empty() {
        return "root".to_string();
    }
    let parts: Vec<String> = p.iter().map(|i| format!("{i}")).collect();
    parts.join(".")
}

#[derive(Clone, Debug)]
pub struct Step {
    pub line: usize,
    pub law: String,
    pub dir: Direction,
    pub path: Path,
    pub with: Vec<(String, String)>,
}

#[derive(Clone, Debug)]
pub struct Script {
    pub start: Expr,
    pub goal: Expr,
    pub steps: Vec<Step>,
}

/// Parse a derivation script:
///
/// ```text
/// # comment
/// start: <expr>
/// goal: <expr>
/// <law> -> at <path> [with v=value, ...]
/// ```
pub fn parse_script(src: &str) -> Result<Script, String> {
    let (mut start, mut goal, mut steps) = (None, None, Vec::new());
    for (i, raw) in src.lines().enumerate() {
        let line = strip_comment(raw).trim();
        let ln = i + 1;
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("start:") {
            start = Some(parse_expr(rest).map_err(|e| format!("line {ln}: {e}"))?);
            continue;
        }
        if let Some(rest) = line.strip_prefix("goal:") {
            goal = Some(parse_expr(rest).map_err(|e| format!("line {ln}: {e}"))?);
            continue;
        }
        let (law, rest) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| format!("line {ln}: expected `<law> -> at <path>`"))?;
        let rest = rest.trim_start();
        let (dir, rest) = if let Some(r) = rest.strip_prefix("->") {
            (Direction::Forward, r)
        } else if let Some(r) = rest.strip_prefix("<-") {
            (Direction::Backward, r)
        } else {
            return Err(format!(
                "line {ln}: expected `->` or `<-` after the law name"
            ));
        };
        let rest = rest
            .trim_start()
            .strip_prefix("at")
            .ok_or_else(|| format!("line {ln}: expected `at <path>`"))?
            .trim_start();
        let (p, with) = match rest.split_once(" with ") {
            Some((p, w)) => (p.trim(), Some(w)),
            None => (rest.trim(), None),
        };
        let path = Path::parse(p).map_err(|e| format!("line {ln}: {e}"))?;
        let mut binds = Vec::new();
        if let Some(w) = with {
            for item in split_top(w) {
                let (k, v) = item
                    .split_once('=')
                    .ok_or_else(|| format!("line {ln}: expected `name=value` in `{item}`"))?;
                binds.push((k.trim().to_string(), v.trim().to_string()));
            }
        }
        steps.push(Step {
            line: ln,
            law: law.to_string(),
            dir,
            path,
            with: binds,
        });
    }
    Ok(Script {
        start: start.ok_or("missing `start:` line")?,
        goal: goal.ok_or("missing `goal:` line")?,
        steps,
    })
}

/// A comment starts at a `#` that stands alone as a word, so `##` stays usable.
fn strip_comment(s: &str) -> &str {
    let b = s.as_bytes();
    for i in 0..b.len() {
        let prev_ok = i == 0 || b[i - 1].is_ascii_whitespace();
        let next_ok = i + 1 == b.len() || b[i + 1].is_ascii_whitespace();
        if b[i] == b'#' && prev_ok && next_ok {
            return &s[..i];
        }
    }
    s
}

fn split_top(s: &str) -> Vec<&str> {
    let (mut out, mut depth, mut last) = (Vec::new(), 0i32, 0);
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            ',' if depth == 0 => {
                out.push(s[last..i].trim());
                last = i + 1;
            }
            _ => {}
        }
    }
    if !s[last..].trim().is_empty() {
        out.push(s[last..].trim());
    }
    out
}

/// Interpret a `with` binding according to the variable's sort.
pub fn parse_binding(u: &Universe, law: &Law, var: &str, src: &str) -> Result<Value, String> {
    let res = Resolver::new(u);
    if var == "##" {
        return match src {
            "||" => Ok(Value::Mode(Mode::Par)),
            "&&" => Ok(Value::Mode(Mode::Weak)),
            "/\\" => Ok(Value::Mode(Mode::Conj)),
            _ => Err(format!("unknown mode `{src}`")),
        };
    }
    let sort = law
        .sort_of(var)
        .ok_or_else(|| format!("law `{}` has no variable `{var}`", law.name))?;
    let env = Env::new();
    let set = |s: SetSort| -> Result<u128, String> {
        let e = parse_set(src).map_err(|e| e.to_string())?;
        res.set(&e, s, &env).map_err(|e| e.to_string())
    };
    Ok(match sort {
        Sort::Cmd | Sort::Proc => {
            let e = parse_expr(src).map_err(|e| e.to_string())?;
            Value::Cmd(res.term(&e, &env).map_err(|e| e.to_string())?)
        }
        Sort::Atom => {
            let e = parse_expr(src).map_err(|e| e.to_string())?;
            Value::Atom(res.atom(&e, &env).map_err(|e| e.to_string())?)
        }
        Sort::Test => Value::Pred(set(SetSort::Pred)?),
        Sort::Rel => Value::Labels(set(SetSort::Labels)?),
        Sort::Pairs => Value::Pairs(set(SetSort::Pairs)?),
        Sort::Events => Value::Events(set(SetSort::Events)?),
        Sort::Event => {
            let e = set(SetSort::Events)?;
            if e.count_ones() != 1 {
                return Err(format!("`{src}` is not a single event"));
            }
            Value::Events(e)
        }
        Sort::Nat => Value::Nat(
            src.parse()
                .map_err(|_| format!("`{src}` is not a number"))?,
        ),
        Sort::Ren => Value::Ren(
            u.renaming(src)
                .ok_or_else(|| format!("unknown renaming `{src}`"))?,
        ),
    })
}

#[derive(Clone, Debug)]
pub struct StepReport {
    pub line: usize,
    pub law: String,
    pub result: Term,
    /// Oracle verdict comparing the previous term with the result.
    pub verdict: Verdict,
    pub refinement: bool,
}

#[derive(Clone, Debug)]
pub struct ReplayReport {
    pub start: Term,
    pub goal: Term,
    pub steps: Vec<StepReport>,
    pub reached_goal: bool,
    /// First failure, if any.
    pub error: Option<String>,
}

impl ReplayReport {
    /// Every step applied and verified, and the goal reached.
    pub fn holds(&self) -> bool {
        self.error.is_none() && self.reached_goal && self.steps.iter().all(|s| s.verdict.holds())
    }
    /// Whether any step was a refinement rather than an equality.
    pub fn is_refinement(&self) -> bool {
        self.steps.iter().any(|s| s.refinement)
    }
}

/// Replay a script, checking each step with the bounded oracle.
pub fn replay_derivation(u: &Universe, laws: &[Law], script: &Script, b: Bounds) -> ReplayReport {
    let res = Resolver::new(u);
    let resolve = |e: &Expr| res.term(e, &Env::new()).map_err(|e| e.to_string());
    let mut rep = ReplayReport {
        start: Term::top(),
        goal: Term::top(),
        steps: Vec::new(),
        reached_goal: false,
        error: None,
    };
    match (resolve(&script.start), resolve(&script.goal)) {
        (Ok(s), Ok(g)) => {
            rep.start = s;
            rep.goal = g;
        }
        (Err(e), _) | (_, Err(e)) => {
            rep.error = Some(e);
            return rep;
        }
    }
    let mut cur = rep.start.clone();
    for st in &script.steps {
        let fail = |m: String| Some(format!("line {}: {m}", st.line));
        let Some(law) = law_by_name(laws, &st.law) else {
            rep.error = fail(RewriteError::UnknownLaw(st.law.clone()).to_string());
            return rep;
        };
        let mut env = Env::new();
        for (k, v) in &st.with {
            match parse_binding(u, law, k, v) {
                Ok(x) => {
                    env.insert(k.clone(), x);
                }
                Err(e) => {
                    rep.error = fail(e);
                    return rep;
                }
            }
        }
        let next = match rewrite_step(u, &cur, law, st.dir, &st.path, &env, b) {
            Ok(t) => t,
            Err(e) => {
                rep.error = fail(e.to_string());
                return rep;
            }
        };
        let refinement = !matches!(law.kind, LawKind::Equality);
        let verdict = if refinement {
            refines_bounded(u, &cur, &next, b)
        } else {
            equal_bounded(u, &cur, &next, b)
        };
        let ok = verdict.holds();
        rep.steps.push(StepReport {
            line: st.line,
            law: st.law.clone(),
            result: next.clone(),
            verdict,
            refinement,
        });
        if !ok {
            rep.error = fail(format!(
                "step with `{}` is not confirmed by the oracle",
                st.law
            ));
            return rep;
        }
        cur = next;
    }
    rep.reached_goal = cur == rep.goal;
    if !rep.reached_goal {
        rep.error = Some("the last term differs from the goal".to_string());
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::catalog;
    use crate::syntax::parse_term;

    fn rel2() -> Universe {
        let mut u = Universe::relational(&["s0", "s1"]).unwrap();
        u.add_relation("r", 0b0110).unwrap();
        u.add_predicate("p", 0b01).unwrap();
        u
    }

    fn step(
        u: &Universe,
        src: &str,
        law: &str,
        dir: Direction,
        path: &str,
    ) -> Result<Term, RewriteError> {
        let laws = catalog();
        let l = law_by_name(&laws, law).unwrap();
        let t = parse_term(u, src).unwrap();
        rewrite_step(
            u,
            &t,
            l,
            dir,
            &Path::parse(path).unwrap(),
            &Env::new(),
            Bounds::default(),
        )
    }

    #[test]
    fn nil_identity() {
        let u = rel2();
        let t = step(
            &u,
            "nil; alpha^w",
            "A-seq-identity",
            Direction::Forward,
            "root",
        )
        .unwrap();
        assert_eq!(t, parse_term(&u, "alpha^w").unwrap());
    }

    #[test]
    fn refinement_laws_only_rewrite_forwards() {
        let u = rel2();
        let e = step(
            &u,
            "pistep^*",
            "L-finite-iteration",
            Direction::Backward,
            "root",
        )
        .unwrap_err();
        assert!(matches!(e, RewriteError::Orientation(_)));
        let e = step(&u, "test(p)", "tau-ordering", Direction::Forward, "root").unwrap_err();
        assert!(matches!(e, RewriteError::Other(_)));
    }

    #[test]
    fn no_match_and_bad_path() {
        let u = rel2();
        let e = step(&u, "skip", "A-nil-sync-absorb", Direction::Forward, "*").unwrap_err();
        assert!(matches!(e, RewriteError::NoMatch(_)));
        let e = step(&u, "skip", "A-nil-sync-absorb", Direction::Forward, "0.4").unwrap_err();
        assert!(matches!(e, RewriteError::BadPath(_)));
    }

    #[test]
    fn unbound_right_hand_side() {
        let u = rel2();
        // the backward direction introduces `d`
        let e = step(
            &u,
            "top",
            "top-annihilation-left",
            Direction::Backward,
            "root",
        )
        .unwrap_err();
        assert_eq!(e, RewriteError::Unbound("c".into()));
    }

    #[test]
    fn sequence_infix() {
        let u = rel2();
        let t = step(
            &u,
            "pistep; (eps \\/ alpha^w); skip",
            "A-seq-distr-right",
            Direction::Forward,
            "*",
        )
        .unwrap();
        assert_eq!(
            t,
            parse_term(&u, "pistep; (eps; skip \\/ alpha^w; skip)").unwrap()
        );
    }

    #[test]
    fn choice_is_matched_modulo_ac() {
        let u = rel2();
        let t = step(
            &u,
            "eps^w; skip \\/ pistep; skip",
            "A-seq-distr-right",
            Direction::Backward,
            "root",
        )
        .unwrap();
        assert_eq!(t, parse_term(&u, "(eps^w \\/ pistep); skip").unwrap());
        let t = step(
            &u,
            "skip || (pistep \\/ eps^w)",
            "A-sync-Inf-distrib",
            Direction::Forward,
            "root",
        )
        .unwrap();
        assert_eq!(
            t,
            parse_term(&u, "skip || eps^w \\/ skip || pistep").unwrap()
        );
    }

    #[test]
    fn choice_element_may_match_top() {
        // the abort branch of an assumption on every step normalizes away
        let u = rel2();
        let t = step(
            &u,
            "alpha^w || alpha^w",
            "L-iterations-with-abort",
            Direction::Forward,
            "root",
        )
        .unwrap();
        assert_eq!(
            t,
            parse_term(&u, "(alpha || alpha)^w; (nil \\/ (top || alpha); bot)").unwrap()
        );
    }

    #[test]
    fn scripts() {
        let src = "# header\nstart: nil; skip\ngoal: skip\nA-seq-identity -> at root\nA-sync-comm -> at * with ##=||, c=skip # trailing\n";
        let s = parse_script(src).unwrap();
        assert_eq!(s.steps.len(), 2);
        assert_eq!(
            s.steps[1].with,
            vec![("##".into(), "||".into()), ("c".into(), "skip".into())]
        );
        assert!(parse_script("goal: nil").unwrap_err().contains("start"));
        assert!(parse_script("start: nil\ngoal: nil\nfoo => at root")
            .unwrap_err()
            .contains("line 3"));
    }

    #[test]
    fn replay_reports_unknown_law_and_goal_mismatch() {
        let u = rel2();
        let laws = catalog();
        let s = parse_script("start: nil; skip\ngoal: skip\nno-such-law -> at root").unwrap();
        let r = replay_derivation(&u, &laws, &s, Bounds::default());
        assert!(!r.holds());
        assert!(r.error.unwrap().contains("no-such-law"));
        let s = parse_script("start: nil; skip\ngoal: chaos\nA-seq-identity -> at root").unwrap();
        let r = replay_derivation(&u, &laws, &s, Bounds::default());
        assert!(!r.reached_goal);
        let s = parse_script("start: nil; skip\ngoal: skip\nA-seq-identity -> at root").unwrap();
        assert!(replay_derivation(&u, &laws, &s, Bounds::default()).holds());
    }
}
