//! Trace semantics by derivatives.
//!
//! A command denotes a set of behaviours from each initial state: terminated,
//! aborted (closed under every extension) and incomplete (any prefix the
//! command can perform), plus infinite behaviours. Finite behaviours are
//! decided by iterating partial derivatives. Infinite behaviours are decided
//! on lassos: the derivative graph over (residual, loop position) is searched
//! for a cycle whose iteration restarts are accepting.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use hashbrown::{HashMap, HashSet};

use crate::kernel::{Kind, Term};
use crate::stepalg::{bit, PrimStep, SyncMode, Universe};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    Terminated,
    Aborted,
    /// A prefix the command can perform, whatever happens next.
    Incomplete,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Behaviour {
    pub init: usize,
    pub steps: Vec<PrimStep>,
    pub status: Status,
}

/// The infinite behaviour `u · v^ω`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lasso {
    pub init: usize,
    pub prefix: Vec<PrimStep>,
    pub cycle: Vec<PrimStep>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Observation {
    Finite(Behaviour),
    Lasso(Lasso),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SemError {
    DerivedForm,
    Inconsistent(String),
    ResidualCap(usize),
}

impl fmt::Display for SemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemError::DerivedForm => f.write_str("derived form must be expanded first"),
            SemError::Inconsistent(m) => write!(f, "inconsistent behaviour: {m}"),
            SemError::ResidualCap(n) => write!(f, "more than {n} distinct residuals"),
        }
    }
}

pub fn chain_ok(u: &Universe, init: usize, steps: &[PrimStep]) -> Result<usize, SemError> {
    if init >= u.n_states() {
        return Err(SemError::Inconsistent(alloc::format!("no state {init}")));
    }
    let mut cur = init;
    for (i, s) in steps.iter().enumerate() {
        if s.label() >= u.n_labels() {
            return Err(SemError::Inconsistent(alloc::format!(
                "step {i} has no label"
            )));
        }
        if u.pre(*s) != cur {
            return Err(SemError::Inconsistent(alloc::format!(
                "step {i} starts in {} but the trace is in {}",
                u.state_name(u.pre(*s)),
                u.state_name(cur)
            )));
        }
        cur = u.post(*s);
    }
    Ok(cur)
}

impl Behaviour {
    pub fn validate(&self, u: &Universe) -> Result<usize, SemError> {
        chain_ok(u, self.init, &self.steps)
    }
}

impl Lasso {
    pub fn validate(&self, u: &Universe) -> Result<(), SemError> {
        let mid = chain_ok(u, self.init, &self.prefix)?;
        if self.cycle.is_empty() {
            return Err(SemError::Inconsistent("empty loop".into()));
        }
        let end = chain_ok(u, mid, &self.cycle)?;
        if end != mid {
            return Err(SemError::Inconsistent(
                "loop does not return to its start".into(),
            ));
        }
        Ok(())
    }

    /// The step at absolute position `i` of the infinite word.
    pub fn step_at(&self, i: usize) -> PrimStep {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.cycle[(i - self.prefix.len()) % self.cycle.len()]
        }
    }
}

/// What a derivative step did to the element of the sequence it touched.
/// `depth` counts sequence elements from the bottom of the stack.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Move {
    pub depth: u16,
    pub kind: MoveKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MoveKind {
    Leaf,
    /// An iteration restarted its body; `true` for ω and ∞ iteration.
    Unfold(bool),
    Par(Vec<Move>),
    Ren(Box<Move>),
    Abort,
}

type Residuals = Arc<[Term]>;
type MovesOut = Arc<[(Term, Move)]>;

/// Per-check memo tables for derivatives and nullability.
pub struct Cx<'u> {
    pub u: &'u Universe,
    pd_memo: HashMap<(Term, PrimStep), Residuals>,
    mv_memo: HashMap<(Term, PrimStep), MovesOut>,
    flag_memo: HashMap<(Term, u8), (bool, bool)>,
    inf_memo: HashMap<Term, bool>,
    seen: HashSet<Term>,
    cap: usize,
    exhausted: bool,
}

pub const DEFAULT_RESIDUAL_CAP: usize = 10_000;

impl<'u> Cx<'u> {
    pub fn new(u: &'u Universe) -> Self {
        Cx::with_cap(u, DEFAULT_RESIDUAL_CAP)
    }

    pub fn with_cap(u: &'u Universe, cap: usize) -> Self {
        Cx {
            u,
            pd_memo: HashMap::new(),
            mv_memo: HashMap::new(),
            flag_memo: HashMap::new(),
            inf_memo: HashMap::new(),
            seen: HashSet::new(),
            cap,
            exhausted: false,
        }
    }

    /// True once more residuals were produced than the cap allows; results
    /// computed after that point are not trustworthy.
    pub fn exhausted(&self) -> bool {
        self.exhausted
    }

    pub fn residual_count(&self) -> usize {
        self.seen.len()
    }

    fn note(&mut self, t: &Term) {
        if self.exhausted {
            return;
        }
        if self.seen.insert(t.clone()) && self.seen.len() > self.cap {
            self.exhausted = true;
        }
    }

    /// `(can terminate, aborts)` at state `s`, abort-closed: a term that
    /// aborts also counts as able to terminate.
    pub fn flags(&mut self, t: &Term, s: usize) -> (bool, bool) {
        match t.kind() {
            Kind::Bot => return (true, true),
            Kind::Top | Kind::Atom(_) => return (false, false),
            Kind::Nil => return (true, false),
            Kind::Test(p) => return (p & bit(s) != 0, false),
            _ => {}
        }
        let key = (t.clone(), s as u8);
        if let Some(f) = self.flag_memo.get(&key) {
            return *f;
        }
        let f = match t.kind() {
            Kind::Seq(a, b) => {
                let (ca, aa) = self.flags(a, s);
                let (cb, ab) = if ca { self.flags(b, s) } else { (false, false) };
                let abort = aa || (ca && ab);
                (abort || (ca && cb), abort)
            }
            Kind::Choice(v) => v.iter().fold((false, false), |(c, a), x| {
                let (cx, ax) = self.flags(x, s);
                (c || cx, a || ax)
            }),
            Kind::Join(v) => v.iter().fold((true, true), |(c, a), x| {
                let (cx, ax) = self.flags(x, s);
                (c && cx, a && ax)
            }),
            Kind::Sync(_, a, b) => {
                let (ca, aa) = self.flags(a, s);
                let (cb, ab) = self.flags(b, s);
                let abort = aa || ab;
                (abort || (ca && cb), abort)
            }
            Kind::FinIter(b) => (true, self.flags(b, s).1),
            Kind::OmIter(b) => {
                let (cb, ab) = self.flags(b, s);
                (true, ab || cb)
            }
            Kind::InfIter(b) => {
                let (cb, ab) = self.flags(b, s);
                (ab || cb, ab || cb)
            }
            Kind::Rename(_, b) => self.flags(b, s),
            Kind::Derived(_) => panic!("derived form reached the semantics; expand it first"),
            _ => unreachable!(),
        };
        self.flag_memo.insert(key, f);
        f
    }

    pub fn can_terminate(&mut self, t: &Term, s: usize) -> bool {
        self.flags(t, s).0
    }

    pub fn aborts_now(&mut self, t: &Term, s: usize) -> bool {
        self.flags(t, s).1
    }

    /// Whether an ω or ∞ iteration occurs anywhere in `t`.
    pub fn has_infinite(&mut self, t: &Term) -> bool {
        if let Some(b) = self.inf_memo.get(t) {
            return *b;
        }
        let r = match t.kind() {
            Kind::OmIter(_) | Kind::InfIter(_) | Kind::Bot => true,
            Kind::Seq(a, b) | Kind::Sync(_, a, b) => self.has_infinite(a) || self.has_infinite(b),
            Kind::Choice(v) | Kind::Join(v) => v.iter().any(|x| self.has_infinite(x)),
            Kind::FinIter(b) | Kind::Rename(_, b) => self.has_infinite(b),
            _ => false,
        };
        self.inf_memo.insert(t.clone(), r);
        r
    }

    /// Partial derivatives: the residuals after `t` performs `s`. An empty
    /// result means `t` cannot perform `s`; `[Top]` means it can perform `s`
    /// and nothing after it.
    pub fn pd(&mut self, t: &Term, s: PrimStep) -> Residuals {
        let key = (t.clone(), s);
        if let Some(r) = self.pd_memo.get(&key) {
            return r.clone();
        }
        let sigma = self.u.pre(s);
        let mut out = Vec::new();
        if self.aborts_now(t, sigma) {
            out.push(Term::bot());
        } else {
            self.pd_into(t, s, &mut out);
        }
        let r: Residuals = normalize_set(out).into();
        for x in r.iter() {
            self.note(x);
        }
        self.pd_memo.insert(key, r.clone());
        r
    }

    fn pd_into(&mut self, t: &Term, s: PrimStep, out: &mut Vec<Term>) {
        let u = self.u;
        match t.kind() {
            Kind::Bot => out.push(t.clone()),
            Kind::Top | Kind::Nil | Kind::Test(_) => {}
            Kind::Atom(a) => {
                if a.contains(s) {
                    out.push(Term::nil());
                }
            }
            Kind::Seq(x, rest) => {
                for x2 in self.pd(x, s).iter() {
                    out.push(u.seq(x2.clone(), rest.clone()));
                }
                if self.can_terminate(x, u.pre(s)) {
                    out.extend(self.pd(rest, s).iter().cloned());
                }
            }
            Kind::Choice(v) => {
                for c in v {
                    out.extend(self.pd(c, s).iter().cloned());
                }
            }
            Kind::Join(v) => {
                let sigma = u.pre(s);
                let live: Vec<Term> = v
                    .iter()
                    .filter(|c| !self.aborts_now(c, sigma))
                    .cloned()
                    .collect();
                let parts: Vec<Residuals> = live.iter().map(|c| self.pd(c, s)).collect();
                for combo in product(&parts) {
                    out.push(u.join(combo));
                }
            }
            Kind::Sync(m, c, d) => {
                for (s1, s2) in sync_pairs(u, *m, s) {
                    let pc = self.pd(c, s1);
                    if pc.is_empty() {
                        continue;
                    }
                    let pd_ = self.pd(d, s2);
                    for c2 in pc.iter() {
                        for d2 in pd_.iter() {
                            out.push(Term::sync(*m, c2.clone(), d2.clone()));
                        }
                    }
                }
            }
            Kind::FinIter(b) | Kind::OmIter(b) | Kind::InfIter(b) => {
                for b2 in self.pd(b, s).iter() {
                    out.push(u.seq(b2.clone(), t.clone()));
                }
            }
            Kind::Rename(r, c) => {
                for s2 in rename_preimage(r, s) {
                    for c2 in self.pd(c, s2).iter() {
                        out.push(Term::rename(r.clone(), c2.clone()));
                    }
                }
            }
            Kind::Derived(_) => panic!("derived form reached the semantics; expand it first"),
        }
    }

    /// Partial derivatives together with the move each one took.
    pub fn pd_moves(&mut self, t: &Term, s: PrimStep) -> MovesOut {
        let key = (t.clone(), s);
        if let Some(r) = self.mv_memo.get(&key) {
            return r.clone();
        }
        let sigma = self.u.pre(s);
        let mut out = Vec::new();
        if self.aborts_now(t, sigma) {
            out.push((
                Term::bot(),
                Move {
                    depth: 1,
                    kind: MoveKind::Abort,
                },
            ));
        } else {
            self.moves_seq(t, s, &mut out);
        }
        let r: MovesOut = out.into();
        for (x, _) in r.iter() {
            self.note(x);
        }
        self.mv_memo.insert(key, r.clone());
        r
    }

    fn moves_seq(&mut self, t: &Term, s: PrimStep, out: &mut Vec<(Term, Move)>) {
        let sigma = self.u.pre(s);
        let elems = t.seq_elems();
        let n = elems.len();
        let mut cur = t.clone();
        for k in 0..n {
            let (x, tail) = match cur.kind() {
                Kind::Seq(x, tail) => (x.clone(), Some(tail.clone())),
                _ => (cur.clone(), None),
            };
            let base = (n - k - 1) as u16;
            let mut local = Vec::new();
            self.moves_elem(&x, s, &mut local);
            for (x2, mut m) in local {
                m.depth += base;
                let t2 = match &tail {
                    Some(tl) => self.u.seq(x2, tl.clone()),
                    None => x2,
                };
                out.push((t2, m));
            }
            if !self.can_terminate(&x, sigma) {
                break;
            }
            match tail {
                Some(tl) => cur = tl,
                None => break,
            }
        }
    }

    fn moves_elem(&mut self, x: &Term, s: PrimStep, out: &mut Vec<(Term, Move)>) {
        let u = self.u;
        let leaf = |kind| Move { depth: 1, kind };
        match x.kind() {
            Kind::Bot => out.push((x.clone(), leaf(MoveKind::Abort))),
            Kind::Top | Kind::Nil | Kind::Test(_) => {}
            Kind::Atom(a) => {
                if a.contains(s) {
                    out.push((Term::nil(), leaf(MoveKind::Leaf)));
                }
            }
            Kind::Seq(..) => self.moves_seq(x, s, out),
            Kind::Choice(v) => {
                for c in v {
                    out.extend(self.pd_moves(c, s).iter().cloned());
                }
            }
            Kind::FinIter(b) | Kind::OmIter(b) | Kind::InfIter(b) => {
                let acc = !matches!(x.kind(), Kind::FinIter(_));
                for b2 in self.pd(b, s).iter() {
                    out.push((u.seq(b2.clone(), x.clone()), leaf(MoveKind::Unfold(acc))));
                }
            }
            Kind::Sync(m, c, d) => {
                for (s1, s2) in sync_pairs(u, *m, s) {
                    let mc = self.pd_moves(c, s1);
                    if mc.is_empty() {
                        continue;
                    }
                    let md = self.pd_moves(d, s2);
                    for (c2, m1) in mc.iter() {
                        for (d2, m2) in md.iter() {
                            out.push((
                                Term::sync(*m, c2.clone(), d2.clone()),
                                leaf(MoveKind::Par(vec![m1.clone(), m2.clone()])),
                            ));
                        }
                    }
                }
            }
            Kind::Join(v) => {
                let sigma = u.pre(s);
                let live: Vec<Term> = v
                    .iter()
                    .filter(|c| !self.aborts_now(c, sigma))
                    .cloned()
                    .collect();
                let parts: Vec<MovesOut> = live.iter().map(|c| self.pd_moves(c, s)).collect();
                for combo in product(&parts) {
                    let (ts, ms): (Vec<Term>, Vec<Move>) = combo.into_iter().unzip();
                    out.push((u.join(ts), leaf(MoveKind::Par(ms))));
                }
            }
            Kind::Rename(r, c) => {
                for s2 in rename_preimage(r, s) {
                    for (c2, m) in self.pd_moves(c, s2).iter() {
                        out.push((
                            Term::rename(r.clone(), c2.clone()),
                            leaf(MoveKind::Ren(Box::new(m.clone()))),
                        ));
                    }
                }
            }
            Kind::Derived(_) => panic!("derived form reached the semantics; expand it first"),
        }
    }

    /// The derivative as a single term: the choice of the partial
    /// derivatives, or `None` when the step is impossible.
    pub fn derivative(&mut self, t: &Term, s: PrimStep) -> Option<Term> {
        let r = self.pd(t, s);
        if r.is_empty() {
            None
        } else {
            Some(self.u.choice(r.iter().cloned()))
        }
    }

    /// Residuals of a set after one step.
    pub fn step_set(&mut self, set: &[Term], s: PrimStep) -> Vec<Term> {
        let mut out = Vec::new();
        for t in set {
            out.extend(self.pd(t, s).iter().cloned());
        }
        normalize_set(out)
    }

    pub fn set_flags(&mut self, set: &[Term], s: usize) -> (bool, bool) {
        let mut r = (false, false);
        for t in set {
            let (c, a) = self.flags(t, s);
            r.0 |= c;
            r.1 |= a;
            if r.1 {
                break;
            }
        }
        r
    }

    /// Membership of a finite behaviour.
    pub fn member(&mut self, t: &Term, b: &Behaviour) -> Result<bool, SemError> {
        if !t.is_core() {
            return Err(SemError::DerivedForm);
        }
        b.validate(self.u)?;
        let mut set = vec![t.clone()];
        let mut sigma = b.init;
        for s in &b.steps {
            if self.set_flags(&set, sigma).1 {
                return Ok(true);
            }
            set = self.step_set(&set, *s);
            sigma = self.u.post(*s);
            if set.is_empty() {
                return Ok(false);
            }
        }
        let (ct, ab) = self.set_flags(&set, sigma);
        if self.exhausted {
            return Err(SemError::ResidualCap(self.cap));
        }
        Ok(ab
            || match b.status {
                Status::Terminated => ct,
                Status::Incomplete => true,
                Status::Aborted => false,
            })
    }

    /// Membership of the infinite behaviour `u · v^ω`.
    pub fn member_lasso(&mut self, t: &Term, l: &Lasso) -> Result<bool, SemError> {
        if !t.is_core() {
            return Err(SemError::DerivedForm);
        }
        l.validate(self.u)?;
        let mut set = vec![t.clone()];
        let mut sigma = l.init;
        for s in &l.prefix {
            if self.set_flags(&set, sigma).1 {
                return Ok(true);
            }
            set = self.step_set(&set, *s);
            sigma = self.u.post(*s);
            if set.is_empty() {
                return Ok(false);
            }
        }
        let r = self.loop_accepts(&set, &l.cycle);
        if self.exhausted {
            return Err(SemError::ResidualCap(self.cap));
        }
        Ok(r)
    }

    /// Whether some residual in `set` accepts `cycle^ω`, read from the start
    /// of `cycle`.
    pub fn loop_accepts(&mut self, set: &[Term], cycle: &[PrimStep]) -> bool {
        let len = cycle.len();
        let mut index: HashMap<(Term, usize), usize> = HashMap::new();
        let mut nodes: Vec<(Term, usize)> = Vec::new();
        let mut edges: Vec<(usize, usize, Move)> = Vec::new();
        for t in set {
            if !t.is_top() && !index.contains_key(&(t.clone(), 0)) {
                index.insert((t.clone(), 0), nodes.len());
                nodes.push((t.clone(), 0));
            }
        }
        let mut next = 0;
        while next < nodes.len() {
            let (t, i) = nodes[next].clone();
            let s = cycle[i];
            if self.aborts_now(&t, self.u.pre(s)) {
                return true;
            }
            if self.exhausted {
                return false;
            }
            let j = (i + 1) % len;
            for (t2, m) in self.pd_moves(&t, s).iter() {
                if t2.is_top() {
                    continue;
                }
                let key = (t2.clone(), j);
                let to = match index.get(&key) {
                    Some(&k) => k,
                    None => {
                        index.insert(key, nodes.len());
                        nodes.push((t2.clone(), j));
                        nodes.len() - 1
                    }
                };
                edges.push((next, to, m.clone()));
            }
            next += 1;
        }
        let all: Vec<usize> = (0..edges.len()).collect();
        accepting_cycle(nodes.len(), &edges, &all)
    }
}

fn normalize_set(mut v: Vec<Term>) -> Vec<Term> {
    v.sort();
    v.dedup();
    if v.len() > 1 {
        v.retain(|t| !t.is_top());
    }
    v
}

fn sync_pairs(u: &Universe, m: SyncMode, s: PrimStep) -> Vec<(PrimStep, PrimStep)> {
    match m {
        SyncMode::WeakConj => vec![(s, s)],
        SyncMode::Parallel => u.par_preimage(s).to_vec(),
    }
}

fn rename_preimage(r: &crate::stepalg::Renaming, s: PrimStep) -> Vec<PrimStep> {
    if s.is_env() {
        return vec![s];
    }
    r.map
        .iter()
        .enumerate()
        .filter(|(_, &m)| m as usize == s.label())
        .map(|(l, _)| PrimStep::pgm(l))
        .collect()
}

fn product<T: Clone>(parts: &[Arc<[T]>]) -> Vec<Vec<T>> {
    let mut acc: Vec<Vec<T>> = vec![Vec::new()];
    for p in parts {
        let mut next = Vec::with_capacity(acc.len() * p.len());
        for a in &acc {
            for x in p.iter() {
                let mut b = a.clone();
                b.push(x.clone());
                next.push(b);
            }
        }
        acc = next;
    }
    acc
}

type Path = Vec<(u16, usize)>;

fn sub_move<'m>(m: &'m Move, path: &Path) -> Option<&'m Move> {
    let mut cur = m;
    for &(d, i) in path {
        if cur.depth != d {
            return None;
        }
        cur = match &cur.kind {
            MoveKind::Par(ch) => ch.get(i)?,
            MoveKind::Ren(b) if i == 0 => b,
            _ => return None,
        };
    }
    Some(cur)
}

/// Is there a closed walk, using only `active` edges, whose infinite
/// repetition is accepting? Acceptance is read top-down: the least-deep
/// sequence element touched on the walk decides; an ω or ∞ iteration
/// restarting there accepts, a finite iteration or a plain step rejects, and
/// a parallel or conjoined element needs every operand's walk to accept.
fn accepting_cycle(n: usize, edges: &[(usize, usize, Move)], active: &[usize]) -> bool {
    for comp in sccs(n, edges, active) {
        if check_component(n, edges, &comp) {
            return true;
        }
    }
    false
}

fn check_component(n: usize, edges: &[(usize, usize, Move)], comp: &[usize]) -> bool {
    let mut pending: Vec<Path> = vec![Vec::new()];
    while let Some(p) = pending.pop() {
        let subs: Vec<(usize, &Move)> = comp
            .iter()
            .filter_map(|&e| sub_move(&edges[e].2, &p).map(|m| (e, m)))
            .collect();
        let Some(depth) = subs.iter().map(|(_, m)| m.depth).min() else {
            continue;
        };
        let at_min: Vec<&(usize, &Move)> = subs.iter().filter(|(_, m)| m.depth == depth).collect();
        if at_min
            .iter()
            .any(|(_, m)| matches!(m.kind, MoveKind::Unfold(true) | MoveKind::Abort))
        {
            continue;
        }
        let bad: Vec<usize> = at_min
            .iter()
            .filter(|(_, m)| matches!(m.kind, MoveKind::Unfold(false) | MoveKind::Leaf))
            .map(|(e, _)| *e)
            .collect();
        if !bad.is_empty() {
            let rest: Vec<usize> = comp.iter().copied().filter(|e| !bad.contains(e)).collect();
            return accepting_cycle(n, edges, &rest);
        }
        let width = at_min
            .iter()
            .map(|(_, m)| match &m.kind {
                MoveKind::Par(ch) => ch.len(),
                _ => 1,
            })
            .max()
            .unwrap_or(0);
        for i in 0..width {
            let mut q = p.clone();
            q.push((depth, i));
            pending.push(q);
        }
    }
    true
}

/// Strongly connected components (as edge lists) that contain at least one
/// edge, over the `active` edges.
fn sccs(n: usize, edges: &[(usize, usize, Move)], active: &[usize]) -> Vec<Vec<usize>> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &e in active {
        adj[edges[e].0].push(edges[e].1);
    }
    let comp = tarjan(n, &adj);
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for &e in active {
        let (a, b, _) = &edges[e];
        if comp[*a] == comp[*b] {
            groups.entry(comp[*a]).or_default().push(e);
        }
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort();
    out
}

fn tarjan(n: usize, adj: &[Vec<usize>]) -> Vec<usize> {
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack = Vec::new();
    let mut counter = 0;
    let mut ncomp = 0;
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        let mut work: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut i)) = work.last_mut() {
            if *i < adj[v].len() {
                let w = adj[v][*i];
                *i += 1;
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                work.pop();
                if let Some(&(parent, _)) = work.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp[w] = ncomp;
                        if w == v {
                            break;
                        }
                    }
                    ncomp += 1;
                }
            }
        }
    }
    comp
}

/// Every chaining-consistent finite behaviour with at most `maxlen` steps, in
/// the given statuses, from every initial state.
pub fn enumerate_finite(u: &Universe, maxlen: usize, statuses: &[Status]) -> Vec<Behaviour> {
    let mut out = Vec::new();
    for init in 0..u.n_states() {
        let mut stack: Vec<(usize, Vec<PrimStep>)> = vec![(init, Vec::new())];
        while let Some((cur, steps)) = stack.pop() {
            for &st in statuses {
                out.push(Behaviour {
                    init,
                    steps: steps.clone(),
                    status: st,
                });
            }
            if steps.len() < maxlen {
                for s in u.steps_from(cur).iter().rev() {
                    let mut next = steps.clone();
                    next.push(*s);
                    stack.push((u.post(*s), next));
                }
            }
        }
    }
    out.sort_by(|a, b| {
        (a.init, a.steps.len(), &a.steps, a.status).cmp(&(
            b.init,
            b.steps.len(),
            &b.steps,
            b.status,
        ))
    });
    out
}

/// Closed walks of exactly `len` steps from `sigma` back to `sigma`.
pub fn loops_from(u: &Universe, sigma: usize, len: usize) -> Vec<Vec<PrimStep>> {
    let mut out = Vec::new();
    let mut stack: Vec<(usize, Vec<PrimStep>)> = vec![(sigma, Vec::new())];
    while let Some((cur, steps)) = stack.pop() {
        if steps.len() == len {
            if cur == sigma {
                out.push(steps);
            }
            continue;
        }
        for s in u.steps_from(cur).iter().rev() {
            let mut next = steps.clone();
            next.push(*s);
            stack.push((u.post(*s), next));
        }
    }
    out
}

/// Every lasso with `|u| + |v| ≤ maxlassolen`.
pub fn enumerate_lassos(u: &Universe, maxlassolen: usize) -> Vec<Lasso> {
    let mut out = Vec::new();
    if maxlassolen == 0 {
        return out;
    }
    for b in enumerate_finite(u, maxlassolen - 1, &[Status::Terminated]) {
        let mid = u_end(u, &b);
        for len in 1..=(maxlassolen - b.steps.len()) {
            for cycle in loops_from(u, mid, len) {
                out.push(Lasso {
                    init: b.init,
                    prefix: b.steps.clone(),
                    cycle,
                });
            }
        }
    }
    out
}

fn u_end(u: &Universe, b: &Behaviour) -> usize {
    b.steps.last().map_or(b.init, |s| u.post(*s))
}

/// Terminated and aborted behaviours up to `maxlen` and lassos up to
/// `maxlassolen`, each once.
pub fn enumerate_behaviours(u: &Universe, maxlen: usize, maxlassolen: usize) -> Vec<Observation> {
    let mut out: Vec<Observation> =
        enumerate_finite(u, maxlen, &[Status::Terminated, Status::Aborted])
            .into_iter()
            .map(Observation::Finite)
            .collect();
    out.extend(
        enumerate_lassos(u, maxlassolen)
            .into_iter()
            .map(Observation::Lasso),
    );
    out
}

/// Whether `(prefix, cycle)` is the canonical representative of its infinite
/// word: the cycle is primitive and the prefix does not end with the cycle's
/// last step.
pub fn canonical_lasso(prefix: &[PrimStep], cycle: &[PrimStep]) -> bool {
    if let (Some(a), Some(b)) = (prefix.last(), cycle.last()) {
        if a == b {
            return false;
        }
    }
    let n = cycle.len();
    for p in 1..n {
        if n % p == 0 && (0..n).all(|i| cycle[i] == cycle[i % p]) {
            return false;
        }
    }
    true
}
