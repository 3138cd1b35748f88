//! Direct denotation of finite behaviours, computed bottom-up over the term
//! structure as explicit sets. It shares nothing with the derivative engine
//! beyond the universe's step tables.
//!
//! A denotation maps each initial state to the behaviours it allows, keyed by
//! trace with a status mask. Sets are abort-closed: once a trace aborts, every
//! extension is present with every status.

use std::collections::HashMap;

use sra::kernel::{Kind, Term};
use sra::stepalg::{AtomicDesc, ParStyle, PrimStep, Renaming, SyncMode, Universe};

pub const T: u8 = 1;
pub const A: u8 = 2;
pub const I: u8 = 4;

pub type Trace = Vec<PrimStep>;
pub type Set = HashMap<Trace, u8>;
pub type Den = Vec<Set>;

/// Core terms the oracle understands, mirroring the algebra's operators.
#[derive(Clone, Debug)]
pub enum Cmd {
    Bot,
    Top,
    Nil,
    Test(u128),
    Atom(AtomicDesc),
    Seq(Box<Cmd>, Box<Cmd>),
    Choice(Vec<Cmd>),
    Conj(Vec<Cmd>),
    Sync(SyncMode, Box<Cmd>, Box<Cmd>),
    Fin(Box<Cmd>),
    Om(Box<Cmd>),
    Inf(Box<Cmd>),
    Rename(Renaming, Box<Cmd>),
}

impl Cmd {
    /// Reads an expanded kernel term.
    pub fn from_term(t: &Term) -> Cmd {
        let b = |t: &Term| Box::new(Cmd::from_term(t));
        match t.kind() {
            Kind::Bot => Cmd::Bot,
            Kind::Top => Cmd::Top,
            Kind::Nil => Cmd::Nil,
            Kind::Test(p) => Cmd::Test(*p),
            Kind::Atom(a) => Cmd::Atom(*a),
            Kind::Seq(x, y) => Cmd::Seq(b(x), b(y)),
            Kind::Choice(v) => Cmd::Choice(v.iter().map(Cmd::from_term).collect()),
            Kind::Join(v) => Cmd::Conj(v.iter().map(Cmd::from_term).collect()),
            Kind::Sync(m, x, y) => Cmd::Sync(*m, b(x), b(y)),
            Kind::FinIter(x) => Cmd::Fin(b(x)),
            Kind::OmIter(x) => Cmd::Om(b(x)),
            Kind::InfIter(x) => Cmd::Inf(b(x)),
            Kind::Rename(r, x) => Cmd::Rename((**r).clone(), b(x)),
            Kind::Derived(_) => panic!("expand derived forms before reading them"),
        }
    }

    /// Builds the kernel term with no normalization at all.
    pub fn raw(&self) -> Term {
        let k = match self {
            Cmd::Bot => Kind::Bot,
            Cmd::Top => Kind::Top,
            Cmd::Nil => Kind::Nil,
            Cmd::Test(p) => Kind::Test(*p),
            Cmd::Atom(a) => Kind::Atom(*a),
            Cmd::Seq(x, y) => Kind::Seq(x.raw(), y.raw()),
            Cmd::Choice(v) => Kind::Choice(v.iter().map(Cmd::raw).collect()),
            Cmd::Conj(v) => Kind::Join(v.iter().map(Cmd::raw).collect()),
            Cmd::Sync(m, x, y) => Kind::Sync(*m, x.raw(), y.raw()),
            Cmd::Fin(x) => Kind::FinIter(x.raw()),
            Cmd::Om(x) => Kind::OmIter(x.raw()),
            Cmd::Inf(x) => Kind::InfIter(x.raw()),
            Cmd::Rename(r, x) => Kind::Rename(std::sync::Arc::new(r.clone()), x.raw()),
        };
        Term::from_kind(k)
    }

    /// Builds the kernel term through the normalizing constructors.
    pub fn build(&self, u: &Universe) -> Term {
        match self {
            Cmd::Bot => Term::bot(),
            Cmd::Top => Term::top(),
            Cmd::Nil => Term::nil(),
            Cmd::Test(p) => u.test(*p),
            Cmd::Atom(a) => Term::atom(*a),
            Cmd::Seq(x, y) => u.seq(x.build(u), y.build(u)),
            Cmd::Choice(v) => u.choice(v.iter().map(|c| c.build(u))),
            Cmd::Conj(v) => u.join(v.iter().map(|c| c.build(u))),
            Cmd::Sync(m, x, y) => Term::sync(*m, x.build(u), y.build(u)),
            Cmd::Fin(x) => Term::fin_iter(x.build(u)),
            Cmd::Om(x) => Term::om_iter(x.build(u)),
            Cmd::Inf(x) => Term::inf_iter(x.build(u)),
            Cmd::Rename(r, x) => Term::rename(std::sync::Arc::new(r.clone()), x.build(u)),
        }
    }
}

pub struct Oracle<'u> {
    u: &'u Universe,
    n: usize,
    /// Every trace of length at most `n` from each state.
    traces: Vec<Vec<Trace>>,
}

fn has(a: AtomicDesc, s: PrimStep) -> bool {
    let m = if s.is_env() { a.env } else { a.pgm };
    (m >> s.label()) & 1 == 1
}

impl<'u> Oracle<'u> {
    pub fn new(u: &'u Universe, n: usize) -> Self {
        let traces = (0..u.n_states())
            .map(|s| {
                let mut all = vec![Vec::new()];
                let mut frontier: Vec<(Trace, usize)> = vec![(Vec::new(), s)];
                for _ in 0..n {
                    let mut next = Vec::new();
                    for (w, at) in &frontier {
                        for &p in u.steps_from(*at) {
                            let mut w2 = w.clone();
                            w2.push(p);
                            all.push(w2.clone());
                            next.push((w2, u.post(p)));
                        }
                    }
                    frontier = next;
                }
                all
            })
            .collect();
        Oracle { u, n, traces }
    }

    pub fn traces(&self, s: usize) -> &[Trace] {
        &self.traces[s]
    }

    fn end(&self, s: usize, w: &[PrimStep]) -> usize {
        w.last().map_or(s, |p| self.u.post(*p))
    }

    fn close(&self, s: usize, mut set: Set) -> Set {
        let aborts: Vec<Trace> = set
            .iter()
            .filter(|(_, m)| *m & A != 0)
            .map(|(w, _)| w.clone())
            .collect();
        for w in aborts {
            let e = self.end(s, &w);
            for v in &self.traces[e] {
                if w.len() + v.len() > self.n {
                    continue;
                }
                let mut wv = w.clone();
                wv.extend_from_slice(v);
                set.insert(wv, T | A | I);
            }
        }
        set
    }

    fn states(&self) -> std::ops::Range<usize> {
        0..self.u.n_states()
    }

    /// The parallel or weak-conjunction combination of two primitive steps.
    fn combine(&self, m: SyncMode, a: PrimStep, b: PrimStep) -> Option<PrimStep> {
        match m {
            SyncMode::WeakConj => (a == b).then_some(a),
            SyncMode::Parallel => {
                let (ea, eb) = (a.is_env(), b.is_env());
                if a.label() == b.label() {
                    match (ea, eb) {
                        (true, true) => return Some(a),
                        (false, true) => return Some(a),
                        (true, false) => return Some(b),
                        (false, false) => {}
                    }
                }
                if ea || eb || self.u.style() == ParStyle::Interleave {
                    return None;
                }
                // two program steps: consult the instantiation's table
                let one = |p: PrimStep| AtomicDesc::new(1 << p.label(), 0);
                let g = self.u.sync_prim(m, one(a), one(b));
                match g.pgm.count_ones() {
                    0 => None,
                    1 => Some(PrimStep::pgm(g.pgm.trailing_zeros() as usize)),
                    _ => panic!("ambiguous synchronisation of two steps"),
                }
            }
        }
    }

    fn seq_raw(&self, a: &Den, b: &Den) -> Den {
        self.states()
            .map(|s| {
                let mut out = Set::new();
                for (w, &m) in &a[s] {
                    if m & (A | I) != 0 {
                        *out.entry(w.clone()).or_default() |= m & (A | I);
                    }
                }
                for (w, &m) in &a[s] {
                    if m & T == 0 {
                        continue;
                    }
                    let e = self.end(s, w);
                    for (v, &mv) in &b[e] {
                        if w.len() + v.len() > self.n {
                            continue;
                        }
                        let mut wv = w.clone();
                        wv.extend_from_slice(v);
                        *out.entry(wv).or_default() |= mv;
                    }
                }
                out
            })
            .collect()
    }

    fn closed(&self, d: Den) -> Den {
        d.into_iter()
            .enumerate()
            .map(|(s, set)| self.close(s, set))
            .collect()
    }

    fn base(&self, f: impl Fn(usize) -> Set) -> Den {
        self.states().map(f).collect()
    }

    fn empty_start() -> Set {
        Set::from([(Vec::new(), I)])
    }

    /// The finite behaviours of `c`, by initial state.
    pub fn den(&self, c: &Cmd) -> Den {
        match c {
            Cmd::Bot => self.closed(self.base(|_| Set::from([(Vec::new(), T | A | I)]))),
            Cmd::Top => self.base(|_| Self::empty_start()),
            Cmd::Nil => self.base(|_| Set::from([(Vec::new(), T | I)])),
            Cmd::Test(p) => self.base(|s| {
                if (p >> s) & 1 == 1 {
                    Set::from([(Vec::new(), T | I)])
                } else {
                    Self::empty_start()
                }
            }),
            Cmd::Atom(a) => self.base(|s| {
                let mut set = Self::empty_start();
                for &p in self.u.steps_from(s) {
                    if has(*a, p) && self.n >= 1 {
                        set.insert(vec![p], T | I);
                    }
                }
                set
            }),
            Cmd::Seq(x, y) => self.closed(self.seq_raw(&self.den(x), &self.den(y))),
            Cmd::Choice(v) => {
                let mut out: Den = self.base(|_| Self::empty_start());
                for d in v.iter().map(|c| self.den(c)) {
                    for (s, set) in d.into_iter().enumerate() {
                        for (w, m) in set {
                            *out[s].entry(w).or_default() |= m;
                        }
                    }
                }
                out
            }
            Cmd::Conj(v) => {
                let ds: Vec<Den> = v.iter().map(|c| self.den(c)).collect();
                let Some((first, rest)) = ds.split_first() else {
                    return self.den(&Cmd::Bot);
                };
                self.states()
                    .map(|s| {
                        first[s]
                            .iter()
                            .filter_map(|(w, &m)| {
                                let m = rest
                                    .iter()
                                    .fold(m, |m, d| m & d[s].get(w).copied().unwrap_or(0));
                                (m != 0).then(|| (w.clone(), m))
                            })
                            .collect()
                    })
                    .collect()
            }
            Cmd::Sync(mode, x, y) => {
                let (dx, dy) = (self.den(x), self.den(y));
                let d = self.base(|s| {
                    let mut out = Set::new();
                    for (w1, &m1) in &dx[s] {
                        for (w2, &m2) in &dy[s] {
                            if w1.len() != w2.len() {
                                continue;
                            }
                            let Some(w) = w1
                                .iter()
                                .zip(w2)
                                .map(|(a, b)| self.combine(*mode, *a, *b))
                                .collect::<Option<Trace>>()
                            else {
                                continue;
                            };
                            let mut m = 0;
                            if m1 & m2 & T != 0 {
                                m |= T;
                            }
                            if m1 & m2 & I != 0 {
                                m |= I;
                            }
                            if (m1 & A != 0 && m2 & I != 0) || (m2 & A != 0 && m1 & I != 0) {
                                m |= A;
                            }
                            if m != 0 {
                                *out.entry(w).or_default() |= m;
                            }
                        }
                    }
                    out
                });
                self.closed(d)
            }
            Cmd::Fin(x) => self.star(&self.den(x)),
            Cmd::Om(x) => {
                let dx = self.den(x);
                let mut f = self.star(&dx);
                self.stutter(&dx, &mut f);
                self.closed(f)
            }
            Cmd::Inf(x) => {
                let dx = self.den(x);
                let f = self.star(&dx);
                let mut d = self.seq_raw(&f, &dx);
                for set in d.iter_mut() {
                    set.retain(|_, m| {
                        *m &= A | I;
                        *m != 0
                    });
                }
                let mut stut = f.clone();
                self.stutter(&dx, &mut stut);
                for (s, set) in stut.into_iter().enumerate() {
                    for (w, m) in set {
                        if m & A != 0 {
                            *d[s].entry(w).or_default() |= A | I;
                        }
                    }
                }
                self.closed(d)
            }
            Cmd::Rename(r, x) => {
                let dx = self.den(x);
                let d = self.base(|s| {
                    let mut out = Set::new();
                    for (w, &m) in &dx[s] {
                        let w2: Trace = w.iter().map(|p| r.apply(*p)).collect();
                        *out.entry(w2).or_default() |= m;
                    }
                    out
                });
                self.closed(d)
            }
        }
    }

    /// Least fixed point of `X = nil ∨ b;X`.
    fn star(&self, b: &Den) -> Den {
        let nil = self.den(&Cmd::Nil);
        let mut x: Den = self.base(|_| Set::new());
        loop {
            let mut next = self.seq_raw(b, &x);
            for (s, set) in nil.iter().enumerate() {
                for (w, m) in set {
                    *next[s].entry(w.clone()).or_default() |= m;
                }
            }
            let next = self.closed(next);
            if next == x {
                return x;
            }
            x = next;
        }
    }

    /// Unboundedly many iterations that take no step abort: wherever a
    /// finished iteration sequence leaves `b` able to terminate at once.
    fn stutter(&self, b: &Den, f: &mut Den) {
        for s in self.states() {
            let ends: Vec<Trace> = f[s]
                .iter()
                .filter(|(w, m)| {
                    *m & T != 0
                        && b[self.end(s, w)]
                            .get(&Vec::new())
                            .is_some_and(|m| m & T != 0)
                })
                .map(|(w, _)| w.clone())
                .collect();
            for w in ends {
                *f[s].entry(w).or_default() |= A | I;
            }
        }
    }
}

/// Whether the finite behaviours of `d` include those of `c` (`c ⊑ d` read
/// on the oracle's sets), listing the first offending behaviour if not.
pub fn included(d: &Den, c: &Den) -> Result<(), (usize, Trace, u8)> {
    for (s, set) in d.iter().enumerate() {
        for (w, &m) in set {
            let mc = c[s].get(w).copied().unwrap_or(0);
            if m & !mc != 0 {
                return Err((s, w.clone(), m & !mc));
            }
        }
    }
    Ok(())
}
