//! Command terms with local normalization, and expansion of derived forms.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::hash::{Hash, Hasher};

use crate::stepalg::{bit, iter_bits, AtomicDesc, Bits, Renaming, SyncMode, Universe, SILENT};

/// Forms defined in terms of the core constructors.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Derived {
    Assert(Bits),
    AssumeStep(AtomicDesc),
    Skip,
    Chaos,
    Term,
    /// Program steps restricted to the given labels.
    Guar(Bits),
    /// Environment steps outside the given labels abort.
    Rely(Bits),
    /// Postcondition as a relation on state pairs.
    Spec(Bits),
    Atev(usize),
    CcsRestrict(Bits, Term),
    CspPar(Bits, Term, Term),
    Hide(Bits, Term),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Bot,
    Top,
    Nil,
    Test(Bits),
    Atom(AtomicDesc),
    Seq(Term, Term),
    Choice(Vec<Term>),
    Join(Vec<Term>),
    Sync(SyncMode, Term, Term),
    FinIter(Term),
    OmIter(Term),
    InfIter(Term),
    Rename(Arc<Renaming>, Term),
    Derived(Box<Derived>),
}

struct Node {
    hash: u64,
    size: u32,
    kind: Kind,
}

/// An immutable, shareable command term.
#[derive(Clone)]
pub struct Term(Arc<Node>);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Bot,
    Top,
    Nil,
    Seq,
    Choice,
    Join,
    Parallel,
    WeakConj,
    FinIter,
    OmIter,
    InfIter,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KernelError {
    Arity { variant: Variant, got: usize },
}

impl fmt::Display for KernelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelError::Arity { variant, got } => {
                write!(f, "{variant:?} does not take {got} operands")
            }
        }
    }
}

const K0: u64 = 0x9e37_79b9_7f4a_7c15;

fn mix(h: u64, x: u64) -> u64 {
    let mut z = (h ^ x).wrapping_add(K0).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 31)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 29)
}

fn mix_bits(h: u64, b: Bits) -> u64 {
    mix(mix(h, b as u64), (b >> 64) as u64)
}

fn mix_atom(h: u64, a: AtomicDesc) -> u64 {
    mix_bits(mix_bits(h, a.pgm), a.env)
}

fn hash_kind(k: &Kind) -> (u64, u32) {
    match k {
        Kind::Bot => (mix(1, 0), 1),
        Kind::Top => (mix(2, 0), 1),
        Kind::Nil => (mix(3, 0), 1),
        Kind::Test(p) => (mix_bits(4, *p), 1),
        Kind::Atom(a) => (mix_atom(5, *a), 1),
        Kind::Seq(a, b) => (mix(mix(6, a.hash()), b.hash()), 1 + a.size() + b.size()),
        Kind::Choice(v) => v
            .iter()
            .fold((7, 1), |(h, s), t| (mix(h, t.hash()), s + t.size())),
        Kind::Join(v) => v
            .iter()
            .fold((8, 1), |(h, s), t| (mix(h, t.hash()), s + t.size())),
        Kind::Sync(m, a, b) => (
            mix(mix(mix(9, *m as u64), a.hash()), b.hash()),
            1 + a.size() + b.size(),
        ),
        Kind::FinIter(b) => (mix(10, b.hash()), 1 + b.size()),
        Kind::OmIter(b) => (mix(11, b.hash()), 1 + b.size()),
        Kind::InfIter(b) => (mix(12, b.hash()), 1 + b.size()),
        Kind::Rename(r, b) => {
            let h = r.map.iter().fold(13, |h, &x| mix(h, x as u64));
            (mix(h, b.hash()), 1 + b.size())
        }
        Kind::Derived(d) => hash_derived(d),
    }
}

fn hash_derived(d: &Derived) -> (u64, u32) {
    match d {
        Derived::Assert(p) => (mix_bits(20, *p), 1),
        Derived::AssumeStep(a) => (mix_atom(21, *a), 1),
        Derived::Skip => (mix(22, 0), 1),
        Derived::Chaos => (mix(23, 0), 1),
        Derived::Term => (mix(24, 0), 1),
        Derived::Guar(g) => (mix_bits(25, *g), 1),
        Derived::Rely(r) => (mix_bits(26, *r), 1),
        Derived::Spec(q) => (mix_bits(27, *q), 1),
        Derived::Atev(e) => (mix(28, *e as u64), 1),
        Derived::CcsRestrict(e, c) => (mix(mix_bits(29, *e), c.hash()), 1 + c.size()),
        Derived::CspPar(e, c, d) => (
            mix(mix(mix_bits(30, *e), c.hash()), d.hash()),
            1 + c.size() + d.size(),
        ),
        Derived::Hide(e, c) => (mix(mix_bits(31, *e), c.hash()), 1 + c.size()),
    }
}

impl Term {
    pub fn from_kind(kind: Kind) -> Term {
        let (hash, size) = hash_kind(&kind);
        Term(Arc::new(Node { hash, size, kind }))
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }
    pub fn hash(&self) -> u64 {
        self.0.hash
    }
    pub fn size(&self) -> u32 {
        self.0.size
    }
    pub fn ptr_eq(&self, o: &Term) -> bool {
        Arc::ptr_eq(&self.0, &o.0)
    }

    pub fn bot() -> Term {
        Term::from_kind(Kind::Bot)
    }
    pub fn top() -> Term {
        Term::from_kind(Kind::Top)
    }
    pub fn nil() -> Term {
        Term::from_kind(Kind::Nil)
    }
    pub fn is_bot(&self) -> bool {
        matches!(self.kind(), Kind::Bot)
    }
    pub fn is_top(&self) -> bool {
        matches!(self.kind(), Kind::Top)
    }
    pub fn is_nil(&self) -> bool {
        matches!(self.kind(), Kind::Nil)
    }

    pub fn atom(a: AtomicDesc) -> Term {
        if a.is_top() {
            Term::top()
        } else {
            Term::from_kind(Kind::Atom(a))
        }
    }

    pub fn as_atom(&self) -> Option<AtomicDesc> {
        match self.kind() {
            Kind::Atom(a) => Some(*a),
            Kind::Top => Some(AtomicDesc::TOP),
            _ => None,
        }
    }

    pub fn sync(mode: SyncMode, a: Term, b: Term) -> Term {
        Term::from_kind(Kind::Sync(mode, a, b))
    }
    pub fn fin_iter(b: Term) -> Term {
        Term::from_kind(Kind::FinIter(b))
    }
    pub fn om_iter(b: Term) -> Term {
        Term::from_kind(Kind::OmIter(b))
    }
    pub fn inf_iter(b: Term) -> Term {
        Term::from_kind(Kind::InfIter(b))
    }
    pub fn rename(r: Arc<Renaming>, b: Term) -> Term {
        Term::from_kind(Kind::Rename(r, b))
    }
    pub fn derived(d: Derived) -> Term {
        Term::from_kind(Kind::Derived(Box::new(d)))
    }
    pub fn skip() -> Term {
        Term::derived(Derived::Skip)
    }
    pub fn chaos() -> Term {
        Term::derived(Derived::Chaos)
    }
    pub fn term_cmd() -> Term {
        Term::derived(Derived::Term)
    }
    pub fn assume_step(a: AtomicDesc) -> Term {
        Term::derived(Derived::AssumeStep(a))
    }
    pub fn atev(e: usize) -> Term {
        Term::derived(Derived::Atev(e))
    }

    /// Elements of a right-associated sequence, head first.
    pub fn seq_elems(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        let mut cur = self;
        while let Kind::Seq(a, b) = cur.kind() {
            out.push(a);
            cur = b;
        }
        out.push(cur);
        out
    }

    /// True when no derived-form node occurs.
    pub fn is_core(&self) -> bool {
        match self.kind() {
            Kind::Derived(_) => false,
            Kind::Seq(a, b) | Kind::Sync(_, a, b) => a.is_core() && b.is_core(),
            Kind::Choice(v) | Kind::Join(v) => v.iter().all(Term::is_core),
            Kind::FinIter(b) | Kind::OmIter(b) | Kind::InfIter(b) | Kind::Rename(_, b) => {
                b.is_core()
            }
            _ => true,
        }
    }

    pub fn depth(&self) -> usize {
        match self.kind() {
            Kind::Seq(a, b) | Kind::Sync(_, a, b) => 1 + a.depth().max(b.depth()),
            Kind::Choice(v) | Kind::Join(v) => 1 + v.iter().map(Term::depth).max().unwrap_or(0),
            Kind::FinIter(b) | Kind::OmIter(b) | Kind::InfIter(b) | Kind::Rename(_, b) => {
                1 + b.depth()
            }
            Kind::Derived(d) => match &**d {
                Derived::CcsRestrict(_, c) | Derived::Hide(_, c) => 1 + c.depth(),
                Derived::CspPar(_, c, e) => 1 + c.depth().max(e.depth()),
                _ => 0,
            },
            _ => 0,
        }
    }
}

impl PartialEq for Term {
    fn eq(&self, o: &Term) -> bool {
        self.ptr_eq(o) || (self.0.hash == o.0.hash && self.0.kind == o.0.kind)
    }
}
impl Eq for Term {}

impl Ord for Term {
    fn cmp(&self, o: &Term) -> Ordering {
        if self.ptr_eq(o) {
            return Ordering::Equal;
        }
        self.0
            .hash
            .cmp(&o.0.hash)
            .then_with(|| self.0.kind.cmp(&o.0.kind))
    }
}
impl PartialOrd for Term {
    fn partial_cmp(&self, o: &Term) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Hash for Term {
    fn hash<H: Hasher>(&self, h: &mut H) {
        h.write_u64(self.0.hash);
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(&self.0.kind, f)
    }
}

/// Smart constructors. They need the universe to complement tests and to
/// fuse tests into atomic steps.
impl Universe {
    pub fn test(&self, p: Bits) -> Term {
        let p = p & self.full_states();
        if p == 0 {
            Term::top()
        } else if p == self.full_states() {
            Term::nil()
        } else {
            Term::from_kind(Kind::Test(p))
        }
    }

    pub fn as_test(&self, t: &Term) -> Option<Bits> {
        match t.kind() {
            Kind::Test(p) => Some(*p),
            Kind::Nil => Some(self.full_states()),
            Kind::Top => Some(0),
            _ => None,
        }
    }

    pub fn seq(&self, a: Term, b: Term) -> Term {
        match a.kind() {
            Kind::Nil => return b,
            Kind::Top | Kind::Bot => return a,
            Kind::Seq(x, y) => {
                let rest = self.seq(y.clone(), b);
                return self.seq(x.clone(), rest);
            }
            _ => {}
        }
        if b.is_nil() {
            return a;
        }
        if let Kind::Test(p) = a.kind() {
            let (head, tail) = match b.kind() {
                Kind::Seq(h, t) => (h, Some(t)),
                _ => (&b, None),
            };
            let fused = match head.kind() {
                Kind::Test(q) => Some(self.test(p & q)),
                Kind::Atom(x) => Some(Term::atom(self.restrict_pre(*x, *p))),
                _ => None,
            };
            if let Some(f) = fused {
                return match tail {
                    Some(t) => self.seq(f, t.clone()),
                    None => f,
                };
            }
        }
        Term::from_kind(Kind::Seq(a, b))
    }

    pub fn seq_all<I: IntoIterator<Item = Term>>(&self, items: I) -> Term {
        let v: Vec<Term> = items.into_iter().collect();
        v.into_iter()
            .rev()
            .fold(Term::nil(), |acc, t| self.seq(t, acc))
    }

    pub fn choice<I: IntoIterator<Item = Term>>(&self, items: I) -> Term {
        let mut out: Vec<Term> = Vec::new();
        let mut atom: Option<AtomicDesc> = None;
        let mut test: Option<Bits> = None;
        let mut stack: Vec<Term> = items.into_iter().collect();
        while let Some(t) = stack.pop() {
            match t.kind() {
                Kind::Choice(v) => stack.extend(v.iter().cloned()),
                Kind::Bot => return t,
                Kind::Top => {}
                Kind::Atom(a) => atom = Some(atom.map_or(*a, |x| x.meet(*a))),
                Kind::Test(p) => test = Some(test.unwrap_or(0) | p),
                Kind::Nil => test = Some(self.full_states()),
                _ => out.push(t),
            }
        }
        if let Some(a) = atom {
            out.push(Term::atom(a));
        }
        if let Some(p) = test {
            out.push(self.test(p));
        }
        finish_set(out, Term::top(), Kind::Choice)
    }

    pub fn join<I: IntoIterator<Item = Term>>(&self, items: I) -> Term {
        let mut out: Vec<Term> = Vec::new();
        let mut atom: Option<AtomicDesc> = None;
        let mut test: Option<Bits> = None;
        let mut stack: Vec<Term> = items.into_iter().collect();
        while let Some(t) = stack.pop() {
            match t.kind() {
                Kind::Join(v) => stack.extend(v.iter().cloned()),
                Kind::Top => return t,
                Kind::Bot => {}
                Kind::Atom(a) => atom = Some(atom.map_or(*a, |x| x.join(*a))),
                Kind::Test(p) => test = Some(test.map_or(*p, |x| x & p)),
                Kind::Nil => test = Some(test.unwrap_or(self.full_states())),
                _ => out.push(t),
            }
        }
        match (atom, test) {
            (Some(_), Some(_)) => return Term::top(),
            (Some(a), None) => out.push(Term::atom(a)),
            (None, Some(p)) => out.push(self.test(p)),
            (None, None) => {}
        }
        if out.iter().any(Term::is_top) {
            return Term::top();
        }
        finish_set(out, Term::bot(), Kind::Join)
    }

    pub fn neg_test(&self, p: Bits) -> Term {
        self.test(!p)
    }

    pub fn assert(&self, p: Bits) -> Term {
        Term::derived(Derived::Assert(p & self.full_states()))
    }
    pub fn guar(&self, g: Bits) -> Term {
        Term::derived(Derived::Guar(g & self.full_labels()))
    }
    pub fn rely(&self, r: Bits) -> Term {
        Term::derived(Derived::Rely(r & self.full_labels()))
    }
    pub fn spec(&self, q: Bits) -> Term {
        Term::derived(Derived::Spec(q & self.full_pairs()))
    }
    pub fn ccs_restrict(&self, es: Bits, c: Term) -> Term {
        Term::derived(Derived::CcsRestrict(es & self.full_events(), c))
    }
    pub fn csp_par(&self, es: Bits, c: Term, d: Term) -> Term {
        Term::derived(Derived::CspPar(es & self.full_events(), c, d))
    }
    pub fn hide(&self, es: Bits, c: Term) -> Term {
        Term::derived(Derived::Hide(es & self.full_events(), c))
    }

    /// Generic constructor over the core variants.
    pub fn construct(&self, v: Variant, ops: Vec<Term>) -> Result<Term, KernelError> {
        let n = ops.len();
        let bad = || Err(KernelError::Arity { variant: v, got: n });
        let mut it = ops.into_iter();
        match v {
            Variant::Bot | Variant::Top | Variant::Nil if n != 0 => bad(),
            Variant::Bot => Ok(Term::bot()),
            Variant::Top => Ok(Term::top()),
            Variant::Nil => Ok(Term::nil()),
            Variant::Seq | Variant::Parallel | Variant::WeakConj if n != 2 => bad(),
            Variant::Seq => {
                let (a, b) = (it.next().unwrap(), it.next().unwrap());
                Ok(self.seq(a, b))
            }
            Variant::Parallel | Variant::WeakConj => {
                let m = if v == Variant::Parallel {
                    SyncMode::Parallel
                } else {
                    SyncMode::WeakConj
                };
                Ok(Term::sync(m, it.next().unwrap(), it.next().unwrap()))
            }
            Variant::Choice | Variant::Join if n == 0 => bad(),
            Variant::Choice => Ok(self.choice(it)),
            Variant::Join => Ok(self.join(it)),
            Variant::FinIter | Variant::OmIter | Variant::InfIter if n != 1 => bad(),
            Variant::FinIter => Ok(Term::fin_iter(it.next().unwrap())),
            Variant::OmIter => Ok(Term::om_iter(it.next().unwrap())),
            Variant::InfIter => Ok(Term::inf_iter(it.next().unwrap())),
        }
    }

    /// Renaming that strips the synchronisation tag from events in `es`.
    pub fn phi_hat(&self, es: Bits) -> Renaming {
        self.event_renaming("phi_hat", |e| match self.untag_of(e) {
            Some(b) if es & bit(b) != 0 => b,
            _ => e,
        })
    }

    /// Renaming that turns events in `es` into the silent event.
    pub fn hiding(&self, es: Bits) -> Renaming {
        self.event_renaming("hide", |e| if es & bit(e) != 0 { SILENT } else { e })
    }

    /// Rebuild `t` with every derived form replaced by its definition.
    pub fn expand(&self, t: &Term) -> Term {
        match t.kind() {
            Kind::Bot | Kind::Top | Kind::Nil | Kind::Test(_) | Kind::Atom(_) => t.clone(),
            Kind::Seq(a, b) => self.seq(self.expand(a), self.expand(b)),
            Kind::Choice(v) => self.choice(v.iter().map(|x| self.expand(x))),
            Kind::Join(v) => self.join(v.iter().map(|x| self.expand(x))),
            Kind::Sync(m, a, b) => Term::sync(*m, self.expand(a), self.expand(b)),
            Kind::FinIter(b) => Term::fin_iter(self.expand(b)),
            Kind::OmIter(b) => Term::om_iter(self.expand(b)),
            Kind::InfIter(b) => Term::inf_iter(self.expand(b)),
            Kind::Rename(r, b) => Term::rename(r.clone(), self.expand(b)),
            Kind::Derived(d) => self.expand_one(d),
        }
    }

    fn expand_one(&self, d: &Derived) -> Term {
        let eps_om = || Term::om_iter(Term::atom(self.eps_bar()));
        match d {
            Derived::Assert(p) => {
                self.choice([self.test(*p), self.seq(self.neg_test(*p), Term::bot())])
            }
            Derived::AssumeStep(a) => self.expand_assume(*a),
            Derived::Skip => eps_om(),
            Derived::Chaos => Term::om_iter(Term::atom(self.alpha())),
            Derived::Term => self.seq(Term::fin_iter(Term::atom(self.alpha())), eps_om()),
            Derived::Guar(g) => {
                Term::om_iter(self.choice([Term::atom(self.pi(*g)), Term::atom(self.eps_bar())]))
            }
            Derived::Rely(r) => Term::om_iter(self.expand_assume(self.pi_bar().meet(self.eps(*r)))),
            Derived::Spec(q) => {
                let body = self.expand_one(&Derived::Term);
                self.choice((0..self.n_states()).map(|s| {
                    let post = self.image(*q, bit(s));
                    self.seq_all([self.test(bit(s)), body.clone(), self.test(post)])
                }))
            }
            Derived::Atev(e) => self.seq_all([
                eps_om(),
                Term::atom(self.pi(self.lift_events(bit(*e)))),
                eps_om(),
            ]),
            Derived::CcsRestrict(es, c) => {
                let allowed = self.full_events() & !es;
                Term::sync(
                    SyncMode::WeakConj,
                    self.expand(c),
                    self.expand_one(&Derived::Guar(self.lift_events(allowed))),
                )
            }
            Derived::CspPar(es, c, d) => {
                let untagged = self.untagged_events();
                let allowed = self.tagged(*es) | (untagged & !es);
                let inner = Term::sync(
                    SyncMode::WeakConj,
                    Term::sync(SyncMode::Parallel, self.expand(c), self.expand(d)),
                    self.expand_one(&Derived::Guar(self.lift_events(allowed))),
                );
                Term::rename(Arc::new(self.phi_hat(*es)), inner)
            }
            Derived::Hide(es, c) => Term::rename(Arc::new(self.hiding(*es)), self.expand(c)),
        }
    }

    fn expand_assume(&self, a: AtomicDesc) -> Term {
        self.choice([
            Term::atom(a),
            self.seq(Term::atom(self.negate(a)), Term::bot()),
        ])
    }

    /// `c^i` as a sequence of `i` copies.
    pub fn power(&self, c: &Term, i: usize) -> Term {
        self.seq_all(vec![c.clone(); i])
    }

    /// Relation bits of the identity on states, lifted to labels.
    pub fn identity_labels(&self) -> Bits {
        self.lift_rel(self.identity_pairs())
    }

    pub fn states_in(&self, p: Bits) -> impl Iterator<Item = usize> {
        iter_bits(p & self.full_states())
    }
}

fn finish_set(mut out: Vec<Term>, empty: Term, mk: fn(Vec<Term>) -> Kind) -> Term {
    out.sort();
    out.dedup();
    match out.len() {
        0 => empty,
        1 => out.pop().unwrap(),
        _ => Term::from_kind(mk(out)),
    }
}
