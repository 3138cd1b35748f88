//! Finite universes, the Boolean algebra of atomic steps and the primitive
//! synchronisation tables.
//!
//! A step label is a triple `(σ, e, σ′)`. The relational instantiation is the
//! special case with the single event ι, the event instantiation the case with
//! one state. Labels are packed into a `u128` bitset, which bounds a universe
//! to 128 labels.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

pub type Bits = u128;

pub const MAX_LABELS: usize = 128;

#[inline]
pub fn bit(i: usize) -> Bits {
    1u128 << i
}

#[inline]
pub fn low_mask(n: usize) -> Bits {
    if n >= 128 {
        !0
    } else {
        (1u128 << n) - 1
    }
}

pub fn iter_bits(b: Bits) -> impl Iterator<Item = usize> {
    let mut rest = b;
    core::iter::from_fn(move || {
        if rest == 0 {
            None
        } else {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(i)
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LabelKind {
    Relational,
    Event,
    Combined,
}

/// How two program steps combine under parallel composition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ParStyle {
    /// Program steps never synchronise (shared-memory interleaving).
    Interleave,
    /// `π(e) ∥ π(ē) = π(ι)`.
    Ccs,
    /// `π(e) ∥ π(e) = π(ê)` for `e ≠ ι`.
    Csp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SyncMode {
    Parallel,
    WeakConj,
}

impl SyncMode {
    pub fn symbol(self) -> &'static str {
        match self {
            SyncMode::Parallel => "||",
            SyncMode::WeakConj => "&&",
        }
    }
}

/// An atomic step command: program labels and environment labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct AtomicDesc {
    pub pgm: Bits,
    pub env: Bits,
}

impl AtomicDesc {
    pub const TOP: AtomicDesc = AtomicDesc { pgm: 0, env: 0 };

    pub fn new(pgm: Bits, env: Bits) -> Self {
        AtomicDesc { pgm, env }
    }

    pub fn is_top(self) -> bool {
        self.pgm == 0 && self.env == 0
    }

    /// Nondeterministic choice on steps (union).
    pub fn meet(self, o: Self) -> Self {
        AtomicDesc::new(self.pgm | o.pgm, self.env | o.env)
    }

    /// Conjunction on steps (intersection).
    pub fn join(self, o: Self) -> Self {
        AtomicDesc::new(self.pgm & o.pgm, self.env & o.env)
    }

    pub fn contains(self, s: PrimStep) -> bool {
        let b = bit(s.label());
        if s.is_env() {
            self.env & b != 0
        } else {
            self.pgm & b != 0
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoolOp {
    Meet,
    Join,
    Complement,
}

/// A primitive program or environment step on one label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrimStep(pub u16);

impl PrimStep {
    pub fn pgm(label: usize) -> Self {
        PrimStep((label as u16) << 1)
    }
    pub fn env(label: usize) -> Self {
        PrimStep(((label as u16) << 1) | 1)
    }
    pub fn label(self) -> usize {
        (self.0 >> 1) as usize
    }
    pub fn is_env(self) -> bool {
        self.0 & 1 == 1
    }
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A label map on program steps. Environment steps are left unchanged.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Renaming {
    pub name: String,
    pub map: Vec<u16>,
}

impl Renaming {
    pub fn apply(&self, s: PrimStep) -> PrimStep {
        if s.is_env() {
            s
        } else {
            PrimStep::pgm(self.map[s.label()] as usize)
        }
    }

    pub fn apply_atom(&self, a: AtomicDesc) -> AtomicDesc {
        let mut pgm = 0;
        for l in iter_bits(a.pgm) {
            pgm |= bit(self.map[l] as usize);
        }
        AtomicDesc::new(pgm, a.env)
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &m)| i == m as usize)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UniverseError {
    Empty(&'static str),
    TooLarge(usize),
    Duplicate(String),
    Unknown(String),
    Invalid(String),
}

impl fmt::Display for UniverseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UniverseError::Empty(what) => write!(f, "universe has no {what}"),
            UniverseError::TooLarge(n) => {
                write!(f, "{n} step labels exceed the limit of {MAX_LABELS}")
            }
            UniverseError::Duplicate(n) => write!(f, "duplicate name `{n}`"),
            UniverseError::Unknown(n) => write!(f, "unknown name `{n}`"),
            UniverseError::Invalid(m) => f.write_str(m),
        }
    }
}

/// Finite model: states, events, and named predicates, relations, event
/// sets and renamings.
#[derive(Clone, Debug)]
pub struct Universe {
    kind: LabelKind,
    style: ParStyle,
    states: Vec<String>,
    events: Vec<String>,
    complement: Vec<Option<usize>>,
    tag: Vec<Option<usize>>,
    untag: Vec<Option<usize>>,
    n_labels: usize,
    predicates: Vec<(String, Bits)>,
    relations: Vec<(String, Bits)>,
    eventsets: Vec<(String, Bits)>,
    renamings: Vec<(String, Arc<Renaming>)>,
    par_pairs: Vec<Vec<(PrimStep, PrimStep)>>,
    steps_from: Vec<Vec<PrimStep>>,
}

pub const SILENT: usize = 0;

impl Universe {
    /// Relational universe over the given state names.
    pub fn relational(states: &[&str]) -> Result<Universe, UniverseError> {
        UniverseBuilder::new(LabelKind::Relational)
            .states(states)
            .build()
    }

    /// Event universe with silent event `iota` plus the given base events.
    pub fn events(base: &[&str], ccs: bool, csp: bool) -> Result<Universe, UniverseError> {
        UniverseBuilder::new(LabelKind::Event)
            .events(base)
            .ccs(ccs)
            .csp(csp)
            .build()
    }

    pub fn kind(&self) -> LabelKind {
        self.kind
    }
    pub fn style(&self) -> ParStyle {
        self.style
    }
    pub fn n_states(&self) -> usize {
        self.states.len()
    }
    pub fn n_events(&self) -> usize {
        self.events.len()
    }
    pub fn n_labels(&self) -> usize {
        self.n_labels
    }
    pub fn n_steps(&self) -> usize {
        2 * self.n_labels
    }
    pub fn state_names(&self) -> &[String] {
        &self.states
    }
    pub fn event_names(&self) -> &[String] {
        &self.events
    }
    pub fn state_name(&self, s: usize) -> &str {
        &self.states[s]
    }
    pub fn event_name(&self, e: usize) -> &str {
        &self.events[e]
    }
    pub fn complement_of(&self, e: usize) -> Option<usize> {
        self.complement[e]
    }
    pub fn tag_of(&self, e: usize) -> Option<usize> {
        self.tag[e]
    }
    pub fn untag_of(&self, e: usize) -> Option<usize> {
        self.untag[e]
    }
    pub fn is_tagged(&self, e: usize) -> bool {
        self.untag[e].is_some()
    }

    pub fn full_states(&self) -> Bits {
        low_mask(self.states.len())
    }
    pub fn full_labels(&self) -> Bits {
        low_mask(self.n_labels)
    }
    pub fn full_pairs(&self) -> Bits {
        low_mask(self.states.len() * self.states.len())
    }
    pub fn full_events(&self) -> Bits {
        low_mask(self.events.len())
    }

    pub fn label(&self, pre: usize, ev: usize, post: usize) -> usize {
        (pre * self.events.len() + ev) * self.states.len() + post
    }
    pub fn label_pre(&self, l: usize) -> usize {
        l / (self.events.len() * self.states.len())
    }
    pub fn label_event(&self, l: usize) -> usize {
        (l / self.states.len()) % self.events.len()
    }
    pub fn label_post(&self, l: usize) -> usize {
        l % self.states.len()
    }
    pub fn pre(&self, s: PrimStep) -> usize {
        self.label_pre(s.label())
    }
    pub fn post(&self, s: PrimStep) -> usize {
        self.label_post(s.label())
    }

    pub fn pair(&self, a: usize, b: usize) -> usize {
        a * self.states.len() + b
    }

    /// Steps whose pre-state is `sigma`, in label order, program first.
    pub fn steps_from(&self, sigma: usize) -> &[PrimStep] {
        &self.steps_from[sigma]
    }

    /// Pairs `(s1, s2)` of operand steps whose parallel synchronisation
    /// contains `s`.
    pub fn par_preimage(&self, s: PrimStep) -> &[(PrimStep, PrimStep)] {
        &self.par_pairs[s.index()]
    }

    /// Labels of all triples whose state pair lies in relation `r`.
    pub fn lift_rel(&self, r: Bits) -> Bits {
        if self.events.len() == 1 {
            return r & self.full_pairs();
        }
        let n = self.states.len();
        let mut out = 0;
        for p in iter_bits(r & self.full_pairs()) {
            let (a, b) = (p / n, p % n);
            for e in 0..self.events.len() {
                out |= bit(self.label(a, e, b));
            }
        }
        out
    }

    /// Labels of all triples whose event lies in `es`.
    pub fn lift_events(&self, es: Bits) -> Bits {
        let n = self.states.len();
        let mut out = 0;
        for e in iter_bits(es & self.full_events()) {
            for a in 0..n {
                for b in 0..n {
                    out |= bit(self.label(a, e, b));
                }
            }
        }
        out
    }

    /// Labels whose pre-state satisfies `p`.
    pub fn pre_mask(&self, p: Bits) -> Bits {
        let block = self.events.len() * self.states.len();
        let mut out = 0;
        for s in iter_bits(p & self.full_states()) {
            out |= low_mask(block) << (s * block);
        }
        out
    }

    /// Labels whose post-state satisfies `p`.
    pub fn post_mask(&self, p: Bits) -> Bits {
        let mut out = 0;
        for l in 0..self.n_labels {
            if p & bit(self.label_post(l)) != 0 {
                out |= bit(l);
            }
        }
        out
    }

    /// Image of state set `p` under relation `q` (given as state pairs).
    pub fn image(&self, q: Bits, p: Bits) -> Bits {
        let n = self.states.len();
        let mut out = 0;
        for pr in iter_bits(q & self.full_pairs()) {
            if p & bit(pr / n) != 0 {
                out |= bit(pr % n);
            }
        }
        out
    }

    pub fn identity_pairs(&self) -> Bits {
        let n = self.states.len();
        (0..n).fold(0, |acc, s| acc | bit(s * n + s))
    }

    pub fn pi(&self, labels: Bits) -> AtomicDesc {
        AtomicDesc::new(labels & self.full_labels(), 0)
    }
    pub fn eps(&self, labels: Bits) -> AtomicDesc {
        AtomicDesc::new(0, labels & self.full_labels())
    }
    pub fn pi_bar(&self) -> AtomicDesc {
        AtomicDesc::new(self.full_labels(), 0)
    }
    pub fn eps_bar(&self) -> AtomicDesc {
        AtomicDesc::new(0, self.full_labels())
    }
    pub fn alpha(&self) -> AtomicDesc {
        AtomicDesc::new(self.full_labels(), self.full_labels())
    }
    pub fn negate(&self, a: AtomicDesc) -> AtomicDesc {
        let f = self.full_labels();
        AtomicDesc::new(!a.pgm & f, !a.env & f)
    }

    /// Restrict an atomic step to pre-states in `p`.
    pub fn restrict_pre(&self, a: AtomicDesc, p: Bits) -> AtomicDesc {
        let m = self.pre_mask(p);
        AtomicDesc::new(a.pgm & m, a.env & m)
    }

    pub fn atom_bool(&self, op: BoolOp, a: AtomicDesc, b: Option<AtomicDesc>) -> AtomicDesc {
        match (op, b) {
            (BoolOp::Meet, Some(b)) => a.meet(b),
            (BoolOp::Join, Some(b)) => a.join(b),
            (BoolOp::Meet, None) | (BoolOp::Join, None) => a,
            (BoolOp::Complement, _) => self.negate(a),
        }
    }

    /// Synchronisation of two atomic steps.
    pub fn sync_prim(&self, mode: SyncMode, a: AtomicDesc, b: AtomicDesc) -> AtomicDesc {
        match mode {
            SyncMode::WeakConj => a.join(b),
            SyncMode::Parallel => {
                let mut pgm = (a.pgm & b.env) | (a.env & b.pgm);
                match self.style {
                    ParStyle::Interleave => {}
                    ParStyle::Ccs => {
                        for l in iter_bits(a.pgm) {
                            let (x, e, y) =
                                (self.label_pre(l), self.label_event(l), self.label_post(l));
                            if let Some(c) = self.complement[e] {
                                if b.pgm & bit(self.label(x, c, y)) != 0 {
                                    pgm |= bit(self.label(x, SILENT, y));
                                }
                            }
                        }
                    }
                    ParStyle::Csp => {
                        for l in iter_bits(a.pgm & b.pgm) {
                            let (x, e, y) =
                                (self.label_pre(l), self.label_event(l), self.label_post(l));
                            if let Some(t) = self.tag[e] {
                                pgm |= bit(self.label(x, t, y));
                            }
                        }
                    }
                }
                AtomicDesc::new(pgm, a.env & b.env)
            }
        }
    }

    pub fn predicate(&self, name: &str) -> Option<Bits> {
        lookup(&self.predicates, name)
    }
    pub fn relation(&self, name: &str) -> Option<Bits> {
        lookup(&self.relations, name)
    }
    pub fn eventset(&self, name: &str) -> Option<Bits> {
        lookup(&self.eventsets, name)
    }
    pub fn renaming(&self, name: &str) -> Option<Arc<Renaming>> {
        self.renamings
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, r)| r.clone())
    }
    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }
    pub fn event_index(&self, name: &str) -> Option<usize> {
        self.events.iter().position(|s| s == name)
    }
    pub fn predicates(&self) -> &[(String, Bits)] {
        &self.predicates
    }
    pub fn relations(&self) -> &[(String, Bits)] {
        &self.relations
    }
    pub fn eventsets(&self) -> &[(String, Bits)] {
        &self.eventsets
    }
    pub fn renamings(&self) -> &[(String, Arc<Renaming>)] {
        &self.renamings
    }

    /// Renaming of program steps induced by an event map.
    pub fn event_renaming(&self, name: &str, f: impl Fn(usize) -> usize) -> Renaming {
        let mut map = vec![0u16; self.n_labels];
        for (l, slot) in map.iter_mut().enumerate() {
            let (x, e, y) = (self.label_pre(l), self.label_event(l), self.label_post(l));
            *slot = self.label(x, f(e), y) as u16;
        }
        Renaming {
            name: name.to_string(),
            map,
        }
    }

    /// Untagged events: ι, base events and (for CCS) complements.
    pub fn untagged_events(&self) -> Bits {
        (0..self.events.len())
            .filter(|&e| self.untag[e].is_none())
            .fold(0, |acc, e| acc | bit(e))
    }

    /// The tagged copies of the base events in `es`.
    pub fn tagged(&self, es: Bits) -> Bits {
        iter_bits(es)
            .filter_map(|e| self.tag[e])
            .fold(0, |acc, t| acc | bit(t))
    }

    pub fn add_predicate(&mut self, name: &str, p: Bits) -> Result<(), UniverseError> {
        let v = p & self.full_states();
        push_named(&mut self.predicates, name, v)
    }
    pub fn add_relation(&mut self, name: &str, r: Bits) -> Result<(), UniverseError> {
        let v = r & self.full_pairs();
        push_named(&mut self.relations, name, v)
    }
    pub fn add_eventset(&mut self, name: &str, e: Bits) -> Result<(), UniverseError> {
        let v = e & self.full_events();
        push_named(&mut self.eventsets, name, v)
    }
    pub fn add_renaming(&mut self, r: Renaming) -> Result<(), UniverseError> {
        if r.map.len() != self.n_labels || r.map.iter().any(|&m| m as usize >= self.n_labels) {
            return Err(UniverseError::Invalid(alloc::format!(
                "renaming `{}` is not total on step labels",
                r.name
            )));
        }
        let name = r.name.clone();
        push_named(&mut self.renamings, &name, Arc::new(r))
    }
}

fn lookup(v: &[(String, Bits)], name: &str) -> Option<Bits> {
    v.iter().find(|(n, _)| n == name).map(|(_, b)| *b)
}

fn push_named<T>(v: &mut Vec<(String, T)>, name: &str, x: T) -> Result<(), UniverseError> {
    if v.iter().any(|(n, _)| n == name) {
        return Err(UniverseError::Duplicate(name.to_string()));
    }
    v.push((name.to_string(), x));
    Ok(())
}

/// Builder that closes the event set under complement and tagging.
#[derive(Clone, Debug)]
pub struct UniverseBuilder {
    kind: LabelKind,
    states: Vec<String>,
    base: Vec<String>,
    ccs: bool,
    csp: bool,
}

impl UniverseBuilder {
    pub fn new(kind: LabelKind) -> Self {
        UniverseBuilder {
            kind,
            states: Vec::new(),
            base: Vec::new(),
            ccs: false,
            csp: false,
        }
    }
    pub fn states(mut self, s: &[&str]) -> Self {
        self.states = s.iter().map(|x| x.to_string()).collect();
        self
    }
    pub fn events(mut self, e: &[&str]) -> Self {
        self.base = e.iter().map(|x| x.to_string()).collect();
        self
    }
    pub fn ccs(mut self, on: bool) -> Self {
        self.ccs = on;
        self
    }
    pub fn csp(mut self, on: bool) -> Self {
        self.csp = on;
        self
    }

    pub fn build(self) -> Result<Universe, UniverseError> {
        let mut states = self.states;
        if self.kind == LabelKind::Event {
            if states.len() > 1 {
                return Err(UniverseError::Invalid(
                    "an event universe has a single state".to_string(),
                ));
            }
            if states.is_empty() {
                states.push("s".to_string());
            }
        }
        if states.is_empty() {
            return Err(UniverseError::Empty("states"));
        }
        if self.kind == LabelKind::Relational && (!self.base.is_empty() || self.ccs || self.csp) {
            return Err(UniverseError::Invalid(
                "a relational universe has no events".to_string(),
            ));
        }
        if self.ccs && self.csp {
            return Err(UniverseError::Invalid(
                "choose one of the ccs and csp synchronisation styles".to_string(),
            ));
        }
        let mut events = vec!["iota".to_string()];
        for e in &self.base {
            if e == "iota" {
                continue;
            }
            events.push(e.clone());
        }
        let nbase = events.len();
        let mut complement = vec![None; nbase];
        let mut tag = vec![None; nbase];
        let mut untag = vec![None; nbase];
        if self.ccs {
            for e in 1..nbase {
                let c = events.len();
                events.push(alloc::format!("{}_bar", events[e]));
                complement[e] = Some(c);
                complement.push(Some(e));
                tag.push(None);
                untag.push(None);
            }
        }
        if self.csp {
            for e in 1..nbase {
                let t = events.len();
                events.push(alloc::format!("{}_hat", events[e]));
                tag[e] = Some(t);
                complement.push(None);
                tag.push(None);
                untag.push(Some(e));
            }
        }
        for (i, a) in states.iter().enumerate() {
            if states[..i].contains(a) {
                return Err(UniverseError::Duplicate(a.clone()));
            }
        }
        for (i, a) in events.iter().enumerate() {
            if events[..i].contains(a) {
                return Err(UniverseError::Duplicate(a.clone()));
            }
        }
        let n_labels = states.len() * states.len() * events.len();
        if n_labels > MAX_LABELS {
            return Err(UniverseError::TooLarge(n_labels));
        }
        let style = if self.ccs {
            ParStyle::Ccs
        } else if self.csp {
            ParStyle::Csp
        } else {
            ParStyle::Interleave
        };
        let mut u = Universe {
            kind: self.kind,
            style,
            states,
            events,
            complement,
            tag,
            untag,
            n_labels,
            predicates: Vec::new(),
            relations: Vec::new(),
            eventsets: Vec::new(),
            renamings: Vec::new(),
            par_pairs: Vec::new(),
            steps_from: Vec::new(),
        };
        u.tables();
        Ok(u)
    }
}

impl Universe {
    fn tables(&mut self) {
        let mut from = vec![Vec::new(); self.states.len()];
        for env in [false, true] {
            for l in 0..self.n_labels {
                let s = if env {
                    PrimStep::env(l)
                } else {
                    PrimStep::pgm(l)
                };
                from[self.label_pre(l)].push(s);
            }
        }
        self.steps_from = from;
        let mut pairs = vec![Vec::new(); 2 * self.n_labels];
        for l in 0..self.n_labels {
            let (p, e) = (PrimStep::pgm(l), PrimStep::env(l));
            pairs[p.index()].push((p, e));
            pairs[p.index()].push((e, p));
            pairs[e.index()].push((e, e));
        }
        for l in 0..self.n_labels {
            let (x, ev, y) = (self.label_pre(l), self.label_event(l), self.label_post(l));
            match self.style {
                ParStyle::Interleave => {}
                ParStyle::Ccs => {
                    if let Some(c) = self.complement[ev] {
                        let target = PrimStep::pgm(self.label(x, SILENT, y));
                        let other = PrimStep::pgm(self.label(x, c, y));
                        pairs[target.index()].push((PrimStep::pgm(l), other));
                    }
                }
                ParStyle::Csp => {
                    if let Some(t) = self.tag[ev] {
                        let target = PrimStep::pgm(self.label(x, t, y));
                        pairs[target.index()].push((PrimStep::pgm(l), PrimStep::pgm(l)));
                    }
                }
            }
        }
        self.par_pairs = pairs;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state() -> Universe {
        Universe::relational(&["s0", "s1"]).unwrap()
    }

    fn all_atoms(u: &Universe) -> Vec<AtomicDesc> {
        let n = u.n_labels();
        let mut v = Vec::new();
        for p in 0..(1u128 << n) {
            for e in 0..(1u128 << n) {
                v.push(AtomicDesc::new(p, e));
            }
        }
        v
    }

    #[test]
    fn label_packing_roundtrips() {
        let u = UniverseBuilder::new(LabelKind::Combined)
            .states(&["a", "b"])
            .events(&["e"])
            .csp(true)
            .build()
            .unwrap();
        assert_eq!(u.n_events(), 3);
        for l in 0..u.n_labels() {
            assert_eq!(
                u.label(u.label_pre(l), u.label_event(l), u.label_post(l)),
                l
            );
        }
    }

    #[test]
    fn join_of_pi_and_eps_is_top() {
        let u = two_state();
        for r1 in 0..16u128 {
            for r2 in 0..16u128 {
                assert!(u.pi(r1).join(u.eps(r2)).is_top());
            }
        }
    }

    #[test]
    fn complement_of_eps_bar_is_pi_bar() {
        let u = two_state();
        assert_eq!(
            u.atom_bool(BoolOp::Complement, u.eps_bar(), None),
            u.pi_bar()
        );
        assert_eq!(u.atom_bool(BoolOp::Meet, u.pi(5), Some(u.pi(0))), u.pi(5));
    }

    #[test]
    fn boolean_algebra_laws_exhaustive() {
        let u = two_state();
        let atoms = all_atoms(&u);
        let sample: Vec<_> = atoms.iter().step_by(7).copied().collect();
        for &a in &atoms {
            assert_eq!(a.meet(u.negate(a)), u.alpha());
            assert!(a.join(u.negate(a)).is_top());
            assert_eq!(u.negate(u.negate(a)), a);
        }
        for &a in &sample {
            for &b in &sample {
                assert_eq!(u.negate(a.meet(b)), u.negate(a).join(u.negate(b)));
                for &c in sample.iter().step_by(5) {
                    assert_eq!(a.meet(b.join(c)), a.meet(b).join(a.meet(c)));
                }
            }
        }
    }

    #[test]
    fn aczel_tables() {
        let u = two_state();
        for r1 in 0..16u128 {
            for r2 in 0..16u128 {
                let par = SyncMode::Parallel;
                assert_eq!(u.sync_prim(par, u.pi(r1), u.eps(r2)), u.pi(r1 & r2));
                assert_eq!(u.sync_prim(par, u.eps(r1), u.eps(r2)), u.eps(r1 & r2));
                assert!(u.sync_prim(par, u.pi(r1), u.pi(r2)).is_top());
            }
        }
    }

    #[test]
    fn sync_identities_and_commutativity() {
        let u = two_state();
        let atoms = all_atoms(&u);
        for &a in atoms.iter().step_by(3) {
            assert_eq!(u.sync_prim(SyncMode::Parallel, a, u.eps_bar()), a);
            assert_eq!(u.sync_prim(SyncMode::WeakConj, u.alpha(), a), a);
            for &b in atoms.iter().step_by(17) {
                for m in [SyncMode::Parallel, SyncMode::WeakConj] {
                    assert_eq!(u.sync_prim(m, a, b), u.sync_prim(m, b, a));
                }
            }
        }
    }

    #[test]
    fn ccs_and_csp_program_synchronisation() {
        let u = Universe::events(&["e"], true, false).unwrap();
        let e = u.event_index("e").unwrap();
        let eb = u.event_index("e_bar").unwrap();
        let pe = u.pi(u.lift_events(bit(e)));
        let peb = u.pi(u.lift_events(bit(eb)));
        let iota = u.pi(u.lift_events(bit(SILENT)));
        assert_eq!(u.sync_prim(SyncMode::Parallel, pe, peb), iota);
        assert!(u.sync_prim(SyncMode::Parallel, pe, pe).is_top());

        let v = Universe::events(&["e"], false, true).unwrap();
        let e = v.event_index("e").unwrap();
        let eh = v.event_index("e_hat").unwrap();
        let pe = v.pi(v.lift_events(bit(e)));
        let peh = v.pi(v.lift_events(bit(eh)));
        assert_eq!(v.sync_prim(SyncMode::Parallel, pe, pe), peh);
        let pi_iota = v.pi(v.lift_events(bit(SILENT)));
        assert!(v.sync_prim(SyncMode::Parallel, pi_iota, pi_iota).is_top());
    }

    #[test]
    fn par_preimage_matches_sync_prim() {
        for u in [
            two_state(),
            Universe::events(&["e", "f"], true, false).unwrap(),
            Universe::events(&["e", "f"], false, true).unwrap(),
        ] {
            for i in 0..u.n_steps() {
                let s = PrimStep(i as u16);
                for j in 0..u.n_steps() {
                    for k in 0..u.n_steps() {
                        let (a, b) = (PrimStep(j as u16), PrimStep(k as u16));
                        let single = |x: PrimStep| {
                            if x.is_env() {
                                u.eps(bit(x.label()))
                            } else {
                                u.pi(bit(x.label()))
                            }
                        };
                        let syn = u.sync_prim(SyncMode::Parallel, single(a), single(b));
                        let listed = u.par_preimage(s).contains(&(a, b));
                        assert_eq!(syn.contains(s), listed, "{s:?} from {a:?} {b:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn relations_lift_and_restrict() {
        let u = two_state();
        let all = u.full_pairs();
        assert_eq!(u.lift_rel(all), u.full_labels());
        assert_eq!(u.pre_mask(0b01) | u.pre_mask(0b10), u.full_labels());
        assert_eq!(u.image(u.identity_pairs(), 0b10), 0b10);
    }
}
