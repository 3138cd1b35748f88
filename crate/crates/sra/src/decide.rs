//! Bounded refinement and equality with counterexamples.
//!
//! `c ⊑ d` holds when every behaviour of `d` is a behaviour of `c`. The check
//! walks the tree of chained prefixes from each initial state, carrying the
//! residual sets of both sides, and tries every loop that closes at the
//! current state as a lasso continuation.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use hashbrown::{HashMap, HashSet};

use crate::kernel::Term;
use crate::semantics::{
    canonical_lasso, loops_from, Behaviour, Cx, Lasso, Observation, SemError, Status,
    DEFAULT_RESIDUAL_CAP,
};
use crate::stepalg::{Bits, PrimStep, SyncMode, Universe};

/// Most step walks the lasso search may enumerate when collecting loops.
pub const DEFAULT_LOOP_CAP: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub maxlen: usize,
    pub maxlassolen: usize,
    pub residual_cap: usize,
    pub loop_cap: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            maxlen: 5,
            maxlassolen: 4,
            residual_cap: DEFAULT_RESIDUAL_CAP,
            loop_cap: DEFAULT_LOOP_CAP,
        }
    }
}

impl Bounds {
    pub fn new(maxlen: usize, maxlassolen: usize) -> Self {
        Bounds {
            maxlen,
            maxlassolen,
            ..Bounds::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A behaviour of exactly one side of a failed check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub observation: Observation,
    pub member_of: Side,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails(Witness),
    ResourceExhausted(String),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }
    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Fails(w) => Some(w),
            _ => None,
        }
    }
}

struct Search<'a, 'u> {
    cx: &'a mut Cx<'u>,
    b: Bounds,
    loops: Vec<Vec<Vec<PrimStep>>>,
    lasso_memo: HashMap<(Term, usize, usize), bool>,
    visited: HashSet<(usize, Vec<Term>, Vec<Term>, usize)>,
}

enum Found {
    Finite(Vec<PrimStep>, Status),
    Lasso(Vec<PrimStep>, Vec<PrimStep>),
}

/// Upper bound on the walks needed to collect loops up to `len` steps.
fn loop_walks(u: &Universe, len: usize) -> Option<usize> {
    let d = (0..u.n_states())
        .map(|s| u.steps_from(s).len())
        .max()
        .unwrap_or(0);
    let mut total = 0usize;
    let mut layer = 1usize;
    for _ in 0..len {
        layer = layer.checked_mul(d)?;
        total = total.checked_add(layer)?;
    }
    total.checked_mul(u.n_states())
}

impl<'a, 'u> Search<'a, 'u> {
    fn new(cx: &'a mut Cx<'u>, b: Bounds) -> Self {
        let u = cx.u;
        let loops = (0..u.n_states())
            .map(|s| {
                let mut v = Vec::new();
                for len in 1..=b.maxlassolen {
                    v.extend(
                        loops_from(u, s, len)
                            .into_iter()
                            .filter(|l| canonical_lasso(&[], l)),
                    );
                }
                v
            })
            .collect();
        Search {
            cx,
            b,
            loops,
            lasso_memo: HashMap::new(),
            visited: HashSet::new(),
        }
    }

    fn loop_member(&mut self, set: &[Term], sigma: usize, idx: usize) -> bool {
        for t in set {
            let key = (t.clone(), sigma, idx);
            let r = match self.lasso_memo.get(&key) {
                Some(r) => *r,
                None => {
                    let cyc = self.loops[sigma][idx].clone();
                    let r = self.cx.loop_accepts(core::slice::from_ref(t), &cyc);
                    self.lasso_memo.insert(key, r);
                    r
                }
            };
            if r {
                return true;
            }
        }
        false
    }

    /// Depth-first search for a behaviour of `rd` missing from `rc`.
    fn dfs(
        &mut self,
        sigma: usize,
        rc: Vec<Term>,
        rd: Vec<Term>,
        prefix: &mut Vec<PrimStep>,
    ) -> Option<Found> {
        if self.cx.exhausted() {
            return None;
        }
        let (ct_c, ab_c) = self.cx.set_flags(&rc, sigma);
        if ab_c {
            return None;
        }
        let (ct_d, ab_d) = self.cx.set_flags(&rd, sigma);
        if ab_d {
            return Some(Found::Finite(prefix.clone(), Status::Aborted));
        }
        if rd.is_empty() {
            return None;
        }
        if rc.is_empty() {
            return Some(Found::Finite(prefix.clone(), Status::Incomplete));
        }
        if ct_d && !ct_c {
            return Some(Found::Finite(prefix.clone(), Status::Terminated));
        }
        let key = (sigma, rc.clone(), rd.clone(), prefix.len());
        if !self.visited.insert(key) {
            return None;
        }
        if prefix.len() < self.b.maxlassolen && rd.iter().any(|t| self.cx.has_infinite(t)) {
            let room = self.b.maxlassolen - prefix.len();
            for idx in 0..self.loops[sigma].len() {
                let cyc_len = self.loops[sigma][idx].len();
                if cyc_len > room {
                    continue;
                }
                if let (Some(a), Some(b)) = (prefix.last(), self.loops[sigma][idx].last()) {
                    if a == b {
                        continue;
                    }
                }
                if self.loop_member(&rd, sigma, idx) && !self.loop_member(&rc, sigma, idx) {
                    return Some(Found::Lasso(prefix.clone(), self.loops[sigma][idx].clone()));
                }
            }
        }
        if prefix.len() < self.b.maxlen {
            let u = self.cx.u;
            for &s in u.steps_from(sigma) {
                let rd2 = self.cx.step_set(&rd, s);
                if rd2.is_empty() {
                    continue;
                }
                let rc2 = self.cx.step_set(&rc, s);
                prefix.push(s);
                let r = self.dfs(u.post(s), rc2, rd2, prefix);
                prefix.pop();
                if r.is_some() {
                    return r;
                }
            }
        }
        None
    }
}

fn prepare(u: &Universe, t: &Term) -> Term {
    if t.is_core() {
        t.clone()
    } else {
        u.expand(t)
    }
}

/// Membership of an observation in a (possibly derived) command.
pub fn observe(cx: &mut Cx<'_>, t: &Term, o: &Observation) -> Result<bool, SemError> {
    let t = prepare(cx.u, t);
    match o {
        Observation::Finite(b) => cx.member(&t, b),
        Observation::Lasso(l) => cx.member_lasso(&t, l),
    }
}

fn exhausted_msg(cx: &Cx<'_>, b: &Bounds) -> String {
    format!(
        "residual cap of {} exceeded ({} distinct residuals); raise the cap or lower the bounds",
        b.residual_cap,
        cx.residual_count()
    )
}

fn refines_in(cx: &mut Cx<'_>, c: &Term, d: &Term, b: Bounds) -> Verdict {
    let u = cx.u;
    let (c, d) = (prepare(u, c), prepare(u, d));
    if loop_walks(u, b.maxlassolen).map_or(true, |w| w > b.loop_cap) {
        return Verdict::ResourceExhausted(format!(
            "loop cap of {} walks exceeded at lasso bound {}; lower the bound",
            b.loop_cap, b.maxlassolen
        ));
    }
    let mut found = None;
    {
        let mut s = Search::new(cx, b);
        for init in 0..u.n_states() {
            let mut prefix = Vec::new();
            if let Some(f) = s.dfs(
                init,
                alloc::vec![c.clone()],
                alloc::vec![d.clone()],
                &mut prefix,
            ) {
                found = Some((init, f));
                break;
            }
            if s.cx.exhausted() {
                break;
            }
        }
    }
    if cx.exhausted() {
        return Verdict::ResourceExhausted(exhausted_msg(cx, &b));
    }
    let Some((init, f)) = found else {
        return Verdict::Holds;
    };
    let obs = match f {
        Found::Finite(steps, status) => Observation::Finite(Behaviour {
            init,
            steps,
            status,
        }),
        Found::Lasso(prefix, cycle) => Observation::Lasso(Lasso {
            init,
            prefix,
            cycle,
        }),
    };
    let obs = shrink(cx, &c, &d, obs);
    if cx.exhausted() {
        return Verdict::ResourceExhausted(exhausted_msg(cx, &b));
    }
    Verdict::Fails(Witness {
        observation: obs,
        member_of: Side::Right,
    })
}

/// `c ⊑ d` within the bounds: every behaviour of `d` is one of `c`.
pub fn refines_bounded(u: &Universe, c: &Term, d: &Term, b: Bounds) -> Verdict {
    let mut cx = Cx::with_cap(u, b.residual_cap);
    refines_in(&mut cx, c, d, b)
}

/// Both refinements; a witness records which side it belongs to.
pub fn equal_bounded(u: &Universe, c: &Term, d: &Term, b: Bounds) -> Verdict {
    let mut cx = Cx::with_cap(u, b.residual_cap);
    match refines_in(&mut cx, c, d, b) {
        Verdict::Holds => {}
        other => return other,
    }
    match refines_in(&mut cx, d, c, b) {
        Verdict::Fails(w) => Verdict::Fails(Witness {
            observation: w.observation,
            member_of: Side::Left,
        }),
        other => other,
    }
}

/// The rely/guarantee quintuple `{p, r} c ⦃g, q⦄`, read as the refinement
/// `assert p ; (rely r ⋓ guar g ⋓ spec q) ⊑ c`.
pub fn quintuple_spec(u: &Universe, p: Bits, r: Bits, g: Bits, q: Bits) -> Term {
    let wc = |a, b| Term::sync(SyncMode::WeakConj, a, b);
    u.seq(
        u.assert(p),
        wc(wc(u.rely(u.lift_rel(r)), u.guar(u.lift_rel(g))), u.spec(q)),
    )
}

pub fn check_quintuple(
    u: &Universe,
    p: Bits,
    r: Bits,
    g: Bits,
    q: Bits,
    c: &Term,
    b: Bounds,
) -> Verdict {
    refines_bounded(u, &quintuple_spec(u, p, r, g, q), c, b)
}

fn is_witness(cx: &mut Cx<'_>, c: &Term, d: &Term, o: &Observation) -> bool {
    let valid = match o {
        Observation::Finite(b) => b.validate(cx.u).is_ok(),
        Observation::Lasso(l) => l.validate(cx.u).is_ok(),
    };
    valid && observe(cx, d, o) == Ok(true) && observe(cx, c, o) == Ok(false)
}

fn obs_size(o: &Observation) -> (usize, usize, Vec<u16>) {
    match o {
        Observation::Finite(b) => (b.steps.len(), b.init, b.steps.iter().map(|s| s.0).collect()),
        Observation::Lasso(l) => (
            l.prefix.len() + l.cycle.len(),
            l.init,
            l.prefix.iter().chain(l.cycle.iter()).map(|s| s.0).collect(),
        ),
    }
}

fn merge_step(u: &Universe, s: PrimStep, from: usize, to: usize) -> PrimStep {
    let l = s.label();
    let m = |x: usize| if x == from { to } else { x };
    let l2 = u.label(m(u.label_pre(l)), u.label_event(l), m(u.label_post(l)));
    if s.is_env() {
        PrimStep::env(l2)
    } else {
        PrimStep::pgm(l2)
    }
}

fn candidates(u: &Universe, o: &Observation) -> Vec<Observation> {
    let mut out = Vec::new();
    match o {
        Observation::Finite(b) => {
            for k in 0..b.steps.len() {
                for status in [Status::Terminated, Status::Aborted, Status::Incomplete] {
                    out.push(Observation::Finite(Behaviour {
                        init: b.init,
                        steps: b.steps[..k].to_vec(),
                        status,
                    }));
                }
            }
        }
        Observation::Lasso(l) => {
            for k in 0..l.prefix.len() {
                out.push(Observation::Lasso(Lasso {
                    init: l.init,
                    prefix: l.prefix[..k].to_vec(),
                    cycle: l.cycle.clone(),
                }));
            }
        }
    }
    for from in 0..u.n_states() {
        for to in 0..from {
            let mut changed = false;
            let mut map = |s: &PrimStep| {
                let s2 = merge_step(u, *s, from, to);
                changed |= s2 != *s;
                s2
            };
            let merged = match o {
                Observation::Finite(b) => {
                    let steps = b.steps.iter().map(&mut map).collect();
                    Observation::Finite(Behaviour {
                        init: if b.init == from { to } else { b.init },
                        steps,
                        status: b.status,
                    })
                }
                Observation::Lasso(l) => {
                    let prefix = l.prefix.iter().map(&mut map).collect();
                    let cycle = l.cycle.iter().map(&mut map).collect();
                    Observation::Lasso(Lasso {
                        init: if l.init == from { to } else { l.init },
                        prefix,
                        cycle,
                    })
                }
            };
            if changed {
                out.push(merged);
            }
        }
    }
    out
}

/// Greedy minimisation by prefix truncation and state merging, keeping the
/// observation a behaviour of `d` but not of `c`.
pub fn shrink(cx: &mut Cx<'_>, c: &Term, d: &Term, o: Observation) -> Observation {
    let mut cur = o;
    loop {
        let size = obs_size(&cur);
        let next = candidates(cx.u, &cur)
            .into_iter()
            .filter(|x| obs_size(x) < size)
            .find(|x| is_witness(cx, c, d, x));
        match next {
            Some(x) => cur = x,
            None => return cur,
        }
    }
}

fn render_step(u: &Universe, s: PrimStep, out: &mut String) {
    let kind = if s.is_env() { "eps" } else { "pi" };
    if u.n_events() == 1 {
        let _ = write!(out, " -{kind}-> {}", u.state_name(u.post(s)));
    } else {
        let ev = u.event_name(u.label_event(s.label()));
        let _ = write!(out, " -{kind}:{ev}-> {}", u.state_name(u.post(s)));
    }
}

/// One-line rendering: `s0 -pi-> s1 -eps-> s1 [terminated]`, or with
/// `[loop@i]` marking where the repeated part of a lasso starts.
pub fn render_observation(u: &Universe, o: &Observation) -> String {
    let mut out = String::new();
    match o {
        Observation::Finite(b) => {
            out.push_str(u.state_name(b.init));
            for s in &b.steps {
                render_step(u, *s, &mut out);
            }
            let st = match b.status {
                Status::Terminated => "terminated",
                Status::Aborted => "aborted",
                Status::Incomplete => "incomplete",
            };
            let _ = write!(out, " [{st}]");
        }
        Observation::Lasso(l) => {
            out.push_str(u.state_name(l.init));
            for s in l.prefix.iter().chain(l.cycle.iter()) {
                render_step(u, *s, &mut out);
            }
            let _ = write!(out, " [loop@{}]", l.prefix.len());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u2() -> Universe {
        Universe::relational(&["s0", "s1"]).unwrap()
    }

    #[test]
    fn term_refines_to_skip() {
        let u = u2();
        let b = Bounds::default();
        assert_eq!(
            refines_bounded(&u, &Term::term_cmd(), &Term::skip(), b),
            Verdict::Holds
        );
        let v = refines_bounded(&u, &Term::skip(), &Term::term_cmd(), b);
        let w = v.witness().expect("skip does not refine to term");
        let Observation::Finite(beh) = &w.observation else {
            panic!("expected a finite witness");
        };
        assert!(beh.steps.iter().any(|s| !s.is_env()));
    }

    #[test]
    fn star_and_omega_differ_on_lassos() {
        let u = u2();
        let a = Term::atom(u.alpha());
        let v = equal_bounded(
            &u,
            &Term::fin_iter(a.clone()),
            &Term::om_iter(a),
            Bounds::default(),
        );
        let w = v.witness().unwrap();
        assert!(matches!(w.observation, Observation::Lasso(_)));
        assert_eq!(w.member_of, Side::Right);
    }

    #[test]
    fn nil_omega_is_abort() {
        let u = u2();
        let v = equal_bounded(
            &u,
            &Term::om_iter(Term::nil()),
            &Term::bot(),
            Bounds::default(),
        );
        assert_eq!(v, Verdict::Holds);
    }

    #[test]
    fn quintuple_examples() {
        let u = u2();
        let full = u.full_pairs();
        let c = u.seq(Term::atom(u.pi_bar()), Term::skip());
        let b = Bounds::default();
        assert!(check_quintuple(&u, u.full_states(), full, full, full, &c, b).holds());
        let nonid = 0b0010;
        let c = u.seq(Term::atom(u.pi(u.lift_rel(nonid))), Term::skip());
        let v = check_quintuple(&u, u.full_states(), full, u.identity_pairs(), full, &c, b);
        let w = v.witness().unwrap();
        let Observation::Finite(beh) = &w.observation else {
            panic!()
        };
        assert!(beh.steps.contains(&PrimStep::pgm(1)));
    }

    #[test]
    fn witness_rendering() {
        let u = u2();
        let o = Observation::Finite(Behaviour {
            init: 0,
            steps: alloc::vec![PrimStep::pgm(1), PrimStep::env(3)],
            status: Status::Aborted,
        });
        assert_eq!(
            render_observation(&u, &o),
            "s0 -pi-> s1 -eps-> s1 [aborted]"
        );
    }

    #[test]
    fn loop_cap_is_reported() {
        let u = u2();
        let b = Bounds::new(5, 40);
        let c = Term::skip();
        assert!(matches!(
            refines_bounded(&u, &c, &c, b),
            Verdict::ResourceExhausted(_)
        ));
    }

    #[test]
    fn residual_cap_is_reported() {
        let u = u2();
        let mut b = Bounds::default();
        b.residual_cap = 2;
        let c = Term::sync(SyncMode::Parallel, Term::skip(), Term::term_cmd());
        let v = refines_bounded(&u, &c, &c, b);
        assert!(matches!(v, Verdict::ResourceExhausted(_)));
    }
}
