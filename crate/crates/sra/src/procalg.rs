//! Event-based process layer: events as commands, CCS restriction, CSP
//! alphabetised parallel, renaming and hiding.
//!
//! These are checked wrappers over the kernel's derived forms; they reject
//! names and sets that do not fit the universe.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::kernel::Term;
use crate::laws::{catalog, Law, Scope};
use crate::stepalg::{
    bit, Bits, LabelKind, ParStyle, Renaming, Universe, UniverseBuilder, UniverseError,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProcError {
    UnknownEvent(String),
    UnknownEventSet(String),
    /// The universe has no events to speak of.
    NotEventBased,
    /// CSP parallel needs synchronisation tags.
    NoTags,
    BadRenaming(String),
}

impl fmt::Display for ProcError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProcError::UnknownEvent(e) => write!(f, "unknown event `{e}`"),
            ProcError::UnknownEventSet(e) => write!(f, "unknown event set `{e}`"),
            ProcError::NotEventBased => f.write_str("the universe has no events"),
            ProcError::NoTags => f.write_str("CSP parallel needs a universe with csp tagging"),
            ProcError::BadRenaming(m) => write!(f, "bad renaming: {m}"),
        }
    }
}

/// Base events plus the CCS/CSP closure flags.
#[derive(Clone, Debug, Default)]
pub struct EventUniverseConfig {
    pub base: Vec<String>,
    pub ccs: bool,
    pub csp: bool,
}

impl EventUniverseConfig {
    pub fn new(base: &[&str]) -> Self {
        EventUniverseConfig {
            base: base.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        }
    }
    pub fn ccs(mut self) -> Self {
        self.ccs = true;
        self
    }
    pub fn csp(mut self) -> Self {
        self.csp = true;
        self
    }
    /// Closes the events under complement and tagging and builds the universe.
    pub fn build(&self) -> Result<Universe, UniverseError> {
        let base: Vec<&str> = self.base.iter().map(String::as_str).collect();
        UniverseBuilder::new(LabelKind::Event)
            .events(&base)
            .ccs(self.ccs)
            .csp(self.csp)
            .build()
    }
}

fn check_events(u: &Universe) -> Result<(), ProcError> {
    if u.kind() == LabelKind::Relational {
        Err(ProcError::NotEventBased)
    } else {
        Ok(())
    }
}

/// Index of a named event.
pub fn event(u: &Universe, name: &str) -> Result<usize, ProcError> {
    check_events(u)?;
    u.event_index(name)
        .ok_or_else(|| ProcError::UnknownEvent(name.to_string()))
}

/// A set of named events.
pub fn event_set(u: &Universe, names: &[&str]) -> Result<Bits, ProcError> {
    names
        .iter()
        .try_fold(0, |acc, n| Ok(acc | bit(event(u, n)?)))
}

fn check_set(u: &Universe, es: Bits) -> Result<Bits, ProcError> {
    check_events(u)?;
    if es & !u.full_events() != 0 {
        return Err(ProcError::UnknownEventSet(alloc::format!("{es:#x}")));
    }
    Ok(es)
}

/// `ε̲^ω ; π(e) ; ε̲^ω`.
pub fn atev(u: &Universe, e: usize) -> Result<Term, ProcError> {
    check_events(u)?;
    if e >= u.n_events() {
        return Err(ProcError::UnknownEvent(alloc::format!("#{e}")));
    }
    Ok(Term::atev(e))
}

/// `c ⋓ guar(events outside es)`.
pub fn ccs_restrict(u: &Universe, es: Bits, c: Term) -> Result<Term, ProcError> {
    Ok(u.ccs_restrict(check_set(u, es)?, c))
}

/// Parallel composition synchronising on `es` and interleaving elsewhere.
pub fn csp_parallel(u: &Universe, es: Bits, c: Term, d: Term) -> Result<Term, ProcError> {
    let es = check_set(u, es)?;
    if u.style() != ParStyle::Csp {
        return Err(ProcError::NoTags);
    }
    Ok(u.csp_par(es, c, d))
}

/// Renames program steps on events in `es` to the silent event.
pub fn hide(u: &Universe, es: Bits, c: Term) -> Result<Term, ProcError> {
    Ok(u.hide(check_set(u, es)?, c))
}

/// Event-to-event renaming, identity on unmentioned events.
pub fn renaming(u: &Universe, name: &str, pairs: &[(&str, &str)]) -> Result<Renaming, ProcError> {
    let mut map: Vec<usize> = (0..u.n_events()).collect();
    for (a, b) in pairs {
        map[event(u, a)?] = event(u, b)?;
    }
    Ok(u.event_renaming(name, |e| map[e]))
}

/// Applies a renaming, which must be total and keep the states of each step.
pub fn rename(u: &Universe, r: Arc<Renaming>, c: Term) -> Result<Term, ProcError> {
    if r.map.len() != u.n_labels() {
        return Err(ProcError::BadRenaming(alloc::format!(
            "`{}` maps {} labels, universe has {}",
            r.name,
            r.map.len(),
            u.n_labels()
        )));
    }
    for (l, &m) in r.map.iter().enumerate() {
        let m = m as usize;
        if m >= u.n_labels()
            || u.label_pre(l) != u.label_pre(m)
            || u.label_post(l) != u.label_post(m)
        {
            return Err(ProcError::BadRenaming(alloc::format!(
                "`{}` changes the states of a step",
                r.name
            )));
        }
    }
    Ok(Term::rename(r, c))
}

/// The catalog entries for the event-based layer.
pub fn laws() -> Vec<Law> {
    catalog()
        .into_iter()
        .filter(|l| matches!(l.scope, Scope::Events | Scope::Ccs | Scope::Csp))
        .collect()
}
