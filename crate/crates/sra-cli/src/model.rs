//! Model files: a TOML document naming states, events and the predicates,
//! relations, event sets and renamings over them.
//!
//! ```toml
//! states = ["s0", "s1"]
//!
//! [predicates]
//! p = ["s0"]
//!
//! [relations]
//! r = [["s0", "s1"], ["s1", "s1"]]
//! ```
//!
//! An event model lists `events` (with optional `ccs = true` or
//! `csp = true`) and no more than one state; listing two or more states
//! together with events gives the combined state-event labels.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use sra::stepalg::{bit, Bits, LabelKind, Universe, UniverseBuilder, UniverseError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed model: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("{0}")]
    Universe(UniverseError),
    #[error("unknown {kind} `{name}` in {section} `{entry}`")]
    Unknown {
        kind: &'static str,
        name: String,
        section: &'static str,
        entry: String,
    },
}

impl From<UniverseError> for ModelError {
    fn from(e: UniverseError) -> Self {
        ModelError::Universe(e)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    #[serde(default)]
    states: Vec<String>,
    #[serde(default)]
    events: Vec<String>,
    #[serde(default)]
    ccs: bool,
    #[serde(default)]
    csp: bool,
    #[serde(default)]
    predicates: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    relations: BTreeMap<String, Vec<(String, String)>>,
    #[serde(default)]
    eventsets: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    renamings: BTreeMap<String, BTreeMap<String, String>>,
}

pub fn load_model(path: &Path) -> Result<Universe, ModelError> {
    let src = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_model(&src)
}

pub fn parse_model(src: &str) -> Result<Universe, ModelError> {
    let m: ModelFile = toml::from_str(src)?;
    let kind = match (m.events.is_empty(), m.states.len()) {
        (true, _) => LabelKind::Relational,
        (false, 0 | 1) => LabelKind::Event,
        (false, _) => LabelKind::Combined,
    };
    let states: Vec<&str> = m.states.iter().map(String::as_str).collect();
    let events: Vec<&str> = m.events.iter().map(String::as_str).collect();
    let mut u = UniverseBuilder::new(kind)
        .states(&states)
        .events(&events)
        .ccs(m.ccs)
        .csp(m.csp)
        .build()?;

    let state = |section, entry: &str, s: &str, u: &Universe| {
        u.state_index(s).ok_or_else(|| ModelError::Unknown {
            kind: "state",
            name: s.to_string(),
            section,
            entry: entry.to_string(),
        })
    };
    let event = |section, entry: &str, e: &str, u: &Universe| {
        u.event_index(e).ok_or_else(|| ModelError::Unknown {
            kind: "event",
            name: e.to_string(),
            section,
            entry: entry.to_string(),
        })
    };

    for (name, ss) in &m.predicates {
        let mut p: Bits = 0;
        for s in ss {
            p |= bit(state("predicate", name, s, &u)?);
        }
        u.add_predicate(name, p)?;
    }
    for (name, pairs) in &m.relations {
        let mut r: Bits = 0;
        for (a, b) in pairs {
            let (a, b) = (
                state("relation", name, a, &u)?,
                state("relation", name, b, &u)?,
            );
            r |= bit(u.pair(a, b));
        }
        u.add_relation(name, r)?;
    }
    for (name, es) in &m.eventsets {
        let mut s: Bits = 0;
        for e in es {
            s |= bit(event("event set", name, e, &u)?);
        }
        u.add_eventset(name, s)?;
    }
    for (name, map) in &m.renamings {
        let mut f: Vec<usize> = (0..u.n_events()).collect();
        for (a, b) in map {
            f[event("renaming", name, a, &u)?] = event("renaming", name, b, &u)?;
        }
        let r = u.event_renaming(name, |e| f[e]);
        u.add_renaming(r)?;
    }
    Ok(u)
}
