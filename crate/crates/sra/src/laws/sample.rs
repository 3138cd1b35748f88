//! Instance generation: seeded random terms and per-sort value domains.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashSet;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::{admit, CheckConfig, Law, Sort};
use crate::kernel::Term;
use crate::stepalg::{bit, iter_bits, AtomicDesc, Bits, LabelKind, Renaming, SyncMode, Universe};
use crate::syntax::{Env, Mode, Resolver, Value};

pub type Rng = ChaCha8Rng;

fn below(rng: &mut Rng, n: usize) -> usize {
    (rng.next_u64() % n as u64) as usize
}

fn random_bits(rng: &mut Rng, full: Bits) -> Bits {
    let r = ((rng.next_u64() as u128) << 64) | rng.next_u64() as u128;
    r & full
}

/// A random atomic step, biased towards the named shapes.
pub fn random_atom(u: &Universe, rng: &mut Rng) -> AtomicDesc {
    let f = u.full_labels();
    match below(rng, 8) {
        0 => u.pi_bar(),
        1 => u.eps_bar(),
        2 => u.pi(random_bits(rng, f)),
        3 => u.eps(random_bits(rng, f)),
        4 => u.alpha(),
        _ => AtomicDesc::new(random_bits(rng, f), random_bits(rng, f)),
    }
}

/// A random command of at most the given depth.
pub fn random_term(u: &Universe, rng: &mut Rng, depth: usize) -> Term {
    if depth == 0 || below(rng, 4) == 0 {
        return match below(rng, 10) {
            0 => Term::nil(),
            1 => Term::bot(),
            2 => Term::top(),
            3 | 4 => u.test(random_bits(rng, u.full_states())),
            _ => Term::atom(random_atom(u, rng)),
        };
    }
    let d = depth - 1;
    match below(rng, 10) {
        0 | 1 => u.seq(random_term(u, rng, d), random_term(u, rng, d)),
        2 | 3 => u.choice([random_term(u, rng, d), random_term(u, rng, d)]),
        4 => u.join([random_term(u, rng, d), random_term(u, rng, d)]),
        5 => Term::sync(
            SyncMode::Parallel,
            random_term(u, rng, d),
            random_term(u, rng, d),
        ),
        6 => Term::sync(
            SyncMode::WeakConj,
            random_term(u, rng, d),
            random_term(u, rng, d),
        ),
        7 => Term::fin_iter(random_term(u, rng, d)),
        8 => Term::om_iter(random_term(u, rng, d)),
        _ => Term::inf_iter(random_term(u, rng, d)),
    }
}

/// A random event-based process: prefixing by `atev`, choice, `skip` and
/// a stopped process.
fn random_proc(u: &Universe, rng: &mut Rng, depth: usize, events: &[usize]) -> Term {
    if depth == 0 || below(rng, 3) == 0 {
        return match below(rng, 3) {
            0 => u.seq(Term::skip(), Term::top()),
            _ => Term::skip(),
        };
    }
    let e = events[below(rng, events.len())];
    match below(rng, 4) {
        0 => u.choice([
            random_proc(u, rng, depth - 1, events),
            random_proc(u, rng, depth - 1, events),
        ]),
        _ => u.seq(Term::atev(e), random_proc(u, rng, depth - 1, events)),
    }
}

fn fnv(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x100_0000_01b3)
    })
}

/// Value pools for each sort over one universe.
pub struct Domains {
    pub cmds: Vec<Term>,
    pub procs: Vec<Term>,
    pub atoms: Vec<AtomicDesc>,
    pub preds: Vec<Bits>,
    pub rels: Vec<Bits>,
    pub pairs: Vec<Bits>,
    pub eventsets: Vec<Bits>,
    pub events: Vec<usize>,
    pub renamings: Vec<Arc<Renaming>>,
}

fn subsets(full: Bits, cap: usize, rng: &mut Rng) -> Vec<Bits> {
    let n = full.count_ones();
    if n <= 6 {
        let idx: Vec<usize> = iter_bits(full).collect();
        (0..1u128 << n)
            .map(|m| iter_bits(m).fold(0, |a, i| a | bit(idx[i])))
            .collect()
    } else {
        let mut v = vec![0, full];
        while v.len() < cap {
            v.push(random_bits(rng, full));
        }
        v
    }
}

impl Domains {
    pub fn new(u: &Universe, seed: u64) -> Domains {
        let mut rng = Rng::seed_from_u64(seed ^ 0xd0_4a15);
        let fl = u.full_labels();
        let mut atoms = if 2 * u.n_labels() <= 6 {
            (0..1u128 << (2 * u.n_labels()))
                .map(|m| AtomicDesc::new(m & fl, (m >> u.n_labels()) & fl))
                .collect()
        } else {
            let mut v = vec![u.pi_bar(), u.eps_bar(), u.alpha(), AtomicDesc::TOP];
            while v.len() < 40 {
                let a = random_atom(u, &mut rng);
                if !v.contains(&a) {
                    v.push(a);
                }
            }
            v
        };
        atoms.sort();
        let preds = subsets(u.full_states(), 16, &mut rng);
        let rels = subsets(fl, 32, &mut rng);
        let pairs = subsets(u.full_pairs(), 32, &mut rng);
        let eventsets = subsets(u.full_events(), 32, &mut rng);
        let events: Vec<usize> = (0..u.n_events()).collect();

        let mut cmds = vec![
            Term::nil(),
            Term::bot(),
            Term::top(),
            Term::skip(),
            Term::chaos(),
            Term::term_cmd(),
            Term::atom(u.pi_bar()),
            Term::om_iter(Term::atom(u.pi_bar())),
        ];
        if u.n_states() > 1 {
            cmds.push(u.test(1));
        }
        let mut seen: HashSet<Term> = cmds.iter().cloned().collect();
        while cmds.len() < 28 {
            let t = random_term(u, &mut rng, 2);
            if seen.insert(t.clone()) {
                cmds.push(t);
            }
        }

        let mut procs = Vec::new();
        if u.kind() == LabelKind::Event {
            let evs: Vec<usize> = (1..u.n_events()).filter(|&e| !u.is_tagged(e)).collect();
            let evs = if evs.is_empty() { vec![0] } else { evs };
            procs.push(Term::skip());
            let mut seen = HashSet::new();
            let mut tries = 0;
            while procs.len() < 10 && tries < 200 {
                tries += 1;
                let p = random_proc(u, &mut rng, 2, &evs);
                if seen.insert(p.clone()) {
                    procs.push(p);
                }
            }
        }

        let mut renamings: Vec<Arc<Renaming>> =
            u.renamings().iter().map(|(_, r)| r.clone()).collect();
        if u.kind() == LabelKind::Event {
            for i in 0..4 {
                let map: Vec<usize> = (0..u.n_events())
                    .map(|_| below(&mut rng, u.n_events()))
                    .collect();
                renamings.push(Arc::new(u.event_renaming(&format!("phi{i}"), |e| map[e])));
            }
        }

        Domains {
            cmds,
            procs,
            atoms,
            preds,
            rels,
            pairs,
            eventsets,
            events,
            renamings,
        }
    }

    /// Keeps the first `n` commands of the pool (the fixed ones come first).
    pub fn with_cmd_pool(mut self, n: usize) -> Self {
        self.cmds.truncate(n);
        self
    }

    fn size(&self, s: Sort) -> usize {
        match s {
            Sort::Cmd => self.cmds.len(),
            Sort::Proc => self.procs.len(),
            Sort::Atom => self.atoms.len(),
            Sort::Test => self.preds.len(),
            Sort::Rel => self.rels.len(),
            Sort::Pairs => self.pairs.len(),
            Sort::Events => self.eventsets.len(),
            Sort::Event => self.events.len(),
            Sort::Nat => 4,
            Sort::Ren => self.renamings.len(),
        }
    }

    fn value(&self, s: Sort, i: usize) -> Value {
        match s {
            Sort::Cmd => Value::Cmd(self.cmds[i].clone()),
            Sort::Proc => Value::Cmd(self.procs[i].clone()),
            Sort::Atom => Value::Atom(self.atoms[i]),
            Sort::Test => Value::Pred(self.preds[i]),
            Sort::Rel => Value::Labels(self.rels[i]),
            Sort::Pairs => Value::Pairs(self.pairs[i]),
            Sort::Events => Value::Events(self.eventsets[i]),
            Sort::Event => Value::Events(bit(self.events[i])),
            Sort::Nat => Value::Nat(i),
            Sort::Ren => Value::Ren(self.renamings[i].clone()),
        }
    }

    /// Instances of a law over `u`: exhaustive when the product of the
    /// domains fits the budget, seeded samples otherwise.
    pub fn instances(
        &self,
        u: &Universe,
        law: &Law,
        cfg: &CheckConfig,
    ) -> Result<Vec<Env>, String> {
        let free: Vec<(String, Sort)> = law
            .vars
            .iter()
            .filter(|(n, _)| {
                !law.computed.iter().any(|(c, _)| c == n) && !law.hints.iter().any(|(h, _)| h == n)
            })
            .cloned()
            .collect();
        let mut dims: Vec<usize> = free.iter().map(|(_, s)| self.size(*s)).collect();
        for (_, hs) in &law.hints {
            dims.push(hs.len());
        }
        if dims.iter().any(|&d| d == 0) {
            return Ok(Vec::new());
        }
        let modes: Vec<Option<Mode>> = if law.modes.is_empty() {
            vec![None]
        } else {
            law.modes.iter().map(|m| Some(*m)).collect()
        };
        let total = dims.iter().fold(1usize, |a, &d| a.saturating_mul(d));
        let all = cfg.exhaustive || law.exhaustive || total <= cfg.samples;
        let mut rng = Rng::seed_from_u64(cfg.seed ^ fnv(law.name));
        let res = Resolver::new(u);
        let mut out = Vec::new();
        for m in modes {
            let mut taken = 0;
            let mut seen: HashSet<Vec<usize>> = HashSet::new();
            let mut attempts = 0;
            let limit = if all { total } else { cfg.samples * 40 };
            while attempts < limit && (all || taken < cfg.samples) {
                let idx: Vec<usize> = if all {
                    let mut k = attempts;
                    dims.iter()
                        .map(|&d| {
                            let i = k % d;
                            k /= d;
                            i
                        })
                        .collect()
                } else {
                    dims.iter().map(|&d| below(&mut rng, d)).collect()
                };
                attempts += 1;
                if !all && !seen.insert(idx.clone()) {
                    continue;
                }
                let mut env = Env::new();
                if let Some(m) = m {
                    env.insert("##".into(), Value::Mode(m));
                }
                for (k, (n, s)) in free.iter().enumerate() {
                    env.insert(n.clone(), self.value(*s, idx[k]));
                }
                let mut ok = true;
                for (j, (h, hs)) in law.hints.iter().enumerate() {
                    match res.term(&hs[idx[free.len() + j]], &env) {
                        Ok(t) => {
                            env.insert(h.clone(), Value::Cmd(t));
                        }
                        Err(_) => ok = false,
                    }
                }
                if !ok {
                    continue;
                }
                if let Some(env) = admit(u, law, env, cfg.bounds)? {
                    out.push(env);
                    taken += 1;
                }
            }
        }
        Ok(out)
    }
}
