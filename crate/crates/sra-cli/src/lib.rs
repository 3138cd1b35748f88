//! Command-line front end for the `sra` crate: model files, expression
//! parsing, law checking, refinement queries and derivation replay.

use std::ffi::OsString;
use std::fmt::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use sra::decide::{
    check_quintuple, equal_bounded, refines_bounded, render_observation, Bounds, Side, Verdict,
};
use sra::laws::{
    catalog, check_law, glob_match, parse_script, render_counterexample, replay_derivation,
    CheckConfig, Domains, LawReport, Outcome,
};
use sra::stepalg::Universe;
use sra::syntax::{parse_expr, parse_set, Printer, Resolver, SetSort};

pub mod model;

pub use model::{load_model, parse_model, ModelError};

/// Exit statuses.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "sra",
    version,
    about = "Bounded checker for a synchronous rely/guarantee algebra"
)]
pub struct Cli {
    #[command(flatten)]
    pub opts: Opts,
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Opts {
    /// Model file (TOML)
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    /// Maximum trace length
    #[arg(long, global = true, default_value_t = 5)]
    pub depth: usize,
    /// Maximum loop length of lasso traces
    #[arg(long, global = true, default_value_t = 4)]
    pub lasso: usize,
    /// Seed for instance sampling
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Glob selecting laws by name
    #[arg(long, global = true)]
    pub laws: Option<String>,
    /// Check every instance instead of a sample
    #[arg(long, global = true)]
    pub exhaustive: bool,
    /// Instances sampled per law and mode
    #[arg(long, global = true, default_value_t = 24)]
    pub samples: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check catalog laws on the model
    CheckLaws,
    /// List catalog laws that apply to the model
    ListLaws,
    /// Check LHS ⊑ RHS: every behaviour of RHS is one of LHS
    Refine { lhs: String, rhs: String },
    /// Check that two commands have the same behaviours
    Equal { lhs: String, rhs: String },
    /// Print the normal form of a command
    Normalize {
        expr: String,
        /// Unfold derived forms into core operators
        #[arg(long)]
        expand: bool,
    },
    /// Replay a derivation script, verifying each step
    Replay { file: PathBuf },
    /// Check {p, r} ⊢ C ⦃g, q⦄ as a refinement of its specification
    Quintuple {
        p: String,
        r: String,
        g: String,
        q: String,
        cmd: String,
    },
}

/// Captured result of one invocation.
#[derive(Debug, Default)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Opts {
    fn bounds(&self) -> Bounds {
        Bounds {
            maxlen: self.depth,
            maxlassolen: self.lasso,
            ..Bounds::default()
        }
    }
}

fn usage(msg: impl Into<String>) -> Output {
    Output {
        code: EXIT_USAGE,
        stdout: String::new(),
        stderr: msg.into(),
    }
}

/// Parse arguments and run. Never exits the process.
pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let ok = !e.use_stderr();
            return Output {
                code: if ok { EXIT_OK } else { EXIT_USAGE },
                stdout: if ok { e.to_string() } else { String::new() },
                stderr: if ok { String::new() } else { e.to_string() },
            };
        }
    };
    execute(&cli)
}

pub fn execute(cli: &Cli) -> Output {
    let Some(path) = &cli.opts.model else {
        return usage("a model is required: pass --model <file>");
    };
    let u = match load_model(path) {
        Ok(u) => u,
        Err(e) => return usage(format!("model error: {e}")),
    };
    let o = &cli.opts;
    match &cli.cmd {
        Command::CheckLaws => check_laws(&u, o),
        Command::ListLaws => list_laws(&u, o),
        Command::Refine { lhs, rhs } => compare(&u, o, lhs, rhs, false),
        Command::Equal { lhs, rhs } => compare(&u, o, lhs, rhs, true),
        Command::Normalize { expr, expand } => normalize(&u, expr, *expand),
        Command::Replay { file } => replay(&u, o, file),
        Command::Quintuple { p, r, g, q, cmd } => quintuple(&u, o, [p, r, g, q], cmd),
    }
}

fn selected<'a>(u: &Universe, o: &Opts, laws: &'a [sra::laws::Law]) -> Vec<&'a sra::laws::Law> {
    let pat = o.laws.as_deref().unwrap_or("*");
    laws.iter()
        .filter(|l| l.scope.applies(u) && glob_match(pat, l.name))
        .collect()
}

fn list_laws(u: &Universe, o: &Opts) -> Output {
    let laws = catalog();
    let mut sel = selected(u, o, &laws);
    sel.sort_by_key(|l| l.name);
    let mut out = String::new();
    for l in sel {
        let neg = if l.negative { "  (not a law)" } else { "" };
        let _ = writeln!(out, "{:36} {}{neg}", l.name, l.statement());
    }
    Output {
        code: EXIT_OK,
        stdout: out,
        stderr: String::new(),
    }
}

/// Check the selected laws, in parallel, reporting in name order.
pub fn check_reports(u: &Universe, o: &Opts) -> Vec<LawReport> {
    let laws = catalog();
    let sel = selected(u, o, &laws);
    let cfg = CheckConfig {
        bounds: o.bounds(),
        samples: o.samples,
        seed: o.seed,
        exhaustive: o.exhaustive,
    };
    let dom = Domains::new(u, o.seed);
    let mut reports: Vec<LawReport> = sel
        .par_iter()
        .map(|l| check_law(u, l, &dom, &cfg))
        .collect();
    reports.sort_by_key(|r| r.name);
    reports
}

fn check_laws(u: &Universe, o: &Opts) -> Output {
    let reports = check_reports(u, o);
    if reports.is_empty() {
        return usage(format!(
            "no law matches `{}` on this model",
            o.laws.as_deref().unwrap_or("*")
        ));
    }
    let mut out = String::new();
    let (mut failed, mut exhausted) = (false, false);
    for r in &reports {
        let _ = writeln!(out, "{}", r.line());
        match &r.outcome {
            Outcome::Fail(cx) if !r.ok() => {
                failed = true;
                let _ = writeln!(out, "{}", render_counterexample(u, cx));
            }
            Outcome::Pass if !r.ok() => {
                failed = true;
                let _ = writeln!(out, "  no counterexample found for a non-law");
            }
            Outcome::Exhausted(m) => {
                exhausted = true;
                let _ = writeln!(out, "  {m}");
            }
            Outcome::Error(m) => {
                failed = true;
                let _ = writeln!(out, "  error: {m}");
            }
            _ => {}
        }
    }
    let code = if failed {
        EXIT_FAIL
    } else if exhausted {
        EXIT_RESOURCE
    } else {
        EXIT_OK
    };
    Output {
        code,
        stdout: out,
        stderr: String::new(),
    }
}

fn term(u: &Universe, src: &str) -> Result<sra::kernel::Term, String> {
    sra::syntax::parse_term(u, src)
}

fn verdict_output(u: &Universe, v: Verdict, what: &str) -> Output {
    let mut out = String::new();
    let code = match v {
        Verdict::Holds => {
            let _ = writeln!(out, "HOLDS {what}");
            EXIT_OK
        }
        Verdict::Fails(w) => {
            let side = match w.member_of {
                Side::Left => "left",
                Side::Right => "right",
            };
            let _ = writeln!(out, "FAILS {what}");
            let _ = writeln!(
                out,
                "  witness (only on the {side}): {}",
                render_observation(u, &w.observation)
            );
            EXIT_FAIL
        }
        Verdict::ResourceExhausted(m) => {
            let _ = writeln!(out, "UNKNOWN {what}\n  resource limit: {m}");
            EXIT_RESOURCE
        }
    };
    Output {
        code,
        stdout: out,
        stderr: String::new(),
    }
}

fn compare(u: &Universe, o: &Opts, lhs: &str, rhs: &str, equal: bool) -> Output {
    let (l, r) = match (term(u, lhs), term(u, rhs)) {
        (Ok(l), Ok(r)) => (l, r),
        (Err(e), _) | (_, Err(e)) => return usage(e),
    };
    let v = if equal {
        equal_bounded(u, &l, &r, o.bounds())
    } else {
        refines_bounded(u, &l, &r, o.bounds())
    };
    let pr = Printer::new(u);
    let rel = if equal { "=" } else { "[=" };
    verdict_output(u, v, &format!("{} {rel} {}", pr.print(&l), pr.print(&r)))
}

fn normalize(u: &Universe, src: &str, expand: bool) -> Output {
    match term(u, src) {
        Ok(t) => {
            let t = if expand { u.expand(&t) } else { t };
            Output {
                code: EXIT_OK,
                stdout: format!("{}\n", Printer::new(u).print(&t)),
                stderr: String::new(),
            }
        }
        Err(e) => usage(e),
    }
}

fn replay(u: &Universe, o: &Opts, file: &PathBuf) -> Output {
    let src = match std::fs::read_to_string(file) {
        Ok(s) => s,
        Err(e) => return usage(format!("cannot read {}: {e}", file.display())),
    };
    let script = match parse_script(&src) {
        Ok(s) => s,
        Err(e) => return usage(format!("{}: {e}", file.display())),
    };
    let rep = replay_derivation(u, &catalog(), &script, o.bounds());
    let pr = Printer::new(u);
    let mut out = format!("start  {}\n", pr.print(&rep.start));
    for s in &rep.steps {
        let mark = if s.verdict.holds() { "ok" } else { "FAILED" };
        let rel = if s.refinement { "[=" } else { "=" };
        let _ = writeln!(
            out,
            "{rel:2} {}  [{} line {}, {mark}]",
            pr.print(&s.result),
            s.law,
            s.line
        );
    }
    let code = if rep.holds() {
        let kind = if rep.is_refinement() {
            "refinement"
        } else {
            "equality"
        };
        let _ = writeln!(out, "REPLAY HOLDS ({} steps, {kind})", rep.steps.len());
        EXIT_OK
    } else {
        let _ = writeln!(
            out,
            "REPLAY FAILS: {}",
            rep.error.as_deref().unwrap_or("unknown")
        );
        if !rep.reached_goal && rep.error.as_deref() == Some("the last term differs from the goal")
        {
            let _ = writeln!(out, "goal   {}", pr.print(&rep.goal));
        }
        EXIT_FAIL
    };
    Output {
        code,
        stdout: out,
        stderr: String::new(),
    }
}

fn quintuple(u: &Universe, o: &Opts, sets: [&String; 4], cmd: &str) -> Output {
    let res = Resolver::new(u);
    let env = sra::syntax::Env::new();
    let sorts = [
        SetSort::Pred,
        SetSort::Pairs,
        SetSort::Pairs,
        SetSort::Pairs,
    ];
    let mut v = [0u128; 4];
    for (i, (src, sort)) in sets.iter().zip(sorts).enumerate() {
        let e = match parse_set(src) {
            Ok(e) => e,
            Err(e) => return usage(format!("`{src}`: {e}")),
        };
        v[i] = match res.set(&e, sort, &env) {
            Ok(b) => b,
            Err(e) => return usage(format!("`{src}`: {e}")),
        };
    }
    let c = match parse_expr(cmd)
        .map_err(|e| e.to_string())
        .and_then(|e| res.term(&e, &env).map_err(|e| e.to_string()))
    {
        Ok(c) => c,
        Err(e) => return usage(e),
    };
    let verdict = check_quintuple(u, v[0], v[1], v[2], v[3], &c, o.bounds());
    let what = format!(
        "{{{}, {}}} {} {{{}, {}}}",
        sets[0],
        sets[1],
        Printer::new(u).print(&c),
        sets[2],
        sets[3]
    );
    verdict_output(u, verdict, &what)
}
