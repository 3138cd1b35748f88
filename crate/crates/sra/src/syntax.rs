//! Concrete syntax: lexer, parser, resolution against a universe, printer.
//!
//! Precedence, loosest first: `\/`; then `&&`, `||`, `/\` and `##` on one
//! left-associative level; `;`; prefix `!`; postfix `^*`, `^w`, `^inf`, `^n`.
//! `##` is the generic synchronisation operator of law patterns; its meaning
//! comes from the `Mode` bound in the environment.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::kernel::{Derived, Kind, Term};
use crate::stepalg::{
    bit, iter_bits, AtomicDesc, Bits, LabelKind, ParStyle, Renaming, SyncMode, Universe,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.msg)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolveError(pub String);

impl fmt::Display for ResolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(usize),
    Sym(&'static str),
    End,
}

const SYMS: [&str; 20] = [
    "\\/", "/\\", "&&", "||", "##", "<|", "|>", "^", ";", "(", ")", "[", "]", "{", "}", ",", "!",
    "&", "|", "*",
];

fn lex(src: &str) -> Result<Vec<(Tok, usize, usize)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, col, msg: String| ParseError { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let (l0, c0) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
            {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push((Tok::Ident(s), l0, c0));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            let n = s
                .parse()
                .map_err(|_| err(l0, c0, format!("number `{s}` is too large")))?;
            out.push((Tok::Num(n), l0, c0));
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                i += s.len();
                col += s.len();
                out.push((Tok::Sym(s), l0, c0));
            }
            None => return Err(err(l0, c0, format!("unexpected character `{c}`"))),
        }
    }
    out.push((Tok::End, line, col));
    Ok(out)
}

/// Constants of the grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Const {
    Bot,
    Top,
    Nil,
    Skip,
    Chaos,
    Term,
    Alpha,
    Eps,
    PiStep,
    /// Identity command of the bound synchronisation mode.
    SyncId,
    /// Atomic identity of the bound synchronisation mode.
    SyncAtomId,
}

const CONSTS: [(&str, Const); 11] = [
    ("bot", Const::Bot),
    ("top", Const::Top),
    ("nil", Const::Nil),
    ("skip", Const::Skip),
    ("chaos", Const::Chaos),
    ("term", Const::Term),
    ("alpha", Const::Alpha),
    ("eps", Const::Eps),
    ("pistep", Const::PiStep),
    ("syncid", Const::SyncId),
    ("syncatomid", Const::SyncAtomId),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetFn {
    Test,
    Assert,
    Pgm,
    Env,
    Guar,
    Rely,
    Spec,
    Atev,
}

const SETFNS: [(&str, SetFn); 8] = [
    ("test", SetFn::Test),
    ("assert", SetFn::Assert),
    ("pgm", SetFn::Pgm),
    ("env", SetFn::Env),
    ("guar", SetFn::Guar),
    ("rely", SetFn::Rely),
    ("spec", SetFn::Spec),
    ("atev", SetFn::Atev),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdxFn {
    Restrict,
    ParCsp,
    Hide,
    Rename,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Par,
    Weak,
    Conj,
    /// Generic synchronisation, resolved through the environment.
    Sync,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Par => "||",
            BinOp::Weak => "&&",
            BinOp::Conj => "/\\",
            BinOp::Sync => "##",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IterOp {
    Fin,
    Om,
    Inf,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Nat {
    Lit(usize),
    Var(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SetItem {
    Name(String),
    Pair(String, String),
    Triple(String, String, String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SetExpr {
    Ident(String),
    Lit(Vec<SetItem>),
    Not(Box<SetExpr>),
    And(Box<SetExpr>, Box<SetExpr>),
    Or(Box<SetExpr>, Box<SetExpr>),
    /// `p <| r`
    Dom(Box<SetExpr>, Box<SetExpr>),
    /// `r |> p`
    Ran(Box<SetExpr>, Box<SetExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Ident(String),
    Const(Const),
    Call(SetFn, SetExpr),
    Assume(Box<Expr>),
    Indexed(IdxFn, SetExpr, Vec<Expr>),
    Seq(Box<Expr>, Box<Expr>),
    Choice(Box<Expr>, Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Iter(IterOp, Box<Expr>),
    Power(Box<Expr>, Nat),
    Not(Box<Expr>),
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (_, line, col) = &self.toks[self.pos];
        Err(ParseError {
            line: *line,
            col: *col,
            msg: msg.into(),
        })
    }
    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }
    fn eat(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Tok::Sym(x) if *x == s) {
            self.bump();
            true
        } else {
            false
        }
    }
    fn expect(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", describe(self.peek())))
        }
    }
    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            t => self.err(format!("expected a name, found {}", describe(&t))),
        }
    }

    fn choice(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.conj()?;
        while self.eat("\\/") {
            let r = self.conj()?;
            e = Expr::Choice(Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn conj(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.seq()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("&&") => BinOp::Weak,
                Tok::Sym("||") => BinOp::Par,
                Tok::Sym("/\\") => BinOp::Conj,
                Tok::Sym("##") => BinOp::Sync,
                _ => return Ok(e),
            };
            self.bump();
            let r = self.seq()?;
            e = Expr::Bin(op, Box::new(e), Box::new(r));
        }
    }

    fn seq(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.prefix()?;
        while self.eat(";") {
            let r = self.prefix()?;
            e = Expr::Seq(Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn prefix(&mut self) -> Result<Expr, ParseError> {
        if self.eat("!") {
            let e = self.prefix()?;
            return Ok(Expr::Not(Box::new(e)));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.primary()?;
        while self.eat("^") {
            e = match self.bump() {
                Tok::Sym("*") => Expr::Iter(IterOp::Fin, Box::new(e)),
                Tok::Ident(s) if s == "w" => Expr::Iter(IterOp::Om, Box::new(e)),
                Tok::Ident(s) if s == "inf" => Expr::Iter(IterOp::Inf, Box::new(e)),
                Tok::Ident(s) => Expr::Power(Box::new(e), Nat::Var(s)),
                Tok::Num(n) => Expr::Power(Box::new(e), Nat::Lit(n)),
                _ => {
                    self.pos -= 1;
                    return self.err("expected `*`, `w`, `inf` or an exponent after `^`");
                }
            };
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        if self.eat("(") {
            let e = self.choice()?;
            self.expect(")")?;
            return Ok(e);
        }
        let name = match self.peek().clone() {
            Tok::Ident(s) => s,
            t => return self.err(format!("expected a command, found {}", describe(&t))),
        };
        self.bump();
        if let Some((_, c)) = CONSTS.iter().find(|(n, _)| *n == name) {
            return Ok(Expr::Const(*c));
        }
        if let Some((_, f)) = SETFNS.iter().find(|(n, _)| *n == name) {
            if matches!(self.peek(), Tok::Sym("(")) {
                self.bump();
                let s = self.set()?;
                self.expect(")")?;
                return Ok(Expr::Call(*f, s));
            }
        }
        if name == "assume" && self.eat("(") {
            let e = self.choice()?;
            self.expect(")")?;
            return Ok(Expr::Assume(Box::new(e)));
        }
        let idx = match name.as_str() {
            "restrict" => Some((IdxFn::Restrict, 1)),
            "parcsp" => Some((IdxFn::ParCsp, 2)),
            "hide" => Some((IdxFn::Hide, 1)),
            "rename" => Some((IdxFn::Rename, 1)),
            _ => None,
        };
        if let Some((f, n)) = idx {
            if matches!(self.peek(), Tok::Sym("[")) {
                self.bump();
                let s = self.set()?;
                self.expect("]")?;
                self.expect("(")?;
                let mut args = vec![self.choice()?];
                for _ in 1..n {
                    self.expect(",")?;
                    args.push(self.choice()?);
                }
                self.expect(")")?;
                return Ok(Expr::Indexed(f, s, args));
            }
        }
        Ok(Expr::Ident(name))
    }

    fn set(&mut self) -> Result<SetExpr, ParseError> {
        let mut e = self.set_and()?;
        while self.eat("|") {
            let r = self.set_and()?;
            e = SetExpr::Or(Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn set_and(&mut self) -> Result<SetExpr, ParseError> {
        let mut e = self.set_restrict()?;
        while self.eat("&") {
            let r = self.set_restrict()?;
            e = SetExpr::And(Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn set_restrict(&mut self) -> Result<SetExpr, ParseError> {
        let mut e = self.set_unary()?;
        loop {
            if self.eat("<|") {
                let r = self.set_unary()?;
                e = SetExpr::Dom(Box::new(e), Box::new(r));
            } else if self.eat("|>") {
                let p = self.set_unary()?;
                e = SetExpr::Ran(Box::new(e), Box::new(p));
            } else {
                return Ok(e);
            }
        }
    }

    fn set_unary(&mut self) -> Result<SetExpr, ParseError> {
        if self.eat("!") {
            return Ok(SetExpr::Not(Box::new(self.set_unary()?)));
        }
        if self.eat("(") {
            let e = self.set()?;
            self.expect(")")?;
            return Ok(e);
        }
        if self.eat("{") {
            let mut items = Vec::new();
            if !self.eat("}") {
                loop {
                    if self.eat("(") {
                        let a = self.ident()?;
                        self.expect(",")?;
                        let b = self.ident()?;
                        if self.eat(",") {
                            let c = self.ident()?;
                            self.expect(")")?;
                            items.push(SetItem::Triple(a, b, c));
                        } else {
                            self.expect(")")?;
                            items.push(SetItem::Pair(a, b));
                        }
                    } else {
                        items.push(SetItem::Name(self.ident()?));
                    }
                    if self.eat("}") {
                        break;
                    }
                    self.expect(",")?;
                }
            }
            return Ok(SetExpr::Lit(items));
        }
        Ok(SetExpr::Ident(self.ident()?))
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Num(n) => format!("`{n}`"),
        Tok::Sym(s) => format!("`{s}`"),
        Tok::End => "end of input".to_string(),
    }
}

/// Parse a command expression.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.choice()?;
    if *p.peek() != Tok::End {
        return p.err(format!("unexpected {}", describe(p.peek())));
    }
    Ok(e)
}

/// Parse a set expression (predicate, relation or event set).
pub fn parse_set(src: &str) -> Result<SetExpr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.set()?;
    if *p.peek() != Tok::End {
        return p.err(format!("unexpected {}", describe(p.peek())));
    }
    Ok(e)
}

/// The three interpretations of the abstract synchronisation operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    Par,
    Weak,
    Conj,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Par, Mode::Weak, Mode::Conj];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Par => "||",
            Mode::Weak => "&&",
            Mode::Conj => "/\\",
        }
    }

    pub fn apply(self, u: &Universe, a: Term, b: Term) -> Term {
        match self {
            Mode::Par => Term::sync(SyncMode::Parallel, a, b),
            Mode::Weak => Term::sync(SyncMode::WeakConj, a, b),
            Mode::Conj => u.join([a, b]),
        }
    }

    pub fn atom(self, u: &Universe, a: AtomicDesc, b: AtomicDesc) -> AtomicDesc {
        match self {
            Mode::Par => u.sync_prim(SyncMode::Parallel, a, b),
            Mode::Weak | Mode::Conj => a.join(b),
        }
    }

    pub fn identity(self) -> Term {
        match self {
            Mode::Par => Term::skip(),
            Mode::Weak => Term::chaos(),
            Mode::Conj => Term::bot(),
        }
    }

    pub fn atom_identity(self, u: &Universe) -> AtomicDesc {
        match self {
            Mode::Par => u.eps_bar(),
            Mode::Weak | Mode::Conj => u.alpha(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Shape {
    Atom,
    Test,
    Unknown,
}

/// Values bound to identifiers during resolution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Cmd(Term),
    Atom(AtomicDesc),
    Pred(Bits),
    /// A set of step labels (a lifted relation or event set).
    Labels(Bits),
    /// A relation as a set of state pairs.
    Pairs(Bits),
    Events(Bits),
    Nat(usize),
    Mode(Mode),
    Ren(Arc<Renaming>),
}

pub type Env = BTreeMap<String, Value>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetSort {
    Pred,
    Labels,
    Pairs,
    Events,
}

fn rerr<T>(msg: impl Into<String>) -> Result<T, ResolveError> {
    Err(ResolveError(msg.into()))
}

/// Resolves expressions to terms over a universe.
pub struct Resolver<'u> {
    pub u: &'u Universe,
}

impl<'u> Resolver<'u> {
    pub fn new(u: &'u Universe) -> Self {
        Resolver { u }
    }

    fn labels_to_pairs(&self, l: Bits) -> Bits {
        let u = self.u;
        iter_bits(l).fold(0, |acc, x| {
            acc | bit(u.pair(u.label_pre(x), u.label_post(x)))
        })
    }

    fn coerce(&self, v: &Value, sort: SetSort) -> Option<Bits> {
        let u = self.u;
        match (v, sort) {
            (Value::Pred(p), SetSort::Pred) => Some(*p),
            (Value::Labels(l), SetSort::Labels) => Some(*l),
            (Value::Labels(l), SetSort::Pairs) => Some(self.labels_to_pairs(*l)),
            (Value::Labels(l), SetSort::Events) if u.n_states() == 1 => Some(*l),
            (Value::Pairs(r), SetSort::Pairs) => Some(*r),
            (Value::Pairs(r), SetSort::Labels) => Some(u.lift_rel(*r)),
            (Value::Events(e), SetSort::Events) => Some(*e),
            (Value::Events(e), SetSort::Labels) => Some(u.lift_events(*e)),
            _ => None,
        }
    }

    fn full(&self, sort: SetSort) -> Bits {
        match sort {
            SetSort::Pred => self.u.full_states(),
            SetSort::Labels => self.u.full_labels(),
            SetSort::Pairs => self.u.full_pairs(),
            SetSort::Events => self.u.full_events(),
        }
    }

    fn state(&self, n: &str) -> Result<usize, ResolveError> {
        self.u
            .state_index(n)
            .ok_or_else(|| ResolveError(format!("unknown state `{n}`")))
    }

    fn event(&self, n: &str) -> Result<usize, ResolveError> {
        self.u
            .event_index(n)
            .ok_or_else(|| ResolveError(format!("unknown event `{n}`")))
    }

    fn named(&self, n: &str, sort: SetSort) -> Option<Bits> {
        let u = self.u;
        match sort {
            SetSort::Pred => u.predicate(n).or_else(|| u.state_index(n).map(bit)),
            SetSort::Labels => u
                .relation(n)
                .map(|r| u.lift_rel(r))
                .or_else(|| u.eventset(n).map(|e| u.lift_events(e)))
                .or_else(|| u.event_index(n).map(|e| u.lift_events(bit(e)))),
            SetSort::Pairs => u.relation(n),
            SetSort::Events => u.eventset(n).or_else(|| u.event_index(n).map(bit)),
        }
    }

    pub fn set(&self, s: &SetExpr, sort: SetSort, env: &Env) -> Result<Bits, ResolveError> {
        let u = self.u;
        match s {
            SetExpr::Ident(n) => {
                if let Some(v) = env.get(n) {
                    return self
                        .coerce(v, sort)
                        .ok_or_else(|| ResolveError(format!("`{n}` has the wrong sort here")));
                }
                match n.as_str() {
                    "all" => return Ok(self.full(sort)),
                    "none" => return Ok(0),
                    "id" if matches!(sort, SetSort::Pairs) => return Ok(u.identity_pairs()),
                    "id" if matches!(sort, SetSort::Labels) => return Ok(u.identity_labels()),
                    _ => {}
                }
                self.named(n, sort)
                    .ok_or_else(|| ResolveError(format!("unknown identifier `{n}`")))
            }
            SetExpr::Lit(items) => {
                let mut out = 0;
                for it in items {
                    out |= match (it, sort) {
                        (SetItem::Name(n), SetSort::Pred) => bit(self.state(n)?),
                        (SetItem::Name(n), SetSort::Events) => bit(self.event(n)?),
                        (SetItem::Name(n), SetSort::Labels) => u.lift_events(bit(self.event(n)?)),
                        (SetItem::Pair(a, b), SetSort::Pairs) => {
                            bit(u.pair(self.state(a)?, self.state(b)?))
                        }
                        (SetItem::Pair(a, b), SetSort::Labels) => {
                            u.lift_rel(bit(u.pair(self.state(a)?, self.state(b)?)))
                        }
                        (SetItem::Triple(a, e, b), SetSort::Labels) => {
                            bit(u.label(self.state(a)?, self.event(e)?, self.state(b)?))
                        }
                        _ => return rerr("set element of the wrong shape"),
                    };
                }
                Ok(out)
            }
            SetExpr::Not(x) => Ok(self.full(sort) & !self.set(x, sort, env)?),
            SetExpr::And(a, b) => Ok(self.set(a, sort, env)? & self.set(b, sort, env)?),
            SetExpr::Or(a, b) => Ok(self.set(a, sort, env)? | self.set(b, sort, env)?),
            SetExpr::Dom(p, r) => {
                let p = self.set(p, SetSort::Pred, env)?;
                let r = self.set(r, sort, env)?;
                match sort {
                    SetSort::Labels => Ok(r & u.pre_mask(p)),
                    SetSort::Pairs => Ok(iter_bits(r)
                        .filter(|x| p & bit(x / u.n_states()) != 0)
                        .fold(0, |a, x| a | bit(x))),
                    _ => rerr("domain restriction applies to relations"),
                }
            }
            SetExpr::Ran(r, p) => {
                let p = self.set(p, SetSort::Pred, env)?;
                let r = self.set(r, sort, env)?;
                match sort {
                    SetSort::Labels => Ok(r & u.post_mask(p)),
                    SetSort::Pairs => Ok(iter_bits(r)
                        .filter(|x| p & bit(x % u.n_states()) != 0)
                        .fold(0, |a, x| a | bit(x))),
                    _ => rerr("range restriction applies to relations"),
                }
            }
        }
    }

    fn mode(&self, env: &Env) -> Result<Mode, ResolveError> {
        match env.get("##") {
            Some(Value::Mode(m)) => Ok(*m),
            _ => rerr("`##` needs a synchronisation mode"),
        }
    }

    /// Evaluate an expression that must denote an atomic step.
    pub fn atom(&self, e: &Expr, env: &Env) -> Result<AtomicDesc, ResolveError> {
        let u = self.u;
        if let Expr::Not(x) = e {
            if self.shape(x, env) == Shape::Atom {
                return Ok(u.negate(self.atom(x, env)?));
            }
        }
        let t = self.term(e, env)?;
        if let Some(a) = t.as_atom() {
            return Ok(a);
        }
        if t.is_top() {
            return Ok(AtomicDesc::TOP);
        }
        match e {
            Expr::Bin(op, a, b) => {
                let (x, y) = (self.atom(a, env)?, self.atom(b, env)?);
                Ok(match op {
                    BinOp::Par => u.sync_prim(SyncMode::Parallel, x, y),
                    BinOp::Weak | BinOp::Conj => x.join(y),
                    BinOp::Sync => self.mode(env)?.atom(u, x, y),
                })
            }
            _ => rerr("expected an atomic step"),
        }
    }

    /// Whether an expression is syntactically a step or a test, which
    /// decides what `!` means when the operand evaluates to `top`.
    fn shape(&self, e: &Expr, env: &Env) -> Shape {
        let both = |a: &Expr, b: &Expr| match (self.shape(a, env), self.shape(b, env)) {
            (x, y) if x == y => x,
            _ => Shape::Unknown,
        };
        match e {
            Expr::Ident(n) => match env.get(n) {
                Some(Value::Atom(_)) => Shape::Atom,
                Some(Value::Pred(_)) => Shape::Test,
                Some(Value::Cmd(t)) => match t.kind() {
                    Kind::Atom(_) => Shape::Atom,
                    Kind::Test(_) | Kind::Nil => Shape::Test,
                    _ => Shape::Unknown,
                },
                _ => Shape::Unknown,
            },
            Expr::Const(Const::Alpha | Const::Eps | Const::PiStep | Const::SyncAtomId) => {
                Shape::Atom
            }
            Expr::Const(Const::Nil) => Shape::Test,
            Expr::Call(SetFn::Pgm | SetFn::Env, _) => Shape::Atom,
            Expr::Call(SetFn::Test, _) => Shape::Test,
            Expr::Not(a) => self.shape(a, env),
            Expr::Choice(a, b) | Expr::Bin(_, a, b) => both(a, b),
            Expr::Seq(a, b) => match both(a, b) {
                Shape::Test => Shape::Test,
                _ => Shape::Unknown,
            },
            _ => Shape::Unknown,
        }
    }

    pub fn term(&self, e: &Expr, env: &Env) -> Result<Term, ResolveError> {
        let u = self.u;
        Ok(match e {
            Expr::Ident(n) => match env.get(n) {
                Some(Value::Cmd(t)) => t.clone(),
                Some(Value::Atom(a)) => Term::atom(*a),
                Some(Value::Pred(p)) => u.test(*p),
                Some(_) => return rerr(format!("`{n}` is not a command")),
                None => return rerr(format!("unknown identifier `{n}`")),
            },
            Expr::Const(c) => match c {
                Const::Bot => Term::bot(),
                Const::Top => Term::top(),
                Const::Nil => Term::nil(),
                Const::Skip => Term::skip(),
                Const::Chaos => Term::chaos(),
                Const::Term => Term::term_cmd(),
                Const::Alpha => Term::atom(u.alpha()),
                Const::Eps => Term::atom(u.eps_bar()),
                Const::PiStep => Term::atom(u.pi_bar()),
                Const::SyncId => self.mode(env)?.identity(),
                Const::SyncAtomId => Term::atom(self.mode(env)?.atom_identity(u)),
            },
            Expr::Call(f, s) => match f {
                SetFn::Test => u.test(self.set(s, SetSort::Pred, env)?),
                SetFn::Assert => u.assert(self.set(s, SetSort::Pred, env)?),
                SetFn::Pgm => Term::atom(u.pi(self.set(s, SetSort::Labels, env)?)),
                SetFn::Env => Term::atom(u.eps(self.set(s, SetSort::Labels, env)?)),
                SetFn::Guar => u.guar(self.set(s, SetSort::Labels, env)?),
                SetFn::Rely => u.rely(self.set(s, SetSort::Labels, env)?),
                SetFn::Spec => u.spec(self.set(s, SetSort::Pairs, env)?),
                SetFn::Atev => {
                    let es = self.set(s, SetSort::Events, env)?;
                    if es.count_ones() != 1 {
                        return rerr("atev takes a single event");
                    }
                    Term::atev(es.trailing_zeros() as usize)
                }
            },
            Expr::Assume(a) => Term::assume_step(self.atom(a, env)?),
            Expr::Indexed(f, s, args) => {
                let ts = args
                    .iter()
                    .map(|a| self.term(a, env))
                    .collect::<Result<Vec<_>, _>>()?;
                match f {
                    IdxFn::Restrict => {
                        u.ccs_restrict(self.set(s, SetSort::Events, env)?, ts[0].clone())
                    }
                    IdxFn::ParCsp => {
                        if u.style() != ParStyle::Csp {
                            return rerr("parcsp needs a universe with csp tagging");
                        }
                        u.csp_par(
                            self.set(s, SetSort::Events, env)?,
                            ts[0].clone(),
                            ts[1].clone(),
                        )
                    }
                    IdxFn::Hide => u.hide(self.set(s, SetSort::Events, env)?, ts[0].clone()),
                    IdxFn::Rename => {
                        let name = match s {
                            SetExpr::Ident(n) => n,
                            _ => return rerr("rename takes a renaming name"),
                        };
                        let r = match env.get(name) {
                            Some(Value::Ren(r)) => r.clone(),
                            _ => u.renaming(name).ok_or_else(|| {
                                ResolveError(format!("unknown renaming `{name}`"))
                            })?,
                        };
                        Term::rename(r, ts[0].clone())
                    }
                }
            }
            Expr::Seq(a, b) => u.seq(self.term(a, env)?, self.term(b, env)?),
            Expr::Choice(a, b) => u.choice([self.term(a, env)?, self.term(b, env)?]),
            Expr::Bin(op, a, b) => {
                let (x, y) = (self.term(a, env)?, self.term(b, env)?);
                match op {
                    BinOp::Par => Term::sync(SyncMode::Parallel, x, y),
                    BinOp::Weak => Term::sync(SyncMode::WeakConj, x, y),
                    BinOp::Conj => u.join([x, y]),
                    BinOp::Sync => self.mode(env)?.apply(u, x, y),
                }
            }
            Expr::Iter(op, a) => {
                let x = self.term(a, env)?;
                match op {
                    IterOp::Fin => Term::fin_iter(x),
                    IterOp::Om => Term::om_iter(x),
                    IterOp::Inf => Term::inf_iter(x),
                }
            }
            Expr::Power(a, n) => {
                let i = match n {
                    Nat::Lit(i) => *i,
                    Nat::Var(v) => match env.get(v) {
                        Some(Value::Nat(i)) => *i,
                        _ => return rerr(format!("`{v}` is not a number")),
                    },
                };
                u.power(&self.term(a, env)?, i)
            }
            Expr::Not(a) => {
                let x = self.term(a, env)?;
                match (self.shape(a, env), x.kind()) {
                    (Shape::Atom, _) => Term::atom(u.negate(self.atom(a, env)?)),
                    (_, Kind::Atom(d)) => Term::atom(u.negate(*d)),
                    (_, Kind::Test(p)) => u.neg_test(*p),
                    (Shape::Test, Kind::Top) => Term::nil(),
                    (_, Kind::Nil) => Term::top(),
                    (_, Kind::Top) => return rerr("`!top` is ambiguous between tests and steps"),
                    _ => match self.atom(a, env) {
                        Ok(d) => Term::atom(u.negate(d)),
                        Err(_) => return rerr("`!` applies to tests and atomic steps"),
                    },
                }
            }
        })
    }
}

/// Parse and resolve a closed command expression.
pub fn parse_term(u: &Universe, src: &str) -> Result<Term, String> {
    let e = parse_expr(src).map_err(|e| e.to_string())?;
    Resolver::new(u)
        .term(&e, &Env::new())
        .map_err(|e| e.to_string())
}

/// Printing of terms in the concrete syntax.
pub struct Printer<'u> {
    pub u: &'u Universe,
}

const P_CHOICE: u8 = 0;
const P_BIN: u8 = 1;
const P_SEQ: u8 = 2;
const P_POST: u8 = 4;
const P_ATOM: u8 = 5;

impl<'u> Printer<'u> {
    pub fn new(u: &'u Universe) -> Self {
        Printer { u }
    }

    fn names(&self, v: &[(String, Bits)], b: Bits) -> Option<String> {
        v.iter().find(|(_, x)| *x == b).map(|(n, _)| n.clone())
    }

    pub fn pred(&self, p: Bits) -> String {
        if let Some(n) = self.names(self.u.predicates(), p) {
            return n;
        }
        let items: Vec<&str> = iter_bits(p).map(|s| self.u.state_name(s)).collect();
        format!("{{{}}}", items.join(", "))
    }

    pub fn pairs(&self, r: Bits) -> String {
        if let Some(n) = self.names(self.u.relations(), r) {
            return n;
        }
        let n = self.u.n_states();
        let items: Vec<String> = iter_bits(r)
            .map(|x| {
                format!(
                    "({}, {})",
                    self.u.state_name(x / n),
                    self.u.state_name(x % n)
                )
            })
            .collect();
        format!("{{{}}}", items.join(", "))
    }

    pub fn events(&self, e: Bits) -> String {
        if let Some(n) = self.names(self.u.eventsets(), e) {
            return n;
        }
        let items: Vec<&str> = iter_bits(e).map(|x| self.u.event_name(x)).collect();
        format!("{{{}}}", items.join(", "))
    }

    pub fn labels(&self, l: Bits) -> String {
        let u = self.u;
        match u.kind() {
            LabelKind::Relational => self.pairs(l),
            LabelKind::Event => self.events(l),
            LabelKind::Combined => {
                for (n, r) in u.relations() {
                    if u.lift_rel(*r) == l {
                        return n.clone();
                    }
                }
                for (n, e) in u.eventsets() {
                    if u.lift_events(*e) == l {
                        return n.clone();
                    }
                }
                let items: Vec<String> = iter_bits(l)
                    .map(|x| {
                        format!(
                            "({}, {}, {})",
                            u.state_name(u.label_pre(x)),
                            u.event_name(u.label_event(x)),
                            u.state_name(u.label_post(x))
                        )
                    })
                    .collect();
                format!("{{{}}}", items.join(", "))
            }
        }
    }

    fn atom(&self, a: AtomicDesc) -> (String, u8) {
        let u = self.u;
        let f = u.full_labels();
        if a.pgm == f && a.env == f {
            return ("alpha".into(), P_ATOM);
        }
        let p = match a.pgm {
            0 => None,
            x if x == f => Some("pistep".to_string()),
            x => Some(format!("pgm({})", self.labels(x))),
        };
        let e = match a.env {
            0 => None,
            x if x == f => Some("eps".to_string()),
            x => Some(format!("env({})", self.labels(x))),
        };
        match (p, e) {
            (Some(p), Some(e)) => (format!("{p} \\/ {e}"), P_CHOICE),
            (Some(x), None) | (None, Some(x)) => (x, P_ATOM),
            (None, None) => ("top".into(), P_ATOM),
        }
    }

    fn wrap(&self, t: &Term, min: u8) -> String {
        let (s, p) = self.go(t);
        if p < min {
            format!("({s})")
        } else {
            s
        }
    }

    pub fn print(&self, t: &Term) -> String {
        self.go(t).0
    }

    fn go(&self, t: &Term) -> (String, u8) {
        let u = self.u;
        match t.kind() {
            Kind::Bot => ("bot".into(), P_ATOM),
            Kind::Top => ("top".into(), P_ATOM),
            Kind::Nil => ("nil".into(), P_ATOM),
            Kind::Test(p) => (format!("test({})", self.pred(*p)), P_ATOM),
            Kind::Atom(a) => self.atom(*a),
            Kind::Seq(a, b) => (
                format!("{}; {}", self.wrap(a, P_SEQ + 1), self.wrap(b, P_SEQ)),
                P_SEQ,
            ),
            Kind::Choice(v) => {
                let parts: Vec<String> = v.iter().map(|x| self.wrap(x, P_BIN)).collect();
                (parts.join(" \\/ "), P_CHOICE)
            }
            Kind::Join(v) => {
                let parts: Vec<String> = v.iter().map(|x| self.wrap(x, P_SEQ)).collect();
                (parts.join(" /\\ "), P_BIN)
            }
            Kind::Sync(m, a, b) => (
                format!(
                    "{} {} {}",
                    self.wrap(a, P_BIN),
                    m.symbol(),
                    self.wrap(b, P_SEQ)
                ),
                P_BIN,
            ),
            Kind::FinIter(b) => (format!("{}^*", self.wrap(b, P_ATOM)), P_POST),
            Kind::OmIter(b) => (format!("{}^w", self.wrap(b, P_ATOM)), P_POST),
            Kind::InfIter(b) => (format!("{}^inf", self.wrap(b, P_ATOM)), P_POST),
            Kind::Rename(r, b) => (format!("rename[{}]({})", r.name, self.print(b)), P_ATOM),
            Kind::Derived(d) => {
                let s = match &**d {
                    Derived::Assert(p) => format!("assert({})", self.pred(*p)),
                    Derived::AssumeStep(a) => format!("assume({})", self.atom(*a).0),
                    Derived::Skip => "skip".into(),
                    Derived::Chaos => "chaos".into(),
                    Derived::Term => "term".into(),
                    Derived::Guar(g) => format!("guar({})", self.labels(*g)),
                    Derived::Rely(r) => format!("rely({})", self.labels(*r)),
                    Derived::Spec(q) => format!("spec({})", self.pairs(*q)),
                    Derived::Atev(e) => format!("atev({})", u.event_name(*e)),
                    Derived::CcsRestrict(es, c) => {
                        format!("restrict[{}]({})", self.events(*es), self.print(c))
                    }
                    Derived::CspPar(es, c, d) => format!(
                        "parcsp[{}]({}, {})",
                        self.events(*es),
                        self.print(c),
                        self.print(d)
                    ),
                    Derived::Hide(es, c) => {
                        format!("hide[{}]({})", self.events(*es), self.print(c))
                    }
                };
                (s, P_ATOM)
            }
        }
    }
}

fn nat_str(n: &Nat) -> String {
    match n {
        Nat::Lit(i) => format!("{i}"),
        Nat::Var(v) => v.clone(),
    }
}

impl fmt::Display for SetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetExpr::Ident(n) => f.write_str(n),
            SetExpr::Lit(items) => {
                f.write_str("{")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    match it {
                        SetItem::Name(n) => f.write_str(n)?,
                        SetItem::Pair(a, b) => write!(f, "({a}, {b})")?,
                        SetItem::Triple(a, e, b) => write!(f, "({a}, {e}, {b})")?,
                    }
                }
                f.write_str("}")
            }
            SetExpr::Not(x) => write!(f, "!({x})"),
            SetExpr::And(a, b) => write!(f, "({a} & {b})"),
            SetExpr::Or(a, b) => write!(f, "({a} | {b})"),
            SetExpr::Dom(p, r) => write!(f, "({p} <| {r})"),
            SetExpr::Ran(r, p) => write!(f, "({r} |> {p})"),
        }
    }
}

impl Expr {
    fn prec(&self) -> u8 {
        match self {
            Expr::Choice(..) => P_CHOICE,
            Expr::Bin(..) => P_BIN,
            Expr::Seq(..) => P_SEQ,
            Expr::Not(_) => 3,
            Expr::Iter(..) | Expr::Power(..) => P_POST,
            _ => P_ATOM,
        }
    }

    fn wrap(&self, min: u8) -> String {
        if self.prec() < min {
            format!("({self})")
        } else {
            format!("{self}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Ident(n) => f.write_str(n),
            Expr::Const(c) => {
                let n = CONSTS
                    .iter()
                    .find(|(_, x)| x == c)
                    .map(|(n, _)| *n)
                    .unwrap_or("?");
                f.write_str(n)
            }
            Expr::Call(func, s) => {
                let n = SETFNS
                    .iter()
                    .find(|(_, x)| x == func)
                    .map(|(n, _)| *n)
                    .unwrap_or("?");
                write!(f, "{n}({s})")
            }
            Expr::Assume(a) => write!(f, "assume({a})"),
            Expr::Indexed(func, s, args) => {
                let n = match func {
                    IdxFn::Restrict => "restrict",
                    IdxFn::ParCsp => "parcsp",
                    IdxFn::Hide => "hide",
                    IdxFn::Rename => "rename",
                };
                let args: Vec<String> = args.iter().map(|a| format!("{a}")).collect();
                write!(f, "{n}[{s}]({})", args.join(", "))
            }
            Expr::Seq(a, b) => write!(f, "{}; {}", a.wrap(P_SEQ), b.wrap(P_SEQ + 1)),
            Expr::Choice(a, b) => write!(f, "{} \\/ {}", a.wrap(P_CHOICE), b.wrap(P_BIN)),
            Expr::Bin(op, a, b) => write!(f, "{} {} {}", a.wrap(P_BIN), op.symbol(), b.wrap(P_SEQ)),
            Expr::Iter(op, a) => {
                let s = match op {
                    IterOp::Fin => "*",
                    IterOp::Om => "w",
                    IterOp::Inf => "inf",
                };
                write!(f, "{}^{s}", a.wrap(P_ATOM))
            }
            Expr::Power(a, n) => write!(f, "{}^{}", a.wrap(P_ATOM), nat_str(n)),
            Expr::Not(a) => write!(f, "!{}", a.wrap(P_POST)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> Universe {
        let mut u = Universe::relational(&["s0", "s1"]).unwrap();
        u.add_relation("r", 0b0110).unwrap();
        u.add_relation("g", 0b1001).unwrap();
        u.add_relation("q", 0b1111).unwrap();
        u.add_predicate("p", 0b01).unwrap();
        u
    }

    #[test]
    fn precedence_examples() {
        let u = model();
        let t = parse_term(&u, "rely(r) && guar(g) && spec(q)").unwrap();
        let Kind::Sync(SyncMode::WeakConj, l, r) = t.kind() else {
            panic!()
        };
        assert!(matches!(l.kind(), Kind::Sync(SyncMode::WeakConj, _, _)));
        assert!(matches!(r.kind(), Kind::Derived(d) if matches!(**d, Derived::Spec(_))));
        let t = parse_term(&u, "pgm(r) || env(g)").unwrap();
        let Kind::Sync(SyncMode::Parallel, a, b) = t.kind() else {
            panic!()
        };
        assert_eq!(a.as_atom(), Some(u.pi(0b0110)));
        assert_eq!(b.as_atom(), Some(u.eps(0b1001)));
    }

    #[test]
    fn syntax_errors_have_positions() {
        let e = parse_expr("nil ;").unwrap_err();
        assert_eq!((e.line, e.col), (1, 6));
        let e = parse_expr("nil\n  ; ^w").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(parse_expr("a $ b").is_err());
        let u = model();
        assert!(parse_term(&u, "guar(zz)").unwrap_err().contains("zz"));
    }

    #[test]
    fn postfix_binds_tightest() {
        let e = parse_expr("a; b^w \\/ c").unwrap();
        let Expr::Choice(l, _) = e else { panic!() };
        let Expr::Seq(_, r) = *l else { panic!() };
        assert!(matches!(*r, Expr::Iter(IterOp::Om, _)));
    }

    #[test]
    fn print_parse_roundtrip() {
        let u = model();
        for src in [
            "pgm(r) \\/ env(g)",
            "(pgm(r) \\/ env(g))^w; test(p)",
            "a_b",
            "rely(r) && guar(g) && spec(q)",
            "(skip || term) /\\ chaos",
            "assume(pistep \\/ env(r))^w",
            "test(!p); pgm({(s0, s1)}); bot",
            "(nil \\/ alpha; bot)^inf",
            "pgm(r) || (env(r) || eps)",
        ] {
            let Ok(t) = parse_term(&u, src) else {
                continue;
            };
            let s = Printer::new(&u).print(&t);
            let t2 = parse_term(&u, &s).unwrap_or_else(|e| panic!("{s}: {e}"));
            assert_eq!(t, t2, "{src} printed as {s}");
        }
    }

    #[test]
    fn set_operators() {
        let u = model();
        let r = Resolver::new(&u);
        let env = Env::new();
        let s = parse_set("p <| r").unwrap();
        assert_eq!(r.set(&s, SetSort::Pairs, &env).unwrap(), 0b0010);
        let s = parse_set("r |> !p").unwrap();
        assert_eq!(r.set(&s, SetSort::Pairs, &env).unwrap(), 0b0010);
        let s = parse_set("!r & q | {(s1, s1)}").unwrap();
        assert_eq!(r.set(&s, SetSort::Pairs, &env).unwrap(), 0b1001);
    }

    #[test]
    fn generic_sync_follows_mode() {
        let u = model();
        let e = parse_expr("a ## b").unwrap();
        let mut env = Env::new();
        env.insert("a".into(), Value::Atom(u.pi(0b0110)));
        env.insert("b".into(), Value::Atom(u.eps(0b0011)));
        let r = Resolver::new(&u);
        env.insert("##".into(), Value::Mode(Mode::Par));
        assert_eq!(r.atom(&e, &env).unwrap(), u.pi(0b0010));
        env.insert("##".into(), Value::Mode(Mode::Conj));
        assert!(r.term(&e, &env).unwrap().is_top());
    }
}
