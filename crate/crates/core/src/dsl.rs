//! Family definition language.
//!
//! ```text
//! # comment
//! let A = fan(limit=~0, stride=1, offset=0, dev=)
//! let D = fanarray(base=cube(mask=~F0), c=1, stride=4, withbase)
//! lgs closure(A)
//! meet closure(A), gallery(fan-s)
//! oracle-check A --depth 8
//! ```

use std::collections::BTreeMap;

use crate::blocks::{intersect, union, Block, Fan, FanArray, Family, Mask, PosSet};
use crate::closure::closure;
use crate::error::{Error, Result};
use crate::gallery;
use crate::lattice::{meet_prime, LatticeElement};
use crate::stone::{parse_bits, TheoryPoint};
use crate::word::UltWord;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Block(Block),
    Closure(Box<Expr>),
    Union(Vec<Expr>),
    Intersect(Vec<Expr>),
    MeetPrime(Vec<Expr>),
    Gallery(String),
    Empty,
    Name(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Arg {
    Expr(Expr),
    Flag(String, Option<String>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum StatementKind {
    Let(String, Expr),
    Command(String, Vec<Arg>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Statement {
    pub line: usize,
    pub kind: StatementKind,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SessionScript {
    pub statements: Vec<Statement>,
}

const DELIMS: &[char] = &[' ', '\t', '\r', '\n', ',', '(', ')', '{', '}', '[', ']', '=', '#'];

pub const COMMANDS: &[&str] = &[
    "closure",
    "lgs",
    "meet",
    "join",
    "meetprime",
    "leq",
    "decompose",
    "lattice",
    "algebra",
    "cbrank",
    "oracle-check",
    "verify",
    "export",
    "print",
];

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    /// Position just after the last non-blank character consumed.
    last: (usize, usize),
}

impl Cursor {
    fn new(text: &str) -> Self {
        Cursor {
            chars: text.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
            last: (1, 1),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        if !c.is_whitespace() {
            self.last = (self.line, self.col);
        }
        Some(c)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        let (line, column) = match self.peek() {
            None => self.last,
            Some(_) => (self.line, self.col),
        };
        Err(Error::Parse {
            line,
            column,
            message: message.into(),
        })
    }

    fn skip_comment(&mut self) {
        while let Some(c) = self.peek() {
            if c == '\n' {
                break;
            }
            self.bump();
        }
    }

    /// Skips blanks; newlines too when `newlines` is set.
    fn skip_ws(&mut self, newlines: bool) {
        while let Some(c) = self.peek() {
            match c {
                ' ' | '\t' | '\r' => {
                    self.bump();
                }
                '\n' if newlines => {
                    self.bump();
                }
                '#' => self.skip_comment(),
                _ => break,
            }
        }
    }

    fn atom(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if DELIMS.contains(&c) {
                break;
            }
            s.push(c);
            self.bump();
        }
        s
    }

    fn expect(&mut self, want: char, newlines: bool) -> Result<()> {
        self.skip_ws(newlines);
        match self.peek() {
            Some(c) if c == want => {
                self.bump();
                Ok(())
            }
            Some(c) => self.err(format!("expected `{want}`, found `{c}`")),
            None => self.err(format!("expected `{want}`, found end of input")),
        }
    }

    fn eat(&mut self, want: char, newlines: bool) -> bool {
        self.skip_ws(newlines);
        if self.peek() == Some(want) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn at_line_end(&mut self) -> bool {
        self.skip_ws(false);
        matches!(self.peek(), None | Some('\n'))
    }
}

fn is_name(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

fn parse_point(cur: &Cursor, s: &str) -> Result<TheoryPoint> {
    s.parse().or_else(|_| cur.err(format!("malformed point `{s}`")))
}

fn parse_posset(cur: &Cursor, s: &str) -> Result<PosSet> {
    let word = s
        .split_once('~')
        .and_then(|(a, b)| UltWord::new(parse_bits(a)?, parse_bits(b)?));
    match word {
        Some(w) => Ok(PosSet::from_word(w)),
        None => cur.err(format!("malformed position set `{s}`")),
    }
}

fn parse_usize(cur: &Cursor, key: &str, s: &str) -> Result<usize> {
    s.parse()
        .or_else(|_| cur.err(format!("`{key}` expects a number, found `{s}`")))
}

struct KeyValues {
    items: BTreeMap<String, Option<KvValue>>,
}

enum KvValue {
    Atom(String),
    Expr(Expr),
    List(Vec<String>),
}

impl KeyValues {
    fn atom(&self, cur: &Cursor, key: &str) -> Result<Option<String>> {
        match self.items.get(key) {
            None => Ok(None),
            Some(Some(KvValue::Atom(s))) => Ok(Some(s.clone())),
            Some(_) => cur.err(format!("`{key}` expects a plain value")),
        }
    }

    fn flag(&self, key: &str) -> bool {
        matches!(self.items.get(key), Some(None))
    }

    fn check_keys(&self, cur: &Cursor, allowed: &[&str]) -> Result<()> {
        match self.items.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => cur.err(format!("unknown parameter `{k}`")),
            None => Ok(()),
        }
    }
}

fn parse_kvs(cur: &mut Cursor) -> Result<KeyValues> {
    cur.expect('(', false)?;
    let mut items = BTreeMap::new();
    if cur.eat(')', true) {
        return Ok(KeyValues { items });
    }
    loop {
        cur.skip_ws(true);
        let key = cur.atom();
        if key.is_empty() {
            return cur.err("expected a parameter name");
        }
        let value = if cur.eat('=', true) {
            cur.skip_ws(true);
            Some(match key.as_str() {
                "base" => KvValue::Expr(parse_expr(cur)?),
                "exclude" => {
                    cur.expect('[', true)?;
                    let mut v = Vec::new();
                    if !cur.eat(']', true) {
                        loop {
                            cur.skip_ws(true);
                            v.push(cur.atom());
                            if cur.eat(']', true) {
                                break;
                            }
                            cur.expect(',', true)?;
                        }
                    }
                    KvValue::List(v)
                }
                _ => KvValue::Atom(cur.atom()),
            })
        } else {
            None
        };
        if items.insert(key.clone(), value).is_some() {
            return cur.err(format!("duplicate parameter `{key}`"));
        }
        if cur.eat(')', true) {
            return Ok(KeyValues { items });
        }
        cur.expect(',', true)?;
    }
}

fn parse_fan(cur: &mut Cursor) -> Result<Block> {
    let kv = parse_kvs(cur)?;
    kv.check_keys(cur, &["limit", "stride", "offset", "flips", "dev", "withlimit"])?;
    let Some(limit) = kv.atom(cur, "limit")? else {
        return cur.err("fan needs `limit`");
    };
    let limit = parse_point(cur, &limit)?;
    let stride = kv.atom(cur, "stride")?;
    let offset = kv.atom(cur, "offset")?;
    let flips = match kv.atom(cur, "flips")? {
        Some(w) => {
            if stride.is_some() || offset.is_some() {
                return cur.err("fan takes either `flips` or `stride`/`offset`");
            }
            parse_posset(cur, &w)?
        }
        None => {
            let a = stride.map_or(Ok(1), |s| parse_usize(cur, "stride", &s))?;
            let b = offset.map_or(Ok(0), |s| parse_usize(cur, "offset", &s))?;
            if a == 0 {
                return cur.err("`stride` must be at least 1");
            }
            PosSet::arithmetic(a, b)
        }
    };
    let dev = kv.atom(cur, "dev")?.unwrap_or_default();
    let Some(dev) = parse_bits(&dev) else {
        return cur.err(format!("malformed deviation word `{dev}`"));
    };
    Ok(Block::Fan(Fan::new(limit, flips, dev, kv.flag("withlimit"))))
}

fn parse_mask(cur: &Cursor, s: &str) -> Result<Mask> {
    match Mask::parse(s) {
        Some(m) => Ok(m),
        None => cur.err(format!("malformed mask `{s}`")),
    }
}

fn parse_cube(cur: &mut Cursor) -> Result<Mask> {
    let kv = parse_kvs(cur)?;
    kv.check_keys(cur, &["mask"])?;
    let Some(m) = kv.atom(cur, "mask")? else {
        return cur.err("cube needs `mask`");
    };
    let m = parse_mask(cur, &m)?;
    if !m.has_infinite_free() {
        return cur.err("cube mask needs infinitely many free coordinates");
    }
    Ok(m)
}

fn parse_fanarray(cur: &mut Cursor) -> Result<Block> {
    let kv = parse_kvs(cur)?;
    kv.check_keys(cur, &["base", "c", "stride", "coding", "withbase", "exclude"])?;
    let base = match kv.items.get("base") {
        Some(Some(KvValue::Expr(Expr::Block(Block::Cube(m))))) => m.clone(),
        Some(_) => return cur.err("`base` expects `cube(mask=...)`"),
        None => return cur.err("fanarray needs `base`"),
    };
    let c = kv.atom(cur, "c")?;
    let stride = kv.atom(cur, "stride")?;
    let coding = match kv.atom(cur, "coding")? {
        Some(w) => {
            if c.is_some() || stride.is_some() {
                return cur.err("fanarray takes either `coding` or `c`/`stride`");
            }
            parse_posset(cur, &w)?
        }
        None => {
            let Some(c) = c else {
                return cur.err("fanarray needs `c` or `coding`");
            };
            let c = parse_usize(cur, "c", &c)?;
            match stride {
                Some(s) => {
                    let s = parse_usize(cur, "stride", &s)?;
                    if s == 0 {
                        return cur.err("`stride` must be at least 1");
                    }
                    PosSet::arithmetic(s, c)
                }
                None => PosSet::all().difference(&PosSet::finite(0..c)),
            }
        }
    };
    let excluded = match kv.items.get("exclude") {
        Some(Some(KvValue::List(v))) => v
            .iter()
            .map(|s| parse_point(cur, s))
            .collect::<Result<Vec<_>>>()?,
        Some(_) => return cur.err("`exclude` expects a list `[...]`"),
        None => Vec::new(),
    };
    Ok(Block::FanArray(
        FanArray::new(base, coding, kv.flag("withbase")).with_excluded(excluded),
    ))
}

fn parse_args(cur: &mut Cursor) -> Result<Vec<Expr>> {
    cur.expect('(', false)?;
    let mut v = Vec::new();
    if cur.eat(')', true) {
        return Ok(v);
    }
    loop {
        cur.skip_ws(true);
        v.push(parse_expr(cur)?);
        if cur.eat(')', true) {
            return Ok(v);
        }
        cur.expect(',', true)?;
    }
}

fn parse_expr(cur: &mut Cursor) -> Result<Expr> {
    cur.skip_ws(false);
    let (line, col) = (cur.line, cur.col);
    let word = cur.atom();
    let at = |message: String| Error::Parse {
        line,
        column: col,
        message,
    };
    Ok(match word.as_str() {
        "" => return cur.err("expected a family expression"),
        "fin" => {
            cur.expect('{', false)?;
            let mut pts = Vec::new();
            if !cur.eat('}', true) {
                loop {
                    cur.skip_ws(true);
                    if cur.peek().is_none() {
                        return cur.err("unterminated `fin{`");
                    }
                    let s = cur.atom();
                    pts.push(parse_point(cur, &s)?);
                    if cur.eat('}', true) {
                        break;
                    }
                    cur.expect(',', true)?;
                }
            }
            Expr::Block(Block::finset(pts))
        }
        "fan" => Expr::Block(parse_fan(cur)?),
        "cube" => Expr::Block(Block::Cube(parse_cube(cur)?)),
        "fanarray" => Expr::Block(parse_fanarray(cur)?),
        "closure" => {
            let mut args = parse_args(cur)?;
            if args.len() != 1 {
                return Err(at("`closure` takes one argument".into()));
            }
            Expr::Closure(Box::new(args.remove(0)))
        }
        "union" => Expr::Union(parse_args(cur)?),
        "intersect" | "meetprime" => {
            let args = parse_args(cur)?;
            if args.is_empty() {
                return Err(at(format!("`{word}` needs at least one argument")));
            }
            if word == "intersect" {
                Expr::Intersect(args)
            } else {
                Expr::MeetPrime(args)
            }
        }
        "gallery" => {
            cur.expect('(', false)?;
            cur.skip_ws(true);
            let name = cur.atom();
            cur.expect(')', true)?;
            Expr::Gallery(name)
        }
        "empty" => Expr::Empty,
        w if is_name(w) => Expr::Name(w.to_string()),
        w => return Err(at(format!("unexpected `{w}`"))),
    })
}

fn parse_statement(cur: &mut Cursor) -> Result<Option<Statement>> {
    cur.skip_ws(true);
    if cur.peek().is_none() {
        return Ok(None);
    }
    let line = cur.line;
    let (l0, c0) = (cur.line, cur.col);
    let word = cur.atom();
    let kind = if word == "let" {
        cur.skip_ws(false);
        let name = cur.atom();
        if !is_name(&name) {
            return cur.err(format!("invalid name `{name}`"));
        }
        cur.expect('=', false)?;
        StatementKind::Let(name, parse_expr(cur)?)
    } else if COMMANDS.contains(&word.as_str()) {
        let mut args = Vec::new();
        while !cur.at_line_end() {
            if cur.eat(',', false) {
                continue;
            }
            if cur.peek() == Some('-') && cur.chars.get(cur.pos + 1) == Some(&'-') {
                let flag = cur.atom();
                let flag = flag.trim_start_matches('-').to_string();
                cur.skip_ws(false);
                let value = if cur.at_line_end() || cur.peek() == Some('-') {
                    None
                } else {
                    Some(cur.atom())
                };
                args.push(Arg::Flag(flag, value));
            } else {
                args.push(Arg::Expr(parse_expr(cur)?));
            }
        }
        StatementKind::Command(word, args)
    } else {
        return Err(Error::Parse {
            line: l0,
            column: c0,
            message: if word.is_empty() {
                format!("unexpected `{}`", cur.peek().unwrap_or(' '))
            } else {
                format!("unknown command `{word}`")
            },
        });
    };
    if !cur.at_line_end() {
        return cur.err("unexpected trailing input");
    }
    Ok(Some(Statement { line, kind }))
}

pub fn parse_script(text: &str) -> Result<SessionScript> {
    let mut cur = Cursor::new(text);
    let mut statements = Vec::new();
    while let Some(s) = parse_statement(&mut cur)? {
        statements.push(s);
    }
    Ok(SessionScript { statements })
}

/// A single family expression, possibly spanning several lines.
pub fn parse_expr_str(text: &str) -> Result<Expr> {
    let mut cur = Cursor::new(text);
    let e = parse_expr(&mut cur)?;
    cur.skip_ws(true);
    if cur.peek().is_some() {
        return cur.err("unexpected trailing input");
    }
    Ok(e)
}

pub type Env = BTreeMap<String, Family>;

pub fn eval(e: &Expr, env: &Env) -> Result<Family> {
    Ok(match e {
        Expr::Block(b) => Family::from_block(b.clone()),
        Expr::Closure(x) => closure(&eval(x, env)?),
        Expr::Union(xs) => {
            let mut acc = Family::empty();
            for x in xs {
                acc = union(&acc, &eval(x, env)?);
            }
            acc
        }
        Expr::Intersect(xs) => {
            let mut acc = eval(&xs[0], env)?;
            for x in &xs[1..] {
                acc = intersect(&acc, &eval(x, env)?)?;
            }
            acc
        }
        Expr::MeetPrime(xs) => {
            let mut acc = LatticeElement::new(eval(&xs[0], env)?)?;
            for x in &xs[1..] {
                acc = meet_prime(&acc, &LatticeElement::new(eval(x, env)?)?)?;
            }
            acc.family
        }
        Expr::Gallery(name) => {
            gallery::family(name).ok_or_else(|| Error::UndefinedName(format!("gallery({name})")))?
        }
        Expr::Empty => Family::empty(),
        Expr::Name(n) => env.get(n).cloned().ok_or_else(|| Error::UndefinedName(n.clone()))?,
    })
}

/// Parses and evaluates a closed expression.
pub fn parse_family(text: &str) -> Result<Family> {
    eval(&parse_expr_str(text)?, &Env::new())
}

/// DSL text for a family; re-parses to an equal family.
pub fn export(f: &Family) -> String {
    f.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::family_eq;

    #[test]
    fn parses_definitions_and_commands() {
        let s = parse_script(
            "# demo\nlet A = fan(limit=~0, stride=1, offset=0, dev=)\nlgs closure(A)\noracle-check A --depth 8\n",
        )
        .unwrap();
        assert_eq!(s.statements.len(), 3);
        assert!(matches!(&s.statements[0].kind, StatementKind::Let(n, _) if n == "A"));
        match &s.statements[2].kind {
            StatementKind::Command(c, args) => {
                assert_eq!(c, "oracle-check");
                assert_eq!(args[1], Arg::Flag("depth".into(), Some("8".into())));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn parse_errors_carry_location() {
        match parse_script("let X = fin{") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
        match parse_script("let A = empty\nbogus A") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 1)),
            other => panic!("{other:?}"),
        }
        assert!(parse_family("fan(limit=~0, flips=1~1, stride=2)").is_err());
        assert!(parse_family("cube(mask=FF~0)").is_err());
    }

    #[test]
    fn round_trips() {
        for text in [
            "fin{101~0, ~01}",
            "fan(limit=~0, stride=1, offset=0, dev=)",
            "fan(limit=1~10, flips=0110~011, dev=01, withlimit)",
            "cube(mask=F0~F0)",
            "fanarray(base=cube(mask=~F0), c=1, stride=4, withbase)",
            "fanarray(base=cube(mask=~F0), c=4)",
            "union(fan(limit=~0, stride=2, offset=1, dev=1), fin{~1}, cube(mask=1~F))",
            "empty",
        ] {
            let f = parse_family(text).unwrap();
            let g = parse_family(&export(&f)).unwrap();
            assert!(family_eq(&f, &g).unwrap(), "{text} -> {}", export(&f));
            assert_eq!(f, g);
        }
    }

    #[test]
    fn names_and_gallery() {
        let mut env = Env::new();
        env.insert("A".into(), parse_family("fin{1~0}").unwrap());
        let e = parse_expr_str("union(A,\n  gallery(fan-t))").unwrap();
        let f = eval(&e, &env).unwrap();
        assert!(f.member(&"1~0".parse().unwrap()));
        assert_eq!(eval(&Expr::Name("B".into()), &env), Err(Error::UndefinedName("B".into())));
    }
}
