//! Text descriptions of object sets and transformations.
//!
//! ```text
//! expr       = state | channel | comb | superchannel | ns | pm
//!            | dual | tensor | transform | linear ;
//! state      = "state" "(" labels ")" ;
//! channel    = "channel" "(" labels ";" labels ")" ;
//! comb       = "comb" "(" pair { "," pair } ")" ;
//! superchannel = "superchannel" "(" labels ";" labels ";" labels ";" labels ")" ;
//! ns         = "ns" "(" pair { "," pair } ")" ;
//! pm         = "pm" "(" pair { "," pair } ")" ;
//! dual       = "dual" "(" expr ")" ;
//! tensor     = "tensor" "(" expr "," expr ")" ;
//! transform  = "transform" "(" expr arrow expr ")" ;
//! linear     = "linear_transform" "(" expr arrow expr ")" ;
//! pair       = "(" labels ";" labels ")" ;
//! labels     = [ label { "," label } ] ;
//! label      = name ":" digits ;
//! name       = ( letter | digit | "_" ) { letter | digit | "_" } ;
//! arrow      = "->" | "→" ;
//! ```
//!
//! Whitespace is free and `#` starts a comment running to the end of the line.

use std::fmt;

use crate::error::{Error, Result};
use crate::objects::{
    channel_set, comb_set, dual_set, nonsignalling_set, process_matrix_set, state_set, tensor_set, Characterization,
    ObjectSet,
};
use crate::space::{CompositeSpace, Label};
use crate::transforms::{build_transform, linear_transform, TransformSpec};

pub type Subsystems = Vec<(Label, usize)>;
pub type Pair = (Subsystems, Subsystems);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    State(Subsystems),
    Channel(Subsystems, Subsystems),
    Comb(Vec<Pair>),
    Superchannel([Subsystems; 4]),
    Ns(Vec<Pair>),
    Pm(Vec<Pair>),
    Dual(Box<Expr>),
    Tensor(Box<Expr>, Box<Expr>),
    Transform(Box<Expr>, Box<Expr>),
    LinearTransform(Box<Expr>, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Semi,
    Colon,
    Arrow,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::End => write!(f, "end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1, 1);
    while let Some(&c) = chars.peek() {
        let (l0, c0) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let ch = chars.next();
            if ch == Some('\n') {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            ch
        };
        let push = |out: &mut Vec<Spanned>, tok| out.push(Spanned { tok, line: l0, col: c0 });
        match c {
            c if c.is_whitespace() => {
                bump(&mut chars);
            }
            '#' => {
                while chars.peek().is_some_and(|&c| c != '\n') {
                    bump(&mut chars);
                }
            }
            '(' | ')' | ',' | ';' | ':' | '→' => {
                bump(&mut chars);
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    ';' => Tok::Semi,
                    ':' => Tok::Colon,
                    _ => Tok::Arrow,
                };
                push(&mut out, tok);
            }
            '-' => {
                bump(&mut chars);
                if chars.peek() == Some(&'>') {
                    bump(&mut chars);
                    push(&mut out, Tok::Arrow);
                } else {
                    return Err(Error::Syntax { line: l0, col: c0, msg: "expected `->`".into() });
                }
            }
            c if c.is_alphanumeric() || c == '_' => {
                let mut s = String::new();
                while chars.peek().is_some_and(|&c| c.is_alphanumeric() || c == '_') {
                    s.push(bump(&mut chars).unwrap());
                }
                push(&mut out, Tok::Ident(s));
            }
            other => {
                return Err(Error::Syntax { line: l0, col: c0, msg: format!("unexpected character `{other}`") });
            }
        }
    }
    out.push(Spanned { tok: Tok::End, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let t = self.peek();
        Err(Error::Syntax { line: t.line, col: t.col, msg: msg.into() })
    }

    fn next(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if self.peek().tok == tok {
            self.next();
            Ok(())
        } else {
            let found = self.peek().tok.clone();
            self.err(format!("expected {tok}, found {found}"))
        }
    }

    fn eat(&mut self, tok: Tok) -> bool {
        if self.peek().tok == tok {
            self.next();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let name = match &self.peek().tok {
            Tok::Ident(s) => s.clone(),
            other => {
                let other = other.clone();
                return self.err(format!("expected an expression, found {other}"));
            }
        };
        let here = self.pos;
        self.next();
        self.expect(Tok::LParen)?;
        let e = match name.as_str() {
            "state" => Expr::State(self.labels()?),
            "channel" => {
                let i = self.labels()?;
                self.expect(Tok::Semi)?;
                Expr::Channel(i, self.labels()?)
            }
            "comb" => Expr::Comb(self.pairs()?),
            "superchannel" => {
                let a = self.labels()?;
                self.expect(Tok::Semi)?;
                let b = self.labels()?;
                self.expect(Tok::Semi)?;
                let c = self.labels()?;
                self.expect(Tok::Semi)?;
                Expr::Superchannel([a, b, c, self.labels()?])
            }
            "ns" => Expr::Ns(self.pairs()?),
            "pm" => Expr::Pm(self.pairs()?),
            "dual" => Expr::Dual(Box::new(self.expr()?)),
            "tensor" => {
                let a = self.expr()?;
                self.expect(Tok::Comma)?;
                Expr::Tensor(Box::new(a), Box::new(self.expr()?))
            }
            "transform" | "linear_transform" => {
                let a = self.expr()?;
                self.expect(Tok::Arrow)?;
                let b = self.expr()?;
                if name == "transform" {
                    Expr::Transform(Box::new(a), Box::new(b))
                } else {
                    Expr::LinearTransform(Box::new(a), Box::new(b))
                }
            }
            _ => {
                let t = &self.toks[here];
                return Err(Error::Syntax { line: t.line, col: t.col, msg: format!("unknown constructor `{name}`") });
            }
        };
        self.expect(Tok::RParen)?;
        Ok(e)
    }

    fn labels(&mut self) -> Result<Subsystems> {
        let mut out = Vec::new();
        if !matches!(self.peek().tok, Tok::Ident(_)) {
            return Ok(out);
        }
        loop {
            let name = match self.next().tok {
                Tok::Ident(s) => s,
                _ => unreachable!(),
            };
            self.expect(Tok::Colon)?;
            let dim = match &self.peek().tok {
                Tok::Ident(s) if s.chars().all(|c| c.is_ascii_digit()) => match s.parse::<usize>() {
                    Ok(d) => d,
                    Err(_) => return self.err(format!("dimension `{s}` is out of range")),
                },
                other => {
                    let other = other.clone();
                    return self.err(format!("expected a dimension, found {other}"));
                }
            };
            self.next();
            out.push((Label(name), dim));
            if !(self.peek().tok == Tok::Comma && matches!(self.toks[self.pos + 1].tok, Tok::Ident(_))) {
                return Ok(out);
            }
            self.next();
        }
    }

    fn pair(&mut self) -> Result<Pair> {
        self.expect(Tok::LParen)?;
        let i = self.labels()?;
        self.expect(Tok::Semi)?;
        let o = self.labels()?;
        self.expect(Tok::RParen)?;
        Ok((i, o))
    }

    fn pairs(&mut self) -> Result<Vec<Pair>> {
        let mut out = vec![self.pair()?];
        while self.eat(Tok::Comma) {
            out.push(self.pair()?);
        }
        Ok(out)
    }
}

pub fn parse(text: &str) -> Result<Expr> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let e = p.expr()?;
    if p.peek().tok != Tok::End {
        let found = p.peek().tok.clone();
        return p.err(format!("unexpected {found} after expression"));
    }
    Ok(e)
}

fn write_labels(f: &mut fmt::Formatter<'_>, ls: &Subsystems) -> fmt::Result {
    let parts: Vec<String> = ls.iter().map(|(l, d)| format!("{l}:{d}")).collect();
    write!(f, "{}", parts.join(", "))
}

fn write_pairs(f: &mut fmt::Formatter<'_>, ps: &[Pair]) -> fmt::Result {
    for (k, (i, o)) in ps.iter().enumerate() {
        if k > 0 {
            write!(f, ", ")?;
        }
        write!(f, "(")?;
        write_labels(f, i)?;
        write!(f, "; ")?;
        write_labels(f, o)?;
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::State(ls) => {
                write!(f, "state(")?;
                write_labels(f, ls)?;
                write!(f, ")")
            }
            Expr::Channel(i, o) => {
                write!(f, "channel(")?;
                write_labels(f, i)?;
                write!(f, "; ")?;
                write_labels(f, o)?;
                write!(f, ")")
            }
            Expr::Comb(ps) => {
                write!(f, "comb(")?;
                write_pairs(f, ps)?;
                write!(f, ")")
            }
            Expr::Superchannel(parts) => {
                write!(f, "superchannel(")?;
                for (k, p) in parts.iter().enumerate() {
                    if k > 0 {
                        write!(f, "; ")?;
                    }
                    write_labels(f, p)?;
                }
                write!(f, ")")
            }
            Expr::Ns(ps) => {
                write!(f, "ns(")?;
                write_pairs(f, ps)?;
                write!(f, ")")
            }
            Expr::Pm(ps) => {
                write!(f, "pm(")?;
                write_pairs(f, ps)?;
                write!(f, ")")
            }
            Expr::Dual(e) => write!(f, "dual({e})"),
            Expr::Tensor(a, b) => write!(f, "tensor({a}, {b})"),
            Expr::Transform(a, b) => write!(f, "transform({a} -> {b})"),
            Expr::LinearTransform(a, b) => write!(f, "linear_transform({a} -> {b})"),
        }
    }
}

/// What an expression evaluates to.
#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum Built {
    Set(Characterization),
    Transform(Box<TransformSpec>),
}

impl Built {
    pub fn characterization(&self) -> &Characterization {
        match self {
            Built::Set(c) => c,
            Built::Transform(t) => &t.result,
        }
    }

    pub fn into_characterization(self) -> Characterization {
        match self {
            Built::Set(c) => c,
            Built::Transform(t) => t.result,
        }
    }

    pub fn transform(&self) -> Option<&TransformSpec> {
        match self {
            Built::Transform(t) => Some(t),
            Built::Set(_) => None,
        }
    }
}

fn space(ls: &Subsystems) -> Result<CompositeSpace> {
    CompositeSpace::new(ls.iter().map(|(l, d)| (l.clone(), *d)))
}

fn pairs(ps: &[Pair]) -> Result<Vec<(CompositeSpace, CompositeSpace)>> {
    ps.iter().map(|(i, o)| Ok((space(i)?, space(o)?))).collect()
}

fn object(e: &Expr) -> Result<ObjectSet> {
    eval(e)?.into_characterization().into_object().map_err(|_| {
        Error::HypothesisViolated(format!("`{e}` has no scalar trace condition and cannot be used here"))
    })
}

pub fn eval(e: &Expr) -> Result<Built> {
    let set = |c: ObjectSet| Ok(Built::Set(Characterization::Object(c)));
    match e {
        Expr::State(ls) => set(state_set(&space(ls)?)),
        Expr::Channel(i, o) => set(channel_set(&space(i)?, &space(o)?)?),
        Expr::Comb(ps) => set(comb_set(&pairs(ps)?)?),
        Expr::Superchannel([a, b, c, d]) => set(comb_set(&[(space(a)?, space(b)?), (space(c)?, space(d)?)])?),
        Expr::Ns(ps) => set(nonsignalling_set(&pairs(ps)?)?),
        Expr::Pm(ps) => set(process_matrix_set(&pairs(ps)?)?),
        Expr::Dual(inner) => Ok(Built::Set(dual_set(&object(inner)?)?)),
        Expr::Tensor(a, b) => set(tensor_set(&object(a)?, &object(b)?)?),
        Expr::Transform(a, b) => Ok(Built::Transform(Box::new(build_transform(&object(a)?, &object(b)?)?))),
        Expr::LinearTransform(a, b) => {
            let a = eval(a)?.into_characterization();
            let b = eval(b)?.into_characterization();
            Ok(Built::Set(linear_transform(&a, &b)?))
        }
    }
}

pub fn parse_and_eval(text: &str) -> Result<Built> {
    eval(&parse(text)?)
}
