//! Text front end for superfunctions and symbols.
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := factor ('*' factor)*
//! factor := atom ['^' nat]
//! atom   := rational | 'x' | 'z' | ('t'|'g'|'e') nat | '(' expr ')'
//! ```
//!
//! `t` is θ, `z` is ζ, `g` is γ and `e` is η. Whitespace is ignored. The
//! printed form of every value parses back to the same value.

use crate::error::{Error, Result};
use crate::finesymbols::{FSym, SymFlavor, SymMono};
use crate::rational::Rational;
use crate::superring::{Mono, OddSet, SuperPoly};

/// What a parsed expression is allowed to contain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Superfunction,
    ContactSymbol,
    CanonicalSymbol,
}

/// A parsed value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Poly(SuperPoly),
    Symbol(FSym),
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Poly(p) => p.fmt(f),
            Value::Symbol(s) => s.fmt(f),
        }
    }
}

/// Parses `src` in `n` odd variables. Symbols get weight `δ = 0`; use
/// [`parse_symbol`] to set it.
pub fn parse(src: &str, n: usize, kind: Kind) -> Result<Value> {
    let flavor = match kind {
        Kind::CanonicalSymbol => SymFlavor::Canonical,
        _ => SymFlavor::Contact,
    };
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
        n,
        kind,
        flavor,
    };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(match kind {
        Kind::Superfunction => Value::Poly(to_poly(&v)),
        _ => Value::Symbol(v),
    })
}

pub fn parse_superfunction(src: &str, n: usize) -> Result<SuperPoly> {
    match parse(src, n, Kind::Superfunction)? {
        Value::Poly(p) => Ok(p),
        Value::Symbol(_) => unreachable!("superfunction kind yields a superfunction"),
    }
}

pub fn parse_symbol(src: &str, n: usize, flavor: SymFlavor, delta: Rational) -> Result<FSym> {
    let kind = match flavor {
        SymFlavor::Contact => Kind::ContactSymbol,
        SymFlavor::Canonical => Kind::CanonicalSymbol,
    };
    match parse(src, n, kind)? {
        Value::Symbol(s) => Ok(s.with_delta(delta)),
        Value::Poly(_) => unreachable!("symbol kind yields a symbol"),
    }
}

fn to_poly(s: &FSym) -> SuperPoly {
    let n = s.n();
    SuperPoly::from_terms(
        n,
        s.terms()
            .map(|(m, c)| (Mono::new(m.x, m.theta(n)), c.clone())),
    )
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n: usize,
    kind: Kind,
    flavor: SymFlavor,
}

impl Parser<'_> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn zero(&self) -> FSym {
        FSym::zero(self.n, Rational::zero(), self.flavor)
    }

    fn constant(&self, c: Rational) -> FSym {
        FSym::monomial(
            self.n,
            Rational::zero(),
            self.flavor,
            SymMono::new(self.n, 0, 0, OddSet::EMPTY, OddSet::EMPTY),
            c,
        )
    }

    fn expr(&mut self) -> Result<FSym> {
        let mut acc = self.zero();
        let mut neg = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                true
            }
            Some(b'+') => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        loop {
            let t = self.term()?;
            acc = if neg { &acc - &t } else { &acc + &t };
            match self.peek() {
                Some(b'+') => neg = false,
                Some(b'-') => neg = true,
                _ => return Ok(acc),
            }
            self.pos += 1;
        }
    }

    fn term(&mut self) -> Result<FSym> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let f = self.factor()?;
            acc = acc.try_mul(&f)?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<FSym> {
        let (base, odd_atom) = self.atom()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        let caret = self.pos;
        self.pos += 1;
        self.skip_ws();
        let e = self.nat("exponent")?;
        if odd_atom && e >= 2 {
            self.pos = caret;
            return Err(self.err("odd generators square to zero; exponent must be 0 or 1"));
        }
        let mut acc = self.constant(Rational::one());
        for _ in 0..e {
            acc = acc.try_mul(&base)?;
        }
        Ok(acc)
    }

    fn nat(&mut self, what: &str) -> Result<u32> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err(format!("expected {what}")));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        text.parse::<u32>().map_err(|_| Error::Parse {
            offset: start,
            message: format!("{what} `{text}` is too large"),
        })
    }

    fn index(&mut self) -> Result<usize> {
        let start = self.pos;
        let i = self.nat("generator index")? as usize;
        if i == 0 || i > self.n {
            self.pos = start;
            return Err(self.err(format!("index {i} is outside 1..={}", self.n)));
        }
        Ok(i)
    }

    /// The atom and whether it is a single odd generator.
    fn atom(&mut self) -> Result<(FSym, bool)> {
        let n = self.n;
        let c = self
            .peek()
            .ok_or_else(|| self.err("unexpected end of input"))?;
        let start = self.pos;
        match c {
            b'0'..=b'9' => {
                let num = self.nat("integer")?;
                let mut value = Rational::from(num);
                if self.peek() == Some(b'/') {
                    self.pos += 1;
                    self.skip_ws();
                    let den = self.nat("denominator")?;
                    if den == 0 {
                        return Err(Error::Parse {
                            offset: start,
                            message: "zero denominator".into(),
                        });
                    }
                    value = value / Rational::from(den);
                }
                Ok((self.constant(value), false))
            }
            b'(' => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok((v, false))
            }
            b'x' => {
                self.pos += 1;
                let m = SymMono::new(n, 1, 0, OddSet::EMPTY, OddSet::EMPTY);
                Ok((
                    FSym::monomial(n, Rational::zero(), self.flavor, m, Rational::one()),
                    false,
                ))
            }
            b'z' => {
                if self.kind == Kind::Superfunction {
                    return Err(self.err("`z` is not allowed in a superfunction"));
                }
                self.pos += 1;
                Ok((FSym::zeta(n, Rational::zero(), self.flavor), false))
            }
            b't' | b'g' | b'e' => {
                let allowed = matches!(
                    (c, self.kind),
                    (b't', _) | (b'g', Kind::ContactSymbol) | (b'e', Kind::CanonicalSymbol)
                );
                if !allowed {
                    return Err(self.err(format!("`{}` is not allowed here", c as char)));
                }
                self.pos += 1;
                let i = self.index()?;
                let m = if c == b't' {
                    SymMono::new(n, 0, 0, OddSet::single(i), OddSet::EMPTY)
                } else {
                    SymMono::new(n, 0, 0, OddSet::EMPTY, OddSet::single(i))
                };
                Ok((
                    FSym::monomial(n, Rational::zero(), self.flavor, m, Rational::one()),
                    true,
                ))
            }
            _ => Err(self.err(format!("unexpected `{}`", c as char))),
        }
    }
}
