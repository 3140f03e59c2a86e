use std::fmt;
use std::str::FromStr;

use rug::ops::Pow;
use rug::{Integer, Rational};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{BigReal, ExactScalar};
use crate::error::{Error, Result};

/// A real number given by a closed-form expression over exact scalars,
/// e.g. `sqrt(2)`, `(1+sqrt(5))/2` or `t(1/4, 0.32) - 1`.
///
/// Rational-valued expressions are folded exactly; everything else is
/// enclosed on demand at a requested precision.
#[derive(Clone, Debug)]
pub struct RealExpr {
    text: String,
    node: Node,
    exact: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Num(ExactScalar),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Sqrt(Box<Node>),
    Ln(Box<Node>),
    Exp(Box<Node>),
    /// `t_a(x) = ln a / ln x`
    TMap(Box<Node>, Box<Node>),
    Min(Box<Node>, Box<Node>),
}

impl PartialEq for RealExpr {
    fn eq(&self, other: &Self) -> bool {
        self.node == other.node
    }
}

impl RealExpr {
    pub fn from_node(node: Node) -> Self {
        let exact = node.as_rational();
        RealExpr { text: node.to_string(), node, exact }
    }

    pub fn scalar(x: ExactScalar) -> Self {
        let text = x.to_string();
        let node = Node::Num(x);
        let exact = node.as_rational();
        RealExpr { text, node, exact }
    }

    pub fn rational(q: Rational) -> Self {
        Self::scalar(ExactScalar::Rational(q))
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// The exact value when the expression folds to a rational.
    pub fn as_rational(&self) -> Option<&Rational> {
        self.exact.as_ref()
    }

    pub fn enclose(&self, bits: u32) -> Result<BigReal> {
        match &self.exact {
            Some(q) => Ok(BigReal::from_rational(q, bits)),
            None => self.node.enclose(bits),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match &self.exact {
            Some(q) => super::rational_to_f64(q),
            None => self.node.enclose(128).map(|b| b.to_f64()).unwrap_or(f64::NAN),
        }
    }
}

fn pow_rational(base: &Rational, e: &Rational) -> Option<Rational> {
    if *e.denom() != 1 {
        return None;
    }
    let k = e.numer().to_i32()?;
    if k.unsigned_abs() > 256 {
        return None;
    }
    if k < 0 && *base == 0 {
        return None;
    }
    let num = Integer::from(base.numer().pow(k.unsigned_abs()));
    let den = Integer::from(base.denom().pow(k.unsigned_abs()));
    let q = Rational::from((num, den));
    Some(if k < 0 { q.recip() } else { q })
}

fn sqrt_rational(q: &Rational) -> Option<Rational> {
    if *q < 0 || !q.numer().is_perfect_square() || !q.denom().is_perfect_square() {
        return None;
    }
    Some(Rational::from((q.numer().clone().sqrt(), q.denom().clone().sqrt())))
}

impl Node {
    pub fn num(q: Rational) -> Node {
        Node::Num(ExactScalar::Rational(q))
    }

    pub fn as_rational(&self) -> Option<Rational> {
        use Node::*;
        match self {
            Num(x) => Some(x.value().clone()),
            Neg(a) => Some(-a.as_rational()?),
            Add(a, b) => Some(a.as_rational()? + b.as_rational()?),
            Sub(a, b) => Some(a.as_rational()? - b.as_rational()?),
            Mul(a, b) => Some(a.as_rational()? * b.as_rational()?),
            Div(a, b) => {
                let d = b.as_rational()?;
                if d == 0 { None } else { Some(a.as_rational()? / d) }
            }
            Pow(a, b) => pow_rational(&a.as_rational()?, &b.as_rational()?),
            Sqrt(a) => sqrt_rational(&a.as_rational()?),
            Ln(a) => (a.as_rational()? == 1).then(|| Rational::from(0)),
            Exp(a) => (a.as_rational()? == 0).then(|| Rational::from(1)),
            TMap(a, x) => {
                let (a, x) = (a.as_rational()?, x.as_rational()?);
                (a == x && a > 0 && a != 1).then(|| Rational::from(1))
            }
            Min(a, b) => {
                let (a, b) = (a.as_rational()?, b.as_rational()?);
                Some(if b < a { b } else { a })
            }
        }
    }

    pub fn enclose(&self, bits: u32) -> Result<BigReal> {
        use Node::*;
        if let Some(q) = self.as_rational() {
            return Ok(BigReal::from_rational(&q, bits));
        }
        match self {
            Num(x) => Ok(x.enclose(bits)),
            Neg(a) => Ok(a.enclose(bits)?.neg()),
            Add(a, b) => Ok(a.enclose(bits)?.add(&b.enclose(bits)?)),
            Sub(a, b) => Ok(a.enclose(bits)?.sub(&b.enclose(bits)?)),
            Mul(a, b) => Ok(a.enclose(bits)?.mul(&b.enclose(bits)?)),
            Div(a, b) => a.enclose(bits)?.div(&b.enclose(bits)?),
            Pow(a, b) => a.enclose(bits)?.pow(&b.enclose(bits)?),
            Sqrt(a) => a.enclose(bits)?.sqrt(),
            Ln(a) => a.enclose(bits)?.ln(),
            Exp(a) => Ok(a.enclose(bits)?.exp()),
            TMap(a, x) => a.enclose(bits)?.ln()?.div(&x.enclose(bits)?.ln()?),
            Min(a, b) => Ok(a.enclose(bits)?.min(&b.enclose(bits)?)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Node::Add(..) | Node::Sub(..) => 1,
            Node::Mul(..) | Node::Div(..) => 2,
            Node::Neg(..) => 3,
            Node::Pow(..) => 4,
            Node::Num(x) if x.value() < &0 || x.value().denom() != &1 => 2,
            _ => 5,
        }
    }
}

fn fmt_child(f: &mut fmt::Formatter<'_>, child: &Node, min_prec: u8) -> fmt::Result {
    if child.precedence() < min_prec {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Node::*;
        match self {
            Num(x) => write!(f, "{x}"),
            Neg(a) => {
                f.write_str("-")?;
                fmt_child(f, a, 4)
            }
            Add(a, b) | Sub(a, b) => {
                fmt_child(f, a, 1)?;
                f.write_str(if matches!(self, Add(..)) { "+" } else { "-" })?;
                fmt_child(f, b, 2)
            }
            Mul(a, b) | Div(a, b) => {
                fmt_child(f, a, 2)?;
                f.write_str(if matches!(self, Mul(..)) { "*" } else { "/" })?;
                fmt_child(f, b, 3)
            }
            Pow(a, b) => {
                fmt_child(f, a, 5)?;
                f.write_str("^")?;
                fmt_child(f, b, 4)
            }
            Sqrt(a) => write!(f, "sqrt({a})"),
            Ln(a) => write!(f, "ln({a})"),
            Exp(a) => write!(f, "exp({a})"),
            TMap(a, x) => write!(f, "t({a},{x})"),
            Min(a, b) => write!(f, "min({a},{b})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(String),
    Ident(String),
    Sym(char),
}

fn tokenize(s: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            out.push(Token::Num(chars[start..i].iter().collect()));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^(),".contains(c) {
            out.push(Token::Sym(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character {c:?} in expression {s:?}")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!("{msg} in expression {:?}", self.src))
    }

    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Token::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) { Ok(()) } else { Err(self.err(&format!("expected '{c}'"))) }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                let rhs = self.unary()?;
                lhs = match (&lhs, &rhs) {
                    // keep literal fractions as single exact numbers
                    (Node::Num(ExactScalar::Rational(n)), Node::Num(ExactScalar::Rational(d)))
                        if *n.denom() == 1 && *d.denom() == 1 && *d != 0 =>
                    {
                        Node::num(Rational::from(n / d))
                    }
                    _ => Node::Div(Box::new(lhs), Box::new(rhs)),
                };
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn args(&mut self, n: usize) -> Result<Vec<Node>> {
        self.expect('(')?;
        let mut out = vec![self.expr()?];
        while out.len() < n {
            self.expect(',')?;
            out.push(self.expr()?);
        }
        self.expect(')')?;
        Ok(out)
    }

    fn atom(&mut self) -> Result<Node> {
        match self.peek().cloned() {
            Some(Token::Num(s)) => {
                self.pos += 1;
                Ok(Node::Num(s.parse()?))
            }
            Some(Token::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                let b = Box::new;
                match name.as_str() {
                    "sqrt" => Ok(Node::Sqrt(b(self.args(1)?.remove(0)))),
                    "ln" | "log" => Ok(Node::Ln(b(self.args(1)?.remove(0)))),
                    "exp" => Ok(Node::Exp(b(self.args(1)?.remove(0)))),
                    "t" => {
                        let mut a = self.args(2)?;
                        let x = a.pop().unwrap();
                        Ok(Node::TMap(b(a.pop().unwrap()), b(x)))
                    }
                    "min" => {
                        let mut a = self.args(2)?;
                        let y = a.pop().unwrap();
                        Ok(Node::Min(b(a.pop().unwrap()), b(y)))
                    }
                    _ => Err(self.err(&format!("unknown function {name:?}"))),
                }
            }
            _ => Err(self.err("expected a number, '(' or a function")),
        }
    }
}

impl FromStr for RealExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let toks = tokenize(s)?;
        let mut p = Parser { toks: &toks, pos: 0, src: s };
        let node = p.expr()?;
        if p.pos != toks.len() {
            return Err(p.err("trailing input"));
        }
        let exact = node.as_rational();
        Ok(RealExpr { text: s.trim().to_string(), node, exact })
    }
}

impl fmt::Display for RealExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl From<ExactScalar> for RealExpr {
    fn from(x: ExactScalar) -> Self {
        RealExpr::scalar(x)
    }
}

impl Serialize for RealExpr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.text)
    }
}

impl<'de> Deserialize<'de> for RealExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> RealExpr {
        s.parse().unwrap()
    }

    #[test]
    fn folds_rationals_exactly() {
        assert_eq!(e("1/3").as_rational(), Some(&Rational::from((1, 3))));
        assert_eq!(e("19/7 - 2").as_rational(), Some(&Rational::from((5, 7))));
        assert_eq!(e("2^-2").as_rational(), Some(&Rational::from((1, 4))));
        assert_eq!(e("sqrt(9/4)").as_rational(), Some(&Rational::from((3, 2))));
        assert_eq!(e("-1e-2").as_rational(), Some(&Rational::from((-1, 100))));
        assert_eq!(e("min(0.2, 1/10)").as_rational(), Some(&Rational::from((1, 10))));
        assert!(e("sqrt(2)").as_rational().is_none());
    }

    #[test]
    fn encloses_irrationals() {
        let phi = e("(1+sqrt(5))/2").enclose(256).unwrap();
        assert!((phi.to_f64() - 1.618033988749895).abs() < 1e-15);
        assert!(phi.radius() < 1e-70);
        let t = e("t(1/4, 0.32) - 1").enclose(128).unwrap();
        assert!((t.to_f64() - 0.216_651_439_730_918).abs() < 1e-15);
        let p = e("2^(1/2)").enclose(128).unwrap();
        assert!((p.to_f64() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn display_is_reparseable() {
        let n = Node::Sub(
            Box::new(Node::TMap(Box::new(Node::num(Rational::from((1, 4)))), Box::new(Node::num(Rational::from((8, 25)))))),
            Box::new(Node::num(Rational::from(1))),
        );
        let r = RealExpr::from_node(n);
        assert_eq!(r.text(), "t(1/4,8/25)-1");
        assert_eq!(e(r.text()), r);
        let m = RealExpr::from_node(Node::Mul(Box::new(Node::num(Rational::from((1, 3)))), Box::new(Node::num(Rational::from(2)))));
        assert_eq!(e(m.text()).as_rational(), Some(&Rational::from((2, 3))));
    }

    #[test]
    fn errors() {
        for bad in ["", "1+", "foo(2)", "sqrt 2", "(1", "1)", "1 2", "#"] {
            assert!(bad.parse::<RealExpr>().is_err(), "{bad}");
        }
        assert!(e("ln(0)").enclose(64).is_err());
        assert!(e("1/(1-1)").enclose(64).is_err());
    }
}
