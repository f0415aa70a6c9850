//! Arithmetic expression mini-language over chart coordinates.
//!
//! Scenario files describe fields with infix expressions in the coordinates
//! `x0..x3`. Grammar, with usual precedence and `^` binding tightest and
//! right-associative:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | power
//! power  := atom ('^' factor)?
//! atom   := number | 'x0'..'x3' | fn '(' expr ')' | '(' expr ')'
//! fn     := 'exp' | 'sin' | 'cos' | 'sqrt'
//! ```
//!
//! Expressions evaluate pointwise and differentiate symbolically. The
//! derivative of `u ^ v` is supported for constant `v` only; the scenario
//! loader falls back to finite differences when a symbolic derivative is
//! unavailable.

use crate::error::{Error, Result};

/// A parsed expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// Coordinate `x<k>`, `k` in `0..4`.
    Coord(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Exp(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Sqrt(Box<Expr>),
}

impl Expr {
    /// Evaluates at a chart point.
    pub fn eval(&self, x: &[f64; 4]) -> f64 {
        match self {
            Expr::Const(v) => *v,
            Expr::Coord(k) => x[*k],
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, b) => a.eval(x).powf(b.eval(x)),
            Expr::Neg(a) => -a.eval(x),
            Expr::Exp(a) => a.eval(x).exp(),
            Expr::Sin(a) => a.eval(x).sin(),
            Expr::Cos(a) => a.eval(x).cos(),
            Expr::Sqrt(a) => a.eval(x).sqrt(),
        }
    }

    /// Symbolic partial derivative with respect to `x<k>`.
    ///
    /// Errors with a descriptive message when the tree contains `u ^ v` with
    /// non-constant `v` (the only construct without a derivative rule here).
    pub fn diff(&self, k: usize) -> Result<Expr> {
        Ok(match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Coord(j) => Expr::Const(if *j == k { 1.0 } else { 0.0 }),
            Expr::Add(a, b) => add(a.diff(k)?, b.diff(k)?),
            Expr::Sub(a, b) => sub(a.diff(k)?, b.diff(k)?),
            Expr::Mul(a, b) => add(
                mul(a.diff(k)?, (**b).clone()),
                mul((**a).clone(), b.diff(k)?),
            ),
            Expr::Div(a, b) => {
                // (a/b)' = a'/b - a b'/b^2
                let da = a.diff(k)?;
                let db = b.diff(k)?;
                sub(
                    div(da, (**b).clone()),
                    div(mul((**a).clone(), db), mul((**b).clone(), (**b).clone())),
                )
            }
            Expr::Pow(a, b) => match **b {
                Expr::Const(n) => {
                    // (a^n)' = n a^(n-1) a'
                    let da = a.diff(k)?;
                    mul(
                        mul(Expr::Const(n), pow((**a).clone(), Expr::Const(n - 1.0))),
                        da,
                    )
                }
                _ => {
                    return Err(Error::invalid(
                        "cannot differentiate a power with non-constant exponent",
                    ))
                }
            },
            Expr::Neg(a) => neg(a.diff(k)?),
            Expr::Exp(a) => mul(Expr::Exp(a.clone()), a.diff(k)?),
            Expr::Sin(a) => mul(Expr::Cos(a.clone()), a.diff(k)?),
            Expr::Cos(a) => neg(mul(Expr::Sin(a.clone()), a.diff(k)?)),
            Expr::Sqrt(a) => div(a.diff(k)?, mul(Expr::Const(2.0), Expr::Sqrt(a.clone()))),
        })
    }

    /// True when all four coordinate derivatives exist symbolically.
    pub fn differentiable(&self) -> bool {
        (0..4).all(|k| self.diff(k).is_ok())
    }
}

// Simplifying constructors keep derivative trees from exploding: they fold
// constants and drop additive/multiplicative identities.

fn is_const(e: &Expr, v: f64) -> bool {
    matches!(e, Expr::Const(c) if *c == v)
}

fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
        _ if is_const(&a, 0.0) => b,
        _ if is_const(&b, 0.0) => a,
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
        _ if is_const(&b, 0.0) => a,
        _ if is_const(&a, 0.0) => neg(b),
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
        _ if is_const(&a, 0.0) || is_const(&b, 0.0) => Expr::Const(0.0),
        _ if is_const(&a, 1.0) => b,
        _ if is_const(&b, 1.0) => a,
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    if is_const(&a, 0.0) {
        return Expr::Const(0.0);
    }
    if is_const(&b, 1.0) {
        return a;
    }
    Expr::Div(Box::new(a), Box::new(b))
}

fn pow(a: Expr, b: Expr) -> Expr {
    if is_const(&b, 1.0) {
        return a;
    }
    if is_const(&b, 0.0) {
        return Expr::Const(1.0);
    }
    Expr::Pow(Box::new(a), Box::new(b))
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(x) => Expr::Const(-x),
        Expr::Neg(inner) => *inner,
        _ => Expr::Neg(Box::new(a)),
    }
}

/// Parses an expression from source text.
pub fn parse(src: &str) -> Result<Expr> {
    let tokens = tokenize(src)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        src,
    };
    let e = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(Error::invalid(format!(
            "unexpected trailing input in expression '{src}'"
        )));
    }
    Ok(e)
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i] as char;
        match ch {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '/' => {
                out.push(Token::Slash);
                i += 1;
            }
            '^' => {
                out.push(Token::Caret);
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && matches!(bytes[i] as char, '0'..='9' | '.') {
                    i += 1;
                }
                // Optional exponent: e or E, optional sign, digits.
                if i < bytes.len()
                    && matches!(bytes[i] as char, 'e' | 'E')
                    && i + 1 < bytes.len()
                    && (bytes[i + 1].is_ascii_digit()
                        || (matches!(bytes[i + 1] as char, '+' | '-')
                            && i + 2 < bytes.len()
                            && bytes[i + 2].is_ascii_digit()))
                {
                    i += 2; // consume 'e' and sign-or-digit
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                let text = &src[start..i];
                let v: f64 = text
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad number '{text}' in expression")))?;
                out.push(Token::Num(v));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && matches!(bytes[i] as char, 'a'..='z' | 'A'..='Z' | '0'..='9' | '_')
                {
                    i += 1;
                }
                out.push(Token::Ident(src[start..i].to_string()));
            }
            _ => {
                return Err(Error::invalid(format!(
                    "unexpected character '{ch}' in expression '{src}'"
                )))
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    src: &'a str,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Token, what: &str) -> Result<()> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "expected {what} in expression '{}'",
                self.src
            )))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut e = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    e = Expr::Add(Box::new(e), Box::new(self.term()?));
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    e = Expr::Sub(Box::new(e), Box::new(self.term()?));
                }
                _ => return Ok(e),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut e = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    e = Expr::Mul(Box::new(e), Box::new(self.factor()?));
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    e = Expr::Div(Box::new(e), Box::new(self.factor()?));
                }
                _ => return Ok(e),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(&Token::Caret) {
            self.pos += 1;
            // Right-associative; a factor on the right also admits '-x'.
            let exponent = self.factor()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.bump() {
            Some(Token::Num(v)) => Ok(Expr::Const(v)),
            Some(Token::Ident(name)) => match name.as_str() {
                "x0" => Ok(Expr::Coord(0)),
                "x1" => Ok(Expr::Coord(1)),
                "x2" => Ok(Expr::Coord(2)),
                "x3" => Ok(Expr::Coord(3)),
                "exp" | "sin" | "cos" | "sqrt" => {
                    self.expect(Token::LParen, "'(' after function name")?;
                    let arg = self.expr()?;
                    self.expect(Token::RParen, "')'")?;
                    Ok(match name.as_str() {
                        "exp" => Expr::Exp(Box::new(arg)),
                        "sin" => Expr::Sin(Box::new(arg)),
                        "cos" => Expr::Cos(Box::new(arg)),
                        _ => Expr::Sqrt(Box::new(arg)),
                    })
                }
                _ => Err(Error::invalid(format!(
                    "unknown identifier '{name}' in expression '{}'",
                    self.src
                ))),
            },
            Some(Token::LParen) => {
                let e = self.expr()?;
                self.expect(Token::RParen, "')'")?;
                Ok(e)
            }
            _ => Err(Error::invalid(format!(
                "unexpected end of expression '{}'",
                self.src
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn at(src: &str, x: [f64; 4]) -> f64 {
        parse(src).unwrap().eval(&x)
    }

    #[test]
    fn precedence_and_associativity() {
        let x = [0.0; 4];
        assert_relative_eq!(at("2+3*4^2", x), 50.0);
        assert_relative_eq!(at("2^3^2", x), 512.0); // right-associative
        assert_relative_eq!(at("-2^2", x), -4.0); // unary minus binds looser than ^
        assert_relative_eq!(at("(2+3)*4", x), 20.0);
        assert_relative_eq!(at("1/2/2", x), 0.25); // left-associative
    }

    #[test]
    fn coordinates_functions_and_numbers() {
        let x = [0.5, -1.0, 2.0, 0.25];
        assert_relative_eq!(at("x0^2 + 3*x1", x), 0.25 - 3.0);
        assert_relative_eq!(at("exp(-x0)", x), (-0.5f64).exp());
        assert_relative_eq!(at("sin(x2)*cos(x3)", x), 2.0f64.sin() * 0.25f64.cos());
        assert_relative_eq!(at("sqrt(x2)", x), 2.0f64.sqrt());
        assert_relative_eq!(at("1.5e-3 + 2E2", x), 0.0015 + 200.0);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse("x4").is_err());
        assert!(parse("foo(x0)").is_err());
        assert!(parse("1 +").is_err());
        assert!(parse("(x0").is_err());
        assert!(parse("x0 x1").is_err());
        assert!(parse("1 & 2").is_err());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let cases = [
            "x0^3 + 2*x0*x1",
            "exp(-x0)*sin(x1)",
            "cos(x0*x1) / (2 + x2^2)",
            "sqrt(1 + x3^2)",
            "x0*x1*x2*x3",
        ];
        let x = [0.3, -0.7, 1.1, 0.4];
        for src in cases {
            let e = parse(src).unwrap();
            for k in 0..4 {
                let d = e.diff(k).unwrap();
                let h = 1e-6;
                let mut hi = x;
                hi[k] += h;
                let mut lo = x;
                lo[k] -= h;
                let fd = (e.eval(&hi) - e.eval(&lo)) / (2.0 * h);
                assert_relative_eq!(d.eval(&x), fd, epsilon = 1e-8, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn power_rule_needs_constant_exponent() {
        let ok = parse("x0^3").unwrap();
        assert!(ok.diff(0).is_ok());
        let bad = parse("x0^x1").unwrap();
        assert!(bad.diff(0).is_err());
        assert!(!bad.differentiable());
        assert!(ok.differentiable());
    }

    #[test]
    fn derivative_of_constant_power_at_edge() {
        // d/dx0 (x0^1) must simplify to 1 without a 0-exponent artifact.
        let e = parse("x0^1").unwrap();
        assert_relative_eq!(e.diff(0).unwrap().eval(&[5.0, 0.0, 0.0, 0.0]), 1.0);
    }
}
