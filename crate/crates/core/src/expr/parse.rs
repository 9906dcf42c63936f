//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := base ("^" exponent)?
//! base   := number | symbol | func "(" expr ")" | "(" expr ")" | "-" factor
//! func   := exp | log | sin | cos | sinh | cosh | sqrt
//! number := decimal | rational "p/q"
//! symbol := [A-Za-z_][A-Za-z0-9_]*
//! ```
//!
//! Exponents are parsed as factors and must fold to a rational constant.

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use super::{Func, Rational, ScalarExpr};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown symbol `{name}` at byte {offset}")]
    UnknownSymbol { name: String, offset: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Op(char),
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Lexer<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn digits(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let Some(&c) = self.src.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        if c.is_ascii_digit() || (c == b'.' && self.src.get(self.pos + 1).is_some_and(u8::is_ascii_digit)) {
            return self.number(start).map(|t| (t, start));
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
                self.pos += 1;
            }
            let s = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
            return Ok((Tok::Ident(s), start));
        }
        if b"+-*/^()".contains(&c) {
            self.pos += 1;
            return Ok((Tok::Op(c as char), start));
        }
        Err(ParseError::Syntax { offset: start, message: format!("unexpected character `{}`", c as char) })
    }

    fn number(&mut self, start: usize) -> Result<Tok, ParseError> {
        let int_part = self.digits();
        // rational literal p/q: digits immediately followed by '/' and digits
        if self.src.get(self.pos) == Some(&b'/') && self.src.get(self.pos + 1).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
            let den = self.digits();
            let den: BigInt = den.parse().unwrap();
            if den.is_zero() {
                return Err(ParseError::Syntax { offset: start, message: "zero denominator".into() });
            }
            let num: BigInt = int_part.parse().unwrap();
            return Ok(Tok::Num(Rational::new(num, den)));
        }
        let mut frac = String::new();
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            frac = self.digits();
        }
        let mut exp: i64 = 0;
        if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E')) {
            let save = self.pos;
            self.pos += 1;
            let mut sign = 1;
            match self.src.get(self.pos) {
                Some(b'-') => {
                    sign = -1;
                    self.pos += 1;
                }
                Some(b'+') => self.pos += 1,
                _ => {}
            }
            let d = self.digits();
            if d.is_empty() {
                // not an exponent; leave `e` for the identifier lexer
                self.pos = save;
            } else {
                exp = sign * d.parse::<i64>().map_err(|_| ParseError::Syntax {
                    offset: start,
                    message: "exponent out of range".into(),
                })?;
            }
        }
        let mantissa: BigInt = format!("{}{}", if int_part.is_empty() { "0" } else { &int_part }, frac)
            .parse()
            .unwrap();
        let scale = exp - frac.len() as i64;
        if scale.abs() > 400 {
            return Err(ParseError::Syntax { offset: start, message: "numeric literal out of range".into() });
        }
        let ten = BigInt::from(10);
        let value = if scale >= 0 {
            Rational::from_integer(mantissa * num_traits::pow(ten, scale as usize))
        } else {
            Rational::new(mantissa, num_traits::pow(ten, (-scale) as usize))
        };
        Ok(Tok::Num(value))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    tok_pos: usize,
    coords: &'a [&'a str],
    params: &'a [&'a str],
}

impl<'a> Parser<'a> {
    fn advance(&mut self) -> Result<(), ParseError> {
        let (t, p) = self.lexer.next()?;
        self.tok = t;
        self.tok_pos = p;
        Ok(())
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax { offset: self.tok_pos, message: message.into() })
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.tok == Tok::Op(c) {
            self.advance()
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn expr(&mut self) -> Result<ScalarExpr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.tok {
                Tok::Op('+') => {
                    self.advance()?;
                    terms.push(self.term()?);
                }
                Tok::Op('-') => {
                    self.advance()?;
                    terms.push(-self.term()?);
                }
                _ => break,
            }
        }
        Ok(ScalarExpr::sum(terms))
    }

    fn term(&mut self) -> Result<ScalarExpr, ParseError> {
        let mut factors = vec![self.factor()?];
        loop {
            match self.tok {
                Tok::Op('*') => {
                    self.advance()?;
                    factors.push(self.factor()?);
                }
                Tok::Op('/') => {
                    self.advance()?;
                    factors.push(self.factor()?.recip());
                }
                _ => break,
            }
        }
        Ok(ScalarExpr::product(factors))
    }

    fn factor(&mut self) -> Result<ScalarExpr, ParseError> {
        let base = self.base()?;
        if self.tok == Tok::Op('^') {
            self.advance()?;
            let at = self.tok_pos;
            let exponent = self.factor()?;
            let Some(k) = exponent.as_const() else {
                return Err(ParseError::Syntax { offset: at, message: "exponent must be a rational constant".into() });
            };
            return Ok(ScalarExpr::pow(&base, k.clone()));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<ScalarExpr, ParseError> {
        match self.tok.clone() {
            Tok::Num(r) => {
                self.advance()?;
                Ok(ScalarExpr::constant(r))
            }
            Tok::Op('-') => {
                self.advance()?;
                Ok(-self.factor()?)
            }
            Tok::Op('(') => {
                self.advance()?;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let at = self.tok_pos;
                self.advance()?;
                if self.tok == Tok::Op('(') {
                    let Some(f) = Func::from_name(&name) else {
                        return Err(ParseError::UnknownSymbol { name, offset: at });
                    };
                    self.advance()?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(ScalarExpr::func(f, &arg));
                }
                if self.coords.contains(&name.as_str()) {
                    Ok(ScalarExpr::coord(&name))
                } else if self.params.contains(&name.as_str()) {
                    Ok(ScalarExpr::param(&name))
                } else {
                    Err(ParseError::UnknownSymbol { name, offset: at })
                }
            }
            Tok::End => self.err("unexpected end of input"),
            Tok::Op(c) => self.err(format!("unexpected `{c}`")),
        }
    }
}

/// Parses `text`, resolving identifiers as coordinates first, then as
/// declared parameters.
pub fn parse_expr(text: &str, coords: &[&str], params: &[&str]) -> Result<ScalarExpr, ParseError> {
    let mut p = Parser {
        lexer: Lexer { src: text.as_bytes(), pos: 0 },
        tok: Tok::End,
        tok_pos: 0,
        coords,
        params,
    };
    p.advance()?;
    let e = p.expr()?;
    if p.tok != Tok::End {
        return p.err("trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{rational, Node};

    const XYZ: &[&str] = &["x", "y", "z"];

    #[test]
    fn exp_of_negated_coordinate() {
        let e = parse_expr("exp(-z)", XYZ, &[]).unwrap();
        assert_eq!(e, (-ScalarExpr::coord("z")).exp());
        assert!(matches!(e.node(), Node::Func(Func::Exp, _)));
    }

    #[test]
    fn linear_parameter_form() {
        let e = parse_expr("2*alpha - 3*beta", XYZ, &["alpha", "beta"]).unwrap();
        let expected = ScalarExpr::int(2) * ScalarExpr::param("alpha") - ScalarExpr::int(3) * ScalarExpr::param("beta");
        assert_eq!(e, expected);
    }

    #[test]
    fn rational_exponent() {
        let e = parse_expr("x^(1/2)", XYZ, &[]).unwrap();
        match e.node() {
            Node::Pow(b, k) => {
                assert_eq!(*b, ScalarExpr::coord("x"));
                assert_eq!(*k, rational(1, 2));
            }
            other => panic!("expected power node, got {other:?}"),
        }
        assert_eq!(parse_expr("x^1/2", XYZ, &[]).unwrap(), e);
    }

    #[test]
    fn precedence_and_unary_minus() {
        let x = ScalarExpr::coord("x");
        assert_eq!(parse_expr("-x^2", XYZ, &[]).unwrap(), -x.powi(2));
        assert_eq!(parse_expr("1 + 2*x", XYZ, &[]).unwrap(), ScalarExpr::one() + ScalarExpr::int(2) * &x);
        assert_eq!(parse_expr("x/2", XYZ, &[]).unwrap(), ScalarExpr::ratio(1, 2) * &x);
        assert_eq!(parse_expr("0.25e1", XYZ, &[]).unwrap(), ScalarExpr::ratio(5, 2));
        assert_eq!(parse_expr("x^-1", XYZ, &[]).unwrap(), x.recip());
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        assert_eq!(
            parse_expr("x + * y", XYZ, &[]),
            Err(ParseError::Syntax { offset: 4, message: "unexpected `*`".into() })
        );
        assert!(matches!(parse_expr("exp(x", XYZ, &[]), Err(ParseError::Syntax { offset: 5, .. })));
        assert!(matches!(parse_expr("x^y", XYZ, &[]), Err(ParseError::Syntax { offset: 2, .. })));
        assert!(matches!(parse_expr("x $", XYZ, &[]), Err(ParseError::Syntax { offset: 2, .. })));
    }

    #[test]
    fn unknown_symbols() {
        assert_eq!(
            parse_expr("x + w", XYZ, &[]),
            Err(ParseError::UnknownSymbol { name: "w".into(), offset: 4 })
        );
        assert_eq!(
            parse_expr("tan(x)", XYZ, &[]),
            Err(ParseError::UnknownSymbol { name: "tan".into(), offset: 0 })
        );
    }
}
