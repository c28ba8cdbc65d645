//! Recursive-descent parser.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | ident | ident '(' sum ')' | '(' sum ')'
//! ```
//!
//! `^` is right-associative because its right operand is a `unary`, which
//! itself may contain another power. The exponent must be free of
//! variables; it is folded to a number at parse time.

use super::{BinOp, Expr, Func};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: expected {expected}")]
    Syntax { offset: usize, expected: String },
    #[error("unknown function `{name}` at offset {offset}")]
    UnknownFunction { offset: usize, name: String },
    #[error("exponent at offset {offset} must be a numeric constant expression")]
    NonConstantExponent { offset: usize },
    #[error("numeric literal at offset {offset} is out of range")]
    NumberOutOfRange { offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownFunction { offset, .. }
            | ParseError::NonConstantExponent { offset }
            | ParseError::NumberOutOfRange { offset } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Number(v) => format!("number {v}"),
            Token::Ident(name) => format!("identifier `{name}`"),
            Token::Plus => "`+`".into(),
            Token::Minus => "`-`".into(),
            Token::Star => "`*`".into(),
            Token::Slash => "`/`".into(),
            Token::Caret => "`^`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::End => "end of input".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let single = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Some(Token::Plus),
            b'-' => Some(Token::Minus),
            b'*' => Some(Token::Star),
            b'/' => Some(Token::Slash),
            b'^' => Some(Token::Caret),
            b'(' => Some(Token::LParen),
            b')' => Some(Token::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            tokens.push((start, tok));
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let literal = &text[start..i];
            let value: f64 = literal.parse().map_err(|_| ParseError::Syntax {
                offset: start,
                expected: "a number".into(),
            })?;
            if !value.is_finite() {
                return Err(ParseError::NumberOutOfRange { offset: start });
            }
            tokens.push((start, Token::Number(value)));
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            tokens.push((start, Token::Ident(text[start..i].to_string())));
            continue;
        }
        return Err(ParseError::Syntax {
            offset: start,
            expected: "an operator, number, identifier or parenthesis".into(),
        });
    }
    tokens.push((text.len(), Token::End));
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].1
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].0
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.pos].1.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError::Syntax {
            offset: self.offset(),
            expected: format!("{expected}, found {}", self.peek().describe()),
        }
    }

    fn expect(&mut self, tok: Token, what: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(what))
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Token::Plus => BinOp::Add,
                Token::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.product()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Token::Star => BinOp::Mul,
                Token::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Token::Minus {
            self.bump();
            let inner = self.unary()?;
            // A negated literal is read back as a negative constant, which is
            // how negative constants are printed.
            return Ok(match inner {
                Expr::Const(c) => Expr::Const(-c),
                other => Expr::neg(other),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() != Token::Caret {
            return Ok(base);
        }
        self.bump();
        let exponent_offset = self.offset();
        let exponent = self.unary()?;
        if !exponent.free_vars().is_empty() {
            return Err(ParseError::NonConstantExponent {
                offset: exponent_offset,
            });
        }
        let value = exponent
            .evaluate(&super::Bindings::new())
            .ok()
            .filter(|v| v.is_finite())
            .ok_or(ParseError::NonConstantExponent {
                offset: exponent_offset,
            })?;
        Ok(Expr::pow(base, value))
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.peek().clone() {
            Token::Number(v) => {
                self.bump();
                Ok(Expr::Const(v))
            }
            Token::Ident(name) => {
                self.bump();
                if *self.peek() == Token::LParen {
                    let func = Func::from_name(&name)
                        .ok_or(ParseError::UnknownFunction { offset, name })?;
                    self.bump();
                    let arg = self.sum()?;
                    self.expect(Token::RParen, "`)`")?;
                    Ok(Expr::call(func, arg))
                } else if Func::from_name(&name).is_some() {
                    Err(self.error("`(` after function name"))
                } else {
                    Ok(Expr::Var(name))
                }
            }
            Token::LParen => {
                self.bump();
                let inner = self.sum()?;
                self.expect(Token::RParen, "`)`")?;
                Ok(inner)
            }
            _ => Err(self.error("a number, identifier or `(`")),
        }
    }
}

/// Parses an expression. See the module docs for the grammar.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    let expr = parser.sum()?;
    if *parser.peek() != Token::End {
        return Err(parser.error("an operator or end of input"));
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> Expr {
        Expr::Const(v)
    }

    fn v(name: &str) -> Expr {
        Expr::var(name)
    }

    #[test]
    fn multiplication_is_left_associative() {
        let e = parse("0.5*k*q1^2").unwrap();
        assert_eq!(
            e,
            Expr::mul(Expr::mul(c(0.5), v("k")), Expr::pow(v("q1"), 2.0))
        );
    }

    #[test]
    fn product_binds_tighter_than_sum() {
        let e = parse("q1+q2*q3").unwrap();
        assert_eq!(e, Expr::add(v("q1"), Expr::mul(v("q2"), v("q3"))));
    }

    #[test]
    fn subtraction_is_left_associative() {
        let e = parse("a-b-c").unwrap();
        assert_eq!(e, Expr::sub(Expr::sub(v("a"), v("b")), v("c")));
    }

    #[test]
    fn power_is_right_associative_and_folded() {
        assert_eq!(parse("x^3^2").unwrap(), Expr::pow(v("x"), 9.0));
        assert_eq!(parse("x^-1").unwrap(), Expr::pow(v("x"), -1.0));
        assert_eq!(parse("x^(1/2)").unwrap(), Expr::pow(v("x"), 0.5));
    }

    #[test]
    fn power_binds_tighter_than_negation() {
        assert_eq!(parse("-x^2").unwrap(), Expr::neg(Expr::pow(v("x"), 2.0)));
        assert_eq!(parse("-2^2").unwrap(), Expr::neg(Expr::pow(c(2.0), 2.0)));
        assert_eq!(parse("(-2)^2").unwrap(), Expr::pow(c(-2.0), 2.0));
    }

    #[test]
    fn function_calls() {
        assert_eq!(
            parse("ln(E - 0.5*k*q^2)").unwrap(),
            Expr::call(
                Func::Ln,
                Expr::sub(
                    v("E"),
                    Expr::mul(Expr::mul(c(0.5), v("k")), Expr::pow(v("q"), 2.0))
                )
            )
        );
    }

    #[test]
    fn numbers_with_exponents() {
        assert_eq!(parse("1.5e-3").unwrap(), c(1.5e-3));
        assert_eq!(parse(".25").unwrap(), c(0.25));
        assert_eq!(parse("2E+2").unwrap(), c(200.0));
    }

    #[test]
    fn unclosed_call_reports_end_offset() {
        let err = parse("sin(").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { offset: 4, .. }), "{err}");
    }

    #[test]
    fn unclosed_paren_in_potential() {
        let err = parse("0.5*(").unwrap_err();
        assert_eq!(err.offset(), 5);
    }

    #[test]
    fn unknown_function() {
        let err = parse("1 + tan(x)").unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownFunction {
                offset: 4,
                name: "tan".into()
            }
        );
    }

    #[test]
    fn variable_exponent_rejected() {
        let err = parse("q^n").unwrap_err();
        assert_eq!(err, ParseError::NonConstantExponent { offset: 2 });
    }

    #[test]
    fn misc_syntax_errors() {
        assert!(parse("").is_err());
        assert!(parse("1 2").is_err());
        assert!(parse("q1 $ 2").is_err());
        assert!(parse("sin x").is_err());
        assert_eq!(parse("(1").unwrap_err().offset(), 2);
        assert!(matches!(
            parse("1e999"),
            Err(ParseError::NumberOutOfRange { offset: 0 })
        ));
    }

    #[test]
    fn identifiers_follow_the_naming_rule() {
        assert_eq!(parse("_k2").unwrap(), v("_k2"));
        assert_eq!(parse("q10").unwrap(), v("q10"));
        assert!(parse("2q").is_err());
    }
}
