//! A small expression language for the perturbation functions `r_i(t)`.
//!
//! The grammar is fixed: decimal literals, the variable `t`, the binary
//! operators `+ - * / ^`, unary minus, and the functions `exp`, `log`,
//! `sin`, `cos`, `sqrt`, `abs` (one argument) and `pow` (two arguments).
//!
//! Precedence from tightest to loosest is `^`, unary `-`, `* /`, `+ -`.
//! `^` is right associative and its right operand may carry a unary minus,
//! so `(1+t)^-3` and `2^3^2 = 2^9` parse as expected.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at column {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at column {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("function `{name}` at column {pos} takes {expected} argument(s), got {found}")]
    Arity {
        name: String,
        pos: usize,
        expected: usize,
        found: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("overflow: non-finite result in {0}")]
    Overflow(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    Abs,
    Pow,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "pow" => Func::Pow,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Pow => "pow",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Pow => 2,
            _ => 1,
        }
    }
}

/// Abstract syntax tree of a parsed expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// A parsed expression together with the text it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    source: String,
    ast: Expr,
}

impl Expression {
    pub fn parse(source: &str) -> Result<Self, ParseError> {
        let ast = parse_expression(source)?;
        Ok(Expression {
            source: source.to_string(),
            ast,
        })
    }

    pub fn zero() -> Self {
        Expression {
            source: "0".to_string(),
            ast: Expr::Num(0.0),
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    pub fn eval(&self, t: f64) -> Result<f64, EvalError> {
        evaluate_expression(&self.ast, t)
    }

    /// True when the tree is a literal zero, possibly negated.
    pub fn is_identically_zero(&self) -> bool {
        fn zero(e: &Expr) -> bool {
            match e {
                Expr::Num(v) => *v == 0.0,
                Expr::Neg(inner) => zero(inner),
                _ => false,
            }
        }
        zero(&self.ast)
    }
}

impl FromStr for Expression {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expression::parse(s)
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ast)
    }
}

/// Fully parenthesized rendering; re-parsing it gives back the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var => write!(f, "t"),
            Expr::Neg(inner) => write!(f, "(-{inner})"),
            Expr::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokenize(source: &'a str) -> Result<Vec<(Token, usize)>, ParseError> {
        let mut lx = Lexer {
            src: source.as_bytes(),
            pos: 0,
        };
        let mut out = Vec::new();
        loop {
            let (tok, at) = lx.next_token()?;
            let end = tok == Token::End;
            out.push((tok, at));
            if end {
                return Ok(out);
            }
        }
    }

    fn next_token(&mut self) -> Result<(Token, usize), ParseError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = self.src.get(self.pos) else {
            return Ok((Token::End, start + 1));
        };
        let tok = match c {
            b'0'..=b'9' | b'.' => return self.number(start),
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while self
                    .src
                    .get(self.pos)
                    .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                return Ok((Token::Ident(name.to_string()), start + 1));
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => Token::Op(c as char),
            b'(' => Token::LParen,
            b')' => Token::RParen,
            b',' => Token::Comma,
            _ => {
                return Err(ParseError::Syntax {
                    pos: start + 1,
                    msg: format!("unexpected character `{}`", c as char),
                })
            }
        };
        self.pos += 1;
        Ok((tok, start + 1))
    }

    fn number(&mut self, start: usize) -> Result<(Token, usize), ParseError> {
        let digits = |lx: &mut Lexer| {
            while lx.src.get(lx.pos).is_some_and(u8::is_ascii_digit) {
                lx.pos += 1;
            }
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                digits(self);
            } else {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(|v| (Token::Num(v), start + 1))
            .map_err(|_| ParseError::Syntax {
                pos: start + 1,
                msg: format!("malformed number `{text}`"),
            })
    }
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.at].0
    }

    fn pos(&self) -> usize {
        self.tokens[self.at].1
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.at].0.clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        tok
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        let found = match self.peek() {
            Token::Num(v) => format!("number {v}"),
            Token::Ident(s) => format!("`{s}`"),
            Token::Op(c) => format!("`{c}`"),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::Comma => "`,`".into(),
            Token::End => "end of input".into(),
        };
        ParseError::Syntax {
            pos: self.pos(),
            msg: format!("expected {wanted}, found {found}"),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Token::Op(c @ ('+' | '-')) = *self.peek() {
            self.bump();
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Token::Op(c @ ('*' | '/')) = *self.peek() {
            self.bump();
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Token::Op('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() == Token::Op('^') {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Token::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Token::LParen => {
                self.bump();
                let inner = self.expr()?;
                if *self.peek() != Token::RParen {
                    return Err(self.unexpected("`)`"));
                }
                self.bump();
                Ok(inner)
            }
            Token::Ident(name) => {
                self.bump();
                if name == "t" {
                    return Ok(Expr::Var);
                }
                let func = Func::lookup(&name).ok_or_else(|| ParseError::UnknownIdentifier {
                    name: name.clone(),
                    pos,
                })?;
                if *self.peek() != Token::LParen {
                    return Err(self.unexpected("`(` after function name"));
                }
                self.bump();
                let mut args = Vec::new();
                if *self.peek() != Token::RParen {
                    args.push(self.expr()?);
                    while *self.peek() == Token::Comma {
                        self.bump();
                        args.push(self.expr()?);
                    }
                }
                if *self.peek() != Token::RParen {
                    return Err(self.unexpected("`,` or `)`"));
                }
                self.bump();
                if args.len() != func.arity() {
                    return Err(ParseError::Arity {
                        name,
                        pos,
                        expected: func.arity(),
                        found: args.len(),
                    });
                }
                Ok(Expr::Call(func, args))
            }
            _ => Err(self.unexpected("a number, `t`, a function or `(`")),
        }
    }
}

pub fn parse_expression(source: &str) -> Result<Expr, ParseError> {
    if source.trim().is_empty() {
        return Err(ParseError::Syntax {
            pos: 1,
            msg: "empty expression".into(),
        });
    }
    if let Some(pos) = source.find(|c: char| !c.is_ascii()) {
        return Err(ParseError::Syntax {
            pos: pos + 1,
            msg: "non-ASCII input".into(),
        });
    }
    let tokens = Lexer::tokenize(source)?;
    let mut parser = Parser { tokens, at: 0 };
    let ast = parser.expr()?;
    if *parser.peek() != Token::End {
        return Err(parser.unexpected("end of input"));
    }
    Ok(ast)
}

fn finite(v: f64, what: &str) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::Overflow(what.to_string()))
    }
}

fn power(base: f64, exponent: f64) -> Result<f64, EvalError> {
    if base == 0.0 {
        if exponent == 0.0 {
            return Ok(1.0);
        }
        if exponent < 0.0 {
            return Err(EvalError::DivisionByZero);
        }
    }
    if base < 0.0 && exponent.fract() != 0.0 {
        return Err(EvalError::Domain(format!(
            "negative base {base} to non-integer power {exponent}"
        )));
    }
    let v = if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
        base.powi(exponent as i32)
    } else {
        base.powf(exponent)
    };
    finite(v, "^")
}

pub fn evaluate_expression(e: &Expr, t: f64) -> Result<f64, EvalError> {
    match e {
        Expr::Num(v) => Ok(*v),
        Expr::Var => Ok(t),
        Expr::Neg(inner) => Ok(-evaluate_expression(inner, t)?),
        Expr::Binary(op, l, r) => {
            let a = evaluate_expression(l, t)?;
            let b = evaluate_expression(r, t)?;
            match op {
                BinOp::Add => finite(a + b, "+"),
                BinOp::Sub => finite(a - b, "-"),
                BinOp::Mul => finite(a * b, "*"),
                BinOp::Div => {
                    if b == 0.0 {
                        Err(EvalError::DivisionByZero)
                    } else {
                        finite(a / b, "/")
                    }
                }
                BinOp::Pow => power(a, b),
            }
        }
        Expr::Call(func, args) => {
            let x = evaluate_expression(&args[0], t)?;
            match func {
                Func::Exp => finite(x.exp(), "exp"),
                Func::Log => {
                    if x <= 0.0 {
                        Err(EvalError::Domain(format!("log of nonpositive {x}")))
                    } else {
                        Ok(x.ln())
                    }
                }
                Func::Sin => Ok(x.sin()),
                Func::Cos => Ok(x.cos()),
                Func::Sqrt => {
                    if x < 0.0 {
                        Err(EvalError::Domain(format!("sqrt of negative {x}")))
                    } else {
                        Ok(x.sqrt())
                    }
                }
                Func::Abs => Ok(x.abs()),
                Func::Pow => power(x, evaluate_expression(&args[1], t)?),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn eval(src: &str, t: f64) -> Result<f64, EvalError> {
        Expression::parse(src).unwrap().eval(t)
    }

    #[test]
    fn literal_zero() {
        assert_eq!(parse_expression("0").unwrap(), Expr::Num(0.0));
    }

    #[test]
    fn division_over_power() {
        let ast = parse_expression("1/(1+t)^3").unwrap();
        let Expr::Binary(BinOp::Div, num, den) = ast else {
            panic!("expected a division at the root");
        };
        assert_eq!(*num, Expr::Num(1.0));
        assert!(matches!(*den, Expr::Binary(BinOp::Pow, _, _)));
    }

    #[test]
    fn direct_values() {
        assert_eq!(eval("exp(-t)*sin(t)", 0.0).unwrap(), 0.0);
        assert_eq!(eval("t^2 + 1", 3.0).unwrap(), 10.0);
        assert_eq!(eval("1/(1+t)^3", 1.0).unwrap(), 0.125);
        assert_eq!(eval("exp(-2*t)", 0.5).unwrap(), (-1.0f64).exp());
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval("-t^2", 3.0).unwrap(), -9.0);
        assert_eq!(eval("2^3^2", 0.0).unwrap(), 512.0);
        assert_eq!(eval("(1+t)^-3", 1.0).unwrap(), 0.125);
        assert_eq!(eval("8/4/2", 0.0).unwrap(), 1.0);
        assert_eq!(eval("8-4-2", 0.0).unwrap(), 2.0);
        assert_eq!(eval("2*-t", 3.0).unwrap(), -6.0);
        assert_eq!(eval("pow(t, 0.5)", 4.0).unwrap(), 2.0);
        assert_eq!(eval("1.5e-1*t", 2.0).unwrap(), 0.3);
    }

    #[test]
    fn zero_to_the_zero_is_one() {
        assert_eq!(eval("0^0", 0.0).unwrap(), 1.0);
        assert_eq!(eval("t^0", 0.0).unwrap(), 1.0);
        assert_eq!(eval("pow(t, t)", 0.0).unwrap(), 1.0);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(eval("log(t)", 0.0), Err(EvalError::Domain(_))));
        assert!(matches!(eval("log(t)", -1.0), Err(EvalError::Domain(_))));
        assert!(matches!(eval("sqrt(t)", -1.0), Err(EvalError::Domain(_))));
        assert!(matches!(eval("1/t", 0.0), Err(EvalError::DivisionByZero)));
        assert!(matches!(eval("t^-1", 0.0), Err(EvalError::DivisionByZero)));
        assert!(matches!(
            eval("exp(t)", 1000.0),
            Err(EvalError::Overflow(_))
        ));
        assert!(matches!(eval("t^0.5", -2.0), Err(EvalError::Domain(_))));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_expression("1 + "),
            Err(ParseError::Syntax { pos: 5, .. })
        ));
        assert!(matches!(
            parse_expression("x + 1"),
            Err(ParseError::UnknownIdentifier { pos: 1, .. })
        ));
        assert!(matches!(
            parse_expression("sin(t, t)"),
            Err(ParseError::Arity {
                expected: 1,
                found: 2,
                ..
            })
        ));
        assert!(matches!(
            parse_expression("pow(t)"),
            Err(ParseError::Arity { expected: 2, .. })
        ));
        assert!(parse_expression("").is_err());
        assert!(parse_expression("(t").is_err());
        assert!(parse_expression("t)").is_err());
        assert!(parse_expression("2 $ 3").is_err());
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![(0.0f64..100.0).prop_map(Expr::Num), Just(Expr::Var),];
        leaf.prop_recursive(5, 40, 3, |inner| {
            let ops = prop_oneof![
                Just(BinOp::Add),
                Just(BinOp::Sub),
                Just(BinOp::Mul),
                Just(BinOp::Div),
                Just(BinOp::Pow),
            ];
            let unary_funcs = prop_oneof![
                Just(Func::Exp),
                Just(Func::Log),
                Just(Func::Sin),
                Just(Func::Cos),
                Just(Func::Sqrt),
                Just(Func::Abs),
            ];
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                (ops, inner.clone(), inner.clone()).prop_map(|(op, l, r)| Expr::Binary(
                    op,
                    Box::new(l),
                    Box::new(r)
                )),
                (unary_funcs, inner.clone()).prop_map(|(f, a)| Expr::Call(f, vec![a])),
                (inner.clone(), inner).prop_map(|(a, b)| Expr::Call(Func::Pow, vec![a, b])),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_then_parse_is_identity(e in arb_expr()) {
            let printed = e.to_string();
            let back = parse_expression(&printed).unwrap();
            prop_assert_eq!(back, e);
        }
    }
}
