//! A small expression language for maps `(x1, x2) ↦ value`.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := '-' unary | power
//! power    := primary ('^' exponent)?
//! exponent := ['-'] INTEGER | '(' ['-'] INTEGER ')'      (|n| <= 6)
//! primary  := NUMBER | 'x1' | 'x2' | 'pi' | FUNC '(' expr ')' | '(' expr ')'
//! FUNC     := 'sin' | 'cos' | 'exp' | 'sqrt'
//! ```
//!
//! Whitespace is ignored. Expressions are evaluated in jet arithmetic, so the
//! result of [`Expr::eval`] carries exact derivatives through order three.

use std::fmt;

use crate::error::{Error, Result};
use crate::jets::{Coord, Jet3};

/// Largest magnitude accepted for an integer exponent.
pub const MAX_EXPONENT: i32 = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Coord),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
}

impl Expr {
    pub fn parse(source: &str) -> Result<Expr> {
        let tokens = lex(source)?;
        let mut parser = Parser { tokens, pos: 0 };
        let expr = parser.expr()?;
        match parser.peek() {
            (Tok::End, _) => Ok(expr),
            (tok, offset) => Err(Error::Syntax {
                offset,
                message: format!("unexpected {}", tok.describe()),
            }),
        }
    }

    /// Evaluates the expression over seeded coordinate jets at `x`.
    pub fn eval(&self, x: [f64; 2]) -> Result<Jet3> {
        self.eval_jets(&Jet3::seed_both(x))
    }

    /// Evaluates with caller-provided coordinate jets.
    pub fn eval_jets(&self, coords: &[Jet3; 2]) -> Result<Jet3> {
        Ok(match self {
            Expr::Const(c) => Jet3::constant(*c),
            Expr::Var(c) => coords[c.index()],
            Expr::Neg(e) => -e.eval_jets(coords)?,
            Expr::Call(f, e) => {
                let a = e.eval_jets(coords)?;
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Sqrt => a.sqrt()?,
                }
            }
            Expr::Binary(op, l, r) => {
                let a = l.eval_jets(coords)?;
                let b = r.eval_jets(coords)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a.checked_div(&b)?,
                }
            }
            Expr::Pow(e, n) => e.eval_jets(coords)?.powi(*n)?,
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, _, _) => op.precedence(),
            Expr::Neg(_) => 3,
            Expr::Pow(_, _) => 4,
            Expr::Const(c) if c.is_sign_negative() => 3,
            _ => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            f.write_str("(")?;
            self.fmt_prec(f, 0)?;
            return f.write_str(")");
        }
        match self {
            Expr::Const(c) if c.is_sign_negative() => write!(f, "-{}", -c),
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(Coord::X1) => f.write_str("x1"),
            Expr::Var(Coord::X2) => f.write_str("x2"),
            Expr::Neg(e) => {
                f.write_str("-")?;
                e.fmt_prec(f, 3)
            }
            Expr::Call(func, e) => {
                write!(f, "{}(", func.name())?;
                e.fmt_prec(f, 0)?;
                f.write_str(")")
            }
            Expr::Binary(op, l, r) => {
                let p = op.precedence();
                l.fmt_prec(f, p)?;
                write!(f, " {} ", op.symbol())?;
                r.fmt_prec(f, p + 1)
            }
            Expr::Pow(e, n) => {
                e.fmt_prec(f, 5)?;
                write!(f, "^{n}")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Expr> {
        Expr::parse(s)
    }
}

/// Parses a map written as `"f1; f2"`.
pub fn parse_map(source: &str) -> Result<[Expr; 2]> {
    let mut parts = source.split(';');
    let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(Error::InvalidArgument(format!(
            "map must have exactly two components separated by ';', got {source:?}"
        )));
    };
    let offset = a.len() + 1;
    let f1 = Expr::parse(a)?;
    let f2 = Expr::parse(b).map_err(|e| shift_offset(e, offset))?;
    Ok([f1, f2])
}

fn shift_offset(e: Error, by: usize) -> Error {
    match e {
        Error::Lex { offset, message } => Error::Lex { offset: offset + by, message },
        Error::Syntax { offset, message } => Error::Syntax { offset: offset + by, message },
        Error::Arity { offset, message } => Error::Arity { offset: offset + by, message },
        other => other,
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::End => "end of input".to_string(),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let single = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = single {
            out.push((tok, start));
            i += 1;
        } else if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
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
            let text = &src[start..i];
            let value: f64 = text.parse().map_err(|_| Error::Lex {
                offset: start,
                message: format!("malformed number '{text}'"),
            })?;
            out.push((Tok::Num(value), start));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = &src[start..i];
            if !matches!(word, "x1" | "x2" | "pi") && Func::from_name(word).is_none() {
                return Err(Error::Lex {
                    offset: start,
                    message: format!("unknown identifier '{word}'"),
                });
            }
            out.push((Tok::Ident(word.to_string()), start));
        } else {
            let ch = src[start..].chars().next().unwrap_or('?');
            return Err(Error::Lex {
                offset: start,
                message: format!("unexpected character '{ch}'"),
            });
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> (Tok, usize) {
        self.tokens[self.pos].clone()
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<usize> {
        let (tok, offset) = self.bump();
        if tok == want {
            Ok(offset)
        } else {
            Err(Error::Syntax {
                offset,
                message: format!("expected {}, found {}", want.describe(), tok.describe()),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().0 {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().0 {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek().0 == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.peek().0 != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let n = self.exponent()?;
        Ok(Expr::Pow(Box::new(base), n))
    }

    fn exponent(&mut self) -> Result<i32> {
        let parenthesized = self.peek().0 == Tok::LParen;
        if parenthesized {
            self.bump();
        }
        let negative = match self.peek().0 {
            Tok::Minus => {
                self.bump();
                true
            }
            _ => false,
        };
        let (tok, offset) = self.bump();
        let Tok::Num(v) = tok else {
            return Err(Error::Syntax {
                offset,
                message: format!("exponent must be an integer literal, found {}", tok.describe()),
            });
        };
        if v.fract() != 0.0 || v > MAX_EXPONENT as f64 {
            return Err(Error::Syntax {
                offset,
                message: format!("exponent must be an integer in [-{MAX_EXPONENT}, {MAX_EXPONENT}], got {v}"),
            });
        }
        if parenthesized {
            self.expect(Tok::RParen)?;
        }
        let n = v as i32;
        Ok(if negative { -n } else { n })
    }

    fn primary(&mut self) -> Result<Expr> {
        let (tok, offset) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "x1" => Ok(Expr::Var(Coord::X1)),
                "x2" => Ok(Expr::Var(Coord::X2)),
                "pi" => Ok(Expr::Const(std::f64::consts::PI)),
                _ => {
                    let func = Func::from_name(&name).expect("lexer admits only known names");
                    self.expect(Tok::LParen)?;
                    let mut args = vec![self.expr()?];
                    while self.peek().0 == Tok::Comma {
                        self.bump();
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen)?;
                    if args.len() != 1 {
                        return Err(Error::Arity {
                            offset,
                            message: format!("{name} takes 1 argument, got {}", args.len()),
                        });
                    }
                    Ok(Expr::Call(func, Box::new(args.pop().unwrap())))
                }
            },
            other => Err(Error::Syntax {
                offset,
                message: format!("unexpected {}", other.describe()),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Coord::{X1, X2};

    fn var(c: Coord) -> Box<Expr> {
        Box::new(Expr::Var(c))
    }

    #[test]
    fn precedence_puts_sum_at_root() {
        let e = Expr::parse("x1*x2 + sin(x1)").unwrap();
        assert_eq!(
            e,
            Expr::Binary(
                BinOp::Add,
                Box::new(Expr::Binary(BinOp::Mul, var(X1), var(X2))),
                Box::new(Expr::Call(Func::Sin, var(X1)))
            )
        );
    }

    #[test]
    fn integer_power() {
        let e = Expr::parse("x1^2 - 3").unwrap();
        assert_eq!(
            e,
            Expr::Binary(BinOp::Sub, Box::new(Expr::Pow(var(X1), 2)), Box::new(Expr::Const(3.0)))
        );
        assert_eq!(Expr::parse("x1^-2").unwrap(), Expr::Pow(var(X1), -2));
        assert_eq!(Expr::parse("x1^(-2)").unwrap(), Expr::Pow(var(X1), -2));
    }

    #[test]
    fn power_binds_tighter_than_negation() {
        assert_eq!(Expr::parse("-x1^2").unwrap(), Expr::Neg(Box::new(Expr::Pow(var(X1), 2))));
    }

    #[test]
    fn left_associative() {
        let e = Expr::parse("x1 - x2 - 1").unwrap();
        let Expr::Binary(BinOp::Sub, l, r) = e else { panic!() };
        assert_eq!(*r, Expr::Const(1.0));
        assert!(matches!(*l, Expr::Binary(BinOp::Sub, _, _)));
    }

    #[test]
    fn unclosed_paren_reports_offset() {
        assert_eq!(
            Expr::parse("sin(").unwrap_err(),
            Error::Syntax {
                offset: 4,
                message: "unexpected end of input".into()
            }
        );
    }

    #[test]
    fn error_classes() {
        assert!(matches!(Expr::parse("x1 + y"), Err(Error::Lex { offset: 5, .. })));
        assert!(matches!(Expr::parse("x1 $ 2"), Err(Error::Lex { offset: 3, .. })));
        assert!(matches!(Expr::parse("sin(x1, x2)"), Err(Error::Arity { offset: 0, .. })));
        assert!(matches!(Expr::parse("x1^1.5"), Err(Error::Syntax { .. })));
        assert!(matches!(Expr::parse("x1^7"), Err(Error::Syntax { .. })));
        assert!(matches!(Expr::parse("x1^x2"), Err(Error::Syntax { .. })));
        assert!(matches!(Expr::parse(""), Err(Error::Syntax { offset: 0, .. })));
        assert!(matches!(Expr::parse("x1 x2"), Err(Error::Syntax { offset: 3, .. })));
        assert!(matches!(Expr::parse("sin x1"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn eval_product() {
        let j = Expr::parse("x1*x2").unwrap().eval([1.0, 2.0]).unwrap();
        assert_eq!(j.value(), 2.0);
        assert_eq!(j.grad(), [2.0, 1.0]);
    }

    #[test]
    fn rotation_map_has_unit_jacobian() {
        let [f1, f2] = parse_map("x2; -x1").unwrap();
        for p in [[0.0, 0.0], [1.0, -3.0], [0.25, 7.5]] {
            let a = f1.eval(p).unwrap();
            let b = f2.eval(p).unwrap();
            let jac = a.d(X1) * b.d(X2) - a.d(X2) * b.d(X1);
            assert_eq!(jac, 1.0);
        }
    }

    #[test]
    fn pole_is_a_domain_error() {
        let e = Expr::parse("1/x1").unwrap();
        assert!(matches!(e.eval([0.0, 1.0]), Err(Error::Domain(_))));
        assert!(Expr::parse("sqrt(x1)").unwrap().eval([-1.0, 0.0]).is_err());
    }

    #[test]
    fn map_offsets_point_into_second_component() {
        assert!(matches!(parse_map("x1;x2 + ?"), Err(Error::Lex { offset: 8, .. })));
        assert!(parse_map("x1").is_err());
        assert!(parse_map("x1;x2;x1").is_err());
    }

    #[test]
    fn printer_is_stable() {
        for src in [
            "x1*x2 + sin(x1)",
            "-(x1 + x2)*3",
            "(x1 - x2) - (x1 - x2)",
            "x1 - (x2 - 1)",
            "--x1^2",
            "(-x1)^3 / (x2*x2)",
            "exp(-(x1^2 + x2^2)/8)",
            "1e-7 * pi + 2.5e3",
            "x1 / (x2 / x1)",
        ] {
            let a = Expr::parse(src).unwrap();
            let printed = a.to_string();
            let b = Expr::parse(&printed).unwrap();
            assert_eq!(a, b, "{src} -> {printed}");
        }
    }
}
