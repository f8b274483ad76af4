//! Scalar-field expressions in the variables `x1 … xk`.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?          right-associative
//! atom    := number | 'pi' | 'x' index | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | exp | abs | sqrt
//! ```

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use core::fmt;

use crate::error::{Error, Result};
use crate::field::{check_arity, Field};
use crate::grid::UniformGrid;
use crate::net::Domain;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Abs,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    /// Zero-based variable index (`x1` is `Var(0)`).
    Var(usize),
    Neg(Box<Node>),
    Binary(BinaryOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn eval(&self, point: &[f64]) -> Result<f64> {
        let v = match self {
            Node::Const(c) => *c,
            Node::Var(i) => point[*i],
            Node::Neg(e) => -e.eval(point)?,
            Node::Binary(op, l, r) => {
                let a = l.eval(point)?;
                let b = r.eval(point)?;
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => {
                        if b == 0.0 {
                            return Err(Error::DivisionByZero);
                        }
                        a / b
                    }
                    BinaryOp::Pow => libm::pow(a, b),
                }
            }
            Node::Call(func, e) => {
                let a = e.eval(point)?;
                match func {
                    Func::Sin => libm::sin(a),
                    Func::Cos => libm::cos(a),
                    Func::Exp => libm::exp(a),
                    Func::Abs => libm::fabs(a),
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(Error::SqrtNegative(a));
                        }
                        libm::sqrt(a)
                    }
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite)
        }
    }
}

impl fmt::Display for Node {
    /// Fully parenthesised; re-parses to an equivalent tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) if *c < 0.0 => write!(f, "(-{:?})", -c),
            Node::Const(c) => write!(f, "{c:?}"),
            Node::Var(i) => write!(f, "x{}", i + 1),
            Node::Neg(e) => write!(f, "(-{e})"),
            Node::Binary(op, l, r) => {
                let sym = match op {
                    BinaryOp::Add => "+",
                    BinaryOp::Sub => "-",
                    BinaryOp::Mul => "*",
                    BinaryOp::Div => "/",
                    BinaryOp::Pow => "^",
                };
                write!(f, "({l} {sym} {r})")
            }
            Node::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

/// A parsed field expression of fixed arity. Immutable after parsing.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldExpr {
    ast: Node,
    arity: usize,
    source: String,
}

impl FieldExpr {
    pub fn ast(&self) -> &Node {
        &self.ast
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval_at(&self, point: &[f64]) -> Result<f64> {
        check_arity(self.arity, point)?;
        self.ast.eval(point)
    }
}

impl Field for FieldExpr {
    fn arity(&self) -> usize {
        self.arity
    }

    fn eval(&self, point: &[f64]) -> Result<f64> {
        self.eval_at(point)
    }
}

impl fmt::Display for FieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.ast.fmt(f)
    }
}

/// Parse `source` as a field in `arity` variables.
pub fn parse_field(source: &str, arity: usize) -> Result<FieldExpr> {
    if arity == 0 {
        return Err(Error::InvalidArgument("arity must be at least 1".into()));
    }
    let mut parser = Parser {
        src: source.as_bytes(),
        pos: 0,
        arity,
    };
    parser.skip_ws();
    if parser.at_end() {
        return Err(Error::Syntax {
            position: 0,
            message: "empty expression".into(),
        });
    }
    let ast = parser.expr()?;
    parser.skip_ws();
    if !parser.at_end() {
        return Err(parser.syntax(format!("unexpected `{}`", parser.peek_char())));
    }
    Ok(FieldExpr {
        ast,
        arity,
        source: source.to_string(),
    })
}

/// Evaluate `e` at `point`; `point.len()` must equal the arity.
pub fn eval_field(e: &FieldExpr, point: &[f64]) -> Result<f64> {
    e.eval_at(point)
}

/// Max of `|field|` over the uniform tensor grid on `domain` (corners included).
pub fn sup_norm_grid(field: &dyn Field, domain: &Domain, resolution: &[usize]) -> Result<f64> {
    let grid = UniformGrid::new(domain.clone(), resolution.to_vec())?;
    let mut point = alloc::vec![0.0; grid.dim()];
    let mut sup = 0.0f64;
    for idx in 0..grid.len() {
        grid.point_into(idx, &mut point);
        sup = sup.max(libm::fabs(field.eval(&point)?));
    }
    Ok(sup)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    arity: usize,
}

impl Parser<'_> {
    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek_char(&self) -> char {
        self.peek().map(char::from).unwrap_or('\0')
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn syntax(&self, message: String) -> Error {
        Error::Syntax {
            position: self.pos,
            message,
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat(b'+') {
                BinaryOp::Add
            } else if self.eat(b'-') {
                BinaryOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat(b'*') {
                BinaryOp::Mul
            } else if self.eat(b'/') {
                BinaryOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat(b'-') {
            Ok(Node::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let exponent = self.unary()?;
            Ok(Node::Binary(BinaryOp::Pow, Box::new(base), Box::new(exponent)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Node> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.syntax("unexpected end of input".into())),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.syntax("expected `)`".into()));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            Some(_) => Err(self.syntax(format!("unexpected `{}`", self.peek_char()))),
        }
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == b'.') {
            self.pos += 1;
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                self.pos = save;
            }
        }
        let text = core::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        text.parse::<f64>()
            .map(Node::Const)
            .map_err(|_| Error::Syntax {
                position: start,
                message: format!("malformed number `{text}`"),
            })
    }

    fn identifier(&mut self) -> Result<Node> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        let name = core::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        if name == "pi" {
            return Ok(Node::Const(core::f64::consts::PI));
        }
        if let Some(func) = Func::from_name(name) {
            if !self.eat(b'(') {
                return Err(self.syntax(format!("expected `(` after `{name}`")));
            }
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.syntax("expected `)`".into()));
            }
            return Ok(Node::Call(func, Box::new(arg)));
        }
        if let Some(digits) = name.strip_prefix('x') {
            if !digits.is_empty() && digits.bytes().all(|c| c.is_ascii_digit()) {
                let index: usize = digits.parse().map_err(|_| Error::UnknownIdentifier {
                    name: name.to_string(),
                    position: start,
                })?;
                if index == 0 || index > self.arity {
                    return Err(Error::VariableOutOfRange {
                        index,
                        arity: self.arity,
                        position: start,
                    });
                }
                return Ok(Node::Var(index - 1));
            }
        }
        Err(Error::UnknownIdentifier {
            name: name.to_string(),
            position: start,
        })
    }
}
