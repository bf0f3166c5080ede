//! Closed-form expressions for boundary data, initial data and manufactured fields.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?          right-associative
//! primary := number | 'pi' | variable | func '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Functions: `sin cos exp cosh sinh tanh sqrt abs` (one argument), `pow(a, b)`, and
//! `piecewise(threshold, left, right)`, which yields `left` while the first declared
//! variable is `<= threshold` and `right` otherwise. An optional fourth argument
//! replaces the switching variable with an arbitrary expression.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
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
    Cosh,
    Sinh,
    Tanh,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "cosh" => Func::Cosh,
            "sinh" => Func::Sinh,
            "tanh" => Func::Tanh,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Cosh => "cosh",
            Func::Sinh => "sinh",
            Func::Tanh => "tanh",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var(usize),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
    Piecewise {
        switch: Box<Node>,
        threshold: Box<Node>,
        left: Box<Node>,
        right: Box<Node>,
    },
}

/// A parsed expression over a fixed list of named variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    vars: Vec<String>,
}

/// Finite-difference stencil used by [`Expr::numeric_derivative`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffScheme {
    /// Second-order centred.
    Central,
    /// Fourth-order centred (five points).
    Central4,
    /// Second-order one-sided, samples at and to the right of the point.
    Forward,
    /// Second-order one-sided, samples at and to the left of the point.
    Backward,
}

impl Expr {
    pub fn parse(text: &str, vars: &[&str]) -> Result<Expr> {
        if text.trim().is_empty() {
            return Err(Error::Syntax {
                pos: 0,
                msg: "empty expression".into(),
            });
        }
        let tokens = lex(text)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            vars,
        };
        let root = p.expr()?;
        if let Some(tok) = p.peek() {
            return Err(Error::Syntax {
                pos: tok.pos,
                msg: format!("unexpected {}", tok.kind),
            });
        }
        Ok(Expr {
            root,
            vars: vars.iter().map(|s| s.to_string()).collect(),
        })
    }

    pub fn constant(value: f64, vars: &[&str]) -> Expr {
        Expr {
            root: Node::Const(value),
            vars: vars.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// Whether the value can change with variable `var` (structural, not numeric).
    pub fn depends_on(&self, var: usize) -> bool {
        fn walk(n: &Node, var: usize) -> bool {
            match n {
                Node::Const(_) => false,
                Node::Var(i) => *i == var,
                Node::Neg(a) | Node::Call(_, a) => walk(a, var),
                Node::Binary(_, a, b) => walk(a, var) || walk(b, var),
                Node::Piecewise { switch, threshold, left, right } => {
                    walk(switch, var) || walk(threshold, var) || walk(left, var) || walk(right, var)
                }
            }
        }
        walk(&self.root, var)
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn eval(&self, args: &[f64]) -> Result<f64> {
        if args.len() != self.vars.len() {
            return Err(Error::InvalidInput(format!(
                "expression takes {} arguments, got {}",
                self.vars.len(),
                args.len()
            )));
        }
        let v = eval_node(&self.root, args)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain(format!("non-finite result at {args:?}")))
        }
    }

    /// Evaluates a single-variable expression.
    pub fn eval1(&self, x: f64) -> Result<f64> {
        self.eval(&[x])
    }

    /// Finite-difference derivative of order 1 or 2 in the single variable.
    pub fn numeric_derivative(&self, at: f64, order: u8, h: f64, scheme: DiffScheme) -> Result<f64> {
        let mut args = [at];
        if self.vars.len() != 1 {
            return Err(Error::InvalidInput(
                "numeric_derivative needs a single-variable expression".into(),
            ));
        }
        self.partial(&mut args, 0, order, h, scheme)
    }

    /// Finite-difference partial derivative in variable `var`; `args` is restored on return.
    pub fn partial(&self, args: &mut [f64], var: usize, order: u8, h: f64, scheme: DiffScheme) -> Result<f64> {
        if !(h > 0.0) {
            return Err(Error::InvalidInput(format!("step must be > 0, got {h}")));
        }
        if var >= args.len() {
            return Err(Error::InvalidInput(format!("no variable with index {var}")));
        }
        let x0 = args[var];
        let (offsets, weights): (&[f64], &[f64]) = match (order, scheme) {
            (1, DiffScheme::Central) => (&[-1.0, 1.0], &[-0.5, 0.5]),
            (2, DiffScheme::Central) => (&[-1.0, 0.0, 1.0], &[1.0, -2.0, 1.0]),
            (1, DiffScheme::Central4) => (&[-2.0, -1.0, 1.0, 2.0], &[1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0]),
            (2, DiffScheme::Central4) => (
                &[-2.0, -1.0, 0.0, 1.0, 2.0],
                &[-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0],
            ),
            (1, DiffScheme::Forward) => (&[0.0, 1.0, 2.0], &[-1.5, 2.0, -0.5]),
            (2, DiffScheme::Forward) => (&[0.0, 1.0, 2.0, 3.0], &[2.0, -5.0, 4.0, -1.0]),
            (1, DiffScheme::Backward) => (&[-2.0, -1.0, 0.0], &[0.5, -2.0, 1.5]),
            (2, DiffScheme::Backward) => (&[-3.0, -2.0, -1.0, 0.0], &[-1.0, 4.0, -5.0, 2.0]),
            _ => {
                return Err(Error::InvalidInput(format!(
                    "derivative order must be 1 or 2, got {order}"
                )))
            }
        };
        let mut acc = 0.0;
        for (o, w) in offsets.iter().zip(weights) {
            args[var] = x0 + o * h;
            let value = self.eval(args);
            args[var] = x0;
            acc += w * value?;
        }
        Ok(acc / h.powi(order as i32))
    }

    /// Substitutes every variable of `self` with the matching expression of `args`.
    /// All of `args` must share the variable list `vars`, which becomes the result's.
    pub fn compose(&self, vars: &[&str], args: &[Expr]) -> Result<Expr> {
        if args.len() != self.vars.len() {
            return Err(Error::InvalidInput(format!(
                "compose needs {} replacement expressions, got {}",
                self.vars.len(),
                args.len()
            )));
        }
        if args.iter().any(|a| a.vars.iter().map(String::as_str).ne(vars.iter().copied())) {
            return Err(Error::InvalidInput(
                "replacement expressions must use the target variable list".into(),
            ));
        }
        Ok(Expr {
            root: substitute(&self.root, args),
            vars: vars.iter().map(|s| s.to_string()).collect(),
        })
    }
}

fn substitute(node: &Node, args: &[Expr]) -> Node {
    match node {
        Node::Const(c) => Node::Const(*c),
        Node::Var(i) => args[*i].root.clone(),
        Node::Neg(a) => Node::Neg(Box::new(substitute(a, args))),
        Node::Binary(op, a, b) => {
            Node::Binary(*op, Box::new(substitute(a, args)), Box::new(substitute(b, args)))
        }
        Node::Call(f, a) => Node::Call(*f, Box::new(substitute(a, args))),
        Node::Piecewise { switch, threshold, left, right } => Node::Piecewise {
            switch: Box::new(substitute(switch, args)),
            threshold: Box::new(substitute(threshold, args)),
            left: Box::new(substitute(left, args)),
            right: Box::new(substitute(right, args)),
        },
    }
}

fn eval_node(node: &Node, args: &[f64]) -> Result<f64> {
    Ok(match node {
        Node::Const(c) => *c,
        Node::Var(i) => args[*i],
        Node::Neg(a) => -eval_node(a, args)?,
        Node::Binary(op, a, b) => {
            let x = eval_node(a, args)?;
            let y = eval_node(b, args)?;
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => {
                    if y == 0.0 {
                        return Err(Error::Domain(format!("division by zero at {args:?}")));
                    }
                    x / y
                }
                BinOp::Pow => {
                    let r = x.powf(y);
                    if r.is_nan() {
                        return Err(Error::Domain(format!("{x}^{y} is undefined")));
                    }
                    r
                }
            }
        }
        Node::Call(f, a) => {
            let x = eval_node(a, args)?;
            match f {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Exp => x.exp(),
                Func::Cosh => x.cosh(),
                Func::Sinh => x.sinh(),
                Func::Tanh => x.tanh(),
                Func::Abs => x.abs(),
                Func::Sqrt => {
                    if x < 0.0 {
                        return Err(Error::Domain(format!("sqrt of negative value {x}")));
                    }
                    x.sqrt()
                }
            }
        }
        Node::Piecewise { switch, threshold, left, right } => {
            let th = eval_node(threshold, args)?;
            if eval_node(switch, args)? <= th {
                eval_node(left, args)?
            } else {
                eval_node(right, args)?
            }
        }
    })
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(&self.root, &self.vars, f)
    }
}

fn write_node(node: &Node, vars: &[String], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match node {
        Node::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => {
            write!(f, "(-{:?})", -c)
        }
        Node::Const(c) => write!(f, "{c:?}"),
        Node::Var(i) => write!(f, "{}", vars[*i]),
        Node::Neg(a) => {
            write!(f, "(-")?;
            write_node(a, vars, f)?;
            write!(f, ")")
        }
        Node::Binary(op, a, b) => {
            if *op == BinOp::Pow {
                write!(f, "pow(")?;
                write_node(a, vars, f)?;
                write!(f, ", ")?;
                write_node(b, vars, f)?;
                return write!(f, ")");
            }
            let sym = match op {
                BinOp::Add => "+",
                BinOp::Sub => "-",
                BinOp::Mul => "*",
                BinOp::Div => "/",
                BinOp::Pow => unreachable!(),
            };
            write!(f, "(")?;
            write_node(a, vars, f)?;
            write!(f, " {sym} ")?;
            write_node(b, vars, f)?;
            write!(f, ")")
        }
        Node::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_node(a, vars, f)?;
            write!(f, ")")
        }
        Node::Piecewise { switch, threshold, left, right } => {
            write!(f, "piecewise(")?;
            write_node(threshold, vars, f)?;
            write!(f, ", ")?;
            write_node(left, vars, f)?;
            write!(f, ", ")?;
            write_node(right, vars, f)?;
            if **switch != Node::Var(0) {
                write!(f, ", ")?;
                write_node(switch, vars, f)?;
            }
            write!(f, ")")
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Number(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Number(x) => write!(f, "number {x}"),
            TokenKind::Ident(s) => write!(f, "identifier `{s}`"),
            TokenKind::Op(c) => write!(f, "operator `{c}`"),
            TokenKind::LParen => write!(f, "`(`"),
            TokenKind::RParen => write!(f, "`)`"),
            TokenKind::Comma => write!(f, "`,`"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    pos: usize,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
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
            let lit = &text[start..i];
            let value: f64 = lit.parse().map_err(|_| Error::Syntax {
                pos: start,
                msg: format!("malformed number `{lit}`"),
            })?;
            out.push(Token {
                kind: TokenKind::Number(value),
                pos: start,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                kind: TokenKind::Ident(text[start..i].to_string()),
                pos: start,
            });
            continue;
        }
        let kind = match c {
            '+' | '-' | '*' | '/' | '^' => TokenKind::Op(c),
            '(' => TokenKind::LParen,
            ')' => TokenKind::RParen,
            ',' => TokenKind::Comma,
            _ => {
                return Err(Error::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{c}`"),
                })
            }
        };
        out.push(Token { kind, pos: start });
        i += c.len_utf8();
    }
    Ok(out)
}

struct ArgCount(std::ops::RangeInclusive<usize>);

impl From<usize> for ArgCount {
    fn from(n: usize) -> Self {
        ArgCount(n..=n)
    }
}

impl From<std::ops::RangeInclusive<usize>> for ArgCount {
    fn from(r: std::ops::RangeInclusive<usize>) -> Self {
        ArgCount(r)
    }
}

impl fmt::Display for ArgCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.start() == self.0.end() {
            write!(f, "{}", self.0.start())
        } else {
            write!(f, "{} to {}", self.0.start(), self.0.end())
        }
    }
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn end_pos(&self) -> usize {
        self.tokens.last().map(|t| t.pos + 1).unwrap_or(0)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn eat_op(&mut self, ops: &[char]) -> Option<char> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Op(c),
                ..
            }) if ops.contains(c) => {
                let c = *c;
                self.pos += 1;
                Some(c)
            }
            _ => None,
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<()> {
        match self.next() {
            Some(t) if t.kind == kind => Ok(()),
            Some(t) => Err(Error::Syntax {
                pos: t.pos,
                msg: format!("expected {kind}, found {}", t.kind),
            }),
            None => Err(Error::Syntax {
                pos: self.end_pos(),
                msg: format!("expected {kind}, found end of input"),
            }),
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(op) = self.eat_op(&['+', '-']) {
            let rhs = self.term()?;
            let op = if op == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.eat_op(&['*', '/']) {
            let rhs = self.unary()?;
            let op = if op == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat_op(&['-']).is_some() {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.primary()?;
        if self.eat_op(&['^']).is_some() {
            let exponent = self.unary()?;
            return Ok(Node::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn args(&mut self, name: &str, pos: usize, count: impl Into<ArgCount>) -> Result<Vec<Node>> {
        let count = count.into();
        self.expect(TokenKind::LParen)?;
        let mut args = vec![self.expr()?];
        while matches!(self.peek(), Some(Token { kind: TokenKind::Comma, .. })) {
            self.pos += 1;
            args.push(self.expr()?);
        }
        self.expect(TokenKind::RParen)?;
        if !count.0.contains(&args.len()) {
            return Err(Error::Syntax {
                pos,
                msg: format!("`{name}` takes {} argument(s), got {}", count, args.len()),
            });
        }
        Ok(args)
    }

    fn primary(&mut self) -> Result<Node> {
        let Some(tok) = self.next() else {
            return Err(Error::Syntax {
                pos: self.end_pos(),
                msg: "unexpected end of input".into(),
            });
        };
        match tok.kind {
            TokenKind::Number(x) => Ok(Node::Const(x)),
            TokenKind::LParen => {
                let inner = self.expr()?;
                self.expect(TokenKind::RParen)?;
                Ok(inner)
            }
            TokenKind::Ident(name) => {
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Node::Var(i));
                }
                if name == "pi" {
                    return Ok(Node::Const(std::f64::consts::PI));
                }
                if let Some(func) = Func::from_name(&name) {
                    let mut a = self.args(&name, tok.pos, 1)?;
                    return Ok(Node::Call(func, Box::new(a.remove(0))));
                }
                match name.as_str() {
                    "pow" => {
                        let mut a = self.args(&name, tok.pos, 2)?;
                        let exponent = a.remove(1);
                        let base = a.remove(0);
                        Ok(Node::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)))
                    }
                    "piecewise" => {
                        let mut a = self.args(&name, tok.pos, 3..=4)?.into_iter();
                        let (th, l, r) = (a.next().unwrap(), a.next().unwrap(), a.next().unwrap());
                        let switch = match a.next() {
                            Some(sw) => sw,
                            None if self.vars.is_empty() => {
                                return Err(Error::Syntax {
                                    pos: tok.pos,
                                    msg: "`piecewise` needs a variable to switch on".into(),
                                })
                            }
                            None => Node::Var(0),
                        };
                        Ok(Node::Piecewise {
                            switch: Box::new(switch),
                            threshold: Box::new(th),
                            left: Box::new(l),
                            right: Box::new(r),
                        })
                    }
                    _ => Err(Error::UnknownIdentifier { name, pos: tok.pos }),
                }
            }
            other => Err(Error::Syntax {
                pos: tok.pos,
                msg: format!("unexpected {other}"),
            }),
        }
    }
}
