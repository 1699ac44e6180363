//! Tiny arithmetic-expression evaluator for model definitions in config files.
//!
//! Supports + - * / ^, unary minus, functions sin cos exp abs, the constant
//! pi, numeric literals, and a caller-supplied variable list. Exponentiation
//! is right-associative and binds tighter than unary minus, so -x^2 = -(x^2).

use crate::error::{Error, Result};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Neg(Box<Node>),
    Sin(Box<Node>),
    Cos(Box<Node>),
    Exp(Box<Node>),
    Abs(Box<Node>),
}

/// A parsed expression over a fixed set of named variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    src: String,
    arity: usize,
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.src)
    }
}

impl Expr {
    /// Parse `src` with the given variable names (e.g. `["x", "p"]`).
    pub fn parse(src: &str, vars: &[&str]) -> Result<Expr> {
        let mut p = Parser {
            chars: src.chars().collect(),
            pos: 0,
            vars,
        };
        p.skip_ws();
        let root = p.expr()?;
        p.skip_ws();
        if p.pos != p.chars.len() {
            return Err(Error::config(format!(
                "unexpected input at offset {} in expression {src:?}",
                p.pos
            )));
        }
        Ok(Expr {
            root,
            src: src.to_string(),
            arity: vars.len(),
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Evaluate with variable values in declaration order.
    pub fn eval(&self, args: &[f64]) -> f64 {
        debug_assert_eq!(args.len(), self.arity);
        eval_node(&self.root, args)
    }
}

fn eval_node(n: &Node, args: &[f64]) -> f64 {
    match n {
        Node::Num(v) => *v,
        Node::Var(i) => args[*i],
        Node::Add(a, b) => eval_node(a, args) + eval_node(b, args),
        Node::Sub(a, b) => eval_node(a, args) - eval_node(b, args),
        Node::Mul(a, b) => eval_node(a, args) * eval_node(b, args),
        Node::Div(a, b) => eval_node(a, args) / eval_node(b, args),
        Node::Pow(a, b) => eval_node(a, args).powf(eval_node(b, args)),
        Node::Neg(a) => -eval_node(a, args),
        Node::Sin(a) => eval_node(a, args).sin(),
        Node::Cos(a) => eval_node(a, args).cos(),
        Node::Exp(a) => eval_node(a, args).exp(),
        Node::Abs(a) => eval_node(a, args).abs(),
    }
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some('+') => {
                    self.bump();
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some('-') => {
                    self.bump();
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some('*') => {
                    self.bump();
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some('/') => {
                    self.bump();
                    lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        self.skip_ws();
        if self.peek() == Some('-') {
            self.bump();
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        self.skip_ws();
        if self.peek() == Some('^') {
            self.bump();
            // right associative; exponent may itself be signed
            let exp = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        self.skip_ws();
        match self.peek() {
            Some('(') => {
                self.bump();
                let inner = self.expr()?;
                self.skip_ws();
                if self.bump() != Some(')') {
                    return Err(Error::config("missing closing parenthesis"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => self.ident(),
            other => Err(Error::config(format!("unexpected token {other:?} in expression"))),
        }
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == '.') {
            self.bump();
        }
        // scientific notation
        if matches!(self.peek(), Some('e') | Some('E')) {
            let mark = self.pos;
            self.bump();
            if matches!(self.peek(), Some('+') | Some('-')) {
                self.bump();
            }
            if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.bump();
                }
            } else {
                self.pos = mark;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<f64>()
            .map(Node::Num)
            .map_err(|_| Error::config(format!("bad numeric literal {text:?}")))
    }

    fn ident(&mut self) -> Result<Node> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            self.bump();
        }
        let name: String = self.chars[start..self.pos].iter().collect();
        match name.as_str() {
            "pi" => return Ok(Node::Num(std::f64::consts::PI)),
            "sin" | "cos" | "exp" | "abs" => {
                self.skip_ws();
                if self.bump() != Some('(') {
                    return Err(Error::config(format!("function {name} needs parentheses")));
                }
                let arg = self.expr()?;
                self.skip_ws();
                if self.bump() != Some(')') {
                    return Err(Error::config(format!("unclosed call to {name}")));
                }
                let b = Box::new(arg);
                return Ok(match name.as_str() {
                    "sin" => Node::Sin(b),
                    "cos" => Node::Cos(b),
                    "exp" => Node::Exp(b),
                    _ => Node::Abs(b),
                });
            }
            _ => {}
        }
        if let Some(i) = self.vars.iter().position(|v| *v == name) {
            Ok(Node::Var(i))
        } else {
            Err(Error::config(format!(
                "unknown identifier {name:?} (variables: {:?})",
                self.vars
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, vars: &[&str], args: &[f64]) -> f64 {
        Expr::parse(src, vars).unwrap().eval(args)
    }

    #[test]
    fn arithmetic() {
        assert_eq!(ev("1+2*3", &[], &[]), 7.0);
        assert_eq!(ev("(1+2)*3", &[], &[]), 9.0);
        assert_eq!(ev("2^3^2", &[], &[]), 512.0); // right assoc
        assert_eq!(ev("-2^2", &[], &[]), -4.0);
        assert_eq!(ev("6/3/2", &[], &[]), 1.0);
        assert_eq!(ev("1e2 + 1.5e-1", &[], &[]), 100.15);
    }

    #[test]
    fn functions_and_pi() {
        assert!((ev("sin(pi/2)", &[], &[]) - 1.0).abs() < 1e-15);
        assert!((ev("cos(0)", &[], &[]) - 1.0).abs() < 1e-15);
        assert!((ev("exp(1)", &[], &[]) - std::f64::consts::E).abs() < 1e-15);
        assert_eq!(ev("abs(-3)", &[], &[]), 3.0);
    }

    #[test]
    fn variables() {
        assert_eq!(ev("x^2/2", &["x"], &[0.6]), 0.18);
        assert_eq!(ev("0.5 - 0.4*sin(2*pi*x)", &["x"], &[0.25]), 0.5 - 0.4);
        assert_eq!(ev("q1 - q2", &["q1", "q2"], &[3.0, 1.0]), 2.0);
    }

    #[test]
    fn parse_errors() {
        assert!(Expr::parse("x +", &["x"]).is_err());
        assert!(Expr::parse("y", &["x"]).is_err());
        assert!(Expr::parse("sin x", &["x"]).is_err());
        assert!(Expr::parse("(1", &[]).is_err());
        assert!(Expr::parse("1 2", &[]).is_err());
    }
}
