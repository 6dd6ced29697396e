//! Holomorphic expressions in one variable `z`.
//!
//! Grammar:
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := atom ('^' atom)?
//! atom   := number | 'i' | 'z' | 'pi' | func '(' expr ')' | '(' expr ')' | '-' factor
//! func   := 'sqrt' | 'exp' | 'log'
//! ```
//! `^` binds tighter than unary minus, so `-z^2` is `-(z^2)`. All branches are principal.

mod diff;
pub(crate) mod eval;
mod parse;

use crate::error::Result;
use crate::geometry::{Point, C64};
use std::fmt;

pub use eval::Compiled;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sqrt,
    Exp,
    Log,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Const(C64),
    Z,
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Neg(Box<Node>),
    Func(Func, Box<Node>),
}

impl Node {
    pub fn constant(&self) -> Option<C64> {
        match self {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Node::Const(_))
    }
}

/// A parsed expression with its compiled evaluator.
#[derive(Clone, Debug)]
pub struct FunctionExpr {
    node: Node,
    compiled: Compiled,
}

impl PartialEq for FunctionExpr {
    fn eq(&self, other: &Self) -> bool {
        self.node == other.node
    }
}

impl FunctionExpr {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(Self::from_node(parse::parse(text)?))
    }

    pub fn from_node(node: Node) -> Self {
        let node = diff::simplify(node);
        let compiled = Compiled::new(&node);
        FunctionExpr { node, compiled }
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn constant(c: C64) -> Self {
        Self::from_node(Node::Const(c))
    }

    pub fn z() -> Self {
        Self::from_node(Node::Z)
    }

    /// Evaluate at a point carrying its own gap `1 - z`.
    pub fn eval(&self, p: &Point) -> Result<C64> {
        self.compiled.eval(p)
    }

    pub fn eval_z(&self, z: C64) -> Result<C64> {
        self.eval(&Point::new(z))
    }

    pub fn derivative(&self) -> Self {
        Self::from_node(diff::derivative(&self.node))
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::from_node(Node::Add(Box::new(self.node.clone()), Box::new(o.node.clone())))
    }
    pub fn sub(&self, o: &Self) -> Self {
        Self::from_node(Node::Sub(Box::new(self.node.clone()), Box::new(o.node.clone())))
    }
    pub fn mul(&self, o: &Self) -> Self {
        Self::from_node(Node::Mul(Box::new(self.node.clone()), Box::new(o.node.clone())))
    }
    pub fn div(&self, o: &Self) -> Self {
        Self::from_node(Node::Div(Box::new(self.node.clone()), Box::new(o.node.clone())))
    }
    pub fn neg(&self) -> Self {
        Self::from_node(Node::Neg(Box::new(self.node.clone())))
    }
    pub fn powc(&self, e: C64) -> Self {
        Self::from_node(Node::Pow(Box::new(self.node.clone()), Box::new(Node::Const(e))))
    }

    /// `1 - z`.
    pub fn one_minus_z() -> Self {
        Self::from_node(Node::Sub(Box::new(Node::Const(C64::new(1.0, 0.0))), Box::new(Node::Z)))
    }
}

impl fmt::Display for FunctionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.node)
    }
}

fn fmt_real(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:?}")
    }
}

/// Canonical text of a complex constant, parseable by [`FunctionExpr::parse`].
pub fn format_const(c: C64) -> String {
    if c.im == 0.0 {
        if c.re < 0.0 || (c.re == 0.0 && c.re.is_sign_negative()) {
            format!("(-{})", fmt_real(-c.re))
        } else {
            fmt_real(c.re)
        }
    } else if c.re == 0.0 {
        if c.im == 1.0 {
            "i".to_string()
        } else if c.im < 0.0 {
            format!("(-{}*i)", fmt_real(-c.im))
        } else {
            format!("({}*i)", fmt_real(c.im))
        }
    } else {
        let re = if c.re < 0.0 { format!("-{}", fmt_real(-c.re)) } else { fmt_real(c.re) };
        if c.im < 0.0 {
            format!("({re}-{}*i)", fmt_real(-c.im))
        } else {
            format!("({re}+{}*i)", fmt_real(c.im))
        }
    }
}

fn prec(n: &Node) -> u8 {
    match n {
        Node::Add(..) | Node::Sub(..) => 1,
        Node::Mul(..) | Node::Div(..) => 2,
        Node::Neg(..) => 3,
        Node::Pow(..) => 4,
        Node::Const(..) | Node::Z | Node::Func(..) => 5,
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |n: &Node, min: u8| -> String {
            if prec(n) < min {
                format!("({n})")
            } else {
                format!("{n}")
            }
        };
        match self {
            Node::Const(c) => write!(f, "{}", format_const(*c)),
            Node::Z => write!(f, "z"),
            Node::Add(a, b) => write!(f, "{}+{}", wrap(a, 1), wrap(b, 2)),
            Node::Sub(a, b) => write!(f, "{}-{}", wrap(a, 1), wrap(b, 2)),
            Node::Mul(a, b) => write!(f, "{}*{}", wrap(a, 2), wrap(b, 3)),
            Node::Div(a, b) => write!(f, "{}/{}", wrap(a, 2), wrap(b, 3)),
            Node::Neg(a) => write!(f, "-{}", wrap(a, 3)),
            // both operands of '^' are atoms
            Node::Pow(a, b) => write!(f, "{}^{}", wrap(a, 5), wrap(b, 5)),
            Node::Func(g, a) => write!(f, "{}({})", g.name(), a),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn parse_examples() {
        let f2 = FunctionExpr::parse("-(1-z)^2*(1-z^2)/(1+z^2)").unwrap();
        assert!((f2.eval_z(c(0.0, 0.0)).unwrap() - c(-1.0, 0.0)).norm() < 1e-15);
        assert_eq!(FunctionExpr::parse("z").unwrap().node(), &Node::Z);
        match FunctionExpr::parse("(1+z)/(1-z") {
            Err(crate::error::Error::Syntax { offset, .. }) => assert_eq!(offset, 9),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(FunctionExpr::parse("sin(z)"), Err(crate::error::Error::UnknownIdentifier { .. })));
    }

    #[test]
    fn eval_examples() {
        let e = FunctionExpr::parse("exp(z)").unwrap();
        assert!((e.eval_z(c(0.0, 0.0)).unwrap() - 1.0).norm() < 1e-15);
        let s = FunctionExpr::parse("sqrt((1+z)/(1-z))").unwrap();
        assert!((s.eval_z(c(0.0, 0.0)).unwrap() - 1.0).norm() < 1e-15);
        let p = FunctionExpr::parse("1/(1-z)").unwrap();
        assert!(matches!(p.eval_z(c(1.0, 0.0)), Err(crate::error::Error::SingularEvaluation { .. })));
    }

    #[test]
    fn unary_minus_is_weaker_than_power() {
        let e = FunctionExpr::parse("-z^2").unwrap();
        assert!((e.eval_z(c(2.0, 0.0)).unwrap() - c(-4.0, 0.0)).norm() < 1e-15);
        let e = FunctionExpr::parse("z^-2").unwrap();
        assert!((e.eval_z(c(2.0, 0.0)).unwrap() - c(0.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn printer_round_trips() {
        for s in [
            "-(1-z)^2*(1-z^2)/(1+z^2)",
            "-(1-z)^2*sqrt((1+z)/(1-z))*exp(-i*pi/4)",
            "2-(3-z)-z/(2/z)",
            "(1-z)^(1.5)*log(1+0.25*z)",
            "-(-z)^2",
            "(1e-3+2.5*i)*z",
        ] {
            let e = FunctionExpr::parse(s).unwrap();
            let printed = e.to_string();
            let again = FunctionExpr::parse(&printed).unwrap();
            assert_eq!(e, again, "{s} -> {printed}");
            assert_eq!(printed, again.to_string());
        }
    }

    #[test]
    fn gap_evaluation_avoids_cancellation() {
        let f = FunctionExpr::parse("(z^2-1)/(1-z)").unwrap();
        let p = Point::from_gap(c(1e-40, 1e-41));
        let v = f.eval(&p).unwrap();
        assert!((v - c(-2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn tiny_denominators_do_not_underflow() {
        let f = FunctionExpr::parse("-(1-z)^2*(2+sqrt((1+z)/(1-z)))/(1+sqrt((1+z)/(1-z)))*(1+z)/(1-z)").unwrap();
        for e in [-60, -108, -150] {
            let q = 10f64.powi(e);
            let v = f.eval(&Point::from_gap(c(q, 0.0))).unwrap();
            assert!((v / q - c(-2.0, 0.0)).norm() < 1e-12, "q = {q}: {v}");
        }
        let g = FunctionExpr::parse("1/(1-z)").unwrap();
        let v = g.eval(&Point::from_gap(c(3e-160, 4e-160))).unwrap();
        assert!((v * c(3e-160, 4e-160) - 1.0).norm() < 1e-15);
    }
}
