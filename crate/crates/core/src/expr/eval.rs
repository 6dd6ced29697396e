use super::{Func, Node};
use crate::error::{Error, Result};
use crate::geometry::{Point, C64};

const MAX_POLY_DEGREE: usize = 32;

/// Evaluation tree in which every polynomial subtree is stored twice: by its coefficients in
/// `z` and by its coefficients in `q = 1 - z`. The `q` form is used near 1, where expanding
/// `1 - z^2` as `2q - q^2` avoids cancellation.
#[derive(Clone, Debug)]
pub struct Compiled {
    root: CNode,
}

#[derive(Clone, Debug)]
enum CNode {
    Poly { zc: Vec<C64>, qc: Vec<C64> },
    Add(Box<CNode>, Box<CNode>),
    Sub(Box<CNode>, Box<CNode>),
    Mul(Box<CNode>, Box<CNode>),
    Div(Box<CNode>, Box<CNode>),
    Neg(Box<CNode>),
    PowConst(Box<CNode>, C64),
    Pow(Box<CNode>, Box<CNode>),
    Func(Func, Box<CNode>),
}

fn poly_add(a: &[C64], b: &[C64], sign: f64) -> Vec<C64> {
    let n = a.len().max(b.len());
    (0..n).map(|i| a.get(i).copied().unwrap_or_default() + sign * b.get(i).copied().unwrap_or_default()).collect()
}

fn poly_mul(a: &[C64], b: &[C64]) -> Option<Vec<C64>> {
    if a.len() + b.len() - 1 > MAX_POLY_DEGREE + 1 {
        return None;
    }
    let mut out = vec![C64::default(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    Some(out)
}

fn as_poly(n: &Node) -> Option<Vec<C64>> {
    match n {
        Node::Const(c) => Some(vec![*c]),
        Node::Z => Some(vec![C64::default(), C64::new(1.0, 0.0)]),
        Node::Add(x, y) => Some(poly_add(&as_poly(x)?, &as_poly(y)?, 1.0)),
        Node::Sub(x, y) => Some(poly_add(&as_poly(x)?, &as_poly(y)?, -1.0)),
        Node::Neg(x) => Some(as_poly(x)?.into_iter().map(|c| -c).collect()),
        Node::Mul(x, y) => poly_mul(&as_poly(x)?, &as_poly(y)?),
        Node::Div(x, y) => {
            let c = y.constant()?;
            if c == C64::default() {
                return None;
            }
            Some(as_poly(x)?.into_iter().map(|v| v / c).collect())
        }
        Node::Pow(x, e) => {
            let c = e.constant()?;
            if c.im != 0.0 || c.re < 0.0 || c.re != c.re.trunc() || c.re > 16.0 {
                return None;
            }
            let base = as_poly(x)?;
            let mut acc = vec![C64::new(1.0, 0.0)];
            for _ in 0..c.re as usize {
                acc = poly_mul(&acc, &base)?;
            }
            Some(acc)
        }
        Node::Func(..) => None,
    }
}

/// Coefficients of `p(1 - q)` in powers of `q`.
fn shift_to_gap(zc: &[C64]) -> Vec<C64> {
    let n = zc.len();
    let mut out = vec![C64::default(); n];
    for (kk, c) in zc.iter().enumerate() {
        let mut binom = 1.0f64;
        for j in 0..=kk {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            out[j] += c * (sign * binom);
            binom = binom * (kk - j) as f64 / (j + 1) as f64;
        }
    }
    out
}

fn horner(c: &[C64], x: C64) -> C64 {
    c.iter().rev().fold(C64::default(), |acc, v| acc * x + v)
}

/// `a / b` by Smith's algorithm. The textbook `a conj(b) / |b|^2` underflows once `|b|` drops
/// below about `1e-154`, which happens to `1 - z` along deep hyperbolic orbits.
pub(crate) fn cdiv(a: C64, b: C64) -> C64 {
    if b.re.abs() >= b.im.abs() {
        let r = b.im / b.re;
        let d = b.re + b.im * r;
        C64::new((a.re + a.im * r) / d, (a.im - a.re * r) / d)
    } else {
        let r = b.re / b.im;
        let d = b.re * r + b.im;
        C64::new((a.re * r + a.im) / d, (a.im * r - a.re) / d)
    }
}

/// Principal power with the cheaper and more accurate paths for integer and real exponents.
pub(crate) fn pow(base: C64, e: C64) -> C64 {
    if e.im == 0.0 {
        if e.re == e.re.trunc() && e.re.abs() <= 64.0 {
            let n = e.re as i32;
            if n >= 0 {
                return base.powi(n);
            }
            return cdiv(C64::new(1.0, 0.0), base.powi(-n));
        }
        if base == C64::default() {
            return if e.re > 0.0 { C64::default() } else { C64::new(f64::INFINITY, 0.0) };
        }
        return base.powf(e.re);
    }
    if base == C64::default() {
        return if e.re > 0.0 { C64::default() } else { C64::new(f64::NAN, f64::NAN) };
    }
    base.powc(e)
}

fn compile(n: &Node) -> CNode {
    if let Some(zc) = as_poly(n) {
        let qc = shift_to_gap(&zc);
        return CNode::Poly { zc, qc };
    }
    let bx = |x: &Node| Box::new(compile(x));
    match n {
        Node::Add(x, y) => CNode::Add(bx(x), bx(y)),
        Node::Sub(x, y) => CNode::Sub(bx(x), bx(y)),
        Node::Mul(x, y) => CNode::Mul(bx(x), bx(y)),
        Node::Div(x, y) => CNode::Div(bx(x), bx(y)),
        Node::Neg(x) => CNode::Neg(bx(x)),
        Node::Pow(x, e) => match e.constant() {
            Some(c) => CNode::PowConst(bx(x), c),
            None => CNode::Pow(bx(x), bx(e)),
        },
        Node::Func(f, x) => CNode::Func(*f, bx(x)),
        Node::Const(_) | Node::Z => unreachable!("handled as polynomials"),
    }
}

impl Compiled {
    pub fn new(n: &Node) -> Self {
        Compiled { root: compile(n) }
    }

    pub fn eval(&self, p: &Point) -> Result<C64> {
        let use_gap = p.q.norm() < 0.5;
        let v = eval_node(&self.root, p, use_gap).ok_or(Error::SingularEvaluation { z: p.z })?;
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::SingularEvaluation { z: p.z })
        }
    }
}

fn eval_node(n: &CNode, p: &Point, use_gap: bool) -> Option<C64> {
    Some(match n {
        CNode::Poly { zc, qc } => {
            if use_gap {
                horner(qc, p.q)
            } else {
                horner(zc, p.z)
            }
        }
        CNode::Add(x, y) => eval_node(x, p, use_gap)? + eval_node(y, p, use_gap)?,
        CNode::Sub(x, y) => eval_node(x, p, use_gap)? - eval_node(y, p, use_gap)?,
        CNode::Mul(x, y) => eval_node(x, p, use_gap)? * eval_node(y, p, use_gap)?,
        CNode::Div(x, y) => {
            let d = eval_node(y, p, use_gap)?;
            if d == C64::default() {
                return None;
            }
            cdiv(eval_node(x, p, use_gap)?, d)
        }
        CNode::Neg(x) => -eval_node(x, p, use_gap)?,
        CNode::PowConst(x, e) => {
            let base = eval_node(x, p, use_gap)?;
            if base == C64::default() && e.re <= 0.0 {
                return None;
            }
            pow(base, *e)
        }
        CNode::Pow(x, e) => {
            let base = eval_node(x, p, use_gap)?;
            let e = eval_node(e, p, use_gap)?;
            if base == C64::default() {
                return None;
            }
            pow(base, e)
        }
        CNode::Func(f, x) => {
            let a = eval_node(x, p, use_gap)?;
            match f {
                Func::Sqrt => a.sqrt(),
                Func::Exp => a.exp(),
                Func::Log => {
                    if a == C64::default() {
                        return None;
                    }
                    a.ln()
                }
            }
        }
    })
}
