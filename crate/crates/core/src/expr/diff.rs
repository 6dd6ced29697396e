use super::{Func, Node};
use crate::geometry::C64;

fn b(n: Node) -> Box<Node> {
    Box::new(n)
}

fn k(re: f64) -> Node {
    Node::Const(C64::new(re, 0.0))
}

fn is_val(n: &Node, v: f64) -> bool {
    matches!(n, Node::Const(c) if *c == C64::new(v, 0.0))
}

pub(super) fn derivative(n: &Node) -> Node {
    match n {
        Node::Const(_) => k(0.0),
        Node::Z => k(1.0),
        Node::Add(x, y) => Node::Add(b(derivative(x)), b(derivative(y))),
        Node::Sub(x, y) => Node::Sub(b(derivative(x)), b(derivative(y))),
        Node::Neg(x) => Node::Neg(b(derivative(x))),
        Node::Mul(x, y) => {
            Node::Add(b(Node::Mul(b(derivative(x)), y.clone())), b(Node::Mul(x.clone(), b(derivative(y)))))
        }
        Node::Div(x, y) => Node::Div(
            b(Node::Sub(b(Node::Mul(b(derivative(x)), y.clone())), b(Node::Mul(x.clone(), b(derivative(y)))))),
            b(Node::Pow(y.clone(), b(k(2.0)))),
        ),
        Node::Pow(x, e) => {
            if let Some(c) = e.constant() {
                // c * x^(c-1) * x'
                Node::Mul(
                    b(Node::Mul(b(Node::Const(c)), b(Node::Pow(x.clone(), b(Node::Const(c - 1.0)))))),
                    b(derivative(x)),
                )
            } else {
                // x^e * (e' log x + e x'/x)
                Node::Mul(
                    b(n.clone()),
                    b(Node::Add(
                        b(Node::Mul(b(derivative(e)), b(Node::Func(Func::Log, x.clone())))),
                        b(Node::Div(b(Node::Mul(e.clone(), b(derivative(x)))), x.clone())),
                    )),
                )
            }
        }
        Node::Func(Func::Exp, x) => Node::Mul(b(n.clone()), b(derivative(x))),
        Node::Func(Func::Log, x) => Node::Div(b(derivative(x)), x.clone()),
        Node::Func(Func::Sqrt, x) => Node::Div(b(derivative(x)), b(Node::Mul(b(k(2.0)), b(n.clone())))),
    }
}

fn fold_func(f: Func, c: C64) -> Option<C64> {
    let v = match f {
        Func::Sqrt => c.sqrt(),
        Func::Exp => c.exp(),
        Func::Log => {
            if c == C64::new(0.0, 0.0) {
                return None;
            }
            c.ln()
        }
    };
    (v.re.is_finite() && v.im.is_finite()).then_some(v)
}

/// Constant folding plus the identities `x+0`, `x*1`, `x*0`, `x^1`, `x^0`, `--x`.
pub(super) fn simplify(n: Node) -> Node {
    match n {
        Node::Const(_) | Node::Z => n,
        Node::Neg(x) => match simplify(*x) {
            Node::Const(c) => Node::Const(-c),
            Node::Neg(y) => *y,
            y => Node::Neg(b(y)),
        },
        Node::Add(x, y) => {
            let (x, y) = (simplify(*x), simplify(*y));
            match (&x, &y) {
                (Node::Const(a), Node::Const(c)) => Node::Const(a + c),
                _ if is_val(&x, 0.0) => y,
                _ if is_val(&y, 0.0) => x,
                _ => Node::Add(b(x), b(y)),
            }
        }
        Node::Sub(x, y) => {
            let (x, y) = (simplify(*x), simplify(*y));
            match (&x, &y) {
                (Node::Const(a), Node::Const(c)) => Node::Const(a - c),
                _ if is_val(&y, 0.0) => x,
                _ if is_val(&x, 0.0) => simplify(Node::Neg(b(y))),
                _ => Node::Sub(b(x), b(y)),
            }
        }
        Node::Mul(x, y) => {
            let (x, y) = (simplify(*x), simplify(*y));
            match (&x, &y) {
                (Node::Const(a), Node::Const(c)) => Node::Const(a * c),
                _ if is_val(&x, 0.0) || is_val(&y, 0.0) => k(0.0),
                _ if is_val(&x, 1.0) => y,
                _ if is_val(&y, 1.0) => x,
                _ => Node::Mul(b(x), b(y)),
            }
        }
        Node::Div(x, y) => {
            let (x, y) = (simplify(*x), simplify(*y));
            match (&x, &y) {
                (Node::Const(a), Node::Const(c)) if *c != C64::new(0.0, 0.0) => Node::Const(a / c),
                _ if is_val(&y, 1.0) => x,
                _ if is_val(&x, 0.0) && !is_val(&y, 0.0) => k(0.0),
                _ => Node::Div(b(x), b(y)),
            }
        }
        Node::Pow(x, e) => {
            let (x, e) = (simplify(*x), simplify(*e));
            match (&x, &e) {
                _ if is_val(&e, 0.0) => k(1.0),
                _ if is_val(&e, 1.0) => x,
                (Node::Const(a), Node::Const(c)) if *a != C64::new(0.0, 0.0) => {
                    let v = crate::expr::eval::pow(*a, *c);
                    if v.re.is_finite() && v.im.is_finite() {
                        Node::Const(v)
                    } else {
                        Node::Pow(b(x), b(e))
                    }
                }
                _ => Node::Pow(b(x), b(e)),
            }
        }
        Node::Func(f, x) => {
            let x = simplify(*x);
            if let Node::Const(c) = x {
                if let Some(v) = fold_func(f, c) {
                    return Node::Const(v);
                }
            }
            Node::Func(f, b(x))
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::FunctionExpr;
    use crate::geometry::C64;

    #[test]
    fn derivative_of_square() {
        let d = FunctionExpr::parse("z^2").unwrap().derivative();
        for z in [C64::new(0.3, -0.2), C64::new(-0.7, 0.1)] {
            assert!((d.eval_z(z).unwrap() - 2.0 * z).norm() < 1e-15);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let f =
            FunctionExpr::parse("-(1-z)^2*(2+sqrt((1+z)/(1-z)))/(1+sqrt((1+z)/(1-z)))*(1+z)/(1-z)+exp(z)*log(2-z)+z^z")
                .unwrap();
        let d = f.derivative();
        for z in [C64::new(0.3, -0.2), C64::new(-0.5, 0.6), C64::new(0.9, 0.05)] {
            let h = 1e-6 * (1.0 - z.norm());
            let fd = (f.eval_z(z + h).unwrap() - f.eval_z(z - h).unwrap()) / (2.0 * h);
            let ex = d.eval_z(z).unwrap();
            assert!((fd - ex).norm() < 1e-6 * ex.norm().max(1.0), "{z}: {fd} vs {ex}");
        }
    }
}
