use super::{Func, Node};
use crate::error::{Error, Result};
use crate::geometry::C64;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

struct Lexer;

impl Lexer {
    fn run(text: &str) -> Result<Vec<(Tok, usize)>> {
        let b = text.as_bytes();
        let mut out = Vec::new();
        let mut i = 0;
        while i < b.len() {
            let ch = b[i] as char;
            if ch.is_ascii_whitespace() {
                i += 1;
                continue;
            }
            let start = i;
            if ch.is_ascii_digit() || ch == '.' {
                while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
                    i += 1;
                }
                if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                    let mut j = i + 1;
                    if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                        j += 1;
                    }
                    if j < b.len() && b[j].is_ascii_digit() {
                        while j < b.len() && b[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let s = &text[start..i];
                let v: f64 = s
                    .parse()
                    .map_err(|_| Error::Syntax { offset: start, message: format!("malformed number `{s}`") })?;
                out.push((Tok::Num(v), start));
                continue;
            }
            if ch.is_ascii_alphabetic() {
                while i < b.len() && (b[i] as char).is_ascii_alphanumeric() {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            let tok = match ch {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(ch),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => return Err(Error::Syntax { offset: start, message: format!("unexpected character `{ch}`") }),
            };
            out.push((tok, start));
            i += 1;
        }
        Ok(out)
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    len: usize,
}

pub(super) fn parse(text: &str) -> Result<Node> {
    let toks = Lexer::run(text)?;
    let mut p = Parser { toks, pos: 0, len: text.len() };
    if p.toks.is_empty() {
        return Err(Error::Syntax { offset: 0, message: "empty expression".into() });
    }
    let n = p.expr()?;
    if let Some((t, off)) = p.toks.get(p.pos) {
        return Err(Error::Syntax { offset: *off, message: format!("unexpected token {t:?}") });
    }
    Ok(n)
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn offset(&self) -> usize {
        // truncated input reports its last character
        self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.len.saturating_sub(1))
    }

    fn fail<T>(&self, message: &str) -> Result<T> {
        Err(Error::Syntax { offset: self.offset(), message: message.to_string() })
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' {
                Node::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.factor()?;
        while let Some(Tok::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = if op == '*' {
                Node::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Node> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.pos += 1;
            let inner = self.factor()?;
            return Ok(Node::Neg(Box::new(inner)));
        }
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let exp = if let Some(Tok::Op('-')) = self.peek() {
                self.pos += 1;
                Node::Neg(Box::new(self.atom()?))
            } else {
                self.atom()?
            };
            if let Some(Tok::Op('^')) = self.peek() {
                return self.fail("chained '^' needs parentheses");
            }
            return Ok(Node::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let off = self.offset();
        let Some(tok) = self.peek().cloned() else {
            return self.fail("unexpected end of input");
        };
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Node::Const(C64::new(v, 0.0))),
            Tok::LParen => {
                let e = self.expr()?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        Ok(e)
                    }
                    _ => self.fail("expected ')'"),
                }
            }
            Tok::Ident(name) => match name.as_str() {
                "z" => Ok(Node::Z),
                "i" => Ok(Node::Const(C64::new(0.0, 1.0))),
                "pi" => Ok(Node::Const(C64::new(std::f64::consts::PI, 0.0))),
                "sqrt" | "exp" | "log" => {
                    let f = match name.as_str() {
                        "sqrt" => Func::Sqrt,
                        "exp" => Func::Exp,
                        _ => Func::Log,
                    };
                    if self.peek() != Some(&Tok::LParen) {
                        return self.fail("expected '(' after function name");
                    }
                    self.pos += 1;
                    let arg = self.expr()?;
                    if self.peek() != Some(&Tok::RParen) {
                        return self.fail("expected ')'");
                    }
                    self.pos += 1;
                    Ok(Node::Func(f, Box::new(arg)))
                }
                _ => Err(Error::UnknownIdentifier { name, offset: off }),
            },
            Tok::Op(c) => {
                self.pos -= 1;
                self.fail(&format!("unexpected operator '{c}'"))
            }
            Tok::RParen => {
                self.pos -= 1;
                self.fail("unexpected ')'")
            }
        }
    }
}
