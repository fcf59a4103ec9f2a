use ordered_float::OrderedFloat;

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::SyntaxError;
use crate::term::ActorKind;

pub const OPAQUE_LOCAL: &str = "other-local-computations";

pub fn parse_program(src: &str) -> Result<Vec<BehaviorDefinition>, SyntaxError> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let mut defs = Vec::new();
    while p.peek() != &Tok::Eof {
        defs.push(p.definition()?);
    }
    Ok(defs)
}

/// Parses a single expression; handy for guards given on the command line
/// and in tests.
pub fn parse_expr(src: &str) -> Result<Expr, SyntaxError> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let e = p.expr(0)?;
    p.expect(Tok::Eof, "end of input")?;
    Ok(e)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &str) -> Result<T, SyntaxError> {
        Err(SyntaxError::new(self.span(), expected).found(self.peek().describe()))
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<Span, SyntaxError> {
        if *self.peek() == tok {
            Ok(self.next().span)
        } else {
            self.fail(expected)
        }
    }

    fn ident(&mut self, expected: &str) -> Result<String, SyntaxError> {
        match self.peek() {
            Tok::Ident(s) => {
                let s = s.clone();
                self.next();
                Ok(s)
            }
            _ => self.fail(expected),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), SyntaxError> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.next();
                Ok(())
            }
            _ => self.fail(&format!("`{kw}`")),
        }
    }

    fn at_ident(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn definition(&mut self) -> Result<BehaviorDefinition, SyntaxError> {
        let span = self.span();
        let kw = self.ident("one of `AA`, `WSO`, `WS`, `WSC`")?;
        let Some(kind) = ActorKind::from_keyword(&kw) else {
            return Err(SyntaxError::new(span, "one of `AA`, `WSO`, `WS`, `WSC`").found(format!("`{kw}`")));
        };
        let name = self.ident("a behavior name")?;
        let mut roles = Vec::new();
        if self.at_ident("role") {
            loop {
                self.keyword("role")?;
                roles.push(self.ident("a role name")?);
                if *self.peek() != Tok::Comma {
                    break;
                }
                self.next();
            }
        }
        self.expect(Tok::LBrace, "`{`")?;
        let mut def = BehaviorDefinition { kind, name, roles, vars: vec![], init: None, methods: vec![], span };
        while *self.peek() != Tok::RBrace {
            self.member(&mut def)?;
        }
        self.next();
        Ok(def)
    }

    fn member(&mut self, def: &mut BehaviorDefinition) -> Result<(), SyntaxError> {
        let span = self.span();
        if self.at_ident("init") && *self.peek_at(1) == Tok::LParen {
            self.next();
            let params = self.params()?;
            let body = self.block()?;
            if def.init.is_some() {
                return Err(SyntaxError::new(span, "at most one `init`"));
            }
            def.init = Some(MethodDefinition { name: "init".into(), local: false, params, guard: Expr::truth(), body, span });
            return Ok(());
        }
        let local = self.at_ident("local") && matches!(self.peek_at(1), Tok::Ident(_));
        if local {
            self.next();
        }
        let first = self.ident("a declaration or method")?;
        match self.peek() {
            Tok::LParen => {
                let params = self.params()?;
                self.keyword("if")?;
                let guard = self.expr(0)?;
                let body = self.block()?;
                def.methods.push(MethodDefinition { name: first, local, params, guard, body, span });
                Ok(())
            }
            Tok::Ident(_) if !local => {
                let Some(ty) = TypeName::parse(&first) else {
                    return Err(SyntaxError::new(span, "a type name").found(format!("`{first}`")));
                };
                let name = self.ident("a variable name")?;
                if *self.peek() == Tok::Semi {
                    self.next();
                }
                def.vars.push(VarDecl { name, ty, span });
                Ok(())
            }
            _ => self.fail("`(` or a variable name"),
        }
    }

    fn params(&mut self) -> Result<Vec<Param>, SyntaxError> {
        self.expect(Tok::LParen, "`(`")?;
        let mut out = Vec::new();
        if *self.peek() == Tok::RParen {
            self.next();
            return Ok(out);
        }
        loop {
            let span = self.span();
            let first = self.ident("a parameter")?;
            if let Tok::Ident(_) = self.peek() {
                let Some(ty) = TypeName::parse(&first) else {
                    return Err(SyntaxError::new(span, "a type name").found(format!("`{first}`")));
                };
                let name = self.ident("a parameter name")?;
                out.push(Param { name, ty: Some(ty) });
            } else {
                out.push(Param { name: first, ty: None });
            }
            match self.peek() {
                Tok::Comma => {
                    self.next();
                }
                Tok::RParen => {
                    self.next();
                    return Ok(out);
                }
                _ => return self.fail("`,` or `)`"),
            }
        }
    }

    fn block(&mut self) -> Result<Vec<Action>, SyntaxError> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut out = Vec::new();
        loop {
            match self.peek() {
                Tok::RBrace => {
                    self.next();
                    return Ok(out);
                }
                Tok::Semi => {
                    self.next();
                }
                _ => out.push(self.action()?),
            }
        }
    }

    fn action(&mut self) -> Result<Action, SyntaxError> {
        let span = self.span();
        let head = self.ident("an action")?;
        match self.peek() {
            Tok::Assign | Tok::Op("=") => {
                self.next();
                if self.at_ident("new") && matches!(self.peek_at(1), Tok::Ident(_)) {
                    self.next();
                    let behavior = self.ident("a behavior name")?;
                    let args = self.args()?;
                    let role = if self.at_ident("as") {
                        self.next();
                        Some(self.ident("a role name")?)
                    } else {
                        None
                    };
                    return Ok(Action::Create { var: head, behavior, args, role, span });
                }
                let expr = self.expr(0)?;
                Ok(Action::Assign { var: head, expr, span })
            }
            Tok::Arrow => {
                self.next();
                let method = self.ident("a method name")?;
                let mut args = self.args()?;
                if method == "setPartner" && args.len() == 1 {
                    return Ok(Action::SetPartnerCall { target: head, arg: args.remove(0), span });
                }
                Ok(Action::Send { target: head, method, args, span })
            }
            _ if head == OPAQUE_LOCAL => Ok(Action::OpaqueLocal { span }),
            _ => self.fail("`:=` or `<-`"),
        }
    }

    fn args(&mut self) -> Result<Vec<Expr>, SyntaxError> {
        self.expect(Tok::LParen, "`(`")?;
        self.expr_list(Tok::RParen, "`,` or `)`")
    }

    fn expr_list(&mut self, close: Tok, expected: &str) -> Result<Vec<Expr>, SyntaxError> {
        let mut out = Vec::new();
        if *self.peek() == close {
            self.next();
            return Ok(out);
        }
        loop {
            out.push(self.expr(0)?);
            if *self.peek() == Tok::Comma {
                self.next();
            } else if *self.peek() == close {
                self.next();
                return Ok(out);
            } else {
                return self.fail(expected);
            }
        }
    }

    fn binop(&self) -> Option<BinaryOp> {
        let Tok::Op(o) = self.peek() else { return None };
        Some(match *o {
            "||" => BinaryOp::Or,
            "&&" => BinaryOp::And,
            "==" => BinaryOp::Eq,
            "!=" => BinaryOp::Ne,
            "<" => BinaryOp::Lt,
            "<=" => BinaryOp::Le,
            ">" => BinaryOp::Gt,
            ">=" => BinaryOp::Ge,
            "+" => BinaryOp::Add,
            "-" => BinaryOp::Sub,
            "*" => BinaryOp::Mul,
            "/" => BinaryOp::Div,
            "%" => BinaryOp::Rem,
            _ => return None,
        })
    }

    fn expr(&mut self, min_prec: u8) -> Result<Expr, SyntaxError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop() {
            if op.precedence() <= min_prec {
                break;
            }
            self.next();
            let rhs = self.expr(op.precedence())?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, SyntaxError> {
        match self.peek() {
            Tok::Op("!") => {
                self.next();
                Ok(Expr::Unary(UnaryOp::Not, Box::new(self.unary()?)))
            }
            Tok::Op("-") => {
                self.next();
                Ok(Expr::Unary(UnaryOp::Neg, Box::new(self.unary()?)))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Expr, SyntaxError> {
        let t = self.peek().clone();
        match t {
            Tok::Int(n) => {
                self.next();
                Ok(Expr::Lit(Literal::Int(n)))
            }
            Tok::Float(x) => {
                self.next();
                Ok(Expr::Lit(Literal::Float(OrderedFloat(x))))
            }
            Tok::Str(s) => {
                self.next();
                Ok(Expr::Lit(Literal::Str(s)))
            }
            Tok::Ident(s) => {
                self.next();
                Ok(match s.as_str() {
                    "true" => Expr::Lit(Literal::Bool(true)),
                    "false" => Expr::Lit(Literal::Bool(false)),
                    "self" => Expr::SelfRef,
                    _ => Expr::Var(s),
                })
            }
            Tok::LParen => {
                self.next();
                if *self.peek() == Tok::RParen {
                    self.next();
                    return Ok(Expr::Lit(Literal::Unit));
                }
                let e = self.expr(0)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::LBracket => {
                self.next();
                Ok(Expr::List(self.expr_list(Tok::RBracket, "`,` or `]`")?))
            }
            Tok::LBrace => {
                self.next();
                let mut fields = Vec::new();
                if *self.peek() == Tok::RBrace {
                    self.next();
                    return Ok(Expr::Record(fields));
                }
                loop {
                    let k = self.ident("a field name")?;
                    self.expect(Tok::Colon, "`:`")?;
                    fields.push((k, self.expr(0)?));
                    match self.peek() {
                        Tok::Comma => {
                            self.next();
                        }
                        Tok::RBrace => {
                            self.next();
                            return Ok(Expr::Record(fields));
                        }
                        _ => return self.fail("`,` or `}`"),
                    }
                }
            }
            _ => self.fail("an expression"),
        }
    }
}
