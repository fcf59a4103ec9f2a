use std::fmt::Write;

use super::ast::*;
use super::parser::OPAQUE_LOCAL;

pub fn pretty_program(defs: &[BehaviorDefinition]) -> String {
    let mut out = String::new();
    for (i, d) in defs.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        pretty_definition(d, &mut out);
    }
    out
}

fn pretty_definition(d: &BehaviorDefinition, out: &mut String) {
    write!(out, "{} {}", d.kind, d.name).unwrap();
    for (i, r) in d.roles.iter().enumerate() {
        out.push_str(if i == 0 { " role " } else { ", role " });
        out.push_str(r);
    }
    out.push_str(" {\n");
    for v in &d.vars {
        writeln!(out, "    {} {}", v.ty.name(), v.name).unwrap();
    }
    if let Some(init) = &d.init {
        write!(out, "    init(").unwrap();
        params(&init.params, out);
        out.push_str(") {\n");
        body(&init.body, out);
        out.push_str("    }\n");
    }
    for m in &d.methods {
        out.push_str("    ");
        if m.local {
            out.push_str("local ");
        }
        write!(out, "{}(", m.name).unwrap();
        params(&m.params, out);
        writeln!(out, ") if {} {{", expr(&m.guard)).unwrap();
        body(&m.body, out);
        out.push_str("    }\n");
    }
    out.push_str("}\n");
}

fn params(ps: &[Param], out: &mut String) {
    for (i, p) in ps.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        if let Some(ty) = p.ty {
            write!(out, "{} ", ty.name()).unwrap();
        }
        out.push_str(&p.name);
    }
}

fn body(actions: &[Action], out: &mut String) {
    for a in actions {
        out.push_str("        ");
        out.push_str(&action(a));
        out.push('\n');
    }
}

pub fn action(a: &Action) -> String {
    match a {
        Action::Assign { var, expr: e, .. } => format!("{var} := {}", expr(e)),
        Action::Send { target, method, args, .. } => format!("{target} <- {method}({})", list(args)),
        Action::Create { var, behavior, args, role, .. } => {
            let mut s = format!("{var} := new {behavior}({})", list(args));
            if let Some(r) = role {
                write!(s, " as {r}").unwrap();
            }
            s
        }
        Action::SetPartnerCall { target, arg, .. } => format!("{target} <- setPartner({})", expr(arg)),
        Action::OpaqueLocal { .. } => OPAQUE_LOCAL.to_string(),
    }
}

fn list(es: &[Expr]) -> String {
    es.iter().map(expr).collect::<Vec<_>>().join(", ")
}

/// Fully parenthesised except at the top, so reparsing cannot reassociate.
pub fn expr(e: &Expr) -> String {
    match e {
        Expr::Lit(l) => match l {
            Literal::Unit => "()".into(),
            Literal::Bool(b) => b.to_string(),
            Literal::Int(n) => n.to_string(),
            Literal::Float(x) => float(x.0),
            Literal::Str(s) => format!("{s:?}"),
        },
        Expr::Var(v) => v.clone(),
        Expr::SelfRef => "self".into(),
        Expr::Unary(UnaryOp::Not, e) => format!("!{}", atom(e)),
        Expr::Unary(UnaryOp::Neg, e) => format!("-{}", atom(e)),
        Expr::Binary(op, l, r) => format!("{} {} {}", atom(l), op.symbol(), atom(r)),
        Expr::List(items) => format!("[{}]", list(items)),
        Expr::Record(fields) => {
            let inner: Vec<String> = fields.iter().map(|(k, v)| format!("{k}: {}", expr(v))).collect();
            format!("{{{}}}", inner.join(", "))
        }
    }
}

/// Always has a decimal point and never an exponent, so the lexer reads it back.
pub fn float(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{x:.1}")
    } else {
        format!("{x}")
    }
}

fn atom(e: &Expr) -> String {
    match e {
        Expr::Binary(..) => format!("({})", expr(e)),
        _ => expr(e),
    }
}
