use std::collections::BTreeSet;
use std::fmt;

use super::ast::*;
use crate::term::ActorKind;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagnosticKind {
    AACannotCreate,
    MissingSetPartner,
    WrongPartnerRefCount(usize),
    WrongWsoRefCount(usize),
    UnknownSendTarget(String),
    UnknownVariable(String),
    UnknownBehavior(String),
    CreateKindMismatch { creator: ActorKind, created: ActorKind },
    SetPartnerOutsideWSC,
    UnpairedPartnerCreate,
    DuplicateDefinition,
    DuplicateMethod(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub behavior: String,
    pub span: Span,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: ", self.span, self.behavior)?;
        match &self.kind {
            DiagnosticKind::AACannotCreate => f.write_str("an AA may not create actors"),
            DiagnosticKind::MissingSetPartner => f.write_str("a WS must define a setPartner method"),
            DiagnosticKind::WrongPartnerRefCount(n) => write!(f, "a WSC needs exactly two WS references, found {n}"),
            DiagnosticKind::WrongWsoRefCount(n) => write!(f, "an AA needs exactly one WSO reference, found {n}"),
            DiagnosticKind::UnknownSendTarget(t) => write!(f, "send target `{t}` is not declared"),
            DiagnosticKind::UnknownVariable(v) => write!(f, "variable `{v}` is not declared"),
            DiagnosticKind::UnknownBehavior(b) => write!(f, "behavior `{b}` is not defined"),
            DiagnosticKind::CreateKindMismatch { creator, created } => {
                write!(f, "a {creator} may not create a {created}")
            }
            DiagnosticKind::SetPartnerOutsideWSC => f.write_str("setPartner may only be sent by a WSC"),
            DiagnosticKind::UnpairedPartnerCreate => {
                f.write_str("WS creations must come as two consecutive actions")
            }
            DiagnosticKind::DuplicateDefinition => f.write_str("behavior defined twice"),
            DiagnosticKind::DuplicateMethod(m) => write!(f, "method `{m}` defined twice"),
        }
    }
}

/// Which kind each kind may create.
pub fn creatable(creator: ActorKind) -> Option<ActorKind> {
    match creator {
        ActorKind::WSO => Some(ActorKind::AA),
        ActorKind::WS => Some(ActorKind::WSO),
        ActorKind::WSC => Some(ActorKind::WS),
        ActorKind::AA => None,
    }
}

pub fn validate(defs: &[BehaviorDefinition]) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for d in defs {
        let mut push = |kind, span| out.push(Diagnostic { kind, behavior: d.name.clone(), span });
        if !seen.insert(d.name.as_str()) {
            push(DiagnosticKind::DuplicateDefinition, d.span);
        }
        let mut names = BTreeSet::new();
        for m in &d.methods {
            if !names.insert(m.name.as_str()) {
                push(DiagnosticKind::DuplicateMethod(m.name.clone()), m.span);
            }
        }
        match d.kind {
            ActorKind::AA => {
                let n = d.links().filter(|(_, k)| *k == ActorKind::WSO).count();
                if n != 1 {
                    push(DiagnosticKind::WrongWsoRefCount(n), d.span);
                }
            }
            ActorKind::WS => {
                if d.method("setPartner").is_none() {
                    push(DiagnosticKind::MissingSetPartner, d.span);
                }
            }
            ActorKind::WSC => {
                let n = d.links().filter(|(_, k)| *k == ActorKind::WS).count();
                if n != 2 {
                    push(DiagnosticKind::WrongPartnerRefCount(n), d.span);
                }
            }
            ActorKind::WSO => {}
        }
        for m in d.all_bodies() {
            check_body(d, m, defs, &mut push);
        }
    }
    out
}

fn check_body(
    d: &BehaviorDefinition,
    m: &MethodDefinition,
    defs: &[BehaviorDefinition],
    push: &mut impl FnMut(DiagnosticKind, Span),
) {
    let known = |name: &str| d.var(name).is_some() || m.params.iter().any(|p| p.name == name);
    let check_expr = |e: &Expr, span: Span, push: &mut dyn FnMut(DiagnosticKind, Span)| {
        let mut free = Vec::new();
        e.free_vars(&mut free);
        for v in free {
            if !known(&v) {
                push(DiagnosticKind::UnknownVariable(v), span);
            }
        }
    };
    check_expr(&m.guard, m.span, push);
    for a in &m.body {
        match a {
            Action::Assign { var, expr, span } => {
                if !known(var) {
                    push(DiagnosticKind::UnknownVariable(var.clone()), *span);
                }
                check_expr(expr, *span, push);
            }
            Action::Send { target, args, span, .. } => {
                if !known(target) {
                    push(DiagnosticKind::UnknownSendTarget(target.clone()), *span);
                }
                args.iter().for_each(|e| check_expr(e, *span, push));
            }
            Action::SetPartnerCall { target, arg, span } => {
                if d.kind != ActorKind::WSC {
                    push(DiagnosticKind::SetPartnerOutsideWSC, *span);
                }
                if !known(target) {
                    push(DiagnosticKind::UnknownSendTarget(target.clone()), *span);
                }
                check_expr(arg, *span, push);
            }
            Action::Create { var, behavior, args, span, .. } => {
                if !known(var) {
                    push(DiagnosticKind::UnknownVariable(var.clone()), *span);
                }
                args.iter().for_each(|e| check_expr(e, *span, push));
                if d.kind == ActorKind::AA {
                    push(DiagnosticKind::AACannotCreate, *span);
                } else {
                    match defs.iter().find(|x| &x.name == behavior) {
                        None => push(DiagnosticKind::UnknownBehavior(behavior.clone()), *span),
                        Some(target) if creatable(d.kind) != Some(target.kind) => push(
                            DiagnosticKind::CreateKindMismatch { creator: d.kind, created: target.kind },
                            *span,
                        ),
                        Some(_) => {}
                    }
                }
            }
            Action::OpaqueLocal { .. } => {}
        }
    }
    if d.kind == ActorKind::WSC {
        let mut run = 0;
        for a in m.body.iter().chain([&Action::OpaqueLocal { span: m.span }]) {
            if matches!(a, Action::Create { .. }) {
                run += 1;
            } else {
                if run % 2 == 1 {
                    push(DiagnosticKind::UnpairedPartnerCreate, a.span());
                }
                run = 0;
            }
        }
    }
}
