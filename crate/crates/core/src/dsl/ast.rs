use std::fmt;

use crate::term::ActorKind;

/// Source location. All spans compare equal so that structural equality of
/// definitions ignores where they came from.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Span {}

impl std::hash::Hash for Span {
    fn hash<H: std::hash::Hasher>(&self, _: &mut H) {}
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TypeName {
    Int,
    Float,
    Str,
    Bool,
    List,
    Record,
    Actor(ActorKind),
}

impl TypeName {
    pub fn parse(s: &str) -> Option<TypeName> {
        Some(match s {
            "int" => TypeName::Int,
            "float" => TypeName::Float,
            "string" | "String" => TypeName::Str,
            "bool" => TypeName::Bool,
            "list" | "List" => TypeName::List,
            "record" | "Record" => TypeName::Record,
            other => TypeName::Actor(ActorKind::from_keyword(other)?),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            TypeName::Int => "int",
            TypeName::Float => "float",
            TypeName::Str => "string",
            TypeName::Bool => "bool",
            TypeName::List => "List",
            TypeName::Record => "record",
            TypeName::Actor(k) => k.keyword(),
        }
    }

    pub fn actor_kind(self) -> Option<ActorKind> {
        match self {
            TypeName::Actor(k) => Some(k),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarDecl {
    pub name: String,
    pub ty: TypeName,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Param {
    pub name: String,
    pub ty: Option<TypeName>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Or => "||",
            BinaryOp::And => "&&",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Rem => "%",
        }
    }

    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 1,
            BinaryOp::And => 2,
            BinaryOp::Eq | BinaryOp::Ne => 3,
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => 4,
            BinaryOp::Add | BinaryOp::Sub => 5,
            BinaryOp::Mul | BinaryOp::Div | BinaryOp::Rem => 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Literal {
    Unit,
    Bool(bool),
    Int(i64),
    Float(ordered_float::OrderedFloat<f64>),
    Str(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Lit(Literal),
    Var(String),
    SelfRef,
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    List(Vec<Expr>),
    Record(Vec<(String, Expr)>),
}

impl Expr {
    pub fn truth() -> Expr {
        Expr::Lit(Literal::Bool(true))
    }

    pub fn is_true_literal(&self) -> bool {
        matches!(self, Expr::Lit(Literal::Bool(true)))
    }

    /// Variable names read by this expression.
    pub fn free_vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::Var(v) => out.push(v.clone()),
            Expr::Unary(_, e) => e.free_vars(out),
            Expr::Binary(_, l, r) => {
                l.free_vars(out);
                r.free_vars(out);
            }
            Expr::List(items) => items.iter().for_each(|e| e.free_vars(out)),
            Expr::Record(fields) => fields.iter().for_each(|(_, e)| e.free_vars(out)),
            Expr::Lit(_) | Expr::SelfRef => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Action {
    Assign { var: String, expr: Expr, span: Span },
    Send { target: String, method: String, args: Vec<Expr>, span: Span },
    Create { var: String, behavior: String, args: Vec<Expr>, role: Option<String>, span: Span },
    SetPartnerCall { target: String, arg: Expr, span: Span },
    OpaqueLocal { span: Span },
}

impl Action {
    /// Local actions run without producing a signal.
    pub fn is_local(&self) -> bool {
        matches!(self, Action::Assign { .. } | Action::OpaqueLocal { .. })
    }

    pub fn span(&self) -> Span {
        match self {
            Action::Assign { span, .. }
            | Action::Send { span, .. }
            | Action::Create { span, .. }
            | Action::SetPartnerCall { span, .. }
            | Action::OpaqueLocal { span } => *span,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MethodDefinition {
    pub name: String,
    pub local: bool,
    pub params: Vec<Param>,
    pub guard: Expr,
    pub body: Vec<Action>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BehaviorDefinition {
    pub kind: ActorKind,
    pub name: String,
    pub roles: Vec<String>,
    pub vars: Vec<VarDecl>,
    pub init: Option<MethodDefinition>,
    pub methods: Vec<MethodDefinition>,
    pub span: Span,
}

impl BehaviorDefinition {
    pub fn method(&self, name: &str) -> Option<&MethodDefinition> {
        self.methods.iter().find(|m| m.name == name)
    }

    /// `None` selects the initializer.
    pub fn body(&self, method: Option<&str>) -> Option<&[Action]> {
        match method {
            None => self.init.as_ref().map(|m| m.body.as_slice()),
            Some(name) => self.method(name).map(|m| m.body.as_slice()),
        }
    }

    pub fn var(&self, name: &str) -> Option<&VarDecl> {
        self.vars.iter().find(|v| v.name == name)
    }

    /// Declared references to other actors (the link declarations).
    pub fn links(&self) -> impl Iterator<Item = (&str, ActorKind)> {
        self.vars.iter().filter_map(|v| Some((v.name.as_str(), v.ty.actor_kind()?)))
    }

    /// Static type of a name visible inside `method`, looking at params first.
    pub fn type_of(&self, method: Option<&MethodDefinition>, name: &str) -> Option<TypeName> {
        if let Some(m) = method {
            if let Some(p) = m.params.iter().find(|p| p.name == name) {
                return p.ty;
            }
        }
        self.var(name).map(|v| v.ty)
    }

    pub fn all_bodies(&self) -> impl Iterator<Item = &MethodDefinition> {
        self.init.iter().chain(self.methods.iter())
    }
}
