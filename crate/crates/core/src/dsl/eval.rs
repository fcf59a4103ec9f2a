use std::collections::BTreeMap;

use ordered_float::OrderedFloat;
use thiserror::Error;

use super::ast::{BinaryOp, Expr, Literal, Param, UnaryOp};
use crate::term::{Address, LocalState, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("type error in `{0}`")]
    TypeError(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("integer overflow")]
    Overflow,
    #[error("`self` used outside an actor")]
    NoSelf,
}

/// Evaluates `e` with read-only access to `vars`.
pub fn eval(e: &Expr, vars: &BTreeMap<String, Value>, me: Option<Address>) -> Result<Value, EvalError> {
    match e {
        Expr::Lit(l) => Ok(match l {
            Literal::Unit => Value::Unit,
            Literal::Bool(b) => Value::Bool(*b),
            Literal::Int(n) => Value::Int(*n),
            Literal::Float(x) => Value::Float(*x),
            Literal::Str(s) => Value::Str(s.clone()),
        }),
        Expr::Var(v) => vars.get(v).cloned().ok_or_else(|| EvalError::UnknownVariable(v.clone())),
        Expr::SelfRef => me.map(Value::Addr).ok_or(EvalError::NoSelf),
        Expr::Unary(op, inner) => {
            let v = eval(inner, vars, me)?;
            match (op, v) {
                (UnaryOp::Not, Value::Bool(b)) => Ok(Value::Bool(!b)),
                (UnaryOp::Neg, Value::Int(n)) => n.checked_neg().map(Value::Int).ok_or(EvalError::Overflow),
                (UnaryOp::Neg, Value::Float(x)) => Ok(Value::Float(-x)),
                _ => Err(type_error(e)),
            }
        }
        Expr::Binary(BinaryOp::And, l, r) => match eval(l, vars, me)? {
            Value::Bool(false) => Ok(Value::Bool(false)),
            Value::Bool(true) => bool_of(e, eval(r, vars, me)?),
            _ => Err(type_error(e)),
        },
        Expr::Binary(BinaryOp::Or, l, r) => match eval(l, vars, me)? {
            Value::Bool(true) => Ok(Value::Bool(true)),
            Value::Bool(false) => bool_of(e, eval(r, vars, me)?),
            _ => Err(type_error(e)),
        },
        Expr::Binary(op, l, r) => {
            let a = eval(l, vars, me)?;
            let b = eval(r, vars, me)?;
            binary(e, *op, a, b)
        }
        Expr::List(items) => Ok(Value::List(items.iter().map(|x| eval(x, vars, me)).collect::<Result<_, _>>()?)),
        Expr::Record(fields) => {
            let mut out = BTreeMap::new();
            for (k, x) in fields {
                out.insert(k.clone(), eval(x, vars, me)?);
            }
            Ok(Value::Record(out))
        }
    }
}

fn type_error(e: &Expr) -> EvalError {
    EvalError::TypeError(super::pretty::expr(e))
}

fn bool_of(e: &Expr, v: Value) -> Result<Value, EvalError> {
    match v {
        Value::Bool(_) => Ok(v),
        _ => Err(type_error(e)),
    }
}

fn as_float(v: &Value) -> Option<f64> {
    match v {
        Value::Int(n) => Some(*n as f64),
        Value::Float(x) => Some(x.0),
        _ => None,
    }
}

fn binary(e: &Expr, op: BinaryOp, a: Value, b: Value) -> Result<Value, EvalError> {
    use BinaryOp::*;
    match op {
        Eq => return Ok(Value::Bool(loose_eq(&a, &b))),
        Ne => return Ok(Value::Bool(!loose_eq(&a, &b))),
        _ => {}
    }
    if let (Value::Int(x), Value::Int(y)) = (&a, &b) {
        let (x, y) = (*x, *y);
        return match op {
            Add => x.checked_add(y).map(Value::Int).ok_or(EvalError::Overflow),
            Sub => x.checked_sub(y).map(Value::Int).ok_or(EvalError::Overflow),
            Mul => x.checked_mul(y).map(Value::Int).ok_or(EvalError::Overflow),
            Div | Rem if y == 0 => Err(EvalError::DivisionByZero),
            Div => x.checked_div(y).map(Value::Int).ok_or(EvalError::Overflow),
            Rem => x.checked_rem(y).map(Value::Int).ok_or(EvalError::Overflow),
            Lt => Ok(Value::Bool(x < y)),
            Le => Ok(Value::Bool(x <= y)),
            Gt => Ok(Value::Bool(x > y)),
            Ge => Ok(Value::Bool(x >= y)),
            _ => Err(type_error(e)),
        };
    }
    if let (Some(x), Some(y)) = (as_float(&a), as_float(&b)) {
        let f = |v: f64| Ok(Value::Float(OrderedFloat(v)));
        return match op {
            Add => f(x + y),
            Sub => f(x - y),
            Mul => f(x * y),
            Div if y == 0.0 => Err(EvalError::DivisionByZero),
            Div => f(x / y),
            Lt => Ok(Value::Bool(x < y)),
            Le => Ok(Value::Bool(x <= y)),
            Gt => Ok(Value::Bool(x > y)),
            Ge => Ok(Value::Bool(x >= y)),
            _ => Err(type_error(e)),
        };
    }
    match (op, a, b) {
        (Add, Value::Str(x), Value::Str(y)) => Ok(Value::Str(x + &y)),
        (Add, Value::List(mut x), Value::List(y)) => {
            x.extend(y);
            Ok(Value::List(x))
        }
        (Lt, Value::Str(x), Value::Str(y)) => Ok(Value::Bool(x < y)),
        (Le, Value::Str(x), Value::Str(y)) => Ok(Value::Bool(x <= y)),
        (Gt, Value::Str(x), Value::Str(y)) => Ok(Value::Bool(x > y)),
        (Ge, Value::Str(x), Value::Str(y)) => Ok(Value::Bool(x >= y)),
        _ => Err(type_error(e)),
    }
}

/// Structural equality, with ints and floats compared numerically.
fn loose_eq(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Int(_), Value::Float(_)) | (Value::Float(_), Value::Int(_)) => as_float(a) == as_float(b),
        _ => a == b,
    }
}

/// Evaluates a method guard with `params` bound to `args` on top of the
/// actor's variables. Never mutates `state`.
pub fn eval_guard(guard: &Expr, state: &LocalState, params: &[Param], args: &[Value]) -> Result<bool, EvalError> {
    eval_guard_at(guard, state, params, args, None)
}

pub fn eval_guard_at(
    guard: &Expr,
    state: &LocalState,
    params: &[Param],
    args: &[Value],
    me: Option<Address>,
) -> Result<bool, EvalError> {
    if guard.is_true_literal() {
        return Ok(true);
    }
    let mut vars = state.vars.clone();
    for (p, a) in params.iter().zip(args) {
        vars.insert(p.name.clone(), a.clone());
    }
    match eval(guard, &vars, me)? {
        Value::Bool(b) => Ok(b),
        _ => Err(type_error(guard)),
    }
}
