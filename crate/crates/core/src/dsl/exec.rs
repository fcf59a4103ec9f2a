use std::collections::BTreeMap;

use thiserror::Error;

use super::ast::{Action, BehaviorDefinition, TypeName};
use super::eval::{eval, EvalError};
use crate::term::{ActorTerm, Allocator, Continuation, Event, Links, LocalState, ProcessingState, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstantiateError {
    #[error("{behavior}: init expects {expected} argument(s), got {got}")]
    ArityMismatch { behavior: String, expected: usize, got: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

pub fn default_value(ty: TypeName) -> Value {
    match ty {
        TypeName::Int => Value::Int(0),
        TypeName::Float => Value::float(0.0),
        TypeName::Str => Value::str(""),
        TypeName::Bool => Value::Bool(false),
        TypeName::List => Value::List(vec![]),
        TypeName::Record => Value::empty_record(),
        TypeName::Actor(_) => Value::Unit,
    }
}

/// Creates a fresh actor running `def`'s initializer.
///
/// Leading local actions of the initializer run immediately. The actor is
/// `Running` if anything is left to do, otherwise it is `Ready` with
/// `λ = Ready`. τ defaults to the actor itself and the links are empty; the
/// create rules fill both in.
pub fn instantiate(
    def: &BehaviorDefinition,
    args: &[Value],
    alloc: &mut impl Allocator,
) -> Result<ActorTerm, InstantiateError> {
    let expected = def.init.as_ref().map_or(0, |m| m.params.len());
    if expected != args.len() {
        return Err(InstantiateError::ArityMismatch { behavior: def.name.clone(), expected, got: args.len() });
    }
    let address = alloc.fresh(def.kind);
    let mut vars: BTreeMap<String, Value> = def.vars.iter().map(|v| (v.name.clone(), default_value(v.ty))).collect();
    let mut pending = None;
    if let Some(init) = &def.init {
        for (p, a) in init.params.iter().zip(args) {
            vars.insert(p.name.clone(), a.clone());
        }
        pending = Some(Continuation { method: None, pc: 0, len: init.body.len() });
    }
    let mut actor = ActorTerm {
        processing: ProcessingState::Running,
        address,
        behavior: def.name.clone(),
        state: LocalState { vars, pending },
        last: Event::Ready,
        tau: address,
        links: Links::empty(def.kind),
        role: None,
    };
    run_locals(def, &mut actor)?;
    if !actor.state.has_pending() {
        actor.state.pending = None;
        actor.processing = ProcessingState::Ready;
    }
    Ok(actor)
}

/// Executes assignments and opaque local actions at the head of the
/// actor's pending queue.
pub fn run_locals(def: &BehaviorDefinition, actor: &mut ActorTerm) -> Result<(), EvalError> {
    let Some(cont) = actor.state.pending.as_mut() else { return Ok(()) };
    let Some(body) = def.body(cont.method.as_deref()) else { return Ok(()) };
    while let Some(action) = body.get(cont.pc) {
        match action {
            Action::Assign { var, expr, .. } => {
                let v = eval(expr, &actor.state.vars, Some(actor.address))?;
                actor.state.vars.insert(var.clone(), v);
            }
            Action::OpaqueLocal { .. } => {}
            _ => break,
        }
        cont.pc += 1;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::parse_program;
    use super::*;
    use crate::term::{ActorKind, Address, AddressAllocator};

    #[test]
    fn init_binds_and_arity() {
        let defs = parse_program(
            "AA R { WSO wso-ref init(WSO wso) { wso-ref := wso other-local-computations } m() if true { } }",
        )
        .unwrap();
        let mut alloc = AddressAllocator::new();
        let w = Value::Addr(Address::new(ActorKind::WSO, 77));
        let a = instantiate(&defs[0], std::slice::from_ref(&w), &mut alloc).unwrap();
        assert_eq!(a.state.vars["wso-ref"], w);
        assert_eq!(a.processing, ProcessingState::Ready);
        assert_eq!(a.last, Event::Ready);
        assert!(matches!(
            instantiate(&defs[0], &[w.clone(), w], &mut alloc),
            Err(InstantiateError::ArityMismatch { expected: 1, got: 2, .. })
        ));
    }

    #[test]
    fn no_init_is_ready() {
        let defs = parse_program("AA R { WSO w }").unwrap();
        let a = instantiate(&defs[0], &[], &mut AddressAllocator::new()).unwrap();
        assert_eq!(a.processing, ProcessingState::Ready);
        assert_eq!(a.state.vars["w"], Value::Unit);
    }
}
