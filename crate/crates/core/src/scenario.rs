//! Builds the two partial configurations facing each other across a
//! boundary, starting from behavior names.

use std::collections::BTreeSet;

use crate::dsl::{default_value, instantiate, run_locals, Action, BehaviorDefinition, Program};
use crate::interaction::{BindingPair, Boundary, BoundaryKind, CheckError, PartialConfiguration};
use crate::term::{
    ActorKind, ActorTerm, Address, AddressAllocator, Allocator, Configuration, Event, EventMessage, Fragment,
    ProcessingState, Value,
};

/// Fresh addresses allocated by each side during exploration start here, so
/// the two sides never invent the same address.
const SIDE_A_BASE: u64 = 1_000;
const SIDE_M_BASE: u64 = 1_000_000;

/// Hands out one address chosen in advance.
struct Fixed(Address);

impl Allocator for Fixed {
    fn fresh(&mut self, _: ActorKind) -> Address {
        self.0
    }
}

fn lookup<'p>(program: &'p Program, name: &str) -> Result<&'p BehaviorDefinition, CheckError> {
    program.get(name).ok_or_else(|| CheckError::UnknownBehavior(name.to_string()))
}

fn expect_kind(def: &BehaviorDefinition, kind: ActorKind, boundary: BoundaryKind) -> Result<(), CheckError> {
    if def.kind == kind {
        Ok(())
    } else {
        Err(CheckError::BoundaryMismatch(format!(
            "{} is a {}, but a {boundary} boundary needs a {} there",
            def.name,
            def.kind.keyword(),
            kind.keyword()
        )))
    }
}

/// 2 × the methods declared by both endpoint behaviors.
pub fn default_depth(program: &Program, a: &str, b: &str) -> Result<usize, CheckError> {
    let count = |n: &str| lookup(program, n).map(|d| d.methods.len());
    Ok(2 * (count(a)? + count(b)?))
}

/// The partial configurations for `a` and `b` across `kind`, `a` on the
/// left of the boundary name. Using the same behavior on both sides yields
/// one shared fragment.
pub fn side_pair(
    program: &Program,
    a: &str,
    b: &str,
    kind: BoundaryKind,
) -> Result<(PartialConfiguration, PartialConfiguration), CheckError> {
    let (da, db) = (lookup(program, a)?, lookup(program, b)?);
    let (ka, kb) = match kind {
        BoundaryKind::WsoWs => (ActorKind::WSO, ActorKind::WS),
        BoundaryKind::WsWso => (ActorKind::WS, ActorKind::WSO),
        BoundaryKind::WsWs => (ActorKind::WS, ActorKind::WS),
        BoundaryKind::WsoWso => (ActorKind::WSO, ActorKind::WSO),
    };
    expect_kind(da, ka, kind)?;
    expect_kind(db, kb, kind)?;

    let mut alloc = AddressAllocator::new();
    let ea = alloc.fresh(ka);
    let eb = if a == b { ea } else { alloc.fresh(kb) };
    let (pa, pb) = match kind {
        BoundaryKind::WsoWso => (alloc.fresh(ActorKind::WS), alloc.fresh(ActorKind::WS)),
        _ => (eb, ea),
    };

    let side_a = build_side(program, da, Some(db), ea, pa, kind, &mut alloc, SIDE_A_BASE)?;
    if a == b {
        let mut m = side_a.clone();
        m.kind = kind.flip();
        return Ok((side_a, m));
    }
    let side_m = build_side(program, db, Some(da), eb, pb, kind.flip(), &mut alloc, SIDE_M_BASE)?;
    Ok((side_a, side_m))
}

/// A WSO facing its interface WS, or an external address when no WS
/// creates it.
pub fn orchestration_side(program: &Program, wso: &str) -> Result<PartialConfiguration, CheckError> {
    let def = lookup(program, wso)?;
    expect_kind(def, ActorKind::WSO, BoundaryKind::WsoWs)?;
    if let Some(ws) = interface_ws_of(program, wso) {
        return side_pair(program, wso, &ws.name, BoundaryKind::WsoWs).map(|(a, _)| a);
    }
    let mut alloc = AddressAllocator::new();
    let (endpoint, peer) = (alloc.fresh(ActorKind::WSO), alloc.fresh(ActorKind::WS));
    build_side(program, def, None, endpoint, peer, BoundaryKind::WsoWso, &mut alloc, SIDE_A_BASE)
}

#[allow(clippy::too_many_arguments)]
fn build_side(
    program: &Program,
    def: &BehaviorDefinition,
    peer_def: Option<&BehaviorDefinition>,
    endpoint: Address,
    peer: Address,
    kind: BoundaryKind,
    alloc: &mut AddressAllocator,
    base: u64,
) -> Result<PartialConfiguration, CheckError> {
    let mut top = Fragment::empty();
    match def.kind {
        ActorKind::WSO => {
            let mut wso = spawn(def, endpoint, peer)?;
            wso.links.owner_wso = Some(endpoint);
            wso.links.interface_ws = Some(peer);
            top.insert_actor(wso);
        }
        ActorKind::WS => {
            let mut ws = spawn(def, endpoint, peer)?;
            if kind == BoundaryKind::WsWs {
                bind_partner(def, &mut ws, peer);
            } else {
                skip_wso_create(program, def, &mut ws, peer)?;
                if let Some(partner_def) = partner_of(program, &def.name) {
                    let partner = alloc.fresh(ActorKind::WS);
                    let mut p = spawn(partner_def, partner, endpoint)?;
                    bind_partner(partner_def, &mut p, endpoint);
                    bind_partner(def, &mut ws, partner);
                    top.insert_actor(p);
                }
            }
            top.insert_actor(ws);
        }
        other => {
            return Err(CheckError::BoundaryMismatch(format!("{} actors have no boundary", other.keyword())));
        }
    }
    let idle: Vec<(Address, Address)> = top
        .actors
        .values()
        .filter(|a| a.processing == ProcessingState::Ready && a.last == Event::Ready)
        .map(|a| (a.address, a.tau))
        .collect();
    for (src, dest) in idle {
        top.push_event(EventMessage { dest, src, event: Event::Ready, value: Value::empty_record() });
    }
    top.restriction = Some(BTreeSet::from([endpoint]));
    let boundary = match kind {
        BoundaryKind::WsoWso => Boundary::External(peer),
        _ => Boundary::Binding(BindingPair { self_side: BTreeSet::from([endpoint]), peer }),
    };
    Ok(PartialConfiguration {
        config: Configuration::new(top).with_next_id(base),
        boundary,
        kind,
        endpoint,
        feed: peer_def.map_or_else(Vec::new, |p| feed_domain(program, def, p)),
    })
}

/// Instantiates `def` at `at`, binding actor-typed init parameters to `peer`.
fn spawn(def: &BehaviorDefinition, at: Address, peer: Address) -> Result<ActorTerm, CheckError> {
    let args: Vec<Value> = def.init.as_ref().map_or_else(Vec::new, |init| {
        init.params
            .iter()
            .map(|p| match p.ty {
                Some(t) if t.actor_kind() == Some(peer.kind) => Value::Addr(peer),
                Some(t) => default_value(t),
                None => Value::Addr(peer),
            })
            .collect()
    });
    instantiate(def, &args, &mut Fixed(at)).map_err(|e| CheckError::BoundaryMismatch(e.to_string()))
}

fn bind_partner(def: &BehaviorDefinition, ws: &mut ActorTerm, partner: Address) {
    ws.links.partner_ws = Some(partner);
    if let Some((link, _)) = def.links().find(|(_, k)| *k == ActorKind::WS) {
        ws.state.vars.insert(link.to_string(), Value::Addr(partner));
    }
}

/// Replaces the WS's own WSO creation with the peer across the boundary.
fn skip_wso_create(
    program: &Program,
    def: &BehaviorDefinition,
    ws: &mut ActorTerm,
    wso: Address,
) -> Result<(), CheckError> {
    while let Some(cont) = ws.state.pending.as_mut() {
        let head = def.body(cont.method.as_deref()).and_then(|b| b.get(cont.pc));
        let Some(Action::Create { var, behavior, .. }) = head else { break };
        if program.get(behavior).map(|d| d.kind) != Some(ActorKind::WSO) {
            break;
        }
        cont.pc += 1;
        ws.state.vars.insert(var.clone(), Value::Addr(wso));
        ws.links.owner_wso = Some(wso);
        run_locals(def, ws).map_err(|e| CheckError::BoundaryMismatch(e.to_string()))?;
    }
    Ok(())
}

/// The WS created next to `ws` by some composition's initializer.
pub fn partner_of<'p>(program: &'p Program, ws: &str) -> Option<&'p BehaviorDefinition> {
    for wsc in program.of_kind(ActorKind::WSC) {
        let created: Vec<&str> = creates(wsc).collect();
        for pair in created.chunks(2) {
            if let [x, y] = pair {
                let other = if *x == ws { y } else if *y == ws { x } else { continue };
                return program.get(other);
            }
        }
    }
    None
}

/// The WS whose initializer creates `wso`.
pub fn interface_ws_of<'p>(program: &'p Program, wso: &str) -> Option<&'p BehaviorDefinition> {
    program.of_kind(ActorKind::WS).find(|ws| creates(ws).any(|b| b == wso))
}

/// Behaviors created anywhere in `def`, in body order.
pub fn creates(def: &BehaviorDefinition) -> impl Iterator<Item = &str> {
    def.all_bodies().flat_map(|m| m.body.iter()).filter_map(|a| match a {
        Action::Create { behavior, .. } => Some(behavior.as_str()),
        _ => None,
    })
}

/// Calls the peer side can send across the boundary, with arguments set to
/// the defaults of our matching method's parameter types.
fn feed_domain(program: &Program, def: &BehaviorDefinition, peer_def: &BehaviorDefinition) -> Vec<Value> {
    let target = if peer_def.kind == ActorKind::WS && def.kind == ActorKind::WSO {
        ActorKind::WSO
    } else {
        ActorKind::WS
    };
    let mut senders = vec![peer_def];
    if peer_def.kind == ActorKind::WSO {
        senders.extend(creates(peer_def).filter_map(|b| program.get(b)).filter(|d| d.kind == ActorKind::AA));
    }
    let mut out = BTreeSet::new();
    for s in senders {
        for m in s.all_bodies() {
            for a in &m.body {
                let Action::Send { target: t, method, args, .. } = a else { continue };
                if s.type_of(Some(m), t).and_then(|ty| ty.actor_kind()) != Some(target) {
                    continue;
                }
                let args = match def.method(method) {
                    Some(mine) if mine.params.len() == args.len() => {
                        mine.params.iter().map(|p| p.ty.map_or(Value::Unit, default_value)).collect()
                    }
                    _ => vec![Value::Unit; args.len()],
                };
                out.insert(Value::call(method.clone(), args));
            }
        }
    }
    out.into_iter().collect()
}
