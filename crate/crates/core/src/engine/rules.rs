use std::collections::BTreeSet;

use super::{Engine, RuleError, RuleId};
use crate::dsl::{eval, instantiate, run_locals, Action, BehaviorDefinition};
use crate::dsl::eval::eval_guard_at;
use crate::term::{
    members, receptionists, blocked, acquaintances, ActorKind, ActorTerm, Address, AppMessage, Configuration,
    Continuation, Event, EventMessage, ProcessingState, Value,
};

fn record_field<'v>(v: &'v Value, key: &str) -> Option<&'v Value> {
    match v {
        Value::Record(fields) => fields.get(key),
        _ => None,
    }
}

/// Splits a transmit value `{target, msg}`.
fn transmit_parts(em: &EventMessage) -> Result<(Address, &Value), RuleError> {
    let target = record_field(&em.value, "target").and_then(Value::as_addr).ok_or(RuleError::MalformedValue)?;
    let msg = record_field(&em.value, "msg").ok_or(RuleError::MalformedValue)?;
    Ok((target, msg))
}

impl Engine {
    fn def_of(&self, actor: &ActorTerm) -> Result<&BehaviorDefinition, RuleError> {
        self.program.get(&actor.behavior).ok_or_else(|| RuleError::UnknownBehavior(actor.behavior.clone()))
    }

    fn actor<'c>(&self, c: &'c Configuration, a: Address) -> Result<&'c ActorTerm, RuleError> {
        c.top.actor(a).ok_or(RuleError::UnknownActor(a))
    }

    fn head<'d>(&self, def: &'d BehaviorDefinition, actor: &ActorTerm) -> Option<&'d Action> {
        let cont = actor.state.pending.as_ref()?;
        def.body(cont.method.as_deref())?.get(cont.pc)
    }

    /// The signal a running actor is about to emit. `Ok(None)` when the
    /// actor has no continuation at all or its next action is a create
    /// (which the create rules handle instead).
    pub fn next_event(&self, actor: &ActorTerm) -> Result<Option<(Event, Value)>, RuleError> {
        let Some(cont) = &actor.state.pending else { return Ok(None) };
        if cont.is_done() {
            return Ok(Some((Event::Ready, Value::empty_record())));
        }
        let def = self.def_of(actor)?;
        let vars = &actor.state.vars;
        let me = Some(actor.address);
        let target_of = |name: &str| match vars.get(name) {
            Some(Value::Addr(a)) => Ok(*a),
            _ => Err(RuleError::BadTarget(actor.address)),
        };
        let (target, msg) = match self.head(def, actor) {
            Some(Action::Send { target, method, args, .. }) => {
                let args = args.iter().map(|e| eval(e, vars, me)).collect::<Result<Vec<_>, _>>()?;
                (target_of(target)?, Value::call(method.clone(), args))
            }
            Some(Action::SetPartnerCall { target, arg, .. }) => {
                (target_of(target)?, Value::call("setPartner", vec![eval(arg, vars, me)?]))
            }
            _ => return Ok(None),
        };
        let value = Value::record([("target", Value::Addr(target)), ("msg", msg)]);
        Ok(Some((Event::Transmit, value)))
    }

    /// [request]: a running actor emits its next signal to τ and blocks.
    pub fn step_request(&self, c: &Configuration, site: Address) -> Result<Configuration, RuleError> {
        let actor = self.actor(c, site)?;
        if actor.processing != ProcessingState::Running {
            return Err(RuleError::NotRunning(site));
        }
        let (event, value) = self.next_event(actor)?.ok_or(RuleError::NoNextEvent(site))?;
        let mut next = c.clone();
        let actor = next.top.actor_mut(site).expect("present");
        actor.processing = ProcessingState::Ready;
        actor.last = event;
        if event == Event::Ready {
            actor.state.pending = None;
        }
        let dest = actor.tau;
        next.top.push_event(EventMessage { dest, src: site, event, value });
        Ok(next)
    }

    /// [compute]: a blocked actor consumes the matching notification.
    pub fn step_compute(
        &self,
        c: &Configuration,
        site: Address,
        notification: &EventMessage,
    ) -> Result<Configuration, RuleError> {
        let actor = self.actor(c, site)?;
        if notification.dest != site {
            return Err(RuleError::WrongDestination(site));
        }
        if actor.processing != ProcessingState::Ready {
            return Err(RuleError::NotReady(site));
        }
        if !blocked(actor.last, notification.event) {
            return Err(RuleError::NotBlockedPair(actor.last, notification.event));
        }
        if notification.src != actor.tau {
            return Err(RuleError::WrongSource(site));
        }
        let def = self.def_of(actor)?;
        let mut next = c.clone();
        if !next.top.take_event(notification) {
            return Err(RuleError::MissingMessage);
        }
        let actor = next.top.actor_mut(site).expect("present");
        match notification.event {
            Event::Complete => {
                let cont = actor.state.pending.as_mut().ok_or(RuleError::NoNextEvent(site))?;
                cont.pc += 1;
            }
            _ => {
                let msg = record_field(&notification.value, "msg").ok_or(RuleError::MalformedValue)?;
                let (name, args) = msg.as_call().ok_or(RuleError::MalformedValue)?;
                let method = self.enabled_method(def, actor, name, args)?;
                for (p, a) in method.params.iter().zip(args) {
                    actor.state.vars.insert(p.name.clone(), a.clone());
                }
                actor.state.pending = Some(Continuation { method: Some(name.to_string()), pc: 0, len: method.body.len() });
            }
        }
        actor.processing = ProcessingState::Running;
        run_locals(def, actor)?;
        Ok(next)
    }

    /// En_d: the method exists with matching arity and its guard holds.
    fn enabled_method<'d>(
        &self,
        def: &'d BehaviorDefinition,
        actor: &ActorTerm,
        name: &str,
        args: &[Value],
    ) -> Result<&'d crate::dsl::MethodDefinition, RuleError> {
        let method = def
            .method(name)
            .filter(|m| m.params.len() == args.len())
            .ok_or_else(|| RuleError::NoSuchMethod { actor: actor.address, method: name.into(), arity: args.len() })?;
        if !eval_guard_at(&method.guard, &actor.state, &method.params, args, Some(actor.address))? {
            return Err(RuleError::GuardRejected { actor: actor.address, method: name.into() });
        }
        Ok(method)
    }

    /// Whether `actor` would accept the call `value` right now.
    pub fn deliverable(&self, actor: &ActorTerm, value: &Value) -> bool {
        let Some((name, args)) = value.as_call() else { return false };
        self.def_of(actor).is_ok_and(|def| self.enabled_method(def, actor, name, args).is_ok())
    }

    fn same_group(&self, c: &Configuration, a: Address, b: Address) -> bool {
        let owner = |x| {
            c.top
                .actor(x)
                .filter(|t| matches!(t.kind(), ActorKind::AA | ActorKind::WSO))
                .and_then(|t| t.links.owner_wso)
        };
        matches!((owner(a), owner(b)), (Some(x), Some(y)) if x == y)
    }

    /// Which rule handles a transmit signal.
    pub fn classify_transmit(&self, c: &Configuration, em: &EventMessage) -> RuleId {
        let Ok((target, msg)) = transmit_parts(em) else { return RuleId::SendOut };
        let from_wsc = c.top.actor(em.src).is_some_and(|a| a.kind() == ActorKind::WSC);
        if from_wsc && msg.as_call().is_some_and(|(m, args)| m == "setPartner" && args.len() == 1) {
            RuleId::SetPartner
        } else if self.same_group(c, em.src, target) {
            RuleId::SendIn
        } else {
            RuleId::SendOut
        }
    }

    fn check_transmit<'e>(
        &self,
        c: &Configuration,
        tau: Address,
        em: &'e EventMessage,
    ) -> Result<(Address, &'e Value), RuleError> {
        if em.dest != tau {
            return Err(RuleError::WrongDestination(tau));
        }
        if em.event != Event::Transmit {
            return Err(RuleError::NotBlockedPair(em.event, Event::Complete));
        }
        let sender = self.actor(c, em.src)?;
        if sender.tau != tau {
            return Err(RuleError::WrongSource(em.src));
        }
        if !c.top.events().contains(em) {
            return Err(RuleError::MissingMessage);
        }
        transmit_parts(em)
    }

    fn complete_send(&self, c: &Configuration, em: &EventMessage, target: Address, msg: &Value) -> Configuration {
        let mut next = c.clone();
        next.top.take_event(em);
        next.top.push_event(EventMessage {
            dest: em.src,
            src: em.dest,
            event: Event::Complete,
            value: Value::empty_record(),
        });
        next.top.push_app(AppMessage { dest: target, src: Some(em.src), value: msg.clone() });
        next
    }

    /// [send-in]: a send between actors under the same WSO.
    pub fn aa_send_in(&self, c: &Configuration, wso: Address, em: &EventMessage) -> Result<Configuration, RuleError> {
        let (target, msg) = self.check_transmit(c, wso, em)?;
        let t = c.top.actor(target).ok_or(RuleError::UnknownTarget(target))?;
        let s = self.actor(c, em.src)?;
        let same = s.links.owner_wso.is_some()
            && s.links.owner_wso == t.links.owner_wso
            && s.links.interface_ws == t.links.interface_ws;
        if !same {
            return Err(RuleError::NotSameWSO);
        }
        Ok(self.complete_send(c, em, target, msg))
    }

    /// [send-out]: a send to anything outside the sender's WSO.
    pub fn aa_send_out(&self, c: &Configuration, wso: Address, em: &EventMessage) -> Result<Configuration, RuleError> {
        let (target, msg) = self.check_transmit(c, wso, em)?;
        if self.same_group(c, em.src, target) {
            return Err(RuleError::TargetIsLocal(target));
        }
        Ok(self.complete_send(c, em, target, msg))
    }

    /// A WSC's setPartner signal: wires the link, acknowledges the WSC and
    /// hands the call to the WS.
    pub fn set_partner_transmit(&self, c: &Configuration, em: &EventMessage) -> Result<Configuration, RuleError> {
        let (ws, msg) = self.check_transmit(c, em.dest, em)?;
        let partner = msg
            .as_call()
            .and_then(|(_, args)| args.first())
            .and_then(Value::as_addr)
            .ok_or(RuleError::MalformedValue)?;
        let wired = self.set_partner(c, ws, partner)?;
        Ok(self.complete_send(&wired, em, ws, msg))
    }

    /// Sets `partner-ws(ws)`; idempotent.
    pub fn set_partner(&self, c: &Configuration, ws: Address, partner: Address) -> Result<Configuration, RuleError> {
        let actor = c.top.actor(ws).filter(|a| a.kind() == ActorKind::WS).ok_or(RuleError::UnknownTarget(ws))?;
        if partner == ws {
            return Err(RuleError::SelfPartner(ws));
        }
        if actor.links.partner_ws == Some(partner) {
            return Ok(c.clone());
        }
        let mut next = c.clone();
        next.top.actor_mut(ws).expect("present").links.partner_ws = Some(partner);
        Ok(next)
    }

    /// [ready]: pairs a ready signal with a message for that actor.
    pub fn deliver_ready(
        &self,
        c: &Configuration,
        em_ready: &EventMessage,
        am: &AppMessage,
    ) -> Result<Configuration, RuleError> {
        let a = em_ready.src;
        if em_ready.event != Event::Ready || !c.top.events().contains(em_ready) {
            return Err(RuleError::MissingMessage);
        }
        if am.dest != a || !c.top.apps().contains(am) {
            return Err(RuleError::NoPendingMessage(a));
        }
        let actor = self.actor(c, a)?;
        if actor.processing != ProcessingState::Ready || actor.last != Event::Ready {
            return Err(RuleError::NotReady(a));
        }
        let def = self.def_of(actor)?;
        let (name, args) = am.value.as_call().ok_or(RuleError::MalformedValue)?;
        self.enabled_method(def, actor, name, args)?;
        let mut next = c.clone();
        next.top.take_event(em_ready);
        next.top.take_app(am);
        next.top.push_event(EventMessage {
            dest: a,
            src: em_ready.dest,
            event: Event::Deliver,
            value: Value::record([("msg", am.value.clone())]),
        });
        Ok(next)
    }

    /// [in]: a message enters through a receptionist.
    pub fn boundary_in(&self, c: &Configuration, am: &AppMessage) -> Result<Configuration, RuleError> {
        if !receptionists(&c.top).contains(&am.dest) {
            return Err(RuleError::NotAReceptionist(am.dest));
        }
        let mut next = c.clone();
        next.top.push_app(am.clone());
        Ok(next)
    }

    /// [out] for a single message.
    pub fn out_one(&self, c: &Configuration, am: &AppMessage) -> Configuration {
        let mut next = c.clone();
        if next.top.take_app(am) {
            let inside = members(&c.top);
            if let Some(r) = next.top.restriction.as_mut() {
                r.extend(acquaintances(&am.value).intersection(&inside));
            }
        }
        next
    }

    /// [out]: every message addressed outside the configuration leaves it.
    pub fn boundary_out(&self, c: &Configuration) -> (Configuration, Vec<AppMessage>) {
        let inside = members(&c.top);
        let leaving: Vec<AppMessage> = c.top.apps().iter().filter(|m| !inside.contains(&m.dest)).cloned().collect();
        let mut next = c.clone();
        for m in &leaving {
            next = self.out_one(&next, m);
        }
        (next, leaving)
    }

    /// The create rule a running actor's next action calls for, if any.
    pub fn create_rule(&self, c: &Configuration, a: Address) -> Option<RuleId> {
        let actor = c.top.actor(a)?;
        let def = self.def_of(actor).ok()?;
        if !matches!(self.head(def, actor), Some(Action::Create { .. })) {
            return None;
        }
        match actor.kind() {
            ActorKind::WSO => Some(RuleId::CreateAA),
            ActorKind::WS => Some(RuleId::CreateWSO),
            ActorKind::WSC => Some(RuleId::CreateWSs),
            ActorKind::AA => None,
        }
    }

    /// Instantiates the create action at `pc` of `creator`.
    fn spawn(
        &self,
        next: &mut Configuration,
        creator: &ActorTerm,
        pc: usize,
        kind: ActorKind,
        taken: &BTreeSet<Address>,
    ) -> Result<(String, ActorTerm), RuleError> {
        let def = self.def_of(creator)?;
        let cont = creator.state.pending.as_ref().ok_or(RuleError::NotEnabledForCreate(creator.address))?;
        let body = def.body(cont.method.as_deref()).unwrap_or(&[]);
        let Some(Action::Create { var, behavior, args, role, .. }) = body.get(pc) else {
            return Err(RuleError::NotEnabledForCreate(creator.address));
        };
        let target = self.program.get(behavior).ok_or_else(|| RuleError::UnknownBehavior(behavior.clone()))?;
        if target.kind != kind {
            return Err(RuleError::NotEnabledForCreate(creator.address));
        }
        let args = args
            .iter()
            .map(|e| eval(e, &creator.state.vars, Some(creator.address)))
            .collect::<Result<Vec<_>, _>>()?;
        let mut born = instantiate(target, &args, next)?;
        if taken.contains(&born.address) {
            return Err(RuleError::FreshnessViolation(born.address));
        }
        born.role = role.clone();
        Ok((var.clone(), born))
    }

    fn running_creator<'c>(&self, c: &'c Configuration, a: Address, kind: ActorKind) -> Result<&'c ActorTerm, RuleError> {
        let actor = self.actor(c, a)?;
        if actor.kind() != kind || actor.processing != ProcessingState::Running {
            return Err(RuleError::NotEnabledForCreate(a));
        }
        Ok(actor)
    }

    /// Finishes a create step on the creator: bind, advance, run locals, and
    /// keep the receptionists as they were.
    fn finish_create(
        &self,
        next: &mut Configuration,
        before: &Configuration,
        creator: Address,
        binds: &[(String, Address)],
        born: Vec<ActorTerm>,
    ) -> Result<(), RuleError> {
        let recep = receptionists(&before.top);
        for b in born {
            if b.processing == ProcessingState::Ready {
                next.top.push_event(EventMessage {
                    dest: b.tau,
                    src: b.address,
                    event: Event::Ready,
                    value: Value::empty_record(),
                });
            }
            next.top.insert_actor(b);
        }
        let def = self.def_of(before.top.actor(creator).expect("present"))?;
        let actor = next.top.actor_mut(creator).expect("present");
        for (var, a) in binds {
            actor.state.vars.insert(var.clone(), Value::Addr(*a));
        }
        actor.state.pending.as_mut().expect("creator has a body").pc += binds.len();
        run_locals(def, actor)?;
        next.top.restriction = Some(recep);
        Ok(())
    }

    /// [create-AA]
    pub fn create_aa(&self, c: &Configuration, wso: Address) -> Result<(Configuration, Address), RuleError> {
        let creator = self.running_creator(c, wso, ActorKind::WSO)?;
        let pc = creator.state.pending.as_ref().map_or(0, |k| k.pc);
        let taken = c.top.all_addresses();
        let mut next = c.clone();
        let (var, mut aa) = self.spawn(&mut next, creator, pc, ActorKind::AA, &taken)?;
        aa.tau = wso;
        aa.links.owner_wso = Some(wso);
        aa.links.interface_ws = creator.links.interface_ws;
        let a = aa.address;
        self.finish_create(&mut next, c, wso, &[(var, a)], vec![aa])?;
        Ok((next, a))
    }

    /// [create-WSO]
    pub fn create_wso(&self, c: &Configuration, ws: Address) -> Result<(Configuration, Address), RuleError> {
        let creator = self.actor(c, ws)?;
        if creator.kind() == ActorKind::WS && creator.links.owner_wso.is_some() {
            return Err(RuleError::WSOAlreadyBound(ws));
        }
        let creator = self.running_creator(c, ws, ActorKind::WS)?;
        let pc = creator.state.pending.as_ref().map_or(0, |k| k.pc);
        let taken = c.top.all_addresses();
        let mut next = c.clone();
        let (var, mut wso) = self.spawn(&mut next, creator, pc, ActorKind::WSO, &taken)?;
        let a = wso.address;
        wso.links.owner_wso = Some(a);
        wso.links.interface_ws = Some(ws);
        next.top.actor_mut(ws).expect("present").links.owner_wso = Some(a);
        self.finish_create(&mut next, c, ws, &[(var, a)], vec![wso])?;
        Ok((next, a))
    }

    /// [create-WSs]: two consecutive WS creations, wired as partners.
    pub fn create_wss(&self, c: &Configuration, wsc: Address) -> Result<(Configuration, Address, Address), RuleError> {
        let creator = self.actor(c, wsc)?;
        if creator.kind() == ActorKind::WSC && (creator.links.partner_1.is_some() || creator.links.partner_2.is_some()) {
            return Err(RuleError::PartnersAlreadyCreated(wsc));
        }
        let creator = self.running_creator(c, wsc, ActorKind::WSC)?;
        let pc = creator.state.pending.as_ref().map_or(0, |k| k.pc);
        let taken = c.top.all_addresses();
        let mut next = c.clone();
        let (v1, mut w1) = self.spawn(&mut next, creator, pc, ActorKind::WS, &taken)?;
        let (v2, mut w2) = self.spawn(&mut next, creator, pc + 1, ActorKind::WS, &taken)?;
        let (a1, a2) = (w1.address, w2.address);
        for (w, partner) in [(&mut w1, a2), (&mut w2, a1)] {
            w.links.partner_ws = Some(partner);
            let link = self.def_of(w)?.links().find(|(_, k)| *k == ActorKind::WS).map(|(n, _)| n.to_string());
            if let Some(link) = link {
                w.state.vars.insert(link, Value::Addr(partner));
            }
        }
        {
            let me = next.top.actor_mut(wsc).expect("present");
            me.links.partner_1 = Some(a1);
            me.links.partner_2 = Some(a2);
        }
        self.finish_create(&mut next, c, wsc, &[(v1, a1), (v2, a2)], vec![w1, w2])?;
        Ok((next, a1, a2))
    }
}
