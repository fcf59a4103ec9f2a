mod common;

use std::collections::{BTreeSet, HashMap};

use abwscl_core::engine::{run, Message, RuleError, RuleId, Scheduler, Site, Termination};
use abwscl_core::term::{
    members, ActorKind, ActorTerm, AppMessage, Configuration, Continuation, Event, EventMessage, Fragment,
    ProcessingState, Value,
};
use common::*;

fn transmit(src: &ActorTerm, target: abwscl_core::term::Address, method: &str) -> EventMessage {
    EventMessage {
        dest: src.tau,
        src: src.address,
        event: Event::Transmit,
        value: Value::record([("target", Value::Addr(target)), ("msg", Value::call(method, vec![]))]),
    }
}

fn blocked_aa(id: u64, wso: u64) -> ActorTerm {
    let mut a = bare(ActorKind::AA, id);
    a.tau = addr(ActorKind::WSO, wso);
    a.links.owner_wso = Some(a.tau);
    a.last = Event::Transmit;
    a
}

fn wso(id: u64) -> ActorTerm {
    let mut w = bare(ActorKind::WSO, id);
    w.links.owner_wso = Some(w.address);
    w
}

#[test]
fn nothing_enabled_in_the_empty_configuration() {
    let (engine, _) = buying_books();
    assert!(engine.enabled_rules(&Configuration::empty()).is_empty());
}

#[test]
fn running_aa_with_a_send_requests() {
    let (engine, _) = buying_books();
    let body = &engine.program().get("RequstLBAA").unwrap().method("requestLBFromCustomer").unwrap().body;
    let mut aa = bare(ActorKind::AA, 1);
    aa.behavior = "RequstLBAA".into();
    aa.processing = ProcessingState::Running;
    aa.tau = addr(ActorKind::WSO, 9);
    aa.state.vars.insert("wso-ref".into(), Value::Addr(aa.tau));
    aa.state.pending = Some(Continuation { method: Some("requestLBFromCustomer".into()), pc: 1, len: body.len() });
    let c = Configuration::new(Fragment::empty().with_actor(aa));
    let rules: Vec<RuleId> = engine.enabled_rules(&c).iter().map(|r| r.rule).collect();
    assert_eq!(rules, [RuleId::Request]);
}

#[test]
fn wsc_starts_by_creating_its_partners() {
    let (engine, c) = buying_books();
    let rules: Vec<RuleId> = engine.enabled_rules(&c).iter().map(|r| r.rule).collect();
    assert_eq!(rules, [RuleId::CreateWSs]);
}

#[test]
fn send_in_across_groups_is_rejected() {
    let (engine, _) = buying_books();
    let a1 = blocked_aa(1, 9);
    let a2 = blocked_aa(2, 8);
    let em = transmit(&a1, a2.address, "m");
    let mut top = Fragment::empty().with_actor(wso(9)).with_actor(wso(8)).with_actor(a1).with_actor(a2);
    top.push_event(em.clone());
    let c = Configuration::new(top);
    assert!(matches!(engine.aa_send_in(&c, em.dest, &em), Err(RuleError::NotSameWSO)));
    assert_eq!(engine.classify_transmit(&c, &em), RuleId::SendOut);
}

#[test]
fn send_out_to_a_sibling_is_rejected() {
    let (engine, _) = buying_books();
    let a1 = blocked_aa(1, 9);
    let a2 = blocked_aa(2, 9);
    let em = transmit(&a1, a2.address, "m");
    let mut top = Fragment::empty().with_actor(wso(9)).with_actor(a1).with_actor(a2.clone());
    top.push_event(em.clone());
    let c = Configuration::new(top);
    assert_eq!(engine.aa_send_out(&c, em.dest, &em).unwrap_err(), RuleError::TargetIsLocal(a2.address));
    assert_eq!(engine.classify_transmit(&c, &em), RuleId::SendIn);
    assert!(engine.aa_send_in(&c, em.dest, &em).is_ok());
}

#[test]
fn deliver_without_a_message_is_rejected() {
    let (engine, _) = buying_books();
    let mut ws = bare(ActorKind::WS, 1);
    ws.tau = ws.address;
    let ready = EventMessage { dest: ws.tau, src: ws.address, event: Event::Ready, value: Value::empty_record() };
    let mut top = Fragment::empty().with_actor(ws.clone());
    top.push_event(ready.clone());
    let c = Configuration::new(top);
    let am = AppMessage { dest: ws.address, src: None, value: Value::call("m", vec![]) };
    assert_eq!(engine.deliver_ready(&c, &ready, &am).unwrap_err(), RuleError::NoPendingMessage(ws.address));
}

#[test]
fn input_to_a_hidden_actor_is_rejected() {
    let (engine, _) = buying_books();
    let mut top = Fragment::empty().with_actor(bare(ActorKind::WS, 1)).with_actor(bare(ActorKind::AA, 2));
    top.restriction = Some(BTreeSet::from([addr(ActorKind::WS, 1)]));
    let c = Configuration::new(top);
    let hidden = AppMessage { dest: addr(ActorKind::AA, 2), src: None, value: Value::call("m", vec![]) };
    assert_eq!(engine.boundary_in(&c, &hidden).unwrap_err(), RuleError::NotAReceptionist(hidden.dest));
    let open = AppMessage { dest: addr(ActorKind::WS, 1), ..hidden };
    assert_eq!(engine.boundary_in(&c, &open).unwrap().top.apps(), [open]);
}

#[test]
fn second_wso_for_a_ws_is_rejected() {
    let (engine, _) = buying_books();
    let mut ws = bare(ActorKind::WS, 1);
    ws.links.owner_wso = Some(addr(ActorKind::WSO, 2));
    let c = Configuration::new(Fragment::empty().with_actor(ws));
    assert_eq!(engine.create_wso(&c, addr(ActorKind::WS, 1)).unwrap_err(), RuleError::WSOAlreadyBound(addr(ActorKind::WS, 1)));
}

#[test]
fn second_partner_creation_is_rejected() {
    let (engine, c) = buying_books();
    let wsc = *c.top.actors.keys().next().unwrap();
    let mut again = c.clone();
    again.top.actor_mut(wsc).unwrap().links.partner_1 = Some(addr(ActorKind::WS, 50));
    assert_eq!(engine.create_wss(&again, wsc).unwrap_err(), RuleError::PartnersAlreadyCreated(wsc));
    assert!(engine.create_wss(&c, wsc).is_ok());
}

#[test]
fn a_ws_cannot_partner_itself() {
    let (engine, _) = buying_books();
    let ws = addr(ActorKind::WS, 1);
    let c = Configuration::new(Fragment::empty().with_actor(bare(ActorKind::WS, 1)));
    assert_eq!(engine.set_partner(&c, ws, ws).unwrap_err(), RuleError::SelfPartner(ws));
    let other = addr(ActorKind::WS, 2);
    let once = engine.set_partner(&c, ws, other).unwrap();
    assert_eq!(engine.set_partner(&once, ws, other).unwrap(), once);
}

#[test]
fn create_reusing_an_address_is_rejected() {
    let (engine, c) = buying_books();
    let wsc = *c.top.actors.keys().next().unwrap();
    let mut clash = c.clone();
    clash.top.insert_actor(bare(ActorKind::WS, c.next_id()));
    assert!(matches!(engine.create_wss(&clash, wsc), Err(RuleError::FreshnessViolation(_))));
}

#[test]
fn guard_rejects_an_out_of_phase_call() {
    let (engine, c) = buying_books();
    let trace = fair_run(&engine, &c, 0, 500);
    let (cfg, ws) = trace
        .steps
        .iter()
        .find_map(|s| {
            let ws = s.config.top.actors.values().find(|a| a.behavior == "UserAgentWS" && a.last == Event::Ready)?;
            let ready = s.config.top.events().iter().any(|e| e.src == ws.address && e.event == Event::Ready);
            ready.then(|| (s.config.clone(), ws.address))
        })
        .expect("the user agent WS waits for a call at some point");
    let ready = cfg.top.events().iter().find(|e| e.src == ws && e.event == Event::Ready).unwrap().clone();
    let mut with_call = cfg.clone();
    let am = AppMessage { dest: ws, src: None, value: Value::call("payB", vec![]) };
    with_call.top.push_app(am.clone());
    assert!(matches!(engine.deliver_ready(&with_call, &ready, &am), Err(RuleError::GuardRejected { .. })));
}

#[test]
fn compute_needs_the_matching_notification() {
    let (engine, _) = buying_books();
    let a1 = blocked_aa(1, 9);
    let deliver = EventMessage {
        dest: a1.address,
        src: a1.tau,
        event: Event::Deliver,
        value: Value::record([("msg", Value::call("m", vec![]))]),
    };
    let mut top = Fragment::empty().with_actor(wso(9)).with_actor(a1.clone());
    top.push_event(deliver.clone());
    let c = Configuration::new(top);
    assert_eq!(
        engine.step_compute(&c, a1.address, &deliver).unwrap_err(),
        RuleError::NotBlockedPair(Event::Transmit, Event::Deliver)
    );
}

#[test]
fn request_without_a_continuation_is_rejected() {
    let (engine, _) = buying_books();
    let mut aa = bare(ActorKind::AA, 1);
    aa.processing = ProcessingState::Running;
    let c = Configuration::new(Fragment::empty().with_actor(aa));
    assert_eq!(engine.step_request(&c, addr(ActorKind::AA, 1)).unwrap_err(), RuleError::NoNextEvent(addr(ActorKind::AA, 1)));
}

#[test]
fn receive_lb_reaches_its_activity_actor() {
    let (engine, c) = buying_books();
    let trace = fair_run(&engine, &c, 0, 500);
    assert_eq!(trace.termination, Termination::Quiescent);
    let at = trace
        .steps
        .iter()
        .position(|s| {
            s.instance.rule == RuleId::ReadyDeliver
                && s.config.top.actor(s.instance.site.actor).is_some_and(|a| a.behavior == "ReceiveLBAA")
        })
        .expect("receiveLB delivered");
    let aa = trace.steps[at].instance.site.actor;
    let Some(Message::App(m)) = trace.steps[at].instance.site.messages.get(1) else { panic!("no app message") };
    assert_eq!(m.value.as_call().unwrap().0, "receiveLB");
    let computed = trace.steps[at..]
        .iter()
        .find(|s| s.instance.rule == RuleId::Compute && s.instance.site.actor == aa)
        .expect("compute follows");
    assert!(computed.config.top.actor(aa).unwrap().state.vars.contains_key("books"));
}

#[test]
fn runs_are_deterministic_per_seed() {
    let (engine, c) = buying_books();
    for seed in [0, 1, 42] {
        assert_eq!(fair_run(&engine, &c, seed, 500).to_text(), fair_run(&engine, &c, seed, 500).to_text());
    }
}

#[test]
fn step_limit_is_reported() {
    let (engine, c) = buying_books();
    let t = run(&engine, &c, Scheduler::fair(0), 3);
    assert_eq!(t.steps.len(), 3);
    assert_eq!(t.termination, Termination::StepLimitReached);
    assert!(t.to_text().ends_with("end: step-limit after 3 steps\n"));
}

#[test]
fn continuously_enabled_instances_fire_within_the_width() {
    let (engine, c) = buying_books();
    for seed in 0..5 {
        let trace = fair_run(&engine, &c, seed, 500);
        let mut streak: HashMap<(RuleId, Site), usize> = HashMap::new();
        let mut width = 0;
        let mut current = c.clone();
        for step in &trace.steps {
            let enabled = engine.enabled_rules(&current);
            width = width.max(enabled.len());
            let mut next = HashMap::new();
            for r in enabled {
                let key = (r.rule, r.site);
                let n = streak.get(&key).copied().unwrap_or(0) + 1;
                assert!(n <= width, "{key:?} waited {n} steps, width {width}");
                next.insert(key, n);
            }
            next.remove(&(step.instance.rule, step.instance.site.clone()));
            streak = next;
            current = step.config.clone();
        }
    }
}

#[test]
fn actors_are_never_lost_and_ids_stay_fresh() {
    let (engine, c) = buying_books();
    for seed in 0..5 {
        let trace = fair_run(&engine, &c, seed, 500);
        let mut prev = c.clone();
        for step in &trace.steps {
            let now = &step.config;
            assert!(members(&prev.top).is_subset(&members(&now.top)));
            assert!(now.next_id() >= prev.next_id());
            assert!(now.top.all_addresses().iter().all(|a| a.id < now.next_id()));
            assert!(now.top.events().len() <= now.top.actors.len());
            prev = now.clone();
        }
    }
}
