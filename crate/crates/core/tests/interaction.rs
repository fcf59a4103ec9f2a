mod common;

use std::collections::{BTreeMap, BTreeSet};

use abwscl_core::corpus;
use abwscl_core::engine::{Engine, Message, RuleId, RuleInstance, Site};
use abwscl_core::interaction::{
    compatible, dual, interaction_semantics, label_step, Boundary, BoundaryKind, CheckError, Direction,
    InteractionSequence, InteractionStep, PartialConfiguration, Shape, StepKey,
};
use abwscl_core::scenario::side_pair;
use abwscl_core::term::{rename_configuration, ActorKind, Address, AppMessage, Configuration, Event, Value};
use common::*;
use proptest::prelude::*;

fn key(dir: Direction, label: &str) -> StepKey {
    StepKey { dir, event: None, label: Some(label.into()) }
}

fn emit(label: &str) -> StepKey {
    key(Direction::Emit, label)
}

fn consume(label: &str) -> StepKey {
    key(Direction::Consume, label)
}

fn call(m: &str) -> Value {
    Value::call(m, vec![])
}

#[test]
fn dual_swaps_ends_and_flips_the_boundary() {
    let (ws, wso) = (addr(ActorKind::WS, 2), addr(ActorKind::WSO, 1));
    let e = InteractionStep { boundary: BoundaryKind::WsoWs, shape: Shape::Emit2(ws, wso, call("requestLB")) };
    let d = e.dual();
    assert_eq!(d, InteractionStep { boundary: BoundaryKind::WsWso, shape: Shape::Consume2(wso, ws, call("requestLB")) });
    assert_eq!(d.dual(), e);
    let e1 = InteractionStep { boundary: BoundaryKind::WsWs, shape: Shape::Emit1(ws, wso, Event::Complete, Value::empty_record()) };
    assert_eq!(e1.dual().shape, Shape::Consume1(wso, ws, Event::Complete, Value::empty_record()));
    assert_eq!(e.to_string(), "wso-ws-emit-2(WS#2, WSO#1, requestLB)");
    let silent = InteractionStep { boundary: BoundaryKind::WsoWso, shape: Shape::Silent };
    assert_eq!(silent.dual().shape, Shape::Silent);
    assert_eq!(dual(&InteractionSequence::default()), InteractionSequence::default());
    assert_eq!(e.key().dual(), d.key());
}

#[test]
fn boundary_names_round_trip() {
    for k in BoundaryKind::ALL {
        assert_eq!(BoundaryKind::parse(k.name()), Some(k));
        assert_eq!(k.flip().flip(), k);
    }
    assert_eq!(BoundaryKind::WsoWs.flip(), BoundaryKind::WsWso);
    assert_eq!(BoundaryKind::parse("ws-aa"), None);
}

#[test]
fn every_engine_step_gets_a_label() {
    let program = corpus::program();
    let engine = Engine::new(program.clone());
    for (a, b, kind) in [
        ("UserAgentWSO", "UserAgentWS", BoundaryKind::WsoWs),
        ("UserAgentWS", "BookStoreWS", BoundaryKind::WsWs),
    ] {
        let (pc, _) = side_pair(&program, a, b, kind).unwrap();
        let mut frontier = vec![pc.config.clone()];
        for _ in 0..30 {
            let Some(c) = frontier.pop() else { break };
            for (inst, next) in engine.successors(&c) {
                let step = label_step(&PartialConfiguration { config: c.clone(), ..pc.clone() }, &inst);
                match inst.rule {
                    RuleId::Out => assert!(matches!(step, Ok(InteractionStep { shape: Shape::Emit2(..), .. }))),
                    _ => assert_eq!(step.map(|s| s.shape), Ok(Shape::Silent)),
                }
                frontier.push(next);
            }
        }
    }
}

#[test]
fn labels_reject_non_boundary_messages() {
    let program = corpus::program();
    let (pc, _) = side_pair(&program, "UserAgentWS", "BookStoreWS", BoundaryKind::WsWs).unwrap();
    let inside = pc.endpoint;
    let internal = AppMessage { dest: inside, src: Some(inside), value: call("m") };
    let out = |m: AppMessage| RuleInstance {
        rule: RuleId::Out,
        site: Site { actor: inside, messages: vec![Message::App(m)] },
        produced: vec![],
    };
    assert_eq!(label_step(&pc, &out(internal.clone())), Err(CheckError::NotABoundaryEvent));
    let bare_in = RuleInstance { rule: RuleId::In, site: Site { actor: inside, messages: vec![] }, produced: vec![] };
    assert_eq!(label_step(&pc, &bare_in), Err(CheckError::NotABoundaryEvent));
    let incoming = RuleInstance { rule: RuleId::In, ..out(AppMessage { src: None, ..internal }) };
    assert_eq!(
        label_step(&pc, &incoming).unwrap().shape,
        Shape::Consume2(pc.boundary.peer(), inside, call("m"))
    );
}

#[test]
fn empty_side_has_only_the_empty_sequence() {
    let engine = Engine::new(corpus::program());
    let pc = PartialConfiguration {
        config: Configuration::empty(),
        boundary: Boundary::External(addr(ActorKind::WS, 7)),
        kind: BoundaryKind::WsoWso,
        endpoint: addr(ActorKind::WSO, 1),
        feed: vec![call("m")],
    };
    let sem = interaction_semantics(&engine, &pc, 5);
    assert_eq!(sem.sequences.keys().cloned().collect::<Vec<_>>(), vec![Vec::<StepKey>::new()]);
    assert!(!sem.truncated);
}

#[test]
fn user_agent_wso_plays_the_whole_purchase() {
    let program = corpus::program();
    let (pc, _) = side_pair(&program, "UserAgentWSO", "UserAgentWS", BoundaryKind::WsoWs).unwrap();
    let sem = interaction_semantics(&Engine::new(program), &pc, 10);
    let purchase = vec![emit("requestLB/0"), consume("receiveLB/1"), emit("sendSB/1"), consume("receivePB/1"), emit("payB/0")];
    assert!(sem.sequences.contains_key(&purchase));
    for n in 0..purchase.len() {
        assert!(sem.sequences.contains_key(&purchase[..n]), "prefix {n} missing");
    }
    assert!(!sem.sequences.contains_key(&purchase[1..]));
}

#[test]
fn semantics_match_breadth_first_search() {
    let engine = engine_for(ECHO);
    let program = engine.program().clone();
    for (a, b, kind) in [
        ("EchoWS", "CallerWS", BoundaryKind::WsWs),
        ("CallerWS", "EchoWS", BoundaryKind::WsWs),
        ("EchoWSO", "EchoWS", BoundaryKind::WsoWs),
    ] {
        let (pc, pm) = side_pair(&program, a, b, kind).unwrap();
        for side in [&pc, &pm] {
            let sem = interaction_semantics(&engine, side, 6);
            let got: BTreeSet<Vec<StepKey>> = sem.sequences.keys().cloned().collect();
            assert_eq!(got, bfs_sequences(&engine, side, 6), "{a}/{b} at {kind}");
        }
    }
    let (echo, _) = side_pair(&program, "EchoWS", "CallerWS", BoundaryKind::WsWs).unwrap();
    let sem = interaction_semantics(&engine, &echo, 6);
    assert!(sem.sequences.contains_key(&vec![consume("hello/0"), emit("hi/0")]));
    assert!(!sem.sequences.contains_key(&vec![emit("hi/0")]));
}

#[test]
fn closed_run_is_a_sequence_of_each_ws_side() {
    let program = corpus::program();
    let engine = Engine::new(program.clone());
    let (ua, bs) = side_pair(&program, "UserAgentWS", "BookStoreWS", BoundaryKind::WsWs).unwrap();
    let trace = fair_run(&engine, &corpus::initial_configuration(&program, corpus::ENTRY).unwrap().unwrap(), 0, 500);
    let ws_of = |name: &str| trace.last().top.actors.values().find(|a| a.behavior == name).unwrap().address;
    let ua_ws = ws_of("UserAgentWS");
    let mut ua_keys = Vec::new();
    for step in &trace.steps {
        if step.instance.rule != RuleId::SendOut {
            continue;
        }
        let Some(Message::Event(em)) = step.instance.site.messages.first() else { continue };
        let Value::Record(r) = &em.value else { continue };
        let target = r["target"].as_addr().unwrap();
        let (m, args) = r["msg"].as_call().unwrap();
        if em.src.kind != ActorKind::WS || target.kind != ActorKind::WS {
            continue;
        }
        let label = format!("{m}/{}", args.len());
        ua_keys.push(if em.src == ua_ws { emit(&label) } else { consume(&label) });
    }
    assert_eq!(ua_keys.len(), 5);
    let bs_keys: Vec<StepKey> = ua_keys.iter().map(StepKey::dual).collect();
    let depth = 12;
    assert!(interaction_semantics(&engine, &ua, depth).sequences.contains_key(&ua_keys));
    assert!(interaction_semantics(&engine, &bs, depth).sequences.contains_key(&bs_keys));
}

fn renamed(pc: &PartialConfiguration, shift: u64) -> PartialConfiguration {
    let mut bij: BTreeMap<Address, Address> = shift_bijection(&pc.config.top, shift);
    let peer = pc.boundary.peer();
    bij.entry(peer).or_insert(addr(peer.kind, peer.id + shift));
    let boundary = match &pc.boundary {
        Boundary::External(a) => Boundary::External(bij[a]),
        Boundary::Binding(b) => {
            let mut b = b.clone();
            b.peer = bij[&b.peer];
            b.self_side = b.self_side.iter().map(|a| bij[a]).collect();
            Boundary::Binding(b)
        }
    };
    let config = rename_configuration(&pc.config, &bij).unwrap();
    let next_id = config.next_id().max(pc.config.next_id() + shift);
    PartialConfiguration {
        config: config.with_next_id(next_id),
        boundary,
        kind: pc.kind,
        endpoint: bij[&pc.endpoint],
        feed: pc.feed.clone(),
    }
}

#[test]
fn semantics_ignore_addresses() {
    let program = corpus::program();
    let engine = Engine::new(program.clone());
    let (pc, _) = side_pair(&program, "UserAgentWS", "BookStoreWS", BoundaryKind::WsWs).unwrap();
    let before: Vec<_> = interaction_semantics(&engine, &pc, 8).sequences.into_keys().collect();
    for shift in [1, 5000] {
        let after: Vec<_> = interaction_semantics(&engine, &renamed(&pc, shift), 8).sequences.into_keys().collect();
        assert_eq!(before, after);
    }
}

#[test]
fn sides_must_face_each_other() {
    let program = corpus::program();
    let engine = Engine::new(program.clone());
    let (a, m) = side_pair(&program, "UserAgentWS", "BookStoreWS", BoundaryKind::WsWs).unwrap();
    let (wso, _) = side_pair(&program, "UserAgentWSO", "UserAgentWS", BoundaryKind::WsoWs).unwrap();
    assert!(matches!(compatible(&engine, &wso, &m, 4), Err(CheckError::BoundaryMismatch(_))));
    let mut stranger = m.clone();
    if let Boundary::Binding(b) = &mut stranger.boundary {
        b.peer = addr(ActorKind::WS, 999_999);
    }
    assert!(matches!(compatible(&engine, &a, &stranger, 4), Err(CheckError::BoundaryMismatch(_))));
    assert!(side_pair(&program, "UserAgentWS", "BookStoreWS", BoundaryKind::WsoWs).is_err());
    assert_eq!(
        side_pair(&program, "NoSuchWS", "BookStoreWS", BoundaryKind::WsWs).unwrap_err(),
        CheckError::UnknownBehavior("NoSuchWS".into())
    );
}

fn step_strategy() -> impl Strategy<Value = InteractionStep> {
    let kind = prop::sample::select(BoundaryKind::ALL.to_vec());
    let a = (0u64..4).prop_map(|i| addr(ActorKind::WS, i));
    let m = prop::sample::select(vec!["requestLB", "receiveLB", "sendSB"]);
    let ev = prop::sample::select(vec![Event::Transmit, Event::Complete, Event::Ready, Event::Deliver]);
    (kind, a.clone(), a, m, ev, 0..5u8).prop_map(|(boundary, x, y, m, e, s)| {
        let v = call(m);
        let shape = match s {
            0 => Shape::Silent,
            1 => Shape::Emit1(x, y, e, v),
            2 => Shape::Emit2(x, y, v),
            3 => Shape::Consume1(x, y, e, v),
            _ => Shape::Consume2(x, y, v),
        };
        InteractionStep { boundary, shape }
    })
}

proptest! {
    #[test]
    fn dual_is_an_involution(steps in prop::collection::vec(step_strategy(), 0..8)) {
        let s = InteractionSequence::new(steps);
        prop_assert_eq!(dual(&dual(&s)), s.clone());
        prop_assert_eq!(dual(&s).len(), s.len());
        let keys: Vec<StepKey> = s.keys().iter().map(StepKey::dual).collect();
        prop_assert_eq!(dual(&s).keys(), keys);
    }
}
