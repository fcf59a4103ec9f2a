#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use abwscl_core::corpus;
use abwscl_core::dsl::Program;
use abwscl_core::engine::{run, Engine, Message, RuleId, Scheduler, Trace};
use abwscl_core::interaction::{moves, PartialConfiguration, StepKey};
use abwscl_core::term::{
    ActorKind, ActorTerm, Address, AppMessage, Configuration, Event, Fragment, Links, LocalState, ProcessingState,
    Value,
};
use proptest::prelude::*;

/// Two WSs and a shared orchestration: Echo answers `hello` with `hi`.
pub const ECHO: &str = r#"
WSO EchoWSO {
    WS ws-ref
    init(WS ws) {
        ws-ref := ws
    }
    hello() if true {
        ws-ref <- hi()
    }
}

WS EchoWS {
    WSO wso-ref
    WS ws-ref
    int n
    init() {
        wso-ref := new EchoWSO(self)
    }
    setPartner(WS ws) if true {
        ws-ref := ws
    }
    hello() if n == 0 {
        n := 1
        wso-ref <- hello()
    }
    hi() if n == 1 {
        n := 2
        ws-ref <- hi()
    }
}

WS CallerWS {
    WSO wso-ref
    WS ws-ref
    init() {
        wso-ref := new EchoWSO(self)
    }
    setPartner(WS ws) if true {
        ws-ref := ws
    }
    hi() if true {
        ws-ref <- hello()
    }
}
"#;

pub fn addr(kind: ActorKind, id: u64) -> Address {
    Address::new(kind, id)
}

/// A Ready actor with no behavior of note.
pub fn bare(kind: ActorKind, id: u64) -> ActorTerm {
    let a = addr(kind, id);
    ActorTerm {
        processing: ProcessingState::Ready,
        address: a,
        behavior: "X".into(),
        state: LocalState::default(),
        last: Event::Ready,
        tau: a,
        links: Links::empty(kind),
        role: None,
    }
}

pub fn buying_books() -> (Engine, Configuration) {
    let program = corpus::program();
    let c = corpus::initial_configuration(&program, corpus::ENTRY).unwrap().unwrap();
    (Engine::new(program), c)
}

pub fn engine_for(src: &str) -> Engine {
    Engine::new(Program::from_sources([("fixture.abwscl", src)]).expect("fixture is valid"))
}

/// Closed configuration with one instance of `entry`.
pub fn start(engine: &Engine, entry: &str) -> Configuration {
    corpus::initial_configuration(engine.program(), entry).unwrap().unwrap()
}

/// App messages that left through [out], in trace order.
pub fn sent_out(trace: &Trace) -> Vec<AppMessage> {
    trace
        .steps
        .iter()
        .filter(|s| s.instance.rule == RuleId::Out)
        .filter_map(|s| match s.instance.site.messages.first() {
            Some(Message::App(m)) => Some(m.clone()),
            _ => None,
        })
        .collect()
}

/// Method names of the messages a fair run sends between the two WSs.
pub fn ws_to_ws_methods(trace: &Trace) -> Vec<String> {
    let is_ws = |a: Address| a.kind == ActorKind::WS;
    trace
        .steps
        .iter()
        .filter(|s| matches!(s.instance.rule, RuleId::SendOut))
        .filter_map(|s| match s.instance.site.messages.first() {
            Some(Message::Event(em)) => {
                let Value::Record(r) = &em.value else { return None };
                let target = r.get("target")?.as_addr()?;
                let (m, _) = r.get("msg")?.as_call()?;
                (is_ws(em.src) && is_ws(target)).then(|| m.to_string())
            }
            _ => None,
        })
        .collect()
}

pub fn fair_run(engine: &Engine, c: &Configuration, seed: u64, max: usize) -> Trace {
    run(engine, c, Scheduler::fair(seed), max)
}

fn kind_strategy() -> impl Strategy<Value = ActorKind> {
    prop_oneof![Just(ActorKind::AA), Just(ActorKind::WSO), Just(ActorKind::WS), Just(ActorKind::WSC)]
}

/// Fragments over ids drawn from `ids`, with messages and values that refer
/// to their own actors and a possible restriction.
pub fn fragment_in(ids: std::ops::Range<u64>) -> impl Strategy<Value = Fragment> {
    proptest::collection::btree_set(ids, 0..5)
        .prop_flat_map(|ids| {
            let ids: Vec<u64> = ids.into_iter().collect();
            let n = ids.len();
            (
                Just(ids),
                proptest::collection::vec(kind_strategy(), n),
                proptest::collection::vec((0..n.max(1), 0..n.max(1), any::<i8>()), 0..4),
                proptest::option::of(proptest::collection::vec(any::<bool>(), n)),
            )
        })
        .prop_map(|(ids, kinds, msgs, mask)| {
            let mut f = Fragment::empty();
            let addrs: Vec<Address> = ids.iter().zip(&kinds).map(|(i, k)| addr(*k, *i)).collect();
            for (k, a) in kinds.iter().zip(&addrs) {
                let mut actor = bare(*k, a.id);
                if let Some(other) = addrs.first() {
                    actor.state.vars.insert("peer".into(), Value::Addr(*other));
                }
                f.insert_actor(actor);
            }
            if !addrs.is_empty() {
                for (d, s, v) in msgs {
                    f.push_app(AppMessage {
                        dest: addrs[d],
                        src: Some(addrs[s]),
                        value: Value::call("m", vec![Value::Int(v as i64), Value::Addr(addrs[s])]),
                    });
                }
            }
            if let Some(mask) = mask {
                let r: BTreeSet<Address> = addrs.iter().zip(mask).filter(|(_, keep)| *keep).map(|(a, _)| *a).collect();
                f.restriction = Some(r);
            }
            f
        })
}

/// Maps every address of `f` to the same kind with `id + shift`.
pub fn shift_bijection(f: &Fragment, shift: u64) -> BTreeMap<Address, Address> {
    f.all_addresses().into_iter().map(|a| (a, addr(a.kind, a.id + shift))).collect()
}

/// Every visible sequence reachable in `depth` visible steps, by plain
/// breadth-first search over (configuration, sequence so far).
pub fn bfs_sequences(engine: &Engine, pc: &PartialConfiguration, depth: usize) -> BTreeSet<Vec<StepKey>> {
    let mut seen = BTreeSet::new();
    let mut visited = HashSet::new();
    let mut queue = VecDeque::from([(pc.config.clone(), Vec::<StepKey>::new())]);
    while let Some((c, seq)) = queue.pop_front() {
        if !visited.insert((c.clone(), seq.clone())) {
            continue;
        }
        seen.insert(seq.clone());
        for (step, next) in moves(engine, pc, &c) {
            if step.is_silent() {
                queue.push_back((next, seq.clone()));
            } else if seq.len() < depth {
                let mut longer = seq.clone();
                longer.push(step.key());
                queue.push_back((next, longer));
            }
        }
    }
    seen
}
