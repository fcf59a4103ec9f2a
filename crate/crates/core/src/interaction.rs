//! Boundary-labelled interaction steps of partial configurations, their
//! duals, and bounded compatibility/compositionality checks.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::rc::Rc;

use thiserror::Error;

use crate::engine::{Engine, Message, RuleId, RuleInstance};
use crate::term::{members, Address, AppMessage, Configuration, Event, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundaryKind {
    WsoWs,
    WsWso,
    WsWs,
    WsoWso,
}

impl BoundaryKind {
    pub const ALL: [BoundaryKind; 4] = [BoundaryKind::WsoWs, BoundaryKind::WsWso, BoundaryKind::WsWs, BoundaryKind::WsoWso];

    /// The same boundary seen from the other side.
    pub fn flip(self) -> Self {
        match self {
            BoundaryKind::WsoWs => BoundaryKind::WsWso,
            BoundaryKind::WsWso => BoundaryKind::WsoWs,
            other => other,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BoundaryKind::WsoWs => "wso-ws",
            BoundaryKind::WsWso => "ws-wso",
            BoundaryKind::WsWs => "ws-ws",
            BoundaryKind::WsoWso => "wso-wso",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        BoundaryKind::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl fmt::Display for BoundaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Step shapes. Emits are `(receiver, emitter, ..)` and consumes are
/// `(sender, receiver, ..)`, so a dual just swaps the two addresses.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Shape {
    Silent,
    Emit1(Address, Address, Event, Value),
    Emit2(Address, Address, Value),
    Consume1(Address, Address, Event, Value),
    Consume2(Address, Address, Value),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InteractionStep {
    pub boundary: BoundaryKind,
    pub shape: Shape,
}

fn short(v: &Value) -> String {
    match v.as_call() {
        Some((m, _)) => m.to_string(),
        None => v.to_string(),
    }
}

impl fmt::Display for InteractionStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = self.boundary;
        match &self.shape {
            Shape::Silent => write!(f, "{b}-silent"),
            Shape::Emit1(a, c, e, v) => write!(f, "{b}-emit-1({a}, {c}, {e}, {})", short(v)),
            Shape::Emit2(a, c, v) => write!(f, "{b}-emit-2({a}, {c}, {})", short(v)),
            Shape::Consume1(a, c, e, v) => write!(f, "{b}-consume-1({a}, {c}, {e}, {})", short(v)),
            Shape::Consume2(a, c, v) => write!(f, "{b}-consume-2({a}, {c}, {})", short(v)),
        }
    }
}

impl InteractionStep {
    pub fn dual(&self) -> InteractionStep {
        let shape = match &self.shape {
            Shape::Silent => Shape::Silent,
            Shape::Emit1(a, c, e, v) => Shape::Consume1(*c, *a, *e, v.clone()),
            Shape::Emit2(a, c, v) => Shape::Consume2(*c, *a, v.clone()),
            Shape::Consume1(a, c, e, v) => Shape::Emit1(*c, *a, *e, v.clone()),
            Shape::Consume2(a, c, v) => Shape::Emit2(*c, *a, v.clone()),
        };
        InteractionStep { boundary: self.boundary.flip(), shape }
    }

    pub fn is_silent(&self) -> bool {
        self.shape == Shape::Silent
    }

    /// Address-free comparison key: direction, event, method and arity.
    pub fn key(&self) -> StepKey {
        let (dir, event, v) = match &self.shape {
            Shape::Silent => (Direction::Silent, None, None),
            Shape::Emit1(_, _, e, v) => (Direction::Emit, Some(*e), Some(v)),
            Shape::Emit2(_, _, v) => (Direction::Emit, None, Some(v)),
            Shape::Consume1(_, _, e, v) => (Direction::Consume, Some(*e), Some(v)),
            Shape::Consume2(_, _, v) => (Direction::Consume, None, Some(v)),
        };
        let label = v.map(|v| match v.as_call() {
            Some((m, args)) => format!("{m}/{}", args.len()),
            None => v.type_name().to_string(),
        });
        StepKey { dir, event, label }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Silent,
    Emit,
    Consume,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StepKey {
    pub dir: Direction,
    pub event: Option<Event>,
    pub label: Option<String>,
}

impl StepKey {
    pub fn dual(&self) -> StepKey {
        let dir = match self.dir {
            Direction::Emit => Direction::Consume,
            Direction::Consume => Direction::Emit,
            Direction::Silent => Direction::Silent,
        };
        StepKey { dir, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct InteractionSequence {
    pub steps: Vec<InteractionStep>,
}

impl InteractionSequence {
    pub fn new(steps: Vec<InteractionStep>) -> Self {
        InteractionSequence { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn keys(&self) -> Vec<StepKey> {
        self.steps.iter().filter(|s| !s.is_silent()).map(InteractionStep::key).collect()
    }
}

impl fmt::Display for InteractionSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, s) in self.steps.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("]")
    }
}

/// Pointwise dual of a sequence.
pub fn dual(seq: &InteractionSequence) -> InteractionSequence {
    InteractionSequence { steps: seq.steps.iter().map(InteractionStep::dual).collect() }
}

/// `(self-side receptionists, peer)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BindingPair {
    pub self_side: BTreeSet<Address>,
    pub peer: Address,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Boundary {
    Binding(BindingPair),
    External(Address),
}

impl Boundary {
    pub fn peer(&self) -> Address {
        match self {
            Boundary::Binding(b) => b.peer,
            Boundary::External(w) => *w,
        }
    }
}

/// A fragment seen through one boundary, plus what the boundary may feed in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialConfiguration {
    pub config: Configuration,
    pub boundary: Boundary,
    pub kind: BoundaryKind,
    /// The member that talks to the peer.
    pub endpoint: Address,
    /// Calls the peer may send in, with placeholder arguments.
    pub feed: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("message endpoints are both inside or both outside")]
    NotABoundaryEvent,
    #[error("boundary mismatch: {0}")]
    BoundaryMismatch(String),
    #[error("unknown behavior `{0}`")]
    UnknownBehavior(String),
}

/// Labels an engine step (or a boundary injection, given as an [`RuleId::In`]
/// instance) as an interaction step of `pc`.
pub fn label_step(pc: &PartialConfiguration, inst: &RuleInstance) -> Result<InteractionStep, CheckError> {
    let inside = members(&pc.config.top);
    let step = |shape| Ok(InteractionStep { boundary: pc.kind, shape });
    match (inst.rule, inst.site.messages.first()) {
        (RuleId::Out, Some(Message::App(m))) => {
            let src = m.src.unwrap_or(inst.site.actor);
            if inside.contains(&m.dest) || !inside.contains(&src) {
                return Err(CheckError::NotABoundaryEvent);
            }
            step(Shape::Emit2(m.dest, src, m.value.clone()))
        }
        (RuleId::Out, Some(Message::Event(m))) => {
            if inside.contains(&m.dest) || !inside.contains(&m.src) {
                return Err(CheckError::NotABoundaryEvent);
            }
            step(Shape::Emit1(m.dest, m.src, m.event, m.value.clone()))
        }
        (RuleId::In, Some(Message::App(m))) => {
            let src = m.src.unwrap_or(pc.boundary.peer());
            if !inside.contains(&m.dest) || inside.contains(&src) {
                return Err(CheckError::NotABoundaryEvent);
            }
            step(Shape::Consume2(src, m.dest, m.value.clone()))
        }
        (RuleId::In, Some(Message::Event(m))) => {
            if !inside.contains(&m.dest) || inside.contains(&m.src) {
                return Err(CheckError::NotABoundaryEvent);
            }
            step(Shape::Consume1(m.src, m.dest, m.event, m.value.clone()))
        }
        (RuleId::In | RuleId::Out, None) => Err(CheckError::NotABoundaryEvent),
        _ => step(Shape::Silent),
    }
}

/// One labelled move of a partial configuration.
pub fn moves(engine: &Engine, pc: &PartialConfiguration, c: &Configuration) -> Vec<(InteractionStep, Configuration)> {
    let inside = members(&c.top);
    let peer = pc.boundary.peer();
    let step = |shape| InteractionStep { boundary: pc.kind, shape };

    let mut emits = Vec::new();
    for m in c.top.apps() {
        if !inside.contains(&m.dest) {
            let src = m.src.unwrap_or(m.dest);
            emits.push((step(Shape::Emit2(m.dest, src, m.value.clone())), engine.out_one(c, m)));
        }
    }
    for m in c.top.events() {
        if !inside.contains(&m.dest) {
            let mut next = c.clone();
            next.top.take_event(m);
            emits.push((step(Shape::Emit1(m.dest, m.src, m.event, m.value.clone())), next));
        }
    }
    if !emits.is_empty() {
        emits.dedup();
        return emits;
    }

    let out: Vec<(InteractionStep, Configuration)> =
        engine.next_configurations(c).into_iter().map(|next| (step(Shape::Silent), next)).collect();
    if !out.is_empty() {
        return out;
    }

    // The peer only speaks to a side that has settled.
    let mut out = Vec::new();
    if let Some(endpoint) = c.top.actor(pc.endpoint) {
        for call in &pc.feed {
            if engine.deliverable(endpoint, call) {
                let am = AppMessage { dest: pc.endpoint, src: Some(peer), value: call.clone() };
                let mut next = c.clone();
                next.top.push_app(am);
                out.push((step(Shape::Consume2(peer, pc.endpoint, call.clone())), next));
            }
        }
    }
    out
}

type SeqMap = BTreeMap<Vec<StepKey>, Vec<InteractionStep>>;

/// Result of exploring one partial configuration.
#[derive(Debug, Clone)]
pub struct Semantics {
    /// Visible sequences keyed by their address-free projection, each with
    /// one concrete witness.
    pub sequences: SeqMap,
    pub states: usize,
    pub truncated: bool,
}

impl Semantics {
    pub fn concrete(&self) -> BTreeSet<InteractionSequence> {
        self.sequences.values().map(|s| InteractionSequence::new(s.clone())).collect()
    }
}

pub const STATE_BUDGET: usize = 400_000;

/// All visible interaction sequences of at most `depth` visible steps.
/// Silent runs are compressed away; the result is prefix-closed.
pub fn interaction_semantics(engine: &Engine, pc: &PartialConfiguration, depth: usize) -> Semantics {
    let mut ex = Explorer { engine, pc, memo: HashMap::new(), stack: HashSet::new(), truncated: false };
    let seqs = ex.visit(&pc.config, depth);
    Semantics { sequences: seqs.as_ref().clone(), states: ex.memo.len(), truncated: ex.truncated }
}

struct Explorer<'a> {
    engine: &'a Engine,
    pc: &'a PartialConfiguration,
    memo: HashMap<(Configuration, usize), Rc<SeqMap>>,
    stack: HashSet<(Configuration, usize)>,
    truncated: bool,
}

impl Explorer<'_> {
    fn visit(&mut self, c: &Configuration, depth: usize) -> Rc<SeqMap> {
        let key = (c.clone(), depth);
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        let mut out = SeqMap::from([(Vec::new(), Vec::new())]);
        if self.memo.len() >= STATE_BUDGET {
            self.truncated = true;
            return Rc::new(out);
        }
        if !self.stack.insert(key.clone()) {
            return Rc::new(out);
        }
        for (step, next) in moves(self.engine, self.pc, c) {
            if step.is_silent() {
                let sub = self.visit(&next, depth);
                for (k, v) in sub.iter() {
                    out.entry(k.clone()).or_insert_with(|| v.clone());
                }
            } else if depth > 0 {
                let sub = self.visit(&next, depth - 1);
                let head = step.key();
                for (k, v) in sub.iter() {
                    let mut key = Vec::with_capacity(k.len() + 1);
                    key.push(head.clone());
                    key.extend(k.iter().cloned());
                    out.entry(key).or_insert_with(|| {
                        let mut seq = Vec::with_capacity(v.len() + 1);
                        seq.push(step.clone());
                        seq.extend(v.iter().cloned());
                        seq
                    });
                }
            }
        }
        self.stack.remove(&key);
        let out = Rc::new(out);
        self.memo.insert(key, out.clone());
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    M,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Compatibility {
    pub compatible: bool,
    /// Shortest sequence of one side whose dual the other side cannot perform.
    pub witness: Option<(Side, InteractionSequence)>,
    pub explored: usize,
    pub truncated: bool,
}

/// Bounded dual-trace containment in both directions.
pub fn compatible(
    engine: &Engine,
    a: &PartialConfiguration,
    m: &PartialConfiguration,
    depth: usize,
) -> Result<Compatibility, CheckError> {
    check_boundaries(a, m)?;
    let (sa, sm) = rayon::join(|| interaction_semantics(engine, a, depth), || interaction_semantics(engine, m, depth));
    let shortest = |from: &Semantics, to: &Semantics| {
        let mut best: Option<InteractionSequence> = None;
        for (k, v) in &from.sequences {
            let d: Vec<StepKey> = k.iter().map(StepKey::dual).collect();
            if !to.sequences.contains_key(&d) && best.as_ref().is_none_or(|b| v.len() < b.len()) {
                best = Some(InteractionSequence::new(v.clone()));
            }
        }
        best
    };
    let wa = shortest(&sa, &sm);
    let wm = shortest(&sm, &sa);
    let witness = match (wa, wm) {
        (Some(x), Some(y)) if y.len() < x.len() => Some((Side::M, y)),
        (Some(x), _) => Some((Side::A, x)),
        (None, Some(y)) => Some((Side::M, y)),
        (None, None) => None,
    };
    Ok(Compatibility {
        compatible: witness.is_none(),
        witness,
        explored: sa.sequences.len() + sm.sequences.len(),
        truncated: sa.truncated || sm.truncated,
    })
}

fn check_boundaries(a: &PartialConfiguration, m: &PartialConfiguration) -> Result<(), CheckError> {
    if a.kind.flip() != m.kind {
        return Err(CheckError::BoundaryMismatch(format!("{} does not face {}", a.kind, m.kind)));
    }
    if let (Boundary::Binding(ba), Boundary::Binding(bm)) = (&a.boundary, &m.boundary) {
        if !members(&m.config.top).contains(&ba.peer) || !members(&a.config.top).contains(&bm.peer) {
            return Err(CheckError::BoundaryMismatch("peers are not members of the opposite side".into()));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Composable,
    MemberOverlap(BTreeSet<Address>),
    Incompatible(Side, InteractionSequence),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub verdict: Verdict,
    pub depth: usize,
    pub explored: usize,
    pub truncated: bool,
}

/// Disjoint members and mutual compatibility.
pub fn composable(
    engine: &Engine,
    a: &PartialConfiguration,
    m: &PartialConfiguration,
    depth: usize,
) -> Result<Report, CheckError> {
    let ma = members(&a.config.top);
    let overlap: BTreeSet<Address> = members(&m.config.top).intersection(&ma).copied().collect();
    if !overlap.is_empty() {
        return Ok(Report { verdict: Verdict::MemberOverlap(overlap), depth, explored: 0, truncated: false });
    }
    let c = compatible(engine, a, m, depth)?;
    let verdict = match c.witness {
        None => Verdict::Composable,
        Some((side, w)) => Verdict::Incompatible(side, w),
    };
    Ok(Report { verdict, depth, explored: c.explored, truncated: c.truncated })
}
