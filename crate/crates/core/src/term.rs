//! Actor terms, messages, fragments and configurations.
//!
//! Fragments are kept flat: a map of actors keyed by address, two sorted
//! message multisets and an optional receptionist restriction. Sorting keeps
//! every value canonical, so structural equality and hashing double as
//! equality modulo associativity/commutativity of fragment composition.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use ordered_float::OrderedFloat;
use thiserror::Error;

/// The four actor kinds of the language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActorKind {
    AA,
    WSO,
    WS,
    WSC,
}

impl ActorKind {
    pub const ALL: [ActorKind; 4] = [ActorKind::AA, ActorKind::WSO, ActorKind::WS, ActorKind::WSC];

    pub fn keyword(self) -> &'static str {
        match self {
            ActorKind::AA => "AA",
            ActorKind::WSO => "WSO",
            ActorKind::WS => "WS",
            ActorKind::WSC => "WSC",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        ActorKind::ALL.into_iter().find(|k| k.keyword() == s)
    }
}

impl fmt::Display for ActorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Globally unique actor address. The kind is a rendering hint only; the id
/// alone identifies the actor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Address {
    pub id: u64,
    pub kind: ActorKind,
}

impl Address {
    pub fn new(kind: ActorKind, id: u64) -> Self {
        Address { id, kind }
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.kind, self.id)
    }
}

/// Closed value grammar. Addresses are the only way acquaintances travel.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Unit,
    Bool(bool),
    Int(i64),
    Float(OrderedFloat<f64>),
    Str(String),
    List(Vec<Value>),
    Record(BTreeMap<String, Value>),
    Addr(Address),
}

impl Value {
    pub fn float(x: f64) -> Self {
        Value::Float(OrderedFloat(x))
    }

    pub fn str(s: impl Into<String>) -> Self {
        Value::Str(s.into())
    }

    pub fn record<I, K>(fields: I) -> Self
    where
        I: IntoIterator<Item = (K, Value)>,
        K: Into<String>,
    {
        Value::Record(fields.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    pub fn empty_record() -> Self {
        Value::Record(BTreeMap::new())
    }

    /// A method-call record `{method, args}`, the payload of application messages.
    pub fn call(method: impl Into<String>, args: Vec<Value>) -> Self {
        Value::record([("method", Value::Str(method.into())), ("args", Value::List(args))])
    }

    pub fn as_call(&self) -> Option<(&str, &[Value])> {
        let Value::Record(fields) = self else { return None };
        if fields.len() != 2 {
            return None;
        }
        match (fields.get("method"), fields.get("args")) {
            (Some(Value::Str(m)), Some(Value::List(args))) => Some((m.as_str(), args.as_slice())),
            _ => None,
        }
    }

    pub fn as_addr(&self) -> Option<Address> {
        match self {
            Value::Addr(a) => Some(*a),
            _ => None,
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Unit => "unit",
            Value::Bool(_) => "bool",
            Value::Int(_) => "int",
            Value::Float(_) => "float",
            Value::Str(_) => "string",
            Value::List(_) => "list",
            Value::Record(_) => "record",
            Value::Addr(_) => "address",
        }
    }

    /// Applies `f` to every address leaf.
    pub fn map_addresses(&self, f: &impl Fn(Address) -> Address) -> Value {
        match self {
            Value::Addr(a) => Value::Addr(f(*a)),
            Value::List(items) => Value::List(items.iter().map(|v| v.map_addresses(f)).collect()),
            Value::Record(fields) => {
                Value::Record(fields.iter().map(|(k, v)| (k.clone(), v.map_addresses(f))).collect())
            }
            other => other.clone(),
        }
    }

    fn collect_addresses(&self, out: &mut BTreeSet<Address>) {
        match self {
            Value::Addr(a) => {
                out.insert(*a);
            }
            Value::List(items) => items.iter().for_each(|v| v.collect_addresses(out)),
            Value::Record(fields) => fields.values().for_each(|v| v.collect_addresses(out)),
            _ => {}
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some((method, args)) = self.as_call() {
            write!(f, "{method}(")?;
            write_joined(f, args)?;
            return f.write_str(")");
        }
        match self {
            Value::Unit => f.write_str("()"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Float(x) => write!(f, "{:?}", x.0),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::List(items) => {
                f.write_str("[")?;
                write_joined(f, items)?;
                f.write_str("]")
            }
            Value::Record(fields) => {
                f.write_str("{")?;
                for (i, (k, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{k}: {v}")?;
                }
                f.write_str("}")
            }
            Value::Addr(a) => write!(f, "{a}"),
        }
    }
}

fn write_joined(f: &mut fmt::Formatter<'_>, items: &[Value]) -> fmt::Result {
    for (i, v) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}

/// Signals (`Transmit`, `Ready`) and notifications (`Complete`, `Deliver`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Event {
    Transmit,
    Ready,
    Complete,
    Deliver,
}

impl Event {
    pub const ALL: [Event; 4] = [Event::Transmit, Event::Ready, Event::Complete, Event::Deliver];

    pub fn name(self) -> &'static str {
        match self {
            Event::Transmit => "transmit",
            Event::Ready => "ready",
            Event::Complete => "complete",
            Event::Deliver => "deliver",
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The allowed (signal, notification) pairs.
pub const BLOCK_RELATION: [(Event, Event); 2] =
    [(Event::Transmit, Event::Complete), (Event::Ready, Event::Deliver)];

/// True iff an actor whose last event was `last` may be resumed by `notification`.
pub fn blocked(last: Event, notification: Event) -> bool {
    BLOCK_RELATION.contains(&(last, notification))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProcessingState {
    /// `?`: blocked, waiting for a notification.
    Ready,
    /// `!`: executing its current body.
    Running,
}

/// Which body an actor is executing and how far it has got.
///
/// The remaining actions `body[pc..len]` are the actor's pending-action queue;
/// the action text itself lives in the behavior definition.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Continuation {
    /// `None` for the initializer, otherwise the method name.
    pub method: Option<String>,
    pub pc: usize,
    pub len: usize,
}

impl Continuation {
    pub fn is_done(&self) -> bool {
        self.pc >= self.len
    }

    pub fn remaining(&self) -> usize {
        self.len.saturating_sub(self.pc)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LocalState {
    pub vars: BTreeMap<String, Value>,
    pub pending: Option<Continuation>,
}

impl LocalState {
    pub fn has_pending(&self) -> bool {
        self.pending.as_ref().is_some_and(|c| !c.is_done())
    }
}

/// Kind-specific acquaintance slots. An absent slot is the unfilled `[ ]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Links {
    pub kind: ActorKind,
    pub owner_wso: Option<Address>,
    pub interface_ws: Option<Address>,
    pub partner_ws: Option<Address>,
    pub partner_1: Option<Address>,
    pub partner_2: Option<Address>,
}

impl Links {
    pub fn empty(kind: ActorKind) -> Self {
        Links {
            kind,
            owner_wso: None,
            interface_ws: None,
            partner_ws: None,
            partner_1: None,
            partner_2: None,
        }
    }

    fn slots_mut(&mut self) -> [&mut Option<Address>; 5] {
        [
            &mut self.owner_wso,
            &mut self.interface_ws,
            &mut self.partner_ws,
            &mut self.partner_1,
            &mut self.partner_2,
        ]
    }

    pub fn addresses(&self) -> impl Iterator<Item = Address> + '_ {
        [self.owner_wso, self.interface_ws, self.partner_ws, self.partner_1, self.partner_2]
            .into_iter()
            .flatten()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActorTerm {
    pub processing: ProcessingState,
    pub address: Address,
    pub behavior: String,
    pub state: LocalState,
    /// λ: the last event this actor generated.
    pub last: Event,
    /// τ: the actor that processes this actor's signals.
    pub tau: Address,
    pub links: Links,
    /// Role name from an `as role` clause; diagnostic only.
    pub role: Option<String>,
}

impl ActorTerm {
    pub fn kind(&self) -> ActorKind {
        self.links.kind
    }

    fn rename(&self, f: &impl Fn(Address) -> Address) -> ActorTerm {
        let mut out = self.clone();
        out.address = f(self.address);
        out.tau = f(self.tau);
        for slot in out.links.slots_mut() {
            *slot = slot.map(f);
        }
        out.state.vars = self.state.vars.iter().map(|(k, v)| (k.clone(), v.map_addresses(f))).collect();
        out
    }
}

impl fmt::Display for ActorTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = match self.processing {
            ProcessingState::Ready => "?",
            ProcessingState::Running => "!",
        };
        write!(f, "{p}({}, {}", self.address, self.behavior)?;
        let l = &self.links;
        let slot = |a: Option<Address>| a.map_or_else(|| "[ ]".to_string(), |a| a.to_string());
        match l.kind {
            ActorKind::AA => write!(f, ", {}, {}", slot(l.owner_wso), slot(l.interface_ws))?,
            ActorKind::WSO => write!(f, ", {}, {}", slot(l.owner_wso), slot(l.interface_ws))?,
            ActorKind::WS => write!(f, ", {}, {}", slot(l.owner_wso), slot(l.partner_ws))?,
            ActorKind::WSC => write!(f, ", {}, {}", slot(l.partner_1), slot(l.partner_2))?,
        }
        f.write_str(" | s: {")?;
        for (i, (k, v)) in self.state.vars.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}: {v}")?;
        }
        f.write_str("}")?;
        if let Some(c) = &self.state.pending {
            let body = c.method.as_deref().unwrap_or("init");
            write!(f, " @{body}:{}/{}", c.pc, c.len)?;
        }
        write!(f, " l: {} t: {})", self.last, self.tau)?;
        if let Some(role) = &self.role {
            write!(f, " as {role}")?;
        }
        Ok(())
    }
}

/// `dest ◀ (src, event, value)`
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventMessage {
    pub dest: Address,
    pub src: Address,
    pub event: Event,
    pub value: Value,
}

impl fmt::Display for EventMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <| ({}, {}, {})", self.dest, self.src, self.event, self.value)
    }
}

/// `dest : src ◁ value`; `src` is absent for messages injected at the boundary.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AppMessage {
    pub dest: Address,
    pub src: Option<Address>,
    pub value: Value,
}

impl fmt::Display for AppMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.src {
            Some(src) => write!(f, "{} : {} <- {}", self.dest, src, self.value),
            None => write!(f, "{} <- {}", self.dest, self.value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("fragments overlap at receptionist or member {0}")]
    OverlappingReceptionists(Address),
    #[error("{0} is not a receptionist of the fragment")]
    InvalidRestriction(Address),
    #[error("renaming is not a bijection: {0} is hit twice")]
    NotBijective(Address),
}

/// A flat actor soup with an optional receptionist restriction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Fragment {
    pub actors: BTreeMap<Address, ActorTerm>,
    events: Vec<EventMessage>,
    apps: Vec<AppMessage>,
    pub restriction: Option<BTreeSet<Address>>,
}

impl Fragment {
    /// The empty fragment ⋄.
    pub fn empty() -> Self {
        Fragment::default()
    }

    pub fn is_empty(&self) -> bool {
        self.actors.is_empty() && self.events.is_empty() && self.apps.is_empty()
    }

    pub fn with_actor(mut self, actor: ActorTerm) -> Self {
        self.insert_actor(actor);
        self
    }

    pub fn insert_actor(&mut self, actor: ActorTerm) {
        self.actors.insert(actor.address, actor);
    }

    pub fn actor(&self, a: Address) -> Option<&ActorTerm> {
        self.actors.get(&a)
    }

    pub fn actor_mut(&mut self, a: Address) -> Option<&mut ActorTerm> {
        self.actors.get_mut(&a)
    }

    pub fn events(&self) -> &[EventMessage] {
        &self.events
    }

    pub fn apps(&self) -> &[AppMessage] {
        &self.apps
    }

    pub fn push_event(&mut self, m: EventMessage) {
        let at = self.events.partition_point(|x| x <= &m);
        self.events.insert(at, m);
    }

    pub fn push_app(&mut self, m: AppMessage) {
        let at = self.apps.partition_point(|x| x <= &m);
        self.apps.insert(at, m);
    }

    /// Removes one copy of `m`; returns false if absent.
    pub fn take_event(&mut self, m: &EventMessage) -> bool {
        match self.events.binary_search(m) {
            Ok(i) => {
                self.events.remove(i);
                true
            }
            Err(_) => false,
        }
    }

    pub fn take_app(&mut self, m: &AppMessage) -> bool {
        match self.apps.binary_search(m) {
            Ok(i) => {
                self.apps.remove(i);
                true
            }
            Err(_) => false,
        }
    }

    /// Every address mentioned anywhere in the fragment.
    pub fn all_addresses(&self) -> BTreeSet<Address> {
        let mut out = BTreeSet::new();
        for actor in self.actors.values() {
            out.insert(actor.address);
            out.insert(actor.tau);
            out.extend(actor.links.addresses());
            out.extend(acquaintances(&actor.state));
        }
        for m in &self.events {
            out.insert(m.dest);
            out.insert(m.src);
            m.value.collect_addresses(&mut out);
        }
        for m in &self.apps {
            out.insert(m.dest);
            out.extend(m.src);
            m.value.collect_addresses(&mut out);
        }
        if let Some(r) = &self.restriction {
            out.extend(r.iter().copied());
        }
        out
    }
}

impl fmt::Display for Fragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        let mut first = true;
        let mut sep = |f: &mut fmt::Formatter<'_>| -> fmt::Result {
            if !std::mem::take(&mut first) {
                f.write_str(", ")?;
            }
            Ok(())
        };
        for a in self.actors.values() {
            sep(f)?;
            write!(f, "{a}")?;
        }
        for m in &self.events {
            sep(f)?;
            write!(f, "{m}")?;
        }
        for m in &self.apps {
            sep(f)?;
            write!(f, "{m}")?;
        }
        f.write_str("]")?;
        if let Some(r) = &self.restriction {
            f.write_str("|{")?;
            for (i, a) in r.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str("}")?;
        }
        Ok(())
    }
}

/// A closed rewriting subject plus the address counter used for fresh names.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub top: Fragment,
    next_id: u64,
}

impl Configuration {
    pub fn new(top: Fragment) -> Self {
        let next_id = top.all_addresses().iter().map(|a| a.id + 1).max().unwrap_or(1);
        Configuration { top, next_id }
    }

    pub fn empty() -> Self {
        Configuration::new(Fragment::empty())
    }

    /// Overrides the fresh-address counter. Only useful for provoking
    /// freshness faults in tests.
    pub fn with_next_id(mut self, next_id: u64) -> Self {
        self.next_id = next_id;
        self
    }

    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    pub fn fresh(&mut self, kind: ActorKind) -> Address {
        let a = Address::new(kind, self.next_id);
        self.next_id += 1;
        a
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.top)
    }
}

/// Sequential address allocator used when building configurations by hand.
#[derive(Debug, Clone)]
pub struct AddressAllocator {
    next: u64,
}

impl AddressAllocator {
    pub fn new() -> Self {
        AddressAllocator { next: 1 }
    }

    pub fn starting_at(next: u64) -> Self {
        AddressAllocator { next }
    }

    pub fn fresh(&mut self, kind: ActorKind) -> Address {
        let a = Address::new(kind, self.next);
        self.next += 1;
        a
    }

    pub fn peek(&self) -> u64 {
        self.next
    }
}

impl Default for AddressAllocator {
    fn default() -> Self {
        Self::new()
    }
}

/// Source of fresh addresses.
pub trait Allocator {
    fn fresh(&mut self, kind: ActorKind) -> Address;
}

impl Allocator for AddressAllocator {
    fn fresh(&mut self, kind: ActorKind) -> Address {
        AddressAllocator::fresh(self, kind)
    }
}

impl Allocator for Configuration {
    fn fresh(&mut self, kind: ActorKind) -> Address {
        Configuration::fresh(self, kind)
    }
}

/// Things that embed addresses.
pub trait Acquaintances {
    fn acquaintances(&self) -> BTreeSet<Address>;
}

impl Acquaintances for Value {
    fn acquaintances(&self) -> BTreeSet<Address> {
        let mut out = BTreeSet::new();
        self.collect_addresses(&mut out);
        out
    }
}

impl Acquaintances for LocalState {
    fn acquaintances(&self) -> BTreeSet<Address> {
        let mut out = BTreeSet::new();
        for v in self.vars.values() {
            v.collect_addresses(&mut out);
        }
        out
    }
}

pub fn acquaintances<T: Acquaintances + ?Sized>(x: &T) -> BTreeSet<Address> {
    x.acquaintances()
}

/// All actor addresses, ignoring any restriction.
pub fn members(f: &Fragment) -> BTreeSet<Address> {
    f.actors.keys().copied().collect()
}

/// The restriction set when present, otherwise every actor address.
pub fn receptionists(f: &Fragment) -> BTreeSet<Address> {
    match &f.restriction {
        Some(r) => r.clone(),
        None => members(f),
    }
}

pub fn restrict(f: &Fragment, r: &BTreeSet<Address>) -> Result<Fragment, TermError> {
    let recep = receptionists(f);
    if let Some(bad) = r.iter().find(|a| !recep.contains(a)) {
        return Err(TermError::InvalidRestriction(*bad));
    }
    let mut out = f.clone();
    out.restriction = Some(r.clone());
    Ok(out)
}

/// Multiset union of two fragments with disjoint receptionists and members.
pub fn compose_fragments(f1: &Fragment, f2: &Fragment) -> Result<Fragment, TermError> {
    let r1 = receptionists(f1);
    if let Some(a) = receptionists(f2).iter().find(|a| r1.contains(a)) {
        return Err(TermError::OverlappingReceptionists(*a));
    }
    if let Some(a) = f2.actors.keys().find(|a| f1.actors.contains_key(a)) {
        return Err(TermError::OverlappingReceptionists(*a));
    }
    let mut out = f1.clone();
    for actor in f2.actors.values() {
        out.insert_actor(actor.clone());
    }
    for m in &f2.events {
        out.push_event(m.clone());
    }
    for m in &f2.apps {
        out.push_app(m.clone());
    }
    out.restriction = match (&f1.restriction, &f2.restriction) {
        (None, None) => None,
        (a, b) => {
            let mut r = a.clone().unwrap_or_else(|| members(f1));
            r.extend(b.clone().unwrap_or_else(|| members(f2)));
            Some(r)
        }
    };
    Ok(out)
}

/// Applies an address bijection (identity outside its domain) to every
/// address occurrence of `f`.
pub fn rename(f: &Fragment, bij: &BTreeMap<Address, Address>) -> Result<Fragment, TermError> {
    let map = |a: Address| bij.get(&a).copied().unwrap_or(a);
    let mut seen = BTreeSet::new();
    for a in f.all_addresses() {
        if !seen.insert(map(a)) {
            return Err(TermError::NotBijective(map(a)));
        }
    }
    let mut images = BTreeSet::new();
    for b in bij.values() {
        if !images.insert(*b) {
            return Err(TermError::NotBijective(*b));
        }
    }
    let mut out = Fragment::empty();
    for actor in f.actors.values() {
        out.insert_actor(actor.rename(&map));
    }
    for m in &f.events {
        out.push_event(EventMessage {
            dest: map(m.dest),
            src: map(m.src),
            event: m.event,
            value: m.value.map_addresses(&map),
        });
    }
    for m in &f.apps {
        out.push_app(AppMessage {
            dest: map(m.dest),
            src: m.src.map(map),
            value: m.value.map_addresses(&map),
        });
    }
    out.restriction = f.restriction.as_ref().map(|r| r.iter().map(|a| map(*a)).collect());
    Ok(out)
}

/// Renames a whole configuration; the fresh counter moves past every image.
pub fn rename_configuration(
    c: &Configuration,
    bij: &BTreeMap<Address, Address>,
) -> Result<Configuration, TermError> {
    let top = rename(&c.top, bij)?;
    let floor = top.all_addresses().iter().map(|a| a.id + 1).max().unwrap_or(1);
    Ok(Configuration { top, next_id: c.next_id.max(floor) })
}
