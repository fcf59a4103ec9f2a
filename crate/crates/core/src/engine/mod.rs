//! The rewrite engine: rule matching, rule application, scheduling and
//! bounded exploration.

mod explore;
mod rules;
mod scheduler;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

pub use explore::{boundary_traces, reachable};
pub use scheduler::{run, Policy, Scheduler, Termination, Trace, TraceStep, TRACE_HEADER};

use crate::dsl::{EvalError, InstantiateError, Program};
use crate::term::{Address, AppMessage, Configuration, Event, EventMessage, ProcessingState, TermError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleId {
    Request,
    Compute,
    SendIn,
    SendOut,
    ReadyDeliver,
    In,
    Out,
    CreateAA,
    CreateWSO,
    CreateWSs,
    SetPartner,
}

impl RuleId {
    pub fn is_create(self) -> bool {
        matches!(self, RuleId::CreateAA | RuleId::CreateWSO | RuleId::CreateWSs)
    }

    pub fn name(self) -> &'static str {
        match self {
            RuleId::Request => "request",
            RuleId::Compute => "compute",
            RuleId::SendIn => "send-in",
            RuleId::SendOut => "send-out",
            RuleId::ReadyDeliver => "ready",
            RuleId::In => "in",
            RuleId::Out => "out",
            RuleId::CreateAA => "create-AA",
            RuleId::CreateWSO => "create-WSO",
            RuleId::CreateWSs => "create-WSs",
            RuleId::SetPartner => "setPartner",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Message {
    Event(EventMessage),
    App(AppMessage),
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Message::Event(m) => m.fmt(f),
            Message::App(m) => m.fmt(f),
        }
    }
}

/// The actor a rule fires at plus the messages it consumes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Site {
    pub actor: Address,
    pub messages: Vec<Message>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RuleInstance {
    pub rule: RuleId,
    pub site: Site,
    pub produced: Vec<String>,
}

impl RuleInstance {
    pub fn key(&self) -> (RuleId, &Site) {
        (self.rule, &self.site)
    }
}

impl fmt::Display for RuleInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @ {}", self.rule, self.site.actor)?;
        for m in &self.site.messages {
            write!(f, " [{m}]")?;
        }
        f.write_str(" -> ")?;
        if self.produced.is_empty() {
            f.write_str("()")
        } else {
            f.write_str(&self.produced.join(", "))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("no actor at {0}")]
    UnknownActor(Address),
    #[error("{0} is not running")]
    NotRunning(Address),
    #[error("{0} is not ready")]
    NotReady(Address),
    #[error("{0} has no next event")]
    NoNextEvent(Address),
    #[error("({0}, {1}) is not in the block relation")]
    NotBlockedPair(Event, Event),
    #[error("guard of `{method}` rejects the message at {actor}")]
    GuardRejected { actor: Address, method: String },
    #[error("{actor} has no method `{method}` taking {arity} argument(s)")]
    NoSuchMethod { actor: Address, method: String, arity: usize },
    #[error("message is not in the configuration")]
    MissingMessage,
    #[error("notification for {0} does not come from its transition map")]
    WrongSource(Address),
    #[error("message is not addressed to {0}")]
    WrongDestination(Address),
    #[error("malformed message value")]
    MalformedValue,
    #[error("sender and target are not under the same WSO")]
    NotSameWSO,
    #[error("unknown target {0}")]
    UnknownTarget(Address),
    #[error("target {0} is local; use send-in")]
    TargetIsLocal(Address),
    #[error("no pending message for {0}")]
    NoPendingMessage(Address),
    #[error("{0} is not a receptionist")]
    NotAReceptionist(Address),
    #[error("{0} is not enabled for a create")]
    NotEnabledForCreate(Address),
    #[error("{0} already has a WSO")]
    WSOAlreadyBound(Address),
    #[error("{0} already created its partners")]
    PartnersAlreadyCreated(Address),
    #[error("{0} cannot be its own partner")]
    SelfPartner(Address),
    #[error("address {0} is not fresh")]
    FreshnessViolation(Address),
    #[error("send target does not evaluate to an address at {0}")]
    BadTarget(Address),
    #[error("unknown behavior `{0}`")]
    UnknownBehavior(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Instantiate(#[from] InstantiateError),
    #[error(transparent)]
    Term(#[from] TermError),
}

/// Rule matcher and applier over a fixed program.
#[derive(Debug, Clone)]
pub struct Engine {
    program: Program,
}

impl Engine {
    pub fn new(program: Program) -> Self {
        Engine { program }
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    /// Every enabled rule instance together with its result, sorted by rule
    /// id then site.
    pub fn successors(&self, c: &Configuration) -> Vec<(RuleInstance, Configuration)> {
        self.instances(c, true)
    }

    /// Successor configurations only, skipping the step summaries.
    pub fn next_configurations(&self, c: &Configuration) -> Vec<Configuration> {
        self.instances(c, false).into_iter().map(|(_, next)| next).collect()
    }

    fn instances(&self, c: &Configuration, summarize: bool) -> Vec<(RuleInstance, Configuration)> {
        let mut out: Vec<(RuleInstance, Configuration)> = Vec::new();
        let mut push = |rule, actor, messages: Vec<Message>, res: Result<Configuration, RuleError>| {
            if let Ok(next) = res {
                let produced = if summarize { produced(c, &next) } else { Vec::new() };
                out.push((RuleInstance { rule, site: Site { actor, messages }, produced }, next));
            }
        };

        for actor in c.top.actors.values() {
            if actor.processing != ProcessingState::Running {
                continue;
            }
            let a = actor.address;
            match self.next_event(actor) {
                Ok(Some(_)) => push(RuleId::Request, a, vec![], self.step_request(c, a)),
                Ok(None) if actor.state.pending.is_some() => {
                    if let Some(rule) = self.create_rule(c, a) {
                        let res = match rule {
                            RuleId::CreateAA => self.create_aa(c, a).map(|r| r.0),
                            RuleId::CreateWSO => self.create_wso(c, a).map(|r| r.0),
                            _ => self.create_wss(c, a).map(|r| r.0),
                        };
                        push(rule, a, vec![], res);
                    }
                }
                _ => {}
            }
        }

        let events = c.top.events();
        for (i, em) in events.iter().enumerate() {
            if i > 0 && events[i - 1] == *em {
                continue;
            }
            let msg = || vec![Message::Event(em.clone())];
            match em.event {
                Event::Transmit => {
                    let rule = self.classify_transmit(c, em);
                    let res = match rule {
                        RuleId::SendIn => self.aa_send_in(c, em.dest, em),
                        RuleId::SendOut => self.aa_send_out(c, em.dest, em),
                        _ => self.set_partner_transmit(c, em),
                    };
                    push(rule, em.src, msg(), res);
                }
                Event::Complete | Event::Deliver => {
                    push(RuleId::Compute, em.dest, msg(), self.step_compute(c, em.dest, em));
                }
                Event::Ready => {
                    let apps = c.top.apps();
                    for (j, am) in apps.iter().enumerate() {
                        if am.dest != em.src || (j > 0 && apps[j - 1] == *am) {
                            continue;
                        }
                        let ms = vec![Message::Event(em.clone()), Message::App(am.clone())];
                        push(RuleId::ReadyDeliver, em.src, ms, self.deliver_ready(c, em, am));
                    }
                }
            }
        }

        let apps = c.top.apps();
        for (j, am) in apps.iter().enumerate() {
            if c.top.actors.contains_key(&am.dest) || (j > 0 && apps[j - 1] == *am) {
                continue;
            }
            let src = am.src.unwrap_or(am.dest);
            push(RuleId::Out, src, vec![Message::App(am.clone())], Ok(self.out_one(c, am)));
        }

        out.sort_by(|x, y| x.0.key().cmp(&y.0.key()));
        out
    }

    pub fn enabled_rules(&self, c: &Configuration) -> Vec<RuleInstance> {
        self.successors(c).into_iter().map(|(r, _)| r).collect()
    }

    /// Applies the enabled instance matching `rule` and `site`.
    pub fn apply(&self, c: &Configuration, rule: RuleId, site: &Site) -> Option<Configuration> {
        self.successors(c).into_iter().find(|(r, _)| r.rule == rule && &r.site == site).map(|(_, next)| next)
    }
}

/// Summary of what a step added: new or changed actors and new messages.
fn produced(before: &Configuration, after: &Configuration) -> Vec<String> {
    let mut out = Vec::new();
    for (a, actor) in &after.top.actors {
        match before.top.actors.get(a) {
            None => out.push(format!("new {a}")),
            Some(old) if old != actor => {
                let p = match actor.processing {
                    ProcessingState::Ready => "?",
                    ProcessingState::Running => "!",
                };
                out.push(format!("{p}{a}"));
            }
            Some(_) => {}
        }
    }
    let mut old_events: BTreeMap<&EventMessage, usize> = BTreeMap::new();
    for m in before.top.events() {
        *old_events.entry(m).or_default() += 1;
    }
    for m in after.top.events() {
        match old_events.get_mut(m) {
            Some(n) if *n > 0 => *n -= 1,
            _ => out.push(m.to_string()),
        }
    }
    let mut old_apps: BTreeMap<&AppMessage, usize> = BTreeMap::new();
    for m in before.top.apps() {
        *old_apps.entry(m).or_default() += 1;
    }
    for m in after.top.apps() {
        match old_apps.get_mut(m) {
            Some(n) if *n > 0 => *n -= 1,
            _ => out.push(m.to_string()),
        }
    }
    out
}
