use std::collections::HashMap;
use std::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Engine, RuleId, RuleInstance, Site};
use crate::term::Configuration;

pub const TRACE_HEADER: &str = "abwscl-trace v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    /// Oldest continuously-enabled instance first; ties broken by the seed.
    FairRoundRobin,
    /// Always the first instance in rule/site order. Full branching is
    /// available through [`super::reachable`] and [`super::boundary_traces`].
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scheduler {
    pub seed: u64,
    pub policy: Policy,
}

impl Scheduler {
    pub fn fair(seed: u64) -> Self {
        Scheduler { seed, policy: Policy::FairRoundRobin }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Quiescent,
    StepLimitReached,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub instance: RuleInstance,
    pub config: Configuration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub initial: Configuration,
    pub steps: Vec<TraceStep>,
    pub termination: Termination,
}

impl Trace {
    pub fn last(&self) -> &Configuration {
        self.steps.last().map_or(&self.initial, |s| &s.config)
    }

    /// Canonical text form: a version header, the initial configuration,
    /// one line per step and a closing status line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{TRACE_HEADER}").unwrap();
        writeln!(out, "0: init -> {}", self.initial).unwrap();
        for (i, s) in self.steps.iter().enumerate() {
            writeln!(out, "{}: {}", i + 1, s.instance).unwrap();
        }
        let status = match self.termination {
            Termination::Quiescent => "quiescent",
            Termination::StepLimitReached => "step-limit",
        };
        writeln!(out, "end: {status} after {} steps", self.steps.len()).unwrap();
        out
    }
}

/// Runs `c` until no rule is enabled or `max_steps` rules have fired.
pub fn run(engine: &Engine, c: &Configuration, sched: Scheduler, max_steps: usize) -> Trace {
    let mut rng = ChaCha8Rng::seed_from_u64(sched.seed);
    let mut since: HashMap<(RuleId, Site), usize> = HashMap::new();
    let mut current = c.clone();
    let mut steps = Vec::new();
    loop {
        let mut enabled = engine.successors(&current);
        if enabled.is_empty() {
            return Trace { initial: c.clone(), steps, termination: Termination::Quiescent };
        }
        if steps.len() >= max_steps {
            return Trace { initial: c.clone(), steps, termination: Termination::StepLimitReached };
        }
        let now = steps.len();
        let pick = match sched.policy {
            Policy::Exhaustive => 0,
            Policy::FairRoundRobin => {
                let mut next_since = HashMap::with_capacity(enabled.len());
                for (inst, _) in &enabled {
                    let key = (inst.rule, inst.site.clone());
                    let t = since.get(&key).copied().unwrap_or(now);
                    next_since.insert(key, t);
                }
                since = next_since;
                let ages: Vec<usize> = enabled.iter().map(|(i, _)| since[&(i.rule, i.site.clone())]).collect();
                let oldest = *ages.iter().min().expect("non-empty");
                let candidates: Vec<usize> = (0..enabled.len()).filter(|&i| ages[i] == oldest).collect();
                candidates[rng.random_range(0..candidates.len())]
            }
        };
        let (instance, config) = enabled.swap_remove(pick);
        since.remove(&(instance.rule, instance.site.clone()));
        current = config.clone();
        steps.push(TraceStep { instance, config });
    }
}
