use std::collections::{BTreeSet, HashMap, HashSet};
use std::rc::Rc;

use super::{Engine, Message, RuleId};
use crate::term::{AppMessage, Configuration};

/// Every configuration reachable in at most `depth` steps, breadth first.
pub fn reachable(engine: &Engine, c: &Configuration, depth: usize) -> HashSet<Configuration> {
    let mut seen = HashSet::from([c.clone()]);
    let mut frontier = vec![c.clone()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for cfg in &frontier {
            for (_, succ) in engine.successors(cfg) {
                if seen.insert(succ.clone()) {
                    next.push(succ);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    seen
}

type Traces = Rc<BTreeSet<Vec<AppMessage>>>;

/// All sequences of messages leaving the configuration (via [out]) along
/// derivations of at most `depth` steps. Prefix-closed.
pub fn boundary_traces(engine: &Engine, c: &Configuration, depth: usize) -> BTreeSet<Vec<AppMessage>> {
    let mut memo = HashMap::new();
    traces_from(engine, c, depth, &mut memo).as_ref().clone()
}

fn traces_from(
    engine: &Engine,
    c: &Configuration,
    depth: usize,
    memo: &mut HashMap<(Configuration, usize), Traces>,
) -> Traces {
    if let Some(t) = memo.get(&(c.clone(), depth)) {
        return t.clone();
    }
    let mut out = BTreeSet::from([Vec::new()]);
    if depth > 0 {
        for (inst, succ) in engine.successors(c) {
            let sub = traces_from(engine, &succ, depth - 1, memo);
            let emitted = match (inst.rule, inst.site.messages.first()) {
                (RuleId::Out, Some(Message::App(m))) => Some(m.clone()),
                _ => None,
            };
            for t in sub.iter() {
                match &emitted {
                    Some(m) => {
                        let mut v = Vec::with_capacity(t.len() + 1);
                        v.push(m.clone());
                        v.extend(t.iter().cloned());
                        out.insert(v);
                    }
                    None => {
                        out.insert(t.clone());
                    }
                }
            }
        }
    }
    let out = Rc::new(out);
    memo.insert((c.clone(), depth), out.clone());
    out
}
