use std::collections::BTreeSet;

use super::xml::{Element, Node, XmlSkeleton};
use super::{cap, stem, xs_type, ExportError, ExportOptions, Exported};
use crate::dsl::{BehaviorDefinition, Program};
use crate::engine::Engine;
use crate::interaction::{interaction_semantics, InteractionStep, Shape};
use crate::scenario::{creates, interface_ws_of, orchestration_side};
use crate::term::ActorKind;

const BPEL_NS: &str = "http://docs.oasis-open.org/wsbpel/2.0/process/executable";
const XS_NS: &str = "http://www.w3.org/2001/XMLSchema";

/// Prefix tree of observed step sequences.
#[derive(Default)]
struct Trie {
    children: Vec<(InteractionStep, Trie)>,
}

impl Trie {
    fn insert(&mut self, steps: &[InteractionStep]) {
        let Some((head, rest)) = steps.split_first() else { return };
        let key = head.key();
        let at = match self.children.iter().position(|(s, _)| s.key() == key) {
            Some(i) => i,
            None => {
                self.children.push((head.clone(), Trie::default()));
                self.children.len() - 1
            }
        };
        self.children[at].1.insert(rest);
    }
}

struct Builder<'a> {
    link: &'a str,
    port: String,
    first: bool,
    messages: BTreeSet<String>,
}

impl Builder<'_> {
    fn activity(&mut self, step: &InteractionStep) -> Element {
        let (tag, v) = match &step.shape {
            Shape::Emit1(_, _, _, v) | Shape::Emit2(_, _, v) => ("invoke", v),
            Shape::Consume1(_, _, _, v) | Shape::Consume2(_, _, v) => ("receive", v),
            Shape::Silent => return Element::new("empty"),
        };
        let method = v.as_call().map_or_else(|| v.to_string(), |(m, _)| m.to_string());
        let var = cap(&method);
        self.messages.insert(method.clone());
        let e = Element::new(tag).attr("partnerLink", self.link).attr("operation", format!("op{var}"));
        let e = if tag == "invoke" {
            e.attr("portType", &self.port).attr("inputVariable", var)
        } else {
            e.attr("variable", var)
        };
        let e = if tag == "receive" && self.first { e.attr("createInstance", "yes") } else { e };
        self.first = false;
        e
    }

    /// Straight-line runs become sequence members; branch points become an
    /// `if` over the alternatives.
    fn sequence(&mut self, mut node: &Trie) -> Element {
        let mut seq = Element::new("sequence");
        loop {
            match node.children.as_slice() {
                [] => return seq,
                [(step, next)] => {
                    seq.push(self.activity(step));
                    node = next;
                }
                branches => {
                    let first = self.first;
                    let mut choice = Element::new("if");
                    for (i, (step, next)) in branches.iter().enumerate() {
                        self.first = first;
                        let act = self.activity(step);
                        let mut arm = self.sequence(next);
                        arm.children.insert(0, Node::Element(act));
                        let cond = Element::new("condition").text(format!("enabled({})", step.key().label.unwrap_or_default()));
                        match i {
                            0 => {
                                choice.push(cond);
                                choice.push(arm);
                            }
                            _ if i + 1 == branches.len() => choice.push(Element::new("else").child(arm)),
                            _ => choice.push(Element::new("elseif").child(cond).child(arm)),
                        }
                    }
                    seq.push(choice);
                    return seq;
                }
            }
        }
    }
}

/// Skeleton executable process for a WSO. The activity order comes from
/// exploring the WSO against its interface WS.
pub fn export_bpel(program: &Program, def: &BehaviorDefinition, opts: &ExportOptions) -> Result<Exported, ExportError> {
    if def.kind != ActorKind::WSO {
        return Err(ExportError::NotAWSO(def.name.clone()));
    }
    let s = stem(&def.name);
    let ws = interface_ws_of(program, &def.name);
    let ws_stem = ws.map_or(s, |w| stem(&w.name));
    let mut diagnostics = Vec::new();

    let mut root = Element::new("process")
        .attr("name", s)
        .attr("targetNamespace", format!("{}/ws-bp/{}", opts.base_uri, s.to_lowercase()))
        .attr("xmlns", BPEL_NS)
        .attr("xmlns:lns", opts.wsdl_ns(ws_stem))
        .attr("xmlns:xs", XS_NS)
        .child(
            Element::new("documentation")
                .attr("xml:lang", "EN")
                .text(format!("This document describes the {s} process.")),
        );

    let aas: Vec<&str> =
        creates(def).filter(|b| program.get(b).is_some_and(|d| d.kind == ActorKind::AA)).collect();
    if !aas.is_empty() {
        let mut ext = Element::new("extensions");
        for aa in &aas {
            ext.push(
                Element::new("extension")
                    .attr("namespace", format!("{}/aa/{aa}", opts.base_uri))
                    .attr("mustUnderstand", "no"),
            );
        }
        root.push(ext);
    }

    let links: Vec<&str> = def.links().filter(|(_, k)| *k == ActorKind::WS).map(|(n, _)| n).collect();
    let mut partner_links = Element::new("partnerLinks");
    for l in &links {
        partner_links.push(
            Element::new("partnerLink")
                .attr("name", *l)
                .attr("partnerLinkType", format!("lns:{ws_stem}OrchestrationLT"))
                .attr("partnerRole", "orchestration"),
        );
    }
    root.push(partner_links);

    let mut builder = Builder {
        link: links.first().copied().unwrap_or("interface"),
        port: format!("lns:{ws_stem}4WSOInterface"),
        first: true,
        messages: BTreeSet::new(),
    };
    let body = match orchestration_side(program, &def.name) {
        Ok(side) => {
            let depth = 2 * def.methods.len() + 2;
            let sem = interaction_semantics(&Engine::new(program.clone()), &side, depth);
            let mut trie = Trie::default();
            let mut bounded = sem.truncated;
            for seq in sem.sequences.values() {
                bounded |= seq.len() >= depth;
                trie.insert(seq);
            }
            if bounded {
                diagnostics.push(format!("UnorderableBody: {} has unbounded causality; emitted a flow placeholder", def.name));
                Element::new("flow").attr("name", format!("{s}Activities"))
            } else {
                builder.sequence(&trie)
            }
        }
        Err(e) => {
            diagnostics.push(format!("UnorderableBody: {e}"));
            Element::new("flow").attr("name", format!("{s}Activities"))
        }
    };

    let mut variables = Element::new("variables");
    for v in def.vars.iter().filter(|v| v.ty.actor_kind().is_none()) {
        variables.push(Element::new("variable").attr("name", &v.name).attr("type", xs_type(Some(v.ty))));
    }
    for m in &builder.messages {
        variables.push(Element::new("variable").attr("name", cap(m)).attr("messageType", format!("lns:{m}")));
    }
    root.push(variables);
    root.push(body);

    Ok(Exported { doc: XmlSkeleton { root }, diagnostics })
}
