use super::wsdl::{partner_interface, role_of};
use super::xml::{Element, XmlSkeleton};
use super::{cap, sends_to, stem, ExportError, ExportOptions, Exported};
use crate::dsl::{Action, BehaviorDefinition, Program};
use crate::term::ActorKind;

const CDL_NS: &str = "http://www.w3.org/2005/10/cdl";

/// One message between the two partners.
struct Exchange<'d> {
    method: &'d str,
    /// `true` when the first partner sends.
    forward: bool,
}

/// Matched send/method pairs in the first partner's declaration order: for
/// each of its methods, what it sends to the second, then what it receives.
fn exchanges<'d>(ws1: &'d BehaviorDefinition, ws2: &'d BehaviorDefinition) -> Vec<Exchange<'d>> {
    let accepts = |d: &BehaviorDefinition, m: &str| d.method(m).is_some_and(|md| !md.local);
    let sends1 = sends_to(ws1, ActorKind::WS);
    let sends2 = sends_to(ws2, ActorKind::WS);
    let mut out: Vec<Exchange> = Vec::new();
    let mut push = |method: &'d str, forward: bool| {
        if !out.iter().any(|e| e.method == method && e.forward == forward) {
            out.push(Exchange { method, forward });
        }
    };
    let scopes = std::iter::once(None).chain(ws1.methods.iter().map(|m| Some(m.name.as_str())));
    for scope in scopes {
        for s in sends1.iter().filter(|s| s.from == scope) {
            if accepts(ws2, s.method) {
                push(s.method, true);
            }
        }
        if let Some(name) = scope {
            if sends2.iter().any(|s| s.method == name) && accepts(ws1, name) {
                push(name, false);
            }
        }
    }
    out
}

/// Skeleton choreography package for a WSC and the two partners it links.
pub fn export_cdl(
    program: &Program,
    def: &BehaviorDefinition,
    ws1: &BehaviorDefinition,
    ws2: &BehaviorDefinition,
    opts: &ExportOptions,
) -> Result<Exported, ExportError> {
    if def.kind != ActorKind::WSC {
        return Err(ExportError::NotAWSC(def.name.clone()));
    }
    if def.roles.len() != 2 {
        return Err(ExportError::RoleCountMismatch { behavior: def.name.clone(), found: def.roles.len() });
    }
    for ws in [ws1, ws2] {
        if ws.kind != ActorKind::WS {
            return Err(ExportError::NotAWS(ws.name.clone()));
        }
    }
    let (s1, s2) = (stem(&ws1.name), stem(&ws2.name));
    let role1 = role_of(program, &ws1.name).unwrap_or_else(|| def.roles[0].clone());
    let role2 = role_of(program, &ws2.name).unwrap_or_else(|| def.roles[1].clone());
    let ns = format!("{}/cdl/{}", opts.base_uri, def.name);
    let relationship = format!("{s1}And{s2}Relationship");
    let flows = exchanges(ws1, ws2);
    let mut diagnostics = Vec::new();
    if flows.is_empty() {
        diagnostics.push(format!("no matching methods between {} and {}", ws1.name, ws2.name));
    }

    let mut root = Element::new("package")
        .attr("xmlns", CDL_NS)
        .attr("xmlns:cdl", CDL_NS)
        .attr("xmlns:xsd", "http://www.w3.org/2001/XMLSchema")
        .attr("xmlns:p1ns", opts.wsdl_ns(s1))
        .attr("xmlns:p2ns", opts.wsdl_ns(s2))
        .attr("xmlns:tns", &ns)
        .attr("targetNamespace", &ns)
        .attr("name", &def.name)
        .attr("version", "1.0");

    for f in &flows {
        let prefix = if f.forward { "p2ns" } else { "p1ns" };
        root.push(
            Element::new("informationType")
                .attr("name", format!("{}Type", f.method))
                .attr("type", format!("{prefix}:t{}", cap(f.method))),
        );
    }
    for v in &def.vars {
        if v.ty.actor_kind().is_none() {
            root.push(Element::new("informationType").attr("name", format!("{}Type", v.name)).attr("type", format!("xsd:{}", v.ty.name())));
        }
    }

    let behavior1 = format!("{s1}4{s2}");
    let behavior2 = format!("{s2}4{s1}");
    for (role, behavior, prefix, ws, other) in [
        (&role1, &behavior1, "p1ns", ws1, ws2),
        (&role2, &behavior2, "p2ns", ws2, ws1),
    ] {
        root.push(
            Element::new("roleType").attr("name", role.as_str()).child(
                Element::new("behavior")
                    .attr("name", behavior.as_str())
                    .attr("interface", format!("{prefix}:{}", partner_interface(&ws.name, Some(&other.name)))),
            ),
        );
    }
    root.push(
        Element::new("relationshipType")
            .attr("name", &relationship)
            .child(Element::new("roleType").attr("typeRef", format!("tns:{role1}")).attr("behavior", &behavior1))
            .child(Element::new("roleType").attr("typeRef", format!("tns:{role2}")).attr("behavior", &behavior2)),
    );
    for (ws, role) in [(ws1, &role1), (ws2, &role2)] {
        root.push(
            Element::new("participantType")
                .attr("name", stem(&ws.name))
                .child(Element::new("roleType").attr("typeRef", format!("tns:{role}"))),
        );
    }

    let mut choreography = Element::new("choreography")
        .attr("name", &def.name)
        .child(Element::new("relationship").attr("type", format!("tns:{relationship}")));
    let mut vars = Element::new("variableDefinitions");
    for f in &flows {
        vars.push(Element::new("variable").attr("name", f.method).attr("informationType", format!("tns:{}Type", f.method)));
    }
    for v in def.vars.iter().filter(|v| v.ty.actor_kind().is_none()) {
        vars.push(Element::new("variable").attr("name", &v.name).attr("informationType", format!("tns:{}Type", v.name)));
    }
    choreography.push(vars);

    let mut seq = Element::new("sequence");
    for a in def.all_bodies().flat_map(|m| m.body.iter()) {
        if let Action::Assign { var, expr, .. } = a {
            seq.push(
                Element::new("assign").attr("roleType", format!("tns:{role1}")).child(
                    Element::new("copy")
                        .attr("name", var)
                        .child(Element::new("source").attr("expression", crate::dsl::pretty::expr(expr)))
                        .child(Element::new("target").attr("variable", format!("cdl:getVariable('tns:{var}','','')"))),
                ),
            );
        }
    }
    for (i, f) in flows.iter().enumerate() {
        let (from, to) = if f.forward { (&role1, &role2) } else { (&role2, &role1) };
        let var = format!("cdl:getVariable('tns:{}','','')", f.method);
        seq.push(
            Element::new("interaction")
                .attr("name", format!("InteractionBetween{s1}And{s2}{}", i + 1))
                .attr("operation", format!("op{}", cap(f.method)))
                .child(
                    Element::new("participate")
                        .attr("relationshipType", format!("tns:{relationship}"))
                        .attr("fromRoleTypeRef", format!("tns:{from}"))
                        .attr("toRoleTypeRef", format!("tns:{to}")),
                )
                .child(
                    Element::new("exchange")
                        .attr("name", f.method)
                        .attr("informationType", format!("tns:{}Type", f.method))
                        .attr("action", "request")
                        .child(Element::new("send").attr("variable", &var))
                        .child(Element::new("receive").attr("variable", &var)),
                ),
        );
    }
    choreography.push(seq);
    root.push(choreography);

    Ok(Exported { doc: XmlSkeleton { root }, diagnostics })
}
