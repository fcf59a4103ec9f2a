use super::xml::{Element, XmlSkeleton};
use super::{cap, sends_to, stem, xs_type, ExportError, ExportOptions, Exported};
use crate::dsl::{Action, BehaviorDefinition, MethodDefinition, Program};
use crate::scenario::{creates, partner_of};
use crate::term::ActorKind;

const WSDL_NS: &str = "http://www.w3.org/ns/wsdl";
const PLNK_NS: &str = "http://docs.oasis-open.org/wsbpel/2.0/plnktype";
const SOAP_NS: &str = "http://www.w3.org/ns/wsdl/soap";
const XS_NS: &str = "http://www.w3.org/2001/XMLSchema";
const IN_ONLY: &str = "http://www.w3.org/ns/wsdl/in-only";

/// The role a WSC assigns to `ws` when creating it.
pub(super) fn role_of(program: &Program, ws: &str) -> Option<String> {
    program.of_kind(ActorKind::WSC).find_map(|wsc| {
        wsc.all_bodies().flat_map(|m| m.body.iter()).find_map(|a| match a {
            Action::Create { behavior, role, .. } if behavior == ws => role.clone(),
            _ => None,
        })
    })
}

/// Interface names of a WS, by who calls into it.
pub(super) fn partner_interface(ws: &str, partner: Option<&str>) -> String {
    format!("{}4{}Interface", stem(ws), partner.map_or("Partner", stem))
}

fn orchestration_interface(ws: &str) -> String {
    format!("{}4WSOInterface", stem(ws))
}

fn composition_interface(ws: &str) -> String {
    format!("{}4WSCInterface", stem(ws))
}

/// Methods of `def` called by its own WSO side.
fn called_by_orchestration(program: &Program, def: &BehaviorDefinition) -> Vec<String> {
    let mut out = Vec::new();
    for wso in creates(def).filter_map(|b| program.get(b)).filter(|d| d.kind == ActorKind::WSO) {
        let aas = creates(wso).filter_map(|b| program.get(b)).filter(|d| d.kind == ActorKind::AA);
        for d in std::iter::once(wso).chain(aas) {
            out.extend(sends_to(d, ActorKind::WS).into_iter().map(|s| s.method.to_string()));
        }
    }
    out
}

fn operation(m: &MethodDefinition) -> Element {
    let c = cap(&m.name);
    Element::new("operation").attr("name", format!("op{c}")).attr("pattern", IN_ONLY).child(
        Element::new("input").attr("messageLabel", "In").attr("element", format!("ghns:{}", m.name)),
    )
}

/// Skeleton WSDL description for a WS.
pub fn export_wsdl(program: &Program, def: &BehaviorDefinition, opts: &ExportOptions) -> Result<Exported, ExportError> {
    if def.kind != ActorKind::WS {
        return Err(ExportError::NotAWS(def.name.clone()));
    }
    let name = def.name.as_str();
    let s = stem(name);
    let partner = partner_of(program, name);
    let from_wso = called_by_orchestration(program, def);
    let ns = opts.wsdl_ns(s);

    let mut root = Element::new("description")
        .attr("xmlns", WSDL_NS)
        .attr("targetNamespace", &ns)
        .attr("xmlns:tns", &ns)
        .attr("xmlns:plnk", PLNK_NS)
        .attr("xmlns:ghns", opts.schema_ns(s))
        .attr("xmlns:wsoap", SOAP_NS)
        .child(Element::new("documentation").text(format!("This document describes the {s} Web service.")));
    if let Some(p) = partner {
        root = root.attr("xmlns:pns", opts.wsdl_ns(stem(&p.name)));
    }

    let methods: Vec<&MethodDefinition> = def.methods.iter().filter(|m| !m.local).collect();
    let mut schema = Element::new("xs:schema")
        .attr("xmlns:xs", XS_NS)
        .attr("targetNamespace", opts.schema_ns(s))
        .attr("xmlns", opts.schema_ns(s));
    for m in &methods {
        let t = format!("t{}", cap(&m.name));
        schema.push(Element::new("xs:element").attr("name", &m.name).attr("type", &t));
        let mut ty = Element::new("xs:complexType").attr("name", &t);
        if !m.params.is_empty() {
            let mut seq = Element::new("xs:sequence");
            for p in &m.params {
                seq.push(Element::new("xs:element").attr("name", &p.name).attr("type", xs_type(p.ty)));
            }
            ty.push(seq);
        }
        schema.push(ty);
    }
    root.push(Element::new("types").child(schema));

    let mut groups: Vec<(String, Vec<&MethodDefinition>)> = vec![
        (partner_interface(name, partner.map(|p| p.name.as_str())), Vec::new()),
        (orchestration_interface(name), Vec::new()),
        (composition_interface(name), Vec::new()),
    ];
    for m in &methods {
        let g = if m.name == "setPartner" {
            2
        } else if from_wso.contains(&m.name) {
            1
        } else {
            0
        };
        groups[g].1.push(m);
    }
    let interfaces: Vec<(String, Vec<&MethodDefinition>)> =
        groups.into_iter().enumerate().filter(|(i, (_, ms))| *i == 0 || !ms.is_empty()).map(|(_, g)| g).collect();
    for (iface, ms) in &interfaces {
        let mut e = Element::new("interface").attr("name", iface);
        for m in ms {
            e.push(operation(m));
        }
        root.push(e);
    }

    if let Some(p) = partner {
        let my_role = role_of(program, name).unwrap_or_else(|| s.to_string());
        let their_role = role_of(program, &p.name).unwrap_or_else(|| stem(&p.name).to_string());
        root.push(
            Element::new("plnk:partnerLinkType")
                .attr("name", format!("{s}And{}LT", stem(&p.name)))
                .child(
                    Element::new("plnk:role")
                        .attr("name", my_role)
                        .attr("portType", format!("tns:{}", partner_interface(name, Some(&p.name)))),
                )
                .child(
                    Element::new("plnk:role")
                        .attr("name", their_role)
                        .attr("portType", format!("pns:{}", partner_interface(&p.name, Some(name)))),
                ),
        );
    }
    if interfaces.iter().any(|(i, _)| *i == orchestration_interface(name)) {
        root.push(
            Element::new("plnk:partnerLinkType").attr("name", format!("{s}OrchestrationLT")).child(
                Element::new("plnk:role")
                    .attr("name", "orchestration")
                    .attr("portType", format!("tns:{}", orchestration_interface(name))),
            ),
        );
    }

    for (iface, _) in &interfaces {
        root.push(
            Element::new("binding")
                .attr("name", format!("{iface}Binding"))
                .attr("interface", format!("tns:{iface}"))
                .attr("type", SOAP_NS)
                .attr("wsoap:protocol", "http://www.w3.org/2003/05/soap/bindings/HTTP/"),
        );
    }
    let mut service =
        Element::new("service").attr("name", format!("{s}Service")).attr("interface", format!("tns:{}", interfaces[0].0));
    for (iface, _) in &interfaces {
        service.push(
            Element::new("endpoint")
                .attr("name", format!("{iface}Endpoint"))
                .attr("binding", format!("tns:{iface}Binding"))
                .attr("address", format!("{}/services/{name}/{iface}", opts.base_uri)),
        );
    }
    root.push(service);

    Ok(Exported { doc: XmlSkeleton { root }, diagnostics: Vec::new() })
}
