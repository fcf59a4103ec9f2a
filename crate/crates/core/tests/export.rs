mod common;

use abwscl_core::corpus;
use abwscl_core::dsl::Program;
use abwscl_core::export::{export_bpel, export_cdl, export_wsdl, ExportError, ExportOptions, Exported};
use common::*;

const FIXTURES: &str = r#"
WSO IdleWSO {
    WS ws-ref
    init(WS ws) {
        ws-ref := ws
    }
}

WS IdleWS {
    WSO wso-ref
    WS ws-ref
    init() {
        wso-ref := new IdleWSO(self)
    }
    setPartner(WS ws) if true {
        ws-ref := ws
    }
}

WS QuietWS {
    WSO wso-ref
    WS ws-ref
    init() {
        wso-ref := new IdleWSO(self)
    }
    setPartner(WS ws) if true {
        ws-ref := ws
    }
}

WSC IdleWSC role left, role right {
    WS ws-ref-1
    WS ws-ref-2
    init() {
        ws-ref-1 := new IdleWS() as left
        ws-ref-2 := new QuietWS() as right
        ws-ref-1 <- setPartner(ws-ref-2)
        ws-ref-2 <- setPartner(ws-ref-1)
    }
}

WSO GateWSO {
    WS ws-ref
    int n
    init(WS ws) {
        ws-ref := ws
    }
    open() if n == 0 {
        n := 1
        ws-ref <- opened()
    }
    shut() if n == 0 {
        n := 2
    }
}

WS GateWS {
    WSO wso-ref
    WS ws-ref
    init() {
        wso-ref := new GateWSO(self)
    }
    setPartner(WS ws) if true {
        ws-ref := ws
    }
    open() if true {
        wso-ref <- open()
    }
    shut() if true {
        wso-ref <- shut()
    }
    opened() if true {
        ws-ref <- opened()
    }
}
"#;

fn fixtures() -> Program {
    Program::from_sources([("fixtures.abwscl", FIXTURES)]).expect("fixtures are valid")
}

fn parse(e: &Exported) -> String {
    let xml = e.to_xml();
    roxmltree::Document::parse(&xml).unwrap_or_else(|err| panic!("{err}\n{xml}"));
    xml
}

fn names(xml: &str, tag: &str, attr: &str) -> Vec<String> {
    let doc = roxmltree::Document::parse(xml).unwrap();
    doc.descendants()
        .filter(|n| n.tag_name().name() == tag)
        .filter_map(|n| n.attribute(attr).map(str::to_string))
        .collect()
}

fn corpus_exports() -> Vec<Exported> {
    let p = corpus::program();
    let opts = ExportOptions::default();
    let mut out = Vec::new();
    for ws in ["UserAgentWS", "BookStoreWS"] {
        out.push(export_wsdl(&p, p.get(ws).unwrap(), &opts).unwrap());
    }
    for wso in ["UserAgentWSO", "BookStoreWSO"] {
        out.push(export_bpel(&p, p.get(wso).unwrap(), &opts).unwrap());
    }
    let [wsc, ua, bs] = ["BuyingBookWSC", "UserAgentWS", "BookStoreWS"].map(|n| p.get(n).unwrap());
    out.push(export_cdl(&p, wsc, ua, bs, &opts).unwrap());
    out
}

#[test]
fn corpus_exports_are_well_formed_and_stable() {
    let first: Vec<String> = corpus_exports().iter().map(parse).collect();
    let again: Vec<String> = corpus_exports().iter().map(Exported::to_xml).collect();
    assert_eq!(first, again);
    for xml in &first {
        assert!(xml.starts_with("<?xml version=\"1.0\" encoding=\"UTF-8\"?>"));
    }
}

#[test]
fn user_agent_wsdl_interfaces() {
    let p = corpus::program();
    let xml = parse(&export_wsdl(&p, p.get("UserAgentWS").unwrap(), &ExportOptions::default()).unwrap());
    assert_eq!(
        names(&xml, "interface", "name"),
        ["UserAgent4BookStoreInterface", "UserAgent4WSOInterface", "UserAgent4WSCInterface"]
    );
    let ops = names(&xml, "operation", "name");
    for op in ["opReceiveLB", "opReceivePB", "opRequestLB", "opSendSB", "opPayB", "opSetPartner"] {
        assert!(ops.iter().any(|o| o == op), "{op} missing");
    }
    assert!(xml.contains("http://example.wscs.com/2011/wsdl/UserAgent.wsdl"));
}

#[test]
fn base_uri_is_configurable() {
    let p = corpus::program();
    let opts = ExportOptions { base_uri: "urn:test".into() };
    let xml = export_wsdl(&p, p.get("BookStoreWS").unwrap(), &opts).unwrap().to_xml();
    assert!(xml.contains("urn:test/wsdl/BookStore.wsdl"));
    assert!(!xml.contains("example.wscs.com"));
}

#[test]
fn user_agent_bpel_follows_the_purchase() {
    let p = corpus::program();
    let e = export_bpel(&p, p.get("UserAgentWSO").unwrap(), &ExportOptions::default()).unwrap();
    assert!(e.diagnostics.is_empty(), "{:?}", e.diagnostics);
    let xml = parse(&e);
    let doc = roxmltree::Document::parse(&xml).unwrap();
    let seq = doc.root_element().children().find(|n| n.tag_name().name() == "sequence").unwrap();
    let acts: Vec<(String, String)> = seq
        .children()
        .filter(|n| n.is_element())
        .map(|n| (n.tag_name().name().to_string(), n.attribute("operation").unwrap().to_string()))
        .collect();
    let expected = [
        ("invoke", "opRequestLB"),
        ("receive", "opReceiveLB"),
        ("invoke", "opSendSB"),
        ("receive", "opReceivePB"),
        ("invoke", "opPayB"),
    ];
    assert_eq!(acts, expected.map(|(t, o)| (t.to_string(), o.to_string())));
    assert_eq!(names(&xml, "extension", "namespace").len(), 5);
    assert_eq!(names(&xml, "partnerLink", "name"), ["ws-ref"]);
}

#[test]
fn cdl_for_the_buying_books_composition() {
    let p = corpus::program();
    let [wsc, ua, bs] = ["BuyingBookWSC", "UserAgentWS", "BookStoreWS"].map(|n| p.get(n).unwrap());
    let xml = parse(&export_cdl(&p, wsc, ua, bs, &ExportOptions::default()).unwrap());
    assert_eq!(names(&xml, "roleType", "name"), ["user", "seller"]);
    let interactions = names(&xml, "interaction", "name");
    assert_eq!(interactions.len(), 5);
    assert_eq!(interactions[0], "InteractionBetweenUserAgentAndBookStore1");
    assert_eq!(
        names(&xml, "interaction", "operation"),
        ["opRequestLB", "opReceiveLB", "opSendSB", "opReceivePB", "opPayB"]
    );
    assert_eq!(names(&xml, "relationshipType", "name"), ["UserAgentAndBookStoreRelationship"]);
}

#[test]
fn wrong_kinds_are_rejected() {
    let p = corpus::program();
    let opts = ExportOptions::default();
    let [wsc, ua, bs, wso] = ["BuyingBookWSC", "UserAgentWS", "BookStoreWS", "UserAgentWSO"].map(|n| p.get(n).unwrap());
    assert_eq!(export_wsdl(&p, wso, &opts).unwrap_err(), ExportError::NotAWS("UserAgentWSO".into()));
    assert_eq!(export_bpel(&p, ua, &opts).unwrap_err(), ExportError::NotAWSO("UserAgentWS".into()));
    assert_eq!(export_cdl(&p, ua, ua, bs, &opts).unwrap_err(), ExportError::NotAWSC("UserAgentWS".into()));
    assert_eq!(export_cdl(&p, wsc, wso, bs, &opts).unwrap_err(), ExportError::NotAWS("UserAgentWSO".into()));
    let mut lonely = wsc.clone();
    lonely.roles.truncate(1);
    assert_eq!(
        export_cdl(&p, &lonely, ua, bs, &opts).unwrap_err(),
        ExportError::RoleCountMismatch { behavior: "BuyingBookWSC".into(), found: 1 }
    );
}

#[test]
fn ws_without_partner_calls_has_an_empty_interface() {
    let p = fixtures();
    let xml = parse(&export_wsdl(&p, p.get("IdleWS").unwrap(), &ExportOptions::default()).unwrap());
    let doc = roxmltree::Document::parse(&xml).unwrap();
    let iface = doc
        .descendants()
        .find(|n| n.tag_name().name() == "interface" && n.attribute("name") == Some("Idle4QuietInterface"))
        .expect("interface present");
    assert_eq!(iface.children().filter(|n| n.is_element()).count(), 0);
}

#[test]
fn idle_wso_has_an_empty_sequence() {
    let p = fixtures();
    let e = export_bpel(&p, p.get("IdleWSO").unwrap(), &ExportOptions::default()).unwrap();
    let xml = parse(&e);
    let doc = roxmltree::Document::parse(&xml).unwrap();
    let seq = doc.root_element().children().find(|n| n.tag_name().name() == "sequence").expect("sequence");
    assert_eq!(seq.children().filter(|n| n.is_element()).count(), 0);
    assert!(e.diagnostics.is_empty());
}

#[test]
fn guarded_alternatives_become_an_if() {
    let p = fixtures();
    let xml = parse(&export_bpel(&p, p.get("GateWSO").unwrap(), &ExportOptions::default()).unwrap());
    let doc = roxmltree::Document::parse(&xml).unwrap();
    let choice = doc.descendants().find(|n| n.tag_name().name() == "if").expect("if present");
    let kids: Vec<&str> = choice.children().filter(|n| n.is_element()).map(|n| n.tag_name().name()).collect();
    assert_eq!(kids, ["condition", "sequence", "else"]);
    let receives = names(&xml, "receive", "operation");
    assert_eq!(receives, ["opOpen", "opShut"]);
    assert_eq!(names(&xml, "invoke", "operation"), ["opOpened"]);
}

#[test]
fn silent_partners_get_a_diagnostic() {
    let p = fixtures();
    let [wsc, idle, quiet] = ["IdleWSC", "IdleWS", "QuietWS"].map(|n| p.get(n).unwrap());
    let e = export_cdl(&p, wsc, idle, quiet, &ExportOptions::default()).unwrap();
    let xml = parse(&e);
    assert!(names(&xml, "interaction", "name").is_empty());
    assert_eq!(e.diagnostics.len(), 1);
    assert_eq!(names(&xml, "roleType", "name"), ["left", "right"]);
}

#[test]
fn engine_fixture_loader_accepts_the_export_fixtures() {
    assert!(engine_for(FIXTURES).program().get("GateWSO").is_some());
}
